//! C interface to the drumhead waveguide model.
//!
//! Objects cross the boundary as opaque handles owned by the caller and
//! released with the matching `*_free`. Every fallible call returns a
//! [`DrStatus`]; on failure the message is kept per thread and read back with
//! [`dr_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use drumhead_rom::bloch::band_edges;
use drumhead_rom::cell::{CalibratedCell, CellParams, ThermalStrainModel};
use drumhead_rom::lattice::{OperatingPoint, Waveguide};
use drumhead_rom::modal::{solve_modes, ModalSet, ModeLabel};
use drumhead_rom::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Numerical = 3,
    BufferTooSmall = 4,
    Panic = 5,
}

/// Passband edges of the periodic reference lattice, rad/s.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct DrBandEdges {
    pub temperature: f64,
    pub band1_min: f64,
    pub band1_max: f64,
    pub band2_min: f64,
    pub band2_max: f64,
}

/// Thickness-disordered chain of cells, calibrated once at construction.
pub struct DrWaveguide {
    inner: Waveguide,
}

/// Coupled equilibrium and normal modes at one temperature.
pub struct DrModes {
    op: OperatingPoint,
    modes: ModalSet,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(err: Error) -> DrStatus {
    let status = if err.is_input_error() { DrStatus::InvalidInput } else { DrStatus::Numerical };
    set_error(err.to_string());
    status
}

fn guard(f: impl FnOnce() -> DrStatus) -> DrStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic".into());
            DrStatus::Panic
        }
    }
}

/// Copies `src` into the caller's buffer. `len` must be at least `src.len()`.
unsafe fn copy_out(src: &[f64], out: *mut f64, len: usize) -> DrStatus {
    if out.is_null() {
        set_error("output buffer is null".into());
        return DrStatus::NullPointer;
    }
    if len < src.len() {
        set_error(format!("buffer holds {len} values, need {}", src.len()));
        return DrStatus::BufferTooSmall;
    }
    ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
    DrStatus::Ok
}

fn null(what: &str) -> DrStatus {
    set_error(format!("{what} is null"));
    DrStatus::NullPointer
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. Free with
/// [`dr_string_free`].
#[no_mangle]
pub extern "C" fn dr_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null_mut(), |c| c.clone().into_raw()))
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn dr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds an `n`-cell waveguide with thickness disorder `sigma_h` drawn from `seed`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn dr_waveguide_new(n: usize, sigma_h: f64, seed: u64, out: *mut *mut DrWaveguide) -> DrStatus {
    if out.is_null() {
        return null("out");
    }
    *out = ptr::null_mut();
    guard(|| {
        match Waveguide::new(n, sigma_h, seed, &CellParams::reference(), &ThermalStrainModel::REFERENCE) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(DrWaveguide { inner }));
                DrStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `wg` must come from [`dr_waveguide_new`] or be null, and is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn dr_waveguide_free(wg: *mut DrWaveguide) {
    if !wg.is_null() {
        drop(Box::from_raw(wg));
    }
}

/// Number of cells, or 0 for a null handle.
///
/// # Safety
/// `wg` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn dr_waveguide_cells(wg: *const DrWaveguide) -> usize {
    wg.as_ref().map_or(0, |w| w.inner.n())
}

/// Relative thickness of each cell into `out[0..n]`.
///
/// # Safety
/// `wg` must be a live handle; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn dr_waveguide_thickness(wg: *const DrWaveguide, out: *mut f64, len: usize) -> DrStatus {
    let Some(w) = wg.as_ref() else { return null("waveguide") };
    let h: Vec<f64> = w.inner.cells.iter().map(|c| c.params.h_ratio).collect();
    guard(|| copy_out(&h, out, len))
}

/// Solves the coupled equilibrium at `temperature` K and its normal modes.
///
/// # Safety
/// `wg` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dr_modes_solve(wg: *const DrWaveguide, temperature: f64, out: *mut *mut DrModes) -> DrStatus {
    let Some(w) = wg.as_ref() else { return null("waveguide") };
    if out.is_null() {
        return null("out");
    }
    *out = ptr::null_mut();
    guard(|| {
        let solved = w.inner.operating_point(temperature).and_then(|op| {
            let modes = solve_modes(&op.system)?;
            Ok(DrModes { op, modes })
        });
        match solved {
            Ok(m) => {
                *out = Box::into_raw(Box::new(m));
                DrStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `m` must come from [`dr_modes_solve`] or be null, and is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn dr_modes_free(m: *mut DrModes) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Number of modes (twice the cell count), or 0 for a null handle.
///
/// # Safety
/// `m` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn dr_modes_count(m: *const DrModes) -> usize {
    m.as_ref().map_or(0, |m| m.modes.len())
}

/// Angular frequencies in ascending order, rad/s.
///
/// # Safety
/// `m` must be a live handle; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn dr_modes_frequencies(m: *const DrModes, out: *mut f64, len: usize) -> DrStatus {
    let Some(m) = m.as_ref() else { return null("modes") };
    guard(|| copy_out(&m.modes.freqs, out, len))
}

/// Participation ratio of each mode, in cells.
///
/// # Safety
/// `m` must be a live handle; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn dr_modes_participation(m: *const DrModes, out: *mut f64, len: usize) -> DrStatus {
    let Some(m) = m.as_ref() else { return null("modes") };
    guard(|| copy_out(&m.modes.pr, out, len))
}

/// 1 if mode `index` (1-based) is extended, 0 if localized, -1 if out of range.
///
/// # Safety
/// `m` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn dr_modes_is_extended(m: *const DrModes, index: usize) -> i32 {
    match m.as_ref().and_then(|m| m.modes.label.get(index.wrapping_sub(1))) {
        Some(ModeLabel::Extended) => 1,
        Some(ModeLabel::Localized) => 0,
        None => -1,
    }
}

/// M-normalized shape of mode `index` (1-based), interleaved as v₁, h₁, v₂, h₂, ...
///
/// # Safety
/// `m` must be a live handle; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn dr_modes_shape(m: *const DrModes, index: usize, out: *mut f64, len: usize) -> DrStatus {
    let Some(m) = m.as_ref() else { return null("modes") };
    guard(|| match m.modes.shape(index) {
        Ok(phi) => copy_out(phi.as_slice(), out, len),
        Err(e) => fail(e),
    })
}

/// Equilibrium deflection and rotation of each cell at the solved temperature.
///
/// # Safety
/// `m` must be a live handle; `u` and `ltheta` must each hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn dr_modes_equilibrium(m: *const DrModes, u: *mut f64, ltheta: *mut f64, len: usize) -> DrStatus {
    let Some(m) = m.as_ref() else { return null("modes") };
    guard(|| match copy_out(&m.op.eqm.u_eqm, u, len) {
        DrStatus::Ok => copy_out(&m.op.eqm.ltheta_eqm, ltheta, len),
        s => s,
    })
}

/// Critical temperature of the reference cell, K.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dr_critical_temperature(out: *mut f64) -> DrStatus {
    if out.is_null() {
        return null("out");
    }
    guard(|| match CalibratedCell::new(CellParams::reference(), &ThermalStrainModel::REFERENCE) {
        Ok(c) => {
            *out = c.critical.t_star;
            DrStatus::Ok
        }
        Err(e) => fail(e),
    })
}

/// Passband edges of the periodic reference lattice at `temperature` K.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dr_band_edges(temperature: f64, out: *mut DrBandEdges) -> DrStatus {
    if out.is_null() {
        return null("out");
    }
    guard(|| {
        let model = ThermalStrainModel::REFERENCE;
        let edges = CalibratedCell::new(CellParams::reference(), &model).and_then(|c| band_edges(temperature, &c, &model));
        match edges {
            Ok(e) => {
                *out = DrBandEdges {
                    temperature: e.temperature,
                    band1_min: e.band1_min,
                    band1_max: e.band1_max,
                    band2_min: e.band2_min,
                    band2_max: e.band2_max,
                };
                DrStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}
