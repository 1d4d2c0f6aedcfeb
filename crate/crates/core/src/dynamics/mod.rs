//! Free response of a linearized waveguide to a velocity kick on one cell.

mod energy;
mod rk;
mod spectrum;
mod sweep;

pub use energy::{
    first_crossing, front_arrivals, mechanical_energy, EnergyConvention, EnergyField, FrontArrivals, FAST_FRONT_LEVEL,
};
pub use rk::{integrate_rk, DEFAULT_RK_TOL};
pub use spectrum::{
    band_maxima, clamp_transmission, normalized_energy, spectral_energy, transmission_map, SpectrumMap,
    TransmissionMap, EPS_SAT, EPS_THS,
};
pub use sweep::{run_transient, transmission_vs_temperature, BandSplit, SweepConfig, TemperatureTransmission};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::LinearSystem;
use crate::modal::ModalSet;

/// Velocity amplitude of the tap, per unit mass ratio of the tapped cell.
pub const TAP_VELOCITY: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IcKind {
    /// Translational velocity only.
    Translational,
    /// Translational plus rotational velocity carrying equal kinetic energy.
    Mixed,
    /// Rotational velocity `v̇ √χ` instead of `v̇ / √χ`, kept for comparison.
    MixedLiteral,
}

impl IcKind {
    pub fn as_str(self) -> &'static str {
        match self {
            IcKind::Translational => "translational",
            IcKind::Mixed => "mixed",
            IcKind::MixedLiteral => "mixed-literal",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialCondition {
    pub kind: IcKind,
    pub q0: DVector<f64>,
    pub qdot0: DVector<f64>,
}

/// Tap on cell 1 from rest at equilibrium.
pub fn initial_conditions(kind: IcKind, system: &LinearSystem) -> InitialCondition {
    initial_conditions_at(kind, system, 1).expect("cell 1 always exists")
}

/// Tap on `cell` (1-based) from rest at equilibrium.
pub fn initial_conditions_at(kind: IcKind, system: &LinearSystem, cell: usize) -> Result<InitialCondition> {
    if cell == 0 || cell > system.n {
        return Err(Error::IndexOutOfRange { index: cell, count: system.n });
    }
    let i = cell - 1;
    let dof = system.dof();
    let mut qdot0 = DVector::zeros(dof);
    let v = TAP_VELOCITY * system.mu(i);
    qdot0[2 * i] = v;
    let chi = system.chi(i);
    match kind {
        IcKind::Translational => {}
        IcKind::Mixed => qdot0[2 * i + 1] = v / chi.sqrt(),
        IcKind::MixedLiteral => qdot0[2 * i + 1] = v * chi.sqrt(),
    }
    Ok(InitialCondition { kind, q0: DVector::zeros(dof), qdot0 })
}

/// Output sampling of a transient record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecordParams {
    /// Record length, s.
    pub t_end: f64,
    /// Output spacing, s.
    pub dt_out: f64,
}

impl Default for RecordParams {
    fn default() -> Self {
        RecordParams { t_end: 400e-6, dt_out: 5e-9 }
    }
}

impl RecordParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt_out > 0.0 && self.dt_out.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt_out must be positive, got {}", self.dt_out)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidParameter(format!("t_end must be non-negative, got {}", self.t_end)));
        }
        Ok(())
    }

    /// `floor(t_end / dt_out) + 1`, with a relative guard so 400 µs / 5 ns gives 80001.
    pub fn n_samples(&self) -> usize {
        (self.t_end / self.dt_out * (1.0 + 1e-12)).floor() as usize + 1
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_samples()).map(|s| s as f64 * self.dt_out).collect()
    }
}

/// Sampled response. Row `s` of `q` and `qdot` is the state at `t[s]`.
#[derive(Debug, Clone)]
pub struct TimeSeries {
    pub t: Vec<f64>,
    pub q: DMatrix<f64>,
    pub qdot: DMatrix<f64>,
    pub ic_kind: IcKind,
    pub dt_out: f64,
}

impl TimeSeries {
    pub fn n_samples(&self) -> usize {
        self.t.len()
    }

    pub fn n_cells(&self) -> usize {
        self.q.ncols() / 2
    }

    /// RMS of `self − other` over the RMS of `other`, across all samples and coordinates.
    pub fn relative_rms_difference(&self, other: &TimeSeries) -> f64 {
        let diff = (&self.q - &other.q).norm();
        let base = other.q.norm();
        if base == 0.0 {
            diff
        } else {
            diff / base
        }
    }
}

/// Exact response by modal superposition,
/// `q(t) = Φ [cos(ωt) a + sin(ωt)/ω b]` with `a = ΦᵀMq₀`, `b = ΦᵀMq̇₀`.
pub fn integrate_modal(
    system: &LinearSystem,
    modes: &ModalSet,
    ic: &InitialCondition,
    record: &RecordParams,
) -> Result<TimeSeries> {
    record.validate()?;
    let t = record.times();
    let ns = t.len();
    let nm = modes.len();
    let phi_t_m = modes.shapes.transpose() * &system.mass;
    let a = &phi_t_m * &ic.q0;
    let b = &phi_t_m * &ic.qdot0;

    let mut c = DMatrix::zeros(ns, nm);
    let mut cd = DMatrix::zeros(ns, nm);
    for m in 0..nm {
        let w = modes.freqs[m];
        let (am, bm) = (a[m], b[m]);
        if am == 0.0 && bm == 0.0 {
            continue;
        }
        for (s, &ts) in t.iter().enumerate() {
            let (sn, cs) = (w * ts).sin_cos();
            c[(s, m)] = cs * am + sn / w * bm;
            cd[(s, m)] = -w * sn * am + cs * bm;
        }
    }
    let phi_t = modes.shapes.transpose();
    let mut q = &c * &phi_t;
    let mut qdot = &cd * &phi_t;
    q.set_row(0, &ic.q0.transpose());
    qdot.set_row(0, &ic.qdot0.transpose());
    Ok(TimeSeries { t, q, qdot, ic_kind: ic.kind, dt_out: record.dt_out })
}
