//! Single-cell physics of a drumhead resonator modelled as a rigid mass on a
//! von Mises truss.
//!
//! Everything here is nondimensional except the squared angular frequencies
//! (`lambda_*`, `gamma_*`, in rad²/s²) and temperatures (K). Displacements are
//! scaled by the bending confinement distance, forces by the reference bending
//! spring times that distance.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Temperature window over which the cells are characterized, in kelvin.
pub const SWEEP_RANGE: (f64, f64) = (350.0, 400.0);

/// Bracket scanned for equilibrium roots, in units of the bending confinement distance.
pub const ROOT_BRACKET: (f64, f64) = (-10.0, 10.0);
const ROOT_SCAN_STEP: f64 = 0.01;
const ROOT_TOL: f64 = 1e-14;

const T_STAR_GRID_STEP: f64 = 0.1;
const T_STAR_TOL: f64 = 1e-3;

/// Polynomial temperature laws for the bending and stretching strains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalStrainModel {
    pub beta0: f64,
    /// 1/K
    pub beta1: f64,
    /// 1/K²
    pub beta2: f64,
    pub gamma0: f64,
    /// 1/K
    pub gamma1: f64,
}

impl ThermalStrainModel {
    /// Coefficients identified for the reference drumhead cell.
    pub const REFERENCE: ThermalStrainModel = ThermalStrainModel {
        beta0: 7.65,
        beta1: -3.47e-2,
        beta2: 3.81e-5,
        gamma0: 1.9,
        gamma1: -4.07e-3,
    };

    /// Bending strain δᴮ(T).
    pub fn bending_strain(&self, t: f64) -> f64 {
        self.beta0 + self.beta1 * t + self.beta2 * t * t
    }

    /// Stretching strain δˢ(T).
    pub fn stretching_strain(&self, t: f64) -> f64 {
        self.gamma0 + self.gamma1 * t
    }
}

impl Default for ThermalStrainModel {
    fn default() -> Self {
        Self::REFERENCE
    }
}

/// Free-function form of [`ThermalStrainModel::bending_strain`].
pub fn bending_strain(t: f64, model: &ThermalStrainModel) -> f64 {
    model.bending_strain(t)
}

/// Free-function form of [`ThermalStrainModel::stretching_strain`].
pub fn stretching_strain(t: f64, model: &ThermalStrainModel) -> f64 {
    model.stretching_strain(t)
}

/// Nondimensional constants of one cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellParams {
    /// Mass ratio m_i / m_ref.
    pub mu: f64,
    /// Rotary inertia ratio J_i / (m_i L²).
    pub chi: f64,
    /// Grounding bending stiffness over mass, rad²/s².
    pub lambda_b: f64,
    /// Stretching-to-bending stiffness ratio.
    pub kappa_t: f64,
    /// Stretching confinement distance over bending confinement distance.
    pub ds_bar: f64,
    /// Thickness relative to the reference cell.
    pub h_ratio: f64,
}

/// Natural frequency of the reference cell's bending spring, Hz.
pub const REFERENCE_BENDING_FREQ_HZ: f64 = 9.40e6;

impl CellParams {
    pub fn reference() -> Self {
        let omega = 2.0 * PI * REFERENCE_BENDING_FREQ_HZ;
        CellParams {
            mu: 1.0,
            chi: 1.0 / 12.0,
            lambda_b: omega * omega,
            kappa_t: 1.0,
            ds_bar: 1.0,
            h_ratio: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mu", self.mu),
            ("chi", self.chi),
            ("lambda_b", self.lambda_b),
            ("ds_bar", self.ds_bar),
            ("h_ratio", self.h_ratio),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.kappa_t >= 0.0 && self.kappa_t.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "kappa_t must be non-negative, got {}",
                self.kappa_t
            )));
        }
        Ok(())
    }

    /// Rescales a reference cell to relative thickness `h_ratio`.
    ///
    /// Bending stiffness goes as h³ and stretching stiffness and mass as h, so
    /// λᴮ ∝ h², κᵀ ∝ h⁻² and μ = h.
    pub fn scale_by_thickness(&self, h_ratio: f64) -> Result<CellParams> {
        if !(h_ratio > 0.0 && h_ratio.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "thickness ratio must be positive, got {h_ratio}"
            )));
        }
        Ok(CellParams {
            mu: self.mu * h_ratio / self.h_ratio,
            chi: self.chi,
            lambda_b: self.lambda_b * (h_ratio / self.h_ratio).powi(2),
            kappa_t: self.kappa_t * (h_ratio / self.h_ratio).powi(-2),
            ds_bar: self.ds_bar,
            h_ratio,
        })
    }

    /// Nondimensional restoring force of the grounding springs at displacement `u`.
    pub fn buckling_force(&self, u: f64, t: f64, model: &ThermalStrainModel) -> f64 {
        let ds = model.stretching_strain(t);
        let r = (1.0 + (u / self.ds_bar).powi(2)).sqrt();
        u - model.bending_strain(t) + self.kappa_t * u * (1.0 - (1.0 + ds) / r)
    }

    /// Analytic derivative of [`buckling_force`](Self::buckling_force) with respect to `u`.
    pub fn buckling_tangent(&self, u: f64, t: f64, model: &ThermalStrainModel) -> f64 {
        let ds = model.stretching_strain(t);
        let s = 1.0 + (u / self.ds_bar).powi(2);
        let r = s.sqrt();
        1.0 + self.kappa_t * (1.0 - (1.0 + ds) / r)
            + self.kappa_t * (1.0 + ds) * u * u / (self.ds_bar * self.ds_bar * s * r)
    }

    /// Most stable isolated equilibrium at temperature `t`.
    ///
    /// Roots are bracketed by a uniform scan of [`ROOT_BRACKET`] and refined
    /// by bisection; among the roots with positive tangent the stiffest wins.
    pub fn solve_equilibrium(&self, t: f64, model: &ThermalStrainModel) -> Result<CellState> {
        let f = |u: f64| self.buckling_force(u, t, model);
        let (lo, hi) = ROOT_BRACKET;
        let steps = ((hi - lo) / ROOT_SCAN_STEP).round() as usize;

        let mut best: Option<(f64, f64)> = None;
        let mut consider = |u: f64| {
            let k = self.buckling_tangent(u, t, model);
            if k > 0.0 && best.map_or(true, |(_, kb)| k > kb) {
                best = Some((u, k));
            }
        };

        let mut u_prev = lo;
        let mut f_prev = f(lo);
        for j in 1..=steps {
            let u = lo + j as f64 * ROOT_SCAN_STEP;
            let fu = f(u);
            if f_prev == 0.0 {
                consider(u_prev);
            } else if f_prev * fu < 0.0 {
                consider(bisect(&f, u_prev, u, f_prev));
            }
            u_prev = u;
            f_prev = fu;
        }
        if f_prev == 0.0 {
            consider(u_prev);
        }

        let (u_eqm, tangent) = best.ok_or(Error::NoStableRoot { temperature: t, lo, hi })?;
        Ok(CellState { u_eqm, tangent, lambda_buck: self.lambda_b * tangent })
    }

    /// Linearized grounding stiffness Λᴮᵘᶜᵏ(T) at the isolated equilibrium.
    pub fn lambda_buck(&self, t: f64, model: &ThermalStrainModel) -> Result<f64> {
        Ok(self.solve_equilibrium(t, model)?.lambda_buck)
    }

    /// Locates the critical-buckling temperature, the minimizer of Λᴮᵘᶜᵏ over
    /// [`SWEEP_RANGE`]: 0.1 K scan, then golden-section refinement to 1e-3 K.
    pub fn critical_point(&self, model: &ThermalStrainModel) -> Result<CriticalPoint> {
        let (t_lo, t_hi) = SWEEP_RANGE;
        let n = ((t_hi - t_lo) / T_STAR_GRID_STEP).round() as usize;
        let mut best = (0usize, f64::INFINITY);
        for j in 0..=n {
            let t = t_lo + j as f64 * T_STAR_GRID_STEP;
            let l = self.lambda_buck(t, model)?;
            if l < best.1 {
                best = (j, l);
            }
        }
        let mut a = (t_lo + best.0.saturating_sub(1) as f64 * T_STAR_GRID_STEP).max(t_lo);
        let mut b = (t_lo + (best.0 + 1) as f64 * T_STAR_GRID_STEP).min(t_hi);

        let g = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let mut fc = self.lambda_buck(c, model)?;
        let mut fd = self.lambda_buck(d, model)?;
        while b - a > T_STAR_TOL {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = self.lambda_buck(c, model)?;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = self.lambda_buck(d, model)?;
            }
        }
        let mut t_star = 0.5 * (a + b);
        let mut l_min = self.lambda_buck(t_star, model)?;
        // the grid minimum can beat the refined point when it sits on the range boundary
        let t_grid = t_lo + best.0 as f64 * T_STAR_GRID_STEP;
        if best.1 < l_min {
            t_star = t_grid;
            l_min = best.1;
        }
        Ok(CriticalPoint { t_star, lambda_buck_min: l_min })
    }
}

fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    while b - a > ROOT_TOL {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

/// Free-function form of [`CellParams::buckling_force`].
pub fn buckling_force(u: f64, t: f64, cell: &CellParams, model: &ThermalStrainModel) -> f64 {
    cell.buckling_force(u, t, model)
}

/// Free-function form of [`CellParams::buckling_tangent`].
pub fn buckling_tangent(u: f64, t: f64, cell: &CellParams, model: &ThermalStrainModel) -> f64 {
    cell.buckling_tangent(u, t, model)
}

/// Free-function form of [`CellParams::solve_equilibrium`].
pub fn solve_cell_equilibrium(
    t: f64,
    cell: &CellParams,
    model: &ThermalStrainModel,
) -> Result<CellState> {
    cell.solve_equilibrium(t, model)
}

/// Free-function form of [`CellParams::scale_by_thickness`].
pub fn scale_by_thickness(reference: &CellParams, h_ratio: f64) -> Result<CellParams> {
    reference.scale_by_thickness(h_ratio)
}

/// Isolated equilibrium of one cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellState {
    pub u_eqm: f64,
    /// dF̄/dū at the root.
    pub tangent: f64,
    /// λᴮ · tangent, rad²/s².
    pub lambda_buck: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub t_star: f64,
    pub lambda_buck_min: f64,
}

/// Coupling and torsion stiffnesses that follow from a cell's grounding stiffness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedStiffness {
    /// Translational coupling λᶜ(T).
    pub lambda_c: f64,
    /// Grounding torsion Γᴮ.
    pub gamma_b: f64,
    /// Torsional coupling Γᶜ(T).
    pub gamma_c: f64,
}

impl DerivedStiffness {
    /// Builds the stiffness set from λᴮ and the coupling λᶜ. The torsion laws
    /// keep λᶜ − 4Γᶜ = Γᴮ/4 for every λᶜ.
    pub fn from_coupling(lambda_b: f64, lambda_c: f64) -> Self {
        let gamma_b = lambda_b / 12.0;
        let gamma_c = (3.0 * lambda_c - 0.75 * gamma_b) / 12.0;
        DerivedStiffness { lambda_c, gamma_b, gamma_c }
    }

    /// All stiffnesses zero.
    pub fn zero() -> Self {
        DerivedStiffness { lambda_c: 0.0, gamma_b: 0.0, gamma_c: 0.0 }
    }
}

/// Derived stiffnesses at `t` for a cell whose critical temperature is `t_star`.
pub fn derived_stiffnesses(
    t: f64,
    cell: &CellParams,
    model: &ThermalStrainModel,
    t_star: f64,
) -> Result<DerivedStiffness> {
    let l_t = cell.lambda_buck(t, model)?;
    let l_min = cell.lambda_buck(t_star, model)?;
    Ok(DerivedStiffness::from_coupling(cell.lambda_b, 0.2 * (l_t - l_min)))
}

/// A cell together with its critical point, computed once and reused across
/// temperatures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibratedCell {
    pub params: CellParams,
    pub critical: CriticalPoint,
}

impl CalibratedCell {
    pub fn new(params: CellParams, model: &ThermalStrainModel) -> Result<Self> {
        params.validate()?;
        let critical = params.critical_point(model)?;
        Ok(CalibratedCell { params, critical })
    }

    /// Isolated equilibrium and derived stiffnesses at `t`.
    pub fn at(&self, t: f64, model: &ThermalStrainModel) -> Result<(CellState, DerivedStiffness)> {
        let state = self.params.solve_equilibrium(t, model)?;
        let lambda_c = 0.2 * (state.lambda_buck - self.critical.lambda_buck_min);
        Ok((state, DerivedStiffness::from_coupling(self.params.lambda_b, lambda_c)))
    }
}
