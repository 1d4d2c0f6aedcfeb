//! Dispersion of the infinite, perfectly periodic waveguide.
//!
//! Each cell has one translational and one rotational coordinate, so the
//! Floquet problem is a 2×2 Hermitian pencil `D(k) p = ω² diag(1, χ) p`,
//! solved here in closed form.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cell::{CalibratedCell, DerivedStiffness, ThermalStrainModel};
use crate::error::{Error, Result};

pub const DEFAULT_K_POINTS: usize = 201;

/// Floquet dynamic stiffness at normalized wavenumber `k` (rad per cell).
pub fn dispersion_matrix(k: f64, stiff: &DerivedStiffness, lambda_buck: f64) -> Matrix2<Complex64> {
    let (s, c) = k.sin_cos();
    let d11 = 2.0 * (1.0 - c) * stiff.lambda_c + lambda_buck;
    let d22 = 0.5 * (1.0 + c) * stiff.lambda_c + 2.0 * (1.0 - c) * stiff.gamma_c + stiff.gamma_b;
    let d12 = Complex64::new(0.0, stiff.lambda_c * s);
    Matrix2::new(Complex64::new(d11, 0.0), d12, d12.conj(), Complex64::new(d22, 0.0))
}

/// Squared frequencies (ascending) of `D p = x diag(1, χ) p`.
pub fn pencil_eigenvalues(d: &Matrix2<Complex64>, chi: f64) -> (f64, f64) {
    let d11 = d[(0, 0)].re;
    let d22 = d[(1, 1)].re;
    let off = d[(0, 1)].norm_sqr();
    let b = chi * d11 + d22;
    let c = d11 * d22 - off;
    let disc = ((chi * d11 - d22).powi(2) + 4.0 * chi * off).sqrt();
    let hi = (b + disc) / (2.0 * chi);
    let lo = if hi != 0.0 { c / (chi * hi) } else { (b - disc) / (2.0 * chi) };
    (lo.min(hi), lo.max(hi))
}

fn pencil_eigenvector(d: &Matrix2<Complex64>, chi: f64, x: f64) -> Vector2<Complex64> {
    let a = d[(0, 0)] - x;
    let b = d[(0, 1)];
    let c = d[(1, 0)];
    let e = d[(1, 1)] - chi * x;
    // take the null vector from the better-conditioned row
    let p = if a.norm() + b.norm() >= c.norm() + e.norm() {
        if a.norm() + b.norm() == 0.0 {
            Vector2::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
        } else {
            Vector2::new(-b, a)
        }
    } else {
        Vector2::new(-e, c)
    };
    let norm = (p[0].norm_sqr() + chi * p[1].norm_sqr()).sqrt();
    if norm == 0.0 {
        // both rows vanish: the pencil is scalar at this k; the first Cartesian
        // direction belongs to branch I whenever the diagonal is sorted that way
        return Vector2::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    }
    p / Complex64::new(norm, 0.0)
}

/// Sampled dispersion curves.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlochBranch {
    pub temperature: f64,
    /// Normalized wavenumbers on [0, π].
    pub k: Vec<f64>,
    /// Branch I angular frequencies, rad/s.
    pub omega1: Vec<f64>,
    /// Branch II angular frequencies, rad/s.
    pub omega2: Vec<f64>,
    /// Mass-normalized modal vectors `[branch I, branch II]` per wavenumber.
    #[serde(skip)]
    pub eigvecs: Vec<[Vector2<Complex64>; 2]>,
}

fn frequencies(x: f64, k: f64) -> Result<f64> {
    if x < 0.0 {
        return Err(Error::NegativeEigenvalue { k, omega_sq: x });
    }
    Ok(x.sqrt())
}

/// Evaluates both branches on a uniform grid of `n_k` wavenumbers over [0, π].
pub fn dispersion_curves(
    t: f64,
    cell: &CalibratedCell,
    model: &ThermalStrainModel,
    n_k: usize,
) -> Result<BlochBranch> {
    if n_k < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 k-points, got {n_k}")));
    }
    let (state, stiff) = cell.at(t, model)?;
    let chi = cell.params.chi;
    let mut out = BlochBranch {
        temperature: t,
        k: Vec::with_capacity(n_k),
        omega1: Vec::with_capacity(n_k),
        omega2: Vec::with_capacity(n_k),
        eigvecs: Vec::with_capacity(n_k),
    };
    for j in 0..n_k {
        let k = PI * j as f64 / (n_k - 1) as f64;
        let d = dispersion_matrix(k, &stiff, state.lambda_buck);
        let (x1, x2) = pencil_eigenvalues(&d, chi);
        out.k.push(k);
        out.omega1.push(frequencies(x1, k)?);
        out.omega2.push(frequencies(x2, k)?);
        out.eigvecs.push([pencil_eigenvector(&d, chi, x1), pencil_eigenvector(&d, chi, x2)]);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeK {
    Zero,
    Pi,
}

impl EdgeK {
    pub fn value(self) -> f64 {
        match self {
            EdgeK::Zero => 0.0,
            EdgeK::Pi => PI,
        }
    }
}

/// Passband extrema at one temperature, angular frequencies in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandEdges {
    pub temperature: f64,
    pub band1_min: f64,
    pub band1_max: f64,
    pub band2_min: f64,
    pub band2_max: f64,
    /// Wavenumber attaining `[band1_min, band1_max, band2_min, band2_max]`.
    pub edge_k: [EdgeK; 4],
}

impl BandEdges {
    /// Midpoint of the stop band separating passbands I and II.
    pub fn gap_center(&self) -> f64 {
        0.5 * (self.band1_max + self.band2_min)
    }

    pub fn band1_width(&self) -> f64 {
        self.band1_max - self.band1_min
    }

    pub fn band2_width(&self) -> f64 {
        self.band2_max - self.band2_min
    }

    /// True when `omega` lies in either passband, edges widened by `rel_tol`.
    pub fn contains(&self, omega: f64, rel_tol: f64) -> bool {
        let inside = |lo: f64, hi: f64| omega >= lo * (1.0 - rel_tol) && omega <= hi * (1.0 + rel_tol);
        inside(self.band1_min, self.band1_max) || inside(self.band2_min, self.band2_max)
    }
}

/// Band edges from the closed forms at k = 0 and k = π, where the off-diagonal
/// coupling vanishes.
pub fn band_edges(t: f64, cell: &CalibratedCell, model: &ThermalStrainModel) -> Result<BandEdges> {
    let (state, stiff) = cell.at(t, model)?;
    let chi = cell.params.chi;
    let (a1, a2) = pencil_eigenvalues(&dispersion_matrix(0.0, &stiff, state.lambda_buck), chi);
    let (b1, b2) = pencil_eigenvalues(&dispersion_matrix(PI, &stiff, state.lambda_buck), chi);
    let w = |x: f64, k: f64| frequencies(x, k);
    let (a1, a2, b1, b2) = (w(a1, 0.0)?, w(a2, 0.0)?, w(b1, PI)?, w(b2, PI)?);
    let pick_min = |x: f64, y: f64| if x <= y { (x, EdgeK::Zero) } else { (y, EdgeK::Pi) };
    let pick_max = |x: f64, y: f64| if x >= y { (x, EdgeK::Zero) } else { (y, EdgeK::Pi) };
    let (band1_min, k1) = pick_min(a1, b1);
    let (band1_max, k2) = pick_max(a1, b1);
    let (band2_min, k3) = pick_min(a2, b2);
    let (band2_max, k4) = pick_max(a2, b2);
    Ok(BandEdges {
        temperature: t,
        band1_min,
        band1_max,
        band2_min,
        band2_max,
        edge_k: [k1, k2, k3, k4],
    })
}

/// Band extrema read off a sampled dispersion, for cross-checking [`band_edges`].
pub fn band_edges_from_curves(curves: &BlochBranch) -> (f64, f64, f64, f64) {
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (min(&curves.omega1), max(&curves.omega1), min(&curves.omega2), max(&curves.omega2))
}

/// Band edges for every temperature of `temps`, evaluated in parallel.
pub fn band_edges_vs_t(
    temps: &[f64],
    cell: &CalibratedCell,
    model: &ThermalStrainModel,
) -> Result<Vec<BandEdges>> {
    temps.par_iter().map(|&t| band_edges(t, cell, model)).collect()
}
