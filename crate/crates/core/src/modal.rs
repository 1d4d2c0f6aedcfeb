//! Normal modes of a linearized waveguide and the extended/localized split.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{EquilibriumState, LinearSystem};

/// Modes whose participation ratio is at least this fraction of N are extended.
pub const DEFAULT_EXTENDED_FRACTION: f64 = 1.0 / 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeLabel {
    Extended,
    Localized,
}

impl ModeLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            ModeLabel::Extended => "extended",
            ModeLabel::Localized => "localized",
        }
    }
}

/// Full generalized eigensolution `K φ = Λ M φ`.
#[derive(Debug, Clone)]
pub struct ModalSet {
    /// Squared angular frequencies, ascending, rad²/s².
    pub lambdas: Vec<f64>,
    /// Angular frequencies, rad/s.
    pub freqs: Vec<f64>,
    /// Mode shapes as columns, M-orthonormal.
    pub shapes: DMatrix<f64>,
    pub pr: Vec<f64>,
    pub label: Vec<ModeLabel>,
}

impl ModalSet {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// Mode `index`, 1-based.
    pub fn shape(&self, index: usize) -> Result<DVector<f64>> {
        if index == 0 || index > self.len() {
            return Err(Error::IndexOutOfRange { index, count: self.len() });
        }
        Ok(self.shapes.column(index - 1).into_owned())
    }

    pub fn is_extended(&self, index: usize) -> bool {
        self.label[index - 1] == ModeLabel::Extended
    }
}

/// Solves the generalized symmetric-definite problem through a Cholesky
/// reduction of M. Modes are sorted by frequency and signed so that the
/// largest translational entry is positive.
pub fn solve_modes(system: &LinearSystem) -> Result<ModalSet> {
    solve_modes_with(system, DEFAULT_EXTENDED_FRACTION)
}

pub fn solve_modes_with(system: &LinearSystem, extended_fraction: f64) -> Result<ModalSet> {
    let dof = system.dof();
    let chol = system.mass.clone().cholesky().ok_or(Error::NonPositiveMass)?;
    let l = chol.l();
    let l_inv = l
        .clone()
        .try_inverse()
        .ok_or(Error::NonPositiveMass)?;
    let mut a = &l_inv * &system.k * l_inv.transpose();
    a = (&a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::new(a);
    let raw_shapes = l_inv.transpose() * &eig.eigenvectors;

    let key = |j: usize| {
        let col = raw_shapes.column(j);
        let argmax = (0..dof).max_by(|&x, &y| col[x].abs().total_cmp(&col[y].abs())).unwrap_or(0);
        (eig.eigenvalues[j], argmax)
    };
    let mut order: Vec<usize> = (0..dof).collect();
    order.sort_by(|&x, &y| {
        let (lx, ax) = key(x);
        let (ly, ay) = key(y);
        lx.total_cmp(&ly).then(ax.cmp(&ay))
    });

    let mut lambdas = Vec::with_capacity(dof);
    let mut shapes = DMatrix::zeros(dof, dof);
    for (m, &j) in order.iter().enumerate() {
        let lambda = eig.eigenvalues[j];
        if !(lambda > 0.0) {
            return Err(Error::NegativeEigenvalue { k: f64::NAN, omega_sq: lambda });
        }
        let mut col = raw_shapes.column(j).into_owned();
        let lead = (0..system.n)
            .map(|i| col[2 * i])
            .max_by(|x, y| x.abs().total_cmp(&y.abs()))
            .unwrap_or(0.0);
        if lead < 0.0 {
            col.neg_mut();
        }
        shapes.set_column(m, &col);
        lambdas.push(lambda);
    }
    let freqs = lambdas.iter().map(|l| l.sqrt()).collect();
    let pr: Vec<f64> = (0..dof)
        .map(|m| participation_ratio(&shapes.column(m).into_owned(), system))
        .collect();
    let label = classify(&pr, system.n, extended_fraction);
    Ok(ModalSet { lambdas, freqs, shapes, pr, label })
}

/// Per-cell energy weights `μ_i (φ_v² + χ φ_h²)`, normalized to sum 1.
pub fn cell_weights(shape: &DVector<f64>, system: &LinearSystem) -> Vec<f64> {
    let w: Vec<f64> = (0..system.n)
        .map(|i| system.mass[(2 * i, 2 * i)] * shape[2 * i].powi(2) + system.mass[(2 * i + 1, 2 * i + 1)] * shape[2 * i + 1].powi(2))
        .collect();
    let total: f64 = w.iter().sum();
    if total == 0.0 {
        return w;
    }
    w.into_iter().map(|x| x / total).collect()
}

/// Inverse participation ratio of the per-cell energy weights, in [1, N].
pub fn participation_ratio(shape: &DVector<f64>, system: &LinearSystem) -> f64 {
    1.0 / cell_weights(shape, system).iter().map(|e| e * e).sum::<f64>()
}

fn classify(pr: &[f64], n: usize, fraction: f64) -> Vec<ModeLabel> {
    let cut = fraction * n as f64;
    pr.iter()
        .map(|&p| if p >= cut { ModeLabel::Extended } else { ModeLabel::Localized })
        .collect()
}

/// Relabels a modal set with a different extended fraction of N.
pub fn classify_modes(modes: &ModalSet, n: usize, threshold_fraction: f64) -> Result<Vec<ModeLabel>> {
    if !(threshold_fraction > 0.0 && threshold_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "threshold fraction must lie in (0, 1), got {threshold_fraction}"
        )));
    }
    Ok(classify(&modes.pr, n, threshold_fraction))
}

/// One row of a mode-shape table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeShapeRow {
    pub cell: usize,
    /// Translation over the largest translational magnitude.
    pub v: f64,
    /// Rotation times lattice length, same scale as `v`.
    pub h: f64,
    /// Equilibrium translation of the cell, for drawing deflections about it.
    pub u_eqm: f64,
}

/// Per-cell deflections of mode `index` (1-based), scaled so the largest
/// translational entry is 1.
pub fn mode_shape_export(modes: &ModalSet, index: usize, eqm: &EquilibriumState) -> Result<Vec<ModeShapeRow>> {
    let shape = modes.shape(index)?;
    let n = shape.len() / 2;
    let scale = (0..n).map(|i| shape[2 * i].abs()).fold(0.0, f64::max);
    let scale = if scale > 0.0 { scale } else { 1.0 };
    Ok((0..n)
        .map(|i| ModeShapeRow {
            cell: i + 1,
            v: shape[2 * i] / scale,
            h: shape[2 * i + 1] / scale,
            u_eqm: eqm.u_eqm.get(i).copied().unwrap_or(0.0),
        })
        .collect())
}
