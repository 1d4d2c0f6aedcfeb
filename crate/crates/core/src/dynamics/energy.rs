//! Per-cell mechanical energy of a transient record.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::TimeSeries;
use crate::cell::DerivedStiffness;
use crate::lattice::LinearSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnergyConvention {
    /// Grounding torsion on the rotation and each coupling spring's energy
    /// split evenly between its two cells. Cell energies sum to
    /// `q̇ᵀMq̇ + qᵀKq`.
    #[default]
    Conserving,
    /// Grounding torsion on the translation and springs acting on plain
    /// neighbour differences without mass factors. Does not conserve.
    Printed,
}

/// Cell energies over the input energy. Row `s` holds all cells at `t[s]`.
#[derive(Debug, Clone)]
pub struct EnergyField {
    pub t: Vec<f64>,
    pub values: DMatrix<f64>,
    /// `q̇₀ᵀMq̇₀ + q₀ᵀKq₀`.
    pub e_in: f64,
    pub convention: EnergyConvention,
}

impl EnergyField {
    pub fn total(&self, sample: usize) -> f64 {
        self.values.row(sample).sum()
    }

    /// Largest `|Σ_i E_i / E_in − 1|` over the record.
    pub fn max_conservation_error(&self) -> f64 {
        (0..self.values.nrows()).map(|s| (self.total(s) - 1.0).abs()).fold(0.0, f64::max)
    }

    /// Normalized energy history of `cell` (1-based).
    pub fn cell(&self, cell: usize) -> Vec<f64> {
        self.values.column(cell - 1).iter().copied().collect()
    }
}

pub fn mechanical_energy(
    ts: &TimeSeries,
    system: &LinearSystem,
    stiffs: &[DerivedStiffness],
    convention: EnergyConvention,
) -> EnergyField {
    let n = system.n;
    assert_eq!(stiffs.len(), n, "one stiffness set per cell");
    let q0 = ts.q.row(0).transpose();
    let qd0 = ts.qdot.row(0).transpose();
    let e_in = qd0.dot(&(&system.mass * &qd0)) + q0.dot(&(&system.k * &q0));

    let mu: Vec<f64> = (0..n).map(|i| system.mu(i)).collect();
    let chi: Vec<f64> = (0..n).map(|i| system.chi(i)).collect();
    let lbuck: Vec<f64> = (0..n).map(|i| system.lambda_buck(i)).collect();

    let ns = ts.n_samples();
    let mut values = DMatrix::zeros(ns, n);
    let mut spring = vec![0.0; n.saturating_sub(1)];
    for s in 0..ns {
        let v = |i: usize| ts.q[(s, 2 * i)];
        let h = |i: usize| ts.q[(s, 2 * i + 1)];
        match convention {
            EnergyConvention::Conserving => {
                for (j, e) in spring.iter_mut().enumerate() {
                    let stretch = v(j) - v(j + 1) + 0.5 * (h(j) + h(j + 1));
                    let twist = h(j) - h(j + 1);
                    *e = mu[j] * (stiffs[j].lambda_c * stretch * stretch + stiffs[j].gamma_c * twist * twist);
                }
                for i in 0..n {
                    let vd = ts.qdot[(s, 2 * i)];
                    let hd = ts.qdot[(s, 2 * i + 1)];
                    let mut e = mu[i] * (vd * vd + chi[i] * hd * hd)
                        + mu[i] * (lbuck[i] * v(i) * v(i) + stiffs[i].gamma_b * h(i) * h(i));
                    if i > 0 {
                        e += 0.5 * spring[i - 1];
                    }
                    if i + 1 < n {
                        e += 0.5 * spring[i];
                    }
                    values[(s, i)] = e / e_in;
                }
            }
            EnergyConvention::Printed => {
                for i in 0..n {
                    let vd = ts.qdot[(s, 2 * i)];
                    let hd = ts.qdot[(s, 2 * i + 1)];
                    let mut e = mu[i] * (vd * vd + chi[i] * hd * hd) + (lbuck[i] + stiffs[i].gamma_b) * v(i) * v(i);
                    let mut c = 0.0;
                    if i > 0 {
                        c += stiffs[i - 1].lambda_c * (v(i) - v(i - 1)).powi(2)
                            + stiffs[i - 1].gamma_c * (h(i) - h(i - 1)).powi(2);
                    }
                    if i + 1 < n {
                        c += stiffs[i].lambda_c * (v(i + 1) - v(i)).powi(2)
                            + stiffs[i].gamma_c * (h(i + 1) - h(i)).powi(2);
                    }
                    e += 0.5 * c;
                    values[(s, i)] = e / e_in;
                }
            }
        }
    }
    EnergyField { t: ts.t.clone(), values, e_in, convention }
}

/// First sample time at which `series` reaches `level`.
pub fn first_crossing(t: &[f64], series: &[f64], level: f64) -> Option<f64> {
    t.iter().zip(series).find(|(_, &e)| e >= level).map(|(&t, _)| t)
}

/// Normalized energy level that marks the arrival of the fast front.
pub const FAST_FRONT_LEVEL: f64 = 1e-3;

/// Arrival times of the two wavefronts at one cell, s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontArrivals {
    /// First time the cell energy reaches `FAST_FRONT_LEVEL`.
    pub fast: Option<f64>,
    /// First time the cell energy reaches half its median over the record,
    /// i.e. the rise of the energy-carrying front to the long-run level.
    pub slow: Option<f64>,
}

pub fn front_arrivals(field: &EnergyField, cell: usize) -> FrontArrivals {
    let series = field.cell(cell);
    let mut sorted = series.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    FrontArrivals {
        fast: first_crossing(&field.t, &series, FAST_FRONT_LEVEL),
        slow: if median > 0.0 { first_crossing(&field.t, &series, 0.5 * median) } else { None },
    }
}
