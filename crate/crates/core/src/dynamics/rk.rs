//! Dormand–Prince 5(4) with dense output on the first-order form of
//! `M q̈ + K q = 0`.

use nalgebra::DMatrix;

use super::{InitialCondition, RecordParams, TimeSeries};
use crate::error::{Error, Result};
use crate::lattice::LinearSystem;

pub const DEFAULT_RK_TOL: f64 = 1e-12;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Sparse rows of `M⁻¹K / ω_s²`.
struct Operator {
    dof: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl Operator {
    /// `dy = f(y)` with `y = (q, q')`, `f = (q', −A q)`.
    fn apply(&self, y: &[f64], dy: &mut [f64]) {
        let n = self.dof;
        dy[..n].copy_from_slice(&y[n..]);
        for (r, row) in self.rows.iter().enumerate() {
            let mut acc = 0.0;
            for &(c, a) in row {
                acc += a * y[c];
            }
            dy[n + r] = -acc;
        }
    }
}

fn axpy_into(out: &mut [f64], y: &[f64], h: f64, terms: &[(f64, &[f64])]) {
    for i in 0..out.len() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        out[i] = y[i] + h * acc;
    }
}

/// Adaptive explicit integration sampled at the record's output times.
///
/// Time is scaled by the largest uncoupled frequency and the state by the
/// initial amplitude, so `rel_tol` also serves as the absolute tolerance.
pub fn integrate_rk(
    system: &LinearSystem,
    ic: &InitialCondition,
    record: &RecordParams,
    rel_tol: f64,
) -> Result<TimeSeries> {
    record.validate()?;
    if !(rel_tol > 0.0 && rel_tol.is_finite()) {
        return Err(Error::InvalidParameter(format!("rel_tol must be positive, got {rel_tol}")));
    }
    let dof = system.dof();
    let t_out = record.times();
    let ns = t_out.len();
    let mut q = DMatrix::zeros(ns, dof);
    let mut qdot = DMatrix::zeros(ns, dof);
    q.set_row(0, &ic.q0.transpose());
    qdot.set_row(0, &ic.qdot0.transpose());

    let chol = system.mass.clone().cholesky().ok_or(Error::NonPositiveMass)?;
    let a = chol.solve(&system.k);
    let omega_s = (0..dof).map(|i| a[(i, i)]).fold(0.0, f64::max).sqrt();
    if !(omega_s > 0.0) {
        return Err(Error::InvalidParameter("stiffness has no positive diagonal".into()));
    }
    let w2 = omega_s * omega_s;
    let op = Operator {
        dof,
        rows: (0..dof)
            .map(|r| (0..dof).filter(|&c| a[(r, c)] != 0.0).map(|c| (c, a[(r, c)] / w2)).collect())
            .collect(),
    };

    let scale = ic.q0.amax().max(ic.qdot0.amax() / omega_s);
    let ts = TimeSeries { t: t_out.clone(), q, qdot, ic_kind: ic.kind, dt_out: record.dt_out };
    if scale == 0.0 || ns == 1 {
        return Ok(ts);
    }
    let TimeSeries { mut q, mut qdot, .. } = ts;

    let n2 = 2 * dof;
    let mut y: Vec<f64> = ic.q0.iter().map(|v| v / scale).chain(ic.qdot0.iter().map(|v| v / (omega_s * scale))).collect();
    let tau_end = t_out[ns - 1] * omega_s;
    let atol = rel_tol;

    let [mut k1, mut k2, mut k3, mut k4, mut k5, mut k6, mut k7]: [Vec<f64>; 7] =
        std::array::from_fn(|_| vec![0.0; n2]);
    let mut stage = vec![0.0; n2];
    let mut y_new = vec![0.0; n2];
    let mut cont = [vec![0.0; n2], vec![0.0; n2], vec![0.0; n2], vec![0.0; n2], vec![0.0; n2]];
    op.apply(&y, &mut k1);

    let mut tau = 0.0;
    let mut h = (0.01 * rel_tol.powf(0.2)).min(tau_end);
    let mut next_out = 1;

    while next_out < ns {
        if tau_end - tau <= 1e-14 * tau_end {
            for s in next_out..ns {
                for i in 0..dof {
                    q[(s, i)] = y[i] * scale;
                    qdot[(s, i)] = y[dof + i] * scale * omega_s;
                }
            }
            break;
        }
        if h < 1e-14 * tau.max(1.0) {
            return Err(Error::StepFailure { t: tau / omega_s });
        }
        h = h.min(tau_end - tau);

        axpy_into(&mut stage, &y, h, &[(A21, &k1[..])]);
        op.apply(&stage, &mut k2);
        axpy_into(&mut stage, &y, h, &[(A31, &k1[..]), (A32, &k2[..])]);
        op.apply(&stage, &mut k3);
        axpy_into(&mut stage, &y, h, &[(A41, &k1[..]), (A42, &k2[..]), (A43, &k3[..])]);
        op.apply(&stage, &mut k4);
        axpy_into(&mut stage, &y, h, &[(A51, &k1[..]), (A52, &k2[..]), (A53, &k3[..]), (A54, &k4[..])]);
        op.apply(&stage, &mut k5);
        axpy_into(&mut stage, &y, h, &[(A61, &k1[..]), (A62, &k2[..]), (A63, &k3[..]), (A64, &k4[..]), (A65, &k5[..])]);
        op.apply(&stage, &mut k6);
        axpy_into(&mut y_new, &y, h, &[(A71, &k1[..]), (A73, &k3[..]), (A74, &k4[..]), (A75, &k5[..]), (A76, &k6[..])]);
        op.apply(&y_new, &mut k7);

        let mut err2 = 0.0;
        for i in 0..n2 {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = atol + rel_tol * y[i].abs().max(y_new[i].abs());
            err2 += (e / sc).powi(2);
        }
        let err = (err2 / n2 as f64).sqrt();

        if err <= 1.0 {
            let tau_new = tau + h;
            // Dense output only when an output time falls inside this step.
            if next_out < ns && t_out[next_out] * omega_s <= tau_new {
                for i in 0..n2 {
                    let ydiff = y_new[i] - y[i];
                    let bspl = h * k1[i] - ydiff;
                    cont[0][i] = y[i];
                    cont[1][i] = ydiff;
                    cont[2][i] = bspl;
                    cont[3][i] = ydiff - h * k7[i] - bspl;
                    cont[4][i] =
                        h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
                }
                while next_out < ns && t_out[next_out] * omega_s <= tau_new * (1.0 + 1e-15) {
                    let theta = ((t_out[next_out] * omega_s - tau) / h).clamp(0.0, 1.0);
                    let theta1 = 1.0 - theta;
                    for i in 0..dof {
                        let interp = |j: usize| {
                            cont[0][j]
                                + theta * (cont[1][j] + theta1 * (cont[2][j] + theta * (cont[3][j] + theta1 * cont[4][j])))
                        };
                        q[(next_out, i)] = interp(i) * scale;
                        qdot[(next_out, i)] = interp(dof + i) * scale * omega_s;
                    }
                    next_out += 1;
                }
            }
            tau = tau_new;
            std::mem::swap(&mut y, &mut y_new);
            std::mem::swap(&mut k1, &mut k7);
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= if err <= 1.0 { fac } else { fac.min(1.0) };
    }

    Ok(TimeSeries { t: t_out, q, qdot, ic_kind: ic.kind, dt_out: record.dt_out })
}
