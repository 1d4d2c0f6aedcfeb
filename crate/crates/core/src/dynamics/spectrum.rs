//! Spectral energy of a transient record and thresholded transmission maps.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;

use super::TimeSeries;
use crate::error::{Error, Result};
use crate::lattice::LinearSystem;

/// Default lower threshold of a transmission map.
pub const EPS_THS: f64 = 2e-3;
/// Default saturation level of a transmission map.
pub const EPS_SAT: f64 = 0.5;

/// One-sided amplitude spectra per cell. Rows are frequency bins, columns cells.
#[derive(Debug, Clone)]
pub struct SpectrumMap {
    /// Bin angular frequencies, rad/s, starting at 0.
    pub freqs: Vec<f64>,
    pub amp_v: DMatrix<f64>,
    pub amp_h: DMatrix<f64>,
    /// Phase of the translational component, rad.
    pub phase: DMatrix<f64>,
    /// `½ μ_i ω² (ṽ² + χ h̃²)`.
    pub energy: DMatrix<f64>,
}

impl SpectrumMap {
    pub fn n_bins(&self) -> usize {
        self.freqs.len()
    }

    pub fn n_cells(&self) -> usize {
        self.energy.ncols()
    }
}

/// Rectangular-window FFT over the full record, no padding.
pub fn spectral_energy(ts: &TimeSeries, system: &LinearSystem) -> SpectrumMap {
    let n = ts.n_samples();
    let cells = ts.n_cells();
    let bins = n / 2 + 1;
    let dw = 2.0 * std::f64::consts::PI / (n as f64 * ts.dt_out);
    let freqs: Vec<f64> = (0..bins).map(|m| m as f64 * dw).collect();

    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    let weight = |m: usize| {
        if m == 0 || (n % 2 == 0 && m == n / 2) {
            1.0 / n as f64
        } else {
            2.0 / n as f64
        }
    };

    let mut amp_v = DMatrix::zeros(bins, cells);
    let mut amp_h = DMatrix::zeros(bins, cells);
    let mut phase = DMatrix::zeros(bins, cells);
    for col in 0..2 * cells {
        for (b, x) in buf.iter_mut().zip(ts.q.column(col).iter()) {
            *b = Complex64::new(*x, 0.0);
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        let cell = col / 2;
        for m in 0..bins {
            let a = buf[m].norm() * weight(m);
            if col % 2 == 0 {
                amp_v[(m, cell)] = a;
                phase[(m, cell)] = buf[m].arg();
            } else {
                amp_h[(m, cell)] = a;
            }
        }
    }

    let mut energy = DMatrix::zeros(bins, cells);
    for i in 0..cells {
        let (mu, chi) = (system.mu(i), system.chi(i));
        for m in 0..bins {
            let w = freqs[m];
            energy[(m, i)] = 0.5 * mu * w * w * (amp_v[(m, i)].powi(2) + chi * amp_h[(m, i)].powi(2));
        }
    }
    SpectrumMap { freqs, amp_v, amp_h, phase, energy }
}

/// Spectral energy over its maximum across cells 2…N and all bins.
/// Returns the normalized matrix and the normalizer.
pub fn normalized_energy(spec: &SpectrumMap) -> (DMatrix<f64>, f64) {
    let first = if spec.n_cells() > 1 { 1 } else { 0 };
    let normalizer = spec.energy.columns(first, spec.n_cells() - first).max();
    if normalizer > 0.0 {
        (&spec.energy / normalizer, normalizer)
    } else {
        (spec.energy.clone(), normalizer)
    }
}

/// Values below `eps_ths` become 0, above `eps_sat` become 1.
pub fn clamp_transmission(value: f64, eps_ths: f64, eps_sat: f64) -> f64 {
    if value < eps_ths {
        0.0
    } else if value > eps_sat {
        1.0
    } else {
        value
    }
}

pub(crate) fn check_thresholds(eps_ths: f64, eps_sat: f64) -> Result<()> {
    if !((0.0..=EPS_THS).contains(&eps_ths) && (EPS_SAT..=1.0).contains(&eps_sat)) {
        return Err(Error::InvalidParameter(format!(
            "thresholds must satisfy 0 <= eps_ths <= {EPS_THS} and {EPS_SAT} <= eps_sat <= 1, got {eps_ths}, {eps_sat}"
        )));
    }
    Ok(())
}

/// Clamped normalized energies. Rows are labelled by cell or by temperature.
#[derive(Debug, Clone)]
pub struct TransmissionMap {
    pub row_labels: Vec<f64>,
    /// Bin angular frequencies, rad/s.
    pub freqs: Vec<f64>,
    pub values: DMatrix<f64>,
    pub eps_ths: f64,
    pub eps_sat: f64,
    pub normalizer: f64,
}

/// Cell-by-frequency transmission map; row `i` is cell `i + 1`.
pub fn transmission_map(spec: &SpectrumMap, eps_ths: f64, eps_sat: f64) -> Result<TransmissionMap> {
    check_thresholds(eps_ths, eps_sat)?;
    let (norm, normalizer) = normalized_energy(spec);
    let values = norm.transpose().map(|x| clamp_transmission(x, eps_ths, eps_sat));
    Ok(TransmissionMap {
        row_labels: (1..=spec.n_cells()).map(|i| i as f64).collect(),
        freqs: spec.freqs.clone(),
        values,
        eps_ths,
        eps_sat,
        normalizer,
    })
}

/// Largest values of `row` below and at-or-above the angular frequency `split`.
pub fn band_maxima(row: &[f64], freqs: &[f64], split: f64) -> (f64, f64) {
    let mut lo = 0.0f64;
    let mut hi = 0.0f64;
    for (&x, &w) in row.iter().zip(freqs) {
        if w < split {
            lo = lo.max(x);
        } else {
            hi = hi.max(x);
        }
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::IcKind;
    use crate::lattice::assemble_mass;
    use crate::cell::CellParams;

    fn system_for(cells: &[CellParams]) -> LinearSystem {
        let m = assemble_mass(cells);
        let z = DMatrix::zeros(m.nrows(), m.ncols());
        LinearSystem { n: cells.len(), mass: m, k_stat: z.clone(), k_buck: z.clone(), k: z }
    }

    fn series(n_samples: usize, dt: f64, cells: usize, f: impl Fn(usize, f64) -> f64) -> TimeSeries {
        let t: Vec<f64> = (0..n_samples).map(|s| s as f64 * dt).collect();
        let q = DMatrix::from_fn(n_samples, 2 * cells, |s, c| f(c, t[s]));
        TimeSeries { qdot: DMatrix::zeros(n_samples, 2 * cells), t, q, ic_kind: IcKind::Translational, dt_out: dt }
    }

    #[test]
    fn zero_signal_has_zero_energy() {
        let cells = [CellParams::reference(); 2];
        let ts = series(101, 1e-8, 2, |_, _| 0.0);
        let spec = spectral_energy(&ts, &system_for(&cells));
        assert!(spec.energy.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn bin_aligned_cosine() {
        let cells = [CellParams::reference().scale_by_thickness(1.2).unwrap()];
        let (n, dt, m0, amp) = (1001usize, 5e-9, 37usize, 2.5e-3);
        let w0 = 2.0 * std::f64::consts::PI * m0 as f64 / (n as f64 * dt);
        let ts = series(n, dt, 1, |c, t| if c == 0 { amp * (w0 * t).cos() } else { 0.0 });
        let spec = spectral_energy(&ts, &system_for(&cells));
        let expected = 0.5 * cells[0].mu * w0 * w0 * amp * amp;
        assert!((spec.energy[(m0, 0)] - expected).abs() <= 1e-9 * expected);
        assert!((spec.freqs[m0] - w0).abs() <= 1e-9 * w0);
        assert!((spec.amp_v[(m0, 0)] - amp).abs() <= 1e-12);
        assert!(spec.energy.iter().all(|&e| e >= 0.0));
    }

    #[test]
    fn clamp_cases() {
        assert_eq!(clamp_transmission(1e-4, 2e-3, 0.5), 0.0);
        assert_eq!(clamp_transmission(0.7, 2e-3, 0.5), 1.0);
        assert_eq!(clamp_transmission(0.1, 2e-3, 0.5), 0.1);
        assert!(check_thresholds(3e-3, 0.5).is_err());
        assert!(check_thresholds(1e-3, 0.4).is_err());
        assert!(check_thresholds(2e-3, 0.5).is_ok());
    }

    #[test]
    fn normalizer_skips_first_cell() {
        let cells = [CellParams::reference(); 3];
        let (n, dt) = (200usize, 1e-8);
        let w = |m: f64| 2.0 * std::f64::consts::PI * m / (n as f64 * dt);
        let ts = series(n, dt, 3, |c, t| match c {
            0 => 10.0 * (w(5.0) * t).cos(),
            2 => (w(5.0) * t).cos(),
            4 => 0.5 * (w(5.0) * t).cos(),
            _ => 0.0,
        });
        let spec = spectral_energy(&ts, &system_for(&cells));
        let map = transmission_map(&spec, 2e-3, 0.5).unwrap();
        assert_eq!(map.values[(1, 5)], 1.0);
        assert!((map.values[(2, 5)] - 0.25).abs() < 1e-12);
        assert_eq!(map.values[(0, 5)], 1.0);
        assert_eq!(map.values.nrows(), 3);
    }

    #[test]
    fn band_split() {
        let (lo, hi) = band_maxima(&[0.1, 0.5, 0.2, 0.3], &[0.0, 1.0, 2.0, 3.0], 2.0);
        assert_eq!((lo, hi), (0.5, 0.3));
    }
}
