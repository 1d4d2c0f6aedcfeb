//! Temperature sweeps of the full transient pipeline at one probe cell.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::spectrum::check_thresholds;
use super::{
    band_maxima, clamp_transmission, initial_conditions, integrate_modal, normalized_energy, spectral_energy, IcKind,
    RecordParams, TimeSeries, EPS_SAT, EPS_THS,
};
use crate::bloch::band_edges;
use crate::cell::{CalibratedCell, CellParams, ThermalStrainModel};
use crate::error::{Error, Result};
use crate::lattice::{OperatingPoint, Waveguide};
use crate::modal::{solve_modes, ModalSet};

/// Splits passband I from passband II at the gap centre of a periodic
/// lattice of `cell`.
#[derive(Debug, Clone, Copy)]
pub struct BandSplit {
    pub cell: CalibratedCell,
    pub model: ThermalStrainModel,
}

impl BandSplit {
    pub fn reference(model: &ThermalStrainModel) -> Result<Self> {
        Ok(BandSplit { cell: CalibratedCell::new(CellParams::reference(), model)?, model: *model })
    }

    /// Split angular frequency at `t`, rad/s.
    pub fn at(&self, t: f64) -> Result<f64> {
        Ok(band_edges(t, &self.cell, &self.model)?.gap_center())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub temperatures: Vec<f64>,
    /// 1-based, in 2…N.
    pub probe_cell: usize,
    pub ic_kind: IcKind,
    pub record: RecordParams,
    pub eps_ths: f64,
    pub eps_sat: f64,
}

impl SweepConfig {
    pub fn new(temperatures: Vec<f64>, probe_cell: usize) -> Self {
        SweepConfig {
            temperatures,
            probe_cell,
            ic_kind: IcKind::Mixed,
            record: RecordParams::default(),
            eps_ths: EPS_THS,
            eps_sat: EPS_SAT,
        }
    }
}

/// Temperature-by-frequency transmission at one probe cell.
#[derive(Debug, Clone)]
pub struct TemperatureTransmission {
    pub probe_cell: usize,
    pub temperatures: Vec<f64>,
    /// Bin angular frequencies, rad/s.
    pub freqs: Vec<f64>,
    /// Clamped normalized energy, one row per temperature.
    pub values: DMatrix<f64>,
    /// Unclamped band maxima of the normalized energy at the probe.
    pub band1_max: Vec<f64>,
    pub band2_max: Vec<f64>,
    /// Band split per temperature, rad/s.
    pub split: Vec<f64>,
    pub eps_ths: f64,
    pub eps_sat: f64,
}

impl TemperatureTransmission {
    pub fn band1_blocked(&self, index: usize) -> bool {
        self.band1_max[index] < self.eps_ths
    }

    /// Largest contiguous run of band-I-blocked temperatures that contains
    /// `t`, as (first, last). None if `t` itself transmits or is off-grid.
    pub fn blocked_window(&self, t: f64) -> Option<(f64, f64)> {
        let at = self.temperatures.iter().position(|&x| (x - t).abs() < 1e-9)?;
        if !self.band1_blocked(at) {
            return None;
        }
        let mut lo = at;
        while lo > 0 && self.band1_blocked(lo - 1) {
            lo -= 1;
        }
        let mut hi = at;
        while hi + 1 < self.temperatures.len() && self.band1_blocked(hi + 1) {
            hi += 1;
        }
        Some((self.temperatures[lo], self.temperatures[hi]))
    }
}

/// Equilibrium, modes and modal-superposition response of `wg` at `t`.
pub fn run_transient(
    wg: &Waveguide,
    t: f64,
    ic_kind: IcKind,
    record: &RecordParams,
) -> Result<(OperatingPoint, ModalSet, TimeSeries)> {
    let op = wg.operating_point(t)?;
    let modes = solve_modes(&op.system)?;
    let ic = initial_conditions(ic_kind, &op.system);
    let ts = integrate_modal(&op.system, &modes, &ic, record)?;
    Ok((op, modes, ts))
}

struct Row {
    values: Vec<f64>,
    freqs: Vec<f64>,
    b1: f64,
    b2: f64,
    split: f64,
}

/// Runs the full pipeline per temperature, in parallel, and keeps the probe
/// cell's normalized spectrum. Failures are collected with their temperatures.
pub fn transmission_vs_temperature(wg: &Waveguide, config: &SweepConfig) -> Result<TemperatureTransmission> {
    check_thresholds(config.eps_ths, config.eps_sat)?;
    config.record.validate()?;
    if config.probe_cell < 2 || config.probe_cell > wg.n() {
        return Err(Error::IndexOutOfRange { index: config.probe_cell, count: wg.n() });
    }
    if config.temperatures.is_empty() {
        return Err(Error::InvalidParameter("empty temperature grid".into()));
    }
    let splitter = BandSplit::reference(&wg.model)?;

    let results: Vec<(f64, Result<Row>)> = config
        .temperatures
        .par_iter()
        .map(|&t| {
            let row = (|| {
                let (op, _, ts) = run_transient(wg, t, config.ic_kind, &config.record)?;
                let spec = spectral_energy(&ts, &op.system);
                drop(ts);
                let (norm, _) = normalized_energy(&spec);
                let probe: Vec<f64> = norm.column(config.probe_cell - 1).iter().copied().collect();
                let split = splitter.at(t)?;
                let (b1, b2) = band_maxima(&probe, &spec.freqs, split);
                Ok(Row { values: probe, freqs: spec.freqs, b1, b2, split })
            })();
            (t, row)
        })
        .collect();

    let mut failures = Vec::new();
    let mut rows = Vec::new();
    for (t, r) in results {
        match r {
            Ok(row) => rows.push((t, row)),
            Err(e) => failures.push((t, e)),
        }
    }
    if !failures.is_empty() {
        return Err(Error::Sweep(failures));
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));

    let freqs = rows[0].1.freqs.clone();
    let values = DMatrix::from_fn(rows.len(), freqs.len(), |r, c| {
        clamp_transmission(rows[r].1.values[c], config.eps_ths, config.eps_sat)
    });
    Ok(TemperatureTransmission {
        probe_cell: config.probe_cell,
        temperatures: rows.iter().map(|r| r.0).collect(),
        freqs,
        values,
        band1_max: rows.iter().map(|r| r.1.b1).collect(),
        band2_max: rows.iter().map(|r| r.1.b2).collect(),
        split: rows.iter().map(|r| r.1.split).collect(),
        eps_ths: config.eps_ths,
        eps_sat: config.eps_sat,
    })
}
