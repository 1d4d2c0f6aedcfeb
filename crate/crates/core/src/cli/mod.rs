//! Run specifications and the file-emitting driver behind the binary.

mod output;
pub mod svg;

pub use output::{sha256_hex, Cell, FileRecord, OutputSet, Table};

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bloch::{band_edges, band_edges_vs_t, dispersion_curves, BandEdges, DEFAULT_K_POINTS};
use crate::cell::{CalibratedCell, CellParams, ThermalStrainModel, SWEEP_RANGE};
use crate::dynamics::{
    band_maxima, front_arrivals, initial_conditions, integrate_modal, integrate_rk, mechanical_energy,
    normalized_energy, spectral_energy, transmission_map, transmission_vs_temperature, BandSplit, EnergyConvention,
    IcKind, RecordParams, SweepConfig, DEFAULT_RK_TOL, EPS_SAT, EPS_THS,
};
use crate::error::{Error, Result};
use crate::lattice::{Waveguide, REFERENCE_SEED_5PCT};
use crate::modal::{mode_shape_export, solve_modes_with, DEFAULT_EXTENDED_FRACTION};
use crate::omega_to_mhz;

/// Environment variable holding the default output directory.
pub const OUTPUT_DIR_ENV: &str = "DRUMHEAD_OUT";

/// Relative tolerance on band edges when deciding whether a mode lies in a band.
pub const BAND_EDGE_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    CellSweep,
    Bloch,
    #[default]
    Equilibrium,
    Modes,
    Simulate,
    Transmission,
    TransmissionSweep,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::CellSweep => "cell-sweep",
            Command::Bloch => "bloch",
            Command::Equilibrium => "equilibrium",
            Command::Modes => "modes",
            Command::Simulate => "simulate",
            Command::Transmission => "transmission",
            Command::TransmissionSweep => "transmission-sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlotKind {
    #[default]
    None,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    #[default]
    Modal,
    Rk,
}

/// Everything that determines a run's output files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSpec {
    pub command: Command,
    pub n: usize,
    pub sigma_h: f64,
    pub seed: u64,
    /// Single temperature, K.
    pub temperature: Option<f64>,
    /// `start:stop:step` in K.
    pub temp_grid: Option<String>,
    /// Defaults to translational for `simulate` and mixed for the transmission commands.
    pub ic_kind: Option<IcKind>,
    pub t_end: f64,
    pub dt_out: f64,
    pub eps_ths: f64,
    pub eps_sat: f64,
    pub extended_fraction: f64,
    pub energy_convention: EnergyConvention,
    pub integrator: Integrator,
    pub rk_tol: f64,
    pub probe_cell: usize,
    pub mode_indices: Vec<usize>,
    /// Every `series_stride`-th sample goes into time-domain CSVs.
    pub series_stride: usize,
    /// Frequency-domain exports stop here, MHz.
    pub max_freq_mhz: f64,
    pub output_dir: PathBuf,
    pub format: OutputFormat,
    pub plot: PlotKind,
    /// Display-only exponent for heatmap shading.
    pub gamma: f64,
}

impl Default for RunSpec {
    fn default() -> Self {
        let record = RecordParams::default();
        RunSpec {
            command: Command::default(),
            n: 60,
            sigma_h: 0.0,
            seed: REFERENCE_SEED_5PCT,
            temperature: None,
            temp_grid: None,
            ic_kind: None,
            t_end: record.t_end,
            dt_out: record.dt_out,
            eps_ths: EPS_THS,
            eps_sat: EPS_SAT,
            extended_fraction: DEFAULT_EXTENDED_FRACTION,
            energy_convention: EnergyConvention::default(),
            integrator: Integrator::default(),
            rk_tol: DEFAULT_RK_TOL,
            probe_cell: 45,
            mode_indices: vec![30, 90],
            series_stride: 20,
            max_freq_mhz: 15.0,
            output_dir: PathBuf::from("out"),
            format: OutputFormat::default(),
            plot: PlotKind::default(),
            gamma: 1.0,
        }
    }
}

/// Parses `start:stop:step` (inclusive of `stop` when it lies on the grid) or a single value.
pub fn parse_temp_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidSpec(format!("temperature grid must be start:stop:step, got {s:?}"));
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    match parts.as_slice() {
        [t] if t.is_finite() => Ok(vec![*t]),
        [a, b, step] if a.is_finite() && b.is_finite() && *step > 0.0 && b >= a => {
            let count = ((b - a) / step + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|k| ((a + k as f64 * step) * 1e9).round() / 1e9).collect())
        }
        _ => Err(bad()),
    }
}

impl RunSpec {
    pub fn record(&self) -> RecordParams {
        RecordParams { t_end: self.t_end, dt_out: self.dt_out }
    }

    pub fn ic(&self) -> IcKind {
        self.ic_kind.unwrap_or(match self.command {
            Command::Simulate => IcKind::Translational,
            _ => IcKind::Mixed,
        })
    }

    fn needs_lattice(&self) -> bool {
        !matches!(self.command, Command::CellSweep | Command::Bloch)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if self.needs_lattice() {
            if self.n < 2 {
                return bad(format!("n must be at least 2, got {}", self.n));
            }
            if !(self.sigma_h >= 0.0 && self.sigma_h < 1.0) {
                return bad(format!("sigma_h must lie in [0, 1), got {}", self.sigma_h));
            }
        }
        if let Some(t) = self.temperature {
            if !(t > 0.0 && t.is_finite()) {
                return bad(format!("temperature must be positive, got {t}"));
            }
        }
        if let Some(g) = &self.temp_grid {
            parse_temp_grid(g)?;
        }
        self.record().validate().map_err(|e| Error::InvalidSpec(e.to_string()))?;
        if !(self.eps_ths >= 0.0 && self.eps_ths <= EPS_THS && self.eps_sat >= EPS_SAT && self.eps_sat <= 1.0) {
            return bad(format!("thresholds out of range: eps_ths {}, eps_sat {}", self.eps_ths, self.eps_sat));
        }
        if !(self.extended_fraction > 0.0 && self.extended_fraction < 1.0) {
            return bad(format!("extended_fraction must lie in (0, 1), got {}", self.extended_fraction));
        }
        if !(self.rk_tol > 0.0) {
            return bad(format!("rk_tol must be positive, got {}", self.rk_tol));
        }
        if matches!(self.command, Command::TransmissionSweep) && (self.probe_cell < 2 || self.probe_cell > self.n) {
            return bad(format!("probe_cell must lie in 2..={}, got {}", self.n, self.probe_cell));
        }
        if matches!(self.command, Command::Modes) {
            if let Some(&m) = self.mode_indices.iter().find(|&&m| m == 0 || m > 2 * self.n) {
                return bad(format!("mode index {m} outside 1..={}", 2 * self.n));
            }
        }
        if self.series_stride == 0 {
            return bad("series_stride must be at least 1".into());
        }
        if !(self.gamma > 0.0) || !(self.max_freq_mhz > 0.0) {
            return bad("gamma and max_freq_mhz must be positive".into());
        }
        if matches!(self.command, Command::Equilibrium | Command::Modes | Command::Simulate | Command::Transmission)
            && self.temperature.is_none()
        {
            return bad(format!("{} needs a temperature", self.command.as_str()));
        }
        Ok(())
    }

    fn grid(&self, default: &str) -> Result<Vec<f64>> {
        parse_temp_grid(self.temp_grid.as_deref().unwrap_or(default))
    }

    fn temp(&self) -> Result<f64> {
        self.temperature.ok_or_else(|| Error::InvalidSpec("missing temperature".into()))
    }
}

/// Files written by a run, plus the summary recorded in the manifest.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub files: Vec<FileRecord>,
    pub summary: Value,
}

/// Executes `spec`, writing data files and `manifest.json` into its output directory.
pub fn run(spec: &RunSpec) -> Result<RunOutcome> {
    spec.validate()?;
    let model = ThermalStrainModel::REFERENCE;
    let mut out = OutputSet::new(&spec.output_dir, spec.format)?;
    let summary = match spec.command {
        Command::CellSweep => cell_sweep(spec, &model, &mut out)?,
        Command::Bloch => bloch(spec, &model, &mut out)?,
        Command::Equilibrium => equilibrium(spec, &model, &mut out)?,
        Command::Modes => modes(spec, &model, &mut out)?,
        Command::Simulate => simulate(spec, &model, &mut out)?,
        Command::Transmission => transmission(spec, &model, &mut out)?,
        Command::TransmissionSweep => transmission_sweep(spec, &model, &mut out)?,
    };
    let files = out.finish(spec, summary.clone())?;
    Ok(RunOutcome { files, summary })
}

/// Machine-readable record of a failed run.
pub fn error_record(err: &Error) -> Value {
    let failures: Vec<Value> = match err {
        Error::Sweep(list) => list
            .iter()
            .map(|(t, e)| json!({"temperature": t, "kind": e.kind(), "message": e.to_string()}))
            .collect(),
        _ => Vec::new(),
    };
    json!({
        "status": "error",
        "kind": err.kind(),
        "message": err.to_string(),
        "exit_code": exit_code(err),
        "failures": failures,
    })
}

/// 2 for invalid input, 3 for numerical or i/o failures.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_input_error() {
        2
    } else {
        3
    }
}

fn waveguide(spec: &RunSpec, model: &ThermalStrainModel) -> Result<Waveguide> {
    Waveguide::new(spec.n, spec.sigma_h, spec.seed, &CellParams::reference(), model)
}

fn svg(out: &mut OutputSet, spec: &RunSpec, name: &str, body: impl FnOnce() -> String) -> Result<()> {
    if spec.plot == PlotKind::Svg {
        out.raw(name, body().as_bytes())?;
    }
    Ok(())
}

fn cell_sweep(spec: &RunSpec, model: &ThermalStrainModel, out: &mut OutputSet) -> Result<Value> {
    let temps = spec.grid("350:400:0.5")?;
    let cell = CellParams::reference();
    let critical = cell.critical_point(model)?;
    let mut table = Table::new(["T_K", "u_eqm", "lambda_buck", "lambda_buck_over_lambda_b", "delta_b", "delta_s"]);
    let mut u = Vec::new();
    let mut lb = Vec::new();
    for &t in &temps {
        let s = cell.solve_equilibrium(t, model)?;
        table.push(vec![
            t.into(),
            s.u_eqm.into(),
            s.lambda_buck.into(),
            (s.lambda_buck / cell.lambda_b).into(),
            model.bending_strain(t).into(),
            model.stretching_strain(t).into(),
        ]);
        u.push((t, s.u_eqm));
        lb.push((t, s.lambda_buck / cell.lambda_b));
    }
    out.table("cell_sweep", &table)?;
    svg(out, spec, "cell_sweep.svg", || {
        svg::line_plot(
            "Isolated cell",
            "T (K)",
            "u_eqm, lambda_buck / lambda_b",
            &[svg::Series { name: "u_eqm", points: u.clone() }, svg::Series { name: "lambda_buck / lambda_b", points: lb.clone() }],
        )
    })?;
    let monotone = u.windows(2).all(|w| w[1].1 < w[0].1);
    Ok(json!({
        "t_star_K": critical.t_star,
        "lambda_buck_min": critical.lambda_buck_min,
        "u_eqm_monotone_decreasing": monotone,
    }))
}

fn edges_row(table: &mut Table, e: &BandEdges) {
    table.push(vec![
        e.temperature.into(),
        omega_to_mhz(e.band1_min).into(),
        omega_to_mhz(e.band1_max).into(),
        omega_to_mhz(e.band2_min).into(),
        omega_to_mhz(e.band2_max).into(),
        omega_to_mhz(e.band1_max - e.band1_min).into(),
        omega_to_mhz(e.band2_max - e.band2_min).into(),
    ]);
}

fn edges_table() -> Table {
    Table::new(["T_K", "band1_min_MHz", "band1_max_MHz", "band2_min_MHz", "band2_max_MHz", "band1_width_MHz", "band2_width_MHz"])
}

fn bloch(spec: &RunSpec, model: &ThermalStrainModel, out: &mut OutputSet) -> Result<Value> {
    let cell = CalibratedCell::new(CellParams::reference(), model)?;
    if let (Some(t), None) = (spec.temperature, &spec.temp_grid) {
        let curves = dispersion_curves(t, &cell, model, DEFAULT_K_POINTS)?;
        let mut table = Table::new(["k", "f1_MHz", "f2_MHz"]);
        for i in 0..curves.k.len() {
            table.push(vec![curves.k[i].into(), omega_to_mhz(curves.omega1[i]).into(), omega_to_mhz(curves.omega2[i]).into()]);
        }
        out.table("dispersion", &table)?;
        let e = band_edges(t, &cell, model)?;
        let mut et = edges_table();
        edges_row(&mut et, &e);
        out.table("band_edges", &et)?;
        svg(out, spec, "dispersion.svg", || {
            let b1 = curves.k.iter().zip(&curves.omega1).map(|(&k, &w)| (k, omega_to_mhz(w))).collect();
            let b2 = curves.k.iter().zip(&curves.omega2).map(|(&k, &w)| (k, omega_to_mhz(w))).collect();
            svg::line_plot(&format!("Dispersion at {t} K"), "k (rad)", "f (MHz)", &[
                svg::Series { name: "branch I", points: b1 },
                svg::Series { name: "branch II", points: b2 },
            ])
        })?;
        return Ok(json!({"temperature_K": t, "gap_center_MHz": omega_to_mhz(e.gap_center()), "t_star_K": cell.critical.t_star}));
    }
    let temps = spec.grid("350:400:1")?;
    let edges = band_edges_vs_t(&temps, &cell, model)?;
    let mut table = edges_table();
    for e in &edges {
        edges_row(&mut table, e);
    }
    out.table("band_edges", &table)?;
    svg(out, spec, "band_edges.svg", || {
        let pick = |f: fn(&BandEdges) -> f64| edges.iter().map(|e| (e.temperature, omega_to_mhz(f(e)))).collect();
        svg::line_plot("Band edges", "T (K)", "f (MHz)", &[
            svg::Series { name: "band I min", points: pick(|e| e.band1_min) },
            svg::Series { name: "band I max", points: pick(|e| e.band1_max) },
            svg::Series { name: "band II min", points: pick(|e| e.band2_min) },
            svg::Series { name: "band II max", points: pick(|e| e.band2_max) },
        ])
    })?;
    let narrowest = edges
        .iter()
        .min_by(|a, b| a.band1_width().total_cmp(&b.band1_width()))
        .map(|e| e.temperature);
    Ok(json!({"band1_narrowest_K": narrowest, "t_star_K": cell.critical.t_star}))
}

fn equilibrium(spec: &RunSpec, model: &ThermalStrainModel, out: &mut OutputSet) -> Result<Value> {
    let t = spec.temp()?;
    let wg = waveguide(spec, model)?;
    let op = wg.operating_point(t)?;
    let mut table = Table::new(["cell", "h_ratio", "mu", "u_isolated", "u_eqm", "ltheta_eqm", "lambda_buck_over_lambda_b"]);
    for (i, c) in wg.cells.iter().enumerate() {
        table.push(vec![
            (i + 1).into(),
            c.params.h_ratio.into(),
            c.params.mu.into(),
            op.isolated[i].u_eqm.into(),
            op.eqm.u_eqm[i].into(),
            op.eqm.ltheta_eqm[i].into(),
            (op.system.lambda_buck(i) / c.params.lambda_b).into(),
        ]);
    }
    out.table("equilibrium", &table)?;
    svg(out, spec, "equilibrium.svg", || {
        let pts = op.eqm.u_eqm.iter().enumerate().map(|(i, &u)| ((i + 1) as f64, u)).collect();
        let iso = op.isolated.iter().enumerate().map(|(i, s)| ((i + 1) as f64, s.u_eqm)).collect();
        svg::line_plot(&format!("Equilibrium at {t} K"), "cell", "u", &[
            svg::Series { name: "coupled", points: pts },
            svg::Series { name: "isolated", points: iso },
        ])
    })?;
    Ok(json!({"temperature_K": t, "residual": op.eqm.residual_norm, "iterations": op.eqm.iterations}))
}

fn modes(spec: &RunSpec, model: &ThermalStrainModel, out: &mut OutputSet) -> Result<Value> {
    let t = spec.temp()?;
    let wg = waveguide(spec, model)?;
    let op = wg.operating_point(t)?;
    let modes = solve_modes_with(&op.system, spec.extended_fraction)?;
    let reference = CalibratedCell::new(CellParams::reference(), model)?;
    let edges = band_edges(t, &reference, model)?;
    let mut table = Table::new(["mode", "f_MHz", "pr", "label", "in_band"]);
    let mut outside = 0usize;
    for m in 0..modes.len() {
        let inside = edges.contains(modes.freqs[m], BAND_EDGE_TOL);
        outside += usize::from(!inside);
        table.push(vec![
            (m + 1).into(),
            omega_to_mhz(modes.freqs[m]).into(),
            modes.pr[m].into(),
            modes.label[m].as_str().into(),
            inside.into(),
        ]);
    }
    out.table("modes", &table)?;
    for &idx in &spec.mode_indices {
        let rows = mode_shape_export(&modes, idx, &op.eqm)?;
        let mut st = Table::new(["cell", "v", "h", "u_eqm"]);
        for r in &rows {
            st.push(vec![r.cell.into(), r.v.into(), r.h.into(), r.u_eqm.into()]);
        }
        out.table(&format!("mode_shape_{idx}"), &st)?;
        svg(out, spec, &format!("mode_shape_{idx}.svg"), || {
            let v = rows.iter().map(|r| (r.cell as f64, r.v)).collect();
            let h = rows.iter().map(|r| (r.cell as f64, r.h)).collect();
            svg::line_plot(&format!("Mode {idx} at {t} K"), "cell", "deflection", &[
                svg::Series { name: "v", points: v },
                svg::Series { name: "h", points: h },
            ])
        })?;
    }
    svg(out, spec, "modes.svg", || {
        let pts = (0..modes.len()).map(|m| (omega_to_mhz(modes.freqs[m]), modes.pr[m])).collect();
        svg::line_plot(&format!("Participation ratio at {t} K"), "f (MHz)", "PR", &[svg::Series { name: "PR", points: pts }])
    })?;
    let extended = modes.label.iter().filter(|l| **l == crate::modal::ModeLabel::Extended).count();
    Ok(json!({
        "temperature_K": t,
        "modes": modes.len(),
        "extended": extended,
        "localized": modes.len() - extended,
        "outside_bands": outside,
    }))
}

fn freq_limit(freqs: &[f64], max_mhz: f64) -> usize {
    freqs.iter().take_while(|&&w| omega_to_mhz(w) <= max_mhz).count()
}

fn simulate(spec: &RunSpec, model: &ThermalStrainModel, out: &mut OutputSet) -> Result<Value> {
    let t = spec.temp()?;
    let wg = waveguide(spec, model)?;
    let op = wg.operating_point(t)?;
    let modes = solve_modes_with(&op.system, spec.extended_fraction)?;
    let ic = initial_conditions(spec.ic(), &op.system);
    let record = spec.record();
    let ts = match spec.integrator {
        Integrator::Modal => integrate_modal(&op.system, &modes, &ic, &record)?,
        Integrator::Rk => integrate_rk(&op.system, &ic, &record, spec.rk_tol)?,
    };
    let n = op.system.n;
    let field = mechanical_energy(&ts, &op.system, &op.stiffs, spec.energy_convention);

    let mut series = Table::new(
        std::iter::once("t_s".to_string()).chain((1..=n).flat_map(|i| [format!("v_{i}"), format!("h_{i}")])),
    );
    let mut energy = Table::new(std::iter::once("t_s".to_string()).chain((1..=n).map(|i| format!("E_{i}"))));
    for s in (0..ts.n_samples()).step_by(spec.series_stride) {
        series.push(std::iter::once(ts.t[s].into()).chain(ts.q.row(s).iter().map(|&x| x.into())).collect());
        energy.push(std::iter::once(ts.t[s].into()).chain(field.values.row(s).iter().map(|&x| x.into())).collect());
    }
    out.table("time_series", &series)?;
    out.table("energy", &energy)?;

    let spec_map = spectral_energy(&ts, &op.system);
    let bins = freq_limit(&spec_map.freqs, spec.max_freq_mhz);
    let mut st = Table::new(["f_MHz", "cell", "E_tilde"]);
    for m in 0..bins {
        for i in 0..n {
            st.push(vec![omega_to_mhz(spec_map.freqs[m]).into(), (i + 1).into(), spec_map.energy[(m, i)].into()]);
        }
    }
    out.table("spectrum", &st)?;

    svg(out, spec, "energy.svg", || {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..ts.n_samples()).step_by(spec.series_stride).map(|s| field.values[(s, i)].clamp(0.0, 1.0)).collect())
            .collect();
        svg::heatmap(
            &format!("Normalized cell energy at {t} K"),
            "t (s)",
            "cell",
            (0.0, record.t_end),
            (0.5, n as f64 + 0.5),
            &rows,
            800,
            spec.gamma,
        )
    })?;

    let fronts = front_arrivals(&field, n);
    let (norm, _) = normalized_energy(&spec_map);
    let split = BandSplit::reference(model)?.at(t)?;
    let last: Vec<f64> = norm.column(n - 1).iter().copied().collect();
    let (b1, b2) = band_maxima(&last, &spec_map.freqs, split);
    Ok(json!({
        "temperature_K": t,
        "ic_kind": ic.kind.as_str(),
        "samples": ts.n_samples(),
        "max_conservation_error": field.max_conservation_error(),
        "fast_front_s": fronts.fast,
        "slow_front_s": fronts.slow,
        "last_cell_band1_max": b1,
        "last_cell_band2_max": b2,
    }))
}

fn transmission(spec: &RunSpec, model: &ThermalStrainModel, out: &mut OutputSet) -> Result<Value> {
    let t = spec.temp()?;
    let wg = waveguide(spec, model)?;
    let op = wg.operating_point(t)?;
    let modes = solve_modes_with(&op.system, spec.extended_fraction)?;
    let ic = initial_conditions(spec.ic(), &op.system);
    let ts = integrate_modal(&op.system, &modes, &ic, &spec.record())?;
    let spec_map = spectral_energy(&ts, &op.system);
    drop(ts);
    let map = transmission_map(&spec_map, spec.eps_ths, spec.eps_sat)?;
    let (norm, _) = normalized_energy(&spec_map);
    let split = BandSplit::reference(model)?.at(t)?;
    let bins = freq_limit(&map.freqs, spec.max_freq_mhz);
    let n = op.system.n;

    let mut table = Table::new(["cell", "f_MHz", "value"]);
    let mut summary = Table::new(["cell", "band1_max", "band2_max"]);
    for i in 0..n {
        for m in 0..bins {
            table.push(vec![(i + 1).into(), omega_to_mhz(map.freqs[m]).into(), map.values[(i, m)].into()]);
        }
        let row: Vec<f64> = norm.column(i).iter().copied().collect();
        let (b1, b2) = band_maxima(&row, &spec_map.freqs, split);
        summary.push(vec![(i + 1).into(), b1.into(), b2.into()]);
    }
    out.table("transmission", &table)?;
    out.table("band_summary", &summary)?;
    svg(out, spec, "transmission.svg", || {
        let rows: Vec<Vec<f64>> = (0..n).map(|i| (0..bins).map(|m| map.values[(i, m)]).collect()).collect();
        svg::heatmap(
            &format!("Transmission at {t} K"),
            "f (MHz)",
            "cell",
            (0.0, omega_to_mhz(map.freqs[bins.saturating_sub(1)])),
            (0.5, n as f64 + 0.5),
            &rows,
            800,
            spec.gamma,
        )
    })?;
    let last: Vec<f64> = norm.column(n - 1).iter().copied().collect();
    let (b1, b2) = band_maxima(&last, &spec_map.freqs, split);
    Ok(json!({
        "temperature_K": t,
        "ic_kind": ic.kind.as_str(),
        "split_MHz": omega_to_mhz(split),
        "normalizer": map.normalizer,
        "last_cell_band1_max": b1,
        "last_cell_band2_max": b2,
    }))
}

fn transmission_sweep(spec: &RunSpec, model: &ThermalStrainModel, out: &mut OutputSet) -> Result<Value> {
    let temps = spec.grid(&format!("{}:{}:1", SWEEP_RANGE.0, SWEEP_RANGE.1))?;
    let wg = waveguide(spec, model)?;
    let config = SweepConfig {
        temperatures: temps,
        probe_cell: spec.probe_cell,
        ic_kind: spec.ic(),
        record: spec.record(),
        eps_ths: spec.eps_ths,
        eps_sat: spec.eps_sat,
    };
    let r = transmission_vs_temperature(&wg, &config)?;
    let bins = freq_limit(&r.freqs, spec.max_freq_mhz);
    let mut table = Table::new(["T_K", "f_MHz", "value"]);
    let mut summary = Table::new(["T_K", "split_MHz", "band1_max", "band2_max", "band1_blocked"]);
    for (k, &t) in r.temperatures.iter().enumerate() {
        for m in 0..bins {
            table.push(vec![t.into(), omega_to_mhz(r.freqs[m]).into(), r.values[(k, m)].into()]);
        }
        summary.push(vec![
            t.into(),
            omega_to_mhz(r.split[k]).into(),
            r.band1_max[k].into(),
            r.band2_max[k].into(),
            r.band1_blocked(k).into(),
        ]);
    }
    out.table("transmission_sweep", &table)?;
    out.table("band_summary", &summary)?;
    svg(out, spec, "transmission_sweep.svg", || {
        let rows: Vec<Vec<f64>> = (0..r.temperatures.len()).map(|k| (0..bins).map(|m| r.values[(k, m)]).collect()).collect();
        let (t0, t1) = (r.temperatures[0], *r.temperatures.last().unwrap_or(&r.temperatures[0]));
        svg::heatmap(
            &format!("Transmission at cell {}", r.probe_cell),
            "f (MHz)",
            "T (K)",
            (0.0, omega_to_mhz(r.freqs[bins.saturating_sub(1)])),
            (t0 - 0.5, t1 + 0.5),
            &rows,
            800,
            spec.gamma,
        )
    })?;
    let window = r.blocked_window(370.0);
    Ok(json!({
        "probe_cell": r.probe_cell,
        "ic_kind": config.ic_kind.as_str(),
        "band1_blocked_window_K": window,
        "blocked_temperatures": r.temperatures.iter().enumerate().filter(|(k, _)| r.band1_blocked(*k)).map(|(_, t)| *t).collect::<Vec<_>>(),
    }))
}
