//! Monte-Carlo trial runner, parameter sweeps, CSV output and figure presets.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::channel::{draw_comm_channels, draw_dl_effective, draw_radar_errors, ModeVariances};
use crate::comm::{
    detect_symbols, dl_transmit, synthesize_dl, synthesize_ul_post_ic, zf_combiner_parts, Constellation,
};
use crate::error::{Error, Result};
use crate::kld::{KldReport, SymbolCloud};
use crate::numerics::RngStream;
use crate::radar::{
    detection_probability_mismatched, detection_threshold, draw_alpha, glrt_statistic, noncentrality,
    synthesize_radar_snapshots, waveform_stats, RadarCommInputs, RadarWaveform,
};
use crate::scenario::{build_geometry, Deployment, Duplex, Geometry, Mode, PathlossSet, ScenarioConfig};

/// Attempts at drawing a well-conditioned channel before a snapshot fails.
const MAX_REDRAWS: usize = 16;

/// Parameter a sweep or a series varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    PrOverN0Db,
    SigmaIcSq,
    /// Both leakage coefficients together.
    Beta,
    /// Comm power `P_c`, with the radar taking what the UL users leave.
    PowerSplit,
}

impl SweepVariable {
    pub fn label(&self) -> &'static str {
        match self {
            SweepVariable::PrOverN0Db => "pr_over_n0_db",
            SweepVariable::SigmaIcSq => "sigma_ic_sq",
            SweepVariable::Beta => "beta",
            SweepVariable::PowerSplit => "power_split",
        }
    }

    pub fn parse(label: &str) -> Result<Self> {
        [Self::PrOverN0Db, Self::SigmaIcSq, Self::Beta, Self::PowerSplit]
            .into_iter()
            .find(|v| v.label() == label)
            .ok_or_else(|| Error::Config(format!("unknown sweep variable '{label}'")))
    }

    pub fn apply(&self, config: &ScenarioConfig, value: f64) -> ScenarioConfig {
        let mut c = config.clone();
        match self {
            SweepVariable::PrOverN0Db => c.pr_over_n0_db = value,
            SweepVariable::SigmaIcSq => c.sigma_ic_sq = value,
            SweepVariable::Beta => {
                c.beta_ap = value;
                c.beta_r = value;
            }
            SweepVariable::PowerSplit => {
                c.p_c = value;
                c.p_r = 1.0 - value - c.p_u;
            }
        }
        c
    }
}

/// A named set of parameter overrides; each series is swept separately.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub overrides: Vec<(SweepVariable, f64)>,
}

impl Series {
    pub fn base() -> Self {
        Self { label: "base".into(), overrides: Vec::new() }
    }

    pub fn single(variable: SweepVariable, value: f64) -> Self {
        Self { label: format!("{}={value:e}", variable.label()), overrides: vec![(variable, value)] }
    }
}

/// Which processing chains a trial runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Chains {
    pub comm: bool,
    pub radar: bool,
}

impl Chains {
    pub const BOTH: Chains = Chains { comm: true, radar: true };
    pub const COMM: Chains = Chains { comm: true, radar: false };
    pub const RADAR: Chains = Chains { comm: false, radar: true };
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    pub trials_per_point: usize,
    pub modes: Vec<Mode>,
    pub series: Vec<Series>,
    pub chains: Chains,
    pub workers: usize,
}

impl SweepSpec {
    pub fn new(variable: SweepVariable, values: Vec<f64>, trials_per_point: usize, modes: Vec<Mode>) -> Self {
        Self { variable, values, trials_per_point, modes, series: vec![Series::base()], chains: Chains::BOTH, workers: 1 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Config("sweep has no values".into()));
        }
        if self.trials_per_point < 1 {
            return Err(Error::Config("sweep needs at least one trial per point".into()));
        }
        if self.modes.is_empty() || self.series.is_empty() {
            return Err(Error::Config("sweep needs at least one mode and one series".into()));
        }
        if !self.chains.comm && !self.chains.radar {
            return Err(Error::Config("sweep runs no chain".into()));
        }
        Ok(())
    }
}

/// Aggregated results of one (series, mode, value) point.
///
/// Metrics of a chain that did not run are NaN. Closed-form KLDs are means
/// over trials; `kld_dl` and `kld_ul` are per-user means and `kld_ul_sum`
/// sums over the UL users.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub mode: Mode,
    pub series: String,
    pub variable: SweepVariable,
    pub value: f64,
    pub ser_dl: f64,
    pub ser_ul: f64,
    pub pd: f64,
    pub pfa: f64,
    pub pd_analytic: f64,
    pub kld_dl: f64,
    pub kld_ul: f64,
    pub kld_ul_sum: f64,
    pub kld_radar: f64,
    pub kld_comm_total: f64,
    pub emp_kld_dl: f64,
    pub emp_kld_ul: f64,
    pub trials: usize,
    pub failed_trials: usize,
    pub wall_time_s: f64,
}

/// Comm-chain statistics accumulated over a run of snapshots.
#[derive(Debug, Clone)]
pub struct CommStats {
    /// Per DL user: cloud of `y - g s`, the received signal minus its desired part.
    pub dl_clouds: Vec<SymbolCloud>,
    /// Per DL user: sum of squared effective gains.
    pub dl_gain_sq: Vec<f64>,
    pub dl_interference_energy: Vec<f64>,
    /// Per UL user: cloud of the combiner output minus `sqrt(P_u,k) u`.
    pub ul_clouds: Vec<SymbolCloud>,
    pub ul_residual_energy: f64,
    pub ul_residual_samples: u64,
    /// Per UL user: sum of realized `[(B^H B)^-1]_kk`.
    pub ul_inverse_diag: Vec<f64>,
    pub dl_errors: u64,
    pub dl_symbols: u64,
    pub ul_errors: u64,
    pub ul_symbols: u64,
    pub snapshots: u64,
    pub redraws: u64,
    /// Leakage inputs for the radar chain, one per snapshot.
    pub radar_inputs: Vec<RadarCommInputs>,
}

impl CommStats {
    fn new(config: &ScenarioConfig, order: usize) -> Self {
        Self {
            dl_clouds: vec![SymbolCloud::new(order); config.k_d],
            dl_gain_sq: vec![0.0; config.k_d],
            dl_interference_energy: vec![0.0; config.k_d],
            ul_clouds: vec![SymbolCloud::new(order); config.k_u],
            ul_residual_energy: 0.0,
            ul_residual_samples: 0,
            ul_inverse_diag: vec![0.0; config.k_u],
            dl_errors: 0,
            dl_symbols: 0,
            ul_errors: 0,
            ul_symbols: 0,
            snapshots: 0,
            redraws: 0,
            radar_inputs: Vec::new(),
        }
    }

    /// Empirical DL KLD of user `k` with the desired part scaled by the
    /// RMS effective gain.
    pub fn empirical_kld_dl(&self, k: usize, constellation: &Constellation) -> Result<f64> {
        let g = (self.dl_gain_sq[k] / self.snapshots as f64).sqrt();
        let shift: Vec<Complex64> = constellation.points().iter().map(|p| p * g).collect();
        self.dl_clouds[k].empirical_kld_shifted(&shift)
    }

    pub fn empirical_kld_ul(&self, k: usize, config: &ScenarioConfig, constellation: &Constellation) -> Result<f64> {
        let a = config.ul_user_power().sqrt();
        let shift: Vec<Complex64> = constellation.points().iter().map(|p| p * a).collect();
        self.ul_clouds[k].empirical_kld_shifted(&shift)
    }

    /// Mean per-element UL residual energy, noise excluded.
    pub fn ul_residual_variance(&self) -> f64 {
        self.ul_residual_energy / self.ul_residual_samples as f64
    }

    pub fn dl_interference_variance(&self, k: usize) -> f64 {
        self.dl_interference_energy[k] / self.snapshots as f64
    }

    pub fn mean_inverse_diag(&self) -> Vec<f64> {
        self.ul_inverse_diag.iter().map(|s| s / self.snapshots as f64).collect()
    }
}

/// Run `n` comm snapshots on one geometry.
///
/// With `detect` off only the DL transmit vectors and UL symbols are
/// produced, which is all the radar chain needs. Snapshot `l` uses radar
/// waveform column `l mod L`.
pub fn run_comm_snapshots<R: Rng + ?Sized>(
    config: &ScenarioConfig,
    pathloss: &PathlossSet,
    waveform: &RadarWaveform,
    n: usize,
    detect: bool,
    keep_radar_inputs: bool,
    rng: &mut R,
) -> Result<CommStats> {
    let constellation = Constellation::new(config.constellation());
    let mut st = CommStats::new(config, constellation.order());
    let p_ul = config.ul_user_power().sqrt();
    for l in 0..n {
        let mut attempt = 0;
        let (channels, dl_eff, dl, combiner) = loop {
            let (channels, dl_eff) = if detect {
                let c = draw_comm_channels(config, rng)?;
                let e = c.dl_effective(pathloss);
                (Some(c), e)
            } else {
                (None, draw_dl_effective(config, pathloss, rng)?)
            };
            let dl_idx = constellation.draw(config.k_d, rng);
            let s: Vec<Complex64> = dl_idx.iter().map(|&i| constellation.point(i)).collect();
            let dl = dl_transmit(config, &dl_eff, &s);
            let combiner = channels.as_ref().map(|c| zf_combiner_parts(&c.ul_effective(pathloss)));
            match (dl, combiner.transpose()) {
                (Ok(dl), Ok(c)) => break (channels, dl_eff, (dl, dl_idx), c),
                (Err(Error::SingularChannel(_)), _) | (_, Err(Error::SingularChannel(_))) if attempt + 1 < MAX_REDRAWS => {
                    attempt += 1;
                    st.redraws += 1;
                }
                (Err(e), _) | (_, Err(e)) => return Err(e),
            }
        };
        let (dl, dl_idx) = dl;
        let ul_idx = constellation.draw(config.k_u, rng);
        let u: Vec<Complex64> = ul_idx.iter().map(|&i| constellation.point(i)).collect();
        let radar_tx = waveform.transmit(l % waveform.l(), config.p_r);
        if let (Some(channels), Some((g, inv_diag))) = (channels, combiner) {
            let rx = synthesize_dl(config, pathloss, &channels, &dl_eff, &dl, &radar_tx, Some(&u), rng)?;
            let y: Vec<Complex64> = rx.received.iter().copied().collect();
            let got = detect_symbols(&y, &constellation);
            for k in 0..config.k_d {
                st.dl_errors += u64::from(got[k] != dl_idx[k]);
                st.dl_clouds[k].push(dl_idx[k], rx.interference[k]);
                st.dl_gain_sq[k] += dl.gains[k] * dl.gains[k];
                st.dl_interference_energy[k] += rx.interference[k].norm_sqr();
            }
            st.dl_symbols += config.k_d as u64;

            let ul_eff = channels.ul_effective(pathloss);
            let ul = synthesize_ul_post_ic(config, pathloss, &channels, &ul_eff, &u, &dl.tx, &radar_tx, rng)?;
            let r = g * &ul.received;
            let r: Vec<Complex64> = r.iter().copied().collect();
            let got = detect_symbols(&r, &constellation);
            for k in 0..config.k_u {
                st.ul_errors += u64::from(got[k] != ul_idx[k]);
                st.ul_clouds[k].push(ul_idx[k], r[k] - u[k] * p_ul);
                st.ul_inverse_diag[k] += inv_diag[k];
            }
            st.ul_symbols += config.k_u as u64;
            st.ul_residual_energy += ul.residual.norm_squared();
            st.ul_residual_samples += ul.residual.len() as u64;
        }
        st.snapshots += 1;
        if keep_radar_inputs {
            st.radar_inputs.push(RadarCommInputs { dl_tx: dl.tx, ul_symbols: u });
        }
    }
    Ok(st)
}

/// Raw counts and closed forms from one trial.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub kld: KldReport,
    pub comm: Option<CommStats>,
    pub emp_kld_dl: Vec<f64>,
    pub emp_kld_ul: Vec<f64>,
    /// Per bin: target-present decision, target-absent decision and
    /// analytic detection probability.
    pub detections: Vec<(bool, bool, f64)>,
}

/// One trial on stream `stream`. `geometry` fixes the layout; otherwise it
/// is drawn from the stream.
pub fn run_trial(config: &ScenarioConfig, chains: Chains, geometry: Option<&Geometry>, stream: RngStream) -> Result<TrialOutcome> {
    let mut rng = stream.rng();
    let drawn;
    let geometry = match geometry {
        Some(g) => g,
        None => {
            drawn = build_geometry(config, &mut rng)?;
            &drawn
        }
    };
    let pathloss = PathlossSet::build(config, geometry);
    let waveform = RadarWaveform::new(config, &mut rng)?;
    let stats = waveform_stats(config, &waveform);
    let variances = ModeVariances::evaluate(config, &pathloss, &stats)?;
    let alphas: Vec<Complex64> = (0..config.t).map(|_| draw_alpha(config.alpha_model, &mut rng)).collect();
    let comm = run_comm_snapshots(config, &pathloss, &waveform, config.l, chains.comm, chains.radar, &mut rng)?;
    let constellation = Constellation::new(config.constellation());
    let (emp_kld_dl, emp_kld_ul, inverse) = if chains.comm {
        let dl = (0..config.k_d).map(|k| comm.empirical_kld_dl(k, &constellation).unwrap_or(f64::NAN)).collect();
        let ul = (0..config.k_u).map(|k| comm.empirical_kld_ul(k, config, &constellation).unwrap_or(f64::NAN)).collect();
        (dl, ul, Some(comm.mean_inverse_diag()))
    } else {
        (Vec::new(), Vec::new(), None)
    };
    let inverse = match config.ul_inverse_mode {
        crate::scenario::UlInverseMode::PerDraw if inverse.is_none() => {
            return Err(Error::Contract("per-draw UL KLD needs the comm chain".into()))
        }
        _ => inverse,
    };
    let kld = KldReport::closed_form(config, &pathloss, &waveform, &variances, &alphas, inverse.as_deref())?;
    let mut detections = Vec::new();
    if chains.radar {
        let tau = detection_threshold(config.pfa)?;
        for t in 0..config.t {
            let v0 = variances.radar_omega_h0_total[t];
            let v1 = variances.radar_omega_total[t];
            let decide = |q: bool, rng: &mut rand_chacha::ChaCha8Rng| -> Result<bool> {
                let frame = synthesize_radar_snapshots(
                    config,
                    &pathloss,
                    &waveform,
                    t,
                    q,
                    alphas[t],
                    &comm.radar_inputs,
                    |r| draw_radar_errors(config, q, r),
                    rng,
                )?;
                Ok(glrt_statistic(&frame.observation, &waveform, t, v0)? > tau)
            };
            let hit = decide(true, &mut rng)?;
            let false_alarm = decide(false, &mut rng)?;
            let lambda = noncentrality(&pathloss, &waveform, t, alphas[t], v1);
            detections.push((hit, false_alarm, detection_probability_mismatched(lambda, tau, v0, v1)?));
        }
    }
    Ok(TrialOutcome { kld, comm: if chains.comm { Some(comm) } else { None }, emp_kld_dl, emp_kld_ul, detections })
}

fn is_trial_failure(e: &Error) -> bool {
    matches!(e, Error::SingularChannel(_) | Error::Capacity { .. })
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        s / n as f64
    }
}

/// Config for one point of a sweep.
pub fn point_config(config: &ScenarioConfig, spec: &SweepSpec, series: &Series, mode: Mode, value: f64) -> ScenarioConfig {
    let mut c = config.with_mode(mode);
    for (var, v) in &series.overrides {
        c = var.apply(&c, *v);
    }
    spec.variable.apply(&c, value)
}

/// Run every (series, mode, value) point. Trial `i` always uses stream `i`
/// of the master seed, and results are reduced in trial order, so output is
/// identical for any worker count.
pub fn run_sweep(config: &ScenarioConfig, spec: &SweepSpec) -> Result<Vec<SweepRecord>> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let mut records = Vec::new();
    for series in &spec.series {
        for &mode in &spec.modes {
            for &value in &spec.values {
                let cfg = point_config(config, spec, series, mode, value);
                cfg.validate()?;
                let geometry = if cfg.fixed_geometry {
                    Some(build_geometry(&cfg, &mut RngStream::new(cfg.master_seed, u64::MAX).rng())?)
                } else {
                    None
                };
                let start = Instant::now();
                let n = spec.trials_per_point;
                let outcomes: Vec<Result<TrialOutcome>> = pool.install(|| {
                    (0..n)
                        .into_par_iter()
                        .map(|i| run_trial(&cfg, spec.chains, geometry.as_ref(), RngStream::new(cfg.master_seed, i as u64)))
                        .collect()
                });
                let mut ok = Vec::with_capacity(n);
                let mut failed = 0;
                for o in outcomes {
                    match o {
                        Ok(o) => ok.push(o),
                        Err(e) if is_trial_failure(&e) => failed += 1,
                        Err(e) => return Err(e),
                    }
                }
                if failed * 100 > n {
                    return Err(Error::TooManyFailures { failed, total: n });
                }
                let mut record = aggregate(&cfg, spec, series, value, &ok);
                record.failed_trials = failed;
                record.wall_time_s = start.elapsed().as_secs_f64();
                records.push(record);
            }
        }
    }
    Ok(records)
}

fn aggregate(cfg: &ScenarioConfig, spec: &SweepSpec, series: &Series, value: f64, trials: &[TrialOutcome]) -> SweepRecord {
    let ratio = |e: u64, n: u64| if n == 0 { f64::NAN } else { e as f64 / n as f64 };
    let comm = trials.iter().filter_map(|t| t.comm.as_ref());
    let (dl_e, dl_n, ul_e, ul_n) = comm.fold((0, 0, 0, 0), |a, c| (a.0 + c.dl_errors, a.1 + c.dl_symbols, a.2 + c.ul_errors, a.3 + c.ul_symbols));
    let det = || trials.iter().flat_map(|t| t.detections.iter());
    let frames = det().count() as u64;
    let finite = |xs: Vec<f64>| mean(xs.into_iter().filter(|x| x.is_finite()));
    SweepRecord {
        mode: cfg.mode(),
        series: series.label.clone(),
        variable: spec.variable,
        value,
        ser_dl: if spec.chains.comm { ratio(dl_e, dl_n) } else { f64::NAN },
        ser_ul: if spec.chains.comm { ratio(ul_e, ul_n) } else { f64::NAN },
        pd: ratio(det().filter(|d| d.0).count() as u64, frames),
        pfa: ratio(det().filter(|d| d.1).count() as u64, frames),
        pd_analytic: mean(det().map(|d| d.2)),
        kld_dl: mean(trials.iter().flat_map(|t| t.kld.kld_dl.iter().copied())),
        kld_ul: mean(trials.iter().flat_map(|t| t.kld.kld_ul.iter().copied())),
        kld_ul_sum: mean(trials.iter().map(|t| t.kld.kld_ul.iter().sum())),
        kld_radar: mean(trials.iter().flat_map(|t| t.kld.kld_radar.iter().copied())),
        kld_comm_total: mean(trials.iter().map(|t| t.kld.kld_comm_total)),
        emp_kld_dl: finite(trials.iter().flat_map(|t| t.emp_kld_dl.iter().copied()).collect()),
        emp_kld_ul: finite(trials.iter().flat_map(|t| t.emp_kld_ul.iter().copied()).collect()),
        trials: trials.len(),
        failed_trials: 0,
        wall_time_s: 0.0,
    }
}

pub const CSV_HEADER: [&str; 18] = [
    "mode",
    "series",
    "variable",
    "value",
    "ser_dl",
    "ser_ul",
    "pd",
    "pfa",
    "pd_analytic",
    "kld_dl",
    "kld_ul",
    "kld_ul_sum",
    "kld_radar",
    "kld_comm_total",
    "emp_kld_dl",
    "emp_kld_ul",
    "trials",
    "failed_trials",
];

fn fmt_f(x: f64) -> String {
    format!("{x:.8e}")
}

/// Write records as CSV: floats with nine significant digits, no timing
/// column, so equal inputs give equal bytes.
pub fn emit_csv(records: &[SweepRecord], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(CSV_HEADER)?;
    for r in records {
        let mut row = vec![r.mode.label().to_string(), r.series.clone(), r.variable.label().to_string()];
        row.extend(
            [
                r.value,
                r.ser_dl,
                r.ser_ul,
                r.pd,
                r.pfa,
                r.pd_analytic,
                r.kld_dl,
                r.kld_ul,
                r.kld_ul_sum,
                r.kld_radar,
                r.kld_comm_total,
                r.emp_kld_dl,
                r.emp_kld_ul,
            ]
            .map(fmt_f),
        );
        row.push(r.trials.to_string());
        row.push(r.failed_trials.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Parse a file written by [`emit_csv`]. Timing is not stored and reads as 0.
pub fn read_csv(path: &Path) -> Result<Vec<SweepRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in r.records() {
        let row = row?;
        if row.len() != CSV_HEADER.len() {
            return Err(Error::Config(format!("CSV row has {} fields", row.len())));
        }
        let f = |i: usize| row[i].parse::<f64>().map_err(|e| Error::Config(format!("field {}: {e}", CSV_HEADER[i])));
        let u = |i: usize| row[i].parse::<usize>().map_err(|e| Error::Config(format!("field {}: {e}", CSV_HEADER[i])));
        out.push(SweepRecord {
            mode: Mode::parse(&row[0])?,
            series: row[1].to_string(),
            variable: SweepVariable::parse(&row[2])?,
            value: f(3)?,
            ser_dl: f(4)?,
            ser_ul: f(5)?,
            pd: f(6)?,
            pfa: f(7)?,
            pd_analytic: f(8)?,
            kld_dl: f(9)?,
            kld_ul: f(10)?,
            kld_ul_sum: f(11)?,
            kld_radar: f(12)?,
            kld_comm_total: f(13)?,
            emp_kld_dl: f(14)?,
            emp_kld_ul: f(15)?,
            trials: u(16)?,
            failed_trials: u(17)?,
            wall_time_s: 0.0,
        });
    }
    Ok(out)
}

type Metric = (&'static str, fn(&SweepRecord) -> f64, Option<fn(&SweepRecord) -> f64>);

const PLOT_METRICS: [Metric; 7] = [
    ("ser_dl", |r| r.ser_dl, None),
    ("ser_ul", |r| r.ser_ul, None),
    ("pd", |r| r.pd, Some(|r| r.pd_analytic)),
    ("kld_dl", |r| r.emp_kld_dl, Some(|r| r.kld_dl)),
    ("kld_ul", |r| r.emp_kld_ul, Some(|r| r.kld_ul)),
    ("kld_radar", |r| r.kld_radar, None),
    ("kld_comm_total", |r| r.kld_comm_total, None),
];

/// Write one whitespace-separated data file per metric into `dir`, with a
/// block per (series, mode). Metrics that are NaN throughout are skipped.
pub fn emit_plot_data(records: &[SweepRecord], dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (name, y, analytic) in PLOT_METRICS {
        if !records.iter().any(|r| y(r).is_finite()) {
            continue;
        }
        let mut text = String::new();
        let mut blocks: Vec<(String, Mode)> = Vec::new();
        for r in records {
            if !blocks.iter().any(|b| b.0 == r.series && b.1 == r.mode) {
                blocks.push((r.series.clone(), r.mode));
            }
        }
        for (i, (series, mode)) in blocks.iter().enumerate() {
            if i > 0 {
                text.push_str("\n\n");
            }
            let var = records[0].variable.label();
            let _ = writeln!(text, "# {mode} {series}");
            match analytic {
                Some(_) => {
                    let _ = writeln!(text, "# {var} {name} {name}_analytic");
                }
                None => {
                    let _ = writeln!(text, "# {var} {name}");
                }
            }
            for r in records.iter().filter(|r| &r.series == series && r.mode == *mode) {
                let _ = write!(text, "{} {}", fmt_f(r.value), fmt_f(y(r)));
                if let Some(a) = analytic {
                    let _ = write!(text, " {}", fmt_f(a(r)));
                }
                text.push('\n');
            }
        }
        let path = dir.join(format!("{name}.dat"));
        std::fs::write(&path, text)?;
        written.push(path);
    }
    Ok(written)
}

pub const FIGURE_PRESETS: [&str; 14] = [
    "fig1a", "fig1b", "fig2a", "fig2b", "fig3a", "fig3b", "fig3c", "fig4a", "fig4b", "fig5a", "fig5b", "fig6a", "fig6b", "fig6c",
];

/// Configuration and sweep reproducing one result panel at desk scale.
pub fn figure_preset(name: &str) -> Result<(ScenarioConfig, SweepSpec)> {
    if !FIGURE_PRESETS.contains(&name) {
        return Err(Error::Config(format!("unknown figure preset '{name}'")));
    }
    let figure: u32 = name[3..4].parse().expect("preset digit");
    let panel = &name[4..];
    let deployment = if figure <= 3 { Deployment::Separated } else { Deployment::Shared };
    let modes = vec![Mode { deployment, duplex: Duplex::Hd }, Mode { deployment, duplex: Duplex::Fd }];
    let mut config = ScenarioConfig {
        deployment,
        pathloss_ref_m: 100.0,
        n_mc: 1000,
        ..ScenarioConfig::default()
    };
    let (series, chains) = match figure % 3 {
        1 => {
            config.beta_ap = 1e-3;
            config.beta_r = 1e-3;
            let s = [1e-6, 1e-3, 1e-1].map(|v| Series::single(SweepVariable::SigmaIcSq, v));
            (s.to_vec(), if panel == "a" { Chains::COMM } else { Chains::RADAR })
        }
        2 => {
            config.sigma_ic_sq = 1e-4;
            let s = [1e-5, 1e-3, 1e-1].map(|v| Series::single(SweepVariable::Beta, v));
            (s.to_vec(), if panel == "a" { Chains::COMM } else { Chains::RADAR })
        }
        _ => {
            config.beta_ap = 1e-4;
            config.beta_r = 1e-4;
            config.sigma_ic_sq = 1e-3;
            let s = [0.8, 0.4, 0.2].map(|v| Series::single(SweepVariable::PowerSplit, v));
            (s.to_vec(), if panel == "c" { Chains::RADAR } else { Chains::COMM })
        }
    };
    let values = (0..=6).map(|i| 5.0 * i as f64).collect();
    let spec = SweepSpec {
        variable: SweepVariable::PrOverN0Db,
        values,
        trials_per_point: config.n_mc,
        modes,
        series,
        chains,
        workers: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    };
    Ok((config, spec))
}
