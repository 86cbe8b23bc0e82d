//! Small-scale fading and cancellation-error draws, and the closed-form
//! residual interference-plus-noise variances they imply.
//!
//! Error matrices are stored as `receivers x sources`, matching the
//! orientation [`masked_apply`] expects.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::numerics::sample_complex_gaussian_or_zero;
use crate::scenario::{Deployment, Duplex, Mode, PathlossSet, ScenarioConfig};

/// Fading and error matrices seen by the comm chain in one snapshot.
#[derive(Debug, Clone)]
pub struct CommChannels {
    /// DL users x comm APs.
    pub h_dl: DMatrix<Complex64>,
    /// Shared deployment: clutter path added to the DL channel, users x APs.
    pub clutter_dl: Option<DMatrix<Complex64>>,
    /// Separated deployment: radar AP to DL user interference, users x radar APs.
    pub f_dl: Option<DMatrix<Complex64>>,
    /// Comm APs x UL users.
    pub h_ul: DMatrix<Complex64>,
    /// FD: UL user to DL user interference, DL users x UL users.
    pub h_uu: Option<DMatrix<Complex64>>,
    /// Backscatter estimation error at the UL receivers, comm APs x radar APs.
    pub err_ul_backscatter: DMatrix<Complex64>,
    /// FD: AP self-interference estimation error, comm APs x comm APs.
    pub err_ul_si: Option<DMatrix<Complex64>>,
}

/// Estimation errors seen by the radar receivers in one snapshot.
#[derive(Debug, Clone)]
pub struct RadarErrors {
    /// Radar APs x UL users.
    pub err_ul: DMatrix<Complex64>,
    /// Comm leakage error: radar x comm APs (separated FD) or AP x AP
    /// (shared HD, target present).
    pub err_comm: Option<DMatrix<Complex64>>,
    /// FD: radar self-interference error, radar APs x radar APs.
    pub err_si: Option<DMatrix<Complex64>>,
    /// Shared FD: clutter error, AP x AP.
    pub err_clutter: Option<DMatrix<Complex64>>,
}

#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub comm: CommChannels,
    pub radar: RadarErrors,
}

impl CommChannels {
    /// DL effective channel `D_c .* Z`, where `Z` is the fading channel
    /// plus the clutter path in shared deployment.
    pub fn dl_effective(&self, pathloss: &PathlossSet) -> DMatrix<Complex64> {
        let mut z = self.h_dl.clone();
        if let Some(f) = &self.clutter_dl {
            z += f;
        }
        z.zip_map(&pathloss.d_c, |h, d| h * d)
    }

    /// UL effective channel, comm APs x UL users.
    pub fn ul_effective(&self, pathloss: &PathlossSet) -> DMatrix<Complex64> {
        self.h_ul.zip_map(&pathloss.d_c_ul.transpose(), |h, d| h * d)
    }
}

/// Draw the comm-side matrices the configured mode needs.
pub fn draw_comm_channels<R: Rng + ?Sized>(config: &ScenarioConfig, rng: &mut R) -> Result<CommChannels> {
    let mc = config.m_comm();
    let mr = config.m_radar();
    let fd = config.duplex == Duplex::Fd;
    let shared = config.deployment == Deployment::Shared;
    let ic = config.ic_errors();
    let h_dl = sample_complex_gaussian_or_zero(config.k_d, mc, config.h_var, rng)?;
    let extra = sample_complex_gaussian_or_zero(config.k_d, if shared { mc } else { mr }, config.f_var, rng)?;
    let (clutter_dl, f_dl) = if shared { (Some(extra), None) } else { (None, Some(extra)) };
    let h_ul = sample_complex_gaussian_or_zero(mc, config.k_u, config.h_var, rng)?;
    let h_uu = if fd { Some(sample_complex_gaussian_or_zero(config.k_d, config.k_u, config.u_var, rng)?) } else { None };
    let err_ul_backscatter = sample_complex_gaussian_or_zero(mc, mr, ic.ul_backscatter, rng)?;
    let err_ul_si = if fd { Some(sample_complex_gaussian_or_zero(mc, mc, ic.ul_si, rng)?) } else { None };
    Ok(CommChannels { h_dl, clutter_dl, f_dl, h_ul, h_uu, err_ul_backscatter, err_ul_si })
}

/// Draw only the DL effective channel, for runs that need the DL transmit
/// vector but no comm reception.
pub fn draw_dl_effective<R: Rng + ?Sized>(config: &ScenarioConfig, pathloss: &PathlossSet, rng: &mut R) -> Result<DMatrix<Complex64>> {
    let mut z = sample_complex_gaussian_or_zero(config.k_d, config.m_comm(), config.h_var, rng)?;
    if config.deployment == Deployment::Shared {
        z += sample_complex_gaussian_or_zero(config.k_d, config.m_comm(), config.f_var, rng)?;
    }
    Ok(z.zip_map(&pathloss.d_c, |h, d| h * d))
}

/// Draw the radar-side error matrices for hypothesis `q`.
///
/// The shared HD comm-leakage error only enters with a target present,
/// so it is skipped for `q = false`.
pub fn draw_radar_errors<R: Rng + ?Sized>(config: &ScenarioConfig, q: bool, rng: &mut R) -> Result<RadarErrors> {
    let mc = config.m_comm();
    let mr = config.m_radar();
    let ic = config.ic_errors();
    let err_ul = sample_complex_gaussian_or_zero(mr, config.k_u, ic.radar_ul, rng)?;
    let mut out = RadarErrors { err_ul, err_comm: None, err_si: None, err_clutter: None };
    match (config.deployment, config.duplex) {
        (Deployment::Separated, Duplex::Hd) => {}
        (Deployment::Separated, Duplex::Fd) => {
            out.err_comm = Some(sample_complex_gaussian_or_zero(mr, mc, ic.radar_comm, rng)?);
            out.err_si = Some(sample_complex_gaussian_or_zero(mr, mr, ic.radar_si, rng)?);
        }
        (Deployment::Shared, Duplex::Hd) => {
            if q {
                out.err_comm = Some(sample_complex_gaussian_or_zero(mr, mc, ic.radar_comm, rng)?);
            }
        }
        (Deployment::Shared, Duplex::Fd) => {
            out.err_clutter = Some(sample_complex_gaussian_or_zero(mr, mr, ic.clutter, rng)?);
            out.err_si = Some(sample_complex_gaussian_or_zero(mr, mr, ic.radar_si, rng)?);
        }
    }
    Ok(out)
}

/// All matrices for one snapshot, radar errors drawn for a present target.
pub fn draw_channels<R: Rng + ?Sized>(config: &ScenarioConfig, rng: &mut R) -> Result<ChannelRealization> {
    let comm = draw_comm_channels(config, rng)?;
    let radar = draw_radar_errors(config, true, rng)?;
    Ok(ChannelRealization { comm, radar })
}

/// `out[i] = sum_j w[i,j] err[i,j] src[j]`.
pub fn masked_apply(weights: &DMatrix<f64>, err: &DMatrix<Complex64>, src: &DVector<Complex64>) -> DVector<Complex64> {
    assert_eq!(weights.shape(), err.shape(), "weight and error shapes differ");
    assert_eq!(err.ncols(), src.len(), "error columns differ from source length");
    let mut out = DVector::zeros(err.nrows());
    for j in 0..err.ncols() {
        let s = src[j];
        for i in 0..err.nrows() {
            out[i] += err[(i, j)] * (weights[(i, j)] * s);
        }
    }
    out
}

/// Transmit-side moments the residual closed forms depend on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveformStats {
    /// `tr(R_x)` of the unit radar waveform.
    pub tr_rx: f64,
    /// Mean `|entry|^2` of a unit-norm DL precoded vector, `1 / M_comm`.
    pub precoder_entry_variance: f64,
}

impl WaveformStats {
    pub fn new(config: &ScenarioConfig, tr_rx: f64) -> Self {
        Self { tr_rx, precoder_entry_variance: 1.0 / config.m_comm() as f64 }
    }

    /// Mean power radiated by the shared APs, comm plus radar.
    fn shared_tx_power(&self, config: &ScenarioConfig) -> f64 {
        let m = config.m as f64;
        self.precoder_entry_variance * m * config.p_c + config.p_r / m * self.tr_rx
    }
}

fn check_mode(config: &ScenarioConfig, pathloss: &PathlossSet) -> Result<()> {
    if config.mode() != pathloss.mode {
        return Err(Error::Contract(format!("config mode {} but pathloss built for {}", config.mode(), pathloss.mode)));
    }
    Ok(())
}

fn frob_sq(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|x| x * x).sum()
}

/// Total interference-plus-noise variance at DL user `k`.
pub fn dl_interference_variance(config: &ScenarioConfig, pathloss: &PathlossSet, k: usize) -> Result<f64> {
    check_mode(config, pathloss)?;
    if k >= config.k_d {
        return Err(Error::Contract(format!("DL user {k} out of range")));
    }
    let radar = match config.deployment {
        Deployment::Separated => {
            let sum: f64 = pathloss.d_ru.row(k).iter().map(|d| d * d).sum();
            config.p_r / config.m_r as f64 * sum * config.f_var
        }
        Deployment::Shared => {
            let sum: f64 = pathloss.d_c.row(k).iter().map(|d| d * d).sum();
            config.p_r / config.m as f64 * sum * (config.h_var + config.f_var)
        }
    };
    let ue = if config.duplex == Duplex::Fd {
        let p = config.ul_user_power();
        pathloss.d_u.row(k).iter().map(|d| p * d * d * config.u_var).sum()
    } else {
        0.0
    };
    Ok(radar + ue + config.noise_total_variance())
}

/// Mean per-receiver residual variance after UL cancellation, without noise.
pub fn ul_residual_variance(config: &ScenarioConfig, pathloss: &PathlossSet, stats: &WaveformStats) -> Result<f64> {
    check_mode(config, pathloss)?;
    let ic = config.ic_errors();
    let mc = config.m_comm() as f64;
    let coupling = frob_sq(&pathloss.d_rc) / mc;
    Ok(match config.deployment {
        Deployment::Separated => {
            let mr = config.m_r as f64;
            let backscatter = ic.ul_backscatter * config.p_r / mr * coupling * stats.tr_rx / mr;
            let si = if config.duplex == Duplex::Fd {
                ic.ul_si * config.beta_ap.powi(2) * stats.precoder_entry_variance * mc * config.p_c
            } else {
                0.0
            };
            backscatter + si
        }
        Deployment::Shared => {
            let p_tx = stats.shared_tx_power(config);
            let backscatter = ic.ul_backscatter * coupling * p_tx / mc;
            let si = if config.duplex == Duplex::Fd { ic.ul_si * config.beta_ap.powi(2) * p_tx } else { 0.0 };
            backscatter + si
        }
    })
}

/// Mean per-receiver radar residual variance for bin `t` under hypothesis
/// `q`, including noise.
pub fn radar_residual_variance(
    config: &ScenarioConfig,
    pathloss: &PathlossSet,
    stats: &WaveformStats,
    t: usize,
    q: bool,
) -> Result<f64> {
    check_mode(config, pathloss)?;
    if t >= pathloss.bins.len() {
        return Err(Error::Contract(format!("bin {t} out of range")));
    }
    let ic = config.ic_errors();
    let m_star = config.m_radar() as f64;
    let p_u = config.ul_user_power();
    let ul = ic.radar_ul * frob_sq(&pathloss.d_ru_ul) * p_u / m_star;
    let sw = stats.precoder_entry_variance;
    let extra = match (config.deployment, config.duplex) {
        (Deployment::Separated, Duplex::Hd) => 0.0,
        (Deployment::Separated, Duplex::Fd) => {
            let comm = ic.radar_comm * frob_sq(&pathloss.d_rc) / m_star * sw * config.p_c;
            let si = ic.radar_si * config.beta_r.powi(2) * config.p_r / m_star * stats.tr_rx;
            comm + si
        }
        (Deployment::Shared, Duplex::Hd) => {
            if q {
                let d2: f64 = pathloss.bins[t].d_r.iter().map(|d| d * d).sum();
                ic.radar_comm * d2 * d2 / m_star * sw * config.p_c
            } else {
                0.0
            }
        }
        (Deployment::Shared, Duplex::Fd) => {
            let p_tx = stats.shared_tx_power(config);
            let clutter = ic.clutter * frob_sq(&pathloss.clutter_matrix(t, config.clutter_distance)) / m_star * p_tx / m_star;
            let si = ic.radar_si * config.beta_r.powi(2) * p_tx;
            clutter + si
        }
    };
    Ok(ul + extra + config.noise_total_variance())
}

/// Closed-form variances of one mode, all including noise.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeVariances {
    pub mode: Mode,
    /// Per DL user.
    pub dl_zeta_total: Vec<f64>,
    pub ul_omega_total: f64,
    /// Per bin, target present.
    pub radar_omega_total: Vec<f64>,
    /// Per bin, target absent.
    pub radar_omega_h0_total: Vec<f64>,
}

impl ModeVariances {
    pub fn evaluate(config: &ScenarioConfig, pathloss: &PathlossSet, stats: &WaveformStats) -> Result<Self> {
        let noise = config.noise_total_variance();
        let dl_zeta_total = (0..config.k_d).map(|k| dl_interference_variance(config, pathloss, k)).collect::<Result<_>>()?;
        let bins = pathloss.bins.len();
        let radar = |q| (0..bins).map(|t| radar_residual_variance(config, pathloss, stats, t, q)).collect::<Result<Vec<_>>>();
        Ok(Self {
            mode: config.mode(),
            dl_zeta_total,
            ul_omega_total: ul_residual_variance(config, pathloss, stats)? + noise,
            radar_omega_total: radar(true)?,
            radar_omega_h0_total: radar(false)?,
        })
    }
}
