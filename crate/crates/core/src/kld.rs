//! Closed-form and empirical Kullback-Leibler divergences, in bits.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::channel::ModeVariances;
use crate::error::{Error, Result};
use crate::radar::RadarWaveform;
use crate::scenario::{Deployment, Mode, PathlossSet, ScenarioConfig, UlInverseMode};

const LN2: f64 = std::f64::consts::LN_2;

/// KLD between two real Gaussians `N(mu_m, sigma_m)` and `N(mu_n, sigma_n)`.
pub fn kld_gaussian(
    mu_m: &DVector<f64>,
    mu_n: &DVector<f64>,
    sigma_m: &DMatrix<f64>,
    sigma_n: &DMatrix<f64>,
) -> Result<f64> {
    let dim = mu_m.len();
    if mu_n.len() != dim || sigma_m.shape() != (dim, dim) || sigma_n.shape() != (dim, dim) {
        return Err(Error::Domain("Gaussian KLD inputs have mismatched dimensions".into()));
    }
    let pd = |s: &DMatrix<f64>| {
        let sym = (s - s.transpose()).abs().max() <= 1e-12 * s.abs().max().max(1e-300);
        if !sym {
            return Err(Error::Domain("covariance is not symmetric".into()));
        }
        s.clone().cholesky().ok_or_else(|| Error::Domain("covariance is not positive definite".into()))
    };
    let chol_m = pd(sigma_m)?;
    let chol_n = pd(sigma_n)?;
    let ln_det = |c: &nalgebra::Cholesky<f64, nalgebra::Dyn>| 2.0 * c.l_dirty().diagonal().iter().map(|x| x.ln()).sum::<f64>();
    let diff = mu_n - mu_m;
    let trace = chol_n.solve(sigma_m).trace();
    let quad = diff.dot(&chol_n.solve(&diff));
    Ok((trace - dim as f64 + quad + ln_det(&chol_n) - ln_det(&chol_m)) / (2.0 * LN2))
}

/// Constellation factor `sum_{n != m} (1 - cos(phi_n - phi_m))`.
pub fn constellation_lambda(phases: &[f64]) -> f64 {
    let mut sum = 0.0;
    for (i, a) in phases.iter().enumerate() {
        for (j, b) in phases.iter().enumerate() {
            if i != j {
                sum += 1.0 - (a - b).cos();
            }
        }
    }
    sum
}

/// `lambda / (M_d (M_d - 1))`, the mean pairwise factor; zero for one point.
fn pair_factor(phases: &[f64]) -> f64 {
    let md = phases.len() as f64;
    if phases.len() < 2 {
        0.0
    } else {
        constellation_lambda(phases) / (md * (md - 1.0))
    }
}

fn check_mode(config: &ScenarioConfig, pathloss: &PathlossSet) -> Result<()> {
    if config.mode() != pathloss.mode {
        return Err(Error::Contract(format!("config mode {} but pathloss built for {}", config.mode(), pathloss.mode)));
    }
    Ok(())
}

fn phases(config: &ScenarioConfig) -> Vec<f64> {
    crate::comm::Constellation::new(config.constellation()).phases
}

/// Average KLD between DL symbol hypotheses at user `k`.
pub fn kld_dl(config: &ScenarioConfig, pathloss: &PathlossSet, k: usize, dl_variance_total: f64) -> Result<f64> {
    check_mode(config, pathloss)?;
    let channel_var = match config.deployment {
        Deployment::Separated => config.h_var,
        Deployment::Shared => config.h_var + config.f_var,
    };
    let alpha_sq = (config.m_comm() + 1 - config.k_d) as f64 * channel_var;
    let gain = config.dl_user_power() * alpha_sq * pathloss.effective_dl_gain(k);
    Ok(pair_factor(&phases(config)) * gain / (0.5 * dl_variance_total * LN2))
}

/// Average KLD between UL symbol hypotheses of user `k` after ZF combining.
///
/// `inverse_diag` is the realized `[(B^H B)^-1]_kk`, used when the
/// configuration asks for per-draw evaluation.
pub fn kld_ul(
    config: &ScenarioConfig,
    pathloss: &PathlossSet,
    k: usize,
    ul_variance_total: f64,
    inverse_diag: Option<f64>,
) -> Result<f64> {
    check_mode(config, pathloss)?;
    let m = config.m_comm();
    if m <= config.k_u + 1 {
        return Err(Error::Contract(format!("UL mean inverse needs M_eff > K_U + 1, got {m} and {}", config.k_u)));
    }
    let snr_gain = match (config.ul_inverse_mode, inverse_diag) {
        (UlInverseMode::Mean, _) => pathloss.effective_ul_gain(k) * config.h_var * (m - config.k_u) as f64,
        (UlInverseMode::PerDraw, Some(d)) => 1.0 / d,
        (UlInverseMode::PerDraw, None) => return Err(Error::Contract("per-draw UL KLD needs the realized inverse".into())),
    };
    Ok(pair_factor(&phases(config)) * config.ul_user_power() * snr_gain / (0.5 * ul_variance_total * LN2))
}

/// KLD between target-present and target-absent radar observations in bin `t`.
pub fn kld_radar(
    pathloss: &PathlossSet,
    waveform: &RadarWaveform,
    t: usize,
    alpha: Complex64,
    radar_variance_total: f64,
) -> Result<f64> {
    let tr = waveform.tr_rt(t);
    if !(tr > 0.0) {
        return Err(Error::Domain(format!("bin {t} has zero beam covariance")));
    }
    let gain = waveform.beam_gain(&pathloss.bins[t].g, t).norm_sqr();
    Ok(alpha.norm_sqr() * waveform.p_r_alloc[t] * gain
        / (4.0 * 0.5 * radar_variance_total * waveform.m_star() as f64 * tr * LN2))
}

/// User-weighted comm total `(K_D/K) sum dl + (K_U/K) sum ul`.
pub fn kld_comm_total(dl: &[f64], ul: &[f64], k_d: usize, k_u: usize) -> Result<f64> {
    if dl.len() != k_d || ul.len() != k_u {
        return Err(Error::Contract(format!("{} DL and {} UL values for K_D = {k_d}, K_U = {k_u}", dl.len(), ul.len())));
    }
    let k = (k_d + k_u) as f64;
    Ok(k_d as f64 / k * dl.iter().sum::<f64>() + k_u as f64 / k * ul.iter().sum::<f64>())
}

/// Closed-form KLDs of one mode and geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct KldReport {
    pub mode: Mode,
    pub kld_dl: Vec<f64>,
    pub kld_ul: Vec<f64>,
    pub kld_radar: Vec<f64>,
    pub kld_comm_total: f64,
}

impl KldReport {
    pub fn closed_form(
        config: &ScenarioConfig,
        pathloss: &PathlossSet,
        waveform: &RadarWaveform,
        variances: &ModeVariances,
        alphas: &[Complex64],
        inverse_diag: Option<&[f64]>,
    ) -> Result<Self> {
        let kld_dl: Vec<f64> =
            (0..config.k_d).map(|k| kld_dl(config, pathloss, k, variances.dl_zeta_total[k])).collect::<Result<_>>()?;
        let kld_ul: Vec<f64> = (0..config.k_u)
            .map(|k| kld_ul(config, pathloss, k, variances.ul_omega_total, inverse_diag.map(|d| d[k])))
            .collect::<Result<_>>()?;
        let kld_radar = (0..pathloss.bins.len())
            .map(|t| kld_radar(pathloss, waveform, t, alphas[t], variances.radar_omega_total[t]))
            .collect::<Result<_>>()?;
        let kld_comm_total = kld_comm_total(&kld_dl, &kld_ul, config.k_d, config.k_u)?;
        Ok(Self { mode: config.mode(), kld_dl, kld_ul, kld_radar, kld_comm_total })
    }
}

/// Running per-symbol moments of one user's received symbol cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolCloud {
    count: Vec<u64>,
    sum: Vec<[f64; 2]>,
    /// `[xx, xy, yy]` second moments.
    sum_sq: Vec<[f64; 3]>,
}

impl SymbolCloud {
    pub fn new(order: usize) -> Self {
        Self { count: vec![0; order], sum: vec![[0.0; 2]; order], sum_sq: vec![[0.0; 3]; order] }
    }

    pub fn push(&mut self, symbol: usize, y: Complex64) {
        self.count[symbol] += 1;
        self.sum[symbol][0] += y.re;
        self.sum[symbol][1] += y.im;
        self.sum_sq[symbol][0] += y.re * y.re;
        self.sum_sq[symbol][1] += y.re * y.im;
        self.sum_sq[symbol][2] += y.im * y.im;
    }

    pub fn merge(&mut self, other: &SymbolCloud) {
        for n in 0..self.count.len() {
            self.count[n] += other.count[n];
            for i in 0..2 {
                self.sum[n][i] += other.sum[n][i];
            }
            for i in 0..3 {
                self.sum_sq[n][i] += other.sum_sq[n][i];
            }
        }
    }

    pub fn len(&self) -> u64 {
        self.count.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn mean(&self, symbol: usize) -> DVector<f64> {
        let c = self.count[symbol] as f64;
        DVector::from_vec(vec![self.sum[symbol][0] / c, self.sum[symbol][1] / c])
    }

    /// Within-symbol covariance pooled over all symbols.
    pub fn pooled_covariance(&self) -> DMatrix<f64> {
        let mut acc = [0.0; 3];
        for n in 0..self.count.len() {
            let c = self.count[n] as f64;
            if c == 0.0 {
                continue;
            }
            let [sx, sy] = self.sum[n];
            acc[0] += self.sum_sq[n][0] - sx * sx / c;
            acc[1] += self.sum_sq[n][1] - sx * sy / c;
            acc[2] += self.sum_sq[n][2] - sy * sy / c;
        }
        let dof = self.len() as f64 - self.count.len() as f64;
        DMatrix::from_row_slice(2, 2, &[acc[0] / dof, acc[1] / dof, acc[1] / dof, acc[2] / dof])
    }

    /// Mean Gaussian KLD over ordered symbol pairs, using per-symbol means
    /// and the pooled covariance.
    pub fn empirical_kld(&self) -> Result<f64> {
        self.empirical_kld_shifted(&vec![Complex64::new(0.0, 0.0); self.count.len()])
    }

    /// As [`Self::empirical_kld`] with `shift[n]` added to the mean of symbol `n`.
    pub fn empirical_kld_shifted(&self, shift: &[Complex64]) -> Result<f64> {
        let order = self.count.len();
        if shift.len() != order {
            return Err(Error::Contract(format!("{} shifts for {order} symbols", shift.len())));
        }
        if self.count.iter().any(|&c| c == 0) || self.len() <= order as u64 {
            return Err(Error::Domain("symbol cloud has too few samples".into()));
        }
        let cov = self.pooled_covariance();
        let means: Vec<DVector<f64>> = (0..order)
            .map(|n| self.mean(n) + DVector::from_vec(vec![shift[n].re, shift[n].im]))
            .collect();
        let mut sum = 0.0;
        for m in 0..order {
            for n in 0..order {
                if m != n {
                    sum += kld_gaussian(&means[m], &means[n], &cov, &cov)?;
                }
            }
        }
        Ok(sum / (order * (order - 1)) as f64)
    }
}
