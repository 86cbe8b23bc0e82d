//! Radar waveforms, per-bin echo synthesis and GLRT detection.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use crate::channel::{masked_apply, RadarErrors, WaveformStats};
use crate::error::{Error, Result};
use crate::numerics::{complex_normal, marcum_q1};
use crate::scenario::{AlphaModel, Deployment, Duplex, PathlossSet, RadarPrecoderDesign, ScenarioConfig};

/// `T x L` matrix with orthonormal rows: the first `T` rows of the unitary
/// `L`-point DFT.
pub fn make_orthonormal_waveforms(t: usize, l: usize) -> Result<DMatrix<Complex64>> {
    if t > l || t == 0 {
        return Err(Error::Domain(format!("cannot build {t} orthonormal waveforms of length {l}")));
    }
    let scale = 1.0 / (l as f64).sqrt();
    Ok(DMatrix::from_fn(t, l, |r, c| {
        let phase = -2.0 * std::f64::consts::PI * ((r * c) % l) as f64 / l as f64;
        Complex64::from_polar(scale, phase)
    }))
}

/// Per-snapshot beam matrices `W_l` (`M* x T`, column `t` is beam `t`).
///
/// The rotation design gives beam `t` at snapshot `l` the DFT frequency
/// `l T + t` out of `L T`, scaled by `1/sqrt(T)`. The `L T` beams then
/// average to an exact identity covariance whenever `M* <= L T`, and each
/// beam alone averages to `I / T` whenever `M* <= L`.
pub fn make_radar_precoder<R: Rng + ?Sized>(
    m_star: usize,
    t: usize,
    l: usize,
    design: RadarPrecoderDesign,
    rng: &mut R,
) -> Vec<DMatrix<Complex64>> {
    let scale = 1.0 / (t as f64).sqrt();
    let n = (l * t) as f64;
    (0..l)
        .map(|li| match design {
            RadarPrecoderDesign::Rotation => DMatrix::from_fn(m_star, t, |m, ti| {
                let k = (li * t + ti) as f64;
                let phase = 2.0 * std::f64::consts::PI * ((m as f64 * k) % n) / n;
                Complex64::from_polar(scale, phase)
            }),
            RadarPrecoderDesign::Random => DMatrix::from_fn(m_star, t, |_, _| complex_normal(rng, 1.0 / t as f64)),
        })
        .collect()
}

/// Radar transmit design shared by all trials of a geometry.
#[derive(Debug, Clone)]
pub struct RadarWaveform {
    pub phi: DMatrix<Complex64>,
    pub beams: Vec<DMatrix<Complex64>>,
    /// Power scaling of each beam; beam `t` radiates `P_r,t tr(R_t) / M*`.
    pub p_r_alloc: Vec<f64>,
    /// Unit-power transmit vector per snapshot, `W_l sqrt(L) Phi[:, l]`.
    pub x: Vec<DVector<Complex64>>,
    pub r_t: Vec<DMatrix<Complex64>>,
    pub r_w: DMatrix<Complex64>,
    pub r_x: DMatrix<Complex64>,
}

impl RadarWaveform {
    pub fn new<R: Rng + ?Sized>(config: &ScenarioConfig, rng: &mut R) -> Result<Self> {
        Self::with_sizes(config.m_radar(), config.t, config.l, config.p_r, config.radar_precoder, rng)
    }

    pub fn with_sizes<R: Rng + ?Sized>(
        m_star: usize,
        t: usize,
        l: usize,
        p_r: f64,
        design: RadarPrecoderDesign,
        rng: &mut R,
    ) -> Result<Self> {
        let phi = make_orthonormal_waveforms(t, l)?;
        let beams = make_radar_precoder(m_star, t, l, design, rng);
        let lf = l as f64;
        let r_t: Vec<DMatrix<Complex64>> = (0..t)
            .map(|ti| {
                let mut acc = DMatrix::zeros(m_star, m_star);
                for w in &beams {
                    let col = w.column(ti);
                    acc += &col * col.adjoint();
                }
                acc / Complex64::from(lf)
            })
            .collect();
        let r_w = r_t.iter().fold(DMatrix::zeros(m_star, m_star), |a, b| a + b);
        let sqrt_l = lf.sqrt();
        let x: Vec<DVector<Complex64>> = beams
            .iter()
            .enumerate()
            .map(|(li, w)| w * phi.column(li).map(|z| z * sqrt_l))
            .collect();
        let mut r_x = DMatrix::zeros(m_star, m_star);
        for xl in &x {
            r_x += xl * xl.adjoint();
        }
        r_x /= Complex64::from(lf);
        Ok(Self { phi, beams, p_r_alloc: vec![p_r; t], x, r_t, r_w, r_x })
    }

    pub fn m_star(&self) -> usize {
        self.r_w.nrows()
    }

    pub fn l(&self) -> usize {
        self.beams.len()
    }

    pub fn tr_rt(&self, t: usize) -> f64 {
        self.r_t[t].trace().re
    }

    pub fn tr_rx(&self) -> f64 {
        self.r_x.trace().re
    }

    /// Total radiated radar power `sum_t P_r,t tr(R_t) / M*`.
    pub fn total_power(&self) -> f64 {
        let m = self.m_star() as f64;
        (0..self.r_t.len()).map(|t| self.p_r_alloc[t] * self.tr_rt(t) / m).sum()
    }

    /// Radiated vector at snapshot `l` for total radar power `p_r`.
    pub fn transmit(&self, l: usize, p_r: f64) -> DVector<Complex64> {
        let scale = (p_r / self.m_star() as f64).sqrt();
        self.x[l].map(|z| z * scale)
    }

    /// Beam `t` at snapshot `l`.
    pub fn beam(&self, t: usize, l: usize) -> DVector<Complex64> {
        self.beams[l].column(t).into_owned()
    }

    /// `g^H R_t g` for bin `t`.
    pub fn beam_gain(&self, g: &DVector<Complex64>, t: usize) -> Complex64 {
        (g.adjoint() * &self.r_t[t] * g)[(0, 0)]
    }
}

/// Draw the target reflection coefficient for one trial.
pub fn draw_alpha<R: Rng + ?Sized>(model: AlphaModel, rng: &mut R) -> Complex64 {
    match model {
        AlphaModel::UnitPhase => Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * rng.gen::<f64>()),
        AlphaModel::Fixed => Complex64::new(1.0, 0.0),
        AlphaModel::Rayleigh => complex_normal(rng, 1.0),
    }
}

/// Comm quantities that leak into the radar receivers during one snapshot.
#[derive(Debug, Clone)]
pub struct RadarCommInputs {
    /// DL transmit vector over the comm APs.
    pub dl_tx: DVector<Complex64>,
    /// Unit-modulus UL symbols.
    pub ul_symbols: Vec<Complex64>,
}

/// Observation and its interference-plus-noise part, `M* x L`.
#[derive(Debug, Clone)]
pub struct RadarFrame {
    pub observation: DMatrix<Complex64>,
    pub residual: DMatrix<Complex64>,
}

/// Residual radar column for one snapshot, before noise.
pub fn synthesize_radar_residual(
    config: &ScenarioConfig,
    pathloss: &PathlossSet,
    waveform: &RadarWaveform,
    errors: &RadarErrors,
    t: usize,
    q: bool,
    l: usize,
    comm: &RadarCommInputs,
) -> Result<DVector<Complex64>> {
    let p_u = config.ul_user_power();
    // UL users leak into every mode's radar receivers.
    let ul_src = DVector::from_iterator(comm.ul_symbols.len(), comm.ul_symbols.iter().map(|u| u * p_u.sqrt()));
    let mut out = masked_apply(&pathloss.d_ru_ul.transpose(), &errors.err_ul, &ul_src);
    let missing = |what: &str| Error::Contract(format!("{} radar residual needs {what}", config.mode()));
    let radar_tx = || waveform.transmit(l, config.p_r);
    match (config.deployment, config.duplex) {
        (Deployment::Separated, Duplex::Hd) => {}
        (Deployment::Separated, Duplex::Fd) => {
            let e_comm = errors.err_comm.as_ref().ok_or_else(|| missing("comm error"))?;
            let e_si = errors.err_si.as_ref().ok_or_else(|| missing("SI error"))?;
            out += masked_apply(&pathloss.d_rc.transpose(), e_comm, &comm.dl_tx);
            out += e_si * radar_tx() * Complex64::from(config.beta_r);
        }
        (Deployment::Shared, Duplex::Hd) => {
            if q {
                let e_comm = errors.err_comm.as_ref().ok_or_else(|| missing("comm error"))?;
                let d = &pathloss.bins[t].d_r;
                out += masked_apply(&(d * d.transpose()), e_comm, &comm.dl_tx);
            }
        }
        (Deployment::Shared, Duplex::Fd) => {
            let e_cl = errors.err_clutter.as_ref().ok_or_else(|| missing("clutter error"))?;
            let e_si = errors.err_si.as_ref().ok_or_else(|| missing("SI error"))?;
            let tx = &comm.dl_tx + radar_tx();
            out += masked_apply(&pathloss.clutter_matrix(t, config.clutter_distance), e_cl, &tx);
            out += e_si * tx * Complex64::from(config.beta_r);
        }
    }
    Ok(out)
}

/// One `M* x L` frame for bin `t` under hypothesis `q`.
///
/// `errors` is called once per snapshot and must return fresh draws;
/// `comm` supplies the comm leakage inputs per snapshot.
#[allow(clippy::too_many_arguments)]
pub fn synthesize_radar_snapshots<R: Rng + ?Sized>(
    config: &ScenarioConfig,
    pathloss: &PathlossSet,
    waveform: &RadarWaveform,
    t: usize,
    q: bool,
    alpha: Complex64,
    comm: &[RadarCommInputs],
    mut errors: impl FnMut(&mut R) -> Result<RadarErrors>,
    rng: &mut R,
) -> Result<RadarFrame> {
    let m_star = waveform.m_star();
    let l = waveform.l();
    if comm.len() != l {
        return Err(Error::Contract(format!("radar frame needs {l} comm snapshots, got {}", comm.len())));
    }
    let noise = config.noise_total_variance();
    let g = &pathloss.bins[t].g;
    let amp = alpha * (waveform.p_r_alloc[t] / m_star as f64).sqrt();
    let mut observation = DMatrix::zeros(m_star, l);
    let mut residual = DMatrix::zeros(m_star, l);
    for li in 0..l {
        let e = errors(rng)?;
        let mut col = synthesize_radar_residual(config, pathloss, waveform, &e, t, q, li, &comm[li])?;
        for z in col.iter_mut() {
            *z += complex_normal(rng, noise);
        }
        residual.set_column(li, &col);
        if q {
            let w = waveform.beams[li].column(t);
            let echo = g * (g.adjoint() * w)[(0, 0)] * amp;
            col += echo;
        }
        observation.set_column(li, &col);
    }
    Ok(RadarFrame { observation, residual })
}

/// Matched-filter output `z = (1/L) sum_l w_{t,l}^H y_l`.
pub fn matched_filter(observation: &DMatrix<Complex64>, waveform: &RadarWaveform, t: usize) -> Complex64 {
    let l = observation.ncols();
    let mut z = Complex64::new(0.0, 0.0);
    for li in 0..l {
        z += waveform.beams[li].column(t).dotc(&observation.column(li));
    }
    z / l as f64
}

/// Test statistic `2|z|^2 / Var(z)`, central chi-squared with two degrees of
/// freedom when the observation is pure residual of the given total variance.
pub fn glrt_statistic(
    observation: &DMatrix<Complex64>,
    waveform: &RadarWaveform,
    t: usize,
    residual_total_variance: f64,
) -> Result<f64> {
    if !(residual_total_variance > 0.0) {
        return Err(Error::Domain(format!("residual variance must be positive, got {residual_total_variance}")));
    }
    let l = observation.ncols() as f64;
    let z = matched_filter(observation, waveform, t);
    let var = residual_total_variance * waveform.tr_rt(t) / l;
    Ok(2.0 * z.norm_sqr() / var)
}

/// Least-squares reflection estimate `d^H e / ||d||^2` from the frame, with
/// `d` the stacked noiseless echo per unit reflection.
pub fn estimate_alpha(observation: &DMatrix<Complex64>, pathloss: &PathlossSet, waveform: &RadarWaveform, t: usize) -> Complex64 {
    let g = &pathloss.bins[t].g;
    let amp = (waveform.p_r_alloc[t] / waveform.m_star() as f64).sqrt();
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    for li in 0..observation.ncols() {
        let w = waveform.beams[li].column(t);
        let d = g * (g.adjoint() * w)[(0, 0)] * Complex64::from(amp);
        num += d.dotc(&observation.column(li));
        den += d.norm_squared();
    }
    num / den
}

/// Threshold `-2 ln(P_FA)` giving the requested false-alarm rate.
pub fn detection_threshold(pfa: f64) -> Result<f64> {
    if !(pfa > 0.0 && pfa < 1.0) {
        return Err(Error::Domain(format!("false-alarm probability {pfa} outside (0, 1)")));
    }
    Ok(-2.0 * pfa.ln())
}

/// Noncentrality of the statistic under target presence:
/// `L |alpha|^2 P_r,t |g^H R_t g|^2 / (sigma^2 M* tr(R_t))` with `sigma^2`
/// half the total residual variance.
pub fn noncentrality(
    pathloss: &PathlossSet,
    waveform: &RadarWaveform,
    t: usize,
    alpha: Complex64,
    residual_total_variance: f64,
) -> f64 {
    let g = &pathloss.bins[t].g;
    let gain = waveform.beam_gain(g, t).norm_sqr();
    let l = waveform.l() as f64;
    l * alpha.norm_sqr() * waveform.p_r_alloc[t] * gain
        / (0.5 * residual_total_variance * waveform.m_star() as f64 * waveform.tr_rt(t))
}

/// `Q1(sqrt(lambda), sqrt(tau))`.
pub fn detection_probability_analytic(lambda: f64, tau: f64) -> Result<f64> {
    marcum_q1(lambda.max(0.0).sqrt(), tau.max(0.0).sqrt())
}

/// Detection outcome for one bin and one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionOutcome {
    pub xi: f64,
    pub tau: f64,
    pub decided: bool,
    pub lambda_analytic: f64,
    pub pd_analytic: f64,
}

impl DetectionOutcome {
    pub fn new(xi: f64, tau: f64, lambda_analytic: f64) -> Result<Self> {
        Ok(Self { xi, tau, decided: xi > tau, lambda_analytic, pd_analytic: detection_probability_analytic(lambda_analytic, tau)? })
    }
}

/// Detection probability when the detector normalizes by the target-absent
/// variance `v0` but the target-present residual has variance `v1`.
pub fn detection_probability_mismatched(lambda_v1: f64, tau: f64, v0: f64, v1: f64) -> Result<f64> {
    detection_probability_analytic(lambda_v1, tau * v0 / v1)
}

/// Per-bin waveform statistics needed by the closed forms.
pub fn waveform_stats(config: &ScenarioConfig, waveform: &RadarWaveform) -> WaveformStats {
    WaveformStats::new(config, waveform.tr_rx())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::RngStream;

    #[test]
    fn thresholds() {
        assert!((detection_threshold(1e-4).unwrap() - 18.420_680_743_952_367).abs() < 1e-12);
        assert!((detection_threshold((-1.0f64).exp()).unwrap() - 2.0).abs() < 1e-12);
        assert!((detection_threshold(0.5).unwrap() - 1.386_294_361_119_890_6).abs() < 1e-12);
        assert!(detection_threshold(1.0).is_err());
    }

    #[test]
    fn waveform_gram_is_identity() {
        let phi = make_orthonormal_waveforms(3, 100).unwrap();
        let gram = &phi * phi.adjoint();
        assert!((gram - DMatrix::identity(3, 3)).norm() < 1e-12);
        let one = make_orthonormal_waveforms(1, 4).unwrap();
        assert!((one.row(0).norm() - 1.0).abs() < 1e-15);
        assert!(make_orthonormal_waveforms(5, 4).is_err());
    }

    #[test]
    fn rotation_design_properties() {
        let mut rng = RngStream::new(0, 0).rng();
        let wf = RadarWaveform::with_sizes(20, 3, 100, 0.1, RadarPrecoderDesign::Rotation, &mut rng).unwrap();
        assert!((&wf.r_w - DMatrix::identity(20, 20)).norm() < 1e-10);
        for t in 0..3 {
            let direct: f64 = wf.beams.iter().map(|w| w.column(t).norm_squared()).sum::<f64>() / 100.0;
            assert!((wf.tr_rt(t) - direct).abs() < 1e-12);
        }
        assert!((wf.total_power() - 0.1).abs() < 1e-10);
        for m in 0..20 {
            assert!((wf.r_x[(m, m)].re - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_observation_gives_zero() {
        let mut rng = RngStream::new(0, 0).rng();
        let wf = RadarWaveform::with_sizes(4, 2, 8, 0.1, RadarPrecoderDesign::Rotation, &mut rng).unwrap();
        let y = DMatrix::zeros(4, 8);
        assert_eq!(glrt_statistic(&y, &wf, 0, 1.0).unwrap(), 0.0);
        assert!(glrt_statistic(&y, &wf, 0, 0.0).is_err());
    }
}
