//! ZF precoding and combining, DL/UL signal synthesis and symbol detection.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use crate::channel::{masked_apply, CommChannels};
use crate::error::{Error, Result};
use crate::numerics::complex_normal;
use crate::scenario::{ConstellationKind, Deployment, Duplex, PathlossSet, ScenarioConfig};

/// Largest condition number a ZF channel may have.
pub const MAX_CONDITION: f64 = 1e12;

/// Unit-energy PSK alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    pub kind: ConstellationKind,
    pub phases: Vec<f64>,
    points: Vec<Complex64>,
}

impl Constellation {
    pub fn new(kind: ConstellationKind) -> Self {
        let order = match kind {
            ConstellationKind::Bpsk => 2,
            ConstellationKind::Qpsk => 4,
            ConstellationKind::Psk8 => 8,
        };
        let phases: Vec<f64> = (0..order).map(|n| 2.0 * std::f64::consts::PI * n as f64 / order as f64).collect();
        // Snap rounding residue so axis points are exact.
        let snap = |x: f64| if x.abs() < 1e-15 { 0.0 } else { x };
        let points = phases.iter().map(|&p| Complex64::new(snap(p.cos()), snap(p.sin()))).collect();
        Self { kind, phases, points }
    }

    pub fn order(&self) -> usize {
        self.points.len()
    }

    pub fn point(&self, index: usize) -> Complex64 {
        self.points[index]
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn draw<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<usize> {
        (0..n).map(|_| rng.gen_range(0..self.order())).collect()
    }
}

/// `sigma_max / sigma_min` of `h`.
pub fn condition_number(h: &DMatrix<Complex64>) -> f64 {
    let sv = h.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

fn check_condition(h: &DMatrix<Complex64>) -> Result<()> {
    let cond = condition_number(h);
    if cond > MAX_CONDITION || !cond.is_finite() {
        return Err(Error::SingularChannel(cond));
    }
    Ok(())
}

fn hermitian_inverse(gram: DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    gram.cholesky().map(|c| c.inverse()).ok_or(Error::SingularChannel(f64::INFINITY))
}

/// Non-normalized ZF precoder `W = H^H (H H^H)^-1` and its normalization
/// for one symbol vector.
#[derive(Debug, Clone)]
pub struct PrecoderState {
    pub w_tilde: DMatrix<Complex64>,
    pub alpha_zf: f64,
    /// `E[alpha^2]` for unit-variance fading, `M_eff - K_D + 1`.
    pub alpha_zf_sq_mean: f64,
}

impl PrecoderState {
    pub fn new(h: &DMatrix<Complex64>, s: &DVector<Complex64>) -> Result<Self> {
        let (k, m) = h.shape();
        if k > m {
            return Err(Error::Contract(format!("ZF precoder needs K_D <= M_eff, got {k} > {m}")));
        }
        if s.len() != k {
            return Err(Error::Contract(format!("{} symbols for {k} users", s.len())));
        }
        check_condition(h)?;
        let w_tilde = h.adjoint() * hermitian_inverse(h * h.adjoint())?;
        let alpha_zf = 1.0 / (&w_tilde * s).norm();
        Ok(Self { w_tilde, alpha_zf, alpha_zf_sq_mean: (m - k + 1) as f64 })
    }
}

/// Unit-power ZF precoded vector `alpha H^H (H H^H)^-1 s` and `alpha`.
pub fn zf_precoder(h: &DMatrix<Complex64>, s: &DVector<Complex64>) -> Result<(DVector<Complex64>, f64)> {
    let st = PrecoderState::new(h, s)?;
    Ok((&st.w_tilde * s * Complex64::from(st.alpha_zf), st.alpha_zf))
}

/// ZF combiner `(H^H H)^-1 H^H` and the diagonal of `(H^H H)^-1`.
pub fn zf_combiner_parts(h: &DMatrix<Complex64>) -> Result<(DMatrix<Complex64>, Vec<f64>)> {
    let (m, k) = h.shape();
    if k > m {
        return Err(Error::Contract(format!("ZF combiner needs K_U <= M_eff, got {k} > {m}")));
    }
    check_condition(h)?;
    let inv = hermitian_inverse(h.adjoint() * h)?;
    let diag = (0..k).map(|i| inv[(i, i)].re).collect();
    Ok((inv * h.adjoint(), diag))
}

pub fn zf_combiner(h: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    Ok(zf_combiner_parts(h)?.0)
}

/// DL transmit vector with total power `P_c` and per-user effective gains.
#[derive(Debug, Clone)]
pub struct DlTransmit {
    pub tx: DVector<Complex64>,
    pub alpha_zf: f64,
    /// Received amplitude of each user's own symbol, `alpha sqrt(P_k)`.
    pub gains: Vec<f64>,
}

/// Precode the DL symbols over the effective channel `D_c .* Z`.
pub fn dl_transmit(config: &ScenarioConfig, effective: &DMatrix<Complex64>, symbols: &[Complex64]) -> Result<DlTransmit> {
    let p_k = config.dl_user_power();
    let u = DVector::from_iterator(symbols.len(), symbols.iter().map(|s| s * (p_k / config.p_c).sqrt()));
    let (out, alpha_zf) = zf_precoder(effective, &u)?;
    let tx = out * Complex64::from(config.p_c.sqrt());
    Ok(DlTransmit { tx, alpha_zf, gains: vec![alpha_zf * p_k.sqrt(); symbols.len()] })
}

/// Received DL vector and its interference-plus-noise part.
#[derive(Debug, Clone)]
pub struct DlReceived {
    pub received: DVector<Complex64>,
    pub interference: DVector<Complex64>,
}

/// DL observation at the users: desired precoded signal, radar leakage,
/// UL-user interference in FD, and noise.
#[allow(clippy::too_many_arguments)]
pub fn synthesize_dl<R: Rng + ?Sized>(
    config: &ScenarioConfig,
    pathloss: &PathlossSet,
    channels: &CommChannels,
    effective: &DMatrix<Complex64>,
    dl: &DlTransmit,
    radar_tx: &DVector<Complex64>,
    ul_symbols: Option<&[Complex64]>,
    rng: &mut R,
) -> Result<DlReceived> {
    let missing = |what: &str| Error::Contract(format!("{} DL needs {what}", config.mode()));
    let desired = effective * &dl.tx;
    let mut interference = match config.deployment {
        Deployment::Separated => {
            let f = channels.f_dl.as_ref().ok_or_else(|| missing("the radar interference channel"))?;
            f.zip_map(&pathloss.d_ru, |h, d| h * d) * radar_tx
        }
        Deployment::Shared => effective * radar_tx,
    };
    if config.duplex == Duplex::Fd {
        let h_uu = channels.h_uu.as_ref().ok_or_else(|| missing("the UE-to-UE channel"))?;
        let u = ul_symbols.ok_or_else(|| missing("UL symbols"))?;
        let p = config.ul_user_power().sqrt();
        let src = DVector::from_iterator(u.len(), u.iter().map(|s| s * p));
        interference += h_uu.zip_map(&pathloss.d_u, |h, d| h * d) * src;
    }
    let noise = config.noise_total_variance();
    for z in interference.iter_mut() {
        *z += complex_normal(rng, noise);
    }
    Ok(DlReceived { received: desired + &interference, interference })
}

/// UL observation after cancellation.
#[derive(Debug, Clone)]
pub struct UlReceived {
    pub received: DVector<Complex64>,
    /// Cancellation residual, without noise.
    pub residual: DVector<Complex64>,
}

/// UL observation at the comm APs: desired users, the residual left by
/// imperfect cancellation of backscatter and self-interference, and noise.
#[allow(clippy::too_many_arguments)]
pub fn synthesize_ul_post_ic<R: Rng + ?Sized>(
    config: &ScenarioConfig,
    pathloss: &PathlossSet,
    channels: &CommChannels,
    ul_effective: &DMatrix<Complex64>,
    ul_symbols: &[Complex64],
    dl_tx: &DVector<Complex64>,
    radar_tx: &DVector<Complex64>,
    rng: &mut R,
) -> Result<UlReceived> {
    let p = config.ul_user_power().sqrt();
    let src = DVector::from_iterator(ul_symbols.len(), ul_symbols.iter().map(|s| s * p));
    let desired = ul_effective * src;
    let tx = match config.deployment {
        Deployment::Separated => None,
        Deployment::Shared => Some(dl_tx + radar_tx),
    };
    let mut residual = masked_apply(&pathloss.d_rc, &channels.err_ul_backscatter, tx.as_ref().unwrap_or(radar_tx));
    if config.duplex == Duplex::Fd {
        let e_si = channels
            .err_ul_si
            .as_ref()
            .ok_or_else(|| Error::Contract(format!("{} UL needs the SI error", config.mode())))?;
        residual += e_si * tx.as_ref().unwrap_or(dl_tx) * Complex64::from(config.beta_ap);
    }
    let noise = config.noise_total_variance();
    let mut received = desired + &residual;
    for z in received.iter_mut() {
        *z += complex_normal(rng, noise);
    }
    Ok(UlReceived { received, residual })
}

/// Nearest constellation point per entry; ties go to the lower index.
pub fn detect_symbols(values: &[Complex64], constellation: &Constellation) -> Vec<usize> {
    values
        .iter()
        .map(|y| {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (i, p) in constellation.points().iter().enumerate() {
                let d = (y - p).norm_sqr();
                if d < best_d {
                    best = i;
                    best_d = d;
                }
            }
            best
        })
        .collect()
}

/// Fraction of mismatched indices.
pub fn measure_ser(tx: &[usize], rx: &[usize]) -> Result<f64> {
    if tx.len() != rx.len() {
        return Err(Error::Contract(format!("SER over {} sent and {} detected symbols", tx.len(), rx.len())));
    }
    if tx.is_empty() {
        return Ok(0.0);
    }
    let errors = tx.iter().zip(rx).filter(|(a, b)| a != b).count();
    Ok(errors as f64 / tx.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_channel_precoder() {
        let h = DMatrix::<Complex64>::identity(2, 2);
        let s = DVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)]);
        let (x, a) = zf_precoder(&h, &s).unwrap();
        assert!((a - 1.0 / 2f64.sqrt()).abs() < 1e-14);
        assert!((x - &s / Complex64::from(2f64.sqrt())).norm() < 1e-14);
    }

    #[test]
    fn singular_channel_rejected() {
        let h = DMatrix::from_element(2, 4, Complex64::new(1.0, 0.0));
        let s = DVector::from_element(2, Complex64::new(1.0, 0.0));
        assert!(matches!(zf_precoder(&h, &s), Err(Error::SingularChannel(_))));
        assert!(matches!(zf_combiner(&h.transpose()), Err(Error::SingularChannel(_))));
    }

    #[test]
    fn detection_rules() {
        let bpsk = Constellation::new(ConstellationKind::Bpsk);
        assert_eq!(detect_symbols(&[Complex64::new(1.0, 0.0)], &bpsk), vec![0]);
        let qpsk = Constellation::new(ConstellationKind::Qpsk);
        assert_eq!(detect_symbols(&[Complex64::new(0.5, 0.5)], &qpsk), vec![0]);
        assert_eq!(detect_symbols(&[Complex64::new(-0.1, -2.0)], &qpsk), vec![3]);
    }

    #[test]
    fn ser_values() {
        assert_eq!(measure_ser(&[0, 1, 2, 3], &[0, 1, 2, 3]).unwrap(), 0.0);
        assert_eq!(measure_ser(&[0, 1], &[1, 0]).unwrap(), 1.0);
        assert_eq!(measure_ser(&[0, 1, 2, 3], &[0, 0, 2, 0]).unwrap(), 0.5);
        assert!(measure_ser(&[0], &[]).is_err());
    }
}
