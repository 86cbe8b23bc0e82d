//! Experiment configuration, node geometry and large-scale quantities.

use std::fmt;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::poisson_disk_sample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Deployment {
    Separated,
    Shared,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Duplex {
    Hd,
    Fd,
}

/// One of the four operating configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Mode {
    pub deployment: Deployment,
    pub duplex: Duplex,
}

impl Mode {
    pub const SE_HD: Mode = Mode { deployment: Deployment::Separated, duplex: Duplex::Hd };
    pub const SE_FD: Mode = Mode { deployment: Deployment::Separated, duplex: Duplex::Fd };
    pub const SH_HD: Mode = Mode { deployment: Deployment::Shared, duplex: Duplex::Hd };
    pub const SH_FD: Mode = Mode { deployment: Deployment::Shared, duplex: Duplex::Fd };
    pub const ALL: [Mode; 4] = [Mode::SE_HD, Mode::SE_FD, Mode::SH_HD, Mode::SH_FD];

    pub fn label(&self) -> &'static str {
        match (self.deployment, self.duplex) {
            (Deployment::Separated, Duplex::Hd) => "SE-HD",
            (Deployment::Separated, Duplex::Fd) => "SE-FD",
            (Deployment::Shared, Duplex::Hd) => "SH-HD",
            (Deployment::Shared, Duplex::Fd) => "SH-FD",
        }
    }

    pub fn parse(label: &str) -> Result<Mode> {
        Mode::ALL
            .into_iter()
            .find(|m| m.label().eq_ignore_ascii_case(label))
            .ok_or_else(|| Error::Config(format!("unknown mode '{label}'")))
    }

    pub fn is_fd(&self) -> bool {
        self.duplex == Duplex::Fd
    }

    pub fn is_shared(&self) -> bool {
        self.deployment == Deployment::Shared
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstellationKind {
    Bpsk,
    Qpsk,
    Psk8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TwoWayConvention {
    /// Pathloss law evaluated at twice the one-way distance.
    DoubleDistance,
    /// Product of the two one-way leg pathlosses.
    ProductLegs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UlInverseMode {
    Mean,
    PerDraw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaModel {
    /// Unit modulus with a uniform random phase per trial.
    UnitPhase,
    /// Fixed at 1.
    Fixed,
    /// Circular complex Gaussian with unit mean power.
    Rayleigh,
}

/// Pathloss weighting of the shared-deployment clutter backscatter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClutterDistance {
    /// Transmit AP to bin to receive AP, using one-way AP-bin distances.
    ApToBin,
    /// Direct AP-to-AP coupling distances.
    ApToAp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadarPrecoderDesign {
    /// Deterministic DFT rotation with exact identity transmit covariance.
    Rotation,
    /// I.i.d. Gaussian beams, identity covariance on average.
    Random,
}

/// Complete description of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub deployment: Deployment,
    pub duplex: Duplex,
    pub m: usize,
    pub m_c: usize,
    pub m_r: usize,
    pub k_d: usize,
    pub k_u: usize,
    pub t: usize,
    pub l: usize,
    pub p_c: f64,
    pub p_r: f64,
    pub p_u: f64,
    pub beta_ap: f64,
    pub beta_r: f64,
    pub sigma_ic_sq: f64,
    /// Overrides for the individual cancellation-error variances.
    pub ic_err_ul_backscatter: Option<f64>,
    pub ic_err_ul_si: Option<f64>,
    pub ic_err_radar_comm: Option<f64>,
    pub ic_err_radar_si: Option<f64>,
    pub ic_err_radar_ul: Option<f64>,
    pub ic_err_clutter: Option<f64>,
    pub h_var: f64,
    pub f_var: f64,
    pub u_var: f64,
    pub eta: f64,
    pub lambda0_m: f64,
    pub area_m: f64,
    pub min_sep_m: f64,
    pub ue_guard_m: f64,
    pub d_min_m: f64,
    pub pathloss_ref_m: f64,
    pub pfa: f64,
    pub pr_over_n0_db: f64,
    pub constellation_hd: ConstellationKind,
    pub constellation_fd: ConstellationKind,
    pub n_mc: usize,
    pub master_seed: u64,
    pub fixed_geometry: bool,
    pub alpha_model: AlphaModel,
    pub two_way_convention: TwoWayConvention,
    pub ul_inverse_mode: UlInverseMode,
    pub clutter_distance: ClutterDistance,
    pub radar_precoder: RadarPrecoderDesign,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            deployment: Deployment::Separated,
            duplex: Duplex::Hd,
            m: 40,
            m_c: 20,
            m_r: 20,
            k_d: 2,
            k_u: 2,
            t: 3,
            l: 100,
            p_c: 0.8,
            p_r: 0.1,
            p_u: 0.1,
            beta_ap: 1e-3,
            beta_r: 1e-3,
            sigma_ic_sq: 1e-6,
            ic_err_ul_backscatter: None,
            ic_err_ul_si: None,
            ic_err_radar_comm: None,
            ic_err_radar_si: None,
            ic_err_radar_ul: None,
            ic_err_clutter: None,
            h_var: 1.0,
            f_var: 1.0,
            u_var: 1.0,
            eta: 3.0,
            lambda0_m: 0.0857,
            area_m: 800.0,
            min_sep_m: 100.0,
            ue_guard_m: 10.0,
            d_min_m: 1.0,
            pathloss_ref_m: 1.0,
            pfa: 1e-4,
            pr_over_n0_db: 10.0,
            constellation_hd: ConstellationKind::Qpsk,
            constellation_fd: ConstellationKind::Bpsk,
            n_mc: 1000,
            master_seed: 1,
            fixed_geometry: false,
            alpha_model: AlphaModel::UnitPhase,
            two_way_convention: TwoWayConvention::DoubleDistance,
            ul_inverse_mode: UlInverseMode::Mean,
            clutter_distance: ClutterDistance::ApToBin,
            radar_precoder: RadarPrecoderDesign::Rotation,
        }
    }
}

/// Cancellation-error variances, one per residual source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IcErrors {
    /// Radar-to-comm backscatter seen by UL receivers.
    pub ul_backscatter: f64,
    /// AP self-interference seen by UL receivers.
    pub ul_si: f64,
    /// Comm transmissions seen by radar receivers.
    pub radar_comm: f64,
    /// Radar self-interference.
    pub radar_si: f64,
    /// UL user signals seen by radar receivers.
    pub radar_ul: f64,
    /// Shared-deployment clutter backscatter.
    pub clutter: f64,
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn mode(&self) -> Mode {
        Mode { deployment: self.deployment, duplex: self.duplex }
    }

    pub fn with_mode(&self, mode: Mode) -> Self {
        Self { deployment: mode.deployment, duplex: mode.duplex, ..self.clone() }
    }

    /// APs that transmit DL and receive UL.
    pub fn m_comm(&self) -> usize {
        match self.deployment {
            Deployment::Separated => self.m_c,
            Deployment::Shared => self.m,
        }
    }

    /// APs that transmit and receive radar waveforms.
    pub fn m_radar(&self) -> usize {
        match self.deployment {
            Deployment::Separated => self.m_r,
            Deployment::Shared => self.m,
        }
    }

    pub fn constellation(&self) -> ConstellationKind {
        match self.duplex {
            Duplex::Hd => self.constellation_hd,
            Duplex::Fd => self.constellation_fd,
        }
    }

    /// Total receiver noise variance implied by the P_r/N0 sweep value.
    pub fn noise_total_variance(&self) -> f64 {
        self.p_r / 10f64.powf(self.pr_over_n0_db / 10.0)
    }

    pub fn dl_user_power(&self) -> f64 {
        self.p_c / self.k_d as f64
    }

    pub fn ul_user_power(&self) -> f64 {
        self.p_u / self.k_u as f64
    }

    pub fn ic_errors(&self) -> IcErrors {
        let s = self.sigma_ic_sq;
        IcErrors {
            ul_backscatter: self.ic_err_ul_backscatter.unwrap_or(s),
            ul_si: self.ic_err_ul_si.unwrap_or(s),
            radar_comm: self.ic_err_radar_comm.unwrap_or(s),
            radar_si: self.ic_err_radar_si.unwrap_or(s),
            radar_ul: self.ic_err_radar_ul.unwrap_or(s),
            clutter: self.ic_err_clutter.unwrap_or(s),
        }
    }

    pub fn pathloss_model(&self) -> PathlossModel {
        PathlossModel { eta: self.eta, d_min_m: self.d_min_m, ref_m: self.pathloss_ref_m }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        for (name, v) in [("m", self.m), ("k_d", self.k_d), ("k_u", self.k_u), ("t", self.t), ("l", self.l), ("n_mc", self.n_mc)] {
            if v < 1 {
                return bad(format!("{name} must be at least 1"));
            }
        }
        match self.deployment {
            Deployment::Separated => {
                if self.m_c + self.m_r != self.m {
                    return bad(format!("m_c + m_r = {} differs from m = {}", self.m_c + self.m_r, self.m));
                }
                if self.m_r < 1 {
                    return bad("m_r must be at least 1".into());
                }
                if self.m_c <= self.k_u + 1 {
                    return bad(format!("m_c = {} must exceed k_u + 1 = {}", self.m_c, self.k_u + 1));
                }
                if self.m_c < self.k_d {
                    return bad(format!("m_c = {} must be at least k_d = {}", self.m_c, self.k_d));
                }
            }
            Deployment::Shared => {
                if self.m <= self.k_u + 1 {
                    return bad(format!("m = {} must exceed k_u + 1 = {}", self.m, self.k_u + 1));
                }
                if self.m <= self.k_d {
                    return bad(format!("m = {} must exceed k_d = {}", self.m, self.k_d));
                }
            }
        }
        if self.t > self.m_radar().min(self.l) {
            return bad(format!("t = {} exceeds min(radar APs, l) = {}", self.t, self.m_radar().min(self.l)));
        }
        let powers = [self.p_c, self.p_r, self.p_u];
        if powers.iter().any(|p| !(*p >= 0.0)) || (powers.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return bad(format!("powers ({}, {}, {}) must be nonnegative and sum to 1", self.p_c, self.p_r, self.p_u));
        }
        if !(self.p_r > 0.0) {
            return bad("p_r must be positive since the noise level is referenced to it".into());
        }
        for (name, b) in [("beta_ap", self.beta_ap), ("beta_r", self.beta_r)] {
            if !(0.0..1.0).contains(&b) {
                return bad(format!("{name} = {b} outside [0, 1)"));
            }
        }
        let e = self.ic_errors();
        for v in [self.sigma_ic_sq, e.ul_backscatter, e.ul_si, e.radar_comm, e.radar_si, e.radar_ul, e.clutter] {
            if !(v >= 0.0) || !v.is_finite() {
                return bad(format!("error variance {v} must be finite and nonnegative"));
            }
        }
        for (name, v) in [
            ("h_var", self.h_var),
            ("f_var", self.f_var),
            ("u_var", self.u_var),
            ("eta", self.eta),
            ("lambda0_m", self.lambda0_m),
            ("area_m", self.area_m),
            ("d_min_m", self.d_min_m),
            ("pathloss_ref_m", self.pathloss_ref_m),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return bad(format!("{name} = {v} must be positive"));
            }
        }
        if !(self.pfa > 0.0 && self.pfa < 1.0) {
            return bad(format!("pfa = {} outside (0, 1)", self.pfa));
        }
        if !self.pr_over_n0_db.is_finite() {
            return bad("pr_over_n0_db must be finite".into());
        }
        Ok(())
    }
}

/// Distance-dependent amplitude attenuation `(max(d, d_min) / ref)^(-eta/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathlossModel {
    pub eta: f64,
    pub d_min_m: f64,
    pub ref_m: f64,
}

impl PathlossModel {
    pub fn amplitude(&self, d: f64) -> f64 {
        (d.max(self.d_min_m) / self.ref_m).powf(-0.5 * self.eta)
    }

    /// Round-trip amplitude through an AP at one-way distance `d`.
    pub fn two_way(&self, d: f64, convention: TwoWayConvention) -> f64 {
        match convention {
            TwoWayConvention::DoubleDistance => (2.0 * d.max(self.d_min_m) / self.ref_m).powf(-0.5 * self.eta),
            TwoWayConvention::ProductLegs => self.amplitude(d) * self.amplitude(d),
        }
    }

    pub fn matrix(&self, from: &[[f64; 2]], to: &[[f64; 2]]) -> DMatrix<f64> {
        DMatrix::from_fn(from.len(), to.len(), |i, j| self.amplitude(dist(from[i], to[j])))
    }
}

pub fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Pathloss amplitudes with a 1 m clamp and 1 m reference distance.
pub fn pathloss_matrix(from_xy: &[[f64; 2]], to_xy: &[[f64; 2]], eta: f64) -> DMatrix<f64> {
    PathlossModel { eta, d_min_m: 1.0, ref_m: 1.0 }.matrix(from_xy, to_xy)
}

/// Round-trip amplitude vector `(2 max(d_m, 1))^(-eta/2)` over the given APs.
pub fn radar_two_way_pathloss(ap_xy: &[[f64; 2]], target: [f64; 2], eta: f64) -> DVector<f64> {
    let model = PathlossModel { eta, d_min_m: 1.0, ref_m: 1.0 };
    DVector::from_iterator(ap_xy.len(), ap_xy.iter().map(|&p| model.two_way(dist(p, target), TwoWayConvention::DoubleDistance)))
}

/// Unit-modulus round-trip phase signature `exp(-j 2 pi 2 d_m / lambda0)`.
pub fn steering_vector(ap_xy: &[[f64; 2]], target: [f64; 2], lambda0_m: f64) -> DVector<Complex64> {
    DVector::from_iterator(
        ap_xy.len(),
        ap_xy.iter().map(|&p| {
            let cycles = (2.0 * dist(p, target) / lambda0_m).fract();
            Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * cycles)
        }),
    )
}

/// Node positions. In separated deployment the first `m_r` APs are radar.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub ap_xy: Vec<[f64; 2]>,
    pub dl_ue_xy: Vec<[f64; 2]>,
    pub ul_ue_xy: Vec<[f64; 2]>,
    pub target_xy: Vec<[f64; 2]>,
}

/// Random geometry: Poisson-disk APs in random order, users and targets
/// uniform but at least `ue_guard_m` away from every AP.
pub fn build_geometry<R: Rng + ?Sized>(config: &ScenarioConfig, rng: &mut R) -> Result<Geometry> {
    let a = config.area_m;
    let mut ap_xy = poisson_disk_sample(a, a, config.min_sep_m, config.m, rng)?;
    ap_xy.shuffle(rng);
    let mut guarded = |n: usize| -> Result<Vec<[f64; 2]>> {
        let g2 = config.ue_guard_m * config.ue_guard_m;
        let mut out = Vec::with_capacity(n);
        let mut rejections = 0;
        while out.len() < n {
            let p = [rng.gen::<f64>() * a, rng.gen::<f64>() * a];
            if ap_xy.iter().all(|q| (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) >= g2) {
                out.push(p);
            } else {
                rejections += 1;
                if rejections >= 10_000 {
                    return Err(Error::Capacity { count: n, width_m: a, height_m: a, min_separation_m: config.ue_guard_m });
                }
            }
        }
        Ok(out)
    };
    let dl_ue_xy = guarded(config.k_d)?;
    let ul_ue_xy = guarded(config.k_u)?;
    let target_xy = guarded(config.t)?;
    Ok(Geometry { ap_xy, dl_ue_xy, ul_ue_xy, target_xy })
}

impl Geometry {
    /// Symmetric test layout: APs evenly spaced on a circle of radius
    /// `ring_radius_m` around the region centre, users on a small circle of
    /// radius `user_radius_m` and targets on one of radius `target_radius_m`.
    ///
    /// In separated deployment radar and comm APs interleave around the ring,
    /// which makes every AP-to-AP pathloss row sum identical.
    pub fn ring_fixture(config: &ScenarioConfig, ring_radius_m: f64, user_radius_m: f64, target_radius_m: f64) -> Geometry {
        let c = 0.5 * config.area_m;
        let at = |r: f64, theta: f64| [c + r * theta.cos(), c + r * theta.sin()];
        let tau = 2.0 * std::f64::consts::PI;
        let m = config.m;
        let ring: Vec<[f64; 2]> = (0..m).map(|i| at(ring_radius_m, tau * i as f64 / m as f64)).collect();
        let ap_xy = match config.deployment {
            Deployment::Shared => ring,
            Deployment::Separated => {
                // Spread the m_r radar slots as evenly as possible over the ring.
                let mut is_radar = vec![false; m];
                for j in 0..config.m_r {
                    is_radar[(j * m) / config.m_r] = true;
                }
                let radar = (0..m).filter(|&i| is_radar[i]).map(|i| ring[i]);
                let comm = (0..m).filter(|&i| !is_radar[i]).map(|i| ring[i]);
                radar.chain(comm).collect()
            }
        };
        let k = config.k_d + config.k_u;
        let users: Vec<[f64; 2]> = (0..k).map(|i| at(user_radius_m, tau * i as f64 / k as f64)).collect();
        let target_xy = (0..config.t)
            .map(|i| at(target_radius_m, tau * (i as f64 + 0.5) / config.t as f64))
            .collect();
        // Alternate DL and UL users around the small circle.
        let mut dl_ue_xy = Vec::with_capacity(config.k_d);
        let mut ul_ue_xy = Vec::with_capacity(config.k_u);
        for (i, p) in users.into_iter().enumerate() {
            let dl_turn = i % 2 == 0 || ul_ue_xy.len() == config.k_u;
            if dl_turn && dl_ue_xy.len() < config.k_d {
                dl_ue_xy.push(p);
            } else {
                ul_ue_xy.push(p);
            }
        }
        Geometry {
            ap_xy,
            dl_ue_xy,
            ul_ue_xy,
            target_xy,
        }
    }
}

/// Per-bin radar quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct BinPathloss {
    /// Round-trip amplitude per radar AP.
    pub d_r: DVector<f64>,
    /// Unit-modulus steering vector.
    pub a: DVector<Complex64>,
    /// Effective target response `d_r .* a`.
    pub g: DVector<Complex64>,
    /// One-way AP-to-bin amplitude, used for clutter weighting.
    pub d_one_way: DVector<f64>,
}

/// All large-scale matrices a mode needs. Rows index receivers of the link.
#[derive(Debug, Clone, PartialEq)]
pub struct PathlossSet {
    pub mode: Mode,
    /// Indices into `Geometry::ap_xy` of the comm and radar APs.
    pub comm_aps: Vec<usize>,
    pub radar_aps: Vec<usize>,
    /// DL users x comm APs.
    pub d_c: DMatrix<f64>,
    /// UL users x comm APs.
    pub d_c_ul: DMatrix<f64>,
    /// DL users x radar APs.
    pub d_ru: DMatrix<f64>,
    /// UL users x radar APs.
    pub d_ru_ul: DMatrix<f64>,
    /// Comm APs x radar APs. In shared deployment this is AP x AP with a
    /// zero diagonal, since an AP's coupling to itself is self-interference.
    pub d_rc: DMatrix<f64>,
    /// DL users x UL users.
    pub d_u: DMatrix<f64>,
    pub bins: Vec<BinPathloss>,
}

impl PathlossSet {
    pub fn build(config: &ScenarioConfig, geometry: &Geometry) -> PathlossSet {
        let mode = config.mode();
        let model = config.pathloss_model();
        let (comm_aps, radar_aps): (Vec<usize>, Vec<usize>) = match mode.deployment {
            Deployment::Separated => ((config.m_r..config.m).collect(), (0..config.m_r).collect()),
            Deployment::Shared => ((0..config.m).collect(), (0..config.m).collect()),
        };
        let pick = |idx: &[usize]| idx.iter().map(|&i| geometry.ap_xy[i]).collect::<Vec<_>>();
        let comm_xy = pick(&comm_aps);
        let radar_xy = pick(&radar_aps);
        let mut d_rc = model.matrix(&comm_xy, &radar_xy);
        if mode.is_shared() {
            d_rc.fill_diagonal(0.0);
        }
        let bins = geometry
            .target_xy
            .iter()
            .map(|&tgt| {
                let d_r = DVector::from_iterator(
                    radar_xy.len(),
                    radar_xy.iter().map(|&p| model.two_way(dist(p, tgt), config.two_way_convention)),
                );
                let d_one_way = DVector::from_iterator(radar_xy.len(), radar_xy.iter().map(|&p| model.amplitude(dist(p, tgt))));
                let a = steering_vector(&radar_xy, tgt, config.lambda0_m);
                let g = a.zip_map(&d_r, |a, d| a * d);
                BinPathloss { d_r, a, g, d_one_way }
            })
            .collect();
        PathlossSet {
            mode,
            d_c: model.matrix(&geometry.dl_ue_xy, &comm_xy),
            d_c_ul: model.matrix(&geometry.ul_ue_xy, &comm_xy),
            d_ru: model.matrix(&geometry.dl_ue_xy, &radar_xy),
            d_ru_ul: model.matrix(&geometry.ul_ue_xy, &radar_xy),
            d_rc,
            d_u: model.matrix(&geometry.dl_ue_xy, &geometry.ul_ue_xy),
            comm_aps,
            radar_aps,
            bins,
        }
    }

    /// Mean of `d^(-eta/2)` over the comm APs, squared: the effective
    /// `d^(-eta)` the closed forms use for DL user `k`.
    pub fn effective_dl_gain(&self, k: usize) -> f64 {
        self.d_c.row(k).mean().powi(2)
    }

    pub fn effective_ul_gain(&self, k: usize) -> f64 {
        self.d_c_ul.row(k).mean().powi(2)
    }

    /// Clutter coupling matrix for bin `t` in shared deployment.
    pub fn clutter_matrix(&self, t: usize, convention: ClutterDistance) -> DMatrix<f64> {
        match convention {
            ClutterDistance::ApToBin => {
                let d = &self.bins[t].d_one_way;
                d * d.transpose()
            }
            ClutterDistance::ApToAp => self.d_rc.clone(),
        }
    }
}
