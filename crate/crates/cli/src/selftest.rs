//! Quick invariant checks runnable from the command line.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use cfisac::comm::zf_precoder;
use cfisac::harness::{emit_csv, run_sweep, Chains, SweepSpec, SweepVariable};
use cfisac::numerics::{complex_normal, marcum_q1, RngStream};
use cfisac::radar::{detection_threshold, make_orthonormal_waveforms, RadarWaveform};
use cfisac::scenario::RadarPrecoderDesign;
use cfisac::{Mode, ScenarioConfig};

fn zf_leakage() -> bool {
    let mut rng = RngStream::new(11, 0).rng();
    let h = DMatrix::from_fn(2, 20, |_, _| complex_normal(&mut rng, 1.0));
    let s = DVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)]);
    let Ok((x, _)) = zf_precoder(&h, &s) else { return false };
    let y = &h * x;
    let ratio = y[0] / s[0];
    (y[1] - ratio * s[1]).norm_sqr() <= 1e-9 * ratio.norm_sqr()
}

fn waveforms() -> bool {
    let phi = make_orthonormal_waveforms(3, 100).unwrap();
    let gram_ok = (&phi * phi.adjoint() - DMatrix::identity(3, 3)).norm() < 1e-12;
    let mut rng = RngStream::new(0, 0).rng();
    let wf = RadarWaveform::with_sizes(20, 3, 100, 0.1, RadarPrecoderDesign::Rotation, &mut rng).unwrap();
    gram_ok && (&wf.r_w - DMatrix::identity(20, 20)).norm() < 1e-10
}

fn determinism() -> bool {
    let cfg = ScenarioConfig { l: 8, pathloss_ref_m: 100.0, ..ScenarioConfig::default() };
    let mut spec = SweepSpec::new(SweepVariable::PrOverN0Db, vec![10.0], 8, vec![Mode::SE_FD]);
    spec.chains = Chains::BOTH;
    let dir = std::env::temp_dir().join(format!("cfisac-selftest-{}", std::process::id()));
    if std::fs::create_dir_all(&dir).is_err() {
        return false;
    }
    let mut bytes = Vec::new();
    for workers in [1, 3] {
        spec.workers = workers;
        let path = dir.join(format!("w{workers}.csv"));
        let ok = run_sweep(&cfg, &spec).and_then(|r| emit_csv(&r, &path)).is_ok();
        bytes.push(if ok { std::fs::read(&path).ok() } else { None });
    }
    let _ = std::fs::remove_dir_all(&dir);
    bytes[0].is_some() && bytes[0] == bytes[1]
}

/// Run all checks, print one line each, and report overall success.
pub fn run() -> bool {
    let checks: [(&str, fn() -> bool); 5] = [
        ("threshold tau(1e-4) = 18.420681", || (detection_threshold(1e-4).unwrap() - 18.420_681).abs() < 5e-7),
        ("Marcum Q1(0, b) = exp(-b^2/2)", || (marcum_q1(0.0, 2.0).unwrap() - (-2.0f64).exp()).abs() < 1e-14),
        ("ZF leakage below 1e-9", zf_leakage),
        ("waveform Gram and beam covariance are identity", waveforms),
        ("CSV bytes independent of worker count", determinism),
    ];
    let mut all = true;
    for (name, check) in checks {
        let ok = check();
        all &= ok;
        println!("{} {name}", if ok { "PASS" } else { "FAIL" });
    }
    all
}
