use proptest::prelude::*;

use cfisac::harness::{
    emit_csv, emit_plot_data, figure_preset, point_config, read_csv, run_sweep, run_trial, Chains, Series, SweepRecord,
    SweepSpec, SweepVariable, CSV_HEADER, FIGURE_PRESETS,
};
use cfisac::numerics::RngStream;
use cfisac::{Error, Mode, ScenarioConfig};

fn small() -> ScenarioConfig {
    ScenarioConfig { l: 8, pathloss_ref_m: 100.0, ..ScenarioConfig::default() }
}

fn tempdir() -> tempfile::TempDir {
    tempfile::tempdir().unwrap()
}

#[test]
fn sweep_is_independent_of_worker_count() {
    let mut spec = SweepSpec::new(SweepVariable::PrOverN0Db, vec![0.0, 20.0], 6, vec![Mode::SE_FD, Mode::SH_HD]);
    let dir = tempdir();
    let mut files = Vec::new();
    for workers in [1, 2, 3] {
        spec.workers = workers;
        let path = dir.path().join(format!("{workers}.csv"));
        emit_csv(&run_sweep(&small(), &spec).unwrap(), &path).unwrap();
        files.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(files[0], files[1]);
    assert_eq!(files[0], files[2]);
}

#[test]
fn trial_is_reproducible_from_its_stream() {
    let cfg = small().with_mode(Mode::SH_FD);
    let a = run_trial(&cfg, Chains::BOTH, None, RngStream::new(5, 17)).unwrap();
    let b = run_trial(&cfg, Chains::BOTH, None, RngStream::new(5, 17)).unwrap();
    assert_eq!(a.kld, b.kld);
    assert_eq!(a.detections, b.detections);
    assert_eq!(a.emp_kld_dl, b.emp_kld_dl);
}

#[test]
fn records_hold_probabilities_and_nan_for_skipped_chains() {
    let mut spec = SweepSpec::new(SweepVariable::PrOverN0Db, vec![10.0], 10, Mode::ALL.to_vec());
    spec.chains = Chains::RADAR;
    for r in run_sweep(&small(), &spec).unwrap() {
        assert!(r.ser_dl.is_nan() && r.ser_ul.is_nan() && r.emp_kld_dl.is_nan());
        for p in [r.pd, r.pfa, r.pd_analytic] {
            assert!((0.0..=1.0).contains(&p));
        }
        assert_eq!(r.trials, 10);
        assert!(r.kld_dl >= 0.0 && r.kld_ul >= 0.0 && r.kld_radar >= 0.0);
    }
    spec.chains = Chains::COMM;
    for r in run_sweep(&small(), &spec).unwrap() {
        assert!(r.pd.is_nan() && r.pfa.is_nan());
        assert!((0.0..=1.0).contains(&r.ser_dl) && (0.0..=1.0).contains(&r.ser_ul));
    }
}

#[test]
fn series_overrides_apply_before_the_sweep_value() {
    let mut spec = SweepSpec::new(SweepVariable::SigmaIcSq, vec![1e-5], 1, vec![Mode::SE_HD]);
    spec.series = vec![Series::single(SweepVariable::Beta, 0.2)];
    let cfg = point_config(&small(), &spec, &spec.series[0], Mode::SH_FD, 1e-5);
    assert_eq!(cfg.mode(), Mode::SH_FD);
    assert_eq!((cfg.beta_ap, cfg.beta_r, cfg.sigma_ic_sq), (0.2, 0.2, 1e-5));
    let split = SweepVariable::PowerSplit.apply(&small(), 0.4);
    assert!((split.p_c + split.p_r + split.p_u - 1.0).abs() < 1e-12);
    assert_eq!(split.p_c, 0.4);
}

#[test]
fn sweep_spec_validation() {
    let ok = SweepSpec::new(SweepVariable::Beta, vec![0.1], 1, vec![Mode::SE_HD]);
    ok.validate().unwrap();
    let bad = [
        SweepSpec { values: vec![], ..ok.clone() },
        SweepSpec { trials_per_point: 0, ..ok.clone() },
        SweepSpec { modes: vec![], ..ok.clone() },
        SweepSpec { chains: Chains { comm: false, radar: false }, ..ok.clone() },
    ];
    for s in bad {
        assert!(matches!(s.validate(), Err(Error::Config(_))));
    }
    assert!(SweepVariable::parse("nope").is_err());
    assert_eq!(SweepVariable::parse("beta").unwrap(), SweepVariable::Beta);
}

#[test]
fn invalid_point_is_rejected() {
    let spec = SweepSpec::new(SweepVariable::Beta, vec![1.5], 1, vec![Mode::SE_HD]);
    assert!(matches!(run_sweep(&small(), &spec), Err(Error::Config(_))));
}

#[test]
fn presets_are_valid() {
    for name in FIGURE_PRESETS {
        let (cfg, spec) = figure_preset(name).unwrap();
        cfg.validate().unwrap();
        spec.validate().unwrap();
        for series in &spec.series {
            for &mode in &spec.modes {
                for &v in &spec.values {
                    point_config(&cfg, &spec, series, mode, v).validate().unwrap();
                }
            }
        }
    }
    assert!(figure_preset("fig9z").is_err());
}

#[test]
fn plot_data_has_one_block_per_series_and_mode() {
    let mut spec = SweepSpec::new(SweepVariable::PrOverN0Db, vec![0.0, 10.0], 3, vec![Mode::SE_HD, Mode::SE_FD]);
    spec.chains = Chains::COMM;
    let records = run_sweep(&small(), &spec).unwrap();
    let dir = tempdir();
    let files = emit_plot_data(&records, dir.path()).unwrap();
    assert!(files.iter().all(|f| f.exists()));
    assert!(!files.iter().any(|f| f.ends_with("pd.dat")));
    let text = std::fs::read_to_string(dir.path().join("ser_dl.dat")).unwrap();
    assert_eq!(text.matches("# SE-").count(), 2);
    assert_eq!(text.lines().filter(|l| !l.is_empty() && !l.starts_with('#')).count(), 4);
}

fn finite_or_nan() -> impl Strategy<Value = f64> {
    prop_oneof![Just(f64::NAN), -1e6f64..1e6, 1e-12f64..1.0]
}

proptest! {
    #[test]
    fn csv_round_trip(
        mode_index in 0usize..4,
        series in "[a-z_=0-9.e-]{1,12}",
        values in proptest::collection::vec(finite_or_nan(), 13),
        trials in 0usize..100_000,
        failed in 0usize..100,
    ) {
        let r = SweepRecord {
            mode: Mode::ALL[mode_index],
            series,
            variable: SweepVariable::SigmaIcSq,
            value: values[0],
            ser_dl: values[1],
            ser_ul: values[2],
            pd: values[3],
            pfa: values[4],
            pd_analytic: values[5],
            kld_dl: values[6],
            kld_ul: values[7],
            kld_ul_sum: values[8],
            kld_radar: values[9],
            kld_comm_total: values[10],
            emp_kld_dl: values[11],
            emp_kld_ul: values[12],
            trials,
            failed_trials: failed,
            wall_time_s: 3.5,
        };
        let dir = tempdir();
        let path = dir.path().join("r.csv");
        emit_csv(std::slice::from_ref(&r), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        prop_assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
        let back = read_csv(&path).unwrap();
        prop_assert_eq!(back.len(), 1);
        let b = &back[0];
        prop_assert_eq!(b.mode, r.mode);
        prop_assert_eq!(&b.series, &r.series);
        prop_assert_eq!((b.trials, b.failed_trials), (trials, failed));
        let got = [b.value, b.ser_dl, b.ser_ul, b.pd, b.pfa, b.pd_analytic, b.kld_dl, b.kld_ul, b.kld_ul_sum, b.kld_radar, b.kld_comm_total, b.emp_kld_dl, b.emp_kld_ul];
        for (g, w) in got.iter().zip(&values) {
            if w.is_nan() {
                prop_assert!(g.is_nan());
            } else {
                prop_assert!((g - w).abs() <= 1e-8 * w.abs());
            }
        }
    }
}
