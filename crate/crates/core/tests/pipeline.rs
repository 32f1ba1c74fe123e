use std::path::PathBuf;

use helixscan::detect::{classify, classify_series, steady_points, ClassifyOptions, SegmentOptions, Verdict};
use helixscan::io::{ingest_bytes, ingest_series, to_csv, to_json, RunConfig};
use helixscan::metrics::SteadyPointTrain;
use helixscan::sweep::{classify_grid, find_boundary, grid, mu, SweepOptions};
use helixscan::{builtin, iterate, ErrorClass, Param};

fn appendix() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/appendix1.csv")
}

#[test]
fn appendix_orders_and_segments() {
    let s = ingest_series(&appendix()).unwrap().series();
    let segs = helixscan::segment_pseudo_helices(&s, 1, &SegmentOptions::default()).unwrap();
    let got: Vec<_> = segs.iter().map(|g| (g.n0, g.m, g.steady_point_k0, g.steady_order())).collect();
    assert_eq!(got, vec![(3, 148, 71, 74), (154, 93, 69, 223)]);
    let train = steady_points(&s, 1, &SegmentOptions::default()).unwrap();
    assert_eq!(train.average_periodicity, Some(149.0));
}

#[test]
fn appendix_is_not_a_stable_helix() {
    let s = ingest_series(&appendix()).unwrap().series();
    let opts = ClassifyOptions { transient: 0, confirm_cycles: 10, p_max: 8, ..ClassifyOptions::default() };
    let c = classify_series(&s, &opts).unwrap();
    assert!(!c.verdict.is_stable_helix());
}

#[test]
fn ingest_reemit_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let map = builtin("sine").unwrap().bind(Some(0.4), Some(1.59)).unwrap();
    let orbit = iterate(&map, 0.5, 400).unwrap();
    let path = dir.path().join("orbit.csv");
    std::fs::write(&path, to_csv(&orbit).unwrap()).unwrap();

    let back = ingest_series(&path).unwrap();
    assert_eq!(back.values, orbit.values());
    for (printed, recomputed) in back.printed_delta1.iter().zip(orbit.delta1()) {
        assert_eq!(printed.unwrap(), recomputed);
    }
    assert_eq!(back.printed_delta1.last(), Some(&None));
}

#[test]
fn ingest_reports_bad_line() {
    let err = ingest_bytes(b"index,value\n1,0.5\n3,0.9\n", "gap.csv".as_ref()).unwrap_err();
    assert_eq!(err.class(), ErrorClass::Io);
    assert!(err.to_string().contains('3'), "{err}");
}

#[test]
fn config_file_drives_classification() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, "family = \"composite\"\nbeta = 1.2\nx0 = 0.5\nhorizon = 20000\ntransient = 5000\n").unwrap();
    let cfg = RunConfig::load(&path).unwrap();
    let map = cfg.family_spec().unwrap().bind(cfg.alpha, cfg.beta).unwrap();
    let c = classify(&map, cfg.x0.unwrap(), &cfg.classify_options()).unwrap();
    match c.verdict {
        Verdict::StableHelix(h) => assert_eq!(h.period_j, 3),
        other => panic!("expected a helix, got {}", other.name()),
    }
}

#[test]
fn parallel_grid_matches_pointwise_classification() {
    let fam = builtin("sine").unwrap();
    let opts = SweepOptions {
        classify: ClassifyOptions { horizon: 20_000, transient: 2_000, ..ClassifyOptions::default() },
        ..SweepOptions::default()
    };
    let records = classify_grid(&fam, Param::Beta, 1.0, 2.0, 9, 0.4, 0.5, &opts).unwrap();
    let values = grid(1.0, 2.0, 9).unwrap();
    assert_eq!(records.len(), values.len());
    for (r, v) in records.iter().zip(values) {
        assert_eq!(r.param_value, v);
        let map = fam.bind(Some(0.4), Some(v)).unwrap();
        let c = classify(&map, 0.5, &opts.classify).unwrap();
        assert_eq!(r.verdict, c.verdict.name());
    }
    assert_eq!(to_json(&records).unwrap(), to_json(&classify_grid(&fam, Param::Beta, 1.0, 2.0, 9, 0.4, 0.5, &opts).unwrap()).unwrap());
}

#[test]
fn composite_boundary_on_a_straddling_bracket() {
    let fam = builtin("composite").unwrap();
    let opts = ClassifyOptions::default();
    let b = find_boundary(&fam, Param::Beta, 1.25, 1.259, 0.0, 0.5, &opts, 1e-4, 40).unwrap();
    assert!(b.converged);
    assert!(1.25 <= b.value && b.value <= 1.259);
}

#[test]
fn mu_refuses_stable_helix() {
    let map = builtin("composite").unwrap().bind(None, Some(1.2)).unwrap();
    let err = mu(&map, 0.5, &ClassifyOptions::default(), 10).unwrap_err();
    assert_eq!(err.class(), ErrorClass::Numeric);
}

#[test]
fn steady_point_train_json_is_stable() {
    let t = SteadyPointTrain::from_orders(vec![74, 223, 368, 519, 669, 820]);
    let text = to_json(&t).unwrap();
    assert!(text.contains("\"average_periodicity\": 149.2"));
    assert_eq!(text, to_json(&SteadyPointTrain::from_orders(t.orders.clone())).unwrap());
}
