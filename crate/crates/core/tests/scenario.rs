use emsrs::quantum::detection_probability;
use emsrs::scenario::{
    beta_grid, beta_sweep, protocol_b_config, resonance_grid, resonance_scan, run_protocol_a, run_protocol_b,
    Accumulation, ScenarioConfig,
};
use emsrs::Error;
use proptest::prelude::*;
use std::f64::consts::PI;

const THERMAL: &str = "
# electron column at 10 K
species     = electron
d           = 1 nm
B0          = 1.8 T
bias_axis   = x
temperature = 10 K
N_S         = 1000
pulse       = z, 180 deg
t0_phase    = 0 rad
phi         = linspace(0, 330, 12) deg
N_e         = 2e6
seed        = 7
";

#[test]
fn canonical_form_is_a_fixed_point() {
    let cfg = ScenarioConfig::parse(THERMAL).unwrap();
    let once = cfg.to_canonical();
    let again = ScenarioConfig::parse(&once).unwrap();
    assert_eq!(again, cfg);
    assert_eq!(again.to_canonical(), once);
    assert_eq!(again.hash(), cfg.hash());
}

#[test]
fn hash_tracks_content() {
    let a = ScenarioConfig::parse(THERMAL).unwrap();
    let b = ScenarioConfig::parse(&THERMAL.replace("seed        = 7", "seed = 8")).unwrap();
    assert_ne!(a.hash(), b.hash());
    assert_eq!(a.hash().len(), 64);
}

#[test]
fn config_errors_carry_line_numbers() {
    match ScenarioConfig::parse("species = electron\nd = 0.1\n") {
        Err(Error::Config { line: Some(2), .. }) => {}
        other => panic!("unexpected {other:?}"),
    }
    assert!(matches!(
        ScenarioConfig::parse("colour = red"),
        Err(Error::Config { .. })
    ));
}

#[test]
fn protocol_output_is_reproducible() {
    let cfg = ScenarioConfig::parse(THERMAL).unwrap();
    let a = run_protocol_a(&cfg).unwrap();
    let b = run_protocol_a(&cfg).unwrap();
    assert_eq!(a.table.to_csv(), b.table.to_csv());
    assert_eq!(a.summary, b.summary);
    let mut other = cfg.clone();
    other.seed += 1;
    assert_ne!(run_protocol_a(&other).unwrap().table.to_csv(), a.table.to_csv());
}

#[test]
fn thermal_column_toggle_phase() {
    let res = run_protocol_a(&ScenarioConfig::parse(THERMAL).unwrap()).unwrap();
    let diff = res.summary["differential_model_rad"];
    assert!((diff - 1.4e-3).abs() < 0.14e-3, "{diff}");
    assert_eq!(res.table.rows.len(), 2 * 12);
}

#[test]
fn protocol_b_quarter_period() {
    let mut cfg = protocol_b_config();
    cfg.t0_phase = vec![0.0, PI / 2.0, PI, 1.5 * PI];
    let res = run_protocol_b(&cfg).unwrap();
    let theta = res.summary["theta_rad"];
    assert!((res.summary["max_abs_phase_after_model_rad"] - 2.0 * theta).abs() < 1e-15);
}

#[test]
fn model_column_matches_closed_form() {
    let mut cfg = protocol_b_config();
    cfg.t0_phase = vec![0.3, 1.1, 2.0];
    let res = run_protocol_b(&cfg).unwrap();
    let theta = res.summary["theta_rad"];
    let cols = |name: &str| res.table.column(name).unwrap();
    let (stage, t0, phi, p) = (
        cols("stage"),
        cols("t0_phase_rad"),
        cols("phi_rad"),
        cols("p_plus_model"),
    );
    for k in 0..p.len() {
        // before the pulse the spin lies along the bias, after it precesses in the xy-plane
        let sx = if stage[k] == 0.0 { 0.0 } else { t0[k].sin() };
        let expect = detection_probability(theta, phi[k], sx).unwrap().plus;
        assert!((p[k] - expect).abs() < 1e-12, "row {k}");
    }
}

#[test]
fn beta_sweep_csv_is_stable() {
    let cfg = ScenarioConfig::default();
    let a = beta_sweep(&cfg, &beta_grid(36)).unwrap().to_csv();
    assert_eq!(a, beta_sweep(&cfg, &beta_grid(36)).unwrap().to_csv());
    assert_eq!(a.lines().count(), 37);
    assert!(a.lines().skip(1).all(|l| l.split(',').count() == 3));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn resonance_argmax_within_one_step(span in 0.02f64..0.5, half in 3usize..30, offset in 0usize..5) {
        let cfg = protocol_b_config();
        let omega0 = cfg.bias_field().unwrap().omega0();
        let grid = resonance_grid(omega0, span, 2 * half + 1).unwrap();
        // shift the window so ω₀ is not always central
        let grid: Vec<f64> = grid[offset.min(half)..].to_vec();
        let centre = half - offset.min(half);
        for mode in [Accumulation::Magnitude, Accumulation::Coherent] {
            let scan = resonance_scan(&cfg, &grid, mode).unwrap();
            prop_assert!(scan.argmax_index.abs_diff(centre) <= 1);
        }
    }

    #[test]
    fn config_round_trip(d in 0.05f64..10.0, b0 in 0.1f64..5.0, t in 1.0f64..300.0, n in 1u64..5000, seed: u64) {
        let text = format!("d = {d} nm\nB0 = {b0} T\ntemperature = {t} K\nN_S = {n}\nseed = {seed}\n");
        let cfg = ScenarioConfig::parse(&text).unwrap();
        let back = ScenarioConfig::parse(&cfg.to_canonical()).unwrap();
        prop_assert_eq!(back, cfg);
    }
}
