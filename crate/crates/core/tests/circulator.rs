use cfsm::circulator::{
    build_circulator, center_dip, eigen_decompose, find_dip, fundamental_admittance,
    make_bfsk_clocks, port_spectrum, sweep_frequencies, CirculatorConfig, Modulation, Rotation,
    SweepSettings, Topology,
};
use cfsm::elements::ClockLevel;

const ORDER: usize = 6;

fn worst_sideband(cfg: &CirculatorConfig, f: f64, harmonic: i64) -> f64 {
    let spec = port_spectrum(&build_circulator(cfg).unwrap(), f, ORDER).unwrap();
    (0..3)
        .map(|p| spec.line(p, harmonic).unwrap().dbc())
        .fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn differential_circuit_cancels_odd_sidebands() {
    let diff = CirculatorConfig::numerical_design();
    let se = diff.clone().with_topology(Topology::ModifiedDeltaSe);
    for f in [895e6, 910e6, 925e6] {
        for n in [-1, 1] {
            let (d, s) = (worst_sideband(&diff, f, n), worst_sideband(&se, f, n));
            assert!(
                d < s - 20.0,
                "{f} Hz, sideband {n}: differential {d:.1} dBc, single-ended {s:.1} dBc"
            );
        }
    }
}

#[test]
fn static_switches_leave_the_rotating_modes_degenerate() {
    for (on, dd, dt) in [
        (false, 0.007, 0.02),
        (true, -0.005, -0.01),
        (false, 0.0, 0.0),
    ] {
        let mut cfg = CirculatorConfig::numerical_design();
        cfg.modulation = Modulation::Static { switches_on: on };
        cfg.duty_error = dd;
        cfg.phase_imbalance = dt;
        let net = build_circulator(&cfg).unwrap();
        for f in [850e6, 915e6, 990e6] {
            let y = fundamental_admittance(&net, f, SweepSettings::new(ORDER)).unwrap();
            let e = eigen_decompose(&y, 1e-9).unwrap();
            let scale = e.lambda_plus.norm().max(e.lambda_c.norm());
            assert!((e.lambda_plus - e.lambda_minus).norm() < 1e-10 * scale);
        }
    }
}

#[test]
fn unmodulated_spectrum_has_no_sidebands() {
    let mut cfg = CirculatorConfig::numerical_design();
    cfg.modulation = Modulation::Static { switches_on: false };
    let spec = port_spectrum(&build_circulator(&cfg).unwrap(), 910e6, ORDER).unwrap();
    for line in spec.lines.iter().filter(|l| l.harmonic != 0) {
        assert!(line.amplitude.norm() < 1e-12, "{line:?}");
    }
}

#[test]
fn spectrum_agrees_with_sweep_and_conserves_power() {
    let cfg = CirculatorConfig::numerical_design();
    let net = build_circulator(&cfg).unwrap();
    let f = 910e6;
    let spec = port_spectrum(&net, f, ORDER).unwrap();
    let sweep = sweep_frequencies(&net, &[f], SweepSettings::new(ORDER)).unwrap();
    for p in 0..3 {
        assert!((spec.line(p, 0).unwrap().amplitude - sweep.s[0][(p, 0)]).norm() < 1e-12);
    }
    assert!(spec.total_power() <= 1.0 + 1e-9);
    // the single-ended circuit puts its strongest spurs one modulation
    // harmonic away from the carrier
    let se = cfg.with_topology(Topology::ModifiedDeltaSe);
    let spec = port_spectrum(&build_circulator(&se).unwrap(), f, ORDER).unwrap();
    let strongest = spec
        .lines
        .iter()
        .filter(|l| l.harmonic != 0)
        .max_by(|a, b| a.amplitude.norm().total_cmp(&b.amplitude.norm()))
        .unwrap();
    assert_eq!(strongest.harmonic.abs(), 1);
    assert!((spec.line(1, -1).unwrap().frequency - 804e6).abs() < 1.0);
}

#[test]
fn reversing_the_clock_sequence_transposes_the_circulator() {
    let fwd = CirculatorConfig::numerical_design();
    let rev = CirculatorConfig {
        rotation: Rotation::Reverse,
        ..fwd.clone()
    };
    let freqs = [890e6, 915e6, 940e6];
    let a = sweep_frequencies(
        &build_circulator(&fwd).unwrap(),
        &freqs,
        SweepSettings::new(ORDER),
    )
    .unwrap();
    let b = sweep_frequencies(
        &build_circulator(&rev).unwrap(),
        &freqs,
        SweepSettings::new(ORDER),
    )
    .unwrap();
    for (x, y) in a.s.iter().zip(&b.s) {
        assert!((x.transpose() - y).camax() < 1e-9);
    }
}

#[test]
fn clock_errors_shape_overlap_and_dead_time() {
    let t = 1.0 / 106e6;
    let samples = (0..4000).map(|k| k as f64 * t / 4000.0);
    let overlap = make_bfsk_clocks(106e6, 0.5, 0.007, 0.0).unwrap();
    assert!(samples
        .clone()
        .any(|s| overlap[0].is_on(s) && overlap[3].is_on(s)));
    let gap = make_bfsk_clocks(106e6, 0.5, -0.007, 0.0).unwrap();
    assert!(samples
        .clone()
        .all(|s| !(gap[0].is_on(s) && gap[3].is_on(s))));
    let ideal = make_bfsk_clocks(106e6, 0.5, 0.0, 0.0).unwrap();
    for s in samples {
        for k in 0..3 {
            assert_ne!(ideal[k].is_on(s), ideal[k + 3].is_on(s));
        }
    }
    assert!(ideal.iter().all(|c| c.level() == ClockLevel::Switching));
}

#[test]
fn cm_bisection_centres_the_dip() {
    let cfg = CirculatorConfig::numerical_design();
    let settings = SweepSettings::new(3);
    let (tuned, dip) = center_dip(&cfg, 915e6, 40e6, 13, settings, 0.2e6).unwrap();
    assert!((dip.frequency - 915e6).abs() <= 0.2e6, "{dip:?}");
    let again = find_dip(
        &build_circulator(&tuned).unwrap(),
        875e6,
        955e6,
        13,
        settings,
        50e3,
    )
    .unwrap();
    assert!((again.frequency - 915e6).abs() < 0.3e6, "{again:?}");
    assert!(center_dip(&cfg, 2e9, 40e6, 13, settings, 0.2e6).is_err());
}
