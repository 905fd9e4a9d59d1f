use super::*;
use crate::elements::{Clock, ElementKind, InductorLoss};
use crate::floquet::WaveformSpectrum;
use crate::network::NodeId;

const FM: f64 = 100e6;

fn settings(order: usize) -> OracleSettings {
    OracleSettings {
        order,
        ..OracleSettings::default()
    }
}

fn switched_cap_one_port() -> Netlist {
    let clock = Clock::new(FM, 0.5, 0.0, "s").unwrap();
    let mut net = Netlist::new(FM).unwrap();
    let a = net.node("a");
    let kind = ElementKind::SwitchedCap {
        c_m: 1.2e-12,
        r_on: 2.0,
        c_off: 0.2e-12,
        clock,
    };
    net.add_element("M", kind, a, NodeId::GROUND).unwrap();
    net.add_port(a, "P").unwrap();
    net
}

#[test]
fn snapping_avoids_shared_sidebands() {
    let c = snap_commensurate(915e6, 106e6, 64).unwrap();
    assert!(c.q >= 3 && c.q <= 64);
    assert_ne!((2 * c.p) % c.q, 0);
    assert!((c.frequency - 915e6).abs() < 106e6 / (64.0 * 3.0));
    // an exact half-integer ratio is moved off
    let c = snap_commensurate(250e6, FM, 16).unwrap();
    assert_ne!((2 * c.p) % c.q, 0);
}

#[test]
fn exact_ratios_are_kept() {
    let c = snap_commensurate(FM * 26.0 / 3.0, FM, 64).unwrap();
    assert_eq!((c.p, c.q), (26, 3));
}

#[test]
fn off_grid_frequency_is_rejected_with_a_suggestion() {
    let mut net = Netlist::new(FM).unwrap();
    let a = net.node("a");
    net.add_element(
        "R",
        ElementKind::Resistor { resistance: 50.0 },
        a,
        NodeId::GROUND,
    )
    .unwrap();
    net.add_port(a, "P").unwrap();
    match simulate_steady_state(&net, 915.123457e6, &settings(2)) {
        Err(Error::NonCommensurate { suggested, .. }) => {
            assert!((suggested - 915.123457e6).abs() < 1e6)
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn series_rc_matches_its_impedance() {
    let (r, c) = (20.0, 2e-12);
    let mut net = Netlist::new(FM).unwrap();
    let a = net.node("a");
    let b = net.node("b");
    net.add_element("R", ElementKind::Resistor { resistance: r }, a, b)
        .unwrap();
    net.add_element(
        "C",
        ElementKind::Capacitor { capacitance: c },
        b,
        NodeId::GROUND,
    )
    .unwrap();
    net.add_port(a, "P").unwrap();
    let f = FM * 25.0 / 3.0;
    let ss = simulate_steady_state(&net, f, &settings(2)).unwrap();
    let z = Complex64::new(r, -1.0 / (2.0 * PI * f * c));
    let expected = (z - 50.0) / (z + 50.0);
    assert!(
        (ss.wave(0, 0) - expected).norm() < 1e-6,
        "{} vs {expected}",
        ss.wave(0, 0)
    );
    assert!(ss.wave(0, 1).norm() < 1e-6);
    assert!(ss.energy.imbalance() < 1e-6);
}

#[test]
fn series_rlc_at_resonance_passes_through_its_resistance() {
    let f = FM * 25.0 / 3.0;
    let (r, l) = (10.0, 40e-9);
    let c = 1.0 / ((2.0 * PI * f).powi(2) * l);
    let mut net = Netlist::new(FM).unwrap();
    let [a, b, x, y] = ["a", "b", "x", "y"].map(|n| net.node(n));
    net.add_element("R", ElementKind::Resistor { resistance: r }, a, x)
        .unwrap();
    let coil = ElementKind::Inductor {
        inductance: l,
        quality: f64::INFINITY,
        loss: InductorLoss::ConstantQ,
    };
    net.add_element("L", coil, x, y).unwrap();
    net.add_element("C", ElementKind::Capacitor { capacitance: c }, y, b)
        .unwrap();
    net.add_port(a, "P1").unwrap();
    net.add_port(b, "P2").unwrap();
    let ss = simulate_steady_state(&net, f, &settings(1)).unwrap();
    let s21 = 100.0 / (100.0 + r);
    assert!((ss.wave(1, 0) - s21).norm() < 1e-6, "{}", ss.wave(1, 0));
    assert!((ss.wave(0, 0) - r / (100.0 + r)).norm() < 1e-6);
}

#[test]
fn lti_netlist_agrees_with_floquet_solution_exactly() {
    let mut net = Netlist::new(FM).unwrap();
    let [a, b, x] = ["a", "b", "x"].map(|n| net.node(n));
    let coil = ElementKind::Inductor {
        inductance: 30e-9,
        quality: 40.0,
        loss: InductorLoss::ConstantR { reference: 900e6 },
    };
    net.add_element("L", coil, a, x).unwrap();
    net.add_element(
        "C",
        ElementKind::Capacitor { capacitance: 1e-12 },
        x,
        NodeId::GROUND,
    )
    .unwrap();
    net.add_element("R", ElementKind::Resistor { resistance: 75.0 }, x, b)
        .unwrap();
    net.add_port(a, "P1").unwrap();
    net.add_port(b, "P2").unwrap();
    let report = compare_with_cfsm(&net, &[880e6, 935e6], 4, &settings(4)).unwrap();
    assert!(report.max_deviation() < 1e-8, "{:?}", report.worst());
}

#[test]
fn switch_held_on_equals_its_on_resistance() {
    let f = FM * 28.0 / 3.0;
    let build = |kind: ElementKind| {
        let mut net = Netlist::new(FM).unwrap();
        let a = net.node("a");
        let b = net.node("b");
        net.add_element("S", kind, a, b).unwrap();
        net.add_element(
            "C",
            ElementKind::Capacitor { capacitance: 1e-12 },
            b,
            NodeId::GROUND,
        )
        .unwrap();
        net.add_port(a, "P").unwrap();
        net
    };
    let switch = build(ElementKind::Switch {
        r_on: 5.0,
        c_off: 0.1e-12,
        clock: Clock::always_on(FM, "s").unwrap(),
    });
    let mut resistor = build(ElementKind::Resistor { resistance: 5.0 });
    let (a, b) = (resistor.node("a"), resistor.node("b"));
    resistor
        .add_element(
            "Coff",
            ElementKind::Capacitor {
                capacitance: 0.1e-12,
            },
            a,
            b,
        )
        .unwrap();
    let x = simulate_steady_state(&switch, f, &settings(2)).unwrap();
    let y = simulate_steady_state(&resistor, f, &settings(2)).unwrap();
    for n in -2..=2 {
        assert!((x.wave(0, n) - y.wave(0, n)).norm() < 1e-12);
    }
}

#[test]
fn switched_capacitor_conserves_energy_and_repeats() {
    let ss = simulate_steady_state(&switched_cap_one_port(), 915e6, &settings(4)).unwrap();
    assert!(ss.energy.imbalance() < 1e-6, "{:?}", ss.energy);
    assert!(ss.residual < OracleSettings::default().tolerance);
    let scale = ss
        .voltages
        .iter()
        .flatten()
        .fold(0.0_f64, |m, v| m.max(v.abs()));
    for v in &ss.voltages {
        // no step discontinuities at the switching instants or across the
        // period boundary; a smooth carrier moves at most 2 pi / 64 of its
        // peak between samples
        let wrap = (v[0] - v[v.len() - 1]).abs();
        let jump = v
            .windows(2)
            .map(|w| (w[1] - w[0]).abs())
            .fold(wrap, f64::max);
        assert!(jump < 0.12 * scale, "jump {jump} of {scale}");
    }
    // lossless apart from the switch: nothing may exceed the incident power
    let out: f64 = (-4..=4).map(|n| ss.wave(0, n).norm_sqr()).sum();
    assert!(out <= 1.0 + 1e-9);
}

#[test]
fn floquet_truncation_error_shrinks_towards_the_oracle() {
    // Hard switching gives slowly decaying sidebands, so the Floquet result
    // only approaches the time-domain one as the order grows.
    let net = switched_cap_one_port();
    let deviation = |order| {
        compare_with_cfsm(&net, &[915e6], order, &settings(4))
            .unwrap()
            .max_deviation()
    };
    let d = [8, 16, 48].map(deviation);
    assert!(d[0] > d[1] && d[1] > d[2], "{d:?}");
    assert!(d[2] < 1e-2, "{d:?}");
}

#[test]
fn sinusoidal_capacitance_agrees_with_floquet_solution() {
    let mut net = Netlist::new(FM).unwrap();
    let [a, x] = ["a", "x"].map(|n| net.node(n));
    let c1 = Complex64::new(0.2e-12, 0.0);
    let spectrum = WaveformSpectrum::from_one_sided(FM, &[Complex64::new(1e-12, 0.0), c1]).unwrap();
    net.add_element("R", ElementKind::Resistor { resistance: 10.0 }, a, x)
        .unwrap();
    net.add_element(
        "C",
        ElementKind::ModulatedCap {
            capacitance: spectrum,
        },
        x,
        NodeId::GROUND,
    )
    .unwrap();
    net.add_port(a, "P").unwrap();
    let report = compare_with_cfsm(&net, &[FM * 26.0 / 3.0], 12, &settings(3)).unwrap();
    assert!(report.passes(DEFAULT_BOUND), "{:?}", report.worst());
    assert!(report.comparisons.len() >= 3);
    assert!(
        report.energy[0].imbalance() < 1e-4,
        "{:?}",
        report.energy[0]
    );
}
