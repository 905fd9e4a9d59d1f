use cfsm::circulator::{build_circulator, CirculatorConfig, Modulation};
use cfsm::elements::{branch_admittance, two_terminal_fsm, Clock, ElementKind, InductorLoss};
use cfsm::floquet::{
    admittance_to_scattering, FloquetMatrix, HarmonicGrid, MatrixKind, WaveformSpectrum,
};
use cfsm::linalg::CMatrix;
use cfsm::network::{
    aggregate_fsm, format_netlist, junction_fsm, netlist_to_fsm, parse_netlist, reduce_to_external,
    short_fsm, ConnectionMap, Netlist, NodeId,
};
use num_complex::Complex64;

const FM: f64 = 106e6;

/// Nodal analysis: stamp every branch admittance into the node matrix,
/// eliminate the non-port nodes, convert to scattering.
fn nodal_fsm(net: &Netlist, grid: &HarmonicGrid) -> FloquetMatrix {
    let h = grid.len();
    let n = net.node_count() - 1;
    let mut y = CMatrix::zeros(n * h, n * h);
    for e in net.elements() {
        let yb = branch_admittance(&e.kind, grid, net.z0())
            .unwrap()
            .into_data();
        let (a, b) = e.terminals;
        let terms: Vec<(usize, f64)> = [(a, 1.0), (b, -1.0)]
            .into_iter()
            .filter(|(t, _)| !t.is_ground())
            .map(|(t, s)| (t.0 - 1, s))
            .collect();
        for &(i, si) in &terms {
            for &(j, sj) in &terms {
                let mut view = y.view_mut((i * h, j * h), (h, h));
                view += &yb * Complex64::new(si * sj, 0.0);
            }
        }
    }
    let ports: Vec<usize> = net.ports().iter().map(|p| p.node.0 - 1).collect();
    let inner: Vec<usize> = (0..n).filter(|k| !ports.contains(k)).collect();
    let pick = |rows: &[usize], cols: &[usize]| {
        CMatrix::from_fn(rows.len() * h, cols.len() * h, |r, c| {
            y[(rows[r / h] * h + r % h, cols[c / h] * h + c % h)]
        })
    };
    let ypp = pick(&ports, &ports);
    let yext = if inner.is_empty() {
        ypp
    } else {
        let yii = pick(&inner, &inner);
        let x = yii.lu().solve(&pick(&inner, &ports)).unwrap();
        ypp - pick(&ports, &inner) * x
    };
    let yext = FloquetMatrix::new(*grid, ports.len(), MatrixKind::Admittance, yext).unwrap();
    admittance_to_scattering(&yext, net.z0()).unwrap()
}

fn mixed_netlist() -> Netlist {
    let clock = Clock::new(FM, 0.5, 1.1e-9, "s").unwrap();
    let other = Clock::new(FM, 0.4, 3.0e-9, "t").unwrap();
    let mut net = Netlist::new(FM).unwrap();
    let [p1, p2, p3, a, b] = ["p1", "p2", "p3", "a", "b"].map(|n| net.node(n));
    let g = NodeId::GROUND;
    let coil = ElementKind::Inductor {
        inductance: 35e-9,
        quality: 60.0,
        loss: InductorLoss::ConstantQ,
    };
    net.add_element("L1", coil, p1, a).unwrap();
    net.add_element(
        "C1",
        ElementKind::Capacitor {
            capacitance: 0.8e-12,
        },
        a,
        b,
    )
    .unwrap();
    net.add_element("R1", ElementKind::Resistor { resistance: 80.0 }, b, p2)
        .unwrap();
    let switch = ElementKind::Switch {
        r_on: 4.0,
        c_off: 0.1e-12,
        clock: other,
    };
    net.add_element("S1", switch, a, p3).unwrap();
    let sc = ElementKind::SwitchedCap {
        c_m: 1.2e-12,
        r_on: 3.0,
        c_off: 0.15e-12,
        clock,
    };
    net.add_element("X1", sc, b, g).unwrap();
    let c = WaveformSpectrum::from_one_sided(
        FM,
        &[
            Complex64::new(1e-12, 0.0),
            Complex64::new(0.1e-12, 0.05e-12),
        ],
    )
    .unwrap();
    net.add_element("M1", ElementKind::ModulatedCap { capacitance: c }, p3, g)
        .unwrap();
    net.add_element(
        "C2",
        ElementKind::Capacitor {
            capacitance: 0.5e-12,
        },
        p2,
        g,
    )
    .unwrap();
    net.add_port(p1, "P1").unwrap();
    net.add_port(p2, "P2").unwrap();
    net.add_port(p3, "P3").unwrap();
    net
}

#[test]
fn reduction_matches_nodal_analysis() {
    let net = mixed_netlist();
    for (f, order) in [(915e6, 3), (700e6, 5)] {
        let grid = HarmonicGrid::two_sided(f, FM, order).unwrap();
        let cfsm = netlist_to_fsm(&net, &grid).unwrap();
        let nodal = nodal_fsm(&net, &grid);
        let d = cfsm.max_abs_diff(&nodal).unwrap();
        assert!(d < 1e-9, "f = {f}: {d}");
    }
}

#[test]
fn circulator_reduction_matches_nodal_analysis() {
    for cfg in [
        CirculatorConfig::numerical_design(),
        CirculatorConfig::chip_design(),
    ] {
        let net = build_circulator(&cfg).unwrap();
        let grid = HarmonicGrid::two_sided(910e6, cfg.fm, 4).unwrap();
        let d = netlist_to_fsm(&net, &grid)
            .unwrap()
            .max_abs_diff(&nodal_fsm(&net, &grid))
            .unwrap();
        assert!(d < 1e-9, "{d}");
    }
}

#[test]
fn shunt_capacitor_two_port_matches_textbook_formula() {
    // capacitor (A, B), short on B, three-way junction joining A to two ports
    let grid = HarmonicGrid::two_sided(915e6, FM, 2).unwrap();
    let y = branch_admittance(
        &ElementKind::Capacitor {
            capacitance: 450e-15,
        },
        &grid,
        50.0,
    )
    .unwrap();
    let agg = aggregate_fsm(&[
        two_terminal_fsm(&y, 50.0).unwrap(),
        short_fsm(&grid),
        junction_fsm(3, &grid).unwrap(),
    ])
    .unwrap();
    let map = ConnectionMap::new(6, vec![(0, 3), (1, 2)], vec![4, 5]).unwrap();
    let s = reduce_to_external(&agg, &map).unwrap();
    for n in -2..=2 {
        let w = 2.0 * std::f64::consts::PI * grid.frequency(n);
        let s21 = Complex64::new(2.0, 0.0) / Complex64::new(2.0, w * 450e-15 * 50.0);
        assert!((s.entry(1, n, 0, n) - s21).norm() < 1e-10);
        assert!((s.entry(0, n, 0, n) - (s21 - 1.0)).norm() < 1e-10);
    }
}

#[test]
fn composition_is_associative() {
    // three series branches between two ports, reduced in one go and in two
    // stages
    let grid = HarmonicGrid::two_sided(900e6, FM, 3).unwrap();
    let kinds = [
        ElementKind::Resistor { resistance: 20.0 },
        ElementKind::Switch {
            r_on: 2.0,
            c_off: 0.2e-12,
            clock: Clock::new(FM, 0.5, 0.0, "s").unwrap(),
        },
        ElementKind::Capacitor { capacitance: 1e-12 },
    ];
    let fsm: Vec<FloquetMatrix> = kinds
        .iter()
        .map(|k| two_terminal_fsm(&branch_admittance(k, &grid, 50.0).unwrap(), 50.0).unwrap())
        .collect();
    // two-terminal blocks expose (A, B) referenced to ground; chain A0-B0-A1-B1-A2-B2
    let all = aggregate_fsm(&fsm).unwrap();
    let one_go = reduce_to_external(
        &all,
        &ConnectionMap::new(6, vec![(1, 2), (3, 4)], vec![0, 5]).unwrap(),
    )
    .unwrap();
    let first = reduce_to_external(
        &aggregate_fsm(&fsm[..2]).unwrap(),
        &ConnectionMap::new(4, vec![(1, 2)], vec![0, 3]).unwrap(),
    )
    .unwrap();
    let staged = reduce_to_external(
        &aggregate_fsm(&[first, fsm[2].clone()]).unwrap(),
        &ConnectionMap::new(4, vec![(1, 2)], vec![0, 3]).unwrap(),
    )
    .unwrap();
    let later = reduce_to_external(
        &aggregate_fsm(&fsm[1..]).unwrap(),
        &ConnectionMap::new(4, vec![(1, 2)], vec![0, 3]).unwrap(),
    )
    .unwrap();
    let right = reduce_to_external(
        &aggregate_fsm(&[fsm[0].clone(), later]).unwrap(),
        &ConnectionMap::new(4, vec![(1, 2)], vec![0, 3]).unwrap(),
    )
    .unwrap();
    assert!(one_go.max_abs_diff(&staged).unwrap() < 1e-12);
    assert!(one_go.max_abs_diff(&right).unwrap() < 1e-12);
}

#[test]
fn formatted_netlists_parse_back_to_the_same_circuit() {
    let mut cfg = CirculatorConfig::numerical_design();
    cfg.duty_error = 0.003;
    cfg.phase_imbalance = -0.01;
    let mut sinusoidal = cfg.clone();
    sinusoidal.modulation = Modulation::Sinusoidal { index: 0.6 };
    for net in [
        mixed_netlist(),
        build_circulator(&cfg).unwrap(),
        build_circulator(&sinusoidal).unwrap(),
    ] {
        let text = format_netlist(&net);
        let back = parse_netlist(&text).unwrap();
        assert_eq!(format_netlist(&back), text);
        let grid = HarmonicGrid::two_sided(905e6, net.modulation(), 3).unwrap();
        let d = netlist_to_fsm(&net, &grid)
            .unwrap()
            .max_abs_diff(&netlist_to_fsm(&back, &grid).unwrap())
            .unwrap();
        assert!(d < 1e-9, "{d}");
    }
}

#[test]
fn unconnected_port_is_reported() {
    let mut net = Netlist::new(FM).unwrap();
    let a = net.node("a");
    let b = net.node("b");
    net.add_element(
        "R",
        ElementKind::Resistor { resistance: 50.0 },
        a,
        NodeId::GROUND,
    )
    .unwrap();
    net.add_port(a, "P1").unwrap();
    net.add_port(b, "P2").unwrap();
    let grid = HarmonicGrid::two_sided(900e6, FM, 1).unwrap();
    assert!(matches!(
        netlist_to_fsm(&net, &grid),
        Err(cfsm::Error::UnconnectedPort(_))
    ));
}
