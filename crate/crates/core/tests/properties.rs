use std::f64::consts::PI;

use cfsm::circulator::{eigen_decompose, extract_metrics, rotating_modes, SParamSet};
use cfsm::elements::{Clock, ElementKind, InductorLoss};
use cfsm::floquet::{
    admittance_to_scattering, scattering_to_admittance, square_wave_spectrum, toeplitz_operator,
    FloquetMatrix, HarmonicGrid, MatrixKind, WaveformSpectrum,
};
use cfsm::linalg::CMatrix;
use cfsm::network::{netlist_to_fsm, Netlist, NodeId};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

const FM: f64 = 100e6;

fn complex() -> impl Strategy<Value = Complex64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

/// Either an LTI ladder or one with switches and switched capacitors.
#[derive(Debug, Clone)]
struct Ladder {
    r: f64,
    l: f64,
    q: f64,
    c: f64,
    r_on: f64,
    c_off: f64,
    duty: f64,
    delay: f64,
    switched: bool,
}

fn ladder() -> impl Strategy<Value = Ladder> {
    (
        (1.0..200.0f64, 5e-9..60e-9, 5.0..200.0f64, 0.2e-12..3e-12),
        (
            0.5..20.0f64,
            0.01e-12..0.5e-12,
            0.1..0.9f64,
            0.0..1.0f64,
            any::<bool>(),
        ),
    )
        .prop_map(
            |((r, l, q, c), (r_on, c_off, duty, delay, switched))| Ladder {
                r,
                l,
                q,
                c,
                r_on,
                c_off,
                duty,
                delay: delay / FM,
                switched,
            },
        )
}

impl Ladder {
    fn netlist(&self) -> Netlist {
        let mut net = Netlist::new(FM).unwrap();
        let [a, b, x] = ["a", "b", "x"].map(|n| net.node(n));
        let g = NodeId::GROUND;
        let coil = ElementKind::Inductor {
            inductance: self.l,
            quality: self.q,
            loss: InductorLoss::ConstantQ,
        };
        net.add_element("L", coil, a, x).unwrap();
        net.add_element("R", ElementKind::Resistor { resistance: self.r }, x, b)
            .unwrap();
        net.add_element(
            "C",
            ElementKind::Capacitor {
                capacitance: self.c,
            },
            x,
            g,
        )
        .unwrap();
        if self.switched {
            let clock = Clock::new(FM, self.duty, self.delay, "s").unwrap();
            let switch = ElementKind::Switch {
                r_on: self.r_on,
                c_off: self.c_off,
                clock: Clock::new(FM, self.duty, self.delay, "t")
                    .unwrap()
                    .delayed(0.3 / FM),
            };
            net.add_element("S", switch, a, b).unwrap();
            let sc = ElementKind::SwitchedCap {
                c_m: 2.0 * self.c,
                r_on: self.r_on,
                c_off: self.c_off,
                clock,
            };
            net.add_element("X", sc, b, g).unwrap();
        }
        net.add_port(a, "P1").unwrap();
        net.add_port(b, "P2").unwrap();
        net
    }
}

/// Three-port sweep with a parabolic isolation dip, smooth loss and a
/// linear transmission phase.
fn synthetic_sweep(
    f0: f64,
    width: f64,
    depth: f64,
    rotation: f64,
    scale: f64,
    offset: f64,
) -> SParamSet {
    let freqs: Vec<f64> = (0..41).map(|k| 880e6 + 1.5e6 * k as f64).collect();
    let turn = Complex64::from_polar(1.0, rotation);
    let s = freqs
        .iter()
        .map(|&f| {
            let x = (f - f0) / width;
            let ix = depth / (1.0 + x * x);
            let s31 = Complex64::from_polar(10f64.powf(-ix / 20.0), 0.3 * x);
            let s21 = Complex64::from_polar(0.8 - 0.01 * x * x, -2.0 * PI * f / 200e6);
            let s11 = Complex64::from_polar(0.2 + 0.02 * x, 1.0);
            let mut m = DMatrix::from_element(3, 3, Complex64::new(0.1, 0.0));
            m[(0, 0)] = s11;
            m[(1, 0)] = s21;
            m[(2, 0)] = s31;
            m * turn
        })
        .collect();
    let relabeled = freqs.iter().map(|f| scale * f + offset).collect();
    SParamSet::new(relabeled, vec!["TX".into(), "ANT".into(), "RX".into()], s).unwrap()
}

fn circulant(a: Complex64, b: Complex64, c: Complex64) -> DMatrix<Complex64> {
    // Y11 = a, Y21 = b, Y31 = c, shifted around the ring
    DMatrix::from_row_slice(3, 3, &[a, c, b, b, a, c, c, b, a])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn toeplitz_entries_follow_the_coefficients(
        order in 1usize..5,
        coeffs in prop::collection::vec(complex(), 9),
        c0 in -1.0..1.0f64,
    ) {
        let mut positive = vec![Complex64::new(c0, 0.0)];
        positive.extend(coeffs.iter().take(2 * order));
        let spec = WaveformSpectrum::from_one_sided(FM, &positive).unwrap();
        let grid = HarmonicGrid::two_sided(915e6, FM, order).unwrap();
        let t = toeplitz_operator(&spec, &grid).unwrap();
        for m in grid.harmonics() {
            for n in grid.harmonics() {
                prop_assert_eq!(t.entry(0, m, 0, n), spec.coefficient(m - n).unwrap());
            }
        }
    }

    #[test]
    fn square_wave_toeplitz_is_linear_in_the_waveform(
        duty in 0.05..0.95f64,
        delay in 0.0..1.0f64,
        order in 1usize..5,
    ) {
        let grid = HarmonicGrid::two_sided(915e6, FM, order).unwrap();
        let on = square_wave_spectrum(duty, delay / FM, FM, 2 * order).unwrap();
        let sum = on.add(&on.complement()).unwrap();
        let t = toeplitz_operator(&sum, &grid).unwrap();
        let identity = FloquetMatrix::identity(grid, 1, MatrixKind::Admittance);
        prop_assert!(t.max_abs_diff(&identity).unwrap() < 1e-12);
    }

    #[test]
    fn admittance_scattering_round_trip(
        order in 1usize..3,
        seed in prop::collection::vec(complex(), 64),
    ) {
        let grid = HarmonicGrid::two_sided(915e6, FM, order).unwrap();
        let dim = 2 * grid.len();
        let a = CMatrix::from_fn(dim, dim, |r, c| seed[(r * 7 + c * 3) % seed.len()] * 0.02);
        // positive definite Hermitian part: passive, and I + Z0 Y invertible
        let y = &a * a.adjoint() + CMatrix::identity(dim, dim) * Complex64::new(1e-3, 0.0)
            + CMatrix::from_fn(dim, dim, |r, c| Complex64::new(0.0, 0.01 * ((r + c) % 5) as f64));
        let y = FloquetMatrix::new(grid, 2, MatrixKind::Admittance, y).unwrap();
        let s = admittance_to_scattering(&y, 50.0).unwrap();
        prop_assert!(s.spectral_norm() <= 1.0 + 1e-9);
        let back = scattering_to_admittance(&s, 50.0).unwrap();
        prop_assert!(back.max_abs_diff(&y).unwrap() < 1e-9);
    }

    #[test]
    fn static_networks_are_reciprocal(l in ladder(), f in 600e6..1.2e9f64) {
        let l = Ladder { switched: false, ..l };
        let grid = HarmonicGrid::two_sided(f, FM, 2).unwrap();
        let s = netlist_to_fsm(&l.netlist(), &grid).unwrap();
        prop_assert!(s.max_abs_diff(&s.transpose()).unwrap() < 1e-12);
        prop_assert!(s.off_harmonic_magnitude() < 1e-12);
    }

    #[test]
    fn passive_networks_do_not_amplify(l in ladder(), f in 600e6..1.2e9f64, order in 1usize..5) {
        let grid = HarmonicGrid::two_sided(f, FM, order).unwrap();
        let s = netlist_to_fsm(&l.netlist(), &grid).unwrap();
        prop_assert!(s.spectral_norm() <= 1.0 + 1e-9, "{}", s.spectral_norm());
    }

    #[test]
    fn metrics_ignore_phase_rotation_and_axis_relabeling(
        f0 in 900e6..920e6f64,
        width in 3e6..20e6f64,
        depth in 25.0..60.0f64,
        rotation in -PI..PI,
        scale in 0.2..5.0f64,
        offset in -100e6..100e6f64,
    ) {
        let base = extract_metrics(&synthetic_sweep(f0, width, depth, 0.0, 1.0, 0.0), 20.0).unwrap();
        let moved = extract_metrics(&synthetic_sweep(f0, width, depth, rotation, scale, offset), 20.0).unwrap();
        prop_assert!((moved.f_center - (scale * base.f_center + offset)).abs() < 1e-6 * moved.f_center.abs().max(1.0));
        prop_assert!((moved.ix_db - base.ix_db).abs() < 1e-9);
        prop_assert!((moved.il_db - base.il_db).abs() < 1e-9);
        prop_assert!((moved.rl_db - base.rl_db).abs() < 1e-9);
        prop_assert!((moved.bw * moved.f_center - scale * base.bw * base.f_center).abs() < 1e-6 * scale * base.f_center);
        prop_assert!((moved.phase_deviation_deg - base.phase_deviation_deg).abs() < 1e-6);
    }

    #[test]
    fn cyclic_eigenvectors_and_trace(a in complex(), b in complex(), c in complex()) {
        let y = circulant(a, b, c);
        let e = eigen_decompose(&y, 1e-12).unwrap();
        prop_assert!((e.lambda_c + e.lambda_plus + e.lambda_minus - 3.0 * a).norm() < 1e-12);
        for (v, lambda) in e.vectors.iter().zip([e.lambda_c, e.lambda_plus, e.lambda_minus]) {
            let v = nalgebra::DVector::from_column_slice(v);
            prop_assert!((&y * &v - &v * lambda).norm() < 1e-12);
        }
        if (b - c).norm() < 1e-15 {
            prop_assert!((e.lambda_plus - e.lambda_minus).norm() < 1e-12);
        }
    }

    #[test]
    fn rotating_modes_round_trip(i1 in complex(), i2 in complex(), i3 in complex()) {
        let modes = rotating_modes([i1, i2, i3]);
        for (x, y) in modes.reconstruct().iter().zip([i1, i2, i3]) {
            prop_assert!((x - y).norm() < 1e-12);
        }
    }
}

#[test]
fn reciprocal_cyclic_matrix_is_degenerate() {
    let y = circulant(
        Complex64::new(0.02, 0.01),
        Complex64::new(-0.004, 0.003),
        Complex64::new(-0.004, 0.003),
    );
    let e = eigen_decompose(&y, 1e-12).unwrap();
    assert!((e.lambda_plus - e.lambda_minus).norm() < 1e-15);
}

#[test]
fn thirty_degree_mode_split() {
    let root = 3f64.sqrt();
    let modes = rotating_modes([root, -root, 0.0].map(|x| Complex64::new(x, 0.0)));
    assert!(modes.i_c.norm() < 1e-15);
    assert!((modes.alpha.to_degrees() - 30.0).abs() < 1e-12);
}
