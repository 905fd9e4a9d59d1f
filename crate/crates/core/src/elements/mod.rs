//! Floquet admittance and scattering builders for the circuit elements.
//!
//! Every element is a two-terminal branch. Builders return the branch
//! admittance `y` (current into terminal A per volt across A-B) as a one-port
//! admittance-kind [`FloquetMatrix`]; [`two_terminal_fsm`] lifts it to the
//! ground-referenced two-port scattering matrix used by the network reducer.

mod clock;

pub use clock::{Clock, ClockLevel};

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::floquet::{
    scattering_to_admittance, toeplitz_operator, FloquetMatrix, HarmonicGrid, MatrixKind,
    WaveformSpectrum,
};
use crate::linalg::{CMatrix, Factorized, CONDITION_LIMIT};
use crate::network::{aggregate_fsm, reduce_to_external, short_fsm, ConnectionMap, NodeId};

/// How an inductor's series loss resistance depends on frequency.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum InductorLoss {
    /// `R = |omega| L / Q` at every harmonic.
    #[default]
    ConstantQ,
    /// `R = 2 pi f_ref L / Q` at every harmonic.
    ConstantR { reference: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ElementKind {
    Resistor {
        resistance: f64,
    },
    /// `quality` may be infinite for a lossless coil.
    Inductor {
        inductance: f64,
        quality: f64,
        loss: InductorLoss,
    },
    Capacitor {
        capacitance: f64,
    },
    /// Clocked conductance `s(t) / r_on` in parallel with `c_off`.
    Switch {
        r_on: f64,
        c_off: f64,
        clock: Clock,
    },
    /// Fixed capacitor `c_m` (terminal A side) in series with a switch
    /// (terminal B side).
    SwitchedCap {
        c_m: f64,
        r_on: f64,
        c_off: f64,
        clock: Clock,
    },
    /// Time-varying capacitance in charge form, `i = d(C(t) v) / dt`.
    ModulatedCap {
        capacitance: WaveformSpectrum,
    },
}

impl ElementKind {
    pub fn validate(&self) -> Result<()> {
        fn positive(name: &str, v: f64) -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(
                    name,
                    format!("must be positive and finite, got {v}"),
                ))
            }
        }
        fn non_negative(name: &str, v: f64) -> Result<()> {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(name, format!("must be non-negative, got {v}")))
            }
        }
        match self {
            ElementKind::Resistor { resistance } => positive("resistance", *resistance),
            ElementKind::Inductor {
                inductance,
                quality,
                loss,
            } => {
                positive("inductance", *inductance)?;
                if !(*quality > 0.0) {
                    return Err(Error::param(
                        "quality",
                        format!("must be positive, got {quality}"),
                    ));
                }
                if let InductorLoss::ConstantR { reference } = loss {
                    positive("loss reference frequency", *reference)?;
                }
                Ok(())
            }
            ElementKind::Capacitor { capacitance } => positive("capacitance", *capacitance),
            ElementKind::Switch { r_on, c_off, .. } => {
                positive("r_on", *r_on)?;
                non_negative("c_off", *c_off)
            }
            ElementKind::SwitchedCap {
                c_m, r_on, c_off, ..
            } => {
                positive("c_m", *c_m)?;
                positive("r_on", *r_on)?;
                non_negative("c_off", *c_off)
            }
            ElementKind::ModulatedCap { capacitance } => {
                let min = capacitance.min_sampled(64 * capacitance.max_harmonic().max(1));
                if min > 0.0 {
                    Ok(())
                } else {
                    Err(Error::NonPhysicalCapacitance { min })
                }
            }
        }
    }

    /// True when the element has no time variation.
    pub fn is_static(&self) -> bool {
        match self {
            ElementKind::Resistor { .. }
            | ElementKind::Inductor { .. }
            | ElementKind::Capacitor { .. } => true,
            ElementKind::Switch { clock, .. } | ElementKind::SwitchedCap { clock, .. } => {
                !clock.is_switching()
            }
            ElementKind::ModulatedCap { capacitance } => (1..=capacitance.max_harmonic() as i64)
                .all(|k| capacitance.coefficient(k).unwrap_or_default().norm() == 0.0),
        }
    }

    pub fn clock(&self) -> Option<&Clock> {
        match self {
            ElementKind::Switch { clock, .. } | ElementKind::SwitchedCap { clock, .. } => {
                Some(clock)
            }
            _ => None,
        }
    }

    pub fn clock_mut(&mut self) -> Option<&mut Clock> {
        match self {
            ElementKind::Switch { clock, .. } | ElementKind::SwitchedCap { clock, .. } => {
                Some(clock)
            }
            _ => None,
        }
    }
}

/// An element placed between two nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementSpec {
    pub name: String,
    pub kind: ElementKind,
    pub terminals: (NodeId, NodeId),
}

impl ElementSpec {
    pub fn new(name: impl Into<String>, kind: ElementKind, a: NodeId, b: NodeId) -> Self {
        Self {
            name: name.into(),
            kind,
            terminals: (a, b),
        }
    }
}

fn omega(grid: &HarmonicGrid, n: i64) -> f64 {
    2.0 * PI * grid.frequency(n)
}

/// Branch admittance of a resistor, inductor or capacitor; harmonic-diagonal.
pub fn lti_branch_admittance(kind: &ElementKind, grid: &HarmonicGrid) -> Result<FloquetMatrix> {
    kind.validate()?;
    let per_harmonic: Box<dyn Fn(i64) -> Complex64> = match *kind {
        ElementKind::Resistor { resistance } => {
            Box::new(move |_| Complex64::new(1.0 / resistance, 0.0))
        }
        ElementKind::Capacitor { capacitance } => {
            Box::new(move |n| Complex64::new(0.0, omega(grid, n) * capacitance))
        }
        ElementKind::Inductor {
            inductance,
            quality,
            loss,
        } => Box::new(move |n| {
            let w = omega(grid, n);
            let r = match loss {
                InductorLoss::ConstantQ => w.abs() * inductance / quality,
                InductorLoss::ConstantR { reference } => {
                    2.0 * PI * reference * inductance / quality
                }
            };
            Complex64::new(1.0, 0.0) / Complex64::new(r, w * inductance)
        }),
        _ => {
            return Err(Error::param("kind", "not a time-invariant element"));
        }
    };
    Ok(FloquetMatrix::harmonic_diagonal(
        *grid,
        1,
        MatrixKind::Admittance,
        |_, _, n| per_harmonic(n),
    ))
}

/// `T(s / r_on) + diag(j omega C_off)`.
pub fn switch_admittance(
    r_on: f64,
    c_off: f64,
    clock: &Clock,
    grid: &HarmonicGrid,
) -> Result<FloquetMatrix> {
    if !(r_on > 0.0) || !(c_off >= 0.0) {
        return Err(Error::param("switch", "needs r_on > 0 and c_off >= 0"));
    }
    if (clock.modulation() - grid.modulation()).abs() > 1e-12 * grid.modulation() {
        return Err(Error::GridMismatch);
    }
    let conductance = clock.spectrum(2 * grid.order())?.scaled(1.0 / r_on);
    let mut y = toeplitz_operator(&conductance, grid)?.into_data();
    for (k, n) in grid.harmonics().enumerate() {
        y[(k, k)] += Complex64::new(0.0, omega(grid, n) * c_off);
    }
    Ok(FloquetMatrix::from_parts(
        *grid,
        1,
        MatrixKind::Admittance,
        y,
    ))
}

/// Branch admittance of `c_m` in series with a switch, obtained by composing
/// the two scattering matrices through the interconnect reducer.
pub fn switched_cap_branch(
    c_m: f64,
    r_on: f64,
    c_off: f64,
    clock: &Clock,
    grid: &HarmonicGrid,
    z0: f64,
) -> Result<FloquetMatrix> {
    let cap = lti_branch_admittance(&ElementKind::Capacitor { capacitance: c_m }, grid)?;
    let switch = switch_admittance(r_on, c_off, clock, grid)?;
    let cap_fsm = two_terminal_fsm(&cap, z0)?;
    let switch_fsm = two_terminal_fsm(&switch, z0)?;
    // terminals: 0 = A, 1 = cap inner, 2 = switch inner, 3 = switch ground side, 4 = short
    let agg = aggregate_fsm(&[cap_fsm, switch_fsm, short_fsm(grid)])?;
    let map = ConnectionMap::new(5, vec![(1, 2), (3, 4)], vec![0])?;
    let s = reduce_to_external(&agg, &map)?;
    scattering_to_admittance(&s, z0)
}

/// `Y[m, n] = j omega_m C_(m - n)`.
pub fn modulated_cap_admittance(
    capacitance: &WaveformSpectrum,
    grid: &HarmonicGrid,
) -> Result<FloquetMatrix> {
    ElementKind::ModulatedCap {
        capacitance: capacitance.clone(),
    }
    .validate()?;
    let h = grid.len();
    let needed = 2 * grid.order() as i64;
    if (capacitance.max_harmonic() as i64) < needed {
        // missing high harmonics of a band-limited profile are zero
        let mut padded = vec![Complex64::new(0.0, 0.0); 2 * needed as usize + 1];
        for k in -(capacitance.max_harmonic() as i64)..=capacitance.max_harmonic() as i64 {
            padded[(k + needed) as usize] = capacitance.coefficient(k).unwrap_or_default();
        }
        let padded = WaveformSpectrum::from_two_sided(capacitance.fundamental(), padded)?;
        return modulated_cap_admittance(&padded, grid);
    }
    let toeplitz = toeplitz_operator(capacitance, grid)?.into_data();
    let data = CMatrix::from_fn(h, h, |r, c| {
        Complex64::new(0.0, omega(grid, grid.harmonic_at(r))) * toeplitz[(r, c)]
    });
    Ok(FloquetMatrix::from_parts(
        *grid,
        1,
        MatrixKind::Admittance,
        data,
    ))
}

/// Branch admittance of any element kind.
pub fn branch_admittance(
    kind: &ElementKind,
    grid: &HarmonicGrid,
    z0: f64,
) -> Result<FloquetMatrix> {
    kind.validate()?;
    match kind {
        ElementKind::Resistor { .. }
        | ElementKind::Inductor { .. }
        | ElementKind::Capacitor { .. } => lti_branch_admittance(kind, grid),
        ElementKind::Switch { r_on, c_off, clock } => switch_admittance(*r_on, *c_off, clock, grid),
        ElementKind::SwitchedCap {
            c_m,
            r_on,
            c_off,
            clock,
        } => switched_cap_branch(*c_m, *r_on, *c_off, clock, grid, z0),
        ElementKind::ModulatedCap { capacitance } => modulated_cap_admittance(capacitance, grid),
    }
}

/// Two-port scattering matrix (ports A, B referenced to ground) of a branch
/// with one-port admittance `y`, i.e. of `Y = [[y, -y], [-y, y]]`.
///
/// The common mode sees an open (`S = I`); the differential mode sees
/// `S_d = (I - 2 Z0 y)(I + 2 Z0 y)^-1`.
pub fn two_terminal_fsm(y: &FloquetMatrix, z0: f64) -> Result<FloquetMatrix> {
    y.require(MatrixKind::Admittance)?;
    if y.ports() != 1 {
        return Err(Error::DimensionMismatch(
            "branch admittance must be a one-port".into(),
        ));
    }
    let h = y.harmonics();
    let eye = CMatrix::identity(h, h);
    let zy = y.data() * Complex64::new(2.0 * z0, 0.0);
    let s_d = if y.off_harmonic_magnitude() == 0.0 {
        CMatrix::from_fn(h, h, |r, c| {
            if r == c {
                let v = zy[(r, r)];
                (Complex64::new(1.0, 0.0) - v) / (Complex64::new(1.0, 0.0) + v)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    } else {
        let lu = Factorized::new(&eye + &zy);
        let condition = lu.condition_estimate();
        if !(condition <= CONDITION_LIMIT) {
            return Err(Error::SingularConversion { condition });
        }
        lu.solve(&(&eye - &zy))
            .ok_or(Error::SingularConversion { condition })?
    };
    let half = Complex64::new(0.5, 0.0);
    let diag = (&eye + &s_d) * half;
    let off = (&eye - &s_d) * half;
    let mut data = CMatrix::zeros(2 * h, 2 * h);
    data.view_mut((0, 0), (h, h)).copy_from(&diag);
    data.view_mut((h, h), (h, h)).copy_from(&diag);
    data.view_mut((0, h), (h, h)).copy_from(&off);
    data.view_mut((h, 0), (h, h)).copy_from(&off);
    Ok(FloquetMatrix::from_parts(
        *y.grid(),
        2,
        MatrixKind::Scattering,
        data,
    ))
}
