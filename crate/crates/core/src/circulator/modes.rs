//! Eigen-analysis of cyclic-symmetric three-ports and the rotating-mode
//! decomposition of port currents.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{Factorized, CONDITION_LIMIT};
use crate::network::Netlist;

use super::sweep::{solve_at, SweepSettings};

fn w() -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI / 3.0)
}

/// Eigenvalues and eigenvectors of a cyclic-symmetric 3x3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenDecomposition {
    pub lambda_c: Complex64,
    pub lambda_plus: Complex64,
    pub lambda_minus: Complex64,
    /// `[1, 1, 1]`, `[1, w, w*]`, `[1, w*, w]` with `w = exp(j 2 pi / 3)`.
    pub vectors: [[Complex64; 3]; 3],
}

/// Largest relative departure from `Y12 = Y31 = Y23`, `Y13 = Y21 = Y32` and
/// equal diagonals.
pub fn cyclic_violation(y: &DMatrix<Complex64>) -> f64 {
    let groups = [
        [(0, 0), (1, 1), (2, 2)],
        [(0, 1), (2, 0), (1, 2)],
        [(0, 2), (1, 0), (2, 1)],
    ];
    let scale = y
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    groups
        .iter()
        .flat_map(|g| [(g[0], g[1]), (g[1], g[2]), (g[0], g[2])].map(|(a, b)| (y[a] - y[b]).norm()))
        .fold(0.0, f64::max)
        / scale
}

pub fn eigen_decompose(y: &DMatrix<Complex64>, tolerance: f64) -> Result<EigenDecomposition> {
    if y.nrows() != 3 || y.ncols() != 3 {
        return Err(Error::DimensionMismatch(
            "eigen analysis needs a 3x3 matrix".into(),
        ));
    }
    let violation = cyclic_violation(y);
    if violation > tolerance {
        return Err(Error::NotCyclicSymmetric { violation });
    }
    let w = w();
    let one = Complex64::new(1.0, 0.0);
    Ok(EigenDecomposition {
        lambda_c: y[(0, 0)] + y[(1, 0)] + y[(2, 0)],
        lambda_plus: y[(0, 0)] + w.conj() * y[(1, 0)] + w * y[(2, 0)],
        lambda_minus: y[(0, 0)] + w * y[(1, 0)] + w.conj() * y[(2, 0)],
        vectors: [[one; 3], [one, w, w.conj()], [one, w.conj(), w]],
    })
}

/// Common and rotating components of three port currents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotatingModes {
    pub i_c: Complex64,
    pub i_plus: Complex64,
    pub i_minus: Complex64,
    /// `arg(I+)`, radians.
    pub alpha: f64,
}

impl RotatingModes {
    /// Port currents `I_k = I_c + I+ w^(k-1) + I- w^-(k-1)`.
    pub fn reconstruct(&self) -> [Complex64; 3] {
        let w = w();
        [0, 1, 2].map(|k| self.i_c + self.i_plus * w.powi(k) + self.i_minus * w.conj().powi(k))
    }

    /// `| |I+| - |I-| | / |I+|`.
    pub fn amplitude_imbalance(&self) -> f64 {
        (self.i_plus.norm() - self.i_minus.norm()).abs() / self.i_plus.norm()
    }

    /// `arg(I+) + arg(I-)` wrapped to `(-pi, pi]`, radians.
    pub fn phase_sum(&self) -> f64 {
        (self.i_plus * self.i_minus).arg()
    }

    /// Same modes with every phase measured from `reference`.
    pub fn referenced_to(&self, reference: Complex64) -> Self {
        let r = Complex64::from_polar(1.0, -reference.arg());
        let i_plus = self.i_plus * r;
        Self {
            i_c: self.i_c * r,
            i_plus,
            i_minus: self.i_minus * r,
            alpha: i_plus.arg(),
        }
    }
}

pub fn rotating_modes(currents: [Complex64; 3]) -> RotatingModes {
    let w = w();
    let third = Complex64::new(1.0 / 3.0, 0.0);
    let project = |v: [Complex64; 3]| -> Complex64 {
        third
            * v.iter()
                .zip(&currents)
                .map(|(a, b)| a.conj() * b)
                .sum::<Complex64>()
    };
    let one = Complex64::new(1.0, 0.0);
    let i_plus = project([one, w, w.conj()]);
    RotatingModes {
        i_c: project([one; 3]),
        i_plus,
        i_minus: project([one, w.conj(), w]),
        alpha: i_plus.arg(),
    }
}

/// Currents flowing into the three ports for a unit incident wave at the
/// first port with the others matched, from the fundamental scattering
/// matrix.
pub fn port_currents(s: &DMatrix<Complex64>, z0: f64) -> [Complex64; 3] {
    let root = z0.sqrt();
    [0, 1, 2].map(|k| {
        let a = if k == 0 { 1.0 } else { 0.0 };
        (Complex64::new(a, 0.0) - s[(k, 0)]) / root
    })
}

/// Mode eigenvalue magnitudes over a sweep and the frequencies where they
/// peak.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSplitting {
    pub frequencies: Vec<f64>,
    pub lambda_plus: Vec<Complex64>,
    pub lambda_minus: Vec<Complex64>,
    pub lambda_c: Vec<Complex64>,
    pub f_plus: f64,
    pub f_minus: f64,
}

impl ModeSplitting {
    /// Half the separation of the two rotating-mode resonances.
    pub fn delta_f(&self) -> f64 {
        (self.f_minus - self.f_plus) / 2.0
    }
}

fn argmax_refined(f: &[f64], v: &[f64]) -> f64 {
    let i = (0..v.len())
        .max_by(|&a, &b| v[a].total_cmp(&v[b]))
        .expect("non-empty");
    if i == 0 || i + 1 == v.len() {
        return f[i];
    }
    let (y0, y1, y2) = (v[i - 1], v[i], v[i + 1]);
    let denom = y0 - 2.0 * y1 + y2;
    if denom == 0.0 {
        return f[i];
    }
    let h = f[i + 1] - f[i];
    f[i] + 0.5 * h * (y0 - y2) / denom
}

/// Rotating-mode admittance eigenvalues of the fundamental admittance matrix
/// over `freqs`. The cyclic-symmetry check uses `tolerance`.
pub fn mode_splitting(
    net: &Netlist,
    freqs: &[f64],
    settings: SweepSettings,
    tolerance: f64,
) -> Result<ModeSplitting> {
    let mut out = ModeSplitting {
        frequencies: freqs.to_vec(),
        lambda_plus: Vec::new(),
        lambda_minus: Vec::new(),
        lambda_c: Vec::new(),
        f_plus: f64::NAN,
        f_minus: f64::NAN,
    };
    for &f in freqs {
        let y = fundamental_admittance(net, f, settings)?;
        let e = eigen_decompose(&y, tolerance).map_err(|e| e.at(f))?;
        out.lambda_plus.push(e.lambda_plus);
        out.lambda_minus.push(e.lambda_minus);
        out.lambda_c.push(e.lambda_c);
    }
    let mag = |v: &[Complex64]| v.iter().map(|x| x.norm()).collect::<Vec<_>>();
    out.f_plus = argmax_refined(freqs, &mag(&out.lambda_plus));
    out.f_minus = argmax_refined(freqs, &mag(&out.lambda_minus));
    Ok(out)
}

/// Admittance matrix seen at the ports at harmonic 0, from the fundamental
/// scattering block alone.
pub fn fundamental_admittance(
    net: &Netlist,
    f: f64,
    settings: SweepSettings,
) -> Result<DMatrix<Complex64>> {
    let s = solve_at(net, f, settings)?.fundamental();
    let n = s.nrows();
    let eye = DMatrix::<Complex64>::identity(n, n);
    let lu = Factorized::new(&eye + &s);
    let condition = lu.condition_estimate();
    if !(condition <= CONDITION_LIMIT) {
        return Err(Error::SingularConversion { condition }.at(f));
    }
    let y = lu
        .solve(&(&eye - &s))
        .ok_or(Error::SingularConversion { condition })?;
    Ok(y / Complex64::new(net.z0(), 0.0))
}
