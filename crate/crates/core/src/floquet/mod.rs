//! Harmonic bookkeeping and the linear algebra of the Floquet frequency
//! domain.
//!
//! A linear periodically time-varying network probed at `f` responds only at
//! the sidebands `f + n fm`. Truncating to `|n| <= N` turns every element into
//! a finite matrix over `(port, harmonic)` pairs: memoryless multiplication by
//! a periodic waveform becomes a Toeplitz matrix of its Fourier coefficients,
//! and admittance and scattering descriptions are related through the usual
//! power-wave map with a single real reference impedance.

mod grid;
mod matrix;
mod spectrum;

pub use grid::{GridPolicy, HarmonicGrid, DC_GUARD};
pub use matrix::{FloquetMatrix, MatrixKind};
pub use spectrum::WaveformSpectrum;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, Factorized, CONDITION_LIMIT};

/// Default truncation order.
pub const DEFAULT_ORDER: usize = 16;

/// Default reference impedance in ohms.
pub const DEFAULT_Z0: f64 = 50.0;

pub fn build_harmonic_grid(base: f64, modulation: f64, order: usize) -> Result<HarmonicGrid> {
    HarmonicGrid::new(base, modulation, order)
}

pub fn square_wave_spectrum(
    duty: f64,
    delay: f64,
    modulation: f64,
    max_k: usize,
) -> Result<WaveformSpectrum> {
    WaveformSpectrum::square_wave(duty, delay, modulation, max_k)
}

/// One-port admittance-kind matrix `T[m, n] = c_(m - n)` representing
/// multiplication by the waveform.
pub fn toeplitz_operator(
    spectrum: &WaveformSpectrum,
    grid: &HarmonicGrid,
) -> Result<FloquetMatrix> {
    if (spectrum.fundamental() - grid.modulation()).abs() > 1e-12 * grid.modulation() {
        return Err(Error::GridMismatch);
    }
    let needed = 2 * grid.order();
    if spectrum.max_harmonic() < needed {
        return Err(Error::MissingCoefficient(
            spectrum.max_harmonic() as i64 + 1,
        ));
    }
    let h = grid.len();
    let data = CMatrix::from_fn(h, h, |r, c| {
        spectrum
            .coefficient(r as i64 - c as i64)
            .expect("range checked above")
    });
    Ok(FloquetMatrix::from_parts(
        *grid,
        1,
        MatrixKind::Admittance,
        data,
    ))
}

/// `S = (I - Z0 Y)(I + Z0 Y)^-1`.
pub fn admittance_to_scattering(y: &FloquetMatrix, z0: f64) -> Result<FloquetMatrix> {
    y.require(MatrixKind::Admittance)?;
    check_z0(z0)?;
    let n = y.dim();
    let eye = CMatrix::identity(n, n);
    let zy = y.data() * Complex64::new(z0, 0.0);
    // (I + Z0 Y)^-1 commutes with (I - Z0 Y)
    let s = solve_checked(&eye + &zy, &(&eye - &zy))?;
    Ok(FloquetMatrix::from_parts(
        *y.grid(),
        y.ports(),
        MatrixKind::Scattering,
        s,
    ))
}

/// `Y = (I - S)(I + S)^-1 / Z0`.
pub fn scattering_to_admittance(s: &FloquetMatrix, z0: f64) -> Result<FloquetMatrix> {
    s.require(MatrixKind::Scattering)?;
    check_z0(z0)?;
    let n = s.dim();
    let eye = CMatrix::identity(n, n);
    let y = solve_checked(&eye + s.data(), &(&eye - s.data()))?;
    Ok(FloquetMatrix::from_parts(
        *s.grid(),
        s.ports(),
        MatrixKind::Admittance,
        y / Complex64::new(z0, 0.0),
    ))
}

fn check_z0(z0: f64) -> Result<()> {
    if z0 > 0.0 && z0.is_finite() {
        Ok(())
    } else {
        Err(Error::param("z0", format!("must be positive, got {z0}")))
    }
}

fn solve_checked(a: CMatrix, b: &CMatrix) -> Result<CMatrix> {
    let lu = Factorized::new(a);
    let condition = lu.condition_estimate();
    if !(condition <= CONDITION_LIMIT) {
        return Err(Error::SingularConversion { condition });
    }
    lu.solve(b).ok_or(Error::SingularConversion { condition })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::linalg::frobenius;

    const FM: f64 = 106e6;

    fn grid(order: usize) -> HarmonicGrid {
        HarmonicGrid::new(915e6, FM, order).unwrap()
    }

    #[test]
    fn constant_waveform_is_scaled_identity() {
        let g = grid(3);
        let w = WaveformSpectrum::constant(0.02, FM, 6).unwrap();
        let t = toeplitz_operator(&w, &g).unwrap();
        let want = CMatrix::identity(7, 7) * Complex64::new(0.02, 0.0);
        assert!(crate::linalg::max_abs_diff(t.data(), &want) < 1e-18);
    }

    #[test]
    fn half_duty_square_first_order_layout() {
        let g = grid(1);
        let w = WaveformSpectrum::square_wave(0.5, 0.0, FM, 2).unwrap();
        let t = toeplitz_operator(&w, &g).unwrap();
        let c1 = w.coefficient(1).unwrap();
        let c = |re: f64| Complex64::new(re, 0.0);
        let want = CMatrix::from_row_slice(
            3,
            3,
            &[
                c(0.5),
                c1.conj(),
                c(0.0),
                c1,
                c(0.5),
                c1.conj(),
                c(0.0),
                c1,
                c(0.5),
            ],
        );
        assert!(crate::linalg::max_abs_diff(t.data(), &want) < 1e-16);
        assert!((c1.norm() - 1.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn toeplitz_is_linear() {
        let g = grid(2);
        let a = WaveformSpectrum::square_wave(0.3, 1e-9, FM, 4).unwrap();
        let b = WaveformSpectrum::cosine(1.0, 0.4, 0.2, FM, 4).unwrap();
        let sum = toeplitz_operator(&a.add(&b).unwrap(), &g).unwrap();
        let parts = toeplitz_operator(&a, &g)
            .unwrap()
            .add(&toeplitz_operator(&b, &g).unwrap())
            .unwrap();
        assert!(sum.max_abs_diff(&parts).unwrap() < 1e-15);
    }

    #[test]
    fn toeplitz_needs_twice_the_order() {
        let g = grid(3);
        let w = WaveformSpectrum::square_wave(0.5, 0.0, FM, 5).unwrap();
        assert_eq!(toeplitz_operator(&w, &g), Err(Error::MissingCoefficient(6)));
    }

    #[test]
    fn open_and_matched_loads() {
        let g = grid(2);
        let open = FloquetMatrix::zeros(g, 1, MatrixKind::Admittance);
        let s = admittance_to_scattering(&open, 50.0).unwrap();
        assert!(
            s.max_abs_diff(&FloquetMatrix::identity(g, 1, MatrixKind::Scattering))
                .unwrap()
                < 1e-15
        );

        let matched = FloquetMatrix::identity(g, 1, MatrixKind::Admittance)
            .scaled(Complex64::new(1.0 / 50.0, 0.0));
        let s = admittance_to_scattering(&matched, 50.0).unwrap();
        assert!(s.data().iter().all(|v| v.norm() < 1e-15));
    }

    #[test]
    fn static_capacitor_reflection() {
        let g = grid(2);
        let cap = 450e-15;
        let y = FloquetMatrix::harmonic_diagonal(g, 1, MatrixKind::Admittance, |_, _, n| {
            Complex64::new(0.0, 2.0 * PI * g.frequency(n) * cap)
        });
        let s = admittance_to_scattering(&y, 50.0).unwrap();
        for n in g.harmonics() {
            let x = 2.0 * PI * g.frequency(n) * cap * 50.0;
            let want = Complex64::new(1.0, -x) / Complex64::new(1.0, x);
            let got = s.entry(0, n, 0, n);
            assert!((got - want).norm() < 1e-15);
            assert!((got.norm() - 1.0).abs() < 1e-12);
        }
        assert_eq!(s.off_harmonic_magnitude(), 0.0);
    }

    #[test]
    fn short_circuit_conversion_is_singular() {
        let g = grid(1);
        let short =
            FloquetMatrix::identity(g, 1, MatrixKind::Scattering).scaled(Complex64::new(-1.0, 0.0));
        assert!(matches!(
            scattering_to_admittance(&short, 50.0),
            Err(Error::SingularConversion { .. })
        ));
    }

    #[test]
    fn kind_is_enforced() {
        let g = grid(1);
        let s = FloquetMatrix::identity(g, 1, MatrixKind::Scattering);
        assert!(matches!(
            admittance_to_scattering(&s, 50.0),
            Err(Error::WrongKind { .. })
        ));
    }

    #[test]
    fn round_trip_on_switch_like_admittance() {
        let g = grid(3);
        let w = WaveformSpectrum::square_wave(0.5, 0.0, FM, 6)
            .unwrap()
            .scaled(0.5);
        let y = toeplitz_operator(&w, &g).unwrap();
        let back =
            scattering_to_admittance(&admittance_to_scattering(&y, 50.0).unwrap(), 50.0).unwrap();
        let err = frobenius(&(back.data() - y.data())) / frobenius(y.data());
        assert!(err < 1e-10);
    }
}
