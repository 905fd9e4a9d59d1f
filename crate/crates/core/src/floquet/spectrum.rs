//! Fourier series of real periodic waveforms (switch clocks, capacitance
//! profiles).

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Fourier coefficients `c_k`, `|k| <= max_k`, of a real waveform with period
/// `1 / fundamental`, using `w(t) = sum_k c_k exp(j 2 pi k f t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveformSpectrum {
    fundamental: f64,
    coeffs: Vec<Complex64>,
}

impl WaveformSpectrum {
    /// Builds a spectrum from the two-sided coefficient list ordered
    /// `k = -K..=K`. Rejects lists that are not conjugate-symmetric.
    pub fn from_two_sided(fundamental: f64, coeffs: Vec<Complex64>) -> Result<Self> {
        if !(fundamental > 0.0) {
            return Err(Error::NonPositiveModulation(fundamental));
        }
        if coeffs.len() % 2 == 0 {
            return Err(Error::param("coeffs", "length must be odd"));
        }
        let k_max = coeffs.len() / 2;
        let scale = coeffs
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
            .max(1e-300);
        for k in 0..=k_max {
            let pos = coeffs[k_max + k];
            let neg = coeffs[k_max - k];
            if (pos - neg.conj()).norm() > 1e-12 * scale {
                return Err(Error::NotConjugateSymmetric(k as i64));
            }
        }
        Ok(Self {
            fundamental,
            coeffs,
        })
    }

    /// Builds a spectrum from `c_0, c_1, ..., c_K`; negative harmonics are the
    /// conjugates. The imaginary part of `c_0` is dropped.
    pub fn from_one_sided(fundamental: f64, positive: &[Complex64]) -> Result<Self> {
        if positive.is_empty() {
            return Err(Error::param("positive", "needs at least c_0"));
        }
        let k_max = positive.len() - 1;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * k_max + 1];
        coeffs[k_max] = Complex64::new(positive[0].re, 0.0);
        for k in 1..=k_max {
            coeffs[k_max + k] = positive[k];
            coeffs[k_max - k] = positive[k].conj();
        }
        Self::from_two_sided(fundamental, coeffs)
    }

    pub fn constant(value: f64, fundamental: f64, max_k: usize) -> Result<Self> {
        let mut positive = vec![Complex64::new(0.0, 0.0); max_k + 1];
        positive[0] = Complex64::new(value, 0.0);
        Self::from_one_sided(fundamental, &positive)
    }

    /// `mean + amplitude * cos(2 pi f t + phase)`.
    pub fn cosine(
        mean: f64,
        amplitude: f64,
        phase: f64,
        fundamental: f64,
        max_k: usize,
    ) -> Result<Self> {
        let mut positive = vec![Complex64::new(0.0, 0.0); max_k.max(1) + 1];
        positive[0] = Complex64::new(mean, 0.0);
        positive[1] = Complex64::from_polar(amplitude / 2.0, phase);
        Self::from_one_sided(fundamental, &positive)
    }

    /// Unit pulse train that is 1 on `[delay, delay + duty / fm)` modulo the
    /// period and 0 elsewhere.
    pub fn square_wave(duty: f64, delay: f64, fundamental: f64, max_k: usize) -> Result<Self> {
        if !(duty > 0.0 && duty < 1.0) {
            return Err(Error::InvalidDuty(duty));
        }
        if max_k < 1 {
            return Err(Error::InvalidOrder(max_k));
        }
        let mut positive = Vec::with_capacity(max_k + 1);
        positive.push(Complex64::new(duty, 0.0));
        for k in 1..=max_k {
            let kf = k as f64;
            let envelope = (PI * kf * duty).sin() / (PI * kf);
            let phase = -PI * kf * duty - 2.0 * PI * kf * fundamental * delay;
            positive.push(Complex64::from_polar(envelope, phase));
        }
        Self::from_one_sided(fundamental, &positive)
    }

    pub fn fundamental(&self) -> f64 {
        self.fundamental
    }

    pub fn max_harmonic(&self) -> usize {
        self.coeffs.len() / 2
    }

    pub fn coefficient(&self, k: i64) -> Option<Complex64> {
        let k_max = self.max_harmonic() as i64;
        (k.abs() <= k_max).then(|| self.coeffs[(k + k_max) as usize])
    }

    /// Two-sided coefficients ordered `k = -K..=K`.
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            fundamental: self.fundamental,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    /// Coefficient-wise sum; the result keeps the longer harmonic range.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if (self.fundamental - other.fundamental).abs() > 1e-12 * self.fundamental {
            return Err(Error::GridMismatch);
        }
        let k_max = self.max_harmonic().max(other.max_harmonic()) as i64;
        let coeffs = (-k_max..=k_max)
            .map(|k| {
                self.coefficient(k).unwrap_or_default() + other.coefficient(k).unwrap_or_default()
            })
            .collect();
        Ok(Self {
            fundamental: self.fundamental,
            coeffs,
        })
    }

    /// Spectrum of `1 - w(t)`.
    pub fn complement(&self) -> Self {
        let k_max = self.max_harmonic();
        let mut coeffs: Vec<Complex64> = self.coeffs.iter().map(|c| -c).collect();
        coeffs[k_max] += 1.0;
        Self {
            fundamental: self.fundamental,
            coeffs,
        }
    }

    /// Partial Fourier sum at time `t`.
    pub fn evaluate(&self, t: f64) -> f64 {
        let k_max = self.max_harmonic() as i64;
        let w = 2.0 * PI * self.fundamental * t;
        let mut acc = self.coeffs[k_max as usize].re;
        for k in 1..=k_max {
            let c = self.coeffs[(k + k_max) as usize];
            acc += 2.0 * (c * Complex64::from_polar(1.0, k as f64 * w)).re;
        }
        acc
    }

    /// Smallest value of the partial sum over `samples` evenly spaced points.
    pub fn min_sampled(&self, samples: usize) -> f64 {
        let period = 1.0 / self.fundamental;
        (0..samples.max(1))
            .map(|i| self.evaluate(i as f64 * period / samples as f64))
            .fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FM: f64 = 106e6;

    /// Midpoint-rule Fourier integral of the pulse train, sampled directly
    /// from its time-domain definition.
    fn brute_force_coefficient(duty: f64, delay: f64, k: i64) -> Complex64 {
        let period = 1.0 / FM;
        let samples = 200_000;
        let dt = period / samples as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..samples {
            let t = (i as f64 + 0.5) * dt;
            let local = (t - delay).rem_euclid(period);
            if local < duty * period {
                acc += Complex64::from_polar(1.0, -2.0 * PI * k as f64 * FM * t);
            }
        }
        acc / samples as f64
    }

    #[test]
    fn half_duty_even_harmonics_vanish() {
        let s = WaveformSpectrum::square_wave(0.5, 0.0, FM, 4).unwrap();
        assert!(s.coefficient(2).unwrap().norm() < 1e-15);
        assert!(s.coefficient(4).unwrap().norm() < 1e-15);
    }

    #[test]
    fn half_duty_fundamental_magnitude() {
        let s = WaveformSpectrum::square_wave(0.5, 0.0, FM, 1).unwrap();
        assert!((s.coefficient(1).unwrap().norm() - 1.0 / PI).abs() < 1e-15);
        // frozen from the direct integral (1/T) int_0^{T/2} exp(-j 2 pi t / T) dt = -j / pi
        let c1 = s.coefficient(1).unwrap();
        assert!((c1 - Complex64::new(0.0, -1.0 / PI)).norm() < 1e-15);
    }

    #[test]
    fn matches_brute_force_integral() {
        for &(duty, delay) in &[(0.5, 0.0), (0.3, 1.7e-9), (0.507, 4.4e-9)] {
            let s = WaveformSpectrum::square_wave(duty, delay, FM, 5).unwrap();
            for k in -5..=5 {
                let want = brute_force_coefficient(duty, delay, k);
                let got = s.coefficient(k).unwrap();
                assert!(
                    (got - want).norm() < 2e-5,
                    "duty {duty} k {k}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn half_period_delay_flips_odd_harmonics() {
        let base = WaveformSpectrum::square_wave(0.5, 0.0, FM, 7).unwrap();
        let shifted = WaveformSpectrum::square_wave(0.5, 0.5 / FM, FM, 7).unwrap();
        for k in -7..=7_i64 {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let want = base.coefficient(k).unwrap() * sign;
            assert!((shifted.coefficient(k).unwrap() - want).norm() < 1e-15);
        }
        // the half-period shift of a 50% pulse is its complement, up to DC
        let complement = base.complement();
        for k in 1..=7 {
            assert!(
                (complement.coefficient(k).unwrap() - shifted.coefficient(k).unwrap()).norm()
                    < 1e-15
            );
        }
    }

    #[test]
    fn rejects_bad_duty() {
        for duty in [0.0, 1.0, -0.2, 1.5] {
            assert_eq!(
                WaveformSpectrum::square_wave(duty, 0.0, FM, 3),
                Err(Error::InvalidDuty(duty))
            );
        }
    }

    #[test]
    fn rejects_asymmetric_coefficients() {
        let c = vec![
            Complex64::new(0.1, 0.2),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.1, 0.2),
        ];
        assert_eq!(
            WaveformSpectrum::from_two_sided(FM, c),
            Err(Error::NotConjugateSymmetric(1))
        );
    }

    #[test]
    fn evaluate_reconstructs_cosine() {
        let s = WaveformSpectrum::cosine(2.0, 0.5, 0.3, FM, 3).unwrap();
        let t = 2.1e-9;
        let want = 2.0 + 0.5 * (2.0 * PI * FM * t + 0.3).cos();
        assert!((s.evaluate(t) - want).abs() < 1e-14);
    }
}
