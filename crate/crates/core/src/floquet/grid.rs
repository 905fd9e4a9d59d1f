//! Truncated set of Floquet frequencies `f + n * fm`, `n = -N..=N`.

use crate::error::{Error, Result};

/// Which harmonic frequencies a grid accepts.
///
/// `PositiveOnly` keeps every sideband on the physical (positive) frequency
/// axis. `TwoSided` also admits sidebands below zero, which are the mirrored
/// images of real-valued content at `|f + n fm|`; only an exact landing on DC
/// is rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum GridPolicy {
    #[default]
    PositiveOnly,
    TwoSided,
}

/// Relative distance from DC (in units of `fm`) below which a two-sided grid
/// refuses a harmonic.
pub const DC_GUARD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicGrid {
    base: f64,
    modulation: f64,
    order: usize,
    policy: GridPolicy,
}

impl HarmonicGrid {
    /// Builds a grid whose frequencies are all strictly positive.
    pub fn new(base: f64, modulation: f64, order: usize) -> Result<Self> {
        Self::with_policy(base, modulation, order, GridPolicy::PositiveOnly)
    }

    /// Builds a grid that admits negative sideband frequencies.
    pub fn two_sided(base: f64, modulation: f64, order: usize) -> Result<Self> {
        Self::with_policy(base, modulation, order, GridPolicy::TwoSided)
    }

    pub fn with_policy(
        base: f64,
        modulation: f64,
        order: usize,
        policy: GridPolicy,
    ) -> Result<Self> {
        if !(modulation > 0.0) || !modulation.is_finite() {
            return Err(Error::NonPositiveModulation(modulation));
        }
        if order < 1 {
            return Err(Error::InvalidOrder(order));
        }
        if !base.is_finite() {
            return Err(Error::param("base", "must be finite"));
        }
        let n = order as i64;
        match policy {
            GridPolicy::PositiveOnly => {
                let lowest = base - n as f64 * modulation;
                if lowest <= 0.0 {
                    let max_order = ((base / modulation).ceil() as i64 - 1).max(0);
                    return Err(Error::NonPositiveFrequency {
                        base,
                        harmonic: -n,
                        frequency: lowest,
                        max_order,
                    });
                }
            }
            GridPolicy::TwoSided => {
                for k in -n..=n {
                    let f = base + k as f64 * modulation;
                    if f.abs() <= DC_GUARD * modulation {
                        return Err(Error::ZeroFrequencyHarmonic { base, harmonic: k });
                    }
                }
            }
        }
        Ok(Self {
            base,
            modulation,
            order,
            policy,
        })
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn modulation(&self) -> f64 {
        self.modulation
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn policy(&self) -> GridPolicy {
        self.policy
    }

    /// Number of harmonics, `2N + 1`.
    pub fn len(&self) -> usize {
        2 * self.order + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Harmonic indices in ascending order.
    pub fn harmonics(&self) -> impl Iterator<Item = i64> + Clone {
        let n = self.order as i64;
        -n..=n
    }

    /// Position of harmonic `n` in the ordered grid.
    pub fn index_of(&self, n: i64) -> Option<usize> {
        let order = self.order as i64;
        (n.abs() <= order).then(|| (n + order) as usize)
    }

    pub fn harmonic_at(&self, index: usize) -> i64 {
        index as i64 - self.order as i64
    }

    pub fn frequency(&self, n: i64) -> f64 {
        self.base + n as f64 * self.modulation
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.harmonics().map(|n| self.frequency(n)).collect()
    }

    /// Grids are compatible when they share modulation and truncation.
    pub fn compatible(&self, other: &HarmonicGrid) -> bool {
        self.order == other.order && rel_eq(self.modulation, other.modulation)
    }

    /// Compatible and probing the same base frequency.
    pub fn same_as(&self, other: &HarmonicGrid) -> bool {
        self.compatible(other) && rel_eq(self.base, other.base)
    }
}

fn rel_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}
