use crate::error::{Error, Result};
use crate::floquet::WaveformSpectrum;

/// Whether a clock toggles or is frozen in one state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClockLevel {
    Switching,
    AlwaysOn,
    AlwaysOff,
}

/// Periodic square wave driving a switch: high on
/// `[delay, delay + duty / fm)` modulo the period.
#[derive(Debug, Clone, PartialEq)]
pub struct Clock {
    modulation: f64,
    duty: f64,
    delay: f64,
    label: String,
    level: ClockLevel,
}

impl Clock {
    pub fn new(modulation: f64, duty: f64, delay: f64, label: impl Into<String>) -> Result<Self> {
        if !(modulation > 0.0 && modulation.is_finite()) {
            return Err(Error::NonPositiveModulation(modulation));
        }
        if !(duty > 0.0 && duty < 1.0) {
            return Err(Error::InvalidDuty(duty));
        }
        let period = 1.0 / modulation;
        if !(delay >= 0.0 && delay < period) {
            return Err(Error::InvalidDelay { delay, period });
        }
        Ok(Self {
            modulation,
            duty,
            delay,
            label: label.into(),
            level: ClockLevel::Switching,
        })
    }

    /// Like [`Clock::new`] but folds any delay into `[0, 1 / fm)`.
    pub fn wrapped(
        modulation: f64,
        duty: f64,
        delay: f64,
        label: impl Into<String>,
    ) -> Result<Self> {
        if !(modulation > 0.0 && modulation.is_finite()) {
            return Err(Error::NonPositiveModulation(modulation));
        }
        Self::new(modulation, duty, wrap(delay, 1.0 / modulation), label)
    }

    pub fn always_on(modulation: f64, label: impl Into<String>) -> Result<Self> {
        Self::frozen(modulation, label, ClockLevel::AlwaysOn)
    }

    pub fn always_off(modulation: f64, label: impl Into<String>) -> Result<Self> {
        Self::frozen(modulation, label, ClockLevel::AlwaysOff)
    }

    fn frozen(modulation: f64, label: impl Into<String>, level: ClockLevel) -> Result<Self> {
        let mut clock = Self::new(modulation, 0.5, 0.0, label)?;
        clock.level = level;
        Ok(clock)
    }

    pub fn modulation(&self) -> f64 {
        self.modulation
    }

    pub fn period(&self) -> f64 {
        1.0 / self.modulation
    }

    pub fn duty(&self) -> f64 {
        self.duty
    }

    pub fn delay(&self) -> f64 {
        self.delay
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn level(&self) -> ClockLevel {
        self.level
    }

    pub fn is_switching(&self) -> bool {
        self.level == ClockLevel::Switching
    }

    /// Same clock delayed by `dt` (wrapped into one period).
    pub fn delayed(&self, dt: f64) -> Self {
        let mut out = self.clone();
        out.delay = wrap(self.delay + dt, self.period());
        out
    }

    /// Same timing frozen at the given level.
    pub fn with_level(&self, level: ClockLevel) -> Self {
        let mut out = self.clone();
        out.level = level;
        out
    }

    pub fn is_on(&self, t: f64) -> bool {
        match self.level {
            ClockLevel::AlwaysOn => true,
            ClockLevel::AlwaysOff => false,
            ClockLevel::Switching => {
                wrap(t - self.delay, self.period()) < self.duty * self.period()
            }
        }
    }

    /// Rising and falling edge instants within `[0, period)`, sorted.
    pub fn edges(&self) -> Vec<f64> {
        if !self.is_switching() {
            return Vec::new();
        }
        let period = self.period();
        let mut e = vec![self.delay, wrap(self.delay + self.duty * period, period)];
        e.sort_by(f64::total_cmp);
        e
    }

    pub fn spectrum(&self, max_k: usize) -> Result<WaveformSpectrum> {
        match self.level {
            ClockLevel::Switching => {
                WaveformSpectrum::square_wave(self.duty, self.delay, self.modulation, max_k)
            }
            ClockLevel::AlwaysOn => WaveformSpectrum::constant(1.0, self.modulation, max_k),
            ClockLevel::AlwaysOff => WaveformSpectrum::constant(0.0, self.modulation, max_k),
        }
    }
}

fn wrap(t: f64, period: f64) -> f64 {
    let w = t.rem_euclid(period);
    // rem_euclid may round up to exactly `period`
    if w >= period {
        0.0
    } else {
        w
    }
}
