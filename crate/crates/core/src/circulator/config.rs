use crate::elements::{Clock, InductorLoss};
use crate::error::{Error, Result};
use crate::floquet::DEFAULT_Z0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Topology {
    /// Single-ended wye: each port feeds a series tank into a common center.
    SeWye,
    /// Single-ended modified wye: delta inductor loop, series `C0` to the
    /// ports, shunt `Cg` and switched `Cm` at each loop terminal.
    ModifiedDeltaSe,
    /// Two modified-wye halves in parallel, driven by complementary clock
    /// banks.
    DifferentialCurrentMode,
}

impl Topology {
    pub fn name(self) -> &'static str {
        match self {
            Topology::SeWye => "se_wye",
            Topology::ModifiedDeltaSe => "modified_delta_se",
            Topology::DifferentialCurrentMode => "differential_current_mode",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "se_wye" => Ok(Topology::SeWye),
            "modified_delta_se" => Ok(Topology::ModifiedDeltaSe),
            "differential_current_mode" => Ok(Topology::DifferentialCurrentMode),
            other => Err(Error::UnsupportedTopology(other.to_string())),
        }
    }
}

/// How the tank capacitances are varied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Modulation {
    /// Switched `Cm` driven by the BFSK clock set.
    Bfsk,
    /// `Cm` replaced by a capacitor `C(t) = (Cm / 2)(1 + index cos(2 pi fm t - phase))`
    /// with the same three-phase (and, for the differential circuit,
    /// inverted) progression as the clocks.
    Sinusoidal { index: f64 },
    /// Every switch frozen on or off.
    Static { switches_on: bool },
}

/// Sense of the clock phase progression around the three tanks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Rotation {
    /// Tank `k` is clocked `(k - 1) T / 3` before tank 1, which routes
    /// TX to ANT to RX near the design frequency.
    #[default]
    Forward,
    /// Tank `k` is clocked `(k - 1) T / 3` after tank 1; the circulation
    /// runs the other way.
    Reverse,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CirculatorConfig {
    pub topology: Topology,
    pub l0: f64,
    /// May be infinite.
    pub q0: f64,
    pub inductor_loss: InductorLoss,
    pub c0: f64,
    /// Zero omits the element.
    pub cg: f64,
    pub cm: f64,
    pub r_on: f64,
    pub c_off: f64,
    pub fm: f64,
    pub duty: f64,
    pub duty_error: f64,
    pub phase_imbalance: f64,
    pub z0: f64,
    pub modulation: Modulation,
    pub rotation: Rotation,
}

/// Default switch on-resistance of the reference designs, in ohms.
pub const DEFAULT_R_ON: f64 = 8.0;

/// Default switch `r_on * C_off` product of the reference designs, in seconds.
pub const DEFAULT_RON_COFF: f64 = 0.4e-12;

impl CirculatorConfig {
    /// Differential design with the numerical-study element values:
    /// `L0 = 40 nH`, `C0 = Cg = 900 fF`, `Cm = 1.2 pF`, `fm = 106 MHz`,
    /// `Q0 = 80`, `r_on C_off = 0.4 ps`.
    pub fn numerical_design() -> Self {
        Self {
            topology: Topology::DifferentialCurrentMode,
            l0: 40e-9,
            q0: 80.0,
            inductor_loss: InductorLoss::ConstantQ,
            c0: 900e-15,
            cg: 900e-15,
            cm: 1.2e-12,
            r_on: DEFAULT_R_ON,
            c_off: DEFAULT_RON_COFF / DEFAULT_R_ON,
            fm: 106e6,
            duty: 0.5,
            duty_error: 0.0,
            phase_imbalance: 0.0,
            z0: DEFAULT_Z0,
            modulation: Modulation::Bfsk,
            rotation: Rotation::Forward,
        }
    }

    /// Differential design with the chip-level element values:
    /// `L0 = 30 nH`, `C0 = 450 fF`, no `Cg`, `Cm = 2 x 800 fF`.
    pub fn chip_design() -> Self {
        Self {
            l0: 30e-9,
            c0: 450e-15,
            cg: 0.0,
            cm: 1.6e-12,
            ..Self::numerical_design()
        }
    }

    pub fn with_topology(mut self, topology: Topology) -> Self {
        self.topology = topology;
        self
    }

    /// Sets `r_on C_off` by rescaling `r_on` at fixed `C_off`.
    pub fn with_ron_coff(mut self, product: f64) -> Self {
        self.r_on = product / self.c_off;
        self
    }

    pub fn ron_coff(&self) -> f64 {
        self.r_on * self.c_off
    }

    /// Names accepted by [`CirculatorConfig::set`].
    pub const KEYS: [&'static str; 21] = [
        "topology",
        "l0",
        "q0",
        "inductor_fref",
        "c0",
        "cg",
        "cm",
        "r_on",
        "c_off",
        "ron_coff",
        "ron_coff_ps",
        "fm",
        "duty",
        "duty_error",
        "duty_error_pct",
        "phase_imbalance",
        "phase_imbalance_pct",
        "z0",
        "modulation",
        "index",
        "rotation",
    ];

    /// Sets one parameter from text. Numbers are SI unless the key ends in
    /// `_ps` or `_pct`; `q0` accepts `inf`; `inductor_fref = none` restores
    /// the constant-Q loss model; `modulation` is one of `bfsk`,
    /// `sinusoidal`, `static_on`, `static_off`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let num = || -> Result<f64> {
            value
                .parse::<f64>()
                .map_err(|_| Error::param(key, format!("cannot parse {value:?} as a number")))
        };
        match key {
            "topology" => self.topology = Topology::from_name(value)?,
            "l0" => self.l0 = num()?,
            "q0" => self.q0 = num()?,
            "inductor_fref" => {
                self.inductor_loss = if value == "none" {
                    InductorLoss::ConstantQ
                } else {
                    InductorLoss::ConstantR { reference: num()? }
                }
            }
            "c0" => self.c0 = num()?,
            "cg" => self.cg = num()?,
            "cm" => self.cm = num()?,
            "r_on" => self.r_on = num()?,
            "c_off" => self.c_off = num()?,
            "ron_coff" => *self = self.clone().with_ron_coff(num()?),
            "ron_coff_ps" => *self = self.clone().with_ron_coff(num()? * 1e-12),
            "fm" => self.fm = num()?,
            "duty" => self.duty = num()?,
            "duty_error" => self.duty_error = num()?,
            "duty_error_pct" => self.duty_error = num()? / 100.0,
            "phase_imbalance" => self.phase_imbalance = num()?,
            "phase_imbalance_pct" => self.phase_imbalance = num()? / 100.0,
            "z0" => self.z0 = num()?,
            "modulation" => {
                let index = match self.modulation {
                    Modulation::Sinusoidal { index } => index,
                    _ => 0.5,
                };
                self.modulation = match value {
                    "bfsk" => Modulation::Bfsk,
                    "sinusoidal" => Modulation::Sinusoidal { index },
                    "static_on" => Modulation::Static { switches_on: true },
                    "static_off" => Modulation::Static { switches_on: false },
                    other => {
                        return Err(Error::param(key, format!("unknown modulation {other:?}")))
                    }
                }
            }
            "index" => self.modulation = Modulation::Sinusoidal { index: num()? },
            "rotation" => {
                self.rotation = match value {
                    "forward" => Rotation::Forward,
                    "reverse" => Rotation::Reverse,
                    other => return Err(Error::param(key, format!("unknown rotation {other:?}"))),
                }
            }
            other => return Err(Error::param(other, "unknown design parameter")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("l0", self.l0),
            ("q0", self.q0),
            ("c0", self.c0),
            ("cm", self.cm),
            ("r_on", self.r_on),
            ("fm", self.fm),
            ("z0", self.z0),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || v.is_nan() || (v.is_infinite() && name != "q0") {
                return Err(Error::param(name, format!("must be positive, got {v}")));
            }
        }
        for (name, v) in [("cg", self.cg), ("c_off", self.c_off)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("must be non-negative, got {v}")));
            }
        }
        let d = self.duty + self.duty_error;
        if !(d > 0.0 && d < 1.0) {
            return Err(Error::InvalidDuty(d));
        }
        if let Modulation::Sinusoidal { index } = self.modulation {
            if !(index >= 0.0 && index < 1.0) {
                return Err(Error::param(
                    "index",
                    format!("must lie in [0, 1), got {index}"),
                ));
            }
        }
        Ok(())
    }
}

/// The six BFSK clocks `s1..s6`.
///
/// `s1..s3` have duty `D + dD` and delays `0, T/3, 2T/3`; `s4..s6` repeat
/// them delayed by `(T/2)(1 + dtheta)`.
pub fn make_bfsk_clocks(
    fm: f64,
    duty: f64,
    duty_error: f64,
    phase_imbalance: f64,
) -> Result<[Clock; 6]> {
    if !(fm > 0.0 && fm.is_finite()) {
        return Err(Error::NonPositiveModulation(fm));
    }
    let t = 1.0 / fm;
    let d = duty + duty_error;
    let bank_shift = 0.5 * t * (1.0 + phase_imbalance);
    let make = |n: usize| -> Result<Clock> {
        let k = (n % 3) as f64;
        let shift = if n < 3 { 0.0 } else { bank_shift };
        Clock::wrapped(fm, d, k * t / 3.0 + shift, format!("s{}", n + 1))
    };
    Ok([make(0)?, make(1)?, make(2)?, make(3)?, make(4)?, make(5)?])
}
