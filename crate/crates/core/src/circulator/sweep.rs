use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::floquet::{FloquetMatrix, GridPolicy, HarmonicGrid, DC_GUARD};
use crate::network::{netlist_to_fsm, Netlist};

/// Relative shift applied to a probe frequency whose sideband would land
/// exactly on DC.
pub const DC_NUDGE: f64 = 1e-6;

/// Grid and truncation used by the sweep helpers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSettings {
    pub order: usize,
    pub policy: GridPolicy,
}

impl SweepSettings {
    pub fn new(order: usize) -> Self {
        Self {
            order,
            policy: GridPolicy::TwoSided,
        }
    }
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self::new(crate::floquet::DEFAULT_ORDER)
    }
}

/// Builds the grid at `f`, moving `f` up by [`DC_NUDGE`] (relative) if a
/// two-sided grid would put a sideband on DC.
pub fn probe_grid(net: &Netlist, f: f64, settings: SweepSettings) -> Result<HarmonicGrid> {
    match HarmonicGrid::with_policy(f, net.modulation(), settings.order, settings.policy) {
        Err(Error::ZeroFrequencyHarmonic { .. }) => HarmonicGrid::with_policy(
            f * (1.0 + DC_NUDGE),
            net.modulation(),
            settings.order,
            settings.policy,
        ),
        other => other,
    }
    .map_err(|e| e.at(f))
}

/// Full external-port Floquet scattering matrix at one probe frequency.
pub fn solve_at(net: &Netlist, f: f64, settings: SweepSettings) -> Result<FloquetMatrix> {
    let grid = probe_grid(net, f, settings)?;
    netlist_to_fsm(net, &grid).map_err(|e| e.at(f))
}

/// Fundamental (harmonic 0 to harmonic 0) scattering matrices over a
/// frequency axis.
#[derive(Debug, Clone, PartialEq)]
pub struct SParamSet {
    /// Requested frequencies.
    pub frequencies: Vec<f64>,
    /// Frequencies actually evaluated; differs from the request only where a
    /// sideband had to be moved off DC.
    pub evaluated: Vec<f64>,
    pub labels: Vec<String>,
    pub s: Vec<DMatrix<Complex64>>,
}

impl SParamSet {
    pub fn new(
        frequencies: Vec<f64>,
        labels: Vec<String>,
        s: Vec<DMatrix<Complex64>>,
    ) -> Result<Self> {
        if frequencies.len() != s.len() {
            return Err(Error::DimensionMismatch("one matrix per frequency".into()));
        }
        if frequencies.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param("frequencies", "must be strictly increasing"));
        }
        if s.iter()
            .any(|m| m.nrows() != labels.len() || m.ncols() != labels.len())
        {
            return Err(Error::DimensionMismatch(
                "matrix size differs from port count".into(),
            ));
        }
        Ok(Self {
            evaluated: frequencies.clone(),
            frequencies,
            labels,
            s,
        })
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    pub fn ports(&self) -> usize {
        self.labels.len()
    }

    /// `S[i][j]` over the axis, 0-based port indices.
    pub fn trace(&self, i: usize, j: usize) -> Vec<Complex64> {
        self.s.iter().map(|m| m[(i, j)]).collect()
    }
}

/// `points` equally spaced frequencies from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..points)
            .map(|i| start + (stop - start) * i as f64 / (points - 1) as f64)
            .collect(),
    }
}

fn map_points<T: Send>(
    freqs: &[f64],
    f: impl Fn(f64) -> Result<T> + Sync + Send,
) -> Result<Vec<T>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        freqs.par_iter().map(|&x| f(x)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        freqs.iter().map(|&x| f(x)).collect()
    }
}

/// Fundamental scattering matrix at each listed frequency.
pub fn sweep_frequencies(
    net: &Netlist,
    freqs: &[f64],
    settings: SweepSettings,
) -> Result<SParamSet> {
    net.validate()?;
    let results = map_points(freqs, |f| {
        let s = solve_at(net, f, settings)?;
        Ok((s.grid().base(), s.fundamental()))
    })?;
    let labels = net.ports().iter().map(|p| p.label.clone()).collect();
    let (evaluated, s): (Vec<f64>, Vec<_>) = results.into_iter().unzip();
    let mut set = SParamSet::new(freqs.to_vec(), labels, s)?;
    set.evaluated = evaluated;
    Ok(set)
}

/// Sweep over `points` equally spaced frequencies on a two-sided grid of
/// the given order.
pub fn sweep_sparams(
    net: &Netlist,
    f_start: f64,
    f_stop: f64,
    points: usize,
    order: usize,
) -> Result<SParamSet> {
    if !(f_stop > f_start) || points < 2 {
        return Err(Error::param(
            "sweep",
            "needs f_stop > f_start and at least 2 points",
        ));
    }
    sweep_frequencies(
        net,
        &linspace(f_start, f_stop, points),
        SweepSettings::new(order),
    )
}

/// One output line of a port spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumLine {
    pub port: usize,
    pub label: String,
    pub harmonic: i64,
    pub frequency: f64,
    pub amplitude: Complex64,
}

impl SpectrumLine {
    /// Level relative to the unit incident carrier.
    pub fn dbc(&self) -> f64 {
        20.0 * self.amplitude.norm().log10()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PortSpectrum {
    pub f_tx: f64,
    pub lines: Vec<SpectrumLine>,
}

impl PortSpectrum {
    pub fn line(&self, port: usize, harmonic: i64) -> Option<&SpectrumLine> {
        self.lines
            .iter()
            .find(|l| l.port == port && l.harmonic == harmonic)
    }

    /// Total outgoing power over every port and harmonic for a unit input.
    pub fn total_power(&self) -> f64 {
        self.lines.iter().map(|l| l.amplitude.norm_sqr()).sum()
    }
}

/// Waves leaving every port at every sideband when the first port is driven
/// by a unit wave at `f_tx`.
pub fn port_spectrum(net: &Netlist, f_tx: f64, order: usize) -> Result<PortSpectrum> {
    let s = solve_at(net, f_tx, SweepSettings::new(order))?;
    let grid = *s.grid();
    let mut lines = Vec::new();
    for (p, port) in net.ports().iter().enumerate() {
        for n in grid.harmonics() {
            lines.push(SpectrumLine {
                port: p,
                label: port.label.clone(),
                harmonic: n,
                frequency: grid.frequency(n),
                amplitude: s.entry(p, n, 0, 0),
            });
        }
    }
    Ok(PortSpectrum {
        f_tx: grid.base(),
        lines,
    })
}

/// True when `f` puts a sideband of order `order` within the DC guard.
pub fn lands_on_dc(f: f64, fm: f64, order: usize) -> bool {
    let k = (f / fm).round();
    k.abs() <= order as f64 && (f - k * fm).abs() <= DC_GUARD * fm
}
