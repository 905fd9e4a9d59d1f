//! Brute-force time-domain steady state of a netlist, used to cross-check the
//! Floquet solver.
//!
//! The drive frequency is snapped to a rational multiple `p / q` of the
//! modulation frequency so that the response is periodic over `q / fm`. The
//! circuit is propagated one common period at a time with exact matrix
//! exponentials until the state repeats, then the port voltages of the last
//! period are projected onto every sideband.

mod circuit;

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::circulator::{solve_at, SweepSettings};
use crate::error::{Error, Result};
use crate::floquet::GridPolicy;
use crate::network::Netlist;

use circuit::{Circuit, SegmentState};

/// Sidebands weaker than this, relative to the unit carrier, are not compared.
pub const SPUR_FLOOR_DBC: f64 = -60.0;

/// Default largest allowed deviation between the two solvers.
pub const DEFAULT_BOUND: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSettings {
    /// Index of the driven port.
    pub drive_port: usize,
    /// Largest denominator accepted when snapping the drive frequency.
    pub q_max: u64,
    /// Lower limit on the time steps per common period; the count used is
    /// always a power of two.
    pub min_steps: usize,
    /// Samples per cycle of the highest extracted sideband.
    pub samples_per_cycle: usize,
    pub max_periods: usize,
    /// Estimated distance from the periodic state, relative to its size.
    pub tolerance: f64,
    /// Sidebands `-order..=order` are extracted.
    pub order: usize,
    /// Piecewise-constant steps per modulation period for time-varying
    /// capacitors.
    pub modcap_segments: usize,
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self {
            drive_port: 0,
            q_max: 64,
            min_steps: 1 << 12,
            samples_per_cycle: 64,
            max_periods: 100_000,
            tolerance: 1e-11,
            order: crate::floquet::DEFAULT_ORDER,
            modcap_segments: 512,
        }
    }
}

/// A drive frequency `p / q * fm` with `p / q` in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Commensurate {
    pub p: u64,
    pub q: u64,
    pub frequency: f64,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Closest frequency to `f` of the form `p / q * fm` with `q <= q_max`,
/// skipping ratios where `2 f / fm` is an integer (the two signs of the
/// carrier would share sidebands).
pub fn snap_commensurate(f: f64, fm: f64, q_max: u64) -> Result<Commensurate> {
    if !(fm > 0.0) {
        return Err(Error::NonPositiveModulation(fm));
    }
    if !(f > 0.0 && f.is_finite()) || q_max < 3 {
        return Err(Error::param("snap", "needs f > 0 and q_max >= 3"));
    }
    let ratio = f / fm;
    let mut best: Option<(f64, u64, u64)> = None;
    for q in 3..=q_max {
        let centre = (ratio * q as f64).round() as i64;
        for p in (centre - 1).max(1)..=centre + 1 {
            let g = gcd(p as u64, q);
            let (p, q) = (p as u64 / g, q / g);
            if q < 3 {
                continue;
            }
            let err = (p as f64 / q as f64 - ratio).abs();
            if best.is_none_or(|(e, _, _)| err < e) {
                best = Some((err, p, q));
            }
        }
    }
    let (_, p, q) = best.ok_or_else(|| Error::param("snap", "no admissible ratio"))?;
    Ok(Commensurate {
        p,
        q,
        frequency: p as f64 / q as f64 * fm,
    })
}

/// Time-averaged power flows over one common period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyAudit {
    /// Delivered by the drive source.
    pub source: f64,
    /// Delivered by whatever varies the capacitors.
    pub pump: f64,
    /// Lost in resistors, switches, inductor losses and port terminations.
    pub dissipated: f64,
}

impl EnergyAudit {
    /// `|source + pump - dissipated| / source`.
    pub fn imbalance(&self) -> f64 {
        (self.source + self.pump - self.dissipated).abs() / self.source.abs()
    }
}

/// Periodic steady state for a unit incident wave at the driven port.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub drive: Commensurate,
    pub drive_port: usize,
    pub common_period: f64,
    /// Common periods simulated before the state repeated.
    pub periods: usize,
    pub residual: f64,
    pub order: usize,
    /// Sample instants over the last common period.
    pub times: Vec<f64>,
    /// Netlist nodes followed by the inner nodes of switched capacitors.
    pub node_names: Vec<String>,
    /// `voltages[node][sample]`.
    pub voltages: Vec<Vec<f64>>,
    /// `waves[port][n + order]`: outgoing wave at sideband `n`.
    pub waves: Vec<Vec<Complex64>>,
    pub energy: EnergyAudit,
}

impl SteadyState {
    /// Outgoing wave at `port` and sideband `n`.
    pub fn wave(&self, port: usize, n: i64) -> Complex64 {
        self.waves[port][(n + self.order as i64) as usize]
    }
}

struct Piece {
    start: f64,
    /// Simpson panels, each two equal steps of the given length.
    panels: Vec<f64>,
    config: usize,
}

/// Panel lengths covering `len`: panels of `fast / 16` right after the
/// breakpoint, doubling each time a transient of time constant `fast` has
/// decayed by another `e^(8 ln 2)`, up to the uniform length near `coarse`.
fn graded_panels(len: f64, fast: f64, coarse: f64) -> Vec<f64> {
    let coarse_panels = ((len / (2.0 * coarse)).ceil() as usize).max(1);
    let uniform = len / (2.0 * coarse_panels as f64);
    let h0 = fast / 16.0;
    if h0 >= uniform {
        return vec![uniform; coarse_panels];
    }
    let mut panels = Vec::new();
    let mut used = 0.0;
    loop {
        let level = (used / (8.0 * fast * std::f64::consts::LN_2)).floor();
        let h = h0 * 2f64.powf(level);
        if h >= uniform || used + 2.0 * h + 2.0 * uniform > len {
            break;
        }
        panels.push(h);
        used += 2.0 * h;
    }
    let rest = len - used;
    let n = ((rest / (2.0 * uniform)).ceil() as usize).max(1);
    panels.extend(std::iter::repeat_n(rest / (2.0 * n as f64), n));
    panels
}

fn matrix_power(m: &DMatrix<f64>, n: u64) -> DMatrix<f64> {
    let mut result = DMatrix::identity(m.nrows(), m.ncols());
    let mut base = m.clone();
    let mut n = n;
    while n > 0 {
        if n & 1 == 1 {
            result = &result * &base;
        }
        base = &base * &base;
        n >>= 1;
    }
    result
}

/// Steady-state response of `net` driven at `frequency`, which must already
/// be commensurate with the modulation (see [`snap_commensurate`]).
pub fn simulate_steady_state(
    net: &Netlist,
    frequency: f64,
    settings: &OracleSettings,
) -> Result<SteadyState> {
    let fm = net.modulation();
    let drive = snap_commensurate(frequency, fm, settings.q_max)?;
    if (drive.frequency - frequency).abs() > 1e-12 * frequency {
        return Err(Error::NonCommensurate {
            frequency,
            suggested: drive.frequency,
        });
    }
    if settings.drive_port >= net.ports().len() {
        return Err(Error::param("drive_port", "no such port"));
    }
    let circuit = Circuit::compile(net)?;
    let f = drive.frequency;
    let omega = 2.0 * PI * f;
    let t_mod = 1.0 / fm;
    let t_common = drive.q as f64 * t_mod;
    let order = settings.order as i64;

    // breakpoints within one modulation period
    let mut marks = vec![0.0];
    marks.extend(circuit.switch_edges());
    if circuit.has_modcaps() {
        let k = settings.modcap_segments.max(1);
        marks.extend((1..k).map(|i| i as f64 * t_mod / k as f64));
    }
    marks.sort_by(f64::total_cmp);
    marks.dedup_by(|b, a| (*b - *a).abs() <= 1e-12 * t_mod);
    marks.retain(|&t| t < t_mod * (1.0 - 1e-12));

    let top = (f / fm).abs() + order as f64 + 1.0;
    let wanted = settings.samples_per_cycle as f64 * drive.q as f64 * top;
    let steps = (wanted.ceil() as usize)
        .max(settings.min_steps)
        .next_power_of_two();
    let h_target = t_common / steps as f64;

    let mut configs: Vec<SegmentState> = Vec::new();
    let mut spans = Vec::new();
    for (i, &start) in marks.iter().enumerate() {
        let end = marks.get(i + 1).copied().unwrap_or(t_mod);
        let state = circuit.segment_state(0.5 * (start + end));
        let config = match configs.iter().position(|c| *c == state) {
            Some(c) => c,
            None => {
                configs.push(state);
                configs.len() - 1
            }
        };
        spans.push((start, end - start, config));
    }
    let segments = configs
        .iter()
        .map(|c| circuit.segment(c, omega, settings.drive_port))
        .collect::<Result<Vec<_>>>()?;
    let fastest: Vec<f64> = segments
        .iter()
        .map(|s| {
            let rate =
                s.a.complex_eigenvalues()
                    .iter()
                    .map(|l| l.norm())
                    .fold(0.0, f64::max);
            if rate > 0.0 {
                1.0 / rate
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let pieces: Vec<Piece> = spans
        .iter()
        .map(|&(start, len, config)| Piece {
            start,
            panels: graded_panels(len, fastest[config], h_target),
            config,
        })
        .collect();

    let mut step_cache: Vec<((usize, u64), DMatrix<f64>)> = Vec::new();
    let mut step_map = |config: usize, h: f64| -> usize {
        let key = (config, h.to_bits());
        match step_cache.iter().position(|(k, _)| *k == key) {
            Some(i) => i,
            None => {
                step_cache.push((key, (&segments[config].a * h).exp()));
                step_cache.len() - 1
            }
        }
    };
    let piece_steps: Vec<Vec<usize>> = pieces
        .iter()
        .map(|p| p.panels.iter().map(|&h| step_map(p.config, h)).collect())
        .collect();
    let steps_of = |i: usize| -> &DMatrix<f64> { &step_cache[i].1 };
    let piece_maps: Vec<DMatrix<f64>> = piece_steps
        .iter()
        .map(|ids| {
            ids.iter().fold(
                DMatrix::identity(circuit.state_dim(), circuit.state_dim()),
                |acc, &i| {
                    let m = steps_of(i);
                    m * (m * acc)
                },
            )
        })
        .collect();
    let dim = circuit.state_dim();
    let mut period_map = DMatrix::<f64>::identity(dim, dim);
    for m in &piece_maps {
        period_map = m * &period_map;
    }
    let monodromy = matrix_power(&period_map, drive.q);

    let osc = dim - 2;
    let mut x = DVector::<f64>::zeros(dim);
    x[osc] = 1.0;
    let mut previous_change = f64::INFINITY;
    let mut periods = 0;
    let residual = loop {
        let next = &monodromy * &x;
        periods += 1;
        let change = (&next - &x).rows(0, osc).amax();
        let size = next.rows(0, osc).amax().max(f64::MIN_POSITIVE);
        x = next;
        let ratio = change / previous_change;
        previous_change = change;
        let estimate = if ratio < 1.0 {
            change / size * ratio.max(1e-3) / (1.0 - ratio)
        } else {
            f64::INFINITY
        };
        if change == 0.0 || estimate <= settings.tolerance {
            break estimate.min(change / size);
        }
        if periods >= settings.max_periods {
            return Err(Error::NoConvergence {
                periods,
                residual: change / size,
            });
        }
    };

    // sample the last period
    let root = circuit.z0.sqrt();
    let n_harm = 2 * settings.order + 1;
    let mut acc = vec![vec![Complex64::new(0.0, 0.0); n_harm]; circuit.port_nodes.len()];
    let mut times = Vec::new();
    let mut voltages = vec![Vec::new(); circuit.nodes()];
    let (mut source, mut dissipated, mut pump) = (0.0, 0.0, 0.0);
    let drive_node = circuit.port_nodes[settings.drive_port];
    let nd = circuit.charged_len();
    for r in 0..drive.q {
        for (i, piece) in pieces.iter().enumerate() {
            let seg = &segments[piece.config];
            let mut t = r as f64 * t_mod + piece.start;
            let mut state = x.clone();
            let mut sample = |t: f64, state: &DVector<f64>, w: f64, keep: bool| {
                let v = &seg.out * state;
                if keep {
                    times.push(t);
                    for (node, trace) in voltages.iter_mut().enumerate() {
                        trace.push(v[node]);
                    }
                }
                for (p, &node) in circuit.port_nodes.iter().enumerate() {
                    for (j, slot) in acc[p].iter_mut().enumerate() {
                        let n = j as f64 - settings.order as f64;
                        let phase = -2.0 * PI * (f + n * fm) * t;
                        *slot += Complex64::from_polar(w * v[node], phase);
                    }
                }
                let e = 2.0 * root * state[osc];
                let i_src = (e - v[drive_node]) / circuit.z0;
                source += w * e * i_src;
                dissipated += w
                    * (circuit.dissipation(&seg.conductance, &v, state, drive_node)
                        + i_src * i_src * circuit.z0);
            };
            for (&h, &id) in piece.panels.iter().zip(&piece_steps[i]) {
                let m = steps_of(id);
                let mid = m * &state;
                let end = m * &mid;
                sample(t, &state, h / 3.0, true);
                sample(t + h, &mid, 4.0 * h / 3.0, true);
                sample(t + 2.0 * h, &end, h / 3.0, false);
                state = end;
                t += 2.0 * h;
            }
            x = state;
            if circuit.has_modcaps() {
                let next = &segments[pieces[(i + 1) % pieces.len()].config];
                let q = x.rows(0, nd);
                let jump = (q.transpose() * (&next.elastance - &seg.elastance) * q)[(0, 0)];
                pump += 0.5 * jump;
            }
        }
    }
    let scale = 2.0 / t_common;
    let waves = acc
        .into_iter()
        .enumerate()
        .map(|(p, row)| {
            row.into_iter()
                .enumerate()
                .map(|(j, v)| {
                    let b = v * scale / root;
                    if p == settings.drive_port && j == settings.order {
                        b - 1.0
                    } else {
                        b
                    }
                })
                .collect()
        })
        .collect();

    Ok(SteadyState {
        drive,
        drive_port: settings.drive_port,
        common_period: t_common,
        periods,
        residual,
        order: settings.order,
        times,
        node_names: circuit.node_names.clone(),
        voltages,
        waves,
        energy: EnergyAudit {
            source: source / t_common,
            pump: pump / t_common,
            dissipated: dissipated / t_common,
        },
    })
}

/// One sideband compared between the two solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleComparison {
    pub frequency: f64,
    pub port: usize,
    pub harmonic: i64,
    pub cfsm: Complex64,
    pub oracle: Complex64,
}

impl OracleComparison {
    pub fn deviation(&self) -> f64 {
        (self.cfsm - self.oracle).norm()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    /// Requested frequencies and the commensurate ones actually simulated.
    pub frequencies: Vec<(f64, f64)>,
    pub comparisons: Vec<OracleComparison>,
    pub energy: Vec<EnergyAudit>,
}

impl OracleReport {
    pub fn worst(&self) -> Option<&OracleComparison> {
        self.comparisons
            .iter()
            .max_by(|a, b| a.deviation().total_cmp(&b.deviation()))
    }

    pub fn max_deviation(&self) -> f64 {
        self.worst().map_or(0.0, OracleComparison::deviation)
    }

    pub fn passes(&self, bound: f64) -> bool {
        self.max_deviation() < bound
    }
}

/// Runs both solvers at each frequency (snapped to the nearest commensurate
/// value) and compares every carrier and every sideband above
/// [`SPUR_FLOOR_DBC`] at every port. The Floquet side uses a two-sided grid
/// of `cfsm_order`.
pub fn compare_with_cfsm(
    net: &Netlist,
    freqs: &[f64],
    cfsm_order: usize,
    settings: &OracleSettings,
) -> Result<OracleReport> {
    let floor = 10f64.powf(SPUR_FLOOR_DBC / 20.0);
    let mut report = OracleReport {
        frequencies: Vec::new(),
        comparisons: Vec::new(),
        energy: Vec::new(),
    };
    for &f in freqs {
        let snapped = snap_commensurate(f, net.modulation(), settings.q_max)?.frequency;
        let td = simulate_steady_state(net, snapped, settings).map_err(|e| e.at(snapped))?;
        let fsm = solve_at(
            net,
            snapped,
            SweepSettings {
                order: cfsm_order,
                policy: GridPolicy::TwoSided,
            },
        )?;
        let top = settings.order.min(cfsm_order) as i64;
        for port in 0..net.ports().len() {
            for n in -top..=top {
                let a = fsm.entry(port, n, settings.drive_port, 0);
                let b = td.wave(port, n);
                if n == 0 || a.norm().max(b.norm()) >= floor {
                    report.comparisons.push(OracleComparison {
                        frequency: snapped,
                        port,
                        harmonic: n,
                        cfsm: a,
                        oracle: b,
                    });
                }
            }
        }
        report.frequencies.push((f, snapped));
        report.energy.push(td.energy);
    }
    Ok(report)
}

#[cfg(test)]
mod tests;
