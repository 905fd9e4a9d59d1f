use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::network::Netlist;

use super::build::build_circulator;
use super::config::CirculatorConfig;
use super::sweep::{linspace, solve_at, sweep_frequencies, SParamSet, SweepSettings};

/// Default isolation threshold for the bandwidth figure, in dB.
pub const IX_THRESHOLD_DB: f64 = 20.0;

const TX: usize = 0;
const ANT: usize = 1;
const RX: usize = 2;

/// Figures of merit at the isolation dip, all losses in positive dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRecord {
    pub f_center: f64,
    /// TX to RX isolation.
    pub ix_db: f64,
    /// TX to ANT insertion loss.
    pub il_db: f64,
    /// TX return loss.
    pub rl_db: f64,
    /// Width of the band around the dip where isolation stays above the
    /// threshold, as a fraction of `f_center`.
    pub bw: f64,
    /// Largest deviation of the TX to ANT phase from its least-squares line
    /// across that band, in degrees.
    pub phase_deviation_deg: f64,
}

pub fn loss_db(s: Complex64) -> f64 {
    -20.0 * s.norm().log10()
}

/// IX, IL and RL of one 3x3 fundamental matrix.
pub fn point_metrics(s: &nalgebra::DMatrix<Complex64>) -> (f64, f64, f64) {
    (
        loss_db(s[(RX, TX)]),
        loss_db(s[(ANT, TX)]),
        loss_db(s[(TX, TX)]),
    )
}

/// Vertex of the parabola through three points, falling back to the middle
/// point when they are collinear.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> (f64, f64) {
    let d1 = (y[1] - y[0]) / (x[1] - x[0]);
    let d2 = (y[2] - y[1]) / (x[2] - x[1]);
    let a = (d2 - d1) / (x[2] - x[0]);
    if a.abs() < f64::EPSILON * y[1].abs().max(1.0) / (x[2] - x[0]).powi(2) {
        return (x[1], y[1]);
    }
    let b = d1 - a * (x[0] + x[1]);
    let xv = (-b / (2.0 * a)).clamp(x[0], x[2]);
    let yv = y[0] + (xv - x[0]) * (d1 + a * (xv - x[1]));
    (xv, yv)
}

fn interpolate(x: &[f64], y: &[f64], at: f64) -> f64 {
    let i = x.partition_point(|&v| v <= at).clamp(1, x.len() - 1);
    let t = (at - x[i - 1]) / (x[i] - x[i - 1]);
    y[i - 1] + t * (y[i] - y[i - 1])
}

/// Removes `2 pi` jumps between consecutive samples.
pub fn unwrap_phase(phase: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(phase.len());
    let mut offset = 0.0_f64;
    for (i, &p) in phase.iter().enumerate() {
        if i > 0 {
            let step: f64 = p + offset - out[i - 1];
            offset -= (step / std::f64::consts::TAU).round() * std::f64::consts::TAU;
        }
        out.push(p + offset);
    }
    out
}

/// Largest absolute residual of the least-squares line through the points.
pub fn linear_fit_deviation(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    if x.len() < 3 {
        return 0.0;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    x.iter()
        .zip(y)
        .map(|(a, b)| (b - (my + slope * (a - mx))).abs())
        .fold(0.0, f64::max)
}

/// Metrics of a sweep of a three-port ordered TX, ANT, RX.
pub fn extract_metrics(s: &SParamSet, ix_threshold_db: f64) -> Result<MetricsRecord> {
    if s.ports() != 3 {
        return Err(Error::DimensionMismatch(format!(
            "metrics need 3 ports, got {}",
            s.ports()
        )));
    }
    if s.len() < 3 {
        return Err(Error::param("sweep", "needs at least 3 points"));
    }
    let f = &s.frequencies;
    let ix: Vec<f64> = s.trace(RX, TX).into_iter().map(loss_db).collect();
    let il: Vec<f64> = s.trace(ANT, TX).into_iter().map(loss_db).collect();
    let rl: Vec<f64> = s.trace(TX, TX).into_iter().map(loss_db).collect();
    let peak = (0..ix.len())
        .max_by(|&a, &b| ix[a].total_cmp(&ix[b]))
        .expect("non-empty");
    if !(ix[peak] >= ix_threshold_db) {
        return Err(Error::DipNotFound {
            threshold_db: ix_threshold_db,
            max_ix_db: ix[peak],
        });
    }
    let (f_center, ix_center) = if peak == 0 || peak + 1 == ix.len() {
        (f[peak], ix[peak])
    } else {
        let k = [peak - 1, peak, peak + 1];
        parabola_vertex(k.map(|i| f[i]), k.map(|i| ix[i]))
    };
    let ix_center = ix_center.max(ix[peak]);

    let crossing = |i: usize, j: usize| -> f64 {
        // isolation crosses the threshold between samples i (above) and j
        let t = (ix[i] - ix_threshold_db) / (ix[i] - ix[j]);
        f[i] + t * (f[j] - f[i])
    };
    let mut lo = peak;
    while lo > 0 && ix[lo - 1] >= ix_threshold_db {
        lo -= 1;
    }
    let mut hi = peak;
    while hi + 1 < ix.len() && ix[hi + 1] >= ix_threshold_db {
        hi += 1;
    }
    let f_lo = if lo > 0 { crossing(lo, lo - 1) } else { f[0] };
    let f_hi = if hi + 1 < ix.len() {
        crossing(hi, hi + 1)
    } else {
        f[f.len() - 1]
    };

    let phase: Vec<f64> = s.trace(ANT, TX).iter().map(|v| v.arg()).collect();
    let phase: Vec<f64> = unwrap_phase(&phase)
        .into_iter()
        .map(f64::to_degrees)
        .collect();
    let phase_deviation_deg = linear_fit_deviation(&f[lo..=hi], &phase[lo..=hi]);

    Ok(MetricsRecord {
        f_center,
        ix_db: ix_center,
        il_db: interpolate(f, &il, f_center),
        rl_db: interpolate(f, &rl, f_center),
        bw: (f_hi - f_lo) / f_center,
        phase_deviation_deg,
    })
}

/// Metrics evaluated directly at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipPoint {
    pub frequency: f64,
    pub ix_db: f64,
    pub il_db: f64,
    pub rl_db: f64,
}

/// Locates the isolation maximum of the netlist: a coarse sweep of
/// `points` over `[f_lo, f_hi]` followed by golden-section refinement down
/// to `tol` hertz.
pub fn find_dip(
    net: &Netlist,
    f_lo: f64,
    f_hi: f64,
    points: usize,
    settings: SweepSettings,
    tol: f64,
) -> Result<DipPoint> {
    let axis = linspace(f_lo, f_hi, points.max(3));
    let sweep = sweep_frequencies(net, &axis, settings)?;
    let ix: Vec<f64> = sweep.trace(RX, TX).into_iter().map(loss_db).collect();
    let peak = (0..ix.len())
        .max_by(|&a, &b| ix[a].total_cmp(&ix[b]))
        .expect("non-empty");
    let mut a = axis[peak.saturating_sub(1)];
    let mut b = axis[(peak + 1).min(axis.len() - 1)];
    let eval = |f: f64| -> Result<DipPoint> {
        let s = solve_at(net, f, settings)?.fundamental();
        let (ix, il, rl) = point_metrics(&s);
        Ok(DipPoint {
            frequency: f,
            ix_db: ix,
            il_db: il,
            rl_db: rl,
        })
    };
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let mut pc = eval(c)?;
    let mut pd = eval(d)?;
    while (b - a) > tol {
        if pc.ix_db > pd.ix_db {
            b = d;
            d = c;
            pd = pc;
            c = b - ratio * (b - a);
            pc = eval(c)?;
        } else {
            a = c;
            c = d;
            pc = pd;
            d = a + ratio * (b - a);
            pd = eval(d)?;
        }
    }
    let best = if pc.ix_db > pd.ix_db { pc } else { pd };
    let grid_best = DipPoint {
        frequency: axis[peak],
        ix_db: ix[peak],
        il_db: loss_db(sweep.s[peak][(ANT, TX)]),
        rl_db: loss_db(sweep.s[peak][(TX, TX)]),
    };
    Ok(if grid_best.ix_db > best.ix_db {
        grid_best
    } else {
        best
    })
}

/// Bisects the switched capacitance `cm` until the isolation dip of the
/// circulator sits within `tol` hertz of `target`.
///
/// The dip is searched over `target +- span`. A larger `cm` lowers the dip
/// frequency; the bracket grows from the design value in steps of 25% and
/// gives up with [`Error::InvalidParameter`] after ten steps.
pub fn center_dip(
    cfg: &CirculatorConfig,
    target: f64,
    span: f64,
    points: usize,
    settings: SweepSettings,
    tol: f64,
) -> Result<(CirculatorConfig, DipPoint)> {
    if !(span > 0.0) || !(tol > 0.0) || !(target > span) {
        return Err(Error::param(
            "center_dip",
            "needs target > span > 0 and tol > 0",
        ));
    }
    let dip_at = |log_cm: f64| -> Result<(CirculatorConfig, DipPoint)> {
        let mut c = cfg.clone();
        c.cm = log_cm.exp();
        let d = find_dip(
            &build_circulator(&c)?,
            target - span,
            target + span,
            points,
            settings,
            tol / 4.0,
        )?;
        Ok((c, d))
    };
    let step = 1.25f64.ln();
    let mut near = (cfg.cm.ln(), dip_at(cfg.cm.ln())?);
    // too high a dip needs more capacitance
    let dir = if near.1 .1.frequency > target {
        1.0
    } else {
        -1.0
    };
    let mut far = None;
    for _ in 0..10 {
        if (near.1 .1.frequency - target).abs() <= tol {
            return Ok(near.1);
        }
        let x = near.0 + dir * step;
        let next = dip_at(x)?;
        if (next.1.frequency > target) != (near.1 .1.frequency > target) {
            far = Some((x, next));
            break;
        }
        near = (x, next);
    }
    let Some(mut far) = far else {
        return Err(Error::param(
            "cm",
            format!(
                "dip stays at {:.4e} Hz after scaling cm by 1.25^10 and never reaches {target:.4e} Hz",
                near.1 .1.frequency
            ),
        ));
    };
    for _ in 0..60 {
        let best = if (near.1 .1.frequency - target).abs() < (far.1 .1.frequency - target).abs() {
            &near
        } else {
            &far
        };
        if (best.1 .1.frequency - target).abs() <= tol || (near.0 - far.0).abs() < 1e-12 {
            return Ok(best.1.clone());
        }
        let x = 0.5 * (near.0 + far.0);
        let mid = dip_at(x)?;
        if (mid.1.frequency > target) == (near.1 .1.frequency > target) {
            near = (x, mid);
        } else {
            far = (x, mid);
        }
    }
    let best = if (near.1 .1.frequency - target).abs() < (far.1 .1.frequency - target).abs() {
        near
    } else {
        far
    };
    Ok(best.1)
}
