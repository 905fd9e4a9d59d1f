use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use cfsm::circulator::{
    build_circulator, extract_metrics, find_dip, linspace, mode_splitting, port_spectrum,
    sweep_frequencies, unwrap_phase, CirculatorConfig, MetricsRecord, SParamSet, SweepSettings,
};
use cfsm::elements::{ElementKind, InductorLoss};
use cfsm::network::Netlist;
use cfsm::oracle::{compare_with_cfsm, OracleSettings};
use cfsm::Error;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::CliError;

/// Twelve significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.11e}")
}

fn write(dir: &Path, name: &str, text: &str) -> Result<(), CliError> {
    fs::write(dir.join(name), text)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", dir.join(name).display())))
}

fn db(z: num_complex::Complex64) -> f64 {
    20.0 * z.norm().log10()
}

/// Outcome of a command: whether every gate it checks held.
pub type Gate = bool;

pub fn sparams_csv(s: &SParamSet) -> String {
    let p = s.ports();
    let mut out = String::from("freq_hz");
    for i in 1..=p {
        for j in 1..=p {
            let _ = write!(out, ",s{i}{j}_db,s{i}{j}_deg");
        }
    }
    for i in 1..=p {
        for j in 1..i {
            let _ = write!(out, ",nonrecip_{i}{j}");
        }
    }
    out.push('\n');
    let phases: Vec<Vec<f64>> = (0..p * p)
        .map(|k| {
            let raw: Vec<f64> = s.trace(k / p, k % p).iter().map(|z| z.arg()).collect();
            unwrap_phase(&raw)
        })
        .collect();
    for (r, f) in s.frequencies.iter().enumerate() {
        out.push_str(&num(*f));
        let m = &s.s[r];
        for k in 0..p * p {
            let _ = write!(
                out,
                ",{},{}",
                num(db(m[(k / p, k % p)])),
                num(phases[k][r].to_degrees())
            );
        }
        for i in 0..p {
            for j in 0..i {
                let _ = write!(out, ",{}", num((m[(i, j)] - m[(j, i)]).norm()));
            }
        }
        out.push('\n');
    }
    out
}

/// Metrics at the isolation maximum. When isolation never reaches the
/// threshold the record describes the best point with zero bandwidth.
pub fn metrics_or_peak(s: &SParamSet, threshold: f64) -> cfsm::Result<(MetricsRecord, bool)> {
    match extract_metrics(s, threshold) {
        Ok(m) => Ok((m, true)),
        Err(Error::DipNotFound { max_ix_db, .. }) => {
            let mut m = extract_metrics(s, max_ix_db)?;
            m.bw = 0.0;
            m.phase_deviation_deg = 0.0;
            Ok((m, false))
        }
        Err(e) => Err(e),
    }
}

fn metrics_text(m: &MetricsRecord, found: bool, threshold: f64) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "f_center_hz = {}", num(m.f_center));
    let _ = writeln!(out, "ix_db = {}", num(m.ix_db));
    let _ = writeln!(out, "il_db = {}", num(m.il_db));
    let _ = writeln!(out, "rl_db = {}", num(m.rl_db));
    let _ = writeln!(out, "ix_threshold_db = {}", num(threshold));
    let _ = writeln!(out, "dip_found = {found}");
    let _ = writeln!(out, "bw_fraction = {}", num(m.bw));
    let _ = writeln!(out, "bw_hz = {}", num(m.bw * m.f_center));
    let _ = writeln!(out, "phase_deviation_deg = {}", num(m.phase_deviation_deg));
    out
}

pub fn sweep(net: &Netlist, cfg: &RunConfig, out: &Path) -> Result<Gate, CliError> {
    cfg.check_range()?;
    let freqs = linspace(cfg.freq_start, cfg.freq_stop, cfg.points);
    let s = sweep_frequencies(net, &freqs, SweepSettings::new(cfg.order))?;
    write(out, "sparams.csv", &sparams_csv(&s))?;
    let mut text = String::new();
    if s.ports() == 3 {
        let (m, found) = metrics_or_peak(&s, cfg.ix_threshold_db)?;
        text.push_str(&metrics_text(&m, found, cfg.ix_threshold_db));
    } else {
        let _ = writeln!(
            text,
            "# metrics need a three-port; this netlist has {} ports",
            s.ports()
        );
    }
    let mut gate = true;
    if let Some(high) = cfg.convergence_order {
        // a handful of evenly spread points keeps the check affordable
        let probe: Vec<f64> = linspace(cfg.freq_start, cfg.freq_stop, cfg.points.min(5));
        let lo = sweep_frequencies(net, &probe, SweepSettings::new(cfg.order))?;
        let hi = sweep_frequencies(net, &probe, SweepSettings::new(high))?;
        let change =
            lo.s.iter()
                .zip(&hi.s)
                .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| (db(*x) - db(*y)).abs()))
                .fold(0.0, f64::max);
        gate = change < cfg.convergence_db;
        let _ = writeln!(text, "convergence_orders = {} {}", cfg.order, high);
        let _ = writeln!(text, "convergence_change_db = {}", num(change));
        let _ = writeln!(
            text,
            "convergence_gate = {}",
            if gate { "pass" } else { "fail" }
        );
    }
    write(out, "metrics.txt", &text)?;
    Ok(gate)
}

pub fn sensitivity(cfg: &RunConfig, out: &Path) -> Result<Gate, CliError> {
    cfg.check_range()?;
    if cfg.axes.is_empty() {
        return Err(CliError::Input(
            "sensitivity needs at least one [sensitivity] axis".into(),
        ));
    }
    let mut grid: Vec<Vec<f64>> = vec![Vec::new()];
    for axis in &cfg.axes {
        grid = grid
            .into_iter()
            .flat_map(|row| {
                axis.values().into_iter().map(move |v| {
                    let mut next = row.clone();
                    next.push(v);
                    next
                })
            })
            .collect();
    }
    let coarse = cfg.points.min(47);
    let rows: Vec<String> = grid
        .par_iter()
        .map(|values| -> Result<String, CliError> {
            let mut design = cfg.design.clone();
            for (axis, v) in cfg.axes.iter().zip(values) {
                design.set(&axis.name, &v.to_string())?;
            }
            let net = build_circulator(&design)?;
            let d = find_dip(
                &net,
                cfg.freq_start,
                cfg.freq_stop,
                coarse,
                SweepSettings::new(cfg.order),
                50e3,
            )?;
            let mut row: Vec<String> = values.iter().map(|v| num(*v)).collect();
            row.extend([d.frequency, d.ix_db, d.il_db, d.rl_db].map(num));
            Ok(row.join(","))
        })
        .collect::<Result<_, _>>()?;
    let mut text: Vec<String> = cfg.axes.iter().map(|a| a.name.clone()).collect();
    text.extend(["f_center_hz", "ix_db", "il_db", "rl_db"].map(String::from));
    let mut csv = text.join(",");
    csv.push('\n');
    for r in rows {
        csv.push_str(&r);
        csv.push('\n');
    }
    write(out, "sensitivity.csv", &csv)?;
    Ok(true)
}

pub fn spectrum(net: &Netlist, cfg: &RunConfig, f_tx: f64, out: &Path) -> Result<Gate, CliError> {
    let spec = port_spectrum(net, f_tx, cfg.order)?;
    let mut csv = String::from("port,label,harmonic,freq_hz,re,im,level_dbc\n");
    for l in &spec.lines {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            l.port + 1,
            l.label,
            l.harmonic,
            num(l.frequency),
            num(l.amplitude.re),
            num(l.amplitude.im),
            num(l.dbc())
        );
    }
    write(out, "spectrum.csv", &csv)?;
    Ok(true)
}

/// Replaces constant-Q coil losses, which have no time-domain form, by a
/// series resistance fixed at `reference`.
fn time_domain_coils(net: &Netlist, reference: f64) -> cfsm::Result<(Netlist, bool)> {
    let mut changed = false;
    let out = net.map_elements(|e| match &e.kind {
        ElementKind::Inductor {
            inductance,
            quality,
            loss: InductorLoss::ConstantQ,
        } if quality.is_finite() => {
            changed = true;
            ElementKind::Inductor {
                inductance: *inductance,
                quality: *quality,
                loss: InductorLoss::ConstantR { reference },
            }
        }
        other => other.clone(),
    })?;
    Ok((out, changed))
}

pub fn oracle_check(
    net: &Netlist,
    cfg: &RunConfig,
    seed: Option<u64>,
    out: &Path,
) -> Result<Gate, CliError> {
    cfg.check_range()?;
    let freqs = if !cfg.oracle_freqs.is_empty() {
        cfg.oracle_freqs.clone()
    } else if let Some(seed) = seed {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let mut f: Vec<f64> = (0..cfg.points.min(5))
            .map(|_| rng.gen_range(cfg.freq_start..cfg.freq_stop))
            .collect();
        f.sort_by(f64::total_cmp);
        f
    } else {
        linspace(cfg.freq_start, cfg.freq_stop, cfg.points.min(5))
    };
    let center = 0.5 * (cfg.freq_start + cfg.freq_stop);
    let (net, changed) = time_domain_coils(net, center)?;
    let settings = OracleSettings {
        q_max: cfg.oracle_q_max,
        order: cfg.oracle_order,
        ..OracleSettings::default()
    };
    let report = compare_with_cfsm(&net, &freqs, cfg.order, &settings)?;
    let mut csv =
        String::from("freq_hz,port,harmonic,cfsm_re,cfsm_im,oracle_re,oracle_im,deviation\n");
    for c in &report.comparisons {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            num(c.frequency),
            c.port + 1,
            c.harmonic,
            num(c.cfsm.re),
            num(c.cfsm.im),
            num(c.oracle.re),
            num(c.oracle.im),
            num(c.deviation())
        );
    }
    write(out, "oracle.csv", &csv)?;
    let pass = report.passes(cfg.oracle_bound);
    let mut text = String::new();
    if changed {
        let _ = writeln!(
            text,
            "# constant-Q coil losses fixed at {} Hz for both solvers",
            num(center)
        );
    }
    for (asked, used) in &report.frequencies {
        let _ = writeln!(
            text,
            "frequency = {} (requested {})",
            num(*used),
            num(*asked)
        );
    }
    let _ = writeln!(text, "order = {}", cfg.order);
    let _ = writeln!(text, "max_deviation = {}", num(report.max_deviation()));
    let _ = writeln!(text, "bound = {}", num(cfg.oracle_bound));
    let energy = report
        .energy
        .iter()
        .map(|e| e.imbalance())
        .fold(0.0, f64::max);
    let _ = writeln!(text, "energy_imbalance = {}", num(energy));
    let _ = writeln!(text, "result = {}", if pass { "pass" } else { "fail" });
    write(out, "oracle.txt", &text)?;
    Ok(pass)
}

pub fn eigen(net: &Netlist, cfg: &RunConfig, out: &Path) -> Result<Gate, CliError> {
    cfg.check_range()?;
    let freqs = linspace(cfg.freq_start, cfg.freq_stop, cfg.points);
    let modes = mode_splitting(net, &freqs, SweepSettings::new(cfg.order), 1e-6)?;
    let mut csv = String::from(
        "freq_hz,lambda_c_re,lambda_c_im,lambda_plus_re,lambda_plus_im,lambda_minus_re,lambda_minus_im\n",
    );
    for (k, f) in freqs.iter().enumerate() {
        let (c, p, m) = (
            modes.lambda_c[k],
            modes.lambda_plus[k],
            modes.lambda_minus[k],
        );
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            num(*f),
            num(c.re),
            num(c.im),
            num(p.re),
            num(p.im),
            num(m.re),
            num(m.im)
        );
    }
    write(out, "eigen.csv", &csv)?;
    let text = format!(
        "f_plus_hz = {}\nf_minus_hz = {}\n# half the separation of the two rotating-mode resonances\ndelta_f_hz = {}\n",
        num(modes.f_plus),
        num(modes.f_minus),
        num(modes.delta_f())
    );
    write(out, "eigen.txt", &text)?;
    Ok(true)
}

pub fn design_netlist(design: &CirculatorConfig) -> Result<Netlist, CliError> {
    Ok(build_circulator(design)?)
}
