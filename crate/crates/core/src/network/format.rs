//! Line-oriented netlist text format.
//!
//! ```text
//! # comment
//! [circuit]
//! fm = 106e6
//! z0 = 50
//!
//! [nodes]
//! p1
//! n1
//!
//! [clocks]
//! s1 = duty=0.5 delay=0
//! s2 = duty=0.5 delay=3.14465e-9 level=off
//!
//! [elements]
//! L1 = inductor n1 n2 L=40e-9 Q=80
//! C1 = capacitor p1 n1 C=900e-15
//! R1 = resistor p1 gnd R=50
//! S1 = switch n1 gnd ron=1.5 coff=266e-15 clock=s1
//! X1 = switched_cap n1 gnd cm=1.2e-12 ron=1.5 coff=266e-15 clock=s1
//! M1 = modcap n1 gnd c0=1e-12 c1=1e-13:0
//!
//! [ports]
//! TX = p1
//! ```
//!
//! Nodes are created on first mention; `gnd` (or `0`) is ground. `[nodes]`
//! only fixes their order. Inductors take an optional `fref=HZ` selecting a
//! constant series resistance fixed at that frequency; `Q` defaults to
//! `inf`. Modulated capacitors list `c0` (farads) and `ck=re:im` Fourier
//! coefficients for `k >= 1`.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::elements::{Clock, ClockLevel, ElementKind, InductorLoss};
use crate::error::{Error, Result};
use crate::floquet::{WaveformSpectrum, DEFAULT_Z0};

use super::netlist::{Netlist, NodeId, GROUND_NAME};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Circuit,
    Nodes,
    Clocks,
    Elements,
    Ports,
}

struct Line<'a> {
    number: usize,
    key: &'a str,
    value: &'a str,
}

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn number(line: usize, key: &str, text: &str) -> Result<f64> {
    text.trim()
        .parse::<f64>()
        .map_err(|_| err(line, format!("{key}: cannot parse {text:?} as a number")))
}

/// `key=value` tokens after the positional words.
fn options<'a>(line: usize, tokens: &[&'a str]) -> Result<HashMap<&'a str, &'a str>> {
    let mut out = HashMap::new();
    for t in tokens {
        let (k, v) = t
            .split_once('=')
            .ok_or_else(|| err(line, format!("expected key=value, got {t:?}")))?;
        if out.insert(k, v).is_some() {
            return Err(err(line, format!("{k} given twice")));
        }
    }
    Ok(out)
}

struct Options<'a> {
    line: usize,
    map: HashMap<&'a str, &'a str>,
}

impl<'a> Options<'a> {
    fn take(&mut self, key: &str) -> Option<&'a str> {
        self.map.remove(key)
    }

    fn required(&mut self, key: &str) -> Result<f64> {
        let v = self
            .take(key)
            .ok_or_else(|| err(self.line, format!("missing {key}=")))?;
        number(self.line, key, v)
    }

    fn optional(&mut self, key: &str, default: f64) -> Result<f64> {
        match self.take(key) {
            Some(v) => number(self.line, key, v),
            None => Ok(default),
        }
    }

    fn finish(self) -> Result<()> {
        let mut left: Vec<&str> = self.map.keys().copied().collect();
        left.sort_unstable();
        match left.first() {
            None => Ok(()),
            Some(k) => Err(err(self.line, format!("unknown option {k}"))),
        }
    }
}

pub fn parse_netlist(text: &str) -> Result<Netlist> {
    let mut section = Section::None;
    let mut circuit = Vec::new();
    let mut nodes = Vec::new();
    let mut clocks = Vec::new();
    let mut elements = Vec::new();
    let mut ports = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let number = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = match name.trim() {
                "circuit" => Section::Circuit,
                "nodes" => Section::Nodes,
                "clocks" => Section::Clocks,
                "elements" => Section::Elements,
                "ports" => Section::Ports,
                other => return Err(err(number, format!("unknown section [{other}]"))),
            };
            continue;
        }
        if section == Section::Nodes {
            nodes.extend(content.split_whitespace().map(|n| (number, n)));
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| err(number, "expected key = value"))?;
        let line = Line {
            number,
            key: key.trim(),
            value: value.trim(),
        };
        if line.key.is_empty() {
            return Err(err(number, "empty key"));
        }
        match section {
            Section::None => return Err(err(number, "entry outside of a section")),
            Section::Circuit => circuit.push(line),
            Section::Clocks => clocks.push(line),
            Section::Elements => elements.push(line),
            Section::Ports => ports.push(line),
            Section::Nodes => unreachable!(),
        }
    }

    let mut fm = None;
    let mut z0 = DEFAULT_Z0;
    for l in &circuit {
        match l.key {
            "fm" => fm = Some(number(l.number, "fm", l.value)?),
            "z0" => z0 = number(l.number, "z0", l.value)?,
            other => return Err(err(l.number, format!("unknown circuit key {other}"))),
        }
    }
    let fm = fm.ok_or_else(|| err(text.lines().count().max(1), "[circuit] must set fm"))?;
    let circuit_line = circuit.first().map_or(1, |l| l.number);
    let mut net = Netlist::with_z0(fm, z0).map_err(|e| err(circuit_line, e.to_string()))?;
    for (_, n) in &nodes {
        net.node(n);
    }

    let mut clock_table = HashMap::new();
    for l in &clocks {
        let tokens: Vec<&str> = l.value.split_whitespace().collect();
        let mut o = Options {
            line: l.number,
            map: options(l.number, &tokens)?,
        };
        let duty = o.optional("duty", 0.5)?;
        let delay = o.optional("delay", 0.0)?;
        let level = match o.take("level").unwrap_or("switching") {
            "switching" => ClockLevel::Switching,
            "on" => ClockLevel::AlwaysOn,
            "off" => ClockLevel::AlwaysOff,
            other => return Err(err(l.number, format!("unknown clock level {other}"))),
        };
        o.finish()?;
        let clock = Clock::new(fm, duty, delay, l.key)
            .map_err(|e| err(l.number, e.to_string()))?
            .with_level(level);
        if clock_table.insert(l.key.to_string(), clock).is_some() {
            return Err(err(l.number, format!("clock {} defined twice", l.key)));
        }
    }

    for l in &elements {
        let tokens: Vec<&str> = l.value.split_whitespace().collect();
        if tokens.len() < 3 {
            return Err(err(l.number, "expected: kind node_a node_b key=value ..."));
        }
        let a = net.node(tokens[1]);
        let b = net.node(tokens[2]);
        let mut o = Options {
            line: l.number,
            map: options(l.number, &tokens[3..])?,
        };
        let clock = |o: &mut Options| -> Result<Clock> {
            let label = o
                .take("clock")
                .ok_or_else(|| err(l.number, "missing clock="))?;
            clock_table
                .get(label)
                .cloned()
                .ok_or_else(|| err(l.number, format!("unknown clock {label}")))
        };
        let kind = match tokens[0] {
            "resistor" => ElementKind::Resistor {
                resistance: o.required("R")?,
            },
            "capacitor" => ElementKind::Capacitor {
                capacitance: o.required("C")?,
            },
            "inductor" => {
                let inductance = o.required("L")?;
                let quality = o.optional("Q", f64::INFINITY)?;
                let loss = match o.take("fref") {
                    Some(v) => InductorLoss::ConstantR {
                        reference: number(l.number, "fref", v)?,
                    },
                    None => InductorLoss::ConstantQ,
                };
                ElementKind::Inductor {
                    inductance,
                    quality,
                    loss,
                }
            }
            "switch" => ElementKind::Switch {
                r_on: o.required("ron")?,
                c_off: o.optional("coff", 0.0)?,
                clock: clock(&mut o)?,
            },
            "switched_cap" => ElementKind::SwitchedCap {
                c_m: o.required("cm")?,
                r_on: o.required("ron")?,
                c_off: o.optional("coff", 0.0)?,
                clock: clock(&mut o)?,
            },
            "modcap" => {
                let c0 = o.required("c0")?;
                let mut harmonics = BTreeMap::new();
                let keys: Vec<&str> = o.map.keys().copied().collect();
                for key in keys {
                    let Some(k) = key.strip_prefix('c').and_then(|k| k.parse::<usize>().ok())
                    else {
                        continue;
                    };
                    if k == 0 {
                        continue;
                    }
                    let v = o.take(key).expect("listed");
                    let (re, im) = v.split_once(':').unwrap_or((v, "0"));
                    harmonics.insert(
                        k,
                        Complex64::new(number(l.number, key, re)?, number(l.number, key, im)?),
                    );
                }
                let max = harmonics.keys().next_back().copied().unwrap_or(0);
                let mut positive = vec![Complex64::new(c0, 0.0)];
                positive.extend((1..=max).map(|k| harmonics.get(&k).copied().unwrap_or_default()));
                ElementKind::ModulatedCap {
                    capacitance: WaveformSpectrum::from_one_sided(fm, &positive)
                        .map_err(|e| err(l.number, e.to_string()))?,
                }
            }
            other => return Err(err(l.number, format!("unknown element kind {other}"))),
        };
        o.finish()?;
        net.add_element(l.key, kind, a, b)
            .map_err(|e| err(l.number, e.to_string()))?;
    }

    for l in &ports {
        let node = net.find_node(l.value).ok_or_else(|| {
            err(
                l.number,
                format!("port {} on unknown node {}", l.key, l.value),
            )
        })?;
        net.add_port(node, l.key)
            .map_err(|e| err(l.number, e.to_string()))?;
    }
    Ok(net)
}

fn level_name(level: ClockLevel) -> &'static str {
    match level {
        ClockLevel::Switching => "switching",
        ClockLevel::AlwaysOn => "on",
        ClockLevel::AlwaysOff => "off",
    }
}

/// Writes a netlist that [`parse_netlist`] reads back unchanged.
pub fn format_netlist(net: &Netlist) -> String {
    let mut out = String::new();
    let node = |id: NodeId| -> &str {
        if id.is_ground() {
            GROUND_NAME
        } else {
            net.node_name(id)
        }
    };
    let _ = writeln!(
        out,
        "[circuit]\nfm = {}\nz0 = {}\n",
        net.modulation(),
        net.z0()
    );
    let _ = writeln!(out, "[nodes]");
    for name in &net.node_names()[1..] {
        let _ = writeln!(out, "{name}");
    }
    let clocks = net.clocks();
    if !clocks.is_empty() {
        let _ = writeln!(out, "\n[clocks]");
        for c in &clocks {
            let _ = write!(out, "{} = duty={} delay={}", c.label(), c.duty(), c.delay());
            if c.level() != ClockLevel::Switching {
                let _ = write!(out, " level={}", level_name(c.level()));
            }
            out.push('\n');
        }
    }
    let _ = writeln!(out, "\n[elements]");
    for e in net.elements() {
        let (a, b) = (node(e.terminals.0), node(e.terminals.1));
        let _ = write!(out, "{} = ", e.name);
        let _ = match &e.kind {
            ElementKind::Resistor { resistance } => write!(out, "resistor {a} {b} R={resistance}"),
            ElementKind::Capacitor { capacitance } => {
                write!(out, "capacitor {a} {b} C={capacitance}")
            }
            ElementKind::Inductor {
                inductance,
                quality,
                loss,
            } => {
                let _ = write!(out, "inductor {a} {b} L={inductance} Q={quality}");
                match loss {
                    InductorLoss::ConstantQ => Ok(()),
                    InductorLoss::ConstantR { reference } => write!(out, " fref={reference}"),
                }
            }
            ElementKind::Switch { r_on, c_off, clock } => write!(
                out,
                "switch {a} {b} ron={r_on} coff={c_off} clock={}",
                clock.label()
            ),
            ElementKind::SwitchedCap {
                c_m,
                r_on,
                c_off,
                clock,
            } => write!(
                out,
                "switched_cap {a} {b} cm={c_m} ron={r_on} coff={c_off} clock={}",
                clock.label()
            ),
            ElementKind::ModulatedCap { capacitance } => {
                let c0 = capacitance.coefficient(0).unwrap_or_default().re;
                let _ = write!(out, "modcap {a} {b} c0={c0}");
                for k in 1..=capacitance.max_harmonic() as i64 {
                    let c = capacitance.coefficient(k).unwrap_or_default();
                    let _ = write!(out, " c{k}={}:{}", c.re, c.im);
                }
                Ok(())
            }
        };
        out.push('\n');
    }
    let _ = writeln!(out, "\n[ports]");
    for p in net.ports() {
        let _ = writeln!(out, "{} = {}", p.label, node(p.node));
    }
    out
}
