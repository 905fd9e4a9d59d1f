use std::f64::consts::PI;

use num_complex::Complex64;

use crate::elements::{Clock, ClockLevel, ElementKind};
use crate::error::Result;
use crate::floquet::WaveformSpectrum;
use crate::network::{Netlist, NodeId};

use super::config::{make_bfsk_clocks, CirculatorConfig, Modulation, Rotation, Topology};

/// External port labels in order.
pub const PORT_LABELS: [&str; 3] = ["TX", "ANT", "RX"];

/// Which element sits in the modulated position of tank `k` of a half.
fn modulated_element(cfg: &CirculatorConfig, clock: &Clock, phase: f64) -> Result<ElementKind> {
    Ok(match cfg.modulation {
        Modulation::Bfsk => ElementKind::SwitchedCap {
            c_m: cfg.cm,
            r_on: cfg.r_on,
            c_off: cfg.c_off,
            clock: clock.clone(),
        },
        Modulation::Static { switches_on } => ElementKind::SwitchedCap {
            c_m: cfg.cm,
            r_on: cfg.r_on,
            c_off: cfg.c_off,
            clock: clock.with_level(if switches_on {
                ClockLevel::AlwaysOn
            } else {
                ClockLevel::AlwaysOff
            }),
        },
        Modulation::Sinusoidal { index } => {
            let mean = 0.5 * cfg.cm;
            let c1 = Complex64::from_polar(0.5 * index * mean, -phase);
            ElementKind::ModulatedCap {
                capacitance: WaveformSpectrum::from_one_sided(
                    cfg.fm,
                    &[Complex64::new(mean, 0.0), c1],
                )?,
            }
        }
    })
}

fn inductor(cfg: &CirculatorConfig) -> ElementKind {
    ElementKind::Inductor {
        inductance: cfg.l0,
        quality: cfg.q0,
        loss: cfg.inductor_loss,
    }
}

fn capacitor(c: f64) -> ElementKind {
    ElementKind::Capacitor { capacitance: c }
}

/// Clocks of one half in tank order, after applying the rotation sense.
fn tank_clocks(clocks: &[Clock], rotation: Rotation) -> [Clock; 3] {
    match rotation {
        Rotation::Forward => [clocks[0].clone(), clocks[2].clone(), clocks[1].clone()],
        Rotation::Reverse => [clocks[0].clone(), clocks[1].clone(), clocks[2].clone()],
    }
}

/// Phase of the sinusoidal modulation of tank `k` (0-based).
fn tank_phase(k: usize, rotation: Rotation, inverted: bool) -> f64 {
    let step = 2.0 * PI / 3.0 * k as f64;
    let step = match rotation {
        Rotation::Forward => -step,
        Rotation::Reverse => step,
    };
    if inverted {
        step + PI
    } else {
        step
    }
}

/// Netlist of the configured circulator with ports TX, ANT, RX.
pub fn build_circulator(cfg: &CirculatorConfig) -> Result<Netlist> {
    cfg.validate()?;
    let clocks = make_bfsk_clocks(cfg.fm, cfg.duty, cfg.duty_error, cfg.phase_imbalance)?;
    let mut net = Netlist::with_z0(cfg.fm, cfg.z0)?;
    let ports: Vec<NodeId> = ["tx", "ant", "rx"].iter().map(|n| net.node(n)).collect();
    match cfg.topology {
        Topology::SeWye => {
            let center = net.node("center");
            let bank = tank_clocks(&clocks[..3], cfg.rotation);
            for k in 0..3 {
                let x = net.node(&format!("x{}", k + 1));
                net.add_element(&format!("L{}", k + 1), inductor(cfg), ports[k], x)?;
                net.add_element(&format!("C{}", k + 1), capacitor(cfg.c0), x, center)?;
                let m = modulated_element(cfg, &bank[k], tank_phase(k, cfg.rotation, false))?;
                net.add_element(&format!("M{}", k + 1), m, x, center)?;
            }
            if cfg.cg > 0.0 {
                net.add_element("Cg", capacitor(cfg.cg), center, NodeId::GROUND)?;
            }
        }
        Topology::ModifiedDeltaSe => {
            delta_half(
                &mut net,
                cfg,
                &ports,
                "",
                &tank_clocks(&clocks[..3], cfg.rotation),
                false,
            )?;
        }
        Topology::DifferentialCurrentMode => {
            delta_half(
                &mut net,
                cfg,
                &ports,
                "a",
                &tank_clocks(&clocks[..3], cfg.rotation),
                false,
            )?;
            delta_half(
                &mut net,
                cfg,
                &ports,
                "b",
                &tank_clocks(&clocks[3..], cfg.rotation),
                true,
            )?;
        }
    }
    for (node, label) in ports.iter().zip(PORT_LABELS) {
        net.add_port(*node, label)?;
    }
    Ok(net)
}

fn delta_half(
    net: &mut Netlist,
    cfg: &CirculatorConfig,
    ports: &[NodeId],
    tag: &str,
    bank: &[Clock; 3],
    inverted: bool,
) -> Result<()> {
    let nodes: Vec<NodeId> = (1..=3).map(|k| net.node(&format!("n{tag}{k}"))).collect();
    for k in 0..3 {
        let next = (k + 1) % 3;
        let i = k + 1;
        net.add_element(&format!("L{tag}{i}"), inductor(cfg), nodes[k], nodes[next])?;
        net.add_element(
            &format!("C0{tag}{i}"),
            capacitor(cfg.c0),
            ports[k],
            nodes[k],
        )?;
        if cfg.cg > 0.0 {
            net.add_element(
                &format!("Cg{tag}{i}"),
                capacitor(cfg.cg),
                nodes[k],
                NodeId::GROUND,
            )?;
        }
        let m = modulated_element(cfg, &bank[k], tank_phase(k, cfg.rotation, inverted))?;
        net.add_element(&format!("M{tag}{i}"), m, nodes[k], NodeId::GROUND)?;
    }
    Ok(())
}
