//! Netlist to external-port scattering matrix.
//!
//! Each element starts as its own two-port block; terminals on ground are
//! closed with a short. Nodes are then eliminated one at a time, cheapest
//! first: the blocks touching the node are aggregated with a parallel
//! junction and the tied legs are reduced away. Port nodes keep one junction
//! leg as the external port.

use crate::elements::{branch_admittance, two_terminal_fsm};
use crate::error::{Error, Result};
use crate::floquet::{FloquetMatrix, HarmonicGrid};

use super::netlist::{Netlist, NodeId};
use super::reduce::{
    aggregate_fsm, junction_fsm, open_fsm, reduce_to_external, short_fsm, ConnectionMap,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Term {
    Node(usize),
    Port(usize),
}

struct Block {
    s: FloquetMatrix,
    terms: Vec<Term>,
}

/// Two-port scattering matrix of every element, in netlist order.
pub fn element_fsms(net: &Netlist, grid: &HarmonicGrid) -> Result<Vec<FloquetMatrix>> {
    net.elements()
        .iter()
        .map(|e| {
            let y = branch_admittance(&e.kind, grid, net.z0())
                .map_err(|err| Error::InvalidNetlist(format!("element {}: {err}", e.name)))?;
            two_terminal_fsm(&y, net.z0())
        })
        .collect()
}

/// External-port scattering matrix of the netlist, ports in declaration
/// order.
pub fn netlist_to_fsm(net: &Netlist, grid: &HarmonicGrid) -> Result<FloquetMatrix> {
    if (grid.modulation() - net.modulation()).abs() > 1e-12 * net.modulation() {
        return Err(Error::GridMismatch);
    }
    net.validate()?;
    let mut blocks = Vec::new();
    for (e, s) in net.elements().iter().zip(element_fsms(net, grid)?) {
        let (a, b) = e.terminals;
        if a == b {
            continue;
        }
        blocks.push(ground_terminals(s, [a, b], grid)?);
    }
    let blocks = blocks.into_iter().flatten().collect();

    let port_of: Vec<Option<usize>> = (0..net.node_count())
        .map(|n| net.ports().iter().position(|p| p.node.0 == n))
        .collect();
    let mut state = Elimination {
        blocks,
        grid: *grid,
    };
    let internal: Vec<usize> = (1..net.node_count())
        .filter(|&n| port_of[n].is_none())
        .collect();
    state.eliminate_all(internal, |_| None)?;
    let ports: Vec<usize> = net.ports().iter().map(|p| p.node.0).collect();
    if let Some(p) = net.ports().iter().find(|p| state.terms_at(p.node.0) == 0) {
        return Err(Error::UnconnectedPort(p.label.clone()));
    }
    state.eliminate_all(ports, |n| port_of[n])?;

    let blocks: Vec<Block> = state
        .blocks
        .into_iter()
        .filter(|b| !b.terms.is_empty())
        .collect();
    let terms: Vec<Term> = blocks
        .iter()
        .flat_map(|b| b.terms.iter().copied())
        .collect();
    let matrices: Vec<FloquetMatrix> = blocks.into_iter().map(|b| b.s).collect();
    let all = aggregate_fsm(&matrices)?;
    let order: Vec<usize> = (0..net.ports().len())
        .map(|i| {
            terms
                .iter()
                .position(|&t| t == Term::Port(i))
                .ok_or_else(|| Error::UnconnectedPort(net.ports()[i].label.clone()))
        })
        .collect::<Result<_>>()?;
    all.select_ports(&order)
}

/// Closes ground terminals of a two-port with a short. `None` when both
/// terminals are grounded.
fn ground_terminals(
    s: FloquetMatrix,
    nodes: [NodeId; 2],
    grid: &HarmonicGrid,
) -> Result<Option<Block>> {
    let grounded: Vec<usize> = (0..2).filter(|&k| nodes[k].is_ground()).collect();
    match grounded.as_slice() {
        [] => Ok(Some(Block {
            s,
            terms: nodes.iter().map(|n| Term::Node(n.0)).collect(),
        })),
        [g] => {
            let keep = 1 - g;
            let agg = aggregate_fsm(&[s, short_fsm(grid)])?;
            let map = ConnectionMap::new(3, vec![(*g, 2)], vec![keep])?;
            Ok(Some(Block {
                s: reduce_to_external(&agg, &map)?,
                terms: vec![Term::Node(nodes[keep].0)],
            }))
        }
        _ => Ok(None),
    }
}

struct Elimination {
    blocks: Vec<Block>,
    grid: HarmonicGrid,
}

impl Elimination {
    fn terms_at(&self, node: usize) -> usize {
        self.blocks
            .iter()
            .flat_map(|b| &b.terms)
            .filter(|&&t| t == Term::Node(node))
            .count()
    }

    /// Port count of the block produced by eliminating `node`.
    fn cost(&self, node: usize, keeps_port: bool) -> usize {
        let mut ports = 0;
        let mut tied = 0;
        for b in &self.blocks {
            let here = b.terms.iter().filter(|&&t| t == Term::Node(node)).count();
            if here > 0 {
                ports += b.terms.len();
                tied += here;
            }
        }
        ports - tied + usize::from(keeps_port)
    }

    /// Eliminates the given nodes, cheapest first. `port` names the external
    /// port that a node keeps, if any.
    fn eliminate_all(
        &mut self,
        mut nodes: Vec<usize>,
        port: impl Fn(usize) -> Option<usize>,
    ) -> Result<()> {
        while !nodes.is_empty() {
            let (pos, _) = nodes
                .iter()
                .enumerate()
                .map(|(i, &n)| (i, self.cost(n, port(n).is_some())))
                .min_by_key(|&(i, c)| (c, nodes[i]))
                .expect("non-empty");
            let node = nodes.swap_remove(pos);
            self.eliminate(node, port(node))?;
        }
        Ok(())
    }

    fn eliminate(&mut self, node: usize, port: Option<usize>) -> Result<()> {
        let target = Term::Node(node);
        let (touching, rest): (Vec<Block>, Vec<Block>) = std::mem::take(&mut self.blocks)
            .into_iter()
            .partition(|b| b.terms.contains(&target));
        self.blocks = rest;
        if touching.is_empty() {
            return Ok(());
        }
        let mut terms: Vec<Term> = touching
            .iter()
            .flat_map(|b| b.terms.iter().copied())
            .collect();
        let mut matrices: Vec<FloquetMatrix> = touching.into_iter().map(|b| b.s).collect();
        let legs: Vec<usize> = (0..terms.len()).filter(|&i| terms[i] == target).collect();
        let k = legs.len();

        let mut pairs = Vec::new();
        match (k, port) {
            (1, Some(p)) => {
                terms[legs[0]] = Term::Port(p);
            }
            (1, None) => {
                matrices.push(open_fsm(&self.grid));
                pairs.push((legs[0], terms.len()));
                terms.push(target);
            }
            (2, None) => pairs.push((legs[0], legs[1])),
            _ => {
                let total = k + usize::from(port.is_some());
                matrices.push(junction_fsm(total, &self.grid)?);
                let first = terms.len();
                for (j, &leg) in legs.iter().enumerate() {
                    pairs.push((leg, first + j));
                }
                terms.extend(std::iter::repeat(target).take(k));
                if let Some(p) = port {
                    terms.push(Term::Port(p));
                }
            }
        }
        let tied: Vec<bool> = {
            let mut t = vec![false; terms.len()];
            for &(a, b) in &pairs {
                t[a] = true;
                t[b] = true;
            }
            t
        };
        let external: Vec<usize> = (0..terms.len()).filter(|&i| !tied[i]).collect();
        let agg = aggregate_fsm(&matrices)?;
        let s = if pairs.is_empty() {
            agg
        } else {
            let map = ConnectionMap::new(terms.len(), pairs, external.clone())?;
            reduce_to_external(&agg, &map)?
        };
        self.blocks.push(Block {
            s,
            terms: external.iter().map(|&i| terms[i]).collect(),
        });
        Ok(())
    }
}
