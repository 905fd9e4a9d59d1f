//! Piecewise-constant state-space form of a netlist.
//!
//! State is `[q, i_L, cos, sin]`: the node charges, the inductor currents and
//! a harmonic oscillator producing the drive. Node voltages that store no
//! charge (nodes without capacitance and the common mode of every
//! capacitor group with no capacitive path to ground) are eliminated
//! algebraically in every segment. Between breakpoints the system is linear
//! time-invariant, so it is advanced with exact matrix exponentials.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::elements::{Clock, ElementKind, InductorLoss};
use crate::error::{Error, Result};
use crate::floquet::WaveformSpectrum;
use crate::network::{Netlist, NodeId};

type Node = Option<usize>;

struct Branch {
    a: Node,
    b: Node,
    value: f64,
}

struct SwitchBranch {
    a: Node,
    b: Node,
    g_on: f64,
    clock: Clock,
}

struct ModCap {
    a: Node,
    b: Node,
    profile: WaveformSpectrum,
}

struct InductorBranch {
    a: Node,
    b: Node,
    l: f64,
    r: f64,
}

/// Which switches conduct and which sample of each capacitance profile
/// applies in one segment.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct SegmentState {
    pub on: Vec<bool>,
    pub modcap: Vec<f64>,
}

pub(crate) struct Circuit {
    pub node_names: Vec<String>,
    /// Netlist node index (ground excluded) of every port.
    pub port_nodes: Vec<usize>,
    pub z0: f64,
    caps: Vec<Branch>,
    conductances: Vec<Branch>,
    switches: Vec<SwitchBranch>,
    modcaps: Vec<ModCap>,
    inductors: Vec<InductorBranch>,
    /// Orthonormal node-voltage directions that carry charge.
    charged: DMatrix<f64>,
    /// Node-voltage directions that carry none.
    chargeless: DMatrix<f64>,
}

/// Matrices of one segment.
pub(crate) struct Segment {
    /// `dx/dt = a x`.
    pub a: DMatrix<f64>,
    /// Node voltages `v = out x`, all nodes in circuit order.
    pub out: DMatrix<f64>,
    /// Inverse of the capacitance matrix in charge coordinates.
    pub elastance: DMatrix<f64>,
    pub conductance: DMatrix<f64>,
}

fn stamp(m: &mut DMatrix<f64>, a: Node, b: Node, v: f64) {
    if let Some(i) = a {
        m[(i, i)] += v;
    }
    if let Some(j) = b {
        m[(j, j)] += v;
    }
    if let (Some(i), Some(j)) = (a, b) {
        m[(i, j)] -= v;
        m[(j, i)] -= v;
    }
}

impl Circuit {
    pub fn compile(net: &Netlist) -> Result<Self> {
        net.validate()?;
        let to_node = |id: NodeId| -> Node { (!id.is_ground()).then(|| id.0 - 1) };
        let mut node_names: Vec<String> = net.node_names()[1..].to_vec();
        let mut circuit = Circuit {
            node_names: Vec::new(),
            port_nodes: net.ports().iter().map(|p| p.node.0 - 1).collect(),
            z0: net.z0(),
            caps: Vec::new(),
            conductances: Vec::new(),
            switches: Vec::new(),
            modcaps: Vec::new(),
            inductors: Vec::new(),
            charged: DMatrix::zeros(0, 0),
            chargeless: DMatrix::zeros(0, 0),
        };
        for &p in &circuit.port_nodes {
            circuit.conductances.push(Branch {
                a: Some(p),
                b: None,
                value: 1.0 / net.z0(),
            });
        }
        for e in net.elements() {
            let (a, b) = (to_node(e.terminals.0), to_node(e.terminals.1));
            match &e.kind {
                ElementKind::Resistor { resistance } => circuit.conductances.push(Branch {
                    a,
                    b,
                    value: 1.0 / resistance,
                }),
                ElementKind::Capacitor { capacitance } => circuit.caps.push(Branch {
                    a,
                    b,
                    value: *capacitance,
                }),
                ElementKind::Inductor {
                    inductance,
                    quality,
                    loss,
                } => {
                    let r = if quality.is_infinite() {
                        0.0
                    } else {
                        match loss {
                            InductorLoss::ConstantR { reference } => 2.0 * PI * reference * inductance / quality,
                            InductorLoss::ConstantQ => {
                                return Err(Error::InvalidNetlist(format!(
                                    "inductor {} has a constant-Q loss, which has no time-domain form; \
                                     give it a reference frequency",
                                    e.name
                                )))
                            }
                        }
                    };
                    circuit.inductors.push(InductorBranch {
                        a,
                        b,
                        l: *inductance,
                        r,
                    });
                }
                ElementKind::Switch { r_on, c_off, clock } => {
                    circuit.add_switch(a, b, *r_on, *c_off, clock);
                }
                ElementKind::SwitchedCap {
                    c_m,
                    r_on,
                    c_off,
                    clock,
                } => {
                    let inner = node_names.len();
                    node_names.push(format!("{}.x", e.name));
                    circuit.caps.push(Branch {
                        a,
                        b: Some(inner),
                        value: *c_m,
                    });
                    circuit.add_switch(Some(inner), b, *r_on, *c_off, clock);
                }
                ElementKind::ModulatedCap { capacitance } => circuit.modcaps.push(ModCap {
                    a,
                    b,
                    profile: capacitance.clone(),
                }),
            }
        }
        circuit.node_names = node_names;
        circuit.split_voltage_space();
        Ok(circuit)
    }

    /// Partitions the node-voltage space into the directions that store
    /// charge and those that do not.
    fn split_voltage_space(&mut self) {
        let n = self.nodes();
        // union-find over capacitor links
        let mut parent: Vec<usize> = (0..n).collect();
        fn root(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        let mut touched = vec![false; n];
        let mut grounded = vec![false; n];
        let links = self.caps.iter().map(|c| (c.a, c.b));
        let links: Vec<(Node, Node)> = links
            .chain(self.modcaps.iter().map(|c| (c.a, c.b)))
            .collect();
        for &(a, b) in &links {
            for i in [a, b].into_iter().flatten() {
                touched[i] = true;
            }
            if let (Some(i), Some(j)) = (a, b) {
                let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
                parent[ri] = rj;
            }
        }
        for &(a, b) in &links {
            if let (Some(i), None) | (None, Some(i)) = (a, b) {
                let r = root(&mut parent, i);
                grounded[r] = true;
            }
        }
        let mut columns: Vec<DVector<f64>> = Vec::new();
        let mut floating_modes = Vec::new();
        for i in (0..n).filter(|&i| !touched[i]) {
            columns.push(DVector::from_fn(n, |r, _| if r == i { 1.0 } else { 0.0 }));
        }
        let roots: Vec<usize> = (0..n).map(|i| root(&mut parent, i)).collect();
        for r in (0..n).filter(|&i| touched[i] && roots[i] == i && !grounded[i]) {
            let members: Vec<usize> = (0..n).filter(|&i| touched[i] && roots[i] == r).collect();
            let w = 1.0 / (members.len() as f64).sqrt();
            let v = DVector::from_fn(n, |k, _| if members.contains(&k) { w } else { 0.0 });
            floating_modes.push(v.clone());
            columns.push(v);
        }
        // charged directions: the touched nodes minus the floating modes
        let mut projector =
            DMatrix::from_fn(n, n, |r, c| if r == c && touched[r] { 1.0 } else { 0.0 });
        for v in &floating_modes {
            projector -= v * v.transpose();
        }
        let eig = projector.symmetric_eigen();
        let charged: Vec<DVector<f64>> = (0..n)
            .filter(|&k| eig.eigenvalues[k] > 0.5)
            .map(|k| eig.eigenvectors.column(k).into_owned())
            .collect();
        self.charged = DMatrix::from_fn(n, charged.len(), |r, c| charged[c][r]);
        self.chargeless = DMatrix::from_fn(n, columns.len(), |r, c| columns[c][r]);
    }

    fn add_switch(&mut self, a: Node, b: Node, r_on: f64, c_off: f64, clock: &Clock) {
        if c_off > 0.0 {
            self.caps.push(Branch { a, b, value: c_off });
        }
        self.switches.push(SwitchBranch {
            a,
            b,
            g_on: 1.0 / r_on,
            clock: clock.clone(),
        });
    }

    pub fn nodes(&self) -> usize {
        self.node_names.len()
    }

    pub fn state_dim(&self) -> usize {
        self.charged_len() + self.inductors.len() + 2
    }

    pub fn has_modcaps(&self) -> bool {
        !self.modcaps.is_empty()
    }

    /// Breakpoints in `[0, 1 / fm)` from the switching clocks.
    pub fn switch_edges(&self) -> Vec<f64> {
        self.switches.iter().flat_map(|s| s.clock.edges()).collect()
    }

    pub fn segment_state(&self, t_mid: f64) -> SegmentState {
        SegmentState {
            on: self.switches.iter().map(|s| s.clock.is_on(t_mid)).collect(),
            modcap: self
                .modcaps
                .iter()
                .map(|m| m.profile.evaluate(t_mid))
                .collect(),
        }
    }

    /// Full nodal capacitance matrix.
    fn capacitance(&self, state: &SegmentState) -> DMatrix<f64> {
        let n = self.nodes();
        let mut c = DMatrix::zeros(n, n);
        for cap in &self.caps {
            stamp(&mut c, cap.a, cap.b, cap.value);
        }
        for (m, &value) in self.modcaps.iter().zip(&state.modcap) {
            stamp(&mut c, m.a, m.b, value);
        }
        c
    }

    /// Full nodal conductance matrix.
    pub fn conductance(&self, state: &SegmentState) -> DMatrix<f64> {
        let n = self.nodes();
        let mut g = DMatrix::zeros(n, n);
        for r in &self.conductances {
            stamp(&mut g, r.a, r.b, r.value);
        }
        for (s, &on) in self.switches.iter().zip(&state.on) {
            if on {
                stamp(&mut g, s.a, s.b, s.g_on);
            }
        }
        g
    }

    /// Node to inductor incidence, `+1` where the current leaves.
    fn incidence(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nodes(), self.inductors.len());
        for (l, ind) in self.inductors.iter().enumerate() {
            if let Some(a) = ind.a {
                m[(a, l)] += 1.0;
            }
            if let Some(b) = ind.b {
                m[(b, l)] -= 1.0;
            }
        }
        m
    }

    pub fn segment(&self, state: &SegmentState, omega: f64, drive_port: usize) -> Result<Segment> {
        let (nq, nl, n) = (self.charged_len(), self.inductors.len(), self.nodes());
        let dim = self.state_dim();
        let (osc_c, osc_s) = (nq + nl, nq + nl + 1);
        let (ty, tb) = (&self.charged, &self.chargeless);

        // charge state q = ty^T C ty y with node voltages v = ty y + tb u
        let cap = ty.transpose() * self.capacitance(state) * ty;
        let elastance = cap
            .try_inverse()
            .ok_or_else(|| Error::InvalidNetlist("capacitance matrix is singular".into()))?;
        let g = self.conductance(state);
        let inc = self.incidence();
        let mut inject = DVector::zeros(n);
        inject[self.port_nodes[drive_port]] = 2.0 / self.z0.sqrt();

        // u from the chargeless KCL rows: tb^T (-g v - inc i + inject cos) = 0
        let mut out = DMatrix::zeros(n, dim);
        out.columns_mut(0, nq).copy_from(&(ty * &elastance));
        if tb.ncols() > 0 {
            let lu = (tb.transpose() * &g * tb).lu();
            let solve = |m: DMatrix<f64>| {
                lu.solve(&m).ok_or_else(|| {
                    Error::InvalidNetlist(
                        "a node without capacitance has no conductive path".into(),
                    )
                })
            };
            let k_q = -solve(tb.transpose() * &g * ty * &elastance)?;
            let k_i = -solve(tb.transpose() * &inc)?;
            let k_j = solve(tb.transpose() * DMatrix::from_column_slice(n, 1, inject.as_slice()))?;
            let mut head = out.columns_mut(0, nq);
            head += tb * k_q;
            out.columns_mut(nq, nl).copy_from(&(tb * k_i));
            out.columns_mut(osc_c, 1).copy_from(&(tb * k_j));
        }

        // currents into the nodes from everything but the capacitors
        let mut into = -(&g * &out);
        let mut currents = into.columns_mut(nq, nl);
        currents -= &inc;
        let mut drive = into.column_mut(osc_c);
        drive += &inject;

        let mut a = DMatrix::zeros(dim, dim);
        a.rows_mut(0, nq).copy_from(&(ty.transpose() * &into));
        // inductor rows: L di/dt = inc^T v - R i
        let i_rows = inc.transpose() * &out;
        for (l, ind) in self.inductors.iter().enumerate() {
            for c in 0..dim {
                a[(nq + l, c)] = i_rows[(l, c)] / ind.l;
            }
            a[(nq + l, nq + l)] -= ind.r / ind.l;
        }
        a[(osc_c, osc_s)] = -omega;
        a[(osc_s, osc_c)] = omega;
        Ok(Segment {
            a,
            out,
            elastance,
            conductance: g,
        })
    }

    /// Power dissipated in resistors, switches, port terminations and
    /// inductor losses at one instant, excluding the driven port's
    /// termination, which the caller accounts for.
    pub fn dissipation(
        &self,
        g: &DMatrix<f64>,
        v: &DVector<f64>,
        x: &DVector<f64>,
        drive_node: usize,
    ) -> f64 {
        let mut p = (v.transpose() * g * v)[(0, 0)];
        p -= v[drive_node] * v[drive_node] / self.z0;
        let nq = self.charged_len();
        for (l, ind) in self.inductors.iter().enumerate() {
            p += ind.r * x[nq + l] * x[nq + l];
        }
        p
    }

    /// Number of charge coordinates at the head of the state.
    pub fn charged_len(&self) -> usize {
        self.charged.ncols()
    }
}
