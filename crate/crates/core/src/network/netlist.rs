use std::collections::{BTreeMap, HashMap};

use crate::elements::{Clock, ElementKind, ElementSpec};
use crate::error::{Error, Result};
use crate::floquet::DEFAULT_Z0;

/// Index of a node within its netlist. Node 0 is ground.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

impl NodeId {
    pub const GROUND: NodeId = NodeId(0);

    pub fn is_ground(self) -> bool {
        self == Self::GROUND
    }
}

/// Name under which ground is registered.
pub const GROUND_NAME: &str = "gnd";

#[derive(Debug, Clone, PartialEq)]
pub struct ExternalPort {
    pub node: NodeId,
    pub label: String,
}

/// Elements, node names and external ports of a circuit, with the modulation
/// frequency shared by every clocked element.
#[derive(Debug, Clone, PartialEq)]
pub struct Netlist {
    nodes: Vec<String>,
    elements: Vec<ElementSpec>,
    ports: Vec<ExternalPort>,
    z0: f64,
    modulation: f64,
}

impl Netlist {
    pub fn new(modulation: f64) -> Result<Self> {
        Self::with_z0(modulation, DEFAULT_Z0)
    }

    pub fn with_z0(modulation: f64, z0: f64) -> Result<Self> {
        if !(modulation > 0.0 && modulation.is_finite()) {
            return Err(Error::NonPositiveModulation(modulation));
        }
        if !(z0 > 0.0 && z0.is_finite()) {
            return Err(Error::param("z0", format!("must be positive, got {z0}")));
        }
        Ok(Self {
            nodes: vec![GROUND_NAME.to_string()],
            elements: Vec::new(),
            ports: Vec::new(),
            z0,
            modulation,
        })
    }

    /// Returns the node with this name, creating it if needed. `gnd` and `0`
    /// both name ground.
    pub fn node(&mut self, name: &str) -> NodeId {
        if let Some(id) = self.find_node(name) {
            return id;
        }
        self.nodes.push(name.to_string());
        NodeId(self.nodes.len() - 1)
    }

    pub fn find_node(&self, name: &str) -> Option<NodeId> {
        if name == GROUND_NAME || name == "0" {
            return Some(NodeId::GROUND);
        }
        self.nodes.iter().position(|n| n == name).map(NodeId)
    }

    pub fn node_name(&self, id: NodeId) -> &str {
        &self.nodes[id.0]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node_names(&self) -> &[String] {
        &self.nodes
    }

    pub fn add_element(
        &mut self,
        name: &str,
        kind: ElementKind,
        a: NodeId,
        b: NodeId,
    ) -> Result<()> {
        if self.elements.iter().any(|e| e.name == name) {
            return Err(Error::InvalidNetlist(format!(
                "duplicate element name {name}"
            )));
        }
        for n in [a, b] {
            if n.0 >= self.nodes.len() {
                return Err(Error::InvalidNetlist(format!(
                    "element {name} references unknown node {}",
                    n.0
                )));
            }
        }
        kind.validate()
            .map_err(|e| Error::InvalidNetlist(format!("element {name}: {e}")))?;
        if let Some(clock) = kind.clock() {
            self.check_modulation(name, clock.modulation())?;
            let clash = self
                .elements
                .iter()
                .filter_map(|e| e.kind.clock())
                .any(|c| c.label() == clock.label() && c != clock);
            if clash {
                return Err(Error::InvalidNetlist(format!(
                    "element {name} reuses clock label {} with different timing",
                    clock.label()
                )));
            }
        }
        if let ElementKind::ModulatedCap { capacitance } = &kind {
            self.check_modulation(name, capacitance.fundamental())?;
        }
        self.elements.push(ElementSpec::new(name, kind, a, b));
        Ok(())
    }

    fn check_modulation(&self, name: &str, fm: f64) -> Result<()> {
        if (fm - self.modulation).abs() > 1e-12 * self.modulation {
            return Err(Error::InvalidNetlist(format!(
                "element {name} is modulated at {fm} Hz, netlist at {} Hz",
                self.modulation
            )));
        }
        Ok(())
    }

    pub fn add_port(&mut self, node: NodeId, label: &str) -> Result<()> {
        if node.is_ground() {
            return Err(Error::InvalidNetlist(format!(
                "port {label} cannot sit on ground"
            )));
        }
        if node.0 >= self.nodes.len() {
            return Err(Error::InvalidNetlist(format!(
                "port {label} references unknown node"
            )));
        }
        if self.ports.iter().any(|p| p.node == node) {
            return Err(Error::InvalidNetlist(format!(
                "node {} already carries a port",
                self.node_name(node)
            )));
        }
        if self.ports.iter().any(|p| p.label == label) {
            return Err(Error::InvalidNetlist(format!(
                "duplicate port label {label}"
            )));
        }
        self.ports.push(ExternalPort {
            node,
            label: label.to_string(),
        });
        Ok(())
    }

    pub fn elements(&self) -> &[ElementSpec] {
        &self.elements
    }

    pub fn element(&self, name: &str) -> Option<&ElementSpec> {
        self.elements.iter().find(|e| e.name == name)
    }

    pub fn ports(&self) -> &[ExternalPort] {
        &self.ports
    }

    pub fn z0(&self) -> f64 {
        self.z0
    }

    pub fn modulation(&self) -> f64 {
        self.modulation
    }

    /// Distinct clocks by label, in label order.
    pub fn clocks(&self) -> Vec<Clock> {
        let mut by_label = BTreeMap::new();
        for e in &self.elements {
            if let Some(c) = e.kind.clock() {
                by_label
                    .entry(c.label().to_string())
                    .or_insert_with(|| c.clone());
            }
        }
        by_label.into_values().collect()
    }

    /// Rewrites every clock through `f`.
    pub fn map_clocks(&self, mut f: impl FnMut(&Clock) -> Clock) -> Result<Self> {
        let mut out = self.clone();
        for e in &mut out.elements {
            if let Some(c) = e.kind.clock_mut() {
                *c = f(c);
            }
        }
        for e in &out.elements {
            if let Some(c) = e.kind.clock() {
                out.check_modulation(&e.name, c.modulation())?;
            }
        }
        Ok(out)
    }

    /// Rewrites every element kind through `f`, revalidating the result.
    pub fn map_elements(&self, mut f: impl FnMut(&ElementSpec) -> ElementKind) -> Result<Self> {
        let mut out = Self::with_z0(self.modulation, self.z0)?;
        out.nodes = self.nodes.clone();
        out.ports = self.ports.clone();
        for e in &self.elements {
            out.add_element(&e.name, f(e), e.terminals.0, e.terminals.1)?;
        }
        Ok(out)
    }

    /// True when no element varies in time.
    pub fn is_static(&self) -> bool {
        self.elements.iter().all(|e| e.kind.is_static())
    }

    /// Checks that there are ports and that every element and every port
    /// belongs to one connected circuit.
    pub fn validate(&self) -> Result<()> {
        if self.ports.is_empty() {
            return Err(Error::InvalidNetlist("no external ports declared".into()));
        }
        let mut adjacency: HashMap<usize, Vec<usize>> = HashMap::new();
        for e in &self.elements {
            let (a, b) = (e.terminals.0 .0, e.terminals.1 .0);
            adjacency.entry(a).or_default().push(b);
            adjacency.entry(b).or_default().push(a);
        }
        for p in &self.ports {
            if !adjacency.contains_key(&p.node.0) {
                return Err(Error::UnconnectedPort(p.label.clone()));
            }
        }
        let mut reached = vec![false; self.nodes.len()];
        let mut stack = vec![self.ports[0].node.0];
        reached[stack[0]] = true;
        while let Some(n) = stack.pop() {
            for &m in adjacency.get(&n).into_iter().flatten() {
                if !reached[m] {
                    reached[m] = true;
                    stack.push(m);
                }
            }
        }
        if let Some(p) = self.ports.iter().find(|p| !reached[p.node.0]) {
            return Err(Error::InvalidNetlist(format!(
                "port {} is not connected to port {}",
                p.label, self.ports[0].label
            )));
        }
        if let Some(e) = self.elements.iter().find(|e| !reached[e.terminals.0 .0]) {
            return Err(Error::InvalidNetlist(format!(
                "element {} is not connected to any port",
                e.name
            )));
        }
        Ok(())
    }
}
