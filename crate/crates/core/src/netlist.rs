//! Fabric network data model: RC neuron nodes, resistor synapse edges with
//! interchangeable options, the reference 3-4-4-2 topology and its JSON form.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Resistor values stitched onto the reference fabric, in ohms.
pub const DEFAULT_PALETTE: [f64; 3] = [3600.0, 33_000.0, 680_000.0];
pub const DEFAULT_CAPACITANCE: f64 = 220e-9;
/// Leak resistance to ground of every RC node in the reference build.
pub const DEFAULT_LEAK_RESISTANCE: f64 = 680_000.0;
pub const DEFAULT_SUPPLY_VOLTAGE: f64 = 5.0;
pub const DEFAULT_THRESHOLD: f64 = 2.3;

pub const REFERENCE_LAYER_SIZES: [usize; 4] = [3, 4, 4, 2];
pub const REFERENCE_EDGE_COUNT: usize = 36;
pub const REFERENCE_OPTION_SLOTS: usize = 108;
pub const REFERENCE_RC_NODES: usize = 10;

/// Number of input terminals every truth-table network carries (A, B, C).
pub const INPUT_COUNT: usize = 3;

#[derive(Debug, Error)]
pub enum NetlistError {
    #[error("schema error: {0}")]
    Schema(#[from] serde_json::Error),
    #[error("invalid network: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("invalid assignment: {0}")]
    Assignment(String),
    #[error("invalid input pattern {0:?}: expected three characters from {{0,1}}")]
    Pattern(String),
    #[error("invalid truth table: {0}")]
    Table(String),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// One broken invariant, naming the offending element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub element: String,
    pub message: String,
}

impl Violation {
    fn new(element: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            element: element.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.element, self.message)
    }
}

/// Ordered list of candidate resistances for one connection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ResistorPalette(Vec<f64>);

impl ResistorPalette {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<f64> {
        self.0.get(index).copied()
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl Default for ResistorPalette {
    fn default() -> Self {
        Self(DEFAULT_PALETTE.to_vec())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeRole {
    InputTerminal,
    Hidden,
    Output,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeuronNode {
    pub id: String,
    pub layer: usize,
    pub role: NodeRole,
    /// Ohms to ground. Absent on input terminals.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leak_resistance: Option<f64>,
    /// Farads to ground. Absent on input terminals.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacitance: Option<f64>,
}

impl NeuronNode {
    pub fn input(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            layer: 0,
            role: NodeRole::InputTerminal,
            leak_resistance: None,
            capacitance: None,
        }
    }

    pub fn rc(id: impl Into<String>, layer: usize, role: NodeRole, leak_resistance: f64) -> Self {
        Self {
            id: id.into(),
            layer,
            role,
            leak_resistance: Some(leak_resistance),
            capacitance: Some(DEFAULT_CAPACITANCE),
        }
    }

    pub fn is_input(&self) -> bool {
        self.role == NodeRole::InputTerminal
    }

    pub fn is_rc(&self) -> bool {
        !self.is_input()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeState {
    #[default]
    Connected,
    Disconnected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynapseEdge {
    pub from: String,
    pub to: String,
    pub options: ResistorPalette,
    #[serde(default)]
    pub selected: usize,
    #[serde(default)]
    pub state: EdgeState,
}

impl SynapseEdge {
    pub fn new(from: impl Into<String>, to: impl Into<String>, options: ResistorPalette) -> Self {
        Self {
            from: from.into(),
            to: to.into(),
            options,
            selected: 0,
            state: EdgeState::Connected,
        }
    }

    /// `"from->to"`.
    pub fn id(&self) -> String {
        format!("{}->{}", self.from, self.to)
    }

    pub fn is_connected(&self) -> bool {
        self.state == EdgeState::Connected
    }

    pub fn selected_resistance(&self) -> Option<f64> {
        self.options.get(self.selected)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroundingMode {
    /// Logic-0 inputs are driven to 0 V.
    #[default]
    GroundedZeros,
    /// Logic-0 inputs are left open.
    FloatingZeros,
}

fn default_supply() -> f64 {
    DEFAULT_SUPPLY_VOLTAGE
}

fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FabricNetwork {
    #[serde(default = "default_supply")]
    pub supply_voltage: f64,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default)]
    pub grounding_mode: GroundingMode,
    pub nodes: Vec<NeuronNode>,
    pub edges: Vec<SynapseEdge>,
}

impl FabricNetwork {
    pub fn new(nodes: Vec<NeuronNode>, edges: Vec<SynapseEdge>) -> Self {
        Self {
            supply_voltage: DEFAULT_SUPPLY_VOLTAGE,
            threshold: DEFAULT_THRESHOLD,
            grounding_mode: GroundingMode::GroundedZeros,
            nodes,
            edges,
        }
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    pub fn node(&self, id: &str) -> Option<&NeuronNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.id() == id)
    }

    pub fn edge_ids(&self) -> Vec<String> {
        self.edges.iter().map(SynapseEdge::id).collect()
    }

    /// Input terminals in netlist order; bit i of a pattern drives entry i.
    pub fn input_ids(&self) -> Vec<&str> {
        self.ids_with_role(NodeRole::InputTerminal)
    }

    pub fn output_ids(&self) -> Vec<&str> {
        self.ids_with_role(NodeRole::Output)
    }

    fn ids_with_role(&self, role: NodeRole) -> Vec<&str> {
        self.nodes
            .iter()
            .filter(|n| n.role == role)
            .map(|n| n.id.as_str())
            .collect()
    }

    pub fn rc_node_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_rc()).count()
    }

    pub fn option_slots(&self) -> usize {
        self.edges.iter().map(|e| e.options.len()).sum()
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        let depth = self.nodes.iter().map(|n| n.layer + 1).max().unwrap_or(0);
        let mut sizes = vec![0; depth];
        for n in &self.nodes {
            sizes[n.layer] += 1;
        }
        sizes
    }

    /// Edges whose `to` endpoint is `node`, in netlist order.
    pub fn incoming_edges(&self, node: &str) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|&i| self.edges[i].to == node)
            .collect()
    }

    pub fn outgoing_edges(&self, node: &str) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|&i| self.edges[i].from == node)
            .collect()
    }

    /// Copy of this network with the given selections written into its edges.
    pub fn with_assignment(&self, assignment: &WeightAssignment) -> Result<Self, NetlistError> {
        assignment.check(self)?;
        let mut copy = self.clone();
        for (edge, &sel) in copy.edges.iter_mut().zip(&assignment.selected) {
            edge.selected = sel;
        }
        Ok(copy)
    }

    /// Fills leak/capacitance defaults on RC nodes that omit them.
    fn apply_node_defaults(&mut self) {
        for node in self.nodes.iter_mut().filter(|n| n.is_rc()) {
            node.leak_resistance.get_or_insert(DEFAULT_LEAK_RESISTANCE);
            node.capacitance.get_or_insert(DEFAULT_CAPACITANCE);
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network serializes")
    }
}

/// Reference 3-4-4-2 build with the default leak resistance.
pub fn build_reference_network() -> FabricNetwork {
    build_reference_network_with_leak(DEFAULT_LEAK_RESISTANCE)
}

pub fn build_reference_network_with_leak(leak_resistance: f64) -> FabricNetwork {
    let inputs = ["A", "B", "C"];
    let fhl1: Vec<String> = (1..=4).map(|i| format!("N{i}")).collect();
    let fhl2: Vec<String> = (5..=8).map(|i| format!("N{i}")).collect();
    let outputs = ["X", "Y"];

    let mut nodes: Vec<NeuronNode> = inputs.iter().map(|&id| NeuronNode::input(id)).collect();
    nodes.extend(
        fhl1.iter()
            .map(|id| NeuronNode::rc(id.clone(), 1, NodeRole::Hidden, leak_resistance)),
    );
    nodes.extend(
        fhl2.iter()
            .map(|id| NeuronNode::rc(id.clone(), 2, NodeRole::Hidden, leak_resistance)),
    );
    nodes.extend(
        outputs
            .iter()
            .map(|&id| NeuronNode::rc(id, 3, NodeRole::Output, leak_resistance)),
    );

    let mut edges = Vec::with_capacity(REFERENCE_EDGE_COUNT);
    let mut link = |from: &[String], to: &[String]| {
        for dst in to {
            for src in from {
                edges.push(SynapseEdge::new(src.clone(), dst.clone(), ResistorPalette::default()));
            }
        }
    };
    let inputs: Vec<String> = inputs.iter().map(|s| s.to_string()).collect();
    let outputs: Vec<String> = outputs.iter().map(|s| s.to_string()).collect();
    link(&inputs, &fhl1);
    link(&fhl1, &fhl2);
    link(&fhl2, &outputs);

    FabricNetwork::new(nodes, edges)
}

/// Parses and validates a network document, filling defaults.
pub fn parse_network(document: &str) -> Result<FabricNetwork, NetlistError> {
    let mut network: FabricNetwork = serde_json::from_str(document)?;
    network.apply_node_defaults();
    let violations = validate(&network);
    if violations.is_empty() {
        Ok(network)
    } else {
        Err(NetlistError::Invalid(violations))
    }
}

pub fn serialize_network(network: &FabricNetwork) -> String {
    network.to_json()
}

/// Structural invariants of any fabric network. Empty iff valid.
pub fn validate(network: &FabricNetwork) -> Vec<Violation> {
    let mut out = Vec::new();

    if !(network.supply_voltage > 0.0 && network.supply_voltage.is_finite()) {
        out.push(Violation::new("supply_voltage", "must be positive"));
    }
    if !(network.threshold > 0.0 && network.threshold <= network.supply_voltage) {
        out.push(Violation::new("threshold", "must lie in (0, supply_voltage]"));
    }

    let mut layer_of: HashMap<&str, usize> = HashMap::new();
    for node in &network.nodes {
        if layer_of.insert(node.id.as_str(), node.layer).is_some() {
            out.push(Violation::new(format!("node {}", node.id), "duplicate node id"));
        }
        match node.role {
            NodeRole::InputTerminal => {
                if node.layer != 0 {
                    out.push(Violation::new(
                        format!("node {}", node.id),
                        "input terminals must sit on layer 0",
                    ));
                }
                if node.leak_resistance.is_some() || node.capacitance.is_some() {
                    out.push(Violation::new(
                        format!("node {}", node.id),
                        "input terminals are ideal sources and take no leak or capacitance",
                    ));
                }
            }
            NodeRole::Hidden | NodeRole::Output => {
                if node.layer == 0 {
                    out.push(Violation::new(
                        format!("node {}", node.id),
                        "RC nodes cannot sit on layer 0",
                    ));
                }
                match node.leak_resistance {
                    Some(r) if r > 0.0 && r.is_finite() => {}
                    _ => out.push(Violation::new(
                        format!("node {}", node.id),
                        "leak_resistance must be positive",
                    )),
                }
                match node.capacitance {
                    Some(c) if c > 0.0 && c.is_finite() => {}
                    _ => out.push(Violation::new(
                        format!("node {}", node.id),
                        "capacitance must be positive",
                    )),
                }
            }
        }
    }

    let inputs = network.input_ids().len();
    if inputs != INPUT_COUNT {
        out.push(Violation::new(
            "nodes",
            format!("expected {INPUT_COUNT} input terminals, found {inputs}"),
        ));
    }
    if network.output_ids().is_empty() {
        out.push(Violation::new("nodes", "network has no output node"));
    }

    let mut seen_edges = HashSet::new();
    for edge in &network.edges {
        let id = edge.id();
        let label = format!("edge {id}");
        if !seen_edges.insert(id.clone()) {
            out.push(Violation::new(&label, "duplicate edge"));
        }
        match (layer_of.get(edge.from.as_str()), layer_of.get(edge.to.as_str())) {
            (Some(&lf), Some(&lt)) => {
                if lt != lf + 1 {
                    out.push(Violation::new(
                        &label,
                        format!("connects layer {lf} to layer {lt}; edges must join consecutive layers"),
                    ));
                }
            }
            (f, t) => {
                if f.is_none() {
                    out.push(Violation::new(&label, format!("dangling source node {}", edge.from)));
                }
                if t.is_none() {
                    out.push(Violation::new(&label, format!("dangling target node {}", edge.to)));
                }
            }
        }
        if edge.options.is_empty() {
            out.push(Violation::new(&label, "empty resistor palette"));
        } else if edge.options.values().iter().any(|&r| !(r > 0.0 && r.is_finite())) {
            out.push(Violation::new(&label, "palette entries must be positive"));
        }
        if edge.selected >= edge.options.len() {
            out.push(Violation::new(
                &label,
                format!(
                    "selected index {} out of bounds for {} options",
                    edge.selected,
                    edge.options.len()
                ),
            ));
        }
    }

    // Every output must be reachable from some input over the wiring.
    let mut reached: HashSet<&str> = network.input_ids().into_iter().collect();
    loop {
        let before = reached.len();
        for edge in &network.edges {
            if reached.contains(edge.from.as_str()) {
                reached.insert(edge.to.as_str());
            }
        }
        if reached.len() == before {
            break;
        }
    }
    for out_id in network.output_ids() {
        if !reached.contains(out_id) {
            out.push(Violation::new(
                format!("node {out_id}"),
                "output not reachable from any input",
            ));
        }
    }
    out
}

/// `validate` plus the exact counts of the reference build.
pub fn validate_reference(network: &FabricNetwork) -> Vec<Violation> {
    let mut out = validate(network);
    let edges = network.edges.len();
    if edges != REFERENCE_EDGE_COUNT {
        out.push(Violation::new(
            "edges",
            format!("reference network needs {REFERENCE_EDGE_COUNT} edges, found {edges}"),
        ));
    }
    let slots = network.option_slots();
    if slots != REFERENCE_OPTION_SLOTS {
        out.push(Violation::new(
            "edges",
            format!("reference network needs {REFERENCE_OPTION_SLOTS} option slots, found {slots}"),
        ));
    }
    let rc = network.rc_node_count();
    if rc != REFERENCE_RC_NODES {
        out.push(Violation::new(
            "nodes",
            format!("reference network needs {REFERENCE_RC_NODES} RC nodes, found {rc}"),
        ));
    }
    let sizes = network.layer_sizes();
    if sizes != REFERENCE_LAYER_SIZES {
        out.push(Violation::new(
            "nodes",
            format!("reference layer sizes are {REFERENCE_LAYER_SIZES:?}, found {sizes:?}"),
        ));
    }
    out
}

/// Logic levels on input terminals A, B, C.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InputPattern {
    pub bits: [bool; INPUT_COUNT],
}

impl InputPattern {
    pub const fn new(a: bool, b: bool, c: bool) -> Self {
        Self { bits: [a, b, c] }
    }

    /// Row index with A as the most significant bit.
    pub fn index(&self) -> usize {
        self.bits.iter().fold(0, |acc, &b| (acc << 1) | usize::from(b))
    }

    pub fn from_index(index: usize) -> Self {
        assert!(index < 8, "pattern index {index} out of range");
        Self::new(index & 4 != 0, index & 2 != 0, index & 1 != 0)
    }

    /// All eight patterns, 000 first.
    pub fn all() -> impl Iterator<Item = InputPattern> {
        (0..8).map(Self::from_index)
    }

    /// Single-bit pattern with only input `i` set.
    pub fn unit(i: usize) -> Self {
        let mut bits = [false; INPUT_COUNT];
        bits[i] = true;
        Self { bits }
    }

    /// True if every set bit of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &InputPattern) -> bool {
        self.index() & !other.index() == 0
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

impl fmt::Display for InputPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for InputPattern {
    type Err = NetlistError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bits = parse_bits(s).ok_or_else(|| NetlistError::Pattern(s.to_string()))?;
        match bits.as_slice() {
            &[a, b, c] => Ok(Self::new(a, b, c)),
            _ => Err(NetlistError::Pattern(s.to_string())),
        }
    }
}

fn parse_bits(s: &str) -> Option<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Some(false),
            '1' => Some(true),
            _ => None,
        })
        .collect()
}

fn format_bits(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// Eight-row map from input patterns to output bits, one bit per output node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthTable {
    rows: Vec<Vec<bool>>,
}

impl TruthTable {
    pub fn new(rows: Vec<Vec<bool>>) -> Result<Self, NetlistError> {
        if rows.len() != 8 {
            return Err(NetlistError::Table(format!("expected 8 rows, found {}", rows.len())));
        }
        let width = rows[0].len();
        if width == 0 || rows.iter().any(|r| r.len() != width) {
            return Err(NetlistError::Table("rows must share one non-zero width".into()));
        }
        Ok(Self { rows })
    }

    /// Builds a table from eight output strings ordered 000..111.
    pub fn from_rows(rows: [&str; 8]) -> Result<Self, NetlistError> {
        let parsed = rows
            .iter()
            .map(|r| parse_bits(r).ok_or_else(|| NetlistError::Table(format!("bad row {r:?}"))))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(parsed)
    }

    /// The sensation-scenario target: X = B or (A and C), Y = B and (A or C).
    pub fn reference() -> Self {
        Self::from_rows(["00", "00", "10", "11", "00", "10", "11", "11"]).expect("static table")
    }

    pub fn width(&self) -> usize {
        self.rows[0].len()
    }

    pub fn row(&self, pattern: InputPattern) -> &[bool] {
        &self.rows[pattern.index()]
    }

    pub fn rows(&self) -> impl Iterator<Item = (InputPattern, &[bool])> {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| (InputPattern::from_index(i), r.as_slice()))
    }

    pub fn row_string(&self, pattern: InputPattern) -> String {
        format_bits(self.row(pattern))
    }

    pub fn parse(document: &str) -> Result<Self, NetlistError> {
        Ok(serde_json::from_str(document)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableDocument {
    rows: BTreeMap<String, String>,
}

impl Serialize for TruthTable {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let rows = self
            .rows()
            .map(|(p, r)| (p.to_string(), format_bits(r)))
            .collect();
        TableDocument { rows }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TruthTable {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let doc = TableDocument::deserialize(deserializer)?;
        let mut rows: Vec<Option<Vec<bool>>> = vec![None; 8];
        for (key, value) in &doc.rows {
            let pattern: InputPattern = key.parse().map_err(D::Error::custom)?;
            let bits = parse_bits(value)
                .ok_or_else(|| D::Error::custom(format!("row {key}: bad output bits {value:?}")))?;
            if rows[pattern.index()].replace(bits).is_some() {
                return Err(D::Error::custom(format!("row {key} listed twice")));
            }
        }
        let rows = rows
            .into_iter()
            .enumerate()
            .map(|(i, r)| {
                r.ok_or_else(|| {
                    D::Error::custom(format!("missing row {}", InputPattern::from_index(i)))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        TruthTable::new(rows).map_err(D::Error::custom)
    }
}

/// One selected palette index per edge, aligned with `FabricNetwork::edges`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct WeightAssignment {
    pub selected: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AssignmentDocument {
    selected: BTreeMap<String, usize>,
}

impl WeightAssignment {
    /// The selections currently stored on the network's edges.
    pub fn from_network(network: &FabricNetwork) -> Self {
        Self {
            selected: network.edges.iter().map(|e| e.selected).collect(),
        }
    }

    pub fn uniform(network: &FabricNetwork, index: usize) -> Self {
        Self {
            selected: vec![index; network.edges.len()],
        }
    }

    pub fn check(&self, network: &FabricNetwork) -> Result<(), NetlistError> {
        if self.selected.len() != network.edges.len() {
            return Err(NetlistError::Assignment(format!(
                "covers {} edges, network has {}",
                self.selected.len(),
                network.edges.len()
            )));
        }
        for (edge, &sel) in network.edges.iter().zip(&self.selected) {
            if sel >= edge.options.len() {
                return Err(NetlistError::Assignment(format!(
                    "edge {}: index {sel} out of bounds for {} options",
                    edge.id(),
                    edge.options.len()
                )));
            }
        }
        Ok(())
    }

    /// `{"selected": {"A->N1": 0, ...}}`
    pub fn to_json(&self, network: &FabricNetwork) -> String {
        let selected = network.edge_ids().into_iter().zip(self.selected.iter().copied()).collect();
        serde_json::to_string_pretty(&AssignmentDocument { selected }).expect("assignment serializes")
    }

    pub fn parse(network: &FabricNetwork, document: &str) -> Result<Self, NetlistError> {
        let doc: AssignmentDocument = serde_json::from_str(document)?;
        let ids = network.edge_ids();
        let known: HashSet<&str> = ids.iter().map(String::as_str).collect();
        if let Some(extra) = doc.selected.keys().find(|k| !known.contains(k.as_str())) {
            return Err(NetlistError::Assignment(format!("unknown edge {extra}")));
        }
        let selected = ids
            .iter()
            .map(|id| {
                doc.selected
                    .get(id)
                    .copied()
                    .ok_or_else(|| NetlistError::Assignment(format!("edge {id} has no selection")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let assignment = Self { selected };
        assignment.check(network)?;
        Ok(assignment)
    }
}
