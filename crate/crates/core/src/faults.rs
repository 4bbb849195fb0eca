//! Disconnection faults: single resistors, whole patches (a node's snap link
//! to the next layer), and zone campaigns with per-node voltage-shift reports.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::learning::table_error;
use crate::netlist::{
    EdgeState, FabricNetwork, InputPattern, NetlistError, NodeRole, TruthTable, WeightAssignment,
};
use crate::solver::{logic_level, Circuit, SolverError};

/// Baseline voltage below which a shift is reported in volts, not percent.
pub const DELTA_PERCENT_FLOOR: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum FaultError {
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("fault {label:?}: unknown target {target}")]
    UnknownTarget { label: String, target: String },
    #[error("fault {label:?}: {target} is not a hidden patch node")]
    NotHidden { label: String, target: String },
    #[error("fault {label:?}: {target} has no snap link to open")]
    NoLink { label: String, target: String },
    #[error("fault {0:?} has no targets")]
    NoTargets(String),
    #[error("zone {0:?} has no faults")]
    EmptyZone(String),
    #[error("campaign has no zones")]
    EmptyCampaign,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultKind {
    /// Targets are edge ids, optionally `from->to#optK` to name the
    /// resistor in option slot K; that form only opens the edge while K
    /// is the stitched option.
    EdgeDisconnect,
    /// Targets are hidden nodes; opens the snap link feeding each patch
    /// from the previous layer, i.e. every incoming edge.
    PatchDisconnect,
    /// Targets are any non-output nodes; opens the snap link to the next layer.
    LayerLinkDisconnect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultSpec {
    pub kind: FaultKind,
    pub targets: Vec<String>,
    #[serde(default)]
    pub label: String,
}

impl FaultSpec {
    pub fn edges(label: impl Into<String>, targets: &[&str]) -> Self {
        Self {
            kind: FaultKind::EdgeDisconnect,
            targets: targets.iter().map(|s| s.to_string()).collect(),
            label: label.into(),
        }
    }

    pub fn patch(label: impl Into<String>, node: &str) -> Self {
        Self {
            kind: FaultKind::PatchDisconnect,
            targets: vec![node.to_string()],
            label: label.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultZone {
    pub name: String,
    pub faults: Vec<FaultSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Campaign {
    pub zones: Vec<FaultZone>,
}

impl Campaign {
    pub fn parse(document: &str) -> Result<Self, FaultError> {
        let campaign: Campaign = serde_json::from_str(document).map_err(NetlistError::from)?;
        if campaign.zones.is_empty() {
            return Err(FaultError::EmptyCampaign);
        }
        if let Some(z) = campaign.zones.iter().find(|z| z.faults.is_empty()) {
            return Err(FaultError::EmptyZone(z.name.clone()));
        }
        Ok(campaign)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("campaign serializes")
    }
}

/// Edge indices a spec opens on `network`, using its stored selections.
fn resolve(network: &FabricNetwork, spec: &FaultSpec) -> Result<Vec<usize>, FaultError> {
    if spec.targets.is_empty() {
        return Err(FaultError::NoTargets(spec.label.clone()));
    }
    let unknown = |t: &str| FaultError::UnknownTarget {
        label: spec.label.clone(),
        target: t.to_string(),
    };
    let mut out = Vec::new();
    for target in &spec.targets {
        match spec.kind {
            FaultKind::EdgeDisconnect => {
                let (edge_id, slot) = match target.split_once('#') {
                    Some((id, opt)) => {
                        let k = opt
                            .strip_prefix("opt")
                            .and_then(|k| k.parse::<usize>().ok())
                            .ok_or_else(|| unknown(target))?;
                        (id, Some(k))
                    }
                    None => (target.as_str(), None),
                };
                let e = network.edge_index(edge_id).ok_or_else(|| unknown(target))?;
                let edge = &network.edges[e];
                match slot {
                    Some(k) if k >= edge.options.len() => return Err(unknown(target)),
                    Some(k) if k != edge.selected => {}
                    _ => out.push(e),
                }
            }
            FaultKind::PatchDisconnect | FaultKind::LayerLinkDisconnect => {
                let node = network.node(target).ok_or_else(|| unknown(target))?;
                if spec.kind == FaultKind::PatchDisconnect && node.role != NodeRole::Hidden {
                    return Err(FaultError::NotHidden {
                        label: spec.label.clone(),
                        target: target.clone(),
                    });
                }
                let links = if spec.kind == FaultKind::PatchDisconnect {
                    network.incoming_edges(target)
                } else {
                    network.outgoing_edges(target)
                };
                if links.is_empty() {
                    return Err(FaultError::NoLink {
                        label: spec.label.clone(),
                        target: target.clone(),
                    });
                }
                out.extend(links);
            }
        }
    }
    Ok(out)
}

/// Copy of `network` with the spec's edges opened.
pub fn apply_fault(network: &FabricNetwork, spec: &FaultSpec) -> Result<FabricNetwork, FaultError> {
    let edges = resolve(network, spec)?;
    let mut copy = network.clone();
    for e in edges {
        copy.edges[e].state = EdgeState::Disconnected;
    }
    Ok(copy)
}

pub fn apply_faults(network: &FabricNetwork, specs: &[FaultSpec]) -> Result<FabricNetwork, FaultError> {
    specs.iter().try_fold(network.clone(), |net, spec| apply_fault(&net, spec))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaEntry {
    pub pattern: String,
    pub node: String,
    pub baseline: f64,
    pub faulted: f64,
    /// Percent change, or volts when `absolute`.
    pub delta: f64,
    /// Baseline under 1 mV: `delta` is `faulted - baseline` in volts.
    pub absolute: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputShift {
    pub pattern: String,
    pub node: String,
    /// Baseline `V - threshold`.
    pub baseline_margin: f64,
    /// Faulted minus baseline voltage.
    pub shift: f64,
    pub flipped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FaultOutcome {
    pub label: String,
    pub kind: FaultKind,
    pub targets: Vec<String>,
    /// Edges actually opened.
    pub opened_edges: Vec<String>,
    /// Set when the faulted network could not be solved.
    pub error: Option<String>,
    pub entries: Vec<DeltaEntry>,
    pub outputs: Vec<OutputShift>,
    pub table_after: Option<TruthTable>,
    pub flipped_rows: Vec<String>,
    pub target_error_after: Option<u32>,
}

impl FaultOutcome {
    /// Largest |percent| shift over entries with a usable baseline.
    pub fn max_abs_delta_percent(&self) -> f64 {
        self.entries
            .iter()
            .filter(|e| !e.absolute)
            .map(|e| e.delta.abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FaultReport {
    pub baseline_table: TruthTable,
    pub target_error_baseline: u32,
    pub faults: Vec<FaultOutcome>,
}

/// Nodes whose voltages a report lists: every RC node.
fn reported_nodes(circuit: &Circuit) -> Vec<usize> {
    (0..circuit.ids.len()).filter(|&i| circuit.cap[i] > 0.0).collect()
}

fn realized_table(circuit: &Circuit, volts: &[Vec<f64>]) -> Result<TruthTable, NetlistError> {
    TruthTable::new(
        volts
            .iter()
            .map(|v| circuit.outputs.iter().map(|&o| logic_level(v[o], circuit.threshold)).collect())
            .collect(),
    )
}

fn delta(baseline: f64, faulted: f64) -> (f64, bool) {
    if baseline.abs() < DELTA_PERCENT_FLOOR {
        (faulted - baseline, true)
    } else {
        (100.0 * (faulted - baseline) / baseline, false)
    }
}

/// Evaluates each spec independently against the unfaulted baseline.
/// Solver failures are recorded on the affected outcome.
pub fn fault_report(
    network: &FabricNetwork,
    assignment: &WeightAssignment,
    specs: &[FaultSpec],
    target: &TruthTable,
) -> Result<FaultReport, FaultError> {
    let network = network.with_assignment(assignment)?;
    let circuit = Circuit::compile(&network)?;
    let baseline = circuit.table_voltages(&assignment.selected)?;
    let baseline_table = realized_table(&circuit, &baseline)?;
    let nodes = reported_nodes(&circuit);
    let th = circuit.threshold;

    // Resolve up front so bad targets abort the whole report.
    let resolved: Vec<Vec<usize>> = specs.iter().map(|s| resolve(&network, s)).collect::<Result<_, _>>()?;

    let faults = specs
        .par_iter()
        .zip(resolved.par_iter())
        .map(|(spec, edges)| {
            let mut faulted = circuit.clone();
            for &e in edges {
                faulted.edges[e].connected = false;
            }
            let mut outcome = FaultOutcome {
                label: spec.label.clone(),
                kind: spec.kind,
                targets: spec.targets.clone(),
                opened_edges: edges.iter().map(|&e| network.edges[e].id()).collect(),
                error: None,
                entries: Vec::new(),
                outputs: Vec::new(),
                table_after: None,
                flipped_rows: Vec::new(),
                target_error_after: None,
            };
            let volts = match faulted.table_voltages(&assignment.selected) {
                Ok(v) => v,
                Err(e) => {
                    outcome.error = Some(e.to_string());
                    return outcome;
                }
            };
            for p in InputPattern::all() {
                let (base, after) = (&baseline[p.index()], &volts[p.index()]);
                for &i in &nodes {
                    let (d, absolute) = delta(base[i], after[i]);
                    outcome.entries.push(DeltaEntry {
                        pattern: p.to_string(),
                        node: circuit.ids[i].clone(),
                        baseline: base[i],
                        faulted: after[i],
                        delta: d,
                        absolute,
                    });
                }
                let mut row_flipped = false;
                for &o in &circuit.outputs {
                    let flipped = logic_level(base[o], th) != logic_level(after[o], th);
                    row_flipped |= flipped;
                    outcome.outputs.push(OutputShift {
                        pattern: p.to_string(),
                        node: circuit.ids[o].clone(),
                        baseline_margin: base[o] - th,
                        shift: after[o] - base[o],
                        flipped,
                    });
                }
                if row_flipped {
                    outcome.flipped_rows.push(p.to_string());
                }
            }
            match realized_table(&circuit, &volts) {
                Ok(t) => {
                    outcome.target_error_after = Some(table_error(&t, target));
                    outcome.table_after = Some(t);
                }
                Err(e) => outcome.error = Some(e.to_string()),
            }
            outcome
        })
        .collect();

    Ok(FaultReport {
        target_error_baseline: table_error(&baseline_table, target),
        baseline_table,
        faults,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZoneReport {
    pub name: String,
    pub report: FaultReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedFault {
    pub zone: String,
    pub label: String,
    pub flipped_rows: usize,
    pub max_abs_delta_percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignReport {
    pub zones: Vec<ZoneReport>,
    /// Most disruptive first: flipped rows, then largest |Δ%|.
    pub summary: Vec<RankedFault>,
}

impl CampaignReport {
    pub fn outcomes(&self) -> impl Iterator<Item = (&str, &FaultOutcome)> {
        self.zones
            .iter()
            .flat_map(|z| z.report.faults.iter().map(move |f| (z.name.as_str(), f)))
    }

    /// One line per zone x fault x pattern x node.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("zone,fault,pattern,node,baseline,faulted,delta,delta_kind\n");
        for (zone, fault) in self.outcomes() {
            for e in &fault.entries {
                out.push_str(&format!(
                    "{},{},{},{},{:.9},{:.9},{:.6},{}\n",
                    csv_field(zone),
                    csv_field(&fault.label),
                    e.pattern,
                    e.node,
                    e.baseline,
                    e.faulted,
                    e.delta,
                    if e.absolute { "volts" } else { "percent" }
                ));
            }
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn zone_campaign(
    network: &FabricNetwork,
    assignment: &WeightAssignment,
    campaign: &Campaign,
    target: &TruthTable,
) -> Result<CampaignReport, FaultError> {
    if campaign.zones.is_empty() {
        return Err(FaultError::EmptyCampaign);
    }
    let mut zones = Vec::with_capacity(campaign.zones.len());
    for zone in &campaign.zones {
        if zone.faults.is_empty() {
            return Err(FaultError::EmptyZone(zone.name.clone()));
        }
        zones.push(ZoneReport {
            name: zone.name.clone(),
            report: fault_report(network, assignment, &zone.faults, target)?,
        });
    }
    let mut summary: Vec<RankedFault> = zones
        .iter()
        .flat_map(|z| {
            z.report.faults.iter().map(|f| RankedFault {
                zone: z.name.clone(),
                label: f.label.clone(),
                flipped_rows: f.flipped_rows.len(),
                max_abs_delta_percent: f.max_abs_delta_percent(),
            })
        })
        .collect();
    summary.sort_by(|a, b| {
        b.flipped_rows
            .cmp(&a.flipped_rows)
            .then(b.max_abs_delta_percent.total_cmp(&a.max_abs_delta_percent))
    });
    Ok(CampaignReport { zones, summary })
}

/// First incoming edge of `node` whose stitched resistor equals `ohms`.
fn incoming_with_value(network: &FabricNetwork, assignment: &WeightAssignment, node: &str, ohms: f64) -> Option<usize> {
    network
        .incoming_edges(node)
        .into_iter()
        .find(|&e| network.edges[e].options.get(assignment.selected[e]) == Some(ohms))
}

/// Row 1 / Row 4 resistor faults on patches N5 and N8, singly and together.
///
/// Row 1 is the patch's input edge carrying the 3.6 kΩ resistor and Row 4
/// the one carrying 680 kΩ. A patch without such an edge falls back to its
/// first (Row 1) or fourth (Row 4) input edge.
pub fn default_campaign(network: &FabricNetwork, assignment: &WeightAssignment) -> Result<Campaign, FaultError> {
    assignment.check(network)?;
    let mut faults = Vec::new();
    for patch in ["N5", "N8"] {
        let incoming = network.incoming_edges(patch);
        if incoming.len() < 4 {
            return Err(FaultError::UnknownTarget {
                label: format!("{patch} Row 4"),
                target: patch.to_string(),
            });
        }
        let row1 = incoming_with_value(network, assignment, patch, 3600.0).unwrap_or(incoming[0]);
        let row4 = incoming_with_value(network, assignment, patch, 680_000.0)
            .filter(|&e| e != row1)
            .unwrap_or(if incoming[3] != row1 { incoming[3] } else { incoming[0] });
        let (r1, r4) = (network.edges[row1].id(), network.edges[row4].id());
        faults.push(FaultSpec::edges(format!("{patch} Row1"), &[&r1]));
        faults.push(FaultSpec::edges(format!("{patch} Row4"), &[&r4]));
        faults.push(FaultSpec::edges(format!("{patch} Row1+Row4"), &[&r1, &r4]));
    }
    Ok(Campaign {
        zones: vec![
            FaultZone {
                name: "Zone 4 resistors".into(),
                faults,
            },
            FaultZone {
                name: "Zone 4 patches".into(),
                faults: vec![FaultSpec::patch("Patch N5", "N5"), FaultSpec::patch("Patch N8", "N8")],
            },
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::build_reference_network;

    fn setup() -> (FabricNetwork, WeightAssignment) {
        let net = build_reference_network();
        let a = WeightAssignment {
            selected: (0..36).map(|i| (i * 5 + 2) % 3).collect(),
        };
        (net, a)
    }

    #[test]
    fn edge_disconnect_is_a_pure_copy() {
        let (net, _) = setup();
        let spec = FaultSpec::edges("N5 row", &["N1->N5"]);
        let faulted = apply_fault(&net, &spec).unwrap();
        let e = net.edge_index("N1->N5").unwrap();
        assert_eq!(faulted.edges[e].state, EdgeState::Disconnected);
        assert_eq!(net.edges[e].state, EdgeState::Connected);
        let changed = faulted.edges.iter().zip(&net.edges).filter(|(a, b)| a != b).count();
        assert_eq!(changed, 1);
    }

    #[test]
    fn patch_opens_incoming_edges() {
        let (net, _) = setup();
        let faulted = apply_fault(&net, &FaultSpec::patch("p", "N5")).unwrap();
        let open: Vec<String> = faulted
            .edges
            .iter()
            .filter(|e| !e.is_connected())
            .map(|e| e.id())
            .collect();
        assert_eq!(open, vec!["N1->N5", "N2->N5", "N3->N5", "N4->N5"]);
        let faulted = apply_fault(&net, &FaultSpec::patch("p", "N1")).unwrap();
        assert_eq!(faulted.edges.iter().filter(|e| !e.is_connected()).count(), 3);
    }

    #[test]
    fn bad_targets_rejected() {
        let (net, _) = setup();
        assert!(matches!(
            apply_fault(&net, &FaultSpec::edges("x", &["A->N9"])),
            Err(FaultError::UnknownTarget { .. })
        ));
        assert!(matches!(
            apply_fault(&net, &FaultSpec::patch("x", "X")),
            Err(FaultError::NotHidden { .. })
        ));
        let link = FaultSpec {
            kind: FaultKind::LayerLinkDisconnect,
            targets: vec!["A".into()],
            label: "A snap".into(),
        };
        let faulted = apply_fault(&net, &link).unwrap();
        assert_eq!(faulted.edges.iter().filter(|e| !e.is_connected()).count(), 4);
    }

    #[test]
    fn option_slot_targets_follow_selection() {
        let (net, _) = setup();
        let mut sel = net.clone();
        let i = sel.edge_index("A->N1").unwrap();
        sel.edges[i].selected = 2;
        let hit = apply_fault(&sel, &FaultSpec::edges("x", &["A->N1#opt2"])).unwrap();
        assert_eq!(hit.edges[i].state, EdgeState::Disconnected);
        let miss = apply_fault(&sel, &FaultSpec::edges("x", &["A->N1#opt0"])).unwrap();
        assert_eq!(miss, sel);
        assert!(apply_fault(&sel, &FaultSpec::edges("x", &["A->N1#opt7"])).is_err());
    }

    #[test]
    fn empty_spec_list_leaves_network() {
        let (net, _) = setup();
        assert_eq!(apply_faults(&net, &[]).unwrap(), net);
    }

    #[test]
    fn no_fault_report_is_flat() {
        let (net, a) = setup();
        let spec = FaultSpec::edges("unstitched", &["A->N1#opt1"]);
        let stitched = a.selected[0];
        assert_ne!(stitched, 1);
        let r = fault_report(&net, &a, &[spec], &TruthTable::reference()).unwrap();
        let f = &r.faults[0];
        assert!(f.opened_edges.is_empty());
        assert!(f.flipped_rows.is_empty());
        assert!(f.entries.iter().all(|e| e.delta == 0.0));
    }

    #[test]
    fn zero_baseline_uses_absolute_delta() {
        assert_eq!(delta(0.0, 0.2), (0.2, true));
        let (d, abs) = delta(2.0, 1.5);
        assert!(!abs && (d + 25.0).abs() < 1e-12);
    }

    #[test]
    fn campaign_rejects_empty_zone() {
        let doc = r#"{"zones":[{"name":"Zone 1","faults":[]}]}"#;
        assert!(matches!(Campaign::parse(doc), Err(FaultError::EmptyZone(_))));
        let doc = r#"{"zones":[{"name":"Zone 4","faults":[{"kind":"edge_disconnect","targets":["A->N1#opt0"],"label":"N1 Row1"}]}]}"#;
        assert_eq!(Campaign::parse(doc).unwrap().zones[0].faults[0].label, "N1 Row1");
    }
}
