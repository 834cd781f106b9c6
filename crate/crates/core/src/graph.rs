//! Graph-dataset accounting: edge totals, simple/complex splits, seeded
//! subsampling, and message-passing FLOPs estimated from edge counts.

use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::seeded;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphRecord {
    pub graph_id: String,
    pub class_label: String,
    pub num_nodes: u64,
    pub num_edges: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphManifest {
    pub source_name: String,
    pub records: Vec<GraphRecord>,
}

impl GraphManifest {
    /// Builds a manifest, rejecting duplicate ids and graphs without nodes.
    pub fn new(source_name: impl Into<String>, records: Vec<GraphRecord>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(records.len());
        for r in &records {
            if r.num_nodes == 0 {
                return Err(Error::InvalidInput(format!("graph `{}` has no nodes", r.graph_id)));
            }
            if !seen.insert(r.graph_id.as_str()) {
                return Err(Error::DuplicateGraphId(r.graph_id.clone()));
            }
        }
        Ok(Self {
            source_name: source_name.into(),
            records,
        })
    }

    pub fn total_graphs(&self) -> usize {
        self.records.len()
    }

    pub fn total_nodes(&self) -> u64 {
        self.records.iter().map(|r| r.num_nodes).sum()
    }

    /// Records grouped by class, classes in order of first appearance and
    /// records in input order.
    fn by_class(&self) -> Vec<(&str, Vec<&GraphRecord>)> {
        let mut order: Vec<(&str, Vec<&GraphRecord>)> = Vec::new();
        let mut index: BTreeMap<&str, usize> = BTreeMap::new();
        for r in &self.records {
            let slot = *index.entry(r.class_label.as_str()).or_insert_with(|| {
                order.push((r.class_label.as_str(), Vec::new()));
                order.len() - 1
            });
            order[slot].1.push(r);
        }
        order
    }
}

/// Exact total edge count, the data-volume metric for graph datasets.
pub fn total_edges(manifest: &GraphManifest) -> u64 {
    manifest.records.iter().map(|r| r.num_edges).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitMode {
    EqualGraphs,
    EqualEdges,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitResult {
    pub mode: SplitMode,
    pub simple: Vec<String>,
    pub complex: Vec<String>,
    pub simple_edges: u64,
    pub complex_edges: u64,
    pub simple_graphs: usize,
    pub complex_graphs: usize,
    /// Number of graphs each class sends to the simple subset.
    pub per_class_cuts: BTreeMap<String, usize>,
}

/// Each class sorted ascending by edge count; ties keep input order.
fn sorted_classes(manifest: &GraphManifest) -> Result<Vec<(&str, Vec<&GraphRecord>)>> {
    let mut classes = manifest.by_class();
    for (class, members) in &mut classes {
        if members.len() < 2 {
            return Err(Error::ClassTooSmall {
                class: class.to_string(),
                size: members.len(),
            });
        }
        members.sort_by_key(|r| r.num_edges);
    }
    Ok(classes)
}

fn assemble(mode: SplitMode, classes: &[(&str, Vec<&GraphRecord>)], cuts: &[usize]) -> SplitResult {
    let mut out = SplitResult {
        mode,
        simple: Vec::new(),
        complex: Vec::new(),
        simple_edges: 0,
        complex_edges: 0,
        simple_graphs: 0,
        complex_graphs: 0,
        per_class_cuts: BTreeMap::new(),
    };
    for ((class, members), &cut) in classes.iter().zip(cuts) {
        let (simple, complex) = members.split_at(cut);
        out.simple.extend(simple.iter().map(|r| r.graph_id.clone()));
        out.complex.extend(complex.iter().map(|r| r.graph_id.clone()));
        out.simple_edges += simple.iter().map(|r| r.num_edges).sum::<u64>();
        out.complex_edges += complex.iter().map(|r| r.num_edges).sum::<u64>();
        out.per_class_cuts.insert(class.to_string(), cut);
    }
    out.simple_graphs = out.simple.len();
    out.complex_graphs = out.complex.len();
    out
}

/// Per class, the `⌊k/2⌋` graphs with the fewest edges form the simple subset
/// and the rest the complex one.
pub fn split_equal_graphs(manifest: &GraphManifest) -> Result<SplitResult> {
    let classes = sorted_classes(manifest)?;
    let cuts: Vec<usize> = classes.iter().map(|(_, m)| m.len() / 2).collect();
    Ok(assemble(SplitMode::EqualGraphs, &classes, &cuts))
}

/// Prefix cut `m ∈ [1, k−1]` of an ascending edge list minimising
/// `|Σ first m − Σ rest|`, ties to the smaller `m`.
pub fn balanced_cut(sorted_edges: &[u64]) -> usize {
    let total: u64 = sorted_edges.iter().sum();
    let mut prefix = 0u64;
    let mut best = (u64::MAX, 1);
    for (m, &e) in sorted_edges.iter().enumerate().take(sorted_edges.len().saturating_sub(1)) {
        prefix += e;
        let diff = prefix.abs_diff(total - prefix);
        if diff < best.0 {
            best = (diff, m + 1);
        }
    }
    best.1
}

/// Per class, the shortest prefix of the ascending edge list whose edge mass
/// best balances the remainder forms the simple subset.
pub fn split_equal_edges(manifest: &GraphManifest) -> Result<SplitResult> {
    let classes = sorted_classes(manifest)?;
    let mut cuts = Vec::with_capacity(classes.len());
    for (class, members) in &classes {
        let edges: Vec<u64> = members.iter().map(|r| r.num_edges).collect();
        if edges.iter().all(|&e| e == 0) {
            return Err(Error::AllZeroEdges {
                class: class.to_string(),
            });
        }
        cuts.push(balanced_cut(&edges));
    }
    Ok(assemble(SplitMode::EqualEdges, &classes, &cuts))
}

/// Number of graphs kept at `ratio`: `⌈ratio · n⌉`, ignoring float noise in
/// the product (`0.3 · 10` keeps 3, not 4).
fn subsample_size(ratio: f64, n: usize) -> usize {
    let exact = ratio * n as f64;
    let rounded = exact.round();
    let k = if (exact - rounded).abs() <= 1e-9 * exact.max(1.0) {
        rounded
    } else {
        exact.ceil()
    };
    (k as usize).min(n)
}

/// Uniform random subset of `⌈ratio · total_graphs⌉` graphs chosen by a seeded
/// Fisher–Yates shuffle. Kept records retain their input order.
pub fn subsample_fraction(manifest: &GraphManifest, ratio: f64, seed: u64) -> Result<GraphManifest> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(Error::InvalidRatio(ratio));
    }
    let n = manifest.records.len();
    let k = subsample_size(ratio, n);
    if k == n {
        return Ok(manifest.clone());
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seeded(seed));
    let mut keep = order[..k].to_vec();
    keep.sort_unstable();
    Ok(GraphManifest {
        source_name: manifest.source_name.clone(),
        records: keep.into_iter().map(|i| manifest.records[i].clone()).collect(),
    })
}

/// Add-multiply counts of one message-passing layer type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessagePassingCost {
    /// `y`: operations per message function call.
    pub ops_per_message: u64,
    /// `x`: operations per node update.
    pub ops_per_update: u64,
    /// `L`: number of layers.
    pub layers: u64,
}

impl MessagePassingCost {
    pub fn new(ops_per_message: u64, ops_per_update: u64, layers: u64) -> Result<Self> {
        if ops_per_message < 1 {
            return Err(Error::InvalidInput("ops_per_message (y) must be >= 1".into()));
        }
        if layers < 1 {
            return Err(Error::InvalidInput("layers (L) must be >= 1".into()));
        }
        Ok(Self {
            ops_per_message,
            ops_per_update,
            layers,
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlopsMode {
    /// `L·(N·x + k·y·E)`.
    #[default]
    Exact,
    /// `k·y·E·L`, dropping the node-update term.
    PaperApprox,
}

/// How `E` relates to the degree sum.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeConvention {
    /// Each undirected edge counted once: `Σ dᵢ = 2E`, so `k = 2`.
    #[default]
    Undirected,
    /// `E` counts directed edges, each delivering one message: `k = 1`.
    Directed,
}

impl EdgeConvention {
    fn messages_per_edge(self) -> u128 {
        match self {
            EdgeConvention::Undirected => 2,
            EdgeConvention::Directed => 1,
        }
    }
}

/// Add-multiply operations of one forward pass over a graph (or a whole
/// dataset, summing nodes and edges over its graphs). Per layer node `i`
/// costs `x + y·dᵢ`.
pub fn flops_forward(
    total_edges: u64,
    total_nodes: u64,
    cost: &MessagePassingCost,
    mode: FlopsMode,
    convention: EdgeConvention,
) -> u128 {
    let e = total_edges as u128;
    let n = total_nodes as u128;
    let x = cost.ops_per_update as u128;
    let y = cost.ops_per_message as u128;
    let l = cost.layers as u128;
    let messages = convention.messages_per_edge() * y * e;
    match mode {
        FlopsMode::Exact => l * (n * x + messages),
        FlopsMode::PaperApprox => l * messages,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manifest(rows: &[(&str, u64)]) -> GraphManifest {
        let records = rows
            .iter()
            .enumerate()
            .map(|(i, &(class, edges))| GraphRecord {
                graph_id: format!("g{i}"),
                class_label: class.to_string(),
                num_nodes: edges + 1,
                num_edges: edges,
            })
            .collect();
        GraphManifest::new("test", records).unwrap()
    }

    fn edges_of(m: &GraphManifest, ids: &[String]) -> Vec<u64> {
        ids.iter()
            .map(|id| m.records.iter().find(|r| &r.graph_id == id).unwrap().num_edges)
            .collect()
    }

    #[test]
    fn total_edges_examples() {
        assert_eq!(total_edges(&manifest(&[])), 0);
        let m = manifest(&[("a", 2), ("a", 5), ("b", 3)]);
        assert_eq!(total_edges(&m), 10);
    }

    #[test]
    fn duplicate_ids_and_empty_graphs_rejected() {
        let r = GraphRecord {
            graph_id: "x".into(),
            class_label: "a".into(),
            num_nodes: 2,
            num_edges: 1,
        };
        assert!(matches!(
            GraphManifest::new("m", vec![r.clone(), r.clone()]),
            Err(Error::DuplicateGraphId(_))
        ));
        let mut empty = r;
        empty.num_nodes = 0;
        assert!(GraphManifest::new("m", vec![empty]).is_err());
    }

    #[test]
    fn equal_graph_split_examples() {
        let m = manifest(&[("a", 2), ("a", 5), ("a", 3), ("a", 9)]);
        let s = split_equal_graphs(&m).unwrap();
        assert_eq!(edges_of(&m, &s.simple), vec![2, 3]);
        assert_eq!(edges_of(&m, &s.complex), vec![5, 9]);

        let m = manifest(&[("a", 4), ("a", 4), ("a", 4), ("a", 4)]);
        let s = split_equal_graphs(&m).unwrap();
        assert_eq!((s.simple_graphs, s.complex_graphs), (2, 2));
        assert_eq!(s.simple_edges, s.complex_edges);

        let rows: Vec<(&str, u64)> = (0..4).map(|i| ("a", i)).chain((0..6).map(|i| ("b", i))).collect();
        let s = split_equal_graphs(&manifest(&rows)).unwrap();
        assert_eq!(s.simple_graphs, 5);
        assert_eq!(s.per_class_cuts["a"], 2);
        assert_eq!(s.per_class_cuts["b"], 3);
    }

    #[test]
    fn equal_graph_split_odd_class_gives_complex_the_extra_graph() {
        let s = split_equal_graphs(&manifest(&[("a", 1), ("a", 2), ("a", 3)])).unwrap();
        assert_eq!((s.simple_graphs, s.complex_graphs), (1, 2));
    }

    #[test]
    fn class_too_small() {
        let m = manifest(&[("a", 1), ("a", 2), ("b", 3)]);
        match split_equal_graphs(&m) {
            Err(Error::ClassTooSmall { class, size }) => assert_eq!((class.as_str(), size), ("b", 1)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(split_equal_edges(&m), Err(Error::ClassTooSmall { .. })));
    }

    #[test]
    fn equal_edge_split_examples() {
        let m = manifest(&[("a", 6), ("a", 1), ("a", 3), ("a", 2)]);
        let s = split_equal_edges(&m).unwrap();
        assert_eq!(s.per_class_cuts["a"], 3);
        assert_eq!((s.simple_edges, s.complex_edges), (6, 6));
        assert_eq!(edges_of(&m, &s.simple), vec![1, 2, 3]);

        let s = split_equal_edges(&manifest(&[("a", 4), ("a", 4)])).unwrap();
        assert_eq!(s.per_class_cuts["a"], 1);
        assert_eq!(s.simple_edges, s.complex_edges);
    }

    #[test]
    fn equal_edge_split_rejects_edgeless_class() {
        let m = manifest(&[("a", 0), ("a", 0), ("b", 1), ("b", 1)]);
        assert!(matches!(split_equal_edges(&m), Err(Error::AllZeroEdges { class }) if class == "a"));
    }

    #[test]
    fn ties_keep_input_order() {
        let m = manifest(&[("a", 3), ("a", 1), ("a", 3), ("a", 1)]);
        let s = split_equal_graphs(&m).unwrap();
        assert_eq!(s.simple, vec!["g1", "g3"]);
        assert_eq!(s.complex, vec!["g0", "g2"]);
    }

    #[test]
    fn subsample_examples() {
        let rows: Vec<(&str, u64)> = (0..10).map(|i| ("a", i)).collect();
        let m = manifest(&rows);
        assert_eq!(subsample_fraction(&m, 1.0, 3).unwrap(), m);
        let half = subsample_fraction(&m, 0.5, 3).unwrap();
        assert_eq!(half.records.len(), 5);
        assert!(half.records.iter().all(|r| m.records.contains(r)));
        assert_eq!(half, subsample_fraction(&m, 0.5, 3).unwrap());
        assert_eq!(subsample_fraction(&m, 0.3, 3).unwrap().records.len(), 3);
        assert_eq!(subsample_fraction(&m, 0.31, 3).unwrap().records.len(), 4);
        assert!(matches!(subsample_fraction(&m, 0.0, 1), Err(Error::InvalidRatio(_))));
        assert!(matches!(subsample_fraction(&m, 1.2, 1), Err(Error::InvalidRatio(_))));
    }

    #[test]
    fn subsample_is_uniform_over_seeds() {
        let rows: Vec<(&str, u64)> = (0..10).map(|i| ("a", i)).collect();
        let m = manifest(&rows);
        let mut hits = vec![0usize; 10];
        for seed in 0..1000 {
            for r in subsample_fraction(&m, 0.5, seed).unwrap().records {
                hits[r.num_edges as usize] += 1;
            }
        }
        for h in hits {
            let freq = h as f64 / 1000.0;
            assert!((freq - 0.5).abs() <= 0.05, "frequency {freq}");
        }
    }

    #[test]
    fn flops_examples() {
        let c = MessagePassingCost::new(1, 0, 2).unwrap();
        for mode in [FlopsMode::Exact, FlopsMode::PaperApprox] {
            assert_eq!(flops_forward(3, 3, &c, mode, EdgeConvention::Undirected), 12);
        }
        assert_eq!(flops_forward(0, 5, &c, FlopsMode::Exact, EdgeConvention::Undirected), 0);
        let c = MessagePassingCost::new(7, 3, 4).unwrap();
        let exact = flops_forward(100, 40, &c, FlopsMode::Exact, EdgeConvention::Undirected);
        let approx = flops_forward(100, 40, &c, FlopsMode::PaperApprox, EdgeConvention::Undirected);
        assert_eq!(exact - approx, 4 * 40 * 3);
        assert_eq!(approx, 2 * 7 * 100 * 4);
        assert_eq!(
            flops_forward(100, 40, &c, FlopsMode::PaperApprox, EdgeConvention::Directed),
            7 * 100 * 4
        );
        assert!(MessagePassingCost::new(0, 1, 1).is_err());
        assert!(MessagePassingCost::new(1, 1, 0).is_err());
    }
}
