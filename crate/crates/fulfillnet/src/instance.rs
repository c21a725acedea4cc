//! Fulfillment network instances: demand nodes, fulfillment centers (FCs),
//! and the metric that yields exact travel times between them.
//!
//! An instance is immutable after construction and safe to share across
//! threads; every operation in this crate is a pure function of its inputs.
//! Distances are materialized lazily from the metric (there is no stored
//! all-pairs table except for the explicit-matrix variant, which is the
//! table).

use std::collections::{HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quantity::{Quantity, QuantityError, DEFAULT_SCALE};

/// Where a node lives, interpreted against the instance metric.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Location {
    /// Coordinates for line (length 1) and Euclidean (length = dim) metrics.
    Point(Vec<Quantity>),
    /// Tree-metric node index.
    Node(usize),
    /// Explicit-matrix metric: the node is addressed by its list position.
    Implicit,
}

/// A demand node with its requested quantity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemandNode {
    pub id: String,
    pub loc: Location,
    pub quantity: u64,
}

/// A fulfillment center with its supply capacity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FcNode {
    pub id: String,
    pub loc: Location,
    pub capacity: u64,
}

/// A weighted tree on named nodes; distances are unique path lengths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeMetric {
    node_names: Vec<String>,
    edges: Vec<(usize, usize, Quantity)>,
    parent: Vec<Option<usize>>,
    level: Vec<u32>,
    root_distance: Vec<Quantity>,
}

impl TreeMetric {
    /// Builds and validates a tree from named nodes and weighted edges.
    pub fn new(
        node_names: Vec<String>,
        named_edges: &[(String, String, Quantity)],
    ) -> Result<TreeMetric, InstanceError> {
        let n = node_names.len();
        if n == 0 {
            return Err(InstanceError::TreeEmpty);
        }
        let mut index = HashMap::new();
        for (i, name) in node_names.iter().enumerate() {
            if index.insert(name.clone(), i).is_some() {
                return Err(InstanceError::DuplicateTreeNode(name.clone()));
            }
        }
        if named_edges.len() != n - 1 {
            return Err(InstanceError::TreeNotTree {
                nodes: n,
                edges: named_edges.len(),
            });
        }
        let mut edges = Vec::with_capacity(named_edges.len());
        let mut adj = vec![Vec::new(); n];
        for (a, b, w) in named_edges {
            let ai = *index
                .get(a)
                .ok_or_else(|| InstanceError::UnknownTreeNode(a.clone()))?;
            let bi = *index
                .get(b)
                .ok_or_else(|| InstanceError::UnknownTreeNode(b.clone()))?;
            if w.raw() < 0 {
                return Err(InstanceError::NegativeDistance);
            }
            adj[ai].push((bi, *w));
            adj[bi].push((ai, *w));
            edges.push((ai, bi, *w));
        }
        let mut parent = vec![None; n];
        let mut level = vec![0u32; n];
        let mut root_distance = vec![Quantity::ZERO; n];
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(u) = queue.pop_front() {
            for &(v, w) in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    parent[v] = Some(u);
                    level[v] = level[u] + 1;
                    root_distance[v] = root_distance[u].checked_add(w);
                    queue.push_back(v);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(InstanceError::TreeDisconnected);
        }
        Ok(TreeMetric {
            node_names,
            edges,
            parent,
            level,
            root_distance,
        })
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.node_names.iter().position(|n| n == name)
    }

    pub fn node_name(&self, idx: usize) -> &str {
        &self.node_names[idx]
    }

    fn lca(&self, mut a: usize, mut b: usize) -> usize {
        while self.level[a] > self.level[b] {
            a = self.parent[a].expect("non-root has parent");
        }
        while self.level[b] > self.level[a] {
            b = self.parent[b].expect("non-root has parent");
        }
        while a != b {
            a = self.parent[a].expect("non-root has parent");
            b = self.parent[b].expect("non-root has parent");
        }
        a
    }

    pub fn path_length(&self, a: usize, b: usize) -> Quantity {
        let l = self.lca(a, b);
        self.root_distance[a]
            .checked_add(self.root_distance[b])
            .checked_sub(self.root_distance[l].scale_by(2))
    }
}

/// The metric giving travel times between demand nodes and FCs.
///
/// Explicit matrices need not satisfy the triangle inequality; no algorithm
/// in this crate relies on it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Metric {
    Line,
    Euclidean { dim: usize },
    Tree(TreeMetric),
    /// Dense table, rows indexed by demand position, columns by FC position.
    Matrix(Vec<Vec<Quantity>>),
}

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("malformed instance document: {0}")]
    Parse(String),
    #[error("invalid quantity in {field}: {source}")]
    Quantity {
        field: String,
        #[source]
        source: QuantityError,
    },
    #[error("duplicate demand id {0:?}")]
    DuplicateDemandId(String),
    #[error("duplicate fc id {0:?}")]
    DuplicateFcId(String),
    #[error("total demand {demand} exceeds total capacity {capacity}")]
    SupplyShort { demand: u128, capacity: u128 },
    #[error("node {id:?} has {got} coordinates, metric needs {expected}")]
    DimensionMismatch {
        id: String,
        expected: usize,
        got: usize,
    },
    #[error("node {id:?} is missing a position for this metric")]
    MissingPosition { id: String },
    #[error("node {id:?} references unknown tree node {node:?}")]
    UnknownHostNode { id: String, node: String },
    #[error("tree metric has no nodes")]
    TreeEmpty,
    #[error("duplicate tree node {0:?}")]
    DuplicateTreeNode(String),
    #[error("unknown tree node {0:?} in edge list")]
    UnknownTreeNode(String),
    #[error("tree metric must be connected and acyclic: {nodes} nodes need {} edges, got {edges}", nodes - 1)]
    TreeNotTree { nodes: usize, edges: usize },
    #[error("tree metric is disconnected")]
    TreeDisconnected,
    #[error("distance matrix must have one row per demand and one column per fc")]
    MatrixShape,
    #[error("distances must be nonnegative")]
    NegativeDistance,
    #[error("unknown id {0:?}")]
    UnknownId(String),
    #[error("aspect ratio undefined: every demand-fc distance is zero")]
    UndefinedAspectRatio,
}

/// An immutable fulfillment instance; see module docs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    demands: Vec<DemandNode>,
    fcs: Vec<FcNode>,
    metric: Metric,
    scale: u64,
}

impl Instance {
    pub fn new(
        demands: Vec<DemandNode>,
        fcs: Vec<FcNode>,
        metric: Metric,
        scale: u64,
    ) -> Result<Instance, InstanceError> {
        let instance = Instance {
            demands,
            fcs,
            metric,
            scale,
        };
        instance.validate()?;
        Ok(instance)
    }

    /// Line-metric constructor: `(id, position, quantity)` triples.
    pub fn line(
        demands: Vec<(String, Quantity, u64)>,
        fcs: Vec<(String, Quantity, u64)>,
    ) -> Result<Instance, InstanceError> {
        Instance::new(
            demands
                .into_iter()
                .map(|(id, p, quantity)| DemandNode {
                    id,
                    loc: Location::Point(vec![p]),
                    quantity,
                })
                .collect(),
            fcs.into_iter()
                .map(|(id, p, capacity)| FcNode {
                    id,
                    loc: Location::Point(vec![p]),
                    capacity,
                })
                .collect(),
            Metric::Line,
            DEFAULT_SCALE,
        )
    }

    /// Euclidean constructor: coordinate vectors must have length `dim`.
    pub fn euclidean(
        dim: usize,
        demands: Vec<(String, Vec<Quantity>, u64)>,
        fcs: Vec<(String, Vec<Quantity>, u64)>,
    ) -> Result<Instance, InstanceError> {
        Instance::new(
            demands
                .into_iter()
                .map(|(id, p, quantity)| DemandNode {
                    id,
                    loc: Location::Point(p),
                    quantity,
                })
                .collect(),
            fcs.into_iter()
                .map(|(id, p, capacity)| FcNode {
                    id,
                    loc: Location::Point(p),
                    capacity,
                })
                .collect(),
            Metric::Euclidean { dim },
            DEFAULT_SCALE,
        )
    }

    /// Tree constructor; demands and FCs name the tree node hosting them.
    /// A node may host any number of demands and FCs.
    pub fn tree(
        tree: TreeMetric,
        demands: Vec<(String, &str, u64)>,
        fcs: Vec<(String, &str, u64)>,
    ) -> Result<Instance, InstanceError> {
        let host = |id: &str, node: &str| -> Result<usize, InstanceError> {
            tree.node_index(node)
                .ok_or_else(|| InstanceError::UnknownHostNode {
                    id: id.to_string(),
                    node: node.to_string(),
                })
        };
        let mut demand_nodes = Vec::with_capacity(demands.len());
        for (id, node, quantity) in demands {
            let loc = Location::Node(host(&id, node)?);
            demand_nodes.push(DemandNode { id, loc, quantity });
        }
        let mut fc_nodes = Vec::with_capacity(fcs.len());
        for (id, node, capacity) in fcs {
            let loc = Location::Node(host(&id, node)?);
            fc_nodes.push(FcNode { id, loc, capacity });
        }
        Instance::new(demand_nodes, fc_nodes, Metric::Tree(tree), DEFAULT_SCALE)
    }

    /// Explicit-matrix constructor: `rows[i][j]` is the distance from the
    /// `i`-th demand to the `j`-th FC.
    pub fn matrix(
        rows: Vec<Vec<Quantity>>,
        demands: Vec<(String, u64)>,
        fcs: Vec<(String, u64)>,
    ) -> Result<Instance, InstanceError> {
        Instance::new(
            demands
                .into_iter()
                .map(|(id, quantity)| DemandNode {
                    id,
                    loc: Location::Implicit,
                    quantity,
                })
                .collect(),
            fcs.into_iter()
                .map(|(id, capacity)| FcNode {
                    id,
                    loc: Location::Implicit,
                    capacity,
                })
                .collect(),
            Metric::Matrix(rows),
            DEFAULT_SCALE,
        )
    }

    fn validate(&self) -> Result<(), InstanceError> {
        let mut seen = HashSet::new();
        for d in &self.demands {
            if !seen.insert(&d.id) {
                return Err(InstanceError::DuplicateDemandId(d.id.clone()));
            }
        }
        let mut seen = HashSet::new();
        for f in &self.fcs {
            if !seen.insert(&f.id) {
                return Err(InstanceError::DuplicateFcId(f.id.clone()));
            }
        }
        let demand: u128 = self.demands.iter().map(|d| d.quantity as u128).sum();
        let capacity: u128 = self.fcs.iter().map(|f| f.capacity as u128).sum();
        if demand > capacity {
            return Err(InstanceError::SupplyShort { demand, capacity });
        }
        let check_loc = |id: &str, loc: &Location| -> Result<(), InstanceError> {
            match (&self.metric, loc) {
                (Metric::Line, Location::Point(p)) if p.len() == 1 => Ok(()),
                (Metric::Line, Location::Point(p)) => Err(InstanceError::DimensionMismatch {
                    id: id.to_string(),
                    expected: 1,
                    got: p.len(),
                }),
                (Metric::Euclidean { dim }, Location::Point(p)) if p.len() == *dim => Ok(()),
                (Metric::Euclidean { dim }, Location::Point(p)) => {
                    Err(InstanceError::DimensionMismatch {
                        id: id.to_string(),
                        expected: *dim,
                        got: p.len(),
                    })
                }
                (Metric::Tree(t), Location::Node(n)) if *n < t.node_names.len() => Ok(()),
                (Metric::Matrix(_), Location::Implicit) => Ok(()),
                _ => Err(InstanceError::MissingPosition { id: id.to_string() }),
            }
        };
        for d in &self.demands {
            check_loc(&d.id, &d.loc)?;
        }
        for f in &self.fcs {
            check_loc(&f.id, &f.loc)?;
        }
        if let Metric::Matrix(rows) = &self.metric {
            if rows.len() != self.demands.len()
                || rows.iter().any(|r| r.len() != self.fcs.len())
            {
                return Err(InstanceError::MatrixShape);
            }
            if rows.iter().flatten().any(|q| q.raw() < 0) {
                return Err(InstanceError::NegativeDistance);
            }
        }
        Ok(())
    }

    pub fn demands(&self) -> &[DemandNode] {
        &self.demands
    }

    pub fn fcs(&self) -> &[FcNode] {
        &self.fcs
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn scale(&self) -> u64 {
        self.scale
    }

    pub fn n_demands(&self) -> usize {
        self.demands.len()
    }

    pub fn n_fcs(&self) -> usize {
        self.fcs.len()
    }

    pub fn total_demand(&self) -> u64 {
        self.demands.iter().map(|d| d.quantity).sum()
    }

    pub fn total_capacity(&self) -> u64 {
        self.fcs.iter().map(|f| f.capacity).sum()
    }

    pub fn demand_index(&self, id: &str) -> Result<usize, InstanceError> {
        self.demands
            .iter()
            .position(|d| d.id == id)
            .ok_or_else(|| InstanceError::UnknownId(id.to_string()))
    }

    pub fn fc_index(&self, id: &str) -> Result<usize, InstanceError> {
        self.fcs
            .iter()
            .position(|f| f.id == id)
            .ok_or_else(|| InstanceError::UnknownId(id.to_string()))
    }

    /// Exact travel time from demand `di` to FC `fj` (indices).
    pub fn distance(&self, di: usize, fj: usize) -> Quantity {
        let d = &self.demands[di];
        let f = &self.fcs[fj];
        match (&self.metric, &d.loc, &f.loc) {
            (Metric::Line, Location::Point(a), Location::Point(b)) => {
                a[0].checked_sub(b[0]).abs()
            }
            (Metric::Euclidean { .. }, Location::Point(a), Location::Point(b)) => {
                euclidean_distance(a, b)
            }
            (Metric::Tree(t), Location::Node(a), Location::Node(b)) => t.path_length(*a, *b),
            (Metric::Matrix(rows), _, _) => rows[di][fj],
            _ => unreachable!("locations validated against metric"),
        }
    }

    /// Id-addressed distance lookup, per the public file format.
    pub fn distance_by_id(&self, demand_id: &str, fc_id: &str) -> Result<Quantity, InstanceError> {
        Ok(self.distance(self.demand_index(demand_id)?, self.fc_index(fc_id)?))
    }

    /// Materializes the full demand-by-fc distance table for solver loops.
    pub fn distance_table(&self) -> Vec<Vec<Quantity>> {
        (0..self.n_demands())
            .map(|i| (0..self.n_fcs()).map(|j| self.distance(i, j)).collect())
            .collect()
    }

    /// Ratio of the maximum to minimum nonzero distance over all
    /// demand-FC pairs, as an exact pair of quantities.
    pub fn aspect_ratio(&self) -> Result<AspectRatio, InstanceError> {
        let mut max = Quantity::ZERO;
        let mut min_nonzero: Option<Quantity> = None;
        for i in 0..self.n_demands() {
            for j in 0..self.n_fcs() {
                let d = self.distance(i, j);
                max = max.max(d);
                if d.raw() > 0 {
                    min_nonzero = Some(min_nonzero.map_or(d, |m| m.min(d)));
                }
            }
        }
        match min_nonzero {
            Some(min) => Ok(AspectRatio { max, min_nonzero: min }),
            None => Err(InstanceError::UndefinedAspectRatio),
        }
    }

    /// Induced sub-instance on the given demand and FC index subsets.
    /// Sub-instance ids are preserved, so results map back by id.
    pub fn restrict(&self, demand_idxs: &[usize], fc_idxs: &[usize]) -> Result<Instance, InstanceError> {
        let demands: Vec<DemandNode> = demand_idxs
            .iter()
            .map(|&i| self.demands[i].clone())
            .collect();
        let fcs: Vec<FcNode> = fc_idxs.iter().map(|&j| self.fcs[j].clone()).collect();
        let metric = match &self.metric {
            Metric::Matrix(rows) => Metric::Matrix(
                demand_idxs
                    .iter()
                    .map(|&i| fc_idxs.iter().map(|&j| rows[i][j]).collect())
                    .collect(),
            ),
            other => other.clone(),
        };
        Instance::new(demands, fcs, metric, self.scale)
    }
}

/// Exact aspect ratio ρ as a max / min-nonzero pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AspectRatio {
    pub max: Quantity,
    pub min_nonzero: Quantity,
}

impl AspectRatio {
    /// ρ is always ≥ 1: the maximum distance is at least the minimum.
    pub fn as_f64(&self) -> f64 {
        self.max.raw() as f64 / self.min_nonzero.raw() as f64
    }

    /// Smallest `t ≥ 0` with `2^t ≥ ρ`, computed exactly.
    pub fn ceil_log2(&self) -> u32 {
        let max = self.max.raw() as i128;
        let min = self.min_nonzero.raw() as i128;
        let mut t = 0u32;
        while (min << t) < max {
            t += 1;
        }
        t
    }

    /// Exact integer ρ check: ratio equals `value` iff max == value * min.
    pub fn equals_integer(&self, value: i64) -> bool {
        self.max.raw() as i128 == self.min_nonzero.raw() as i128 * value as i128
    }
}

fn isqrt_u128(n: u128) -> u128 {
    if n == 0 {
        return 0;
    }
    let bits = 128 - n.leading_zeros();
    let mut x = 1u128 << bits.div_ceil(2);
    loop {
        let y = (x + n / x) / 2;
        if y >= x {
            return x;
        }
        x = y;
    }
}

/// Euclidean distance on exact integer coordinates, rounded to the nearest
/// scale unit. The rounding can never tie: `2·ss = 2r² + 2r + 1` has no
/// integer solution.
fn euclidean_distance(a: &[Quantity], b: &[Quantity]) -> Quantity {
    let mut ss: i128 = 0;
    for (x, y) in a.iter().zip(b) {
        let d = x.raw() as i128 - y.raw() as i128;
        ss = ss.checked_add(d * d).expect("squared distance overflow");
    }
    let r = isqrt_u128(ss as u128);
    let rounded = if (ss as u128 - r * r) > (r + 1) * (r + 1) - ss as u128 {
        r + 1
    } else {
        r
    };
    Quantity(i64::try_from(rounded).expect("distance exceeds quantity range"))
}

// ---------------------------------------------------------------------------
// Canonical JSON document format.
//
// {
//   "metric": {"type": "line" | "euclidean" | "tree" | "matrix", ...},
//   "demands": [{"id": ..., "pos" | "node": ..., "d": ...}, ...],
//   "fcs":     [{"id": ..., "pos" | "node": ..., "c": ...}, ...]
// }
//
// Positions and distances are decimal strings so that quantization is
// explicit; demands and capacities are plain integers. Field order is
// canonical (the order below); the canonical byte form is
// `Instance::to_canonical_json`.
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct InstanceDoc {
    metric: MetricDoc,
    demands: Vec<NodeDoc>,
    fcs: Vec<NodeDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum MetricDoc {
    Line,
    Euclidean {
        dim: usize,
    },
    Tree {
        nodes: Vec<String>,
        edges: Vec<(String, String, String)>,
    },
    Matrix {
        distances: Vec<Vec<String>>,
    },
}

#[derive(Serialize, Deserialize)]
struct NodeDoc {
    id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pos: Option<PosDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    node: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    d: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    c: Option<u64>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PosDoc {
    Scalar(String),
    Vector(Vec<String>),
}

/// Loads an instance from its JSON document form, validating all invariants.
pub fn load_instance(source: &[u8], scale: u64) -> Result<Instance, InstanceError> {
    let doc: InstanceDoc = serde_json::from_slice(source)
        .map_err(|e| InstanceError::Parse(e.to_string()))?;
    let parse_q = |field: String, text: &str| -> Result<Quantity, InstanceError> {
        Quantity::parse_decimal(text, scale)
            .map_err(|source| InstanceError::Quantity { field, source })
    };
    let metric = match &doc.metric {
        MetricDoc::Line => Metric::Line,
        MetricDoc::Euclidean { dim } => Metric::Euclidean { dim: *dim },
        MetricDoc::Tree { nodes, edges } => {
            let mut parsed = Vec::with_capacity(edges.len());
            for (a, b, w) in edges {
                parsed.push((
                    a.clone(),
                    b.clone(),
                    parse_q(format!("edge {a}-{b}"), w)?,
                ));
            }
            Metric::Tree(TreeMetric::new(nodes.clone(), &parsed)?)
        }
        MetricDoc::Matrix { distances } => {
            let mut rows = Vec::with_capacity(distances.len());
            for (i, row) in distances.iter().enumerate() {
                let mut out = Vec::with_capacity(row.len());
                for (j, cell) in row.iter().enumerate() {
                    out.push(parse_q(format!("distances[{i}][{j}]"), cell)?);
                }
                rows.push(out);
            }
            Metric::Matrix(rows)
        }
    };
    let parse_loc = |node_doc: &NodeDoc| -> Result<Location, InstanceError> {
        match (&metric, &node_doc.pos, &node_doc.node) {
            (Metric::Line | Metric::Euclidean { .. }, Some(pos), _) => {
                let coords = match pos {
                    PosDoc::Scalar(s) => vec![s.clone()],
                    PosDoc::Vector(v) => v.clone(),
                };
                let mut parsed = Vec::with_capacity(coords.len());
                for (k, c) in coords.iter().enumerate() {
                    parsed.push(parse_q(format!("{}.pos[{k}]", node_doc.id), c)?);
                }
                Ok(Location::Point(parsed))
            }
            (Metric::Tree(t), _, Some(node)) => t
                .node_index(node)
                .map(Location::Node)
                .ok_or_else(|| InstanceError::UnknownHostNode {
                    id: node_doc.id.clone(),
                    node: node.clone(),
                }),
            (Metric::Matrix(_), None, None) => Ok(Location::Implicit),
            _ => Err(InstanceError::MissingPosition {
                id: node_doc.id.clone(),
            }),
        }
    };
    let mut demands = Vec::with_capacity(doc.demands.len());
    for nd in &doc.demands {
        demands.push(DemandNode {
            id: nd.id.clone(),
            loc: parse_loc(nd)?,
            quantity: nd.d.ok_or_else(|| {
                InstanceError::Parse(format!("demand {:?} is missing field \"d\"", nd.id))
            })?,
        });
    }
    let mut fcs = Vec::with_capacity(doc.fcs.len());
    for nf in &doc.fcs {
        fcs.push(FcNode {
            id: nf.id.clone(),
            loc: parse_loc(nf)?,
            capacity: nf.c.ok_or_else(|| {
                InstanceError::Parse(format!("fc {:?} is missing field \"c\"", nf.id))
            })?,
        });
    }
    Instance::new(demands, fcs, metric, scale)
}

/// Serializes the instance in canonical byte form: fixed field order,
/// two-space indentation, decimal-string positions, trailing newline.
pub fn save_instance(instance: &Instance) -> Vec<u8> {
    let scale = instance.scale;
    let pos_doc = |loc: &Location| -> (Option<PosDoc>, Option<String>) {
        match (instance.metric(), loc) {
            (Metric::Line, Location::Point(p)) => {
                (Some(PosDoc::Scalar(p[0].decimal_string(scale))), None)
            }
            (Metric::Euclidean { .. }, Location::Point(p)) => (
                Some(PosDoc::Vector(
                    p.iter().map(|q| q.decimal_string(scale)).collect(),
                )),
                None,
            ),
            (Metric::Tree(t), Location::Node(n)) => (None, Some(t.node_name(*n).to_string())),
            _ => (None, None),
        }
    };
    let metric = match instance.metric() {
        Metric::Line => MetricDoc::Line,
        Metric::Euclidean { dim } => MetricDoc::Euclidean { dim: *dim },
        Metric::Tree(t) => MetricDoc::Tree {
            nodes: t.node_names.clone(),
            edges: t
                .edges
                .iter()
                .map(|(a, b, w)| {
                    (
                        t.node_name(*a).to_string(),
                        t.node_name(*b).to_string(),
                        w.decimal_string(scale),
                    )
                })
                .collect(),
        },
        Metric::Matrix(rows) => MetricDoc::Matrix {
            distances: rows
                .iter()
                .map(|r| r.iter().map(|q| q.decimal_string(scale)).collect())
                .collect(),
        },
    };
    let doc = InstanceDoc {
        metric,
        demands: instance
            .demands
            .iter()
            .map(|d| {
                let (pos, node) = pos_doc(&d.loc);
                NodeDoc {
                    id: d.id.clone(),
                    pos,
                    node,
                    d: Some(d.quantity),
                    c: None,
                }
            })
            .collect(),
        fcs: instance
            .fcs
            .iter()
            .map(|f| {
                let (pos, node) = pos_doc(&f.loc);
                NodeDoc {
                    id: f.id.clone(),
                    pos,
                    node,
                    d: None,
                    c: Some(f.capacity),
                }
            })
            .collect(),
    };
    let mut bytes = serde_json::to_vec_pretty(&doc).expect("instance serialization");
    bytes.push(b'\n');
    bytes
}
