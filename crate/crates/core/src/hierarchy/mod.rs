//! Multi-level value hierarchies over a [`PointSet`].
//!
//! Points are sorted once by (value, subject, input position). Under both
//! strategies every group is then a contiguous run of that order, so a node
//! is just a rank interval plus its value range. Leaves aggregate their
//! points directly; every internal node's [`GroupStats`] is the left-to-right
//! merge of its children and is never recomputed from raw points.

mod stats;

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

pub use stats::{GroupStats, Sample};

use crate::points::{AxisNumber, PointSet};
use crate::term::Term;
use crate::value::{format_epoch_millis, ValueKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HierarchyError {
    #[error("the point set is empty")]
    EmptyPointSet,
    #[error("configuration out of bounds: {0}")]
    ConfigOutOfBounds(String),
    #[error("point set contains a non-finite value")]
    NonFiniteValue,
    #[error("unknown node: {0:?}")]
    UnknownNode(String),
    #[error("node {0:?} is not a leaf")]
    NotALeaf(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    EqualWidth,
    EqualFrequency,
}

impl FromStr for Strategy {
    type Err = HierarchyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "equal-width" | "equalWidth" | "width" => Ok(Strategy::EqualWidth),
            "equal-frequency" | "equalFrequency" | "frequency" => Ok(Strategy::EqualFrequency),
            other => Err(HierarchyError::ConfigOutOfBounds(format!(
                "unknown strategy {other:?}"
            ))),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::EqualWidth => "equal-width",
            Strategy::EqualFrequency => "equal-frequency",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct HierarchyConfig {
    pub strategy: Strategy,
    pub levels: u32,
    pub fanout: u32,
    pub sample_size: u32,
}

impl Default for HierarchyConfig {
    fn default() -> Self {
        HierarchyConfig {
            strategy: Strategy::EqualFrequency,
            levels: 3,
            fanout: 10,
            sample_size: 5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConfigLimits {
    pub max_levels: u32,
    pub max_fanout: u32,
}

impl Default for ConfigLimits {
    fn default() -> Self {
        ConfigLimits {
            max_levels: 12,
            max_fanout: 1000,
        }
    }
}

impl HierarchyConfig {
    pub fn new(strategy: Strategy, levels: u32, fanout: u32) -> Self {
        HierarchyConfig {
            strategy,
            levels,
            fanout,
            ..HierarchyConfig::default()
        }
    }

    pub fn validate(&self, limits: &ConfigLimits) -> Result<(), HierarchyError> {
        if self.levels < 1 || self.levels > limits.max_levels {
            return Err(HierarchyError::ConfigOutOfBounds(format!(
                "levels must be within 1..={}, got {}",
                limits.max_levels, self.levels
            )));
        }
        if self.fanout < 2 || self.fanout > limits.max_fanout {
            return Err(HierarchyError::ConfigOutOfBounds(format!(
                "fanout must be within 2..={}, got {}",
                limits.max_fanout, self.fanout
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Closure {
    /// `[lo, hi)`
    HalfOpen,
    /// `[lo, hi]`
    Closed,
}

#[derive(Clone, Debug, PartialEq)]
struct NodeData {
    id: String,
    depth: u32,
    lo: f64,
    hi: f64,
    closure: Closure,
    stats: GroupStats,
    first_child: u32,
    child_count: u32,
    pruned: u32,
    /// rank interval in the sorted point order
    start: u32,
    end: u32,
}

impl NodeData {
    fn is_leaf(&self) -> bool {
        self.child_count == 0
    }
}

pub struct HierarchyTree {
    config: HierarchyConfig,
    points: Arc<PointSet>,
    /// point indices sorted by (value, subject, index)
    order: Arc<Vec<u32>>,
    nodes: Vec<NodeData>,
    leaf_point_reads: AtomicU64,
}

impl fmt::Debug for HierarchyTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HierarchyTree")
            .field("config", &self.config)
            .field("points", &self.points.len())
            .field("nodes", &self.nodes.len())
            .finish()
    }
}

/// Structural equality: configuration, axis and every node.
impl PartialEq for HierarchyTree {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config
            && self.points.kind() == other.points.kind()
            && self.nodes == other.nodes
    }
}

pub fn build_hierarchy(
    points: impl Into<Arc<PointSet>>,
    config: HierarchyConfig,
) -> Result<HierarchyTree, HierarchyError> {
    build_hierarchy_with_limits(points, config, &ConfigLimits::default())
}

pub fn build_hierarchy_with_limits(
    points: impl Into<Arc<PointSet>>,
    config: HierarchyConfig,
    limits: &ConfigLimits,
) -> Result<HierarchyTree, HierarchyError> {
    config.validate(limits)?;
    let points = points.into();
    if points.is_empty() {
        return Err(HierarchyError::EmptyPointSet);
    }
    if points.points().iter().any(|p| !p.value.is_finite()) {
        return Err(HierarchyError::NonFiniteValue);
    }
    if points.len() > u32::MAX as usize {
        return Err(HierarchyError::ConfigOutOfBounds(
            "too many points".to_owned(),
        ));
    }
    let raw = points.points();
    let mut order: Vec<u32> = (0..raw.len() as u32).collect();
    order.sort_unstable_by(|&a, &b| {
        let (pa, pb) = (&raw[a as usize], &raw[b as usize]);
        pa.value
            .total_cmp(&pb.value)
            .then(pa.subject.cmp(&pb.subject))
            .then(a.cmp(&b))
    });
    Ok(construct(points, Arc::new(order), config))
}

fn construct(
    points: Arc<PointSet>,
    order: Arc<Vec<u32>>,
    config: HierarchyConfig,
) -> HierarchyTree {
    let raw = points.points();
    let values: Vec<f64> = order.iter().map(|&i| raw[i as usize].value).collect();
    let subjects: Vec<u32> = order.iter().map(|&i| raw[i as usize].subject).collect();
    let mut builder = Builder {
        values: &values,
        subjects: &subjects,
        config,
        nodes: Vec::new(),
    };
    let n = values.len() as u32;
    builder.nodes.push(NodeData {
        id: String::new(),
        depth: 0,
        lo: values[0],
        hi: values[values.len() - 1],
        closure: Closure::Closed,
        stats: GroupStats::default(),
        first_child: 0,
        child_count: 0,
        pruned: 0,
        start: 0,
        end: n,
    });
    builder.build(0);
    let nodes = builder.nodes;
    HierarchyTree {
        config,
        points,
        order,
        nodes,
        leaf_point_reads: AtomicU64::new(0),
    }
}

struct ChildSpec {
    start: u32,
    end: u32,
    lo: f64,
    hi: f64,
    closure: Closure,
}

struct Builder<'a> {
    values: &'a [f64],
    subjects: &'a [u32],
    config: HierarchyConfig,
    nodes: Vec<NodeData>,
}

impl Builder<'_> {
    fn build(&mut self, idx: usize) {
        let node = &self.nodes[idx];
        let (depth, lo, hi, start, end) = (node.depth, node.lo, node.hi, node.start, node.end);
        let sample_size = self.config.sample_size as usize;

        let terminal = depth >= self.config.levels || lo == hi || !(hi - lo).is_finite();
        if terminal {
            let mut stats = GroupStats::default();
            for r in start as usize..end as usize {
                stats.push(self.subjects[r], self.values[r], sample_size);
            }
            self.nodes[idx].stats = stats;
            return;
        }

        let specs = match self.config.strategy {
            Strategy::EqualWidth => self.equal_width(start, end, lo, hi),
            Strategy::EqualFrequency => self.equal_frequency(start, end),
        };
        let first_child = self.nodes.len();
        let parent_id = self.nodes[idx].id.clone();
        for (i, spec) in specs.iter().enumerate() {
            let id = if parent_id.is_empty() {
                i.to_string()
            } else {
                format!("{parent_id}.{i}")
            };
            self.nodes.push(NodeData {
                id,
                depth: depth + 1,
                lo: spec.lo,
                hi: spec.hi,
                closure: spec.closure,
                stats: GroupStats::default(),
                first_child: 0,
                child_count: 0,
                pruned: 0,
                start: spec.start,
                end: spec.end,
            });
        }
        let child_count = specs.len();
        for c in first_child..first_child + child_count {
            self.build(c);
        }
        let stats = GroupStats::merged(
            self.nodes[first_child..first_child + child_count]
                .iter()
                .map(|n| &n.stats),
            sample_size,
        );
        let node = &mut self.nodes[idx];
        node.stats = stats;
        node.first_child = first_child as u32;
        node.child_count = child_count as u32;
        node.pruned = self.config.fanout - child_count as u32;
    }

    /// `k` equal-length bins over `[lo, hi]`; values on a boundary go to the
    /// right-hand bin, the last bin is closed at `hi`.
    fn equal_width(&self, start: u32, end: u32, lo: f64, hi: f64) -> Vec<ChildSpec> {
        let k = self.config.fanout as usize;
        let width = (hi - lo) / k as f64;
        let bound = |i: usize| {
            if i == 0 {
                lo
            } else if i == k {
                hi
            } else {
                (lo + i as f64 * width).min(hi)
            }
        };
        let slice = &self.values[start as usize..end as usize];
        let mut cuts = Vec::with_capacity(k + 1);
        cuts.push(start);
        for i in 1..k {
            let b = bound(i);
            cuts.push(start + slice.partition_point(|&v| v < b) as u32);
        }
        cuts.push(end);
        (0..k)
            .filter(|&i| cuts[i] < cuts[i + 1])
            .map(|i| ChildSpec {
                start: cuts[i],
                end: cuts[i + 1],
                lo: bound(i),
                hi: bound(i + 1),
                closure: if i == k - 1 {
                    Closure::Closed
                } else {
                    Closure::HalfOpen
                },
            })
            .collect()
    }

    /// `k` position slices `[⌊i·n/k⌋, ⌊(i+1)·n/k⌋)` of the sorted points.
    /// A child spans its own minimum up to the next child's minimum
    /// (half-open); the last child is closed at its maximum.
    fn equal_frequency(&self, start: u32, end: u32) -> Vec<ChildSpec> {
        let k = self.config.fanout as u64;
        let n = (end - start) as u64;
        let slices: Vec<(u32, u32)> = (0..k)
            .map(|i| (start + (i * n / k) as u32, start + ((i + 1) * n / k) as u32))
            .filter(|(s, e)| s < e)
            .collect();
        slices
            .iter()
            .enumerate()
            .map(|(j, &(s, e))| {
                let last = j + 1 == slices.len();
                ChildSpec {
                    start: s,
                    end: e,
                    lo: self.values[s as usize],
                    hi: if last {
                        self.values[e as usize - 1]
                    } else {
                        self.values[slices[j + 1].0 as usize]
                    },
                    closure: if last {
                        Closure::Closed
                    } else {
                        Closure::HalfOpen
                    },
                }
            })
            .collect()
    }
}

/// A point stored in a leaf.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LeafPoint<'a> {
    pub subject: &'a Term,
    pub value: f64,
    /// Store position of the originating triple.
    pub source: u32,
}

impl HierarchyTree {
    pub fn config(&self) -> &HierarchyConfig {
        &self.config
    }

    pub fn axis_kind(&self) -> ValueKind {
        self.points.kind()
    }

    pub fn point_set(&self) -> &Arc<PointSet> {
        &self.points
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn depth(&self) -> u32 {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    fn find(&self, node_id: &str) -> Result<usize, HierarchyError> {
        let unknown = || HierarchyError::UnknownNode(node_id.to_owned());
        let mut idx = 0usize;
        if node_id.is_empty() {
            return Ok(idx);
        }
        for part in node_id.split('.') {
            let i: u32 = part.parse().map_err(|_| unknown())?;
            let node = &self.nodes[idx];
            if i >= node.child_count {
                return Err(unknown());
            }
            idx = (node.first_child + i) as usize;
        }
        Ok(idx)
    }

    fn view(&self, idx: usize) -> HierarchyNode {
        let n = &self.nodes[idx];
        HierarchyNode {
            node_id: n.id.clone(),
            depth: n.depth,
            lo: n.lo,
            hi: n.hi,
            closure: n.closure,
            sample_subjects: n
                .stats
                .samples
                .iter()
                .map(|s| self.points.subjects()[s.subject as usize].display_text())
                .collect(),
            stats: n.stats.clone(),
            child_count: n.child_count,
            pruned_children: n.pruned,
            is_leaf: n.is_leaf(),
            kind: self.points.kind(),
        }
    }

    pub fn root(&self) -> HierarchyNode {
        self.view(0)
    }

    pub fn node(&self, node_id: &str) -> Result<HierarchyNode, HierarchyError> {
        Ok(self.view(self.find(node_id)?))
    }

    /// Children in range order. Served entirely from stored aggregates.
    pub fn children_of(&self, node_id: &str) -> Result<Vec<HierarchyNode>, HierarchyError> {
        let n = &self.nodes[self.find(node_id)?];
        Ok((n.first_child..n.first_child + n.child_count)
            .map(|c| self.view(c as usize))
            .collect())
    }

    /// The raw points of a leaf, ordered by value then subject.
    pub fn points_of(&self, node_id: &str) -> Result<Vec<LeafPoint<'_>>, HierarchyError> {
        let n = &self.nodes[self.find(node_id)?];
        if !n.is_leaf() {
            return Err(HierarchyError::NotALeaf(node_id.to_owned()));
        }
        self.leaf_point_reads
            .fetch_add(u64::from(n.end - n.start), Ordering::Relaxed);
        let raw = self.points.points();
        Ok(self.order[n.start as usize..n.end as usize]
            .iter()
            .map(|&i| {
                let p = &raw[i as usize];
                LeafPoint {
                    subject: self.points.subject(p),
                    value: p.value,
                    source: p.source,
                }
            })
            .collect())
    }

    /// Number of raw points handed out by [`Self::points_of`] so far.
    pub fn leaf_point_reads(&self) -> u64 {
        self.leaf_point_reads.load(Ordering::Relaxed)
    }

    /// Ids of all leaves in range order.
    pub fn leaf_ids(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut stack = vec![0usize];
        while let Some(idx) = stack.pop() {
            let n = &self.nodes[idx];
            if n.is_leaf() {
                out.push(n.id.clone());
            } else {
                stack.extend(
                    (n.first_child..n.first_child + n.child_count)
                        .rev()
                        .map(|c| c as usize),
                );
            }
        }
        out
    }

    /// Ids of every node in depth-first pre-order.
    pub fn node_ids(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![0usize];
        while let Some(idx) = stack.pop() {
            let n = &self.nodes[idx];
            out.push(n.id.clone());
            stack.extend(
                (n.first_child..n.first_child + n.child_count)
                    .rev()
                    .map(|c| c as usize),
            );
        }
        out
    }

    /// Same points, new configuration. The sorted order is reused.
    pub fn rebuild(&self, config: HierarchyConfig) -> Result<HierarchyTree, HierarchyError> {
        self.rebuild_with_limits(config, &ConfigLimits::default())
    }

    pub fn rebuild_with_limits(
        &self,
        config: HierarchyConfig,
        limits: &ConfigLimits,
    ) -> Result<HierarchyTree, HierarchyError> {
        config.validate(limits)?;
        Ok(construct(
            Arc::clone(&self.points),
            Arc::clone(&self.order),
            config,
        ))
    }

    /// The whole tree as nested JSON-ready nodes.
    pub fn to_nested(&self) -> NestedNode {
        self.nested(0)
    }

    fn nested(&self, idx: usize) -> NestedNode {
        let n = &self.nodes[idx];
        NestedNode {
            node: self.view(idx),
            children: (n.first_child..n.first_child + n.child_count)
                .map(|c| self.nested(c as usize))
                .collect(),
        }
    }
}

/// Owned snapshot of one node.
#[derive(Clone, Debug, PartialEq)]
pub struct HierarchyNode {
    pub node_id: String,
    pub depth: u32,
    pub lo: f64,
    pub hi: f64,
    pub closure: Closure,
    pub stats: GroupStats,
    /// Display text of each sample's subject, parallel to `stats.samples`.
    pub sample_subjects: Vec<String>,
    pub child_count: u32,
    pub pruned_children: u32,
    pub is_leaf: bool,
    pub kind: ValueKind,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct AxisJson {
    value: AxisNumber,
    #[serde(skip_serializing_if = "Option::is_none")]
    iso: Option<String>,
}

fn axis(kind: ValueKind, v: f64) -> AxisJson {
    AxisJson {
        value: AxisNumber(v),
        iso: match kind {
            ValueKind::Temporal => Some(format_epoch_millis(v.round() as i64)),
            ValueKind::Numeric => None,
        },
    }
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct RangeJson {
    lo: AxisNumber,
    hi: AxisNumber,
    #[serde(skip_serializing_if = "Option::is_none")]
    lo_iso: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hi_iso: Option<String>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct SampleJson<'a> {
    subject: &'a str,
    value: AxisJson,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct StatsJson<'a> {
    count: u64,
    min: AxisJson,
    max: AxisJson,
    sum: AxisNumber,
    sum_squares: AxisNumber,
    mean: AxisJson,
    variance: AxisNumber,
    samples: Vec<SampleJson<'a>>,
}

impl Serialize for HierarchyNode {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let kind = self.kind;
        let iso = |v: f64| match kind {
            ValueKind::Temporal => Some(format_epoch_millis(v as i64)),
            ValueKind::Numeric => None,
        };
        let s = &self.stats;
        let stats = StatsJson {
            count: s.count,
            min: axis(kind, s.min),
            max: axis(kind, s.max),
            sum: AxisNumber(s.sum),
            sum_squares: AxisNumber(s.sum_squares),
            mean: axis(kind, s.mean().unwrap_or(0.0)),
            variance: AxisNumber(s.variance().unwrap_or(0.0)),
            samples: s
                .samples
                .iter()
                .zip(&self.sample_subjects)
                .map(|(sample, subject)| SampleJson {
                    subject,
                    value: axis(kind, sample.value),
                })
                .collect(),
        };
        let mut st = serializer.serialize_struct("HierarchyNode", 8)?;
        st.serialize_field("nodeId", &self.node_id)?;
        st.serialize_field("depth", &self.depth)?;
        st.serialize_field(
            "range",
            &RangeJson {
                lo: AxisNumber(self.lo),
                hi: AxisNumber(self.hi),
                lo_iso: iso(self.lo),
                hi_iso: iso(self.hi),
            },
        )?;
        st.serialize_field("closure", &self.closure)?;
        st.serialize_field("stats", &stats)?;
        st.serialize_field("childCount", &self.child_count)?;
        st.serialize_field("prunedChildren", &self.pruned_children)?;
        st.serialize_field("isLeaf", &self.is_leaf)?;
        st.end()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NestedNode {
    #[serde(flatten)]
    pub node: HierarchyNode,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<NestedNode>,
}
