//! Reduced ordered BDDs in a hash-consed arena.
//!
//! A [`NodeStore`] owns every node built under one variable order. Nodes are
//! created only through [`NodeStore::make_node`], which applies both reduction
//! rules, so structurally equal functions always share one [`NodeRef`].
//! There are no complement edges and no garbage collection: a store grows
//! monotonically and is dropped as a whole.

use std::sync::atomic::{AtomicU32, Ordering};

use num_bigint::BigUint;
use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};

use crate::error::BddError;
use crate::order::{VarId, VarOrder};

static NEXT_STORE_ID: AtomicU32 = AtomicU32::new(1);

const FALSE_IDX: u32 = 0;
const TRUE_IDX: u32 = 1;
const TERMINAL_LEVEL: u32 = u32::MAX;

/// Handle to a function stored in a [`NodeStore`].
///
/// Terminals are shared by all stores. Any other handle is only meaningful
/// for the store that returned it; operations reject foreign handles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeRef {
    store: u32,
    index: u32,
}

impl NodeRef {
    pub const FALSE: NodeRef = NodeRef {
        store: 0,
        index: FALSE_IDX,
    };
    pub const TRUE: NodeRef = NodeRef {
        store: 0,
        index: TRUE_IDX,
    };

    pub fn constant(value: bool) -> NodeRef {
        if value {
            NodeRef::TRUE
        } else {
            NodeRef::FALSE
        }
    }

    pub fn is_terminal(self) -> bool {
        self.index <= TRUE_IDX
    }

    pub fn is_false(self) -> bool {
        self == NodeRef::FALSE
    }

    pub fn is_true(self) -> bool {
        self == NodeRef::TRUE
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoolOp {
    And,
    Or,
}

/// A decision node as seen from outside the store.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BddNode {
    pub var: VarId,
    pub low: NodeRef,
    pub high: NodeRef,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct Node {
    level: u32,
    low: u32,
    high: u32,
}

/// Partial map from variables to truth values.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment {
    values: Vec<Option<bool>>,
}

impl Assignment {
    pub fn new(n_vars: usize) -> Self {
        Assignment {
            values: vec![None; n_vars],
        }
    }

    /// Total assignment from a slice indexed by variable.
    pub fn from_bools(values: &[bool]) -> Self {
        Assignment {
            values: values.iter().map(|&b| Some(b)).collect(),
        }
    }

    /// Total assignment where variable `v` takes bit `v` of `bits`.
    pub fn from_bits(bits: u64, n_vars: usize) -> Self {
        Assignment {
            values: (0..n_vars).map(|v| Some(bits >> v & 1 == 1)).collect(),
        }
    }

    pub fn set(&mut self, var: VarId, value: bool) {
        if var.index() >= self.values.len() {
            self.values.resize(var.index() + 1, None);
        }
        self.values[var.index()] = Some(value);
    }

    pub fn get(&self, var: VarId) -> Option<bool> {
        self.values.get(var.index()).copied().flatten()
    }
}

/// Position-independent description of a BDD, used to move functions between
/// stores and to compare node structures across stores.
///
/// Child references `0` and `1` are the terminals; `i + 2` is `nodes[i]`.
/// Nodes are listed in depth-first post-order (low before high), so two
/// canonical representations of one function export identically.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportedBdd {
    pub nodes: Vec<(VarId, u32, u32)>,
    pub root: u32,
}

/// Arena of reduced OBDD nodes under a single variable order.
#[derive(Debug)]
pub struct NodeStore {
    id: u32,
    order: VarOrder,
    nodes: Vec<Node>,
    unique: FxHashMap<Node, u32>,
    apply_cache: FxHashMap<(BoolOp, u32, u32), u32>,
    not_cache: FxHashMap<u32, u32>,
    exists_cache: FxHashMap<(u32, u32), u32>,
    cache_capacity: Option<usize>,
    node_budget: Option<usize>,
}

impl NodeStore {
    pub fn new(order: VarOrder) -> Self {
        let placeholder = Node {
            level: TERMINAL_LEVEL,
            low: 0,
            high: 0,
        };
        NodeStore {
            id: NEXT_STORE_ID.fetch_add(1, Ordering::Relaxed),
            order,
            nodes: vec![placeholder, placeholder],
            unique: FxHashMap::default(),
            apply_cache: FxHashMap::default(),
            not_cache: FxHashMap::default(),
            exists_cache: FxHashMap::default(),
            cache_capacity: None,
            node_budget: None,
        }
    }

    /// Caps the number of decision nodes; creation beyond it fails with
    /// [`BddError::NodeBudgetExceeded`].
    pub fn with_node_budget(mut self, budget: usize) -> Self {
        self.node_budget = Some(budget);
        self
    }

    /// Bounds each operation cache; a cache that reaches the bound is cleared.
    pub fn with_cache_capacity(mut self, capacity: usize) -> Self {
        self.cache_capacity = Some(capacity);
        self
    }

    pub fn id(&self) -> u32 {
        self.id
    }

    pub fn order(&self) -> &VarOrder {
        &self.order
    }

    pub fn n_vars(&self) -> usize {
        self.order.len()
    }

    /// Number of decision nodes ever created in this store.
    pub fn node_count(&self) -> usize {
        self.nodes.len() - 2
    }

    fn handle(&self, index: u32) -> NodeRef {
        if index <= TRUE_IDX {
            NodeRef { store: 0, index }
        } else {
            NodeRef {
                store: self.id,
                index,
            }
        }
    }

    fn resolve(&self, f: NodeRef) -> Result<u32, BddError> {
        if f.is_terminal() {
            return Ok(f.index);
        }
        if f.store != self.id {
            return Err(BddError::StoreMismatch {
                expected: self.id,
                found: f.store,
            });
        }
        if f.index as usize >= self.nodes.len() {
            return Err(BddError::InvalidNode(f.index));
        }
        Ok(f.index)
    }

    fn level_of_var(&self, var: VarId) -> Result<u32, BddError> {
        self.order
            .level(var)
            .map(|l| l as u32)
            .ok_or(BddError::UnknownVar(var))
    }

    #[inline]
    fn level(&self, index: u32) -> u32 {
        self.nodes[index as usize].level
    }

    /// Decision node behind `f`, or `None` for terminals.
    pub fn node(&self, f: NodeRef) -> Result<Option<BddNode>, BddError> {
        let idx = self.resolve(f)?;
        if idx <= TRUE_IDX {
            return Ok(None);
        }
        let n = self.nodes[idx as usize];
        Ok(Some(BddNode {
            var: self.order.var_at(n.level as usize),
            low: self.handle(n.low),
            high: self.handle(n.high),
        }))
    }

    /// Top variable of `f`; `None` stands for the terminals' +∞.
    pub fn top_var(&self, f: NodeRef) -> Result<Option<VarId>, BddError> {
        Ok(self.node(f)?.map(|n| n.var))
    }

    fn mk(&mut self, level: u32, low: u32, high: u32) -> Result<u32, BddError> {
        if low == high {
            return Ok(low);
        }
        let key = Node { level, low, high };
        if let Some(&idx) = self.unique.get(&key) {
            return Ok(idx);
        }
        if let Some(budget) = self.node_budget {
            if self.node_count() >= budget {
                return Err(BddError::NodeBudgetExceeded(budget));
            }
        }
        let idx = self.nodes.len() as u32;
        self.nodes.push(key);
        self.unique.insert(key, idx);
        Ok(idx)
    }

    /// Returns the canonical node for `(var, low, high)`, or `low` when both
    /// children coincide.
    pub fn make_node(
        &mut self,
        var: VarId,
        low: NodeRef,
        high: NodeRef,
    ) -> Result<NodeRef, BddError> {
        let level = self.level_of_var(var)?;
        let lo = self.resolve(low)?;
        let hi = self.resolve(high)?;
        for child in [lo, hi] {
            if self.level(child) <= level {
                return Err(BddError::OrderingViolation {
                    var,
                    child: self.order.var_at(self.level(child) as usize),
                });
            }
        }
        let idx = self.mk(level, lo, hi)?;
        Ok(self.handle(idx))
    }

    /// The function `var` (or `¬var` when `positive` is false).
    pub fn literal(&mut self, var: VarId, positive: bool) -> Result<NodeRef, BddError> {
        if positive {
            self.make_node(var, NodeRef::FALSE, NodeRef::TRUE)
        } else {
            self.make_node(var, NodeRef::TRUE, NodeRef::FALSE)
        }
    }

    fn trim_caches(&mut self) {
        if let Some(cap) = self.cache_capacity {
            if self.apply_cache.len() >= cap {
                self.apply_cache.clear();
            }
            if self.not_cache.len() >= cap {
                self.not_cache.clear();
            }
            if self.exists_cache.len() >= cap {
                self.exists_cache.clear();
            }
        }
    }

    pub fn apply(&mut self, op: BoolOp, f: NodeRef, g: NodeRef) -> Result<NodeRef, BddError> {
        let a = self.resolve(f)?;
        let b = self.resolve(g)?;
        self.trim_caches();
        let r = self.apply_rec(op, a, b)?;
        Ok(self.handle(r))
    }

    pub fn and(&mut self, f: NodeRef, g: NodeRef) -> Result<NodeRef, BddError> {
        self.apply(BoolOp::And, f, g)
    }

    pub fn or(&mut self, f: NodeRef, g: NodeRef) -> Result<NodeRef, BddError> {
        self.apply(BoolOp::Or, f, g)
    }

    fn apply_rec(&mut self, op: BoolOp, f: u32, g: u32) -> Result<u32, BddError> {
        // absorbing / neutral terminal cases
        let (absorb, neutral) = match op {
            BoolOp::And => (FALSE_IDX, TRUE_IDX),
            BoolOp::Or => (TRUE_IDX, FALSE_IDX),
        };
        if f == absorb || g == absorb {
            return Ok(absorb);
        }
        if f == neutral {
            return Ok(g);
        }
        if g == neutral || f == g {
            return Ok(f);
        }
        let key = (op, f.min(g), f.max(g));
        if let Some(&r) = self.apply_cache.get(&key) {
            return Ok(r);
        }
        let nf = self.nodes[f as usize];
        let ng = self.nodes[g as usize];
        let level = nf.level.min(ng.level);
        let (f0, f1) = if nf.level == level {
            (nf.low, nf.high)
        } else {
            (f, f)
        };
        let (g0, g1) = if ng.level == level {
            (ng.low, ng.high)
        } else {
            (g, g)
        };
        let low = self.apply_rec(op, f0, g0)?;
        let high = self.apply_rec(op, f1, g1)?;
        let r = self.mk(level, low, high)?;
        self.apply_cache.insert(key, r);
        Ok(r)
    }

    pub fn negate(&mut self, f: NodeRef) -> Result<NodeRef, BddError> {
        let a = self.resolve(f)?;
        self.trim_caches();
        let r = self.negate_rec(a)?;
        Ok(self.handle(r))
    }

    fn negate_rec(&mut self, f: u32) -> Result<u32, BddError> {
        match f {
            FALSE_IDX => return Ok(TRUE_IDX),
            TRUE_IDX => return Ok(FALSE_IDX),
            _ => {}
        }
        if let Some(&r) = self.not_cache.get(&f) {
            return Ok(r);
        }
        let n = self.nodes[f as usize];
        let low = self.negate_rec(n.low)?;
        let high = self.negate_rec(n.high)?;
        let r = self.mk(n.level, low, high)?;
        self.not_cache.insert(f, r);
        Ok(r)
    }

    /// Cofactor of `f` with `var` fixed to `value`.
    pub fn restrict(&mut self, f: NodeRef, var: VarId, value: bool) -> Result<NodeRef, BddError> {
        let a = self.resolve(f)?;
        let level = self.level_of_var(var)?;
        let mut memo = FxHashMap::default();
        let r = self.restrict_rec(a, level, value, &mut memo)?;
        Ok(self.handle(r))
    }

    fn restrict_rec(
        &mut self,
        f: u32,
        level: u32,
        value: bool,
        memo: &mut FxHashMap<u32, u32>,
    ) -> Result<u32, BddError> {
        let n = self.nodes[f as usize];
        if n.level > level {
            // terminals included: their level is +∞
            return Ok(f);
        }
        if n.level == level {
            return Ok(if value { n.high } else { n.low });
        }
        if let Some(&r) = memo.get(&f) {
            return Ok(r);
        }
        let low = self.restrict_rec(n.low, level, value, memo)?;
        let high = self.restrict_rec(n.high, level, value, memo)?;
        let r = self.mk(n.level, low, high)?;
        memo.insert(f, r);
        Ok(r)
    }

    /// `∃var. f`, i.e. `restrict(f, var, 0) ∨ restrict(f, var, 1)`.
    pub fn exists(&mut self, f: NodeRef, var: VarId) -> Result<NodeRef, BddError> {
        let a = self.resolve(f)?;
        let level = self.level_of_var(var)?;
        self.trim_caches();
        let r = self.exists_rec(a, level)?;
        Ok(self.handle(r))
    }

    fn exists_rec(&mut self, f: u32, level: u32) -> Result<u32, BddError> {
        let n = self.nodes[f as usize];
        if n.level > level {
            return Ok(f);
        }
        if n.level == level {
            return self.apply_rec(BoolOp::Or, n.low, n.high);
        }
        if let Some(&r) = self.exists_cache.get(&(f, level)) {
            return Ok(r);
        }
        let low = self.exists_rec(n.low, level)?;
        let high = self.exists_rec(n.high, level)?;
        let r = self.mk(n.level, low, high)?;
        self.exists_cache.insert((f, level), r);
        Ok(r)
    }

    /// Follows the path selected by `a`. Fails if the path queries a variable
    /// that `a` leaves unassigned.
    pub fn evaluate(&self, f: NodeRef, a: &Assignment) -> Result<bool, BddError> {
        let mut cur = self.resolve(f)?;
        while cur > TRUE_IDX {
            let n = self.nodes[cur as usize];
            let var = self.order.var_at(n.level as usize);
            cur = match a.get(var) {
                Some(true) => n.high,
                Some(false) => n.low,
                None => return Err(BddError::PartialAssignment(var)),
            };
        }
        Ok(cur == TRUE_IDX)
    }

    fn reachable(&self, root: u32) -> Vec<u32> {
        let mut seen = FxHashSet::default();
        let mut stack = vec![root];
        let mut out = Vec::new();
        while let Some(i) = stack.pop() {
            if i <= TRUE_IDX || !seen.insert(i) {
                continue;
            }
            out.push(i);
            let n = self.nodes[i as usize];
            stack.push(n.low);
            stack.push(n.high);
        }
        out
    }

    /// Number of internal (decision) nodes reachable from `f`.
    pub fn size(&self, f: NodeRef) -> Result<usize, BddError> {
        let idx = self.resolve(f)?;
        Ok(self.reachable(idx).len())
    }

    /// Variables `f` depends on, in order of their level.
    pub fn support(&self, f: NodeRef) -> Result<Vec<VarId>, BddError> {
        let idx = self.resolve(f)?;
        let mut levels: Vec<u32> = self
            .reachable(idx)
            .into_iter()
            .map(|i| self.level(i))
            .collect();
        levels.sort_unstable();
        levels.dedup();
        Ok(levels
            .into_iter()
            .map(|l| self.order.var_at(l as usize))
            .collect())
    }

    /// Satisfying assignments of `f` over a universe of `universe_size`
    /// variables that contains the support of `f`.
    pub fn sat_count(&self, f: NodeRef, universe_size: usize) -> Result<BigUint, BddError> {
        let idx = self.resolve(f)?;
        let mut levels: Vec<u32> = self
            .reachable(idx)
            .into_iter()
            .map(|i| self.level(i))
            .collect();
        levels.sort_unstable();
        levels.dedup();
        let support = levels.len();
        if universe_size < support {
            return Err(BddError::UniverseTooSmall {
                universe: universe_size,
                support,
            });
        }
        let rank = |level: u32| -> usize {
            if level == TERMINAL_LEVEL {
                support
            } else {
                levels.binary_search(&level).expect("level in support")
            }
        };
        let mut memo: FxHashMap<u32, BigUint> = FxHashMap::default();
        let below = self.count_rec(idx, &rank, &mut memo);
        Ok(below << (rank(self.level(idx)) + universe_size - support))
    }

    fn count_rec(
        &self,
        f: u32,
        rank: &impl Fn(u32) -> usize,
        memo: &mut FxHashMap<u32, BigUint>,
    ) -> BigUint {
        match f {
            FALSE_IDX => return BigUint::ZERO,
            TRUE_IDX => return BigUint::from(1u8),
            _ => {}
        }
        if let Some(c) = memo.get(&f) {
            return c.clone();
        }
        let n = self.nodes[f as usize];
        let r = rank(n.level);
        let lo = self.count_rec(n.low, rank, memo) << (rank(self.level(n.low)) - r - 1);
        let hi = self.count_rec(n.high, rank, memo) << (rank(self.level(n.high)) - r - 1);
        let c = lo + hi;
        memo.insert(f, c.clone());
        c
    }

    pub fn export(&self, f: NodeRef) -> Result<ExportedBdd, BddError> {
        let root = self.resolve(f)?;
        let mut ids: FxHashMap<u32, u32> = FxHashMap::default();
        let mut nodes = Vec::new();
        let root = self.export_rec(root, &mut ids, &mut nodes);
        Ok(ExportedBdd { nodes, root })
    }

    fn export_rec(
        &self,
        f: u32,
        ids: &mut FxHashMap<u32, u32>,
        out: &mut Vec<(VarId, u32, u32)>,
    ) -> u32 {
        if f <= TRUE_IDX {
            return f;
        }
        if let Some(&id) = ids.get(&f) {
            return id;
        }
        let n = self.nodes[f as usize];
        let low = self.export_rec(n.low, ids, out);
        let high = self.export_rec(n.high, ids, out);
        out.push((self.order.var_at(n.level as usize), low, high));
        let id = out.len() as u32 + 1;
        ids.insert(f, id);
        id
    }

    /// Rebuilds an exported BDD in this store. Fails if the export violates
    /// this store's order.
    pub fn import(&mut self, e: &ExportedBdd) -> Result<NodeRef, BddError> {
        let mut handles = vec![NodeRef::FALSE, NodeRef::TRUE];
        for &(var, low, high) in &e.nodes {
            let lo = *handles
                .get(low as usize)
                .ok_or(BddError::InvalidNode(low))?;
            let hi = *handles
                .get(high as usize)
                .ok_or(BddError::InvalidNode(high))?;
            handles.push(self.make_node(var, lo, hi)?);
        }
        handles
            .get(e.root as usize)
            .copied()
            .ok_or(BddError::InvalidNode(e.root))
    }

    /// Checks reducedness, ordering and uniqueness over every stored node.
    pub fn check_invariants(&self) -> Result<(), String> {
        let mut seen = FxHashSet::default();
        for (i, n) in self.nodes.iter().enumerate().skip(2) {
            if n.low == n.high {
                return Err(format!("node {i} has identical children"));
            }
            if self.level(n.low) <= n.level || self.level(n.high) <= n.level {
                return Err(format!("node {i} violates the order"));
            }
            if !seen.insert(*n) {
                return Err(format!("node {i} duplicates another node"));
            }
            if self.unique.get(n) != Some(&(i as u32)) {
                return Err(format!("node {i} missing from the unique table"));
            }
        }
        Ok(())
    }
}
