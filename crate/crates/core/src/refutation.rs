//! OBDD refutations: executing Axiom/Join(/Project) schedules under a fixed
//! order, per-step size accounting, independent re-verification, and sweeps
//! over orders × schedules.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::bdd::{BoolOp, NodeRef, NodeStore};
use crate::cnf::{clause_to_bdd, CnfFormula};
use crate::error::{BddError, OrderError, ScheduleError};
use crate::order::{VarId, VarOrder};

/// One derivation step. Operands name earlier steps by index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum ProofStep {
    Axiom { clause: usize },
    Join { left: usize, right: usize },
    Project { source: usize, var: VarId },
}

impl ProofStep {
    pub fn kind(&self) -> &'static str {
        match self {
            ProofStep::Axiom { .. } => "axiom",
            ProofStep::Join { .. } => "join",
            ProofStep::Project { .. } => "project",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule {
    pub steps: Vec<ProofStep>,
    pub projection_enabled: bool,
}

impl Schedule {
    pub fn new(steps: Vec<ProofStep>) -> Self {
        Schedule {
            steps,
            projection_enabled: false,
        }
    }

    pub fn with_projection(mut self) -> Self {
        self.projection_enabled = true;
        self
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Checks every step against `f`; reports the first malformed step.
    pub fn validate(&self, f: &CnfFormula) -> Result<(), ScheduleError> {
        if self.steps.is_empty() {
            return Err(ScheduleError::Empty);
        }
        for (i, step) in self.steps.iter().enumerate() {
            validate_step(i, step, f, self.projection_enabled)?;
        }
        Ok(())
    }

    /// JSON list of steps, e.g. `[{"op":"axiom","clause":0}, …]`.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.steps).expect("steps serialize")
    }

    pub fn from_json(text: &str, projection_enabled: bool) -> Result<Self, serde_json::Error> {
        Ok(Schedule {
            steps: serde_json::from_str(text)?,
            projection_enabled,
        })
    }
}

fn validate_step(
    i: usize,
    step: &ProofStep,
    f: &CnfFormula,
    projection: bool,
) -> Result<(), ScheduleError> {
    let earlier = |target: usize| {
        if target < i {
            Ok(())
        } else {
            Err(ScheduleError::ForwardReference { step: i, target })
        }
    };
    match *step {
        ProofStep::Axiom { clause } => {
            if clause >= f.len() {
                return Err(ScheduleError::BadClause {
                    step: i,
                    clause,
                    n_clauses: f.len(),
                });
            }
        }
        ProofStep::Join { left, right } => {
            earlier(left)?;
            earlier(right)?;
            if left == right {
                return Err(ScheduleError::SelfJoin { step: i });
            }
        }
        ProofStep::Project { source, var } => {
            if !projection {
                return Err(ScheduleError::ProjectionDisabled { step: i });
            }
            earlier(source)?;
            if var.index() >= f.n_vars() {
                return Err(ScheduleError::BadVar { step: i, var });
            }
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ScheduleKind {
    Linear,
    BalancedTree,
    Gz2003,
    Random(u64),
    GreedyMinSize,
    BucketProjection,
}

impl ScheduleKind {
    pub const NAMES: [&'static str; 6] = [
        "linear",
        "balanced_tree",
        "gz2003",
        "random",
        "greedy_min_size",
        "bucket_projection",
    ];

    /// Parses a kind name; `random` takes its seed from `seed`.
    pub fn parse(name: &str, seed: Option<u64>) -> Result<Self, ScheduleError> {
        Ok(match name {
            "linear" => ScheduleKind::Linear,
            "balanced_tree" => ScheduleKind::BalancedTree,
            "gz2003" => ScheduleKind::Gz2003,
            "random" => ScheduleKind::Random(seed.ok_or(ScheduleError::MissingSeed)?),
            "greedy_min_size" => ScheduleKind::GreedyMinSize,
            "bucket_projection" => ScheduleKind::BucketProjection,
            other => return Err(ScheduleError::UnknownKind(other.to_string())),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            ScheduleKind::Linear => "linear",
            ScheduleKind::BalancedTree => "balanced_tree",
            ScheduleKind::Gz2003 => "gz2003",
            ScheduleKind::Random(_) => "random",
            ScheduleKind::GreedyMinSize => "greedy_min_size",
            ScheduleKind::BucketProjection => "bucket_projection",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            ScheduleKind::Random(s) => Some(*s),
            _ => None,
        }
    }

    pub fn needs_projection(&self) -> bool {
        matches!(self, ScheduleKind::BucketProjection)
    }
}

impl fmt::Display for ScheduleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScheduleKind {
    type Err = ScheduleError;

    /// Accepts `random:<seed>` in addition to the plain names.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once(':') {
            Some(("random", seed)) => seed
                .parse()
                .map(ScheduleKind::Random)
                .map_err(|_| ScheduleError::UnknownKind(s.to_string())),
            _ => ScheduleKind::parse(s, None),
        }
    }
}

/// Resource limits for one run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunLimits {
    pub max_steps: usize,
    pub max_nodes: usize,
}

impl Default for RunLimits {
    fn default() -> Self {
        RunLimits {
            max_steps: 1_000_000,
            max_nodes: 50_000_000,
        }
    }
}

/// Emits all axioms first (step `i` is clause `i`), returning their indices.
fn all_axioms(f: &CnfFormula, steps: &mut Vec<ProofStep>) -> Vec<usize> {
    (0..f.len())
        .map(|c| {
            steps.push(ProofStep::Axiom { clause: c });
            steps.len() - 1
        })
        .collect()
}

fn fold(items: &[usize], steps: &mut Vec<ProofStep>) -> Option<usize> {
    let (&first, rest) = items.split_first()?;
    Some(rest.iter().fold(first, |acc, &next| {
        steps.push(ProofStep::Join {
            left: acc,
            right: next,
        });
        steps.len() - 1
    }))
}

fn linear(f: &CnfFormula) -> Vec<ProofStep> {
    let mut steps = Vec::new();
    let axioms = all_axioms(f, &mut steps);
    fold(&axioms, &mut steps);
    steps
}

fn balanced_tree(f: &CnfFormula) -> Vec<ProofStep> {
    let mut steps = Vec::new();
    let mut layer = all_axioms(f, &mut steps);
    while layer.len() > 1 {
        let mut next = Vec::with_capacity(layer.len().div_ceil(2));
        for pair in layer.chunks(2) {
            match *pair {
                [l, r] => {
                    steps.push(ProofStep::Join { left: l, right: r });
                    next.push(steps.len() - 1);
                }
                [odd] => next.push(odd),
                _ => unreachable!(),
            }
        }
        layer = next;
    }
    steps
}

/// Conjunction of the all-positive clauses, then of the remaining clauses,
/// then one join of the two.
fn gz2003(f: &CnfFormula) -> Vec<ProofStep> {
    let mut steps = Vec::new();
    let axioms = all_axioms(f, &mut steps);
    let (pos, neg): (Vec<usize>, Vec<usize>) = axioms
        .into_iter()
        .partition(|&i| f.clause(i).literals().iter().all(|l| l.positive));
    let p = fold(&pos, &mut steps);
    let n = fold(&neg, &mut steps);
    if let (Some(p), Some(n)) = (p, n) {
        steps.push(ProofStep::Join { left: p, right: n });
    }
    steps
}

fn random(f: &CnfFormula, seed: u64) -> Vec<ProofStep> {
    let mut clauses: Vec<usize> = (0..f.len()).collect();
    clauses.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut steps: Vec<ProofStep> = clauses
        .iter()
        .map(|&c| ProofStep::Axiom { clause: c })
        .collect();
    let axioms: Vec<usize> = (0..steps.len()).collect();
    fold(&axioms, &mut steps);
    steps
}

/// Repeatedly joins the pair of live results whose conjunction is smallest
/// (ties: lexicographically smallest step pair). Stops early once FALSE is
/// derived.
fn greedy_min_size(
    f: &CnfFormula,
    order: &VarOrder,
    limits: RunLimits,
) -> Result<Vec<ProofStep>, ScheduleError> {
    let mut store = NodeStore::new(order.clone()).with_node_budget(limits.max_nodes);
    let mut steps = Vec::new();
    let mut roots = Vec::new();
    for (i, c) in f.clauses().iter().enumerate() {
        steps.push(ProofStep::Axiom { clause: i });
        roots.push(clause_to_bdd(c, &mut store)?);
    }
    let mut pool: Vec<usize> = (0..roots.len()).collect();
    let mut joined: FxHashMap<(usize, usize), (usize, NodeRef)> = FxHashMap::default();
    while pool.len() > 1 && !pool.iter().any(|&p| roots[p].is_false()) {
        let mut best: Option<(usize, usize, usize, NodeRef)> = None;
        for (a, &l) in pool.iter().enumerate() {
            for &r in &pool[a + 1..] {
                let (size, root) = match joined.get(&(l, r)) {
                    Some(&hit) => hit,
                    None => {
                        let root = store.and(roots[l], roots[r])?;
                        let hit = (store.size(root)?, root);
                        joined.insert((l, r), hit);
                        hit
                    }
                };
                if best.is_none_or(|(bs, bl, br, _)| (size, l, r) < (bs, bl, br)) {
                    best = Some((size, l, r, root));
                }
            }
        }
        let (_, l, r, root) = best.expect("pool has at least two entries");
        steps.push(ProofStep::Join { left: l, right: r });
        roots.push(root);
        pool.retain(|&p| p != l && p != r);
        pool.push(steps.len() - 1);
        if steps.len() > limits.max_steps {
            break;
        }
    }
    if let Some(&p) = pool.iter().find(|&&p| roots[p].is_false()) {
        if p != steps.len() - 1 {
            // make the FALSE result the designated last step
            let other = *pool
                .iter()
                .find(|&&q| q != p)
                .expect("pool has two entries");
            steps.push(ProofStep::Join {
                left: p,
                right: other,
            });
        }
    }
    Ok(steps)
}

/// Bucket elimination: variables are eliminated from the last level
/// upwards. Each bucket joins every live result and unused clause mentioning
/// the variable, then projects the variable away.
fn bucket_projection(f: &CnfFormula, order: &VarOrder) -> Vec<ProofStep> {
    let mut steps = Vec::new();
    let mut used = vec![false; f.len()];
    let mut pool: Vec<(usize, BTreeSet<VarId>)> = Vec::new();
    for level in (0..order.len()).rev() {
        let v = order.var_at(level);
        let mut bucket = Vec::new();
        let mut vars = BTreeSet::new();
        pool.retain(|(step, vs)| {
            if vs.contains(&v) {
                bucket.push(*step);
                vars.extend(vs.iter().copied());
                false
            } else {
                true
            }
        });
        for (i, c) in f.clauses().iter().enumerate() {
            if !used[i] && c.vars().any(|x| x == v) {
                used[i] = true;
                steps.push(ProofStep::Axiom { clause: i });
                bucket.push(steps.len() - 1);
                vars.extend(c.vars());
            }
        }
        let Some(joined) = fold(&bucket, &mut steps) else {
            continue;
        };
        steps.push(ProofStep::Project {
            source: joined,
            var: v,
        });
        vars.remove(&v);
        pool.push((steps.len() - 1, vars));
    }
    for (i, _) in f.clauses().iter().enumerate().filter(|(_, c)| c.is_empty()) {
        steps.push(ProofStep::Axiom { clause: i });
        pool.push((steps.len() - 1, BTreeSet::new()));
    }
    let rest: Vec<usize> = pool.into_iter().map(|(s, _)| s).collect();
    fold(&rest, &mut steps);
    steps
}

/// Builds one of the built-in schedules for `f` under `order`.
pub fn builtin_schedule(
    f: &CnfFormula,
    order: &VarOrder,
    kind: ScheduleKind,
    projection_enabled: bool,
    limits: RunLimits,
) -> Result<Schedule, ScheduleError> {
    if f.is_empty() {
        return Err(ScheduleError::Empty);
    }
    check_order(f, order)?;
    if kind.needs_projection() && !projection_enabled {
        return Err(ScheduleError::NeedsProjection(kind.name().to_string()));
    }
    let steps = match kind {
        ScheduleKind::Linear => linear(f),
        ScheduleKind::BalancedTree => balanced_tree(f),
        ScheduleKind::Gz2003 => gz2003(f),
        ScheduleKind::Random(seed) => random(f, seed),
        ScheduleKind::GreedyMinSize => greedy_min_size(f, order, limits)?,
        ScheduleKind::BucketProjection => bucket_projection(f, order),
    };
    Ok(Schedule {
        steps,
        projection_enabled,
    })
}

fn check_order(f: &CnfFormula, order: &VarOrder) -> Result<(), OrderError> {
    if order.len() != f.n_vars() {
        return Err(OrderError::WrongLength {
            expected: f.n_vars(),
            got: order.len(),
        });
    }
    Ok(())
}

/// Per-step record of a run. Serialized as one JSON object per line.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: usize,
    #[serde(flatten)]
    pub op: ProofStep,
    /// Indices of the clauses this step represents, ascending.
    pub clauses: Vec<usize>,
    pub size: usize,
    pub cum_size: usize,
    /// Decision nodes in the store after this step.
    pub store_nodes: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Truncation {
    StepLimit(usize),
    NodeBudget(usize),
}

#[derive(Debug)]
pub struct RefutationResult {
    /// Store holding every intermediate OBDD of the run.
    pub store: NodeStore,
    /// OBDD of each executed step.
    pub roots: Vec<NodeRef>,
    pub trace: Vec<TraceRecord>,
    pub refuted: bool,
    pub max_intermediate: usize,
    pub total_size: usize,
    pub truncated: Option<Truncation>,
}

impl RefutationResult {
    pub fn final_root(&self) -> Option<NodeRef> {
        self.roots.last().copied()
    }

    pub fn steps(&self) -> usize {
        self.trace.len()
    }
}

fn union_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

fn step_clauses(step: &ProofStep, prior: &[Vec<usize>]) -> Vec<usize> {
    match *step {
        ProofStep::Axiom { clause } => vec![clause],
        ProofStep::Join { left, right } => union_sorted(&prior[left], &prior[right]),
        ProofStep::Project { source, .. } => prior[source].clone(),
    }
}

fn execute(
    step: &ProofStep,
    f: &CnfFormula,
    store: &mut NodeStore,
    roots: &[NodeRef],
) -> Result<NodeRef, BddError> {
    match *step {
        ProofStep::Axiom { clause } => clause_to_bdd(f.clause(clause), store),
        ProofStep::Join { left, right } => store.apply(BoolOp::And, roots[left], roots[right]),
        ProofStep::Project { source, var } => store.exists(roots[source], var),
    }
}

/// Executes `s` on `f` in a fresh store. Malformed schedules are rejected
/// before anything runs; exhausted limits end the run with a truncated trace.
pub fn run_schedule(
    f: &CnfFormula,
    order: &VarOrder,
    s: &Schedule,
    limits: RunLimits,
) -> Result<RefutationResult, ScheduleError> {
    check_order(f, order)?;
    s.validate(f)?;
    let mut store = NodeStore::new(order.clone()).with_node_budget(limits.max_nodes);
    let mut roots = Vec::with_capacity(s.len());
    let mut clause_sets: Vec<Vec<usize>> = Vec::with_capacity(s.len());
    let mut trace = Vec::with_capacity(s.len());
    let mut cum_size = 0;
    let mut max_intermediate = 0;
    let mut truncated = None;
    for (i, step) in s.steps.iter().enumerate() {
        if i >= limits.max_steps {
            truncated = Some(Truncation::StepLimit(limits.max_steps));
            break;
        }
        let root = match execute(step, f, &mut store, &roots) {
            Ok(r) => r,
            Err(BddError::NodeBudgetExceeded(b)) => {
                truncated = Some(Truncation::NodeBudget(b));
                break;
            }
            Err(e) => return Err(e.into()),
        };
        let size = store.size(root)?;
        cum_size += size;
        max_intermediate = max_intermediate.max(size);
        let clauses = step_clauses(step, &clause_sets);
        trace.push(TraceRecord {
            step: i,
            op: *step,
            clauses: clauses.clone(),
            size,
            cum_size,
            store_nodes: store.node_count(),
        });
        clause_sets.push(clauses);
        roots.push(root);
    }
    let refuted = truncated.is_none() && roots.last().is_some_and(|r| r.is_false());
    Ok(RefutationResult {
        store,
        roots,
        trace,
        refuted,
        max_intermediate,
        total_size: cum_size,
        truncated,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    MalformedStep,
    ClauseSetMismatch,
    SizeMismatch,
    CumulativeSizeMismatch,
    SemanticMismatch,
    NotRefuted,
    SummaryMismatch,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub step: Option<usize>,
    pub kind: ViolationKind,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub violations: Vec<Violation>,
}

impl VerificationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first(&self) -> Option<&Violation> {
        self.violations.first()
    }

    fn flag(&mut self, step: Option<usize>, kind: ViolationKind, detail: String) {
        self.violations.push(Violation { step, kind, detail });
    }
}

/// Claims a run makes about itself, checked by [`verify_records`].
pub struct Claims<'a> {
    pub records: &'a [TraceRecord],
    /// OBDDs the producer built for each step, if available.
    pub roots: Option<(&'a NodeStore, &'a [NodeRef])>,
    pub refuted: Option<bool>,
    pub max_intermediate: Option<usize>,
    pub total_size: Option<usize>,
}

/// Re-executes a run in a fresh store and checks it against `r`.
pub fn verify_refutation(
    f: &CnfFormula,
    order: &VarOrder,
    r: &RefutationResult,
) -> VerificationReport {
    verify_records(
        f,
        order,
        Claims {
            records: &r.trace,
            roots: Some((&r.store, &r.roots)),
            refuted: Some(r.refuted),
            max_intermediate: Some(r.max_intermediate),
            total_size: Some(r.total_size),
        },
    )
}

/// Checks a trace step by step: each axiom is its clause's OBDD, each join
/// the conjunction of its operands, each projection the quantified operand;
/// recorded clause sets and sizes must match, and a refutation claim needs a
/// FALSE last step.
pub fn verify_records(f: &CnfFormula, order: &VarOrder, claims: Claims<'_>) -> VerificationReport {
    let mut report = VerificationReport::default();
    if let Err(e) = check_order(f, order) {
        report.flag(None, ViolationKind::MalformedStep, e.to_string());
        return report;
    }
    let mut store = NodeStore::new(order.clone());
    let mut expected: Vec<NodeRef> = Vec::new();
    let mut clause_sets: Vec<Vec<usize>> = Vec::new();
    let mut cum = 0;
    let mut max = 0;
    for (i, rec) in claims.records.iter().enumerate() {
        if rec.step != i {
            report.flag(
                Some(i),
                ViolationKind::MalformedStep,
                format!("record numbered {}", rec.step),
            );
        }
        if let Err(e) = validate_step(i, &rec.op, f, true) {
            report.flag(Some(i), ViolationKind::MalformedStep, e.to_string());
            return report;
        }
        let root = match execute(&rec.op, f, &mut store, &expected) {
            Ok(r) => r,
            Err(e) => {
                report.flag(Some(i), ViolationKind::MalformedStep, e.to_string());
                return report;
            }
        };
        let clauses = step_clauses(&rec.op, &clause_sets);
        if clauses != rec.clauses {
            report.flag(
                Some(i),
                ViolationKind::ClauseSetMismatch,
                format!("recorded {:?}, expected {:?}", rec.clauses, clauses),
            );
        }
        let size = store.size(root).expect("own handle");
        if size != rec.size {
            report.flag(
                Some(i),
                ViolationKind::SizeMismatch,
                format!("recorded size {}, recomputed {size}", rec.size),
            );
        }
        cum += size;
        max = max.max(size);
        if cum != rec.cum_size {
            report.flag(
                Some(i),
                ViolationKind::CumulativeSizeMismatch,
                format!("recorded {}, recomputed {cum}", rec.cum_size),
            );
        }
        if let Some((producer, roots)) = claims.roots {
            let claimed = roots
                .get(i)
                .ok_or_else(|| "no OBDD recorded".to_string())
                .and_then(|&r| producer.export(r).map_err(|e| e.to_string()))
                .and_then(|e| store.import(&e).map_err(|e| e.to_string()));
            match claimed {
                Ok(c) if c == root => {}
                Ok(_) => report.flag(
                    Some(i),
                    ViolationKind::SemanticMismatch,
                    format!("{} result differs from the recomputed OBDD", rec.op.kind()),
                ),
                Err(e) => report.flag(Some(i), ViolationKind::SemanticMismatch, e),
            }
        }
        expected.push(root);
        clause_sets.push(clauses);
    }
    if claims.refuted == Some(true) && !expected.last().is_some_and(|r| r.is_false()) {
        report.flag(
            claims.records.len().checked_sub(1),
            ViolationKind::NotRefuted,
            "refutation claimed but the last OBDD is not FALSE".into(),
        );
    }
    if claims.max_intermediate.is_some_and(|m| m != max) {
        report.flag(
            None,
            ViolationKind::SummaryMismatch,
            format!("max_intermediate should be {max}"),
        );
    }
    if claims.total_size.is_some_and(|t| t != cum) {
        report.flag(
            None,
            ViolationKind::SummaryMismatch,
            format!("total_size should be {cum}"),
        );
    }
    report
}

pub fn trace_to_jsonl(trace: &[TraceRecord]) -> String {
    let mut out = String::new();
    for rec in trace {
        out.push_str(&serde_json::to_string(rec).expect("record serializes"));
        out.push('\n');
    }
    out
}

pub fn trace_from_jsonl(text: &str) -> Result<Vec<TraceRecord>, serde_json::Error> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}

/// CSV summary with header `step,kind,size,cum_size,clauses`; the clause
/// column lists indices separated by spaces.
pub fn trace_to_csv(trace: &[TraceRecord]) -> String {
    let mut out = String::from("step,kind,size,cum_size,clauses\n");
    for rec in trace {
        let clauses: Vec<String> = rec.clauses.iter().map(|c| c.to_string()).collect();
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            rec.step,
            rec.op.kind(),
            rec.size,
            rec.cum_size,
            clauses.join(" ")
        ));
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SweepRow {
    pub order_index: usize,
    pub schedule_index: usize,
    pub order: String,
    pub schedule: String,
    pub seed: Option<u64>,
    pub refuted: bool,
    pub max_intermediate: usize,
    pub total_size: usize,
    pub steps: usize,
    pub truncated: bool,
    pub error: Option<String>,
}

/// Runs every (order, schedule) combination. Rows come back ordered by
/// (order index, schedule index) regardless of execution order; a failing
/// combination yields a row with `error` set.
pub fn sweep(
    f: &CnfFormula,
    orders: &[VarOrder],
    kinds: &[ScheduleKind],
    limits: RunLimits,
) -> Vec<SweepRow> {
    let jobs: Vec<(usize, usize)> = (0..orders.len())
        .flat_map(|o| (0..kinds.len()).map(move |k| (o, k)))
        .collect();
    jobs.into_par_iter()
        .map(|(oi, ki)| {
            let order = &orders[oi];
            let kind = kinds[ki];
            let mut row = SweepRow {
                order_index: oi,
                schedule_index: ki,
                order: order.to_string(),
                schedule: kind.name().to_string(),
                seed: kind.seed(),
                refuted: false,
                max_intermediate: 0,
                total_size: 0,
                steps: 0,
                truncated: false,
                error: None,
            };
            let outcome = builtin_schedule(f, order, kind, kind.needs_projection(), limits)
                .and_then(|s| run_schedule(f, order, &s, limits));
            match outcome {
                Ok(r) => {
                    row.refuted = r.refuted;
                    row.max_intermediate = r.max_intermediate;
                    row.total_size = r.total_size;
                    row.steps = r.steps();
                    row.truncated = r.truncated.is_some();
                }
                Err(ScheduleError::Bdd(BddError::NodeBudgetExceeded(_))) => row.truncated = true,
                Err(e) => row.error = Some(e.to_string()),
            }
            row
        })
        .collect()
}
