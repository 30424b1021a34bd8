//! Executable counterparts of the OBDD lower-bound argument for pigeonhole
//! refutations: the order-induced color split of the `PC*_n` matrix, the
//! constructive matrix-selection lemma, window lemmas over union-built set
//! sequences, the per-step column sets `J_i`, and a checker for
//! fooling-set certificates that force `size ≥ 2^|A|`.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigUint;
use num_rational::Ratio;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::bdd::{NodeRef, NodeStore};
use crate::cnf::{formula_to_bdd, php_positive_count, CnfFormula, PigeonMap};
use crate::error::{BoundsError, OrderError};
use crate::order::{VarId, VarOrder};
use crate::refutation::{ProofStep, TraceRecord};

/// `c = 1/2 − √2/4 ≈ 0.146`.
pub fn lemma_constant() -> f64 {
    0.5 - std::f64::consts::SQRT_2 / 4.0
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LemmaConstant {
    /// `1/2 − √2/4`, for which the greedy construction is proven.
    #[default]
    Proven,
    /// `1 − √2/2`, conjectured sharp; no guarantee.
    Conjectured,
}

impl LemmaConstant {
    pub fn value(self) -> f64 {
        match self {
            LemmaConstant::Proven => lemma_constant(),
            LemmaConstant::Conjectured => 2.0 * lemma_constant(),
        }
    }
}

/// Smallest `s` with `s² ≥ 2n²`.
fn ceil_sqrt_two_n_sq(n: u64) -> u128 {
    let t = 2 * (n as u128) * (n as u128);
    let s = t.isqrt();
    if s * s < t {
        s + 1
    } else {
        s
    }
}

/// `⌊c·n⌋` computed with integers only. With `s = ⌈√(2n²)⌉`,
/// `⌊(1/2 − √2/4)n⌋ = ⌊(2n − s)/4⌋` and `⌊(1 − √2/2)n⌋ = ⌊(2n − s)/2⌋`
/// (`√(2n²)` is irrational for `n ≥ 1`).
pub fn selection_target(n: usize, constant: LemmaConstant) -> usize {
    if n == 0 {
        return 0;
    }
    let slack = 2 * n as u128 - ceil_sqrt_two_n_sq(n as u64);
    let m = match constant {
        LemmaConstant::Proven => slack / 4,
        LemmaConstant::Conjectured => slack / 2,
    };
    m as usize
}

/// Per-pigeon growth factor `2^{c/4}` of the reference curve.
pub fn bound_base() -> f64 {
    (lemma_constant() / 4.0).exp2()
}

/// Reference curve `2^{n·c/4}`.
pub fn theoretical_bound(n: usize) -> f64 {
    (n as f64 * lemma_constant() / 4.0).exp2()
}

/// Certifies `2^{c/4} > 1.025` in exact integer arithmetic:
/// `c > 1/7` because `(10/7)² > 2`, i.e. `100 > 98`; and `2^{1/28} > 1.025`
/// because `1025^28 < 2·1000^28`.
pub fn base_exceeds_1_025() -> bool {
    let c_above_one_seventh = 10u32 * 10 > 2 * 7 * 7;
    let root_bound =
        BigUint::from(1025u32).pow(28) < BigUint::from(2u32) * BigUint::from(1000u32).pow(28);
    c_above_one_seventh && root_bound
}

/// Order-induced partition of the pigeonhole variables.
///
/// `below` holds the `⌊n²/2⌋` smallest variables of `PC*_n` (pigeons
/// `1..=n`), `above` the rest of `PC*_n`. The starred sets extend the split
/// to every `PHP_n` variable at or before `max below`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColorSplit {
    pub n: usize,
    pub below: BTreeSet<VarId>,
    pub above: BTreeSet<VarId>,
    pub below_star: BTreeSet<VarId>,
    pub above_star: BTreeSet<VarId>,
}

pub fn color_split(order: &VarOrder, map: &PigeonMap) -> Result<ColorSplit, BoundsError> {
    if order.len() != map.n_vars() {
        return Err(OrderError::WrongLength {
            expected: map.n_vars(),
            got: order.len(),
        }
        .into());
    }
    let n = map.holes();
    let half = n * n / 2;
    let pc_star: Vec<VarId> = order
        .vars()
        .iter()
        .copied()
        .filter(|&v| map.coords(v).is_some_and(|(pigeon, _)| pigeon <= n))
        .collect();
    let below: BTreeSet<VarId> = pc_star[..half].iter().copied().collect();
    let above: BTreeSet<VarId> = pc_star[half..].iter().copied().collect();
    let cut = half
        .checked_sub(1)
        .map(|i| order.level(pc_star[i]).expect("in order"));
    let below_star: BTreeSet<VarId> = match cut {
        Some(cut) => order.vars()[..=cut].iter().copied().collect(),
        None => BTreeSet::new(),
    };
    let above_star = order
        .vars()
        .iter()
        .copied()
        .filter(|v| !below_star.contains(v))
        .collect();
    Ok(ColorSplit {
        n,
        below,
        above,
        below_star,
        above_star,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    White,
    Black,
}

/// `n × n` matrix with white/black entries, row-major, 0-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixColoring {
    n: usize,
    cells: Vec<Color>,
}

impl MatrixColoring {
    /// Rejects colorings whose white and black counts differ by more than one.
    pub fn new(n: usize, cells: Vec<Color>) -> Result<Self, BoundsError> {
        if n == 0 || cells.len() != n * n {
            return Err(BoundsError::BadMatrix);
        }
        let white = cells.iter().filter(|&&c| c == Color::White).count();
        let black = cells.len() - white;
        if white.abs_diff(black) > 1 {
            return Err(BoundsError::Unbalanced { white, black });
        }
        Ok(MatrixColoring { n, cells })
    }

    /// Entry `(i, j)` is white iff `P_{i+1, j+1}` lies in `split.below`.
    pub fn from_split(split: &ColorSplit, map: &PigeonMap) -> Self {
        let n = split.n;
        let cells = (0..n * n)
            .map(|k| {
                if split.below.contains(&map.var(k / n + 1, k % n + 1)) {
                    Color::White
                } else {
                    Color::Black
                }
            })
            .collect();
        MatrixColoring { n, cells }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn color(&self, row: usize, col: usize) -> Color {
        self.cells[row * self.n + col]
    }

    /// One line per row, `W`/`B` per entry.
    pub fn parse(text: &str) -> Result<Self, BoundsError> {
        let rows: Vec<&str> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .collect();
        let n = rows.len();
        let mut cells = Vec::with_capacity(n * n);
        for row in rows {
            let colors: Vec<Color> = row
                .chars()
                .filter(|c| !c.is_whitespace())
                .map(|c| match c {
                    'W' | 'w' | '0' => Ok(Color::White),
                    'B' | 'b' | '1' => Ok(Color::Black),
                    _ => Err(BoundsError::BadMatrix),
                })
                .collect::<Result<_, _>>()?;
            if colors.len() != n {
                return Err(BoundsError::BadMatrix);
            }
            cells.extend(colors);
        }
        MatrixColoring::new(n, cells)
    }
}

impl fmt::Display for MatrixColoring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.cells.chunks(self.n) {
            for c in row {
                f.write_str(if *c == Color::White { "W" } else { "B" })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionKind {
    Rows,
    Columns,
}

/// Entries are `(row, col)`, 0-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectedPair {
    pub white: (usize, usize),
    pub black: (usize, usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionWitness {
    pub kind: SelectionKind,
    /// The chosen rows (or columns).
    pub indices: Vec<usize>,
    pub pairs: Vec<SelectedPair>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "outcome")]
pub enum SelectionOutcome {
    Witness(SelectionWitness),
    /// `⌊c·n⌋ = 0`: the lemma says nothing.
    Infeasible {
        n: usize,
    },
}

/// Greedy construction: while some remaining row has a white and a black
/// entry in the remaining columns, take the lowest such row with its
/// lowest white and lowest black column, and delete the row and both
/// columns. Enough rounds give a rows-witness. Otherwise the residual rows
/// are monochromatic; the i-th all-white row and the i-th all-black row are
/// paired on the i-th surviving column to give a columns-witness.
pub fn lemma_matrix_select(
    m: &MatrixColoring,
    constant: LemmaConstant,
) -> Result<SelectionOutcome, BoundsError> {
    let n = m.n;
    let target = selection_target(n, constant);
    if target == 0 {
        return Ok(SelectionOutcome::Infeasible { n });
    }
    let mut row_alive = vec![true; n];
    let mut col_alive = vec![true; n];
    let mut rows = Vec::new();
    let mut pairs = Vec::new();
    while rows.len() < target {
        let pick = (0..n).filter(|&r| row_alive[r]).find_map(|r| {
            let first = |color| (0..n).find(|&c| col_alive[c] && m.color(r, c) == color);
            Some((r, first(Color::White)?, first(Color::Black)?))
        });
        let Some((r, w, b)) = pick else { break };
        row_alive[r] = false;
        col_alive[w] = false;
        col_alive[b] = false;
        rows.push(r);
        pairs.push(SelectedPair {
            white: (r, w),
            black: (r, b),
        });
    }
    if rows.len() == target {
        return Ok(SelectionOutcome::Witness(SelectionWitness {
            kind: SelectionKind::Rows,
            indices: rows,
            pairs,
        }));
    }
    let cols: Vec<usize> = (0..n).filter(|&c| col_alive[c]).collect();
    let residual = |color| -> Vec<usize> {
        (0..n)
            .filter(|&r| row_alive[r] && cols.iter().all(|&c| m.color(r, c) == color))
            .collect()
    };
    let white_rows = residual(Color::White);
    let black_rows = residual(Color::Black);
    if white_rows.len() < target || black_rows.len() < target || cols.len() < target {
        return Err(BoundsError::ConstructionFailed { target });
    }
    let pairs = (0..target)
        .map(|i| SelectedPair {
            white: (white_rows[i], cols[i]),
            black: (black_rows[i], cols[i]),
        })
        .collect();
    Ok(SelectionOutcome::Witness(SelectionWitness {
        kind: SelectionKind::Columns,
        indices: cols[..target].to_vec(),
        pairs,
    }))
}

/// True iff each pair sits in its named row (column), has the right colors,
/// and all `2m` entries use distinct columns (rows).
pub fn verify_selection(w: &SelectionWitness, m: &MatrixColoring) -> bool {
    if w.indices.len() != w.pairs.len() {
        return false;
    }
    let in_range = |(r, c): (usize, usize)| r < m.n && c < m.n;
    let mut used = BTreeSet::new();
    let mut named = BTreeSet::new();
    for (&idx, p) in w.indices.iter().zip(&w.pairs) {
        if !named.insert(idx) || !in_range(p.white) || !in_range(p.black) {
            return false;
        }
        if m.color(p.white.0, p.white.1) != Color::White
            || m.color(p.black.0, p.black.1) != Color::Black
        {
            return false;
        }
        let (own, other) = match w.kind {
            SelectionKind::Rows => ((p.white.0, p.black.0), (p.white.1, p.black.1)),
            SelectionKind::Columns => ((p.white.1, p.black.1), (p.white.0, p.black.0)),
        };
        if own != (idx, idx) || !used.insert(other.0) || !used.insert(other.1) {
            return false;
        }
    }
    true
}

/// How an entry of a [`UnionSequence`] was formed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SetOrigin {
    Empty,
    Singleton(usize),
    Union(usize, usize),
}

/// A sequence of sets where each entry is empty, a singleton, or the union
/// of two distinct earlier entries.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UnionSequence {
    sets: Vec<BTreeSet<usize>>,
    origins: Vec<SetOrigin>,
}

impl UnionSequence {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push_empty(&mut self) -> usize {
        self.sets.push(BTreeSet::new());
        self.origins.push(SetOrigin::Empty);
        self.sets.len() - 1
    }

    pub fn push_singleton(&mut self, c: usize) -> usize {
        self.sets.push(BTreeSet::from([c]));
        self.origins.push(SetOrigin::Singleton(c));
        self.sets.len() - 1
    }

    pub fn push_union(&mut self, j: usize, k: usize) -> Result<usize, BoundsError> {
        let i = self.sets.len();
        if j == k || j >= i || k >= i {
            return Err(BoundsError::Discipline(i));
        }
        let u = self.sets[j].union(&self.sets[k]).copied().collect();
        self.sets.push(u);
        self.origins.push(SetOrigin::Union(j.min(k), j.max(k)));
        Ok(i)
    }

    /// Recovers origins for plain sets by search. Cubic; meant for small
    /// inputs.
    pub fn from_sets(sets: Vec<BTreeSet<usize>>) -> Result<Self, BoundsError> {
        let mut origins = Vec::with_capacity(sets.len());
        for (i, s) in sets.iter().enumerate() {
            let origin = match s.len() {
                0 => SetOrigin::Empty,
                1 => SetOrigin::Singleton(*s.first().unwrap()),
                _ => (0..i)
                    .flat_map(|j| (j + 1..i).map(move |k| (j, k)))
                    .find(|&(j, k)| {
                        sets[j].is_subset(s)
                            && sets[k].is_subset(s)
                            && sets[j].len() + sets[k].len() >= s.len()
                            && s.iter().all(|x| sets[j].contains(x) || sets[k].contains(x))
                    })
                    .map(|(j, k)| SetOrigin::Union(j, k))
                    .ok_or(BoundsError::Discipline(i))?,
            };
            origins.push(origin);
        }
        Ok(UnionSequence { sets, origins })
    }

    pub fn sets(&self) -> &[BTreeSet<usize>] {
        &self.sets
    }

    pub fn origins(&self) -> &[SetOrigin] {
        &self.origins
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }
}

/// Smallest `j < last` with `a|R| ≤ |B_j ∩ R| < 2a|R|`, where the sequence
/// must end in `C`, `R ⊆ C`, and `1/|R| < a ≤ 1/2`.
pub fn find_window(
    seq: &UnionSequence,
    c: &BTreeSet<usize>,
    r: &BTreeSet<usize>,
    a: Ratio<u64>,
) -> Result<usize, BoundsError> {
    let last = seq.sets.last().ok_or(BoundsError::EmptySequence)?;
    if last != c {
        return Err(BoundsError::LastIsNotC);
    }
    if !r.is_subset(c) {
        return Err(BoundsError::RNotInC);
    }
    let size = r.len() as u64;
    let (num, den) = (*a.numer(), *a.denom());
    // 1/|R| < a ≤ 1/2
    if num * size <= den || 2 * num > den {
        return Err(BoundsError::BadWindowParameter {
            a: a.to_string(),
            r: r.len(),
        });
    }
    for (i, origin) in seq.origins.iter().enumerate() {
        let ok = match *origin {
            SetOrigin::Empty => seq.sets[i].is_empty(),
            SetOrigin::Singleton(x) => seq.sets[i].len() == 1 && seq.sets[i].contains(&x),
            SetOrigin::Union(j, k) => {
                j < k && k < i && {
                    let u: BTreeSet<usize> = seq.sets[j].union(&seq.sets[k]).copied().collect();
                    u == seq.sets[i]
                }
            }
        };
        if !ok {
            return Err(BoundsError::Discipline(i));
        }
    }
    let lo = num * size;
    let hi = 2 * num * size;
    seq.sets[..seq.sets.len() - 1]
        .iter()
        .position(|b| {
            let hit = b.intersection(r).count() as u64 * den;
            lo <= hit && hit < hi
        })
        .ok_or(BoundsError::NotFound)
}

fn trace_sequence(
    trace: &[TraceRecord],
    mut leaf: impl FnMut(usize) -> Option<usize>,
) -> Result<UnionSequence, BoundsError> {
    let mut seq = UnionSequence::new();
    for rec in trace {
        match rec.op {
            ProofStep::Axiom { clause } => match leaf(clause) {
                Some(x) => seq.push_singleton(x),
                None => seq.push_empty(),
            },
            ProofStep::Join { left, right } => seq.push_union(left, right)?,
            ProofStep::Project { .. } => return Err(BoundsError::ProjectionInTrace(rec.step)),
        };
    }
    Ok(seq)
}

/// Row window: a step whose positive clauses cover between `|R|/4`
/// (inclusive) and `|R|/2` (exclusive) of `R`, where `R` is a set of
/// positive-clause indices with `|R| > 4`.
pub fn rows_window(
    trace: &[TraceRecord],
    n: usize,
    r: &BTreeSet<usize>,
) -> Result<usize, BoundsError> {
    if r.len() <= 4 {
        return Err(BoundsError::TooFewRows(r.len()));
    }
    let positives = php_positive_count(n);
    let seq = trace_sequence(trace, |c| (c < positives).then_some(c))?;
    let c = seq.sets.last().cloned().ok_or(BoundsError::EmptySequence)?;
    find_window(&seq, &c, r, Ratio::new(1, 4))
}

/// Column window: a step whose `J_i` covers between `|P'|/4` (inclusive) and
/// `|P'|/2` (exclusive) of the holes `P'` (1-based), `|P'| > 4`.
pub fn columns_window(
    trace: &[TraceRecord],
    f: &CnfFormula,
    map: &PigeonMap,
    split: &ColorSplit,
    holes: &BTreeSet<usize>,
) -> Result<usize, BoundsError> {
    if holes.len() <= 4 {
        return Err(BoundsError::TooFewRows(holes.len()));
    }
    let seq = trace_sequence(trace, |c| straddling_hole(f, map, split, c))?;
    let c = seq.sets.last().cloned().ok_or(BoundsError::EmptySequence)?;
    find_window(&seq, &c, holes, Ratio::new(1, 4))
}

/// Hole `k` if clause `c` is `¬P_ak ∨ ¬P_bk` with one variable in
/// `split.below` and the other in `split.above`.
fn straddling_hole(f: &CnfFormula, map: &PigeonMap, split: &ColorSplit, c: usize) -> Option<usize> {
    let lits = f.clause(c).literals();
    let [x, y] = lits else { return None };
    if x.positive || y.positive {
        return None;
    }
    let (_, hx) = map.coords(x.var)?;
    let (_, hy) = map.coords(y.var)?;
    let straddles = (split.below.contains(&x.var) && split.above.contains(&y.var))
        || (split.below.contains(&y.var) && split.above.contains(&x.var));
    (hx == hy && straddles).then_some(hx)
}

/// `J_i`: holes `j` with a clause `¬P_aj ∨ ¬P_bj` in `Cls(B_i)` such that
/// `P_aj ∈ S_≺` and `P_bj ∈ S_⪰`.
pub fn compute_j(
    step: &TraceRecord,
    f: &CnfFormula,
    map: &PigeonMap,
    split: &ColorSplit,
) -> BTreeSet<usize> {
    step.clauses
        .iter()
        .filter_map(|&c| straddling_hole(f, map, split, c))
        .collect()
}

/// Positive (`PC_n`) and negative (`NC_n`) clauses of a step.
pub fn clause_split(step: &TraceRecord, n: usize) -> (BTreeSet<usize>, BTreeSet<usize>) {
    step.clauses
        .iter()
        .partition(|&&c| c < php_positive_count(n))
}

/// `(S^i_≺, S^i_⪰)`: the step's variables inside and outside `S*_≺`.
pub fn step_split(
    step: &TraceRecord,
    f: &CnfFormula,
    split: &ColorSplit,
) -> (BTreeSet<VarId>, BTreeSet<VarId>) {
    let vars: BTreeSet<VarId> = step
        .clauses
        .iter()
        .flat_map(|&c| f.clause(c).vars())
        .collect();
    vars.into_iter().partition(|v| split.below_star.contains(v))
}

pub const MAX_FOOLING_POSITIONS: usize = 20;
pub const MAX_FOOLING_SUFFIX: usize = 20;

/// Witness for the structure theorem: prefix length `k`, 1-based positions
/// `A ⊆ {1..k}` within the prefix, and an anchor `z ∈ 𝔹^k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoolingCertificate {
    pub k: usize,
    #[serde(rename = "A")]
    pub positions: Vec<usize>,
    pub z: Vec<u8>,
}

impl FoolingCertificate {
    fn validate(&self, universe: usize) -> Result<Vec<usize>, BoundsError> {
        let bad = |m: String| Err(BoundsError::BadCertificate(m));
        if self.positions.is_empty() {
            return bad("A must be nonempty".into());
        }
        if self.k >= universe {
            return bad(format!(
                "k = {} must be below the universe size {universe}",
                self.k
            ));
        }
        if self.z.len() != self.k {
            return bad(format!(
                "z has {} entries, expected k = {}",
                self.z.len(),
                self.k
            ));
        }
        if self.z.iter().any(|&b| b > 1) {
            return bad("z entries must be 0 or 1".into());
        }
        let mut a: Vec<usize> = self.positions.clone();
        a.sort_unstable();
        a.dedup();
        if a.len() != self.positions.len() || a.iter().any(|&p| p == 0 || p > self.k) {
            return bad("A must list distinct positions in 1..=k".into());
        }
        if a.len() > MAX_FOOLING_POSITIONS {
            return Err(BoundsError::Infeasible(format!(
                "|A| = {} exceeds {MAX_FOOLING_POSITIONS}",
                a.len()
            )));
        }
        if universe - self.k > MAX_FOOLING_SUFFIX {
            return Err(BoundsError::Infeasible(format!(
                "n - k = {} exceeds {MAX_FOOLING_SUFFIX}",
                universe - self.k
            )));
        }
        Ok(a)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "verdict")]
pub enum FoolingVerdict {
    Certified {
        bound: u64,
        actual_size: usize,
    },
    /// Two prefixes agreeing with `z` outside `A` that no suffix separates.
    Refuted {
        x1: Vec<u8>,
        x2: Vec<u8>,
    },
    /// `|A| = 1` and the two separated cofactors are the two terminals. The
    /// hypotheses hold, but they force only two nodes counting terminals,
    /// i.e. a single internal node, so no `2^|A|` internal-node bound is
    /// claimed.
    Degenerate {
        bound_with_terminals: u64,
        actual_size: usize,
    },
}

/// Checks a certificate against `f` in `store`. Two prefixes are separated
/// by some suffix iff their cofactors differ, which for canonical OBDDs is
/// handle inequality.
pub fn check_fooling(
    store: &mut NodeStore,
    f: NodeRef,
    cert: &FoolingCertificate,
) -> Result<FoolingVerdict, BoundsError> {
    let positions = cert.validate(store.n_vars())?;
    let prefix_vars: Vec<VarId> = store.order().vars()[..cert.k].to_vec();
    let width = positions.len();
    let mut prefixes = Vec::with_capacity(1 << width);
    let mut groups: FxHashMap<NodeRef, Vec<usize>> = FxHashMap::default();
    for t in 0..1usize << width {
        let mut x = cert.z.clone();
        for (bit, &p) in positions.iter().enumerate() {
            x[p - 1] = (t >> (width - 1 - bit) & 1) as u8;
        }
        let mut g = f;
        for (v, &b) in prefix_vars.iter().zip(&x) {
            g = store.restrict(g, *v, b == 1)?;
        }
        groups.entry(g).or_default().push(t);
        prefixes.push(x);
    }
    if let Some(pair) = groups
        .values()
        .filter(|g| g.len() >= 2)
        .min_by_key(|g| g[0])
    {
        return Ok(FoolingVerdict::Refuted {
            x1: prefixes[pair[0]].clone(),
            x2: prefixes[pair[1]].clone(),
        });
    }
    let bound = 1u64 << width;
    let actual_size = store.size(f)?;
    if width == 1 && groups.keys().all(|g| g.is_terminal()) {
        return Ok(FoolingVerdict::Degenerate {
            bound_with_terminals: bound,
            actual_size,
        });
    }
    assert!(
        actual_size as u64 >= bound,
        "certified bound {bound} exceeds the OBDD size {actual_size}"
    );
    Ok(FoolingVerdict::Certified { bound, actual_size })
}

/// [`check_fooling`] on the conjunction of a CNF under `order`.
pub fn check_fooling_cnf(
    f: &CnfFormula,
    order: &VarOrder,
    cert: &FoolingCertificate,
) -> Result<FoolingVerdict, BoundsError> {
    let mut store = NodeStore::new(order.clone());
    let root = formula_to_bdd(f, &mut store)?;
    check_fooling(&mut store, root, cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::gen_php;
    use crate::refutation::{builtin_schedule, run_schedule, RunLimits, ScheduleKind};

    #[test]
    fn constants() {
        assert!((lemma_constant() - 0.146).abs() < 1e-3);
        assert!((bound_base() - 1.0257).abs() < 1e-4);
        assert!(bound_base() > 1.025);
        assert!(base_exceeds_1_025());
        assert!((theoretical_bound(40) - 2.76).abs() < 5e-3);
    }

    #[test]
    fn selection_targets() {
        for n in 0..=6 {
            assert_eq!(selection_target(n, LemmaConstant::Proven), 0);
        }
        assert_eq!(selection_target(7, LemmaConstant::Proven), 1);
        assert_eq!(selection_target(35, LemmaConstant::Proven), 5);
        assert_eq!(selection_target(4, LemmaConstant::Conjectured), 1);
    }

    #[test]
    fn split_row_major_php2() {
        let map = PigeonMap::new(2);
        let s = color_split(&VarOrder::row_major(6), &map).unwrap();
        assert_eq!(s.below, BTreeSet::from([VarId(0), VarId(1)]));
        assert_eq!(s.above, BTreeSet::from([VarId(2), VarId(3)]));
        assert_eq!(s.below_star, s.below);
        assert_eq!(s.above_star.len(), 4);
    }

    #[test]
    fn split_column_major_star_grows() {
        let map = PigeonMap::new(4);
        let order = VarOrder::column_major(&map);
        let s = color_split(&order, &map).unwrap();
        assert_eq!(s.below.len(), 8);
        // holes 1 and 2 of pigeons 1..=4 are below; pigeon 5's hole-1 and
        // hole-2 entries precede the last of them
        assert!(s.below_star.contains(&map.var(5, 1)));
        assert!(!s.below_star.contains(&map.var(5, 2)));
        assert_eq!(s.below_star.len(), 9);
        let m = MatrixColoring::from_split(&s, &map);
        assert_eq!(m.color(0, 0), Color::White);
        assert_eq!(m.color(3, 1), Color::White);
        assert_eq!(m.color(0, 2), Color::Black);
    }

    #[test]
    fn top_half_white_gives_columns_witness() {
        let map = PigeonMap::new(8);
        let s = color_split(&VarOrder::row_major(72), &map).unwrap();
        let m = MatrixColoring::from_split(&s, &map);
        for r in 0..8 {
            let want = if r < 4 { Color::White } else { Color::Black };
            assert!((0..8).all(|c| m.color(r, c) == want));
        }
        let SelectionOutcome::Witness(w) = lemma_matrix_select(&m, LemmaConstant::Proven).unwrap()
        else {
            panic!("expected a witness");
        };
        assert_eq!(w.kind, SelectionKind::Columns);
        assert_eq!(w.indices.len(), 1);
        assert!(verify_selection(&w, &m));
    }

    #[test]
    fn small_n_is_infeasible() {
        let m = MatrixColoring::parse("WWB\nBWB\nWBW\n").unwrap();
        assert_eq!(
            lemma_matrix_select(&m, LemmaConstant::Proven).unwrap(),
            SelectionOutcome::Infeasible { n: 3 }
        );
        assert!(matches!(
            MatrixColoring::parse("WW\nWB\n"),
            Err(BoundsError::Unbalanced { .. })
        ));
        assert!(matches!(
            MatrixColoring::parse("WB\nW\n"),
            Err(BoundsError::BadMatrix)
        ));
    }

    #[test]
    fn verify_selection_catches_mutations() {
        // rows alternate colors per entry: every row is bichromatic
        let n = 8;
        let cells = (0..n * n)
            .map(|k| {
                if k % 2 == 0 {
                    Color::White
                } else {
                    Color::Black
                }
            })
            .collect();
        let m = MatrixColoring::new(n, cells).unwrap();
        let SelectionOutcome::Witness(w) = lemma_matrix_select(&m, LemmaConstant::Proven).unwrap()
        else {
            panic!()
        };
        assert_eq!(w.kind, SelectionKind::Rows);
        assert!(verify_selection(&w, &m));
        let mut swapped = w.clone();
        let p = &mut swapped.pairs[0];
        std::mem::swap(&mut p.white, &mut p.black);
        assert!(!verify_selection(&swapped, &m));
        let mut two = lemma_rows_of(&m, 2);
        assert!(verify_selection(&two, &m));
        two.pairs[1].white.1 = two.pairs[0].white.1;
        two.pairs[1].white.0 = two.indices[1];
        assert!(!verify_selection(&two, &m));
    }

    fn lemma_rows_of(m: &MatrixColoring, count: usize) -> SelectionWitness {
        let pairs: Vec<SelectedPair> = (0..count)
            .map(|r| SelectedPair {
                white: (r, 2 * r),
                black: (r, 2 * r + 1),
            })
            .collect();
        let w = SelectionWitness {
            kind: SelectionKind::Rows,
            indices: (0..count).collect(),
            pairs,
        };
        assert!(verify_selection(&w, m));
        w
    }

    #[test]
    fn window_on_singletons_then_unions() {
        let mut seq = UnionSequence::new();
        for x in 1..=4 {
            seq.push_singleton(x);
        }
        let a = seq.push_union(0, 1).unwrap();
        let b = seq.push_union(2, 3).unwrap();
        seq.push_union(a, b).unwrap();
        let all: BTreeSet<usize> = (1..=4).collect();
        assert_eq!(
            find_window(&seq, &all, &all, Ratio::new(1, 4)),
            Err(BoundsError::BadWindowParameter {
                a: "1/4".into(),
                r: 4
            })
        );
        // a = 1/3 > 1/4: window [4/3, 8/3) holds the pairs
        assert_eq!(find_window(&seq, &all, &all, Ratio::new(1, 3)), Ok(4));
        let two: BTreeSet<usize> = [1, 2].into();
        let mut small = UnionSequence::new();
        small.push_singleton(1);
        small.push_singleton(2);
        small.push_union(0, 1).unwrap();
        assert!(matches!(
            find_window(&small, &two, &two, Ratio::new(1, 2)),
            Err(BoundsError::BadWindowParameter { .. })
        ));
    }

    #[test]
    fn window_singleton_qualifies_when_a_allows() {
        let mut seq = UnionSequence::new();
        for x in 0..8 {
            seq.push_singleton(x);
        }
        let mut acc = 0;
        for x in 1..8 {
            acc = seq.push_union(acc, x).unwrap();
        }
        let all: BTreeSet<usize> = (0..8).collect();
        // window [2, 4): the first union holding two elements
        assert_eq!(find_window(&seq, &all, &all, Ratio::new(1, 4)), Ok(8));
        let bad = UnionSequence::from_sets(vec![BTreeSet::from([1]), BTreeSet::from([1, 2])]);
        assert_eq!(bad, Err(BoundsError::Discipline(1)));
    }

    #[test]
    fn rows_window_on_php6_linear() {
        let (f, _) = gen_php(6).unwrap();
        let o = VarOrder::row_major(f.n_vars());
        let s =
            builtin_schedule(&f, &o, ScheduleKind::Linear, false, RunLimits::default()).unwrap();
        let r = run_schedule(&f, &o, &s, RunLimits::default()).unwrap();
        let rows: BTreeSet<usize> = (0..7).collect();
        let i = rows_window(&r.trace, 6, &rows).unwrap();
        let (pos, _) = clause_split(&r.trace[i], 6);
        assert!((2..=3).contains(&pos.len()), "{pos:?}");
        assert!(matches!(
            rows_window(&r.trace, 6, &(0..4).collect()),
            Err(BoundsError::TooFewRows(4))
        ));
    }

    #[test]
    fn j_of_axioms() {
        let (f, map) = gen_php(4).unwrap();
        let order = VarOrder::row_major(f.n_vars());
        let split = color_split(&order, &map).unwrap();
        let rec = |clause: usize| TraceRecord {
            step: 0,
            op: ProofStep::Axiom { clause },
            clauses: vec![clause],
            size: 0,
            cum_size: 0,
            store_nodes: 0,
        };
        assert!(compute_j(&rec(0), &f, &map, &split).is_empty());
        // ¬P_{1,k} ∨ ¬P_{3,k}: rows 1..=2 are below, rows 3..=4 above (n = 4)
        let idx = (0..f.len())
            .find(|&c| {
                let l = f.clause(c).literals();
                l.len() == 2 && l[0].var == map.var(1, 2) && l[1].var == map.var(3, 2)
            })
            .unwrap();
        assert_eq!(compute_j(&rec(idx), &f, &map, &split), BTreeSet::from([2]));
        // pigeon 5 is outside PC*
        let idx5 = (0..f.len())
            .find(|&c| {
                let l = f.clause(c).literals();
                l.len() == 2 && l[0].var == map.var(1, 2) && l[1].var == map.var(5, 2)
            })
            .unwrap();
        assert!(compute_j(&rec(idx5), &f, &map, &split).is_empty());
    }

    #[test]
    fn fooling_examples() {
        let mut s = NodeStore::new(VarOrder::row_major(4));
        let x: Vec<NodeRef> = (0..4).map(|v| s.literal(VarId(v), true).unwrap()).collect();
        let a = s.and(x[0], x[2]).unwrap();
        let b = s.and(x[1], x[3]).unwrap();
        let sel = s.or(a, b).unwrap();
        let cert = FoolingCertificate {
            k: 2,
            positions: vec![1, 2],
            z: vec![0, 0],
        };
        assert_eq!(
            check_fooling(&mut s, sel, &cert).unwrap(),
            FoolingVerdict::Certified {
                bound: 4,
                actual_size: 6
            }
        );
        let mut parity = x[0];
        for &xi in &x[1..] {
            let np = s.negate(parity).unwrap();
            let nx = s.negate(xi).unwrap();
            let l = s.and(parity, nx).unwrap();
            let r = s.and(np, xi).unwrap();
            parity = s.or(l, r).unwrap();
        }
        assert_eq!(
            check_fooling(&mut s, parity, &cert).unwrap(),
            FoolingVerdict::Refuted {
                x1: vec![0, 0],
                x2: vec![1, 1]
            }
        );
        let one = FoolingCertificate {
            k: 1,
            positions: vec![1],
            z: vec![1],
        };
        let x0x1 = s.and(x[0], x[1]).unwrap();
        assert_eq!(
            check_fooling(&mut s, x0x1, &one).unwrap(),
            FoolingVerdict::Certified {
                bound: 2,
                actual_size: 2
            }
        );
        assert_eq!(
            check_fooling(&mut s, x[0], &one).unwrap(),
            FoolingVerdict::Degenerate {
                bound_with_terminals: 2,
                actual_size: 1
            }
        );
    }

    #[test]
    fn fooling_rejects_bad_certificates() {
        let mut s = NodeStore::new(VarOrder::row_major(3));
        let bad = |k, positions: Vec<usize>, z: Vec<u8>| FoolingCertificate { k, positions, z };
        for cert in [
            bad(2, vec![], vec![0, 0]),
            bad(3, vec![1], vec![0, 0, 0]),
            bad(2, vec![3], vec![0, 0]),
            bad(2, vec![1, 1], vec![0, 0]),
            bad(2, vec![1], vec![0]),
            bad(2, vec![1], vec![0, 2]),
        ] {
            assert!(matches!(
                check_fooling(&mut s, NodeRef::TRUE, &cert),
                Err(BoundsError::BadCertificate(_))
            ));
        }
        let mut wide = NodeStore::new(VarOrder::row_major(30));
        assert!(matches!(
            check_fooling(&mut wide, NodeRef::TRUE, &bad(2, vec![1], vec![0, 0])),
            Err(BoundsError::Infeasible(_))
        ));
    }
}
