//! CNF formulas, DIMACS I/O and the pigeonhole family.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::bdd::{NodeRef, NodeStore};
use crate::error::{BddError, CnfError};
use crate::order::VarId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub var: VarId,
    pub positive: bool,
}

impl Literal {
    pub fn pos(var: VarId) -> Self {
        Literal {
            var,
            positive: true,
        }
    }

    pub fn neg(var: VarId) -> Self {
        Literal {
            var,
            positive: false,
        }
    }

    /// DIMACS integer: `±(var + 1)`.
    pub fn to_dimacs(self) -> i64 {
        let v = self.var.0 as i64 + 1;
        if self.positive {
            v
        } else {
            -v
        }
    }
}

/// A disjunction of literals with no repeated and no complementary literals.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Clause {
    lits: Vec<Literal>,
}

impl Clause {
    /// Drops repeated literals (first occurrence wins) and rejects
    /// tautologies, reporting the offending variable.
    pub fn new(lits: impl IntoIterator<Item = Literal>) -> Result<Self, VarId> {
        let mut out: Vec<Literal> = Vec::new();
        for l in lits {
            if let Some(prev) = out.iter().find(|p| p.var == l.var) {
                if prev.positive != l.positive {
                    return Err(l.var);
                }
                continue;
            }
            out.push(l);
        }
        Ok(Clause { lits: out })
    }

    pub fn literals(&self) -> &[Literal] {
        &self.lits
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.lits.iter().map(|l| l.var)
    }

    /// `value(v)` gives the truth value of variable `v`.
    pub fn satisfied_by(&self, value: impl Fn(VarId) -> bool) -> bool {
        self.lits.iter().any(|l| value(l.var) == l.positive)
    }
}

#[derive(Clone, Debug)]
pub struct CnfFormula {
    n_vars: usize,
    clauses: Vec<Clause>,
    label: Option<String>,
}

impl PartialEq for CnfFormula {
    /// Structural equality; the label is informational only.
    fn eq(&self, other: &Self) -> bool {
        self.n_vars == other.n_vars && self.clauses == other.clauses
    }
}

impl Eq for CnfFormula {}

impl CnfFormula {
    pub fn new(n_vars: usize, clauses: Vec<Clause>) -> Result<Self, CnfError> {
        for (i, c) in clauses.iter().enumerate() {
            if let Some(v) = c.vars().find(|v| v.index() >= n_vars) {
                return Err(CnfError::VarOutOfRange {
                    clause: i,
                    var: v,
                    n_vars,
                });
            }
        }
        Ok(CnfFormula {
            n_vars,
            clauses,
            label: None,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn clause(&self, i: usize) -> &Clause {
        &self.clauses[i]
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    /// The same formula without clause `index`.
    pub fn without_clause(&self, index: usize) -> CnfFormula {
        let mut clauses = self.clauses.clone();
        clauses.remove(index);
        CnfFormula {
            n_vars: self.n_vars,
            clauses,
            label: None,
        }
    }

    /// Evaluates the formula where variable `v` takes bit `v` of `bits`.
    pub fn eval_bits(&self, bits: u64) -> bool {
        self.clauses
            .iter()
            .all(|c| c.satisfied_by(|v| bits >> v.0 & 1 == 1))
    }
}

/// Bijection between pigeonhole variables `P_ij` (pigeon `i ∈ 1..=n+1`,
/// hole `j ∈ 1..=n`) and variable ids, numbered row-major:
/// `P_ij ↦ (i-1)·n + (j-1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PigeonMap {
    n: usize,
}

#[derive(Serialize, Deserialize)]
struct MapEntry {
    pigeon: usize,
    hole: usize,
    dimacs: u64,
}

#[derive(Serialize, Deserialize)]
struct MapFile {
    n: usize,
    vars: Vec<MapEntry>,
}

impl PigeonMap {
    pub fn new(n: usize) -> Self {
        PigeonMap { n }
    }

    pub fn holes(&self) -> usize {
        self.n
    }

    pub fn pigeons(&self) -> usize {
        self.n + 1
    }

    pub fn n_vars(&self) -> usize {
        self.n * (self.n + 1)
    }

    /// Variable `P_{pigeon,hole}` (both 1-based).
    pub fn var(&self, pigeon: usize, hole: usize) -> VarId {
        debug_assert!((1..=self.pigeons()).contains(&pigeon) && (1..=self.n).contains(&hole));
        VarId(((pigeon - 1) * self.n + (hole - 1)) as u32)
    }

    /// `(pigeon, hole)` of a variable, or `None` outside the universe.
    pub fn coords(&self, var: VarId) -> Option<(usize, usize)> {
        let v = var.index();
        (v < self.n_vars()).then(|| (v / self.n + 1, v % self.n + 1))
    }

    pub fn to_json(&self) -> String {
        let mut vars = Vec::with_capacity(self.n_vars());
        for pigeon in 1..=self.pigeons() {
            for hole in 1..=self.n {
                vars.push(MapEntry {
                    pigeon,
                    hole,
                    dimacs: self.var(pigeon, hole).0 as u64 + 1,
                });
            }
        }
        let mut s = serde_json::to_string(&MapFile { n: self.n, vars }).expect("map serializes");
        s.push('\n');
        s
    }

    /// Parses a sidecar file. Only the default row-major numbering is
    /// accepted.
    pub fn from_json(text: &str) -> Result<Self, CnfError> {
        let file: MapFile = serde_json::from_str(text)?;
        if file.n == 0 {
            return Err(CnfError::BadMap("n must be positive".into()));
        }
        let map = PigeonMap::new(file.n);
        if file.vars.len() != map.n_vars() {
            return Err(CnfError::BadMap(format!(
                "expected {} entries, found {}",
                map.n_vars(),
                file.vars.len()
            )));
        }
        let mut seen = vec![false; map.n_vars()];
        for e in &file.vars {
            if !(1..=map.pigeons()).contains(&e.pigeon) || !(1..=map.n).contains(&e.hole) {
                return Err(CnfError::BadMap(format!(
                    "P_({},{}) out of range",
                    e.pigeon, e.hole
                )));
            }
            let v = map.var(e.pigeon, e.hole);
            if e.dimacs != v.0 as u64 + 1 {
                return Err(CnfError::BadMap(format!(
                    "P_({},{}) mapped to {}, expected {}",
                    e.pigeon,
                    e.hole,
                    e.dimacs,
                    v.0 + 1
                )));
            }
            if std::mem::replace(&mut seen[v.index()], true) {
                return Err(CnfError::BadMap(format!(
                    "P_({},{}) listed twice",
                    e.pigeon, e.hole
                )));
            }
        }
        Ok(map)
    }
}

/// Number of positive clauses in `PHP_n`; they occupy indices `0..n+1`.
pub fn php_positive_count(n: usize) -> usize {
    n + 1
}

/// `PHP_n = PC_n ∧ NC_n`. The `n + 1` positive clauses come first, then the
/// negative clauses `¬P_ik ∨ ¬P_jk` enumerated by hole `k`, then `i < j`.
pub fn gen_php(n: usize) -> Result<(CnfFormula, PigeonMap), CnfError> {
    if n < 1 {
        return Err(CnfError::InvalidSize(n));
    }
    let map = PigeonMap::new(n);
    let mut clauses = positive_rows(&map, map.pigeons());
    for k in 1..=n {
        for i in 1..=n + 1 {
            for j in i + 1..=n + 1 {
                clauses.push(Clause {
                    lits: vec![Literal::neg(map.var(i, k)), Literal::neg(map.var(j, k))],
                });
            }
        }
    }
    let f = CnfFormula::new(map.n_vars(), clauses)?.with_label(format!("PHP_{n}"));
    Ok((f, map))
}

/// The first `n` positive clauses of `PHP_n`, over the full `PHP_n` universe.
pub fn gen_pc_star(n: usize) -> Result<CnfFormula, CnfError> {
    if n < 1 {
        return Err(CnfError::InvalidSize(n));
    }
    let map = PigeonMap::new(n);
    Ok(CnfFormula::new(map.n_vars(), positive_rows(&map, n))?.with_label(format!("PC*_{n}")))
}

fn positive_rows(map: &PigeonMap, rows: usize) -> Vec<Clause> {
    (1..=rows)
        .map(|i| Clause {
            lits: (1..=map.holes())
                .map(|j| Literal::pos(map.var(i, j)))
                .collect(),
        })
        .collect()
}

/// Parses DIMACS CNF. Accepts LF or CRLF, `c` comment lines, and clauses
/// spanning several lines. A `c label: …` comment sets the formula label.
pub fn parse_dimacs(text: &str) -> Result<CnfFormula, CnfError> {
    let err = |line: usize, msg: String| CnfError::Parse { line, msg };
    let mut header: Option<(usize, usize)> = None;
    let mut label = None;
    let mut clauses = Vec::new();
    let mut pending: Vec<Literal> = Vec::new();
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        last_line = lineno;
        let line = raw.trim_end_matches('\r').trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('c') {
            if rest.is_empty() || rest.starts_with(char::is_whitespace) {
                if let Some(l) = rest.trim().strip_prefix("label:") {
                    label = Some(l.trim().to_string());
                }
                continue;
            }
        }
        if line.starts_with('%') {
            break;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(err(lineno, "duplicate header".into()));
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let parsed = match fields.as_slice() {
                ["p", "cnf", v, c] => v.parse::<usize>().ok().zip(c.parse::<usize>().ok()),
                _ => None,
            };
            header = Some(parsed.ok_or_else(|| err(lineno, format!("malformed header `{line}`")))?);
            continue;
        }
        let (n_vars, _) =
            header.ok_or_else(|| err(lineno, "clause before `p cnf` header".into()))?;
        for tok in line.split_whitespace() {
            let x: i64 = tok
                .parse()
                .map_err(|_| err(lineno, format!("bad literal `{tok}`")))?;
            if x == 0 {
                if pending.is_empty() {
                    return Err(err(lineno, "empty clause".into()));
                }
                let clause = Clause::new(pending.drain(..)).map_err(|v| {
                    err(
                        lineno,
                        format!("tautological clause on variable {}", v.0 + 1),
                    )
                })?;
                clauses.push(clause);
                continue;
            }
            let v = x.unsigned_abs();
            if v as usize > n_vars {
                return Err(err(
                    lineno,
                    format!("literal {x} exceeds the declared {n_vars} variables"),
                ));
            }
            let var = VarId((v - 1) as u32);
            pending.push(if x > 0 {
                Literal::pos(var)
            } else {
                Literal::neg(var)
            });
        }
    }
    let (n_vars, n_clauses) =
        header.ok_or_else(|| err(last_line.max(1), "missing `p cnf` header".into()))?;
    if !pending.is_empty() {
        return Err(err(
            last_line,
            "last clause is missing its 0 terminator".into(),
        ));
    }
    if clauses.len() != n_clauses {
        return Err(err(
            last_line,
            format!(
                "header declares {n_clauses} clauses, found {}",
                clauses.len()
            ),
        ));
    }
    let mut f = CnfFormula::new(n_vars, clauses)?;
    f.label = label;
    Ok(f)
}

pub fn write_dimacs(f: &CnfFormula) -> String {
    let mut out = String::new();
    if let Some(label) = &f.label {
        writeln!(out, "c label: {label}").unwrap();
    }
    writeln!(out, "p cnf {} {}", f.n_vars, f.clauses.len()).unwrap();
    for c in &f.clauses {
        for l in &c.lits {
            write!(out, "{} ", l.to_dimacs()).unwrap();
        }
        out.push_str("0\n");
    }
    out
}

/// OBDD of a clause: a chain with one node per literal.
pub fn clause_to_bdd(c: &Clause, store: &mut NodeStore) -> Result<NodeRef, BddError> {
    if c.is_empty() {
        log::warn!("empty clause mapped to the FALSE terminal");
        return Ok(NodeRef::FALSE);
    }
    let mut lits: Vec<(usize, Literal)> = Vec::with_capacity(c.len());
    for l in c.literals() {
        let level = store
            .order()
            .level(l.var)
            .ok_or(BddError::UnknownVar(l.var))?;
        lits.push((level, *l));
    }
    lits.sort_unstable_by_key(|l| std::cmp::Reverse(l.0));
    let mut acc = NodeRef::FALSE;
    for (_, l) in lits {
        acc = if l.positive {
            store.make_node(l.var, acc, NodeRef::TRUE)?
        } else {
            store.make_node(l.var, NodeRef::TRUE, acc)?
        };
    }
    Ok(acc)
}

/// Conjunction of all clauses, folded left to right.
pub fn formula_to_bdd(f: &CnfFormula, store: &mut NodeStore) -> Result<NodeRef, BddError> {
    let mut acc = NodeRef::TRUE;
    for c in f.clauses() {
        let b = clause_to_bdd(c, store)?;
        acc = store.and(acc, b)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bdd::Assignment;
    use crate::order::VarOrder;

    #[test]
    fn php_counts() {
        for n in 1..=6 {
            let (f, map) = gen_php(n).unwrap();
            assert_eq!(f.n_vars(), n * (n + 1));
            assert_eq!(f.len(), (n + 1) + n * n * (n + 1) / 2);
            for v in 0..map.n_vars() as u32 {
                let (i, j) = map.coords(VarId(v)).unwrap();
                assert_eq!(map.var(i, j), VarId(v));
            }
        }
        assert!(matches!(gen_php(0), Err(CnfError::InvalidSize(0))));
        assert!(matches!(gen_pc_star(0), Err(CnfError::InvalidSize(0))));
    }

    #[test]
    fn php1_clauses() {
        let (f, _) = gen_php(1).unwrap();
        let text = write_dimacs(&f);
        assert_eq!(text, "c label: PHP_1\np cnf 2 3\n1 0\n2 0\n-1 -2 0\n");
    }

    #[test]
    fn php2_shape() {
        let (f, map) = gen_php(2).unwrap();
        assert_eq!(f.len(), 9);
        assert!(f.clauses()[..3]
            .iter()
            .all(|c| c.len() == 2 && c.literals().iter().all(|l| l.positive)));
        assert!(f.clauses()[3..]
            .iter()
            .all(|c| c.len() == 2 && c.literals().iter().all(|l| !l.positive)));
        // hole 1 first, pigeons (1,2),(1,3),(2,3)
        assert_eq!(
            f.clause(3).literals(),
            &[Literal::neg(map.var(1, 1)), Literal::neg(map.var(2, 1))]
        );
        assert_eq!(
            f.clause(5).literals(),
            &[Literal::neg(map.var(2, 1)), Literal::neg(map.var(3, 1))]
        );
        assert_eq!(
            f.clause(6).literals(),
            &[Literal::neg(map.var(1, 2)), Literal::neg(map.var(2, 2))]
        );
    }

    #[test]
    fn pc_star_is_prefix() {
        for n in 1..=5 {
            let (php, _) = gen_php(n).unwrap();
            let pc = gen_pc_star(n).unwrap();
            assert_eq!(pc.len(), n);
            assert_eq!(pc.n_vars(), php.n_vars());
            assert_eq!(pc.clauses(), &php.clauses()[..n]);
        }
    }

    #[test]
    fn dimacs_parse_basics() {
        let f = parse_dimacs("p cnf 2 1\n1 -2 0\n").unwrap();
        assert_eq!(f.n_vars(), 2);
        assert_eq!(
            f.clause(0).literals(),
            &[Literal::pos(VarId(0)), Literal::neg(VarId(1))]
        );
        let crlf = parse_dimacs("c hello\r\np cnf 3 2\r\n1 2\r\n 3 0 -1\r\n0\r\n").unwrap();
        assert_eq!(crlf.len(), 2);
        assert_eq!(crlf.clause(0).len(), 3);
        let dup = parse_dimacs("p cnf 2 1\n1 1 -2 0\n").unwrap();
        assert_eq!(dup.clause(0).len(), 2);
    }

    #[test]
    fn dimacs_errors_carry_lines() {
        let line_of = |text: &str| match parse_dimacs(text) {
            Err(CnfError::Parse { line, .. }) => line,
            other => panic!("expected parse error, got {other:?}"),
        };
        assert_eq!(line_of("p cnf 1 1\n2 0\n"), 2);
        assert_eq!(line_of("p cnf x 1\n"), 1);
        assert_eq!(line_of("p cnf 2 1\n1 2\n"), 2);
        assert_eq!(line_of("p cnf 2 1\nc x\n0\n"), 3);
        assert_eq!(line_of("p cnf 2 1\n1 -1 0\n"), 2);
        assert_eq!(line_of("1 0\n"), 1);
        assert_eq!(line_of("p cnf 2 2\n1 0\n"), 2);
    }

    #[test]
    fn dimacs_round_trip_php() {
        let (f, _) = gen_php(3).unwrap();
        let text = write_dimacs(&f);
        let g = parse_dimacs(&text).unwrap();
        assert_eq!(f, g);
        assert_eq!(g.label(), Some("PHP_3"));
        assert_eq!(write_dimacs(&g), text);
    }

    #[test]
    fn pigeon_map_json() {
        let map = PigeonMap::new(2);
        let text = map.to_json();
        assert!(text.starts_with(r#"{"n":2,"vars":[{"pigeon":1,"hole":1,"dimacs":1}"#));
        assert_eq!(PigeonMap::from_json(&text).unwrap(), map);
        let bad = text.replace(r#""dimacs":1}"#, r#""dimacs":2}"#);
        assert!(PigeonMap::from_json(&bad).is_err());
    }

    #[test]
    fn clause_chain_is_reduced() {
        let mut s = NodeStore::new(VarOrder::random(6, 3));
        let c = Clause::new([
            Literal::pos(VarId(4)),
            Literal::neg(VarId(1)),
            Literal::pos(VarId(0)),
        ])
        .unwrap();
        let b = clause_to_bdd(&c, &mut s).unwrap();
        assert_eq!(s.size(b).unwrap(), 3);
        for bits in 0..64u64 {
            let a = Assignment::from_bits(bits, 6);
            let want = c.satisfied_by(|v| bits >> v.0 & 1 == 1);
            assert_eq!(s.evaluate(b, &a).unwrap(), want);
        }
        let x0 = clause_to_bdd(&Clause::new([Literal::pos(VarId(0))]).unwrap(), &mut s).unwrap();
        assert_eq!(x0, s.literal(VarId(0), true).unwrap());
        assert_eq!(
            clause_to_bdd(&Clause::new([]).unwrap(), &mut s).unwrap(),
            NodeRef::FALSE
        );
    }

    #[test]
    fn tautology_rejected() {
        assert_eq!(
            Clause::new([Literal::pos(VarId(1)), Literal::neg(VarId(1))]),
            Err(VarId(1))
        );
    }
}
