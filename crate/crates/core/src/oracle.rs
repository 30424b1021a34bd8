//! Brute-force ground truth for small functions.
//!
//! Nothing in here calls the BDD engine's operations: canonical diagrams are
//! built directly from truth tables by merging equal subtables, then handed
//! to a store through [`NodeStore::import`] when a handle is needed.
//!
//! Assignment encoding is little-endian in the variable id: bit `v` of a row
//! index is the value of variable `v`.

use itertools::Itertools;
use rustc_hash::FxHashMap;

use crate::bdd::{ExportedBdd, NodeRef, NodeStore};
use crate::cnf::CnfFormula;
use crate::error::OracleError;
use crate::order::{VarId, VarOrder};

pub const MAX_TABLE_VARS: usize = 24;
pub const MAX_CANONICAL_VARS: usize = 16;
pub const MAX_ORDER_SEARCH_VARS: usize = 7;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TruthTable {
    n_vars: usize,
    bits: Vec<bool>,
}

impl TruthTable {
    pub fn new(n_vars: usize, bits: Vec<bool>) -> Result<Self, OracleError> {
        if n_vars > MAX_TABLE_VARS {
            return Err(OracleError::TooManyVars {
                got: n_vars,
                limit: MAX_TABLE_VARS,
            });
        }
        if bits.len() != 1 << n_vars {
            return Err(OracleError::BadLength {
                n_vars,
                got: bits.len(),
            });
        }
        Ok(TruthTable { n_vars, bits })
    }

    pub fn from_fn(n_vars: usize, f: impl Fn(u64) -> bool) -> Result<Self, OracleError> {
        if n_vars > MAX_TABLE_VARS {
            return Err(OracleError::TooManyVars {
                got: n_vars,
                limit: MAX_TABLE_VARS,
            });
        }
        Ok(TruthTable {
            n_vars,
            bits: (0..1u64 << n_vars).map(f).collect(),
        })
    }

    /// Table of a function given by the low `2^n_vars` bits of `code`
    /// (only meaningful for `n_vars ≤ 6`).
    pub fn from_code(n_vars: usize, code: u64) -> Self {
        assert!(n_vars <= 6);
        TruthTable {
            n_vars,
            bits: (0..1u64 << n_vars).map(|i| code >> i & 1 == 1).collect(),
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn get(&self, row: u64) -> bool {
        self.bits[row as usize]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

pub fn table_of_cnf(f: &CnfFormula) -> Result<TruthTable, OracleError> {
    TruthTable::from_fn(f.n_vars(), |bits| f.eval_bits(bits))
}

/// Reduced OBDD of `t` under `order`, built by merging equal subtables.
pub fn canonical_export(t: &TruthTable, order: &VarOrder) -> Result<ExportedBdd, OracleError> {
    let n = t.n_vars;
    if n > MAX_CANONICAL_VARS {
        return Err(OracleError::TooManyVars {
            got: n,
            limit: MAX_CANONICAL_VARS,
        });
    }
    assert_eq!(order.len(), n, "order must cover the table's variables");
    // Reindex so the variable at level 0 is the most significant bit.
    let permuted: Vec<bool> = (0..1usize << n)
        .map(|j| {
            let mut row = 0u64;
            for level in 0..n {
                if j >> (n - 1 - level) & 1 == 1 {
                    row |= 1 << order.var_at(level).0;
                }
            }
            t.get(row)
        })
        .collect();
    let mut builder = Builder {
        order,
        memo: FxHashMap::default(),
        unique: FxHashMap::default(),
        nodes: Vec::new(),
    };
    let root = builder.build(0, &permuted);
    Ok(ExportedBdd {
        nodes: builder.nodes,
        root,
    })
}

struct Builder<'a> {
    order: &'a VarOrder,
    memo: FxHashMap<(usize, Vec<bool>), u32>,
    unique: FxHashMap<(VarId, u32, u32), u32>,
    nodes: Vec<(VarId, u32, u32)>,
}

impl Builder<'_> {
    fn build(&mut self, level: usize, sub: &[bool]) -> u32 {
        if sub.iter().all(|&b| !b) {
            return 0;
        }
        if sub.iter().all(|&b| b) {
            return 1;
        }
        let (low, high) = sub.split_at(sub.len() / 2);
        if low == high {
            return self.build(level + 1, low);
        }
        if let Some(&id) = self.memo.get(&(level, sub.to_vec())) {
            return id;
        }
        let lo = self.build(level + 1, low);
        let hi = self.build(level + 1, high);
        let key = (self.order.var_at(level), lo, hi);
        let nodes = &mut self.nodes;
        let id = *self.unique.entry(key).or_insert_with(|| {
            nodes.push(key);
            nodes.len() as u32 + 1
        });
        self.memo.insert((level, sub.to_vec()), id);
        id
    }
}

/// Canonical OBDD of `t` as a handle in `store` (whose order is used).
pub fn canonical_bdd(t: &TruthTable, store: &mut NodeStore) -> Result<NodeRef, OracleError> {
    let e = canonical_export(t, store.order())?;
    Ok(store.import(&e)?)
}

/// Smallest reduced OBDD over all `n!` orders, with one order achieving it.
pub fn min_size_over_orders(t: &TruthTable) -> Result<(usize, VarOrder), OracleError> {
    let n = t.n_vars;
    if n > MAX_ORDER_SEARCH_VARS {
        return Err(OracleError::TooManyVars {
            got: n,
            limit: MAX_ORDER_SEARCH_VARS,
        });
    }
    let mut best: Option<(usize, VarOrder)> = None;
    for perm in (0..n as u32).map(VarId).permutations(n) {
        let order = VarOrder::explicit(perm).expect("permutation");
        let size = canonical_export(t, &order)?.nodes.len();
        if best.as_ref().is_none_or(|(s, _)| size < *s) {
            best = Some((size, order));
        }
    }
    Ok(best.expect("at least one order"))
}
