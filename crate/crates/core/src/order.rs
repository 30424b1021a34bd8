//! Variable orders.
//!
//! A [`VarOrder`] is a permutation of the variable universe: `vars()[p]` is
//! the variable queried at level `p`. Every [`NodeStore`](crate::NodeStore)
//! is built for exactly one order.

use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cnf::PigeonMap;
use crate::error::OrderError;

/// Identifier of a propositional variable. DIMACS variable `k` is `VarId(k - 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VarId(pub u32);

impl VarId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// Where an order came from. Only used for reporting.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderProvenance {
    RowMajor,
    ColumnMajor,
    Random(u64),
    Explicit,
}

impl fmt::Display for OrderProvenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrderProvenance::RowMajor => f.write_str("row-major"),
            OrderProvenance::ColumnMajor => f.write_str("column-major"),
            OrderProvenance::Random(seed) => write!(f, "random:{seed}"),
            OrderProvenance::Explicit => f.write_str("explicit"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarOrder {
    vars: Vec<VarId>,
    levels: Vec<u32>,
    provenance: OrderProvenance,
}

impl VarOrder {
    /// Validates `vars` as a permutation of `0..vars.len()`.
    pub fn explicit(vars: Vec<VarId>) -> Result<Self, OrderError> {
        Self::with_provenance(vars, OrderProvenance::Explicit)
    }

    fn with_provenance(vars: Vec<VarId>, provenance: OrderProvenance) -> Result<Self, OrderError> {
        let n = vars.len();
        let mut levels = vec![u32::MAX; n];
        for (level, v) in vars.iter().enumerate() {
            if v.index() >= n {
                return Err(OrderError::OutOfRange { var: *v, n_vars: n });
            }
            if levels[v.index()] != u32::MAX {
                return Err(OrderError::Duplicate { var: *v });
            }
            levels[v.index()] = level as u32;
        }
        Ok(VarOrder {
            vars,
            levels,
            provenance,
        })
    }

    /// The identity order: variable `i` at level `i`. For pigeonhole formulas
    /// with the default numbering this reads the variable matrix row by row.
    pub fn row_major(n_vars: usize) -> Self {
        let vars = (0..n_vars as u32).map(VarId).collect();
        Self::with_provenance(vars, OrderProvenance::RowMajor).expect("identity is a permutation")
    }

    /// Reads the pigeonhole matrix hole by hole: `P_1j, P_2j, …, P_{n+1,j}` for `j = 1..n`.
    pub fn column_major(map: &PigeonMap) -> Self {
        let mut vars = Vec::with_capacity(map.n_vars());
        for hole in 1..=map.holes() {
            for pigeon in 1..=map.pigeons() {
                vars.push(map.var(pigeon, hole));
            }
        }
        Self::with_provenance(vars, OrderProvenance::ColumnMajor)
            .expect("column-major enumeration is a permutation")
    }

    /// Uniform random permutation, reproducible from `seed`.
    pub fn random(n_vars: usize, seed: u64) -> Self {
        let mut vars: Vec<VarId> = (0..n_vars as u32).map(VarId).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        vars.shuffle(&mut rng);
        Self::with_provenance(vars, OrderProvenance::Random(seed))
            .expect("shuffle is a permutation")
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    /// Variables from first-queried to last-queried.
    pub fn vars(&self) -> &[VarId] {
        &self.vars
    }

    pub fn var_at(&self, level: usize) -> VarId {
        self.vars[level]
    }

    /// Level of `var`, or `None` if it is outside the universe.
    pub fn level(&self, var: VarId) -> Option<usize> {
        self.levels.get(var.index()).map(|&l| l as usize)
    }

    pub fn provenance(&self) -> &OrderProvenance {
        &self.provenance
    }

    /// `a ≺ b`.
    pub fn precedes(&self, a: VarId, b: VarId) -> bool {
        self.levels[a.index()] < self.levels[b.index()]
    }
}

impl fmt::Display for VarOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.provenance)
    }
}
