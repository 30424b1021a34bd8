use thiserror::Error;

use crate::order::VarId;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrderError {
    #[error("variable {var} out of range for a universe of {n_vars} variables")]
    OutOfRange { var: VarId, n_vars: usize },
    #[error("variable {var} appears twice in the order")]
    Duplicate { var: VarId },
    #[error("order covers {got} variables, formula has {expected}")]
    WrongLength { expected: usize, got: usize },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BddError {
    #[error("node belongs to store #{found}, expected store #{expected}")]
    StoreMismatch { expected: u32, found: u32 },
    #[error("dangling node handle {0}")]
    InvalidNode(u32),
    #[error("variable {0} is not declared in this store")]
    UnknownVar(VarId),
    #[error("ordering violation: child variable {child} does not come after {var}")]
    OrderingViolation { var: VarId, child: VarId },
    #[error("assignment leaves {0} unassigned")]
    PartialAssignment(VarId),
    #[error("node budget of {0} nodes exhausted")]
    NodeBudgetExceeded(usize),
    #[error("universe of {universe} variables is smaller than the support ({support})")]
    UniverseTooSmall { universe: usize, support: usize },
}

#[derive(Debug, Error)]
pub enum CnfError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("pigeonhole instances need n >= 1, got {0}")]
    InvalidSize(usize),
    #[error("clause {clause} is tautological on {var}")]
    Tautology { clause: usize, var: VarId },
    #[error("clause {clause} mentions {var}, outside a universe of {n_vars} variables")]
    VarOutOfRange {
        clause: usize,
        var: VarId,
        n_vars: usize,
    },
    #[error("clause {0} is empty")]
    EmptyClause(usize),
    #[error("malformed pigeon map: {0}")]
    BadMap(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScheduleError {
    #[error("step {step}: references step {target}, which is not strictly earlier")]
    ForwardReference { step: usize, target: usize },
    #[error("step {step}: join of a step with itself")]
    SelfJoin { step: usize },
    #[error("step {step}: clause index {clause} out of range ({n_clauses} clauses)")]
    BadClause {
        step: usize,
        clause: usize,
        n_clauses: usize,
    },
    #[error("step {step}: variable {var} out of range")]
    BadVar { step: usize, var: VarId },
    #[error("step {step}: projection used but projection is disabled")]
    ProjectionDisabled { step: usize },
    #[error("schedule is empty")]
    Empty,
    #[error("schedule kind `random` needs a seed")]
    MissingSeed,
    #[error("unknown schedule kind `{0}`")]
    UnknownKind(String),
    #[error("schedule kind `{0}` needs projection enabled")]
    NeedsProjection(String),
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error(transparent)]
    Bdd(#[from] BddError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BoundsError {
    #[error("coloring is unbalanced: {white} white vs {black} black entries")]
    Unbalanced { white: usize, black: usize },
    #[error("matrix must be square and nonempty")]
    BadMatrix,
    #[error("window parameter a={a} outside (1/|R|, 1/2] for |R|={r}")]
    BadWindowParameter { a: String, r: usize },
    #[error("set sequence is empty")]
    EmptySequence,
    #[error("last set of the sequence differs from C")]
    LastIsNotC,
    #[error("R is not a subset of C")]
    RNotInC,
    #[error("entry {0} is neither empty, a singleton, nor a union of two earlier entries")]
    Discipline(usize),
    #[error("no index in the window: preconditions do not hold")]
    NotFound,
    #[error("|R| = {0}, the row/column window needs |R| > 4")]
    TooFewRows(usize),
    #[error("window search needs a join-only trace (step {0} is a projection)")]
    ProjectionInTrace(usize),
    #[error("certificate: {0}")]
    BadCertificate(String),
    #[error("brute force infeasible: {0}")]
    Infeasible(String),
    #[error("greedy construction did not reach {target} selections")]
    ConstructionFailed { target: usize },
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error(transparent)]
    Bdd(#[from] BddError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{got} variables exceeds the oracle limit of {limit}")]
    TooManyVars { got: usize, limit: usize },
    #[error("truth table length {got} is not 2^{n_vars}")]
    BadLength { n_vars: usize, got: usize },
    #[error(transparent)]
    Bdd(#[from] BddError),
}
