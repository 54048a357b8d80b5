use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CfracError {
    #[error("fraction {m}/{q} is outside 0 < q < m")]
    OutOfRange { m: String, q: String },
    #[error("fraction {m}/{q} is not reduced")]
    NotCoprime { m: String, q: String },
    #[error("empty chain")]
    EmptyChain,
    #[error("chain entry {value} at position {index} is below 2")]
    EntryTooSmall { index: usize, value: i64 },
    #[error("({n},{a}) is not a Wahl pair")]
    BadWahlPair { n: String, a: String },
    #[error("recurrence seed delta={delta}, a={a}, k={k} needs delta >= 2, 0 < a < delta coprime, k >= 2")]
    BadRecurrenceSeed { delta: String, a: String, k: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SurfaceError {
    #[error("unknown curve '{0}'")]
    UnknownCurve(String),
    #[error("duplicate curve label '{0}'")]
    DuplicateLabel(String),
    #[error("curve '{0}' lies in a singularity mark")]
    CurveInMark(String),
    #[error("a curve cannot meet itself through the intersection map ('{0}')")]
    SelfMeet(String),
    #[error("blow-up at an inconsistent point: {0}")]
    InconsistentPoint(String),
    #[error("curve '{0}' is not a smooth rational (-1)-curve")]
    NotMinusOne(String),
    #[error("the model has {0} invariant violation(s)")]
    Invalid(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UnsupportedFlip {
    #[error("E- meets no singularity mark")]
    NoMark,
    #[error("E- meets {0} marks (k2A-type neighbourhood)")]
    SeveralMarks(usize),
    #[error("E- meets the interior curve '{0}' of its chain")]
    InteriorAttachment(String),
    #[error("E- meets the chain with total multiplicity {0}")]
    MultipleIntersection(u32),
    #[error("chain {chain} read from the attachment end has r = {r} leading 2s and last entry {last}, outside the frequent-case dichotomy")]
    Dichotomy { chain: String, r: usize, last: i64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MmpError {
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error("K-pairing of '{curve}' is {k}, not negative")]
    NotKNegative { curve: String, k: String },
    #[error("not a frequent-case flip; requires the general algorithm (out of scope): {0}")]
    Unsupported(UnsupportedFlip),
    #[error("not a W-blow-down of the supported combinatorial type: {0}")]
    NotWBlowDown(String),
    #[error("flip identity failed: {0}")]
    Identity(String),
    #[error("canonical contraction: {0}")]
    Canonical(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LedgerError {
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error("negative coefficient {alpha} on '{curve}'")]
    NegativeCoefficient { curve: String, alpha: i64 },
    #[error("K-pairing of E+ '{0}' is zero")]
    ZeroKPairing(String),
    #[error("ledger invariant broken after {step}: {what} cached {cached}, recomputed {actual}")]
    Invariant {
        step: String,
        what: &'static str,
        cached: String,
        actual: String,
    },
    #[error("plane report: {0}")]
    Plane(String),
}
