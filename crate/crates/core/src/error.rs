use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("[0:0] is not a point of the projective line")]
    ZeroPair,
    #[error("unstable configuration")]
    Unstable,
    #[error("indeterminate product 0*inf")]
    Indeterminate,
    #[error("singular projective transformation")]
    Singular,
    #[error("target is not a reordering of the source quadruple")]
    NotAPermutation,
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("l = {0} is below the stability threshold")]
    TooFewMarks(usize),
    #[error("no edge {0:?}")]
    NoSuchEdge((usize, usize)),
    #[error("no vertex {0}")]
    NoSuchVertex(usize),
    #[error("marks must be distinct")]
    RepeatedMarks,
    #[error("tree is not real")]
    NotReal,
    #[error("{0} is not a label of the index set")]
    NotALabel(String),
    #[error("bullet {0} is not defined here")]
    InvalidBullet(String),
    #[error("marking map is not systematic")]
    NotSystematic,
    #[error("point outside the chart domain near the stratum of {0}")]
    ChartDomain(String),
    #[error("vertex {0} is not in V_Gamma(rho*)")]
    NotInVGamma(usize),
    #[error("bound {0} too small to sample distinct special points")]
    BoundTooSmall(i64),
    #[error("keep set too small or not conjugation-closed")]
    KeepTooSmall,
    #[error("chart transition outside its domain")]
    OutOfDomain,
    #[error("invalid blowup point: {0}")]
    InvalidPoint(String),
}

pub type Result<T> = std::result::Result<T, Error>;
