use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite samples in input")]
    NonFiniteInput,

    #[error("invalid exponent: {0}")]
    InvalidExponent(String),

    #[error("singular multiplier: |xi|^s with s={s} requires a mean-zero input")]
    SingularMultiplier { s: f64 },

    #[error("band (j={j}, k={k}) outside the resolvable frequency range (xi_max={xi_max})")]
    BandOutOfRange { j: i32, k: i64, xi_max: f64 },

    #[error("dilation by {lambda} loses mass: {detail}")]
    Truncation { lambda: f64, detail: String },

    #[error("spectrum not contained in the stated ball of radius {radius} (outside mass fraction {fraction:.3e})")]
    SpectrumNotContained { radius: f64, fraction: f64 },

    #[error("grid cannot resolve scale j={j_min}: {detail}")]
    Resolution { j_min: i32, detail: String },

    #[error("decomposition witness fails reconstruction: relative error {rel_err:.3e}")]
    WitnessReconstruction { rel_err: f64 },

    #[error("non-uniform time grid is unsupported")]
    NonUniformTimes,

    #[error("fewer than {needed} scale points for a slope fit (got {got})")]
    InsufficientFitPoints { needed: usize, got: usize },

    #[error("parameter out of the theorem regime: {0}")]
    OutOfTheorem(String),

    #[error("Picard iteration does not contract (last ratios: {ratios:?})")]
    NoContraction { ratios: Vec<f64> },

    #[error("solution blow-up or NaN at iteration {iter}")]
    Blowup { iter: usize },

    #[error("integrator instability: norm grew by {factor:.2e} in one step")]
    Instability { factor: f64 },

    #[error("exponent split identities fail for m={m}, p={p}")]
    SplitIdentity { m: i64, p: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("format error: {0}")]
    Format(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}
