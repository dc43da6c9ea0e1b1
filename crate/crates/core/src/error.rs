use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("no patterns given: at least one target or spurious record is required")]
    EmptyInput,
    #[error("payload {payload} at position {position} does not fit in {bits} bits")]
    PayloadOverflow {
        position: usize,
        payload: u64,
        bits: u32,
    },
    #[error("{register} width {bits} is outside the supported range {min}..={max}")]
    BitWidth {
        register: &'static str,
        bits: u32,
        min: u32,
        max: u32,
    },
    #[error("index {index} out of range for database of {len} records")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("feature {feature} does not fit in {bits} bits")]
    FeatureOutOfRange { feature: u64, bits: u32 },
    #[error("feature {feature} is a reserved sentinel code")]
    SentinelFeature { feature: u64 },
    #[error("alpha {alpha} is not below d_max = {d_max}")]
    AlphaTooLarge { alpha: u64, d_max: u64 },
    #[error("state needs {total_bits} qubits, simulation cap is {cap}")]
    SimulationCap { total_bits: u32, cap: u32 },
    #[error("register layout does not match the database")]
    LayoutMismatch,
    #[error("state has weight {leak:e} outside the ancilla-zero manifold")]
    AncillaNotClean { leak: f64 },
    #[error("state is not normalized (norm {norm})")]
    Unnormalized { norm: f64 },
    #[error("lambda {0} must lie strictly between 1 and 4/3")]
    InvalidLambda(f64),
    #[error("cap factor {0} must be positive")]
    InvalidCapFactor(f64),
}
