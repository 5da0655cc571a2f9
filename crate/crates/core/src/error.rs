use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("{0} is not a prime below 2^31")]
    NotPrime(u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("linear system has no solution")]
    NoSolution,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("polynomial rings support at most {max} variables, got {got}")]
    TooManyVariables { max: usize, got: usize },
    #[error("exponent overflow in monomial (exponents are limited to 255)")]
    ExponentOverflow,
    #[error("not homogeneous: {0}")]
    NotHomogeneous(String),
    #[error("window too small: {0}")]
    WindowTooSmall(String),
    #[error("degree mismatch: expected {expected:?}, found {found:?}")]
    DegreeMismatch { expected: (i32, i32), found: (i32, i32) },
    #[error("perturbation is not a cycle: [d, delta] is nonzero on basis element {witness}")]
    NotACycle { witness: String },
    #[error("perturbation does not square to zero on basis element {witness}")]
    NotSquareZero { witness: String },
    #[error("differential does not square to zero on basis element {witness}")]
    DifferentialNotSquareZero { witness: String },
    #[error("not a chain map on basis element {witness}")]
    NotAChainMap { witness: String },
    #[error("obstruction: no homotopy for multi-index {index:?} at homological degree {hdeg}, internal degree {ideg}")]
    ObstructionFound { index: Vec<u32>, hdeg: i32, ideg: i32 },
    #[error("homotopy system truncated at |H| <= {stored}, but gamma^H is nonzero for |H| = {needed}")]
    TruncationTooSmall { stored: u32, needed: u32 },
    #[error("sequence is not Koszul-regular: H_{hdeg}(E) is nonzero in internal degree {ideg}")]
    NotKoszulRegular { hdeg: i32, ideg: i32 },
    #[error("witness identity fails: {0}")]
    WitnessInvalid(String),
    #[error("annihilator violation: {0}")]
    AnnihilatorViolation(String),
    #[error("ideal membership fails: {0}")]
    NotInIdeal(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("{stage}: {inner}")]
    Stage { stage: String, inner: Box<Error> },
}

impl Error {
    pub fn at_stage(self, stage: &str) -> Self {
        Error::Stage { stage: stage.into(), inner: Box::new(self) }
    }

    /// The error underneath any stage labels.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { inner, .. } => inner.root(),
            e => e,
        }
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &str) -> Result<T> {
        self.map_err(|e| e.at_stage(stage))
    }
}
