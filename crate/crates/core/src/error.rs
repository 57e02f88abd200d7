use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("qubit count mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{n} qubits exceeds the dense-rendering cap of {cap}")]
    QubitCapExceeded { n: usize, cap: usize },

    #[error("operator is not Hermitian (residual {residual:e})")]
    NonHermitian { residual: f64 },

    #[error("cannot parse `{input}`: {reason}")]
    Parse { input: String, reason: String },

    #[error("invalid stabilizer group: {0}")]
    InvalidStabilizerGroup(String),

    #[error("invalid logical flip: {0}")]
    InvalidFlip(String),

    #[error("invalid logical basis: {0}")]
    InvalidBasis(String),

    #[error("complementary decomposition not applicable: {0}")]
    DecompositionNotApplicable(String),

    #[error("no symbol mapped for operator {operator} on party {party}")]
    UnmappedOperator { party: usize, operator: String },

    #[error("symbol {symbol} of party {party} is not bound to an observable")]
    UnboundSymbol { party: usize, symbol: String },

    #[error(
        "{symbols} symbols exceed the exact enumeration budget of {max}; \
         use the sampled lower bound instead (non-exact)"
    )]
    SymbolBudgetExceeded { symbols: usize, max: usize },

    #[error("directions are parallel or antiparallel; the relation is undefined")]
    ParallelDirections,

    #[error("malformed SOS certificate: {0}")]
    MalformedCertificate(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown case `{0}`")]
    UnknownCase(String),

    #[error("recipe error: {0}")]
    Recipe(String),
}

impl Error {
    pub(crate) fn parse(input: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Parse {
            input: input.into(),
            reason: reason.into(),
        }
    }
}
