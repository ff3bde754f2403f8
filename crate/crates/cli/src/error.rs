use mixed_mops::geronimus::GeronimusError;
use mixed_mops::jacobi_pineiro::JpError;
use mixed_mops::kernels::KernelError;
use mixed_mops::measures::MeasureError;
use mixed_mops::mops::MopsError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("measure error: {0}")]
    Measure(String),
    #[error("singular: {0}")]
    Singular(String),
    #[error("computation failed: {0}")]
    Compute(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Measure(_) => 2,
            CliError::Singular(_) => 3,
            CliError::Compute(_) | CliError::Io(_) => 1,
        }
    }
}

impl From<MeasureError> for CliError {
    fn from(e: MeasureError) -> Self {
        CliError::Measure(e.to_string())
    }
}

impl From<MopsError> for CliError {
    fn from(e: MopsError) -> Self {
        match e {
            MopsError::SingularMinor(_) => CliError::Singular(e.to_string()),
            MopsError::Measure(m) => m.into(),
            e => CliError::Compute(e.to_string()),
        }
    }
}

impl From<KernelError> for CliError {
    fn from(e: KernelError) -> Self {
        match e {
            KernelError::Measure(m) => m.into(),
            KernelError::Mops(m) => m.into(),
            KernelError::OnSupport(_) | KernelError::EigenvalueAtZ(_) => CliError::Config(e.to_string()),
            e => CliError::Compute(e.to_string()),
        }
    }
}

impl From<GeronimusError> for CliError {
    fn from(e: GeronimusError) -> Self {
        match e {
            GeronimusError::TauZero { .. } | GeronimusError::SingularSystem { .. } => CliError::Singular(e.to_string()),
            GeronimusError::Measure(m) => m.into(),
            GeronimusError::Mops(m) => m.into(),
            GeronimusError::Kernel(k) => k.into(),
            GeronimusError::ChainDefect(_) | GeronimusError::EigenvalueArgument(_) | GeronimusError::MatPoly(_) => {
                CliError::Config(e.to_string())
            }
            e => CliError::Compute(e.to_string()),
        }
    }
}

impl From<JpError> for CliError {
    fn from(e: JpError) -> Self {
        match e {
            JpError::AtViolation(_) | JpError::ParameterRange(_) => CliError::Measure(e.to_string()),
            JpError::Geronimus(g) => g.into(),
            JpError::Measure(m) => m.into(),
            JpError::Mops(m) => m.into(),
            e => CliError::Compute(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
