use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("at {context}: {source}")]
    Numeric {
        context: String,
        #[source]
        source: fasuav_core::Error,
    },

    #[error("{0}")]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Validation(String),
}

impl CliError {
    pub fn numeric(context: impl Into<String>) -> impl FnOnce(fasuav_core::Error) -> CliError {
        let context = context.into();
        move |source| CliError::Numeric { context, source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numeric { .. } => 3,
            CliError::Validation(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
            CliError::Numeric { .. } => "numeric",
            CliError::Validation(_) => "validation",
        }
    }

    /// Single-line report: `error kind=<kind> code=<code>: <detail>`.
    pub fn report(&self) -> String {
        let detail = self.to_string().replace('\n', " ");
        format!("error kind={} code={}: {}", self.kind(), self.exit_code(), detail)
    }
}
