use std::fmt;
use std::path::PathBuf;

use armlqr_core::Error as CoreError;

/// Failure category. Each maps to a process exit code and a stable prefix on
/// the one-line error report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Validation,
    Unreachable,
    Singular,
    Synthesis,
    Diverged,
    Io,
}

impl Category {
    pub fn exit_code(self) -> i32 {
        match self {
            Category::Validation => 2,
            Category::Unreachable | Category::Singular => 3,
            Category::Synthesis | Category::Diverged => 4,
            Category::Io => 5,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Validation => "validation",
            Category::Unreachable => "unreachable",
            Category::Singular => "singular",
            Category::Synthesis => "synthesis",
            Category::Diverged => "diverged",
            Category::Io => "io",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("{0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Encode(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn category(&self) -> Category {
        match self {
            CliError::Core(e) => match e {
                CoreError::Unreachable { .. } => Category::Unreachable,
                CoreError::SingularTarget | CoreError::SingularInertia { .. } => Category::Singular,
                CoreError::NoStabilizingSolution(_) => Category::Synthesis,
                CoreError::Diverged { .. } => Category::Diverged,
                CoreError::NonPositiveDimension { .. }
                | CoreError::MassMismatch { .. }
                | CoreError::NonFinite(_)
                | CoreError::InvalidWeights(_)
                | CoreError::InvalidConfig(_) => Category::Validation,
            },
            CliError::Config(_) => Category::Validation,
            CliError::Io { .. } | CliError::Encode(_) => Category::Io,
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.category().exit_code()
    }

    /// `error[<category>]: <message>` on a single line.
    pub fn report(&self) -> String {
        let msg = self.to_string().replace(['\n', '\r'], " ");
        format!("error[{}]: {}", self.category(), msg)
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_by_category() {
        let cases = [
            (
                CoreError::Unreachable {
                    distance: 1.0,
                    min: 0.0,
                    max: 0.3,
                },
                3,
                "unreachable",
            ),
            (CoreError::SingularTarget, 3, "singular"),
            (CoreError::SingularInertia { condition: 1e13 }, 3, "singular"),
            (CoreError::NoStabilizingSolution("test"), 4, "synthesis"),
            (CoreError::Diverged { time: 1.0 }, 4, "diverged"),
            (CoreError::InvalidWeights("R"), 2, "validation"),
            (CoreError::MassMismatch { sum: 1.0, total: 2.0 }, 2, "validation"),
        ];
        for (e, code, prefix) in cases {
            let e = CliError::from(e);
            assert_eq!(e.exit_code(), code);
            assert!(e.report().starts_with(&format!("error[{prefix}]: ")), "{}", e.report());
        }
        let io = CliError::io("x", std::io::Error::new(std::io::ErrorKind::NotFound, "gone\nreally"));
        assert_eq!(io.exit_code(), 5);
        assert_eq!(io.report().lines().count(), 1);
    }
}
