//! Exit statuses and the error type that carries them.

use std::fmt;

use schwarz_stab::Error;

pub const EXIT_OK: u8 = 0;
/// A non-conditional verdict failed.
pub const EXIT_VERDICT: u8 = 1;
/// Malformed or invalid configuration, input files or arguments.
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_UNWRITABLE: u8 = 3;
/// Rasterization or solver failure.
pub const EXIT_NUMERICS: u8 = 4;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

pub type Outcome<T> = std::result::Result<T, Failure>;

impl Failure {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Domain(_) | Error::EmptyRasterization { .. } | Error::NotConverged { .. } => EXIT_NUMERICS,
        _ => EXIT_CONFIG,
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::new(exit_code(&e), e.to_string())
    }
}
