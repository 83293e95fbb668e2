use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    Domain(String),

    #[error("rasterization of the domain at h = {h} produced no cells")]
    EmptyRasterization { h: f64 },

    #[error("invalid field: {0}")]
    Field(String),

    #[error("expression error at offset {offset}: {message}")]
    Expr { offset: usize, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("fields live on different grids")]
    FrameMismatch,

    #[error("conjugate gradient stopped after {iterations} iterations with relative residual {residual:e}")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("instance is inadmissible: {0}")]
    Inadmissible(String),

    #[error("grid file: {0}")]
    GridFile(String),
}
