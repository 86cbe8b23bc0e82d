use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("cannot place {count} points in {width_m} x {height_m} m with separation {min_separation_m} m")]
    Capacity {
        count: usize,
        width_m: f64,
        height_m: f64,
        min_separation_m: f64,
    },
    #[error("singular channel: condition number {0:.3e}")]
    SingularChannel(f64),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("too many failed trials: {failed} of {total}")]
    TooManyFailures { failed: usize, total: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
