//! Worker pool sizing from `FASOPT_WORKERS`.

use rayon::{ThreadPool, ThreadPoolBuilder};

use crate::HarnessError;

pub const WORKERS_ENV: &str = "FASOPT_WORKERS";

/// Parses a worker count; `None` means "use every core".
pub fn parse_workers(value: Option<&str>) -> Result<Option<usize>, HarnessError> {
    match value {
        None => Ok(None),
        Some(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(HarnessError::Workers(format!("expected a positive integer, found `{v}`"))),
        },
    }
}

/// Pool capped by `FASOPT_WORKERS` when set.
pub fn worker_pool() -> Result<ThreadPool, HarnessError> {
    let requested = parse_workers(std::env::var(WORKERS_ENV).ok().as_deref())?;
    let mut builder = ThreadPoolBuilder::new();
    if let Some(n) = requested {
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| HarnessError::Workers(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worker_counts() {
        assert_eq!(parse_workers(None).unwrap(), None);
        assert_eq!(parse_workers(Some("3")).unwrap(), Some(3));
        assert!(parse_workers(Some("0")).is_err());
        assert!(parse_workers(Some("many")).is_err());
    }
}
