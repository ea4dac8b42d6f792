//! Parallel map over batch items with results kept in index order.

use rayon::prelude::*;

use crate::CliError;

pub const THREADS_VAR: &str = "ENTLAB_THREADS";

/// Thread count from `ENTLAB_THREADS`; unset or `0` means automatic.
pub fn threads_from_env() -> Result<usize, CliError> {
    match std::env::var(THREADS_VAR) {
        Err(_) => Ok(0),
        Ok(s) if s.trim().is_empty() => Ok(0),
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| CliError::input(format!("{THREADS_VAR}={s} is not a nonnegative integer"))),
    }
}

/// Applies `f` to `0..n` on a pool of `threads` workers (`0` = automatic).
/// The output order, and so every report built from it, is independent of
/// the thread count.
pub fn run_indexed<T, F>(n: usize, threads: usize, f: F) -> Result<Vec<T>, CliError>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::input(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| (0..n as u64).into_par_iter().map(&f).collect()))
}
