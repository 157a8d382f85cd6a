//! Trial dispatch. With the `parallel` feature and `jobs > 1` trials run on
//! a dedicated rayon pool; otherwise they run in order on the caller's
//! thread. Results always come back indexed by trial.

use crate::error::{Error, Result};

/// Evaluate `f(0..count)` and return the results in index order.
pub fn map_trials<T, F>(count: usize, jobs: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    if jobs == 0 {
        return Err(Error::Usage("jobs must be at least 1".into()));
    }
    if jobs == 1 || count <= 1 {
        return Ok(map_sequential(count, f));
    }
    map_parallel(count, jobs, f)
}

pub fn map_sequential<T, F: Fn(u64) -> T>(count: usize, f: F) -> Vec<T> {
    (0..count as u64).map(f).collect()
}

#[cfg(feature = "parallel")]
fn map_parallel<T, F>(count: usize, jobs: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Resource(format!("thread pool: {e}")))?;
    Ok(pool.install(|| (0..count as u64).into_par_iter().map(&f).collect()))
}

#[cfg(not(feature = "parallel"))]
fn map_parallel<T, F>(count: usize, _jobs: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    log::debug!("built without the parallel feature; running trials sequentially");
    Ok(map_sequential(count, f))
}

/// Run `f(attempt)` until it succeeds, retrying only failures that signal a
/// degenerate draw. Returns the value and the number of redraws.
pub fn with_resample<T>(max_attempts: u32, mut f: impl FnMut(u32) -> Result<T>) -> Result<(T, u32)> {
    let mut last = None;
    for attempt in 0..max_attempts {
        match f(attempt) {
            Ok(v) => return Ok((v, attempt)),
            Err(e) if e.is_resamplable() => {
                log::debug!("attempt {attempt} failed: {e}");
                last = Some(e);
            }
            Err(e) => return Err(e),
        }
    }
    Err(last.unwrap_or_else(|| Error::Usage("max_attempts must be positive".into())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let seq = map_trials(50, 1, |i| i * i).unwrap();
        let par = map_trials(50, 4, |i| i * i).unwrap();
        assert_eq!(seq, par);
        assert_eq!(seq[7], 49);
        assert!(map_trials(3, 0, |i| i).is_err());
    }

    #[test]
    fn resample_policy() {
        let (v, redraws) = with_resample(5, |a| {
            if a < 2 {
                Err(Error::Singular { step: 0, pivot: 0.0 })
            } else {
                Ok(a)
            }
        })
        .unwrap();
        assert_eq!((v, redraws), (2, 2));
        let e = with_resample(5, |_| -> Result<()> { Err(Error::Usage("x".into())) });
        assert!(matches!(e, Err(Error::Usage(_))));
        let e = with_resample(3, |_| -> Result<()> { Err(Error::DegenerateMinor { order: 1 }) });
        assert!(matches!(e, Err(Error::DegenerateMinor { .. })));
    }
}
