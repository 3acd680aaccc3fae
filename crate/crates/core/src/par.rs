//! Per-sentence data parallelism. Without the `parallel` feature every
//! mode runs sequentially.

/// How corpus-level maps are executed. Results keep input order either way.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// `items.map(f)` in input order.
    pub fn map<T, U, F>(self, items: &[T], f: F) -> Vec<U>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> U + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                items.par_iter().map(f).collect()
            }
            _ => items.iter().map(f).collect(),
        }
    }

    /// Runs `f` with at most `jobs` worker threads (`None`: one per core).
    /// `Some(1)` and sequential execution run on the calling thread.
    pub fn install<R, F>(self, jobs: Option<usize>, f: F) -> R
    where
        R: Send,
        F: FnOnce() -> R + Send,
    {
        match (self, jobs) {
            #[cfg(feature = "parallel")]
            (Execution::Parallel, Some(n)) if n > 1 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                Ok(pool) => pool.install(f),
                Err(_) => f(),
            },
            _ => f(),
        }
    }

    /// `Sequential` when one job is requested.
    pub fn for_jobs(jobs: Option<usize>) -> Self {
        match jobs {
            Some(n) if n <= 1 => Execution::Sequential,
            _ => Execution::Parallel,
        }
    }
}
