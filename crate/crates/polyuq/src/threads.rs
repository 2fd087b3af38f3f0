//! A scoped thread-pool executor for the estimator sample loops. Workers
//! pull chunk indices from a shared counter; results land in their chunk
//! slot, so the reduction order (and therefore every floating-point sum)
//! is identical for any thread count.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

use polyuq_core::exec::Executor;

#[derive(Debug, Clone, Copy)]
pub struct ThreadPool {
    threads: usize,
}

impl ThreadPool {
    pub fn new(threads: usize) -> Self {
        Self {
            threads: threads.max(1),
        }
    }

    pub fn threads(&self) -> usize {
        self.threads
    }
}

impl Executor for ThreadPool {
    fn map_chunks<T: Send>(&self, n_chunks: usize, f: &(dyn Fn(usize) -> T + Sync)) -> Vec<T> {
        if self.threads == 1 || n_chunks <= 1 {
            return (0..n_chunks).map(f).collect();
        }
        let next = AtomicUsize::new(0);
        let (tx, rx) = mpsc::channel::<(usize, T)>();
        let mut slots: Vec<Option<T>> = (0..n_chunks).map(|_| None).collect();
        std::thread::scope(|scope| {
            for _ in 0..self.threads.min(n_chunks) {
                let tx = tx.clone();
                let next = &next;
                scope.spawn(move || loop {
                    let c = next.fetch_add(1, Ordering::Relaxed);
                    if c >= n_chunks {
                        break;
                    }
                    if tx.send((c, f(c))).is_err() {
                        break;
                    }
                });
            }
            drop(tx);
            for (c, v) in rx {
                slots[c] = Some(v);
            }
        });
        slots
            .into_iter()
            .map(|s| s.expect("every chunk was computed"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunk_order_is_preserved() {
        let pool = ThreadPool::new(8);
        let out = pool.map_chunks(100, &|c| c * c);
        for (c, v) in out.iter().enumerate() {
            assert_eq!(*v, c * c);
        }
    }

    #[test]
    fn single_thread_matches_sequential() {
        use polyuq_core::exec::Sequential;
        let pool = ThreadPool::new(1);
        let a = pool.map_chunks(17, &|c| (c as f64).sqrt());
        let b = Sequential.map_chunks(17, &|c| (c as f64).sqrt());
        assert_eq!(a, b);
    }
}
