//! Deterministic fork-join helpers.
//!
//! Work is split into a fixed number of chunks that depends only on the
//! input length, never on the worker count, and chunk results are combined
//! in chunk order. Results are therefore bit-identical whether the map runs
//! on one thread or many, and the `DECOMPOUND_THREADS` environment variable
//! can cap workers without changing any output.

use std::sync::OnceLock;

/// Chunks per parallel map. Fixed so that floating-point accumulation order
/// does not depend on the machine.
const CHUNKS: usize = 8;

fn env_thread_cap() -> Option<usize> {
    std::env::var("DECOMPOUND_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Worker threads to use: `DECOMPOUND_THREADS` if set, otherwise all cores.
pub fn max_threads() -> usize {
    static CAP: OnceLock<usize> = OnceLock::new();
    *CAP.get_or_init(|| {
        env_thread_cap().unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
    })
}

/// Contiguous chunk ranges covering `0..len`.
fn chunk_ranges(len: usize) -> Vec<std::ops::Range<usize>> {
    let chunks = CHUNKS.min(len).max(1);
    let base = len / chunks;
    let extra = len % chunks;
    let mut ranges = Vec::with_capacity(chunks);
    let mut start = 0;
    for i in 0..chunks {
        let size = base + usize::from(i < extra);
        ranges.push(start..start + size);
        start += size;
    }
    ranges
}

/// Map `f` over fixed chunks of `items` and return the per-chunk results in
/// chunk order. `f` receives the chunk's slice and its starting index.
pub fn chunked_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&[T], usize) -> R + Sync,
{
    let ranges = chunk_ranges(items.len());
    #[cfg(target_arch = "wasm32")]
    {
        return ranges
            .into_iter()
            .map(|r| f(&items[r.clone()], r.start))
            .collect();
    }
    #[cfg(not(target_arch = "wasm32"))]
    {
        if max_threads() <= 1 || ranges.len() <= 1 {
            return ranges
                .into_iter()
                .map(|r| f(&items[r.clone()], r.start))
                .collect();
        }
        let next = std::sync::atomic::AtomicUsize::new(0);
        let (tx, rx) = std::sync::mpsc::channel::<(usize, R)>();
        let workers = max_threads().min(ranges.len());
        std::thread::scope(|scope| {
            for _ in 0..workers {
                let tx = tx.clone();
                let next = &next;
                let ranges = &ranges;
                let f = &f;
                scope.spawn(move || loop {
                    let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                    if i >= ranges.len() {
                        break;
                    }
                    let r = ranges[i].clone();
                    let value = f(&items[r.clone()], r.start);
                    if tx.send((i, value)).is_err() {
                        break;
                    }
                });
            }
        });
        drop(tx);
        let mut results: Vec<Option<R>> = Vec::new();
        results.resize_with(ranges.len(), || None);
        for (i, value) in rx {
            results[i] = Some(value);
        }
        results
            .into_iter()
            .map(|r| r.expect("chunk completed"))
            .collect()
    }
}
