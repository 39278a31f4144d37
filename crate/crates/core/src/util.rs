//! Small shared helpers.

/// Runs `f(0..count)` and collects the results in index order. With
/// `threads > 1` the index range is chunked over scoped threads; every
/// result is written to its own slot, so the output does not depend on the
/// thread count or scheduling.
pub fn parallel_for_each_indexed<T, F>(count: usize, threads: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    if threads <= 1 || count <= 1 {
        return (0..count).map(f).collect();
    }
    let chunk = count.div_ceil(threads.min(count));
    let mut results: Vec<Option<T>> = (0..count).map(|_| None).collect();
    std::thread::scope(|scope| {
        for (t, slots) in results.chunks_mut(chunk).enumerate() {
            let f = &f;
            scope.spawn(move || {
                for (k, slot) in slots.iter_mut().enumerate() {
                    *slot = Some(f(t * chunk + k));
                }
            });
        }
    });
    results
        .into_iter()
        .map(|r| r.expect("every index produced a result"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequential_and_parallel_agree() {
        let seq = parallel_for_each_indexed(17, 1, |i| i * i);
        let par = parallel_for_each_indexed(17, 4, |i| i * i);
        assert_eq!(seq, par);
    }

    #[test]
    fn empty_range() {
        let out: Vec<usize> = parallel_for_each_indexed(0, 4, |i| i);
        assert!(out.is_empty());
    }
}
