/// Sparse table answering range-minimum queries over grid values in O(1).
#[derive(Debug, Clone)]
pub(crate) struct SparseMin {
    levels: Vec<Vec<f64>>,
}

impl SparseMin {
    pub(crate) fn new(values: &[f64]) -> Self {
        let mut levels = vec![values.to_vec()];
        let mut width = 1;
        while 2 * width <= values.len() {
            let prev = levels.last().unwrap();
            let next: Vec<f64> = (0..=values.len() - 2 * width).map(|i| prev[i].min(prev[i + width])).collect();
            levels.push(next);
            width *= 2;
        }
        SparseMin { levels }
    }

    /// Minimum over indices `lo..=hi`.
    pub(crate) fn min(&self, lo: usize, hi: usize) -> f64 {
        debug_assert!(lo <= hi);
        let level = (usize::BITS - 1 - (hi - lo + 1).leading_zeros()) as usize;
        let row = &self.levels[level];
        row[lo].min(row[hi + 1 - (1 << level)])
    }
}
