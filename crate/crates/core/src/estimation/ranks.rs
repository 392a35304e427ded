//! Ranks, pseudo-observations and rank statistics.

/// Average ranks (1-based) of `x`; ties share the mean of their positions.
pub(crate) fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i + 1;
        while j < idx.len() && x[idx[j]] == x[idx[i]] {
            j += 1;
        }
        let r = (i + j + 1) as f64 / 2.0;
        for &k in &idx[i..j] {
            ranks[k] = r;
        }
        i = j;
    }
    ranks
}

/// Dense integer ranks starting at 1; ties share a rank.
pub(crate) fn dense_ranks(x: &[f64]) -> (Vec<usize>, usize) {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0; x.len()];
    let mut r = 0;
    for (pos, &k) in idx.iter().enumerate() {
        if pos == 0 || x[k] != x[idx[pos - 1]] {
            r += 1;
        }
        ranks[k] = r;
    }
    (ranks, r)
}

/// Rescaled ranks `R_i / (n + 1)` of one column.
pub fn pseudo_observations_column(x: &[f64]) -> Vec<f64> {
    let scale = (x.len() + 1) as f64;
    average_ranks(x).into_iter().map(|r| r / scale).collect()
}

/// Column-wise pseudo-observations of a sample of `d`-vectors.
pub fn pseudo_observations(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = rows.first().map_or(0, Vec::len);
    let cols: Vec<Vec<f64>> = (0..d)
        .map(|j| pseudo_observations_column(&rows.iter().map(|r| r[j]).collect::<Vec<_>>()))
        .collect();
    (0..rows.len()).map(|i| cols.iter().map(|c| c[i]).collect()).collect()
}

/// Binary indexed tree over counts at positions `1..=n`.
pub(crate) struct Fenwick {
    tree: Vec<u64>,
}

impl Fenwick {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            tree: vec![0; n + 1],
        }
    }

    pub(crate) fn add(&mut self, mut i: usize, by: u64) {
        while i < self.tree.len() {
            self.tree[i] += by;
            i += i & i.wrapping_neg();
        }
    }

    /// Sum over positions `1..=i`.
    pub(crate) fn prefix(&self, mut i: usize) -> u64 {
        let mut s = 0;
        while i > 0 {
            s += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        s
    }
}

/// For each `i`, the number of `j` (including `i`) with `x_j <= x_i` and
/// `y_j <= y_i`.
pub(crate) fn lower_orthant_counts(x: &[f64], y: &[f64]) -> Vec<u64> {
    let (ry, m) = dense_ranks(y);
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut bit = Fenwick::new(m);
    let mut counts = vec![0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i + 1;
        while j < idx.len() && x[idx[j]] == x[idx[i]] {
            j += 1;
        }
        for &k in &idx[i..j] {
            bit.add(ry[k], 1);
        }
        for &k in &idx[i..j] {
            counts[k] = bit.prefix(ry[k]);
        }
        i = j;
    }
    counts
}

/// Sample Kendall tau, `(concordant - discordant) / (n choose 2)`, with
/// tied pairs counting as neither. O(n log n).
pub fn kendall_tau_sample(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len());
    if n < 2 {
        return 0.0;
    }
    let (ry, m) = dense_ranks(&y[..n]);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut bit = Fenwick::new(m);
    let (mut conc, mut disc) = (0u64, 0u64);
    let mut seen = 0u64;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && x[idx[j]] == x[idx[i]] {
            j += 1;
        }
        for &k in &idx[i..j] {
            conc += bit.prefix(ry[k] - 1);
            disc += seen - bit.prefix(ry[k]);
        }
        for &k in &idx[i..j] {
            bit.add(ry[k], 1);
        }
        seen += (j - i) as u64;
        i = j;
    }
    let pairs = (n as f64) * (n as f64 - 1.0) / 2.0;
    (conc as f64 - disc as f64) / pairs
}
