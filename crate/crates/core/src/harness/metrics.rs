//! Efficiency, entropy and throughput.

/// Shannon binary entropy in bits, with `h(0) = h(1) = 0`.
pub fn binary_entropy(e: f64) -> f64 {
    if e <= 0.0 || e >= 1.0 {
        return 0.0;
    }
    -e * e.log2() - (1.0 - e) * (1.0 - e).log2()
}

/// Reconciliation efficiency `(m - p) / ((n - p - s) h(e))`.
///
/// With `p = s = 0` this is the plain `(1 - R0) / h(e)`. Returns `None`
/// outside the domain (`n - p - s <= 0`, `p > m`, or `e` outside `(0, 0.5)`).
pub fn efficiency(m: usize, n: usize, p: usize, s: usize, e: f64) -> Option<f64> {
    if p + s >= n || p > m || !(e > 0.0 && e <= 0.5) {
        return None;
    }
    Some((m - p) as f64 / ((n - p - s) as f64 * binary_entropy(e)))
}

/// Reconciled key bits per second: `successes (n - p0) / t`.
pub fn throughput(successes: usize, n: usize, p0: usize, seconds: f64) -> f64 {
    if successes == 0 {
        return 0.0;
    }
    successes as f64 * n.saturating_sub(p0) as f64 / seconds
}
