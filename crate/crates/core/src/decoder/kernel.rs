//! Node update kernels shared by both decoders.

/// Check-node update for one check.
///
/// Writes `sign * 2 atanh(prod_{e' != e} tanh(v2c[e'] / 2))` to `c2v[e]`,
/// where `sign` is `-1` when the syndrome bit is 1. Products excluding each
/// edge come from prefix and suffix products, so a zero incoming message
/// (a punctured bit in the first iteration) zeroes the others exactly instead
/// of dividing by zero.
#[inline]
pub(super) fn check_update(v2c: &[f64], c2v: &mut [f64], syndrome_bit: u8, llr_max: f64, scratch: &mut Vec<f64>) {
    let d = v2c.len();
    scratch.clear();
    scratch.extend(v2c.iter().map(|&m| (0.5 * m).tanh()));
    let sign = if syndrome_bit == 0 { 1.0 } else { -1.0 };
    // c2v doubles as the prefix product buffer.
    let mut prefix = 1.0;
    for k in 0..d {
        c2v[k] = prefix;
        prefix *= scratch[k];
    }
    let mut suffix = 1.0;
    for k in (0..d).rev() {
        let excl = c2v[k] * suffix;
        suffix *= scratch[k];
        c2v[k] = (sign * 2.0 * excl.atanh()).clamp(-llr_max, llr_max);
    }
}

/// Sum of `c2v` over the given edges, in edge order, starting from zero.
#[inline]
pub(super) fn incoming_sum(c2v: &[f64], edges: &[u32]) -> f64 {
    edges.iter().fold(0.0, |acc, &e| acc + c2v[e as usize])
}

/// Variable-node update: `v2c[e] = total - c2v[e]`, saturated.
#[inline]
pub(super) fn variable_update(total: f64, c2v: &[f64], v2c: &mut [f64], edges: &[u32], llr_max: f64) {
    for &e in edges {
        let e = e as usize;
        v2c[e] = (total - c2v[e]).clamp(-llr_max, llr_max);
    }
}

/// Hard decision; a zero soft value decides 0.
#[inline]
pub(super) fn decide(soft: f64) -> u8 {
    u8::from(soft < 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(v2c: &[f64], z: u8) -> Vec<f64> {
        let mut out = vec![0.0; v2c.len()];
        check_update(v2c, &mut out, z, 30.0, &mut Vec::new());
        out
    }

    #[test]
    fn degree_two_passes_message_through() {
        let out = run(&[2.0, 2.0], 0);
        assert!((out[0] - 2.0).abs() < 1e-12);
        let out = run(&[2.0, 2.0], 1);
        assert!((out[0] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn degree_three_value() {
        let out = run(&[2.0, 2.0, 2.0], 0);
        let expected = 2.0 * (1.0f64.tanh() * 1.0f64.tanh()).atanh();
        assert!((out[0] - expected).abs() < 1e-12);
        assert!((out[0] - 1.325_002_747_357_864).abs() < 1e-12);
    }

    #[test]
    fn dead_check_wipes_messages() {
        let out = run(&[0.0, 0.0, 2.2, -2.2], 1);
        assert!(out.iter().all(|&m| m == 0.0));
        // one punctured neighbour: only that edge hears anything
        let out = run(&[0.0, 2.2, 2.2], 0);
        assert!(out[0] > 0.0 && out[1] == 0.0 && out[2] == 0.0);
    }

    #[test]
    fn saturated_inputs_stay_finite() {
        let out = run(&[30.0, 30.0, -30.0], 0);
        assert!(out.iter().all(|m| m.is_finite() && m.abs() <= 30.0));
        // tanh(15) is 1 - 2e-13, so two saturated inputs give roughly 29.3
        assert!(out[2] > 29.0 && out[2] <= 30.0);
        assert!(out[0] < -29.0 && out[0] >= -30.0);
    }
}
