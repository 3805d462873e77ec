//! Composite Simpson quadrature with node doubling.

use crate::error::{invalid, Result};

/// Composite Simpson rule on `[a, b]` with `intervals` sub-intervals
/// (rounded up to an even number).
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals.max(2).next_multiple_of(2);
    if a == b {
        return 0.0;
    }
    let h = (b - a) / n as f64;
    let mut odd = 0.0;
    let mut even = 0.0;
    for k in 1..n {
        let x = a + k as f64 * h;
        if k % 2 == 1 {
            odd += f(x);
        } else {
            even += f(x);
        }
    }
    h / 3.0 * (f(a) + 4.0 * odd + 2.0 * even + f(b))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimpsonSettings {
    /// Number of nodes of the first pass (odd, at least 3).
    pub min_nodes: usize,
    /// Stop once the relative change under node doubling is below this.
    pub rel_tol: f64,
    /// Hard cap on nodes.
    pub max_nodes: usize,
}

impl Default for SimpsonSettings {
    fn default() -> Self {
        Self {
            min_nodes: 1001,
            rel_tol: 1e-8,
            max_nodes: 1 << 22,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub nodes: usize,
    /// |I_n - I_{n/2}| / |I_n| of the last doubling.
    pub rel_change: f64,
}

/// Integrates with at least `min_nodes` nodes and keeps doubling the node
/// count until the relative change drops below `rel_tol`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    settings: SimpsonSettings,
) -> Result<Integral> {
    if settings.min_nodes < 3 || !(settings.rel_tol.is_finite() && settings.rel_tol > 0.0) {
        return Err(invalid(
            "quadrature needs at least three nodes and a positive tolerance",
        ));
    }
    let mut intervals = (settings.min_nodes - 1).next_multiple_of(2);
    let mut prev = simpson(&f, a, b, intervals);
    loop {
        intervals *= 2;
        let cur = simpson(&f, a, b, intervals);
        let scale = cur.abs().max(f64::MIN_POSITIVE);
        let rel_change = if cur == prev {
            0.0
        } else {
            (cur - prev).abs() / scale
        };
        if rel_change <= settings.rel_tol || intervals + 1 >= settings.max_nodes {
            return Ok(Integral {
                value: cur,
                nodes: intervals + 1,
                rel_change,
            });
        }
        prev = cur;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_is_exact_for_cubics() {
        let v = simpson(|x| x * x * x - 2.0 * x + 1.0, 0.0, 2.0, 2);
        assert!((v - 2.0).abs() < 1e-14);
    }

    #[test]
    fn converges_on_exponential() {
        let r = integrate(|x: f64| x.exp(), 0.0, 1.0, SimpsonSettings::default()).unwrap();
        assert!((r.value - (1f64.exp() - 1.0)).abs() < 1e-12);
        assert!(r.nodes >= 1001);
        assert!(r.rel_change <= 1e-8);
    }

    #[test]
    fn zero_integrand() {
        let r = integrate(|_| 0.0, 0.0, 1.0, SimpsonSettings::default()).unwrap();
        assert_eq!(r.value, 0.0);
    }
}
