//! Composite Gauss–Legendre quadrature on logarithmic panels.

use std::f64::consts::PI;

/// Nodes and weights of the `n`-point rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `P_n(x)` and `P_n'(x)` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// `∫_lo^hi g(r) dr` with the substitution `r = e^s`, split into
/// `panels_per_decade` panels per factor of ten.
pub fn integrate_log_panels<F>(g: F, lo: f64, hi: f64, panels_per_decade: usize, order: usize) -> f64
where
    F: Fn(f64) -> f64,
{
    assert!(lo > 0.0 && hi > lo);
    let (nodes, weights) = gauss_legendre(order);
    let (s0, s1) = (lo.ln(), hi.ln());
    let decades = (hi / lo).log10();
    let panels = ((decades * panels_per_decade as f64).ceil() as usize).max(1);
    let width = (s1 - s0) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let a = s0 + p as f64 * width;
        let mid = a + 0.5 * width;
        let mut acc = 0.0;
        for (x, w) in nodes.iter().zip(&weights) {
            let s = mid + 0.5 * width * x;
            let r = s.exp();
            acc += w * g(r) * r;
        }
        total += 0.5 * width * acc;
    }
    total
}
