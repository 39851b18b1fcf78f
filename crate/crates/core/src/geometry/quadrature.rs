//! Gauss-Legendre rules on intervals and collapsed (Duffy) product rules on
//! triangles.

use std::f64::consts::PI;

/// Nodes and weights of the `k`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(k: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(k >= 1, "at least one node");
    let mut nodes = vec![0.0; k];
    let mut weights = vec![0.0; k];
    let m = k.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_k.
        let mut x = (PI * (i as f64 + 0.75) / (k as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(k, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(k, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[k - 1 - i] = x;
        weights[i] = w;
        weights[k - 1 - i] = w;
    }
    if k % 2 == 1 {
        nodes[k / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(k: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for j in 1..k {
        let p2 = ((2 * j + 1) as f64 * x * p1 - j as f64 * p0) / (j + 1) as f64;
        p0 = p1;
        p1 = p2;
    }
    let p = if k == 0 { 1.0 } else { p1 };
    let prev = if k == 0 { 0.0 } else { p0 };
    let d = k as f64 * (x * p - prev) / (x * x - 1.0);
    (p, d)
}

/// Number of Gauss points that integrate polynomials of `degree` exactly.
pub fn points_for_degree(degree: usize) -> usize {
    (degree + 1).div_ceil(2).max(1)
}

/// Gauss-Legendre rule on `[0, 1]` exact to `degree`.
pub fn interval_rule(degree: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(points_for_degree(degree));
    x.into_iter()
        .zip(w)
        .map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w))
        .collect()
}

/// Rule on the reference triangle `{(s, t) : s, t >= 0, s + t <= 1}` exact
/// for polynomials of total degree `degree`.
///
/// Collapsed product of Gauss rules: `(s, t) = (a, b (1 - a))` with
/// Jacobian `1 - a`, which raises the degree in `a` by one.
pub fn triangle_rule(degree: usize) -> Vec<([f64; 2], f64)> {
    let line = interval_rule(degree + 1);
    let mut rule = Vec::with_capacity(line.len() * line.len());
    for &(a, wa) in &line {
        for &(b, wb) in &line {
            rule.push(([a, b * (1.0 - a)], wa * wb * (1.0 - a)));
        }
    }
    rule
}
