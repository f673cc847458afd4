//! Gauss–Legendre quadrature.

use std::f64::consts::PI;

use num_complex::Complex64;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "need at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..(n + 1) / 2 {
            // Tricomi initial guess, then Newton on P_n
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Integral of `f` over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, w * half))
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    (p1, nf * (x * p1 - p0) / (x * x - 1.0))
}

/// Adaptive complex line integral of `f(z)` along `z = path(s)`, `s` in `[0, 1]`,
/// with `dz = path'(s) ds` supplied by `dpath`.
///
/// Each panel is accepted when a 10-point rule and its two halves agree to
/// `tol` (absolute). Returns the integral and the accumulated error estimate.
pub fn adaptive_path_integral<P, D, F>(path: P, dpath: D, mut f: F, tol: f64) -> (Complex64, f64)
where
    P: Fn(f64) -> Complex64,
    D: Fn(f64) -> Complex64,
    F: FnMut(Complex64) -> Complex64,
{
    let gl = GaussLegendre::new(10);
    let panel = |a: f64, b: f64, f: &mut F| -> Complex64 {
        gl.mapped(a, b)
            .map(|(s, w)| f(path(s)) * dpath(s) * w)
            .sum()
    };
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    let mut stack = vec![(0.0f64, 1.0f64, 0usize)];
    while let Some((a, b, depth)) = stack.pop() {
        let whole = panel(a, b, &mut f);
        let m = 0.5 * (a + b);
        let left = panel(a, m, &mut f);
        let right = panel(m, b, &mut f);
        let diff = (left + right - whole).norm();
        let local_tol = tol * (b - a);
        if diff <= local_tol || depth >= 40 {
            total += left + right;
            err += diff;
        } else {
            stack.push((m, b, depth + 1));
            stack.push((a, m, depth + 1));
        }
    }
    (total, err)
}
