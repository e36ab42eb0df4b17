//! Gauss–Legendre rules, Chebyshev–Lobatto nodes and barycentric
//! Lagrange interpolation on them.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on [-1, 1] (Newton on P_n).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        dp = if d != 0.0 { d } else { dp };
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped to [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (
        x.iter().map(|&t| mid + half * t).collect(),
        w.iter().map(|&t| half * t).collect(),
    )
}

/// Chebyshev–Lobatto nodes on [0, t_end], increasing, first node 0.
pub fn chebyshev_lobatto(n: usize, t_end: f64) -> Vec<f64> {
    assert!(n >= 2);
    (0..n)
        .map(|i| {
            let c = (PI * i as f64 / (n - 1) as f64).cos();
            0.5 * t_end * (1.0 - c)
        })
        .collect()
}

/// Barycentric weights for Chebyshev–Lobatto points (ordered as above).
pub fn lobatto_bary_weights(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let s = if i % 2 == 0 { 1.0 } else { -1.0 };
            if i == 0 || i == n - 1 {
                0.5 * s
            } else {
                s
            }
        })
        .collect()
}

/// Barycentric weights `1/Π_{j≠i}(x_i − x_j)` for arbitrary distinct nodes.
pub fn bary_weights(nodes: &[f64]) -> Vec<f64> {
    (0..nodes.len())
        .map(|i| {
            let p: f64 = (0..nodes.len()).filter(|&j| j != i).map(|j| nodes[i] - nodes[j]).product();
            1.0 / p
        })
        .collect()
}

/// Values of all Lagrange basis polynomials at `s`.
pub fn lagrange_basis(nodes: &[f64], bary: &[f64], s: f64) -> Vec<f64> {
    let n = nodes.len();
    let mut out = vec![0.0; n];
    for i in 0..n {
        if s == nodes[i] {
            out[i] = 1.0;
            return out;
        }
    }
    let mut den = 0.0;
    for i in 0..n {
        let q = bary[i] / (s - nodes[i]);
        out[i] = q;
        den += q;
    }
    for v in out.iter_mut() {
        *v /= den;
    }
    out
}

/// Differentiation matrix D with (D f)_i = f'(t_i) for the interpolant on `nodes`.
pub fn differentiation_matrix(nodes: &[f64], bary: &[f64]) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = (bary[j] / bary[i]) / (nodes[i] - nodes[j]);
                d[i][j] = v;
                diag -= v;
            }
        }
        d[i][i] = diag;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_integrates_polynomials() {
        let (x, w) = gauss_legendre(24);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(46)).sum();
        assert!((s - 2.0 / 47.0).abs() < 1e-14);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
    }

    #[test]
    fn lagrange_reproduces_polynomial() {
        let t = chebyshev_lobatto(17, 0.3);
        let b = lobatto_bary_weights(17);
        let f = |s: f64| 1.0 + s - 3.0 * s.powi(7) + s.powi(16);
        let vals: Vec<f64> = t.iter().map(|&s| f(s)).collect();
        let l = lagrange_basis(&t, &b, 0.1234);
        let v: f64 = l.iter().zip(&vals).map(|(a, b)| a * b).sum();
        assert!((v - f(0.1234)).abs() < 1e-12);
        let d = differentiation_matrix(&t, &b);
        let df: f64 = d[5].iter().zip(&vals).map(|(a, b)| a * b).sum();
        let s = t[5];
        let exact = 1.0 - 21.0 * s.powi(6) + 16.0 * s.powi(15);
        assert!((df - exact).abs() < 1e-9);
    }
}
