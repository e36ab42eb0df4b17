//! Radial cutoff profiles χ(r): 0 near the origin, 1 far out.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Cutoff {
    /// Classical exp-bump transition: χ = 0 for r ≤ r_lo, χ = 1 for r ≥ r_hi.
    Bump { r_lo: f64, r_hi: f64 },
    /// χ(r) = P(order, r²/scale²), the regularized lower incomplete gamma
    /// function. Vanishes like r^{2·order} at the origin and approaches 1
    /// faster than any power; its transition is wide enough to be resolved
    /// by spectral grids of spacing ~ scale/6.
    Gamma { order: u32, scale: f64 },
}

impl Default for Cutoff {
    fn default() -> Self {
        Cutoff::Gamma { order: 12, scale: 1.5 }
    }
}

impl Cutoff {
    /// Compactly supported smooth transition on [1, 2].
    pub fn unit_bump() -> Self {
        Cutoff::Bump { r_lo: 1.0, r_hi: 2.0 }
    }

    pub fn value(&self, r: f64) -> f64 {
        self.eval3(r)[0]
    }

    /// `[χ, χ', χ'']` at radius `r`.
    pub fn eval3(&self, r: f64) -> [f64; 3] {
        match *self {
            Cutoff::Bump { r_lo, r_hi } => bump3(r, r_lo, r_hi),
            Cutoff::Gamma { order, scale } => gamma3(r, order, scale),
        }
    }

    /// Radius beyond which χ = 1 and its derivatives vanish to double precision.
    pub fn outer_radius(&self) -> f64 {
        match *self {
            Cutoff::Bump { r_hi, .. } => r_hi,
            Cutoff::Gamma { order, scale } => {
                let mut s = order as f64;
                while upper_gamma_q(order, s) > 1e-18 || dp_ds(order, s) * s > 1e-18 {
                    s += 0.05;
                }
                scale * s.sqrt()
            }
        }
    }

    /// Radius below which χ is negligible (< 1e-18).
    pub fn inner_radius(&self) -> f64 {
        match *self {
            Cutoff::Bump { r_lo, .. } => r_lo,
            Cutoff::Gamma { order, scale } => {
                let mut s = order as f64;
                while s > 0.0 && lower_gamma_p(order, s) > 1e-18 {
                    s -= 0.01;
                }
                scale * s.max(0.0).sqrt()
            }
        }
    }
}

fn bump3(r: f64, lo: f64, hi: f64) -> [f64; 3] {
    if r <= lo {
        return [0.0, 0.0, 0.0];
    }
    if r >= hi {
        return [1.0, 0.0, 0.0];
    }
    let w = hi - lo;
    let s = (r - lo) / w;
    // χ = 1/(1+e^q), q = 1/s − 1/(1−s)
    let q = 1.0 / s - 1.0 / (1.0 - s);
    let q1 = -1.0 / (s * s) - 1.0 / ((1.0 - s) * (1.0 - s));
    let q2 = 2.0 / (s * s * s) - 2.0 / ((1.0 - s).powi(3));
    let e = (-q.abs()).exp();
    let chi = if q > 0.0 { e / (1.0 + e) } else { 1.0 / (1.0 + e) };
    let c1m = e / ((1.0 + e) * (1.0 + e)); // χ(1−χ)
    let d1 = -c1m * q1;
    let d2 = -((1.0 - 2.0 * chi) * d1 * q1 + c1m * q2);
    [chi, d1 / w, d2 / (w * w)]
}

fn ln_factorial(n: u32) -> f64 {
    (1..=n).map(|i| (i as f64).ln()).sum()
}

/// P(K, s) for integer K.
fn lower_gamma_p(k: u32, s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    if s < k as f64 {
        // e^{-s} Σ_{i≥K} s^i/i!
        let mut term = (-s + k as f64 * s.ln() - ln_factorial(k)).exp();
        let mut sum = 0.0;
        let mut i = k;
        while term > 1e-300 && term > sum * 1e-18 {
            sum += term;
            i += 1;
            term *= s / i as f64;
        }
        sum
    } else {
        1.0 - upper_gamma_q(k, s)
    }
}

/// Q(K, s) = e^{-s} Σ_{i<K} s^i/i!.
fn upper_gamma_q(k: u32, s: f64) -> f64 {
    if s < k as f64 {
        return 1.0 - lower_gamma_p(k, s);
    }
    let mut term = (-s).exp();
    let mut sum = 0.0;
    for i in 0..k {
        if i > 0 {
            term *= s / i as f64;
        }
        sum += term;
    }
    sum
}

/// dP/ds = e^{-s} s^{K-1}/(K-1)!.
fn dp_ds(k: u32, s: f64) -> f64 {
    if s <= 0.0 {
        return if k == 1 { 1.0 } else { 0.0 };
    }
    (-s + (k as f64 - 1.0) * s.ln() - ln_factorial(k - 1)).exp()
}

fn gamma3(r: f64, k: u32, scale: f64) -> [f64; 3] {
    let s = (r / scale).powi(2);
    let chi = lower_gamma_p(k, s);
    let ds = 2.0 * r / (scale * scale);
    let p1 = dp_ds(k, s);
    // d²P/ds² = e^{-s} s^{K-2} ((K-1) - s)/(K-1)!
    let p2 = if s > 0.0 && k >= 2 {
        (-s + (k as f64 - 2.0) * s.ln() - ln_factorial(k - 1)).exp() * ((k as f64 - 1.0) - s)
    } else if k == 2 {
        1.0
    } else {
        0.0
    };
    [chi, p1 * ds, p2 * ds * ds + p1 * 2.0 / (scale * scale)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateaus() {
        let c = Cutoff::unit_bump();
        assert_eq!(c.value(0.5), 0.0);
        assert_eq!(c.value(3.0), 1.0);
        let g = Cutoff::default();
        assert!(g.value(0.3) < 1e-20);
        assert!((1.0 - g.value(g.outer_radius())).abs() < 1e-17);
    }

    #[test]
    fn derivatives_match_differences() {
        for c in [Cutoff::unit_bump(), Cutoff::default(), Cutoff::Gamma { order: 3, scale: 1.0 }] {
            for &r in &[1.2, 1.5, 1.8, 3.0, 4.5, 6.0] {
                let h = 1e-5;
                let [v, d1, d2] = c.eval3(r);
                let [vp, d1p, _] = c.eval3(r + h);
                let [vm, d1m, _] = c.eval3(r - h);
                assert!((d1 - (vp - vm) / (2.0 * h)).abs() < 1e-7 * (1.0 + d1.abs()), "{c:?} {r}");
                assert!((d2 - (d1p - d1m) / (2.0 * h)).abs() < 1e-6 * (1.0 + d2.abs()), "{c:?} {r}");
                assert!((0.0..=1.0).contains(&v));
            }
        }
    }
}
