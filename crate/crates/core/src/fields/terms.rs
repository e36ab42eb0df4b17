//! Asymptotic terms `a(θ)(log r)^l / r^k` and finite sums of them.

use super::grid::Grid;
use crate::angular::{AngularFunction, Axis};
use num_complex::Complex64 as C64;
use std::collections::BTreeMap;

/// Terms whose angular coefficient has max-modulus below this are dropped.
pub const DROP_TOL: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub struct AsymptoticTerm {
    pub k: u32,
    pub l: u32,
    pub a: AngularFunction,
}

impl AsymptoticTerm {
    pub fn new(k: u32, l: u32, a: AngularFunction) -> Self {
        Self { k, l, a }
    }

    /// Value without cutoff at polar point (r, θ).
    pub fn eval_polar(&self, r: f64, theta: f64) -> C64 {
        self.a.eval(theta) * r.ln().powi(self.l as i32) / r.powi(self.k as i32)
    }

    /// `∂_j` of the term, as terms at power k+1.
    pub fn derivative(&self, axis: Axis) -> Vec<AsymptoticTerm> {
        let s = self.k as f64;
        let tb = self.a.mul_theta(axis);
        let mut out = vec![AsymptoticTerm::new(self.k + 1, self.l, self.a.dhat(axis).sub(&tb.scale(s)))];
        if self.l > 0 {
            out.push(AsymptoticTerm::new(self.k + 1, self.l - 1, tb.scale(self.l as f64)));
        }
        out
    }
}

/// A finite sum of terms keyed by (k, l); equal keys are merged.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AsymptoticPart {
    map: BTreeMap<(u32, u32), AngularFunction>,
}

impl FromIterator<AsymptoticTerm> for AsymptoticPart {
    fn from_iter<I: IntoIterator<Item = AsymptoticTerm>>(iter: I) -> Self {
        let mut p = AsymptoticPart::default();
        for t in iter {
            p.push(t);
        }
        p.cleaned()
    }
}

impl AsymptoticPart {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(k: u32, l: u32, a: AngularFunction) -> Self {
        std::iter::once(AsymptoticTerm::new(k, l, a)).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    /// Merge a term into the sum.
    pub fn push(&mut self, t: AsymptoticTerm) {
        self.add_scaled_term(t.k, t.l, &t.a, C64::new(1.0, 0.0));
    }

    pub fn add_scaled_term(&mut self, k: u32, l: u32, a: &AngularFunction, s: C64) {
        match self.map.get_mut(&(k, l)) {
            Some(e) => e.add_scaled(a, s),
            None => {
                self.map.insert((k, l), a.scale(s));
            }
        }
    }

    pub fn get(&self, k: u32, l: u32) -> Option<&AngularFunction> {
        self.map.get(&(k, l))
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, u32, &AngularFunction)> {
        self.map.iter().map(|(&(k, l), a)| (k, l, a))
    }

    pub fn terms(&self) -> Vec<AsymptoticTerm> {
        self.iter().map(|(k, l, a)| AsymptoticTerm::new(k, l, a.clone())).collect()
    }

    pub fn max_k(&self) -> Option<u32> {
        self.map.keys().map(|&(k, _)| k).max()
    }

    pub fn max_modes(&self) -> usize {
        self.map.values().map(|a| a.cutoff()).max().unwrap_or(0)
    }

    /// Drop negligible terms and trailing zero modes.
    pub fn cleaned(mut self) -> Self {
        self.map.retain(|_, a| a.max_abs() >= DROP_TOL);
        for a in self.map.values_mut() {
            *a = a.trimmed();
        }
        self
    }

    pub fn add(&self, other: &Self) -> Self {
        self.add_scaled(other, C64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add_scaled(other, C64::new(-1.0, 0.0))
    }

    pub fn add_scaled(&self, other: &Self, s: C64) -> Self {
        let mut out = self.clone();
        out.accumulate(other, s);
        out.cleaned()
    }

    /// `self += s·other` without cleaning.
    pub fn accumulate(&mut self, other: &Self, s: C64) {
        for (k, l, a) in other.iter() {
            self.add_scaled_term(k, l, a, s);
        }
    }

    pub fn scale(&self, s: impl Into<C64>) -> Self {
        let s = s.into();
        Self { map: self.map.iter().map(|(key, a)| (*key, a.scale(s))).collect() }.cleaned()
    }

    pub fn conj(&self) -> Self {
        Self { map: self.map.iter().map(|(key, a)| (*key, a.conj())).collect() }
    }

    /// Restrict to terms with `k` in the given inclusive range.
    pub fn filter_k(&self, lo: u32, hi: u32) -> Self {
        Self { map: self.map.iter().filter(|(&(k, _), _)| k >= lo && k <= hi).map(|(a, b)| (*a, b.clone())).collect() }
    }

    /// Split into (k ≤ kmax, k > kmax).
    pub fn split_at(&self, kmax: u32) -> (Self, Self) {
        let mut lo = Self::default();
        let mut hi = Self::default();
        for (&key, a) in &self.map {
            if key.0 <= kmax {
                lo.map.insert(key, a.clone());
            } else {
                hi.map.insert(key, a.clone());
            }
        }
        (lo, hi)
    }

    /// Truncate every coefficient to `m_max` modes.
    pub fn truncate_modes(&self, m_max: usize) -> Self {
        Self { map: self.map.iter().map(|(key, a)| (*key, a.truncated(m_max))).collect() }
    }

    /// Term-wise `∂_j`.
    pub fn derivative(&self, axis: Axis) -> Self {
        let mut out = Self::default();
        for (k, l, a) in self.iter() {
            for t in AsymptoticTerm::new(k, l, a.clone()).derivative(axis) {
                out.push(t);
            }
        }
        out.cleaned()
    }

    /// Term-by-term product (no truncation in power).
    pub fn product(&self, other: &Self, m_max: usize) -> Self {
        let mut out = Self::default();
        for (k1, l1, a1) in self.iter() {
            for (k2, l2, a2) in other.iter() {
                let a = a1.mul(a2, m_max);
                out.add_scaled_term(k1 + k2, l1 + l2, &a, C64::new(1.0, 0.0));
            }
        }
        out.cleaned()
    }

    /// Radial derivative `∂_r` term-wise (power k+1).
    pub fn radial_derivative(&self) -> Self {
        let mut out = Self::default();
        for (k, l, a) in self.iter() {
            if k > 0 {
                out.add_scaled_term(k + 1, l, a, C64::from(-(k as f64)));
            }
            if l > 0 {
                out.add_scaled_term(k + 1, l - 1, a, C64::from(l as f64));
            }
        }
        out.cleaned()
    }

    /// Sum of terms (no cutoff) at (r, θ).
    pub fn eval_polar(&self, r: f64, theta: f64) -> C64 {
        let e = C64::from_polar(1.0, theta);
        let lr = r.ln();
        self.iter()
            .map(|(k, l, a)| a.eval_with_phase(e, a.cutoff() as i64) * lr.powi(l as i32) / r.powi(k as i32))
            .sum()
    }

    /// Sum of terms (no cutoff) at a Cartesian point.
    pub fn eval_xy(&self, x: f64, y: f64) -> C64 {
        self.eval_polar(x.hypot(y), y.atan2(x))
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.map.values().map(|a| a.max_abs()).fold(0.0, f64::max)
    }
}

/// Radial weight applied when sampling terms onto the grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Weight {
    /// χ·t on every point.
    Chi,
    /// χ²·t on every point.
    ChiSquared,
    /// (χ² − χ)·t on the transition band.
    ChiSqMinusChi,
    /// (∂_j χ)·t = χ' θ_j t on the band.
    DChi(Axis),
    /// [Δ, χ]t = 2χ' ∂_r t + (χ'' + χ'/r) t on the band.
    Commutator,
}

/// `out[i] += s · weight(t)(x_i)`.
pub fn sample_into(grid: &Grid, part: &AsymptoticPart, weight: Weight, s: C64, out: &mut [C64]) {
    if part.is_empty() {
        return;
    }
    let radial = if weight == Weight::Commutator { Some(part.radial_derivative()) } else { None };
    let indices = match weight {
        Weight::Chi | Weight::ChiSquared => grid.nonzero(),
        _ => grid.band(),
    };
    let mm = part.max_modes().max(radial.as_ref().map_or(0, |p| p.max_modes()));
    let terms: Vec<(u32, u32, &AngularFunction)> = part.iter().collect();
    let rterms: Vec<(u32, u32, &AngularFunction)> = radial.as_ref().map_or(Vec::new(), |p| p.iter().collect());
    let mut pw = vec![C64::new(0.0, 0.0); 2 * mm + 1];
    let pts = grid.points();
    let eval_sum = |list: &[(u32, u32, &AngularFunction)], pw: &[C64], r: f64, lr: f64| -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for &(k, l, a) in list {
            let m = a.cutoff();
            let mut v = C64::new(0.0, 0.0);
            for (i, c) in a.modes().iter().enumerate() {
                v += c * pw[mm - m + i];
            }
            acc += v * (lr.powi(l as i32) * r.powi(-(k as i32)));
        }
        acc
    };
    for &idx in indices {
        let p = &pts[idx];
        let [chi, d1, d2] = p.chi;
        let w = match weight {
            Weight::Chi => chi,
            Weight::ChiSquared => chi * chi,
            Weight::ChiSqMinusChi => chi * chi - chi,
            Weight::DChi(Axis::X) => d1 * p.cos,
            Weight::DChi(Axis::Y) => d1 * p.sin,
            Weight::Commutator => 1.0,
        };
        if w == 0.0 {
            continue;
        }
        let e = C64::new(p.cos, p.sin);
        pw[mm] = C64::new(1.0, 0.0);
        for j in 1..=mm {
            pw[mm + j] = pw[mm + j - 1] * e;
            pw[mm - j] = pw[mm + j].conj();
        }
        let val = match weight {
            Weight::Commutator => {
                let v0 = eval_sum(&terms, &pw, p.r, p.log_r);
                let v1 = eval_sum(&rterms, &pw, p.r, p.log_r);
                v1 * (2.0 * d1) + v0 * (d2 + d1 / p.r)
            }
            _ => eval_sum(&terms, &pw, p.r, p.log_r) * w,
        };
        out[idx] += s * val;
    }
}

/// Fresh grid vector with `weight(part)` sampled.
pub fn sample(grid: &Grid, part: &AsymptoticPart, weight: Weight) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); grid.len()];
    sample_into(grid, part, weight, C64::new(1.0, 0.0), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_of_log() {
        let p = AsymptoticPart::single(0, 1, AngularFunction::constant(1.0));
        let d = p.derivative(Axis::X);
        assert_eq!(d.len(), 1);
        let a = d.get(1, 0).unwrap();
        assert!((a.mode(1) - C64::from(0.5)).norm() < 1e-15);
        assert!((a.mode(-1) - C64::from(0.5)).norm() < 1e-15);
    }

    #[test]
    fn derivative_of_dipole() {
        let p = AsymptoticPart::single(1, 0, AngularFunction::cos(1, 1.0));
        let d = p.derivative(Axis::X);
        let a = d.get(2, 0).unwrap();
        let want = AngularFunction::cos(2, -1.0);
        for j in -3..=3 {
            assert!((a.mode(j) - want.mode(j)).norm() < 1e-15);
        }
    }

    #[test]
    fn radial_derivative_matches_difference() {
        let p: AsymptoticPart = [
            AsymptoticTerm::new(1, 2, AngularFunction::cos(2, 0.7)),
            AsymptoticTerm::new(0, 1, AngularFunction::sin(1, 1.0)),
        ]
        .into_iter()
        .collect();
        let d = p.radial_derivative();
        let (r, t, h) = (3.3, 0.4, 1e-5);
        let fd = (p.eval_polar(r + h, t) - p.eval_polar(r - h, t)) / (2.0 * h);
        assert!((fd - d.eval_polar(r, t)).norm() < 1e-8);
    }
}
