//! Functions on the unit circle stored as truncated Fourier series
//! `a(θ) = Σ_{|j|≤M} c_j e^{ijθ}`.
//!
//! Norms use the plain measure dθ (no 1/2π factor), so the order-`s`
//! Sobolev norm is `(Σ (1+j²)^s |c_j|²)^{1/2}`.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;
use thiserror::Error;

/// Cartesian axis index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub const BOTH: [Axis; 2] = [Axis::X, Axis::Y];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum AngularError {
    #[error("need at least {needed} samples for cutoff {m}, got {got}")]
    TooFewSamples { needed: usize, got: usize, m: usize },
    #[error("sampled data carries modes beyond the cutoff {m} (aliasing, relative size {size:.3e})")]
    Aliasing { m: usize, size: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct AngularFunction {
    modes: Vec<C64>,
}

impl Default for AngularFunction {
    fn default() -> Self {
        Self::zero()
    }
}

impl AngularFunction {
    pub fn zero() -> Self {
        Self { modes: vec![C64::new(0.0, 0.0)] }
    }

    pub fn constant(c: impl Into<C64>) -> Self {
        Self { modes: vec![c.into()] }
    }

    /// Build from `c_{-M}..c_M` (odd length).
    pub fn from_modes(modes: Vec<C64>) -> Self {
        assert!(modes.len() % 2 == 1, "mode vector must have odd length");
        Self { modes }
    }

    /// Single complex exponential `c e^{ijθ}`.
    pub fn exp_mode(j: i64, c: impl Into<C64>) -> Self {
        let m = j.unsigned_abs() as usize;
        let mut modes = vec![C64::new(0.0, 0.0); 2 * m + 1];
        modes[(j + m as i64) as usize] = c.into();
        Self { modes }
    }

    /// `amp · cos(jθ)`.
    pub fn cos(j: usize, amp: f64) -> Self {
        if j == 0 {
            return Self::constant(amp);
        }
        let j = j as i64;
        Self::exp_mode(j, 0.5 * amp).add(&Self::exp_mode(-j, 0.5 * amp))
    }

    /// `amp · sin(jθ)`.
    pub fn sin(j: usize, amp: f64) -> Self {
        if j == 0 {
            return Self::zero();
        }
        let j = j as i64;
        Self::exp_mode(j, C64::new(0.0, -0.5 * amp)).add(&Self::exp_mode(-j, C64::new(0.0, 0.5 * amp)))
    }

    /// Mode cutoff M.
    pub fn cutoff(&self) -> usize {
        (self.modes.len() - 1) / 2
    }

    pub fn modes(&self) -> &[C64] {
        &self.modes
    }

    /// Coefficient `c_j` (zero beyond the cutoff).
    pub fn mode(&self, j: i64) -> C64 {
        let m = self.cutoff() as i64;
        if j.abs() > m {
            C64::new(0.0, 0.0)
        } else {
            self.modes[(j + m) as usize]
        }
    }

    /// Discrete Fourier projection of `samples` taken at `θ_q = 2πq/Q`.
    pub fn project(samples: &[C64], m: usize) -> Result<Self, AngularError> {
        let q = samples.len();
        if q < 2 * m + 1 {
            return Err(AngularError::TooFewSamples { needed: 2 * m + 1, got: q, m });
        }
        let lo = -((q as i64 - 1) / 2) - if q.is_multiple_of(2) { 1 } else { 0 };
        let hi = (q as i64 - 1) / 2;
        let mut full = Vec::with_capacity(q);
        for j in lo..=hi {
            let mut s = C64::new(0.0, 0.0);
            for (i, v) in samples.iter().enumerate() {
                let ang = -2.0 * PI * (j * i as i64) as f64 / q as f64;
                s += v * C64::from_polar(1.0, ang);
            }
            full.push((j, s / q as f64));
        }
        let scale = full.iter().map(|(_, c)| c.norm()).fold(0.0, f64::max);
        let outside = full
            .iter()
            .filter(|(j, _)| j.unsigned_abs() as usize > m)
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max);
        if scale > 0.0 && outside > 1e-12 * scale {
            return Err(AngularError::Aliasing { m, size: outside / scale });
        }
        let mut modes = vec![C64::new(0.0, 0.0); 2 * m + 1];
        for (j, c) in full {
            if j.unsigned_abs() as usize <= m {
                modes[(j + m as i64) as usize] = c;
            }
        }
        Ok(Self { modes })
    }

    pub fn eval(&self, theta: f64) -> C64 {
        let m = self.cutoff() as i64;
        let e = C64::from_polar(1.0, theta);
        self.eval_with_phase(e, m)
    }

    /// Evaluate given `e = e^{iθ}`.
    pub fn eval_with_phase(&self, e: C64, m: i64) -> C64 {
        // Horner in e from the top mode, then shift by e^{-iMθ}.
        let mut acc = C64::new(0.0, 0.0);
        for c in self.modes.iter().rev() {
            acc = acc * e + c;
        }
        acc * e.conj().powi(m as i32)
    }

    pub fn eval_equispaced(&self, q: usize) -> Vec<C64> {
        (0..q).map(|i| self.eval(2.0 * PI * i as f64 / q as f64)).collect()
    }

    /// `Δ_S a = a''` on the circle.
    pub fn lap_beltrami(&self) -> Self {
        let m = self.cutoff() as i64;
        Self {
            modes: self
                .modes
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let j = (i as i64 - m) as f64;
                    c * (-j * j)
                })
                .collect(),
        }
    }

    /// `a'(θ)`.
    pub fn derivative(&self) -> Self {
        let m = self.cutoff() as i64;
        Self {
            modes: self
                .modes
                .iter()
                .enumerate()
                .map(|(i, c)| c * C64::new(0.0, (i as i64 - m) as f64))
                .collect(),
        }
    }

    /// Multiply by `cos θ`.
    pub fn mul_cos(&self) -> Self {
        self.shift_combine(C64::new(0.5, 0.0), C64::new(0.5, 0.0))
    }

    /// Multiply by `sin θ`.
    pub fn mul_sin(&self) -> Self {
        // sin θ = (e^{iθ} - e^{-iθ}) / 2i
        self.shift_combine(C64::new(0.0, -0.5), C64::new(0.0, 0.5))
    }

    /// Multiply by `θ_j = x_j/|x|`.
    pub fn mul_theta(&self, axis: Axis) -> Self {
        match axis {
            Axis::X => self.mul_cos(),
            Axis::Y => self.mul_sin(),
        }
    }

    // result_j = up·c_{j-1} + down·c_{j+1}
    fn shift_combine(&self, up: C64, down: C64) -> Self {
        let m = self.cutoff();
        let n = 2 * (m + 1) + 1;
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (i, c) in self.modes.iter().enumerate() {
            // old index i ↔ j = i - m ↔ new index j + m + 1 = i + 1
            out[i + 2] += up * c;
            out[i] += down * c;
        }
        Self { modes: out }
    }

    /// Tangential projection of ∂_j: `∂̂_x a = −sinθ a'`, `∂̂_y a = cosθ a'`.
    pub fn dhat(&self, axis: Axis) -> Self {
        let d = self.derivative();
        match axis {
            Axis::X => d.mul_sin().scale(-1.0),
            Axis::Y => d.mul_cos(),
        }
    }

    /// Mode convolution truncated to `min(M_a + M_b, m_max)`.
    pub fn mul(&self, other: &Self, m_max: usize) -> Self {
        let ma = self.cutoff() as i64;
        let mb = other.cutoff() as i64;
        let mo = (ma + mb).min(m_max as i64);
        let mut out = vec![C64::new(0.0, 0.0); (2 * mo + 1) as usize];
        for (i, a) in self.modes.iter().enumerate() {
            if a.re == 0.0 && a.im == 0.0 {
                continue;
            }
            let ja = i as i64 - ma;
            for (k, b) in other.modes.iter().enumerate() {
                let j = ja + k as i64 - mb;
                if j.abs() <= mo {
                    out[(j + mo) as usize] += a * b;
                }
            }
        }
        Self { modes: out }
    }

    pub fn add(&self, other: &Self) -> Self {
        let m = self.cutoff().max(other.cutoff()) as i64;
        let modes = (-m..=m).map(|j| self.mode(j) + other.mode(j)).collect();
        Self { modes }
    }

    pub fn add_scaled(&mut self, other: &Self, s: C64) {
        if other.cutoff() > self.cutoff() {
            *self = self.padded(other.cutoff());
        }
        let m = self.cutoff() as i64;
        let mo = other.cutoff() as i64;
        for (i, c) in other.modes.iter().enumerate() {
            let j = i as i64 - mo;
            self.modes[(j + m) as usize] += s * c;
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: impl Into<C64>) -> Self {
        let s = s.into();
        Self { modes: self.modes.iter().map(|c| c * s).collect() }
    }

    /// Pointwise complex conjugate `conj(a(θ))`.
    pub fn conj(&self) -> Self {
        Self { modes: self.modes.iter().rev().map(|c| c.conj()).collect() }
    }

    fn padded(&self, m: usize) -> Self {
        let m = m as i64;
        Self { modes: (-m..=m).map(|j| self.mode(j)).collect() }
    }

    /// Drop modes beyond `m`.
    pub fn truncated(&self, m: usize) -> Self {
        if m >= self.cutoff() {
            return self.clone();
        }
        self.padded(m)
    }

    /// Remove outer modes that are exactly zero.
    pub fn trimmed(&self) -> Self {
        let m = self.cutoff() as i64;
        let mut top = 0i64;
        for j in (0..=m).rev() {
            if self.mode(j) != C64::new(0.0, 0.0) || self.mode(-j) != C64::new(0.0, 0.0) {
                top = j;
                break;
            }
        }
        self.padded(top as usize)
    }

    /// Conjugate symmetry `c_{-j} = conj(c_j)` to relative tolerance.
    pub fn is_real(&self) -> bool {
        let m = self.cutoff() as i64;
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        (0..=m).all(|j| (self.mode(-j) - self.mode(j).conj()).norm() <= 1e-12 * scale)
    }

    pub fn max_abs(&self) -> f64 {
        self.modes.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `(Σ_j (1+j²)^s |c_j|²)^{1/2}`.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        let m = self.cutoff() as i64;
        self.modes
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let j = (i as i64 - m) as f64;
                (1.0 + j * j).powf(s) * c.norm_sqr()
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// Trapezoidal `∫_0^{2π} f(θ) dθ` with `q` points.
pub fn circle_moment(f: impl Fn(f64) -> f64, q: usize) -> f64 {
    let h = 2.0 * PI / q as f64;
    (0..q).map(|i| f(h * i as f64)).sum::<f64>() * h
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &AngularFunction, b: &AngularFunction, tol: f64) -> bool {
        let m = a.cutoff().max(b.cutoff()) as i64;
        (-m..=m).all(|j| (a.mode(j) - b.mode(j)).norm() <= tol)
    }

    #[test]
    fn project_examples() {
        let s: Vec<C64> = (0..9).map(|i| C64::from((2.0 * PI * i as f64 / 9.0).cos())).collect();
        let a = AngularFunction::project(&s, 4).unwrap();
        assert!(close(&a, &AngularFunction::cos(1, 1.0), 1e-14));
        let s = vec![C64::from(1.0); 5];
        let a = AngularFunction::project(&s, 2).unwrap();
        assert!(close(&a, &AngularFunction::constant(1.0), 1e-14));
        let s = AngularFunction::cos(3, 1.0).eval_equispaced(6);
        assert!(matches!(AngularFunction::project(&s, 2), Err(AngularError::Aliasing { .. })));
        assert!(matches!(
            AngularFunction::project(&s[..4], 2),
            Err(AngularError::TooFewSamples { .. })
        ));
    }

    #[test]
    fn lap_beltrami_examples() {
        let c1 = AngularFunction::cos(1, 1.0);
        assert!(close(&c1.lap_beltrami(), &c1.scale(-1.0), 1e-15));
        assert!(close(&AngularFunction::constant(1.0).lap_beltrami(), &AngularFunction::zero(), 0.0));
        let c3 = AngularFunction::cos(3, 1.0);
        assert!(close(&c3.lap_beltrami(), &c3.scale(-9.0), 1e-14));
    }

    #[test]
    fn dhat_examples() {
        assert!(close(&AngularFunction::constant(1.0).dhat(Axis::X), &AngularFunction::zero(), 0.0));
        let c1 = AngularFunction::cos(1, 1.0);
        let want = AngularFunction::constant(0.5).add(&AngularFunction::cos(2, -0.5));
        assert!(close(&c1.dhat(Axis::X), &want, 1e-15));
        assert!(close(&c1.dhat(Axis::Y), &AngularFunction::sin(2, -0.5), 1e-15));
    }

    #[test]
    fn mul_examples() {
        let c1 = AngularFunction::cos(1, 1.0);
        let s1 = AngularFunction::sin(1, 1.0);
        let want = AngularFunction::constant(0.5).add(&AngularFunction::cos(2, 0.5));
        assert!(close(&c1.mul(&c1, 32), &want, 1e-15));
        assert!(close(&AngularFunction::constant(1.0).mul(&c1, 32), &c1, 0.0));
        assert!(close(&c1.mul(&s1, 32), &AngularFunction::sin(2, 0.5), 1e-15));
    }

    #[test]
    fn sobolev_examples() {
        assert!((AngularFunction::constant(1.0).sobolev_norm(3.0) - 1.0).abs() < 1e-15);
        let c1 = AngularFunction::cos(1, 1.0);
        assert!((c1.sobolev_norm(0.0) - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((c1.sobolev_norm(1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn circle_moment_examples() {
        assert!((circle_moment(|t| t.cos().powi(2), 64) - PI).abs() < 1e-13);
        assert!(circle_moment(|t| t.cos() * t.sin(), 64).abs() < 1e-13);
        assert!((circle_moment(|_| 1.0, 64) - 2.0 * PI).abs() < 1e-13);
    }
}
