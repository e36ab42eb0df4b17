use super::grid::Grid;
use super::terms::{sample, sample_into, AsymptoticPart, Weight};
use crate::angular::Axis;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::sync::{Arc, OnceLock};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FieldError {
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("operation needs regularity m ≥ {needed}, field has m = {have}")]
    Regularity { needed: u32, have: u32 },
    #[error("invalid space parameters: {0}")]
    InvalidParams(String),
    #[error("term of power {k} cannot be inverted (needs power ≥ 2)")]
    PowerTooLow { k: u32 },
    #[error("undefined: {0}")]
    Undefined(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

/// Indices (m, n, N, ℓ, γ₀) of the space A^m_{n,N;ℓ} (d = 2, p = 2).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceParams {
    pub m: u32,
    pub n: u32,
    #[serde(rename = "N")]
    pub big_n: u32,
    pub ell: i32,
    pub gamma0: f64,
}

impl SpaceParams {
    pub const DEFAULT_GAMMA0: f64 = -0.5;

    pub fn new(m: u32, n: u32, big_n: u32, ell: i32) -> Self {
        Self { m, n, big_n, ell, gamma0: Self::DEFAULT_GAMMA0 }
    }

    pub fn validate(&self) -> Result<(), FieldError> {
        if self.n > self.big_n {
            return Err(FieldError::InvalidParams(format!("n = {} > N = {}", self.n, self.big_n)));
        }
        if self.ell + (self.n as i32) < 0 {
            return Err(FieldError::InvalidParams(format!("ℓ + n = {} < 0", self.ell + self.n as i32)));
        }
        if !(self.gamma0 >= -1.0 && self.gamma0 < 0.0) {
            return Err(FieldError::InvalidParams(format!("γ₀ = {} outside [−1, 0)", self.gamma0)));
        }
        Ok(())
    }

    /// Remainder weight γ_N = N + γ₀.
    pub fn gamma_n(&self) -> f64 {
        self.big_n as f64 + self.gamma0
    }

    /// ε = γ₀ + d/p.
    pub fn epsilon(&self) -> f64 {
        self.gamma0 + 1.0
    }

    /// Space of `∂_j u`.
    pub fn derivative(&self) -> Result<Self, FieldError> {
        if self.m == 0 {
            return Err(FieldError::Regularity { needed: 1, have: 0 });
        }
        Ok(Self { m: self.m - 1, n: self.n + 1, big_n: self.big_n + 1, ell: self.ell - 1, gamma0: self.gamma0 })
    }

    /// Space of a product (case (ii) of the product rule).
    pub fn product(&self, o: &Self) -> Self {
        Self {
            m: self.m.min(o.m),
            n: self.n + o.n,
            big_n: (self.big_n + o.n).min(o.big_n + self.n),
            ell: self.ell + o.ell,
            gamma0: self.gamma0,
        }
    }

    /// Common space of a sum.
    pub fn sum(&self, o: &Self) -> Self {
        Self {
            m: self.m.min(o.m),
            n: self.n.min(o.n),
            big_n: self.big_n.min(o.big_n),
            ell: self.ell.max(o.ell),
            gamma0: self.gamma0,
        }
    }
}

/// Grid samples of a remainder on [−L, L)², row-major with x fastest.
#[derive(Clone, Debug)]
pub struct RemainderGrid {
    grid: Arc<Grid>,
    values: Vec<C64>,
}

impl RemainderGrid {
    pub fn new(grid: Arc<Grid>, values: Vec<C64>) -> Self {
        assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.len();
        Self { grid, values: vec![C64::new(0.0, 0.0); n] }
    }

    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(f64, f64) -> C64) -> Self {
        let values = grid.points().iter().map(|p| f(p.x, p.y)).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest modulus on the outermost ring of grid points.
    pub fn boundary_max(&self) -> f64 {
        let nx = self.grid.nx();
        let mut m: f64 = 0.0;
        for i in 0..nx {
            for &idx in &[self.grid.index(i, 0), self.grid.index(0, i)] {
                m = m.max(self.values[idx].norm());
            }
        }
        m
    }
}

/// An element `v = χ·Σ a_k^l(θ)(log r)^l/r^k + f` of an asymptotic space.
///
/// Terms with `k ≤ N` form the asymptotic part. Terms with `N < k ≤ k_max`
/// are kept analytically for accuracy but count as remainder in norms and
/// in [`Self::eval_remainder`]; powers beyond `k_max` are sampled into the grid.
#[derive(Clone, Debug)]
pub struct AsymptoticField {
    pub params: SpaceParams,
    terms: AsymptoticPart,
    rem: RemainderGrid,
    sampled: OnceLock<Arc<Vec<C64>>>,
    spectrum: OnceLock<Arc<Vec<C64>>>,
}

impl AsymptoticField {
    /// Assemble a field; powers above `k_max` are folded into the grid and
    /// angular modes are truncated to `m_max`.
    pub fn new(params: SpaceParams, terms: AsymptoticPart, rem: RemainderGrid) -> Self {
        let grid = rem.grid.clone();
        let terms = terms.truncate_modes(grid.spec.m_max).cleaned();
        let (keep, over) = terms.split_at(grid.spec.k_max);
        let mut values = rem.values;
        if !over.is_empty() {
            sample_into(&grid, &over, Weight::Chi, C64::new(1.0, 0.0), &mut values);
        }
        Self {
            params,
            terms: keep,
            rem: RemainderGrid { grid, values },
            sampled: OnceLock::new(),
            spectrum: OnceLock::new(),
        }
    }

    pub fn zero(grid: Arc<Grid>, params: SpaceParams) -> Self {
        Self::new(params, AsymptoticPart::new(), RemainderGrid::zeros(grid))
    }

    pub fn from_terms(grid: Arc<Grid>, params: SpaceParams, terms: AsymptoticPart) -> Self {
        Self::new(params, terms, RemainderGrid::zeros(grid))
    }

    pub fn from_remainder(params: SpaceParams, rem: RemainderGrid) -> Self {
        Self::new(params, AsymptoticPart::new(), rem)
    }

    pub fn from_fn(grid: Arc<Grid>, params: SpaceParams, f: impl Fn(f64, f64) -> C64) -> Self {
        Self::from_remainder(params, RemainderGrid::from_fn(grid, f))
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.rem.grid
    }

    /// All analytic terms (asymptotic part and tail).
    pub fn terms(&self) -> &AsymptoticPart {
        &self.terms
    }

    /// Grid part only.
    pub fn rem(&self) -> &RemainderGrid {
        &self.rem
    }

    pub fn with_params(mut self, params: SpaceParams) -> Self {
        self.params = params;
        self
    }

    /// Terms with `n ≤ k ≤ N`.
    pub fn asymptotic_part(&self) -> AsymptoticPart {
        self.terms.filter_k(0, self.params.big_n)
    }

    /// Analytic terms beyond `N`.
    pub fn tail_part(&self) -> AsymptoticPart {
        self.terms.filter_k(self.params.big_n + 1, u32::MAX)
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        Arc::ptr_eq(self.grid(), other.grid()) || **self.grid() == **other.grid()
    }

    fn check_grid(&self, other: &Self) -> Result<(), FieldError> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(FieldError::GridMismatch)
        }
    }

    /// χ·(all terms) on every grid point (cached).
    pub fn sampled_terms(&self) -> Arc<Vec<C64>> {
        self.sampled.get_or_init(|| Arc::new(sample(self.grid(), &self.terms, Weight::Chi))).clone()
    }

    fn spectrum(&self) -> Arc<Vec<C64>> {
        self.spectrum.get_or_init(|| Arc::new(self.grid().to_spectral(&self.rem.values))).clone()
    }

    /// Field values at every grid point.
    pub fn grid_values(&self) -> Vec<C64> {
        let s = self.sampled_terms();
        s.iter().zip(&self.rem.values).map(|(a, b)| a + b).collect()
    }

    /// Remainder in the norm sense: grid part plus χ·(terms beyond N).
    pub fn remainder_values(&self) -> Vec<C64> {
        let mut v = self.rem.values.clone();
        sample_into(self.grid(), &self.tail_part(), Weight::Chi, C64::new(1.0, 0.0), &mut v);
        v
    }

    fn chi_at(&self, x: f64, y: f64) -> f64 {
        self.grid().cutoff().value(x.hypot(y))
    }

    /// χ·(asymptotic part) at (x, y).
    pub fn eval_asymptotic(&self, x: f64, y: f64) -> C64 {
        let c = self.chi_at(x, y);
        if c == 0.0 {
            return C64::new(0.0, 0.0);
        }
        self.asymptotic_part().eval_xy(x, y) * c
    }

    /// Grid part by trigonometric interpolation (zero outside the box).
    pub fn eval_grid(&self, x: f64, y: f64) -> C64 {
        if !self.grid().contains(x, y) {
            return C64::new(0.0, 0.0);
        }
        self.grid().spectral_eval(&self.spectrum(), x, y)
    }

    /// Remainder `u − χ·(asymptotic part)` at (x, y).
    pub fn eval_remainder(&self, x: f64, y: f64) -> C64 {
        let c = self.chi_at(x, y);
        let tail = if c == 0.0 { C64::new(0.0, 0.0) } else { self.tail_part().eval_xy(x, y) * c };
        tail + self.eval_grid(x, y)
    }

    /// Field value at (x, y): χ·terms + interpolated grid part.
    pub fn eval(&self, x: f64, y: f64) -> C64 {
        let c = self.chi_at(x, y);
        let t = if c == 0.0 { C64::new(0.0, 0.0) } else { self.terms.eval_xy(x, y) * c };
        t + self.eval_grid(x, y)
    }

    /// Same as [`Self::eval`] but with bilinear interpolation of the grid part.
    pub fn eval_bilinear(&self, x: f64, y: f64) -> C64 {
        let c = self.chi_at(x, y);
        let t = if c == 0.0 { C64::new(0.0, 0.0) } else { self.terms.eval_xy(x, y) * c };
        t + self.grid().bilinear(&self.rem.values, x, y)
    }

    pub fn add(&self, other: &Self) -> Result<Self, FieldError> {
        self.add_scaled(other, C64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, FieldError> {
        self.add_scaled(other, C64::new(-1.0, 0.0))
    }

    /// `self + s·other`.
    pub fn add_scaled(&self, other: &Self, s: C64) -> Result<Self, FieldError> {
        self.check_grid(other)?;
        let terms = self.terms.add_scaled(&other.terms, s);
        let values = self.rem.values.iter().zip(&other.rem.values).map(|(a, b)| a + s * b).collect();
        Ok(Self::new(self.params.sum(&other.params), terms, RemainderGrid::new(self.grid().clone(), values)))
    }

    pub fn scale(&self, s: impl Into<C64>) -> Self {
        let s = s.into();
        let values = self.rem.values.iter().map(|v| v * s).collect();
        Self::new(self.params, self.terms.scale(s), RemainderGrid::new(self.grid().clone(), values))
    }

    /// Pointwise complex conjugate.
    pub fn conj(&self) -> Self {
        let values = self.rem.values.iter().map(|v| v.conj()).collect();
        Self::new(self.params, self.terms.conj(), RemainderGrid::new(self.grid().clone(), values))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.rem.values.iter().all(|v| *v == C64::new(0.0, 0.0))
    }

    /// `∂_j u`: term rule, cutoff-derivative correction, spectral grid derivative.
    pub fn partial_derivative(&self, axis: Axis) -> Result<Self, FieldError> {
        let params = self.params.derivative()?;
        let grid = self.grid();
        let s = self.spectrum();
        let mut values = grid.apply_multiplier(&s, |i| grid.axis_symbol(i, axis));
        sample_into(grid, &self.terms, Weight::DChi(axis), C64::new(1.0, 0.0), &mut values);
        Ok(Self::new(params, self.terms.derivative(axis), RemainderGrid::new(grid.clone(), values)))
    }

    /// Pointwise product.
    pub fn multiply(&self, other: &Self) -> Result<Self, FieldError> {
        self.check_grid(other)?;
        let grid = self.grid();
        let prod = self.terms.product(&other.terms, grid.spec.m_max);
        let (keep, over) = prod.split_at(grid.spec.k_max);
        let su = self.sampled_terms();
        let sv = other.sampled_terms();
        let f = &self.rem.values;
        let g = &other.rem.values;
        let mut values: Vec<C64> =
            (0..grid.len()).map(|i| su[i] * g[i] + sv[i] * f[i] + f[i] * g[i]).collect();
        sample_into(grid, &over, Weight::ChiSquared, C64::new(1.0, 0.0), &mut values);
        sample_into(grid, &keep, Weight::ChiSqMinusChi, C64::new(1.0, 0.0), &mut values);
        Ok(Self::new(self.params.product(&other.params), keep, RemainderGrid::new(grid.clone(), values)))
    }

    /// Σ_{k≤N} ‖a_k^l‖_{H^{m+1+N−k}} + ‖remainder‖_{W^m_{γ_N}}.
    pub fn a_norm(&self) -> f64 {
        let p = &self.params;
        let terms: f64 = self
            .asymptotic_part()
            .iter()
            .map(|(k, _, a)| a.sobolev_norm((p.m as f64) + 1.0 + p.big_n as f64 - k as f64))
            .sum();
        terms + w_norm_values(self.grid(), &self.remainder_values(), p.m, p.gamma_n())
    }

    /// Largest grid-point modulus of the whole field.
    pub fn max_abs_on_grid(&self) -> f64 {
        self.grid_values().iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// `Σ_{|α|≤m} ‖⟨x⟩^{δ+|α|} ∂^α f‖_{L²}` by spectral derivatives and grid quadrature.
pub fn w_norm(f: &RemainderGrid, m: u32, delta: f64) -> f64 {
    w_norm_values(&f.grid, &f.values, m, delta)
}

pub fn w_norm_values(grid: &Grid, values: &[C64], m: u32, delta: f64) -> f64 {
    if values.iter().all(|v| *v == C64::new(0.0, 0.0)) {
        return 0.0;
    }
    let spec = grid.to_spectral(values);
    let h2 = grid.h * grid.h;
    let mut total = 0.0;
    for order in 0..=m {
        for ax in 0..=order {
            let ay = order - ax;
            let d = if order == 0 { values.to_vec() } else { grid.apply_multiplier(&spec, |i| grid.deriv_symbol(i, ax, ay)) };
            let e = delta + order as f64;
            let s: f64 = grid
                .points()
                .iter()
                .zip(&d)
                .map(|(p, v)| (1.0 + p.r * p.r).powf(e) * v.norm_sqr())
                .sum();
            total += (s * h2).sqrt();
        }
    }
    total
}

/// `sup ⟨x⟩^{δ+1+|α|}|∂^α f| / ‖f‖_{W^m_δ}`.
pub fn embedding_ratio(f: &RemainderGrid, m: u32, delta: f64, alpha: (u32, u32)) -> Result<f64, FieldError> {
    let order = alpha.0 + alpha.1;
    if order + 1 >= m {
        return Err(FieldError::Precondition(format!("|α| = {order} must be < m − 1 = {}", m as i64 - 1)));
    }
    let den = w_norm(f, m, delta);
    if den == 0.0 {
        return Err(FieldError::Undefined("embedding ratio of the zero function".into()));
    }
    let d = f.grid.derivative(&f.values, alpha.0, alpha.1);
    let e = delta + 1.0 + order as f64;
    let sup = f.grid.points().iter().zip(&d).map(|(p, v)| (1.0 + p.r * p.r).powf(e / 2.0) * v.norm()).fold(0.0, f64::max);
    Ok(sup / den)
}
