use super::field::{AsymptoticField, FieldError, SpaceParams};
use crate::angular::Axis;
use num_complex::Complex64 as C64;

/// Planar vector field stored component-wise.
#[derive(Clone, Debug)]
pub struct VectorField {
    pub comps: [AsymptoticField; 2],
}

impl VectorField {
    pub fn new(x: AsymptoticField, y: AsymptoticField) -> Self {
        Self { comps: [x, y] }
    }

    pub fn zero_like(u: &AsymptoticField) -> Self {
        let z = AsymptoticField::zero(u.grid().clone(), u.params);
        Self::new(z.clone(), z)
    }

    pub fn params(&self) -> SpaceParams {
        self.comps[0].params
    }

    pub fn with_params(self, p: SpaceParams) -> Self {
        let [a, b] = self.comps;
        Self::new(a.with_params(p), b.with_params(p))
    }

    pub fn get(&self, axis: Axis) -> &AsymptoticField {
        &self.comps[axis.index()]
    }

    pub fn map(&self, f: impl Fn(&AsymptoticField) -> AsymptoticField) -> Self {
        Self::new(f(&self.comps[0]), f(&self.comps[1]))
    }

    pub fn try_map(&self, f: impl Fn(&AsymptoticField) -> Result<AsymptoticField, FieldError>) -> Result<Self, FieldError> {
        Ok(Self::new(f(&self.comps[0])?, f(&self.comps[1])?))
    }

    pub fn add_scaled(&self, o: &Self, s: C64) -> Result<Self, FieldError> {
        Ok(Self::new(self.comps[0].add_scaled(&o.comps[0], s)?, self.comps[1].add_scaled(&o.comps[1], s)?))
    }

    pub fn add(&self, o: &Self) -> Result<Self, FieldError> {
        self.add_scaled(o, C64::new(1.0, 0.0))
    }

    pub fn sub(&self, o: &Self) -> Result<Self, FieldError> {
        self.add_scaled(o, C64::new(-1.0, 0.0))
    }

    pub fn scale(&self, s: impl Into<C64>) -> Self {
        let s = s.into();
        self.map(|c| c.scale(s))
    }

    pub fn conj(&self) -> Self {
        self.map(|c| c.conj())
    }

    /// Sum of component norms.
    pub fn a_norm(&self) -> f64 {
        self.comps[0].a_norm() + self.comps[1].a_norm()
    }

    pub fn eval(&self, x: f64, y: f64) -> [C64; 2] {
        [self.comps[0].eval(x, y), self.comps[1].eval(x, y)]
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.is_zero())
    }

    /// `∂_x u_x + ∂_y u_y`.
    pub fn divergence(&self) -> Result<AsymptoticField, FieldError> {
        self.comps[0].partial_derivative(Axis::X)?.add(&self.comps[1].partial_derivative(Axis::Y)?)
    }

    /// Largest |div u| over grid points, asymptotic residue included.
    pub fn max_divergence(&self) -> Result<f64, FieldError> {
        Ok(self.divergence()?.max_abs_on_grid())
    }

    /// Jacobian `[∂_j u_i]` indexed `[i][j]`.
    pub fn jacobian(&self) -> Result<[[AsymptoticField; 2]; 2], FieldError> {
        let d = |i: usize, a: Axis| self.comps[i].partial_derivative(a);
        Ok([[d(0, Axis::X)?, d(0, Axis::Y)?], [d(1, Axis::X)?, d(1, Axis::Y)?]])
    }
}

/// `u = (−∂_y ψ, ∂_x ψ)` from a scalar stream function.
pub fn make_divergence_free(psi: &AsymptoticField) -> Result<VectorField, FieldError> {
    if psi.params.m < 2 {
        return Err(FieldError::Regularity { needed: 2, have: psi.params.m });
    }
    let ux = psi.partial_derivative(Axis::Y)?.scale(-1.0);
    let uy = psi.partial_derivative(Axis::X)?;
    Ok(VectorField::new(ux, uy))
}
