//! Uniform periodic grid on [−L, L)², with cached polar geometry, cutoff
//! samples and FFT plans shared by every field living on it.

use super::cutoff::Cutoff;
use crate::angular::Axis;
use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// Everything needed to rebuild a [`Grid`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Half box size L.
    pub half_width: f64,
    /// Points per axis (power of two).
    pub nx: usize,
    pub cutoff: Cutoff,
    /// Global angular mode cutoff applied after products.
    pub m_max: usize,
    /// Highest inverse power kept as an analytic term; anything beyond is
    /// sampled onto the grid.
    pub k_max: u32,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { half_width: 32.0, nx: 256, cutoff: Cutoff::default(), m_max: 32, k_max: 8 }
    }
}

impl GridSpec {
    pub fn with_box(mut self, half_width: f64, nx: usize) -> Self {
        self.half_width = half_width;
        self.nx = nx;
        self
    }

    pub fn build(self) -> Arc<Grid> {
        Arc::new(Grid::new(self))
    }
}

/// Polar data of one grid point.
#[derive(Clone, Copy, Debug)]
pub struct PointGeom {
    pub x: f64,
    pub y: f64,
    pub r: f64,
    pub cos: f64,
    pub sin: f64,
    pub log_r: f64,
    pub chi: [f64; 3],
}

pub struct Grid {
    pub spec: GridSpec,
    pub h: f64,
    coords: Vec<f64>,
    points: Vec<PointGeom>,
    /// Indices with 0 < r < outer cutoff radius (where χ is not yet 1).
    band: Vec<usize>,
    /// Indices with r > 0.
    nonzero: Vec<usize>,
    /// Wavenumbers including the Nyquist value (used for |ξ|²).
    k_full: Vec<f64>,
    /// Wavenumbers with the Nyquist entry zeroed (odd derivatives).
    k_odd: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("spec", &self.spec).finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl Grid {
    pub fn new(spec: GridSpec) -> Self {
        assert!(spec.nx.is_power_of_two() && spec.nx >= 8, "nx must be a power of two");
        assert!(spec.half_width > 0.0);
        let nx = spec.nx;
        let l = spec.half_width;
        let h = 2.0 * l / nx as f64;
        let coords: Vec<f64> = (0..nx).map(|i| -l + h * i as f64).collect();
        let r_out = spec.cutoff.outer_radius();
        let mut points = Vec::with_capacity(nx * nx);
        let mut band = Vec::new();
        let mut nonzero = Vec::new();
        for iy in 0..nx {
            for ix in 0..nx {
                let (x, y) = (coords[ix], coords[iy]);
                let r = x.hypot(y);
                let (cos, sin, log_r) = if r > 0.0 { (x / r, y / r, r.ln()) } else { (1.0, 0.0, f64::NEG_INFINITY) };
                let chi = if r > 0.0 { spec.cutoff.eval3(r) } else { spec.cutoff.eval3(0.0) };
                let idx = iy * nx + ix;
                if r > 0.0 {
                    nonzero.push(idx);
                    if r < r_out {
                        band.push(idx);
                    }
                }
                points.push(PointGeom { x, y, r, cos, sin, log_r, chi });
            }
        }
        let dk = PI / l;
        let k_full: Vec<f64> =
            (0..nx).map(|i| if i < nx / 2 { i as f64 } else { i as f64 - nx as f64 } * dk).collect();
        let mut k_odd = k_full.clone();
        k_odd[nx / 2] = 0.0;
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(nx);
        let inv = planner.plan_fft_inverse(nx);
        Self { spec, h, coords, points, band, nonzero, k_full, k_odd, fwd, inv }
    }

    pub fn nx(&self) -> usize {
        self.spec.nx
    }

    pub fn len(&self) -> usize {
        self.spec.nx * self.spec.nx
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn half_width(&self) -> f64 {
        self.spec.half_width
    }

    pub fn cutoff(&self) -> &Cutoff {
        &self.spec.cutoff
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn points(&self) -> &[PointGeom] {
        &self.points
    }

    pub fn band(&self) -> &[usize] {
        &self.band
    }

    pub fn nonzero(&self) -> &[usize] {
        &self.nonzero
    }

    /// Grid index of (ix, iy).
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.spec.nx + ix
    }

    /// Nearest grid index to (x, y), if inside the box.
    pub fn nearest(&self, x: f64, y: f64) -> Option<usize> {
        let l = self.spec.half_width;
        let fx = ((x + l) / self.h).round();
        let fy = ((y + l) / self.h).round();
        let n = self.spec.nx as f64;
        if fx < 0.0 || fy < 0.0 || fx >= n || fy >= n {
            return None;
        }
        Some(self.index(fx as usize, fy as usize))
    }

    /// Wavenumber pair of Fourier index `idx` (Nyquist kept).
    pub fn xi(&self, idx: usize) -> (f64, f64) {
        let nx = self.spec.nx;
        (self.k_full[idx % nx], self.k_full[idx / nx])
    }

    /// |ξ|² of Fourier index `idx`.
    pub fn xi2(&self, idx: usize) -> f64 {
        let (a, b) = self.xi(idx);
        a * a + b * b
    }

    /// Symbol of `∂^α` for α = (ax, ay) at Fourier index `idx`.
    pub fn deriv_symbol(&self, idx: usize, ax: u32, ay: u32) -> C64 {
        let nx = self.spec.nx;
        let kx = if ax % 2 == 1 { self.k_odd[idx % nx] } else { self.k_full[idx % nx] };
        let ky = if ay % 2 == 1 { self.k_odd[idx / nx] } else { self.k_full[idx / nx] };
        C64::new(0.0, kx).powu(ax) * C64::new(0.0, ky).powu(ay)
    }

    pub fn axis_symbol(&self, idx: usize, axis: Axis) -> C64 {
        match axis {
            Axis::X => self.deriv_symbol(idx, 1, 0),
            Axis::Y => self.deriv_symbol(idx, 0, 1),
        }
    }

    /// In-place 2-D FFT (unnormalized forward).
    pub fn fft(&self, data: &mut [C64]) {
        self.fft2(data, &self.fwd);
    }

    /// In-place inverse 2-D FFT including the 1/nx² factor.
    pub fn ifft(&self, data: &mut [C64]) {
        self.fft2(data, &self.inv);
        let s = 1.0 / (self.len() as f64);
        for v in data.iter_mut() {
            *v *= s;
        }
    }

    fn fft2(&self, data: &mut [C64], plan: &Arc<dyn Fft<f64>>) {
        let nx = self.spec.nx;
        assert_eq!(data.len(), nx * nx);
        let mut scratch = vec![C64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        plan.process_with_scratch(data, &mut scratch);
        let mut col = vec![C64::new(0.0, 0.0); nx];
        for ix in 0..nx {
            for iy in 0..nx {
                col[iy] = data[iy * nx + ix];
            }
            plan.process_with_scratch(&mut col, &mut scratch);
            for iy in 0..nx {
                data[iy * nx + ix] = col[iy];
            }
        }
    }

    /// Forward transform of a copy.
    pub fn to_spectral(&self, values: &[C64]) -> Vec<C64> {
        let mut v = values.to_vec();
        self.fft(&mut v);
        v
    }

    /// Apply a Fourier multiplier `m(idx)` to spectral data and return physical values.
    pub fn apply_multiplier(&self, spec: &[C64], m: impl Fn(usize) -> C64) -> Vec<C64> {
        let mut v: Vec<C64> = spec.iter().enumerate().map(|(i, c)| c * m(i)).collect();
        self.ifft(&mut v);
        v
    }

    /// `∂^α f` of physical values by spectral differentiation.
    pub fn derivative(&self, values: &[C64], ax: u32, ay: u32) -> Vec<C64> {
        if ax == 0 && ay == 0 {
            return values.to_vec();
        }
        let s = self.to_spectral(values);
        self.apply_multiplier(&s, |i| self.deriv_symbol(i, ax, ay))
    }

    /// Spectral Laplacian.
    pub fn laplacian(&self, values: &[C64]) -> Vec<C64> {
        let s = self.to_spectral(values);
        self.apply_multiplier(&s, |i| C64::from(-self.xi2(i)))
    }

    /// `h² Σ f` over the box.
    pub fn integrate(&self, values: &[C64]) -> C64 {
        values.iter().sum::<C64>() * (self.h * self.h)
    }

    /// Trigonometric interpolation of spectral data at (x, y).
    pub fn spectral_eval(&self, spec: &[C64], x: f64, y: f64) -> C64 {
        let nx = self.spec.nx;
        let l = self.spec.half_width;
        let phase = |k: f64, i: usize, t: f64| -> C64 {
            if i == nx / 2 {
                C64::from((k * (t + l)).cos())
            } else {
                C64::from_polar(1.0, k * (t + l))
            }
        };
        let ex: Vec<C64> = (0..nx).map(|i| phase(self.k_full[i], i, x)).collect();
        let mut total = C64::new(0.0, 0.0);
        for iy in 0..nx {
            let row = &spec[iy * nx..(iy + 1) * nx];
            let s: C64 = row.iter().zip(&ex).map(|(a, b)| a * b).sum();
            total += s * phase(self.k_full[iy], iy, y);
        }
        total / (nx * nx) as f64
    }

    /// Bilinear interpolation of physical values; zero outside the box.
    pub fn bilinear(&self, values: &[C64], x: f64, y: f64) -> C64 {
        let nx = self.spec.nx;
        let l = self.spec.half_width;
        if x < -l || y < -l || x >= l || y >= l {
            return C64::new(0.0, 0.0);
        }
        let fx = (x + l) / self.h;
        let fy = (y + l) / self.h;
        let (ix, iy) = (fx.floor() as usize, fy.floor() as usize);
        let (tx, ty) = (fx - ix as f64, fy - iy as f64);
        let (jx, jy) = ((ix + 1) % nx, (iy + 1) % nx);
        let v = |a: usize, b: usize| values[b * nx + a];
        v(ix, iy) * ((1.0 - tx) * (1.0 - ty))
            + v(jx, iy) * (tx * (1.0 - ty))
            + v(ix, jy) * ((1.0 - tx) * ty)
            + v(jx, jy) * (tx * ty)
    }

    /// Whether (x, y) lies in the box.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let l = self.spec.half_width;
        x >= -l && y >= -l && x < l && y < l
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fft_roundtrip_and_derivative() {
        let g = GridSpec::default().with_box(8.0, 64).build();
        let vals: Vec<C64> = g.points().iter().map(|p| C64::from((-(p.r * p.r)).exp())).collect();
        let mut s = vals.clone();
        g.fft(&mut s);
        g.ifft(&mut s);
        for (a, b) in s.iter().zip(&vals) {
            assert!((a - b).norm() < 1e-14);
        }
        let dx = g.derivative(&vals, 1, 0);
        for (p, d) in g.points().iter().zip(&dx) {
            let exact = -2.0 * p.x * (-(p.r * p.r)).exp();
            assert!((d.re - exact).abs() < 1e-10);
        }
    }

    #[test]
    fn spectral_interpolation() {
        let g = GridSpec::default().with_box(8.0, 64).build();
        let vals: Vec<C64> = g.points().iter().map(|p| C64::from((-(p.r * p.r) / 2.0).exp())).collect();
        let s = g.to_spectral(&vals);
        let v = g.spectral_eval(&s, 0.3, -0.71);
        assert!((v.re - (-(0.09 + 0.5041) / 2.0f64).exp()).abs() < 1e-12);
    }
}
