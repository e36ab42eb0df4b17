//! Reference computations used to cross-check the main solvers.
//!
//! Nothing here touches the field machinery: the FFT plans, wavenumbers,
//! quadrature nodes and time stepping are set up independently.

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("time must be positive, got {0}")]
    NonPositiveTime(f64),
    #[error("input does not decay at the box boundary (max {0:.3e})")]
    NonDecaying(f64),
    #[error("bad input: {0}")]
    Shape(String),
}

/// Gauss–Hermite nodes and weights for `∫ f(y) e^{−y²} dy`.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let pim4 = PI.powf(-0.25);
    let m = n.div_ceil(2);
    let mut z = 0.0f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * n as f64 + 1.0).sqrt() - 1.85575 * (2.0 * n as f64 + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * (n as f64).powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            // Orthonormal Hermite recurrence.
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = z * (2.0 / (j as f64 + 1.0)).sqrt() * p2 - (j as f64 / (j as f64 + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * n as f64).sqrt() * p2;
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() < 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// `(S(t)g)(x) = (4πνt)^{-1} ∫ e^{−|x−y|²/(4νt)} g(y) dy` by tensor Gauss–Hermite.
pub fn gauss_hermite_heat(
    point: (f64, f64),
    t: f64,
    nu: f64,
    nodes: usize,
    g: impl Fn(f64, f64) -> C64,
) -> Result<C64, OracleError> {
    if t <= 0.0 || nu * t <= 0.0 {
        return Err(OracleError::NonPositiveTime(t));
    }
    let (y, w) = gauss_hermite(nodes);
    let s = 2.0 * (nu * t).sqrt();
    let mut total = C64::new(0.0, 0.0);
    for (yi, wi) in y.iter().zip(&w) {
        let mut row = C64::new(0.0, 0.0);
        for (yj, wj) in y.iter().zip(&w) {
            row += *wj * g(point.0 + s * yi, point.1 + s * yj);
        }
        total += *wi * row;
    }
    Ok(total / PI)
}

/// `(1/(1+4νt/s))·e^{−|x|²/(s+4νt)}`: heat evolution of `e^{−|x|²/s}`.
pub fn gaussian_heat_closed_form(x: f64, y: f64, t: f64, nu: f64, s: f64) -> f64 {
    let d = s + 4.0 * nu * t;
    (s / d) * (-(x * x + y * y) / d).exp()
}

/// Five-point Laplacian on an `nx × nx` row-major grid (x fastest).
/// Boundary entries are left as zero.
pub fn fd_laplacian(values: &[f64], nx: usize, h: f64) -> Vec<f64> {
    let mut out = vec![0.0; values.len()];
    let at = |i: usize, j: usize| values[j * nx + i];
    for j in 1..nx - 1 {
        for i in 1..nx - 1 {
            out[j * nx + i] = (at(i + 1, j) + at(i - 1, j) + at(i, j + 1) + at(i, j - 1) - 4.0 * at(i, j)) / (h * h);
        }
    }
    out
}

/// Samples on the periodic box `[−L, L)²`, `x_i = −L + i·2L/nx`.
#[derive(Clone, Debug)]
pub struct PeriodicField {
    pub half_width: f64,
    pub nx: usize,
    /// One row-major array per component.
    pub comps: Vec<Vec<f64>>,
}

impl PeriodicField {
    pub fn from_fn(half_width: f64, nx: usize, ncomp: usize, f: impl Fn(f64, f64) -> Vec<f64>) -> Self {
        let h = 2.0 * half_width / nx as f64;
        let mut comps = vec![vec![0.0; nx * nx]; ncomp];
        for j in 0..nx {
            for i in 0..nx {
                let v = f(-half_width + i as f64 * h, -half_width + j as f64 * h);
                for c in 0..ncomp {
                    comps[c][j * nx + i] = v[c];
                }
            }
        }
        Self { half_width, nx, comps }
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.nx as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }
}

struct Spectral {
    nx: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    k: Vec<f64>,
    keep: Vec<bool>,
}

impl Spectral {
    fn new(nx: usize, half_width: f64) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(nx);
        let inv = planner.plan_fft_inverse(nx);
        let k: Vec<f64> = (0..nx)
            .map(|i| {
                let n = if i <= nx / 2 { i as f64 } else { i as f64 - nx as f64 };
                n * PI / half_width
            })
            .collect();
        let cut = nx as f64 / 3.0;
        let keep = (0..nx)
            .map(|i| {
                let n = if i <= nx / 2 { i as f64 } else { nx as f64 - i as f64 };
                n < cut
            })
            .collect();
        Self { nx, fwd, inv, k, keep }
    }

    fn transform(&self, data: &mut [C64], forward: bool) {
        let n = self.nx;
        let plan = if forward { &self.fwd } else { &self.inv };
        for row in data.chunks_mut(n) {
            plan.process(row);
        }
        let mut col = vec![C64::new(0.0, 0.0); n];
        for i in 0..n {
            for j in 0..n {
                col[j] = data[j * n + i];
            }
            plan.process(&mut col);
            for j in 0..n {
                data[j * n + i] = col[j];
            }
        }
        if !forward {
            let s = 1.0 / (n * n) as f64;
            data.iter_mut().for_each(|v| *v *= s);
        }
    }

    fn forward(&self, v: &[f64]) -> Vec<C64> {
        let mut d: Vec<C64> = v.iter().map(|&x| C64::from(x)).collect();
        self.transform(&mut d, true);
        d
    }

    fn backward(&self, mut d: Vec<C64>) -> Vec<f64> {
        self.transform(&mut d, false);
        d.into_iter().map(|c| c.re).collect()
    }

    fn kx(&self, idx: usize) -> f64 {
        self.k[idx % self.nx]
    }
    fn ky(&self, idx: usize) -> f64 {
        self.k[idx / self.nx]
    }
    fn k2(&self, idx: usize) -> f64 {
        self.kx(idx).powi(2) + self.ky(idx).powi(2)
    }
    fn dealias(&self, idx: usize) -> bool {
        self.keep[idx % self.nx] && self.keep[idx / self.nx]
    }

    /// Velocity (without mean) from vorticity spectrum.
    fn velocity(&self, w: &[C64]) -> (Vec<f64>, Vec<f64>) {
        let mut ux = vec![C64::new(0.0, 0.0); w.len()];
        let mut uy = ux.clone();
        for i in 0..w.len() {
            let k2 = self.k2(i);
            if k2 > 0.0 {
                let psi = -w[i] / k2;
                ux[i] = -C64::i() * self.ky(i) * psi;
                uy[i] = C64::i() * self.kx(i) * psi;
            }
        }
        (self.backward(ux), self.backward(uy))
    }

    /// `−(U + u)·∇ω`, dealiased, in spectral form.
    fn advection(&self, w: &[C64], mean: (f64, f64)) -> Vec<C64> {
        let mut wt = w.to_vec();
        for (i, v) in wt.iter_mut().enumerate() {
            if !self.dealias(i) {
                *v = C64::new(0.0, 0.0);
            }
        }
        let (ux, uy) = self.velocity(&wt);
        let wx = self.backward(wt.iter().enumerate().map(|(i, v)| C64::i() * self.kx(i) * v).collect());
        let wy = self.backward(wt.iter().enumerate().map(|(i, v)| C64::i() * self.ky(i) * v).collect());
        let prod: Vec<f64> = (0..w.len()).map(|i| -((ux[i] + mean.0) * wx[i] + (uy[i] + mean.1) * wy[i])).collect();
        let mut out = self.forward(&prod);
        for (i, v) in out.iter_mut().enumerate() {
            if !self.dealias(i) {
                *v = C64::new(0.0, 0.0);
            }
        }
        out
    }
}

/// Periodic vorticity-form Navier–Stokes with integrating-factor RK4.
///
/// `u0` holds two velocity components; its mean is carried along unchanged.
/// Returns snapshots (time, velocity) at every multiple of `save_every`
/// steps and at `t_end`.
pub fn periodic_ns_reference(
    u0: &PeriodicField,
    nu: f64,
    t_end: f64,
    dt: f64,
    save_every: usize,
) -> Result<Vec<(f64, PeriodicField)>, OracleError> {
    let nx = u0.nx;
    if u0.comps.len() != 2 || u0.comps.iter().any(|c| c.len() != nx * nx) {
        return Err(OracleError::Shape("need two components of nx² samples".into()));
    }
    if dt <= 0.0 || t_end < 0.0 {
        return Err(OracleError::NonPositiveTime(dt));
    }
    let sp = Spectral::new(nx, u0.half_width);
    let mean = (
        u0.comps[0].iter().sum::<f64>() / (nx * nx) as f64,
        u0.comps[1].iter().sum::<f64>() / (nx * nx) as f64,
    );
    let mut edge: f64 = 0.0;
    for (c, m) in u0.comps.iter().zip([mean.0, mean.1]) {
        for i in 0..nx {
            for v in [c[i], c[(nx - 1) * nx + i], c[i * nx], c[i * nx + nx - 1]] {
                edge = edge.max((v - m).abs());
            }
        }
    }
    if edge > 1e-8 {
        return Err(OracleError::NonDecaying(edge));
    }
    let ux = sp.forward(&u0.comps[0]);
    let uy = sp.forward(&u0.comps[1]);
    let mut w: Vec<C64> = (0..nx * nx).map(|i| C64::i() * (sp.kx(i) * uy[i] - sp.ky(i) * ux[i])).collect();

    let snapshot = |w: &[C64], t: f64| {
        let (vx, vy) = sp.velocity(w);
        let comps = vec![vx.iter().map(|v| v + mean.0).collect(), vy.iter().map(|v| v + mean.1).collect()];
        (t, PeriodicField { half_width: u0.half_width, nx, comps })
    };

    let steps = (t_end / dt).ceil() as usize;
    let mut out = vec![snapshot(&w, 0.0)];
    let mut t = 0.0;
    for s in 0..steps {
        let h = (t_end - t).min(dt);
        let half: Vec<f64> = (0..nx * nx).map(|i| (-nu * sp.k2(i) * h / 2.0).exp()).collect();
        let full: Vec<f64> = half.iter().map(|e| e * e).collect();
        let k1 = sp.advection(&w, mean);
        let a: Vec<C64> = (0..w.len()).map(|i| (w[i] + 0.5 * h * k1[i]) * half[i]).collect();
        let k2 = sp.advection(&a, mean);
        let b: Vec<C64> = (0..w.len()).map(|i| w[i] * half[i] + 0.5 * h * k2[i]).collect();
        let k3 = sp.advection(&b, mean);
        let c: Vec<C64> = (0..w.len()).map(|i| w[i] * full[i] + h * k3[i] * half[i]).collect();
        let k4 = sp.advection(&c, mean);
        for i in 0..w.len() {
            w[i] = w[i] * full[i] + h / 6.0 * (k1[i] * full[i] + 2.0 * (k2[i] + k3[i]) * half[i] + k4[i]);
        }
        t += h;
        if (s + 1) % save_every.max(1) == 0 || s + 1 == steps {
            out.push(snapshot(&w, t));
        }
    }
    Ok(out)
}

/// Mean vorticity of a velocity sample, `⟨∂_x u_y − ∂_y u_x⟩`.
pub fn mean_vorticity(u: &PeriodicField) -> f64 {
    let sp = Spectral::new(u.nx, u.half_width);
    let ux = sp.forward(&u.comps[0]);
    let uy = sp.forward(&u.comps[1]);
    (C64::i() * (sp.kx(0) * uy[0] - sp.ky(0) * ux[0])).re / (u.nx * u.nx) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_moments() {
        let (x, w) = gauss_hermite(20);
        let m0: f64 = w.iter().sum();
        let m2: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
        let m4: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
        assert!((m0 - PI.sqrt()).abs() < 1e-13);
        assert!((m2 - PI.sqrt() / 2.0).abs() < 1e-13);
        assert!((m4 - 0.75 * PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn fd_laplacian_examples() {
        let nx = 21;
        let h = 0.1;
        let grid = |f: &dyn Fn(f64, f64) -> f64| {
            let mut v = vec![0.0; nx * nx];
            for j in 0..nx {
                for i in 0..nx {
                    v[j * nx + i] = f(i as f64 * h - 1.0, j as f64 * h - 1.0);
                }
            }
            v
        };
        let c = fd_laplacian(&grid(&|_, _| 3.0), nx, h);
        assert!(c.iter().all(|v| v.abs() < 1e-12));
        let q = fd_laplacian(&grid(&|x, y| x * x + y * y), nx, h);
        for j in 1..nx - 1 {
            for i in 1..nx - 1 {
                assert!((q[j * nx + i] - 4.0).abs() < 1e-10);
            }
        }
    }
}
