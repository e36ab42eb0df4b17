//! Heat semigroup `S_ν(z)` for real or complex time.
//!
//! On a term `t` the evolution is the truncated exponential
//! `A(z) = Σ_j (νz)^j/j! Δ_A^j t`, kept while the power stays ≤ `k_max`.
//! Writing `S(z)(χt) = χA(z) + G(z)`, the correction `G` solves a forced
//! heat equation whose forcing is polynomial in time:
//! `ν[Δ,χ]A(σ)` plus the discarded top order `ν(νσ)^J/J! χΔ_A^{J+1}t`.
//! Both pieces are smooth and decay fast, so `G` is computed exactly in
//! time with φ-functions on the grid:
//! `Ĝ = Σ_j ĉ_j z^{j+1} φ_{j+1}(−ν|ξ|²z)`.

use crate::fields::terms::{sample_into, Weight};
use crate::fields::{AsymptoticField, AsymptoticPart, FieldError, Grid, GridSpec, RemainderGrid, SpaceParams};
use crate::fit::{fit_loglog, LineFit};
use crate::laplace::{derivative_multi, lap_asym, wave_packet, ScanResult};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// A complex time inside a sector `|arg z| < θ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorPoint {
    pub z: C64,
    pub theta: f64,
}

impl SectorPoint {
    pub fn new(z: C64, theta: f64) -> Self {
        Self { z, theta }
    }

    pub fn within(&self) -> bool {
        self.z == C64::new(0.0, 0.0) || self.z.arg().abs() < self.theta
    }
}

fn check_time(z: C64) -> Result<(), FieldError> {
    if z.re < 0.0 {
        return Err(FieldError::Precondition(format!("Re z = {} < 0", z.re)));
    }
    Ok(())
}

/// `φ_0(w), …, φ_n(w)` with `φ_k(w) = Σ_i w^i/(i+k)!`.
pub fn phi_functions(w: C64, n: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); n + 1];
    if w.norm() < 5.0 {
        for (k, o) in out.iter_mut().enumerate() {
            // Σ_i w^i/(i+k)!
            let mut term = C64::new(1.0, 0.0);
            for i in 1..=k {
                term /= i as f64;
            }
            let mut sum = C64::new(0.0, 0.0);
            let mut i = 0usize;
            loop {
                sum += term;
                i += 1;
                term = term * w / (i + k) as f64;
                if term.norm() < 1e-17 * sum.norm().max(1e-300) || i > 200 {
                    break;
                }
            }
            *o = sum;
        }
    } else {
        out[0] = w.exp();
        let mut fact = 1.0;
        for k in 0..n {
            if k > 0 {
                fact *= k as f64;
            }
            out[k + 1] = (out[k] - 1.0 / fact) / w;
        }
    }
    out
}

/// `f̂ ↦ e^{−ν|ξ|²z} f̂`.
pub fn heat_remainder(f: &RemainderGrid, z: C64, nu: f64) -> Result<RemainderGrid, FieldError> {
    check_time(z)?;
    if z == C64::new(0.0, 0.0) {
        return Ok(f.clone());
    }
    let grid = f.grid();
    let s = grid.to_spectral(f.values());
    let v = grid.apply_multiplier(&s, |i| (-nu * grid.xi2(i) * z).exp());
    Ok(RemainderGrid::new(grid.clone(), v))
}

/// Result of evolving the asymptotic part alone.
#[derive(Clone, Debug)]
pub struct HeatAsym {
    /// `A(z)` summed over all terms.
    pub terms: AsymptoticPart,
    /// Forcing data indexed by the time power `j`.
    pub overflow: HeatForcing,
}

/// Forcing `Σ_j σ^j/j! c_j` of the correction equation, with
/// `c_j = ν^{j+1}([Δ,χ]comm_j + χ·top_j)`.
#[derive(Clone, Debug, Default)]
pub struct HeatForcing {
    pub comm: Vec<AsymptoticPart>,
    pub top: Vec<AsymptoticPart>,
    pub nu: f64,
}

impl HeatForcing {
    pub fn orders(&self) -> usize {
        self.comm.len().max(self.top.len())
    }

    /// Physical grid samples of every `c_j`.
    pub fn sample(&self, grid: &Grid) -> Vec<Vec<C64>> {
        (0..self.orders())
            .map(|j| {
                let s = C64::from(self.nu.powi(j as i32 + 1));
                let mut v = vec![C64::new(0.0, 0.0); grid.len()];
                if let Some(p) = self.comm.get(j) {
                    sample_into(grid, p, Weight::Commutator, s, &mut v);
                }
                if let Some(p) = self.top.get(j) {
                    sample_into(grid, p, Weight::Chi, s, &mut v);
                }
                v
            })
            .collect()
    }
}

/// Time-power expansion of the term evolution: `(coefficient parts P_j, forcing)`
/// with `A(z) = Σ_j (νz)^j/j! P_j`.
pub fn heat_series(part: &AsymptoticPart, k_max: u32, nu: f64) -> (Vec<AsymptoticPart>, HeatForcing) {
    let mut series: Vec<AsymptoticPart> = Vec::new();
    let mut forcing = HeatForcing { nu, ..Default::default() };
    for t in part.terms() {
        let jt = ((k_max.saturating_sub(t.k)) / 2) as usize;
        let mut cur = AsymptoticPart::single(t.k, t.l, t.a.clone());
        for j in 0..=jt {
            if cur.is_empty() {
                break;
            }
            if series.len() <= j {
                series.resize(j + 1, AsymptoticPart::new());
                forcing.comm.resize(j + 1, AsymptoticPart::new());
            }
            series[j].accumulate(&cur, C64::new(1.0, 0.0));
            forcing.comm[j].accumulate(&cur, C64::new(1.0, 0.0));
            cur = lap_asym(&cur);
            if j == jt && !cur.is_empty() {
                if forcing.top.len() <= j {
                    forcing.top.resize(j + 1, AsymptoticPart::new());
                }
                forcing.top[j].accumulate(&cur, C64::new(1.0, 0.0));
            }
        }
    }
    let series = series.into_iter().map(|p| p.cleaned()).collect();
    forcing.comm = forcing.comm.into_iter().map(|p| p.cleaned()).collect();
    forcing.top = forcing.top.into_iter().map(|p| p.cleaned()).collect();
    (series, forcing)
}

/// Evaluate `Σ_j (νz)^j/j! P_j`.
pub fn sum_series(series: &[AsymptoticPart], z: C64, nu: f64) -> AsymptoticPart {
    let mut out = AsymptoticPart::new();
    let mut c = C64::new(1.0, 0.0);
    for (j, p) in series.iter().enumerate() {
        if j > 0 {
            c *= nu * z / j as f64;
        }
        out.accumulate(p, c);
    }
    out.cleaned()
}

/// Truncated exponential evolution of the terms, with the discarded
/// orders reported as forcing.
pub fn heat_asym(part: &AsymptoticPart, z: C64, nu: f64, k_max: u32) -> HeatAsym {
    let (series, overflow) = heat_series(part, k_max, nu);
    HeatAsym { terms: sum_series(&series, z, nu), overflow }
}

/// `S_ν(z)u`.
pub fn heat_field(u: &AsymptoticField, z: C64, nu: f64) -> Result<AsymptoticField, FieldError> {
    check_time(z)?;
    if z == C64::new(0.0, 0.0) {
        return Ok(u.clone());
    }
    let grid = u.grid();
    let ha = heat_asym(u.terms(), z, nu, grid.spec.k_max);
    let mut f = grid.to_spectral(u.rem().values());
    let sources: Vec<Vec<C64>> = ha.overflow.sample(grid).into_iter().map(|v| grid.to_spectral(&v)).collect();
    let nj = sources.len();
    let zp: Vec<C64> = (0..=nj).map(|j| z.powi(j as i32)).collect();
    for (i, v) in f.iter_mut().enumerate() {
        let w = -nu * grid.xi2(i) * z;
        if nj == 0 {
            *v *= w.exp();
            continue;
        }
        let phi = phi_functions(w, nj);
        let mut acc = *v * phi[0];
        for (j, c) in sources.iter().enumerate() {
            acc += c[i] * zp[j + 1] * phi[j + 1];
        }
        *v = acc;
    }
    grid.ifft(&mut f);
    Ok(AsymptoticField::new(u.params, ha.terms, RemainderGrid::new(grid.clone(), f)))
}

/// Slope of `log max_u ‖∂^α S(z)u‖/‖u‖` against `log|z|` on `arg z = phi`.
pub fn smoothing_scan(probes: &[AsymptoticField], alpha: (u32, u32), phi: f64, radii: &[f64], nu: f64) -> Result<ScanResult, FieldError> {
    scan_generic(probes, radii, |p, r| {
        let z = C64::from_polar(r, phi);
        let s = heat_field(p, z, nu)?;
        let mut q = p.params;
        q.m += alpha.0 + alpha.1;
        let d = derivative_multi(&s.with_params(q), alpha)?.with_params(p.params);
        Ok(d.a_norm())
    })
}

/// Shifted-space scan: `‖S(z)v‖_{A^{m+τ}_{n,N}} / ‖v‖_{A^m_{n+τ,N+τ}}`,
/// probes given in the shifted space.
pub fn shift_scan(probes: &[AsymptoticField], tau: u32, phi: f64, radii: &[f64], nu: f64) -> Result<ScanResult, FieldError> {
    scan_generic(probes, radii, |p, r| {
        let z = C64::from_polar(r, phi);
        let s = heat_field(p, z, nu)?;
        let mut q = p.params;
        q.m += tau;
        q.n = q.n.saturating_sub(tau);
        q.big_n = q.big_n.saturating_sub(tau);
        Ok(s.with_params(q).a_norm())
    })
}

/// Modulated Gaussians spread over three grids so that every frequency
/// from 0 to about 140 is hit by a packet much wider than its wavelength.
/// Each frequency is used along `x` and along the diagonal.
pub fn smoothing_probes(params: SpaceParams) -> Vec<AsymptoticField> {
    let tiers: [(f64, usize, f64, &[f64]); 3] = [
        (12.8, 128, 2.5, &[0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 5.5]),
        (4.8, 256, 0.8, &[7.0, 9.0, 12.0, 16.0, 21.0, 28.0, 36.0]),
        (1.6, 256, 0.25, &[48.0, 64.0, 85.0, 110.0, 140.0]),
    ];
    let mut out = Vec::new();
    for (half_width, nx, width, freqs) in tiers {
        let grid = GridSpec::default().with_box(half_width, nx).build();
        for &k in freqs {
            out.push(wave_packet(&grid, params, (k, 0.0), width));
            if k > 0.0 {
                let d = k / std::f64::consts::SQRT_2;
                out.push(wave_packet(&grid, params, (d, d), width));
            }
        }
    }
    out
}

fn scan_generic(
    probes: &[AsymptoticField],
    radii: &[f64],
    f: impl Fn(&AsymptoticField, f64) -> Result<f64, FieldError>,
) -> Result<ScanResult, FieldError> {
    if radii.len() < 2 || probes.is_empty() {
        return Err(FieldError::Precondition("sweep needs ≥ 2 radii and ≥ 1 probe".into()));
    }
    let norms: Vec<f64> = probes.iter().map(|p| p.a_norm()).collect();
    let mut ratio = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut best: f64 = 0.0;
        for (p, &n0) in probes.iter().zip(&norms) {
            if n0 > 0.0 {
                best = best.max(f(p, r)? / n0);
            }
        }
        ratio.push(best);
    }
    let fit: LineFit = fit_loglog(radii, &ratio).ok_or_else(|| FieldError::Precondition("degenerate sweep".into()))?;
    Ok(ScanResult { abscissa: radii.to_vec(), ratio, fit })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_branches_agree() {
        for w in [C64::new(-4.99, 0.0), C64::new(-5.01, 0.0), C64::new(-3.5, 3.6)] {
            let a = phi_functions(w, 6);
            let b = phi_functions(w * (1.0 + 1e-12), 6);
            for k in 0..=6 {
                assert!((a[k] - b[k]).norm() < 1e-10 * a[k].norm());
            }
        }
        // φ_1(w) = (e^w − 1)/w
        let w = C64::new(-7.0, 1.0);
        let p = phi_functions(w, 1);
        assert!((p[1] - (w.exp() - 1.0) / w).norm() < 1e-15);
        let w = C64::new(-0.3, 0.0);
        let p = phi_functions(w, 2);
        assert!((p[2] - (w.exp() - 1.0 - w) / (w * w)).norm() < 1e-13);
    }
}
