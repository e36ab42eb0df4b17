//! Laplacian, inverse Laplacian and resolvent on asymptotic fields.
//!
//! Terms are handled exactly through the polar formula
//! `Δ(a logˡr / rᵏ)`; everything compactly supported or fast decaying
//! goes through Fourier multipliers on the periodic grid.
//!
//! The inverse is normalized by minimal log degree and never adds
//! harmonic terms `r^{±|j|} e^{ijθ}` of its own; the grid inverse extracts
//! the harmonic multipoles of its source first so that the periodic solve
//! only sees data with vanishing low moments.

use crate::angular::AngularFunction;
use crate::fields::terms::{sample, sample_into, Weight};
use crate::fields::{AsymptoticField, AsymptoticPart, AsymptoticTerm, FieldError, Grid, RemainderGrid};
use crate::fit::{fit_loglog, LineFit};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Outcome of inverting one angular mode of one term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResonanceReport {
    pub k: u32,
    pub j: i64,
    pub resonant: bool,
    pub log_raise: u32,
}

/// Σ_{ω,ε} and R_{β,ε} parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorSpec {
    pub omega: f64,
    pub epsilon: f64,
    pub beta: f64,
}

impl SectorSpec {
    pub fn contains(&self, lambda: C64) -> bool {
        let z = lambda - self.omega;
        z.norm() > 0.0 && z.arg().abs() <= PI - self.epsilon
    }

    pub fn contains_r(&self, lambda: C64) -> bool {
        lambda.norm() >= self.beta && lambda.arg().abs() <= PI - self.epsilon
    }
}

/// `Δ(a (log r)^l / r^k)` in dimension `d`, as terms at power k+2.
///
/// The angular part uses the circle Laplace–Beltrami operator, so for
/// `d ≠ 2` only angularly constant `a` is meaningful.
pub fn lap_asym_term(t: &AsymptoticTerm, d: u32) -> Vec<AsymptoticTerm> {
    let k = t.k as f64;
    let l = t.l;
    let d = d as f64;
    let mut out = Vec::new();
    let diag = t.a.lap_beltrami().add(&t.a.scale(k * (k + 2.0 - d)));
    out.push(AsymptoticTerm::new(t.k + 2, l, diag));
    if l >= 1 {
        out.push(AsymptoticTerm::new(t.k + 2, l - 1, t.a.scale(-(l as f64) * (2.0 * k + 2.0 - d))));
    }
    if l >= 2 {
        out.push(AsymptoticTerm::new(t.k + 2, l - 2, t.a.scale((l * (l - 1)) as f64)));
    }
    out.retain(|t| t.a.max_abs() > 0.0);
    out
}

/// `Δ_A` applied term-wise in the plane.
pub fn lap_asym(part: &AsymptoticPart) -> AsymptoticPart {
    let mut out = AsymptoticPart::new();
    for t in part.terms() {
        for s in lap_asym_term(&t, 2) {
            out.push(s);
        }
    }
    out.cleaned()
}

/// Minimal-log inverse of Δ for one term at power `s = k + 2 ≥ 2` (d = 2).
pub fn inv_lap_term(t: &AsymptoticTerm) -> Result<(Vec<AsymptoticTerm>, Vec<ResonanceReport>), FieldError> {
    if t.k < 2 {
        return Err(FieldError::PowerTooLow { k: t.k });
    }
    let k = t.k - 2;
    let kf = k as f64;
    let l = t.l as usize;
    let m = t.a.cutoff() as i64;
    // b[p][j + m]
    let mut b = vec![vec![C64::new(0.0, 0.0); (2 * m + 1) as usize]; l + 3];
    let mut reports = Vec::new();
    for j in -m..=m {
        let g = t.a.mode(j);
        if g == C64::new(0.0, 0.0) {
            continue;
        }
        let ji = (j + m) as usize;
        let diag = (k as i64 * k as i64 - j * j) as f64;
        let mut col = vec![C64::new(0.0, 0.0); l + 3];
        let src = |p: usize| if p == l { g } else { C64::new(0.0, 0.0) };
        let raise;
        if diag != 0.0 {
            raise = 0;
            for p in (0..=l).rev() {
                col[p] = (src(p) + col[p + 1] * (2.0 * kf * (p + 1) as f64) - col[p + 2] * ((p + 2) * (p + 1)) as f64)
                    / diag;
            }
        } else if k > 0 {
            raise = 1;
            for p in (0..=l).rev() {
                col[p + 1] = (col[p + 2] * ((p + 2) * (p + 1)) as f64 - src(p)) / (2.0 * kf * (p + 1) as f64);
            }
        } else {
            raise = 2;
            for p in (0..=l).rev() {
                col[p + 2] = src(p) / ((p + 2) * (p + 1)) as f64;
            }
        }
        for p in 0..l + 3 {
            b[p][ji] = col[p];
        }
        reports.push(ResonanceReport { k, j, resonant: raise > 0, log_raise: raise });
    }
    let out = b
        .into_iter()
        .enumerate()
        .filter(|(_, modes)| modes.iter().any(|c| *c != C64::new(0.0, 0.0)))
        .map(|(p, modes)| AsymptoticTerm::new(k, p as u32, AngularFunction::from_modes(modes).trimmed()))
        .collect();
    Ok((out, reports))
}

/// Term-wise inverse of a whole part.
pub fn inv_lap_asym(part: &AsymptoticPart) -> Result<AsymptoticPart, FieldError> {
    let mut out = AsymptoticPart::new();
    for t in part.terms() {
        for s in inv_lap_term(&t)?.0 {
            out.push(s);
        }
    }
    Ok(out.cleaned())
}

/// Highest multipole order extracted before a periodic Poisson solve.
fn multipole_order(grid: &Grid) -> u32 {
    grid.spec.k_max.saturating_sub(3)
}

/// Solve `Δw = g` for fast-decaying grid data `g`: harmonic multipoles
/// `log r`, `e^{±ijθ}/r^j` are matched to the moments of `g` and returned as
/// terms; the rest is inverted with `−1/|ξ|²` (zero mode dropped).
pub fn poisson_grid(grid: &Grid, g: &[C64]) -> (AsymptoticPart, Vec<C64>) {
    let jmax = multipole_order(grid);
    let h2 = grid.h * grid.h;
    let mut mom_bar = vec![C64::new(0.0, 0.0); jmax as usize + 1];
    let mut mom = vec![C64::new(0.0, 0.0); jmax as usize + 1];
    for (p, v) in grid.points().iter().zip(g) {
        if *v == C64::new(0.0, 0.0) {
            continue;
        }
        let z = C64::new(p.x, p.y);
        let zb = z.conj();
        let (mut a, mut b) = (C64::new(1.0, 0.0), C64::new(1.0, 0.0));
        for j in 0..=jmax as usize {
            mom_bar[j] += v * a;
            mom[j] += v * b;
            a *= zb;
            b *= z;
        }
    }
    let mut terms = AsymptoticPart::new();
    terms.push(AsymptoticTerm::new(0, 1, AngularFunction::constant(mom_bar[0] * h2 / (2.0 * PI))));
    for j in 1..=jmax as usize {
        let s = -1.0 / (4.0 * PI * j as f64);
        let jj = j as i64;
        let a = AngularFunction::exp_mode(jj, mom_bar[j] * h2 * s).add(&AngularFunction::exp_mode(-jj, mom[j] * h2 * s));
        terms.push(AsymptoticTerm::new(j as u32, 0, a));
    }
    let terms = terms.cleaned();
    let mut src = g.to_vec();
    sample_into(grid, &terms, Weight::Commutator, C64::new(-1.0, 0.0), &mut src);
    grid.fft(&mut src);
    for (i, v) in src.iter_mut().enumerate() {
        let q = grid.xi2(i);
        *v = if q == 0.0 { C64::new(0.0, 0.0) } else { -*v / q };
    }
    grid.ifft(&mut src);
    (terms, src)
}

/// `Δ^{-1} g` for fields without terms of power below 2.
pub fn inv_lap_field(g: &AsymptoticField) -> Result<AsymptoticField, FieldError> {
    if let Some((k, _, _)) = g.terms().iter().find(|(k, _, _)| *k < 2) {
        return Err(FieldError::PowerTooLow { k });
    }
    let grid = g.grid();
    let w = inv_lap_asym(g.terms())?;
    let mut src = g.rem().values().to_vec();
    sample_into(grid, &w, Weight::Commutator, C64::new(-1.0, 0.0), &mut src);
    let (multi, vals) = poisson_grid(grid, &src);
    let p = g.params;
    let params = crate::fields::SpaceParams {
        m: p.m + 2,
        n: p.n.saturating_sub(2),
        big_n: p.big_n.saturating_sub(2),
        ell: p.ell + 2,
        gamma0: p.gamma0,
    };
    Ok(AsymptoticField::new(params, w.add(&multi), RemainderGrid::new(grid.clone(), vals)))
}

/// `Δu` on the field level.
pub fn lap_field(u: &AsymptoticField) -> Result<AsymptoticField, FieldError> {
    if u.params.m < 2 {
        return Err(FieldError::Regularity { needed: 2, have: u.params.m });
    }
    let grid = u.grid();
    let mut vals = grid.laplacian(u.rem().values());
    sample_into(grid, u.terms(), Weight::Commutator, C64::new(1.0, 0.0), &mut vals);
    let p = u.params;
    let params = crate::fields::SpaceParams { m: p.m - 2, n: p.n + 2, big_n: p.big_n + 2, ell: p.ell - 2, gamma0: p.gamma0 };
    Ok(AsymptoticField::new(params, lap_asym(u.terms()), RemainderGrid::new(grid.clone(), vals)))
}

fn check_lambda(lambda: C64) -> Result<(), FieldError> {
    if lambda.im == 0.0 && lambda.re <= 0.0 {
        return Err(FieldError::Precondition(format!("λ = {lambda} lies on the cut (−∞, 0]")));
    }
    Ok(())
}

/// `(1/λ) Σ_{j ≤ jmax} λ^{-j} Δ_A^j t`: the explicit part of the resolvent on a term.
pub fn resolvent_series(part: &AsymptoticPart, lambda: C64, jmax: u32) -> AsymptoticPart {
    let mut out = AsymptoticPart::new();
    let mut cur = part.clone();
    let mut coef = 1.0 / lambda;
    for _ in 0..=jmax {
        out.accumulate(&cur, coef);
        cur = lap_asym(&cur);
        coef /= lambda;
        if cur.is_empty() {
            break;
        }
    }
    out.cleaned()
}

/// `(λ − Δ)^{-1} u`.
pub fn resolvent(u: &AsymptoticField, lambda: C64) -> Result<AsymptoticField, FieldError> {
    check_lambda(lambda)?;
    let grid = u.grid();
    let kmax = grid.spec.k_max;
    let mut src = u.rem().values().to_vec();
    let mut terms = AsymptoticPart::new();
    for t in u.terms().terms() {
        let jt = (kmax - t.k) / 2;
        let single = AsymptoticPart::single(t.k, t.l, t.a.clone());
        // a = Σ_{j≤J} λ^{-j} Δ^j t, so the explicit part is a/λ.
        let a = resolvent_series(&single, lambda, jt).scale(lambda);
        let mut top = single.clone();
        for _ in 0..=jt {
            top = lap_asym(&top);
        }
        let inv_lj = lambda.powi(-(jt as i32) - 1);
        sample_into(grid, &top, Weight::Chi, inv_lj, &mut src);
        sample_into(grid, &a, Weight::Commutator, 1.0 / lambda, &mut src);
        terms.accumulate(&a, 1.0 / lambda);
    }
    let mut s = src;
    grid.fft(&mut s);
    for (i, v) in s.iter_mut().enumerate() {
        *v /= lambda + grid.xi2(i);
    }
    grid.ifft(&mut s);
    let mut params = u.params;
    params.m += 2;
    Ok(AsymptoticField::new(params, terms.cleaned(), RemainderGrid::new(grid.clone(), s)))
}

/// Apply `∂^α` with α = (ax, ay).
pub fn derivative_multi(u: &AsymptoticField, alpha: (u32, u32)) -> Result<AsymptoticField, FieldError> {
    use crate::angular::Axis;
    let mut v = u.clone();
    for _ in 0..alpha.0 {
        v = v.partial_derivative(Axis::X)?;
    }
    for _ in 0..alpha.1 {
        v = v.partial_derivative(Axis::Y)?;
    }
    Ok(v)
}

/// Data of one exponent scan.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanResult {
    pub abscissa: Vec<f64>,
    pub ratio: Vec<f64>,
    pub fit: LineFit,
}

/// Slope of `log max_u ‖∂^α(λ−Δ)^{-1}u‖/‖u‖` against `log|λ|` on the ray `arg λ = arg`.
/// Norms are the probes' own a-norms.
pub fn sectorial_scan(
    probes: &[AsymptoticField],
    arg: f64,
    radii: &[f64],
    alpha: (u32, u32),
) -> Result<ScanResult, FieldError> {
    if radii.len() < 2 || probes.is_empty() {
        return Err(FieldError::Precondition("sweep needs ≥ 2 radii and ≥ 1 probe".into()));
    }
    let mut ratio = Vec::with_capacity(radii.len());
    let norms: Vec<f64> = probes.iter().map(|p| p.a_norm()).collect();
    for &rad in radii {
        let lambda = C64::from_polar(rad, arg);
        let mut best: f64 = 0.0;
        for (p, &n0) in probes.iter().zip(&norms) {
            if n0 == 0.0 {
                continue;
            }
            let r = resolvent(p, lambda)?;
            let d = derivative_multi(&r, alpha)?.with_params(p.params);
            best = best.max(d.a_norm() / n0);
        }
        ratio.push(best);
    }
    let fit = fit_loglog(radii, &ratio).ok_or_else(|| FieldError::Precondition("degenerate sweep".into()))?;
    Ok(ScanResult { abscissa: radii.to_vec(), ratio, fit })
}

/// Remainder probe `e^{i k·x} e^{−|x|²/(2w²)}` (real part if `real`).
pub fn wave_packet(grid: &std::sync::Arc<Grid>, params: crate::fields::SpaceParams, k: (f64, f64), width: f64) -> AsymptoticField {
    AsymptoticField::from_fn(grid.clone(), params, |x, y| {
        C64::from_polar((-(x * x + y * y) / (2.0 * width * width)).exp(), k.0 * x + k.1 * y)
    })
}

/// Probe set for resolvent scans: packets up to frequency about 50 on
/// two grids, along `x` and along the diagonal.
pub fn sectorial_probes(params: crate::fields::SpaceParams) -> Vec<AsymptoticField> {
    use crate::fields::GridSpec;
    let tiers: [(f64, usize, f64, &[f64]); 2] = [
        (12.8, 128, 2.5, &[0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 5.5]),
        (4.8, 256, 0.8, &[7.0, 9.0, 12.0, 16.0, 21.0, 28.0, 36.0, 48.0]),
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

/// Residual helper: `λ·R(λ)u − ΔR(λ)u − u` sampled on the grid.
pub fn resolvent_residual(u: &AsymptoticField, r: &AsymptoticField, lambda: C64) -> Result<Vec<C64>, FieldError> {
    let lr = lap_field(r)?;
    let a = r.grid_values();
    let b = lr.grid_values();
    let c = u.grid_values();
    Ok(a.iter().zip(&b).zip(&c).map(|((a, b), c)| lambda * a - b - c).collect())
}

/// `χ`-weighted sample of terms on the whole grid.
pub fn sample_terms(grid: &Grid, part: &AsymptoticPart) -> Vec<C64> {
    sample(grid, part, Weight::Chi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coeff(ts: &[AsymptoticTerm], k: u32, l: u32, j: i64) -> C64 {
        ts.iter().filter(|t| t.k == k && t.l == l).map(|t| t.a.mode(j)).sum()
    }

    #[test]
    fn lap_examples() {
        let t = AsymptoticTerm::new(1, 0, AngularFunction::cos(1, 1.0));
        assert!(lap_asym_term(&t, 2).is_empty());
        let t = AsymptoticTerm::new(0, 1, AngularFunction::constant(1.0));
        assert!(lap_asym_term(&t, 2).is_empty());
        let t = AsymptoticTerm::new(1, 1, AngularFunction::cos(1, 1.0));
        let out = lap_asym_term(&t, 2);
        assert_eq!(out.len(), 1);
        assert_eq!((out[0].k, out[0].l), (3, 0));
        assert!((out[0].a.mode(1) - C64::from(-1.0)).norm() < 1e-15);
    }

    #[test]
    fn lap_three_dimensional_radial() {
        // Δ(1/r) = 0 in three dimensions; Δ(log r) = 1/r².
        let t = AsymptoticTerm::new(1, 0, AngularFunction::constant(1.0));
        assert!(lap_asym_term(&t, 3).is_empty());
        let t = AsymptoticTerm::new(0, 1, AngularFunction::constant(1.0));
        let out = lap_asym_term(&t, 3);
        assert_eq!(out.len(), 1);
        assert_eq!((out[0].k, out[0].l), (2, 0));
        assert!((out[0].a.mode(0) - C64::from(1.0)).norm() < 1e-15);
    }

    #[test]
    fn inverse_examples() {
        let (o, r) = inv_lap_term(&AsymptoticTerm::new(4, 0, AngularFunction::cos(1, 1.0))).unwrap();
        assert!((coeff(&o, 2, 0, 1) - C64::from(1.0 / 6.0)).norm() < 1e-15);
        assert!(r.iter().all(|r| !r.resonant));
        let (o, r) = inv_lap_term(&AsymptoticTerm::new(3, 0, AngularFunction::cos(1, 1.0))).unwrap();
        assert!((coeff(&o, 1, 1, 1) - C64::from(-0.25)).norm() < 1e-15);
        assert!(r.iter().all(|r| r.resonant && r.log_raise == 1));
        let (o, r) = inv_lap_term(&AsymptoticTerm::new(2, 0, AngularFunction::constant(1.0))).unwrap();
        assert!((coeff(&o, 0, 2, 0) - C64::from(0.5)).norm() < 1e-15);
        assert_eq!(r[0].log_raise, 2);
        assert!(inv_lap_term(&AsymptoticTerm::new(1, 0, AngularFunction::constant(1.0))).is_err());
    }
}
