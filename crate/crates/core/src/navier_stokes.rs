//! Incompressible Navier–Stokes on asymptotic fields.
//!
//! The equation is solved in the pressure-eliminated form
//! `u_t = νΔu + F(u)`, `F(u) = Δ^{-1}∇Q(u) − u·∇u`, `Q(u) = tr([du]²)`,
//! through the Duhamel fixed point
//! `u(t) = S(t)u₀ + ∫₀ᵗ S(t−s)F(u(s)) ds`.
//!
//! Time is discretised by Chebyshev–Lobatto nodes. `F(u)` is interpolated
//! in time between the nodes; after `s = t − τ²` the Duhamel integral of
//! each interpolant is done exactly in space (heat series for terms,
//! φ-functions for the grid part) and by Gauss–Legendre in `τ`. All
//! weights depend only on the nodes, `ν` and `|ξ|²`, so they are tabulated
//! once per solve.
//!
//! Complex time `z = t·e^{iφ}` uses the same scheme with every weight
//! taken along the ray.

use crate::angular::{AngularFunction, Axis};
use crate::fields::{
    make_divergence_free, AsymptoticField, AsymptoticPart, AsymptoticTerm, FieldError, Grid, RemainderGrid, SpaceParams,
    VectorField,
};
use crate::fit::{fit_loglog, geomspace};
use crate::heat::{heat_field, heat_series, phi_functions};
use crate::laplace::{inv_lap_field, lap_field};
use crate::quadrature::{
    bary_weights, chebyshev_lobatto, differentiation_matrix, gauss_legendre_on, lagrange_basis, lobatto_bary_weights,
};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum NsError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("initial datum is not divergence free (max |div| = {0:.3e})")]
    NotDivergenceFree(f64),
    #[error("initial datum has norm {norm:.4e} ≥ ρ = {rho:.4e}")]
    OutsideBall { norm: f64, rho: f64 },
    /// `rejected` lists every attempted horizon, the last one included.
    #[error("no contraction after {} halvings of T (last ratio {ratio:.3})", .rejected.len().saturating_sub(1))]
    NoContraction { rejected: Vec<RestartRecord>, ratio: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("empty probe set")]
    EmptyProbes,
}

/// Which iterate starts the fixed-point loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InitialIterate {
    /// `u⁰(t) = u₀`.
    Datum,
    /// `u⁰(t) = S(t)u₀`.
    Heat,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub nu: f64,
    /// Cap on the existence time.
    pub t0: f64,
    /// Sector half-angle for complex rays.
    pub theta: f64,
    /// Ball radius; defaults to 1.25·‖u₀‖ when absent.
    pub rho: Option<f64>,
    pub n_time: usize,
    pub quad_nodes: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub max_restarts: u32,
    pub initial: InitialIterate,
    /// Use this horizon instead of the one derived from the constants.
    pub t_override: Option<f64>,
    /// Use these constants instead of measuring them.
    pub constants: Option<ConstantEstimates>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            nu: 1.0,
            t0: 0.1,
            theta: PI / 4.0,
            rho: None,
            n_time: 17,
            quad_nodes: 24,
            tol: 1e-8,
            max_iter: 25,
            max_restarts: 6,
            initial: InitialIterate::Heat,
            t_override: None,
            constants: None,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<(), NsError> {
        let pos = [("nu", self.nu), ("T0", self.t0), ("theta", self.theta), ("tol", self.tol)];
        for (name, v) in pos {
            if !(v > 0.0 && v.is_finite()) {
                return Err(NsError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.theta >= PI / 2.0 {
            return Err(NsError::Config(format!("theta = {} must be below π/2", self.theta)));
        }
        if self.n_time < 2 || self.quad_nodes < 1 || self.max_iter < 1 {
            return Err(NsError::Config("n_time ≥ 2, quad_nodes ≥ 1 and max_iter ≥ 1 are required".into()));
        }
        if let Some(r) = self.rho {
            if !(r > 0.0) {
                return Err(NsError::Config(format!("rho must be positive, got {r}")));
            }
        }
        Ok(())
    }
}

/// Measured semigroup bound `M`, smoothing constant `C` and Lipschitz modulus `κ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantEstimates {
    #[serde(rename = "M")]
    pub big_m: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub kappa: f64,
}

// ---------------------------------------------------------------------------
// Nonlinearity

/// `Q(u) = tr([du]²) = Σ_{ij} ∂_j u_i ∂_i u_j`.
pub fn q_of_u(u: &VectorField) -> Result<AsymptoticField, NsError> {
    let j = u.jacobian()?;
    let a = j[0][0].multiply(&j[0][0])?;
    let b = j[0][1].multiply(&j[1][0])?;
    let c = j[1][1].multiply(&j[1][1])?;
    Ok(a.add_scaled(&b, C64::from(2.0))?.add(&c)?)
}

/// `(u·∇)w`.
pub fn transport(u: &VectorField, w: &VectorField) -> Result<VectorField, NsError> {
    let comp = |c: &AsymptoticField| -> Result<AsymptoticField, FieldError> {
        let a = u.comps[0].multiply(&c.partial_derivative(Axis::X)?)?;
        let b = u.comps[1].multiply(&c.partial_derivative(Axis::Y)?)?;
        a.add(&b)
    };
    Ok(w.try_map(comp)?)
}

fn gradient(p: &AsymptoticField) -> Result<VectorField, NsError> {
    Ok(VectorField::new(p.partial_derivative(Axis::X)?, p.partial_derivative(Axis::Y)?))
}

/// Space of `F(u)` for `u` in `A^m_{0,N;0}`.
pub fn f_space(p: SpaceParams) -> SpaceParams {
    SpaceParams { m: p.m.saturating_sub(1), n: 1, big_n: p.big_n + 1, ell: 0, gamma0: p.gamma0 }
}

/// `F(u) = ∇Δ^{-1}Q(u) − u·∇u`.
pub fn f_of_u(u: &VectorField) -> Result<VectorField, NsError> {
    let params = u.params();
    if params.m < 2 {
        return Err(FieldError::Regularity { needed: 2, have: params.m }.into());
    }
    let q = q_of_u(u)?;
    let minus_p = inv_lap_field(&q)?;
    let g = gradient(&minus_p)?;
    let t = transport(u, u)?;
    Ok(g.sub(&t)?.with_params(f_space(params)))
}

/// Pressure `p` with `−Δp = Q(u)`; its grid part has zero mean.
pub fn pressure(u: &VectorField) -> Result<AsymptoticField, NsError> {
    if u.params().m < 2 {
        return Err(FieldError::Regularity { needed: 2, have: u.params().m }.into());
    }
    Ok(inv_lap_field(&q_of_u(u)?)?.scale(-1.0))
}

/// Fréchet derivative `dF(u)w = ∇Δ^{-1}(2 tr(du dw)) − u·∇w − w·∇u`.
pub fn d_f(u: &VectorField, w: &VectorField) -> Result<VectorField, NsError> {
    let ju = u.jacobian()?;
    let jw = w.jacobian()?;
    let mut dq: Option<AsymptoticField> = None;
    for i in 0..2 {
        for k in 0..2 {
            let term = ju[i][k].multiply(&jw[k][i])?;
            dq = Some(match dq {
                None => term,
                Some(acc) => acc.add(&term)?,
            });
        }
    }
    let dq = dq.expect("four terms").scale(2.0);
    let g = gradient(&inv_lap_field(&dq)?)?;
    let t = transport(u, w)?.add(&transport(w, u)?)?;
    Ok(g.sub(&t)?.with_params(f_space(u.params())))
}

// ---------------------------------------------------------------------------
// Constants and existence time

/// `T = 0.99·min{T₀, 1/(4C²κ²ρ²(Mρ+1)²)}`.
pub fn existence_time(rho: f64, est: &ConstantEstimates, t0: f64) -> f64 {
    let c = est.c * est.kappa * rho * (est.big_m * rho + 1.0);
    let bound = if c > 0.0 { 1.0 / (4.0 * c * c) } else { f64::INFINITY };
    0.99 * t0.min(bound)
}

/// `α = 2Cκρ√T`.
pub fn contraction_bound(rho: f64, est: &ConstantEstimates, t: f64) -> f64 {
    2.0 * est.c * est.kappa * rho * t.sqrt()
}

/// Probes for [`estimate_constants`].
#[derive(Clone, Debug)]
pub struct ProbeSet {
    /// Scalar fields in the solution space.
    pub semigroup: Vec<AsymptoticField>,
    /// Scalar fields in the space of `F(u)`.
    pub shifted: Vec<AsymptoticField>,
    /// Velocity pairs inside the ball of radius ρ.
    pub pairs: Vec<(VectorField, VectorField)>,
}

fn random_scalar(rng: &mut ChaCha8Rng, grid: &Arc<Grid>, params: SpaceParams, k_lo: u32) -> AsymptoticField {
    let mut terms = AsymptoticPart::new();
    for k in k_lo..=params.big_n {
        for l in 0..=k.min(1) {
            if rng.gen_bool(0.7) {
                let a = AngularFunction::cos(rng.gen_range(0..4), rng.gen_range(-1.0..1.0))
                    .add(&AngularFunction::sin(rng.gen_range(1..4), rng.gen_range(-1.0..1.0)));
                terms.push(AsymptoticTerm::new(k, l, a));
            }
        }
    }
    let blobs: Vec<(f64, f64, f64, f64)> = (0..3)
        .map(|_| (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(0.5..2.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let rem = RemainderGrid::from_fn(grid.clone(), |x, y| {
        C64::from(blobs.iter().map(|(cx, cy, w, a)| a * (-((x - cx).powi(2) + (y - cy).powi(2)) / (w * w)).exp()).sum::<f64>())
    });
    AsymptoticField::new(params, terms, rem)
}

/// Deterministic part of the shifted suite: centred bumps over a width ladder
/// and one probe per admissible term, so the supremum does not hinge on the
/// random draws.
fn fixed_shifted_probes(grid: &Arc<Grid>, params: SpaceParams) -> Vec<AsymptoticField> {
    let mut out: Vec<AsymptoticField> = geomspace(0.35, 2.0, 6)
        .into_iter()
        .map(|w| AsymptoticField::from_fn(grid.clone(), params, move |x, y| C64::from((-(x * x + y * y) / (w * w)).exp())))
        .collect();
    for k in 1..=params.big_n {
        for l in 0..=k.min(1) {
            let a = AngularFunction::cos(1, 1.0).add(&AngularFunction::sin(2, 0.5));
            out.push(AsymptoticField::from_terms(grid.clone(), params, AsymptoticPart::single(k, l, a)));
        }
    }
    out
}

/// Random divergence-free velocity with terms up to `N` and Gaussian stream blobs.
pub fn random_velocity(rng: &mut ChaCha8Rng, grid: &Arc<Grid>, params: SpaceParams) -> Result<VectorField, NsError> {
    let spec = DatumSpec {
        constant: [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
        swirl: rng.gen_range(-0.2..0.2),
        circulation: rng.gen_range(-1.0..1.0),
        dipole: [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)],
        log_dipole: [0.0, 0.0],
        blobs: (0..3)
            .map(|_| Blob {
                x: rng.gen_range(-3.0..3.0),
                y: rng.gen_range(-3.0..3.0),
                width: rng.gen_range(0.8..2.0),
                amp: rng.gen_range(-1.0..1.0),
            })
            .collect(),
    };
    build_datum(grid, params, &spec)
}

/// Default probe suite: `count` fields of each kind, pairs scaled into the ρ-ball.
pub fn default_probes(grid: &Arc<Grid>, params: SpaceParams, rho: f64, count: usize, seed: u64) -> Result<ProbeSet, NsError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let semigroup = (0..count).map(|_| random_scalar(&mut rng, grid, params, 0)).collect();
    let fs = f_space(params);
    let mut shifted = fixed_shifted_probes(grid, fs);
    shifted.extend((0..count).map(|_| random_scalar(&mut rng, grid, fs, 1)));
    let mut pairs = Vec::with_capacity(count);
    for _ in 0..count {
        let a = random_velocity(&mut rng, grid, params)?;
        let b = random_velocity(&mut rng, grid, params)?;
        let sa = rng.gen_range(0.3..0.95) * rho / a.a_norm();
        let sb = rng.gen_range(0.3..0.95) * rho / b.a_norm();
        pairs.push((a.scale(sa), b.scale(sb)));
    }
    Ok(ProbeSet { semigroup, shifted, pairs })
}

/// Measure `M`, `C` and `κ` on a probe set over `t ∈ (0, T₀]`.
pub fn estimate_constants(probes: &ProbeSet, nu: f64, t0: f64, rho: f64) -> Result<ConstantEstimates, NsError> {
    if probes.semigroup.is_empty() || probes.shifted.is_empty() || probes.pairs.is_empty() {
        return Err(NsError::EmptyProbes);
    }
    let times = geomspace(1e-3 * t0, t0, 5);
    let mut big_m: f64 = 1.0;
    for v in &probes.semigroup {
        let n0 = v.a_norm();
        if n0 == 0.0 {
            continue;
        }
        for &t in &times {
            big_m = big_m.max(heat_field(v, C64::from(t), nu)?.a_norm() / n0);
        }
    }
    let mut c: f64 = 0.0;
    for w in &probes.shifted {
        let n0 = w.a_norm();
        if n0 == 0.0 {
            continue;
        }
        let target = SpaceParams { m: w.params.m + 1, n: 0, big_n: w.params.big_n.saturating_sub(1), ell: 0, gamma0: w.params.gamma0 };
        for &t in &times {
            let s = heat_field(w, C64::from(t), nu)?.with_params(target);
            c = c.max(t.sqrt() * s.a_norm() / n0);
        }
    }
    let mut kappa: f64 = 0.0;
    for (u, v) in &probes.pairs {
        let d = u.sub(v)?.a_norm();
        if d == 0.0 {
            continue;
        }
        let df = f_of_u(u)?.sub(&f_of_u(v)?)?.a_norm();
        kappa = kappa.max(df / (rho * d));
    }
    Ok(ConstantEstimates { big_m, c, kappa })
}

// ---------------------------------------------------------------------------
// Initial data

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Blob {
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub amp: f64,
}

/// Velocity datum `u₀ = c + swirl + ∇^⊥ψ`.
///
/// * `constant`: the vector `c`.
/// * `swirl`: amplitude `s` of the homogeneous field `∇^⊥(r·s·sin 2θ)`,
///   which gives a non-constant leading coefficient `a₀(θ)`.
/// * `circulation`: `Γ`, adding `(Γ/2π) log r` to `ψ`.
/// * `dipole`: `(d_c, d_s)`, adding `d_c cos θ + d_s sin θ` to `ψ`.
/// * `log_dipole`: `(e_c, e_s)`, adding `(e_c cos θ + e_s sin θ) log r` to `ψ`.
/// * `blobs`: Gaussian bumps in `ψ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatumSpec {
    pub constant: [f64; 2],
    pub swirl: f64,
    pub circulation: f64,
    pub dipole: [f64; 2],
    #[serde(default)]
    pub log_dipole: [f64; 2],
    pub blobs: Vec<Blob>,
}

impl Default for DatumSpec {
    /// Small vortex with a non-radial core.
    fn default() -> Self {
        Self {
            constant: [1.2e-4, -6e-5],
            swirl: 1.2e-5,
            circulation: 3e-4,
            dipole: [6e-5, 0.0],
            log_dipole: [0.0, 0.0],
            blobs: vec![
                Blob { x: 0.8, y: 0.3, width: 1.0, amp: 2e-4 },
                Blob { x: -0.6, y: -0.5, width: 1.3, amp: -1.2e-4 },
            ],
        }
    }
}

impl DatumSpec {
    pub fn zero() -> Self {
        Self { constant: [0.0; 2], swirl: 0.0, circulation: 0.0, dipole: [0.0; 2], log_dipole: [0.0; 2], blobs: vec![] }
    }

    /// Only Gaussian stream blobs: decays fast, usable on a periodic box.
    pub fn short_range() -> Self {
        Self { blobs: Self::default().blobs, ..Self::zero() }
    }
}

/// Build the divergence-free datum described by `spec`.
pub fn build_datum(grid: &Arc<Grid>, params: SpaceParams, spec: &DatumSpec) -> Result<VectorField, NsError> {
    let mut psi_terms = AsymptoticPart::new();
    let log_part = AngularFunction::constant(spec.circulation / (2.0 * PI))
        .add(&AngularFunction::cos(1, spec.log_dipole[0]))
        .add(&AngularFunction::sin(1, spec.log_dipole[1]));
    if log_part.max_abs() > 0.0 {
        psi_terms.push(AsymptoticTerm::new(0, 1, log_part));
    }
    if spec.dipole != [0.0, 0.0] {
        psi_terms.push(AsymptoticTerm::new(
            0,
            0,
            AngularFunction::cos(1, spec.dipole[0]).add(&AngularFunction::sin(1, spec.dipole[1])),
        ));
    }
    let blobs = spec.blobs.clone();
    let psi_rem = RemainderGrid::from_fn(grid.clone(), |x, y| {
        C64::from(blobs.iter().map(|b| b.amp * (-((x - b.x).powi(2) + (y - b.y).powi(2)) / (b.width * b.width)).exp()).sum::<f64>())
    });
    let psi_params = SpaceParams { m: params.m + 1, n: 0, big_n: params.big_n, ell: 1, gamma0: params.gamma0 };
    let psi = AsymptoticField::new(psi_params, psi_terms, psi_rem);
    let u = make_divergence_free(&psi)?.with_params(params);

    // Constant and swirl come from the stream function r·g(θ) with
    // g = s·sin 2θ + c_y cos θ − c_x sin θ. The velocity ∇^⊥(r g) is
    // homogeneous of degree 0 and becomes the k = 0 term; the grid
    // correction r·g·∇^⊥χ keeps χ-cut field divergence free.
    let g = AngularFunction::sin(2, spec.swirl)
        .add(&AngularFunction::cos(1, spec.constant[1]))
        .sub(&AngularFunction::sin(1, spec.constant[0]));
    let dg = g.derivative();
    let ax = g.mul_sin().add(&dg.mul_cos()).scale(-1.0);
    let ay = g.mul_cos().sub(&dg.mul_sin());
    let mut corr = [vec![C64::new(0.0, 0.0); grid.len()], vec![C64::new(0.0, 0.0); grid.len()]];
    if g.max_abs() > 0.0 {
        for &i in grid.band() {
            let p = &grid.points()[i];
            let rg = p.r * g.eval(p.y.atan2(p.x)) * p.chi[1];
            corr[0][i] = -rg * p.sin;
            corr[1][i] = rg * p.cos;
        }
    }
    let [cx, cy] = corr;
    let bx = AsymptoticField::new(params, AsymptoticPart::single(0, 0, ax), RemainderGrid::new(grid.clone(), cx));
    let by = AsymptoticField::new(params, AsymptoticPart::single(0, 0, ay), RemainderGrid::new(grid.clone(), cy));
    Ok(u.add(&VectorField::new(bx, by))?.with_params(params))
}

// ---------------------------------------------------------------------------
// Duhamel weights

/// Data of one interpolation node needed by the Duhamel sum.
struct NodeForcing {
    /// Time-power parts `P_j` of the heat evolution of the terms.
    series: Vec<AsymptoticPart>,
    rem_hat: Vec<C64>,
    forcing_hat: Vec<Vec<C64>>,
}

impl NodeForcing {
    fn new(f: &AsymptoticField, nu: f64) -> Self {
        let grid = f.grid();
        let (series, forcing) = heat_series(f.terms(), grid.spec.k_max, nu);
        let rem_hat = grid.to_spectral(f.rem().values());
        let forcing_hat = forcing.sample(grid).into_iter().map(|v| grid.to_spectral(&v)).collect();
        Self { series, rem_hat, forcing_hat }
    }
}

/// Precomputed weights for `∫₀^{t_k} S((t_k−s)ω) p(s) ω ds` where `p` is the
/// Lagrange interpolant through values at `interp`.
pub struct DuhamelPlan {
    grid: Arc<Grid>,
    n_eval: usize,
    n_interp: usize,
    orders: usize,
    scalar: Vec<C64>,
    class_of: Vec<usize>,
    table: Vec<C64>,
}

impl DuhamelPlan {
    pub fn new(grid: &Arc<Grid>, interp: &[f64], eval: &[f64], omega: C64, nu: f64, quad_nodes: usize) -> Self {
        let orders = grid.spec.k_max as usize / 2 + 1;
        let bary = bary_weights(interp);
        let (ni, ne) = (interp.len(), eval.len());

        let mut keys: HashMap<u64, usize> = HashMap::new();
        let mut mus: Vec<f64> = Vec::new();
        let class_of: Vec<usize> = (0..grid.len())
            .map(|i| {
                let q = grid.xi2(i);
                *keys.entry(q.to_bits()).or_insert_with(|| {
                    mus.push(nu * q);
                    mus.len() - 1
                })
            })
            .collect();

        // Quadrature data per evaluation time: (weight·2τ·ω, ωτ², basis).
        let quad: Vec<Vec<(C64, C64, Vec<f64>)>> = eval
            .iter()
            .map(|&tk| {
                if tk <= 0.0 {
                    return vec![];
                }
                let (tau, w) = gauss_legendre_on(quad_nodes, 0.0, tk.sqrt());
                tau.iter()
                    .zip(&w)
                    .map(|(&t, &wq)| (omega * (wq * 2.0 * t), omega * (t * t), lagrange_basis(interp, &bary, tk - t * t)))
                    .collect()
            })
            .collect();

        let mut scalar = vec![C64::new(0.0, 0.0); ne * ni * orders];
        for (k, qs) in quad.iter().enumerate() {
            for (b, z, basis) in qs {
                let mut pw = C64::new(1.0, 0.0);
                for j in 0..orders {
                    if j > 0 {
                        pw *= nu * z / j as f64;
                    }
                    for i in 0..ni {
                        scalar[(k * ni + i) * orders + j] += b * basis[i] * pw;
                    }
                }
            }
        }

        let stride = ne * ni * (orders + 1);
        let mut table = vec![C64::new(0.0, 0.0); mus.len() * stride];
        for (c, &mu) in mus.iter().enumerate() {
            let block = &mut table[c * stride..(c + 1) * stride];
            for (k, qs) in quad.iter().enumerate() {
                for (b, z, basis) in qs {
                    let w = -mu * z;
                    let phi = phi_functions(w, orders);
                    let mut kern = vec![w.exp(); orders + 1];
                    let mut zp = C64::new(1.0, 0.0);
                    for j in 0..orders {
                        zp *= z;
                        kern[j + 1] = zp * phi[j + 1];
                    }
                    for i in 0..ni {
                        let s = b * basis[i];
                        let o = (k * ni + i) * (orders + 1);
                        for (slot, kv) in block[o..o + orders + 1].iter_mut().zip(&kern) {
                            *slot += s * kv;
                        }
                    }
                }
            }
        }
        Self { grid: grid.clone(), n_eval: ne, n_interp: ni, orders, scalar, class_of, table }
    }

    /// Duhamel integrals at every evaluation time for one scalar component.
    fn apply(&self, nodes: &[NodeForcing], params: SpaceParams) -> Vec<AsymptoticField> {
        let grid = &self.grid;
        let (ni, ord) = (self.n_interp, self.orders);
        let stride = self.n_eval * ni * (ord + 1);
        assert_eq!(nodes.len(), ni);
        for n in nodes {
            assert!(n.series.len() <= ord && n.forcing_hat.len() <= ord, "time orders exceed plan");
        }
        (0..self.n_eval)
            .map(|k| {
                let mut terms = AsymptoticPart::new();
                for (i, n) in nodes.iter().enumerate() {
                    for (j, p) in n.series.iter().enumerate() {
                        terms.accumulate(p, self.scalar[(k * ni + i) * ord + j]);
                    }
                }
                let mut spec = vec![C64::new(0.0, 0.0); grid.len()];
                for (idx, out) in spec.iter_mut().enumerate() {
                    let base = self.class_of[idx] * stride + k * ni * (ord + 1);
                    let mut acc = C64::new(0.0, 0.0);
                    for (i, n) in nodes.iter().enumerate() {
                        let w = &self.table[base + i * (ord + 1)..base + (i + 1) * (ord + 1)];
                        acc += w[0] * n.rem_hat[idx];
                        for (j, c) in n.forcing_hat.iter().enumerate() {
                            acc += w[j + 1] * c[idx];
                        }
                    }
                    *out = acc;
                }
                grid.ifft(&mut spec);
                AsymptoticField::new(params, terms.cleaned(), RemainderGrid::new(grid.clone(), spec))
            })
            .collect()
    }

    /// Vector version of [`Self::apply`] given `F` at the interpolation nodes.
    fn integrate(&self, forcing: &[VectorField], nu: f64, params: SpaceParams) -> Vec<VectorField> {
        let per_comp: Vec<Vec<AsymptoticField>> = (0..2)
            .map(|c| {
                let nodes: Vec<NodeForcing> = forcing.iter().map(|f| NodeForcing::new(&f.comps[c], nu)).collect();
                self.apply(&nodes, params)
            })
            .collect();
        let [xs, ys]: [Vec<AsymptoticField>; 2] = per_comp.try_into().expect("two components");
        xs.into_iter().zip(ys).map(|(x, y)| VectorField::new(x, y)).collect()
    }
}

fn heat_vector(u: &VectorField, z: C64, nu: f64) -> Result<VectorField, NsError> {
    Ok(u.try_map(|c| heat_field(c, z, nu))?)
}

// ---------------------------------------------------------------------------
// Picard iteration

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// `max_k ‖u^{n+1}(t_k) − u^n(t_k)‖`.
    pub diff: f64,
    /// `diff_n / diff_{n−1}` (absent for the first iteration).
    pub ratio: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartRecord {
    pub t_rejected: f64,
    pub iteration: usize,
    pub ratio: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    /// Ray angle φ; nodes are `t_k e^{iφ}`.
    pub phi: f64,
    pub times: Vec<f64>,
    pub fields: Vec<VectorField>,
    pub nu: f64,
    pub t_end: f64,
    pub rho: f64,
    pub constants: ConstantEstimates,
    /// `2Cκρ√T` for the final horizon.
    pub alpha: f64,
    pub contraction_log: Vec<IterationRecord>,
    pub restarts: Vec<RestartRecord>,
    pub converged: bool,
}

impl Trajectory {
    pub fn nodes(&self) -> Vec<C64> {
        let e = C64::from_polar(1.0, self.phi);
        self.times.iter().map(|&t| e * t).collect()
    }

    /// Largest measured contraction ratio.
    pub fn max_ratio(&self) -> f64 {
        self.contraction_log.iter().filter_map(|r| r.ratio).fold(0.0, f64::max)
    }

    pub fn iterations(&self) -> usize {
        self.contraction_log.len()
    }

    /// Derivative with respect to the ray parameter `s`, where `t = s e^{iφ}`.
    pub fn ray_derivatives(&self) -> Result<Vec<VectorField>, NsError> {
        let n = self.times.len();
        let d = differentiation_matrix(&self.times, &lobatto_bary_weights(n));
        let mut out = Vec::with_capacity(n);
        for row in &d {
            let mut acc = self.fields[0].scale(row[0]);
            for (f, w) in self.fields.iter().zip(row).skip(1) {
                acc = acc.add_scaled(f, C64::from(*w))?;
            }
            out.push(acc.with_params(self.fields[0].params()));
        }
        Ok(out)
    }

    /// Field at an arbitrary `t ∈ [0, T]` by barycentric interpolation.
    pub fn at(&self, t: f64) -> Result<VectorField, NsError> {
        let bary = lobatto_bary_weights(self.times.len());
        let l = lagrange_basis(&self.times, &bary, t);
        let mut acc = self.fields[0].scale(l[0]);
        for (f, w) in self.fields.iter().zip(&l).skip(1) {
            acc = acc.add_scaled(f, C64::from(*w))?;
        }
        Ok(acc.with_params(self.fields[0].params()))
    }
}

enum PicardOutcome {
    Done { fields: Vec<VectorField>, log: Vec<IterationRecord>, converged: bool },
    Diverging { log: Vec<IterationRecord>, ratio: f64 },
}

fn picard_run(u0: &VectorField, cfg: &SolveConfig, omega: C64, t_end: f64) -> Result<PicardOutcome, NsError> {
    let grid = u0.comps[0].grid().clone();
    let params = u0.params();
    let times = chebyshev_lobatto(cfg.n_time, t_end);
    let plan = DuhamelPlan::new(&grid, &times, &times, omega, cfg.nu, cfg.quad_nodes);
    let base: Vec<VectorField> =
        times.iter().map(|&t| heat_vector(u0, omega * t, cfg.nu)).collect::<Result<_, _>>()?;
    let mut u: Vec<VectorField> = match cfg.initial {
        InitialIterate::Datum => vec![u0.clone(); times.len()],
        InitialIterate::Heat => base.clone(),
    };
    let mut log = Vec::new();
    let mut prev: Option<f64> = None;
    for it in 1..=cfg.max_iter {
        let forcing: Vec<VectorField> = u.iter().map(f_of_u).collect::<Result<_, _>>()?;
        let duhamel = plan.integrate(&forcing, cfg.nu, params);
        let next: Vec<VectorField> = base
            .iter()
            .zip(duhamel)
            .map(|(b, d)| b.add(&d).map(|v| v.with_params(params)))
            .collect::<Result<_, _>>()?;
        let mut diff: f64 = 0.0;
        for (a, b) in next.iter().zip(&u) {
            diff = diff.max(a.sub(b)?.a_norm());
        }
        let ratio = prev.map(|p| if p > 0.0 { diff / p } else { 0.0 });
        log.push(IterationRecord { iteration: it, diff, ratio });
        u = next;
        if !diff.is_finite() || ratio.is_some_and(|r| r >= 1.0 && diff > cfg.tol) {
            return Ok(PicardOutcome::Diverging { ratio: ratio.unwrap_or(f64::INFINITY), log });
        }
        if diff < cfg.tol {
            return Ok(PicardOutcome::Done { fields: u, log, converged: true });
        }
        prev = Some(diff);
    }
    Ok(PicardOutcome::Done { fields: u, log, converged: false })
}

fn check_datum(u0: &VectorField) -> Result<(), NsError> {
    let div = u0.max_divergence()?;
    if div > 1e-8 {
        return Err(NsError::NotDivergenceFree(div));
    }
    Ok(())
}

/// Ball radius used by a solve: configured value or 1.25·‖u₀‖.
pub fn ball_radius(u0: &VectorField, cfg: &SolveConfig) -> f64 {
    cfg.rho.unwrap_or_else(|| {
        let n = u0.a_norm();
        if n > 0.0 {
            1.25 * n
        } else {
            1.0
        }
    })
}

pub const DEFAULT_PROBE_SEED: u64 = 0x5eed;

/// Constants for a solve: configured, or measured on the default probe suite.
pub fn constants_for(u0: &VectorField, cfg: &SolveConfig, rho: f64) -> Result<ConstantEstimates, NsError> {
    constants_seeded(u0, cfg, rho, DEFAULT_PROBE_SEED)
}

pub fn constants_seeded(u0: &VectorField, cfg: &SolveConfig, rho: f64, seed: u64) -> Result<ConstantEstimates, NsError> {
    if let Some(c) = cfg.constants {
        return Ok(c);
    }
    let probes = default_probes(u0.comps[0].grid(), u0.params(), rho, 6, seed)?;
    estimate_constants(&probes, cfg.nu, cfg.t0, rho)
}

fn solve_on_ray(u0: &VectorField, cfg: &SolveConfig, phi: f64) -> Result<Trajectory, NsError> {
    cfg.validate()?;
    check_datum(u0)?;
    let rho = ball_radius(u0, cfg);
    let norm = u0.a_norm();
    if norm >= rho {
        return Err(NsError::OutsideBall { norm, rho });
    }
    let constants = constants_for(u0, cfg, rho)?;
    let mut t_end = cfg.t_override.unwrap_or_else(|| existence_time(rho, &constants, cfg.t0));
    let omega = C64::from_polar(1.0, phi);
    let mut restarts = Vec::new();
    loop {
        match picard_run(u0, cfg, omega, t_end)? {
            PicardOutcome::Done { fields, log, converged } => {
                return Ok(Trajectory {
                    phi,
                    times: chebyshev_lobatto(cfg.n_time, t_end),
                    fields,
                    nu: cfg.nu,
                    t_end,
                    rho,
                    constants,
                    alpha: contraction_bound(rho, &constants, t_end),
                    contraction_log: log,
                    restarts,
                    converged,
                });
            }
            PicardOutcome::Diverging { log, ratio } => {
                restarts.push(RestartRecord { t_rejected: t_end, iteration: log.len(), ratio });
                if restarts.len() as u32 > cfg.max_restarts {
                    return Err(NsError::NoContraction { rejected: restarts, ratio });
                }
                t_end *= 0.5;
            }
        }
    }
}

/// Solve on `[0, T]` with `T` from the measured constants.
pub fn picard_solve(u0: &VectorField, cfg: &SolveConfig) -> Result<Trajectory, NsError> {
    solve_on_ray(u0, cfg, 0.0)
}

/// Solve along `z = t·e^{iφ}`, `|φ| < θ`.
pub fn solve_complex_ray(u0: &VectorField, phi: f64, cfg: &SolveConfig) -> Result<Trajectory, NsError> {
    if phi.abs() >= cfg.theta {
        return Err(NsError::Config(format!("|φ| = {} must be below θ = {}", phi.abs(), cfg.theta)));
    }
    solve_on_ray(u0, cfg, phi)
}

/// Second-order exponential integrator with `steps` uniform steps:
/// a constant-`F` predictor followed by a linear-`F` corrector.
pub fn exponential_euler(u0: &VectorField, nu: f64, t_end: f64, steps: usize, quad_nodes: usize) -> Result<Vec<VectorField>, NsError> {
    let grid = u0.comps[0].grid().clone();
    let params = u0.params();
    let h = t_end / steps as f64;
    let one = C64::new(1.0, 0.0);
    let predictor = DuhamelPlan::new(&grid, &[0.0], &[h], one, nu, quad_nodes);
    let corrector = DuhamelPlan::new(&grid, &[0.0, h], &[h], one, nu, quad_nodes);
    let mut out = vec![u0.clone()];
    let mut u = u0.clone();
    for _ in 0..steps {
        let free = heat_vector(&u, C64::from(h), nu)?;
        let f0 = f_of_u(&u)?;
        let star = free.add(&predictor.integrate(std::slice::from_ref(&f0), nu, params)[0])?.with_params(params);
        let f1 = f_of_u(&star)?;
        u = free.add(&corrector.integrate(&[f0, f1], nu, params)[0])?.with_params(params);
        out.push(u.clone());
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Invariants

/// JSON has no infinity: `+∞` is written as `null` and read back.
mod unbounded {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeReport {
    pub t: f64,
    pub max_div: f64,
    pub div_relative: f64,
    pub a0_drift: f64,
    /// Smallest fitted decay exponent of the remainder over the rays;
    /// `+∞` when the remainder is negligible everywhere.
    #[serde(with = "unbounded")]
    pub decay_exponent: f64,
    /// `‖u_t − νΔu − F(u)‖`; only at interior nodes.
    pub residual: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub nodes: Vec<NodeReport>,
    pub max_div_relative: f64,
    pub max_a0_drift: f64,
    #[serde(with = "unbounded")]
    pub min_decay_exponent: f64,
    pub decay_target: f64,
    pub max_residual: f64,
}

impl InvariantReport {
    pub fn divergence_ok(&self) -> bool {
        self.max_div_relative <= 1e-6
    }
    pub fn drift_ok(&self) -> bool {
        self.max_a0_drift <= 1e-8
    }
    pub fn decay_ok(&self) -> bool {
        self.min_decay_exponent >= self.decay_target - 0.2
    }
    pub fn all_ok(&self) -> bool {
        self.divergence_ok() && self.drift_ok() && self.decay_ok()
    }
}

fn leading(u: &VectorField, c: usize) -> AngularFunction {
    u.comps[c].terms().get(0, 0).cloned().unwrap_or_else(AngularFunction::zero)
}

/// Decay exponent of `|u − χ·(asymptotic part)|` along `rays` directions,
/// fitted over `r ∈ [r_lo, r_hi]` where the signal is above round-off.
pub fn remainder_decay(u: &VectorField, rays: usize, r_lo: f64, r_hi: f64) -> f64 {
    let radii = geomspace(r_lo, r_hi, 12);
    let scale = u.comps.iter().map(|c| c.max_abs_on_grid()).fold(0.0, f64::max).max(1e-300);
    let mut worst = f64::INFINITY;
    for q in 0..rays {
        let th = 2.0 * PI * (q as f64 + 0.25) / rays as f64;
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for &r in &radii {
            let (x, y) = (r * th.cos(), r * th.sin());
            let v = u.comps.iter().map(|c| c.eval_remainder(x, y).norm()).fold(0.0, f64::max);
            if v > 1e-11 * scale {
                xs.push(r);
                ys.push(v);
            }
        }
        if xs.len() >= 4 {
            if let Some(fit) = fit_loglog(&xs, &ys) {
                worst = worst.min(-fit.slope);
            }
        }
    }
    worst
}

/// Divergence, leading-term drift, remainder decay and PDE residual per node.
pub fn verify_invariants(traj: &Trajectory) -> Result<InvariantReport, NsError> {
    let first = &traj.fields[0];
    let params = first.params();
    let s = params.m as f64 + 1.0 + params.big_n as f64;
    let grid = first.comps[0].grid().clone();
    let half = grid.half_width();
    let n = traj.times.len();
    let residuals = pde_residuals(traj)?;
    let mut nodes = Vec::with_capacity(n);
    for (k, (t, u)) in traj.times.iter().zip(&traj.fields).enumerate() {
        let max_div = u.max_divergence()?;
        let norm = u.a_norm();
        let div_relative = if norm > 0.0 { max_div / norm } else { max_div };
        let a0_drift = (0..2).map(|c| leading(u, c).sub(&leading(first, c)).sobolev_norm(s)).sum();
        let decay_exponent = remainder_decay(u, 8, 0.25 * half, 0.8 * half);
        nodes.push(NodeReport { t: *t, max_div, div_relative, a0_drift, decay_exponent, residual: residuals[k] });
    }
    let fold = |f: &dyn Fn(&NodeReport) -> f64| nodes.iter().map(f).fold(0.0, f64::max);
    Ok(InvariantReport {
        max_div_relative: fold(&|r| r.div_relative),
        max_a0_drift: fold(&|r| r.a0_drift),
        min_decay_exponent: nodes.iter().map(|r| r.decay_exponent).fold(f64::INFINITY, f64::min),
        decay_target: params.big_n as f64 + params.epsilon(),
        max_residual: fold(&|r| r.residual.unwrap_or(0.0)),
        nodes,
    })
}

/// `u_t − νΔu − F(u)` at interior nodes, measured in `A^{m−2}_{0,N}`.
pub fn pde_residuals(traj: &Trajectory) -> Result<Vec<Option<f64>>, NsError> {
    let n = traj.times.len();
    let params = traj.fields[0].params();
    if params.m < 2 {
        return Err(FieldError::Regularity { needed: 2, have: params.m }.into());
    }
    let target = SpaceParams { m: params.m - 2, ..params };
    let inv_omega = C64::from_polar(1.0, -traj.phi);
    let ds = traj.ray_derivatives()?;
    let mut out = vec![None; n];
    for k in 1..n - 1 {
        let ut = ds[k].scale(inv_omega);
        let u = &traj.fields[k];
        let lap = u.try_map(lap_field)?;
        let f = f_of_u(u)?;
        let r = ut.sub(&lap.scale(traj.nu))?.sub(&f)?.with_params(target);
        out[k] = Some(r.a_norm());
    }
    Ok(out)
}

/// Largest defect of the first-order Taylor step from the real ray,
/// `u(t e^{iφ}) ≈ u(t) + (e^{iφ} − 1) t ∂_t u(t)`, over the nodes of `ray`.
pub fn ray_taylor_defect(real: &Trajectory, ray: &Trajectory) -> Result<f64, NsError> {
    if real.phi != 0.0 || real.times != ray.times {
        return Err(NsError::Config("ray and real trajectories must share real nodes".into()));
    }
    let step = C64::from_polar(1.0, ray.phi) - 1.0;
    let du = real.ray_derivatives()?;
    let mut worst: f64 = 0.0;
    for k in 0..ray.times.len() {
        let guess = real.fields[k].add_scaled(&du[k], step * ray.times[k])?;
        worst = worst.max(ray.fields[k].sub(&guess)?.a_norm());
    }
    Ok(worst)
}

/// `‖u_a − u_b‖` maximised over common nodes.
pub fn sup_difference(a: &Trajectory, b: &Trajectory) -> Result<f64, NsError> {
    let mut d: f64 = 0.0;
    for (x, y) in a.fields.iter().zip(&b.fields) {
        d = d.max(x.sub(y)?.a_norm());
    }
    Ok(d)
}
