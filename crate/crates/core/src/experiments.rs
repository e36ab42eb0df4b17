//! Named acceptance experiments A1–A10. Each returns an [`Outcome`] with the
//! measured quantity and the pass/fail verdict at its pinned tolerance.

use crate::angular::AngularFunction;
use crate::fields::{AsymptoticField, AsymptoticPart, AsymptoticTerm, GridSpec, SpaceParams, VectorField};
use crate::fit::geomspace;
use crate::heat::{heat_field, shift_scan, smoothing_probes, smoothing_scan};
use crate::laplace::{inv_lap_term, lap_asym, lap_asym_term, sectorial_probes, sectorial_scan};
use crate::navier_stokes::{
    build_datum, constants_for, ball_radius, picard_solve, pressure, q_of_u, ray_taylor_defect, solve_complex_ray,
    verify_invariants, DatumSpec, InvariantReport, NsError, SolveConfig, Trajectory,
};
use crate::oracle::{gaussian_heat_closed_form, periodic_ns_reference, PeriodicField};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;
use std::time::Instant;

pub const ALL: [&str; 10] = ["A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8", "A9", "A10"];

#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub id: String,
    pub title: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!("{} {:<4} {} ({:.1} s): {}", if self.passed { "PASS" } else { "FAIL" }, self.id, self.title, self.seconds, self.detail)
    }
}

fn title(id: &str) -> &'static str {
    match id {
        "A1" => "Laplacian of terms vs finite differences",
        "A2" => "heat flow of a Gaussian vs closed form",
        "A3" => "inverse Laplacian round trip",
        "A4" => "resolvent decay exponents",
        "A5" => "smoothing exponents",
        "A6" => "Picard contraction",
        "A7" => "agreement with periodic reference",
        "A8" => "structural invariants",
        "A9" => "complex-time analyticity",
        "A10" => "log term in the pressure",
        _ => "unknown",
    }
}

/// Default solve shared by A6, A8 and A9.
pub struct DefaultRun {
    pub u0: VectorField,
    pub cfg: SolveConfig,
    pub traj: Result<Trajectory, NsError>,
    pub seconds: f64,
    report: Option<Result<InvariantReport, NsError>>,
}

/// Caches the default run across criteria.
#[derive(Default)]
pub struct Session {
    pub seed: u64,
    default_run: Option<DefaultRun>,
}

pub fn default_grid_params() -> (std::sync::Arc<crate::fields::Grid>, SpaceParams) {
    (GridSpec::default().with_box(16.0, 128).build(), SpaceParams::new(2, 0, 2, 0))
}

impl Session {
    pub fn new(seed: u64) -> Self {
        Self { seed, default_run: None }
    }

    pub fn default_run(&mut self) -> &mut DefaultRun {
        self.default_run.get_or_insert_with(|| {
            let start = Instant::now();
            let (grid, params) = default_grid_params();
            let u0 = build_datum(&grid, params, &DatumSpec::default()).expect("default datum");
            let base = SolveConfig::default();
            let rho = ball_radius(&u0, &base);
            let traj = constants_for(&u0, &base, rho).and_then(|est| {
                let cfg = SolveConfig { constants: Some(est), ..base.clone() };
                picard_solve(&u0, &cfg)
            });
            let cfg = SolveConfig { constants: traj.as_ref().ok().map(|t| t.constants), ..base };
            DefaultRun { u0, cfg, traj, seconds: start.elapsed().as_secs_f64(), report: None }
        })
    }

    pub fn run(&mut self, id: &str) -> Outcome {
        let start = Instant::now();
        let (passed, detail) = match id {
            "A1" => a1(),
            "A2" => a2(),
            "A3" => a3(self.seed),
            "A4" => a4(),
            "A5" => a5(),
            "A6" => self.a6(),
            "A7" => a7(),
            "A8" => self.a8(),
            "A9" => self.a9(),
            "A10" => a10(),
            other => (false, format!("unknown criterion {other}")),
        };
        Outcome { id: id.to_string(), title: title(id).to_string(), passed, detail, seconds: start.elapsed().as_secs_f64() }
    }

    fn a6(&mut self) -> (bool, String) {
        let run = self.default_run();
        match &run.traj {
            Err(e) => (false, format!("solve failed: {e}")),
            Ok(t) => {
                let ratio = t.max_ratio();
                let ok = t.converged && t.alpha < 1.0 && ratio <= t.alpha && t.iterations() <= 25;
                (
                    ok,
                    format!(
                        "T = {:.4e}, alpha = {:.4e}, max ratio = {:.4e}, {} iterations, converged = {}",
                        t.t_end,
                        t.alpha,
                        ratio,
                        t.iterations(),
                        t.converged
                    ),
                )
            }
        }
    }

    fn a8(&mut self) -> (bool, String) {
        let run = self.default_run();
        let Ok(traj) = &run.traj else {
            return (false, "default solve failed".into());
        };
        let rep = run.report.get_or_insert_with(|| verify_invariants(traj));
        match rep {
            Err(e) => (false, e.to_string()),
            Ok(r) => (
                r.divergence_ok() && r.drift_ok() && r.decay_ok(),
                format!(
                    "div/norm = {:.2e} (≤ 1e-6), a0 drift = {:.2e} (≤ 1e-8), decay exponent = {:.3} (≥ {:.2})",
                    r.max_div_relative,
                    r.max_a0_drift,
                    r.min_decay_exponent,
                    r.decay_target - 0.2
                ),
            ),
        }
    }

    fn a9(&mut self) -> (bool, String) {
        let run = self.default_run();
        let Ok(real) = &run.traj else {
            return (false, "default solve failed".into());
        };
        let cfg = SolveConfig { t_override: Some(real.t_end), ..run.cfg.clone() };
        let solve = |phi: f64| solve_complex_ray(&run.u0, phi, &cfg);
        let (big, small, mirror) = match (solve(0.1), solve(0.05), solve(-0.1)) {
            (Ok(a), Ok(b), Ok(c)) => (a, b, c),
            (a, b, c) => {
                let e = [a.err(), b.err(), c.err()].into_iter().flatten().next().map(|e| e.to_string());
                return (false, format!("ray solve failed: {}", e.unwrap_or_default()));
            }
        };
        let (Ok(d1), Ok(d2)) = (ray_taylor_defect(real, &big), ray_taylor_defect(real, &small)) else {
            return (false, "Taylor comparison failed".into());
        };
        let mut sym: f64 = 0.0;
        for (a, b) in big.fields.iter().zip(&mirror.fields) {
            sym = match a.conj().sub(b) {
                Ok(d) => sym.max(d.a_norm()),
                Err(_) => f64::INFINITY,
            };
        }
        let ratio = d1 / d2;
        (
            (3.2..=5.0).contains(&ratio) && sym <= 1e-10,
            format!("defects {d1:.3e} (φ=0.1), {d2:.3e} (φ=0.05), ratio = {ratio:.3} ∈ [3.2, 5]; conjugation = {sym:.2e} (≤ 1e-10)"),
        )
    }
}

/// Terms checked in A1; the last three are the resonant cases.
pub fn a1_terms() -> Vec<AsymptoticTerm> {
    vec![
        AsymptoticTerm::new(1, 0, AngularFunction::cos(1, 1.0)),
        AsymptoticTerm::new(0, 1, AngularFunction::constant(1.0)),
        AsymptoticTerm::new(2, 0, AngularFunction::cos(1, 1.0).add(&AngularFunction::sin(3, 0.4))),
        AsymptoticTerm::new(2, 3, AngularFunction::cos(2, 0.7).add(&AngularFunction::constant(0.2))),
        AsymptoticTerm::new(3, 2, AngularFunction::sin(1, -0.6).add(&AngularFunction::cos(4, 0.3))),
        AsymptoticTerm::new(0, 3, AngularFunction::cos(2, 1.0)),
        AsymptoticTerm::new(1, 1, AngularFunction::cos(1, 1.0)),
        AsymptoticTerm::new(0, 2, AngularFunction::constant(1.0)),
        AsymptoticTerm::new(2, 1, AngularFunction::sin(2, 1.0)),
    ]
}

/// Five-point Laplacian with one Richardson step.
fn fd_laplacian_at(f: &impl Fn(f64, f64) -> C64, x: f64, y: f64, h: f64) -> C64 {
    let five = |h: f64| (f(x + h, y) + f(x - h, y) + f(x, y + h) + f(x, y - h) - 4.0 * f(x, y)) / (h * h);
    (4.0 * five(h / 2.0) - five(h)) / 3.0
}

pub fn a1() -> (bool, String) {
    let mut worst: f64 = 0.0;
    for t in a1_terms() {
        let lap = lap_asym_term(&t, 2).into_iter().collect::<AsymptoticPart>();
        let f = |x: f64, y: f64| {
            let r = (x * x + y * y).sqrt();
            t.eval_polar(r, y.atan2(x))
        };
        for (i, r) in geomspace(4.0, 16.0, 20).into_iter().enumerate() {
            let th = 0.37 + 0.61 * i as f64;
            let (x, y) = (r * th.cos(), r * th.sin());
            let fd = fd_laplacian_at(&f, x, y, 0.02);
            let exact = lap.eval_xy(x, y);
            let scale = fd.norm().max(f(x, y).norm() / (r * r));
            worst = worst.max((fd - exact).norm() / scale);
        }
    }
    (worst <= 1e-6, format!("max relative error {worst:.2e} over {} terms × 20 radii (≤ 1e-6)", a1_terms().len()))
}

pub fn a2() -> (bool, String) {
    let grid = GridSpec::default().with_box(32.0, 256).build();
    let u = AsymptoticField::from_fn(grid.clone(), SpaceParams::new(2, 0, 2, 0), |x, y| C64::from((-(x * x + y * y) / 4.0).exp()));
    let mut worst: f64 = 0.0;
    for t in [0.1, 0.5, 1.0] {
        let Ok(s) = heat_field(&u, C64::from(t), 1.0) else {
            return (false, "heat evaluation failed".into());
        };
        for (pt, v) in grid.points().iter().zip(s.grid_values()) {
            if pt.x.abs() <= 16.0 && pt.y.abs() <= 16.0 {
                worst = worst.max((v - gaussian_heat_closed_form(pt.x, pt.y, t, 1.0, 4.0)).norm());
            }
        }
    }
    (worst <= 1e-8, format!("interior sup error {worst:.2e} at t ∈ {{0.1, 0.5, 1}} (≤ 1e-8)"))
}

/// Random admissible term at power `s ≥ 2`.
pub fn random_term(rng: &mut impl Rng) -> AsymptoticTerm {
    let s = rng.gen_range(2..=7);
    let l = rng.gen_range(0..=2);
    let jmax = rng.gen_range(0..=5usize);
    let modes: Vec<C64> = (0..2 * jmax + 1).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    AsymptoticTerm::new(s, l, AngularFunction::from_modes(modes))
}

pub fn a3(seed: u64) -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst, mut resonant) = (0.0f64, 0usize);
    for _ in 0..100 {
        let t = random_term(&mut rng);
        let Ok((out, rep)) = inv_lap_term(&t) else {
            return (false, format!("inversion failed for power {}", t.k));
        };
        resonant += rep.iter().filter(|r| r.resonant).count();
        let back = lap_asym(&out.into_iter().collect());
        let want = AsymptoticPart::single(t.k, t.l, t.a.clone());
        let scale = t.a.modes().iter().map(|c| c.norm()).fold(0.0, f64::max).max(1e-300);
        for (k, l, a) in back.sub(&want).iter() {
            let _ = (k, l);
            worst = worst.max(a.modes().iter().map(|c| c.norm()).fold(0.0, f64::max) / scale);
        }
    }
    (worst <= 1e-12 && resonant > 0, format!("max coefficient error {worst:.2e} over 100 terms, {resonant} resonant modes (≤ 1e-12)"))
}

const ALPHAS: [(u32, u32); 4] = [(0, 0), (1, 0), (2, 0), (1, 1)];

pub fn a4() -> (bool, String) {
    let probes = sectorial_probes(SpaceParams::new(0, 0, 0, 0));
    let radii = geomspace(1.0, 1e3, 7);
    let mut ok = true;
    let mut parts = vec![];
    for a in ALPHAS {
        let expect = -(1.0 - (a.0 + a.1) as f64 / 2.0);
        match sectorial_scan(&probes, 3.0 * PI / 4.0, &radii, a) {
            Ok(s) => {
                ok &= (s.fit.slope - expect).abs() <= 0.1;
                parts.push(format!("α={:?}: {:.3} (want {expect})", a, s.fit.slope));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("α={a:?}: {e}"));
            }
        }
    }
    (ok, parts.join("; "))
}

pub fn a5() -> (bool, String) {
    let probes = smoothing_probes(SpaceParams::new(0, 0, 0, 0));
    let radii = geomspace(1e-4, 1e-1, 7);
    let mut ok = true;
    let mut parts = vec![];
    for phi in [0.0, PI / 4.0] {
        for a in ALPHAS {
            let expect = -((a.0 + a.1) as f64) / 2.0;
            match smoothing_scan(&probes, a, phi, &radii, 1.0) {
                Ok(s) => {
                    ok &= (s.fit.slope - expect).abs() <= 0.15;
                    parts.push(format!("φ={phi:.2} α={a:?}: {:.3}", s.fit.slope));
                }
                Err(e) => {
                    ok = false;
                    parts.push(format!("φ={phi:.2} α={a:?}: {e}"));
                }
            }
        }
        for tau in [1u32, 2] {
            let expect = -(tau as f64) / 2.0;
            let shifted = smoothing_probes(SpaceParams::new(0, tau, tau, 0));
            match shift_scan(&shifted, tau, phi, &radii, 1.0) {
                Ok(s) => {
                    ok &= (s.fit.slope - expect).abs() <= 0.15;
                    parts.push(format!("φ={phi:.2} τ={tau}: {:.3}", s.fit.slope));
                }
                Err(e) => {
                    ok = false;
                    parts.push(format!("φ={phi:.2} τ={tau}: {e}"));
                }
            }
        }
    }
    (ok, parts.join("; "))
}

/// Interior relative error of `traj` against the periodic reference at `T/2` and `T`.
pub fn oracle_errors(traj: &Trajectory, u0: &VectorField, steps: usize) -> Result<Vec<(f64, f64)>, String> {
    let grid = u0.comps[0].grid().clone();
    let (hw, nx) = (grid.half_width(), grid.nx());
    let pf = PeriodicField::from_fn(hw, nx, 2, |x, y| u0.eval(x, y).iter().map(|c| c.re).collect());
    let refs = periodic_ns_reference(&pf, traj.nu, traj.t_end, traj.t_end / steps as f64, steps / 2).map_err(|e| e.to_string())?;
    let mut out = vec![];
    for (t, f) in refs.iter().filter(|(t, _)| *t > 0.0) {
        let u = traj.at(*t).map_err(|e| e.to_string())?;
        let (mut err, mut size) = (0.0f64, 0.0f64);
        for j in 0..nx {
            for i in 0..nx {
                let (x, y) = (f.coord(i), f.coord(j));
                if x.abs() <= hw / 4.0 && y.abs() <= hw / 4.0 {
                    let v = u.eval(x, y);
                    for c in 0..2 {
                        let r = f.comps[c][j * nx + i];
                        err = err.max((v[c] - r).norm());
                        size = size.max(r.abs());
                    }
                }
            }
        }
        out.push((*t, err / size));
    }
    Ok(out)
}

pub fn a7() -> (bool, String) {
    let (grid, params) = default_grid_params();
    let u0 = match build_datum(&grid, params, &DatumSpec::short_range()) {
        Ok(u) => u,
        Err(e) => return (false, e.to_string()),
    };
    let traj = match picard_solve(&u0, &SolveConfig::default()) {
        Ok(t) => t,
        Err(e) => return (false, format!("solve failed: {e}")),
    };
    match oracle_errors(&traj, &u0, 400) {
        Err(e) => (false, e),
        Ok(errs) => {
            let ok = errs.len() == 2 && errs.iter().all(|(_, e)| *e <= 1e-3);
            let parts: Vec<String> = errs.iter().map(|(t, e)| format!("t = {t:.4e}: {e:.2e}")).collect();
            (ok, format!("{} (≤ 1e-3 on |x| ≤ L/4)", parts.join(", ")))
        }
    }
}

/// Swirl plus a logarithmic dipole. The swirl gives a non-constant leading
/// coefficient; its Hessian pairs with `∂_r²ψ` of the log dipole to put a
/// resonant `r⁻³e^{±iθ}` component into `Q(u₀)`.
pub fn a10_datum() -> DatumSpec {
    DatumSpec { swirl: 0.5, log_dipole: [0.7, -0.3], ..DatumSpec::zero() }
}

pub fn a10() -> (bool, String) {
    let (grid, params) = default_grid_params();
    let run = || -> Result<(C64, C64, f64), NsError> {
        let u0 = build_datum(&grid, params, &a10_datum())?;
        let q = q_of_u(&u0)?;
        let p = pressure(&u0)?;
        let source = q.terms().get(3, 0).cloned().unwrap_or_else(AngularFunction::zero);
        let resonant = AngularFunction::from_modes(vec![source.mode(-1), C64::new(0.0, 0.0), source.mode(1)]);
        let (inv, _) = inv_lap_term(&AsymptoticTerm::new(3, 0, resonant.clone()))?;
        // Certify by the forward Laplacian.
        let back = lap_asym(&inv.iter().cloned().collect());
        let expect = AsymptoticPart::single(3, 0, resonant);
        let cert = back.sub(&expect).iter().map(|(_, _, a)| a.modes().iter().map(|c| c.norm()).fold(0.0, f64::max)).fold(0.0, f64::max);
        let certified = -inv.iter().filter(|t| t.k == 1 && t.l == 1).map(|t| t.a.mode(1)).sum::<C64>();
        let got = p.terms().get(1, 1).map(|a| a.mode(1)).unwrap_or_default();
        Ok((got, certified, cert))
    };
    match run() {
        Err(e) => (false, e.to_string()),
        Ok((got, want, cert)) => {
            let ok = got.norm() > 1e-6 && (got - want).norm() <= 1e-14 * want.norm() && cert <= 1e-14;
            (ok, format!("pressure (1,1) mode-1 coefficient {got:.6e}, certified {want:.6e}, forward residual {cert:.1e}"))
        }
    }
}

/// Run the listed criteria in order.
pub fn run_all(ids: &[&str], seed: u64) -> Vec<Outcome> {
    let mut session = Session::new(seed);
    ids.iter().map(|id| session.run(id)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_criteria_pass() {
        for (ok, detail) in [a1(), a3(1), a10()] {
            assert!(ok, "{detail}");
        }
    }
}
