use asymflow::angular::{AngularFunction, Axis};
use asymflow::fields::*;
use asymflow::navier_stokes::*;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::sync::Arc;

fn grid() -> Arc<Grid> {
    GridSpec::default().with_box(16.0, 128).build()
}

fn params() -> SpaceParams {
    SpaceParams::new(2, 0, 2, 0)
}

fn quick_cfg() -> SolveConfig {
    SolveConfig { n_time: 9, quad_nodes: 16, ..SolveConfig::default() }
}

fn patch(grid: &Arc<Grid>, f: impl Fn(f64, f64) -> f64 + Copy) -> AsymptoticField {
    AsymptoticField::from_fn(grid.clone(), SpaceParams::new(3, 0, 2, 0), move |x, y| C64::from(f(x, y) * (-(x * x + y * y) / 8.0).exp()))
}

#[test]
fn q_on_linear_patches() {
    let g = grid();
    let strain = VectorField::new(patch(&g, |x, _| x), patch(&g, |_, y| -y));
    let rot = VectorField::new(patch(&g, |_, y| -y), patch(&g, |x, _| x));
    assert!((q_of_u(&strain).unwrap().eval(0.0, 0.0) - C64::from(2.0)).norm() < 1e-9);
    assert!((q_of_u(&rot).unwrap().eval(0.0, 0.0) - C64::from(-2.0)).norm() < 1e-9);
}

#[test]
fn q_of_stream_field() {
    let g = grid();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut terms = AsymptoticPart::new();
    terms.push(AsymptoticTerm::new(0, 1, AngularFunction::constant(0.3)));
    terms.push(AsymptoticTerm::new(0, 0, AngularFunction::cos(1, 0.4).add(&AngularFunction::sin(2, -0.2))));
    terms.push(AsymptoticTerm::new(1, 0, AngularFunction::sin(1, 0.5)));
    let rem = RemainderGrid::from_fn(g.clone(), |x, y| C64::from(0.7 * (-((x - 0.4).powi(2) + (y + 0.2).powi(2)) / 1.5).exp()));
    let psi = AsymptoticField::new(SpaceParams::new(4, 0, 2, 1), terms, rem);
    let u = make_divergence_free(&psi).unwrap();
    let q = q_of_u(&u).unwrap();
    let d = |a: Axis, b: Axis| psi.partial_derivative(a).unwrap().partial_derivative(b).unwrap();
    let (pxx, pxy, pyy) = (d(Axis::X, Axis::X), d(Axis::X, Axis::Y), d(Axis::Y, Axis::Y));
    for _ in 0..20 {
        let (x, y) = (rng.gen_range(-9.0..9.0), rng.gen_range(-9.0..9.0));
        let expect = 2.0 * (pxy.eval(x, y).powi(2) - pxx.eval(x, y) * pyy.eval(x, y));
        let got = q.eval(x, y);
        assert!((got - expect).norm() <= 1e-6 * expect.norm().max(1e-3), "({x},{y}) {got} {expect}");
    }
}

#[test]
fn constant_field_has_no_nonlinearity() {
    let g = grid();
    let c = [0.3, -0.2];
    let u = VectorField::new(
        AsymptoticField::from_fn(g.clone(), params(), move |_, _| C64::from(c[0])),
        AsymptoticField::from_fn(g.clone(), params(), move |_, _| C64::from(c[1])),
    );
    let f = f_of_u(&u).unwrap();
    assert!(f.comps.iter().all(|c| c.a_norm() < 1e-12));
    assert!(pressure(&u).unwrap().a_norm() < 1e-12);
    // With the constant carried by the cut-off term the transport vanishes where χ = 1.
    let cut = build_datum(&g, params(), &DatumSpec { constant: c, ..DatumSpec::zero() }).unwrap();
    assert!(cut.max_divergence().unwrap() < 1e-12);
    let t = transport(&cut, &cut).unwrap();
    for &(x, y) in &[(12.0, 0.0), (0.0, -13.0), (10.0, 10.0)] {
        let v = t.eval(x, y);
        assert!(v[0].norm() < 1e-12 && v[1].norm() < 1e-12, "{v:?}");
    }
}

#[test]
fn radial_vortex_is_steady_for_the_nonlinearity() {
    let g = grid();
    let k = 0.4;
    let u = build_datum(&g, params(), &DatumSpec { circulation: 2.0 * PI * k, ..DatumSpec::zero() }).unwrap();
    let f = f_of_u(&u).unwrap();
    let transport = transport(&u, &u).unwrap();
    for &(x, y) in &[(4.0, 0.0), (2.0, 3.0), (12.0, 0.0)] {
        let fv = f.eval(x, y);
        let tv = transport.eval(x, y);
        let scale = tv[0].norm().max(tv[1].norm());
        assert!(fv[0].norm() <= 1e-5 * scale && fv[1].norm() <= 1e-5 * scale, "({x},{y}) {fv:?} {tv:?}");
    }
    // Far out the transport term is the exact vortex value −k²x/r⁴.
    let tv = transport.eval(12.0, 0.0);
    assert!((tv[0] - C64::from(-k * k * 12.0 / 12f64.powi(4))).norm() < 1e-12);
    let q = q_of_u(&u).unwrap();
    assert!((q.eval(12.0, 0.0) - C64::from(2.0 * k * k / 12f64.powi(4))).norm() < 1e-12);
}

#[test]
fn pressure_equation_and_gauge() {
    let g = grid();
    let u = build_datum(&g, params(), &DatumSpec { circulation: 1.0, blobs: DatumSpec::default().blobs.iter().map(|b| Blob { amp: b.amp * 500.0, ..*b }).collect(), ..DatumSpec::zero() }).unwrap();
    let p = pressure(&u).unwrap();
    let q = q_of_u(&u).unwrap();
    let lp = asymflow::laplace::lap_field(&p.clone().with_params(SpaceParams::new(3, 0, 2, 0))).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let (x, y) = (rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
        let (a, b) = (-lp.eval(x, y), q.eval(x, y));
        assert!((a - b).norm() <= 1e-5 * b.norm().max(1e-3), "({x},{y}) {a} {b}");
    }
    let mean: C64 = p.rem().values().iter().sum::<C64>() / p.rem().values().len() as f64;
    assert!(mean.norm() < 1e-12);
    let shifted = p.add(&AsymptoticField::from_fn(g.clone(), p.params, |_, _| C64::from(3.0))).unwrap();
    for axis in Axis::BOTH {
        let a = p.partial_derivative(axis).unwrap();
        let b = shifted.partial_derivative(axis).unwrap();
        for &(x, y) in &[(1.0, 2.0), (12.0, -3.0)] {
            assert!((a.eval(x, y) - b.eval(x, y)).norm() < 1e-12);
        }
    }
}

#[test]
fn divergence_of_transport_identity() {
    let g = grid();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mk = |rng: &mut ChaCha8Rng| {
        let (cx, cy, a) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.5..1.5));
        let mut terms = AsymptoticPart::new();
        terms.push(AsymptoticTerm::new(0, 0, AngularFunction::constant(rng.gen_range(-1.0..1.0))));
        terms.push(AsymptoticTerm::new(1, 0, AngularFunction::cos(1, rng.gen_range(-1.0..1.0))));
        let rem = RemainderGrid::from_fn(g.clone(), move |x, y| C64::from(a * (-((x - cx).powi(2) + (y - cy).powi(2))).exp()));
        AsymptoticField::new(SpaceParams::new(3, 0, 2, 0), terms, rem)
    };
    let u = VectorField::new(mk(&mut rng), mk(&mut rng));
    let lhs = transport(&u, &u).unwrap().divergence().unwrap();
    let div = u.divergence().unwrap();
    let grad_div = VectorField::new(div.partial_derivative(Axis::X).unwrap(), div.partial_derivative(Axis::Y).unwrap());
    let rhs = q_of_u(&u).unwrap().add(&u.comps[0].multiply(&grad_div.comps[0]).unwrap().add(&u.comps[1].multiply(&grad_div.comps[1]).unwrap()).unwrap()).unwrap();
    for _ in 0..20 {
        let (x, y) = (rng.gen_range(-9.0..9.0), rng.gen_range(-9.0..9.0));
        let (a, b) = (lhs.eval(x, y), rhs.eval(x, y));
        assert!((a - b).norm() <= 1e-6 * b.norm().max(1.0), "({x},{y}) {a} {b}");
    }
}

#[test]
fn linearisation_error_is_quadratic() {
    let g = grid();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let u = random_velocity(&mut rng, &g, params()).unwrap();
    let w = random_velocity(&mut rng, &g, params()).unwrap();
    let fu = f_of_u(&u).unwrap();
    let dfw = d_f(&u, &w).unwrap();
    let err = |eps: f64| {
        let f = f_of_u(&u.add_scaled(&w, C64::from(eps)).unwrap()).unwrap();
        f.sub(&fu).unwrap().add_scaled(&dfw, C64::from(-eps)).unwrap().a_norm()
    };
    let (e1, e2) = (err(1e-2), err(5e-3));
    assert!(((e1 / e2).log2() - 2.0).abs() < 0.1, "{e1:e} {e2:e}");
}

#[test]
fn existence_time_examples() {
    let one = ConstantEstimates { big_m: 1.0, c: 1.0, kappa: 1.0 };
    assert!((existence_time(1.0, &one, 1.0) - 0.061875).abs() < 1e-15);
    assert!((existence_time(1e-9, &one, 1.0) - 0.99).abs() < 1e-12);
    let (a, b) = (existence_time(100.0, &one, 1.0), existence_time(200.0, &one, 1.0));
    assert!(((a / b) - 16.0).abs() < 0.5, "{}", a / b);
}

#[test]
fn constant_estimates_basics() {
    let g = grid();
    let p = params();
    let probes = default_probes(&g, p, 1.0, 1, 1).unwrap();
    let est = estimate_constants(&probes, 1.0, 0.1, 1.0).unwrap();
    assert!(est.big_m >= 1.0 - 1e-9 && est.c > 0.0 && est.kappa > 0.0);
    let (u, _) = probes.pairs[0].clone();
    let degenerate = ProbeSet { pairs: vec![(u.clone(), u)], ..probes.clone() };
    assert_eq!(estimate_constants(&degenerate, 1.0, 0.1, 1.0).unwrap().kappa, 0.0);
    let empty = ProbeSet { semigroup: vec![], ..probes };
    assert_eq!(estimate_constants(&empty, 1.0, 0.1, 1.0), Err(NsError::EmptyProbes));
}

#[test]
fn constant_estimates_are_stable() {
    let g = grid();
    let p = params();
    let small = estimate_constants(&default_probes(&g, p, 1.0, 4, 3).unwrap(), 1.0, 0.1, 1.0).unwrap();
    let large = estimate_constants(&default_probes(&g, p, 1.0, 8, 3).unwrap(), 1.0, 0.1, 1.0).unwrap();
    for (a, b) in [(small.big_m, large.big_m), (small.c, large.c), (small.kappa, large.kappa)] {
        assert!((b - a).abs() / a < 0.25, "{small:?} {large:?}");
    }
}

#[test]
fn zero_datum_gives_zero_trajectory() {
    let g = grid();
    let u0 = build_datum(&g, params(), &DatumSpec::zero()).unwrap();
    let cfg = SolveConfig { constants: Some(ConstantEstimates { big_m: 1.0, c: 1.0, kappa: 1.0 }), ..quick_cfg() };
    let traj = picard_solve(&u0, &cfg).unwrap();
    assert!(traj.converged);
    assert!(traj.fields.iter().all(|f| f.is_zero() || f.a_norm() == 0.0));
    let rep = verify_invariants(&traj).unwrap();
    assert_eq!(rep.max_div_relative, 0.0);
    assert_eq!(rep.max_a0_drift, 0.0);
    assert!(rep.all_ok());
}

#[test]
fn rejects_bad_input() {
    let g = grid();
    let bad = VectorField::new(
        AsymptoticField::from_fn(g.clone(), params(), |x, y| C64::from((-(x * x + y * y)).exp())),
        AsymptoticField::zero(g.clone(), params()),
    );
    assert!(matches!(picard_solve(&bad, &quick_cfg()), Err(NsError::NotDivergenceFree(_))));
    let u0 = build_datum(&g, params(), &DatumSpec::default()).unwrap();
    let cfg = quick_cfg();
    assert!(matches!(solve_complex_ray(&u0, 1.0, &cfg), Err(NsError::Config(_))));
    let tiny = SolveConfig { rho: Some(1e-6), ..quick_cfg() };
    assert!(matches!(picard_solve(&u0, &tiny), Err(NsError::OutsideBall { .. })));
}

#[test]
fn solver_properties_on_default_datum() {
    let g = grid();
    let u0 = build_datum(&g, params(), &DatumSpec::default()).unwrap();
    let base = quick_cfg();
    let rho = ball_radius(&u0, &base);
    let est = constants_for(&u0, &base, rho).unwrap();
    let cfg = SolveConfig { constants: Some(est), ..base };
    let traj = picard_solve(&u0, &cfg).unwrap();
    assert!(traj.converged);
    assert!(traj.max_ratio() <= traj.alpha && traj.alpha < 1.0);

    // Mild and strong forms agree.
    let rep = verify_invariants(&traj).unwrap();
    assert!(rep.max_residual <= 10.0 * cfg.tol, "{}", rep.max_residual);
    assert!(rep.all_ok(), "{rep:?}");

    // A different starting iterate reaches the same fixed point.
    let other = picard_solve(&u0, &SolveConfig { initial: InitialIterate::Datum, ..cfg.clone() }).unwrap();
    assert!(sup_difference(&traj, &other).unwrap() <= 2.0 * cfg.tol);

    // The real ray reproduces the real solve exactly.
    let ray = solve_complex_ray(&u0, 0.0, &cfg).unwrap();
    assert_eq!(sup_difference(&traj, &ray).unwrap(), 0.0);

    // Conjugate rays.
    let plus = solve_complex_ray(&u0, 0.2, &cfg).unwrap();
    let minus = solve_complex_ray(&u0, -0.2, &cfg).unwrap();
    let mut sym: f64 = 0.0;
    for (a, b) in plus.fields.iter().zip(&minus.fields) {
        sym = sym.max(a.conj().sub(b).unwrap().a_norm());
    }
    assert!(sym <= 1e-10, "{sym:e}");

    // Lipschitz dependence on the data.
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let w = random_velocity(&mut rng, &g, params()).unwrap();
    let w = w.scale(1.0 / w.a_norm());
    let bound = est.big_m / (1.0 - traj.alpha) * 1.5;
    for eps in [1e-2, 1e-3, 1e-4] {
        let v0 = u0.add_scaled(&w, C64::from(eps * u0.a_norm())).unwrap();
        let fixed = SolveConfig { t_override: Some(traj.t_end), rho: Some(rho), ..cfg.clone() };
        let tv = picard_solve(&v0, &fixed).unwrap();
        let ratio = sup_difference(&traj, &tv).unwrap() / v0.sub(&u0).unwrap().a_norm();
        assert!(ratio <= bound, "eps {eps}: {ratio} > {bound}");
    }

    // Second-order exponential integrator lands on the same end state.
    let end = traj.fields.last().unwrap();
    let e1 = exponential_euler(&u0, cfg.nu, traj.t_end, 4, 16).unwrap();
    let e2 = exponential_euler(&u0, cfg.nu, traj.t_end, 8, 16).unwrap();
    let d1 = e1.last().unwrap().sub(end).unwrap().a_norm();
    let d2 = e2.last().unwrap().sub(end).unwrap().a_norm();
    assert!(d2 < d1 || d2 < 1e-12, "{d1:e} {d2:e}");
    assert!(d2 <= 1e-6 * end.a_norm(), "{d2:e}");
}
