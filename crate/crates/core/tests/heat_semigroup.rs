use asymflow::angular::AngularFunction;
use asymflow::fields::*;
use asymflow::heat::*;
use asymflow::laplace::lap_field;
use asymflow::oracle::{gauss_hermite_heat, gaussian_heat_closed_form};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn p(m: u32, n: u32, big_n: u32) -> SpaceParams {
    SpaceParams::new(m, n, big_n, 0)
}

fn mixed_field(grid: &std::sync::Arc<Grid>) -> AsymptoticField {
    let mut terms = AsymptoticPart::new();
    terms.push(AsymptoticTerm::new(0, 0, AngularFunction::constant(0.7).add(&AngularFunction::cos(2, 0.3))));
    terms.push(AsymptoticTerm::new(1, 1, AngularFunction::cos(1, 1.0)));
    terms.push(AsymptoticTerm::new(2, 0, AngularFunction::sin(1, -0.5)));
    terms.push(AsymptoticTerm::new(2, 1, AngularFunction::cos(3, 0.4)));
    let rem = RemainderGrid::from_fn(grid.clone(), |x, y| C64::from((-((x - 0.5).powi(2) + y * y)).exp()));
    AsymptoticField::new(p(3, 0, 2), terms, rem)
}

#[test]
fn gaussian_closed_form_on_large_box() {
    let grid = GridSpec::default().with_box(32.0, 256).build();
    let u = AsymptoticField::from_fn(grid.clone(), p(2, 0, 2), |x, y| C64::from((-(x * x + y * y) / 4.0).exp()));
    for t in [0.1, 0.5, 1.0] {
        let s = heat_field(&u, C64::from(t), 1.0).unwrap();
        let mut err: f64 = 0.0;
        for (pt, v) in grid.points().iter().zip(s.grid_values()) {
            if pt.x.abs() <= 16.0 && pt.y.abs() <= 16.0 {
                err = err.max((v.re - gaussian_heat_closed_form(pt.x, pt.y, t, 1.0, 4.0)).abs());
            }
        }
        assert!(err <= 1e-8, "t = {t}: {err:e}");
    }
}

#[test]
fn zero_time_is_identity_and_mean_is_kept() {
    let grid = GridSpec::default().with_box(16.0, 128).build();
    let u = mixed_field(&grid);
    let s = heat_field(&u, C64::new(0.0, 0.0), 1.0).unwrap();
    assert_eq!(s.grid_values(), u.grid_values());
    assert_eq!(s.terms(), u.terms());
    let r = heat_remainder(u.rem(), C64::new(0.3, 0.2), 0.8).unwrap();
    let m0 = grid.integrate(u.rem().values());
    let m1 = grid.integrate(r.values());
    assert!((m0 - m1).norm() < 1e-12);
    assert!(heat_field(&u, C64::new(-0.1, 0.0), 1.0).is_err());
}

#[test]
fn heat_asym_examples() {
    let one = AsymptoticPart::single(0, 0, AngularFunction::constant(1.0));
    assert_eq!(heat_asym(&one, C64::from(0.7), 1.0, 8).terms, one);
    let harmonic = AsymptoticPart::single(1, 0, AngularFunction::cos(1, 1.0));
    assert_eq!(heat_asym(&harmonic, C64::from(0.7), 1.0, 8).terms, harmonic);
    let (nu, z) = (0.5, C64::new(0.3, 0.1));
    let logterm = AsymptoticPart::single(1, 1, AngularFunction::cos(1, 1.0));
    let out = heat_asym(&logterm, z, nu, 8).terms;
    let c = out.get(3, 0).unwrap();
    assert!((c.mode(1) - (-2.0 * nu * z * 0.5)).norm() < 1e-15);
    assert!((c.mode(-1) - (-2.0 * nu * z * 0.5)).norm() < 1e-15);
}

#[test]
fn plateau_stays_one_far_out() {
    let grid = GridSpec::default().with_box(16.0, 128).build();
    let u = AsymptoticField::from_terms(grid.clone(), p(2, 0, 2), AsymptoticPart::single(0, 0, AngularFunction::constant(1.0)));
    let s = heat_field(&u, C64::from(0.1), 1.0).unwrap();
    let v = s.eval(10.0, 0.0);
    assert!((v - C64::from(1.0)).norm() < 1e-6, "{v}");
    let chi = *grid.cutoff();
    let oracle = gauss_hermite_heat((5.0, 0.5), 0.1, 1.0, 48, |x, y| C64::from(chi.value((x * x + y * y).sqrt()))).unwrap();
    assert!((s.eval(5.0, 0.5) - oracle).norm() < 1e-6);
}

#[test]
fn semigroup_law() {
    let grid = GridSpec::default().with_box(16.0, 128).build();
    let u = mixed_field(&grid);
    for (z1, z2) in [(C64::from(0.2), C64::from(0.3)), (C64::new(0.1, 0.05), C64::new(0.2, -0.1))] {
        let a = heat_field(&heat_field(&u, z1, 0.8).unwrap(), z2, 0.8).unwrap();
        let b = heat_field(&u, z1 + z2, 0.8).unwrap();
        let mut err: f64 = 0.0;
        for (pt, (x, y)) in grid.points().iter().zip(a.grid_values().into_iter().zip(b.grid_values())) {
            if pt.r <= 8.0 {
                err = err.max((x - y).norm());
            }
        }
        assert!(err < 1e-6, "{err:e}");
    }
}

#[test]
fn agrees_with_gauss_hermite_oracle() {
    let grid = GridSpec::default().with_box(16.0, 128).build();
    let u = mixed_field(&grid);
    let (t, nu) = (0.2, 1.0);
    let s = heat_field(&u, C64::from(t), nu).unwrap();
    let chi = *grid.cutoff();
    let terms = u.terms().clone();
    let full = |x: f64, y: f64| {
        let r = (x * x + y * y).sqrt();
        let a = if r > 0.0 { C64::from(chi.value(r)) * terms.eval_xy(x, y) } else { C64::new(0.0, 0.0) };
        a + (-((x - 0.5).powi(2) + y * y)).exp()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..20 {
        let (x, y) = (rng.gen_range(-8.0..8.0), rng.gen_range(-8.0..8.0));
        let o = gauss_hermite_heat((x, y), t, nu, 48, full).unwrap();
        let v = s.eval(x, y);
        assert!((v - o).norm() < 1e-6, "({x},{y}) {v} {o}");
    }
}

#[test]
fn heat_equation_residual_is_second_order() {
    let grid = GridSpec::default().with_box(16.0, 128).build();
    let u = mixed_field(&grid);
    let (t, nu) = (0.3, 0.7);
    let lap = lap_field(&heat_field(&u, C64::from(t), nu).unwrap().with_params(p(3, 0, 2))).unwrap();
    let residual = |h: f64| {
        let a = heat_field(&u, C64::from(t + h), nu).unwrap();
        let b = heat_field(&u, C64::from(t - h), nu).unwrap();
        let mut worst: f64 = 0.0;
        for _ in 0..1 {
            for &(x, y) in &[(0.5, 0.3), (3.0, -2.0), (-6.0, 1.0), (7.0, 7.0)] {
                let d = (a.eval(x, y) - b.eval(x, y)) / (2.0 * h) - nu * lap.eval(x, y);
                worst = worst.max(d.norm());
            }
        }
        worst
    };
    let r1 = residual(0.02);
    let r2 = residual(0.01);
    let order = (r1 / r2).log2();
    assert!(order > 1.7, "{r1:e} {r2:e} {order}");
}
