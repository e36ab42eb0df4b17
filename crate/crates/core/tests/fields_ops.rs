use asymflow::angular::{AngularFunction, Axis};
use asymflow::fields::*;
use asymflow::laplace::*;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{E, PI};

fn params(m: u32, n: u32, big_n: u32) -> SpaceParams {
    SpaceParams::new(m, n, big_n, 0)
}

fn small_grid() -> std::sync::Arc<Grid> {
    GridSpec::default().with_box(16.0, 128).build()
}

fn random_field(rng: &mut ChaCha8Rng, grid: &std::sync::Arc<Grid>, p: SpaceParams) -> AsymptoticField {
    let mut terms = AsymptoticPart::new();
    for k in p.n..=p.big_n {
        for l in 0..=(k as i32 + p.ell).max(0) as u32 {
            if rng.gen_bool(0.6) {
                let a = AngularFunction::cos(rng.gen_range(0..3), rng.gen_range(-1.0..1.0))
                    .add(&AngularFunction::sin(rng.gen_range(1..3), rng.gen_range(-1.0..1.0)));
                terms.push(AsymptoticTerm::new(k, l, a));
            }
        }
    }
    let (cx, cy, w, amp) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.8..1.5), rng.gen_range(-1.0..1.0));
    let rem = RemainderGrid::from_fn(grid.clone(), move |x, y| {
        C64::from(amp * (-((x - cx).powi(2) + (y - cy).powi(2)) / (w * w)).exp())
    });
    AsymptoticField::new(p, terms, rem)
}

#[test]
fn eval_examples_with_unit_bump() {
    let grid = GridSpec { cutoff: Cutoff::unit_bump(), ..GridSpec::default() }.with_box(8.0, 64).build();
    let u = AsymptoticField::from_terms(grid.clone(), params(0, 0, 2), AsymptoticPart::single(0, 0, AngularFunction::constant(1.0)));
    assert!((u.eval(3.0, 0.0) - C64::from(1.0)).norm() < 1e-14);
    assert!(u.eval(0.5, 0.0).norm() < 1e-14);
    let v = AsymptoticField::from_terms(grid, params(0, 0, 2), AsymptoticPart::single(1, 1, AngularFunction::cos(1, 1.0)));
    assert!((v.eval(E, 0.0) - C64::from(1.0 / E)).norm() < 1e-14);
}

#[test]
fn derivative_commutes_with_eval() {
    let grid = small_grid();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let u = random_field(&mut rng, &grid, params(3, 0, 2));
    for axis in Axis::BOTH {
        let du = u.partial_derivative(axis).unwrap();
        for _ in 0..20 {
            let (x, y) = (rng.gen_range(-7.0..7.0), rng.gen_range(-7.0..7.0));
            let h = 1e-4;
            let (dx, dy) = if axis == Axis::X { (h, 0.0) } else { (0.0, h) };
            let fd = (u.eval(x + dx, y + dy) - u.eval(x - dx, y - dy)) / (2.0 * h);
            let ex = du.eval(x, y);
            assert!((fd - ex).norm() <= 1e-5 * ex.norm().max(1e-2), "{axis:?} ({x},{y}) {fd} {ex}");
        }
    }
}

#[test]
fn multiply_is_pointwise() {
    let grid = small_grid();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let u = random_field(&mut rng, &grid, params(2, 0, 2));
    let v = random_field(&mut rng, &grid, params(2, 0, 2));
    let w = u.multiply(&v).unwrap();
    for _ in 0..20 {
        let (x, y) = (rng.gen_range(-8.0..8.0), rng.gen_range(-8.0..8.0));
        let a = w.eval(x, y);
        let b = u.eval(x, y) * v.eval(x, y);
        assert!((a - b).norm() <= 1e-8 * b.norm().max(1e-3), "({x},{y}) {a} {b}");
    }
}

#[test]
fn lap_and_inverse_on_fields() {
    let grid = small_grid();
    let g = AsymptoticField::from_fn(grid.clone(), params(2, 0, 2), |x, y| C64::from((-(x * x + y * y)).exp()));
    let lg = lap_field(&g).unwrap();
    let err = grid
        .points()
        .iter()
        .zip(lg.grid_values())
        .map(|(p, v)| (v.re - (4.0 * p.r * p.r - 4.0) * (-p.r * p.r).exp()).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-8, "{err}");

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let src = random_field(&mut rng, &grid, params(2, 2, 4));
    let w = inv_lap_field(&src).unwrap();
    let back = lap_field(&w).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let (x, y) = (rng.gen_range(-8.0..8.0), rng.gen_range(-8.0..8.0));
        let a = back.eval(x, y);
        let b = src.eval(x, y);
        worst = worst.max((a - b).norm() / b.norm().max(1e-3));
    }
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn resolvent_identity() {
    let grid = small_grid();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let u = random_field(&mut rng, &grid, params(2, 0, 3));
    for lambda in [C64::from(1.0), C64::from(10.0), C64::new(1.0, 5.0)] {
        let r = resolvent(&u, lambda).unwrap();
        let lr = lap_field(&r).unwrap();
        for _ in 0..20 {
            let (x, y) = (rng.gen_range(-8.0..8.0), rng.gen_range(-8.0..8.0));
            let lhs = lambda * r.eval(x, y) - lr.eval(x, y);
            let rhs = u.eval(x, y);
            assert!((lhs - rhs).norm() <= 1e-4 * rhs.norm().max(1e-2), "{lambda} ({x},{y}) {lhs} {rhs}");
        }
    }
    let _ = PI;
}
