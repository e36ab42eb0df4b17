use asymflow::angular::AngularFunction;
use asymflow::cli::output::num;
use asymflow::cli::Config;
use asymflow::fields::asyf::{read_fields, write_fields};
use asymflow::fields::{AsymptoticField, AsymptoticPart, AsymptoticTerm, GridSpec, RemainderGrid, SpaceParams};
use asymflow::heat::heat_remainder;
use asymflow::laplace::{inv_lap_asym, lap_asym};
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn angular(max_mode: usize) -> impl Strategy<Value = AngularFunction> {
    (0..=max_mode).prop_flat_map(|m| {
        prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 2 * m + 1)
            .prop_map(|c| AngularFunction::from_modes(c.into_iter().map(|(re, im)| C64::new(re, im)).collect()))
    })
}

fn part(k_lo: u32, k_hi: u32) -> impl Strategy<Value = AsymptoticPart> {
    prop::collection::vec((k_lo..=k_hi, 0u32..=2, angular(4)), 1..4).prop_map(|ts| {
        let mut p = AsymptoticPart::new();
        for (k, l, a) in ts {
            p.push(AsymptoticTerm::new(k, l, a));
        }
        p
    })
}

fn close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn angular_product_commutes_and_evaluates_pointwise(a in angular(5), b in angular(5), th in 0.0..6.3f64) {
        let ab = a.mul(&b, 32);
        let ba = b.mul(&a, 32);
        for j in -10..=10 {
            prop_assert!(close(ab.mode(j), ba.mode(j), 1e-14));
        }
        prop_assert!(close(ab.eval(th), a.eval(th) * b.eval(th), 1e-12));
    }

    #[test]
    fn angular_derivative_obeys_leibniz(a in angular(4), b in angular(4), th in 0.0..6.3f64) {
        let lhs = a.mul(&b, 32).derivative();
        let rhs = a.derivative().mul(&b, 32).add(&a.mul(&b.derivative(), 32));
        prop_assert!(close(lhs.eval(th), rhs.eval(th), 1e-12));
        prop_assert!(close(a.lap_beltrami().eval(th), a.derivative().derivative().eval(th), 1e-12));
    }

    #[test]
    fn sobolev_norm_is_a_norm(a in angular(6), b in angular(6), s in 0.0..3.0f64, c in -3.0..3.0f64) {
        let n = |f: &AngularFunction| f.sobolev_norm(s);
        prop_assert!(n(&a.add(&b)) <= n(&a) + n(&b) + 1e-12);
        prop_assert!((n(&a.scale(c)) - c.abs() * n(&a)).abs() <= 1e-12 * (1.0 + n(&a)));
        prop_assert!(n(&a) >= a.max_abs() / (2 * a.cutoff() + 1) as f64 - 1e-15);
    }

    #[test]
    fn real_combinations_of_cos_and_sin_are_real(j in 0usize..8, x in -2.0..2.0f64, y in -2.0..2.0f64, th in 0.0..6.3f64) {
        let f = AngularFunction::cos(j, x).add(&AngularFunction::sin(j, y));
        prop_assert!(f.is_real());
        prop_assert!(f.eval(th).im.abs() <= 1e-14);
        let expect = x * (j as f64 * th).cos() + if j == 0 { 0.0 } else { y * (j as f64 * th).sin() };
        prop_assert!((f.eval(th).re - expect).abs() <= 1e-13);
    }

    #[test]
    fn inverse_laplacian_inverts_laplacian(p in part(2, 7)) {
        let u = inv_lap_asym(&p).unwrap();
        let back = lap_asym(&u).sub(&p);
        prop_assert!(back.max_abs() <= 1e-11 * (1.0 + p.max_abs()), "residual {}", back.max_abs());
    }

    #[test]
    fn term_laplacian_matches_pointwise_evaluation(p in part(0, 5), r in 3.0..10.0f64, th in 0.0..6.3f64) {
        // Five-point stencil in polar form.
        let h = 1e-3;
        let f = |r: f64, t: f64| p.eval_polar(r, t);
        let frr = (f(r + h, th) - 2.0 * f(r, th) + f(r - h, th)) / (h * h);
        let fr = (f(r + h, th) - f(r - h, th)) / (2.0 * h);
        let ftt = (f(r, th + h) - 2.0 * f(r, th) + f(r, th - h)) / (h * h);
        let fd = frr + fr / r + ftt / (r * r);
        let exact = lap_asym(&p).eval_polar(r, th);
        let scale = 1.0 + p.max_abs() * 30.0;
        prop_assert!((fd - exact).norm() <= 1e-4 * scale, "fd {fd} exact {exact}");
    }

    #[test]
    fn heat_on_remainders_is_a_semigroup(s in 0.0..0.5f64, t in 0.0..0.5f64, phase in -1.2..1.2f64, seed in 0u64..1000) {
        let grid = GridSpec::default().with_box(12.0, 32).build();
        let (cx, cy) = ((seed % 7) as f64 * 0.3 - 1.0, (seed % 5) as f64 * 0.4 - 0.8);
        let f = RemainderGrid::from_fn(grid, |x, y| C64::new((-(x - cx).powi(2) - (y - cy).powi(2)).exp(), 0.1 * (-(x * x + y * y) / 3.0).exp()));
        let zs = C64::from_polar(s, phase);
        let zt = C64::from_polar(t, phase);
        let two = heat_remainder(&heat_remainder(&f, zs, 1.0).unwrap(), zt, 1.0).unwrap();
        let one = heat_remainder(&f, zs + zt, 1.0).unwrap();
        for (a, b) in two.values().iter().zip(one.values()) {
            prop_assert!((a - b).norm() <= 1e-12);
        }
    }

    #[test]
    fn asyf_round_trip_is_byte_identical(p in part(0, 3), amp in -2.0..2.0f64) {
        let grid = GridSpec::default().with_box(12.0, 16).build();
        let params = SpaceParams::new(2, 0, 3, 2);
        let rem = RemainderGrid::from_fn(grid, move |x, y| C64::new(amp * (-(x * x + y * y)).exp(), x * 1e-3));
        let f = AsymptoticField::new(params, p, rem);
        let mut first = vec![];
        write_fields(&mut first, &[&f]).unwrap();
        let back = read_fields(&mut first.as_slice()).unwrap();
        let mut second = vec![];
        write_fields(&mut second, &back.iter().collect::<Vec<_>>()).unwrap();
        prop_assert_eq!(first, second);
    }

    #[test]
    fn numbers_survive_csv_formatting(v in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        let s = num(v);
        prop_assert_eq!(s.parse::<f64>().unwrap(), v);
        prop_assert!(!s.starts_with("-0.0000000000000000e0"));
        prop_assert_eq!(num(-0.0), num(0.0));
    }

    #[test]
    fn config_values_round_trip(nu in 1e-6..1e6f64, times in prop::collection::vec(0.0..10.0f64, 1..6), pad in 0usize..4) {
        let list = times.iter().map(|t| format!("{t:?}")).collect::<Vec<_>>().join(", ");
        let text = format!("{}# heat\n[heat]\nnu = {nu:?}\ntimes = {list}\n", "\n".repeat(pad));
        let cfg = Config::parse(&text).unwrap();
        prop_assert_eq!(cfg.float("heat", "nu"), Some(nu));
        prop_assert_eq!(cfg.floats("heat", "times"), Some(times));
        prop_assert_eq!(cfg.line_of("heat", "nu"), Some(pad + 3));
    }

    #[test]
    fn unknown_keys_are_reported_with_their_line(pad in 0usize..6, key in "[a-z]{3,8}") {
        prop_assume!(!["nu", "times", "phase", "svg"].contains(&key.as_str()));
        let text = format!("[heat]\n{}{key} = 1\n", "\n".repeat(pad));
        let err = Config::parse(&text).unwrap_err();
        prop_assert_eq!(err.line, Some(pad + 2));
    }
}
