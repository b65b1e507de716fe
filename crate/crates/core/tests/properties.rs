use cloudreg::cloud::{triangle_membership, TriangleCloud};
use cloudreg::controller::{
    fire_corner_weights, general_controller_step, infer, ControllerConfig, GeneralRule, Mode, Shape,
};
use cloudreg::RandomSource;
use proptest::prelude::*;

fn det(j: i32, l: f64) -> ControllerConfig {
    let mut cfg = ControllerConfig::canonical(j, l, 1.0, 0.0, 1.0, 1.0, 1.0).unwrap();
    cfg.mode = Mode::Deterministic;
    cfg
}

fn stochastic(j: i32, he: f64, drops: usize) -> ControllerConfig {
    let mut cfg = ControllerConfig::canonical(j, 1.0, 1.0, he, 1.0, 1.0, 1.0).unwrap();
    cfg.drops = drops;
    cfg
}

proptest! {
    #[test]
    fn membership_in_unit_interval(ex in -5.0..5.0f64, en1 in 0.01..3.0f64, en2 in 0.01..3.0f64, x in -10.0..10.0f64) {
        let mu = triangle_membership(ex, en1, en2, x);
        prop_assert!((0.0..=1.0).contains(&mu));
        prop_assert_eq!(triangle_membership(ex, en1, en2, ex), 1.0);
    }

    #[test]
    fn membership_monotone_on_flanks(ex in -2.0..2.0f64, en1 in 0.1..2.0f64, en2 in 0.1..2.0f64, a in 0.0..1.0f64, b in 0.0..1.0f64) {
        let (lo, hi) = (a.min(b), a.max(b));
        // right flank decreasing, left flank increasing
        prop_assert!(triangle_membership(ex, en1, en2, ex + lo * en2) >= triangle_membership(ex, en1, en2, ex + hi * en2));
        prop_assert!(triangle_membership(ex, en1, en2, ex - lo * en1) >= triangle_membership(ex, en1, en2, ex - hi * en1));
    }

    #[test]
    fn deterministic_controller_is_a_plane(j in 1..=4i32, l in 0.5..3.0f64, a in -1.0..1.0f64, b in -1.0..1.0f64) {
        // with the complementary flanks and the U_{-(i+j)} table the
        // surface is u* = -H (e* + Δe*) / (2L)
        let cfg = det(j, l);
        let (e, de) = (a * l, b * l);
        let u = infer(e, de, &cfg, &mut RandomSource::new(0)).unwrap().u_star;
        prop_assert!((u + (e + de) / (2.0 * l)).abs() < 1e-12, "u = {}", u);
    }

    #[test]
    fn odd_symmetry(j in 1..=3i32, e in -1.0..1.0f64, de in -1.0..1.0f64) {
        let cfg = det(j, 1.0);
        let mut rng = RandomSource::new(0);
        let u = infer(e, de, &cfg, &mut rng).unwrap().u_star;
        let v = infer(-e, -de, &cfg, &mut rng).unwrap().u_star;
        prop_assert!((u + v).abs() < 1e-12);
    }

    #[test]
    fn output_bounded_by_universe(j in 1..=3i32, e in -1.0..1.0f64, de in -1.0..1.0f64, seed in any::<u64>()) {
        for shape in [Shape::Triangle, Shape::Normal] {
            let mut cfg = stochastic(j, 0.05, 20);
            cfg.shape = shape;
            let u = infer(e, de, &cfg, &mut RandomSource::new(seed)).unwrap().u_star;
            prop_assert!(u.abs() <= cfg.consequents.h + 1e-12);
        }
    }

    #[test]
    fn weights_sum_to_one(j in 1..=3i32, e in -1.0..1.0f64, de in -1.0..1.0f64, he in 0.0..0.1f64, seed in any::<u64>()) {
        let cfg = stochastic(j, he.max(1e-9), 10);
        let (pe, pde) = (&cfg.e_partition, &cfg.de_partition);
        let (i, jj) = (pe.locate_cell(e), pde.locate_cell(de));
        let mut rng = RandomSource::new(seed);
        for mode in [Mode::Deterministic, Mode::Stochastic] {
            let w = fire_corner_weights(e, de, i, jj, pe, pde, mode, 10, &mut rng);
            prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(w.iter().all(|w| (0.0..=1.0).contains(w)));
        }
    }

    #[test]
    fn deterministic_controller_is_continuous(j in 1..=3i32, e in -0.99..0.99f64, de in -0.99..0.99f64) {
        let cfg = det(j, 1.0);
        let mut rng = RandomSource::new(0);
        let h = 1e-7;
        let u0 = infer(e, de, &cfg, &mut rng).unwrap().u_star;
        let u1 = infer(e + h, de - h / 3.0, &cfg, &mut rng).unwrap().u_star;
        prop_assert!((u1 - u0).abs() <= 2.0 * h);
    }

    #[test]
    fn seeded_runs_repeat(seed in any::<u64>(), e in -1.0..1.0f64, de in -1.0..1.0f64) {
        let cfg = stochastic(2, 0.05, 50);
        let a = infer(e, de, &cfg, &mut RandomSource::new(seed)).unwrap();
        let b = infer(e, de, &cfg, &mut RandomSource::new(seed)).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn single_rule_general_output(x in -0.99..0.99f64, cons in -1.0..1.0f64) {
        // u = Ex_u ∓ (w - 1) En_u with w = μ(x)
        let rule = GeneralRule {
            antecedents: vec![TriangleCloud::new(0.0, 1.0, 1.0, 0.0).unwrap()],
            consequent: TriangleCloud::new(cons, 0.5, 0.5, 0.0).unwrap(),
        };
        let u = general_controller_step(&[x], &[rule], 1, Mode::Deterministic, &mut RandomSource::new(0)).unwrap();
        let w = 1.0 - x.abs();
        let want = if x < 0.0 { cons - (w - 1.0) * 0.5 } else { cons + (w - 1.0) * 0.5 };
        prop_assert!((u - want).abs() < 1e-14);
    }
}
