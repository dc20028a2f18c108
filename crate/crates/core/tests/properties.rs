use std::sync::Arc;

use proptest::prelude::*;
use stochreach::systems::attitude::{AttitudeConfig, AttitudeDynamics};
use stochreach::systems::project_theta;
use stochreach::systems::theta::theta;
use stochreach::*;

fn vec_n(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, n)
}

fn box_n(n: usize) -> impl Strategy<Value = IntervalVector> {
    (vec_n(n), prop::collection::vec(0.0f64..5.0, n)).prop_map(|(lo, w)| {
        let hi = lo.iter().zip(&w).map(|(a, b)| a + b).collect();
        IntervalVector::new(lo, hi).unwrap()
    })
}

fn point_in(b: &IntervalVector, t: &[f64]) -> Vec<f64> {
    b.lower()
        .iter()
        .zip(b.upper())
        .zip(t)
        .map(|((l, u), s)| l + s * (u - l))
        .collect()
}

fn linear_system(a: Vec<Vec<f64>>, g: Vec<Vec<f64>>) -> StochasticSystem {
    let a = Matrix::from_rows(&a).unwrap();
    let g = Matrix::from_rows(&g).unwrap();
    let n = a.rows();
    let m = g.cols();
    StochasticSystem::new(
        Arc::new(LinearDynamics::new(a.clone(), g.clone()).unwrap()),
        Arc::new(linear_decomposition(&a, &g)),
        IntervalVector::universe(n),
        IntervalVector::universe(m),
        1.0,
    )
    .unwrap()
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-2.0f64..2.0, cols), rows)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn leq_is_a_partial_order(a in vec_n(4), b in vec_n(4), c in vec_n(4)) {
        prop_assert!(leq(&a, &a).unwrap());
        if leq(&a, &b).unwrap() && leq(&b, &a).unwrap() {
            prop_assert_eq!(&a, &b);
        }
        if leq(&a, &b).unwrap() && leq(&b, &c).unwrap() {
            prop_assert!(leq(&a, &c).unwrap());
        }
        let lo: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x.min(*y)).collect();
        prop_assert!(leq(&lo, &a).unwrap() && leq(&lo, &b).unwrap());
    }

    #[test]
    fn contains_matches_bound_comparison(b in box_n(3), p in vec_n(3)) {
        let expected = leq(b.lower(), &p).unwrap() && leq(&p, b.upper()).unwrap();
        prop_assert_eq!(b.contains(&p).unwrap(), expected);
        prop_assert!(b.contains(b.lower()).unwrap() && b.contains(b.upper()).unwrap());
    }

    #[test]
    fn gaussian_quantile_inverts_cdf(mean in -5.0f64..5.0, std in 0.01f64..10.0, z in -6.0f64..6.0) {
        let g = MarginalSpec::gaussian(mean, std).unwrap();
        let x = mean + z * std;
        let back = g.quantile(g.cdf(x)).unwrap();
        prop_assert!((back - x).abs() <= 1e-6 * std.max(1.0), "{x} -> {back}");
    }

    #[test]
    fn confidence_box_has_requested_mass(
        delta in 0.001f64..0.999,
        means in prop::collection::vec(-3.0f64..3.0, 1..6),
        uniform_mask in prop::collection::vec(any::<bool>(), 6),
    ) {
        let marginals: Vec<MarginalSpec> = means
            .iter()
            .zip(&uniform_mask)
            .map(|(&m, &u)| if u {
                MarginalSpec::uniform(m - 1.0, m + 2.0).unwrap()
            } else {
                MarginalSpec::gaussian(m, 0.7).unwrap()
            })
            .collect();
        let d = ProductDistribution::new(marginals).unwrap();
        let b = d.joint_confidence_box(delta).unwrap();
        prop_assert!((d.box_mass(&b).unwrap() - (1.0 - delta)).abs() < 1e-9);
    }

    #[test]
    fn delta_update_is_monotone(a in 0.0f64..=1.0, b in 0.0f64..=1.0, da in 0.0f64..0.5, db in 0.0f64..0.5) {
        let v = delta_update(a, b).unwrap();
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert!(delta_update((a + da).min(1.0), b).unwrap() >= v);
        prop_assert!(delta_update(a, (b + db).min(1.0)).unwrap() >= v);
    }

    #[test]
    fn linear_propagation_contains_images(
        a in matrix(3, 3),
        g in matrix(3, 2),
        xb in box_n(3),
        wb in box_n(2),
        ts in prop::collection::vec(prop::collection::vec(0.0f64..=1.0, 5), 20),
    ) {
        let s = linear_system(a, g);
        let image = s.propagate_interval(&xb, &wb).unwrap();
        for t in &ts {
            let x = point_in(&xb, &t[..3]);
            let w = point_in(&wb, &t[3..]);
            let y = s.step(&x, &w).unwrap();
            for i in 0..3 {
                let slack = 1e-12 * (1.0 + y[i].abs());
                prop_assert!(image.lower()[i] - slack <= y[i] && y[i] <= image.upper()[i] + slack);
            }
        }
    }

    #[test]
    fn propagation_is_inclusion_monotone(
        a in matrix(3, 3),
        g in matrix(3, 1),
        xb in box_n(3),
        wb in box_n(1),
        t in prop::collection::vec(0.0f64..=1.0, 4),
        shrink in 0.0f64..=1.0,
    ) {
        let s = linear_system(a, g);
        let outer = s.propagate_interval(&xb, &wb).unwrap();
        // A sub-box around a random interior point.
        let c = point_in(&xb, &t[..3]);
        let lo: Vec<f64> = c.iter().zip(xb.lower()).map(|(c, l)| c - shrink * (c - l)).collect();
        let hi: Vec<f64> = c.iter().zip(xb.upper()).map(|(c, u)| c + shrink * (u - c)).collect();
        let inner = s.propagate_interval(&IntervalVector::new(lo, hi).unwrap(), &wb).unwrap();
        for i in 0..3 {
            let slack = 1e-12 * (1.0 + outer.lower()[i].abs() + outer.upper()[i].abs());
            prop_assert!(outer.lower()[i] <= inner.lower()[i] + slack);
            prop_assert!(inner.upper()[i] <= outer.upper()[i] + slack);
        }
    }

    #[test]
    fn embedding_preserves_southeast_order(
        a in matrix(2, 2),
        g in matrix(2, 2),
        outer_x in box_n(2),
        outer_w in box_n(2),
        t in prop::collection::vec(0.0f64..=1.0, 8),
    ) {
        // (x, x̂) ≤_SE (y, ŷ) with y, ŷ inside [x, x̂].
        let s = linear_system(a, g);
        let y = point_in(&outer_x, &t[..2]);
        let y_hat: Vec<f64> = y.iter().zip(outer_x.upper()).zip(&t[2..4]).map(|((y, u), s)| y + s * (u - y)).collect();
        let v = point_in(&outer_w, &t[4..6]);
        let v_hat: Vec<f64> = v.iter().zip(outer_w.upper()).zip(&t[6..8]).map(|((v, u), s)| v + s * (u - v)).collect();

        let big = EmbeddingState::from_box(&outer_x);
        let small = EmbeddingState::new(y.clone(), y_hat.clone()).unwrap();
        let big_next = s.embed_step(&big, outer_w.lower(), outer_w.upper()).unwrap();
        let small_next = s.embed_step(&small, &v, &v_hat).unwrap();
        for i in 0..2 {
            let slack = 1e-12 * (1.0 + big_next.x[i].abs() + big_next.x_hat[i].abs());
            prop_assert!(big_next.x[i] <= small_next.x[i] + slack);
            prop_assert!(small_next.x_hat[i] <= big_next.x_hat[i] + slack);
        }
    }

    #[test]
    fn theta_projection_is_sound(
        lo in prop::collection::vec(-1.0f64..1.0, 2),
        w in prop::collection::vec(0.0f64..1.0, 2),
        seed in any::<u64>(),
    ) {
        let hi: Vec<f64> = lo.iter().zip(&w).map(|(l, w)| (l + w).min(1.0)).collect();
        let b = IntervalVector::new(lo.clone(), hi.clone()).unwrap();
        let (t_lo, t_hi) = project_theta(&b).unwrap();
        let u = ProductDistribution::new(vec![
            MarginalSpec::uniform(0.0, 1.0).unwrap(),
            MarginalSpec::uniform(0.0, 1.0).unwrap(),
        ]).unwrap();
        for i in 0..2000u64 {
            let q = point_in(&b, &u.sample(stream_seed(seed, i, 0)));
            let t = theta(q[0], q[1]);
            prop_assert!(t_lo <= t && t <= t_hi, "θ({q:?}) = {t} outside [{t_lo}, {t_hi}]");
        }
        for q in [&lo, &hi] {
            let t = theta(q[0], q[1]);
            prop_assert!(t_lo <= t && t <= t_hi);
        }
    }
}

#[test]
fn theta_projection_is_sound_at_scale() {
    let u = MarginalSpec::uniform(-1.0, 1.0).unwrap();
    let d = ProductDistribution::new(vec![u; 4]).unwrap();
    let unit = ProductDistribution::new(vec![MarginalSpec::uniform(0.0, 1.0).unwrap(); 2]).unwrap();
    let mut violations = 0;
    for b in 0..10u64 {
        let c = d.sample(stream_seed(99, b, 0));
        let b_box = IntervalVector::new(
            vec![c[0].min(c[1]), c[2].min(c[3])],
            vec![c[0].max(c[1]), c[2].max(c[3])],
        )
        .unwrap();
        let (lo, hi) = project_theta(&b_box).unwrap();
        for i in 0..10_000u64 {
            let q = point_in(&b_box, &unit.sample(stream_seed(7, b * 10_000 + i, 1)));
            let t = theta(q[0], q[1]);
            if !(lo <= t && t <= hi) {
                violations += 1;
            }
        }
    }
    assert_eq!(violations, 0);
}

#[test]
fn ensemble_paths_stay_inside_the_embedding_tube() {
    // Every trajectory whose initial state and disturbances fall inside the
    // boxes stays inside the propagated boxes at every step.
    let s = linear_system(
        vec![vec![0.9, -0.3], vec![0.4, 0.7]],
        vec![vec![1.0, 0.0], vec![-0.5, 1.0]],
    );
    let x0 = ProductDistribution::gaussian_diag(&[1.0, -1.0], &[0.04, 0.09]).unwrap();
    let w = ProductDistribution::gaussian_diag(&[0.0, 0.0], &[0.01, 0.01]).unwrap();
    let x_box = x0.joint_confidence_box(0.1).unwrap();
    let w_box = w.joint_confidence_box(0.1).unwrap();
    let mut boxes = vec![x_box.clone()];
    for _ in 0..6 {
        let next = s.propagate_interval(boxes.last().unwrap(), &w_box).unwrap();
        boxes.push(next);
    }
    let mut checked = 0;
    for i in 0..5_000u64 {
        let mut x = x0.sample(stream_seed(3, i, 0));
        if !x_box.contains(&x).unwrap() {
            continue;
        }
        for (k, b) in boxes.iter().enumerate().skip(1) {
            let wk = w.sample(stream_seed(3, i, k as u64));
            if !w_box.contains(&wk).unwrap() {
                break;
            }
            x = s.step(&x, &wk).unwrap();
            assert!(b.contains(&x).unwrap(), "trajectory {i} left box {k}");
            checked += 1;
        }
    }
    assert!(checked > 1000);
}

#[test]
fn sample_fraction_in_box_matches_mass() {
    let d = ProductDistribution::new(vec![
        MarginalSpec::gaussian(0.0, 1.0).unwrap(),
        MarginalSpec::uniform(-1.0, 3.0).unwrap(),
        MarginalSpec::gaussian(5.0, 0.1).unwrap(),
    ])
    .unwrap();
    let b = d.joint_confidence_box(0.2).unwrap();
    let m = 100_000;
    let inside = (0..m)
        .filter(|&i| b.contains(&d.sample(stream_seed(12, i, 0))).unwrap())
        .count();
    let frac = inside as f64 / m as f64;
    assert!(
        (frac - 0.8).abs() < 3.0 * (0.25 / m as f64).sqrt(),
        "{frac}"
    );
}

#[test]
fn sample_components_are_uncorrelated() {
    let d = ProductDistribution::new(vec![MarginalSpec::gaussian(0.0, 1.0).unwrap(); 2]).unwrap();
    let m = 50_000;
    let mut sxy = 0.0;
    let mut seq = 0.0;
    let mut prev = 0.0;
    for i in 0..m {
        let z = d.sample(stream_seed(21, i, 0));
        sxy += z[0] * z[1];
        seq += z[0] * prev;
        prev = z[0];
    }
    // Standard error of a sample correlation is about 1/√M ≈ 0.0045.
    assert!((sxy / m as f64).abs() < 0.02);
    assert!((seq / m as f64).abs() < 0.02);
}

#[test]
fn quaternion_norm_drift_is_small() {
    let c = AttitudeConfig::default();
    let dynamics = AttitudeDynamics::new(&c).unwrap();
    let x0 = c.initial_distribution().unwrap();
    let w = c.disturbance_distribution().unwrap();
    let norm = |x: &[f64]| x[..4].iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut worst: f64 = 0.0;
    for i in 0..2_000u64 {
        let mut x = x0.sample(stream_seed(5, i, 0));
        let n0 = norm(&x);
        for k in 0..5 {
            x = dynamics.step(&x, &w.sample(stream_seed(5, i, k + 1)));
        }
        worst = worst.max((norm(&x) - n0).abs());
    }
    assert!(worst < 1e-3, "drift {worst}");
}
