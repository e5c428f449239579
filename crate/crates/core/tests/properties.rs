//! Randomised structural properties of the spectral core, checked against
//! direct (quadratic-cost) computations.

use approx::assert_relative_eq;
use displab::groups::apply_group;
use displab::models::{Frame, ModelSpec};
use displab::nonlinear::{averaged_k, averaged_m, averaged_n, dissipativity};
use displab::random::{random_field, random_real_field, rng, with_h_norm};
use displab::spectral::dealiased_product;
use displab::timestep::{integrate, SimConfig};
use displab::{Cx, Field, Field32, GroupKind};
use proptest::prelude::*;

/// Truncated convolution of `u·conj(v)·w` computed mode by mode.
fn direct_triple(u: &Field, v: &Field, w: &Field) -> Field {
    let n = u.truncation() as i64;
    Field::from_fn(u.truncation(), |k| {
        let mut acc = Cx::new(0.0, 0.0);
        for a in -n..=n {
            for b in -n..=n {
                let c = k - a + b;
                if c.abs() <= n {
                    acc = acc + u.get(a) * v.get(b).conj() * w.get(c);
                }
            }
        }
        acc
    })
}

fn field(seed: u64, n: usize) -> Field {
    random_field(&mut rng(seed), n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn padded_product_matches_direct_convolution(seed in any::<u64>(), n in 1usize..10) {
        let (u, v, w) = (field(seed, n), field(seed ^ 1, n), field(seed ^ 2, n));
        let fast = dealiased_product(&[&u, &v, &w], &[false, true, false]).unwrap();
        let slow = direct_triple(&u, &v, &w);
        prop_assert!((&fast - &slow).h_norm() <= 1e-13 * (1.0 + slow.h_norm()));
    }

    #[test]
    fn averaged_operators_commute_with_translation(seed in any::<u64>(), n in 1usize..12, shift in -3.0f64..3.0) {
        let w = field(seed, n);
        let moved = w.translated(shift);
        for (a, b) in [
            (averaged_n(&moved), averaged_n(&w).translated(shift)),
            (averaged_m(&moved), averaged_m(&w).translated(shift)),
        ] {
            prop_assert!((&a - &b).h_norm() <= 1e-12 * (1.0 + b.h_norm()));
        }
    }

    #[test]
    fn averaged_operators_are_cubic(seed in any::<u64>(), n in 1usize..10, re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let w = field(seed, n);
        let z = Cx::new(re, im);
        let scale = z.norm_sqr() * z;
        let lhs = averaged_n(&w.scale(z));
        let rhs = averaged_n(&w).scale(scale);
        prop_assert!((&lhs - &rhs).h_norm() <= 1e-12 * (1.0 + rhs.h_norm()));
    }

    #[test]
    fn pairing_dominates_quartic_norm(seed in any::<u64>(), n in 1usize..16, amp in 0.05f64..5.0) {
        let w = with_h_norm(&field(seed, n), amp);
        for averaged in [averaged_n(&w), averaged_m(&w)] {
            let (pairing, quartic) = dissipativity(&averaged, &w);
            prop_assert!(pairing.re - quartic >= -1e-10 * quartic.max(1.0));
            prop_assert!(pairing.im.abs() <= 1e-12 * quartic.max(1.0));
        }
    }

    #[test]
    fn averaged_burgers_vanishes_on_real_zero_mean(seed in any::<u64>(), n in 1usize..24) {
        let w: Field = random_real_field(&mut rng(seed), n);
        prop_assert!(averaged_k(&w).h_norm() <= 1e-12);
    }

    #[test]
    fn group_is_an_isometric_flow(seed in any::<u64>(), n in 1usize..12, l in 0.5f64..200.0, t in -4.0f64..4.0) {
        let w = field(seed, n);
        for kind in [GroupKind::Airy, GroupKind::Schrodinger] {
            let g = apply_group(kind, l, t, &w);
            prop_assert!((g.h_norm() - w.h_norm()).abs() <= 1e-13 * w.h_norm());
            let back = apply_group(kind, l, -t, &g);
            prop_assert!((&back - &w).h_norm() <= 1e-12 * w.h_norm());
        }
    }
}

#[test]
fn single_precision_tracks_double_precision() {
    let model64 = ModelSpec::gl2(Frame::Averaged, Cx::new(1.0, 0.5), 1.0, 1.0);
    let model32 = ModelSpec::gl2(Frame::Averaged, Cx::new(1.0f32, 0.5), 1.0, 1.0);
    let w64: Field = with_h_norm(&field(9, 8), 1.0);
    let w32 = Field32::from_fn(8, |n| {
        let c = w64.get(n);
        Cx::new(c.re as f32, c.im as f32)
    });
    let (_, end64) = integrate(&model64, &SimConfig::new(8, 0.01, 1.0), &w64).into_result().unwrap();
    let (_, end32) = integrate(&model32, &SimConfig::new(8, 0.01f32, 1.0), &w32).into_result().unwrap();
    let gap = end64
        .modes()
        .map(|(n, c)| {
            let d = end32.get(n);
            (c - Cx::new(d.re as f64, d.im as f64)).norm()
        })
        .fold(0.0, f64::max);
    assert!(gap < 1e-4, "f32/f64 gap {gap}");
    assert_relative_eq!(end32.h_norm() as f64, end64.h_norm(), max_relative = 1e-5);
}

#[test]
fn averaged_gl2_is_absorbed_into_a_fixed_ball() {
    // dissipativity: ‖w‖ ends near or below the radius fixed by Re β
    let model = ModelSpec::gl2(Frame::Averaged, Cx::new(1.0, 0.5), 1.0, 1.0);
    for seed in 0..4 {
        let w0 = with_h_norm(&field(seed, 12), 4.0);
        let (_, end) = integrate(&model, &SimConfig::new(12, 0.01, 20.0), &w0).into_result().unwrap();
        assert!(end.h_norm() <= 1.0 + 1e-6, "seed {seed}: ‖w(20)‖ = {}", end.h_norm());
    }
}
