use mosaic_core::se2::{angle_diff, interpolate_screw, Pose2};
use proptest::prelude::*;

fn pose_strategy() -> impl Strategy<Value = Pose2> {
    (
        -2.0f64..2.0,
        -2.0f64..2.0,
        -std::f64::consts::PI..std::f64::consts::PI,
    )
        .prop_map(|(x, y, t)| Pose2::new(x, y, t))
}

fn close(a: &Pose2, b: &Pose2, tol: f64) -> bool {
    (a.x - b.x).abs() < tol
        && (a.y - b.y).abs() < tol
        && angle_diff(a.theta, b.theta).abs() < tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn endpoints_are_exact(a in pose_strategy(), b in pose_strategy()) {
        let s0 = interpolate_screw(&a, &b, 0.0);
        prop_assert!(close(&s0, &a, 1e-9), "s=0 gave {s0:?} for a={a:?}");
        let s1 = interpolate_screw(&a, &b, 1.0);
        prop_assert!(close(&s1, &b, 1e-9), "s=1 gave {s1:?} for b={b:?}");
    }

    #[test]
    fn composition_consistency(
        a in pose_strategy(),
        b in pose_strategy(),
        s in 0.05f64..0.95,
        frac in 0.1f64..1.0,
    ) {
        // 0 < s' = s*frac < s <= 1: interpolating to s' directly equals
        // interpolating within the partial segment.
        let t = s;
        let s_small = s * frac;
        let direct = interpolate_screw(&a, &b, s_small);
        let partial = interpolate_screw(&a, &b, t);
        let nested = interpolate_screw(&a, &partial, s_small / t);
        prop_assert!(close(&direct, &nested, 1e-7),
            "direct {direct:?} vs nested {nested:?}");
    }

    #[test]
    fn translation_only_is_a_straight_line(
        a in pose_strategy(),
        dx in -1.0f64..1.0,
        dy in -1.0f64..1.0,
        s in 0.0f64..1.0,
    ) {
        // Identical headings: the screw degenerates to pure translation.
        let b = Pose2::new(a.x + dx, a.y + dy, a.theta);
        let p = interpolate_screw(&a, &b, s);
        prop_assert!((p.x - (a.x + s * dx)).abs() < 1e-9);
        prop_assert!((p.y - (a.y + s * dy)).abs() < 1e-9);
        prop_assert!(angle_diff(p.theta, a.theta).abs() < 1e-9);
    }
}
