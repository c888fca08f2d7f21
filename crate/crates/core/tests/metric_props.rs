use mosaic_core::se2::Pose2;
use mosaic_core::world::{state_distance, Grip, WorldState};
use proptest::prelude::*;

fn state_strategy() -> impl Strategy<Value = WorldState> {
    let pose = || {
        (
            -2.0f64..2.0,
            -2.0f64..2.0,
            -std::f64::consts::PI..std::f64::consts::PI,
        )
            .prop_map(|(x, y, t)| Pose2::new(x, y, t))
    };
    (pose(), proptest::collection::vec(pose(), 3)).prop_map(|(gripper, object_poses)| WorldState {
        gripper,
        grip: Grip::Open,
        object_poses,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn symmetry(a in state_strategy(), b in state_strategy()) {
        let ab = state_distance(&a, &b, 0.1).unwrap();
        let ba = state_distance(&b, &a, 0.1).unwrap();
        prop_assert!((ab - ba).abs() < 1e-12);
        prop_assert!(ab >= 0.0);
    }

    #[test]
    fn triangle_inequality(
        a in state_strategy(),
        b in state_strategy(),
        c in state_strategy(),
    ) {
        let ac = state_distance(&a, &c, 0.1).unwrap();
        let ab = state_distance(&a, &b, 0.1).unwrap();
        let bc = state_distance(&b, &c, 0.1).unwrap();
        prop_assert!(ac <= ab + bc + 1e-9, "ac={ac} > ab+bc={}", ab + bc);
    }

    #[test]
    fn identity_of_equals(a in state_strategy()) {
        prop_assert_eq!(state_distance(&a, &a, 0.1).unwrap(), 0.0);
    }
}
