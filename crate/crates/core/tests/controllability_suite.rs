//! Cross-checks of the verdict engine against the classical criterion and
//! against reachable-cloud evidence.

mod common;

use common::*;
use lie_control::controllability::{
    classify, euclidean_check, reach_equals_group_test, ClassifyOptions, Conclusion, TriState,
};
use lie_control::linalg::Matrix;
use lie_control::sim::{coverage, reach_cloud, CloudConfig, Direction};
use lie_control::ControlRange;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn euclidean_criterion_agrees_with_the_verdict_engine() {
    // Random orthogonal A keeps all moduli at 1, so controllability reduces
    // to the Kalman rank; the verdict engine must agree in both directions.
    let mut rng = ChaCha8Rng::seed_from_u64(401);
    for trial in 0..50 {
        let d = rng.gen_range(2..=4usize);
        let a = random_orthogonal(&mut rng, d);
        let m = rng.gen_range(1..=d);
        let b = if trial % 7 == 0 {
            Matrix::zeros(d, m) // degenerate input channel
        } else {
            Matrix::from_fn(d, m, |_, _| rng.gen_range(-1.0..1.0))
        };
        let euc = euclidean_check(&a, &b).unwrap();
        let sys = euclidean_system(&a, &b, ControlRange::symmetric_box(m, 1.0).unwrap());
        let verdict = classify(&sys, &ClassifyOptions::default()).unwrap();
        assert_eq!(
            euc.controllable,
            verdict.conclusion == Conclusion::Controllable,
            "trial {trial}: kalman_rank={}/{} vs {:?}",
            euc.kalman_rank,
            euc.dim,
            verdict.conclusion
        );
        if !euc.controllable {
            assert_eq!(verdict.conclusion, Conclusion::NotControllable);
        }
    }
}

#[test]
fn center_unstable_group_is_swallowed_by_the_cloud() {
    // On Aff(2,ℝ) with d > 1 the center-unstable subgroup is the whole
    // group; with the accessibility criterion satisfied the growing
    // reachable cloud should sweep a fixed window: inclusion evidence for
    // G^{+,0} ⊂ ℛ, not an equality proof.
    let sys = aff2_system_with_range(
        0.0,
        2.0,
        vec![1.0, 1.0],
        vec![0.0, 1.0],
        ControlRange::Box {
            lo: vec![-0.9],
            hi: vec![0.9],
        },
    );
    let (a, d, hp0, gp0) = sys.aff2_params().unwrap();
    assert!(lie_control::accessibility::aff2_accessible(a, d, hp0, gp0).unwrap());
    assert!(d > 1.0);

    let window_lo = [0.2, -5.0];
    let window_hi = [5.0, 5.0];
    let mut last = 0.0;
    for steps in [2usize, 4, 6] {
        let cfg = CloudConfig {
            steps,
            controls_per_channel: 9,
            prune_cell: 0.02,
            max_points: 900_000,
            seed: 42,
        };
        let cloud = reach_cloud(&sys, &cfg, Direction::Forward).unwrap();
        let cov = coverage(&cloud, &window_lo, &window_hi, 0.5).unwrap();
        assert!(
            cov + 1e-12 >= last,
            "coverage must grow with k ({cov} after {last})"
        );
        last = cov;
    }
    assert_eq!(last, 1.0, "every window cell must eventually be hit");
}

#[test]
fn reach_equals_group_matches_cloud_growth() {
    // Expanding Euclidean dynamics: ℛ = G is proven spectrally; the cloud
    // corroborates by covering a window around the origin.
    let a = Matrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 3.0]);
    let b = Matrix::identity(2, 2);
    let sys = euclidean_system(&a, &b, ControlRange::symmetric_box(2, 1.0).unwrap());
    assert_eq!(
        reach_equals_group_test(&sys, &ClassifyOptions::default()).unwrap(),
        TriState::Proven
    );
    let cfg = CloudConfig {
        steps: 6,
        controls_per_channel: 9,
        prune_cell: 0.02,
        max_points: 500_000,
        seed: 42,
    };
    let cloud = reach_cloud(&sys, &cfg, Direction::Forward).unwrap();
    let cov = coverage(&cloud, &[-1.0, -1.0], &[1.0, 1.0], 0.25).unwrap();
    assert!(cov >= 0.95, "coverage {cov}");

    // Contracting direction: the stable block obstructs ℛ = G.
    let a = Matrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 1.0]);
    let sys = euclidean_system(&a, &b, ControlRange::symmetric_box(2, 1.0).unwrap());
    assert_eq!(
        reach_equals_group_test(&sys, &ClassifyOptions::default()).unwrap(),
        TriState::Refuted
    );
}

#[test]
fn exp_coordinate_formulation_gives_the_same_verdict() {
    // The worked Heisenberg system transported to exponential coordinates:
    // same structure constants, the differential as a linear automorphism,
    // and a one-channel translation. The verdict machinery must agree with
    // the chart-coordinate formulation.
    let text = r#"{
        "family": "nilpotent",
        "structure_constants": [
            [[0,0,0],[0,0,0],[0,0,0]],
            [[0,0,0],[0,0,0],[1,0,0]],
            [[0,0,0],[-1,0,0],[0,0,0]]
        ],
        "f0_matrix": [[1,1,0],[0,1,0],[0,1,1]],
        "B": [[0.0],[1.0],[0.0]],
        "control": { "kind": "box", "lo": [-1.0], "hi": [1.0] }
    }"#;
    let sys = lie_control::specfile::SystemSpecFile::from_json(text)
        .unwrap()
        .build()
        .unwrap();
    let v = classify(&sys, &ClassifyOptions::default()).unwrap();
    assert_eq!(v.conclusion, Conclusion::Controllable, "{v:?}");
    assert_eq!(
        v.decided_by,
        Some(lie_control::controllability::TheoremTag::T4_3)
    );

    let chart = heisenberg_example_system();
    let vc = classify(&chart, &ClassifyOptions::default()).unwrap();
    assert_eq!(v.conclusion, vc.conclusion);
}

#[test]
fn finite_control_sets_cannot_prove_openness() {
    // Openness certificates need interior controls; a finite sub-sampling
    // leaves both openness flags unknown and the verdict inconclusive, even
    // for a system whose box-range version is controllable.
    let base = heisenberg_example_system();
    let finite = lie_control::LinearSystem::new(
        base.model().clone(),
        base.aut().clone(),
        match base.beta() {
            lie_control::ControlMap::Poly(p) => lie_control::ControlMap::Poly(p.clone()),
            _ => unreachable!(),
        },
        ControlRange::FiniteSet {
            points: vec![vec![-1.0], vec![0.0], vec![1.0]],
        },
    )
    .unwrap();
    let v = classify(&finite, &ClassifyOptions::default()).unwrap();
    assert_eq!(v.conclusion, Conclusion::Inconclusive, "{v:?}");
    assert_eq!(v.r_open, lie_control::controllability::Openness::Unknown);
    assert_eq!(v.c_open, lie_control::controllability::Openness::Unknown);
    assert!(v.g_equals_g0);
}
