use influence_core::cluster::{
    fit, initial_potentials, normalize, select_centers, select_centers_from, ClusterParams, Dataset,
};
use proptest::prelude::*;

fn points(max_n: usize, d: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-50.0..50.0f64, d), 1..max_n)
}

fn dataset_and_perm() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<usize>)> {
    (1usize..4)
        .prop_flat_map(|d| points(60, d))
        .prop_flat_map(|pts| {
            let n = pts.len();
            (Just(pts), Just((0..n).collect::<Vec<_>>()).prop_shuffle())
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn potentials_follow_a_permutation((pts, perm) in dataset_and_perm(), ra in 0.2..1.0f64) {
        let params = ClusterParams::with_radius(ra);
        let (norm, _) = normalize(&Dataset::from_rows(&pts).unwrap());
        let shuffled: Vec<Vec<f64>> = perm.iter().map(|&i| pts[i].clone()).collect();
        let (norm_s, _) = normalize(&Dataset::from_rows(&shuffled).unwrap());
        let p = initial_potentials(&norm, &params).potentials;
        let q = initial_potentials(&norm_s, &params).potentials;
        for (k, &i) in perm.iter().enumerate() {
            prop_assert!((q[k] - p[i]).abs() < 1e-9);
        }
    }

    /// Centers are compared as points. Permuting can only change which of
    /// several tied points wins, so distinct potentials are required.
    #[test]
    fn center_set_survives_permutation((pts, perm) in dataset_and_perm(), ra in 0.2..1.0f64) {
        let params = ClusterParams::with_radius(ra);
        let shuffled: Vec<Vec<f64>> = perm.iter().map(|&i| pts[i].clone()).collect();
        let a = fit(&Dataset::from_rows(&pts).unwrap(), &params).unwrap();
        let b = fit(&Dataset::from_rows(&shuffled).unwrap(), &params).unwrap();
        let (norm, _) = normalize(&Dataset::from_rows(&pts).unwrap());
        let mut pot = initial_potentials(&norm, &params).potentials;
        pot.sort_by(f64::total_cmp);
        let near_tie = pot.windows(2).any(|w| w[1] - w[0] < 1e-6);
        prop_assume!(!near_tie);
        let mut ca: Vec<Vec<f64>> = a.center_indices.iter().map(|&i| pts[i].clone()).collect();
        let mut cb: Vec<Vec<f64>> = b.center_indices.iter().map(|&i| shuffled[i].clone()).collect();
        ca.sort_by(|x, y| x.partial_cmp(y).unwrap());
        cb.sort_by(|x, y| x.partial_cmp(y).unwrap());
        prop_assert_eq!(ca, cb);
    }

    #[test]
    fn scaling_potentials_keeps_the_sequence(pts in (1usize..4).prop_flat_map(|d| points(80, d)),
                                             scale_exp in -8i32..8,
                                             ra in 0.2..1.0f64) {
        let params = ClusterParams::with_radius(ra);
        let (norm, _) = normalize(&Dataset::from_rows(&pts).unwrap());
        let base = select_centers(&norm, &params).unwrap();
        // powers of two scale without rounding, so every comparison is unchanged
        let mut state = initial_potentials(&norm, &params);
        let factor = 2f64.powi(scale_exp);
        for p in &mut state.potentials {
            *p *= factor;
        }
        prop_assert_eq!(select_centers_from(&norm, state, &params).unwrap(), base);
    }

    #[test]
    fn every_point_assigned_and_centers_own_themselves(pts in (1usize..5).prop_flat_map(|d| points(80, d)),
                                                       ra in 0.15..1.0f64) {
        let model = fit(&Dataset::from_rows(&pts).unwrap(), &ClusterParams::with_radius(ra)).unwrap();
        prop_assert_eq!(model.assignment.len(), pts.len());
        prop_assert!(model.assignment.iter().all(|&k| k < model.n_clusters()));
        for (k, &i) in model.center_indices.iter().enumerate() {
            prop_assert_eq!(model.assignment[i], k);
        }
        prop_assert_eq!(model.sizes().iter().sum::<usize>(), pts.len());
    }
}
