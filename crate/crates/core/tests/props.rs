//! Property tests for structural invariants that must hold on arbitrary
//! shapes, not just the hand-picked cases in the unit tests.

use lfsr::degrade::BlurSampleOperator;
use lfsr::graph::GraphParams;
use lfsr::lightfield::{devectorize, vectorize, LightField};
use lfsr::pipeline::plan_tiles;
use lfsr::synth;
use lfsr::warp::build_warp_sq;
use ndarray::Array2;
use proptest::prelude::*;

fn field_strategy() -> impl Strategy<Value = LightField> {
    (1usize..=3, 1usize..=6, 1usize..=6)
        .prop_flat_map(|(m, n_r, n_c)| {
            let len = m * m * n_r * n_c;
            (Just((m, n_r, n_c)), prop::collection::vec(0.0f64..1.0, len))
        })
        .prop_map(|((m, n_r, n_c), vals)| {
            let views = vals
                .chunks(n_r * n_c)
                .map(|c| Array2::from_shape_vec((n_r, n_c), c.to_vec()).unwrap())
                .collect();
            LightField::new(m, views).unwrap()
        })
}

fn adjoint_case() -> impl Strategy<Value = (usize, (usize, usize), Vec<f64>, Vec<f64>)> {
    (1usize..=3, 1usize..=4, 1usize..=4).prop_flat_map(|(alpha, lo_r, lo_c)| {
        let hi_len = lo_r * lo_c * alpha * alpha;
        (
            Just(alpha),
            Just((lo_r, lo_c)),
            prop::collection::vec(-1.0f64..1.0, hi_len),
            prop::collection::vec(-1.0f64..1.0, lo_r * lo_c),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn vectorize_devectorize_round_trip(lf in field_strategy()) {
        let layout = lf.layout();
        let u = vectorize(&lf);
        prop_assert_eq!(u.data.len(), layout.total_len());
        let back = devectorize(&u).unwrap();
        prop_assert_eq!(&back, &lf);
        // Spot-check the documented entry order on the last pixel.
        let (x, y) = (layout.n_r - 1, layout.n_c - 1);
        let k0 = layout.m * layout.m - 1;
        prop_assert_eq!(u.data[layout.vertex(k0, x, y)], lf.views()[k0][[x, y]]);
    }

    #[test]
    fn degrade_adjoint_identity((alpha, (lo_r, lo_c), u, w) in adjoint_case()) {
        let sb = BlurSampleOperator::new((lo_r * alpha, lo_c * alpha), alpha).unwrap();
        let mut au = vec![0.0; lo_r * lo_c];
        let mut atw = vec![0.0; u.len()];
        sb.apply_vec(&u, &mut au);
        sb.apply_adjoint_vec(&w, &mut atw);
        let lhs: f64 = au.iter().zip(&w).map(|(a, b)| a * b).sum();
        let rhs: f64 = u.iter().zip(&atw).map(|(a, b)| a * b).sum();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn tile_plan_covers_every_pixel(
        rows in 4usize..=40,
        cols in 4usize..=40,
        side in 2usize..=20,
        overlap_frac in 0usize..100,
    ) {
        let overlap = overlap_frac * (side - 1) / 100;
        let plan = plan_tiles((rows, cols), side, overlap).unwrap();
        let (t_r, t_c) = plan.tile_shape;
        prop_assert!(t_r <= rows && t_c <= cols);
        let mut covered = vec![false; rows * cols];
        for &(r0, c0) in &plan.origins {
            prop_assert!(r0 + t_r <= rows && c0 + t_c <= cols);
            for r in r0..r0 + t_r {
                for c in c0..c0 + t_c {
                    covered[r * cols + c] = true;
                }
            }
        }
        prop_assert!(covered.iter().all(|&c| c));
    }
}

proptest! {
    // Warp construction is the most expensive invariant; keep the case
    // count low and the field small.
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn sq_warp_rows_sum_to_one_or_zero(seed in any::<u64>()) {
        let lf = synth::binary_shifted_field(2, 12, 12, 1, seed);
        let layout = lf.layout();
        let sb = BlurSampleOperator::new((layout.n_r, layout.n_c), 2).unwrap();
        let params = GraphParams {
            patch_side: 3,
            sigma: 0.6,
            window: 5,
        };
        let (warps, masks) = build_warp_sq(&lf, &params, &sb).unwrap();
        // Ordered angularly adjacent pairs on an M×M grid: 4·M·(M−1) = 8 at M=2.
        prop_assert_eq!(warps.len(), 8);
        for ((target, source), w) in warps.pairs() {
            prop_assert!(masks.get(target, source).is_some());
            for s in w.row_sums() {
                let stochastic = (s - 1.0).abs() <= 1e-12;
                let empty = s == 0.0;
                prop_assert!(stochastic || empty, "row sum {s}");
            }
        }
    }
}
