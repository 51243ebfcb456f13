use nalgebra::DMatrix;
use pgl::numerics::{lowest_eigenpairs, quad, BandedSymmetricMatrix, RadialGrid};
use pgl::profile::{audit, read_profile_csv, solve_shooting, write_profile_csv, Params};
use proptest::prelude::*;

fn grid_strategy() -> impl Strategy<Value = RadialGrid> {
    (0.0f64..1.0, 8usize..200).prop_map(|(seed, n)| {
        // smoothly varying spacing, adjacent ratios below 1.5
        let mut x = 0.0;
        let mut nodes = vec![0.0];
        for k in 1..n {
            x += 0.1 * (1.2 + (0.3 * k as f64 + 6.0 * seed).sin());
            nodes.push(x);
        }
        RadialGrid::from_nodes(nodes).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quadrature_is_linear(grid in grid_strategy(), a in -5.0f64..5.0, b in -5.0f64..5.0) {
        let u: Vec<f64> = grid.nodes().iter().map(|r| r.sin()).collect();
        let v: Vec<f64> = grid.nodes().iter().map(|r| (r * r).cos() + r).collect();
        let w: Vec<f64> = u.iter().zip(&v).map(|(x, y)| a * x + b * y).collect();
        let lhs = quad(&grid, &w).unwrap();
        let rhs = a * quad(&grid, &u).unwrap() + b * quad(&grid, &v).unwrap();
        let size = a.abs() * quad(&grid, &u.iter().map(|x| x.abs()).collect::<Vec<_>>()).unwrap()
            + b.abs() * quad(&grid, &v.iter().map(|x| x.abs()).collect::<Vec<_>>()).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * size.max(1.0));
    }

    #[test]
    fn weights_sum_to_radius(grid in grid_strategy()) {
        let total: f64 = grid.weights().iter().sum();
        prop_assert!((total - grid.radius()).abs() <= 1e-12 * grid.radius());
        prop_assert!(grid.weights().iter().all(|&w| w > 0.0));
    }

    #[test]
    fn graded_grids_are_ordered_and_finer_at_ends(radius in 8.0f64..40.0, nodes in 1500usize..5000) {
        let g = RadialGrid::graded(radius, nodes).unwrap();
        let r = g.nodes();
        prop_assert_eq!(r.len(), nodes);
        prop_assert_eq!(r[0], 0.0);
        prop_assert_eq!(*r.last().unwrap(), radius);
        prop_assert!(r.windows(2).all(|w| w[1] > w[0]));
        let first = r[1] - r[0];
        let last = r[nodes - 1] - r[nodes - 2];
        let interior = r[nodes / 2 + 1] - r[nodes / 2];
        prop_assert!(first < interior && last < interior);
    }

    #[test]
    fn banded_eigenvalues_ascend_and_match_dense(n in 6usize..40, bw in 1usize..5, seed in any::<u64>()) {
        let mut state = seed | 1;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state % 10_000) as f64 / 5_000.0 - 1.0
        };
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i.saturating_sub(bw)..=i {
                let v = next();
                dense[i][j] = v;
                dense[j][i] = v;
            }
        }
        let m = BandedSymmetricMatrix::from_dense(&dense, bw);
        let k = 4.min(n);
        let pairs = lowest_eigenpairs(&m, k).unwrap();
        let mut oracle: Vec<f64> =
            DMatrix::from_fn(n, n, |i, j| dense[i][j]).symmetric_eigen().eigenvalues.iter().copied().collect();
        oracle.sort_by(f64::total_cmp);
        prop_assert!(pairs.windows(2).all(|w| w[0].value <= w[1].value));
        for (pair, exact) in pairs.iter().zip(&oracle) {
            prop_assert!((pair.value - exact).abs() < 1e-9, "{} vs {}", pair.value, exact);
            let res: f64 = m
                .matvec(&pair.vector)
                .iter()
                .zip(&pair.vector)
                .map(|(a, b)| (a - pair.value * b).powi(2))
                .sum::<f64>()
                .sqrt();
            prop_assert!(res < 1e-8);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn audits_pass_across_p(p in 2.1f64..60.0) {
        let params = Params::new(p).unwrap();
        let prof = solve_shooting(params, &pgl::default_grid(params).unwrap(), 1e-10).unwrap();
        let rep = audit(&prof, 1e-8);
        let failed: Vec<_> = rep.failures().map(|c| c.name.clone()).collect();
        prop_assert!(failed.is_empty(), "p = {}: {:?}", p, failed);
    }

    #[test]
    fn profile_csv_round_trips(p in 2.2f64..20.0) {
        let params = Params::new(p).unwrap();
        let grid = RadialGrid::graded(params.default_radius(), 1000).unwrap();
        let prof = solve_shooting(params, &grid, 1e-10).unwrap();
        let mut buf = Vec::new();
        write_profile_csv(&prof, &mut buf).unwrap();
        let t = read_profile_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(&t.r[..], prof.r());
        prop_assert_eq!(&t.f[..], prof.f());
        prop_assert_eq!(&t.df[..], prof.df());
        prop_assert_eq!(&t.h[..], prof.h());
        prop_assert_eq!(&t.grad_norm[..], prof.gradient_norm());
    }
}

#[test]
fn exponents_at_most_two_are_rejected() {
    for p in [2.0, 1.5, -1.0, f64::NAN] {
        assert!(Params::new(p).is_err());
    }
}
