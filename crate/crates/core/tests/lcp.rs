use copostab_core::lcp::{is_p_matrix, is_r0_matrix, lcp_solve_all, LcpInstance};
use copostab_core::numkit::{inverse, Matrix};
use copostab_testkit::lcp::all_solutions;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

fn matrix(n: usize, lo: f64, hi: f64) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(lo..hi, n * n).prop_map(move |d| Matrix::from_row_major(n, n, d).unwrap())
}

/// Strictly row diagonally dominant with positive diagonal, hence a P-matrix.
fn dominant(n: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        let mut off = 0.0;
        for j in 0..n {
            if i != j {
                m[(i, j)] = rng.random_range(-1.0..1.0);
                off += m[(i, j)].abs();
            }
        }
        m[(i, i)] = off + rng.random_range(0.1..1.0);
    }
    m
}

fn subsets(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (1u32..(1 << n)).map(move |mask| (0..n).filter(|i| mask & (1 << i) != 0).collect())
}

proptest! {
    #[test]
    fn solutions_are_complementary(
        (m, q) in (1usize..=4).prop_flat_map(|n| (matrix(n, -2.0, 2.0), prop::collection::vec(-3.0f64..3.0, n)))
    ) {
        let sols = lcp_solve_all(&LcpInstance::new(q.clone(), m.clone()).unwrap()).unwrap();
        for s in &sols {
            let w: Vec<f64> = m.matvec(&s.lambda).iter().zip(&q).map(|(a, b)| a + b).collect();
            // near-singular principal blocks give huge solutions whose slack carries
            // unavoidable rounding of order eps * |M| |lambda|
            let big = s.lambda.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let comp_tol = if big <= 100.0 { 1e-8 } else { 1e-8 * (1.0 + big).powi(2) };
            for i in 0..q.len() {
                prop_assert!(s.lambda[i] >= -1e-8);
                prop_assert!(w[i] >= -1e-8 * (1.0 + big));
                prop_assert!((s.lambda[i] * w[i]).abs() <= comp_tol);
                prop_assert!((w[i] - s.slack[i]).abs() <= 1e-8);
            }
        }
        // every brute-force solution is found
        for b in all_solutions(&q, &to_rows(&m), 1e-10) {
            prop_assert!(sols.iter().any(|s| s.lambda.iter().zip(&b).all(|(u, v)| (u - v).abs() <= 1e-7)),
                "missing {:?}", b);
        }
    }

    #[test]
    fn r0_iff_trivial_homogeneous_solution(m in (1usize..=3).prop_flat_map(|n| {
        prop::collection::vec(-2i32..=2, n * n)
            .prop_map(move |d| Matrix::from_row_major(n, n, d.into_iter().map(f64::from).collect()).unwrap())
    })) {
        let n = m.rows();
        let sols = lcp_solve_all(&LcpInstance::new(vec![0.0; n], m.clone()).unwrap());
        let trivial = match sols {
            Ok(s) => s.len() == 1 && s[0].lambda.iter().all(|v| v.abs() <= 1e-12),
            Err(_) => false,
        };
        prop_assert_eq!(is_r0_matrix(&m).unwrap(), trivial);
    }
}

#[test]
fn p_matrix_unique_homogeneous_and_bounded() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for trial in 0..10 {
        let n = 1 + trial % 4;
        let m = dominant(n, &mut rng);
        assert!(is_p_matrix(&m).unwrap());
        // |lambda|_inf <= max_S |M_SS^{-1}|_inf |q|_inf since lambda_S = -M_SS^{-1} q_S
        let bound = subsets(n)
            .map(|s| inverse(&m.submatrix(&s, &s)).unwrap().norm_inf())
            .fold(0.0f64, f64::max);
        for _ in 0..200 {
            let q: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
            let sols = lcp_solve_all(&LcpInstance::new(q.clone(), m.clone()).unwrap()).unwrap();
            assert_eq!(sols.len(), 1, "q = {q:?}");
            let lambda = &sols[0].lambda;
            let qn = q.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let ln = lambda.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            assert!(ln <= bound * qn * (1.0 + 1e-9) + 1e-12);

            let tau = rng.random_range(0.1..10.0);
            let scaled: Vec<f64> = q.iter().map(|v| v * tau).collect();
            let s2 = lcp_solve_all(&LcpInstance::new(scaled, m.clone()).unwrap()).unwrap();
            assert_eq!(s2.len(), 1);
            for (a, b) in s2[0].lambda.iter().zip(lambda) {
                assert!((a - tau * b).abs() <= 1e-8 * (1.0 + tau * b.abs()));
            }
        }
    }
}

#[test]
fn non_p_matrix_can_have_several_solutions() {
    let m = Matrix::from_rows(&[[-1.0]]);
    assert!(!is_p_matrix(&m).unwrap());
    let sols = lcp_solve_all(&LcpInstance::new(vec![1.0], m).unwrap()).unwrap();
    assert_eq!(sols.len(), 2);
}
