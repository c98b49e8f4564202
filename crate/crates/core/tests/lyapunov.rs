use copostab_core::lyapunov::{
    cqlf_decrease_matrix, decrease_identity, discretization_residual, eqlf_decrease_matrix,
    is_negative_definite, slemma_cqlf, slemma_eqlf, Certificate, Mode,
};
use copostab_core::numkit::{is_positive_definite, Matrix};
use copostab_core::system::{Dlcs, Lcs};
use copostab_testkit::cone::PlainDlcs;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random(r: usize, c: usize, scale: f64, rng: &mut ChaCha8Rng) -> Matrix {
    Matrix::from_row_major(
        r,
        c,
        (0..r * c)
            .map(|_| rng.random_range(-scale..scale))
            .collect(),
    )
    .unwrap()
}

fn symmetric(n: usize, rng: &mut ChaCha8Rng) -> Matrix {
    random(n, n, 1.0, rng).symmetrize()
}

fn random_dlcs(rng: &mut ChaCha8Rng) -> Dlcs {
    let nx = rng.random_range(1..=3);
    let nc = rng.random_range(1..=2);
    Dlcs::new(
        random(nx, nx, 1.0, rng),
        random(nx, nc, 1.0, rng),
        random(nc, nx, 1.0, rng),
        random(nc, nc, 1.0, rng),
    )
    .unwrap()
}

fn plain(d: &Dlcs) -> PlainDlcs {
    let rows = |m: &Matrix| (0..m.rows()).map(|i| m.row(i).to_vec()).collect();
    PlainDlcs {
        a: rows(&d.dynamics),
        c: rows(&d.input),
        d: rows(&d.output),
        f: rows(&d.feedthrough),
    }
}

fn as_matrix(m: &[Vec<f64>]) -> Matrix {
    Matrix::from_rows(m)
}

fn vector(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-2.0..2.0)).collect()
}

#[test]
fn decrease_identity_holds() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..10_000 {
        let d = random_dlcs(&mut rng);
        let (nx, nc) = (d.n_x(), d.n_c());
        let x = vector(nx, &mut rng);
        let lambda = vector(nc, &mut rng);
        let next = vector(nc, &mut rng);
        for mode in [Mode::Cqlf, Mode::Eqlf] {
            let p = symmetric(mode.candidate_dim(nx, nc), &mut rng);
            let cert = Certificate::new(mode, p, &d).unwrap();
            let (lhs, rhs) = decrease_identity(&d, &cert, &x, &lambda, Some(&next)).unwrap();
            assert!(
                (lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()),
                "{mode}: {lhs} vs {rhs}"
            );
        }
    }
}

#[test]
fn decrease_matrices_match_reference_formulas() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for _ in 0..200 {
        let d = random_dlcs(&mut rng);
        let (nx, nc) = (d.n_x(), d.n_c());
        let reference = plain(&d);
        let pxx = symmetric(nx, &mut rng);
        let rows: Vec<Vec<f64>> = (0..nx).map(|i| pxx.row(i).to_vec()).collect();
        let m = cqlf_decrease_matrix(&d, &pxx).unwrap();
        assert!(
            m.sub(&as_matrix(&reference.state_decrease(&rows)))
                .max_abs()
                <= 1e-12
        );

        let p = symmetric(nx + nc, &mut rng);
        let rows: Vec<Vec<f64>> = (0..nx + nc).map(|i| p.row(i).to_vec()).collect();
        let mh = eqlf_decrease_matrix(&d, &p).unwrap();
        assert!(
            mh.sub(&as_matrix(&reference.extended_decrease(&rows)))
                .max_abs()
                <= 1e-12
        );
    }
}

#[test]
fn extended_matrix_embeds_state_matrix() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for _ in 0..200 {
        let d = random_dlcs(&mut rng);
        let (nx, nc) = (d.n_x(), d.n_c());
        let pxx = symmetric(nx, &mut rng);
        let mut p = Matrix::zeros(nx + nc, nx + nc);
        p.set_block(0, 0, &pxx);
        let m = cqlf_decrease_matrix(&d, &pxx).unwrap();
        let mh = eqlf_decrease_matrix(&d, &p).unwrap();
        assert_eq!(mh.block(0, 0, nx + nc, nx + nc), m);
    }
}

fn benchmark_lcs() -> Vec<(&'static str, Lcs)> {
    let m = |rows: &[&[f64]]| Matrix::from_rows(rows);
    vec![
        (
            "cam31",
            Lcs::new(
                m(&[&[1.0]]),
                m(&[&[2.0, -2.0]]),
                m(&[&[1.0], &[-1.0]]),
                m(&[&[1.0, 3.0], &[0.0, 1.0]]),
            )
            .unwrap(),
        ),
        (
            "cam32",
            Lcs::new(
                m(&[&[-1.0]]),
                m(&[&[0.0, 1.0]]),
                m(&[&[1.0], &[1.0]]),
                m(&[&[1.0, 3.0], &[0.0, 1.0]]),
            )
            .unwrap(),
        ),
        (
            "cam33",
            Lcs::new(
                m(&[&[-5.0, -4.0, 0.0], &[-1.0, -2.0, 0.0], &[0.0, 0.0, 1.0]]),
                m(&[&[-3.0, 0.0, 0.0], &[-21.0, 0.0, 0.0], &[0.0, 2.0, -2.0]]),
                m(&[&[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0], &[0.0, 0.0, -1.0]]),
                m(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 3.0], &[0.0, 0.0, 1.0]]),
            )
            .unwrap(),
        ),
    ]
}

fn residual_ratio(lcs: &Lcs, p: &Matrix, dt: f64, theta: f64) -> f64 {
    discretization_residual(lcs, p, dt, theta).unwrap()
        / discretization_residual(lcs, p, dt / 2.0, theta).unwrap()
}

#[test]
fn discretization_residual_is_second_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    for (name, lcs) in benchmark_lcs() {
        for theta in [0.0, 1.0] {
            for _ in 0..20 {
                let p = symmetric(lcs.n_x(), &mut rng);
                // cam33 leaves the asymptotic regime at dt = 0.1 (|C| has entries of 21)
                if name != "cam33" {
                    let ratio = residual_ratio(&lcs, &p, 0.1, theta);
                    assert!(
                        (3.0..=5.0).contains(&ratio),
                        "{name} theta={theta}: ratio {ratio}"
                    );
                }
                let ratio = residual_ratio(&lcs, &p, 0.002, theta);
                assert!(
                    (3.8..=4.2).contains(&ratio),
                    "{name} theta={theta} small dt: ratio {ratio}"
                );
            }
        }
    }
}

/// Contractive dynamics with a feedthrough whose symmetric part is negative definite,
/// so that cross weights can make the relaxation matrices negative definite.
fn slemma_system(rng: &mut ChaCha8Rng) -> Dlcs {
    let nx = rng.random_range(1..=3);
    let nc = rng.random_range(1..=2);
    let a = random(nx, nx, 0.5 / nx as f64, rng);
    let c = random(nx, nc, 0.2, rng);
    let d = random(nc, nx, 1.0, rng);
    let f = Matrix::identity(nc)
        .scale(-1.0)
        .add(&random(nc, nc, 0.2, rng));
    Dlcs::new(a, c, d, f).unwrap()
}

fn cross_weight(nc: usize, rng: &mut ChaCha8Rng) -> Matrix {
    // couples the slack block with the multiplier block
    let mut w = Matrix::zeros(2 * nc, 2 * nc);
    for i in 0..nc {
        for j in 0..nc {
            let v = rng.random_range(0.0..2.0) * if i == j { 1.0 } else { 0.1 };
            w[(i, nc + j)] = v;
            w[(nc + j, i)] = v;
        }
    }
    w
}

/// A point of `{(x, lambda) : lambda >= 0, D x + F lambda >= 0}` by rejection; the set can
/// collapse to the origin, so attempts are capped.
fn hull_point(d: &Dlcs, rng: &mut ChaCha8Rng) -> Option<(Vec<f64>, Vec<f64>)> {
    (0..10_000).find_map(|_| {
        let x = vector(d.n_x(), rng);
        let lambda: Vec<f64> = (0..d.n_c()).map(|_| rng.random_range(0.0..2.0)).collect();
        let w: Vec<f64> = d
            .output
            .matvec(&x)
            .iter()
            .zip(d.feedthrough.matvec(&lambda))
            .map(|(a, b)| a + b)
            .collect();
        w.iter().all(|v| *v >= 0.0).then_some((x, lambda))
    })
}

#[test]
fn slemma_relaxation_implies_decrease() {
    let mut rng = ChaCha8Rng::seed_from_u64(35);
    let mut certified = 0;
    for _ in 0..2000 {
        let d = slemma_system(&mut rng);
        let p = Matrix::identity(d.n_x());
        let w = cross_weight(d.n_c(), &mut rng);
        if !is_negative_definite(&slemma_cqlf(&d, &p, &w).unwrap()).unwrap() {
            continue;
        }
        let Some(first) = hull_point(&d, &mut rng) else {
            continue;
        };
        certified += 1;
        let points: Vec<_> = std::iter::once(first)
            .chain((0..200).filter_map(|_| hull_point(&d, &mut rng)))
            .collect();
        for (x, lambda) in points {
            let xn = d.advance(&x, &lambda);
            let psi = p.quad_form(&xn) - p.quad_form(&x);
            let size: f64 = x.iter().chain(&lambda).map(|v| v * v).sum();
            assert!(size < 1e-12 || psi < 0.0, "psi = {psi}");
        }
    }
    assert!(certified >= 20, "only {certified} certified draws");
}

#[test]
fn extended_slemma_relaxation_implies_sign_conditions() {
    let mut rng = ChaCha8Rng::seed_from_u64(36);
    let mut certified = 0;
    for _ in 0..2000 {
        let d = slemma_system(&mut rng);
        let (nx, nc) = (d.n_x(), d.n_c());
        let p = Matrix::identity(nx + nc);
        let w1 = cross_weight(nc, &mut rng).scale(0.1);
        let w2 = cross_weight(nc, &mut rng);
        let w3 = cross_weight(nc, &mut rng);
        let (pos, dec) = slemma_eqlf(&d, &p, &w1, &w2, &w3).unwrap();
        if !is_positive_definite(&pos).unwrap() || !is_negative_definite(&dec).unwrap() {
            continue;
        }
        let Some(first) = hull_point(&d, &mut rng) else {
            continue;
        };
        certified += 1;
        let cert = Certificate::new(Mode::Eqlf, p.clone(), &d).unwrap();
        let points: Vec<_> = std::iter::once(first)
            .chain((0..200).filter_map(|_| hull_point(&d, &mut rng)))
            .collect();
        for (x, lambda) in points {
            let xn = d.advance(&x, &lambda);
            let size: f64 = x.iter().chain(&lambda).map(|v| v * v).sum();
            if size < 1e-12 {
                continue;
            }
            assert!(cert.value(&x, &lambda) > 0.0);
            // any next multiplier in the convex hull at the successor
            let next: Vec<f64> = (0..nc).map(|_| rng.random_range(0.0..2.0)).collect();
            let wn: Vec<f64> = d
                .output
                .matvec(&xn)
                .iter()
                .zip(d.feedthrough.matvec(&next))
                .map(|(a, b)| a + b)
                .collect();
            if wn.iter().all(|v| *v >= 0.0) {
                assert!(cert.value(&xn, &next) - cert.value(&x, &lambda) < 0.0);
            }
        }
    }
    assert!(certified >= 20, "only {certified} certified draws");
}
