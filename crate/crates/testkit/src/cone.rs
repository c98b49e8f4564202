use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dense::{blocks, matmul, matvec, norm1, quad, transpose, zeros, Mat};
use crate::lcp::all_solutions;
use crate::qp::{face_min, Row};

/// `x+ = a x + c lambda`, `0 <= lambda ⊥ d x + f lambda >= 0`.
#[derive(Debug, Clone)]
pub struct PlainDlcs {
    pub a: Mat,
    pub c: Mat,
    pub d: Mat,
    pub f: Mat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cone {
    State,
    Graph,
    Extended,
}

impl PlainDlcs {
    pub fn nx(&self) -> usize {
        self.a.len()
    }

    pub fn nc(&self) -> usize {
        self.f.len()
    }

    pub fn dim(&self, cone: Cone) -> usize {
        match cone {
            Cone::State => self.nx(),
            Cone::Graph => self.nx() + self.nc(),
            Cone::Extended => self.nx() + 2 * self.nc(),
        }
    }

    pub fn advance(&self, x: &[f64], lambda: &[f64]) -> Vec<f64> {
        matvec(&self.a, x)
            .iter()
            .zip(matvec(&self.c, lambda))
            .map(|(u, v)| u + v)
            .collect()
    }

    /// `V(x+) - V(x)` written as a form in `(x, lambda)`.
    pub fn state_decrease(&self, p: &Mat) -> Mat {
        // x+ = [a c] z, x = [I 0] z
        let nx = self.nx();
        let nc = self.nc();
        let step = blocks(&[vec![&self.a, &self.c]]);
        let keep = blocks(&[vec![&crate::dense::identity(nx), &zeros(nx, nc)]]);
        let plus = matmul(&transpose(&step), &matmul(p, &step));
        let minus = matmul(&transpose(&keep), &matmul(p, &keep));
        sub(&plus, &minus)
    }

    /// `V(x+, lambda_next) - V(x, lambda)` as a form in `(x, lambda, lambda_next)`,
    /// with `V(x, lambda) = (x, lambda)^T p (x, lambda)`.
    pub fn extended_decrease(&self, p: &Mat) -> Mat {
        let nx = self.nx();
        let nc = self.nc();
        let eye_c = crate::dense::identity(nc);
        let eye_x = crate::dense::identity(nx);
        let now = blocks(&[
            vec![&eye_x, &zeros(nx, nc), &zeros(nx, nc)],
            vec![&zeros(nc, nx), &eye_c, &zeros(nc, nc)],
        ]);
        let next = blocks(&[
            vec![&self.a, &self.c, &zeros(nx, nc)],
            vec![&zeros(nc, nx), &zeros(nc, nc), &eye_c],
        ]);
        let plus = matmul(&transpose(&next), &matmul(p, &next));
        let minus = matmul(&transpose(&now), &matmul(p, &now));
        sub(&plus, &minus)
    }

    /// Constraint sets of every orthant/complementarity piece of the cone on the unit
    /// 1-norm sphere.
    pub fn pieces(&self, cone: Cone) -> Vec<(Vec<Row>, Vec<Row>)> {
        let (nx, nc) = (self.nx(), self.nc());
        let dim = self.dim(cone);
        let unit = |i: usize, s: f64| {
            let mut e = vec![0.0; dim];
            e[i] = s;
            e
        };
        // slack rows as functions of the full vector
        let mut slack = Vec::new();
        for i in 0..nc {
            let mut r = vec![0.0; dim];
            if cone != Cone::State {
                r[..nx].copy_from_slice(&self.d[i]);
                r[nx..nx + nc].copy_from_slice(&self.f[i]);
            }
            slack.push(r);
        }
        let da = matmul(&self.d, &self.a);
        let dc = matmul(&self.d, &self.c);
        let mut next_slack = Vec::new();
        for i in 0..nc {
            let mut r = vec![0.0; dim];
            if cone == Cone::Extended {
                r[..nx].copy_from_slice(&da[i]);
                r[nx..nx + nc].copy_from_slice(&dc[i]);
                r[nx + nc..].copy_from_slice(&self.f[i]);
            }
            next_slack.push(r);
        }
        let n_act = if cone == Cone::State { 1 } else { 1u32 << nc };
        let n_next = if cone == Cone::Extended {
            1u32 << nc
        } else {
            1
        };
        let mut out = Vec::new();
        for signs in 0u32..(1 << nx) {
            for act in 0..n_act {
                for nact in 0..n_next {
                    let mut eq = Vec::new();
                    let mut ineq = Vec::new();
                    let mut sphere = vec![1.0; dim];
                    for j in 0..nx {
                        let s = if signs & (1 << j) != 0 { -1.0 } else { 1.0 };
                        sphere[j] = s;
                        ineq.push(Row::new(unit(j, s), 0.0));
                    }
                    eq.push(Row::new(sphere, 1.0));
                    let mut comp = |bits: u32, offset: usize, rows: &[Vec<f64>]| {
                        for i in 0..nc {
                            if bits & (1 << i) != 0 {
                                ineq.push(Row::new(unit(offset + i, 1.0), 0.0));
                                eq.push(Row::new(rows[i].clone(), 0.0));
                            } else {
                                eq.push(Row::new(unit(offset + i, 1.0), 0.0));
                                ineq.push(Row::new(rows[i].clone(), 0.0));
                            }
                        }
                    };
                    if cone != Cone::State {
                        comp(act, nx, &slack);
                    }
                    if cone == Cone::Extended {
                        comp(nact, nx + nc, &next_slack);
                    }
                    out.push((eq, ineq));
                }
            }
        }
        out
    }

    /// Exact minimum of the form over the cone on the unit 1-norm sphere.
    pub fn exact_min(&self, form: &Mat, cone: Cone) -> Option<f64> {
        self.pieces(cone)
            .iter()
            .filter_map(|(eq, ineq)| face_min(form, eq, ineq).map(|(v, _)| v))
            .min_by(f64::total_cmp)
    }

    /// Cone points on the unit 1-norm sphere from Gaussian states. States whose LCP has
    /// no solution are rejected; every solution branch yields a point.
    pub fn sample<R: Rng>(&self, cone: Cone, count: usize, rng: &mut R) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(count);
        let mut attempts = 0;
        while out.len() < count && attempts < 100 * count {
            attempts += 1;
            let x: Vec<f64> = (0..self.nx())
                .map(|_| StandardNormal.sample(&mut *rng))
                .collect();
            if cone == Cone::State {
                out.push(normalize(&x));
                continue;
            }
            for lambda in all_solutions(&matvec(&self.d, &x), &self.f, 1e-10) {
                if cone == Cone::Graph {
                    out.push(normalize(&[x.clone(), lambda].concat()));
                    continue;
                }
                let xn = self.advance(&x, &lambda);
                for ln in all_solutions(&matvec(&self.d, &xn), &self.f, 1e-10) {
                    out.push(normalize(&[x.clone(), lambda.clone(), ln].concat()));
                }
            }
        }
        out.truncate(count);
        out
    }

    /// Smallest form value over sampled cone points.
    pub fn sampled_min<R: Rng>(
        &self,
        form: &Mat,
        cone: Cone,
        count: usize,
        rng: &mut R,
    ) -> Option<f64> {
        self.sample(cone, count, rng)
            .iter()
            .map(|v| quad(form, v))
            .min_by(f64::total_cmp)
    }
}

fn sub(a: &Mat, b: &Mat) -> Mat {
    a.iter()
        .zip(b)
        .map(|(r, s)| r.iter().zip(s).map(|(x, y)| x - y).collect())
        .collect()
}

fn normalize(v: &[f64]) -> Vec<f64> {
    let s = norm1(v);
    v.iter().map(|c| c / s).collect()
}

/// Random symmetric matrix with entries in `[-1, 1]`.
pub fn random_symmetric<R: Rng>(n: usize, rng: &mut R) -> Mat {
    let mut m = zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = rng.random_range(-1.0..1.0);
            m[i][j] = v;
            m[j][i] = v;
        }
    }
    m
}

/// Random instance with entries in `[-1, 1]` and a feedthrough matrix shifted toward
/// positive diagonal dominance so that most states have LCP solutions.
pub fn random_dlcs<R: Rng>(nx: usize, nc: usize, rng: &mut R) -> PlainDlcs {
    let mut gen = |r: usize, c: usize| -> Mat {
        (0..r)
            .map(|_| (0..c).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect()
    };
    let a = gen(nx, nx);
    let c = gen(nx, nc);
    let d = gen(nc, nx);
    let mut f = gen(nc, nc);
    for (i, row) in f.iter_mut().enumerate() {
        row[i] = row[i].abs() + 0.5 * nc as f64;
    }
    PlainDlcs { a, c, d, f }
}
