//! Dense primal active-set solver for small convex QPs.
//!
//! Minimises ½xᵀQx + cᵀx subject to `eq` rows (a·x = b) and `le` rows
//! (a·x ≤ b). Q only needs to be positive semidefinite; flat directions of
//! the reduced Hessian are followed until a constraint blocks them, so the
//! feasible set must be bounded along any such direction.

/// One linear constraint row.
#[derive(Clone, Debug)]
pub struct Row {
    pub a: Vec<f64>,
    pub b: f64,
}

#[derive(Clone, Debug, Default)]
pub struct Qp {
    pub n: usize,
    /// Row-major n×n Hessian.
    pub q: Vec<f64>,
    pub c: Vec<f64>,
    pub eq: Vec<Row>,
    pub le: Vec<Row>,
}

#[derive(Clone, Debug)]
pub struct QpSolution {
    pub x: Vec<f64>,
    pub value: f64,
    /// False when the iteration cap was hit; `x` is then feasible but maybe not optimal.
    pub converged: bool,
}

const FEAS_TOL: f64 = 1e-11;
const KKT_TOL: f64 = 1e-10;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Qp {
    pub fn new(n: usize) -> Self {
        Qp {
            n,
            q: vec![0.0; n * n],
            c: vec![0.0; n],
            eq: Vec::new(),
            le: Vec::new(),
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let qx = self.hess_mul(x);
        0.5 * dot(x, &qx) + dot(&self.c, x)
    }

    fn hess_mul(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| dot(&self.q[i * self.n..(i + 1) * self.n], x)).collect()
    }

    /// Largest violation of any constraint at `x`.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let e = self.eq.iter().map(|r| (dot(&r.a, x) - r.b).abs());
        let l = self.le.iter().map(|r| (dot(&r.a, x) - r.b).max(0.0));
        e.chain(l).fold(0.0, f64::max)
    }

    /// Solve from a feasible starting point.
    pub fn solve(&self, x0: &[f64]) -> QpSolution {
        let n = self.n;
        let mut x = x0.to_vec();
        // working set: equality rows always, plus tight inequalities kept independent
        let mut work: Vec<usize> = Vec::new();
        let mut basis = Orth::default();
        for r in &self.eq {
            basis.push(&r.a);
        }
        for (i, r) in self.le.iter().enumerate() {
            if (dot(&r.a, &x) - r.b).abs() <= FEAS_TOL * (1.0 + r.b.abs()) && basis.push(&r.a) {
                work.push(i);
            }
        }
        let cap = 200 + 20 * (n + self.le.len());
        for _ in 0..cap {
            let g: Vec<f64> = self.hess_mul(&x).iter().zip(&self.c).map(|(a, b)| a + b).collect();
            let rows: Vec<&[f64]> = self.eq.iter().map(|r| r.a.as_slice()).chain(work.iter().map(|&i| self.le[i].a.as_slice())).collect();
            let z = null_space(&rows, n);
            let step = if z.is_empty() {
                None
            } else {
                Some(self.reduced_step(&z, &g))
            };
            let gnorm = g.iter().map(|v| v.abs()).fold(0.0, f64::max);
            match step {
                Some(Step::Newton(p)) if p.iter().map(|v| v.abs()).fold(0.0, f64::max) > 1e-13 * (1.0 + gnorm) => {
                    let (alpha, block) = self.ratio_test(&x, &p, &work, 1.0);
                    for (xi, pi) in x.iter_mut().zip(&p) {
                        *xi += alpha * pi;
                    }
                    if let Some(b) = block {
                        work.push(b);
                    }
                }
                Some(Step::Ray(d)) => {
                    let (alpha, block) = self.ratio_test(&x, &d, &work, f64::INFINITY);
                    let Some(b) = block else {
                        // unbounded along a flat direction; not expected for bounded sets
                        return QpSolution {
                            value: self.value(&x),
                            x,
                            converged: false,
                        };
                    };
                    for (xi, di) in x.iter_mut().zip(&d) {
                        *xi += alpha * di;
                    }
                    work.push(b);
                }
                _ => {
                    // stationary on the working set: check multipliers
                    let mu = multipliers(&rows, &g);
                    let ne = self.eq.len();
                    let scale = 1.0 + gnorm;
                    let worst = (0..work.len())
                        .filter(|&j| mu[ne + j] < -KKT_TOL * scale)
                        .min_by(|&a, &b| mu[ne + a].total_cmp(&mu[ne + b]));
                    match worst {
                        Some(j) => {
                            work.remove(j);
                        }
                        None => {
                            return QpSolution {
                                value: self.value(&x),
                                x,
                                converged: true,
                            };
                        }
                    }
                }
            }
        }
        QpSolution {
            value: self.value(&x),
            x,
            converged: false,
        }
    }

    fn reduced_step(&self, z: &[Vec<f64>], g: &[f64]) -> Step {
        let r = z.len();
        let qz: Vec<Vec<f64>> = z.iter().map(|col| self.hess_mul(col)).collect();
        let mut h = vec![0.0; r * r];
        for i in 0..r {
            for j in 0..r {
                h[i * r + j] = dot(&z[i], &qz[j]);
            }
        }
        let rg: Vec<f64> = z.iter().map(|col| dot(col, g)).collect();
        let (lam, u) = jacobi_eigen(h, r);
        let lmax = lam.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let tol = 1e-10 * lmax.max(1e-300);
        let gscale = 1e-12 * (1.0 + rg.iter().map(|v| v.abs()).fold(0.0, f64::max));
        let mut p_red = vec![0.0; r];
        for j in 0..r {
            let uj: Vec<f64> = (0..r).map(|i| u[i * r + j]).collect();
            let proj = dot(&uj, &rg);
            if lam[j] <= tol {
                if proj.abs() > gscale {
                    let d_red: Vec<f64> = uj.iter().map(|v| -v * proj.signum()).collect();
                    return Step::Ray(expand(z, &d_red, self.n));
                }
                continue;
            }
            for i in 0..r {
                p_red[i] -= uj[i] * proj / lam[j];
            }
        }
        Step::Newton(expand(z, &p_red, self.n))
    }

    /// Longest step along `p` (up to `alpha_max`) keeping inactive rows satisfied.
    fn ratio_test(&self, x: &[f64], p: &[f64], work: &[usize], alpha_max: f64) -> (f64, Option<usize>) {
        let mut best = (alpha_max, None);
        for (i, r) in self.le.iter().enumerate() {
            if work.contains(&i) {
                continue;
            }
            let ap = dot(&r.a, p);
            if ap <= 1e-14 * (1.0 + r.a.iter().map(|v| v.abs()).sum::<f64>()) {
                continue;
            }
            let slack = (r.b - dot(&r.a, x)).max(0.0);
            let t = slack / ap;
            if t < best.0 {
                best = (t, Some(i));
            }
        }
        best
    }
}

enum Step {
    Newton(Vec<f64>),
    Ray(Vec<f64>),
}

fn expand(z: &[Vec<f64>], coef: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (col, &c) in z.iter().zip(coef) {
        for i in 0..n {
            out[i] += c * col[i];
        }
    }
    out
}

/// Incremental orthonormal basis, used to keep the working set independent.
#[derive(Default)]
struct Orth {
    vecs: Vec<Vec<f64>>,
}

impl Orth {
    /// Add `a` if it is independent of the basis so far.
    fn push(&mut self, a: &[f64]) -> bool {
        let mut v = a.to_vec();
        let na = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if na == 0.0 {
            return false;
        }
        for _ in 0..2 {
            for b in &self.vecs {
                let d = dot(&v, b);
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= d * bi;
                }
            }
        }
        let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nv <= 1e-9 * na {
            return false;
        }
        v.iter_mut().for_each(|x| *x /= nv);
        self.vecs.push(v);
        true
    }
}

/// Orthonormal basis of the vectors orthogonal to every row.
fn null_space(rows: &[&[f64]], n: usize) -> Vec<Vec<f64>> {
    let mut basis = Orth::default();
    for r in rows {
        basis.push(r);
    }
    let k = basis.vecs.len();
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        basis.push(&e);
        if basis.vecs.len() == n {
            break;
        }
    }
    basis.vecs.split_off(k)
}

/// Least-squares multipliers μ with rowsᵀ μ ≈ −g.
fn multipliers(rows: &[&[f64]], g: &[f64]) -> Vec<f64> {
    let m = rows.len();
    if m == 0 {
        return Vec::new();
    }
    let mut a = vec![0.0; m * m];
    let mut rhs = vec![0.0; m];
    for i in 0..m {
        for j in 0..m {
            a[i * m + j] = dot(rows[i], rows[j]);
        }
        rhs[i] = -dot(rows[i], g);
    }
    solve_dense(a, rhs, m)
}

/// Gaussian elimination with partial pivoting; near-singular pivots give zero components.
fn solve_dense(mut a: Vec<f64>, mut b: Vec<f64>, n: usize) -> Vec<f64> {
    let scale = a.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
    let mut piv_ok = vec![true; n];
    for col in 0..n {
        let p = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .expect("non-empty");
        if a[p * n + col].abs() <= 1e-14 * scale {
            piv_ok[col] = false;
            continue;
        }
        if p != col {
            for j in 0..n {
                a.swap(p * n + j, col * n + j);
            }
            b.swap(p, col);
        }
        for i in col + 1..n {
            let f = a[i * n + col] / a[col * n + col];
            if f != 0.0 {
                for j in col..n {
                    a[i * n + j] -= f * a[col * n + j];
                }
                b[i] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        if !piv_ok[i] {
            continue;
        }
        let s: f64 = (i + 1..n).map(|j| a[i * n + j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i * n + i];
    }
    x
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues and the row-major matrix whose columns are eigenvectors.
fn jacobi_eigen(mut h: Vec<f64>, r: usize) -> (Vec<f64>, Vec<f64>) {
    let mut u = vec![0.0; r * r];
    for i in 0..r {
        u[i * r + i] = 1.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..r).flat_map(|i| (0..r).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| h[i * r + j].powi(2)).sum();
        let diag: f64 = (0..r).map(|i| h[i * r + i].powi(2)).sum();
        if off <= 1e-30 * diag.max(1e-300) {
            break;
        }
        for p in 0..r {
            for q in p + 1..r {
                let apq = h[p * r + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (h[q * r + q] - h[p * r + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..r {
                    let hkp = h[k * r + p];
                    let hkq = h[k * r + q];
                    h[k * r + p] = c * hkp - s * hkq;
                    h[k * r + q] = s * hkp + c * hkq;
                }
                for k in 0..r {
                    let hpk = h[p * r + k];
                    let hqk = h[q * r + k];
                    h[p * r + k] = c * hpk - s * hqk;
                    h[q * r + k] = s * hpk + c * hqk;
                }
                for k in 0..r {
                    let ukp = u[k * r + p];
                    let ukq = u[k * r + q];
                    u[k * r + p] = c * ukp - s * ukq;
                    u[k * r + q] = s * ukp + c * ukq;
                }
            }
        }
    }
    ((0..r).map(|i| h[i * r + i]).collect(), u)
}
