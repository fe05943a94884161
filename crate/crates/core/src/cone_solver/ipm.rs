use faer::linalg::matmul::matmul;
use faer::linalg::solvers::{Llt, Solve};
use faer::{Accum, Mat, MatRef, Par, Side};

use super::cones::{dot, norm, Cones, Scaling};
use super::{ConeProblem, ConeSolution, SolveOptions, SolveStatus};
use crate::error::Result;

const STEP_FRACTION: f64 = 0.99;
const RUIZ_PASSES: usize = 25;
const REFINE_STEPS: usize = 4;
const AUG_WEIGHT: f64 = 1.0;
/// Iterations without halving the dual residual before it counts as stalled.
const STALL_WINDOW: usize = 3;

/// `min cᵀx  s.t.  Ax = b,  Gx + s = h,  s ∈ K`, where the orthant rows of `G`
/// each touch one variable and the cone rows are dense.
#[derive(Clone)]
struct StdForm {
    n: usize,
    c: Vec<f64>,
    /// `p × n`, column-major.
    a: Vec<f64>,
    b: Vec<f64>,
    bvar: Vec<usize>,
    bcoef: Vec<f64>,
    /// `ms × n`, column-major.
    g: Vec<f64>,
    h: Vec<f64>,
    cones: Cones,
}

impl StdForm {
    fn build(problem: &ConeProblem) -> Result<Self> {
        let n0 = problem.variable_count;
        let quad_factor = match &problem.quadratic {
            Some(p) => Some(psd_factor(p)?),
            None => None,
        };
        let n = n0 + usize::from(quad_factor.is_some());
        let mut c = problem.objective.clone();
        if quad_factor.is_some() {
            c.push(1.0);
        }

        let mut eq_rows: Vec<Vec<f64>> = (0..problem.eq_matrix.rows())
            .map(|i| {
                let mut r = problem.eq_matrix.row(i).to_vec();
                r.resize(n, 0.0);
                r
            })
            .collect();
        let mut b = problem.eq_rhs.clone();

        let mut bvar = Vec::new();
        let mut bcoef = Vec::new();
        let mut h = Vec::new();
        for i in 0..n0 {
            let (lo, hi) = (problem.lower[i], problem.upper[i]);
            if lo == hi {
                let mut r = vec![0.0; n];
                r[i] = 1.0;
                eq_rows.push(r);
                b.push(lo);
                continue;
            }
            if lo.is_finite() {
                bvar.push(i);
                bcoef.push(-1.0);
                h.push(-lo);
            }
            if hi.is_finite() {
                bvar.push(i);
                bcoef.push(1.0);
                h.push(hi);
            }
        }
        let orthant = bvar.len();

        let mut soc_rows: Vec<Vec<f64>> = Vec::new();
        let mut dims = Vec::new();
        for con in &problem.soc {
            let mut head = vec![0.0; n];
            head[con.bound_var] = -1.0;
            soc_rows.push(head);
            h.push(0.0);
            for i in 0..con.matrix.rows() {
                let mut r: Vec<f64> = con.matrix.row(i).iter().map(|v| -v).collect();
                r.resize(n, 0.0);
                soc_rows.push(r);
                h.push(con.offset[i]);
            }
            dims.push(1 + con.matrix.rows());
        }
        if let Some(l) = quad_factor {
            // ½‖Lθ‖² ≤ u  ⇔  ‖(Lθ, u − ½)‖ ≤ u + ½
            let mut head = vec![0.0; n];
            head[n0] = -1.0;
            soc_rows.push(head.clone());
            h.push(0.5);
            for row in &l {
                let mut r: Vec<f64> = row.iter().map(|v| -v).collect();
                r.push(0.0);
                soc_rows.push(r);
                h.push(0.0);
            }
            soc_rows.push(head);
            h.push(-0.5);
            dims.push(l.len() + 2);
        }

        Ok(Self {
            n,
            c,
            a: column_major(&eq_rows, n),
            b,
            bvar,
            bcoef,
            g: column_major(&soc_rows, n),
            h,
            cones: Cones::new(orthant, &dims),
        })
    }

    fn p(&self) -> usize {
        self.b.len()
    }

    fn soc_rows(&self) -> usize {
        self.cones.dim - self.cones.orthant
    }

    fn a_mat(&self) -> MatRef<'_, f64> {
        MatRef::from_column_major_slice(&self.a, self.p(), self.n)
    }

    fn a_mul(&self, x: &[f64]) -> Vec<f64> {
        col_major_mul(&self.a, self.p(), x)
    }

    fn at_mul(&self, y: &[f64]) -> Vec<f64> {
        col_major_tmul(&self.a, self.p(), self.n, y)
    }

    fn g_mul(&self, x: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = self.bvar.iter().zip(&self.bcoef).map(|(&v, &k)| k * x[v]).collect();
        out.extend(col_major_mul(&self.g, self.soc_rows(), x));
        out
    }

    fn gt_mul(&self, z: &[f64]) -> Vec<f64> {
        let l = self.cones.orthant;
        let mut out = col_major_tmul(&self.g, self.soc_rows(), self.n, &z[l..]);
        for ((&v, &k), zi) in self.bvar.iter().zip(&self.bcoef).zip(&z[..l]) {
            out[v] += k * zi;
        }
        out
    }
}

fn column_major(rows: &[Vec<f64>], n: usize) -> Vec<f64> {
    let m = rows.len();
    let mut out = vec![0.0; m * n];
    for (i, r) in rows.iter().enumerate() {
        for (j, v) in r.iter().enumerate() {
            out[j * m + i] = *v;
        }
    }
    out
}

fn col_major_mul(data: &[f64], rows: usize, x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; rows];
    if rows == 0 {
        return out;
    }
    for (col, xj) in data.chunks_exact(rows).zip(x) {
        if *xj != 0.0 {
            for (o, v) in out.iter_mut().zip(col) {
                *o += v * xj;
            }
        }
    }
    out
}

fn col_major_tmul(data: &[f64], rows: usize, cols: usize, y: &[f64]) -> Vec<f64> {
    if rows == 0 {
        return vec![0.0; cols];
    }
    data.chunks_exact(rows).map(|col| dot(col, y)).collect()
}

/// Rows `L` with `LᵀL = P` from the eigendecomposition of the symmetric part.
fn psd_factor(p: &super::DenseMatrix) -> Result<Vec<Vec<f64>>> {
    let n = p.rows();
    let sym = Mat::from_fn(n, n, |i, j| 0.5 * (p.get(i, j) + p.get(j, i)));
    let eig = sym
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| crate::error::Error::Solver("eigendecomposition of the quadratic term failed".into()))?;
    let vals = eig.S().column_vector();
    let vecs = eig.U();
    let top = (0..n).map(|i| vals[i].abs()).fold(0.0, f64::max);
    let mut rows = Vec::new();
    for k in 0..n {
        let lam = vals[k];
        if lam < -1e-9 * top.max(1.0) {
            return Err(crate::error::invalid("quadratic term is not positive semidefinite"));
        }
        if lam > 1e-14 * top {
            let r = lam.sqrt();
            rows.push((0..n).map(|i| r * vecs[(i, k)]).collect());
        }
    }
    Ok(rows)
}

/// Ruiz equilibration `Ã = E_A A D`, `G̃ = E G D`, `c̃ = γ D c`.
struct Equilibration {
    d: Vec<f64>,
    e_a: Vec<f64>,
    e_cone: Vec<f64>,
    gamma: f64,
}

impl Equilibration {
    fn new(data: &StdForm) -> Self {
        let n = data.n;
        let p = data.p();
        let l = data.cones.orthant;
        let ms = data.soc_rows();
        let mut d = vec![1.0; n];
        let mut e_a = vec![1.0; p];
        let mut e_cone = vec![1.0; data.cones.dim];
        let mut a = data.a.clone();
        let mut bcoef = data.bcoef.clone();
        let mut g = data.g.clone();

        for _ in 0..RUIZ_PASSES {
            let mut col = vec![0.0f64; n];
            let mut row_a = vec![0.0f64; p];
            let mut row_g = vec![0.0f64; ms];
            for j in 0..n {
                for i in 0..p {
                    let v = a[j * p + i].abs();
                    col[j] = col[j].max(v);
                    row_a[i] = row_a[i].max(v);
                }
                for i in 0..ms {
                    let v = g[j * ms + i].abs();
                    col[j] = col[j].max(v);
                    row_g[i] = row_g[i].max(v);
                }
            }
            for (&v, k) in data.bvar.iter().zip(&bcoef) {
                col[v] = col[v].max(k.abs());
            }
            let mut row_cone = vec![0.0f64; data.cones.dim];
            for (i, k) in bcoef.iter().enumerate() {
                row_cone[i] = k.abs();
            }
            for &(o, dim) in &data.cones.socs {
                let m = row_g[o - l..o - l + dim].iter().copied().fold(0.0, f64::max);
                row_cone[o..o + dim].fill(m);
            }

            let fd: Vec<f64> = col.iter().map(|&v| inv_sqrt(v)).collect();
            let fa: Vec<f64> = row_a.iter().map(|&v| inv_sqrt(v)).collect();
            let fc: Vec<f64> = row_cone.iter().map(|&v| inv_sqrt(v)).collect();
            for j in 0..n {
                for i in 0..p {
                    a[j * p + i] *= fa[i] * fd[j];
                }
                for i in 0..ms {
                    g[j * ms + i] *= fc[l + i] * fd[j];
                }
            }
            for (i, (&v, k)) in data.bvar.iter().zip(bcoef.iter_mut()).enumerate() {
                *k *= fc[i] * fd[v];
            }
            d.iter_mut().zip(&fd).for_each(|(x, f)| *x *= f);
            e_a.iter_mut().zip(&fa).for_each(|(x, f)| *x *= f);
            e_cone.iter_mut().zip(&fc).for_each(|(x, f)| *x *= f);
        }

        let cmax = data.c.iter().zip(&d).map(|(c, d)| (c * d).abs()).fold(0.0, f64::max);
        let gamma = if cmax > 0.0 { (1.0 / cmax).clamp(1e-6, 1e6) } else { 1.0 };
        Self { d, e_a, e_cone, gamma }
    }

    fn scale(&self, data: &StdForm) -> StdForm {
        let p = data.p();
        let ms = data.soc_rows();
        let l = data.cones.orthant;
        let mut out = data.clone();
        for j in 0..data.n {
            for i in 0..p {
                out.a[j * p + i] *= self.e_a[i] * self.d[j];
            }
            for i in 0..ms {
                out.g[j * ms + i] *= self.e_cone[l + i] * self.d[j];
            }
        }
        for (i, (&v, k)) in data.bvar.iter().zip(out.bcoef.iter_mut()).enumerate() {
            *k *= self.e_cone[i] * self.d[v];
        }
        out.c.iter_mut().zip(&self.d).for_each(|(c, d)| *c *= self.gamma * d);
        out.b.iter_mut().zip(&self.e_a).for_each(|(b, e)| *b *= e);
        out.h.iter_mut().zip(&self.e_cone).for_each(|(h, e)| *h *= e);
        out
    }

    fn unscale(&self, it: &Iterate, divide_tau: bool) -> Iterate {
        let t = if divide_tau { it.tau } else { 1.0 };
        Iterate {
            x: it.x.iter().zip(&self.d).map(|(x, d)| x * d / t).collect(),
            y: it.y.iter().zip(&self.e_a).map(|(y, e)| y * e / (self.gamma * t)).collect(),
            z: it.z.iter().zip(&self.e_cone).map(|(z, e)| z * e / (self.gamma * t)).collect(),
            s: it.s.iter().zip(&self.e_cone).map(|(s, e)| s / (e * t)).collect(),
            tau: 1.0,
            kappa: it.kappa / t,
        }
    }
}

fn inv_sqrt(v: f64) -> f64 {
    if v > 0.0 {
        (1.0 / v.sqrt()).clamp(1e-4, 1e4)
    } else {
        1.0
    }
}

#[derive(Clone, Debug)]
struct Iterate {
    x: Vec<f64>,
    y: Vec<f64>,
    z: Vec<f64>,
    s: Vec<f64>,
    tau: f64,
    kappa: f64,
}

/// Factorization of `[0 Aᵀ Gᵀ; A 0 0; G 0 −W²]` through the normal
/// equations `GᵀW⁻²G + ρAᵀA`.
struct Kkt<'a> {
    data: &'a StdForm,
    w: &'a Scaling,
    llt: Llt<f64>,
    k_inv_at: Mat<f64>,
    schur: Option<Llt<f64>>,
}

impl<'a> Kkt<'a> {
    fn factor(data: &'a StdForm, w: &'a Scaling) -> Option<Self> {
        let n = data.n;
        let l = data.cones.orthant;
        let ms = data.soc_rows();
        let mut scaled_g = data.g.clone();
        if ms > 0 {
            for col in scaled_g.chunks_exact_mut(ms) {
                for (k, &(o, d)) in data.cones.socs.iter().enumerate() {
                    w.apply_soc_block_inverse(k, &mut col[o - l..o - l + d]);
                }
            }
        }
        let gh = MatRef::from_column_major_slice(&scaled_g, ms, n);
        let mut m = Mat::<f64>::zeros(n, n);
        matmul(&mut m, Accum::Replace, gh.transpose(), gh, 1.0, Par::Seq);
        if data.p() > 0 {
            let a = data.a_mat();
            matmul(&mut m, Accum::Add, a.transpose(), a, AUG_WEIGHT, Par::Seq);
        }
        for ((&v, &k), wi) in data.bvar.iter().zip(&data.bcoef).zip(w.orthant_weights()) {
            m[(v, v)] += (k / wi) * (k / wi);
        }
        let diag_max = (0..n).map(|i| m[(i, i)]).fold(0.0, f64::max);
        let mut reg = 1e-14 * diag_max.max(1.0);
        let llt = loop {
            let mut mr = m.clone();
            for i in 0..n {
                mr[(i, i)] += reg;
            }
            match mr.llt(Side::Lower) {
                Ok(f) => break f,
                Err(_) if reg < 1e-4 * diag_max.max(1.0) => reg *= 100.0,
                Err(_) => return None,
            }
        };

        let p = data.p();
        let (k_inv_at, schur) = if p > 0 {
            let mut kat = data.a_mat().transpose().to_owned();
            llt.solve_in_place(&mut kat);
            let mut s = Mat::<f64>::zeros(p, p);
            matmul(&mut s, Accum::Replace, data.a_mat(), &kat, 1.0, Par::Seq);
            let smax = (0..p).map(|i| s[(i, i)]).fold(0.0, f64::max);
            let mut sreg = 1e-14 * smax.max(1e-300);
            let f = loop {
                let mut sr = s.clone();
                for i in 0..p {
                    sr[(i, i)] += sreg;
                }
                match sr.llt(Side::Lower) {
                    Ok(f) => break f,
                    Err(_) if sreg < 1e-4 * smax.max(1.0) => sreg *= 100.0,
                    Err(_) => return None,
                }
            };
            (kat, Some(f))
        } else {
            (Mat::zeros(n, 0), None)
        };
        Some(Self { data, w, llt, k_inv_at, schur })
    }

    fn base_solve(&self, r1: &[f64], r2: &[f64], r3: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let data = self.data;
        let cones = &data.cones;
        let t = self.w.apply_squared(cones, r3, true);
        let gt = data.gt_mul(&t);
        let at = data.at_mul(r2);
        let mut u = Mat::<f64>::from_fn(data.n, 1, |i, _| r1[i] + gt[i] + AUG_WEIGHT * at[i]);
        self.llt.solve_in_place(&mut u);
        let mut dx: Vec<f64> = (0..data.n).map(|i| u[(i, 0)]).collect();
        let mut dy = Vec::new();
        if let Some(schur) = &self.schur {
            let au = data.a_mul(&dx);
            let mut v = Mat::<f64>::from_fn(data.p(), 1, |i, _| au[i] - r2[i]);
            schur.solve_in_place(&mut v);
            dy = (0..data.p()).map(|i| v[(i, 0)]).collect();
            for (i, xi) in dx.iter_mut().enumerate() {
                *xi -= (0..data.p()).map(|k| self.k_inv_at[(i, k)] * dy[k]).sum::<f64>();
            }
        }
        let gdx = data.g_mul(&dx);
        let diff: Vec<f64> = gdx.iter().zip(r3).map(|(g, r)| g - r).collect();
        let dz = self.w.apply_squared(cones, &diff, true);
        (dx, dy, dz)
    }

    fn residual(&self, r: (&[f64], &[f64], &[f64]), v: (&[f64], &[f64], &[f64])) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let data = self.data;
        let aty = data.at_mul(v.1);
        let gtz = data.gt_mul(v.2);
        let e1 = (0..data.n).map(|i| r.0[i] - aty[i] - gtz[i]).collect();
        let ax = data.a_mul(v.0);
        let e2 = r.1.iter().zip(&ax).map(|(r, a)| r - a).collect();
        let gx = data.g_mul(v.0);
        let w2z = self.w.apply_squared(&data.cones, v.2, false);
        let e3 = (0..data.cones.dim).map(|i| r.2[i] - gx[i] + w2z[i]).collect();
        (e1, e2, e3)
    }

    fn solve(&self, r1: &[f64], r2: &[f64], r3: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let (mut dx, mut dy, mut dz) = self.base_solve(r1, r2, r3);
        let scale = norm(r1).max(norm(r2)).max(norm(r3)).max(1e-300);
        let mut last = f64::INFINITY;
        for _ in 0..REFINE_STEPS {
            let (e1, e2, e3) = self.residual((r1, r2, r3), (&dx, &dy, &dz));
            let err = norm(&e1).max(norm(&e2)).max(norm(&e3));
            if err <= 1e-15 * scale || err >= 0.5 * last {
                break;
            }
            last = err;
            let (cx, cy, cz) = self.base_solve(&e1, &e2, &e3);
            add_assign(&mut dx, &cx);
            add_assign(&mut dy, &cy);
            add_assign(&mut dz, &cz);
        }
        (dx, dy, dz)
    }
}

fn add_assign(a: &mut [f64], b: &[f64]) {
    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
}

fn axpy(a: &[f64], t: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + t * y).collect()
}

struct Metrics {
    pres: f64,
    dres: f64,
    gap: f64,
    relgap: f64,
    primal_infeasible: bool,
    dual_infeasible: bool,
}

fn metrics(orig: &StdForm, eq: &Equilibration, it: &Iterate, tol: f64) -> Metrics {
    let u = eq.unscale(it, true);
    let bn = norm(&orig.b).max(1.0);
    let hn = norm(&orig.h).max(1.0);
    let cn = norm(&orig.c).max(1.0);

    let ax = orig.a_mul(&u.x);
    let gx = orig.g_mul(&u.x);
    let ry = norm(&ax.iter().zip(&orig.b).map(|(a, b)| a - b).collect::<Vec<_>>()) / bn.max(norm(&ax));
    let rz = norm(&(0..gx.len()).map(|i| gx[i] + u.s[i] - orig.h[i]).collect::<Vec<_>>())
        / hn.max(norm(&gx)).max(norm(&u.s));
    let aty = orig.at_mul(&u.y);
    let gtz = orig.gt_mul(&u.z);
    let rx = norm(&(0..orig.n).map(|i| aty[i] + gtz[i] + orig.c[i]).collect::<Vec<_>>())
        / cn.max(norm(&aty)).max(norm(&gtz));
    let gap = dot(&u.s, &u.z);
    let pcost = dot(&orig.c, &u.x);
    let dcost = -dot(&orig.b, &u.y) - dot(&orig.h, &u.z);
    let relgap = if pcost < 0.0 {
        gap / -pcost
    } else if dcost > 0.0 {
        gap / dcost
    } else {
        f64::INFINITY
    };

    let raw = eq.unscale(it, false);
    let hz_by = dot(&orig.h, &raw.z) + dot(&orig.b, &raw.y);
    let aty = orig.at_mul(&raw.y);
    let gtz = orig.gt_mul(&raw.z);
    let dual_ray = norm(&(0..orig.n).map(|i| aty[i] + gtz[i]).collect::<Vec<_>>()) / cn;
    let primal_infeasible = hz_by < 0.0 && dual_ray <= tol * -hz_by;

    let cx = dot(&orig.c, &raw.x);
    let ax = orig.a_mul(&raw.x);
    let gx = orig.g_mul(&raw.x);
    let primal_ray = (norm(&ax) / bn).max(norm(&(0..gx.len()).map(|i| gx[i] + raw.s[i]).collect::<Vec<_>>()) / hn);
    let dual_infeasible = cx < 0.0 && primal_ray <= tol * -cx;

    Metrics { pres: ry.max(rz), dres: rx, gap, relgap, primal_infeasible, dual_infeasible }
}

pub(super) fn solve(problem: &ConeProblem, options: &SolveOptions) -> Result<ConeSolution> {
    let orig = StdForm::build(problem)?;
    let eq = Equilibration::new(&orig);
    let data = eq.scale(&orig);
    let cones = &data.cones;
    let (n, p, m) = (data.n, data.p(), cones.dim);
    let tol = options.tol_rel;

    let finish = |it: &Iterate, status: SolveStatus, iterations: usize, mt: &Metrics| {
        let u = eq.unscale(it, true);
        let theta = u.x[..problem.variable_count].to_vec();
        ConeSolution {
            objective_value: problem.objective_at(&theta),
            theta,
            status,
            iterations,
            primal_residual: mt.pres,
            dual_residual: mt.dres,
            gap: mt.gap,
        }
    };

    let ident = Scaling::identity(cones);
    let Some(kkt) = Kkt::factor(&data, &ident) else {
        return Err(crate::error::Error::Solver("initial factorization failed".into()));
    };
    let (x, _, sneg) = kkt.solve(&vec![0.0; n], &data.b, &data.h);
    let neg_c: Vec<f64> = data.c.iter().map(|v| -v).collect();
    let (_, y, z) = kkt.solve(&neg_c, &vec![0.0; p], &vec![0.0; m]);
    let mut it = Iterate { x, y, z, s: sneg.iter().map(|v| -v).collect(), tau: 1.0, kappa: 1.0 };
    cones.shift_interior(&mut it.s);
    cones.shift_interior(&mut it.z);

    let nu = cones.degree() as f64;
    let e = cones.identity();
    let mut iterations = 0;
    let mut dres_history: Vec<f64> = Vec::new();
    loop {
        let mt = metrics(&orig, &eq, &it, tol);
        let converged = mt.pres <= tol && (mt.gap <= tol || mt.relgap <= tol);
        let stalled = dres_history.len() >= STALL_WINDOW
            && dres_history[dres_history.len() - STALL_WINDOW..].iter().all(|&d| mt.dres > 0.5 * d);
        if converged && (mt.dres <= tol || (stalled && mt.dres <= tol.sqrt())) {
            return Ok(finish(&it, SolveStatus::Optimal, iterations, &mt));
        }
        dres_history.push(mt.dres);
        if mt.primal_infeasible {
            return Ok(finish(&it, SolveStatus::Infeasible, iterations, &mt));
        }
        if mt.dual_infeasible {
            return Ok(finish(&it, SolveStatus::Unbounded, iterations, &mt));
        }
        if iterations >= options.max_iter {
            return Ok(finish(&it, SolveStatus::MaxIterations, iterations, &mt));
        }
        iterations += 1;

        let aty = data.at_mul(&it.y);
        let gtz = data.gt_mul(&it.z);
        let rx: Vec<f64> = (0..n).map(|i| aty[i] + gtz[i] + data.c[i] * it.tau).collect();
        let ax = data.a_mul(&it.x);
        let ry: Vec<f64> = (0..p).map(|i| ax[i] - data.b[i] * it.tau).collect();
        let gx = data.g_mul(&it.x);
        let rz: Vec<f64> = (0..m).map(|i| gx[i] + it.s[i] - data.h[i] * it.tau).collect();
        let rtau = it.kappa + dot(&data.c, &it.x) + dot(&data.b, &it.y) + dot(&data.h, &it.z);
        let mu = (dot(&it.s, &it.z) + it.tau * it.kappa) / (nu + 1.0);

        let w = Scaling::new(cones, &it.s, &it.z);
        let Some(kkt) = Kkt::factor(&data, &w) else {
            return Ok(finish(&it, SolveStatus::MaxIterations, iterations, &mt));
        };
        let (x1, y1, z1) = kkt.solve(&neg_c, &data.b, &data.h);
        let denom = dot(&data.c, &x1) + dot(&data.b, &y1) + dot(&data.h, &z1) - it.kappa / it.tau;
        let lam = &w.lambda;
        let lam_sq = cones.product(lam, lam);

        let direction = |eta: f64, d_s: &[f64], d_tau: f64| {
            let q = w.apply(cones, &cones.divide(lam, d_s), false);
            let r1: Vec<f64> = rx.iter().map(|v| -eta * v).collect();
            let r2: Vec<f64> = ry.iter().map(|v| -eta * v).collect();
            let r3: Vec<f64> = (0..m).map(|i| -eta * rz[i] - q[i]).collect();
            let (x2, y2, z2) = kkt.solve(&r1, &r2, &r3);
            let num = -eta * rtau - d_tau / it.tau - dot(&data.c, &x2) - dot(&data.b, &y2) - dot(&data.h, &z2);
            let dtau = num / denom;
            let dx = axpy(&x2, dtau, &x1);
            let dy = axpy(&y2, dtau, &y1);
            let dz = axpy(&z2, dtau, &z1);
            let w2dz = w.apply_squared(cones, &dz, false);
            let ds: Vec<f64> = (0..m).map(|i| q[i] - w2dz[i]).collect();
            let dkappa = (d_tau - it.kappa * dtau) / it.tau;
            Iterate { x: dx, y: dy, z: dz, s: ds, tau: dtau, kappa: dkappa }
        };
        let max_step = |d: &Iterate| {
            let mut a = cones.max_step(&it.s, &d.s).min(cones.max_step(&it.z, &d.z));
            if d.tau < 0.0 {
                a = a.min(-it.tau / d.tau);
            }
            if d.kappa < 0.0 {
                a = a.min(-it.kappa / d.kappa);
            }
            a
        };

        let neg_lam_sq: Vec<f64> = lam_sq.iter().map(|v| -v).collect();
        let aff = direction(1.0, &neg_lam_sq, -it.tau * it.kappa);
        let alpha_aff = max_step(&aff).min(1.0);
        let sigma = (1.0 - alpha_aff).powi(3);

        let ds_scaled = w.apply(cones, &aff.s, true);
        let dz_scaled = w.apply(cones, &aff.z, false);
        let corr = cones.product(&ds_scaled, &dz_scaled);
        let d_s: Vec<f64> = (0..m).map(|i| -lam_sq[i] - corr[i] + sigma * mu * e[i]).collect();
        let d_tau = -it.tau * it.kappa - aff.tau * aff.kappa + sigma * mu;
        let dir = direction(1.0 - sigma, &d_s, d_tau);
        let alpha = (STEP_FRACTION * max_step(&dir)).min(1.0);
        if !(alpha > 1e-12) || dir.x.iter().any(|v| !v.is_finite()) {
            return Ok(finish(&it, SolveStatus::MaxIterations, iterations, &mt));
        }

        add_scaled(&mut it.x, alpha, &dir.x);
        add_scaled(&mut it.y, alpha, &dir.y);
        add_scaled(&mut it.z, alpha, &dir.z);
        add_scaled(&mut it.s, alpha, &dir.s);
        it.tau += alpha * dir.tau;
        it.kappa += alpha * dir.kappa;
    }
}

fn add_scaled(a: &mut [f64], t: f64, b: &[f64]) {
    a.iter_mut().zip(b).for_each(|(x, y)| *x += t * y);
}
