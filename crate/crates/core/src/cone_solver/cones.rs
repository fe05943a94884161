//! Product cone `R+^l × Q^{d_1} × ... × Q^{d_k}` and its Nesterov-Todd scaling.

#[derive(Clone, Debug)]
pub(crate) struct Cones {
    pub orthant: usize,
    /// `(offset, dim)` of each second-order cone block in the stacked vector.
    pub socs: Vec<(usize, usize)>,
    pub dim: usize,
}

impl Cones {
    pub fn new(orthant: usize, soc_dims: &[usize]) -> Self {
        let mut offset = orthant;
        let socs = soc_dims
            .iter()
            .map(|&d| {
                let blk = (offset, d);
                offset += d;
                blk
            })
            .collect();
        Self { orthant, socs, dim: offset }
    }

    pub fn degree(&self) -> usize {
        self.orthant + self.socs.len()
    }

    pub fn identity(&self) -> Vec<f64> {
        let mut e = vec![0.0; self.dim];
        e[..self.orthant].fill(1.0);
        for &(o, _) in &self.socs {
            e[o] = 1.0;
        }
        e
    }

    /// Smallest eigenvalue of `x` with respect to the cone.
    pub fn min_eig(&self, x: &[f64]) -> f64 {
        let mut m = f64::INFINITY;
        for &v in &x[..self.orthant] {
            m = m.min(v);
        }
        for &(o, d) in &self.socs {
            m = m.min(x[o] - norm(&x[o + 1..o + d]));
        }
        m
    }

    /// `x + (1 + t) e` whenever `x` is not safely interior.
    pub fn shift_interior(&self, x: &mut [f64]) {
        let t = -self.min_eig(x);
        let scale = norm(x).max(1.0);
        if t >= -1e-8 * scale {
            let e = self.identity();
            for (xi, ei) in x.iter_mut().zip(e) {
                *xi += (1.0 + t) * ei;
            }
        }
    }

    /// Largest `α` with `x + α dx` in the cone; `x` must be interior.
    pub fn max_step(&self, x: &[f64], dx: &[f64]) -> f64 {
        let mut alpha = f64::INFINITY;
        for i in 0..self.orthant {
            if dx[i] < 0.0 {
                alpha = alpha.min(-x[i] / dx[i]);
            }
        }
        for &(o, d) in &self.socs {
            let xs = &x[o..o + d];
            let ds = &dx[o..o + d];
            let jn = j_norm(xs);
            let x0 = xs[0] / jn;
            let rho0 = (xs[0] * ds[0] - dot(&xs[1..], &ds[1..])) / (jn * jn);
            let coef = (rho0 + ds[0] / jn) / (x0 + 1.0);
            let rho1: f64 = xs[1..]
                .iter()
                .zip(&ds[1..])
                .map(|(xi, di)| {
                    let r = di / jn - coef * xi / jn;
                    r * r
                })
                .sum::<f64>()
                .sqrt();
            let t = rho1 - rho0;
            if t > 0.0 {
                alpha = alpha.min(1.0 / t);
            }
        }
        alpha
    }

    /// Jordan product `x ∘ y`.
    pub fn product(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for i in 0..self.orthant {
            out[i] = x[i] * y[i];
        }
        for &(o, d) in &self.socs {
            let (x0, y0) = (x[o], y[o]);
            out[o] = dot(&x[o..o + d], &y[o..o + d]);
            for i in o + 1..o + d {
                out[i] = x0 * y[i] + y0 * x[i];
            }
        }
        out
    }

    /// Solves `λ ∘ u = v` for `u`.
    pub fn divide(&self, lambda: &[f64], v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for i in 0..self.orthant {
            out[i] = v[i] / lambda[i];
        }
        for &(o, d) in &self.socs {
            let l = &lambda[o..o + d];
            let w = &v[o..o + d];
            let det = l[0] * l[0] - dot(&l[1..], &l[1..]);
            let u0 = (l[0] * w[0] - dot(&l[1..], &w[1..])) / det;
            out[o] = u0;
            for i in 1..d {
                out[o + i] = (w[i] - u0 * l[i]) / l[0];
            }
        }
        out
    }
}

/// Nesterov-Todd scaling `W` with `W z = W^{-1} s = λ`; `W` is symmetric.
#[derive(Clone, Debug)]
pub(crate) struct Scaling {
    orthant: Vec<f64>,
    socs: Vec<SocScaling>,
    pub lambda: Vec<f64>,
}

#[derive(Clone, Debug)]
struct SocScaling {
    eta: f64,
    w: Vec<f64>,
}

impl Scaling {
    pub fn identity(cones: &Cones) -> Self {
        let socs = cones
            .socs
            .iter()
            .map(|&(_, d)| {
                let mut w = vec![0.0; d];
                w[0] = 1.0;
                SocScaling { eta: 1.0, w }
            })
            .collect();
        Self { orthant: vec![1.0; cones.orthant], socs, lambda: cones.identity() }
    }

    pub fn new(cones: &Cones, s: &[f64], z: &[f64]) -> Self {
        let orthant = (0..cones.orthant).map(|i| (s[i] / z[i]).sqrt()).collect();
        let socs = cones
            .socs
            .iter()
            .map(|&(o, d)| {
                let sb = &s[o..o + d];
                let zb = &z[o..o + d];
                let sn = j_norm(sb);
                let zn = j_norm(zb);
                let gamma = ((1.0 + dot(sb, zb) / (sn * zn)) / 2.0).sqrt();
                let mut w: Vec<f64> = sb.iter().zip(zb).map(|(si, zi)| (si / sn - zi / zn) / (2.0 * gamma)).collect();
                w[0] = (sb[0] / sn + zb[0] / zn) / (2.0 * gamma);
                SocScaling { eta: (sn / zn).sqrt(), w }
            })
            .collect();
        let mut scaling = Self { orthant, socs, lambda: Vec::new() };
        scaling.lambda = scaling.apply(cones, z, false);
        scaling
    }

    /// `W v`, or `W^{-1} v` when `inverse` is set.
    pub fn apply(&self, cones: &Cones, v: &[f64], inverse: bool) -> Vec<f64> {
        let mut out = v.to_vec();
        self.apply_in_place(cones, &mut out, inverse);
        out
    }

    pub fn apply_in_place(&self, cones: &Cones, v: &mut [f64], inverse: bool) {
        for (vi, wi) in v[..cones.orthant].iter_mut().zip(&self.orthant) {
            if inverse {
                *vi /= wi;
            } else {
                *vi *= wi;
            }
        }
        for (&(o, d), sc) in cones.socs.iter().zip(&self.socs) {
            sc.apply(&mut v[o..o + d], inverse);
        }
    }

    /// `W^2 v`, or `W^{-2} v`.
    pub fn apply_squared(&self, cones: &Cones, v: &[f64], inverse: bool) -> Vec<f64> {
        let mut out = v.to_vec();
        self.apply_in_place(cones, &mut out, inverse);
        self.apply_in_place(cones, &mut out, inverse);
        out
    }

    pub fn orthant_weights(&self) -> &[f64] {
        &self.orthant
    }

    /// Applies `W^{-1}` to a strided block column (used for `W^{-1} G`).
    pub fn apply_soc_block_inverse(&self, block: usize, v: &mut [f64]) {
        self.socs[block].apply(v, true);
    }
}

impl SocScaling {
    fn apply(&self, v: &mut [f64], inverse: bool) {
        let (eta, sign) = if inverse { (1.0 / self.eta, -1.0) } else { (self.eta, 1.0) };
        let w0 = self.w[0];
        let w1 = &self.w[1..];
        let v0 = v[0];
        let wv = sign * dot(w1, &v[1..]);
        let coef = v0 + wv / (1.0 + w0);
        v[0] = eta * (w0 * v0 + wv);
        for (vi, wi) in v[1..].iter_mut().zip(w1) {
            *vi = eta * (*vi + coef * sign * wi);
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn j_norm(x: &[f64]) -> f64 {
    let t = &x[1..];
    ((x[0] - norm(t)) * (x[0] + norm(t))).sqrt()
}
