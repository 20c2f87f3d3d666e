//! Discrete reduced energy in the orthonormal coordinates and its derivatives.
//!
//! Unknowns are laid out component-major: `x[c·N + idx(i, j)]`, `c ∈ {0, 1, 2}`.
//! Fixed entries: the outer row (`Q∞`), the inner row under strong anchoring
//! (`Q_s`), and `x1 = x3 = 0` on the axis.

use crate::axi::{AxiTensor, AZIMUTHAL_WEIGHT};
use crate::error::Result;
use crate::grid::ExteriorGrid;
use crate::linalg::{BandCholesky, BandMatrix};
use crate::newton::Problem;
use crate::qtensor::MaterialParams;

use super::bulk;
use super::EnergyBreakdown;

struct ComponentSolver {
    chol: BandCholesky,
    /// Flat indices into `x` in solve order.
    map: Vec<usize>,
}

pub(crate) struct LdgProblem<'a> {
    pub g: &'a ExteriorGrid,
    pub p: &'a MaterialParams,
    pub with_bulk: bool,
    n: usize,
    fixed: Vec<bool>,
    /// Target value of every fixed entry (ignored elsewhere).
    fixed_val: Vec<f64>,
    /// `Q_s` in orthonormal coordinates, per polar node.
    xs: Vec<[f64; 3]>,
    pre: Vec<ComponentSolver>,
    sup_limit: f64,
}

impl<'a> LdgProblem<'a> {
    pub fn new(g: &'a ExteriorGrid, p: &'a MaterialParams, with_bulk: bool, sup_limit: f64) -> Result<Self> {
        let n = g.len();
        let (ns, np) = (g.n_s, g.n_phi);
        let strong = p.strong_anchoring();
        let xs: Vec<[f64; 3]> = (0..np)
            .map(|j| AxiTensor::radial_sc(g.sin_phi[j], g.cos_phi[j], p.s_star).to_x())
            .collect();
        let xinf = AxiTensor::far_field(p.s_star).to_x();
        let mut fixed = vec![false; 3 * n];
        let mut fixed_val = vec![0.0; 3 * n];
        for c in 0..3 {
            for j in 0..np {
                let k = c * n + g.idx(ns - 1, j);
                fixed[k] = true;
                fixed_val[k] = xinf[c];
                if strong {
                    let k = c * n + g.idx(0, j);
                    fixed[k] = true;
                    fixed_val[k] = xs[j][c];
                }
                if c != 1 && g.is_axis(j) {
                    for i in 0..ns {
                        let k = c * n + g.idx(i, j);
                        fixed[k] = true;
                        fixed_val[k] = 0.0;
                    }
                }
            }
        }
        Ok(Self {
            g,
            p,
            with_bulk,
            n,
            fixed,
            fixed_val,
            xs,
            pre: Vec::new(),
            sup_limit,
        })
    }

    /// Factors the per-component preconditioners; needed before minimisation only.
    pub fn with_preconditioner(mut self) -> Result<Self> {
        self.pre = (0..3).map(|c| self.component_solver(c)).collect::<Result<_>>()?;
        Ok(self)
    }

    /// Banded SPD model of the Hessian for one component: elastic operator,
    /// surface term, and a bulk stiffness shift.
    fn component_solver(&self, c: usize) -> Result<ComponentSolver> {
        let g = self.g;
        let (ns, np, n) = (g.n_s, g.n_phi, self.n);
        let p = self.p;
        let shift = if self.with_bulk {
            (4.0 * p.a + p.b * p.s_star / 3.0).max(p.b * p.s_star)
        } else {
            0.0
        };
        let mut slot = vec![usize::MAX; n];
        let mut map = Vec::new();
        for i in 0..ns {
            for j in 0..np {
                let k = g.idx(i, j);
                if !self.fixed[c * n + k] {
                    slot[k] = map.len();
                    map.push(c * n + k);
                }
            }
        }
        let bw = (0..ns)
            .map(|i| (0..np).filter(|&j| !self.fixed[c * n + g.idx(i, j)]).count())
            .max()
            .unwrap_or(1)
            .max(1);
        let mut a = BandMatrix::zeros(map.len(), bw);
        let kap = AZIMUTHAL_WEIGHT[c];
        let edge = |a: &mut BandMatrix, k1: usize, k2: usize, w: f64| match (slot[k1], slot[k2]) {
            (usize::MAX, usize::MAX) => {}
            (s1, usize::MAX) => a.add(s1, s1, w),
            (usize::MAX, s2) => a.add(s2, s2, w),
            (s1, s2) => a.add_edge(s1, s2, w),
        };
        for i in 0..ns {
            for j in 0..np {
                let k = g.idx(i, j);
                if i + 1 < ns {
                    edge(&mut a, k, k + np, p.l * g.m_phi[j] / g.hs);
                }
                if j + 1 < np {
                    edge(&mut a, k, k + 1, p.l * g.w2[i] * g.sin_edge[j] / g.hphi);
                }
                let s = slot[k];
                if s == usize::MAX {
                    continue;
                }
                let mut diag = shift * g.volume(i, j);
                if kap > 0.0 {
                    let sp = g.sin_phi[j];
                    diag += p.l * kap * g.w2[i] * g.m_phi[j] / (sp * sp);
                }
                if i == 0 && !p.strong_anchoring() {
                    diag += p.w * g.m_phi[j];
                }
                a.add(s, s, diag);
            }
        }
        Ok(ComponentSolver {
            chol: a.cholesky()?,
            map,
        })
    }

    /// Adds `L·K y` (the elastic operator) to `out`.
    fn elastic_apply(&self, y: &[f64], out: &mut [f64]) {
        let g = self.g;
        let (ns, np, n) = (g.n_s, g.n_phi, self.n);
        let l = self.p.l;
        for c in 0..3 {
            let yc = &y[c * n..(c + 1) * n];
            let oc = &mut out[c * n..(c + 1) * n];
            let kap = AZIMUTHAL_WEIGHT[c];
            for i in 0..ns {
                for j in 0..np {
                    let k = g.idx(i, j);
                    let v = yc[k];
                    if i + 1 < ns {
                        let f = l * g.m_phi[j] / g.hs * (yc[k + np] - v);
                        oc[k] -= f;
                        oc[k + np] += f;
                    }
                    if j + 1 < np {
                        let f = l * g.w2[i] * g.sin_edge[j] / g.hphi * (yc[k + 1] - v);
                        oc[k] -= f;
                        oc[k + 1] += f;
                    }
                    if kap > 0.0 && !g.is_axis(j) {
                        let sp = g.sin_phi[j];
                        oc[k] += l * kap * g.w2[i] * g.m_phi[j] / (sp * sp) * v;
                    }
                }
            }
        }
    }

    fn node(&self, x: &[f64], k: usize) -> [f64; 3] {
        [x[k], x[self.n + k], x[2 * self.n + k]]
    }

    pub fn breakdown(&self, x: &[f64]) -> EnergyBreakdown {
        let g = self.g;
        let (ns, np, n) = (g.n_s, g.n_phi, self.n);
        let p = self.p;
        let mut el = 0.0;
        for c in 0..3 {
            let xc = &x[c * n..(c + 1) * n];
            let kap = AZIMUTHAL_WEIGHT[c];
            for i in 0..ns {
                for j in 0..np {
                    let k = g.idx(i, j);
                    let v = xc[k];
                    if i + 1 < ns {
                        let d = xc[k + np] - v;
                        el += g.m_phi[j] / g.hs * d * d;
                    }
                    if j + 1 < np {
                        let d = xc[k + 1] - v;
                        el += g.w2[i] * g.sin_edge[j] / g.hphi * d * d;
                    }
                    if kap > 0.0 && !g.is_axis(j) {
                        let sp = g.sin_phi[j];
                        el += kap * g.w2[i] * g.m_phi[j] / (sp * sp) * v * v;
                    }
                }
            }
        }
        let mut bulk_e = 0.0;
        if self.with_bulk {
            for i in 0..ns {
                for j in 0..np {
                    let k = g.idx(i, j);
                    bulk_e += g.volume(i, j) * bulk::potential(&self.node(x, k), p);
                }
            }
        }
        let mut surf = 0.0;
        if !p.strong_anchoring() && p.w > 0.0 {
            for j in 0..np {
                let q = self.node(x, g.idx(0, j));
                let d2: f64 = (0..3).map(|c| (q[c] - self.xs[j][c]).powi(2)).sum();
                surf += g.m_phi[j] * d2;
            }
            surf *= 0.5 * p.w;
        }
        EnergyBreakdown::new(0.5 * p.l * el, bulk_e, surf)
    }

    /// `E(y) − E(x)` as a sum of per-term differences.
    pub fn change(&self, x: &[f64], y: &[f64]) -> f64 {
        let g = self.g;
        let (ns, np, n) = (g.n_s, g.n_phi, self.n);
        let p = self.p;
        let d: Vec<f64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
        let mut el = 0.0;
        for c in 0..3 {
            let xc = &x[c * n..(c + 1) * n];
            let dc = &d[c * n..(c + 1) * n];
            let kap = AZIMUTHAL_WEIGHT[c];
            for i in 0..ns {
                for j in 0..np {
                    let k = g.idx(i, j);
                    if i + 1 < ns {
                        let (e, de) = (xc[k + np] - xc[k], dc[k + np] - dc[k]);
                        el += g.m_phi[j] / g.hs * de * (2.0 * e + de);
                    }
                    if j + 1 < np {
                        let (e, de) = (xc[k + 1] - xc[k], dc[k + 1] - dc[k]);
                        el += g.w2[i] * g.sin_edge[j] / g.hphi * de * (2.0 * e + de);
                    }
                    if kap > 0.0 && !g.is_axis(j) {
                        let sp = g.sin_phi[j];
                        el += kap * g.w2[i] * g.m_phi[j] / (sp * sp) * dc[k] * (2.0 * xc[k] + dc[k]);
                    }
                }
            }
        }
        let mut bulk_e = 0.0;
        if self.with_bulk {
            for i in 0..ns {
                for j in 0..np {
                    let k = g.idx(i, j);
                    bulk_e += g.volume(i, j) * bulk::potential_change(&self.node(x, k), &self.node(&d, k), p);
                }
            }
        }
        let mut surf = 0.0;
        if !p.strong_anchoring() && p.w > 0.0 {
            for j in 0..np {
                let k = g.idx(0, j);
                for c in 0..3 {
                    let dv = d[c * n + k];
                    surf += g.m_phi[j] * dv * (dv + 2.0 * (x[c * n + k] - self.xs[j][c]));
                }
            }
            surf *= 0.5 * p.w;
        }
        0.5 * p.l * el + bulk_e + surf
    }

    /// Gradient without zeroing constrained entries.
    pub fn raw_gradient(&self, x: &[f64], out: &mut [f64]) {
        let g = self.g;
        let (ns, np, n) = (g.n_s, g.n_phi, self.n);
        let p = self.p;
        out.iter_mut().for_each(|v| *v = 0.0);
        self.elastic_apply(x, out);
        if self.with_bulk {
            for i in 0..ns {
                for j in 0..np {
                    let k = g.idx(i, j);
                    let gf = bulk::gradient(&self.node(x, k), p);
                    let v = g.volume(i, j);
                    for c in 0..3 {
                        out[c * n + k] += v * gf[c];
                    }
                }
            }
        }
        if !p.strong_anchoring() && p.w > 0.0 {
            for j in 0..np {
                let k = g.idx(0, j);
                for c in 0..3 {
                    out[c * n + k] += p.w * g.m_phi[j] * (x[c * n + k] - self.xs[j][c]);
                }
            }
        }
    }

    /// Max over the nodes accepted by `keep` of `|∇E|/volume` restricted to free entries.
    pub fn scaled_residual(&self, x: &[f64], keep: impl Fn(usize, usize) -> bool) -> f64 {
        let g = self.g;
        let n = self.n;
        let mut grad = vec![0.0; 3 * n];
        self.raw_gradient(x, &mut grad);
        let mut worst: f64 = 0.0;
        for i in 0..g.n_s {
            for j in 0..g.n_phi {
                if !keep(i, j) {
                    continue;
                }
                let k = g.idx(i, j);
                let s2: f64 = (0..3)
                    .filter(|&c| !self.fixed[c * n + k])
                    .map(|c| grad[c * n + k].powi(2))
                    .sum();
                worst = worst.max(s2.sqrt() / g.volume(i, j));
            }
        }
        worst
    }
}

impl Problem for LdgProblem<'_> {
    fn dim(&self) -> usize {
        3 * self.n
    }

    fn energy(&self, x: &[f64]) -> f64 {
        self.breakdown(x).total
    }

    fn energy_change(&self, x: &[f64], y: &[f64]) -> f64 {
        self.change(x, y)
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        self.raw_gradient(x, out);
        for (o, &f) in out.iter_mut().zip(&self.fixed) {
            if f {
                *o = 0.0;
            }
        }
    }

    fn hess_vec(&self, x: &[f64], d: &[f64], out: &mut [f64]) {
        let g = self.g;
        let (ns, np, n) = (g.n_s, g.n_phi, self.n);
        let p = self.p;
        out.iter_mut().for_each(|v| *v = 0.0);
        self.elastic_apply(d, out);
        if self.with_bulk {
            for i in 0..ns {
                for j in 0..np {
                    let k = g.idx(i, j);
                    let h = bulk::hessian_apply(&self.node(x, k), &self.node(d, k), p);
                    let v = g.volume(i, j);
                    for c in 0..3 {
                        out[c * n + k] += v * h[c];
                    }
                }
            }
        }
        if !p.strong_anchoring() && p.w > 0.0 {
            for j in 0..np {
                let k = g.idx(0, j);
                for c in 0..3 {
                    out[c * n + k] += p.w * g.m_phi[j] * d[c * n + k];
                }
            }
        }
        for (o, &f) in out.iter_mut().zip(&self.fixed) {
            if f {
                *o = 0.0;
            }
        }
    }

    fn precondition(&self, r: &[f64], z: &mut [f64]) {
        debug_assert_eq!(self.pre.len(), 3, "preconditioner not factored");
        z.iter_mut().for_each(|v| *v = 0.0);
        let mut buf = Vec::new();
        for cs in &self.pre {
            buf.clear();
            buf.extend(cs.map.iter().map(|&k| r[k]));
            cs.chol.solve(&mut buf);
            for (&k, &v) in cs.map.iter().zip(&buf) {
                z[k] = v;
            }
        }
    }

    fn residual(&self, x: &[f64]) -> f64 {
        self.scaled_residual(x, |_, _| true)
    }

    fn project(&self, x: &mut [f64]) {
        for k in 0..x.len() {
            if self.fixed[k] {
                x[k] = self.fixed_val[k];
            }
        }
    }

    fn diverged(&self, x: &[f64]) -> Option<String> {
        let n = self.n;
        let sup = (0..n)
            .map(|k| (x[k] * x[k] + x[n + k] * x[n + k] + x[2 * n + k] * x[2 * n + k]).sqrt())
            .fold(0.0, f64::max);
        (sup > self.sup_limit).then(|| format!("sup |Q| = {sup:.6e} exceeds {:.6e}", self.sup_limit))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(n: usize) -> Vec<f64> {
        (0..3 * n).map(|k| 0.8 * (1.7 * k as f64 + 0.3).sin()).collect()
    }

    #[test]
    fn derivatives_match_differences() {
        let g = ExteriorGrid::new(6.0, 7, 9).unwrap();
        let p = MaterialParams::new(1.0, 2.0, 1.0, 0.7, 1.3).unwrap();
        let prob = LdgProblem::new(&g, &p, true, f64::INFINITY)
            .unwrap()
            .with_preconditioner()
            .unwrap();
        let x = state(g.len());
        let d: Vec<f64> = (0..x.len()).map(|k| (0.9 * k as f64).cos()).collect();
        let mut gr = vec![0.0; x.len()];
        prob.raw_gradient(&x, &mut gr);
        let h = 1e-5;
        let shift = |t: f64| -> Vec<f64> { x.iter().zip(&d).map(|(a, b)| a + t * b).collect() };
        let fd = (prob.energy(&shift(h)) - prob.energy(&shift(-h))) / (2.0 * h);
        let an: f64 = gr.iter().zip(&d).map(|(a, b)| a * b).sum();
        assert!((fd - an).abs() <= 1e-7 * an.abs().max(1.0), "{fd} vs {an}");

        // free directions only: the Hessian is applied on the constrained problem
        let mut df = d.clone();
        let mut zero = vec![0.0; x.len()];
        prob.precondition(&d, &mut zero);
        for k in 0..df.len() {
            if zero[k] == 0.0 {
                df[k] = 0.0;
            }
        }
        let mut hv = vec![0.0; x.len()];
        prob.hess_vec(&x, &df, &mut hv);
        let (mut gp, mut gm) = (vec![0.0; x.len()], vec![0.0; x.len()]);
        let xp: Vec<f64> = x.iter().zip(&df).map(|(a, b)| a + h * b).collect();
        let xm: Vec<f64> = x.iter().zip(&df).map(|(a, b)| a - h * b).collect();
        prob.gradient(&xp, &mut gp);
        prob.gradient(&xm, &mut gm);
        let scale = hv.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for k in 0..x.len() {
            let fd = (gp[k] - gm[k]) / (2.0 * h);
            assert!((fd - hv[k]).abs() <= 1e-6 * scale, "k={k}: {fd} vs {}", hv[k]);
        }
    }

    #[test]
    fn change_is_energy_difference() {
        let g = ExteriorGrid::new(6.0, 7, 9).unwrap();
        let p = MaterialParams::new(1.0, 2.0, 1.0, 0.7, 1.3).unwrap();
        let prob = LdgProblem::new(&g, &p, true, f64::INFINITY).unwrap();
        let x = state(g.len());
        let y: Vec<f64> = x.iter().enumerate().map(|(k, v)| v + 0.1 * (k as f64).cos()).collect();
        let direct = prob.energy(&y) - prob.energy(&x);
        assert!((prob.change(&x, &y) - direct).abs() <= 1e-12 * prob.energy(&x).abs());
    }
}
