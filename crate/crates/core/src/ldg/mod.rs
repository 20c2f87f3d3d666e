//! Axisymmetric Landau–de Gennes equilibria outside the unit ball.
//!
//! The reduced energy per radian of azimuth is discretised variationally on an
//! [`ExteriorGrid`]: edge differences for the meridian gradient, the exact
//! azimuthal term `(4 x1² + x3²)/ρ²`, nodal quadrature for the bulk potential,
//! and nodal quadrature on `r = 1` for the surface term. The weak anchoring
//! condition is the natural boundary condition of this energy.

mod bulk;
mod problem;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::axi::AxiTensor;
use crate::error::{NematicError, Result};
use crate::grid::ExteriorGrid;
use crate::newton::minimize;
use crate::qtensor::{bulk_gradient, MaterialParams, QTensor};
use crate::quadrupole::QuadrupolarConfig;

pub use crate::newton::{StepMode, StepSchedule};
pub(crate) use problem::LdgProblem;

/// Cap on the anchoring ratio used for the default warm start.
pub const MAX_WARM_START_RATIO: f64 = 1e6;

/// Axisymmetric tensor field, one [`AxiTensor`] per grid node (row-major in `(i, j)`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiQField {
    pub n_s: usize,
    pub n_phi: usize,
    pub nodes: Vec<AxiTensor>,
}

impl AxiQField {
    pub fn from_fn(g: &ExteriorGrid, mut f: impl FnMut(usize, usize) -> AxiTensor) -> Self {
        let mut nodes = Vec::with_capacity(g.len());
        for i in 0..g.n_s {
            for j in 0..g.n_phi {
                nodes.push(f(i, j));
            }
        }
        Self {
            n_s: g.n_s,
            n_phi: g.n_phi,
            nodes,
        }
    }

    pub fn uniform(g: &ExteriorGrid, t: AxiTensor) -> Self {
        Self::from_fn(g, |_, _| t)
    }

    pub fn far_field(g: &ExteriorGrid, p: &MaterialParams) -> Self {
        Self::uniform(g, AxiTensor::far_field(p.s_star))
    }

    /// `Q0` sampled at the nodes.
    pub fn quadrupolar(g: &ExteriorGrid, cfg: &QuadrupolarConfig) -> Self {
        Self::from_fn(g, |i, j| cfg.axi_sc(g.r[i], g.sin_phi[j], g.cos_phi[j]))
    }

    /// `Q0` at `w = min(W/L, 10⁶)`, or `Q∞` without anchoring.
    pub fn warm_start(g: &ExteriorGrid, p: &MaterialParams) -> Result<Self> {
        let w = p.anchoring_ratio().min(MAX_WARM_START_RATIO);
        if w > 0.0 {
            Ok(Self::quadrupolar(g, &QuadrupolarConfig::new(w, p.s_star)?))
        } else {
            Ok(Self::far_field(g, p))
        }
    }

    pub fn get(&self, i: usize, j: usize) -> AxiTensor {
        self.nodes[i * self.n_phi + j]
    }

    pub fn set(&mut self, i: usize, j: usize, t: AxiTensor) {
        self.nodes[i * self.n_phi + j] = t;
    }

    pub fn check_shape(&self, g: &ExteriorGrid) -> Result<()> {
        if self.n_s != g.n_s || self.n_phi != g.n_phi || self.nodes.len() != g.len() {
            return Err(NematicError::ShapeMismatch {
                expected: format!("{}x{}", g.n_s, g.n_phi),
                got: format!("{}x{} ({} nodes)", self.n_s, self.n_phi, self.nodes.len()),
            });
        }
        Ok(())
    }

    /// Largest violation of `m_ρz = 0`, `m_ρρ = m_θθ` on the axis rows.
    pub fn axis_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n_s {
            for j in [0, self.n_phi - 1] {
                let t = self.get(i, j);
                worst = worst.max(t.rz.abs()).max((t.rr - t.tt).abs());
            }
        }
        worst
    }

    pub fn sup_norm(&self) -> f64 {
        self.nodes.iter().map(|t| t.norm()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            n_s: self.n_s,
            n_phi: self.n_phi,
            nodes: self
                .nodes
                .iter()
                .map(|t| AxiTensor::new(k * t.rr, k * t.tt, k * t.rz))
                .collect(),
        }
    }

    pub(crate) fn to_x(&self) -> Vec<f64> {
        let n = self.nodes.len();
        let mut x = vec![0.0; 3 * n];
        for (k, t) in self.nodes.iter().enumerate() {
            let v = t.to_x();
            for c in 0..3 {
                x[c * n + k] = v[c];
            }
        }
        x
    }

    pub(crate) fn from_x(n_s: usize, n_phi: usize, x: &[f64]) -> Self {
        let n = n_s * n_phi;
        let nodes = (0..n)
            .map(|k| AxiTensor::from_x([x[k], x[n + k], x[2 * n + k]]))
            .collect();
        Self { n_s, n_phi, nodes }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub elastic: f64,
    pub bulk: f64,
    pub surface: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    pub(crate) fn new(elastic: f64, bulk: f64, surface: f64) -> Self {
        Self {
            elastic,
            bulk,
            surface,
            total: elastic + bulk + surface,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub final_energy: f64,
    /// Energy after every accepted step, starting with the initial one.
    pub energies: Vec<f64>,
    pub residual: f64,
    pub sup_norm: f64,
    pub converged: bool,
    pub wall_time: f64,
}

/// Reduced free energy per radian of azimuth.
pub fn reduced_energy(f: &AxiQField, p: &MaterialParams, g: &ExteriorGrid) -> Result<f64> {
    Ok(energy_breakdown(f, p, g)?.total)
}

pub fn energy_breakdown(f: &AxiQField, p: &MaterialParams, g: &ExteriorGrid) -> Result<EnergyBreakdown> {
    f.check_shape(g)?;
    let prob = LdgProblem::new(g, p, true, f64::INFINITY)?;
    Ok(prob.breakdown(&f.to_x()))
}

/// `|∇Q|²` of the axisymmetric field from its cylindrical components and their
/// `ρ`, `z` derivatives at radius `rho > 0`.
pub fn reduced_elastic_density(m: AxiTensor, dm_drho: AxiTensor, dm_dz: AxiTensor, rho: f64) -> f64 {
    let sq = |t: AxiTensor| {
        let x = t.to_x();
        x[0] * x[0] + x[1] * x[1] + x[2] * x[2]
    };
    let az = 2.0 * (m.rr - m.tt).powi(2) + 2.0 * m.rz * m.rz;
    sq(dm_drho) + sq(dm_dz) + az / (rho * rho)
}

/// Relaxes `f0` to an equilibrium by monotone descent on the reduced energy.
///
/// Boundary values (outer row, strong anchoring, axis regularity) are imposed on
/// every iterate. Hitting the iteration cap is not an error: the returned report
/// has `converged = false`.
pub fn relax(
    f0: &AxiQField,
    p: &MaterialParams,
    g: &ExteriorGrid,
    schedule: &StepSchedule,
) -> Result<(AxiQField, SolveReport)> {
    relax_with(f0, p, g, schedule, true)
}

pub(crate) fn relax_with(
    f0: &AxiQField,
    p: &MaterialParams,
    g: &ExteriorGrid,
    schedule: &StepSchedule,
    with_bulk: bool,
) -> Result<(AxiQField, SolveReport)> {
    f0.check_shape(g)?;
    let defect = f0.axis_defect();
    if defect > 1e-12 {
        return Err(NematicError::domain(format!(
            "initial field violates axis regularity by {defect:.3e}"
        )));
    }
    let start = Instant::now();
    let limit = 10.0 * bulk_bound(p).bound;
    let prob = LdgProblem::new(g, p, with_bulk, limit)?.with_preconditioner()?;
    let mut x = f0.to_x();
    let out = minimize(&prob, &mut x, schedule)?;
    let field = AxiQField::from_x(g.n_s, g.n_phi, &x);
    let report = SolveReport {
        iterations: out.iterations,
        final_energy: *out.energies.last().unwrap_or(&f64::NAN),
        energies: out.energies,
        residual: out.residual,
        sup_norm: field.sup_norm(),
        converged: out.converged,
        wall_time: start.elapsed().as_secs_f64(),
    };
    Ok((field, report))
}

/// Imposes the anchoring condition on the inner row.
///
/// Strong anchoring overwrites the row with `Q_s`. Finite `W` solves the
/// second-order one-sided Robin relation `(L/W)(−∂_r Q) = Q_s − Q` for the
/// boundary value, with `−∂_r = ∂_s` at `r = 1`. `W = 0` leaves the field unchanged.
pub fn apply_anchoring(f: &AxiQField, p: &MaterialParams, g: &ExteriorGrid) -> Result<AxiQField> {
    f.check_shape(g)?;
    let mut out = f.clone();
    for j in 0..g.n_phi {
        let qs = AxiTensor::radial_sc(g.sin_phi[j], g.cos_phi[j], p.s_star).to_x();
        if p.strong_anchoring() {
            out.set(0, j, AxiTensor::radial_sc(g.sin_phi[j], g.cos_phi[j], p.s_star));
            continue;
        }
        let new = if p.w > 0.0 {
            let k = p.l / (p.w * 2.0 * g.hs);
            let q1 = f.get(1, j).to_x();
            let q2 = f.get(2, j).to_x();
            let mut v = [0.0; 3];
            for c in 0..3 {
                v[c] = (qs[c] + k * (4.0 * q1[c] - q2[c])) / (1.0 + 3.0 * k);
            }
            v
        } else {
            continue;
        };
        let mut t = AxiTensor::from_x(new);
        if g.is_axis(j) {
            let tt = 0.5 * (t.rr + t.tt);
            t = AxiTensor::new(tt, tt, 0.0);
        }
        out.set(0, j, t);
    }
    Ok(out)
}

/// Max over the boundary nodes of `|(L/W) ∂_s Q − (Q_s − Q)|`, second-order
/// one-sided difference. Zero under strong anchoring or when `W = 0`.
pub fn robin_residual(f: &AxiQField, p: &MaterialParams, g: &ExteriorGrid) -> Result<f64> {
    f.check_shape(g)?;
    if p.strong_anchoring() || p.w == 0.0 {
        return Ok(0.0);
    }
    let mut worst: f64 = 0.0;
    for j in 0..g.n_phi {
        let qs = AxiTensor::radial_sc(g.sin_phi[j], g.cos_phi[j], p.s_star).to_x();
        let (q0, q1, q2) = (f.get(0, j).to_x(), f.get(1, j).to_x(), f.get(2, j).to_x());
        let mut s2 = 0.0;
        for c in 0..3 {
            let ds = (3.0 * q0[c] - 4.0 * q1[c] + q2[c]) / (2.0 * g.hs);
            s2 += (p.l / p.w * ds - (qs[c] - q0[c])).powi(2);
        }
        worst = worst.max(s2.sqrt());
    }
    Ok(worst)
}

/// Max over interior nodes of `|L Δ_h Q − ∇f(Q)|`.
pub fn residual(f: &AxiQField, p: &MaterialParams, g: &ExteriorGrid) -> Result<f64> {
    interior_residual(f, p, g, true)
}

/// Max over interior nodes of `|L Δ_h Q|`, the bulk term switched off.
pub fn harmonic_residual(f: &AxiQField, p: &MaterialParams, g: &ExteriorGrid) -> Result<f64> {
    interior_residual(f, p, g, false)
}

fn interior_residual(f: &AxiQField, p: &MaterialParams, g: &ExteriorGrid, with_bulk: bool) -> Result<f64> {
    f.check_shape(g)?;
    let prob = LdgProblem::new(g, p, with_bulk, f64::INFINITY)?;
    let ns = g.n_s;
    Ok(prob.scaled_residual(&f.to_x(), |i, _| i > 0 && i + 1 < ns))
}

/// A priori bound on `|Q|` for minimisers with these bulk constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BulkBound {
    /// Largest `|Q̃|` found with `∇f(Q∞ + Q̃)·Q̃ < 0`.
    pub q_tilde: f64,
    /// `q̃0 + s*√(2/3)`.
    pub bound: f64,
}

/// Coarse search over the directions with entries in `{−1, 0, 1}⁵` for the
/// outermost radius where the bulk force still points back toward `Q∞`.
pub fn bulk_bound(p: &MaterialParams) -> BulkBound {
    let qinf = p.q_infinity();
    let radial = |d: &QTensor, t: f64| bulk_gradient(&qinf.add(&d.scaled(t)), p).dot(d);
    let t_max = 4.0 * (p.s_star + (p.a / p.c).sqrt() + p.b / p.c) + 1.0;
    let steps = 2000;
    let dt = t_max / steps as f64;
    let mut q_tilde: f64 = 0.0;
    for code in 1..243usize {
        let mut u = [0.0; 5];
        let mut c = code;
        for v in u.iter_mut() {
            *v = (c % 3) as f64 - 1.0;
            c /= 3;
        }
        let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let d = QTensor::new(u.map(|v| v / norm));
        let mut last_neg = None;
        for k in 1..=steps {
            let t = k as f64 * dt;
            if radial(&d, t) < 0.0 {
                last_neg = Some(t);
            }
        }
        if let Some(t0) = last_neg {
            let root = crate::quadrupole::bisect(|t| radial(&d, t), t0, t0 + dt, 1e-12).unwrap_or(t0 + dt);
            q_tilde = q_tilde.max(root);
        }
    }
    BulkBound {
        q_tilde,
        bound: q_tilde + p.s_star * (2.0f64 / 3.0).sqrt(),
    }
}

/// `(sup |Q|, sup |Q| ≤ bound)`.
pub fn sup_bound_check(f: &AxiQField, p: &MaterialParams) -> (f64, bool) {
    let sup = f.sup_norm();
    (sup, sup <= bulk_bound(p).bound)
}
