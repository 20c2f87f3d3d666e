//! Axisymmetric harmonic maps `n = sinψ e_ρ + cosψ e_z` outside the unit ball.
//!
//! The angle field ψ lives on the nodes of an [`ExteriorGrid`]. The particle row
//! holds `ψ = φ`, the outer row the far-field gauge (0 or π). Axis nodes are not
//! unknowns: they copy the adjacent column, which makes the axis a natural
//! boundary. The discrete energy
//!
//! ```text
//! E = Σ_edges k (Δψ)² + Σ_off-axis w2_i m_j / sin²φ_j · sin²ψ
//! ```
//!
//! is the nodal quadrature of `∫ (|∇ψ|² + sin²ψ/ρ²) ρ dρ dz` with the same
//! weights as the tensor solver.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::axi::AxiTensor;
use crate::error::{NematicError, Result};
use crate::grid::ExteriorGrid;
use crate::ldg::{AxiQField, SolveReport, StepSchedule};
use crate::linalg::{BandCholesky, BandMatrix};
use crate::newton::{minimize, Problem};
use crate::qtensor::MaterialParams;

/// Value of ψ imposed on the outer row (`n → ±e_z`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FarField {
    #[default]
    Zero,
    Pi,
}

impl FarField {
    pub fn value(self) -> f64 {
        match self {
            FarField::Zero => 0.0,
            FarField::Pi => PI,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            FarField::Zero => FarField::Pi,
            FarField::Pi => FarField::Zero,
        }
    }
}

/// Starting fields for the multi-start relaxation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PsiInit {
    /// `ψ = φ·exp(−k(r − 1))`.
    BoundaryDecay { k: f64 },
    /// Radial anti-hedgehog seeded on the axis at `z = z0`, faded out with distance.
    HedgehogBelow { z0: f64 },
    /// `ψ = 0` off the particle.
    Uniform0,
}

impl PsiInit {
    pub fn menu() -> [PsiInit; 3] {
        [
            PsiInit::BoundaryDecay { k: 5.0 },
            PsiInit::HedgehogBelow { z0: -1.26 },
            PsiInit::Uniform0,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiField {
    pub n_s: usize,
    pub n_phi: usize,
    pub far: FarField,
    /// Row-major in `(i, j)`.
    pub psi: Vec<f64>,
}

impl PsiField {
    /// Field from `f(r, φ)` in the interior, with the boundary rows and axis
    /// copies imposed and values clamped to `[0, π]`.
    pub fn from_fn(g: &ExteriorGrid, far: FarField, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut out = Self {
            n_s: g.n_s,
            n_phi: g.n_phi,
            far,
            psi: vec![0.0; g.len()],
        };
        for i in 0..g.n_s {
            for j in 0..g.n_phi {
                out.psi[g.idx(i, j)] = f(g.r[i], g.phi[j]).clamp(0.0, PI);
            }
        }
        out.impose(g);
        out
    }

    /// `ψ = φ` at every node, outer row and axis included. This is the
    /// defect-free comparison map; it does not satisfy the far-field condition.
    pub fn comparison(g: &ExteriorGrid) -> Self {
        let mut psi = Vec::with_capacity(g.len());
        for _ in 0..g.n_s {
            psi.extend_from_slice(&g.phi);
        }
        Self {
            n_s: g.n_s,
            n_phi: g.n_phi,
            far: FarField::Zero,
            psi,
        }
    }

    pub fn initial(g: &ExteriorGrid, far: FarField, init: PsiInit) -> Self {
        match init {
            PsiInit::BoundaryDecay { k } => Self::from_fn(g, far, |r, phi| phi * (-k * (r - 1.0)).exp()),
            PsiInit::HedgehogBelow { z0 } => Self::from_fn(g, far, |r, phi| {
                let (rho, z) = (r * phi.sin(), r * phi.cos() - z0);
                let d = rho.hypot(z);
                let theta = rho.atan2(z);
                (PI - theta) * (-d / 4.0).exp()
            }),
            PsiInit::Uniform0 => Self::from_fn(g, far, |_, _| 0.0),
        }
    }

    /// Reflection `z → −z`, `ψ → π − ψ`, with the opposite gauge.
    pub fn mirrored(&self) -> Self {
        let mut psi = vec![0.0; self.psi.len()];
        for i in 0..self.n_s {
            for j in 0..self.n_phi {
                psi[i * self.n_phi + j] = PI - self.psi[i * self.n_phi + (self.n_phi - 1 - j)];
            }
        }
        Self {
            n_s: self.n_s,
            n_phi: self.n_phi,
            far: self.far.flipped(),
            psi,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.psi[i * self.n_phi + j]
    }

    pub fn check_shape(&self, g: &ExteriorGrid) -> Result<()> {
        if self.n_s != g.n_s || self.n_phi != g.n_phi || self.psi.len() != g.len() {
            return Err(NematicError::ShapeMismatch {
                expected: format!("{}x{}", g.n_s, g.n_phi),
                got: format!("{}x{} ({} nodes)", self.n_s, self.n_phi, self.psi.len()),
            });
        }
        Ok(())
    }

    /// Particle row `ψ = φ`, outer row gauge, axis copies of the adjacent column.
    pub fn impose(&mut self, g: &ExteriorGrid) {
        let (ns, np) = (g.n_s, g.n_phi);
        for j in 0..np {
            self.psi[g.idx(0, j)] = g.phi[j];
            self.psi[g.idx(ns - 1, j)] = self.far.value();
        }
        for i in 1..ns - 1 {
            self.psi[g.idx(i, 0)] = self.psi[g.idx(i, 1)];
            self.psi[g.idx(i, np - 1)] = self.psi[g.idx(i, np - 2)];
        }
    }
}

/// Discrete `E(ψ)` over the truncated domain.
pub fn psi_energy(f: &PsiField, g: &ExteriorGrid) -> Result<f64> {
    f.check_shape(g)?;
    Ok(full_energy(&f.psi, g))
}

fn full_energy(psi: &[f64], g: &ExteriorGrid) -> f64 {
    let (ns, np) = (g.n_s, g.n_phi);
    let mut e = 0.0;
    for i in 0..ns {
        for j in 0..np {
            let k = g.idx(i, j);
            let v = psi[k];
            if i + 1 < ns {
                let d = psi[k + np] - v;
                e += g.m_phi[j] / g.hs * d * d;
            }
            if j + 1 < np {
                let d = psi[k + 1] - v;
                e += g.w2[i] * g.sin_edge[j] / g.hphi * d * d;
            }
            if !g.is_axis(j) {
                let sp = g.sin_phi[j];
                e += g.w2[i] * g.m_phi[j] / (sp * sp) * v.sin().powi(2);
            }
        }
    }
    e
}

/// `full_energy(psi + d) − full_energy(psi)` as a sum of per-term differences.
fn full_change(psi: &[f64], d: &[f64], g: &ExteriorGrid) -> f64 {
    let (ns, np) = (g.n_s, g.n_phi);
    let mut e = 0.0;
    for i in 0..ns {
        for j in 0..np {
            let k = g.idx(i, j);
            if i + 1 < ns {
                let (a, da) = (psi[k + np] - psi[k], d[k + np] - d[k]);
                e += g.m_phi[j] / g.hs * da * (2.0 * a + da);
            }
            if j + 1 < np {
                let (a, da) = (psi[k + 1] - psi[k], d[k + 1] - d[k]);
                e += g.w2[i] * g.sin_edge[j] / g.hphi * da * (2.0 * a + da);
            }
            if !g.is_axis(j) && d[k] != 0.0 {
                let sp = g.sin_phi[j];
                // sin²(ψ + δ) − sin²ψ = sin δ · sin(2ψ + δ)
                e += g.w2[i] * g.m_phi[j] / (sp * sp) * d[k].sin() * (2.0 * psi[k] + d[k]).sin();
            }
        }
    }
    e
}

/// Gradient of [`full_energy`] with respect to every node value.
fn full_gradient(psi: &[f64], g: &ExteriorGrid, out: &mut [f64]) {
    let (ns, np) = (g.n_s, g.n_phi);
    out.iter_mut().for_each(|v| *v = 0.0);
    for i in 0..ns {
        for j in 0..np {
            let k = g.idx(i, j);
            let v = psi[k];
            if i + 1 < ns {
                let f = 2.0 * g.m_phi[j] / g.hs * (psi[k + np] - v);
                out[k] -= f;
                out[k + np] += f;
            }
            if j + 1 < np {
                let f = 2.0 * g.w2[i] * g.sin_edge[j] / g.hphi * (psi[k + 1] - v);
                out[k] -= f;
                out[k + 1] += f;
            }
            if !g.is_axis(j) {
                let sp = g.sin_phi[j];
                out[k] += g.w2[i] * g.m_phi[j] / (sp * sp) * (2.0 * v).sin();
            }
        }
    }
}

fn full_hess_vec(psi: &[f64], d: &[f64], g: &ExteriorGrid, out: &mut [f64]) {
    let (ns, np) = (g.n_s, g.n_phi);
    out.iter_mut().for_each(|v| *v = 0.0);
    for i in 0..ns {
        for j in 0..np {
            let k = g.idx(i, j);
            let v = d[k];
            if i + 1 < ns {
                let f = 2.0 * g.m_phi[j] / g.hs * (d[k + np] - v);
                out[k] -= f;
                out[k + np] += f;
            }
            if j + 1 < np {
                let f = 2.0 * g.w2[i] * g.sin_edge[j] / g.hphi * (d[k + 1] - v);
                out[k] -= f;
                out[k + 1] += f;
            }
            if !g.is_axis(j) {
                let sp = g.sin_phi[j];
                out[k] += 2.0 * g.w2[i] * g.m_phi[j] / (sp * sp) * (2.0 * psi[k]).cos() * v;
            }
        }
    }
}

/// Unknowns are the off-axis interior nodes; axis nodes alias their neighbour.
struct PsiProblem<'a> {
    g: &'a ExteriorGrid,
    template: PsiField,
    /// Unknown slot of every node (`usize::MAX` for fixed nodes).
    slot: Vec<usize>,
    /// Node of every unknown.
    node: Vec<usize>,
    /// Volume attached to every unknown (own cell plus aliased axis cell).
    vol: Vec<f64>,
    chol: BandCholesky,
}

impl<'a> PsiProblem<'a> {
    fn new(g: &'a ExteriorGrid, template: PsiField) -> Result<Self> {
        let (ns, np) = (g.n_s, g.n_phi);
        let mut slot = vec![usize::MAX; g.len()];
        let mut node = Vec::new();
        let mut vol = Vec::new();
        for i in 1..ns - 1 {
            for j in 1..np - 1 {
                slot[g.idx(i, j)] = node.len();
                node.push(g.idx(i, j));
                vol.push(g.volume(i, j));
            }
            slot[g.idx(i, 0)] = slot[g.idx(i, 1)];
            slot[g.idx(i, np - 1)] = slot[g.idx(i, np - 2)];
            vol[slot[g.idx(i, 1)]] += g.volume(i, 0);
            vol[slot[g.idx(i, np - 2)]] += g.volume(i, np - 1);
        }
        let bw = np - 2;
        let mut a = BandMatrix::zeros(node.len(), bw);
        let edge = |a: &mut BandMatrix, k1: usize, k2: usize, w: f64| match (slot[k1], slot[k2]) {
            (usize::MAX, usize::MAX) => {}
            (s1, usize::MAX) => a.add(s1, s1, w),
            (usize::MAX, s2) => a.add(s2, s2, w),
            (s1, s2) if s1 == s2 => {}
            (s1, s2) => a.add_edge(s1, s2, w),
        };
        for i in 0..ns {
            for j in 0..np {
                let k = g.idx(i, j);
                if i + 1 < ns {
                    edge(&mut a, k, k + np, 2.0 * g.m_phi[j] / g.hs);
                }
                if j + 1 < np {
                    edge(&mut a, k, k + 1, 2.0 * g.w2[i] * g.sin_edge[j] / g.hphi);
                }
                if !g.is_axis(j) && slot[k] != usize::MAX {
                    let sp = g.sin_phi[j];
                    a.add(slot[k], slot[k], 2.0 * g.w2[i] * g.m_phi[j] / (sp * sp));
                }
            }
        }
        Ok(Self {
            g,
            template,
            slot,
            node,
            vol,
            chol: a.cholesky()?,
        })
    }

    fn expand(&self, x: &[f64]) -> Vec<f64> {
        let mut full = self.template.psi.clone();
        for (k, &s) in self.slot.iter().enumerate() {
            if s != usize::MAX {
                full[k] = x[s];
            }
        }
        full
    }

    /// Like [`Self::expand`] for a direction: fixed nodes get 0.
    fn expand_dir(&self, d: &[f64]) -> Vec<f64> {
        self.slot
            .iter()
            .map(|&s| if s == usize::MAX { 0.0 } else { d[s] })
            .collect()
    }

    fn fold(&self, full: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (k, &s) in self.slot.iter().enumerate() {
            if s != usize::MAX {
                out[s] += full[k];
            }
        }
    }

    fn field(&self, x: &[f64]) -> PsiField {
        PsiField {
            psi: self.expand(x),
            ..self.template.clone()
        }
    }
}

impl Problem for PsiProblem<'_> {
    fn dim(&self) -> usize {
        self.node.len()
    }

    fn energy(&self, x: &[f64]) -> f64 {
        full_energy(&self.expand(x), self.g)
    }

    fn energy_change(&self, x: &[f64], y: &[f64]) -> f64 {
        let d: Vec<f64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
        full_change(&self.expand(x), &self.expand_dir(&d), self.g)
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        let mut full = vec![0.0; self.g.len()];
        full_gradient(&self.expand(x), self.g, &mut full);
        self.fold(&full, out);
    }

    fn hess_vec(&self, x: &[f64], d: &[f64], out: &mut [f64]) {
        let mut full = vec![0.0; self.g.len()];
        full_hess_vec(&self.expand(x), &self.expand_dir(d), self.g, &mut full);
        self.fold(&full, out);
    }

    fn precondition(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
        self.chol.solve(z);
    }

    /// Projected gradient over `2·volume`, i.e. the pointwise residual of
    /// `Δψ = sin(2ψ)/(2ρ²)` away from the clamp bounds.
    fn residual(&self, x: &[f64]) -> f64 {
        let mut gr = vec![0.0; x.len()];
        self.gradient(x, &mut gr);
        let mut worst: f64 = 0.0;
        for s in 0..x.len() {
            let gs = gr[s];
            if (x[s] <= 0.0 && gs > 0.0) || (x[s] >= PI && gs < 0.0) {
                continue;
            }
            worst = worst.max(gs.abs() / (2.0 * self.vol[s]));
        }
        worst
    }

    fn project(&self, x: &mut [f64]) {
        for v in x.iter_mut() {
            *v = v.clamp(0.0, PI);
        }
    }
}

/// Relaxes `f0` by monotone descent on `E(ψ)` with clamping to `[0, π]`.
/// Hitting the iteration cap is reported through `converged = false`.
pub fn psi_relax(f0: &PsiField, g: &ExteriorGrid, schedule: &StepSchedule) -> Result<(PsiField, SolveReport)> {
    f0.check_shape(g)?;
    for j in 0..g.n_phi {
        let d = (f0.get(0, j) - g.phi[j]).abs();
        if d > 1e-12 {
            return Err(NematicError::domain(format!(
                "particle row must hold psi = phi, off by {d:.3e} at node {j}"
            )));
        }
    }
    let start = Instant::now();
    let mut template = f0.clone();
    template.impose(g);
    let prob = PsiProblem::new(g, template)?;
    let mut x: Vec<f64> = prob.node.iter().map(|&k| f0.psi[k]).collect();
    let out = minimize(&prob, &mut x, schedule)?;
    let field = prob.field(&x);
    let report = SolveReport {
        iterations: out.iterations,
        final_energy: *out.energies.last().unwrap_or(&f64::NAN),
        energies: out.energies,
        residual: out.residual,
        sup_norm: field.psi.iter().fold(0.0, |m: f64, v| m.max(v.abs())),
        converged: out.converged,
        wall_time: start.elapsed().as_secs_f64(),
    };
    Ok((field, report))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartOutcome {
    pub init: PsiInit,
    pub energy: f64,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiStart {
    pub field: PsiField,
    pub report: SolveReport,
    pub starts: Vec<StartOutcome>,
}

/// Relaxes every start and keeps the lowest-energy converged result (the lowest
/// energy overall if none converged).
pub fn psi_multistart(
    g: &ExteriorGrid,
    far: FarField,
    inits: &[PsiInit],
    schedule: &StepSchedule,
) -> Result<MultiStart> {
    if inits.is_empty() {
        return Err(NematicError::domain("empty initialisation menu"));
    }
    let mut best: Option<(PsiField, SolveReport)> = None;
    let mut starts = Vec::new();
    for &init in inits {
        let (field, report) = psi_relax(&PsiField::initial(g, far, init), g, schedule)?;
        starts.push(StartOutcome {
            init,
            energy: report.final_energy,
            converged: report.converged,
            iterations: report.iterations,
        });
        let better = match &best {
            None => true,
            Some((_, b)) => {
                (report.converged && !b.converged)
                    || (report.converged == b.converged && report.final_energy < b.final_energy)
            }
        };
        if better {
            best = Some((field, report));
        }
    }
    let (field, report) = best.expect("non-empty menu");
    Ok(MultiStart { field, report, starts })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Defect {
    pub z0: f64,
    /// `+1` for a 0 → π flip with increasing `z`, `−1` for π → 0.
    pub jump: i32,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DefectCensus {
    /// Sorted by `z0`.
    pub defects: Vec<Defect>,
    /// Axis positions `z` whose state stays undecided outside any transition.
    pub unresolved: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum AxisState {
    Zero,
    Pi,
    Unknown,
}

fn classify(psi: f64) -> AxisState {
    if psi < FRAC_PI_4 {
        AxisState::Zero
    } else if psi > 3.0 * FRAC_PI_4 {
        AxisState::Pi
    } else {
        AxisState::Unknown
    }
}

/// Scans both axis segments `|z| > 1`, reading ψ from the column next to the axis.
pub fn detect_defects(f: &PsiField, g: &ExteriorGrid) -> Result<DefectCensus> {
    f.check_shape(g)?;
    let ns = g.n_s;
    let lower: Vec<(f64, f64)> = (1..ns).rev().map(|i| (-g.r[i], f.get(i, g.n_phi - 2))).collect();
    let upper: Vec<(f64, f64)> = (1..ns).map(|i| (g.r[i], f.get(i, 1))).collect();
    let mut census = DefectCensus::default();
    for seg in [lower, upper] {
        scan_segment(&seg, &mut census);
    }
    census.defects.sort_by(|a, b| a.z0.total_cmp(&b.z0));
    Ok(census)
}

/// `seg` is ordered by increasing `z`.
fn scan_segment(seg: &[(f64, f64)], census: &mut DefectCensus) {
    let mut last: Option<(usize, AxisState)> = None;
    let mut pending: Vec<f64> = Vec::new();
    for (k, &(z, psi)) in seg.iter().enumerate() {
        let st = classify(psi);
        if st == AxisState::Unknown {
            pending.push(z);
            continue;
        }
        match last {
            Some((k0, s0)) if s0 != st => {
                let z0 = crossing(&seg[k0..=k]);
                let jump = if st == AxisState::Pi { 1 } else { -1 };
                let cell = (seg[k].0 - seg[k - 1].0).abs();
                if census.defects.last().is_none_or(|d| (d.z0 - z0).abs() > cell) {
                    census.defects.push(Defect { z0, jump });
                }
            }
            _ => census.unresolved.append(&mut pending),
        }
        pending.clear();
        last = Some((k, st));
    }
    census.unresolved.extend(pending);
}

/// First zero of `ψ − π/2` along the run, by linear interpolation.
fn crossing(run: &[(f64, f64)]) -> f64 {
    for w in run.windows(2) {
        let (a, b) = (w[0].1 - FRAC_PI_2, w[1].1 - FRAC_PI_2);
        if a == 0.0 {
            return w[0].0;
        }
        if a * b < 0.0 || b == 0.0 {
            let t = a / (a - b);
            return w[0].0 + t * (w[1].0 - w[0].0);
        }
    }
    0.5 * (run[0].0 + run[run.len() - 1].0)
}

/// `−½ ∫₀^π ∂_φψ sinψ dφ` on the sphere of radius `r`, with ψ interpolated
/// linearly in `s = 1/r` between rows. Each polar segment is integrated exactly
/// for piecewise-linear ψ.
pub fn degree(f: &PsiField, g: &ExteriorGrid, r: f64) -> Result<f64> {
    f.check_shape(g)?;
    if !(r >= 1.0) {
        return Err(NematicError::domain(format!("degree needs r >= 1, got {r}")));
    }
    let (i, t) = g
        .locate(r)
        .ok_or_else(|| NematicError::domain(format!("radius {r} outside the grid")))?;
    let census = detect_defects(f, g)?;
    let cell = g.hs * r * r;
    for d in &census.defects {
        if (d.z0.abs() - r).abs() < cell {
            return Err(NematicError::domain(format!(
                "radius {r} is within one cell of the defect at z = {}",
                d.z0
            )));
        }
    }
    let ring: Vec<f64> = (0..g.n_phi)
        .map(|j| (1.0 - t) * f.get(i, j) + t * f.get(i + 1, j))
        .collect();
    let mut sum = 0.0;
    for w in ring.windows(2) {
        // −½ ∫ sinψ dψ over the segment
        sum += 0.5 * (w[1].cos() - w[0].cos());
    }
    Ok(sum)
}

/// Pointwise uniaxial lift `s*(n⊗n − I/3)`. Axis nodes are snapped to the
/// nearer of `ψ ∈ {0, π}` so the result is axis-regular.
pub fn lift_to_qtensor(f: &PsiField, p: &MaterialParams) -> AxiQField {
    let mut nodes = Vec::with_capacity(f.psi.len());
    for i in 0..f.n_s {
        for j in 0..f.n_phi {
            let psi = f.get(i, j);
            let t = if j == 0 || j == f.n_phi - 1 {
                let cp = if psi < FRAC_PI_2 { 1.0 } else { -1.0 };
                AxiTensor::radial_sc(0.0, cp, p.s_star)
            } else {
                AxiTensor::from_angle(psi, p.s_star)
            };
            nodes.push(t);
        }
    }
    AxiQField {
        n_s: f.n_s,
        n_phi: f.n_phi,
        nodes,
    }
}

/// `Σ sin²ψ/r² · volume` over rows with `r ≥ R_out/2`.
pub fn hardy_tail(f: &PsiField, g: &ExteriorGrid) -> Result<f64> {
    f.check_shape(g)?;
    let mut sum = 0.0;
    for i in 0..g.n_s {
        if g.r[i] < 0.5 * g.r_out {
            continue;
        }
        for j in 0..g.n_phi {
            sum += f.get(i, j).sin().powi(2) / (g.r[i] * g.r[i]) * g.volume(i, j);
        }
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comparison_map_energy() {
        let g = ExteriorGrid::new(10.0, 24, 64).unwrap();
        let f = PsiField::comparison(&g);
        let e = psi_energy(&f, &g).unwrap();
        assert!((e / 36.0 - 1.0).abs() < 1e-3, "{e}");
        assert!((degree(&f, &g, 1.0).unwrap() + 1.0).abs() < 1e-14);
    }

    #[test]
    fn gradient_matches_differences() {
        let g = ExteriorGrid::new(6.0, 10, 12).unwrap();
        let f = PsiField::initial(&g, FarField::Zero, PsiInit::BoundaryDecay { k: 1.0 });
        let prob = PsiProblem::new(&g, f.clone()).unwrap();
        let x: Vec<f64> = prob.node.iter().map(|&k| f.psi[k] + 0.01 * (k as f64).sin()).collect();
        let mut gr = vec![0.0; x.len()];
        prob.gradient(&x, &mut gr);
        let d: Vec<f64> = (0..x.len()).map(|s| (s as f64 * 0.7).cos()).collect();
        let h = 1e-6;
        let xp: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + h * b).collect();
        let xm: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a - h * b).collect();
        let fd = (prob.energy(&xp) - prob.energy(&xm)) / (2.0 * h);
        let an: f64 = gr.iter().zip(&d).map(|(a, b)| a * b).sum();
        assert!((fd - an).abs() < 1e-6 * an.abs().max(1.0), "{fd} {an}");
        let mut hd = vec![0.0; x.len()];
        prob.hess_vec(&x, &d, &mut hd);
        let mut gp = vec![0.0; x.len()];
        let mut gm = vec![0.0; x.len()];
        prob.gradient(&xp, &mut gp);
        prob.gradient(&xm, &mut gm);
        for s in 0..x.len() {
            let fd = (gp[s] - gm[s]) / (2.0 * h);
            assert!((fd - hd[s]).abs() < 1e-5 * hd[s].abs().max(1.0));
        }
    }
}
