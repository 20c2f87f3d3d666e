//! Closed-form small-particle limit
//!
//! ```text
//! Q0 = α(r)(e_r⊗e_r − I/3) + β(r)(e_z⊗e_z − I/3),
//! α(r) = s* w/(3+w) / r³,   β(r) = s*(1 − w/(1+w) / r)
//! ```
//!
//! together with its eigenvalue branches, the Saturn-ring radius, the mean
//! director, and discrete checks that `Q0` is harmonic with the Robin
//! anchoring condition on the unit sphere.

use serde::{Deserialize, Serialize};

use crate::axi::{AxiTensor, AZIMUTHAL_WEIGHT};
use crate::error::{NematicError, Result};
use crate::qtensor::{biaxiality, QTensor};

/// Limiting anchoring strength `w ∈ (0, ∞]` and the vacuum order parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadrupolarConfig {
    pub w: f64,
    pub s_star: f64,
}

impl QuadrupolarConfig {
    pub fn new(w: f64, s_star: f64) -> Result<Self> {
        if !(w > 0.0) {
            return Err(NematicError::domain(format!("anchoring ratio w must be > 0, got {w}")));
        }
        if !(s_star > 0.0 && s_star.is_finite()) {
            return Err(NematicError::domain(format!("s* must be > 0, got {s_star}")));
        }
        Ok(Self { w, s_star })
    }

    /// `w/(3+w)`, exactly 1 at `w = ∞`.
    pub fn cw3(&self) -> f64 {
        coeff(self.w, 3.0)
    }

    /// `w/(1+w)`, exactly 1 at `w = ∞`.
    pub fn cw1(&self) -> f64 {
        coeff(self.w, 1.0)
    }

    pub fn alpha(&self, r: f64) -> f64 {
        self.s_star * self.cw3() / (r * r * r)
    }

    pub fn beta(&self, r: f64) -> f64 {
        self.s_star * (1.0 - self.cw1() / r)
    }

    /// Cylindrical-frame components of `Q0` at spherical position `(r, φ)`.
    pub fn axi(&self, r: f64, phi: f64) -> AxiTensor {
        let (sp, cp) = phi.sin_cos();
        self.axi_sc(r, sp, cp)
    }

    /// As [`Self::axi`], from precomputed `sin φ` and `cos φ`.
    pub fn axi_sc(&self, r: f64, sp: f64, cp: f64) -> AxiTensor {
        let (al, be) = (self.alpha(r), self.beta(r));
        AxiTensor::new(al * (sp * sp - 1.0 / 3.0) - be / 3.0, -(al + be) / 3.0, al * sp * cp)
    }
}

fn coeff(w: f64, k: f64) -> f64 {
    if w.is_infinite() {
        1.0
    } else {
        w / (k + w)
    }
}

/// Harmonic tensor field of the `Q0` form on the shell `1 ≤ r ≤ R`, with the same
/// Robin condition on `r = 1` and `Q = Q∞` exactly on `r = R`:
///
/// ```text
/// Q = (K1 r⁻³ + K2 r²)(e_r⊗e_r − I/3) + (c1 + c2/r)(e_z⊗e_z − I/3)
/// ```
///
/// It tends to `Q0` as `R → ∞` and is the limit of the truncated problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedQuadrupole {
    pub cfg: QuadrupolarConfig,
    pub r_out: f64,
    k1: f64,
    k2: f64,
    c1: f64,
    c2: f64,
}

impl TruncatedQuadrupole {
    pub fn new(cfg: QuadrupolarConfig, r_out: f64) -> Result<Self> {
        if !(r_out > 1.0 && r_out.is_finite()) {
            return Err(NematicError::domain(format!("outer radius must exceed 1, got {r_out}")));
        }
        let s = cfg.s_star;
        let q5 = r_out.powi(-5);
        let (k1, c2) = if cfg.w.is_infinite() {
            (s / (1.0 - q5), -s / (1.0 - 1.0 / r_out))
        } else {
            let w = cfg.w;
            (
                s * w / (3.0 + 2.0 * q5 + w * (1.0 - q5)),
                -s * w / (1.0 + w - w / r_out),
            )
        };
        Ok(Self {
            cfg,
            r_out,
            k1,
            k2: -k1 * q5,
            c1: s - c2 / r_out,
            c2,
        })
    }

    pub fn axi_sc(&self, r: f64, sp: f64, cp: f64) -> AxiTensor {
        let al = self.k1 / (r * r * r) + self.k2 * r * r;
        let be = self.c1 + self.c2 / r;
        AxiTensor::new(al * (sp * sp - 1.0 / 3.0) - be / 3.0, -(al + be) / 3.0, al * sp * cp)
    }
}

/// `p(w, r) = r³ − w/(1+w) r² − w/(3+w)`.
pub fn ring_polynomial(w: f64, r: f64) -> f64 {
    r * r * r - coeff(w, 1.0) * r * r - coeff(w, 3.0)
}

fn ring_polynomial_dr(w: f64, r: f64) -> f64 {
    3.0 * r * r - 2.0 * coeff(w, 1.0) * r
}

/// `Q0(x)` for `|x| ≥ 1`. Points within a few ulps inside the sphere are
/// treated as lying on it.
pub fn q0_eval(x: [f64; 3], cfg: &QuadrupolarConfig) -> Result<QTensor> {
    let norm = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    if !(norm >= 1.0 - 4.0 * f64::EPSILON) {
        return Err(NematicError::domain(format!("Q0 is defined for |x| >= 1, got {norm}")));
    }
    let r = norm.max(1.0);
    let e_r = x.map(|v| v / norm);
    let (al, be) = (cfg.alpha(r), cfg.beta(r));
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let id = if i == j { 1.0 / 3.0 } else { 0.0 };
            let ez = if i == 2 && j == 2 { 1.0 } else { 0.0 };
            m[i][j] = al * (e_r[i] * e_r[j] - id) + be * (ez - id);
        }
    }
    Ok(QTensor::from_matrix(&m))
}

/// Closed-form eigenvalue branches `σ/6 ± √(σ²/4 − ν sin²φ)`, `−σ/3`, sorted descending.
pub fn q0_eigenvalues(r: f64, phi: f64, cfg: &QuadrupolarConfig) -> [f64; 3] {
    let (al, be) = (cfg.alpha(r), cfg.beta(r));
    let sigma = al + be;
    let nu = al * be;
    // σ²/4 − ν sin²φ = (α − β)²/4 + ν cos²φ, free of cancellation at the ring
    let cp = phi.cos();
    let disc = (0.25 * (al - be) * (al - be) + nu * cp * cp).max(0.0).sqrt();
    let mut l = [sigma / 6.0 + disc, sigma / 6.0 - disc, -sigma / 3.0];
    l.sort_by(|a, b| b.total_cmp(a));
    l
}

/// Outcome of the ring-radius computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingResult {
    /// An interior ring `r_w > 1` exists.
    pub exists: bool,
    /// `r_w` when it exists; `1` at the surface-ring threshold `w = √3`.
    pub radius: Option<f64>,
    /// `|p(w, r_w)|` (0 when no root is reported).
    pub residual: f64,
    /// `w` sits at the threshold √3, where the ring touches the particle.
    pub boundary: bool,
}

const BOUNDARY_TOL: f64 = 1e-12;

/// Saturn-ring radius: the unique root `r > 1` of `p(w, ·)` when `w > √3`.
pub fn ring_radius(w: f64) -> Result<RingResult> {
    if !(w > 0.0) {
        return Err(NematicError::domain(format!("anchoring ratio w must be > 0, got {w}")));
    }
    let sqrt3 = 3f64.sqrt();
    if (w - sqrt3).abs() <= BOUNDARY_TOL {
        return Ok(RingResult {
            exists: false,
            radius: Some(1.0),
            residual: ring_polynomial(w, 1.0).abs(),
            boundary: true,
        });
    }
    if w < sqrt3 {
        return Ok(RingResult {
            exists: false,
            radius: None,
            residual: 0.0,
            boundary: false,
        });
    }
    // p(w,1) < 0 < p(w,2) and p increasing on (1, ∞)
    let (mut lo, mut hi) = (1.0f64, 2.0f64);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if ring_polynomial(w, mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut r = 0.5 * (lo + hi);
    for _ in 0..2 {
        let d = ring_polynomial_dr(w, r);
        if d != 0.0 {
            r -= ring_polynomial(w, r) / d;
        }
    }
    Ok(RingResult {
        exists: true,
        radius: Some(r),
        residual: ring_polynomial(w, r).abs(),
        boundary: false,
    })
}

/// Mean director `n0` (unit eigenvector of the largest eigenvalue) in the meridional
/// plane θ = 0, i.e. `[n_ρ, 0, n_z]`, together with `μ`.
pub fn director(r: f64, phi: f64, cfg: &QuadrupolarConfig) -> Result<([f64; 3], f64)> {
    if !(phi > 0.0 && phi < std::f64::consts::PI) || !(r >= 1.0) {
        return Err(NematicError::domain(format!(
            "director needs r >= 1, 0 < φ < π (got r={r}, φ={phi})"
        )));
    }
    let l = q0_eigenvalues(r, phi, cfg);
    if l[0] - l[1] < 1e-10 {
        return Err(NematicError::Degenerate(format!("ring locus at r={r}, φ={phi}")));
    }
    let (al, be) = (cfg.alpha(r), cfg.beta(r));
    let sp = phi.sin();
    let c2 = 1.0 - 2.0 * sp * sp;
    let mu = ((al * c2 + be) / (al * al + be * be + 2.0 * al * be * c2).sqrt()).clamp(-1.0, 1.0);
    let n_rho = (0.5 * (1.0 - mu)).sqrt();
    let mut n_z = (0.5 * (1.0 + mu)).sqrt();
    if phi > std::f64::consts::FRAC_PI_2 {
        n_z = -n_z;
    }
    Ok(([n_rho, 0.0, n_z], mu))
}

/// `n0⊗n0`, continuous away from the ring.
pub fn director_projector(r: f64, phi: f64, cfg: &QuadrupolarConfig) -> Result<[[f64; 3]; 3]> {
    let (n, _) = director(r, phi, cfg)?;
    let mut p = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            p[i][j] = n[i] * n[j];
        }
    }
    Ok(p)
}

/// Uniform tensor-product grid in spherical `(r, φ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub n_r: usize,
    pub phi_min: f64,
    pub phi_max: f64,
    pub n_phi: usize,
}

impl PolarGrid {
    pub fn r(&self, i: usize) -> f64 {
        self.r_min + (self.r_max - self.r_min) * i as f64 / (self.n_r - 1) as f64
    }

    pub fn phi(&self, j: usize) -> f64 {
        self.phi_min + (self.phi_max - self.phi_min) * j as f64 / (self.n_phi - 1) as f64
    }

    pub fn hr(&self) -> f64 {
        (self.r_max - self.r_min) / (self.n_r - 1) as f64
    }

    pub fn hphi(&self) -> f64 {
        (self.phi_max - self.phi_min) / (self.n_phi - 1) as f64
    }

    fn check(&self) -> Result<()> {
        if self.n_r < 3 || self.n_phi < 3 || !(self.r_max > self.r_min) || !(self.phi_max > self.phi_min) {
            return Err(NematicError::domain(
                "polar grid needs >= 3 nodes per direction and a positive extent",
            ));
        }
        Ok(())
    }
}

/// Points of the uniaxial ring locus of `Q0` away from the symmetry axis.
///
/// Cells whose biaxiality falls below `tol` with the two leading eigenvalues closer
/// than the trailing pair are grouped into clusters; each cluster is refined by
/// bisection of `α(r) − β(r)` (the equatorial difference of the two leading branches)
/// over its radial extent. The refined locus lies on the equator φ = π/2.
pub fn uniaxial_locus_scan(cfg: &QuadrupolarConfig, grid: &PolarGrid, tol: f64) -> Result<Vec<(f64, f64)>> {
    grid.check()?;
    if grid.phi_min <= 0.0 || grid.phi_max >= std::f64::consts::PI || grid.r_min < 1.0 {
        return Err(NematicError::domain(
            "locus scan grid must exclude the axis and the particle",
        ));
    }
    let mut flagged = vec![false; grid.n_r * grid.n_phi];
    for i in 0..grid.n_r {
        for j in 0..grid.n_phi {
            let (r, phi) = (grid.r(i), grid.phi(j));
            let t = cfg.axi(r, phi).to_qtensor(0.0);
            let l = q0_eigenvalues(r, phi, cfg);
            let b = biaxiality(&t).unwrap_or(1.0);
            if b < tol && l[0] - l[1] < l[1] - l[2] {
                flagged[i * grid.n_phi + j] = true;
            }
        }
    }
    // connected components (4-neighbour) of flagged cells
    let mut seen = vec![false; flagged.len()];
    let mut out: Vec<(f64, f64)> = Vec::new();
    for start in 0..flagged.len() {
        if !flagged[start] || seen[start] {
            continue;
        }
        let mut stack = vec![start];
        seen[start] = true;
        let (mut imin, mut imax) = (usize::MAX, 0usize);
        while let Some(k) = stack.pop() {
            let (i, j) = (k / grid.n_phi, k % grid.n_phi);
            imin = imin.min(i);
            imax = imax.max(i);
            let mut push = |ii: usize, jj: usize| {
                let kk = ii * grid.n_phi + jj;
                if flagged[kk] && !seen[kk] {
                    seen[kk] = true;
                    stack.push(kk);
                }
            };
            if i > 0 {
                push(i - 1, j);
            }
            if i + 1 < grid.n_r {
                push(i + 1, j);
            }
            if j > 0 {
                push(i, j - 1);
            }
            if j + 1 < grid.n_phi {
                push(i, j + 1);
            }
        }
        let lo = grid.r(imin.saturating_sub(1)).max(1.0);
        let hi = grid.r((imax + 1).min(grid.n_r - 1));
        if let Some(root) = bisect(|r| cfg.alpha(r) - cfg.beta(r), lo, hi, 1e-13) {
            if !out.iter().any(|(r0, _)| (r0 - root).abs() < 1e-9) {
                out.push((root, std::f64::consts::FRAC_PI_2));
            }
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(out)
}

pub(crate) fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> Option<f64> {
    let (mut flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Discrete check that sampled `Q0` is harmonic and satisfies the Robin condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicCheck {
    /// Max over interior nodes of `|Δ_h Q0|` (central differences, azimuthal terms included).
    pub interior: f64,
    /// Max over the `r = 1` row of `|(1/w)∂_ν Q0 − (Q_s − Q0)|` with a one-sided
    /// second-order normal derivative, or `|Q0 − Q_s|` for `w = ∞`.
    pub boundary: f64,
}

/// Evaluates the discrete Laplacian of `Q0` on a polar grid whose first row is `r = 1`.
pub fn verify_harmonic_robin(cfg: &QuadrupolarConfig, grid: &PolarGrid) -> Result<HarmonicCheck> {
    grid.check()?;
    if (grid.r_min - 1.0).abs() > 1e-14 {
        return Err(NematicError::domain(
            "harmonicity check needs the grid to start at r = 1",
        ));
    }
    verify_field(grid, |r, phi| cfg.axi(r, phi), cfg.w, cfg.s_star)
}

pub(crate) fn verify_field(
    grid: &PolarGrid,
    field: impl Fn(f64, f64) -> AxiTensor,
    w: f64,
    s_star: f64,
) -> Result<HarmonicCheck> {
    let (nr, np) = (grid.n_r, grid.n_phi);
    let (hr, hp) = (grid.hr(), grid.hphi());
    let x: Vec<[f64; 3]> = (0..nr)
        .flat_map(|i| (0..np).map(move |j| (i, j)))
        .map(|(i, j)| field(grid.r(i), grid.phi(j)).to_x())
        .collect();
    let at = |i: usize, j: usize| x[i * np + j];
    let mut interior: f64 = 0.0;
    for i in 1..nr - 1 {
        let r = grid.r(i);
        for j in 1..np - 1 {
            let phi = grid.phi(j);
            let (sp, cp) = phi.sin_cos();
            if sp <= 0.0 {
                continue;
            }
            let rho = r * sp;
            let mut sq = 0.0;
            for c in 0..3 {
                let u = at(i, j)[c];
                let urr = (at(i + 1, j)[c] - 2.0 * u + at(i - 1, j)[c]) / (hr * hr);
                let ur = (at(i + 1, j)[c] - at(i - 1, j)[c]) / (2.0 * hr);
                let upp = (at(i, j + 1)[c] - 2.0 * u + at(i, j - 1)[c]) / (hp * hp);
                let up = (at(i, j + 1)[c] - at(i, j - 1)[c]) / (2.0 * hp);
                let lap = urr + 2.0 * ur / r + (upp + cp / sp * up) / (r * r) - AZIMUTHAL_WEIGHT[c] * u / (rho * rho);
                sq += lap * lap;
            }
            interior = interior.max(sq.sqrt());
        }
    }
    let mut boundary: f64 = 0.0;
    for j in 0..np {
        let qs = AxiTensor::radial(grid.phi(j), s_star).to_x();
        let mut sq = 0.0;
        for c in 0..3 {
            let q0 = at(0, j)[c];
            let mismatch = if w.is_infinite() {
                q0 - qs[c]
            } else {
                let dr = (-3.0 * q0 + 4.0 * at(1, j)[c] - at(2, j)[c]) / (2.0 * hr);
                // exterior normal of the domain is −e_r on the particle surface
                -dr / w - (qs[c] - q0)
            };
            sq += mismatch * mismatch;
        }
        boundary = boundary.max(sq.sqrt());
    }
    Ok(HarmonicCheck { interior, boundary })
}
