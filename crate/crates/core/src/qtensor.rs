//! Algebra on the space of symmetric traceless 3×3 tensors.
//!
//! A [`QTensor`] is stored as its five coordinates in the orthonormal basis
//!
//! ```text
//! A1 = √(3/2) (e_z⊗e_z − I/3)      A2 = (e_x⊗e_x − e_y⊗e_y)/√2
//! A3 = (e_x⊗e_y + e_y⊗e_x)/√2      A4 = (e_x⊗e_z + e_z⊗e_x)/√2
//! A5 = (e_y⊗e_z + e_z⊗e_y)/√2
//! ```
//!
//! so the Frobenius norm of the tensor is the Euclidean norm of the coordinates.

use serde::{Deserialize, Serialize};

use crate::eigen::{self, sym_eigen};
use crate::error::{NematicError, Result};

pub type Mat3 = [[f64; 3]; 3];

const SQRT2: f64 = std::f64::consts::SQRT_2;
const SQRT6: f64 = 2.449_489_742_783_178;

/// Positive uniaxial order parameter of the vacuum manifold, `(b + √(b² + 24ac)) / 4c`.
pub fn s_star(a: f64, b: f64, c: f64) -> Result<f64> {
    if !(a >= 0.0 && b > 0.0 && c > 0.0) || !(a.is_finite() && b.is_finite() && c.is_finite()) {
        return Err(NematicError::domain(format!(
            "bulk constants need a >= 0, b > 0, c > 0 (got a={a}, b={b}, c={c})"
        )));
    }
    Ok((b + (b * b + 24.0 * a * c).sqrt()) / (4.0 * c))
}

/// Material constants of the quartic bulk potential plus the elastic and anchoring constants
/// (lengths scaled by the particle radius).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Elastic constant `L`.
    pub l: f64,
    /// Anchoring strength; `f64::INFINITY` is strong (Dirichlet) anchoring, `0` no anchoring.
    pub w: f64,
    pub s_star: f64,
    /// Additive constant making the minimum of the bulk potential zero.
    pub c0: f64,
}

impl MaterialParams {
    pub fn new(a: f64, b: f64, c: f64, l: f64, w: f64) -> Result<Self> {
        let s = s_star(a, b, c)?;
        if !(l > 0.0 && l.is_finite()) {
            return Err(NematicError::domain(format!("elastic constant L must be > 0, got {l}")));
        }
        if !(w >= 0.0) {
            return Err(NematicError::domain(format!("anchoring W must be >= 0, got {w}")));
        }
        let t2 = 2.0 * s * s / 3.0;
        let t3 = 2.0 * s * s * s / 9.0;
        let c0 = -(-0.5 * a * t2 - b / 3.0 * t3 + 0.25 * c * t2 * t2);
        Ok(Self {
            a,
            b,
            c,
            l,
            w,
            s_star: s,
            c0,
        })
    }

    pub fn strong_anchoring(&self) -> bool {
        self.w.is_infinite()
    }

    /// Anchoring ratio `W/L`.
    pub fn anchoring_ratio(&self) -> f64 {
        self.w / self.l
    }

    /// Same bulk constants with a different elastic constant and anchoring.
    pub fn with_regime(&self, l: f64, w: f64) -> Result<Self> {
        Self::new(self.a, self.b, self.c, l, w)
    }

    /// `Q∞ = s*(e_z⊗e_z − I/3)`.
    pub fn q_infinity(&self) -> QTensor {
        QTensor::from_director_unchecked([0.0, 0.0, 1.0], self.s_star)
    }
}

/// Symmetric traceless tensor in the `A1..A5` coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct QTensor {
    pub u: [f64; 5],
}

/// Eigenvalues (descending) and orthonormal eigenframe of a [`QTensor`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenSystem {
    pub lambda: [f64; 3],
    pub frame: [[f64; 3]; 3],
}

impl QTensor {
    pub const ZERO: QTensor = QTensor { u: [0.0; 5] };

    pub fn new(u: [f64; 5]) -> Self {
        Self { u }
    }

    pub fn to_matrix(&self) -> Mat3 {
        let [u1, u2, u3, u4, u5] = self.u;
        let xx = -u1 / SQRT6 + u2 / SQRT2;
        let yy = -u1 / SQRT6 - u2 / SQRT2;
        let zz = 2.0 * u1 / SQRT6;
        let xy = u3 / SQRT2;
        let xz = u4 / SQRT2;
        let yz = u5 / SQRT2;
        [[xx, xy, xz], [xy, yy, yz], [xz, yz, zz]]
    }

    /// Orthogonal projection of an arbitrary 3×3 matrix onto the symmetric traceless space.
    pub fn from_matrix(m: &Mat3) -> Self {
        let tr = m[0][0] + m[1][1] + m[2][2];
        Self {
            u: [
                (1.5f64).sqrt() * (m[2][2] - tr / 3.0),
                (m[0][0] - m[1][1]) / SQRT2,
                (m[0][1] + m[1][0]) / SQRT2,
                (m[0][2] + m[2][0]) / SQRT2,
                (m[1][2] + m[2][1]) / SQRT2,
            ],
        }
    }

    /// `s(n⊗n − I/3)` for a unit vector `n`.
    pub fn from_director(n: [f64; 3], s: f64) -> Result<Self> {
        let len = eigen::norm(&n);
        if (len - 1.0).abs() > 1e-10 {
            return Err(NematicError::domain(format!(
                "director must be a unit vector (|n| = {len})"
            )));
        }
        Ok(Self::from_director_unchecked(n, s))
    }

    pub(crate) fn from_director_unchecked(n: [f64; 3], s: f64) -> Self {
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = s * (n[i] * n[j] - if i == j { 1.0 / 3.0 } else { 0.0 });
            }
        }
        Self::from_matrix(&m)
    }

    pub fn norm_sq(&self) -> f64 {
        self.u.iter().map(|x| x * x).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dot(&self, other: &QTensor) -> f64 {
        self.u.iter().zip(&other.u).map(|(a, b)| a * b).sum()
    }

    /// `tr(Q³)`.
    pub fn trace_cube(&self) -> f64 {
        let m = self.to_matrix();
        let mut t = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    t += m[i][j] * m[j][k] * m[k][i];
                }
            }
        }
        t
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            u: self.u.map(|x| x * s),
        }
    }

    pub fn add(&self, o: &QTensor) -> Self {
        let mut u = self.u;
        for (a, b) in u.iter_mut().zip(&o.u) {
            *a += b;
        }
        Self { u }
    }

    pub fn sub(&self, o: &QTensor) -> Self {
        self.add(&o.scaled(-1.0))
    }

    /// `Rᵀ Q R` for a rotation matrix `R`.
    pub fn rotated(&self, r: &Mat3) -> Self {
        let q = self.to_matrix();
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = 0.0;
                for k in 0..3 {
                    for l in 0..3 {
                        acc += r[k][i] * q[k][l] * r[l][j];
                    }
                }
                out[i][j] = acc;
            }
        }
        Self::from_matrix(&out)
    }
}

fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

/// `f(Q) = −a/2 tr(Q²) − b/3 tr(Q³) + c/4 tr(Q²)² + C0`.
pub fn bulk_potential(q: &QTensor, p: &MaterialParams) -> f64 {
    let t2 = q.norm_sq();
    let t3 = q.trace_cube();
    -0.5 * p.a * t2 - p.b / 3.0 * t3 + 0.25 * p.c * t2 * t2 + p.c0
}

/// `∇f(Q) = −aQ − b(Q² − |Q|²I/3) + c|Q|²Q`, an element of S0.
pub fn bulk_gradient(q: &QTensor, p: &MaterialParams) -> QTensor {
    let m = q.to_matrix();
    let m2 = mat_mul(&m, &m);
    let t2 = q.norm_sq();
    let mut g = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let id = if i == j { 1.0 } else { 0.0 };
            g[i][j] = -p.a * m[i][j] - p.b * (m2[i][j] - t2 * id / 3.0) + p.c * t2 * m[i][j];
        }
    }
    QTensor::from_matrix(&g)
}

/// Second derivative of the bulk potential applied to a direction `d`.
pub fn bulk_hessian_apply(q: &QTensor, d: &QTensor, p: &MaterialParams) -> QTensor {
    let m = q.to_matrix();
    let dm = d.to_matrix();
    let qd = mat_mul(&m, &dm);
    let dq = mat_mul(&dm, &m);
    let t2 = q.norm_sq();
    let qdot = q.dot(d);
    let mut h = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let id = if i == j { 1.0 } else { 0.0 };
            h[i][j] = -p.a * dm[i][j] - p.b * (qd[i][j] + dq[i][j] - 2.0 / 3.0 * qdot * id)
                + p.c * (t2 * dm[i][j] + 2.0 * qdot * m[i][j]);
        }
    }
    QTensor::from_matrix(&h)
}

pub fn eigen_system(q: &QTensor) -> EigenSystem {
    let e = sym_eigen(&q.to_matrix());
    EigenSystem {
        lambda: e.values,
        frame: e.vectors,
    }
}

/// Biaxiality parameter `1 − 6 tr(Q³)² / |Q|⁶`, or `None` when `|Q| < 1e-14`.
pub fn biaxiality(q: &QTensor) -> Option<f64> {
    let n2 = q.norm_sq();
    if n2.sqrt() < 1e-14 {
        return None;
    }
    let t3 = q.trace_cube();
    Some((1.0 - 6.0 * t3 * t3 / (n2 * n2 * n2)).clamp(0.0, 1.0))
}

/// Frobenius distance to the vacuum manifold, measured to `s*(v1⊗v1 − I/3)` with `v1`
/// the leading eigenvector. If the leading eigenvalue is double, every leading direction
/// gives the same value.
pub fn dist_to_ustar(q: &QTensor, p: &MaterialParams) -> f64 {
    let e = eigen_system(q);
    let proj = QTensor::from_director_unchecked(e.frame[0], p.s_star);
    q.sub(&proj).norm()
}
