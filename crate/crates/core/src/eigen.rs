//! Symmetric 3×3 eigen-decomposition.
//!
//! Eigenvalues come from the trigonometric (Cardano) solution of the
//! characteristic cubic. The eigenvector of the most isolated eigenvalue is
//! taken from a cross product of rows of `A - λI`; the remaining pair is
//! resolved by one exact Jacobi rotation inside the orthogonal complement, so
//! that nearly equal eigenvalues (the Saturn-ring regime) keep full accuracy.
//! A cyclic Jacobi sweep is the fallback when the spread of the spectrum is
//! negligible against its scale.

use crate::qtensor::Mat3;

/// Relative threshold below which two eigenvalues are treated as equal.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// Sorted (descending) eigenvalues and the matching orthonormal frame,
/// `vectors[k]` belonging to `values[k]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymEigen {
    pub values: [f64; 3],
    pub vectors: [[f64; 3]; 3],
}

pub(crate) fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm(a: &[f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

fn scale(a: &[f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn mat_vec(m: &Mat3, v: &[f64; 3]) -> [f64; 3] {
    [dot(&m[0], v), dot(&m[1], v), dot(&m[2], v)]
}

fn frobenius(m: &Mat3) -> f64 {
    m.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
}

fn det(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

const AXES: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

/// Flip `v` so that its largest-magnitude component (lowest index on ties) is positive.
fn canonical_sign(v: [f64; 3]) -> [f64; 3] {
    let mut k = 0;
    for i in 1..3 {
        if v[i].abs() > v[k].abs() * (1.0 + 1e-12) {
            k = i;
        }
    }
    if v[k] < 0.0 {
        scale(&v, -1.0)
    } else {
        v
    }
}

/// Gram–Schmidt of the canonical axes (in index order) against `against`,
/// returning the first `count` survivors.
fn complete_with_axes(against: &[[f64; 3]], count: usize) -> Vec<[f64; 3]> {
    let mut basis: Vec<[f64; 3]> = against.to_vec();
    let mut out = Vec::with_capacity(count);
    for e in AXES {
        if out.len() == count {
            break;
        }
        let mut w = e;
        for b in &basis {
            let p = dot(&w, b);
            w = [w[0] - p * b[0], w[1] - p * b[1], w[2] - p * b[2]];
        }
        let n = norm(&w);
        if n > 1e-6 {
            let w = scale(&w, 1.0 / n);
            basis.push(w);
            out.push(w);
        }
    }
    out
}

/// Eigenvector of a simple eigenvalue `lambda` via the best-conditioned row cross product.
fn null_vector(a: &Mat3, lambda: f64) -> Option<[f64; 3]> {
    let mut m = *a;
    for (i, row) in m.iter_mut().enumerate() {
        row[i] -= lambda;
    }
    let cands = [cross(&m[0], &m[1]), cross(&m[0], &m[2]), cross(&m[1], &m[2])];
    let best = cands
        .iter()
        .copied()
        .max_by(|x, y| norm(x).total_cmp(&norm(y)))
        .unwrap();
    let n = norm(&best);
    let s = frobenius(&m).max(f64::MIN_POSITIVE);
    if n <= 1e-300 || n < 1e-14 * s * s {
        None
    } else {
        Some(scale(&best, 1.0 / n))
    }
}

/// Cyclic Jacobi eigen-solver for symmetric 3×3 matrices.
pub fn jacobi(a: &Mat3) -> ([f64; 3], [[f64; 3]; 3]) {
    let mut m = *a;
    // columns of v are eigenvectors
    let mut v = AXES;
    for _sweep in 0..64 {
        let off = m[0][1] * m[0][1] + m[0][2] * m[0][2] + m[1][2] * m[1][2];
        if off <= 1e-34 * frobenius(&m).powi(2).max(f64::MIN_POSITIVE) {
            break;
        }
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            if m[p][q] == 0.0 {
                continue;
            }
            let theta = 0.5 * (2.0 * m[p][q]).atan2(m[q][q] - m[p][p]);
            let (s, c) = theta.sin_cos();
            // rotate rows/cols p, q
            for k in 0..3 {
                let mkp = m[k][p];
                let mkq = m[k][q];
                m[k][p] = c * mkp - s * mkq;
                m[k][q] = s * mkp + c * mkq;
            }
            for k in 0..3 {
                let mpk = m[p][k];
                let mqk = m[q][k];
                m[p][k] = c * mpk - s * mqk;
                m[q][k] = s * mpk + c * mqk;
            }
            for row in v.iter_mut() {
                let vp = row[p];
                let vq = row[q];
                row[p] = c * vp - s * vq;
                row[q] = s * vp + c * vq;
            }
        }
    }
    let vals = [m[0][0], m[1][1], m[2][2]];
    let vecs = [
        [v[0][0], v[1][0], v[2][0]],
        [v[0][1], v[1][1], v[2][1]],
        [v[0][2], v[1][2], v[2][2]],
    ];
    (vals, vecs)
}

/// Eigenvalues of a symmetric matrix from the trigonometric cubic solution, descending.
pub fn cardano_values(a: &Mat3) -> [f64; 3] {
    let q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
    let mut b = *a;
    for (i, row) in b.iter_mut().enumerate() {
        row[i] -= q;
    }
    let p = (frobenius(&b).powi(2) / 6.0).sqrt();
    if p == 0.0 {
        return [q; 3];
    }
    let mut bn = b;
    bn.iter_mut().flatten().for_each(|x| *x /= p);
    let r = (det(&bn) / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let l1 = q + 2.0 * p * phi.cos();
    let l3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    let l2 = 3.0 * q - l1 - l3;
    [l1, l2, l3]
}

/// Full decomposition with the deterministic conventions documented on the module.
pub fn sym_eigen(a: &Mat3) -> SymEigen {
    let fro = frobenius(a);
    if fro == 0.0 {
        return SymEigen {
            values: [0.0; 3],
            vectors: AXES,
        };
    }
    let q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
    let spread = {
        let mut b = *a;
        for (i, row) in b.iter_mut().enumerate() {
            row[i] -= q;
        }
        frobenius(&b)
    };
    if spread <= DEGENERACY_TOL * fro {
        return finish_jacobi(a, fro);
    }

    let lam = cardano_values(a);
    // the eigenvalue farthest from its neighbour is well separated (gap >= spread/2)
    let isolated = if lam[0] - lam[1] >= lam[1] - lam[2] { 0 } else { 2 };
    let Some(v) = null_vector(a, lam[isolated]) else {
        return finish_jacobi(a, fro);
    };
    let mu_iso = dot(&v, &mat_vec(a, &v));

    // orthonormal basis (e1, e2) of the complement of v
    let comp = complete_with_axes(&[v], 2);
    let (e1, e2) = (comp[0], comp[1]);
    let ae1 = mat_vec(a, &e1);
    let ae2 = mat_vec(a, &e2);
    let (h11, h12, h22) = (dot(&e1, &ae1), dot(&e1, &ae2), dot(&e2, &ae2));

    let mut pair: Vec<(f64, [f64; 3])>;
    let half_gap = (0.25 * (h11 - h22).powi(2) + h12 * h12).sqrt();
    if 2.0 * half_gap <= DEGENERACY_TOL * fro {
        let mean = 0.5 * (h11 + h22);
        let frame = complete_with_axes(&[v], 2);
        pair = frame.into_iter().map(|w| (mean, w)).collect();
    } else {
        let theta = 0.5 * (2.0 * h12).atan2(h11 - h22);
        let (s, c) = theta.sin_cos();
        let w1 = [c * e1[0] + s * e2[0], c * e1[1] + s * e2[1], c * e1[2] + s * e2[2]];
        let w2 = [-s * e1[0] + c * e2[0], -s * e1[1] + c * e2[1], -s * e1[2] + c * e2[2]];
        let mean = 0.5 * (h11 + h22);
        pair = vec![
            (mean + half_gap, canonical_sign(w1)),
            (mean - half_gap, canonical_sign(w2)),
        ];
    }
    let mut all = vec![(mu_iso, canonical_sign(v))];
    all.append(&mut pair);
    all.sort_by(|x, y| y.0.total_cmp(&x.0));
    SymEigen {
        values: [all[0].0, all[1].0, all[2].0],
        vectors: [all[0].1, all[1].1, all[2].1],
    }
}

fn finish_jacobi(a: &Mat3, fro: f64) -> SymEigen {
    let (vals, vecs) = jacobi(a);
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&i, &j| vals[j].total_cmp(&vals[i]));
    let values = [vals[idx[0]], vals[idx[1]], vals[idx[2]]];
    let tol = DEGENERACY_TOL * fro;
    let mut vectors = [vecs[idx[0]], vecs[idx[1]], vecs[idx[2]]];
    if values[0] - values[2] <= tol {
        vectors = AXES;
    } else if values[0] - values[1] <= tol {
        let fill = complete_with_axes(&[canonical_sign(vectors[2])], 2);
        vectors = [fill[0], fill[1], canonical_sign(vectors[2])];
    } else if values[1] - values[2] <= tol {
        let v0 = canonical_sign(vectors[0]);
        let fill = complete_with_axes(&[v0], 2);
        vectors = [v0, fill[0], fill[1]];
    } else {
        vectors = vectors.map(canonical_sign);
    }
    SymEigen { values, vectors }
}
