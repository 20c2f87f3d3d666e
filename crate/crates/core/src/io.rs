//! CSV emitters and readers. Every float is written with 17 significant digits,
//! columns in fixed order, LF line endings.

use std::fmt::Write as _;
use std::path::Path;

use crate::axi::AxiTensor;
use crate::error::{NematicError, Result};
use crate::grid::ExteriorGrid;
use crate::harmonic::PsiField;
use crate::ldg::AxiQField;
use crate::qtensor::{biaxiality, eigen_system};
use crate::quadrupole::{QuadrupolarConfig, RingResult};

/// `{:.16e}`, with `inf`, `-inf` and `nan` spelled out.
pub fn fmt17(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:.16e}")
    }
}

pub fn csv<I, R>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: AsRef<[String]>,
{
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.as_ref().join(","));
        out.push('\n');
    }
    out
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| NematicError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| NematicError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub const RING_HEADER: [&str; 4] = ["w", "exists", "r_w", "residual"];

pub fn ring_row(w: f64, res: &RingResult) -> Vec<String> {
    vec![
        fmt17(w),
        res.exists.to_string(),
        res.radius.map(fmt17).unwrap_or_default(),
        fmt17(res.residual),
    ]
}

pub const FIELD_HEADER: [&str; 5] = ["r", "phi", "m_rr", "m_tt", "m_rz"];

/// Field snapshot, one row per node in grid order.
pub fn axi_field_csv(f: &AxiQField, g: &ExteriorGrid) -> Result<String> {
    f.check_shape(g)?;
    let mut rows = Vec::with_capacity(g.len());
    for i in 0..g.n_s {
        for j in 0..g.n_phi {
            let t = f.get(i, j);
            rows.push(vec![
                fmt17(g.r[i]),
                fmt17(g.phi[j]),
                fmt17(t.rr),
                fmt17(t.tt),
                fmt17(t.rz),
            ]);
        }
    }
    Ok(csv(&FIELD_HEADER, rows))
}

/// Restores a snapshot written by [`axi_field_csv`] on the same grid.
pub fn parse_axi_field_csv(text: &str, g: &ExteriorGrid) -> Result<AxiQField> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if header != FIELD_HEADER.join(",") {
        return Err(NematicError::domain(format!("unexpected snapshot header `{header}`")));
    }
    let mut nodes = Vec::with_capacity(g.len());
    for (k, line) in lines.enumerate() {
        let vals: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| NematicError::domain(format!("snapshot row {}: {e}", k + 1)))?;
        if vals.len() != 5 {
            return Err(NematicError::domain(format!(
                "snapshot row {} has {} columns",
                k + 1,
                vals.len()
            )));
        }
        if k >= g.len() {
            return Err(NematicError::ShapeMismatch {
                expected: format!("{} rows", g.len()),
                got: format!("more than {}", g.len()),
            });
        }
        let (i, j) = (k / g.n_phi, k % g.n_phi);
        if (vals[0] - g.r[i]).abs() > 1e-12 * g.r[i] || (vals[1] - g.phi[j]).abs() > 1e-12 {
            return Err(NematicError::domain(format!(
                "snapshot row {} does not match the grid node",
                k + 1
            )));
        }
        nodes.push(AxiTensor::new(vals[2], vals[3], vals[4]));
    }
    if nodes.len() != g.len() {
        return Err(NematicError::ShapeMismatch {
            expected: format!("{} rows", g.len()),
            got: format!("{} rows", nodes.len()),
        });
    }
    Ok(AxiQField {
        n_s: g.n_s,
        n_phi: g.n_phi,
        nodes,
    })
}

pub const Q0_HEADER: [&str; 11] = [
    "r",
    "phi",
    "rho",
    "z",
    "m_rr",
    "m_tt",
    "m_rz",
    "lambda1",
    "lambda2",
    "lambda3",
    "biaxiality",
];

/// `Q0` components, eigenvalues and biaxiality at every node.
pub fn q0_field_csv(cfg: &QuadrupolarConfig, g: &ExteriorGrid) -> String {
    let mut rows = Vec::with_capacity(g.len());
    for i in 0..g.n_s {
        for j in 0..g.n_phi {
            let t = cfg.axi_sc(g.r[i], g.sin_phi[j], g.cos_phi[j]);
            let q = t.to_qtensor(0.0);
            let l = eigen_system(&q).lambda;
            let (rho, z) = g.rho_z(i, j);
            rows.push(vec![
                fmt17(g.r[i]),
                fmt17(g.phi[j]),
                fmt17(rho),
                fmt17(z),
                fmt17(t.rr),
                fmt17(t.tt),
                fmt17(t.rz),
                fmt17(l[0]),
                fmt17(l[1]),
                fmt17(l[2]),
                fmt17(biaxiality(&q).unwrap_or(0.0)),
            ]);
        }
    }
    csv(&Q0_HEADER, rows)
}

pub const PSI_HEADER: [&str; 3] = ["rho", "z", "psi"];

pub fn psi_field_csv(f: &PsiField, g: &ExteriorGrid) -> Result<String> {
    f.check_shape(g)?;
    let mut out = String::with_capacity(g.len() * 72);
    out.push_str(&PSI_HEADER.join(","));
    out.push('\n');
    for i in 0..g.n_s {
        for j in 0..g.n_phi {
            let (rho, z) = g.rho_z(i, j);
            let _ = writeln!(out, "{},{},{}", fmt17(rho), fmt17(z), fmt17(f.get(i, j)));
        }
    }
    Ok(out)
}

pub const BRANCH_HEADER: [&str; 5] = ["r", "lambda1", "lambda2", "lambda3", "biaxiality"];

pub fn branch_row(r: f64, lambda: [f64; 3], beta: f64) -> Vec<String> {
    vec![
        fmt17(r),
        fmt17(lambda[0]),
        fmt17(lambda[1]),
        fmt17(lambda[2]),
        fmt17(beta),
    ]
}
