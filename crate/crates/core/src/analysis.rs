//! Decay profiles, small-particle convergence studies and eigenvalue exchange
//! along the equator.

use serde::{Deserialize, Serialize};

use crate::axi::AxiTensor;
use crate::error::{NematicError, Result};
use crate::grid::{ExteriorGrid, GridSpec};
use crate::ldg::{relax, AxiQField, SolveReport, StepSchedule};
use crate::qtensor::{biaxiality, dist_to_ustar, eigen_system, MaterialParams};
use crate::quadrupole::{bisect, q0_eval, QuadrupolarConfig, TruncatedQuadrupole};

/// Field value at `(r, j)`, linear in `s = 1/r` between rows.
fn sample_row(f: &AxiQField, g: &ExteriorGrid, r: f64, j: usize) -> Option<AxiTensor> {
    let (i, t) = g.locate(r)?;
    let (a, b) = (f.get(i, j).to_x(), f.get(i + 1, j).to_x());
    let mut x = [0.0; 3];
    for c in 0..3 {
        x[c] = (1.0 - t) * a[c] + t * b[c];
    }
    Some(AxiTensor::from_x(x))
}

fn diff_norm(a: &AxiTensor, b: &AxiTensor) -> f64 {
    let (x, y) = (a.to_x(), b.to_x());
    ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2) + (x[2] - y[2]).powi(2)).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayProfile {
    pub radii: Vec<f64>,
    /// `max_φ dist(Q, U*) · r / √L`.
    pub dist_scaled: Vec<f64>,
    /// `max_φ |Q − Q∞| · r`.
    pub tail_scaled: Vec<f64>,
}

impl DecayProfile {
    /// Largest value of `dist_scaled` with radius in `[r_lo, r_hi]`.
    pub fn max_dist_scaled(&self, r_lo: f64, r_hi: f64) -> f64 {
        self.radii
            .iter()
            .zip(&self.dist_scaled)
            .filter(|(r, _)| **r >= r_lo && **r <= r_hi)
            .map(|(_, v)| *v)
            .fold(0.0, f64::max)
    }
}

pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| {
            if k == 0 {
                lo
            } else if k == n - 1 {
                hi
            } else {
                (a + (b - a) * k as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// Profile over 20 log-spaced radii in `[2, R_out/2]`.
pub fn decay_profile(f: &AxiQField, p: &MaterialParams, g: &ExteriorGrid) -> Result<DecayProfile> {
    decay_profile_on(f, p, g, &log_spaced(2.0, 0.5 * g.r_out, 20))
}

pub fn decay_profile_on(f: &AxiQField, p: &MaterialParams, g: &ExteriorGrid, radii: &[f64]) -> Result<DecayProfile> {
    f.check_shape(g)?;
    if radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(NematicError::domain("decay radii must be strictly increasing"));
    }
    let qinf = AxiTensor::far_field(p.s_star);
    let mut dist_scaled = Vec::with_capacity(radii.len());
    let mut tail_scaled = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut dmax: f64 = 0.0;
        let mut tmax: f64 = 0.0;
        for j in 0..g.n_phi {
            let t =
                sample_row(f, g, r, j).ok_or_else(|| NematicError::domain(format!("radius {r} outside the grid")))?;
            dmax = dmax.max(dist_to_ustar(&t.to_qtensor(0.0), p));
            tmax = tmax.max(diff_norm(&t, &qinf));
        }
        dist_scaled.push(dmax * r / p.l.sqrt());
        tail_scaled.push(tmax * r);
    }
    Ok(DecayProfile {
        radii: radii.to_vec(),
        dist_scaled,
        tail_scaled,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub params: Vec<f64>,
    pub errors: Vec<f64>,
    /// Least-squares slope of `ln error` against `ln param`.
    pub slope: f64,
    /// Root-mean-square residual of the fit in log space.
    pub fit_residual: f64,
}

impl RateFit {
    /// Least-squares fit of `ln y = k ln x + c`; needs at least 3 positive samples.
    pub fn fit(params: &[f64], errors: &[f64]) -> Result<Self> {
        if params.len() < 3 || params.len() != errors.len() {
            return Err(NematicError::domain(format!(
                "rate fit needs at least 3 paired samples, got {} and {}",
                params.len(),
                errors.len()
            )));
        }
        if params.iter().chain(errors).any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(NematicError::domain("rate fit needs positive finite samples"));
        }
        let xs: Vec<f64> = params.iter().map(|v| v.ln()).collect();
        let ys: Vec<f64> = errors.iter().map(|v| v.ln()).collect();
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        if sxx == 0.0 {
            return Err(NematicError::domain("rate fit needs distinct parameters"));
        }
        let slope = sxy / sxx;
        let c = my - slope * mx;
        let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - slope * x - c).powi(2)).sum();
        Ok(Self {
            params: params.to_vec(),
            errors: errors.to_vec(),
            slope,
            fit_residual: (rss / n).sqrt(),
        })
    }

    /// `−slope`, the decay rate of the error in the parameter.
    pub fn rate(&self) -> f64 {
        -self.slope
    }
}

/// What the small-particle solutions are compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reference {
    /// `Q0` on the unbounded domain.
    #[default]
    ClosedForm,
    /// The harmonic `Q0`-type field with `Q∞` imposed at `R_out`.
    Truncated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub grid: GridSpec,
    pub schedule: StepSchedule,
    /// Errors are measured on `1 ≤ r ≤ shell_radius`.
    pub shell_radius: f64,
    pub reference: Reference,
    /// Worker cap; solves run in parallel up to this many at a time.
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRun {
    pub l: f64,
    pub error: f64,
    pub sup_norm: f64,
    pub report: SolveReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub w: f64,
    pub runs: Vec<StudyRun>,
    pub fit: RateFit,
}

/// Solves at every `L` with `W = w·L` from the `Q0` warm start and fits the
/// sup-error on the inner shell against `L`.
pub fn convergence_study(ls: &[f64], w: f64, cfg: &StudyConfig) -> Result<ConvergenceStudy> {
    if ls.len() < 3 {
        return Err(NematicError::domain(format!(
            "convergence study needs at least 3 values of L, got {}",
            ls.len()
        )));
    }
    let runs = solve_sweep(ls, w, cfg)?;
    let errors: Vec<f64> = runs.iter().map(|r| r.error).collect();
    let fit = RateFit::fit(ls, &errors)?;
    Ok(ConvergenceStudy { w, runs, fit })
}

/// Solves for each `L` (in parallel batches of `cfg.threads`), returning the
/// fields alongside the runs.
pub fn solve_sweep_fields(ls: &[f64], w: f64, cfg: &StudyConfig) -> Result<Vec<(StudyRun, AxiQField)>> {
    let g = ExteriorGrid::from_spec(&cfg.grid)?;
    let qcfg = QuadrupolarConfig::new(w, MaterialParams::new(cfg.a, cfg.b, cfg.c, 1.0, 0.0)?.s_star)?;
    let reference: AxiQField = match cfg.reference {
        Reference::ClosedForm => AxiQField::quadrupolar(&g, &qcfg),
        Reference::Truncated => {
            let t = TruncatedQuadrupole::new(qcfg, g.r_out)?;
            AxiQField::from_fn(&g, |i, j| t.axi_sc(g.r[i], g.sin_phi[j], g.cos_phi[j]))
        }
    };
    let solve_one = |l: f64| -> Result<(StudyRun, AxiQField)> {
        let wl = if w.is_infinite() { f64::INFINITY } else { w * l };
        let p = MaterialParams::new(cfg.a, cfg.b, cfg.c, l, wl)?;
        let f0 = AxiQField::warm_start(&g, &p)?;
        let (field, report) = relax(&f0, &p, &g, &cfg.schedule)?;
        if !report.converged {
            return Err(NematicError::NotConverged {
                iterations: report.iterations,
                residual: report.residual,
                tol: cfg.schedule.tol,
            });
        }
        let mut error: f64 = 0.0;
        for i in 0..g.n_s {
            if g.r[i] > cfg.shell_radius {
                continue;
            }
            for j in 0..g.n_phi {
                error = error.max(diff_norm(&field.get(i, j), &reference.get(i, j)));
            }
        }
        let run = StudyRun {
            l,
            error,
            sup_norm: field.sup_norm(),
            report,
        };
        Ok((run, field))
    };
    let threads = cfg.threads.max(1);
    let mut out = Vec::with_capacity(ls.len());
    for chunk in ls.chunks(threads) {
        let results: Vec<Result<(StudyRun, AxiQField)>> = std::thread::scope(|scope| {
            let handles: Vec<_> = chunk.iter().map(|&l| scope.spawn(move || solve_one(l))).collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("solver thread panicked"))
                .collect()
        });
        for r in results {
            out.push(r?);
        }
    }
    Ok(out)
}

fn solve_sweep(ls: &[f64], w: f64, cfg: &StudyConfig) -> Result<Vec<StudyRun>> {
    Ok(solve_sweep_fields(ls, w, cfg)?.into_iter().map(|(r, _)| r).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExchangeRow {
    pub r: f64,
    pub lambda: [f64; 3],
    pub biaxiality: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExchangeProfile {
    pub rows: Vec<ExchangeRow>,
    /// Radius where the two leading eigenvalues exchange, if any.
    pub crossing: Option<f64>,
    /// Smallest sampled `λ1 − λ2`.
    pub min_gap: f64,
}

/// Source of the equatorial tensor values.
pub enum ExchangeSource<'a> {
    ClosedForm(QuadrupolarConfig),
    Field(&'a AxiQField, &'a ExteriorGrid),
}

impl ExchangeSource<'_> {
    fn at(&self, r: f64) -> Result<AxiTensor> {
        match self {
            ExchangeSource::ClosedForm(cfg) => Ok(cfg.axi_sc(r, 1.0, 0.0)),
            ExchangeSource::Field(f, g) => {
                let np = g.n_phi;
                let lo = g.equator_lower();
                let a = sample_row(f, g, r, lo)
                    .ok_or_else(|| NematicError::domain(format!("radius {r} outside the grid")))?;
                if np % 2 == 1 {
                    return Ok(a);
                }
                let b = sample_row(f, g, r, np - 1 - lo).expect("same row");
                Ok(AxiTensor::new(
                    0.5 * (a.rr + b.rr),
                    0.5 * (a.tt + b.tt),
                    0.5 * (a.rz + b.rz),
                ))
            }
        }
    }
}

/// Eigenvalues and biaxiality on the equator at each radius of `ray`.
///
/// On the equator `e_ρ`, `e_θ`, `e_z` are (up to the small `m_ρz`) the eigenvectors;
/// the exchange is located as a sign change of `m_ρρ − m_zz` while both exceed
/// `m_θθ`, refined by bisection.
pub fn eigenvalue_exchange_profile(src: &ExchangeSource, ray: &[f64]) -> Result<ExchangeProfile> {
    if ray.iter().any(|&r| !(r >= 1.0)) {
        return Err(NematicError::domain("exchange ray must lie off the particle"));
    }
    let mut rows = Vec::with_capacity(ray.len());
    let mut min_gap = f64::INFINITY;
    for &r in ray {
        let t = src.at(r)?;
        let q = t.to_qtensor(0.0);
        let es = eigen_system(&q);
        let gap = es.lambda[0] - es.lambda[1];
        min_gap = min_gap.min(gap);
        rows.push(ExchangeRow {
            r,
            lambda: es.lambda,
            biaxiality: biaxiality(&q).unwrap_or(0.0),
        });
    }
    let branch = |r: f64| -> f64 {
        let t = src.at(r).expect("radius validated");
        t.rr - t.zz()
    };
    let leading = |r: f64| -> bool {
        let t = src.at(r).expect("radius validated");
        t.rr.min(t.zz()) >= t.tt
    };
    let mut crossing = None;
    for w in ray.windows(2) {
        let (fa, fb) = (branch(w[0]), branch(w[1]));
        if fa * fb <= 0.0 && fa != fb {
            let root = bisect(branch, w[0], w[1], 1e-13).unwrap_or(0.5 * (w[0] + w[1]));
            if leading(root) {
                crossing = Some(root);
                break;
            }
        }
    }
    Ok(ExchangeProfile {
        rows,
        crossing,
        min_gap,
    })
}

/// `sup |Q0(x) − Q∞| · r` over `r` in `radii` and the polar samples.
pub fn closed_form_tail(cfg: &QuadrupolarConfig, radii: &[f64], n_phi: usize) -> Result<Vec<f64>> {
    let qinf = AxiTensor::far_field(cfg.s_star).to_qtensor(0.0);
    let mut out = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut m: f64 = 0.0;
        for j in 0..n_phi {
            let phi = std::f64::consts::PI * j as f64 / (n_phi - 1) as f64;
            let q = q0_eval([r * phi.sin(), 0.0, r * phi.cos()], cfg)?;
            m = m.max(q.sub(&qinf).norm());
        }
        out.push(m * r);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrupole::ring_radius;

    #[test]
    fn fit_recovers_power_law() {
        let ls = [25.0, 100.0, 400.0];
        let errs: Vec<f64> = ls.iter().map(|l: &f64| 3.0 * l.powf(-0.5)).collect();
        let fit = RateFit::fit(&ls, &errs).unwrap();
        assert!((fit.rate() - 0.5).abs() < 1e-12);
        assert!(fit.fit_residual < 1e-12);
        assert!(RateFit::fit(&ls[..1], &errs[..1]).is_err());
    }

    #[test]
    fn closed_form_exchange_hits_ring() {
        let cfg = QuadrupolarConfig::new(f64::INFINITY, 1.0).unwrap();
        let ray = log_spaced(1.01, 5.0, 40);
        let prof = eigenvalue_exchange_profile(&ExchangeSource::ClosedForm(cfg), &ray).unwrap();
        let rw = ring_radius(f64::INFINITY).unwrap().radius.unwrap();
        assert!((prof.crossing.unwrap() - rw).abs() < 1e-6);
        for row in &prof.rows {
            assert!((row.lambda[2] + row.lambda[0] + row.lambda[1]).abs() < 1e-12);
        }
        let cfg1 = QuadrupolarConfig::new(1.0, 1.0).unwrap();
        let prof = eigenvalue_exchange_profile(&ExchangeSource::ClosedForm(cfg1), &ray).unwrap();
        assert!(prof.crossing.is_none());
        assert!(prof.min_gap > 0.0);
    }
}
