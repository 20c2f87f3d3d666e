use nematic_core::analysis::{
    convergence_study, decay_profile_on, eigenvalue_exchange_profile, log_spaced, ExchangeSource, StudyConfig,
};
use nematic_core::harmonic::{degree, detect_defects, psi_multistart, Defect};
use nematic_core::io::{self, fmt17};
use nematic_core::ldg::{self, bulk_bound, energy_breakdown, relax, robin_residual, sup_bound_check};
use nematic_core::quadrupole::{ring_radius, QuadrupolarConfig};
use nematic_core::{AxiQField, ExteriorGrid, MaterialParams, NematicError, PsiField, SolveReport};
use serde_json::{json, Value};

use crate::config::{threads, ExchangeKind, LdgInit, RunConfig};
use crate::output::{num, nums, opt, Report, Sink};
use crate::CliError;

/// Ring table rows for raw `w` tokens. Unparsable or non-positive values give
/// an error row; the second value reports whether any row failed.
pub fn ring_table(tokens: &[String]) -> (String, Vec<Value>, bool) {
    let mut rows = Vec::with_capacity(tokens.len());
    let mut json_rows = Vec::with_capacity(tokens.len());
    let mut failed = false;
    for tok in tokens {
        let parsed = tok.trim().parse::<f64>().ok().filter(|w| *w > 0.0);
        match parsed.map(|w| (w, ring_radius(w))) {
            Some((w, Ok(res))) => {
                rows.push(io::ring_row(w, &res));
                json_rows.push(json!({
                    "w": num(w),
                    "exists": res.exists,
                    "r_w": opt(res.radius),
                    "residual": num(res.residual),
                    "boundary": res.boundary,
                }));
            }
            _ => {
                failed = true;
                rows.push(vec![
                    tok.trim().to_string(),
                    "error".into(),
                    String::new(),
                    String::new(),
                ]);
                json_rows.push(json!({ "w": tok.trim(), "error": "w must be a number > 0" }));
            }
        }
    }
    (io::csv(&io::RING_HEADER, rows), json_rows, failed)
}

pub fn ring(cfg: &RunConfig, tokens: Vec<String>, sink: Option<&Sink>) -> Result<(), CliError> {
    let tokens = if tokens.is_empty() {
        cfg.ring.w_values.iter().map(|w| fmt17(*w)).collect()
    } else {
        tokens
    };
    if tokens.is_empty() {
        return Err(CliError::Usage("ring needs at least one value of w".into()));
    }
    let (table, json_rows, failed) = ring_table(&tokens);
    match sink {
        Some(sink) => {
            sink.csv("ring.csv", &table)?;
            let mut rep = Report::start("ring", cfg);
            rep.set_data(json!({ "rows": json_rows }));
            sink.json("ring.json", &rep)?;
        }
        None => print!("{table}"),
    }
    if failed {
        return Err(CliError::Usage(
            "some values of w were invalid (rows marked `error`)".into(),
        ));
    }
    Ok(())
}

pub fn q0_field(cfg: &RunConfig, sink: &Sink) -> Result<(), CliError> {
    let p = cfg.params()?;
    let g = cfg.exterior_grid()?;
    let w = cfg.regime.ratio()?;
    let qcfg = QuadrupolarConfig::new(w, p.s_star).map_err(config)?;
    let mut rep = Report::start("q0-field", cfg);
    sink.csv("q0_field.csv", &io::q0_field_csv(&qcfg, &g))?;
    let ring = ring_radius(w).map_err(config)?;
    rep.set_data(json!({
        "w": num(w),
        "s_star": num(p.s_star),
        "rows": g.len(),
        "ring": { "exists": ring.exists, "r_w": opt(ring.radius), "boundary": ring.boundary },
    }));
    sink.json("q0_report.json", &rep)
}

fn initial_field(cfg: &RunConfig, p: &MaterialParams, g: &ExteriorGrid) -> Result<AxiQField, CliError> {
    if let Some(path) = &cfg.solver.restart {
        let text = io::read_file(path)?;
        return io::parse_axi_field_csv(&text, g).map_err(|e| CliError::Config(format!("{}: {e}", path.display())));
    }
    Ok(match cfg.solver.ldg_init {
        LdgInit::WarmStart => AxiQField::warm_start(g, p).map_err(config)?,
        LdgInit::FarField => AxiQField::far_field(g, p),
        LdgInit::Quadrupolar => {
            let qcfg = QuadrupolarConfig::new(cfg.regime.ratio()?, p.s_star).map_err(config)?;
            AxiQField::quadrupolar(g, &qcfg)
        }
    })
}

fn report_json(r: &SolveReport) -> Value {
    json!({
        "iterations": r.iterations,
        "final_energy": num(r.final_energy),
        "energies": nums(&r.energies),
        "residual": num(r.residual),
        "sup_norm": num(r.sup_norm),
        "converged": r.converged,
    })
}

fn not_converged(r: &SolveReport, tol: f64) -> CliError {
    CliError::NotConverged(format!(
        "not converged after {} iterations (residual {:e} > tol {:e})",
        r.iterations, r.residual, tol
    ))
}

pub fn ldg_solve(cfg: &RunConfig, sink: &Sink) -> Result<(), CliError> {
    let p = cfg.params()?;
    let g = cfg.exterior_grid()?;
    let f0 = initial_field(cfg, &p, &g)?;
    let mut rep = Report::start("ldg-solve", cfg);
    let (field, report) = relax(&f0, &p, &g, &cfg.solver.schedule()).map_err(compute)?;
    log::info!(
        "relax: {} iterations, residual {:e}, energy {}",
        report.iterations,
        report.residual,
        report.final_energy
    );
    sink.csv("ldg_field.csv", &io::axi_field_csv(&field, &g)?)?;
    let b = energy_breakdown(&field, &p, &g)?;
    let bound = bulk_bound(&p);
    let (sup, within) = sup_bound_check(&field, &p);
    rep.set_data(json!({
        "report": report_json(&report),
        "energy": { "elastic": num(b.elastic), "bulk": num(b.bulk), "surface": num(b.surface), "total": num(b.total) },
        "interior_residual": num(ldg::residual(&field, &p, &g)?),
        "robin_residual": num(robin_residual(&field, &p, &g)?),
        "sup_bound": { "sup_norm": num(sup), "bound": num(bound.bound), "q_tilde": num(bound.q_tilde), "within": within },
    }));
    sink.json("ldg_report.json", &rep)?;
    if !report.converged || !(report.residual <= cfg.solver.tol) {
        return Err(not_converged(&report, cfg.solver.tol));
    }
    Ok(())
}

/// Eight sample radii: quartiles of the band between the particle and the
/// nearest defect, then multiples of its distance; log-spaced without defects.
pub fn degree_radii(defects: &[Defect], r_out: f64) -> Vec<f64> {
    let nearest = defects.iter().map(|d| d.z0.abs()).fold(f64::INFINITY, f64::min);
    if nearest.is_finite() && nearest > 1.0 {
        let mut v: Vec<f64> = [0.25, 0.5, 0.75].iter().map(|t| 1.0 + t * (nearest - 1.0)).collect();
        let cap = 0.9 * r_out;
        for k in [1.25, 1.5, 2.0, 4.0, 8.0] {
            v.push((k * nearest).min(cap));
        }
        v.dedup();
        v
    } else {
        log_spaced(1.1, 0.5 * r_out, 8)
    }
}

pub fn harmonic_solve(cfg: &RunConfig, sink: &Sink) -> Result<(), CliError> {
    let g = cfg.exterior_grid()?;
    let mut rep = Report::start("harmonic-solve", cfg);
    let menu = cfg.solver.psi_init.menu();
    let ms = psi_multistart(&g, cfg.solver.far, &menu, &cfg.solver.schedule()).map_err(compute)?;
    for s in &ms.starts {
        log::info!(
            "start {:?}: energy {} ({} iterations, converged {})",
            s.init,
            s.energy,
            s.iterations,
            s.converged
        );
    }
    let field: &PsiField = &ms.field;
    let census = detect_defects(field, &g)?;
    let samples: Vec<Value> = degree_radii(&census.defects, g.r_out)
        .into_iter()
        .map(|r| json!({ "r": num(r), "value": degree(field, &g, r).ok().map(num).unwrap_or(Value::Null) }))
        .collect();
    sink.csv("psi_field.csv", &io::psi_field_csv(field, &g)?)?;
    rep.set_data(json!({
        "defects": census.defects.iter().map(|d| json!({ "z0": num(d.z0), "jump": d.jump })).collect::<Vec<_>>(),
        "unresolved": nums(&census.unresolved),
        "energy": num(ms.report.final_energy),
        "degreeSamples": samples,
        "far": cfg.solver.far,
        "starts": ms.starts.iter().map(|s| json!({
            "init": s.init,
            "energy": num(s.energy),
            "converged": s.converged,
            "iterations": s.iterations,
        })).collect::<Vec<_>>(),
        "report": report_json(&ms.report),
    }));
    sink.json("census.json", &rep)?;
    if !ms.report.converged {
        return Err(not_converged(&ms.report, cfg.solver.tol));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum StudyKind {
    Decay,
    Rate,
    Exchange,
}

pub fn study(kind: StudyKind, cfg: &RunConfig, sink: &Sink) -> Result<(), CliError> {
    match kind {
        StudyKind::Rate => study_rate(cfg, sink),
        StudyKind::Decay => study_decay(cfg, sink),
        StudyKind::Exchange => study_exchange(cfg, sink),
    }
}

fn solve_at_config(
    cfg: &RunConfig,
    p: &MaterialParams,
    g: &ExteriorGrid,
) -> Result<(AxiQField, SolveReport), CliError> {
    let f0 = initial_field(cfg, p, g)?;
    let (field, report) = relax(&f0, p, g, &cfg.solver.schedule()).map_err(compute)?;
    if !report.converged {
        return Err(not_converged(&report, cfg.solver.tol));
    }
    Ok((field, report))
}

fn study_rate(cfg: &RunConfig, sink: &Sink) -> Result<(), CliError> {
    let w = cfg.regime.ratio()?;
    let m = cfg.material;
    let scfg = StudyConfig {
        a: m.a,
        b: m.b,
        c: m.c,
        grid: cfg.grid,
        schedule: cfg.solver.schedule(),
        shell_radius: cfg.study.shell_radius,
        reference: cfg.study.reference,
        threads: threads()?,
    };
    if cfg.study.l_values.len() < 3 {
        return Err(CliError::Config("the rate study needs at least 3 values of L".into()));
    }
    let mut rep = Report::start("study rate", cfg);
    let st = convergence_study(&cfg.study.l_values, w, &scfg).map_err(compute)?;
    let rows = st
        .runs
        .iter()
        .map(|r| vec![fmt17(r.l), fmt17(r.error), fmt17(r.sup_norm)]);
    sink.csv("rate.csv", &io::csv(&["L", "error", "sup_norm"], rows))?;
    let p0 = MaterialParams::new(m.a, m.b, m.c, 1.0, 0.0).map_err(config)?;
    let bound = bulk_bound(&p0).bound;
    let sups: Vec<f64> = st.runs.iter().map(|r| r.sup_norm).collect();
    let (lo, hi) = sups
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    rep.set_data(json!({
        "w": num(w),
        "reference": cfg.study.reference,
        "shell_radius": num(cfg.study.shell_radius),
        "runs": st.runs.iter().map(|r| json!({
            "L": num(r.l),
            "error": num(r.error),
            "sup_norm": num(r.sup_norm),
            "iterations": r.report.iterations,
            "residual": num(r.report.residual),
        })).collect::<Vec<_>>(),
        "fit": {
            "slope": num(st.fit.slope),
            "rate": num(st.fit.rate()),
            "fit_residual": num(st.fit.fit_residual),
        },
        "strictly_decreasing": st.fit.errors.windows(2).all(|e| e[1] < e[0]),
        "sup_bound": { "bound": num(bound), "max": num(hi), "spread": num((hi - lo) / hi) },
    }));
    sink.json("study_rate.json", &rep)
}

fn study_decay(cfg: &RunConfig, sink: &Sink) -> Result<(), CliError> {
    let p = cfg.params()?;
    let g = cfg.exterior_grid()?;
    let st = &cfg.study;
    let mut rep = Report::start("study decay", cfg);
    let (field, report) = solve_at_config(cfg, &p, &g)?;
    let radii = log_spaced(st.decay_r_min, st.decay_r_max, st.decay_samples);
    let prof = decay_profile_on(&field, &p, &g, &radii)?;
    let rows = (0..radii.len()).map(|k| {
        vec![
            fmt17(prof.radii[k]),
            fmt17(prof.dist_scaled[k]),
            fmt17(prof.tail_scaled[k]),
        ]
    });
    sink.csv("decay.csv", &io::csv(&["r", "dist_scaled", "tail_scaled"], rows))?;
    rep.set_data(json!({
        "radii": nums(&prof.radii),
        "dist_scaled": nums(&prof.dist_scaled),
        "tail_scaled": nums(&prof.tail_scaled),
        "max_dist_scaled": num(prof.max_dist_scaled(st.decay_r_min, st.decay_r_max)),
        "report": report_json(&report),
    }));
    sink.json("study_decay.json", &rep)
}

fn study_exchange(cfg: &RunConfig, sink: &Sink) -> Result<(), CliError> {
    let p = cfg.params()?;
    let w = cfg.regime.ratio()?;
    let st = &cfg.study;
    let ray: Vec<f64> = (0..st.exchange_samples)
        .map(|k| 1.0 + (st.exchange_r_max - 1.0) * k as f64 / (st.exchange_samples - 1) as f64)
        .collect();
    let mut rep = Report::start("study exchange", cfg);
    let qcfg = QuadrupolarConfig::new(w, p.s_star).map_err(config)?;
    let (profile, solve) = match st.exchange_source {
        ExchangeKind::Q0 => (
            eigenvalue_exchange_profile(&ExchangeSource::ClosedForm(qcfg), &ray)?,
            None,
        ),
        ExchangeKind::Field => {
            let g = cfg.exterior_grid()?;
            let (field, report) = solve_at_config(cfg, &p, &g)?;
            (
                eigenvalue_exchange_profile(&ExchangeSource::Field(&field, &g), &ray)?,
                Some(report),
            )
        }
    };
    let rows = profile.rows.iter().map(|r| io::branch_row(r.r, r.lambda, r.biaxiality));
    sink.csv("branches.csv", &io::csv(&io::BRANCH_HEADER, rows))?;
    let ring = ring_radius(w).map_err(config)?;
    rep.set_data(json!({
        "source": st.exchange_source,
        "w": num(w),
        "crossing": opt(profile.crossing),
        "min_gap": num(profile.min_gap),
        "ring_radius": opt(ring.radius.filter(|_| ring.exists)),
        "report": solve.as_ref().map(report_json).unwrap_or(Value::Null),
    }));
    sink.json("study_exchange.json", &rep)
}

fn config(e: NematicError) -> CliError {
    CliError::Config(e.to_string())
}

fn compute(e: NematicError) -> CliError {
    CliError::from(e)
}
