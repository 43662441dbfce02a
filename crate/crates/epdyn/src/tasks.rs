//! One runner per task. Sweeps run in parallel and are gathered in sweep order.

use crate::config::{build_state, Method, ModelSpec, Resolved, ScenarioConfig, Task};
use crate::output::{Artifact, Table};
use crate::CliError;
use epcore::adiabatic::compare_full_vs_effective;
use epcore::diagnostics::{density_evolve, diagonal_density, entanglement_transfer_fidelities, mixed_state_ensemble, petermann_of};
use epcore::jordan::detect_structure_with;
use epcore::linalg::{eig_general, lex_cmp, norm2};
use epcore::pcr::{build_pcr, verify_closure, PcrBasis};
use epcore::propagator::{asymptotic_direction, evolve_grid, oracle_grid, plan, Asymptotics};
use epcore::{ComplexMatrix, ComplexVector, Tolerances};
use rayon::prelude::*;
use serde_json::json;

/// Default ensemble size for density-evolve.
pub const DEFAULT_MEMBERS: usize = 100;

pub fn run(cfg: &ScenarioConfig, task: Task) -> Result<Artifact, CliError> {
    match task {
        Task::SpectrumSweep => spectrum_sweep(cfg),
        Task::PetermannSweep => petermann_sweep(cfg),
        Task::PcrCheck => pcr_check(cfg),
        Task::Evolve => evolve(cfg),
        Task::DensityEvolve => density(cfg),
        Task::Transfer => transfer(cfg),
        Task::EliminateCompare => eliminate_compare(cfg),
    }
}

/// (parameter name, value, model) per sweep point; a single point named `point` without a sweep.
fn points(cfg: &ScenarioConfig) -> Result<(String, Vec<(f64, ModelSpec)>), CliError> {
    match cfg.sweep_values()? {
        None => Ok(("point".into(), vec![(0.0, cfg.model.clone())])),
        Some((name, values)) => {
            let pts = values.iter().map(|&v| Ok((v, cfg.model.with_parameter(&name, v)?))).collect::<Result<_, CliError>>()?;
            Ok((name, pts))
        }
    }
}

fn single(cfg: &ScenarioConfig) -> Result<Resolved, CliError> {
    if cfg.sweep.is_some() {
        return Err(CliError::Config("this task takes no sweep".into()));
    }
    cfg.model.resolve(&cfg.base_dir)
}

fn initial_state(cfg: &ScenarioConfig, labels: &[String]) -> Result<ComplexVector, CliError> {
    let spec = cfg.initial_state.as_ref().ok_or_else(|| CliError::Config("task needs an `initial_state`".into()))?;
    let v = build_state(spec, labels)?;
    if !(norm2(v.view()) > 0.0) {
        return Err(CliError::Config("initial state is zero".into()));
    }
    Ok(v)
}

fn pcr(cfg: &ScenarioConfig, h: &ComplexMatrix) -> Result<PcrBasis<f64>, CliError> {
    let tol = cfg.tolerances.resolve(h);
    let s = detect_structure_with(h, &tol)?;
    Ok(build_pcr(h, &s, &tol)?)
}

fn tolerance_note(tol: &Tolerances<f64>) -> String {
    format!("resolved_tolerances {}", serde_json::to_string(tol).expect("tolerances serialize"))
}

fn spectrum_sweep(cfg: &ScenarioConfig) -> Result<Artifact, CliError> {
    let (name, pts) = points(cfg)?;
    let rows: Vec<Vec<f64>> = pts
        .par_iter()
        .map(|(v, m)| {
            let h = m.resolve(&cfg.base_dir)?.effective()?;
            let mut e = eig_general(&h)?.eigenvalues;
            e.sort_by(lex_cmp);
            let mut row = vec![*v];
            row.extend(e.iter().flat_map(|z| [z.re, z.im]));
            Ok(row)
        })
        .collect::<Result<_, CliError>>()?;
    let dim = (rows[0].len() - 1) / 2;
    if rows.iter().any(|r| r.len() != rows[0].len()) {
        return Err(CliError::Config("swept parameter changes the dimension".into()));
    }
    let mut columns = vec![name];
    for k in 1..=dim {
        columns.push(format!("E{k}_re"));
        columns.push(format!("E{k}_im"));
    }
    Ok(Artifact::Csv(Table { columns, rows, notes: vec!["eigenvalues sorted by real then imaginary part".into()] }))
}

fn petermann_sweep(cfg: &ScenarioConfig) -> Result<Artifact, CliError> {
    let (name, pts) = points(cfg)?;
    let rows = pts
        .par_iter()
        .map(|(v, m)| {
            let r = petermann_of(&m.resolve(&cfg.base_dir)?.effective()?)?;
            Ok(vec![*v, r.average, r.inverse_average, if r.diverged { 1.0 } else { 0.0 }])
        })
        .collect::<Result<_, CliError>>()?;
    let columns = vec![name, "K_mean".into(), "K_mean_inverse".into(), "diverged".into()];
    Ok(Artifact::Csv(Table { columns, rows, notes: vec![] }))
}

fn pcr_check(cfg: &ScenarioConfig) -> Result<Artifact, CliError> {
    let h = single(cfg)?.effective()?;
    let tol = cfg.tolerances.resolve(&h);
    let s = detect_structure_with(&h, &tol)?;
    let basis = build_pcr(&h, &s, &tol)?;
    let clusters: Vec<_> = s
        .clusters
        .iter()
        .enumerate()
        .map(|(k, c)| {
            json!({
                "eigenvalue": [c.value.re, c.value.im],
                "algebraic_multiplicity": c.algebraic_multiplicity,
                "geometric_multiplicity": c.geometric_multiplicity,
                "segre": s.segre(k),
            })
        })
        .collect();
    let mut report = json!({
        "scenario": basis.scenario.describe(),
        "dim": basis.dim,
        "clusters": clusters,
        "closure_residual": verify_closure(&basis, basis.dim)?,
        "chain_residual": basis.chain_residual,
        "advisory_chain_residual": basis.advisory_chain_residual,
        "orthonormality_residual": basis.orthonormality_residual,
        "pairing_policy_applied": basis.pairing_policy_applied,
        "chains": basis.chains,
        "resolved_tolerances": tol,
    });
    if cfg.include_basis.unwrap_or(false) {
        report["basis"] = serde_json::to_value(basis.to_json()).expect("basis serializes");
    }
    Ok(Artifact::Json(report))
}

fn evolve(cfg: &ScenarioConfig) -> Result<Artifact, CliError> {
    let model = single(cfg)?;
    let h = model.effective()?;
    let labels = model.labels().to_vec();
    let psi0 = initial_state(cfg, &labels)?;
    let times = cfg.time_grid()?;
    let basis = pcr(cfg, &h)?;
    let pl = plan(&basis, &psi0)?;
    let result = match cfg.method.clone().unwrap_or(Method::ClosedForm) {
        Method::ClosedForm => evolve_grid(&pl, &times)?,
        Method::Oracle => oracle_grid(&h, &psi0, &times)?,
    };
    let mut notes = vec![format!("scenario {}", basis.scenario.describe()), tolerance_note(&basis.tolerances)];
    let direction = match asymptotic_direction(&pl) {
        Ok(Asymptotics::Converges { direction, degree }) => {
            notes.push(format!("asymptotic growth t^{degree}"));
            Some(direction)
        }
        Ok(Asymptotics::Bounded) => {
            notes.push("bounded evolution".into());
            None
        }
        Ok(Asymptotics::PerChain { degree, .. }) => {
            notes.push(format!("growth t^{degree} shared by chains at distinct eigenvalues"));
            None
        }
        Err(e) => {
            notes.push(format!("no asymptotic direction: {e}"));
            None
        }
    };
    let mut columns = vec!["time".to_string()];
    columns.extend(labels.iter().map(|l| format!("pop_{l}")));
    columns.push("norm".into());
    if direction.is_some() {
        columns.push("fidelity_direction".into());
    }
    let rows = (0..times.len())
        .map(|k| {
            let mut row = vec![times[k]];
            row.extend_from_slice(&result.populations[k]);
            row.push(result.norms[k]);
            if let Some(d) = &direction {
                let psi = &result.states[k];
                let n = result.norms[k];
                row.push(epcore::linalg::inner(d.view(), psi.view()).norm_sqr() / (n * n));
            }
            row
        })
        .collect();
    Ok(Artifact::Csv(Table { columns, rows, notes }))
}

fn density(cfg: &ScenarioConfig) -> Result<Artifact, CliError> {
    let model = single(cfg)?;
    let h = model.effective()?;
    let labels = model.labels().to_vec();
    let times = cfg.time_grid()?;
    let target = match &cfg.target {
        Some(spec) => build_state(spec, &labels)?,
        None => {
            let basis = pcr(cfg, &h)?;
            let longest = basis
                .chains
                .iter()
                .enumerate()
                .max_by_key(|(k, c)| (c.length, std::cmp::Reverse(*k)))
                .ok_or_else(|| CliError::Config("no Jordan chain to target; give `target`".into()))?
                .1;
            basis.pairs[longest.pairs[0]].right.clone()
        }
    };
    if let Some(w) = &cfg.weights {
        if w.len() != labels.len() {
            return Err(CliError::Config(format!("{} weights for {} sites", w.len(), labels.len())));
        }
        let tr = density_evolve(&h, &diagonal_density(w), &times, Some(&target))?;
        let mut columns = vec!["time".to_string(), "fidelity".into(), "purity".into(), "trace".into()];
        columns.extend(labels.iter().map(|l| format!("rho_{l}")));
        let rows = (0..times.len())
            .map(|k| {
                let mut row = vec![times[k], tr.fidelity[k], tr.purity[k], tr.traces[k]];
                row.extend_from_slice(&tr.diagonals[k]);
                row
            })
            .collect();
        return Ok(Artifact::Csv(Table { columns, rows, notes: vec!["rho columns: unnormalized diagonal".into()] }));
    }
    let members = cfg.members.unwrap_or(DEFAULT_MEMBERS);
    if members == 0 {
        return Err(CliError::Config("members must be positive".into()));
    }
    let seed = cfg.seed.unwrap_or(0);
    let ens = mixed_state_ensemble(&h, &target, members, seed, &times)?;
    let mut columns = vec!["time".to_string(), "mean_fidelity".into(), "mean_purity".into()];
    columns.extend(labels.iter().map(|l| format!("mean_rho_{l}")));
    let rows = (0..times.len())
        .map(|k| {
            let mut row = vec![times[k], ens.mean_fidelity[k], ens.mean_purity[k]];
            row.extend_from_slice(&ens.mean_diagonals[k]);
            row
        })
        .collect();
    let notes = vec![format!("ensemble members {members} seed {seed}"), "rho columns: unnormalized diagonal".into()];
    Ok(Artifact::Csv(Table { columns, rows, notes }))
}

fn transfer(cfg: &ScenarioConfig) -> Result<Artifact, CliError> {
    let model = single(cfg)?;
    let params = match &model {
        Resolved::Plain { diamond: Some(p), .. } => *p,
        _ => return Err(CliError::Config("transfer needs a diamond model".into())),
    };
    let psi0 = initial_state(cfg, model.labels())?;
    let times = cfg.time_grid()?;
    let f = entanglement_transfer_fidelities(&params, &psi0, &times)?;
    let target: Vec<String> = f.target.iter().map(|z| format!("{:.16e}{:+.16e}i", z.re, z.im)).collect();
    let rows = (0..times.len()).map(|k| vec![times[k], f.initial_form[k], f.target_form[k]]).collect();
    Ok(Artifact::Csv(Table {
        columns: vec!["time".into(), "fidelity_initial_form".into(), "fidelity_target_form".into()],
        rows,
        notes: vec![format!("target_form {}", target.join(" "))],
    }))
}

fn eliminate_compare(cfg: &ScenarioConfig) -> Result<Artifact, CliError> {
    let times = cfg.time_grid()?;
    let (_, pts) = points(cfg)?;
    let blocks: Vec<Vec<Vec<f64>>> = pts
        .par_iter()
        .map(|(_, m)| {
            let (h, decay, aux, labels) = match m.resolve(&cfg.base_dir)? {
                Resolved::Coupled { h, decay, aux, labels } => (h, decay, aux, labels),
                Resolved::Plain { .. } => return Err(CliError::Config("eliminate-compare needs an adiabatic model".into())),
            };
            let psi0 = initial_state(cfg, &labels)?;
            let with = compare_full_vs_effective(&h, &decay, &aux, &psi0, &times, true)?;
            let ideal = compare_full_vs_effective(&h, &decay, &aux, &psi0, &times, false)?;
            let kappa = decay[aux[0]];
            Ok((0..times.len()).map(|k| vec![kappa, times[k], with.errors[k], ideal.errors[k]]).collect())
        })
        .collect::<Result<_, CliError>>()?;
    Ok(Artifact::Csv(Table {
        columns: vec!["kappa_aux".into(), "time".into(), "error_with_induced_decay".into(), "error_ideal_model".into()],
        rows: blocks.into_iter().flatten().collect(),
        notes: vec!["error: distance between normalized primary-mode states".into()],
    }))
}
