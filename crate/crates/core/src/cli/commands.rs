use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{RunConfig, SolverChoice};
use super::CliError;
use crate::asymptotics::{gradient_bound_check, tail_constants, AsymptoticFit, GradientBound};
use crate::energy::{distance_to_limit, energy, upper_bound_check_with, EnergyReport, UpperBound};
use crate::numerics::RadialGrid;
use crate::profile::{
    audit, solve_shooting, solve_variational, write_profile_csv, InvariantReport, Params, Profile,
    ProfileRecord,
};
use crate::stability::{
    analyze, coefficient_signs, CoefficientTables, SignCertificate, StabilityOptions, StabilityReport,
    Verdict,
};

pub const SCHEMA: u32 = 1;
/// Tolerance of the invariant audit.
pub const AUDIT_TOL: f64 = 1e-8;

pub const RATES_HEADER: &str =
    "p,m_p,distance_to_limit,ratio,tail_const_potential,tail_const_derivative,gradient_sup";

/// Writes `contents` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(contents)?;
        file.sync_all()?;
    }
    fs::rename(&tmp, path)
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    write_atomic(path, text.as_bytes()).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    write_atomic(path, text.as_bytes()).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// `3` for 3.0, `2.5` for 2.5.
pub fn p_tag(p: f64) -> String {
    format!("{p}")
}

#[derive(Debug, Clone, Serialize)]
struct Header<'a> {
    schema: u32,
    command: &'a str,
    config: &'a RunConfig,
    config_hash: String,
    p: f64,
}

impl<'a> Header<'a> {
    fn new(cfg: &'a RunConfig, p: f64) -> Self {
        Header { schema: SCHEMA, command: &cfg.command, config: cfg, config_hash: cfg.hash(), p }
    }
}

struct Solved {
    profile: Profile,
    other: Option<Profile>,
    cross_solver_sup: Option<f64>,
    energy: EnergyReport,
    audit: InvariantReport,
}

fn grid_for(cfg: &RunConfig, params: Params) -> Result<RadialGrid, CliError> {
    let radius = cfg.radius.unwrap_or_else(|| params.default_radius());
    RadialGrid::graded(radius, cfg.nodes).map_err(|e| CliError::Usage(e.to_string()))
}

fn solve_one(cfg: &RunConfig, p: f64) -> Result<Solved, CliError> {
    let params = Params::new(p).map_err(|e| CliError::Usage(e.to_string()))?;
    let grid = grid_for(cfg, params)?;
    let numeric = |e: crate::profile::ProfileError| CliError::Numeric(format!("p = {p}: {e}"));
    let (profile, other) = match cfg.solver {
        SolverChoice::Shooting => (solve_shooting(params, &grid, cfg.tol).map_err(numeric)?, None),
        SolverChoice::Variational => (solve_variational(params, &grid, cfg.var_tol).map_err(numeric)?, None),
        SolverChoice::Both => {
            let s = solve_shooting(params, &grid, cfg.tol).map_err(numeric)?;
            let v = solve_variational(params, &grid, cfg.var_tol).map_err(numeric)?;
            (s, Some(v))
        }
    };
    let cross_solver_sup = other.as_ref().and_then(|o| profile.sup_distance(o));
    let energy = energy(&profile).map_err(|e| CliError::Numeric(format!("p = {p}: {e}")))?;
    let audit = audit(&profile, AUDIT_TOL);
    Ok(Solved { profile, other, cross_solver_sup, energy, audit })
}

#[derive(Serialize)]
struct SolveReport<'a> {
    #[serde(flatten)]
    header: Header<'a>,
    profile: ProfileRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    variational: Option<ProfileRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cross_solver_sup: Option<f64>,
    energy: EnergyReport,
    pohozaev_relative: f64,
    audit: &'a InvariantReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    asymptotics: Option<Asymptotics>,
}

#[derive(Serialize)]
struct Asymptotics {
    tail: Option<AsymptoticFit>,
    tail_error: Option<String>,
    gradient: GradientBound,
    distance_to_limit: f64,
    upper_bound: Option<UpperBound>,
    coefficient_signs: SignCertificate,
}

fn asymptotics(profile: &Profile) -> Asymptotics {
    let tail = tail_constants(profile);
    Asymptotics {
        tail_error: tail.as_ref().err().map(|e| e.to_string()),
        tail: tail.ok(),
        gradient: gradient_bound_check(profile),
        distance_to_limit: distance_to_limit(profile),
        upper_bound: upper_bound_check_with(profile).ok(),
        coefficient_signs: coefficient_signs(&CoefficientTables::new(profile)),
    }
}

fn emit_solved(cfg: &RunConfig, s: &Solved, extra: Option<Asymptotics>) -> Result<(), CliError> {
    let p = s.profile.p();
    let tag = p_tag(p);
    if cfg.format.csv() {
        let mut buf = Vec::new();
        write_profile_csv(&s.profile, &mut buf).map_err(|e| CliError::Io(e.to_string()))?;
        write_atomic(&cfg.out.join(format!("profile_p{tag}.csv")), &buf).map_err(|e| CliError::Io(e.to_string()))?;
    }
    if cfg.format.json() {
        let report = SolveReport {
            header: Header::new(cfg, p),
            profile: ProfileRecord::from(&s.profile),
            variational: s.other.as_ref().map(ProfileRecord::from),
            cross_solver_sup: s.cross_solver_sup,
            energy: s.energy,
            pohozaev_relative: s.energy.pohozaev_residual / s.energy.total,
            audit: &s.audit,
            asymptotics: extra,
        };
        write_json(&cfg.out.join(format!("report_p{tag}.json")), &report)?;
    }
    Ok(())
}

type Split<T> = (Vec<(f64, T)>, Vec<(f64, CliError)>);

/// Runs `job` for every p, keeping going past failures.
fn for_each_p<T: Send>(cfg: &RunConfig, job: impl Fn(f64) -> Result<T, CliError> + Sync) -> Split<T> {
    let results: Vec<(f64, Result<T, CliError>)> = cfg.p_values.par_iter().map(|&p| (p, job(p))).collect();
    let mut ok = Vec::new();
    let mut failed = Vec::new();
    for (p, r) in results {
        match r {
            Ok(v) => ok.push((p, v)),
            Err(e) => failed.push((p, e)),
        }
    }
    (ok, failed)
}

fn finish(failed: Vec<(f64, CliError)>) -> Result<(), CliError> {
    if failed.is_empty() {
        return Ok(());
    }
    if failed.iter().all(|(_, e)| matches!(e, CliError::Usage(_))) {
        return Err(failed.into_iter().next().unwrap().1);
    }
    let mut msg = format!("{} of the runs failed:", failed.len());
    for (p, e) in &failed {
        let _ = write!(msg, "\n  p = {p}: {e}");
    }
    Err(CliError::Numeric(msg))
}

fn audit_line(s: &Solved) -> String {
    let e = &s.energy;
    let mut line = format!(
        "p = {}: m_p = {:.10}, f'(0) = {:.8}, Pohozaev {:.2e}, audit {}",
        s.profile.p(),
        e.total,
        s.profile.f_prime_at_zero(),
        e.pohozaev_residual / e.total,
        if s.audit.all_passed() { "passed" } else { "FAILED" }
    );
    if let Some(d) = s.cross_solver_sup {
        let _ = write!(line, ", cross-solver sup {d:.2e}");
    }
    line
}

fn check_audit(s: &Solved) -> Result<(), CliError> {
    if s.audit.all_passed() {
        return Ok(());
    }
    let names: Vec<&str> = s.audit.failures().map(|c| c.name.as_str()).collect();
    Err(CliError::Numeric(format!("invariant audit failed: {}", names.join(", "))))
}

pub fn solve(cfg: &RunConfig) -> Result<(), CliError> {
    let (done, failed) = for_each_p(cfg, |p| {
        let s = solve_one(cfg, p)?;
        emit_solved(cfg, &s, None)?;
        let line = audit_line(&s);
        check_audit(&s).map(|_| line)
    });
    for (_, line) in done {
        println!("{line}");
    }
    finish(failed)
}

pub fn audit_cmd(cfg: &RunConfig) -> Result<(), CliError> {
    let (done, failed) = for_each_p(cfg, |p| {
        let s = solve_one(cfg, p)?;
        emit_solved(cfg, &s, None)?;
        let mut text = audit_line(&s);
        for c in &s.audit.checks {
            let at = c.radius.map(|r| format!(" at r = {r:.4e}")).unwrap_or_default();
            let _ = write!(
                text,
                "\n  {:<4} {:<28} worst {:+.3e}{at}",
                if c.passed { "ok" } else { "FAIL" },
                c.name,
                c.worst_violation
            );
        }
        if let Err(e) = check_audit(&s) {
            eprintln!("{text}");
            return Err(e);
        }
        Ok(text)
    });
    for (_, text) in done {
        println!("{text}");
    }
    finish(failed)
}

pub fn report(cfg: &RunConfig) -> Result<(), CliError> {
    let (done, failed) = for_each_p(cfg, |p| {
        let s = solve_one(cfg, p)?;
        let extra = asymptotics(&s.profile);
        let mut line = audit_line(&s);
        match &extra.tail {
            Some(t) => {
                let _ = write!(
                    line,
                    "\n  tail constants {:.5} (target {}), {:.5} (target {})",
                    t.tail_const_potential, t.target_potential, t.tail_const_derivative, t.target_derivative
                );
            }
            None => {
                let _ = write!(line, "\n  tail constants unavailable: {}", extra.tail_error.as_deref().unwrap_or(""));
            }
        }
        let _ = write!(
            line,
            "\n  sup |grad u| = {:.6} at r = {:.4}, distance to limit {:.4e}",
            extra.gradient.sup_norm, extra.gradient.location, extra.distance_to_limit
        );
        let signs = &extra.coefficient_signs;
        let _ = write!(
            line,
            "\n  coefficient signs: alpha > 0 {}, beta > 0 {}, b < 0 {}{}",
            signs.alpha_positive,
            signs.beta_positive,
            signs.b_negative,
            if signs.certified_range { "" } else { " (diagnostic only)" }
        );
        emit_solved(cfg, &s, Some(extra))?;
        check_audit(&s).map(|_| line)
    });
    for (_, line) in done {
        println!("{line}");
    }
    finish(failed)
}

struct Rate {
    m_p: f64,
    distance: f64,
    ratio: f64,
    tail: Option<AsymptoticFit>,
    gradient_sup: f64,
}

fn field(x: Option<f64>) -> String {
    x.map(|v| format!("{v:e}")).unwrap_or_default()
}

pub fn sweep(cfg: &RunConfig) -> Result<(), CliError> {
    let (mut done, failed) = for_each_p(cfg, |p| {
        let s = solve_one(cfg, p)?;
        emit_solved(cfg, &s, None)?;
        let distance = distance_to_limit(&s.profile);
        let rate = Rate {
            m_p: s.energy.total,
            distance,
            ratio: distance / (p.ln() / p).sqrt(),
            tail: tail_constants(&s.profile).ok(),
            gradient_sup: gradient_bound_check(&s.profile).sup_norm,
        };
        check_audit(&s).map(|_| rate)
    });
    done.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut csv = String::from(RATES_HEADER);
    csv.push('\n');
    for (p, r) in &done {
        let _ = writeln!(
            csv,
            "{p},{:e},{:e},{:e},{},{},{:e}",
            r.m_p,
            r.distance,
            r.ratio,
            field(r.tail.map(|t| t.tail_const_potential)),
            field(r.tail.map(|t| t.tail_const_derivative)),
            r.gradient_sup
        );
        println!("p = {p}: m_p = {:.10}, distance to limit {:.4e}, ratio {:.4}", r.m_p, r.distance, r.ratio);
    }
    if !done.is_empty() {
        write_text(&cfg.out.join("rates.csv"), &csv)?;
    }
    finish(failed)
}

#[derive(Serialize)]
struct SpectrumFile<'a> {
    #[serde(flatten)]
    header: Header<'a>,
    stability: &'a StabilityReport,
}

pub fn spectra_csv(report: &StabilityReport, k: usize) -> String {
    let mut s = String::from("p,n,part,norm");
    for prefix in ["lambda", "drift", "overlap"] {
        for i in 1..=k {
            let _ = write!(s, ",{prefix}_{i}");
        }
    }
    s.push('\n');
    for m in &report.modes {
        let _ = write!(s, "{},{},{},{:e}", report.p, m.n, m.sector.as_str(), m.norm);
        for col in [&m.eigenvalues, &m.drift, &m.overlaps] {
            for i in 0..k {
                let _ = write!(s, ",{}", field(col.get(i).copied()));
            }
        }
        s.push('\n');
    }
    s
}

fn summary(r: &StabilityReport) -> String {
    let mut s = match r.verdict {
        Verdict::OutsideCertifiedRange => format!(
            "p = {}: outside certified range (diagnostic only: {} eigenvalues below tolerance, {} near-zero directions)",
            r.p, r.negative_total, r.kernel_dimension
        ),
        v => format!(
            "p = {}: {} ({} negative eigenvalues, {} near-zero kernel directions)",
            r.p,
            v.label(),
            r.negative_total,
            r.kernel_dimension
        ),
    };
    s.push_str("\n  mode  part       lambda_min/|op|   near-zero overlaps");
    for m in &r.modes {
        let overlaps: Vec<String> =
            m.near_zero.iter().map(|&i| format!("{:.8}", m.overlaps.get(i).copied().unwrap_or(0.0))).collect();
        let _ = write!(
            s,
            "\n  {:<5} {:<10} {:+.4e}       {}",
            m.n,
            m.sector.as_str(),
            m.relative_smallest(),
            if overlaps.is_empty() { "-".to_string() } else { overlaps.join(" ") }
        );
    }
    s
}

pub fn spectrum_cmd(cfg: &RunConfig) -> Result<(), CliError> {
    let (done, failed) = for_each_p(cfg, |p| {
        let params = Params::new(p).map_err(|e| CliError::Usage(e.to_string()))?;
        let opts = StabilityOptions {
            nodes: cfg.nodes,
            radius: cfg.radius,
            modes: cfg.modes.clone(),
            eigenpairs: cfg.eigenpairs,
            ode_tol: cfg.tol,
            ..StabilityOptions::default()
        };
        let report = analyze(params, &opts).map_err(|e| CliError::Numeric(format!("p = {p}: {e}")))?;
        let tag = p_tag(p);
        if cfg.format.csv() {
            write_text(&cfg.out.join(format!("spectra_p{tag}.csv")), &spectra_csv(&report, cfg.eigenpairs))?;
        }
        if cfg.format.json() {
            let file = SpectrumFile { header: Header::new(cfg, p), stability: &report };
            write_json(&cfg.out.join(format!("spectra_p{tag}.json")), &file)?;
        }
        let text = summary(&report);
        if report.verdict == Verdict::Unstable {
            eprintln!("{text}");
            return Err(CliError::Numeric(format!("negative eigenvalues found at p = {p}")));
        }
        Ok(text)
    });
    for (_, text) in done {
        println!("{text}");
    }
    finish(failed)
}
