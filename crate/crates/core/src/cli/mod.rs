//! The `cubic-span` command line.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use num_bigint::BigInt;
use serde_json::{json, Value};

use crate::forms::{format_rational, HomogeneousForm, ProjectivePoint};
use crate::geometry::{
    hessian_rank_at, is_eckardt, is_on_hypersurface, second_fundamental_form, smooth_gradient, tangent_plane,
    GeometryError, LocalType,
};
use crate::io::{
    certificate_json, format_real, parse_form_file, parse_point_list, parse_reals, parse_span,
    parse_system, points_json, read_file, reals_json, report_text, span_json, write_file,
    IoError, RunReport,
};
use crate::newton::{
    certified_solve, find_smooth_point_ybd, is_on_ybd, rationalize_point, BallSpec, NewtonError,
    YbdSolveOptions, INDEPENDENCE_THRESHOLD, MAX_DENOMINATOR, SAFETY_FACTOR,
};
use crate::span::{
    check_tangent_section_containment, enumerate_points, verify_provenance, HeightBound, PointSet,
    SectionStatus, SpanConfig, SpanError,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_REJECTED: i32 = 3;
pub const EXIT_CONTRACT: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "cubic-span", version, about = "Rational points, spans and certified solving on cubic hypersurfaces")]
pub struct Cli {
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Local geometry at a rational point.
    Analyze { form: PathBuf, point: String },
    /// Enumerate points up to a height and flag Eckardt points.
    EckardtScan {
        form: PathBuf,
        #[arg(long)]
        height: u64,
    },
    /// Secant/tangent closure of a seed set.
    Span {
        form: PathBuf,
        /// Seed points, e.g. "(3:5:1),(0:1:0)".
        #[arg(long)]
        seeds: Option<String>,
        /// Also seed with every point of at most this height.
        #[arg(long)]
        height: Option<u64>,
        #[arg(long, default_value_t = 6)]
        gens: usize,
        #[arg(long, default_value_t = 3)]
        hdir: u64,
        #[arg(long, default_value = "1000000")]
        hmax: String,
        /// Save the closure as a `.span` file.
        #[arg(long)]
        save: Option<PathBuf>,
        /// Replay every step of a saved `.span` file instead of computing.
        #[arg(long)]
        verify: Option<PathBuf>,
    },
    /// Tangent plane section points and their containment in the span.
    Section {
        form: PathBuf,
        point: String,
        #[arg(long)]
        height: u64,
        #[arg(long, default_value_t = 1)]
        gens: usize,
        #[arg(long, default_value_t = 3)]
        hdir: u64,
        #[arg(long, default_value = "1000000")]
        hmax: String,
    },
    /// Certified smooth real point of Y_{B,D}.
    SolveYbd {
        form: PathBuf,
        #[arg(long = "B")]
        b: String,
        #[arg(long = "D", allow_hyphen_values = true)]
        d: String,
        #[arg(long, allow_hyphen_values = true)]
        seed: String,
        #[arg(long, default_value_t = 0.1)]
        radius: f64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Newton–Kantorovich certification of a square polynomial system.
    Certify {
        system: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        center: String,
        #[arg(long)]
        radius: f64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, default_value_t = 50)]
        max_iter: usize,
    },
}

/// Result of one invocation: exit code, report text (if any) and a
/// diagnostic for standard error.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommandOutcome {
    pub exit_code: i32,
    pub report: Option<String>,
    pub message: Option<String>,
}

#[derive(Debug)]
enum Failure {
    Validation(String),
    Rejected(RunReport),
    Contract(String, Option<RunReport>),
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<GeometryError> for Failure {
    fn from(e: GeometryError) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<SpanError> for Failure {
    fn from(e: SpanError) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<NewtonError> for Failure {
    fn from(e: NewtonError) -> Self {
        match e {
            NewtonError::EscapedBall { .. } => Failure::Contract(e.to_string(), None),
            other => Failure::Validation(other.to_string()),
        }
    }
}

pub fn run_command<I, T>(argv: I) -> CommandOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            return CommandOutcome {
                exit_code: code,
                report: None,
                message: Some(e.render().to_string()),
            };
        }
    };
    let (code, report, message) = match execute(&cli.command) {
        Ok(report) => (EXIT_OK, Some(report), None),
        Err(Failure::Validation(msg)) => (EXIT_VALIDATION, None, Some(msg)),
        Err(Failure::Rejected(report)) => {
            (EXIT_REJECTED, Some(report), Some("certification rejected".to_string()))
        }
        Err(Failure::Contract(msg, report)) => (EXIT_CONTRACT, report, Some(msg)),
    };
    let text = match report.as_ref().map(report_text).transpose() {
        Ok(t) => t,
        Err(e) => {
            return CommandOutcome {
                exit_code: EXIT_CONTRACT,
                report: None,
                message: Some(e.to_string()),
            }
        }
    };
    if let (Some(path), Some(text)) = (&cli.out, &text) {
        if let Err(e) = write_file(path, text) {
            return CommandOutcome {
                exit_code: EXIT_VALIDATION,
                report: None,
                message: Some(e.to_string()),
            };
        }
        return CommandOutcome {
            exit_code: code,
            report: None,
            message,
        };
    }
    CommandOutcome {
        exit_code: code,
        report: text,
        message,
    }
}

fn load_cubic(path: &Path) -> Result<HomogeneousForm, Failure> {
    let f = parse_form_file(path)?;
    if f.degree() != 3 {
        return Err(Failure::Validation(format!(
            "{}: expected a cubic form, found degree {}",
            path.display(),
            f.degree()
        )));
    }
    Ok(f)
}

fn parse_point(f: &HomogeneousForm, s: &str) -> Result<ProjectivePoint, Failure> {
    let p: ProjectivePoint = s.parse().map_err(|e: crate::forms::FormError| Failure::Validation(e.to_string()))?;
    if p.dim() != f.num_vars() {
        return Err(Failure::Validation(format!(
            "point {p} has {} coordinates, the form has {} variables",
            p.dim(),
            f.num_vars()
        )));
    }
    Ok(p)
}

fn require_on_surface(f: &HomogeneousForm, p: &ProjectivePoint) -> Result<(), Failure> {
    if !is_on_hypersurface(f, p)? {
        return Err(Failure::Validation(format!("point not on hypersurface: {p}")));
    }
    Ok(())
}

fn height(h: u64) -> Result<HeightBound, Failure> {
    HeightBound::new(h).map_err(Failure::from)
}

fn parse_cap(s: &str) -> Result<BigInt, Failure> {
    let cap: BigInt = s
        .trim()
        .parse()
        .map_err(|_| Failure::Validation(format!("bad height cap {s:?}")))?;
    if cap < BigInt::from(1) {
        return Err(Failure::Validation("height cap must be at least 1".into()));
    }
    Ok(cap)
}

fn point_summary(f: &HomogeneousForm, p: &ProjectivePoint) -> Result<Value, Failure> {
    if smooth_gradient(f, p).is_err() {
        return Ok(json!({ "point": p.to_string(), "singular": true }));
    }
    let (_, inertia) = second_fundamental_form(f, p)?;
    let local_type = LocalType::from_inertia(&inertia).ok().map(|t| t.to_string());
    Ok(json!({
        "point": p.to_string(),
        "singular": false,
        "eckardt": is_eckardt(f, p)?,
        "hessian_rank": hessian_rank_at(f, p)?,
        "inertia": [inertia.n_plus, inertia.n_minus, inertia.n_zero],
        "local_type": local_type,
    }))
}

fn execute(command: &Command) -> Result<RunReport, Failure> {
    match command {
        Command::Analyze { form, point } => {
            let f = load_cubic(form)?;
            let p = parse_point(&f, point)?;
            require_on_surface(&f, &p)?;
            let mut results = point_summary(&f, &p)?;
            if let Ok(plane) = tangent_plane(&f, &p) {
                let coeffs: Vec<String> = plane
                    .linear_coefficients()
                    .map_err(GeometryError::from)?
                    .iter()
                    .map(format_rational)
                    .collect();
                results["tangent_plane"] = json!(coeffs);
            }
            results["on_hypersurface"] = json!(true);
            Ok(RunReport {
                command: "analyze".into(),
                config: json!({ "form": form.display().to_string(), "point": p.to_string() }),
                results,
                truncation: json!({}),
            })
        }
        Command::EckardtScan { form, height: h } => {
            let f = load_cubic(form)?;
            let points = enumerate_points(&f, height(*h)?);
            let summaries = points
                .iter()
                .map(|p| point_summary(&f, p))
                .collect::<Result<Vec<_>, _>>()?;
            let eckardt = summaries.iter().filter(|s| s["eckardt"] == json!(true)).count();
            Ok(RunReport {
                command: "eckardt-scan".into(),
                config: json!({ "form": form.display().to_string(), "height": h }),
                results: json!({
                    "num_points": points.len(),
                    "num_eckardt": eckardt,
                    "points": summaries,
                }),
                truncation: json!({ "height": h }),
            })
        }
        Command::Span {
            form,
            seeds,
            height: h,
            gens,
            hdir,
            hmax,
            save,
            verify,
        } => {
            let f = load_cubic(form)?;
            if let Some(path) = verify {
                return verify_span_file(&f, form, path);
            }
            let mut seed_set = PointSet::new();
            if let Some(s) = seeds {
                for p in parse_point_list(s)? {
                    if p.dim() != f.num_vars() {
                        return Err(Failure::Validation(format!("seed {p} has the wrong dimension")));
                    }
                    seed_set.insert(p);
                }
            }
            if let Some(h) = h {
                seed_set.extend(enumerate_points(&f, height(*h)?));
            }
            let config = SpanConfig {
                max_generations: *gens,
                residual_height_cap: parse_cap(hmax)?,
                direction_height: *hdir,
            };
            let state = crate::span::span_closure(&f, &seed_set, config.clone())?;
            let failures = verify_provenance(&f, &state)?;
            if let Some(path) = save {
                write_file(path, &crate::io::write_span(&state)?)?;
            }
            let report = RunReport {
                command: "span".into(),
                config: json!({
                    "form": form.display().to_string(),
                    "seeds": points_json(&seed_set),
                    "seed_height": h,
                    "max_generations": gens,
                    "direction_height": hdir,
                    "residual_height_cap": config.residual_height_cap.to_string(),
                }),
                results: span_json(&state),
                truncation: json!({
                    "fixed_point": state.fixed_point,
                    "capped_residuals": state.capped_residuals,
                    "generations_run": state.generations.len() - 1,
                }),
            };
            if !failures.is_empty() {
                return Err(Failure::Contract(
                    format!("{} provenance records failed to replay", failures.len()),
                    Some(report),
                ));
            }
            Ok(report)
        }
        Command::Section {
            form,
            point,
            height: h,
            gens,
            hdir,
            hmax,
        } => {
            let f = load_cubic(form)?;
            let p = parse_point(&f, point)?;
            require_on_surface(&f, &p)?;
            let config = SpanConfig {
                max_generations: *gens,
                residual_height_cap: parse_cap(hmax)?,
                direction_height: *hdir,
            };
            let check = check_tangent_section_containment(&f, &p, height(*h)?, config.clone())?;
            let entries: Vec<Value> = check
                .entries
                .iter()
                .map(|e| {
                    json!({
                        "point": e.point.to_string(),
                        "status": match e.status {
                            SectionStatus::Reached => "reached",
                            SectionStatus::Inconclusive => "inconclusive",
                            SectionStatus::Violation => "violation",
                        },
                    })
                })
                .collect();
            let violations = check.count(SectionStatus::Violation);
            let report = RunReport {
                command: "section".into(),
                config: json!({
                    "form": form.display().to_string(),
                    "point": p.to_string(),
                    "height": h,
                    "max_generations": gens,
                    "direction_height": hdir,
                    "residual_height_cap": config.residual_height_cap.to_string(),
                }),
                results: json!({
                    "eckardt": check.eckardt,
                    "section": entries,
                    "reached": check.count(SectionStatus::Reached),
                    "inconclusive": check.count(SectionStatus::Inconclusive),
                    "violations": violations,
                    "closure_size": check.closure.points().len(),
                }),
                truncation: json!({
                    "fixed_point": check.closure.fixed_point,
                    "capped_residuals": check.closure.capped_residuals,
                }),
            };
            if violations > 0 {
                return Err(Failure::Contract(
                    format!("{violations} section points violate span containment"),
                    Some(report),
                ));
            }
            Ok(report)
        }
        Command::SolveYbd {
            form,
            b,
            d,
            seed,
            radius,
            tol,
        } => {
            let f = load_cubic(form)?;
            let b = parse_point(&f, b)?;
            require_on_surface(&f, &b)?;
            let d = parse_reals(d)?;
            let seed = parse_reals(seed)?;
            let options = YbdSolveOptions {
                tol: *tol,
                radius: *radius,
                ..Default::default()
            };
            let config = json!({
                "form": form.display().to_string(),
                "B": b.to_string(),
                "D": reals_json(&d),
                "seed": reals_json(&seed),
                "tol": format_real(options.tol),
                "radius": format_real(options.radius),
                "max_iter": options.max_iter,
                "refine_steps": options.refine_steps,
                "safety_factor": format_real(SAFETY_FACTOR),
                "independence_threshold": format_real(INDEPENDENCE_THRESHOLD),
                "max_denominator": MAX_DENOMINATOR,
            });
            match find_smooth_point_ybd(&f, &b, &d, &seed, &options) {
                Ok(sol) => {
                    let candidate = rationalize_point(&sol.point, MAX_DENOMINATOR);
                    let d_rational = rationalize_point(&d, MAX_DENOMINATOR);
                    let exact = match (&candidate, &d_rational) {
                        (Some(c), Some(dr)) => Some(is_on_ybd(&f, &b, c, dr)?),
                        _ => None,
                    };
                    Ok(RunReport {
                        command: "solve-ybd".into(),
                        config,
                        results: json!({
                            "point": reals_json(&sol.point),
                            "residuals": reals_json(&sol.residuals),
                            "min_singular_value": format_real(sol.min_singular_value),
                            "jacobian_rank": sol.jacobian_rank,
                            "certificate": certificate_json(&sol.certificate),
                            "rational_candidate": candidate.map(|c| c.to_string()),
                            "rational_candidate_exact": exact,
                        }),
                        truncation: json!({}),
                    })
                }
                Err(NewtonError::Rejected(reason)) => Err(Failure::Rejected(RunReport {
                    command: "solve-ybd".into(),
                    config,
                    results: json!({ "accepted": false, "rejection": reason }),
                    truncation: json!({}),
                })),
                Err(NewtonError::RankDeficient(sigma)) => Err(Failure::Rejected(RunReport {
                    command: "solve-ybd".into(),
                    config,
                    results: json!({
                        "accepted": false,
                        "rejection": "rank deficient at the solution",
                        "min_singular_value": format_real(sigma),
                    }),
                    truncation: json!({}),
                })),
                Err(e) => Err(e.into()),
            }
        }
        Command::Certify {
            system,
            center,
            radius,
            tol,
            max_iter,
        } => {
            let sys = parse_system(&read_file(system)?)?;
            let center = parse_reals(center)?;
            let ball = BallSpec::new(center.clone(), *radius)?;
            let config = json!({
                "system": system.display().to_string(),
                "center": reals_json(&center),
                "radius": format_real(*radius),
                "tol": format_real(*tol),
                "max_iter": max_iter,
                "safety_factor": format_real(SAFETY_FACTOR),
            });
            let cert = match certified_solve(&sys, &ball, *tol, *max_iter) {
                Ok(cert) => cert,
                Err(NewtonError::SingularJacobian) => {
                    return Err(Failure::Rejected(RunReport {
                        command: "certify".into(),
                        config,
                        results: json!({
                            "accepted": false,
                            "rejection": NewtonError::SingularJacobian.to_string(),
                        }),
                        truncation: json!({}),
                    }))
                }
                Err(e) => return Err(e.into()),
            };
            let report = RunReport {
                command: "certify".into(),
                config,
                results: certificate_json(&cert),
                truncation: json!({}),
            };
            if cert.accepted {
                Ok(report)
            } else {
                Err(Failure::Rejected(report))
            }
        }
    }
}

fn verify_span_file(f: &HomogeneousForm, form: &Path, path: &Path) -> Result<RunReport, Failure> {
    let state = parse_span(&read_file(path)?)?;
    for p in state.points() {
        if p.dim() != f.num_vars() || !is_on_hypersurface(f, p)? {
            return Err(Failure::Contract(format!("span member {p} is not on the hypersurface"), None));
        }
    }
    let failures = verify_provenance(f, &state)?;
    let report = RunReport {
        command: "span-verify".into(),
        config: json!({
            "form": form.display().to_string(),
            "span_file": path.display().to_string(),
        }),
        results: json!({
            "steps": state.provenance.len(),
            "members": state.points().len(),
            "failures": points_json(&failures),
            "verified": failures.is_empty(),
        }),
        truncation: json!({}),
    };
    if failures.is_empty() {
        Ok(report)
    } else {
        Err(Failure::Contract(
            format!("{} provenance records failed to replay", failures.len()),
            Some(report),
        ))
    }
}
