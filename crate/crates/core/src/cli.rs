//! Command-line front end.
//!
//! Every subcommand writes one JSON document to stdout (or a CSV trajectory
//! with `--format csv`). Errors go to stderr as JSON with exit code 2 for
//! invalid input and 3 for numerical failures.

use std::io;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::{json, Value};

use crate::calculus::{
    continuity_residual, curve_length, metric_derivative_profile, wasserstein_gradient, MeasureCurve,
};
use crate::error::{Error, Result};
use crate::fields::scalar_from_name;
use crate::forms::{builtin_form, line_integral, LinearForm, PseudoOneForm};
use crate::green::{
    composite_potential, green_check, loop_integral, make_annulus, potential_functional, reconstruct_potential,
    refinement_study, CLOSEDNESS_SAMPLES, CLOSEDNESS_TOL, RADIAL_EPS,
};
use crate::io::{curve_to_csv, parse_curve, parse_measure, read_bytes, sha256_hex};
use crate::measure::DiscreteMeasure;
use crate::numeric::linspace;
use crate::symplectic::{builtin_hamiltonian, hamiltonian_flow, HamiltonianSystem, Scheme};
use crate::transport::{optimal_plan, SUPPORT_THRESHOLD};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "wforms",
    version,
    about = "Calculus on Wasserstein space over finitely-atomic measures"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Wasserstein distance between two measure files.
    Dist { a: PathBuf, b: PathBuf },
    /// Optimal plan, cost and dual potentials between two measure files.
    Plan { a: PathBuf, b: PathBuf },
    /// Recompute trajectory velocities by finite differences.
    Velocity {
        /// Trajectory CSV with columns t,atom,x0..,v0.. (velocities optional).
        #[arg(long)]
        curve: PathBuf,
        /// Atom weights, comma separated; uniform when omitted.
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<f64>>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        /// Also write the trajectory CSV here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Line integral of a built-in form along a trajectory.
    Integrate {
        /// gradient:<scalar>, rotational or shear; scalars are quadratic, gaussian, cubic, sum, x<k>.
        #[arg(long)]
        form: String,
        /// Trajectory CSV with columns t,atom,x0..,v0.. (velocities optional).
        #[arg(long)]
        curve: PathBuf,
        /// Atom weights, comma separated; uniform when omitted.
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<f64>>,
    },
    /// Green's theorem on the annulus over a trajectory.
    Green {
        /// gradient:<scalar>, rotational or shear; scalars are quadratic, gaussian, cubic, sum, x<k>.
        #[arg(long)]
        form: String,
        /// Trajectory CSV with columns t,atom,x0..,v0.. (velocities optional).
        #[arg(long)]
        curve: PathBuf,
        /// Inner radius of the annulus.
        #[arg(long, default_value_t = 0.1)]
        r: f64,
        /// Time by radius intervals.
        #[arg(long, default_value = "128x64")]
        grid: String,
        /// Atom weights, comma separated; uniform when omitted.
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<f64>>,
    },
    /// Integral of a form around a closed trajectory with inner-edge values.
    Loop {
        /// gradient:<scalar>, rotational or shear; scalars are quadratic, gaussian, cubic, sum, x<k>.
        #[arg(long)]
        form: String,
        /// Trajectory CSV with columns t,atom,x0..,v0.. (velocities optional).
        #[arg(long)]
        curve: PathBuf,
        /// Dilation factors for the inner-edge values.
        #[arg(long, value_delimiter = ',', default_value = "0.2,0.1,0.05")]
        radii: Vec<f64>,
        /// Largest W2 gap between the end measures of a closed curve.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Atom weights, comma separated; uniform when omitted.
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<f64>>,
    },
    /// Potential of a closed form at a measure.
    Potential {
        /// gradient:<scalar>, rotational or shear; scalars are quadratic, gaussian, cubic, sum, x<k>.
        #[arg(long)]
        form: String,
        /// Measure JSON.
        #[arg(long)]
        measure: PathBuf,
        /// Quadrature intervals along each path.
        #[arg(long, default_value_t = crate::green::DEFAULT_POTENTIAL_STEPS)]
        steps: usize,
        /// Second measure; adds the radial-then-geodesic route through it.
        #[arg(long)]
        waypoint: Option<PathBuf>,
        /// Finite-difference step for the gradient check.
        #[arg(long, default_value_t = 1e-5)]
        h: f64,
    },
    /// Hamiltonian flow of a measure.
    Flow {
        /// oscillator, linear:<scalar>, interaction:gaussian or interaction:quadratic.
        #[arg(long)]
        hamiltonian: String,
        /// Measure JSON.
        #[arg(long)]
        measure: PathBuf,
        /// Final time.
        #[arg(long = "T")]
        t_end: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        /// rk4 or implicit-midpoint.
        #[arg(long, default_value = "rk4")]
        scheme: String,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        /// Also write the trajectory CSV here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Exit code and the text destined for stdout and stderr.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Writes every float in scientific notation with 17 significant digits.
struct SciFormatter;

impl Formatter for SciFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format!("{value:.16e}").as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn to_json_string(value: &Value) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFormatter);
    value.serialize(&mut ser).expect("JSON values serialize");
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

fn error_outcome(code: i32, kind: &str, message: String) -> Outcome {
    let body = json!({ "error": { "kind": kind, "message": message, "exit_code": code } });
    Outcome {
        code,
        stdout: String::new(),
        stderr: to_json_string(&body) + "\n",
    }
}

fn failure(e: &Error) -> Outcome {
    let code = if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_INVALID };
    error_outcome(code, e.kind(), e.to_string())
}

/// Parse `args` (program name first) and run.
pub fn run<I, S>(args: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => Outcome {
                    code: EXIT_OK,
                    stdout: e.to_string(),
                    stderr: String::new(),
                },
                _ => error_outcome(EXIT_INVALID, "Usage", e.to_string()),
            };
        }
    };
    match execute(&cli.command) {
        Ok(stdout) => Outcome {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        },
        Err(e) => failure(&e),
    }
}

/// Input file with its digest.
struct Input {
    path: PathBuf,
    bytes: Vec<u8>,
}

impl Input {
    fn load(path: &Path) -> Result<Self> {
        Ok(Self {
            path: path.to_path_buf(),
            bytes: read_bytes(path)?,
        })
    }

    fn record(&self) -> Value {
        json!({ "path": self.path.display().to_string(), "sha256": sha256_hex(&self.bytes) })
    }
}

fn header(command: &str, parameters: Value, inputs: &[&Input]) -> Value {
    json!({
        "tool": "wforms",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "parameters": parameters,
        "inputs": inputs.iter().map(|i| i.record()).collect::<Vec<_>>(),
    })
}

fn document(head: Value, result: Value) -> String {
    let mut doc = result;
    doc.as_object_mut()
        .expect("results are objects")
        .insert("header".into(), head);
    to_json_string(&doc) + "\n"
}

fn positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Invalid(format!("--{name} must be positive, got {value}")))
    }
}

fn write_artifact(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Invalid(format!("cannot write {}: {e}", path.display())))
}

fn parse_grid(grid: &str) -> Result<(usize, usize)> {
    let bad = || Error::Invalid(format!("--grid must look like 128x64, got '{grid}'"));
    let (a, b) = grid.split_once('x').ok_or_else(bad)?;
    let n_t: usize = a.trim().parse().map_err(|_| bad())?;
    let n_s: usize = b.trim().parse().map_err(|_| bad())?;
    if n_t < 2 || n_s < 1 {
        return Err(bad());
    }
    Ok((n_t, n_s))
}

/// Curves without velocity columns get finite-difference velocities.
fn with_velocities(curve: MeasureCurve) -> Result<(MeasureCurve, &'static str)> {
    if curve.has_velocities() {
        Ok((curve, "given"))
    } else {
        Ok((curve.with_extracted_velocities()?, "extracted"))
    }
}

fn measure_value(mu: &DiscreteMeasure) -> Value {
    json!({ "dimension": mu.dim(), "atoms": mu.atoms(), "weights": mu.weights() })
}

fn form_for(name: &str, dim: usize) -> Result<LinearForm> {
    builtin_form(name, dim)
}

fn execute(command: &Command) -> Result<String> {
    match command {
        Command::Dist { a, b } => {
            let (ia, ib) = (Input::load(a)?, Input::load(b)?);
            let (mu, nu) = (parse_measure(&ia.bytes)?, parse_measure(&ib.bytes)?);
            let plan = optimal_plan(&mu, &nu)?;
            let head = header("dist", json!({ "support_threshold": SUPPORT_THRESHOLD }), &[&ia, &ib]);
            Ok(document(
                head,
                json!({ "w2": plan.cost().max(0.0).sqrt(), "w2_squared": plan.cost() }),
            ))
        }
        Command::Plan { a, b } => {
            let (ia, ib) = (Input::load(a)?, Input::load(b)?);
            let (mu, nu) = (parse_measure(&ia.bytes)?, parse_measure(&ib.bytes)?);
            let plan = optimal_plan(&mu, &nu)?;
            let (u, v) = plan.potentials();
            let head = header("plan", json!({ "support_threshold": SUPPORT_THRESHOLD }), &[&ia, &ib]);
            Ok(document(
                head,
                json!({
                    "gamma": plan.gamma(),
                    "cost": plan.cost(),
                    "potentials": { "u": u, "v": v },
                    "marginal_error": plan.marginal_error(),
                }),
            ))
        }
        Command::Velocity {
            curve,
            weights,
            format,
            out,
        } => {
            let input = Input::load(curve)?;
            let c = parse_curve(&input.bytes, weights.clone())?.with_extracted_velocities()?;
            let csv = curve_to_csv(&c);
            if let Some(path) = out {
                write_artifact(path, &csv)?;
            }
            if *format == Format::Csv {
                return Ok(csv);
            }
            let speeds: Vec<f64> = c
                .measures()
                .iter()
                .zip(c.velocities().unwrap())
                .map(|(m, v)| v.norm(m))
                .collect::<Result<_>>()?;
            let head = header(
                "velocity",
                json!({
                    "scheme": "central interior, one-sided endpoints",
                    "out": out.as_ref().map(|p| p.display().to_string()),
                }),
                &[&input],
            );
            Ok(document(
                head,
                json!({
                    "times": c.times(),
                    "velocities": c.velocities().unwrap().iter().map(|v| v.vectors().to_vec()).collect::<Vec<_>>(),
                    "speed": speeds,
                    "metric_derivative": metric_derivative_profile(&c)?,
                    "length": curve_length(&c)?,
                }),
            ))
        }
        Command::Integrate { form, curve, weights } => {
            let input = Input::load(curve)?;
            let (c, source) = with_velocities(parse_curve(&input.bytes, weights.clone())?)?;
            let f = form_for(form, c.dim())?;
            let q = line_integral(&f, &c)?;
            let head = header(
                "integrate",
                json!({ "form": form, "quadrature": "trapezoid", "velocities": source, "samples": c.len() }),
                &[&input],
            );
            Ok(document(
                head,
                json!({ "integral": q.value, "error_estimate": q.error_estimate }),
            ))
        }
        Command::Green {
            form,
            curve,
            r,
            grid,
            weights,
        } => {
            let (n_t, n_s) = parse_grid(grid)?;
            let input = Input::load(curve)?;
            let (c, source) = with_velocities(parse_curve(&input.bytes, weights.clone())?)?;
            let f = form_for(form, c.dim())?;
            let uniform = |n: usize| linspace(c.start(), c.end(), n);
            let base = c.resample(&uniform(n_t))?;
            let g = green_check(&f, &make_annulus(&base, *r, n_s)?)?;
            let mut grids = vec![(n_t, n_s)];
            while grids.len() < 3 && grids[0].0 % 2 == 0 && grids[0].1 % 2 == 0 && grids[0].0 >= 4 {
                let (a, b) = grids[0];
                grids.insert(0, (a / 2, b / 2));
            }
            let table = refinement_study(
                &f,
                |n| {
                    c.resample(&uniform(n))
                        .map(|x| x.without_velocities())?
                        .with_extracted_velocities()
                },
                *r,
                &grids,
            )?;
            let head = header(
                "green",
                json!({
                    "form": form,
                    "r": r,
                    "grid": { "t_intervals": n_t, "s_intervals": n_s },
                    "velocities": source,
                    "resampling": "cubic Hermite onto a uniform time grid",
                    "refinement_velocities": "finite differences of resampled positions",
                }),
                &[&input],
            );
            Ok(document(
                head,
                json!({
                    "surface_integral": g.surface,
                    "boundary_integral": g.boundary.total,
                    "boundary_parts": {
                        "outer": g.boundary.outer,
                        "inner": g.boundary.inner,
                        "final_edge": g.boundary.final_edge,
                        "initial_edge": g.boundary.initial_edge,
                    },
                    "residual": g.residual,
                    "refinement": {
                        "rows": table.rows.iter().map(|row| json!({
                            "t_intervals": row.n_t,
                            "s_intervals": row.n_s,
                            "surface_integral": row.surface,
                            "boundary_integral": row.boundary,
                            "residual": row.residual,
                        })).collect::<Vec<_>>(),
                        "surface_order": table.surface_order,
                        "boundary_order": table.boundary_order,
                    },
                }),
            ))
        }
        Command::Loop {
            form,
            curve,
            radii,
            tol,
            weights,
        } => {
            positive("tol", *tol)?;
            let input = Input::load(curve)?;
            let (c, source) = with_velocities(parse_curve(&input.bytes, weights.clone())?)?;
            let f = form_for(form, c.dim())?;
            let rep = loop_integral(&f, &c, radii, *tol)?;
            let head = header(
                "loop",
                json!({
                    "form": form,
                    "radii": radii,
                    "closure_tol": tol,
                    "velocities": source,
                    "closedness_samples": CLOSEDNESS_SAMPLES,
                    "closedness_tol": CLOSEDNESS_TOL,
                    "bound_factor": 1.1,
                }),
                &[&input],
            );
            Ok(document(
                head,
                json!({
                    "integral": rep.integral.value,
                    "error_estimate": rep.integral.error_estimate,
                    "closure_gap": rep.closure_gap,
                    "inner_edges": rep.inner.iter().map(|e| json!({
                        "r": e.r, "value": e.value, "bound": e.bound, "within_bound": e.within_bound,
                    })).collect::<Vec<_>>(),
                    "extrapolated_to_zero": rep.extrapolated,
                    "form_closed": rep.closedness.closed,
                    "closedness_defect": rep.closedness.worst_defect,
                    "counterexample": !rep.closedness.closed && rep.integral.value.abs() > 1e-6,
                }),
            ))
        }
        Command::Potential {
            form,
            measure,
            steps,
            waypoint,
            h,
        } => {
            positive("h", *h)?;
            if *steps == 0 {
                return Err(Error::Invalid("--steps must be positive".into()));
            }
            let input = Input::load(measure)?;
            let mu = parse_measure(&input.bytes)?;
            let f: Arc<dyn PseudoOneForm> = Arc::new(form_for(form, mu.dim())?);
            let rep = reconstruct_potential(f.as_ref(), &mu, *steps)?;
            let grad = wasserstein_gradient(&potential_functional(f.clone(), *steps), &mu, *h)?;
            let gradient_error = grad.max_abs_diff(&f.field_at(&mu));
            let way = waypoint.as_ref().map(|p| Input::load(p)).transpose()?;
            let composite = match &way {
                Some(w) => Some(composite_potential(f.as_ref(), &parse_measure(&w.bytes)?, &mu, *steps)?),
                None => None,
            };
            let mut inputs = vec![&input];
            if let Some(w) = &way {
                inputs.push(w);
            }
            let head = header(
                "potential",
                json!({
                    "form": form,
                    "steps": steps,
                    "radial_start": RADIAL_EPS,
                    "quadrature": "trapezoid with one Richardson step",
                    "gradient_step": h,
                    "closedness_samples": CLOSEDNESS_SAMPLES,
                    "closedness_tol": CLOSEDNESS_TOL,
                }),
                &inputs,
            );
            Ok(document(
                head,
                json!({
                    "potential": rep.value,
                    "composite_potential": composite,
                    "path_difference": composite.map(|c| (c - rep.value).abs()),
                    "gradient_max_error": gradient_error,
                    "closedness_defect": rep.closedness.worst_defect,
                }),
            ))
        }
        Command::Flow {
            hamiltonian,
            measure,
            t_end,
            dt,
            scheme,
            format,
            out,
        } => {
            positive("T", *t_end)?;
            positive("dt", *dt)?;
            let scheme: Scheme = scheme.parse()?;
            let input = Input::load(measure)?;
            let mu = parse_measure(&input.bytes)?;
            let ham = builtin_hamiltonian(hamiltonian, mu.dim())?;
            let system = HamiltonianSystem::new(mu.dim(), ham.clone())?;
            let curve = hamiltonian_flow(&system, &mu, *t_end, *dt, scheme)?;
            let csv = curve_to_csv(&curve);
            if let Some(path) = out {
                write_artifact(path, &csv)?;
            }
            if *format == Format::Csv {
                return Ok(csv);
            }
            let last = curve.measure(curve.len() - 1);
            let energy: Vec<f64> = curve.measures().iter().map(|m| ham.eval(m)).collect();
            let drift = energy.iter().map(|e| (e - energy[0]).abs()).fold(0.0, f64::max);
            let tests = [
                scalar_from_name("gaussian", mu.dim())?,
                scalar_from_name("quadratic", mu.dim())?,
            ];
            let head = header(
                "flow",
                json!({
                    "hamiltonian": hamiltonian,
                    "T": t_end,
                    "dt": dt,
                    "steps": curve.len() - 1,
                    "scheme": scheme.to_string(),
                    "collision_tol": crate::symplectic::COLLISION_TOL,
                    "out": out.as_ref().map(|p| p.display().to_string()),
                }),
                &[&input],
            );
            Ok(document(
                head,
                json!({
                    "final": measure_value(last),
                    "energy_initial": energy[0],
                    "energy_final": energy[energy.len() - 1],
                    "energy_max_drift": drift,
                    "continuity_residual": continuity_residual(&curve, &tests)?,
                }),
            ))
        }
    }
}
