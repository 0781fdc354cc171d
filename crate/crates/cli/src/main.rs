mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

use stabpair_core::energy::{energy, energy_on_ray, ray_scan, PropernessConfig, Ray};
use stabpair_core::igusa::zeta::log_zeta_det;
use stabpair_core::igusa::{
    degeneration_limit_heights, height_bounds_audit, height_formal, rnc_leading_fit, zeta, DetConvention,
};
use stabpair_core::pairstab::{
    semistable_diagonal, semistable_probe, stable_search, weight_polytope, PairSpec, StabilityVerdict, StableVariant,
};
use stabpair_core::polyrep::{builtins, GroupElement, Poly};
use stabpair_core::polyspec::{parse_pair, parse_poly, parse_sigma, SigmaSpec};
use stabpair_core::varieties::{discrepancy_table, VarietyExample};
use stabpair_core::Error;

use output::{digest_of, render, Format, Report, RunManifest, Table, Versions};

#[derive(Parser)]
#[command(
    name = "stabpair",
    version,
    about = "Stability of pairs, energies and Gaussian heights of polynomials"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Master seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Monte Carlo sample count.
    #[arg(long, global = true, default_value_t = 100_000)]
    samples: u64,
    /// Write the artifact here (plus `<out>.manifest.json`) instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format; defaults to csv for tabular commands, json otherwise.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Gaussian moment convention for determinant closed forms.
    #[arg(long, global = true, default_value = "standard", value_parser = parse_convention)]
    convention: DetConvention,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, env = "STABPAIR_THREADS")]
    threads: Option<usize>,
}

fn parse_convention(s: &str) -> Result<DetConvention, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Clone, Copy, ValueEnum)]
enum Expect {
    Semistable,
    Destabilized,
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Pair,
    Variety,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Rnc,
}

#[derive(Clone, Copy, ValueEnum)]
enum Part {
    Both,
    Resultant,
    Hyperdiscriminant,
}

#[derive(Subcommand)]
enum Command {
    /// Weight polytope of a polynomial.
    Polytope {
        #[arg(long)]
        poly: String,
    },
    /// Diagonal-torus certificate plus conjugate probing of a pair.
    Semistable {
        #[arg(long)]
        pair: String,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        /// Exit with status 1 if the verdict differs.
        #[arg(long, value_enum)]
        expect: Option<Expect>,
    },
    /// Least exponent m making the twisted pair semistable on the diagonal torus.
    StableSearch {
        #[arg(long)]
        pair: String,
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 16)]
        m_max: u32,
        #[arg(long, value_enum, default_value = "pair")]
        variant: Variant,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        /// Exit with status 1 if no exponent is found.
        #[arg(long)]
        expect_stable: bool,
    },
    /// ν and J at one group element or ray point.
    Energy {
        #[arg(long)]
        pair: String,
        /// `id:<n>`, `diag:<x0>,..`, `matrix:[[..],..]` or `ray:<l0>,..@<t>`.
        #[arg(long)]
        sigma: String,
    },
    /// ν and J along random diagonal and conjugated rays.
    EnergyScan {
        #[arg(long)]
        pair: String,
        #[arg(long, default_value_t = 32)]
        rays: usize,
        #[arg(long, default_value_t = 16)]
        conjugate_rays: usize,
        #[arg(long, default_value_t = 12)]
        decades: u32,
        #[arg(long, default_value_t = 4)]
        steps_per_decade: u32,
    },
    /// Monte Carlo estimate of the local zeta function at s.
    Zeta {
        #[arg(long)]
        poly: String,
        #[arg(long)]
        s: f64,
    },
    /// Height of a polynomial (tensor powers scale linearly).
    Height {
        #[arg(long)]
        poly: String,
        /// Also compare against the two-sided height bounds (polynomials on C^{N+1}).
        #[arg(long)]
        audit: bool,
    },
    /// Closed-form limit heights along a generic degeneration.
    Degeneration {
        #[arg(long, default_value_t = 1)]
        n: u32,
        /// `a:b` or a single value.
        #[arg(long)]
        d_range: String,
        /// Ambient projective dimension (default: d).
        #[arg(long)]
        n_proj: Option<u64>,
        /// deg Δ_X (default 2d − 2, rational normal curves).
        #[arg(long)]
        deg_delta: Option<u64>,
    },
    /// Height discrepancy table for a built-in family.
    Discrepancy {
        #[arg(long, value_enum, default_value = "rnc")]
        family: Family,
        /// `a:b` or a single value.
        #[arg(long)]
        d: String,
    },
    /// Build a family member; optionally emit its polynomials as JSON.
    Variety {
        #[arg(long, value_enum, default_value = "rnc")]
        family: Family,
        #[arg(long)]
        d: u32,
        #[arg(long)]
        emit: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "both")]
        part: Part,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Polytope { .. } => "polytope",
            Command::Semistable { .. } => "semistable",
            Command::StableSearch { .. } => "stable-search",
            Command::Energy { .. } => "energy",
            Command::EnergyScan { .. } => "energy-scan",
            Command::Zeta { .. } => "zeta",
            Command::Height { .. } => "height",
            Command::Degeneration { .. } => "degeneration",
            Command::Discrepancy { .. } => "discrepancy",
            Command::Variety { .. } => "variety",
        }
    }

    fn default_format(&self) -> Format {
        match self {
            Command::EnergyScan { .. } | Command::Degeneration { .. } | Command::Discrepancy { .. } => Format::Csv,
            _ => Format::Json,
        }
    }
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. }
            | Error::InvalidArgument(_)
            | Error::DimensionMismatch { .. }
            | Error::ShapeMismatch { .. }
            | Error::NotSumZero(_)
            | Error::NegativeScale
            | Error::EmptyInput
            | Error::PolytopeUnavailable(_)
            | Error::Json(_) => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

type Outcome = Result<Report, Failure>;

fn parse_range(s: &str) -> Result<(u64, u64), Failure> {
    let bad = || Failure::Usage(format!("range '{s}': expected a:b or a single integer"));
    let (a, b) = match s.split_once(':') {
        Some((a, b)) => (
            a.trim().parse().map_err(|_| bad())?,
            b.trim().parse().map_err(|_| bad())?,
        ),
        None => {
            let a = s.trim().parse().map_err(|_| bad())?;
            (a, a)
        }
    };
    if a > b {
        return Err(bad());
    }
    Ok((a, b))
}

fn complex_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn group_json(g: &GroupElement) -> Value {
    let m = g.matrix();
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| complex_json(m[(i, j)])).collect()))
            .collect(),
    )
}

fn verdict_json(v: &StabilityVerdict, pair: &PairSpec) -> Result<Value, Failure> {
    let witness = match &v.witness {
        None => Value::Null,
        Some(w) => json!({
            "g": group_json(&w.g),
            "lambda": w.lambda.exponents(),
            "weight_v": w.weight_v.to_string(),
            "weight_w": w.weight_w.to_string(),
            "trial": w.trial,
            "reverified": w.reverify(pair)?,
        }),
    };
    Ok(json!({
        "status": v.status,
        "trials": v.trials,
        "verification_hash": v.verification_hash,
        "witness": witness,
    }))
}

fn f(x: f64) -> String {
    format!("{x:.17e}")
}

fn run(cmd: &Command, c: &Common) -> Outcome {
    match cmd {
        Command::Polytope { poly } => {
            let p = parse_poly(poly)?;
            let np = weight_polytope(&p)?;
            let rep = np.halfspaces();
            let hs = |h: &stabpair_core::exactgeom::Halfspace| {
                json!({
                    "normal": h.normal.iter().map(ToString::to_string).collect::<Vec<_>>(),
                    "offset": h.offset.to_string(),
                })
            };
            let json = json!({
                "polytope": np.to_json(),
                "affine_dim": np.affine_dim(),
                "equalities": rep.equalities.iter().map(hs).collect::<Vec<_>>(),
                "inequalities": rep.inequalities.iter().map(hs).collect::<Vec<_>>(),
            });
            let mut header = vec!["vertex"];
            let names: Vec<&'static str> = (0..np.dim())
                .map(|i| &*Box::leak(format!("c{i}").into_boxed_str()))
                .collect();
            header.extend(names);
            let rows = np
                .vertices()
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    let mut r = vec![i.to_string()];
                    r.extend(v.coords().iter().map(ToString::to_string));
                    r
                })
                .collect();
            Ok(Report {
                json,
                table: Some(Table {
                    comment: "vertex = index; c_i = exact projected torus character coordinates".into(),
                    header,
                    rows,
                }),
                negative: false,
            })
        }
        Command::Semistable { pair, trials, expect } => {
            let p = parse_pair(pair)?;
            let diagonal = semistable_diagonal(&p)?;
            let v = semistable_probe(&p, *trials, c.seed)?;
            let destabilized = v.is_destabilized();
            let negative = match expect {
                Some(Expect::Semistable) => destabilized,
                Some(Expect::Destabilized) => !destabilized,
                None => false,
            };
            Ok(Report {
                json: json!({ "diagonal_containment": diagonal, "verdict": verdict_json(&v, &p)? }),
                table: None,
                negative,
            })
        }
        Command::StableSearch {
            pair,
            q,
            m_max,
            variant,
            trials,
            expect_stable,
        } => {
            let p = parse_pair(pair)?;
            let variant = match variant {
                Variant::Pair => StableVariant::Pair,
                Variant::Variety => StableVariant::Variety,
            };
            let s = stable_search(&p, *q, *m_max, variant, *trials, c.seed)?;
            let cross = match &s.cross_check {
                Some(v) => verdict_json(v, &p)?,
                None => Value::Null,
            };
            Ok(Report {
                json: json!({
                    "m": s.m,
                    "variant": s.variant,
                    "q": s.q,
                    "m_checked": s.m_checked,
                    "cross_check": cross,
                }),
                table: None,
                negative: *expect_stable && s.m.is_none(),
            })
        }
        Command::Energy { pair, sigma } => {
            let p = parse_pair(pair)?;
            let spec = parse_sigma(sigma)?;
            let report = match &spec {
                SigmaSpec::Element(g) => energy(&p, g)?,
                SigmaSpec::Ray { lambda, t } => energy_on_ray(&p, &Ray::diagonal(lambda.clone()), t.ln())?,
            };
            Ok(Report::json(json!({
                "sigma": group_json(&report.sigma),
                "energy": report,
            })))
        }
        Command::EnergyScan {
            pair,
            rays,
            conjugate_rays,
            decades,
            steps_per_decade,
        } => {
            let p = parse_pair(pair)?;
            let cfg = PropernessConfig {
                rays: *rays,
                conjugate_rays: *conjugate_rays,
                decades: *decades,
                steps_per_decade: *steps_per_decade,
                seed: c.seed,
            };
            let samples = ray_scan(&p, &cfg)?;
            let rows = samples
                .iter()
                .map(|s| {
                    vec![
                        s.ray.to_string(),
                        s.conjugated.to_string(),
                        s.lambda.iter().map(ToString::to_string).collect::<Vec<_>>().join(" "),
                        f(s.log_t.exp()),
                        f(s.log_t),
                        f(s.nu),
                        f(s.j),
                    ]
                })
                .collect();
            Ok(Report {
                json: json!({ "samples": samples }),
                table: Some(Table {
                    comment: "ray = ray index; conjugated = ray is g·λ(t)·g⁻¹; lambda = 1-PS exponents; t = ray parameter; \
                              nu = log ||σw||²/||w||² − log ||σv||²/||v||²; j = deg·log(||σ||²/(N+1)) − log ||σv||²/||v||²"
                        .into(),
                    header: vec!["ray", "conjugated", "lambda", "t", "log_t", "nu", "j"],
                    rows,
                }),
                negative: false,
            })
        }
        Command::Zeta { poly, s } => {
            let p = parse_poly(poly)?;
            if p.exponent() != 1 {
                return Err(Failure::Usage(
                    "zeta is defined for polynomials, not formal tensor powers".into(),
                ));
            }
            let est = zeta(p.base(), *s, c.samples, c.seed)?;
            let closed = match p.base() {
                Poly::Sparse(sp) => builtins::determinant_multiple(sp).map(|(n, coeff)| {
                    let shift = *s * coeff.norm_sqr().ln();
                    let value = |conv| (log_zeta_det(n as u32, n as u64, *s, conv) + shift).exp();
                    json!({
                        "standard": value(DetConvention::Standard),
                        "paper": value(DetConvention::Paper),
                    })
                }),
                Poly::BlackBox(_) => None,
            };
            Ok(Report::json(json!({ "zeta": est, "determinant_closed_form": closed })))
        }
        Command::Height { poly, audit } => {
            let p = parse_poly(poly)?;
            let h = height_formal(&p, c.samples, c.seed, c.convention)?;
            let audit = if *audit {
                if p.exponent() != 1 {
                    return Err(Failure::Usage("--audit needs a polynomial, not a tensor power".into()));
                }
                Some(height_bounds_audit(p.base(), c.samples, c.seed)?)
            } else {
                None
            };
            Ok(Report::json(
                json!({ "height": h, "exponent": p.exponent(), "bounds_audit": audit }),
            ))
        }
        Command::Degeneration {
            n,
            d_range,
            n_proj,
            deg_delta,
        } => {
            let (a, b) = parse_range(d_range)?;
            if *n != 1 && deg_delta.is_none() {
                return Err(Failure::Usage("--deg-delta is required when n != 1".into()));
            }
            let rows: Vec<_> = (a..=b)
                .map(|d| {
                    let dd = deg_delta.unwrap_or(2 * d.saturating_sub(1));
                    degeneration_limit_heights(*n, n_proj.unwrap_or(d), d, d * u64::from(*n + 1), dd, c.convention)
                })
                .collect::<Result<_, _>>()?;
            let fit = if *n == 1 && b >= a + 2 && a >= 2 && n_proj.is_none() && deg_delta.is_none() {
                Some(rnc_leading_fit(a, b, c.convention)?)
            } else {
                None
            };
            let table_rows = rows
                .iter()
                .map(|r| {
                    vec![
                        r.d.to_string(),
                        f(r.hf),
                        f(r.hdelta),
                        f(r.delta),
                        f(r.delta / (r.d * r.d) as f64),
                    ]
                })
                .collect();
            Ok(Report {
                json: json!({ "rows": rows, "leading_fit": fit }),
                table: Some(Table {
                    comment: format!(
                        "d = degree; hF_limit, hΔ_limit = limit heights of the resultant and hyperdiscriminant \
                         along a generic degeneration; delta = |deg_Δ·hF − deg_R·hΔ|; convention = {}",
                        c.convention
                    ),
                    header: vec!["d", "hF_limit", "hΔ_limit", "delta", "delta/d²"],
                    rows: table_rows,
                }),
                negative: false,
            })
        }
        Command::Discrepancy { family: Family::Rnc, d } => {
            let (a, b) = parse_range(d)?;
            let ds: Vec<u32> = (a..=b)
                .map(|x| u32::try_from(x).map_err(|_| Failure::Usage(format!("d = {x} is too large"))))
                .collect::<Result<_, _>>()?;
            let t = discrepancy_table(&ds, c.samples, c.seed, c.convention)?;
            let rows = t
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.d.to_string(),
                        r.deg_r.to_string(),
                        r.deg_delta.to_string(),
                        f(r.hf.h),
                        f(r.hf.stderr),
                        f(r.hdelta.h),
                        f(r.hdelta.stderr),
                        f(r.delta),
                        f(r.delta_stderr),
                        f(r.delta_over_d2),
                    ]
                })
                .collect();
            Ok(Report {
                json: serde_json::to_value(&t).map_err(|e| Failure::Runtime(e.to_string()))?,
                table: Some(Table {
                    comment: "d = curve degree; deg_R, deg_Δ = degrees of resultant and hyperdiscriminant; \
                              hF, hΔ = their heights with standard errors; delta = |deg_Δ·hF − deg_R·hΔ|"
                        .into(),
                    header: vec![
                        "d",
                        "deg_R",
                        "deg_Δ",
                        "hF",
                        "hF_stderr",
                        "hΔ",
                        "hΔ_stderr",
                        "delta",
                        "delta_stderr",
                        "delta/d²",
                    ],
                    rows,
                }),
                negative: false,
            })
        }
        Command::Variety {
            family: Family::Rnc,
            d,
            emit,
            part,
        } => {
            let ex = VarietyExample::rational_normal_curve(*d)?;
            let kind = |p: &Poly| match p {
                Poly::Sparse(s) => json!({ "kind": "symbolic", "terms": s.num_terms() }),
                Poly::BlackBox(b) => json!({ "kind": "black-box", "label": b.label() }),
            };
            if let Some(path) = emit {
                let as_json = |p: &Poly| -> Result<Value, Failure> {
                    match p {
                        Poly::Sparse(s) => Ok(serde_json::to_value(s.to_json()).expect("polynomial serializes")),
                        Poly::BlackBox(_) => Err(Failure::Usage(format!(
                            "d = {d} is evaluation-only and has no term list to emit"
                        ))),
                    }
                };
                let body = match part {
                    Part::Resultant => as_json(&ex.resultant)?,
                    Part::Hyperdiscriminant => as_json(&ex.hyperdiscriminant)?,
                    Part::Both => json!({
                        "resultant": as_json(&ex.resultant)?,
                        "hyperdiscriminant": as_json(&ex.hyperdiscriminant)?,
                    }),
                };
                let text = serde_json::to_string_pretty(&body).expect("json") + "\n";
                std::fs::write(path, text)
                    .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))?;
            }
            Ok(Report::json(json!({
                "family": ex.family,
                "n": ex.n,
                "n_proj": ex.n_proj,
                "d": ex.d,
                "deg_r": ex.deg_r,
                "deg_delta": ex.deg_delta,
                "expected_deg_r": ex.expected_deg_r(),
                "inferred_mu": ex.inferred_mu(),
                "resultant": kind(&ex.resultant),
                "hyperdiscriminant": kind(&ex.hyperdiscriminant),
            })))
        }
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let threads = cli
        .common
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, std::num::NonZeroUsize::get));
    if threads == 0 {
        eprintln!("error: --threads must be >= 1");
        return ExitCode::from(2);
    }
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
        eprintln!("error: cannot start worker pool: {e}");
        return ExitCode::from(1);
    }
    let start = Instant::now();
    let name = cli.command.name();
    let format = cli.common.format.unwrap_or_else(|| cli.command.default_format());
    let report = match run(&cli.command, &cli.common) {
        Ok(r) => r,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            return ExitCode::from(2);
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            return ExitCode::from(1);
        }
    };
    let bytes = match render(&report, name, format) {
        Ok(b) => b,
        Err(m) => {
            eprintln!("error: {m}");
            return ExitCode::from(2);
        }
    };
    match &cli.common.out {
        None => {
            use std::io::Write;
            if std::io::stdout().write_all(&bytes).is_err() {
                return ExitCode::from(1);
            }
        }
        Some(path) => {
            if let Err(e) = std::fs::write(path, &bytes) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(1);
            }
            let mut manifest = RunManifest {
                schema: output::SCHEMA,
                subcommand: name.into(),
                argv,
                seed: cli.common.seed,
                samples: cli.common.samples,
                convention: cli.common.convention.to_string(),
                format,
                threads,
                versions: Versions {
                    stabpair_cli: env!("CARGO_PKG_VERSION"),
                    stabpair_core: stabpair_core::VERSION,
                },
                wall_time_seconds: 0.0,
                outputs: vec![digest_of(path, &bytes)],
            };
            manifest.set_wall_time(start.elapsed());
            let sidecar = RunManifest::sidecar_path(path);
            let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
            if let Err(e) = std::fs::write(&sidecar, text) {
                eprintln!("error: cannot write {}: {e}", sidecar.display());
                return ExitCode::from(1);
            }
        }
    }
    if report.negative {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}
