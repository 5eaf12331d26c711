use std::path::PathBuf;
use std::process::ExitCode;

use almost_hermitian::almost_abelian::{
    classify_jordan, sample_solutions, solve_bismut_unimodular_dim4,
    solve_second_chern_parallel_lee_dim4, Problem,
};
use almost_hermitian::curvatures::Geometry;
use almost_hermitian::hermitian::AlmostHermitianStructure;
use almost_hermitian::json::{self, VerdictEntry};
use almost_hermitian::presets;
use almost_hermitian::verifier::{
    condition_flags, einstein_residuals, run_identity_suite_with_tolerance, seeded_perturbations,
    IdentityCheck,
};
use almost_hermitian::{Error, Result, EPS_REL};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "ahgeom",
    version,
    about = "Curvature reports and identity checks for left-invariant almost-Hermitian structures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Emit JSON (default).
    #[arg(long, global = true, conflicts_with = "text")]
    json: bool,

    /// Emit a short human-readable summary instead of JSON.
    #[arg(long, global = true)]
    text: bool,
}

#[derive(Args)]
struct Input {
    /// Stored preset name (see `catalog`).
    #[arg(long, conflicts_with = "file")]
    preset: Option<String>,

    /// Structure JSON: {"dim", "brackets", "metric", "J"}.
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Full curvature report of one structure.
    Report {
        #[command(flatten)]
        input: Input,
        /// Comma-separated identity ids; all of them by default.
        #[arg(long, value_delimiter = ',')]
        identities: Vec<String>,
        #[arg(long, default_value_t = EPS_REL)]
        tolerance: f64,
    },
    /// Run the identity suite; exit 0 iff every check passes.
    Verify {
        /// Preset name or `all`.
        #[arg(long, conflicts_with = "file")]
        preset: Option<String>,
        #[arg(long)]
        file: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        identities: Vec<String>,
        #[arg(long, default_value_t = EPS_REL)]
        tolerance: f64,
        /// Random frame perturbations to add per subject.
        #[arg(long, default_value_t = 0)]
        perturbations: usize,
        #[arg(long, default_value_t = 0.3)]
        amplitude: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Isomorphism class of an almost-abelian algebra.
    Classify {
        /// 3×3 matrix of ad_{e4} on the abelian ideal, e.g. "[[0,0,0],[0,1,0],[0,0,-1]]".
        #[arg(long = "A", conflicts_with = "file")]
        a: Option<String>,
        /// Almost-abelian data: {"a", "b", "v", "A"}.
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Solution families of an Einstein-type problem on unimodular almost-abelian algebras.
    Solve {
        #[arg(long, value_enum)]
        problem: ProblemArg,
        #[arg(long, value_enum)]
        constraint: Option<ConstraintArg>,
        /// Also run the randomized sampler with this many attempts.
        #[arg(long, default_value_t = 0)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// List stored presets and whether their expected values reproduce.
    Catalog,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProblemArg {
    Bismut,
    SecondChern,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConstraintArg {
    ParallelLee,
}

struct Output {
    doc: Value,
    text: String,
    passed: bool,
}

fn read_file(path: &PathBuf) -> Result<String> {
    Ok(std::fs::read_to_string(path)?)
}

fn load(input: &Input) -> Result<(String, AlmostHermitianStructure)> {
    match (&input.preset, &input.file) {
        (Some(name), _) => Ok((name.clone(), presets::preset(name)?.structure)),
        (None, Some(path)) => Ok((
            path.display().to_string(),
            json::parse_structure(&read_file(path)?)?,
        )),
        (None, None) => Err(Error::Structural("give --preset or --file".into())),
    }
}

fn suite(geo: &Geometry, ids: &[String], tolerance: f64) -> Result<Vec<IdentityCheck>> {
    run_identity_suite_with_tolerance(geo, ids, tolerance)
}

fn report(input: &Input, ids: &[String], tolerance: f64) -> Result<Output> {
    let (name, s) = load(input)?;
    let geo = Geometry::new(s)?;
    let checks = suite(&geo, ids, tolerance)?;
    let passed = checks.iter().all(|c| c.passed);
    let sc = geo.scalars();
    let ein = einstein_residuals(&geo);
    let flags = serde_json::to_value(condition_flags(&geo)).expect("plain data");
    let on: Vec<&str> = flags
        .as_object()
        .expect("object")
        .iter()
        .filter(|(_, f)| f["value"] == json!(true))
        .map(|(k, _)| k.as_str())
        .collect();
    let theta: Vec<String> = geo.theta().iter().map(|x| json::format_f64(*x)).collect();
    let text = format!(
        "{name}\n  theta = [{}]\n  s_h = {}  s_g = {}  s_w = {}  s_star = {}\n  second-Chern-Einstein residual = {:.3e}\n  flags: {}\n  identities: {}/{} passed\n",
        theta.join(", "),
        json::format_f64(sc.s_h),
        json::format_f64(sc.s_g),
        json::format_f64(sc.s_w),
        json::format_f64(sc.s_star),
        ein.second_chern_residual,
        on.join(" "),
        checks.iter().filter(|c| c.passed).count(),
        checks.len(),
    );
    Ok(Output {
        doc: json::report_document(&name, &geo, &checks),
        text,
        passed,
    })
}

#[allow(clippy::too_many_arguments)]
fn verify(
    preset: Option<&str>,
    file: Option<&PathBuf>,
    ids: &[String],
    tolerance: f64,
    perturbations: usize,
    amplitude: f64,
    seed: u64,
) -> Result<Output> {
    let bases: Vec<(String, AlmostHermitianStructure)> = match (preset, file) {
        (_, Some(path)) => vec![(
            path.display().to_string(),
            json::parse_structure(&read_file(path)?)?,
        )],
        (None | Some("all"), None) => presets::catalog()
            .into_iter()
            .map(|p| (p.name, p.structure))
            .collect(),
        (Some(name), None) => vec![(name.to_string(), presets::preset(name)?.structure)],
    };
    let mut entries = Vec::new();
    for (name, s) in bases {
        let perturbed = seeded_perturbations(&s, seed, perturbations, amplitude)?;
        let subjects = std::iter::once((name.clone(), s)).chain(
            perturbed
                .into_iter()
                .enumerate()
                .map(|(k, p)| (format!("{name}~{}", k + 1), p)),
        );
        for (n, s) in subjects {
            let geo = Geometry::new(s)?;
            entries.push(VerdictEntry {
                name: n,
                checks: suite(&geo, ids, tolerance)?,
            });
        }
    }
    let passed = entries.iter().all(|e| e.checks.iter().all(|c| c.passed));
    let mut text = String::new();
    for e in &entries {
        let failed: Vec<&str> = e.checks.iter().filter(|c| !c.passed).map(|c| c.id.as_str()).collect();
        let skipped: Vec<&str> = e.checks.iter().filter(|c| c.skipped).map(|c| c.id.as_str()).collect();
        text.push_str(&format!(
            "{:<8} {}  checks={} skipped=[{}]{}\n",
            if failed.is_empty() { "PASS" } else { "FAIL" },
            e.name,
            e.checks.len(),
            skipped.join(","),
            if failed.is_empty() {
                String::new()
            } else {
                format!(" failed=[{}]", failed.join(","))
            }
        ));
    }
    Ok(Output {
        doc: json::verdict_document(&entries, tolerance),
        text,
        passed,
    })
}

fn classify(a: Option<&str>, file: Option<&PathBuf>) -> Result<Output> {
    let label = match (a, file) {
        (Some(m), _) => {
            let m = json::parse_matrix(m)?;
            if m.shape() != (3, 3) {
                return Err(Error::Structural("--A must be a 3x3 matrix".into()));
            }
            classify_jordan(&m)
        }
        (None, Some(path)) => json::parse_almost_abelian(&read_file(path)?)?.classify(),
        (None, None) => return Err(Error::Structural("give --A or --file".into())),
    };
    Ok(Output {
        doc: json!({"format_version": json::FORMAT_VERSION, "label": label.as_str()}),
        text: format!("{label}\n"),
        passed: true,
    })
}

fn solve(problem: ProblemArg, constraint: Option<ConstraintArg>, samples: usize, seed: u64) -> Result<Output> {
    let (name, families, problem) = match (problem, constraint) {
        (ProblemArg::Bismut, None) => ("bismut", solve_bismut_unimodular_dim4(), Problem::Bismut),
        (ProblemArg::SecondChern, Some(ConstraintArg::ParallelLee)) => (
            "second-chern/parallel-lee",
            solve_second_chern_parallel_lee_dim4(),
            Problem::SecondChernParallelLee,
        ),
        (ProblemArg::SecondChern, None) => {
            return Err(Error::Unsupported(
                "second-chern is only solved with --constraint parallel-lee".into(),
            ))
        }
        (ProblemArg::Bismut, Some(_)) => {
            return Err(Error::Unsupported("bismut takes no constraint".into()))
        }
    };
    let sampler = (samples > 0).then(|| sample_solutions(problem, seed, samples));
    let mut text = String::new();
    for f in &families {
        text.push_str(&format!(
            "{:<14} {}  residual={:.1e}{}\n",
            f.class_label.as_str(),
            f.description,
            f.residual,
            if f.flags.almost_kaehler { "  almost-Kaehler" } else { "" }
        ));
    }
    let passed = sampler.as_ref().is_none_or(|r| r.unexpected.is_empty());
    if let Some(r) = &sampler {
        text.push_str(&format!(
            "sampler seed={} attempts={} converged={} excluded={} labels={:?} unexpected={:?}\n",
            r.seed, r.attempts, r.converged, r.excluded, r.labels, r.unexpected
        ));
    }
    Ok(Output {
        doc: json::solve_document(name, &families, sampler.as_ref()),
        text,
        passed,
    })
}

fn catalog() -> Result<Output> {
    let mut items = Vec::new();
    let mut text = String::new();
    let mut passed = true;
    for p in presets::catalog() {
        let checks = p.check()?;
        let ok = checks.iter().all(|c| c.passed);
        passed &= ok;
        let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.quantity.as_str()).collect();
        text.push_str(&format!(
            "{:<13} {:<12} expectations={} {}\n",
            p.name,
            p.algebra_label,
            checks.len(),
            if ok { "reproduced" } else { "MISMATCH" }
        ));
        items.push(json!({
            "name": p.name,
            "algebra": p.algebra_label,
            "dim": p.structure.dim(),
            "expectations": checks.len(),
            "reproduced": ok,
            "mismatches": failed,
        }));
    }
    Ok(Output {
        doc: json!({"format_version": json::FORMAT_VERSION, "presets": items}),
        text,
        passed,
    })
}

fn run(cli: &Cli) -> Result<Output> {
    match &cli.command {
        Command::Report { input, identities, tolerance } => report(input, identities, *tolerance),
        Command::Verify {
            preset,
            file,
            identities,
            tolerance,
            perturbations,
            amplitude,
            seed,
        } => verify(
            preset.as_deref(),
            file.as_ref(),
            identities,
            *tolerance,
            *perturbations,
            *amplitude,
            *seed,
        ),
        Command::Classify { a, file } => classify(a.as_deref(), file.as_ref()),
        Command::Solve { problem, constraint, samples, seed } => solve(*problem, *constraint, *samples, *seed),
        Command::Catalog => catalog(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let doc = json!({"error": {"kind": "usage", "message": e.render().to_string().trim()}});
            print!("{}", json::to_string(&doc));
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(out) => {
            if cli.text {
                print!("{}", out.text);
            } else {
                print!("{}", json::to_string(&out.doc));
            }
            if out.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            if cli.text {
                eprintln!("error: {e}");
            } else {
                print!("{}", json::to_string(&json::error_document(&e)));
            }
            ExitCode::from(2)
        }
    }
}
