use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use twext::algebra::{build_milnor_subalgebra, AlgebraRef, MilnorProfile};
use twext::cohomology::CohomologyPresentation;
use twext::io::{self, IoError, ShortExactSequence};
use twext::module::{check_ses, cyclic_module, GradedModule, ModuleRef};
use twext::presets::{self, PresetKind, PRESETS};
use twext::render::{emit_ascii, emit_svg, ChartStyle};
use twext::resolution::chart::chart_with_products;
use twext::resolution::{collapse_check, les_rank_check, minimal_resolution, read_off_groups, ExtChart, FreeResolution, ResolutionError};
use twext::scenario::{run_scenario, scenario_from_json};
use twext::twist::{build_twisted_module, TwistData, TwistTarget};

const THREADS_ENV: &str = "TWEXT_THREADS";

#[derive(Parser)]
#[command(name = "twext", version, about = "Twisted Thom modules, minimal resolutions and Adams charts")]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Opts {
    /// Required prime of the inputs (2 or 3).
    #[arg(long, global = true)]
    prime: Option<u32>,
    /// Highest Adams filtration to compute.
    #[arg(long, global = true)]
    max_s: Option<usize>,
    /// Highest internal degree to compute.
    #[arg(long, global = true, allow_negative_numbers = true)]
    max_t: Option<i32>,
    /// Write the main output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Ascii)]
    format: Format,
    /// Product classes to draw, e.g. `h0,h1` or `h0,alpha`.
    #[arg(long, global = true, value_delimiter = ',')]
    products: Option<Vec<String>>,
    /// Saved resolution to extend instead of starting over.
    #[arg(long, global = true)]
    resume: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Ascii,
    Svg,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Build or describe finite algebras.
    #[command(subcommand)]
    Algebra(AlgebraCmd),
    /// Validate and combine modules.
    #[command(subcommand)]
    Module(ModuleCmd),
    /// Build twisted Thom modules.
    #[command(subcommand)]
    Twist(TwistCmd),
    /// Compute a minimal free resolution and save it.
    Resolve {
        /// Module file or preset name.
        module: String,
    },
    /// Draw the Ext chart of a module or of a saved resolution.
    Chart { input: String },
    /// Read off homotopy groups stem by stem, assuming collapse.
    Readoff {
        input: String,
        /// Stems as `a..b` or a single stem.
        #[arg(long, default_value = "0..5")]
        stems: String,
        /// Treat h0-strings reaching this filtration as towers.
        #[arg(long)]
        s_bound: Option<usize>,
    },
    /// List the Adams differentials degree considerations allow.
    Collapse {
        input: String,
        #[arg(long)]
        max_stem: Option<i32>,
        #[arg(long, default_value_t = 4)]
        r_max: usize,
        /// Skip the h0-linearity pruning.
        #[arg(long)]
        no_h0_pruning: bool,
        /// Exit with status 1 unless no differential is possible.
        #[arg(long)]
        require: bool,
    },
    /// Check the long exact sequence in Ext of a short exact sequence.
    Lescheck { ses: String },
    /// Run scenarios.
    #[command(subcommand)]
    Scenario(ScenarioCmd),
    /// List the shipped presets.
    Presets,
}

#[derive(Subcommand)]
enum AlgebraCmd {
    /// Build the full multiplication table from a spec or profile.
    Build {
        /// Algebra spec file or preset name.
        spec: Option<String>,
        /// Milnor profile, e.g. `2,1` for A(1).
        #[arg(long, value_delimiter = ',', conflicts_with = "spec")]
        profile: Option<Vec<u32>>,
    },
    Info { algebra: String },
}

#[derive(Subcommand)]
enum ModuleCmd {
    /// Check every defining relation of the algebra on the module.
    Validate { module: String },
    Sum {
        #[arg(required = true, num_args = 2..)]
        modules: Vec<String>,
    },
    Tensor { left: String, right: String },
    Suspend {
        module: String,
        #[arg(long, allow_negative_numbers = true)]
        by: i32,
    },
    /// `A / A·{annihilators}` on one generator.
    Cyclic {
        algebra: String,
        #[arg(long, value_delimiter = ',')]
        annihilators: Vec<String>,
        #[arg(long)]
        d_max: Option<i32>,
        #[arg(long)]
        name: Option<String>,
    },
}

#[derive(Subcommand)]
enum TwistCmd {
    /// Build `M^{X,twist}` from a cohomology ring and twisting classes.
    Apply {
        /// Cohomology file or preset name.
        cohomology: String,
        #[arg(long)]
        target: String,
        /// Twisting class as `name=expression`, e.g. `b=beta`.
        #[arg(long = "class", value_parser = parse_assignment)]
        classes: Vec<(String, String)>,
        #[arg(long)]
        name: Option<String>,
    },
}

#[derive(Subcommand)]
enum ScenarioCmd {
    Run { scenario: String },
    List,
}

/// A check that ran and failed; exit status 1.
#[derive(Debug)]
struct Failure(String);

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Failure {}

fn parse_assignment(s: &str) -> Result<(String, String), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected name=value, got `{s}`"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

fn parse_stems(s: &str) -> Result<(i32, i32)> {
    let bad = || anyhow!("stems must look like `0..5` or `3`, got `{s}`");
    match s.split_once("..") {
        Some((a, b)) => Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?)),
        None => {
            let n = s.trim().parse().map_err(|_| bad())?;
            Ok((n, n))
        }
    }
}

/// The JSON behind an argument when it names an existing file.
fn read_file(arg: &str) -> Result<Option<Value>> {
    let path = Path::new(arg);
    if !path.is_file() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {arg}"))?;
    let v = io::parse_json(&text).with_context(|| format!("parsing {arg}"))?;
    Ok(Some(v))
}

fn load_module(arg: &str) -> Result<GradedModule> {
    Ok(match read_file(arg)? {
        Some(v) => io::module_from_json(&v, "$", true).with_context(|| format!("loading module {arg}"))?,
        None => presets::module(arg)?,
    })
}

fn load_algebra(arg: &str) -> Result<AlgebraRef> {
    Ok(match read_file(arg)? {
        Some(v) => io::algebra_from_json(&v, "$", true).with_context(|| format!("loading algebra {arg}"))?,
        None => presets::algebra(arg)?,
    })
}

fn load_cohomology(arg: &str) -> Result<CohomologyPresentation> {
    Ok(match read_file(arg)? {
        Some(v) => io::cohomology_from_json(&v, "$", true).with_context(|| format!("loading cohomology {arg}"))?,
        None => presets::cohomology(arg)?,
    })
}

fn load_ses(arg: &str) -> Result<ShortExactSequence> {
    Ok(match read_file(arg)? {
        Some(v) => io::ses_from_json(&v, "$", true).with_context(|| format!("loading {arg}"))?,
        None => presets::ses(arg)?,
    })
}

impl Opts {
    fn check_prime(&self, got: u32, what: &str) -> Result<()> {
        match self.prime {
            Some(p) if p != got => Err(IoError::Invalid { path: what.into(), message: format!("is over F_{got}, but --prime {p} was given") }.into()),
            _ => Ok(()),
        }
    }

    fn window(&self, m: &GradedModule) -> (usize, i32) {
        let t = self.max_t.unwrap_or_else(|| m.truncation().unwrap_or(m.min_degree() + 20));
        (self.max_s.unwrap_or(6), t)
    }

    fn products(&self, p: u32) -> Vec<String> {
        match &self.products {
            Some(v) => v.iter().filter(|s| !s.is_empty()).cloned().collect(),
            None if p == 2 => vec!["h0".into(), "h1".into()],
            None => vec!["h0".into(), "alpha".into()],
        }
    }

    fn emit(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

/// Resolve a module, or load a saved resolution, through the requested
/// window. With `--resume` the saved cells are reused.
fn resolution_for(opts: &Opts, arg: &str) -> Result<FreeResolution> {
    if let Some(v) = read_file(arg)? {
        if io::document_kind(&v, "$", true)? == "resolution" {
            let mut r = io::resolution_from_json(&v, None)?;
            opts.check_prime(r.prime().value(), arg)?;
            let s = opts.max_s.unwrap_or(r.s_max()).max(r.s_max());
            let t = opts.max_t.unwrap_or(r.t_max()).max(r.t_max());
            r.extend(s, t)?;
            return Ok(r);
        }
    }
    let m: ModuleRef = Arc::new(load_module(arg)?);
    opts.check_prime(m.prime().value(), arg)?;
    let (s, t) = opts.window(&m);
    match &opts.resume {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let v = io::parse_json(&text)?;
            let mut r = io::resolution_from_json(&v, Some(m))?;
            r.extend(s.max(r.s_max()), t.max(r.t_max()))?;
            Ok(r)
        }
        None => Ok(minimal_resolution(m, s, t)?),
    }
}

fn chart_for(opts: &Opts, arg: &str, extra: &[&str]) -> Result<ExtChart> {
    let r = resolution_for(opts, arg)?;
    let mut names = opts.products(r.prime().value());
    for e in extra {
        if !names.iter().any(|n| n == e) {
            names.push(e.to_string());
        }
    }
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    Ok(chart_with_products(&r, &refs)?)
}

fn write_module(opts: &Opts, m: &GradedModule) -> Result<()> {
    opts.emit(&io::to_json_string(&io::module_to_json(m)))
}

fn run(cli: Cli) -> Result<()> {
    let opts = &cli.opts;
    match cli.command {
        Command::Algebra(AlgebraCmd::Build { spec, profile }) => {
            let a: AlgebraRef = match (spec, profile) {
                (_, Some(bounds)) => {
                    opts.check_prime(2, "Milnor profile")?;
                    Arc::new(build_milnor_subalgebra(&MilnorProfile::new(bounds)?)?)
                }
                (Some(spec), None) => load_algebra(&spec)?,
                (None, None) => bail!(IoError::Invalid { path: "algebra build".into(), message: "give a spec or --profile".into() }),
            };
            opts.check_prime(a.prime().value(), a.name())?;
            opts.emit(&io::to_json_string(&io::algebra_to_json(&a)))?;
        }
        Command::Algebra(AlgebraCmd::Info { algebra }) => {
            let a = load_algebra(&algebra)?;
            opts.check_prime(a.prime().value(), a.name())?;
            let gens: Vec<String> =
                (0..a.num_generators()).map(|i| format!("{} ({})", a.generator_name(i), a.generator_degree(i))).collect();
            let mut text = format!(
                "{}\n  prime: {}\n  dimension: {}\n  top degree: {}\n  generators: {}\n  dims: {:?}\n",
                a.name(),
                a.prime().value(),
                a.total_dim(),
                a.top_degree(),
                gens.join(", "),
                a.dims()
            );
            if a.is_truncated() {
                text.push_str("  truncated presentation\n");
            }
            opts.emit(&text)?;
        }
        Command::Module(ModuleCmd::Validate { module }) => {
            let m = load_module(&module)?;
            opts.check_prime(m.prime().value(), &module)?;
            let rep = m.validate();
            let mut text = format!("{}: {} relations checked\n", rep.module, rep.relations_checked);
            for v in &rep.violations {
                text.push_str(&format!("  {} fails in degree {}: {} -> {}\n", v.relation, v.degree, v.witness, v.image));
            }
            opts.emit(&text)?;
            if !rep.is_valid() {
                return Err(Failure(format!("{} violates {} relation(s)", rep.module, rep.violations.len())).into());
            }
        }
        Command::Module(ModuleCmd::Sum { modules }) => {
            let mut acc = load_module(&modules[0])?;
            for arg in &modules[1..] {
                acc = acc.direct_sum(&load_module(arg)?)?;
            }
            write_module(opts, &acc)?;
        }
        Command::Module(ModuleCmd::Tensor { left, right }) => {
            let m = load_module(&left)?.tensor_product(&load_module(&right)?)?;
            write_module(opts, &m)?;
        }
        Command::Module(ModuleCmd::Suspend { module, by }) => {
            write_module(opts, &load_module(&module)?.suspend(by))?;
        }
        Command::Module(ModuleCmd::Cyclic { algebra, annihilators, d_max, name }) => {
            let a = load_algebra(&algebra)?;
            opts.check_prime(a.prime().value(), a.name())?;
            let rels = annihilators.iter().map(|s| a.parse_element(s)).collect::<Result<Vec<_>, _>>()?;
            let mut m = cyclic_module(&a, &rels, d_max)?;
            if let Some(n) = name {
                m = m.with_name(n);
            }
            write_module(opts, &m)?;
        }
        Command::Twist(TwistCmd::Apply { cohomology, target, classes, name }) => {
            let h = load_cohomology(&cohomology)?;
            let target: TwistTarget = target.parse()?;
            opts.check_prime(target.prime().value(), &target.to_string())?;
            let mut twist = TwistData::default();
            for (k, v) in &classes {
                if !target.classes().iter().any(|(c, _)| c == k) {
                    let known: Vec<&str> = target.classes().iter().map(|(c, _)| *c).collect();
                    bail!(IoError::Invalid {
                        path: format!("--class {k}"),
                        message: format!("{target} twists by {}", known.join(", ")),
                    });
                }
                twist = twist.with(k, v);
            }
            let mut m = build_twisted_module(&h, target, &twist)?;
            if let Some(n) = name {
                m = m.with_name(n);
            }
            write_module(opts, &m)?;
        }
        Command::Resolve { module } => {
            let r = resolution_for(opts, &module)?;
            let doc = io::to_json_string(&io::resolution_to_json(&r));
            let audit = r.audit();
            let summary = format!(
                "{}: resolved through s = {}, t = {}; {} generators; hash {}\n",
                r.module().name(),
                r.s_max(),
                r.t_max(),
                (0..=r.s_max()).map(|s| r.generators(s).len()).sum::<usize>(),
                io::content_hash(r.module())
            );
            match &opts.out {
                Some(path) => {
                    std::fs::write(path, doc).with_context(|| format!("writing {}", path.display()))?;
                    print!("{summary}");
                }
                None => print!("{doc}"),
            }
            if !audit.passed() {
                return Err(Failure(format!("resolution audit failed: {:?}", audit)).into());
            }
        }
        Command::Chart { input } => {
            let c = chart_for(opts, &input, &[])?;
            let text = match opts.format {
                Format::Ascii => emit_ascii(&c),
                Format::Svg => emit_svg(&c, &ChartStyle::for_prime(c.prime)),
                Format::Json => io::to_json_string(&io::chart_to_json(&c)),
            };
            opts.emit(&text)?;
        }
        Command::Readoff { input, stems, s_bound } => {
            let (lo, hi) = parse_stems(&stems)?;
            let c = chart_for(opts, &input, &["h0"])?;
            let mut groups = Vec::new();
            for stem in lo..=hi {
                groups.push(read_off_groups(&c, stem, s_bound)?);
            }
            let text = match opts.format {
                Format::Json => io::to_json_string(&serde_json::to_value(&groups)?),
                _ => groups.iter().map(|g| format!("stem {}: {g}\n", g.stem)).collect(),
            };
            opts.emit(&text)?;
        }
        Command::Collapse { input, max_stem, r_max, no_h0_pruning, require } => {
            let c = chart_for(opts, &input, &["h0"])?;
            let diffs: Vec<_> = collapse_check(&c, r_max, !no_h0_pruning)
                .into_iter()
                .filter(|d| max_stem.is_none_or(|m| d.source.0 <= m))
                .collect();
            let text = match opts.format {
                Format::Json => io::to_json_string(&json!(diffs
                    .iter()
                    .map(|d| json!({"r": d.r, "source": d.source, "target": d.target}))
                    .collect::<Vec<_>>())),
                _ if diffs.is_empty() => "no possible differentials\n".to_string(),
                _ => diffs
                    .iter()
                    .map(|d| format!("d{} ({}, {}) -> ({}, {})\n", d.r, d.source.0, d.source.1, d.target.0, d.target.1))
                    .collect(),
            };
            opts.emit(&text)?;
            if require && !diffs.is_empty() {
                return Err(Failure(format!("{} possible differential(s)", diffs.len())).into());
            }
        }
        Command::Lescheck { ses } => {
            let ses = load_ses(&ses)?;
            opts.check_prime(ses.i.target.prime().value(), &ses.name)?;
            let exact = check_ses(&ses.i, &ses.q);
            if !exact.passed() {
                return Err(Failure(format!("{} is not a short exact sequence: {exact:?}", ses.name)).into());
            }
            let s = opts.max_s.unwrap_or(6);
            let resolve = |m: &ModuleRef| -> Result<FreeResolution> {
                let t = opts.max_t.unwrap_or_else(|| m.truncation().unwrap_or(m.min_degree() + 20));
                Ok(minimal_resolution(m.clone(), s, t)?)
            };
            let (ra, rb, rc) = (resolve(&ses.i.source)?, resolve(&ses.i.target)?, resolve(&ses.q.target)?);
            let rep = les_rank_check(&ses.i, &ses.q, &ra, &rb, &rc)?;
            let text = match opts.format {
                Format::Json => io::to_json_string(&serde_json::to_value(&rep)?),
                _ => {
                    let mut t = format!("{}: {} cells\n", ses.name, rep.cells.len());
                    for c in rep.cells.iter().filter(|c| c.connecting_rank > 0) {
                        t.push_str(&format!("  connecting map at (s {}, t {}): rank {}\n", c.s, c.t, c.connecting_rank));
                    }
                    for p in &rep.problems {
                        t.push_str(&format!("  problem: {p}\n"));
                    }
                    t
                }
            };
            opts.emit(&text)?;
            if !rep.passed() {
                return Err(Failure(format!("long exact sequence check failed in {} place(s)", rep.problems.len())).into());
            }
        }
        Command::Scenario(ScenarioCmd::Run { scenario }) => {
            let sc = match read_file(&scenario)? {
                Some(v) => scenario_from_json(&v, "$")?,
                None => presets::scenario(&scenario)?,
            };
            let rep = run_scenario(&sc)?;
            let text = match opts.format {
                Format::Json => io::to_json_string(&serde_json::to_value(&rep)?),
                _ => rep.to_string(),
            };
            opts.emit(&text)?;
            if !rep.passed() {
                let n = rep.outcomes.iter().filter(|o| o.passed == Some(false)).count();
                return Err(Failure(format!("scenario {} failed {n} check(s)", rep.name)).into());
            }
        }
        Command::Scenario(ScenarioCmd::List) => {
            let text: String =
                PRESETS.iter().filter(|p| p.kind == PresetKind::Scenario).map(|p| format!("{}\n", p.name)).collect();
            opts.emit(&text)?;
        }
        Command::Presets => {
            let text: String = PRESETS
                .iter()
                .map(|p| format!("{:<24} {}{}\n", p.name, p.kind.as_str(), if p.fixture { " (fixture)" } else { "" }))
                .collect();
            opts.emit(&text)?;
        }
    }
    Ok(())
}

/// Exit status and a short kind tag for an error.
fn classify(err: &anyhow::Error) -> (u8, &'static str) {
    for cause in err.chain() {
        if cause.downcast_ref::<Failure>().is_some() {
            return (1, "check-failed");
        }
        if let Some(e) = cause.downcast_ref::<ResolutionError>() {
            return match e {
                ResolutionError::InvalidModule(_) => (1, "invalid-module"),
                ResolutionError::BeyondTruncation { .. } => (2, "beyond-truncation"),
                ResolutionError::RaiseTMax { .. } | ResolutionError::OutOfWindow { .. } => (2, "window"),
                _ => (2, "resolution"),
            };
        }
        if let Some(e) = cause.downcast_ref::<IoError>() {
            return match e {
                IoError::Json(_) => (2, "json"),
                IoError::Schema { .. } | IoError::Format { .. } | IoError::Kind { .. } => (2, "schema"),
                IoError::UnknownPreset(_) => (2, "unknown-preset"),
                IoError::HashMismatch { .. } => (2, "hash-mismatch"),
                IoError::Resolution(ResolutionError::InvalidModule(_)) => (1, "invalid-module"),
                IoError::Resolution(ResolutionError::BeyondTruncation { .. }) => (2, "beyond-truncation"),
                IoError::File(_) => (2, "file"),
                _ => (2, "invalid-input"),
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return (2, "file");
        }
    }
    (2, "invalid-input")
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = raw.trim().parse().map_err(|_| anyhow!("{THREADS_ENV} must be a positive integer, got `{raw}`"))?;
    if n <= 1 {
        twext::par::set_sequential(true);
        return Ok(());
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|()| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let (code, kind) = classify(&err);
            eprintln!("error: {err:#}");
            eprintln!("twext-error: {}", json!({"code": code, "kind": kind, "message": format!("{err:#}")}));
            ExitCode::from(code)
        }
    }
}
