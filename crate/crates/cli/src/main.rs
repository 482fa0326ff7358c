use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;

use uep::baseline::BaselineCodebook;
use uep::codebook::{level_label, verify_codebook, LayeredCodebook, VerificationReport};
use uep::config::Config;
use uep::construct::{build, BuildError};
use uep::decoder::{theorem1_check_sampled, theorem2_check};
use uep::format::{parse_codebook, reference_codebook, write_codebook};
use uep::sim::{simulate, ChannelKind, SchemeSelection};

#[derive(Parser, Debug)]
#[command(name = "uep", version, about = "Layered unequal-error-protection codebooks")]
struct Cli {
    /// Key=value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (codebook for `build`, CSV for `simulate`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the construction, theorem-check or simulation seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Cap on candidates examined by `build`.
    #[arg(long, global = true)]
    budget: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a codebook and print its distance table.
    Build,
    /// Check a codebook file against the distance rules.
    Verify {
        /// Codebook file; defaults to `codebook.path` or the shipped codebook.
        codebook: Option<PathBuf>,
    },
    /// Exercise the in-radius and out-of-radius decoding guarantees.
    CheckTheorems {
        codebook: Option<PathBuf>,
        /// Largest error weight enumerated exhaustively.
        #[arg(long, default_value_t = 2)]
        exhaustive_weight: usize,
        /// Random patterns per level and weight above the exhaustive range.
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        /// Trials for the out-of-radius check.
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
    },
    /// Run the Monte Carlo link simulation and write CSV.
    Simulate {
        codebook: Option<PathBuf>,
        #[arg(long)]
        channel: Option<ChannelKind>,
        #[arg(long)]
        scheme: Option<SchemeSelection>,
        /// Trials per channel point.
        #[arg(long)]
        trials: Option<u64>,
    },
    /// Print the comparison scheme's indicator book and BCH codes.
    BaselineInfo,
}

enum Failure {
    /// Verification or theorem check failed.
    Check(String),
    /// Bad usage, config or input file.
    Usage(String),
    Infeasible(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Check(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Infeasible(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Check(m) | Failure::Usage(m) | Failure::Infeasible(m) => m,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("UEP_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let mut cfg = match &cli.config {
        Some(path) => Config::load(path).map_err(usage)?,
        None => Config::default(),
    };
    if let Some(w) = cli.workers {
        if w == 0 {
            return Err(usage("--workers must be at least 1"));
        }
        cfg.sim.workers = w;
        cfg.construction.threads = w;
    }
    if let Some(b) = cli.budget {
        cfg.construction.max_candidates = b;
    }
    match &cli.command {
        Command::Build => cmd_build(cli, cfg),
        Command::Verify { codebook } => cmd_verify(&load_codebook(codebook.as_deref(), &cfg)?),
        Command::CheckTheorems {
            codebook,
            exhaustive_weight,
            samples,
            trials,
        } => {
            let cb = load_codebook(codebook.as_deref(), &cfg)?;
            cmd_check(&cb, *exhaustive_weight, *samples, *trials, cli.seed.unwrap_or(1))
        }
        Command::Simulate {
            codebook,
            channel,
            scheme,
            trials,
        } => {
            if let Some(c) = channel {
                cfg.set_channel(*c);
            }
            if let Some(s) = scheme {
                cfg.sim.schemes = *s;
            }
            if let Some(t) = trials {
                cfg.sim.trials_per_point = *t;
            }
            if let Some(s) = cli.seed {
                cfg.sim.master_seed = s;
            }
            let cb = load_codebook(codebook.as_deref(), &cfg)?;
            cmd_simulate(cli.out.as_deref(), &cfg, &cb)
        }
        Command::BaselineInfo => cmd_baseline_info(&cfg),
    }
}

fn load_codebook(explicit: Option<&Path>, cfg: &Config) -> Result<LayeredCodebook, Failure> {
    match explicit.or(cfg.codebook_path.as_deref()) {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
            parse_codebook(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
        }
        None => {
            info!("using the shipped reference codebook");
            Ok(reference_codebook())
        }
    }
}

fn write_atomic(path: &Path, contents: &str) -> Result<(), Failure> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
    tmp.write_all(contents.as_bytes())
        .and_then(|_| tmp.flush())
        .map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
    tmp.persist(path)
        .map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}

fn distance_table(cb: &LayeredCodebook) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "n={} levels={} codewords={}", cb.blocklength(), cb.levels(), cb.total_codewords());
    let _ = writeln!(s, "level  t  size  d_min  2t+1");
    for spec in cb.level_specs() {
        let dmin = cb
            .intra_dmin(spec.level)
            .map_or_else(|| "-".to_string(), |d| d.to_string());
        let _ = writeln!(
            s,
            "{:<5} {:>2} {:>5} {:>6} {:>5}",
            level_label(spec.level),
            spec.target_t,
            spec.group_size,
            dmin,
            spec.required_distance()
        );
    }
    let _ = write!(s, "inter-level distance\n     ");
    for q in 1..=cb.levels() {
        let _ = write!(s, "{:>4}", level_label(q));
    }
    s.push('\n');
    for p in 1..=cb.levels() {
        let _ = write!(s, "{:<5}", level_label(p));
        for q in 1..=cb.levels() {
            if p == q {
                let _ = write!(s, "{:>4}", "-");
            } else {
                let _ = write!(s, "{:>4}", cb.inter_distance(p, q));
            }
        }
        s.push('\n');
    }
    s
}

fn cmd_build(cli: &Cli, mut cfg: Config) -> Result<(), Failure> {
    if let Some(seed) = cli.seed {
        cfg.construction.seed = seed;
    }
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.codebook_path.clone())
        .ok_or_else(|| usage("build needs --out or codebook.path"))?;
    let c = &cfg.construction;
    info!(
        "building n={} levels={} policy={} seed={} budget={}",
        c.blocklength,
        c.levels.len(),
        c.policy,
        c.seed,
        c.max_candidates
    );
    let cb = match build(c) {
        Ok(cb) => cb,
        Err(BuildError::Infeasible(report)) => return Err(Failure::Infeasible(report.to_string())),
        Err(BuildError::Invalid(e)) => return Err(usage(e)),
    };
    write_atomic(&out, &write_codebook(&cb))?;
    print!("{}", distance_table(&cb));
    println!("wrote {}", out.display());
    Ok(())
}

fn print_report(report: &VerificationReport) {
    println!(
        "weak separation rule: {}",
        if report.weak_rule_passed() { "pass" } else { "FAIL" }
    );
    println!(
        "strong separation rule: {}",
        if report.strong_rule_passed() { "pass" } else { "FAIL" }
    );
    for v in &report.violations {
        println!("violation: {v}");
    }
}

fn cmd_verify(cb: &LayeredCodebook) -> Result<(), Failure> {
    print!("{}", distance_table(cb));
    let report = verify_codebook(cb);
    print_report(&report);
    if report.passed() {
        println!("codebook verified");
        Ok(())
    } else {
        Err(Failure::Check(format!(
            "{} violation(s); first: {}",
            report.violations.len(),
            report
                .violations
                .first()
                .map(ToString::to_string)
                .unwrap_or_else(|| "stored metadata mismatch".into())
        )))
    }
}

fn cmd_check(
    cb: &LayeredCodebook,
    exhaustive_weight: usize,
    samples: u64,
    trials: u64,
    seed: u64,
) -> Result<(), Failure> {
    let t1 = theorem1_check_sampled(cb, exhaustive_weight, samples, seed).map_err(|e| Failure::Check(e.to_string()))?;
    println!("in-radius: {} patterns decoded", t1.checked);
    if let Some(c) = &t1.counterexample {
        return Err(Failure::Check(format!("in-radius counterexample: {c}")));
    }
    let t2 = theorem2_check(cb, trials, seed).map_err(|e| Failure::Check(e.to_string()))?;
    println!(
        "out-of-radius: {} trials, {} misclassified",
        t2.checked, t2.misclassified
    );
    if let Some(c) = &t2.counterexample {
        return Err(Failure::Check(format!("out-of-radius counterexample: {c}")));
    }
    println!("no counterexamples");
    Ok(())
}

fn cmd_simulate(out: Option<&Path>, cfg: &Config, cb: &LayeredCodebook) -> Result<(), Failure> {
    let needs_baseline = cfg.sim.schemes != SchemeSelection::Proposed;
    let sizes: Vec<usize> = cb.groups().iter().map(Vec::len).collect();
    let baseline = if needs_baseline {
        let t_map = match &cfg.baseline_t_map {
            Some(t) => t.clone(),
            None => cb.level_specs().iter().map(|s| s.target_t).collect(),
        };
        Some(BaselineCodebook::new(&t_map, &sizes, cfg.indicator_seed).map_err(usage)?)
    } else {
        None
    };
    let result = simulate(&cfg.sim, cb, baseline.as_ref()).map_err(|e| match e {
        uep::Error::Precondition(_) => Failure::Check(e.to_string()),
        e => usage(e),
    })?;
    let csv = result.to_csv();
    match out {
        Some(path) => {
            write_atomic(path, &csv)?;
            let mut meta = path.as_os_str().to_owned();
            meta.push(".meta");
            write_atomic(Path::new(&meta), &result.metadata_text())?;
            println!("wrote {} rows to {}", result.rows.len(), path.display());
        }
        None => {
            print!("{csv}");
            eprint!("{}", result.metadata_text());
        }
    }
    Ok(())
}

fn cmd_baseline_info(cfg: &Config) -> Result<(), Failure> {
    let sizes: Vec<usize> = cfg.construction.levels.iter().map(|l| l.group_size).collect();
    let bcb = BaselineCodebook::new(&cfg.baseline_t_map(), &sizes, cfg.indicator_seed).map_err(usage)?;
    let ind = bcb.indicators();
    println!(
        "indicator: {} bits, d_ind={} (seed {})",
        ind.length(),
        ind.min_distance(),
        cfg.indicator_seed
    );
    println!("level  indicator       BCH(n,k,t)  generator  messages");
    for level in 1..=bcb.levels() {
        let code = bcb.code(level);
        println!(
            "{:<5}  {}  ({},{},{})  {:>10}  {}",
            level_label(level),
            ind.word(level),
            code.n(),
            code.k(),
            code.t(),
            format!("{:#x}", code.generator()),
            bcb.group_size(level)
        );
    }
    println!("blocklength: {}", bcb.blocklength());
    Ok(())
}
