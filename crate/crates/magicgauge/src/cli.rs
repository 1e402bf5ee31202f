//! Command-line front end: `run`, `oracle`, `tables` and `check`.
//!
//! Exit codes: 0 pass, 1 protocol failure, 2 usage or configuration error.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::anyon_algebra::{
    builtin_interfaces, check_condensable, fmt_coef, named_algebra, parse_sequence, parse_state, run_sequence, theory,
    CondensableAlgebra,
};
use crate::engine::Backend;
use crate::error::{Error, Result};
use crate::geometry::Lattice;
use crate::protocol::gauge::{estimated_support, SUPPORT_LIMIT};
use crate::protocol::pipeline::{parse_patch, run_pipeline, Extraction, PipelineConfig};
use crate::protocol::teleport::PsiSpec;
use crate::protocol::Mode;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Log filter variable, e.g. `MAGICGAUGE_LOG=debug`.
pub const LOG_ENV: &str = "MAGICGAUGE_LOG";

#[derive(Debug, Parser)]
#[command(name = "magicgauge", version, about = "Magic-state preparation by gauging and anyon condensation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the lattice pipeline and write `report.json`.
    Run(RunArgs),
    /// Push a logical anyon state through gauge/condense steps.
    Oracle {
        /// `SX`, `TX` or `THEORY:label=coef;...`.
        #[arg(long)]
        state: String,
        /// Comma separated `gauge:IFACE` / `condense:IFACE` steps.
        #[arg(long, default_value = "")]
        seq: String,
    },
    /// Print the anyon table of a theory.
    Tables {
        #[arg(long, default_value = "ZD4")]
        theory: String,
        #[arg(long)]
        json: bool,
    },
    /// Check an algebra, or every builtin interface when none is given.
    Check {
        /// A named algebra (`L1`, `L2`, interface names) or an expression
        /// such as `1+e_G+m_R`.
        #[arg(long)]
        algebra: Option<String>,
        /// Theory for expressions.
        #[arg(long, default_value = "ZD4")]
        theory: String,
    },
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct RunArgs {
    /// TOML file with `PipelineConfig` keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Patch size `WxH`.
    #[arg(long)]
    pub patch: Option<String>,
    #[arg(long, value_parser = ["dense", "sparse"])]
    pub backend: Option<String>,
    #[arg(long, value_parser = ["post-select", "sample"])]
    pub mode: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_parser = ["disentangle", "condense"])]
    pub option: Option<String>,
    #[arg(long)]
    pub standardize: bool,
    #[arg(long, value_parser = ["plus", "zero", "random"])]
    pub psi: Option<String>,
    /// Output directory for `report.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Record wall-clock time per stage.
    #[arg(long)]
    pub timing: bool,
}

impl RunArgs {
    /// File values (or defaults) overridden by flags.
    pub fn resolve(&self) -> Result<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
                PipelineConfig::from_toml(&text)?
            }
            None => PipelineConfig::default(),
        };
        if let Some(p) = &self.patch {
            cfg.patch = p.clone();
        }
        if let Some(b) = &self.backend {
            cfg.backend = if b == "dense" { Backend::Dense } else { Backend::Sparse };
        }
        if let Some(m) = &self.mode {
            cfg.mode = if m == "sample" { Mode::Sample } else { Mode::PostSelect };
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.option {
            cfg.option = if o == "disentangle" { Extraction::Disentangle } else { Extraction::Condense };
        }
        if self.standardize {
            cfg.standardize = true;
        }
        if let Some(p) = &self.psi {
            cfg.psi = match p.as_str() {
                "zero" => PsiSpec::Zero,
                "random" => PsiSpec::Random,
                _ => PsiSpec::Plus,
            };
        }
        if let Some(o) = &self.out {
            cfg.output_dir = o.display().to_string();
        }
        if self.timing {
            cfg.record_timing = true;
        }
        let (w, h) = parse_patch(&cfg.patch)?;
        let est = estimated_support(&Lattice::new(w, h)?);
        if est > SUPPORT_LIMIT {
            return Err(Error::TooLarge(est));
        }
        Ok(cfg)
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    match cli.command {
        Command::Run(a) => cmd_run(&a),
        Command::Oracle { state, seq } => cmd_oracle(&state, &seq),
        Command::Tables { theory, json } => cmd_tables(&theory, json),
        Command::Check { algebra, theory } => cmd_check(algebra.as_deref(), &theory),
    }
}

pub fn cmd_run(args: &RunArgs) -> i32 {
    let cfg = match args.resolve() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let report = match run_pipeline(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_FAIL;
        }
    };
    let dir = PathBuf::from(&cfg.output_dir);
    let path = dir.join("report.json");
    if let Err(e) = std::fs::create_dir_all(&dir).and_then(|_| std::fs::write(&path, report.to_json() + "\n")) {
        eprintln!("error: {}: {e}", path.display());
        return EXIT_USAGE;
    }
    let fid = report.final_fidelity.map_or("n/a".into(), |f| format!("{f:.12}"));
    println!(
        "{}: final fidelity {fid}, cumulative probability {:.6e}, report {}",
        if report.passed { "PASS" } else { "FAIL" },
        report.cumulative_prob,
        path.display()
    );
    for s in report.stages.iter().filter(|s| !s.passed()) {
        eprintln!("stage {} failed", s.stage);
    }
    if report.passed {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

pub fn cmd_oracle(state: &str, seq: &str) -> i32 {
    let out = parse_state(state).and_then(|s| run_sequence(&s, &parse_sequence(seq)?));
    match out {
        Ok(s) => {
            println!("{s}");
            EXIT_PASS
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

pub fn cmd_tables(name: &str, json: bool) -> i32 {
    let t = match theory(name) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    if json {
        println!("{}", serde_json::to_string_pretty(&t).expect("theory serializes"));
        return EXIT_PASS;
    }
    println!("{:<10} {:>3} {:>10}  label", "anyon", "d", "theta");
    for a in &t.anyons {
        let extra = match (&a.group_label, &a.charge) {
            (Some((c, r)), _) => format!("({c}, {r})"),
            (None, Some(ch)) => format!("{ch:?}"),
            _ => String::new(),
        };
        println!("{:<10} {:>3} {:>10}  {extra}", a.label, a.dim, fmt_coef(a.spin, true));
    }
    EXIT_PASS
}

fn resolve_algebra(spec: &str, theory_name: &str) -> Result<(crate::anyon_algebra::AnyonTheory, CondensableAlgebra)> {
    match named_algebra(spec) {
        Ok(x) => Ok(x),
        Err(Error::UnknownInterface(_)) => {
            let t = theory(theory_name)?;
            let a = CondensableAlgebra::parse(&t, spec)?;
            Ok((t, a))
        }
        Err(e) => Err(e),
    }
}

pub fn cmd_check(algebra: Option<&str>, theory_name: &str) -> i32 {
    let run = || -> Result<()> {
        match algebra {
            Some(spec) => {
                let (t, a) = resolve_algebra(spec, theory_name)?;
                println!("{a} in {}", t.name);
                println!("{}", check_condensable(&t, &a)?);
            }
            None => {
                for i in builtin_interfaces() {
                    let t = theory(&i.parent)?;
                    let a = i.algebra(&t)?;
                    let bad = i.dimension_violations()?;
                    let dims = if bad.is_empty() { "ok".to_string() } else { bad.join(", ") };
                    println!("{} ({} -> {}): {}; lift dimensions: {dims}", i.name, i.parent, i.child, check_condensable(&t, &a)?);
                }
            }
        }
        Ok(())
    };
    match run() {
        Ok(()) => EXIT_PASS,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}
