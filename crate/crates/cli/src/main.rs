use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use phc_core::analytics::{summarize, ClassesFile};
use phc_core::exec::Execution;
use phc_core::harness::{
    parse_scenario, reproduce, run_sweep, write_trace, Exhibit, Format, Profile, ReproduceOptions, ResultTable,
    ScenarioSpec,
};
use phc_core::model::{run_replication, RunLength};

#[derive(Parser)]
#[command(name = "phcsim", version, about = "Primary health centre simulation and queueing analytics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file (its sweep axes, if any, are expanded).
    Simulate {
        scenario: PathBuf,
        #[command(flatten)]
        run: RunFlags,
        /// Write the event log of the first replication.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run every point of a scenario file's sweep.
    Sweep {
        scenario: PathBuf,
        #[command(flatten)]
        run: RunFlags,
    },
    /// Re-run the scenario behind a published exhibit and compare.
    Reproduce {
        /// table5, table6, tableC1, fig2, fig3, fig4 or interventions.
        table: String,
        #[command(flatten)]
        run: RunFlags,
    },
    /// Closed-form utilization and waiting-time estimates for a classes file.
    Analytics {
        classes: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunFlags {
    /// csv or json; defaults to the --out extension, or text on stdout.
    #[arg(long)]
    format: Option<Format>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reps: Option<u32>,
    /// Short runs with doubled tolerances.
    #[arg(long)]
    fast: bool,
    /// Exit nonzero if any comparison fails or any scenario errors.
    #[arg(long)]
    check: bool,
    /// Run replications one after another.
    #[arg(long)]
    sequential: bool,
}

impl RunFlags {
    fn execution(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::default()
        }
    }

    fn apply(&self, spec: &mut ScenarioSpec) {
        if self.fast {
            let f = RunLength::fast();
            spec.replications = f.replications;
            spec.horizon_days = f.horizon_days;
            spec.warmup_days = f.warmup_days;
        }
        if let Some(r) = self.reps {
            spec.replications = r;
        }
        if let Some(s) = self.seed {
            spec.seed = s;
        }
    }
}

fn format_for(flags: &RunFlags, out: Option<&Path>) -> Option<Format> {
    flags.format.or_else(|| {
        out.and_then(|p| p.extension())
            .and_then(|e| e.to_str())
            .and_then(|e| e.parse().ok())
    })
}

fn emit(table: &ResultTable, flags: &RunFlags, default_out: Option<&Path>) -> Result<bool> {
    let out = flags.out.as_deref().or(default_out);
    match (out, format_for(flags, out)) {
        (Some(path), fmt) => {
            let fmt = fmt.unwrap_or(Format::Csv);
            table
                .export(path, fmt)
                .with_context(|| format!("exporting to {}", path.display()))?;
            eprintln!("wrote {}", path.display());
            print!("{}", checks_only(table));
        }
        (None, Some(fmt)) => print!("{}", table.render(fmt)?),
        (None, None) => print!("{}", table.to_text()),
    }
    Ok(table.all_checks_pass() && !table.is_partial())
}

fn checks_only(table: &ResultTable) -> String {
    let mut t = table.clone();
    t.columns.clear();
    t.rows.clear();
    let text = t.to_text();
    text.lines().skip(1).map(|l| format!("{l}\n")).collect()
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Simulate { scenario, run, trace } => {
            let mut spec = parse_scenario(&scenario)?;
            run.apply(&mut spec);
            spec.validate()?;
            let trace = trace.or_else(|| spec.outputs.trace.clone());
            if let Some(path) = trace {
                let cfg = spec
                    .scenarios()?
                    .into_iter()
                    .next()
                    .map(|s| s.config)
                    .context("scenario has no grid points")??;
                let horizon = spec.run_length().horizon()?;
                let seed = phc_core::kernel::replication_seed(spec.seed, 0);
                let result = run_replication(&cfg, seed, horizon, true)?;
                write_trace(&path, result.trace.as_deref().unwrap_or_default())?;
                eprintln!("wrote {}", path.display());
            }
            let table = run_sweep(&spec, run.execution())?;
            let default_out = spec.outputs.csv.clone().or(spec.outputs.json.clone());
            emit(&table, &run, default_out.as_deref())
        }
        Command::Sweep { scenario, run } => {
            let mut spec = parse_scenario(&scenario)?;
            run.apply(&mut spec);
            spec.validate()?;
            let table = run_sweep(&spec, run.execution())?;
            for (path, fmt) in [(&spec.outputs.csv, Format::Csv), (&spec.outputs.json, Format::Json)] {
                if let Some(path) = path {
                    table.export(path, fmt)?;
                    eprintln!("wrote {}", path.display());
                }
            }
            emit(&table, &run, None)
        }
        Command::Reproduce { table, run } => {
            let exhibit: Exhibit = table.parse()?;
            let opts = ReproduceOptions {
                profile: if run.fast { Profile::Fast } else { Profile::Full },
                seed: run.seed.unwrap_or(phc_core::harness::DEFAULT_SEED),
                replications: run.reps,
                execution: run.execution(),
            };
            let table = reproduce(exhibit, &opts)?;
            emit(&table, &run, None)
        }
        Command::Analytics { classes, out } => {
            let text = fs::read_to_string(&classes).with_context(|| format!("reading {}", classes.display()))?;
            let de = &mut serde_json::Deserializer::from_str(&text);
            let file: ClassesFile = match serde_path_to_error::deserialize(de) {
                Ok(f) => f,
                Err(e) => bail!("{}: {}: {}", classes.display(), e.path(), e.inner()),
            };
            let summary = summarize(&file)?;
            let json = serde_json::to_string_pretty(&summary)?;
            match out {
                Some(path) => fs::write(&path, json).with_context(|| format!("writing {}", path.display()))?,
                None => println!("{json}"),
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let check = match &cli.command {
        Command::Simulate { run, .. } | Command::Sweep { run, .. } | Command::Reproduce { run, .. } => run.check,
        Command::Analytics { .. } => false,
    };
    match run(cli) {
        Ok(ok) if ok || !check => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
