use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use rcl::curriculum::CurriculumTrace;
use rcl::experiment::{
    execute, grid, mean_std, parse_methods, parse_reals, parse_seeds, sidecar_path, sweep_cells,
    trace_long_format, workers_from_env, write_file, Dataset, ExperimentConfig, Method, Report,
    SweepAxis, SweepBase,
};
use rcl::graph::format_real;
use rcl::synth::SynthParams;
use rcl::{Error, Result};

#[derive(Parser)]
#[command(name = "rcl", version, about = "Relational curriculum learning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic graph and its edge difficulty sidecar.
    Gen {
        #[command(flatten)]
        synth: SynthArgs,
        /// Graph file to write; the sidecar goes next to it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Train one or more methods over several seeds.
    Train {
        #[arg(long)]
        dataset: PathBuf,
        /// Injection ratio recorded in the metrics table.
        #[arg(long, default_value_t = 0.0)]
        noise_ratio: f64,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Write randomly attacked copies of a graph, one per ratio.
    Attack {
        #[arg(long)]
        dataset: PathBuf,
        /// Comma list or start:stop:step.
        #[arg(long)]
        ratios: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cross product of axis values, methods and seeds.
    Sweep {
        #[arg(long)]
        axis: SweepAxis,
        /// Comma list or start:stop:step.
        #[arg(long)]
        values: String,
        /// Graph for ratio and pace sweeps; generated from the synthetic
        /// flags when absent.
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        attack_seed: u64,
        #[command(flatten)]
        synth: SynthArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Turn trace CSVs into one long-format CSV for plotting.
    TracePlot {
        /// Trace files or directories of them.
        #[arg(long, required = true, num_args = 1..)]
        traces: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 0.5, value_parser = homophily)]
    homo: f64,
    #[arg(long, default_value_t = 2000)]
    nodes: usize,
    #[arg(long, default_value_t = 10)]
    classes: usize,
    #[arg(long, default_value_t = 10.0)]
    avg_degree: f64,
    #[arg(long, default_value_t = 16)]
    features: usize,
    #[arg(long, default_value_t = 2.5)]
    spread: f64,
    /// Generator seed.
    #[arg(long = "data-seed", visible_alias = "seed", default_value_t = 0)]
    data_seed: u64,
}

impl SynthArgs {
    fn params(&self) -> SynthParams {
        SynthParams {
            num_nodes: self.nodes,
            num_classes: self.classes,
            homo: self.homo,
            avg_degree: self.avg_degree,
            feature_dim: self.features,
            gaussian_spread: self.spread,
            seed: self.data_seed,
        }
    }
}

fn homophily(s: &str) -> std::result::Result<f64, String> {
    let h: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if h > 0.0 && h <= 1.0 {
        Ok(h)
    } else {
        Err(format!("homophily {h} outside (0, 1]"))
    }
}

#[derive(Args)]
struct RunArgs {
    /// Comma list of methods, or `all`.
    #[arg(long)]
    method: Option<String>,
    /// Comma list; `a-b` is an inclusive range.
    #[arg(long)]
    seeds: Option<String>,
    /// key=value settings file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    pace: Option<u32>,
    #[arg(long)]
    epochs: Option<u32>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    init_frac: Option<f64>,
    #[arg(long)]
    epsilon_conv: Option<f64>,
    #[arg(long)]
    recon_in_wstep: Option<bool>,
    #[arg(long)]
    smoothing: Option<bool>,
    #[arg(long)]
    loss_decay: Option<f64>,
    #[arg(long)]
    learn_mask: Option<bool>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

impl RunArgs {
    fn experiment(&self) -> Result<ExperimentConfig> {
        let mut exp = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(m) = &self.method {
            exp.methods = parse_methods(m)?;
        }
        if let Some(s) = &self.seeds {
            exp.seeds = parse_seeds(s)?;
        }
        let c = &mut exp.rcl;
        c.beta = self.beta.unwrap_or(c.beta);
        c.gamma = self.gamma.unwrap_or(c.gamma);
        c.pace = self.pace.unwrap_or(c.pace);
        c.epochs = self.epochs.unwrap_or(c.epochs);
        c.lr = self.lr.unwrap_or(c.lr);
        c.hidden = self.hidden.unwrap_or(c.hidden);
        c.init_frac = self.init_frac.unwrap_or(c.init_frac);
        c.epsilon_conv = self.epsilon_conv.unwrap_or(c.epsilon_conv);
        c.recon_in_wstep = self.recon_in_wstep.unwrap_or(c.recon_in_wstep);
        c.smoothing = self.smoothing.unwrap_or(c.smoothing);
        c.loss_decay = self.loss_decay.unwrap_or(c.loss_decay);
        c.learn_mask = self.learn_mask.unwrap_or(c.learn_mask);
        exp.validate()?;
        Ok(exp)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

/// Returns whether every requested run completed.
fn run(command: Command) -> Result<bool> {
    match command {
        Command::Gen { synth, out } => {
            let d = Dataset::synthetic(&synth.params())?;
            ensure_parent(&out)?;
            d.save(&out)?;
            println!(
                "wrote {} ({} nodes, {} edges) and {}",
                out.display(),
                d.graph.num_nodes(),
                d.graph.num_edges(),
                sidecar_path(&out).display()
            );
            match d.homophily() {
                Some(h) => println!("empirical homophily {h:.4}"),
                None => println!("empirical homophily undefined (no edges)"),
            }
            Ok(true)
        }
        Command::Train {
            dataset,
            noise_ratio,
            run,
        } => {
            let exp = run.experiment()?;
            let mut d = Dataset::load(&dataset)?;
            d.noise_ratio = noise_ratio;
            let cells = grid(&Arc::new(d), &exp, None);
            prepare_out(&run.out, &exp, &format!("# dataset={}\n", dataset.display()))?;
            let report = execute(&cells, &run.out, workers_from_env()?)?;
            print_report(&report);
            Ok(report.all_completed())
        }
        Command::Attack {
            dataset,
            ratios,
            seed,
            out,
        } => {
            let d = Dataset::load(&dataset)?;
            fs::create_dir_all(&out).map_err(|e| Error::io(out.display().to_string(), e))?;
            let stem = dataset
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "graph".into());
            for ratio in parse_reals(&ratios)? {
                let attacked = d.attacked(ratio, seed)?;
                let path = out.join(format!("{stem}.r{}.graph", format_real(ratio)));
                attacked.save(&path)?;
                println!("{} edges -> {}", attacked.graph.num_edges(), path.display());
            }
            Ok(true)
        }
        Command::Sweep {
            axis,
            values,
            dataset,
            attack_seed,
            synth,
            run,
        } => {
            let exp = run.experiment()?;
            let values = parse_reals(&values)?;
            let base = match &dataset {
                Some(path) if axis != SweepAxis::Homo => SweepBase::Loaded(Arc::new(Dataset::load(path)?)),
                Some(_) => return Err(Error::InvalidParameter("a homophily sweep generates its own graphs".into())),
                None => SweepBase::Synthetic(synth.params()),
            };
            let cells = sweep_cells(axis, &values, &base, &exp, attack_seed)?;
            let listed: Vec<String> = values.iter().map(|v| format_real(*v)).collect();
            let mut header = format!("# axis={axis}\n# values={}\n", listed.join(","));
            match &dataset {
                Some(p) => header.push_str(&format!("# dataset={}\n", p.display())),
                None => {
                    let p = synth.params();
                    header.push_str(&format!(
                        "# synthetic nodes={} classes={} homo={} avg_degree={} features={} spread={} data_seed={}\n",
                        p.num_nodes,
                        p.num_classes,
                        format_real(p.homo),
                        format_real(p.avg_degree),
                        p.feature_dim,
                        format_real(p.gaussian_spread),
                        p.seed
                    ));
                }
            }
            prepare_out(&run.out, &exp, &header)?;
            let report = execute(&cells, &run.out, workers_from_env()?)?;
            print_report(&report);
            if axis == SweepAxis::Pace {
                print_pace_spread(&report);
            }
            Ok(report.all_completed())
        }
        Command::TracePlot { traces, out } => {
            let mut files = Vec::new();
            for p in &traces {
                if p.is_dir() {
                    let entries = fs::read_dir(p).map_err(|e| Error::io(p.display().to_string(), e))?;
                    let mut found: Vec<PathBuf> = entries
                        .filter_map(|e| e.ok().map(|e| e.path()))
                        .filter(|f| f.extension().is_some_and(|x| x == "csv"))
                        .collect();
                    found.sort();
                    files.extend(found);
                } else {
                    files.push(p.clone());
                }
            }
            let mut parsed = Vec::new();
            for f in files {
                let text = fs::read_to_string(&f).map_err(|e| Error::io(f.display().to_string(), e))?;
                let id = f
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default();
                parsed.push((id, CurriculumTrace::from_csv(&text)?));
            }
            ensure_parent(&out)?;
            write_file(&out, &trace_long_format(&parsed))?;
            println!("{} traces -> {}", parsed.len(), out.display());
            Ok(true)
        }
    }
}

fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))
        }
        _ => Ok(()),
    }
}

fn prepare_out(out: &Path, exp: &ExperimentConfig, header: &str) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| Error::io(out.display().to_string(), e))?;
    write_file(&out.join("config.txt"), &format!("{header}{}", exp.to_kv()))
}

fn print_report(report: &Report) {
    for s in report.table.summarize() {
        println!(
            "{}: test {:.2} ± {:.2} (val {:.2}, {} runs)",
            s.group,
            100.0 * s.mean_test,
            100.0 * s.std_test,
            100.0 * s.mean_val,
            s.runs
        );
    }
    for f in &report.failures {
        eprintln!("failed {}: {}", f.run_id, f.error);
    }
}

fn print_pace_spread(report: &Report) {
    let means: Vec<f64> = report
        .table
        .summarize()
        .iter()
        .filter(|s| s.method == Method::Rcl)
        .map(|s| s.mean_test)
        .collect();
    if means.len() > 1 {
        let (_, std) = mean_std(&means);
        println!("std of per-pace mean test accuracy: {:.2} points", 100.0 * std);
    }
}
