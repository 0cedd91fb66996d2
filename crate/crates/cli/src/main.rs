//! `pnf` runs the game's experiments and writes CSV/JSON for external
//! plotting. Every file output is accompanied by a `<out>.manifest.json`
//! recording the exact configuration and conventions that produced it.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use pnf_core::report::{fmt_sig, gamma_table_csv, pricing_sweep_csv, scaling_csv};
use pnf_core::*;

#[derive(Parser)]
#[command(
    name = "pnf",
    version,
    about = "Production and network formation game experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Table of link-cost intervals sustaining each symmetric degree.
    GammaRegions {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Strict-Nash verification of a profile file (exit 0 if strict, 1 if not).
    Verify {
        /// Profile JSON: {"x": [...], "g": [[0/1 ...], ...]}
        #[arg(long)]
        profile: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Seeded Monte-Carlo search for strict equilibria.
    Search {
        #[command(flatten)]
        config: ConfigArgs,
        /// Number of seeds (0..seeds) to run.
        #[arg(long, default_value_t = 100)]
        seeds: u64,
        #[arg(long, default_value_t = DEFAULT_MAX_SWEEPS)]
        max_sweeps: usize,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// JSON keeps the full profiles and reports; CSV is a summary table.
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Social optimum and sustaining prices for one configuration.
    Optimum {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Social optimum and prices over a grid of link costs.
    PricingSweep {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, default_value_t = 0.05)]
        gamma_min: f64,
        #[arg(long, default_value_t = 3.0)]
        gamma_max: f64,
        #[arg(long, default_value_t = 60)]
        gamma_steps: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Influencer-fraction scaling experiment over a list of populations.
    Scaling {
        #[command(flatten)]
        config: ConfigArgs,
        /// Comma-separated populations, e.g. 20,40,80.
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        /// Seeds per population.
        #[arg(long, default_value_t = 20)]
        seeds: u64,
        #[arg(long, default_value_t = 150)]
        max_sweeps: usize,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// Base config JSON file; individual flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Benefit spec: "log1p" or "log1p:<scale>".
    #[arg(long)]
    benefit: Option<String>,
    /// Use the alternative marginal-benefit ratio exponent rho*(1-rho).
    #[arg(long, default_value_t = false)]
    appendix_exponent: bool,
}

impl ConfigArgs {
    fn resolve(&self, default_n: usize) -> Result<GameConfig> {
        let mut cfg = match &self.config {
            Some(path) => GameConfig::from_json_file(path)?,
            None => GameConfig {
                n: default_n,
                rho: 0.8,
                c: 0.1,
                gamma: 0.5,
                benefit: BenefitSpec::log1p(1.0),
                appendix_exponent: false,
            },
        };
        if let Some(n) = self.n {
            cfg.n = n;
        }
        if let Some(rho) = self.rho {
            cfg.rho = rho;
        }
        if let Some(c) = self.c {
            cfg.c = c;
        }
        if let Some(gamma) = self.gamma {
            cfg.gamma = gamma;
        }
        if let Some(spec) = &self.benefit {
            cfg.benefit = parse_benefit(spec)?;
        }
        if self.appendix_exponent {
            cfg.appendix_exponent = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_benefit(spec: &str) -> Result<BenefitSpec> {
    let (kind, scale) = match spec.split_once(':') {
        Some((kind, scale)) => {
            let scale: f64 = scale.parse().map_err(|_| {
                Error::InvalidConfig(format!("benefit scale '{scale}' is not a number"))
            })?;
            (kind, scale)
        }
        None => (spec, 1.0),
    };
    match kind {
        "log1p" => Ok(BenefitSpec::log1p(scale)),
        other => Err(Error::InvalidConfig(format!(
            "unknown benefit kind '{other}' (available: log1p)"
        ))),
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct OutArgs {
    /// Output path; stdout when omitted (manifests are written only for files).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

/// Reproducibility record written next to every output file.
#[derive(Serialize)]
struct RunManifest {
    command: String,
    argv: Vec<String>,
    config: GameConfig,
    seeds: Vec<u64>,
    n_list: Option<Vec<usize>>,
    /// Command-specific aggregates (mean interval width, per-n search tallies).
    summary: Option<serde_json::Value>,
    tool: &'static str,
    version: &'static str,
    conventions: Conventions,
}

#[derive(Serialize)]
struct Conventions {
    marginal_ratio_exponent: &'static str,
    link_cost: &'static str,
    topology_orientation: &'static str,
    pricing_transfers: &'static str,
}

impl RunManifest {
    fn new(
        command: &str,
        config: &GameConfig,
        seeds: Vec<u64>,
        n_list: Option<Vec<usize>>,
    ) -> Self {
        RunManifest {
            command: command.to_string(),
            argv: std::env::args().collect(),
            config: config.clone(),
            seeds,
            n_list,
            summary: None,
            tool: "pnf",
            version: env!("CARGO_PKG_VERSION"),
            conventions: Conventions {
                marginal_ratio_exponent: if config.appendix_exponent {
                    "rho*(1-rho)"
                } else {
                    "1-rho"
                },
                link_cost: "outbound subscriptions only",
                topology_orientation: "peripheral/lower-index user sponsors the link",
                pricing_transfers:
                    "p per unit acquired per friend and t per subscription, paid to the subscribed side",
            },
        }
    }
}

fn emit(out: &OutArgs, payload: String, manifest: &RunManifest) -> Result<()> {
    match &out.out {
        Some(path) => {
            std::fs::write(path, payload)?;
            let manifest_path = manifest_path(path);
            std::fs::write(&manifest_path, serde_json::to_string_pretty(manifest)?)?;
        }
        None => print!("{payload}"),
    }
    Ok(())
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

fn json_rows<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut text = serde_json::to_string_pretty(rows)?;
    text.push('\n');
    Ok(text)
}

fn search_summary_csv(outcomes: &[SearchOutcome]) -> String {
    let mut out =
        String::from("seed,init,sweeps,found,classification,n_h,fraction,x_hi,x_lo,k_hi,k_lo\n");
    for o in outcomes {
        let class = o.profile.as_ref().map(classify_profile);
        let (classification, n_h, fraction, x_hi, x_lo, k_hi, k_lo) = match &class {
            Some(c) => (
                match c.kind {
                    Classification::Symmetric => "symmetric",
                    Classification::Asymmetric => "asymmetric",
                    Classification::None => "none",
                },
                c.n_h.to_string(),
                fmt_sig(c.n_h as f64 / o.profile.as_ref().unwrap().n() as f64),
                fmt_sig(c.x_hi),
                c.two_type.map(|t| fmt_sig(t.x_lo)).unwrap_or_default(),
                c.two_type.map(|t| t.k_hi.to_string()).unwrap_or_default(),
                c.two_type.map(|t| t.k_lo.to_string()).unwrap_or_default(),
            ),
            None => (
                "",
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
            ),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            o.seed,
            match o.init {
                InitKind::RandomDensity => "random_density",
                InitKind::StructuredTwoType => "structured_two_type",
            },
            o.sweeps,
            o.found(),
            classification,
            n_h,
            fraction,
            x_hi,
            x_lo,
            k_hi,
            k_lo,
        ));
    }
    out
}

#[derive(Serialize)]
struct VerifyOutput {
    report: EquilibriumReport,
    audit: Option<Vec<AuditCheck>>,
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::GammaRegions { config, out } => {
            let cfg = config.resolve(10)?;
            let table = gamma_region_table(&cfg)?;
            let payload = match out.format {
                Format::Csv => gamma_table_csv(&table),
                Format::Json => json_rows(&table.intervals)?,
            };
            let mut manifest = RunManifest::new("gamma-regions", &cfg, vec![], None);
            manifest.summary = Some(serde_json::json!({ "mean_interior_width": table.mean_width }));
            emit(&out, payload, &manifest)?;
            Ok(0)
        }
        Command::Verify {
            profile,
            config,
            out,
        } => {
            let profile = StrategyProfile::from_json_file(&profile)?;
            let cfg = config.resolve(profile.n())?;
            let report = verify_strict_nash(&profile, &cfg, None)?;
            let audit = (report.class.kind == Classification::Asymmetric)
                .then(|| structural_audit(&profile, &cfg))
                .transpose()?;
            let strict = report.is_strict();
            let output = VerifyOutput { report, audit };
            let mut payload = serde_json::to_string_pretty(&output)?;
            payload.push('\n');
            emit(
                &out,
                payload,
                &RunManifest::new("verify", &cfg, vec![], None),
            )?;
            Ok(if strict { 0 } else { 1 })
        }
        Command::Search {
            config,
            seeds,
            max_sweeps,
            out,
            format,
        } => {
            let cfg = config.resolve(10)?;
            let mut outcomes = Vec::with_capacity(seeds as usize);
            for seed in 0..seeds {
                outcomes.push(search_equilibrium(&cfg, seed, max_sweeps)?);
            }
            let payload = match format {
                Format::Csv => search_summary_csv(&outcomes),
                Format::Json => json_rows(&outcomes)?,
            };
            let manifest = RunManifest::new("search", &cfg, (0..seeds).collect(), None);
            emit(&OutArgs { out, format }, payload, &manifest)?;
            Ok(0)
        }
        Command::Optimum { config, out } => {
            let cfg = config.resolve(10)?;
            let optimum = social_optimum(&cfg)?;
            let payload = match out.format {
                Format::Csv => pricing_sweep_csv(&pricing_sweep(&cfg, &[cfg.gamma])?),
                Format::Json => {
                    let mut text = serde_json::to_string_pretty(&optimum)?;
                    text.push('\n');
                    text
                }
            };
            emit(
                &out,
                payload,
                &RunManifest::new("optimum", &cfg, vec![], None),
            )?;
            Ok(0)
        }
        Command::PricingSweep {
            config,
            gamma_min,
            gamma_max,
            gamma_steps,
            out,
        } => {
            let cfg = config.resolve(10)?;
            if gamma_steps < 2 || gamma_min.is_nan() || gamma_min <= 0.0 || gamma_max <= gamma_min {
                return Err(Error::InvalidConfig(
                    "pricing sweep needs gamma_min > 0, gamma_max > gamma_min, gamma_steps >= 2"
                        .into(),
                ));
            }
            let step = (gamma_max - gamma_min) / (gamma_steps - 1) as f64;
            let gammas: Vec<f64> = (0..gamma_steps)
                .map(|k| gamma_min + step * k as f64)
                .collect();
            let rows = pricing_sweep(&cfg, &gammas)?;
            let payload = match out.format {
                Format::Csv => pricing_sweep_csv(&rows),
                Format::Json => json_rows(&rows)?,
            };
            emit(
                &out,
                payload,
                &RunManifest::new("pricing-sweep", &cfg, vec![], None),
            )?;
            Ok(0)
        }
        Command::Scaling {
            config,
            n_list,
            seeds,
            max_sweeps,
            out,
        } => {
            let cfg = config.resolve(*n_list.first().unwrap_or(&10))?;
            let result = influencer_scaling(&cfg, &n_list, seeds as usize, max_sweeps)?;
            let payload = match out.format {
                Format::Csv => scaling_csv(&result.rows),
                Format::Json => json_rows(&result.rows)?,
            };
            let mut manifest =
                RunManifest::new("scaling", &cfg, (0..seeds).collect(), Some(n_list.clone()));
            manifest.summary = Some(serde_json::to_value(&result.summaries)?);
            emit(&out, payload, &manifest)?;
            Ok(0)
        }
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InvalidConfig(_) | Error::InvalidProfile(_) | Error::Io(_) | Error::Json(_) => 2,
        Error::NoRoot(_)
        | Error::NonFinite(_)
        | Error::NoConvergence { .. }
        | Error::ParityInfeasible { .. } => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
