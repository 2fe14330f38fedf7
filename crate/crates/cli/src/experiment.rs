use std::fs::{self, File};
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Subcommand};
use geomca::harness::{
    delta_eps_sweep, eta_sweep, mode_truncation, sample_size_sweep, separability_sweep,
    truncation_sets, ClusterSpec, DeltaEpsConfig, ModeTruncationConfig, SampleSizeConfig,
    SweepResult,
};
use geomca::{evaluate, GraphOptions};

#[derive(Subcommand)]
pub enum Experiment {
    /// Score R (first classes of the box fixture) against growing E_t.
    ModeTruncation(TruncationArgs),
    /// Count large components as epsilon grows on well-separated classes.
    EpsSweep(EpsSweepArgs),
    /// Precision and recall over a grid of consistency and quality thresholds.
    EtaSweep(EtaSweepArgs),
    /// Cross delta factors with epsilon percentiles.
    DeltaEpsSweep(DeltaEpsArgs),
    /// Rerun on subsamples of growing size.
    SizeSweep(SizeSweepArgs),
}

#[derive(Args)]
pub struct Common {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
pub struct Fixture {
    /// Number of Gaussian classes.
    #[arg(long)]
    classes: Option<usize>,
    #[arg(long, default_value_t = 12)]
    dim: usize,
    /// Train and holdout points per class.
    #[arg(long)]
    per_class: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    std: f64,
    /// Distance between class centres.
    #[arg(long)]
    separation: Option<f64>,
}

impl Fixture {
    fn spec(&self, classes: usize, per_class: usize, separation: f64, seed: u64) -> ClusterSpec {
        let n = self.per_class.unwrap_or(per_class);
        ClusterSpec::uniform(
            self.classes.unwrap_or(classes),
            self.dim,
            n,
            n,
            self.std,
            self.separation.unwrap_or(separation),
            seed,
        )
    }
}

#[derive(Args)]
pub struct BoxFixture {
    /// Number of classes kept from the twelve-class box fixture.
    #[arg(long, default_value_t = 12)]
    classes: usize,
    /// Multiplier on the per-class sizes.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(long, default_value_t = 1.0)]
    std: f64,
    #[arg(long, default_value_t = 10.0)]
    separation: f64,
    /// Classes shared with the reference set.
    #[arg(long, default_value_t = 7)]
    reference_classes: usize,
    /// Use random-size subsets of each added class.
    #[arg(long)]
    corrupt_seed: Option<u64>,
}

impl BoxFixture {
    fn spec(&self, seed: u64) -> ClusterSpec {
        ClusterSpec::boxes(self.scale, self.std, self.separation, seed).truncated(self.classes)
    }

    fn config(&self) -> ModeTruncationConfig {
        ModeTruncationConfig {
            reference_classes: self.reference_classes,
            t_max: self.classes.saturating_sub(1),
            corrupt_seed: self.corrupt_seed,
            ..ModeTruncationConfig::default()
        }
    }
}

#[derive(Args)]
pub struct TruncationArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    fixture: BoxFixture,
    /// Skip the improved precision and recall baseline.
    #[arg(long)]
    no_baseline: bool,
}

#[derive(Args)]
pub struct EpsSweepArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    fixture: Fixture,
    /// Inclusive range start:stop:step.
    #[arg(long, value_parser = parse_range, default_value = "0.5:40:1.975")]
    eps: Grid,
    /// Components count as large above this many points.
    #[arg(long, default_value_t = 100)]
    min_size: u64,
}

#[derive(Args)]
pub struct EtaSweepArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    fixture: BoxFixture,
    /// Index of the evaluation set E_t.
    #[arg(long, default_value_t = 6)]
    t: usize,
    #[arg(long, value_parser = parse_range, default_value = "0:1:0.1")]
    eta: Grid,
}

#[derive(Args)]
pub struct DeltaEpsArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    fixture: Fixture,
    #[arg(long, value_delimiter = ',', default_value = "0.6,0.8,1.0")]
    delta_factors: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "10,20,30")]
    percentiles: Vec<f64>,
}

#[derive(Args)]
pub struct SizeSweepArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    fixture: Fixture,
    #[arg(long, value_delimiter = ',', default_value = "100,500,1000,2500,5000")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 10.0)]
    p: f64,
}

/// An inclusive arithmetic sequence given as `start:stop:step`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

pub fn parse_range(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, step] = parts[..] else {
        return Err(format!("expected start:stop:step, got {s:?}"));
    };
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("{t:?} is not a finite number"))
    };
    let (a, b, step) = (num(a)?, num(b)?, num(step)?);
    if step <= 0.0 || b < a {
        return Err(format!("need start <= stop and step > 0 in {s:?}"));
    }
    let n = ((b - a) / step + 1e-9).floor() as usize;
    Ok(Grid((0..=n).map(|i| a + i as f64 * step).collect()))
}

fn write(out_dir: &Path, res: &SweepResult) -> anyhow::Result<()> {
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let json = out_dir.join(format!("{}.json", res.experiment));
    fs::write(&json, res.to_json_pretty() + "\n")
        .with_context(|| format!("writing {}", json.display()))?;
    let csv = out_dir.join(format!("{}.csv", res.experiment));
    let file = File::create(&csv).with_context(|| format!("creating {}", csv.display()))?;
    res.write_csv(file)
        .with_context(|| format!("writing {}", csv.display()))?;
    for check in &res.checks {
        let tag = if check.holds { "holds" } else { "FAILS" };
        println!("{tag}: {} {}", check.name, check.detail);
    }
    println!("wrote {} and {}", json.display(), csv.display());
    Ok(())
}

pub fn run(x: &Experiment) -> anyhow::Result<()> {
    match x {
        Experiment::ModeTruncation(a) => {
            let mut cfg = a.fixture.config();
            if a.no_baseline {
                cfg.ipr_k = None;
            }
            let res = mode_truncation(&a.fixture.spec(a.common.seed), &cfg)?;
            write(&a.common.out_dir, &res)
        }
        Experiment::EpsSweep(a) => {
            let spec = a.fixture.spec(7, 300, 40.0, a.common.seed);
            let res = separability_sweep(&spec, &a.eps.0, a.min_size)?;
            write(&a.common.out_dir, &res)
        }
        Experiment::EtaSweep(a) => {
            let cfg = a.fixture.config();
            let sets = truncation_sets(&a.fixture.spec(a.common.seed), &cfg)?;
            let Some(e_t) = sets.evaluation.get(a.t) else {
                return Err(crate::usage(format!(
                    "--t {} is beyond the last evaluation set {}",
                    a.t,
                    sets.evaluation.len() - 1
                )));
            };
            let streaming = GraphOptions {
                keep_edges: false,
                ..GraphOptions::default()
            };
            let ev = evaluate(&sets.reference, e_t, &sets.params(&cfg), &streaming)?;
            let res = eta_sweep(&ev, &a.eta.0, &a.eta.0)?;
            write(&a.common.out_dir, &res)
        }
        Experiment::DeltaEpsSweep(a) => {
            let spec = a.fixture.spec(7, 300, 10.0, a.common.seed);
            let cfg = DeltaEpsConfig {
                delta_factors: a.delta_factors.clone(),
                eps_percentiles: a.percentiles.clone(),
                ..DeltaEpsConfig::default()
            };
            write(&a.common.out_dir, &delta_eps_sweep(&spec, &cfg)?)
        }
        Experiment::SizeSweep(a) => {
            let spec = a.fixture.spec(2, 2500, 10.0, a.common.seed);
            let cfg = SampleSizeConfig {
                sizes: a.sizes.clone(),
                percentile: a.p,
                ..SampleSizeConfig::default()
            };
            write(&a.common.out_dir, &sample_size_sweep(&spec, &cfg)?)
        }
    }
}
