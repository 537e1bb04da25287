//! Pipeline settings merged from a TOML file and command-line flags.

use std::path::{Path, PathBuf};

use anyhow::Context;
use monodecomp::analysis::{Intercept, SweepConfig};
use monodecomp::mojo::{AlignStrategy, ReferenceSide};
use monodecomp::{ComplexityConfig, DistanceMode, Linkage, TraceAggregation};
use serde::{Deserialize, Serialize};

pub const OUT_DIR_ENV: &str = "MONODECOMP_OUT_DIR";

/// Every key is optional; flags override whatever the file sets.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FileConfig {
    pub distance: Option<DistanceMode>,
    pub linkage: Option<Linkage>,
    pub step: Option<u32>,
    pub n_min: Option<usize>,
    pub n_max: Option<usize>,
    pub aggregation: Option<TraceAggregation>,
    pub strict_summation: Option<bool>,
    pub intercept: Option<Intercept>,
    pub align_strategy: Option<AlignStrategy>,
    pub reference_side: Option<ReferenceSide>,
    pub workers: Option<usize>,
    pub out_dir: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Resolved settings. `workers` and `out_dir` do not affect results and are
/// left out of manifests.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PipelineConfig {
    pub distance_mode: DistanceMode,
    pub linkage: Linkage,
    pub step: u32,
    pub n_min: usize,
    pub n_max: usize,
    pub complexity_trace_aggregation: TraceAggregation,
    pub strict_summation: bool,
    pub intercept: Intercept,
    pub align_strategy: AlignStrategy,
    pub reference_side: ReferenceSide,
    #[serde(skip)]
    pub workers: Option<usize>,
    #[serde(skip)]
    pub out_dir: Option<PathBuf>,
}

/// Flag values shared by the pipeline subcommands; `None` means "not given".
#[derive(Debug, Clone, Default, clap::Args)]
pub struct PipelineFlags {
    /// Similarity-to-distance conversion: row-euclidean or one-minus-sym.
    #[arg(long)]
    pub distance: Option<DistanceMode>,
    /// Linkage: average, single or complete.
    #[arg(long)]
    pub linkage: Option<Linkage>,
    /// Trace aggregation for functionality complexity: mean or max.
    #[arg(long)]
    pub aggregation: Option<TraceAggregation>,
    /// Also score traces that stay inside one cluster.
    #[arg(long)]
    pub strict_summation: bool,
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct SweepFlags {
    /// Weight grid step in percent; must divide 100.
    #[arg(long)]
    pub step: Option<u32>,
    /// Smallest number of clusters.
    #[arg(long)]
    pub n_min: Option<usize>,
    /// Largest number of clusters.
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Regression constant: none or pseudo-inverse.
    #[arg(long)]
    pub intercept: Option<Intercept>,
}

impl PipelineConfig {
    /// Defaults overlaid with the file, then with `out_dir`, then the
    /// environment for the output directory.
    pub fn from_file(file: FileConfig, out_dir: Option<PathBuf>) -> Self {
        PipelineConfig {
            distance_mode: file.distance.unwrap_or_default(),
            linkage: file.linkage.unwrap_or_default(),
            step: file.step.unwrap_or(10),
            n_min: file.n_min.unwrap_or(3),
            n_max: file.n_max.unwrap_or(10),
            complexity_trace_aggregation: file.aggregation.unwrap_or_default(),
            strict_summation: file.strict_summation.unwrap_or(false),
            intercept: file.intercept.unwrap_or_default(),
            align_strategy: file.align_strategy.unwrap_or_default(),
            reference_side: file.reference_side.unwrap_or_default(),
            workers: file.workers,
            out_dir: out_dir.or(file.out_dir).or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from)),
        }
    }

    pub fn apply(&mut self, flags: &PipelineFlags) {
        if let Some(d) = flags.distance {
            self.distance_mode = d;
        }
        if let Some(l) = flags.linkage {
            self.linkage = l;
        }
        if let Some(a) = flags.aggregation {
            self.complexity_trace_aggregation = a;
        }
        self.strict_summation |= flags.strict_summation;
    }

    pub fn apply_sweep(&mut self, flags: &SweepFlags) {
        self.step = flags.step.unwrap_or(self.step);
        self.n_min = flags.n_min.unwrap_or(self.n_min);
        self.n_max = flags.n_max.unwrap_or(self.n_max);
        self.workers = flags.workers.or(self.workers);
        self.intercept = flags.intercept.unwrap_or(self.intercept);
    }

    pub fn complexity(&self) -> ComplexityConfig {
        ComplexityConfig { aggregation: self.complexity_trace_aggregation, strict_summation: self.strict_summation }
    }

    pub fn sweep(&self) -> SweepConfig {
        SweepConfig {
            n_range: self.n_min..=self.n_max,
            step: self.step,
            distance: self.distance_mode,
            linkage: self.linkage,
            complexity: self.complexity(),
            workers: self.workers,
        }
    }
}
