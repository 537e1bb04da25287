use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use monodecomp::analysis::{best_per_n, best_per_n_csv, build_dendrogram, ols_fit, sweep, sweep_csv};
use monodecomp::mojo::{
    align_universes, average_by_source, comparison_csv, mojofm_with_reference, ComparisonRow, MaxMnoMethod,
};
use monodecomp::similarity::validate_weights;
use monodecomp::trace_file::{parse_trace_file, write_trace_file};
use monodecomp::validate::validate_monolith;
use monodecomp::workload::{generate_monolith, GenParams};
use monodecomp::{ComplexityEngine, Decomposition, Monolith, SimilarityMeasures64, Weights};
use serde_json::{json, Value};

use crate::config::{FileConfig, PipelineConfig};
use crate::manifest::{pretty, sha256_hex, Outputs};
use crate::{Cli, Command};

const DEFAULT_SWEEP_DIR: &str = "monodecomp-out";

/// Generator parameters; unset flags keep the generator defaults.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct GenArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n_entities: Option<usize>,
    #[arg(long)]
    n_functionalities: Option<usize>,
    #[arg(long)]
    traces_per_functionality: Option<usize>,
    #[arg(long)]
    max_trace_length: Option<usize>,
    /// Probability that an access is a write.
    #[arg(long)]
    write_ratio: Option<f64>,
    /// 1 keeps every functionality inside its family's entities, 0 is uniform.
    #[arg(long)]
    clusteredness_bias: Option<f64>,
    #[arg(long)]
    n_families: Option<usize>,
}

impl GenArgs {
    fn params(&self) -> GenParams {
        let d = GenParams::default();
        GenParams {
            seed: self.seed.unwrap_or(d.seed),
            n_entities: self.n_entities.unwrap_or(d.n_entities),
            n_functionalities: self.n_functionalities.unwrap_or(d.n_functionalities),
            traces_per_functionality: self.traces_per_functionality.unwrap_or(d.traces_per_functionality),
            max_trace_length: self.max_trace_length.unwrap_or(d.max_trace_length),
            write_ratio: self.write_ratio.unwrap_or(d.write_ratio),
            clusteredness_bias: self.clusteredness_bias.unwrap_or(d.clusteredness_bias),
            n_families: self.n_families.unwrap_or(d.n_families),
        }
    }
}

pub fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let mut config = PipelineConfig::from_file(file, cli.out_dir);

    match cli.command {
        Command::Validate { traces } => validate(&traces),
        Command::Decompose { traces, weights, clusters, pipeline } => {
            config.apply(&pipeline);
            decompose(&traces, weights, clusters, &config)
        }
        Command::Complexity { traces, decomposition, pipeline } => {
            config.apply(&pipeline);
            complexity(&traces, &decomposition, &config)
        }
        Command::Mojofm { decomposition, reference, strategy, reference_side } => {
            config.align_strategy = strategy.unwrap_or(config.align_strategy);
            config.reference_side = reference_side.unwrap_or(config.reference_side);
            mojo(&decomposition, &reference, &config)
        }
        Command::Sweep { traces, reference, align_strategy, pipeline, sweep } => {
            config.apply(&pipeline);
            config.apply_sweep(&sweep);
            config.align_strategy = align_strategy.unwrap_or(config.align_strategy);
            run_sweep(&traces, reference.as_deref(), config)
        }
        Command::Generate { params, output } => generate(&params.params(), output.as_deref()),
    }
}

fn read(path: &Path) -> anyhow::Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn load_monolith(path: &Path) -> anyhow::Result<(Monolith, Vec<u8>)> {
    let bytes = read(path)?;
    let m = parse_trace_file(&bytes).with_context(|| format!("parsing {}", path.display()))?;
    Ok((m, bytes))
}

fn load_decomposition(path: &Path) -> anyhow::Result<(Decomposition, Vec<u8>)> {
    let bytes = read(path)?;
    let d = Decomposition::from_json(&bytes).with_context(|| format!("parsing {}", path.display()))?;
    Ok((d, bytes))
}

fn validate(traces: &Path) -> anyhow::Result<ExitCode> {
    let (m, _) = load_monolith(traces)?;
    let report = validate_monolith(&m);
    print!("{}", pretty(&report)?);
    Ok(if report.is_accepted() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn decompose(traces: &Path, weights: Weights, clusters: usize, config: &PipelineConfig) -> anyhow::Result<ExitCode> {
    validate_weights(&weights, 1)?;
    let (m, _) = load_monolith(traces)?;
    let measures = SimilarityMeasures64::compute(&m);
    let dendrogram = build_dendrogram(&measures, &weights, config.distance_mode, config.linkage)?;
    let d = dendrogram.cut(clusters)?;
    let json = d.to_json();
    if let Some(dir) = &config.out_dir {
        let mut out = Outputs::create(dir)?;
        out.write("decomposition.json", &json)?;
        out.write("dendrogram.json", dendrogram.to_json())?;
    }
    print!("{json}");
    Ok(ExitCode::SUCCESS)
}

fn complexity(traces: &Path, decomposition: &Path, config: &PipelineConfig) -> anyhow::Result<ExitCode> {
    let (m, _) = load_monolith(traces)?;
    let (d, _) = load_decomposition(decomposition)?;
    d.check_partition(&m.entity_set())?;
    let report = ComplexityEngine::<f64>::new(&m, config.complexity()).report(&d)?;
    let json = pretty(&report.to_json())?;
    if let Some(dir) = &config.out_dir {
        let mut out = Outputs::create(dir)?;
        out.write("complexity.json", &json)?;
        out.write("complexity.csv", report.to_csv())?;
    }
    if report.exceeds_max() {
        eprintln!("warning: uniform complexity above 1; the singleton decomposition is not the maximum here");
    }
    print!("{json}");
    Ok(ExitCode::SUCCESS)
}

fn mojo(decomposition: &Path, reference: &Path, config: &PipelineConfig) -> anyhow::Result<ExitCode> {
    let (a, _) = load_decomposition(decomposition)?;
    let (b, _) = load_decomposition(reference)?;
    let (a, b) = align_universes(&a, &b, config.align_strategy)?;
    let result = mojofm_with_reference(&a, &b, config.reference_side)?;
    println!("mno {}", result.mno);
    println!("maxMno {}", result.max_mno);
    println!("mojoFm {}", result.formatted());
    if result.max_method == MaxMnoMethod::Constructive {
        println!("note: maxMno from the closed form (universe above enumeration size)");
    }
    Ok(ExitCode::SUCCESS)
}

fn run_sweep(traces: &Path, reference: Option<&Path>, config: PipelineConfig) -> anyhow::Result<ExitCode> {
    let (m, trace_bytes) = load_monolith(traces)?;
    let expert = reference.map(load_decomposition).transpose()?;

    let records = sweep::<f64>(&m, &config.sweep())?;
    let best = best_per_n(&records);
    let dir = config.out_dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_SWEEP_DIR));
    let mut out = Outputs::create(&dir)?;
    out.write("sweep.csv", sweep_csv(&records))?;
    out.write("best_per_n.csv", best_per_n_csv(&best))?;
    let best_json: BTreeMap<String, Value> = best
        .iter()
        .map(|(n, r)| {
            let entry = json!({
                "weights": r.weights,
                "uniformComplexity": r.uniform_complexity,
                "decomposition": r.decomposition,
            });
            (n.to_string(), entry)
        })
        .collect();
    out.write("best_decompositions.json", pretty(&best_json)?)?;

    let mut findings = Vec::new();
    let above_one = records.iter().filter(|r| r.uniform_complexity > 1.0).count();
    if above_one > 0 {
        findings.push(json!({
            "code": "UNIFORM_ABOVE_ONE",
            "message": format!("{above_one} records have uniform complexity above 1"),
        }));
    }

    match ols_fit(&records, config.intercept) {
        Ok(report) => {
            out.write("regression.json", pretty(&report.to_json())?)?;
            out.write("regression.txt", report.to_table())?;
        }
        Err(e) => {
            eprintln!("warning: regression skipped: {e}");
            let error = json!({ "code": e.code(), "message": e.to_string() });
            out.write("regression.json", pretty(&json!({ "error": error }))?)?;
            findings.push(error);
        }
    }

    let mut inputs = json!({ "traces": { "sha256": sha256_hex(&trace_bytes) } });
    let mut summary = json!({ "records": records.len() });
    if let Some((expert, bytes)) = &expert {
        inputs["reference"] = json!({ "sha256": sha256_hex(bytes) });
        let mut rows = Vec::with_capacity(best.len());
        for (&n, r) in &best {
            let (a, b) = align_universes(&r.decomposition, expert, config.align_strategy)?;
            let result = mojofm_with_reference(&a, &b, config.reference_side)?;
            rows.push(ComparisonRow { n_clusters: n, source: "generated".into(), result });
        }
        out.write("comparison.csv", comparison_csv(&rows))?;
        if let Some(mean) = average_by_source(&rows).get("generated") {
            summary["meanMojoFm"] = json!(format!("{mean:.2}"));
        }
    }

    let dir = out.dir().to_path_buf();
    let hash = out.finish(json!({
        "inputs": inputs,
        "config": config,
        "summary": summary,
        "findings": findings,
    }))?;
    println!("{} records written to {}", records.len(), dir.display());
    println!("manifest sha256 {hash}");
    Ok(ExitCode::SUCCESS)
}

fn generate(params: &GenParams, output: Option<&Path>) -> anyhow::Result<ExitCode> {
    let m = generate_monolith(params)?;
    let text = write_trace_file(&m);
    match output {
        Some(path) => fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}
