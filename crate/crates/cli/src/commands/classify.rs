use std::fmt::Write;

use kgav::classifier::{
    self, pr_table, score_pairs, BaselineExperiment, ClassificationReport, Confusion, PrPoint, Scorer,
};
use kgav::dataset::read_pairs_jsonl;
use serde_json::json;

use super::{boxed, load_model, load_records, remote_classifier};
use crate::config::{RunConfig, ScorerKind};
use crate::error::CliError;
use crate::output::Output;

pub fn train(cfg: &RunConfig) -> Result<(), CliError> {
    let path = cfg.require_file(&cfg.paths.pairs, "pairs")?;
    let pairs = read_pairs_jsonl(path)?;
    let model = classifier::train(&pairs, &cfg.training, cfg.seed)?;
    let out = Output::new(cfg)?;
    let model_path = cfg.paths.model.clone().unwrap_or_else(|| out.path("model.kgav"));
    model.save(&model_path)?;
    let fit = classifier::evaluate(&model, &pairs, cfg.training.threshold)?;
    out.write_json(
        "train.json",
        json!({
            "model": model_path,
            "pairs": pairs.len(),
            "meta": model.meta(),
            "training_set": fit,
        }),
    )?;
    println!(
        "trained on {} pairs, training-set F1 {:.4}, model at {}",
        pairs.len(),
        fit.f1,
        model_path.display()
    );
    Ok(())
}

fn sweep_thresholds() -> Vec<f64> {
    (1..20).map(|i| i as f64 / 20.0).collect()
}

fn scorer(cfg: &RunConfig) -> Result<Box<dyn Scorer>, CliError> {
    match cfg.scorer.kind {
        ScorerKind::Baseline => {
            let path = cfg
                .paths
                .model
                .as_ref()
                .ok_or_else(|| CliError::Config("the baseline scorer needs --model".into()))?;
            Ok(boxed(load_model(path)?))
        }
        ScorerKind::Remote => Ok(boxed(remote_classifier(cfg)?)),
        ScorerKind::Oracle => Err(CliError::Config(
            "the oracle scorer needs judged candidate lists; use it with `filter`".into(),
        )),
    }
}

fn render(name: &str, report: &ClassificationReport, sweep: &[PrPoint]) -> String {
    let mut md = String::from("| Scorer | Runs | Precision | Recall | F1 |\n|---|---:|---:|---:|---:|\n");
    let _ = writeln!(
        md,
        "| {name} | {} | {} | {} | {} |",
        report.runs.len(),
        report.precision,
        report.recall,
        report.f1
    );
    md.push_str("\n| Seed | Precision | Recall | F1 |\n|---:|---:|---:|---:|\n");
    for r in &report.runs {
        let m = &r.metrics;
        let _ = writeln!(md, "| {} | {:.4} | {:.4} | {:.4} |", r.seed, m.precision, m.recall, m.f1);
    }
    if !sweep.is_empty() {
        md.push_str("\nThreshold sweep (diagnostic; the reported scores use the configured threshold)\n\n");
        md.push_str("| Threshold | Precision | Recall | F1 |\n|---:|---:|---:|---:|\n");
        for p in sweep {
            let _ = writeln!(md, "| {:.2} | {:.4} | {:.4} | {:.4} |", p.threshold, p.precision, p.recall, p.f1);
        }
    }
    md
}

/// With `--pairs`, scores a held-out file once. Otherwise repeats
/// sample, split, train and evaluate over `runs` seeds.
pub fn eval_classifier(cfg: &RunConfig) -> Result<(), CliError> {
    let threshold = cfg.evaluation.threshold;
    let (name, report, sweep) = match &cfg.paths.pairs {
        Some(_) => {
            let path = cfg.require_file(&cfg.paths.pairs, "pairs")?;
            let pairs = read_pairs_jsonl(path)?;
            if pairs.is_empty() {
                return Err(CliError::Data(format!("{}: no pairs", path.display())));
            }
            let scorer = scorer(cfg)?;
            let scores = score_pairs(scorer.as_ref(), &pairs)?;
            let gold: Vec<bool> = pairs.iter().map(|p| p.label.is_correct()).collect();
            let mut c = Confusion::default();
            for (s, g) in scores.iter().zip(&gold) {
                c.add(*s >= threshold, *g);
            }
            let sweep = if cfg.evaluation.sweep {
                pr_table(&scores, &gold, &sweep_thresholds())
            } else {
                vec![]
            };
            (scorer.name(), ClassificationReport::single(cfg.seed, c.metrics()), sweep)
        }
        None => {
            if cfg.scorer.kind != ScorerKind::Baseline {
                return Err(CliError::Config(
                    "repeated evaluation trains the baseline; pass --pairs to evaluate another scorer".into(),
                ));
            }
            if cfg.evaluation.sweep {
                return Err(CliError::Config("--sweep needs a held-out --pairs file".into()));
            }
            let records = load_records(cfg)?;
            let experiment = BaselineExperiment {
                sampling: cfg.sampling.clone(),
                training: cfg.training.clone(),
            };
            let report = experiment.repeated(&records, cfg.evaluation.runs, cfg.seed)?;
            ("baseline".to_string(), report, vec![])
        }
    };

    let out = Output::new(cfg)?;
    let md = render(&name, &report, &sweep);
    out.write_markdown("classification.md", &md)?;
    out.write_json(
        "classification.json",
        json!({ "scorer": name, "report": report, "threshold_sweep": sweep }),
    )?;
    if !sweep.is_empty() {
        let mut csv = String::from("threshold,precision,recall,f1\n");
        for p in &sweep {
            let _ = writeln!(csv, "{:.2},{:.6},{:.6},{:.6}", p.threshold, p.precision, p.recall, p.f1);
        }
        out.write_csv("threshold_sweep.csv", &csv)?;
    }
    print!("{md}");
    Ok(())
}
