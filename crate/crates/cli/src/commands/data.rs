use kgav::dataset::{load_vanilla, negative_sample, split, PairLabel};
use kgav::synthetic::SyntheticWorld;
use serde_json::json;

use super::load_records;
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::Output;

pub fn ingest(cfg: &RunConfig) -> Result<(), CliError> {
    let path = cfg.require_file(&cfg.paths.dataset, "dataset")?;
    let report = load_vanilla(path)?;
    for w in &report.warnings {
        log::warn!("{}: {w}", path.display());
    }
    let out = Output::new(cfg)?;
    out.write_jsonl("records.jsonl", &report.records)?;
    out.write_json(
        "ingest.json",
        json!({
            "records": report.records.len(),
            "skipped": report.skipped,
            "warnings": report.warnings,
        }),
    )?;
    println!("{} records, {} skipped", report.records.len(), report.skipped);
    Ok(())
}

pub fn sample(cfg: &RunConfig) -> Result<(), CliError> {
    let records = load_records(cfg)?;
    let pairs = negative_sample(&records, &cfg.sampling)?;
    let (train, test) = split(&pairs, &cfg.sampling);
    let correct = pairs.iter().filter(|p| p.label == PairLabel::Correct).count();

    let out = Output::new(cfg)?;
    out.write_jsonl("train.jsonl", &train)?;
    out.write_jsonl("test.jsonl", &test)?;
    out.write_json(
        "sample.json",
        json!({
            "records": records.len(),
            "pairs": pairs.len(),
            "correct": correct,
            "incorrect": pairs.len() - correct,
            "negatives_per_positive": cfg.sampling.negatives_per_positive,
            "split_ratio": cfg.sampling.split_ratio,
            "group_by_question": cfg.sampling.group_by_question,
            "train": train.len(),
            "test": test.len(),
        }),
    )?;
    println!(
        "{} pairs ({} correct, {} incorrect): {} train, {} test",
        pairs.len(),
        correct,
        pairs.len() - correct,
        train.len(),
        test.len()
    );
    Ok(())
}

/// Writes a synthetic graph with gold records for offline runs.
pub fn synth(cfg: &RunConfig) -> Result<(), CliError> {
    let world = SyntheticWorld::generate(cfg.synthetic.clone());
    let out = Output::new(cfg)?;
    out.write_json("graph.json", &world.graph)?;
    out.write_jsonl("records.jsonl", &world.records)?;
    for &mode in &cfg.modes {
        out.write_jsonl(&format!("records.{}.jsonl", mode.name()), &world.records_for_mode(mode))?;
    }
    out.write_json(
        "synth.json",
        json!({
            "persons": world.config.persons,
            "records": world.records.len(),
            "triples": world.graph.len(),
        }),
    )?;
    println!(
        "{} records over {} triples in {}",
        world.records.len(),
        world.graph.len(),
        cfg.paths.out_dir.display()
    );
    Ok(())
}
