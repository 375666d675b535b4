use std::fmt::Write;
use std::path::Path;

use kgav::classifier::Scorer;
use kgav::pipeline::{compare, filter as filter_list, render_csv, render_markdown, ListBuilder, OracleScorer, QuestionRow};
use kgav::qa::ask_each;
use kgav::{QualityReport, RankedAnswerList, VanillaRecord, VerbalizationMode};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{boxed, cache, kgqa_backend, knowledge_graph, load_graph, load_model, load_records, remote_classifier, Secrets};
use crate::config::{Backend, RunConfig, ScorerKind};
use crate::error::CliError;
use crate::output::{csv_doc, markdown_doc, read_to_string, Output};

fn limited(records: &[VanillaRecord], limit: Option<usize>) -> &[VanillaRecord] {
    &records[..limit.unwrap_or(records.len()).min(records.len())]
}

#[derive(Serialize)]
struct CandidateRow<'a> {
    id: &'a str,
    rank: usize,
    sparql: &'a str,
}

/// Asks the KGQA backend for candidates. Questions come from `--question`
/// or from the dataset.
pub fn ask(cfg: &RunConfig, secrets: &Secrets, questions: &[String]) -> Result<(), CliError> {
    let needs_records = cfg.kgqa.backend == Backend::Mock || questions.is_empty();
    let records = if needs_records { load_records(cfg)? } else { vec![] };
    let backend = kgqa_backend(cfg, secrets, None, &records)?;
    let asked: Vec<(String, String)> = if questions.is_empty() {
        limited(&records, cfg.evaluation.limit)
            .iter()
            .map(|r| (r.question_id.clone(), r.question.clone()))
            .collect()
    } else {
        questions.iter().enumerate().map(|(i, q)| (format!("q{}", i + 1), q.clone())).collect()
    };
    let texts: Vec<String> = asked.iter().map(|(_, q)| q.clone()).collect();
    let cache = cache(cfg)?;
    let results = ask_each(&texts, backend.as_ref(), cache.as_ref());

    let mut rows = Vec::new();
    let mut failed = Vec::new();
    let mut empty = 0;
    for ((id, question), result) in asked.iter().zip(&results) {
        match result {
            Ok(list) => {
                empty += usize::from(list.is_empty());
                let candidates: Vec<CandidateRow> = list
                    .candidates
                    .iter()
                    .map(|c| CandidateRow {
                        id: &c.id,
                        rank: c.rank,
                        sparql: &c.raw_text,
                    })
                    .collect();
                rows.push(json!({
                    "question_id": id,
                    "question": question,
                    "candidates": candidates,
                    "warnings": list.warnings,
                }));
            }
            Err(e) => {
                log::warn!("{id}: {e}");
                failed.push(json!({ "question_id": id, "error": e.to_string() }));
            }
        }
    }
    if rows.is_empty() && !failed.is_empty() {
        return Err(CliError::Backend(format!("all {} questions failed", failed.len())));
    }
    let out = Output::new(cfg)?;
    out.write_jsonl("candidates.jsonl", &rows)?;
    out.write_json(
        "ask.json",
        json!({
            "backend": backend.identity(),
            "questions": asked.len(),
            "answered": rows.len(),
            "zero_candidate_questions": empty,
            "failed": failed,
        }),
    )?;
    println!(
        "{} questions: {} answered ({} with no candidates), {} failed",
        asked.len(),
        rows.len(),
        empty,
        failed.len()
    );
    Ok(())
}

/// One approach column of the filter report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ApproachRun {
    pub mode: VerbalizationMode,
    pub scorer: String,
    pub report: QualityReport,
    pub per_question: Vec<QuestionRow>,
    /// Question ids that could not be answered, executed or scored.
    pub failed_questions: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FilterRun {
    pub seed: u64,
    pub config: Value,
    pub approaches: Vec<ApproachRun>,
}

impl FilterRun {
    fn reports(&self) -> Vec<QualityReport> {
        self.approaches
            .iter()
            .map(|a| QualityReport {
                per_question: a.per_question.clone(),
                ..a.report.clone()
            })
            .collect()
    }

    fn markdown(&self) -> String {
        let mut md = render_markdown(&self.reports());
        md.push_str("\n| Approach | Questions | Zero candidates | With a relevant candidate | Mean removed | Failed |\n");
        md.push_str("|---|---:|---:|---:|---:|---:|\n");
        for a in &self.approaches {
            let r = &a.report;
            let _ = writeln!(
                md,
                "| {} | {} | {} | {} | {:.2} | {} |",
                r.approach,
                r.questions,
                r.zero_candidate_questions,
                r.questions_with_relevant,
                r.mean_removed,
                a.failed_questions.len()
            );
        }
        markdown_doc(&md, self.seed, &self.config)
    }

    fn csv(&self) -> String {
        csv_doc(&render_csv(&self.reports()), self.seed, &self.config)
    }

    /// A metadata line, then one line per (approach, question).
    fn jsonl(&self) -> String {
        let mut out = serde_json::to_string(&json!({ "seed": self.seed, "config": self.config }))
            .expect("JSON value serializes");
        out.push('\n');
        for a in &self.approaches {
            for row in &a.per_question {
                let mut line = serde_json::to_value(row).expect("row serializes");
                if let Value::Object(m) = &mut line {
                    m.insert("approach".into(), json!(a.report.approach));
                }
                out.push_str(&line.to_string());
                out.push('\n');
            }
        }
        out
    }
}

fn approach_name(mode: VerbalizationMode, scorer: ScorerKind) -> String {
    let scorer = match scorer {
        ScorerKind::Baseline => "baseline",
        ScorerKind::Remote => "remote",
        ScorerKind::Oracle => "oracle",
    };
    format!("{} / {scorer}", mode.name())
}

/// ask, strip and rewrite, execute, verbalize, judge, score, filter and
/// compare, once per configured verbalization mode.
pub fn filter(cfg: &RunConfig, secrets: &Secrets) -> Result<(), CliError> {
    let records = load_records(cfg)?;
    let kg = knowledge_graph(cfg, secrets)?;
    let graph = match (&kg.graph, cfg.kgqa.backend) {
        (Some(g), _) => Some(g.clone()),
        (None, Backend::Mock) => Some(load_graph(cfg)?),
        (None, Backend::Remote) => None,
    };
    let kgqa = kgqa_backend(cfg, secrets, graph.as_ref(), &records)?;
    let gold = limited(&records, cfg.evaluation.limit);
    let texts: Vec<String> = gold.iter().map(|r| r.question.clone()).collect();
    let cache = cache(cfg)?;
    let candidates = ask_each(&texts, kgqa.as_ref(), cache.as_ref());

    // scorers are built before any list so a bad model path fails fast
    let mut scorers: Vec<Option<Box<dyn Scorer>>> = Vec::new();
    for &mode in &cfg.modes {
        scorers.push(match cfg.scorer.kind {
            ScorerKind::Baseline => {
                let path = cfg.model_for(mode).ok_or_else(|| {
                    CliError::Config(format!("no model configured for mode {}", mode.name()))
                })?;
                Some(boxed(load_model(path)?))
            }
            ScorerKind::Remote => Some(boxed(remote_classifier(cfg)?)),
            ScorerKind::Oracle => None,
        });
    }

    let mut approaches = Vec::new();
    for (&mode, scorer) in cfg.modes.iter().zip(scorers) {
        let mut builder = ListBuilder::new(kg.backend.as_ref(), &kg.labels, mode);
        builder.drop_aggregates = cfg.drop_stripped;
        builder.answers_per_candidate = cfg.answers_per_candidate;
        let built: Vec<Result<RankedAnswerList, String>> = gold
            .par_iter()
            .zip(&candidates)
            .map(|(record, cands)| {
                let cands = cands.as_ref().map_err(|e| e.to_string())?;
                builder.build(&record.question_id, record, cands).map_err(|e| e.to_string())
            })
            .collect();
        let mut failed = Vec::new();
        let mut lists = Vec::new();
        for (record, result) in gold.iter().zip(built) {
            match result {
                Ok(list) => lists.push(list),
                Err(e) => {
                    log::warn!("{}: {e}", record.question_id);
                    failed.push(record.question_id.clone());
                }
            }
        }
        let oracle;
        let scorer: &dyn Scorer = match &scorer {
            Some(s) => s.as_ref(),
            None => {
                oracle = OracleScorer::from_lists(&lists);
                &oracle
            }
        };
        let threshold = cfg.evaluation.threshold;
        let filtered: Vec<_> = lists
            .par_iter()
            .map(|l| filter_list(l, scorer, threshold).map_err(|e| e.to_string()))
            .collect();
        let (mut before, mut after) = (Vec::new(), Vec::new());
        for (list, result) in lists.into_iter().zip(filtered) {
            match result {
                Ok(f) => {
                    before.push(list);
                    after.push(f);
                }
                Err(e) => {
                    log::warn!("{}: scoring failed ({e})", list.question_id);
                    failed.push(list.question_id);
                }
            }
        }
        if before.is_empty() && !gold.is_empty() {
            return Err(CliError::Backend(format!(
                "every question failed for mode {}",
                mode.name()
            )));
        }
        let mut report = compare(&approach_name(mode, cfg.scorer.kind), &before, &after, &cfg.ranking())?;
        let per_question = std::mem::take(&mut report.per_question);
        approaches.push(ApproachRun {
            mode,
            scorer: scorer.name(),
            report,
            per_question,
            failed_questions: failed,
        });
    }

    let run = FilterRun {
        seed: cfg.seed,
        config: cfg.json(),
        approaches,
    };
    let out = Output::new(cfg)?;
    let mut json = serde_json::to_string_pretty(&run).expect("report serializes");
    json.push('\n');
    out.write_text("report.json", &json)?;
    let md = run.markdown();
    out.write_text("report.md", &md)?;
    out.write_text("report.csv", &run.csv())?;
    out.write_text("per_question.jsonl", &run.jsonl())?;
    print!("{}", render_markdown(&run.reports()));
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ReportFormat {
    Markdown,
    Csv,
    Jsonl,
}

/// Re-renders a `report.json` written by `filter` to stdout.
pub fn report(input: &Path, format: ReportFormat) -> Result<(), CliError> {
    let text = read_to_string(input)?;
    let run: FilterRun =
        serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", input.display())))?;
    let rendered = match format {
        ReportFormat::Markdown => run.markdown(),
        ReportFormat::Csv => run.csv(),
        ReportFormat::Jsonl => run.jsonl(),
    };
    print!("{rendered}");
    Ok(())
}
