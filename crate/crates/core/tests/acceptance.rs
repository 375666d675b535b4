//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kgav::classifier::{
    evaluate, repeated_eval, train, ConstantScorer, Metrics, TrainConfig,
};
use kgav::dataset::{negative_sample, split, LabeledQaPair, PairLabel, SamplingConfig, VanillaRecord};
use kgav::kg::{execute, match_bgp, MockGraph, DEFAULT_ROW_CAP};
use kgav::pipeline::{
    compare, filter, filter_with_scores, ndcg_at_k, precision_at_k, AnswerEntry, EvaluationConfig,
    ListBuilder, MatchedVia, OracleScorer, RankedAnswerList, RelevanceJudgment,
};
use kgav::qa::{ask, MockKgqa, MockKgqaConfig};
use kgav::sparql::{parse_query, Binding, Term, TriplePattern};
use kgav::synthetic::{SyntheticWorld, WorldConfig};
use kgav::verbalize::{LabelMap, VerbalizationMode, Verbalizer};

const METRIC_TOLERANCE: f64 = 1e-12;
const METRIC_LISTS: usize = 1_000;
const METRIC_BUDGET: Duration = Duration::from_secs(5);
const IDENTITY_CASES: usize = 10_000;
const BGP_BUDGET: Duration = Duration::from_secs(60);
const FILTER_CASES: usize = 10_000;
const E2E_QUESTIONS: usize = 500;
const E2E_BUDGET: Duration = Duration::from_secs(180);
const ORACLE_P1_TARGET: f64 = 0.80;
const ORACLE_P1_TOLERANCE: f64 = 0.03;
const PRE_P1_TARGET: f64 = 0.08;
// three binomial standard deviations at p = 0.08, n = 500
const PRE_P1_TOLERANCE: f64 = 0.037;
const BASELINE_PAIRS: usize = 10_000;
const BASELINE_MIN_F1: f64 = 0.95;
const MIN_RELATIVE_GAIN: f64 = 0.5;
const SAMPLER_DRAWS: usize = 100_000;
const HARNESS_TOLERANCE: f64 = 1e-12;

struct Outcome {
    passed: bool,
    detail: String,
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome {
        passed: false,
        detail: detail.into(),
    }
}

fn check(cond: bool, detail: String) -> Outcome {
    Outcome { passed: cond, detail }
}

// ---------------------------------------------------------------- metrics

fn brute_precision(rel: &[bool], k: usize) -> f64 {
    let mut hits = 0.0;
    for i in 0..k {
        if i < rel.len() && rel[i] {
            hits += 1.0;
        }
    }
    hits / k as f64
}

fn brute_dcg(gains: &[f64], k: usize) -> f64 {
    let mut dcg = 0.0;
    for (i, g) in gains.iter().enumerate() {
        let rank = i + 1;
        if rank > k {
            break;
        }
        dcg += g / (rank as f64 + 1.0).log2();
    }
    dcg
}

fn brute_ndcg(rel: &[bool], k: usize, ideal_relevant: usize) -> f64 {
    let gains: Vec<f64> = rel.iter().map(|&r| if r { 1.0 } else { 0.0 }).collect();
    let ideal = vec![1.0; ideal_relevant];
    let idcg = brute_dcg(&ideal, k);
    if idcg == 0.0 {
        0.0
    } else {
        brute_dcg(&gains, k) / idcg
    }
}

fn random_relevance(rng: &mut ChaCha8Rng, max_len: usize) -> Vec<bool> {
    let len = rng.random_range(0..=max_len);
    let p: f64 = rng.random();
    (0..len).map(|_| rng.random_bool(p)).collect()
}

fn metric_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut lists: Vec<Vec<bool>> = vec![vec![], vec![true; 100], vec![true; 7], vec![false; 100]];
    while lists.len() < METRIC_LISTS {
        lists.push(random_relevance(&mut rng, 100));
    }
    let mut worst = 0.0f64;
    let mut checks = 0usize;
    for rel in &lists {
        let count = rel.iter().filter(|r| **r).count();
        for k in [1, 2, 3, 5, 10, 20, 50, 100, 150] {
            for extra in [0, 1, 4] {
                let r = count + extra;
                worst = worst.max((precision_at_k(rel, k) - brute_precision(rel, k)).abs());
                worst = worst.max((ndcg_at_k(rel, k, r) - brute_ndcg(rel, k, r)).abs());
                checks += 2;
            }
        }
    }
    let elapsed = start.elapsed();
    check(
        worst <= METRIC_TOLERANCE && elapsed < METRIC_BUDGET,
        format!(
            "{} lists, {checks} comparisons, max |diff| {worst:.1e} (tol {METRIC_TOLERANCE:.0e}), {:.2}s (budget {}s)",
            lists.len(),
            elapsed.as_secs_f64(),
            METRIC_BUDGET.as_secs()
        ),
    )
}

fn p1_equals_ndcg1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut violations = 0;
    for _ in 0..IDENTITY_CASES {
        let rel = random_relevance(&mut rng, 60);
        let r = rel.iter().filter(|r| **r).count() + rng.random_range(0..3);
        if precision_at_k(&rel, 1) != ndcg_at_k(&rel, 1, r) {
            violations += 1;
        }
    }
    check(
        violations == 0,
        format!("{IDENTITY_CASES} random lists, {violations} violations"),
    )
}

// -------------------------------------------------------------------- bgp

const NS: &str = "http://acceptance.example/";

fn constant(i: usize) -> Term {
    Term::iri(format!("{NS}{}", ["a", "b"][i]))
}

// Vocabulary: two IRIs and two variables.
fn vocab_term(i: usize) -> Term {
    match i {
        0 | 1 => constant(i),
        2 => Term::var("x"),
        _ => Term::var("y"),
    }
}

fn all_patterns() -> Vec<TriplePattern> {
    let mut out = Vec::new();
    for s in 0..4 {
        for p in 0..4 {
            for o in 0..4 {
                out.push(TriplePattern::new(vocab_term(s), vocab_term(p), vocab_term(o)));
            }
        }
    }
    out
}

// Triple (s, p, o) over {a, b} as bit s*4 + p*2 + o.
fn graph_from_mask(mask: u32) -> MockGraph {
    let mut g = MockGraph::new();
    for bit in 0..8 {
        if mask & (1 << bit) != 0 {
            let (s, p, o) = (bit >> 2 & 1, bit >> 1 & 1, bit & 1);
            g.insert(
                constant(s as usize).value(),
                constant(p as usize).value(),
                constant(o as usize),
            );
        }
    }
    g
}

type Row = Binding;

/// Per assignment of the pattern variables over {a, b}: the row and the
/// triples the assignment requires, as a bit mask.
fn assignments(patterns: &[&TriplePattern]) -> Vec<(Row, u32)> {
    let vars: Vec<String> = {
        let mut v: Vec<String> = patterns
            .iter()
            .flat_map(|p| p.variables().map(str::to_string).collect::<Vec<_>>())
            .collect();
        v.sort();
        v.dedup();
        v
    };
    let mut out = Vec::new();
    for code in 0..(1u32 << vars.len()) {
        let value_of = |name: &str| -> usize {
            let i = vars.iter().position(|v| v == name).expect("known variable");
            (code >> i & 1) as usize
        };
        let index = |t: &Term| -> usize {
            match t {
                Term::Variable { value } => value_of(value),
                t => usize::from(t.value().ends_with('b')),
            }
        };
        let mut required = 0u32;
        for p in patterns {
            let bit = index(&p.subject) * 4 + index(&p.predicate) * 2 + index(&p.object);
            required |= 1 << bit;
        }
        let row: Row = vars.iter().map(|v| (v.clone(), constant(value_of(v)))).collect();
        out.push((row, required));
    }
    out
}

fn rows_of(patterns: &[TriplePattern], g: &MockGraph) -> BTreeSet<Row> {
    match_bgp(patterns, g).rows.into_iter().collect()
}

fn bgp_oracle() -> Outcome {
    let start = Instant::now();
    let patterns = all_patterns();
    let graphs: Vec<(u32, MockGraph)> = (0u32..256)
        .filter(|m| m.count_ones() <= 6)
        .map(|m| (m, graph_from_mask(m)))
        .collect();

    let mut lists: Vec<Vec<usize>> = Vec::new();
    let n = patterns.len();
    for i in 0..n {
        lists.push(vec![i]);
        for j in 0..n {
            lists.push(vec![i, j]);
        }
    }
    let ordered = lists.len();
    for i in 0..n {
        for j in i..n {
            for k in j..n {
                lists.push(vec![i, j, k]);
            }
        }
    }
    let triples = lists.len() - ordered;

    let mut cases = 0usize;
    let mut mismatches = Vec::new();
    let mut permuted = 0usize;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (li, list) in lists.iter().enumerate() {
        let pats: Vec<TriplePattern> = list.iter().map(|&i| patterns[i].clone()).collect();
        let refs: Vec<&TriplePattern> = pats.iter().collect();
        let table = assignments(&refs);
        // every reordering of a sampled 1/32 of the three-pattern lists
        let orders: Vec<Vec<TriplePattern>> = if list.len() == 3 && rng.random_ratio(1, 32) {
            let mut perms = vec![];
            for p in [[0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
                perms.push(p.iter().map(|&i| pats[i].clone()).collect());
            }
            perms
        } else {
            vec![]
        };
        for (mask, g) in &graphs {
            let expected: BTreeSet<Row> = table
                .iter()
                .filter(|(_, req)| req & !mask == 0)
                .map(|(row, _)| row.clone())
                .collect();
            cases += 1;
            if rows_of(&pats, g) != expected && mismatches.len() < 3 {
                mismatches.push(format!("list {li} graph {mask:08b}"));
            }
            for o in &orders {
                permuted += 1;
                if rows_of(o, g) != expected && mismatches.len() < 3 {
                    mismatches.push(format!("permuted list {li} graph {mask:08b}"));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    check(
        mismatches.is_empty() && elapsed < BGP_BUDGET,
        format!(
            "vocabulary {{:a, :b, ?x, ?y}}; {} graphs (<= 6 of 8 triples) x ({ordered} ordered lists of 1-2 patterns + {triples} 3-pattern multisets) = {cases} cases, plus {permuted} reordered cases; mismatches {:?}; {:.1}s (budget {}s)",
            graphs.len(),
            mismatches,
            elapsed.as_secs_f64(),
            BGP_BUDGET.as_secs()
        ),
    )
}

// ------------------------------------------------------------- verbalizer

const WD: &str = "http://www.wikidata.org/entity/";
const WDT: &str = "http://www.wikidata.org/prop/direct/";

const QUERY_WIKIDATA: &str = "PREFIX wd: <http://www.wikidata.org/entity/>
PREFIX wdt: <http://www.wikidata.org/prop/direct/>
SELECT DISTINCT ?o2 WHERE {
    ?s1  ?p1  wd:Q57747377 .
    ?s1  wdt:P21 ?o2 .
}  LIMIT 1000";

const QUERY_DBPEDIA: &str = "# question:
#     What was the cause of death of John Kennedy?
# query:
PREFIX dbr: <http://dbpedia.org/resource/>
PREFIX dbo: <http://dbpedia.org/ontology/>
SELECT ?answer WHERE {
    dbr:John_F._Kennedy dbo:deathCause ?answer .
}
# the result is dbr:Assassination_of_John_F._Kennedy";

const SENTENCE_GOLDEN: &str =
    "Claude-Nicolas Le Cat is given name Claude-Nicolas and Claude-Nicolas Le Cat's sex or gender is male.";
const BAG_GOLDEN: &str = "John F. Kennedy death cause Assassination of John F. Kennedy";

fn verbalizer_goldens() -> Outcome {
    let wd = |id: &str| format!("{WD}{id}");
    let wdt = |id: &str| format!("{WDT}{id}");
    let mut g = MockGraph::new();
    for s in ["Q16027703", "Q2976815"] {
        g.insert(&wd(s), &wdt("P735"), Term::iri(wd("Q57747377")));
        g.insert(&wd(s), &wdt("P21"), Term::iri(wd("Q6581097")));
    }
    let labels: LabelMap = [
        (wd("Q16027703"), "Claude-Nicolas Le Cat"),
        (wd("Q57747377"), "Claude-Nicolas"),
        (wd("Q6581097"), "male"),
        (wdt("P735"), "given name"),
        (wdt("P21"), "sex or gender"),
        ("http://dbpedia.org/resource/John_F._Kennedy".into(), "John F. Kennedy"),
        ("http://dbpedia.org/ontology/deathCause".into(), "death cause"),
    ]
    .into_iter()
    .collect();
    let v = Verbalizer::default();

    let q = parse_query(QUERY_WIKIDATA).expect("parses").strip_unsupported().rewrite_select_all();
    let rs = execute(&q, &g, DEFAULT_ROW_CAP).expect("mock executes");
    let sentence = v
        .verbalize(&q, &rs.rows[0], 0, VerbalizationMode::Nlg, &labels)
        .map(|a| a.text)
        .unwrap_or_default();

    let mut g1 = MockGraph::new();
    g1.insert(
        "http://dbpedia.org/resource/John_F._Kennedy",
        "http://dbpedia.org/ontology/deathCause",
        Term::iri("http://dbpedia.org/resource/Assassination_of_John_F._Kennedy"),
    );
    let q1 = parse_query(QUERY_DBPEDIA).expect("parses").rewrite_select_all();
    let rs1 = execute(&q1, &g1, DEFAULT_ROW_CAP).expect("mock executes");
    let bag = v
        .verbalize(&q1, &rs1.rows[0], 0, VerbalizationMode::BagOfLabels, &labels)
        .map(|a| a.text)
        .unwrap_or_default();

    check(
        sentence == SENTENCE_GOLDEN && bag == BAG_GOLDEN && rs.len() == 2,
        format!("sentence {sentence:?}; bag-of-labels {bag:?}"),
    )
}

// -------------------------------------------------------------- filtering

fn list_from(relevance: &[bool]) -> RankedAnswerList {
    let q = parse_query("SELECT ?o WHERE { <http://x/s> <http://x/p> ?o }").expect("parses");
    let entries: Vec<AnswerEntry> = relevance
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let id = format!("c{}", i + 1);
            AnswerEntry {
                candidate: q.clone().with_id(id.clone(), i + 1),
                answers: vec![kgav::verbalize::AnswerText {
                    text: format!("text {i}"),
                    mode: VerbalizationMode::Nlg,
                    candidate_id: id.clone(),
                    binding_index: 0,
                }],
                judgment: RelevanceJudgment {
                    candidate_id: id,
                    relevant: r,
                    matched_via: if r { MatchedVia::ObjectLabel } else { MatchedVia::None },
                },
                score: None,
            }
        })
        .collect();
    RankedAnswerList {
        question_id: "q".into(),
        question: "q?".into(),
        original_relevant: relevance.iter().filter(|r| **r).count(),
        original_len: entries.len(),
        entries,
        removed: 0,
    }
}

fn filtering_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut order_violations = 0;
    let mut oracle_regressions = 0;
    for _ in 0..FILTER_CASES {
        let rel = random_relevance(&mut rng, 60);
        let list = list_from(&rel);
        let threshold: f64 = rng.random();
        let scores: Vec<Option<f64>> = rel.iter().map(|_| Some(rng.random())).collect();
        let out = filter_with_scores(&list, &scores, threshold);
        let expected: Vec<&str> = list
            .entries
            .iter()
            .zip(&scores)
            .filter(|(_, s)| s.unwrap() >= threshold)
            .map(|(e, _)| e.candidate.id.as_str())
            .collect();
        if out.candidate_ids() != expected {
            order_violations += 1;
        }

        let oracle = OracleScorer::from_lists([&list]);
        let filtered = filter(&list, &oracle, 0.5).expect("oracle scores");
        let before = (list.precision_at_k(1), list.precision_at_k(5), list.ndcg_at_k(5));
        let after = (filtered.precision_at_k(1), filtered.precision_at_k(5), filtered.ndcg_at_k(5));
        if after.0 < before.0 || after.1 < before.1 || after.2 < before.2 {
            oracle_regressions += 1;
        }
    }
    check(
        order_violations == 0 && oracle_regressions == 0,
        format!("{FILTER_CASES} cases; order violations {order_violations}; oracle metric regressions {oracle_regressions}"),
    )
}

// -------------------------------------------------------------- end to end

fn end_to_end() -> Outcome {
    let start = Instant::now();
    let world = SyntheticWorld::generate(WorldConfig::default());
    let eval: Vec<VanillaRecord> = world.records[..E2E_QUESTIONS].to_vec();
    let kgqa = match MockKgqa::new(Arc::new(world.graph.clone()), &world.records, MockKgqaConfig::default()) {
        Ok(m) => m,
        Err(e) => return fail(e),
    };
    let labels = world.label_map();
    let config = EvaluationConfig::default();
    let mut details = Vec::new();
    let mut ok = true;

    for mode in [VerbalizationMode::Nlg, VerbalizationMode::BagOfLabels] {
        let builder = ListBuilder::new(&world.graph, &labels, mode);
        let lists: Vec<RankedAnswerList> = eval
            .iter()
            .map(|r| {
                let candidates = ask(&r.question, &kgqa).expect("mock answers");
                builder.build(&r.question_id, r, &candidates).expect("mock executes")
            })
            .collect();
        if lists.iter().any(|l| l.entries.len() != 60) {
            return fail("a mock list does not have 60 entries");
        }
        let with_relevant = lists.iter().filter(|l| l.original_relevant > 0).count() as f64 / lists.len() as f64;

        let oracle = OracleScorer::from_lists(&lists);
        let oracle_after: Vec<_> = lists.iter().map(|l| filter(l, &oracle, 0.5).expect("oracle")).collect();
        let oracle_report = compare("oracle", &lists, &oracle_after, &config).expect("same questions");
        let p1 = oracle_report.metric("P@1 = NDCG@1").expect("k = 1 configured");

        // train on records disjoint from the evaluation questions
        let train_records: Vec<VanillaRecord> =
            world.records_for_mode(mode)[E2E_QUESTIONS..E2E_QUESTIONS + BASELINE_PAIRS / 2].to_vec();
        let sampling = SamplingConfig::default();
        let pairs = negative_sample(&train_records, &sampling).expect("enough records");
        let (train_set, test_set) = split(&pairs, &sampling);
        let model = train(&train_set, &TrainConfig::default(), 0).expect("both labels");
        let held_out = evaluate(&model, &test_set, 0.5).expect("local model");
        let baseline_after: Vec<_> = lists.iter().map(|l| filter(l, &model, 0.5).expect("local model")).collect();
        let baseline_report = compare("baseline", &lists, &baseline_after, &config).expect("same questions");
        let b1 = baseline_report.metric("P@1 = NDCG@1").expect("k = 1 configured");
        let gain = b1.relative_change.unwrap_or(0.0);

        let mode_ok = (p1.after - ORACLE_P1_TARGET).abs() <= ORACLE_P1_TOLERANCE
            && (p1.after - with_relevant).abs() < 1e-12
            && (p1.before - PRE_P1_TARGET).abs() <= PRE_P1_TOLERANCE
            && pairs.len() == BASELINE_PAIRS
            && held_out.f1 >= BASELINE_MIN_F1
            && gain >= MIN_RELATIVE_GAIN;
        ok &= mode_ok;
        details.push(format!(
            "[{}] pre P@1 {:.4} (target {PRE_P1_TARGET} ± {PRE_P1_TOLERANCE}), oracle post P@1 {:.4} (target {ORACLE_P1_TARGET} ± {ORACLE_P1_TOLERANCE}; questions with a relevant candidate {:.4}), baseline held-out F1 {:.4} on {} pairs (min {BASELINE_MIN_F1}), baseline post P@1 {:.4} ({:+.1}%, min +{:.0}%)",
            mode.name(),
            p1.before,
            p1.after,
            with_relevant,
            held_out.f1,
            pairs.len(),
            b1.after,
            gain * 100.0,
            MIN_RELATIVE_GAIN * 100.0
        ));
    }
    let elapsed = start.elapsed();
    details.push(format!("{:.1}s (budget {}s)", elapsed.as_secs_f64(), E2E_BUDGET.as_secs()));
    check(ok && elapsed < E2E_BUDGET, details.join("; "))
}

// ---------------------------------------------------------------- sampler

fn sampler_records(n: usize) -> Vec<VanillaRecord> {
    (0..n)
        .map(|i| VanillaRecord {
            question_id: i.to_string(),
            question: format!("question {i}?"),
            answer: format!("answer {i}"),
            answer_sentence: format!("The answer is {i}."),
            question_entity_label: format!("entity {i}"),
            question_relation: "relation".into(),
        })
        .collect()
}

fn jsonl(pairs: &[LabeledQaPair]) -> Vec<u8> {
    let mut out = Vec::new();
    for p in pairs {
        out.extend(serde_json::to_vec(p).expect("serializes"));
        out.push(b'\n');
    }
    out
}

fn negative_sampler() -> Outcome {
    let mut problems = Vec::new();
    let records = sampler_records(2_000);
    let mut total_negatives = 0;
    let mut self_pairs = 0;
    for ratio in [1usize, 50] {
        let cfg = SamplingConfig {
            negatives_per_positive: ratio,
            seed: 5,
            ..Default::default()
        };
        let pairs = negative_sample(&records, &cfg).expect("valid config");
        let pos = pairs.iter().filter(|p| p.label == PairLabel::Correct).count();
        let neg = pairs.len() - pos;
        if pos != records.len() || neg != ratio * records.len() {
            problems.push(format!("ratio {ratio}: {pos} correct / {neg} incorrect"));
        }
        let negatives: Vec<_> = pairs.iter().filter(|p| p.label == PairLabel::Incorrect).collect();
        total_negatives += negatives.len();
        self_pairs += negatives
            .iter()
            .filter(|p| p.source_question_id == p.source_answer_id)
            .count();
        let again = negative_sample(&records, &cfg).expect("valid config");
        if jsonl(&pairs) != jsonl(&again) {
            problems.push(format!("ratio {ratio}: rerun differs"));
        }
    }
    if total_negatives < SAMPLER_DRAWS {
        problems.push(format!("only {total_negatives} draws"));
    }
    check(
        problems.is_empty() && self_pairs == 0,
        format!(
            "exact 1:1 and 1:50 label counts; {total_negatives} negative draws, {self_pairs} self-pairs; byte-identical reruns; problems {problems:?}"
        ),
    )
}

// ---------------------------------------------------------------- harness

fn repeated_seed_harness() -> Outcome {
    let pairs: Vec<LabeledQaPair> = (0..40)
        .map(|i| LabeledQaPair {
            question: format!("q{i}"),
            answer: format!("a{i}"),
            label: if i % 2 == 0 { PairLabel::Correct } else { PairLabel::Incorrect },
            source_question_id: i.to_string(),
            source_answer_id: i.to_string(),
        })
        .collect();
    let constant = repeated_eval(10, 0, |seed| {
        let mut shuffled = pairs.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        evaluate(&ConstantScorer(0.9), &shuffled, 0.5)
    });
    let hand = repeated_eval(2, 0, |seed| {
        let v = if seed == 0 { 0.9 } else { 1.0 };
        Ok(Metrics::from_values(v, v, v))
    });
    match (constant, hand) {
        (Ok(c), Ok(h)) => {
            let zero_std = c.precision.std == 0.0 && c.recall.std == 0.0 && c.f1.std == 0.0;
            let arithmetic = (h.f1.mean - 0.95).abs() <= HARNESS_TOLERANCE
                && (h.f1.std - 0.05).abs() <= HARNESS_TOLERANCE;
            check(
                zero_std && arithmetic,
                format!(
                    "constant scorer over 10 seeds: std P/R/F1 = {}/{}/{}; runs 0.9 and 1.0: mean {:.12}, std {:.12}",
                    c.precision.std, c.recall.std, c.f1.std, h.f1.mean, h.f1.std
                ),
            )
        }
        (c, h) => fail(format!("harness errored: {:?} {:?}", c.err(), h.err())),
    }
}

// -------------------------------------------------------------- isolation

fn offline() -> Outcome {
    // The checks above use only in-process backends: the in-memory graph,
    // the mock KGQA system, the built-in baseline and the oracle scorer.
    // The workspace must not contain the reference service.
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../..");
    let crates = std::fs::read_dir(root.join("crates"))
        .map(|d| {
            d.filter_map(Result::ok)
                .map(|e| e.file_name().to_string_lossy().into_owned())
                .collect::<Vec<_>>()
        })
        .unwrap_or_default();
    let python = crates.iter().any(|c| {
        root.join("crates").join(c).join("pyproject.toml").exists()
            || root.join("crates").join(c).join("setup.py").exists()
    });
    check(
        !python && !crates.is_empty(),
        format!("acceptance backends are in-process only; workspace crates {crates:?} contain no Python service"),
    )
}

fn main() {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("metric oracle equivalence", metric_oracle),
        ("P@1 == NDCG@1 identity", p1_equals_ndcg1),
        ("BGP oracle equivalence", bgp_oracle),
        ("verbalizer goldens", verbalizer_goldens),
        ("filtering invariants", filtering_invariants),
        ("synthetic end-to-end", end_to_end),
        ("negative sampler", negative_sampler),
        ("repeated-seed harness", repeated_seed_harness),
        ("offline primary suite", offline),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let outcome = run();
        if !outcome.passed {
            failed += 1;
        }
        println!(
            "{} {name}: {}",
            if outcome.passed { "PASS" } else { "FAIL" },
            outcome.detail
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
