mod classify;
mod data;
mod pipeline;

use std::path::Path;
use std::sync::Arc;

use kgav::classifier::{BaselineModel, RemoteClassifier, Scorer};
use kgav::dataset::load_vanilla;
use kgav::kg::{CacheStore, CachedBackend, EndpointConfig, LabelResolver, LabelSource, SparqlEndpoint};
use kgav::qa::{MockKgqa, RemoteKgqa, RemoteKgqaConfig};
use kgav::{KgqaBackend, MockGraph, QueryBackend, VanillaRecord};

pub use classify::{eval_classifier, train};
pub use data::{ingest, sample, synth};
pub use pipeline::{ask, filter, report, ReportFormat};

use crate::config::{Backend, RunConfig};
use crate::error::CliError;

/// Secrets never enter the serialized config, so they travel separately.
#[derive(Debug, Clone, Default)]
pub struct Secrets {
    pub endpoint_token: Option<String>,
}

pub(crate) fn load_records(cfg: &RunConfig) -> Result<Vec<VanillaRecord>, CliError> {
    let path = cfg.require_file(&cfg.paths.dataset, "dataset")?;
    let report = load_vanilla(path)?;
    for w in &report.warnings {
        log::warn!("{}: {w}", path.display());
    }
    if report.records.is_empty() {
        return Err(CliError::Data(format!("{}: no valid records", path.display())));
    }
    Ok(report.records)
}

pub(crate) fn load_graph(cfg: &RunConfig) -> Result<Arc<MockGraph>, CliError> {
    let path = cfg.require_file(&cfg.paths.graph, "graph")?;
    MockGraph::from_json_file(path)
        .map(Arc::new)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

pub(crate) fn cache(cfg: &RunConfig) -> Result<Option<CacheStore>, CliError> {
    cfg.paths
        .cache_dir
        .as_ref()
        .map(|dir| CacheStore::new(dir).map_err(|e| CliError::io(dir, e)))
        .transpose()
}

fn endpoint_url(value: &Option<String>, what: &str) -> Result<String, CliError> {
    value
        .clone()
        .ok_or_else(|| CliError::Config(format!("the remote {what} backend needs an endpoint URL")))
}

/// The KGQA system. The mock needs the graph and the gold records.
pub(crate) fn kgqa_backend(
    cfg: &RunConfig,
    secrets: &Secrets,
    graph: Option<&Arc<MockGraph>>,
    records: &[VanillaRecord],
) -> Result<Box<dyn KgqaBackend>, CliError> {
    match cfg.kgqa.backend {
        Backend::Mock => {
            let graph = match graph {
                Some(g) => g.clone(),
                None => load_graph(cfg)?,
            };
            let mock = MockKgqa::new(graph, records, cfg.kgqa.mock.clone()).map_err(CliError::Config)?;
            Ok(Box::new(mock))
        }
        Backend::Remote => {
            let k = &cfg.kgqa;
            let remote = RemoteKgqaConfig {
                url: endpoint_url(&k.endpoint, "KGQA")?,
                kb: k.kb.clone(),
                lang: k.lang.clone(),
                method: k.method,
                timeout_secs: k.timeout_secs,
                token: secrets.endpoint_token.clone(),
                mapping: k.mapping.clone(),
            };
            Ok(Box::new(RemoteKgqa::new(remote)?))
        }
    }
}

pub(crate) struct KnowledgeGraph {
    pub backend: Arc<dyn QueryBackend>,
    pub labels: LabelResolver<Arc<dyn LabelSource>>,
    pub graph: Option<Arc<MockGraph>>,
}

pub(crate) fn knowledge_graph(cfg: &RunConfig, secrets: &Secrets) -> Result<KnowledgeGraph, CliError> {
    let cache = cache(cfg)?;
    match cfg.sparql.backend {
        Backend::Mock => {
            let graph = load_graph(cfg)?;
            Ok(KnowledgeGraph {
                backend: graph.clone(),
                labels: LabelResolver::new(graph.clone() as Arc<dyn LabelSource>, cfg.sparql.lang.clone()),
                graph: Some(graph),
            })
        }
        Backend::Remote => {
            let s = &cfg.sparql;
            let endpoint = Arc::new(SparqlEndpoint::new(EndpointConfig {
                url: endpoint_url(&s.endpoint, "SPARQL")?,
                timeout_secs: s.timeout_secs,
                token: secrets.endpoint_token.clone(),
                method: s.method,
            })?);
            let mut labels = LabelResolver::new(endpoint.clone() as Arc<dyn LabelSource>, s.lang.clone());
            let backend: Arc<dyn QueryBackend> = match cache {
                Some(c) => {
                    labels = labels.with_disk_cache(c.clone());
                    Arc::new(CachedBackend::new(endpoint, c))
                }
                None => endpoint,
            };
            Ok(KnowledgeGraph {
                backend,
                labels,
                graph: None,
            })
        }
    }
}

pub(crate) fn load_model(path: &Path) -> Result<BaselineModel, CliError> {
    if !path.is_file() {
        return Err(CliError::Config(format!("model {} does not exist", path.display())));
    }
    Ok(BaselineModel::load(path)?)
}

pub(crate) fn remote_classifier(cfg: &RunConfig) -> Result<RemoteClassifier, CliError> {
    let url = endpoint_url(&cfg.scorer.url, "classifier")?;
    Ok(RemoteClassifier::new(&url, cfg.scorer.model_id.clone(), cfg.scorer.timeout_secs)?)
}

pub(crate) fn boxed<S: Scorer + 'static>(s: S) -> Box<dyn Scorer> {
    Box::new(s)
}
