//! Everything the engine loads once at startup and shares read-only between
//! sessions.
//!
//! Layout of the data directory:
//!
//! ```text
//! nlu/        word lists, intent rules, topics
//! ingest/     pronoun, temporal and agreement lists for the content filters
//! kg/         nodes.jsonl and edges.jsonl
//! content/    *.jsonl content packs, filtered at load
//! flows/      one JSON file per flow
//! stories/    one JSON file per story
//! opinions.jsonl  eliza.jsonl  hedges.jsonl  nutrition.json
//! ```

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::config::EngineConfig;
use crate::flow::{ArgumentGraph, FlowError, FlowSet, FunctionRegistry};
use crate::kg::{KgError, KnowledgeGraph};
use crate::memory::{MemoryError, OpinionPack};
use crate::modules::{Eliza, Story};
use crate::nlu::{Annotator, NluError};
use crate::postprocess::HedgeSet;
use crate::retrieval::{
    ingest_file, ContentIndex, FilterConfig, IngestReport, OfflineProvider, RetrievalError, SearchProvider,
};

#[derive(Debug, thiserror::Error)]
pub enum ResourceError {
    #[error(transparent)]
    Nlu(#[from] NluError),
    #[error(transparent)]
    Graph(#[from] KgError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Retrieval(#[from] RetrievalError),
    #[error(transparent)]
    Memory(#[from] MemoryError),
    #[error("{0}")]
    Other(String),
}

pub struct Resources {
    pub config: EngineConfig,
    pub annotator: Annotator,
    pub graph: KnowledgeGraph,
    pub index: Arc<ContentIndex>,
    pub providers: Vec<Arc<dyn SearchProvider>>,
    pub flows: FlowSet,
    pub registry: FunctionRegistry,
    pub arguments: ArgumentGraph,
    pub stories: Vec<Story>,
    pub eliza: Eliza,
    pub hedges: HedgeSet,
    pub opinions: OpinionPack,
    /// What the content filters rejected while loading.
    pub ingest_report: IngestReport,
}

impl std::fmt::Debug for Resources {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Resources")
            .field("data_dir", &self.config.paths.data_dir)
            .field("entities", &self.graph.len())
            .field("content_items", &self.index.len())
            .field("flows", &self.flows.len())
            .field("stories", &self.stories.len())
            .finish_non_exhaustive()
    }
}

/// Sorted `*.jsonl` files of a directory.
fn jsonl_files(dir: &Path) -> Result<Vec<PathBuf>, ResourceError> {
    let listing = fs::read_dir(dir).map_err(|e| ResourceError::Other(format!("{}: {e}", dir.display())))?;
    let mut out: Vec<PathBuf> = listing
        .flatten()
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    out.sort();
    Ok(out)
}

impl Resources {
    pub fn load(config: EngineConfig) -> Result<Self, ResourceError> {
        config.validate().map_err(|e| ResourceError::Other(e.to_string()))?;
        let nlu_dir = config.data_path("nlu");
        let annotator = Annotator::load(&nlu_dir, config.nlu.asr_threshold)?;
        let graph = KnowledgeGraph::load_dir(&config.data_path("kg"))?;

        let filters = FilterConfig::load(&nlu_dir, &config.data_path("ingest"))?;
        let mut report = IngestReport::default();
        for pack in jsonl_files(&config.data_path("content"))? {
            let r = ingest_file(&pack, &filters)?;
            for rej in &r.rejections {
                tracing::info!(pack = %pack.display(), item = %rej.id, rule = rej.rule.as_str(), "content item rejected");
            }
            report.accepted.extend(r.accepted);
            report.rejections.extend(r.rejections);
        }
        let index = Arc::new(ContentIndex::build(report.accepted.clone(), annotator.stopwords.clone()));
        let providers: Vec<Arc<dyn SearchProvider>> = config
            .providers
            .order
            .iter()
            .map(|_| Arc::new(OfflineProvider::new(Arc::clone(&index), config.providers.min_score)) as Arc<dyn SearchProvider>)
            .collect();

        let registry = FunctionRegistry::standard();
        let flows = FlowSet::load_dirs(&config.flow_dirs(), &registry)?;
        let arguments = ArgumentGraph::load(&config.data_path("nutrition.json")).map_err(ResourceError::Other)?;
        let stories = Story::load_dir(&config.data_path("stories")).map_err(ResourceError::Other)?;
        let eliza = Eliza::load(&config.data_path("eliza.jsonl")).map_err(ResourceError::Other)?;
        let hedges = HedgeSet::load(&config.data_path("hedges.jsonl")).map_err(ResourceError::Other)?;
        let opinions = OpinionPack::load(&config.data_path("opinions.jsonl"))?;
        if opinions.is_empty() {
            return Err(MemoryError::EmptyOpinionPack.into());
        }
        tracing::debug!(
            entities = graph.len(),
            items = index.len(),
            rejected = report.rejections.len(),
            flows = flows.len(),
            "resources loaded"
        );
        Ok(Resources {
            config,
            annotator,
            graph,
            index,
            providers,
            flows,
            registry,
            arguments,
            stories,
            eliza,
            hedges,
            opinions,
            ingest_report: report,
        })
    }

    /// Resources from the bundled data directory with default settings.
    pub fn bundled() -> Result<Self, ResourceError> {
        Self::load(EngineConfig::default())
    }
}
