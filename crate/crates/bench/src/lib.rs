//! Shared fixtures for the benchmarks.

use kgav::qa::{ask, MockKgqa, MockKgqaConfig};
use kgav::synthetic::{SyntheticWorld, WorldConfig};
use kgav::verbalize::LabelMap;
use kgav::CandidateList;
use std::sync::Arc;

pub struct Fixture {
    pub world: SyntheticWorld,
    pub labels: LabelMap,
    pub kgqa: MockKgqa,
}

impl Fixture {
    pub fn new() -> Self {
        let world = SyntheticWorld::generate(WorldConfig::default());
        let kgqa = MockKgqa::new(Arc::new(world.graph.clone()), &world.records, MockKgqaConfig::default())
            .expect("default mock config is valid");
        Self {
            labels: world.label_map(),
            world,
            kgqa,
        }
    }

    /// Candidates for the first gold question.
    pub fn candidates(&self) -> CandidateList {
        ask(&self.world.records[0].question, &self.kgqa).expect("mock answers")
    }
}

impl Default for Fixture {
    fn default() -> Self {
        Self::new()
    }
}
