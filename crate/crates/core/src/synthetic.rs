//! A small generated knowledge graph of people with gold question/answer
//! records, used for mock end-to-end runs.

use std::collections::BTreeSet;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::VanillaRecord;
use crate::kg::MockGraph;
use crate::sparql::{Binding, QueryCandidate, Projection, Term, TriplePattern};
use crate::verbalize::{LabelMap, VerbalizationMode, Verbalizer};

pub const ENTITY_NS: &str = "http://kgav.example/entity/";
pub const PROPERTY_NS: &str = "http://kgav.example/prop/";

struct Relation {
    pid: &'static str,
    label: &'static str,
    question: &'static str,
    values: Values,
}

enum Values {
    Entities(&'static [&'static str]),
    Years,
    GivenName,
}

const CITIES: &[&str] = &[
    "Lyon", "Porto", "Krakow", "Utrecht", "Graz", "Bergen", "Leipzig", "Turin", "Seville", "Ghent",
    "Tartu", "Brno", "Cork", "Aarhus", "Bologna", "Toulouse",
];

const RELATIONS: &[Relation] = &[
    Relation {
        pid: "P19",
        label: "place of birth",
        question: "Where was {} born?",
        values: Values::Entities(CITIES),
    },
    Relation {
        pid: "P20",
        label: "place of death",
        question: "In which city did {} die?",
        values: Values::Entities(CITIES),
    },
    Relation {
        pid: "P27",
        label: "country of citizenship",
        question: "Which country is {} a citizen of?",
        values: Values::Entities(&[
            "France", "Portugal", "Poland", "Netherlands", "Austria", "Norway", "Germany", "Italy",
            "Spain", "Belgium", "Estonia", "Czechia", "Ireland", "Denmark",
        ]),
    },
    Relation {
        pid: "P106",
        label: "occupation",
        question: "What does {} do for a living?",
        values: Values::Entities(&[
            "painter", "chemist", "architect", "novelist", "surgeon", "composer", "journalist",
            "engineer", "botanist", "lawyer", "sculptor", "astronomer",
        ]),
    },
    Relation {
        pid: "P69",
        label: "educated at",
        question: "Which university did {} attend?",
        values: Values::Entities(&[
            "Northgate University", "Riverside Institute", "Old Harbour College",
            "Eastfield Polytechnic", "Lakeshore Academy", "Hillcrest University",
            "Westmarch College", "Stonebridge Institute",
        ]),
    },
    Relation {
        pid: "P108",
        label: "employer",
        question: "Who is the employer of {}?",
        values: Values::Entities(&[
            "Orion Works", "Bluefield Labs", "Copperline Press", "Meridian Bank", "Atlas Foundry",
            "Silverpine Studio", "Northwind Shipping", "Granite Hall",
        ]),
    },
    Relation {
        pid: "P103",
        label: "native language",
        question: "What is the mother tongue of {}?",
        values: Values::Entities(&[
            "French", "Portuguese", "Polish", "Dutch", "German", "Norwegian", "Italian",
            "Spanish", "Estonian", "Czech", "Irish", "Danish",
        ]),
    },
    Relation {
        pid: "P1303",
        label: "instrument",
        question: "Which instrument does {} play?",
        values: Values::Entities(&[
            "violin", "piano", "cello", "flute", "oboe", "harp", "trumpet", "guitar", "clarinet",
        ]),
    },
    Relation {
        pid: "P641",
        label: "sport",
        question: "Which sport is {} known for?",
        values: Values::Entities(&[
            "rowing", "fencing", "archery", "cycling", "handball", "curling", "sailing", "judo",
        ]),
    },
    Relation {
        pid: "P21",
        label: "sex or gender",
        question: "What is the gender of {}?",
        values: Values::Entities(&["male", "female"]),
    },
    Relation {
        pid: "P735",
        label: "given name",
        question: "What is the first name of {}?",
        values: Values::GivenName,
    },
    Relation {
        pid: "P569",
        label: "year of birth",
        question: "In what year was {} born?",
        values: Values::Years,
    },
];

const GIVEN_NAMES: &[&str] = &[
    "Ada", "Bruno", "Clara", "Dmitri", "Elena", "Felix", "Greta", "Hugo", "Ines", "Jonas", "Karin",
    "Lucas", "Mira", "Nils", "Olga", "Pavel", "Quentin", "Rosa", "Stefan", "Tilde", "Ugo", "Vera",
    "Walter", "Xenia", "Yves", "Zora", "Anton", "Bettina", "Casimir", "Dora",
];

const FAMILY_NAMES: &[&str] = &[
    "Albrecht", "Brandt", "Castell", "Duval", "Eriksen", "Falk", "Gallo", "Hartmann", "Ivanova",
    "Jansen", "Kovac", "Lindqvist", "Moreau", "Novak", "Olsen", "Pereira", "Quist", "Rossi",
    "Sauer", "Tamm", "Urbanek", "Vidal", "Weiss", "Yilmaz", "Zeller", "Aubert", "Berger",
    "Costa", "Dahl", "Engel",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldConfig {
    pub persons: usize,
    pub seed: u64,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self { persons: 600, seed: 0 }
    }
}

/// A gold fact behind one record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fact {
    pub subject: String,
    pub predicate: String,
    pub object: Term,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntheticWorld {
    pub config: WorldConfig,
    pub graph: MockGraph,
    pub records: Vec<VanillaRecord>,
    /// Parallel to `records`.
    pub facts: Vec<Fact>,
}

fn entity(id: &str) -> String {
    format!("{ENTITY_NS}{id}")
}

fn slug(label: &str) -> String {
    label.replace(' ', "_")
}

impl WorldConfig {
    /// Largest supported `persons`: one person per distinct full name.
    pub fn max_persons() -> usize {
        GIVEN_NAMES.len() * FAMILY_NAMES.len()
    }
}

impl SyntheticWorld {
    /// Every person gets one value for every relation. Person names are
    /// unique. Records come out in a seeded random order.
    pub fn generate(config: WorldConfig) -> Self {
        let max = WorldConfig::max_persons();
        assert!(config.persons <= max, "at most {max} persons");
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut graph = MockGraph::new();

        for r in RELATIONS {
            let p = format!("{PROPERTY_NS}{}", r.pid);
            graph.set_label(&p, "en", r.label);
            if let Values::Entities(vals) = r.values {
                for v in vals {
                    graph.set_label(&entity(&slug(v)), "en", v);
                }
            }
        }
        for g in GIVEN_NAMES {
            graph.set_label(&entity(&format!("name_{g}")), "en", g);
        }

        let mut names: Vec<(usize, usize)> = (0..GIVEN_NAMES.len())
            .flat_map(|g| (0..FAMILY_NAMES.len()).map(move |f| (g, f)))
            .collect();
        names.shuffle(&mut rng);
        names.truncate(config.persons);

        let mut records = Vec::with_capacity(config.persons * RELATIONS.len());
        let mut facts = Vec::with_capacity(records.capacity());
        for (n, &(g, f)) in names.iter().enumerate() {
            let person = entity(&format!("person_{n}"));
            let name = format!("{} {}", GIVEN_NAMES[g], FAMILY_NAMES[f]);
            graph.set_label(&person, "en", &name);
            for r in RELATIONS {
                let predicate = format!("{PROPERTY_NS}{}", r.pid);
                let (object, answer) = match r.values {
                    Values::Entities(vals) => {
                        let v = vals.choose(&mut rng).expect("non-empty pool");
                        (Term::iri(entity(&slug(v))), v.to_string())
                    }
                    Values::Years => {
                        let y = rng.random_range(1820..2000).to_string();
                        (Term::literal(y.clone()), y)
                    }
                    Values::GivenName => (
                        Term::iri(entity(&format!("name_{}", GIVEN_NAMES[g]))),
                        GIVEN_NAMES[g].to_string(),
                    ),
                };
                graph.insert(&person, &predicate, object.clone());
                records.push(VanillaRecord {
                    question_id: String::new(),
                    question: r.question.replace("{}", &name),
                    answer: answer.clone(),
                    answer_sentence: format!("The {} of {} is {}.", r.label, name, answer),
                    question_entity_label: name.clone(),
                    question_relation: r.label.to_string(),
                });
                facts.push(Fact {
                    subject: person.clone(),
                    predicate,
                    object,
                });
            }
        }

        let mut order: Vec<usize> = (0..records.len()).collect();
        order.shuffle(&mut rng);
        let mut shuffled_records = Vec::with_capacity(records.len());
        let mut shuffled_facts = Vec::with_capacity(facts.len());
        for (id, i) in order.into_iter().enumerate() {
            let mut r = records[i].clone();
            r.question_id = id.to_string();
            shuffled_records.push(r);
            shuffled_facts.push(facts[i].clone());
        }
        Self {
            config,
            graph,
            records: shuffled_records,
            facts: shuffled_facts,
        }
    }

    /// English labels for every IRI in the graph.
    pub fn label_map(&self) -> LabelMap {
        let mut iris = BTreeSet::new();
        for (s, p, o) in self.graph.triples() {
            iris.insert(s.to_string());
            iris.insert(p.to_string());
            if let Some(o) = o.as_iri() {
                iris.insert(o.to_string());
            }
        }
        iris.into_iter()
            .filter_map(|iri| {
                let l = self.graph.labels_of(&iri)?.get("en")?.clone();
                Some((iri, l))
            })
            .collect()
    }

    /// Records whose answer sentence is replaced by the verbalization of
    /// their gold fact in `mode`, so training text matches what the filter
    /// will see.
    pub fn records_for_mode(&self, mode: VerbalizationMode) -> Vec<VanillaRecord> {
        let labels = self.label_map();
        let verbalizer = Verbalizer::default();
        self.records
            .iter()
            .zip(&self.facts)
            .map(|(r, f)| {
                let q = fact_query(f);
                let b = Binding::new().with("o1", f.object.clone());
                let text = verbalizer
                    .verbalize(&q, &b, 0, mode, &labels)
                    .expect("gold fact grounds")
                    .text;
                VanillaRecord {
                    answer_sentence: text,
                    ..r.clone()
                }
            })
            .collect()
    }
}

fn fact_query(f: &Fact) -> QueryCandidate {
    QueryCandidate {
        id: String::new(),
        rank: 1,
        projection: Projection::All,
        distinct: true,
        patterns: vec![TriplePattern::new(
            Term::iri(f.subject.clone()),
            Term::iri(f.predicate.clone()),
            Term::var("o1"),
        )],
        modifiers: vec![],
        prefixes: Default::default(),
        raw_text: String::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_sized() {
        let a = SyntheticWorld::generate(WorldConfig { persons: 20, seed: 3 });
        let b = SyntheticWorld::generate(WorldConfig { persons: 20, seed: 3 });
        assert_eq!(a.records, b.records);
        assert_eq!(a.records.len(), 20 * RELATIONS.len());
        assert_eq!(a.graph.len(), 20 * RELATIONS.len());
        for f in &a.facts {
            assert!(a.graph.contains(&f.subject, &f.predicate, &f.object));
        }
    }

    #[test]
    fn mode_records_use_verbalizer_output() {
        let w = SyntheticWorld::generate(WorldConfig { persons: 5, seed: 1 });
        let nlg = w.records_for_mode(VerbalizationMode::Nlg);
        let bol = w.records_for_mode(VerbalizationMode::BagOfLabels);
        for ((r, n), b) in w.records.iter().zip(&nlg).zip(&bol) {
            assert!(n.answer_sentence.contains(&r.question_entity_label));
            assert!(n.answer_sentence.ends_with(&format!("{}.", r.answer)));
            assert_eq!(
                b.answer_sentence,
                format!("{} {} {}", r.question_entity_label, r.question_relation, r.answer)
            );
        }
    }
}
