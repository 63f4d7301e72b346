//! JSON interchange records for graphs, labelled pairs and decks.
//!
//! Markings are 1-based in files (`"1": 0` puts marking 1 on vertex 0) and
//! zero-based inside `tropmod-core`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use tropmod_core::canon::{canonical, Mode};
use tropmod_core::reconstruction::{Deck, DeckEntry};
use tropmod_core::{LabelledPair, StableGraph};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexRecord {
    pub id: usize,
    pub weight: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub id: usize,
    pub ends: [usize; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphRecord {
    pub g: usize,
    pub n: usize,
    pub vertices: Vec<VertexRecord>,
    pub edges: Vec<EdgeRecord>,
    pub markings: BTreeMap<usize, usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<String>,
}

impl GraphRecord {
    pub fn from_graph(graph: &StableGraph) -> Self {
        Self::build(graph, None)
    }

    pub fn from_pair(pair: &LabelledPair) -> Self {
        Self::build(&pair.graph, Some(&pair.tau))
    }

    /// Adds the lowercase-hex isomorphism certificate of the underlying graph.
    pub fn with_certificate(mut self, graph: &StableGraph) -> Self {
        self.certificate = Some(canonical(graph, Mode::Iso).hex());
        self
    }

    fn build(graph: &StableGraph, tau: Option<&[usize]>) -> Self {
        GraphRecord {
            g: graph.g,
            n: graph.n(),
            vertices: graph
                .weights
                .iter()
                .enumerate()
                .map(|(id, &weight)| VertexRecord { id, weight })
                .collect(),
            edges: (0..graph.num_edges())
                .map(|e| {
                    let (a, b) = graph.ends(e);
                    EdgeRecord {
                        id: e,
                        ends: [a, b],
                        label: tau.map(|t| t[e]),
                    }
                })
                .collect(),
            markings: graph.markings.iter().enumerate().map(|(i, &v)| (i + 1, v)).collect(),
            certificate: None,
        }
    }

    /// The validated stable graph. Edge and vertex ids must be 0..len in order.
    pub fn to_graph(&self) -> Result<StableGraph, CliError> {
        for (i, v) in self.vertices.iter().enumerate() {
            if v.id != i {
                return Err(CliError::Input(format!("vertex ids must be 0..{} in order", self.vertices.len())));
            }
        }
        let nv = self.vertices.len();
        let mut ends = Vec::with_capacity(self.edges.len());
        for (i, e) in self.edges.iter().enumerate() {
            if e.id != i {
                return Err(CliError::Input(format!("edge ids must be 0..{} in order", self.edges.len())));
            }
            if e.ends[0] >= nv || e.ends[1] >= nv {
                return Err(CliError::Input(format!("edge {i} ends at a missing vertex")));
            }
            ends.push((e.ends[0], e.ends[1]));
        }
        if self.markings.len() != self.n || !self.markings.keys().copied().eq(1..=self.n) {
            return Err(CliError::Input(format!("markings must be exactly 1..={}", self.n)));
        }
        let markings: Vec<usize> = self.markings.values().copied().collect();
        if markings.iter().any(|&v| v >= nv) {
            return Err(CliError::Input("a marking points at a missing vertex".into()));
        }
        if nv == 0 {
            return Err(CliError::Input("a graph needs at least one vertex".into()));
        }
        let weights = self.vertices.iter().map(|v| v.weight).collect();
        let graph = StableGraph::new(self.g, weights, &ends, markings);
        graph.validate().map_err(|v| CliError::Input(format!("not a stable graph: {v}")))?;
        Ok(graph)
    }

    /// The validated pair; every edge must carry a label.
    pub fn to_pair(&self) -> Result<LabelledPair, CliError> {
        let graph = self.to_graph()?;
        let tau = self
            .edges
            .iter()
            .map(|e| e.label.ok_or_else(|| CliError::Input(format!("edge {} has no label", e.id))))
            .collect::<Result<Vec<_>, _>>()?;
        LabelledPair::new(graph, tau).map_err(|e| CliError::Input(e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeckEntryRecord {
    pub index: usize,
    pub pair: GraphRecord,
}

/// Header {g, n, p} plus one entry per nonloop label.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeckFile {
    pub g: usize,
    pub n: usize,
    pub p: usize,
    pub entries: Vec<DeckEntryRecord>,
}

impl DeckFile {
    pub fn from_deck(g: usize, n: usize, deck: &Deck) -> Self {
        DeckFile {
            g,
            n,
            p: deck.p,
            entries: deck
                .entries
                .iter()
                .map(|e| DeckEntryRecord {
                    index: e.index,
                    pair: GraphRecord::from_pair(&e.pair),
                })
                .collect(),
        }
    }

    pub fn to_deck(&self) -> Result<Deck, CliError> {
        let mut entries = Vec::with_capacity(self.entries.len());
        for e in &self.entries {
            let pair = e.pair.to_pair()?;
            if pair.graph.g != self.g || pair.graph.n() != self.n {
                return Err(CliError::Input(format!("deck entry {} has the wrong type", e.index)));
            }
            entries.push(DeckEntry { index: e.index, pair });
        }
        entries.sort_by_key(|e| e.index);
        if entries.windows(2).any(|w| w[0].index == w[1].index) {
            return Err(CliError::Input("duplicate deck index".into()));
        }
        Ok(Deck { p: self.p, entries })
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable")
}
