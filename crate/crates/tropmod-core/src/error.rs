use alloc::string::String;

/// Structural problems when building graphs or pairs.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("pairing is not a fixed-point-free involution at half-edge {half_edge}")]
    NotInvolution { half_edge: usize },
    #[error("half-edge {half_edge} is rooted at a vertex that does not exist")]
    RootOutOfRange { half_edge: usize },
    #[error("edge {edge} is a loop")]
    LoopNotAllowed { edge: usize },
    #[error("labelling is not a bijection onto 0..|E|-1")]
    NotBijective,
    #[error("malformed input: {0}")]
    Malformed(&'static str),
}

/// The first violated invariant of a stable graph.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum Violation {
    #[error("3g - 3 + n must be positive (g = {g}, n = {n})")]
    NotHyperbolic { g: usize, n: usize },
    #[error("weight list does not match the vertex count")]
    WeightCount,
    #[error("marking {marking} points at a missing vertex")]
    MarkingOutOfRange { marking: usize },
    #[error("graph is not connected")]
    Disconnected,
    #[error("b1 + total weight is {found}, expected genus {expected}")]
    Genus { expected: usize, found: usize },
    #[error("vertex {vertex} is unstable")]
    Unstable { vertex: usize },
}

/// Failures of the deck pipeline.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ReconstructionError {
    #[error("graph has {0} vertices; reconstruction needs at least 3")]
    TooFewVertices(isize),
    #[error("deck entries carry positive vertex weight, so b1 != g")]
    NotFullGenus,
    #[error("inconsistent deck: {0}")]
    Inconsistent(String),
    #[error("no uncontraction matches the intersection matrix")]
    NoCandidate,
    #[error("internal error: {0} non-isomorphic uncontractions match")]
    Ambiguous(usize),
    #[error("full-subgraph detection needs 3 or 4 vertices")]
    Inapplicable,
    #[error("invalid uncontraction: {0}")]
    BadSpec(&'static str),
}

/// Failures of the complex-level tools.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ComplexError {
    #[error("3g - 3 + n must be positive")]
    NotHyperbolic,
    #[error("triple is not admissible: {0}")]
    Inadmissible(&'static str),
    #[error("index out of range")]
    OutOfRange,
    #[error("instance exceeds the cell budget ({cells} > {limit})")]
    TooLarge { cells: usize, limit: usize },
    #[error("search budget of {0} nodes exhausted")]
    Timeout(u64),
}
