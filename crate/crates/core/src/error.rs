use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("record {id}: score out of range for class {class}")]
    ScoreOutOfRange { id: String, class: String },

    #[error("record {id}: expected {expected} scores, found {found}")]
    ScoreArity {
        id: String,
        expected: usize,
        found: usize,
    },

    #[error("record {id}: unknown group index {group}")]
    UnknownGroup { id: String, group: usize },

    #[error("record {id}: unknown class index {class}")]
    UnknownClass { id: String, class: usize },

    #[error("duplicate id {id}")]
    DuplicateId { id: String },

    #[error("record {id}: label required")]
    MissingLabel { id: String },

    #[error("label set: {0}")]
    InvalidLabelSet(String),

    #[error("split sizes {n_train} + {n_cal} exceed population {population}")]
    SplitTooLarge {
        n_train: usize,
        n_cal: usize,
        population: usize,
    },

    #[error("missing truth for selected records at positions {0:?}")]
    MissingTruth(Vec<usize>),

    #[error("degenerate point: all component densities vanish")]
    DegeneratePoint,

    #[error("invalid mixture spec: {0}")]
    InvalidSpec(String),

    #[error("training: {0}")]
    Training(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty input: {0}")]
    Empty(&'static str),
}
