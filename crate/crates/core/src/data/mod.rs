//! Corpus files, labeled/unlabeled splits and synthetic corpora.

mod corpus;
mod split;
mod synthetic;

pub use corpus::{
    corpus_to_string, load_corpus, load_vocabulary, parse_corpus, parse_vocabulary, write_corpus,
    Vocabulary, CORPUS_MAGIC, CORPUS_VERSION,
};
pub use split::{sample_nested_splits, sample_split, Split, SplitSpec};
pub use synthetic::{generate_synthetic, SyntheticCorpus, SyntheticSpec, BACKGROUND_RATE};
