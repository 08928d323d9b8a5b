//! Corpus-linguistic comparison of two delineated subcorpora of short posts:
//! group delineation from follower data, text cleaning and lemmatization,
//! frequency statistics, lexicon-based sentiment, aligned subword embeddings,
//! topic maps with a side classifier, and the DURel annotation protocol.

pub mod annotate;
pub mod corpus;
pub mod delineate;
pub mod embed;
pub mod error;
pub mod fsio;
pub mod lexstats;
pub mod linalg;
pub mod sentiment;
pub mod stats;
pub mod textprep;
pub mod topics;

pub use corpus::{Side, TweetRecord};
pub use error::{Error, Result};
