//! Process recommendations for video game projects, learned from the
//! postmortems of finished games.
//!
//! A finished game leaves behind two artifacts this library consumes: the
//! process its team actually followed, read out of the postmortem as
//! elements (activities with a development stage, team traits, project
//! characteristics, each with a quotation and a went-wrong flag), and the
//! project's context, a 61-variable binary profile covering practices, team,
//! management, technology, platform, and design. A new project brings only a
//! context. The library projects every context into a low-dimensional PCA
//! score space, finds the finished games nearest to the new one, and merges
//! their process elements into a recommendation in which every element keeps
//! its source games and quotations. Graph output, evaluation metrics, and
//! rating tallies round out the pipeline.
//!
//! The `examples/` directory is the front door; each example is runnable
//! against the bundled fixture corpus:
//!
//! ```text
//! cargo run -p procrec --example ingest_corpus             # corpus + dictionary normalization
//! cargo run -p procrec --example context_catalog           # the 61-variable catalog and linting
//! cargo run -p procrec --example project_similarity        # PCA fit, scores, neighbor ranking
//! cargo run -p procrec --example recommend_process         # merged recommendation with provenance
//! cargo run -p procrec --example render_process            # DOT drawings of processes
//! cargo run -p procrec --example evaluate_recommendations  # confusion matrix + coverage tables
//! cargo run -p procrec --example case_study_ratings        # five-dimension rating tallies
//! ```
//!
//! The same flows are scriptable through the thin `procrec` binary
//! (`ingest`, `normalize`, `context`, `recommend`, `evaluate`,
//! `replay-metrics`, `render`, `biplot`).
//!
//! Determinism is a design rule throughout: fits sort their inputs,
//! rankings break ties by name, JSON and DOT emitters iterate in fixed
//! orders — same inputs, same bytes.

pub mod cli;
pub mod context;
pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod recommender;
pub mod render;
pub mod similarity;

pub use error::{Error, Result};
