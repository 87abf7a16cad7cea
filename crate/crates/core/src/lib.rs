//! Semi-supervised agglomerative clustering: single linkage over Euclidean
//! distances, where pairs tied at the minimum distance are resolved by a
//! weighted inter-cluster homogeneity measure.
//!
//! The crate also carries the evaluation pipeline used to judge a
//! clustering: cluster labels are treated as classes, an ID3 decision tree
//! is trained on part of the data, and per-class TP rate, FP rate, precision
//! and recall are reported on the rest.
//!
//! ```
//! use shachom::{dataset::parse_csv, engine::shachom, homogeneity::WeightVector};
//!
//! let ds = parse_csv("2,3\n3,2\n1,2", false, None).unwrap();
//! let w = WeightVector::new(vec![0.2, 0.4]).unwrap();
//! let (dendrogram, partition) = shachom(&ds, 2, &w, 1e-9).unwrap();
//! assert_eq!(dendrogram.records.len(), 1);
//! assert_eq!(partition.assignment, vec![0, 0, 1]);
//! ```

pub mod dataset;
pub mod engine;
mod error;
pub mod eval;
pub mod export;
pub mod homogeneity;
pub mod metric;
pub mod pipeline;

pub use dataset::{Dataset, SplitPair};
pub use engine::{partition_at, shachom, Dendrogram, MergeRecord, Partition, Resolution};
pub use error::{Error, ErrorKind, Result};
pub use homogeneity::{hc, AlphaSpec, ClusterSums, WeightVector};
pub use metric::{ClusterId, DistanceMatrix, Pair, TieSet};
pub use pipeline::{RunConfig, SweepGrid};
