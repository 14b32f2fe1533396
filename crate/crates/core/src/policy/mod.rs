//! Expression-tree scheduling policies and their terminal features.

mod features;
mod sexpr;
mod tree;

pub use features::{compute_features, min_max, Feature, FeatureVector, TIST_EPSILON};
pub use sexpr::{parse_policy_file, parse_tree, read_policy_file, to_sexpr, write_policy_file};
pub use tree::{Func, Node, PolicyTree};
