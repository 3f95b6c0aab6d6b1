//! Prover/verifier laboratory for local certification of graph properties.
//!
//! The crate builds certificates for treedepth, small first-order fragments
//! and first-order model checking on graphs of bounded treedepth (through a
//! certifiable kernel), simulates radius-1 verification at every node,
//! accounts certificate sizes in bits, and attacks soundness by fuzzing.
//!
//! Module map:
//! - [`graph`], [`generate`]: graphs, file format, generators, small-graph enumeration.
//! - [`logic`]: first-order sentences and the brute-force evaluator.
//! - [`ef`]: Ehrenfeucht–Fraïssé game solver.
//! - [`treedepth`]: elimination trees, exact solver, coherence.
//! - [`kernel`]: types, valid pruning and the kernel.
//! - [`cert`]: certificates, local views, the verification runner and fuzzers.
//! - [`schemes`]: the concrete certification schemes.

pub mod cert;
pub mod ef;
pub mod generate;
pub mod graph;
pub mod kernel;
pub mod logic;
pub mod schemes;
pub mod treedepth;

pub use graph::{load_graph, Graph, GraphError, NodeId};
pub use logic::{parse_formula, Formula, Sentence};
pub use treedepth::Model;
