//! Epistemic logic of fixed-topology communication networks.
//!
//! An undirected multigraph models a communication network: vertices are
//! agents, edges are channels. A protocol fixes a finite value domain per
//! channel and a local condition per agent; a run is a global assignment of
//! channel values satisfying every local condition. The modality `[e] phi`
//! reads "any observer eavesdropping on channel `e` knows phi": it holds at a
//! run when phi holds at every run with the same value on `e`.
//!
//! The crate provides:
//!
//! * [`multigraph`]: the network topology and its queries (incidence,
//!   components after edge deletion, bridges, gateways, cycle search);
//! * [`formula`]: the object language, its parser/printer, fragment
//!   membership, and edge-clausal normalization;
//! * [`protocol`]: finite protocols, runs, and run enumeration;
//! * [`modelcheck`]: the satisfaction relation, validity over a protocol,
//!   and axiom-schema soundness checking;
//! * [`proofcheck`]: a verifier for Hilbert-style derivations in the system
//!   S5 + Gateway, with shipped derivation fixtures;
//! * [`flow`]: exact-rational network flows realizing finite knowledge
//!   profiles, with verification, augmentation, and rerouting;
//! * [`io`]: the JSON document schemas shared with the command-line tool.
//!
//! ```
//! use eaves::fixtures;
//! use eaves::formula::parse;
//! use eaves::modelcheck::StateSpace;
//!
//! // The exact one-time-pad protocol with 1-bit strings has four runs.
//! let protocol = fixtures::p1_protocol(1);
//! let sig = protocol.signature().clone();
//! let mut space = StateSpace::new(&protocol).unwrap();
//!
//! // On a run delivering m' = 1, the m-observer knows the delivered value,
//! // while the ciphertext observer does not.
//! let run = space
//!     .runs()
//!     .iter()
//!     .find(|r| r.values[&"m".into()] == "1".into() && r.values[&"k".into()] == "0".into())
//!     .unwrap()
//!     .clone();
//! assert!(space.satisfies(&run, &parse(&sig, "[m] mp_1").unwrap()).unwrap());
//! assert!(!space.satisfies(&run, &parse(&sig, "[c] mp_1").unwrap()).unwrap());
//! ```

pub mod fixtures;
pub mod flow;
pub mod formula;
pub mod io;
pub mod modelcheck;
pub mod multigraph;
pub mod proofcheck;
pub mod protocol;

pub use multigraph::{EdgeEnd, EdgeId, Multigraph, Path, Side, VertexId};
