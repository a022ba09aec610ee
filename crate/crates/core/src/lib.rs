//! Graph structures on orientable 3-manifolds, modelled as decorated graphs of
//! Seifert-fibered pieces glued along tori.
//!
//! The crate is organised bottom-up:
//!
//! - [`orbifold`]: exact arithmetic on finite-type 2-orbifolds (Euler
//!   characteristics, capping, end conversion, merging) and the thin-base
//!   classification.
//! - [`lattice`]: primitive slopes and determinant −1 gluing matrices.
//! - [`seifert`]: piece semantics: thin/thick classification, fibration
//!   matching, filling solid tori, merging across matching tori.
//! - [`graph`]: the decorated dual graph with eventually-periodic rays,
//!   plus structural validation.
//! - [`reduce`]: the staged rewriting engine producing reduced structures,
//!   or a diagnosis when the input cannot have one.
//! - [`canon`]: canonical signatures and decorated-graph isomorphism.
//! - [`io`]: the GSF text format, a seeded instance generator and the CLI.
//!
//! ```
//! use graphmfd::io::gsf;
//! use graphmfd::reduce::{reduce, Policy};
//!
//! let g = gsf::parse(
//!     "piece A orientable genus=0 boundary=1 ends=1 cones=2,3\n\
//!      piece T orientable genus=0 boundary=2 ends=0 cones=none\n\
//!      piece B orientable genus=0 boundary=1 ends=1 cones=2,5\n\
//!      edge e1 A:0 T:0 matrix=1,0,0,-1\n\
//!      edge e2 T:1 B:0 matrix=1,0,0,-1\n",
//! )
//! .unwrap();
//! let out = reduce(&g, &Policy::SmallestIdFirst).unwrap();
//! // The product piece disappears and the two ends merge across a matching torus.
//! assert_eq!(out.reduced.pieces().len(), 1);
//! assert!(graphmfd::reduce::is_reduced(&out.reduced));
//! ```

pub mod canon;
pub mod graph;
pub mod io;
pub mod lattice;
pub mod orbifold;
pub mod reduce;
pub mod seifert;

pub use graph::{Endpoint, GraphStructure, PeriodicRay, Piece, TorusEdge};
pub use lattice::{GluingMatrix, Slope};
pub use orbifold::{BaseOrbifold, Rational, ThinBaseKind};
pub use seifert::{FiberedPiece, K2Fibration, K2IPiece, SolidTorusPiece, ThinType};
