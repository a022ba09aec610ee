//! The reduction engine.
//!
//! [`reduce`] rewrites a validated structure into a reduced one by running
//! five stages to a global fixpoint:
//!
//! - **A** absorbs solid tori: product pieces next to a solid torus are
//!   swallowed by it, then each solid torus is filled into its fibered
//!   neighbor (adding a cone point of order α when α ≥ 2).
//! - **B** collapses finite chains of T²×I pieces into single edges.
//! - **C** absorbs T²×[0,∞) ends (product rays and half-infinite annulus
//!   pieces) into their neighbor as new ends of its base.
//! - **D** merges each K²×~I piece into its neighbor when one of its two
//!   fibrations matches, and otherwise fixes the Moebius fibration on it.
//! - **E** merges thick pieces across tori whose fibers match.
//!
//! Inputs that cannot carry a reduced structure (closed manifolds, solid
//! tori whose meridian is the neighboring fiber, exhaustions by solid tori)
//! produce a [`Diagnosis`] instead.

mod engine;
mod policy;
mod stages;

use std::fmt;

use thiserror::Error;

use crate::graph::{validate, GraphStructure, Violation};
use crate::lattice::{GluingMatrix, LatticeError, Slope};
use crate::orbifold::OrbifoldError;
use crate::seifert::{fibrations_match, Piece, SeifertError, ThinType};

pub use policy::Policy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MoveKind {
    AbsorbSolidTorus,
    MergeT2xIChain,
    CollapseRay,
    ResolveK2xI,
    MergeMatchingTorus,
}

impl MoveKind {
    pub fn name(self) -> &'static str {
        match self {
            MoveKind::AbsorbSolidTorus => "AbsorbSolidTorus",
            MoveKind::MergeT2xIChain => "MergeT2xIChain",
            MoveKind::CollapseRay => "CollapseRay",
            MoveKind::ResolveK2xI => "ResolveK2xI",
            MoveKind::MergeMatchingTorus => "MergeMatchingTorus",
        }
    }
}

impl fmt::Display for MoveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One rewrite step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Move {
    pub kind: MoveKind,
    /// Ids present before the move that it consumed or changed.
    pub affected: Vec<String>,
    /// Ids present after the move that it produced or changed.
    pub result: Vec<String>,
    /// For a solid torus filled into a fibered piece, the order of the new
    /// exceptional fiber (1 when no cone point is added).
    pub alpha: Option<u32>,
}

impl fmt::Display for Move {
    /// The trace line format: `MOVE <kind> affected=<ids> result=<ids>`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "MOVE {} affected={} result={}",
            self.kind,
            self.affected.join(","),
            self.result.join(",")
        )?;
        if let Some(a) = self.alpha {
            write!(f, " alpha={a}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiagnosisKind {
    /// The manifold is an increasing union of solid tori.
    ExhaustionBySolidTori,
    /// Reserved for ℝ³-like inputs; no finite structure in this model
    /// produces it.
    PlainR3Like,
    /// The manifold is (genuine or fake) S¹×ℝ².
    S1xR2Like,
    ClosedSeifert,
    ClosedNonSeifert,
    /// A solid torus is glued so that the fiber bounds a meridian disk and
    /// the result contains an essential sphere.
    ReducibleWitness,
    /// Filling solid tori turned a fibered piece into a solid torus whose
    /// meridian is not determined by the stored data.
    NonMaximalSolidTorus,
}

impl DiagnosisKind {
    pub fn name(self) -> &'static str {
        match self {
            DiagnosisKind::ExhaustionBySolidTori => "ExhaustionBySolidTori",
            DiagnosisKind::PlainR3Like => "PlainR3Like",
            DiagnosisKind::S1xR2Like => "S1xR2Like",
            DiagnosisKind::ClosedSeifert => "ClosedSeifert",
            DiagnosisKind::ClosedNonSeifert => "ClosedNonSeifert",
            DiagnosisKind::ReducibleWitness => "ReducibleWitness",
            DiagnosisKind::NonMaximalSolidTorus => "NonMaximalSolidTorus",
        }
    }
}

impl fmt::Display for DiagnosisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Why an input has no reduced structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnosis {
    pub kind: DiagnosisKind,
    /// Input ids involved in the obstruction.
    pub witnesses: Vec<String>,
    pub message: String,
}

impl Diagnosis {
    pub(crate) fn new(
        kind: DiagnosisKind,
        witnesses: Vec<String>,
        message: impl Into<String>,
    ) -> Self {
        Diagnosis {
            kind,
            witnesses,
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnosis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "DIAGNOSIS {} witnesses={}: {}",
            self.kind,
            self.witnesses.join(","),
            self.message
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReduceError {
    #[error("invalid structure: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("{0}")]
    Diagnosis(Diagnosis),
    #[error(transparent)]
    Seifert(#[from] SeifertError),
    /// A configuration the stages never produce from a valid input.
    #[error("internal error: {0}")]
    Stuck(String),
}

impl From<LatticeError> for ReduceError {
    fn from(e: LatticeError) -> Self {
        ReduceError::Seifert(e.into())
    }
}

impl From<OrbifoldError> for ReduceError {
    fn from(e: OrbifoldError) -> Self {
        ReduceError::Seifert(e.into())
    }
}

impl ReduceError {
    pub fn diagnosis(&self) -> Option<&Diagnosis> {
        match self {
            ReduceError::Diagnosis(d) => Some(d),
            _ => None,
        }
    }
}

/// A successful reduction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduced {
    pub reduced: GraphStructure,
    pub trace: Vec<Move>,
}

/// Reduces `g` under `policy`.
pub fn reduce(g: &GraphStructure, policy: &Policy) -> Result<Reduced, ReduceError> {
    engine::run(g, policy, None)
}

/// Like [`reduce`], calling `observer` after every move with the move and
/// the structure it produced. Intended for audits on small inputs: each
/// call materialises the whole structure.
pub fn reduce_with_observer(
    g: &GraphStructure,
    policy: &Policy,
    observer: &mut dyn FnMut(&Move, &GraphStructure),
) -> Result<Reduced, ReduceError> {
    engine::run(g, policy, Some(observer))
}

/// Fiber slopes of the fibrations a piece may carry, in its own boundary
/// basis, for the purpose of matching across a torus. Thick fibered pieces
/// have one; K²×~I pieces (fibered or not) have two.
fn candidate_fibers(piece: &Piece) -> Vec<Slope> {
    match piece {
        Piece::K2I(_) => vec![Slope::FIBER, Slope::SECTION],
        Piece::Fibered(p) if p.classify_unchecked() == ThinType::K2xI => {
            vec![Slope::FIBER, Slope::SECTION]
        }
        Piece::Fibered(_) => vec![Slope::FIBER],
        Piece::SolidTorus(_) => vec![],
    }
}

/// Whether some fibration on each side extends across a torus.
fn some_fibers_match(a: &Piece, matrix: &GluingMatrix, b: &Piece) -> bool {
    let fa = candidate_fibers(a);
    let fb = candidate_fibers(b);
    fa.iter()
        .any(|x| fb.iter().any(|y| fibrations_match(matrix, *x, *y)))
}

/// The reducedness predicate.
///
/// True iff there is no solid torus, no T²×I or T²×[0,∞) piece and no
/// product ray, no edge between thick pieces (or a loop) whose fibers
/// match, and no K²×~I piece whose edge matches one of its fibrations.
/// Invalid structures are not reduced.
pub fn is_reduced(g: &GraphStructure) -> bool {
    if validate(g).is_err() {
        return false;
    }
    for piece in g.pieces().values() {
        match piece {
            Piece::SolidTorus(_) => return false,
            Piece::Fibered(p) => {
                let t = p.classify_unchecked();
                if t == ThinType::T2xI || t == ThinType::T2xRPlus {
                    return false;
                }
            }
            Piece::K2I(_) => {}
        }
    }
    if g.rays().values().any(|r| r.is_product()) {
        return false;
    }
    g.edges().values().all(|e| {
        let a = &g.pieces()[&e.a.piece];
        let b = &g.pieces()[&e.b.piece];
        !some_fibers_match(a, &e.matrix, b)
    })
}

#[cfg(test)]
mod tests;
