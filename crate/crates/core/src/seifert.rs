//! Piece-level semantics of Seifert-fibered pieces.
//!
//! A graph vertex carries one of three decorations:
//!
//! - a [`FiberedPiece`] over a [`BaseOrbifold`], whose boundary torus `i`
//!   uses (section, fiber) coordinates with fiber `(0, 1)`;
//! - a [`SolidTorusPiece`] given by its meridian slope;
//! - a [`K2IPiece`], the twisted I-bundle over the Klein bottle, which has two
//!   Seifert fibrations. In its boundary basis the fibration over the Moebius
//!   band has fiber `(0, 1)` and the fibration over the disk with two order-2
//!   cone points has fiber `(1, 0)`.
//!
//! Fibered solid tori are not representable as [`FiberedPiece`]s: the base
//! does not determine the meridian, so they must be entered explicitly.

use std::fmt;

use num_traits::Zero;
use thiserror::Error;

use crate::lattice::{GluingMatrix, LatticeError, Slope};
use crate::orbifold::{BaseClass, BaseOrbifold, OrbifoldError, Rational, ThinBaseKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeifertError {
    #[error(transparent)]
    Orbifold(#[from] OrbifoldError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("ambiguous solid torus encoding: a fibered piece over a disk or plane with at most one cone point does not determine its meridian")]
    AmbiguousSolidTorus,
    #[error("closed piece: thinness is only defined for nonclosed pieces")]
    ClosedPiece,
    #[error("fibrations do not match across this torus")]
    FibrationsDoNotMatch,
}

/// The seven thin manifolds, plus `Thick` for everything else.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ThinType {
    SolidTorus,
    T2xI,
    K2xI,
    S1xR2,
    T2xR,
    K2xR,
    T2xRPlus,
    Thick,
}

impl ThinType {
    pub fn is_thin(self) -> bool {
        self != ThinType::Thick
    }

    pub fn name(self) -> &'static str {
        match self {
            ThinType::SolidTorus => "SolidTorus",
            ThinType::T2xI => "T2xI",
            ThinType::K2xI => "K2xI",
            ThinType::S1xR2 => "S1xR2",
            ThinType::T2xR => "T2xR",
            ThinType::K2xR => "K2xR",
            ThinType::T2xRPlus => "T2xRPlus",
            ThinType::Thick => "Thick",
        }
    }
}

impl fmt::Display for ThinType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The total space over each thin base.
pub fn thin_type_of_base(kind: ThinBaseKind) -> ThinType {
    match kind {
        ThinBaseKind::DiskLeqOneCone => ThinType::SolidTorus,
        ThinBaseKind::PlaneLeqOneCone => ThinType::S1xR2,
        ThinBaseKind::DiskTwoCones2 | ThinBaseKind::Moebius => ThinType::K2xI,
        ThinBaseKind::PlaneTwoCones2 | ThinBaseKind::OpenMoebius => ThinType::K2xR,
        ThinBaseKind::FiniteAnnulus => ThinType::T2xI,
        ThinBaseKind::HalfInfiniteAnnulus => ThinType::T2xRPlus,
        ThinBaseKind::BiInfiniteAnnulus => ThinType::T2xR,
    }
}

/// A Seifert piece over a finite-type base orbifold.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FiberedPiece {
    pub base: BaseOrbifold,
}

impl FiberedPiece {
    pub fn new(base: BaseOrbifold) -> Self {
        FiberedPiece { base }
    }

    pub fn slot_count(&self) -> usize {
        self.base.boundary_count() as usize
    }

    /// Thin type of the piece. Closed pieces and ambiguous solid-torus
    /// encodings are rejected.
    pub fn classify(&self) -> Result<ThinType, SeifertError> {
        if self.base.is_closed() {
            return Err(SeifertError::ClosedPiece);
        }
        if self.base.is_disk_or_plane_with_at_most_one_cone() {
            return Err(SeifertError::AmbiguousSolidTorus);
        }
        Ok(self.classify_unchecked())
    }

    /// Same as [`FiberedPiece::classify`] but reports fibered solid tori and
    /// closed pieces as they are instead of failing.
    pub(crate) fn classify_unchecked(&self) -> ThinType {
        match self.base.classify() {
            Ok(BaseClass::Thin(kind)) => thin_type_of_base(kind),
            Ok(BaseClass::NotThin) => ThinType::Thick,
            Err(_) => ThinType::Thick,
        }
    }

    pub fn is_thick(&self) -> bool {
        !self.base.is_closed() && self.classify_unchecked() == ThinType::Thick
    }

    pub fn euler_char(&self) -> Rational {
        self.base.euler_char_compactified()
    }
}

/// An explicit solid torus. The meridian is written in the torus's own
/// boundary basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SolidTorusPiece {
    pub meridian: Slope,
}

impl SolidTorusPiece {
    pub fn new(meridian: Slope) -> Result<Self, SeifertError> {
        if !meridian.is_primitive() {
            return Err(LatticeError::NotPrimitive(meridian.section, meridian.fiber).into());
        }
        Ok(SolidTorusPiece { meridian })
    }
}

/// The two Seifert fibrations of K²×~I.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum K2Fibration {
    /// Over the Moebius band; fiber `(0, 1)`.
    Moebius,
    /// Over the disk with two order-2 cone points; fiber `(1, 0)`.
    DiskTwoCones,
}

impl K2Fibration {
    pub const BOTH: [K2Fibration; 2] = [K2Fibration::Moebius, K2Fibration::DiskTwoCones];

    pub fn fiber(self) -> Slope {
        match self {
            K2Fibration::Moebius => Slope::FIBER,
            K2Fibration::DiskTwoCones => Slope::SECTION,
        }
    }

    pub fn base(self) -> BaseOrbifold {
        match self {
            K2Fibration::Moebius => BaseOrbifold::moebius(),
            K2Fibration::DiskTwoCones => BaseOrbifold::disk_two_cones(),
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            K2Fibration::Moebius => "moebius",
            K2Fibration::DiskTwoCones => "disk22",
        }
    }
}

/// K²×~I with one boundary slot and, once chosen, a fibration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct K2IPiece {
    pub fibration: Option<K2Fibration>,
}

/// A vertex decoration of the dual graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Piece {
    Fibered(FiberedPiece),
    SolidTorus(SolidTorusPiece),
    K2I(K2IPiece),
}

impl Piece {
    pub fn slot_count(&self) -> usize {
        match self {
            Piece::Fibered(p) => p.slot_count(),
            Piece::SolidTorus(_) | Piece::K2I(_) => 1,
        }
    }

    pub fn end_count(&self) -> u32 {
        match self {
            Piece::Fibered(p) => p.base.end_count(),
            Piece::SolidTorus(_) | Piece::K2I(_) => 0,
        }
    }

    pub fn classify(&self) -> Result<ThinType, SeifertError> {
        classify_piece(self)
    }

    pub fn as_fibered(&self) -> Option<&FiberedPiece> {
        match self {
            Piece::Fibered(p) => Some(p),
            _ => None,
        }
    }

    /// Contribution to the Euler characteristic ledger: χ(Ô) for fibered
    /// pieces; solid tori and K²×~I pieces contribute zero.
    pub fn euler_contribution(&self) -> Rational {
        match self {
            Piece::Fibered(p) => p.euler_char(),
            Piece::SolidTorus(_) | Piece::K2I(_) => Rational::zero(),
        }
    }
}

pub fn classify_piece(piece: &Piece) -> Result<ThinType, SeifertError> {
    match piece {
        Piece::SolidTorus(_) => Ok(ThinType::SolidTorus),
        Piece::K2I(_) => Ok(ThinType::K2xI),
        Piece::Fibered(p) => p.classify(),
    }
}

/// Whether `matrix` carries `fiber_a` to `±fiber_b`.
pub fn fibrations_match(matrix: &GluingMatrix, fiber_a: Slope, fiber_b: Slope) -> bool {
    match matrix.apply(fiber_a) {
        Ok(image) => image.parallel(&fiber_b),
        Err(_) => false,
    }
}

/// Geometric intersection number of the two fiber classes on a torus glued
/// by `matrix` between two fibered pieces.
pub fn fiber_intersection(matrix: &GluingMatrix) -> u64 {
    matrix.matrix().b.unsigned_abs()
}

/// Outcome of filling a boundary torus with a solid torus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Extension {
    /// The fibration extends; the slot was capped with a cone of order
    /// `alpha` (no cone when `alpha == 1`).
    Extended { piece: FiberedPiece, alpha: u32 },
    /// The fiber bounds a meridian disk.
    NoExtension,
}

/// Pulls the meridian of `v` back to the piece's slot basis. `matrix` sends
/// the piece's coordinates at the slot to `v`'s boundary basis.
pub fn pulled_back_meridian(
    v: &SolidTorusPiece,
    matrix: &GluingMatrix,
) -> Result<Slope, SeifertError> {
    Ok(matrix.inverse().apply(v.meridian)?)
}

/// Order of the exceptional fiber created by filling: `|m ∧ fiber|` for the
/// pulled-back meridian `m`.
pub fn filling_order(meridian_in_piece: Slope) -> u64 {
    meridian_in_piece.section.unsigned_abs()
}

pub fn extend_over_solid_torus(
    piece: &FiberedPiece,
    slot: usize,
    v: &SolidTorusPiece,
    matrix: &GluingMatrix,
) -> Result<Extension, SeifertError> {
    if slot >= piece.slot_count() {
        return Err(OrbifoldError::InvalidSlot {
            slot,
            boundary: piece.base.boundary_count(),
        }
        .into());
    }
    let m = pulled_back_meridian(v, matrix)?;
    let alpha = filling_order(m);
    if alpha == 0 {
        return Ok(Extension::NoExtension);
    }
    let alpha = u32::try_from(alpha).map_err(|_| LatticeError::Overflow)?;
    Ok(Extension::Extended {
        piece: FiberedPiece::new(piece.base.cap_with_cone(slot, alpha)?),
        alpha,
    })
}

/// Merges two distinct fibered pieces across a torus on which their
/// fibrations match. `matrix` goes from `a`'s slot to `b`'s slot.
pub fn merge_across(
    a: &FiberedPiece,
    slot_a: usize,
    b: &FiberedPiece,
    slot_b: usize,
    matrix: &GluingMatrix,
    base_reversing: bool,
) -> Result<FiberedPiece, SeifertError> {
    if !fibrations_match(matrix, Slope::FIBER, Slope::FIBER) {
        return Err(SeifertError::FibrationsDoNotMatch);
    }
    let base = BaseOrbifold::merge_bases(&a.base, slot_a, &b.base, slot_b, base_reversing)?;
    Ok(FiberedPiece::new(base))
}

/// Removes a torus both of whose sides lie on the same fibered piece.
pub fn merge_loop(
    piece: &FiberedPiece,
    slot_a: usize,
    slot_b: usize,
    matrix: &GluingMatrix,
    base_reversing: bool,
) -> Result<FiberedPiece, SeifertError> {
    if !fibrations_match(matrix, Slope::FIBER, Slope::FIBER) {
        return Err(SeifertError::FibrationsDoNotMatch);
    }
    Ok(FiberedPiece::new(piece.base.self_merge(
        slot_a,
        slot_b,
        base_reversing,
    )?))
}
