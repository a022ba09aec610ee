//! Finite-type, locally orientable 2-orbifolds whose only singular points are
//! cone points.
//!
//! A [`BaseOrbifold`] records the underlying surface (orientability and
//! genus, counted as handles or crosscaps), its compact boundary circles,
//! its ends, and a sorted multiset of cone orders. Boundary circles are the
//! gluing slots of the Seifert piece sitting over the orbifold; they are
//! addressed by index `0..boundary_count`.
//!
//! The Euler characteristic reported everywhere is the orbifold Euler
//! characteristic of the compactification, in which every end becomes a
//! boundary circle:
//!
//! ```text
//! χ(Ô) = χ(|Ô|) − Σ (1 − 1/q)
//! χ(|Ô|) = 2 − 2g − (b + e)   orientable
//!          2 −  g − (b + e)   nonorientable (g crosscaps)
//! ```

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

/// Exact rational numbers used for Euler characteristics.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrbifoldError {
    #[error("a nonorientable surface needs at least one crosscap")]
    NonorientableGenusZero,
    #[error("cone order {0} is invalid (cone orders are at least 2)")]
    ConeOrderTooSmall(u32),
    #[error("boundary slot {slot} out of range (boundary count {boundary})")]
    InvalidSlot { slot: usize, boundary: u32 },
    #[error("cannot glue boundary slot {0} to itself")]
    SameSlot(usize),
    #[error("thinness is only defined for nonclosed orbifolds")]
    ClosedBase,
    #[error("filling order must be at least 1")]
    ZeroFillingOrder,
}

/// A finite-type 2-orbifold with cone points only.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BaseOrbifold {
    orientable: bool,
    genus: u32,
    boundary: u32,
    ends: u32,
    cones: Vec<u32>,
}

/// The nine nonclosed bases with nonnegative Euler characteristic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ThinBaseKind {
    DiskLeqOneCone,
    PlaneLeqOneCone,
    DiskTwoCones2,
    PlaneTwoCones2,
    Moebius,
    OpenMoebius,
    FiniteAnnulus,
    HalfInfiniteAnnulus,
    BiInfiniteAnnulus,
}

impl ThinBaseKind {
    pub const ALL: [ThinBaseKind; 9] = [
        ThinBaseKind::DiskLeqOneCone,
        ThinBaseKind::PlaneLeqOneCone,
        ThinBaseKind::DiskTwoCones2,
        ThinBaseKind::PlaneTwoCones2,
        ThinBaseKind::Moebius,
        ThinBaseKind::OpenMoebius,
        ThinBaseKind::FiniteAnnulus,
        ThinBaseKind::HalfInfiniteAnnulus,
        ThinBaseKind::BiInfiniteAnnulus,
    ];
}

/// Result of [`BaseOrbifold::classify`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaseClass {
    Thin(ThinBaseKind),
    NotThin,
}

impl BaseOrbifold {
    pub fn new(
        orientable: bool,
        genus: u32,
        boundary: u32,
        ends: u32,
        cones: impl IntoIterator<Item = u32>,
    ) -> Result<Self, OrbifoldError> {
        if !orientable && genus == 0 {
            return Err(OrbifoldError::NonorientableGenusZero);
        }
        let mut cones: Vec<u32> = cones.into_iter().collect();
        if let Some(&q) = cones.iter().find(|&&q| q < 2) {
            return Err(OrbifoldError::ConeOrderTooSmall(q));
        }
        cones.sort_unstable();
        Ok(BaseOrbifold {
            orientable,
            genus,
            boundary,
            ends,
            cones,
        })
    }

    /// Orientable genus-0 surface with the given boundary circles, ends and
    /// cone points.
    pub fn planar(boundary: u32, ends: u32, cones: impl IntoIterator<Item = u32>) -> Self {
        Self::new(true, 0, boundary, ends, cones).expect("cone orders must be at least 2")
    }

    pub fn disk() -> Self {
        Self::planar(1, 0, [])
    }

    pub fn annulus() -> Self {
        Self::planar(2, 0, [])
    }

    pub fn moebius() -> Self {
        BaseOrbifold {
            orientable: false,
            genus: 1,
            boundary: 1,
            ends: 0,
            cones: Vec::new(),
        }
    }

    /// Disk with two cone points of order 2, the second base of K²×~I.
    pub fn disk_two_cones() -> Self {
        Self::planar(1, 0, [2, 2])
    }

    pub fn orientable(&self) -> bool {
        self.orientable
    }

    pub fn genus(&self) -> u32 {
        self.genus
    }

    pub fn boundary_count(&self) -> u32 {
        self.boundary
    }

    pub fn end_count(&self) -> u32 {
        self.ends
    }

    /// Cone orders, sorted ascending.
    pub fn cones(&self) -> &[u32] {
        &self.cones
    }

    pub fn is_closed(&self) -> bool {
        self.boundary == 0 && self.ends == 0
    }

    /// Genus expressed in crosscaps (one handle counts as two).
    fn crosscaps(&self) -> u32 {
        if self.orientable {
            2 * self.genus
        } else {
            self.genus
        }
    }

    /// Euler characteristic of the underlying compactified surface.
    pub fn surface_euler_char(&self) -> i64 {
        let holes = i64::from(self.boundary) + i64::from(self.ends);
        let g = i64::from(self.genus);
        if self.orientable {
            2 - 2 * g - holes
        } else {
            2 - g - holes
        }
    }

    /// Orbifold Euler characteristic of the compactification, exactly.
    pub fn euler_char_compactified(&self) -> Rational {
        let one = Rational::one();
        let mut chi = Rational::from_integer(BigInt::from(self.surface_euler_char()));
        for &q in &self.cones {
            chi -= &one - Rational::new(BigInt::one(), BigInt::from(q));
        }
        chi
    }

    /// A disk or a plane carrying at most one cone point: the base of a
    /// fibered solid torus or of S¹×ℝ².
    pub fn is_disk_or_plane_with_at_most_one_cone(&self) -> bool {
        self.orientable
            && self.genus == 0
            && self.boundary + self.ends == 1
            && self.cones.len() <= 1
    }

    /// Sorts a nonclosed base into one of the nine thin kinds, or `NotThin`.
    ///
    /// The decision is made from the shape of the orbifold, not from its
    /// Euler characteristic; the two agree on every nonclosed base.
    pub fn classify(&self) -> Result<BaseClass, OrbifoldError> {
        use ThinBaseKind::*;
        if self.is_closed() {
            return Err(OrbifoldError::ClosedBase);
        }
        let cones = self.cones.as_slice();
        let kind = match (self.orientable, self.genus, self.boundary, self.ends) {
            (true, 0, 1, 0) if cones.len() <= 1 => Some(DiskLeqOneCone),
            (true, 0, 0, 1) if cones.len() <= 1 => Some(PlaneLeqOneCone),
            (true, 0, 1, 0) if cones == [2, 2] => Some(DiskTwoCones2),
            (true, 0, 0, 1) if cones == [2, 2] => Some(PlaneTwoCones2),
            (true, 0, 2, 0) if cones.is_empty() => Some(FiniteAnnulus),
            (true, 0, 1, 1) if cones.is_empty() => Some(HalfInfiniteAnnulus),
            (true, 0, 0, 2) if cones.is_empty() => Some(BiInfiniteAnnulus),
            (false, 1, 1, 0) if cones.is_empty() => Some(Moebius),
            (false, 1, 0, 1) if cones.is_empty() => Some(OpenMoebius),
            _ => None,
        };
        Ok(kind.map_or(BaseClass::NotThin, BaseClass::Thin))
    }

    fn check_slot(&self, slot: usize) -> Result<(), OrbifoldError> {
        if slot < self.boundary as usize {
            Ok(())
        } else {
            Err(OrbifoldError::InvalidSlot {
                slot,
                boundary: self.boundary,
            })
        }
    }

    /// Caps boundary circle `slot` with a disk carrying a cone point of
    /// order `alpha` (no cone point when `alpha == 1`).
    pub fn cap_with_cone(&self, slot: usize, alpha: u32) -> Result<Self, OrbifoldError> {
        self.check_slot(slot)?;
        if alpha == 0 {
            return Err(OrbifoldError::ZeroFillingOrder);
        }
        let mut out = self.clone();
        out.boundary -= 1;
        if alpha >= 2 {
            out.insert_cone(alpha);
        }
        Ok(out)
    }

    /// Turns boundary circle `slot` into an end.
    pub fn boundary_to_end(&self, slot: usize) -> Result<Self, OrbifoldError> {
        self.check_slot(slot)?;
        let mut out = self.clone();
        out.boundary -= 1;
        out.ends += 1;
        Ok(out)
    }

    /// Glues boundary circle `slot_a` of `a` to boundary circle `slot_b` of
    /// `b`.
    ///
    /// Two distinct connected surfaces glued along one circle can always be
    /// oriented compatibly, so `base_reversing` does not affect the result
    /// here; it is accepted for symmetry with [`BaseOrbifold::self_merge`].
    pub fn merge_bases(
        a: &BaseOrbifold,
        slot_a: usize,
        b: &BaseOrbifold,
        slot_b: usize,
        _base_reversing: bool,
    ) -> Result<Self, OrbifoldError> {
        a.check_slot(slot_a)?;
        b.check_slot(slot_b)?;
        let orientable = a.orientable && b.orientable;
        let genus = if orientable {
            a.genus + b.genus
        } else {
            a.crosscaps() + b.crosscaps()
        };
        let mut cones = a.cones.clone();
        cones.extend_from_slice(&b.cones);
        cones.sort_unstable();
        Ok(BaseOrbifold {
            orientable,
            genus,
            boundary: a.boundary + b.boundary - 2,
            ends: a.ends + b.ends,
            cones,
        })
    }

    /// Glues two boundary circles of the same orbifold together. Without
    /// reversal this adds a handle; with reversal it adds two crosscaps.
    pub fn self_merge(
        &self,
        slot_a: usize,
        slot_b: usize,
        base_reversing: bool,
    ) -> Result<Self, OrbifoldError> {
        self.check_slot(slot_a)?;
        self.check_slot(slot_b)?;
        if slot_a == slot_b {
            return Err(OrbifoldError::SameSlot(slot_a));
        }
        let mut out = self.clone();
        out.boundary -= 2;
        if self.orientable && !base_reversing {
            out.genus += 1;
        } else {
            out.orientable = false;
            out.genus = self.crosscaps() + 2;
        }
        Ok(out)
    }

    /// Adds a cone point of order `q` (`q ≥ 2`).
    pub fn with_cone(&self, q: u32) -> Result<Self, OrbifoldError> {
        if q < 2 {
            return Err(OrbifoldError::ConeOrderTooSmall(q));
        }
        let mut out = self.clone();
        out.insert_cone(q);
        Ok(out)
    }

    fn insert_cone(&mut self, q: u32) {
        let at = self.cones.partition_point(|&c| c <= q);
        self.cones.insert(at, q);
    }
}

impl fmt::Display for BaseOrbifold {
    /// Renders the GSF attribute list, e.g.
    /// `orientable genus=0 boundary=1 ends=0 cones=2,3,7`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let orient = if self.orientable {
            "orientable"
        } else {
            "nonorientable"
        };
        write!(
            f,
            "{orient} genus={} boundary={} ends={} cones=",
            self.genus, self.boundary, self.ends
        )?;
        if self.cones.is_empty() {
            f.write_str("none")
        } else {
            let parts: Vec<String> = self.cones.iter().map(u32::to_string).collect();
            f.write_str(&parts.join(","))
        }
    }
}

/// Renders a rational as `p/q`, or `p` when integral.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Convenience: `true` when χ(Ô) is negative.
pub fn has_negative_euler_char(o: &BaseOrbifold) -> bool {
    o.euler_char_compactified() < Rational::zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn euler_characteristic_examples() {
        assert_eq!(BaseOrbifold::disk().euler_char_compactified(), q(1, 1));
        // Plane with two order-2 cones: 1 − (1/2 + 1/2).
        let plane22 = BaseOrbifold::planar(0, 1, [2, 2]);
        assert_eq!(plane22.euler_char_compactified(), q(0, 1));
        let genus2 = BaseOrbifold::new(true, 2, 0, 0, []).unwrap();
        assert_eq!(genus2.euler_char_compactified(), q(-2, 1));
        let turnover = BaseOrbifold::planar(0, 0, [2, 3, 7]);
        assert_eq!(turnover.euler_char_compactified(), q(-1, 42));
        let disk237 = BaseOrbifold::planar(1, 0, [2, 3, 7]);
        assert_eq!(disk237.euler_char_compactified(), q(-43, 42));
    }

    #[test]
    fn invariants_are_enforced() {
        assert_eq!(
            BaseOrbifold::new(false, 0, 1, 0, []),
            Err(OrbifoldError::NonorientableGenusZero)
        );
        assert_eq!(
            BaseOrbifold::new(true, 0, 1, 0, [3, 1]),
            Err(OrbifoldError::ConeOrderTooSmall(1))
        );
        let o = BaseOrbifold::new(true, 0, 1, 0, [7, 2, 3]).unwrap();
        assert_eq!(o.cones(), &[2, 3, 7]);
    }

    #[test]
    fn classify_examples() {
        assert_eq!(
            BaseOrbifold::annulus().classify(),
            Ok(BaseClass::Thin(ThinBaseKind::FiniteAnnulus))
        );
        assert_eq!(
            BaseOrbifold::moebius().classify(),
            Ok(BaseClass::Thin(ThinBaseKind::Moebius))
        );
        let punctured_torus = BaseOrbifold::new(true, 1, 1, 0, []).unwrap();
        assert_eq!(punctured_torus.classify(), Ok(BaseClass::NotThin));
        assert_eq!(
            BaseOrbifold::new(true, 2, 0, 0, []).unwrap().classify(),
            Err(OrbifoldError::ClosedBase)
        );
    }

    #[test]
    fn cap_examples() {
        let a = BaseOrbifold::annulus();
        assert_eq!(a.cap_with_cone(0, 1).unwrap(), BaseOrbifold::disk());
        let capped = a.cap_with_cone(0, 3).unwrap();
        assert_eq!(capped, BaseOrbifold::planar(1, 0, [3]));
        assert_eq!(capped.euler_char_compactified(), q(1, 3));
        let sphere = BaseOrbifold::disk().cap_with_cone(0, 1).unwrap();
        assert!(sphere.is_closed());
        assert_eq!(sphere.euler_char_compactified(), q(2, 1));
        assert_eq!(
            a.cap_with_cone(2, 1),
            Err(OrbifoldError::InvalidSlot {
                slot: 2,
                boundary: 2
            })
        );
        assert_eq!(a.cap_with_cone(0, 0), Err(OrbifoldError::ZeroFillingOrder));
    }

    #[test]
    fn boundary_to_end_examples() {
        let half = BaseOrbifold::annulus().boundary_to_end(0).unwrap();
        assert_eq!(
            half.classify(),
            Ok(BaseClass::Thin(ThinBaseKind::HalfInfiniteAnnulus))
        );
        let plane = BaseOrbifold::disk().boundary_to_end(0).unwrap();
        assert_eq!(
            plane.classify(),
            Ok(BaseClass::Thin(ThinBaseKind::PlaneLeqOneCone))
        );
        let open = BaseOrbifold::moebius().boundary_to_end(0).unwrap();
        assert_eq!(
            open.classify(),
            Ok(BaseClass::Thin(ThinBaseKind::OpenMoebius))
        );
        assert!(BaseOrbifold::disk().boundary_to_end(1).is_err());
    }

    #[test]
    fn merge_examples() {
        let d = BaseOrbifold::disk();
        let sphere = BaseOrbifold::merge_bases(&d, 0, &d, 0, false).unwrap();
        assert!(sphere.is_closed());
        assert_eq!(sphere.euler_char_compactified(), q(2, 1));

        let a = BaseOrbifold::annulus();
        assert_eq!(BaseOrbifold::merge_bases(&a, 0, &a, 0, false).unwrap(), a);

        let torus = a.self_merge(0, 1, false).unwrap();
        assert_eq!(torus, BaseOrbifold::new(true, 1, 0, 0, []).unwrap());
        let klein = a.self_merge(0, 1, true).unwrap();
        assert_eq!(klein, BaseOrbifold::new(false, 2, 0, 0, []).unwrap());
        assert_eq!(a.self_merge(1, 1, false), Err(OrbifoldError::SameSlot(1)));

        // Orientable genus 1 with a Moebius band: 2 + 1 crosscaps.
        let t = BaseOrbifold::new(true, 1, 1, 0, [3]).unwrap();
        let m = BaseOrbifold::merge_bases(&t, 0, &BaseOrbifold::moebius(), 0, false).unwrap();
        assert_eq!(m, BaseOrbifold::new(false, 3, 0, 0, [3]).unwrap());
    }

    #[test]
    fn display_matches_gsf_attributes() {
        let o = BaseOrbifold::planar(1, 0, [7, 2, 3]);
        assert_eq!(
            o.to_string(),
            "orientable genus=0 boundary=1 ends=0 cones=2,3,7"
        );
        assert_eq!(
            BaseOrbifold::moebius().to_string(),
            "nonorientable genus=1 boundary=1 ends=0 cones=none"
        );
        assert_eq!(format_rational(&q(-1, 42)), "-1/42");
        assert_eq!(format_rational(&q(4, 2)), "2");
    }

    fn arb_orbifold() -> impl Strategy<Value = BaseOrbifold> {
        (
            any::<bool>(),
            0u32..4,
            0u32..5,
            0u32..3,
            prop::collection::vec(2u32..9, 0..4),
        )
            .prop_map(|(orientable, g, b, e, cones)| {
                let g = if orientable { g } else { g + 1 };
                BaseOrbifold::new(orientable, g, b, e, cones).unwrap()
            })
    }

    proptest! {
        #[test]
        fn merge_is_euler_additive(a in arb_orbifold(), b in arb_orbifold(), rev in any::<bool>()) {
            prop_assume!(a.boundary_count() >= 1 && b.boundary_count() >= 1);
            let sa = (a.boundary_count() - 1) as usize;
            let m = BaseOrbifold::merge_bases(&a, sa, &b, 0, rev).unwrap();
            prop_assert_eq!(
                m.euler_char_compactified(),
                a.euler_char_compactified() + b.euler_char_compactified()
            );
            prop_assert_eq!(m.orientable(), a.orientable() && b.orientable());
        }

        #[test]
        fn self_merge_preserves_euler(a in arb_orbifold(), rev in any::<bool>()) {
            prop_assume!(a.boundary_count() >= 2);
            let m = a.self_merge(0, 1, rev).unwrap();
            prop_assert_eq!(m.euler_char_compactified(), a.euler_char_compactified());
        }

        #[test]
        fn capping_adds_reciprocal(a in arb_orbifold(), alpha in 1u32..12) {
            prop_assume!(a.boundary_count() >= 1);
            let c = a.cap_with_cone(0, alpha).unwrap();
            prop_assert_eq!(
                c.euler_char_compactified(),
                a.euler_char_compactified() + q(1, i64::from(alpha))
            );
        }

        #[test]
        fn boundary_to_end_preserves_euler(a in arb_orbifold()) {
            prop_assume!(a.boundary_count() >= 1);
            let c = a.boundary_to_end(0).unwrap();
            prop_assert_eq!(c.euler_char_compactified(), a.euler_char_compactified());
        }

        #[test]
        fn thin_iff_nonnegative_euler(a in arb_orbifold()) {
            prop_assume!(!a.is_closed());
            let thin = a.classify().unwrap() != BaseClass::NotThin;
            prop_assert_eq!(thin, !has_negative_euler_char(&a));
        }
    }
}
