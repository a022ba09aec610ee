//! Integer slopes and gluing matrices on boundary tori.
//!
//! Every boundary torus of a fibered piece carries the basis
//! (section, fiber); a slope is an integer vector in that basis and the fiber
//! class is `(0, 1)`. A gluing matrix with rows `(a, b), (c, d)` acts on
//! column vectors and sends coordinates on one side of a torus to
//! coordinates on the other. Gluings reverse orientation, so gluing
//! matrices have determinant −1.

use std::fmt;

use num_integer::Integer;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("determinant must be -1 (got {0})")]
    Determinant(i128),
    #[error("slope ({0},{1}) is not primitive")]
    NotPrimitive(i64, i64),
    #[error("integer overflow while composing gluing matrices")]
    Overflow,
}

/// An integer vector in (section, fiber) coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slope {
    pub section: i64,
    pub fiber: i64,
}

impl Slope {
    pub const FIBER: Slope = Slope {
        section: 0,
        fiber: 1,
    };
    pub const SECTION: Slope = Slope {
        section: 1,
        fiber: 0,
    };

    pub const fn new(section: i64, fiber: i64) -> Self {
        Slope { section, fiber }
    }

    /// A slope with coprime coordinates.
    pub fn primitive(section: i64, fiber: i64) -> Result<Self, LatticeError> {
        if section.gcd(&fiber) == 1 {
            Ok(Slope { section, fiber })
        } else {
            Err(LatticeError::NotPrimitive(section, fiber))
        }
    }

    pub fn is_primitive(&self) -> bool {
        self.section.gcd(&self.fiber) == 1
    }

    /// Algebraic intersection number `self ∧ other`.
    pub fn wedge(&self, other: &Slope) -> i128 {
        i128::from(self.section) * i128::from(other.fiber)
            - i128::from(self.fiber) * i128::from(other.section)
    }

    /// Geometric intersection number of two primitive slopes.
    pub fn intersection(&self, other: &Slope) -> u128 {
        self.wedge(other).unsigned_abs()
    }

    /// Equal up to sign, i.e. the same unoriented curve.
    pub fn parallel(&self, other: &Slope) -> bool {
        self.wedge(other) == 0
            && (self.section, self.fiber) != (0, 0)
            && (other.section, other.fiber) != (0, 0)
    }
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.section, self.fiber)
    }
}

/// A 2×2 integer matrix with rows `(a, b)` and `(c, d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntMatrix2 {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl IntMatrix2 {
    pub const IDENTITY: IntMatrix2 = IntMatrix2::new(1, 0, 0, 1);

    /// Identification of the two boundary tori of a product piece T²×I.
    ///
    /// Both boundary circles of the annulus are oriented as boundary, so the
    /// section flips sign across the product while the fiber is carried to
    /// itself.
    pub const PRODUCT_TRANSPORT: IntMatrix2 = IntMatrix2::new(-1, 0, 0, 1);

    pub const fn new(a: i64, b: i64, c: i64, d: i64) -> Self {
        IntMatrix2 { a, b, c, d }
    }

    pub fn det(&self) -> i128 {
        i128::from(self.a) * i128::from(self.d) - i128::from(self.b) * i128::from(self.c)
    }

    pub fn checked_mul(&self, rhs: &IntMatrix2) -> Option<IntMatrix2> {
        let dot = |x: i64, y: i64, z: i64, w: i64| -> Option<i64> {
            x.checked_mul(y)?.checked_add(z.checked_mul(w)?)
        };
        Some(IntMatrix2 {
            a: dot(self.a, rhs.a, self.b, rhs.c)?,
            b: dot(self.a, rhs.b, self.b, rhs.d)?,
            c: dot(self.c, rhs.a, self.d, rhs.c)?,
            d: dot(self.c, rhs.b, self.d, rhs.d)?,
        })
    }

    pub fn checked_apply(&self, v: Slope) -> Option<Slope> {
        let s = self
            .a
            .checked_mul(v.section)?
            .checked_add(self.b.checked_mul(v.fiber)?)?;
        let f = self
            .c
            .checked_mul(v.section)?
            .checked_add(self.d.checked_mul(v.fiber)?)?;
        Some(Slope::new(s, f))
    }

    /// Inverse of a unimodular matrix; `None` when `|det| != 1`.
    pub fn unimodular_inverse(&self) -> Option<IntMatrix2> {
        match self.det() {
            1 => Some(IntMatrix2::new(self.d, -self.b, -self.c, self.a)),
            -1 => Some(IntMatrix2::new(-self.d, self.b, self.c, -self.a)),
            _ => None,
        }
    }
}

impl fmt::Display for IntMatrix2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.a, self.b, self.c, self.d)
    }
}

/// A determinant −1 gluing matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GluingMatrix(IntMatrix2);

impl GluingMatrix {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self, LatticeError> {
        Self::from_matrix(IntMatrix2::new(a, b, c, d))
    }

    pub fn from_matrix(m: IntMatrix2) -> Result<Self, LatticeError> {
        match m.det() {
            -1 => Ok(GluingMatrix(m)),
            det => Err(LatticeError::Determinant(det)),
        }
    }

    /// `[[1,0],[0,-1]]`: section to section, fiber to reversed fiber.
    pub fn flip() -> Self {
        GluingMatrix(IntMatrix2::new(1, 0, 0, -1))
    }

    pub fn matrix(&self) -> &IntMatrix2 {
        &self.0
    }

    pub fn inverse(&self) -> GluingMatrix {
        // det −1 inverse: [[-d, b], [c, -a]], determinant −1 again.
        GluingMatrix(self.0.unimodular_inverse().expect("determinant is -1"))
    }

    pub fn apply(&self, v: Slope) -> Result<Slope, LatticeError> {
        self.0.checked_apply(v).ok_or(LatticeError::Overflow)
    }

    /// `self` followed by the internal identification of a product piece,
    /// followed by `next`: `next · J · self` with `J = diag(−1, 1)`.
    pub fn through_product(&self, next: &GluingMatrix) -> Result<GluingMatrix, LatticeError> {
        let m = IntMatrix2::PRODUCT_TRANSPORT
            .checked_mul(&self.0)
            .and_then(|m| next.0.checked_mul(&m))
            .ok_or(LatticeError::Overflow)?;
        GluingMatrix::from_matrix(m)
    }
}

impl fmt::Display for GluingMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}
