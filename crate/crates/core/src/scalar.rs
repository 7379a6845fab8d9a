//! Scalar abstraction for distance values.
//!
//! Everything downstream only needs field arithmetic and a partial
//! order, so distances can be carried by `f64`/`f32` or by exact
//! rationals. The two extra hooks cover comparison tolerances: floats
//! get a small default slack, exact types compare exactly.

use std::fmt::{Debug, Display};

use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

/// Numeric type usable as a distance value.
pub trait Scalar:
    Num
    + Signed
    + FromPrimitive
    + ToPrimitive
    + PartialOrd
    + Clone
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Default comparison slack for values of order one. Zero for
    /// exact types.
    fn default_unit_slack() -> Self;

    /// True when the value takes part in exact arithmetic (integers
    /// stored in a float, or any rational).
    fn is_exact(&self) -> bool;
}

impl Scalar for f64 {
    fn default_unit_slack() -> Self {
        1e-9
    }

    fn is_exact(&self) -> bool {
        self.is_finite() && self.fract() == 0.0
    }
}

impl Scalar for f32 {
    fn default_unit_slack() -> Self {
        1e-5
    }

    fn is_exact(&self) -> bool {
        self.is_finite() && self.fract() == 0.0
    }
}

impl Scalar for num_rational::BigRational {
    fn default_unit_slack() -> Self {
        num_traits::Zero::zero()
    }

    fn is_exact(&self) -> bool {
        true
    }
}

/// Absolute slack used by inequality checks (triangle inequality,
/// rate-law and bound diagnostics).
///
/// The default for a matrix is `default_unit_slack` scaled by
/// `max(1, largest entry)`, except that matrices whose entries are all
/// exact compare exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Tolerance<T> {
    slack: T,
}

impl<T: Scalar> Tolerance<T> {
    pub fn exact() -> Self {
        Tolerance {
            slack: T::zero(),
        }
    }

    pub fn with_slack(slack: T) -> Self {
        assert!(slack >= T::zero(), "slack must be nonnegative");
        Tolerance { slack }
    }

    pub fn for_matrix(dist: &[Vec<T>]) -> Self {
        let mut all_exact = true;
        let mut max_abs = T::zero();
        for row in dist {
            for v in row {
                if !v.is_exact() {
                    all_exact = false;
                }
                let a = v.abs();
                if a > max_abs {
                    max_abs = a;
                }
            }
        }
        if all_exact {
            return Tolerance::exact();
        }
        let scale = if max_abs > T::one() { max_abs } else { T::one() };
        Tolerance {
            slack: T::default_unit_slack() * scale,
        }
    }

    pub fn slack(&self) -> &T {
        &self.slack
    }

    /// `a <= b` up to the slack.
    pub fn leq(&self, a: &T, b: &T) -> bool {
        *a <= b.clone() + self.slack.clone()
    }
}

impl<T: Scalar> Default for Tolerance<T> {
    fn default() -> Self {
        Tolerance {
            slack: T::default_unit_slack(),
        }
    }
}

/// Larger of two values under the partial order. Inputs must be
/// comparable; distances and their ratios always are once a matrix
/// has been validated.
pub(crate) fn max_scalar<T: Scalar>(a: T, b: T) -> T {
    if b > a {
        b
    } else {
        a
    }
}

/// Smaller of two comparable values.
pub(crate) fn min_scalar<T: Scalar>(a: T, b: T) -> T {
    if b < a {
        b
    } else {
        a
    }
}

pub(crate) fn two<T: Scalar>() -> T {
    T::one() + T::one()
}
