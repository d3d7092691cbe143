//! Scalar abstraction shared by every solver.
//!
//! Edge weights, potentials, policy values and cycle means all live in one
//! scalar type `W`. Floating-point scalars compare with a relative tolerance;
//! rational scalars compare exactly.

use std::cmp::Ordering;
use std::fmt::{Debug, Display};

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

/// Numeric type usable as an edge weight and cycle mean.
pub trait Scalar:
    Copy
    + Send
    + Sync
    + Debug
    + Display
    + PartialOrd
    + Num
    + Signed
    + FromPrimitive
    + ToPrimitive
    + 'static
{
    /// True when arithmetic and comparisons are exact.
    const EXACT: bool;

    /// Total order used for tie-breaking (NaN-free inputs assumed for floats).
    fn total_cmp(&self, other: &Self) -> Ordering;

    /// `self < other` beyond the equality tolerance.
    fn definitely_lt(self, other: Self) -> bool;

    /// `self == other` within the equality tolerance.
    fn approx_eq(self, other: Self) -> bool {
        !self.definitely_lt(other) && !other.definitely_lt(self)
    }

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar")
    }

    fn from_int(v: i64) -> Self {
        Self::from_i64(v).expect("integer representable in scalar")
    }

    /// Sum of `len` edge weights divided by `len`.
    fn mean_of(sum: Self, len: usize) -> Self {
        sum / Self::from_count(len)
    }

    fn midpoint(a: Self, b: Self) -> Self {
        (a + b) / Self::from_int(2)
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Fraction `p/q` (or `p`) for exact scalars, 12 significant digits otherwise.
    fn render(&self) -> String;
}

const F64_REL_TOL: f64 = 1e-9;
const F32_REL_TOL: f32 = 1e-5;

fn render_float(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let s = format!("{:.*e}", 11, v);
    // Normalize to the shortest representation of the rounded value.
    let rounded: f64 = s.parse().unwrap_or(v);
    format!("{}", rounded)
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn total_cmp(&self, other: &Self) -> Ordering {
        f64::total_cmp(self, other)
    }

    fn definitely_lt(self, other: Self) -> bool {
        let scale = 1f64.max(self.abs()).max(other.abs());
        self < other - F64_REL_TOL * scale
    }

    fn render(&self) -> String {
        render_float(*self)
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;

    fn total_cmp(&self, other: &Self) -> Ordering {
        f32::total_cmp(self, other)
    }

    fn definitely_lt(self, other: Self) -> bool {
        let scale = 1f32.max(self.abs()).max(other.abs());
        self < other - F32_REL_TOL * scale
    }

    fn render(&self) -> String {
        render_float(*self as f64)
    }
}

macro_rules! exact_ratio_scalar {
    ($int:ty) => {
        impl Scalar for Ratio<$int> {
            const EXACT: bool = true;

            fn total_cmp(&self, other: &Self) -> Ordering {
                Ord::cmp(self, other)
            }

            fn definitely_lt(self, other: Self) -> bool {
                self < other
            }

            fn approx_eq(self, other: Self) -> bool {
                self == other
            }

            fn render(&self) -> String {
                render_ratio(self)
            }
        }
    };
}

exact_ratio_scalar!(i64);
exact_ratio_scalar!(i128);

fn render_ratio<T: Clone + Integer + Display>(r: &Ratio<T>) -> String {
    if r.denom().is_one() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Returns true when `v` is an integer value of moderate magnitude.
pub fn is_integral_f64(v: f64) -> bool {
    v.is_finite() && v.fract() == 0.0 && v.abs() < 9.0e15
}
