//! Extended real heights with an explicit infinite value.

use core::cmp::Ordering;
use core::fmt;

/// A height in `[−∞, +∞]` restricted to finite values or `+∞`.
///
/// Communication heights to an empty set and depths of absorbing states are
/// infinite; they are represented by [`Height::Infinite`] instead of a
/// sentinel float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Height {
    Finite(f64),
    Infinite,
}

impl Height {
    pub fn finite(self) -> Option<f64> {
        match self {
            Height::Finite(h) => Some(h),
            Height::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Height::Finite(_))
    }

    /// `self − offset`, keeping `+∞` infinite.
    pub fn minus(self, offset: f64) -> Height {
        match self {
            Height::Finite(h) => Height::Finite(h - offset),
            Height::Infinite => Height::Infinite,
        }
    }

    pub fn min(self, other: Height) -> Height {
        if self.total_cmp(&other) == Ordering::Greater {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Height) -> Height {
        if self.total_cmp(&other) == Ordering::Less {
            other
        } else {
            self
        }
    }

    /// Total order with `+∞` above every finite value.
    pub fn total_cmp(&self, other: &Height) -> Ordering {
        match (self, other) {
            (Height::Finite(a), Height::Finite(b)) => a.total_cmp(b),
            (Height::Finite(_), Height::Infinite) => Ordering::Less,
            (Height::Infinite, Height::Finite(_)) => Ordering::Greater,
            (Height::Infinite, Height::Infinite) => Ordering::Equal,
        }
    }

    /// Equality up to an absolute tolerance; two infinite heights are equal.
    pub fn approx_eq(self, other: Height, tol: f64) -> bool {
        match (self, other) {
            (Height::Finite(a), Height::Finite(b)) => (a - b).abs() <= tol,
            (Height::Infinite, Height::Infinite) => true,
            _ => false,
        }
    }
}

impl From<f64> for Height {
    fn from(h: f64) -> Self {
        Height::Finite(h)
    }
}

impl PartialOrd for Height {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.total_cmp(other))
    }
}

impl fmt::Display for Height {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Height::Finite(h) => write!(f, "{h}"),
            Height::Infinite => f.write_str("inf"),
        }
    }
}
