//! Scalar abstractions.
//!
//! Split search and tree growth only need field arithmetic and ordering, so
//! they run over [`Scalar`], which includes exact rationals. Anything that
//! needs `exp`/`ln` (losses, probabilities) requires [`Real`].

use std::fmt::{Debug, Display};

use num_traits::{Float, Num};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Exact rational scalar used by the oracle tests and exact tree growth.
pub type Rational = num_rational::Ratio<i64>;

pub trait Scalar: Num + Copy + PartialOrd + Debug + Send + Sync + 'static {
    fn from_count(n: usize) -> Self;

    /// Lossy conversion used at ingestion and by the generators.
    fn from_f64(x: f64) -> Self;

    fn as_f64(self) -> f64;

    fn half() -> Self {
        Self::one() / (Self::one() + Self::one())
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl Scalar for f64 {
    fn from_count(n: usize) -> Self {
        n as f64
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn as_f64(self) -> f64 {
        self
    }
}

impl Scalar for f32 {
    fn from_count(n: usize) -> Self {
        n as f32
    }
    fn from_f64(x: f64) -> Self {
        x as f32
    }
    fn as_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for Rational {
    fn from_count(n: usize) -> Self {
        Rational::from_integer(n as i64)
    }
    fn from_f64(x: f64) -> Self {
        Rational::approximate_float(x).expect("value not representable as a rational")
    }
    fn as_f64(self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

/// Floating-point scalar usable for boosting and model persistence.
pub trait Real: Scalar + Float + Display + Serialize + DeserializeOwned {}

impl Real for f64 {}
impl Real for f32 {}

/// Sum over an iterator of scalars.
pub(crate) fn sum<F: Scalar>(values: impl IntoIterator<Item = F>) -> F {
    values.into_iter().fold(F::zero(), |acc, v| acc + v)
}
