//! Scalar abstraction for the statistical parts of the crate.
//!
//! Agreement coefficients, report tables and outlier statistics are generic
//! over any `Scalar`; `f64` is the default used by the type aliases at the
//! crate root. Quantities that must be exact (gate thresholds, binomial pass
//! rates) use rationals instead.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

pub trait Scalar:
    Float + FromPrimitive + Sum + Debug + Display + Serialize + DeserializeOwned + Send + Sync + 'static
{
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable as a float")
    }

    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable as a float")
    }

    fn hundred() -> Self {
        Self::lit(100.0)
    }
}

impl<T> Scalar for T where
    T: Float + FromPrimitive + Sum + Debug + Display + Serialize + DeserializeOwned + Send + Sync + 'static
{
}

/// Mean and population standard deviation. `None` for an empty slice.
pub fn mean_and_population_stdev<F: Scalar>(values: &[F]) -> Option<(F, F)> {
    if values.is_empty() {
        return None;
    }
    let n = F::from_count(values.len());
    let mean = values.iter().copied().sum::<F>() / n;
    let var = values.iter().map(|&v| (v - mean) * (v - mean)).sum::<F>() / n;
    Some((mean, var.sqrt()))
}
