use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar type backing simulated amplitudes (`f32` or `f64`).
pub trait SimFloat:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Send + Sync + Debug + Display + LowerExp + 'static
{
    /// Lower bound on the top-outcome probability the exact learners accept
    /// as a deterministic measurement.
    const CERTAINTY: f64;

    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 fits the scalar type")
    }
}

impl SimFloat for f64 {
    const CERTAINTY: f64 = 1.0 - 1e-9;
}

impl SimFloat for f32 {
    // single precision cannot resolve 1e-9 from 1
    const CERTAINTY: f64 = 1.0 - 1e-4;
}

/// The `p` complex `p`-th roots of unity `ω^k = e^{2πik/p}`, each computed from
/// its exact angle rather than by repeated multiplication.
pub fn roots_of_unity<T: SimFloat>(p: u32) -> Vec<Complex<T>> {
    (0..p)
        .map(|k| {
            let angle = 2.0 * std::f64::consts::PI * k as f64 / p as f64;
            Complex::new(T::of(angle.cos()), T::of(angle.sin()))
        })
        .collect()
}
