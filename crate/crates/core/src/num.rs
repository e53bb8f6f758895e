//! Scalar abstraction: every cost, threshold, and solver runs over any
//! floating-point type. Concrete aliases at the crate root pin `f64`.

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar for energies, thresholds, and solvers.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + std::fmt::Debug + std::fmt::Display + Send + Sync + 'static
{
    fn of_i64(v: i64) -> Self {
        Self::from_i64(v).expect("i64 converts to any float")
    }

    fn of_u64(v: u64) -> Self {
        Self::from_u64(v).expect("u64 converts to any float")
    }

    fn of_usize(v: usize) -> Self {
        Self::from_usize(v).expect("usize converts to any float")
    }

    fn of_f64(v: f64) -> Self {
        Self::from_f64(v).expect("f64 converts to any float")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("float converts to f64")
    }

    /// exp with the argument capped just below the overflow threshold, so
    /// the result is always finite and differences of two values stay
    /// well-defined. Monotone wherever uncapped.
    fn exp_capped(self) -> Self {
        let cap = Self::max_value().ln() - Self::one();
        if self > cap {
            cap.exp()
        } else {
            self.exp()
        }
    }
}

impl<T> Real for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + std::fmt::Debug
        + std::fmt::Display
        + Send
        + Sync
        + 'static
{
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_capped_is_finite_for_huge_arguments() {
        assert!(f64::of_f64(1e6).exp_capped().is_finite());
        assert!(f32::of_f64(1e6).exp_capped().is_finite());
        // Difference of two capped values is well-defined, never NaN.
        let d = f64::of_f64(2e6).exp_capped() - f64::of_f64(1e6).exp_capped();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn exp_capped_matches_exp_in_normal_range() {
        for &x in &[0.0_f64, 1.0, 3.0, 50.0, 700.0] {
            assert_eq!(x.exp_capped(), x.exp());
        }
    }
}
