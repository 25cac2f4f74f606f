use super::Sample;
use crate::error::{Error, Result};

/// Fraction of sample values `<= x` (right-continuous).
pub fn ecdf_eval(sample: &Sample, x: f64) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::Domain("ECDF of an empty sample".into()));
    }
    let below = sample.values().iter().filter(|&&v| v <= x).count();
    Ok(below as f64 / sample.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(v: &[f64]) -> Sample {
        Sample::new(v.to_vec(), "t").unwrap()
    }

    #[test]
    fn step_values() {
        assert_eq!(ecdf_eval(&s(&[1.0, 2.0, 3.0]), 2.0).unwrap(), 2.0 / 3.0);
        assert_eq!(ecdf_eval(&s(&[1.0, 2.0, 3.0]), 0.5).unwrap(), 0.0);
        assert_eq!(ecdf_eval(&s(&[1.0, 2.0, 3.0]), 3.0).unwrap(), 1.0);
        assert_eq!(ecdf_eval(&s(&[1.0, 1.0, 2.0]), 1.0).unwrap(), 2.0 / 3.0);
    }

    #[test]
    fn empty_is_error() {
        assert!(ecdf_eval(&s(&[]), 0.0).is_err());
    }

    proptest! {
        #[test]
        fn nondecreasing_with_exact_extremes(
            values in prop::collection::vec(-1e3f64..1e3, 1..50),
            a in -2e3f64..2e3,
            b in -2e3f64..2e3,
        ) {
            let sample = s(&values);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(ecdf_eval(&sample, lo).unwrap() <= ecdf_eval(&sample, hi).unwrap());
            let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert_eq!(ecdf_eval(&sample, min - 1.0).unwrap(), 0.0);
            prop_assert_eq!(ecdf_eval(&sample, max).unwrap(), 1.0);
        }
    }
}
