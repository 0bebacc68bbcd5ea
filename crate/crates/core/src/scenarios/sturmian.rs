use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Mechanical word parameters: slope in `(0, 1)`, intercept in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SturmianParams {
    pub slope: f64,
    pub intercept: f64,
    pub length: usize,
}

impl SturmianParams {
    pub fn new(slope: f64, intercept: f64, length: usize) -> Result<Self> {
        let p = SturmianParams {
            slope,
            intercept,
            length,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.slope > 0.0 && self.slope < 1.0) {
            return Err(Error::param("slope", "must lie in (0, 1)"));
        }
        if !(self.intercept >= 0.0 && self.intercept < 1.0) {
            return Err(Error::param("intercept", "must lie in [0, 1)"));
        }
        if self.length == 0 {
            return Err(Error::param("length", "must be positive"));
        }
        Ok(())
    }
}

/// `s_k = ⌊(k + 1) slope + intercept⌋ − ⌊k slope + intercept⌋` for `k = 1..=length`.
pub fn sturmian_word(p: &SturmianParams) -> Vec<u8> {
    let at = |k: usize| (k as f64 * p.slope + p.intercept).floor();
    (1..=p.length).map(|k| (at(k + 1) - at(k)) as u8).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn word(slope: f64, intercept: f64, length: usize) -> String {
        sturmian_word(&SturmianParams::new(slope, intercept, length).unwrap())
            .iter()
            .map(|b| char::from(b'0' + b))
            .collect()
    }

    #[test]
    fn examples() {
        assert_eq!(word(0.5, 0.0, 6), "101010");
        assert_eq!(word(1e-9, 0.0, 5), "00000");
        let golden = (3.0 - 5f64.sqrt()) / 2.0;
        assert_eq!(word(golden, 0.0, 5), "01001");
    }

    #[test]
    fn fibonacci_prefix() {
        // Fixed point of 0 -> 01, 1 -> 0.
        let mut w = vec![0u8];
        while w.len() < 400 {
            w = w.iter().flat_map(|&c| if c == 0 { vec![0, 1] } else { vec![0] }).collect();
        }
        let golden = (3.0 - 5f64.sqrt()) / 2.0;
        let ours = sturmian_word(&SturmianParams::new(golden, 0.0, 300).unwrap());
        assert_eq!(ours[..], w[..300]);
    }

    #[test]
    fn invalid_params() {
        assert!(SturmianParams::new(0.0, 0.0, 3).is_err());
        assert!(SturmianParams::new(1.0, 0.0, 3).is_err());
        assert!(SturmianParams::new(0.3, 1.0, 3).is_err());
        assert!(SturmianParams::new(0.3, 0.0, 0).is_err());
    }

    proptest! {
        #[test]
        fn balance(slope in 0.001f64..0.999, intercept in 0.0f64..0.999, m in 1usize..500) {
            let w = sturmian_word(&SturmianParams::new(slope, intercept, m).unwrap());
            let ones = w.iter().filter(|&&b| b == 1).count() as f64;
            prop_assert!(w.iter().all(|&b| b <= 1));
            prop_assert!((ones - m as f64 * slope).abs() <= 1.0 + 1e-9);
        }
    }
}
