//! The canonical index sequences a(n) and F(n).

use num::{BigUint, One};

use crate::model::Regime;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SequenceError {
    #[error("sequence index must be at least 1, got {0}")]
    IndexTooSmall(u64),
}

fn check(n: u64) -> Result<(), SequenceError> {
    if n < 1 {
        Err(SequenceError::IndexTooSmall(n))
    } else {
        Ok(())
    }
}

/// a(n). Crossing: ⌊(6n + (−1)^{n+1} − 7)/4⌋, i.e. 0, 1, 3, 4, 6, 7, …; plain: 1, 1, 2, 3, …
pub fn a_of(regime: Regime, n: u64) -> Result<u64, SequenceError> {
    check(n)?;
    Ok(match regime {
        Regime::Crossing => {
            let k = n / 2;
            if n % 2 == 1 {
                3 * k
            } else {
                3 * k - 2
            }
        }
        Regime::Plain => {
            if n == 1 {
                1
            } else {
                n - 1
            }
        }
    })
}

/// Exponent e(n) of the ν-block added when passing from level n−1 to n, so that
/// F(n) = 2^{e(n)} + 2F(n−1). This equals a(n) except at n = 2 in the crossing regime,
/// where the block is α_{2²}(ν).
pub fn block_exponent(regime: Regime, n: u64) -> Result<u64, SequenceError> {
    check(n)?;
    match (regime, n) {
        (Regime::Crossing, 1) => Ok(1),
        (Regime::Crossing, 2) => Ok(2),
        _ => a_of(regime, n),
    }
}

fn pow2(e: u64) -> BigUint {
    BigUint::one() << (e as usize)
}

/// F(n) from its closed form.
pub fn f_of(regime: Regime, n: u64) -> Result<BigUint, SequenceError> {
    check(n)?;
    Ok(match regime {
        Regime::Crossing => {
            if n == 1 {
                BigUint::from(4u32)
            } else {
                let k = n / 2;
                if n % 2 == 0 {
                    pow2(2 * k) + pow2(3 * k)
                } else {
                    pow2(2 * k + 1) + BigUint::from(3u32) * pow2(3 * k)
                }
            }
        }
        Regime::Plain => BigUint::from(n + 3) * pow2(n - 1),
    })
}

/// F(n) from F(1) = 4 and F(n) = 2^{e(n)} + 2F(n−1).
pub fn f_by_recursion(regime: Regime, n: u64) -> Result<BigUint, SequenceError> {
    check(n)?;
    let mut f = BigUint::from(4u32);
    for m in 2..=n {
        f = pow2(block_exponent(regime, m)?) + (f << 1usize);
    }
    Ok(f)
}

/// The largest n with F(n) ≤ m, or `None` when m < F(1).
pub fn level_of(regime: Regime, m: &BigUint) -> Option<u64> {
    let mut n = 0;
    loop {
        let next = f_of(regime, n + 1).expect("n + 1 >= 1");
        if &next > m {
            return if n == 0 { None } else { Some(n) };
        }
        n += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossing_values() {
        let a: Vec<u64> = (1..=8).map(|n| a_of(Regime::Crossing, n).unwrap()).collect();
        assert_eq!(a, vec![0, 1, 3, 4, 6, 7, 9, 10]);
        let f: Vec<BigUint> = (1..=7).map(|n| f_of(Regime::Crossing, n).unwrap()).collect();
        let expected: Vec<BigUint> = [4u32, 12, 32, 80, 224, 576, 1664]
            .iter()
            .map(|&x| BigUint::from(x))
            .collect();
        assert_eq!(f, expected);
    }

    #[test]
    fn plain_values() {
        let a: Vec<u64> = (1..=5).map(|n| a_of(Regime::Plain, n).unwrap()).collect();
        assert_eq!(a, vec![1, 1, 2, 3, 4]);
        let f: Vec<BigUint> = (1..=7).map(|n| f_of(Regime::Plain, n).unwrap()).collect();
        let expected: Vec<BigUint> = [4u32, 10, 24, 56, 128, 288, 640]
            .iter()
            .map(|&x| BigUint::from(x))
            .collect();
        assert_eq!(f, expected);
    }

    #[test]
    fn zero_index_rejected() {
        assert_eq!(a_of(Regime::Plain, 0), Err(SequenceError::IndexTooSmall(0)));
        assert!(f_of(Regime::Crossing, 0).is_err());
    }

    #[test]
    fn levels() {
        assert_eq!(level_of(Regime::Crossing, &BigUint::from(3u32)), None);
        assert_eq!(level_of(Regime::Crossing, &BigUint::from(23u32)), Some(2));
        assert_eq!(level_of(Regime::Crossing, &BigUint::from(32u32)), Some(3));
        assert_eq!(level_of(Regime::Plain, &BigUint::from(23u32)), Some(2));
    }
}
