//! Integer arithmetic behind the count of model spaces: common bases,
//! admissible exponents and the index identity for tree actions.

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::{checked_pow, integer_root};

/// `(r, e)` with `x = r^e` and `r` not a proper power.
pub fn primitive_root(x: u64) -> (u64, u32) {
    if x < 4 {
        return (x, 1);
    }
    for e in (2..=63u32).rev() {
        let r = integer_root(x, e);
        if r >= 2 && checked_pow(r, e) == Some(x) {
            return (r, e);
        }
    }
    (x, 1)
}

pub fn is_proper_power(x: u64) -> bool {
    primitive_root(x).1 > 1
}

/// `(r, i, j)` with `m = r^i`, `p = r^j` and `r` not a proper power.
pub fn common_base(m: u64, p: u64) -> Result<Option<(u64, u32, u32)>> {
    if m < 2 || p < 2 {
        return Err(Error::InvalidArgument("common_base needs m, p >= 2".into()));
    }
    let (r, i) = primitive_root(m);
    let (s, j) = primitive_root(p);
    Ok((r == s).then_some((r, i, j)))
}

/// Positive rationals `k <= kmax` with denominator at most `max_den` and
/// `d^k` an integer, ascending. For `d` not a proper power these are exactly
/// the integers `1..=kmax`.
pub fn admissible_exponents_with(d: u64, kmax: u32, max_den: u32) -> Result<Vec<Ratio<u32>>> {
    if d < 2 {
        return Err(Error::InvalidArgument("d must be at least 2".into()));
    }
    if is_proper_power(d) {
        return Err(Error::ProperPowerBase(d));
    }
    let mut out = Vec::new();
    for den in 1..=max_den.max(1) {
        for num in 1..=kmax * den {
            if num.gcd(&den) != 1 {
                continue;
            }
            let power = BigUint::from(d).pow(num);
            let root = power.nth_root(den);
            if root.pow(den) == power {
                out.push(Ratio::new(num, den));
            }
        }
    }
    out.sort();
    Ok(out)
}

pub fn admissible_exponents(d: u64, kmax: u32) -> Result<Vec<Ratio<u32>>> {
    admissible_exponents_with(d, kmax, 12)
}

/// Indices of the subgroup chain `H' ⊃ H ⊃ s⁻¹H's` for a single-edge cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GraphOfGroupsDatum {
    pub d: u64,
    pub e: u64,
    pub f: u64,
    pub g: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum IndexVerdict {
    /// `d = e = f g`.
    Consistent(u64),
    Inconsistent {
        fg: u64,
        d: u64,
        e: u64,
    },
}

pub fn index_identity_check(datum: &GraphOfGroupsDatum) -> Result<IndexVerdict> {
    let GraphOfGroupsDatum { d, e, f, g } = *datum;
    if d == 0 || e == 0 || f == 0 || g == 0 {
        return Err(Error::InvalidArgument("indices must be at least 1".into()));
    }
    let fg = f.checked_mul(g).ok_or(Error::Overflow)?;
    Ok(if d == fg && e == fg { IndexVerdict::Consistent(fg) } else { IndexVerdict::Inconsistent { fg, d, e } })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[u32]) -> Vec<Ratio<u32>> {
        v.iter().map(|&k| Ratio::from_integer(k)).collect()
    }

    #[test]
    fn common_base_examples() {
        assert_eq!(common_base(2, 2).unwrap(), Some((2, 1, 1)));
        assert_eq!(common_base(4, 8).unwrap(), Some((2, 2, 3)));
        assert_eq!(common_base(2, 3).unwrap(), None);
        assert_eq!(common_base(36, 6).unwrap(), Some((6, 2, 1)));
        assert_eq!(common_base(64, 16).unwrap(), Some((2, 6, 4)));
        assert!(common_base(1, 4).is_err());
    }

    #[test]
    fn primitive_roots() {
        assert_eq!(primitive_root(1 << 62), (2, 62));
        assert_eq!(primitive_root(3u64.pow(40)), (3, 40));
        assert_eq!(primitive_root(12), (12, 1));
        assert_eq!(primitive_root(u64::MAX), (u64::MAX, 1));
    }

    #[test]
    fn exponent_examples() {
        assert_eq!(admissible_exponents(2, 3).unwrap(), ints(&[1, 2, 3]));
        assert_eq!(admissible_exponents(6, 2).unwrap(), ints(&[1, 2]));
        assert_eq!(admissible_exponents(2, 5).unwrap(), ints(&[1, 2, 3, 4, 5]));
        assert_eq!(admissible_exponents(4, 2), Err(Error::ProperPowerBase(4)));
    }

    #[test]
    fn index_examples() {
        let check = |d, e, f, g| index_identity_check(&GraphOfGroupsDatum { d, e, f, g }).unwrap();
        assert_eq!(check(4, 4, 2, 2), IndexVerdict::Consistent(4));
        assert_eq!(check(1, 1, 1, 1), IndexVerdict::Consistent(1));
        assert_eq!(check(4, 8, 2, 2), IndexVerdict::Inconsistent { fg: 4, d: 4, e: 8 });
    }
}
