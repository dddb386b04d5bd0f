//! Exact polynomial arithmetic over the rationals, plus the integer-matrix
//! routines (Bareiss determinant, Faddeev-LeVerrier characteristic
//! polynomial) the spectral analysis needs.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Polynomial with rational coefficients, lowest degree first, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly(Vec<BigRational>);

impl Poly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly(coeffs)
    }

    pub fn from_ints(coeffs: &[BigInt]) -> Self {
        Poly::new(coeffs.iter().map(|c| BigRational::from_integer(c.clone())).collect())
    }

    pub fn one() -> Self {
        Poly(vec![BigRational::one()])
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    fn lead(&self) -> &BigRational {
        self.0.last().expect("zero polynomial has no leading coefficient")
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let l = self.lead().clone();
        Poly(self.0.iter().map(|c| c / &l).collect())
    }

    pub fn derivative(&self) -> Self {
        Poly::new(self.0.iter().enumerate().skip(1).map(|(i, c)| c * BigRational::from_integer(BigInt::from(i))).collect())
    }

    pub fn sub(&self, other: &Poly) -> Self {
        let n = self.0.len().max(other.0.len());
        let zero = BigRational::zero();
        Poly::new((0..n).map(|i| self.0.get(i).unwrap_or(&zero) - other.0.get(i).unwrap_or(&zero)).collect())
    }

    pub fn div_rem(&self, divisor: &Poly) -> (Poly, Poly) {
        assert!(!divisor.is_zero(), "division by the zero polynomial");
        let mut rem = self.0.clone();
        let dd = divisor.degree();
        if self.is_zero() || self.degree() < dd {
            return (Poly(vec![]), self.clone());
        }
        let mut quot = vec![BigRational::zero(); self.degree() - dd + 1];
        let lead = divisor.lead().clone();
        for i in (0..quot.len()).rev() {
            let c = &rem[i + dd] / &lead;
            for (j, dc) in divisor.0.iter().enumerate() {
                rem[i + j] = &rem[i + j] - &c * dc;
            }
            quot[i] = c;
        }
        (Poly::new(quot), Poly::new(rem))
    }

    pub fn gcd(&self, other: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Yun's squarefree factorization of a monic polynomial: returns
    /// `(factor, multiplicity)` pairs with pairwise coprime squarefree factors.
    pub fn squarefree_factors(&self) -> Vec<(Poly, usize)> {
        let p = self.monic();
        let dp = p.derivative();
        let g = p.gcd(&dp);
        let mut c = p.div_rem(&g).0;
        let mut d = dp.div_rem(&g).0.sub(&c.derivative());
        let mut out = Vec::new();
        let mut i = 1;
        while c.degree() > 0 {
            let a = c.gcd(&d);
            c = c.div_rem(&a).0;
            d = d.div_rem(&a).0.sub(&c.derivative());
            if a.degree() > 0 {
                out.push((a, i));
            }
            i += 1;
        }
        out
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect()
    }
}

/// Exact determinant by fraction-free (Bareiss) elimination.
pub fn bareiss_det(m: &[Vec<i64>]) -> Result<i64> {
    let n = m.len();
    if n == 0 {
        return Ok(1);
    }
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&r| a[r][k] != 0) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return Ok(0),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = a[i][j]
                    .checked_mul(a[k][k])
                    .and_then(|x| a[i][k].checked_mul(a[k][j]).and_then(|y| x.checked_sub(y)))
                    .ok_or(Error::Overflow)?;
                a[i][j] = t / prev;
            }
        }
        prev = a[k][k];
    }
    let d = sign.checked_mul(a[n - 1][n - 1]).ok_or(Error::Overflow)?;
    i64::try_from(d).map_err(|_| Error::Overflow)
}

/// Characteristic polynomial `det(xI - M)` with exact integer coefficients,
/// lowest degree first.
pub fn char_poly(m: &[Vec<i64>]) -> Vec<BigInt> {
    let n = m.len();
    let a: Vec<Vec<BigInt>> = m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    let mut coeffs = vec![BigInt::zero(); n + 1];
    coeffs[n] = BigInt::one();
    let mut mk = vec![vec![BigInt::zero(); n]; n];
    for k in 1..=n {
        // mk <- A * mk + c_{n-k+1} I
        let mut next = mat_mul(&a, &mk);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += &coeffs[n - k + 1];
        }
        mk = next;
        let am = mat_mul(&a, &mk);
        let tr: BigInt = (0..n).map(|i| am[i][i].clone()).sum();
        coeffs[n - k] = -tr / BigInt::from(k);
    }
    coeffs
}

fn mat_mul(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let n = a.len();
    let mut out = vec![vec![BigInt::zero(); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..n {
                out[i][j] += &a[i][k] * &b[k][j];
            }
        }
    }
    out
}

/// Evaluates `p(M)` exactly and reports whether it is the zero matrix.
pub fn annihilates(p: &Poly, m: &[Vec<i64>]) -> bool {
    let n = m.len();
    // Clear denominators so the evaluation stays in the integers.
    let lcm = p.coeffs().iter().fold(BigInt::one(), |acc, c| num_integer::Integer::lcm(&acc, c.denom()));
    let ints: Vec<BigInt> = p.coeffs().iter().map(|c| (c * BigRational::from_integer(lcm.clone())).to_integer()).collect();
    let a: Vec<Vec<BigInt>> = m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    let mut acc = vec![vec![BigInt::zero(); n]; n];
    for c in ints.iter().rev() {
        acc = mat_mul(&a, &acc);
        for (i, row) in acc.iter_mut().enumerate() {
            row[i] += c;
        }
    }
    acc.iter().all(|r| r.iter().all(|x| x.is_zero()))
}

/// Largest integer r with r^k <= x, for x >= 0.
pub fn integer_root(x: u64, k: u32) -> u64 {
    if k == 1 || x < 2 {
        return x;
    }
    let mut r = (x as f64).powf(1.0 / k as f64).round() as u64;
    while r > 0 && checked_pow(r, k).is_none_or(|v| v > x) {
        r -= 1;
    }
    while checked_pow(r + 1, k).is_some_and(|v| v <= x) {
        r += 1;
    }
    r
}

pub fn checked_pow(base: u64, exp: u32) -> Option<u64> {
    let mut acc: u64 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn bareiss_matches_cofactor_expansion() {
        let m = vec![vec![2, 1, 0], vec![1, 3, 4], vec![0, 5, 6]];
        // 2*(18-20) - 1*(6-0) + 0 = -10
        assert_eq!(bareiss_det(&m).unwrap(), -10);
        assert_eq!(bareiss_det(&[vec![0, 1], vec![1, 0]]).unwrap(), -1);
        assert_eq!(bareiss_det(&[vec![1, 2], vec![2, 4]]).unwrap(), 0);
    }

    #[test]
    fn char_poly_of_cat_map() {
        // x^2 - 3x + 1
        assert_eq!(char_poly(&[vec![2, 1], vec![1, 1]]), ints(&[1, -3, 1]));
    }

    #[test]
    fn yun_separates_multiplicities() {
        // (x-2)^2 (x-3) = x^3 - 7x^2 + 16x - 12
        let p = Poly::from_ints(&ints(&[-12, 16, -7, 1]));
        let f = p.squarefree_factors();
        assert_eq!(f.len(), 2);
        assert_eq!(f[0].1, 1);
        assert_eq!(f[0].0, Poly::from_ints(&ints(&[-3, 1])));
        assert_eq!(f[1].1, 2);
        assert_eq!(f[1].0, Poly::from_ints(&ints(&[-2, 1])));
    }

    #[test]
    fn jordan_block_is_not_annihilated_by_radical() {
        let p = Poly::from_ints(&ints(&[-2, 1]));
        assert!(!annihilates(&p, &[vec![2, 1], vec![0, 2]]));
        assert!(annihilates(&p, &[vec![2, 0], vec![0, 2]]));
    }

    #[test]
    fn integer_roots() {
        assert_eq!(integer_root(8, 3), 2);
        assert_eq!(integer_root(9, 3), 2);
        assert_eq!(integer_root(1 << 40, 40), 2);
        assert_eq!(integer_root(u64::MAX, 2), 4294967295);
    }
}
