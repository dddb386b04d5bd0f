use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::Group;
use crate::error::{Error, Result};
use crate::poly;
use crate::spectral::IntMatrix;

pub type QVec = Vec<BigRational>;
pub type QMat = Vec<Vec<BigRational>>;

/// `Γ_M = <a, b_1..b_n | a b_i a⁻¹ = b^{M e_i}, [b_i, b_j]>`, realized as
/// pairs `(k, u)` standing for `a^k b^u` with `u` in `Z[1/det M]^n`.
#[derive(Debug, Clone)]
pub struct AbcGroup {
    matrix: IntMatrix,
    m: QMat,
    m_inv: QMat,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AbcElement {
    pub k: i64,
    pub u: QVec,
}

pub fn q(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

pub fn mat_vec(m: &QMat, v: &[BigRational]) -> QVec {
    m.iter().map(|row| row.iter().zip(v).fold(BigRational::zero(), |acc, (a, b)| acc + a * b)).collect()
}

pub fn is_integral(v: &[BigRational]) -> bool {
    v.iter().all(|x| x.is_integer())
}

pub fn add(a: &[BigRational], b: &[BigRational]) -> QVec {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[BigRational], b: &[BigRational]) -> QVec {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn to_f64(v: &[BigRational]) -> Vec<f64> {
    v.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect()
}

fn rational_inverse(m: &IntMatrix) -> Result<QMat> {
    let n = m.len();
    let mut a: QMat = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r: QVec = row.iter().map(|&x| q(x)).collect();
            r.extend((0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero()).ok_or(Error::SingularMatrix)?;
        a.swap(col, pivot);
        let p = a[col][col].clone();
        for x in a[col].iter_mut() {
            *x = &*x / &p;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                let pivot_row = a[col].clone();
                for (x, y) in a[r].iter_mut().zip(&pivot_row) {
                    *x = &*x - &f * y;
                }
            }
        }
    }
    Ok(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

impl AbcGroup {
    pub fn new(matrix: IntMatrix) -> Result<Self> {
        let n = matrix.len();
        if n == 0 || matrix.iter().any(|r| r.len() != n) {
            return Err(Error::MalformedMatrix("matrix is not square".into()));
        }
        if poly::bareiss_det(&matrix)? == 0 {
            return Err(Error::SingularMatrix);
        }
        let m = matrix.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect();
        let m_inv = rational_inverse(&matrix)?;
        Ok(AbcGroup { matrix, m, m_inv })
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.matrix.len()
    }

    pub fn m(&self) -> &QMat {
        &self.m
    }

    pub fn m_inv(&self) -> &QMat {
        &self.m_inv
    }

    /// `M^k v` for any integer `k`.
    pub fn m_pow_apply(&self, k: i64, v: &[BigRational]) -> QVec {
        let mat = if k >= 0 { &self.m } else { &self.m_inv };
        (0..k.unsigned_abs()).fold(v.to_vec(), |acc, _| mat_vec(mat, &acc))
    }

    pub fn a(&self) -> AbcElement {
        AbcElement { k: 1, u: vec![BigRational::zero(); self.rank()] }
    }

    /// `b_j`, zero-based.
    pub fn b(&self, j: usize) -> AbcElement {
        let mut u = vec![BigRational::zero(); self.rank()];
        u[j] = BigRational::one();
        AbcElement { k: 0, u }
    }

    pub fn element(&self, k: i64, u: QVec) -> Result<AbcElement> {
        if u.len() != self.rank() {
            return Err(Error::GroupMismatch);
        }
        Ok(AbcElement { k, u })
    }

    /// `φ_M(b_j) = a b_j a⁻¹ = b^{M e_j}`, i.e. column `j` of `M`.
    pub fn phi_b(&self, j: usize) -> AbcElement {
        AbcElement { k: 0, u: self.matrix.iter().map(|row| q(row[j])).collect() }
    }

    fn gen_name(&self, j: usize) -> String {
        if self.rank() == 1 {
            "b".into()
        } else {
            format!("b{}", j + 1)
        }
    }
}

impl Group for AbcGroup {
    type Elem = AbcElement;

    fn identity(&self) -> AbcElement {
        AbcElement { k: 0, u: vec![BigRational::zero(); self.rank()] }
    }

    /// `(k_g + k_h, M^{-k_h} u_g + u_h)`.
    fn mul(&self, g: &AbcElement, h: &AbcElement) -> AbcElement {
        AbcElement { k: g.k + h.k, u: add(&self.m_pow_apply(-h.k, &g.u), &h.u) }
    }

    fn inv(&self, g: &AbcElement) -> AbcElement {
        let u = self.m_pow_apply(g.k, &g.u).into_iter().map(|x| -x).collect();
        AbcElement { k: -g.k, u }
    }

    fn generators(&self) -> Vec<(String, AbcElement)> {
        let mut out = vec![("a".to_string(), self.a())];
        out.extend((0..self.rank()).map(|j| (self.gen_name(j), self.b(j))));
        out
    }
}

impl fmt::Display for AbcElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let u: Vec<String> = self.u.iter().map(|x| x.to_string()).collect();
        write!(f, "({}, [{}])", self.k, u.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bs12_conjugation() {
        let g = AbcGroup::new(vec![vec![2]]).unwrap();
        let aba = g.mul(&g.mul(&g.a(), &g.b(0)), &g.inv(&g.a()));
        assert_eq!(aba, AbcElement { k: 0, u: vec![q(2)] });
        assert_eq!(g.mul(&g.a(), &g.identity()), g.a());
        let x = g.parse_word("a b a^-2 b^3").unwrap();
        assert_eq!(g.mul(&g.inv(&x), &x), g.identity());
    }

    #[test]
    fn cat_map_conjugation_is_column() {
        let g = AbcGroup::new(vec![vec![2, 1], vec![1, 1]]).unwrap();
        let c = g.mul(&g.mul(&g.a(), &g.b(0)), &g.inv(&g.a()));
        assert_eq!(c, AbcElement { k: 0, u: vec![q(2), q(1)] });
        assert_eq!(c, g.parse_word("b1^2 b2").unwrap());
        assert_eq!(c, g.phi_b(0));
    }

    #[test]
    fn inverse_matrix() {
        let g = AbcGroup::new(vec![vec![2, 0], vec![0, 3]]).unwrap();
        let v = vec![q(1), q(1)];
        assert_eq!(mat_vec(g.m_inv(), &v), vec![BigRational::new(1.into(), 2.into()), BigRational::new(1.into(), 3.into())]);
        assert_eq!(g.m_pow_apply(2, &g.m_pow_apply(-2, &v)), v);
        assert!(matches!(AbcGroup::new(vec![vec![1, 2], vec![2, 4]]), Err(Error::SingularMatrix)));
    }

    #[test]
    fn associativity_on_short_words() {
        let g = AbcGroup::new(vec![vec![2, 1], vec![1, 1]]).unwrap();
        let gens = g.symmetric_generators();
        let words: Vec<AbcElement> =
            gens.iter().flat_map(|x| gens.iter().map(move |y| (x, y))).map(|(x, y)| g.mul(x, y)).collect();
        for x in &words {
            for y in &gens {
                for z in &words {
                    assert_eq!(g.mul(&g.mul(x, y), z), g.mul(x, &g.mul(y, z)));
                }
            }
            assert_eq!(g.mul(x, &g.inv(x)), g.identity());
        }
    }
}
