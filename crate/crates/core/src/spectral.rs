//! Spectral analysis of integral matrices.
//!
//! For an integral matrix `M` with no eigenvalue on the unit circle and a
//! diagonalizable complexification, [`analyze`] produces the decomposition
//! `M = S · Mbar · P · S⁻¹` where `Mbar` is the diagonal matrix of eigenvalue
//! moduli and `P` is block-orthogonal and commutes with `Mbar`. Columns of `S`
//! are ordered so that the expanding coordinates come first (moduli ascending)
//! followed by the contracting coordinates (moduli descending), which makes
//! both `Mbar1` and `Mbar2` ascending and groups equal moduli contiguously.
//!
//! The determinant and the diagonalizability test are exact; eigenvalues and
//! eigenvectors are floating point.

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::{self, Poly};

pub type IntMatrix = Vec<Vec<i64>>;

/// Unit-circle rejection tolerance on eigenvalue moduli.
pub const UNIT_CIRCLE_TOL: f64 = 1e-9;
/// Moduli closer than this share an eigen-exponent class.
pub const CLASS_MERGE_TOL: f64 = 1e-9;
const RECONSTRUCTION_TOL: f64 = 1e-9;

/// Parses a matrix literal such as `[[2,1],[1,1]]`.
pub fn parse_int_matrix(s: &str) -> Result<IntMatrix> {
    let m: IntMatrix = serde_json::from_str(s).map_err(|e| Error::Parse(format!("matrix {s:?}: {e}")))?;
    validate_square(&m)?;
    Ok(m)
}

fn validate_square(m: &IntMatrix) -> Result<()> {
    if m.is_empty() {
        return Err(Error::MalformedMatrix("empty matrix".into()));
    }
    if m.iter().any(|r| r.len() != m.len()) {
        return Err(Error::MalformedMatrix("matrix is not square".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CaseLabel {
    /// `d = 1`, eigenvalues on both sides of the unit circle.
    SolLike,
    /// `d > 1`, every eigenvalue expanding.
    Expanding,
    /// `d > 1`, eigenvalues on both sides of the unit circle.
    Mixed,
    /// One-dimensional: `BS(1, n)`-like.
    ScalarTree,
}

/// Which half of the absolute Jordan form. `Contracting` refers to `Mbar2`,
/// whose entries are the reciprocals of the contracting moduli (all > 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Block {
    Expanding,
    Contracting,
}

/// Piece of the orthogonal factor `P`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrthoPiece {
    Identity {
        index: usize,
    },
    /// Unpaired `-1` entry.
    Reflection {
        index: usize,
    },
    /// 2×2 rotation `[[cos θ, sin θ], [-sin θ, cos θ]]` on coordinates `start, start+1`.
    Rotation {
        start: usize,
        angle: f64,
    },
}

/// Coordinates (local to a block) sharing one eigen-modulus.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenClass {
    pub modulus: f64,
    pub alpha: f64,
    pub indices: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct SpectralSplit {
    matrix: IntMatrix,
    eigenvalues: Vec<Complex64>,
    mbar: Vec<f64>,
    n1: usize,
    s: DMatrix<f64>,
    s_inv: DMatrix<f64>,
    p: DMatrix<f64>,
    pieces: Vec<OrthoPiece>,
    det: u64,
    det_sign: i8,
}

/// A group of equal eigenvalues, ready to become columns of `S`.
struct RootGroup {
    value: Complex64,
    multiplicity: usize,
}

impl RootGroup {
    fn is_real(&self) -> bool {
        self.value.im == 0.0
    }
}

/// Analyzes `m`, returning its absolute Jordan data.
pub fn analyze(m: &IntMatrix) -> Result<SpectralSplit> {
    validate_square(m)?;
    let n = m.len();
    let det = poly::bareiss_det(m)?;
    if det == 0 {
        return Err(Error::SingularMatrix);
    }

    let cp = Poly::from_ints(&poly::char_poly(m));
    let factors = cp.squarefree_factors();
    let radical = factors.iter().fold(Poly::one(), |acc, (f, _)| poly_mul(&acc, f));
    if !poly::annihilates(&radical, m) {
        return Err(Error::NotDiagonalizable);
    }

    let mut groups: Vec<RootGroup> = Vec::new();
    let mut eigenvalues = Vec::with_capacity(n);
    for (factor, mult) in &factors {
        for root in polynomial_roots(&factor.to_f64()).into_iter().map(|r| snap_integer_root(factor, r)) {
            for _ in 0..*mult {
                eigenvalues.push(root);
            }
            if root.im >= 0.0 {
                groups.push(RootGroup { value: root, multiplicity: *mult });
            }
        }
    }
    for ev in &eigenvalues {
        if (ev.norm() - 1.0).abs() <= UNIT_CIRCLE_TOL {
            return Err(Error::EigenvalueOnUnitCircle { modulus: ev.norm() });
        }
    }
    eigenvalues.sort_by(|a, b| b.norm().total_cmp(&a.norm()).then(a.arg().total_cmp(&b.arg())));

    // Expanding first with moduli ascending, then contracting with moduli descending.
    groups.sort_by(|a, b| {
        let (ma, mb) = (a.value.norm(), b.value.norm());
        let (ea, eb) = (ma > 1.0, mb > 1.0);
        eb.cmp(&ea)
            .then_with(|| if ea { ma.total_cmp(&mb) } else { mb.total_cmp(&ma) })
            .then(a.value.arg().abs().total_cmp(&b.value.arg().abs()))
    });

    let mf = DMatrix::from_fn(n, n, |i, j| m[i][j] as f64);
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut mbar = Vec::with_capacity(n);
    let mut pieces = Vec::new();
    for g in &groups {
        let modulus = g.value.norm();
        if g.is_real() {
            let basis = real_null_space(&mf, g.value.re, g.multiplicity);
            let negative = g.value.re < 0.0;
            let start = cols.len();
            for v in basis {
                cols.push(v);
                mbar.push(modulus);
            }
            let mut i = start;
            while i < cols.len() {
                if negative && i + 1 < cols.len() {
                    pieces.push(OrthoPiece::Rotation { start: i, angle: std::f64::consts::PI });
                    i += 2;
                } else {
                    pieces.push(if negative { OrthoPiece::Reflection { index: i } } else { OrthoPiece::Identity { index: i } });
                    i += 1;
                }
            }
        } else {
            let basis = complex_null_space(&mf, g.value, g.multiplicity);
            for w in basis {
                let start = cols.len();
                cols.push(w.iter().map(|z| z.re).collect());
                cols.push(w.iter().map(|z| z.im).collect());
                mbar.push(modulus);
                mbar.push(modulus);
                pieces.push(OrthoPiece::Rotation { start, angle: g.value.arg() });
            }
        }
    }
    if cols.len() != n {
        return Err(Error::NotDiagonalizable);
    }

    let s = DMatrix::from_fn(n, n, |i, j| cols[j][i]);
    let s_inv = s.clone().try_inverse().ok_or(Error::NotDiagonalizable)?;
    let p = ortho_matrix(n, &pieces, 1.0)?;
    let n1 = mbar.iter().filter(|&&x| x > 1.0).count();

    let split = SpectralSplit {
        matrix: m.clone(),
        eigenvalues,
        mbar,
        n1,
        s,
        s_inv,
        p,
        pieces,
        det: det.unsigned_abs(),
        det_sign: det.signum() as i8,
    };
    let scale = m.iter().flatten().fold(1.0f64, |acc, &x| acc.max((x as f64).abs()));
    if split.reconstruction_error() > RECONSTRUCTION_TOL * scale {
        return Err(Error::NotDiagonalizable);
    }
    Ok(split)
}

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let (ca, cb) = (a.coeffs(), b.coeffs());
    if ca.is_empty() || cb.is_empty() {
        return Poly::new(vec![]);
    }
    let mut out = vec![num_rational::BigRational::from_integer(0.into()); ca.len() + cb.len() - 1];
    for (i, x) in ca.iter().enumerate() {
        for (j, y) in cb.iter().enumerate() {
            out[i + j] = &out[i + j] + x * y;
        }
    }
    Poly::new(out)
}

/// Replaces a numerically integral real root by the exact integer when it is one.
fn snap_integer_root(p: &Poly, r: Complex64) -> Complex64 {
    if r.im != 0.0 || r.re.abs() > 1e15 {
        return r;
    }
    let k = num_bigint::BigInt::from(r.re.round() as i64);
    let val = p.coeffs().iter().rev().fold(num_rational::BigRational::from_integer(0.into()), |acc, c| {
        acc * num_rational::BigRational::from_integer(k.clone()) + c
    });
    if num_traits::Zero::is_zero(&val) {
        Complex64::new(r.re.round(), 0.0)
    } else {
        r
    }
}

/// Roots of a squarefree polynomial (coefficients lowest first) from the
/// eigenvalues of its companion matrix, polished by Newton steps.
fn polynomial_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let deg = coeffs.len() - 1;
    let lead = coeffs[deg];
    let monic: Vec<f64> = coeffs.iter().map(|c| c / lead).collect();
    if deg == 1 {
        return vec![Complex64::new(-monic[0], 0.0)];
    }
    let companion = DMatrix::from_fn(deg, deg, |i, j| {
        if j == deg - 1 {
            -monic[i]
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let mut roots: Vec<Complex64> = companion.complex_eigenvalues().iter().map(|z| Complex64::new(z.re, z.im)).collect();
    for r in roots.iter_mut() {
        for _ in 0..8 {
            let (mut f, mut df) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            for c in monic.iter().rev() {
                df = df * *r + f;
                f = f * *r + c;
            }
            if df.norm() == 0.0 {
                break;
            }
            *r -= f / df;
        }
        // Integral polynomials have conjugate-symmetric roots; snap numerically real ones.
        if r.im.abs() <= 1e-9 * r.norm().max(1.0) {
            r.im = 0.0;
        }
    }
    roots
}

fn smallest_singular_indices(values: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    idx.truncate(k);
    idx.sort_unstable();
    idx
}

fn real_null_space(m: &DMatrix<f64>, lambda: f64, k: usize) -> Vec<Vec<f64>> {
    let n = m.nrows();
    let a = m - DMatrix::identity(n, n) * lambda;
    let svd = a.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    smallest_singular_indices(&sv, k)
        .into_iter()
        .map(|r| {
            let mut v: Vec<f64> = vt.row(r).iter().copied().collect();
            let pivot = v.iter().copied().fold(0.0f64, |best, x| if x.abs() > best.abs() + 1e-12 { x } else { best });
            if pivot < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            v
        })
        .collect()
}

fn complex_null_space(m: &DMatrix<f64>, lambda: Complex64, k: usize) -> Vec<Vec<Complex64>> {
    let n = m.nrows();
    let a = DMatrix::from_fn(n, n, |i, j| {
        let d = if i == j { lambda } else { Complex64::new(0.0, 0.0) };
        Complex64::new(m[(i, j)], 0.0) - d
    });
    let svd = a.svd(false, true);
    let vt = svd.v_t.expect("requested V^H");
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    smallest_singular_indices(&sv, k)
        .into_iter()
        .map(|r| {
            let w: Vec<Complex64> = vt.row(r).iter().map(|z| z.conj()).collect();
            let pivot =
                w.iter().copied().fold(Complex64::new(0.0, 0.0), |best, z| if z.norm() > best.norm() + 1e-12 { z } else { best });
            let phase = pivot.conj() / pivot.norm();
            w.into_iter().map(|z| z * phase).collect()
        })
        .collect()
}

fn ortho_matrix(n: usize, pieces: &[OrthoPiece], t: f64) -> Result<DMatrix<f64>> {
    let mut p = DMatrix::zeros(n, n);
    for piece in pieces {
        match *piece {
            OrthoPiece::Identity { index } => p[(index, index)] = 1.0,
            OrthoPiece::Reflection { index } => {
                if t.fract() != 0.0 {
                    return Err(Error::NonRealPower(t));
                }
                p[(index, index)] = if (t as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            }
            OrthoPiece::Rotation { start, angle } => {
                let (s, c) = (t * angle).sin_cos();
                p[(start, start)] = c;
                p[(start, start + 1)] = s;
                p[(start + 1, start)] = -s;
                p[(start + 1, start + 1)] = c;
            }
        }
    }
    Ok(p)
}

impl SpectralSplit {
    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.len()
    }

    /// Eigenvalues with multiplicity, moduli descending.
    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    /// Diagonal of `Mbar` in `S`-order.
    pub fn mbar(&self) -> &[f64] {
        &self.mbar
    }

    /// Diagonal of `Mbar1` (expanding moduli, ascending).
    pub fn mbar1(&self) -> Vec<f64> {
        self.mbar[..self.n1].to_vec()
    }

    /// Diagonal of `Mbar2` (reciprocals of contracting moduli, ascending).
    pub fn mbar2(&self) -> Vec<f64> {
        self.mbar[self.n1..].iter().map(|x| 1.0 / x).collect()
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.dim() - self.n1
    }

    pub fn block_diag(&self, block: Block) -> Vec<f64> {
        match block {
            Block::Expanding => self.mbar1(),
            Block::Contracting => self.mbar2(),
        }
    }

    /// Coordinate range of a block inside `S`-order vectors.
    pub fn block_range(&self, block: Block) -> std::ops::Range<usize> {
        match block {
            Block::Expanding => 0..self.n1,
            Block::Contracting => self.n1..self.dim(),
        }
    }

    pub fn s(&self) -> &DMatrix<f64> {
        &self.s
    }

    pub fn s_inv(&self) -> &DMatrix<f64> {
        &self.s_inv
    }

    pub fn p(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn ortho_pieces(&self) -> &[OrthoPiece] {
        &self.pieces
    }

    /// `|det M|`.
    pub fn det(&self) -> u64 {
        self.det
    }

    pub fn det_sign(&self) -> i8 {
        self.det_sign
    }

    pub fn mbar_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.mbar))
    }

    /// `P^t` along the one-parameter subgroup through `P`.
    pub fn ortho_power(&self, t: f64) -> Result<DMatrix<f64>> {
        ortho_matrix(self.dim(), &self.pieces, t)
    }

    /// `(Mbar P)^k` for integral `k`.
    pub fn mbar_p_power(&self, k: i64) -> DMatrix<f64> {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(self.dim(), self.mbar.iter().map(|x| x.powi(k as i32))));
        let p = self.ortho_power(k as f64).expect("integral powers of P are real");
        d * p
    }

    /// `max |S Mbar P S⁻¹ - M|` entrywise.
    pub fn reconstruction_error(&self) -> f64 {
        let r = &self.s * self.mbar_matrix() * &self.p * &self.s_inv;
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((r[(i, j)] - self.matrix[i][j] as f64).abs());
            }
        }
        worst
    }

    /// Eigen-exponent classes of a block, `alpha` ascending.
    pub fn classes(&self, block: Block) -> Vec<EigenClass> {
        let diag = self.block_diag(block);
        let mut out: Vec<EigenClass> = Vec::new();
        for (i, &m) in diag.iter().enumerate() {
            match out.last_mut() {
                Some(c) if (c.modulus - m).abs() <= CLASS_MERGE_TOL * m.max(1.0) => c.indices.push(i),
                _ => out.push(EigenClass { modulus: m, alpha: m.ln(), indices: vec![i] }),
            }
        }
        out
    }

    pub fn alphas(&self, block: Block) -> Vec<f64> {
        self.classes(block).iter().map(|c| c.alpha).collect()
    }

    pub fn classify(&self) -> CaseLabel {
        classify(self)
    }

    pub fn absolute_power(&self, k: Ratio<i64>) -> Result<(Vec<f64>, u64)> {
        absolute_power(self, k)
    }

    pub fn snowflake_exponents(&self, block: Block) -> Result<Vec<f64>> {
        snowflake_exponents(self, block)
    }

    pub fn report(&self) -> SpectralReport {
        SpectralReport {
            matrix: self.matrix.clone(),
            eigenvalues: self.eigenvalues.iter().map(|z| [z.re, z.im]).collect(),
            mbar: self.mbar.clone(),
            mbar1: self.mbar1(),
            mbar2: self.mbar2(),
            det: self.det,
            case: self.classify(),
            alphas: self.alphas(Block::Expanding),
            alphas2: self.alphas(Block::Contracting),
            reconstruction_error: self.reconstruction_error(),
        }
    }
}

/// Serializable summary emitted by `spectral analyze`.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    pub matrix: IntMatrix,
    /// `[re, im]` pairs, moduli descending.
    pub eigenvalues: Vec<[f64; 2]>,
    pub mbar: Vec<f64>,
    pub mbar1: Vec<f64>,
    pub mbar2: Vec<f64>,
    pub det: u64,
    pub case: CaseLabel,
    pub alphas: Vec<f64>,
    pub alphas2: Vec<f64>,
    pub reconstruction_error: f64,
}

pub fn classify(split: &SpectralSplit) -> CaseLabel {
    if split.dim() == 1 {
        CaseLabel::ScalarTree
    } else if split.n2() == 0 {
        CaseLabel::Expanding
    } else if split.det() == 1 {
        CaseLabel::SolLike
    } else {
        CaseLabel::Mixed
    }
}

/// `Mbar^k` together with the exact integer `d^k`.
pub fn absolute_power(split: &SpectralSplit, k: Ratio<i64>) -> Result<(Vec<f64>, u64)> {
    let (num, den) = (*k.numer(), *k.denom());
    let d = split.det();
    let err = Error::NonIntegralDeterminantPower { d, num, den };
    // gcd(num, den) = 1, so d^(num/den) is integral iff d is a perfect den-th power
    // (and, for negative num, iff d = 1).
    let den_u = u32::try_from(den).map_err(|_| err.clone())?;
    let root = poly::integer_root(d, den_u);
    if poly::checked_pow(root, den_u) != Some(d) {
        return Err(err);
    }
    let dk = if num >= 0 {
        poly::checked_pow(root, u32::try_from(num).map_err(|_| Error::Overflow)?).ok_or(Error::Overflow)?
    } else if root == 1 {
        1
    } else {
        return Err(err);
    };
    let kf = num as f64 / den as f64;
    Ok((split.mbar().iter().map(|x| x.powf(kf)).collect(), dk))
}

/// Ratios `α₁/α_i` over the distinct eigen-exponents of a block, descending.
pub fn snowflake_exponents(split: &SpectralSplit, block: Block) -> Result<Vec<f64>> {
    let alphas = split.alphas(block);
    let first = *alphas.first().ok_or(Error::EmptyBlock)?;
    Ok(alphas.iter().map(|a| first / a).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn scalar_matrix() {
        let s = analyze(&vec![vec![2]]).unwrap();
        assert_eq!(s.mbar(), &[2.0]);
        assert_eq!(s.mbar1(), vec![2.0]);
        assert!(s.mbar2().is_empty());
        assert_eq!(s.det(), 2);
        assert_eq!(s.classify(), CaseLabel::ScalarTree);
    }

    #[test]
    fn cat_map_split() {
        let s = analyze(&vec![vec![2, 1], vec![1, 1]]).unwrap();
        let phi2 = (3.0 + 5f64.sqrt()) / 2.0;
        assert!(close(s.eigenvalues()[0].re, phi2, 1e-12));
        assert!(close(s.eigenvalues()[1].re, 1.0 / phi2, 1e-12));
        assert!(close(s.mbar1()[0], phi2, 1e-12));
        assert!(close(s.mbar2()[0], phi2, 1e-12));
        assert_eq!(s.det(), 1);
        assert_eq!(s.classify(), CaseLabel::SolLike);
        assert!(s.reconstruction_error() < 1e-9);
    }

    #[test]
    fn diagonal_expanding() {
        let s = analyze(&vec![vec![2, 0], vec![0, 3]]).unwrap();
        assert_eq!(s.mbar1(), vec![2.0, 3.0]);
        assert!(s.mbar2().is_empty());
        assert_eq!(s.det(), 6);
        assert_eq!(s.classify(), CaseLabel::Expanding);
    }

    #[test]
    fn complex_eigenvalues_give_rotation() {
        // eigenvalues 1 ± 2i, modulus √5
        let s = analyze(&vec![vec![1, -2], vec![2, 1]]).unwrap();
        assert!(s.mbar().iter().all(|&x| close(x, 5f64.sqrt(), 1e-12)));
        let p = s.p();
        assert!((p * p.transpose() - DMatrix::<f64>::identity(2, 2)).amax() < 1e-12);
        assert!(p[(0, 1)].abs() > 0.5);
        assert!(s.reconstruction_error() < 1e-9);
    }

    #[test]
    fn negative_eigenvalues_pair_into_rotations() {
        let s = analyze(&vec![vec![-2, 0], vec![0, -2]]).unwrap();
        assert!(matches!(s.ortho_pieces()[0], OrthoPiece::Rotation { .. }));
        assert!(s.ortho_power(0.5).is_ok());
        let t = analyze(&vec![vec![-2]]).unwrap();
        assert!(matches!(t.ortho_power(0.5), Err(Error::NonRealPower(_))));
        assert_eq!(t.ortho_power(3.0).unwrap()[(0, 0)], -1.0);
    }

    #[test]
    fn rejections() {
        assert!(matches!(
            analyze(&vec![vec![1, 1], vec![0, 1]]),
            Err(Error::NotDiagonalizable) | Err(Error::EigenvalueOnUnitCircle { .. })
        ));
        assert!(matches!(analyze(&vec![vec![0, -1], vec![1, 0]]), Err(Error::EigenvalueOnUnitCircle { .. })));
        assert!(matches!(analyze(&vec![vec![2, 1], vec![0, 2]]), Err(Error::NotDiagonalizable)));
        assert!(matches!(analyze(&vec![vec![1, 2], vec![2, 4]]), Err(Error::SingularMatrix)));
        assert!(matches!(analyze(&vec![vec![1, 2]]), Err(Error::MalformedMatrix(_))));
    }

    #[test]
    fn repeated_eigenvalue_accepted_when_diagonalizable() {
        let s = analyze(&vec![vec![2, 0, 0], vec![0, 2, 0], vec![0, 0, 8]]).unwrap();
        assert_eq!(s.classes(Block::Expanding).len(), 2);
        assert_eq!(s.snowflake_exponents(Block::Expanding).unwrap().len(), 2);
        assert!(close(s.snowflake_exponents(Block::Expanding).unwrap()[1], 1.0 / 3.0, 1e-12));
    }

    #[test]
    fn absolute_powers() {
        let s4 = analyze(&vec![vec![4]]).unwrap();
        let (mk, dk) = s4.absolute_power(Ratio::new(1, 2)).unwrap();
        assert!(close(mk[0], 2.0, 1e-12));
        assert_eq!(dk, 2);
        let s2 = analyze(&vec![vec![2]]).unwrap();
        assert!(matches!(s2.absolute_power(Ratio::new(1, 2)), Err(Error::NonIntegralDeterminantPower { .. })));
        let (m1, d1) = s2.absolute_power(Ratio::new(1, 1)).unwrap();
        assert_eq!((m1, d1), (vec![2.0], 2));
        assert!(s2.absolute_power(Ratio::new(-1, 1)).is_err());
        let sol = analyze(&vec![vec![2, 1], vec![1, 1]]).unwrap();
        assert_eq!(sol.absolute_power(Ratio::new(-3, 7)).unwrap().1, 1);
    }

    #[test]
    fn snowflake_ratios() {
        let s = analyze(&vec![vec![2, 0], vec![0, 4]]).unwrap();
        assert_eq!(s.snowflake_exponents(Block::Expanding).unwrap(), vec![1.0, 0.5]);
        let s3 = analyze(&vec![vec![3]]).unwrap();
        assert_eq!(s3.snowflake_exponents(Block::Expanding).unwrap(), vec![1.0]);
        assert!(matches!(s3.snowflake_exponents(Block::Contracting), Err(Error::EmptyBlock)));
    }

    #[test]
    fn parse_literal() {
        assert_eq!(parse_int_matrix("[[2,1],[1,1]]").unwrap(), vec![vec![2, 1], vec![1, 1]]);
        assert!(parse_int_matrix("[[2,1],[1]]").is_err());
        assert!(parse_int_matrix("nope").is_err());
    }
}
