//! Quasi-isometries and their boundary shadows: sampled maps with fitted
//! constants, structured boundary similarities, almost translations, the
//! iterate detector, `ψ`, and the straightening bound.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::boundary::{dm_metric, madic_dist, BlockLayout, BoundaryPoint, MAdic};
use crate::error::{Error, Result};
use crate::spaces::{GPoint, TreeVertex};
use crate::spectral::SpectralSplit;

pub type LevelOffset = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type TreeMap = Arc<dyn Fn(&TreeVertex) -> Result<TreeVertex> + Send + Sync>;
pub type GMap = Arc<dyn Fn(&GPoint) -> Result<GPoint> + Send + Sync>;
pub type RealBoundaryMap = Arc<dyn Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync>;

/// A map known on finitely many points.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledMap<P> {
    pub domain: Vec<P>,
    pub image: Vec<P>,
    pub tag: String,
}

impl<P: Clone + PartialEq> SampledMap<P> {
    pub fn new(domain: Vec<P>, image: Vec<P>, tag: impl Into<String>) -> Result<Self> {
        if domain.is_empty() || domain.len() != image.len() {
            return Err(Error::InvalidArgument("sample table must be nonempty with matching columns".into()));
        }
        Ok(SampledMap { domain, image, tag: tag.into() })
    }

    pub fn from_fn(domain: Vec<P>, tag: impl Into<String>, mut f: impl FnMut(&P) -> Result<P>) -> Result<Self> {
        let image = domain.iter().map(&mut f).collect::<Result<Vec<_>>>()?;
        Self::new(domain, image, tag)
    }

    pub fn identity(domain: Vec<P>) -> Result<Self> {
        let image = domain.clone();
        Self::new(domain, image, "identity")
    }

    pub fn len(&self) -> usize {
        self.domain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domain.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QiConstants {
    pub k: f64,
    pub c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuasiSimilarity {
    pub k: f64,
    pub s: f64,
}

/// Domain and image distances of every sample pair.
pub fn pair_distances<P>(
    f: &SampledMap<P>,
    dx: impl Fn(&P, &P) -> Result<f64>,
    dy: impl Fn(&P, &P) -> Result<f64>,
) -> Result<Vec<(f64, f64)>> {
    let n = f.domain.len();
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            out.push((dx(&f.domain[i], &f.domain[j])?, dy(&f.image[i], &f.image[j])?));
        }
    }
    Ok(out)
}

/// Smallest `C` with `d/K - C <= e <= K d + C` on every pair.
fn additive_constant(pairs: &[(f64, f64)], k: f64) -> f64 {
    pairs.iter().map(|&(d, e)| (e - k * d).max(d / k - e)).fold(0.0, f64::max)
}

/// Fits `(K, C)` to precomputed pairs. `C(K)` is convex, so the objective
/// `K + 2 C(K) / D` (`D` the largest domain distance) is minimized by a
/// golden-section search and then snapped onto a nearby exact pair ratio.
pub fn fit_qi_constants(pairs: &[(f64, f64)], surjectivity: f64) -> QiConstants {
    let mut distinct = pairs.to_vec();
    distinct.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    distinct.dedup();
    let pairs = distinct.as_slice();
    let diam = pairs.iter().map(|p| p.0).fold(0.0, f64::max);
    if diam == 0.0 {
        let c = pairs.iter().map(|p| p.1).fold(0.0, f64::max).max(surjectivity);
        return QiConstants { k: 1.0, c };
    }
    let phi = |k: f64| k + 2.0 * additive_constant(pairs, k) / diam;
    let k_max =
        pairs.iter().filter(|p| p.0 > 0.0).flat_map(|&(d, e)| [e / d, if e > 0.0 { d / e } else { 1.0 }]).fold(1.0, f64::max);
    let (mut lo, mut hi) = (1.0, k_max);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        if hi - lo <= 1e-13 * hi {
            break;
        }
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if phi(a) <= phi(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let found = 0.5 * (lo + hi);
    let found_phi = phi(found);
    let mut best: Option<(f64, f64)> = None;
    for k in std::iter::once(1.0).chain(pairs.iter().filter(|p| p.0 > 0.0 && p.1 > 0.0).flat_map(|&(d, e)| [e / d, d / e])) {
        if k < 1.0 || (k - found).abs() > 1e-6 * found {
            continue;
        }
        let v = phi(k);
        if v > found_phi + 1e-9 * found_phi {
            continue;
        }
        best = match best {
            Some((bk, bv)) if bv < v - 1e-12 || ((bv - v).abs() <= 1e-12 && bk <= k) => Some((bk, bv)),
            _ => Some((k, v)),
        };
    }
    let best = best.map_or(found, |b| b.0);
    QiConstants { k: best, c: additive_constant(pairs, best).max(surjectivity) }
}

/// Largest distance from a codomain sample to the image of `f`.
pub fn surjectivity_radius<P>(f: &SampledMap<P>, codomain: &[P], dy: impl Fn(&P, &P) -> Result<f64>) -> Result<f64> {
    let mut worst = 0.0f64;
    for z in codomain {
        let mut near = f64::INFINITY;
        for y in &f.image {
            near = near.min(dy(z, y)?);
            if near == 0.0 {
                break;
            }
        }
        worst = worst.max(near);
    }
    Ok(worst)
}

/// Quasi-isometry constants of a sampled map. When `codomain` is given, the
/// distance from its points to the image is folded into `C`.
pub fn estimate_qi_constants<P>(
    f: &SampledMap<P>,
    dx: impl Fn(&P, &P) -> Result<f64>,
    dy: impl Fn(&P, &P) -> Result<f64> + Copy,
    codomain: Option<&[P]>,
) -> Result<QiConstants> {
    let pairs = pair_distances(f, dx, dy)?;
    let surj = match codomain {
        Some(c) => surjectivity_radius(f, c, dy)?,
        None => 0.0,
    };
    Ok(fit_qi_constants(&pairs, surj))
}

/// `K = sqrt(ρmax/ρmin)` and `s = sqrt(ρmax ρmin)` over the distance ratios.
pub fn quasi_similarity_from_pairs(pairs: &[(f64, f64)]) -> Result<QuasiSimilarity> {
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for &(d, e) in pairs {
        if d == 0.0 {
            return Err(Error::DegenerateSamples);
        }
        let r = e / d;
        lo = lo.min(r);
        hi = hi.max(r);
    }
    if pairs.is_empty() {
        return Err(Error::DegenerateSamples);
    }
    Ok(QuasiSimilarity { k: (hi / lo).sqrt(), s: (hi * lo).sqrt() })
}

pub fn quasi_similarity_constants<P>(
    f: &SampledMap<P>,
    dx: impl Fn(&P, &P) -> Result<f64>,
    dy: impl Fn(&P, &P) -> Result<f64>,
) -> Result<QuasiSimilarity> {
    quasi_similarity_from_pairs(&pair_distances(f, dx, dy)?)
}

/// `max_x d(f(x), g(x))` over a common sample domain.
pub fn coarse_distance_maps<P: PartialEq>(
    f: &SampledMap<P>,
    g: &SampledMap<P>,
    dy: impl Fn(&P, &P) -> Result<f64>,
) -> Result<f64> {
    if f.domain != g.domain {
        return Err(Error::DomainMismatch);
    }
    f.image.iter().zip(&g.image).try_fold(0.0, |acc, (a, b)| Ok(f64::max(acc, dy(a, b)?)))
}

/// Largest displacement among maps that are bounded perturbations of the
/// identity. A member whose displacement on the outer half of the sample
/// exceeds its displacement on the inner half is rejected as unbounded.
/// `dist_to_center` gives each domain point's distance from the ball center.
pub fn qi_tameness_probe<P: Clone + PartialEq>(
    family: &[SampledMap<P>],
    dy: impl Fn(&P, &P) -> Result<f64>,
    dist_to_center: impl Fn(&P) -> Result<f64>,
) -> Result<f64> {
    let mut worst = 0.0f64;
    for f in family {
        let radius = f.domain.iter().try_fold(0.0, |acc, x| Ok::<f64, Error>(f64::max(acc, dist_to_center(x)?)))?;
        let (mut inner, mut outer) = (0.0f64, 0.0f64);
        for (x, y) in f.domain.iter().zip(&f.image) {
            let disp = dy(x, y)?;
            if 2.0 * dist_to_center(x)? <= radius {
                inner = inner.max(disp);
            } else {
                outer = outer.max(disp);
            }
        }
        if outer > inner {
            return Err(Error::NotBoundedPerturbation);
        }
        worst = worst.max(inner);
    }
    Ok(worst)
}

/// `ξ ↦ diag^c A ξ + b` on an eigen-blocked `R^n`; `A` commutes with `diag`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSimilarity {
    pub diag: Vec<f64>,
    pub layout: BlockLayout,
    pub scale_exponent: f64,
    pub orthogonal: DMatrix<f64>,
    pub translation: Vec<f64>,
}

impl RealSimilarity {
    pub fn identity(diag: Vec<f64>) -> Self {
        let n = diag.len();
        let layout = BlockLayout::from_diagonal(&diag);
        RealSimilarity { diag, layout, scale_exponent: 0.0, orthogonal: DMatrix::identity(n, n), translation: vec![0.0; n] }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Base `a` of the scale `a^c`: the smallest diagonal entry.
    pub fn base(&self) -> f64 {
        self.diag[0]
    }

    pub fn scale(&self) -> f64 {
        self.base().powf(self.scale_exponent)
    }

    fn dilate(&self, v: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(v.len(), v.iter().zip(&self.diag).map(|(x, l)| x * l.powf(self.scale_exponent)))
    }

    pub fn apply(&self, xi: &[f64]) -> Result<Vec<f64>> {
        if xi.len() != self.dim() {
            return Err(Error::BlockMismatch);
        }
        let rotated = &self.orthogonal * DVector::from_column_slice(xi);
        let out = self.dilate(&rotated) + DVector::from_column_slice(&self.translation);
        Ok(out.iter().copied().collect())
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &RealSimilarity) -> Result<RealSimilarity> {
        if self.dim() != other.dim() || self.layout.classes != other.layout.classes {
            return Err(Error::BlockMismatch);
        }
        Ok(RealSimilarity {
            diag: self.diag.clone(),
            layout: self.layout.clone(),
            scale_exponent: self.scale_exponent + other.scale_exponent,
            orthogonal: &self.orthogonal * &other.orthogonal,
            translation: self.apply(&other.translation)?,
        })
    }

    /// `D_Mbar` distance in this similarity's layout.
    pub fn metric(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        dm_metric(&self.layout.split_vector(x)?, &self.layout.split_vector(y)?, &self.layout)
    }
}

type MadicFn = Arc<dyn Fn(&MAdic) -> Result<MAdic> + Send + Sync>;

/// A similarity of `Q_m` with scale `m^c`, carried as a function.
#[derive(Clone)]
pub struct MadicSimilarity {
    pub base: u32,
    pub scale_exponent: i64,
    map: MadicFn,
}

impl fmt::Debug for MadicSimilarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MadicSimilarity")
            .field("base", &self.base)
            .field("scale_exponent", &self.scale_exponent)
            .finish_non_exhaustive()
    }
}

impl MadicSimilarity {
    pub fn new(base: u32, scale_exponent: i64, map: impl Fn(&MAdic) -> Result<MAdic> + Send + Sync + 'static) -> Self {
        MadicSimilarity { base, scale_exponent, map: Arc::new(map) }
    }

    pub fn identity(base: u32) -> Self {
        Self::new(base, 0, |y| Ok(y.clone()))
    }

    /// `y ↦ m^{-c} y + b`, a similarity of scale `m^c`.
    pub fn affine(base: u32, scale_exponent: i64, translation: MAdic) -> Self {
        Self::new(base, scale_exponent, move |y| y.shift(-scale_exponent).add(&translation))
    }

    pub fn scale(&self) -> f64 {
        (self.base as f64).powf(self.scale_exponent as f64)
    }

    pub fn apply(&self, y: &MAdic) -> Result<MAdic> {
        if y.base() != self.base {
            return Err(Error::BaseMismatch(y.base(), self.base));
        }
        (self.map)(y)
    }

    pub fn compose(&self, other: &MadicSimilarity) -> Result<MadicSimilarity> {
        if self.base != other.base {
            return Err(Error::BaseMismatch(self.base, other.base));
        }
        let (f, g) = (self.map.clone(), other.map.clone());
        Ok(MadicSimilarity {
            base: self.base,
            scale_exponent: self.scale_exponent + other.scale_exponent,
            map: Arc::new(move |y| f(&g(y)?)),
        })
    }
}

/// A similarity of `R^n`, of `Q_m`, or of their product.
#[derive(Debug, Clone)]
pub struct BoundarySimilarity {
    pub real: Option<RealSimilarity>,
    pub madic: Option<MadicSimilarity>,
}

impl BoundarySimilarity {
    pub fn apply(&self, p: &BoundaryPoint) -> Result<BoundaryPoint> {
        match (p, &self.real, &self.madic) {
            (BoundaryPoint::Real(v), Some(r), None) => Ok(BoundaryPoint::Real(r.apply(v)?)),
            (BoundaryPoint::MAdic(y), None, Some(m)) => Ok(BoundaryPoint::MAdic(m.apply(y)?)),
            (BoundaryPoint::Product(v, y), Some(r), Some(m)) => Ok(BoundaryPoint::Product(r.apply(v)?, m.apply(y)?)),
            _ => Err(Error::BlockMismatch),
        }
    }

    pub fn compose(&self, other: &BoundarySimilarity) -> Result<BoundarySimilarity> {
        let real = match (&self.real, &other.real) {
            (Some(a), Some(b)) => Some(a.compose(b)?),
            (None, None) => None,
            _ => return Err(Error::BlockMismatch),
        };
        let madic = match (&self.madic, &other.madic) {
            (Some(a), Some(b)) => Some(a.compose(b)?),
            (None, None) => None,
            _ => return Err(Error::BlockMismatch),
        };
        Ok(BoundarySimilarity { real, madic })
    }

    /// Scale exponents of the real and m-adic parts.
    pub fn scale_exponents(&self) -> (Option<f64>, Option<i64>) {
        (self.real.as_ref().map(|r| r.scale_exponent), self.madic.as_ref().map(|m| m.scale_exponent))
    }

    /// Distance on the boundary this map acts on: `D_Mbar`, the m-adic
    /// metric, or their maximum.
    pub fn metric(&self, p: &BoundaryPoint, q: &BoundaryPoint) -> Result<f64> {
        match (p, q, &self.real) {
            (BoundaryPoint::Real(a), BoundaryPoint::Real(b), Some(r)) => r.metric(a, b),
            (BoundaryPoint::MAdic(a), BoundaryPoint::MAdic(b), _) => madic_dist(a, b),
            (BoundaryPoint::Product(a, y), BoundaryPoint::Product(b, z), Some(r)) => Ok(r.metric(a, b)?.max(madic_dist(y, z)?)),
            _ => Err(Error::BlockMismatch),
        }
    }
}

/// One level of an almost translation: `x_i ↦ x_i + B_i(x_{i+1}, …)` with
/// Hölder data `|B_i(x) - B_i(x')| <= K |x - x'|^α`.
#[derive(Clone)]
pub struct AlmostLevel {
    pub offset: LevelOffset,
    pub holder_k: f64,
    pub alpha: f64,
}

impl fmt::Debug for AlmostLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AlmostLevel").field("holder_k", &self.holder_k).field("alpha", &self.alpha).finish_non_exhaustive()
    }
}

/// Block-triangular boundary map on `R^r`; level `i` may depend only on the
/// coordinates after it.
#[derive(Debug, Clone)]
pub struct AlmostTranslation {
    pub levels: Vec<AlmostLevel>,
}

impl AlmostTranslation {
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.levels.len() {
            return Err(Error::BlockMismatch);
        }
        Ok(self.levels.iter().enumerate().map(|(i, l)| x[i] + (l.offset)(&x[i + 1..])).collect())
    }

    /// Largest Hölder quotient violation over sample pairs, per level:
    /// `max |B(x) - B(x')| - K |x - x'|^α`, nonpositive when the data hold.
    pub fn holder_excess(&self, samples: &[Vec<f64>]) -> Result<Vec<f64>> {
        self.levels
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let mut worst = f64::NEG_INFINITY;
                for (a, x) in samples.iter().enumerate() {
                    for y in &samples[a + 1..] {
                        if x.len() != self.levels.len() || y.len() != self.levels.len() {
                            return Err(Error::BlockMismatch);
                        }
                        let dist = x[i + 1..].iter().zip(&y[i + 1..]).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
                        let gap = ((l.offset)(&x[i + 1..]) - (l.offset)(&y[i + 1..])).abs();
                        worst = worst.max(gap - l.holder_k * dist.powf(l.alpha));
                    }
                }
                Ok(worst)
            })
            .collect()
    }
}

/// Boundary map induced by a height-respecting map of a tree or of `G`,
/// with the measured height displacement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeightDisplacement {
    pub mean: f64,
    pub spread: f64,
}

/// Checks that `heights` (pairs before/after) move by `c` up to `r`.
pub fn height_displacement(heights: &[(f64, f64)], c: f64, r: f64) -> Result<HeightDisplacement> {
    let shifts: Vec<f64> = heights.iter().map(|(a, b)| b - a).collect();
    let lo = shifts.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = shifts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let spread = (hi - c).abs().max((lo - c).abs());
    if spread > r {
        return Err(Error::NotHeightRespecting(spread));
    }
    Ok(HeightDisplacement { mean: shifts.iter().sum::<f64>() / shifts.len().max(1) as f64, spread })
}

/// Induced boundary map of a height-respecting tree map with translation
/// `c`: a boundary point goes to the downward end of the image of its
/// geodesic, read off at `depth` levels below the anchor.
pub fn induced_tree_map(f: TreeMap, m: u32, c: i64, depth: i64, samples: &[TreeVertex], r: f64) -> Result<MadicSimilarity> {
    let heights = samples.iter().map(|v| Ok((v.height() as f64, f(v)?.height() as f64))).collect::<Result<Vec<_>>>()?;
    height_displacement(&heights, c as f64, r)?;
    Ok(MadicSimilarity::new(m, c, move |y| {
        let window = y.known_to().unwrap_or(depth).max(depth);
        let v = y.tree_vertex(-window)?;
        let w = f(&v)?;
        let len = w.address().len();
        MAdic::new(m, -w.height() - len as i64, w.address().to_vec(), Some(len))
    }))
}

/// Induced boundary map of a height-respecting map of `G`: the frozen
/// coordinate of the image of a vertical geodesic, read at height `low`.
pub fn induced_g_map(f: GMap, c: f64, low: f64, samples: &[GPoint], r: f64) -> Result<RealBoundaryMap> {
    let heights = samples.iter().map(|p| Ok((p.t, f(p)?.t))).collect::<Result<Vec<_>>>()?;
    height_displacement(&heights, c, r)?;
    Ok(Arc::new(move |xi: &[f64]| Ok(f(&GPoint { t: low, v: xi.to_vec() })?.v)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum IterateVerdict {
    Compatible,
    ViolatedAt(u64),
}

/// Exact decimal or fraction literal, e.g. `-0.9`, `1e-3`, `7/10`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("{int}{frac}0").parse::<BigInt>().map_err(|_| bad())? / 10;
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut r = BigRational::from_integer(digits);
    if scale >= 0 {
        r *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        r /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if neg { -r } else { r })
}

/// First `s` with `|s (c₁ + c₂)| > 2R`, in exact arithmetic.
pub fn uniform_iterate_check(c1: &BigRational, c2: &BigRational, r: &BigRational, max_iter: u64) -> Result<IterateVerdict> {
    if !r.is_positive() {
        return Err(Error::InvalidArgument("R must be positive".into()));
    }
    let c = (c1 + c2).abs();
    if c.is_zero() {
        return Ok(IterateVerdict::Compatible);
    }
    let q = (r * BigRational::from_integer(2.into())) / c;
    let s: BigInt = q.numer().div_floor(q.denom()) + 1;
    match s.to_u64() {
        Some(s) if s <= max_iter => Ok(IterateVerdict::ViolatedAt(s)),
        _ => Ok(IterateVerdict::Compatible),
    }
}

/// A boundary map pair in straightened form: block orthogonal parts and
/// height exponents `t₁ = -t₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredPair {
    pub a1: DMatrix<f64>,
    pub a2: DMatrix<f64>,
    pub t1: f64,
    pub t2: f64,
}

impl StructuredPair {
    pub fn identity(split: &SpectralSplit) -> Self {
        StructuredPair {
            a1: DMatrix::identity(split.n1(), split.n1()),
            a2: DMatrix::identity(split.n2(), split.n2()),
            t1: 0.0,
            t2: 0.0,
        }
    }

    /// The pair `(P^s, t)` restricted to the two blocks.
    pub fn from_power(split: &SpectralSplit, s: f64, t: f64) -> Result<Self> {
        let ps = split.ortho_power(s)?;
        let (n1, n) = (split.n1(), split.dim());
        Ok(StructuredPair {
            a1: ps.view((0, 0), (n1, n1)).into_owned(),
            a2: ps.view((n1, n1), (n - n1, n - n1)).into_owned(),
            t1: t,
            t2: -t,
        })
    }

    pub fn compose(&self, other: &StructuredPair) -> StructuredPair {
        StructuredPair { a1: &self.a1 * &other.a1, a2: &self.a2 * &other.a2, t1: self.t1 + other.t1, t2: self.t2 + other.t2 }
    }
}

/// `ψ(γ) = (diag(A₁, A₂) P^{-t}, e^{2πit})`.
pub fn psi(pair: &StructuredPair, split: &SpectralSplit) -> Result<(DMatrix<f64>, Complex64)> {
    if (pair.t1 + pair.t2).abs() > 1e-9 {
        return Err(Error::HeightMismatch(pair.t1, -pair.t2));
    }
    let (n1, n) = (split.n1(), split.dim());
    if pair.a1.nrows() != n1 || pair.a2.nrows() != n - n1 {
        return Err(Error::BlockMismatch);
    }
    let mut a = DMatrix::zeros(n, n);
    a.view_mut((0, 0), (n1, n1)).copy_from(&pair.a1);
    a.view_mut((n1, n1), (n - n1, n - n1)).copy_from(&pair.a2);
    let t = pair.t1;
    Ok((a * split.ortho_power(-t)?, Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * t)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StraighteningReport {
    pub bound: f64,
    pub empirical: f64,
    pub holds: bool,
}

/// `2Kε^α + (K/n)|x_r|^α` against `|B(x_r) - B(0)|`.
pub fn straightening_bound(b: impl Fn(f64) -> f64, k: f64, alpha: f64, xr: f64, eps: f64, n: u64) -> Result<StraighteningReport> {
    if n == 0 || eps <= 0.0 {
        return Err(Error::InvalidArgument("need n >= 1 and eps > 0".into()));
    }
    let bound = 2.0 * k * eps.powf(alpha) + k / n as f64 * xr.abs().powf(alpha);
    let empirical = (b(xr) - b(0.0)).abs();
    Ok(StraighteningReport { bound, empirical, holds: empirical <= bound })
}

/// Finite radial certificate: every orbit point lies within `r` of the ray.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialCertificate {
    pub max_distance: f64,
    pub bound: f64,
    pub holds: bool,
}

pub fn radial_certificate<P>(orbit: &[P], ray: &[P], r: f64, d: impl Fn(&P, &P) -> Result<f64>) -> Result<RadialCertificate> {
    if ray.is_empty() {
        return Err(Error::InvalidArgument("ray needs at least one point".into()));
    }
    let mut worst = 0.0f64;
    for x in orbit {
        let near = ray.iter().try_fold(f64::INFINITY, |acc, y| Ok::<f64, Error>(acc.min(d(x, y)?)))?;
        worst = worst.max(near);
    }
    Ok(RadialCertificate { max_distance: worst, bound: r, holds: worst < r })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::parse_madic;
    use crate::search;
    use crate::spaces::{tree_distance, TreeVertex};
    use crate::spectral::analyze;

    fn abs(a: &f64, b: &f64) -> Result<f64> {
        Ok((a - b).abs())
    }

    fn rat(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn fit_examples() {
        let pts: Vec<f64> = (-8..=8).map(f64::from).collect();
        let id = SampledMap::identity(pts.clone()).unwrap();
        assert_eq!(estimate_qi_constants(&id, abs, abs, None).unwrap(), QiConstants { k: 1.0, c: 0.0 });
        let double = SampledMap::from_fn(pts, "x2", |x| Ok(2.0 * x)).unwrap();
        assert_eq!(estimate_qi_constants(&double, abs, abs, None).unwrap(), QiConstants { k: 2.0, c: 0.0 });
    }

    #[test]
    fn tree_shift_fit() {
        let ball: Vec<TreeVertex> =
            search::ball(TreeVertex::anchor(2, 0), 6, |v| v.neighbors()).into_iter().map(|x| x.0).collect();
        let f = SampledMap::from_fn(ball.clone(), "parent", |v| Ok(v.parent())).unwrap();
        let d = |a: &TreeVertex, b: &TreeVertex| Ok(tree_distance(a, b)? as f64);
        let qi = estimate_qi_constants(&f, d, d, None).unwrap();
        assert_eq!(qi.k, 1.0);
        assert!(qi.c <= 2.0);
        let id = SampledMap::identity(ball).unwrap();
        assert_eq!(coarse_distance_maps(&id, &f, d).unwrap(), 1.0);
    }

    #[test]
    fn quasi_similarity_examples() {
        let pts: Vec<f64> = (-32..=32).map(|i| i as f64 / 8.0).collect();
        let f = SampledMap::from_fn(pts.clone(), "sim", |x| Ok(3.0 * x + 1.0)).unwrap();
        let q = quasi_similarity_constants(&f, abs, abs).unwrap();
        assert!((q.k - 1.0).abs() < 1e-12 && (q.s - 3.0).abs() < 1e-12);
        let g = SampledMap::from_fn(pts, "wiggle", |x| Ok(2.0 * x + x.sin() / 10.0)).unwrap();
        let q = quasi_similarity_constants(&g, abs, abs).unwrap();
        assert!((q.s - 2.0).abs() < 0.1 && q.k <= 1.1);
        let dup = SampledMap::new(vec![0.0, 0.0], vec![1.0, 2.0], "dup").unwrap();
        assert_eq!(quasi_similarity_constants(&dup, abs, abs), Err(Error::DegenerateSamples));
    }

    #[test]
    fn madic_times_m() {
        let pts: Vec<MAdic> = ["1@0", "01@0", "11@0", "001@0", "1@-1"].iter().map(|s| parse_madic(2, s).unwrap()).collect();
        let f = SampledMap::from_fn(pts, "times 2", |y| Ok(y.shift(1))).unwrap();
        let q = quasi_similarity_constants(&f, madic_dist, madic_dist).unwrap();
        assert_eq!((q.k, q.s), (1.0, 0.5));
    }

    #[test]
    fn iterate_examples() {
        let r5 = rat("5");
        assert_eq!(uniform_iterate_check(&rat("1"), &rat("-1"), &r5, 1000).unwrap(), IterateVerdict::Compatible);
        assert_eq!(uniform_iterate_check(&rat("1"), &rat("-0.9"), &r5, 1000).unwrap(), IterateVerdict::ViolatedAt(101));
        assert_eq!(uniform_iterate_check(&rat("0"), &rat("0"), &r5, 1000).unwrap(), IterateVerdict::Compatible);
        assert_eq!(uniform_iterate_check(&rat("1"), &rat("-0.9"), &r5, 100).unwrap(), IterateVerdict::Compatible);
    }

    #[test]
    fn rational_literals() {
        assert_eq!(rat("-0.9"), BigRational::new((-9).into(), 10.into()));
        assert_eq!(rat("1e-3"), BigRational::new(1.into(), 1000.into()));
        assert_eq!(rat("7/10"), BigRational::new(7.into(), 10.into()));
        assert_eq!(rat(".5"), BigRational::new(1.into(), 2.into()));
        assert!(parse_rational("1.2.3").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn psi_examples() {
        let split = analyze(&vec![vec![2, 1], vec![1, 1]]).unwrap();
        let (m, z) = psi(&StructuredPair::identity(&split), &split).unwrap();
        assert!((m - DMatrix::identity(2, 2)).amax() < 1e-12 && (z - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        let a = StructuredPair::from_power(&split, 1.0, 1.0).unwrap();
        let (m, z) = psi(&a, &split).unwrap();
        assert!((m - DMatrix::identity(2, 2)).amax() < 1e-9 && (z - Complex64::new(1.0, 0.0)).norm() < 1e-9);
        let half = StructuredPair::from_power(&split, 0.0, 0.5).unwrap();
        let (m, z) = psi(&half, &split).unwrap();
        assert!((m - split.ortho_power(-0.5).unwrap()).amax() < 1e-12);
        assert!((z - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
        let bad = StructuredPair { t2: 0.3, ..a };
        assert!(matches!(psi(&bad, &split), Err(Error::HeightMismatch(..))));
    }

    #[test]
    fn straightening_examples() {
        let k = 1.5;
        let flat = straightening_bound(|_| 0.5, k, 0.5, 1.0, 0.1, 1_000_000).unwrap();
        assert!(flat.holds && flat.empirical == 0.0);
        let bump = straightening_bound(|x: f64| k * x.abs().powf(0.5).min(1.0), k, 0.5, 1.0, 0.1, 1_000_000).unwrap();
        assert!(!bump.holds);
        assert_eq!(bump.empirical, k);
        assert!((bump.bound - (2.0 * k * 0.1f64.sqrt() + k / 1e6)).abs() < 1e-12);
    }

    #[test]
    fn real_similarity_composes() {
        let diag = vec![2.0, 3.0];
        let f = RealSimilarity { scale_exponent: 1.0, translation: vec![1.0, -1.0], ..RealSimilarity::identity(diag.clone()) };
        let g = RealSimilarity { scale_exponent: -2.0, translation: vec![0.5, 0.25], ..RealSimilarity::identity(diag) };
        let fg = f.compose(&g).unwrap();
        let x = [0.3, -0.7];
        let lhs = fg.apply(&x).unwrap();
        let rhs = f.apply(&g.apply(&x).unwrap()).unwrap();
        assert!(lhs.iter().zip(&rhs).all(|(a, b)| (a - b).abs() < 1e-12));
        assert_eq!(fg.scale_exponent, -1.0);
    }

    #[test]
    fn madic_affine_scale() {
        let f = MadicSimilarity::affine(3, -1, MAdic::from_i64(3, 1));
        let x = MAdic::from_i64(3, 2);
        let y = MAdic::from_i64(3, 5);
        let d0 = madic_dist(&x, &y).unwrap();
        let d1 = madic_dist(&f.apply(&x).unwrap(), &f.apply(&y).unwrap()).unwrap();
        assert!((d1 / d0 - f.scale()).abs() < 1e-12);
    }

    #[test]
    fn induced_tree_shift_scale() {
        let samples: Vec<TreeVertex> =
            search::ball(TreeVertex::anchor(2, 0), 4, |v| v.neighbors()).into_iter().map(|x| x.0).collect();
        let f = induced_tree_map(Arc::new(|v: &TreeVertex| Ok(v.shift(1))), 2, 1, 24, &samples, 0.0).unwrap();
        let pts: Vec<MAdic> = ["1@0", "01@0", "11@0", "101@-2"].iter().map(|s| parse_madic(2, s).unwrap()).collect();
        let map = SampledMap::from_fn(pts, "induced", |y| f.apply(y)).unwrap();
        let q = quasi_similarity_constants(&map, madic_dist, madic_dist).unwrap();
        assert_eq!((q.k, q.s), (1.0, 2.0));
        let wobble = induced_tree_map(
            Arc::new(|v: &TreeVertex| Ok(if v.height() > 0 { v.shift(2) } else { v.shift(1) })),
            2,
            1,
            24,
            &samples,
            0.5,
        );
        assert!(matches!(wobble, Err(Error::NotHeightRespecting(_))));
    }

    #[test]
    fn induced_hyperbolic_dilation() {
        let e = std::f64::consts::E;
        let f = Arc::new(move |p: &crate::spaces::GPoint| {
            Ok(crate::spaces::GPoint { t: p.t + 1.0, v: p.v.iter().map(|x| e * x).collect() })
        });
        let samples = vec![crate::spaces::GPoint { t: 0.0, v: vec![1.0] }, crate::spaces::GPoint { t: 3.0, v: vec![-2.0] }];
        let g = induced_g_map(f, 1.0, -30.0, &samples, 0.0).unwrap();
        assert!((g(&[2.0]).unwrap()[0] - 2.0 * e).abs() < 1e-12);
    }

    #[test]
    fn tameness_probe() {
        let pts: Vec<f64> = (-20..=20).map(f64::from).collect();
        let center = |x: &f64| Ok(x.abs());
        let near = SampledMap::from_fn(pts.clone(), "bounded", |x| Ok(x + 3.0 * (x * 0.7).sin().signum())).unwrap();
        assert_eq!(qi_tameness_probe(&[SampledMap::identity(pts.clone()).unwrap()], abs, center).unwrap(), 0.0);
        assert_eq!(qi_tameness_probe(&[near], abs, center).unwrap(), 3.0);
        let far = SampledMap::from_fn(pts, "stretch", |x| Ok(1.5 * x)).unwrap();
        assert_eq!(qi_tameness_probe(&[far], abs, center), Err(Error::NotBoundedPerturbation));
    }

    #[test]
    fn almost_translation_levels() {
        let t = AlmostTranslation {
            levels: vec![
                AlmostLevel { offset: Arc::new(|rest: &[f64]| rest[0].abs().sqrt()), holder_k: 1.0, alpha: 0.5 },
                AlmostLevel { offset: Arc::new(|_: &[f64]| 0.25), holder_k: 0.0, alpha: 1.0 },
            ],
        };
        assert_eq!(t.apply(&[1.0, 4.0]).unwrap(), vec![3.0, 4.25]);
        let samples: Vec<Vec<f64>> = (0..10).map(|i| vec![0.0, i as f64 * 0.3]).collect();
        assert!(t.holder_excess(&samples).unwrap().iter().all(|&x| x <= 1e-12));
    }

    #[test]
    fn radial() {
        let ray: Vec<f64> = (0..10).map(f64::from).collect();
        let orbit = [0.5, 3.2, 8.9];
        let c = radial_certificate(&orbit, &ray, 1.0, abs).unwrap();
        assert!(c.holds && (c.max_distance - 0.5).abs() < 1e-12);
    }
}
