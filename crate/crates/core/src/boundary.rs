//! Parabolic visual boundaries: m-adic numbers with their ultrametric, real
//! vectors under the eigen-blocked metric `D_Mbar`, and products of the two.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::horoprod::{FactorPoint, HPoint};
use crate::spaces::{vertical_geodesic, BoundaryAddress, TreeVertex};
use crate::spectral::{Block, SpectralSplit};

/// Digits kept when an exact value acquires an infinite expansion (negation).
pub const DEFAULT_PRECISION: usize = 64;

/// An m-adic number known on the positions below `known_to`.
///
/// `digits[0]` sits at position `val` and is nonzero unless the known part is
/// zero. Exact values (`known_to == None`) have only zero digits beyond the
/// stored ones.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MAdic {
    m: u32,
    val: i64,
    digits: Vec<u32>,
    known_to: Option<i64>,
}

impl MAdic {
    /// Builds a value from raw digits starting at position `val`. With
    /// `precision = Some(n)` only positions `val..val+n` are known.
    pub fn new(m: u32, val: i64, digits: Vec<u32>, precision: Option<usize>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("m-adic base must be positive".into()));
        }
        if let Some(&d) = digits.iter().find(|&&d| d >= m) {
            return Err(Error::InvalidArgument(format!("digit {d} out of range for base {m}")));
        }
        let known_to = precision.map(|n| val + n as i64);
        if let Some(k) = known_to {
            if (digits.len() as i64) > k - val {
                return Err(Error::InvalidArgument("more digits than precision".into()));
            }
        }
        Ok(Self::normalized(m, val, digits, known_to))
    }

    fn normalized(m: u32, mut val: i64, mut digits: Vec<u32>, known_to: Option<i64>) -> Self {
        let lead = digits.iter().take_while(|&&d| d == 0).count();
        digits.drain(..lead);
        val += lead as i64;
        while digits.last() == Some(&0) {
            digits.pop();
        }
        if digits.is_empty() {
            val = known_to.unwrap_or(0);
        }
        MAdic { m, val, digits, known_to }
    }

    pub fn zero(m: u32) -> Self {
        MAdic { m, val: 0, digits: vec![], known_to: None }
    }

    pub fn from_i64(m: u32, x: i64) -> Self {
        let mut digits = Vec::new();
        let mut r = x.unsigned_abs();
        while r > 0 {
            digits.push((r % m as u64) as u32);
            r /= m as u64;
        }
        let pos = Self::normalized(m, 0, digits, None);
        if x < 0 {
            pos.neg()
        } else {
            pos
        }
    }

    pub fn base(&self) -> u32 {
        self.m
    }

    /// Position of the lowest nonzero digit (for a known-zero value, the
    /// end of the window, or 0 when exact).
    pub fn valuation(&self) -> i64 {
        self.val
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    pub fn is_exact(&self) -> bool {
        self.known_to.is_none()
    }

    pub fn is_zero(&self) -> bool {
        self.digits.is_empty() && self.is_exact()
    }

    /// Exclusive upper end of the known window; `None` when exact.
    pub fn known_to(&self) -> Option<i64> {
        self.known_to
    }

    /// Number of known positions starting at the valuation.
    pub fn precision(&self) -> Option<usize> {
        self.known_to.map(|k| (k - self.val).max(0) as usize)
    }

    fn end(&self) -> i64 {
        self.val + self.digits.len() as i64
    }

    /// Digit at position `p`, or `None` beyond the known window.
    pub fn digit(&self, p: i64) -> Option<u32> {
        if self.known_to.is_some_and(|k| p >= k) {
            return None;
        }
        if p < self.val || p >= self.end() {
            return Some(0);
        }
        Some(self.digits[(p - self.val) as usize])
    }

    fn check_base(&self, other: &MAdic) -> Result<()> {
        if self.m != other.m {
            return Err(Error::BaseMismatch(self.m, other.m));
        }
        Ok(())
    }

    fn joint_window(&self, other: &MAdic) -> Option<i64> {
        match (self.known_to, other.known_to) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    fn lowest(&self, other: &MAdic) -> i64 {
        match (self.digits.is_empty(), other.digits.is_empty()) {
            (true, true) => self.val.min(other.val),
            (true, false) => other.val,
            (false, true) => self.val,
            (false, false) => self.val.min(other.val),
        }
    }

    pub fn add(&self, other: &MAdic) -> Result<MAdic> {
        self.check_base(other)?;
        let m = self.m as u64;
        let window = self.joint_window(other);
        let lo = self.lowest(other);
        let stop = window.unwrap_or(self.end().max(other.end()));
        let mut digits = Vec::new();
        let mut carry = 0u64;
        for p in lo..stop {
            let s = self.digit(p).unwrap_or(0) as u64 + other.digit(p).unwrap_or(0) as u64 + carry;
            digits.push((s % m) as u32);
            carry = s / m;
        }
        if window.is_none() && carry > 0 {
            digits.push(carry as u32);
        }
        Ok(Self::normalized(self.m, lo, digits, window))
    }

    pub fn sub(&self, other: &MAdic) -> Result<MAdic> {
        self.check_base(other)?;
        let m = self.m as i64;
        let mut window = self.joint_window(other);
        let lo = self.lowest(other);
        let stop = window.unwrap_or(self.end().max(other.end()));
        let mut digits = Vec::new();
        let mut borrow = 0i64;
        for p in lo..stop {
            let mut s = self.digit(p).unwrap_or(0) as i64 - other.digit(p).unwrap_or(0) as i64 - borrow;
            borrow = 0;
            if s < 0 {
                s += m;
                borrow = 1;
            }
            digits.push(s as u32);
        }
        if window.is_none() && borrow > 0 {
            // A negative finite expansion: the borrow propagates forever as m-1 digits.
            let end = stop + DEFAULT_PRECISION as i64;
            digits.extend(std::iter::repeat_n(self.m - 1, (end - stop) as usize));
            window = Some(end);
        }
        Ok(Self::normalized(self.m, lo, digits, window))
    }

    pub fn neg(&self) -> MAdic {
        MAdic::zero(self.m).sub(self).expect("same base")
    }

    /// Multiplication by `m^k`.
    pub fn shift(&self, k: i64) -> MAdic {
        MAdic { m: self.m, val: self.val + k, digits: self.digits.clone(), known_to: self.known_to.map(|w| w + k) }
    }

    /// Vertex at height `h` on the vertical geodesic ending at this point:
    /// the ball determined by the digits below position `-h`.
    pub fn tree_vertex(&self, h: i64) -> Result<TreeVertex> {
        if self.known_to.is_some_and(|k| k < -h) {
            return Err(Error::PrecisionExhausted);
        }
        let addr: Vec<u32> = (self.val.min(-h)..-h).map(|p| self.digit(p).unwrap_or(0)).collect();
        TreeVertex::new(self.m, h, addr)
    }
}

fn digit_char(d: u32) -> char {
    std::char::from_digit(d, 36).expect("digit below 36")
}

impl fmt::Display for MAdic {
    /// `digits@val`, least significant digit first; a trailing `...` marks
    /// a value known only on the printed window.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = match self.known_to {
            Some(k) => (self.val..k).map(|p| digit_char(self.digit(p).unwrap_or(0))).collect(),
            None => self.digits.iter().map(|&d| digit_char(d)).collect(),
        };
        let s = if s.is_empty() { "0".to_string() } else { s };
        let tail = if self.is_exact() { "" } else { "..." };
        write!(f, "{s}{tail}@{}", self.val)
    }
}

/// Parses `digits@val` (exact) or `digits...@val` (known on the given window)
/// in base `m`. Digits are base-36 characters, least significant first.
pub fn parse_madic(m: u32, s: &str) -> Result<MAdic> {
    let (body, val) = s.rsplit_once('@').ok_or_else(|| Error::Parse(format!("m-adic literal {s:?} lacks '@'")))?;
    let val = i64::from_str(val.trim()).map_err(|e| Error::Parse(format!("valuation in {s:?}: {e}")))?;
    let (body, exact) = match body.strip_suffix("...").or_else(|| body.strip_suffix('…')) {
        Some(b) => (b, false),
        None => (body, true),
    };
    if !(2..=36).contains(&m) {
        return Err(Error::Parse(format!("base {m} not supported by the literal syntax")));
    }
    let digits = body
        .chars()
        .map(|c| c.to_digit(m).ok_or_else(|| Error::Parse(format!("bad digit {c:?} for base {m}"))))
        .collect::<Result<Vec<u32>>>()?;
    let precision = (!exact).then_some(digits.len());
    MAdic::new(m, val, digits, precision)
}

/// Lowest position where `x` and `y` differ (`None` when exactly equal).
pub fn madic_dist_exponent(x: &MAdic, y: &MAdic) -> Result<Option<i64>> {
    x.check_base(y)?;
    let lo = x.lowest(y);
    let stop = x.joint_window(y).unwrap_or(x.end().max(y.end()));
    for p in lo..stop {
        if x.digit(p) != y.digit(p) {
            return Ok(Some(p));
        }
    }
    if x.is_exact() && y.is_exact() {
        Ok(None)
    } else {
        Err(Error::PrecisionExhausted)
    }
}

/// `m^{-v(x-y)}`, and 0 for equal exact values.
pub fn madic_dist(x: &MAdic, y: &MAdic) -> Result<f64> {
    Ok(match madic_dist_exponent(x, y)? {
        Some(p) => (x.m as f64).powf(-(p as f64)),
        None => 0.0,
    })
}

/// Eigen-class layout of one block of a split: which coordinates share an
/// exponent, and the exponents themselves (ascending).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockLayout {
    pub alphas: Vec<f64>,
    pub classes: Vec<Vec<usize>>,
}

impl BlockLayout {
    pub fn from_split(split: &SpectralSplit, block: Block) -> Result<Self> {
        let classes = split.classes(block);
        if classes.is_empty() {
            return Err(Error::EmptyBlock);
        }
        Ok(BlockLayout {
            alphas: classes.iter().map(|c| c.alpha).collect(),
            classes: classes.into_iter().map(|c| c.indices).collect(),
        })
    }

    /// Layout of a diagonal with entries > 1, sorted ascending.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut alphas: Vec<f64> = Vec::new();
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for (i, &x) in diag.iter().enumerate() {
            let a = x.ln();
            match alphas.last() {
                Some(&last) if (last - a).abs() <= 1e-9 * a.abs().max(1.0) => classes.last_mut().unwrap().push(i),
                _ => {
                    alphas.push(a);
                    classes.push(vec![i]);
                }
            }
        }
        BlockLayout { alphas, classes }
    }

    pub fn dim(&self) -> usize {
        self.classes.iter().map(Vec::len).sum()
    }

    pub fn split_vector(&self, v: &[f64]) -> Result<BlockVector> {
        if v.len() != self.dim() {
            return Err(Error::BlockMismatch);
        }
        Ok(BlockVector { blocks: self.classes.iter().map(|c| c.iter().map(|&i| v[i]).collect()).collect() })
    }
}

/// A real vector grouped by eigen-exponent class.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockVector {
    pub blocks: Vec<Vec<f64>>,
}

fn block_norms(v: &BlockVector, w: &BlockVector, layout: &BlockLayout) -> Result<Vec<f64>> {
    if v.blocks.len() != layout.alphas.len() || w.blocks.len() != layout.alphas.len() {
        return Err(Error::BlockMismatch);
    }
    v.blocks
        .iter()
        .zip(&w.blocks)
        .zip(&layout.classes)
        .map(|((a, b), c)| {
            if a.len() != c.len() || b.len() != c.len() {
                return Err(Error::BlockMismatch);
            }
            Ok(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
        })
        .collect()
}

/// `max_i |Δx_i|^{α₁/α_i}`.
pub fn dm_metric(v: &BlockVector, w: &BlockVector, layout: &BlockLayout) -> Result<f64> {
    let norms = block_norms(v, w, layout)?;
    let a1 = layout.alphas[0];
    Ok(norms.iter().zip(&layout.alphas).map(|(n, a)| n.powf(a1 / a)).fold(0.0, f64::max))
}

/// `max_i |Δx_i|^{ln(base)/α_i}`: the same metric snowflaked to a fixed base,
/// so that raising the matrix to a power shows up in the exponent.
pub fn dm_metric_with_base(v: &BlockVector, w: &BlockVector, layout: &BlockLayout, base: f64) -> Result<f64> {
    let norms = block_norms(v, w, layout)?;
    let lb = base.ln();
    Ok(norms.iter().zip(&layout.alphas).map(|(n, a)| n.powf(lb / a)).fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductBoundaryPoint {
    pub x: BlockVector,
    pub y: MAdic,
}

/// `max(D_Mbar(Δx), |Δy|_m)`.
pub fn product_metric(p: &ProductBoundaryPoint, q: &ProductBoundaryPoint, layout: &BlockLayout) -> Result<f64> {
    Ok(dm_metric(&p.x, &q.x, layout)?.max(madic_dist(&p.y, &q.y)?))
}

/// Visual metric `a^{t₀}` between two downward ends of a tree, `t₀` being the
/// lowest height where the geodesics are within `eps` of each other.
pub fn visual_metric_tree(x: &MAdic, y: &MAdic, a: f64, eps: f64) -> Result<f64> {
    match madic_dist_exponent(x, y)? {
        None => Ok(0.0),
        Some(p) => Ok(a.powf(-(p as f64) - eps / 2.0)),
    }
}

/// Visual metric in `G_Mbar` between the vertical geodesics with frozen
/// coordinates `x` and `y`; `diag` holds the (> 1) diagonal of `Mbar`.
pub fn visual_metric_g(x: &[f64], y: &[f64], diag: &[f64], a: f64, eps: f64) -> Result<f64> {
    if x.len() != diag.len() || y.len() != diag.len() {
        return Err(Error::BlockMismatch);
    }
    let delta: Vec<f64> = x.iter().zip(y).map(|(p, q)| p - q).collect();
    if delta.iter().all(|&d| d == 0.0) {
        return Ok(0.0);
    }
    if eps <= 0.0 {
        return Err(Error::NotComparable);
    }
    let at = |t: f64| -> f64 { delta.iter().zip(diag).map(|(d, l)| (d * l.powf(-t)).powi(2)).sum::<f64>().sqrt() };
    let t0 = if diag.iter().all(|&l| l == diag[0]) {
        (at(0.0) / eps).ln() / diag[0].ln()
    } else {
        let (mut lo, mut hi) = (-1.0f64, 1.0f64);
        while at(lo) <= eps {
            lo *= 2.0;
        }
        while at(hi) > eps {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if at(mid) > eps {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    };
    Ok(a.powf(t0))
}

/// A point of a parabolic visual boundary.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryPoint {
    Real(Vec<f64>),
    MAdic(MAdic),
    Product(Vec<f64>, MAdic),
}

impl From<BoundaryAddress> for BoundaryPoint {
    fn from(a: BoundaryAddress) -> Self {
        match a {
            BoundaryAddress::Tree(y) => BoundaryPoint::MAdic(y),
            BoundaryAddress::Real(v) => BoundaryPoint::Real(v),
            BoundaryAddress::Product(v, y) => BoundaryPoint::Product(v, y),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    One,
    Two,
}

/// Class in `∂_side` of the vertical geodesic through `p`: the parabolic
/// boundary point of that factor's vertical geodesic.
pub fn horo_boundary_class(p: &HPoint, side: Side) -> BoundaryPoint {
    let factor: &FactorPoint = match side {
        Side::One => &p.x1,
        Side::Two => &p.x2,
    };
    vertical_geodesic(factor).into()
}
