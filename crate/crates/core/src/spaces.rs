//! Negatively curved building blocks with their height functions: regular
//! trees `T_{m+1}`, the homogeneous spaces `G_Mbar` (the hyperbolic plane is
//! `G_[e]`), and millefeuille spaces `Z_{Mbar,m}`.
//!
//! Heights increase toward the distinguished end. A tree vertex at height `h`
//! is a ball of radius `m^h` in `Q_m`, written by its digits below position
//! `-h`; the anchor line is the set of balls containing 0.

use std::fmt;
use std::str::FromStr;

use crate::boundary::{BlockLayout, MAdic};
use crate::error::{Error, Result};
use crate::horoprod::FactorPoint;
use crate::spectral::{Block, SpectralSplit};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TreeVertex {
    m: u32,
    h: i64,
    /// Digits at positions `-h-len .. -h`, lowest first; `addr[0] != 0`.
    addr: Vec<u32>,
}

impl TreeVertex {
    pub fn new(m: u32, h: i64, mut addr: Vec<u32>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("branching must be positive".into()));
        }
        if let Some(&d) = addr.iter().find(|&&d| d >= m) {
            return Err(Error::MalformedCoordinates(format!("digit {d} out of range for branching {m}")));
        }
        let lead = addr.iter().take_while(|&&d| d == 0).count();
        addr.drain(..lead);
        Ok(TreeVertex { m, h, addr })
    }

    /// The vertex of the anchor line at height `h`.
    pub fn anchor(m: u32, h: i64) -> Self {
        TreeVertex { m, h, addr: vec![] }
    }

    pub fn height(&self) -> i64 {
        self.h
    }

    pub fn branching(&self) -> u32 {
        self.m
    }

    pub fn address(&self) -> &[u32] {
        &self.addr
    }

    fn lowest_position(&self) -> i64 {
        -self.h - self.addr.len() as i64
    }

    /// Digit at position `p < -h`.
    pub fn digit(&self, p: i64) -> u32 {
        debug_assert!(p < -self.h);
        let lo = self.lowest_position();
        if p < lo {
            0
        } else {
            self.addr[(p - lo) as usize]
        }
    }

    pub fn parent(&self) -> Self {
        let mut addr = self.addr.clone();
        addr.pop();
        TreeVertex { m: self.m, h: self.h + 1, addr }
    }

    pub fn child(&self, c: u32) -> Self {
        debug_assert!(c < self.m);
        if self.addr.is_empty() && c == 0 {
            return TreeVertex::anchor(self.m, self.h - 1);
        }
        let mut addr = self.addr.clone();
        addr.push(c);
        TreeVertex { m: self.m, h: self.h - 1, addr }
    }

    pub fn children(&self) -> Vec<Self> {
        (0..self.m).map(|c| self.child(c)).collect()
    }

    pub fn neighbors(&self) -> Vec<Self> {
        let mut out = vec![self.parent()];
        out.extend(self.children());
        out
    }

    /// Ancestor at height `h >= self.height()`.
    pub fn ancestor(&self, h: i64) -> Self {
        assert!(h >= self.h, "ancestor below the vertex");
        let keep = self.addr.len().saturating_sub((h - self.h) as usize);
        TreeVertex { m: self.m, h, addr: self.addr[..keep].to_vec() }
    }

    /// Translation along the anchor line by `k` levels. It is a tree
    /// automorphism; on the boundary it divides by `m^k`.
    pub fn shift(&self, k: i64) -> Self {
        TreeVertex { m: self.m, h: self.h + k, addr: self.addr.clone() }
    }

    /// Endpoint of the downward geodesic through this vertex that always
    /// takes digit 0.
    pub fn boundary_point(&self) -> MAdic {
        MAdic::new(self.m, self.lowest_position(), self.addr.clone(), None).expect("digits already validated")
    }
}

impl fmt::Display for TreeVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &d in &self.addr {
            write!(f, "{}", std::char::from_digit(d, 36).expect("digit below 36"))?;
        }
        write!(f, "@{}", self.h)
    }
}

/// Parses `digits@height`, digits lowest position first.
pub fn parse_tree_vertex(m: u32, s: &str) -> Result<TreeVertex> {
    let (body, h) = s.rsplit_once('@').ok_or_else(|| Error::Parse(format!("vertex {s:?} lacks '@'")))?;
    let h = i64::from_str(h.trim()).map_err(|e| Error::Parse(format!("height in {s:?}: {e}")))?;
    if m > 36 {
        return Err(Error::Parse(format!("branching {m} not supported by the literal syntax")));
    }
    let addr = body
        .trim()
        .chars()
        .map(|c| c.to_digit(m.max(2)).filter(|&d| d < m).ok_or_else(|| Error::Parse(format!("bad digit {c:?}"))))
        .collect::<Result<Vec<u32>>>()?;
    TreeVertex::new(m, h, addr)
}

/// Height at which the upward geodesics from `u` and `v` meet.
pub fn merge_height(u: &TreeVertex, v: &TreeVertex) -> Result<i64> {
    if u.m != v.m {
        return Err(Error::BranchingMismatch(u.m, v.m));
    }
    let top = u.h.max(v.h);
    let lo = u.lowest_position().min(v.lowest_position());
    let first_diff = (lo..-top).find(|&p| u.digit(p) != v.digit(p));
    Ok(first_diff.map_or(top, |p| -p))
}

pub fn tree_distance(u: &TreeVertex, v: &TreeVertex) -> Result<u64> {
    let t0 = merge_height(u, v)?;
    Ok((2 * t0 - u.h - v.h) as u64)
}

/// `d(x, ℓ(T)) - T` for the upward ray `ℓ` starting at `foot`; errors unless
/// the value at `T - 1` agrees.
pub fn horofunction_tree(x: &TreeVertex, foot: &TreeVertex, t: i64) -> Result<i64> {
    if t - 1 < foot.h {
        return Err(Error::TruncationTooSmall(t));
    }
    let at = |s: i64| -> Result<i64> { Ok(tree_distance(x, &foot.ancestor(s))? as i64 - s) };
    let (now, before) = (at(t)?, at(t - 1)?);
    if now != before {
        return Err(Error::TruncationTooSmall(t));
    }
    Ok(now)
}

/// Diagonal data of `G_Mbar`: entries of `Mbar` in `S`-order with their
/// eigen-exponent classes.
#[derive(Debug, Clone, PartialEq)]
pub struct GGeometry {
    pub diag: Vec<f64>,
    pub layout: BlockLayout,
}

impl GGeometry {
    /// `diag` must be ascending with entries > 1.
    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        if diag.is_empty() || diag.iter().any(|&x| x <= 1.0) || diag.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidArgument("diagonal must be ascending with entries > 1".into()));
        }
        Ok(GGeometry { diag: diag.to_vec(), layout: BlockLayout::from_diagonal(diag) })
    }

    pub fn from_split(split: &SpectralSplit, block: Block) -> Result<Self> {
        let diag = split.block_diag(block);
        if diag.is_empty() {
            return Err(Error::EmptyBlock);
        }
        Ok(GGeometry { diag, layout: BlockLayout::from_split(split, block)? })
    }

    /// The hyperbolic plane.
    pub fn hyperbolic_plane() -> Self {
        Self::from_diagonal(&[std::f64::consts::E]).expect("e > 1")
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }
}

/// Point `(v, t)` of `G_Mbar`, `v` in the `S`-adapted basis.
#[derive(Debug, Clone, PartialEq)]
pub struct GPoint {
    pub t: f64,
    pub v: Vec<f64>,
}

/// `‖diag^{-t} δ‖`; `diag` may have entries on either side of 1.
pub fn horospherical_norm(diag: &[f64], t: f64, delta: &[f64]) -> f64 {
    delta.iter().zip(diag).map(|(d, l)| (d * l.powf(-t)).powi(2)).sum::<f64>().sqrt()
}

pub fn horospherical_distance(p: &GPoint, q: &GPoint, geom: &GGeometry) -> Result<f64> {
    if (p.t - q.t).abs() > 1e-12 {
        return Err(Error::HeightMismatch(p.t, q.t));
    }
    check_dim(p, q, geom)?;
    let delta: Vec<f64> = p.v.iter().zip(&q.v).map(|(a, b)| a - b).collect();
    Ok(horospherical_norm(&geom.diag, p.t, &delta))
}

fn check_dim(p: &GPoint, q: &GPoint, geom: &GGeometry) -> Result<()> {
    if p.v.len() != geom.dim() || q.v.len() != geom.dim() {
        return Err(Error::MalformedCoordinates(format!(
            "expected {} coordinates, got {} and {}",
            geom.dim(),
            p.v.len(),
            q.v.len()
        )));
    }
    Ok(())
}

/// Height above which the vertical geodesics through `v` and `w` are
/// within unit horospherical distance, class by class.
fn g_merge_height(v: &[f64], w: &[f64], geom: &GGeometry) -> f64 {
    geom.layout
        .classes
        .iter()
        .zip(&geom.layout.alphas)
        .filter_map(|(class, alpha)| {
            let n = class.iter().map(|&i| (v[i] - w[i]).powi(2)).sum::<f64>().sqrt();
            (n > 0.0).then(|| n.ln() / alpha)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Coarse surrogate for the Riemannian distance: up from both points to the
/// merge height and back.
pub fn coarse_distance_g(p: &GPoint, q: &GPoint, geom: &GGeometry) -> Result<f64> {
    check_dim(p, q, geom)?;
    let b = p.t.max(q.t).max(g_merge_height(&p.v, &q.v, geom));
    Ok((b - p.t) + (b - q.t))
}

/// `d(p, ℓ(T)) - T` for the vertical line through `ray_v`, using the coarse
/// distance; errors unless the value at `T - 1` agrees.
pub fn horofunction_g(p: &GPoint, ray_v: &[f64], t: f64, geom: &GGeometry) -> Result<f64> {
    let at = |s: f64| -> Result<f64> { Ok(coarse_distance_g(p, &GPoint { t: s, v: ray_v.to_vec() }, geom)? - s) };
    let (now, before) = (at(t)?, at(t - 1.0)?);
    if (now - before).abs() > 1e-12 {
        return Err(Error::TruncationTooSmall(t.floor() as i64));
    }
    Ok(now)
}

/// Point of the millefeuille space: a tree vertex and a `G` coordinate
/// sharing the tree vertex's height.
#[derive(Debug, Clone, PartialEq)]
pub struct ZPoint {
    pub tree: TreeVertex,
    pub v: Vec<f64>,
}

impl ZPoint {
    pub fn height(&self) -> i64 {
        self.tree.height()
    }

    pub fn g_point(&self) -> GPoint {
        GPoint { t: self.tree.height() as f64, v: self.v.clone() }
    }
}

pub fn coarse_distance_z(p: &ZPoint, q: &ZPoint, geom: &GGeometry) -> Result<f64> {
    check_dim(&p.g_point(), &q.g_point(), geom)?;
    let b = (merge_height(&p.tree, &q.tree)? as f64).max(g_merge_height(&p.v, &q.v, geom));
    Ok((b - p.height() as f64) + (b - q.height() as f64))
}

/// Downward end of the vertical geodesic through a point.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryAddress {
    Tree(MAdic),
    Real(Vec<f64>),
    Product(Vec<f64>, MAdic),
}

pub fn vertical_geodesic(x: &FactorPoint) -> BoundaryAddress {
    match x {
        FactorPoint::Tree(v) => BoundaryAddress::Tree(v.boundary_point()),
        FactorPoint::G(p) => BoundaryAddress::Real(p.v.clone()),
        FactorPoint::Z(z) => BoundaryAddress::Product(z.v.clone(), z.tree.boundary_point()),
    }
}
