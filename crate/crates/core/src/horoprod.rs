//! Horocyclic products `X₁ ×_h X₂` and the named model spaces Sol, DL(n,m),
//! `X_n` and `X_Mbar`.

use std::fmt;

use crate::boundary::MAdic;
use crate::error::{Error, Result};
use crate::search;
use crate::spaces::{coarse_distance_g, coarse_distance_z, tree_distance, GGeometry, GPoint, TreeVertex, ZPoint};
use crate::spectral::{self, Block, SpectralSplit};

/// Default cap for breadth-first searches in DL graphs.
pub const DL_RADIUS_CAP: u32 = 14;

#[derive(Debug, Clone, PartialEq)]
pub enum FactorPoint {
    Tree(TreeVertex),
    G(GPoint),
    Z(ZPoint),
}

impl FactorPoint {
    pub fn height(&self) -> f64 {
        match self {
            FactorPoint::Tree(v) => v.height() as f64,
            FactorPoint::G(p) => p.t,
            FactorPoint::Z(z) => z.height() as f64,
        }
    }
}

/// A point `(x1, x2)` with `h(x1) + h(x2) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct HPoint {
    pub x1: FactorPoint,
    pub x2: FactorPoint,
}

impl HPoint {
    pub fn height(&self) -> f64 {
        self.x1.height()
    }
}

/// Geometry of one factor of a horocyclic product.
#[derive(Debug, Clone, PartialEq)]
pub enum Factor {
    Tree(u32),
    G(GGeometry),
    Z(GGeometry, u32),
}

#[derive(Debug, Clone)]
pub enum ModelKind {
    Sol,
    Dl(u32, u32),
    Xn(u32),
    XMbar(Box<SpectralSplit>),
}

#[derive(Debug, Clone)]
pub struct ModelSpace {
    pub kind: ModelKind,
    pub factors: (Factor, Factor),
}

impl ModelSpace {
    pub fn sol() -> Self {
        let h2 = GGeometry::hyperbolic_plane();
        ModelSpace { kind: ModelKind::Sol, factors: (Factor::G(h2.clone()), Factor::G(h2)) }
    }

    pub fn dl(n: u32, m: u32) -> Result<Self> {
        if n < 1 || m < 1 {
            return Err(Error::InvalidArgument("DL branching numbers must be positive".into()));
        }
        Ok(ModelSpace { kind: ModelKind::Dl(n, m), factors: (Factor::Tree(n), Factor::Tree(m)) })
    }

    pub fn xn(n: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument("X_n needs n >= 2".into()));
        }
        let g = GGeometry::from_diagonal(&[n as f64])?;
        Ok(ModelSpace { kind: ModelKind::Xn(n), factors: (Factor::G(g), Factor::Tree(n)) })
    }

    pub fn xmbar(split: SpectralSplit) -> Result<Self> {
        let g1 = GGeometry::from_split(&split, Block::Expanding)?;
        let d = u32::try_from(split.det()).map_err(|_| Error::Overflow)?;
        let second =
            if split.n2() == 0 { Factor::Tree(d) } else { Factor::Z(GGeometry::from_split(&split, Block::Contracting)?, d) };
        Ok(ModelSpace { kind: ModelKind::XMbar(Box::new(split)), factors: (Factor::G(g1), second) })
    }

    /// Parses `sol`, `dl:n,m`, `xn:n` or `xmbar:[[..]]`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, rest) = s.split_once(':').unwrap_or((s, ""));
        let nums = || -> Result<Vec<u32>> {
            rest.split(',').map(|x| x.trim().parse::<u32>().map_err(|e| Error::Parse(format!("{s:?}: {e}")))).collect()
        };
        match head {
            "sol" => Ok(Self::sol()),
            "dl" => match nums()?[..] {
                [n, m] => Self::dl(n, m),
                _ => Err(Error::Parse(format!("expected dl:n,m, got {s:?}"))),
            },
            "xn" => match nums()?[..] {
                [n] => Self::xn(n),
                _ => Err(Error::Parse(format!("expected xn:n, got {s:?}"))),
            },
            "xmbar" => Self::xmbar(spectral::analyze(&spectral::parse_int_matrix(rest)?)?),
            _ => Err(Error::Parse(format!("unknown model space {s:?}"))),
        }
    }
}

impl fmt::Display for ModelSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ModelKind::Sol => write!(f, "sol"),
            ModelKind::Dl(n, m) => write!(f, "dl:{n},{m}"),
            ModelKind::Xn(n) => write!(f, "xn:{n}"),
            ModelKind::XMbar(s) => write!(f, "xmbar:{}", serde_json::to_string(s.matrix()).expect("matrix serializes")),
        }
    }
}

/// Input coordinates for [`make_point`].
#[derive(Debug, Clone, PartialEq)]
pub enum Coords {
    /// Explicit factor points.
    Factors(FactorPoint, FactorPoint),
    /// `(v, t, y)`: `v` in the `S`-adapted basis, height `t`, and a boundary
    /// point `y` whose geodesic fixes the tree coordinate at height `-t`.
    Vty { v: Vec<f64>, t: f64, y: Option<MAdic> },
}

fn check_factor(geom: &Factor, p: &FactorPoint) -> Result<()> {
    let ok = match (geom, p) {
        (Factor::Tree(m), FactorPoint::Tree(v)) => v.branching() == *m,
        (Factor::G(g), FactorPoint::G(x)) => x.v.len() == g.dim() && x.t.is_finite() && x.v.iter().all(|c| c.is_finite()),
        (Factor::Z(g, m), FactorPoint::Z(z)) => {
            z.tree.branching() == *m && z.v.len() == g.dim() && z.v.iter().all(|c| c.is_finite())
        }
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::MalformedCoordinates(format!("{p:?} does not fit factor {geom:?}")))
    }
}

fn integral_height(t: f64) -> Result<i64> {
    if t.fract() != 0.0 || !t.is_finite() {
        return Err(Error::MalformedCoordinates(format!("height {t} must be an integer with a tree factor")));
    }
    Ok(t as i64)
}

fn tree_at(m: u32, y: &Option<MAdic>, h: i64) -> Result<TreeVertex> {
    match y {
        Some(y) if y.base() != m => Err(Error::BaseMismatch(y.base(), m)),
        Some(y) => y.tree_vertex(h).map_err(|_| Error::MalformedCoordinates(format!("y not known down to height {h}"))),
        None => Ok(TreeVertex::anchor(m, h)),
    }
}

pub fn make_point(space: &ModelSpace, coords: &Coords) -> Result<HPoint> {
    let p = match coords {
        Coords::Factors(a, b) => HPoint { x1: a.clone(), x2: b.clone() },
        Coords::Vty { v, t, y } => {
            let (x1, x2) = match (&space.factors.0, &space.factors.1) {
                (Factor::G(g1), second) => {
                    let n1 = g1.dim();
                    if v.len() < n1 {
                        return Err(Error::MalformedCoordinates(format!("v has {} coordinates", v.len())));
                    }
                    let x1 = FactorPoint::G(GPoint { t: *t, v: v[..n1].to_vec() });
                    let x2 = match second {
                        Factor::G(_) => FactorPoint::G(GPoint { t: -*t, v: v[n1..].to_vec() }),
                        Factor::Tree(m) => {
                            if v.len() != n1 {
                                return Err(Error::MalformedCoordinates("extra coordinates".into()));
                            }
                            FactorPoint::Tree(tree_at(*m, y, -integral_height(*t)?)?)
                        }
                        Factor::Z(_, m) => {
                            FactorPoint::Z(ZPoint { tree: tree_at(*m, y, -integral_height(*t)?)?, v: v[n1..].to_vec() })
                        }
                    };
                    (x1, x2)
                }
                _ => return Err(Error::MalformedCoordinates("(v,t,y) coordinates need a G factor".into())),
            };
            HPoint { x1, x2 }
        }
    };
    check_factor(&space.factors.0, &p.x1)?;
    check_factor(&space.factors.1, &p.x2)?;
    let (h1, h2) = (p.x1.height(), p.x2.height());
    if (h1 + h2).abs() > 1e-12 {
        return Err(Error::HeightConstraintViolated(h1, h2));
    }
    Ok(p)
}

/// Inverse of [`make_point`] for spaces with `(v, t, y)` coordinates. The
/// tree coordinate is returned as the endpoint of its default geodesic.
pub fn coordinates(p: &HPoint) -> Result<Coords> {
    let (t, mut v) = match &p.x1 {
        FactorPoint::G(g) => (g.t, g.v.clone()),
        _ => return Err(Error::MalformedCoordinates("first factor is not G".into())),
    };
    let y = match &p.x2 {
        FactorPoint::G(g) => {
            v.extend(&g.v);
            None
        }
        FactorPoint::Tree(tv) => Some(tv.boundary_point()),
        FactorPoint::Z(z) => {
            v.extend(&z.v);
            Some(z.tree.boundary_point())
        }
    };
    Ok(Coords::Vty { v, t, y })
}

pub fn height(p: &HPoint) -> f64 {
    p.height()
}

type DlVertex = (TreeVertex, TreeVertex);

fn dl_vertex(p: &HPoint) -> Result<DlVertex> {
    match (&p.x1, &p.x2) {
        (FactorPoint::Tree(a), FactorPoint::Tree(b)) => Ok((a.clone(), b.clone())),
        _ => Err(Error::MalformedCoordinates("not a DL vertex".into())),
    }
}

/// DL edges: one coordinate steps down while the other steps up.
pub fn dl_neighbors(p: &DlVertex) -> Vec<DlVertex> {
    let (a, b) = p;
    let mut out = Vec::with_capacity((a.branching() + b.branching()) as usize);
    let (pa, pb) = (a.parent(), b.parent());
    for c in a.children() {
        out.push((c, pb.clone()));
    }
    for c in b.children() {
        out.push((pa.clone(), c));
    }
    out
}

pub fn dl_point(a: TreeVertex, b: TreeVertex) -> HPoint {
    HPoint { x1: FactorPoint::Tree(a), x2: FactorPoint::Tree(b) }
}

/// Exact graph distance in DL(n,m), searching up to the radius cap.
pub fn dl_distance(u: &HPoint, v: &HPoint) -> Result<u32> {
    dl_distance_within(u, v, search::radius_cap(DL_RADIUS_CAP))
}

pub fn dl_distance_within(u: &HPoint, v: &HPoint, radius: u32) -> Result<u32> {
    let (a, b) = (dl_vertex(u)?, dl_vertex(v)?);
    if a.0.branching() != b.0.branching() || a.1.branching() != b.1.branching() {
        return Err(Error::BranchingMismatch(a.0.branching(), b.0.branching()));
    }
    if a.0.height() + a.1.height() != 0 || b.0.height() + b.1.height() != 0 {
        return Err(Error::HeightConstraintViolated(a.0.height() as f64, a.1.height() as f64));
    }
    search::bidirectional_distance(&a, &b, radius, dl_neighbors).ok_or(Error::RadiusExceeded(radius))
}

/// Every DL vertex within `radius` of `center`, with distances.
pub fn dl_ball(center: &HPoint, radius: u32) -> Result<Vec<(HPoint, u32)>> {
    let cap = search::radius_cap(DL_RADIUS_CAP);
    if radius > cap {
        return Err(Error::RadiusExceeded(cap));
    }
    let c = dl_vertex(center)?;
    Ok(search::ball(c, radius, dl_neighbors).into_iter().map(|((a, b), d)| (dl_point(a, b), d)).collect())
}

fn factor_distance(geom: &Factor, p: &FactorPoint, q: &FactorPoint) -> Result<f64> {
    match (geom, p, q) {
        (Factor::Tree(_), FactorPoint::Tree(a), FactorPoint::Tree(b)) => Ok(tree_distance(a, b)? as f64),
        (Factor::G(g), FactorPoint::G(a), FactorPoint::G(b)) => coarse_distance_g(a, b, g),
        (Factor::Z(g, _), FactorPoint::Z(a), FactorPoint::Z(b)) => coarse_distance_z(a, b, g),
        _ => Err(Error::MalformedCoordinates("points do not belong to the space".into())),
    }
}

/// Sum of the factor distances (tree metric or coarse `G`/`Z` surrogate).
pub fn coarse_distance(space: &ModelSpace, u: &HPoint, v: &HPoint) -> Result<f64> {
    Ok(factor_distance(&space.factors.0, &u.x1, &v.x1)? + factor_distance(&space.factors.1, &u.x2, &v.x2)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::parse_tree_vertex;

    fn tv(m: u32, s: &str) -> TreeVertex {
        parse_tree_vertex(m, s).unwrap()
    }

    #[test]
    fn make_point_examples() {
        let sol = ModelSpace::sol();
        let p = make_point(&sol, &Coords::Vty { v: vec![0.0, 0.0], t: 0.0, y: None }).unwrap();
        assert_eq!(p.height(), 0.0);
        let dl = ModelSpace::dl(2, 2).unwrap();
        let ok = Coords::Factors(FactorPoint::Tree(tv(2, "1@3")), FactorPoint::Tree(tv(2, "@-3")));
        assert!(make_point(&dl, &ok).is_ok());
        let bad = Coords::Factors(FactorPoint::Tree(tv(2, "@3")), FactorPoint::Tree(tv(2, "@-2")));
        assert_eq!(make_point(&dl, &bad), Err(Error::HeightConstraintViolated(3.0, -2.0)));
        let wrong = Coords::Factors(FactorPoint::Tree(tv(3, "@0")), FactorPoint::Tree(tv(2, "@0")));
        assert!(matches!(make_point(&dl, &wrong), Err(Error::MalformedCoordinates(_))));
    }

    #[test]
    fn xmbar_coordinates_round_trip() {
        let x = ModelSpace::parse("xmbar:[[2,0],[0,3]]").unwrap();
        let y = MAdic::from_i64(6, 7);
        let c = Coords::Vty { v: vec![0.5, -1.0], t: -2.0, y: Some(y) };
        let p = make_point(&x, &c).unwrap();
        assert_eq!(p.height(), -2.0);
        assert_eq!(p.x2.height(), 2.0);
        let back = coordinates(&p).unwrap();
        assert_eq!(make_point(&x, &back).unwrap(), p);
        assert!(make_point(&x, &Coords::Vty { v: vec![0.5, -1.0], t: 0.5, y: None }).is_err());

        let sol_like = ModelSpace::parse("xmbar:[[2,1],[1,1]]").unwrap();
        let q = make_point(&sol_like, &Coords::Vty { v: vec![1.0, 2.0], t: 3.0, y: None }).unwrap();
        assert!(matches!(q.x2, FactorPoint::Z(_)));
        assert_eq!(make_point(&sol_like, &coordinates(&q).unwrap()).unwrap(), q);
    }

    #[test]
    fn dl_distance_examples() {
        let u = dl_point(tv(2, "@0"), tv(2, "@0"));
        assert_eq!(dl_distance(&u, &u).unwrap(), 0);
        let nbr = dl_neighbors(&(tv(2, "@0"), tv(2, "@0")));
        for (a, b) in nbr {
            assert_eq!(dl_distance(&u, &dl_point(a, b)).unwrap(), 1);
        }
        // same x1, x2 differ with merge two levels above
        let x2a = tv(2, "01@0");
        let x2b = tv(2, "11@0");
        let p = dl_point(tv(2, "@0"), x2a);
        let q = dl_point(tv(2, "@0"), x2b);
        assert_eq!(dl_distance(&p, &q).unwrap(), 4);
        let space = ModelSpace::dl(2, 2).unwrap();
        assert_eq!(coarse_distance(&space, &p, &q).unwrap(), 4.0);
    }

    #[test]
    fn dl_radius_cap() {
        let u = dl_point(tv(2, "@0"), tv(2, "@0"));
        let far = dl_point(tv(2, "@6"), tv(2, "1@-6"));
        assert_eq!(dl_distance_within(&u, &far, 5), Err(Error::RadiusExceeded(5)));
    }

    #[test]
    fn sol_coarse_distance() {
        let sol = ModelSpace::sol();
        let o = make_point(&sol, &Coords::Vty { v: vec![0.0, 0.0], t: 0.0, y: None }).unwrap();
        for t in [-3.0, 1.5, 4.0] {
            let p = make_point(&sol, &Coords::Vty { v: vec![0.0, 0.0], t, y: None }).unwrap();
            assert!((coarse_distance(&sol, &o, &p).unwrap() - 2.0 * f64::abs(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn coarse_brackets_bfs_on_dl_ball() {
        let space = ModelSpace::dl(2, 2).unwrap();
        let o = dl_point(tv(2, "@0"), tv(2, "@0"));
        for (p, d) in dl_ball(&o, 6).unwrap() {
            let c = coarse_distance(&space, &o, &p).unwrap();
            assert!(c <= 3.0 * d as f64 + 4.0 && d as f64 <= 3.0 * c + 4.0, "{p:?} bfs {d} coarse {c}");
        }
    }

    #[test]
    fn parse_and_display() {
        for s in ["sol", "dl:2,3", "xn:2", "xmbar:[[2,1],[1,1]]"] {
            assert_eq!(ModelSpace::parse(s).unwrap().to_string(), s);
        }
        assert!(ModelSpace::parse("dl:2").is_err());
        assert!(ModelSpace::parse("torus").is_err());
    }
}
