use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::abc::{add, q, sub, to_f64, AbcElement, AbcGroup, QVec};
use super::bass_serre::BassSerre;
use super::Group;
use crate::boundary::{MAdic, Side};
use crate::error::{Error, Result};
use crate::horoprod::{FactorPoint, HPoint};
use crate::qimaps::{BoundarySimilarity, MadicSimilarity, RealSimilarity};
use crate::spaces::{tree_distance, GPoint, TreeVertex, ZPoint};
use crate::spectral::{self, Block, IntMatrix, SpectralSplit};

/// Default depth bound for tree addresses.
pub const DEFAULT_DEPTH: usize = 256;

/// Window of known digits used when an exact m-adic point is pushed
/// through the tree action.
pub const BOUNDARY_WINDOW: i64 = 48;

/// Point `(v, t, y)` of `X_Mbar`: `v` in the `S`-adapted basis, integral
/// height `t`, tree vertex `y` at height `-t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelPoint {
    pub t: i64,
    pub v: Vec<f64>,
    pub y: TreeVertex,
}

/// The same point with exact lattice coordinates `w = S v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactModelPoint {
    pub t: i64,
    pub w: QVec,
    pub y: TreeVertex,
}

/// `Γ_M` acting on `X_Mbar` and on its Bass-Serre tree.
#[derive(Debug, Clone)]
pub struct GammaAction {
    group: AbcGroup,
    split: SpectralSplit,
    tree: Arc<BassSerre>,
}

impl GammaAction {
    pub fn new(matrix: IntMatrix) -> Result<Self> {
        Self::with_depth(matrix, DEFAULT_DEPTH)
    }

    pub fn with_depth(matrix: IntMatrix, depth: usize) -> Result<Self> {
        let split = spectral::analyze(&matrix)?;
        let group = AbcGroup::new(matrix)?;
        let tree = Arc::new(BassSerre::new(group.clone(), depth)?);
        Ok(GammaAction { group, split, tree })
    }

    pub fn group(&self) -> &AbcGroup {
        &self.group
    }

    pub fn split(&self) -> &SpectralSplit {
        &self.split
    }

    pub fn tree(&self) -> &BassSerre {
        &self.tree
    }

    /// `S⁻¹ u` in floating point.
    fn adapted(&self, u: &[BigRational]) -> DVector<f64> {
        self.split.s_inv() * DVector::from_vec(to_f64(u))
    }

    /// `(k, u) = a^k b^u` sends `(v, t, y)` to `((Mbar P)^k (v + S⁻¹u), t + k, g·y)`.
    pub fn act_float(&self, g: &AbcElement, p: &ModelPoint) -> Result<ModelPoint> {
        if p.v.len() != self.split.dim() {
            return Err(Error::MalformedCoordinates(format!("expected {} coordinates", self.split.dim())));
        }
        let shifted = DVector::from_column_slice(&p.v) + self.adapted(&g.u);
        let v = self.split.mbar_p_power(g.k) * shifted;
        Ok(ModelPoint { t: p.t + g.k, v: v.iter().copied().collect(), y: self.tree.act(g, &p.y)? })
    }

    /// Exact action on lattice coordinates: `w ↦ M^k (w + u)`.
    pub fn act_exact(&self, g: &AbcElement, p: &ExactModelPoint) -> Result<ExactModelPoint> {
        if p.w.len() != self.group.rank() {
            return Err(Error::MalformedCoordinates(format!("expected {} coordinates", self.group.rank())));
        }
        Ok(ExactModelPoint { t: p.t + g.k, w: self.group.m_pow_apply(g.k, &add(&p.w, &g.u)), y: self.tree.act(g, &p.y)? })
    }

    pub fn to_float(&self, p: &ExactModelPoint) -> ModelPoint {
        ModelPoint { t: p.t, v: self.adapted(&p.w).iter().copied().collect(), y: p.y.clone() }
    }

    /// The point as an element of the horocyclic product.
    pub fn to_hpoint(&self, p: &ModelPoint) -> HPoint {
        let n1 = self.split.n1();
        let x1 = FactorPoint::G(GPoint { t: p.t as f64, v: p.v[..n1].to_vec() });
        let x2 = if self.split.n2() == 0 {
            FactorPoint::Tree(p.y.clone())
        } else {
            FactorPoint::Z(ZPoint { tree: p.y.clone(), v: p.v[n1..].to_vec() })
        };
        HPoint { x1, x2 }
    }

    /// Seeded sample points with small coordinates.
    pub fn sample_points(&self, count: usize, seed: u64) -> Result<Vec<ExactModelPoint>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.group.rank();
        let random_u = |rng: &mut ChaCha8Rng| -> QVec {
            let z: QVec = (0..n).map(|_| q(rng.random_range(-5..=5))).collect();
            let j = rng.random_range(0..=3);
            self.group.m_pow_apply(-j, &z)
        };
        (0..count)
            .map(|_| {
                let t = rng.random_range(-3..=3);
                let w = random_u(&mut rng);
                let tree_u = random_u(&mut rng);
                Ok(ExactModelPoint { t, w, y: self.tree.vertex_of(t, &tree_u)? })
            })
            .collect()
    }

    /// Applies the letters of `word` right to left, one generator at a time.
    fn apply_letters<P>(&self, word: &[AbcElement], p: &P, act: impl Fn(&AbcElement, &P) -> Result<P>) -> Result<P>
    where
        P: Clone,
    {
        word.iter().rev().try_fold(p.clone(), |acc, g| act(g, &acc))
    }

    /// Checks `a b_j a⁻¹ = φ_M(b_j)` and `b_i b_j = b_j b_i` as maps on the
    /// sample, separately on float, exact and tree coordinates.
    pub fn verify_relations(&self, samples: &[ExactModelPoint]) -> Result<RelationReport> {
        if samples.is_empty() {
            return Err(Error::InvalidArgument("need at least one sample point".into()));
        }
        let g = &self.group;
        let (a, a_inv) = (g.a(), g.inv(&g.a()));
        let mut relations: Vec<(String, Vec<AbcElement>, Vec<AbcElement>)> = Vec::new();
        for j in 0..g.rank() {
            let bj = g.b(j);
            let name = g.generators()[j + 1].0.clone();
            relations.push((format!("a {name} a^-1 = phi({name})"), vec![a.clone(), bj, a_inv.clone()], vec![g.phi_b(j)]));
        }
        for i in 0..g.rank() {
            for j in i + 1..g.rank() {
                let (bi, bj) = (g.b(i), g.b(j));
                let names = g.generators();
                relations.push((
                    format!("{} {} = {} {}", names[i + 1].0, names[j + 1].0, names[j + 1].0, names[i + 1].0),
                    vec![bi.clone(), bj.clone()],
                    vec![bj, bi],
                ));
            }
        }
        let mut rows = Vec::new();
        for (name, lhs, rhs) in relations {
            let (mut float_dev, mut exact_dev, mut tree_dev) = (0.0f64, 0.0f64, 0.0f64);
            for p in samples {
                let (l, r) = (
                    self.apply_letters(&lhs, p, |g, x| self.act_exact(g, x))?,
                    self.apply_letters(&rhs, p, |g, x| self.act_exact(g, x))?,
                );
                if l.w != r.w || l.t != r.t {
                    let diff = sub(&l.w, &r.w);
                    exact_dev = exact_dev.max(to_f64(&diff).iter().fold((l.t - r.t).abs() as f64, |m, x| m.max(x.abs())));
                }
                if l.y != r.y {
                    tree_dev = tree_dev.max(tree_distance(&l.y, &r.y)? as f64);
                }
                let pf = self.to_float(p);
                let (lf, rf) = (
                    self.apply_letters(&lhs, &pf, |g, x| self.act_float(g, x))?,
                    self.apply_letters(&rhs, &pf, |g, x| self.act_float(g, x))?,
                );
                let dev = lf.v.iter().zip(&rf.v).fold((lf.t - rf.t).abs() as f64, |m, (x, y)| m.max((x - y).abs()));
                float_dev = float_dev.max(dev);
            }
            for (kind, dev, tol) in [("float", float_dev, 1e-9), ("exact", exact_dev, 0.0), ("tree", tree_dev, 0.0)] {
                if dev > tol {
                    return Err(Error::RelationViolated { relation: format!("{name} ({kind})"), deviation: dev });
                }
                rows.push(RelationRow { relation: name.clone(), kind: kind.into(), max_deviation: dev });
            }
        }
        Ok(RelationReport { matrix: self.group.matrix().clone(), samples: samples.len(), rows })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationRow {
    pub relation: String,
    pub kind: String,
    pub max_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationReport {
    pub matrix: IntMatrix,
    pub samples: usize,
    pub rows: Vec<RelationRow>,
}

impl RelationReport {
    pub fn max_deviation(&self) -> f64 {
        self.rows.iter().map(|r| r.max_deviation).fold(0.0, f64::max)
    }
}

fn block_of(v: &DVector<f64>, range: std::ops::Range<usize>) -> Vec<f64> {
    v.iter().skip(range.start).take(range.len()).copied().collect()
}

/// The similarity `γ_{g,side}` induced on `∂_side X_Mbar`.
///
/// Side one is `R^{n1}` with `ξ ↦ Mbar1^k P1^k ξ + b`. Side two is
/// `R^{n2}` (scale exponent `-k` in `Mbar2`) times `Q_d` when `d > 1`, the
/// m-adic part being read off the Bass-Serre tree action.
pub fn boundary_action(action: &GammaAction, g: &AbcElement, side: Side) -> Result<BoundarySimilarity> {
    let split = action.split();
    let block = match side {
        Side::One => Block::Expanding,
        Side::Two => Block::Contracting,
    };
    let range = split.block_range(block);
    let real = if range.is_empty() {
        None
    } else {
        let pk = split.ortho_power(g.k as f64)?;
        let b = split.mbar_p_power(g.k) * action.adapted(&g.u);
        let diag = split.block_diag(block);
        let layout = crate::boundary::BlockLayout::from_split(split, block)?;
        Some(RealSimilarity {
            diag,
            layout,
            scale_exponent: match side {
                Side::One => g.k as f64,
                Side::Two => -g.k as f64,
            },
            orthogonal: pk.view((range.start, range.start), (range.len(), range.len())).into_owned(),
            translation: block_of(&b, range),
        })
    };
    let d = action.tree().branching();
    let madic = match side {
        Side::Two if d > 1 => {
            let tree = action.tree.clone();
            let g = g.clone();
            Some(MadicSimilarity::new(d, -g.k, move |y: &MAdic| {
                let top = y.valuation() + y.digits().len() as i64;
                let window = y.known_to().unwrap_or(top.max(0) + BOUNDARY_WINDOW);
                let w = tree.act(&g, &y.tree_vertex(-window)?)?;
                let len = w.address().len();
                MAdic::new(d, -w.height() - len as i64, w.address().to_vec(), Some(len))
            }))
        }
        _ => None,
    };
    Ok(BoundarySimilarity { real, madic })
}

/// A product of conjugates `a^s b_j^{±1} a^{-s}` and its translation.
#[derive(Debug, Clone, PartialEq)]
pub struct TranslationWord {
    pub element: AbcElement,
    pub word: String,
    pub translation: Vec<f64>,
    pub residual: f64,
}

impl fmt::Display for TranslationWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", if self.word.is_empty() { "1" } else { &self.word })
    }
}

fn conjugate_word(name: &str, s: i64, sign: i64) -> String {
    let letter = if sign > 0 { name.to_string() } else { format!("{name}^-1") };
    match s {
        0 => letter,
        1 => format!("a {letter} a^-1"),
        -1 => format!("a^-1 {letter} a"),
        _ => format!("a^{s} {letter} a^{}", -s),
    }
}

/// Greedy search for a product of conjugates `a^s b_j a^{-s}`, `|s| <= t_max`,
/// whose translation of `∂_side` is within `eps` of `target`.
pub fn dense_translation_sampler(
    action: &GammaAction,
    side: Side,
    target: &[f64],
    eps: f64,
    t_max: u32,
) -> Result<TranslationWord> {
    let split = action.split();
    let block = match side {
        Side::One => Block::Expanding,
        Side::Two => Block::Contracting,
    };
    if side == Side::Two && split.det() != 1 {
        return Err(Error::InvalidArgument("side-two translations need d = 1".into()));
    }
    let range = split.block_range(block);
    if target.len() != range.len() || range.is_empty() {
        return Err(Error::BlockMismatch);
    }
    if eps <= 0.0 {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    let g = action.group();
    let names = g.generators();
    let t_max = t_max as i64;
    let mut candidates: Vec<(Vec<f64>, AbcElement, String)> = Vec::new();
    for s in -t_max..=t_max {
        for j in 0..g.rank() {
            let u = g.m_pow_apply(s, &g.b(j).u);
            let c = block_of(&action.adapted(&u), range.clone());
            for sign in [1i64, -1] {
                let cu: QVec = u.iter().map(|x| x * q(sign)).collect();
                let cv = c.iter().map(|x| x * sign as f64).collect();
                candidates.push((cv, AbcElement { k: 0, u: cu }, conjugate_word(&names[j + 1].0, s, sign)));
            }
        }
    }
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut residual = target.to_vec();
    let mut element = g.identity();
    let mut words: Vec<String> = Vec::new();
    let budget = 64 + 4 * t_max as usize * g.rank();
    for _ in 0..budget {
        let r = norm(&residual);
        if r <= eps {
            break;
        }
        let best = candidates
            .iter()
            .map(|(c, e, w)| {
                let next: Vec<f64> = residual.iter().zip(c).map(|(a, b)| a - b).collect();
                (norm(&next), next, e, w)
            })
            .min_by(|a, b| a.0.total_cmp(&b.0));
        match best {
            Some((n, next, e, w)) if n < r => {
                residual = next;
                element = g.mul(&element, e);
                words.push(w.clone());
            }
            _ => break,
        }
    }
    let r = norm(&residual);
    if r > eps {
        return Err(Error::SearchBudgetExceeded(r));
    }
    let translation = block_of(&action.adapted(&element.u), range);
    Ok(TranslationWord { element, word: words.join(" "), translation, residual: r })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{madic_dist, BoundaryPoint};
    use crate::qimaps::{quasi_similarity_constants, SampledMap};
    use crate::spaces::horospherical_distance;
    use crate::spaces::GGeometry;

    fn act(m: IntMatrix) -> GammaAction {
        GammaAction::new(m).unwrap()
    }

    #[test]
    fn generator_examples() {
        let x = act(vec![vec![2]]);
        let g = x.group();
        let p = ModelPoint { t: 0, v: vec![0.0], y: TreeVertex::anchor(2, 0) };
        let ap = x.act_float(&g.a(), &p).unwrap();
        assert_eq!((ap.t, ap.y.height()), (1, -1));
        assert_eq!(ap.y, p.y.shift(-1));
        let q = ModelPoint { t: 2, v: vec![0.25], y: TreeVertex::anchor(2, -2) };
        let bq = x.act_float(&g.b(0), &q).unwrap();
        assert!((bq.v[0] - (0.25 + x.split().s_inv()[(0, 0)])).abs() < 1e-15);
        assert_eq!(x.act_float(&g.identity(), &q).unwrap(), q);
    }

    #[test]
    fn relations_hold() {
        for m in [vec![vec![2]], vec![vec![3]], vec![vec![2, 1], vec![1, 1]], vec![vec![2, 0], vec![0, 3]]] {
            let x = act(m);
            let pts = x.sample_points(100, 7).unwrap();
            let report = x.verify_relations(&pts).unwrap();
            assert!(report.max_deviation() <= 1e-9);
            for row in report.rows.iter().filter(|r| r.kind != "float") {
                assert_eq!(row.max_deviation, 0.0, "{row:?}");
            }
        }
    }

    #[test]
    fn action_law_and_heights() {
        let x = act(vec![vec![2, 1], vec![1, 1]]);
        let g = x.group();
        let pts = x.sample_points(20, 3).unwrap();
        let gens = g.symmetric_generators();
        for (i, p) in pts.iter().enumerate() {
            let u = &gens[i % gens.len()];
            let v = &gens[(i / gens.len() + 1) % gens.len()];
            let uv = g.mul(u, v);
            let lhs = x.act_exact(&uv, p).unwrap();
            let rhs = x.act_exact(u, &x.act_exact(v, p).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
            assert_eq!(lhs.t - p.t, uv.k);
        }
    }

    #[test]
    fn horospheres_are_preserved() {
        let x = act(vec![vec![2, 1], vec![1, 1]]);
        let geom = GGeometry::from_split(x.split(), Block::Expanding).unwrap();
        let pts = x.sample_points(10, 11).unwrap();
        let g = x.group();
        for w in pts.windows(2) {
            let (p, q) = (x.to_float(&w[0]), x.to_float(&at_height(&w[1], w[0].t)));
            let gp = |p: &ModelPoint| GPoint { t: p.t as f64, v: p.v[..1].to_vec() };
            let before = horospherical_distance(&gp(&p), &gp(&q), &geom).unwrap();
            for s in g.symmetric_generators() {
                let (p2, q2) = (x.act_float(&s, &p).unwrap(), x.act_float(&s, &q).unwrap());
                let after = horospherical_distance(&gp(&p2), &gp(&q2), &geom).unwrap();
                assert!((before - after).abs() <= 1e-9 * before.max(1.0));
            }
        }
    }

    fn at_height(p: &ExactModelPoint, t: i64) -> ExactModelPoint {
        ExactModelPoint { t, w: p.w.clone(), y: p.y.shift(p.t - t) }
    }

    #[test]
    fn bs12_boundary_maps() {
        let x = act(vec![vec![2]]);
        let g = x.group();
        let a1 = boundary_action(&x, &g.a(), Side::One).unwrap();
        let b1 = boundary_action(&x, &g.b(0), Side::One).unwrap();
        let s = x.split().s_inv()[(0, 0)];
        for xi in [-1.0, 0.0, 0.5, 3.0] {
            let p = BoundaryPoint::Real(vec![xi]);
            assert_eq!(a1.apply(&p).unwrap(), BoundaryPoint::Real(vec![2.0 * xi]));
            assert_eq!(b1.apply(&p).unwrap(), BoundaryPoint::Real(vec![xi + s]));
        }
        let id = boundary_action(&x, &g.identity(), Side::One).unwrap();
        assert_eq!(id.apply(&BoundaryPoint::Real(vec![0.7])).unwrap(), BoundaryPoint::Real(vec![0.7]));
    }

    #[test]
    fn bs12_side_two_scales_by_inverse_d() {
        let x = act(vec![vec![2]]);
        let g = x.group();
        let pts: Vec<MAdic> = [0i64, 1, 2, 3, 5, 12].iter().map(|&n| MAdic::from_i64(2, n)).collect();
        for (e, expect) in [(g.a(), 0.5), (g.b(0), 1.0), (g.inv(&g.a()), 2.0)] {
            let f = boundary_action(&x, &e, Side::Two).unwrap();
            let m = f.madic.clone().unwrap();
            let map = SampledMap::from_fn(pts.clone(), "g", |y| m.apply(y)).unwrap();
            let qs = quasi_similarity_constants(&map, madic_dist, madic_dist).unwrap();
            assert_eq!((qs.k, qs.s), (1.0, expect));
            assert_eq!(m.scale(), expect);
        }
    }

    #[test]
    fn dense_translations_bs12() {
        let x = act(vec![vec![2]]);
        let unit = x.split().s_inv()[(0, 0)];
        let zero = dense_translation_sampler(&x, Side::One, &[0.0], 0.1, 10).unwrap();
        assert!(zero.word.is_empty());
        let half = dense_translation_sampler(&x, Side::One, &[0.5 * unit], 0.1 * unit.abs(), 10).unwrap();
        assert_eq!(half.word, "a^-1 b a");
        let t = dense_translation_sampler(&x, Side::One, &[0.375 * unit], unit.abs() / 1024.0, 10).unwrap();
        assert!(t.residual <= unit.abs() / 1024.0);
        let far = dense_translation_sampler(&x, Side::One, &[unit / 3.0], 1e-12, 2);
        assert!(matches!(far, Err(Error::SearchBudgetExceeded(_))));
    }
}
