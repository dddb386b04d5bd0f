//! Abelian-by-cyclic groups `Γ_M` (including `BS(1,n)`), lamplighters
//! `Z/q ≀ Z`, word metrics, and the actions of `Γ_M` on its model space,
//! Bass-Serre tree and boundaries.

mod abc;
mod action;
mod bass_serre;
mod lamplighter;

use std::collections::{HashMap, HashSet};
use std::fmt::Debug;
use std::hash::Hash;
use std::sync::OnceLock;

pub use abc::{AbcElement, AbcGroup};
pub use action::{
    boundary_action, dense_translation_sampler, ExactModelPoint, GammaAction, ModelPoint, RelationReport, RelationRow,
    TranslationWord,
};
pub use bass_serre::BassSerre;
pub use lamplighter::{lamp_to_dl, GeneratingSet, LampElement, Lamplighter};

use crate::error::{Error, Result};
use crate::search;

/// Default cap for word-length searches.
pub const WORD_RADIUS_CAP: u32 = 12;

pub trait Group {
    type Elem: Clone + Eq + Hash + Debug;

    fn identity(&self) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Self::Elem;
    /// Named generators, without inverses.
    fn generators(&self) -> Vec<(String, Self::Elem)>;

    /// Generators together with their inverses, duplicates removed.
    fn symmetric_generators(&self) -> Vec<Self::Elem> {
        let mut out: Vec<Self::Elem> = Vec::new();
        for (_, g) in self.generators() {
            for x in [g.clone(), self.inv(&g)] {
                if !out.contains(&x) {
                    out.push(x);
                }
            }
        }
        out
    }

    fn pow(&self, g: &Self::Elem, k: i64) -> Self::Elem {
        let base = if k < 0 { self.inv(g) } else { g.clone() };
        (0..k.unsigned_abs()).fold(self.identity(), |acc, _| self.mul(&acc, &base))
    }

    /// Parses whitespace-separated generator names with optional `^k`.
    fn parse_word(&self, word: &str) -> Result<Self::Elem> {
        let gens = self.generators();
        let mut acc = self.identity();
        for tok in word.split_whitespace() {
            let (name, exp) = match tok.split_once('^') {
                Some((n, e)) => (n, e.parse::<i64>().map_err(|e| Error::Parse(format!("exponent in {tok:?}: {e}")))?),
                None => (tok, 1),
            };
            let g = gens
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, g)| g)
                .ok_or_else(|| Error::Parse(format!("unknown generator {name:?}")))?;
            acc = self.mul(&acc, &self.pow(g, exp));
        }
        Ok(acc)
    }
}

/// Word metric of a group with respect to its symmetric generating set.
/// Distances inside the cached ball are table lookups; the ball is built on
/// first use and shared by later readers.
pub struct WordMetric<'g, G: Group> {
    group: &'g G,
    gens: Vec<G::Elem>,
    cache_radius: u32,
    ball: OnceLock<HashMap<G::Elem, u32>>,
}

impl<'g, G: Group> WordMetric<'g, G> {
    pub fn new(group: &'g G, cache_radius: u32) -> Self {
        WordMetric { group, gens: group.symmetric_generators(), cache_radius, ball: OnceLock::new() }
    }

    fn neighbors(&self, x: &G::Elem) -> Vec<G::Elem> {
        self.gens.iter().map(|s| self.group.mul(x, s)).collect()
    }

    fn cached(&self) -> &HashMap<G::Elem, u32> {
        self.ball
            .get_or_init(|| search::ball(self.group.identity(), self.cache_radius, |x| self.neighbors(x)).into_iter().collect())
    }

    /// Elements of the ball of radius `r <= cache_radius` in BFS order.
    pub fn ball(&self, r: u32) -> Vec<(G::Elem, u32)> {
        assert!(r <= self.cache_radius, "ball radius beyond the cache");
        search::ball(self.group.identity(), r, |x| self.neighbors(x))
    }

    /// Exact word length, searching at most `radius` (capped by
    /// `SOLVLAB_MAX_RADIUS` or [`WORD_RADIUS_CAP`]).
    pub fn word_length(&self, g: &G::Elem, radius: u32) -> Result<u32> {
        let cap = search::radius_cap(WORD_RADIUS_CAP);
        let radius = radius.min(cap);
        if let Some(&d) = self.cached().get(g) {
            return if d <= radius { Ok(d) } else { Err(Error::RadiusExceeded(radius)) };
        }
        if radius <= self.cache_radius {
            return Err(Error::RadiusExceeded(radius));
        }
        search::bidirectional_distance(&self.group.identity(), g, radius, |x| self.neighbors(x))
            .ok_or(Error::RadiusExceeded(radius))
    }

    /// `|x⁻¹ y|`.
    pub fn distance(&self, x: &G::Elem, y: &G::Elem) -> Result<u32> {
        if x == y {
            return Ok(0);
        }
        let g = self.group.mul(&self.group.inv(x), y);
        self.word_length(&g, search::radius_cap(WORD_RADIUS_CAP))
    }

    /// `|x⁻¹ y|` from the cached ball, falling back to a bidirectional search
    /// up to `radius` (not capped).
    pub fn distance_within(&self, x: &G::Elem, y: &G::Elem, radius: u32) -> Result<u32> {
        if x == y {
            return Ok(0);
        }
        let g = self.group.mul(&self.group.inv(x), y);
        if let Some(&d) = self.cached().get(&g) {
            return Ok(d);
        }
        if radius <= self.cache_radius {
            return Err(Error::RadiusExceeded(radius));
        }
        search::bidirectional_distance(&self.group.identity(), &g, radius, |x| self.neighbors(x))
            .ok_or(Error::RadiusExceeded(radius))
    }

    /// Distance from `x` to the nearest element of `targets`, by a
    /// breadth-first search that stops at the first hit.
    pub fn distance_to_set(&self, x: &G::Elem, targets: &HashSet<G::Elem>, radius: u32) -> Result<u32> {
        let mut seen: HashSet<G::Elem> = HashSet::from([x.clone()]);
        let mut frontier = vec![x.clone()];
        for d in 0..=radius {
            if frontier.iter().any(|v| targets.contains(v)) {
                return Ok(d);
            }
            let mut next = Vec::new();
            for v in &frontier {
                for w in self.neighbors(v) {
                    if seen.insert(w.clone()) {
                        next.push(w);
                    }
                }
            }
            frontier = next;
        }
        Err(Error::RadiusExceeded(radius))
    }

    /// Size of the cached ball.
    pub fn cached_len(&self) -> usize {
        self.cached().len()
    }
}

/// Group given on the command line: `bs:1,n`, `abc:[[..]]`, `ll:q` or `ll:q:dl`.
pub enum AnyGroup {
    Abc(AbcGroup),
    Lamp(Lamplighter),
}

impl AnyGroup {
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, rest) = s.split_once(':').ok_or_else(|| Error::Parse(format!("group spec {s:?}")))?;
        match head {
            "bs" => {
                let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
                match parts[..] {
                    ["1", n] => {
                        let n: i64 = n.parse().map_err(|e| Error::Parse(format!("{s:?}: {e}")))?;
                        Ok(AnyGroup::Abc(AbcGroup::new(vec![vec![n]])?))
                    }
                    _ => Err(Error::Parse(format!("expected bs:1,n, got {s:?}"))),
                }
            }
            "abc" => Ok(AnyGroup::Abc(AbcGroup::new(crate::spectral::parse_int_matrix(rest)?)?)),
            "ll" => {
                let (q, set) = match rest.split_once(':') {
                    Some((q, "dl")) => (q, GeneratingSet::DiestelLeader),
                    Some(_) => return Err(Error::Parse(format!("group spec {s:?}"))),
                    None => (rest, GeneratingSet::Standard),
                };
                let q: u32 = q.trim().parse().map_err(|e| Error::Parse(format!("{s:?}: {e}")))?;
                Ok(AnyGroup::Lamp(Lamplighter::new(q, set)?))
            }
            _ => Err(Error::Parse(format!("unknown group family {head:?}"))),
        }
    }

    /// Word length of a parsed word.
    pub fn word_length(&self, word: &str, radius: u32) -> Result<u32> {
        match self {
            AnyGroup::Abc(g) => WordMetric::new(g, 0).word_length(&g.parse_word(word)?, radius),
            AnyGroup::Lamp(g) => WordMetric::new(g, 0).word_length(&g.parse_word(word)?, radius),
        }
    }
}
