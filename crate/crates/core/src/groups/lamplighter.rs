use std::collections::BTreeMap;
use std::fmt;

use super::Group;
use crate::error::{Error, Result};
use crate::horoprod::{dl_point, HPoint};
use crate::spaces::TreeVertex;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratingSet {
    /// Shift `t` and the lamp toggle `l` at the lamplighter's position.
    Standard,
    /// `l^a t` for every lamp value `a`; the Cayley graph is DL(q,q).
    DiestelLeader,
}

/// `Z/q ≀ Z` with elements `(pos, lamps)` and the law
/// `(p, f)(p', f') = (p + p', f + f'(· - p))`.
#[derive(Debug, Clone)]
pub struct Lamplighter {
    q: u32,
    set: GeneratingSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LampElement {
    pub pos: i64,
    /// Nonzero lamp values only.
    pub lamps: BTreeMap<i64, u32>,
}

impl LampElement {
    pub fn lamp(&self, x: i64) -> u32 {
        self.lamps.get(&x).copied().unwrap_or(0)
    }
}

impl fmt::Display for LampElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lamps: Vec<String> = self.lamps.iter().map(|(x, v)| format!("{x}:{v}")).collect();
        write!(f, "(pos {}, lamps {{{}}})", self.pos, lamps.join(" "))
    }
}

impl Lamplighter {
    pub fn new(q: u32, set: GeneratingSet) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidArgument("lamp group order must be at least 2".into()));
        }
        Ok(Lamplighter { q, set })
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    pub fn generating_set(&self) -> GeneratingSet {
        self.set
    }

    pub fn element(&self, pos: i64, lamps: impl IntoIterator<Item = (i64, u32)>) -> LampElement {
        let mut out = BTreeMap::new();
        for (x, v) in lamps {
            let v = v % self.q;
            if v != 0 {
                out.insert(x, v);
            }
        }
        LampElement { pos, lamps: out }
    }

    pub fn shift(&self) -> LampElement {
        self.element(1, [])
    }

    pub fn toggle(&self, a: u32) -> LampElement {
        self.element(0, [(0, a)])
    }

    /// Automorphism `t ↦ l t`, `l ↦ l`: adds one to every lamp between 0 and
    /// the position. It permutes the Diestel-Leader generators.
    pub fn flip(&self, g: &LampElement) -> LampElement {
        let range = if g.pos >= 0 { 0..g.pos } else { g.pos..0 };
        let mut lamps = g.lamps.clone();
        for x in range {
            let v = (lamps.get(&x).copied().unwrap_or(0) + 1) % self.q;
            if v == 0 {
                lamps.remove(&x);
            } else {
                lamps.insert(x, v);
            }
        }
        LampElement { pos: g.pos, lamps }
    }
}

impl Group for Lamplighter {
    type Elem = LampElement;

    fn identity(&self) -> LampElement {
        LampElement { pos: 0, lamps: BTreeMap::new() }
    }

    fn mul(&self, g: &LampElement, h: &LampElement) -> LampElement {
        let mut lamps = g.lamps.clone();
        for (&x, &v) in &h.lamps {
            let key = x + g.pos;
            let s = (lamps.get(&key).copied().unwrap_or(0) + v) % self.q;
            if s == 0 {
                lamps.remove(&key);
            } else {
                lamps.insert(key, s);
            }
        }
        LampElement { pos: g.pos + h.pos, lamps }
    }

    fn inv(&self, g: &LampElement) -> LampElement {
        self.element(-g.pos, g.lamps.iter().map(|(&x, &v)| (x - g.pos, self.q - v)))
    }

    fn generators(&self) -> Vec<(String, LampElement)> {
        match self.set {
            GeneratingSet::Standard => vec![("t".into(), self.shift()), ("l".into(), self.toggle(1))],
            GeneratingSet::DiestelLeader => {
                (0..self.q).map(|a| (format!("t{a}"), self.mul(&self.toggle(a), &self.shift()))).collect()
            }
        }
    }
}

/// The DL(q,q) vertex of a lamplighter element: the first tree records the
/// lamps left of the lamplighter (height `-pos`), the second the lamps at or
/// right of it (height `pos`).
pub fn lamp_to_dl(g: &LampElement, q: u32) -> HPoint {
    let p = g.pos;
    let left_lo = g.lamps.range(..p).next().map_or(p, |(&x, _)| x);
    let left: Vec<u32> = (left_lo..p).map(|x| g.lamp(x)).collect();
    let right_hi = g.lamps.range(p..).next_back().map_or(p - 1, |(&x, _)| x);
    let right: Vec<u32> = (p..=right_hi).rev().map(|x| g.lamp(x)).collect();
    let x1 = TreeVertex::new(q, -p, left).expect("lamp values below q");
    let x2 = TreeVertex::new(q, p, right).expect("lamp values below q");
    dl_point(x1, x2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::horoprod::dl_distance;

    #[test]
    fn laws() {
        let g = Lamplighter::new(3, GeneratingSet::Standard).unwrap();
        let x = g.parse_word("l t l^2 t^-3 l").unwrap();
        let y = g.parse_word("t^2 l t^-1").unwrap();
        assert_eq!(g.mul(&x, &g.inv(&x)), g.identity());
        assert_eq!(g.mul(&g.inv(&y), &y), g.identity());
        let z = g.parse_word("l^2 t^4").unwrap();
        assert_eq!(g.mul(&g.mul(&x, &y), &z), g.mul(&x, &g.mul(&y, &z)));
        assert_eq!(x.pos, -2);
    }

    #[test]
    fn flip_is_an_automorphism_permuting_dl_generators() {
        let g = Lamplighter::new(2, GeneratingSet::DiestelLeader).unwrap();
        let gens = g.generators();
        assert_eq!(g.flip(&gens[0].1), gens[1].1);
        assert_eq!(g.flip(&gens[1].1), gens[0].1);
        let x = g.parse_word("t1 t0^-3 t1").unwrap();
        let y = g.parse_word("t0^2 t1^-1").unwrap();
        assert_eq!(g.flip(&g.mul(&x, &y)), g.mul(&g.flip(&x), &g.flip(&y)));
        assert_eq!(g.flip(&g.flip(&x)), x);
    }

    #[test]
    fn dl_dictionary_generators_are_edges() {
        let g = Lamplighter::new(2, GeneratingSet::DiestelLeader).unwrap();
        let x = g.parse_word("t1 t0^-2 t1 t1").unwrap();
        let px = lamp_to_dl(&x, 2);
        for s in g.symmetric_generators() {
            let py = lamp_to_dl(&g.mul(&x, &s), 2);
            assert_eq!(dl_distance(&px, &py).unwrap(), 1);
        }
        assert_eq!(lamp_to_dl(&g.identity(), 2), dl_point(TreeVertex::anchor(2, 0), TreeVertex::anchor(2, 0)));
    }
}
