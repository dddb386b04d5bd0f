use num_rational::BigRational;
use num_traits::Zero;

use super::abc::{add, is_integral, mat_vec, q, sub, AbcElement, AbcGroup, QVec};
use crate::error::{Error, Result};
use crate::spaces::TreeVertex;

/// Action of `Γ_M` on its Bass-Serre tree `T_{d+1}`, `d = |det M|`.
///
/// Vertices are cosets `(k, u)·<b_1..b_n>`, i.e. pairs `(k, u mod Z^n)`, at
/// tree height `-k`. The parent of `(k, [u])` is `(k-1, [M u])` and its
/// children are `(k+1, [M⁻¹(u + r_c)])` for fixed representatives `r_c` of
/// `Z^n / M Z^n`, `r_0 = 0`. Addresses are read by climbing to the coset of
/// the identity's line and descending with those digits.
#[derive(Debug, Clone)]
pub struct BassSerre {
    group: AbcGroup,
    reps: Vec<QVec>,
    depth: usize,
}

impl BassSerre {
    pub fn new(group: AbcGroup, depth: usize) -> Result<Self> {
        let n = group.rank();
        let d = crate::poly::bareiss_det(group.matrix())?.unsigned_abs();
        // [0, d)^n meets every class because d Z^n ⊂ M Z^n.
        let mut reps: Vec<QVec> = Vec::new();
        let mut z = vec![0u64; n];
        loop {
            let cand: QVec = z.iter().map(|&x| q(x as i64)).collect();
            if !reps.iter().any(|r| is_integral(&mat_vec(group.m_inv(), &sub(&cand, r)))) {
                reps.push(cand);
            }
            if reps.len() as u64 == d {
                break;
            }
            let mut i = 0;
            loop {
                if i == n {
                    return Err(Error::Overflow);
                }
                z[i] += 1;
                if z[i] < d {
                    break;
                }
                z[i] = 0;
                i += 1;
            }
        }
        Ok(BassSerre { group, reps, depth })
    }

    pub fn branching(&self) -> u32 {
        self.reps.len() as u32
    }

    pub fn group(&self) -> &AbcGroup {
        &self.group
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Canonical tree vertex of the coset `(k, [u])`.
    pub fn vertex_of(&self, k: i64, u: &[BigRational]) -> Result<TreeVertex> {
        let mut powers = vec![u.to_vec()];
        while !is_integral(powers.last().expect("nonempty")) {
            if powers.len() > self.depth {
                return Err(Error::DepthExceeded(self.depth));
            }
            let next = mat_vec(self.group.m(), powers.last().expect("nonempty"));
            powers.push(next);
        }
        let j = powers.len() - 1;
        let mut rep = vec![BigRational::zero(); u.len()];
        let mut digits = Vec::with_capacity(j);
        for i in (1..=j).rev() {
            let z = sub(&powers[i], &rep);
            let c = (0..self.reps.len())
                .find(|&c| is_integral(&mat_vec(self.group.m_inv(), &sub(&z, &self.reps[c]))))
                .expect("representatives cover Z^n / M Z^n");
            rep = mat_vec(self.group.m_inv(), &add(&rep, &self.reps[c]));
            digits.push(c as u32);
        }
        TreeVertex::new(self.branching(), -k, digits)
    }

    /// Coset `(k, u)` of a tree vertex, with `u` the canonical representative.
    pub fn coset_of(&self, v: &TreeVertex) -> Result<(i64, QVec)> {
        if v.branching() != self.branching() {
            return Err(Error::BranchingMismatch(v.branching(), self.branching()));
        }
        let k = -v.height();
        let mut rep = vec![BigRational::zero(); self.group.rank()];
        for &c in v.address() {
            rep = mat_vec(self.group.m_inv(), &add(&rep, &self.reps[c as usize]));
        }
        Ok((k, rep))
    }

    /// Left multiplication `g · (k, [u]) = (k + k_g, [M^{-k} u_g + u])`.
    pub fn act(&self, g: &AbcElement, v: &TreeVertex) -> Result<TreeVertex> {
        let (k, u) = self.coset_of(v)?;
        let moved = add(&self.group.m_pow_apply(-k, &g.u), &u);
        self.vertex_of(k + g.k, &moved)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::Group;
    use crate::search;
    use crate::spaces::tree_distance;

    fn bs(n: i64) -> BassSerre {
        BassSerre::new(AbcGroup::new(vec![vec![n]]).unwrap(), 64).unwrap()
    }

    #[test]
    fn representatives() {
        assert_eq!(bs(2).branching(), 2);
        assert_eq!(bs(3).branching(), 3);
        let t = BassSerre::new(AbcGroup::new(vec![vec![2, 0], vec![0, 3]]).unwrap(), 64).unwrap();
        assert_eq!(t.branching(), 6);
        let sol = BassSerre::new(AbcGroup::new(vec![vec![2, 1], vec![1, 1]]).unwrap(), 64).unwrap();
        assert_eq!(sol.branching(), 1);
    }

    #[test]
    fn coset_round_trip() {
        let t = BassSerre::new(AbcGroup::new(vec![vec![2, 0], vec![0, 3]]).unwrap(), 64).unwrap();
        for (v, _) in search::ball(TreeVertex::anchor(6, 0), 3, |x| x.neighbors()) {
            let (k, u) = t.coset_of(&v).unwrap();
            assert_eq!(t.vertex_of(k, &u).unwrap(), v);
        }
    }

    #[test]
    fn generators_act_by_automorphisms() {
        for n in [2i64, 3] {
            let t = bs(n);
            let g = t.group().clone();
            let ball = search::ball(TreeVertex::anchor(n as u32, 0), 4, |x| x.neighbors());
            for s in g.symmetric_generators() {
                for (u, _) in &ball {
                    let su = t.act(&s, u).unwrap();
                    assert_eq!(su.height() - u.height(), -s.k);
                    for w in u.neighbors() {
                        assert_eq!(tree_distance(&su, &t.act(&s, &w).unwrap()).unwrap(), 1);
                    }
                }
            }
        }
    }

    #[test]
    fn a_is_the_anchor_shift() {
        let t = bs(2);
        let a = t.group().a();
        for (v, _) in search::ball(TreeVertex::anchor(2, 0), 4, |x| x.neighbors()) {
            assert_eq!(t.act(&a, &v).unwrap(), v.shift(-1));
        }
    }

    #[test]
    fn depth_bound() {
        let t = BassSerre::new(AbcGroup::new(vec![vec![2]]).unwrap(), 3).unwrap();
        let deep = AbcElement { k: 0, u: vec![BigRational::new(1.into(), 32.into())] };
        assert_eq!(t.vertex_of(0, &deep.u), Err(Error::DepthExceeded(3)));
    }
}
