//! Breadth-first search helpers shared by the tree, Diestel-Leader and
//! Cayley-graph code. Neighbor relations are assumed symmetric.

use std::collections::HashMap;
use std::hash::Hash;

/// Search radius cap: `SOLVLAB_MAX_RADIUS` when set to an integer, else `default`.
pub fn radius_cap(default: u32) -> u32 {
    std::env::var("SOLVLAB_MAX_RADIUS").ok().and_then(|s| s.trim().parse().ok()).unwrap_or(default)
}

/// Every vertex within `radius` of `start` with its distance, in BFS order.
pub fn ball<V, F>(start: V, radius: u32, mut neighbors: F) -> Vec<(V, u32)>
where
    V: Clone + Eq + Hash,
    F: FnMut(&V) -> Vec<V>,
{
    let mut seen: HashMap<V, u32> = HashMap::new();
    seen.insert(start.clone(), 0);
    let mut out = vec![(start, 0)];
    let mut head = 0;
    while head < out.len() {
        let (v, d) = out[head].clone();
        head += 1;
        if d == radius {
            continue;
        }
        for w in neighbors(&v) {
            if !seen.contains_key(&w) {
                seen.insert(w.clone(), d + 1);
                out.push((w, d + 1));
            }
        }
    }
    out
}

/// Graph distance between `a` and `b` by bidirectional search, or `None`
/// when it exceeds `radius`.
pub fn bidirectional_distance<V, F>(a: &V, b: &V, radius: u32, mut neighbors: F) -> Option<u32>
where
    V: Clone + Eq + Hash,
    F: FnMut(&V) -> Vec<V>,
{
    if a == b {
        return Some(0);
    }
    let mut dist = [HashMap::new(), HashMap::new()];
    dist[0].insert(a.clone(), 0u32);
    dist[1].insert(b.clone(), 0u32);
    let mut frontier = [vec![a.clone()], vec![b.clone()]];
    let mut level = [0u32, 0u32];
    while level[0] + level[1] < radius {
        let side = if frontier[0].len() <= frontier[1].len() { 0 } else { 1 };
        let other = 1 - side;
        if frontier[side].is_empty() {
            return None;
        }
        let next_level = level[side] + 1;
        let mut next = Vec::new();
        let mut best: Option<u32> = None;
        for v in std::mem::take(&mut frontier[side]) {
            for w in neighbors(&v) {
                if dist[side].contains_key(&w) {
                    continue;
                }
                if let Some(&d) = dist[other].get(&w) {
                    let total = next_level + d;
                    best = Some(best.map_or(total, |b| b.min(total)));
                }
                dist[side].insert(w.clone(), next_level);
                next.push(w);
            }
        }
        if let Some(b) = best {
            return (b <= radius).then_some(b);
        }
        frontier[side] = next;
        level[side] = next_level;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: i64) -> impl FnMut(&i64) -> Vec<i64> {
        move |&v| vec![(v + 1).rem_euclid(n), (v - 1).rem_euclid(n)]
    }

    #[test]
    fn ball_on_cycle() {
        let b = ball(0i64, 2, cycle(10));
        assert_eq!(b.len(), 5);
        assert_eq!(b.iter().map(|x| x.1).max(), Some(2));
    }

    #[test]
    fn bidirectional_matches_ball() {
        for n in [7i64, 10] {
            let b = ball(0i64, 10, cycle(n));
            for (v, d) in b {
                assert_eq!(bidirectional_distance(&0, &v, 10, cycle(n)), Some(d));
            }
        }
        assert_eq!(bidirectional_distance(&0, &5, 4, cycle(10)), None);
    }
}
