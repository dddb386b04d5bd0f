//! Finite-extension envelopes `H = Γ ⋊ Z/r`, the section `p(γ, f) = γ`, the
//! maps `q_h(γ) = p(hγ)`, and an empirical check of their coarse properties.

use std::collections::HashSet;
use std::fmt::{self, Display};
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::groups::{AbcGroup, AnyGroup, GeneratingSet, Group, Lamplighter, WordMetric};
use crate::qimaps::{fit_qi_constants, QiConstants};

type Auto<E> = Arc<dyn Fn(&E) -> E + Send + Sync>;

/// `Γ ⋊ Z/r` for an automorphism `φ` of `Γ` with `φ^r = 1`.
pub struct Envelope<G: Group> {
    pub base: G,
    pub order: u32,
    pub name: String,
    auto: Auto<G::Elem>,
}

/// Element `(γ, f)` of `Γ ⋊ Z/r`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HElem<E> {
    pub gamma: E,
    pub f: u32,
}

impl<E: Display> Display for HElem<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} * phi^{}", self.gamma, self.f)
    }
}

impl<G: Group> Envelope<G> {
    /// `Γ` itself.
    pub fn trivial(base: G) -> Self {
        Envelope { base, order: 1, name: "trivial".into(), auto: Arc::new(|g: &G::Elem| g.clone()) }
    }

    /// `Γ × Z/r`.
    pub fn direct(base: G, order: u32) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidArgument("extension order must be positive".into()));
        }
        Ok(Envelope { base, order, name: format!("x Z/{order}"), auto: Arc::new(|g: &G::Elem| g.clone()) })
    }

    /// `Γ ⋊_φ Z/r`; `φ^r = 1` is checked on `sample`.
    pub fn semidirect(
        base: G,
        order: u32,
        name: impl Into<String>,
        auto: impl Fn(&G::Elem) -> G::Elem + Send + Sync + 'static,
        sample: &[G::Elem],
    ) -> Result<Self> {
        let env = Envelope { base, order, name: name.into(), auto: Arc::new(auto) };
        for g in sample {
            if env.phi_pow(order, g) != *g {
                return Err(Error::InvalidArgument(format!("automorphism does not have order dividing {order}")));
            }
        }
        Ok(env)
    }

    pub fn phi_pow(&self, f: u32, g: &G::Elem) -> G::Elem {
        (0..f).fold(g.clone(), |acc, _| (self.auto)(&acc))
    }

    pub fn mul(&self, h: &HElem<G::Elem>, k: &HElem<G::Elem>) -> HElem<G::Elem> {
        HElem { gamma: self.base.mul(&h.gamma, &self.phi_pow(h.f, &k.gamma)), f: (h.f + k.f) % self.order }
    }

    pub fn embed(&self, g: &G::Elem) -> HElem<G::Elem> {
        HElem { gamma: g.clone(), f: 0 }
    }

    /// The section `p(γ, f) = γ`; `h ∈ p(h) E` with `E = {1} × Z/r`.
    pub fn section(&self, h: &HElem<G::Elem>) -> G::Elem {
        h.gamma.clone()
    }

    /// `q_h(γ) = p(h γ) = γ₀ φ^f(γ)`.
    pub fn q(&self, h: &HElem<G::Elem>, g: &G::Elem) -> G::Elem {
        self.section(&self.mul(h, &self.embed(g)))
    }

    /// The table `γ ↦ q_h(γ)` over the word ball of radius `r`.
    pub fn q_map(&self, h: &HElem<G::Elem>, r: u32) -> Result<Vec<(G::Elem, G::Elem)>> {
        let cap = crate::search::radius_cap(crate::groups::WORD_RADIUS_CAP);
        if r > cap {
            return Err(Error::RadiusExceeded(cap));
        }
        let metric = WordMetric::new(&self.base, r);
        Ok(metric.ball(r).into_iter().map(|(g, _)| (g.clone(), self.q(h, &g))).collect())
    }
}

/// One sampled `h`: fitted constants of `q_h`, its distance `B` from the
/// left translation by `p(h)`, and the largest cocycle defect
/// `d(q_{h h'}, q_h ∘ q_{h'})` over the sampled `h'`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FurmanRow {
    pub h: String,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub composition_defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma51Report {
    pub envelope: String,
    pub radius: u32,
    pub rows: Vec<FurmanRow>,
    /// Uniform constants: the maxima over all sampled `h`.
    pub uniform: QiConstants,
    /// `q_γ` equals left translation by `γ` on the ball, for every sampled `γ`.
    pub restriction_exact: bool,
    /// `max d(q_h(γ), γ)` over `h ∈ {1} × Z/r`.
    pub b: f64,
    pub defect_max: f64,
    /// `2 max_h d(q_h, L_{p(h)})`.
    pub defect_bound: f64,
}

impl Lemma51Report {
    pub fn defect_within_bound(&self) -> bool {
        self.defect_max <= self.defect_bound
    }
}

/// Runs the checks on the ball of radius `r`, sampling every `h = (γ₀, f)`
/// with `|γ₀| <= 2`.
pub fn verify_lemma_5_1<G>(env: &Envelope<G>, r: u32) -> Result<Lemma51Report>
where
    G: Group,
    G::Elem: Display,
{
    if r < 1 {
        return Err(Error::InvalidArgument("radius must be positive".into()));
    }
    let cap = crate::search::radius_cap(crate::groups::WORD_RADIUS_CAP);
    if 2 * r > cap {
        return Err(Error::RadiusExceeded(cap));
    }
    let reach = 2 * r + 4;
    let metric = WordMetric::new(&env.base, 2 * r);
    let dist = |x: &G::Elem, y: &G::Elem| -> Result<f64> { Ok(metric.distance_within(x, y, reach)? as f64) };
    let ball: Vec<G::Elem> = metric.ball(r).into_iter().map(|x| x.0).collect();
    let hs: Vec<HElem<G::Elem>> =
        metric.ball(2).into_iter().flat_map(|(g, _)| (0..env.order).map(move |f| HElem { gamma: g.clone(), f })).collect();

    let n = ball.len();
    let mut domain_pairs = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            domain_pairs.push(dist(&ball[i], &ball[j])?);
        }
    }

    // q_h = γ0 φ^f is φ^f followed by a left translation, so pair distances
    // and the covering radius depend only on f
    let mut per_f = Vec::with_capacity(env.order as usize);
    for f in 0..env.order {
        let twisted: Vec<G::Elem> = ball.iter().map(|g| env.phi_pow(f, g)).collect();
        let mut pairs = Vec::with_capacity(domain_pairs.len());
        let mut idx = 0;
        for i in 0..n {
            for j in i + 1..n {
                pairs.push((domain_pairs[idx], dist(&twisted[i], &twisted[j])?));
                idx += 1;
            }
        }
        let image_set: HashSet<G::Elem> = twisted.iter().cloned().collect();
        let mut surj = 0.0f64;
        for z in &ball {
            surj = surj.max(metric.distance_to_set(z, &image_set, reach)? as f64);
        }
        per_f.push(fit_qi_constants(&pairs, surj));
    }

    let mut rows = Vec::with_capacity(hs.len());
    let mut restriction_exact = true;
    let mut b_fiber = 0.0f64;
    for h in &hs {
        let image: Vec<G::Elem> = ball.iter().map(|g| env.q(h, g)).collect();
        let qi = per_f[h.f as usize];

        let p = env.section(h);
        let mut b = 0.0f64;
        for (g, img) in ball.iter().zip(&image) {
            let translated = env.base.mul(&p, g);
            b = b.max(dist(img, &translated)?);
            if h.f == 0 && *img != translated {
                restriction_exact = false;
            }
        }
        if h.gamma == env.base.identity() {
            b_fiber = b_fiber.max(b);
        }

        let mut defect = 0.0f64;
        for h2 in &hs {
            let hh = env.mul(h, h2);
            for g in &ball {
                defect = defect.max(dist(&env.q(&hh, g), &env.q(h, &env.q(h2, g)))?);
            }
        }
        rows.push(FurmanRow { h: h.to_string(), k: qi.k, c: qi.c, b, composition_defect: defect });
    }
    let uniform =
        QiConstants { k: rows.iter().map(|r| r.k).fold(1.0, f64::max), c: rows.iter().map(|r| r.c).fold(0.0, f64::max) };
    let defect_max = rows.iter().map(|r| r.composition_defect).fold(0.0, f64::max);
    let defect_bound = 2.0 * rows.iter().map(|r| r.b).fold(0.0, f64::max);
    Ok(Lemma51Report {
        envelope: env.name.clone(),
        radius: r,
        rows,
        uniform,
        restriction_exact,
        b: b_fiber,
        defect_max,
        defect_bound,
    })
}

/// Uniform constants at two radii, for the stability report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stability {
    pub radii: (u32, u32),
    pub constants: (QiConstants, QiConstants),
    /// `C` grew by at most 1 and `K` did not grow.
    pub stable: bool,
}

pub fn uniformity_stability<G>(env: &Envelope<G>, r1: u32, r2: u32) -> Result<Stability>
where
    G: Group,
    G::Elem: Display,
{
    let a = verify_lemma_5_1(env, r1)?.uniform;
    let b = verify_lemma_5_1(env, r2)?.uniform;
    Ok(Stability { radii: (r1, r2), constants: (a, b), stable: b.k <= a.k + 1e-9 && b.c <= a.c + 1.0 })
}

/// Envelope named on the command line.
pub enum AnyEnvelope {
    Abc(Envelope<AbcGroup>),
    Lamp(Envelope<Lamplighter>),
}

impl AnyEnvelope {
    /// `ext` is `none`, `z<r>` (direct product with `Z/r`) or `flip` (the
    /// lamplighter automorphism `t ↦ l t`, over the Diestel-Leader
    /// generators so that it is an isometry).
    pub fn parse(group: &str, ext: &str) -> Result<Self> {
        let group = AnyGroup::parse(group)?;
        let ext = ext.trim();
        let order = |s: &str| -> Result<u32> {
            s.parse().map_err(|_| Error::Parse(format!("extension {ext:?}: expected none, z<r> or flip")))
        };
        match (group, ext) {
            (AnyGroup::Abc(g), "none") => Ok(AnyEnvelope::Abc(Envelope::trivial(g))),
            (AnyGroup::Lamp(g), "none") => Ok(AnyEnvelope::Lamp(Envelope::trivial(g))),
            (AnyGroup::Abc(g), e) if e.starts_with('z') => Ok(AnyEnvelope::Abc(Envelope::direct(g, order(&e[1..])?)?)),
            (AnyGroup::Lamp(g), e) if e.starts_with('z') => Ok(AnyEnvelope::Lamp(Envelope::direct(g, order(&e[1..])?)?)),
            (AnyGroup::Lamp(g), "flip") => {
                let dl = Lamplighter::new(g.order(), GeneratingSet::DiestelLeader)?;
                let flipper = dl.clone();
                let sample: Vec<_> = WordMetric::new(&dl, 3).ball(3).into_iter().map(|x| x.0).collect();
                let q = dl.order();
                Ok(AnyEnvelope::Lamp(Envelope::semidirect(dl, q, "flip", move |g| flipper.flip(g), &sample)?))
            }
            (_, e) => Err(Error::Parse(format!("unsupported extension {e:?}"))),
        }
    }

    pub fn verify(&self, r: u32) -> Result<Lemma51Report> {
        match self {
            AnyEnvelope::Abc(e) => verify_lemma_5_1(e, r),
            AnyEnvelope::Lamp(e) => verify_lemma_5_1(e, r),
        }
    }

    pub fn stability(&self, r1: u32, r2: u32) -> Result<Stability> {
        match self {
            AnyEnvelope::Abc(e) => uniformity_stability(e, r1, r2),
            AnyEnvelope::Lamp(e) => uniformity_stability(e, r1, r2),
        }
    }
}
