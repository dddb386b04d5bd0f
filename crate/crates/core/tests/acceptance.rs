use std::io::Write;
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use solvlab::boundary::{
    dm_metric, dm_metric_with_base, madic_dist, madic_dist_exponent, BlockLayout, BoundaryPoint, MAdic, Side,
};
use solvlab::cli::{run_suite, ExperimentConfig, Format, Suite};
use solvlab::furman::AnyEnvelope;
use solvlab::groups::{
    boundary_action, dense_translation_sampler, lamp_to_dl, GammaAction, GeneratingSet, Group, Lamplighter, WordMetric,
};
use solvlab::horoprod::{dl_ball, dl_distance};
use solvlab::modelcount::{admissible_exponents, common_base, index_identity_check, GraphOfGroupsDatum, IndexVerdict};
use solvlab::qimaps::{
    parse_rational, psi, quasi_similarity_constants, straightening_bound, uniform_iterate_check, IterateVerdict, SampledMap,
    StructuredPair,
};
use solvlab::spectral::{analyze, Block, IntMatrix};

type Check = Result<(), String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, witness: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(witness())
    }
}

fn lib<T>(r: solvlab::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn m(s: &str) -> IntMatrix {
    serde_json::from_str(s).unwrap()
}

fn random_madic(rng: &mut ChaCha8Rng, m: u32) -> MAdic {
    let val = rng.random_range(-3..=3);
    let len = rng.random_range(0..=8);
    MAdic::new(m, val, (0..len).map(|_| rng.random_range(0..m)).collect(), None).unwrap()
}

fn ultrametric() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for m in [2, 3, 4, 5] {
        for i in 0..10_000 {
            let [x, y, z] = [0; 3].map(|_| random_madic(&mut rng, m));
            let e = |a: &MAdic, b: &MAdic| lib(madic_dist_exponent(a, b)).map(|p| p.unwrap_or(i64::MAX));
            let (xy, yz, xz) = (e(&x, &y)?, e(&y, &z)?, e(&x, &z)?);
            ensure(xz >= xy.min(yz), || format!("m={m} triple {i}: {x} {y} {z}"))?;
            let d = |a: &MAdic, b: &MAdic| lib(madic_dist(a, b));
            ensure(d(&x, &z)? <= d(&x, &y)?.max(d(&y, &z)?), || format!("m={m} triple {i}: float distances"))?;
        }
    }
    Ok(())
}

fn square(a: &IntMatrix) -> IntMatrix {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * a[k][j]).sum()).collect()).collect()
}

fn dm_suite() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    for s in ["[[2,0],[0,3]]", "[[2,1],[1,1]]", "[[3]]"] {
        let split = lib(analyze(&m(s)))?;
        let split2 = lib(analyze(&square(&m(s))))?;
        for block in [Block::Expanding, Block::Contracting] {
            if split.block_range(block).is_empty() {
                continue;
            }
            let layout = lib(BlockLayout::from_split(&split, block))?;
            let layout2 = lib(BlockLayout::from_split(&split2, block))?;
            let n = layout.dim();
            let mut point = || lib(layout.split_vector(&(0..n).map(|_| rng.random_range(-3.0..3.0)).collect::<Vec<f64>>()));
            let pts: Vec<_> = (0..30_000).map(|_| point()).collect::<Result<_, _>>()?;
            for (i, t) in pts.chunks(3).enumerate() {
                let d = |a, b| lib(dm_metric(a, b, &layout));
                let (lhs, rhs) = (d(&t[0], &t[2])?, d(&t[0], &t[1])? + d(&t[1], &t[2])?);
                ensure(lhs <= rhs + 1e-9, || format!("{s} {block:?} triple {i}: {lhs} > {rhs}"))?;
            }
            let base = layout.alphas[0].exp();
            for (i, p) in pts[..2000].chunks(2).enumerate() {
                let lhs = lib(dm_metric_with_base(&p[0], &p[1], &layout2, base))?;
                let rhs = lib(dm_metric_with_base(&p[0], &p[1], &layout, base))?.sqrt();
                ensure((lhs - rhs).abs() <= 1e-9, || format!("{s} {block:?} pair {i}: {lhs} vs {rhs}"))?;
            }
        }
    }
    Ok(())
}

fn relations() -> Check {
    for s in ["[[2]]", "[[3]]", "[[2,1],[1,1]]", "[[2,0],[0,3]]"] {
        let action = lib(GammaAction::new(m(s)))?;
        let pts = lib(action.sample_points(100, 103))?;
        let report = lib(action.verify_relations(&pts))?;
        for r in &report.rows {
            let ok = if r.kind == "float" { r.max_deviation <= 1e-9 } else { r.max_deviation == 0.0 };
            ensure(ok, || format!("{s} {} ({}): {}", r.relation, r.kind, r.max_deviation))?;
        }
        ensure(report.rows.iter().any(|r| r.kind != "float"), || format!("{s}: no exact rows"))?;
    }
    Ok(())
}

fn cayley_dl() -> Check {
    let g = lib(Lamplighter::new(2, GeneratingSet::DiestelLeader))?;
    let origin = lamp_to_dl(&g.identity(), 2);
    let ball = WordMetric::new(&g, 6).ball(6);
    let dl = lib(dl_ball(&origin, 6))?;
    ensure(ball.len() == dl.len(), || format!("Cayley ball has {} elements, DL ball {}", ball.len(), dl.len()))?;
    for (e, len) in ball {
        let d = lib(dl_distance(&origin, &lamp_to_dl(&e, 2)))?;
        ensure(d == len, || format!("{e}: word length {len}, DL distance {d}"))?;
    }
    Ok(())
}

fn induced_similarities() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    for s in ["[[2]]", "[[2,1],[1,1]]"] {
        let action = lib(GammaAction::new(m(s)))?;
        let g = action.group();
        let split = action.split();
        let d = split.det();
        for (name, x) in g.generators().into_iter().flat_map(|(n, x)| [(n.clone(), x.clone()), (format!("{n}^-1"), g.inv(&x))]) {
            let c = x.k as f64;
            let mut exponents: Vec<(Side, f64)> = Vec::new();
            for (side, block, sign) in [(Side::One, Block::Expanding, 1.0), (Side::Two, Block::Contracting, -1.0)] {
                let f = lib(boundary_action(&action, &x, side))?;
                if let Some(r) = &f.real {
                    let pts: Vec<_> = (0..16)
                        .map(|_| BoundaryPoint::Real((0..r.dim()).map(|_| rng.random_range(-4.0..4.0)).collect()))
                        .collect();
                    let map = lib(SampledMap::from_fn(pts, name.clone(), |p| f.apply(p)))?;
                    let q = lib(quasi_similarity_constants(&map, |p, q| f.metric(p, q), |p, q| f.metric(p, q)))?;
                    let a = split.block_diag(block).into_iter().fold(f64::INFINITY, f64::min);
                    let expected = a.powf(sign * c);
                    ensure((q.k - 1.0).abs() <= 1e-6, || format!("{s} {name} {side:?}: K = {}", q.k))?;
                    ensure((q.s - expected).abs() <= 1e-6 * expected.max(1.0), || {
                        format!("{s} {name} {side:?}: scale {} vs {expected}", q.s)
                    })?;
                    exponents.push((side, r.scale_exponent));
                }
                if let Some(md) = &f.madic {
                    let pts: Vec<MAdic> = (-8..8).map(|v| MAdic::from_i64(d as u32, 5 * v + 1)).collect();
                    let map = lib(SampledMap::from_fn(pts, name.clone(), |y| md.apply(y)))?;
                    let q = lib(quasi_similarity_constants(&map, madic_dist, madic_dist))?;
                    let expected = (d as f64).powf(-c);
                    ensure((q.k - 1.0).abs() <= 1e-6, || format!("{s} {name} {side:?} m-adic: K = {}", q.k))?;
                    ensure((q.s - expected).abs() <= 1e-6 * expected.max(1.0), || {
                        format!("{s} {name} {side:?} m-adic: scale {} vs {expected}", q.s)
                    })?;
                    exponents.push((side, md.scale_exponent as f64));
                }
            }
            let one: Vec<f64> = exponents.iter().filter(|e| e.0 == Side::One).map(|e| e.1).collect();
            for (_, e) in exponents.iter().filter(|e| e.0 == Side::Two) {
                let sum = one[0] + e;
                ensure(sum.abs() <= 1e-12, || format!("{s} {name}: exponents sum to {sum}"))?;
            }
        }
    }
    Ok(())
}

fn iterate_detector() -> Check {
    let r = |s: &str| parse_rational(s).unwrap();
    let v = lib(uniform_iterate_check(&r("1"), &r("-0.9"), &r("5"), 10_000))?;
    ensure(v == IterateVerdict::ViolatedAt(101), || format!("(1, -0.9): {v:?}"))?;
    let v = lib(uniform_iterate_check(&r("1"), &r("-1"), &r("5"), 10_000))?;
    ensure(v == IterateVerdict::Compatible, || format!("(1, -1): {v:?}"))
}

fn furman() -> Check {
    for (group, ext) in [("bs:1,2", "z2"), ("ll:2", "flip"), ("bs:1,2", "none")] {
        let rep = lib(lib(AnyEnvelope::parse(group, ext))?.verify(6))?;
        let name = &rep.envelope;
        ensure(rep.uniform.k.is_finite() && rep.uniform.c.is_finite(), || format!("{name}: {:?}", rep.uniform))?;
        let covered = rep.rows.iter().all(|row| row.k <= rep.uniform.k && row.c <= rep.uniform.c);
        ensure(covered, || format!("{name}: a row exceeds the uniform constants"))?;
        ensure(rep.restriction_exact, || format!("{name}: restriction is not left translation"))?;
        ensure(rep.b.is_finite(), || format!("{name}: B = {}", rep.b))?;
        ensure(rep.defect_within_bound(), || format!("{name}: defect {} > {}", rep.defect_max, rep.defect_bound))?;
        if ext == "none" {
            let exact = rep.uniform.k == 1.0 && rep.uniform.c == 0.0 && rep.b == 0.0;
            ensure(exact, || format!("{name}: {:?}, B = {}", rep.uniform, rep.b))?;
        }
    }
    Ok(())
}

fn psi_homomorphism() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(108);
    let err = |x: &(DMatrix<f64>, Complex64), y: &(DMatrix<f64>, Complex64)| (&x.0 - &y.0).amax().max((x.1 - y.1).norm());
    for s in ["[[2,1],[1,1]]", "[[2,0],[0,3]]", "[[1,-1],[1,1]]", "[[2]]"] {
        let split = lib(analyze(&m(s)))?;
        for i in 0..50 {
            let mut pair = || lib(StructuredPair::from_power(&split, rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)));
            let (x, y) = (pair()?, pair()?);
            let (px, py) = (lib(psi(&x, &split))?, lib(psi(&y, &split))?);
            let e = err(&lib(psi(&x.compose(&y), &split))?, &(&px.0 * &py.0, px.1 * py.1));
            ensure(e <= 1e-9, || format!("{s} pair {i}: {e}"))?;
        }
        let a = lib(psi(&lib(StructuredPair::from_power(&split, 1.0, 1.0))?, &split))?;
        let e = err(&a, &(DMatrix::identity(split.dim(), split.dim()), Complex64::new(1.0, 0.0)));
        ensure(e <= 1e-9, || format!("{s}: psi(a) off by {e}"))?;
    }
    Ok(())
}

fn straightening() -> Check {
    let (k, alpha, xr, eps, n) = (1.5, 0.5, 1.0, 0.1, 1_000_000);
    for c in [-2.0, 0.0, 0.5, 7.0] {
        let rep = lib(straightening_bound(|_| c, k, alpha, xr, eps, n))?;
        ensure(rep.holds, || format!("constant {c}: {rep:?}"))?;
    }
    let rep = lib(straightening_bound(|x: f64| k * x.abs().powf(alpha).min(1.0), k, alpha, xr, eps, n))?;
    ensure(!rep.holds, || format!("Hölder witness passed: {rep:?}"))
}

fn model_count() -> Check {
    ensure(lib(common_base(4, 8))? == Some((2, 2, 3)), || "common_base(4, 8)".into())?;
    ensure(lib(common_base(2, 3))?.is_none(), || "common_base(2, 3)".into())?;
    let ks = lib(admissible_exponents(2, 5))?;
    ensure(ks == (1..=5).map(Ratio::from_integer).collect::<Vec<_>>(), || format!("admissible_exponents(2, 5) = {ks:?}"))?;
    let good = lib(index_identity_check(&GraphOfGroupsDatum { d: 4, e: 4, f: 2, g: 2 }))?;
    ensure(good == IndexVerdict::Consistent(4), || format!("consistent fixture: {good:?}"))?;
    let bad = lib(index_identity_check(&GraphOfGroupsDatum { d: 4, e: 8, f: 2, g: 2 }))?;
    ensure(matches!(bad, IndexVerdict::Inconsistent { .. }), || format!("inconsistent fixture: {bad:?}"))
}

fn dense_translations() -> Check {
    let action = lib(GammaAction::new(vec![vec![2]]))?;
    let unit = action.split().s_inv()[(0, 0)].abs();
    let eps = unit / 1024.0;
    for j in -2048..=2048 {
        let target = [unit * j as f64 / 1024.0];
        let w = lib(dense_translation_sampler(&action, Side::One, &target, eps, 10))?;
        ensure(w.residual <= eps, || format!("target {j}/1024: residual {}", w.residual))?;
    }
    Ok(())
}

fn determinism() -> Check {
    for suite in Suite::ALL {
        let config = ExperimentConfig::new(suite, 12);
        let (a, b) = (lib(run_suite(&config))?, lib(run_suite(&config))?);
        for format in [Format::Json, Format::Csv] {
            ensure(lib(a.render(format))? == lib(b.render(format))?, || format!("{suite} {format:?} differs between runs"))?;
        }
    }
    Ok(())
}

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 12] = [
        ("ultrametric", ultrametric),
        ("dm metric", dm_suite),
        ("relations", relations),
        ("cayley graph equals DL graph", cayley_dl),
        ("induced similarities", induced_similarities),
        ("iterate detector", iterate_detector),
        ("envelope quasi-action", furman),
        ("psi homomorphism", psi_homomorphism),
        ("straightening", straightening),
        ("model count arithmetic", model_count),
        ("dense translations", dense_translations),
        ("determinism", determinism),
    ];
    let mut failed = Vec::new();
    let mut err = std::io::stderr();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        // written straight to stderr so the lines survive output capture
        match &result {
            Ok(()) => writeln!(err, "PASS {:>2} {name} ({secs:.1}s)", i + 1),
            Err(w) => writeln!(err, "FAIL {:>2} {name} ({secs:.1}s): {w}", i + 1),
        }
        .unwrap();
        if result.is_err() {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
