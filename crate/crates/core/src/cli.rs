//! Experiment suites behind `solvlab run`: seeded sampling, one table per
//! suite, and a failure record for every violated check.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::boundary::{dm_metric, dm_metric_with_base, madic_dist, madic_dist_exponent, BlockLayout, BoundaryPoint, MAdic, Side};
use crate::error::{Error, Result};
use crate::furman::AnyEnvelope;
use crate::groups::{
    boundary_action, dense_translation_sampler, lamp_to_dl, GammaAction, GeneratingSet, Group, Lamplighter, WordMetric,
};
use crate::horoprod::dl_distance;
use crate::modelcount::{admissible_exponents, common_base, index_identity_check, GraphOfGroupsDatum, IndexVerdict};
use crate::qimaps::{
    parse_rational, psi, quasi_similarity_constants, straightening_bound, uniform_iterate_check, IterateVerdict, SampledMap,
    StructuredPair,
};
use crate::spectral::{analyze, parse_int_matrix, Block, IntMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(Error::Parse(format!("unknown format {s:?}; expected json or csv"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    MetricAxioms,
    DmMetric,
    Relations,
    CayleyDl,
    BoundarySimilarity,
    Iterate,
    Furman,
    Psi,
    Straightening,
    Modelcount,
    Dense,
}

impl Suite {
    pub const ALL: [Suite; 11] = [
        Suite::MetricAxioms,
        Suite::DmMetric,
        Suite::Relations,
        Suite::CayleyDl,
        Suite::BoundarySimilarity,
        Suite::Iterate,
        Suite::Furman,
        Suite::Psi,
        Suite::Straightening,
        Suite::Modelcount,
        Suite::Dense,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::MetricAxioms => "metric-axioms",
            Suite::DmMetric => "dm-metric",
            Suite::Relations => "relations",
            Suite::CayleyDl => "cayley-dl",
            Suite::BoundarySimilarity => "boundary-similarity",
            Suite::Iterate => "iterate",
            Suite::Furman => "furman",
            Suite::Psi => "psi",
            Suite::Straightening => "straightening",
            Suite::Modelcount => "modelcount",
            Suite::Dense => "dense",
        }
    }

    fn module(self) -> &'static str {
        match self {
            Suite::MetricAxioms | Suite::DmMetric => "boundary",
            Suite::Relations | Suite::BoundarySimilarity | Suite::Dense => "groups",
            Suite::CayleyDl => "horoprod",
            Suite::Iterate | Suite::Psi | Suite::Straightening => "qimaps",
            Suite::Furman => "furman",
            Suite::Modelcount => "modelcount",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| Error::Parse(format!("unknown suite {s:?}")))
    }
}

/// Everything a suite run depends on. Unset parameters fall back to the
/// suite's default fixtures.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub suite: Suite,
    pub matrix: Option<String>,
    pub group: Option<String>,
    pub ext: Option<String>,
    /// Branching number or lamp count.
    pub m: Option<u32>,
    pub radius: Option<u32>,
    pub samples: Option<usize>,
    pub seed: u64,
    pub format: Format,
}

impl ExperimentConfig {
    pub fn new(suite: Suite, seed: u64) -> Self {
        ExperimentConfig {
            suite,
            matrix: None,
            group: None,
            ext: None,
            m: None,
            radius: None,
            samples: None,
            seed,
            format: Format::Json,
        }
    }

    fn matrices(&self, defaults: &[&str]) -> Result<Vec<IntMatrix>> {
        match &self.matrix {
            Some(m) => Ok(vec![parse_int_matrix(m)?]),
            None => defaults.iter().map(|m| parse_int_matrix(m)).collect(),
        }
    }
}

/// Machine-readable record of one failed check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureRecord {
    pub module: String,
    pub operation: String,
    pub witness: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::InvalidArgument(format!("csv: {e}"));
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(cell)).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(format!("csv: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::InvalidArgument(format!("csv: {e}")))
    }

    pub fn to_json_rows(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|r| Value::Object(self.columns.iter().cloned().zip(r.iter().cloned()).collect::<Map<_, _>>()))
                .collect(),
        )
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutcome {
    pub config: ExperimentConfig,
    pub table: Table,
    pub failures: Vec<FailureRecord>,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => self.table.to_csv(),
            Format::Json => {
                let doc = json!({
                    "suite": self.config.suite,
                    "seed": self.config.seed,
                    "passed": self.passed(),
                    "rows": self.table.to_json_rows(),
                    "failures": self.failures,
                });
                Ok(serde_json::to_string_pretty(&doc).expect("json values serialize") + "\n")
            }
        }
    }
}

struct Run {
    suite: Suite,
    table: Table,
    failures: Vec<FailureRecord>,
}

impl Run {
    fn new(suite: Suite, columns: &[&str]) -> Self {
        Run { suite, table: Table::new(columns), failures: Vec::new() }
    }

    fn check(&mut self, ok: bool, operation: &str, witness: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(FailureRecord {
                module: self.suite.module().into(),
                operation: operation.into(),
                witness: witness(),
            });
        }
    }
}

pub fn run_suite(config: &ExperimentConfig) -> Result<SuiteOutcome> {
    let run = match config.suite {
        Suite::MetricAxioms => metric_axioms(config)?,
        Suite::DmMetric => dm_suite(config)?,
        Suite::Relations => relations(config)?,
        Suite::CayleyDl => cayley_dl(config)?,
        Suite::BoundarySimilarity => boundary_similarity(config)?,
        Suite::Iterate => iterate(config)?,
        Suite::Furman => furman(config)?,
        Suite::Psi => psi_suite(config)?,
        Suite::Straightening => straightening(config)?,
        Suite::Modelcount => modelcount(config)?,
        Suite::Dense => dense(config)?,
    };
    Ok(SuiteOutcome { config: config.clone(), table: run.table, failures: run.failures })
}

fn matrix_label(m: &IntMatrix) -> String {
    serde_json::to_string(m).expect("matrix serializes")
}

fn random_madic(rng: &mut ChaCha8Rng, m: u32) -> Result<MAdic> {
    let val = rng.random_range(-2..=2);
    let len = rng.random_range(0..=6);
    let digits = (0..len).map(|_| rng.random_range(0..m)).collect();
    MAdic::new(m, val, digits, None)
}

fn metric_axioms(config: &ExperimentConfig) -> Result<Run> {
    let mut run = Run::new(config.suite, &["m", "index", "d_xy", "d_yz", "d_xz", "pass"]);
    let bases = config.m.map_or(vec![2, 3, 4, 5], |m| vec![m]);
    let n = config.samples.unwrap_or(10_000);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for m in bases {
        for i in 0..n {
            let [x, y, z] = [random_madic(&mut rng, m)?, random_madic(&mut rng, m)?, random_madic(&mut rng, m)?];
            // exact: a larger first-difference position means a smaller distance
            let key = |e: Option<i64>| e.unwrap_or(i64::MAX);
            let (exy, eyz, exz) = (madic_dist_exponent(&x, &y)?, madic_dist_exponent(&y, &z)?, madic_dist_exponent(&x, &z)?);
            let ok = key(exz) >= key(exy).min(key(eyz));
            run.table.push(vec![
                json!(m),
                json!(i),
                json!(madic_dist(&x, &y)?),
                json!(madic_dist(&y, &z)?),
                json!(madic_dist(&x, &z)?),
                json!(ok),
            ]);
            run.check(ok, "madic_dist", || format!("m={m} x={x} y={y} z={z}"));
        }
    }
    Ok(run)
}

fn square(m: &IntMatrix) -> IntMatrix {
    let n = m.len();
    (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| m[i][k] * m[k][j]).sum()).collect()).collect()
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize, r: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-r..=r)).collect()
}

fn dm_suite(config: &ExperimentConfig) -> Result<Run> {
    let mut run = Run::new(config.suite, &["matrix", "block", "check", "index", "lhs", "rhs", "pass"]);
    let triples = config.samples.unwrap_or(10_000);
    let pairs = (triples / 10).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for m in config.matrices(&["[[2,0],[0,3]]", "[[2,1],[1,1]]", "[[3]]"])? {
        let split = analyze(&m)?;
        let split2 = analyze(&square(&m))?;
        let label = matrix_label(&m);
        for block in [Block::Expanding, Block::Contracting] {
            if split.block_range(block).is_empty() {
                continue;
            }
            let layout = BlockLayout::from_split(&split, block)?;
            let n = layout.dim();
            let bname = format!("{block:?}").to_lowercase();
            for i in 0..triples {
                let pts: Vec<_> = (0..3).map(|_| layout.split_vector(&random_vec(&mut rng, n, 4.0))).collect::<Result<_>>()?;
                let lhs = dm_metric(&pts[0], &pts[2], &layout)?;
                let rhs = dm_metric(&pts[0], &pts[1], &layout)? + dm_metric(&pts[1], &pts[2], &layout)?;
                let ok = lhs <= rhs + 1e-9;
                run.table.push(vec![json!(label), json!(bname), json!("triangle"), json!(i), json!(lhs), json!(rhs), json!(ok)]);
                run.check(ok, "dm_metric", || format!("{label} {bname} triple {i}: {lhs} > {rhs}"));
            }
            let layout2 = BlockLayout::from_split(&split2, block)?;
            if layout2.classes != layout.classes {
                return Err(Error::BlockMismatch);
            }
            let base = layout.alphas[0].exp();
            for i in 0..pairs {
                let v = layout.split_vector(&random_vec(&mut rng, n, 4.0))?;
                let w = layout.split_vector(&random_vec(&mut rng, n, 4.0))?;
                let lhs = dm_metric_with_base(&v, &w, &layout2, base)?;
                let rhs = dm_metric_with_base(&v, &w, &layout, base)?.sqrt();
                let ok = (lhs - rhs).abs() <= 1e-9;
                run.table.push(vec![json!(label), json!(bname), json!("snowflake"), json!(i), json!(lhs), json!(rhs), json!(ok)]);
                run.check(ok, "dm_metric_with_base", || format!("{label} {bname} pair {i}: {lhs} vs {rhs}"));
            }
        }
    }
    Ok(run)
}

fn relations(config: &ExperimentConfig) -> Result<Run> {
    let mut run = Run::new(config.suite, &["matrix", "relation", "kind", "samples", "max_deviation", "pass"]);
    let n = config.samples.unwrap_or(100);
    for m in config.matrices(&["[[2]]", "[[3]]", "[[2,1],[1,1]]", "[[2,0],[0,3]]"])? {
        let label = matrix_label(&m);
        let action = GammaAction::new(m)?;
        let points = action.sample_points(n, config.seed)?;
        match action.verify_relations(&points) {
            Ok(report) => {
                for r in report.rows {
                    let ok = if r.kind == "float" { r.max_deviation <= 1e-9 } else { r.max_deviation == 0.0 };
                    run.table.push(vec![
                        json!(label),
                        json!(r.relation),
                        json!(r.kind),
                        json!(n),
                        json!(r.max_deviation),
                        json!(ok),
                    ]);
                    run.check(ok, "verify_relations", || {
                        format!("{label} {} ({}) deviates by {}", r.relation, r.kind, r.max_deviation)
                    });
                }
            }
            Err(Error::RelationViolated { relation, deviation }) => {
                run.table.push(vec![json!(label), json!(relation), json!("violated"), json!(n), json!(deviation), json!(false)]);
                run.check(false, "verify_relations", || format!("{label} {relation} deviates by {deviation}"));
            }
            Err(e) => return Err(e),
        }
    }
    Ok(run)
}

fn cayley_dl(config: &ExperimentConfig) -> Result<Run> {
    let mut run = Run::new(config.suite, &["element", "word_length", "dl_distance", "pass"]);
    let q = config.m.unwrap_or(2);
    let r = config.radius.unwrap_or(6);
    let g = Lamplighter::new(q, GeneratingSet::DiestelLeader)?;
    let origin = lamp_to_dl(&g.identity(), q);
    for (e, len) in WordMetric::new(&g, r).ball(r) {
        let d = dl_distance(&origin, &lamp_to_dl(&e, q))?;
        let ok = d == len;
        run.table.push(vec![json!(e.to_string()), json!(len), json!(d), json!(ok)]);
        run.check(ok, "dl_distance", || format!("{e}: word length {len}, DL distance {d}"));
    }
    Ok(run)
}

fn boundary_similarity(config: &ExperimentConfig) -> Result<Run> {
    let mut run = Run::new(
        config.suite,
        &["matrix", "generator", "side", "part", "scale_exponent", "K", "scale", "expected_scale", "exponent_sum", "pass"],
    );
    let n = config.samples.unwrap_or(12);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for m in config.matrices(&["[[2]]", "[[2,1],[1,1]]"])? {
        let label = matrix_label(&m);
        let action = GammaAction::new(m)?;
        let g = action.group();
        let split = action.split();
        let d = split.det();
        let mut gens = Vec::new();
        for (name, x) in g.generators() {
            let inv = g.inv(&x);
            gens.push((name.clone(), x));
            gens.push((format!("{name}^-1"), inv));
        }
        for (name, x) in gens {
            let k = x.k as f64;
            let mut rows = Vec::new();
            for side in [Side::One, Side::Two] {
                let f = boundary_action(&action, &x, side)?;
                if let Some(r) = &f.real {
                    let pts: Vec<BoundaryPoint> =
                        (0..n).map(|_| BoundaryPoint::Real(random_vec(&mut rng, r.dim(), 4.0))).collect();
                    let map = SampledMap::from_fn(pts, name.clone(), |p| f.apply(p))?;
                    let qs = quasi_similarity_constants(&map, |p, q| f.metric(p, q), |p, q| f.metric(p, q))?;
                    let block = if side == Side::One { Block::Expanding } else { Block::Contracting };
                    let base = split.block_diag(block).into_iter().fold(f64::INFINITY, f64::min);
                    let c = if side == Side::One { k } else { -k };
                    rows.push((side, "real", r.scale_exponent, qs.k, qs.s, base.powf(c)));
                }
                if let Some(md) = &f.madic {
                    let mut ints: Vec<i64> = Vec::new();
                    while ints.len() < n {
                        let v = rng.random_range(-64..=64);
                        if !ints.contains(&v) {
                            ints.push(v);
                        }
                    }
                    let pts: Vec<MAdic> = ints.iter().map(|&v| MAdic::from_i64(d as u32, v)).collect();
                    let map = SampledMap::from_fn(pts, name.clone(), |y| md.apply(y))?;
                    let qs = quasi_similarity_constants(&map, madic_dist, madic_dist)?;
                    rows.push((side, "madic", md.scale_exponent as f64, qs.k, qs.s, (d as f64).powf(-k)));
                }
            }
            let one: f64 = rows.iter().filter(|r| r.0 == Side::One).map(|r| r.2).next().unwrap_or(0.0);
            for (side, part, e, qk, s, expected) in rows {
                let similar = (qk - 1.0).abs() <= 1e-6 && (s - expected).abs() <= 1e-6 * expected.max(1.0);
                let sum = (side == Side::Two).then_some(one + e);
                let ok = similar && sum.is_none_or(|x| x.abs() <= 1e-12);
                let side_name = format!("{side:?}").to_lowercase();
                run.table.push(vec![
                    json!(label),
                    json!(name),
                    json!(side_name),
                    json!(part),
                    json!(e),
                    json!(qk),
                    json!(s),
                    json!(expected),
                    json!(sum),
                    json!(ok),
                ]);
                run.check(ok, "boundary_action", || {
                    format!("{label} {name} side {side_name} {part}: K={qk} s={s} expected {expected}, exponent sum {sum:?}")
                });
            }
        }
    }
    Ok(run)
}

fn verdict_label(v: &IterateVerdict) -> String {
    match v {
        IterateVerdict::Compatible => "compatible".into(),
        IterateVerdict::ViolatedAt(s) => format!("violated_at:{s}"),
    }
}

fn iterate(config: &ExperimentConfig) -> Result<Run> {
    let mut run = Run::new(config.suite, &["c1", "c2", "R", "verdict", "expected", "pass"]);
    let fixtures = [("1", "-0.9", "5", IterateVerdict::ViolatedAt(101)), ("1", "-1", "5", IterateVerdict::Compatible)];
    for (c1, c2, r, expected) in fixtures {
        let v = uniform_iterate_check(&parse_rational(c1)?, &parse_rational(c2)?, &parse_rational(r)?, 10_000)?;
        let ok = v == expected;
        run.table.push(vec![
            json!(c1),
            json!(c2),
            json!(r),
            json!(verdict_label(&v)),
            json!(verdict_label(&expected)),
            json!(ok),
        ]);
        run.check(ok, "uniform_iterate_check", || format!("({c1}, {c2}), R={r}: {}", verdict_label(&v)));
    }
    Ok(run)
}

fn furman(config: &ExperimentConfig) -> Result<Run> {
    let mut run = Run::new(config.suite, &["envelope", "h", "K", "C", "B", "composition_defect"]);
    let r = config.radius.unwrap_or(6);
    let envs: Vec<(String, String)> = match &config.group {
        Some(g) => vec![(g.clone(), config.ext.clone().unwrap_or_else(|| "none".into()))],
        None => {
            [("bs:1,2", "z2"), ("ll:2", "flip"), ("bs:1,2", "none")].iter().map(|(g, e)| (g.to_string(), e.to_string())).collect()
        }
    };
    for (group, ext) in envs {
        let report = AnyEnvelope::parse(&group, &ext)?.verify(r)?;
        for row in &report.rows {
            run.table.push(vec![
                json!(report.envelope),
                json!(row.h),
                json!(row.k),
                json!(row.c),
                json!(row.b),
                json!(row.composition_defect),
            ]);
        }
        let name = report.envelope.clone();
        let finite = report.uniform.k.is_finite() && report.uniform.c.is_finite() && report.b.is_finite();
        run.check(finite, "verify_lemma_5_1", || format!("{name}: constants not finite"));
        run.check(report.restriction_exact, "verify_lemma_5_1", || format!("{name}: q_g differs from left translation"));
        run.check(report.defect_within_bound(), "verify_lemma_5_1", || {
            format!("{name}: composition defect {} above {}", report.defect_max, report.defect_bound)
        });
        if ext == "none" {
            let exact = report.uniform.k == 1.0 && report.uniform.c == 0.0 && report.b == 0.0;
            run.check(exact, "verify_lemma_5_1", || {
                format!("{name}: trivial envelope gave {:?}, B={}", report.uniform, report.b)
            });
        }
    }
    Ok(run)
}

fn psi_error(x: &(DMatrix<f64>, Complex64), y: &(DMatrix<f64>, Complex64)) -> f64 {
    (&x.0 - &y.0).amax().max((x.1 - y.1).norm())
}

fn psi_suite(config: &ExperimentConfig) -> Result<Run> {
    let mut run = Run::new(config.suite, &["matrix", "check", "index", "error", "pass"]);
    let n = config.samples.unwrap_or(50);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for m in config.matrices(&["[[2,1],[1,1]]", "[[2,0],[0,3]]", "[[1,-1],[1,1]]"])? {
        let label = matrix_label(&m);
        let split = analyze(&m)?;
        let random_pair =
            |rng: &mut ChaCha8Rng| StructuredPair::from_power(&split, rng.random_range(-2.0..=2.0), rng.random_range(-2.0..=2.0));
        for i in 0..n {
            let (x, y) = (random_pair(&mut rng)?, random_pair(&mut rng)?);
            let (px, py) = (psi(&x, &split)?, psi(&y, &split)?);
            let err = psi_error(&psi(&x.compose(&y), &split)?, &(&px.0 * &py.0, px.1 * py.1));
            let ok = err <= 1e-9;
            run.table.push(vec![json!(label), json!("homomorphism"), json!(i), json!(err), json!(ok)]);
            run.check(ok, "psi", || format!("{label} pair {i}: error {err}"));
        }
        let a = psi(&StructuredPair::from_power(&split, 1.0, 1.0)?, &split)?;
        let err = psi_error(&a, &(DMatrix::identity(split.dim(), split.dim()), Complex64::new(1.0, 0.0)));
        let ok = err <= 1e-9;
        run.table.push(vec![json!(label), json!("generator a"), json!(0), json!(err), json!(ok)]);
        run.check(ok, "psi", || format!("{label}: psi(a) off identity by {err}"));
    }
    Ok(run)
}

fn straightening(config: &ExperimentConfig) -> Result<Run> {
    let mut run = Run::new(config.suite, &["witness", "bound", "empirical", "holds", "expected", "pass"]);
    let (k, alpha, xr, eps, n) = (1.5, 0.5, 1.0, 0.1, 1_000_000);
    let constant = straightening_bound(|_| 0.5, k, alpha, xr, eps, n)?;
    let holder = straightening_bound(|x: f64| k * x.abs().powf(alpha).min(1.0), k, alpha, xr, eps, n)?;
    for (name, rep, expected) in [("constant", constant, true), ("holder", holder, false)] {
        let ok = rep.holds == expected;
        run.table.push(vec![json!(name), json!(rep.bound), json!(rep.empirical), json!(rep.holds), json!(expected), json!(ok)]);
        run.check(ok, "straightening_bound", || {
            format!("{name}: holds={} bound={} empirical={}", rep.holds, rep.bound, rep.empirical)
        });
    }
    Ok(run)
}

fn modelcount(config: &ExperimentConfig) -> Result<Run> {
    let mut run = Run::new(config.suite, &["operation", "input", "output", "expected", "pass"]);
    let push = |run: &mut Run, op: &str, input: String, out: String, expected: &str| {
        let ok = out == expected;
        run.table.push(vec![json!(op), json!(input), json!(out), json!(expected), json!(ok)]);
        run.check(ok, op, || format!("{op}({input}) = {out}, expected {expected}"));
    };
    for (m, p, expected) in [(2, 2, "2,1,1"), (4, 8, "2,2,3"), (2, 3, "none")] {
        let out = match common_base(m, p)? {
            Some((r, i, j)) => format!("{r},{i},{j}"),
            None => "none".into(),
        };
        push(&mut run, "common_base", format!("{m},{p}"), out, expected);
    }
    for (d, kmax, expected) in [(2, 3, "1,2,3"), (6, 2, "1,2"), (2, 5, "1,2,3,4,5"), (4, 2, "error:proper_power")] {
        let out = match admissible_exponents(d, kmax) {
            Ok(ks) => ks.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(","),
            Err(Error::ProperPowerBase(_)) => "error:proper_power".into(),
            Err(e) => return Err(e),
        };
        push(&mut run, "admissible_exponents", format!("{d},{kmax}"), out, expected);
    }
    for ((d, e, f, g), expected) in
        [((4, 4, 2, 2), "consistent:4"), ((1, 1, 1, 1), "consistent:1"), ((4, 8, 2, 2), "inconsistent")]
    {
        let out = match index_identity_check(&GraphOfGroupsDatum { d, e, f, g })? {
            IndexVerdict::Consistent(x) => format!("consistent:{x}"),
            IndexVerdict::Inconsistent { .. } => "inconsistent".into(),
        };
        push(&mut run, "index_identity_check", format!("d={d},e={e},f={f},g={g}"), out, expected);
    }
    Ok(run)
}

fn dense(config: &ExperimentConfig) -> Result<Run> {
    let mut run = Run::new(config.suite, &["index", "target", "word", "residual", "eps", "pass"]);
    let n = config.samples.unwrap_or(20);
    let t_max = config.radius.unwrap_or(10);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let m = config.matrices(&["[[2]]"])?.remove(0);
    let action = GammaAction::new(m)?;
    let n1 = action.split().n1();
    // the translation of b_j in adapted coordinates is the unit of the lattice
    let unit: Vec<f64> = (0..n1).map(|i| action.split().s_inv()[(i, 0)]).collect();
    let scale = unit.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let eps = scale / 1024.0;
    for i in 0..n {
        let j = rng.random_range(0..=10u32);
        let den = 1i64 << j;
        let num = rng.random_range(-4 * den..=4 * den);
        let x = num as f64 / den as f64;
        let target: Vec<f64> = unit.iter().map(|u| x * u).collect();
        let r = num_rational::Ratio::new(num, den);
        let label = format!("{}/{}", r.numer(), r.denom());
        match dense_translation_sampler(&action, Side::One, &target, eps, t_max) {
            Ok(w) => {
                let ok = w.residual <= eps;
                run.table.push(vec![json!(i), json!(label), json!(w.to_string()), json!(w.residual), json!(eps), json!(ok)]);
                run.check(ok, "dense_translation_sampler", || format!("target {label}: residual {}", w.residual));
            }
            Err(Error::SearchBudgetExceeded(res)) => {
                run.table.push(vec![json!(i), json!(label), Value::Null, json!(res), json!(eps), json!(false)]);
                run.check(false, "dense_translation_sampler", || format!("target {label}: budget exceeded at residual {res}"));
            }
            Err(e) => return Err(e),
        }
    }
    Ok(run)
}
