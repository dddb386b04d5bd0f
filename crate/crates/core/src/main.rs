use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use solvlab::boundary::{dm_metric, madic_dist, parse_madic, BlockLayout, MAdic};
use solvlab::cli::{run_suite, ExperimentConfig, FailureRecord, Format, Suite, Table};
use solvlab::furman::AnyEnvelope;
use solvlab::groups::{AnyGroup, GammaAction};
use solvlab::horoprod::{coarse_distance, dl_distance, make_point, Coords, Factor, FactorPoint, HPoint, ModelKind, ModelSpace};
use solvlab::modelcount::{admissible_exponents, common_base, index_identity_check, GraphOfGroupsDatum, IndexVerdict};
use solvlab::qimaps::{fit_qi_constants, parse_rational, uniform_iterate_check, IterateVerdict};
use solvlab::spaces::{coarse_distance_g, horospherical_distance, parse_tree_vertex, tree_distance, GGeometry, GPoint};
use solvlab::spectral::{analyze, parse_int_matrix, Block};
use solvlab::{Error, Result};

/// Model geometries, boundaries and group actions of solvable groups.
#[derive(Parser)]
#[command(name = "solvlab", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// json or csv.
    #[arg(long, global = true, default_value = "json")]
    format: Format,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Absolute Jordan data of an integer matrix.
    Spectral {
        #[command(subcommand)]
        cmd: SpectralCmd,
    },
    /// Distances in the factor spaces.
    Space {
        #[command(subcommand)]
        cmd: SpaceCmd,
    },
    /// Horocyclic product model spaces.
    Model {
        #[command(subcommand)]
        cmd: ModelCmd,
    },
    /// Boundary metrics.
    Boundary {
        #[command(subcommand)]
        cmd: BoundaryCmd,
    },
    /// Word metrics and actions.
    Group {
        #[command(subcommand)]
        cmd: GroupCmd,
    },
    /// Quasi-isometry constants and the iterate detector.
    Qi {
        #[command(subcommand)]
        cmd: QiCmd,
    },
    /// Envelopes of finite extensions.
    Furman {
        #[command(subcommand)]
        cmd: FurmanCmd,
    },
    /// Integer arithmetic of model counts.
    Models {
        #[command(subcommand)]
        cmd: ModelsCmd,
    },
    /// Runs an experiment suite.
    Run(RunArgs),
}

#[derive(Subcommand)]
enum SpectralCmd {
    Analyze {
        #[arg(long)]
        matrix: String,
    },
}

#[derive(Subcommand)]
enum SpaceCmd {
    /// `--kind tree` takes `digits@height`; `--kind g` takes `v1,v2@t`.
    Dist {
        #[arg(long)]
        kind: String,
        #[arg(long)]
        m: Option<u32>,
        /// Ascending diagonal of `G`, comma separated.
        #[arg(long)]
        diag: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        u: String,
        #[arg(long, allow_hyphen_values = true)]
        v: String,
    },
}

#[derive(Subcommand)]
enum ModelCmd {
    /// DL points are `x1/x2` tree vertices; others `v1,..@t` with an
    /// optional `#y` m-adic literal.
    Dist {
        #[arg(long)]
        space: String,
        #[arg(long, allow_hyphen_values = true)]
        u: String,
        #[arg(long, allow_hyphen_values = true)]
        v: String,
    },
    Mk {
        #[arg(long)]
        space: String,
    },
}

#[derive(Subcommand)]
enum BoundaryCmd {
    /// `--kind madic` takes `digits@val` literals; `--kind dm` comma
    /// separated vectors on the expanding block of `--matrix`.
    Dist {
        #[arg(long)]
        kind: String,
        #[arg(long)]
        m: Option<u32>,
        #[arg(long)]
        matrix: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, allow_hyphen_values = true)]
        y: String,
    },
}

#[derive(Subcommand)]
enum GroupCmd {
    Wordlen {
        #[arg(long)]
        group: String,
        #[arg(long)]
        word: String,
        #[arg(long, default_value_t = 12)]
        radius: u32,
    },
    Verify {
        #[arg(long)]
        matrix: String,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
}

#[derive(Subcommand)]
enum QiCmd {
    /// Reads `{"domain": [...], "image": [...]}` of numbers or vectors.
    Fit {
        #[arg(long)]
        map: PathBuf,
    },
    Iterate {
        #[arg(long, allow_hyphen_values = true)]
        c1: String,
        #[arg(long, allow_hyphen_values = true)]
        c2: String,
        #[arg(long = "R", alias = "r")]
        r: String,
        #[arg(long, default_value_t = 100_000)]
        max_iter: u64,
    },
}

#[derive(Subcommand)]
enum FurmanCmd {
    Verify {
        #[arg(long)]
        group: String,
        /// none, z<r> or flip.
        #[arg(long, default_value = "none")]
        ext: String,
        #[arg(long, default_value_t = 6)]
        radius: u32,
    },
}

#[derive(Subcommand)]
enum ModelsCmd {
    CommonBase {
        m: u64,
        p: u64,
    },
    Exponents {
        #[arg(long)]
        d: u64,
        #[arg(long)]
        kmax: u32,
    },
    Index {
        #[arg(long)]
        d: u64,
        #[arg(long)]
        e: u64,
        #[arg(long)]
        f: u64,
        #[arg(long)]
        g: u64,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    suite: Suite,
    #[arg(long)]
    matrix: Option<String>,
    #[arg(long)]
    group: Option<String>,
    #[arg(long)]
    ext: Option<String>,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    radius: Option<u32>,
    #[arg(long)]
    samples: Option<usize>,
}

/// What a command produced: a JSON document, its CSV table, and any failed
/// checks.
struct Output {
    json: Value,
    table: Table,
    failures: Vec<FailureRecord>,
}

impl Output {
    fn record(fields: Vec<(&str, Value)>) -> Self {
        let mut table = Table::new(&fields.iter().map(|f| f.0).collect::<Vec<_>>());
        table.push(fields.iter().map(|f| f.1.clone()).collect());
        let json = Value::Object(fields.into_iter().map(|(k, v)| (k.to_string(), v)).collect());
        Output { json, table, failures: Vec::new() }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = command_name(&cli.command);
    match execute(&cli) {
        Ok(out) => {
            let text = match cli.global.format {
                Format::Json => serde_json::to_string_pretty(&out.json).expect("json values serialize") + "\n",
                Format::Csv => match out.table.to_csv() {
                    Ok(s) => s,
                    Err(e) => return fail(name, &e),
                },
            };
            if let Err(e) = write(&cli.global.out, &text) {
                eprintln!("{}", json!({ "module": "cli", "operation": "write", "witness": e.to_string() }));
                return ExitCode::from(2);
            }
            for f in &out.failures {
                eprintln!("{}", serde_json::to_string(f).expect("record serializes"));
            }
            if out.failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => fail(name, &e),
    }
}

fn fail(module: &str, e: &Error) -> ExitCode {
    eprintln!("{}", json!({ "module": module, "operation": "error", "code": e.code(), "witness": e.to_string() }));
    ExitCode::from(2)
}

fn write(out: &Option<PathBuf>, text: &str) -> std::io::Result<()> {
    match out {
        Some(p) => fs::write(p, text),
        None => match std::io::stdout().lock().write_all(text.as_bytes()) {
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
            other => other,
        },
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Spectral { .. } => "spectral",
        Command::Space { .. } => "spaces",
        Command::Model { .. } => "horoprod",
        Command::Boundary { .. } => "boundary",
        Command::Group { .. } => "groups",
        Command::Qi { .. } => "qimaps",
        Command::Furman { .. } => "furman",
        Command::Models { .. } => "modelcount",
        Command::Run(_) => "cli",
    }
}

fn execute(cli: &Cli) -> Result<Output> {
    match &cli.command {
        Command::Spectral { cmd: SpectralCmd::Analyze { matrix } } => {
            let report = analyze(&parse_int_matrix(matrix)?)?.report();
            let json = serde_json::to_value(&report).expect("report serializes");
            let fields = json.as_object().expect("report is an object").iter().map(|(k, v)| (k.as_str(), v.clone())).collect();
            let mut out = Output::record(fields);
            out.json = json;
            Ok(out)
        }
        Command::Space { cmd: SpaceCmd::Dist { kind, m, diag, u, v } } => space_dist(kind, *m, diag.as_deref(), u, v),
        Command::Model { cmd } => match cmd {
            ModelCmd::Dist { space, u, v } => model_dist(space, u, v),
            ModelCmd::Mk { space } => {
                let s = ModelSpace::parse(space)?;
                let kind = match &s.kind {
                    ModelKind::Sol => "sol",
                    ModelKind::Dl(..) => "dl",
                    ModelKind::Xn(_) => "xn",
                    ModelKind::XMbar(_) => "xmbar",
                };
                Ok(Output::record(vec![
                    ("space", json!(s.to_string())),
                    ("kind", json!(kind)),
                    ("factor1", json!(describe(&s.factors.0))),
                    ("factor2", json!(describe(&s.factors.1))),
                ]))
            }
        },
        Command::Boundary { cmd: BoundaryCmd::Dist { kind, m, matrix, x, y } } => {
            let d = match kind.as_str() {
                "madic" => {
                    let m = m.ok_or_else(|| Error::InvalidArgument("--m is required for madic".into()))?;
                    madic_dist(&parse_madic(m, x)?, &parse_madic(m, y)?)?
                }
                "dm" => {
                    let matrix = matrix.as_deref().ok_or_else(|| Error::InvalidArgument("--matrix is required for dm".into()))?;
                    let split = analyze(&parse_int_matrix(matrix)?)?;
                    let layout = BlockLayout::from_split(&split, Block::Expanding)?;
                    dm_metric(&layout.split_vector(&floats(x)?)?, &layout.split_vector(&floats(y)?)?, &layout)?
                }
                _ => return Err(Error::InvalidArgument(format!("unknown boundary kind {kind:?}"))),
            };
            Ok(Output::record(vec![("distance", json!(d))]))
        }
        Command::Group { cmd } => match cmd {
            GroupCmd::Wordlen { group, word, radius } => {
                let len = AnyGroup::parse(group)?.word_length(word, *radius)?;
                Ok(Output::record(vec![("group", json!(group)), ("word", json!(word)), ("word_length", json!(len))]))
            }
            GroupCmd::Verify { matrix, samples } => {
                let action = GammaAction::new(parse_int_matrix(matrix)?)?;
                let report = action.verify_relations(&action.sample_points(*samples, cli.global.seed)?)?;
                let mut table = Table::new(&["relation", "kind", "max_deviation"]);
                for r in &report.rows {
                    table.push(vec![json!(r.relation), json!(r.kind), json!(r.max_deviation)]);
                }
                Ok(Output { json: serde_json::to_value(&report).expect("report serializes"), table, failures: Vec::new() })
            }
        },
        Command::Qi { cmd } => match cmd {
            QiCmd::Fit { map } => qi_fit(map),
            QiCmd::Iterate { c1, c2, r, max_iter } => {
                let v = uniform_iterate_check(&parse_rational(c1)?, &parse_rational(c2)?, &parse_rational(r)?, *max_iter)?;
                let (verdict, step) = match v {
                    IterateVerdict::Compatible => ("compatible", Value::Null),
                    IterateVerdict::ViolatedAt(s) => ("violated", json!(s)),
                };
                Ok(Output::record(vec![("verdict", json!(verdict)), ("step", step)]))
            }
        },
        Command::Furman { cmd: FurmanCmd::Verify { group, ext, radius } } => {
            let report = AnyEnvelope::parse(group, ext)?.verify(*radius)?;
            let mut table = Table::new(&["h", "K", "C", "B", "composition_defect"]);
            for r in &report.rows {
                table.push(vec![json!(r.h), json!(r.k), json!(r.c), json!(r.b), json!(r.composition_defect)]);
            }
            let mut failures = Vec::new();
            let mut flag = |ok: bool, witness: String| {
                if !ok {
                    failures.push(FailureRecord { module: "furman".into(), operation: "verify_lemma_5_1".into(), witness });
                }
            };
            flag(report.restriction_exact, format!("{}: restriction to the lattice is not left translation", report.envelope));
            flag(
                report.defect_within_bound(),
                format!("{}: composition defect {} above {}", report.envelope, report.defect_max, report.defect_bound),
            );
            Ok(Output { json: serde_json::to_value(&report).expect("report serializes"), table, failures })
        }
        Command::Models { cmd } => match cmd {
            ModelsCmd::CommonBase { m, p } => {
                let fields = match common_base(*m, *p)? {
                    Some((r, i, j)) => vec![("r", json!(r)), ("i", json!(i)), ("j", json!(j))],
                    None => vec![("r", Value::Null), ("i", Value::Null), ("j", Value::Null)],
                };
                Ok(Output::record(fields))
            }
            ModelsCmd::Exponents { d, kmax } => {
                let ks: Vec<String> = admissible_exponents(*d, *kmax)?.iter().map(|k| k.to_string()).collect();
                let mut table = Table::new(&["k"]);
                for k in &ks {
                    table.push(vec![json!(k)]);
                }
                Ok(Output { json: json!({ "d": d, "kmax": kmax, "exponents": ks }), table, failures: Vec::new() })
            }
            ModelsCmd::Index { d, e, f, g } => {
                let fields = match index_identity_check(&GraphOfGroupsDatum { d: *d, e: *e, f: *f, g: *g })? {
                    IndexVerdict::Consistent(x) => vec![("verdict", json!("consistent")), ("index", json!(x))],
                    IndexVerdict::Inconsistent { fg, .. } => vec![("verdict", json!("inconsistent")), ("index", json!(fg))],
                };
                Ok(Output::record(fields))
            }
        },
        Command::Run(args) => {
            let config = ExperimentConfig {
                suite: args.suite,
                matrix: args.matrix.clone(),
                group: args.group.clone(),
                ext: args.ext.clone(),
                m: args.m,
                radius: args.radius,
                samples: args.samples,
                seed: cli.global.seed,
                format: cli.global.format,
            };
            let outcome = run_suite(&config)?;
            let json = serde_json::from_str(&outcome.render(Format::Json)?).expect("rendered json parses");
            Ok(Output { json, table: outcome.table, failures: outcome.failures })
        }
    }
}

fn describe(f: &Factor) -> String {
    let diag = |g: &GGeometry| g.diag.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
    match f {
        Factor::Tree(m) => format!("tree:{m}"),
        Factor::G(g) => format!("g:{}", diag(g)),
        Factor::Z(g, m) => format!("z:{};{m}", diag(g)),
    }
}

fn floats(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|x| x.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{x:?}: {e}"))))
        .collect()
}

/// `v1,v2@t`.
fn g_point(s: &str) -> Result<GPoint> {
    let (v, t) = s.rsplit_once('@').ok_or_else(|| Error::Parse(format!("expected v1,..@t, got {s:?}")))?;
    Ok(GPoint { t: t.trim().parse().map_err(|e| Error::Parse(format!("height in {s:?}: {e}")))?, v: floats(v)? })
}

fn space_dist(kind: &str, m: Option<u32>, diag: Option<&str>, u: &str, v: &str) -> Result<Output> {
    match kind {
        "tree" => {
            let m = m.ok_or_else(|| Error::InvalidArgument("--m is required for trees".into()))?;
            let d = tree_distance(&parse_tree_vertex(m, u)?, &parse_tree_vertex(m, v)?)?;
            Ok(Output::record(vec![("distance", json!(d)), ("method", json!("tree"))]))
        }
        "g" => {
            let geom = match diag {
                Some(d) => GGeometry::from_diagonal(&floats(d)?)?,
                None => GGeometry::hyperbolic_plane(),
            };
            let (p, q) = (g_point(u)?, g_point(v)?);
            let horo = match horospherical_distance(&p, &q, &geom) {
                Ok(d) => json!(d),
                Err(Error::HeightMismatch(..)) => Value::Null,
                Err(e) => return Err(e),
            };
            Ok(Output::record(vec![
                ("distance", json!(coarse_distance_g(&p, &q, &geom)?)),
                ("method", json!("coarse")),
                ("horospherical", horo),
            ]))
        }
        _ => Err(Error::InvalidArgument(format!("unknown space kind {kind:?}"))),
    }
}

fn model_point(space: &ModelSpace, s: &str) -> Result<HPoint> {
    if let ModelKind::Dl(n, m) = space.kind {
        let (a, b) = s.split_once('/').ok_or_else(|| Error::Parse(format!("expected x1/x2, got {s:?}")))?;
        let coords = Coords::Factors(FactorPoint::Tree(parse_tree_vertex(n, a)?), FactorPoint::Tree(parse_tree_vertex(m, b)?));
        return make_point(space, &coords);
    }
    let (body, y) = match s.split_once('#') {
        Some((b, y)) => (b, Some(y)),
        None => (s, None),
    };
    let g = g_point(body)?;
    let y = match (y, &space.factors.1) {
        (Some(lit), Factor::Tree(m) | Factor::Z(_, m)) => Some(parse_madic(*m, lit)?),
        (Some(_), _) => return Err(Error::MalformedCoordinates("this space has no tree factor".into())),
        (None, _) => None::<MAdic>,
    };
    make_point(space, &Coords::Vty { v: g.v, t: g.t, y })
}

fn model_dist(space: &str, u: &str, v: &str) -> Result<Output> {
    let space = ModelSpace::parse(space)?;
    let (p, q) = (model_point(&space, u)?, model_point(&space, v)?);
    let (d, method) = match space.kind {
        ModelKind::Dl(..) => (json!(dl_distance(&p, &q)?), "bfs"),
        _ => (json!(coarse_distance(&space, &p, &q)?), "coarse"),
    };
    Ok(Output::record(vec![("distance", d), ("method", json!(method))]))
}

fn as_point(v: &Value) -> Result<Vec<f64>> {
    match v {
        Value::Number(x) => Ok(vec![x.as_f64().expect("json numbers are finite")]),
        Value::Array(xs) => {
            xs.iter().map(|x| x.as_f64().ok_or_else(|| Error::Parse(format!("non-numeric coordinate {x}")))).collect()
        }
        other => Err(Error::Parse(format!("map point {other} is neither a number nor a vector"))),
    }
}

fn qi_fit(path: &PathBuf) -> Result<Output> {
    let text = fs::read_to_string(path).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
    let doc: Value = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("map table: {e}")))?;
    let column = |key: &str| -> Result<Vec<Vec<f64>>> {
        doc.get(key)
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse(format!("map table lacks {key:?}")))?
            .iter()
            .map(as_point)
            .collect()
    };
    let (domain, image) = (column("domain")?, column("image")?);
    if domain.len() != image.len() {
        return Err(Error::DomainMismatch);
    }
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let mut pairs = Vec::new();
    for i in 0..domain.len() {
        for j in i + 1..domain.len() {
            pairs.push((dist(&domain[i], &domain[j]), dist(&image[i], &image[j])));
        }
    }
    let qi = fit_qi_constants(&pairs, 0.0);
    Ok(Output::record(vec![("K", json!(qi.k)), ("C", json!(qi.c)), ("samples", json!(domain.len()))]))
}
