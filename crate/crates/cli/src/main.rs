use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use extendkit::convex::{self, ConvexError, ConvexVerdict, MAX_TILDE_DIM};
use extendkit::ground::{
    self, ConvexPartialFunction, GroundError, PartialSetFunction, Rational, SetPoint, ToJson, ValueClass,
};
use extendkit::oracle::{self, OracleClass, OracleError};
use extendkit::subadditive::{self, SubadditiveError, SubadditiveVerdict};
use extendkit::submodular::{self, SquareCertificate, SubmodularError, SubmodularVerdict, DEFAULT_CLOSURE_CAP};
use extendkit::testers::{self, FunctionOracle, TesterClass, TesterError, Verdict};
use extendkit::xos;

/// Version of the JSON documents read and written by this binary.
const SCHEMA_VERSION: &str = "1";
const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Parser)]
#[command(name = "extendkit", version = concat!(env!("CARGO_PKG_VERSION"), " (schema 1)"))]
#[command(about = "Extension tests for partial set functions and partial convex functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether the partial function extends to the class.
    Extend {
        #[arg(long, value_enum)]
        class: ExtendClass,
        #[command(flatten)]
        input: Input,
        /// Lattice closure cap for the submodular class.
        #[arg(long, default_value_t = DEFAULT_CLOSURE_CAP)]
        cap: usize,
    },
    /// Optimal approximation factor for positive data.
    Approx {
        #[arg(long, value_enum)]
        class: ApproxClass,
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = DEFAULT_CLOSURE_CAP)]
        cap: usize,
    },
    /// Evaluate a canonical extension at one point.
    Eval {
        #[arg(long, value_enum)]
        class: EvalClass,
        #[command(flatten)]
        input: Input,
        /// A set such as "[0,2]" or a point such as '["3","1/2"]'.
        #[arg(long)]
        at: String,
        /// Permit vertex enumeration above the default dimension limit.
        #[arg(long)]
        allow_large: bool,
    },
    /// Compute a square certificate for a submodular non-extendible input.
    Certify {
        #[command(flatten)]
        input: Input,
        /// Also write the certificate here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_CLOSURE_CAP)]
        cap: usize,
        /// Include the equivalent boolean circuit.
        #[arg(long)]
        boolean: bool,
    },
    /// Check a square certificate against a partial function.
    VerifyCert {
        #[arg(long)]
        cert: PathBuf,
        #[command(flatten)]
        input: Input,
    },
    /// Rewrite a certificate so that it only uses defined sets.
    RewriteCert {
        #[arg(long)]
        cert: PathBuf,
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the vertices of the dual polyhedron of a convex instance.
    Vertices {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        allow_large: bool,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Run a property tester against a full value table.
    Test {
        #[arg(long, value_enum)]
        class: TestClass,
        /// Full table document {"m": .., "values": [..]}.
        #[arg(long)]
        oracle: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Brute-force full-domain extension check for small ground sets.
    Oracle {
        #[arg(long, value_enum)]
        class: OracleArg,
        #[command(flatten)]
        input: Input,
    },
    /// Generate random instances.
    Gen(GenArgs),
}

#[derive(Args)]
struct Input {
    #[arg(long)]
    input: PathBuf,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: GenKind,
    #[arg(long, default_value_t = 4)]
    m: usize,
    /// Number of defined sets (partial, antichain) or maximum squares (cert).
    #[arg(long, default_value_t = 4)]
    n: usize,
    #[arg(long, default_value = "0")]
    lo: String,
    #[arg(long, default_value = "10")]
    hi: String,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// For certificates: write the refuted function here and print only the certificate.
    #[arg(long)]
    function_out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExtendClass {
    Subadditive,
    SubadditiveNonmonotone,
    Xos,
    Submodular,
    Convex,
}

#[derive(Clone, Copy, ValueEnum)]
enum ApproxClass {
    Subadditive,
    Xos,
    Submodular,
    Convex,
}

#[derive(Clone, Copy, ValueEnum)]
enum EvalClass {
    XosRoof,
    ConvexRoof,
    ConvexTilde,
}

#[derive(Clone, Copy, ValueEnum)]
enum TestClass {
    Subadditive,
    Xos,
    SubadditiveNonmonotone,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleArg {
    Subadditive,
    SubadditiveNonmonotone,
    Xos,
    Submodular,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Partial,
    Antichain,
    Cert,
}

/// Positive outcome (exit 0) or negative outcome (exit 1) with its JSON.
struct Report {
    positive: bool,
    body: Value,
}

impl Report {
    fn new(positive: bool, body: Value) -> Self {
        Report { positive, body }
    }
}

fn read(path: &Path) -> anyhow::Result<Vec<u8>> {
    std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, doc: &Value) -> anyhow::Result<()> {
    std::fs::write(path, pretty(doc)).with_context(|| format!("cannot write {}", path.display()))
}

fn pretty(doc: &Value) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("JSON values serialize");
    s.push('\n');
    s
}

fn set_function(input: &Input, class: ValueClass) -> anyhow::Result<PartialSetFunction> {
    Ok(ground::parse_set_function(&read(&input.input)?, class)?)
}

fn convex_function(input: &Input) -> anyhow::Result<ConvexPartialFunction> {
    Ok(ground::parse_convex_function(&read(&input.input)?)?)
}

fn parse_point(at: &str, dim: usize) -> anyhow::Result<Vec<Rational>> {
    let raw: Vec<String> = serde_json::from_str(at).context("--at must be a JSON array of rational strings")?;
    let x = raw.iter().map(|s| s.parse::<Rational>()).collect::<Result<Vec<_>, _>>()?;
    if x.len() != dim {
        bail!(ConvexError::DimensionMismatch { got: x.len(), expected: dim });
    }
    Ok(x)
}

fn parse_set(at: &str, m: usize) -> anyhow::Result<SetPoint> {
    let elems: Vec<usize> = serde_json::from_str(at).context("--at must be a JSON array of element indices")?;
    if elems.windows(2).any(|w| w[0] >= w[1]) {
        bail!(GroundError::UnsortedSet(elems));
    }
    if let Some(&bad) = elems.iter().find(|&&e| e >= m) {
        bail!(GroundError::IndexOutOfRange { index: bad, m });
    }
    Ok(SetPoint::from_elements(elems))
}

fn certificate_doc(cert: &SquareCertificate, h: &PartialSetFunction) -> Value {
    let mut doc = cert.to_json_value();
    doc["slack"] = json!(cert.slack(h));
    doc
}

fn extend(class: ExtendClass, input: &Input, cap: usize) -> anyhow::Result<Report> {
    Ok(match class {
        ExtendClass::Subadditive | ExtendClass::SubadditiveNonmonotone => {
            let h = set_function(input, ValueClass::Subadditive)?;
            let verdict = if matches!(class, ExtendClass::Subadditive) {
                subadditive::extend_monotone_subadditive(&h)?
            } else {
                subadditive::extend_general_subadditive(&h)?
            };
            match verdict {
                SubadditiveVerdict::Extendible => Report::new(true, json!({"verdict": "extendible"})),
                SubadditiveVerdict::NotExtendible(v) => {
                    Report::new(false, json!({"verdict": "not_extendible", "violation": v}))
                }
            }
        }
        ExtendClass::Xos => {
            let h = set_function(input, ValueClass::Xos)?;
            let verdict = xos::extend_xos(&h)?;
            Report::new(verdict.is_extendible(), serde_json::to_value(&verdict)?)
        }
        ExtendClass::Submodular => {
            let h = set_function(input, ValueClass::Submodular)?;
            match submodular::extend_submodular(&h, cap)? {
                SubmodularVerdict::Extendible { family, values } => Report::new(
                    true,
                    json!({"verdict": "extendible", "family": family, "values": values}),
                ),
                SubmodularVerdict::AntichainShortcut { family, values } => Report::new(
                    true,
                    json!({"verdict": "extendible", "antichain": true, "family": family, "values": values}),
                ),
                SubmodularVerdict::NotExtendible(cert) => Report::new(
                    false,
                    json!({"verdict": "not_extendible", "certificate": certificate_doc(&cert, &h)}),
                ),
            }
        }
        ExtendClass::Convex => {
            let ch = convex_function(input)?;
            match convex::extend_convex(&ch)? {
                ConvexVerdict::Extendible => Report::new(true, json!({"verdict": "extendible"})),
                ConvexVerdict::NotExtendible { index, roof, value } => Report::new(
                    false,
                    json!({
                        "verdict": "not_extendible",
                        "index": index,
                        "x": ch.points()[index].0,
                        "value": value,
                        "roof": roof,
                    }),
                ),
            }
        }
    })
}

fn approx(class: ApproxClass, input: &Input, cap: usize) -> anyhow::Result<Report> {
    let body = match class {
        ApproxClass::Subadditive => {
            let h = set_function(input, ValueClass::Subadditive)?;
            let a = subadditive::approx_monotone_subadditive_exact(&h)?;
            let upper = subadditive::approx_subadditive_via_xos(&h)?;
            json!({"alpha": a.alpha, "argmax": a.argmax, "xos_upper_bound": upper})
        }
        ApproxClass::Xos => {
            let h = set_function(input, ValueClass::Xos)?;
            let a = xos::approx_xos(&h)?;
            json!({"alpha": a.alpha, "vectors": a.vectors})
        }
        ApproxClass::Submodular => {
            let h = set_function(input, ValueClass::Submodular)?;
            json!({"alpha": submodular::approx_submodular(&h, cap)?})
        }
        ApproxClass::Convex => {
            let ch = convex_function(input)?;
            json!({"alpha": convex::approx_convex(&ch)?})
        }
    };
    Ok(Report::new(true, body))
}

fn eval(class: EvalClass, input: &Input, at: &str, allow_large: bool) -> anyhow::Result<Report> {
    let body = match class {
        EvalClass::XosRoof => {
            let h = set_function(input, ValueClass::Xos)?;
            let s = parse_set(at, h.m())?;
            json!({"at": s, "value": xos::eval_xos_roof(&h, &s)?})
        }
        EvalClass::ConvexRoof => {
            let ch = convex_function(input)?;
            let x = parse_point(at, ch.dim())?;
            json!({"at": x, "value": convex::roof_value(&ch, &x)?})
        }
        EvalClass::ConvexTilde => {
            let ch = convex_function(input)?;
            let x = parse_point(at, ch.dim())?;
            let (value, vertex) = convex::eval_tilde_vertex(&ch, &x, allow_large)?;
            json!({"at": x, "value": value, "vertex": vertex})
        }
    };
    Ok(Report::new(true, body))
}

fn certify(input: &Input, out: Option<&Path>, cap: usize, boolean: bool) -> anyhow::Result<Report> {
    let h = set_function(input, ValueClass::Submodular)?;
    let SubmodularVerdict::NotExtendible(cert) = submodular::extend_submodular(&h, cap)? else {
        return Ok(Report::new(true, json!({"verdict": "extendible"})));
    };
    if let Some(path) = out {
        write(path, &cert.to_json_value())?;
    }
    let mut body = json!({"verdict": "not_extendible", "certificate": certificate_doc(&cert, &h)});
    if boolean {
        body["circuit"] = serde_json::to_value(submodular::square_to_boolean(&cert, &h)?)?;
    }
    Ok(Report::new(false, body))
}

fn load_certificate(path: &Path, m: usize) -> anyhow::Result<SquareCertificate> {
    Ok(SquareCertificate::from_json(&read(path)?, m)?)
}

fn verify_cert(cert: &Path, input: &Input) -> anyhow::Result<Report> {
    let h = set_function(input, ValueClass::Submodular)?;
    let cert = load_certificate(cert, h.m())?;
    let valid = submodular::verify_square_certificate(&cert, &h);
    Ok(Report::new(valid, json!({"valid": valid, "slack": cert.slack(&h)})))
}

fn rewrite_cert(cert: &Path, input: &Input, out: Option<&Path>) -> anyhow::Result<Report> {
    let h = set_function(input, ValueClass::Submodular)?;
    let cert = load_certificate(cert, h.m())?;
    if !submodular::verify_square_certificate(&cert, &h) {
        return Ok(Report::new(false, json!({"valid": false, "slack": cert.slack(&h)})));
    }
    let rewritten = submodular::lattice_rewrite(&cert, &h)?;
    if let Some(path) = out {
        write(path, &rewritten.to_json_value())?;
    }
    Ok(Report::new(
        true,
        json!({
            "squares_before": cert.total_squares(),
            "squares_after": rewritten.total_squares(),
            "certificate": certificate_doc(&rewritten, &h),
        }),
    ))
}

fn vertices(input: &Input, allow_large: bool, jobs: usize) -> anyhow::Result<Report> {
    let ch = convex_function(input)?;
    if ch.dim() > MAX_TILDE_DIM && !allow_large {
        bail!(ConvexError::DimensionTooLarge { m: ch.dim(), limit: MAX_TILDE_DIM });
    }
    let vs = convex::enumerate_dual_vertices_par(&ch, jobs)?;
    Ok(Report::new(true, json!({"count": vs.len(), "vertices": vs})))
}

fn test(class: TestClass, table: &Path, epsilon: f64, seed: u64, trials: u64, jobs: usize) -> anyhow::Result<Report> {
    let class = match class {
        TestClass::Subadditive => TesterClass::Subadditive,
        TestClass::Xos => TesterClass::Xos,
        TestClass::SubadditiveNonmonotone => TesterClass::SubadditiveNonmonotone,
    };
    let table = ground::parse_full_table(&read(table)?)?;
    let o = FunctionOracle::from_table(table);
    if trials <= 1 {
        let r = testers::run_tester(&o, class, epsilon, seed, 0)?;
        return Ok(Report::new(r.verdict == Verdict::Accept, serde_json::to_value(&r)?));
    }
    let reports = testers::run_trials(&o, class, epsilon, seed, trials, jobs)?;
    let rejections = reports.iter().filter(|r| r.verdict == Verdict::Reject).count();
    let verdict = if rejections == 0 { Verdict::Accept } else { Verdict::Reject };
    log::info!("{rejections} of {trials} trials rejected");
    Ok(Report::new(
        rejections == 0,
        json!({
            "verdict": verdict,
            "class": class,
            "epsilon": epsilon,
            "seed": seed,
            "trials": trials,
            "rejections": rejections,
            "queries": o.query_count(),
            "reports": reports,
        }),
    ))
}

fn run_oracle(class: OracleArg, input: &Input) -> anyhow::Result<Report> {
    let (class, values) = match class {
        OracleArg::Subadditive => (OracleClass::MonotoneSubadditive, ValueClass::Subadditive),
        OracleArg::SubadditiveNonmonotone => (OracleClass::GeneralSubadditive, ValueClass::Subadditive),
        OracleArg::Xos => (OracleClass::Xos, ValueClass::Xos),
        OracleArg::Submodular => (OracleClass::Submodular, ValueClass::Submodular),
    };
    let h = set_function(input, values)?;
    let ok = oracle::full_domain_extend(&h, class)?;
    let verdict = if ok { "extendible" } else { "not_extendible" };
    Ok(Report::new(ok, json!({"class": class, "verdict": verdict})))
}

fn generate(args: &GenArgs) -> anyhow::Result<Report> {
    let mut rng = testers::trial_rng(args.seed, 0);
    let lo: Rational = args.lo.parse()?;
    let hi: Rational = args.hi.parse()?;
    let body = match args.kind {
        GenKind::Partial => oracle::random_partial_function(args.m, args.n, &lo, &hi, &mut rng)?.to_json_value(),
        GenKind::Antichain => {
            let family = oracle::random_antichain(args.m, args.n, &mut rng)?;
            let pts = family.into_iter().map(|s| (s, oracle::random_rational(&lo, &hi, &mut rng))).collect();
            PartialSetFunction::new(args.m, pts)?.to_json_value()
        }
        GenKind::Cert => {
            let (cert, h) = oracle::random_valid_square_certificate(args.m, args.n, &mut rng)?;
            match &args.function_out {
                Some(path) => {
                    write(path, &h.to_json_value())?;
                    cert.to_json_value()
                }
                None => json!({"certificate": cert.to_json_value(), "function": h.to_json_value()}),
            }
        }
    };
    Ok(Report::new(true, body))
}

fn dispatch(cli: &Cli) -> anyhow::Result<Report> {
    match &cli.command {
        Command::Extend { class, input, cap } => extend(*class, input, *cap),
        Command::Approx { class, input, cap } => approx(*class, input, *cap),
        Command::Eval { class, input, at, allow_large } => eval(*class, input, at, *allow_large),
        Command::Certify { input, out, cap, boolean } => certify(input, out.as_deref(), *cap, *boolean),
        Command::VerifyCert { cert, input } => verify_cert(cert, input),
        Command::RewriteCert { cert, input, out } => rewrite_cert(cert, input, out.as_deref()),
        Command::Vertices { input, allow_large, jobs } => vertices(input, *allow_large, *jobs),
        Command::Test { class, oracle, epsilon, seed, trials, jobs } => {
            test(*class, oracle, *epsilon, *seed, *trials, *jobs)
        }
        Command::Oracle { class, input } => run_oracle(*class, input),
        Command::Gen(args) => generate(args),
    }
}

/// Exit 3 for resource limits, exit 2 for everything else.
fn is_resource_limit(err: &anyhow::Error) -> bool {
    err.chain().any(|e| {
        matches!(e.downcast_ref(), Some(SubmodularError::ClosureCapExceeded { .. } | SubmodularError::TooManyGates(_)))
            || matches!(e.downcast_ref(), Some(OracleError::TooLarge { .. }))
            || matches!(
                e.downcast_ref(),
                Some(ConvexError::DegenerateHull { .. } | ConvexError::DimensionTooLarge { .. })
            )
            || matches!(e.downcast_ref(), Some(GroundError::TableTooLarge(_)))
            || matches!(e.downcast_ref(), Some(SubadditiveError::TargetTooLarge(_)))
            || matches!(e.downcast_ref(), Some(TesterError::GroundTooLarge(_)))
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    log::debug!("schema version {SCHEMA_VERSION}");
    match dispatch(&cli) {
        Ok(report) => {
            print!("{}", pretty(&report.body));
            ExitCode::from(if report.positive { 0 } else { 1 })
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(if is_resource_limit(&err) { 3 } else { 2 })
        }
    }
}
