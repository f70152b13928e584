//! `gprand`: command-line front end.
//!
//! Exit codes: 0 success, 1 a verified inequality failed, 2 usage, parse or
//! domain error, 3 precision exhausted.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use gprand_core::analytic::{
    approximation_error, erdos_turan_rhs, exp_sum, fourier_tail, g_eval, g_fourier_coeff,
    pnorm_check, SmoothingParams,
};
use gprand_core::bounds::{
    bound_scan, eta_composition, key_lemma_exponents, parse_ratio, proof_parameters, prop1_exponents,
    prop2_exponents, prop3_exponents, prop_bound, ratio_str, theorem_eta, Prop, SCAN_CSV_HEADER,
};
use gprand_core::dioph::{continued_fraction, convergent_inequality_holds, type_probe, RealConst};
use gprand_core::genpoly::{parse, GpExpr};
use gprand_core::measures::{discrepancy, discrepancy_naive, well_distribution, well_distribution_naive};
use gprand_core::sequence::{fractional_parts, generate, BinarySequence};
use gprand_core::verify::{run_suite, SuiteSize};
use gprand_core::Error;

#[derive(Parser)]
#[command(name = "gprand", version, about = "Pseudorandom ±1 sequences from generalized polynomials")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Starting working precision in bits.
    #[arg(long, global = true, env = "GPRAND_PRECISION", default_value_t = 256,
          value_parser = clap::value_parser!(u32).range(64..=8192))]
    precision: u32,

    /// Report format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Generate e_n = chi(f(n)) as a GPSEQ1 file.
    Gen {
        #[arg(long, allow_hyphen_values = true)]
        expr: String,
        #[arg(long)]
        n: usize,
    },
    /// Well-distribution measure W of a sequence.
    Welldist {
        #[command(flatten)]
        src: SeqSource,
        #[arg(long)]
        a_max: Option<u64>,
        /// Use the triple-loop oracle (N <= 4096).
        #[arg(long)]
        naive: bool,
    },
    /// Extreme discrepancy of {f(n)} or of a list of points.
    Disc {
        #[command(flatten)]
        src: PointSource,
        #[arg(long)]
        naive: bool,
    },
    /// sum_{m<=M} e(h f(a m + b)) with M = floor((N - b)/a).
    Expsum {
        #[arg(long, allow_hyphen_values = true)]
        expr: String,
        #[arg(long)]
        n: u64,
        #[arg(long, allow_hyphen_values = true)]
        h: i64,
        #[arg(long, default_value_t = 1)]
        a: u64,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        b: i64,
    },
    /// Erdős–Turán right-hand side next to the exact discrepancy.
    Erdosturan {
        #[command(flatten)]
        src: PointSource,
        #[arg(long = "H")]
        h: u64,
    },
    /// Smoothed sawtooth kernel G_r.
    Smooth {
        #[arg(value_enum)]
        what: SmoothOp,
        #[arg(long, default_value_t = 1)]
        r: u32,
        #[arg(long)]
        delta: f64,
        #[arg(long, allow_hyphen_values = true)]
        tau: f64,
        #[arg(long = "K", default_value_t = 64)]
        k: u64,
        /// Exponent for `pnorm`.
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// Points for `eval` (comma separated).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Vec<f64>,
        /// Sequence for `approx`.
        #[arg(long, allow_hyphen_values = true)]
        expr: Option<String>,
        #[arg(long)]
        n: Option<u64>,
    },
    /// Empirical finite-type exponent.
    Typeprobe {
        /// Constants such as "sqrt(2)" (repeatable).
        #[arg(long = "gamma", allow_hyphen_values = true)]
        gammas: Vec<String>,
        /// Probe the type triple of a theorem-shaped expression instead.
        #[arg(long, allow_hyphen_values = true)]
        expr: Option<String>,
        #[arg(long)]
        q: u64,
    },
    /// Continued fraction of a constant.
    Cf {
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, default_value_t = 20)]
        count: usize,
    },
    /// Exact exponent tables, optionally evaluated at (a, N).
    Bounds {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        t: String,
        #[arg(long)]
        a: Option<u64>,
        #[arg(long)]
        n: Option<u64>,
        /// Key-lemma atom count.
        #[arg(long, default_value_t = 1)]
        s: u32,
        /// Frequency h for the proof parameters.
        #[arg(long, default_value_t = 1)]
        h: u64,
        #[arg(long, default_value_t = 1)]
        kprod: u64,
        #[arg(long, default_value_t = 1)]
        k1: u64,
        #[arg(long, default_value_t = 0.01)]
        eps: f64,
    },
    /// Randomized sweeps over the hard inequalities (seed 0x5EED).
    Verify {
        /// Smaller case counts.
        #[arg(long)]
        quick: bool,
    },
    /// Exact W and D along N next to the predicted bounds.
    Scan {
        #[arg(long, allow_hyphen_values = true)]
        expr: String,
        /// Comma-separated N values; default 2^10..2^16.
        #[arg(long, value_delimiter = ',')]
        n_list: Vec<u64>,
        #[arg(long)]
        a_max: Option<u64>,
        #[arg(long, default_value = "1")]
        t: String,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SmoothOp {
    Coeffs,
    Eval,
    Tail,
    Pnorm,
    Approx,
}

#[derive(Args)]
struct SeqSource {
    /// GPSEQ1 file.
    #[arg(long = "in", conflicts_with = "expr")]
    input: Option<PathBuf>,
    #[arg(long, requires = "n", allow_hyphen_values = true)]
    expr: Option<String>,
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Args)]
struct PointSource {
    /// Text file of numbers in [0, 1), separated by whitespace or commas.
    #[arg(long, conflicts_with = "expr")]
    points: Option<PathBuf>,
    #[arg(long, requires = "n", allow_hyphen_values = true)]
    expr: Option<String>,
    #[arg(long)]
    n: Option<usize>,
}

enum Failure {
    Core(Error),
    Io(io::Error),
    Usage(String),
    Violation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

type Res<T> = Result<T, Failure>;

struct Ctx {
    precision: u32,
    format: Option<Format>,
    out: Option<PathBuf>,
}

impl Ctx {
    fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }

    fn sink(&self) -> Res<Box<dyn Write>> {
        Ok(match &self.out {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }

    fn emit_text(&self, text: &str) -> Res<()> {
        let mut w = self.sink()?;
        writeln!(w, "{text}")?;
        w.flush()?;
        Ok(())
    }

    /// JSON, or CSV built from the object's scalar fields (or an array of
    /// such objects).
    fn emit(&self, value: &Value, default: Format) -> Res<()> {
        match self.format_or(default) {
            Format::Json => self.emit_text(&serde_json::to_string_pretty(value).expect("json")),
            Format::Csv => self.emit_text(&to_csv(value)),
        }
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Array(a) => a.iter().map(scalar).collect::<Vec<_>>().join(" "),
        other => other.to_string(),
    }
}

fn to_csv(value: &Value) -> String {
    let rows: Vec<&serde_json::Map<String, Value>> = match value {
        Value::Array(a) => a.iter().filter_map(Value::as_object).collect(),
        Value::Object(o) => vec![o],
        _ => return scalar(value),
    };
    let Some(first) = rows.first() else {
        return String::new();
    };
    let keys: Vec<&String> = first.keys().collect();
    let mut out = keys.iter().map(|k| k.as_str()).collect::<Vec<_>>().join(",");
    for r in rows {
        out.push('\n');
        out.push_str(&keys.iter().map(|k| scalar(&r[k.as_str()])).collect::<Vec<_>>().join(","));
    }
    out
}

fn parse_expr(text: &str) -> Res<GpExpr> {
    Ok(parse(text)?)
}

fn load_sequence(src: &SeqSource, ctx: &Ctx) -> Res<BinarySequence> {
    match (&src.input, &src.expr, src.n) {
        (Some(p), _, _) => Ok(BinarySequence::read_from(File::open(p)?)?),
        (None, Some(e), Some(n)) => Ok(generate(&parse_expr(e)?, n, ctx.precision)?),
        _ => Err(Failure::Usage("give --in FILE or --expr EXPR --n N".into())),
    }
}

fn load_points(src: &PointSource, ctx: &Ctx) -> Res<Vec<f64>> {
    match (&src.points, &src.expr, src.n) {
        (Some(p), _, _) => {
            let mut text = String::new();
            File::open(p)?.read_to_string(&mut text)?;
            let pts = text
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<f64>().map_err(|_| Failure::Usage(format!("not a number: {s}"))))
                .collect::<Res<Vec<f64>>>()?;
            if pts.is_empty() {
                return Err(Failure::Usage("no points in file".into()));
            }
            Ok(pts)
        }
        (None, Some(e), Some(n)) if n > 0 => Ok(fractional_parts(&parse_expr(e)?, n, ctx.precision)?),
        _ => Err(Failure::Usage("give --points FILE or --expr EXPR --n N (N >= 1)".into())),
    }
}

fn run(cli: Cli) -> Res<()> {
    if let Some(k) = cli.threads {
        if k == 0 {
            return Err(Failure::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let ctx = Ctx {
        precision: cli.precision,
        format: cli.format,
        out: cli.out,
    };
    match cli.command {
        Command::Gen { expr, n } => {
            let seq = generate(&parse_expr(&expr)?, n, ctx.precision)?;
            let mut w = ctx.sink()?;
            seq.write_to(&mut w)?;
            w.flush()?;
        }
        Command::Welldist { src, a_max, naive } => {
            let seq = load_sequence(&src, &ctx)?;
            let rep = if naive {
                well_distribution_naive(&seq)?
            } else {
                well_distribution(&seq, a_max)
            };
            ctx.emit(&serde_json::to_value(rep).expect("json"), Format::Json)?;
        }
        Command::Disc { src, naive } => {
            let pts = load_points(&src, &ctx)?;
            let rep = if naive { discrepancy_naive(&pts)? } else { discrepancy(&pts)? };
            ctx.emit(&serde_json::to_value(rep).expect("json"), Format::Json)?;
        }
        Command::Expsum { expr, n, h, a, b } => {
            let z = exp_sum(&parse_expr(&expr)?, h, n, a, b, ctx.precision)?;
            let m = (n as i64 - b).div_euclid(a as i64).max(1) as f64;
            let v = json!({"re": z.re, "im": z.im, "abs": z.norm(), "normalized": z.norm() / m});
            ctx.emit(&v, Format::Json)?;
        }
        Command::Erdosturan { src, h } => {
            let pts = load_points(&src, &ctx)?;
            let d = discrepancy(&pts)?.d;
            let rhs = erdos_turan_rhs(&pts, h)?;
            let v = json!({"n": pts.len(), "H": h, "d": d, "rhs": rhs, "holds": d <= rhs + 1e-12});
            ctx.emit(&v, Format::Json)?;
        }
        Command::Smooth { what, r, delta, tau, k, p, x, expr, n } => {
            let params = SmoothingParams::new(r, delta, tau, k)?;
            let v = match what {
                SmoothOp::Coeffs => Value::Array(
                    (-(k as i64)..=k as i64)
                        .map(|j| {
                            let c = g_fourier_coeff(j, &params);
                            json!({"k": j, "re": c.re, "im": c.im, "abs": c.norm()})
                        })
                        .collect(),
                ),
                SmoothOp::Eval => {
                    if x.is_empty() {
                        return Err(Failure::Usage("eval needs --x".into()));
                    }
                    Value::Array(
                        x.iter()
                            .map(|&x| {
                                let g = g_eval(x, &params);
                                json!({"x": x, "re": g.re, "im": g.im})
                            })
                            .collect(),
                    )
                }
                SmoothOp::Tail => serde_json::to_value(fourier_tail(&params)?).expect("json"),
                SmoothOp::Pnorm => serde_json::to_value(pnorm_check(&params, p)?).expect("json"),
                SmoothOp::Approx => {
                    let (Some(e), Some(n)) = (expr, n) else {
                        return Err(Failure::Usage("approx needs --expr and --n".into()));
                    };
                    let rep = approximation_error(&parse_expr(&e)?, n, &params, ctx.precision)?;
                    serde_json::to_value(rep).expect("json")
                }
            };
            ctx.emit(&v, Format::Json)?;
        }
        Command::Typeprobe { gammas, expr, q } => {
            let consts: Vec<RealConst> = match (expr, gammas.is_empty()) {
                (Some(e), true) => {
                    let shape = parse_expr(&e)?.recognize_theorem_shape()?;
                    shape.type_triple().into_iter().map(RealConst::new).collect()
                }
                (None, false) => gammas.iter().map(|g| RealConst::parse(g)).collect::<Result<_, _>>()?,
                _ => return Err(Failure::Usage("give either --gamma (repeatable) or --expr".into())),
            };
            let est = type_probe(&consts, q)?;
            ctx.emit(&serde_json::to_value(est).expect("json"), Format::Json)?;
        }
        Command::Cf { x, count } => {
            let c = RealConst::parse(&x)?;
            let cf = continued_fraction(&c, count)?;
            let v = json!({
                "x": c.to_string(),
                "cf": cf.to_string(),
                "quotients": cf.quotients().iter().map(|q| q.to_string()).collect::<Vec<_>>(),
                "convergents": cf.convergents().iter().map(|(p, q)| format!("{p}/{q}")).collect::<Vec<_>>(),
                "exact": cf.exact_input,
                "convergentInequality": convergent_inequality_holds(&c.ball(ctx.precision.max(4096)), &cf),
            });
            match ctx.format_or(Format::Json) {
                Format::Json => ctx.emit(&v, Format::Json)?,
                Format::Csv => {
                    let rows: Vec<Value> = cf
                        .quotients()
                        .iter()
                        .zip(cf.convergents())
                        .enumerate()
                        .map(|(i, (a, (p, q)))| json!({"k": i, "a": a.to_string(), "p": p.to_string(), "q": q.to_string()}))
                        .collect();
                    ctx.emit(&Value::Array(rows), Format::Csv)?;
                }
            }
        }
        Command::Bounds { d, t, a, n, s, h, kprod, k1, eps } => {
            let t = parse_ratio(&t)?;
            let (p1, p2, p3) = (prop1_exponents(d, &t)?, prop2_exponents(d, &t)?, prop3_exponents(d, &t)?);
            let key = key_lemma_exponents(d, &t, s)?;
            let eta = eta_composition(d, &t)?;
            let thm = theorem_eta(d, &t)?;
            if ctx.format_or(Format::Json) == Format::Csv {
                let mut rows = vec!["name,aExp,nExp".to_string()];
                for (name, set) in [("prop1", &p1), ("prop2", &p2), ("prop3", &p3)] {
                    rows.push(format!("{name},{},{}", ratio_str(&set.a_exp), ratio_str(&set.n_exp)));
                }
                rows.push(format!("keyLemma,{},{}", ratio_str(&key.ak_exp), ratio_str(&key.n_exp)));
                rows.push(format!("threshold,{},", ratio_str(&eta.threshold)));
                rows.push(format!("eta,{},", ratio_str(&eta.candidate)));
                return ctx.emit_text(&rows.join("\n"));
            }
            let mut v = json!({
                "d": d,
                "t": ratio_str(&t),
                "prop1": p1,
                "prop2": p2,
                "prop3": p3,
                "keyLemma": {"s": s, "akExp": ratio_str(&key.ak_exp), "nExp": ratio_str(&key.n_exp)},
                "threshold": ratio_str(&eta.threshold),
                "etaSmallStep": ratio_str(&eta.small_step),
                "etaLargeStep": ratio_str(&eta.large_step),
                "theorem": thm,
            });
            if let (Some(a), Some(n)) = (a, n) {
                v["evaluated"] = json!({
                    "a": a,
                    "N": n,
                    "prop1": prop_bound(Prop::One, d, &t, a, n)?,
                    "prop2": prop_bound(Prop::Two, d, &t, a, n)?,
                    "prop3": prop_bound(Prop::Three, d, &t, a, n)?,
                    "proofParameters": proof_parameters(d, &t, n, a, h, s, kprod, k1, eps)?,
                });
            } else if a.is_some() || n.is_some() {
                return Err(Failure::Usage("--a and --n go together".into()));
            }
            ctx.emit(&v, Format::Json)?;
        }
        Command::Verify { quick } => {
            let size = if quick { SuiteSize::QUICK } else { SuiteSize::FULL };
            let reps = run_suite(size, ctx.precision)?;
            ctx.emit(&serde_json::to_value(&reps).expect("json"), Format::Json)?;
            let bad: Vec<&str> = reps.iter().filter(|r| !r.passed()).map(|r| r.name.as_str()).collect();
            if !bad.is_empty() {
                return Err(Failure::Violation(format!("violated: {}", bad.join(", "))));
            }
        }
        Command::Scan { expr, n_list, a_max, t } => {
            let t = parse_ratio(&t)?;
            let ns = if n_list.is_empty() {
                (10..=16).map(|j| 1u64 << j).collect()
            } else {
                n_list
            };
            let rows = bound_scan(&parse_expr(&expr)?, &ns, a_max, &t, ctx.precision)?;
            match ctx.format_or(Format::Csv) {
                Format::Csv => {
                    let mut text = SCAN_CSV_HEADER.to_string();
                    for r in &rows {
                        text.push('\n');
                        text.push_str(&r.csv());
                    }
                    ctx.emit_text(&text)?;
                }
                Format::Json => ctx.emit(&serde_json::to_value(&rows).expect("json"), Format::Json)?,
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (code, msg) = match f {
                Failure::Core(e @ Error::PrecisionExhausted { .. }) => (3, e.to_string()),
                Failure::Core(e) => (2, e.to_string()),
                Failure::Io(e) => (2, e.to_string()),
                Failure::Usage(m) => (2, m),
                Failure::Violation(m) => (1, m),
            };
            eprintln!("gprand: {msg}");
            ExitCode::from(code)
        }
    }
}
