//! `subgray`: generate, encode, decode, count and verify subspace Gray codes.
//!
//! Exit codes: 0 success, 1 I/O or verification failure, 2 invalid
//! parameters or input, 3 dimension mismatch, 4 unparsable sequence file.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::{json, Value};
use subgray_core::grassmann::{GrayError, RandomChoices};
use subgray_core::projective::{self, ProjError};
use subgray_core::qcombin;
use subgray_core::textio::{self, ParseError, SequenceFile};
use subgray_core::{
    build_general, verify_gray, BigUint, Codec, CodecError, Field, LinalgError, SimpleCode, Subspace,
};

const DEFAULT_MAX_Q: u64 = 65536;

#[derive(Parser)]
#[command(name = "subgray", version, about = "Gray codes for subspaces of GF(q)^n")]
struct Cli {
    /// Emit JSON instead of the text formats.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Params {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    /// Field order, as `q` or `p^m`.
    #[arg(long)]
    q: String,
}

#[derive(Subcommand)]
enum Command {
    /// Write the simple (n, k; q) Gray code, or a random one with --seed.
    Gen {
        #[command(flatten)]
        p: Params,
        /// Build a code from random construction choices instead.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Print the subspace at a given index of the simple code.
    Encode {
        #[command(flatten)]
        p: Params,
        /// Decimal index.
        #[arg(long)]
        index: String,
        /// Use the dual of the (n, n-k) code.
        #[arg(long)]
        via_dual: bool,
    },
    /// Print the index of each subspace block read from a file or stdin.
    Decode {
        #[command(flatten)]
        p: Params,
        #[arg(long, short)]
        input: Option<PathBuf>,
        /// Skip zero columns and compute coefficients directly.
        #[arg(long)]
        fast: bool,
        /// Use the dual of the (n, n-k) code.
        #[arg(long)]
        via_dual: bool,
    },
    /// Number of k-subspaces, or a lower bound on the number of Gray codes.
    Count {
        #[command(flatten)]
        p: Params,
        #[arg(long)]
        lower_bound: bool,
    },
    /// Write a Gray code through all subspaces of GF(q)^n for n = 1, 3, 5.
    Proj {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: String,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Counting certificate against cyclic codes for even n.
    Nonexist {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: String,
    },
    /// Check a GRAY or PROJ file.
    Verify { file: PathBuf },
    /// Median encode and decode times over random indices.
    Bench {
        /// Comma-separated ambient dimensions.
        #[arg(long, value_delimiter = ',', default_value = "16,32,64,128")]
        n: Vec<usize>,
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, default_value = "2")]
        q: String,
        #[arg(long, default_value_t = 21)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

struct Failure {
    code: u8,
    msg: String,
}

fn fail(code: u8, msg: impl Into<String>) -> Failure {
    Failure { code, msg: msg.into() }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        fail(1, format!("I/O error: {e}"))
    }
}

impl From<CodecError> for Failure {
    fn from(e: CodecError) -> Self {
        let code = match &e {
            CodecError::Dimension { .. } | CodecError::Linalg(LinalgError::FieldMismatch(..)) => 3,
            _ => 2,
        };
        fail(code, e.to_string())
    }
}

impl From<GrayError> for Failure {
    fn from(e: GrayError) -> Self {
        fail(2, e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn max_q() -> u64 {
    std::env::var("GRAY_MAX_Q").ok().and_then(|v| v.parse().ok()).unwrap_or(DEFAULT_MAX_Q)
}

fn field(spec: &str) -> Result<Field, Failure> {
    let f = Field::parse(spec).map_err(|e| fail(2, e.to_string()))?;
    let cap = max_q();
    if f.q() as u64 > cap {
        return Err(fail(2, format!("q = {} exceeds GRAY_MAX_Q = {cap}", f.q())));
    }
    Ok(f)
}

fn params(p: &Params) -> Result<Field, Failure> {
    let f = field(&p.q)?;
    if p.k > p.n {
        return Err(fail(2, format!("k = {} exceeds n = {}", p.k, p.n)));
    }
    Ok(f)
}

fn sink(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn read_input(path: &Option<PathBuf>) -> Result<String, Failure> {
    let mut text = String::new();
    match path {
        Some(p) => File::open(p)?.read_to_string(&mut text)?,
        None => io::stdin().read_to_string(&mut text)?,
    };
    Ok(text)
}

fn rows_json(s: &Subspace) -> Value {
    json!((0..s.dim()).map(|i| s.row(i).to_vec()).collect::<Vec<_>>())
}

fn print_json(out: &mut dyn Write, v: &Value) -> Outcome {
    serde_json::to_writer(&mut *out, v).map_err(|e| fail(1, e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

fn gen(p: &Params, seed: Option<u64>, output: &Option<PathBuf>, as_json: bool) -> Outcome {
    let f = params(p)?;
    let mut out = sink(output)?;
    let code = SimpleCode::new(&f, p.n, p.k)?;
    let items: Box<dyn Iterator<Item = Subspace>> = match seed {
        Some(seed) => Box::new(build_general(p.n, p.k, &f, &mut RandomChoices::new(seed))?.items.into_iter()),
        None => Box::new(code.iter()),
    };
    let len = qcombin::gaussian(p.n, p.k, f.q() as u64).map_err(|e| fail(2, e.to_string()))?;
    if as_json {
        let v = json!({
            "kind": "GRAY", "n": p.n, "k": p.k, "q": f.name(), "len": len.to_string(), "cyclic": true,
            "items": items.map(|s| rows_json(&s)).collect::<Vec<_>>(),
        });
        print_json(&mut out, &v)?;
    } else {
        textio::write_gray_header(&mut out, p.n, p.k, &f, &len.to_string(), true)?;
        for (i, s) in items.enumerate() {
            textio::write_block(&mut out, &s, i == 0)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn parse_index(s: &str) -> Result<BigUint, Failure> {
    s.trim().parse().map_err(|_| fail(2, format!("index {s:?} is not a natural number")))
}

fn encode(p: &Params, index: &str, via_dual: bool, as_json: bool) -> Outcome {
    let f = params(p)?;
    let m = parse_index(index)?;
    let c = Codec::new(&f, p.n, p.k)?;
    let s = if via_dual { c.encode_via_dual(&m)? } else { c.encode(&m)? };
    let mut out = sink(&None)?;
    if as_json {
        let v = json!({"n": p.n, "k": p.k, "q": f.name(), "index": m.to_string(), "rows": rows_json(&s)});
        print_json(&mut out, &v)?;
    } else {
        out.write_all(textio::format_subspace(&s).as_bytes())?;
    }
    out.flush()?;
    Ok(())
}

/// Blanks a `GRAY`/`PROJ` header line so piped `gen` output decodes directly.
fn strip_sequence_header(text: &str) -> String {
    let mut lines: Vec<&str> = text.lines().collect();
    if let Some(first) = lines.iter_mut().find(|l| !l.trim().is_empty()) {
        let t = first.trim_start();
        if t.starts_with("GRAY") || t.starts_with("PROJ") {
            *first = "";
        }
    }
    lines.join("\n")
}

fn decode(p: &Params, input: &Option<PathBuf>, fast: bool, via_dual: bool, as_json: bool) -> Outcome {
    let f = params(p)?;
    let c = Codec::new(&f, p.n, p.k)?;
    let text = strip_sequence_header(&read_input(input)?);
    let blocks = textio::parse_blocks(&text).map_err(|e| fail(2, format!("malformed matrix: {e}")))?;
    let mut out = sink(&None)?;
    let mut results = Vec::with_capacity(blocks.len());
    for b in &blocks {
        if b.n != p.n || b.k != p.k {
            return Err(fail(
                3,
                format!("line {}: block is {} x {}, expected {} x {}", b.line, b.k, b.n, p.k, p.n),
            ));
        }
        if !b.field.same_as(&f) {
            return Err(fail(3, format!("line {}: block is over GF({}), expected GF({})", b.line, b.field.name(), f.name())));
        }
        let s = b.subspace().map_err(|e| fail(2, format!("malformed matrix: {e}")))?;
        let m = match (via_dual, fast) {
            (true, _) => c.decode_via_dual(&s)?,
            (false, true) => c.decode_fast(&s)?,
            (false, false) => c.decode(&s)?,
        };
        if as_json {
            results.push(json!({"index": m.to_string(), "canonical_input": b.is_canonical()}));
        } else {
            writeln!(out, "{m}")?;
        }
    }
    if as_json {
        print_json(&mut out, &json!({"n": p.n, "k": p.k, "q": f.name(), "results": results}))?;
    }
    out.flush()?;
    Ok(())
}

fn count(p: &Params, lower_bound: bool, as_json: bool) -> Outcome {
    let f = params(p)?;
    let q = f.q() as u64;
    let value = if lower_bound { qcombin::count_lower_bound(p.n, p.k, q) } else { qcombin::gaussian(p.n, p.k, q) }
        .map_err(|e| fail(2, e.to_string()))?;
    let mut out = sink(&None)?;
    if as_json {
        let key = if lower_bound { "lower_bound" } else { "count" };
        print_json(&mut out, &json!({"n": p.n, "k": p.k, "q": f.name(), key: value.to_string()}))?;
    } else {
        writeln!(out, "{value}")?;
    }
    out.flush()?;
    Ok(())
}

fn proj(n: usize, q: &str, output: &Option<PathBuf>, as_json: bool) -> Outcome {
    let f = field(q)?;
    let s = projective::build_full(&f, n).map_err(|e| match e {
        ProjError::Unsupported(_) if n % 2 == 1 => {
            fail(2, format!("unsupported: n = {n}; cyclic codes through all subspaces are open for odd n >= 7"))
        }
        ProjError::Unsupported(_) => fail(
            2,
            format!("unsupported: n = {n} is even; no cyclic code exists, see `nonexist --n {n} --q {}`", f.name()),
        ),
        other => fail(2, format!("unsupported: {other}")),
    })?;
    let mut out = sink(output)?;
    if as_json {
        let v = json!({
            "kind": "PROJ", "n": s.n, "q": f.name(), "len": s.items.len(), "cyclic": s.cyclic,
            "items": s.items.iter().map(rows_json).collect::<Vec<_>>(),
        });
        print_json(&mut out, &v)?;
    } else {
        textio::write_proj(&mut out, &s)?;
    }
    out.flush()?;
    Ok(())
}

fn nonexist(n: usize, q: &str, as_json: bool) -> Outcome {
    let f = field(q)?;
    let r = projective::nonexistence_certificate(n, f.q() as u64).map_err(|e| fail(2, e.to_string()))?;
    let mut out = sink(&None)?;
    if as_json {
        let v = json!({
            "n": r.n, "q": f.name(),
            "middle": r.middle.to_string(),
            "neighbors": r.neighbors.to_string(),
            "deficit": r.deficit().map(|d| d.to_string()),
            "ratio_identity": r.ratio_identity,
            "ratio_exceeds_one": r.ratio_exceeds_one,
            "cyclic_excluded": r.cyclic_excluded(),
            "noncyclic_excluded": r.noncyclic_excluded(),
        });
        print_json(&mut out, &v)?;
    } else {
        match r.deficit() {
            Some(d) => writeln!(out, "{} < {} deficit={d}", r.neighbors, r.middle)?,
            None => writeln!(out, "{} >= {}", r.neighbors, r.middle)?,
        }
    }
    out.flush()?;
    Ok(())
}

fn verify(file: &PathBuf, as_json: bool) -> Outcome {
    let mut text = String::new();
    File::open(file)?.read_to_string(&mut text)?;
    let parsed = textio::parse_sequence(&text).map_err(|e: ParseError| fail(4, e.to_string()))?;
    let (kind, checks, notes) = match &parsed {
        SequenceFile::Gray(s) => {
            let r = verify_gray(s);
            ("GRAY", r.summary(), r.simplicity())
        }
        SequenceFile::Proj(s) => ("PROJ", projective::verify_subspace(s).summary(), Vec::new()),
    };
    let pass = checks.iter().all(|(_, ok)| *ok);
    let mut out = sink(&None)?;
    if as_json {
        let list = |v: &[(String, bool)]| -> Vec<Value> {
            v.iter().map(|(name, ok)| json!({"check": name, "pass": ok})).collect()
        };
        print_json(&mut out, &json!({"kind": kind, "checks": list(&checks), "info": list(&notes), "pass": pass}))?;
    } else {
        for (name, ok) in &checks {
            writeln!(out, "{}: {name}", if *ok { "PASS" } else { "FAIL" })?;
        }
        for (name, ok) in &notes {
            writeln!(out, "info: {name}: {}", if *ok { "yes" } else { "no" })?;
        }
    }
    out.flush()?;
    if pass {
        Ok(())
    } else {
        let failed: Vec<&str> = checks.iter().filter(|(_, ok)| !ok).map(|(n, _)| n.as_str()).collect();
        Err(fail(1, format!("verification failed: {}", failed.join(", "))))
    }
}

fn median(mut v: Vec<Duration>) -> Duration {
    v.sort();
    v[v.len() / 2]
}

fn random_below(rng: &mut StdRng, bound: &BigUint) -> BigUint {
    let bits = bound.bits();
    loop {
        let bytes: Vec<u8> = (0..bits.div_ceil(8)).map(|_| rng.gen()).collect();
        let m = BigUint::from_bytes_le(&bytes) % (BigUint::from(1u32) << bits);
        if &m < bound {
            return m;
        }
    }
}

fn bench(ns: &[usize], k: usize, q: &str, samples: usize, seed: u64, as_json: bool) -> Outcome {
    let f = field(q)?;
    if samples == 0 {
        return Err(fail(2, "samples must be positive"));
    }
    let mut rng = StdRng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for &n in ns {
        if k > n {
            return Err(fail(2, format!("k = {k} exceeds n = {n}")));
        }
        let c = Codec::new(&f, n, k)?;
        let (mut enc, mut dec, mut fast) = (Vec::new(), Vec::new(), Vec::new());
        for _ in 0..samples {
            let m = random_below(&mut rng, c.len());
            let t = Instant::now();
            let w = c.encode(&m)?;
            enc.push(t.elapsed());
            let t = Instant::now();
            let d = c.decode(&w)?;
            dec.push(t.elapsed());
            let t = Instant::now();
            let d_fast = c.decode_fast(&w)?;
            fast.push(t.elapsed());
            if d != m || d_fast != m {
                return Err(fail(1, format!("round trip failed at n = {n}, index {m}")));
            }
        }
        rows.push((n, median(enc), median(dec), median(fast)));
    }
    let mut out = sink(&None)?;
    let us = |d: Duration| d.as_secs_f64() * 1e6;
    if as_json {
        let list: Vec<Value> = rows
            .iter()
            .map(|&(n, e, d, fd)| json!({"n": n, "encode_us": us(e), "decode_us": us(d), "decode_fast_us": us(fd)}))
            .collect();
        print_json(&mut out, &json!({"k": k, "q": f.name(), "samples": samples, "rows": list}))?;
    } else {
        writeln!(out, "{:>6} {:>12} {:>12} {:>14}", "n", "encode_us", "decode_us", "decode_fast_us")?;
        for (n, e, d, fd) in rows {
            writeln!(out, "{n:>6} {:>12.2} {:>12.2} {:>14.2}", us(e), us(d), us(fd))?;
        }
    }
    out.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    let j = cli.json;
    match &cli.command {
        Command::Gen { p, seed, output } => gen(p, *seed, output, j),
        Command::Encode { p, index, via_dual } => encode(p, index, *via_dual, j),
        Command::Decode { p, input, fast, via_dual } => decode(p, input, *fast, *via_dual, j),
        Command::Count { p, lower_bound } => count(p, *lower_bound, j),
        Command::Proj { n, q, output } => proj(*n, q, output, j),
        Command::Nonexist { n, q } => nonexist(*n, q, j),
        Command::Verify { file } => verify(file, j),
        Command::Bench { n, k, q, samples, seed } => bench(n, *k, q, *samples, *seed, j),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, msg }) => {
            eprintln!("subgray: {msg}");
            ExitCode::from(code)
        }
    }
}
