//! Command-line front end. `run` returns the process exit code:
//! 0 success, 1 usage or other errors, 2 parameters not distinguishable,
//! 3 attack or verification failure.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::attack::{
    full_attack, verify_equivalence, AttackConfig, AttackError, Discovery, JsonLinesTrace,
    NoTrace, TraceSink,
};
use crate::codes::LinearCode;
use crate::distinguisher::{
    interval, is_rlce_like_at, theorem_bound, DistinguisherError, DistinguisherInterval,
};
use crate::formats::{
    ciphertext_from_json, ciphertext_to_json, message_from_json, message_to_json,
    public_key_from_json, public_key_to_json, secret_key_from_json, secret_key_to_json,
    FieldVector,
};
use crate::rlce::{
    decrypt, encrypt, keygen, random_message, ForcedZero, KeygenOptions, Preset, RlceParams,
};
use crate::seed::parse_hex_seed;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NOT_DISTINGUISHABLE: i32 = 2;
pub const EXIT_ATTACK_FAILED: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "rlce", version, about = "RLCE key generation, encryption and key-recovery lab")]
pub struct Cli {
    /// Seed as hex; every random choice derives from it
    #[arg(long, global = true, default_value = "00")]
    seed: String,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Worker threads (0 = one per core)
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a key pair
    Keygen(KeygenArgs),
    /// Encrypt a message (random when --message is absent)
    Encrypt(EncryptArgs),
    /// Decrypt with a secret key
    Decrypt(DecryptArgs),
    /// Run the square-code distinguisher on a public key
    Distinguish(DistinguishArgs),
    /// Recover an equivalent secret key from a public key
    Attack(AttackArgs),
    /// Check a secret key against a public key
    Verify(VerifyArgs),
    /// Show parameter sets and their shortening intervals
    Params(ParamsArgs),
}

#[derive(Args, Debug, Clone)]
struct ParamSelect {
    /// Named parameter set id0..id5
    #[arg(long, conflicts_with_all = ["n", "k", "w", "t", "m"])]
    preset: Option<String>,
    #[arg(long, requires_all = ["k", "w", "m"])]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    w: Option<usize>,
    /// Error weight; floor((n-k)/2) by default
    #[arg(long)]
    t: Option<usize>,
    /// Field degree, q = 2^m
    #[arg(long)]
    m: Option<u32>,
}

impl ParamSelect {
    fn resolve(&self) -> Result<Option<RlceParams>, String> {
        if let Some(name) = &self.preset {
            let preset: Preset = name.parse().map_err(|e| format!("{e}"))?;
            return Ok(Some(preset.params()));
        }
        match (self.n, self.k, self.w, self.m) {
            (Some(n), Some(k), Some(w), Some(m)) => {
                let mut p = RlceParams::new(n, k, w, m);
                if let Some(t) = self.t {
                    p = p.with_t(t);
                }
                p.validate().map_err(|e| e.to_string())?;
                Ok(Some(p))
            }
            (None, None, None, None) if self.t.is_none() => Ok(None),
            _ => Err("explicit parameters need all of --n --k --w --m".into()),
        }
    }
}

#[derive(Args, Debug)]
struct KeygenArgs {
    #[command(flatten)]
    params: ParamSelect,
    #[arg(long = "pub")]
    public: PathBuf,
    #[arg(long = "sec")]
    secret: PathBuf,
    /// Keep mixers with a zero off-diagonal entry instead of resampling
    #[arg(long)]
    allow_degenerate: bool,
    /// Force a zero mixer entry, e.g. 3:c or 0:d (repeatable)
    #[arg(long = "force-zero", value_name = "PAIR:c|d")]
    force_zero: Vec<String>,
}

#[derive(Args, Debug)]
struct EncryptArgs {
    #[arg(long = "pub")]
    public: PathBuf,
    #[arg(long)]
    message: Option<PathBuf>,
    /// Where to store the generated message when --message is absent
    #[arg(long)]
    message_out: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct DecryptArgs {
    #[arg(long = "sec")]
    secret: PathBuf,
    #[arg(long)]
    ct: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DistinguishArgs {
    #[arg(long = "pub")]
    public: PathBuf,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    /// Shortening size; middle of the interval by default
    #[arg(long)]
    ell: Option<usize>,
}

#[derive(Args, Debug)]
struct AttackArgs {
    #[arg(long = "pub")]
    public: PathBuf,
    /// Recovered secret key file
    #[arg(long)]
    out: PathBuf,
    /// JSON-lines trace file
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    ell: Option<usize>,
    #[arg(long, default_value_t = 16)]
    max_shortenings: usize,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long = "pub")]
    public: PathBuf,
    #[arg(long = "sec")]
    secret: PathBuf,
    #[arg(long, default_value_t = 100)]
    trials: usize,
}

#[derive(Args, Debug)]
struct ParamsArgs {
    #[command(flatten)]
    params: ParamSelect,
}

/// Failure carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn new(code: i32, message: impl ToString) -> Self {
        Failure {
            code,
            message: message.to_string(),
        }
    }

    fn error(message: impl ToString) -> Self {
        Failure::new(EXIT_ERROR, message)
    }
}

type CmdResult = Result<(), Failure>;

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut (dyn Write + Send), err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    match execute(&cli, out) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn execute(cli: &Cli, out: &mut (dyn Write + Send)) -> CmdResult {
    let seed = parse_hex_seed(&cli.seed).map_err(|e| Failure::error(format!("--seed: {e}")))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(Failure::error)?;
    pool.install(|| match &cli.command {
        Command::Keygen(a) => cmd_keygen(a, &seed, cli.format, out),
        Command::Encrypt(a) => cmd_encrypt(a, &seed, cli.format, out),
        Command::Decrypt(a) => cmd_decrypt(a, cli.format, out),
        Command::Distinguish(a) => cmd_distinguish(a, &seed, cli.format, out),
        Command::Attack(a) => cmd_attack(a, &seed, cli.format, out),
        Command::Verify(a) => cmd_verify(a, &seed, cli.format, out),
        Command::Params(a) => cmd_params(a, cli.format, out),
    })
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::error(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> CmdResult {
    fs::write(path, contents).map_err(|e| Failure::error(format!("{}: {e}", path.display())))
}

fn emit(out: &mut (dyn Write + Send), text: impl AsRef<str>) -> CmdResult {
    out.write_all(text.as_ref().as_bytes())
        .map_err(|e| Failure::error(format!("stdout: {e}")))
}

fn json_line(value: &serde_json::Value) -> String {
    format!("{}\n", serde_json::to_string_pretty(value).expect("values serialize"))
}

fn interval_text(range: &Result<DistinguisherInterval, DistinguisherError>) -> String {
    match range {
        Ok(i) => format!("{} {}", i.ell_min, i.ell_max),
        Err(_) => "not distinguishable".into(),
    }
}

fn interval_json(range: &Result<DistinguisherInterval, DistinguisherError>) -> serde_json::Value {
    match range {
        Ok(i) => json!({"ell_min": i.ell_min, "ell_max": i.ell_max}),
        Err(_) => serde_json::Value::Null,
    }
}

fn parse_force_zero(spec: &str) -> Result<(usize, ForcedZero), Failure> {
    let bad = || Failure::error(format!("--force-zero {spec:?}: expected PAIR:c or PAIR:d"));
    let (pair, which) = spec.split_once(':').ok_or_else(bad)?;
    let pair = pair.trim().parse().map_err(|_| bad())?;
    let which = match which.trim() {
        "c" | "C" => ForcedZero::C,
        "d" | "D" => ForcedZero::D,
        _ => return Err(bad()),
    };
    Ok((pair, which))
}

fn cmd_keygen(a: &KeygenArgs, seed: &[u8], format: Format, out: &mut (dyn Write + Send)) -> CmdResult {
    let params = a
        .params
        .resolve()
        .map_err(Failure::error)?
        .ok_or_else(|| Failure::error("keygen needs --preset or --n --k --w --m"))?;
    let options = KeygenOptions {
        force_nondegenerate: !a.allow_degenerate,
        forced_zeros: a
            .force_zero
            .iter()
            .map(|s| parse_force_zero(s))
            .collect::<Result<_, _>>()?,
        reduction_poly: None,
    };
    let (pk, sk) = keygen(&params, seed, &options).map_err(Failure::error)?;
    write_file(&a.public, &public_key_to_json(&pk))?;
    write_file(&a.secret, &secret_key_to_json(&sk))?;
    let range = interval(&params);
    let (rows, cols) = (pk.matrix().rows(), pk.matrix().cols());
    match format {
        Format::Text => emit(
            out,
            format!(
                "{params}\npublic key {rows}x{cols}\ninterval {}\n",
                interval_text(&range)
            ),
        ),
        Format::Csv => emit(
            out,
            format!(
                "n,k,w,t,m,rows,cols,ell_min,ell_max\n{},{},{},{},{},{rows},{cols},{},{}\n",
                params.n,
                params.k,
                params.w,
                params.t,
                params.m,
                range.as_ref().map(|i| i.ell_min.to_string()).unwrap_or_default(),
                range.as_ref().map(|i| i.ell_max.to_string()).unwrap_or_default(),
            ),
        ),
        Format::Json => emit(
            out,
            json_line(&json!({"params": params, "rows": rows, "cols": cols,
                "interval": interval_json(&range)})),
        ),
    }
}

fn cmd_encrypt(a: &EncryptArgs, seed: &[u8], format: Format, out: &mut (dyn Write + Send)) -> CmdResult {
    let pk = public_key_from_json(&read(&a.public)?).map_err(Failure::error)?;
    let message = match &a.message {
        Some(path) => {
            let m = message_from_json(&read(path)?).map_err(Failure::error)?;
            if *m.field != **pk.field() {
                return Err(Failure::error("message and key use different fields"));
            }
            m.values
        }
        None => {
            let values = random_message(pk.params(), pk.field(), seed);
            if let Some(path) = &a.message_out {
                let doc = FieldVector {
                    field: pk.field().clone(),
                    values: values.clone(),
                    seed: Some(seed.to_vec()),
                };
                write_file(path, &message_to_json(&doc))?;
            }
            values
        }
    };
    let c = encrypt(&pk, &message, seed).map_err(Failure::error)?;
    let doc = FieldVector {
        field: pk.field().clone(),
        values: c,
        seed: Some(seed.to_vec()),
    };
    write_file(&a.out, &ciphertext_to_json(&doc))?;
    match format {
        Format::Text => emit(out, format!("ciphertext of length {} written\n", doc.values.len())),
        Format::Csv => emit(out, format!("length\n{}\n", doc.values.len())),
        Format::Json => emit(out, json_line(&json!({"length": doc.values.len()}))),
    }
}

fn cmd_decrypt(a: &DecryptArgs, format: Format, out: &mut (dyn Write + Send)) -> CmdResult {
    let sk = secret_key_from_json(&read(&a.secret)?).map_err(Failure::error)?;
    let ct = ciphertext_from_json(&read(&a.ct)?).map_err(Failure::error)?;
    if *ct.field != **sk.field() {
        return Err(Failure::error("ciphertext and key use different fields"));
    }
    let m = decrypt(&sk, &ct.values).map_err(Failure::error)?;
    if let Some(path) = &a.out {
        let doc = FieldVector {
            field: sk.field().clone(),
            values: m.clone(),
            seed: None,
        };
        write_file(path, &message_to_json(&doc))?;
    }
    let list = |sep: &str| m.iter().map(u16::to_string).collect::<Vec<_>>().join(sep);
    match format {
        Format::Text => emit(out, format!("{}\n", list(" "))),
        Format::Csv => emit(out, format!("{}\n", list(","))),
        Format::Json => emit(out, json_line(&json!({"message": m}))),
    }
}

fn cmd_distinguish(a: &DistinguishArgs, seed: &[u8], format: Format, out: &mut (dyn Write + Send)) -> CmdResult {
    let pk = public_key_from_json(&read(&a.public)?).map_err(Failure::error)?;
    let params = *pk.params();
    let ell = match a.ell {
        Some(ell) => ell,
        None => interval(&params)
            .map_err(|e| Failure::new(EXIT_NOT_DISTINGUISHABLE, e))?
            .middle(),
    };
    let code = LinearCode::new(pk.matrix().clone());
    let verdict = is_rlce_like_at(&code, &params, ell, a.trials, seed).map_err(Failure::error)?;
    let label = |b: bool| if b { "rlce-like" } else { "random" };
    match format {
        Format::Text => {
            let mut s = format!(
                "{:>5} {:>9} {:>7} {:>9}  verdict\n",
                "|L|", "observed", "bound", "baseline"
            );
            for r in &verdict.evidence {
                s += &format!(
                    "{:>5} {:>9} {:>7} {:>9}  {}\n",
                    r.ell(),
                    r.observed_dim,
                    r.theorem_bound,
                    r.random_baseline,
                    label(r.distinguished)
                );
            }
            s += &format!(
                "{}/{} trials distinguished: {}\n",
                verdict.distinguished_trials,
                a.trials,
                label(verdict.rlce_like)
            );
            emit(out, s)
        }
        Format::Csv => {
            let mut s = String::from("ell,observed_dim,theorem_bound,random_baseline,distinguished\n");
            for r in &verdict.evidence {
                s += &format!(
                    "{},{},{},{},{}\n",
                    r.ell(),
                    r.observed_dim,
                    r.theorem_bound,
                    r.random_baseline,
                    r.distinguished
                );
            }
            emit(out, s)
        }
        Format::Json => emit(out, json_line(&serde_json::to_value(&verdict).expect("serializes"))),
    }
}

fn cmd_attack(a: &AttackArgs, seed: &[u8], format: Format, out: &mut (dyn Write + Send)) -> CmdResult {
    let pk = public_key_from_json(&read(&a.public)?).map_err(Failure::error)?;
    let config = AttackConfig {
        ell: a.ell,
        max_shortenings: a.max_shortenings,
        ..Default::default()
    };
    let file_trace;
    let trace: &dyn TraceSink = match &a.trace {
        Some(path) => {
            let f = fs::File::create(path)
                .map_err(|e| Failure::error(format!("{}: {e}", path.display())))?;
            file_trace = JsonLinesTrace::new(std::io::BufWriter::new(f));
            &file_trace
        }
        None => &NoTrace,
    };
    let rk = full_attack(&pk, seed, &config, trace).map_err(|e| match e {
        AttackError::NotDistinguishable => Failure::new(EXIT_NOT_DISTINGUISHABLE, e),
        other => Failure::new(EXIT_ATTACK_FAILED, format!("attack failed: {other}")),
    })?;
    write_file(&a.out, &secret_key_to_json(&rk.key))?;
    let repaired = rk
        .pairing
        .pairs
        .iter()
        .filter(|p| p.discovered_by == Discovery::Repair)
        .count();
    let pairs = rk.pairing.pairs.len();
    let used = rk.pairing.shortenings_used;
    match format {
        Format::Text => emit(
            out,
            format!(
                "ell {}\npairs {pairs} ({repaired} repaired)\nshortenings {used}\nremaps {}\n",
                rk.ell, rk.remaps
            ),
        ),
        Format::Csv => emit(
            out,
            format!(
                "ell,pairs,repaired,shortenings,remaps\n{},{pairs},{repaired},{used},{}\n",
                rk.ell, rk.remaps
            ),
        ),
        Format::Json => emit(
            out,
            json_line(&json!({"ell": rk.ell, "pairing": rk.pairing, "repaired": repaired,
                "remaps": rk.remaps, "pair_points": rk.pair_points})),
        ),
    }
}

fn cmd_verify(a: &VerifyArgs, seed: &[u8], format: Format, out: &mut (dyn Write + Send)) -> CmdResult {
    let pk = public_key_from_json(&read(&a.public)?).map_err(Failure::error)?;
    let sk = secret_key_from_json(&read(&a.secret)?).map_err(Failure::error)?;
    if sk.params() != pk.params() || sk.field() != pk.field() {
        return Err(Failure::error("keys have different parameters"));
    }
    let report = verify_equivalence(&pk, &sk, a.trials, seed);
    match format {
        Format::Text => emit(
            out,
            format!(
                "same row space: {}\ndecrypted {}/{}\n{}\n",
                report.same_row_space,
                report.decrypted,
                report.trials,
                if report.passed() { "PASS" } else { "FAIL" }
            ),
        ),
        Format::Csv => emit(
            out,
            format!(
                "same_row_space,identical_matrix,trials,decrypted,passed\n{},{},{},{},{}\n",
                report.same_row_space,
                report.identical_matrix,
                report.trials,
                report.decrypted,
                report.passed()
            ),
        ),
        Format::Json => {
            let mut v = serde_json::to_value(&report).expect("serializes");
            v["passed"] = report.passed().into();
            emit(out, json_line(&v))
        }
    }?;
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::new(EXIT_ATTACK_FAILED, "verification failed"))
    }
}

fn cmd_params(a: &ParamsArgs, format: Format, out: &mut (dyn Write + Send)) -> CmdResult {
    let single = a.params.resolve().map_err(Failure::error)?;
    let rows: Vec<(String, RlceParams)> = match single {
        Some(p) => vec![(a.params.preset.clone().unwrap_or_else(|| "custom".into()), p)],
        None => Preset::ALL
            .iter()
            .map(|p| (p.name().to_string(), p.params()))
            .collect(),
    };
    let ranges: Vec<_> = rows.iter().map(|(_, p)| interval(p)).collect();
    match format {
        Format::Text if single.is_some() => emit(out, format!("{}\n", interval_text(&ranges[0])))?,
        Format::Text => {
            let mut s = String::new();
            for ((name, p), r) in rows.iter().zip(&ranges) {
                s += &format!("{name:<4} {p}  {}\n", interval_text(r));
            }
            emit(out, s)?
        }
        Format::Csv => {
            let mut s = String::from("name,n,k,w,t,m,ell_min,ell_max,bound_at_ell_min\n");
            for ((name, p), r) in rows.iter().zip(&ranges) {
                let (lo, hi, b) = match r {
                    Ok(i) => (
                        i.ell_min.to_string(),
                        i.ell_max.to_string(),
                        theorem_bound(p, i.ell_min).to_string(),
                    ),
                    Err(_) => Default::default(),
                };
                s += &format!("{name},{},{},{},{},{},{lo},{hi},{b}\n", p.n, p.k, p.w, p.t, p.m);
            }
            emit(out, s)?
        }
        Format::Json => {
            let list: Vec<_> = rows
                .iter()
                .zip(&ranges)
                .map(|((name, p), r)| json!({"name": name, "params": p, "interval": interval_json(r)}))
                .collect();
            emit(out, json_line(&json!(list)))?
        }
    }
    match (single, &ranges[..]) {
        (Some(_), [Err(_)]) => Err(Failure::new(EXIT_NOT_DISTINGUISHABLE, "not distinguishable")),
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("rlce").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn params_output() {
        assert_eq!(run_str(&["params", "--preset", "id1"]).1, "316 354\n");
        assert_eq!(run_str(&["params", "--preset", "ID3"]).1, "534 592\n");
        let (code, out, _) = run_str(&["params", "--preset", "id0"]);
        assert_eq!((code, out.as_str()), (2, "not distinguishable\n"));
        let (code, out, _) = run_str(&["params"]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().count(), 6);
        let (_, csv, _) = run_str(&["params", "--format", "csv"]);
        assert!(csv.contains("id5,1160,700,311,230,11,551,663,"));
        let (_, out, _) = run_str(&["params", "--n", "60", "--k", "30", "--w", "12", "--m", "10"]);
        assert_eq!(out, "12 21\n");
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run_str(&["frobnicate"]).0, 1);
        assert_eq!(run_str(&["params", "--preset", "id9"]).0, 1);
        assert_eq!(run_str(&["params", "--n", "60"]).0, 1);
        assert_eq!(run_str(&["--seed", "xyz", "params"]).0, 1);
        assert_eq!(run_str(&["--help"]).0, 0);
    }

    #[test]
    fn force_zero_specs() {
        assert_eq!(parse_force_zero("3:c").unwrap(), (3, ForcedZero::C));
        assert_eq!(parse_force_zero("0:D").unwrap(), (0, ForcedZero::D));
        assert!(parse_force_zero("x:c").is_err());
        assert!(parse_force_zero("1:e").is_err());
    }
}
