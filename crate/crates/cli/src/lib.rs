//! Command dispatch for `skein-lab`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use skein_core::bracket::{kauffman_bracket, parse_pd, Braid, LinkDiagram};
use skein_core::charvar::{fricke_trace, trace_word, GroupWord, SL2Rep};
use skein_core::qrep::{build_rep, irreducibility_rank, omega_matrix, verify_rep, CentralCharacter, MatrixRep, RepBundle, RELATION_TOL};
use skein_core::shadow::shadow_batch;
use skein_core::skein_pt::{closed_torus_central_check, parse_expr};
use skein_core::traintrack::{build_train_track, load_triangulation, punctured_torus, TrainTrack, CORPUS};
use skein_core::{chebyshev, RootOfUnity, SkeinError};

pub mod manifest;

pub use manifest::{InputDigest, Report, RunManifest};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Parser, Debug)]
#[command(name = "skein-lab", version, about = "Skein algebras, quantum tori and classical shadows")]
pub struct Cli {
    /// Evaluate at the root of unity exp(2πik/N), given as `N,k`.
    #[arg(long, global = true, value_name = "N,k")]
    pub at_root: Option<String>,
    /// Write the JSON report here.
    #[arg(long, global = true, value_name = "FILE")]
    pub report: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Kauffman bracket of a PD-code diagram.
    Bracket { file: PathBuf },
    /// Normalized Chebyshev polynomial T_n.
    Cheb { n: usize },
    /// SL2 traces and Fricke polynomials.
    #[command(subcommand)]
    Charvar(CharvarCmd),
    /// Skein algebra of the once-punctured torus.
    #[command(subcommand)]
    Skein(SkeinCmd),
    /// Train-track weight lattices and the intersection form.
    #[command(subcommand)]
    Tt(TtCmd),
    /// Quantum torus representations at roots of unity.
    #[command(subcommand)]
    Qrep(QrepCmd),
    /// Classical shadow checks on random shear data.
    #[command(subcommand)]
    Shadow(ShadowCmd),
    /// Write the bundled triangulations and a braid-closure diagram corpus.
    Corpus {
        #[arg(long, default_value = "corpus")]
        out_dir: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
pub enum CharvarCmd {
    /// Trace of a word under a representation file.
    Trace {
        #[arg(long)]
        word: String,
        #[arg(long)]
        rep: PathBuf,
    },
    /// Trace of the (p,q) curve by Farey recursion.
    Fricke {
        #[arg(long, allow_hyphen_values = true)]
        p: i64,
        #[arg(long, allow_hyphen_values = true)]
        q: i64,
        #[arg(long)]
        rep: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
pub enum SkeinCmd {
    /// Normal form of an expression in X1, X2, X3.
    Nf { expr: String },
    /// Centrality report for the closed-torus candidates.
    Central {
        #[arg(long = "N", value_delimiter = ',', default_values_t = [3u64, 5, 7])]
        n: Vec<u64>,
    },
}

#[derive(Subcommand, Debug)]
pub enum TtCmd {
    /// Integer basis of the weight lattice and its form matrix.
    Basis { file: PathBuf },
    /// Thurston form of two weight vectors.
    Form {
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
    },
}

#[derive(Args, Debug)]
pub struct RootArgs {
    #[arg(long = "N", default_value_t = 3)]
    pub n: u64,
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    pub k: i64,
}

#[derive(Subcommand, Debug)]
pub enum QrepCmd {
    /// Build a representation of the quantum torus of a triangulation.
    Build {
        file: PathBuf,
        #[command(flatten)]
        root: RootArgs,
        /// Central character file; a seeded generic one when omitted.
        #[arg(long)]
        character: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Check the commutation relations of a bundle.
    Verify { bundle: PathBuf },
}

#[derive(Subcommand, Debug)]
pub enum ShadowCmd {
    /// Seeded classical-shadow run on the once-punctured torus.
    Run {
        #[arg(long)]
        triangulation: Option<PathBuf>,
        #[command(flatten)]
        root: RootArgs,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(SkeinError),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(e) if e.is_invariant_violation() => EXIT_INVARIANT,
            CliError::Core(_) | CliError::Io(_) => EXIT_VALIDATION,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(m) => write!(f, "{m}"),
        }
    }
}

impl From<SkeinError> for CliError {
    fn from(e: SkeinError) -> Self {
        CliError::Core(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Text for stdout plus the JSON report body.
pub struct Outcome {
    pub text: String,
    pub report: Report,
    /// Nonzero when the command ran but a checked invariant failed.
    pub status: i32,
}

fn read(path: &Path) -> CliResult<(String, InputDigest)> {
    let bytes = fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let digest = InputDigest::of(path, &bytes);
    let text = String::from_utf8(bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok((text, digest))
}

fn parse_root(arg: &str) -> CliResult<RootOfUnity> {
    let (n, k) = arg.split_once(',').ok_or_else(|| CliError::Usage(format!("--at-root expects N,k, got {arg:?}")))?;
    let n: u64 = n.trim().parse().map_err(|_| CliError::Usage(format!("bad N in {arg:?}")))?;
    let k: i64 = k.trim().parse().map_err(|_| CliError::Usage(format!("bad k in {arg:?}")))?;
    Ok(RootOfUnity::new(n, k)?)
}

fn parse_vec(s: &str) -> CliResult<Vec<i64>> {
    let t = s.trim().trim_start_matches('[').trim_end_matches(']');
    if t.trim().is_empty() {
        return Ok(vec![]);
    }
    t.split(',')
        .map(|x| x.trim().parse().map_err(|_| CliError::Usage(format!("bad integer vector {s:?}"))))
        .collect()
}

fn cplx(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn fmt_c(z: Complex64) -> String {
    format!("{:.12} {} {:.12}i", z.re, if z.im < 0.0 { '-' } else { '+' }, z.im.abs())
}

fn no_root(cli: &Cli, what: &str) -> CliResult<()> {
    match cli.at_root {
        Some(_) => Err(CliError::Usage(format!("--at-root does not apply to {what}"))),
        None => Ok(()),
    }
}

fn track_from(path: &Option<PathBuf>) -> CliResult<(TrainTrack, Vec<InputDigest>)> {
    match path {
        Some(p) => {
            let (text, d) = read(p)?;
            Ok((build_train_track(&load_triangulation(&text)?), vec![d]))
        }
        None => Ok((punctured_torus(), vec![])),
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

pub fn execute(cli: &Cli) -> CliResult<Outcome> {
    let root = cli.at_root.as_deref().map(parse_root).transpose()?;
    match &cli.command {
        Command::Bracket { file } => {
            let (text, d) = read(file)?;
            let diagram = parse_pd(&text)?;
            let value = kauffman_bracket(&diagram)?;
            let mut result = json!({
                "diagram": to_value(&diagram),
                "genus": diagram.genus(),
                "bracket": to_value(&value),
                "text": value.to_string(),
            });
            let out = match root {
                Some(r) => {
                    let z = value.eval_at_root(&r);
                    let residue = value.cyclotomic_residue(&r).to_string();
                    result["at_root"] = json!({"n": r.order(), "k": r.index(), "value": cplx(z), "residue": residue});
                    fmt_c(z)
                }
                None => value.to_string(),
            };
            Ok(ok(out, Report::new("bracket", vec![d], None, json!({}), result)))
        }
        Command::Cheb { n } => {
            no_root(cli, "cheb")?;
            let p = chebyshev(*n);
            let coeffs: Vec<String> = p.coeffs().iter().map(|c| c.to_string()).collect();
            let text = p.to_string();
            let result = json!({"n": n, "coeffs": coeffs, "text": text});
            Ok(ok(text, Report::new("cheb", vec![], None, json!({"n": n}), result)))
        }
        Command::Charvar(cmd) => {
            no_root(cli, "charvar")?;
            match cmd {
                CharvarCmd::Trace { word, rep } => {
                    let (text, d) = read(rep)?;
                    let r: SL2Rep = serde_json::from_str(&text).map_err(|e| SkeinError::Schema(e.to_string()))?;
                    let w: GroupWord = word.parse()?;
                    let t = trace_word(&w, &r)?;
                    let result = json!({"word": w.to_string(), "trace": cplx(t)});
                    Ok(ok(fmt_c(t), Report::new("charvar trace", vec![d], None, json!({"word": word}), result)))
                }
                CharvarCmd::Fricke { p, q, rep } => {
                    let (text, d) = read(rep)?;
                    let r: SL2Rep = serde_json::from_str(&text).map_err(|e| SkeinError::Schema(e.to_string()))?;
                    let t = fricke_trace(*p, *q, &r)?;
                    let result = json!({"p": p, "q": q, "trace": cplx(t)});
                    Ok(ok(fmt_c(t), Report::new("charvar fricke", vec![d], None, json!({"p": p, "q": q}), result)))
                }
            }
        }
        Command::Skein(SkeinCmd::Nf { expr }) => {
            let e = parse_expr(expr)?;
            let mut result = json!({"expr": expr, "normal_form": to_value(&e), "text": e.to_string()});
            let out = match root {
                Some(r) => {
                    let vals = e.eval_at_root(&r);
                    let terms: Vec<Value> = vals
                        .iter()
                        .filter(|(_, z)| z.norm() > 1e-12)
                        .map(|(m, z)| json!({"mono": [m.0, m.1, m.2], "value": cplx(*z)}))
                        .collect();
                    let lines: Vec<String> = vals
                        .iter()
                        .filter(|(_, z)| z.norm() > 1e-12)
                        .map(|(m, z)| format!("X1^{} X2^{} X3^{}: {}", m.0, m.1, m.2, fmt_c(*z)))
                        .collect();
                    result["at_root"] = json!({"n": r.order(), "k": r.index(), "terms": terms});
                    lines.join("\n")
                }
                None => e.to_string(),
            };
            Ok(ok(out, Report::new("skein nf", vec![], None, json!({"expr": expr}), result)))
        }
        Command::Skein(SkeinCmd::Central { n }) => {
            no_root(cli, "skein central")?;
            let report = closed_torus_central_check(n)?;
            let text = report
                .candidates
                .iter()
                .map(|c| format!("{}: {}", c.name, if c.central { "central" } else { "not central" }))
                .collect::<Vec<_>>()
                .join("\n");
            Ok(ok(text, Report::new("skein central", vec![], None, json!({"orders": n}), to_value(&report))))
        }
        Command::Tt(cmd) => {
            no_root(cli, "tt")?;
            match cmd {
                TtCmd::Basis { file } => {
                    let (tt, d) = track_from(&Some(file.clone()))?;
                    let basis = tt.weight_basis()?;
                    let form = omega_matrix(&tt, &basis)?;
                    let coords: Vec<Vec<i64>> = basis.iter().map(|b| tt.edge_coords(b)).collect();
                    let text = basis.iter().map(|b| format!("{b:?}")).collect::<Vec<_>>().join("\n");
                    let result = json!({
                        "rank": basis.len(),
                        "expected_rank": tt.expected_rank(),
                        "basis": basis,
                        "edge_coords": coords,
                        "form": form,
                    });
                    Ok(ok(text, Report::new("tt basis", d, None, json!({}), result)))
                }
                TtCmd::Form { file, a, b } => {
                    let (tt, d) = track_from(&Some(file.clone()))?;
                    let (va, vb) = (parse_vec(a)?, parse_vec(b)?);
                    let w = tt.thurston_form(&va, &vb)?;
                    let result = json!({"a": va, "b": vb, "value": w});
                    Ok(ok(w.to_string(), Report::new("tt form", d, None, json!({"a": va, "b": vb}), result)))
                }
            }
        }
        Command::Qrep(QrepCmd::Build { file, root: ra, character, seed }) => {
            let r = match root {
                Some(r) => r,
                None => RootOfUnity::new(ra.n, ra.k)?,
            };
            let (tt, mut inputs) = track_from(&Some(file.clone()))?;
            let basis = tt.weight_basis()?;
            let omega = omega_matrix(&tt, &basis)?;
            let chi = match character {
                Some(p) => {
                    let (text, d) = read(p)?;
                    inputs.push(d);
                    serde_json::from_str::<CentralCharacter>(&text).map_err(|e| SkeinError::Schema(e.to_string()))?
                }
                None => CentralCharacter::generic(basis.len(), &mut ChaCha8Rng::seed_from_u64(*seed)),
            };
            let rep = build_rep(&omega, &r, &chi)?;
            let residual = verify_rep(&rep);
            let irr = irreducibility_rank(&rep);
            let text = format!("dimension {} residual {:.3e} irreducibility rank {}", rep.dimension, residual, irr);
            let result = json!({
                "bundle": to_value(&RepBundle::from(&rep)),
                "relation_residual": residual,
                "irreducibility_rank": irr,
            });
            let seed_used = character.is_none().then_some(*seed);
            let params = json!({"n": r.order(), "k": r.index()});
            let status = if residual < RELATION_TOL { EXIT_OK } else { EXIT_INVARIANT };
            Ok(Outcome { text, report: Report::new("qrep build", inputs, seed_used, params, result), status })
        }
        Command::Qrep(QrepCmd::Verify { bundle }) => {
            no_root(cli, "qrep verify")?;
            let (text, d) = read(bundle)?;
            let v: Value = serde_json::from_str(&text).map_err(|e| SkeinError::Schema(e.to_string()))?;
            let raw = v.pointer("/result/bundle").cloned().unwrap_or(v);
            let b: RepBundle = serde_json::from_value(raw).map_err(|e| SkeinError::Schema(e.to_string()))?;
            let rep = MatrixRep::try_from(b)?;
            let residual = verify_rep(&rep);
            let irr = irreducibility_rank(&rep);
            let ok_rel = residual < RELATION_TOL;
            let text = format!("residual {:.3e} irreducibility rank {} of {}", residual, irr, rep.dimension * rep.dimension);
            let result = json!({
                "dimension": rep.dimension,
                "relation_residual": residual,
                "irreducibility_rank": irr,
                "relations_hold": ok_rel,
            });
            let status = if ok_rel { EXIT_OK } else { EXIT_INVARIANT };
            Ok(Outcome { text, report: Report::new("qrep verify", vec![d], None, json!({}), result), status })
        }
        Command::Shadow(ShadowCmd::Run { triangulation, root: ra, samples, seed }) => {
            let r = match root {
                Some(r) => r,
                None => RootOfUnity::new(ra.n, ra.k)?,
            };
            let (tt, inputs) = track_from(triangulation)?;
            let batch = shadow_batch(&tt.triangulation, &r, *samples, *seed)?;
            let text = format!(
                "N={} samples={} max curve error {:.3e} max puncture error {:.3e} max Schur residual {:.3e} {}",
                batch.n,
                batch.samples.len(),
                batch.max_curve_error,
                batch.max_puncture_error,
                batch.max_schur_residual,
                if batch.passed { "PASS" } else { "FAIL" }
            );
            let status = if batch.passed { EXIT_OK } else { EXIT_INVARIANT };
            let params = json!({"n": r.order(), "k": r.index(), "samples": samples});
            Ok(Outcome { text, report: Report::new("shadow run", inputs, Some(*seed), params, to_value(&batch)), status })
        }
        Command::Corpus { out_dir } => {
            no_root(cli, "corpus")?;
            let files = write_corpus(out_dir)?;
            let text = files.iter().map(|f| f.name.clone()).collect::<Vec<_>>().join("\n");
            let result = json!({"files": to_value(&files)});
            Ok(ok(text, Report::new("corpus", vec![], None, json!({}), result)))
        }
    }
}

fn ok(text: String, report: Report) -> Outcome {
    Outcome { text, report, status: EXIT_OK }
}

/// Braid words whose closures make up the diagram corpus.
pub fn braid_corpus() -> Vec<(String, Braid)> {
    let words: [(usize, &[i32]); 12] = [
        (1, &[]),
        (2, &[1]),
        (2, &[1, 1]),
        (2, &[1, 1, 1]),
        (2, &[-1, -1, -1]),
        (2, &[1, 1, 1, 1]),
        (3, &[1, -2, 1, -2]),
        (3, &[1, 2, 1]),
        (3, &[1, 1, 2, -1, 2]),
        (2, &[1, 1, 1, 1, 1]),
        (3, &[1, 2, 1, 2]),
        (4, &[1, 2, 3, -1, 2]),
    ];
    words
        .iter()
        .map(|(s, w)| {
            let name = if w.is_empty() {
                format!("b{s}_trivial")
            } else {
                format!("b{s}_{}", w.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("_"))
            };
            (name, Braid::new(*s, w.to_vec()).expect("valid braid"))
        })
        .collect()
}

#[derive(Serialize, Clone, Debug)]
pub struct CorpusFile {
    pub name: String,
    pub sha256: String,
}

fn write_file(dir: &Path, name: &str, contents: &str) -> CliResult<CorpusFile> {
    let path = dir.join(name);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| CliError::Io(format!("{}: {e}", parent.display())))?;
    }
    fs::write(&path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(CorpusFile { name: name.to_string(), sha256: hex::encode(Sha256::digest(contents.as_bytes())) })
}

pub fn write_corpus(dir: &Path) -> CliResult<Vec<CorpusFile>> {
    let mut out = Vec::new();
    for (name, text) in CORPUS {
        load_triangulation(text)?;
        out.push(write_file(dir, &format!("triangulations/{name}.json"), text)?);
    }
    for (name, braid) in braid_corpus() {
        let d: LinkDiagram = braid.closure();
        let text = serde_json::to_string(&d).expect("serializable") + "\n";
        out.push(write_file(dir, &format!("diagrams/{name}.json"), &text)?);
    }
    out.push(write_file(dir, "diagrams/empty.json", "{\"crossings\":[],\"free_loops\":0}\n")?);
    Ok(out)
}

/// Parses `argv`, runs the command, writes the report and returns the exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(stderr, "{e}") } else { write!(stdout, "{e}") };
            return code;
        }
    };
    match execute(&cli) {
        Ok(outcome) => {
            let _ = writeln!(stdout, "{}", outcome.text);
            if let Some(path) = &cli.report {
                if let Err(e) = fs::write(path, outcome.report.to_pretty()) {
                    let _ = writeln!(stderr, "{}: {e}", path.display());
                    return EXIT_VALIDATION;
                }
            }
            outcome.status
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

/// Applies `SKEINLAB_THREADS` to the global thread pool.
pub fn configure_threads() {
    if let Some(n) = std::env::var("SKEINLAB_THREADS").ok().and_then(|v| v.parse::<usize>().ok()).filter(|&n| n > 0) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}
