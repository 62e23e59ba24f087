//! `aldc`: build, verify, reduce and certify approximate LDC configurations.
//!
//! Exit status: 0 on success, 2 when a certificate or verification fails,
//! 1 on usage or input errors.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use aldc::code::simple_alpha;
use aldc::io::{self, report_json};
use aldc::partition::{general_bound, recursive_cut_certificate, CutCertificate, GeneralBound};
use aldc::qquery::{coverage_experiment, default_sample_size, qquery_bound, CoverageExperiment, QQueryBound};
use aldc::reduction::{bucket_to_2bounded, reduce_to_simple, BucketTrace, ReductionTrace};
use aldc::spectral::{
    bounded_code_bound, fourier_matrix, matching_witness_bound, nck_montecarlo, one_query_bound,
    one_query_bound_check, trace_inequality_check, NckReport, OneQueryBound, SpectralReport, WitnessBound,
};
use aldc::tiling::{large_alpha_bound, large_alpha_certificate};
use aldc::{constructions, verify, CodeConfig, Error};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "aldc", version, about = "Approximate locally decodable code toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a code and write it as .aldc.json
    Gen(GenArgs),
    /// Verify the decoding property at a claimed alpha
    Verify(VerifyArgs),
    /// Reduce a 2-query code to a simple code
    Reduce(ReduceArgs),
    /// Recursive random axis-cut certificate
    CertifyCut(CutArgs),
    /// Tiling-based certificate for large alpha
    CertifyTiling(TilingArgs),
    /// Trace-norm certificates for 2-bounded simple codes
    Spectral(SpectralArgs),
    /// Rank bound and subset sampling for q-query codes
    Qquery(QqueryArgs),
    /// Evaluate a length lower bound
    Bound(BoundArgs),
}

#[derive(Args)]
struct Common {
    /// Print a JSON report instead of the text summary
    #[arg(long)]
    json: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Hypercube,
    Perturbed,
    Basis,
    Random,
    Simple,
}

#[derive(Args)]
struct GenArgs {
    #[arg(value_enum)]
    kind: GenKind,
    #[arg(long)]
    d: usize,
    /// Number of points (random, simple)
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 2)]
    q: usize,
    /// Target alpha (random, simple)
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// Noise level (perturbed)
    #[arg(long, default_value_t = 0.1)]
    sigma: f64,
    /// Output path; `.aldc.json` is appended when missing. Stdout otherwise.
    #[arg(short = 'o')]
    output: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct VerifyArgs {
    file: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ReduceArgs {
    file: PathBuf,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    k: Option<usize>,
    /// Also rescale and keep the most populous dyadic length bucket
    #[arg(long)]
    bucket: bool,
    #[arg(short = 'o')]
    output: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct CutArgs {
    file: PathBuf,
    /// Simplicity parameter; defaults to the code's minimum difference weight
    #[arg(long)]
    alpha: Option<f64>,
    /// Samples per subset in the cut search
    #[arg(long)]
    budget: Option<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct TilingArgs {
    file: PathBuf,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    eps: f64,
    #[arg(long, default_value_t = 500)]
    t: usize,
    /// Tiling constant; sqrt(d) for the shifted cube tiling by default
    #[arg(long)]
    kappa: Option<f64>,
    /// Number of tiling families to try
    #[arg(long, default_value_t = 20)]
    budget: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SpectralArgs {
    file: PathBuf,
    #[arg(long)]
    alpha: Option<f64>,
    /// Monte Carlo samples for the Khintchine check (0 skips it)
    #[arg(long, default_value_t = 0)]
    samples: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct QqueryArgs {
    file: PathBuf,
    /// Defaults to the achieved alpha
    #[arg(long)]
    alpha: Option<f64>,
    /// Subset size; defaults to ceil(delta^(-1/q) n^((q-1)/q))
    #[arg(long)]
    m: Option<usize>,
    /// Number of sampled subsets
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, ValueEnum)]
enum Theorem {
    General,
    LargeAlpha,
    Bounded,
    Qquery,
    OneQuery,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long, value_enum)]
    theorem: Theorem,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    d: usize,
    /// Length ratio (bounded)
    #[arg(long, default_value_t = 2.0)]
    c: f64,
    #[arg(long, default_value_t = 3)]
    q: usize,
    #[arg(long, default_value_t = 0.01)]
    eps: f64,
    #[arg(long, default_value_t = 500)]
    t: usize,
    /// Tiling constant (large-alpha); 2 pi by default
    #[arg(long, default_value_t = 2.0 * PI)]
    kappa: f64,
    /// Apply the general-to-simple losses first (general)
    #[arg(long)]
    non_simple: bool,
    #[arg(long)]
    json: bool,
}

type Failure = Box<dyn std::error::Error>;

struct Outcome {
    stdout: String,
    success: bool,
}

fn emit<T: Serialize>(json: bool, report: &T, text: String, success: bool) -> Outcome {
    Outcome {
        stdout: if json { report_json(report) } else { text },
        success,
    }
}

fn load(path: &std::path::Path) -> Result<CodeConfig, Failure> {
    io::read_code(path).map_err(|e| format!("{}: {e}", path.display()).into())
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), |v| v.to_string())
}

fn gen(a: GenArgs) -> Result<Outcome, Failure> {
    let need_n = || a.n.ok_or_else(|| Failure::from("--n is required for this generator"));
    let code = match a.kind {
        GenKind::Hypercube => constructions::hypercube(a.d)?,
        GenKind::Perturbed => constructions::perturbed_hypercube(a.d, a.sigma, a.common.seed)?,
        GenKind::Basis => constructions::basis_code(a.d)?,
        GenKind::Random => constructions::random_code(a.d, need_n()?, a.q, a.alpha, a.common.seed)?,
        GenKind::Simple => constructions::random_simple_code(a.d, need_n()?, a.alpha, a.common.seed)?,
    };
    #[derive(Serialize)]
    struct GenReport {
        path: Option<String>,
        d: usize,
        n: usize,
        q: usize,
        total_tuples: usize,
        density: f64,
    }
    let Some(out) = a.output else {
        return Ok(Outcome {
            stdout: io::render(&code),
            success: true,
        });
    };
    let written = io::write_code(&code, &out)?;
    let r = GenReport {
        path: Some(written.display().to_string()),
        d: code.d(),
        n: code.n(),
        q: code.q(),
        total_tuples: code.total_tuples(),
        density: code.density(),
    };
    let text = format!(
        "wrote {} (d = {}, n = {}, q = {}, tuples = {}, delta = {})\n",
        written.display(),
        r.d,
        r.n,
        r.q,
        r.total_tuples,
        r.density
    );
    Ok(emit(a.common.json, &r, text, true))
}

fn verify_cmd(a: VerifyArgs) -> Result<Outcome, Failure> {
    let code = load(&a.file)?;
    let r = verify(&code, a.alpha);
    let mut t = String::new();
    let _ = writeln!(t, "d = {}, n = {}, q = {}, tuples = {}", r.d, r.n, r.q, r.total_tuples);
    let _ = writeln!(t, "delta = {}", r.density);
    let _ = writeln!(t, "achieved alpha = {}", r.achieved_alpha);
    let _ = writeln!(t, "simple at {} = {}", r.alpha_claim, r.simple);
    if r.q == 2 {
        let _ = writeln!(t, "pair lengths in [{}, {}]", opt(r.length_min), opt(r.length_max));
    }
    for diag in r.per_tuple.iter().filter(|p| p.below_claim) {
        let _ = writeln!(
            t,
            "  below claim: direction {} tuple {:?} span weight {}",
            diag.direction,
            diag.tuple.indices(),
            diag.span_weight
        );
    }
    let _ = writeln!(
        t,
        "{} at alpha = {} ({} flagged)",
        if r.verified { "VERIFIED" } else { "NOT VERIFIED" },
        r.alpha_claim,
        r.flagged
    );
    let ok = r.verified;
    Ok(emit(a.common.json, &r, t, ok))
}

fn reduce_cmd(a: ReduceArgs) -> Result<Outcome, Failure> {
    let code = load(&a.file)?;
    let (simple, trace) = reduce_to_simple(&code, a.alpha, a.k)?;
    let (out, bucket) = if a.bucket && simple.total_tuples() > 0 {
        let (b, tr) = bucket_to_2bounded(&simple)?;
        (b, Some(tr))
    } else {
        (simple, None)
    };
    #[derive(Serialize)]
    struct ReduceReport {
        trace: ReductionTrace,
        bucket: Option<BucketTrace>,
        output: Option<String>,
    }
    let written = match &a.output {
        Some(p) => Some(io::write_code(&out, p)?.display().to_string()),
        None => None,
    };
    let mut t = String::new();
    let _ = writeln!(t, "k = {}{}", trace.k, if trace.default_k { " (default)" } else { "" });
    let _ = writeln!(
        t,
        "step 1 removed {} pairs (limit {}), discarded {} zero points",
        trace.pairs_removed_step1, trace.removal_limit, trace.zero_points_discarded
    );
    let _ = writeln!(t, "n: {} -> {}", trace.n_in, trace.n_out);
    let _ = writeln!(
        t,
        "alpha: {} -> {} guaranteed, {} achieved",
        trace.alpha_in,
        trace.alpha_out,
        opt(trace.alpha_achieved)
    );
    let _ = writeln!(
        t,
        "delta: {} -> {} (guarantee {})",
        trace.delta_in, trace.delta_out, trace.delta_guarantee
    );
    if let Some(b) = &bucket {
        let _ = writeln!(
            t,
            "bucketing: c = {}, {} buckets {:?}, kept bucket {} ({} pairs), scale {}",
            b.c, b.buckets, b.counts, b.chosen, b.kept, b.scale
        );
    }
    for w in &trace.warnings {
        let _ = writeln!(t, "warning: {w}");
    }
    if a.bucket && bucket.is_none() {
        let _ = writeln!(t, "warning: no pairs survived; bucketing skipped");
    }
    if let Some(p) = &written {
        let _ = writeln!(t, "wrote {p}");
    }
    let r = ReduceReport {
        trace,
        bucket,
        output: written,
    };
    Ok(emit(a.common.json, &r, t, true))
}

fn cut_cmd(a: CutArgs) -> Result<Outcome, Failure> {
    let code = load(&a.file)?;
    let cert = recursive_cut_certificate(&code, a.alpha, a.budget, a.common.seed)?;
    let alpha = match a.alpha {
        Some(x) => Some(x),
        None => simple_alpha(&code)?,
    };
    let delta = code.density();
    let bound = alpha.filter(|&x| x > 0.0 && delta > 0.0).map(|x| general_bound(x, delta, code.d(), true));
    #[derive(Serialize)]
    struct CutReport {
        certificate: CutCertificate,
        bound: Option<GeneralBound>,
    }
    let mut t = String::new();
    let _ = writeln!(t, "c = {}", cert.c_param);
    let _ = writeln!(t, "nodes = {}, graph edges = {}", cert.nodes.len(), cert.graph_edges);
    let _ = writeln!(t, "cut edges = {} <= (c/2) n log2 n = {}", cert.total_edges, cert.edge_bound);
    if let Some(f) = &cert.failure {
        let _ = writeln!(
            t,
            "failed on a subset of {} points after {} samples: {}",
            f.subset.len(),
            f.samples,
            f.reason
        );
    }
    if let Some(b) = &bound {
        let _ = writeln!(t, "implied n >= 2^{} = {}", b.exponent, b.bound);
    }
    let _ = writeln!(t, "{}", if cert.verified { "CERTIFIED" } else { "NOT CERTIFIED" });
    let ok = cert.verified;
    Ok(emit(a.common.json, &CutReport { certificate: cert, bound }, t, ok))
}

fn tiling_cmd(a: TilingArgs) -> Result<Outcome, Failure> {
    let code = load(&a.file)?;
    let r = large_alpha_certificate(&code, a.alpha, a.eps, a.t, a.kappa, a.budget, a.common.seed)?;
    let mut t = String::new();
    let _ = writeln!(t, "alpha = {}, eps = {}, t = {}, kappa = {}", r.alpha, a.eps, a.t, r.kappa);
    let _ = writeln!(
        t,
        "residue {} keeps {} pairs; levels {}..={}",
        r.schedule.residue, r.bucketed_edges, r.schedule.k_min, r.schedule.k_max
    );
    let _ = writeln!(t, "good-edge probability bound = {}", r.probability_bound);
    let _ = writeln!(
        t,
        "good fraction = {} after {} round(s) (best {})",
        r.good_fraction, r.rounds, r.best_fraction
    );
    if let Some(c) = &r.certificate {
        let _ = writeln!(
            t,
            "cut edges = {} <= (1/2) n log2 n = {} over {} nodes",
            c.total_edges,
            c.edge_bound,
            c.nodes.len()
        );
    }
    let _ = writeln!(
        t,
        "delta: {} -> {} (residue) -> {} (good); chain {}",
        r.delta_in, r.delta_bucketed, r.delta_good, r.delta_chain
    );
    let _ = writeln!(t, "implied n >= 2^{} = {}", r.implied_exponent, r.implied_bound);
    let _ = writeln!(t, "{}", if r.verified { "CERTIFIED" } else { "NOT CERTIFIED" });
    let ok = r.verified;
    Ok(emit(a.common.json, &r, t, ok))
}

fn spectral_cmd(a: SpectralArgs) -> Result<Outcome, Failure> {
    let code = load(&a.file)?;
    let report = trace_inequality_check(&code, a.alpha)?;
    let mut witnesses = Vec::new();
    let mut witness_note = None;
    if let Some(alpha) = report.alpha {
        for i in 0..code.d() {
            match matching_witness_bound(&code, i, alpha) {
                Ok(w) => witnesses.push(w),
                Err(Error::Precondition(m)) => {
                    witness_note = Some(m);
                    witnesses.clear();
                    break;
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
    let nck = if a.samples > 0 {
        let mats = (0..code.d()).map(|i| fourier_matrix(&code, i)).collect::<Result<Vec<_>, _>>()?;
        Some(nck_montecarlo(&mats, a.samples, a.common.seed)?)
    } else {
        None
    };
    #[derive(Serialize)]
    struct Report {
        trace: SpectralReport,
        witnesses: Vec<WitnessBound>,
        witness_skipped: Option<String>,
        nck: Option<NckReport>,
    }
    let certified = witnesses.iter().all(|w| w.certified);
    let ok = report.holds && certified && nck.as_ref().is_none_or(|r| r.holds);
    let mut t = String::new();
    let _ = writeln!(t, "n = {}, d = {}, delta = {}, alpha = {}", report.n, report.d, report.delta, opt(report.alpha));
    let _ = writeln!(t, "sum ||F^(e_i)||_S1^2 = {}", report.lhs);
    let _ = writeln!(t, "2 ln(2en) n^2 = {}", report.rhs);
    let _ = writeln!(t, "trace inequality {}", if report.holds { "holds" } else { "FAILS" });
    for w in &witnesses {
        let _ = writeln!(
            t,
            "  direction {}: ||F^||_S1 = {} >= witness {} >= (alpha/e)|M_i| = {} {}",
            w.direction,
            w.trace_norm,
            w.witness_value,
            w.target,
            if w.certified { "ok" } else { "FAILED" }
        );
    }
    if let Some(m) = &witness_note {
        let _ = writeln!(t, "witnesses skipped: {m}");
    }
    if let (Some(e), Some(b)) = (report.exponent, report.implied_bound) {
        let _ = writeln!(t, "implied n >= exp({e}) / (2e) = {b}");
    }
    if let Some(r) = &nck {
        let _ = writeln!(
            t,
            "Khintchine: E||sum x_i A_i||^2 ~ {} (se {}) vs {} {}",
            r.estimate,
            r.standard_error,
            r.bound,
            if r.holds { "holds" } else { "FAILS" }
        );
    }
    let r = Report {
        trace: report,
        witnesses,
        witness_skipped: witness_note,
        nck,
    };
    Ok(emit(a.common.json, &r, t, ok))
}

fn qquery_cmd(a: QqueryArgs) -> Result<Outcome, Failure> {
    let code = load(&a.file)?;
    let achieved = verify(&code, 0.0).achieved_alpha;
    let alpha = a.alpha.unwrap_or(achieved);
    let delta = code.density();
    let m = a.m.unwrap_or_else(|| default_sample_size(delta, code.n(), code.q()));
    let exp = coverage_experiment(&code, m, alpha, a.samples, a.common.seed)?;
    #[derive(Serialize)]
    struct Report {
        alpha: f64,
        delta: f64,
        experiment: CoverageExperiment,
        qquery_bound: Option<QQueryBound>,
        one_query: Option<OneQueryBound>,
    }
    let (qb, oq) = if code.q() == 1 {
        (None, Some(one_query_bound_check(&code, alpha)?))
    } else if delta > 0.0 && alpha > 0.0 {
        (Some(qquery_bound(alpha, delta, code.d(), code.q())?), None)
    } else {
        (None, None)
    };
    let mut t = String::new();
    let _ = writeln!(t, "alpha = {alpha}, delta = {delta}, subset size m = {m}");
    let _ = writeln!(t, "mean covered directions = {} over {} subsets", exp.mean_covered, exp.trials.len());
    let _ = writeln!(
        t,
        "rank >= alpha^2 k on every subset: {}",
        if exp.all_hold { "yes" } else { "NO" }
    );
    if let Some(b) = &qb {
        let _ = writeln!(t, "n >= (alpha^2 delta^(1/q) d)^(q/(q-1)) = {}^{} = {}", b.base, b.exponent, b.bound);
    }
    if let Some(b) = &oq {
        let _ = writeln!(t, "d <= e / (alpha^2 delta) = {}: {}", b.bound, b.holds);
    }
    let ok = exp.all_hold;
    let r = Report {
        alpha,
        delta,
        experiment: exp,
        qquery_bound: qb,
        one_query: oq,
    };
    Ok(emit(a.common.json, &r, t, ok))
}

fn bound_cmd(a: BoundArgs) -> Result<Outcome, Failure> {
    let mut t = String::new();
    let out = match a.theorem {
        Theorem::General => {
            if !(a.alpha > 0.0 && a.alpha <= 1.0 && a.delta > 0.0 && a.delta <= 1.0) {
                return Err("alpha and delta must lie in (0, 1]".into());
            }
            let b = general_bound(a.alpha, a.delta, a.d, !a.non_simple);
            let _ = writeln!(t, "n >= {}", b.bound);
            let _ = writeln!(
                t,
                "2^(alpha' delta' sqrt(d)) with alpha' = {}, delta' = {}, d = {}: exponent {}",
                b.alpha_used, b.delta_used, b.d, b.exponent
            );
            emit(a.json, &b, t, true)
        }
        Theorem::LargeAlpha => {
            let b = large_alpha_bound(a.alpha, a.delta, a.d, a.eps, a.t, a.kappa)?;
            let _ = writeln!(t, "n >= {}", b.bound);
            let _ = writeln!(
                t,
                "good-edge probability p = {} (eps = {}, t = {}, kappa = {})",
                b.probability_bound, b.eps, b.t, b.kappa
            );
            let _ = writeln!(t, "2^(2 p delta d / t): delta_good = {}, exponent {}", b.delta_good, b.exponent);
            if b.vacuous {
                let _ = writeln!(t, "vacuous: alpha is below the threshold for these parameters");
            }
            emit(a.json, &b, t, true)
        }
        Theorem::Bounded => {
            let b = bounded_code_bound(a.alpha, a.delta, a.c, a.d)?;
            let _ = writeln!(t, "n >= {}", b.bound);
            let _ = writeln!(
                t,
                "exp(alpha^2 delta'^2 d / (2e^2)) / (2e) with delta' = delta / {} = {}: exponent {}",
                b.buckets, b.delta_prime, b.exponent
            );
            emit(a.json, &b, t, true)
        }
        Theorem::Qquery => {
            let b = qquery_bound(a.alpha, a.delta, a.d, a.q)?;
            let _ = writeln!(t, "n >= {}", b.bound);
            let _ = writeln!(t, "(alpha^2 delta^(1/q) d)^(q/(q-1)) = {}^{}", b.base, b.exponent);
            emit(a.json, &b, t, true)
        }
        Theorem::OneQuery => {
            let b = one_query_bound(a.alpha, a.delta, a.d)?;
            let _ = writeln!(t, "d <= {}", b.bound);
            let _ = writeln!(t, "e / (alpha^2 delta); d = {} {}", b.d, if b.holds { "satisfies it" } else { "violates it" });
            emit(a.json, &b, t, true)
        }
    };
    Ok(out)
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("ALDC_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| format!("ALDC_THREADS must be a non-negative integer, got {v:?}"))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<Outcome, Failure> {
    configure_threads()?;
    match cli.command {
        Command::Gen(a) => gen(a),
        Command::Verify(a) => verify_cmd(a),
        Command::Reduce(a) => reduce_cmd(a),
        Command::CertifyCut(a) => cut_cmd(a),
        Command::CertifyTiling(a) => tiling_cmd(a),
        Command::Spectral(a) => spectral_cmd(a),
        Command::Qquery(a) => qquery_cmd(a),
        Command::Bound(a) => bound_cmd(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{}", out.stdout);
            ExitCode::from(if out.success { 0 } else { 2 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
