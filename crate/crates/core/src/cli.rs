//! Command-line front end. Each subcommand parses its flags, calls one
//! library operation and prints the result.
//!
//! Exit codes: 0 on success, 1 on usage or input errors, 2 on numerical
//! failure (singular or non positive definite matrices).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use crate::constraints::{sample_cm_cov, CmSpread};
use crate::error::Error;
use crate::general::{
    cov_table_general, cross_moment_general, e_minor_general, var_minor_breakdown,
};
use crate::index::IndexSeq;
use crate::matrix::{compound, format_scalar, DenseMatrix, SymPDMatrix};
use crate::minor_test::{standardized_minor_test, SampleInput, TestOptions};
use crate::oracle::{mc_minor_moments, MomentQuery};
use crate::rng::RngStream;
use crate::standard::{cov_compound_std, cross_moment_std, e_minor_std};
use crate::wishart::WishartSpec;

#[derive(Debug, Parser)]
#[command(name = "minor-moments", version, about = "Moments of minors of Wishart matrices")]
struct Cli {
    /// Output format; JSON for scalars and reports, CSV for matrices by default.
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Model {
    /// Hidden-variable family C_m.
    Gm,
}

#[derive(Debug, Args)]
struct SigmaArgs {
    /// Use Σ = I_r.
    #[arg(long, value_name = "R", conflicts_with = "sigma")]
    identity: Option<usize>,

    /// CSV file holding Σ, or `identity:R`.
    #[arg(long, value_name = "PATH")]
    sigma: Option<String>,
}

#[derive(Debug, Args)]
struct MinorArgs {
    /// Row indices, e.g. 1,2.
    #[arg(long)]
    rows: String,

    /// Column indices, e.g. 3,4.
    #[arg(long)]
    cols: String,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// E[det(S_IJ)].
    Moment {
        #[arg(long)]
        df: usize,
        #[command(flatten)]
        sigma: SigmaArgs,
        #[command(flatten)]
        minor: MinorArgs,
    },
    /// E[det(S_IJ) det(S_KL)].
    CrossMoment {
        #[arg(long)]
        df: usize,
        #[command(flatten)]
        sigma: SigmaArgs,
        #[command(flatten)]
        minor: MinorArgs,
        /// Row indices of the second minor.
        #[arg(long)]
        rows2: String,
        /// Column indices of the second minor.
        #[arg(long)]
        cols2: String,
    },
    /// Covariance matrix of the m-th compound of S.
    CovCompound {
        #[arg(long)]
        df: usize,
        #[command(flatten)]
        sigma: SigmaArgs,
        #[arg(long)]
        order: usize,
        /// Only pairs with rank(I) <= rank(J).
        #[arg(long)]
        unordered: bool,
    },
    /// Var[det(S_IJ)] with its conditional decomposition.
    Var {
        #[arg(long)]
        df: usize,
        #[command(flatten)]
        sigma: SigmaArgs,
        #[command(flatten)]
        minor: MinorArgs,
    },
    /// Standardized test for a vanishing minor of a sample covariance.
    Test {
        /// CSV file with the sample covariance or correlation matrix.
        #[arg(long)]
        data: PathBuf,
        /// Sample size N.
        #[arg(long)]
        n: usize,
        /// Degrees of freedom (default N - 1).
        #[arg(long)]
        df: Option<usize>,
        #[command(flatten)]
        minor: MinorArgs,
        /// The input is a correlation matrix.
        #[arg(long)]
        correlation: bool,
        /// Keep the variance term that vanishes under the null.
        #[arg(long)]
        keep_null_term: bool,
        /// Allow rows and columns to overlap.
        #[arg(long)]
        allow_overlap: bool,
    },
    /// Draw a covariance matrix from a model with a known vanishing minor.
    Simulate {
        #[arg(long, value_enum)]
        model: Model,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        seed: u64,
        /// CSV output path; a .json sidecar is written next to it.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        spread_lambda: f64,
        #[arg(long, default_value_t = 1.0)]
        spread_omega: f64,
    },
    /// Monte Carlo estimates of moments of minors.
    Oracle {
        #[command(flatten)]
        sigma: SigmaArgs,
        #[arg(long)]
        df: usize,
        /// Queries separated by ';': I|J for a mean, I|J|K|L for a product.
        #[arg(long)]
        pairs: String,
        #[arg(long)]
        reps: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        stream: u64,
        /// Estimate variances of the I|J queries instead of means.
        #[arg(long)]
        variance: bool,
    },
    /// The m-th compound matrix of a CSV matrix.
    Compound {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        order: usize,
        /// Label rows and columns with their index sets.
        #[arg(long)]
        labels: bool,
    },
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }

    fn from_error(context: &str, e: Error) -> Self {
        let code = if e.is_numerical() { 2 } else { 1 };
        let message = if context.is_empty() { e.to_string() } else { format!("{context}: {e}") };
        Failure { code, message }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::from_error("", e)
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn ctx<T>(context: &str, r: crate::error::Result<T>) -> CliResult<T> {
    r.map_err(|e| Failure::from_error(context, e))
}

enum SigmaSource {
    Identity(usize),
    Matrix(SymPDMatrix),
}

impl SigmaSource {
    fn dim(&self) -> usize {
        match self {
            SigmaSource::Identity(r) => *r,
            SigmaSource::Matrix(s) => s.dim(),
        }
    }

    fn into_matrix(self) -> SymPDMatrix {
        match self {
            SigmaSource::Identity(r) => SymPDMatrix::identity(r),
            SigmaSource::Matrix(s) => s,
        }
    }
}

fn read_spd(flag: &str, path: &Path) -> CliResult<SymPDMatrix> {
    let context = format!("{flag} {}", path.display());
    let m = ctx(&context, DenseMatrix::read_csv(path))?;
    ctx(&context, SymPDMatrix::new(m))
}

fn parse_identity(r: usize) -> CliResult<SigmaSource> {
    if r == 0 {
        return Err(Failure::usage("--identity: dimension must be at least 1"));
    }
    Ok(SigmaSource::Identity(r))
}

fn resolve_sigma(args: &SigmaArgs) -> CliResult<SigmaSource> {
    match (&args.identity, &args.sigma) {
        (Some(r), _) => parse_identity(*r),
        (None, Some(s)) => match s.strip_prefix("identity:") {
            Some(r) => parse_identity(
                r.trim()
                    .parse()
                    .map_err(|_| Failure::usage(format!("--sigma: bad dimension in {s:?}")))?,
            ),
            None => Ok(SigmaSource::Matrix(read_spd("--sigma", Path::new(s))?)),
        },
        (None, None) => Err(Failure::usage("one of --identity or --sigma is required")),
    }
}

fn parse_seq(flag: &str, s: &str, r: usize) -> CliResult<IndexSeq> {
    ctx(flag, IndexSeq::parse(s, r))
}

fn parse_minor(args: &MinorArgs, r: usize) -> CliResult<(IndexSeq, IndexSeq)> {
    Ok((parse_seq("--rows", &args.rows, r)?, parse_seq("--cols", &args.cols, r)?))
}

/// Replaces integral floats by integers so that `180.0` prints as `180`.
fn normalize(v: Value) -> Value {
    match v {
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() && x.fract() == 0.0 && x.abs() < 9.0e15 => {
                Value::from(x as i64)
            }
            _ => Value::Number(n),
        },
        Value::Array(a) => Value::Array(a.into_iter().map(normalize).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, normalize(v))).collect()),
        other => other,
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => format_scalar(x),
            _ => n.to_string(),
        },
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        Value::Array(a) => a.iter().map(csv_cell).collect::<Vec<_>>().join(","),
        other => other.to_string(),
    }
}

fn write_records(records: &[Vec<String>]) -> CliResult<String> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
    for r in records {
        w.write_record(r).map_err(|e| Failure::usage(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::usage(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}

fn object_csv(rows: &[Value]) -> CliResult<String> {
    let keys: Vec<String> = match rows.first() {
        Some(Value::Object(o)) => o.keys().cloned().collect(),
        _ => vec![],
    };
    let mut records = vec![keys.clone()];
    for row in rows {
        records.push(keys.iter().map(|k| csv_cell(&row[k.as_str()])).collect());
    }
    write_records(&records)
}

fn render_value(v: &impl Serialize, format: Format) -> CliResult<String> {
    let value = serde_json::to_value(v).map_err(|e| Failure::usage(e.to_string()))?;
    match format {
        Format::Json => Ok(serde_json::to_string(&normalize(value)).expect("valid JSON") + "\n"),
        Format::Csv => match &value {
            Value::Object(_) => object_csv(std::slice::from_ref(&value)),
            Value::Array(rows) => object_csv(rows),
            other => Ok(csv_cell(other) + "\n"),
        },
    }
}

fn render_scalar(x: f64, format: Format) -> CliResult<String> {
    match format {
        Format::Json => render_value(&x, format),
        Format::Csv => Ok(format_scalar(x) + "\n"),
    }
}

#[derive(Serialize)]
struct LabeledMatrix {
    labels: Option<Vec<String>>,
    matrix: Vec<Vec<f64>>,
}

fn render_matrix(m: &DenseMatrix, labels: Option<&[String]>, format: Format) -> CliResult<String> {
    match format {
        Format::Csv => Ok(m.to_csv_string(labels)),
        Format::Json => render_value(
            &LabeledMatrix {
                labels: labels.map(<[String]>::to_vec),
                matrix: (0..m.rows()).map(|i| (0..m.cols()).map(|j| m[(i, j)]).collect()).collect(),
            },
            format,
        ),
    }
}

#[derive(Serialize)]
struct SimulateSidecar {
    model: &'static str,
    m: usize,
    seed: u64,
    stream: u64,
    spread_lambda: f64,
    spread_omega: f64,
    #[serde(rename = "I")]
    rows: Vec<usize>,
    #[serde(rename = "J")]
    cols: Vec<usize>,
    vanishing_minor: f64,
    row_norm_product: f64,
}

/// Output of a successful command: stdout text plus optional stderr text.
struct Output {
    stdout: String,
    stderr: String,
}

impl From<String> for Output {
    fn from(stdout: String) -> Self {
        Output { stdout, stderr: String::new() }
    }
}

fn sidecar_path(out: &Path) -> PathBuf {
    if out.extension().is_some_and(|e| e != "json") {
        out.with_extension("json")
    } else {
        let mut s = out.as_os_str().to_owned();
        s.push(".json");
        PathBuf::from(s)
    }
}

fn execute(cli: Cli) -> CliResult<Output> {
    let scalar_format = cli.format.unwrap_or(Format::Json);
    let matrix_format = cli.format.unwrap_or(Format::Csv);
    let out = match cli.command {
        Command::Moment { df, sigma, minor } => {
            let sigma = resolve_sigma(&sigma)?;
            let (i, j) = parse_minor(&minor, sigma.dim())?;
            let v = match sigma {
                SigmaSource::Identity(_) => e_minor_std(df, &i, &j)?,
                SigmaSource::Matrix(s) => e_minor_general(df, &s, &i, &j)?,
            };
            render_scalar(v, scalar_format)?.into()
        }
        Command::CrossMoment { df, sigma, minor, rows2, cols2 } => {
            let sigma = resolve_sigma(&sigma)?;
            let r = sigma.dim();
            let (i, j) = parse_minor(&minor, r)?;
            let (k, l) = (parse_seq("--rows2", &rows2, r)?, parse_seq("--cols2", &cols2, r)?);
            let v = match sigma {
                SigmaSource::Identity(_) => cross_moment_std(df, &i, &j, &k, &l)?,
                SigmaSource::Matrix(s) => cross_moment_general(df, &s, &i, &j, &k, &l)?,
            };
            render_scalar(v, scalar_format)?.into()
        }
        Command::CovCompound { df, sigma, order, unordered } => {
            let sigma = resolve_sigma(&sigma)?;
            let (labels, table) = match sigma {
                SigmaSource::Identity(r) => {
                    let cov = cov_compound_std(df, r, order)?;
                    if unordered {
                        cov.unordered_table()
                    } else {
                        (cov.pair_labels(), cov.to_dense())
                    }
                }
                SigmaSource::Matrix(s) => cov_table_general(df, &s, order, unordered)?,
            };
            render_matrix(&table, Some(&labels), matrix_format)?.into()
        }
        Command::Var { df, sigma, minor } => {
            let sigma = resolve_sigma(&sigma)?;
            let (i, j) = parse_minor(&minor, sigma.dim())?;
            let v = var_minor_breakdown(df, &sigma.into_matrix(), &i, &j)?;
            render_value(&v, scalar_format)?.into()
        }
        Command::Test { data, n, df, minor, correlation, keep_null_term, allow_overlap } => {
            let matrix = read_spd("--data", &data)?;
            let (i, j) = parse_minor(&minor, matrix.dim())?;
            let mut input = if correlation {
                ctx("--correlation", SampleInput::correlation(matrix, n))?
            } else {
                ctx("--n", SampleInput::covariance(matrix, n))?
            };
            if let Some(df) = df {
                input = ctx("--df", input.with_df(df))?;
            }
            let options = TestOptions { drop_null_term: !keep_null_term, allow_overlap };
            let report = standardized_minor_test(&input, &i, &j, options)?;
            let mut out: Output = render_value(&report, scalar_format)?.into();
            if let Some(w) = &report.warning {
                out.stderr = format!("warning: {w}\n");
            }
            out
        }
        Command::Simulate { model: Model::Gm, m, seed, out, spread_lambda, spread_omega } => {
            let rng = RngStream::new(seed);
            let spread = CmSpread { lambda: spread_lambda, omega: spread_omega };
            let h = ctx("--m", sample_cm_cov(m, &mut rng.generator(), spread))?;
            let sidecar = SimulateSidecar {
                model: "gm",
                m,
                seed,
                stream: rng.stream,
                spread_lambda,
                spread_omega,
                rows: h.rows().entries().to_vec(),
                cols: h.cols().entries().to_vec(),
                vanishing_minor: h.vanishing_minor(),
                row_norm_product: h.row_norm_product(),
            };
            let csv = h.sigma.matrix().to_csv_string(None);
            let json = render_value(&sidecar, Format::Json)?;
            match out {
                Some(path) => {
                    let side = sidecar_path(&path);
                    std::fs::write(&path, csv)
                        .map_err(|e| Failure::usage(format!("--out {}: {e}", path.display())))?;
                    std::fs::write(&side, json)
                        .map_err(|e| Failure::usage(format!("--out {}: {e}", side.display())))?;
                    Output::from(String::new())
                }
                None => Output { stdout: csv, stderr: json },
            }
        }
        Command::Oracle { sigma, df, pairs, reps, seed, stream, variance } => {
            let sigma = resolve_sigma(&sigma)?;
            let r = sigma.dim();
            let queries = pairs
                .split(';')
                .map(str::trim)
                .filter(|q| !q.is_empty())
                .map(|q| ctx("--pairs", MomentQuery::parse(q, r, variance)))
                .collect::<CliResult<Vec<_>>>()?;
            let spec = ctx("--df", WishartSpec::new(df, sigma.into_matrix()))?;
            let est = mc_minor_moments(&spec, &queries, reps, RngStream::with_stream(seed, stream))?;
            render_value(&est, scalar_format)?.into()
        }
        Command::Compound { matrix, order, labels } => {
            let a = ctx(&format!("--matrix {}", matrix.display()), DenseMatrix::read_csv(&matrix))?;
            let c = ctx("--order", compound(&a, order))?;
            let lab = c.labels();
            render_matrix(c.matrix(), labels.then_some(&lab[..]), matrix_format)?.into()
        }
    };
    Ok(out)
}

/// Runs the command line `args` (including the program name), writing
/// results to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    1
                }
            };
        }
    };
    match execute(cli) {
        Ok(o) => {
            let _ = write!(out, "{}", o.stdout);
            let _ = write!(err, "{}", o.stderr);
            0
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut argv = vec!["minor-moments"];
        argv.extend_from_slice(args);
        let code = run(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn scalar_outputs() {
        assert_eq!(call(&["moment", "--df", "10", "--identity", "4", "--rows", "1,2", "--cols", "1,2"]).1, "90\n");
        let (code, out, _) = call(&["var", "--df", "10", "--identity", "4", "--rows", "1,2", "--cols", "3,4"]);
        assert_eq!(code, 0);
        assert_eq!(out, "{\"total\":180,\"mean_part\":0,\"var_part\":180,\"formula\":\"prop5.5\"}\n");
        let (_, out, _) = call(&[
            "var", "--df", "10", "--sigma", "identity:4", "--rows", "1,2", "--cols", "3,4", "--format", "csv",
        ]);
        assert_eq!(out, "total,mean_part,var_part,formula\n180,0,180,prop5.5\n");
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(call(&["moment", "--df", "10"]).0, 1);
        assert_eq!(call(&["moment", "--df", "10", "--identity", "4", "--rows", "1,5", "--cols", "1,2"]).0, 1);
        assert_eq!(call(&["frobnicate"]).0, 1);
        assert_eq!(call(&["moment", "--df", "10", "--rows", "1", "--cols", "1"]).0, 1);
        let (code, _, err) = call(&["moment", "--df", "10", "--sigma", "/nonexistent.csv", "--rows", "1", "--cols", "1"]);
        assert_eq!(code, 1);
        assert!(err.contains("--sigma /nonexistent.csv"), "{err}");
        assert_eq!(call(&["--help"]).0, 0);
    }

    #[test]
    fn sidecar_naming() {
        assert_eq!(sidecar_path(Path::new("a/b.csv")), PathBuf::from("a/b.json"));
        assert_eq!(sidecar_path(Path::new("a/b")), PathBuf::from("a/b.json"));
        assert_eq!(sidecar_path(Path::new("b.json")), PathBuf::from("b.json.json"));
    }
}
