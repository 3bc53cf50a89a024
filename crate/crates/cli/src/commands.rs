use std::collections::BTreeSet;
use std::fmt;
use std::io::{self, Write};
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pirpsi::audit::{self, AuditError, Control, StatConfig};
use pirpsi::capacity::{self, format_rational, CapacityError, CapacityReport, IdentityReport, Real};
use pirpsi::net::{self, codec, NetError, Server, TcpTransport};
use pirpsi::protocol::{self, FreshChunkDraw, Library, ProtocolError, RequestSet, SideInfo};
use pirpsi::{Execution, FieldModulus, Params};

use crate::ranges::parse_sweep;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Verification(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Verification(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Verification(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl From<ProtocolError> for CliError {
    fn from(e: ProtocolError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<CapacityError> for CliError {
    fn from(e: CapacityError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<AuditError> for CliError {
    fn from(e: AuditError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<NetError> for CliError {
    fn from(e: NetError) -> Self {
        match e {
            NetError::Protocol(p) => p.into(),
            other => CliError::Io(other.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "pirpsi", version, about = "Multi-message PIR with private side information")]
pub struct Cli {
    /// Run batch work on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Tuple {
    /// Number of servers.
    #[arg(long = "N")]
    n: usize,
    /// Number of files in the library.
    #[arg(long = "K")]
    k: usize,
    /// Number of requested files.
    #[arg(long = "P")]
    p: usize,
    /// Number of side-information files.
    #[arg(long = "M", default_value_t = 0)]
    m: usize,
}

#[derive(Debug, Args)]
struct SchemeArgs {
    #[command(flatten)]
    tuple: Tuple,
    /// Symbols per chunk; files have c * N^2 symbols.
    #[arg(long = "c", default_value_t = 1)]
    c: usize,
    /// Field modulus (prime).
    #[arg(long = "q", default_value_t = 65537)]
    q: u32,
}

impl SchemeArgs {
    fn params(&self) -> Result<Params> {
        let t = &self.tuple;
        let modulus = FieldModulus::new(self.q).map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(Params::with_modulus(t.n, t.k, t.p, t.m, self.c, modulus)?)
    }
}

/// A single tuple or a sweep, for the capacity-style commands.
#[derive(Debug, Args)]
struct TupleOrSweep {
    #[arg(long = "N", required_unless_present = "sweep", conflicts_with = "sweep")]
    n: Option<usize>,
    #[arg(long = "K", required_unless_present = "sweep", conflicts_with = "sweep")]
    k: Option<usize>,
    #[arg(long = "P", required_unless_present = "sweep", conflicts_with = "sweep")]
    p: Option<usize>,
    #[arg(long = "M", conflicts_with = "sweep")]
    m: Option<usize>,
    /// Ranges such as `N=2..3 K=2..8`; P and M default to every valid value.
    #[arg(long, num_args = 1.., value_name = "VAR=RANGE")]
    sweep: Option<Vec<String>>,
}

impl TupleOrSweep {
    fn tuples(&self) -> Result<Vec<(usize, usize, usize, usize)>> {
        match &self.sweep {
            Some(items) => {
                let tuples = parse_sweep(items).map_err(CliError::Usage)?.tuples();
                if tuples.is_empty() {
                    return Err(CliError::Usage("sweep contains no valid tuple".into()));
                }
                Ok(tuples)
            }
            None => {
                let t = (self.n.unwrap(), self.k.unwrap(), self.p.unwrap(), self.m.unwrap_or(0));
                capacity::dpsi(t.0, t.1, t.2, t.3)?;
                Ok(vec![t])
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ControlArg {
    None,
    NoPermutations,
    UnpermutedFresh,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Optimal load, converse bound and regime.
    Capacity {
        #[command(flatten)]
        select: TupleOrSweep,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
        /// Print decimals instead of exact fractions.
        #[arg(long)]
        decimal: bool,
    },
    /// Run exchanges with random admissible selections and check decoding.
    Simulate {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long)]
        json: bool,
    },
    /// Check that each server's query distribution ignores the selection.
    Audit {
        #[command(flatten)]
        scheme: SchemeArgs,
        /// Enumerate all randomness instead of sampling.
        #[arg(long, conflicts_with = "samples")]
        exact: bool,
        /// Seeds per admissible pair.
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Audit a deliberately leaky variant.
        #[arg(long, value_enum, default_value = "none")]
        control: ControlArg,
        /// Also split one pair's samples in half and test them against each other.
        #[arg(long, conflicts_with = "exact")]
        self_check: bool,
        #[arg(long)]
        json: bool,
    },
    /// Check the library-size reduction identity of the load accounting.
    VerifyIdentity {
        #[command(flatten)]
        select: TupleOrSweep,
        #[arg(long)]
        decimal: bool,
    },
    /// Serve one library over TCP.
    Serve {
        #[arg(long)]
        library: PathBuf,
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long, default_value = "127.0.0.1:0")]
        listen: String,
    },
    /// Retrieve files from running servers.
    Fetch {
        /// One address per server, comma separated, in server order.
        #[arg(long, value_delimiter = ',', required = true)]
        servers: Vec<String>,
        /// Library file the side information is read from.
        #[arg(long)]
        library: PathBuf,
        #[command(flatten)]
        scheme: SchemeArgs,
        /// Requested file indices (0-based), comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        request: Vec<usize>,
        /// Side-information file indices (0-based), comma separated.
        #[arg(long, value_delimiter = ',')]
        side: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the canonical transcript bytes here.
        #[arg(long)]
        transcript: Option<PathBuf>,
    },
    /// Write a random library file.
    GenLibrary {
        #[arg(long = "K")]
        k: usize,
        #[arg(long = "L")]
        l: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "q", default_value_t = 65537)]
        q: u32,
        #[arg(long)]
        out: PathBuf,
    },
}

pub fn run(cli: Cli) -> Result<()> {
    let exec = if cli.sequential { Execution::Sequential } else { Execution::default() };
    match cli.command {
        Command::Capacity { select, format, decimal } => cmd_capacity(&select, format, decimal, exec),
        Command::Simulate { scheme, seed, trials, json } => cmd_simulate(&scheme, seed, trials, json, exec),
        Command::Audit { scheme, exact, samples, seed, control, self_check, json } => {
            let params = scheme.params()?;
            if exact {
                cmd_audit_exact(&params, control, json, exec)
            } else {
                cmd_audit_sampled(&params, samples, seed, control, self_check, json, exec)
            }
        }
        Command::VerifyIdentity { select, decimal } => cmd_verify_identity(&select, decimal, exec),
        Command::Serve { library, scheme, listen } => cmd_serve(&library, &scheme, &listen),
        Command::Fetch { servers, library, scheme, request, side, seed, transcript } => {
            cmd_fetch(&servers, &library, &scheme, &request, &side, seed, transcript)
        }
        Command::GenLibrary { k, l, seed, q, out } => cmd_gen_library(k, l, seed, q, &out),
    }
}

fn stdout_err(e: io::Error) -> CliError {
    CliError::Io(format!("writing output: {e}"))
}

fn print_table(header: &[&str], rows: &[Vec<String>]) -> io::Result<()> {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = io::stdout().lock();
    let line = |cells: Vec<&str>| {
        cells.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect::<Vec<_>>().join("  ")
    };
    writeln!(out, "{}", line(header.to_vec()))?;
    for row in rows {
        writeln!(out, "{}", line(row.iter().map(String::as_str).collect()))?;
    }
    Ok(())
}

fn cmd_capacity(select: &TupleOrSweep, format: Format, decimal: bool, exec: Execution) -> Result<()> {
    let tuples = select.tuples()?;
    let reports: Vec<CapacityReport> = exec
        .map(&tuples, |&(n, k, p, m)| capacity::capacity_report(n, k, p, m))
        .into_iter()
        .collect::<std::result::Result<_, _>>()?;
    if format == Format::Csv {
        return capacity::write_csv(&reports, decimal, io::stdout().lock()).map_err(stdout_err);
    }
    if select.sweep.is_none() {
        let r = &reports[0];
        let note = if r.optimal { "optimal" } else { "achievable; capacity unknown" };
        println!("D = {} ({note})", format_rational(&r.achievable, decimal));
        println!("converse = {}", format_rational(&r.converse, decimal));
        println!("regime = {}", r.regime);
        if let Some(c) = r.capacity() {
            println!("capacity = {}", format_rational(&c, decimal));
        }
        return Ok(());
    }
    let header = ["N", "K", "P", "M", "regime", "achievable", "converse", "optimal", "identity_ok"];
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                r.k.to_string(),
                r.p.to_string(),
                r.m.to_string(),
                r.regime.to_string(),
                format_rational(&r.achievable, decimal),
                format_rational(&r.converse, decimal),
                r.optimal.to_string(),
                r.identity_ok.to_string(),
            ]
        })
        .collect();
    print_table(&header, &rows).map_err(stdout_err)
}

fn cmd_simulate(scheme: &SchemeArgs, seed: u64, trials: usize, json: bool, exec: Execution) -> Result<()> {
    let params = scheme.params()?;
    let summary = protocol::simulate(&params, trials, seed, exec);
    let optimal = params.regime() == pirpsi::Regime::High;
    let loads: Vec<String> = summary.loads.iter().map(|l| format_rational(l, false)).collect();
    if json {
        let value = serde_json::json!({
            "trials": summary.trials,
            "successes": summary.successes,
            "loads": loads,
            "optimal": optimal,
            "errors": summary.errors,
        });
        println!("{}", serde_json::to_string_pretty(&value).expect("json"));
    } else {
        println!("decoded: {}/{}", summary.successes, summary.trials);
        let note = if optimal { "optimal" } else { "not claimed optimal" };
        println!("load: {} ({note})", loads.join(", "));
        for e in &summary.errors {
            println!("error: {e}");
        }
    }
    if summary.successes != summary.trials {
        return Err(CliError::Verification(format!(
            "{} of {} trials failed to decode",
            summary.trials - summary.successes,
            summary.trials
        )));
    }
    Ok(())
}

fn cmd_audit_exact(params: &Params, control: ControlArg, json: bool, exec: Execution) -> Result<()> {
    let draw = match control {
        ControlArg::None => FreshChunkDraw::Permuted,
        ControlArg::UnpermutedFresh => FreshChunkDraw::Unpermuted,
        ControlArg::NoPermutations => {
            return Err(CliError::Usage("the exact audit supports --control none or unpermuted-fresh".into()))
        }
    };
    let report = audit::exact_audit(params, draw, exec)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&report).expect("json"));
    } else {
        for s in &report.servers {
            println!(
                "server {}: {} pairs, {} cases each, {} distinct queries, {}",
                s.server,
                s.pairs,
                s.cases_per_pair,
                s.support_size,
                if s.identical { "identical" } else { "DIFFERENT" }
            );
        }
    }
    if report.private {
        if !json {
            println!("PRIVATE: all pairs identical");
        }
        Ok(())
    } else {
        let leaky: Vec<String> =
            report.servers.iter().filter(|s| !s.identical).map(|s| s.server.to_string()).collect();
        if !json {
            println!("LEAK: distributions differ at server(s) {}", leaky.join(", "));
        }
        Err(CliError::Verification("query distributions depend on the selection".into()))
    }
}

fn cmd_audit_sampled(
    params: &Params,
    samples: usize,
    seed: u64,
    control: ControlArg,
    self_check: bool,
    json: bool,
    exec: Execution,
) -> Result<()> {
    let control = match control {
        ControlArg::None => Control::None,
        ControlArg::NoPermutations => Control::NoPermutations,
        ControlArg::UnpermutedFresh => Control::UnpermutedFresh,
    };
    let config = StatConfig { seed, control, exec, ..StatConfig::default() };
    let reports = audit::statistical_audit_all(params, samples, &config)?;
    let split = if self_check {
        let config = StatConfig { comparisons: params.servers(), ..config };
        Some((0..params.servers()).map(|s| audit::split_half_audit(params, s, samples, &config)).collect::<std::result::Result<Vec<_>, _>>()?)
    } else {
        None
    };
    if json {
        let value = serde_json::json!({ "servers": reports, "self_check": split });
        println!("{}", serde_json::to_string_pretty(&value).expect("json"));
    } else {
        for r in &reports {
            println!(
                "server {}: {} pairs x {} samples, min p = {:.3e}, threshold {:.3e}, {}",
                r.server,
                r.groups,
                r.samples_per_group,
                r.min_p_value,
                r.threshold,
                if r.pass { "pass" } else { "REJECT" }
            );
            for t in &r.tests {
                println!(
                    "  {:<24} chi2 = {:>12.3}  dof = {:>4}  p = {:.3e}",
                    t.feature, t.statistic, t.dof, t.p_value
                );
            }
            for w in &r.warnings {
                println!("  warning: {w}");
            }
        }
        if let Some(split) = &split {
            for r in split {
                println!("self-check server {}: {}", r.server, if r.pass { "pass" } else { "REJECT" });
            }
        }
    }
    let all = reports.iter().chain(split.iter().flatten());
    if all.clone().all(|r| r.pass) {
        if !json {
            println!("PRIVATE: no feature rejects homogeneity at alpha = {}", config.alpha);
        }
        Ok(())
    } else {
        if !json {
            println!("LEAK: homogeneity rejected");
        }
        Err(CliError::Verification("query distributions depend on the selection".into()))
    }
}

fn real_text(r: &Real, decimal: bool) -> String {
    match (r, decimal) {
        (Real::Exact(q), _) => format_rational(q, decimal),
        (Real::Approx(d), true) => format!("{:.15}", d),
        (Real::Approx(d), false) => format!("~{:.20}", d),
    }
}

fn cmd_verify_identity(select: &TupleOrSweep, decimal: bool, exec: Execution) -> Result<()> {
    let tuples = select.tuples()?;
    let reports: Vec<IdentityReport> = exec
        .map(&tuples, |&(n, k, p, m)| capacity::verify_reduction_identity(n, k, p, m))
        .into_iter()
        .collect::<std::result::Result<_, _>>()?;
    let header = ["N", "K", "P", "M", "regime", "p(K)-q(K,M)", "p(K-M)", "status"];
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                r.k.to_string(),
                r.p.to_string(),
                r.m.to_string(),
                r.regime.to_string(),
                real_text(&r.lhs, decimal),
                real_text(&r.rhs, decimal),
                if r.ok { "OK".into() } else { format!("FAIL ({:.2e})", r.deviation) },
            ]
        })
        .collect();
    print_table(&header, &rows).map_err(stdout_err)?;
    let failed = reports.iter().filter(|r| !r.ok).count();
    if failed > 0 {
        return Err(CliError::Verification(format!("{failed} of {} rows failed", reports.len())));
    }
    println!("all {} rows OK", reports.len());
    Ok(())
}

fn load_library(path: &PathBuf) -> Result<Library> {
    net::load_library(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn cmd_serve(path: &PathBuf, scheme: &SchemeArgs, listen: &str) -> Result<()> {
    let params = scheme.params()?;
    let library = load_library(path)?;
    library.check_params(&params)?;
    let server = Server::bind(listen, Arc::new(library))?;
    println!("listening on {}", server.local_addr()?);
    io::stdout().flush()?;
    server.run();
    Ok(())
}

fn cmd_fetch(
    servers: &[String],
    path: &PathBuf,
    scheme: &SchemeArgs,
    request: &[usize],
    side: &[usize],
    seed: u64,
    transcript_out: Option<PathBuf>,
) -> Result<()> {
    let params = scheme.params()?;
    if servers.len() != params.servers() {
        return Err(CliError::Usage(format!("{} server addresses for N = {}", servers.len(), params.servers())));
    }
    let request_set = RequestSet::new(request.iter().copied());
    let side_set: BTreeSet<usize> = side.iter().copied().collect();
    if request_set.len() != request.len() || side_set.len() != side.len() {
        return Err(CliError::Usage("duplicate file index".into()));
    }
    protocol::validate_selection(&params, &request_set, &side_set)?;
    let library = load_library(path)?;
    library.check_params(&params)?;
    let side_info = SideInfo::from_library(&library, side_set);
    let transport = TcpTransport::new(servers.to_vec());
    let mut transcript = net::fetch(&transport, &params, &request_set, &side_info, seed)?;
    if let Some(out) = transcript_out {
        std::fs::write(&out, codec::encode_transcript(&transcript))
            .map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    }
    let ok = transcript.verify(&library);
    let files: Vec<String> = transcript.decoded.keys().map(usize::to_string).collect();
    println!("decoded files {}: {}", files.join(", "), if ok { "OK" } else { "MISMATCH" });
    println!(
        "downloaded {} symbols, load {}",
        transcript.downloaded_symbols,
        format_rational(&transcript.load, false)
    );
    if ok {
        Ok(())
    } else {
        Err(CliError::Verification("decoded files differ from the library".into()))
    }
}

fn cmd_gen_library(k: usize, l: usize, seed: u64, q: u32, out: &PathBuf) -> Result<()> {
    if k == 0 || l == 0 {
        return Err(CliError::Usage("K and L must be positive".into()));
    }
    let modulus = FieldModulus::new(q).map_err(|e| CliError::Usage(e.to_string()))?;
    let library = Library::random(modulus, k, l, seed);
    net::save_library(&library, out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    println!("wrote {} files of {} symbols to {}", k, l, out.display());
    Ok(())
}
