//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::io::{BufRead, BufReader};
use std::path::Path;
use std::process::{Child, Command, Stdio};
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use pirpsi::audit::{exact_audit, statistical_audit_all, Control, StatConfig};
use pirpsi::capacity::{
    accounting_p, accounting_q, converse_bound, dpsi, dpsi_equiv_check, verify_reduction_identity, Decimal,
};
use pirpsi::net::codec::encode_transcript;
use pirpsi::net::{fetch, load_library, TcpTransport};
use pirpsi::protocol::{
    admissible_pairs, exhaustive_grid, run_exchange, CaseOutcome, FreshChunkDraw, Library, Params, RequestSet,
    SideInfo,
};
use pirpsi::{Execution, Regime};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn q(a: i64, b: i64) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

fn within(elapsed: Duration, limit: Duration, detail: String) -> Check {
    if elapsed < limit {
        Ok(detail)
    } else {
        Err(format!("{detail}; took {elapsed:.2?}, limit {limit:?}"))
    }
}

fn example_one() -> Check {
    let start = Instant::now();
    for (m, want) in [(1, q(5, 4)), (0, q(3, 2))] {
        let params = Params::new(2, 4, 2, m, 1).map_err(|e| e.to_string())?;
        let lib = Library::random(params.modulus(), 4, 4, 1);
        let side = SideInfo::from_library(&lib, (2..2 + m).collect::<Vec<_>>());
        let t = run_exchange(&params, &lib, &RequestSet::new([0, 1]), &side, 5).map_err(|e| e.to_string())?;
        let per_server = if m == 1 { 5 } else { 6 };
        if t.answers.iter().any(|a| a.symbol_count() != per_server) {
            return Err(format!("M = {m}: answer sizes {:?}", t.answers.iter().map(|a| a.symbol_count()).collect::<Vec<_>>()));
        }
        if t.load != want || t.verified != Some(true) {
            return Err(format!("M = {m}: load {} verified {:?}", t.load, t.verified));
        }
    }
    within(start.elapsed(), Duration::from_secs(1), "5 symbols per server, load 5/4; M = 0 gives 3/2".into())
}

fn decodability(cases: &[CaseOutcome], elapsed: Duration) -> Check {
    let failed: Vec<_> = cases.iter().filter(|c| !c.decoded_ok).collect();
    if let Some(c) = failed.first() {
        return Err(format!("{} of {} failed, e.g. {:?} {:?} {:?}: {:?}", failed.len(), cases.len(), c.params, c.side, c.request, c.error));
    }
    within(elapsed, Duration::from_secs(60), format!("{} exchanges decoded bit-exactly in {elapsed:.2?}", cases.len()))
}

fn load_formula(cases: &[CaseOutcome]) -> Check {
    let mut checked = 0;
    for c in cases.iter().filter(|c| c.params.regime() == Regime::High) {
        let p = &c.params;
        let eq1 = dpsi(p.servers(), p.files(), p.requests(), p.side_size()).map_err(|e| e.to_string())?;
        let measured = q(c.downloaded_symbols as i64, (p.requests() * p.file_len()) as i64);
        if Some(&measured) != eq1.as_ref() || c.load.as_ref() != Some(&measured) {
            return Err(format!("{p:?}: measured {measured}, formula {eq1:?}"));
        }
        checked += 1;
    }
    Ok(format!("{checked} high-regime exchanges match exactly"))
}

fn reduction_identity() -> Check {
    let start = Instant::now();
    let mut high = 0;
    for n in 2..=3 {
        for k in 2..=8 {
            for p in 1..=k {
                for m in 0..=k - p {
                    if Regime::of(k, p, m) != Regime::High {
                        continue;
                    }
                    let r = verify_reduction_identity(n, k, p, m).map_err(|e| e.to_string())?;
                    if !(r.ok && r.lhs.as_exact().is_some() && r.lhs == r.rhs) {
                        return Err(format!("high {:?}: {} vs {}", (n, k, p, m), r.lhs, r.rhs));
                    }
                    high += 1;
                }
            }
        }
    }
    let mut low = 0;
    let mut worst = 0.0f64;
    for n in 2..=3 {
        for p in 1..=2 {
            for ratio in 2..=4 {
                for m in 0..=2 {
                    let k = ratio * p + m;
                    let r = verify_reduction_identity(n, k, p, m).map_err(|e| e.to_string())?;
                    worst = worst.max(r.deviation);
                    if !r.ok || r.deviation > 1e-9 {
                        return Err(format!("low {:?}: deviation {}", (n, k, p, m), r.deviation));
                    }
                    low += 1;
                }
            }
        }
    }
    within(
        start.elapsed(),
        Duration::from_secs(10),
        format!("{high} high-regime rows exact, {low} low-regime rows within {worst:.1e} ({} digits)", pirpsi::capacity::precise::FRACTION_DIGITS),
    )
}

fn theorem_equivalence() -> Check {
    let mut count = 0;
    for n in 2..=4 {
        for k in 1..=10 {
            for p in 1..=k {
                for m in 0..=k - p {
                    if dpsi(n, k, p, m).map_err(|e| e.to_string())?.is_none() {
                        continue;
                    }
                    if !dpsi_equiv_check(n, k, p, m).map_err(|e| e.to_string())? {
                        return Err(format!("{:?}", (n, k, p, m)));
                    }
                    count += 1;
                }
            }
        }
    }
    Ok(format!("{count} theorem-regime tuples"))
}

/// Bound vs engine load on every simulated tuple. High regime: the engine
/// meets the bound exactly. Low regime with integral `(K-M)/P`: the
/// optimal scheme's accounting load `N (p - q) / (P L)` meets it within
/// 1e-9 and the engine stays above. Elsewhere the engine is strictly above.
fn converse_consistency(cases: &[CaseOutcome]) -> Check {
    let mut tuples: Vec<(Params, BigRational)> = Vec::new();
    for c in cases {
        if let Some(load) = &c.load {
            if !tuples.iter().any(|(p, _)| p == &c.params) {
                tuples.push((c.params, load.clone()));
            }
        }
    }
    let tol = q(1, 1_000_000_000_000);
    let (mut exact, mut accounted, mut open) = (0, 0, 0);
    for (p, load) in &tuples {
        let (n, k, pp, m) = (p.servers(), p.files(), p.requests(), p.side_size());
        let bound = converse_bound(n, k, pp, m).map_err(|e| e.to_string())?;
        if bound > load.clone() + tol.clone() {
            return Err(format!("{p:?}: bound {bound} above load {load}"));
        }
        let theorem = dpsi(n, k, pp, m).map_err(|e| e.to_string())?.is_some();
        match (p.regime(), theorem) {
            (Regime::High, _) => {
                if &bound != load {
                    return Err(format!("{p:?}: high-regime load {load} differs from bound {bound}"));
                }
                exact += 1;
            }
            (Regime::Low, true) => {
                let pk = accounting_p(n, k, pp, Regime::Low).map_err(|e| e.to_string())?.to_decimal();
                let qk = accounting_q(n, k, m, pp, Regime::Low).map_err(|e| e.to_string())?.to_decimal();
                let accounting = (pk - qk) * Decimal::from_int(n as i64) / Decimal::from_int(pp as i64);
                let gap = (accounting - Decimal::from_rational(&bound)).abs().to_f64();
                if gap > 1e-9 || load <= &bound {
                    return Err(format!("{p:?}: accounting gap {gap:.2e}, engine {load} vs bound {bound}"));
                }
                accounted += 1;
            }
            (Regime::Low, false) => {
                if load <= &bound {
                    return Err(format!("{p:?}: off-theorem engine load {load} meets bound {bound}"));
                }
                open += 1;
            }
        }
    }
    Ok(format!(
        "{} tuples: {exact} high exact, {accounted} low-regime optimal within 1e-9, {open} off-theorem strictly above",
        tuples.len()
    ))
}

fn exact_privacy() -> Check {
    let start = Instant::now();
    let mut notes = Vec::new();
    for (n, k, p, m) in [(2, 2, 1, 0), (2, 3, 1, 1), (2, 3, 2, 0)] {
        let params = Params::new(n, k, p, m, 1).map_err(|e| e.to_string())?;
        let report = exact_audit(&params, FreshChunkDraw::Permuted, Execution::default()).map_err(|e| e.to_string())?;
        if !report.private {
            return Err(format!("{:?} distributions differ", (n, k, p, m)));
        }
        notes.push(format!("{:?}: {} pairs", (n, k, p, m), report.servers[0].pairs));
    }
    within(start.elapsed(), Duration::from_secs(300), format!("identical maps for {}", notes.join(", ")))
}

fn statistical_privacy() -> Check {
    let start = Instant::now();
    let params = Params::new(2, 4, 2, 1, 1).map_err(|e| e.to_string())?;
    let config = StatConfig { seed: 2024, ..StatConfig::default() };
    let honest = statistical_audit_all(&params, 100_000, &config).map_err(|e| e.to_string())?;
    let control = statistical_audit_all(&params, 100_000, &StatConfig { control: Control::NoPermutations, ..config })
        .map_err(|e| e.to_string())?;
    let min_p = honest.iter().map(|r| r.min_p_value).fold(1.0, f64::min);
    if !honest.iter().all(|r| r.pass) {
        return Err(format!("honest scheme rejected, min p = {min_p:.3e}"));
    }
    if control.iter().all(|r| r.pass) {
        return Err("permutation-disabled control not detected".into());
    }
    within(
        start.elapsed(),
        Duration::from_secs(120),
        format!("min p = {min_p:.3e} vs per-test level {:.1e}; control rejected", honest[0].threshold),
    )
}

struct Daemon(Child);

impl Drop for Daemon {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

fn spawn_server(bin: &str, library: &Path) -> Result<(Daemon, String), String> {
    let mut child = Command::new(bin)
        .args(["serve", "--library"])
        .arg(library)
        .args(["--N", "2", "--K", "4", "--P", "2", "--M", "1", "--listen", "127.0.0.1:0"])
        .stdout(Stdio::piped())
        .spawn()
        .map_err(|e| e.to_string())?;
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).map_err(|e| e.to_string())?;
    let addr = line.trim().strip_prefix("listening on ").ok_or(format!("unexpected banner {line:?}"))?.to_string();
    Ok((Daemon(child), addr))
}

fn network_equivalence() -> Check {
    let start = Instant::now();
    let bin = env!("CARGO_BIN_EXE_pirpsi");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let lib_path = dir.path().join("lib.pirl");
    let status = Command::new(bin)
        .args(["gen-library", "--K", "4", "--L", "4", "--seed", "7", "--out"])
        .arg(&lib_path)
        .stdout(Stdio::null())
        .status()
        .map_err(|e| e.to_string())?;
    if !status.success() {
        return Err("gen-library failed".into());
    }
    let library = Arc::new(load_library(&lib_path).map_err(|e| e.to_string())?);
    let (_a, addr_a) = spawn_server(bin, &lib_path)?;
    let (_b, addr_b) = spawn_server(bin, &lib_path)?;
    let transport = TcpTransport::new(vec![addr_a.clone(), addr_b.clone()]);
    let params = Params::new(2, 4, 2, 1, 1).map_err(|e| e.to_string())?;
    let pairs = admissible_pairs(4, 2, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..10 {
        let seed: u64 = rng.random();
        let (side_set, request) = pairs.choose(&mut rng).unwrap().clone();
        let side = SideInfo::from_library(&library, side_set);
        let net = fetch(&transport, &params, &request, &side, seed).map_err(|e| e.to_string())?;
        let memory = run_exchange(&params, &library, &request, &side, seed).map_err(|e| e.to_string())?;
        if net.queries != memory.queries || net.answers != memory.answers || net.decoded != memory.decoded {
            return Err(format!("seed {seed}: transcripts differ"));
        }
        if encode_transcript(&net) != encode_transcript(&memory) || memory.verified != Some(true) {
            return Err(format!("seed {seed}: canonical bytes differ or decode failed"));
        }
    }
    // the fetch command as a separate client process
    let out = dir.path().join("transcript.bin");
    let status = Command::new(bin)
        .args(["fetch", "--servers", &format!("{addr_a},{addr_b}"), "--library"])
        .arg(&lib_path)
        .args(["--N", "2", "--K", "4", "--P", "2", "--M", "1", "--request", "0,1", "--side", "2", "--seed", "3"])
        .arg("--transcript")
        .arg(&out)
        .stdout(Stdio::null())
        .status()
        .map_err(|e| e.to_string())?;
    let memory = run_exchange(&params, &library, &RequestSet::new([0, 1]), &SideInfo::from_library(&library, [2]), 3)
        .map_err(|e| e.to_string())?;
    let bytes = std::fs::read(&out).map_err(|e| e.to_string())?;
    if !status.success() || bytes != encode_transcript(&memory) {
        return Err("fetch command transcript differs".into());
    }
    within(start.elapsed(), Duration::from_secs(30), "10 seeds identical over 2 server processes; CLI client identical".into())
}

fn main() {
    let mut results: Vec<(&str, Check, Duration)> = Vec::new();
    let mut run = |name: &'static str, f: &dyn Fn() -> Check| {
        let start = Instant::now();
        let r = f();
        results.push((name, r, start.elapsed()));
    };
    run("1 example-1 reproduction", &example_one);

    let start = Instant::now();
    let grid = exhaustive_grid(&[2, 3], 6, 20, 1, Execution::default());
    let grid_time = start.elapsed();
    let grid = grid.map_err(|e| e.to_string());
    let with_grid = |f: &dyn Fn(&[CaseOutcome]) -> Check| grid.as_ref().map_err(Clone::clone).and_then(|g| f(g));
    run("2 decodability sweep", &|| with_grid(&|g| decodability(g, grid_time)));
    run("3 load formula match", &|| with_grid(&load_formula));
    run("4 reduction identity", &reduction_identity);
    run("5 theorem equivalence", &theorem_equivalence);
    run("6 converse consistency", &|| with_grid(&converse_consistency));
    run("7 privacy, exact", &exact_privacy);
    run("8 privacy, statistical", &statistical_privacy);
    run("9 network equivalence", &network_equivalence);

    let mut failed = 0;
    for (name, result, elapsed) in &results {
        match result {
            Ok(detail) => println!("PASS  {name:<28} {elapsed:>9.2?}  {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name:<28} {elapsed:>9.2?}  {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
