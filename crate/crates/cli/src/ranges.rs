//! `--sweep` arguments such as `N=2..3 K=2..8 P=1`.

use std::collections::BTreeMap;

use pirpsi::capacity::SweepRanges;

fn parse_bound(s: &str) -> Result<usize, String> {
    s.trim().parse().map_err(|_| format!("'{s}' is not a non-negative integer"))
}

/// `a..b` (inclusive) or a single value.
fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let (lo, hi) = match s.split_once("..") {
        Some((lo, hi)) => (parse_bound(lo)?, parse_bound(hi.trim_start_matches('='))?),
        None => {
            let v = parse_bound(s)?;
            (v, v)
        }
    };
    if lo > hi {
        return Err(format!("empty range '{s}'"));
    }
    Ok((lo, hi))
}

pub fn parse_sweep(items: &[String]) -> Result<SweepRanges, String> {
    let mut seen = BTreeMap::new();
    for item in items {
        let (name, range) = item.split_once('=').ok_or_else(|| format!("expected NAME=RANGE, got '{item}'"))?;
        let name = name.trim().to_ascii_uppercase();
        if !["N", "K", "P", "M"].contains(&name.as_str()) {
            return Err(format!("unknown sweep variable '{name}'"));
        }
        if seen.insert(name.clone(), parse_range(range)?).is_some() {
            return Err(format!("sweep variable '{name}' given twice"));
        }
    }
    let n = *seen.get("N").ok_or("sweep needs an N range")?;
    let k = *seen.get("K").ok_or("sweep needs a K range")?;
    if n.0 < 2 {
        return Err("N must be at least 2".into());
    }
    if seen.get("P").is_some_and(|p| p.0 == 0) {
        return Err("P must be at least 1".into());
    }
    Ok(SweepRanges { n, k, p: seen.get("P").copied(), m: seen.get("M").copied() })
}
