use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{Profile, SolveInfo};

pub const CSV_HEADER: &str = "r,f,df,h,grad_norm";

/// Column data read back from a profile CSV.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProfileTable {
    pub r: Vec<f64>,
    pub f: Vec<f64>,
    pub df: Vec<f64>,
    pub h: Vec<f64>,
    pub grad_norm: Vec<f64>,
}

/// Scalar summary of a profile for JSON reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRecord {
    pub p: f64,
    pub f_prime_at_zero: f64,
    pub nodes: usize,
    pub radius: f64,
    pub solver: SolveInfo,
}

impl From<&Profile> for ProfileRecord {
    fn from(prof: &Profile) -> Self {
        Self {
            p: prof.p(),
            f_prime_at_zero: prof.f_prime_at_zero(),
            nodes: prof.len(),
            radius: prof.grid().radius(),
            solver: prof.info().clone(),
        }
    }
}

/// Writes one row per node. Values use the shortest representation that
/// parses back to the same `f64`.
pub fn write_profile_csv(prof: &Profile, mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for i in 0..prof.len() {
        writeln!(
            out,
            "{:e},{:e},{:e},{:e},{:e}",
            prof.r()[i],
            prof.f()[i],
            prof.df()[i],
            prof.h()[i],
            prof.gradient_norm()[i]
        )?;
    }
    Ok(())
}

pub fn read_profile_csv(input: impl BufRead) -> std::io::Result<ProfileTable> {
    let bad = |m: String| std::io::Error::new(std::io::ErrorKind::InvalidData, m);
    let mut lines = input.lines();
    match lines.next() {
        Some(Ok(h)) if h.trim() == CSV_HEADER => {}
        Some(Err(e)) => return Err(e),
        _ => return Err(bad(format!("missing header {CSV_HEADER:?}"))),
    }
    let mut t = ProfileTable::default();
    for (k, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| bad(format!("line {}: {e}", k + 2)))?;
        if vals.len() != 5 {
            return Err(bad(format!("line {}: expected 5 columns", k + 2)));
        }
        t.r.push(vals[0]);
        t.f.push(vals[1]);
        t.df.push(vals[2]);
        t.h.push(vals[3]);
        t.grad_norm.push(vals[4]);
    }
    Ok(t)
}
