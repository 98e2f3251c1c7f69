//! Square/nonsquare counts against their closed form and lower bound.

use std::io::Write;

use anyhow::{bail, Result};
use num_rational::BigRational;
use psl_saxl::formulas::{feng_formula, feng_lower_bound};
use psl_saxl::gf::FieldCtx;

pub struct FengRow {
    pub t: String,
    pub count: u64,
    pub formula: BigRational,
    pub char_sum: i64,
    pub bound: u64,
}

impl FengRow {
    pub fn ok(&self) -> bool {
        self.formula == BigRational::from_integer(self.count.into()) && self.count >= self.bound
    }
}

pub fn rows(f: &FieldCtx) -> Result<Vec<FengRow>> {
    if f.p() == 2 {
        bail!("q = {} is even; the count needs odd characteristic", f.q());
    }
    let bound = feng_lower_bound(f.q() as u64);
    f.elements()
        .filter(|&t| !t.is_zero() && t != f.one())
        .map(|t| {
            Ok(FengRow {
                t: t.to_string(),
                count: f.feng_count(t)?,
                formula: feng_formula(f, t)?,
                char_sum: f.char_sum_cubic(t)?,
                bound,
            })
        })
        .collect()
}

/// Writes the CSV and a trailing `# summary` line. Returns whether every row
/// checked out.
pub fn write(rows: &[FengRow], out: impl Write) -> Result<bool> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "count", "formula", "char_sum", "bound", "ok"])?;
    for r in rows {
        w.write_record([
            r.t.clone(),
            r.count.to_string(),
            r.formula.to_string(),
            r.char_sum.to_string(),
            r.bound.to_string(),
            r.ok().to_string(),
        ])?;
    }
    let all_ok = rows.iter().all(FengRow::ok);
    let mut out = w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
    writeln!(out, "# rows={} all_ok={all_ok}", rows.len())?;
    Ok(all_ok)
}
