//! Grid sweeps over (q, family, level). Cells run on a scoped thread pool and
//! rows come back in grid order regardless of scheduling.

use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::Result;
use psl_saxl::action::ActionError;
use psl_saxl::gf::prime_factors;
use psl_saxl::projgroup::{family_subgroups, socle_maximal, Family, Group, GroupLevel, LevelTag};
use psl_saxl::SemilinearGroup;

use crate::cache::{analyze_cached, Cache};
use crate::report::{Job, VerificationReport};

pub struct Cell {
    pub p: u32,
    pub n: u32,
    pub family: Family,
    pub level: LevelTag,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Status {
    Match,
    Mismatch,
    NotApplicable,
    Error,
}

impl Status {
    fn label(self) -> &'static str {
        match self {
            Status::Match => "match",
            Status::Mismatch => "mismatch",
            Status::NotApplicable => "n/a",
            Status::Error => "error",
        }
    }
}

pub struct Row {
    pub q: u64,
    pub family: String,
    pub level: String,
    pub class: String,
    pub socle_maximal: bool,
    pub report: Option<VerificationReport>,
    pub status: Status,
    pub note: String,
}

/// (p, n) for each prime power in [lo, hi].
pub fn prime_powers(lo: u64, hi: u64) -> Vec<(u32, u32)> {
    (lo.max(2)..=hi)
        .filter_map(|q| {
            let f = prime_factors(q);
            let p = *f.first()?;
            let mut n = 0;
            let mut r = q;
            while r % p == 0 {
                r /= p;
                n += 1;
            }
            (r == 1).then_some((p as u32, n))
        })
        .collect()
}

/// Every level named by a tag, with duplicates (same subgroup of the outer
/// automorphism group) dropped in favour of the first spelling.
pub fn default_levels(p: u32, n: u32) -> Result<Vec<LevelTag>> {
    let amb = SemilinearGroup::for_prime_power(p, n)?;
    let mut tags = vec![LevelTag::T, LevelTag::PGL, LevelTag::PSigmaL, LevelTag::PGammaL];
    tags.extend((1..n).filter(|i| n % i == 0).map(LevelTag::TF));
    tags.extend((1..n).map(LevelTag::TDeltaF));
    let mut seen = Vec::new();
    let mut out = Vec::new();
    for tag in tags {
        let sigs = GroupLevel::new(&amb, tag.clone())?.signatures();
        if !seen.contains(&sigs) {
            seen.push(sigs);
            out.push(tag);
        }
    }
    Ok(out)
}

fn run_cell(cell: &Cell, cache: Option<&Cache>) -> Vec<Row> {
    let q = (cell.p as u64).pow(cell.n);
    let maximal = socle_maximal(&cell.family, cell.p, cell.n);
    let row = |class: String, report, status, note: String| Row {
        q,
        family: cell.family.label(),
        level: cell.level.label(),
        class,
        socle_maximal: maximal,
        report,
        status,
        note,
    };
    let classes = match Group::build(cell.p, cell.n, cell.level.clone())
        .map_err(anyhow::Error::from)
        .and_then(|g| Ok(family_subgroups(&g, &cell.family)?.len()))
    {
        Ok(0) => return vec![row(String::new(), None, Status::NotApplicable, "no such subgroup".into())],
        Ok(k) => k,
        Err(e) => return vec![row(String::new(), None, Status::NotApplicable, e.to_string())],
    };
    (0..classes)
        .map(|class| {
            let job = Job { p: cell.p, n: cell.n, family: cell.family.clone(), level: cell.level.clone(), class, oracle: false };
            match analyze_cached(&job, cache, false) {
                Ok((a, _)) => {
                    let r = VerificationReport::new(&job, a, None);
                    let status = if r.is_match() { Status::Match } else { Status::Mismatch };
                    row(class.to_string(), Some(r), status, String::new())
                }
                Err(e) if matches!(e.downcast_ref(), Some(ActionError::UnfaithfulAction)) => {
                    row(class.to_string(), None, Status::NotApplicable, e.to_string())
                }
                Err(e) => row(class.to_string(), None, Status::Error, format!("{e:#}")),
            }
        })
        .collect()
}

/// Runs every cell with `jobs` worker threads and returns rows in cell order.
pub fn run(cells: &[Cell], jobs: usize, cache: Option<&Cache>) -> Vec<Row> {
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Vec<Row>>> = cells.iter().map(|_| Mutex::new(Vec::new())).collect();
    std::thread::scope(|s| {
        for _ in 0..jobs.max(1) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(cell) = cells.get(i) else { break };
                *slots[i].lock().expect("unpoisoned") = run_cell(cell, cache);
            });
        }
    });
    slots.into_iter().flat_map(|m| m.into_inner().expect("unpoisoned")).collect()
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write(rows: &[Row], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "q",
        "family",
        "level",
        "class",
        "socle_maximal",
        "degree",
        "base_size",
        "regular_suborbits",
        "gamma",
        "diameter",
        "bg",
        "predicted_base_two",
        "predicted_diameter_two",
        "checks_ok",
        "status",
        "note",
    ])?;
    for r in rows {
        let a = r.report.as_ref().map(|x| &x.analysis);
        let pred = r.report.as_ref().map(|x| &x.prediction);
        w.write_record([
            r.q.to_string(),
            r.family.clone(),
            r.level.clone(),
            r.class.clone(),
            r.socle_maximal.to_string(),
            opt(a.map(|a| a.degree)),
            opt(a.map(|a| a.base_size.clone())),
            opt(a.map(|a| a.regular_suborbits)),
            opt(a.map(|a| a.gamma_size)),
            opt(a.and_then(|a| a.diameter)),
            opt(a.and_then(|a| a.bg_verdict.clone())),
            opt(pred.and_then(|p| p.base_two)),
            opt(pred.and_then(|p| p.diameter_two)),
            opt(r.report.as_ref().map(|x| x.checks_ok)),
            r.status.label().to_string(),
            r.note.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
