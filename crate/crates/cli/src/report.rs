//! One verification run: build the action, analyze it, attach formula checks
//! and the predicted verdict.

use std::collections::BTreeMap;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use num_rational::BigRational;
use psl_saxl::action::{self, CosetAction, PermutationAction};
use psl_saxl::formulas::{self, BoundReport, Direction, NPrimeCase, QHatEstimate};
use psl_saxl::gf::{is_prime, prime_factors};
use psl_saxl::projgroup::{family_subgroups, Family, Group, LevelTag};
use psl_saxl::saxl::{self, BaseSize, BgVerdict};
use psl_saxl::{make_field, ENGINE_VERSION};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// What to verify.
#[derive(Clone, Debug)]
pub struct Job {
    pub p: u32,
    pub n: u32,
    pub family: Family,
    pub level: LevelTag,
    /// Which conjugacy class of the family, for the exceptional types.
    pub class: usize,
    pub oracle: bool,
}

impl Job {
    pub fn q(&self) -> u64 {
        (self.p as u64).pow(self.n)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FieldHeader {
    pub p: u32,
    pub n: u32,
    pub q: u64,
    pub modulus: Vec<u32>,
    pub theta: u32,
}

impl FieldHeader {
    pub fn for_job(job: &Job) -> Result<FieldHeader> {
        let f = make_field(job.p, job.n, None)?;
        Ok(FieldHeader {
            p: job.p,
            n: job.n,
            q: job.q(),
            modulus: f.modulus().to_vec(),
            theta: f.theta().index(),
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SubgroupInfo {
    pub family: String,
    pub order: u64,
    pub classes: usize,
    pub class_index: usize,
    pub normalizer_extended: bool,
    pub generators: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub maximality_warning: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CensusRow {
    pub length: u64,
    pub count: usize,
}

/// A bound check flattened to strings so it round-trips through the cache.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Check {
    pub name: String,
    pub params: String,
    pub bound: String,
    pub observed: String,
    pub direction: String,
    pub ok: bool,
}

impl From<&BoundReport> for Check {
    fn from(b: &BoundReport) -> Check {
        Check {
            name: b.name.clone(),
            params: b.params.clone(),
            bound: b.bound.to_string(),
            observed: b.observed.to_string(),
            direction: match b.direction {
                Direction::AtLeast => "at_least",
                Direction::AtMost => "at_most",
                Direction::Equal => "equal",
            }
            .into(),
            ok: b.satisfied,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Consistency {
    pub gamma_is_sum_of_regular: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub routes_agree: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub symmetric: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub vertex_regular: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub spot_checks_agree: Option<bool>,
    /// All-vertex BFS diameter, computed only with `--oracle`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub oracle_diameter: Option<u32>,
}

/// The expensive, cacheable part of a report.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Analysis {
    pub field: FieldHeader,
    pub level: String,
    pub subgroup: SubgroupInfo,
    pub degree: usize,
    pub base_size: String,
    pub census: Vec<CensusRow>,
    pub regular_suborbits: usize,
    pub gamma_size: usize,
    pub diameter: Option<u32>,
    pub frobenius: bool,
    pub bg_verdict: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bg_witness: Option<String>,
    pub checks: Vec<Check>,
    pub consistency: Consistency,
}

impl Analysis {
    pub fn base_two(&self) -> bool {
        self.base_size == BaseSize::Two.label()
    }

    fn consistent(&self) -> bool {
        let c = &self.consistency;
        c.gamma_is_sum_of_regular
            && c.routes_agree != Some(false)
            && c.symmetric != Some(false)
            && c.vertex_regular != Some(false)
            && c.spot_checks_agree != Some(false)
            && c.oracle_diameter.is_none_or(|d| Some(d) == self.diameter)
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct PredictionInfo {
    pub base_two: Option<bool>,
    pub diameter_two: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub engine_version: String,
    #[serde(flatten)]
    pub analysis: Analysis,
    pub prediction: PredictionInfo,
    pub matches_prediction: bool,
    pub checks_ok: bool,
    pub verdict: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
}

impl VerificationReport {
    pub fn new(job: &Job, analysis: Analysis, wall_time_ms: Option<u64>) -> VerificationReport {
        let pred = formulas::predict(&job.family, job.p, job.n, &job.level);
        let matches = !pred.contradicted_by(analysis.base_two(), analysis.diameter);
        let checks_ok = analysis.checks.iter().all(|c| c.ok) && analysis.consistent();
        VerificationReport {
            schema_version: SCHEMA_VERSION,
            engine_version: ENGINE_VERSION.to_string(),
            analysis,
            prediction: PredictionInfo {
                base_two: pred.base_two,
                diameter_two: pred.diameter_two,
            },
            matches_prediction: matches,
            checks_ok,
            verdict: if matches && checks_ok { "match" } else { "mismatch" },
            wall_time_ms,
        }
    }

    pub fn is_match(&self) -> bool {
        self.verdict == "match"
    }
}

fn census(lengths: &[u64]) -> Vec<CensusRow> {
    let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
    for &l in lengths {
        *counts.entry(l).or_default() += 1;
    }
    counts.into_iter().map(|(length, count)| CensusRow { length, count }).collect()
}

fn ratio(a: u64, b: u64) -> BigRational {
    BigRational::new(a.into(), b.into())
}

/// The closed-form estimates are derived for prime q only, each under its own
/// congruence.
fn q_hat_estimate(family: &Family, level: &LevelTag, p: u32, n: u32) -> Option<QHatEstimate> {
    if n != 1 {
        return None;
    }
    let q = p as u64;
    match (family, level) {
        (Family::S4, LevelTag::PGL) if q % 8 == 3 || q % 8 == 5 => Some(QHatEstimate::PglS4),
        (Family::S4, LevelTag::T) if q % 8 == 1 || q % 8 == 7 => Some(QHatEstimate::PslS4),
        (Family::A5, LevelTag::T) if q % 5 == 1 || q % 5 == 4 => Some(QHatEstimate::PslA5),
        _ => None,
    }
}

/// Cross-checks that apply to this family and level.
fn formula_checks(job: &Job, a: &CosetAction, gamma: usize) -> Result<Vec<BoundReport>> {
    let (p, n, q) = (job.p, job.n, job.q());
    let mut out = Vec::new();
    match (&job.family, &job.level) {
        (Family::DihedralPlus, _) if p == 2 => {
            let irregular = (a.degree() - gamma) as u64;
            out.push(BoundReport::new(
                "irregular points, even q",
                format!("q={q}"),
                ratio((q + 1) * (q / 2 - 1) + 1, 1),
                ratio(irregular, 1),
                Direction::Equal,
            ));
        }
        (Family::DihedralPlus, LevelTag::PSigmaL) => {
            for r in prime_factors(n as u64).into_iter().filter(|&r| r > 2) {
                let case = NPrimeCase::Conjugacy { p, n, r_prime: r as u32 };
                out.extend(formulas::n_prime_bounds(&case, job.oracle)?.0);
            }
        }
        (Family::DihedralPlus, LevelTag::T) if job.oracle && q >= 17 && q <= formulas::MAX_Y_GRAPH_Q as u64 => {
            out.extend(formulas::incidence_graph_y(p, n)?.bounds);
        }
        (Family::Subfield(m), LevelTag::T) => {
            if let Ok(formula) = formulas::gamma_size_subfield(p, *m, n) {
                out.push(BoundReport::new(
                    "gamma size, subfield",
                    format!("p={p},m={m},n={n}"),
                    BigRational::from_integer(formula),
                    ratio(gamma as u64, 1),
                    Direction::Equal,
                ));
            }
        }
        (Family::Subfield(m), LevelTag::PGammaL) => {
            let r = n / m;
            if r > 2 && is_prime(r as u64) {
                out.extend(formulas::n_prime_bounds(&NPrimeCase::SamePrime { p, m: *m, r }, job.oracle)?.0);
            }
        }
        _ => {}
    }
    if let Some(est) = q_hat_estimate(&job.family, &job.level, p, n) {
        let qh = formulas::q_hat(a);
        out.push(BoundReport::new("q-hat estimate", format!("q={q}"), est.value(q), qh.value, Direction::AtMost));
    }
    Ok(out)
}

pub fn build_action(job: &Job) -> Result<(Arc<Group>, CosetAction, usize)> {
    let g = Group::build(job.p, job.n, job.level.clone()).with_context(|| format!("building {} at q={}", job.level, job.q()))?;
    let mut subs = family_subgroups(&g, &job.family).with_context(|| format!("building {} in {}", job.family, job.level))?;
    let classes = subs.len();
    if job.class >= classes {
        bail!("class index {} out of range: {} has {classes} class(es)", job.class, job.family);
    }
    let m = subs.swap_remove(job.class);
    let a = action::coset_action(&g, &m)?;
    Ok((g, a, classes))
}

/// Runs the analysis. Returns the DOT rendering of the Saxl graph when asked
/// and the graph exists.
pub fn analyze(job: &Job, want_dot: bool) -> Result<(Analysis, Option<String>)> {
    let field = FieldHeader::for_job(job)?;
    let (_, a, classes) = build_action(job)?;
    let (rep, graph) = saxl::analyze_with_graph(&a)?;
    let m = a.stabilizer();
    let subgroup = SubgroupInfo {
        family: job.family.label(),
        order: m.order(),
        classes,
        class_index: job.class,
        normalizer_extended: m.normalizer_extended,
        generators: m.generators.iter().map(|g| g.to_string()).collect(),
        maximality_warning: m.maximality_warning.clone(),
    };
    let regular_sum: u64 = rep.census.lengths.iter().filter(|&&l| l == rep.stabilizer_order).sum();
    let checks = formula_checks(job, &a, rep.census.gamma_size)?;
    let oracle_diameter = match (&graph, job.oracle) {
        (Some(g), true) => (0..g.n_vertices as u32)
            .map(|v| g.eccentricity(v))
            .try_fold(0, |acc, e| e.map(|e| acc.max(e))),
        _ => None,
    };
    let analysis = Analysis {
        field,
        level: job.level.label(),
        subgroup,
        degree: rep.degree,
        base_size: rep.base_size.label().into(),
        census: census(&rep.census.lengths),
        regular_suborbits: rep.census.regular_count,
        gamma_size: rep.census.gamma_size,
        diameter: rep.diameter,
        frobenius: rep.is_frobenius,
        bg_verdict: rep.bg_verdict.map(|v| if v.holds() { "holds" } else { "fails" }.to_string()),
        bg_witness: match rep.bg_verdict {
            Some(BgVerdict::Fails { witness }) => Some(a.label(witness)),
            _ => None,
        },
        checks: checks.iter().map(Check::from).collect(),
        consistency: Consistency {
            gamma_is_sum_of_regular: regular_sum as usize == rep.census.gamma_size,
            routes_agree: rep.routes_agree,
            symmetric: rep.symmetric,
            vertex_regular: rep.regular,
            spot_checks_agree: rep.spot_checks_agree,
            oracle_diameter,
        },
    };
    let dot = if want_dot { graph.map(|g| g.to_dot(|x| a.label(x))) } else { None };
    Ok((analysis, dot))
}
