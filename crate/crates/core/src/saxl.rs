//! Base size, Saxl graph, diameter and the Burness–Giudici check.

use std::fmt::Write as _;

use fixedbitset::FixedBitSet;
use serde::Serialize;
use thiserror::Error;

use crate::action::{self, ActionError, CosetAction, PermutationAction, SuborbitDecomposition};
use crate::exec;
use crate::projgroup::Family;

/// Largest graph we are willing to hold as dense bitset rows.
pub const MAX_GRAPH_VERTICES: usize = 40_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SaxlError {
    #[error("base size is not 2, so the Saxl graph is undefined")]
    NotBaseTwo,
    #[error("{0} vertices exceeds the graph ceiling {MAX_GRAPH_VERTICES}")]
    TooManyVertices(usize),
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error("family mismatch: {0}")]
    FamilyMismatch(String),
}

pub type Result<T> = std::result::Result<T, SaxlError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum BaseSize {
    One,
    Two,
    Three,
    MoreThanThree,
}

impl BaseSize {
    pub fn label(self) -> &'static str {
        match self {
            BaseSize::One => "1",
            BaseSize::Two => "2",
            BaseSize::Three => "3",
            BaseSize::MoreThanThree => ">3",
        }
    }

    pub fn exceeds_two(self) -> bool {
        self > BaseSize::Two
    }
}

impl std::fmt::Display for BaseSize {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

pub fn base_size<A: PermutationAction + ?Sized>(a: &A) -> BaseSize {
    base_size_with(a, &action::suborbits(a))
}

/// Base size given a precomputed suborbit decomposition. A base of size 3
/// exists iff for some suborbit representative β the two-point stabilizer
/// M_β has a regular orbit.
pub fn base_size_with<A: PermutationAction + ?Sized>(a: &A, dec: &SuborbitDecomposition) -> BaseSize {
    if a.stabilizer_order() == 1 {
        return BaseSize::One;
    }
    if dec.regular_count() > 0 && !dec.regular_union.is_empty() {
        return BaseSize::Two;
    }
    let elems = a.stabilizer_element_perms();
    let n = a.degree();
    let reps: Vec<u32> = dec.suborbits.iter().skip(1).map(|s| s.points[0]).collect();
    let found = exec::any(&reps, |&beta| {
        let mut covered = FixedBitSet::with_capacity(n);
        for p in elems {
            let moves_something = p.iter().enumerate().any(|(i, &x)| i as u32 != x);
            if p[beta as usize] != beta || !moves_something {
                continue;
            }
            for (i, &x) in p.iter().enumerate() {
                if i as u32 == x {
                    covered.insert(i);
                }
            }
        }
        covered.count_ones(..) < n
    });
    if found {
        BaseSize::Three
    } else {
        BaseSize::MoreThanThree
    }
}

/// The Saxl graph as dense bitset rows.
#[derive(Clone, Debug)]
pub struct SaxlGraph {
    pub n_vertices: usize,
    pub base_point: u32,
    rows: Vec<FixedBitSet>,
    /// Neighbourhood of the base point, sorted.
    pub gamma: Vec<u32>,
    pub base_size: BaseSize,
    pub diameter: Option<u32>,
    pub is_frobenius: bool,
}

/// Schreier tree over generator permutations, as BFS levels of
/// (vertex, parent, generator index).
fn bfs_levels(n: usize, base: u32, perms: &[Vec<u32>]) -> Vec<Vec<(u32, u32, usize)>> {
    let mut seen = FixedBitSet::with_capacity(n);
    seen.insert(base as usize);
    let mut levels = vec![vec![(base, base, usize::MAX)]];
    loop {
        let mut next = Vec::new();
        for &(x, _, _) in levels.last().expect("nonempty") {
            for (j, p) in perms.iter().enumerate() {
                let y = p[x as usize];
                if !seen.put(y as usize) {
                    next.push((y, x, j));
                }
            }
        }
        if next.is_empty() {
            break;
        }
        levels.push(next);
    }
    levels
}

pub fn saxl_graph<A: PermutationAction + ?Sized>(a: &A) -> Result<SaxlGraph> {
    saxl_graph_with(a, &action::suborbits(a))
}

/// Rows are translates Γ^g of the base point's neighbourhood, pushed along a
/// Schreier tree so each row costs |Γ| work.
pub fn saxl_graph_with<A: PermutationAction + ?Sized>(a: &A, dec: &SuborbitDecomposition) -> Result<SaxlGraph> {
    let base_size = base_size_with(a, dec);
    if base_size != BaseSize::Two {
        return Err(SaxlError::NotBaseTwo);
    }
    let n = a.degree();
    if n > MAX_GRAPH_VERTICES {
        return Err(SaxlError::TooManyVertices(n));
    }
    let base = a.base_point();
    let perms = a.generator_perms();
    let mut rows: Vec<FixedBitSet> = vec![FixedBitSet::new(); n];
    let mut first = FixedBitSet::with_capacity(n);
    for &x in &dec.regular_union {
        first.insert(x as usize);
    }
    rows[base as usize] = first;
    for level in bfs_levels(n, base, perms).iter().skip(1) {
        let built = exec::map_slice(level, |&(_, parent, j)| {
            let p = &perms[j];
            let mut row = FixedBitSet::with_capacity(n);
            for x in rows[parent as usize].ones() {
                row.insert(p[x] as usize);
            }
            row
        });
        for (&(v, _, _), row) in level.iter().zip(built) {
            rows[v as usize] = row;
        }
    }
    let mut g = SaxlGraph {
        n_vertices: n,
        base_point: base,
        rows,
        gamma: dec.regular_union.clone(),
        base_size,
        diameter: None,
        is_frobenius: dec.regular_union.len() + 1 == n,
    };
    g.diameter = g.eccentricity(base);
    Ok(g)
}

impl SaxlGraph {
    /// Builds a graph from explicit rows; used for fixtures and oracles.
    pub fn from_rows(rows: Vec<FixedBitSet>, base_point: u32) -> SaxlGraph {
        let n = rows.len();
        let gamma: Vec<u32> = rows[base_point as usize].ones().map(|x| x as u32).collect();
        let mut g = SaxlGraph {
            n_vertices: n,
            base_point,
            is_frobenius: gamma.len() + 1 == n,
            rows,
            gamma,
            base_size: BaseSize::Two,
            diameter: None,
        };
        g.diameter = g.eccentricity(base_point);
        g
    }

    pub fn adjacent(&self, x: u32, y: u32) -> bool {
        self.rows[x as usize].contains(y as usize)
    }

    pub fn row(&self, x: u32) -> &FixedBitSet {
        &self.rows[x as usize]
    }

    pub fn neighbors(&self, x: u32) -> impl Iterator<Item = u32> + '_ {
        self.rows[x as usize].ones().map(|y| y as u32)
    }

    pub fn degree(&self, x: u32) -> usize {
        self.rows[x as usize].count_ones(..)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n_vertices).all(|x| !self.rows[x].contains(x) && self.rows[x].ones().all(|y| self.rows[y].contains(x)))
    }

    pub fn is_regular(&self) -> bool {
        let d = self.degree(self.base_point);
        (0..self.n_vertices as u32).all(|x| self.degree(x) == d)
    }

    /// Largest BFS distance from `v`; `None` when the graph is disconnected.
    pub fn eccentricity(&self, v: u32) -> Option<u32> {
        let n = self.n_vertices;
        let mut seen = FixedBitSet::with_capacity(n);
        seen.insert(v as usize);
        let mut frontier = seen.clone();
        let mut depth = 0;
        while seen.count_ones(..) < n {
            let mut next = FixedBitSet::with_capacity(n);
            for x in frontier.ones() {
                next.union_with(&self.rows[x]);
            }
            next.difference_with(&seen);
            if next.is_clear() {
                return None;
            }
            seen.union_with(&next);
            frontier = next;
            depth += 1;
        }
        Some(depth)
    }

    /// Eccentricities of a few spread-out vertices. In a vertex-transitive
    /// graph they all equal the diameter.
    pub fn spot_checks(&self) -> Vec<(u32, Option<u32>)> {
        let n = self.n_vertices as u64;
        let picks = [n / 3, (2 * n) / 3, n.saturating_sub(1)];
        picks.iter().map(|&v| (v as u32, self.eccentricity(v as u32))).collect()
    }

    pub fn spot_checks_agree(&self) -> bool {
        self.spot_checks().iter().all(|&(_, e)| e == self.diameter)
    }

    /// Graphviz rendering with the base point highlighted.
    pub fn to_dot(&self, label: impl Fn(u32) -> String) -> String {
        let mut s = String::from("graph saxl {\n  node [shape=circle];\n");
        for v in 0..self.n_vertices as u32 {
            let extra = if v == self.base_point { ", style=filled, fillcolor=gold" } else { "" };
            let _ = writeln!(s, "  {v} [label=\"{}\"{extra}];", label(v).replace('"', "\\\""));
        }
        for x in 0..self.n_vertices as u32 {
            for y in self.neighbors(x).filter(|&y| y > x) {
                let _ = writeln!(s, "  {x} -- {y};");
            }
        }
        s.push_str("}\n");
        s
    }
}

/// Diameter from the base point. Vertex-transitivity makes this the diameter.
pub fn diameter(g: &SaxlGraph) -> Option<u32> {
    g.eccentricity(g.base_point)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum BgVerdict {
    Holds,
    /// A point β = α^g with Γ ∩ Γ^g = ∅, the one of least key.
    Fails { witness: u32 },
}

impl BgVerdict {
    pub fn holds(self) -> bool {
        self == BgVerdict::Holds
    }
}

/// Γ ∩ Γ^g ≠ ∅ for every α^g outside Γ ∪ {α}, checked on the translated rows.
pub fn bg_check_graph(g: &SaxlGraph, key: impl Fn(u32) -> u64 + Sync) -> BgVerdict {
    let alpha = g.row(g.base_point);
    let candidates: Vec<u32> = (0..g.n_vertices as u32)
        .filter(|&b| b != g.base_point && !alpha.contains(b as usize))
        .collect();
    let failing = exec::filter(&candidates, |&b| g.row(b).is_disjoint(alpha));
    match failing.into_iter().min_by_key(|&b| key(b)) {
        None => BgVerdict::Holds,
        Some(witness) => BgVerdict::Fails { witness },
    }
}

pub fn bg_property_check<A: PermutationAction + ?Sized>(a: &A) -> Result<BgVerdict> {
    let g = saxl_graph(a)?;
    Ok(bg_check_graph(&g, |x| a.point_key(x)))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuborbitCensus {
    pub lengths: Vec<u64>,
    pub regular_count: usize,
    pub gamma_size: usize,
}

impl From<&SuborbitDecomposition> for SuborbitCensus {
    fn from(d: &SuborbitDecomposition) -> Self {
        SuborbitCensus {
            lengths: d.lengths(),
            regular_count: d.regular_count(),
            gamma_size: d.gamma_size(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SaxlReport {
    pub degree: usize,
    pub stabilizer_order: u64,
    pub base_size: BaseSize,
    pub census: SuborbitCensus,
    /// `None` when b ≠ 2 or the graph is disconnected.
    pub diameter: Option<u32>,
    pub connected: Option<bool>,
    pub is_frobenius: bool,
    pub bg_verdict: Option<BgVerdict>,
    /// Key of the failing point, for reproducible reporting.
    pub bg_witness_key: Option<u64>,
    /// Diameter ≤ 2 and the BG check agree.
    pub routes_agree: Option<bool>,
    pub symmetric: Option<bool>,
    pub regular: Option<bool>,
    pub spot_checks_agree: Option<bool>,
}

/// Everything the verdict layer computes for one action.
pub fn analyze<A: PermutationAction + ?Sized>(a: &A) -> Result<SaxlReport> {
    Ok(analyze_with_graph(a)?.0)
}

pub fn analyze_with_graph<A: PermutationAction + ?Sized>(a: &A) -> Result<(SaxlReport, Option<SaxlGraph>)> {
    let dec = action::suborbits(a);
    let base_size = base_size_with(a, &dec);
    let mut report = SaxlReport {
        degree: a.degree(),
        stabilizer_order: a.stabilizer_order(),
        base_size,
        census: SuborbitCensus::from(&dec),
        diameter: None,
        connected: None,
        is_frobenius: false,
        bg_verdict: None,
        bg_witness_key: None,
        routes_agree: None,
        symmetric: None,
        regular: None,
        spot_checks_agree: None,
    };
    if base_size != BaseSize::Two {
        return Ok((report, None));
    }
    let g = saxl_graph_with(a, &dec)?;
    let verdict = bg_check_graph(&g, |x| a.point_key(x));
    report.diameter = g.diameter;
    report.connected = Some(g.diameter.is_some());
    report.is_frobenius = g.is_frobenius;
    report.bg_verdict = Some(verdict);
    report.bg_witness_key = match verdict {
        BgVerdict::Fails { witness } => Some(a.point_key(witness)),
        BgVerdict::Holds => None,
    };
    report.routes_agree = Some(verdict.holds() == g.diameter.is_some_and(|d| d <= 2));
    report.symmetric = Some(g.is_symmetric());
    report.regular = Some(g.is_regular());
    report.spot_checks_agree = Some(g.spot_checks_agree());
    Ok((report, Some(g)))
}

/// Maps points of the subgroup's action into the overgroup's, checking
/// that the map is a G1-equivariant bijection fixing the base point.
pub fn align(big: &CosetAction, small: &CosetAction) -> Result<Vec<u32>> {
    let misaligned = || SaxlError::Action(ActionError::MisalignedActions);
    if big.degree() != small.degree() || big.group().ambient().q() != small.group().ambient().q() {
        return Err(misaligned());
    }
    if !small.group().generators().iter().all(|g| big.group().contains(g)) {
        return Err(misaligned());
    }
    let n = small.degree();
    let map = exec::map(n, |x| big.point_of(&small.transversal(x as u32)));
    let mut hit = FixedBitSet::with_capacity(n);
    for &y in &map {
        hit.insert(y as usize);
    }
    if hit.count_ones(..) != n || map[small.base_point() as usize] != big.base_point() {
        return Err(misaligned());
    }
    for (g, p) in small.group().generators().iter().zip(small.generator_perms()) {
        let big_p = big.perm_of(g);
        if (0..n).any(|x| big_p[map[x] as usize] != map[p[x] as usize]) {
            return Err(misaligned());
        }
    }
    Ok(map)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InheritanceReport {
    pub gamma_size: usize,
    pub sub_gamma_size: usize,
    pub gamma_contained: bool,
    pub strict: bool,
    pub diameter: Option<u32>,
    pub sub_diameter: Option<u32>,
    pub holds: bool,
}

/// For G1 ≤ G on the same points: Γ_G ⊆ Γ_G1, and diameter 2 for G
/// forces diameter at most 2 for G1.
pub fn subgroup_inheritance_check(big: &CosetAction, small: &CosetAction) -> Result<InheritanceReport> {
    let map = align(big, small)?;
    let dec = action::suborbits(big);
    let sub_dec = action::suborbits(small);
    let mut mapped: Vec<u32> = sub_dec.regular_union.iter().map(|&x| map[x as usize]).collect();
    mapped.sort_unstable();
    let gamma_contained = dec.regular_union.iter().all(|x| mapped.binary_search(x).is_ok());
    let diam = |a: &CosetAction, d: &SuborbitDecomposition| -> Result<Option<u32>> {
        match saxl_graph_with(a, d) {
            Ok(g) => Ok(g.diameter),
            Err(SaxlError::NotBaseTwo) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let diameter = diam(big, &dec)?;
    let sub_diameter = diam(small, &sub_dec)?;
    let implication = diameter != Some(2) || sub_diameter.is_some_and(|d| d <= 2);
    Ok(InheritanceReport {
        gamma_size: dec.gamma_size(),
        sub_gamma_size: sub_dec.gamma_size(),
        gamma_contained,
        strict: gamma_contained && mapped.len() > dec.regular_union.len(),
        diameter,
        sub_diameter,
        holds: gamma_contained && implication,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MergeReport {
    pub socle_regular: usize,
    pub pgl_regular: usize,
    /// Regular socle suborbits that sit in a regular PGL-suborbit made of
    /// exactly two of them.
    pub paired: usize,
    pub perfect_matching: bool,
}

/// Whether PGL fuses the regular suborbits of the socle in pairs.
pub fn merge_check(socle: &CosetAction, pgl: &CosetAction) -> Result<MergeReport> {
    let m = match (&socle.stabilizer().family, &pgl.stabilizer().family) {
        (Family::Subfield(a), Family::Subfield(b)) if a == b => *a,
        (x, y) => return Err(SaxlError::FamilyMismatch(format!("need subfield stabilizers, got {x} and {y}"))),
    };
    let n = socle.group().ambient().n();
    if n % m != 0 || n / m < 3 || !crate::gf::is_prime((n / m) as u64) {
        return Err(SaxlError::FamilyMismatch(format!("n/m = {n}/{m} is not an odd prime")));
    }
    let map = align(pgl, socle)?;
    let dec = action::suborbits(socle);
    let big = action::suborbits(pgl);
    let mut pieces = vec![Vec::new(); big.suborbits.len()];
    for (i, s) in dec.suborbits.iter().enumerate() {
        let host = big.suborbit_of[map[s.points[0] as usize] as usize] as usize;
        pieces[host].push(i);
    }
    let paired = dec
        .suborbits
        .iter()
        .filter(|s| s.regular)
        .filter(|s| {
            let host = big.suborbit_of[map[s.points[0] as usize] as usize] as usize;
            big.suborbits[host].regular
                && pieces[host].len() == 2
                && pieces[host].iter().all(|&j| dec.suborbits[j].regular)
        })
        .count();
    let socle_regular = dec.regular_count();
    Ok(MergeReport {
        socle_regular,
        pgl_regular: big.regular_count(),
        paired,
        perfect_matching: paired == socle_regular && 2 * big.regular_count() == socle_regular,
    })
}
