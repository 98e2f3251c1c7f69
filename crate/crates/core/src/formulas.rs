//! Closed-form counts, bounds and characterizations, each paired with the
//! enumeration that checks it.
//!
//! Everything here is exact: rationals are `BigRational`, square roots are
//! handled by squaring both sides, and there is no floating point anywhere.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::action::{self, ActionError, CosetAction, PermutationAction};
use crate::gf::{is_prime, FieldCtx, FieldElement, FieldError};
use crate::projgroup::{
    self, Family, Group, GroupError, LevelTag, Point, SemilinearElement, SemilinearGroup, SubgroupSpec,
};

/// Largest q for which the incidence graph Y is built.
pub const MAX_Y_GRAPH_Q: u32 = 31;

#[derive(Debug, Error)]
pub enum FormulaError {
    #[error("bad parameters: {0}")]
    BadParameters(String),
    #[error("element is not an involution of the socle")]
    NotInvolution,
    #[error("element lies inside the subgroup")]
    InsideM,
    #[error("no conjugate of K lies in H, so K has no fixed points")]
    NoConjugateInH,
    #[error("the two points coincide")]
    DegeneratePair,
    #[error("q = {q} exceeds the limit {limit}")]
    TooLarge { q: u32, limit: u32 },
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

pub type Result<T> = std::result::Result<T, FormulaError>;

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn frac(a: impl Into<BigInt>, b: impl Into<BigInt>) -> BigRational {
    BigRational::new(a.into(), b.into())
}

fn big_pow(p: u32, e: u32) -> BigInt {
    num_traits::pow(BigInt::from(p), e as usize)
}

fn ratio_str<S: Serializer>(x: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

// ---------------------------------------------------------------------------
// Bound reports

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    AtLeast,
    AtMost,
    Equal,
}

/// One checked bound. Serializes as `{name, params, bound, observed, ok}`.
#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub name: String,
    pub params: String,
    #[serde(serialize_with = "ratio_str")]
    pub bound: BigRational,
    #[serde(serialize_with = "ratio_str")]
    pub observed: BigRational,
    pub direction: Direction,
    #[serde(rename = "ok")]
    pub satisfied: bool,
}

impl BoundReport {
    pub fn new(
        name: impl Into<String>,
        params: impl Into<String>,
        bound: BigRational,
        observed: BigRational,
        direction: Direction,
    ) -> BoundReport {
        let satisfied = match direction {
            Direction::AtLeast => observed >= bound,
            Direction::AtMost => observed <= bound,
            Direction::Equal => observed == bound,
        };
        BoundReport {
            name: name.into(),
            params: params.into(),
            bound,
            observed,
            direction,
            satisfied,
        }
    }
}

impl fmt::Display for BoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.direction {
            Direction::AtLeast => ">=",
            Direction::AtMost => "<=",
            Direction::Equal => "==",
        };
        write!(
            f,
            "{} [{}]: observed {} {op} {} ... {}",
            self.name,
            self.params,
            self.observed,
            self.bound,
            if self.satisfied { "ok" } else { "VIOLATED" }
        )
    }
}

// ---------------------------------------------------------------------------
// Character sums

/// ⌈(q − 2√q − 7)/8⌉ clamped at 0: the least k ≥ 0 with q − 7 − 8k ≤ 2√q.
pub fn feng_lower_bound(q: u64) -> u64 {
    let q = q as i128;
    let mut k = 0i128;
    loop {
        let a = q - 7 - 8 * k;
        if a <= 0 || a * a <= 4 * q {
            return k as u64;
        }
        k += 1;
    }
}

/// w(q) = 2⌈(q − 2√q − 7)/8⌉.
pub fn w_bound(q: u64) -> u64 {
    2 * feng_lower_bound(q)
}

/// The closed form (q − 3 + m + l)/8 for the number of squares x with x − 1
/// and x − t nonsquares, where m is the cubic character sum.
pub fn feng_formula(f: &FieldCtx, t: FieldElement) -> Result<BigRational> {
    if t.is_zero() || t == f.one() {
        return Err(FieldError::BadT.into());
    }
    let eta = |x: FieldElement| f.eta(x).map(|v| v as i64);
    let m = f.char_sum_cubic(t)?;
    let one = f.one();
    let t2_t = f.sub(f.mul(t, t), t);
    let l = if eta(f.neg(one))? == 1 {
        3 * eta(f.sub(t, one))? + eta(t2_t)? + 1 - eta(t)?
    } else {
        eta(f.sub(one, t))? + eta(t2_t)? - 3 * eta(t)? - 1
    };
    Ok(frac(f.q() as i64 - 3 + m + l, 8))
}

// ---------------------------------------------------------------------------
// Involutions and the incidence graph Y

fn is_involution(amb: &SemilinearGroup, x: &SemilinearElement) -> bool {
    !amb.is_identity(x) && amb.is_identity(&amb.compose(x, x))
}

fn central_in(amb: &SemilinearGroup, m: &SubgroupSpec, x: &SemilinearElement) -> bool {
    m.generators.iter().all(|g| amb.compose(x, g) == amb.compose(g, x))
}

/// Noncentral involutions x of M whose product with g has order dividing
/// (q+1)/2 and larger than 2.
pub fn involution_partner_count(socle: &Group, m: &SubgroupSpec, g: &SemilinearElement) -> Result<u64> {
    let amb = &**socle.ambient();
    if !socle.in_socle(g) || !is_involution(amb, g) {
        return Err(FormulaError::NotInvolution);
    }
    if m.contains(g) {
        return Err(FormulaError::InsideM);
    }
    let half = (amb.q() as u64).div_ceil(2);
    let count = m
        .elements()
        .iter()
        .filter(|x| is_involution(amb, x) && !central_in(amb, m, x))
        .filter(|x| {
            let o = amb.order(&amb.compose(x, g));
            o > 2 && half % o == 0
        })
        .count();
    Ok(count as u64)
}

/// How a dihedral-plus vertex meets the base vertex, by shared involutions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Meet {
    Trivial,
    Z2,
    D4,
    Other(usize),
}

impl Meet {
    fn from_shared(k: usize) -> Meet {
        match k {
            0 => Meet::Trivial,
            1 => Meet::Z2,
            3 => Meet::D4,
            k => Meet::Other(k),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NBetaRow {
    pub vertex: u32,
    pub distance: u32,
    pub meet: Meet,
    pub n: u64,
}

/// The bipartite graph between the involutions of T and the conjugates of
/// D_{q+1}, with distance layers and common-neighbourhood sizes measured from
/// the base vertex.
#[derive(Clone, Debug, Serialize)]
pub struct IncidenceGraphY {
    pub q: u32,
    pub involutions: usize,
    pub subgroups: usize,
    /// Involution count of each subgroup vertex (all equal).
    pub left_degree: usize,
    pub left_degree_uniform: bool,
    pub has_central_involution: bool,
    /// |Y_i(α)| for i = 0, 1, 2, ...
    pub layers: Vec<usize>,
    pub diameter: Option<u32>,
    pub n_beta: Vec<NBetaRow>,
    pub bounds: Vec<BoundReport>,
}

fn bfs(adj: &[Vec<u32>], start: u32) -> Vec<u32> {
    let mut dist = vec![u32::MAX; adj.len()];
    dist[start as usize] = 0;
    let mut queue = VecDeque::from([start]);
    while let Some(x) = queue.pop_front() {
        for &y in &adj[x as usize] {
            if dist[y as usize] == u32::MAX {
                dist[y as usize] = dist[x as usize] + 1;
                queue.push_back(y);
            }
        }
    }
    dist
}

pub fn incidence_graph_y(p: u32, n: u32) -> Result<IncidenceGraphY> {
    let q = p.checked_pow(n).ok_or_else(|| FormulaError::BadParameters(format!("{p}^{n}")))?;
    if p == 2 {
        return Err(FormulaError::BadParameters("Y is built for odd q".into()));
    }
    if q > MAX_Y_GRAPH_Q {
        return Err(FormulaError::TooLarge { q, limit: MAX_Y_GRAPH_Q });
    }
    let socle = Group::build(p, n, LevelTag::T)?;
    let amb = &**socle.ambient();
    let m = projgroup::dihedral_plus(&socle)?;
    let a = action::coset_action(&socle, &m)?;
    let n_sub = a.degree();

    let invs: Vec<SemilinearElement> =
        crate::exec::filter(socle.elements()?, |x| is_involution(amb, x));
    let inv_index: HashMap<SemilinearElement, u32> = invs.iter().enumerate().map(|(i, x)| (*x, i as u32)).collect();
    let m_invs: Vec<SemilinearElement> = m.elements().iter().copied().filter(|x| is_involution(amb, x)).collect();
    let has_central = m_invs.iter().any(|x| central_in(amb, &m, x));

    // Involutions of the point stabilizer of β are those of M conjugated by a
    // coset representative.
    let members: Vec<Vec<u32>> = crate::exec::map(n_sub, |b| {
        let t = a.transversal(b as u32);
        let mut v: Vec<u32> = m_invs.iter().map(|x| inv_index[&amb.conjugate(x, &t)]).collect();
        v.sort_unstable();
        v
    });
    let left_degree = members[0].len();
    let left_degree_uniform = members.iter().all(|v| v.len() == left_degree);

    let mut containing: Vec<Vec<u32>> = vec![Vec::new(); invs.len()];
    for (b, v) in members.iter().enumerate() {
        for &i in v {
            containing[i as usize].push(b as u32);
        }
    }
    // Vertices: subgroups 0..n_sub, involutions after.
    let mut adj: Vec<Vec<u32>> = members.clone();
    adj.extend(containing.iter().map(|v| v.to_vec()));
    for row in adj.iter_mut().take(n_sub) {
        for x in row.iter_mut() {
            *x += n_sub as u32;
        }
    }

    let base = a.base_point();
    let from_base = bfs(&adj, base);
    let from_inv = bfs(&adj, n_sub as u32);
    let ecc = |d: &[u32]| {
        if d.contains(&u32::MAX) {
            None
        } else {
            d.iter().copied().max()
        }
    };
    // T is transitive on both sides, so two eccentricities give the diameter.
    let diameter = match (ecc(&from_base), ecc(&from_inv)) {
        (Some(x), Some(y)) => Some(x.max(y)),
        _ => None,
    };
    let mut layers = Vec::new();
    for &d in from_base.iter().filter(|&&d| d != u32::MAX) {
        if layers.len() <= d as usize {
            layers.resize(d as usize + 1, 0);
        }
        layers[d as usize] += 1;
    }

    let second: Vec<FixedBitSet> = crate::exec::map(n_sub, |b| {
        let mut s = FixedBitSet::with_capacity(n_sub);
        for &i in &members[b] {
            for &c in &containing[i as usize] {
                s.insert(c as usize);
            }
        }
        s.set(b, false);
        s
    });
    let base_members: HashSet<u32> = members[base as usize].iter().copied().collect();
    let n_beta: Vec<NBetaRow> = (0..n_sub as u32)
        .filter(|&b| b != base)
        .map(|b| NBetaRow {
            vertex: b,
            distance: from_base[b as usize],
            meet: Meet::from_shared(members[b as usize].iter().filter(|i| base_members.contains(i)).count()),
            n: second[b as usize].intersection(&second[base as usize]).count() as u64,
        })
        .collect();

    let qi = q as i64;
    let w = w_bound(q as u64) as i64;
    let params = format!("q={q}");
    let layer = |i: usize| layers.get(i).copied().unwrap_or(0) as i64;
    let min_n = |pred: &dyn Fn(&NBetaRow) -> bool| {
        n_beta.iter().filter(|r| pred(r)).map(|r| r.n).min().map(|x| rat(x as i64))
    };
    let mut bounds = vec![BoundReport::new(
        "incidence graph diameter",
        &params,
        rat(4),
        rat(diameter.map_or(-1, |d| d as i64)),
        Direction::Equal,
    )];
    let (y2, y4, left) = if qi % 4 == 1 {
        ((qi + 1) * (qi - 3) / 4, (qi * qi - 1) / 4, (qi + 1) / 2)
    } else {
        ((qi * qi - 1) / 4, (qi * qi - 2 * qi - 3) / 4, (qi + 3) / 2)
    };
    bounds.push(BoundReport::new("|Y2(alpha)|", &params, rat(y2), rat(layer(2)), Direction::Equal));
    bounds.push(BoundReport::new("|Y4(alpha)|", &params, rat(y4), rat(layer(4)), Direction::Equal));
    bounds.push(BoundReport::new(
        "involutions per subgroup",
        &params,
        rat(left),
        rat(if left_degree_uniform { left_degree as i64 } else { -1 }),
        Direction::Equal,
    ));
    let mut push_min = |name: &str, bound: BigRational, pred: &dyn Fn(&NBetaRow) -> bool| {
        if let Some(obs) = min_n(pred) {
            bounds.push(BoundReport::new(name, &params, bound, obs, Direction::AtLeast));
        }
    };
    if qi % 4 == 1 {
        push_min("n(beta) on Y2", rat((qi - 1) / 2 * w - 2), &|r| r.distance == 2);
        push_min("n(beta) on Y4", rat((qi + 1) / 2 * w), &|r| r.distance == 4);
    } else {
        push_min("n(beta), trivial meet", frac((qi + 1) * w, 4), &|r| r.meet == Meet::Trivial);
        let mixed = frac((qi - 3) * w + qi + 1, 4);
        push_min("n(beta), meet Z2", mixed.clone(), &|r| r.meet == Meet::Z2);
        push_min("n(beta), meet D4", mixed, &|r| r.meet == Meet::D4);
    }
    push_min("n(beta) overall", frac((qi - 3) * w, 4), &|_| true);

    Ok(IncidenceGraphY {
        q,
        involutions: invs.len(),
        subgroups: n_sub,
        left_degree,
        left_degree_uniform,
        has_central_involution: has_central,
        layers,
        diameter,
        n_beta,
        bounds,
    })
}

// ---------------------------------------------------------------------------
// Fixed points

/// |Fix(K)| on the cosets of H, as Σ |N_G(K_i)| / |N_H(K_i)| over the
/// H-classes of G-conjugates K_i of K inside H.
pub fn manning_fixed_points(g: &Group, h: &SubgroupSpec, k: &SubgroupSpec) -> Result<u64> {
    let classes = g.conjugates_in(k, h)?;
    if classes.is_empty() {
        return Err(FormulaError::NoConjugateInH);
    }
    let mut total = 0;
    for class in &classes {
        let ki = &class[0];
        let ng = g.normalizer(ki)?;
        let nh = ng.elements().iter().filter(|x| h.contains(x)).count() as u64;
        debug_assert_eq!(ng.order() % nh, 0);
        total += ng.order() / nh;
    }
    Ok(total)
}

/// |Γ| for PSL(2,p^m) in PSL(2,p^n), as an exact integer.
pub fn gamma_size_subfield(p: u32, m: u32, n: u32) -> Result<BigInt> {
    let bad = || FormulaError::BadParameters(format!("(p, m, n) = ({p}, {m}, {n})"));
    if !is_prime(p as u64) || m == 0 || n % m != 0 || (p as u64).pow(m) <= 2 {
        return Err(bad());
    }
    let r = n / m;
    if !((r > 2 && is_prime(r as u64)) || (p == 2 && r == 2)) {
        return Err(bad());
    }
    let pm = big_pow(p, m);
    let pn = big_pow(p, n);
    let one = BigInt::one();
    let sign = if (r - 1) % 2 == 0 { one.clone() } else { -one.clone() };
    let t1 = frac(big_pow(p, n - m) * (&pn * &pn - &one), &pm * &pm - &one);
    let t3 = rat(1) * BigRational::from_integer((big_pow(p, n - m) - &one) * (&pm + &one));
    let t4 = (frac(&pn - &one, &pm - &one) - rat(1)) * BigRational::from_integer(&pm * (&pm + &one)) / rat(2);
    let t5 = (frac(&pn + sign, &pm + &one) - rat(1)) * BigRational::from_integer(&pm * (&pm - &one)) / rat(2);
    let total = t1 - rat(1) - t3 - t4 - t5;
    if !total.is_integer() {
        return Err(bad());
    }
    Ok(total.to_integer())
}

// ---------------------------------------------------------------------------
// Q̂

#[derive(Clone, Debug, Serialize)]
pub struct QHatTerm {
    pub order: u64,
    /// Number of M-conjugates of ⟨x⟩, i.e. |M : N_M(⟨x⟩)|.
    pub class_size: u64,
    pub fixed_points: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct QHat {
    pub terms: Vec<QHatTerm>,
    #[serde(serialize_with = "ratio_str")]
    pub value: BigRational,
}

impl QHat {
    /// Below 1/2 the Saxl graph has diameter at most 2.
    pub fn forces_diameter_two(&self) -> bool {
        self.value < frac(1, 2)
    }
}

fn cyclic_key(amb: &SemilinearGroup, x: &SemilinearElement) -> Vec<SemilinearElement> {
    let mut v = vec![amb.identity()];
    let mut y = *x;
    while !amb.is_identity(&y) {
        v.push(y);
        y = amb.compose(&y, x);
    }
    v.sort_unstable();
    v
}

/// Σ over M-classes of prime-order cyclic subgroups ⟨x⟩ of
/// |M : N_M(⟨x⟩)| · |Fix(x)| / |Ω|, with exact fixed-point counts.
pub fn q_hat(a: &CosetAction) -> QHat {
    let amb = &**a.group().ambient();
    let m = a.stabilizer();
    let elems = m.elements();
    let perms = a.stabilizer_element_perms();
    let mut subgroups: Vec<Vec<SemilinearElement>> = elems
        .iter()
        .filter(|x| {
            let o = amb.order(x);
            o > 1 && is_prime(o)
        })
        .map(|x| cyclic_key(amb, x))
        .collect();
    subgroups.sort();
    subgroups.dedup();

    let mut seen: HashSet<Vec<SemilinearElement>> = HashSet::new();
    let mut terms = Vec::new();
    for s in &subgroups {
        if seen.contains(s) {
            continue;
        }
        let mut class = vec![s.clone()];
        seen.insert(s.clone());
        let mut i = 0;
        while i < class.len() {
            for g in &m.generators {
                let mut c: Vec<_> = class[i].iter().map(|x| amb.conjugate(x, g)).collect();
                c.sort_unstable();
                if seen.insert(c.clone()) {
                    class.push(c);
                }
            }
            i += 1;
        }
        let x = s.iter().find(|x| !amb.is_identity(x)).expect("nontrivial");
        let perm = &perms[elems.binary_search(x).expect("element of M")];
        let fixed = perm.iter().enumerate().filter(|(i, &y)| *i as u32 == y).count() as u64;
        terms.push(QHatTerm {
            order: amb.order(x),
            class_size: class.len() as u64,
            fixed_points: fixed,
        });
    }
    let degree = a.degree() as i64;
    let value = terms
        .iter()
        .map(|t| frac((t.class_size * t.fixed_points) as i64, degree))
        .fold(BigRational::zero(), |acc, x| acc + x);
    QHat { terms, value }
}

/// The closed-form upper estimates for Q̂ in the exceptional cases.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum QHatEstimate {
    /// PGL(2,q) on the cosets of S4.
    PglS4,
    /// PSL(2,q) on the cosets of S4.
    PslS4,
    /// PSL(2,q) on the cosets of A5.
    PslA5,
}

impl QHatEstimate {
    pub fn value(self, q: u64) -> BigRational {
        let num = match self {
            QHatEstimate::PglS4 => 122,
            QHatEstimate::PslS4 => 194,
            QHatEstimate::PslA5 => 722,
        };
        frac(num, (q * (q - 1)) as i64)
    }
}

// ---------------------------------------------------------------------------
// Pairs of projective points

fn check_pair(f: &FieldCtx, u: Point, w: Point) -> Result<()> {
    if !f.is_odd() {
        return Err(FieldError::EvenCharacteristic.into());
    }
    if u == w {
        return Err(FormulaError::DegeneratePair);
    }
    if u > f.q() || w > f.q() {
        return Err(FormulaError::BadParameters(format!("point out of range: {u}, {w}")));
    }
    Ok(())
}

/// Whether {u, w} lies in an irregular suborbit of T on 2-subsets, relative
/// to the base pair {0, ∞}: the base pair itself, or −w/u a nonzero square.
pub fn fixed_pair_in_x(f: &FieldCtx, u: Point, w: Point) -> Result<bool> {
    check_pair(f, u, w)?;
    let inf = f.q();
    let (lo, hi) = (u.min(w), u.max(w));
    if (lo, hi) == (0, inf) {
        return Ok(true);
    }
    if lo == 0 || hi == inf {
        return Ok(false);
    }
    let ratio = f.div(f.element(w), f.element(u))?;
    Ok(f.is_square(f.neg(ratio)))
}

/// Whether {u, w} is in a regular suborbit of T but in no regular suborbit
/// of PΣL(2,q): outside the irregular part, and either a pair through 0 or
/// ∞, or w/u lies in a proper subfield. For prime q the groups coincide.
pub fn fixed_pair_t_not_g(f: &FieldCtx, u: Point, w: Point) -> Result<bool> {
    if fixed_pair_in_x(f, u, w)? || f.n() == 1 {
        return Ok(false);
    }
    let inf = f.q();
    if u == 0 || w == 0 || u == inf || w == inf {
        return Ok(true);
    }
    let ratio = f.div(f.element(w), f.element(u))?;
    let n = f.n();
    Ok((1..n).filter(|r| n % r == 0).any(|r| f.in_subfield(ratio, r)))
}

// ---------------------------------------------------------------------------
// Regular suborbits fixed by an outer subgroup of prime order

#[derive(Clone, Debug, Serialize)]
pub enum NPrimeCase {
    /// Dihedral-plus in PΣL(2,p^n), K of order r' outside T.
    Conjugacy { p: u32, n: u32, r_prime: u32 },
    /// PΓL(2,p^{mr}) on the normalizer of PSL(2,p^m), r' = r.
    SamePrime { p: u32, m: u32, r: u32 },
    /// PΓL(2,p^{mr}) on the normalizer of PSL(2,p^m), m = m1·r', r' ≠ r.
    CrossPrime { p: u32, m1: u32, r: u32, r_prime: u32 },
}

impl NPrimeCase {
    pub fn params(&self) -> String {
        match self {
            NPrimeCase::Conjugacy { p, n, r_prime } => format!("p={p},n={n},r'={r_prime}"),
            NPrimeCase::SamePrime { p, m, r } => format!("p={p},m={m},r=r'={r}"),
            NPrimeCase::CrossPrime { p, m1, r, r_prime } => format!("p={p},m1={m1},r={r},r'={r_prime}"),
        }
    }
}

/// ⌊½ s(s − 1)/(s + 1)⌋ with s = p^{n/r'}.
pub fn conjugacy_bound(p: u32, n: u32, r_prime: u32) -> BigRational {
    let s = big_pow(p, n / r_prime);
    let x = frac(&s * (&s - BigInt::one()), BigInt::from(2) * (&s + BigInt::one()));
    BigRational::from_integer(x.floor().to_integer())
}

/// ¼(r − 1)² p^m (p^m + 1)/(p^m − 1).
pub fn same_prime_bound(p: u32, m: u32, r: u32) -> BigRational {
    let pm = big_pow(p, m);
    let r1 = BigInt::from(r - 1);
    frac(&r1 * &r1 * &pm * (&pm + BigInt::one()), BigInt::from(4) * (&pm - BigInt::one()))
}

/// The sharper bound of the case analysis on how r divides |PGL(2,p^m)|.
pub fn same_prime_case_bound(p: u32, m: u32, r: u32) -> BigRational {
    let pm = big_pow(p, m);
    let one = BigInt::one();
    let r_big = BigInt::from(r);
    let r1 = BigInt::from(r - 1);
    if r == p {
        frac(&pm * &pm - &one, pm)
    } else if ((&pm - &one) % &r_big).is_zero() {
        same_prime_bound(p, m, r)
    } else if ((&pm + &one) % &r_big).is_zero() {
        frac(&r1 * &r1 * &pm * (&pm - &one), BigInt::from(4) * (&pm + &one))
    } else {
        BigRational::zero()
    }
}

/// p^{m1 r}(p^{2 m1 r} − 1) / [p^{m1}(p^{2 m1} − 1)]².
pub fn cross_prime_bound(p: u32, m1: u32, r: u32) -> BigRational {
    let big = big_pow(p, m1 * r);
    let small = big_pow(p, m1);
    let one = BigInt::one();
    let den = &small * (&small * &small - &one);
    frac(&big * (&big * &big - &one), &den * &den)
}

#[derive(Clone, Debug, Serialize)]
pub struct NPrimeObservation {
    pub inner_order: u64,
    pub regular_inner_orbits: usize,
    /// (class size, fixed regular orbits) per M-class of order-r' subgroups
    /// outside the inner level.
    pub classes: Vec<(usize, u64)>,
    /// Value at the representative ⟨f^{n/r'}⟩ when it lies in M.
    pub representative: Option<u64>,
    pub max: u64,
    /// Set on the slow path: every subgroup in a class gave the same count.
    pub classes_uniform: Option<bool>,
}

/// Counts regular orbits of M ∩ `inner` on Ω that a subgroup of order r'
/// of M outside `inner` fixes setwise. The fast path evaluates one subgroup
/// per M-class; `oracle` evaluates every subgroup.
pub fn observe_n_prime(
    a: &CosetAction,
    inner: &Group,
    r_prime: u64,
    representative: Option<SemilinearElement>,
    oracle: bool,
) -> NPrimeObservation {
    let amb = &**a.group().ambient();
    let m = a.stabilizer();
    let elems = m.elements();
    let perms = a.stabilizer_element_perms();
    let inner_idx: Vec<usize> = (0..elems.len()).filter(|&i| inner.contains(&elems[i])).collect();
    let inner_order = inner_idx.len() as u64;

    let mut orbit_of = vec![u32::MAX; a.degree()];
    let mut regular_reps = Vec::new();
    let mut next = 0u32;
    for x in 0..a.degree() {
        if orbit_of[x] != u32::MAX {
            continue;
        }
        let mut pts: Vec<u32> = inner_idx.iter().map(|&k| perms[k][x]).collect();
        pts.sort_unstable();
        pts.dedup();
        for &y in &pts {
            orbit_of[y as usize] = next;
        }
        if pts.len() as u64 == inner_order {
            regular_reps.push((x as u32, next));
        }
        next += 1;
    }
    let fixed_by = |k: &SemilinearElement| -> u64 {
        let perm = &perms[elems.binary_search(k).expect("element of M")];
        regular_reps
            .iter()
            .filter(|&&(x, id)| orbit_of[perm[x as usize] as usize] == id)
            .count() as u64
    };

    let mut subgroups: Vec<Vec<SemilinearElement>> = elems
        .iter()
        .filter(|x| !inner.contains(x) && amb.order(x) == r_prime)
        .map(|x| cyclic_key(amb, x))
        .collect();
    subgroups.sort();
    subgroups.dedup();
    let generator = |s: &[SemilinearElement]| *s.iter().find(|x| !inner.contains(x)).expect("outer element");

    let mut seen: HashSet<Vec<SemilinearElement>> = HashSet::new();
    let mut classes = Vec::new();
    let mut uniform = true;
    for s in &subgroups {
        if seen.contains(s) {
            continue;
        }
        let mut class = vec![s.clone()];
        seen.insert(s.clone());
        let mut i = 0;
        while i < class.len() {
            for g in &m.generators {
                let mut c: Vec<_> = class[i].iter().map(|x| amb.conjugate(x, g)).collect();
                c.sort_unstable();
                if seen.insert(c.clone()) {
                    class.push(c);
                }
            }
            i += 1;
        }
        let value = fixed_by(&generator(s));
        if oracle {
            uniform &= class.iter().all(|c| fixed_by(&generator(c)) == value);
        }
        classes.push((class.len(), value));
    }
    let representative = representative.filter(|k| m.contains(k)).map(|k| fixed_by(&k));
    NPrimeObservation {
        inner_order,
        regular_inner_orbits: regular_reps.len(),
        max: classes.iter().map(|c| c.1).max().unwrap_or(0),
        classes,
        representative,
        classes_uniform: oracle.then_some(uniform),
    }
}

/// Builds the action for the case, observes n'(r') and compares it with the
/// bound(s).
pub fn n_prime_bounds(case: &NPrimeCase, oracle: bool) -> Result<(Vec<BoundReport>, NPrimeObservation)> {
    let bad = |why: &str| FormulaError::BadParameters(format!("{}: {why}", case.params()));
    let (p, n, r_prime) = match *case {
        NPrimeCase::Conjugacy { p, n, r_prime } => {
            if p == 2 || r_prime == 2 || !is_prime(r_prime as u64) || n % r_prime != 0 {
                return Err(bad("need odd p and an odd prime r' dividing n"));
            }
            (p, n, r_prime)
        }
        NPrimeCase::SamePrime { p, m, r } => {
            if r == 2 || !is_prime(r as u64) || (p as u64).pow(m) <= 2 {
                return Err(bad("need an odd prime r and p^m > 2"));
            }
            (p, m * r, r)
        }
        NPrimeCase::CrossPrime { p, m1, r, r_prime } => {
            if r == 2 || !is_prime(r as u64) || !is_prime(r_prime as u64) || r == r_prime {
                return Err(bad("need an odd prime r and a different prime r'"));
            }
            (p, m1 * r_prime * r, r_prime)
        }
    };
    if !is_prime(p as u64) {
        return Err(bad("p is not prime"));
    }
    let (group, m, inner) = match *case {
        NPrimeCase::Conjugacy { .. } => {
            let g = Group::build(p, n, LevelTag::PSigmaL)?;
            let m = projgroup::dihedral_plus(&g)?;
            let inner = g.sibling(LevelTag::T)?;
            (g, m, inner)
        }
        NPrimeCase::SamePrime { m, .. } | NPrimeCase::CrossPrime { m1: m, .. } => {
            let sub_degree = match *case {
                NPrimeCase::CrossPrime { m1, r_prime, .. } => m1 * r_prime,
                _ => m,
            };
            let g = Group::build(p, n, LevelTag::PGammaL)?;
            let spec = projgroup::subfield(&g, sub_degree)?;
            let inner = g.sibling(LevelTag::PGL)?;
            (g, spec, inner)
        }
    };
    let a = action::coset_action(&group, &m)?;
    let rep = group.ambient().frobenius_element(n / r_prime);
    let obs = observe_n_prime(&a, &inner, r_prime as u64, Some(rep), oracle);
    let observed = rat(obs.max as i64);
    let params = case.params();
    let reports = match *case {
        NPrimeCase::Conjugacy { .. } => vec![BoundReport::new(
            "n'(r') dihedral-plus",
            params,
            conjugacy_bound(p, n, r_prime),
            observed,
            Direction::AtMost,
        )],
        NPrimeCase::SamePrime { m, r, .. } => vec![
            BoundReport::new("n'(r') same prime", &params, same_prime_bound(p, m, r), observed.clone(), Direction::AtMost),
            BoundReport::new(
                "n'(r') same prime, by case",
                &params,
                same_prime_case_bound(p, m, r),
                observed,
                Direction::AtMost,
            ),
        ],
        NPrimeCase::CrossPrime { m1, r, .. } => vec![BoundReport::new(
            "n'(r') cross prime",
            params,
            cross_prime_bound(p, m1, r),
            observed,
            Direction::AtMost,
        )],
    };
    Ok((reports, obs))
}

// ---------------------------------------------------------------------------
// Predicted verdicts

/// How to read the evenness condition attached to T.⟨δ f^i⟩.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Reading {
    /// n/(n,i) even, i.e. the group does not contain δ.
    Gcd,
    /// n/i an even integer.
    Literal,
}

fn gcd(a: u32, b: u32) -> u32 {
    num_integer::gcd(a, b)
}

fn delta_f_condition(n: u32, i: u32, reading: Reading) -> bool {
    let i = i % n;
    match reading {
        Reading::Gcd => (n / gcd(n, i)) % 2 == 0,
        Reading::Literal => i != 0 && n % i == 0 && (n / i) % 2 == 0,
    }
}

fn contains_delta(n: u32, tag: &LevelTag) -> Option<bool> {
    Some(match tag {
        LevelTag::T | LevelTag::TF(_) | LevelTag::PSigmaL => false,
        LevelTag::PGL | LevelTag::PGammaL => true,
        LevelTag::TDeltaF(i) => (n / gcd(n, *i % n)) % 2 == 1,
        LevelTag::Custom(_) => return None,
    })
}

/// b(G) = 2 for G on the cosets of the dihedral-plus subgroup.
pub fn dihedral_plus_base_two(p: u32, n: u32, tag: &LevelTag, reading: Reading) -> bool {
    let q = (p as u64).pow(n);
    if p == 2 {
        return false;
    }
    if q == 9 && (*tag == LevelTag::PSigmaL || *tag == LevelTag::TF(1)) {
        return true;
    }
    if q == 7 || q == 9 {
        return false;
    }
    match tag {
        LevelTag::T | LevelTag::TF(_) | LevelTag::PSigmaL => true,
        LevelTag::TDeltaF(i) => delta_f_condition(n, *i, reading),
        LevelTag::PGL | LevelTag::PGammaL | LevelTag::Custom(_) => false,
    }
}

/// d(Σ) = 2 for G on the cosets of the dihedral-minus subgroup; `None`
/// outside odd q ∉ {7, 9}.
pub fn dihedral_minus_diameter_two(p: u32, n: u32, tag: &LevelTag, reading: Reading) -> Option<bool> {
    let q = (p as u64).pow(n);
    if p == 2 || q == 7 || q == 9 {
        return None;
    }
    let is_pgl = match tag {
        LevelTag::PGL => true,
        LevelTag::PGammaL => n == 1,
        LevelTag::TDeltaF(i) => *i % n == 0,
        _ => false,
    };
    if is_pgl {
        return Some(true);
    }
    Some(match (tag, reading) {
        (LevelTag::TDeltaF(i), Reading::Literal) => delta_f_condition(n, *i, reading),
        _ => !contains_delta(n, tag)?,
    })
}

/// What the classification predicts for (family, level). `None` means no
/// claim, typically because the subgroup is not maximal there.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Prediction {
    pub base_two: Option<bool>,
    pub diameter_two: Option<bool>,
}

impl Prediction {
    const NONE: Prediction = Prediction {
        base_two: None,
        diameter_two: None,
    };

    fn base(b: bool) -> Prediction {
        Prediction {
            base_two: Some(b),
            diameter_two: b.then_some(true),
        }
    }

    /// Whether observed values contradict the prediction.
    pub fn contradicted_by(&self, base_two: bool, diameter: Option<u32>) -> bool {
        self.base_two.is_some_and(|b| b != base_two)
            || self.diameter_two.is_some_and(|d| d != (diameter == Some(2)))
    }
}

fn exceptional_threshold(family: &Family, p: u32, n: u32, tag: &LevelTag) -> Option<u64> {
    let q = (p as u64).pow(n);
    let small_pgl = *tag == LevelTag::PGL && n == 1 && p > 3 && (q % 8 == 3 || q % 8 == 5);
    match family {
        Family::A4 if small_pgl || (*tag == LevelTag::T && projgroup::socle_maximal(family, p, n)) => Some(11),
        Family::S4 if small_pgl => Some(11),
        Family::S4 if *tag == LevelTag::T && projgroup::socle_maximal(family, p, n) => Some(17),
        Family::A5 if projgroup::socle_maximal(family, p, n)
            && (*tag == LevelTag::T || (n == 2 && *tag == LevelTag::PSigmaL)) =>
        {
            Some(29)
        }
        _ => None,
    }
}

pub fn predict(family: &Family, p: u32, n: u32, tag: &LevelTag) -> Prediction {
    let q = (p as u64).pow(n);
    match family {
        Family::DihedralPlus => {
            if p != 2 && (q == 7 || (q == 9 && !dihedral_plus_base_two(p, n, tag, Reading::Gcd))) {
                return Prediction::NONE;
            }
            Prediction::base(dihedral_plus_base_two(p, n, tag, Reading::Gcd))
        }
        Family::DihedralMinus => match dihedral_minus_diameter_two(p, n, tag, Reading::Gcd) {
            Some(d) => Prediction {
                base_two: d.then_some(true),
                diameter_two: Some(d),
            },
            None => Prediction::NONE,
        },
        Family::Borel | Family::PglSubfield(_) => Prediction::base(false),
        Family::Subfield(m) => {
            if !projgroup::socle_maximal(family, p, n) {
                return Prediction::NONE;
            }
            let r = n / m;
            Prediction::base(r > 2 && is_prime(r as u64))
        }
        Family::A4 | Family::S4 | Family::A5 => match exceptional_threshold(family, p, n, tag) {
            Some(t) => Prediction::base(q >= t),
            None => Prediction::NONE,
        },
        Family::Custom => Prediction::NONE,
    }
}

/// Convenience for callers holding a built group.
pub fn predict_for(group: &Arc<Group>, family: &Family) -> Prediction {
    let f = group.field();
    predict(family, f.p(), f.n(), group.tag())
}
