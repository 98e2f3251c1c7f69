//! Elements of PΓL(2,q), the groups between PSL(2,q) and PΓL(2,q), and the
//! maximal-subgroup families used by the verifier.
//!
//! Convention: points are row vectors acted on from the right, and the pair
//! `(A, e)` denotes the product `f^e A` (Frobenius first, then the matrix), so
//! `v^(A,e) = σ^e(v) A`. Composing `(A1,e1)` then `(A2,e2)` gives
//! `σ^e2(v) ...`:
//!
//! ```text
//! v^((A1,e1)(A2,e2)) = σ^e2(σ^e1(v) A1) A2 = σ^(e1+e2)(v) σ^e2(A1) A2
//! ```
//!
//! hence `(A1,e1)(A2,e2) = (σ^e2(A1) A2, e1+e2)`. [`SemilinearGroup::compose`]
//! is the only place this is written down.

use std::collections::hash_map::DefaultHasher;
use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, OnceLock};

use dashmap::DashMap;
use serde::Serialize;
use thiserror::Error;

use crate::exec;
use crate::gf::{prime_factors, FieldCtx, FieldElement, FieldError};

pub const MAX_GROUP_FIELD: u32 = 1 << 12;
pub const DEFAULT_GROUP_CEILING: u64 = 8_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("singular matrix")]
    Singular,
    #[error("group computations need q <= {MAX_GROUP_FIELD} and q >= 4, got {0}")]
    FieldOutOfRange(u32),
    #[error("group of order {order} exceeds the enumeration ceiling {ceiling}")]
    TooLarge { order: u64, ceiling: u64 },
    #[error("bad group level: {0}")]
    BadLevel(String),
    #[error("determinant is not a square, no determinant-one lift")]
    NoUnitDetLift,
    #[error("unsupported case: {0}")]
    UnsupportedCase(String),
    #[error("subfield degree {m} is not admissible for n = {n}")]
    BadSubfieldDegree { m: u32, n: u32 },
    #[error("arithmetic conditions not met: {0}")]
    ConditionsNotMet(String),
    #[error("search exhausted without finding {0}")]
    SearchExhausted(String),
    #[error("subgroup is not contained in the group")]
    NotSubset,
    #[error("closure exceeded {0} elements")]
    ClosureExceeded(usize),
    #[error("{what}: expected order {expected}, found {found}")]
    WrongOrder { what: String, expected: u64, found: u64 },
}

pub type Result<T> = std::result::Result<T, GroupError>;

/// A 2x2 matrix modulo scalars, normalized so that the first nonzero entry in
/// the scan order a, b, c, d is 1.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize)]
pub struct ProjMatrix {
    pub a: FieldElement,
    pub b: FieldElement,
    pub c: FieldElement,
    pub d: FieldElement,
}

/// `(mat, e)` stands for `f^e · mat`. The derived order (matrix entries, then
/// e) is the fixed element enumeration order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize)]
pub struct SemilinearElement {
    pub mat: ProjMatrix,
    pub e: u32,
}

impl fmt::Display for SemilinearElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = &self.mat;
        write!(f, "[[{},{}],[{},{}]]", m.a, m.b, m.c, m.d)?;
        if self.e != 0 {
            write!(f, "·f^{}", self.e)?;
        }
        Ok(())
    }
}

/// Image in PΓL(2,q)/PSL(2,q) ≅ Z_d × Z_n.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize)]
pub struct Signature {
    pub nonsquare: bool,
    pub e: u32,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TraceClass {
    Involution,
    OrderThree,
    Generic,
}

/// A point of PG(1,q): `0..q` are field elements, `q` is infinity.
pub type Point = u32;

/// The ambient group PΓL(2,q).
pub struct SemilinearGroup {
    field: Arc<FieldCtx>,
    frob: Vec<Vec<FieldElement>>,
}

impl fmt::Debug for SemilinearGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PΓL(2,{})", self.field.q())
    }
}

impl SemilinearGroup {
    pub fn new(field: Arc<FieldCtx>) -> Result<Self> {
        let q = field.q();
        if !(4..=MAX_GROUP_FIELD).contains(&q) {
            return Err(GroupError::FieldOutOfRange(q));
        }
        let frob = (0..field.n())
            .map(|e| field.elements().map(|x| field.frobenius(x, e as i64)).collect())
            .collect();
        Ok(SemilinearGroup { field, frob })
    }

    pub fn for_prime_power(p: u32, n: u32) -> Result<Self> {
        Self::new(Arc::new(crate::gf::make_field(p, n, None)?))
    }

    pub fn field(&self) -> &FieldCtx {
        &self.field
    }

    pub fn field_arc(&self) -> &Arc<FieldCtx> {
        &self.field
    }

    pub fn q(&self) -> u32 {
        self.field.q()
    }

    pub fn p(&self) -> u32 {
        self.field.p()
    }

    pub fn n(&self) -> u32 {
        self.field.n()
    }

    /// gcd(2, q-1).
    pub fn d(&self) -> u32 {
        if self.field.is_odd() {
            2
        } else {
            1
        }
    }

    pub fn psl_order(&self) -> u64 {
        let q = self.q() as u64;
        q * (q * q - 1) / self.d() as u64
    }

    pub fn pgammal_order(&self) -> u64 {
        let q = self.q() as u64;
        q * (q * q - 1) * self.n() as u64
    }

    pub fn infinity(&self) -> Point {
        self.q()
    }

    fn sigma(&self, x: FieldElement, e: u32) -> FieldElement {
        if e == 0 {
            x
        } else {
            self.frob[e as usize][x.index() as usize]
        }
    }

    fn normalize(&self, a: FieldElement, b: FieldElement, c: FieldElement, d: FieldElement) -> ProjMatrix {
        let f = &self.field;
        let lead = [a, b, c, d].into_iter().find(|x| !x.is_zero()).expect("nonzero matrix");
        if lead == FieldElement::ONE {
            return ProjMatrix { a, b, c, d };
        }
        let s = f.inv(lead).expect("nonzero");
        ProjMatrix {
            a: f.mul(a, s),
            b: f.mul(b, s),
            c: f.mul(c, s),
            d: f.mul(d, s),
        }
    }

    pub fn matrix(&self, a: FieldElement, b: FieldElement, c: FieldElement, d: FieldElement) -> Result<ProjMatrix> {
        let f = &self.field;
        if f.sub(f.mul(a, d), f.mul(b, c)).is_zero() {
            return Err(GroupError::Singular);
        }
        Ok(self.normalize(a, b, c, d))
    }

    /// Matrix from prime-field integers, handy for literals like [[0,-1],[1,0]].
    pub fn int_matrix(&self, a: i64, b: i64, c: i64, d: i64) -> Result<SemilinearElement> {
        let f = &self.field;
        Ok(self.from_matrix(self.matrix(f.from_int(a), f.from_int(b), f.from_int(c), f.from_int(d))?))
    }

    pub fn element(&self, a: FieldElement, b: FieldElement, c: FieldElement, d: FieldElement, e: u32) -> Result<SemilinearElement> {
        Ok(SemilinearElement {
            mat: self.matrix(a, b, c, d)?,
            e: e % self.n(),
        })
    }

    pub fn from_matrix(&self, mat: ProjMatrix) -> SemilinearElement {
        SemilinearElement { mat, e: 0 }
    }

    pub fn identity(&self) -> SemilinearElement {
        SemilinearElement {
            mat: ProjMatrix {
                a: FieldElement::ONE,
                b: FieldElement::ZERO,
                c: FieldElement::ZERO,
                d: FieldElement::ONE,
            },
            e: 0,
        }
    }

    pub fn is_identity(&self, g: &SemilinearElement) -> bool {
        *g == self.identity()
    }

    /// The field automorphism f^k.
    pub fn frobenius_element(&self, k: u32) -> SemilinearElement {
        SemilinearElement {
            e: k % self.n(),
            ..self.identity()
        }
    }

    pub fn diag(&self, x: FieldElement, y: FieldElement) -> Result<SemilinearElement> {
        let z = FieldElement::ZERO;
        Ok(self.from_matrix(self.matrix(x, z, z, y)?))
    }

    /// δ = diag(1, θ).
    pub fn delta(&self) -> SemilinearElement {
        self.diag(FieldElement::ONE, self.field.theta()).expect("invertible")
    }

    pub fn unipotent_upper(&self, x: FieldElement) -> SemilinearElement {
        let (o, z) = (FieldElement::ONE, FieldElement::ZERO);
        self.from_matrix(self.matrix(o, x, z, o).expect("invertible"))
    }

    pub fn unipotent_lower(&self, x: FieldElement) -> SemilinearElement {
        let (o, z) = (FieldElement::ONE, FieldElement::ZERO);
        self.from_matrix(self.matrix(o, z, x, o).expect("invertible"))
    }

    pub fn compose(&self, g: &SemilinearElement, h: &SemilinearElement) -> SemilinearElement {
        let f = &self.field;
        let e = h.e;
        let (a, b, c, d) = (
            self.sigma(g.mat.a, e),
            self.sigma(g.mat.b, e),
            self.sigma(g.mat.c, e),
            self.sigma(g.mat.d, e),
        );
        let m = &h.mat;
        let na = f.add(f.mul(a, m.a), f.mul(b, m.c));
        let nb = f.add(f.mul(a, m.b), f.mul(b, m.d));
        let nc = f.add(f.mul(c, m.a), f.mul(d, m.c));
        let nd = f.add(f.mul(c, m.b), f.mul(d, m.d));
        SemilinearElement {
            mat: self.normalize(na, nb, nc, nd),
            e: (g.e + h.e) % self.n(),
        }
    }

    pub fn inverse(&self, g: &SemilinearElement) -> SemilinearElement {
        let f = &self.field;
        let n = self.n();
        let back = (n - g.e % n) % n;
        let m = &g.mat;
        let adj = [m.d, f.neg(m.b), f.neg(m.c), m.a].map(|x| self.sigma(x, back));
        SemilinearElement {
            mat: self.normalize(adj[0], adj[1], adj[2], adj[3]),
            e: back,
        }
    }

    pub fn power(&self, g: &SemilinearElement, mut k: u64) -> SemilinearElement {
        let mut r = self.identity();
        let mut b = *g;
        while k > 0 {
            if k & 1 == 1 {
                r = self.compose(&r, &b);
            }
            b = self.compose(&b, &b);
            k >>= 1;
        }
        r
    }

    pub fn order(&self, g: &SemilinearElement) -> u64 {
        let id = self.identity();
        let mut x = *g;
        let mut k = 1u64;
        while x != id {
            x = self.compose(&x, g);
            k += 1;
            assert!(k <= self.pgammal_order(), "element order exceeds |PΓL|");
        }
        k
    }

    /// g^-1 x g.
    pub fn conjugate(&self, x: &SemilinearElement, g: &SemilinearElement) -> SemilinearElement {
        self.compose(&self.compose(&self.inverse(g), x), g)
    }

    /// Injective integer key compatible with the enumeration order.
    pub fn key(&self, g: &SemilinearElement) -> u64 {
        let q = self.q() as u64;
        let m = &g.mat;
        let base = ((m.a.index() as u64 * q + m.b.index() as u64) * q + m.c.index() as u64) * q + m.d.index() as u64;
        base * self.n() as u64 + g.e as u64
    }

    pub fn det(&self, m: &ProjMatrix) -> FieldElement {
        let f = &self.field;
        f.sub(f.mul(m.a, m.d), f.mul(m.b, m.c))
    }

    pub fn signature(&self, g: &SemilinearElement) -> Signature {
        Signature {
            nonsquare: !self.field.is_square(self.det(&g.mat)),
            e: g.e,
        }
    }

    /// Trace class of the determinant-one lift: trace 0 means x² is scalar,
    /// trace ±1 means x³ is scalar.
    pub fn trace_class(&self, m: &ProjMatrix) -> Result<TraceClass> {
        let f = &self.field;
        let det = self.det(m);
        if !f.is_square(det) {
            return Err(GroupError::NoUnitDetLift);
        }
        let l = f.log(det).expect("nonsingular") as i64;
        let half = if f.is_odd() {
            l / 2
        } else {
            // q - 1 is odd, so halving is multiplication by (q/2) mod q-1.
            l * (f.q() as i64 / 2)
        };
        let lambda = f.theta_pow(-half);
        let tr = f.mul(lambda, f.add(m.a, m.d));
        Ok(if tr.is_zero() {
            TraceClass::Involution
        } else if tr == FieldElement::ONE || tr == f.neg(FieldElement::ONE) {
            TraceClass::OrderThree
        } else {
            TraceClass::Generic
        })
    }

    /// Möbius image of a point: z ↦ (b + z'd)/(a + z'c) with z' = σ^e(z).
    pub fn act(&self, pt: Point, g: &SemilinearElement) -> Point {
        let f = &self.field;
        let q = self.q();
        let m = &g.mat;
        let (x, y) = if pt == q {
            (m.c, m.d)
        } else {
            let z = self.sigma(f.element(pt), g.e);
            (f.add(m.a, f.mul(z, m.c)), f.add(m.b, f.mul(z, m.d)))
        };
        if x.is_zero() {
            q
        } else {
            f.div(y, x).expect("nonzero").index()
        }
    }
}

/// Closure of a generating set, sorted in enumeration order.
pub fn closure(amb: &SemilinearGroup, gens: &[SemilinearElement], cap: usize) -> Result<Vec<SemilinearElement>> {
    let id = amb.identity();
    let mut seen: HashSet<SemilinearElement> = HashSet::new();
    seen.insert(id);
    let mut queue = VecDeque::from([id]);
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y = amb.compose(&x, g);
            if seen.insert(y) {
                if seen.len() > cap {
                    return Err(GroupError::ClosureExceeded(cap));
                }
                queue.push_back(y);
            }
        }
    }
    let mut out: Vec<_> = seen.into_iter().collect();
    out.sort_unstable();
    Ok(out)
}

/// Adds elements (in enumeration order) to `base` until they generate `elements`.
pub fn extend_generators(
    amb: &SemilinearGroup,
    base: &[SemilinearElement],
    elements: &[SemilinearElement],
) -> Vec<SemilinearElement> {
    let mut gens = base.to_vec();
    let mut span = closure(amb, &gens, elements.len().max(1)).unwrap_or_default();
    for x in elements {
        if span.len() == elements.len() {
            break;
        }
        if span.binary_search(x).is_err() {
            gens.push(*x);
            span = closure(amb, &gens, elements.len()).expect("subset of a group");
        }
    }
    gens
}

pub fn hash_elements(elems: &[SemilinearElement]) -> u64 {
    let mut h = DefaultHasher::new();
    elems.hash(&mut h);
    h.finish()
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum LevelTag {
    T,
    /// T:⟨f^i⟩
    TF(u32),
    /// T.⟨δ f^i⟩
    TDeltaF(u32),
    PGL,
    PSigmaL,
    PGammaL,
    Custom(Vec<SemilinearElement>),
}

impl LevelTag {
    /// Parses `T`, `T:f^i`, `T:df^i`, `PGL`, `PSigmaL`, `PGammaL`.
    pub fn parse(s: &str) -> Result<LevelTag> {
        let bad = || GroupError::BadLevel(s.to_string());
        let s = s.trim();
        Ok(match s {
            "T" | "PSL" => LevelTag::T,
            "PGL" => LevelTag::PGL,
            "PSigmaL" => LevelTag::PSigmaL,
            "PGammaL" => LevelTag::PGammaL,
            _ => {
                if let Some(i) = s.strip_prefix("T:df^") {
                    LevelTag::TDeltaF(i.parse().map_err(|_| bad())?)
                } else if let Some(i) = s.strip_prefix("T:f^") {
                    LevelTag::TF(i.parse().map_err(|_| bad())?)
                } else {
                    return Err(bad());
                }
            }
        })
    }

    pub fn label(&self) -> String {
        match self {
            LevelTag::T => "T".into(),
            LevelTag::TF(i) => format!("T:f^{i}"),
            LevelTag::TDeltaF(i) => format!("T:df^{i}"),
            LevelTag::PGL => "PGL".into(),
            LevelTag::PSigmaL => "PSigmaL".into(),
            LevelTag::PGammaL => "PGammaL".into(),
            LevelTag::Custom(g) => format!("custom({} generators)", g.len()),
        }
    }
}

impl fmt::Display for LevelTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// A subgroup of Z_d × Z_n, i.e. a group between T and PΓL(2,q).
#[derive(Clone, Debug)]
pub struct GroupLevel {
    pub tag: LevelTag,
    d: u32,
    n: u32,
    allowed: Vec<bool>,
    ext_gens: Vec<Signature>,
}

impl GroupLevel {
    pub fn new(amb: &SemilinearGroup, tag: LevelTag) -> Result<GroupLevel> {
        let (d, n) = (amb.d(), amb.n());
        let sig = |s: bool, e: u32| Signature {
            nonsquare: s && d == 2,
            e: e % n,
        };
        let seeds: Vec<Signature> = match &tag {
            LevelTag::T => vec![],
            LevelTag::TF(i) => vec![sig(false, *i)],
            LevelTag::TDeltaF(i) => vec![sig(true, *i)],
            LevelTag::PGL => vec![sig(true, 0)],
            LevelTag::PSigmaL => vec![sig(false, 1)],
            LevelTag::PGammaL => vec![sig(true, 0), sig(false, 1)],
            LevelTag::Custom(g) => g.iter().map(|x| amb.signature(x)).collect(),
        };
        let idx = |s: Signature| (s.nonsquare as u32 * n + s.e) as usize;
        let span = |gens: &[Signature]| {
            let mut allowed = vec![false; (2 * n) as usize];
            allowed[0] = true;
            let mut frontier = vec![Signature { nonsquare: false, e: 0 }];
            while let Some(x) = frontier.pop() {
                for g in gens {
                    let y = Signature {
                        nonsquare: x.nonsquare ^ g.nonsquare,
                        e: (x.e + g.e) % n,
                    };
                    if !allowed[idx(y)] {
                        allowed[idx(y)] = true;
                        frontier.push(y);
                    }
                }
            }
            allowed
        };
        let allowed = span(&seeds);
        let mut ext_gens = Vec::new();
        let mut cur = span(&ext_gens);
        for s in [false, true] {
            for e in 0..n {
                let g = sig(s, e);
                if allowed[idx(g)] && !cur[idx(g)] {
                    ext_gens.push(g);
                    cur = span(&ext_gens);
                }
            }
        }
        Ok(GroupLevel {
            tag,
            d,
            n,
            allowed,
            ext_gens,
        })
    }

    pub fn contains_signature(&self, s: Signature) -> bool {
        self.allowed[(s.nonsquare as u32 * self.n + s.e) as usize]
    }

    pub fn index_over_socle(&self) -> u64 {
        self.allowed.iter().filter(|x| **x).count() as u64
    }

    pub fn has_outer_diagonal(&self) -> bool {
        self.d == 2 && (0..self.n).any(|e| self.allowed[(self.n + e) as usize])
    }

    pub fn has_field_part(&self) -> bool {
        (0..2 * self.n).any(|i| i % self.n != 0 && self.allowed[i as usize])
    }

    pub fn signatures(&self) -> Vec<Signature> {
        let mut out = Vec::new();
        for s in [false, true] {
            for e in 0..self.n {
                let sg = Signature { nonsquare: s, e };
                if (!s || self.d == 2) && self.contains_signature(sg) {
                    out.push(sg);
                }
            }
        }
        out
    }

    /// True when the level equals T:⟨f^i⟩ for some i (including T itself).
    pub fn is_field_extension_only(&self) -> bool {
        !self.has_outer_diagonal()
    }
}

/// A group T ≤ G ≤ PΓL(2,q) with lazily enumerated elements.
pub struct Group {
    amb: Arc<SemilinearGroup>,
    level: GroupLevel,
    gens: Vec<SemilinearElement>,
    ceiling: u64,
    elements: OnceLock<Vec<SemilinearElement>>,
    cache: DashMap<(u8, u64), Arc<Vec<SemilinearElement>>>,
}

impl fmt::Debug for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(q={})", self.level.tag, self.amb.q())
    }
}

impl Group {
    pub fn new(amb: Arc<SemilinearGroup>, tag: LevelTag) -> Result<Group> {
        let level = GroupLevel::new(&amb, tag)?;
        let f = amb.field();
        let mut gens = Vec::new();
        for i in 0..f.n() {
            let x = f.theta_pow(i as i64);
            gens.push(amb.unipotent_upper(x));
            gens.push(amb.unipotent_lower(x));
        }
        if let LevelTag::Custom(extra) = &level.tag {
            gens.extend(extra.iter().copied());
        } else {
            for s in &level.ext_gens {
                let base = if s.nonsquare { amb.delta() } else { amb.identity() };
                gens.push(SemilinearElement { e: s.e, ..base });
            }
        }
        Ok(Group {
            amb,
            level,
            gens,
            ceiling: DEFAULT_GROUP_CEILING,
            elements: OnceLock::new(),
            cache: DashMap::new(),
        })
    }

    pub fn with_ceiling(mut self, ceiling: u64) -> Group {
        self.ceiling = ceiling;
        self
    }

    pub fn build(p: u32, n: u32, tag: LevelTag) -> Result<Arc<Group>> {
        let amb = Arc::new(SemilinearGroup::for_prime_power(p, n)?);
        Ok(Arc::new(Group::new(amb, tag)?))
    }

    /// Another level over the same ambient group.
    pub fn sibling(&self, tag: LevelTag) -> Result<Arc<Group>> {
        Ok(Arc::new(Group::new(self.amb.clone(), tag)?))
    }

    pub fn ambient(&self) -> &Arc<SemilinearGroup> {
        &self.amb
    }

    pub fn field(&self) -> &FieldCtx {
        self.amb.field()
    }

    pub fn level(&self) -> &GroupLevel {
        &self.level
    }

    pub fn tag(&self) -> &LevelTag {
        &self.level.tag
    }

    pub fn generators(&self) -> &[SemilinearElement] {
        &self.gens
    }

    pub fn order(&self) -> u64 {
        self.amb.psl_order() * self.level.index_over_socle()
    }

    pub fn contains(&self, g: &SemilinearElement) -> bool {
        self.level.contains_signature(self.amb.signature(g))
    }

    pub fn in_socle(&self, g: &SemilinearElement) -> bool {
        let s = self.amb.signature(g);
        !s.nonsquare && s.e == 0
    }

    /// All elements in enumeration order.
    pub fn elements(&self) -> Result<&[SemilinearElement]> {
        if let Some(v) = self.elements.get() {
            return Ok(v);
        }
        if self.order() > self.ceiling {
            return Err(GroupError::TooLarge {
                order: self.order(),
                ceiling: self.ceiling,
            });
        }
        Ok(self.elements.get_or_init(|| self.enumerate()))
    }

    fn enumerate(&self) -> Vec<SemilinearElement> {
        let f = self.amb.field();
        let (z, o) = (FieldElement::ZERO, FieldElement::ONE);
        let mut mats = Vec::new();
        for c in f.nonzero_elements() {
            for d in f.elements() {
                mats.push(ProjMatrix { a: z, b: o, c, d });
            }
        }
        for b in f.elements() {
            for c in f.elements() {
                for d in f.elements() {
                    if !f.sub(d, f.mul(b, c)).is_zero() {
                        mats.push(ProjMatrix { a: o, b, c, d });
                    }
                }
            }
        }
        let mut out = Vec::with_capacity(self.order() as usize);
        for mat in mats {
            let nonsquare = !f.is_square(self.amb.det(&mat));
            for e in 0..f.n() {
                if self.level.contains_signature(Signature { nonsquare, e }) {
                    out.push(SemilinearElement { mat, e });
                }
            }
        }
        debug_assert_eq!(out.len() as u64, self.order());
        out
    }

    fn check_subset(&self, k: &SubgroupSpec) -> Result<()> {
        if k.generators.iter().all(|g| self.contains(g)) {
            Ok(())
        } else {
            Err(GroupError::NotSubset)
        }
    }

    fn scan_cached<F>(&self, kind: u8, k: &SubgroupSpec, keep: F) -> Result<Arc<Vec<SemilinearElement>>>
    where
        F: Fn(&SemilinearElement) -> bool + Sync + Send,
    {
        self.check_subset(k)?;
        let key = (kind, hash_elements(k.elements()));
        if let Some(hit) = self.cache.get(&key) {
            return Ok(hit.clone());
        }
        let found = Arc::new(exec::filter(self.elements()?, keep));
        self.cache.insert(key, found.clone());
        Ok(found)
    }

    pub fn normalizer(&self, k: &SubgroupSpec) -> Result<SubgroupSpec> {
        let amb = &*self.amb;
        let elems = self.scan_cached(0, k, |g| {
            k.generators.iter().all(|x| k.contains(&amb.conjugate(x, g)))
        })?;
        Ok(SubgroupSpec::from_elements(
            amb,
            Family::Custom,
            &k.generators,
            elems.to_vec(),
        ))
    }

    pub fn centralizer(&self, k: &SubgroupSpec) -> Result<SubgroupSpec> {
        let amb = &*self.amb;
        let elems = self.scan_cached(1, k, |g| {
            k.generators.iter().all(|x| amb.compose(x, g) == amb.compose(g, x))
        })?;
        Ok(SubgroupSpec::from_elements(amb, Family::Custom, &[], elems.to_vec()))
    }

    /// G-conjugates of `k` that lie in `h`, split into h-conjugacy classes.
    pub fn conjugates_in(&self, k: &SubgroupSpec, h: &SubgroupSpec) -> Result<Vec<Vec<SubgroupSpec>>> {
        self.check_subset(k)?;
        self.check_subset(h)?;
        let amb = &*self.amb;
        let conj = |elems: &[SemilinearElement], g: &SemilinearElement| {
            let mut v: Vec<_> = elems.iter().map(|x| amb.conjugate(x, g)).collect();
            v.sort_unstable();
            v
        };
        let start = k.elements().to_vec();
        let mut seen: HashSet<Vec<SemilinearElement>> = HashSet::from([start.clone()]);
        let mut queue = VecDeque::from([start]);
        let mut inside = Vec::new();
        while let Some(x) = queue.pop_front() {
            if x.iter().all(|e| h.contains(e)) {
                inside.push(x.clone());
            }
            for g in &self.gens {
                let y = conj(&x, g);
                if !seen.contains(&y) {
                    seen.insert(y.clone());
                    queue.push_back(y);
                }
            }
        }
        inside.sort();
        let pos: HashMap<Vec<SemilinearElement>, usize> =
            inside.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
        let mut class_of = vec![usize::MAX; inside.len()];
        let mut classes = Vec::new();
        for start in 0..inside.len() {
            if class_of[start] != usize::MAX {
                continue;
            }
            let cid = classes.len();
            class_of[start] = cid;
            let mut members = vec![start];
            let mut i = 0;
            while i < members.len() {
                let x = &inside[members[i]];
                for g in &h.generators {
                    let y = conj(x, g);
                    let j = pos[&y];
                    if class_of[j] == usize::MAX {
                        class_of[j] = cid;
                        members.push(j);
                    }
                }
                i += 1;
            }
            members.sort_unstable();
            classes.push(
                members
                    .into_iter()
                    .map(|j| SubgroupSpec::from_elements(amb, k.family.clone(), &[], inside[j].clone()))
                    .collect(),
            );
        }
        Ok(classes)
    }

    /// One representative per h-class of G-conjugates of `k` inside `h`.
    pub fn subgroup_conjugacy_classes(&self, k: &SubgroupSpec, h: &SubgroupSpec) -> Result<Vec<SubgroupSpec>> {
        Ok(self
            .conjugates_in(k, h)?
            .into_iter()
            .map(|mut c| c.swap_remove(0))
            .collect())
    }

    /// True iff some element of G conjugates `a` onto `b`.
    pub fn are_conjugate(&self, a: &SubgroupSpec, b: &SubgroupSpec) -> Result<bool> {
        if a.order() != b.order() {
            return Ok(false);
        }
        let amb = &*self.amb;
        Ok(exec::any(self.elements()?, |g| {
            a.generators.iter().all(|x| b.contains(&amb.conjugate(x, g)))
        }))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Family {
    DihedralPlus,
    DihedralMinus,
    Borel,
    Subfield(u32),
    PglSubfield(u32),
    A4,
    S4,
    A5,
    Custom,
}

impl Family {
    /// Parses the CLI spelling: d-plus, d-minus, borel, subfield:m, pgl-subfield:m, a4, s4, a5.
    pub fn parse(s: &str) -> Option<Family> {
        Some(match s {
            "d-plus" => Family::DihedralPlus,
            "d-minus" => Family::DihedralMinus,
            "borel" => Family::Borel,
            "a4" => Family::A4,
            "s4" => Family::S4,
            "a5" => Family::A5,
            _ => {
                if let Some(m) = s.strip_prefix("subfield:") {
                    Family::Subfield(m.parse().ok()?)
                } else {
                    let m = s.strip_prefix("pgl-subfield:")?;
                    Family::PglSubfield(m.parse().ok()?)
                }
            }
        })
    }

    pub fn label(&self) -> String {
        match self {
            Family::DihedralPlus => "d-plus".into(),
            Family::DihedralMinus => "d-minus".into(),
            Family::Borel => "borel".into(),
            Family::Subfield(m) => format!("subfield:{m}"),
            Family::PglSubfield(m) => format!("pgl-subfield:{m}"),
            Family::A4 => "a4".into(),
            Family::S4 => "s4".into(),
            Family::A5 => "a5".into(),
            Family::Custom => "custom".into(),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// A concrete subgroup: generators plus the full sorted element list.
#[derive(Clone, Debug)]
pub struct SubgroupSpec {
    pub family: Family,
    pub normalizer_extended: bool,
    pub generators: Vec<SemilinearElement>,
    elements: Vec<SemilinearElement>,
    pub maximality_warning: Option<String>,
}

impl SubgroupSpec {
    pub fn from_generators(
        amb: &SemilinearGroup,
        family: Family,
        gens: Vec<SemilinearElement>,
        cap: usize,
    ) -> Result<SubgroupSpec> {
        let elements = closure(amb, &gens, cap)?;
        Ok(SubgroupSpec {
            family,
            normalizer_extended: false,
            generators: gens,
            elements,
            maximality_warning: None,
        })
    }

    /// `elements` must be a subgroup; generators are `base` extended greedily.
    pub fn from_elements(
        amb: &SemilinearGroup,
        family: Family,
        base: &[SemilinearElement],
        mut elements: Vec<SemilinearElement>,
    ) -> SubgroupSpec {
        elements.sort_unstable();
        let base: Vec<_> = base.iter().copied().filter(|x| elements.binary_search(x).is_ok()).collect();
        let generators = extend_generators(amb, &base, &elements);
        SubgroupSpec {
            family,
            normalizer_extended: false,
            generators,
            elements,
            maximality_warning: None,
        }
    }

    pub fn order(&self) -> u64 {
        self.elements.len() as u64
    }

    pub fn elements(&self) -> &[SemilinearElement] {
        &self.elements
    }

    pub fn contains(&self, g: &SemilinearElement) -> bool {
        self.elements.binary_search(g).is_ok()
    }

    pub fn is_subgroup_of(&self, other: &SubgroupSpec) -> bool {
        self.elements.iter().all(|x| other.contains(x))
    }

    /// The intersection with a level, as a subgroup.
    pub fn intersect_level(&self, amb: &SemilinearGroup, group: &Group) -> SubgroupSpec {
        let elems: Vec<_> = self.elements.iter().copied().filter(|x| group.contains(x)).collect();
        SubgroupSpec::from_elements(amb, self.family.clone(), &self.generators, elems)
    }

    pub fn with_family(mut self, family: Family) -> SubgroupSpec {
        self.family = family;
        self
    }

    fn expect_order(self, what: &str, expected: u64) -> Result<SubgroupSpec> {
        if self.order() != expected {
            return Err(GroupError::WrongOrder {
                what: what.to_string(),
                expected,
                found: self.order(),
            });
        }
        Ok(self)
    }
}

/// GF(q²) as GF(q)(α) with α² = r (odd q) or α² = α + r (even q).
struct QuadExt<'a> {
    f: &'a FieldCtx,
    r: FieldElement,
}

impl QuadExt<'_> {
    fn mul(&self, x: (FieldElement, FieldElement), y: (FieldElement, FieldElement)) -> (FieldElement, FieldElement) {
        let f = self.f;
        let re = f.add(f.mul(x.0, y.0), f.mul(self.r, f.mul(x.1, y.1)));
        let mut im = f.add(f.mul(x.0, y.1), f.mul(x.1, y.0));
        if !f.is_odd() {
            im = f.add(im, f.mul(x.1, y.1));
        }
        (re, im)
    }

    fn pow(&self, x: (FieldElement, FieldElement), mut k: u64) -> (FieldElement, FieldElement) {
        let mut r = (FieldElement::ONE, FieldElement::ZERO);
        let mut b = x;
        while k > 0 {
            if k & 1 == 1 {
                r = self.mul(r, b);
            }
            b = self.mul(b, b);
            k >>= 1;
        }
        r
    }

    /// First x + yα (in (x, y) enumeration order) generating GF(q²)^*.
    fn generator(&self) -> (FieldElement, FieldElement) {
        let q = self.f.q() as u64;
        let order = q * q - 1;
        let factors = prime_factors(order);
        let one = (FieldElement::ONE, FieldElement::ZERO);
        for x in self.f.elements() {
            for y in self.f.nonzero_elements() {
                if factors.iter().all(|&l| self.pow((x, y), order / l) != one) {
                    return (x, y);
                }
            }
        }
        unreachable!("GF(q²)^* is cyclic")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GeneratorCase {
    /// p ≡ 3 mod 4, n odd: b = st, c = fw.
    ThreeModFourOdd,
    /// p ≡ 1 mod 4: b = t, c = fw.
    OneModFour,
    /// p ≡ 3 mod 4, n even: b = t, c = fw·s^((q+1)/2).
    ThreeModFourEven,
}

/// Explicit generators of D_{q+1}.Z_n for odd q.
#[derive(Clone, Debug)]
pub struct DihedralPlusGenerators {
    pub case: GeneratorCase,
    /// Element of 2-power order 2^l used for α² (a nonsquare).
    pub alpha_sq: FieldElement,
    pub s: SemilinearElement,
    pub t: SemilinearElement,
    pub w: SemilinearElement,
    pub a: SemilinearElement,
    pub b: SemilinearElement,
    pub c: SemilinearElement,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationCheck {
    pub a_conj_c_is_a_pow_p: bool,
    pub c_pow_n_is_t: bool,
    /// (r, c^(n/r) = f^(n/r) t, c^(2n/r) = f^(2n/r)) for odd primes r | n.
    pub odd_prime_parts: Vec<(u32, bool, bool)>,
}

impl RelationCheck {
    pub fn all_hold(&self) -> bool {
        self.a_conj_c_is_a_pow_p && self.c_pow_n_is_t && self.odd_prime_parts.iter().all(|x| x.1 && x.2)
    }
}

impl DihedralPlusGenerators {
    pub fn new(amb: &SemilinearGroup) -> Result<Self> {
        let f = amb.field();
        if !f.is_odd() {
            return Err(GroupError::UnsupportedCase("explicit D_{q+1}.Z_n generators need odd q".into()));
        }
        let (p, n, q) = (f.p(), f.n(), f.q() as i64);
        let mut two_part = 1i64;
        while (q - 1) % (two_part * 2) == 0 {
            two_part *= 2;
        }
        let alpha_sq = f.theta_pow((q - 1) / two_part);
        let ext = QuadExt { f, r: alpha_sq };
        let (x, y) = ext.generator();
        let o = FieldElement::ONE;
        let s = amb.from_matrix(amb.matrix(x, f.mul(y, alpha_sq), y, x)?);
        let t = amb.diag(o, f.neg(o))?;
        let w_entry = f.pow(alpha_sq, (1 - p as i64) / 2)?;
        let w = amb.diag(o, w_entry)?;
        let fw = SemilinearElement { e: 1 % n, ..w };
        let a = amb.compose(&s, &s);
        let case = if p % 4 == 1 {
            GeneratorCase::OneModFour
        } else if n % 2 == 1 {
            GeneratorCase::ThreeModFourOdd
        } else {
            GeneratorCase::ThreeModFourEven
        };
        let (b, c) = match case {
            GeneratorCase::ThreeModFourOdd => (amb.compose(&s, &t), fw),
            GeneratorCase::OneModFour => (t, fw),
            GeneratorCase::ThreeModFourEven => {
                let sp = amb.power(&s, (q as u64).div_ceil(2));
                (t, amb.compose(&fw, &sp))
            }
        };
        Ok(DihedralPlusGenerators {
            case,
            alpha_sq,
            s,
            t,
            w,
            a,
            b,
            c,
        })
    }

    pub fn relations(&self, amb: &SemilinearGroup) -> RelationCheck {
        let (p, n) = (amb.p(), amb.n());
        let a_conj = amb.conjugate(&self.a, &self.c);
        let a_p = amb.power(&self.a, p as u64);
        let c_n = amb.power(&self.c, n as u64);
        let mut parts = Vec::new();
        for r in prime_factors(n as u64).into_iter().filter(|&r| r % 2 == 1) {
            let k = n as u64 / r;
            let lhs = amb.power(&self.c, k);
            let rhs = amb.compose(&amb.frobenius_element(k as u32), &self.t);
            let lhs2 = amb.power(&self.c, 2 * k);
            let rhs2 = amb.frobenius_element((2 * k) as u32);
            parts.push((r as u32, lhs == rhs, lhs2 == rhs2));
        }
        RelationCheck {
            a_conj_c_is_a_pow_p: a_conj == a_p,
            c_pow_n_is_t: c_n == self.t,
            odd_prime_parts: parts,
        }
    }
}

fn level_is_psigmal(g: &Group) -> bool {
    let sigs = g.level.signatures();
    sigs.len() as u32 == g.amb.n() && sigs.iter().all(|s| !s.nonsquare)
}

/// The dihedral subgroup D_{2(q+1)/d} of T, normalized in G.
pub fn dihedral_plus(g: &Group) -> Result<SubgroupSpec> {
    let amb = &**g.ambient();
    let f = amb.field();
    let q = f.q() as u64;
    let mut spec = if f.is_odd() {
        let gens = DihedralPlusGenerators::new(amb)?;
        let m0 = SubgroupSpec::from_generators(amb, Family::DihedralPlus, vec![gens.a, gens.b], 4 * q as usize)?
            .expect_order("D_{q+1}", q + 1)?;
        let mut full = vec![gens.a, gens.b, gens.s];
        if f.n() > 1 {
            full.push(gens.c);
        }
        let cap = (2 * (q + 1) * f.n() as u64) as usize;
        let norm = closure(amb, &full, cap)?;
        if norm.len() != cap {
            return Err(GroupError::WrongOrder {
                what: "normalizer of D_{q+1} in PΓL".into(),
                expected: cap as u64,
                found: norm.len() as u64,
            });
        }
        let elems: Vec<_> = norm.into_iter().filter(|x| g.contains(x)).collect();
        let base: Vec<_> = if level_is_psigmal(g) && f.n() > 1 {
            vec![gens.a, gens.b, gens.c]
        } else {
            m0.generators.clone()
        };
        SubgroupSpec::from_elements(amb, Family::DihedralPlus, &base, elems)
    } else {
        let r = f
            .elements()
            .find(|&x| {
                // x² + x + r is irreducible iff r has absolute trace 1.
                let mut tr = FieldElement::ZERO;
                for k in 0..f.n() {
                    tr = f.add(tr, f.frobenius(x, k as i64));
                }
                tr == FieldElement::ONE
            })
            .expect("trace is onto");
        let ext = QuadExt { f, r };
        let (x, y) = ext.generator();
        let s = amb.from_matrix(amb.matrix(x, f.mul(y, r), y, f.add(x, y))?);
        let b = amb.unipotent_upper(FieldElement::ONE);
        let m0 = SubgroupSpec::from_generators(amb, Family::DihedralPlus, vec![s, b], 4 * q as usize)?
            .expect_order("D_{2(q+1)}", 2 * (q + 1))?;
        if g.level.index_over_socle() == 1 {
            m0
        } else {
            let nm = g.normalizer(&m0)?;
            SubgroupSpec::from_elements(amb, Family::DihedralPlus, &m0.generators, nm.elements.clone())
        }
    };
    spec.normalizer_extended = spec.order() > 2 * (q + 1) / amb.d() as u64;
    if q == 7 || (q == 9 && !level_is_psigmal(g)) {
        spec.maximality_warning = Some(format!("D_{{q+1}} is not maximal for q = {q}"));
    }
    Ok(spec)
}

/// Stabilizer in G of the 2-subset {0, ∞}; inside T it is D_{q-1} = ⟨diag(1,θ²), [[0,-1],[1,0]]⟩.
pub fn dihedral_minus(g: &Group) -> Result<SubgroupSpec> {
    let amb = &**g.ambient();
    let f = amb.field();
    if !f.is_odd() {
        return Err(GroupError::UnsupportedCase("the D_{q-1} family is handled for odd q".into()));
    }
    let (o, z) = (FieldElement::ONE, FieldElement::ZERO);
    let mut elems = Vec::new();
    for lam in f.nonzero_elements() {
        for mat in [amb.matrix(o, z, z, lam)?, amb.matrix(z, o, lam, z)?] {
            for e in 0..f.n() {
                let x = SemilinearElement { mat, e };
                if g.contains(&x) {
                    elems.push(x);
                }
            }
        }
    }
    let s = amb.diag(o, f.theta_pow(2))?;
    let v = amb.int_matrix(0, -1, 1, 0)?;
    let mut base = vec![s, v];
    if level_is_psigmal(g) && f.n() > 1 {
        base.push(amb.frobenius_element(1));
    }
    let mut spec = SubgroupSpec::from_elements(amb, Family::DihedralMinus, &base, elems);
    let q = f.q() as u64;
    let socle_part = spec.elements.iter().filter(|x| g.in_socle(x)).count() as u64;
    if socle_part != q - 1 {
        return Err(GroupError::WrongOrder {
            what: "D_{q-1}".into(),
            expected: q - 1,
            found: socle_part,
        });
    }
    spec.normalizer_extended = spec.order() > q - 1;
    if [5, 7, 9, 11].contains(&q) {
        spec.maximality_warning = Some(format!("D_{{q-1}} is not maximal for q = {q}"));
    }
    Ok(spec)
}

/// Stabilizer of ∞: upper-triangular elements of G.
pub fn borel(g: &Group) -> Result<SubgroupSpec> {
    let amb = &**g.ambient();
    let f = amb.field();
    let (o, z) = (FieldElement::ONE, FieldElement::ZERO);
    let mut elems = Vec::new();
    for b in f.elements() {
        for d in f.nonzero_elements() {
            let mat = amb.matrix(o, b, z, d)?;
            for e in 0..f.n() {
                let x = SemilinearElement { mat, e };
                if g.contains(&x) {
                    elems.push(x);
                }
            }
        }
    }
    let mut base: Vec<_> = (0..f.n()).map(|i| amb.unipotent_upper(f.theta_pow(i as i64))).collect();
    base.push(amb.diag(o, f.theta_pow(2))?);
    let mut spec = SubgroupSpec::from_elements(amb, Family::Borel, &base, elems);
    let q = f.q() as u64;
    spec.normalizer_extended = spec.order() > q * (q - 1) / amb.d() as u64;
    Ok(spec)
}

fn subfield_pgl_generators(amb: &SemilinearGroup, m: u32) -> Result<(Vec<SemilinearElement>, SemilinearElement)> {
    let f = amb.field();
    let w = f.subfield_primitive(m)?;
    let mut gens = Vec::new();
    for i in 0..m {
        let x = f.pow(w, i as i64)?;
        gens.push(amb.unipotent_upper(x));
        gens.push(amb.unipotent_lower(x));
    }
    Ok((gens, amb.diag(FieldElement::ONE, w)?))
}

fn psl_order(p: u32, m: u32) -> u64 {
    let r = (p as u64).pow(m);
    let d = if p == 2 { 1 } else { 2 };
    r * (r * r - 1) / d
}

/// PSL(2,p^m) in T, normalized in G.
pub fn subfield(g: &Group, m: u32) -> Result<SubgroupSpec> {
    let amb = &**g.ambient();
    let (p, n) = (amb.p(), amb.n());
    let ok = m >= 1
        && n % m == 0
        && (p as u64).pow(m) > 2
        && ((n / m > 2 && crate::gf::is_prime((n / m) as u64)) || (p == 2 && n == 2 * m));
    if !ok {
        return Err(GroupError::BadSubfieldDegree { m, n });
    }
    let (sl_gens, diag) = subfield_pgl_generators(amb, m)?;
    let m0 = SubgroupSpec::from_generators(amb, Family::Subfield(m), sl_gens.clone(), psl_order(p, m) as usize * 2)?
        .expect_order("PSL(2,p^m)", psl_order(p, m))?;
    let mut all = sl_gens.clone();
    all.push(diag);
    all.push(amb.frobenius_element(1));
    let pgl_order = psl_order(p, m) * if p == 2 { 1 } else { 2 };
    let cap = (pgl_order * n as u64) as usize;
    let norm = closure(amb, &all, cap)?;
    let elems: Vec<_> = norm.into_iter().filter(|x| g.contains(x)).collect();
    let mut spec = SubgroupSpec::from_elements(amb, Family::Subfield(m), &m0.generators, elems);
    spec.normalizer_extended = spec.order() > m0.order();
    Ok(spec)
}

/// PGL(2,p^m) inside T for q = p^(2m), normalized in G.
pub fn pgl_subfield(g: &Group, m: u32) -> Result<SubgroupSpec> {
    let amb = &**g.ambient();
    let (p, n) = (amb.p(), amb.n());
    if p == 2 || n != 2 * m {
        return Err(GroupError::BadSubfieldDegree { m, n });
    }
    let (mut gens, diag) = subfield_pgl_generators(amb, m)?;
    gens.push(diag);
    let expected = psl_order(p, m) * 2;
    let m0 = SubgroupSpec::from_generators(amb, Family::PglSubfield(m), gens, 2 * expected as usize)?
        .expect_order("PGL(2,p^m)", expected)?;
    let mut spec = if g.level.index_over_socle() == 1 {
        m0.clone()
    } else {
        let nm = g.normalizer(&m0)?;
        SubgroupSpec::from_elements(amb, Family::PglSubfield(m), &m0.generators, nm.elements.clone())
    };
    spec.normalizer_extended = spec.order() > m0.order();
    Ok(spec)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ExceptionalType {
    A4,
    S4,
    A5,
}

impl ExceptionalType {
    pub fn order(self) -> u64 {
        match self {
            ExceptionalType::A4 => 12,
            ExceptionalType::S4 => 24,
            ExceptionalType::A5 => 60,
        }
    }

    /// Order of xy in the (2,3,k) presentation.
    fn product_order(self) -> u64 {
        match self {
            ExceptionalType::A4 => 3,
            ExceptionalType::S4 => 4,
            ExceptionalType::A5 => 5,
        }
    }

    pub fn family(self) -> Family {
        match self {
            ExceptionalType::A4 => Family::A4,
            ExceptionalType::S4 => Family::S4,
            ExceptionalType::A5 => Family::A5,
        }
    }
}

/// Existence of the abstract type inside G, following Dickson's list.
pub fn exceptional_exists(g: &Group, kind: ExceptionalType) -> bool {
    let f = g.field();
    let (p, n, q) = (f.p(), f.n(), f.q() as u64);
    match kind {
        ExceptionalType::A4 => (p != 2 && q >= 5) || (p == 2 && n % 2 == 0),
        ExceptionalType::S4 => p != 2 && (q % 8 == 1 || q % 8 == 7 || g.level.has_outer_diagonal()),
        ExceptionalType::A5 => (q * (q * q - 1)) % 5 == 0,
    }
}

/// Conjugacy-class representatives H of the given type in G, each returned
/// as its normalizer N_G(H).
pub fn exceptional(g: &Group, kind: ExceptionalType) -> Result<Vec<SubgroupSpec>> {
    if !exceptional_exists(g, kind) {
        return Err(GroupError::ConditionsNotMet(format!(
            "{kind:?} does not embed for q = {} at level {}",
            g.field().q(),
            g.tag()
        )));
    }
    let amb = &**g.ambient();
    let elems = g.elements()?;
    let id = amb.identity();
    let involutions = exec::filter(elems, |x| *x != id && amb.compose(x, x) == id);
    let order3 = exec::filter(elems, |x| *x != id && amb.power(x, 3) == id);

    // G-classes of involutions; representatives are the least members.
    let pos: HashMap<SemilinearElement, usize> = involutions.iter().enumerate().map(|(i, x)| (*x, i)).collect();
    let mut seen = vec![false; involutions.len()];
    let mut reps = Vec::new();
    for i in 0..involutions.len() {
        if seen[i] {
            continue;
        }
        reps.push(involutions[i]);
        seen[i] = true;
        let mut stack = vec![i];
        while let Some(j) = stack.pop() {
            for h in g.generators() {
                let k = pos[&amb.conjugate(&involutions[j], h)];
                if !seen[k] {
                    seen[k] = true;
                    stack.push(k);
                }
            }
        }
    }

    let target = kind.product_order();
    let want = kind.order();
    let mut found: Vec<SubgroupSpec> = Vec::new();
    for x in &reps {
        for y in &order3 {
            if found.iter().any(|h| h.contains(x) && h.contains(y)) {
                continue;
            }
            let xy = amb.compose(x, y);
            if amb.order(&xy) != target {
                continue;
            }
            if let Ok(h) = SubgroupSpec::from_generators(amb, kind.family(), vec![*x, *y], want as usize) {
                if h.order() == want {
                    found.push(h);
                }
            }
        }
    }
    if found.is_empty() {
        return Err(GroupError::SearchExhausted(format!("{kind:?} in {g:?}")));
    }

    let mut classes: Vec<SubgroupSpec> = Vec::new();
    for h in found {
        let mut new_class = true;
        for r in &classes {
            if g.are_conjugate(&h, r)? {
                new_class = false;
                break;
            }
        }
        if new_class {
            classes.push(h);
        }
    }
    classes
        .into_iter()
        .map(|h| {
            let nm = g.normalizer(&h)?;
            let mut spec = SubgroupSpec::from_elements(amb, kind.family(), &h.generators, nm.elements.clone());
            spec.normalizer_extended = spec.order() > h.order();
            Ok(spec)
        })
        .collect()
}

/// The subgroup(s) of a family in G: one spec, or one per conjugacy class
/// for the exceptional types.
pub fn family_subgroups(g: &Group, family: &Family) -> Result<Vec<SubgroupSpec>> {
    Ok(match family {
        Family::DihedralPlus => vec![dihedral_plus(g)?],
        Family::DihedralMinus => vec![dihedral_minus(g)?],
        Family::Borel => vec![borel(g)?],
        Family::Subfield(m) => vec![subfield(g, *m)?],
        Family::PglSubfield(m) => vec![pgl_subfield(g, *m)?],
        Family::A4 => exceptional(g, ExceptionalType::A4)?,
        Family::S4 => exceptional(g, ExceptionalType::S4)?,
        Family::A5 => exceptional(g, ExceptionalType::A5)?,
        Family::Custom => return Err(GroupError::UnsupportedCase("custom family has no builder".into())),
    })
}

/// Whether the family is a maximal subgroup of PSL(2,q), q = p^n ≥ 5.
pub fn socle_maximal(family: &Family, p: u32, n: u32) -> bool {
    let q = (p as u64).pow(n);
    match family {
        Family::DihedralPlus => ![7, 9].contains(&q) && (p != 2 || q > 4),
        Family::DihedralMinus => p != 2 && ![5, 7, 9, 11].contains(&q) || (p == 2 && q > 4),
        Family::Borel => true,
        Family::Subfield(m) => {
            n % m == 0
                && (p as u64).pow(*m) > 2
                && ((crate::gf::is_prime((n / m) as u64) && n / m > 2) || (p == 2 && n == 2 * m))
        }
        Family::PglSubfield(m) => p != 2 && n == 2 * m,
        Family::A5 => (q % 10 == 1 || q % 10 == 9) && (n == 1 || (n == 2 && (p % 10 == 3 || p % 10 == 7))),
        Family::A4 => n == 1 && (q % 8 == 3 || q % 8 == 5) && !(q % 10 == 1 || q % 10 == 9),
        Family::S4 => n == 1 && (q % 8 == 1 || q % 8 == 7),
        Family::Custom => false,
    }
}
