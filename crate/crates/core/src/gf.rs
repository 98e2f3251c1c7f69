//! Arithmetic in GF(p^n).
//!
//! Elements are stored as the base-p integer encoding of their coefficient
//! vector (low degree first), so `0..q` is the canonical enumeration order.
//! Multiplication goes through discrete-log tables and addition through a
//! Zech-logarithm table, which keeps memory linear in q.

use std::fmt;
use std::sync::OnceLock;

use serde::Serialize;
use thiserror::Error;

pub const DEFAULT_FIELD_CEILING: u64 = 1 << 20;
const EAGER_TABLE_LIMIT: u32 = 1 << 16;
const NO_LOG: u32 = u32::MAX;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus is reducible over GF(p)")]
    Reducible,
    #[error("modulus must be monic of degree {0} with coefficients below p")]
    BadModulus(u32),
    #[error("field order {order} exceeds the ceiling {ceiling}")]
    TooLarge { order: u128, ceiling: u64 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("the quadratic character needs odd characteristic")]
    EvenCharacteristic,
    #[error("{m} does not divide the degree {n}")]
    NotSubfieldDegree { m: u32, n: u32 },
    #[error("relative trace of the input is nonzero")]
    NonzeroTrace,
    #[error("relative norm of the input is not 1")]
    NonUnitNorm,
    #[error("t must differ from 0 and 1")]
    BadT,
    #[error("invalid coefficient vector")]
    BadCoefficients,
}

/// A field element, encoded as `sum coeffs[i] * p^i`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default, Serialize)]
pub struct FieldElement(u32);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    pub fn index(self) -> u32 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow(i64),
    Inv,
}

struct Tables {
    exp: Vec<u32>,
    log: Vec<u32>,
    zech: Vec<u32>,
    neg: Vec<u32>,
}

pub struct FieldCtx {
    p: u32,
    n: u32,
    q: u32,
    modulus: Vec<u32>,
    theta: FieldElement,
    tables: OnceLock<Tables>,
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldCtx")
            .field("p", &self.p)
            .field("n", &self.n)
            .field("modulus", &self.modulus)
            .field("theta", &self.theta)
            .finish()
    }
}

/// Squares and nonsquares of the multiplicative group.
#[derive(Clone, Debug)]
pub struct QuadChar {
    square: Vec<bool>,
}

impl QuadChar {
    pub fn is_square(&self, x: FieldElement) -> bool {
        self.square[x.0 as usize]
    }

    pub fn is_nonsquare(&self, x: FieldElement) -> bool {
        !x.is_zero() && !self.square[x.0 as usize]
    }

    pub fn squares(&self) -> impl Iterator<Item = FieldElement> + '_ {
        self.square
            .iter()
            .enumerate()
            .filter(|(_, s)| **s)
            .map(|(i, _)| FieldElement(i as u32))
    }

    pub fn nonsquares(&self) -> impl Iterator<Item = FieldElement> + '_ {
        self.square
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, s)| !**s)
            .map(|(i, _)| FieldElement(i as u32))
    }
}

pub fn is_prime(x: u64) -> bool {
    if x < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= x {
        if x % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub fn prime_factors(mut x: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= x {
        if x % d == 0 {
            out.push(d);
            while x % d == 0 {
                x /= d;
            }
        }
        d += 1;
    }
    if x > 1 {
        out.push(x);
    }
    out
}

/// Splits a prime power into (p, n); `None` if q is not a prime power.
pub fn prime_power(q: u64) -> Option<(u32, u32)> {
    let f = prime_factors(q);
    if f.len() != 1 {
        return None;
    }
    let p = f[0];
    let mut n = 0;
    let mut r = q;
    while r > 1 {
        r /= p;
        n += 1;
    }
    Some((p as u32, n))
}

// Polynomials over GF(p), coefficient vectors low degree first.
mod poly {
    pub fn trim(a: &mut Vec<u32>) {
        while a.last() == Some(&0) {
            a.pop();
        }
    }

    pub fn inv_mod(a: u32, p: u32) -> u32 {
        super::pow_mod(a as u64, (p - 2) as u64, p as u64) as u32
    }

    pub fn rem(a: &[u32], f: &[u32], p: u32) -> Vec<u32> {
        let mut r = a.to_vec();
        trim(&mut r);
        let df = f.len() - 1;
        let lead_inv = inv_mod(f[df], p) as u64;
        while r.len() > df {
            let top = r.len() - 1;
            let c = r[top] as u64 * lead_inv % p as u64;
            let shift = top - df;
            for (i, &fc) in f.iter().enumerate() {
                let sub = c * fc as u64 % p as u64;
                r[shift + i] = ((r[shift + i] as u64 + p as u64 - sub) % p as u64) as u32;
            }
            trim(&mut r);
        }
        r
    }

    pub fn mul_mod(a: &[u32], b: &[u32], f: &[u32], p: u32) -> Vec<u32> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut prod = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p as u64;
            }
        }
        let prod: Vec<u32> = prod.into_iter().map(|c| c as u32).collect();
        rem(&prod, f, p)
    }

    pub fn pow_mod(base: &[u32], mut e: u128, f: &[u32], p: u32) -> Vec<u32> {
        let mut result = vec![1u32];
        let mut b = rem(base, f, p);
        while e > 0 {
            if e & 1 == 1 {
                result = mul_mod(&result, &b, f, p);
            }
            b = mul_mod(&b, &b, f, p);
            e >>= 1;
        }
        result
    }

    pub fn gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        let mut x = a.to_vec();
        let mut y = b.to_vec();
        trim(&mut x);
        trim(&mut y);
        while !y.is_empty() {
            let r = rem(&x, &y, p);
            x = y;
            y = r;
        }
        x
    }

    pub fn sub(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        let len = a.len().max(b.len());
        let mut out: Vec<u32> = (0..len)
            .map(|i| {
                let x = a.get(i).copied().unwrap_or(0);
                let y = b.get(i).copied().unwrap_or(0);
                (x + p - y) % p
            })
            .collect();
        trim(&mut out);
        out
    }

    /// Ben-Or: f of degree n is irreducible iff gcd(f, x^(p^i) - x) = 1 for i <= n/2.
    pub fn is_irreducible(f: &[u32], p: u32) -> bool {
        let n = f.len() - 1;
        if n <= 1 {
            return n == 1;
        }
        let x = vec![0u32, 1];
        let mut h = x.clone();
        for _ in 1..=n / 2 {
            h = pow_mod(&h, p as u128, f, p);
            let g = gcd(f, &sub(&h, &x, p), p);
            if g.len() > 1 {
                return false;
            }
        }
        true
    }
}

pub(crate) fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = (r as u128 * b as u128 % m as u128) as u64;
        }
        b = (b as u128 * b as u128 % m as u128) as u64;
        e >>= 1;
    }
    r
}

/// Builds GF(p^n), choosing the lexicographically smallest monic irreducible
/// modulus (coefficients compared low degree first) when none is given.
pub fn make_field(p: u32, n: u32, modulus: Option<Vec<u32>>) -> Result<FieldCtx, FieldError> {
    make_field_with_ceiling(p, n, modulus, DEFAULT_FIELD_CEILING)
}

pub fn make_field_with_ceiling(
    p: u32,
    n: u32,
    modulus: Option<Vec<u32>>,
    ceiling: u64,
) -> Result<FieldCtx, FieldError> {
    if !is_prime(p as u64) {
        return Err(FieldError::NotPrime(p as u64));
    }
    if n == 0 {
        return Err(FieldError::BadModulus(n));
    }
    let order = (p as u128).checked_pow(n).unwrap_or(u128::MAX);
    if order > ceiling as u128 || order > u32::MAX as u128 {
        return Err(FieldError::TooLarge { order, ceiling });
    }
    let q = order as u32;
    let modulus = match modulus {
        Some(m) => {
            if m.len() != n as usize + 1 || m[n as usize] != 1 || m.iter().any(|&c| c >= p) {
                return Err(FieldError::BadModulus(n));
            }
            if !poly::is_irreducible(&m, p) {
                return Err(FieldError::Reducible);
            }
            m
        }
        None => smallest_irreducible(p, n),
    };
    let theta = find_primitive(p, n, q, &modulus);
    let ctx = FieldCtx {
        p,
        n,
        q,
        modulus,
        theta,
        tables: OnceLock::new(),
    };
    if q <= EAGER_TABLE_LIMIT {
        ctx.tables();
    }
    Ok(ctx)
}

fn smallest_irreducible(p: u32, n: u32) -> Vec<u32> {
    let count = (p as u64).pow(n);
    for k in 0..count {
        // c0 is the most significant digit of k.
        let mut f = vec![0u32; n as usize + 1];
        let mut r = k;
        for j in (0..n as usize).rev() {
            f[j] = (r % p as u64) as u32;
            r /= p as u64;
        }
        f[n as usize] = 1;
        if poly::is_irreducible(&f, p) {
            return f;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

fn decode(mut idx: u32, p: u32, n: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(n as usize);
    for _ in 0..n {
        out.push(idx % p);
        idx /= p;
    }
    out
}

fn encode(coeffs: &[u32], p: u32) -> u32 {
    coeffs.iter().rev().fold(0u32, |acc, &c| acc * p + c)
}

fn find_primitive(p: u32, n: u32, q: u32, modulus: &[u32]) -> FieldElement {
    if q == 2 {
        return FieldElement(1);
    }
    let order = (q - 1) as u128;
    let factors = prime_factors(q as u64 - 1);
    for idx in 1..q {
        let x = decode(idx, p, n);
        let ok = factors.iter().all(|&l| {
            let y = poly::pow_mod(&x, order / l as u128, modulus, p);
            y != [1]
        });
        if ok {
            return FieldElement(idx);
        }
    }
    unreachable!("the multiplicative group is cyclic")
}

impl FieldCtx {
    fn tables(&self) -> &Tables {
        self.tables.get_or_init(|| self.build_tables())
    }

    fn build_tables(&self) -> Tables {
        let (p, n, q) = (self.p, self.n, self.q);
        let m = (q - 1) as usize;
        let mut exp = vec![0u32; m];
        let mut log = vec![NO_LOG; q as usize];
        let theta = decode(self.theta.0, p, n);
        let mut cur = vec![1u32];
        for (k, slot) in exp.iter_mut().enumerate() {
            let mut c = cur.clone();
            c.resize(n as usize, 0);
            let idx = encode(&c, p);
            *slot = idx;
            log[idx as usize] = k as u32;
            cur = poly::mul_mod(&cur, &theta, &self.modulus, p);
        }
        let add_digits = |a: u32, b: u32| -> u32 {
            let (mut a, mut b) = (a, b);
            let mut out = 0u32;
            let mut place = 1u32;
            for _ in 0..n {
                out += ((a % p + b % p) % p) * place;
                a /= p;
                b /= p;
                place = place.wrapping_mul(p);
            }
            out
        };
        let zech = exp
            .iter()
            .map(|&x| {
                let s = add_digits(1, x);
                if s == 0 {
                    NO_LOG
                } else {
                    log[s as usize]
                }
            })
            .collect();
        let neg = (0..q)
            .map(|x| {
                let c: Vec<u32> = decode(x, p, n).iter().map(|&d| (p - d) % p).collect();
                encode(&c, p)
            })
            .collect();
        Tables {
            exp,
            log,
            zech,
            neg,
        }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn theta(&self) -> FieldElement {
        self.theta
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement::ZERO
    }

    pub fn one(&self) -> FieldElement {
        FieldElement::ONE
    }

    pub fn is_odd(&self) -> bool {
        self.p != 2
    }

    /// The element with enumeration index `idx`.
    pub fn element(&self, idx: u32) -> FieldElement {
        assert!(idx < self.q, "index {idx} outside GF({})", self.q);
        FieldElement(idx)
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElement> {
        (0..self.q).map(FieldElement)
    }

    pub fn nonzero_elements(&self) -> impl Iterator<Item = FieldElement> {
        (1..self.q).map(FieldElement)
    }

    pub fn coeffs(&self, x: FieldElement) -> Vec<u32> {
        decode(x.0, self.p, self.n)
    }

    pub fn from_coeffs(&self, coeffs: &[u32]) -> Result<FieldElement, FieldError> {
        if coeffs.len() != self.n as usize || coeffs.iter().any(|&c| c >= self.p) {
            return Err(FieldError::BadCoefficients);
        }
        Ok(FieldElement(encode(coeffs, self.p)))
    }

    /// Image of an integer in the prime field.
    pub fn from_int(&self, k: i64) -> FieldElement {
        FieldElement(k.rem_euclid(self.p as i64) as u32)
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if a.0 == 0 {
            return b;
        }
        if b.0 == 0 {
            return a;
        }
        let t = self.tables();
        let m = self.q - 1;
        let la = t.log[a.0 as usize];
        let lb = t.log[b.0 as usize];
        let k = if lb >= la { lb - la } else { lb + m - la };
        let z = t.zech[k as usize];
        if z == NO_LOG {
            return FieldElement::ZERO;
        }
        let s = la as u64 + z as u64;
        FieldElement(t.exp[(s % m as u64) as usize])
    }

    pub fn neg(&self, a: FieldElement) -> FieldElement {
        FieldElement(self.tables().neg[a.0 as usize])
    }

    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if a.0 == 0 || b.0 == 0 {
            return FieldElement::ZERO;
        }
        let t = self.tables();
        let s = t.log[a.0 as usize] as u64 + t.log[b.0 as usize] as u64;
        FieldElement(t.exp[(s % (self.q as u64 - 1)) as usize])
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement, FieldError> {
        if a.0 == 0 {
            return Err(FieldError::DivisionByZero);
        }
        let t = self.tables();
        let m = self.q - 1;
        let l = t.log[a.0 as usize];
        Ok(FieldElement(t.exp[((m - l) % m) as usize]))
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// Square-and-multiply; negative exponents go through the inverse.
    pub fn pow(&self, a: FieldElement, k: i64) -> Result<FieldElement, FieldError> {
        let base = if k < 0 { self.inv(a)? } else { a };
        let mut e = k.unsigned_abs();
        let mut b = base;
        let mut r = FieldElement::ONE;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        Ok(r)
    }

    pub fn arith(&self, a: FieldElement, b: FieldElement, op: FieldOp) -> Result<FieldElement, FieldError> {
        match op {
            FieldOp::Add => Ok(self.add(a, b)),
            FieldOp::Sub => Ok(self.sub(a, b)),
            FieldOp::Mul => Ok(self.mul(a, b)),
            FieldOp::Div => self.div(a, b),
            FieldOp::Pow(k) => self.pow(a, k),
            FieldOp::Inv => self.inv(a),
        }
    }

    /// Discrete log to base theta, `None` for zero.
    pub fn log(&self, a: FieldElement) -> Option<u32> {
        if a.0 == 0 {
            None
        } else {
            Some(self.tables().log[a.0 as usize])
        }
    }

    /// theta^k for any integer k.
    pub fn theta_pow(&self, k: i64) -> FieldElement {
        let m = self.q as i64 - 1;
        FieldElement(self.tables().exp[k.rem_euclid(m) as usize])
    }

    pub fn eta(&self, x: FieldElement) -> Result<i8, FieldError> {
        if !self.is_odd() {
            return Err(FieldError::EvenCharacteristic);
        }
        Ok(match self.log(x) {
            None => 0,
            Some(l) if l % 2 == 0 => 1,
            Some(_) => -1,
        })
    }

    pub fn is_square(&self, x: FieldElement) -> bool {
        match self.log(x) {
            None => true,
            Some(l) => !self.is_odd() || l % 2 == 0,
        }
    }

    pub fn quad_char(&self) -> QuadChar {
        let mut square = vec![false; self.q as usize];
        for x in self.nonzero_elements() {
            square[x.0 as usize] = self.is_square(x);
        }
        QuadChar { square }
    }

    /// x^(p^k); k is taken modulo n, so negative k gives the inverse automorphism.
    pub fn frobenius(&self, x: FieldElement, k: i64) -> FieldElement {
        let Some(l) = self.log(x) else {
            return x;
        };
        let k = k.rem_euclid(self.n as i64) as u64;
        let m = self.q as u64 - 1;
        let mult = pow_mod(self.p as u64, k, m);
        FieldElement(self.tables().exp[((l as u64 * mult) % m) as usize])
    }

    fn check_sub_degree(&self, m: u32) -> Result<(), FieldError> {
        if m == 0 || self.n % m != 0 {
            return Err(FieldError::NotSubfieldDegree { m, n: self.n });
        }
        Ok(())
    }

    /// True iff x lies in GF(p^m).
    pub fn in_subfield(&self, x: FieldElement, m: u32) -> bool {
        self.frobenius(x, m as i64) == x
    }

    pub fn subfield_elements(&self, m: u32) -> Result<Vec<FieldElement>, FieldError> {
        self.check_sub_degree(m)?;
        Ok(self.elements().filter(|&x| self.in_subfield(x, m)).collect())
    }

    /// A generator of GF(p^m)^*.
    pub fn subfield_primitive(&self, m: u32) -> Result<FieldElement, FieldError> {
        self.check_sub_degree(m)?;
        let sub = (self.p as i64).pow(m) - 1;
        Ok(self.theta_pow((self.q as i64 - 1) / sub))
    }

    pub fn trace_norm_rel(&self, x: FieldElement, m: u32) -> Result<(FieldElement, FieldElement), FieldError> {
        self.check_sub_degree(m)?;
        let mut trace = FieldElement::ZERO;
        let mut norm = FieldElement::ONE;
        for j in 0..self.n / m {
            let y = self.frobenius(x, (m * j) as i64);
            trace = self.add(trace, y);
            norm = self.mul(norm, y);
        }
        Ok((trace, norm))
    }

    /// Canonical solution of c - c^(p^m) = d: among the coset of solutions,
    /// the one whose coordinates on the non-pivot basis vectors vanish.
    #[allow(clippy::needless_range_loop)]
    pub fn hilbert90_additive(&self, d: FieldElement, m: u32) -> Result<FieldElement, FieldError> {
        let (tr, _) = self.trace_norm_rel(d, m)?;
        if !tr.is_zero() {
            return Err(FieldError::NonzeroTrace);
        }
        let (p, n) = (self.p, self.n as usize);
        // Column j is the image of the basis vector x^j.
        let mut rows = vec![vec![0u32; n + 1]; n];
        for j in 0..n {
            let mut ej = vec![0u32; n];
            ej[j] = 1;
            let e = self.from_coeffs(&ej)?;
            let img = self.coeffs(self.sub(e, self.frobenius(e, m as i64)));
            for (i, row) in rows.iter_mut().enumerate() {
                row[j] = img[i];
            }
        }
        for (i, c) in self.coeffs(d).into_iter().enumerate() {
            rows[i][n] = c;
        }
        let mut pivots = Vec::new();
        let mut r = 0;
        for col in 0..n {
            let Some(piv) = (r..n).find(|&i| rows[i][col] != 0) else {
                continue;
            };
            rows.swap(r, piv);
            let inv = poly::inv_mod(rows[r][col], p) as u64;
            for v in rows[r].iter_mut() {
                *v = (*v as u64 * inv % p as u64) as u32;
            }
            for i in 0..n {
                if i != r && rows[i][col] != 0 {
                    let f = rows[i][col] as u64;
                    for k in 0..=n {
                        let sub = f * rows[r][k] as u64 % p as u64;
                        rows[i][k] = ((rows[i][k] as u64 + p as u64 - sub) % p as u64) as u32;
                    }
                }
            }
            pivots.push(col);
            r += 1;
        }
        let mut c = vec![0u32; n];
        for (i, &col) in pivots.iter().enumerate() {
            c[col] = rows[i][n];
        }
        let sol = self.from_coeffs(&c)?;
        debug_assert_eq!(self.sub(sol, self.frobenius(sol, m as i64)), d);
        Ok(sol)
    }

    /// Smallest theta^j with theta^j / (theta^j)^(p^m) = d.
    pub fn hilbert90_multiplicative(&self, d: FieldElement, m: u32) -> Result<FieldElement, FieldError> {
        let (_, norm) = self.trace_norm_rel(d, m)?;
        if norm != FieldElement::ONE {
            return Err(FieldError::NonUnitNorm);
        }
        let big = self.q as u64 - 1;
        let g = (self.p as u64).pow(m) - 1;
        let k = self.log(d).expect("norm one is nonzero") as u64;
        let target = (big - k) % big;
        debug_assert_eq!(target % g, 0);
        let j = (target / g) % (big / g);
        Ok(self.theta_pow(j as i64))
    }

    /// m(t) = sum over x of eta(x(x-1)(x-t)); the Weil bound |m| <= 2 sqrt(q)
    /// is asserted on the way out.
    pub fn char_sum_cubic(&self, t: FieldElement) -> Result<i64, FieldError> {
        if !self.is_odd() {
            return Err(FieldError::EvenCharacteristic);
        }
        let one = self.one();
        let mut sum = 0i64;
        for x in self.elements() {
            let v = self.mul(self.mul(x, self.sub(x, one)), self.sub(x, t));
            sum += self.eta(v)? as i64;
        }
        assert!(
            (sum * sum) as u64 <= 4 * self.q as u64,
            "Weil bound violated: m = {sum}, q = {}",
            self.q
        );
        Ok(sum)
    }

    /// Number of squares x with x - 1 and x - t both nonsquares.
    pub fn feng_count(&self, t: FieldElement) -> Result<u64, FieldError> {
        if !self.is_odd() {
            return Err(FieldError::EvenCharacteristic);
        }
        if t.is_zero() || t == self.one() {
            return Err(FieldError::BadT);
        }
        let one = self.one();
        let mut count = 0;
        for x in self.nonzero_elements() {
            if self.eta(x)? == 1 && self.eta(self.sub(x, one))? == -1 && self.eta(self.sub(x, t))? == -1 {
                count += 1;
            }
        }
        Ok(count)
    }
}
