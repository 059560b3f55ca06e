//! Exact arithmetic in the tower `F_p ⊂ F_q ⊂ F_{q^m}` (`q = p^k`).
//!
//! The subfield `F_q` is kept structural rather than recovered through
//! Frobenius fixed points: hyperplanes are `F_q`-affine objects and need
//! native `F_q`-coordinates. `F_q` elements are dense indices `0..q`
//! (base-`p` digit vectors); `F_{q^m}` elements are length-`m` coefficient
//! vectors over `F_q` in the power basis of the extension modulus.
//!
//! Moduli and the generator are chosen deterministically: the
//! lexicographically smallest monic irreducible polynomial (high-degree
//! coefficient most significant, ascending as integers) and the first
//! primitive element in enumeration order. Identical `(p, k, m)` always
//! rebuild byte-identical contexts.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::ToPrimitive;

use crate::numtheory::{self, Factorization};
use crate::poly::{self, FieldArith};
use crate::{Error, Result};

/// Hard cap on `q^m` for context construction.
pub const CONTEXT_CAP: u64 = 1 << 27;
/// The discrete-log table is materialized only up to this many elements;
/// baby-step/giant-step takes over above (memory stays in the hundreds of MB).
pub const LOG_TABLE_CAP: u64 = 1 << 24;
/// `F_q` multiplication tables are built for extensions with q at most this.
const BASE_TABLE_CAP: u64 = 4096;

/// An element of `F_{q^m}`: `coeffs[i]` is the `F_q` index of the coefficient
/// of `x^i`. Always reduced, so equality is coefficient-vector equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldElement {
    coeffs: Vec<u32>,
}

impl FieldElement {
    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }
}

/// The base field `F_q = F_p[y]/(g)` with elements addressed by index.
#[derive(Debug)]
pub struct BaseField {
    p: u64,
    k: u32,
    q: u64,
    /// Monic irreducible of degree k over `F_p`; empty when k = 1.
    modulus: Vec<u64>,
    mul_table: Option<Vec<u32>>,
    add_table: Option<Vec<u32>>,
    neg_table: Option<Vec<u32>>,
    inv_table: Option<Vec<u32>>,
}

struct PrimeArith {
    p: u64,
}

impl FieldArith for PrimeArith {
    type E = u64;
    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        (a + b) % self.p
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        (a + self.p - b) % self.p
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 * *b as u128) % self.p as u128) as u64
    }
    fn inv(&self, a: &u64) -> Option<u64> {
        if *a == 0 {
            None
        } else {
            Some(modpow_u64(*a, self.p - 2, self.p))
        }
    }
    fn characteristic(&self) -> u64 {
        self.p
    }
    fn pth_root(&self, a: &u64) -> u64 {
        *a
    }
}

fn modpow_u64(mut base: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    base %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = (acc as u128 * base as u128 % p as u128) as u64;
        }
        base = (base as u128 * base as u128 % p as u128) as u64;
        e >>= 1;
    }
    acc
}

impl BaseField {
    fn new(p: u64, k: u32) -> Result<BaseField> {
        if !numtheory::is_prime_u64(p) {
            return Err(Error::invalid(format!("p = {p} is not prime")));
        }
        let q = p
            .checked_pow(k)
            .ok_or_else(|| Error::budget("p^k overflows u64"))?;
        let mut field = BaseField {
            p,
            k,
            q,
            modulus: Vec::new(),
            mul_table: None,
            add_table: None,
            neg_table: None,
            inv_table: None,
        };
        if k >= 2 {
            field.modulus = find_smallest_irreducible_prime(p, k)?;
            if q <= BASE_TABLE_CAP {
                field.build_tables();
            }
        }
        Ok(field)
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn k(&self) -> u32 {
        self.k
    }
    pub fn q(&self) -> u64 {
        self.q
    }
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    fn build_tables(&mut self) {
        let q = self.q as usize;
        let mut mul = vec![0u32; q * q];
        let mut add = vec![0u32; q * q];
        let mut neg = vec![0u32; q];
        let mut inv = vec![0u32; q];
        for a in 0..q as u64 {
            neg[a as usize] = self.neg_slow(a as u32);
            for b in a..q as u64 {
                let s = self.add_slow(a as u32, b as u32);
                let m = self.mul_slow(a as u32, b as u32);
                add[(a * q as u64 + b) as usize] = s;
                add[(b * q as u64 + a) as usize] = s;
                mul[(a * q as u64 + b) as usize] = m;
                mul[(b * q as u64 + a) as usize] = m;
            }
        }
        self.mul_table = Some(mul);
        self.add_table = Some(add);
        self.neg_table = Some(neg);
        // inverse by scanning the mul table rows
        for a in 1..q {
            for b in 1..q {
                if self.mul_table.as_ref().unwrap()[a * q + b] == 1 {
                    inv[a] = b as u32;
                    break;
                }
            }
        }
        self.inv_table = Some(inv);
    }

    fn digits(&self, idx: u32) -> Vec<u64> {
        let mut v = idx as u64;
        let mut out = Vec::with_capacity(self.k as usize);
        for _ in 0..self.k {
            out.push(v % self.p);
            v /= self.p;
        }
        out
    }

    fn digits_to_index(&self, d: &[u64]) -> u32 {
        let mut idx = 0u64;
        for &c in d.iter().rev() {
            idx = idx * self.p + c;
        }
        idx as u32
    }

    fn add_slow(&self, a: u32, b: u32) -> u32 {
        if self.k == 1 {
            return ((a as u64 + b as u64) % self.p) as u32;
        }
        let (da, db) = (self.digits(a), self.digits(b));
        let sum: Vec<u64> = da.iter().zip(&db).map(|(x, y)| (x + y) % self.p).collect();
        self.digits_to_index(&sum)
    }

    fn neg_slow(&self, a: u32) -> u32 {
        if self.k == 1 {
            return if a == 0 {
                0
            } else {
                (self.p - a as u64) as u32
            };
        }
        let da = self.digits(a);
        let neg: Vec<u64> = da.iter().map(|x| (self.p - x) % self.p).collect();
        self.digits_to_index(&neg)
    }

    fn mul_slow(&self, a: u32, b: u32) -> u32 {
        if self.k == 1 {
            return ((a as u64 * b as u64) % self.p) as u32;
        }
        let arith = PrimeArith { p: self.p };
        let pa = poly::trim(&arith, self.digits(a));
        let pb = poly::trim(&arith, self.digits(b));
        let prod = poly::mul(&arith, &pa, &pb);
        let r = poly::rem(&arith, &prod, &self.modulus);
        let mut digits = vec![0u64; self.k as usize];
        digits[..r.len()].copy_from_slice(&r);
        self.digits_to_index(&digits)
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        if self.k == 1 {
            ((a as u64 + b as u64) % self.p) as u32
        } else if let Some(t) = &self.add_table {
            t[(a as u64 * self.q + b as u64) as usize]
        } else {
            self.add_slow(a, b)
        }
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        if self.k == 1 {
            if a == 0 {
                0
            } else {
                (self.p - a as u64) as u32
            }
        } else if let Some(t) = &self.neg_table {
            t[a as usize]
        } else {
            self.neg_slow(a)
        }
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if self.k == 1 {
            (a as u64 * b as u64 % self.p) as u32
        } else if let Some(t) = &self.mul_table {
            t[(a as u64 * self.q + b as u64) as usize]
        } else {
            self.mul_slow(a, b)
        }
    }

    pub fn inv(&self, a: u32) -> Option<u32> {
        if a == 0 {
            return None;
        }
        if self.k == 1 {
            return Some(modpow_u64(a as u64, self.p - 2, self.p) as u32);
        }
        if let Some(t) = &self.inv_table {
            return Some(t[a as usize]);
        }
        // a^(q-2) in the small field
        let mut acc = 1u32;
        let mut base = a;
        let mut e = self.q - 2;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_slow(acc, base);
            }
            base = self.mul_slow(base, base);
            e >>= 1;
        }
        Some(acc)
    }
}

struct BaseArith<'a> {
    f: &'a BaseField,
}

impl FieldArith for BaseArith<'_> {
    type E = u32;
    fn zero(&self) -> u32 {
        0
    }
    fn one(&self) -> u32 {
        1
    }
    fn is_zero(&self, a: &u32) -> bool {
        *a == 0
    }
    fn add(&self, a: &u32, b: &u32) -> u32 {
        self.f.add(*a, *b)
    }
    fn sub(&self, a: &u32, b: &u32) -> u32 {
        self.f.sub(*a, *b)
    }
    fn mul(&self, a: &u32, b: &u32) -> u32 {
        self.f.mul(*a, *b)
    }
    fn inv(&self, a: &u32) -> Option<u32> {
        self.f.inv(*a)
    }
    fn characteristic(&self) -> u64 {
        self.f.p
    }
    fn pth_root(&self, a: &u32) -> u32 {
        // Frobenius inverse: a^(q/p) since a^q = a in F_q.
        let mut acc = 1u32;
        let mut base = *a;
        let mut e = self.f.q / self.f.p;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.f.mul(acc, base);
            }
            base = self.f.mul(base, base);
            e >>= 1;
        }
        acc
    }
}

fn find_smallest_irreducible_prime(p: u64, k: u32) -> Result<Vec<u64>> {
    let arith = PrimeArith { p };
    let count = p
        .checked_pow(k)
        .ok_or_else(|| Error::budget("p^k overflows u64"))?;
    for v in 0..count {
        let mut h = Vec::with_capacity(k as usize + 1);
        let mut t = v;
        for _ in 0..k {
            h.push(t % p);
            t /= p;
        }
        h.push(1);
        if poly::is_irreducible(&arith, &h, p) {
            return Ok(h);
        }
    }
    unreachable!("irreducible polynomial of degree {k} over F_{p} exists")
}

fn find_smallest_irreducible_ext(base: &BaseField, m: u32) -> Vec<u32> {
    let arith = BaseArith { f: base };
    let count = base.q.pow(m);
    for v in 0..count {
        let mut h: Vec<u32> = Vec::with_capacity(m as usize + 1);
        let mut t = v;
        for _ in 0..m {
            h.push((t % base.q) as u32);
            t /= base.q;
        }
        h.push(1);
        if poly::is_irreducible(&arith, &h, base.q) {
            return h;
        }
    }
    unreachable!(
        "irreducible polynomial of degree {m} over F_{} exists",
        base.q
    )
}

/// Immutable description of `F_{q^m}` as a tower over `F_p`, with a verified
/// generator and the factored group order. Construction is deterministic;
/// all element operations are pure given the context.
pub struct FieldContext {
    base: BaseField,
    m: u32,
    ext_modulus: Vec<u32>,
    /// `x^{m+i} mod h` for `i` in `0..m-1`.
    reduction: Vec<Vec<u32>>,
    generator: FieldElement,
    group_order: u64,
    qm: u64,
    order_factorization: Factorization,
    order_primes: Vec<u64>,
    /// `N / p_i` for each distinct prime, the primitivity test exponents.
    order_cofactors: Vec<u64>,
    log_table: Option<Vec<u32>>,
    unity: OnceLock<Arc<Vec<Complex64>>>,
}

impl std::fmt::Debug for FieldContext {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "FieldContext(p={}, k={}, m={})",
            self.base.p, self.base.k, self.m
        )
    }
}

/// Build the canonical context for `F_{(p^k)^m}`.
pub fn build_context(p: u64, k: u32, m: u32) -> Result<FieldContext> {
    if k < 1 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if m < 2 || (k * m) < 2 {
        return Err(Error::invalid(format!(
            "extension degree m = {m} must be at least 2"
        )));
    }
    let base = BaseField::new(p, k)?;
    let qm = base
        .q
        .checked_pow(m)
        .filter(|&v| v <= CONTEXT_CAP)
        .ok_or_else(|| Error::budget(format!("q^m = {}^{m} exceeds context cap 2^27", base.q)))?;
    let ext_modulus = find_smallest_irreducible_ext(&base, m);

    // reduction rows: x^{m+i} mod h
    let mm = m as usize;
    let mut reduction: Vec<Vec<u32>> = Vec::with_capacity(mm);
    let row0: Vec<u32> = (0..mm).map(|j| base.neg(ext_modulus[j])).collect();
    reduction.push(row0);
    for i in 1..mm {
        let prev = reduction[i - 1].clone();
        let mut row = vec![0u32; mm];
        // multiply by x: shift, then fold the x^m overflow through row 0
        let carry = prev[mm - 1];
        for j in (1..mm).rev() {
            row[j] = prev[j - 1];
        }
        row[0] = 0;
        if carry != 0 {
            for j in 0..mm {
                row[j] = base.add(row[j], base.mul(carry, reduction[0][j]));
            }
        }
        reduction.push(row);
    }

    let group_order = qm - 1;
    let order_factorization = numtheory::factor_power_minus_one(&BigUint::from(p), k * m);
    let order_primes: Vec<u64> = order_factorization
        .distinct_primes_u64()
        .expect("group order fits u64");
    let order_cofactors: Vec<u64> = order_primes.iter().map(|p| group_order / p).collect();

    let mut ctx = FieldContext {
        base,
        m,
        ext_modulus,
        reduction,
        generator: FieldElement {
            coeffs: vec![0; mm],
        },
        group_order,
        qm,
        order_factorization,
        order_primes,
        order_cofactors,
        log_table: None,
        unity: OnceLock::new(),
    };

    // first primitive element in enumeration order
    let mut generator = None;
    for v in 1..qm {
        let cand = ctx.element_from_index(v);
        if ctx.is_primitive(&cand)? {
            generator = Some(cand);
            break;
        }
    }
    ctx.generator = generator.expect("F_{q^m}^* is cyclic, a generator exists");

    if qm <= LOG_TABLE_CAP {
        let mut table = vec![u32::MAX; qm as usize];
        let mut acc = ctx.one();
        for j in 0..group_order {
            table[ctx.element_to_index(&acc) as usize] = j as u32;
            acc = ctx.mul(&acc, &ctx.generator.clone());
        }
        ctx.log_table = Some(table);
    }
    Ok(ctx)
}

impl FieldContext {
    pub fn base(&self) -> &BaseField {
        &self.base
    }
    pub fn p(&self) -> u64 {
        self.base.p
    }
    pub fn k(&self) -> u32 {
        self.base.k
    }
    pub fn q(&self) -> u64 {
        self.base.q
    }
    pub fn m(&self) -> u32 {
        self.m
    }
    pub fn qm(&self) -> u64 {
        self.qm
    }
    /// `N = q^m − 1`.
    pub fn group_order(&self) -> u64 {
        self.group_order
    }
    pub fn order_factorization(&self) -> &Factorization {
        &self.order_factorization
    }
    pub fn order_primes(&self) -> &[u64] {
        &self.order_primes
    }
    pub fn generator(&self) -> &FieldElement {
        &self.generator
    }
    pub fn ext_modulus(&self) -> &[u32] {
        &self.ext_modulus
    }
    pub fn has_log_table(&self) -> bool {
        self.log_table.is_some()
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement {
            coeffs: vec![0; self.m as usize],
        }
    }

    pub fn one(&self) -> FieldElement {
        self.embed_base(1)
    }

    /// The image of the `F_q` element with the given index.
    pub fn embed_base(&self, c: u32) -> FieldElement {
        assert!((c as u64) < self.base.q);
        let mut coeffs = vec![0; self.m as usize];
        coeffs[0] = c;
        FieldElement { coeffs }
    }

    /// The image of an integer through `F_p`.
    pub fn embed_int(&self, n: u64) -> FieldElement {
        self.embed_base((n % self.base.p) as u32)
    }

    /// The class of `x`, the extension's defining root.
    pub fn x(&self) -> FieldElement {
        let mut coeffs = vec![0; self.m as usize];
        coeffs[1] = 1;
        FieldElement { coeffs }
    }

    pub fn element_from_coeffs(&self, coeffs: Vec<u32>) -> Result<FieldElement> {
        if coeffs.len() != self.m as usize {
            return Err(Error::invalid(format!(
                "expected {} coefficients, got {}",
                self.m,
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|&c| c as u64 >= self.base.q) {
            return Err(Error::invalid("coefficient out of range for F_q"));
        }
        Ok(FieldElement { coeffs })
    }

    /// Canonical enumeration index: coefficient vector read as a base-q
    /// integer, degree-(m−1) digit most significant.
    pub fn element_to_index(&self, a: &FieldElement) -> u64 {
        let mut idx = 0u64;
        for &c in a.coeffs.iter().rev() {
            idx = idx * self.base.q + c as u64;
        }
        idx
    }

    pub fn element_from_index(&self, mut v: u64) -> FieldElement {
        assert!(v < self.qm);
        let mut coeffs = Vec::with_capacity(self.m as usize);
        for _ in 0..self.m {
            coeffs.push((v % self.base.q) as u32);
            v /= self.base.q;
        }
        FieldElement { coeffs }
    }

    pub fn is_zero(&self, a: &FieldElement) -> bool {
        a.coeffs.iter().all(|&c| c == 0)
    }

    pub fn add(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let coeffs = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(&x, &y)| self.base.add(x, y))
            .collect();
        FieldElement { coeffs }
    }

    pub fn sub(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let coeffs = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(&x, &y)| self.base.sub(x, y))
            .collect();
        FieldElement { coeffs }
    }

    pub fn neg(&self, a: &FieldElement) -> FieldElement {
        FieldElement {
            coeffs: a.coeffs.iter().map(|&x| self.base.neg(x)).collect(),
        }
    }

    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let mm = self.m as usize;
        let mut tmp = vec![0u32; 2 * mm - 1];
        for i in 0..mm {
            let ai = a.coeffs[i];
            if ai == 0 {
                continue;
            }
            for j in 0..mm {
                let bj = b.coeffs[j];
                if bj == 0 {
                    continue;
                }
                let t = self.base.mul(ai, bj);
                tmp[i + j] = self.base.add(tmp[i + j], t);
            }
        }
        let mut out = vec![0u32; mm];
        out.copy_from_slice(&tmp[..mm]);
        for i in 0..mm.saturating_sub(1) {
            let c = tmp[mm + i];
            if c == 0 {
                continue;
            }
            for j in 0..mm {
                let t = self.base.mul(c, self.reduction[i][j]);
                out[j] = self.base.add(out[j], t);
            }
        }
        FieldElement { coeffs: out }
    }

    pub fn mul_base(&self, a: &FieldElement, c: u32) -> FieldElement {
        FieldElement {
            coeffs: a.coeffs.iter().map(|&x| self.base.mul(x, c)).collect(),
        }
    }

    pub fn pow(&self, a: &FieldElement, mut e: u64) -> FieldElement {
        let mut acc = self.one();
        let mut base = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `inv(0)` is a reported error, never a value.
    pub fn inv(&self, a: &FieldElement) -> Result<FieldElement> {
        if self.is_zero(a) {
            return Err(Error::pre("inverse of zero requested"));
        }
        Ok(self.pow(a, self.group_order - 1))
    }

    /// Exact multiplicative order, by stripping primes from `N` while the
    /// power stays 1.
    pub fn element_order(&self, a: &FieldElement) -> Result<u64> {
        if self.is_zero(a) {
            return Err(Error::pre("order of zero requested"));
        }
        let mut o = self.group_order;
        for &p in &self.order_primes {
            while o.is_multiple_of(p) && self.is_zero(&self.sub(&self.pow(a, o / p), &self.one())) {
                o /= p;
            }
        }
        Ok(o)
    }

    /// `a` generates `F_{q^m}^*`: `a^{N/p_i} ≠ 1` for every prime `p_i | N`.
    pub fn is_primitive(&self, a: &FieldElement) -> Result<bool> {
        if self.is_zero(a) {
            return Err(Error::pre("is_primitive(0) requested"));
        }
        let one = self.one();
        for &cof in &self.order_cofactors {
            if self.pow(a, cof) == one {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `a` is e-free: for every prime `r | e`, `a` is not an `r`-th power,
    /// tested as `a^{N/r} ≠ 1`.
    pub fn is_efree(&self, a: &FieldElement, e: u64) -> Result<bool> {
        if self.is_zero(a) {
            return Err(Error::pre("is_efree(0) requested"));
        }
        if e == 0 || !self.group_order.is_multiple_of(e) {
            return Err(Error::pre(format!(
                "e = {e} does not divide N = {}",
                self.group_order
            )));
        }
        let one = self.one();
        for (&r, &cof) in self.order_primes.iter().zip(&self.order_cofactors) {
            if e.is_multiple_of(r) && self.pow(a, cof) == one {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Discrete log base the canonical generator, via the precomputed table
    /// when present and baby-step/giant-step otherwise.
    pub fn discrete_log(&self, a: &FieldElement) -> Result<u64> {
        if self.is_zero(a) {
            return Err(Error::pre("discrete_log(0) requested"));
        }
        if let Some(table) = &self.log_table {
            let j = table[self.element_to_index(a) as usize];
            debug_assert_ne!(j, u32::MAX);
            return Ok(j as u64);
        }
        // baby-step giant-step
        let n = self.group_order;
        let step = (n as f64).sqrt().ceil() as u64;
        let mut baby: HashMap<u64, u64> = HashMap::with_capacity(step as usize);
        let mut acc = self.one();
        for j in 0..step {
            baby.entry(self.element_to_index(&acc)).or_insert(j);
            acc = self.mul(&acc, &self.generator);
        }
        let giant = self.inv(&self.pow(&self.generator, step))?;
        let mut cur = a.clone();
        for i in 0..=step {
            if let Some(&j) = baby.get(&self.element_to_index(&cur)) {
                return Ok((i * step + j) % n);
            }
            cur = self.mul(&cur, &giant);
        }
        unreachable!("BSGS covers the whole group")
    }

    /// Iterate all `q^m` elements in canonical enumeration order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.qm).map(move |v| self.element_from_index(v))
    }

    /// Shared roots-of-unity table `ω^j = exp(2πi·j/N)`, built once per
    /// context on first use; the exact angle is evaluated per entry so no
    /// phase drift accumulates.
    pub fn unity_table(&self) -> Arc<Vec<Complex64>> {
        self.unity
            .get_or_init(|| {
                let n = self.group_order;
                let mut v = Vec::with_capacity(n as usize);
                for j in 0..n {
                    let angle = 2.0 * std::f64::consts::PI * (j as f64) / (n as f64);
                    v.push(Complex64::new(angle.cos(), angle.sin()));
                }
                Arc::new(v)
            })
            .clone()
    }

    /// Canonical text form for reproducibility assertions and witness replay.
    pub fn summary(&self) -> String {
        let fmt_u64 = |v: &[u64]| {
            let items: Vec<String> = v.iter().map(|c| c.to_string()).collect();
            format!("[{}]", items.join(","))
        };
        let fmt_u32 = |v: &[u32]| {
            let items: Vec<String> = v.iter().map(|c| c.to_string()).collect();
            format!("[{}]", items.join(","))
        };
        format!(
            "p={} k={} m={} base_modulus={} ext_modulus={} generator={} group_order={}",
            self.base.p,
            self.base.k,
            self.m,
            fmt_u64(&self.base.modulus),
            fmt_u32(&self.ext_modulus),
            fmt_u32(&self.generator.coeffs),
            self.group_order
        )
    }

    /// Polynomial-style rendering of an element, coefficients as `F_q` indices.
    pub fn render(&self, a: &FieldElement) -> String {
        let mut parts = Vec::new();
        for (i, &c) in a.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let term = match (i, c) {
                (0, c) => format!("{c}"),
                (1, 1) => "x".to_string(),
                (1, c) => format!("{c}*x"),
                (i, 1) => format!("x^{i}"),
                (i, c) => format!("{c}*x^{i}"),
            };
            parts.push(term);
        }
        if parts.is_empty() {
            "0".to_string()
        } else {
            parts.join(" + ")
        }
    }

    pub(crate) fn arith(&self) -> ExtArith<'_> {
        ExtArith { ctx: self }
    }
}

/// [`FieldArith`] view of `F_{q^m}` for the polynomial algorithms.
pub(crate) struct ExtArith<'a> {
    pub ctx: &'a FieldContext,
}

impl FieldArith for ExtArith<'_> {
    type E = FieldElement;
    fn zero(&self) -> FieldElement {
        self.ctx.zero()
    }
    fn one(&self) -> FieldElement {
        self.ctx.one()
    }
    fn is_zero(&self, a: &FieldElement) -> bool {
        self.ctx.is_zero(a)
    }
    fn add(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        self.ctx.add(a, b)
    }
    fn sub(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        self.ctx.sub(a, b)
    }
    fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        self.ctx.mul(a, b)
    }
    fn inv(&self, a: &FieldElement) -> Option<FieldElement> {
        self.ctx.inv(a).ok()
    }
    fn characteristic(&self) -> u64 {
        self.ctx.p()
    }
    fn pth_root(&self, a: &FieldElement) -> FieldElement {
        // inverse Frobenius: a^(q^m / p)
        self.ctx.pow(a, self.ctx.qm() / self.ctx.p())
    }
}

pub fn factorization_to_u64(f: &Factorization) -> Option<u64> {
    f.n.to_u64()
}
