//! Dense polynomial arithmetic over an abstract coefficient field.
//!
//! Shared by modulus selection (coefficients in `F_p` or `F_q`), the Rabin
//! irreducibility test, and the squarefree / power-freeness machinery over
//! `F_{q^m}`. Coefficients are ascending, and every function returns trimmed
//! vectors (no trailing zeros).

/// The handful of field operations the polynomial algorithms need. The
/// implementor is the field description itself, not the element.
pub(crate) trait FieldArith {
    type E: Clone + PartialEq + std::fmt::Debug;
    fn zero(&self) -> Self::E;
    fn one(&self) -> Self::E;
    fn is_zero(&self, a: &Self::E) -> bool;
    fn add(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn sub(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn mul(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn inv(&self, a: &Self::E) -> Option<Self::E>;
    /// Characteristic, for the derivative and p-th-root steps.
    fn characteristic(&self) -> u64;
    /// `a^(1/p)`; exists and is unique over the finite fields used here.
    fn pth_root(&self, a: &Self::E) -> Self::E;
}

pub(crate) type Poly<E> = Vec<E>;

pub(crate) fn trim<F: FieldArith>(f: &F, mut p: Poly<F::E>) -> Poly<F::E> {
    while let Some(last) = p.last() {
        if f.is_zero(last) {
            p.pop();
        } else {
            break;
        }
    }
    p
}

pub(crate) fn degree<E>(p: &Poly<E>) -> Option<usize> {
    if p.is_empty() {
        None
    } else {
        Some(p.len() - 1)
    }
}

pub(crate) fn mul<F: FieldArith>(f: &F, a: &Poly<F::E>, b: &Poly<F::E>) -> Poly<F::E> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![f.zero(); a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        if f.is_zero(ai) {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            let t = f.mul(ai, bj);
            out[i + j] = f.add(&out[i + j], &t);
        }
    }
    trim(f, out)
}

pub(crate) fn scale<F: FieldArith>(f: &F, a: &Poly<F::E>, c: &F::E) -> Poly<F::E> {
    trim(f, a.iter().map(|x| f.mul(x, c)).collect())
}

pub(crate) fn make_monic<F: FieldArith>(f: &F, a: &Poly<F::E>) -> Poly<F::E> {
    match a.last() {
        None => Vec::new(),
        Some(lead) => {
            let inv = f.inv(lead).expect("leading coefficient must be invertible");
            scale(f, a, &inv)
        }
    }
}

/// Remainder of `a` divided by `b` (`b` nonzero).
pub(crate) fn rem<F: FieldArith>(f: &F, a: &Poly<F::E>, b: &Poly<F::E>) -> Poly<F::E> {
    let db = degree(b).expect("division by zero polynomial");
    let lead_inv = f
        .inv(b.last().unwrap())
        .expect("leading coefficient not invertible");
    let mut r = a.clone();
    while let Some(dr) = degree(&r) {
        if dr < db {
            break;
        }
        let c = f.mul(r.last().unwrap(), &lead_inv);
        let shift = dr - db;
        for (j, bj) in b.iter().enumerate() {
            let t = f.mul(&c, bj);
            r[shift + j] = f.sub(&r[shift + j], &t);
        }
        r = trim(f, r);
    }
    r
}

pub(crate) fn div_exact<F: FieldArith>(f: &F, a: &Poly<F::E>, b: &Poly<F::E>) -> Poly<F::E> {
    let db = degree(b).expect("division by zero polynomial");
    let da = match degree(a) {
        None => return Vec::new(),
        Some(d) => d,
    };
    assert!(da >= db, "div_exact degree underflow");
    let lead_inv = f
        .inv(b.last().unwrap())
        .expect("leading coefficient not invertible");
    let mut r = a.clone();
    let mut q = vec![f.zero(); da - db + 1];
    while let Some(dr) = degree(&r) {
        if dr < db {
            break;
        }
        let c = f.mul(r.last().unwrap(), &lead_inv);
        let shift = dr - db;
        q[shift] = c.clone();
        for (j, bj) in b.iter().enumerate() {
            let t = f.mul(&c, bj);
            r[shift + j] = f.sub(&r[shift + j], &t);
        }
        r = trim(f, r);
    }
    debug_assert!(r.is_empty(), "div_exact had a remainder");
    trim(f, q)
}

/// Monic gcd.
pub(crate) fn gcd<F: FieldArith>(f: &F, a: &Poly<F::E>, b: &Poly<F::E>) -> Poly<F::E> {
    let mut a = trim(f, a.clone());
    let mut b = trim(f, b.clone());
    while !b.is_empty() {
        let r = rem(f, &a, &b);
        a = b;
        b = r;
    }
    if a.is_empty() {
        a
    } else {
        make_monic(f, &a)
    }
}

pub(crate) fn derivative<F: FieldArith>(f: &F, a: &Poly<F::E>) -> Poly<F::E> {
    if a.len() <= 1 {
        return Vec::new();
    }
    let p = f.characteristic();
    let mut out = Vec::with_capacity(a.len() - 1);
    for (i, c) in a.iter().enumerate().skip(1) {
        let k = (i as u64) % p;
        let mut acc = f.zero();
        for _ in 0..k {
            acc = f.add(&acc, c);
        }
        out.push(acc);
    }
    trim(f, out)
}

pub(crate) fn eval<F: FieldArith>(f: &F, a: &Poly<F::E>, x: &F::E) -> F::E {
    let mut acc = f.zero();
    for c in a.iter().rev() {
        acc = f.mul(&acc, x);
        acc = f.add(&acc, c);
    }
    acc
}

/// `x^e mod h` by square-and-multiply.
pub(crate) fn pow_x_mod<F: FieldArith>(f: &F, e: u64, h: &Poly<F::E>) -> Poly<F::E> {
    let x = trim(f, vec![f.zero(), f.one()]);
    pow_mod(f, &x, e, h)
}

pub(crate) fn pow_mod<F: FieldArith>(
    f: &F,
    base: &Poly<F::E>,
    mut e: u64,
    h: &Poly<F::E>,
) -> Poly<F::E> {
    let mut result = vec![f.one()];
    let mut base = rem(f, base, h);
    while e > 0 {
        if e & 1 == 1 {
            result = rem(f, &mul(f, &result, &base), h);
        }
        base = rem(f, &mul(f, &base, &base), h);
        e >>= 1;
    }
    result
}

/// Rabin irreducibility test for a monic polynomial of degree `d` over a
/// field of `field_size` elements: `x^{Q^d} ≡ x (mod h)` and
/// `gcd(x^{Q^{d/r}} − x, h) = 1` for every prime `r | d`.
pub(crate) fn is_irreducible<F: FieldArith>(f: &F, h: &Poly<F::E>, field_size: u64) -> bool {
    let d = match degree(h) {
        None | Some(0) => return false,
        Some(d) => d as u64,
    };
    if d == 1 {
        return true;
    }
    let x = trim(f, vec![f.zero(), f.one()]);
    for r in crate::numtheory::factorize_u64(d)
        .distinct_primes_u64()
        .expect("degree fits u64")
    {
        let e = field_size.pow((d / r) as u32);
        let xe = pow_x_mod(f, e, h);
        let g = gcd(f, &add_neg(f, &xe, &x), h);
        if degree(&g) != Some(0) && !g.is_empty() {
            return false;
        }
    }
    let e = field_size.pow(d as u32);
    let xe = pow_x_mod(f, e, h);
    add_neg(f, &xe, &x).is_empty()
}

fn add_neg<F: FieldArith>(f: &F, a: &Poly<F::E>, b: &Poly<F::E>) -> Poly<F::E> {
    let n = a.len().max(b.len());
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let x = a.get(i).cloned().unwrap_or_else(|| f.zero());
        let y = b.get(i).cloned().unwrap_or_else(|| f.zero());
        out.push(f.sub(&x, &y));
    }
    trim(f, out)
}

/// Squarefree decomposition in characteristic `p` over a perfect field:
/// returns pairwise-coprime squarefree `(s_i, m_i)` with `a = lc · Π s_i^{m_i}`.
pub(crate) fn squarefree_decomposition<F: FieldArith>(
    f: &F,
    a: &Poly<F::E>,
) -> Vec<(Poly<F::E>, u64)> {
    let a = make_monic(f, &trim(f, a.clone()));
    let mut out = Vec::new();
    decompose_into(f, &a, 1, &mut out);
    out
}

fn decompose_into<F: FieldArith>(
    f: &F,
    a: &Poly<F::E>,
    mult: u64,
    out: &mut Vec<(Poly<F::E>, u64)>,
) {
    if degree(a).is_none_or(|d| d == 0) {
        return;
    }
    let da = derivative(f, a);
    if da.is_empty() {
        // a = v(x^p); take p-th roots of the surviving coefficients.
        let p = f.characteristic() as usize;
        let mut v = Vec::new();
        for (i, c) in a.iter().enumerate() {
            if i % p == 0 {
                v.push(f.pth_root(c));
            } else {
                debug_assert!(f.is_zero(c));
            }
        }
        decompose_into(f, &trim(f, v), mult * f.characteristic(), out);
        return;
    }
    let mut c = gcd(f, a, &da);
    let mut w = div_exact(f, a, &c);
    let mut i = 1u64;
    while degree(&w).is_some_and(|d| d > 0) {
        let y = gcd(f, &w, &c);
        let z = div_exact(f, &w, &y);
        if degree(&z).is_some_and(|d| d > 0) {
            out.push((z, mult * i));
        }
        i += 1;
        w = y.clone();
        c = div_exact(f, &c, &y);
    }
    if degree(&c).is_some_and(|d| d > 0) {
        // Remaining part is a p-th power.
        decompose_into(f, &c, mult, out);
    }
}
