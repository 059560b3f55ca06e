//! Multiplicative characters of `F_{q^m}^*` and the character-sum side of the
//! counting argument: the characteristic functions `Γ` (primitive) and `ρ_e`
//! (e-free), exact-formula pair counting over `S_c^*`, and numerical audits
//! of every bound the sufficient conditions rest on (see [`audits`]).
//!
//! A character is addressed by its exponent `t`: `χ_t(γ^j) = exp(2πi·t·j/N)`
//! against the canonical generator `γ`. Every character, including the
//! principal one, takes the value 0 at the zero element; with that convention
//! the formula counts and the brute-force counts agree verbatim.
//!
//! Sums run in double-precision complex arithmetic with Kahan-compensated
//! accumulation; divisor-sum weights are assembled as exact rationals and
//! converted once at the boundary.

pub mod audits;

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::finitefield::{FieldContext, FieldElement};
use crate::hyperplane::HyperplaneSystem;
use crate::numtheory::{self, SquarefreeDivisor};
use crate::{Error, Result};

/// A multiplicative character of `F_{q^m}^*`, addressed by an exponent in
/// `[0, N)`. Its order is `N / gcd(N, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Character {
    pub exponent: u64,
}

impl Character {
    pub fn new(ctx: &FieldContext, exponent: u64) -> Result<Character> {
        if exponent >= ctx.group_order() {
            return Err(Error::invalid(format!(
                "character exponent {exponent} out of range [0, {})",
                ctx.group_order()
            )));
        }
        Ok(Character { exponent })
    }

    pub fn principal() -> Character {
        Character { exponent: 0 }
    }

    pub fn is_principal(&self) -> bool {
        self.exponent == 0
    }

    pub fn order(&self, ctx: &FieldContext) -> u64 {
        let n = ctx.group_order();
        n / num_integer::gcd(n, self.exponent)
    }
}

/// All characters of exact order `d` (there are `φ(d)` of them).
pub fn characters_of_order(ctx: &FieldContext, d: u64) -> Result<Vec<Character>> {
    let n = ctx.group_order();
    if d == 0 || !n.is_multiple_of(d) {
        return Err(Error::pre(format!("order {d} does not divide N = {n}")));
    }
    let step = n / d;
    Ok((0..d)
        .filter(|&u| num_integer::gcd(u, d) == 1 || d == 1)
        .filter(|&u| d == 1 || u > 0)
        .map(|u| Character { exponent: step * u })
        .collect())
}

/// `χ(a)`: a root of unity for nonzero `a`, exactly 0 at `a = 0`.
pub fn char_eval(ctx: &FieldContext, chi: Character, a: &FieldElement) -> Complex64 {
    if ctx.is_zero(a) {
        return Complex64::new(0.0, 0.0);
    }
    let j = ctx.discrete_log(a).expect("nonzero element has a log");
    let table = ctx.unity_table();
    table[((chi.exponent % ctx.group_order()) as u128 * j as u128 % ctx.group_order() as u128)
        as usize]
}

/// Kahan-compensated complex accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct KahanComplex {
    sum_re: f64,
    sum_im: f64,
    c_re: f64,
    c_im: f64,
}

impl KahanComplex {
    pub fn add(&mut self, v: Complex64) {
        let y = v.re - self.c_re;
        let t = self.sum_re + y;
        self.c_re = (t - self.sum_re) - y;
        self.sum_re = t;
        let y = v.im - self.c_im;
        let t = self.sum_im + y;
        self.c_im = (t - self.sum_im) - y;
        self.sum_im = t;
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.sum_re, self.sum_im)
    }
}

fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().expect("rational fits f64")
}

/// Exact weight `θ(n)` of the divisor expansion, as a rational.
fn theta_u64(n: u64) -> BigRational {
    numtheory::theta(&BigUint::from(n))
}

/// Inner character sum `Σ_{χ of order d} χ(γ^j)`, via the unity table.
fn order_sum(ctx: &FieldContext, sd: &SquarefreeDivisor, j: u64) -> Complex64 {
    let n = ctx.group_order();
    let table = ctx.unity_table();
    let step = n / sd.d;
    let mut acc = KahanComplex::default();
    if sd.d == 1 {
        return Complex64::new(1.0, 0.0);
    }
    for u in 1..sd.d {
        if num_integer::gcd(u, sd.d) != 1 {
            continue;
        }
        let idx = (step as u128 * u as u128 % n as u128) as u64;
        acc.add(table[((idx as u128 * j as u128) % n as u128) as usize]);
    }
    acc.value()
}

/// The characteristic function of primitive elements,
/// `Γ(a) = θ(N)·Σ_{d|N} (μ(d)/φ(d)) Σ_{χ_d} χ_d(a)`; evaluates within 1e-9
/// of 0 or 1 for nonzero `a`.
pub fn gamma_primitive(ctx: &FieldContext, a: &FieldElement) -> Result<f64> {
    rho_efree(ctx, a, ctx.group_order())
}

/// The characteristic function of e-free elements,
/// `ρ_e(a) = θ(e)·Σ_{d|e} (μ(d)/φ(d)) Σ_{χ_d} χ_d(a)`.
pub fn rho_efree(ctx: &FieldContext, a: &FieldElement, e: u64) -> Result<f64> {
    if ctx.is_zero(a) {
        return Err(Error::pre("characteristic function undefined at 0"));
    }
    if e == 0 || !ctx.group_order().is_multiple_of(e) {
        return Err(Error::pre(format!(
            "e = {e} does not divide N = {}",
            ctx.group_order()
        )));
    }
    let j = ctx.discrete_log(a)?;
    let e_primes: Vec<u64> = ctx
        .order_primes()
        .iter()
        .copied()
        .filter(|p| e.is_multiple_of(*p))
        .collect();
    let theta_e = theta_u64(e);
    let mut acc = KahanComplex::default();
    for sd in numtheory::squarefree_divisors(&e_primes) {
        let weight = &theta_e * BigRational::new(BigInt::from(sd.mobius), BigInt::from(sd.phi));
        let w = ratio_to_f64(&weight);
        let inner = order_sum(ctx, &sd, j);
        acc.add(inner * w);
    }
    Ok(acc.value().re)
}

/// A quadratic `ax² + bx + c` with `a ≠ 0` and `b² ≠ 4ac` (in characteristic
/// 2 the latter reads `b ≠ 0`), so it is separable with two distinct roots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quadratic {
    pub a: FieldElement,
    pub b: FieldElement,
    pub c: FieldElement,
}

impl Quadratic {
    pub fn new(
        ctx: &FieldContext,
        a: FieldElement,
        b: FieldElement,
        c: FieldElement,
    ) -> Result<Quadratic> {
        if ctx.is_zero(&a) {
            return Err(Error::pre("quadratic requires a != 0"));
        }
        let b2 = ctx.mul(&b, &b);
        let ac = ctx.mul(&a, &c);
        let four_ac = ctx.mul(&ctx.embed_int(4), &ac);
        if b2 == four_ac {
            return Err(Error::pre("quadratic requires b^2 != 4ac"));
        }
        Ok(Quadratic { a, b, c })
    }

    /// The default quadratic `x² + x + c₀`: `c₀` is the first constant in
    /// enumeration order keeping the discriminant nonzero and the value at
    /// 0 and −1 nonzero (so it stays coprime to the linear test polynomials).
    pub fn default_for(ctx: &FieldContext) -> Quadratic {
        let one = ctx.one();
        for idx in 1..ctx.q() as u32 {
            let c = ctx.embed_base(idx);
            if let Ok(f) = Quadratic::new(ctx, one.clone(), one.clone(), c) {
                return f;
            }
        }
        unreachable!("a valid default quadratic exists for q >= 2")
    }

    pub fn eval(&self, ctx: &FieldContext, x: &FieldElement) -> FieldElement {
        let x2 = ctx.mul(x, x);
        let mut acc = ctx.mul(&self.a, &x2);
        acc = ctx.add(&acc, &ctx.mul(&self.b, x));
        ctx.add(&acc, &self.c)
    }

    pub fn coeff_vec(&self) -> Vec<&FieldElement> {
        vec![&self.c, &self.b, &self.a]
    }

    pub fn render(&self, ctx: &FieldContext) -> String {
        format!(
            "({})*x^2 + ({})*x + ({})",
            ctx.render(&self.a),
            ctx.render(&self.b),
            ctx.render(&self.c)
        )
    }
}

/// Result of a formula-side pair count.
#[derive(Debug, Clone)]
pub struct PairCountFormula {
    /// The raw character-sum value (should sit within tolerance of an integer).
    pub value: f64,
    /// Distance to the nearest integer.
    pub residual: f64,
    pub rounded: i64,
    /// Number of `λ ∈ S_c^*` with `f(λ) = 0`; such terms contribute 0 by the
    /// `χ(0) = 0` convention and are surfaced separately.
    pub zero_f_count: u64,
}

/// `P(d₁, d₂)` by the character formula:
/// `θ(d₁)θ(d₂) Σ_{e₁|d₁, e₂|d₂} (μ(e₁)μ(e₂)/φ(e₁)φ(e₂)) Σ_{χ_{e₁},χ_{e₂}} Σ_{λ∈S_c^*} χ_{e₁}(λ)χ_{e₂}(f(λ))`.
pub fn count_pairs_formula(
    ctx: &FieldContext,
    sys: &HyperplaneSystem,
    f: &Quadratic,
    d1: u64,
    d2: u64,
) -> Result<PairCountFormula> {
    let n = ctx.group_order();
    for d in [d1, d2] {
        if d == 0 || !n.is_multiple_of(d) {
            return Err(Error::pre(format!("d = {d} does not divide N = {n}")));
        }
    }
    // Discrete logs of λ and f(λ) for every λ in S_c^*; None encodes a zero
    // argument, which contributes nothing to any character sum.
    let mut logs: Vec<(Option<u64>, Option<u64>)> = Vec::new();
    let mut zero_f_count = 0u64;
    for lam in sys.avoiding_iter(ctx) {
        let j1 = if ctx.is_zero(&lam) {
            None
        } else {
            Some(ctx.discrete_log(&lam)?)
        };
        let fv = f.eval(ctx, &lam);
        let j2 = if ctx.is_zero(&fv) {
            zero_f_count += 1;
            None
        } else {
            Some(ctx.discrete_log(&fv)?)
        };
        logs.push((j1, j2));
    }

    let primes_of = |d: u64| -> Vec<u64> {
        ctx.order_primes()
            .iter()
            .copied()
            .filter(|p| d.is_multiple_of(*p))
            .collect()
    };
    let divs1 = numtheory::squarefree_divisors(&primes_of(d1));
    let divs2 = numtheory::squarefree_divisors(&primes_of(d2));

    // Per-λ inner sums Σ_{χ of order e} χ(·), cached per squarefree divisor.
    let inner1: Vec<Vec<Complex64>> = divs1
        .iter()
        .map(|sd| {
            logs.iter()
                .map(|(j1, _)| match j1 {
                    Some(j) => order_sum(ctx, sd, *j),
                    None => Complex64::new(0.0, 0.0),
                })
                .collect()
        })
        .collect();
    let inner2: Vec<Vec<Complex64>> = divs2
        .iter()
        .map(|sd| {
            logs.iter()
                .map(|(_, j2)| match j2 {
                    Some(j) => order_sum(ctx, sd, *j),
                    None => Complex64::new(0.0, 0.0),
                })
                .collect()
        })
        .collect();

    let theta_w = theta_u64(d1) * theta_u64(d2);
    let mut total = KahanComplex::default();
    for (i1, sd1) in divs1.iter().enumerate() {
        for (i2, sd2) in divs2.iter().enumerate() {
            let weight = &theta_w
                * BigRational::new(
                    BigInt::from(sd1.mobius * sd2.mobius),
                    BigInt::from(sd1.phi) * BigInt::from(sd2.phi),
                );
            let w = ratio_to_f64(&weight);
            let mut lam_sum = KahanComplex::default();
            for (a, b) in inner1[i1].iter().zip(&inner2[i2]) {
                lam_sum.add(a * b);
            }
            total.add(lam_sum.value() * w);
        }
    }
    let value = total.value().re;
    let rounded = value.round() as i64;
    Ok(PairCountFormula {
        value,
        residual: (value - rounded as f64).abs(),
        rounded,
        zero_f_count,
    })
}

/// Power-freeness verdict for `Π gᵢ^{nᵢ}` against exponent `e`, with the
/// certificate: either a squarefree factor of multiplicity not divisible by
/// `e`, or the explicit decomposition `y·H(x)^e`.
#[derive(Debug, Clone)]
pub enum PowerFreeness {
    /// Not of the form `y·H(x)^e`: some root multiplicity survives mod `e`.
    Free {
        witness: Vec<FieldElement>,
        multiplicity: u64,
    },
    /// The product is a constant, trivially `y·1^e`.
    ConstantPower { scalar: FieldElement },
    /// The product equals `scalar·h(x)^e`.
    Power {
        scalar: FieldElement,
        h: Vec<FieldElement>,
    },
}

impl PowerFreeness {
    pub fn is_free(&self) -> bool {
        matches!(self, PowerFreeness::Free { .. })
    }
}

/// Decide whether `Π gᵢ^{nᵢ}` avoids the form `y·H(x)^e`, by reducing every
/// root multiplicity of the product modulo `e` over a gcd-free squarefree
/// basis.
pub fn is_power_free(
    ctx: &FieldContext,
    parts: &[(Vec<FieldElement>, u64)],
    e: u64,
) -> Result<PowerFreeness> {
    if e == 0 {
        return Err(Error::pre("power-freeness exponent must be positive"));
    }
    let arith = ctx.arith();
    let mut scalar = ctx.one();
    // (squarefree poly, total multiplicity), pairwise coprime
    let mut atoms: Vec<(Vec<FieldElement>, u64)> = Vec::new();
    for (g, nexp) in parts {
        let g = crate::poly::trim(&arith, g.clone());
        if g.is_empty() {
            return Err(Error::pre("zero polynomial in power-freeness check"));
        }
        if *nexp == 0 {
            continue;
        }
        scalar = ctx.mul(&scalar, &ctx.pow(g.last().unwrap(), *nexp));
        if g.len() == 1 {
            continue;
        }
        for (s, mult) in crate::poly::squarefree_decomposition(&arith, &g) {
            insert_atom(
                ctx,
                &mut atoms,
                s,
                mult.checked_mul(*nexp).expect("multiplicity overflow"),
            );
        }
    }
    if atoms.is_empty() {
        return Ok(PowerFreeness::ConstantPower { scalar });
    }
    for (atom, mult) in &atoms {
        if mult % e != 0 {
            return Ok(PowerFreeness::Free {
                witness: atom.clone(),
                multiplicity: *mult,
            });
        }
    }
    let mut h = vec![ctx.one()];
    for (atom, mult) in &atoms {
        for _ in 0..(mult / e) {
            h = crate::poly::mul(&arith, &h, atom);
        }
    }
    Ok(PowerFreeness::Power { scalar, h })
}

/// Insert a squarefree polynomial into a pairwise-coprime basis, splitting
/// common parts and accumulating multiplicities.
fn insert_atom(
    ctx: &FieldContext,
    atoms: &mut Vec<(Vec<FieldElement>, u64)>,
    mut s: Vec<FieldElement>,
    mult: u64,
) {
    let arith = ctx.arith();
    let mut i = 0;
    while i < atoms.len() && crate::poly::degree(&s).is_some_and(|d| d > 0) {
        let (atom, amult) = atoms[i].clone();
        let g = crate::poly::gcd(&arith, &s, &atom);
        if crate::poly::degree(&g).is_none_or(|d| d == 0) {
            i += 1;
            continue;
        }
        let atom_rest = crate::poly::div_exact(&arith, &atom, &g);
        s = crate::poly::div_exact(&arith, &s, &g);
        atoms.remove(i);
        if crate::poly::degree(&atom_rest).is_some_and(|d| d > 0) {
            atoms.insert(i, (atom_rest, amult));
            i += 1;
        }
        atoms.push((g, amult + mult));
    }
    if crate::poly::degree(&s).is_some_and(|d| d > 0) {
        atoms.push((s, mult));
    }
}

/// `δ(q, m) = Σ_{i=0}^{m−1} C(m, i)·q^{min(i, m/2)}`, the refined avoiding-set
/// bound; always at most the coarse `(2^m − 1)·q^{m/2}`.
pub fn refined_avoiding_bound(q: u64, m: u32) -> f64 {
    let half = m as f64 / 2.0;
    let qf = q as f64;
    let mut total = 0.0;
    let mut binom = 1.0f64;
    for i in 0..m {
        if i > 0 {
            binom = binom * (m - i + 1) as f64 / i as f64;
        }
        total += binom * qf.powf((i as f64).min(half));
    }
    total
}

/// The coarse avoiding-set bound `(2^m − 1)·q^{m/2}`.
pub fn coarse_avoiding_bound(q: u64, m: u32) -> f64 {
    ((1u64 << m) - 1) as f64 * (q as f64).powf(m as f64 / 2.0)
}
