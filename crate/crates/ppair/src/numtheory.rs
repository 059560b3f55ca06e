//! Exact integer number theory: factorization of `q^m − 1` through its
//! cyclotomic split, deterministic primality certificates, the arithmetic
//! functions `μ`, `φ`, `θ`, `W`, and the squarefree-divisor growth bound.
//!
//! All divisor-sum coefficients stay exact (`BigRational`); nothing in this
//! module touches floating point except the guarded-precision evaluation in
//! [`w_bound_holds`], which runs at 200 bits and re-checks near-ties at 400.

use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bigfloat::{self, Fx};
use crate::{Error, Result};

const TRIAL_DIVISION_BOUND: u64 = 1_000_000;

/// Largest input for which the fixed Miller–Rabin base set is a proof.
/// Above it the test falls back to 64 pseudo-random rounds and the factor
/// is reported as a probable prime.
fn deterministic_mr_bound() -> &'static BigUint {
    static BOUND: OnceLock<BigUint> = OnceLock::new();
    BOUND.get_or_init(|| "3317044064679887385961981".parse().unwrap())
}

const MR_DETERMINISTIC_BASES: [u64; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];
const MR_PROBABILISTIC_ROUNDS: usize = 64;

fn small_primes() -> &'static Vec<u32> {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let n = TRIAL_DIVISION_BOUND as usize;
        let mut sieve = vec![true; n + 1];
        sieve[0] = false;
        sieve[1] = false;
        let mut p = 2usize;
        while p * p <= n {
            if sieve[p] {
                let mut k = p * p;
                while k <= n {
                    sieve[k] = false;
                    k += p;
                }
            }
            p += 1;
        }
        (2..=n).filter(|&i| sieve[i]).map(|i| i as u32).collect()
    })
}

/// Outcome of a primality test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Primality {
    Composite,
    /// Certified by the deterministic Miller–Rabin base set.
    Prime,
    /// Passed 64 Miller–Rabin rounds but lies beyond the deterministic range.
    ProbablePrime,
}

/// Miller–Rabin with a deterministic base set below `3.3·10^24` and a
/// seeded 64-round fallback above.
pub fn is_prime(n: &BigUint) -> Primality {
    let two = BigUint::from(2u32);
    if n < &two {
        return Primality::Composite;
    }
    if n == &two {
        return Primality::Prime;
    }
    if n.is_even() {
        return Primality::Composite;
    }
    // n − 1 = d · 2^s with d odd
    let n_minus_1 = n - 1u32;
    let s = n_minus_1.trailing_zeros().unwrap();
    let d = &n_minus_1 >> s;

    let witness_passes = |a: &BigUint| -> bool {
        let a = a % n;
        if a.is_zero() {
            return true;
        }
        let mut x = a.modpow(&d, n);
        if x.is_one() || x == n_minus_1 {
            return true;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n_minus_1 {
                return true;
            }
        }
        false
    };

    if n <= deterministic_mr_bound() {
        for &b in &MR_DETERMINISTIC_BASES {
            if !witness_passes(&BigUint::from(b)) {
                return Primality::Composite;
            }
        }
        Primality::Prime
    } else {
        // Deterministically seeded so reports are reproducible run to run.
        let mut rng = ChaCha8Rng::seed_from_u64(0x9e3779b97f4a7c15);
        let bits = n.bits();
        for _ in 0..MR_PROBABILISTIC_ROUNDS {
            let mut a = BigUint::zero();
            while a < two {
                a = rng.sample(num_bigint::RandomBits::new(bits));
                a %= n;
            }
            if !witness_passes(&a) {
                return Primality::Composite;
            }
        }
        Primality::ProbablePrime
    }
}

pub fn is_prime_u64(n: u64) -> bool {
    is_prime(&BigUint::from(n)) != Primality::Composite
}

/// Brent-cycle Pollard rho. Returns a nontrivial factor of an odd composite.
fn pollard_brent(n: &BigUint, seed: u64) -> Option<BigUint> {
    let one = BigUint::one();
    let c = BigUint::from(seed * 2 + 1) % n;
    let mut y = BigUint::from(seed + 2) % n;
    let mut r: u64 = 1;
    let mut q = BigUint::one();
    let m: u64 = 128;
    let (mut x, mut ys) = (y.clone(), y.clone());
    let mut g = BigUint::one();
    let max_iters: u64 = 1u64 << 34;
    let mut done: u64 = 0;
    while g.is_one() && done < max_iters {
        x = y.clone();
        for _ in 0..r {
            y = (&y * &y + &c) % n;
        }
        let mut k: u64 = 0;
        while k < r && g.is_one() {
            ys = y.clone();
            let batch = m.min(r - k);
            for _ in 0..batch {
                y = (&y * &y + &c) % n;
                let diff = if x > y { &x - &y } else { &y - &x };
                q = (&q * &diff) % n;
            }
            g = q.gcd(n);
            k += batch;
            done += batch;
        }
        r <<= 1;
    }
    if g == *n {
        // Backtrack one step at a time to recover the factor.
        loop {
            ys = (&ys * &ys + &c) % n;
            let diff = if x > ys { &x - &ys } else { &ys - &x };
            g = diff.gcd(n);
            if g > one {
                break;
            }
        }
    }
    if g.is_one() || g == *n {
        None
    } else {
        Some(g)
    }
}

/// `n = a^b` with `b ≥ 2`, if such a representation exists.
fn perfect_power(n: &BigUint) -> Option<(BigUint, u32)> {
    let bits = n.bits() as u32;
    for b in (2..=bits.max(2)).rev() {
        let root = n.nth_root(b);
        if root <= BigUint::one() {
            continue;
        }
        if root.pow(b) == *n {
            return Some((root, b));
        }
    }
    None
}

/// One prime-power entry of a [`Factorization`].
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct FactorEntry {
    #[serde(serialize_with = "crate::report::serialize_biguint")]
    pub prime: BigUint,
    pub exponent: u32,
    /// False when the primality certificate is the 64-round probabilistic one.
    pub proven: bool,
}

/// A complete factorization `n = Π prime^exponent`, primes strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct Factorization {
    #[serde(serialize_with = "crate::report::serialize_biguint")]
    pub n: BigUint,
    pub factors: Vec<FactorEntry>,
}

impl Factorization {
    /// Number of distinct prime divisors, ω(n).
    pub fn omega(&self) -> usize {
        self.factors.len()
    }

    /// `W(n) = 2^{ω(n)}`, the number of squarefree divisors.
    pub fn squarefree_divisor_count(&self) -> BigUint {
        BigUint::one() << self.factors.len()
    }

    /// Product of the distinct primes.
    pub fn radical(&self) -> BigUint {
        self.factors
            .iter()
            .fold(BigUint::one(), |acc, f| acc * &f.prime)
    }

    pub fn all_proven(&self) -> bool {
        self.factors.iter().all(|f| f.proven)
    }

    /// Reassemble `n`; used by tests and the invariant check.
    pub fn product(&self) -> BigUint {
        self.factors
            .iter()
            .fold(BigUint::one(), |acc, f| acc * f.prime.pow(f.exponent))
    }

    pub fn distinct_primes(&self) -> impl Iterator<Item = &BigUint> {
        self.factors.iter().map(|f| &f.prime)
    }

    /// Distinct primes as `u64`, when they all fit.
    pub fn distinct_primes_u64(&self) -> Option<Vec<u64>> {
        self.factors.iter().map(|f| f.prime.to_u64()).collect()
    }
}

fn factor_into(n: BigUint, out: &mut Vec<(BigUint, u32)>) {
    if n.is_one() {
        return;
    }
    match is_prime(&n) {
        Primality::Prime | Primality::ProbablePrime => {
            out.push((n, 1));
            return;
        }
        Primality::Composite => {}
    }
    if let Some((root, b)) = perfect_power(&n) {
        let mut sub = Vec::new();
        factor_into(root, &mut sub);
        for (p, e) in sub {
            out.push((p, e * b));
        }
        return;
    }
    // Composite and not a perfect power: rho must split it.
    let mut seed = 1u64;
    loop {
        if let Some(d) = pollard_brent(&n, seed) {
            let q = &n / &d;
            factor_into(d, out);
            factor_into(q, out);
            return;
        }
        seed += 1;
        assert!(seed < 64, "pollard rho failed to split {n}");
    }
}

/// Factor an arbitrary positive integer: trial division to 10^6, then
/// perfect-power detection and Brent-cycle Pollard rho on the cofactor.
pub fn factorize(n: &BigUint) -> Factorization {
    assert!(!n.is_zero(), "factorize requires n >= 1");
    let original = n.clone();
    // u64 inputs stay on a machine-word trial-division path
    if let Some(small) = n.to_u64() {
        if small < TRIAL_DIVISION_BOUND * TRIAL_DIVISION_BOUND {
            let mut rest = small;
            let mut factors = Vec::new();
            for &p in small_primes() {
                let p = p as u64;
                if p * p > rest {
                    break;
                }
                if rest % p == 0 {
                    let mut e = 0u32;
                    while rest % p == 0 {
                        rest /= p;
                        e += 1;
                    }
                    factors.push(FactorEntry {
                        prime: BigUint::from(p),
                        exponent: e,
                        proven: true,
                    });
                }
            }
            if rest > 1 {
                factors.push(FactorEntry {
                    prime: BigUint::from(rest),
                    exponent: 1,
                    proven: true,
                });
            }
            return Factorization {
                n: original,
                factors,
            };
        }
    }
    let mut n = n.clone();
    let mut raw: Vec<(BigUint, u32)> = Vec::new();
    for &p in small_primes() {
        if n.is_one() {
            break;
        }
        let pb = BigUint::from(p);
        if &pb * &pb > n {
            break;
        }
        let mut e = 0u32;
        while (&n % &pb).is_zero() {
            n /= &pb;
            e += 1;
        }
        if e > 0 {
            raw.push((pb, e));
        }
    }
    if !n.is_one() {
        if n < BigUint::from(TRIAL_DIVISION_BOUND) * BigUint::from(TRIAL_DIVISION_BOUND) {
            // Cofactor below the trial-division square is prime.
            raw.push((n, 1));
        } else {
            factor_into(n, &mut raw);
        }
    }
    raw.sort_by(|a, b| a.0.cmp(&b.0));
    let mut merged: Vec<(BigUint, u32)> = Vec::new();
    for (p, e) in raw {
        match merged.last_mut() {
            Some(last) if last.0 == p => last.1 += e,
            _ => merged.push((p, e)),
        }
    }
    let factors = merged
        .into_iter()
        .map(|(p, e)| {
            let proven = is_prime(&p) == Primality::Prime;
            FactorEntry {
                prime: p,
                exponent: e,
                proven,
            }
        })
        .collect();
    let f = Factorization {
        n: original,
        factors,
    };
    debug_assert_eq!(f.product(), f.n);
    f
}

pub fn factorize_u64(n: u64) -> Factorization {
    factorize(&BigUint::from(n))
}

/// Evaluate the `d`-th cyclotomic polynomial at an integer point via
/// `Φ_d(q) = Π_{d'|d} (q^{d'} − 1)^{μ(d/d')}`.
pub fn cyclotomic_value(q: &BigUint, d: u32) -> BigUint {
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for dp in divisors_u64(d as u64) {
        let e = q.pow(dp as u32) - 1u32;
        match mobius_u64(d as u64 / dp) {
            1 => num *= &e,
            -1 => den *= &e,
            _ => {}
        }
    }
    debug_assert!((&num % &den).is_zero());
    num / den
}

/// Split `q^m − 1 = Π_{d|m} Φ_d(q)` into its cyclotomic parts.
pub fn cyclotomic_split(q: &BigUint, m: u32) -> Vec<(u32, BigUint)> {
    assert!(*q >= BigUint::from(2u32) && m >= 1);
    divisors_u64(m as u64)
        .into_iter()
        .map(|d| (d as u32, cyclotomic_value(q, d as u32)))
        .collect()
}

/// Factor `q^m − 1`. When `q = p^k` the split runs over the prime base,
/// `p^{km} − 1 = Π_{d|km} Φ_d(p)`, which gives the finest pieces; a plain
/// integer `q` still splits over the divisors of `m`.
pub fn factor_power_minus_one(q: &BigUint, m: u32) -> Factorization {
    let (base, ext) = match prime_power(q) {
        Some((p, k)) => (p, k * m),
        None => (q.clone(), m),
    };
    let n = q.pow(m) - 1u32;
    let mut parts: Vec<(BigUint, u32)> = Vec::new();
    for (_, value) in cyclotomic_split(&base, ext) {
        for f in factorize(&value).factors {
            parts.push((f.prime, f.exponent));
        }
    }
    parts.sort_by(|a, b| a.0.cmp(&b.0));
    let mut merged: Vec<FactorEntry> = Vec::new();
    for (p, e) in parts {
        match merged.last_mut() {
            Some(last) if last.prime == p => last.exponent += e,
            _ => {
                let proven = is_prime(&p) == Primality::Prime;
                merged.push(FactorEntry {
                    prime: p,
                    exponent: e,
                    proven,
                });
            }
        }
    }
    let f = Factorization { n, factors: merged };
    debug_assert_eq!(f.product(), f.n);
    f
}

/// `q = p^k` with `p` prime, if it is a prime power.
pub fn prime_power(q: &BigUint) -> Option<(BigUint, u32)> {
    if *q < BigUint::from(2u32) {
        return None;
    }
    if is_prime(q) != Primality::Composite {
        return Some((q.clone(), 1));
    }
    if let Some((root, b)) = perfect_power(q) {
        if let Some((p, k)) = prime_power(&root) {
            return Some((p, k * b));
        }
    }
    None
}

fn divisors_u64(n: u64) -> Vec<u64> {
    let mut divs = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            divs.push(d);
            if d != n / d {
                divs.push(n / d);
            }
        }
        d += 1;
    }
    divs.sort_unstable();
    divs
}

fn mobius_u64(n: u64) -> i32 {
    mobius(&BigUint::from(n))
}

/// Möbius function.
pub fn mobius(n: &BigUint) -> i32 {
    assert!(!n.is_zero());
    let f = factorize(n);
    if f.factors.iter().any(|e| e.exponent > 1) {
        0
    } else if f.factors.len().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Euler totient.
pub fn euler_phi(n: &BigUint) -> BigUint {
    assert!(!n.is_zero());
    let f = factorize(n);
    let mut phi = n.clone();
    for e in &f.factors {
        phi = phi / &e.prime * (&e.prime - 1u32);
    }
    phi
}

/// `θ(e) = φ(e)/e` as an exact rational.
pub fn theta(n: &BigUint) -> BigRational {
    BigRational::new(BigInt::from(euler_phi(n)), BigInt::from(n.clone()))
}

/// `W(n) = 2^{ω(n)}`, the number of squarefree divisors.
pub fn squarefree_divisor_count(n: &BigUint) -> BigUint {
    factorize(n).squarefree_divisor_count()
}

/// Decide `W(n−1) < n^{0.96 / log log n}` for `n ≥ 3` at guarded precision.
///
/// Both sides are compared in logarithmic form, `ω·ln2·lnln n` against
/// `(24/25)·ln n`, first at 200 bits; if they agree to a relative `10^-30`
/// the comparison is redone at 400 bits.
pub fn w_bound_holds(n: &BigUint) -> Result<bool> {
    if *n < BigUint::from(3u32) {
        return Err(Error::pre(format!(
            "w_bound_holds requires n >= 3, got {n}"
        )));
    }
    let omega = factorize(&(n - 1u32)).omega() as u64;
    let decide = |bits: u32| -> (bool, bool) {
        let ln_n = bigfloat::ln(&Fx::from_biguint(n, bits));
        let lnln_n = bigfloat::ln(&ln_n);
        let lhs = bigfloat::ln2(bits).mul_u64(omega).mul(&lnln_n);
        let rhs = ln_n.mul_u64(24).div_u64(25);
        let tie = lhs.rel_close(&rhs, 1, 30);
        (lhs.cmp_value(&rhs) == std::cmp::Ordering::Less, tie)
    };
    let (holds, tie) = decide(200);
    if !tie {
        return Ok(holds);
    }
    let (holds, _) = decide(400);
    Ok(holds)
}

/// Squarefree divisors of a factored integer together with `μ` and `φ`,
/// the data every divisor-sum in the character formulas consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SquarefreeDivisor {
    pub d: u64,
    pub mobius: i32,
    pub phi: u64,
}

/// Enumerate the squarefree divisors of `n` given its distinct primes.
pub fn squarefree_divisors(distinct_primes: &[u64]) -> Vec<SquarefreeDivisor> {
    let mut out = vec![SquarefreeDivisor {
        d: 1,
        mobius: 1,
        phi: 1,
    }];
    for &p in distinct_primes {
        let len = out.len();
        for i in 0..len {
            let base = out[i];
            out.push(SquarefreeDivisor {
                d: base.d * p,
                mobius: -base.mobius,
                phi: base.phi * (p - 1),
            });
        }
    }
    out.sort_by_key(|sd| sd.d);
    out
}

/// All divisors of `n` from its factorization (u64 range).
pub fn divisors_from_factorization(f: &Factorization) -> Option<Vec<u64>> {
    let mut divs = vec![1u64];
    for entry in &f.factors {
        let p = entry.prime.to_u64()?;
        let len = divs.len();
        for i in 0..len {
            let mut v = divs[i];
            for _ in 0..entry.exponent {
                v = v.checked_mul(p)?;
                divs.push(v);
            }
        }
    }
    divs.sort_unstable();
    divs.dedup();
    Some(divs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(f: &Factorization) -> Vec<(u64, u32)> {
        f.factors
            .iter()
            .map(|e| (e.prime.to_u64().unwrap(), e.exponent))
            .collect()
    }

    #[test]
    fn factorize_basics() {
        assert_eq!(map(&factorize_u64(12)), vec![(2, 2), (3, 1)]);
        assert_eq!(factorize_u64(1).factors.len(), 0);
        assert_eq!(
            map(&factorize_u64(161_050)),
            vec![(2, 1), (5, 2), (3221, 1)]
        );
        assert_eq!(
            map(&factorize_u64(6_436_342)),
            vec![(2, 1), (11, 1), (292_561, 1)]
        );
    }

    #[test]
    fn factorize_large_random_reconstructs() {
        let mut x: u64 = 0x243f6a8885a308d3;
        for _ in 0..400 {
            // xorshift64
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            let n = x % 1_000_000_000_000 + 2;
            let f = factorize_u64(n);
            assert_eq!(f.product(), BigUint::from(n), "n = {n}");
            for w in f.factors.windows(2) {
                assert!(w[0].prime < w[1].prime);
            }
            for e in &f.factors {
                assert!(is_prime(&e.prime) == Primality::Prime);
            }
        }
    }

    #[test]
    fn cyclotomic_split_examples() {
        let s = cyclotomic_split(&BigUint::from(23u32), 5);
        assert_eq!(
            s,
            vec![(1, BigUint::from(22u32)), (5, BigUint::from(292_561u32))]
        );
        let s = cyclotomic_split(&BigUint::from(3u32), 2);
        assert_eq!(s, vec![(1, BigUint::from(2u32)), (2, BigUint::from(4u32))]);
        // product identity over a grid
        for q in 2u32..=50 {
            for m in 1u32..=20 {
                let qb = BigUint::from(q);
                let prod: BigUint = cyclotomic_split(&qb, m)
                    .into_iter()
                    .fold(BigUint::one(), |acc, (_, v)| acc * v);
                assert_eq!(prod, qb.pow(m) - 1u32, "q={q} m={m}");
            }
        }
    }

    #[test]
    fn factor_power_minus_one_examples() {
        let f = factor_power_minus_one(&BigUint::from(11u32), 16);
        let primes: Vec<u64> = f.distinct_primes_u64().unwrap();
        assert_eq!(primes, vec![2, 3, 5, 17, 61, 7321, 6_304_673]);
        assert_eq!(f.squarefree_divisor_count(), BigUint::from(128u32));
        assert!(f.all_proven());
    }

    #[test]
    fn mobius_phi_theta_values() {
        assert_eq!(mobius(&BigUint::from(30u32)), -1);
        assert_eq!(mobius(&BigUint::from(12u32)), 0);
        assert_eq!(mobius(&BigUint::from(1u32)), 1);
        assert_eq!(euler_phi(&BigUint::from(8u32)), BigUint::from(4u32));
        assert_eq!(
            theta(&BigUint::from(8u32)),
            BigRational::new(BigInt::from(1), BigInt::from(2))
        );
    }

    #[test]
    fn mobius_divisor_sum_identity() {
        // Σ_{d|n} μ(d) = [n = 1], spot-checked across a range
        for n in 1u64..=2000 {
            let total: i64 = divisors_u64(n)
                .into_iter()
                .map(|d| mobius_u64(d) as i64)
                .sum();
            assert_eq!(total, if n == 1 { 1 } else { 0 }, "n = {n}");
        }
    }

    #[test]
    fn phi_two_routes_agree() {
        for n in 1u64..=2000 {
            let f = factorize_u64(n);
            let brute = (1..=n).filter(|&k| k.gcd(&n) == 1).count() as u64;
            let mut phi = n;
            for e in &f.factors {
                let p = e.prime.to_u64().unwrap();
                phi = phi / p * (p - 1);
            }
            assert_eq!(phi, brute, "n = {n}");
            assert_eq!(euler_phi(&BigUint::from(n)).to_u64().unwrap(), brute);
        }
    }

    #[test]
    fn squarefree_divisor_count_brute_force() {
        fn is_squarefree(mut d: u64) -> bool {
            let mut p = 2;
            while p * p <= d {
                if d.is_multiple_of(p * p) {
                    return false;
                }
                while d.is_multiple_of(p) {
                    d /= p;
                }
                p += 1;
            }
            true
        }
        for n in 1u64..=3000 {
            let brute = divisors_u64(n)
                .into_iter()
                .filter(|&d| is_squarefree(d))
                .count() as u64;
            assert_eq!(
                squarefree_divisor_count(&BigUint::from(n))
                    .to_u64()
                    .unwrap(),
                brute,
                "n = {n}"
            );
        }
    }

    #[test]
    fn squarefree_divisors_table() {
        let sds = squarefree_divisors(&[2, 3, 5]);
        assert_eq!(sds.len(), 8);
        assert_eq!(
            sds[0],
            SquarefreeDivisor {
                d: 1,
                mobius: 1,
                phi: 1
            }
        );
        let d30 = sds.iter().find(|s| s.d == 30).unwrap();
        assert_eq!((d30.mobius, d30.phi), (-1, 8));
    }

    #[test]
    fn w_bound_examples() {
        assert!(w_bound_holds(&BigUint::from(100u32)).unwrap());
        assert!(w_bound_holds(&BigUint::from(3u32)).unwrap());
        assert!(w_bound_holds(&BigUint::from(2u32)).is_err());
    }

    #[test]
    fn prime_power_detection() {
        assert_eq!(
            prime_power(&BigUint::from(121u32)),
            Some((BigUint::from(11u32), 2))
        );
        assert_eq!(
            prime_power(&BigUint::from(64u32)),
            Some((BigUint::from(2u32), 6))
        );
        assert_eq!(prime_power(&BigUint::from(221u32)), None);
        assert_eq!(
            prime_power(&BigUint::from(17u32)),
            Some((BigUint::from(17u32), 1))
        );
    }

    #[test]
    fn probable_prime_marking_beyond_deterministic_range() {
        // 2^89 − 1 is a Mersenne prime above the deterministic bound.
        let m89 = (BigUint::one() << 89) - 1u32;
        assert_eq!(is_prime(&m89), Primality::ProbablePrime);
        let f = factorize(&m89);
        assert!(!f.all_proven());
        assert_eq!(f.factors.len(), 1);
    }
}
