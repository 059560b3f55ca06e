//! Fixed-point big-float arithmetic for guarded-precision inequality
//! decisions.
//!
//! A [`Fx`] holds `v / 2^bits` for a `BigInt` mantissa `v`. Only the handful
//! of operations the criteria need are provided: ring ops, `ln`, `exp`, and
//! comparisons. Series are truncated when terms underflow the working
//! precision, so results carry an error of a few hundred ulps at scale
//! `2^-bits`; callers decide inequalities only when the margin dwarfs that,
//! and re-evaluate at higher precision otherwise.

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{Signed, Zero};

/// Fixed-point real number: `value = v / 2^bits`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fx {
    v: BigInt,
    bits: u32,
}

impl Fx {
    pub fn zero(bits: u32) -> Self {
        Fx {
            v: BigInt::zero(),
            bits,
        }
    }

    pub fn from_u64(n: u64, bits: u32) -> Self {
        Fx {
            v: BigInt::from(n) << bits,
            bits,
        }
    }

    pub fn from_biguint(n: &BigUint, bits: u32) -> Self {
        Fx {
            v: BigInt::from(n.clone()) << bits,
            bits,
        }
    }

    /// Exact rational `num / den` rounded to the working precision.
    pub fn from_ratio(num: i64, den: u64, bits: u32) -> Self {
        Fx {
            v: (BigInt::from(num) << bits) / BigInt::from(den),
            bits,
        }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn is_positive(&self) -> bool {
        self.v.sign() == Sign::Plus
    }

    pub fn add(&self, rhs: &Fx) -> Fx {
        debug_assert_eq!(self.bits, rhs.bits);
        Fx {
            v: &self.v + &rhs.v,
            bits: self.bits,
        }
    }

    pub fn sub(&self, rhs: &Fx) -> Fx {
        debug_assert_eq!(self.bits, rhs.bits);
        Fx {
            v: &self.v - &rhs.v,
            bits: self.bits,
        }
    }

    pub fn neg(&self) -> Fx {
        Fx {
            v: -&self.v,
            bits: self.bits,
        }
    }

    pub fn mul(&self, rhs: &Fx) -> Fx {
        debug_assert_eq!(self.bits, rhs.bits);
        Fx {
            v: (&self.v * &rhs.v) >> self.bits,
            bits: self.bits,
        }
    }

    pub fn div(&self, rhs: &Fx) -> Fx {
        debug_assert_eq!(self.bits, rhs.bits);
        assert!(!rhs.v.is_zero(), "division by zero");
        Fx {
            v: (&self.v << self.bits) / &rhs.v,
            bits: self.bits,
        }
    }

    pub fn mul_u64(&self, k: u64) -> Fx {
        Fx {
            v: &self.v * BigInt::from(k),
            bits: self.bits,
        }
    }

    pub fn div_u64(&self, k: u64) -> Fx {
        Fx {
            v: &self.v / BigInt::from(k),
            bits: self.bits,
        }
    }

    pub fn shl(&self, k: u32) -> Fx {
        Fx {
            v: &self.v << k,
            bits: self.bits,
        }
    }

    pub fn shr(&self, k: u32) -> Fx {
        Fx {
            v: &self.v >> k,
            bits: self.bits,
        }
    }

    pub fn cmp_value(&self, rhs: &Fx) -> std::cmp::Ordering {
        debug_assert_eq!(self.bits, rhs.bits);
        self.v.cmp(&rhs.v)
    }

    pub fn abs(&self) -> Fx {
        Fx {
            v: self.v.abs(),
            bits: self.bits,
        }
    }

    /// `|self − rhs| < tol_num/tol_den · max(|self|, |rhs|)`, the relative
    /// agreement test used to trigger precision escalation.
    pub fn rel_close(&self, rhs: &Fx, tol_num: u64, tol_den_pow10: u32) -> bool {
        let diff = (&self.v - &rhs.v).abs();
        let mx = self.v.abs().max(rhs.v.abs());
        // diff < tol_num · 10^-tol_den_pow10 · mx
        diff * BigInt::from(10u32).pow(tol_den_pow10) < mx * BigInt::from(tol_num)
    }

    pub fn to_f64(&self) -> f64 {
        // Split off the low bits to stay inside f64 range for big mantissas.
        let sign = match self.v.sign() {
            Sign::Minus => -1.0,
            _ => 1.0,
        };
        let mag = self.v.magnitude();
        let bl = mag.bits();
        if bl == 0 {
            return 0.0;
        }
        let keep = 64u64.min(bl);
        let top: u64 = ((mag >> (bl - keep)).iter_u64_digits().next()).unwrap_or(0);
        sign * (top as f64) * 2f64.powi((bl - keep) as i32 - self.bits as i32)
    }

    fn bit_length(&self) -> u64 {
        self.v.magnitude().bits()
    }
}

/// `ln 2` at the given precision, via `2·atanh(1/3)`; cached per precision.
pub fn ln2(bits: u32) -> Fx {
    use std::collections::HashMap;
    use std::sync::{Mutex, OnceLock};
    static CACHE: OnceLock<Mutex<HashMap<u32, BigInt>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("ln2 cache poisoned");
    let v = guard
        .entry(bits)
        .or_insert_with(|| atanh_recip(3, bits).mul_u64(2).v)
        .clone();
    Fx { v, bits }
}

/// `atanh(1/k) = Σ (1/k)^{2j+1} / (2j+1)` for integer `k ≥ 2`.
fn atanh_recip(k: u64, bits: u32) -> Fx {
    let k2 = BigInt::from(k) * BigInt::from(k);
    let mut term = (BigInt::from(1u32) << bits) / BigInt::from(k);
    let mut sum = term.clone();
    let mut j = 1u64;
    while !term.is_zero() {
        term /= &k2;
        if term.is_zero() {
            break;
        }
        sum += &term / BigInt::from(2 * j + 1);
        j += 1;
    }
    Fx { v: sum, bits }
}

/// Natural logarithm of a positive value.
pub fn ln(x: &Fx) -> Fx {
    assert!(x.is_positive(), "ln of a non-positive value");
    let bits = x.bits;
    // x = m · 2^k with m in [1, 2)
    let bl = x.bit_length();
    let k = bl as i64 - 1 - bits as i64;
    let mant = if k >= 0 {
        x.shr(k as u32)
    } else {
        x.shl((-k) as u32)
    };
    // ln m = 2 atanh(z), z = (m−1)/(m+1) in [0, 1/3)
    let one = Fx::from_u64(1, bits);
    let z = mant.sub(&one).div(&mant.add(&one));
    let z2 = z.mul(&z);
    let mut term = z.clone();
    let mut sum = z;
    let mut j = 1u64;
    while !term.v.is_zero() {
        term = term.mul(&z2);
        if term.v.is_zero() {
            break;
        }
        sum = sum.add(&term.div_u64(2 * j + 1));
        j += 1;
    }
    let ln_m = sum.mul_u64(2);
    let l2 = ln2(bits);
    if k >= 0 {
        ln_m.add(&l2.mul_u64(k as u64))
    } else {
        ln_m.sub(&l2.mul_u64((-k) as u64))
    }
}

/// Exponential. The argument is reduced by multiples of `ln 2` to `[−½ln2, ½ln2]`.
pub fn exp(x: &Fx) -> Fx {
    let bits = x.bits;
    let l2 = ln2(bits);
    // n = round(x / ln2)
    let n_fx = x.div(&l2);
    let half = BigInt::from(1u32) << (bits - 1);
    let n_int: BigInt = (&n_fx.v
        + if n_fx.v.sign() == Sign::Minus {
            -&half
        } else {
            half.clone()
        })
        >> bits;
    let n = i64::try_from(&n_int).expect("exp argument out of range");
    let r = x.sub(&l2.mul_u64(n.unsigned_abs()).v_signed(n >= 0));
    // e^r by Taylor series; |r| ≤ 0.35 so convergence is fast.
    let mut term = Fx::from_u64(1, bits);
    let mut sum = term.clone();
    let mut j = 1u64;
    while !term.v.is_zero() {
        term = term.mul(&r).div_u64(j);
        if term.v.is_zero() {
            break;
        }
        sum = sum.add(&term);
        j += 1;
    }
    if n >= 0 {
        sum.shl(n as u32)
    } else {
        sum.shr((-n) as u32)
    }
}

impl Fx {
    fn v_signed(self, keep_sign: bool) -> Fx {
        if keep_sign {
            self
        } else {
            self.neg()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn ln_matches_f64() {
        for &n in &[2u64, 3, 10, 100, 161051, 1 << 40] {
            let x = Fx::from_u64(n, 256);
            assert!(close(ln(&x).to_f64(), (n as f64).ln(), 1e-14), "ln({n})");
        }
    }

    #[test]
    fn ln2_value() {
        assert!(close(ln2(200).to_f64(), std::f64::consts::LN_2, 1e-15));
    }

    #[test]
    fn exp_matches_f64() {
        for &t in &[0i64, 1, -1, 10, -10, 30] {
            let x = Fx::from_ratio(t * 7 + 1, 5, 256);
            let want = ((t * 7 + 1) as f64 / 5.0).exp();
            assert!(close(exp(&x).to_f64(), want, 1e-13), "exp case {t}");
        }
    }

    #[test]
    fn exp_ln_roundtrip() {
        let x = Fx::from_u64(123456789, 320);
        let y = exp(&ln(&x));
        assert!(close(y.to_f64(), 123456789.0, 1e-12));
    }

    #[test]
    fn rational_construction() {
        let x = Fx::from_ratio(24, 25, 200);
        assert!(close(x.to_f64(), 0.96, 1e-15));
    }
}
