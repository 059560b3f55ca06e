//! Numerical audits of the character-sum bounds behind the sufficient
//! conditions: the complete-sum (Weil) bound, the coprime-pair bound, the
//! per-hyperplane incomplete-sum bound, the avoiding-set bound, and the two
//! incomplete-sum bounds over `S_c^*`.
//!
//! Each audit op evaluates its left-hand side by direct summation (Kahan
//! compensated) and never guesses the root counts it checks against: audit
//! polynomials are built from explicitly factorable shapes (products of
//! distinct separable factors of degree ≤ 2), so `d` and `k` are exact.
//!
//! The all-characters sweep evaluates whole `|S(χ)|` grids with length-`N`
//! DFTs (one transform per fixed second character) and cross-checks sampled
//! grid entries against the direct-summation ops.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{FftDirection, FftPlanner};
use serde_json::{json, Value};

use super::{
    char_eval, coarse_avoiding_bound, is_power_free, refined_avoiding_bound, Character,
    KahanComplex, PowerFreeness, Quadratic,
};
use crate::finitefield::{build_context, FieldContext, FieldElement};
use crate::hyperplane::{build_system, HyperplaneSystem};
use crate::poly;
use crate::{Error, Result};

/// Absolute tolerance on sums of unit-modulus terms (double precision with
/// compensation keeps the true error orders of magnitude below this).
pub const SUM_TOLERANCE: f64 = 1e-6;

/// One audited inequality: `lhs ≤ bound` (strict for `af2`).
#[derive(Debug, Clone)]
pub struct AuditRecord {
    pub kind: &'static str,
    pub parameters: Value,
    pub lhs: f64,
    pub bound: f64,
    pub pass: bool,
}

impl AuditRecord {
    pub fn to_json(&self) -> Value {
        json!({
            "kind": self.kind,
            "parameters": self.parameters,
            "lhs": crate::report::json_f64(self.lhs),
            "bound": crate::report::json_f64(self.bound),
            "pass": self.pass,
        })
    }
}

/// A polynomial admitted to the Weil-type audits: a product of pairwise
/// coprime separable factors of degree ≤ 2, so the number of distinct roots
/// in the splitting field is exactly the degree.
#[derive(Debug, Clone)]
pub struct AuditPoly {
    coeffs: Vec<FieldElement>,
    distinct_roots: u32,
    label: String,
}

impl AuditPoly {
    /// `x + a0`.
    pub fn linear(ctx: &FieldContext, a0: FieldElement) -> AuditPoly {
        let label = if ctx.is_zero(&a0) {
            "x".to_string()
        } else {
            format!("x + ({})", ctx.render(&a0))
        };
        AuditPoly {
            coeffs: vec![a0, ctx.one()],
            distinct_roots: 1,
            label,
        }
    }

    /// Monic normalization of a valid quadratic; the dropped leading
    /// coefficient goes into the audit's scalar slot.
    pub fn from_quadratic(ctx: &FieldContext, f: &Quadratic) -> Result<(AuditPoly, FieldElement)> {
        let a_inv = ctx.inv(&f.a)?;
        let coeffs = vec![ctx.mul(&f.c, &a_inv), ctx.mul(&f.b, &a_inv), ctx.one()];
        let label = format!("monic({})", f.render(ctx));
        Ok((
            AuditPoly {
                coeffs,
                distinct_roots: 2,
                label,
            },
            f.a.clone(),
        ))
    }

    /// Product of pairwise coprime admitted factors.
    pub fn product(ctx: &FieldContext, parts: &[AuditPoly]) -> Result<AuditPoly> {
        if parts.is_empty() {
            return Err(Error::pre("empty audit polynomial product"));
        }
        let arith = ctx.arith();
        for i in 0..parts.len() {
            for j in i + 1..parts.len() {
                let g = poly::gcd(&arith, &parts[i].coeffs, &parts[j].coeffs);
                if poly::degree(&g) != Some(0) {
                    return Err(Error::pre(format!(
                        "audit factors '{}' and '{}' are not coprime",
                        parts[i].label, parts[j].label
                    )));
                }
            }
        }
        let mut coeffs = vec![ctx.one()];
        let mut d = 0u32;
        let mut labels = Vec::new();
        for p in parts {
            coeffs = poly::mul(&arith, &coeffs, &p.coeffs);
            d += p.distinct_roots;
            labels.push(p.label.clone());
        }
        Ok(AuditPoly {
            coeffs,
            distinct_roots: d,
            label: labels.join(" * "),
        })
    }

    pub fn degree(&self) -> u32 {
        (self.coeffs.len() - 1) as u32
    }

    /// Number of distinct roots in the splitting field.
    pub fn distinct_roots(&self) -> u32 {
        self.distinct_roots
    }

    /// Degree of the largest squarefree divisor (the polynomial is
    /// squarefree, so this is the degree).
    pub fn squarefree_degree(&self) -> u32 {
        self.degree()
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, ctx: &FieldContext, x: &FieldElement) -> FieldElement {
        let mut acc = ctx.zero();
        for c in self.coeffs.iter().rev() {
            acc = ctx.mul(&acc, x);
            acc = ctx.add(&acc, c);
        }
        acc
    }
}

fn require_nonprincipal(chi: Character) -> Result<()> {
    if chi.is_principal() {
        return Err(Error::pre("audit requires a nonprincipal character"));
    }
    Ok(())
}

fn qm_half(ctx: &FieldContext) -> f64 {
    (ctx.q() as f64).powf(ctx.m() as f64 / 2.0)
}

/// `|Σ_{λ∈F_{q^m}} χ(a·g(λ))| ≤ (d−1)·q^{m/2}` for a nonprincipal `χ` whose
/// order does not turn `g` into a power (impossible here: `g` is squarefree).
pub fn audit_weil_single(
    ctx: &FieldContext,
    chi: Character,
    g: &AuditPoly,
    scalar: &FieldElement,
) -> Result<AuditRecord> {
    require_nonprincipal(chi)?;
    if ctx.is_zero(scalar) {
        return Err(Error::pre("weil audit scalar must be nonzero"));
    }
    if g.degree() == 0 {
        return Err(Error::pre(
            "weil audit polynomial must have positive degree",
        ));
    }
    let mut acc = KahanComplex::default();
    for lam in ctx.elements() {
        let v = ctx.mul(scalar, &g.eval(ctx, &lam));
        acc.add(char_eval(ctx, chi, &v));
    }
    let lhs = acc.value().norm();
    let bound = (g.distinct_roots() as f64 - 1.0) * qm_half(ctx);
    Ok(AuditRecord {
        kind: "weil_single",
        parameters: json!({
            "q": ctx.q(), "m": ctx.m(), "chi": chi.exponent, "g": g.label(),
            "scalar": ctx.render(scalar), "d": g.distinct_roots(),
        }),
        lhs,
        bound,
        pass: lhs <= bound + SUM_TOLERANCE,
    })
}

/// `|Σ_{λ∈F_{q^m}} χ₁(g₁(λ))·χ₂(g₂(λ))| ≤ (k₁+k₂−1)·q^{m/2}` for coprime
/// monic `g₁, g₂` and nonprincipal `χ₁, χ₂`.
pub fn audit_weil_pair(
    ctx: &FieldContext,
    chi1: Character,
    chi2: Character,
    g1: &AuditPoly,
    g2: &AuditPoly,
) -> Result<AuditRecord> {
    require_nonprincipal(chi1)?;
    require_nonprincipal(chi2)?;
    let arith = ctx.arith();
    let g = poly::gcd(&arith, &g1.coeffs, &g2.coeffs);
    if poly::degree(&g) != Some(0) {
        return Err(Error::pre(format!(
            "weil pair audit requires coprime polynomials, got '{}' and '{}'",
            g1.label(),
            g2.label()
        )));
    }
    let mut acc = KahanComplex::default();
    for lam in ctx.elements() {
        let v1 = char_eval(ctx, chi1, &g1.eval(ctx, &lam));
        let v2 = char_eval(ctx, chi2, &g2.eval(ctx, &lam));
        acc.add(v1 * v2);
    }
    let lhs = acc.value().norm();
    let k1 = g1.squarefree_degree() as f64;
    let k2 = g2.squarefree_degree() as f64;
    let bound = (k1 + k2 - 1.0) * qm_half(ctx);
    Ok(AuditRecord {
        kind: "weil_pair",
        parameters: json!({
            "q": ctx.q(), "m": ctx.m(), "chi1": chi1.exponent, "chi2": chi2.exponent,
            "g1": g1.label(), "g2": g2.label(), "k1": k1, "k2": k2,
        }),
        lhs,
        bound,
        pass: lhs <= bound + SUM_TOLERANCE,
    })
}

/// `|Σ_{λ∈A_j} χ(a·g(λ))| ≤ ((d·q^{m−1} − 1)/q^{m−1})·q^{m/2}`, the
/// incomplete sum over one hyperplane, evaluated by direct summation over
/// `A_j` (no auxiliary covering polynomial is ever constructed).
pub fn audit_hyperplane_sum(
    ctx: &FieldContext,
    sys: &HyperplaneSystem,
    chi: Character,
    g: &AuditPoly,
    scalar: &FieldElement,
    j: usize,
) -> Result<AuditRecord> {
    require_nonprincipal(chi)?;
    if ctx.is_zero(scalar) {
        return Err(Error::pre("hyperplane audit scalar must be nonzero"));
    }
    if g.degree() == 0 {
        return Err(Error::pre(
            "hyperplane audit polynomial must have positive degree",
        ));
    }
    if j >= ctx.m() as usize {
        return Err(Error::pre(format!("hyperplane index {j} out of range")));
    }
    let mut acc = KahanComplex::default();
    for lam in sys.hyperplane_iter(ctx, j) {
        let v = ctx.mul(scalar, &g.eval(ctx, &lam));
        acc.add(char_eval(ctx, chi, &v));
    }
    let lhs = acc.value().norm();
    let qm1 = (ctx.q() as f64).powi(ctx.m() as i32 - 1);
    let bound = (g.distinct_roots() as f64 * qm1 - 1.0) / qm1 * qm_half(ctx);
    Ok(AuditRecord {
        kind: "hyperplane",
        parameters: json!({
            "q": ctx.q(), "m": ctx.m(), "chi": chi.exponent, "g": g.label(),
            "hyperplane": j, "d": g.distinct_roots(),
        }),
        lhs,
        bound,
        pass: lhs <= bound + SUM_TOLERANCE,
    })
}

/// The avoiding-set audit: `|Σ_{λ∈S_c^*} χ(λ)|` against the refined bound
/// `δ(q, m)` and the coarse bound `(2^m − 1)·q^{m/2}`.
#[derive(Debug, Clone)]
pub struct AvoidingAudit {
    pub lhs: f64,
    pub refined_bound: f64,
    pub coarse: f64,
    pub pass: bool,
}

pub fn audit_avoiding_sum(
    ctx: &FieldContext,
    sys: &HyperplaneSystem,
    chi: Character,
) -> Result<AvoidingAudit> {
    require_nonprincipal(chi)?;
    let mut acc = KahanComplex::default();
    for lam in sys.avoiding_iter(ctx) {
        acc.add(char_eval(ctx, chi, &lam));
    }
    let lhs = acc.value().norm();
    let delta = refined_avoiding_bound(ctx.q(), ctx.m());
    let coarse = coarse_avoiding_bound(ctx.q(), ctx.m());
    Ok(AvoidingAudit {
        lhs,
        refined_bound: delta,
        coarse,
        pass: lhs <= delta + SUM_TOLERANCE && delta <= coarse + SUM_TOLERANCE,
    })
}

fn poly_label(ctx: &FieldContext, g: &[FieldElement]) -> String {
    let terms: Vec<String> = g
        .iter()
        .enumerate()
        .rev()
        .filter(|(_, c)| !ctx.is_zero(c))
        .map(|(i, c)| match i {
            0 => format!("({})", ctx.render(c)),
            1 => format!("({})*x", ctx.render(c)),
            _ => format!("({})*x^{i}", ctx.render(c)),
        })
        .collect();
    if terms.is_empty() {
        "0".to_string()
    } else {
        terms.join(" + ")
    }
}

fn power_free_or_reject(
    ctx: &FieldContext,
    parts: &[(Vec<FieldElement>, u64)],
    e: u64,
    what: &str,
) -> Result<()> {
    match is_power_free(ctx, parts, e)? {
        PowerFreeness::Free { .. } => Ok(()),
        PowerFreeness::ConstantPower { scalar } => Err(Error::pre(format!(
            "{what} degenerates to the constant {}",
            ctx.render(&scalar)
        ))),
        PowerFreeness::Power { scalar, h } => Err(Error::pre(format!(
            "{what} is an exact power: ({}) * ({})^{e}",
            ctx.render(&scalar),
            poly_label(ctx, &h)
        ))),
    }
}

/// `|Σ_{λ∈S_c^*} χ(g(λ))| ≤ k·2^m·q^{m/2}` for `g` of degree `k` that is not
/// an `ord(χ)`-th power times a constant.
pub fn audit_af1(
    ctx: &FieldContext,
    sys: &HyperplaneSystem,
    chi: Character,
    g: &[FieldElement],
) -> Result<AuditRecord> {
    require_nonprincipal(chi)?;
    let arith = ctx.arith();
    let g = poly::trim(&arith, g.to_vec());
    let k = match poly::degree(&g) {
        None | Some(0) => return Err(Error::pre("af1 audit polynomial must have positive degree")),
        Some(k) => k as u32,
    };
    power_free_or_reject(ctx, &[(g.clone(), 1)], chi.order(ctx), "af1 argument")?;
    let mut acc = KahanComplex::default();
    for lam in sys.avoiding_iter(ctx) {
        acc.add(char_eval(ctx, chi, &poly::eval(&arith, &g, &lam)));
    }
    let lhs = acc.value().norm();
    let bound = k as f64 * (1u64 << ctx.m()) as f64 * qm_half(ctx);
    Ok(AuditRecord {
        kind: "af1",
        parameters: json!({
            "q": ctx.q(), "m": ctx.m(), "chi": chi.exponent,
            "g": poly_label(ctx, &g), "k": k,
        }),
        lhs,
        bound,
        pass: lhs <= bound + SUM_TOLERANCE,
    })
}

/// `|Σ_{λ∈S_c^*} χ₁(g₁(λ))χ₂(g₂(λ))| < (k₁+k₂)·2^m·q^{m/2}` for coprime
/// `g₁, g₂` with each `gᵢ` power-free for `ord(χᵢ)` and the combined product
/// `g₁^{n₁}g₂^{n₂}` power-free for `q^m−1`, where `nᵢ` is the canonical
/// exponent of `χᵢ`. The bound is strict.
pub fn audit_af2(
    ctx: &FieldContext,
    sys: &HyperplaneSystem,
    chi1: Character,
    chi2: Character,
    g1: &[FieldElement],
    g2: &[FieldElement],
) -> Result<AuditRecord> {
    require_nonprincipal(chi1)?;
    require_nonprincipal(chi2)?;
    let arith = ctx.arith();
    let g1 = poly::trim(&arith, g1.to_vec());
    let g2 = poly::trim(&arith, g2.to_vec());
    let (k1, k2) = match (poly::degree(&g1), poly::degree(&g2)) {
        (Some(a), Some(b)) if a > 0 && b > 0 => (a as u32, b as u32),
        _ => {
            return Err(Error::pre(
                "af2 audit polynomials must have positive degree",
            ))
        }
    };
    let g = poly::gcd(&arith, &g1, &g2);
    if poly::degree(&g) != Some(0) {
        return Err(Error::pre("af2 audit requires coprime polynomials"));
    }
    power_free_or_reject(
        ctx,
        &[(g1.clone(), 1)],
        chi1.order(ctx),
        "af2 first argument",
    )?;
    power_free_or_reject(
        ctx,
        &[(g2.clone(), 1)],
        chi2.order(ctx),
        "af2 second argument",
    )?;
    power_free_or_reject(
        ctx,
        &[(g1.clone(), chi1.exponent), (g2.clone(), chi2.exponent)],
        ctx.group_order(),
        "af2 combined product",
    )?;
    let mut acc = KahanComplex::default();
    for lam in sys.avoiding_iter(ctx) {
        let v1 = char_eval(ctx, chi1, &poly::eval(&arith, &g1, &lam));
        let v2 = char_eval(ctx, chi2, &poly::eval(&arith, &g2, &lam));
        acc.add(v1 * v2);
    }
    let lhs = acc.value().norm();
    let bound = (k1 + k2) as f64 * (1u64 << ctx.m()) as f64 * qm_half(ctx);
    Ok(AuditRecord {
        kind: "af2",
        parameters: json!({
            "q": ctx.q(), "m": ctx.m(), "chi1": chi1.exponent, "chi2": chi2.exponent,
            "g1": poly_label(ctx, &g1), "g2": poly_label(ctx, &g2),
        }),
        lhs,
        bound,
        pass: lhs < bound,
    })
}

// ---------------------------------------------------------------------------
// Exhaustive sweeps
// ---------------------------------------------------------------------------

/// Aggregate result of the audit sweep over all fields with `q^m ≤ qm_max`.
#[derive(Debug)]
pub struct SweepReport {
    pub qm_max: u64,
    pub field_count: usize,
    pub total_checks: u64,
    pub checks_by_kind: BTreeMap<&'static str, u64>,
    /// Violations, capped at 100 records (the count is always exact).
    pub violations: Vec<AuditRecord>,
    pub violation_count: u64,
    pub fields: Vec<Value>,
}

/// All prime powers `q = p^k` with all `m ≥ 2` such that `q^m ≤ qm_max`.
pub fn field_shapes(qm_max: u64) -> Vec<(u64, u32, u32)> {
    let mut shapes = Vec::new();
    for p in 2..=qm_max {
        if !crate::numtheory::is_prime_u64(p) {
            continue;
        }
        if p * p > qm_max {
            break;
        }
        let mut k = 1u32;
        loop {
            let q = p.checked_pow(k);
            let Some(q) = q else { break };
            if q.checked_pow(2).is_none_or(|v| v > qm_max) {
                break;
            }
            let mut m = 2u32;
            while q.checked_pow(m).is_some_and(|v| v <= qm_max) {
                shapes.push((p, k, m));
                m += 1;
            }
            k += 1;
        }
    }
    shapes.sort_by_key(|&(p, k, m)| (p.pow(k * m), p, k));
    shapes
}

struct FieldAudit {
    checks: BTreeMap<&'static str, u64>,
    violations: Vec<AuditRecord>,
    summary: Value,
}

/// Run every audit kind across all nonprincipal characters (and character
/// pairs) of one field, with test polynomials `x`, `x+1`, and the default
/// quadratic.
fn audit_field(p: u64, k: u32, m: u32) -> Result<FieldAudit> {
    let ctx = build_context(p, k, m)?;
    let sys = build_system(&ctx, None, vec![0; m as usize])?;
    let f = Quadratic::default_for(&ctx);
    let n = ctx.group_order();
    let table = ctx.unity_table();

    let x = AuditPoly::linear(&ctx, ctx.zero());
    let x1 = AuditPoly::linear(&ctx, ctx.one());
    let (fq, _scalar) = AuditPoly::from_quadratic(&ctx, &f)?;
    let singles = [&x, &x1, &fq];

    let mut checks: BTreeMap<&'static str, u64> = BTreeMap::new();
    let mut violations = Vec::new();

    let fft = FftPlanner::new().plan_fft(n as usize, FftDirection::Inverse);

    let transform = |buckets: Vec<Complex64>| -> Vec<Complex64> {
        let mut buf = buckets;
        fft.process(&mut buf);
        buf
    };

    // Bucket dlog(g(λ)) over a domain; entries with g(λ) = 0 are skipped,
    // matching χ(0) = 0.
    let bucket_counts =
        |dom: &mut dyn Iterator<Item = FieldElement>, g: &AuditPoly| -> Vec<Complex64> {
            let mut b = vec![Complex64::new(0.0, 0.0); n as usize];
            for lam in dom {
                let v = g.eval(&ctx, &lam);
                if !ctx.is_zero(&v) {
                    let u = ctx.discrete_log(&v).unwrap() as usize;
                    b[u] += Complex64::new(1.0, 0.0);
                }
            }
            b
        };

    // Complete-sum Weil bound, all nonprincipal characters, each test poly.
    for g in singles {
        let freqs = transform(bucket_counts(&mut ctx.elements(), g));
        let bound = (g.distinct_roots() as f64 - 1.0) * qm_half(&ctx);
        for t in 1..n as usize {
            *checks.entry("weil_single").or_default() += 1;
            let lhs = freqs[t].norm();
            if lhs > bound + SUM_TOLERANCE {
                violations.push(AuditRecord {
                    kind: "weil_single",
                    parameters: json!({"q": ctx.q(), "m": m, "chi": t, "g": g.label()}),
                    lhs,
                    bound,
                    pass: false,
                });
            }
        }
    }

    // Avoiding-set bound (refined and coarse), all nonprincipal characters.
    {
        let ident = AuditPoly::linear(&ctx, ctx.zero());
        let freqs = transform(bucket_counts(&mut sys.avoiding_iter(&ctx), &ident));
        let delta = refined_avoiding_bound(ctx.q(), m);
        let coarse = coarse_avoiding_bound(ctx.q(), m);
        for t in 1..n as usize {
            *checks.entry("avoiding").or_default() += 1;
            let lhs = freqs[t].norm();
            if lhs > delta + SUM_TOLERANCE || delta > coarse + SUM_TOLERANCE {
                violations.push(AuditRecord {
                    kind: "avoiding",
                    parameters: json!({"q": ctx.q(), "m": m, "chi": t, "coarse": coarse}),
                    lhs,
                    bound: delta,
                    pass: false,
                });
            }
        }
    }

    // Incomplete-sum bound over each hyperplane, each test poly.
    let qm1 = (ctx.q() as f64).powi(m as i32 - 1);
    for j in 0..m as usize {
        for g in singles {
            let freqs = transform(bucket_counts(&mut sys.hyperplane_iter(&ctx, j), g));
            let bound = (g.distinct_roots() as f64 * qm1 - 1.0) / qm1 * qm_half(&ctx);
            for t in 1..n as usize {
                *checks.entry("hyperplane").or_default() += 1;
                let lhs = freqs[t].norm();
                if lhs > bound + SUM_TOLERANCE {
                    violations.push(AuditRecord {
                        kind: "hyperplane",
                        parameters: json!({"q": ctx.q(), "m": m, "chi": t, "g": g.label(), "hyperplane": j}),
                        lhs,
                        bound,
                        pass: false,
                    });
                }
            }
        }
    }

    // af1 over the avoiding set. The test polynomials are squarefree, so the
    // power-freeness hypothesis holds for every character order.
    for g in singles {
        let freqs = transform(bucket_counts(&mut sys.avoiding_iter(&ctx), g));
        let bound = g.degree() as f64 * (1u64 << m) as f64 * qm_half(&ctx);
        for t in 1..n as usize {
            *checks.entry("af1").or_default() += 1;
            let lhs = freqs[t].norm();
            if lhs > bound + SUM_TOLERANCE {
                violations.push(AuditRecord {
                    kind: "af1",
                    parameters: json!({"q": ctx.q(), "m": m, "chi": t, "g": g.label()}),
                    lhs,
                    bound,
                    pass: false,
                });
            }
        }
    }

    // Character pairs: full-field coprime-pair bound and af2 over S_c^*.
    // For fixed χ₂ the whole χ₁ row is one DFT of ω^{t₂·dlog g₂(λ)} bucketed
    // by dlog g₁(λ).
    let coprime_pairs: Vec<(&AuditPoly, &AuditPoly)> = vec![(&x, &x1), (&x, &fq), (&x1, &fq)];
    for (ga, gb) in &coprime_pairs {
        let arith = ctx.arith();
        let g = poly::gcd(&arith, &ga.coeffs, &gb.coeffs);
        assert_eq!(
            poly::degree(&g),
            Some(0),
            "test polynomials must stay coprime"
        );
    }

    let pair_logs = |dom: &mut dyn Iterator<Item = FieldElement>,
                     ga: &AuditPoly,
                     gb: &AuditPoly|
     -> Vec<(u64, u64)> {
        let mut out = Vec::new();
        for lam in dom {
            let va = ga.eval(&ctx, &lam);
            let vb = gb.eval(&ctx, &lam);
            if !ctx.is_zero(&va) && !ctx.is_zero(&vb) {
                out.push((
                    ctx.discrete_log(&va).unwrap(),
                    ctx.discrete_log(&vb).unwrap(),
                ));
            }
        }
        out
    };

    let pair_grid_max = |logs: &[(u64, u64)],
                         bound: f64,
                         strict: bool,
                         kind: &'static str,
                         ga: &AuditPoly,
                         gb: &AuditPoly,
                         checks: &mut BTreeMap<&'static str, u64>,
                         violations: &mut Vec<AuditRecord>| {
        let rows: Vec<(usize, Vec<(usize, f64)>)> = (1..n)
            .into_par_iter()
            .map(|t2| {
                let mut buf = vec![Complex64::new(0.0, 0.0); n as usize];
                for &(ua, ub) in logs {
                    buf[ua as usize] += table[(t2 as u128 * ub as u128 % n as u128) as usize];
                }
                fft.process(&mut buf);
                let bad: Vec<(usize, f64)> = (1..n as usize)
                    .filter_map(|t1| {
                        let lhs = buf[t1].norm();
                        let viol = if strict {
                            lhs >= bound
                        } else {
                            lhs > bound + SUM_TOLERANCE
                        };
                        viol.then_some((t1, lhs))
                    })
                    .collect();
                (t2 as usize, bad)
            })
            .collect();
        *checks.entry(kind).or_default() += (n - 1) * (n - 1);
        for (t2, bad) in rows {
            for (t1, lhs) in bad {
                violations.push(AuditRecord {
                    kind,
                    parameters: json!({
                        "q": ctx.q(), "m": m, "chi1": t1, "chi2": t2,
                        "g1": ga.label(), "g2": gb.label(),
                    }),
                    lhs,
                    bound,
                    pass: false,
                });
            }
        }
    };

    for (ga, gb) in &coprime_pairs {
        let full = pair_logs(&mut ctx.elements(), ga, gb);
        let bound_pair = (ga.squarefree_degree() + gb.squarefree_degree()) as f64 - 1.0;
        pair_grid_max(
            &full,
            bound_pair * qm_half(&ctx),
            false,
            "weil_pair",
            ga,
            gb,
            &mut checks,
            &mut violations,
        );
        let avoid = pair_logs(&mut sys.avoiding_iter(&ctx), ga, gb);
        let bound_af2 = (ga.squarefree_degree() + gb.squarefree_degree()) as f64
            * (1u64 << m) as f64
            * qm_half(&ctx);
        pair_grid_max(
            &avoid,
            bound_af2,
            true,
            "af2",
            ga,
            gb,
            &mut checks,
            &mut violations,
        );
    }

    // Cross-check a few grid entries against the direct-summation ops.
    {
        let chi1 = Character::new(&ctx, 1)?;
        let chi2 = Character::new(&ctx, n - 1)?;
        let direct = audit_weil_pair(&ctx, chi1, chi2, &x, &fq)?;
        let logs = pair_logs(&mut ctx.elements(), &x, &fq);
        let mut buf = vec![Complex64::new(0.0, 0.0); n as usize];
        for &(ua, ub) in &logs {
            buf[ua as usize] += table[((n - 1) as u128 * ub as u128 % n as u128) as usize];
        }
        fft.process(&mut buf);
        let grid_lhs = buf[1].norm();
        *checks.entry("crosscheck").or_default() += 1;
        if (grid_lhs - direct.lhs).abs() > 1e-7 * (n as f64) {
            violations.push(AuditRecord {
                kind: "crosscheck",
                parameters: json!({"q": ctx.q(), "m": m, "grid": grid_lhs, "direct": direct.lhs}),
                lhs: (grid_lhs - direct.lhs).abs(),
                bound: 1e-7 * n as f64,
                pass: false,
            });
        }
    }

    let total: u64 = checks.values().sum();
    let summary = json!({
        "p": p, "k": k, "m": m, "q": ctx.q(), "qm": ctx.qm(),
        "checks": total,
        "violations": violations.len(),
    });
    Ok(FieldAudit {
        checks,
        violations,
        summary,
    })
}

/// Audit every bound across all fields with `q^m ≤ qm_max`. Fields run in
/// parallel; reports merge in `(q^m, p, k)` order so output is deterministic.
pub fn audit_sweep(qm_max: u64, workers: usize) -> Result<SweepReport> {
    if qm_max < 4 {
        return Err(Error::invalid("qm_max must be at least 4"));
    }
    let shapes = field_shapes(qm_max);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    let results: Vec<(usize, Result<FieldAudit>)> = pool.install(|| {
        shapes
            .par_iter()
            .enumerate()
            .map(|(i, &(p, k, m))| (i, audit_field(p, k, m)))
            .collect()
    });
    let mut ordered: Vec<(usize, Result<FieldAudit>)> = results;
    ordered.sort_by_key(|(i, _)| *i);

    let mut checks_by_kind: BTreeMap<&'static str, u64> = BTreeMap::new();
    let mut violations = Vec::new();
    let mut violation_count = 0u64;
    let mut fields = Vec::new();
    for (_, r) in ordered {
        let fa = r?;
        for (k, v) in fa.checks {
            *checks_by_kind.entry(k).or_default() += v;
        }
        violation_count += fa.violations.len() as u64;
        for v in fa.violations {
            if violations.len() < 100 {
                violations.push(v);
            }
        }
        fields.push(fa.summary);
    }
    Ok(SweepReport {
        qm_max,
        field_count: fields.len(),
        total_checks: checks_by_kind.values().sum(),
        checks_by_kind,
        violations,
        violation_count,
        fields,
    })
}

impl SweepReport {
    pub fn to_json(&self) -> Value {
        json!({
            "qm_max": self.qm_max,
            "field_count": self.field_count,
            "total_checks": self.total_checks,
            "checks_by_kind": self.checks_by_kind.iter().map(|(k, v)| (k.to_string(), v)).collect::<BTreeMap<String, &u64>>(),
            "violation_count": self.violation_count,
            "violations": self.violations.iter().map(|v| v.to_json()).collect::<Vec<_>>(),
            "fields": self.fields,
            // the exact bound formulas each check enforces
            "bound_definitions": {
                "weil_single": "(d-1) * q^(m/2)",
                "weil_pair": "(k1+k2-1) * q^(m/2)",
                "hyperplane": "(d*q^(m-1) - 1)/q^(m-1) * q^(m/2)",
                "avoiding": "sum_{i=0}^{m-1} C(m,i) * q^min(i, m/2), itself <= (2^m-1) * q^(m/2)",
                "af1": "k * 2^m * q^(m/2)",
                "af2": "(k1+k2) * 2^m * q^(m/2), strict",
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::characters_of_order;

    fn f9() -> (FieldContext, HyperplaneSystem, Quadratic) {
        let ctx = build_context(3, 1, 2).unwrap();
        let sys = build_system(&ctx, None, vec![0, 0]).unwrap();
        let f = Quadratic::default_for(&ctx);
        (ctx, sys, f)
    }

    #[test]
    fn weil_single_examples() {
        let (ctx, _, f) = f9();
        // g = x: the complete sum is orthogonality, lhs = 0 with bound 0
        let x = AuditPoly::linear(&ctx, ctx.zero());
        for t in 1..8 {
            let rec =
                audit_weil_single(&ctx, Character::new(&ctx, t).unwrap(), &x, &ctx.one()).unwrap();
            assert!(rec.pass, "t = {t}: lhs {} bound {}", rec.lhs, rec.bound);
            assert!(rec.lhs < 1e-9);
        }
        // the default quadratic has d = 2, bound q^{m/2} = 3
        let (gq, scalar) = AuditPoly::from_quadratic(&ctx, &f).unwrap();
        let chi2 = characters_of_order(&ctx, 2).unwrap()[0];
        let rec = audit_weil_single(&ctx, chi2, &gq, &scalar).unwrap();
        assert!(rec.pass);
        assert!((rec.bound - 3.0).abs() < 1e-12);
        // principal character rejected
        assert!(audit_weil_single(&ctx, Character::principal(), &x, &ctx.one()).is_err());
    }

    #[test]
    fn weil_pair_examples() {
        let (ctx, _, f) = f9();
        let x = AuditPoly::linear(&ctx, ctx.zero());
        let x1 = AuditPoly::linear(&ctx, ctx.one());
        let (gq, _) = AuditPoly::from_quadratic(&ctx, &f).unwrap();
        for t1 in 1..8 {
            for t2 in 1..8 {
                let c1 = Character::new(&ctx, t1).unwrap();
                let c2 = Character::new(&ctx, t2).unwrap();
                let rec = audit_weil_pair(&ctx, c1, c2, &x, &x1).unwrap();
                assert!(rec.pass && rec.bound == 3.0, "x,x+1 t1={t1} t2={t2}");
                let rec = audit_weil_pair(&ctx, c1, c2, &x, &gq).unwrap();
                assert!(
                    rec.pass,
                    "x,f t1={t1} t2={t2}: {} vs {}",
                    rec.lhs, rec.bound
                );
            }
        }
        // principal χ2 rejected
        let c1 = Character::new(&ctx, 1).unwrap();
        assert!(audit_weil_pair(&ctx, c1, Character::principal(), &x, &x1).is_err());
        // non-coprime pair rejected
        assert!(audit_weil_pair(&ctx, c1, c1, &x, &x).is_err());
    }

    #[test]
    fn hyperplane_example_f3_line() {
        let (ctx, sys, _) = f9();
        // A_2 (index 1) is F_3 itself; χ of order 8; g = x; bound (1·3−1)/3·3 = 2
        let x = AuditPoly::linear(&ctx, ctx.zero());
        let chi8 = characters_of_order(&ctx, 8).unwrap()[0];
        let rec = audit_hyperplane_sum(&ctx, &sys, chi8, &x, &ctx.one(), 1).unwrap();
        assert!((rec.bound - 2.0).abs() < 1e-12);
        assert!(rec.pass, "lhs {}", rec.lhs);
        // degree-0 polynomial rejected: constants are not admitted shapes
        let (ctx2, sys2, _) = f9();
        let err = audit_af1(&ctx2, &sys2, chi8, &[ctx2.one()]);
        assert!(err.is_err());
    }

    #[test]
    fn avoiding_examples() {
        let (ctx, sys, _) = f9();
        for t in 1..8 {
            let rec = audit_avoiding_sum(&ctx, &sys, Character::new(&ctx, t).unwrap()).unwrap();
            assert!(rec.pass, "t = {t}");
            assert!((rec.refined_bound - 7.0).abs() < 1e-12);
            assert!((rec.coarse - 9.0).abs() < 1e-12);
        }
        assert!(audit_avoiding_sum(&ctx, &sys, Character::principal()).is_err());
    }

    #[test]
    fn af1_af2_examples() {
        let (ctx, sys, f) = f9();
        let fp: Vec<FieldElement> = vec![f.c.clone(), f.b.clone(), f.a.clone()];
        let x: Vec<FieldElement> = vec![ctx.zero(), ctx.one()];
        for t in 1..8 {
            let chi = Character::new(&ctx, t).unwrap();
            let rec = audit_af1(&ctx, &sys, chi, &fp).unwrap();
            assert!(rec.pass && (rec.bound - 24.0).abs() < 1e-9, "af1 t={t}");
        }
        for t1 in 1..8 {
            for t2 in 1..8 {
                let c1 = Character::new(&ctx, t1).unwrap();
                let c2 = Character::new(&ctx, t2).unwrap();
                let rec = audit_af2(&ctx, &sys, c1, c2, &x, &fp).unwrap();
                assert!(rec.pass && (rec.bound - 36.0).abs() < 1e-9, "af2 {t1},{t2}");
            }
        }
        // (x+1)^{ord χ} is rejected by power-freeness with the decomposition shown
        let chi = characters_of_order(&ctx, 2).unwrap()[0];
        let x1 = vec![ctx.one(), ctx.one()];
        let sq = {
            let arith = ctx.arith();
            poly::mul(&arith, &x1, &x1)
        };
        let err = audit_af1(&ctx, &sys, chi, &sq).unwrap_err();
        assert!(err.to_string().contains("exact power"), "{err}");
    }

    #[test]
    fn small_sweep_clean() {
        let report = audit_sweep(100, 2).unwrap();
        assert!(report.field_count >= 8);
        assert_eq!(
            report.violation_count, 0,
            "violations: {:?}",
            report.violations
        );
        assert!(report.total_checks > 10_000);
    }

    // The DFT row evaluation used by the sweep must agree with the direct
    // summation ops on the whole character-pair grid.
    #[test]
    fn fft_grid_matches_direct_pair_sums() {
        let (ctx, sys, f) = f9();
        let n = ctx.group_order();
        let table = ctx.unity_table();
        let x = AuditPoly::linear(&ctx, ctx.zero());
        let (fq, _) = AuditPoly::from_quadratic(&ctx, &f).unwrap();
        let fft = FftPlanner::new().plan_fft(n as usize, FftDirection::Inverse);
        for (domain_avoiding, strictly) in [(false, false), (true, true)] {
            let mut logs = Vec::new();
            let mut collect = |lam: FieldElement| {
                let va = x.eval(&ctx, &lam);
                let vb = fq.eval(&ctx, &lam);
                if !ctx.is_zero(&va) && !ctx.is_zero(&vb) {
                    logs.push((
                        ctx.discrete_log(&va).unwrap(),
                        ctx.discrete_log(&vb).unwrap(),
                    ));
                }
            };
            if domain_avoiding {
                sys.avoiding_iter(&ctx).for_each(&mut collect);
            } else {
                ctx.elements().for_each(&mut collect);
            }
            for t2 in 1..n {
                let mut buf = vec![Complex64::new(0.0, 0.0); n as usize];
                for &(ua, ub) in &logs {
                    buf[ua as usize] += table[(t2 as u128 * ub as u128 % n as u128) as usize];
                }
                fft.process(&mut buf);
                for t1 in 1..n {
                    let c1 = Character::new(&ctx, t1).unwrap();
                    let c2 = Character::new(&ctx, t2).unwrap();
                    let direct = if strictly {
                        let fp = vec![f.c.clone(), f.b.clone(), f.a.clone()];
                        let xs = vec![ctx.zero(), ctx.one()];
                        audit_af2(&ctx, &sys, c1, c2, &xs, &fp).unwrap().lhs
                    } else {
                        audit_weil_pair(&ctx, c1, c2, &x, &fq).unwrap().lhs
                    };
                    let grid = buf[t1 as usize].norm();
                    assert!(
                        (grid - direct).abs() < 1e-9,
                        "grid {grid} vs direct {direct} at ({t1}, {t2}), avoiding={domain_avoiding}"
                    );
                }
            }
        }
    }
}
