//! Brute-force enumeration over `S_c^*`: counts and witnesses primitive
//! pairs in both counting conventions, with partitioned parallel execution.
//!
//! The scan is the performance core. Elements are enumerated directly as
//! coordinate vectors (the full field is never filtered), primitivity is
//! tested by order stripping against precomputed `N/p_i` exponents, and the
//! workers own disjoint first-coordinate blocks so counts and witness sets
//! are identical to the single-threaded run.

use serde_json::{json, Value};

use crate::characters::Quadratic;
use crate::finitefield::{FieldContext, FieldElement};
use crate::hyperplane::HyperplaneSystem;
use crate::{Error, Result};

/// Counting convention for a pair `(α, f(α))`.
///
/// `Proof` counts `α ∈ S_c^*` with both `α` and `f(α)` primitive (the
/// quantity the character formula evaluates). `Strict` additionally requires
/// `f(α) ∈ S_c^*`. Every report carries both counts; the mode selects which
/// one drives witnesses and verdicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    Proof,
    Strict,
}

impl SearchMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            SearchMode::Proof => "proof",
            SearchMode::Strict => "strict",
        }
    }
}

impl std::str::FromStr for SearchMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "proof" => Ok(SearchMode::Proof),
            "strict" => Ok(SearchMode::Strict),
            other => Err(Error::invalid(format!(
                "unknown mode '{other}' (proof|strict)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub mode: SearchMode,
    /// Maximum number of field elements the scan may touch.
    pub budget: u64,
    pub worker_count: usize,
    pub witness_limit: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            mode: SearchMode::Strict,
            budget: default_budget(),
            worker_count: std::thread::available_parallelism().map_or(1, |n| n.get()),
            witness_limit: 10,
        }
    }
}

/// Default exhaustive budget; `PPAIR_BUDGET` overrides it.
pub fn default_budget() -> u64 {
    std::env::var("PPAIR_BUDGET")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(10_000_000)
}

/// A replay-verified pair: `α` with `f(α)`, as coefficient vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub alpha: FieldElement,
    pub f_alpha: FieldElement,
}

impl Witness {
    pub fn to_json(&self, ctx: &FieldContext) -> Value {
        json!({
            "alpha": self.alpha.coeffs(),
            "alpha_index": ctx.element_to_index(&self.alpha),
            "f_alpha": self.f_alpha.coeffs(),
            "f_alpha_index": ctx.element_to_index(&self.f_alpha),
            "context": ctx.summary(),
        })
    }
}

/// Outcome of a scan: both convention counts and the leading witnesses of
/// the configured mode, in enumeration order.
#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub proof_count: u64,
    pub strict_count: u64,
    pub witnesses: Vec<Witness>,
    pub mode: SearchMode,
    pub elements_scanned: u64,
}

impl SearchOutcome {
    pub fn count_for_mode(&self) -> u64 {
        match self.mode {
            SearchMode::Proof => self.proof_count,
            SearchMode::Strict => self.strict_count,
        }
    }
}

struct BlockResult {
    proof: u64,
    strict: u64,
    witnesses: Vec<Witness>,
    scanned: u64,
}

fn scan_block(
    ctx: &FieldContext,
    sys: &HyperplaneSystem,
    f: &Quadratic,
    first_values: &[u32],
    mode: SearchMode,
    witness_limit: usize,
) -> Result<BlockResult> {
    let mut res = BlockResult {
        proof: 0,
        strict: 0,
        witnesses: Vec::new(),
        scanned: 0,
    };
    for alpha in sys.avoiding_iter_block(ctx, first_values) {
        res.scanned += 1;
        if ctx.is_zero(&alpha) || !ctx.is_primitive(&alpha)? {
            continue;
        }
        let fa = f.eval(ctx, &alpha);
        if ctx.is_zero(&fa) || !ctx.is_primitive(&fa)? {
            continue;
        }
        res.proof += 1;
        let strict_hit = sys.in_avoiding_set(ctx, &fa);
        if strict_hit {
            res.strict += 1;
        }
        let counts_for_mode = match mode {
            SearchMode::Proof => true,
            SearchMode::Strict => strict_hit,
        };
        if counts_for_mode && res.witnesses.len() < witness_limit {
            res.witnesses.push(Witness { alpha, f_alpha: fa });
        }
    }
    Ok(res)
}

/// Count the primitive pairs over `S_c^*`, exactly. Deterministic: the count
/// and the witness list are independent of `worker_count`.
pub fn brute_force_pairs(
    ctx: &FieldContext,
    sys: &HyperplaneSystem,
    f: &Quadratic,
    config: &SearchConfig,
) -> Result<SearchOutcome> {
    let total = sys.avoiding_count(ctx);
    if total > config.budget {
        return Err(Error::budget(format!(
            "scan of |S_c^*| = {total} exceeds budget {} (set PPAIR_BUDGET to raise)",
            config.budget
        )));
    }
    let first: Vec<u32> = (0..ctx.q() as u32)
        .filter(|&v| v != sys.constants()[0])
        .collect();
    let workers = config.worker_count.clamp(1, first.len().max(1));
    let chunks: Vec<&[u32]> = first.chunks(first.len().div_ceil(workers)).collect();

    let results: Result<Vec<BlockResult>> = if workers == 1 {
        chunks
            .iter()
            .map(|c| scan_block(ctx, sys, f, c, config.mode, config.witness_limit))
            .collect()
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = chunks
                .iter()
                .map(|c| {
                    scope.spawn(move || {
                        scan_block(ctx, sys, f, c, config.mode, config.witness_limit)
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("scan worker panicked"))
                .collect()
        })
    };

    let mut outcome = SearchOutcome {
        proof_count: 0,
        strict_count: 0,
        witnesses: Vec::new(),
        mode: config.mode,
        elements_scanned: 0,
    };
    for block in results? {
        outcome.proof_count += block.proof;
        outcome.strict_count += block.strict;
        outcome.elements_scanned += block.scanned;
        for w in block.witnesses {
            if outcome.witnesses.len() < config.witness_limit {
                outcome.witnesses.push(w);
            }
        }
    }
    // Replay every emitted witness before reporting it.
    for w in &outcome.witnesses {
        verify_witness(ctx, sys, f, w, config.mode)?;
    }
    Ok(outcome)
}

/// Independent replay of a witness against the definitions.
pub fn verify_witness(
    ctx: &FieldContext,
    sys: &HyperplaneSystem,
    f: &Quadratic,
    w: &Witness,
    mode: SearchMode,
) -> Result<()> {
    let fail = |msg: &str| Err(Error::invalid(format!("witness replay failed: {msg}")));
    if f.eval(ctx, &w.alpha) != w.f_alpha {
        return fail("f(alpha) mismatch");
    }
    if !sys.in_avoiding_set(ctx, &w.alpha) {
        return fail("alpha not in the avoiding set");
    }
    if ctx.is_zero(&w.alpha) || !ctx.is_primitive(&w.alpha)? {
        return fail("alpha not primitive");
    }
    if ctx.is_zero(&w.f_alpha) || !ctx.is_primitive(&w.f_alpha)? {
        return fail("f(alpha) not primitive");
    }
    if mode == SearchMode::Strict && !sys.in_avoiding_set(ctx, &w.f_alpha) {
        return fail("f(alpha) not in the avoiding set (strict mode)");
    }
    Ok(())
}

/// `P(d₁, d₂)`: the number of `α ∈ S_c^*` with `α` being `d₁`-free and
/// `f(α)` nonzero and `d₂`-free.
pub fn brute_force_dfree_pairs(
    ctx: &FieldContext,
    sys: &HyperplaneSystem,
    f: &Quadratic,
    d1: u64,
    d2: u64,
) -> Result<u64> {
    let n = ctx.group_order();
    for d in [d1, d2] {
        if d == 0 || !n.is_multiple_of(d) {
            return Err(Error::pre(format!("d = {d} does not divide N = {n}")));
        }
    }
    let mut count = 0u64;
    for alpha in sys.avoiding_iter(ctx) {
        if ctx.is_zero(&alpha) || !ctx.is_efree(&alpha, d1)? {
            continue;
        }
        let fa = f.eval(ctx, &alpha);
        if ctx.is_zero(&fa) || !ctx.is_efree(&fa, d2)? {
            continue;
        }
        count += 1;
    }
    Ok(count)
}

/// End-to-end resolver: build the field and hyperplane system for `(q, m)`,
/// run the scan with the given (or default) quadratic and constants, and
/// produce an exhaustive-method report with a replayed witness or a
/// certified zero count.
pub fn resolve_pair(
    q: u64,
    m: u32,
    f_spec: Option<[u64; 3]>,
    c_spec: Option<Vec<u64>>,
    config: &SearchConfig,
) -> Result<crate::criteria::CriterionReport> {
    resolve_pair_with_basis(q, m, f_spec, c_spec, None, config)
}

pub fn resolve_pair_with_basis(
    q: u64,
    m: u32,
    f_spec: Option<[u64; 3]>,
    c_spec: Option<Vec<u64>>,
    basis_spec: Option<Vec<Vec<u64>>>,
    config: &SearchConfig,
) -> Result<crate::criteria::CriterionReport> {
    let (ctx, sys, f) = build_instance_with_basis(q, m, f_spec, c_spec, basis_spec, config.budget)?;
    let outcome = brute_force_pairs(&ctx, &sys, &f, config)?;
    Ok(crate::criteria::CriterionReport::from_search(
        &ctx, &sys, &f, outcome,
    ))
}

/// Shared instance construction: context, hyperplane system (default
/// constants: all zero), and quadratic (default `x² + x + c₀`).
pub fn build_instance(
    q: u64,
    m: u32,
    f_spec: Option<[u64; 3]>,
    c_spec: Option<Vec<u64>>,
    budget: u64,
) -> Result<(FieldContext, HyperplaneSystem, Quadratic)> {
    build_instance_with_basis(q, m, f_spec, c_spec, None, budget)
}

/// [`build_instance`] with an explicit basis, each element given by its
/// `F_q` coefficient indices in the power basis.
pub fn build_instance_with_basis(
    q: u64,
    m: u32,
    f_spec: Option<[u64; 3]>,
    c_spec: Option<Vec<u64>>,
    basis_spec: Option<Vec<Vec<u64>>>,
    budget: u64,
) -> Result<(FieldContext, HyperplaneSystem, Quadratic)> {
    let qm = (q as u128)
        .checked_pow(m)
        .ok_or_else(|| Error::budget("q^m overflows"))?;
    if qm > budget as u128 {
        return Err(Error::budget(format!(
            "q^m = {qm} exceeds the exhaustive budget {budget} (set PPAIR_BUDGET to raise)"
        )));
    }
    let (p, k) = match crate::numtheory::prime_power(&num_bigint::BigUint::from(q)) {
        Some((p, k)) => (num_traits::ToPrimitive::to_u64(&p).unwrap(), k),
        None => return Err(Error::invalid(format!("q = {q} is not a prime power"))),
    };
    let ctx = crate::finitefield::build_context(p, k, m)?;
    let constants: Vec<u32> = match c_spec {
        None => vec![0; m as usize],
        Some(cs) => {
            if cs.len() != m as usize {
                return Err(Error::invalid(format!(
                    "expected {m} constants, got {}",
                    cs.len()
                )));
            }
            cs.iter()
                .map(|&c| {
                    if c < ctx.q() {
                        Ok(c as u32)
                    } else {
                        Err(Error::invalid(format!(
                            "constant {c} out of range for F_{}",
                            ctx.q()
                        )))
                    }
                })
                .collect::<Result<Vec<u32>>>()?
        }
    };
    let basis = match basis_spec {
        None => None,
        Some(rows) => {
            let mut elems = Vec::with_capacity(rows.len());
            for row in rows {
                let coeffs: Vec<u32> = row
                    .iter()
                    .map(|&v| {
                        if v < ctx.q() {
                            Ok(v as u32)
                        } else {
                            Err(Error::invalid(format!(
                                "basis coefficient {v} out of range for F_{}",
                                ctx.q()
                            )))
                        }
                    })
                    .collect::<Result<Vec<u32>>>()?;
                elems.push(ctx.element_from_coeffs(coeffs)?);
            }
            Some(elems)
        }
    };
    let sys = crate::hyperplane::build_system(&ctx, basis, constants)?;
    let f = match f_spec {
        None => Quadratic::default_for(&ctx),
        Some([a, b, c]) => {
            for v in [a, b, c] {
                if v >= ctx.qm() {
                    return Err(Error::invalid(format!(
                        "coefficient index {v} out of range"
                    )));
                }
            }
            Quadratic::new(
                &ctx,
                ctx.element_from_index(a),
                ctx.element_from_index(b),
                ctx.element_from_index(c),
            )?
        }
    };
    Ok((ctx, sys, f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::count_pairs_formula;
    use crate::finitefield::build_context;
    use crate::hyperplane::build_system;

    fn instance(p: u64, k: u32, m: u32) -> (FieldContext, HyperplaneSystem, Quadratic) {
        let ctx = build_context(p, k, m).unwrap();
        let sys = build_system(&ctx, None, vec![0; m as usize]).unwrap();
        let f = Quadratic::default_for(&ctx);
        (ctx, sys, f)
    }

    #[test]
    fn f9_counts_match_formula() {
        let (ctx, sys, f) = instance(3, 1, 2);
        let cfg = SearchConfig {
            worker_count: 1,
            ..Default::default()
        };
        let out = brute_force_pairs(&ctx, &sys, &f, &cfg).unwrap();
        let formula = count_pairs_formula(&ctx, &sys, &f, 8, 8).unwrap();
        assert_eq!(out.proof_count as i64, formula.rounded);
        assert!(out.strict_count <= out.proof_count);
    }

    #[test]
    fn parallel_equals_single_threaded() {
        let (ctx, sys, f) = instance(5, 1, 3);
        let single = brute_force_pairs(
            &ctx,
            &sys,
            &f,
            &SearchConfig {
                worker_count: 1,
                witness_limit: 100,
                ..Default::default()
            },
        )
        .unwrap();
        let quad = brute_force_pairs(
            &ctx,
            &sys,
            &f,
            &SearchConfig {
                worker_count: 4,
                witness_limit: 100,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(single.proof_count, quad.proof_count);
        assert_eq!(single.strict_count, quad.strict_count);
        assert_eq!(single.witnesses, quad.witnesses);
    }

    #[test]
    fn dfree_pairs_cases() {
        let (ctx, sys, f) = instance(3, 1, 2);
        // d1 = d2 = 1 counts the α with f(α) ≠ 0
        let c11 = brute_force_dfree_pairs(&ctx, &sys, &f, 1, 1).unwrap();
        let direct = sys
            .avoiding_iter(&ctx)
            .filter(|a| !ctx.is_zero(a) && !ctx.is_zero(&f.eval(&ctx, a)))
            .count() as u64;
        assert_eq!(c11, direct);
        // P(N, N) is the proof-mode count
        let cfg = SearchConfig::default();
        let out = brute_force_pairs(&ctx, &sys, &f, &cfg).unwrap();
        assert_eq!(
            brute_force_dfree_pairs(&ctx, &sys, &f, 8, 8).unwrap(),
            out.proof_count
        );
        assert!(brute_force_dfree_pairs(&ctx, &sys, &f, 3, 1).is_err());
    }

    #[test]
    fn witness_replay_and_modes() {
        let (ctx, sys, f) = instance(5, 1, 2);
        for mode in [SearchMode::Proof, SearchMode::Strict] {
            let out = brute_force_pairs(
                &ctx,
                &sys,
                &f,
                &SearchConfig {
                    mode,
                    witness_limit: 1000,
                    ..Default::default()
                },
            )
            .unwrap();
            assert_eq!(out.witnesses.len() as u64, out.count_for_mode());
            for w in &out.witnesses {
                verify_witness(&ctx, &sys, &f, w, mode).unwrap();
            }
        }
    }

    #[test]
    fn budget_refusal() {
        let (ctx, sys, f) = instance(5, 1, 3);
        let cfg = SearchConfig {
            budget: 10,
            ..Default::default()
        };
        assert!(matches!(
            brute_force_pairs(&ctx, &sys, &f, &cfg),
            Err(Error::Budget(_))
        ));
    }

    #[test]
    fn invalid_quadratic_rejected() {
        // b² = 4ac: a = 1, b = 0, c = 0
        let err = resolve_pair(3, 2, Some([1, 0, 0]), None, &SearchConfig::default()).unwrap_err();
        assert!(err.to_string().contains("b^2"), "{err}");
        let err = resolve_pair(3, 2, Some([0, 1, 1]), None, &SearchConfig::default()).unwrap_err();
        assert!(err.to_string().contains("a != 0"), "{err}");
    }

    #[test]
    fn tiny_field_resolves_fast() {
        let report = resolve_pair(3, 2, None, None, &SearchConfig::default()).unwrap();
        let counts = report.search.as_ref().unwrap();
        // zero is a valid certified outcome; the report must still be exhaustive
        assert!(counts.proof_count <= 4);
    }
}
