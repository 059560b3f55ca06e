//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//!
//! Every tolerance and runtime budget is pinned in code. Criteria 2 and 3
//! compare recomputation against published reference values that exact
//! evaluation contradicts (see the discrepancy lines those tests print);
//! they assert the stated expectation regardless, so a failure there is the
//! recorded, reproducible mismatch rather than a looser reading of it.

use std::collections::HashMap;
use std::time::Instant;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use ppair::characters::{audits, count_pairs_formula, Quadratic};
use ppair::criteria::{
    self, base_condition_with, exceptional_pairs, table1_report, threshold_for_m,
    REFERENCE_THRESHOLDS,
};
use ppair::finitefield::{build_context, FieldContext};
use ppair::hyperplane::{build_system, subset_intersection_counts, HyperplaneSystem};
use ppair::numtheory::{factor_power_minus_one, w_bound_holds};
use ppair::search::{
    brute_force_dfree_pairs, brute_force_pairs, resolve_pair, verify_witness, SearchConfig,
    SearchMode,
};

fn verdict(n: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE {n} {name}: {} -- {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

fn random_instance(ctx: &FieldContext, rng: &mut ChaCha20Rng) -> (HyperplaneSystem, Quadratic) {
    let constants: Vec<u32> = (0..ctx.m())
        .map(|_| rng.gen_range(0..ctx.q()) as u32)
        .collect();
    let sys = build_system(ctx, None, constants).unwrap();
    let f = loop {
        let a = ctx.element_from_index(rng.gen_range(1..ctx.qm()));
        let b = ctx.element_from_index(rng.gen_range(0..ctx.qm()));
        let c = ctx.element_from_index(rng.gen_range(0..ctx.qm()));
        if let Ok(f) = Quadratic::new(ctx, a, b, c) {
            break f;
        }
    };
    (sys, f)
}

// Criterion 1: reference table reproduction. All 26 lhs columns within 1e-4
// relative, the recomputed delta within 2e-3 on at least 24 rows, and every
// printed-vs-recomputed rhs mismatch listed.
#[test]
fn criterion_1_table_reproduction() {
    let start = Instant::now();
    let t = table1_report().unwrap();
    let elapsed = start.elapsed().as_secs_f64();

    let lhs_ok = t.lhs_matches == t.rows && t.rows == 26;
    let delta_ok = t.delta_matches >= 24;
    // every rhs mismatch must surface in the discrepancy list
    let all_rhs_listed = t.checks.iter().filter(|c| !c.rhs_ok).all(|c| {
        t.discrepancies
            .iter()
            .any(|d| d.contains(&format!("({}, {})", c.row.q, c.row.m)) && d.contains("rhs"))
    });
    // the known slip row must be flagged
    let slip_flagged = t
        .discrepancies
        .iter()
        .any(|d| d.contains("(23, 5)") && d.contains("Delta"));
    let time_ok = elapsed <= 300.0;
    let pass = lhs_ok && delta_ok && all_rhs_listed && slip_flagged && time_ok;
    verdict(
        1,
        "table reproduction",
        pass,
        &format!(
            "lhs {}/26, delta {}/26, rhs mismatches listed {} ({} rows), known slip flagged {}, {:.1}s",
            t.lhs_matches, t.delta_matches, all_rhs_listed, t.rhs_mismatches, slip_flagged, elapsed
        ),
    );
    assert!(pass);
}

// Criterion 2: asymptotic thresholds within 5% of the published reference
// values. Exact bisection of the stated predicate lands elsewhere (m = 2 off
// by ~7%, m = 3 by ~99%, m = 4 by ~29%); the assertion keeps the stated
// tolerance and therefore records the mismatch as a failure.
#[test]
fn criterion_2_threshold_reproduction() {
    let start = Instant::now();
    let mut all_within = true;
    let mut detail = String::new();
    for (m, reference) in REFERENCE_THRESHOLDS {
        let computed = threshold_for_m(m).unwrap();
        let rel = (computed - reference).abs() / reference;
        detail.push_str(&format!(
            "m={m}: {computed:.5e} vs {reference:.5e} ({:.1}%); ",
            rel * 100.0
        ));
        if rel > 0.05 {
            all_within = false;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let time_ok = elapsed <= 60.0;
    detail.push_str(&format!("{elapsed:.1}s"));
    verdict(2, "threshold reproduction", all_within && time_ok, &detail);
    assert!(time_ok, "threshold runtime exceeded one minute");
    assert!(
        all_within,
        "thresholds diverge from the published reference values: {detail}"
    );
}

// Criterion 3: every bundled exceptional pair fails the base condition with
// zero false passes. Exact evaluation finds one printed pair, (17, 30), that
// actually satisfies the condition (omega(17^30 - 1) = 12, so W = 4096 and
// lhs ~ 4.3e8 > rhs ~ 5.0e7); the assertion keeps the stated expectation.
#[test]
fn criterion_3_exceptional_list() {
    let start = Instant::now();
    let report = criteria::exceptional_report(false).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let time_ok = elapsed <= 600.0;
    let pass = report.false_passes.is_empty() && time_ok;
    verdict(
        3,
        "exceptional list consistency",
        pass,
        &format!(
            "{} pairs, false passes {:?}, {elapsed:.1}s",
            report.rows.len(),
            report.false_passes
        ),
    );
    assert!(time_ok, "exceptional list runtime exceeded ten minutes");
    assert!(
        report.false_passes.is_empty(),
        "printed pairs passing the base condition: {:?}",
        report.false_passes
    );
}

// Criterion 4: oracle equivalence between the character formula and the
// brute-force count, across eight small fields, three random quadratics and
// two random constant vectors each.
#[test]
fn criterion_4_oracle_equivalence() {
    let start = Instant::now();
    let fields = [
        (3u64, 1u32, 2u32),
        (5, 1, 2),
        (7, 1, 2),
        (3, 2, 2),
        (11, 1, 2),
        (3, 1, 3),
        (5, 1, 3),
        (3, 1, 4),
    ];
    let mut rng = ChaCha20Rng::seed_from_u64(0x70726d70616972);
    let mut cases = 0u32;
    let mut max_residual = 0.0f64;
    for (p, k, m) in fields {
        let ctx = build_context(p, k, m).unwrap();
        let n = ctx.group_order();
        for _ in 0..3 {
            // fresh f per round, two c vectors each
            for _ in 0..2 {
                let (sys, f) = random_instance(&ctx, &mut rng);
                let formula = count_pairs_formula(&ctx, &sys, &f, n, n).unwrap();
                let cfg = SearchConfig {
                    mode: SearchMode::Proof,
                    ..Default::default()
                };
                let brute = brute_force_pairs(&ctx, &sys, &f, &cfg).unwrap();
                assert_eq!(
                    formula.rounded as u64,
                    brute.proof_count,
                    "q^m = {} f = {} c = {:?}",
                    ctx.qm(),
                    f.render(&ctx),
                    sys.constants()
                );
                assert!(
                    formula.residual < 1e-3,
                    "residual {} at q^m = {}",
                    formula.residual,
                    ctx.qm()
                );
                max_residual = max_residual.max(formula.residual);
                cases += 1;
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = elapsed <= 600.0;
    verdict(
        4,
        "oracle equivalence",
        pass,
        &format!("{cases} cases, max residual {max_residual:.2e}, {elapsed:.1}s"),
    );
    assert!(pass);
}

// Criterion 5: the full bound audit over all fields with q^m <= 2000, all
// nonprincipal characters and character pairs, zero violations.
#[test]
fn criterion_5_bound_audit() {
    let start = Instant::now();
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let report = audits::audit_sweep(2000, workers).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let time_ok = elapsed <= 900.0;
    let pass = report.violation_count == 0 && time_ok;
    verdict(
        5,
        "bound audit",
        pass,
        &format!(
            "{} fields, {} checks, {} violations, {elapsed:.1}s",
            report.field_count, report.total_checks, report.violation_count
        ),
    );
    assert!(time_ok);
    assert_eq!(
        report.violation_count, 0,
        "violations: {:?}",
        report.violations
    );
}

// Criterion 6: the sieving inequality holds numerically for every admissible
// split of the distinct primes of q^m − 1, on every field with q^m <= 2000,
// with all P(·,·) brute-forced.
#[test]
fn criterion_6_sieving_inequality() {
    let start = Instant::now();
    let mut splits_checked = 0u64;
    for (p, k, m) in audits::field_shapes(2000) {
        let ctx = build_context(p, k, m).unwrap();
        let sys = build_system(&ctx, None, vec![0; m as usize]).unwrap();
        let f = Quadratic::default_for(&ctx);
        let primes = ctx.order_primes().to_vec();
        let n = ctx.group_order();
        let mut cache: HashMap<(u64, u64), i64> = HashMap::new();
        let pval = |d1: u64, d2: u64, cache: &mut HashMap<(u64, u64), i64>| -> i64 {
            *cache
                .entry((d1, d2))
                .or_insert_with(|| brute_force_dfree_pairs(&ctx, &sys, &f, d1, d2).unwrap() as i64)
        };
        let total = pval(n, n, &mut cache);
        let omega = primes.len();
        for mask in 0u32..(1 << omega) {
            // mask selects the sieving primes; the rest form the core e
            let sieving: Vec<u64> = (0..omega)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| primes[i])
                .collect();
            let core: Vec<u64> = (0..omega)
                .filter(|i| mask & (1 << i) == 0)
                .map(|i| primes[i])
                .collect();
            let e: u64 = core.iter().product();
            let s = sieving.len() as i64;
            let mut rhs: i64 = -(2 * s - 1) * pval(e, e, &mut cache);
            for &pi in &sieving {
                rhs += pval(pi * e, e, &mut cache);
                rhs += pval(e, pi * e, &mut cache);
            }
            assert!(
                total >= rhs,
                "sieving inequality violated: q^m = {}, e = {e}, sieving {sieving:?}: {total} < {rhs}",
                ctx.qm()
            );
            splits_checked += 1;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = elapsed <= 900.0;
    verdict(
        6,
        "sieving inequality",
        pass,
        &format!("{splits_checked} splits, zero violations, {elapsed:.1}s"),
    );
    assert!(pass);
}

// Criterion 7: the squarefree-divisor growth bound holds for every
// 3 <= n <= 10^6.
#[test]
fn criterion_7_w_bound_sweep() {
    use rayon::prelude::*;
    let start = Instant::now();
    let failures: Vec<u64> = (3u64..=1_000_000)
        .into_par_iter()
        .filter(|&n| !w_bound_holds(&BigUint::from(n)).unwrap())
        .collect();
    let elapsed = start.elapsed().as_secs_f64();
    let time_ok = elapsed <= 120.0;
    let pass = failures.is_empty() && time_ok;
    verdict(
        7,
        "squarefree-divisor bound sweep",
        pass,
        &format!(
            "10^6 − 2 evaluations, failures {:?}, {elapsed:.1}s",
            failures
        ),
    );
    assert!(time_ok, "w-bound sweep exceeded two minutes");
    assert!(failures.is_empty());
}

// Criterion 8: structural counts. |S_c^*| = (q−1)^m, and every subset of
// hyperplanes intersects in exactly q^{m−|J|} elements, exhaustively for all
// fields with q^m <= 10^4 and five random constant vectors each.
#[test]
fn criterion_8_structural_counts() {
    let start = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(0x68797065726c);
    let mut fields = 0u32;
    for (p, k, m) in audits::field_shapes(10_000) {
        let ctx = build_context(p, k, m).unwrap();
        fields += 1;
        for _ in 0..5 {
            let constants: Vec<u32> = (0..ctx.m())
                .map(|_| rng.gen_range(0..ctx.q()) as u32)
                .collect();
            let sys = build_system(&ctx, None, constants).unwrap();
            let count = sys.avoiding_iter(&ctx).count() as u64;
            assert_eq!(
                count,
                (ctx.q() - 1).pow(ctx.m()),
                "avoiding count at q^m={}",
                ctx.qm()
            );
            let counts = subset_intersection_counts(&ctx, &sys);
            for (mask, &c) in counts.iter().enumerate() {
                let size = mask.count_ones();
                assert_eq!(
                    c,
                    ctx.q().pow(ctx.m() - size),
                    "general position at q^m={} mask={mask:b}",
                    ctx.qm()
                );
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = elapsed <= 600.0;
    verdict(
        8,
        "structural counts",
        pass,
        &format!("{fields} fields x 5 constant vectors, {elapsed:.1}s"),
    );
    assert!(pass);
}

// Criterion 9: the (11, 5) pair resolves exhaustively within budget, emits a
// replay-verified witness (or certified zero), and the 4-worker run produces
// a report identical to the single-threaded one.
#[test]
fn criterion_9_resolve_11_5() {
    let start = Instant::now();
    let single_cfg = SearchConfig {
        worker_count: 1,
        ..Default::default()
    };
    let single = resolve_pair(11, 5, None, None, &single_cfg).unwrap();
    let single_elapsed = start.elapsed().as_secs_f64();

    let quad_cfg = SearchConfig {
        worker_count: 4,
        ..Default::default()
    };
    let quad = resolve_pair(11, 5, None, None, &quad_cfg).unwrap();

    let part = single.search.as_ref().expect("exhaustive search ran");
    // replay the emitted witness independently
    let (ctx, sys, f) =
        ppair::search::build_instance(11, 5, None, None, single_cfg.budget).unwrap();
    let witness_ok = match &part.witness {
        Some(w) => verify_witness(&ctx, &sys, &f, w, part.mode).is_ok(),
        None => part.strict_count == 0,
    };
    let identical = single.to_json() == quad.to_json();
    let time_ok = single_elapsed <= 600.0;
    let pass = witness_ok && identical && time_ok;
    verdict(
        9,
        "resolve (11, 5)",
        pass,
        &format!(
            "proof {} strict {} witness_ok {witness_ok} parallel_identical {identical} {single_elapsed:.1}s",
            part.proof_count, part.strict_count
        ),
    );
    assert!(pass);
}

// Supporting check for criterion 3's analysis: the factorization behind the
// (17, 30) false pass, verified through an independent in-test multiply-back.
#[test]
fn exceptional_false_pass_is_genuine() {
    let q = BigUint::from(17u32);
    let f = factor_power_minus_one(&q, 30);
    assert_eq!(f.product(), q.pow(30) - 1u32);
    assert_eq!(f.omega(), 12);
    let base = base_condition_with(&f, &q, 30);
    assert!(
        base.holds,
        "(17, 30) satisfies the base condition under exact evaluation"
    );
    // and it is indeed in the bundled list as printed
    assert!(exceptional_pairs().contains(&(17, 30)));
}
