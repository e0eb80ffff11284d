//! End-to-end acceptance run: one PASS/FAIL line per criterion.

mod common;

use definability::arith::{Factorizer, QuadElem};
use definability::curve::{count_points, CurveContext};
use definability::density::{
    build_w, cyclic_degree_one_density, hasse_check, quadratic_split_density, v_density, v_set, CyclicFieldRule,
    TrendVerdict, VSetConfig,
};
use definability::divmodel::{
    inequality_chain, model_divides, subset_check, subset_construct, ChainInputs, PrimeRule, RingSpec, SubsetBudget,
    SubsetSystemConfig,
};
use definability::eds::{
    estimate_c, growth_rate, growth_verdict, reference_table, verify_cor_div, verify_order_change, verify_square,
    verify_strong_divisibility, ConstantsConfig, EdsConstants, EdsTable, PrimitiveDivisor,
};
use definability::logic::{
    mult_formula, product_oracle, profile, rankonedown_check, reduce_quantifiers, truncated_rings,
    validate_defining_formula, AlphaData, EvalMode, Evaluator, Gamma, Structure, Truth, VerticalConfig,
    VerticalVerdict,
};
use definability::report::Verdict;
use num_bigint::BigUint;
use num_rational::BigRational;
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;
use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::Instant;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn(&mut Shared) -> Outcome);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn err<E: std::fmt::Debug>(e: E) -> String {
    format!("{e:?}")
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn primes(ps: &[u32]) -> BTreeSet<BigUint> {
    ps.iter().map(|&p| BigUint::from(p)).collect()
}

struct Shared {
    table: EdsTable,
    consts: EdsConstants,
}

fn excluded_spec(consts: &EdsConstants) -> RingSpec {
    let mut spec = RingSpec::rational([2, 3], PrimeRule::NoDegreeOneQuadratic { d: -23 });
    for e in &consts.primitive_divisors {
        if let Some(p) = e.divisor.known() {
            spec.exclude.insert(p.clone());
        }
    }
    spec.bad_included = true;
    spec
}

fn ground_truth(s: &mut Shared) -> Outcome {
    let t = &mut s.table;
    ensure(t.x(2).map_err(err)? == rat(129, 100), "x_2")?;
    ensure(t.x(3).map_err(err)? == rat(164323, 29241), "x_3")?;
    for (n, want) in [(1, primes(&[])), (2, primes(&[5])), (3, primes(&[19]))] {
        let (got, complete) = t.sn(n).map_err(err)?;
        ensure(complete && got == want, format!("S_{n} = {got:?}"))?;
    }
    let sq = verify_square(t, 25).map_err(err)?;
    ensure(sq.failures.is_empty(), format!("odd valuations: {:?}", sq.failures))?;
    Ok(format!("x_2, x_3, S_1..S_3 exact; {} denominators with even good-prime valuations", sq.checked))
}

fn order_change(s: &mut Shared) -> Outcome {
    let mut cases = 0;
    for n in 1..=8u64 {
        for p in [3u64, 5, 7] {
            if p * n > 25 {
                continue;
            }
            let r = verify_order_change(&mut s.table, n, p).map_err(err)?;
            ensure(r.failures.is_empty(), format!("n={n}, p={p}: {:?}", r.failures))?;
            cases += r.checked;
        }
    }
    Ok(format!("{cases} prime checks, zero violations"))
}

fn strong_divisibility(s: &mut Shared) -> Outcome {
    let r = verify_strong_divisibility(&mut s.table, 20).map_err(err)?;
    ensure(r.failures.is_empty(), format!("{:?}", r.failures))?;
    Ok(format!("{} pairs, zero violations", r.checked))
}

fn primitive_divisors(s: &mut Shared) -> Outcome {
    let (c, rep) = estimate_c(&mut s.table, 25).map_err(err)?;
    ensure(rep.failures.is_empty(), format!("{:?}", rep.failures))?;
    let cd = verify_cor_div(&mut s.table, &s.consts, 25).map_err(err)?;
    ensure(cd.failures.is_empty(), format!("{:?}", cd.failures))?;
    Ok(format!("C = {c}, {} pairs and {} equivalences, zero violations", rep.checked, cd.checked))
}

fn growth(_: &mut Shared) -> Outcome {
    let mut t = EdsTable::new(CurveContext::growth_reference(), Arc::new(Factorizer::default()));
    let rates = growth_rate(&mut t, 25).map_err(err)?;
    let v = growth_verdict(&rates, 15, 25, 0.10);
    ensure(v.relative_spread < 0.10, format!("spread {:.4}", v.relative_spread))?;
    ensure(v.late_mean_step < v.early_mean_step, format!("steps {:.5} -> {:.5}", v.early_mean_step, v.late_mean_step))?;
    Ok(format!(
        "mean {:.5}, spread {:.4}, mean step {:.5} -> {:.5}",
        v.mean, v.relative_spread, v.early_mean_step, v.late_mean_step
    ))
}

fn divisibility_model(s: &mut Shared) -> Outcome {
    let spec = excluded_spec(&s.consts);
    let mut n = 0;
    for j in 1..=15i64 {
        for k in 1..=15i64 {
            let got = model_divides(&mut s.table, &s.consts, &spec, j, k).map_err(err)?.divides;
            ensure(got == (k % j == 0), format!("j={j}, k={k}: model says {got}"))?;
            n += 1;
        }
    }
    Ok(format!("m0 = {}, {n} pairs agree with j | k", s.consts.m0))
}

fn multiplication(_: &mut Shared) -> Outcome {
    let f = mult_formula();
    let p = profile(&f);
    ensure(p.universal_count == 1, format!("{} universals", p.universal_count))?;
    let r = validate_defining_formula(&f, &["l", "m", "n"], product_oracle, 50).map_err(err)?;
    ensure(r.disagreements.is_empty(), format!("{} disagreements, first {:?}", r.disagreements.len(), r.disagreements.first()))?;
    Ok(format!("1 universal, {} triples agree", r.checked))
}

fn reduction(_: &mut Shared) -> Outcome {
    let alpha = AlphaData::for_sqrt(5, &RingSpec::integers()).map_err(err)?;
    let (k, m) = truncated_rings(5, RingSpec::integers(), Arc::new(Factorizer::default()), 2);
    let sqrt5 = QuadElem::sqrt_d(5).map_err(err)?;
    let mut runner = TestRunner::deterministic();
    let formulas = common::reducible_formula();
    let picks = proptest::sample::select(k.base_domain().to_vec());
    let (mut truths, mut universals) = ([0usize; 2], [0usize; 3]);
    for i in 0..200 {
        let f = formulas.new_tree(&mut runner).map_err(err)?.current();
        let t = picks.new_tree(&mut runner).map_err(err)?.current();
        universals[profile(&f).universal_count] += 1;
        let r = reduce_quantifiers(&f, &Gamma::base_predicate(), &alpha).map_err(err)?;
        ensure(profile(&r.formula).universal_count == 1, format!("#{i}: profile of {}", r.formula))?;
        let want = Evaluator::new(&k, EvalMode::Truncated, &f).map_err(err)?.eval(&[("T", t.clone())]).map_err(err)?;
        let got = Evaluator::new(&m, EvalMode::Truncated, &r.formula)
            .map_err(err)?
            .eval(&[("T", t.clone()), (r.alpha.as_str(), sqrt5.clone())])
            .map_err(err)?;
        ensure(want != Truth::Unknown, format!("#{i}: original undecided: {f}"))?;
        ensure(want == got, format!("#{i}: {f} at T = {t}: original {want:?}, reduced {got:?}"))?;
        truths[(want == Truth::True) as usize] += 1;
    }
    Ok(format!(
        "200 formulas ({}/{}/{} with 0/1/2 universals), profile 1, {} true and {} false, all agree",
        universals[0], universals[1], universals[2], truths[1], truths[0]
    ))
}

fn vertical(s: &mut Shared) -> Outcome {
    let ctx = s.table.ctx().clone();
    let spec = RingSpec::integers();
    let cfg = VerticalConfig::default();
    for k in 1..=20 {
        let r = rankonedown_check(&QuadElem::from_ints(5, k, 0).map_err(err)?, &ctx, &spec, 3, &cfg).map_err(err)?;
        ensure(r.verdict == VerticalVerdict::Accepted { depth: 3 }, format!("u = {k}: {:?}", r.verdict))?;
    }
    let mut certs = vec![];
    for d in [2, 3, 5] {
        let r = rankonedown_check(&QuadElem::sqrt_d(d).map_err(err)?, &ctx, &spec, 3, &cfg).map_err(err)?;
        ensure(r.verdict == VerticalVerdict::Rejected, format!("sqrt {d}: {:?}", r.verdict))?;
        let c = r.certificate.ok_or(format!("sqrt {d}: no certificate"))?;
        certs.push(format!("sqrt {d} at q = {} (delta {})", c.q, c.delta));
    }
    Ok(format!("u = 1..20 accepted at depth 3; rejected {}", certs.join(", ")))
}

fn hasse(s: &mut Shared) -> Outcome {
    let mut n = 0;
    for e in &s.consts.primitive_divisors {
        let ok = match &e.divisor {
            PrimitiveDivisor::Known { p } => hasse_check(e.ell, e.j, p),
            // every prime of an unfactored cofactor exceeds the trial bound
            PrimitiveDivisor::InCofactor { .. } => hasse_check(e.ell, e.j, &BigUint::from(1_000_000u32)),
            _ => continue,
        };
        ensure(ok, format!("l = {}, j = {}: {:?}", e.ell, e.j, e.divisor))?;
        n += 1;
    }
    let ctx = s.table.ctx();
    let mut counted = 0;
    for p in definability::arith::primes_up_to(200) {
        if ctx.is_bad_u64(p) {
            continue;
        }
        let np = count_points(&ctx.curve, p).map_err(err)?;
        let dev = np as i64 - p as i64 - 1;
        ensure((dev * dev) as u64 <= 4 * p, format!("#E(F_{p}) = {np}"))?;
        counted += 1;
    }
    Ok(format!("{n} table entries satisfy l^j < 3p; Hasse bound at {counted} good primes"))
}

fn densities(s: &mut Shared) -> Outcome {
    let q = quadratic_split_density(5, 1_000_000).map_err(err)?;
    ensure((0.45..=0.55).contains(&q.ratio), format!("quadratic {}", q.ratio))?;
    let rule = CyclicFieldRule::new(5, 11).map_err(err)?;
    let c = cyclic_degree_one_density(&rule, 1_000_000);
    ensure((0.17..=0.23).contains(&c.ratio), format!("cyclic {}", c.ratio))?;
    let v = v_set(&mut s.table, &VSetConfig::default()).map_err(err)?;
    let grid = [1_000, 10_000, 100_000];
    let rep = v_density(&v.set, &grid).map_err(err)?;
    ensure(rep.verdict == TrendVerdict::DecreasingTrend, format!("V(P) ratios {:?}", rep.ratios()))?;
    let w = build_w(&rat(1, 4), s.table.ctx(), &v.set, &[], &grid).map_err(err)?;
    ensure(w.meets_target, format!("W density {:?}", w.density.points.last()))?;
    ensure(w.conditions.iter().all(|c| c.holds), format!("{:?}", w.conditions))?;
    let wd = w.density.points.last().map(|p| p.ratio).unwrap_or(0.0);
    Ok(format!(
        "quadratic {:.4}, cyclic {:.4}, V(P) ratios {:?}, W density {:.4} with {:?}",
        q.ratio,
        c.ratio,
        rep.ratios().iter().map(|r| format!("{r:.5}")).collect::<Vec<_>>(),
        wd,
        w.rule
    ))
}

fn subset_system(s: &mut Shared) -> Outcome {
    let mut spec = RingSpec::rational([2, 3], PrimeRule::NoDegreeOneQuadratic { d: -23 });
    spec.exclude.insert(BigUint::from(5u32));
    spec.bad_included = true;
    let cfg = SubsetSystemConfig::default();
    let t = &mut s.table;
    let w = subset_construct(&rat(1, 1), &cfg, t, &spec, &SubsetBudget::default()).map_err(err)?;
    let audit = subset_check(&w, &cfg, t, &spec).map_err(err)?;
    ensure(audit.verdict == Verdict::Pass, format!("{:?}", audit.failed()))?;
    let mut tampers = vec![];
    let mut bad = w.clone();
    bad.y1 = &bad.y1 * rat(7, 1);
    tampers.push((bad, "denominator-shape"));
    let mut bad = w.clone();
    bad.z += 1;
    tampers.push((bad, "multiplication-graph"));
    let mut bad = w.clone();
    bad.t = &bad.t / rat(13, 1);
    tampers.push((bad, "ring-membership"));
    for (bad, name) in &tampers {
        let a = subset_check(bad, &cfg, t, &spec).map_err(err)?;
        ensure(a.failed().contains(name), format!("tamper {name}: failed {:?}", a.failed()))?;
    }
    let n = |v: u64| BigUint::from(v);
    let chain = |j, x, y, e0, c, kappa| {
        inequality_chain(&ChainInputs { j: n(j), x, y: n(y), e0: n(e0), c, r: 2, n: 1, h: 1, kappa })
    };
    let a = chain(2, rat(1, 1), 3, 5, 1, rat(2, 1));
    ensure(
        (a.star_lhs == rat(4, 1), a.star_rhs == rat(18, 1), a.h_value == rat(9, 1)) == (true, true, true)
            && a.one_rhs == rat(306_110_016, 1)
            && a.two_rhs == rat(14_281_868_906_496, 1)
            && a.star
            && a.one
            && !a.two,
        format!("synthetic 1: {a:?}"),
    )?;
    let a = chain(1, rat(1, 1), 2, 100_000, 1, rat(2, 1));
    ensure(
        a.h_vanishes && a.one_rhs == rat(1_048_576, 1) && a.two_rhs == rat(4_294_967_296, 1) && a.forces_integer,
        format!("synthetic 2: {a:?}"),
    )?;
    let a = chain(3, rat(1, 2), 5, 7, 2, rat(3, 2));
    let big = |s: &str| s.parse::<BigRational>().unwrap();
    ensure(
        a.star_rhs == rat(1875, 2)
            && a.h_value == rat(19_600, 1)
            && a.one_rhs == big("3017485141754150390625/4")
            && a.two_rhs == big("59671947383321821689605712890625/16")
            && a.star
            && a.one
            && !a.two,
        format!("synthetic 3: {a:?}"),
    )?;
    Ok(format!("x = 1 tuple (k = {}) passes; 3 tampers named; 3 inequality audits match", w.k))
}

fn main() {
    let start = Instant::now();
    let mut table = reference_table();
    let consts = EdsConstants::compute(&mut table, &ConstantsConfig::default()).map(|(c, _)| c);
    let mut shared = match consts {
        Ok(consts) => Shared { table, consts },
        Err(e) => {
            println!("setup failed: {e:?}");
            std::process::exit(1);
        }
    };
    println!("setup: sequence table and constants in {:.1}s", start.elapsed().as_secs_f64());
    let criteria: [Criterion; 12] = [
        ("sequence ground truth", ground_truth),
        ("order-change law", order_change),
        ("strong divisibility", strong_divisibility),
        ("primitive divisors", primitive_divisors),
        ("denominator growth", growth),
        ("divisibility model", divisibility_model),
        ("multiplication formula", multiplication),
        ("quantifier reduction", reduction),
        ("vertical definability", vertical),
        ("Hasse inequality", hasse),
        ("densities", densities),
        ("subset system", subset_system),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let out = catch_unwind(AssertUnwindSafe(|| run(&mut shared))).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = t0.elapsed().as_secs_f64();
        match out {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.1}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} [{secs:.1}s]", i + 1)
            }
        }
    }
    println!("acceptance: {} of 12 criteria passed in {:.1}s", 12 - failed, start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
