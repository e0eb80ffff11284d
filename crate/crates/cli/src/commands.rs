//! Subcommand handlers. Each returns a verdict and a JSON result.

use crate::cache::{self, DiskCache};
use crate::config::{parse_rational, ToolkitConfig};
use crate::{
    CacheCmd, Command, DensityCmd, EdsCmd, Failure, FormulaCmd, Lemma, ModeArg, ModelCmd, Output, SortArg, Source,
    VerifyArgs, VerticalArgs, VerticalCmd,
};
use definability::arith::{FactorSource, Factorizer, QuadElem};
use definability::curve::CurveContext;
use definability::density::{
    build_w, cyclic_degree_one_density, quadratic_split_density, v_density, v_set, CyclicFieldRule, DensityError,
    TrendVerdict, VSetConfig, QUADRATIC_AUX,
};
use definability::divmodel::{
    check_exclusions, model_divides, subset_check, subset_construct, ExponentMode, ModelError, PrimeRule, RingSpec,
    SubsetBudget, SubsetError, SubsetSystemConfig,
};
use definability::eds::{
    estimate_c, growth_rate, growth_verdict, verify_m1, verify_order_change, verify_square,
    verify_strong_divisibility, verify_subgroup, ConstantsConfig, EdsConstants, EdsError, EdsTable,
};
use definability::logic::{
    mult_formula, parse, product_oracle, profile, reduce_quantifiers, rankonedown_check, subfield_check,
    validate_defining_formula, AlphaData, EvalMode, Evaluator, Formula, Gamma, Sort, Truth, VerticalConfig,
    VerticalError, VerticalVerdict,
};
use definability::report::{CheckReport, Verdict};
use definability::BigIntegers;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use serde_json::{json, Value};
use std::path::PathBuf;
use std::sync::Arc;

pub struct App {
    pub cfg: ToolkitConfig,
    pub cache_path: Option<PathBuf>,
}

fn eds_failure(e: EdsError) -> Failure {
    match e {
        EdsError::Incomplete(_) => Failure::inconclusive(e),
        _ => Failure::usage(e),
    }
}

fn model_failure(e: ModelError) -> Failure {
    match e {
        ModelError::Eds(e) => eds_failure(e),
        ModelError::Incomplete { .. } | ModelError::Ring(_) => Failure::inconclusive(e),
        _ => Failure::usage(e),
    }
}

fn subset_failure(e: SubsetError) -> Failure {
    match e {
        SubsetError::BudgetExhausted { ref k, ref needs } => Failure::Inconclusive {
            message: e.to_string(),
            detail: json!({ "status": "budget_exhausted", "k": k.to_string(), "needs": needs }),
        },
        SubsetError::Eds(e) => eds_failure(e),
        SubsetError::Incomplete(_) | SubsetError::Construction(_) | SubsetError::Ring(_) => Failure::inconclusive(e),
        _ => Failure::usage(e),
    }
}

fn vertical_failure(e: VerticalError) -> Failure {
    match e {
        VerticalError::NoPrime(_) => Failure::inconclusive(e),
        _ => Failure::usage(e),
    }
}

fn density_failure(e: DensityError) -> Failure {
    match e {
        DensityError::Eds(e) => eds_failure(e),
        DensityError::Ring(_) => Failure::inconclusive(e),
        DensityError::Input(_) => Failure::usage(e),
    }
}

fn need<T>(v: Option<T>, flag: &str, lemma: &str) -> Result<T, Failure> {
    v.ok_or_else(|| Failure::Usage(format!("--lemma {lemma} requires {flag}")))
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialize")
}

fn parse_grid(s: &str) -> Result<Vec<u64>, Failure> {
    s.split(',')
        .map(|x| x.trim().replace('_', "").parse::<u64>().map_err(|_| Failure::Usage(format!("bad grid value {x:?}"))))
        .collect()
}

fn parse_epsilon(arg: Option<&String>, cfg: &ToolkitConfig) -> Result<BigRational, Failure> {
    let eps = match arg {
        Some(s) => parse_rational(s).ok_or_else(|| Failure::Usage(format!("epsilon {s:?} is not a rational")))?,
        None => cfg.epsilon().map_err(Failure::usage)?,
    };
    if !eps.is_positive() || eps > BigRational::one() {
        return Err(Failure::Usage(format!("epsilon = {eps} is outside (0, 1]")));
    }
    Ok(eps)
}

fn check_output(r: CheckReport) -> Output {
    Output { verdict: r.verdict, result: to_value(&r), csv: None }
}

impl App {
    pub fn new(cfg: ToolkitConfig, cache_path: Option<PathBuf>) -> Self {
        App { cfg, cache_path }
    }

    fn source(&self) -> Result<Arc<dyn FactorSource>, Failure> {
        let budget = self.cfg.budgets.factor_budget();
        Ok(match &self.cache_path {
            Some(path) => {
                let c = DiskCache::open(path, budget)
                    .map_err(|e| Failure::Usage(format!("cannot open cache {}: {e}", path.display())))?;
                if c.corrupt_lines() > 0 {
                    eprintln!(
                        "warning: {} corrupt cache lines in {} ignored; affected values are recomputed",
                        c.corrupt_lines(),
                        path.display()
                    );
                }
                Arc::new(c)
            }
            None => Arc::new(Factorizer::new(budget)),
        })
    }

    fn context(&self) -> Result<CurveContext, Failure> {
        self.cfg.context().map_err(Failure::usage)
    }

    fn table(&self) -> Result<EdsTable, Failure> {
        Ok(EdsTable::new(self.context()?, self.source()?))
    }

    fn bad_primes(ctx: &CurveContext) -> Vec<u64> {
        ctx.bad_primes.iter().filter_map(|p| p.to_u64()).collect()
    }
}

pub fn dispatch(app: &App, cmd: &Command) -> Result<Output, Failure> {
    match cmd {
        Command::Eds { cmd } => eds(app, cmd),
        Command::Model { cmd } => model(app, cmd),
        Command::Formula { cmd } => formula(app, cmd),
        Command::Vertical { cmd } => vertical(app, cmd),
        Command::Density { cmd } => density(app, cmd),
        Command::Cache { cmd } => cache_cmd(app, cmd),
    }
}

fn eds(app: &App, cmd: &EdsCmd) -> Result<Output, Failure> {
    match cmd {
        EdsCmd::Compute { n } => {
            let mut t = app.table()?;
            let rec = t.record(*n).map_err(eds_failure)?.clone();
            let verdict = if rec.complete { Verdict::Pass } else { Verdict::Inconclusive };
            let mut result = to_value(&rec);
            result["digits"] = json!(rec.d_n.to_str_radix(10).len());
            Ok(Output { verdict, result, csv: None })
        }
        EdsCmd::Verify(args) => verify(app, args),
    }
}

fn verify(app: &App, a: &VerifyArgs) -> Result<Output, Failure> {
    let bound = a.bound.unwrap_or(app.cfg.budgets.table_bound);
    if a.lemma == Lemma::Growth {
        let mut t = if a.growth_reference {
            EdsTable::new(CurveContext::growth_reference(), app.source()?)
        } else {
            app.table()?
        };
        let hi = a.n.unwrap_or(bound);
        let lo = a.lo.unwrap_or(hi.saturating_sub(10).max(1));
        if lo + 2 > hi {
            return Err(Failure::Usage(format!("growth window [{lo}, {hi}] is too short")));
        }
        let rates = growth_rate(&mut t, hi).map_err(eds_failure)?;
        let v = growth_verdict(&rates, lo, hi, a.tolerance.unwrap_or(0.10));
        let mut r = CheckReport::new("growth");
        r.checked = hi;
        if !v.converging {
            r.verdict = Verdict::Inconclusive;
        }
        let rows: Vec<Value> = rates.iter().map(|(n, x)| json!({ "n": n, "rate": x })).collect();
        r.details = json!({ "verdict": v, "rates": rows });
        return Ok(Output { verdict: r.verdict, result: to_value(&r), csv: None });
    }
    let mut t = app.table()?;
    let report = match a.lemma {
        Lemma::OrderChange => {
            let n = need(a.n, "--n", "orderchange")?;
            let p = need(a.p, "--p", "orderchange")?;
            if !definability::arith::is_prime_u64(p) {
                return Err(Failure::Usage(format!("--p {p} is not prime")));
            }
            verify_order_change(&mut t, n, p)
        }
        Lemma::Subgroup => verify_subgroup(&mut t, need(a.q, "--q", "subgroup")?, a.e.unwrap_or(1), bound),
        Lemma::StrongDiv => verify_strong_divisibility(&mut t, a.bound.unwrap_or(20)),
        Lemma::Square => verify_square(&mut t, bound),
        Lemma::BiggerS => estimate_c(&mut t, bound).map(|(_, r)| r),
        Lemma::M1 => verify_m1(&mut t, a.m1.unwrap_or(1), a.grid.unwrap_or(4)),
        Lemma::Growth => unreachable!("handled above"),
    };
    Ok(check_output(report.map_err(eds_failure)?))
}

fn model(app: &App, cmd: &ModelCmd) -> Result<Output, Failure> {
    let mut t = app.table()?;
    let bad = App::bad_primes(t.ctx());
    match cmd {
        ModelCmd::Divides { j, k } => {
            let (consts, _) = EdsConstants::compute(&mut t, &ConstantsConfig::default()).map_err(eds_failure)?;
            let mut spec = RingSpec::rational(bad, PrimeRule::NoDegreeOneQuadratic { d: app.cfg.d_aux });
            for e in &consts.primitive_divisors {
                if let Some(p) = e.divisor.known() {
                    spec.exclude.insert(p.clone());
                }
            }
            spec.bad_included = true;
            check_exclusions(&consts, &spec).map_err(model_failure)?;
            let v = model_divides(&mut t, &consts, &spec, *j, *k).map_err(model_failure)?;
            let integer = k % j == 0;
            let result = json!({
                "j": j,
                "k": k,
                "m0": consts.m0.to_string(),
                "divides": v.divides,
                "witness": v.witness.map(|w| w.to_string()),
                "integer_divides": integer,
            });
            Ok(Output { verdict: Verdict::from_bool(v.divides == integer), result, csv: None })
        }
        ModelCmd::Subset { x, test_mode, max_index } => {
            let x = parse_rational(x).ok_or_else(|| Failure::Usage(format!("--x {x:?} is not a rational")))?;
            let cfg = SubsetSystemConfig {
                d_aux: app.cfg.d_aux,
                exponent: if *test_mode { ExponentMode::Test(1) } else { ExponentMode::Honest },
                ..Default::default()
            };
            let mut spec = RingSpec::rational(bad, PrimeRule::NoDegreeOneQuadratic { d: cfg.d_aux });
            spec.exclude.insert(cfg.z.clone());
            spec.bad_included = true;
            let limit = max_index.unwrap_or(app.cfg.budgets.subset_max_index);
            let budget = SubsetBudget { max_index: limit, max_rank_index: limit };
            let w = subset_construct(&x, &cfg, &mut t, &spec, &budget).map_err(subset_failure)?;
            let audit = subset_check(&w, &cfg, &mut t, &spec).map_err(subset_failure)?;
            let result = json!({ "config": cfg, "witness": w, "audit": audit, "failed": audit.failed() });
            Ok(Output { verdict: audit.verdict, result, csv: None })
        }
    }
}

fn read_source(src: &Source, sort: Sort) -> Result<Formula, Failure> {
    let text = match (&src.text, &src.file) {
        (Some(t), _) => t.clone(),
        (None, Some(p)) => {
            std::fs::read_to_string(p).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", p.display())))?
        }
        (None, None) => return Err(Failure::Usage("a formula needs --text or --file".into())),
    };
    parse(&text, sort).map_err(Failure::usage)
}

fn sort_of(s: SortArg) -> Sort {
    match s {
        SortArg::Integer => Sort::Integer,
        SortArg::Ring => Sort::Ring,
    }
}

fn formula(app: &App, cmd: &FormulaCmd) -> Result<Output, Failure> {
    let pass = |result: Value| Ok(Output { verdict: Verdict::Pass, result, csv: None });
    match cmd {
        FormulaCmd::Parse { src, sort } => {
            let f = read_source(src, sort_of(*sort))?;
            pass(json!({ "formula": f.to_string(), "free": f.free_vars() }))
        }
        FormulaCmd::Profile { src, sort } => {
            let f = read_source(src, sort_of(*sort))?;
            pass(json!({ "formula": f.to_string(), "profile": profile(&f) }))
        }
        FormulaCmd::Eval { src, bound, mode, assign } => {
            let f = read_source(src, Sort::Integer)?;
            if *bound < 0 {
                return Err(Failure::Usage("--bound must be non-negative".into()));
            }
            let mut values: Vec<(String, BigInt)> = vec![];
            for a in assign {
                let (name, v) =
                    a.split_once('=').ok_or_else(|| Failure::Usage(format!("--assign {a:?} is not NAME=VALUE")))?;
                let v: BigInt = v.trim().parse().map_err(|_| Failure::Usage(format!("--assign {a:?}: bad integer")))?;
                values.push((name.trim().to_string(), v));
            }
            let mode = match mode {
                ModeArg::Sweep => EvalMode::Sweep,
                ModeArg::Exact => EvalMode::Exact,
                ModeArg::Truncated => EvalMode::Truncated,
            };
            let s = BigIntegers::new(*bound);
            let ev = Evaluator::new(&s, mode, &f).map_err(Failure::usage)?;
            let env: Vec<(&str, BigInt)> = values.iter().map(|(n, v)| (n.as_str(), v.clone())).collect();
            let truth = ev.eval(&env).map_err(Failure::usage)?;
            let shown: serde_json::Map<String, Value> =
                values.iter().map(|(n, v)| (n.clone(), Value::String(v.to_string()))).collect();
            let result = json!({ "formula": f.to_string(), "mode": mode, "bound": bound, "assignment": shown, "truth": truth });
            let verdict = if truth == Truth::Unknown { Verdict::Inconclusive } else { Verdict::Pass };
            Ok(Output { verdict, result, csv: None })
        }
        FormulaCmd::ValidateMult { window } => {
            let window = window.unwrap_or(app.cfg.budgets.window);
            if window < 0 {
                return Err(Failure::Usage("--window must be non-negative".into()));
            }
            let f = mult_formula();
            let r = validate_defining_formula(&f, &["l", "m", "n"], product_oracle, window).map_err(Failure::usage)?;
            let result = json!({
                "profile": profile(&f),
                "window": window,
                "checked": r.checked,
                "disagreements": r.disagreements.len(),
                "examples": r.disagreements.iter().take(10).collect::<Vec<_>>(),
            });
            Ok(Output { verdict: Verdict::from_bool(r.disagreements.is_empty()), result, csv: None })
        }
        FormulaCmd::Reduce { src, d } => {
            let f = read_source(src, Sort::Ring)?;
            let d = d.unwrap_or(app.cfg.d);
            let alpha = AlphaData::for_sqrt(d, &RingSpec::integers()).map_err(Failure::usage)?;
            let r = reduce_quantifiers(&f, &Gamma::base_predicate(), &alpha).map_err(Failure::usage)?;
            let out = profile(&r.formula);
            let result = json!({
                "d": d,
                "input": f.to_string(),
                "input_profile": profile(&f),
                "output": r.formula.to_string(),
                "output_profile": out,
                "alpha": r.alpha,
                "w": r.w,
                "coordinates": r.coordinates,
            });
            Ok(Output { verdict: Verdict::from_bool(out.universal_count <= 1), result, csv: None })
        }
    }
}

fn vertical(app: &App, cmd: &VerticalCmd) -> Result<Output, Failure> {
    let (a, r): (&VerticalArgs, Option<u64>) = match cmd {
        VerticalCmd::Rankonedown(a) => (a, None),
        VerticalCmd::Subfield { args, r } => (args, Some(*r)),
    };
    let d = a.d.unwrap_or(app.cfg.d);
    let u = QuadElem::parse(&a.u, d).map_err(Failure::usage)?;
    let ctx = app.context()?;
    let depth = a.depth.unwrap_or(app.cfg.budgets.depth);
    let cfg = VerticalConfig { q: a.q, ..Default::default() };
    let report = match r {
        None => rankonedown_check(&u, &ctx, &RingSpec::integers(), depth, &cfg),
        Some(0) => return Err(Failure::Usage("--r must be positive".into())),
        Some(r) => subfield_check(&u, &ctx, r, depth, &cfg),
    }
    .map_err(vertical_failure)?;
    let verdict = match report.verdict {
        VerticalVerdict::Inconclusive { .. } => Verdict::Inconclusive,
        _ => Verdict::Pass,
    };
    Ok(Output { verdict, result: to_value(&report), csv: None })
}

fn density(app: &App, cmd: &DensityCmd) -> Result<Output, Failure> {
    match cmd {
        DensityCmd::V { grid, csv } => {
            let grid = parse_grid(grid)?;
            let mut t = app.table()?;
            let limit = grid.iter().copied().max().unwrap_or(0);
            let vs = v_set(&mut t, &VSetConfig { limit, ..Default::default() }).map_err(density_failure)?;
            let rep = v_density(&vs.set, &grid).map_err(density_failure)?;
            let verdict =
                if rep.verdict == TrendVerdict::DecreasingTrend { Verdict::Pass } else { Verdict::Inconclusive };
            let csv = csv.then(|| rep.to_csv());
            Ok(Output { verdict, result: json!({ "set": vs, "report": rep }), csv })
        }
        DensityCmd::Split { d, x } => {
            let r = quadratic_split_density(d.unwrap_or(QUADRATIC_AUX), *x).map_err(density_failure)?;
            Ok(Output { verdict: Verdict::Pass, result: to_value(&r), csv: None })
        }
        DensityCmd::Cyclic { p, q, epsilon, x } => {
            let rule = match (p, q) {
                (Some(p), Some(q)) => CyclicFieldRule::new(*p, *q),
                _ => CyclicFieldRule::for_epsilon(&parse_epsilon(epsilon.as_ref(), &app.cfg)?),
            }
            .map_err(density_failure)?;
            let r = cyclic_degree_one_density(&rule, *x);
            Ok(Output { verdict: Verdict::Pass, result: json!({ "rule": rule, "density": r }), csv: None })
        }
        DensityCmd::BuildRing { epsilon, grid, explicit, csv } => {
            let eps = parse_epsilon(epsilon.as_ref(), &app.cfg)?;
            let grid = parse_grid(grid)?;
            let mut t = app.table()?;
            let limit = grid.iter().copied().max().unwrap_or(0);
            let vs = v_set(&mut t, &VSetConfig { limit, ..Default::default() }).map_err(density_failure)?;
            let w = build_w(&eps, t.ctx(), &vs.set, explicit, &grid).map_err(density_failure)?;
            let ok = w.meets_target && w.conditions.iter().all(|c| c.holds);
            let csv = csv.then(|| w.density.to_csv());
            Ok(Output { verdict: Verdict::from_bool(ok), result: to_value(&w), csv })
        }
    }
}

fn cache_cmd(app: &App, cmd: &CacheCmd) -> Result<Output, Failure> {
    let path = app.cache_path.as_ref().ok_or_else(|| Failure::Usage("cache commands need a cache file".into()))?;
    let budget = app.cfg.budgets.factor_budget();
    let io = |e: std::io::Error| Failure::Usage(format!("cache {}: {e}", path.display()));
    let result = match cmd {
        CacheCmd::Stats => to_value(&cache::stats(path, &budget).map_err(io)?),
        CacheCmd::Gc => {
            let (before, after) = cache::gc(path, &budget).map_err(io)?;
            json!({ "before": before, "after": after })
        }
    };
    Ok(Output { verdict: Verdict::Pass, result, csv: None })
}
