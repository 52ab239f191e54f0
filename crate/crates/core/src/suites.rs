//! Seeded property and oracle suites with deterministic reports.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::adelic::{vacuum_check, VacuumMethod};
use crate::classical::{
    solve_amplitude_phase, EndpointData, Endpoints, FrequencyProfile, OscillatorModel,
};
use crate::classical::endpoints::velocity_identity_defect;
use crate::error::{Error, Result};
use crate::exact::padic::{fractional_part, p_power, padic_norm, padic_valuation};
use crate::exact::{chi, int, ratio, Rational};
use crate::gauss::{
    gauss_brute_force_auto, gauss_closed_form, lambda_p, lambda_p_oracle, GaussIntegralSpec,
};
use crate::propagator::{compose_oracle, Dynamics, QuadraticKernel};
use crate::Place;

pub const SUITE_NAMES: [&str; 7] = [
    "ultrametric",
    "lambda",
    "gauss-oracle",
    "ode-residual",
    "action-equality",
    "composition",
    "vacuum",
];

#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Overrides the default number of randomized cases.
    pub cases: Option<usize>,
    pub order: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            seed: 7,
            cases: None,
            order: 24,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub seed: u64,
    pub cases: usize,
    pub passed: bool,
    /// First few failing cases.
    pub failures: Vec<String>,
    pub metrics: BTreeMap<String, serde_json::Value>,
}

const MAX_LISTED_FAILURES: usize = 10;

struct Recorder {
    name: &'static str,
    seed: u64,
    cases: usize,
    failed: usize,
    failures: Vec<String>,
    metrics: BTreeMap<String, serde_json::Value>,
}

impl Recorder {
    fn new(name: &'static str, seed: u64) -> Self {
        Recorder {
            name,
            seed,
            cases: 0,
            failed: 0,
            failures: Vec::new(),
            metrics: BTreeMap::new(),
        }
    }

    fn check(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failed += 1;
            if self.failures.len() < MAX_LISTED_FAILURES {
                self.failures.push(describe());
            }
        }
    }

    fn metric(&mut self, key: &str, value: impl Serialize) {
        self.metrics.insert(
            key.to_string(),
            serde_json::to_value(value).expect("metric serializes"),
        );
    }

    fn finish(self) -> SuiteReport {
        SuiteReport {
            name: self.name.to_string(),
            seed: self.seed,
            cases: self.cases,
            passed: self.failed == 0 && self.cases > 0,
            failures: self.failures,
            metrics: self.metrics,
        }
    }
}

fn rng_for(name: &str, seed: u64) -> ChaCha8Rng {
    // independent stream per suite so that `all` and single runs agree
    let tag = name.bytes().fold(0xcbf29ce484222325u64, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x100000001b3)
    });
    ChaCha8Rng::seed_from_u64(seed ^ tag)
}

/// Random `±(n/d)·p^v` with `n, d` prime to `p` and `v` in the given range.
pub fn random_with_valuation(rng: &mut impl Rng, p: u64, lo: i64, hi: i64) -> Rational {
    let unit = |rng: &mut dyn rand::RngCore| loop {
        let n: u64 = rng.random_range(1..=60);
        if !n.is_multiple_of(p) {
            return n as i64;
        }
    };
    let n = unit(rng);
    let d = unit(rng);
    let v = rng.random_range(lo..=hi);
    let sign = if rng.random_bool(0.5) { 1 } else { -1 };
    ratio(sign * n, d) * p_power(p, v)
}

fn random_rational(rng: &mut impl Rng, max_num: i64, max_den: i64) -> Rational {
    ratio(rng.random_range(-max_num..=max_num), rng.random_range(1..=max_den))
}

pub fn run_suite(name: &str, opts: &SuiteOptions) -> Result<Vec<SuiteReport>> {
    if name == "all" {
        return SUITE_NAMES
            .iter()
            .map(|n| run_one(n, opts))
            .collect::<Result<Vec<_>>>();
    }
    Ok(vec![run_one(name, opts)?])
}

fn run_one(name: &str, opts: &SuiteOptions) -> Result<SuiteReport> {
    match name {
        "ultrametric" => Ok(ultrametric(opts)),
        "lambda" => Ok(lambda(opts)),
        "gauss-oracle" => gauss_oracle(opts),
        "ode-residual" => ode_residual(opts),
        "action-equality" => action_equality(opts),
        "composition" => composition(opts),
        "vacuum" => vacuum(opts),
        other => Err(Error::InvalidInput(format!("unknown suite {other:?}"))),
    }
}

fn ultrametric(opts: &SuiteOptions) -> SuiteReport {
    let mut rec = Recorder::new("ultrametric", opts.seed);
    let mut rng = rng_for("ultrametric", opts.seed);
    let primes = [2u64, 3, 5, 7, 11];
    for _ in 0..opts.cases.unwrap_or(500) {
        let p = primes[rng.random_range(0..primes.len())];
        let x = random_with_valuation(&mut rng, p, -4, 4);
        let y = random_with_valuation(&mut rng, p, -4, 4);
        let (nx, ny) = (padic_norm(&x, p), padic_norm(&y, p));
        let strong = padic_norm(&(&x + &y), p) <= nx.clone().max(ny.clone());
        rec.check(strong, || format!("|x+y|_{p} > max at x = {x}, y = {y}"));
        rec.check(padic_norm(&(&x * &y), p) == &nx * &ny, || {
            format!("|xy|_{p} ≠ |x||y| at x = {x}, y = {y}")
        });
        let additive = chi(&(&x + &y), p) == chi(&x, p).mul(&chi(&y, p));
        rec.check(additive, || format!("χ_{p} not additive at x = {x}, y = {y}"));
        // product formula over every prime of numerator and denominator
        let mut prod = x.abs();
        for q in crate::exact::primes_up_to(61) {
            prod *= padic_norm(&x, q);
        }
        rec.check(prod.is_one(), || format!("product formula fails at {x}"));
        let frac = fractional_part(&x, p);
        let in_range = !frac.is_negative() && frac < Rational::one();
        let integral = padic_valuation(&(&x - &frac), p).is_none_or(|v| v >= 0);
        rec.check(in_range && integral, || format!("bad fractional part of {x} at {p}"));
    }
    rec.finish()
}

fn lambda(opts: &SuiteOptions) -> SuiteReport {
    let mut rec = Recorder::new("lambda", opts.seed);
    let mut rng = rng_for("lambda", opts.seed);
    let pairs = opts.cases.unwrap_or(200);
    let mut max_dev: f64 = 0.0;
    for p in [3u64, 5, 7] {
        rec.check((lambda_p(&Rational::zero(), p) - 1.0).norm() == 0.0, || {
            format!("λ_{p}(0) ≠ 1")
        });
        for _ in 0..pairs {
            let a = random_with_valuation(&mut rng, p, -3, 3);
            let b = random_with_valuation(&mut rng, p, -3, 3);
            let s = random_with_valuation(&mut rng, p, -2, 2);
            let la = lambda_p_oracle(&a, p);
            let lb = lambda_p_oracle(&b, p);
            let unit_dev = (la.norm() - 1.0).abs();
            rec.check(unit_dev < 1e-12, || format!("|λ_{p}({a})| = {}", la.norm()));
            let sq = (lambda_p_oracle(&(&s * &s * &a), p) - la).norm();
            max_dev = max_dev.max(sq);
            rec.check(sq < 1e-10, || format!("λ_{p}(s²a) ≠ λ_{p}(a) at a = {a}, s = {s}"));
            let cached = (lambda_p(&a, p) - la).norm();
            rec.check(cached < 1e-12, || format!("cached λ_{p}({a}) differs"));
            if !(&a + &b).is_zero() {
                let rhs = lambda_p_oracle(&(&a + &b), p) * lambda_p_oracle(&(a.recip() + b.recip()), p);
                let dev = (la * lb - rhs).norm();
                max_dev = max_dev.max(dev);
                rec.check(dev < 1e-10, || format!("four-term identity fails at {a}, {b} (p = {p})"));
            }
        }
    }
    let i_dev = (lambda_p_oracle(&ratio(1, 3), 3) - num_complex::Complex64::new(0.0, 1.0)).norm();
    rec.check(i_dev < 1e-10, || format!("λ_3(1/3) off i by {i_dev}"));
    rec.metric("max_deviation", max_dev);
    rec.finish()
}

fn gauss_oracle(opts: &SuiteOptions) -> Result<SuiteReport> {
    let mut rec = Recorder::new("gauss-oracle", opts.seed);
    let mut rng = rng_for("gauss-oracle", opts.seed);
    let want = opts.cases.unwrap_or(500);
    let primes = [2u64, 3, 5, 7];
    let mut max_dev: f64 = 0.0;
    let mut skipped = 0usize;
    let mut by_branch = BTreeMap::<u8, usize>::new();
    while rec.cases < want {
        let p = primes[rng.random_range(0..primes.len())];
        let nu = rng.random_range(-2..=2);
        let alpha = random_with_valuation(&mut rng, p, -3, 3);
        let beta = if rng.random_bool(0.2) {
            Rational::zero()
        } else {
            random_with_valuation(&mut rng, p, -3, 3)
        };
        let spec = GaussIntegralSpec::new(p, alpha, beta, nu);
        let closed = match gauss_closed_form(&spec) {
            Ok(c) => c,
            Err(Error::IndeterminateBranch { .. }) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let brute = gauss_brute_force_auto(&spec)?;
        let dev = (closed.value() - brute).norm();
        max_dev = max_dev.max(dev);
        *by_branch.entry(closed.branch.number()).or_default() += 1;
        rec.check(dev < 1e-9, || {
            format!(
                "p = {p}, ν = {nu}, α = {}, β = {}: deviation {dev:e}",
                spec.alpha, spec.beta
            )
        });
    }
    rec.metric("max_deviation", max_dev);
    rec.metric("skipped_indeterminate", skipped);
    rec.metric(
        "cases_by_branch",
        by_branch
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect::<BTreeMap<_, _>>(),
    );
    Ok(rec.finish())
}

/// Presets exercised by the classical suites.
pub fn classical_presets() -> Vec<FrequencyProfile> {
    let mut out = Vec::new();
    for a in 1..=3 {
        for b in 1..=3 {
            out.push(FrequencyProfile::example1(int(a), int(b)).expect("valid preset"));
        }
    }
    for a in 1..=3 {
        for b in 1..=3 {
            out.push(FrequencyProfile::example2(int(a), int(b)).expect("valid preset"));
        }
    }
    out.push(FrequencyProfile::example2(ratio(3, 2), int(1)).expect("valid preset"));
    out.push(FrequencyProfile::constant(ratio(3, 2)));
    out.push(FrequencyProfile::free());
    out
}

/// Largest |t| used for random endpoints: half the real radius of the profile.
fn time_bound(profile: &FrequencyProfile) -> Rational {
    use crate::classical::Preset;
    match &profile.preset {
        Preset::Example1 { a, .. } | Preset::Example2 { a, .. } if !a.is_zero() => {
            ratio(1, 2) / a.abs()
        }
        // G = (1+t²)^{1/2} for the free particle
        Preset::Constant { w0 } if w0.is_zero() => ratio(1, 2),
        _ => int(1),
    }
}

fn random_time(rng: &mut impl Rng, bound: &Rational) -> Rational {
    let den = rng.random_range(2..=12i64);
    let k = rng.random_range(-den..=den);
    ratio(k, den) * bound
}

/// Random endpoints inside the real convergence region with distinct times.
pub fn random_endpoints(rng: &mut impl Rng, profile: &FrequencyProfile) -> Endpoints {
    let bound = time_bound(profile);
    let t_prime = random_time(rng, &bound);
    let t_dprime = loop {
        let t = random_time(rng, &bound);
        if t != t_prime {
            break t;
        }
    };
    Endpoints {
        t_prime,
        x_prime: random_rational(rng, 20, 9),
        t_dprime,
        x_dprime: random_rational(rng, 20, 9),
    }
}

fn ode_residual(opts: &SuiteOptions) -> Result<SuiteReport> {
    let mut rec = Recorder::new("ode-residual", opts.seed);
    let mut rng = rng_for("ode-residual", opts.seed);
    let n = opts.order;
    let trajectories = opts.cases.unwrap_or(1);
    for profile in classical_presets() {
        let label = profile.preset.to_string();
        let model = OscillatorModel::new(int(1), profile)?;
        let ap = solve_amplitude_phase(&model, n)?;
        rec.check(ap.phase_residual().vanishes_through(n), || {
            format!("{label}: γ̇G² − C nonzero")
        });
        rec.check(ap.amplitude_residual(&model).vanishes_through(n - 2), || {
            format!("{label}: G³G̈ + ω²G⁴ − C² nonzero")
        });
        for _ in 0..trajectories {
            let ep = random_endpoints(&mut rng, &model.profile);
            let data = EndpointData::evaluate(&ap, &ep, &[Place::Real])?;
            let x = data.trajectory_series(&ap)?;
            let w2 = model.profile.omega_sq.series(n);
            let res = &x.derivative().derivative() + &(&w2 * &x);
            rec.check(res.vanishes_through(n - 2), || {
                format!("{label}: ẍ + ω²x nonzero for {ep:?}")
            });
        }
    }
    Ok(rec.finish())
}

/// Presets for the randomized action comparison.
pub fn action_presets() -> Vec<FrequencyProfile> {
    let ex1 = |a, b| FrequencyProfile::example1(int(a), int(b)).expect("valid preset");
    let ex2 = |a, b| FrequencyProfile::example2(a, int(b)).expect("valid preset");
    vec![
        ex1(1, 1),
        ex1(2, 3),
        ex1(3, 2),
        ex2(int(1), 1),
        ex2(int(2), 3),
        ex2(ratio(3, 2), 1),
        FrequencyProfile::constant(ratio(3, 2)),
        FrequencyProfile::free(),
    ]
}

fn action_equality(opts: &SuiteOptions) -> Result<SuiteReport> {
    let mut rec = Recorder::new("action-equality", opts.seed);
    let mut rng = rng_for("action-equality", opts.seed);
    let per_preset = opts.cases.unwrap_or(100);
    let mut per = BTreeMap::new();
    for profile in action_presets() {
        let label = profile.preset.to_string();
        let model = OscillatorModel::new(int(1), profile)?;
        let ap = solve_amplitude_phase(&model, opts.order)?;
        let mut count = 0usize;
        while count < per_preset {
            let ep = random_endpoints(&mut rng, &model.profile);
            let data = match EndpointData::evaluate(&ap, &ep, &[Place::Real]) {
                Err(Error::Caustic) => continue,
                other => other?,
            };
            count += 1;
            let quad = data.action(&model.mass).value(&ep.x_dprime, &ep.x_prime);
            let boundary = data.action_boundary(&ap, &model.mass)?;
            rec.check(quad == boundary, || {
                format!("{label}: boundary and quadratic actions differ at {ep:?}")
            });
            rec.check(velocity_identity_defect(&data).is_zero(), || {
                format!("{label}: velocity identity fails at {ep:?}")
            });
        }
        per.insert(label, count);
    }
    rec.metric("cases_per_preset", per);
    Ok(rec.finish())
}

fn sample_pairs(p: u64) -> Vec<(Rational, Rational)> {
    let pi = int(p as i64);
    vec![
        (int(0), int(0)),
        (int(1), int(0)),
        (int(0), int(2)),
        (pi.recip(), int(1)),
        (int(2), -pi.recip()),
        (pi.clone(), ratio(1, p as i64 * p as i64)),
    ]
}

fn composition(opts: &SuiteOptions) -> Result<SuiteReport> {
    let mut rec = Recorder::new("composition", opts.seed);
    let one = int(1);
    let mut deviations = BTreeMap::new();
    for p in [3u64, 5] {
        let place = Place::Finite(p);
        let samples = sample_pairs(p);
        let pi = int(p as i64);
        let free = |t: &Rational| QuadraticKernel::free_particle(place, &one, &one, t);
        let osc = |t: &Rational| {
            QuadraticKernel::constant_frequency(place, &one, &one, &pi, t, opts.order)
        };
        let splits = [(ratio(1, 2), ratio(1, 2)), (ratio(1, 4), ratio(3, 4))];
        for (t1, t2) in &splits {
            let total = t1 + t2;
            let rep = compose_oracle(&free(t2)?, &free(t1)?, &free(&total)?, &samples, None)?;
            let key = format!("free p={p} {t1}+{t2}");
            rec.check(rep.max_deviation < 1e-9, || format!("{key}: {:e}", rep.max_deviation));
            deviations.insert(key, rep.max_deviation);
            let rep = compose_oracle(&osc(t2)?, &osc(t1)?, &osc(&total)?, &samples, None)?;
            let key = format!("constant({p}) p={p} {t1}+{t2}");
            rec.check(rep.max_deviation < 1e-9, || format!("{key}: {:e}", rep.max_deviation));
            deviations.insert(key, rep.max_deviation);
        }
        // series-built kernels of the first example, times inside its p-adic region
        let model = OscillatorModel::new(one.clone(), FrequencyProfile::example1(one.clone(), one.clone())?)?;
        let dynamics = Dynamics::solve(&model, opts.order)?;
        let (t0, t1, t2) = (int(0), pi.clone(), &pi * int(2));
        let k = |a: &Rational, b: &Rational| QuadraticKernel::from_action(place, &dynamics, a, b, &one);
        let rep = compose_oracle(&k(&t1, &t2)?, &k(&t0, &t1)?, &k(&t0, &t2)?, &samples, None)?;
        let key = format!("example1(1,1) p={p} 0→{t1}→{t2}");
        rec.check(rep.max_deviation < 1e-9, || format!("{key}: {:e}", rep.max_deviation));
        deviations.insert(key, rep.max_deviation);
    }
    rec.metric("max_deviation", deviations);
    Ok(rec.finish())
}

fn vacuum(opts: &SuiteOptions) -> Result<SuiteReport> {
    let mut rec = Recorder::new("vacuum", opts.seed);
    let one = int(1);
    let mut verdicts = BTreeMap::new();
    let constant = |w0: i64, m: i64| -> Result<Dynamics> {
        let model = OscillatorModel::new(int(m), FrequencyProfile::constant(int(w0)))?;
        Dynamics::solve(&model, opts.order)
    };
    let unit = constant(1, 1)?;
    for p in [3u64, 5, 7] {
        let rep = vacuum_check(p, &unit, &int(0), &int(p as i64), &one, VacuumMethod::Both)?;
        rec.check(rep.holds, || format!("constant(1), T = {p}: vacuum missing at p = {p}"));
        rec.check(rep.methods_agree == Some(true), || format!("methods disagree at p = {p}"));
        verdicts.insert(format!("constant(1) m=1 T={p} p={p}"), rep.holds);
    }
    let heavy = constant(1, 9)?;
    let rep = vacuum_check(3, &heavy, &int(0), &int(3), &one, VacuumMethod::Both)?;
    rec.check(!rep.holds && rep.witness.is_some(), || "m = 9 at p = 3 should fail".into());
    rec.check(rep.methods_agree == Some(true), || "methods disagree for m = 9".into());
    verdicts.insert("constant(1) m=9 T=3 p=3".into(), rep.holds);

    let rep = vacuum_check(2, &unit, &int(0), &int(4), &one, VacuumMethod::Both)?;
    rec.check(rep.method == VacuumMethod::BruteForce, || "p = 2 must use brute force".into());
    verdicts.insert("constant(1) m=1 T=4 p=2".into(), rep.holds);

    let model = OscillatorModel::new(one.clone(), FrequencyProfile::example1(one.clone(), one.clone())?)?;
    let ex1 = Dynamics::solve(&model, opts.order)?;
    let rep = vacuum_check(5, &ex1, &int(0), &int(5), &one, VacuumMethod::Both)?;
    rec.check(rep.methods_agree == Some(true), || "methods disagree for example1".into());
    verdicts.insert("example1(1,1) m=1 T=5 p=5".into(), rep.holds);
    if let Some(sc) = rep.sufficient_condition {
        rec.metric("example1_sufficient_condition", sc.holds);
    }
    rec.metric("verdicts", verdicts);
    Ok(rec.finish())
}
