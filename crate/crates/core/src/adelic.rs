//! Adeles, adelic states, the Ω vacuum and the discreteness of space.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::classical::Preset;
use crate::error::{Error, Result};
use crate::exact::padic::{fractional_part, omega_at, padic_valuation, square_class};
use crate::exact::primes::{smallest_prime_factor, smooth_part};
use crate::exact::rational::serde_rational;
use crate::exact::{
    chi, format_rational, is_integer, to_f64, ComplexJson, ComplexValue, Rational, UnitPhase,
};
use crate::gauss::{
    gauss_brute_force_auto, gauss_closed_form, local_constancy_depth, GaussIntegralSpec,
    MAX_COSETS,
};
use crate::propagator::{evaluate_kernel, Dynamics, KernelValue, QuadraticKernel};
use crate::Place;

/// Agreement required between the two sides of the vacuum equation.
pub const VACUUM_TOLERANCE: f64 = 1e-9;

/// An adele with finitely many components outside `Z_p`.
///
/// Components not listed are 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Adele {
    pub real: Rational,
    pub components: BTreeMap<u64, Rational>,
    pub exceptional: BTreeSet<u64>,
}

impl Adele {
    pub fn new(
        real: Rational,
        components: BTreeMap<u64, Rational>,
        exceptional: BTreeSet<u64>,
    ) -> Result<Self> {
        for &p in components.keys().chain(exceptional.iter()) {
            crate::exact::check_prime(p)?;
        }
        for (&p, x) in &components {
            if !exceptional.contains(&p) && omega_at(x, p) == 0 {
                return Err(Error::InvalidAdele { p });
            }
        }
        Ok(Adele {
            real,
            components,
            exceptional,
        })
    }

    pub fn component(&self, p: u64) -> Rational {
        self.components.get(&p).cloned().unwrap_or_else(Rational::zero)
    }

    fn combine(&self, other: &Adele, op: impl Fn(&Rational, &Rational) -> Rational) -> Result<Adele> {
        let primes: BTreeSet<u64> = self.components.keys().chain(other.components.keys()).copied().collect();
        let components = primes
            .into_iter()
            .map(|p| (p, op(&self.component(p), &other.component(p))))
            .collect();
        let exceptional = self.exceptional.union(&other.exceptional).copied().collect();
        Adele::new(op(&self.real, &other.real), components, exceptional)
    }

    pub fn add(&self, other: &Adele) -> Result<Adele> {
        self.combine(other, |a, b| a + b)
    }

    pub fn mul(&self, other: &Adele) -> Result<Adele> {
        self.combine(other, |a, b| a * b)
    }
}

impl Serialize for Adele {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            real: String,
            exceptions: BTreeMap<String, String>,
            #[serde(rename = "S")]
            s: &'a BTreeSet<u64>,
        }
        Repr {
            real: format_rational(&self.real),
            exceptions: self
                .components
                .iter()
                .map(|(p, x)| (p.to_string(), format_rational(x)))
                .collect(),
            s: &self.exceptional,
        }
        .serialize(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OmegaProduct {
    /// `∏_{p ≤ cutoff} Ω(|x|_p)`
    pub value: u8,
    /// Primes at which Ω vanishes.
    pub witnesses: Vec<u64>,
    pub cutoff: u64,
}

/// `∏_{p ≤ cutoff} Ω(|x|_p)`, which is 1 exactly for integers once every prime of the
/// denominator lies below the cutoff.
pub fn omega_product(x: &Rational, cutoff: u64) -> Result<OmegaProduct> {
    let (factors, rest) = smooth_part(x.denom(), cutoff);
    if !rest.is_one() {
        let factor = smallest_prime_factor(&rest)
            .map(|f| f.to_string())
            .unwrap_or_else(|| rest.to_string());
        return Err(Error::CutoffTooSmall { cutoff, factor });
    }
    let witnesses: Vec<u64> = factors.into_iter().map(|(p, _)| p).collect();
    Ok(OmegaProduct {
        value: u8::from(witnesses.is_empty()),
        witnesses,
        cutoff,
    })
}

/// Position density of the real factor of a state.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RealFactor {
    /// Normal density with the given mean and variance.
    Gaussian {
        #[serde(with = "serde_rational")]
        mean: Rational,
        #[serde(with = "serde_rational")]
        variance: Rational,
    },
}

impl RealFactor {
    pub fn density(&self, x: &Rational) -> f64 {
        match self {
            RealFactor::Gaussian { mean, variance } => {
                let var = to_f64(variance);
                let d = to_f64(&(x - mean));
                (-d * d / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
            }
        }
    }
}

/// A p-adic factor other than Ω, known only through its declared `L²` norm.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteFactor {
    pub description: String,
    #[serde(with = "serde_rational")]
    pub declared_norm: Rational,
}

/// `Ψ = Ψ_∞ · ∏_{p ∈ S} Ψ_p · ∏_{p ∉ S} Ω(|x_p|_p)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdelicState {
    pub real_factor: RealFactor,
    pub finite_factors: BTreeMap<u64, FiniteFactor>,
    /// Eigenvalue components; places not listed carry 0.
    #[serde(serialize_with = "serialize_alpha")]
    pub alpha: BTreeMap<Place, Rational>,
    /// Mixed states smear the discrete structure.
    pub mixed: bool,
}

fn serialize_alpha<S: serde::Serializer>(
    alpha: &BTreeMap<Place, Rational>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_map(alpha.iter().map(|(p, a)| (p.to_string(), format_rational(a))))
}

impl AdelicState {
    /// Vacuum tail at every prime.
    pub fn vacuum(real_factor: RealFactor) -> Self {
        AdelicState {
            real_factor,
            finite_factors: BTreeMap::new(),
            alpha: BTreeMap::new(),
            mixed: false,
        }
    }

    pub fn alpha_at(&self, place: Place) -> Rational {
        self.alpha.get(&place).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_omega_at(&self, p: u64) -> bool {
        !self.finite_factors.contains_key(&p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealMarginal {
    pub real_factor: RealFactor,
    /// Product of the integrals of `|Ψ_p|²` over the finite places; always exactly 1.
    #[serde(with = "serde_rational")]
    pub finite_factor: Rational,
}

/// Integrates `|Ψ|²` over every finite place, leaving the real density.
pub fn probability_reduction(state: &AdelicState) -> Result<RealMarginal> {
    let mut total = Rational::one();
    for (&p, f) in &state.finite_factors {
        if !f.declared_norm.is_one() {
            return Err(Error::NotNormalized {
                p,
                norm: format_rational(&f.declared_norm),
            });
        }
        total *= &f.declared_norm;
    }
    // each Ω tail factor contributes ∫_{Z_p} dx = 1
    Ok(RealMarginal {
        real_factor: state.real_factor.clone(),
        finite_factor: total,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VacuumMethod {
    ClosedForm,
    BruteForce,
    Both,
}

impl VacuumMethod {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "closed-form" => Ok(VacuumMethod::ClosedForm),
            "brute-force" => Ok(VacuumMethod::BruteForce),
            "both" => Ok(VacuumMethod::Both),
            _ => Err(Error::InvalidInput(format!("unknown vacuum method {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VacuumSample {
    #[serde(with = "serde_rational")]
    pub x_dprime: Rational,
    pub omega: u8,
    pub closed_form: Option<ComplexJson>,
    pub brute_force: Option<ComplexJson>,
    pub holds: bool,
}

/// `|Ġ′/G′|_p < |γ̇′ cot(γ″−γ′)|_p > |h/2m|_p`, as exponents of p.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SufficientCondition {
    pub log_norm_gdot_over_g: Option<i64>,
    pub log_norm_gammadot_cot: Option<i64>,
    pub log_norm_h_over_2m: Option<i64>,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VacuumReport {
    pub p: u64,
    pub holds: bool,
    pub method: VacuumMethod,
    /// Closed-form and brute-force values agree at every sample (when both ran).
    pub methods_agree: Option<bool>,
    /// First sampled `x″` at which the two sides differ.
    pub witness: Option<VacuumSample>,
    pub samples: Vec<VacuumSample>,
    pub sufficient_condition: Option<SufficientCondition>,
    pub note: Option<String>,
}

/// Sample points covering every `|x″|_p` from `p^{-3}` to `p^3`, with several unit classes.
pub fn vacuum_samples(p: u64) -> Vec<Rational> {
    let mut units: Vec<u64> = if p == 2 {
        vec![1, 3, 5, 7]
    } else {
        let nr = (2..p)
            .find(|&r| square_class(&Rational::from_integer(r.into()), p) != Some((0, 1)))
            .unwrap_or(1);
        vec![1, nr, p - 1]
    };
    units.dedup();
    let mut out = vec![Rational::zero()];
    for k in -3i64..=3 {
        for &u in &units {
            out.push(Rational::from_integer(BigInt::from(u)) * crate::exact::padic::p_power(p, k));
        }
    }
    out.sort();
    out.dedup();
    out
}

/// The left side `∫_{|x′|_p ≤ 1} K(x″, x′) dx′` by the chosen route.
fn vacuum_lhs(
    k: &QuadraticKernel,
    x_dprime: &Rational,
    brute: bool,
) -> Result<Option<ComplexValue>> {
    let Place::Finite(p) = k.place else {
        return Err(Error::Unsupported("the vacuum check runs at finite places".into()));
    };
    let prefactor: KernelValue = evaluate_kernel(k, x_dprime, &Rational::zero())?;
    let spec = GaussIntegralSpec::new(
        p,
        -(&k.d) / &k.h,
        -(&k.b * x_dprime) / &k.h,
        0,
    );
    let integral = if brute {
        let depth = local_constancy_depth(&spec);
        if (p as f64).powi(depth as i32) > MAX_COSETS as f64 {
            return Err(Error::TooLarge {
                terms: format!("{p}^{depth}"),
            });
        }
        gauss_brute_force_auto(&spec)?
    } else {
        match gauss_closed_form(&spec) {
            Ok(c) => c.value(),
            Err(Error::IndeterminateBranch { .. }) => return Ok(None),
            Err(e) => return Err(e),
        }
    };
    // the x′-independent part of the kernel is exactly the kernel at x′ = 0
    Ok(Some(prefactor.value() * integral))
}

/// Checks `∫_{|x′|_p ≤ 1} K_p(x″,x′) dx′ = Ω(|x″|_p)` on valuation-class samples.
pub fn vacuum_check_kernel(k: &QuadraticKernel, method: VacuumMethod) -> Result<VacuumReport> {
    let Place::Finite(p) = k.place else {
        return Err(Error::Unsupported("the vacuum check runs at finite places".into()));
    };
    let mut method = method;
    let mut note = None;
    if p == 2 && method != VacuumMethod::BruteForce {
        method = VacuumMethod::BruteForce;
        note = Some("p = 2: brute force only".to_string());
    }
    let use_closed = method != VacuumMethod::BruteForce;
    let use_brute = method != VacuumMethod::ClosedForm;
    let mut samples = Vec::new();
    let mut agree = true;
    for x in vacuum_samples(p) {
        let omega = omega_at(&x, p);
        let target = ComplexValue::new(f64::from(omega), 0.0);
        let closed = if use_closed { vacuum_lhs(k, &x, false)? } else { None };
        let brute = if use_brute { vacuum_lhs(k, &x, true)? } else { None };
        let close = |z: &Option<ComplexValue>| z.is_none_or(|z| (z - target).norm() < VACUUM_TOLERANCE);
        let holds = closed.is_some() || brute.is_some();
        let holds = holds && close(&closed) && close(&brute);
        if let (Some(c), Some(b)) = (closed, brute) {
            agree &= (c - b).norm() < VACUUM_TOLERANCE;
        }
        samples.push(VacuumSample {
            x_dprime: x,
            omega,
            closed_form: closed.map(Into::into),
            brute_force: brute.map(Into::into),
            holds,
        });
    }
    let witness = samples.iter().find(|s| !s.holds).cloned();
    Ok(VacuumReport {
        p,
        holds: witness.is_none(),
        method,
        methods_agree: (use_closed && use_brute).then_some(agree),
        witness,
        samples,
        sufficient_condition: None,
        note,
    })
}

fn log_norm(x: &Rational, p: u64) -> Option<i64> {
    padic_valuation(x, p).map(|v| -v)
}

/// Vacuum check for the oscillator between `t′` and `t″`, with the sufficient condition
/// evaluated from the series data (odd p only).
pub fn vacuum_check(
    p: u64,
    dynamics: &Dynamics,
    t_prime: &Rational,
    t_dprime: &Rational,
    h: &Rational,
    method: VacuumMethod,
) -> Result<VacuumReport> {
    let place = Place::Finite(p);
    let k = QuadraticKernel::from_action(place, dynamics, t_prime, t_dprime, h)
        .map_err(|e| e.at(place))?;
    let mut report = vacuum_check_kernel(&k, method).map_err(|e| e.at(place))?;
    if p != 2 {
        let data = dynamics.endpoint_data(place, t_prime, t_dprime)?;
        let at = &data.at_prime;
        let cot = &data.cos_theta / &data.sin_theta;
        let a = log_norm(&(&at.gdot / &at.g), p);
        let b = log_norm(&(&at.gammadot * cot), p);
        let c = log_norm(&(h / (Rational::from_integer(2.into()) * &dynamics.model.mass)), p);
        // None is the norm of 0, i.e. −∞
        let lt = |x: Option<i64>, y: Option<i64>| match (x, y) {
            (_, None) => false,
            (None, Some(_)) => true,
            (Some(x), Some(y)) => x < y,
        };
        report.sufficient_condition = Some(SufficientCondition {
            log_norm_gdot_over_g: a,
            log_norm_gammadot_cot: b,
            log_norm_h_over_2m: c,
            holds: lt(a, b) && lt(c, b),
        });
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenReport {
    pub p: u64,
    /// `χ_p[α_p(γ″−γ′)]`
    pub phase: UnitPhase,
    pub phase_trivial: bool,
    pub max_deviation: f64,
}

/// Applies `U_p(t″,t′)` to the Ω factor by brute force and compares with
/// `χ_p[α_p(γ″−γ′)] Ω`.
pub fn eigen_evolution_check(
    state: &AdelicState,
    dynamics: &Dynamics,
    t_prime: &Rational,
    t_dprime: &Rational,
    h: &Rational,
    p: u64,
) -> Result<EigenReport> {
    if !state.is_omega_at(p) {
        return Err(Error::Unsupported(format!(
            "evolution of the non-vacuum factor at p = {p}"
        )));
    }
    let place = Place::Finite(p);
    let alpha = state.alpha_at(place);
    if t_prime == t_dprime {
        return Ok(EigenReport {
            p,
            phase: UnitPhase::one(),
            phase_trivial: true,
            max_deviation: 0.0,
        });
    }
    let data = dynamics.endpoint_data(place, t_prime, t_dprime)?;
    let phase = chi(&(&alpha * &data.theta), p);
    let k = QuadraticKernel::from_action(place, dynamics, t_prime, t_dprime, h)?;
    let mut max_deviation: f64 = 0.0;
    let mut vacuum = true;
    for x in vacuum_samples(p) {
        let lhs = vacuum_lhs(&k, &x, true)?.expect("brute force always yields a value");
        let omega = f64::from(omega_at(&x, p));
        vacuum &= (lhs - omega).norm() < VACUUM_TOLERANCE;
        max_deviation = max_deviation.max((lhs - phase.to_complex() * omega).norm());
    }
    if !vacuum {
        return Err(Error::VacuumAbsent { p });
    }
    Ok(EigenReport {
        p,
        phase_trivial: fractional_part(&(&alpha * &data.theta), p).is_zero(),
        phase,
        max_deviation,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PlaceValue {
    pub place: Place,
    pub kernel: QuadraticKernel,
    pub value: ComplexJson,
}

#[derive(Debug, Clone, Serialize)]
pub struct AdelicProduct {
    /// Always "restricted partial product": the full adelic product diverges.
    pub label: &'static str,
    pub places: Vec<Place>,
    pub factors: Vec<PlaceValue>,
    pub product: ComplexJson,
}

/// Finite product of the kernels over the requested places.
pub fn adelic_propagator_product(
    places: &[Place],
    dynamics: &Dynamics,
    t_prime: &Rational,
    t_dprime: &Rational,
    x_prime: &Rational,
    x_dprime: &Rational,
    h: &Rational,
) -> Result<AdelicProduct> {
    let mut sorted = places.to_vec();
    sorted.sort();
    sorted.dedup();
    let mut product = ComplexValue::new(1.0, 0.0);
    let mut factors = Vec::new();
    for &place in &sorted {
        let value = (|| {
            let k = QuadraticKernel::from_action(place, dynamics, t_prime, t_dprime, h)?;
            let v = evaluate_kernel(&k, x_dprime, x_prime)?.value();
            Ok((k, v))
        })()
        .map_err(|e: Error| e.at(place))?;
        product *= value.1;
        factors.push(PlaceValue {
            place,
            kernel: value.0,
            value: value.1.into(),
        });
    }
    Ok(AdelicProduct {
        label: "restricted partial product",
        places: sorted,
        factors,
        product: product.into(),
    })
}

/// `l₀² = h/(m|ω₀|)` for constant frequency; the discrete positions are integer multiples
/// of `l₀`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LengthScale {
    #[serde(with = "serde_rational")]
    pub squared: Rational,
    pub value: f64,
}

pub fn length_scale(preset: &Preset, mass: &Rational, h: &Rational) -> Result<LengthScale> {
    match preset {
        Preset::Constant { w0 } if !w0.is_zero() => {
            let squared = (h / (mass * w0.abs())).abs();
            Ok(LengthScale {
                value: to_f64(&squared).sqrt(),
                squared,
            })
        }
        _ => Err(Error::Unsupported(
            "the length scale is only defined for a nonzero constant frequency".into(),
        )),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscretenessRow {
    #[serde(with = "serde_rational")]
    pub x: Rational,
    pub real_density: f64,
    pub omega_product: u8,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscretenessProfile {
    pub cutoff: u64,
    /// False for mixed states, whose rows then carry the real density alone.
    pub discrete: bool,
    pub rows: Vec<DiscretenessRow>,
}

/// `|Ψ_∞(x)|² ∏_{p ≤ cutoff} Ω(|x|_p)` at each sample (x in units of l₀).
pub fn discreteness_profile(
    state: &AdelicState,
    xs: &[Rational],
    cutoff: u64,
) -> Result<DiscretenessProfile> {
    if !state.finite_factors.is_empty() {
        return Err(Error::Unsupported(
            "discreteness profiles need the vacuum at every prime".into(),
        ));
    }
    let rows = xs
        .iter()
        .map(|x| {
            let density = state.real_factor.density(x);
            let omega = omega_product(x, cutoff)?.value;
            let value = if state.mixed {
                density
            } else {
                density * f64::from(omega)
            };
            debug_assert_eq!(omega == 1, is_integer(x));
            Ok(DiscretenessRow {
                x: x.clone(),
                real_density: density,
                omega_product: omega,
                value,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DiscretenessProfile {
        cutoff,
        discrete: !state.mixed,
        rows,
    })
}
