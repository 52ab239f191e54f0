//! Propagators of quadratic actions at every place of Q.
//!
//! `K_v(x″,t″; x′,t′) = λ_v(−B/2h) |B/h|_v^{1/2} χ_v(−S̄(x″,x′)/h)` with
//! `S̄ = A x″² + B x″x′ + D x′²`.

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::classical::{
    sin_cos, solve_amplitude_phase, AmplitudePhase, ClassicalAction, EndpointData, Endpoints,
    OscillatorModel,
};
use crate::classical::trig::{certify_trig, required_degree};
use crate::error::{Error, Result};
use crate::exact::padic::{padic_valuation, square_class};
use crate::exact::rational::serde_rational;
use crate::exact::{chi, chi_real, int, to_f64, ComplexJson, ComplexValue, Rational, UnitPhase};
use crate::gauss::{
    gauss_brute_force, lambda_p, lambda_real, local_constancy_depth, GaussIntegralSpec,
    Magnitude, MAX_COSETS,
};
use crate::Place;

/// Relative agreement required between the order-N and order-2N real coefficients.
pub const REAL_DOUBLING_TOLERANCE: f64 = 1e-12;

/// Series solutions at order `N` and `2N`, the second used only to check stability.
#[derive(Debug, Clone)]
pub struct Dynamics {
    pub model: OscillatorModel,
    pub ap: AmplitudePhase,
    pub check: AmplitudePhase,
}

impl Dynamics {
    pub fn solve(model: &OscillatorModel, order: usize) -> Result<Self> {
        Ok(Dynamics {
            model: model.clone(),
            ap: solve_amplitude_phase(model, order)?,
            check: solve_amplitude_phase(model, 2 * order)?,
        })
    }

    pub fn endpoint_data(&self, place: Place, t_prime: &Rational, t_dprime: &Rational) -> Result<EndpointData> {
        EndpointData::evaluate(&self.ap, &endpoints(t_prime, t_dprime), &[place])
    }
}

fn endpoints(t_prime: &Rational, t_dprime: &Rational) -> Endpoints {
    Endpoints {
        t_prime: t_prime.clone(),
        x_prime: Rational::zero(),
        t_dprime: t_dprime.clone(),
        x_dprime: Rational::zero(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelSource {
    Action,
    FreeParticle,
    ConstantFrequency,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadraticKernel {
    pub place: Place,
    #[serde(rename = "A", with = "serde_rational")]
    pub a: Rational,
    #[serde(rename = "B", with = "serde_rational")]
    pub b: Rational,
    #[serde(rename = "D", with = "serde_rational")]
    pub d: Rational,
    #[serde(with = "serde_rational")]
    pub h: Rational,
    #[serde(with = "serde_rational")]
    pub m: Rational,
    /// p-adic valuation of the coefficient change between the order-N and order-2N
    /// solutions, divided by h; `None` when they agree exactly.
    pub stability_valuation: Option<i64>,
    pub source: KernelSource,
}

fn coefficient_stability(
    place: Place,
    h: &Rational,
    coarse: &ClassicalAction,
    fine: &ClassicalAction,
) -> Result<Option<i64>> {
    let pairs = [(&coarse.a, &fine.a), (&coarse.b, &fine.b), (&coarse.d, &fine.d)];
    match place {
        Place::Real => {
            for (x, y) in pairs {
                let (fx, fy) = (to_f64(x), to_f64(y));
                let scale = fx.abs().max(fy.abs()).max(f64::MIN_POSITIVE);
                if (fx - fy).abs() > REAL_DOUBLING_TOLERANCE * scale {
                    return Err(Error::Precision {
                        place,
                        detail: format!("kernel coefficient moved from {fx:e} to {fy:e} when the order doubled"),
                    });
                }
            }
            Ok(None)
        }
        Place::Finite(p) => {
            let kappa = pairs
                .iter()
                .filter_map(|(x, y)| padic_valuation(&((*x - *y) / h), p))
                .min();
            if kappa.is_some_and(|k| k < 0) {
                return Err(Error::Precision {
                    place,
                    detail: format!(
                        "fractional parts of the kernel coefficients change when the order doubles (valuation {})",
                        kappa.unwrap()
                    ),
                });
            }
            if square_class(&coarse.b, p) != square_class(&fine.b, p) {
                return Err(Error::Precision {
                    place,
                    detail: "square class of B changes when the order doubles".into(),
                });
            }
            Ok(kappa)
        }
    }
}

impl QuadraticKernel {
    /// Kernel of the oscillator between `t′` and `t″`, from the series solution.
    pub fn from_action(
        place: Place,
        dynamics: &Dynamics,
        t_prime: &Rational,
        t_dprime: &Rational,
        h: &Rational,
    ) -> Result<Self> {
        check_h(h)?;
        let m = &dynamics.model.mass;
        let coarse = dynamics.endpoint_data(place, t_prime, t_dprime)?.action(m);
        let fine = EndpointData::evaluate(&dynamics.check, &endpoints(t_prime, t_dprime), &[place])?
            .action(m);
        let stability_valuation = coefficient_stability(place, h, &coarse, &fine)?;
        Ok(QuadraticKernel {
            place,
            a: coarse.a,
            b: coarse.b,
            d: coarse.d,
            h: h.clone(),
            m: m.clone(),
            stability_valuation,
            source: KernelSource::Action,
        })
    }

    /// `A = D = m/2T`, `B = −m/T`.
    pub fn free_particle(place: Place, m: &Rational, h: &Rational, duration: &Rational) -> Result<Self> {
        check_h(h)?;
        if duration.is_zero() {
            return Err(Error::Caustic);
        }
        let a = m / (int(2) * duration);
        Ok(QuadraticKernel {
            place,
            d: a.clone(),
            a,
            b: -(m / duration),
            h: h.clone(),
            m: m.clone(),
            stability_valuation: None,
            source: KernelSource::FreeParticle,
        })
    }

    /// `A = D = (mω/2) cot ωT`, `B = −mω/sin ωT`, with sine and cosine at the precision of
    /// series order `order`.
    pub fn constant_frequency(
        place: Place,
        m: &Rational,
        h: &Rational,
        w0: &Rational,
        duration: &Rational,
        order: usize,
    ) -> Result<Self> {
        check_h(h)?;
        if w0.is_zero() {
            return Self::free_particle(place, m, h, duration);
        }
        let theta = w0 * duration;
        let degree = required_degree(&theta, place, order);
        certify_trig(&theta, degree, place)?;
        let build = |deg: usize| -> Result<ClassicalAction> {
            let sc = sin_cos(&theta, deg);
            if sc.sin.is_zero() {
                return Err(Error::Caustic);
            }
            let a = m * w0 / int(2) * &sc.cos / &sc.sin;
            Ok(ClassicalAction {
                d: a.clone(),
                a,
                b: -(m * w0) / &sc.sin,
            })
        };
        let coarse = build(degree)?;
        let fine = build(required_degree(&theta, place, 2 * order))?;
        let stability_valuation = coefficient_stability(place, h, &coarse, &fine)?;
        Ok(QuadraticKernel {
            place,
            a: coarse.a,
            b: coarse.b,
            d: coarse.d,
            h: h.clone(),
            m: m.clone(),
            stability_valuation,
            source: KernelSource::ConstantFrequency,
        })
    }

    pub fn action(&self) -> ClassicalAction {
        ClassicalAction {
            a: self.a.clone(),
            b: self.b.clone(),
            d: self.d.clone(),
        }
    }

    /// Argument `−B/2h` of the λ factor.
    pub fn lambda_argument(&self) -> Rational {
        -(&self.b) / (int(2) * &self.h)
    }

    pub fn lambda(&self) -> ComplexValue {
        let arg = self.lambda_argument();
        match self.place {
            Place::Real => lambda_real(&arg),
            Place::Finite(p) => lambda_p(&arg, p),
        }
    }

    pub fn norm(&self) -> KernelNorm {
        let ratio = &self.b / &self.h;
        match self.place {
            Place::Real => KernelNorm::Real { abs: ratio.abs() },
            Place::Finite(p) => match padic_valuation(&ratio, p) {
                Some(v) => KernelNorm::Padic(Magnitude::HalfPower { base: p, twice_exp: -v }),
                None => KernelNorm::Padic(Magnitude::Zero),
            },
        }
    }

    /// Character of `−S̄/h` at the place.
    pub fn phase(&self, x_dprime: &Rational, x_prime: &Rational) -> Result<UnitPhase> {
        let u = -self.action().value(x_dprime, x_prime) / &self.h;
        match self.place {
            Place::Real => Ok(chi_real(&u)),
            Place::Finite(p) => {
                if let Some(kappa) = self.stability_valuation {
                    let vx = [x_dprime, x_prime]
                        .iter()
                        .filter_map(|x| padic_valuation(x, p))
                        .fold(0, i64::min);
                    if kappa + 2 * vx < 0 {
                        return Err(Error::Precision {
                            place: self.place,
                            detail: format!(
                                "kernel coefficients are stable to {p}^{kappa}, not enough at |x|_{p} = {p}^{}",
                                -vx
                            ),
                        });
                    }
                }
                Ok(chi(&u, p))
            }
        }
    }
}

fn check_h(h: &Rational) -> Result<()> {
    if h.is_zero() {
        return Err(Error::InvalidInput("h must be nonzero".into()));
    }
    Ok(())
}

/// `|B/h|_v`, whose square root is the kernel modulus.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelNorm {
    Padic(Magnitude),
    Real { abs: Rational },
}

impl KernelNorm {
    pub fn modulus(&self) -> f64 {
        match self {
            KernelNorm::Padic(m) => m.to_f64(),
            KernelNorm::Real { abs } => to_f64(abs).sqrt(),
        }
    }

    /// `−v_p(B/h)`, the exponent of `p^{1/2}` in the modulus.
    pub fn twice_exponent(&self) -> Option<i64> {
        match self {
            KernelNorm::Padic(Magnitude::HalfPower { twice_exp, .. }) => Some(*twice_exp),
            _ => None,
        }
    }
}

impl Serialize for KernelNorm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            KernelNorm::Padic(m) => m.serialize(s),
            KernelNorm::Real { abs } => s.serialize_str(&format!(
                "({})^(1/2)",
                crate::exact::format_rational(abs)
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelValue {
    pub place: Place,
    pub lambda_factor: ComplexValue,
    pub norm: KernelNorm,
    pub phase: UnitPhase,
}

impl KernelValue {
    pub fn value(&self) -> ComplexValue {
        self.lambda_factor * self.norm.modulus() * self.phase.to_complex()
    }
}

pub fn evaluate_kernel(k: &QuadraticKernel, x_dprime: &Rational, x_prime: &Rational) -> Result<KernelValue> {
    Ok(KernelValue {
        place: k.place,
        lambda_factor: k.lambda(),
        norm: k.norm(),
        phase: k.phase(x_dprime, x_prime)?,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelSample {
    #[serde(with = "serde_rational")]
    pub x_dprime: Rational,
    #[serde(with = "serde_rational")]
    pub x_prime: Rational,
    pub phase: UnitPhase,
    pub value: ComplexJson,
}

/// JSON form of a kernel with sampled values.
#[derive(Debug, Clone, Serialize)]
pub struct KernelReport {
    #[serde(flatten)]
    pub kernel: QuadraticKernel,
    pub lambda: ComplexJson,
    pub norm: KernelNorm,
    pub norm_exponent: Option<i64>,
    pub sample_values: Vec<KernelSample>,
}

pub fn kernel_report(k: &QuadraticKernel, samples: &[(Rational, Rational)]) -> Result<KernelReport> {
    let sample_values = samples
        .iter()
        .map(|(xd, xp)| {
            let v = evaluate_kernel(k, xd, xp)?;
            Ok(KernelSample {
                x_dprime: xd.clone(),
                x_prime: xp.clone(),
                value: v.value().into(),
                phase: v.phase,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let norm = k.norm();
    Ok(KernelReport {
        kernel: k.clone(),
        lambda: k.lambda().into(),
        norm_exponent: norm.twice_exponent(),
        norm,
        sample_values,
    })
}

/// Integration ball and coset depth for a composition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ComposeGrid {
    pub nu: i64,
    pub depth: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComposeSample {
    #[serde(with = "serde_rational")]
    pub x_dprime: Rational,
    #[serde(with = "serde_rational")]
    pub x_prime: Rational,
    pub nu: i64,
    pub depth: i64,
    pub direct: ComplexJson,
    pub composed: ComplexJson,
    pub deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComposeReport {
    pub p: u64,
    pub samples: Vec<ComposeSample>,
    pub max_deviation: f64,
}

/// Smallest `ν ≥ ν_min` with `|4α|_p > p^{−2ν}` and `|β/2α|_p ≤ p^ν`, past which the ball
/// integral no longer depends on `ν`.
fn stationary_radius(p: u64, alpha: &Rational, beta: &Rational) -> Result<i64> {
    let va = padic_valuation(alpha, p).ok_or_else(|| {
        Error::Unsupported("the intermediate quadratic coefficient vanishes".into())
    })?;
    let v2 = i64::from(p == 2);
    let mut nu = (va + 2 * v2).div_euclid(2) + 1;
    if let Some(vb) = padic_valuation(beta, p) {
        nu = nu.max(va + v2 - vb);
    }
    Ok(nu)
}

/// `∫ K1(x″,t″; x,t) K2(x,t; x′,t′) dx` by a coset sum, compared with `K(x″,t″; x′,t′)`.
///
/// `later` runs from `t` to `t″`, `earlier` from `t′` to `t`.
pub fn compose_oracle(
    later: &QuadraticKernel,
    earlier: &QuadraticKernel,
    direct: &QuadraticKernel,
    samples: &[(Rational, Rational)],
    grid: Option<ComposeGrid>,
) -> Result<ComposeReport> {
    let Place::Finite(p) = direct.place else {
        return Err(Error::Unsupported("composition oracle runs at finite places".into()));
    };
    if later.place != direct.place || earlier.place != direct.place {
        return Err(Error::InvalidInput("kernels live at different places".into()));
    }
    let h = &direct.h;
    let alpha = -(&later.d + &earlier.a) / h;
    let prefactor =
        later.lambda() * later.norm().modulus() * earlier.lambda() * earlier.norm().modulus();
    let mut out = Vec::with_capacity(samples.len());
    for (xd, xp) in samples {
        let beta = -(&later.b * xd + &earlier.b * xp) / h;
        let (nu, depth) = match grid {
            Some(g) => (g.nu, g.depth),
            None => {
                let nu = stationary_radius(p, &alpha, &beta)?;
                let spec = GaussIntegralSpec::new(p, alpha.clone(), beta.clone(), nu);
                (nu, local_constancy_depth(&spec))
            }
        };
        let spec = GaussIntegralSpec::new(p, alpha.clone(), beta.clone(), nu);
        if (p as f64).powi((nu + depth) as i32) > MAX_COSETS as f64 {
            return Err(Error::TooLarge {
                terms: format!("{p}^{}", nu + depth),
            });
        }
        let integral = gauss_brute_force(&spec, depth)?;
        // the x″² and x′² parts of both actions factor out of the integral
        later.phase(xd, &Rational::zero())?;
        earlier.phase(&Rational::zero(), xp)?;
        let outer = chi(&(-(&later.a * xd * xd + &earlier.d * xp * xp) / h), p);
        let composed = prefactor * outer.to_complex() * integral;
        let direct_value = evaluate_kernel(direct, xd, xp)?.value();
        out.push(ComposeSample {
            x_dprime: xd.clone(),
            x_prime: xp.clone(),
            nu,
            depth,
            direct: direct_value.into(),
            composed: composed.into(),
            deviation: (composed - direct_value).norm(),
        });
    }
    let max_deviation = out.iter().map(|s| s.deviation).fold(0.0, f64::max);
    Ok(ComposeReport {
        p,
        samples: out,
        max_deviation,
    })
}
