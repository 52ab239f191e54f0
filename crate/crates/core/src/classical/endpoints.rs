//! Two-point boundary problem, momentum, evolution of initial data and the classical action.

use num_traits::{Signed, Zero};
use serde::Serialize;

use super::certificate::certify_at;
use super::series::RationalSeries;
use super::solve::AmplitudePhase;
use super::trig::{certify_trig, degree_for, sin_cos, SinCos};
use crate::error::{Error, Result};
use crate::exact::rational::serde_rational;
use crate::exact::{to_f64, Rational};
use crate::Place;

/// Real-place threshold below which `|sin(γ″−γ′)|` counts as a caustic.
pub const REAL_CAUSTIC_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Endpoints {
    #[serde(with = "serde_rational")]
    pub t_prime: Rational,
    #[serde(with = "serde_rational")]
    pub x_prime: Rational,
    #[serde(with = "serde_rational")]
    pub t_dprime: Rational,
    #[serde(with = "serde_rational")]
    pub x_dprime: Rational,
}

/// Values of the amplitude and phase at a single time.
#[derive(Debug, Clone, PartialEq)]
pub struct PointValues {
    pub t: Rational,
    pub g: Rational,
    pub gdot: Rational,
    pub gamma: Rational,
    /// `C/G(t)²`
    pub gammadot: Rational,
}

impl AmplitudePhase {
    /// Degree of the truncated sine/cosine sums used for `theta` at `places`.
    pub fn trig_degree(&self, theta: &Rational, places: &[Place]) -> usize {
        degree_for(theta, places, self.order)
    }

    /// Checks that the series may be evaluated at `t` at every place in `places`.
    pub fn certify_time(&self, t: &Rational, places: &[Place]) -> Result<()> {
        for &place in places {
            certify_at(&self.g, place, t)?;
            certify_at(&self.gamma, place, t)?;
        }
        Ok(())
    }

    pub fn point(&self, t: &Rational, places: &[Place]) -> Result<PointValues> {
        self.certify_time(t, places)?;
        let g = self.g.evaluate(t);
        if g.is_zero() {
            return Err(Error::NotInvertible("G(t)"));
        }
        Ok(PointValues {
            t: t.clone(),
            gdot: self.gdot.evaluate(t),
            gamma: self.gamma.evaluate(t),
            gammadot: &self.c / (&g * &g),
            g,
        })
    }

    /// Certified sine and cosine of a phase difference.
    pub fn trig(&self, theta: &Rational, places: &[Place]) -> Result<SinCos> {
        let degree = self.trig_degree(theta, places);
        for &place in places {
            certify_trig(theta, degree, place)?;
        }
        Ok(sin_cos(theta, degree))
    }
}

/// Amplitude and phase data at both endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct EndpointData {
    pub endpoints: Endpoints,
    pub c: Rational,
    pub at_prime: PointValues,
    pub at_dprime: PointValues,
    /// `γ″ − γ′`
    pub theta: Rational,
    pub sin_theta: Rational,
    pub cos_theta: Rational,
    pub places: Vec<Place>,
}

impl EndpointData {
    pub fn evaluate(ap: &AmplitudePhase, endpoints: &Endpoints, places: &[Place]) -> Result<Self> {
        let at_prime = ap.point(&endpoints.t_prime, places)?;
        let at_dprime = ap.point(&endpoints.t_dprime, places)?;
        let theta = &at_dprime.gamma - &at_prime.gamma;
        let sc = ap.trig(&theta, places)?;
        let real_caustic =
            places.contains(&Place::Real) && to_f64(&sc.sin).abs() < REAL_CAUSTIC_TOLERANCE;
        if sc.sin.is_zero() || real_caustic {
            return Err(Error::Caustic);
        }
        Ok(EndpointData {
            endpoints: endpoints.clone(),
            c: ap.c.clone(),
            at_prime,
            at_dprime,
            theta,
            sin_theta: sc.sin,
            cos_theta: sc.cos,
            places: places.to_vec(),
        })
    }

    /// Sine and cosine of `arg`, reusing the endpoint values for `0` and `±θ`.
    fn trig_of(&self, ap: &AmplitudePhase, arg: &Rational) -> Result<SinCos> {
        if arg.is_zero() {
            return Ok(sin_cos(arg, 0));
        }
        if *arg == self.theta {
            return Ok(SinCos {
                sin: self.sin_theta.clone(),
                cos: self.cos_theta.clone(),
                degree: ap.trig_degree(arg, &self.places),
            });
        }
        ap.trig(arg, &self.places)
    }

    /// Position at `t`, written with the rational phase differences to the endpoints so that
    /// `x(t′) = x′` and `x(t″) = x″` hold exactly.
    pub fn position(&self, ap: &AmplitudePhase, t: &Rational) -> Result<Rational> {
        let pt = ap.point(t, &self.places)?;
        let ep = &self.endpoints;
        let to_end = self.trig_of(ap, &(&self.at_dprime.gamma - &pt.gamma))?;
        let from_start = self.trig_of(ap, &(&pt.gamma - &self.at_prime.gamma))?;
        let bracket = &ep.x_dprime / &self.at_dprime.g * &from_start.sin
            + &ep.x_prime / &self.at_prime.g * &to_end.sin;
        Ok(&pt.g * bracket / &self.sin_theta)
    }

    /// Momentum `m·ẋ(t)` from the same representation.
    pub fn momentum(&self, ap: &AmplitudePhase, mass: &Rational, t: &Rational) -> Result<Rational> {
        let pt = ap.point(t, &self.places)?;
        let ep = &self.endpoints;
        let to_end = self.trig_of(ap, &(&self.at_dprime.gamma - &pt.gamma))?;
        let from_start = self.trig_of(ap, &(&pt.gamma - &self.at_prime.gamma))?;
        let u = &ep.x_dprime / &self.at_dprime.g;
        let w = &ep.x_prime / &self.at_prime.g;
        let bracket = &u * &from_start.sin + &w * &to_end.sin;
        let dbracket = &u * &from_start.cos - &w * &to_end.cos;
        let xdot = (&pt.gdot * bracket + &pt.g * &pt.gammadot * dbracket) / &self.sin_theta;
        Ok(mass * xdot)
    }

    /// Coefficients `P`, `Q` of `x(t) = G(t)[P cos γ(t) + Q sin γ(t)]`.
    fn trajectory_constants(&self, ap: &AmplitudePhase) -> Result<(Rational, Rational)> {
        let (gp, gd) = (&self.at_prime.gamma, &self.at_dprime.gamma);
        let sp = sin_cos(gp, ap.trig_degree(gp, &self.places));
        let sd = sin_cos(gd, ap.trig_degree(gd, &self.places));
        let ep = &self.endpoints;
        let u = &ep.x_dprime / &self.at_dprime.g;
        let w = &ep.x_prime / &self.at_prime.g;
        let p = (&w * &sd.sin - &u * &sp.sin) / &self.sin_theta;
        let q = (&u * &sp.cos - &w * &sd.cos) / &self.sin_theta;
        Ok((p, q))
    }

    /// Trajectory as a power series in `t`.
    pub fn trajectory_series(&self, ap: &AmplitudePhase) -> Result<RationalSeries> {
        let (p, q) = self.trajectory_constants(ap)?;
        let (sin, cos) = ap.gamma.sin_cos()?;
        Ok(&ap.g * &(&cos.scale(&p) + &sin.scale(&q)))
    }

    /// Momentum series `m[Ġ(P cos γ + Q sin γ) + Gγ̇(Q cos γ − P sin γ)]`.
    pub fn momentum_series(&self, ap: &AmplitudePhase, mass: &Rational) -> Result<RationalSeries> {
        let (p, q) = self.trajectory_constants(ap)?;
        let (sin, cos) = ap.gamma.sin_cos()?;
        let first = &ap.gdot * &(&cos.scale(&p) + &sin.scale(&q));
        let second = &(&ap.g * &ap.gammadot) * &(&cos.scale(&q) - &sin.scale(&p));
        Ok((&first + &second).scale(mass))
    }

    /// Quadratic action `A x″² + B x″x′ + D x′²`.
    pub fn action(&self, mass: &Rational) -> ClassicalAction {
        let half_m = mass / Rational::from_integer(2.into());
        let cot = &self.cos_theta / &self.sin_theta;
        let (p, d) = (&self.at_prime, &self.at_dprime);
        ClassicalAction {
            a: &half_m * (&d.gammadot * &cot + &d.gdot / &d.g),
            b: -(mass * &self.c) / (&p.g * &d.g * &self.sin_theta),
            d: &half_m * (&p.gammadot * &cot - &p.gdot / &p.g),
        }
    }

    /// Boundary form `(m/2)(x″ẋ″ − x′ẋ′)` of the action.
    pub fn action_boundary(&self, ap: &AmplitudePhase, mass: &Rational) -> Result<Rational> {
        let ep = &self.endpoints;
        let k_dprime = self.momentum(ap, mass, &ep.t_dprime)?;
        let k_prime = self.momentum(ap, mass, &ep.t_prime)?;
        Ok((&ep.x_dprime * k_dprime - &ep.x_prime * k_prime) / Rational::from_integer(2.into()))
    }
}

/// `S̄(x″, x′) = A x″² + B x″x′ + D x′²`
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassicalAction {
    #[serde(rename = "A", with = "serde_rational")]
    pub a: Rational,
    #[serde(rename = "B", with = "serde_rational")]
    pub b: Rational,
    #[serde(rename = "D", with = "serde_rational")]
    pub d: Rational,
}

impl ClassicalAction {
    pub fn value(&self, x_dprime: &Rational, x_prime: &Rational) -> Rational {
        &self.a * x_dprime * x_dprime + &self.b * x_dprime * x_prime + &self.d * x_prime * x_prime
    }
}

/// Linear map `(x(t0), k(t0)) ↦ (x(t), k(t))`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionMatrix {
    pub m: [[Rational; 2]; 2],
    /// `sin²Δ + cos²Δ` for the truncated trigonometric values used; the determinant equals it.
    pub trig_norm: Rational,
}

impl EvolutionMatrix {
    pub fn determinant(&self) -> Rational {
        &self.m[0][0] * &self.m[1][1] - &self.m[0][1] * &self.m[1][0]
    }

    pub fn apply(&self, x: &Rational, k: &Rational) -> (Rational, Rational) {
        (
            &self.m[0][0] * x + &self.m[0][1] * k,
            &self.m[1][0] * x + &self.m[1][1] * k,
        )
    }
}

/// Evolution matrix from `t0` to `t`.
pub fn evolution_matrix(
    ap: &AmplitudePhase,
    mass: &Rational,
    t0: &Rational,
    t: &Rational,
    places: &[Place],
) -> Result<EvolutionMatrix> {
    let a = ap.point(t0, places)?;
    let b = ap.point(t, places)?;
    let sc = ap.trig(&(&b.gamma - &a.gamma), places)?;
    let (s, c) = (&sc.sin, &sc.cos);
    let cc = &ap.c;
    let u = c - &a.gdot * &a.g / cc * s;
    let xx = &b.g / &a.g * &u;
    let xk = &b.g * &a.g * s / (mass * cc);
    let kx = mass * (&b.gdot / &a.g * &u - cc / &b.g * (s / &a.g + &a.gdot / cc * c));
    let kk = &b.gdot * &a.g * s / cc + &a.g / &b.g * c;
    Ok(EvolutionMatrix {
        m: [[xx, xk], [kx, kk]],
        trig_norm: s * s + c * c,
    })
}

pub fn evolve_initial(
    ap: &AmplitudePhase,
    mass: &Rational,
    x0: &Rational,
    k0: &Rational,
    t0: &Rational,
    t: &Rational,
    places: &[Place],
) -> Result<(Rational, Rational)> {
    Ok(evolution_matrix(ap, mass, t0, t, places)?.apply(x0, k0))
}

/// Initial state `(x′, k′)` at `t′` of the path through both endpoints.
pub fn initial_state_from_endpoints(
    ap: &AmplitudePhase,
    mass: &Rational,
    data: &EndpointData,
) -> Result<(Rational, Rational)> {
    let k = data.momentum(ap, mass, &data.endpoints.t_prime)?;
    Ok((data.endpoints.x_prime.clone(), k))
}

/// `(G″γ̇″/G′ + G′γ̇′/G″)² − 4γ̇″γ̇′`
pub fn velocity_identity_defect(data: &EndpointData) -> Rational {
    let (p, d) = (&data.at_prime, &data.at_dprime);
    let s = &d.g * &d.gammadot / &p.g + &p.g * &p.gammadot / &d.g;
    &s * &s - Rational::from_integer(4.into()) * &d.gammadot * &p.gammadot
}

/// Sign of the real `sin(γ″ − γ′)`, for reporting.
pub fn sin_sign(data: &EndpointData) -> i8 {
    if data.sin_theta.is_positive() {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::model::{FrequencyProfile, OscillatorModel};
    use crate::classical::solve::solve_amplitude_phase;
    use crate::exact::{int, ratio};

    fn setup(p: FrequencyProfile, order: usize) -> (OscillatorModel, AmplitudePhase) {
        let m = OscillatorModel::new(int(2), p).unwrap();
        let ap = solve_amplitude_phase(&m, order).unwrap();
        (m, ap)
    }

    fn eps(tp: Rational, xp: Rational, td: Rational, xd: Rational) -> Endpoints {
        Endpoints {
            t_prime: tp,
            x_prime: xp,
            t_dprime: td,
            x_dprime: xd,
        }
    }

    #[test]
    fn interpolation_and_action_equality() {
        let (m, ap) = setup(FrequencyProfile::example1(int(1), int(1)).unwrap(), 24);
        let e = eps(ratio(5, 7), ratio(3, 7), ratio(-10, 11), ratio(-2, 5));
        let data = EndpointData::evaluate(&ap, &e, &[Place::Finite(5)]).unwrap();
        assert_eq!(data.position(&ap, &e.t_prime).unwrap(), e.x_prime);
        assert_eq!(data.position(&ap, &e.t_dprime).unwrap(), e.x_dprime);
        let action = data.action(&m.mass);
        assert_eq!(
            data.action_boundary(&ap, &m.mass).unwrap(),
            action.value(&e.x_dprime, &e.x_prime)
        );
        assert!(velocity_identity_defect(&data).is_zero());
    }

    #[test]
    fn trajectory_series_solves_the_equation_of_motion() {
        let (m, ap) = setup(FrequencyProfile::example1(int(2), int(1)).unwrap(), 20);
        let e = eps(ratio(1, 10), int(1), ratio(1, 5), int(2));
        let data = EndpointData::evaluate(&ap, &e, &[Place::Real]).unwrap();
        let x = data.trajectory_series(&ap).unwrap();
        let w2 = m.profile.omega_sq.series(20);
        let residual = &x.derivative().derivative() + &(&w2 * &x);
        assert!(residual.vanishes_through(18));
        let k = data.momentum_series(&ap, &m.mass).unwrap();
        let diff = &k - &x.derivative().scale(&m.mass);
        assert!(diff.vanishes_through(19));
        let at = to_f64(&(x.evaluate(&e.t_dprime) - &e.x_dprime));
        assert!(at.abs() < 1e-6);
    }

    #[test]
    fn free_particle_momentum_is_constant() {
        let (m, ap) = setup(FrequencyProfile::free(), 30);
        let e = eps(int(0), int(1), ratio(1, 4), int(3));
        let data = EndpointData::evaluate(&ap, &e, &[Place::Real]).unwrap();
        let expect = 2.0 * (3.0 - 1.0) / 0.25;
        for t in [int(0), ratio(1, 8), ratio(1, 4)] {
            let k = to_f64(&data.momentum(&ap, &m.mass, &t).unwrap());
            assert!((k - expect).abs() < 1e-9, "{k}");
        }
    }

    #[test]
    fn evolution_matrix_properties() {
        let (m, ap) = setup(FrequencyProfile::example1(int(1), int(2)).unwrap(), 24);
        let places = [Place::Real];
        let id = evolution_matrix(&ap, &m.mass, &ratio(1, 5), &ratio(1, 5), &places).unwrap();
        assert_eq!(id.m, [[int(1), int(0)], [int(0), int(1)]]);
        let mx = evolution_matrix(&ap, &m.mass, &ratio(1, 5), &ratio(1, 2), &places).unwrap();
        assert_eq!(mx.determinant(), mx.trig_norm);
        assert!((to_f64(&mx.trig_norm) - 1.0).abs() < 1e-15);

        let e = eps(ratio(1, 5), int(1), ratio(1, 2), ratio(1, 3));
        let data = EndpointData::evaluate(&ap, &e, &places).unwrap();
        let (x0, k0) = initial_state_from_endpoints(&ap, &m.mass, &data).unwrap();
        let (x, k) = mx.apply(&x0, &k0);
        assert_eq!(x, e.x_dprime);
        // the momenta agree up to the factor sin²+cos² of the truncated trigonometry
        let k_end = data.momentum(&ap, &m.mass, &e.t_dprime).unwrap();
        assert!((to_f64(&k) - to_f64(&k_end)).abs() < 1e-12);
    }

    #[test]
    fn constant_frequency_reduces_to_textbook_kernel() {
        let w = ratio(3, 2);
        let (m, ap) = setup(FrequencyProfile::constant(w.clone()), 24);
        let e = eps(int(0), int(0), ratio(1, 3), int(0));
        let data = EndpointData::evaluate(&ap, &e, &[Place::Real]).unwrap();
        let sc = ap.trig(&(&w * ratio(1, 3)), &[Place::Real]).unwrap();
        let act = data.action(&m.mass);
        assert_eq!(act.a, &m.mass * &w / int(2) * &sc.cos / &sc.sin);
        assert_eq!(act.d, act.a);
        assert_eq!(act.b, -(&m.mass * &w) / &sc.sin);
    }

    #[test]
    fn caustic_when_endpoints_coincide() {
        let (_, ap) = setup(FrequencyProfile::constant(int(1)), 10);
        let e = eps(int(1), int(0), int(1), int(1));
        assert_eq!(EndpointData::evaluate(&ap, &e, &[]), Err(Error::Caustic));
    }
}
