use num_traits::{One, Signed, Zero};
use padic_oscillator::classical::{
    certify_at, convergence_certificate, evolution_matrix, solve_amplitude_phase, EndpointData,
    Endpoints, FrequencyProfile, OscillatorModel,
};
use padic_oscillator::exact::{int, padic_valuation, ratio, Rational};
use padic_oscillator::{Error, Place};

fn model(profile: FrequencyProfile) -> OscillatorModel {
    OscillatorModel::new(int(1), profile).unwrap()
}

/// Coefficients of (1 + a t)^e by the generalized binomial theorem.
fn binomial_linear(a: &Rational, e: &Rational, order: usize) -> Vec<Rational> {
    let mut out = Vec::new();
    let mut c = Rational::one();
    let mut apow = Rational::one();
    for k in 0..=order {
        out.push(&c * &apow);
        c = c * (e - int(k as i64)) / int(k as i64 + 1);
        apow *= a;
    }
    out
}

#[test]
fn example1_reproduces_linear_amplitude() {
    for a in 1..=3 {
        for b in 1..=3 {
            let (a, b) = (int(a), int(b));
            let m = model(FrequencyProfile::example1(a.clone(), b.clone()).unwrap());
            let ap = solve_amplitude_phase(&m, 24).unwrap();
            let mut g = vec![b.clone(), &a * &b];
            g.resize(25, int(0));
            assert_eq!(ap.g.coeffs(), &g[..]);
            // t/(b²(1+at)) = Σ_{n≥1} (−a)^{n−1} tⁿ / b²
            let mut want = int(1) / (&b * &b);
            assert!(ap.gamma.coeff(0).is_zero());
            for n in 1..=24 {
                assert_eq!(ap.gamma.coeff(n), want, "a={a} b={b} n={n}");
                want *= -&a;
            }
        }
    }
}

#[test]
fn example2_reproduces_square_root_and_logarithm() {
    for (a, b) in [(int(1), int(1)), (int(2), int(1)), (ratio(3, 2), int(1)), (int(1), int(2))] {
        let m = model(FrequencyProfile::example2(a.clone(), b.clone()).unwrap());
        let ap = solve_amplitude_phase(&m, 20).unwrap();
        let root = binomial_linear(&a, &ratio(1, 2), 20);
        for (n, c) in root.iter().enumerate() {
            assert_eq!(ap.g.coeff(n), &b * c, "G coefficient {n}");
        }
        // ln(1+at)/(ab²)
        let mut apow = a.clone();
        for n in 1..=20usize {
            let sign = if n % 2 == 1 { int(1) } else { int(-1) };
            let want = sign * &apow / int(n as i64) / (&a * &b * &b);
            assert_eq!(ap.gamma.coeff(n), want, "γ coefficient {n}");
            apow *= &a;
        }
        assert!(ap.phase_residual().vanishes_through(20));
        assert!(ap.amplitude_residual(&m).vanishes_through(18));
    }
}

#[test]
fn example1_certificate_at_five() {
    let m = model(FrequencyProfile::example1(int(1), int(1)).unwrap());
    let ap = solve_amplitude_phase(&m, 24).unwrap();
    let place = Place::Finite(5);
    assert!(certify_at(&ap.gamma, place, &int(5)).is_ok());
    let err = certify_at(&ap.gamma, place, &ratio(1, 5)).unwrap_err();
    assert!(matches!(err, Error::Divergence { .. }), "{err}");
    let cert = convergence_certificate(&ap.gamma, &[5], &int(5)).unwrap();
    assert_eq!(cert.padic.len(), 1);
    assert!(cert.padic[0].tail_order <= 24);
}

#[test]
fn example1_endpoint_data_at_five() {
    let m = model(FrequencyProfile::example1(int(1), int(1)).unwrap());
    let ap = solve_amplitude_phase(&m, 24).unwrap();
    let ep = Endpoints {
        t_prime: int(0),
        x_prime: ratio(2, 3),
        t_dprime: int(25),
        x_dprime: ratio(-1, 7),
    };
    let data = EndpointData::evaluate(&ap, &ep, &[Place::Finite(5)]).unwrap();
    assert_eq!(data.position(&ap, &ep.t_prime).unwrap(), ep.x_prime);
    assert_eq!(data.position(&ap, &ep.t_dprime).unwrap(), ep.x_dprime);
    assert!(padic_valuation(&data.theta, 5).unwrap() >= 1);
    let action = data.action(&m.mass);
    assert_eq!(
        action.value(&ep.x_dprime, &ep.x_prime),
        data.action_boundary(&ap, &m.mass).unwrap()
    );
}

#[test]
fn zero_endpoints_have_zero_action() {
    let m = model(FrequencyProfile::example1(int(2), int(1)).unwrap());
    let ap = solve_amplitude_phase(&m, 16).unwrap();
    let ep = Endpoints {
        t_prime: ratio(1, 10),
        x_prime: int(0),
        t_dprime: ratio(1, 5),
        x_dprime: int(0),
    };
    let data = EndpointData::evaluate(&ap, &ep, &[Place::Real]).unwrap();
    assert!(data.action(&m.mass).value(&int(0), &int(0)).is_zero());
    assert!(data.action_boundary(&ap, &m.mass).unwrap().is_zero());
}

#[test]
fn free_particle_momentum_is_constant() {
    let m = OscillatorModel::new(int(3), FrequencyProfile::free()).unwrap();
    let ap = solve_amplitude_phase(&m, 20).unwrap();
    let ep = Endpoints {
        t_prime: ratio(1, 10),
        x_prime: int(1),
        t_dprime: ratio(3, 10),
        x_dprime: int(2),
    };
    let data = EndpointData::evaluate(&ap, &ep, &[Place::Real]).unwrap();
    // the mechanical momentum of a free particle is m·Δx/Δt
    let want = 3.0 * 1.0 / 0.2;
    for t in [ratio(1, 10), ratio(1, 5), ratio(3, 10)] {
        let k = data.momentum(&ap, &m.mass, &t).unwrap();
        let k = padic_oscillator::exact::to_f64(&k);
        assert!((k - want).abs() < 1e-9, "k({t}) = {k}");
    }
}

#[test]
fn evolution_matrix_is_identity_at_the_start() {
    let m = model(FrequencyProfile::example1(int(1), int(2)).unwrap());
    let ap = solve_amplitude_phase(&m, 16).unwrap();
    let t0 = ratio(1, 7);
    let e = evolution_matrix(&ap, &m.mass, &t0, &t0, &[Place::Real]).unwrap();
    assert_eq!(e.m, [[int(1), int(0)], [int(0), int(1)]]);
    let e = evolution_matrix(&ap, &m.mass, &t0, &ratio(2, 7), &[Place::Real]).unwrap();
    assert_eq!(e.determinant(), e.trig_norm);
    assert!((padic_oscillator::exact::to_f64(&e.determinant()) - 1.0).abs() < 1e-15);
}

#[test]
fn caustic_is_reported() {
    let m = model(FrequencyProfile::constant(int(1)));
    let ap = solve_amplitude_phase(&m, 12).unwrap();
    let ep = Endpoints {
        t_prime: int(2),
        x_prime: int(0),
        t_dprime: int(2),
        x_dprime: int(1),
    };
    let err = EndpointData::evaluate(&ap, &ep, &[Place::Finite(3)]).unwrap_err();
    assert!(matches!(err, Error::Caustic));
}

#[test]
fn constant_frequency_matches_textbook_solution() {
    // x(t) = x′ cos ω(t−t′) + (x″ − x′ cos ωT) sin ω(t−t′)/sin ωT, compared at the midpoint
    let w = 2.0f64;
    let m = model(FrequencyProfile::constant(int(2)));
    let ap = solve_amplitude_phase(&m, 16).unwrap();
    let ep = Endpoints {
        t_prime: int(0),
        x_prime: int(1),
        t_dprime: ratio(1, 2),
        x_dprime: int(-1),
    };
    let data = EndpointData::evaluate(&ap, &ep, &[Place::Real]).unwrap();
    let t = 0.25f64;
    let big_t = 0.5f64;
    let want = (w * t).cos() + (-1.0 - (w * big_t).cos()) * (w * t).sin() / (w * big_t).sin();
    let got = padic_oscillator::exact::to_f64(&data.position(&ap, &ratio(1, 4)).unwrap());
    assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    assert!(data.sin_theta.is_positive());
}
