//! Convergence certificates for evaluating a truncated series at a rational point.

use num_traits::{Signed, Zero};
use serde::Serialize;

use super::series::RationalSeries;
use crate::error::{Error, Result};
use crate::exact::padic::padic_valuation;
use crate::exact::rational::serde_rational_opt;
use crate::exact::{to_f64, Rational};
use crate::Place;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PadicRadius {
    pub p: u64,
    /// Estimated `ρ` with `v_p(a_n) ≳ ρ·n`; the series converges for `v_p(t) > −ρ`.
    /// `None` when no growth is visible (polynomial-like series).
    #[serde(with = "serde_rational_opt")]
    pub radius_exponent: Option<Rational>,
    /// Smallest truncation order beyond which the estimated tail lies in `Z_p`.
    pub tail_order: usize,
    /// Lower bound on the valuation of the first omitted block.
    #[serde(with = "serde_rational_opt")]
    pub tail_valuation: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceCertificate {
    /// Real radius estimate from the root test on the later coefficients.
    pub real_radius: f64,
    pub padic: Vec<PadicRadius>,
}

fn window(series: &RationalSeries) -> Vec<(usize, &Rational)> {
    let n = series.order();
    let start = (n / 2).max(1);
    series
        .coeffs()
        .iter()
        .enumerate()
        .skip(start)
        .filter(|(_, a)| !a.is_zero())
        .collect()
}

/// Root-test estimate of the real radius of convergence.
pub fn real_radius(series: &RationalSeries) -> f64 {
    if series.is_polynomial() {
        return f64::INFINITY;
    }
    window(series)
        .into_iter()
        .map(|(n, a)| {
            let ln_a = to_f64(&a.abs()).ln();
            (-ln_a / n as f64).exp()
        })
        .fold(f64::INFINITY, f64::min)
}

fn padic_radius(series: &RationalSeries, p: u64, t: &Rational) -> Result<PadicRadius> {
    let order = series.order();
    let polynomial_like = PadicRadius {
        p,
        radius_exponent: None,
        tail_order: order,
        tail_valuation: None,
    };
    if series.is_polynomial() {
        return Ok(polynomial_like);
    }
    let later = window(series);
    if later.is_empty() {
        return Ok(polynomial_like);
    }
    let rho = later
        .iter()
        .map(|(n, a)| {
            Rational::from_integer(padic_valuation(a, p).expect("nonzero").into())
                / Rational::from_integer((*n as i64).into())
        })
        .min()
        .expect("nonempty window");
    let delta = series
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, a)| !a.is_zero())
        .map(|(n, a)| {
            Rational::from_integer(padic_valuation(a, p).expect("nonzero").into())
                - &rho * Rational::from_integer((n as i64).into())
        })
        .min()
        .unwrap_or_else(Rational::zero);
    let Some(vt) = padic_valuation(t, p) else {
        return Ok(PadicRadius {
            p,
            radius_exponent: Some(rho),
            tail_order: 0,
            tail_valuation: None,
        });
    };
    let rate = &rho + Rational::from_integer(vt.into());
    let place = Place::Finite(p);
    if !rate.is_positive() {
        return Err(Error::Divergence {
            place,
            detail: format!(
                "|t|_{p} = {p}^{} lies outside the estimated radius {p}^({})",
                -vt,
                rho
            ),
        });
    }
    // smallest N' ≥ 0 with (N'+1)·rate + δ ≥ 0
    let needed = (-&delta / &rate).ceil().to_integer();
    let tail_order = i64::try_from(needed).unwrap_or(i64::MAX).saturating_sub(1).max(0) as usize;
    let tail_valuation =
        Rational::from_integer(((order + 1) as i64).into()) * &rate + &delta;
    if tail_order > order {
        return Err(Error::Divergence {
            place,
            detail: format!(
                "tail of the order-{order} truncation at t = {t} only enters Z_{p} beyond order {tail_order}"
            ),
        });
    }
    Ok(PadicRadius {
        p,
        radius_exponent: Some(rho),
        tail_order,
        tail_valuation: Some(tail_valuation),
    })
}

/// Certifies evaluation of `series` at `t` for every prime in `primes`.
pub fn convergence_certificate(
    series: &RationalSeries,
    primes: &[u64],
    t: &Rational,
) -> Result<ConvergenceCertificate> {
    let padic = primes
        .iter()
        .map(|&p| padic_radius(series, p, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceCertificate {
        real_radius: real_radius(series),
        padic,
    })
}

/// Certifies evaluation at a single place; the real check compares against the radius
/// estimate.
pub fn certify_at(series: &RationalSeries, place: Place, t: &Rational) -> Result<()> {
    match place {
        Place::Finite(p) => padic_radius(series, p, t).map(|_| ()),
        Place::Real => {
            let radius = real_radius(series);
            let x = to_f64(t).abs();
            if x >= radius {
                return Err(Error::Divergence {
                    place,
                    detail: format!("|t| = {x} exceeds the real radius estimate {radius}"),
                });
            }
            Ok(())
        }
    }
}
