//! Power-series solution of the amplitude/phase system
//! `G³G̈ + ω²G⁴ = C²`, `γ̇G² = C`, `γ(0) = 0`.

use num_traits::Zero;

use super::model::OscillatorModel;
use super::series::RationalSeries;
use crate::error::{Error, Result};
use crate::exact::{int, Rational};

#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudePhase {
    pub g: RationalSeries,
    pub gamma: RationalSeries,
    pub gdot: RationalSeries,
    pub gammadot: RationalSeries,
    pub c: Rational,
    pub order: usize,
}

fn conv_at(a: &[Rational], b: &[Rational], n: usize) -> Rational {
    (0..=n).fold(Rational::zero(), |acc, k| acc + &a[k] * &b[n - k])
}

/// Solves through `t^order` with the recurrence `G̈ = C²·G⁻³ − ω²G`.
pub fn solve_amplitude_phase(model: &OscillatorModel, order: usize) -> Result<AmplitudePhase> {
    if order < 2 {
        return Err(Error::InvalidInput("series order must be at least 2".into()));
    }
    let prof = &model.profile;
    if prof.g0.is_zero() {
        return Err(Error::NotInvertible("G(0)"));
    }
    let w2 = prof.omega_sq.series(order);
    let w2: Vec<Rational> = (0..=order).map(|n| w2.coeff(n)).collect();
    let c2 = &prof.c * &prof.c;
    let inv_g0 = prof.g0.recip();

    let mut g = vec![prof.g0.clone(), prof.gdot0.clone()];
    let mut h: Vec<Rational> = vec![inv_g0.clone()];
    let mut h2: Vec<Rational> = Vec::new();
    let mut h3: Vec<Rational> = Vec::new();
    for n in 0..=order - 2 {
        // H = 1/G is known through t^n once g[0..=n] is
        if n > 0 {
            let s = (1..=n).fold(Rational::zero(), |acc, k| acc + &g[k] * &h[n - k]);
            h.push(-s * &inv_g0);
        }
        h2.push(conv_at(&h, &h, n));
        h3.push(conv_at(&h2, &h, n));
        let rhs = &c2 * &h3[n] - conv_at(&w2, &g, n);
        g.push(rhs / int(((n + 1) * (n + 2)) as i64));
    }
    let g = RationalSeries::truncated(g);
    let inv = g.inverse()?;
    let gammadot = (&inv * &inv).scale(&prof.c);
    let gamma = gammadot.integral().truncate(order);
    Ok(AmplitudePhase {
        gdot: g.derivative(),
        g,
        gamma,
        gammadot,
        c: prof.c.clone(),
        order,
    })
}

impl AmplitudePhase {
    /// `γ̇G² − C`, identically zero through the solved order.
    pub fn phase_residual(&self) -> RationalSeries {
        let g2 = &self.g * &self.g;
        &(&self.gammadot * &g2) - &RationalSeries::constant(self.c.clone())
    }

    /// `G³G̈ + ω²G⁴ − C²`, identically zero through `order − 2`.
    pub fn amplitude_residual(&self, model: &OscillatorModel) -> RationalSeries {
        let g2 = &self.g * &self.g;
        let g3 = &g2 * &self.g;
        let g4 = &g2 * &g2;
        let gddot = self.gdot.derivative();
        let w2 = model.profile.omega_sq.series(self.order);
        let lhs = &(&g3 * &gddot) + &(&w2 * &g4);
        &lhs - &RationalSeries::constant(&self.c * &self.c)
    }
}
