//! Element Green's function of the 1-D adjoint advection-diffusion operator and
//! its element averages τ, γ₀, γ₁.
//!
//! On an element [0, h] the fine scales satisfy, on average,
//!
//! ```text
//! (1/h) ∫ u′ = τ R + ν γ₀ u′(0) − ν γ₁ u′(h)
//! ```
//!
//! where R is the (constant) coarse residual and u′(0), u′(h) are the element's
//! own fine-scale traces.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::quadrature::gauss_rule_1d;

/// Below this |z| = |a|h/ν the series branches are used.
pub const SERIES_THRESHOLD: f64 = 0.1;

/// Constant coefficients of one element.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ADParams {
    pub a: f64,
    pub nu: f64,
    pub h: f64,
}

/// Element-averaged Green's function quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreenQuantities {
    pub tau: f64,
    pub gamma0: f64,
    pub gamma1: f64,
}

impl ADParams {
    pub fn new(a: f64, nu: f64, h: f64) -> Result<Self> {
        let p = ADParams { a, nu, h };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(invalid(format!("diffusivity must be positive, got {}", self.nu)));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(invalid(format!("element size must be positive, got {}", self.h)));
        }
        if !self.a.is_finite() {
            return Err(invalid("advection velocity must be finite"));
        }
        Ok(())
    }

    /// Element Péclet number z = a h / ν.
    pub fn peclet(&self) -> f64 {
        self.a * self.h / self.nu
    }
}

/// 1/(e^z − 1) without materializing e^{|z|} for large positive z.
fn inv_expm1(z: f64) -> f64 {
    if z > 0.0 {
        let e = (-z).exp();
        e / -(-z).exp_m1()
    } else {
        1.0 / z.exp_m1()
    }
}

/// G(z) = 1/(e^z − 1) − 1/z, so that γ₁ = G/ν, γ₀ = (1 + G)/ν and τ = (h²/ν)(½ + G)/z.
fn g_closed(z: f64) -> f64 {
    inv_expm1(z) - 1.0 / z
}

// Taylor coefficients of 1/(e^z − 1) − 1/z + 1/2 = z/12 − z³/720 + z⁵/30240 − …
const SERIES: [f64; 6] =
    [1.0 / 12.0, -1.0 / 720.0, 1.0 / 30240.0, -1.0 / 1209600.0, 1.0 / 47900160.0, -691.0 / 1307674368000.0];

/// (½ + G(z))/z as an even series in z.
fn t_series(z: f64) -> f64 {
    let z2 = z * z;
    SERIES.iter().rev().fold(0.0, |acc, c| acc * z2 + c)
}

fn t_closed(z: f64) -> f64 {
    (0.5 + g_closed(z)) / z
}

/// τ = h/(2a) − ν/a² + h/(a(e^z − 1)), with the series branch near a = 0.
pub fn tau(params: ADParams) -> Result<f64> {
    params.validate()?;
    let z = params.peclet();
    let t = if z.abs() < SERIES_THRESHOLD { t_series(z) } else { t_closed(z) };
    Ok(params.h * params.h / params.nu * t)
}

/// (γ₀, γ₁) with the same branching as [`tau`].
pub fn gammas(params: ADParams) -> Result<(f64, f64)> {
    params.validate()?;
    let z = params.peclet();
    let g = if z.abs() < SERIES_THRESHOLD { z * t_series(z) - 0.5 } else { g_closed(z) };
    Ok(((1.0 + g) / params.nu, g / params.nu))
}

/// τ, γ₀ and γ₁ together.
pub fn green_quantities(params: ADParams) -> Result<GreenQuantities> {
    let (gamma0, gamma1) = gammas(params)?;
    Ok(GreenQuantities { tau: tau(params)?, gamma0, gamma1 })
}

/// s(t) = 1 − e^{−r t}.
fn s(r: f64, t: f64) -> f64 {
    -(-r * t).exp_m1()
}

/// Green's function g(x, y) of the adjoint problem on [0, h] with source point x.
///
/// Piecewise: g₁ for y < x and g₂ for y ≥ x, both vanishing at y = 0 and y = h.
pub fn green_eval(params: ADParams, x: f64, y: f64) -> Result<f64> {
    params.validate()?;
    let ADParams { a, nu, h } = params;
    if a == 0.0 {
        return Err(invalid("the closed-form Green's function needs a != 0"));
    }
    if !(x > 0.0 && x < h) {
        return Err(invalid(format!("source point {x} must lie strictly inside (0, {h})")));
    }
    if !(0.0..=h).contains(&y) {
        return Err(invalid(format!("field point {y} outside [0, {h}]")));
    }
    Ok(green_unchecked(a, nu, h, x, y))
}

fn green_unchecked(a: f64, nu: f64, h: f64, x: f64, y: f64) -> f64 {
    let r = a / nu;
    if y < x {
        s(r, h - x) * s(r, y) / (a * s(r, h))
    } else {
        (-r * (y - x)).exp() * s(r, x) * s(r, h - y) / (a * s(r, h))
    }
}

/// ∂g/∂y at (x, 0⁺) and (x, h⁻).
fn green_dy_ends(a: f64, nu: f64, h: f64, x: f64) -> (f64, f64) {
    let r = a / nu;
    let at0 = s(r, h - x) / (nu * s(r, h));
    let ath = -s(r, x) * (-r * (h - x)).exp() / (nu * s(r, h));
    (at0, ath)
}

/// ∂g/∂y on either side of the source point, for checking the unit flux jump.
pub fn green_dy_at_source(params: ADParams, x: f64) -> Result<(f64, f64)> {
    params.validate()?;
    let ADParams { a, nu, h } = params;
    if a == 0.0 || !(x > 0.0 && x < h) {
        return Err(invalid("need a != 0 and a source point inside the element"));
    }
    let r = a / nu;
    let below = s(r, h - x) * r * (-r * x).exp() / (a * s(r, h));
    let above = -r * s(r, x) / (a * s(r, h));
    Ok((below, above))
}

/// Quadrature oracle for (τ, γ₀, γ₁), independent of the closed forms.
///
/// τ = (1/h) ∬ g dy dx with the y-integral split at the source point;
/// γ₀ = (1/h) ∫ ∂g/∂y(x, 0) dx and γ₁ = (1/h) ∫ ∂g/∂y(x, h) dx.
/// Each range is cut into panels no wider than a few boundary-layer widths ν/|a|.
pub fn tau_gamma_oracle(params: ADParams, n_quad: usize) -> Result<GreenQuantities> {
    params.validate()?;
    if n_quad < 16 {
        return Err(invalid(format!("oracle needs at least 16 points, got {n_quad}")));
    }
    if params.a == 0.0 {
        return Err(invalid("the oracle integrates the a != 0 Green's function"));
    }
    let ADParams { a, nu, h } = params;
    let rule = gauss_rule_1d(n_quad)?;
    let layer = 4.0 * nu / a.abs();
    let panels = ((h / layer).ceil() as usize).clamp(1, 64);
    let integrate = |lo: f64, hi: f64, f: &dyn Fn(f64) -> f64| -> f64 {
        let w = (hi - lo) / panels as f64;
        (0..panels).map(|k| rule.integrate(lo + w * k as f64, lo + w * (k + 1) as f64, f)).sum()
    };
    let inner = |x: f64| {
        integrate(0.0, x, &|y| green_unchecked(a, nu, h, x, y)) + integrate(x, h, &|y| green_unchecked(a, nu, h, x, y))
    };
    let tau = integrate(0.0, h, &inner) / h;
    let gamma0 = integrate(0.0, h, &|x| green_dy_ends(a, nu, h, x).0) / h;
    let gamma1 = integrate(0.0, h, &|x| green_dy_ends(a, nu, h, x).1) / h;
    Ok(GreenQuantities { tau, gamma0, gamma1 })
}
