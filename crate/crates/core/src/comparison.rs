//! Closed-form comparison kernels and the ratio diagnostics built from them.
//!
//! Every sharp estimate in this laboratory is stated against products of
//! these functions:
//!
//! * `varrho(ϑ, t, u) = t^ϑ / (|u| + t^{1/α})^{d+α}`, the algebraic profile
//!   of the free stable kernel,
//! * `xi(γ, λ, t, u) = t^{-(d+γ)/2} e^{-λ|u|²/t}`, the Gaussian profile,
//! * `q_hat(t, x, y) = 1 ∧ ρ(x)/(|x−y| + t^{1/α})`, the boundary decay
//!   factor, and `q_alpha = q_hat(t,x,y)·q_hat(t,y,x)`,
//! * `q_d = q_alpha · varrho(1, t, x−y)`, the two-sided comparator for the
//!   subordinated kernel. The free kernel itself is never evaluated: it is
//!   known only up to two-sided constants, and every verification here is a
//!   ratio-boundedness claim, which absorbs that substitution.

use crate::domain::{Domain, ModelParams, Point};
use crate::error::{Error, Result};

/// Ambient context: model parameters plus the domain.
#[derive(Debug, Clone)]
pub struct ComparisonContext {
    pub params: ModelParams,
    pub domain: Domain,
}

impl ComparisonContext {
    pub fn new(params: ModelParams, domain: Domain) -> Result<Self> {
        if params.dim != domain.dim {
            return Err(Error::DimensionMismatch {
                expected: params.dim,
                got: domain.dim,
            });
        }
        Ok(Self { params, domain })
    }

    fn rho(&self, x: &Point) -> f64 {
        self.domain.rho_unchecked(x)
    }

    /// `ϱ^ϑ_d(t, u) = t^ϑ/(|u| + t^{1/α})^{d+α}` with `u = x − y`, for the
    /// ambient `d`; `d_shift` adds to the dimension exponent (the `d+1+ϑ`
    /// variants in gradient and Hölder estimates).
    pub fn varrho_shifted(&self, vartheta: f64, d_shift: f64, t: f64, dist: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "varrho requires t > 0, got {t}"
            )));
        }
        let a = self.params.alpha;
        let d = self.params.dim as f64 + d_shift;
        Ok(t.powf(vartheta) / (dist + t.powf(1.0 / a)).powf(d + a))
    }

    /// `ϱ^ϑ_d(t, x−y)`.
    pub fn varrho(&self, vartheta: f64, t: f64, dist: f64) -> Result<f64> {
        self.varrho_shifted(vartheta, 0.0, t, dist)
    }

    /// `ξ^γ_λ(t, u) = t^{-(d+γ)/2} e^{-λ|u|²/t}`.
    pub fn xi(&self, gamma: f64, lambda: f64, t: f64, dist: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "xi requires t > 0, got {t}"
            )));
        }
        let d = self.params.dim as f64;
        Ok(t.powf(-(d + gamma) / 2.0) * (-lambda * dist * dist / t).exp())
    }

    /// Boundary decay factor `q̂_α(t,x,y) = 1 ∧ ρ(x)/(|x−y| + t^{1/α})`.
    pub fn q_hat(&self, t: f64, x: &Point, y: &Point) -> f64 {
        let l = x.dist(y) + t.powf(1.0 / self.params.alpha);
        (self.rho(x) / l).min(1.0)
    }

    /// `q_α(t,x,y) = q̂_α(t,x,y)·q̂_α(t,y,x)` (symmetric).
    pub fn q_alpha(&self, t: f64, x: &Point, y: &Point) -> f64 {
        let l = x.dist(y) + t.powf(1.0 / self.params.alpha);
        (self.rho(x) / l).min(1.0) * (self.rho(y) / l).min(1.0)
    }

    /// Comparator `q^D(t,x,y) = q_α(t,x,y)·ϱ¹_d(t, x−y)` for the
    /// subordinated Dirichlet kernel.
    pub fn q_d(&self, t: f64, x: &Point, y: &Point) -> f64 {
        let a = self.params.alpha;
        let d = self.params.dim as f64;
        let l = x.dist(y) + t.powf(1.0 / a);
        (self.rho(x) / l).min(1.0) * (self.rho(y) / l).min(1.0) * t / l.powf(d + a)
    }

    /// Ratio of the factored comparator `q_α` to the intertwined form
    /// `1 ∧ ρ(x)ρ(y)/(|x−y|+t^{1/α})²`; bounded above and below by positive
    /// constants uniformly on (0, T] × D × D.
    pub fn sharp_form_ratio(&self, t: f64, x: &Point, y: &Point) -> f64 {
        let l = x.dist(y) + t.powf(1.0 / self.params.alpha);
        let intertwined = (self.rho(x) * self.rho(y) / (l * l)).min(1.0);
        self.q_alpha(t, x, y) / intertwined
    }

    /// 3-P ratio for the comparator `q_α`:
    /// `q_α(t,x,z)q_α(s,z,y)/q_α(t+s,x,y)` divided by
    /// `q̂_α(t,z,x)² + q̂_α(s,z,y)²`. Uniformly bounded above.
    pub fn three_p_q_ratio(&self, t: f64, s: f64, x: &Point, y: &Point, z: &Point) -> f64 {
        let num = self.q_alpha(t, x, z) * self.q_alpha(s, z, y) / self.q_alpha(t + s, x, y);
        let h1 = self.q_hat(t, z, x);
        let h2 = self.q_hat(s, z, y);
        num / (h1 * h1 + h2 * h2)
    }

    /// Generalized 3-P ratio for a kernel evaluator `r(t,x,y)`:
    /// `r(t,x,z)r(s,z,y)/r(t+s,x,y)` divided by
    /// `(t∧s)·[q̂_α(t,z,x)²ϱ⁰_d(t,x−z) + q̂_α(s,z,y)²ϱ⁰_d(s,z−y)]`.
    pub fn three_p_r_ratio<F>(
        &self,
        t: f64,
        s: f64,
        x: &Point,
        y: &Point,
        z: &Point,
        r_eval: F,
    ) -> Result<f64>
    where
        F: Fn(f64, &Point, &Point) -> Result<f64>,
    {
        let num = r_eval(t, x, z)? * r_eval(s, z, y)? / r_eval(t + s, x, y)?;
        let h1 = self.q_hat(t, z, x);
        let h2 = self.q_hat(s, z, y);
        let v1 = self.varrho(0.0, t, x.dist(z))?;
        let v2 = self.varrho(0.0, s, z.dist(y))?;
        Ok(num / (t.min(s) * (h1 * h1 * v1 + h2 * h2 * v2)))
    }

    /// The classical 3-P combination that fails near the boundary:
    /// `r(t+s,x,y)[r(t,x,z) + r(s,z,y)] / [r(t,x,z)·r(s,z,y)]`.
    ///
    /// Requires `t/4 < s < 3t/4` and `2|x−y| ≥ |x−z| + |z−y|`; tends to zero
    /// as `ρ(x) = ρ(y) → 0` with `z` held deep inside, which is exactly why
    /// no inequality of the whole-space form can hold for the subordinated
    /// Dirichlet kernel.
    pub fn classical_three_p_ratio<F>(
        &self,
        t: f64,
        s: f64,
        x: &Point,
        y: &Point,
        z: &Point,
        r_eval: F,
    ) -> Result<f64>
    where
        F: Fn(f64, &Point, &Point) -> Result<f64>,
    {
        if !(s > t / 4.0 && s < 3.0 * t / 4.0) {
            return Err(Error::InvalidParameter(format!(
                "classical 3-P probe requires t/4 < s < 3t/4, got t={t}, s={s}"
            )));
        }
        if 2.0 * x.dist(y) < x.dist(z) + z.dist(y) {
            return Err(Error::InvalidParameter(
                "classical 3-P probe requires 2|x-y| >= |x-z| + |z-y|".into(),
            ));
        }
        let a = r_eval(t, x, z)?;
        let b = r_eval(s, z, y)?;
        let c = r_eval(t + s, x, y)?;
        Ok(c * (a + b) / (a * b))
    }

    /// Direct check quantity for the algebraic-profile 3-P bound:
    /// `ϱ¹_d(t,x−z)ϱ¹_d(s,z−y)/ϱ¹_d(t+s,x−y)` over
    /// `(t∧s)[ϱ⁰_d(t,x−z) + ϱ⁰_d(s,z−y)]`.
    pub fn varrho_three_p_ratio(
        &self,
        t: f64,
        s: f64,
        x: &Point,
        y: &Point,
        z: &Point,
    ) -> Result<f64> {
        let num = self.varrho(1.0, t, x.dist(z))? * self.varrho(1.0, s, z.dist(y))?
            / self.varrho(1.0, t + s, x.dist(y))?;
        let den = t.min(s) * (self.varrho(0.0, t, x.dist(z))? + self.varrho(0.0, s, z.dist(y))?);
        Ok(num / den)
    }

    /// The two sides of the comparability equivalence
    /// `q̂_α(t,z,x) ⪯ q̂_α(s,z,y) ⟺ ϱ⁰_d(t,x−z) ⪯ ϱ⁰_d(s,z−y)`:
    /// returns `(q̂-ratio, ϱ⁰-ratio)` for sweep-level verification that each
    /// side controls the other with one fixed constant.
    pub fn equivalence_ratios(
        &self,
        t: f64,
        s: f64,
        x: &Point,
        y: &Point,
        z: &Point,
    ) -> Result<(f64, f64)> {
        let qr = self.q_hat(t, z, x) / self.q_hat(s, z, y);
        let vr = self.varrho(0.0, t, x.dist(z))? / self.varrho(0.0, s, z.dist(y))?;
        Ok((qr, vr))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn ctx() -> ComparisonContext {
        ComparisonContext::new(
            ModelParams::new(1.5, 1, 1.0).unwrap(),
            Domain::unit_interval(),
        )
        .unwrap()
    }

    #[test]
    fn varrho_examples() {
        let c = ctx();
        // ϑ=1, t=1, |x|=0 -> 1/(0+1)^{2.5} = 1
        assert_abs_diff_eq!(c.varrho(1.0, 1.0, 0.0).unwrap(), 1.0, epsilon = 1e-14);
        // ϑ=0, t=1, |x|=1 -> 2^{-2.5}
        assert_abs_diff_eq!(
            c.varrho(0.0, 1.0, 1.0).unwrap(),
            2.0_f64.powf(-2.5),
            epsilon = 1e-14
        );
        // ϑ=1, x=0 -> t^{1-(d+α)/α} at t=0.25: 0.25^{-2/3}
        assert_abs_diff_eq!(
            c.varrho(1.0, 0.25, 0.0).unwrap(),
            0.25_f64.powf(-2.0 / 3.0),
            epsilon = 1e-12
        );
        assert!(c.varrho(1.0, 0.0, 0.1).is_err());
    }

    #[test]
    fn xi_examples() {
        let c = ctx();
        // γ=0, λ=0 -> t^{-d/2}
        assert_abs_diff_eq!(c.xi(0.0, 0.0, 0.3, 0.9).unwrap(), 0.3_f64.powf(-0.5), epsilon = 1e-14);
        // d=1, γ=0, λ=1/4, t=1, |x|=2 -> e^{-1}
        assert_abs_diff_eq!(
            c.xi(0.0, 0.25, 1.0, 2.0).unwrap(),
            (-1.0_f64).exp(),
            epsilon = 1e-14
        );
        // d=2, γ=1, t=4, x=0 -> 4^{-3/2}
        let c2 = ComparisonContext::new(
            ModelParams::new(1.5, 2, 1.0).unwrap(),
            Domain::ball(2, 1.0, vec![0.0, 0.0]).unwrap(),
        )
        .unwrap();
        assert_abs_diff_eq!(c2.xi(1.0, 1.0, 4.0, 0.0).unwrap(), 0.125, epsilon = 1e-14);
    }

    #[test]
    fn q_hat_examples() {
        let c = ctx();
        // capped branch
        let x = Point::scalar(0.5);
        let y = Point::scalar(0.51);
        assert_abs_diff_eq!(c.q_hat(1e-6, &x, &y), 1.0, epsilon = 0.0);
        // direct substitution: x=0.1, y=0.5, t=1 -> 0.1/1.4
        let x = Point::scalar(0.1);
        let y = Point::scalar(0.5);
        assert_abs_diff_eq!(c.q_hat(1.0, &x, &y), 0.1 / 1.4, epsilon = 1e-14);
        // x=y, t=1, ρ=0.5 -> 0.5
        let x = Point::scalar(0.5);
        assert_abs_diff_eq!(c.q_hat(1.0, &x, &x), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn q_alpha_symmetry_and_examples() {
        let c = ctx();
        let x = Point::scalar(0.17);
        let y = Point::scalar(0.83);
        assert_eq!(c.q_alpha(0.3, &x, &y), c.q_alpha(0.3, &y, &x));
        assert_eq!(c.q_d(0.3, &x, &y), c.q_d(0.3, &y, &x));
        // symmetric configuration x=0.1, y=0.9, t=1: (0.1/1.8)²
        let x = Point::scalar(0.1);
        let y = Point::scalar(0.9);
        assert_abs_diff_eq!(
            c.q_alpha(1.0, &x, &y),
            (0.1_f64 / 1.8).powi(2),
            epsilon = 1e-14
        );
        // deep-interior saturation: q_d = ϱ¹_d
        let x = Point::scalar(0.5);
        let t = 1e-4;
        assert_abs_diff_eq!(
            c.q_d(t, &x, &x),
            c.varrho(1.0, t, 0.0).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn sharp_form_ratio_saturated_branches() {
        let c = ctx();
        // both sides equal 1 when ρ(x), ρ(y) dominate
        let x = Point::scalar(0.5);
        assert_abs_diff_eq!(c.sharp_form_ratio(1e-4, &x, &x), 1.0, epsilon = 1e-12);
        // both sides in the product branch with equidistant points
        let x = Point::scalar(0.05);
        let y = Point::scalar(0.95);
        assert_abs_diff_eq!(c.sharp_form_ratio(0.5, &x, &y), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn three_p_q_saturated_example() {
        let c = ctx();
        // x=y=z deep interior, small t=s: everything saturates at 1,
        // ratio = (1·1/1)/(1+1) = 1/2
        let x = Point::scalar(0.5);
        let v = c.three_p_q_ratio(1e-5, 1e-5, &x, &x, &x);
        assert_abs_diff_eq!(v, 0.5, epsilon = 1e-10);
    }

    #[test]
    fn classical_three_p_preconditions() {
        let c = ctx();
        let x = Point::scalar(0.2);
        let y = Point::scalar(0.8);
        let z = Point::scalar(0.5);
        let ok = |t: f64, xx: &Point, yy: &Point| -> Result<f64> {
            let _ = (t, xx, yy);
            Ok(1.0)
        };
        assert!(c.classical_three_p_ratio(0.2, 0.04, &x, &y, &z, ok).is_err());
        // violating the geometric condition
        let xc = Point::scalar(0.49);
        let yc = Point::scalar(0.51);
        assert!(c
            .classical_three_p_ratio(0.2, 0.1, &xc, &yc, &Point::scalar(0.1), ok)
            .is_err());
    }
}
