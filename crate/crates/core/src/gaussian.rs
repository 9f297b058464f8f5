//! Dirichlet heat kernel `p^D_2(t,x,y)` of the Laplacian `Δ|_D` (generator
//! `Δ`, so the free Gaussian has variance `2t` and density
//! `g(t,u) = (4πt)^{-1/2} e^{-u²/(4t)}`), with first and second spatial
//! gradients and the survival mass.
//!
//! On the interval two independent routes exist and cross-check each other:
//! the eigenfunction series (geometric convergence for large `t`) and the
//! method of images (geometric convergence for small `t`). The route is
//! selected by `t < route_switch_time`. Balls use the Fourier-Bessel eigen
//! route only, with the truncation tail reported against the configured
//! tolerance.

use crate::domain::{Domain, DomainKind, Point};
use crate::eigen::{domain_quadrature, EigenBasis};
use crate::error::{Error, Result};
use crate::quad::{adaptive_gk_split, peak_splits, AdaptiveSpec};

const PI: f64 = std::f64::consts::PI;

/// Series controls for the Gaussian Dirichlet kernel.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GaussianKernelConfig {
    /// Eigen-route mode cap.
    pub eigen_truncation: usize,
    /// Image-route cap on |k|.
    pub image_truncation: usize,
    /// Interval route selector: images below, eigen series above.
    pub route_switch_time: f64,
    /// Requested relative series tolerance.
    pub target_rel_tol: f64,
}

impl Default for GaussianKernelConfig {
    fn default() -> Self {
        Self {
            eigen_truncation: 4096,
            image_truncation: 16,
            route_switch_time: 0.05,
            target_rel_tol: 1e-10,
        }
    }
}

/// Free 1-d Gaussian for generator Δ: `(4πt)^{-1/2} e^{-u²/(4t)}`.
#[inline]
pub fn gauss1(t: f64, u: f64) -> f64 {
    let e = u * u / (4.0 * t);
    if e > 745.0 {
        0.0
    } else {
        (4.0 * PI * t).sqrt().recip() * (-e).exp()
    }
}

/// Image-series value of the Dirichlet kernel on the interval `(a, a+len)`:
/// `Σ_k g(t, x-y+2kL) - g(t, x+y-2a+2kL)`.
#[inline]
pub fn p2_images(t: f64, x: f64, y: f64, a: f64, len: f64, kmax: usize) -> f64 {
    let mut s = 0.0;
    let (xs, ys) = (x - a, y - a);
    for k in -(kmax as i64)..=(kmax as i64) {
        let shift = 2.0 * k as f64 * len;
        s += gauss1(t, xs - ys + shift) - gauss1(t, xs + ys + shift);
    }
    s.max(0.0)
}

/// `∂_x` of the image series.
#[inline]
pub fn dp2_images(t: f64, x: f64, y: f64, a: f64, len: f64, kmax: usize) -> f64 {
    let mut s = 0.0;
    let (xs, ys) = (x - a, y - a);
    for k in -(kmax as i64)..=(kmax as i64) {
        let shift = 2.0 * k as f64 * len;
        let um = xs - ys + shift;
        let up = xs + ys + shift;
        s += -um / (2.0 * t) * gauss1(t, um) + up / (2.0 * t) * gauss1(t, up);
    }
    s
}

/// `∂²_x` of the image series.
#[inline]
pub fn d2p2_images(t: f64, x: f64, y: f64, a: f64, len: f64, kmax: usize) -> f64 {
    let mut s = 0.0;
    let (xs, ys) = (x - a, y - a);
    let c = |u: f64| (u * u / (4.0 * t * t) - 1.0 / (2.0 * t)) * gauss1(t, u);
    for k in -(kmax as i64)..=(kmax as i64) {
        let shift = 2.0 * k as f64 * len;
        s += c(xs - ys + shift) - c(xs + ys + shift);
    }
    s
}

/// Absolute tail bound of the image series beyond `|k| = kmax`.
fn image_tail(t: f64, len: f64, kmax: usize) -> f64 {
    // nearest unaccounted image sits at distance >= (2 kmax - 1) len
    let d = (2.0 * kmax as f64 - 1.0) * len;
    4.0 * gauss1(t, d)
}

/// Interval geometry: start and length, when the domain is 1-dimensional.
pub(crate) fn interval_of(domain: &Domain) -> Option<(f64, f64)> {
    match (domain.kind, domain.dim) {
        (DomainKind::UnitInterval, _) => Some((0.0, 1.0)),
        (DomainKind::Ball, 1) => Some((domain.center[0] - domain.radius, 2.0 * domain.radius)),
        _ => None,
    }
}

/// Evaluator for `p^D_2` and its spatial derivatives.
#[derive(Debug, Clone)]
pub struct GaussianKernel {
    domain: Domain,
    cfg: GaussianKernelConfig,
    /// Fourier-Bessel basis, built for balls in d >= 2 only.
    basis: Option<EigenBasis>,
}

impl GaussianKernel {
    pub fn new(domain: &Domain, cfg: GaussianKernelConfig) -> Result<Self> {
        let basis = if interval_of(domain).is_none() {
            Some(EigenBasis::new(domain, cfg.eigen_truncation)?)
        } else {
            None
        };
        Ok(Self {
            domain: domain.clone(),
            cfg,
            basis,
        })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn config(&self) -> &GaussianKernelConfig {
        &self.cfg
    }

    fn check_point(&self, x: &Point) -> Result<()> {
        self.domain.check_dim(x)?;
        if self.domain.rho_unchecked(x) <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "point {:?} is not interior",
                x.0
            )));
        }
        Ok(())
    }

    /// Interval evaluation; `order` 0, 1, 2 selects value, ∂_x, ∂²_x.
    fn interval_eval(&self, order: usize, t: f64, x: f64, y: f64) -> Result<f64> {
        let (a, len) = interval_of(&self.domain).unwrap();
        if t < self.cfg.route_switch_time {
            let kmax = self.cfg.image_truncation;
            let tail = image_tail(t, len, kmax) * (1.0 / t).max(1.0).powf(order as f64 / 2.0);
            let v = match order {
                0 => p2_images(t, x, y, a, len, kmax),
                1 => dp2_images(t, x, y, a, len, kmax),
                _ => d2p2_images(t, x, y, a, len, kmax),
            };
            if tail > self.cfg.target_rel_tol * v.abs().max(1e-300) && tail > 1e-300 {
                return Err(Error::TruncationFailure {
                    context: format!("image series at t={t}"),
                    tail,
                    requested: self.cfg.target_rel_tol * v.abs().max(1e-300),
                });
            }
            Ok(v)
        } else {
            let cap = self.cfg.eigen_truncation;
            let mut acc = 0.0;
            let mut n = 1usize;
            let sc = 2.0 / len;
            loop {
                let w = n as f64 * PI / len;
                let lam = w * w;
                let e = (-t * lam).exp();
                let (sx, cx) = (w * (x - a)).sin_cos();
                let sy = (w * (y - a)).sin();
                acc += match order {
                    0 => sc * e * sx * sy,
                    1 => sc * e * w * cx * sy,
                    _ => -sc * e * lam * sx * sy,
                };
                let amp = sc * (1.0 + w).powi(order as i32);
                if e * amp * (n as f64 + 1.0) < self.cfg.target_rel_tol * acc.abs().max(1e-30)
                    || e == 0.0
                {
                    break;
                }
                n += 1;
                if n > cap {
                    return Err(Error::TruncationFailure {
                        context: format!("interval eigen series at t={t}"),
                        tail: e * amp,
                        requested: self.cfg.target_rel_tol * acc.abs().max(1e-30),
                    });
                }
            }
            Ok(if order == 0 { acc.max(0.0) } else { acc })
        }
    }

    /// Lenient 1-d evaluation used inside subordination integrands, where
    /// the s-range is capped so the configured truncations always suffice:
    /// value (`order` 0), ∂_x (1) or ∂²_x (2), best effort, no error path.
    pub(crate) fn interval_raw(&self, order: usize, t: f64, x: f64, y: f64) -> f64 {
        let (a, len) = interval_of(&self.domain).unwrap();
        if t < self.cfg.route_switch_time {
            match order {
                0 => p2_images(t, x, y, a, len, self.cfg.image_truncation),
                1 => dp2_images(t, x, y, a, len, self.cfg.image_truncation),
                _ => d2p2_images(t, x, y, a, len, self.cfg.image_truncation),
            }
        } else {
            let sc = 2.0 / len;
            let mut acc = 0.0;
            for n in 1..=self.cfg.eigen_truncation {
                let w = n as f64 * PI / len;
                let lam = w * w;
                let e = (-t * lam).exp();
                let (sx, cx) = (w * (x - a)).sin_cos();
                let sy = (w * (y - a)).sin();
                acc += match order {
                    0 => sc * e * sx * sy,
                    1 => sc * e * w * cx * sy,
                    _ => -sc * e * lam * sx * sy,
                };
                let amp = sc * (1.0 + w).powi(order as i32);
                if e * amp * (n as f64 + 1.0) < 1e-16 * acc.abs().max(1e-60) || e == 0.0 {
                    break;
                }
            }
            acc
        }
    }

    /// `p^D_2(t,x,y)`.
    pub fn p2(&self, t: f64, x: &Point, y: &Point) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        if !(t > 0.0) {
            return Err(Error::InvalidParameter(format!("p2 requires t > 0, got {t}")));
        }
        if interval_of(&self.domain).is_some() {
            return self.interval_eval(0, t, x.0[0], y.0[0]);
        }
        let basis = self.basis.as_ref().unwrap();
        let mut acc = 0.0;
        let mut used = 0;
        for i in 0..basis.len() {
            let lam = basis.eigenvalue(i);
            let e = (-t * lam).exp();
            acc += e * basis.value(i, x) * basis.value(i, y);
            used = i + 1;
            if e * (used as f64) < 1e-18 * acc.abs().max(1e-30) {
                break;
            }
        }
        // spec'd tail bound: e^{-λ_N t} · (mode count)
        let tail = (-t * basis.eigenvalue(used - 1)).exp() * used as f64;
        if used == basis.len() && tail > self.cfg.target_rel_tol * acc.abs().max(1e-30) {
            return Err(Error::TruncationFailure {
                context: format!("ball eigen series at t={t}"),
                tail,
                requested: self.cfg.target_rel_tol * acc.abs().max(1e-30),
            });
        }
        Ok(acc.max(0.0))
    }

    /// `∇_x p^D_2(t,x,y)`.
    pub fn grad_p2(&self, t: f64, x: &Point, y: &Point) -> Result<Vec<f64>> {
        self.check_point(x)?;
        self.check_point(y)?;
        if !(t > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "grad_p2 requires t > 0, got {t}"
            )));
        }
        if interval_of(&self.domain).is_some() {
            return Ok(vec![self.interval_eval(1, t, x.0[0], y.0[0])?]);
        }
        let basis = self.basis.as_ref().unwrap();
        let d = self.domain.dim;
        let mut acc = vec![0.0; d];
        let mut used = 0;
        for i in 0..basis.len() {
            let lam = basis.eigenvalue(i);
            let e = (-t * lam).exp();
            let vy = basis.value(i, y);
            let gx = basis.gradient(i, x);
            for k in 0..d {
                acc[k] += e * gx[k] * vy;
            }
            used = i + 1;
            if e * lam.sqrt() * (used as f64) < 1e-16 {
                break;
            }
        }
        // gradient tail carries an extra √λ
        let tail = (-t * basis.eigenvalue(used - 1)).exp()
            * basis.eigenvalue(used - 1).sqrt()
            * used as f64;
        let scale = acc.iter().map(|a| a.abs()).fold(0.0, f64::max).max(1e-30);
        if used == basis.len() && tail > self.cfg.target_rel_tol * scale {
            return Err(Error::TruncationFailure {
                context: format!("ball eigen gradient series at t={t}"),
                tail,
                requested: self.cfg.target_rel_tol * scale,
            });
        }
        Ok(acc)
    }

    /// Hessian `∇²_x p^D_2(t,x,y)`, row-major d×d.
    pub fn hess_p2(&self, t: f64, x: &Point, y: &Point) -> Result<Vec<f64>> {
        self.check_point(x)?;
        self.check_point(y)?;
        if !(t > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "hess_p2 requires t > 0, got {t}"
            )));
        }
        if interval_of(&self.domain).is_some() {
            return Ok(vec![self.interval_eval(2, t, x.0[0], y.0[0])?]);
        }
        let basis = self.basis.as_ref().unwrap();
        let d = self.domain.dim;
        let mut acc = vec![0.0; d * d];
        let mut used = 0;
        for i in 0..basis.len() {
            let lam = basis.eigenvalue(i);
            let e = (-t * lam).exp();
            let vy = basis.value(i, y);
            let hx = basis.hessian(i, x)?;
            for k in 0..d * d {
                acc[k] += e * hx[k] * vy;
            }
            used = i + 1;
            if e * lam * (used as f64) < 1e-15 {
                break;
            }
        }
        let tail =
            (-t * basis.eigenvalue(used - 1)).exp() * basis.eigenvalue(used - 1) * used as f64;
        let scale = acc.iter().map(|a| a.abs()).fold(0.0, f64::max).max(1e-30);
        if used == basis.len() && tail > self.cfg.target_rel_tol * scale {
            return Err(Error::TruncationFailure {
                context: format!("ball eigen Hessian series at t={t}"),
                tail,
                requested: self.cfg.target_rel_tol * scale,
            });
        }
        Ok(acc)
    }

    /// Survival mass `∫_D p^D_2(t,x,y) dy` of the killed Brownian motion.
    pub fn survival(&self, t: f64, x: &Point) -> Result<f64> {
        self.check_point(x)?;
        if let Some((a, len)) = interval_of(&self.domain) {
            let width = (2.0 * t).sqrt();
            let splits = peak_splits(x.0[0], width.min(0.2 * len), 8);
            let f = |y: f64| {
                if y <= a || y >= a + len {
                    0.0
                } else {
                    self.interval_eval(0, t, x.0[0], y).unwrap_or(0.0)
                }
            };
            let (v, err) = adaptive_gk_split(
                &f,
                a,
                a + len,
                &splits,
                AdaptiveSpec {
                    rel_tol: 1e-11,
                    ..Default::default()
                },
            );
            if err > 1e-7 * v.abs().max(1e-12) {
                return Err(Error::QuadratureFailure {
                    context: format!("survival quadrature at t={t}"),
                    residual: err,
                });
            }
            return Ok(v.clamp(0.0, 1.0 + 1e-12));
        }
        // balls: tensorized Gauss-Legendre in radius × trapezoid in angle
        let (pts, wts) = domain_quadrature(&self.domain, 48, 64);
        let mut v = 0.0;
        for (p, w) in pts.iter().zip(&wts) {
            v += w * self.p2(t, x, p)?;
        }
        Ok(v.clamp(0.0, 1.0 + 1e-12))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;

    fn kernel() -> GaussianKernel {
        GaussianKernel::new(&Domain::unit_interval(), GaussianKernelConfig::default()).unwrap()
    }

    #[test]
    fn cross_route_agreement() {
        // image and eigen routes agree far beyond the switch point
        for &(t, x, y) in &[(0.1, 0.5, 0.5), (0.05, 0.3, 0.6), (0.02, 0.2, 0.8), (0.3, 0.7, 0.1)]
        {
            let img = p2_images(t, x, y, 0.0, 1.0, 16);
            let mut eig = 0.0;
            for n in 1..4000 {
                let w = n as f64 * PI;
                eig += 2.0 * (-t * w * w).exp() * (w * x).sin() * (w * y).sin();
                if (-t * w * w).exp() < 1e-18 {
                    break;
                }
            }
            assert!(
                (img / eig - 1.0).abs() < 1e-10,
                "t={t} x={x} y={y}: img {img} eig {eig}"
            );
        }
    }

    #[test]
    fn leading_mode_asymptotics() {
        let k = kernel();
        let t = 5.0;
        let lead = (-PI * PI * t).exp() * 2.0 * (PI * 0.3).sin() * (PI * 0.6).sin();
        let v = k.p2(t, &Point::scalar(0.3), &Point::scalar(0.6)).unwrap();
        assert!((v / lead - 1.0).abs() < 1e-8, "v={v} lead={lead}");
    }

    #[test]
    fn symmetry() {
        let k = kernel();
        for &(t, x, y) in &[(0.1, 0.25, 0.7), (0.01, 0.9, 0.4)] {
            let a = k.p2(t, &Point::scalar(x), &Point::scalar(y)).unwrap();
            let b = k.p2(t, &Point::scalar(y), &Point::scalar(x)).unwrap();
            assert!((a / b - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_zero_at_symmetric_midpoint() {
        let k = kernel();
        for &t in &[0.01, 0.1, 1.0] {
            let g = k
                .grad_p2(t, &Point::scalar(0.5), &Point::scalar(0.5))
                .unwrap();
            assert!(g[0].abs() < 1e-12, "t={t}: {}", g[0]);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let k = kernel();
        let (t, x, y) = (0.1, 0.3, 0.6);
        let h = 1e-5;
        let p = |xx: f64| k.p2(t, &Point::scalar(xx), &Point::scalar(y)).unwrap();
        let g = k.grad_p2(t, &Point::scalar(x), &Point::scalar(y)).unwrap()[0];
        let fd = (p(x + h) - p(x - h)) / (2.0 * h);
        assert!((g - fd).abs() < 1e-6 * g.abs().max(1.0), "g={g} fd={fd}");
        let hess = k.hess_p2(t, &Point::scalar(x), &Point::scalar(y)).unwrap()[0];
        let fd2 = (p(x + h) - 2.0 * p(x) + p(x - h)) / (h * h);
        assert!(((hess - fd2) / hess).abs() < 1e-4, "hess={hess} fd2={fd2}");
    }

    #[test]
    fn ball_gradient_matches_finite_differences() {
        let dom = Domain::ball(2, 1.0, vec![0.0, 0.0]).unwrap();
        let cfg = GaussianKernelConfig {
            eigen_truncation: 512,
            ..Default::default()
        };
        let k = GaussianKernel::new(&dom, cfg).unwrap();
        let t = 0.1;
        let x = Point::new(vec![0.2, -0.3]);
        let y = Point::new(vec![-0.1, 0.25]);
        let g = k.grad_p2(t, &x, &y).unwrap();
        let h = 1e-5;
        for dim in 0..2 {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp.0[dim] += h;
            xm.0[dim] -= h;
            let fd = (k.p2(t, &xp, &y).unwrap() - k.p2(t, &xm, &y).unwrap()) / (2.0 * h);
            assert!(
                (g[dim] - fd).abs() < 1e-5 * (1.0 + g[dim].abs()),
                "d{dim}: {} vs {fd}",
                g[dim]
            );
        }
    }

    #[test]
    fn survival_contracts() {
        let k = kernel();
        // deep interior, tiny time: no mass lost yet
        let s = k.survival(1e-4, &Point::scalar(0.5)).unwrap();
        assert!((s - 1.0).abs() < 1e-6, "s={s}");
        // long time: leading eigenmode, ∫√2 sin(πy) dy = 2√2/π
        let t = 5.0;
        let x = 0.37;
        let lead =
            (-PI * PI * t).exp() * 2.0_f64.sqrt() * (PI * x).sin() * 2.0 * 2.0_f64.sqrt() / PI;
        let s = k.survival(t, &Point::scalar(x)).unwrap();
        assert!((s / lead - 1.0).abs() < 1e-6, "s={s} lead={lead}");
        for &(t, x) in &[(0.01, 0.1), (0.2, 0.5), (1.0, 0.9)] {
            let s = k.survival(t, &Point::scalar(x)).unwrap();
            assert!((0.0..=1.0 + 1e-9).contains(&s));
        }
    }

    #[test]
    fn chapman_kolmogorov_interval() {
        let k = kernel();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let (nodes, weights) = crate::quad::gauss_legendre_on(200, 0.0, 1.0);
        for _ in 0..100 {
            let t = rng.gen_range(0.05..0.4);
            let s = rng.gen_range(0.05..0.4);
            let x = rng.gen_range(0.05..0.95);
            let y = rng.gen_range(0.05..0.95);
            let mut conv = 0.0;
            for (z, w) in nodes.iter().zip(&weights) {
                conv += w
                    * k.p2(t, &Point::scalar(x), &Point::scalar(*z)).unwrap()
                    * k.p2(s, &Point::scalar(*z), &Point::scalar(y)).unwrap();
            }
            let direct = k.p2(t + s, &Point::scalar(x), &Point::scalar(y)).unwrap();
            assert!(
                (conv - direct).abs() < 1e-8 * direct,
                "CK residual at ({t},{s},{x},{y}): {conv} vs {direct}"
            );
        }
    }

    #[test]
    fn truncation_failure_is_reported() {
        let dom = Domain::ball(2, 1.0, vec![0.0, 0.0]).unwrap();
        let cfg = GaussianKernelConfig {
            eigen_truncation: 16,
            ..Default::default()
        };
        let k = GaussianKernel::new(&dom, cfg).unwrap();
        let x = Point::new(vec![0.2, 0.1]);
        match k.p2(1e-4, &x, &x) {
            Err(Error::TruncationFailure { tail, .. }) => assert!(tail > 0.0),
            other => panic!("expected truncation failure, got {other:?}"),
        }
    }
}
