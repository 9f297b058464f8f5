//! Dirichlet-Laplacian eigendata on the model domains.
//!
//! The Brownian motion here has generator `Δ` (no 1/2), so this spectrum
//! pairs with the heat semigroup `e^{tΔ}` directly and with the subordinate
//! semigroup `e^{-t(-Δ|_D)^{α/2}}` through `λ ↦ λ^{α/2}`.
//!
//! * interval `(0,1)`: `λ_n = (nπ)²`, `φ_n = √2 sin(nπx)`;
//! * ball in d=1 (an interval of length 2R): shifted sine modes;
//! * disk: Fourier-Bessel modes `J_m(j_{m,k} r/R)·{cos,sin}(mθ)`;
//! * ball in d=3: `j_l(β_{l,k} r/R)·Y_{lm}` with real spherical harmonics.
//!
//! Modes are ordered by eigenvalue (deterministic tie-breaks) and include
//! angular multiplicities. Values and first gradients are available on every
//! domain; Hessians on the interval and disk (term-wise second derivatives of
//! 3-d spherical harmonics are not needed by any estimate here and are
//! reported as unsupported).

use crate::domain::{Domain, DomainKind, Point};
use crate::error::{Error, Result};
use crate::special;

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const PI: f64 = std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Trig {
    Cos,
    Sin,
}

#[derive(Debug, Clone)]
enum ModeShape {
    /// √2 sin(nπx) on (0,1)
    Interval { n: usize },
    /// √(2/L) sin(nπ(x-a)/L) on (a, a+L)
    IntervalBall { n: usize },
    /// norm · J_m(zero·r/R) · trig(mθ)
    Disk { m: u32, zero: f64, trig: Trig, norm: f64 },
    /// norm · j_l(zero·r/R) · Y_{lm}-real(θ,φ)
    Ball3 {
        l: u32,
        m: u32,
        zero: f64,
        trig: Trig,
        norm: f64,
    },
}

/// One Dirichlet eigenpair.
#[derive(Debug, Clone)]
pub struct Mode {
    pub eigenvalue: f64,
    shape: ModeShape,
}

/// Truncated Dirichlet eigenbasis of a model domain.
#[derive(Debug, Clone)]
pub struct EigenBasis {
    domain: Domain,
    modes: Vec<Mode>,
}

impl EigenBasis {
    /// Build the first `n_max` eigenpairs (counting angular multiplicity),
    /// ordered by eigenvalue.
    pub fn new(domain: &Domain, n_max: usize) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::InvalidParameter("n_max must be >= 1".into()));
        }
        let modes = match (domain.kind, domain.dim) {
            (DomainKind::UnitInterval, _) => (1..=n_max)
                .map(|n| Mode {
                    eigenvalue: (n as f64 * PI).powi(2),
                    shape: ModeShape::Interval { n },
                })
                .collect(),
            (DomainKind::Ball, 1) => {
                let l = 2.0 * domain.radius;
                (1..=n_max)
                    .map(|n| Mode {
                        eigenvalue: (n as f64 * PI / l).powi(2),
                        shape: ModeShape::IntervalBall { n },
                    })
                    .collect()
            }
            (DomainKind::Ball, 2) => disk_modes(domain, n_max),
            (DomainKind::Ball, 3) => ball3_modes(domain, n_max),
            _ => {
                return Err(Error::Unsupported(format!(
                    "eigenbasis for ball in dim {}",
                    domain.dim
                )))
            }
        };
        Ok(EigenBasis {
            domain: domain.clone(),
            modes,
        })
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn eigenvalue(&self, i: usize) -> f64 {
        self.modes[i].eigenvalue
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.eigenvalue).collect()
    }

    /// φ_i(x).
    pub fn value(&self, i: usize, x: &Point) -> f64 {
        match &self.modes[i].shape {
            ModeShape::Interval { n } => SQRT_2 * (*n as f64 * PI * x.0[0]).sin(),
            ModeShape::IntervalBall { n } => {
                let l = 2.0 * self.domain.radius;
                let a = self.domain.center[0] - self.domain.radius;
                (2.0 / l).sqrt() * (*n as f64 * PI * (x.0[0] - a) / l).sin()
            }
            ModeShape::Disk { m, zero, trig, norm } => {
                let (r, theta) = self.polar(x);
                let radial = special::bessel_jn(*m, zero * r / self.domain.radius);
                norm * radial * trig_val(*trig, *m as f64 * theta)
            }
            ModeShape::Ball3 {
                l,
                m,
                zero,
                trig,
                norm,
            } => {
                let (r, cos_t, phi) = self.spherical(x);
                let radial = special::spherical_jl(*l, zero * r / self.domain.radius);
                norm * radial * ylm_angular(*l, *m, *trig, cos_t, phi)
            }
        }
    }

    /// ∇φ_i(x) in Cartesian coordinates.
    pub fn gradient(&self, i: usize, x: &Point) -> Vec<f64> {
        match &self.modes[i].shape {
            ModeShape::Interval { n } => {
                let nf = *n as f64;
                vec![SQRT_2 * nf * PI * (nf * PI * x.0[0]).cos()]
            }
            ModeShape::IntervalBall { n } => {
                let l = 2.0 * self.domain.radius;
                let a = self.domain.center[0] - self.domain.radius;
                let nf = *n as f64;
                vec![(2.0 / l).sqrt() * nf * PI / l * (nf * PI * (x.0[0] - a) / l).cos()]
            }
            ModeShape::Disk { m, zero, trig, norm } => {
                self.disk_gradient(*m, *zero, *trig, *norm, x)
            }
            ModeShape::Ball3 {
                l,
                m,
                zero,
                trig,
                norm,
            } => self.ball3_gradient(*l, *m, *zero, *trig, *norm, x),
        }
    }

    /// Hessian of φ_i at x, row-major d×d. Unsupported on 3-d balls.
    pub fn hessian(&self, i: usize, x: &Point) -> Result<Vec<f64>> {
        match &self.modes[i].shape {
            ModeShape::Interval { n } => {
                let v = self.value(i, x);
                Ok(vec![-((*n as f64 * PI).powi(2)) * v])
            }
            ModeShape::IntervalBall { n } => {
                let l = 2.0 * self.domain.radius;
                let v = self.value(i, x);
                Ok(vec![-((*n as f64 * PI / l).powi(2)) * v])
            }
            ModeShape::Disk { m, zero, trig, norm } => {
                Ok(self.disk_hessian(*m, *zero, *trig, *norm, x))
            }
            ModeShape::Ball3 { .. } => Err(Error::Unsupported(
                "term-wise Hessians of 3-d ball eigenfunctions".into(),
            )),
        }
    }

    /// ∫_D φ_i(y) dy (closed form; zero for modes with angular dependence).
    pub fn integral(&self, i: usize) -> f64 {
        match &self.modes[i].shape {
            ModeShape::Interval { n } => {
                let nf = *n as f64;
                SQRT_2 * (1.0 - (nf * PI).cos()) / (nf * PI)
            }
            ModeShape::IntervalBall { n } => {
                let l = 2.0 * self.domain.radius;
                let nf = *n as f64;
                (2.0 / l).sqrt() * l * (1.0 - (nf * PI).cos()) / (nf * PI)
            }
            ModeShape::Disk { m, zero, norm, .. } => {
                if *m != 0 {
                    return 0.0;
                }
                let r = self.domain.radius;
                // ∫_0^1 J_0(j u) u du = J_1(j)/j
                norm * 2.0 * PI * r * r * special::bessel_j1(*zero) / zero
            }
            ModeShape::Ball3 { l, m, zero, norm, .. } => {
                if *l != 0 || *m != 0 {
                    return 0.0;
                }
                let r = self.domain.radius;
                // ∫_0^1 j_0(β u) u² du = j_1(β)/β ; ∫ Y_00 dΩ = √(4π)
                norm * (4.0 * PI).sqrt() * r.powi(3) * special::spherical_jl(1, *zero) / zero
            }
        }
    }

    fn polar(&self, x: &Point) -> (f64, f64) {
        let dx = x.0[0] - self.domain.center[0];
        let dy = x.0[1] - self.domain.center[1];
        ((dx * dx + dy * dy).sqrt(), dy.atan2(dx))
    }

    fn spherical(&self, x: &Point) -> (f64, f64, f64) {
        let dx = x.0[0] - self.domain.center[0];
        let dy = x.0[1] - self.domain.center[1];
        let dz = x.0[2] - self.domain.center[2];
        let r = (dx * dx + dy * dy + dz * dz).sqrt();
        if r == 0.0 {
            return (0.0, 1.0, 0.0);
        }
        ((r), (dz / r).clamp(-1.0, 1.0), dy.atan2(dx))
    }

    fn disk_gradient(&self, m: u32, zero: f64, trig: Trig, norm: f64, x: &Point) -> Vec<f64> {
        let rr = self.domain.radius;
        let k = zero / rr;
        let (r, theta) = self.polar(x);
        if r < 1e-9 * rr {
            // leading small-r behavior
            return match (m, trig) {
                (1, Trig::Cos) => vec![norm * 0.5 * k, 0.0],
                (1, Trig::Sin) => vec![0.0, norm * 0.5 * k],
                _ => vec![0.0, 0.0],
            };
        }
        let mf = m as f64;
        let j = special::bessel_jn(m, k * r);
        let jp = special::bessel_jn_deriv(m, k * r);
        let t = trig_val(trig, mf * theta);
        let tp = trig_deriv(trig, mf * theta);
        let f_r = norm * k * jp * t;
        let f_theta = norm * j * mf * tp;
        let (c, s) = (theta.cos(), theta.sin());
        vec![c * f_r - s / r * f_theta, s * f_r + c / r * f_theta]
    }

    fn disk_hessian(&self, m: u32, zero: f64, trig: Trig, norm: f64, x: &Point) -> Vec<f64> {
        let rr = self.domain.radius;
        let k = zero / rr;
        let (r, theta) = self.polar(x);
        if r < 1e-7 * rr {
            let a = norm * 0.25 * k * k;
            return match (m, trig) {
                (0, _) => vec![-2.0 * a, 0.0, 0.0, -2.0 * a],
                (2, Trig::Cos) => vec![2.0 * a, 0.0, 0.0, -2.0 * a],
                (2, Trig::Sin) => vec![0.0, 2.0 * a, 2.0 * a, 0.0],
                _ => vec![0.0; 4],
            };
        }
        let mf = m as f64;
        let z = k * r;
        let j = special::bessel_jn(m, z);
        let jp = special::bessel_jn_deriv(m, z);
        let jpp = -jp / z - (1.0 - mf * mf / (z * z)) * j;
        let t = trig_val(trig, mf * theta);
        let tp = trig_deriv(trig, mf * theta);
        let f_r = norm * k * jp * t;
        let f_rr = norm * k * k * jpp * t;
        let f_th = norm * j * mf * tp;
        let f_thth = -norm * j * mf * mf * t;
        let f_rth = norm * k * jp * mf * tp;
        let (c, s) = (theta.cos(), theta.sin());
        let f_xx = c * c * f_rr - 2.0 * c * s / r * f_rth
            + s * s / (r * r) * f_thth
            + s * s / r * f_r
            + 2.0 * c * s / (r * r) * f_th;
        let f_yy = s * s * f_rr + 2.0 * c * s / r * f_rth
            + c * c / (r * r) * f_thth
            + c * c / r * f_r
            - 2.0 * c * s / (r * r) * f_th;
        let f_xy = c * s * (f_rr - f_r / r - f_thth / (r * r))
            + (c * c - s * s) * (f_rth / r - f_th / (r * r));
        vec![f_xx, f_xy, f_xy, f_yy]
    }

    fn ball3_gradient(
        &self,
        l: u32,
        m: u32,
        zero: f64,
        trig: Trig,
        norm: f64,
        x: &Point,
    ) -> Vec<f64> {
        let rr = self.domain.radius;
        let k = zero / rr;
        let mut dx = x.0[0] - self.domain.center[0];
        let dy = x.0[1] - self.domain.center[1];
        let dz = x.0[2] - self.domain.center[2];
        let mut r = (dx * dx + dy * dy + dz * dz).sqrt();
        if r < 1e-9 * rr {
            // only l=1 modes have nonzero gradient at the center
            if l != 1 {
                return vec![0.0; 3];
            }
            // j_1(kr) ≈ kr/3; Y_1m-real are linear in the unit vector
            let c = norm * k / 3.0;
            let a = (3.0 / (4.0 * PI)).sqrt();
            return match (m, trig) {
                (0, _) => vec![0.0, 0.0, c * a],
                (1, Trig::Cos) => vec![-c * a, 0.0, 0.0],
                (1, Trig::Sin) => vec![0.0, -c * a, 0.0],
                _ => vec![0.0; 3],
            };
        }
        // keep probes off the polar axis: nudge if degenerate
        let s2 = (dx * dx + dy * dy) / (r * r);
        if s2 < 1e-16 && m > 0 {
            dx += 1e-8 * r;
            r = (dx * dx + dy * dy + dz * dz).sqrt();
        }
        let cos_t = (dz / r).clamp(-1.0, 1.0);
        let sin_t = (1.0 - cos_t * cos_t).max(1e-30).sqrt();
        let phi = dy.atan2(dx);
        let mf = m as f64;

        let fr = special::spherical_jl(l, k * r);
        let frp = k * special::spherical_jl_deriv(l, k * r);
        let p = special::legendre_norm(l, m, cos_t);
        let dp_dx = special::legendre_norm_deriv(l, m, cos_t);
        let ang_scale = if m == 0 { 1.0 } else { SQRT_2 };
        let t = trig_val(trig, mf * phi);
        let tp = trig_deriv(trig, mf * phi);

        let y = ang_scale * p * t;
        let dy_dtheta = ang_scale * (-sin_t) * dp_dx * t;
        let dy_dphi = ang_scale * p * mf * tp;

        let g_r = norm * frp * y;
        let g_t = norm * fr * dy_dtheta / r;
        let g_p = norm * fr * dy_dphi / (r * sin_t);

        let (cp, sp) = (phi.cos(), phi.sin());
        let e_r = [sin_t * cp, sin_t * sp, cos_t];
        let e_t = [cos_t * cp, cos_t * sp, -sin_t];
        let e_p = [-sp, cp, 0.0];
        (0..3)
            .map(|i| g_r * e_r[i] + g_t * e_t[i] + g_p * e_p[i])
            .collect()
    }
}

fn trig_val(t: Trig, u: f64) -> f64 {
    match t {
        Trig::Cos => u.cos(),
        Trig::Sin => u.sin(),
    }
}

fn trig_deriv(t: Trig, u: f64) -> f64 {
    match t {
        Trig::Cos => -u.sin(),
        Trig::Sin => u.cos(),
    }
}

/// Real angular factor of a 3-d mode: `Y_{l0}` or `√2 \bar P_l^m·{cos,sin}(mφ)`.
fn ylm_angular(l: u32, m: u32, trig: Trig, cos_t: f64, phi: f64) -> f64 {
    let p = special::legendre_norm(l, m, cos_t);
    if m == 0 {
        p
    } else {
        SQRT_2 * p * trig_val(trig, m as f64 * phi)
    }
}

fn disk_modes(domain: &Domain, n_max: usize) -> Vec<Mode> {
    let r = domain.radius;
    // grow the zero cutoff until enough modes (with multiplicity) exist
    let mut j_cut = (2.0 * (n_max as f64).sqrt() + 4.0).max(6.0);
    loop {
        let mut raw: Vec<(f64, u32, usize)> = Vec::new(); // (zero, m, k-index)
        let mut m = 0u32;
        loop {
            let zeros = zeros_upto_bessel(m, j_cut);
            if zeros.is_empty() {
                break;
            }
            for (k, z) in zeros.into_iter().enumerate() {
                raw.push((z, m, k));
            }
            m += 1;
        }
        let count: usize = raw.iter().map(|&(_, m, _)| if m == 0 { 1 } else { 2 }).sum();
        if count < n_max {
            j_cut *= 1.3;
            continue;
        }
        raw.sort_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .unwrap()
                .then(a.1.cmp(&b.1))
        });
        let mut modes = Vec::with_capacity(n_max);
        for (z, m, _) in raw {
            let lam = (z / r).powi(2);
            if m == 0 {
                let norm = 1.0 / (PI.sqrt() * r * special::bessel_j1(z).abs());
                modes.push(Mode {
                    eigenvalue: lam,
                    shape: ModeShape::Disk {
                        m,
                        zero: z,
                        trig: Trig::Cos,
                        norm,
                    },
                });
                if modes.len() == n_max {
                    break;
                }
            } else {
                let norm =
                    SQRT_2 / (PI.sqrt() * r * special::bessel_jn(m + 1, z).abs());
                for trig in [Trig::Cos, Trig::Sin] {
                    modes.push(Mode {
                        eigenvalue: lam,
                        shape: ModeShape::Disk {
                            m,
                            zero: z,
                            trig,
                            norm,
                        },
                    });
                    if modes.len() == n_max {
                        break;
                    }
                }
                if modes.len() == n_max {
                    break;
                }
            }
        }
        if modes.len() == n_max {
            return modes;
        }
        j_cut *= 1.3;
    }
}

fn ball3_modes(domain: &Domain, n_max: usize) -> Vec<Mode> {
    let r = domain.radius;
    let mut j_cut = (2.5 * (n_max as f64).powf(1.0 / 3.0) + 5.0).max(7.0);
    loop {
        let mut raw: Vec<(f64, u32, usize)> = Vec::new(); // (zero, l, k)
        let mut l = 0u32;
        loop {
            let zeros = zeros_upto_spherical(l, j_cut);
            if zeros.is_empty() {
                break;
            }
            for (k, z) in zeros.into_iter().enumerate() {
                raw.push((z, l, k));
            }
            l += 1;
        }
        let count: usize = raw.iter().map(|&(_, l, _)| 2 * l as usize + 1).sum();
        if count < n_max {
            j_cut *= 1.3;
            continue;
        }
        raw.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        let mut modes = Vec::with_capacity(n_max);
        'outer: for (z, l, _) in raw {
            let lam = (z / r).powi(2);
            let norm = (2.0 / r.powi(3)).sqrt() / special::spherical_jl(l + 1, z).abs();
            let push = |m: u32, trig: Trig, modes: &mut Vec<Mode>| {
                modes.push(Mode {
                    eigenvalue: lam,
                    shape: ModeShape::Ball3 {
                        l,
                        m,
                        zero: z,
                        trig,
                        norm,
                    },
                });
            };
            push(0, Trig::Cos, &mut modes);
            if modes.len() == n_max {
                break 'outer;
            }
            for m in 1..=l {
                for trig in [Trig::Cos, Trig::Sin] {
                    push(m, trig, &mut modes);
                    if modes.len() == n_max {
                        break 'outer;
                    }
                }
            }
        }
        if modes.len() == n_max {
            return modes;
        }
        j_cut *= 1.3;
    }
}

fn zeros_upto_bessel(m: u32, cut: f64) -> Vec<f64> {
    // generous count estimate, then filter
    let est = ((cut - m as f64).max(0.0) / 2.8) as usize + 2;
    special::bessel_zeros(m, est)
        .into_iter()
        .filter(|&z| z <= cut)
        .collect()
}

fn zeros_upto_spherical(l: u32, cut: f64) -> Vec<f64> {
    let est = ((cut - l as f64).max(0.0) / 2.8) as usize + 2;
    special::spherical_jl_zeros(l, est)
        .into_iter()
        .filter(|&z| z <= cut)
        .collect()
}

/// Product quadrature over a model domain, exact enough for smooth
/// integrands: Gauss-Legendre radially (and in cos θ for d=3), trapezoid in
/// the periodic angle.
pub fn domain_quadrature(
    domain: &Domain,
    radial: usize,
    angular: usize,
) -> (Vec<Point>, Vec<f64>) {
    match (domain.kind, domain.dim) {
        (DomainKind::UnitInterval, _) => {
            let (x, w) = crate::quad::gauss_legendre_on(radial, 0.0, 1.0);
            (x.into_iter().map(Point::scalar).collect(), w)
        }
        (DomainKind::Ball, 1) => {
            let a = domain.center[0] - domain.radius;
            let b = domain.center[0] + domain.radius;
            let (x, w) = crate::quad::gauss_legendre_on(radial, a, b);
            (x.into_iter().map(Point::scalar).collect(), w)
        }
        (DomainKind::Ball, 2) => {
            let (rs, rw) = crate::quad::gauss_legendre_on(radial, 0.0, domain.radius);
            let dth = 2.0 * PI / angular as f64;
            let mut pts = Vec::with_capacity(radial * angular);
            let mut wts = Vec::with_capacity(radial * angular);
            for (r, wr) in rs.iter().zip(&rw) {
                for it in 0..angular {
                    let th = dth * it as f64;
                    pts.push(Point::new(vec![
                        domain.center[0] + r * th.cos(),
                        domain.center[1] + r * th.sin(),
                    ]));
                    wts.push(wr * r * dth);
                }
            }
            (pts, wts)
        }
        (DomainKind::Ball, 3) => {
            let (rs, rw) = crate::quad::gauss_legendre_on(radial, 0.0, domain.radius);
            let (cs, cw) = crate::quad::gauss_legendre(radial.max(8));
            let dph = 2.0 * PI / angular as f64;
            let mut pts = Vec::new();
            let mut wts = Vec::new();
            for (r, wr) in rs.iter().zip(&rw) {
                for (c, wc) in cs.iter().zip(&cw) {
                    let s = (1.0 - c * c).max(0.0).sqrt();
                    for ip in 0..angular {
                        let ph = dph * ip as f64;
                        pts.push(Point::new(vec![
                            domain.center[0] + r * s * ph.cos(),
                            domain.center[1] + r * s * ph.sin(),
                            domain.center[2] + r * c,
                        ]));
                        wts.push(wr * wc * r * r * dph);
                    }
                }
            }
            (pts, wts)
        }
        _ => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn interval_spectrum() {
        let d = Domain::unit_interval();
        let eb = EigenBasis::new(&d, 3).unwrap();
        assert_abs_diff_eq!(eb.eigenvalue(0), PI * PI, epsilon = 1e-12);
        assert_abs_diff_eq!(eb.eigenvalue(2), 9.0 * PI * PI, epsilon = 1e-11);
        let x = Point::scalar(0.3);
        assert_abs_diff_eq!(
            eb.value(0, &x),
            SQRT_2 * (PI * 0.3).sin(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn disk_ground_state_matches_bessel_zero_oracle() {
        let d = Domain::ball(2, 1.0, vec![0.0, 0.0]).unwrap();
        let eb = EigenBasis::new(&d, 8).unwrap();
        // oracle: bisection of J_0 (see special::tests) gives 2.404825557...
        assert_abs_diff_eq!(eb.eigenvalue(0), 2.404_825_557_695_773_f64.powi(2), epsilon = 1e-8);
        // next eigenvalue: j_{1,1}², doubly degenerate
        assert_abs_diff_eq!(eb.eigenvalue(1), 3.831_705_970_207_512_f64.powi(2), epsilon = 1e-8);
        assert_abs_diff_eq!(eb.eigenvalue(2), eb.eigenvalue(1), epsilon = 1e-10);
    }

    #[test]
    fn eigenvalues_ascend() {
        for d in [
            Domain::unit_interval(),
            Domain::ball(1, 0.7, vec![0.3]).unwrap(),
            Domain::ball(2, 1.0, vec![0.0, 0.0]).unwrap(),
            Domain::ball(3, 1.0, vec![0.0; 3]).unwrap(),
        ] {
            let eb = EigenBasis::new(&d, 25).unwrap();
            let ev = eb.eigenvalues();
            for w in ev.windows(2) {
                assert!(w[1] >= w[0] - 1e-12);
            }
            assert!(ev[0] > 0.0);
        }
    }

    #[test]
    fn orthonormality_under_quadrature() {
        // |<φ_m, φ_n> - δ_mn| < 1e-6 for m, n <= 10 on every domain
        let cases = [
            (Domain::unit_interval(), 64, 1),
            (Domain::ball(1, 0.6, vec![0.1]).unwrap(), 64, 1),
            (Domain::ball(2, 1.0, vec![0.0, 0.0]).unwrap(), 48, 64),
            (Domain::ball(3, 1.0, vec![0.0; 3]).unwrap(), 32, 48),
        ];
        for (dom, radial, angular) in cases {
            let eb = EigenBasis::new(&dom, 10).unwrap();
            let (pts, wts) = domain_quadrature(&dom, radial, angular);
            let vals: Vec<Vec<f64>> = (0..10)
                .map(|i| pts.iter().map(|p| eb.value(i, p)).collect())
                .collect();
            for i in 0..10 {
                for j in i..10 {
                    let mut s = 0.0;
                    for (k, w) in wts.iter().enumerate() {
                        s += w * vals[i][k] * vals[j][k];
                    }
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!(
                        (s - expect).abs() < 1e-6,
                        "domain {:?} <{i},{j}> = {s}",
                        dom.kind
                    );
                }
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let cases = [
            Domain::unit_interval(),
            Domain::ball(2, 1.0, vec![0.0, 0.0]).unwrap(),
            Domain::ball(3, 1.0, vec![0.0; 3]).unwrap(),
        ];
        let h = 1e-6;
        for dom in cases {
            let eb = EigenBasis::new(&dom, 12).unwrap();
            let x = match dom.dim {
                1 => Point::scalar(0.37),
                2 => Point::new(vec![0.31, -0.22]),
                _ => Point::new(vec![0.25, -0.17, 0.33]),
            };
            for i in 0..eb.len() {
                let g = eb.gradient(i, &x);
                for k in 0..dom.dim {
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp.0[k] += h;
                    xm.0[k] -= h;
                    let fd = (eb.value(i, &xp) - eb.value(i, &xm)) / (2.0 * h);
                    assert!(
                        (g[k] - fd).abs() < 2e-5 * (1.0 + g[k].abs()),
                        "mode {i} dim {k}: grad {} fd {fd}",
                        g[k]
                    );
                }
            }
        }
    }

    #[test]
    fn disk_hessian_matches_finite_differences_and_trace() {
        let dom = Domain::ball(2, 1.0, vec![0.0, 0.0]).unwrap();
        let eb = EigenBasis::new(&dom, 9).unwrap();
        let x = Point::new(vec![0.31, -0.22]);
        let h = 1e-5;
        for i in 0..eb.len() {
            let hess = eb.hessian(i, &x).unwrap();
            // trace = Δφ = -λ φ
            let tr = hess[0] + hess[3];
            assert_abs_diff_eq!(
                tr,
                -eb.eigenvalue(i) * eb.value(i, &x),
                epsilon = 1e-6 * eb.eigenvalue(i).max(1.0)
            );
            for (a, b, idx) in [(0, 0, 0), (0, 1, 1), (1, 1, 3)] {
                let mut xpp = x.clone();
                xpp.0[a] += h;
                xpp.0[b] += h;
                let mut xpm = x.clone();
                xpm.0[a] += h;
                xpm.0[b] -= h;
                let mut xmp = x.clone();
                xmp.0[a] -= h;
                xmp.0[b] += h;
                let mut xmm = x.clone();
                xmm.0[a] -= h;
                xmm.0[b] -= h;
                let fd = (eb.value(i, &xpp) - eb.value(i, &xpm) - eb.value(i, &xmp)
                    + eb.value(i, &xmm))
                    / (4.0 * h * h);
                assert!(
                    (hess[idx] - fd).abs() < 1e-3 * (1.0 + hess[idx].abs()),
                    "mode {i} h[{idx}]={} fd={fd}",
                    hess[idx]
                );
            }
        }
    }

    #[test]
    fn eigenfunctions_vanish_linearly_at_boundary() {
        // |φ_n| ≈ ρ · |∂φ/∂n| near the boundary: the ratio |φ|/ρ stabilizes
        for dom in [
            Domain::unit_interval(),
            Domain::ball(2, 1.0, vec![0.0, 0.0]).unwrap(),
        ] {
            let eb = EigenBasis::new(&dom, 5).unwrap();
            for i in 0..5 {
                let probe = |rho: f64| -> f64 {
                    let p = match dom.dim {
                        1 => Point::scalar(1.0 - rho),
                        _ => Point::new(vec![1.0 - rho, 0.0]),
                    };
                    eb.value(i, &p).abs() / rho
                };
                let r2 = probe(1e-2);
                let r3 = probe(1e-3);
                if r2 > 1e-9 {
                    assert!(
                        (r3 / r2 - 1.0).abs() < 0.1,
                        "mode {i} ratio drift {} vs {}",
                        r3,
                        r2
                    );
                }
            }
        }
    }

    #[test]
    fn mode_integrals_match_quadrature() {
        for dom in [
            Domain::unit_interval(),
            Domain::ball(2, 1.0, vec![0.0, 0.0]).unwrap(),
            Domain::ball(3, 1.0, vec![0.0; 3]).unwrap(),
        ] {
            let eb = EigenBasis::new(&dom, 6).unwrap();
            let (pts, wts) = domain_quadrature(&dom, 48, 64);
            for i in 0..eb.len() {
                let q: f64 = pts
                    .iter()
                    .zip(&wts)
                    .map(|(p, w)| w * eb.value(i, p))
                    .sum();
                assert_abs_diff_eq!(eb.integral(i), q, epsilon = 1e-7);
            }
        }
    }
}
