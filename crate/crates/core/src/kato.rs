//! Kato-class functionals for drift fields: the time-dependent functional
//! `K^γ_b(δ)`, the time-independent singular-kernel functional, and the
//! two-regime ("hat") functional that sits between them, plus the L^q_t L^p_x
//! membership predicate and a classification report.
//!
//! Membership verdicts are numerical proxies (the functional decays below a
//! threshold within the probe grid), never claimed proofs: the defining
//! limits `δ ↓ 0` are extrapolable but not computable. The sup over `t > 0`
//! is likewise restricted to a probe list, making every reported value a
//! lower bound on the true supremum.

use crate::domain::{Domain, ModelParams, Point};
use crate::drift::DriftField;
use crate::error::{Error, Result};
use crate::quad::{adaptive_gk_split, gauss_legendre, jacobi_left_singular, AdaptiveSpec};
use rayon::prelude::*;

/// `|b(t±s, y)|` resolved as the max over both signs, with `b` extended by
/// zero outside `(0, horizon]` (conservative: dominates either reading).
fn b_mag_pm(b: &DriftField, horizon: f64, t: f64, s: f64, y: &Point) -> f64 {
    let mut m = 0.0_f64;
    for tt in [t + s, t - s] {
        if tt > 0.0 && tt <= horizon {
            m = m.max(b.magnitude(tt, y).unwrap_or(0.0));
        }
    }
    m
}

/// Spatial factor of the time-dependent functional:
/// `F(t,s,x) = ∫_D (1 ∧ ρ(y)/(|x−y|+s^{1/α})) · s/(|x−y|+s^{1/α})^{d+α+1}
///             · |b(t±s,y)| dy`.
fn spatial_factor(
    domain: &Domain,
    params: &ModelParams,
    b: &DriftField,
    t: f64,
    s: f64,
    x: &Point,
) -> f64 {
    let alpha = params.alpha;
    let d = params.dim as f64;
    let scale = s.powf(1.0 / alpha);
    let kernel = |dist: f64, rho_y: f64| {
        let l = dist + scale;
        (rho_y / l).min(1.0) * s / l.powf(d + alpha + 1.0)
    };
    match domain.dim {
        1 => {
            let (a, len) = crate::gaussian::interval_of(domain).unwrap();
            let xs = x.0[0];
            let f = |y: f64| {
                let p = Point::scalar(y);
                kernel((xs - y).abs(), domain.rho_unchecked(&p))
                    * b_mag_pm(b, params.horizon_t, t, s, &p)
            };
            // fixed composite rule: panel edges at every structural scale
            // (kernel peak ladder around x, dyadic boundary ladders)
            let mut edges = vec![a, a + len, xs];
            for k in 0..=5 {
                let off = scale.min(0.3 * len) * 4.0_f64.powi(k);
                edges.push(xs - off);
                edges.push(xs + off);
            }
            for k in 1..=14 {
                let off = len * 0.5_f64.powi(k);
                edges.push(a + off);
                edges.push(a + len - off);
            }
            panel_gl6(&mut edges, a, a + len, &f)
        }
        _ => polar_integral(domain, x, |dist, p| {
            kernel(dist, domain.rho_unchecked(p)) * b_mag_pm(b, params.horizon_t, t, s, p)
        }),
    }
}

/// Composite 6-point Gauss rule over the sorted, clipped panel edges.
fn panel_gl6<F: Fn(f64) -> f64>(edges: &mut Vec<f64>, lo: f64, hi: f64, f: &F) -> f64 {
    edges.retain(|&e| e >= lo && e <= hi);
    edges.sort_by(|p, q| p.partial_cmp(q).unwrap());
    edges.dedup_by(|p, q| (*p - *q).abs() < 1e-15 * (1.0 + hi.abs()));
    const GX: [f64; 6] = [
        -0.932_469_514_203_152,
        -0.661_209_386_466_264_5,
        -0.238_619_186_083_196_9,
        0.238_619_186_083_196_9,
        0.661_209_386_466_264_5,
        0.932_469_514_203_152,
    ];
    const GW: [f64; 6] = [
        0.171_324_492_379_170_36,
        0.360_761_573_048_138_6,
        0.467_913_934_572_691_04,
        0.467_913_934_572_691_04,
        0.360_761_573_048_138_6,
        0.171_324_492_379_170_36,
    ];
    let mut total = 0.0;
    for w in edges.windows(2) {
        let c = 0.5 * (w[1] - w[0]);
        if c <= 0.0 {
            continue;
        }
        let m = 0.5 * (w[0] + w[1]);
        for (gx, gw) in GX.iter().zip(&GW) {
            total += c * gw * f(m + c * gx);
        }
    }
    total
}

/// `∫_D g(|x−y|, y) dy` on a ball via polar coordinates around `x` with the
/// exact per-direction boundary exit; radial integrals are adaptive with
/// grading toward both the center (kernel peak) and the exit (possible drift
/// singularity at the boundary).
fn polar_integral<G>(domain: &Domain, x: &Point, g: G) -> f64
where
    G: Fn(f64, &Point) -> f64 + Sync,
{
    let dim = domain.dim;
    let r_ball = domain.radius;
    let xc: Vec<f64> = x
        .0
        .iter()
        .zip(&domain.center)
        .map(|(a, c)| a - c)
        .collect();
    let xnorm2: f64 = xc.iter().map(|v| v * v).sum();
    let exit = |u: &[f64]| -> f64 {
        let xu: f64 = xc.iter().zip(u).map(|(a, b)| a * b).sum();
        -xu + (r_ball * r_ball - xnorm2 + xu * xu).max(0.0).sqrt()
    };
    let radial = |u: &[f64]| -> f64 {
        let re = exit(u);
        if re <= 0.0 {
            return 0.0;
        }
        let mut splits: Vec<f64> = (1..=16).map(|k| re * 0.5_f64.powi(k)).collect();
        splits.extend((1..=16).map(|k| re * (1.0 - 0.5_f64.powi(k))));
        let f = |r: f64| {
            if r <= 0.0 || r >= re {
                return 0.0;
            }
            let p = Point::new(
                (0..dim)
                    .map(|k| x.0[k] + r * u[k])
                    .collect::<Vec<f64>>(),
            );
            g(r, &p) * r.powi(dim as i32 - 1)
        };
        adaptive_gk_split(
            &f,
            0.0,
            re,
            &splits,
            AdaptiveSpec {
                rel_tol: 1e-7,
                abs_tol: 1e-280,
                max_depth: 28,
                min_depth: 2,
            },
        )
        .0
    };
    match dim {
        2 => {
            let n_ang = 48;
            let dth = 2.0 * std::f64::consts::PI / n_ang as f64;
            (0..n_ang)
                .map(|i| {
                    let th = dth * i as f64;
                    radial(&[th.cos(), th.sin()]) * dth
                })
                .sum()
        }
        3 => {
            let (cs, cw) = gauss_legendre(12);
            let n_phi = 16;
            let dph = 2.0 * std::f64::consts::PI / n_phi as f64;
            let mut acc = 0.0;
            for (c, wc) in cs.iter().zip(&cw) {
                let st = (1.0 - c * c).max(0.0).sqrt();
                for ip in 0..n_phi {
                    let ph = dph * ip as f64;
                    acc += wc * dph * radial(&[st * ph.cos(), st * ph.sin(), *c]);
                }
            }
            acc
        }
        _ => unreachable!(),
    }
}

/// The time-dependent Kato functional `K^γ_b(δ)`, with the sup over `t`
/// restricted to `t_probes` and the sup over `x` to `x_probes`.
///
/// The time integral splits the bracket `s^{-γ/α} + (δ-s)^{-γ/α}` and uses
/// Gauss-Jacobi weights that also absorb the `s^{-1/α}` growth of the
/// spatial factor, so only the smooth residual is sampled. Requires
/// `0 <= γ < α − 1` (at `γ = α − 1` the time integral diverges for
/// non-decaying drifts).
pub fn kato_functional(
    domain: &Domain,
    params: &ModelParams,
    b: &DriftField,
    gamma: f64,
    delta: f64,
    t_probes: &[f64],
    x_probes: &[Point],
) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must be positive, got {delta}"
        )));
    }
    if !(0.0..params.alpha - 1.0).contains(&gamma) {
        return Err(Error::InvalidParameter(format!(
            "gamma must lie in [0, alpha-1), got {gamma}"
        )));
    }
    if b.is_zero() {
        return Ok(0.0);
    }
    let alpha = params.alpha;
    // time integral ∫_0^δ [s^{-γ/α} + (δ-s)^{-γ/α}] F(s) ds: the integrand
    // carries a left singularity s^{-(γ+1)/α} (the spatial factor itself
    // grows like s^{-1/α}) and a right one (δ-s)^{-γ/α}; both are flattened
    // exactly by power substitutions, and the boundary-layer structure at
    // s ≈ ρ(x)^α is handed to the adaptive rule as a split ladder.
    let q_left = alpha / (alpha - gamma - 1.0);
    let q_right = alpha / (alpha - gamma);
    let weight = move |s: f64| s.powf(-gamma / alpha) + (delta - s).powf(-gamma / alpha);
    let t_list: Vec<f64> = if b.is_time_independent() {
        vec![*t_probes.first().unwrap_or(&(0.5 * params.horizon_t))]
    } else {
        t_probes.to_vec()
    };
    let sup = t_list
        .par_iter()
        .flat_map(|&t| x_probes.par_iter().map(move |x| (t, x)))
        .map(|(t, x)| {
            let rho_x = domain.rho_unchecked(x);
            let s_star = rho_x.powf(alpha).clamp(1e-12, delta);
            let half = 0.5 * delta;
            // left half in u with s = u^{q_left} (flattens the combined
            // s^{-(γ+1)/α} endpoint behavior exactly)
            let u_hi = half.powf(1.0 / q_left);
            let f_left = |u: f64| {
                if u <= 0.0 || u >= u_hi {
                    return 0.0;
                }
                let s = u.powf(q_left);
                weight(s)
                    * spatial_factor(domain, params, b, t, s, x)
                    * q_left
                    * u.powf(q_left - 1.0)
            };
            let mut edges = vec![0.0, u_hi];
            for k in 1..=8 {
                edges.push(u_hi * 0.5_f64.powi(k));
            }
            for k in -4..=4 {
                edges.push((s_star * 4.0_f64.powi(k)).powf(1.0 / q_left));
            }
            let left = panel_gl6(&mut edges, 0.0, u_hi, &f_left);
            // right half in v with δ - s = v^{q_right}
            let v_hi = half.powf(1.0 / q_right);
            let f_right = |v: f64| {
                if v <= 0.0 || v >= v_hi {
                    return 0.0;
                }
                let s = delta - v.powf(q_right);
                weight(s)
                    * spatial_factor(domain, params, b, t, s, x)
                    * q_right
                    * v.powf(q_right - 1.0)
            };
            let mut edges = vec![0.0, v_hi];
            for k in 1..=6 {
                edges.push(v_hi * 0.5_f64.powi(k));
            }
            let right = panel_gl6(&mut edges, 0.0, v_hi, &f_right);
            left + right
        })
        .reduce(|| 0.0, f64::max);
    Ok(delta.powf(gamma / alpha) * sup)
}

/// Two-regime functional of a time-independent field:
/// `sup_x ∫_D (1 ∧ ρ(y)/|x−y|) (|x−y|^{-(d+1-α)} ∧ t²|x−y|^{-(d+α+1)}) |f| dy`.
pub fn hat_kato_functional(
    domain: &Domain,
    params: &ModelParams,
    f: &DriftField,
    t: f64,
    x_probes: &[Point],
) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "hat functional requires t > 0, got {t}"
        )));
    }
    if f.is_zero() {
        return Ok(0.0);
    }
    let alpha = params.alpha;
    let d = params.dim as f64;
    let switch = t.powf(1.0 / alpha);
    let kernel = move |dist: f64, rho_y: f64| {
        if dist <= 0.0 {
            return 0.0;
        }
        let k1 = dist.powf(-(d + 1.0 - alpha));
        let k2 = t * t * dist.powf(-(d + alpha + 1.0));
        (rho_y / dist).min(1.0) * k1.min(k2)
    };
    let sup = x_probes
        .par_iter()
        .map(|x| singular_spatial(domain, params, f, x, kernel, switch))
        .reduce(|| 0.0, f64::max);
    Ok(sup)
}

/// Time-independent singular-kernel functional
/// `sup_x ∫_{D ∩ B(x,r)} |f(y)| / |x−y|^{d+1-α} dy`.
pub fn bold_kato_functional(
    domain: &Domain,
    params: &ModelParams,
    f: &DriftField,
    r: f64,
    x_probes: &[Point],
) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "radius must be positive, got {r}"
        )));
    }
    if f.is_zero() {
        return Ok(0.0);
    }
    let alpha = params.alpha;
    let d = params.dim as f64;
    let kernel = move |dist: f64, rho_y: f64| {
        let _ = rho_y;
        if dist <= 0.0 || dist > r {
            0.0
        } else {
            dist.powf(-(d + 1.0 - alpha))
        }
    };
    let sup = x_probes
        .par_iter()
        .map(|x| singular_spatial(domain, params, f, x, kernel, r))
        .reduce(|| 0.0, f64::max);
    Ok(sup)
}

/// Spatial integral of `kernel(|x−y|, ρ(y))·|f(y)|` with an integrable
/// `|x−y|^{α-2}`-type singularity at `y = x`: Jacobi-weighted panels around
/// the singularity, graded panels toward the boundary.
fn singular_spatial<K>(
    domain: &Domain,
    params: &ModelParams,
    f: &DriftField,
    x: &Point,
    kernel: K,
    switch: f64,
) -> f64
where
    K: Fn(f64, f64) -> f64 + Sync,
{
    let alpha = params.alpha;
    match domain.dim {
        1 => {
            let (a, len) = crate::gaussian::interval_of(domain).unwrap();
            let xs = x.0[0];
            // each side of the singular point: ∫ |u|^{-(2-α)} smooth(u) du
            let mut total = 0.0;
            for (lo, hi, sign) in [(a, xs, -1.0), (xs, a + len, 1.0)] {
                let seg = (hi - lo).abs();
                if seg < 1e-14 {
                    continue;
                }
                let inner = seg.min(switch);
                // singular part: Jacobi weight u^{-(2-α)} against the smooth rest
                let (us, ws) = match jacobi_left_singular(24, 2.0 - alpha, inner) {
                    Ok(v) => v,
                    Err(_) => return 0.0,
                };
                for (u, w) in us.iter().zip(&ws) {
                    let y = xs + sign * u;
                    if y <= a || y >= a + len {
                        continue;
                    }
                    let p = Point::scalar(y);
                    let rho = domain.rho_unchecked(&p);
                    // kernel value with its |u|^{-(2-α)} factor divided out
                    let smooth = kernel(*u, rho) * u.powf(2.0 - alpha);
                    total += w * smooth * f.magnitude(0.5 * params.horizon_t, &p).unwrap_or(0.0);
                }
                // regular far part |u| ∈ (inner, seg): adaptive, graded both ends
                if seg > inner {
                    let g = |u: f64| {
                        if u <= inner || u >= seg {
                            return 0.0;
                        }
                        let y = xs + sign * u;
                        let p = Point::scalar(y);
                        kernel(u, domain.rho_unchecked(&p))
                            * f.magnitude(0.5 * params.horizon_t, &p).unwrap_or(0.0)
                    };
                    let mut splits: Vec<f64> = (1..=20)
                        .map(|k| seg - (seg - inner) * 0.5_f64.powi(k))
                        .collect();
                    splits.push(2.0 * inner);
                    splits.push(4.0 * inner);
                    total += adaptive_gk_split(
                        &g,
                        inner,
                        seg,
                        &splits,
                        AdaptiveSpec {
                            rel_tol: 1e-8,
                            abs_tol: 1e-280,
                            max_depth: 30,
                            min_depth: 2,
                        },
                    )
                    .0;
                }
            }
            total
        }
        _ => polar_integral(domain, x, |dist, p| {
            kernel(dist, domain.rho_unchecked(p))
                * f.magnitude(0.5 * params.horizon_t, p).unwrap_or(0.0)
        }),
    }
}

/// The `L^q_t L^p_x` membership predicate: `d/(αp) + 1/q < 1 − (1+γ)/α`,
/// with `1/∞ = 0`.
pub fn lp_lq_membership(params: &ModelParams, gamma: f64, p: f64, q: f64) -> bool {
    let inv = |v: f64| if v.is_infinite() { 0.0 } else { 1.0 / v };
    let d = params.dim as f64;
    let alpha = params.alpha;
    d / alpha * inv(p) + inv(q) < 1.0 - (1.0 + gamma) / alpha
}

/// Classification outcome for one drift field.
#[derive(Debug, Clone)]
pub struct KatoReport {
    pub gamma_list: Vec<f64>,
    pub delta_grid: Vec<f64>,
    /// `k_values[i][j] = K^{γ_i}(δ_j)`.
    pub k_values: Vec<Vec<f64>>,
    /// least-squares slope of `ln K` against `ln δ` per γ
    pub decay_exponent: Vec<f64>,
    /// proxy verdict per γ: functional decays below the threshold in-grid
    pub member_k_gamma: Vec<bool>,
    pub bold_r_grid: Vec<f64>,
    pub bold_values: Vec<f64>,
    pub member_bold: bool,
    pub hat_t_grid: Vec<f64>,
    pub hat_values: Vec<f64>,
    pub member_hat: bool,
    pub threshold: f64,
}

/// Default boundary-refined probe grid for the sup over `x`.
pub fn default_x_probes(domain: &Domain) -> Vec<Point> {
    match domain.dim {
        1 => domain.probe_grid(14, 7),
        2 => domain.probe_grid(5, 3),
        _ => domain.probe_grid(3, 2),
    }
}

/// Default log-spaced probe list for the sup over `t`.
pub fn default_t_probes(horizon: f64) -> Vec<f64> {
    (0..16)
        .map(|i| horizon * 10f64.powf(-3.0 + 3.0 * i as f64 / 15.0))
        .collect()
}

/// Evaluate every functional family for `b` and attach threshold verdicts.
pub fn classify(
    domain: &Domain,
    params: &ModelParams,
    b: &DriftField,
    gamma_list: &[f64],
    delta_grid: &[f64],
    threshold: f64,
) -> Result<KatoReport> {
    if gamma_list.is_empty() || delta_grid.is_empty() {
        return Err(Error::InvalidParameter(
            "classify requires nonempty gamma and delta grids".into(),
        ));
    }
    let x_probes = default_x_probes(domain);
    let t_probes = default_t_probes(params.horizon_t);
    let mut k_values = Vec::with_capacity(gamma_list.len());
    for &g in gamma_list {
        let mut row = Vec::with_capacity(delta_grid.len());
        for &d in delta_grid {
            row.push(kato_functional(
                domain, params, b, g, d, &t_probes, &x_probes,
            )?);
        }
        k_values.push(row);
    }
    let decay_exponent = k_values
        .iter()
        .map(|row| fit_log_slope(delta_grid, row))
        .collect::<Vec<_>>();
    let member_k_gamma = k_values
        .iter()
        .map(|row| row.iter().cloned().fold(f64::INFINITY, f64::min) < threshold)
        .collect::<Vec<_>>();

    let bold_r_grid: Vec<f64> = delta_grid.iter().map(|&d| d.powf(1.0 / params.alpha)).collect();
    let bold_values = bold_r_grid
        .iter()
        .map(|&r| bold_kato_functional(domain, params, b, r, &x_probes))
        .collect::<Result<Vec<_>>>()?;
    let member_bold =
        bold_values.iter().cloned().fold(f64::INFINITY, f64::min) < threshold;

    let hat_t_grid: Vec<f64> = delta_grid.to_vec();
    let hat_values = hat_t_grid
        .iter()
        .map(|&t| hat_kato_functional(domain, params, b, t, &x_probes))
        .collect::<Result<Vec<_>>>()?;
    let member_hat = hat_values.iter().cloned().fold(f64::INFINITY, f64::min) < threshold;

    Ok(KatoReport {
        gamma_list: gamma_list.to_vec(),
        delta_grid: delta_grid.to_vec(),
        k_values,
        decay_exponent,
        member_k_gamma,
        bold_r_grid,
        bold_values,
        member_bold,
        hat_t_grid,
        hat_values,
        member_hat,
        threshold,
    })
}

fn fit_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(_, &y)| y > 0.0)
        .map(|(&x, &y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}
