//! Special functions backing the ball eigenbases: integer-order Bessel `J_m`,
//! spherical Bessel `j_l`, their zeros, and orthonormalized associated
//! Legendre functions for real spherical harmonics.
//!
//! Zeros are located by sign-change scanning followed by bracketed bisection;
//! no external special-function dependency is involved, so the zeros double
//! as their own oracle (the scan cannot skip a zero because consecutive zeros
//! of cylinder functions are separated by more than the scan step).

/// `J_0(x)`: power series for `|x| <= 12`, Hankel asymptotic beyond.
pub fn bessel_j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= 12.0 {
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..200 {
            term *= -q / ((k * k) as f64);
            sum += term;
            if term.abs() < 1e-17 * sum.abs().max(1.0) {
                break;
            }
        }
        sum
    } else {
        hankel(0, ax)
    }
}

/// `J_1(x)`: power series for `|x| <= 12`, Hankel asymptotic beyond.
pub fn bessel_j1(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax <= 12.0 {
        let q = 0.25 * ax * ax;
        let mut term = 0.5 * ax;
        let mut sum = term;
        for k in 1..200 {
            term *= -q / ((k * (k + 1)) as f64);
            sum += term;
            if term.abs() < 1e-17 * sum.abs().max(1.0) {
                break;
            }
        }
        sum
    } else {
        hankel(1, ax)
    };
    if x < 0.0 {
        -v
    } else {
        v
    }
}

/// Hankel's asymptotic expansion for `J_m`, valid for large `x` (used only
/// for m = 0, 1 and x > 12 where it is accurate to ~1e-15).
fn hankel(m: u32, x: f64) -> f64 {
    let mu = (4 * m * m) as f64;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let z = 8.0 * x;
    for k in 1..30u32 {
        let f = (2 * k - 1) as f64;
        term *= (mu - f * f) / (k as f64 * z);
        let t = term.abs();
        if k % 2 == 1 {
            if k % 4 == 1 {
                q += term;
            } else {
                q -= term;
            }
        } else if k % 4 == 2 {
            p -= term;
        } else {
            p += term;
        }
        if t < 1e-17 {
            break;
        }
    }
    let chi = x - (2.0 * m as f64 + 1.0) * std::f64::consts::FRAC_PI_4;
    (2.0 / (std::f64::consts::PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// Integer-order `J_m(x)` for `x >= 0`. Upward recurrence when `x > m`,
/// Miller's downward algorithm otherwise.
pub fn bessel_jn(m: u32, x: f64) -> f64 {
    match m {
        0 => return bessel_j0(x),
        1 => return bessel_j1(x),
        _ => {}
    }
    if x == 0.0 {
        return 0.0;
    }
    let mf = m as f64;
    if x > mf {
        let mut jm1 = bessel_j0(x);
        let mut j = bessel_j1(x);
        for k in 1..m {
            let jp1 = (2.0 * k as f64 / x) * j - jm1;
            jm1 = j;
            j = jp1;
        }
        j
    } else {
        miller(m, x)
    }
}

/// Miller's downward recurrence, normalized by `J_0 + 2 Σ J_{2k} = 1`.
fn miller(m: u32, x: f64) -> f64 {
    let mf = m as f64;
    let start = {
        let s = m + 16 + (40.0 + 2.0 * mf + x).sqrt() as u32;
        if s % 2 == 0 {
            s
        } else {
            s + 1
        }
    };
    let mut jp1 = 0.0_f64;
    let mut j = 1e-300_f64;
    let mut even_sum = 0.0_f64; // accumulates J_0 + 2 Σ_{k>=1} J_{2k}
    let mut target = 0.0_f64;
    let mut k = start as i64;
    while k >= 1 {
        let jm1 = (2.0 * k as f64 / x) * j - jp1;
        jp1 = j;
        j = jm1;
        let idx = (k - 1) as u32;
        if idx == m {
            target = j;
        }
        if idx % 2 == 0 {
            even_sum += if idx == 0 { j } else { 2.0 * j };
        }
        if j.abs() > 1e250 {
            jp1 *= 1e-250;
            j *= 1e-250;
            even_sum *= 1e-250;
            target *= 1e-250;
        }
        k -= 1;
    }
    target / even_sum
}

/// `J_m'(x)`.
pub fn bessel_jn_deriv(m: u32, x: f64) -> f64 {
    if m == 0 {
        -bessel_j1(x)
    } else {
        0.5 * (bessel_jn(m - 1, x) - bessel_jn(m + 1, x))
    }
}

/// First `count` positive zeros of `J_m`, ascending, by scan + bisection.
pub fn bessel_zeros(m: u32, count: usize) -> Vec<f64> {
    scan_zeros(|x| bessel_jn(m, x), m as f64 + 0.1, count)
}

/// Spherical Bessel `j_l(x)`: series for small argument, upward recurrence
/// from the closed forms otherwise.
pub fn spherical_jl(l: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if l == 0 { 1.0 } else { 0.0 };
    }
    let lf = l as f64;
    if x * x <= 2.0 * lf + 3.0 || x < lf {
        // j_l(x) = x^l/(2l+1)!! Σ_k (-x²/2)^k / (k! (2l+3)(2l+5)...(2l+2k+1))
        let mut lead = 1.0;
        for k in 1..=l {
            lead *= x / (2.0 * k as f64 + 1.0);
        }
        let mut term = lead;
        let mut sum = lead;
        let q = 0.5 * x * x;
        for k in 1..200u32 {
            term *= -q / (k as f64 * (2.0 * (lf + k as f64) + 1.0));
            sum += term;
            if term.abs() < 1e-17 * sum.abs().max(1e-300) {
                break;
            }
        }
        sum
    } else {
        let mut jm1 = x.sin() / x;
        if l == 0 {
            return jm1;
        }
        let mut j = x.sin() / (x * x) - x.cos() / x;
        for k in 1..l {
            let jp1 = (2.0 * k as f64 + 1.0) / x * j - jm1;
            jm1 = j;
            j = jp1;
        }
        j
    }
}

/// `j_l'(x)`.
pub fn spherical_jl_deriv(l: u32, x: f64) -> f64 {
    if l == 0 {
        if x.abs() < 1e-6 {
            // -x/3 + x^3/30
            return -x / 3.0 + x.powi(3) / 30.0;
        }
        return -spherical_jl(1, x);
    }
    if x.abs() < 1e-280 {
        return if l == 1 { 1.0 / 3.0 } else { 0.0 };
    }
    spherical_jl(l - 1, x) - (l as f64 + 1.0) / x * spherical_jl(l, x)
}

/// First `count` positive zeros of `j_l`, ascending.
pub fn spherical_jl_zeros(l: u32, count: usize) -> Vec<f64> {
    scan_zeros(|x| spherical_jl(l, x), l as f64 + 0.5, count)
}

/// Scan for sign changes with step 0.5 starting at `from`, bisect each
/// bracket to ~1e-13 relative width. Consecutive zeros of the functions used
/// here are separated by more than π/2, so the scan cannot skip any.
fn scan_zeros<F: Fn(f64) -> f64>(f: F, from: f64, count: usize) -> Vec<f64> {
    let mut zeros = Vec::with_capacity(count);
    let step = 0.5;
    let mut a = from;
    let mut fa = f(a);
    // skip a possible flat region where f is essentially 0 at the start
    while fa == 0.0 {
        a += 1e-3;
        fa = f(a);
    }
    let mut guard = 0usize;
    while zeros.len() < count && guard < 1_000_000 {
        guard += 1;
        let b = a + step;
        let fb = f(b);
        if fa * fb < 0.0 {
            let (mut lo, mut hi) = (a, b);
            let mut flo = fa;
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                let fm = f(mid);
                if flo * fm <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
                if hi - lo < 1e-13 * hi.max(1.0) {
                    break;
                }
            }
            zeros.push(0.5 * (lo + hi));
        }
        a = b;
        fa = fb;
    }
    zeros
}

/// Orthonormalized associated Legendre `\bar P_l^m(x)`, `x = cos θ`, such
/// that the spherical harmonics `\bar P_l^m(cos θ) e^{imφ}` are L²-normalized
/// on the sphere.
pub fn legendre_norm(l: u32, m: u32, x: f64) -> f64 {
    debug_assert!(m <= l);
    let sin_t = (1.0 - x * x).max(0.0).sqrt();
    let mut pmm = (1.0 / (4.0 * std::f64::consts::PI)).sqrt();
    for k in 1..=m {
        let kf = k as f64;
        pmm *= -((2.0 * kf + 1.0) / (2.0 * kf)).sqrt() * sin_t;
    }
    if l == m {
        return pmm;
    }
    let mut pm1 = pmm;
    let mut p = x * (2.0 * m as f64 + 3.0).sqrt() * pmm;
    if l == m + 1 {
        return p;
    }
    for ll in (m + 2)..=l {
        let lf = ll as f64;
        let mf = m as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0))
            .sqrt();
        let pnew = a * (x * p - b * pm1);
        pm1 = p;
        p = pnew;
    }
    p
}

/// `d/dx` of `legendre_norm` (used for θ-gradients of ball eigenfunctions).
/// Diverges like `1/sin θ` at the poles for `m >= 1`; callers keep probe
/// points off the polar axis.
pub fn legendre_norm_deriv(l: u32, m: u32, x: f64) -> f64 {
    let lf = l as f64;
    let mf = m as f64;
    let one_m_x2 = (1.0 - x * x).max(1e-30);
    if l == 0 {
        return 0.0;
    }
    let p = legendre_norm(l, m, x);
    if l == m {
        // (1-x²) d/dx \bar P_l^l = -l x \bar P_l^l
        return -lf * x * p / one_m_x2;
    }
    let c = ((2.0 * lf + 1.0) * (lf * lf - mf * mf) / (2.0 * lf - 1.0)).sqrt();
    (-lf * x * p + c * legendre_norm(l - 1, m, x)) / one_m_x2
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn j0_j1_reference_values() {
        assert_abs_diff_eq!(bessel_j0(1.0), 0.765_197_686_557_966_6, epsilon = 1e-13);
        assert_abs_diff_eq!(bessel_j0(5.0), -0.177_596_771_314_338_3, epsilon = 1e-13);
        assert_abs_diff_eq!(bessel_j0(20.0), 0.167_024_664_340_583_3, epsilon = 1e-12);
        assert_abs_diff_eq!(bessel_j1(1.0), 0.440_050_585_744_933_5, epsilon = 1e-13);
        assert_abs_diff_eq!(bessel_j1(5.0), -0.327_579_137_591_465_2, epsilon = 1e-13);
        assert_abs_diff_eq!(bessel_j1(20.0), 0.066_833_124_175_850_06, epsilon = 1e-12);
    }

    #[test]
    fn jn_reference_values() {
        // Abramowitz-Stegun style references
        assert_abs_diff_eq!(bessel_jn(2, 1.0), 0.114_903_484_931_900_48, epsilon = 1e-13);
        assert_abs_diff_eq!(bessel_jn(5, 2.0), 0.007_039_629_755_871_685, epsilon = 1e-13);
        assert_abs_diff_eq!(bessel_jn(10, 1.0), 2.630_615_123_687_453e-10, epsilon = 1e-20);
        assert_abs_diff_eq!(bessel_jn(3, 10.0), 0.058_379_379_305_186_8, epsilon = 1e-12);
    }

    #[test]
    fn jn_consistency_with_recurrence() {
        // J_{m-1}(x) + J_{m+1}(x) = (2m/x) J_m(x) across the Miller/upward seam
        for &x in &[0.5, 3.0, 7.5, 15.0] {
            for m in 1..12u32 {
                let lhs = bessel_jn(m - 1, x) + bessel_jn(m + 1, x);
                let rhs = 2.0 * m as f64 / x * bessel_jn(m, x);
                assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn first_bessel_zero_matches_bisection_oracle() {
        // independent coarse oracle: bisect J_0 on [2, 3] to 1e-10
        let (mut lo, mut hi) = (2.0, 3.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if bessel_j0(lo) * bessel_j0(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let oracle = 0.5 * (lo + hi);
        let z = bessel_zeros(0, 1)[0];
        assert_abs_diff_eq!(z, oracle, epsilon = 1e-10);
        assert_abs_diff_eq!(z, 2.404_825_557_695_773, epsilon = 1e-10);
    }

    #[test]
    fn bessel_zero_tables() {
        let z0 = bessel_zeros(0, 3);
        assert_abs_diff_eq!(z0[1], 5.520_078_110_286_311, epsilon = 1e-9);
        assert_abs_diff_eq!(z0[2], 8.653_727_912_911_013, epsilon = 1e-9);
        let z1 = bessel_zeros(1, 2);
        assert_abs_diff_eq!(z1[0], 3.831_705_970_207_512, epsilon = 1e-9);
        assert_abs_diff_eq!(z1[1], 7.015_586_669_815_619, epsilon = 1e-9);
        let z5 = bessel_zeros(5, 1);
        assert_abs_diff_eq!(z5[0], 8.771_483_815_959_954, epsilon = 1e-8);
    }

    #[test]
    fn spherical_bessel_values_and_zeros() {
        assert_abs_diff_eq!(spherical_jl(0, 1.0), 1.0_f64.sin(), epsilon = 1e-14);
        // j_1(x) = sin x / x² - cos x / x at x=2
        let x = 2.0_f64;
        assert_abs_diff_eq!(
            spherical_jl(1, x),
            x.sin() / (x * x) - x.cos() / x,
            epsilon = 1e-14
        );
        // small-argument series branch vs closed form
        let x = 0.3_f64;
        assert_abs_diff_eq!(
            spherical_jl(1, x),
            x.sin() / (x * x) - x.cos() / x,
            epsilon = 1e-15
        );
        // zeros of j_0 are kπ; first zero of j_1 solves tan x = x
        let z0 = spherical_jl_zeros(0, 2);
        assert_abs_diff_eq!(z0[0], std::f64::consts::PI, epsilon = 1e-10);
        assert_abs_diff_eq!(z0[1], 2.0 * std::f64::consts::PI, epsilon = 1e-10);
        let z1 = spherical_jl_zeros(1, 1);
        assert_abs_diff_eq!(z1[0], 4.493_409_457_909_064, epsilon = 1e-9);
    }

    #[test]
    fn legendre_norm_low_orders() {
        let fourpi = 4.0 * std::f64::consts::PI;
        let x = 0.37_f64;
        assert_abs_diff_eq!(legendre_norm(0, 0, x), (1.0 / fourpi).sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(
            legendre_norm(1, 0, x),
            (3.0 / fourpi).sqrt() * x,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            legendre_norm(2, 0, x),
            (5.0 / fourpi).sqrt() * 0.5 * (3.0 * x * x - 1.0),
            epsilon = 1e-14
        );
        let s = (1.0 - x * x).sqrt();
        assert_abs_diff_eq!(
            legendre_norm(1, 1, x),
            -(3.0 / (2.0 * fourpi)).sqrt() * s,
            epsilon = 1e-14
        );
    }

    #[test]
    fn legendre_orthonormality_by_quadrature() {
        // ∫_{-1}^{1} \bar P_l^m \bar P_{l'}^m dx = δ_{ll'} / (2π)
        let (xs, ws) = crate::quad::gauss_legendre(64);
        for m in 0..3u32 {
            for l1 in m..6 {
                for l2 in m..6 {
                    let mut s = 0.0;
                    for (x, w) in xs.iter().zip(&ws) {
                        s += w * legendre_norm(l1, m, *x) * legendre_norm(l2, m, *x);
                    }
                    let expect = if l1 == l2 {
                        1.0 / (2.0 * std::f64::consts::PI)
                    } else {
                        0.0
                    };
                    assert_abs_diff_eq!(s, expect, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn legendre_deriv_matches_finite_difference() {
        let h = 1e-6;
        for &(l, m) in &[(1u32, 0u32), (3, 1), (5, 2), (4, 4)] {
            for &x in &[-0.6, 0.1, 0.7] {
                let fd = (legendre_norm(l, m, x + h) - legendre_norm(l, m, x - h)) / (2.0 * h);
                assert_abs_diff_eq!(legendre_norm_deriv(l, m, x), fd, epsilon = 1e-6);
            }
        }
    }
}
