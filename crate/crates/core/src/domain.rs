//! Model domains: the unit interval and balls in dimension up to three, with
//! exact boundary distance and boundary-refined probe grids.
//!
//! These are the domains on which exact eigendata is available, so every
//! kernel estimate can be verified against a trustworthy closed-form oracle.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Global model parameters: stability index, dimension, time horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Stability index of the subordinate process, in (1, 2).
    pub alpha: f64,
    /// Ambient dimension, 1..=3.
    pub dim: usize,
    /// Fixed time horizon T for every horizon-dependent estimate.
    pub horizon_t: f64,
}

impl ModelParams {
    pub fn new(alpha: f64, dim: usize, horizon_t: f64) -> Result<Self> {
        if !(alpha > 1.0 && alpha < 2.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (1,2), got {alpha}"
            )));
        }
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidParameter(format!(
                "dim must be 1, 2 or 3, got {dim}"
            )));
        }
        if !(horizon_t > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "horizon_t must be positive, got {horizon_t}"
            )));
        }
        Ok(Self {
            alpha,
            dim,
            horizon_t,
        })
    }

    /// Subordinator index β = α/2.
    pub fn beta(&self) -> f64 {
        0.5 * self.alpha
    }
}

/// A point in the ambient space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        debug_assert!(coords.iter().all(|c| c.is_finite()));
        Point(coords)
    }

    pub fn scalar(x: f64) -> Self {
        Point(vec![x])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn dist(&self, other: &Point) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|a| a * a).sum::<f64>().sqrt()
    }
}

/// Which model domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    UnitInterval,
    Ball,
}

/// A bounded C^{1,1} model domain: the unit interval (0,1) or a ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub kind: DomainKind,
    pub dim: usize,
    /// Ball radius (1.0 and unused for the interval).
    pub radius: f64,
    /// Ball center (empty for the interval).
    pub center: Vec<f64>,
}

impl Domain {
    pub fn unit_interval() -> Self {
        Domain {
            kind: DomainKind::UnitInterval,
            dim: 1,
            radius: 1.0,
            center: vec![],
        }
    }

    pub fn ball(dim: usize, radius: f64, center: Vec<f64>) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::Unsupported(format!(
                "balls are supported for dim 1..=3, got {dim}"
            )));
        }
        if !(radius > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        if center.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: center.len(),
            });
        }
        Ok(Domain {
            kind: DomainKind::Ball,
            dim,
            radius,
            center,
        })
    }

    pub fn check_dim(&self, x: &Point) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.dim(),
            });
        }
        Ok(())
    }

    /// Distance to the boundary ρ(x); zero on and outside the boundary.
    pub fn dist_to_boundary(&self, x: &Point) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.rho_unchecked(x))
    }

    /// ρ(x) without the dimension check (hot path).
    pub fn rho_unchecked(&self, x: &Point) -> f64 {
        match self.kind {
            DomainKind::UnitInterval => {
                let t = x.0[0];
                (t.min(1.0 - t)).max(0.0)
            }
            DomainKind::Ball => {
                let r = x
                    .0
                    .iter()
                    .zip(&self.center)
                    .map(|(a, c)| (a - c) * (a - c))
                    .sum::<f64>()
                    .sqrt();
                (self.radius - r).max(0.0)
            }
        }
    }

    /// Lebesgue volume of the domain.
    pub fn volume(&self) -> f64 {
        match (self.kind, self.dim) {
            (DomainKind::UnitInterval, _) => 1.0,
            (DomainKind::Ball, 1) => 2.0 * self.radius,
            (DomainKind::Ball, 2) => std::f64::consts::PI * self.radius * self.radius,
            (DomainKind::Ball, 3) => {
                4.0 / 3.0 * std::f64::consts::PI * self.radius.powi(3)
            }
            _ => unreachable!(),
        }
    }

    /// Interior probe grid: a uniform lattice plus points accumulating
    /// geometrically toward the boundary (ρ halving per refinement level),
    /// so boundary-sensitive estimates get stressed.
    ///
    /// Refinement level j contributes points at ρ = base/4 · 2^{-j} where
    /// base is the domain scale (1 for the interval, R for balls).
    pub fn probe_grid(&self, resolution: usize, boundary_refinement: usize) -> Vec<Point> {
        assert!(resolution >= 2, "resolution must be at least 2");
        let mut pts: Vec<Point> = Vec::new();
        match self.kind {
            DomainKind::UnitInterval => {
                for i in 1..=resolution {
                    pts.push(Point::scalar(i as f64 / (resolution as f64 + 1.0)));
                }
                for j in 1..=boundary_refinement {
                    let rho = 0.25 * 0.5_f64.powi(j as i32);
                    pts.push(Point::scalar(rho));
                    pts.push(Point::scalar(1.0 - rho));
                }
            }
            DomainKind::Ball => {
                let r = self.radius;
                // tensor lattice over the bounding box, interior points only
                let axis: Vec<f64> = (1..=resolution)
                    .map(|i| -r + 2.0 * r * i as f64 / (resolution as f64 + 1.0))
                    .collect();
                let mut idx = vec![0usize; self.dim];
                loop {
                    let coords: Vec<f64> = idx
                        .iter()
                        .enumerate()
                        .map(|(k, &i)| self.center[k] + axis[i])
                        .collect();
                    let p = Point::new(coords);
                    if self.rho_unchecked(&p) > 1e-12 * r {
                        pts.push(p);
                    }
                    // advance multi-index
                    let mut k = 0;
                    loop {
                        idx[k] += 1;
                        if idx[k] < axis.len() {
                            break;
                        }
                        idx[k] = 0;
                        k += 1;
                        if k == self.dim {
                            break;
                        }
                    }
                    if k == self.dim {
                        break;
                    }
                }
                // boundary-refined shells along the coordinate axes
                for j in 1..=boundary_refinement {
                    let rho = 0.25 * r * 0.5_f64.powi(j as i32);
                    for k in 0..self.dim {
                        for sign in [-1.0, 1.0] {
                            let mut coords = self.center.clone();
                            coords[k] += sign * (r - rho);
                            pts.push(Point::new(coords));
                        }
                    }
                }
            }
        }
        // deterministic order
        pts.sort_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        pts.dedup_by(|a, b| a.dist(b) < 1e-14);
        pts
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    #[test]
    fn boundary_distance_examples() {
        let d = Domain::unit_interval();
        assert_abs_diff_eq!(
            d.dist_to_boundary(&Point::scalar(0.5)).unwrap(),
            0.5,
            epsilon = 0.0
        );
        assert_abs_diff_eq!(
            d.dist_to_boundary(&Point::scalar(1.0)).unwrap(),
            0.0,
            epsilon = 0.0
        );
        let b = Domain::ball(2, 1.0, vec![0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(
            b.dist_to_boundary(&Point::new(vec![0.0, 0.0])).unwrap(),
            1.0,
            epsilon = 0.0
        );
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let d = Domain::unit_interval();
        assert!(d.dist_to_boundary(&Point::new(vec![0.1, 0.2])).is_err());
    }

    #[test]
    fn interval_probe_grid_examples() {
        let d = Domain::unit_interval();
        let g = d.probe_grid(3, 0);
        let xs: Vec<f64> = g.iter().map(|p| p.0[0]).collect();
        assert_eq!(xs, vec![0.25, 0.5, 0.75]);

        let g = d.probe_grid(2, 2);
        let xs: Vec<f64> = g.iter().map(|p| p.0[0]).collect();
        assert!(xs.contains(&0.125) && xs.contains(&0.0625));
        assert!(xs.contains(&(1.0 - 0.125)) && xs.contains(&(1.0 - 0.0625)));
    }

    #[test]
    fn ball_probe_grid_interior_only() {
        let b = Domain::ball(2, 1.0, vec![0.0, 0.0]).unwrap();
        let g = b.probe_grid(4, 3);
        assert!(!g.is_empty());
        for p in &g {
            assert!(b.rho_unchecked(p) > 0.0);
        }
    }

    #[test]
    fn rho_is_one_lipschitz() {
        // |ρ(x) - ρ(y)| <= |x - y| on 10^4 random pairs per domain
        let domains = [
            Domain::unit_interval(),
            Domain::ball(2, 1.3, vec![0.2, -0.1]).unwrap(),
            Domain::ball(3, 0.8, vec![0.0, 0.0, 0.0]).unwrap(),
        ];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for d in &domains {
            for _ in 0..10_000 {
                let p = Point::new((0..d.dim).map(|_| rng.gen_range(-2.0..2.0)).collect());
                let q = Point::new((0..d.dim).map(|_| rng.gen_range(-2.0..2.0)).collect());
                let lhs = (d.rho_unchecked(&p) - d.rho_unchecked(&q)).abs();
                assert!(lhs <= p.dist(&q) + 1e-12);
            }
        }
    }
}
