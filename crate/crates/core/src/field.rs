//! Model parameter `θ = 1/c²` and perturbation directions.

use crate::config::{BumpSpec, MediumSpec};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::linalg::norm2;

/// Nodal values of `θ = 1/c²` (s²/m²). Strictly positive by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterField {
    theta: Vec<f64>,
    name: String,
}

impl ParameterField {
    pub fn new(theta: Vec<f64>, name: impl Into<String>) -> Result<Self> {
        if let Some((node, &value)) = theta
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v > 0.0 && v.is_finite()))
        {
            return Err(Error::NonPositiveTheta { node, value });
        }
        Ok(ParameterField {
            theta,
            name: name.into(),
        })
    }

    pub fn homogeneous(grid: &Grid, velocity: f64) -> Result<Self> {
        ParameterField::new(
            vec![1.0 / (velocity * velocity); grid.node_count()],
            format!("c={velocity}"),
        )
    }

    /// Linear vertical gradient plus an optional Gaussian lens.
    pub fn from_medium(grid: &Grid, medium: &MediumSpec) -> Result<Self> {
        let theta = grid
            .coords()
            .map(|(x, y)| {
                let mut c = medium.velocity + medium.gradient * y;
                if let Some(lens) = medium.lens {
                    let r2 = (x - lens.center.0).powi(2) + (y - lens.center.1).powi(2);
                    c += lens.amplitude * (-r2 / (lens.radius * lens.radius)).exp();
                }
                if c > 0.0 {
                    1.0 / (c * c)
                } else {
                    f64::NAN
                }
            })
            .collect();
        let name = if medium.gradient == 0.0 && medium.lens.is_none() {
            format!("c={}", medium.velocity)
        } else {
            "gradient+lens".to_string()
        };
        ParameterField::new(theta, name)
    }

    pub fn values(&self) -> &[f64] {
        &self.theta
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn max_velocity(&self) -> f64 {
        let min_theta = self.theta.iter().copied().fold(f64::INFINITY, f64::min);
        1.0 / min_theta.sqrt()
    }

    pub fn l2_norm(&self) -> f64 {
        norm2(&self.theta)
    }

    /// `θ + α δθ`, re-checked for positivity.
    pub fn perturbed(&self, dtheta: &Perturbation, alpha: f64) -> Result<Self> {
        if dtheta.len() != self.len() {
            return Err(Error::Dimension(format!(
                "perturbation has {} nodes, field has {}",
                dtheta.len(),
                self.len()
            )));
        }
        let theta = self
            .theta
            .iter()
            .zip(dtheta.values())
            .map(|(t, d)| t + alpha * d)
            .collect();
        ParameterField::new(theta, format!("{}+{alpha:e}dtheta", self.name))
    }
}

/// Perturbation direction `δθ` with its cached discrete 2-norm.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation {
    dtheta: Vec<f64>,
    l2_norm: f64,
}

impl Perturbation {
    /// Wraps a field, rejecting the all-zero direction.
    pub fn new(dtheta: Vec<f64>) -> Result<Self> {
        let p = Perturbation::new_unchecked(dtheta);
        if p.l2_norm == 0.0 {
            return Err(Error::ZeroPerturbation);
        }
        Ok(p)
    }

    /// Like [`Perturbation::new`] but accepts zero (used by tests and by
    /// degenerate cascades).
    pub fn new_unchecked(dtheta: Vec<f64>) -> Self {
        let l2_norm = norm2(&dtheta);
        Perturbation { dtheta, l2_norm }
    }

    pub fn zero(len: usize) -> Self {
        Perturbation::new_unchecked(vec![0.0; len])
    }

    pub fn values(&self) -> &[f64] {
        &self.dtheta
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm
    }

    pub fn len(&self) -> usize {
        self.dtheta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dtheta.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.l2_norm == 0.0
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Perturbation::new_unchecked(self.dtheta.iter().map(|v| v * factor).collect())
    }

    /// Perturbation size `α ‖δθ‖₂ / ‖θ₀‖₂` in percent.
    pub fn percent(&self, alpha: f64, theta0: &ParameterField) -> f64 {
        100.0 * alpha * self.l2_norm / theta0.l2_norm()
    }
}

/// How to build a perturbation direction.
#[derive(Debug, Clone)]
pub enum PerturbationShape {
    /// Gaussian bump `exp(-r²/R²)` rescaled to the requested norm ratio.
    Bump(BumpSpec),
    /// Explicit nodal values, optionally rescaled to a norm ratio.
    Field {
        values: Vec<f64>,
        norm_ratio: Option<f64>,
    },
}

pub fn make_perturbation(
    grid: &Grid,
    theta0: &ParameterField,
    shape: &PerturbationShape,
) -> Result<Perturbation> {
    let (raw, ratio) = match shape {
        PerturbationShape::Bump(b) => {
            let r2 = b.radius * b.radius;
            let values: Vec<f64> = grid
                .coords()
                .map(|(x, y)| {
                    let d2 = (x - b.center.0).powi(2) + (y - b.center.1).powi(2);
                    (-d2 / r2).exp()
                })
                .collect();
            (values, Some(b.norm_ratio))
        }
        PerturbationShape::Field { values, norm_ratio } => {
            if values.len() != grid.node_count() {
                return Err(Error::Dimension(format!(
                    "perturbation field has {} values, grid has {} nodes",
                    values.len(),
                    grid.node_count()
                )));
            }
            (values.clone(), *norm_ratio)
        }
    };
    let p = Perturbation::new(raw)?;
    match ratio {
        Some(r) => Ok(p.scaled(r * theta0.l2_norm() / p.l2_norm())),
        None => Ok(p),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump(ratio: f64) -> PerturbationShape {
        PerturbationShape::Bump(BumpSpec {
            center: (25.0, 12.0),
            radius: 10.0,
            norm_ratio: ratio,
        })
    }

    #[test]
    fn bump_hits_ten_percent_at_reference_alpha() {
        let g = Grid::new(50.0, 51).unwrap();
        let theta = ParameterField::homogeneous(&g, 15.0).unwrap();
        let p = make_perturbation(&g, &theta, &bump(0.10 / 2.12e-3)).unwrap();
        let ratio = p.l2_norm() / theta.l2_norm();
        assert!((ratio - 47.169_811_320_754_72).abs() < 1e-9);
        assert!((p.percent(2.12e-3, &theta) - 10.0).abs() < 1e-9);
        assert_eq!(p.percent(0.0, &theta), 0.0);
    }

    #[test]
    fn zero_amplitude_rejected() {
        let g = Grid::new(1.0, 5).unwrap();
        let theta = ParameterField::homogeneous(&g, 1.0).unwrap();
        let shape = PerturbationShape::Field {
            values: vec![0.0; 25],
            norm_ratio: Some(1.0),
        };
        let err = make_perturbation(&g, &theta, &shape).unwrap_err();
        assert_eq!(err.to_string(), "zero perturbation");
    }

    #[test]
    fn cached_norm_matches() {
        let p = Perturbation::new(vec![3.0, 4.0, 0.0]).unwrap();
        assert!((p.l2_norm() - 5.0).abs() <= 5.0 * 1e-12);
    }

    #[test]
    fn positivity_enforced() {
        assert!(ParameterField::new(vec![1.0, 0.0], "x").is_err());
        let theta = ParameterField::new(vec![1.0, 1.0], "x").unwrap();
        let d = Perturbation::new(vec![-1.0, 0.0]).unwrap();
        assert!(theta.perturbed(&d, 0.5).is_ok());
        match theta.perturbed(&d, 1.0) {
            Err(Error::NonPositiveTheta { node, .. }) => assert_eq!(node, 0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn medium_with_gradient_and_lens() {
        let g = Grid::new(10.0, 11).unwrap();
        let m = MediumSpec {
            velocity: 10.0,
            gradient: 0.5,
            lens: Some(crate::config::Lens {
                center: (5.0, 5.0),
                radius: 1.0,
                amplitude: 2.0,
            }),
        };
        let theta = ParameterField::from_medium(&g, &m).unwrap();
        let c = |node: usize| 1.0 / theta.values()[node].sqrt();
        assert!((c(g.index(0, 0)) - 10.0).abs() < 1e-12);
        assert!((c(g.index(5, 5)) - (12.5 + 2.0)).abs() < 1e-12);
        let fastest = (0..g.node_count()).map(c).fold(0.0, f64::max);
        assert!((theta.max_velocity() - fastest).abs() < 1e-12);
    }
}
