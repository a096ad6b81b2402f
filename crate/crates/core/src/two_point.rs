//! Two-point space `K_2` parametrized by `x -> (x, 1 - x)`: curvature,
//! transport distance, the upper bound on `kappa_min`, and effectiveness.

use serde::Serialize;

use crate::curvature::{global_curvature, GlobalCurvatureReport};
use crate::energies::Energy;
use crate::error::{invalid, Error, Result};
use crate::graph::Graph;
use crate::means::{MeanFunction, MeanKind};
use crate::quadrature::integrate_segment;
use crate::search::SearchParams;
use crate::simplex::BOUNDARY_MARGIN;

/// Absolute tolerance for distance quadrature.
pub const DISTANCE_TOL: f64 = 1e-11;

#[derive(Debug, Clone)]
pub struct TwoPointProblem {
    pub mean: MeanFunction,
    pub energy: Energy,
}

#[derive(Debug, Clone, Serialize)]
pub struct Effectiveness {
    #[serde(serialize_with = "crate::report::extended_f64")]
    pub efct: f64,
    #[serde(serialize_with = "crate::report::extended_f64")]
    pub kappa_min: f64,
    pub distance: f64,
    pub upper_bound: f64,
    pub search: GlobalCurvatureReport,
}

impl TwoPointProblem {
    pub fn new(mean: MeanFunction, energy: Energy) -> Result<Self> {
        energy.check_dim(2)?;
        Ok(TwoPointProblem { mean, energy })
    }

    fn require_symmetric(&self) -> Result<()> {
        if self.energy.is_symmetric_two_point(1e-12)? {
            Ok(())
        } else {
            Err(Error::Precondition("energy is not symmetric under p1 <-> p2".into()))
        }
    }

    /// `1/2 (d_1 theta - d_2 theta)(d_1 E - d_2 E) + theta (d_11 E - 2 d_12 E + d_22 E)`.
    pub fn kappa(&self, x: f64) -> Result<f64> {
        let y = 1.0 - x;
        let min = x.min(y);
        if !(min >= BOUNDARY_MARGIN) {
            return Err(Error::Boundary { min, margin: BOUNDARY_MARGIN });
        }
        let (th, d1, d2) = self.mean.jet(x, y);
        let (_, g, h) = self.energy.two_point_jet(x, y)?;
        Ok(0.5 * (d1 - d2) * g + th * h)
    }

    /// `int_{x1}^{x2} theta(x, 1 - x)^{-1/2} dx`.
    pub fn transport_distance(&self, x1: f64, x2: f64) -> Result<f64> {
        if !(0.0 <= x1 && x1 <= x2 && x2 <= 1.0) {
            return Err(invalid(format!("need 0 <= x1 <= x2 <= 1, got ({x1}, {x2})")));
        }
        integrate_segment(|x, y| 1.0 / self.mean.value(x, y).sqrt(), x1, x2, DISTANCE_TOL)
    }

    /// `E(1, 0) - E(1/2, 1/2)`.
    fn energy_gap(&self) -> Result<f64> {
        Ok(self.energy.value(&[1.0, 0.0])? - self.energy.value(&[0.5, 0.5])?)
    }

    /// `8 (E(1,0) - E(1/2,1/2)) / d(0,1)^2`.
    pub fn kappa_min_upper_bound(&self) -> Result<f64> {
        self.require_symmetric()?;
        let d = self.transport_distance(0.0, 1.0)?;
        Ok(8.0 * self.energy_gap()? / (d * d))
    }

    /// `kappa_min d(0,1)^2 / (8 (E(1,0) - E(1/2,1/2)))`, with `kappa_min`
    /// from the global search on `K_2`. Propagates `-inf`.
    pub fn effectiveness(&self, params: &SearchParams) -> Result<Effectiveness> {
        self.require_symmetric()?;
        let d = self.transport_distance(0.0, 1.0)?;
        let gap = self.energy_gap()?;
        let k2 = Graph::complete(2)?;
        let search = global_curvature(&k2, &self.mean, &self.energy, params)?;
        let kappa_min = search.kappa0;
        Ok(Effectiveness {
            efct: kappa_min * d * d / (8.0 * gap),
            kappa_min,
            distance: d,
            upper_bound: 8.0 * gap / (d * d),
            search,
        })
    }

    /// Closed-form distance under a transport information mean with constant
    /// `C`, for `x1 <= x2`.
    pub fn constant_curvature_distance(&self, x1: f64, x2: f64) -> Result<f64> {
        let c = match &self.mean.kind {
            MeanKind::TransportInformation(t) => t.constant(),
            _ => return Err(Error::Precondition("mean is not a transport information mean".into())),
        };
        if !(0.0 <= x1 && x1 <= x2 && x2 <= 1.0) {
            return Err(invalid(format!("need 0 <= x1 <= x2 <= 1, got ({x1}, {x2})")));
        }
        let e_half = self.energy.value(&[0.5, 0.5])?;
        let r = |x: f64| -> Result<f64> { Ok((self.energy.value(&[x, 1.0 - x])? - e_half).max(0.0).sqrt()) };
        let (a, b) = (r(x1)?, r(x2)?);
        let s = (2.0 / c).sqrt();
        Ok(if x2 <= 0.5 {
            s * (a - b)
        } else if x1 <= 0.5 {
            s * (a + b)
        } else {
            s * (b - a)
        })
    }
}
