//! The maps between attractors and delay embeddings, evaluated on
//! contemporaneous point pairs.

use serde::{Deserialize, Serialize};

use crate::dynamics::{MeasurementSet, Trajectory};
use crate::embedding::{
    delay_embed, measure, DelayEmbedding, Domain, Measurement, PointCloud, Slice,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MapKind {
    /// `M_x → N_x` through the driver measurement.
    PhiGammaX,
    /// `M_y → N_y` through the response measurement.
    PhiGammaY,
    /// `M_xy → N_x`.
    PhiPhiX,
    /// `M_xy → N_y`.
    PhiPhiY,
    /// `M_xy → N_xy` through a measurement of the joint state.
    PhiPhiXY,
    PiX,
    PiY,
    /// Inclusion `M_y → M_xy`.
    IotaX,
    /// Inclusion `M_x → M_xy`.
    IotaY,
    /// Contemporaneous map `N_y → N_x`.
    PsiYtoX,
    /// Contemporaneous map `N_x → N_y`.
    PsiXtoY,
}

impl MapKind {
    pub const ALL: [MapKind; 11] = [
        MapKind::PhiGammaX,
        MapKind::PhiGammaY,
        MapKind::PhiPhiX,
        MapKind::PhiPhiY,
        MapKind::PhiPhiXY,
        MapKind::PiX,
        MapKind::PiY,
        MapKind::IotaX,
        MapKind::IotaY,
        MapKind::PsiYtoX,
        MapKind::PsiXtoY,
    ];

    pub fn label(self) -> &'static str {
        match self {
            MapKind::PhiGammaX => "PhiGammaX",
            MapKind::PhiGammaY => "PhiGammaY",
            MapKind::PhiPhiX => "PhiPhiX",
            MapKind::PhiPhiY => "PhiPhiY",
            MapKind::PhiPhiXY => "PhiPhiXY",
            MapKind::PiX => "PiX",
            MapKind::PiY => "PiY",
            MapKind::IotaX => "IotaX",
            MapKind::IotaY => "IotaY",
            MapKind::PsiYtoX => "PsiYtoX",
            MapKind::PsiXtoY => "PsiXtoY",
        }
    }

    pub fn parse(s: &str) -> Option<MapKind> {
        MapKind::ALL
            .into_iter()
            .find(|k| k.label().eq_ignore_ascii_case(s))
    }
}

/// A map given by its graph: row `i` of `domain` maps to row `i` of `image`.
#[derive(Debug, Clone, Copy)]
pub struct MapUnderTest<'a> {
    pub kind: MapKind,
    pub domain: &'a PointCloud,
    pub image: &'a PointCloud,
}

impl<'a> MapUnderTest<'a> {
    pub fn new(kind: MapKind, domain: &'a PointCloud, image: &'a PointCloud) -> Result<Self> {
        if domain.len() != image.len() {
            return Err(Error::validation(format!(
                "map {} has {} domain points but {} image points",
                kind.label(),
                domain.len(),
                image.len()
            )));
        }
        Ok(MapUnderTest {
            kind,
            domain,
            image,
        })
    }

    /// Squared-distance ratio for the pair `(i, j)`.
    pub fn ratio(&self, i: usize, j: usize) -> f64 {
        self.image.dist2(i, j) / self.domain.dist2(i, j)
    }
}

/// The five measurement functions used to build delay embeddings.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSpec {
    pub gamma_x: Measurement,
    pub gamma_y: Measurement,
    pub phi_x: Measurement,
    pub phi_y: Measurement,
    pub phi_xy: Option<Measurement>,
}

impl ObservationSpec {
    /// First coordinate of each subsystem; `φ_x`, `φ_y` read the same
    /// coordinates from the joint state.
    pub fn first_coordinates(n_x: usize) -> Self {
        ObservationSpec {
            gamma_x: Measurement::projection(Domain::XOnly, 0),
            gamma_y: Measurement::projection(Domain::YOnly, 0),
            phi_x: Measurement::projection(Domain::Joint, 0),
            phi_y: Measurement::projection(Domain::Joint, n_x),
            phi_xy: None,
        }
    }

    /// Normalized linear measurements of the forced linear example for
    /// embedding dimension `m`.
    pub fn linear(set: &MeasurementSet, m: usize) -> Self {
        ObservationSpec {
            gamma_x: Measurement::linear(Domain::XOnly, set.h_gamma_x(m)),
            gamma_y: Measurement::linear(Domain::YOnly, set.h_gamma_y(m)),
            phi_x: Measurement::linear(Domain::Joint, set.h_phi_x(m)),
            phi_y: Measurement::linear(Domain::Joint, set.h_phi_y(m)),
            phi_xy: Some(Measurement::linear(Domain::Joint, set.h_phi_xy(m))),
        }
    }
}

/// Attractor slices and delay embeddings over a shared time range, so row `i`
/// of every member refers to the same time `start_time + i`.
#[derive(Debug, Clone)]
pub struct AttractorViews {
    pub start_time: usize,
    pub m_x: PointCloud,
    pub m_y: PointCloud,
    pub m_xy: PointCloud,
    pub gamma_x: DelayEmbedding,
    pub gamma_y: DelayEmbedding,
    pub phi_x: DelayEmbedding,
    pub phi_y: DelayEmbedding,
    pub phi_xy: Option<DelayEmbedding>,
}

impl AttractorViews {
    pub fn build(traj: &Trajectory, obs: &ObservationSpec, m: usize, tau: usize) -> Result<Self> {
        let embed = |meas: &Measurement| -> Result<DelayEmbedding> {
            Ok(delay_embed(&measure(traj, meas)?, m, tau)?.with_source(meas.clone()))
        };
        let gamma_x = embed(&obs.gamma_x)?;
        let start = gamma_x.base_offset;
        let len = gamma_x.len();
        Ok(AttractorViews {
            start_time: start,
            m_x: PointCloud::from_trajectory(traj, Slice::X, start, len)?,
            m_y: PointCloud::from_trajectory(traj, Slice::Y, start, len)?,
            m_xy: PointCloud::from_trajectory(traj, Slice::Joint, start, len)?,
            gamma_y: embed(&obs.gamma_y)?,
            phi_x: embed(&obs.phi_x)?,
            phi_y: embed(&obs.phi_y)?,
            phi_xy: obs.phi_xy.as_ref().map(embed).transpose()?,
            gamma_x,
        })
    }

    pub fn len(&self) -> usize {
        self.m_x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m_x.is_empty()
    }

    pub fn map(&self, kind: MapKind) -> Result<MapUnderTest<'_>> {
        let (domain, image) = match kind {
            MapKind::PhiGammaX => (&self.m_x, &self.gamma_x.points),
            MapKind::PhiGammaY => (&self.m_y, &self.gamma_y.points),
            MapKind::PhiPhiX => (&self.m_xy, &self.phi_x.points),
            MapKind::PhiPhiY => (&self.m_xy, &self.phi_y.points),
            MapKind::PhiPhiXY => (
                &self.m_xy,
                &self
                    .phi_xy
                    .as_ref()
                    .ok_or_else(|| Error::validation("no joint measurement configured"))?
                    .points,
            ),
            MapKind::PiX => (&self.m_xy, &self.m_x),
            MapKind::PiY => (&self.m_xy, &self.m_y),
            MapKind::IotaX => (&self.m_y, &self.m_xy),
            MapKind::IotaY => (&self.m_x, &self.m_xy),
            MapKind::PsiYtoX => (&self.phi_y.points, &self.gamma_x.points),
            MapKind::PsiXtoY => (&self.gamma_x.points, &self.phi_y.points),
        };
        MapUnderTest::new(kind, domain, image)
    }
}
