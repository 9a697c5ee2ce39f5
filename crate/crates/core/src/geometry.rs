//! Uniform circular array geometry and receive-array poses.
//!
//! The transmit UCA lies in the z = 0 plane centred on the origin. The receive
//! UCA faces it at axial distance `D`, optionally shifted along +x by the
//! lateral offset `d_x` and tilted about the y-axis by `θ_x`. Element `m` of
//! either array sits at azimuth `2πm/N` measured from its local x-axis.

use std::f64::consts::PI;

use nalgebra::{Point3, Rotation3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    element_count: usize,
    radius: f64,
}

impl ArrayGeometry {
    pub fn new(element_count: usize, radius: f64) -> Result<Self> {
        ensure_finite("radius", radius)?;
        if element_count == 0 {
            return Err(SimError::invalid("element count must be at least 1"));
        }
        if radius <= 0.0 {
            return Err(SimError::invalid(format!("radius must be positive, got {radius}")));
        }
        Ok(Self { element_count, radius })
    }

    pub fn element_count(&self) -> usize {
        self.element_count
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Azimuth of element `m` in the array's own plane.
    pub fn element_angle(&self, m: usize) -> f64 {
        2.0 * PI * m as f64 / self.element_count as f64
    }

    /// Element positions in the array's local frame (z = 0 plane).
    fn local_positions(&self) -> impl Iterator<Item = Vector3<f64>> + '_ {
        (0..self.element_count).map(move |m| {
            let phi = self.element_angle(m);
            Vector3::new(self.radius * phi.cos(), self.radius * phi.sin(), 0.0)
        })
    }
}

/// Placement of the receive array relative to the transmit array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    axial_distance: f64,
    lateral_offset: f64,
    tilt: f64,
}

impl Pose {
    /// `tilt` is in radians.
    pub fn new(axial_distance: f64, lateral_offset: f64, tilt: f64) -> Result<Self> {
        ensure_finite("axial distance", axial_distance)?;
        ensure_finite("lateral offset", lateral_offset)?;
        ensure_finite("tilt", tilt)?;
        if axial_distance <= 0.0 {
            return Err(SimError::invalid(format!(
                "axial distance must be positive, got {axial_distance}"
            )));
        }
        if lateral_offset < 0.0 {
            return Err(SimError::invalid(format!(
                "lateral offset must be non-negative, got {lateral_offset}"
            )));
        }
        if !(0.0..PI / 2.0).contains(&tilt) {
            return Err(SimError::invalid(format!("tilt must lie in [0, π/2), got {tilt}")));
        }
        Ok(Self { axial_distance, lateral_offset, tilt })
    }

    pub fn aligned(axial_distance: f64) -> Result<Self> {
        Self::new(axial_distance, 0.0, 0.0)
    }

    pub fn axial_distance(&self) -> f64 {
        self.axial_distance
    }

    pub fn lateral_offset(&self) -> f64 {
        self.lateral_offset
    }

    pub fn tilt(&self) -> f64 {
        self.tilt
    }

    pub fn is_aligned(&self) -> bool {
        self.lateral_offset == 0.0 && self.tilt == 0.0
    }

    /// Centre of the receive circle.
    pub fn receive_center(&self) -> Point3<f64> {
        Point3::new(self.lateral_offset, 0.0, self.axial_distance)
    }

    fn rotation(&self) -> Rotation3<f64> {
        Rotation3::from_axis_angle(&Vector3::y_axis(), self.tilt)
    }

    /// Unit normal of the receive array plane.
    pub fn receive_normal(&self) -> Vector3<f64> {
        self.rotation() * Vector3::z()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Transmit,
    Receive,
}

pub fn element_positions(geom: &ArrayGeometry, pose: &Pose, side: Side) -> Vec<Point3<f64>> {
    match side {
        Side::Transmit => geom.local_positions().map(Point3::from).collect(),
        Side::Receive => {
            let rotation = pose.rotation();
            let center = pose.receive_center();
            geom.local_positions().map(|v| center + rotation * v).collect()
        }
    }
}

/// Transmit and receive points of the SISO link between the two array centres.
pub fn siso_positions(pose: &Pose) -> (Point3<f64>, Point3<f64>) {
    (Point3::origin(), pose.receive_center())
}
