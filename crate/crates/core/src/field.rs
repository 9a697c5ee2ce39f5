//! Observation-plane intensity of a UCA driven with a single OAM mode.

use std::f64::consts::PI;

use nalgebra::Point3;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{los_gain_unchecked, Carrier};
use crate::error::{ensure_finite, Result, SimError};
use crate::geometry::{element_positions, ArrayGeometry, Pose, Side};

pub const DEFAULT_PLANE_DISTANCE: f64 = 5.0;
pub const DEFAULT_EXTENT: f64 = 2.0;
pub const DEFAULT_RESOLUTION: usize = 256;

/// Square intensity map on the plane `z`, relative to the mode-0 on-axis
/// intensity at the same plane. Row-major, `y` major then `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldMap {
    pub mode: usize,
    pub z: f64,
    /// Half-width of the square window (m); it spans `[-extent, extent]`.
    pub extent: f64,
    pub resolution: usize,
    pub reference_intensity: f64,
    pub intensity: Vec<f64>,
}

/// Scalar field at `point` from the array excited with mode `l`:
/// `Σ_m exp(j2πml/N)/√N · (λ/4πd_m)·exp(−j2πd_m/λ)`.
pub fn field_at(geom: &ArrayGeometry, carrier: &Carrier, mode: usize, point: &Point3<f64>) -> Complex64 {
    let n = geom.element_count();
    let scale = 1.0 / (n as f64).sqrt();
    let wavelength = carrier.wavelength();
    // the pose only matters for the receive side
    let pose = Pose::aligned(1.0).expect("unit distance is a valid pose");
    element_positions(geom, &pose, Side::Transmit)
        .iter()
        .enumerate()
        .map(|(m, p)| {
            let excitation = Complex64::from_polar(scale, 2.0 * PI * ((m * mode) % n) as f64 / n as f64);
            excitation * los_gain_unchecked((point - p).norm(), wavelength)
        })
        .sum()
}

/// Intensity at `(0, 0, z)` relative to mode 0 at the same point.
pub fn on_axis_relative_intensity(geom: &ArrayGeometry, carrier: &Carrier, mode: usize, z: f64) -> f64 {
    let axis = Point3::new(0.0, 0.0, z);
    field_at(geom, carrier, mode, &axis).norm_sqr() / field_at(geom, carrier, 0, &axis).norm_sqr()
}

pub fn compute_field(
    geom: &ArrayGeometry,
    carrier: &Carrier,
    mode: usize,
    z: f64,
    extent: f64,
    resolution: usize,
) -> Result<FieldMap> {
    ensure_finite("plane distance", z)?;
    ensure_finite("extent", extent)?;
    if z <= 0.0 {
        return Err(SimError::invalid(format!("plane distance must be positive, got {z}")));
    }
    if extent <= 0.0 {
        return Err(SimError::invalid(format!("extent must be positive, got {extent}")));
    }
    if mode >= geom.element_count() {
        return Err(SimError::invalid(format!(
            "mode {mode} out of range for {} elements",
            geom.element_count()
        )));
    }
    if resolution < 2 {
        return Err(SimError::invalid(format!("resolution must be at least 2, got {resolution}")));
    }
    let reference_intensity = field_at(geom, carrier, 0, &Point3::new(0.0, 0.0, z)).norm_sqr();
    let coord = |i: usize| -extent + 2.0 * extent * i as f64 / (resolution - 1) as f64;
    let intensity = (0..resolution)
        .into_par_iter()
        .flat_map_iter(|iy| {
            let y = coord(iy);
            (0..resolution).map(move |ix| {
                field_at(geom, carrier, mode, &Point3::new(coord(ix), y, z)).norm_sqr() / reference_intensity
            })
        })
        .collect();
    Ok(FieldMap { mode, z, extent, resolution, reference_intensity, intensity })
}

impl FieldMap {
    pub fn spacing(&self) -> f64 {
        2.0 * self.extent / (self.resolution - 1) as f64
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        -self.extent + self.spacing() * i as f64
    }

    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.intensity[iy * self.resolution + ix]
    }

    fn pixels(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.resolution).flat_map(move |iy| {
            (0..self.resolution).map(move |ix| (self.coordinate(ix), self.coordinate(iy), self.at(ix, iy)))
        })
    }

    /// Azimuth-averaged intensity in radial bins one pixel wide, out to the
    /// inscribed circle. Entries are `(bin centre radius, mean intensity)`.
    pub fn radial_profile(&self) -> Vec<(f64, f64)> {
        let dr = self.spacing();
        let bins = (self.extent / dr).floor() as usize;
        let mut sum = vec![0.0; bins];
        let mut count = vec![0usize; bins];
        for (x, y, v) in self.pixels() {
            let b = ((x * x + y * y).sqrt() / dr) as usize;
            if b < bins {
                sum[b] += v;
                count[b] += 1;
            }
        }
        (0..bins)
            .filter(|&b| count[b] > 0)
            .map(|b| ((b as f64 + 0.5) * dr, sum[b] / count[b] as f64))
            .collect()
    }

    /// Radius of the brightest azimuth-averaged ring.
    pub fn ring_radius(&self) -> f64 {
        self.radial_profile()
            .into_iter()
            .fold((0.0, f64::NEG_INFINITY), |best, (r, v)| if v > best.1 { (r, v) } else { best })
            .0
    }

    /// Relative intensity integrated over a centred disc (m² × relative units).
    pub fn captured_power(&self, aperture_radius: f64) -> f64 {
        let area = self.spacing() * self.spacing();
        self.pixels()
            .filter(|(x, y, _)| x * x + y * y <= aperture_radius * aperture_radius)
            .map(|(_, _, v)| v)
            .sum::<f64>()
            * area
    }

    pub fn peak(&self) -> f64 {
        self.intensity.iter().copied().fold(0.0, f64::max)
    }
}

/// Coefficient of variation of intensity over `samples` azimuths at `radius`.
pub fn azimuthal_variation(
    geom: &ArrayGeometry,
    carrier: &Carrier,
    mode: usize,
    z: f64,
    radius: f64,
    samples: usize,
) -> f64 {
    let values: Vec<f64> = (0..samples)
        .map(|i| {
            let phi = 2.0 * PI * i as f64 / samples as f64;
            field_at(geom, carrier, mode, &Point3::new(radius * phi.cos(), radius * phi.sin(), z)).norm_sqr()
        })
        .collect();
    let mean = values.iter().sum::<f64>() / samples as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / samples as f64;
    var.sqrt() / mean
}
