//! Free-space LOS channel synthesis between element sets, and eigen-analysis
//! of the circulant channel formed by two aligned UCAs.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Point3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Result, SimError};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Relative tolerance for accepting a matrix as circulant.
pub const CIRCULANT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Carrier {
    frequency: f64,
}

impl Carrier {
    pub fn new(frequency: f64) -> Result<Self> {
        ensure_finite("carrier frequency", frequency)?;
        if frequency <= 0.0 {
            return Err(SimError::invalid(format!(
                "carrier frequency must be positive, got {frequency}"
            )));
        }
        Ok(Self { frequency })
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.frequency
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength()
    }
}

/// Friis amplitude with spherical-wave phase: `(λ/4πd)·exp(−j2πd/λ)`.
pub fn los_gain(distance: f64, carrier: &Carrier) -> Result<Complex64> {
    if !(distance.is_finite() && distance > 0.0) {
        return Err(SimError::invalid(format!(
            "propagation distance must be positive and finite, got {distance}"
        )));
    }
    Ok(los_gain_unchecked(distance, carrier.wavelength()))
}

#[inline]
pub(crate) fn los_gain_unchecked(distance: f64, wavelength: f64) -> Complex64 {
    let amplitude = wavelength / (4.0 * PI * distance);
    Complex64::from_polar(amplitude, -2.0 * PI * distance / wavelength)
}

/// `N_r × N_t` complex amplitude gains; row `n` is receive element `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    entries: DMatrix<Complex64>,
    wavelength: f64,
}

impl ChannelMatrix {
    /// Wraps raw entries, e.g. a hypothetical channel for analysis.
    pub fn from_entries(entries: DMatrix<Complex64>, wavelength: f64) -> Result<Self> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(SimError::invalid("channel matrix must be non-empty"));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(SimError::invalid("channel matrix entries must be finite"));
        }
        ensure_finite("wavelength", wavelength)?;
        Ok(Self { entries, wavelength })
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn rx_count(&self) -> usize {
        self.entries.nrows()
    }

    pub fn tx_count(&self) -> usize {
        self.entries.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rx_count() == self.tx_count()
    }

    /// Σ_n,k |H_nk|² (received power per unit transmit power per stream).
    pub fn frobenius_power(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Largest deviation from circulant structure relative to the largest
    /// entry magnitude. `None` if the matrix is not square.
    pub fn circulant_mismatch(&self) -> Option<f64> {
        if !self.is_square() {
            return None;
        }
        let n = self.rx_count();
        let scale = self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return Some(0.0);
        }
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in 0..n {
                let expected = self.entries[(0, (c + n - r) % n)];
                worst = worst.max((self.entries[(r, c)] - expected).norm());
            }
        }
        Some(worst / scale)
    }

    pub fn is_circulant(&self) -> bool {
        self.circulant_mismatch().is_some_and(|m| m < CIRCULANT_TOLERANCE)
    }

    /// Singular values in descending order.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self.entries.clone().svd(false, false).singular_values.iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }
}

/// Entry `(n, m)` is the LOS gain from transmit point `m` to receive point `n`.
pub fn build_channel(
    tx_positions: &[Point3<f64>],
    rx_positions: &[Point3<f64>],
    carrier: &Carrier,
) -> Result<ChannelMatrix> {
    if tx_positions.is_empty() || rx_positions.is_empty() {
        return Err(SimError::invalid("position sequences must be non-empty"));
    }
    let wavelength = carrier.wavelength();
    let mut entries = DMatrix::zeros(rx_positions.len(), tx_positions.len());
    for (n, rx) in rx_positions.iter().enumerate() {
        for (m, tx) in tx_positions.iter().enumerate() {
            let d = (rx - tx).norm();
            if d == 0.0 {
                return Err(SimError::DegenerateGeometry { tx: m, rx: n });
            }
            if !d.is_finite() {
                return Err(SimError::invalid("element positions must be finite"));
            }
            entries[(n, m)] = los_gain_unchecked(d, wavelength);
        }
    }
    Ok(ChannelMatrix { entries, wavelength })
}

/// Eigenvalues of a circulant channel ordered by OAM mode `l = 0..N-1`.
///
/// Computed as `Σ_m H[0,m]·exp(+j2πml/N)`, the first-row transform whose
/// sign convention makes entry `l` equal to `(F^H H F)[l,l]` for the
/// unitary DFT excitation matrix `F[m,l] = exp(j2πml/N)/√N`.
pub fn circulant_mode_gains(h: &ChannelMatrix) -> Result<Vec<Complex64>> {
    let mismatch = h
        .circulant_mismatch()
        .ok_or_else(|| SimError::StructureViolation(format!(
            "expected a square matrix, got {}x{}",
            h.rx_count(),
            h.tx_count()
        )))?;
    if mismatch >= CIRCULANT_TOLERANCE {
        return Err(SimError::StructureViolation(format!(
            "channel is not circulant (relative mismatch {mismatch:e})"
        )));
    }
    let n = h.tx_count();
    let row = h.entries.row(0);
    Ok((0..n)
        .map(|l| {
            (0..n)
                .map(|m| row[m] * Complex64::from_polar(1.0, 2.0 * PI * ((m * l) % n) as f64 / n as f64))
                .sum()
        })
        .collect())
}
