//! Dynamic-power-splitting SWIPT receivers for OAM, MIMO and SISO links.
//!
//! Every receive stream is split in the RF domain: a fraction `ρ` of its
//! power goes to the information decoder, where RF-to-baseband conversion
//! adds noise `σ_cov²`, and `1 − ρ` goes to the energy harvester, which
//! collects signal, interference and channel noise at efficiency `ζ`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelMatrix;
use crate::error::{ensure_finite, Result, SimError};

/// Condition numbers above this are treated as singular by the ZF receiver.
pub const MAX_CONDITION_NUMBER: f64 = 1e12;

/// Relative off-diagonal tolerance for calling a mode channel diagonal.
pub const DIAGONAL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    total_tx_power: f64,
    per_stream_power: Vec<f64>,
    channel_noise: f64,
    conversion_noise: f64,
    conversion_efficiency: f64,
    bandwidth: f64,
}

impl LinkBudget {
    pub fn new(
        total_tx_power: f64,
        per_stream_power: Vec<f64>,
        channel_noise: f64,
        conversion_noise: f64,
        conversion_efficiency: f64,
        bandwidth: f64,
    ) -> Result<Self> {
        for (name, v) in [
            ("total transmit power", total_tx_power),
            ("channel noise", channel_noise),
            ("conversion noise", conversion_noise),
            ("conversion efficiency", conversion_efficiency),
            ("bandwidth", bandwidth),
        ] {
            ensure_finite(name, v)?;
        }
        if total_tx_power <= 0.0 {
            return Err(SimError::invalid("total transmit power must be positive"));
        }
        if channel_noise <= 0.0 {
            return Err(SimError::invalid("channel noise must be positive"));
        }
        if conversion_noise < 0.0 {
            return Err(SimError::invalid("conversion noise must be non-negative"));
        }
        if !(conversion_efficiency > 0.0 && conversion_efficiency <= 1.0) {
            return Err(SimError::invalid("conversion efficiency must lie in (0, 1]"));
        }
        if bandwidth <= 0.0 {
            return Err(SimError::invalid("bandwidth must be positive"));
        }
        if per_stream_power.is_empty() {
            return Err(SimError::invalid("at least one stream is required"));
        }
        if per_stream_power.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(SimError::invalid("per-stream powers must be finite and non-negative"));
        }
        let sum: f64 = per_stream_power.iter().sum();
        if (sum - total_tx_power).abs() > 1e-12 * total_tx_power {
            return Err(SimError::invalid(format!(
                "per-stream powers sum to {sum}, expected {total_tx_power}"
            )));
        }
        Ok(Self {
            total_tx_power,
            per_stream_power,
            channel_noise,
            conversion_noise,
            conversion_efficiency,
            bandwidth,
        })
    }

    /// Splits `total_tx_power` equally over `streams`.
    pub fn equal_split(
        total_tx_power: f64,
        streams: usize,
        channel_noise: f64,
        conversion_noise: f64,
        conversion_efficiency: f64,
        bandwidth: f64,
    ) -> Result<Self> {
        if streams == 0 {
            return Err(SimError::invalid("at least one stream is required"));
        }
        let p = total_tx_power / streams as f64;
        Self::new(
            total_tx_power,
            vec![p; streams],
            channel_noise,
            conversion_noise,
            conversion_efficiency,
            bandwidth,
        )
    }

    pub fn total_tx_power(&self) -> f64 {
        self.total_tx_power
    }
    pub fn per_stream_power(&self) -> &[f64] {
        &self.per_stream_power
    }
    pub fn stream_count(&self) -> usize {
        self.per_stream_power.len()
    }
    pub fn channel_noise(&self) -> f64 {
        self.channel_noise
    }
    pub fn conversion_noise(&self) -> f64 {
        self.conversion_noise
    }
    pub fn conversion_efficiency(&self) -> f64 {
        self.conversion_efficiency
    }
    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    /// Same budget with conversion noise replaced.
    pub fn with_conversion_noise(&self, conversion_noise: f64) -> Result<Self> {
        Self::new(
            self.total_tx_power,
            self.per_stream_power.clone(),
            self.channel_noise,
            conversion_noise,
            self.conversion_efficiency,
            self.bandwidth,
        )
    }
}

/// Per-stream ID fractions `ρ_l ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SplitVector(Vec<f64>);

impl SplitVector {
    pub fn new(ratios: Vec<f64>) -> Result<Self> {
        if let Some(bad) = ratios.iter().find(|r| !(0.0..=1.0).contains(*r)) {
            return Err(SimError::invalid(format!("split ratio {bad} outside [0, 1]")));
        }
        Ok(Self(ratios))
    }

    pub fn uniform(len: usize, rho: f64) -> Result<Self> {
        Self::new(vec![rho; len])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<f64>> for SplitVector {
    type Error = SimError;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<SplitVector> for Vec<f64> {
    fn from(v: SplitVector) -> Self {
        v.0
    }
}

/// A (rate, harvested power) pair in bits/s/Hz and W/Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct REPoint {
    pub rate: f64,
    pub harvested: f64,
}

/// Transceiver architecture compared in the rate-energy analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransceiverKind {
    Oam,
    MimoSvd,
    MimoZf,
    Siso,
}

impl TransceiverKind {
    pub const ALL: [TransceiverKind; 4] =
        [TransceiverKind::Oam, TransceiverKind::MimoSvd, TransceiverKind::MimoZf, TransceiverKind::Siso];

    pub fn name(&self) -> &'static str {
        match self {
            TransceiverKind::Oam => "oam",
            TransceiverKind::MimoSvd => "mimo-svd",
            TransceiverKind::MimoZf => "mimo-zf",
            TransceiverKind::Siso => "siso",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

impl std::fmt::Display for TransceiverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One power-split receive stream.
///
/// `signal` and `interference` are received powers (W/Hz) before splitting;
/// `noise` is the channel noise σ², `conversion_noise` the ID-branch σ_cov².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpsStream {
    pub signal: f64,
    pub interference: f64,
    pub noise: f64,
    pub conversion_noise: f64,
    pub efficiency: f64,
}

impl DpsStream {
    fn from_budget(signal: f64, interference: f64, budget: &LinkBudget) -> Self {
        Self {
            signal,
            interference,
            noise: budget.channel_noise,
            conversion_noise: budget.conversion_noise,
            efficiency: budget.conversion_efficiency,
        }
    }

    /// `log2(1 + ρS / (ρ(I + σ²) + σ_cov²))`; zero when nothing reaches the decoder.
    #[inline]
    pub fn rate(&self, rho: f64) -> f64 {
        if rho == 0.0 || self.signal == 0.0 {
            return 0.0;
        }
        let sinr = rho * self.signal / (rho * (self.interference + self.noise) + self.conversion_noise);
        sinr.ln_1p() / std::f64::consts::LN_2
    }

    /// Total RF power entering the splitter.
    #[inline]
    pub fn received(&self) -> f64 {
        self.signal + self.interference + self.noise
    }

    #[inline]
    pub fn harvested(&self, rho: f64) -> f64 {
        self.efficiency * (1.0 - rho) * self.received()
    }

    /// `dR/dρ` (bits/s/Hz per unit ρ); concave in ρ so this is decreasing.
    pub fn rate_slope(&self, rho: f64) -> f64 {
        let b = self.interference + self.noise;
        let lo = rho * b + self.conversion_noise;
        if lo == 0.0 {
            return if self.signal > 0.0 { f64::INFINITY } else { 0.0 };
        }
        ((self.signal + b) / (lo + rho * self.signal) - b / lo) / std::f64::consts::LN_2
    }
}

/// Unitary DFT matrix with entries `exp(j2πml/N)/√N` (row m: element, column l: mode).
pub fn dft_matrix(n: usize) -> DMatrix<Complex64> {
    let scale = 1.0 / (n as f64).sqrt();
    DMatrix::from_fn(n, n, |m, l| {
        Complex64::from_polar(scale, 2.0 * PI * ((m * l) % n) as f64 / n as f64)
    })
}

/// Mode-domain channel `G = F_r^H · H · F_t` seen through DFT (de)multiplexing.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeChannel {
    effective_gains: DMatrix<Complex64>,
}

impl ModeChannel {
    pub fn from_channel(h: &ChannelMatrix) -> Result<Self> {
        if !h.is_square() {
            return Err(SimError::invalid(format!(
                "OAM transceivers need equal array sizes, got {}x{}",
                h.rx_count(),
                h.tx_count()
            )));
        }
        let f = dft_matrix(h.tx_count());
        let g = f.adjoint() * h.entries() * &f;
        Ok(Self { effective_gains: g })
    }

    pub fn effective_gains(&self) -> &DMatrix<Complex64> {
        &self.effective_gains
    }

    pub fn mode_count(&self) -> usize {
        self.effective_gains.nrows()
    }

    /// Largest off-diagonal magnitude relative to the largest diagonal one.
    pub fn off_diagonal_ratio(&self) -> f64 {
        let g = &self.effective_gains;
        let mut diag = 0.0f64;
        let mut off = 0.0f64;
        for r in 0..g.nrows() {
            for c in 0..g.ncols() {
                if r == c {
                    diag = diag.max(g[(r, c)].norm());
                } else {
                    off = off.max(g[(r, c)].norm());
                }
            }
        }
        if diag == 0.0 {
            f64::INFINITY
        } else {
            off / diag
        }
    }

    pub fn is_diagonal(&self) -> bool {
        self.off_diagonal_ratio() < DIAGONAL_TOLERANCE
    }

    /// Σ_l,k p_k |G_lk|².
    pub fn received_power(&self, per_stream_power: &[f64]) -> f64 {
        let g = &self.effective_gains;
        (0..g.nrows())
            .flat_map(|l| (0..g.ncols()).map(move |k| (l, k)))
            .map(|(l, k)| per_stream_power[k] * g[(l, k)].norm_sqr())
            .sum()
    }
}

/// Prepared rate-energy model: a fixed link whose only free variable is ρ.
pub trait RateEnergyModel: Sync {
    /// Length of the split vector this model accepts.
    fn dim(&self) -> usize;

    fn evaluate(&self, rho: &[f64]) -> REPoint;

    /// Independent per-stream terms, when the model separates over streams.
    fn separable_streams(&self) -> Option<&[DpsStream]>;

    fn evaluate_checked(&self, rho: &[f64]) -> Result<REPoint> {
        if rho.len() != self.dim() {
            return Err(SimError::invalid(format!(
                "split vector has {} entries, model expects {}",
                rho.len(),
                self.dim()
            )));
        }
        SplitVector::new(rho.to_vec())?;
        Ok(self.evaluate(rho))
    }
}

/// Sum of independent DPS streams, each with its own ρ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamModel {
    streams: Vec<DpsStream>,
    separable: bool,
}

impl StreamModel {
    /// `separable` asserts the streams do not couple through interference
    /// that depends on other streams' splits.
    pub fn new(streams: Vec<DpsStream>, separable: bool) -> Self {
        Self { streams, separable }
    }

    pub fn streams(&self) -> &[DpsStream] {
        &self.streams
    }
}

impl RateEnergyModel for StreamModel {
    fn dim(&self) -> usize {
        self.streams.len()
    }

    fn evaluate(&self, rho: &[f64]) -> REPoint {
        let mut rate = 0.0;
        let mut harvested = 0.0;
        for (s, &r) in self.streams.iter().zip(rho) {
            rate += s.rate(r);
            harvested += s.harvested(r);
        }
        REPoint { rate, harvested }
    }

    fn separable_streams(&self) -> Option<&[DpsStream]> {
        self.separable.then_some(self.streams.as_slice())
    }
}

fn check_streams(expected: usize, budget: &LinkBudget) -> Result<()> {
    if budget.stream_count() != expected {
        return Err(SimError::invalid(format!(
            "budget has {} streams, channel has {expected}",
            budget.stream_count()
        )));
    }
    Ok(())
}

/// OAM receiver: one stream per mode, inter-mode leakage treated as noise.
/// Separable only when `G` is diagonal.
pub fn oam_model(mode_channel: &ModeChannel, budget: &LinkBudget) -> Result<StreamModel> {
    let n = mode_channel.mode_count();
    check_streams(n, budget)?;
    let g = mode_channel.effective_gains();
    let p = budget.per_stream_power();
    let streams = (0..n)
        .map(|l| {
            let signal = p[l] * g[(l, l)].norm_sqr();
            let interference = (0..n).filter(|&k| k != l).map(|k| p[k] * g[(l, k)].norm_sqr()).sum();
            DpsStream::from_budget(signal, interference, budget)
        })
        .collect();
    Ok(StreamModel { streams, separable: mode_channel.is_diagonal() })
}

pub fn oam_rate_energy(mode_channel: &ModeChannel, budget: &LinkBudget, rho: &SplitVector) -> Result<REPoint> {
    oam_model(mode_channel, budget)?.evaluate_checked(rho.as_slice())
}

/// SISO link with the full budget on a single stream.
pub fn siso_model(h: Complex64, budget: &LinkBudget) -> StreamModel {
    let stream = DpsStream::from_budget(budget.total_tx_power() * h.norm_sqr(), 0.0, budget);
    StreamModel { streams: vec![stream], separable: true }
}

pub fn siso_rate_energy(h: Complex64, budget: &LinkBudget, rho: f64) -> Result<REPoint> {
    siso_model(h, budget).evaluate_checked(&[rho])
}

/// Eigenmode MIMO: SVD sub-channels, per-sub-channel split, budget powers
/// assigned to sub-channels in descending singular-value order.
pub fn mimo_svd_model(h: &ChannelMatrix, budget: &LinkBudget) -> Result<StreamModel> {
    let rank = h.rx_count().min(h.tx_count());
    check_streams(rank, budget)?;
    let streams = h
        .singular_values()
        .into_iter()
        .zip(budget.per_stream_power())
        .map(|(s, &p)| DpsStream::from_budget(p * s * s, 0.0, budget))
        .collect();
    Ok(StreamModel { streams, separable: true })
}

pub fn mimo_svd_rate_energy(h: &ChannelMatrix, budget: &LinkBudget, rho: &SplitVector) -> Result<REPoint> {
    mimo_svd_model(h, budget)?.evaluate_checked(rho.as_slice())
}

/// Open-loop per-antenna MIMO with a zero-forcing receiver and one common
/// RF split applied at every receive antenna.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroForcingModel {
    /// Post-ZF per-stream SNR numerators `p_k / β_k`.
    streams: Vec<DpsStream>,
    /// Σ_n (Σ_k p_k |H_nk|² + σ²), the RF power at all receive antennas.
    received_power: f64,
    efficiency: f64,
    condition_number: f64,
}

impl ZeroForcingModel {
    pub fn new(h: &ChannelMatrix, budget: &LinkBudget) -> Result<Self> {
        check_streams(h.tx_count(), budget)?;
        if h.rx_count() < h.tx_count() {
            return Err(SimError::invalid("zero-forcing needs at least as many receive as transmit antennas"));
        }
        let sv = h.singular_values();
        let smin = *sv.last().unwrap();
        let condition_number = if smin > 0.0 { sv[0] / smin } else { f64::INFINITY };
        if !condition_number.is_finite() || condition_number > MAX_CONDITION_NUMBER {
            return Err(SimError::IllConditioned { condition_number });
        }
        let gram = h.entries().adjoint() * h.entries();
        let inv = gram
            .try_inverse()
            .ok_or(SimError::IllConditioned { condition_number })?;
        let p = budget.per_stream_power();
        let streams = (0..h.tx_count())
            .map(|k| {
                let beta = inv[(k, k)].re;
                DpsStream::from_budget(p[k] / beta, 0.0, budget)
            })
            .collect();
        let e = h.entries();
        let received_power = (0..h.rx_count())
            .map(|n| (0..h.tx_count()).map(|k| p[k] * e[(n, k)].norm_sqr()).sum::<f64>() + budget.channel_noise())
            .sum();
        Ok(Self {
            streams,
            received_power,
            efficiency: budget.conversion_efficiency(),
            condition_number,
        })
    }

    pub fn condition_number(&self) -> f64 {
        self.condition_number
    }

    /// Noise amplification `β_k = [(H^H H)^{-1}]_kk` per stream.
    pub fn noise_amplification(&self, budget: &LinkBudget) -> Vec<f64> {
        self.streams
            .iter()
            .zip(budget.per_stream_power())
            .map(|(s, p)| p / s.signal)
            .collect()
    }
}

impl RateEnergyModel for ZeroForcingModel {
    fn dim(&self) -> usize {
        1
    }

    fn evaluate(&self, rho: &[f64]) -> REPoint {
        let r = rho[0];
        REPoint {
            rate: self.streams.iter().map(|s| s.rate(r)).sum(),
            harvested: self.efficiency * (1.0 - r) * self.received_power,
        }
    }

    fn separable_streams(&self) -> Option<&[DpsStream]> {
        None
    }
}

pub fn mimo_zf_rate_energy(h: &ChannelMatrix, budget: &LinkBudget, rho: f64) -> Result<REPoint> {
    ZeroForcingModel::new(h, budget)?.evaluate_checked(&[rho])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{build_channel, los_gain, Carrier};
    use crate::geometry::{element_positions, ArrayGeometry, Pose, Side};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const P: f64 = 10.0;
    const SIGMA2: f64 = 1e-5;

    fn budget(n: usize, cov_ratio: f64) -> LinkBudget {
        LinkBudget::equal_split(P, n, SIGMA2, cov_ratio * SIGMA2, 1.0, 1.0).unwrap()
    }

    fn channel(d: f64, dx: f64, tilt_deg: f64) -> ChannelMatrix {
        let geom = ArrayGeometry::new(8, 0.1).unwrap();
        let pose = Pose::new(d, dx, tilt_deg.to_radians()).unwrap();
        build_channel(
            &element_positions(&geom, &pose, Side::Transmit),
            &element_positions(&geom, &pose, Side::Receive),
            &Carrier::new(28e9).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn dft_is_unitary() {
        for n in [1, 2, 5, 8, 16] {
            let f = dft_matrix(n);
            let err = (f.adjoint() * &f - DMatrix::<Complex64>::identity(n, n)).norm();
            assert!(err < 1e-12, "n={n}: {err}");
        }
    }

    #[test]
    fn aligned_mode_channel_is_diagonal() {
        let g = ModeChannel::from_channel(&channel(5.0, 0.0, 0.0)).unwrap();
        assert!(g.off_diagonal_ratio() < 1e-9);
        assert!(!ModeChannel::from_channel(&channel(5.0, 1.0, 10.0)).unwrap().is_diagonal());
    }

    #[test]
    fn diagonal_matches_circulant_eigenvalues() {
        let h = channel(5.0, 0.0, 0.0);
        let g = ModeChannel::from_channel(&h).unwrap();
        let eig = crate::channel::circulant_mode_gains(&h).unwrap();
        for (l, e) in eig.iter().enumerate() {
            assert!((g.effective_gains()[(l, l)] - e).norm() < 1e-12 * eig[0].norm());
        }
    }

    #[test]
    fn unitary_power_conservation() {
        let b = budget(8, 0.05);
        for (dx, tilt) in [(0.0, 0.0), (1.0, 10.0), (0.3, 4.0)] {
            let h = channel(5.0, dx, tilt);
            let g = ModeChannel::from_channel(&h).unwrap();
            let antenna: f64 = b.per_stream_power()[0] * h.frobenius_power();
            assert_relative_eq!(g.received_power(b.per_stream_power()), antenna, max_relative = 1e-9);
        }
    }

    #[test]
    fn oam_corners() {
        let b = budget(8, 0.05);
        let g = ModeChannel::from_channel(&channel(5.0, 0.0, 0.0)).unwrap();
        let zero = oam_rate_energy(&g, &b, &SplitVector::uniform(8, 0.0).unwrap()).unwrap();
        assert_eq!(zero.rate, 0.0);
        let expected: f64 = g.received_power(b.per_stream_power()) + 8.0 * SIGMA2;
        assert_relative_eq!(zero.harvested, expected, max_relative = 1e-12);
        let one = oam_rate_energy(&g, &b, &SplitVector::uniform(8, 1.0).unwrap()).unwrap();
        assert_eq!(one.harvested, 0.0);
        assert!(one.rate > 0.0);
    }

    #[test]
    fn single_mode_scalar_oracle() {
        // p|h|² = σ², ρ = 1, σ_cov² = 0.05σ²  →  log2(1 + 1/1.05)
        let h = ChannelMatrix::from_entries(DMatrix::from_element(1, 1, Complex64::new(1e-3, 0.0)), 1.0).unwrap();
        let g = ModeChannel::from_channel(&h).unwrap();
        let b = LinkBudget::equal_split(SIGMA2 / 1e-6, 1, SIGMA2, 0.05 * SIGMA2, 1.0, 1.0).unwrap();
        let pt = oam_rate_energy(&g, &b, &SplitVector::uniform(1, 1.0).unwrap()).unwrap();
        assert_relative_eq!(pt.rate, (1.0 + 1.0 / 1.05f64).log2(), max_relative = 1e-12);
        assert!((pt.rate - 0.9652).abs() < 1e-4);
    }

    #[test]
    fn siso_cases() {
        let c = Carrier::new(28e9).unwrap();
        let h = los_gain(5.0, &c).unwrap();
        let b = budget(1, 0.05);
        let zero = siso_rate_energy(h, &b, 0.0).unwrap();
        assert_eq!(zero.rate, 0.0);
        assert_relative_eq!(zero.harvested, P * h.norm_sqr() + SIGMA2, max_relative = 1e-15);

        let clean = LinkBudget::equal_split(P, 1, SIGMA2, 0.0, 1.0, 1.0).unwrap();
        let pt = siso_rate_energy(h, &clean, 1.0).unwrap();
        assert_relative_eq!(pt.rate, (1.0 + P * h.norm_sqr() / SIGMA2).log2(), max_relative = 1e-12);

        let pt = siso_rate_energy(h, &b, 1.0).unwrap();
        let oracle = (1.0 + P * h.norm_sqr() / (1.05 * SIGMA2)).log2();
        assert_relative_eq!(pt.rate, oracle, max_relative = 1e-12);
        assert!((pt.rate - 0.0393).abs() < 5e-4);
        assert!(siso_rate_energy(h, &b, 1.5).is_err());
    }

    #[test]
    fn svd_matches_oam_when_aligned() {
        let h = channel(5.0, 0.0, 0.0);
        let b = budget(8, 0.05);
        let g = ModeChannel::from_channel(&h).unwrap();
        let oam = oam_model(&g, &b).unwrap();
        let svd = mimo_svd_model(&h, &b).unwrap();
        // map each mode to the sub-channel of equal gain
        let mut modes: Vec<usize> = (0..8).collect();
        modes.sort_by(|&a, &b| oam.streams()[b].signal.total_cmp(&oam.streams()[a].signal));
        let rho_modes = [0.9, 0.1, 0.4, 0.7, 0.3, 0.55, 0.05, 1.0];
        let mut rho_svd = [0.0; 8];
        for (rank, &m) in modes.iter().enumerate() {
            rho_svd[rank] = rho_modes[m];
        }
        let a = oam.evaluate(&rho_modes);
        let s = svd.evaluate(&rho_svd);
        assert_relative_eq!(a.rate, s.rate, max_relative = 1e-9);
        assert_relative_eq!(a.harvested, s.harvested, max_relative = 1e-9);
        assert_eq!(mimo_svd_rate_energy(&h, &b, &SplitVector::uniform(8, 1.0).unwrap()).unwrap().harvested, 0.0);
    }

    #[test]
    fn svd_rank_one_has_one_active_subchannel() {
        let u = DMatrix::from_fn(4, 1, |i, _| Complex64::new(1.0 + i as f64, 0.5));
        let v = DMatrix::from_fn(1, 4, |_, j| Complex64::new(0.3, -(j as f64)));
        let h = ChannelMatrix::from_entries(u * v * Complex64::new(1e-3, 0.0), 1.0).unwrap();
        let b = budget(4, 0.05);
        let m = mimo_svd_model(&h, &b).unwrap();
        let active = m.streams().iter().filter(|s| s.rate(1.0) > 1e-12).count();
        assert_eq!(active, 1);
    }

    #[test]
    fn zf_identity_is_parallel_awgn() {
        let c = 2e-3;
        let h = ChannelMatrix::from_entries(DMatrix::identity(4, 4) * Complex64::new(c, 0.0), 1.0).unwrap();
        let b = budget(4, 0.05);
        let zf = ZeroForcingModel::new(&h, &b).unwrap();
        for beta in zf.noise_amplification(&b) {
            assert_relative_eq!(beta, 1.0 / (c * c), max_relative = 1e-12);
        }
        let pt = zf.evaluate(&[1.0]);
        let per = (1.0 + (P / 4.0) * c * c / (1.05 * SIGMA2)).log2();
        assert_relative_eq!(pt.rate, 4.0 * per, max_relative = 1e-12);
        let zero = zf.evaluate(&[0.0]);
        assert_eq!(zero.rate, 0.0);
        assert_relative_eq!(zero.harvested, 4.0 * ((P / 4.0) * c * c + SIGMA2), max_relative = 1e-12);
    }

    #[test]
    fn zf_rejects_singular_channel() {
        let h = ChannelMatrix::from_entries(DMatrix::from_element(3, 3, Complex64::new(1.0, 0.0)), 1.0).unwrap();
        match ZeroForcingModel::new(&h, &budget(3, 0.05)) {
            Err(SimError::IllConditioned { condition_number }) => assert!(condition_number > 1e12),
            other => panic!("expected ill-conditioned error, got {other:?}"),
        }
    }

    #[test]
    fn zf_is_below_oam_when_aligned() {
        let h = channel(5.0, 0.0, 0.0);
        let b = budget(8, 0.05);
        let oam = oam_model(&ModeChannel::from_channel(&h).unwrap(), &b).unwrap();
        let zf = ZeroForcingModel::new(&h, &b).unwrap();
        for rho in [0.1, 0.5, 0.9, 1.0] {
            let a = oam.evaluate(&[rho; 8]);
            let z = zf.evaluate(&[rho]);
            assert_relative_eq!(a.harvested, z.harvested, max_relative = 1e-9);
            assert!(z.rate < a.rate);
        }
    }

    #[test]
    fn dimension_mismatch_is_invalid_input() {
        let g = ModeChannel::from_channel(&channel(5.0, 0.0, 0.0)).unwrap();
        let b = budget(4, 0.05);
        assert!(matches!(
            oam_rate_energy(&g, &b, &SplitVector::uniform(8, 0.5).unwrap()),
            Err(SimError::InvalidInput(_))
        ));
        let b = budget(8, 0.05);
        assert!(oam_rate_energy(&g, &b, &SplitVector::uniform(7, 0.5).unwrap()).is_err());
    }

    #[test]
    fn budget_validation() {
        assert!(LinkBudget::new(10.0, vec![5.0, 4.0], 1e-5, 0.0, 1.0, 1.0).is_err());
        assert!(LinkBudget::new(10.0, vec![5.0, 5.0], 0.0, 0.0, 1.0, 1.0).is_err());
        assert!(LinkBudget::new(10.0, vec![5.0, 5.0], 1e-5, -1.0, 1.0, 1.0).is_err());
        assert!(LinkBudget::new(10.0, vec![5.0, 5.0], 1e-5, 0.0, 1.5, 1.0).is_err());
        assert!(LinkBudget::new(10.0, vec![5.0, 5.0], 1e-5, 0.0, 1.0, 0.0).is_err());
        assert!(LinkBudget::new(10.0, vec![5.0, 5.0], 1e-5, 0.0, 1.0, 1.0).is_ok());
        assert!(SplitVector::new(vec![0.2, -0.1]).is_err());
        assert!(SplitVector::new(vec![0.2, f64::NAN]).is_err());
    }

    #[test]
    fn degradation_with_conversion_noise_and_distance() {
        let rho = [0.7; 8];
        let mut last = f64::INFINITY;
        for ratio in [0.0, 0.05, 0.5, 5.0] {
            let g = ModeChannel::from_channel(&channel(5.0, 0.0, 0.0)).unwrap();
            let r = oam_model(&g, &budget(8, ratio)).unwrap().evaluate(&rho).rate;
            assert!(r <= last);
            last = r;
        }
        let mut last = f64::INFINITY;
        for d in [2.0, 5.0, 10.0, 15.0, 30.0] {
            let g = ModeChannel::from_channel(&channel(d, 0.0, 0.0)).unwrap();
            let r = oam_model(&g, &budget(8, 0.05)).unwrap().evaluate(&rho).rate;
            assert!(r <= last, "d={d}");
            last = r;
        }
    }

    proptest! {
        #[test]
        fn registration_invariance(offset in 0usize..8, rho in proptest::collection::vec(0.0f64..=1.0, 8), dx in 0.0f64..1.5, tilt in 0.0f64..12.0) {
            let h = channel(5.0, dx, tilt);
            let e = h.entries();
            let rotated = DMatrix::from_fn(8, 8, |r, c| e[((r + offset) % 8, c)]);
            let h2 = ChannelMatrix::from_entries(rotated, h.wavelength()).unwrap();
            let b = budget(8, 0.05);
            let a = oam_model(&ModeChannel::from_channel(&h).unwrap(), &b).unwrap().evaluate(&rho);
            let c = oam_model(&ModeChannel::from_channel(&h2).unwrap(), &b).unwrap().evaluate(&rho);
            prop_assert!((a.rate - c.rate).abs() <= 1e-9 * a.rate.max(1e-300));
            prop_assert!((a.harvested - c.harvested).abs() <= 1e-9 * a.harvested);
        }

        #[test]
        fn monotone_in_each_split(rho in proptest::collection::vec(0.0f64..=1.0, 8), idx in 0usize..8, bump in 0.0f64..=1.0, dx in 0.0f64..1.0) {
            let h = channel(5.0, dx, 0.0);
            let m = oam_model(&ModeChannel::from_channel(&h).unwrap(), &budget(8, 0.05)).unwrap();
            let mut hi = rho.clone();
            hi[idx] = (rho[idx] + bump).min(1.0);
            let a = m.evaluate(&rho);
            let b = m.evaluate(&hi);
            prop_assert!(b.rate >= a.rate);
            prop_assert!(b.harvested <= a.harvested);
        }

        #[test]
        fn zero_split_conserves_energy(dx in 0.0f64..2.0, tilt in 0.0f64..20.0, d in 1.0f64..20.0) {
            let h = channel(d, dx, tilt);
            let b = budget(8, 0.05);
            let pt = oam_model(&ModeChannel::from_channel(&h).unwrap(), &b).unwrap().evaluate(&[0.0; 8]);
            let antenna = b.per_stream_power()[0] * h.frobenius_power() + 8.0 * SIGMA2;
            prop_assert!((pt.harvested - antenna).abs() <= 1e-9 * antenna);
            prop_assert_eq!(pt.rate, 0.0);
        }
    }
}
