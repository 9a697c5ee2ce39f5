//! Named experiments: rate-energy sweeps over conversion noise (`fig2`),
//! distance (`fig3`) and misalignment (`fig5`), beam maps (`field`), and a
//! single configured link (`custom`).

use std::path::PathBuf;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{build_channel, los_gain, Carrier, ChannelMatrix};
use crate::config::{Misalignment, Scenario, ScenarioConfig};
use crate::error::Result;
use crate::field::{compute_field, on_axis_relative_intensity, FieldMap};
use crate::geometry::{element_positions, siso_positions, ArrayGeometry, Pose, Side};
use crate::region::{trace_lagrangian_default, trace_monte_carlo, MonteCarloConfig, RERegion, RegionMethod};
use crate::swipt::{
    mimo_svd_model, oam_model, siso_model, LinkBudget, ModeChannel, RateEnergyModel, TransceiverKind,
    ZeroForcingModel,
};
use crate::units::dbm_to_watts;

/// Physical parameters that vary between sweep points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkSetup {
    pub distance_m: f64,
    pub lateral_offset_m: f64,
    pub tilt_deg: f64,
    pub conversion_noise_ratio: f64,
}

impl LinkSetup {
    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        Self {
            distance_m: cfg.distance_m,
            lateral_offset_m: cfg.lateral_offset_m,
            tilt_deg: cfg.tilt_deg,
            conversion_noise_ratio: cfg.conversion_noise_ratio,
        }
    }
}

/// A fully built UCA link together with its SISO counterpart.
#[derive(Debug, Clone)]
pub struct Link {
    pub geometry: ArrayGeometry,
    pub carrier: Carrier,
    pub pose: Pose,
    pub budget: LinkBudget,
    pub siso_budget: LinkBudget,
    pub channel: ChannelMatrix,
    pub mode_channel: ModeChannel,
    pub siso_gain: Complex64,
}

impl Link {
    pub fn new(cfg: &ScenarioConfig, setup: &LinkSetup) -> Result<Self> {
        let geometry = ArrayGeometry::new(cfg.elements, cfg.radius_m)?;
        let carrier = Carrier::new(cfg.frequency_hz)?;
        let pose = Pose::new(setup.distance_m, setup.lateral_offset_m, setup.tilt_deg.to_radians())?;
        let channel = build_channel(
            &element_positions(&geometry, &pose, Side::Transmit),
            &element_positions(&geometry, &pose, Side::Receive),
            &carrier,
        )?;
        let mode_channel = ModeChannel::from_channel(&channel)?;
        let power = dbm_to_watts(cfg.tx_power_dbm_per_hz);
        let noise = dbm_to_watts(cfg.noise_dbm_per_hz);
        let conversion = setup.conversion_noise_ratio * noise;
        let budget = LinkBudget::equal_split(
            power,
            cfg.elements,
            noise,
            conversion,
            cfg.conversion_efficiency,
            cfg.bandwidth_hz,
        )?;
        let siso_budget =
            LinkBudget::equal_split(power, 1, noise, conversion, cfg.conversion_efficiency, cfg.bandwidth_hz)?;
        let (tx, rx) = siso_positions(&pose);
        let siso_gain = los_gain((rx - tx).norm(), &carrier)?;
        Ok(Self { geometry, carrier, pose, budget, siso_budget, channel, mode_channel, siso_gain })
    }

    pub fn model(&self, kind: TransceiverKind) -> Result<Box<dyn RateEnergyModel>> {
        Ok(match kind {
            TransceiverKind::Oam => Box::new(oam_model(&self.mode_channel, &self.budget)?),
            TransceiverKind::MimoSvd => Box::new(mimo_svd_model(&self.channel, &self.budget)?),
            TransceiverKind::MimoZf => Box::new(ZeroForcingModel::new(&self.channel, &self.budget)?),
            TransceiverKind::Siso => Box::new(siso_model(self.siso_gain, &self.siso_budget)),
        })
    }
}

/// One traced region plus the sweep coordinate it belongs to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveResult {
    pub baseline: TransceiverKind,
    pub method: RegionMethod,
    pub param_name: String,
    pub param_value: String,
    pub setup: LinkSetup,
    pub region: RERegion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldResult {
    pub mode: usize,
    /// `min(l, N − l)`.
    pub mode_order: usize,
    pub ring_radius_m: f64,
    /// Relative intensity integrated over the aperture disc (m²).
    pub captured_power_rel_m2: f64,
    pub on_axis_intensity_rel: f64,
    pub map: FieldMap,
}

/// Everything a run produces, including the resolved config needed to repeat it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultBundle {
    pub scenario: Scenario,
    pub seed: u64,
    pub config: ScenarioConfig,
    pub curves: Vec<CurveResult>,
    pub fields: Vec<FieldResult>,
}

impl ResultBundle {
    /// Curves for one baseline and method, in sweep order.
    pub fn curves_for(&self, baseline: TransceiverKind, method: RegionMethod) -> Vec<&CurveResult> {
        self.curves.iter().filter(|c| c.baseline == baseline && c.method == method).collect()
    }
}

#[derive(Debug)]
pub struct RunOutput {
    pub bundle: ResultBundle,
    pub files: Vec<PathBuf>,
}

struct SweepPoint {
    param_name: &'static str,
    param_value: String,
    setup: LinkSetup,
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn sweep_points(cfg: &ScenarioConfig) -> Vec<SweepPoint> {
    let base = LinkSetup::from_config(cfg);
    match cfg.scenario {
        Scenario::Fig2 => sorted(&cfg.conversion_noise_ratios)
            .into_iter()
            .map(|r| SweepPoint {
                param_name: "conversion_noise_ratio",
                param_value: r.to_string(),
                setup: LinkSetup { conversion_noise_ratio: r, ..base },
            })
            .collect(),
        Scenario::Fig3 => sorted(&cfg.distances_m)
            .into_iter()
            .map(|d| SweepPoint {
                param_name: "distance_m",
                param_value: d.to_string(),
                setup: LinkSetup { distance_m: d, ..base },
            })
            .collect(),
        Scenario::Fig5 => cfg
            .misalignments
            .iter()
            .map(|&Misalignment { lateral_offset_m, tilt_deg }| SweepPoint {
                param_name: "lateral_offset_m:tilt_deg",
                param_value: format!("{lateral_offset_m}:{tilt_deg}"),
                setup: LinkSetup { lateral_offset_m, tilt_deg, ..base },
            })
            .collect(),
        Scenario::Custom => vec![SweepPoint {
            param_name: "distance_m",
            param_value: base.distance_m.to_string(),
            setup: base,
        }],
        Scenario::Field => Vec::new(),
    }
}

fn trace_point(cfg: &ScenarioConfig, point: &SweepPoint) -> Result<Vec<CurveResult>> {
    let link = Link::new(cfg, &point.setup)?;
    let mc = MonteCarloConfig {
        samples: cfg.samples,
        seed: cfg.seed,
        grid_size: cfg.grid_size,
        parallel: cfg.parallel,
    };
    let mut out = Vec::new();
    let mut push = |baseline, region: RERegion| {
        out.push(CurveResult {
            baseline,
            method: region.method,
            param_name: point.param_name.to_string(),
            param_value: point.param_value.clone(),
            setup: point.setup,
            region,
        })
    };
    for &kind in &cfg.baselines {
        let model = link.model(kind)?;
        push(kind, trace_monte_carlo(model.as_ref(), &mc)?);
        if kind == TransceiverKind::Oam && cfg.lagrangian && model.separable_streams().is_some() {
            push(kind, trace_lagrangian_default(model.as_ref(), cfg.grid_size)?);
        }
    }
    Ok(out)
}

fn trace_fields(cfg: &ScenarioConfig) -> Result<Vec<FieldResult>> {
    let geometry = ArrayGeometry::new(cfg.elements, cfg.radius_m)?;
    let carrier = Carrier::new(cfg.frequency_hz)?;
    let mut modes = cfg.field_modes.clone();
    modes.sort_unstable();
    modes.dedup();
    modes
        .par_iter()
        .map(|&mode| {
            let map = compute_field(&geometry, &carrier, mode, cfg.field_z_m, cfg.field_extent_m, cfg.field_resolution)?;
            Ok(FieldResult {
                mode,
                mode_order: mode.min(cfg.elements - mode),
                ring_radius_m: map.ring_radius(),
                captured_power_rel_m2: map.captured_power(cfg.aperture_radius_m),
                on_axis_intensity_rel: on_axis_relative_intensity(&geometry, &carrier, mode, cfg.field_z_m),
                map,
            })
        })
        .collect()
}

/// Runs the scenario without writing any files.
pub fn compute_bundle(cfg: &ScenarioConfig) -> Result<ResultBundle> {
    cfg.validate()?;
    let points = sweep_points(cfg);
    let curves: Vec<Vec<CurveResult>> = points.par_iter().map(|p| trace_point(cfg, p)).collect::<Result<_>>()?;
    let fields = if cfg.scenario == Scenario::Field { trace_fields(cfg)? } else { Vec::new() };
    Ok(ResultBundle {
        scenario: cfg.scenario,
        seed: cfg.seed,
        config: cfg.clone(),
        curves: curves.into_iter().flatten().collect(),
        fields,
    })
}

/// Runs the scenario and writes every configured output format.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunOutput> {
    let bundle = compute_bundle(cfg)?;
    let files = crate::output::emit_bundle(&bundle, &cfg.out_dir, &cfg.formats)?;
    Ok(RunOutput { bundle, files })
}
