//! C ABI over the `oam-swipt` simulator.
//!
//! Every function returns an [`OsStatus`]; on failure the message is kept per
//! thread and can be read with [`os_last_error_message`]. Handles are opaque
//! and must be released with their matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use oam_swipt::config::{Scenario, ScenarioConfig};
use oam_swipt::field::{compute_field, FieldMap};
use oam_swipt::region::{trace_lagrangian_default, trace_monte_carlo, MonteCarloConfig, RERegion};
use oam_swipt::scenario::{Link, LinkSetup};
use oam_swipt::swipt::TransceiverKind;
use oam_swipt::SimError;

/// Status code returned by every exported function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    DegenerateGeometry = 3,
    StructureViolation = 4,
    IllConditioned = 5,
    UnsupportedModel = 6,
    Config = 7,
    Io = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

/// Transceiver architecture selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OsBaseline {
    Oam = 0,
    MimoSvd = 1,
    MimoZf = 2,
    Siso = 3,
}

impl From<OsBaseline> for TransceiverKind {
    fn from(b: OsBaseline) -> Self {
        match b {
            OsBaseline::Oam => TransceiverKind::Oam,
            OsBaseline::MimoSvd => TransceiverKind::MimoSvd,
            OsBaseline::MimoZf => TransceiverKind::MimoZf,
            OsBaseline::Siso => TransceiverKind::Siso,
        }
    }
}

/// Link parameters. Powers are per-Hz densities in dBm/Hz.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct OsLinkParams {
    pub elements: usize,
    pub radius_m: f64,
    pub distance_m: f64,
    pub frequency_hz: f64,
    pub tx_power_dbm_per_hz: f64,
    pub noise_dbm_per_hz: f64,
    /// σ_cov² / σ².
    pub conversion_noise_ratio: f64,
    pub conversion_efficiency: f64,
    pub bandwidth_hz: f64,
    pub lateral_offset_m: f64,
    pub tilt_deg: f64,
}

/// One rate-energy pair.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OsPoint {
    /// bits/s/Hz
    pub rate: f64,
    /// W/Hz
    pub harvested: f64,
}

/// Opaque link handle.
pub struct OsLink {
    link: Link,
}

/// Opaque rate-energy region handle.
pub struct OsRegion {
    region: RERegion,
}

/// Opaque field-map handle.
pub struct OsField {
    map: FieldMap,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &SimError) -> OsStatus {
    match err {
        SimError::InvalidInput(_) => OsStatus::InvalidInput,
        SimError::DegenerateGeometry { .. } => OsStatus::DegenerateGeometry,
        SimError::StructureViolation(_) => OsStatus::StructureViolation,
        SimError::IllConditioned { .. } => OsStatus::IllConditioned,
        SimError::UnsupportedModel(_) => OsStatus::UnsupportedModel,
        SimError::Config { .. } => OsStatus::Config,
        SimError::Io { .. } => OsStatus::Io,
    }
}

enum Failure {
    Sim(SimError),
    Null(&'static str),
    Buffer { needed: usize, given: usize },
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        Failure::Sim(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> OsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => OsStatus::Ok,
        Ok(Err(Failure::Sim(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Null(name))) => {
            set_error(format!("null pointer: {name}"));
            OsStatus::NullPointer
        }
        Ok(Err(Failure::Buffer { needed, given })) => {
            set_error(format!("buffer too small: need {needed}, got {given}"));
            OsStatus::BufferTooSmall
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            OsStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(name))
}

unsafe fn out<'a, T>(p: *mut T, name: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(name))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, name: &'static str) -> Result<&'a [T], Failure> {
    if len == 0 {
        Ok(&[])
    } else if p.is_null() {
        Err(Failure::Null(name))
    } else {
        Ok(std::slice::from_raw_parts(p, len))
    }
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, needed: usize, name: &'static str) -> Result<&'a mut [T], Failure> {
    if len < needed {
        return Err(Failure::Buffer { needed, given: len });
    }
    if needed == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    Ok(std::slice::from_raw_parts_mut(p, needed))
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn os_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Fills `out` with the library defaults (8 elements, 0.1 m, 5 m, 28 GHz, ...).
///
/// # Safety
/// `out` must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn os_link_params_default(out: *mut OsLinkParams) -> OsStatus {
    guard(|| {
        let out = out_ptr(out)?;
        let cfg = ScenarioConfig::new(Scenario::Custom);
        *out = OsLinkParams {
            elements: cfg.elements,
            radius_m: cfg.radius_m,
            distance_m: cfg.distance_m,
            frequency_hz: cfg.frequency_hz,
            tx_power_dbm_per_hz: cfg.tx_power_dbm_per_hz,
            noise_dbm_per_hz: cfg.noise_dbm_per_hz,
            conversion_noise_ratio: cfg.conversion_noise_ratio,
            conversion_efficiency: cfg.conversion_efficiency,
            bandwidth_hz: cfg.bandwidth_hz,
            lateral_offset_m: cfg.lateral_offset_m,
            tilt_deg: cfg.tilt_deg,
        };
        Ok(())
    })
}

unsafe fn out_ptr<'a, T>(p: *mut T) -> Result<&'a mut T, Failure> {
    out(p, "out")
}

/// Builds a link. On success `*out` owns a handle for [`os_link_free`].
///
/// # Safety
/// `params` must be NULL or point to a valid struct; `out` must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn os_link_new(params: *const OsLinkParams, out: *mut *mut OsLink) -> OsStatus {
    guard(|| {
        let p = deref(params, "params")?;
        let out = out_ptr(out)?;
        let mut cfg = ScenarioConfig::new(Scenario::Custom);
        cfg.elements = p.elements;
        cfg.radius_m = p.radius_m;
        cfg.distance_m = p.distance_m;
        cfg.frequency_hz = p.frequency_hz;
        cfg.tx_power_dbm_per_hz = p.tx_power_dbm_per_hz;
        cfg.noise_dbm_per_hz = p.noise_dbm_per_hz;
        cfg.conversion_noise_ratio = p.conversion_noise_ratio;
        cfg.conversion_efficiency = p.conversion_efficiency;
        cfg.bandwidth_hz = p.bandwidth_hz;
        cfg.lateral_offset_m = p.lateral_offset_m;
        cfg.tilt_deg = p.tilt_deg;
        cfg.validate()?;
        let link = Link::new(&cfg, &LinkSetup::from_config(&cfg))?;
        *out = Box::into_raw(Box::new(OsLink { link }));
        Ok(())
    })
}

/// Releases a link. NULL is a no-op.
///
/// # Safety
/// `link` must be NULL or a handle from [`os_link_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn os_link_free(link: *mut OsLink) {
    if !link.is_null() {
        drop(Box::from_raw(link));
    }
}

/// Number of transmit elements (and OAM modes).
///
/// # Safety
/// `link` must be NULL or a live handle; `out` must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn os_link_mode_count(link: *const OsLink, out: *mut usize) -> OsStatus {
    guard(|| {
        *out_ptr(out)? = deref(link, "link")?.link.mode_channel.mode_count();
        Ok(())
    })
}

/// Writes the power gains |G[l,l]|² of the mode channel into `gains[0..N]`.
///
/// # Safety
/// `gains` must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn os_link_mode_gains(link: *const OsLink, gains: *mut f64, len: usize) -> OsStatus {
    guard(|| {
        let g = deref(link, "link")?.link.mode_channel.effective_gains();
        let n = g.nrows();
        let dst = slice_mut(gains, len, n, "gains")?;
        for (l, d) in dst.iter_mut().enumerate() {
            *d = g[(l, l)].norm_sqr();
        }
        Ok(())
    })
}

/// Evaluates one split vector. `len` must match the model dimension
/// (N for OAM and MIMO-SVD, 1 for MIMO-ZF and SISO).
///
/// # Safety
/// `rho` must be valid for `len` reads; `out` must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn os_link_evaluate(
    link: *const OsLink,
    baseline: OsBaseline,
    rho: *const f64,
    len: usize,
    out: *mut OsPoint,
) -> OsStatus {
    guard(|| {
        let link = deref(link, "link")?;
        let rho = slice(rho, len, "rho")?;
        let out = out_ptr(out)?;
        let model = link.link.model(baseline.into())?;
        let p = model.evaluate_checked(rho)?;
        *out = OsPoint { rate: p.rate, harvested: p.harvested };
        Ok(())
    })
}

/// Monte Carlo region trace. Results are identical for `parallel` 0 and 1.
///
/// # Safety
/// `link` must be NULL or a live handle; `out` must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn os_link_trace_monte_carlo(
    link: *const OsLink,
    baseline: OsBaseline,
    samples: usize,
    seed: u64,
    grid_size: usize,
    parallel: bool,
    out: *mut *mut OsRegion,
) -> OsStatus {
    guard(|| {
        let link = deref(link, "link")?;
        let out = out_ptr(out)?;
        let model = link.link.model(baseline.into())?;
        let cfg = MonteCarloConfig { samples, seed, grid_size, parallel };
        let region = trace_monte_carlo(model.as_ref(), &cfg)?;
        *out = Box::into_raw(Box::new(OsRegion { region }));
        Ok(())
    })
}

/// Lagrangian upper-envelope trace; fails with `UnsupportedModel` when the
/// streams interfere.
///
/// # Safety
/// `link` must be NULL or a live handle; `out` must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn os_link_trace_lagrangian(
    link: *const OsLink,
    baseline: OsBaseline,
    grid_size: usize,
    out: *mut *mut OsRegion,
) -> OsStatus {
    guard(|| {
        let link = deref(link, "link")?;
        let out = out_ptr(out)?;
        let model = link.link.model(baseline.into())?;
        let region = trace_lagrangian_default(model.as_ref(), grid_size)?;
        *out = Box::into_raw(Box::new(OsRegion { region }));
        Ok(())
    })
}

/// Number of points on the region's energy grid.
///
/// # Safety
/// `region` must be NULL or a live handle; `out` must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn os_region_len(region: *const OsRegion, out: *mut usize) -> OsStatus {
    guard(|| {
        *out_ptr(out)? = deref(region, "region")?.region.energy_grid.len();
        Ok(())
    })
}

/// Grid point `index`: harvested threshold and best rate.
///
/// # Safety
/// `region` must be NULL or a live handle; `out` must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn os_region_point(region: *const OsRegion, index: usize, out: *mut OsPoint) -> OsStatus {
    guard(|| {
        let r = &deref(region, "region")?.region;
        let out = out_ptr(out)?;
        if index >= r.energy_grid.len() {
            return Err(SimError::InvalidInput(format!("index {index} out of range {}", r.energy_grid.len())).into());
        }
        *out = OsPoint { rate: r.max_rate[index], harvested: r.energy_grid[index] };
        Ok(())
    })
}

/// Best rate meeting an arbitrary harvested-power threshold (0 past Q_max).
///
/// # Safety
/// `region` must be NULL or a live handle; `out` must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn os_region_rate_at(region: *const OsRegion, threshold: f64, out: *mut f64) -> OsStatus {
    guard(|| {
        *out_ptr(out)? = deref(region, "region")?.region.rate_at(threshold);
        Ok(())
    })
}

/// Largest harvestable power of the region.
///
/// # Safety
/// `region` must be NULL or a live handle; `out` must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn os_region_q_max(region: *const OsRegion, out: *mut f64) -> OsStatus {
    guard(|| {
        *out_ptr(out)? = deref(region, "region")?.region.q_max();
        Ok(())
    })
}

/// Releases a region. NULL is a no-op.
///
/// # Safety
/// `region` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn os_region_free(region: *mut OsRegion) {
    if !region.is_null() {
        drop(Box::from_raw(region));
    }
}

/// Intensity map of mode `mode` on the plane at `z`, spanning
/// `[-extent, extent]²` with `resolution²` samples, using the link's array
/// and carrier.
///
/// # Safety
/// `link` must be NULL or a live handle; `out` must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn os_field_compute(
    link: *const OsLink,
    mode: usize,
    z: f64,
    extent: f64,
    resolution: usize,
    out: *mut *mut OsField,
) -> OsStatus {
    guard(|| {
        let l = &deref(link, "link")?.link;
        let out = out_ptr(out)?;
        let map = compute_field(&l.geometry, &l.carrier, mode, z, extent, resolution)?;
        *out = Box::into_raw(Box::new(OsField { map }));
        Ok(())
    })
}

/// Copies the row-major (y outer, x inner) relative intensities into `buf`,
/// which must hold `resolution²` values.
///
/// # Safety
/// `buf` must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn os_field_intensity(field: *const OsField, buf: *mut f64, len: usize) -> OsStatus {
    guard(|| {
        let m = &deref(field, "field")?.map;
        slice_mut(buf, len, m.intensity.len(), "buf")?.copy_from_slice(&m.intensity);
        Ok(())
    })
}

/// Radius (m) of the brightest ring.
///
/// # Safety
/// `field` must be NULL or a live handle; `out` must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn os_field_ring_radius(field: *const OsField, out: *mut f64) -> OsStatus {
    guard(|| {
        *out_ptr(out)? = deref(field, "field")?.map.ring_radius();
        Ok(())
    })
}

/// Relative intensity integrated over a centred disc of `aperture_radius` (m²).
///
/// # Safety
/// `field` must be NULL or a live handle; `out` must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn os_field_captured_power(field: *const OsField, aperture_radius: f64, out: *mut f64) -> OsStatus {
    guard(|| {
        *out_ptr(out)? = deref(field, "field")?.map.captured_power(aperture_radius);
        Ok(())
    })
}

/// Releases a field map. NULL is a no-op.
///
/// # Safety
/// `field` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn os_field_free(field: *mut OsField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}
