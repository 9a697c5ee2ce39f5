//! Result files: CSV tables, a JSON bundle, and SVG plots.
//!
//! Every file is written to a temporary sibling and renamed into place.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::config::OutputFormat;
use crate::error::{Result, SimError};
use crate::region::RegionMethod;
use crate::scenario::{CurveResult, FieldResult, ResultBundle};
use crate::swipt::TransceiverKind;

pub const REGION_CSV_HEADER: [&str; 6] =
    ["baseline", "method", "param_name", "param_value", "energy_w_per_hz", "max_rate_bps_per_hz"];

/// Writes `bytes` to `path` atomically.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| SimError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| SimError::io(path, e))?;
    tmp.persist(path).map_err(|e| SimError::io(path, e.error))?;
    Ok(())
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let to_err = |e: csv::Error| SimError::invalid(format!("csv encoding failed: {e}"));
    w.write_record(header).map_err(to_err)?;
    for row in rows {
        w.write_record(&row).map_err(to_err)?;
    }
    w.into_inner().map_err(|e| SimError::invalid(format!("csv encoding failed: {e}")))
}

pub fn regions_csv(curves: &[CurveResult]) -> Result<Vec<u8>> {
    let rows = curves.iter().flat_map(|c| {
        c.region.energy_grid.iter().zip(&c.region.max_rate).map(move |(q, r)| {
            vec![
                c.baseline.name().to_string(),
                c.method.name().to_string(),
                c.param_name.clone(),
                c.param_value.clone(),
                q.to_string(),
                r.to_string(),
            ]
        })
    });
    csv_bytes(&REGION_CSV_HEADER, rows)
}

pub fn field_maps_csv(fields: &[FieldResult]) -> Result<Vec<u8>> {
    let rows = fields.iter().flat_map(|f| {
        let m = &f.map;
        (0..m.resolution).flat_map(move |iy| {
            (0..m.resolution).map(move |ix| {
                vec![
                    f.mode.to_string(),
                    m.coordinate(ix).to_string(),
                    m.coordinate(iy).to_string(),
                    m.at(ix, iy).to_string(),
                ]
            })
        })
    });
    csv_bytes(&["mode", "x_m", "y_m", "intensity_rel"], rows)
}

pub fn field_summary_csv(fields: &[FieldResult]) -> Result<Vec<u8>> {
    let rows = fields.iter().map(|f| {
        vec![
            f.mode.to_string(),
            f.mode_order.to_string(),
            f.ring_radius_m.to_string(),
            f.captured_power_rel_m2.to_string(),
            f.on_axis_intensity_rel.to_string(),
        ]
    });
    csv_bytes(
        &["mode", "mode_order", "ring_radius_m", "captured_power_rel_m2", "on_axis_intensity_rel"],
        rows,
    )
}

pub fn bundle_json(bundle: &ResultBundle) -> Result<Vec<u8>> {
    let mut bytes =
        serde_json::to_vec_pretty(bundle).map_err(|e| SimError::invalid(format!("json encoding failed: {e}")))?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn read_bundle_json(path: &Path) -> Result<ResultBundle> {
    let bytes = std::fs::read(path).map_err(|e| SimError::io(path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| SimError::invalid(format!("{}: {e}", path.display())))
}

/// Writes one output format for the bundle to `path`.
pub fn emit_results(bundle: &ResultBundle, format: OutputFormat, path: &Path) -> Result<()> {
    let bytes = match format {
        OutputFormat::Csv if bundle.fields.is_empty() => regions_csv(&bundle.curves)?,
        OutputFormat::Csv => field_maps_csv(&bundle.fields)?,
        OutputFormat::Json => bundle_json(bundle)?,
        OutputFormat::Svg if bundle.fields.is_empty() => regions_svg(bundle).into_bytes(),
        OutputFormat::Svg => fields_svg(&bundle.fields).into_bytes(),
    };
    write_atomic(path, &bytes)
}

/// Writes `<scenario>.<ext>` for each format into `dir`, plus
/// `field_summary.csv` for field runs. Returns paths in write order.
pub fn emit_bundle(bundle: &ResultBundle, dir: &Path, formats: &[OutputFormat]) -> Result<Vec<PathBuf>> {
    let name = bundle.scenario.name();
    let mut files = Vec::new();
    for &format in formats {
        let ext = match format {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
            OutputFormat::Svg => "svg",
        };
        let path = dir.join(format!("{name}.{ext}"));
        emit_results(bundle, format, &path)?;
        files.push(path);
        if format == OutputFormat::Csv && !bundle.fields.is_empty() {
            let path = dir.join("field_summary.csv");
            write_atomic(&path, &field_summary_csv(&bundle.fields)?)?;
            files.push(path);
        }
    }
    Ok(files)
}

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 560.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 230.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

fn colour(kind: TransceiverKind) -> &'static str {
    match kind {
        TransceiverKind::Oam => "#d62728",
        TransceiverKind::MimoSvd => "#9467bd",
        TransceiverKind::MimoZf => "#1f77b4",
        TransceiverKind::Siso => "#2ca02c",
    }
}

const DASHES: [&str; 6] = ["none", "8,4", "2,3", "10,3,2,3", "14,6", "4,8"];

/// Rate on x, harvested power on y, one polyline per curve.
pub fn regions_svg(bundle: &ResultBundle) -> String {
    let curves = &bundle.curves;
    let x_max = curves.iter().flat_map(|c| c.region.max_rate.iter().copied()).fold(0.0, f64::max);
    let y_max = curves.iter().flat_map(|c| c.region.energy_grid.iter().copied()).fold(0.0, f64::max);
    let (x_max, y_max) = (if x_max > 0.0 { x_max * 1.05 } else { 1.0 }, if y_max > 0.0 { y_max * 1.05 } else { 1.0 });
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + x / x_max * pw;
    let sy = |y: f64| TOP + ph - y / y_max * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">Rate-energy regions ({})</text>"#,
        LEFT + pw / 2.0,
        bundle.scenario.name()
    );
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for i in 0..=5 {
        let f = i as f64 / 5.0;
        let (x, y) = (sx(f * x_max), sy(f * y_max));
        let _ = writeln!(s, r#"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="black"/>"#, TOP + ph, TOP + ph + 5.0);
        let _ = writeln!(s, r#"<text x="{x}" y="{}" text-anchor="middle">{:.3}</text>"#, TOP + ph + 20.0, f * x_max);
        let _ = writeln!(s, r#"<line x1="{}" y1="{y}" x2="{LEFT}" y2="{y}" stroke="black"/>"#, LEFT - 5.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{:.2e}</text>"#, LEFT - 8.0, y + 4.0, f * y_max);
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">Rate (bits/s/Hz)</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text transform="translate(20 {}) rotate(-90)" text-anchor="middle">Harvested power (W/Hz)</text>"#,
        TOP + ph / 2.0
    );

    let mut params: Vec<&str> = Vec::new();
    for c in curves {
        if !params.contains(&c.param_value.as_str()) {
            params.push(&c.param_value);
        }
    }
    for (i, c) in curves.iter().enumerate() {
        let dash = DASHES[params.iter().position(|p| *p == c.param_value).unwrap_or(0) % DASHES.len()];
        let width = if c.method == RegionMethod::Lagrangian { 1.0 } else { 2.0 };
        let opacity = if c.method == RegionMethod::Lagrangian { 0.5 } else { 1.0 };
        let pts: Vec<String> = c
            .region
            .energy_grid
            .iter()
            .zip(&c.region.max_rate)
            .map(|(q, r)| format!("{:.2},{:.2}", sx(*r), sy(*q)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{}" stroke-width="{width}" stroke-opacity="{opacity}" stroke-dasharray="{dash}" points="{}"/>"#,
            colour(c.baseline),
            pts.join(" ")
        );
        let ly = TOP + 10.0 + 16.0 * i as f64;
        let lx = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{}" stroke-width="2" stroke-dasharray="{dash}" stroke-opacity="{opacity}"/>"#,
            lx + 30.0,
            colour(c.baseline)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}">{} {} {}={}</text>"#,
            lx + 36.0,
            ly + 4.0,
            c.baseline,
            if c.method == RegionMethod::Lagrangian { "(bound)" } else { "" },
            c.param_name,
            c.param_value
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Side-by-side intensity maps, each normalised to its own peak.
pub fn fields_svg(fields: &[FieldResult]) -> String {
    const PANEL: f64 = 220.0;
    const GAP: f64 = 20.0;
    const CELLS: usize = 64;
    let width = GAP + fields.len() as f64 * (PANEL + GAP);
    let height = PANEL + 2.0 * GAP + 40.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (p, f) in fields.iter().enumerate() {
        let m = &f.map;
        let x0 = GAP + p as f64 * (PANEL + GAP);
        let y0 = GAP + 20.0;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">l = {} (z = {} m, ±{} m)</text>"#,
            x0 + PANEL / 2.0,
            GAP + 8.0,
            f.mode,
            m.z,
            m.extent
        );
        let cells = CELLS.min(m.resolution);
        let step = m.resolution as f64 / cells as f64;
        let peak = m.peak().max(f64::MIN_POSITIVE);
        let cell = PANEL / cells as f64;
        for cy in 0..cells {
            for cx in 0..cells {
                let ix = ((cx as f64 + 0.5) * step) as usize;
                let iy = ((cy as f64 + 0.5) * step) as usize;
                let v = (m.at(ix, iy) / peak).clamp(0.0, 1.0);
                let level = (255.0 * v.sqrt()).round() as u8;
                // y grows upwards in the map, downwards in SVG
                let _ = writeln!(
                    s,
                    r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="rgb({level},{},{})"/>"#,
                    x0 + cx as f64 * cell,
                    y0 + (cells - 1 - cy) as f64 * cell,
                    cell + 0.05,
                    cell + 0.05,
                    level / 2,
                    255 - level
                );
            }
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">ring {:.3} m</text>"#,
            x0 + PANEL / 2.0,
            y0 + PANEL + 18.0,
            f.ring_radius_m
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::region::pareto_envelope;
    use crate::scenario::LinkSetup;
    use crate::swipt::REPoint;

    fn curve() -> CurveResult {
        CurveResult {
            baseline: TransceiverKind::Siso,
            method: RegionMethod::Envelope,
            param_name: "distance_m".into(),
            param_value: "5".into(),
            setup: LinkSetup { distance_m: 5.0, lateral_offset_m: 0.0, tilt_deg: 0.0, conversion_noise_ratio: 0.05 },
            region: pareto_envelope(&[REPoint { rate: 0.04, harvested: 1.03e-5 }], 2).unwrap(),
        }
    }

    #[test]
    fn two_point_region_gives_two_rows() {
        let bytes = regions_csv(&[curve()]).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "baseline,method,param_name,param_value,energy_w_per_hz,max_rate_bps_per_hz");
        assert_eq!(lines[1], "siso,envelope,distance_m,5,0,0.04");
        assert_eq!(lines[2], "siso,envelope,distance_m,5,0.0000103,0.04");
    }

    #[test]
    fn atomic_write_replaces_and_reports_path() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested/out.txt");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(path.parent().unwrap()).unwrap().count(), 1);

        let blocker = dir.path().join("file");
        std::fs::write(&blocker, b"x").unwrap();
        match write_atomic(&blocker.join("child.txt"), b"y") {
            Err(SimError::Io { path, .. }) => assert!(path.starts_with(&blocker)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn svg_has_one_polyline_per_curve() {
        let bundle = ResultBundle {
            scenario: crate::config::Scenario::Custom,
            seed: 0,
            config: crate::config::ScenarioConfig::new(crate::config::Scenario::Custom),
            curves: vec![curve(), curve()],
            fields: vec![],
        };
        let svg = regions_svg(&bundle);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("Rate (bits/s/Hz)") && svg.contains("Harvested power (W/Hz)"));
    }
}
