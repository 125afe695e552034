//! Diagram serialization: CSV rows, a JSON document carrying the effective
//! configuration, and a self-contained SVG rendering of the bifurcation
//! picture.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::branch::{BranchId, BranchKind, BranchPoint};
use crate::continuation::Diagram;
use crate::error::{Error, Result};
use crate::stability::Stability;
use crate::timemaps::{OrbitParam, QuadConfig, Regime};

pub const CSV_HEADER: &str = "branch,k,regime,param,energy,L,lambda,y_minus,y_plus,stability";

/// Which endpoint ordinate diagrams are plotted against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ordinate {
    /// y(-L), the convention of the reference figures.
    #[default]
    YMinus,
    /// y(L); shows the mirrored cell in the canonical orientation.
    YPlus,
}

/// Effective settings of one diagram run; echoed into the JSON output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub phi0: f64,
    pub phi1: f64,
    pub k_max: u32,
    pub l_max: f64,
    pub n_points: usize,
    pub quad: QuadConfig,
    pub overlay_symmetric: bool,
    pub ordinate: Ordinate,
    pub csv_path: Option<PathBuf>,
    pub json_path: Option<PathBuf>,
    pub svg_path: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            phi0: std::f64::consts::FRAC_PI_6,
            phi1: std::f64::consts::FRAC_PI_4,
            k_max: 4,
            l_max: 8.0,
            n_points: 128,
            quad: QuadConfig::default(),
            overlay_symmetric: false,
            ordinate: Ordinate::YMinus,
            csv_path: None,
            json_path: None,
            svg_path: None,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.quad.validate()?;
        if self.n_points < 2 {
            return Err(Error::domain("n_points must be at least 2"));
        }
        if !(self.l_max > 0.0) {
            return Err(Error::domain("l_max must be positive"));
        }
        let paths: Vec<&PathBuf> = [&self.csv_path, &self.json_path, &self.svg_path]
            .into_iter()
            .flatten()
            .collect();
        for i in 0..paths.len() {
            for j in i + 1..paths.len() {
                if paths[i] == paths[j] {
                    return Err(Error::domain(format!(
                        "output paths must be distinct, got {} twice",
                        paths[i].display()
                    )));
                }
            }
        }
        Ok(())
    }
}

fn fmt15(v: f64) -> String {
    format!("{v:.14e}")
}

/// Emit the point table: one row per branch point, sorted by
/// (branch, k, energy). Numeric fields carry 15 significant digits.
pub fn diagram_to_csv(diagram: &Diagram) -> String {
    let mut out = String::with_capacity(128 * diagram.branches.len() * 32);
    out.push_str(CSV_HEADER);
    out.push('\n');
    let mut groups: Vec<_> = diagram.branches.iter().collect();
    groups.sort_by_key(|g| g.id);
    for group in groups {
        let mut points: Vec<_> = group.points.iter().collect();
        points.sort_by(|a, b| a.param.energy().partial_cmp(&b.param.energy()).unwrap());
        for p in points {
            let regime = match p.param.regime() {
                Regime::Closed => "closed",
                Regime::Open => "open",
            };
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                group.id.kind.as_str(),
                group.id.k,
                regime,
                fmt15(p.param.value()),
                fmt15(p.param.energy()),
                fmt15(p.half_length),
                fmt15(p.lambda),
                fmt15(p.y_minus),
                fmt15(p.y_plus),
                p.stability.as_str(),
            ));
        }
    }
    out
}

/// Parse a diagram CSV back into branch points (grouping is implicit in the
/// branch and k columns).
pub fn points_from_csv(text: &str) -> Result<Vec<BranchPoint>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        other => {
            return Err(Error::Parse(format!(
                "bad CSV header: expected '{CSV_HEADER}', got {other:?}"
            )))
        }
    }
    let mut points = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 10 {
            return Err(Error::Parse(format!(
                "line {}: expected 10 fields, got {}",
                lineno + 2,
                fields.len()
            )));
        }
        let num = |i: usize| -> Result<f64> {
            fields[i]
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("line {}: field {i}: {e}", lineno + 2)))
        };
        let kind = BranchKind::parse(fields[0].trim())?;
        let k: u32 = fields[1]
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("line {}: k: {e}", lineno + 2)))?;
        let param = match fields[2].trim() {
            "closed" => OrbitParam::from_alpha(num(3)?)?,
            "open" => OrbitParam::from_beta(num(3)?)?,
            other => {
                return Err(Error::Parse(format!(
                    "line {}: unknown regime '{other}'",
                    lineno + 2
                )))
            }
        };
        points.push(BranchPoint {
            branch: BranchId::new(kind, k),
            param,
            half_length: num(5)?,
            lambda: num(6)?,
            y_minus: num(7)?,
            y_plus: num(8)?,
            stability: Stability::parse(fields[9].trim())?,
        });
    }
    Ok(points)
}

/// JSON document: the full diagram plus the configuration that produced it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagramFile {
    pub config: RunConfig,
    pub diagram: Diagram,
}

pub fn diagram_to_json(diagram: &Diagram, config: &RunConfig) -> Result<String> {
    let file = DiagramFile {
        config: config.clone(),
        diagram: diagram.clone(),
    };
    let mut text = serde_json::to_string_pretty(&file)?;
    text.push('\n');
    Ok(text)
}

pub fn diagram_from_json(text: &str) -> Result<DiagramFile> {
    Ok(serde_json::from_str(text)?)
}

// ---------------------------------------------------------------------------
// SVG rendering
// ---------------------------------------------------------------------------

const SVG_W: f64 = 960.0;
const SVG_H: f64 = 620.0;
const MARGIN_L: f64 = 72.0;
const MARGIN_R: f64 = 24.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 56.0;

struct Frame {
    l_max: f64,
    y_max: f64,
}

impl Frame {
    fn x(&self, l: f64) -> f64 {
        MARGIN_L + (SVG_W - MARGIN_L - MARGIN_R) * (l / self.l_max)
    }

    fn y(&self, v: f64) -> f64 {
        let half = (SVG_H - MARGIN_T - MARGIN_B) / 2.0;
        MARGIN_T + half - half * (v / self.y_max)
    }
}

fn ordinate_of(p: &BranchPoint, ordinate: Ordinate) -> f64 {
    match ordinate {
        Ordinate::YMinus => p.y_minus,
        Ordinate::YPlus => p.y_plus,
    }
}

/// Plotted ordinates of the two turning-point orbits of one winding level.
/// For φ0 < φ1 they sit at ±y_abs in y(-L) and at 0 in y(L); the mirrored
/// cell swaps the roles.
fn critical_marker_ys(diagram: &Diagram, y_abs: f64, ordinate: Ordinate) -> (f64, f64) {
    let canonical = diagram.cell.is_canonical();
    match (ordinate, canonical) {
        (Ordinate::YMinus, true) | (Ordinate::YPlus, false) => (y_abs, -y_abs),
        _ => (0.0, 0.0),
    }
}

fn polyline(points: &[(f64, f64)], class: &str, style: &str) -> String {
    let coords: Vec<String> = points
        .iter()
        .map(|(x, y)| format!("{x:.2},{y:.2}"))
        .collect();
    format!(
        "  <polyline class=\"{class}\" fill=\"none\" {style} points=\"{}\"/>\n",
        coords.join(" ")
    )
}

fn stability_style(s: Stability) -> &'static str {
    match s {
        Stability::AsymptoticallyStable => "stroke=\"#1b7f3b\" stroke-width=\"2.2\"",
        Stability::Unstable => "stroke=\"#c62828\" stroke-width=\"2.2\" stroke-dasharray=\"6,4\"",
        Stability::Undetermined => {
            "stroke=\"#888888\" stroke-width=\"2.0\" stroke-dasharray=\"1.5,3\""
        }
    }
}

fn stability_letter(s: Stability) -> Option<&'static str> {
    match s {
        Stability::AsymptoticallyStable => Some("s"),
        Stability::Unstable => Some("u"),
        Stability::Undetermined => None,
    }
}

fn render_branches(out: &mut String, diagram: &Diagram, frame: &Frame, ordinate: Ordinate) {
    for group in &diagram.branches {
        let pts: Vec<(f64, f64)> = group
            .points
            .iter()
            .map(|p| (frame.x(p.half_length), frame.y(ordinate_of(p, ordinate))))
            .collect();
        if pts.len() < 2 {
            continue;
        }
        // neutral backbone, one polyline per (branch, k) group
        out.push_str(&polyline(
            &pts,
            "branch",
            "stroke=\"#222222\" stroke-width=\"0.7\" opacity=\"0.6\"",
        ));
        // stability runs drawn on top as path segments
        let mut start = 0usize;
        while start + 1 < group.points.len() {
            let verdict = group.points[start].stability;
            let mut end = start + 1;
            while end < group.points.len() && group.points[end].stability == verdict {
                end += 1;
            }
            let seg: Vec<String> = (start..end)
                .map(|i| format!("{:.2} {:.2}", pts[i].0, pts[i].1))
                .collect();
            if seg.len() >= 2 {
                out.push_str(&format!(
                    "  <path class=\"run\" fill=\"none\" {} d=\"M {}\"/>\n",
                    stability_style(verdict),
                    seg.join(" L ")
                ));
                if end - start >= 5 {
                    if let Some(letter) = stability_letter(verdict) {
                        let mid = (start + end) / 2;
                        out.push_str(&format!(
                            "  <text class=\"stability-label\" x=\"{:.2}\" y=\"{:.2}\" \
                             font-size=\"13\" fill=\"#333333\">{letter}</text>\n",
                            pts[mid].0 + 5.0,
                            pts[mid].1 - 5.0
                        ));
                    }
                }
            }
            start = end;
        }
        // family label at the far end of the group
        let label_at = pts.last().unwrap();
        out.push_str(&format!(
            "  <text class=\"branch-label\" x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" \
             fill=\"#222222\">{}k{}</text>\n",
            (label_at.0 + 4.0).min(SVG_W - 30.0),
            label_at.1,
            group.id.kind.as_str(),
            group.id.k
        ));
    }
}

/// Render the diagram as a self-contained SVG: y(-L) (or y(L)) against L,
/// one polyline per family, stability runs drawn in distinct stroke styles
/// labeled `s`/`u`, saddle-nodes marked `SN`, turning-point orbits as open
/// circles, and the symmetric-midpoint overlay dashed when present.
pub fn diagram_to_svg(diagram: &Diagram, ordinate: Ordinate) -> String {
    let mut l_max = 1e-9_f64;
    let mut y_max = 1e-9_f64;
    let mut scan = |d: &Diagram| {
        for g in &d.branches {
            for p in &g.points {
                l_max = l_max.max(p.half_length);
                y_max = y_max.max(ordinate_of(p, ordinate).abs());
            }
        }
        for c in &d.criticals {
            y_max = y_max.max(c.y_abs);
        }
    };
    scan(diagram);
    if let Some(overlay) = &diagram.symmetric_overlay {
        scan(overlay);
    }
    let frame = Frame {
        l_max: l_max * 1.02,
        y_max: y_max * 1.08,
    };

    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {SVG_W} {SVG_H}\" \
         font-family=\"Helvetica, Arial, sans-serif\">\n"
    ));
    out.push_str(&format!(
        "  <rect x=\"0\" y=\"0\" width=\"{SVG_W}\" height=\"{SVG_H}\" fill=\"#ffffff\"/>\n"
    ));
    out.push_str(&format!(
        "  <text x=\"{:.0}\" y=\"24\" font-size=\"15\" fill=\"#111111\">bifurcation diagram: \
         phi0 = {:.6}, phi1 = {:.6}</text>\n",
        MARGIN_L,
        diagram.cell.phi0(),
        diagram.cell.phi1()
    ));

    // axes
    let x0 = frame.x(0.0);
    let y_zero = frame.y(0.0);
    out.push_str(&format!(
        "  <line x1=\"{x0:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#444444\" \
         stroke-width=\"1\"/>\n",
        y_zero,
        frame.x(frame.l_max),
        y_zero
    ));
    out.push_str(&format!(
        "  <line x1=\"{x0:.2}\" y1=\"{:.2}\" x2=\"{x0:.2}\" y2=\"{:.2}\" stroke=\"#444444\" \
         stroke-width=\"1\"/>\n",
        frame.y(frame.y_max),
        frame.y(-frame.y_max)
    ));
    for i in 0..=5 {
        let l = frame.l_max * i as f64 / 5.0;
        out.push_str(&format!(
            "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" fill=\"#444444\" \
             text-anchor=\"middle\">{l:.2}</text>\n",
            frame.x(l),
            SVG_H - MARGIN_B + 18.0
        ));
    }
    for i in [-1.0_f64, -0.5, 0.0, 0.5, 1.0] {
        let v = frame.y_max * i;
        out.push_str(&format!(
            "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" fill=\"#444444\" \
             text-anchor=\"end\">{v:.2}</text>\n",
            MARGIN_L - 8.0,
            frame.y(v) + 4.0
        ));
    }
    out.push_str(&format!(
        "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"13\" fill=\"#111111\">L</text>\n",
        frame.x(frame.l_max) - 10.0,
        SVG_H - MARGIN_B + 36.0
    ));
    let ord_label = match ordinate {
        Ordinate::YMinus => "y(-L)",
        Ordinate::YPlus => "y(L)",
    };
    out.push_str(&format!(
        "  <text x=\"14\" y=\"{:.2}\" font-size=\"13\" fill=\"#111111\">{ord_label}</text>\n",
        MARGIN_T + 14.0
    ));

    // symmetric overlay beneath the main curves, dashed
    if let Some(overlay) = &diagram.symmetric_overlay {
        for group in &overlay.branches {
            let pts: Vec<(f64, f64)> = group
                .points
                .iter()
                .map(|p| (frame.x(p.half_length), frame.y(ordinate_of(p, ordinate))))
                .collect();
            if pts.len() >= 2 {
                out.push_str(&polyline(
                    &pts,
                    "overlay",
                    "stroke=\"#9a9a9a\" stroke-width=\"1.2\" stroke-dasharray=\"7,5\"",
                ));
            }
        }
    }

    render_branches(&mut out, diagram, &frame, ordinate);

    for c in &diagram.criticals {
        let (y_star, y_upper) = critical_marker_ys(diagram, c.y_abs, ordinate);
        for (t, y) in [(c.t_star, y_star), (c.t_upper, y_upper)] {
            let l = 0.5 * t;
            if l <= frame.l_max {
                out.push_str(&format!(
                    "  <circle class=\"marker-critical\" cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" \
                     fill=\"none\" stroke=\"#1a4f9c\" stroke-width=\"1.6\"/>\n",
                    frame.x(l),
                    frame.y(y)
                ));
            }
        }
    }

    for sn in &diagram.saddles {
        let y = diagram
            .branches
            .iter()
            .find(|g| g.id == sn.branch)
            .and_then(|g| {
                g.points
                    .iter()
                    .min_by(|a, b| {
                        (a.half_length - sn.l_sn)
                            .abs()
                            .partial_cmp(&(b.half_length - sn.l_sn).abs())
                            .unwrap()
                    })
                    .map(|p| ordinate_of(p, ordinate))
            })
            .unwrap_or(0.0);
        if sn.l_sn <= frame.l_max {
            out.push_str(&format!(
                "  <circle class=\"marker-sn\" cx=\"{:.2}\" cy=\"{:.2}\" r=\"4.5\" \
                 fill=\"#e09100\" stroke=\"#7a4f00\" stroke-width=\"1\"/>\n",
                frame.x(sn.l_sn),
                frame.y(y)
            ));
            out.push_str(&format!(
                "  <text class=\"sn-label\" x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" \
                 fill=\"#7a4f00\">SN</text>\n",
                frame.x(sn.l_sn) - 28.0,
                frame.y(y) + 4.0
            ));
        }
    }

    out.push_str("</svg>\n");
    out
}

// ---------------------------------------------------------------------------
// Atomic output
// ---------------------------------------------------------------------------

fn write_atomic(path: &Path, content: &str) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::domain(format!("bad output path {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    std::fs::write(&tmp, content).inspect_err(|_| {
        let _ = std::fs::remove_file(&tmp);
    })?;
    std::fs::rename(&tmp, path).inspect_err(|_| {
        let _ = std::fs::remove_file(&tmp);
    })?;
    Ok(())
}

/// Write every (path, content) pair via temp-file-plus-rename; if any write
/// fails, the outputs already renamed in this batch are removed again.
pub fn write_outputs(outputs: &[(PathBuf, String)]) -> Result<()> {
    let mut written: Vec<&PathBuf> = Vec::new();
    for (path, content) in outputs {
        if let Err(e) = write_atomic(path, content) {
            for p in written {
                let _ = std::fs::remove_file(p);
            }
            return Err(e);
        }
        written.push(path);
    }
    Ok(())
}
