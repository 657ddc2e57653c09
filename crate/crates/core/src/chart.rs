//! Deterministic chart emission: two projections of the trigraded tables.
//!
//! A chart is a pure function of an [`SSDataset`] and a [`ChartSpec`]. The
//! Novikov projection plots `(u - s, s)` and collapses the coefficient
//! degree `t` into node multiplicity; the Adams projection plots
//! `(u - s, s + t)`. Multiplicities above a threshold render as squares
//! with the count at the upper left; a tower marker whose direction
//! projects to zero renders as the unbounded symbol on its base node, and
//! one that leaves the window renders as an arrow glyph past the last
//! plotted node. Overlay edges (structure lines and differentials) are
//! given in the dataset's own coordinates and projected here, so every
//! plotted endpoint recomputes from a class's degree.
//!
//! Both output formats are byte-deterministic: the TSV has a fixed header
//! and sorted rows, and the SVG is emitted with pure integer coordinates
//! (no floats anywhere, no timestamps). `parse_tsv` reconstructs exactly
//! the plotted multiset of nodes and arrows, which the round-trip property
//! test pins down.

use crate::error::{Error, Result};
use crate::sseq::SSDataset;
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Which two of the gradings form the plotting plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Projection {
    /// `x = u - s`, `y = s`; the coefficient degree collapses into
    /// multiplicity.
    Novikov,
    /// `x = u - s`, `y = s + t`.
    Adams,
}

impl Projection {
    pub fn name(self) -> &'static str {
        match self {
            Projection::Novikov => "novikov",
            Projection::Adams => "adams",
        }
    }
}

/// The kinds of overlay edges a chart can carry, with their drawing style.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ArrowKind {
    /// Computed page-one differential; green arrow.
    D1,
    /// Input differential annotation (not derived here); red arrow.
    Input,
    /// Vertical multiplication line; black, no head.
    Q0Line,
    /// Slope-one multiplication line; black, no head.
    H0Line,
    /// Tower continuation glyph; blue arrow.
    Tower,
}

impl ArrowKind {
    fn tag(self) -> &'static str {
        match self {
            ArrowKind::D1 => "d1",
            ArrowKind::Input => "in",
            ArrowKind::Q0Line => "q0",
            ArrowKind::H0Line => "h0",
            ArrowKind::Tower => "tow",
        }
    }

    fn from_tag(tag: &str) -> Option<ArrowKind> {
        Some(match tag {
            "d1" => ArrowKind::D1,
            "in" => ArrowKind::Input,
            "q0" => ArrowKind::Q0Line,
            "h0" => ArrowKind::H0Line,
            "tow" => ArrowKind::Tower,
            _ => return None,
        })
    }
}

/// One overlay edge in the dataset's own (unprojected) coordinates.
#[derive(Debug, Clone)]
pub struct Overlay {
    pub kind: ArrowKind,
    pub from: Vec<i32>,
    pub to: Vec<i32>,
}

/// Which multiplication a tower marker follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TowerKind {
    /// Degree step `(0, 0, +1)`: invisible in the Novikov projection
    /// (unbounded node), vertical in the Adams projection.
    Q0,
    /// Degree step `(+1, +2, 0)`: slope one in both projections.
    H0,
}

impl TowerKind {
    fn step(self) -> [i32; 3] {
        match self {
            TowerKind::Q0 => [0, 0, 1],
            TowerKind::H0 => [1, 2, 0],
        }
    }
}

/// A tower that continues indefinitely, anchored at its lowest class.
#[derive(Debug, Clone)]
pub struct TowerMarker {
    pub kind: TowerKind,
    pub base: Vec<i32>,
}

/// Everything the emitter needs besides the dataset itself.
#[derive(Debug, Clone)]
pub struct ChartSpec {
    pub projection: Projection,
    /// Plot window in projected coordinates, both axes from zero.
    pub stem_max: i32,
    pub y_max: i32,
    /// Multiplicities above this render as squares with a count; the
    /// figure's convention is a threshold of one.
    pub square_threshold: usize,
    pub overlays: Vec<Overlay>,
    pub towers: Vec<TowerMarker>,
}

impl ChartSpec {
    pub fn new(projection: Projection, stem_max: i32, y_max: i32) -> ChartSpec {
        ChartSpec {
            projection,
            stem_max,
            y_max,
            square_threshold: 1,
            overlays: Vec::new(),
            towers: Vec::new(),
        }
    }
}

/// One plotted arrow, in projected coordinates. `to = None` is the
/// unbounded-tower mark on the node itself.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ChartArrow {
    pub kind: ArrowKind,
    pub to: Option<(i32, i32)>,
}

/// One plotted node: a projected cell at full coordinate resolution, so
/// distinct `t` (or weight) rows at the same pixel stay distinguishable in
/// the TSV even though the SVG draws them as one glyph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChartNode {
    pub stem: i32,
    pub y: i32,
    pub t: Option<i32>,
    pub weight: Option<i32>,
    pub multiplicity: usize,
    pub labels: Vec<String>,
    pub arrows: Vec<ChartArrow>,
}

/// The resolved plot: what both emitters consume and what the TSV parser
/// reconstructs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChartData {
    pub name: String,
    pub projection: Projection,
    pub stem_max: i32,
    pub y_max: i32,
    pub square_threshold: usize,
    pub nodes: Vec<ChartNode>,
}

/// Axis layout of a dataset: positions of the gradings in its key tuples.
struct AxisMap {
    s: usize,
    u: usize,
    t: Option<usize>,
    w: Option<usize>,
}

fn axis_map(ds: &SSDataset) -> Result<AxisMap> {
    let find = |name: &str| ds.axis_names.iter().position(|n| n == name);
    let s = find("s").ok_or_else(|| {
        Error::Chart(format!("dataset `{}` has no `s` axis", ds.name))
    })?;
    let u = find("u").ok_or_else(|| {
        Error::Chart(format!("dataset `{}` has no `u` axis", ds.name))
    })?;
    Ok(AxisMap {
        s,
        u,
        t: find("t"),
        w: find("w"),
    })
}

impl AxisMap {
    /// Project one degree key to `(stem, y, t, weight)`.
    fn project(&self, key: &[i32], projection: Projection) -> (i32, i32, Option<i32>, Option<i32>) {
        let s = key[self.s];
        let u = key[self.u];
        let t = self.t.map(|i| key[i]);
        let w = self.w.map(|i| key[i]);
        let stem = u - s;
        let y = match projection {
            Projection::Novikov => s,
            Projection::Adams => s + t.unwrap_or(0),
        };
        (stem, y, t, w)
    }

    /// Step a degree key by a trigraded `(s, u, t)` increment.
    fn step(&self, key: &[i32], by: [i32; 3]) -> Result<Vec<i32>> {
        let mut out = key.to_vec();
        out[self.s] += by[0];
        out[self.u] += by[1];
        if by[2] != 0 {
            let t = self.t.ok_or_else(|| {
                Error::Chart("tower steps the coefficient degree but the dataset has no `t` axis".into())
            })?;
            out[t] += by[2];
        }
        Ok(out)
    }
}

/// Resolve a dataset against a spec into plotted nodes and arrows.
///
/// Every populated in-window cell becomes a node row. Overlay endpoints and
/// tower bases must be populated dataset keys; a dangling anchor is a
/// region mismatch and reports the missing blocks by degree.
pub fn resolve(spec: &ChartSpec, ds: &SSDataset) -> Result<ChartData> {
    let axes = axis_map(ds)?;
    let in_window =
        |stem: i32, y: i32| (0..=spec.stem_max).contains(&stem) && (0..=spec.y_max).contains(&y);

    // Populated nodes, keyed at full resolution.
    let mut nodes: BTreeMap<(i32, i32, Option<i32>, Option<i32>), ChartNode> = BTreeMap::new();
    for (key, &dim) in &ds.table.dims {
        if dim == 0 {
            continue;
        }
        let (stem, y, t, w) = axes.project(key, spec.projection);
        if !in_window(stem, y) {
            continue;
        }
        let labels = ds.table.labels.get(key).cloned().unwrap_or_default();
        for l in &labels {
            if l.contains(['\t', '\n', ',', ';']) {
                return Err(Error::Chart(format!("label `{l}` contains a separator")));
            }
        }
        let node = nodes.entry((stem, y, t, w)).or_insert(ChartNode {
            stem,
            y,
            t,
            weight: w,
            multiplicity: 0,
            labels: Vec::new(),
            arrows: Vec::new(),
        });
        node.multiplicity += dim;
        node.labels.extend(labels);
    }

    let mut missing: Vec<String> = Vec::new();
    let mut anchor =
        |nodes: &mut BTreeMap<(i32, i32, Option<i32>, Option<i32>), ChartNode>,
         missing: &mut Vec<String>,
         key: &[i32],
         arrow: ChartArrow| {
            let (stem, y, t, w) = axes.project(key, spec.projection);
            match nodes.get_mut(&(stem, y, t, w)) {
                Some(n) => n.arrows.push(arrow),
                None => missing.push(format!("{key:?}")),
            }
        };

    for ov in &spec.overlays {
        let (fs, fy, _, _) = axes.project(&ov.from, spec.projection);
        let (ts, ty, _, _) = axes.project(&ov.to, spec.projection);
        if !in_window(fs, fy) {
            continue;
        }
        // Edges may point just outside the window; the target coordinates
        // are kept so the glyph can still be drawn leaving the frame.
        let _ = (ts, ty);
        anchor(
            &mut nodes,
            &mut missing,
            &ov.from,
            ChartArrow {
                kind: ov.kind,
                to: Some((ts, ty)),
            },
        );
    }

    for tower in &spec.towers {
        let step = tower.kind.step();
        let base = &tower.base;
        let (bs, by, _, _) = axes.project(base, spec.projection);
        if !in_window(bs, by) {
            continue;
        }
        let stepped = axes.step(base, step)?;
        let (ns, ny, _, _) = axes.project(&stepped, spec.projection);
        if (ns, ny) == (bs, by) {
            // The tower direction is invisible in this projection: the
            // whole tower collapses onto its base node, which is therefore
            // unbounded.
            anchor(
                &mut nodes,
                &mut missing,
                base,
                ChartArrow {
                    kind: ArrowKind::Tower,
                    to: None,
                },
            );
            continue;
        }
        // Walk up the tower to the last in-window rung, confirming each
        // rung is populated, then hang the continuation glyph there.
        let (dx, dy) = (ns - bs, ny - by);
        let mut cur = base.clone();
        let (mut cs, mut cy) = (bs, by);
        loop {
            if ds.table.dim(&cur) == 0 {
                missing.push(format!("{cur:?}"));
                break;
            }
            if !in_window(cs + dx, cy + dy) {
                anchor(
                    &mut nodes,
                    &mut missing,
                    &cur,
                    ChartArrow {
                        kind: ArrowKind::Tower,
                        to: Some((cs + dx, cy + dy)),
                    },
                );
                break;
            }
            cur = axes.step(&cur, step)?;
            cs += dx;
            cy += dy;
        }
    }

    if !missing.is_empty() {
        missing.sort();
        missing.dedup();
        return Err(Error::Chart(format!(
            "overlay anchors outside the populated dataset; missing blocks: {}",
            missing.join(", ")
        )));
    }

    let mut nodes: Vec<ChartNode> = nodes.into_values().collect();
    for n in &mut nodes {
        n.arrows.sort();
        n.arrows.dedup();
    }
    Ok(ChartData {
        name: ds.name.clone(),
        projection: spec.projection,
        stem_max: spec.stem_max,
        y_max: spec.y_max,
        square_threshold: spec.square_threshold,
        nodes,
    })
}

// ---------------------------------------------------------------------------
// TSV
// ---------------------------------------------------------------------------

const TSV_HEADER: &str = "stem\ty\tt\tweight\tmultiplicity\tlabels\tarrows";

/// Emit the fixed-header TSV. One row per plotted node, sorted by
/// `(stem, y, t, weight)`; the `arrows` column holds semicolon-joined
/// `kind(x,y)` targets in projected coordinates, with `tow(inf)` for the
/// unbounded mark.
pub fn emit_tsv(data: &ChartData) -> String {
    let mut out = String::new();
    out.push_str(TSV_HEADER);
    out.push('\n');
    for n in &data.nodes {
        let opt = |v: Option<i32>| v.map(|x| x.to_string()).unwrap_or_default();
        let arrows = n
            .arrows
            .iter()
            .map(|a| match a.to {
                Some((x, y)) => format!("{}({x},{y})", a.kind.tag()),
                None => format!("{}(inf)", a.kind.tag()),
            })
            .collect::<Vec<_>>()
            .join(";");
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            n.stem,
            n.y,
            opt(n.t),
            opt(n.weight),
            n.multiplicity,
            n.labels.join(","),
            arrows
        );
    }
    out
}

/// Parse an emitted TSV back into its node rows. Together with `emit_tsv`
/// this is an exact round trip of the plotted multiset of nodes and arrows.
pub fn parse_tsv(text: &str) -> Result<Vec<ChartNode>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == TSV_HEADER => {}
        other => {
            return Err(Error::Chart(format!(
                "bad TSV header: {:?}",
                other.unwrap_or("")
            )))
        }
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 7 {
            return Err(Error::Chart(format!(
                "row {}: expected 7 columns, found {}",
                i + 2,
                cols.len()
            )));
        }
        let int = |s: &str| -> Result<i32> {
            s.parse()
                .map_err(|_| Error::Chart(format!("row {}: bad integer `{s}`", i + 2)))
        };
        let opt_int = |s: &str| -> Result<Option<i32>> {
            if s.is_empty() {
                Ok(None)
            } else {
                int(s).map(Some)
            }
        };
        let labels = if cols[5].is_empty() {
            Vec::new()
        } else {
            cols[5].split(',').map(|s| s.to_string()).collect()
        };
        let mut arrows = Vec::new();
        if !cols[6].is_empty() {
            for item in cols[6].split(';') {
                let (tag, rest) = item
                    .split_once('(')
                    .ok_or_else(|| Error::Chart(format!("row {}: bad arrow `{item}`", i + 2)))?;
                let kind = ArrowKind::from_tag(tag)
                    .ok_or_else(|| Error::Chart(format!("row {}: bad arrow kind `{tag}`", i + 2)))?;
                let body = rest.strip_suffix(')').ok_or_else(|| {
                    Error::Chart(format!("row {}: bad arrow `{item}`", i + 2))
                })?;
                let to = if body == "inf" {
                    None
                } else {
                    let (x, y) = body.split_once(',').ok_or_else(|| {
                        Error::Chart(format!("row {}: bad arrow target `{body}`", i + 2))
                    })?;
                    Some((int(x)?, int(y)?))
                };
                arrows.push(ChartArrow { kind, to });
            }
        }
        out.push(ChartNode {
            stem: int(cols[0])?,
            y: int(cols[1])?,
            t: opt_int(cols[2])?,
            weight: opt_int(cols[3])?,
            multiplicity: int(cols[4])? as usize,
            labels,
            arrows,
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// SVG
// ---------------------------------------------------------------------------

/// Cell pitch in user units; everything else derives from it in integers.
const CELL: i64 = 40;
const MARGIN: i64 = 60;

/// Integer square root (floor), for arrowhead geometry without floats.
fn isqrt(n: i64) -> i64 {
    if n <= 0 {
        return 0;
    }
    let mut x = n;
    let mut y = (x + 1) / 2;
    while y < x {
        x = y;
        y = (x + n / x) / 2;
    }
    x
}

struct Frame {
    stem_max: i32,
    y_max: i32,
    height: i64,
}

impl Frame {
    fn px(&self, stem: i32, y: i32) -> (i64, i64) {
        (
            MARGIN + stem as i64 * CELL,
            self.height - MARGIN - y as i64 * CELL,
        )
    }
}

fn color(kind: ArrowKind) -> &'static str {
    match kind {
        ArrowKind::D1 => "#008000",
        ArrowKind::Input => "#c00000",
        ArrowKind::Tower => "#0000c0",
        ArrowKind::Q0Line | ArrowKind::H0Line => "#000000",
    }
}

/// A straight edge from `a` to `b` with an arrowhead at `b` (lines skip the
/// head). The head is an integer triangle built from the edge direction.
fn svg_edge(out: &mut String, a: (i64, i64), b: (i64, i64), kind: ArrowKind) {
    let col = color(kind);
    let _ = writeln!(
        out,
        "<path d=\"M {} {} L {} {}\" stroke=\"{col}\" stroke-width=\"2\" fill=\"none\"/>",
        a.0, a.1, b.0, b.1
    );
    if matches!(kind, ArrowKind::Q0Line | ArrowKind::H0Line) {
        return;
    }
    let (vx, vy) = (b.0 - a.0, b.1 - a.1);
    let len = isqrt(vx * vx + vy * vy).max(1);
    // 10-unit head vector along the edge, 4-unit half-width across it.
    let (hx, hy) = (vx * 10 / len, vy * 10 / len);
    let (px, py) = (-hy * 4 / 10, hx * 4 / 10);
    let _ = writeln!(
        out,
        "<path d=\"M {} {} L {} {} L {} {} Z\" fill=\"{col}\"/>",
        b.0,
        b.1,
        b.0 - hx + px,
        b.1 - hy + py,
        b.0 - hx - px,
        b.1 - hy - py
    );
}

/// Emit the SVG 1.1 document. Pure integer geometry; identical input data
/// produces identical bytes.
pub fn emit_svg(data: &ChartData) -> String {
    let frame = Frame {
        stem_max: data.stem_max,
        y_max: data.y_max,
        height: MARGIN * 2 + (data.y_max as i64 + 1) * CELL,
    };
    let width = MARGIN * 2 + (data.stem_max as i64 + 1) * CELL;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{width}\" height=\"{}\" viewBox=\"0 0 {width} {}\">",
        frame.height, frame.height
    );
    let _ = writeln!(
        out,
        "<text x=\"{MARGIN}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"16\">{} ({})</text>",
        MARGIN / 2,
        xml_escape(&data.name),
        data.projection.name()
    );

    // Axes with ticks on even coordinates, as in the figure.
    let origin = frame.px(0, 0);
    let x_end = frame.px(data.stem_max, 0);
    let y_end = frame.px(0, data.y_max);
    let _ = writeln!(
        out,
        "<path d=\"M {} {} L {} {}\" stroke=\"#000000\" stroke-width=\"1\" fill=\"none\"/>",
        origin.0,
        origin.1 + CELL / 2,
        x_end.0 + CELL / 2,
        origin.1 + CELL / 2
    );
    let _ = writeln!(
        out,
        "<path d=\"M {} {} L {} {}\" stroke=\"#000000\" stroke-width=\"1\" fill=\"none\"/>",
        origin.0 - CELL / 2,
        origin.1,
        origin.0 - CELL / 2,
        y_end.1 - CELL / 2
    );
    for stem in (0..=data.stem_max).step_by(2) {
        let (x, y) = frame.px(stem, 0);
        let _ = writeln!(
            out,
            "<text x=\"{x}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{stem}</text>",
            y + CELL / 2 + 16
        );
    }
    for yy in (0..=data.y_max).step_by(2) {
        let (x, y) = frame.px(0, yy);
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">{yy}</text>",
            x - CELL / 2 - 6,
            y + 4
        );
    }

    // Collapse node rows onto pixels: one glyph per (stem, y).
    #[derive(Default)]
    struct Cell {
        multiplicity: usize,
        unbounded: bool,
        labels: Vec<String>,
    }
    let mut cells: BTreeMap<(i32, i32), Cell> = BTreeMap::new();
    for n in &data.nodes {
        let cell = cells.entry((n.stem, n.y)).or_default();
        cell.multiplicity += n.multiplicity;
        cell.labels.extend(n.labels.iter().cloned());
        if n.arrows.iter().any(|a| a.to.is_none()) {
            cell.unbounded = true;
        }
    }

    // Edges first so glyphs draw over them.
    for n in &data.nodes {
        let a = frame.px(n.stem, n.y);
        for arrow in &n.arrows {
            if let Some((tx, ty)) = arrow.to {
                let b = frame.px(tx, ty);
                svg_edge(&mut out, a, b, arrow.kind);
            }
        }
    }

    for (&(stem, y), cell) in &cells {
        let (x, py) = frame.px(stem, y);
        if cell.unbounded || cell.multiplicity > data.square_threshold {
            let _ = writeln!(
                out,
                "<rect x=\"{}\" y=\"{}\" width=\"14\" height=\"14\" fill=\"#000000\"/>",
                x - 7,
                py - 7
            );
            let count = if cell.unbounded {
                "\u{221e}".to_string()
            } else {
                cell.multiplicity.to_string()
            };
            let _ = writeln!(
                out,
                "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">{count}</text>",
                x - 18,
                py - 10
            );
        } else {
            let _ = writeln!(
                out,
                "<circle cx=\"{x}\" cy=\"{py}\" r=\"5\" fill=\"#000000\"/>"
            );
        }
        if !cell.labels.is_empty() {
            let mut labels = cell.labels.clone();
            labels.sort();
            labels.dedup();
            let _ = writeln!(
                out,
                "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\">{}</text>",
                x + 8,
                py + 14,
                xml_escape(&labels.join(", "))
            );
        }
    }

    out.push_str("</svg>\n");
    out
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// One-call emission: resolve then render in the requested format.
pub fn emit(spec: &ChartSpec, ds: &SSDataset, format: ChartFormat) -> Result<Vec<u8>> {
    let data = resolve(spec, ds)?;
    Ok(match format {
        ChartFormat::Svg => emit_svg(&data).into_bytes(),
        ChartFormat::Tsv => emit_tsv(&data).into_bytes(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartFormat {
    Svg,
    Tsv,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sseq::Table;

    /// A small hand-built trigraded dataset shaped like the low stems of
    /// the figure: the unit, a tower class, a three-fold node, and one
    /// differential pair.
    fn sample() -> SSDataset {
        let mut dims = BTreeMap::new();
        let mut labels = BTreeMap::new();
        dims.insert(vec![0, 0, 0], 1);
        labels.insert(vec![0, 0, 0], vec!["1".to_string()]);
        dims.insert(vec![0, 0, 1], 1);
        dims.insert(vec![0, 0, 2], 1);
        dims.insert(vec![1, 2, 0], 1);
        labels.insert(vec![1, 2, 0], vec!["h0".to_string()]);
        dims.insert(vec![2, 4, 0], 1);
        dims.insert(vec![1, 4, 1], 3);
        dims.insert(vec![2, 4, 2], 1);
        dims.insert(vec![1, 6, 1], 1);
        SSDataset::new(
            "sample",
            &["s", "u", "t"],
            Table { dims, labels },
        )
    }

    fn spec(projection: Projection) -> ChartSpec {
        let mut spec = ChartSpec::new(projection, 6, 2);
        spec.overlays.push(Overlay {
            kind: ArrowKind::D1,
            from: vec![1, 6, 1],
            to: vec![2, 6, 2],
        });
        spec.overlays.push(Overlay {
            kind: ArrowKind::H0Line,
            from: vec![1, 2, 0],
            to: vec![2, 4, 0],
        });
        spec.towers.push(TowerMarker {
            kind: TowerKind::Q0,
            base: vec![0, 0, 0],
        });
        spec.towers.push(TowerMarker {
            kind: TowerKind::H0,
            base: vec![1, 2, 0],
        });
        spec
    }

    #[test]
    fn projections_and_collapse() {
        let data = resolve(&spec(Projection::Novikov), &sample()).unwrap();
        // The origin collapses three t-rows into one pixel; each row keeps
        // its own TSV identity.
        let origin: Vec<&ChartNode> =
            data.nodes.iter().filter(|n| (n.stem, n.y) == (0, 0)).collect();
        assert_eq!(origin.len(), 3);
        // The q0-tower direction is invisible here, so the base row holds
        // the unbounded mark.
        assert!(origin
            .iter()
            .any(|n| n.arrows.contains(&ChartArrow { kind: ArrowKind::Tower, to: None })));
        // The multiplicity-3 node at (3, 1).
        let sq = data.nodes.iter().find(|n| (n.stem, n.y) == (3, 1)).unwrap();
        assert_eq!(sq.multiplicity, 3);
        // d1 arrow: (5, 1) -> (4, 2) in this projection.
        let d1 = data.nodes.iter().find(|n| (n.stem, n.y) == (5, 1)).unwrap();
        assert_eq!(
            d1.arrows,
            vec![ChartArrow { kind: ArrowKind::D1, to: Some((4, 2)) }]
        );
        // The h0 tower runs out of window after (2, 2); the continuation
        // glyph hangs there and points along the slope.
        let h0top = data.nodes.iter().find(|n| (n.stem, n.y) == (2, 2)).unwrap();
        assert!(h0top
            .arrows
            .contains(&ChartArrow { kind: ArrowKind::Tower, to: Some((3, 3)) }));

        let adams = resolve(&spec(Projection::Adams), &sample()).unwrap();
        // Same d1 arrow lands two higher in the Adams projection.
        let d1 = adams.nodes.iter().find(|n| (n.stem, n.y) == (5, 2)).unwrap();
        assert_eq!(
            d1.arrows,
            vec![ChartArrow { kind: ArrowKind::D1, to: Some((4, 4)) }]
        );
        // The q0 tower is now a vertical line of nodes; the glyph hangs on
        // the last one and points upward.
        let top = adams.nodes.iter().find(|n| (n.stem, n.y) == (0, 2)).unwrap();
        assert_eq!(
            top.arrows,
            vec![ChartArrow { kind: ArrowKind::Tower, to: Some((0, 3)) }]
        );
    }

    #[test]
    fn tsv_round_trip_and_determinism() {
        for projection in [Projection::Novikov, Projection::Adams] {
            let data = resolve(&spec(projection), &sample()).unwrap();
            let tsv = emit_tsv(&data);
            assert_eq!(tsv, emit_tsv(&data));
            let parsed = parse_tsv(&tsv).unwrap();
            assert_eq!(parsed, data.nodes);
            let svg = emit_svg(&data);
            assert_eq!(svg, emit_svg(&data));
        }
    }

    #[test]
    fn empty_dataset_gives_axes_only() {
        let ds = SSDataset::new(
            "empty",
            &["s", "u", "t"],
            Table { dims: BTreeMap::new(), labels: BTreeMap::new() },
        );
        let data = resolve(&ChartSpec::new(Projection::Novikov, 4, 4), &ds).unwrap();
        assert!(data.nodes.is_empty());
        let svg = emit_svg(&data);
        assert!(svg.starts_with("<svg "));
        assert!(svg.ends_with("</svg>\n"));
        assert!(!svg.contains("<circle"));
        let tsv = emit_tsv(&data);
        assert_eq!(parse_tsv(&tsv).unwrap(), Vec::<ChartNode>::new());
    }

    #[test]
    fn dangling_overlay_is_a_region_mismatch() {
        let mut bad = ChartSpec::new(Projection::Novikov, 6, 6);
        bad.overlays.push(Overlay {
            kind: ArrowKind::D1,
            from: vec![3, 8, 0],
            to: vec![4, 8, 1],
        });
        let err = resolve(&bad, &sample()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("missing blocks"), "{msg}");
        assert!(msg.contains("[3, 8, 0]"), "{msg}");
    }

    #[test]
    fn weight_column_round_trips() {
        let mut dims = BTreeMap::new();
        dims.insert(vec![1, 2, 1], 1);
        let ds = SSDataset::new("weighted", &["s", "u", "w"], Table {
            dims,
            labels: BTreeMap::new(),
        });
        let data = resolve(&ChartSpec::new(Projection::Novikov, 4, 4), &ds).unwrap();
        assert_eq!(data.nodes.len(), 1);
        assert_eq!(data.nodes[0].t, None);
        assert_eq!(data.nodes[0].weight, Some(1));
        let parsed = parse_tsv(&emit_tsv(&data)).unwrap();
        assert_eq!(parsed, data.nodes);
    }
}
