//! Static SVG rendering of graph and plan snapshots: scene geometry plus
//! trajectory polylines, with circle markers for nodes and square markers
//! for connector edges.

use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq)]
pub enum SceneItem {
    Table(f64, f64, f64, f64),
    Bin(f64, f64, f64, f64),
    Obstacle(Vec<(f64, f64)>),
    DiscObject {
        name: String,
        radius: f64,
        at: (f64, f64, f64),
    },
    PolyObject {
        name: String,
        vertices: Vec<(f64, f64)>,
        at: (f64, f64, f64),
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordKind {
    Node,
    Edge,
    Step,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajRecord {
    pub kind: RecordKind,
    pub index: u64,
    pub skill: String,
    pub cost: f64,
    pub grip_path: Vec<(f64, f64)>,
    pub obj_path: Vec<(f64, f64)>,
    pub end: (f64, f64, f64),
    pub goal: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Snapshot {
    pub scene: Vec<SceneItem>,
    pub records: Vec<TrajRecord>,
}

#[derive(Debug)]
pub struct ParseError(pub String);

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "snapshot parse error: {}", self.0)
    }
}
impl std::error::Error for ParseError {}

fn parse_polyline(s: &str) -> Result<Vec<(f64, f64)>, ParseError> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(';')
        .map(|pair| {
            let mut it = pair.split(',');
            let x = it
                .next()
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| ParseError(format!("bad point {pair}")))?;
            let y = it
                .next()
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| ParseError(format!("bad point {pair}")))?;
            Ok((x, y))
        })
        .collect()
}

fn field<'a>(tokens: &'a [&'a str], key: &str) -> Result<&'a str, ParseError> {
    tokens
        .iter()
        .find_map(|t| t.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .ok_or_else(|| ParseError(format!("missing field {key}")))
}

pub fn parse_snapshot(text: &str) -> Result<Snapshot, ParseError> {
    let mut lines = text.lines();
    match lines.next() {
        Some("mosaic-graph v1") | Some("mosaic-plan v1") => {}
        other => return Err(ParseError(format!("unknown header {other:?}"))),
    }
    let mut snap = Snapshot::default();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens[0] {
            "scene" => snap.scene.push(parse_scene(&tokens)?),
            "node" | "edge" | "step" => {
                let kind = match tokens[0] {
                    "node" => RecordKind::Node,
                    "edge" => RecordKind::Edge,
                    _ => RecordKind::Step,
                };
                let index = tokens
                    .get(1)
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| ParseError(format!("bad record id in {line}")))?;
                let end_raw = field(&tokens, "end")?;
                let end_parts: Vec<f64> = end_raw
                    .split(',')
                    .map(|v| v.parse().map_err(|_| ParseError(format!("bad end {end_raw}"))))
                    .collect::<Result<_, _>>()?;
                if end_parts.len() != 3 {
                    return Err(ParseError(format!("bad end {end_raw}")));
                }
                snap.records.push(TrajRecord {
                    kind,
                    index,
                    skill: field(&tokens, "skill").unwrap_or("-").to_string(),
                    cost: field(&tokens, "cost")
                        .ok()
                        .and_then(|v| v.parse().ok())
                        .unwrap_or(0.0),
                    grip_path: parse_polyline(field(&tokens, "grip")?)?,
                    obj_path: parse_polyline(field(&tokens, "opath").unwrap_or(""))?,
                    end: (end_parts[0], end_parts[1], end_parts[2]),
                    goal: field(&tokens, "goal").map_or(false, |v| v == "1"),
                });
            }
            other => return Err(ParseError(format!("unknown record {other}"))),
        }
    }
    Ok(snap)
}

fn parse_scene(tokens: &[&str]) -> Result<SceneItem, ParseError> {
    let nums = |from: usize, n: usize| -> Result<Vec<f64>, ParseError> {
        tokens[from..]
            .iter()
            .take(n)
            .map(|v| {
                v.parse()
                    .map_err(|_| ParseError(format!("bad number {v}")))
            })
            .collect()
    };
    match tokens.get(1) {
        Some(&"table") => {
            let v = nums(2, 4)?;
            Ok(SceneItem::Table(v[0], v[1], v[2], v[3]))
        }
        Some(&"bin") => {
            let v = nums(2, 4)?;
            Ok(SceneItem::Bin(v[0], v[1], v[2], v[3]))
        }
        Some(&"obstacle") => {
            let v = nums(2, tokens.len() - 2)?;
            Ok(SceneItem::Obstacle(
                v.chunks(2).map(|c| (c[0], c[1])).collect(),
            ))
        }
        Some(&"object") => {
            let name = tokens
                .get(2)
                .ok_or_else(|| ParseError("object without name".into()))?
                .to_string();
            let at_pos = tokens
                .iter()
                .position(|&t| t == "at")
                .ok_or_else(|| ParseError("object without pose".into()))?;
            let pose = nums(at_pos + 1, 3)?;
            match tokens.get(3) {
                Some(&"disc") => Ok(SceneItem::DiscObject {
                    name,
                    radius: nums(4, 1)?[0],
                    at: (pose[0], pose[1], pose[2]),
                }),
                Some(&"poly") => {
                    let v = nums(4, at_pos - 4)?;
                    Ok(SceneItem::PolyObject {
                        name,
                        vertices: v.chunks(2).map(|c| (c[0], c[1])).collect(),
                        at: (pose[0], pose[1], pose[2]),
                    })
                }
                other => Err(ParseError(format!("unknown object shape {other:?}"))),
            }
        }
        other => Err(ParseError(format!("unknown scene item {other:?}"))),
    }
}

const PALETTE: [&str; 8] = [
    "#1b6ca8", "#c0392b", "#27845b", "#8e5aa8", "#c77f1a", "#2b8a94", "#a83d68", "#5a6b2f",
];

/// Render a parsed snapshot as a static SVG document.
pub fn render_svg(snap: &Snapshot) -> String {
    // World bounds over everything drawn.
    let mut min = (f64::INFINITY, f64::INFINITY);
    let mut max = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut grow = |x: f64, y: f64| {
        min.0 = min.0.min(x);
        min.1 = min.1.min(y);
        max.0 = max.0.max(x);
        max.1 = max.1.max(y);
    };
    for item in &snap.scene {
        match item {
            SceneItem::Table(a, b, c, d) | SceneItem::Bin(a, b, c, d) => {
                grow(*a, *b);
                grow(*c, *d);
            }
            SceneItem::Obstacle(pts) => pts.iter().for_each(|p| grow(p.0, p.1)),
            SceneItem::DiscObject { radius, at, .. } => {
                grow(at.0 - radius, at.1 - radius);
                grow(at.0 + radius, at.1 + radius);
            }
            SceneItem::PolyObject { vertices, at, .. } => {
                vertices.iter().for_each(|p| grow(at.0 + p.0, at.1 + p.1))
            }
        }
    }
    if !min.0.is_finite() {
        min = (0.0, 0.0);
        max = (1.0, 1.0);
    }
    let pad = 0.08;
    let scale = 500.0;
    let w = (max.0 - min.0 + 2.0 * pad) * scale;
    let h = (max.1 - min.1 + 2.0 * pad) * scale;
    let tx = |x: f64| (x - min.0 + pad) * scale;
    let ty = |y: f64| (max.1 + pad - y) * scale; // flip y

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.0} {h:.0}\">"
    );
    let _ = writeln!(out, "<rect width=\"{w:.0}\" height=\"{h:.0}\" fill=\"#fafafa\"/>");

    for item in &snap.scene {
        match item {
            SceneItem::Table(a, b, c, d) => {
                let _ = writeln!(
                    out,
                    "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"#e8dcc0\" stroke=\"#9a8b66\"/>",
                    tx(*a), ty(*d), (c - a) * scale, (d - b) * scale
                );
            }
            SceneItem::Bin(a, b, c, d) => {
                let _ = writeln!(
                    out,
                    "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"#cfd8dc\" stroke=\"#607d8b\"/>",
                    tx(*a), ty(*d), (c - a) * scale, (d - b) * scale
                );
            }
            SceneItem::Obstacle(pts) => {
                let points: Vec<String> = pts
                    .iter()
                    .map(|p| format!("{:.1},{:.1}", tx(p.0), ty(p.1)))
                    .collect();
                let _ = writeln!(
                    out,
                    "<polygon points=\"{}\" fill=\"#55524e\" stroke=\"#2f2d2b\"/>",
                    points.join(" ")
                );
            }
            SceneItem::DiscObject { radius, at, .. } => {
                let _ = writeln!(
                    out,
                    "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"{:.1}\" fill=\"none\" stroke=\"#7b5e3b\" stroke-width=\"2\" stroke-dasharray=\"6 4\"/>",
                    tx(at.0), ty(at.1), radius * scale
                );
            }
            SceneItem::PolyObject { vertices, at, .. } => {
                let (sin_t, cos_t) = at.2.sin_cos();
                let points: Vec<String> = vertices
                    .iter()
                    .map(|(px, py)| {
                        let x = at.0 + cos_t * px - sin_t * py;
                        let y = at.1 + sin_t * px + cos_t * py;
                        format!("{:.1},{:.1}", tx(x), ty(y))
                    })
                    .collect();
                let _ = writeln!(
                    out,
                    "<polygon points=\"{}\" fill=\"none\" stroke=\"#7b5e3b\" stroke-width=\"2\" stroke-dasharray=\"6 4\"/>",
                    points.join(" ")
                );
            }
        }
    }

    let polyline = |out: &mut String, pts: &[(f64, f64)], color: &str, width: f64, dash: &str| {
        if pts.len() < 2 {
            return;
        }
        let points: Vec<String> = pts
            .iter()
            .map(|p| format!("{:.1},{:.1}", tx(p.0), ty(p.1)))
            .collect();
        let dash_attr = if dash.is_empty() {
            String::new()
        } else {
            format!(" stroke-dasharray=\"{dash}\"")
        };
        let _ = writeln!(
            out,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"{width:.1}\" opacity=\"0.85\"{dash_attr}/>",
            points.join(" ")
        );
    };

    for rec in &snap.records {
        let color = PALETTE[(rec.index as usize) % PALETTE.len()];
        polyline(&mut out, &rec.grip_path, color, 1.2, "3 3");
        polyline(&mut out, &rec.obj_path, color, 2.5, "");
        let (ex, ey) = (tx(rec.end.0), ty(rec.end.1));
        match rec.kind {
            RecordKind::Node => {
                let fill = if rec.goal { "#d4af37" } else { color };
                let _ = writeln!(
                    out,
                    "<circle cx=\"{ex:.1}\" cy=\"{ey:.1}\" r=\"5\" fill=\"{fill}\" stroke=\"#222\"/>"
                );
            }
            RecordKind::Edge => {
                let _ = writeln!(
                    out,
                    "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"8\" height=\"8\" fill=\"{color}\" stroke=\"#222\"/>",
                    ex - 4.0,
                    ey - 4.0
                );
            }
            RecordKind::Step => {
                let _ = writeln!(
                    out,
                    "<circle cx=\"{ex:.1}\" cy=\"{ey:.1}\" r=\"4\" fill=\"{color}\" stroke=\"#222\"/>"
                );
            }
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_renders_a_small_snapshot() {
        let text = "mosaic-graph v1\n\
            scene table 0.000000 0.000000 1.200000 0.800000\n\
            scene bin 1.300000 0.250000 1.600000 0.550000\n\
            scene obstacle 0.200000 0.200000 0.300000 0.200000 0.300000 0.300000\n\
            scene object plate disc 0.100000 at 0.500000 0.400000 0.000000\n\
            node 0 skill=- cost=0.000000 goal=0 grip=0.800000,0.700000 obj=- opath= end=0.800000,0.700000,0.000000\n\
            node 1 skill=push cost=1.500000 goal=1 grip=0.100000,0.100000;0.200000,0.100000 obj=plate opath=0.300000,0.100000;0.400000,0.100000 end=0.200000,0.100000,0.000000\n\
            edge 0 from=0 to=1 skill=push cost=0.700000 grip=0.800000,0.700000;0.100000,0.100000 obj=plate opath=0.500000,0.400000;0.300000,0.100000 end=0.100000,0.100000,0.000000\n";
        let snap = parse_snapshot(text).unwrap();
        assert_eq!(snap.scene.len(), 4);
        assert_eq!(snap.records.len(), 3);
        assert_eq!(snap.records[1].kind, RecordKind::Node);
        assert!(snap.records[1].goal);
        assert_eq!(snap.records[2].kind, RecordKind::Edge);

        let svg = render_svg(&snap);
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("<circle"));
        assert!(svg.contains("<rect"));
        assert!(svg.contains("<polygon"));
        // One node polyline per record with >= 2 points: node 1 has two
        // polylines (gripper + object), the edge two more.
        assert_eq!(svg.matches("<polyline").count(), 4);
    }

    #[test]
    fn empty_graph_renders_scene_only() {
        let text = "mosaic-graph v1\n\
            scene table 0.000000 0.000000 1.200000 0.800000\n\
            scene bin 1.300000 0.250000 1.600000 0.550000\n";
        let snap = parse_snapshot(text).unwrap();
        let svg = render_svg(&snap);
        assert!(svg.contains("<rect"));
        assert!(!svg.contains("<polyline"));
        assert!(!svg.contains("<circle cx"));
    }

    #[test]
    fn malformed_snapshot_is_a_parse_error() {
        assert!(parse_snapshot("bogus\n").is_err());
        assert!(parse_snapshot("mosaic-graph v1\nnode 0\n").is_err());
    }
}
