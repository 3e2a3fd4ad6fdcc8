use serde::{Deserialize, Serialize};

use super::polygon::{Polygon, Rect};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    RF,
    DC,
    MW,
    GND,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub name: String,
    /// µm
    pub thickness: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Electrode {
    pub id: String,
    pub role: Role,
    pub layer: String,
    pub polygons: Vec<Polygon>,
    rects: Vec<Rect>,
}

impl Electrode {
    pub fn new(id: impl Into<String>, role: Role, layer: impl Into<String>, polygons: Vec<Polygon>) -> Self {
        let rects = polygons.iter().flat_map(|p| p.rectangles()).collect();
        Self { id: id.into(), role, layer: layer.into(), polygons, rects }
    }

    pub fn from_rects(id: impl Into<String>, role: Role, layer: impl Into<String>, rects: &[Rect]) -> Self {
        Self::new(id, role, layer, rects.iter().map(Rect::to_polygon).collect())
    }

    /// Disjoint rectangles covering the electrode.
    pub fn rects(&self) -> &[Rect] {
        &self.rects
    }

    pub fn area(&self) -> f64 {
        self.rects.iter().map(Rect::area).sum()
    }
}

/// Multilayer electrode geometry. Lengths in µm; the substrate is centred on
/// the origin and the topmost layer forms the trap plane z = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub layers: Vec<Layer>,
    pub electrodes: Vec<Electrode>,
    pub substrate: (f64, f64),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLayout {
    substrate: RawSubstrate,
    layers: Vec<RawLayer>,
    electrodes: Vec<RawElectrode>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSubstrate {
    width: f64,
    height: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLayer {
    name: String,
    thickness: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawElectrode {
    id: String,
    role: String,
    layer: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    polygon: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    polygons: Option<Vec<Vec<[f64; 2]>>>,
}

fn schema(msg: impl Into<String>) -> Error {
    Error::Schema(msg.into())
}

fn geom(id: &str, reason: impl Into<String>) -> Error {
    Error::Geometry { electrode: id.to_string(), reason: reason.into() }
}

/// Parses and validates a layout document.
pub fn load_layout(text: &str) -> Result<Layout> {
    let raw: RawLayout = toml::from_str(text).map_err(|e| schema(e.to_string()))?;
    let mut electrodes = Vec::with_capacity(raw.electrodes.len());
    for (i, e) in raw.electrodes.into_iter().enumerate() {
        let role = match e.role.as_str() {
            "RF" => Role::RF,
            "DC" => Role::DC,
            "MW" => Role::MW,
            "GND" => Role::GND,
            other => return Err(schema(format!("electrodes[{i}].role: unknown role `{other}`"))),
        };
        let polys = match (e.polygon, e.polygons) {
            (Some(p), None) => vec![p],
            (None, Some(ps)) => ps,
            (Some(_), Some(_)) => {
                return Err(schema(format!("electrodes[{i}]: give either `polygon` or `polygons`, not both")))
            }
            (None, None) => return Err(schema(format!("electrodes[{i}]: missing key `polygon`"))),
        };
        electrodes.push(Electrode::new(e.id, role, e.layer, polys.into_iter().map(Polygon::new).collect()));
    }
    let layout = Layout {
        layers: raw.layers.into_iter().map(|l| Layer { name: l.name, thickness: l.thickness }).collect(),
        electrodes,
        substrate: (raw.substrate.width, raw.substrate.height),
    };
    layout.validate()?;
    Ok(layout)
}

impl Layout {
    pub fn validate(&self) -> Result<()> {
        let (w, h) = self.substrate;
        if !(w > 0.0 && h > 0.0) {
            return Err(schema("substrate: width and height must be positive"));
        }
        if self.layers.is_empty() {
            return Err(schema("layers: at least one layer required"));
        }
        for (i, l) in self.layers.iter().enumerate() {
            if !(l.thickness > 0.0) {
                return Err(schema(format!("layers[{i}].thickness: must be positive (layer {})", l.name)));
            }
            if self.layers[..i].iter().any(|o| o.name == l.name) {
                return Err(schema(format!("layers[{i}].name: duplicate layer `{}`", l.name)));
            }
        }
        let extent = Rect::new(-w / 2.0, w / 2.0, -h / 2.0, h / 2.0);
        for (i, e) in self.electrodes.iter().enumerate() {
            if self.electrodes[..i].iter().any(|o| o.id == e.id) {
                return Err(geom(&e.id, "duplicate electrode id"));
            }
            if self.layer(&e.layer).is_none() {
                return Err(schema(format!("electrodes[{i}].layer: unknown layer `{}`", e.layer)));
            }
            if e.polygons.is_empty() {
                return Err(geom(&e.id, "no polygons"));
            }
            for p in &e.polygons {
                if let Some(d) = p.rectilinear_defect() {
                    return Err(geom(&e.id, format!("polygon is not simple and rectilinear: {d}")));
                }
                let b = p.bbox();
                if b.x0 < extent.x0 || b.x1 > extent.x1 || b.y0 < extent.y0 || b.y1 > extent.y1 {
                    return Err(geom(&e.id, "polygon extends beyond the substrate"));
                }
            }
            let own = e.rects();
            for (a, ra) in own.iter().enumerate() {
                if own[a + 1..].iter().any(|rb| ra.overlaps(rb)) {
                    return Err(geom(&e.id, "polygons of the electrode overlap each other"));
                }
            }
        }
        for (i, a) in self.electrodes.iter().enumerate() {
            for b in &self.electrodes[i + 1..] {
                if a.layer == b.layer && a.rects().iter().any(|ra| b.rects().iter().any(|rb| ra.overlaps(rb))) {
                    return Err(Error::Geometry {
                        electrode: format!("{} and {}", a.id, b.id),
                        reason: format!("overlap on layer {}", a.layer),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn layer(&self, name: &str) -> Option<&Layer> {
        self.layers.iter().find(|l| l.name == name)
    }

    pub fn electrode(&self, id: &str) -> Option<&Electrode> {
        self.electrodes.iter().find(|e| e.id == id)
    }

    /// Name of the topmost layer, which holds the trap-plane electrodes.
    pub fn top_layer(&self) -> &str {
        &self.layers.last().expect("validated layout has layers").name
    }

    /// Trap-plane electrodes with the given role.
    pub fn surface(&self, role: Role) -> impl Iterator<Item = &Electrode> {
        let top = self.top_layer().to_string();
        self.electrodes.iter().filter(move |e| e.role == role && e.layer == top)
    }

    pub fn count(&self, role: Role) -> usize {
        self.electrodes.iter().filter(|e| e.role == role).count()
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Layout {
        let mut out = self.clone();
        for e in &mut out.electrodes {
            let polys = e
                .polygons
                .iter()
                .map(|p| Polygon::new(p.points.iter().map(|q| [q[0] + dx, q[1] + dy]).collect()))
                .collect();
            *e = Electrode::new(e.id.clone(), e.role, e.layer.clone(), polys);
        }
        out
    }

    /// Serializes to the layout document format.
    pub fn to_text(&self) -> String {
        let raw = RawLayout {
            substrate: RawSubstrate { width: self.substrate.0, height: self.substrate.1 },
            layers: self.layers.iter().map(|l| RawLayer { name: l.name.clone(), thickness: l.thickness }).collect(),
            electrodes: self
                .electrodes
                .iter()
                .map(|e| {
                    let role = format!("{:?}", e.role);
                    let pts = |p: &Polygon| p.points.clone();
                    if e.polygons.len() == 1 {
                        RawElectrode {
                            id: e.id.clone(),
                            role,
                            layer: e.layer.clone(),
                            polygon: Some(pts(&e.polygons[0])),
                            polygons: None,
                        }
                    } else {
                        RawElectrode {
                            id: e.id.clone(),
                            role,
                            layer: e.layer.clone(),
                            polygon: None,
                            polygons: Some(e.polygons.iter().map(pts).collect()),
                        }
                    }
                })
                .collect(),
        };
        toml::to_string(&raw).expect("layout serializes")
    }
}
