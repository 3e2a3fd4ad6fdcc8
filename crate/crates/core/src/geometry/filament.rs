use nalgebra::Vector3;
use num_complex::Complex64;

use super::meander::{ConductorPath, PathSegment};
use crate::error::{invalid, Result};

/// Distribution of current over the thickness of each conducting sheet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurrentProfile {
    /// Uniform current density.
    Uniform,
    /// J ∝ cosh(k(v − t/2)) with k = (1 + i)/δ, δ the skin depth in µm.
    /// The sheet weights of a pocket stay proportional to the sheet areas.
    Skin { depth: f64 },
}

impl CurrentProfile {
    /// Complex weights of `n` equal layers across thickness `t`, summing to 1.
    pub fn weights(&self, t: f64, n: usize) -> Vec<Complex64> {
        let raw: Vec<Complex64> = (0..n)
            .map(|i| match *self {
                CurrentProfile::Uniform => Complex64::new(1.0, 0.0),
                CurrentProfile::Skin { depth } => {
                    let v = ((i as f64 + 0.5) / n as f64 - 0.5) * t;
                    (Complex64::new(1.0, 1.0) / depth * v).cosh()
                }
            })
            .collect();
        let s: Complex64 = raw.iter().sum();
        raw.into_iter().map(|w| w / s).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscretizeOptions {
    /// Parallel filaments across the width (uniform division).
    pub transverse_n: usize,
    /// Filament layers across each sheet's thickness.
    pub depth_n: usize,
    pub profile: CurrentProfile,
}

impl Default for DiscretizeOptions {
    fn default() -> Self {
        Self { transverse_n: 8, depth_n: 1, profile: CurrentProfile::Uniform }
    }
}

impl DiscretizeOptions {
    pub fn uniform(transverse_n: usize) -> Self {
        Self { transverse_n, depth_n: 1, profile: CurrentProfile::Uniform }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilamentKind {
    /// Discretizes a path segment (index into the source path).
    Conductor(usize),
    /// Short link carrying current between a filament end and a junction node.
    Connector,
}

/// Straight current element; coordinates in µm, current in A.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Filament {
    pub start: Vector3<f64>,
    pub end: Vector3<f64>,
    pub current: Complex64,
    pub start_node: usize,
    pub end_node: usize,
    pub kind: FilamentKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilamentSet {
    pub filaments: Vec<Filament>,
    pub nodes: Vec<Vector3<f64>>,
    pub feed_node: usize,
    pub ground_node: usize,
    pub drive: Complex64,
    /// Source path, if the set was discretized from one.
    pub path: Option<ConductorPath>,
}

impl FilamentSet {
    /// Set with no junction bookkeeping, e.g. analytic test configurations.
    /// The given currents are taken per ampere of drive.
    pub fn from_segments(segs: &[(Vector3<f64>, Vector3<f64>, Complex64)]) -> Self {
        let mut nodes = Vec::new();
        let filaments = segs
            .iter()
            .map(|&(a, b, c)| {
                nodes.push(a);
                nodes.push(b);
                Filament {
                    start: a,
                    end: b,
                    current: c,
                    start_node: nodes.len() - 2,
                    end_node: nodes.len() - 1,
                    kind: FilamentKind::Conductor(0),
                }
            })
            .collect();
        Self { filaments, nodes, feed_node: 0, ground_node: 0, drive: Complex64::new(1.0, 0.0), path: None }
    }

    pub fn conductors(&self) -> impl Iterator<Item = &Filament> {
        self.filaments.iter().filter(|f| matches!(f.kind, FilamentKind::Conductor(_)))
    }

    /// Every current multiplied by `factor`.
    pub fn scaled(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        for f in &mut out.filaments {
            f.current *= factor;
        }
        out.drive *= factor;
        out
    }

    /// Concatenation of two sets (node indices of `other` are shifted).
    pub fn merged(&self, other: &FilamentSet) -> Self {
        let mut out = self.clone();
        let off = out.nodes.len();
        out.nodes.extend_from_slice(&other.nodes);
        out.filaments.extend(other.filaments.iter().map(|f| Filament {
            start_node: f.start_node + off,
            end_node: f.end_node + off,
            ..*f
        }));
        out
    }

    /// Net current flowing into each node.
    pub fn node_balance(&self) -> Vec<Complex64> {
        let mut net = vec![Complex64::new(0.0, 0.0); self.nodes.len()];
        for f in &self.filaments {
            net[f.end_node] += f.current;
            net[f.start_node] -= f.current;
        }
        net
    }

    /// Largest Kirchhoff violation at interior nodes, relative to |drive|.
    pub fn kirchhoff_residual(&self) -> f64 {
        let scale = self.drive.norm().max(f64::MIN_POSITIVE);
        self.node_balance()
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != self.feed_node && *i != self.ground_node)
            .map(|(_, c)| c.norm() / scale)
            .fold(0.0, f64::max)
    }

    /// Current leaving the feed node.
    pub fn feed_current(&self) -> Complex64 {
        -self.node_balance()[self.feed_node]
    }
}

struct Strand {
    u: f64,
    z: f64,
    column: usize,
    weight: Complex64,
}

fn strands(seg: &PathSegment, opts: &DiscretizeOptions) -> Vec<Strand> {
    let nt = opts.transverse_n;
    let total: f64 = seg.sheets.iter().map(|s| s.thickness).sum();
    let mut out = Vec::new();
    for c in 0..nt {
        let u = ((c as f64 + 0.5) / nt as f64 - 0.5) * seg.width;
        for sh in &seg.sheets {
            let frac = sh.thickness / total;
            for (k, w) in opts.profile.weights(sh.thickness, opts.depth_n).into_iter().enumerate() {
                let z = sh.offset + (k as f64 + 0.5) / opts.depth_n as f64 * sh.thickness;
                out.push(Strand { u, z, column: c, weight: w * frac / nt as f64 });
            }
        }
    }
    out
}

fn lateral(seg: &PathSegment) -> Vector3<f64> {
    let d = (seg.end - seg.start).normalize();
    Vector3::new(-d.y, d.x, 0.0)
}

enum Junction {
    Star(usize),
    Columns(Vec<usize>),
}

/// Replaces every path segment by parallel filaments and joins consecutive
/// segments through junction nodes so that Kirchhoff's law holds exactly.
pub fn discretize_conductor(path: &ConductorPath, opts: &DiscretizeOptions, drive: Complex64) -> Result<FilamentSet> {
    if opts.transverse_n == 0 || opts.depth_n == 0 {
        return Err(invalid("transverse_n", "need at least one filament across width and depth"));
    }
    for (i, s) in path.segments.iter().enumerate() {
        if s.length() <= 0.0 {
            return Err(invalid("path", format!("segment {i} has zero length")));
        }
    }
    let segs = &path.segments;
    let n = segs.len();
    let mut nodes: Vec<Vector3<f64>> = Vec::new();
    let zhat = Vector3::z();

    // junction j sits between segment j-1 and j; 0 and n are the ports
    let mut junctions = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let (prev, next) = (j.checked_sub(1).map(|i| &segs[i]), segs.get(j));
        let columnar = match (prev, next) {
            (Some(a), Some(b)) => {
                (a.end - a.start).normalize().dot(&(b.end - b.start).normalize()) > 1.0 - 1e-12 && a.width == b.width
            }
            _ => false,
        };
        let point = next.map(|s| s.start).unwrap_or_else(|| segs[n - 1].end);
        if columnar {
            let (a, b) = (prev.unwrap(), next.unwrap());
            let zmid = 0.5 * a.thickness().max(b.thickness());
            let lat = lateral(b);
            let cols = (0..opts.transverse_n)
                .map(|c| {
                    let u = ((c as f64 + 0.5) / opts.transverse_n as f64 - 0.5) * b.width;
                    nodes.push(point + lat * u + zhat * zmid);
                    nodes.len() - 1
                })
                .collect();
            junctions.push(Junction::Columns(cols));
        } else {
            let t = match (prev, next) {
                (Some(a), Some(b)) => a.thickness().min(b.thickness()),
                (Some(a), None) => a.thickness(),
                (None, Some(b)) => b.thickness(),
                (None, None) => unreachable!(),
            };
            nodes.push(point + zhat * (0.5 * t));
            junctions.push(Junction::Star(nodes.len() - 1));
        }
    }

    let mut filaments = Vec::new();
    for (i, seg) in segs.iter().enumerate() {
        let lat = lateral(seg);
        for s in strands(seg, opts) {
            let off = lat * s.u + zhat * s.z;
            let (a, b) = (seg.start + off, seg.end + off);
            let current = drive * s.weight;
            let attach = |j: &Junction| match j {
                Junction::Star(k) => *k,
                Junction::Columns(c) => c[s.column],
            };
            let (ja, jb) = (attach(&junctions[i]), attach(&junctions[i + 1]));
            let endpoint = |p: Vector3<f64>, junction: usize, nodes: &mut Vec<Vector3<f64>>| {
                if (nodes[junction] - p).norm() < 1e-9 {
                    (junction, None)
                } else {
                    nodes.push(p);
                    (nodes.len() - 1, Some(junction))
                }
            };
            let (na, link_a) = endpoint(a, ja, &mut nodes);
            let (nb, link_b) = endpoint(b, jb, &mut nodes);
            if let Some(j) = link_a {
                filaments.push(Filament {
                    start: nodes[j],
                    end: a,
                    current,
                    start_node: j,
                    end_node: na,
                    kind: FilamentKind::Connector,
                });
            }
            filaments.push(Filament {
                start: a,
                end: b,
                current,
                start_node: na,
                end_node: nb,
                kind: FilamentKind::Conductor(i),
            });
            if let Some(j) = link_b {
                filaments.push(Filament {
                    start: b,
                    end: nodes[j],
                    current,
                    start_node: nb,
                    end_node: j,
                    kind: FilamentKind::Connector,
                });
            }
        }
    }
    let port = |j: &Junction| match j {
        Junction::Star(k) => *k,
        Junction::Columns(c) => c[0],
    };
    Ok(FilamentSet {
        feed_node: port(&junctions[0]),
        ground_node: port(&junctions[n]),
        filaments,
        nodes,
        drive,
        path: Some(path.clone()),
    })
}
