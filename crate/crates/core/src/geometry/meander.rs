use nalgebra::Vector3;

use crate::error::{invalid, Result};

/// Parametric description of the three-segment meander (µm).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanderParams {
    /// Segment length.
    pub l_m: f64,
    /// Width of the centre segment.
    pub w_mwm: f64,
    /// Width of the two outer segments.
    pub w_mwm_outer: f64,
    /// Pocket length, 0 for solid segments.
    pub l_th: f64,
    pub w_rf1: f64,
    pub w_rf2: f64,
    /// Width of the large ground electrode beside the meander.
    pub w_mws: f64,
    pub w_gap: f64,
    /// Bottom conductor layer L1.
    pub h1: f64,
    /// Via layer V1, the pocket height.
    pub h2: f64,
    /// Top conductor layer L2.
    pub h3: f64,
    /// Length of the L1 stubs between a segment end and its turn.
    pub turn_offset: f64,
    /// Width of turns, feed and ground lines.
    pub w_turn: f64,
    pub feed_length: f64,
    /// Use 2·w_gap + w_RF1 on both sides; otherwise the right side follows w_RF2.
    pub symmetric: bool,
}

impl Default for MeanderParams {
    fn default() -> Self {
        Self {
            l_m: 1000.0,
            w_mwm: 50.0,
            w_mwm_outer: 4.0,
            l_th: 200.0,
            w_rf1: 10.0,
            w_rf2: 10.0,
            w_mws: 10.0,
            w_gap: 5.0,
            h1: 4.4,
            h2: 9.5,
            h3: 5.2,
            turn_offset: 40.0,
            w_turn: 10.0,
            feed_length: 300.0,
            symmetric: true,
        }
    }
}

impl MeanderParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("l_m", self.l_m),
            ("w_mwm", self.w_mwm),
            ("w_mwm_outer", self.w_mwm_outer),
            ("w_rf1", self.w_rf1),
            ("w_rf2", self.w_rf2),
            ("w_mws", self.w_mws),
            ("w_gap", self.w_gap),
            ("h1", self.h1),
            ("h2", self.h2),
            ("h3", self.h3),
            ("turn_offset", self.turn_offset),
            ("w_turn", self.w_turn),
            ("feed_length", self.feed_length),
        ];
        for (n, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(n, format!("must be positive, got {v}")));
            }
        }
        if !(self.l_th >= 0.0) {
            return Err(invalid("l_th", "must be non-negative"));
        }
        if self.l_th >= self.l_m {
            return Err(invalid("l_th", format!("pocket {} must be shorter than the segment {}", self.l_th, self.l_m)));
        }
        Ok(())
    }

    pub fn stack_height(&self) -> f64 {
        self.h1 + self.h2 + self.h3
    }

    /// Edge-to-edge spacing between the centre segment and the outer segments.
    pub fn spacing_left(&self) -> f64 {
        2.0 * self.w_gap + self.w_rf1
    }

    pub fn spacing_right(&self) -> f64 {
        if self.symmetric {
            self.spacing_left()
        } else {
            2.0 * self.w_gap + self.w_rf2
        }
    }

    /// Centre-line x positions of the three segments.
    pub fn segment_x(&self) -> [f64; 3] {
        let half = self.w_mwm / 2.0 + self.w_mwm_outer / 2.0;
        [-(half + self.spacing_left()), 0.0, half + self.spacing_right()]
    }

    /// Mutable access by name, used by parameter sweeps.
    pub fn get_mut(&mut self, name: &str) -> Option<&mut f64> {
        Some(match name {
            "l_m" => &mut self.l_m,
            "w_mwm" => &mut self.w_mwm,
            "w_mwm_outer" => &mut self.w_mwm_outer,
            "l_th" => &mut self.l_th,
            "w_rf1" => &mut self.w_rf1,
            "w_rf2" => &mut self.w_rf2,
            "w_mws" => &mut self.w_mws,
            "w_gap" => &mut self.w_gap,
            "h1" => &mut self.h1,
            "h2" => &mut self.h2,
            "h3" => &mut self.h3,
            "turn_offset" => &mut self.turn_offset,
            "w_turn" => &mut self.w_turn,
            "feed_length" => &mut self.feed_length,
            _ => return None,
        })
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        let mut c = *self;
        c.get_mut(name).map(|v| *v)
    }

    pub fn with(&self, name: &str, value: f64) -> Result<Self> {
        let mut c = *self;
        *c.get_mut(name).ok_or_else(|| invalid(name, "no such meander parameter"))? = value;
        Ok(c)
    }
}

/// A conducting layer of a path segment: offset of its bottom face above the
/// segment bottom and its thickness (µm).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sheet {
    pub offset: f64,
    pub thickness: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentRole {
    Feed,
    /// Solid part of long segment k.
    Long(u8),
    /// Pocket part of long segment k.
    Pocket(u8),
    Turn,
    Ground,
}

/// Straight piece of conductor; `start`/`end` are on the centre line of the bottom face.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSegment {
    pub start: Vector3<f64>,
    pub end: Vector3<f64>,
    pub width: f64,
    pub sheets: Vec<Sheet>,
    pub role: SegmentRole,
}

impl PathSegment {
    pub fn length(&self) -> f64 {
        (self.end - self.start).norm()
    }

    /// Overall thickness from the bottom face to the top of the highest sheet.
    pub fn thickness(&self) -> f64 {
        self.sheets.iter().map(|s| s.offset + s.thickness).fold(0.0, f64::max)
    }

    pub fn conducting_area(&self) -> f64 {
        self.width * self.sheets.iter().map(|s| s.thickness).sum::<f64>()
    }
}

/// Connected chain of segments from the feed port "F" to the ground port "G".
#[derive(Debug, Clone, PartialEq)]
pub struct ConductorPath {
    pub segments: Vec<PathSegment>,
    pub feed_label: String,
    pub ground_label: String,
}

impl ConductorPath {
    pub fn new(segments: Vec<PathSegment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(invalid("path", "no segments"));
        }
        for (i, s) in segments.iter().enumerate() {
            if !(s.width > 0.0) || s.sheets.is_empty() || s.sheets.iter().any(|sh| !(sh.thickness > 0.0)) {
                return Err(invalid("path", format!("segment {i} has non-positive width or thickness")));
            }
            if i > 0 && (segments[i - 1].end - s.start).norm() > 1e-9 {
                return Err(invalid("path", format!("segment {i} does not start where segment {} ends", i - 1)));
            }
        }
        Ok(Self { segments, feed_label: "F".into(), ground_label: "G".into() })
    }

    /// Straight polyline with a single conducting sheet.
    pub fn polyline(points: &[Vector3<f64>], width: f64, thickness: f64) -> Result<Self> {
        let sheet = vec![Sheet { offset: 0.0, thickness }];
        let n = points.len();
        let segs = points
            .windows(2)
            .enumerate()
            .map(|(i, w)| PathSegment {
                start: w[0],
                end: w[1],
                width,
                sheets: sheet.clone(),
                role: if i == 0 {
                    SegmentRole::Feed
                } else if i + 2 == n {
                    SegmentRole::Ground
                } else {
                    SegmentRole::Turn
                },
            })
            .collect();
        Self::new(segs)
    }

    /// Number of distinct long segments.
    pub fn long_segment_count(&self) -> usize {
        let mut ks: Vec<u8> = self
            .segments
            .iter()
            .filter_map(|s| match s.role {
                SegmentRole::Long(k) | SegmentRole::Pocket(k) => Some(k),
                _ => None,
            })
            .collect();
        ks.sort_unstable();
        ks.dedup();
        ks.len()
    }

    /// Σ length/area (µm⁻¹), proportional to the DC resistance.
    pub fn resistance_factor(&self) -> f64 {
        self.segments.iter().map(|s| s.length() / s.conducting_area()).sum()
    }
}

/// Builds the meander: feed → segment 1 (+y) → turn → segment 2 (−y) → turn →
/// segment 3 (+y) → ground. Long segments span L1+V1+L2 with the top face at
/// z = 0; stubs, turns, feed and ground run in L1 only.
pub fn build_meander(p: &MeanderParams) -> Result<ConductorPath> {
    p.validate()?;
    let h = p.stack_height();
    let bottom = -h;
    let solid = vec![Sheet { offset: 0.0, thickness: h }];
    let pocket = vec![Sheet { offset: 0.0, thickness: p.h1 }, Sheet { offset: p.h1 + p.h2, thickness: p.h3 }];
    let l1 = vec![Sheet { offset: 0.0, thickness: p.h1 }];
    let xs = p.segment_x();
    let widths = [p.w_mwm_outer, p.w_mwm, p.w_mwm_outer];
    let half = p.l_m / 2.0;
    let v = |x: f64, y: f64| Vector3::new(x, y, bottom);
    let mut segs = Vec::new();
    let mut push = |start, end, width, sheets: &Vec<Sheet>, role| {
        segs.push(PathSegment { start, end, width, sheets: sheets.clone(), role })
    };

    push(v(xs[0], -half - p.feed_length), v(xs[0], -half), p.w_turn, &l1, SegmentRole::Feed);
    for k in 0..3 {
        let dir = if k == 1 { -1.0 } else { 1.0 };
        let (y0, y1) = (-dir * half, dir * half);
        if p.l_th > 0.0 {
            let (a, b) = (-dir * p.l_th / 2.0, dir * p.l_th / 2.0);
            push(v(xs[k], y0), v(xs[k], a), widths[k], &solid, SegmentRole::Long(k as u8));
            push(v(xs[k], a), v(xs[k], b), widths[k], &pocket, SegmentRole::Pocket(k as u8));
            push(v(xs[k], b), v(xs[k], y1), widths[k], &solid, SegmentRole::Long(k as u8));
        } else {
            push(v(xs[k], y0), v(xs[k], y1), widths[k], &solid, SegmentRole::Long(k as u8));
        }
        if k < 2 {
            let yt = y1 + dir * p.turn_offset;
            push(v(xs[k], y1), v(xs[k], yt), p.w_turn, &l1, SegmentRole::Turn);
            push(v(xs[k], yt), v(xs[k + 1], yt), p.w_turn, &l1, SegmentRole::Turn);
            push(v(xs[k + 1], yt), v(xs[k + 1], y1), p.w_turn, &l1, SegmentRole::Turn);
        }
    }
    push(v(xs[2], half), v(xs[2], half + p.feed_length), p.w_turn, &l1, SegmentRole::Ground);
    ConductorPath::new(segs)
}
