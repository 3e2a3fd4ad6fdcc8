//! Reconstruction of the multilayer trap: meander, RF rails, grounds,
//! neighbouring microwave conductors and ten segmented DC electrodes.

use nalgebra::Vector3;

use super::layout::{Electrode, Layer, Layout, Role};
use super::meander::{build_meander, ConductorPath, MeanderParams};
use super::polygon::Rect;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceTrap {
    pub meander: MeanderParams,
    /// Length of the RF rails along y (µm).
    pub rf_length: f64,
    /// Width of MWC1 and MWC2.
    pub w_mwc: f64,
    /// Lateral extent of each DC electrode.
    pub dc_width: f64,
    /// y boundaries of the five DC electrodes on each side.
    pub dc_edges: [f64; 6],
    /// Half-length of the straight part of MWC1/MWC2 along y.
    pub mwc_half_length: f64,
    pub substrate: f64,
}

impl Default for ReferenceTrap {
    fn default() -> Self {
        Self {
            meander: MeanderParams { w_rf2: 9.5, ..MeanderParams::default() },
            rf_length: 1400.0,
            w_mwc: 10.0,
            dc_width: 200.0,
            dc_edges: [-450.0, -150.0, -50.0, 50.0, 150.0, 450.0],
            mwc_half_length: 450.0,
            substrate: 1500.0,
        }
    }
}

impl ReferenceTrap {
    pub fn with_meander(meander: MeanderParams) -> Self {
        Self { meander, ..Self::default() }
    }

    pub fn path(&self) -> Result<ConductorPath> {
        build_meander(&self.meander)
    }

    /// x extents (left, right) of the outer meander edges.
    fn meander_edges(&self) -> (f64, f64) {
        let xs = self.meander.segment_x();
        let h = self.meander.w_mwm_outer / 2.0;
        (xs[0] - h, xs[2] + h)
    }

    /// x extents of MWC1 (left) and MWC2 (right).
    pub fn mwc_x(&self) -> ([f64; 2], [f64; 2]) {
        let p = &self.meander;
        let (l, r) = self.meander_edges();
        let inner_l = l - p.w_gap - p.w_mws - p.w_gap;
        let inner_r = r + p.w_gap + p.w_mws + p.w_gap;
        ([inner_l - self.w_mwc, inner_l], [inner_r, inner_r + self.w_mwc])
    }

    pub fn layout(&self) -> Result<Layout> {
        self.meander.validate()?;
        let p = &self.meander;
        let top = "L2";
        let ly = self.rf_length / 2.0;
        let hw = p.w_mwm / 2.0;
        let half = p.l_m / 2.0;
        let xs = p.segment_x();
        let mut e = Vec::new();
        e.push(Electrode::from_rects(
            "RF1",
            Role::RF,
            top,
            &[Rect::new(-hw - p.w_gap - p.w_rf1, -hw - p.w_gap, -ly, ly)],
        ));
        e.push(Electrode::from_rects(
            "RF2",
            Role::RF,
            top,
            &[Rect::new(hw + p.w_gap, hw + p.w_gap + p.w_rf2, -ly, ly)],
        ));
        let widths = [p.w_mwm_outer, p.w_mwm, p.w_mwm_outer];
        let segs: Vec<Rect> =
            (0..3).map(|k| Rect::new(xs[k] - widths[k] / 2.0, xs[k] + widths[k] / 2.0, -half, half)).collect();
        e.push(Electrode::from_rects("MWM", Role::MW, top, &segs));
        let (l, r) = self.meander_edges();
        e.push(Electrode::from_rects("MWS", Role::GND, top, &[Rect::new(l - p.w_gap - p.w_mws, l - p.w_gap, -ly, ly)]));
        e.push(Electrode::from_rects(
            "GND_R",
            Role::GND,
            top,
            &[Rect::new(r + p.w_gap, r + p.w_gap + p.w_mws, -ly, ly)],
        ));
        let (c1, c2) = self.mwc_x();
        let m = self.mwc_half_length;
        e.push(Electrode::from_rects("MWC1", Role::MW, top, &[Rect::new(c1[0], c1[1], -m, m)]));
        e.push(Electrode::from_rects("MWC2", Role::MW, top, &[Rect::new(c2[0], c2[1], -m, m)]));
        let (dl, dr) = (c1[0] - p.w_gap, c2[1] + p.w_gap);
        for k in 0..5 {
            let (y0, y1) = (self.dc_edges[k], self.dc_edges[k + 1]);
            e.push(Electrode::from_rects(
                format!("DC{}", k + 1),
                Role::DC,
                top,
                &[Rect::new(dl - self.dc_width, dl, y0, y1)],
            ));
            e.push(Electrode::from_rects(
                format!("DC{}", k + 6),
                Role::DC,
                top,
                &[Rect::new(dr, dr + self.dc_width, y0, y1)],
            ));
        }
        let layout = Layout {
            layers: vec![
                Layer { name: "L1".into(), thickness: p.h1 },
                Layer { name: "V1".into(), thickness: p.h2 },
                Layer { name: top.into(), thickness: p.h3 },
            ],
            electrodes: e,
            substrate: (self.substrate, self.substrate),
        };
        layout.validate()?;
        Ok(layout)
    }

    /// Centre line of MWC2 as a U-shaped single-sheet conductor in L2: up the
    /// strip and away from the trap at both ends.
    pub fn mwc2_path(&self) -> Result<ConductorPath> {
        let (_, c2) = self.mwc_x();
        let x = 0.5 * (c2[0] + c2[1]);
        let m = self.mwc_half_length;
        let z = -self.meander.h3;
        let out = x + 200.0;
        ConductorPath::polyline(
            &[Vector3::new(out, -m, z), Vector3::new(x, -m, z), Vector3::new(x, m, z), Vector3::new(out, m, z)],
            self.w_mwc,
            self.meander.h3,
        )
    }
}

/// Symmetric five-wire test layout: two RF strips of width `w_rf` separated by a
/// central DC electrode of width `w_dc`, flanked by two grounds.
pub fn five_wire(w_dc: f64, w_rf: f64, w_gnd: f64, length: f64) -> Layout {
    let h = length / 2.0;
    let a = w_dc / 2.0;
    let b = a + w_rf;
    let c = b + w_gnd;
    let layout = Layout {
        layers: vec![Layer { name: "L2".into(), thickness: 5.0 }],
        electrodes: vec![
            Electrode::from_rects("GND1", Role::GND, "L2", &[Rect::new(-c, -b, -h, h)]),
            Electrode::from_rects("RF1", Role::RF, "L2", &[Rect::new(-b, -a, -h, h)]),
            Electrode::from_rects("DC", Role::DC, "L2", &[Rect::new(-a, a, -h, h)]),
            Electrode::from_rects("RF2", Role::RF, "L2", &[Rect::new(a, b, -h, h)]),
            Electrode::from_rects("GND2", Role::GND, "L2", &[Rect::new(b, c, -h, h)]),
        ],
        substrate: (2.0 * c + 10.0, length + 10.0),
    };
    layout.validate().expect("five-wire layout is valid");
    layout
}
