use crate::error::{Error, Result};

/// Cell edges of a 1D axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub edges: Vec<f64>,
}

impl Axis {
    pub fn len(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn width(&self, i: usize) -> f64 {
        self.edges[i + 1] - self.edges[i]
    }

    pub fn centre(&self, i: usize) -> f64 {
        0.5 * (self.edges[i] + self.edges[i + 1])
    }

    /// Index of the cell containing `v` (clamped to the axis).
    pub fn locate(&self, v: f64) -> usize {
        match self.edges.partition_point(|&e| e <= v) {
            0 => 0,
            k => (k - 1).min(self.len() - 1),
        }
    }
}

/// Lateral axis on [−half, half]: uniform cells of at most `fine` inside the
/// band, geometric growth (ratio `growth`, capped at `coarse`) outside it.
/// Every breakpoint becomes an edge.
pub fn lateral_axis(half: f64, band: (f64, f64), breaks: &[f64], fine: f64, growth: f64, coarse: f64) -> Axis {
    let mut pts: Vec<f64> = vec![-half, half, band.0, band.1];
    pts.extend(breaks.iter().copied().filter(|b| b.abs() < half));
    for (start, dir, stop) in [(band.1, 1.0, half), (band.0, -1.0, -half)] {
        let (mut x, mut h) = (start, fine);
        loop {
            h = (h * growth).min(coarse);
            x += dir * h;
            if (stop - x) * dir <= 0.5 * h {
                break;
            }
            pts.push(x);
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    let mut edges = vec![pts[0]];
    for w in pts.windows(2) {
        let inside = w[0] >= band.0 - 1e-9 && w[1] <= band.1 + 1e-9;
        let n = if inside { ((w[1] - w[0]) / fine).ceil().max(1.0) as usize } else { 1 };
        for k in 1..=n {
            edges.push(w[0] + (w[1] - w[0]) * k as f64 / n as f64);
        }
    }
    Axis { edges }
}

/// Vertical axis from the top surface (z = 0) downwards through named layers.
/// Thin layers use uniform cells of at most `fine`; the last layer grows
/// geometrically from `fine` up to `coarse`.
pub fn stack_axis(layers: &[(&str, f64)], fine: f64, growth: f64, coarse: f64) -> Result<(Axis, Vec<(usize, usize)>)> {
    let mut edges = vec![0.0];
    let mut spans = Vec::new();
    let mut z = 0.0;
    for (k, &(name, h)) in layers.iter().enumerate() {
        let first = edges.len() - 1;
        if k + 1 < layers.len() {
            let n = (h / fine - 1e-9).ceil() as usize;
            if n < 2 {
                return Err(Error::Thermal(format!(
                    "layer {name} ({h} µm) resolved by {n} cell(s); need at least 2 (cell size {fine} µm)"
                )));
            }
            for i in 1..=n {
                edges.push(z - h * i as f64 / n as f64);
            }
        } else {
            let mut d = 0.0;
            let mut step = fine;
            while d + step < h - 0.5 * step {
                d += step;
                edges.push(z - d);
                step = (step * growth).min(coarse);
            }
            edges.push(z - h);
        }
        z -= h;
        spans.push((first, edges.len() - 1));
    }
    edges.reverse();
    let n = edges.len() - 1;
    // spans were counted from the top; convert to bottom-up cell indices
    let spans = spans.into_iter().map(|(a, b)| (n - b, n - a)).collect();
    Ok((Axis { edges }, spans))
}
