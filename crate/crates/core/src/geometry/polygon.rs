/// Axis-aligned rectangle in the trap plane (µm). Bounds may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self { x0: x0.min(x1), x1: x0.max(x1), y0: y0.min(y1), y1: y0.max(y1) }
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    /// True when the interiors intersect with positive area.
    pub fn overlaps(&self, o: &Rect) -> bool {
        self.x0.max(o.x0) < self.x1.min(o.x1) && self.y0.max(o.y0) < self.y1.min(o.y1)
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        Self { x0: self.x0 + dx, x1: self.x1 + dx, y0: self.y0 + dy, y1: self.y1 + dy }
    }

    pub fn to_polygon(&self) -> Polygon {
        Polygon::new(vec![[self.x0, self.y0], [self.x1, self.y0], [self.x1, self.y1], [self.x0, self.y1]])
    }
}

/// Closed rectilinear polygon; the closing vertex is implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    pub points: Vec<[f64; 2]>,
}

impl Polygon {
    pub fn new(mut points: Vec<[f64; 2]>) -> Self {
        if points.len() > 1 && points.first() == points.last() {
            points.pop();
        }
        Self { points }
    }

    fn edges(&self) -> impl Iterator<Item = ([f64; 2], [f64; 2])> + '_ {
        let n = self.points.len();
        (0..n).map(move |i| (self.points[i], self.points[(i + 1) % n]))
    }

    pub fn signed_area(&self) -> f64 {
        0.5 * self.edges().map(|(a, b)| a[0] * b[1] - b[0] * a[1]).sum::<f64>()
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a[1] > p[1]) != (b[1] > p[1]) {
                let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
                if p[0] < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    pub fn bbox(&self) -> Rect {
        let (mut r0, mut r1) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in &self.points {
            for k in 0..2 {
                r0[k] = r0[k].min(p[k]);
                r1[k] = r1[k].max(p[k]);
            }
        }
        Rect::new(r0[0], r1[0], r0[1], r1[1])
    }

    /// Describes why the polygon is not a simple rectilinear polygon, if it is not.
    pub fn rectilinear_defect(&self) -> Option<String> {
        if self.points.len() < 4 {
            return Some(format!("{} vertices, need at least 4", self.points.len()));
        }
        for (i, (a, b)) in self.edges().enumerate() {
            if a == b {
                return Some(format!("zero-length edge at vertex {i}"));
            }
            if a[0] != b[0] && a[1] != b[1] {
                return Some(format!("edge {i} is not axis-aligned"));
            }
        }
        let e: Vec<_> = self.edges().collect();
        let n = e.len();
        for i in 0..n {
            for j in (i + 1)..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if !adjacent && segments_touch(e[i], e[j]) {
                    return Some(format!("edges {i} and {j} intersect"));
                }
            }
        }
        if self.signed_area().abs() == 0.0 {
            return Some("zero area".into());
        }
        None
    }

    /// Exact decomposition into disjoint rectangles on the vertex grid.
    pub fn rectangles(&self) -> Vec<Rect> {
        let mut xs: Vec<f64> = self.points.iter().map(|p| p[0]).collect();
        let mut ys: Vec<f64> = self.points.iter().map(|p| p[1]).collect();
        for v in [&mut xs, &mut ys] {
            v.sort_by(f64::total_cmp);
            v.dedup();
        }
        let mut out = Vec::new();
        for i in 0..xs.len().saturating_sub(1) {
            let xc = 0.5 * (xs[i] + xs[i + 1]);
            let mut run: Option<f64> = None;
            for j in 0..ys.len() - 1 {
                let inside = self.contains([xc, 0.5 * (ys[j] + ys[j + 1])]);
                match (inside, run) {
                    (true, None) => run = Some(ys[j]),
                    (false, Some(y0)) => {
                        out.push(Rect::new(xs[i], xs[i + 1], y0, ys[j]));
                        run = None;
                    }
                    _ => {}
                }
            }
            if let Some(y0) = run {
                out.push(Rect::new(xs[i], xs[i + 1], y0, ys[ys.len() - 1]));
            }
        }
        out
    }
}

fn segments_touch(a: ([f64; 2], [f64; 2]), b: ([f64; 2], [f64; 2])) -> bool {
    let lo = |s: ([f64; 2], [f64; 2]), k: usize| s.0[k].min(s.1[k]);
    let hi = |s: ([f64; 2], [f64; 2]), k: usize| s.0[k].max(s.1[k]);
    // axis-aligned segments intersect iff their bounding boxes do
    lo(a, 0) <= hi(b, 0) && lo(b, 0) <= hi(a, 0) && lo(a, 1) <= hi(b, 1) && lo(b, 1) <= hi(a, 1)
}
