//! Planar helpers on complex points: convex hulls, segment distances and
//! winding-number membership against a closed polyline.

use num_complex::Complex64;

fn cross(o: Complex64, a: Complex64, b: Complex64) -> f64 {
    (a.re - o.re) * (b.im - o.im) - (a.im - o.im) * (b.re - o.re)
}

/// Convex hull by monotone chain, counter-clockwise, without repeated or
/// collinear vertices. Degenerate inputs give one or two vertices.
pub fn convex_hull(points: &[Complex64]) -> Vec<Complex64> {
    let mut pts: Vec<Complex64> = points.to_vec();
    pts.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Complex64> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Complex64>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2
                && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
            {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    if hull.len() == 2 && hull[0] == hull[1] {
        hull.pop();
    }
    hull
}

/// Adds `p` to a counter-clockwise hull in place, in time linear in the
/// hull size.
pub fn hull_insert(hull: &mut Vec<Complex64>, p: Complex64) {
    let m = hull.len();
    if m < 3 {
        hull.push(p);
        *hull = convex_hull(hull);
        return;
    }
    let visible: Vec<bool> = (0..m)
        .map(|i| cross(hull[i], hull[(i + 1) % m], p) < 0.0)
        .collect();
    let Some(first) = (0..m).find(|&i| visible[i] && !visible[(i + m - 1) % m]) else {
        if visible[0] {
            // every edge sees p: cannot happen for a proper hull
            hull.push(p);
            *hull = convex_hull(hull);
        }
        return;
    };
    let mut last = first;
    while visible[(last + 1) % m] {
        last = (last + 1) % m;
    }
    // keep last+1 .. first (cyclically), then p
    let mut out = Vec::with_capacity(m + 1);
    let mut i = (last + 1) % m;
    loop {
        out.push(hull[i]);
        if i == first {
            break;
        }
        i = (i + 1) % m;
    }
    out.push(p);
    *hull = out;
}

/// Distance from `z` to the segment `[a, b]`.
pub fn segment_distance(z: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (z - a).norm();
    }
    let t = ((z - a).re * ab.re + (z - a).im * ab.im) / len2;
    let t = t.clamp(0.0, 1.0);
    (z - (a + ab * t)).norm()
}

/// Membership in a hull returned by [`convex_hull`], inflated by `tol`.
pub fn hull_contains_point(hull: &[Complex64], z: Complex64, tol: f64) -> bool {
    match hull.len() {
        0 => false,
        1 => (z - hull[0]).norm() <= tol,
        2 => segment_distance(z, hull[0], hull[1]) <= tol,
        m => {
            (0..m).all(|i| {
                let (a, b) = (hull[i], hull[(i + 1) % m]);
                cross(a, b, z) / (b - a).norm() >= -tol
            })
        }
    }
}

/// Winding number of the closed polyline `poly` (first point repeated at
/// the end or not) around `z`.
pub fn winding_number(poly: &[Complex64], z: Complex64) -> i64 {
    let m = poly.len();
    let mut w = 0;
    for i in 0..m {
        w += crossing(poly[i], poly[(i + 1) % m], z);
    }
    w
}

fn crossing(a: Complex64, b: Complex64, z: Complex64) -> i64 {
    if a.im <= z.im {
        if b.im > z.im && cross(a, b, z) > 0.0 {
            return 1;
        }
    } else if b.im <= z.im && cross(a, b, z) < 0.0 {
        return -1;
    }
    0
}

/// A closed polyline with its edges bucketed by height, for fast winding
/// and distance queries.
#[derive(Debug, Clone)]
pub struct BoundaryIndex {
    points: Vec<Complex64>,
    y_min: f64,
    bin_height: f64,
    bins: Vec<Vec<u32>>,
}

impl BoundaryIndex {
    pub fn new(points: &[Complex64]) -> Self {
        let points = points.to_vec();
        let m = points.len();
        let y_min = points.iter().map(|z| z.im).fold(f64::INFINITY, f64::min);
        let y_max = points.iter().map(|z| z.im).fold(f64::NEG_INFINITY, f64::max);
        let nbins = (m / 4).clamp(1, 4096);
        let span = (y_max - y_min).max(f64::MIN_POSITIVE);
        let bin_height = span / nbins as f64;
        let mut bins = vec![Vec::new(); nbins];
        for i in 0..m {
            let (a, b) = (points[i], points[(i + 1) % m]);
            let lo = Self::bin_of(y_min, bin_height, nbins, a.im.min(b.im));
            let hi = Self::bin_of(y_min, bin_height, nbins, a.im.max(b.im));
            for bin in &mut bins[lo..=hi] {
                bin.push(i as u32);
            }
        }
        Self {
            points,
            y_min,
            bin_height,
            bins,
        }
    }

    fn bin_of(y_min: f64, h: f64, nbins: usize, y: f64) -> usize {
        let k = ((y - y_min) / h).floor();
        if k <= 0.0 {
            0
        } else {
            (k as usize).min(nbins - 1)
        }
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    fn edge(&self, i: u32) -> (Complex64, Complex64) {
        let i = i as usize;
        (self.points[i], self.points[(i + 1) % self.points.len()])
    }

    pub fn winding_number(&self, z: Complex64) -> i64 {
        let nb = self.bins.len();
        let y_max = self.y_min + self.bin_height * nb as f64;
        if z.im < self.y_min || z.im > y_max {
            return 0;
        }
        let bin = Self::bin_of(self.y_min, self.bin_height, nb, z.im);
        self.bins[bin]
            .iter()
            .map(|&i| {
                let (a, b) = self.edge(i);
                crossing(a, b, z)
            })
            .sum()
    }

    /// Distance from `z` to the polyline, exact when it is at most `reach`
    /// and otherwise some value above `reach`.
    pub fn distance_within(&self, z: Complex64, reach: f64) -> f64 {
        let nb = self.bins.len();
        let lo_y = z.im - reach;
        let hi_y = z.im + reach;
        let y_max = self.y_min + self.bin_height * nb as f64;
        if hi_y < self.y_min || lo_y > y_max {
            return f64::INFINITY;
        }
        let lo = Self::bin_of(self.y_min, self.bin_height, nb, lo_y);
        let hi = Self::bin_of(self.y_min, self.bin_height, nb, hi_y);
        let mut best = f64::INFINITY;
        for bin in &self.bins[lo..=hi] {
            for &i in bin {
                let (a, b) = self.edge(i);
                best = best.min(segment_distance(z, a, b));
            }
        }
        best
    }

    /// Distance from `z` to the polyline.
    pub fn distance(&self, z: Complex64) -> f64 {
        let m = self.points.len();
        (0..m)
            .map(|i| segment_distance(z, self.points[i], self.points[(i + 1) % m]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Inside, or within `tol` of the polyline.
    pub fn contains(&self, z: Complex64, tol: f64) -> bool {
        self.winding_number(z) != 0 || self.distance_within(z, tol) <= tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn hull_of_square_with_interior_points() {
        let pts = [c(0.0, 0.0), c(1.0, 0.0), c(1.0, 1.0), c(0.0, 1.0), c(0.5, 0.5), c(0.5, 0.0)];
        let hull = convex_hull(&pts);
        assert_eq!(hull.len(), 4);
        assert!(hull_contains_point(&hull, c(0.2, 0.9), 0.0));
        assert!(hull_contains_point(&hull, c(1.0, 0.5), 0.0));
        assert!(!hull_contains_point(&hull, c(1.1, 0.5), 0.0));
        assert!(hull_contains_point(&hull, c(1.1, 0.5), 0.1 + 1e-12));
    }

    #[test]
    fn degenerate_hulls() {
        assert_eq!(convex_hull(&[c(1.0, 1.0), c(1.0, 1.0)]).len(), 1);
        let seg = convex_hull(&[c(-0.5, 0.0), c(1.0, 0.0), c(0.25, 0.0)]);
        assert_eq!(seg.len(), 2);
        assert!(hull_contains_point(&seg, c(0.0, 0.0), 1e-15));
        assert!(!hull_contains_point(&seg, c(0.0, 0.1), 1e-15));
    }

    #[test]
    fn winding_of_square() {
        let sq = [c(0.0, 0.0), c(1.0, 0.0), c(1.0, 1.0), c(0.0, 1.0)];
        assert_eq!(winding_number(&sq, c(0.5, 0.5)), 1);
        assert_eq!(winding_number(&sq, c(1.5, 0.5)), 0);
        let rev: Vec<_> = sq.iter().rev().copied().collect();
        assert_eq!(winding_number(&rev, c(0.5, 0.5)), -1);
    }

    #[test]
    fn segment_distance_cases() {
        assert!((segment_distance(c(0.0, 1.0), c(-1.0, 0.0), c(1.0, 0.0)) - 1.0).abs() < 1e-15);
        assert!((segment_distance(c(3.0, 4.0), c(-1.0, 0.0), c(0.0, 0.0)) - 5.0).abs() < 1e-15);
    }

    fn polygon(m: usize) -> Vec<Complex64> {
        // star-shaped wobbly polygon
        (0..m)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
                Complex64::from_polar(1.0 + 0.3 * (5.0 * t).sin(), t)
            })
            .collect()
    }

    proptest! {
        #[test]
        fn index_agrees_with_brute_force(x in -1.5f64..1.5, y in -1.5f64..1.5) {
            let poly = polygon(257);
            let idx = BoundaryIndex::new(&poly);
            let z = c(x, y);
            prop_assert_eq!(idx.winding_number(z), winding_number(&poly, z));
            let d = idx.distance(z);
            let near = idx.distance_within(z, 0.05);
            if d <= 0.05 {
                prop_assert!((near - d).abs() < 1e-15);
            } else {
                prop_assert!(near > 0.05);
            }
        }

        #[test]
        fn incremental_hull_matches_batch(pts in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..40)) {
            let pts: Vec<Complex64> = pts.into_iter().map(|(a, b)| c(a, b)).collect();
            let mut hull = Vec::new();
            for p in &pts {
                if !hull_contains_point(&hull, *p, 0.0) {
                    hull_insert(&mut hull, *p);
                }
            }
            let batch = convex_hull(&pts);
            for p in &pts {
                prop_assert!(hull_contains_point(&hull, *p, 1e-12));
            }
            for v in &batch {
                prop_assert!(hull.contains(v));
            }
        }

        #[test]
        fn hull_contains_its_inputs(pts in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..40)) {
            let pts: Vec<Complex64> = pts.into_iter().map(|(a, b)| c(a, b)).collect();
            let hull = convex_hull(&pts);
            for p in &pts {
                prop_assert!(hull_contains_point(&hull, *p, 1e-12));
            }
            // every hull vertex is an input point
            for h in &hull {
                prop_assert!(pts.contains(h));
            }
        }
    }
}
