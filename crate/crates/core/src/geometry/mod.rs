//! Planar footprints and the 3D solids built from them.

mod buffer;
mod solid;

pub use buffer::{buffer2d, DEFAULT_SEGMENTS};
pub use solid::{
    buffer3d, buffer3d_with, check_watertight, check_watertight_indexed, extrude, Face, SolidMesh,
    TriSurface, PLANARITY_TOLERANCE,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point2 = [f64; 2];
pub type Point3 = [f64; 3];

/// Axis-aligned bounding box in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Point2,
    pub max: Point2,
}

impl Aabb {
    pub fn of_points<'a>(points: impl IntoIterator<Item = &'a Point2>) -> Option<Aabb> {
        let mut it = points.into_iter();
        let first = *it.next()?;
        let mut b = Aabb { min: first, max: first };
        for p in it {
            b.include(*p);
        }
        Some(b)
    }

    pub fn include(&mut self, p: Point2) {
        self.min = [self.min[0].min(p[0]), self.min[1].min(p[1])];
        self.max = [self.max[0].max(p[0]), self.max[1].max(p[1])];
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        let mut b = *self;
        b.include(other.min);
        b.include(other.max);
        b
    }

    pub fn intersects(&self, other: &Aabb) -> bool {
        self.min[0] <= other.max[0]
            && other.min[0] <= self.max[0]
            && self.min[1] <= other.max[1]
            && other.min[1] <= self.max[1]
    }

    pub fn contains(&self, p: Point2) -> bool {
        p[0] >= self.min[0] && p[0] <= self.max[0] && p[1] >= self.min[1] && p[1] <= self.max[1]
    }

    pub fn width(&self) -> f64 {
        self.max[0] - self.min[0]
    }

    pub fn height(&self) -> f64 {
        self.max[1] - self.min[1]
    }
}

/// Twice the signed area of a ring (positive when counterclockwise).
fn ring_area2(ring: &[Point2]) -> f64 {
    let n = ring.len();
    let o = ring[0];
    (1..n.saturating_sub(1))
        .map(|i| {
            let a = [ring[i][0] - o[0], ring[i][1] - o[1]];
            let b = [ring[i + 1][0] - o[0], ring[i + 1][1] - o[1]];
            a[0] * b[1] - a[1] * b[0]
        })
        .sum()
}

pub fn ring_signed_area(ring: &[Point2]) -> f64 {
    if ring.len() < 3 {
        return 0.0;
    }
    ring_area2(ring) / 2.0
}

fn ring_perimeter(ring: &[Point2]) -> f64 {
    ring.iter()
        .zip(ring.iter().cycle().skip(1))
        .map(|(a, b)| (b[0] - a[0]).hypot(b[1] - a[1]))
        .sum()
}

/// Crossing-number test. Points exactly on the boundary may go either way.
fn ring_contains(ring: &[Point2], p: Point2) -> bool {
    let mut inside = false;
    let n = ring.len();
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (ring[i], ring[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

fn segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0)
    };
    (p[0] - a[0] - t * dx).hypot(p[1] - a[1] - t * dy)
}

fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn on_segment(a: Point2, b: Point2, p: Point2) -> bool {
    p[0] >= a[0].min(b[0]) && p[0] <= a[0].max(b[0]) && p[1] >= a[1].min(b[1]) && p[1] <= a[1].max(b[1])
}

fn segments_intersect(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let (d1, d2) = (orient(c, d, a), orient(c, d, b));
    let (d3, d4) = (orient(a, b, c), orient(a, b, d));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

fn ring_is_simple(ring: &[Point2]) -> bool {
    let n = ring.len();
    for i in 0..n {
        let (a, b) = (ring[i], ring[(i + 1) % n]);
        for j in (i + 1)..n {
            // adjacent edges share an endpoint by construction
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (c, d) = (ring[j], ring[(j + 1) % n]);
            if segments_intersect(a, b, c, d) {
                return false;
            }
        }
    }
    true
}

/// Drop a repeated closing vertex and consecutive duplicates.
fn clean_ring(mut ring: Vec<Point2>) -> Vec<Point2> {
    ring.dedup();
    while ring.len() > 1 && ring.first() == ring.last() {
        ring.pop();
    }
    ring
}

/// A planar polygon: counterclockwise exterior, clockwise holes, no closing
/// vertex repeated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon2 {
    exterior: Vec<Point2>,
    holes: Vec<Vec<Point2>>,
}

impl Polygon2 {
    /// Validate and orient. Rings may be given in either orientation and with
    /// or without the closing vertex.
    pub fn new(exterior: Vec<Point2>, holes: Vec<Vec<Point2>>) -> Result<Self> {
        let p = Self::oriented(exterior, holes)?;
        p.check()?;
        Ok(p)
    }

    fn oriented(exterior: Vec<Point2>, holes: Vec<Vec<Point2>>) -> Result<Self> {
        let orient_ring = |ring: Vec<Point2>, ccw: bool| -> Result<Vec<Point2>> {
            let mut ring = clean_ring(ring);
            if ring.iter().flatten().any(|c| !c.is_finite()) {
                return Err(Error::InvalidPolygon("non-finite coordinate".into()));
            }
            if ring.len() < 3 {
                return Err(Error::InvalidPolygon("ring needs at least 3 distinct vertices".into()));
            }
            let a = ring_signed_area(&ring);
            if a == 0.0 {
                return Err(Error::InvalidPolygon("ring has zero area".into()));
            }
            if (a > 0.0) != ccw {
                ring.reverse();
            }
            Ok(ring)
        };
        Ok(Polygon2 {
            exterior: orient_ring(exterior, true)?,
            holes: holes
                .into_iter()
                .map(|h| orient_ring(h, false))
                .collect::<Result<_>>()?,
        })
    }

    fn check(&self) -> Result<()> {
        if !ring_is_simple(&self.exterior) {
            return Err(Error::InvalidPolygon("exterior ring self-intersects".into()));
        }
        for h in &self.holes {
            if !ring_is_simple(h) {
                return Err(Error::InvalidPolygon("hole self-intersects".into()));
            }
            if !h.iter().all(|p| ring_contains(&self.exterior, *p)) {
                return Err(Error::InvalidPolygon("hole lies outside the exterior".into()));
            }
        }
        Ok(())
    }

    /// Build without the simplicity check; used for outputs of operations
    /// that are simple by construction.
    pub(crate) fn from_trusted(exterior: Vec<Point2>, holes: Vec<Vec<Point2>>) -> Result<Self> {
        Self::oriented(exterior, holes)
    }

    /// Axis-aligned rectangle.
    pub fn rectangle(min: Point2, max: Point2) -> Result<Self> {
        Self::new(
            vec![min, [max[0], min[1]], max, [min[0], max[1]]],
            vec![],
        )
    }

    /// Regular polygon approximating a circle.
    pub fn circle(center: Point2, radius: f64, segments: usize) -> Result<Self> {
        let n = segments.max(3);
        let ring = (0..n)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / n as f64;
                [center[0] + radius * t.cos(), center[1] + radius * t.sin()]
            })
            .collect();
        Self::new(ring, vec![])
    }

    pub fn exterior(&self) -> &[Point2] {
        &self.exterior
    }

    pub fn holes(&self) -> &[Vec<Point2>] {
        &self.holes
    }

    pub fn rings(&self) -> impl Iterator<Item = &[Point2]> {
        std::iter::once(self.exterior.as_slice()).chain(self.holes.iter().map(Vec::as_slice))
    }

    /// Shoelace area with holes subtracted.
    pub fn area(&self) -> f64 {
        self.rings().map(ring_signed_area).sum()
    }

    pub fn perimeter(&self) -> f64 {
        self.rings().map(ring_perimeter).sum()
    }

    pub fn contains(&self, p: Point2) -> bool {
        ring_contains(&self.exterior, p) && !self.holes.iter().any(|h| ring_contains(h, p))
    }

    /// Distance from `p` to the nearest ring edge.
    pub fn boundary_distance(&self, p: Point2) -> f64 {
        self.rings()
            .flat_map(|r| r.iter().zip(r.iter().cycle().skip(1)))
            .map(|(a, b)| segment_distance(p, *a, *b))
            .fold(f64::INFINITY, f64::min)
    }

    /// Inside, or within `tol` of the boundary.
    pub fn covers(&self, p: Point2, tol: f64) -> bool {
        self.contains(p) || self.boundary_distance(p) <= tol
    }

    pub fn bbox(&self) -> Aabb {
        Aabb::of_points(&self.exterior).expect("exterior has at least 3 vertices")
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Polygon2 {
        let t = |r: &Vec<Point2>| r.iter().map(|p| [p[0] + dx, p[1] + dy]).collect();
        Polygon2 {
            exterior: t(&self.exterior),
            holes: self.holes.iter().map(t).collect(),
        }
    }

    pub fn is_convex(&self) -> bool {
        let n = self.exterior.len();
        self.holes.is_empty()
            && (0..n).all(|i| {
                orient(self.exterior[i], self.exterior[(i + 1) % n], self.exterior[(i + 2) % n]) >= 0.0
            })
    }
}

pub fn polygon_area(p: &Polygon2) -> f64 {
    p.area()
}

pub fn point_in_polygon(p: &Polygon2, pt: Point2) -> bool {
    p.contains(pt)
}

pub fn clip_bbox(p: &Polygon2) -> Aabb {
    p.bbox()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Polygon2 {
        Polygon2::rectangle([0.0, 0.0], [1.0, 1.0]).unwrap()
    }

    #[test]
    fn square_basics() {
        let s = unit_square();
        assert_eq!(polygon_area(&s), 1.0);
        assert!(point_in_polygon(&s, [0.5, 0.5]));
        assert!(!point_in_polygon(&s, [1.5, 0.5]));
        let b = clip_bbox(&s);
        assert_eq!((b.min, b.max), ([0.0, 0.0], [1.0, 1.0]));
        assert_eq!(s.perimeter(), 4.0);
        assert!(s.is_convex());
    }

    #[test]
    fn orientation_is_normalized() {
        let cw = Polygon2::new(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0], [0.0, 0.0]], vec![]).unwrap();
        assert!(ring_signed_area(cw.exterior()) > 0.0);
        assert_eq!(cw.exterior().len(), 4);
    }

    #[test]
    fn holes_are_subtracted() {
        let p = Polygon2::new(
            vec![[0.0, 0.0], [4.0, 0.0], [4.0, 4.0], [0.0, 4.0]],
            vec![vec![[1.0, 1.0], [2.0, 1.0], [2.0, 2.0], [1.0, 2.0]]],
        )
        .unwrap();
        assert_eq!(p.area(), 15.0);
        assert!(ring_signed_area(&p.holes()[0]) < 0.0);
        assert!(!p.contains([1.5, 1.5]));
        assert!(p.contains([3.0, 3.0]));
        assert!(!p.is_convex());
    }

    #[test]
    fn rejects_bad_rings() {
        let bowtie = vec![[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(matches!(Polygon2::new(bowtie, vec![]), Err(Error::InvalidPolygon(_))));
        let line = vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
        assert!(Polygon2::new(line, vec![]).is_err());
        let outside_hole = vec![vec![[5.0, 5.0], [6.0, 5.0], [6.0, 6.0]]];
        assert!(Polygon2::new(unit_square().exterior().to_vec(), outside_hole).is_err());
        assert!(Polygon2::new(vec![[0.0, 0.0], [f64::NAN, 0.0], [1.0, 1.0]], vec![]).is_err());
    }

    #[test]
    fn boundary_distance_and_covers() {
        let s = unit_square();
        assert_eq!(s.boundary_distance([0.5, 0.5]), 0.5);
        assert!(s.covers([1.0, 0.5], 1e-12));
        assert!(!s.covers([1.1, 0.5], 1e-3));
    }
}
