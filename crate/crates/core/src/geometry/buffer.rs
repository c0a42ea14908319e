use geo::{Coord, LineString, Polygon as GeoPolygon};

use super::{Point2, Polygon2};
use crate::error::{Error, Result};

/// Arc segments per quarter circle used when callers have no preference.
pub const DEFAULT_SEGMENTS: usize = 16;

/// Andrew's monotone chain; counterclockwise, no repeated closing vertex.
fn convex_hull(mut pts: Vec<Point2>) -> Vec<Point2> {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: Point2, a: Point2, b: Point2| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut hull: Vec<Point2> = Vec::with_capacity(pts.len() * 2);
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point2>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

fn to_geo(ring: &[Point2]) -> LineString<f64> {
    LineString::from(ring.iter().map(|p| Coord { x: p[0], y: p[1] }).collect::<Vec<_>>())
}

fn from_geo(ls: &LineString<f64>) -> Vec<Point2> {
    ls.coords().map(|c| [c.x, c.y]).collect()
}

/// Expand `p` by a disc of radius `r`.
///
/// The disc is a regular polygon with `4 * segments_per_quadrant` vertices
/// inscribed in the circle. The result is the union of `p` with the
/// Minkowski sum of every ring edge and that disc, which equals `p ⊕ disc`.
/// Overlaps are resolved with a positive-winding union.
pub fn buffer2d(p: &Polygon2, r: f64, segments_per_quadrant: usize) -> Result<Polygon2> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::Precondition(format!("buffer radius must be finite and ≥ 0, got {r}")));
    }
    if segments_per_quadrant == 0 {
        return Err(Error::Precondition("segments_per_quadrant must be ≥ 1".into()));
    }
    if r == 0.0 {
        return Ok(p.clone());
    }
    let steps = 4 * segments_per_quadrant;
    let disc: Vec<Point2> = (0..steps)
        .map(|i| {
            let t = std::f64::consts::TAU * i as f64 / steps as f64;
            [r * t.cos(), r * t.sin()]
        })
        .collect();

    let mut pieces: Vec<GeoPolygon<f64>> = Vec::new();
    pieces.push(GeoPolygon::new(
        to_geo(p.exterior()),
        p.holes().iter().map(|h| to_geo(h)).collect(),
    ));
    for ring in p.rings() {
        for (a, b) in ring.iter().zip(ring.iter().cycle().skip(1)) {
            let pts = disc
                .iter()
                .flat_map(|d| [[a[0] + d[0], a[1] + d[1]], [b[0] + d[0], b[1] + d[1]]])
                .collect();
            pieces.push(GeoPolygon::new(to_geo(&convex_hull(pts)), vec![]));
        }
    }

    let merged = geo::unary_union(&pieces);
    let best = merged
        .0
        .iter()
        .map(|poly| {
            let ext = from_geo(poly.exterior());
            (super::ring_signed_area(&ext).abs(), poly)
        })
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, poly)| poly)
        .ok_or_else(|| Error::InvalidPolygon("buffer union is empty".into()))?;
    Polygon2::from_trusted(
        from_geo(best.exterior()),
        best.interiors().iter().map(from_geo).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn unit_square() -> Polygon2 {
        Polygon2::rectangle([0.0, 0.0], [1.0, 1.0]).unwrap()
    }

    #[test]
    fn zero_radius_is_identity() {
        let s = unit_square();
        assert_eq!(buffer2d(&s, 0.0, 16).unwrap(), s);
    }

    #[test]
    fn convex_area_formula() {
        // A + P·r + π r²
        let exact = 1.0 + 4.0 * 0.5 + PI * 0.25;
        assert!((exact - 3.7854).abs() < 1e-4);
        let b = buffer2d(&unit_square(), 0.5, 16).unwrap();
        assert!(((b.area() - exact) / exact).abs() < 0.01, "{}", b.area());
        assert!(b.holes().is_empty());
    }

    #[test]
    fn contains_source() {
        let s = unit_square();
        let b = buffer2d(&s, 0.25, 4).unwrap();
        for p in s.exterior() {
            assert!(b.contains(*p));
        }
    }

    #[test]
    fn fills_small_holes_and_shrinks_large_ones() {
        let small = Polygon2::new(
            vec![[0.0, 0.0], [10.0, 0.0], [10.0, 10.0], [0.0, 10.0]],
            vec![vec![[4.0, 4.0], [6.0, 4.0], [6.0, 6.0], [4.0, 6.0]]],
        )
        .unwrap();
        let b = buffer2d(&small, 1.5, 8).unwrap();
        assert!(b.holes().is_empty());

        let b = buffer2d(&small, 0.5, 8).unwrap();
        assert_eq!(b.holes().len(), 1);
        // the hole loses a 0.5 band on each side: 1×1 left
        let hole_area = -super::super::ring_signed_area(&b.holes()[0]);
        assert!((hole_area - 1.0).abs() < 1e-9, "{hole_area}");
    }

    #[test]
    fn concave_polygon() {
        // L-shape
        let l = Polygon2::new(
            vec![[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, 1.0], [1.0, 2.0], [0.0, 2.0]],
            vec![],
        )
        .unwrap();
        let b = buffer2d(&l, 0.1, 16).unwrap();
        assert!(b.area() > l.area());
        assert!(b.contains([1.05, 1.05]));
        assert!(!b.contains([1.2, 1.2]));
    }

    #[test]
    fn hull() {
        let h = convex_hull(vec![[0.0, 0.0], [1.0, 0.0], [0.5, 0.5], [1.0, 1.0], [0.0, 1.0]]);
        assert_eq!(h.len(), 4);
        assert!(super::super::ring_signed_area(&h) > 0.0);
    }

    #[test]
    fn rejects_negative_radius() {
        assert!(buffer2d(&unit_square(), -1.0, 16).is_err());
        assert!(buffer2d(&unit_square(), 1.0, 0).is_err());
    }
}
