use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{buffer2d, Point2, Point3, Polygon2, DEFAULT_SEGMENTS};
use crate::error::{Error, Result};
use crate::issue::Issue;

/// Maximum distance (metres) of a face vertex from the face's best-fit plane.
pub const PLANARITY_TOLERANCE: f64 = 1e-6;

/// A planar face: outer ring first, then inner rings. Rings do not repeat
/// their first vertex.
pub type Face = Vec<Vec<Point3>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolidMesh {
    /// Outer shell first.
    pub shells: Vec<Vec<Face>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TriSurface {
    pub triangles: Vec<[Point3; 3]>,
}

fn sub(a: Point3, b: Point3) -> Point3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: Point3, b: Point3) -> Point3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: Point3, b: Point3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: Point3) -> f64 {
    dot(a, a).sqrt()
}

/// Vector area of a ring, relative to `origin` to limit cancellation.
fn ring_vector_area(ring: &[Point3], origin: Point3) -> Point3 {
    let mut acc = [0.0; 3];
    for (a, b) in ring.iter().zip(ring.iter().cycle().skip(1)) {
        let c = cross(sub(*a, origin), sub(*b, origin));
        acc = [acc[0] + c[0], acc[1] + c[1], acc[2] + c[2]];
    }
    [acc[0] / 2.0, acc[1] / 2.0, acc[2] / 2.0]
}

fn face_vector_area(face: &[Vec<Point3>], origin: Point3) -> Point3 {
    face.iter().fold([0.0; 3], |acc, r| {
        let v = ring_vector_area(r, origin);
        [acc[0] + v[0], acc[1] + v[1], acc[2] + v[2]]
    })
}

impl SolidMesh {
    fn first_vertex(&self) -> Option<Point3> {
        self.shells.iter().flatten().flatten().flatten().next().copied()
    }

    /// Signed enclosed volume (positive for outward-oriented shells). Inner
    /// shells are expected to be inward-oriented and subtract.
    pub fn volume(&self) -> f64 {
        let Some(origin) = self.first_vertex() else {
            return 0.0;
        };
        self.shells
            .iter()
            .flatten()
            .map(|face| {
                let Some(p0) = face.first().and_then(|r| r.first()) else {
                    return 0.0;
                };
                dot(sub(*p0, origin), face_vector_area(face, origin)) / 3.0
            })
            .sum()
    }

    pub fn face_count(&self) -> usize {
        self.shells.iter().map(Vec::len).sum()
    }

    /// (min, max) of the z coordinate over all vertices.
    pub fn z_range(&self) -> Option<(f64, f64)> {
        let mut it = self.shells.iter().flatten().flatten().flatten().map(|p| p[2]);
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), z| (lo.min(z), hi.max(z))))
    }

    pub fn vertices(&self) -> impl Iterator<Item = &Point3> {
        self.shells.iter().flatten().flatten().flatten()
    }
}

impl TriSurface {
    pub fn area(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| norm(cross(sub(t[1], t[0]), sub(t[2], t[0]))) / 2.0)
            .sum()
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }
}

fn lift(ring: &[Point2], z: f64) -> Vec<Point3> {
    ring.iter().map(|p| [p[0], p[1], z]).collect()
}

/// Prism over `p` from `z_low` to `z_high`: a downward bottom, an upward top,
/// and one quad wall per ring edge. Holes become inner rings and inner walls.
pub fn extrude(p: &Polygon2, z_low: f64, z_high: f64) -> Result<SolidMesh> {
    if !(z_high > z_low) || !z_low.is_finite() || !z_high.is_finite() {
        return Err(Error::DegenerateHeight {
            low: z_low,
            high: z_high,
        });
    }
    let mut faces: Vec<Face> = Vec::new();
    faces.push(
        p.rings()
            .map(|r| {
                let mut ring = lift(r, z_low);
                ring.reverse();
                ring
            })
            .collect(),
    );
    faces.push(p.rings().map(|r| lift(r, z_high)).collect());
    for ring in p.rings() {
        for (a, b) in ring.iter().zip(ring.iter().cycle().skip(1)) {
            faces.push(vec![vec![
                [a[0], a[1], z_low],
                [b[0], b[1], z_low],
                [b[0], b[1], z_high],
                [a[0], a[1], z_high],
            ]]);
        }
    }
    Ok(SolidMesh {
        shells: vec![faces],
    })
}

/// Prism expanded by `r` laterally (round joins) and vertically.
pub fn buffer3d(p: &Polygon2, z_low: f64, z_high: f64, r: f64) -> Result<SolidMesh> {
    buffer3d_with(p, z_low, z_high, r, DEFAULT_SEGMENTS)
}

pub fn buffer3d_with(
    p: &Polygon2,
    z_low: f64,
    z_high: f64,
    r: f64,
    segments_per_quadrant: usize,
) -> Result<SolidMesh> {
    if !(z_high > z_low) {
        return Err(Error::DegenerateHeight {
            low: z_low,
            high: z_high,
        });
    }
    let footprint = buffer2d(p, r, segments_per_quadrant)?;
    extrude(&footprint, z_low - r, z_high + r)
}

/// Quality check of a closed solid given as faces of vertex positions.
pub fn check_watertight(s: &SolidMesh) -> Vec<Issue> {
    let mut index: HashMap<[u64; 3], usize> = HashMap::new();
    let mut coords: Vec<Point3> = Vec::new();
    let key = |p: &Point3| p.map(|c| if c == 0.0 { 0u64 } else { c.to_bits() });
    let shells: Vec<Vec<Vec<Vec<usize>>>> = s
        .shells
        .iter()
        .map(|shell| {
            shell
                .iter()
                .map(|face| {
                    face.iter()
                        .map(|ring| {
                            ring.iter()
                                .map(|p| {
                                    *index.entry(key(p)).or_insert_with(|| {
                                        coords.push(*p);
                                        coords.len() - 1
                                    })
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    check_watertight_indexed(&shells, |i| coords[i])
}

/// Same check over index-based boundaries (CityJSON `Solid` layout).
///
/// Reports `UNMATCHED_EDGE` for edges not shared by exactly two faces,
/// `ORIENTATION` for edges used twice in the same direction, `NON_PLANAR` for
/// faces off their plane by more than [`PLANARITY_TOLERANCE`], and, only when
/// the edge structure is sound, `NONPOSITIVE_VOLUME` for shells that are not
/// outward-oriented.
pub fn check_watertight_indexed(
    shells: &[Vec<Vec<Vec<usize>>>],
    coord: impl Fn(usize) -> Point3,
) -> Vec<Issue> {
    let mut issues = Vec::new();
    let mut edge_issues = 0;
    for (si, shell) in shells.iter().enumerate() {
        // (lo, hi) -> (count lo→hi, count hi→lo)
        let mut edges: HashMap<(usize, usize), (u32, u32)> = HashMap::new();
        for face in shell {
            for ring in face {
                for (&u, &v) in ring.iter().zip(ring.iter().cycle().skip(1)) {
                    if u == v {
                        continue;
                    }
                    let e = edges.entry((u.min(v), u.max(v))).or_default();
                    if u < v {
                        e.0 += 1;
                    } else {
                        e.1 += 1;
                    }
                }
            }
        }
        let mut sorted: Vec<_> = edges.into_iter().collect();
        sorted.sort_unstable_by_key(|(k, _)| *k);
        for ((a, b), (fwd, back)) in sorted {
            let path = format!("shells/{si}/edge/{a}-{b}");
            if fwd + back != 2 {
                edge_issues += 1;
                issues.push(Issue::error(
                    "UNMATCHED_EDGE",
                    path,
                    format!("edge used by {} faces instead of 2", fwd + back),
                ));
            } else if fwd != 1 {
                edge_issues += 1;
                issues.push(Issue::error(
                    "ORIENTATION",
                    path,
                    "edge traversed twice in the same direction",
                ));
            }
        }

        for (fi, face) in shell.iter().enumerate() {
            let pts: Vec<Vec<Point3>> = face
                .iter()
                .map(|r| r.iter().map(|&i| coord(i)).collect())
                .collect();
            if let Some(dev) = planarity_deviation(&pts) {
                if dev > PLANARITY_TOLERANCE {
                    issues.push(Issue::error(
                        "NON_PLANAR",
                        format!("shells/{si}/faces/{fi}"),
                        format!("vertex {dev:.3e} m off the face plane"),
                    ));
                }
            } else {
                issues.push(Issue::error(
                    "NON_PLANAR",
                    format!("shells/{si}/faces/{fi}"),
                    "face has no area",
                ));
            }
        }
    }

    if edge_issues == 0 && !shells.is_empty() {
        let outer: Vec<Face> = shells[0]
            .iter()
            .map(|f| f.iter().map(|r| r.iter().map(|&i| coord(i)).collect()).collect())
            .collect();
        let v = SolidMesh { shells: vec![outer] }.volume();
        if !(v > 0.0) {
            issues.push(Issue::error(
                "NONPOSITIVE_VOLUME",
                "shells/0",
                format!("outer shell encloses signed volume {v:.6e}"),
            ));
        }
    }
    issues
}

/// Largest distance of a face vertex from the plane through the face centroid
/// with the Newell normal; `None` for faces without area.
fn planarity_deviation(face: &[Vec<Point3>]) -> Option<f64> {
    let origin = *face.first()?.first()?;
    let n = face_vector_area(face, origin);
    let len = norm(n);
    if len == 0.0 || !len.is_finite() {
        return None;
    }
    let unit = [n[0] / len, n[1] / len, n[2] / len];
    let pts: Vec<&Point3> = face.iter().flatten().collect();
    let mut c = [0.0; 3];
    for p in &pts {
        let d = sub(**p, origin);
        c = [c[0] + d[0], c[1] + d[1], c[2] + d[2]];
    }
    let k = pts.len() as f64;
    let centroid = [c[0] / k, c[1] / k, c[2] / k];
    Some(
        pts.iter()
            .map(|p| dot(sub(sub(**p, origin), centroid), unit).abs())
            .fold(0.0, f64::max),
    )
}
