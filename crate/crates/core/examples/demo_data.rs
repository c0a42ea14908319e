//! Regenerates the synthetic inputs under `recipes/data`.
//!
//!     cargo run -p astrocity --example demo_data -- recipes/data
//!
//! Positions come from published coordinates; elevations and outlines are
//! synthetic stand-ins for the LOLA/HRSC/CTX products.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use astrocity::crs::{mars_eqc_103885, moon_albers_30185, ProjectionSpec};
use astrocity::dem::{write_asc, DemGrid};
use serde_json::{json, Value};

type P = [f64; 2];

fn project(spec: &ProjectionSpec, lat: f64, lon: f64) -> P {
    let (x, y) = spec.forward(lat, lon).expect("coordinates in domain");
    [x, y]
}

/// Closed ring around `c` whose radius wobbles by `wobble` (relative).
fn blob(c: P, r: f64, wobble: f64, phase: f64, n: usize) -> Vec<P> {
    let mut ring: Vec<P> = (0..n)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / n as f64;
            let rr = r * (1.0 + wobble * (3.0 * t + phase).sin() + 0.5 * wobble * (5.0 * t - phase).cos());
            [round(c[0] + rr * t.cos()), round(c[1] + rr * t.sin())]
        })
        .collect();
    ring.push(ring[0]);
    ring
}

fn ellipse(c: P, a: f64, b: f64, rot: f64, n: usize) -> Vec<P> {
    let (s, co) = rot.sin_cos();
    let mut ring: Vec<P> = (0..n)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / n as f64;
            let (u, v) = (a * t.cos(), b * t.sin());
            [round(c[0] + u * co - v * s), round(c[1] + u * s + v * co)]
        })
        .collect();
    ring.push(ring[0]);
    ring
}

fn round(v: f64) -> f64 {
    (v * 1000.0).round() / 1000.0
}

fn polygon_feature(ring: Vec<P>, props: Value) -> Value {
    json!({"type": "Feature", "properties": props,
           "geometry": {"type": "Polygon", "coordinates": [ring]}})
}

fn collection(features: Vec<Value>) -> Value {
    json!({"type": "FeatureCollection", "features": features})
}

struct Crater {
    center: P,
    radius: f64,
    depth: f64,
    rim: f64,
}

impl Crater {
    fn relief(&self, x: f64, y: f64) -> f64 {
        let s = ((x - self.center[0]).powi(2) + (y - self.center[1]).powi(2)).sqrt() / self.radius;
        let bowl = if s < 1.0 { -self.depth * (1.0 - s * s) } else { 0.0 };
        bowl + self.rim * (-((s - 1.0) / 0.15).powi(2)).exp()
    }
}

/// Grid covering `craters` plus `margin`, snapped to whole cells.
fn crater_dem(craters: &[&Crater], base: f64, cellsize: f64, margin: f64) -> DemGrid {
    let lo_x = craters.iter().map(|c| c.center[0] - c.radius).fold(f64::INFINITY, f64::min) - margin;
    let lo_y = craters.iter().map(|c| c.center[1] - c.radius).fold(f64::INFINITY, f64::min) - margin;
    let hi_x = craters.iter().map(|c| c.center[0] + c.radius).fold(f64::NEG_INFINITY, f64::max) + margin;
    let hi_y = craters.iter().map(|c| c.center[1] + c.radius).fold(f64::NEG_INFINITY, f64::max) + margin;
    let origin = [(lo_x / cellsize).floor() * cellsize, (lo_y / cellsize).floor() * cellsize];
    let ncols = ((hi_x - origin[0]) / cellsize).ceil() as usize;
    let nrows = ((hi_y - origin[1]) / cellsize).ceil() as usize;
    DemGrid::from_fn(ncols, nrows, cellsize, origin, |x, y| {
        let texture = 15.0 * (x / 1700.0).sin() * (y / 2300.0).cos();
        base + texture + craters.iter().map(|c| c.relief(x, y)).sum::<f64>()
    })
    .expect("grid dimensions are positive")
}

/// Circle footprint built from a catalogued center and diameter.
fn crater_footprint(c: &Crater, props: Value) -> Value {
    polygon_feature(ellipse(c.center, c.radius, c.radius, 0.0, 96), props)
}

fn write(dir: &Path, name: &str, text: String) {
    let path = dir.join(name);
    fs::write(&path, text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    println!("wrote {}", path.display());
}

fn write_json(dir: &Path, name: &str, v: &Value) {
    write(dir, name, serde_json::to_string_pretty(v).expect("json") + "\n");
}

fn south_pole(dir: &Path) {
    let moon = moon_albers_30185();
    let shackleton = Crater {
        center: project(&moon, -89.67, 129.78),
        radius: 10_500.0,
        depth: 4_000.0,
        rim: 250.0,
    };
    let shoemaker_center = project(&moon, -88.14, 44.91);
    let shoemaker = Crater {
        center: shoemaker_center,
        radius: 25_900.0,
        depth: 3_000.0,
        rim: 300.0,
    };
    // placed on Shoemaker's rim so that the two footprints overlap
    let tooley = Crater {
        center: [shoemaker_center[0] + 21_000.0, shoemaker_center[1] + 12_000.0],
        radius: 3_600.0,
        depth: 900.0,
        rim: 80.0,
    };

    let mut shack = crater_dem(&[&shackleton], -1_500.0, 125.0, 1_500.0);
    // a void in the corner, away from the rim
    for row in 0..6 {
        for col in 0..6 {
            shack.values[row * shack.ncols + col] = shack.nodata;
        }
    }
    write(dir, "shackleton.asc", write_asc(&shack, 1));
    write(dir, "shoemaker.asc", write_asc(&crater_dem(&[&shoemaker, &tooley], -1_200.0, 250.0, 2_500.0), 1));

    write_json(
        dir,
        "shackleton.geojson",
        &collection(vec![crater_footprint(
            &shackleton,
            json!({"craterID": 1114, "craterName": "Shackleton", "diameter": 21000.0,
                   "depth": 4000.0, "IAUID": 5474, "approvalDate": 1994, "target": "Moon"}),
        )]),
    );
    write_json(
        dir,
        "shoemaker_tooley.geojson",
        &collection(vec![
            crater_footprint(
                &shoemaker,
                json!({"craterID": 1117, "craterName": "Shoemaker", "diameter": 51800.0,
                       "depth": 3000.0, "IAUID": 14592, "approvalDate": 2000, "target": "Moon"}),
            ),
            crater_footprint(
                &tooley,
                json!({"craterID": 1118, "craterName": "Tooley", "diameter": 7200.0,
                       "depth": 900.0, "IAUID": 15482, "approvalDate": 2021, "target": "Moon"}),
            ),
        ]),
    );

    let psr = |c: P, dx: f64, dy: f64, r: f64, phase: f64| blob([c[0] + dx, c[1] + dy], r, 0.18, phase, 40);
    write_json(
        dir,
        "psr_shackleton.geojson",
        &collection(vec![polygon_feature(psr(shackleton.center, 0.0, 0.0, 6_000.0, 0.3), json!({}))]),
    );
    write_json(
        dir,
        "psr_shoemaker.geojson",
        &collection(vec![
            polygon_feature(psr(shoemaker.center, -4_000.0, 2_000.0, 14_000.0, 1.1), json!({})),
            polygon_feature(psr(tooley.center, 0.0, 0.0, 2_000.0, 2.0), json!({})),
            polygon_feature(psr(shoemaker.center, 12_000.0, -14_000.0, 2_500.0, 0.7), json!({})),
        ]),
    );

    // a small habitat inside the settlement grid
    let [sx, sy] = project(&moon, -88.76, -232.0);
    let (x0, y0) = ((sx + 500.0).round(), (sy - 800.0).round());
    let unit = |id: &str, dx: f64, z_low: f64, use_type: &str| {
        json!({"unit_id": id, "unit_attrs": {"unitUseType": use_type},
               "footprint": [[x0 + dx, y0], [x0 + dx + 12.0, y0], [x0 + dx + 12.0, y0 + 8.0], [x0 + dx, y0 + 8.0]],
               "z_low": z_low, "z_high": z_low + 3.5})
    };
    write_json(
        dir,
        "building1.json",
        &json!({
            "building_id": "building1",
            "building_attrs": {"buildingState": "planned", "buildingID": "building1"},
            "units": [
                unit("0pNy6pOyf7JPmXRLgxs3sW", 0.0, 0.0, "habitation"),
                unit("2Wq1b9xTz4LrAeKpV0mN8c", 12.0, 0.0, "laboratory"),
                unit("3Hd7sUe2Fj5QyBoXc1gR6k", 0.0, 3.5, "storage"),
            ]
        }),
    );
}

fn nearside(dir: &Path) {
    // latitude, longitude as listed for the landing sites
    let sites: [(&str, f64, f64); 13] = [
        ("Apollo 11 LM", 0.67416, 23.47314),
        ("Apollo 17 LM", 20.19106, 30.77228),
        ("Apollo 12 LM", -3.01279, -23.42192),
        ("Apollo 14 LM", -3.64589, -17.47194),
        ("Apollo 15 LM", 26.13239, 3.63330),
        ("Apollo 16 LM", -8.97344, 15.50105),
        ("Surveyor 1", -2.47448, 316.66020),
        ("Surveyor 3", -3.01623, -23.41801),
        ("Surveyor 5", 1.45515, 23.19426),
        ("Surveyor 6", 0.47424, -1.42752),
        ("Surveyor 7", -40.98117, -11.51270),
        ("Chang'e 3", 44.12142, -19.51174),
        ("Yutu Rover", 44.12085, -19.51219),
    ];
    let features = sites
        .iter()
        .map(|(name, lat, lon)| {
            json!({"type": "Feature", "properties": {"areaName": name},
                   "geometry": {"type": "Point", "coordinates": [lon, lat]}})
        })
        .collect();
    write_json(dir, "landing_sites.geojson", &collection(features));

    let moon = moon_albers_30185();
    let secchi = project(&moon, 2.42, 43.53);
    let patches = [(0.0, 0.0, 180.0, 0.2), (650.0, 240.0, 120.0, 1.4), (-420.0, 510.0, 90.0, 2.6), (300.0, -560.0, 150.0, 0.9)];
    let features = patches
        .iter()
        .enumerate()
        .map(|(i, &(dx, dy, r, phase))| {
            polygon_feature(
                blob([secchi[0] + dx, secchi[1] + dy], r, 0.25, phase, 24),
                json!({"objectName": format!("Secchi IP {}", i + 1)}),
            )
        })
        .collect();
    write_json(dir, "secchi_ips.geojson", &collection(features));
}

fn mars(dir: &Path) {
    let mars = mars_eqc_103885();
    let jezero = Crater {
        center: project(&mars, 18.38, 77.58),
        radius: 23_760.0,
        depth: 600.0,
        rim: 350.0,
    };
    write(dir, "jezero.asc", write_asc(&crater_dem(&[&jezero], -2_300.0, 250.0, 2_500.0), 1));
    write_json(
        dir,
        "jezero.geojson",
        &crater_footprint(
            &jezero,
            json!({"craterID": 14300, "craterName": "Jezero", "diameter": 47520.0,
                   "approvalDate": 2007, "target": "Mars", "IAUID": 14300}),
        ),
    );
    let home_plate = project(&mars, -14.64, 175.53);
    write_json(
        dir,
        "home_plate.geojson",
        &polygon_feature(ellipse(home_plate, 45.0, 38.0, 0.35, 32), json!({})),
    );
}

fn main() {
    let dir: PathBuf = std::env::args_os().nth(1).map(Into::into).unwrap_or_else(|| "recipes/data".into());
    fs::create_dir_all(&dir).expect("output directory");
    south_pole(&dir);
    nearside(&dir);
    mars(&dir);
}
