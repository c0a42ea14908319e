//! Spherical planetary projections and CRS identifiers.
//!
//! Two projection families are supported, both on a sphere: Albers
//! equal-area conic and equidistant cylindrical (standard parallel 0).
//! [`builtin_crs`] knows the two reference systems the demo datasets use.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodySphere {
    pub name: String,
    /// metres
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProjectionKind {
    AlbersEqualAreaSphere,
    EquidistantCylindricalSphere,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionSpec {
    pub kind: ProjectionKind,
    pub body: BodySphere,
    pub lat_origin: f64,
    pub lon_origin: f64,
    pub std_parallel_1: f64,
    pub std_parallel_2: f64,
    pub false_easting: f64,
    pub false_northing: f64,
    /// `AUTHORITY:CODE`, e.g. `IAU_2015:30185`.
    pub authority_code: String,
}

pub const MOON_RADIUS: f64 = 1_737_400.0;
pub const MARS_RADIUS: f64 = 3_396_190.0;

/// Moon (2015) sphere, planetocentric, Albers equal-area.
pub fn moon_albers_30185() -> ProjectionSpec {
    ProjectionSpec {
        kind: ProjectionKind::AlbersEqualAreaSphere,
        body: BodySphere {
            name: "Moon".into(),
            radius: MOON_RADIUS,
        },
        lat_origin: 40.0,
        lon_origin: 0.0,
        std_parallel_1: 20.0,
        std_parallel_2: 60.0,
        false_easting: 0.0,
        false_northing: 0.0,
        authority_code: "IAU_2015:30185".into(),
    }
}

/// Mars 2000 sphere, equidistant cylindrical.
pub fn mars_eqc_103885() -> ProjectionSpec {
    ProjectionSpec {
        kind: ProjectionKind::EquidistantCylindricalSphere,
        body: BodySphere {
            name: "Mars".into(),
            radius: MARS_RADIUS,
        },
        lat_origin: 0.0,
        lon_origin: 0.0,
        std_parallel_1: 0.0,
        std_parallel_2: 0.0,
        false_easting: 0.0,
        false_northing: 0.0,
        authority_code: "ESRI:103885".into(),
    }
}

/// Resolve `AUTHORITY:CODE` (or a bare code) against the built-in table.
/// `EPSG:103885` is accepted as an alias of `ESRI:103885`.
pub fn builtin_crs(authority_code: &str) -> Result<ProjectionSpec> {
    let code = authority_code
        .rsplit_once(':')
        .map_or(authority_code, |(_, c)| c)
        .trim();
    let auth = authority_code.split_once(':').map(|(a, _)| a.to_ascii_uppercase());
    match (auth.as_deref(), code) {
        (None | Some("IAU_2015") | Some("IAU2015") | Some("IAU"), "30185") => Ok(moon_albers_30185()),
        (None | Some("ESRI") | Some("EPSG"), "103885") => Ok(mars_eqc_103885()),
        _ => Err(Error::UnknownCrs(authority_code.to_string())),
    }
}

/// Wrap a longitude into (−180, 180].
pub fn normalize_lon(lon: f64) -> f64 {
    let mut l = lon % 360.0;
    if l <= -180.0 {
        l += 360.0;
    } else if l > 180.0 {
        l -= 360.0;
    }
    l
}

struct AlbersConstants {
    n: f64,
    c: f64,
    rho0: f64,
}

impl ProjectionSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.body.radius > 0.0) {
            return Err(Error::Precondition("body radius must be positive".into()));
        }
        if self.kind == ProjectionKind::AlbersEqualAreaSphere {
            let lats = [self.lat_origin, self.std_parallel_1, self.std_parallel_2];
            if lats.iter().any(|l| l.abs() > 90.0) {
                return Err(Error::Precondition("latitudes must lie within ±90°".into()));
            }
            if self.std_parallel_1 == self.std_parallel_2 {
                return Err(Error::Precondition("standard parallels must differ".into()));
            }
            let n = (self.std_parallel_1.to_radians().sin() + self.std_parallel_2.to_radians().sin()) / 2.0;
            if n.abs() < 1e-12 {
                return Err(Error::Precondition("cone constant is zero".into()));
            }
        }
        Ok(())
    }

    fn albers(&self) -> Result<AlbersConstants> {
        self.validate()?;
        let r = self.body.radius;
        let (s1, s2) = (self.std_parallel_1.to_radians(), self.std_parallel_2.to_radians());
        let n = (s1.sin() + s2.sin()) / 2.0;
        let c = s1.cos().powi(2) + 2.0 * n * s1.sin();
        let q0 = c - 2.0 * n * self.lat_origin.to_radians().sin();
        if q0 < 0.0 {
            return Err(Error::OutOfDomain("latitude of origin".into()));
        }
        Ok(AlbersConstants {
            n,
            c,
            rho0: r * q0.sqrt() / n,
        })
    }

    /// Geographic degrees to projected metres.
    pub fn forward(&self, lat: f64, lon: f64) -> Result<(f64, f64)> {
        if !lat.is_finite() || !lon.is_finite() || lat.abs() > 90.0 {
            return Err(Error::OutOfDomain(format!("latitude {lat}, longitude {lon}")));
        }
        let dlon = normalize_lon(normalize_lon(lon) - self.lon_origin).to_radians();
        let phi = lat.to_radians();
        let r = self.body.radius;
        match self.kind {
            ProjectionKind::EquidistantCylindricalSphere => {
                let x = r * dlon + self.false_easting;
                let y = r * (phi - self.lat_origin.to_radians()) + self.false_northing;
                Ok((x, y))
            }
            ProjectionKind::AlbersEqualAreaSphere => {
                let k = self.albers()?;
                let q = k.c - 2.0 * k.n * phi.sin();
                if q < 0.0 {
                    return Err(Error::OutOfDomain(format!("latitude {lat}")));
                }
                let rho = r * q.sqrt() / k.n;
                let theta = k.n * dlon;
                Ok((
                    rho * theta.sin() + self.false_easting,
                    k.rho0 - rho * theta.cos() + self.false_northing,
                ))
            }
        }
    }

    /// Projected metres to geographic degrees (longitude in (−180, 180]).
    pub fn inverse(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::OutOfDomain(format!("x {x}, y {y}")));
        }
        let r = self.body.radius;
        let (dx, dy) = (x - self.false_easting, y - self.false_northing);
        match self.kind {
            ProjectionKind::EquidistantCylindricalSphere => {
                let lat = (dy / r).to_degrees() + self.lat_origin;
                let dlon = (dx / r).to_degrees();
                if lat.abs() > 90.0 || dlon.abs() > 180.0 {
                    return Err(Error::OutOfDomain(format!("x {x}, y {y}")));
                }
                Ok((lat, normalize_lon(dlon + self.lon_origin)))
            }
            ProjectionKind::AlbersEqualAreaSphere => {
                let k = self.albers()?;
                let ry = k.rho0 - dy;
                let sign = k.n.signum();
                let rho = (dx * dx + ry * ry).sqrt();
                let theta = (sign * dx).atan2(sign * ry);
                let sin_phi = (k.c - (rho * k.n / r).powi(2)) / (2.0 * k.n);
                if sin_phi.abs() > 1.0 + 1e-12 || theta.abs() > (PI * k.n).abs() + 1e-12 {
                    return Err(Error::OutOfDomain(format!("x {x}, y {y}")));
                }
                let lat = sin_phi.clamp(-1.0, 1.0).asin().to_degrees();
                let lon = normalize_lon((theta / k.n).to_degrees() + self.lon_origin);
                Ok((lat, lon))
            }
        }
    }

    /// OGC URL of this reference system.
    pub fn url(&self) -> String {
        let (auth, code) = self
            .authority_code
            .split_once(':')
            .unwrap_or(("EPSG", &self.authority_code));
        crs_url(standard_authority(auth, code), code).expect("built-in codes are non-empty")
    }
}

/// The authority token written into URLs: IAU codes keep `IAU_2015`, numeric
/// ESRI/EPSG-style codes are written as `EPSG`.
pub fn standard_authority<'a>(authority: &'a str, code: &str) -> &'a str {
    let upper = authority.to_ascii_uppercase();
    if upper.starts_with("IAU") {
        "IAU_2015"
    } else if code.chars().all(|c| c.is_ascii_digit()) {
        "EPSG"
    } else {
        authority
    }
}

pub fn crs_url(authority: &str, code: &str) -> Result<String> {
    if authority.is_empty() || code.is_empty() {
        return Err(Error::Precondition("authority and code must be non-empty".into()));
    }
    Ok(format!("https://www.opengis.net/def/crs/{authority}/0/{code}"))
}

/// Parse an OGC CRS URL into `(authority, code)`.
pub fn parse_crs_url(url: &str) -> Option<(&str, &str)> {
    let rest = url
        .strip_prefix("https://www.opengis.net/def/crs/")
        .or_else(|| url.strip_prefix("http://www.opengis.net/def/crs/"))?;
    let mut parts = rest.split('/');
    let auth = parts.next()?;
    let _version = parts.next()?;
    let code = parts.next()?;
    if parts.next().is_some() || auth.is_empty() || code.is_empty() {
        return None;
    }
    Some((auth, code))
}

/// Rewrite a legacy `urn:ogc:def:crs:AUTH::CODE` (or `AUTH:VERSION:CODE`)
/// identifier into the OGC URL form. Other inputs are returned unchanged.
pub fn urn_to_url(urn: &str) -> String {
    let Some(rest) = urn.strip_prefix("urn:ogc:def:crs:") else {
        return urn.to_string();
    };
    let parts: Vec<&str> = rest.split(':').collect();
    match parts.as_slice() {
        [auth, version, code] if !auth.is_empty() && !code.is_empty() => {
            let version = if version.is_empty() { "0" } else { version };
            format!(
                "https://www.opengis.net/def/crs/{}/{version}/{code}",
                standard_authority(auth, code)
            )
        }
        _ => urn.to_string(),
    }
}
