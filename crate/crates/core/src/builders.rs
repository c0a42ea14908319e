//! Construction of extension features inside a [`CityDocument`].
//!
//! Every builder call checks attributes against the registry, realizes the
//! geometry, and records the realized footprint and vertical slab of the new
//! object so that restrictions and legal spaces can be derived from it later.

use std::collections::{HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::crs::ProjectionSpec;
use crate::dem::{clip, tin_from_grid, DemGrid};
use crate::error::{Error, Result};
use crate::geometry::{buffer2d, extrude, Aabb, Point2, Polygon2, SolidMesh, DEFAULT_SEGMENTS};
use crate::model::{CityDocument, CityObject, WorldGeometry};
use crate::registry::{
    self, ExtensionRegistry, Realization, ValueKind, BUILDING, BUILDING_UNIT, CRATER, LEGAL, PLAN_UNIT,
    PROTECTED_AREA, RESTRICTION, SCIENTIFIC_EVIDENCE, SURFACE_OBJECT,
};

/// How a derived volume is obtained from a footprint.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisSpec {
    /// One of the `restrictionAnalysisType` values.
    pub analysis: String,
    pub value: f64,
    pub unit: String,
    pub extrusion_up: f64,
    pub extrusion_down: f64,
}

impl AnalysisSpec {
    pub fn new(analysis: &str, value: f64, extrusion_up: f64, extrusion_down: f64) -> Self {
        AnalysisSpec {
            analysis: analysis.into(),
            value,
            unit: "metre".into(),
            extrusion_up,
            extrusion_down,
        }
    }

    pub fn buffer3d(r: f64) -> Self {
        Self::new("3DBuffer", r, 0.0, 0.0)
    }

    pub fn extrusion(up: f64, down: f64) -> Self {
        Self::new("Extrusion", up.max(down), up, down)
    }

    pub fn buffer_extrusion(r: f64, up: f64, down: f64) -> Self {
        Self::new("BufferExtrusion", r, up, down)
    }

    pub fn uses_buffer(&self) -> bool {
        matches!(self.analysis.as_str(), "2DBuffer" | "3DBuffer" | "BufferExtrusion")
    }

    pub fn uses_extrusion(&self) -> bool {
        matches!(self.analysis.as_str(), "Extrusion" | "BufferExtrusion")
    }

    pub fn validate(&self) -> Result<()> {
        if !registry::ANALYSIS_TYPES.contains(&self.analysis.as_str()) {
            return Err(Error::InvalidEnum {
                attribute: "restrictionAnalysisType".into(),
                value: self.analysis.clone(),
            });
        }
        let finite = [self.value, self.extrusion_up, self.extrusion_down].iter().all(|v| v.is_finite());
        if !finite || self.extrusion_up < 0.0 || self.extrusion_down < 0.0 || self.value < 0.0 {
            return Err(Error::Precondition(format!("analysis values must be finite and ≥ 0: {self:?}")));
        }
        if self.uses_buffer() && self.value <= 0.0 {
            return Err(Error::Precondition(format!("{} needs a positive value", self.analysis)));
        }
        if self.uses_extrusion() && self.extrusion_up + self.extrusion_down <= 0.0 {
            return Err(Error::Precondition(format!("{} needs a positive extrusion", self.analysis)));
        }
        Ok(())
    }
}

/// Realized plan-view extent of an object and its vertical slab.
#[derive(Debug, Clone, PartialEq)]
pub struct Footprint {
    pub polygon: Polygon2,
    /// Reference elevation the slab was measured from.
    pub z0: f64,
    pub z_low: f64,
    pub z_high: f64,
}

/// Input of protected-area builders: a polygon, or a point to be buffered.
#[derive(Debug, Clone, PartialEq)]
pub enum Site {
    Polygon(Polygon2),
    Point(Point2),
}

#[derive(Debug, Clone, PartialEq)]
pub enum UnitSolid {
    Prism { footprint: Polygon2, z_low: f64, z_high: f64 },
    Mesh(SolidMesh),
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitInput {
    pub unit_id: String,
    pub unit_attrs: Map<String, Value>,
    pub solid: UnitSolid,
}

/// A building and its spaces, replacing BIM input.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SpaceSolidInput {
    pub building_id: String,
    pub building_attrs: Map<String, Value>,
    pub envelope: Option<SolidMesh>,
    pub units: Vec<UnitInput>,
}

/// Numbers with no fractional part are written as integers.
pub fn number(v: f64) -> Value {
    if v.fract() == 0.0 && v.abs() < 9.0e15 {
        json!(v as i64)
    } else {
        json!(v)
    }
}

/// Square of side `side` centered on the projection of (lat, lon).
pub fn grid_from_center(spec: &ProjectionSpec, lat: f64, lon: f64, side: f64) -> Result<Polygon2> {
    if !(side > 0.0) || !side.is_finite() {
        return Err(Error::Precondition(format!("grid side must be > 0, got {side}")));
    }
    let (x, y) = spec.forward(lat, lon)?;
    let h = side / 2.0;
    Polygon2::rectangle([x - h, y - h], [x + h, y + h])
}

fn flat_surface(p: &Polygon2, z: f64) -> WorldGeometry {
    let rings = p.rings().map(|r| r.iter().map(|q| [q[0], q[1], z]).collect()).collect();
    WorldGeometry::multi_surface(vec![rings])
}

pub struct Builder<'a> {
    doc: &'a mut CityDocument,
    registry: &'a ExtensionRegistry,
    rng: ChaCha8Rng,
    footprints: HashMap<String, Footprint>,
    reference_z: f64,
}

impl<'a> Builder<'a> {
    /// Declares the registry's extension on `doc`. Generated ids are
    /// reproducible when `seed` is given.
    pub fn new(doc: &'a mut CityDocument, registry: &'a ExtensionRegistry, seed: Option<u64>) -> Self {
        doc.declare_extension(&registry.extension_name, &registry.schema_url, &registry.extension_version);
        let seed = seed.unwrap_or_else(rand::random);
        Builder {
            doc,
            registry,
            rng: ChaCha8Rng::seed_from_u64(seed),
            footprints: HashMap::new(),
            reference_z: 0.0,
        }
    }

    pub fn document(&self) -> &CityDocument {
        self.doc
    }

    /// Elevation the next prisms are measured from (0 by default).
    pub fn set_reference_z(&mut self, z: f64) {
        self.reference_z = z;
    }

    pub fn reference_z(&self) -> f64 {
        self.reference_z
    }

    pub fn footprint(&self, id: &str) -> Option<&Footprint> {
        self.footprints.get(id)
    }

    /// A random (version 4) UUID from the builder's generator.
    pub fn next_id(&mut self) -> String {
        let mut bytes = [0u8; 16];
        self.rng.fill_bytes(&mut bytes);
        uuid::Builder::from_random_bytes(bytes).into_uuid().to_string()
    }

    /// Arc segments per quadrant such that arc chords stay well above the
    /// quantization step.
    fn segments_for(&self, r: f64) -> usize {
        let q = self.doc.transform.scale[0].min(self.doc.transform.scale[1]);
        let k = (r * std::f64::consts::FRAC_PI_2 / (10.0 * q)).floor();
        (k.max(1.0) as usize).min(DEFAULT_SEGMENTS)
    }

    fn check_attributes(&self, object_type: &str, attrs: &Map<String, Value>) -> Result<()> {
        for spec in self.registry.effective_attributes(object_type) {
            match attrs.get(&spec.name) {
                None if spec.required => return Err(Error::MissingAttribute(spec.name.clone())),
                None => {}
                Some(v) => {
                    if spec.value_kind == ValueKind::Enum {
                        if let Some(s) = v.as_str() {
                            if !spec.enum_accepts(s) {
                                return Err(Error::InvalidEnum {
                                    attribute: spec.name.clone(),
                                    value: s.into(),
                                });
                            }
                        }
                    }
                    if !spec.kind_accepts(v) {
                        return Err(Error::Precondition(format!(
                            "attribute `{}` expects a {:?} value, got {v}",
                            spec.name, spec.value_kind
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn insert(
        &mut self,
        record: CityObject,
        geometry: Vec<WorldGeometry>,
        footprint: Option<Footprint>,
    ) -> Result<String> {
        self.check_attributes(&record.object_type, &record.attributes)?;
        let id = self.doc.add_object(Some(self.registry), record, geometry)?;
        if let Some(f) = footprint {
            self.footprints.insert(id.clone(), f);
        }
        Ok(id)
    }

    /// Volume for `spec` derived from `base`.
    fn realize(&self, base: &Footprint, spec: &AnalysisSpec) -> Result<(WorldGeometry, Footprint)> {
        spec.validate()?;
        let (lo, hi) = if spec.extrusion_up + spec.extrusion_down > 0.0 {
            (base.z0 - spec.extrusion_down, base.z0 + spec.extrusion_up)
        } else {
            (base.z_low, base.z_high)
        };
        let buffered = |r: f64| buffer2d(&base.polygon, r, self.segments_for(r));
        let (polygon, lo, hi) = match spec.analysis.as_str() {
            "3DBuffer" => {
                let r = spec.value;
                (buffered(r)?, lo - r, hi + r)
            }
            "2DBuffer" | "BufferExtrusion" => (buffered(spec.value)?, lo, hi),
            _ => (base.polygon.clone(), lo, hi),
        };
        let geometry = if hi > lo {
            WorldGeometry::from(&extrude(&polygon, lo, hi)?)
        } else if spec.uses_extrusion() {
            return Err(Error::DegenerateHeight { low: lo, high: hi });
        } else {
            flat_surface(&polygon, lo)
        };
        let z0 = base.z0;
        Ok((geometry, Footprint { polygon, z0, z_low: lo, z_high: hi }))
    }

    fn prism(&self, p: &Polygon2, up: f64, down: f64) -> Result<(WorldGeometry, Footprint)> {
        let z0 = self.reference_z;
        let (lo, hi) = (z0 - down, z0 + up);
        if !(up >= 0.0 && down >= 0.0) {
            return Err(Error::Precondition(format!("extrusion must be ≥ 0, got up {up} down {down}")));
        }
        let solid = extrude(p, lo, hi)?;
        Ok((
            WorldGeometry::from(&solid),
            Footprint { polygon: p.clone(), z0, z_low: lo, z_high: hi },
        ))
    }

    /// Terrain surface of a crater: the grid clipped to the footprint box and
    /// triangulated inside the footprint. The id is the crater ID.
    pub fn build_crater(&mut self, footprint: &Polygon2, grid: &DemGrid, attrs: Map<String, Value>) -> Result<String> {
        self.check_attributes(CRATER, &attrs)?;
        let id = match attrs.get("craterID") {
            Some(Value::String(s)) => s.clone(),
            Some(v) => v.to_string(),
            None => return Err(Error::MissingAttribute("craterID".into())),
        };
        let tin = tin_from_grid(&clip(grid, &footprint.bbox())?, footprint)?;
        let zs = tin.triangles.iter().flatten().map(|p| p[2]);
        let (lo, hi) = zs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), z| (a.min(z), b.max(z)));
        let fp = Footprint {
            polygon: footprint.clone(),
            z0: self.reference_z,
            z_low: lo,
            z_high: hi,
        };
        self.insert(
            CityObject::new(id, CRATER).with_attributes(attrs),
            vec![WorldGeometry::from(&tin)],
            Some(fp),
        )
    }

    pub fn build_surface_object(
        &mut self,
        footprint: &Polygon2,
        up: f64,
        down: f64,
        attrs: Map<String, Value>,
    ) -> Result<String> {
        let (geometry, fp) = self.prism(footprint, up, down)?;
        let id = self.next_id();
        self.insert(CityObject::new(id, SURFACE_OBJECT).with_attributes(attrs), vec![geometry], Some(fp))
    }

    /// Plan unit extruded over [z0 − underground, z0 + aboveground], or a flat
    /// surface at z0 when both depths are zero.
    pub fn build_plan_unit(
        &mut self,
        footprint: &Polygon2,
        use_type: &str,
        underground: f64,
        aboveground: f64,
        mut attrs: Map<String, Value>,
    ) -> Result<String> {
        if use_type.is_empty() {
            return Err(Error::Precondition("plan use type must be non-empty".into()));
        }
        attrs.insert("planUseType".into(), json!(use_type));
        attrs.insert("undergroundDepth".into(), number(underground));
        attrs.insert("abovegroundDepth".into(), number(aboveground));
        let (geometry, fp) = if underground > 0.0 || aboveground > 0.0 {
            self.prism(footprint, aboveground, underground)?
        } else {
            let z0 = self.reference_z;
            (
                flat_surface(footprint, z0),
                Footprint { polygon: footprint.clone(), z0, z_low: z0, z_high: z0 },
            )
        };
        let id = self.next_id();
        self.insert(CityObject::new(id, PLAN_UNIT).with_attributes(attrs), vec![geometry], Some(fp))
    }

    pub fn build_scientific_evidence(
        &mut self,
        footprint: &Polygon2,
        spec: &AnalysisSpec,
        evidence: &str,
        mut attrs: Map<String, Value>,
    ) -> Result<String> {
        if !registry::EVIDENCE_TYPES.contains(&evidence) {
            return Err(Error::InvalidEnum {
                attribute: "evidenceType".into(),
                value: evidence.into(),
            });
        }
        let z0 = self.reference_z;
        let base = Footprint { polygon: footprint.clone(), z0, z_low: z0, z_high: z0 };
        let (geometry, fp) = self.realize(&base, spec)?;
        let id = self.next_id();
        attrs.insert("evidenceType".into(), json!(evidence));
        attrs.insert("legalObjectID".into(), json!(id));
        self.insert(CityObject::new(id, SCIENTIFIC_EVIDENCE).with_attributes(attrs), vec![geometry], Some(fp))
    }

    /// Protected area: the site buffered by `buffer`, then extruded.
    pub fn build_protected_area(
        &mut self,
        site: &Site,
        buffer: f64,
        up: f64,
        down: f64,
        area_name: &str,
        mut attrs: Map<String, Value>,
    ) -> Result<String> {
        if !(buffer >= 0.0) || !buffer.is_finite() {
            return Err(Error::Precondition(format!("buffer must be ≥ 0, got {buffer}")));
        }
        let polygon = match site {
            Site::Point(_) if buffer == 0.0 => {
                return Err(Error::DegenerateGeometry("a point site needs a positive buffer".into()))
            }
            Site::Point(c) => Polygon2::circle(*c, buffer, 4 * self.segments_for(buffer))?,
            Site::Polygon(p) => buffer2d(p, buffer, self.segments_for(buffer))?,
        };
        let (geometry, fp) = self.prism(&polygon, up, down)?;
        let id = self.next_id();
        attrs.insert("areaName".into(), json!(area_name));
        attrs.insert("legalObjectID".into(), json!(id));
        self.insert(CityObject::new(id, PROTECTED_AREA).with_attributes(attrs), vec![geometry], Some(fp))
    }

    /// Targets admitted for `source` by associations declared on it directly.
    fn check_target(&self, source: &str, target_id: &str) -> Result<Footprint> {
        let target = self
            .doc
            .get(target_id)
            .ok_or_else(|| Error::TargetNotFound(target_id.into()))?;
        let allowed = self.registry.relationships.iter().any(|r| {
            r.realization == Realization::RelatedObjectId
                && r.source == source
                && self.registry.is_a(&target.object_type, &r.target)
        });
        if !allowed {
            return Err(Error::TargetTypeNotAllowed {
                id: target_id.into(),
                object_type: target.object_type.clone(),
            });
        }
        match self.footprints.get(target_id) {
            Some(f) => Ok(f.clone()),
            None => self.footprint_from_geometry(target),
        }
    }

    /// Bounding-box footprint for objects this builder did not create.
    fn footprint_from_geometry(&self, o: &CityObject) -> Result<Footprint> {
        let pts: Vec<_> = o
            .geometry
            .iter()
            .flat_map(|g| g.boundaries.rings().flatten().copied().collect::<Vec<_>>())
            .map(|i| self.doc.world_vertex(i))
            .collect();
        let xy: Vec<Point2> = pts.iter().map(|p| [p[0], p[1]]).collect();
        let bb = Aabb::of_points(&xy)
            .ok_or_else(|| Error::DegenerateGeometry(format!("object `{}` has no geometry", o.id)))?;
        let lo = pts.iter().map(|p| p[2]).fold(f64::INFINITY, f64::min);
        let hi = pts.iter().map(|p| p[2]).fold(f64::NEG_INFINITY, f64::max);
        Ok(Footprint {
            polygon: Polygon2::rectangle(bb.min, bb.max)?,
            z0: lo,
            z_low: lo,
            z_high: hi,
        })
    }

    pub fn build_restriction(
        &mut self,
        target_id: &str,
        spec: &AnalysisSpec,
        restriction_type: &str,
        mut attrs: Map<String, Value>,
    ) -> Result<String> {
        let base = self.check_target(RESTRICTION, target_id)?;
        if !registry::RESTRICTION_TYPES.contains(&restriction_type) {
            return Err(Error::InvalidEnum {
                attribute: "restrictionType".into(),
                value: restriction_type.into(),
            });
        }
        let (geometry, fp) = self.realize(&base, spec)?;
        let id = self.next_id();
        attrs.insert("restrictionType".into(), json!(restriction_type));
        attrs.insert("restrictionAnalysisType".into(), json!(spec.analysis));
        attrs.insert("restrictionValue".into(), number(spec.value));
        attrs.insert("restrictionUnit".into(), json!(spec.unit));
        attrs.insert("relatedObjectID".into(), json!(target_id));
        attrs.insert("legalObjectID".into(), json!(id));
        self.insert(CityObject::new(id, RESTRICTION).with_attributes(attrs), vec![geometry], Some(fp))
    }

    pub fn build_legal_space(
        &mut self,
        target_id: &str,
        spec: &AnalysisSpec,
        mut attrs: Map<String, Value>,
    ) -> Result<String> {
        let base = self.check_target(LEGAL, target_id)?;
        let (geometry, fp) = self.realize(&base, spec)?;
        let id = self.next_id();
        attrs.insert("relatedObjectID".into(), json!(target_id));
        attrs.insert("legalObjectID".into(), json!(id));
        self.insert(CityObject::new(id, LEGAL).with_attributes(attrs), vec![geometry], Some(fp))
    }

    /// A building with one unit per input space. Without an envelope the
    /// building gets the bounding box solid of its units.
    pub fn build_building(&mut self, input: SpaceSolidInput) -> Result<(String, Vec<String>)> {
        let mut seen = HashSet::new();
        for u in &input.units {
            if !seen.insert(u.unit_id.as_str()) || self.doc.get(&u.unit_id).is_some() {
                return Err(Error::DuplicateUnitId(u.unit_id.clone()));
            }
        }
        let mut unit_geoms = Vec::with_capacity(input.units.len());
        for u in &input.units {
            let (mesh, fp) = match &u.solid {
                UnitSolid::Prism { footprint, z_low, z_high } => {
                    let fp = Footprint {
                        polygon: footprint.clone(),
                        z0: *z_low,
                        z_low: *z_low,
                        z_high: *z_high,
                    };
                    (extrude(footprint, *z_low, *z_high)?, fp)
                }
                UnitSolid::Mesh(m) => (m.clone(), mesh_footprint(m)?),
            };
            self.check_attributes(BUILDING_UNIT, &u.unit_attrs)?;
            unit_geoms.push((mesh, fp));
        }

        let envelope = match input.envelope {
            Some(m) => Some(m),
            None if unit_geoms.is_empty() => None,
            None => {
                let mut fp = unit_geoms[0].1.clone();
                let mut bb = fp.polygon.bbox();
                for (_, f) in &unit_geoms[1..] {
                    bb = bb.union(&f.polygon.bbox());
                    fp.z_low = fp.z_low.min(f.z_low);
                    fp.z_high = fp.z_high.max(f.z_high);
                }
                Some(extrude(&Polygon2::rectangle(bb.min, bb.max)?, fp.z_low, fp.z_high)?)
            }
        };
        let building_id = if input.building_id.is_empty() {
            self.next_id()
        } else {
            input.building_id
        };
        let building_fp = envelope.as_ref().map(mesh_footprint).transpose()?;
        let geometry = envelope.iter().map(WorldGeometry::from).collect();
        let building_id = self.insert(
            CityObject::new(building_id, BUILDING).with_attributes(input.building_attrs),
            geometry,
            building_fp,
        )?;

        let mut unit_ids = Vec::with_capacity(input.units.len());
        for (u, (mesh, fp)) in input.units.into_iter().zip(unit_geoms) {
            let record = CityObject::new(u.unit_id, BUILDING_UNIT)
                .with_attributes(u.unit_attrs)
                .with_parent(building_id.clone());
            unit_ids.push(self.insert(record, vec![WorldGeometry::from(&mesh)], Some(fp))?);
        }
        Ok((building_id, unit_ids))
    }
}

fn mesh_footprint(m: &SolidMesh) -> Result<Footprint> {
    let xy: Vec<Point2> = m.vertices().map(|p| [p[0], p[1]]).collect();
    let bb = Aabb::of_points(&xy).ok_or_else(|| Error::DegenerateGeometry("empty solid".into()))?;
    let (lo, hi) = m
        .z_range()
        .ok_or_else(|| Error::DegenerateGeometry("empty solid".into()))?;
    Ok(Footprint {
        polygon: Polygon2::rectangle(bb.min, bb.max)?,
        z0: lo,
        z_low: lo,
        z_high: hi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crs::{mars_eqc_103885, moon_albers_30185};
    use crate::geometry::check_watertight_indexed;
    use crate::model::{new_document, Boundaries, Transform};
    use crate::registry::builtin_registry;

    fn doc() -> CityDocument {
        new_document(&mars_eqc_103885().url(), Transform::default()).unwrap()
    }

    fn attrs(v: Value) -> Map<String, Value> {
        v.as_object().unwrap().clone()
    }

    fn square(x: f64, y: f64, side: f64) -> Polygon2 {
        Polygon2::rectangle([x, y], [x + side, y + side]).unwrap()
    }

    fn solid_issues(d: &CityDocument, id: &str) -> usize {
        let mut n = 0;
        for g in &d.objects[id].geometry {
            if let Boundaries::Solid(shells) = &g.boundaries {
                n += check_watertight_indexed(shells, |i| d.world_vertex(i)).len();
            }
        }
        n
    }

    #[test]
    fn jezero_crater() {
        let reg = builtin_registry();
        let mut d = doc();
        let mut b = Builder::new(&mut d, &reg, Some(1));
        let grid = DemGrid::from_fn(20, 20, 100.0, [0.0, 0.0], |_, _| -2500.0).unwrap();
        let fp = Polygon2::circle([1000.0, 1000.0], 600.0, 32).unwrap();
        let a = attrs(json!({
            "craterID": 14300, "craterName": "Jezero", "diameter": 47520.0,
            "approvalDate": 2007, "target": "Mars", "IAUID": 14300
        }));
        let id = b.build_crater(&fp, &grid, a.clone()).unwrap();
        assert_eq!(id, "14300");
        assert_eq!(d.objects["14300"].attributes, a);
        // flat grid, flat surface
        let zs: HashSet<i64> = d.vertices.iter().map(|v| v[2]).collect();
        assert_eq!(zs.len(), 1);
    }

    #[test]
    fn overlapping_craters_are_separate() {
        let reg = builtin_registry();
        let mut d = doc();
        let mut b = Builder::new(&mut d, &reg, Some(1));
        let grid = DemGrid::from_fn(30, 30, 100.0, [0.0, 0.0], |x, y| (x - y) / 10.0).unwrap();
        for (i, cx) in [(1, 1200.0), (2, 1700.0)] {
            let fp = Polygon2::circle([cx, 1500.0], 500.0, 32).unwrap();
            let a = attrs(json!({"craterID": i, "craterName": format!("c{i}"), "diameter": 1000.0}));
            b.build_crater(&fp, &grid, a).unwrap();
        }
        assert_eq!(d.objects.len(), 2);
        assert_ne!(d.objects["1"].geometry, d.objects["2"].geometry);
    }

    #[test]
    fn crater_requires_id_attributes() {
        let reg = builtin_registry();
        let mut d = doc();
        let mut b = Builder::new(&mut d, &reg, Some(1));
        let grid = DemGrid::from_fn(4, 4, 1.0, [0.0, 0.0], |_, _| 0.0).unwrap();
        let e = b.build_crater(&square(0.0, 0.0, 4.0), &grid, attrs(json!({"craterID": 1})));
        assert!(matches!(e, Err(Error::MissingAttribute(_))));
    }

    #[test]
    fn surface_object_prism() {
        let reg = builtin_registry();
        let mut d = doc();
        let mut b = Builder::new(&mut d, &reg, Some(1));
        let a = attrs(json!({"objectType": "Irregular Patch"}));
        let id = b.build_surface_object(&square(0.0, 0.0, 1.0), 1.0, 0.0, a.clone()).unwrap();
        assert!(matches!(
            b.build_surface_object(&square(0.0, 0.0, 1.0), 0.0, 0.0, a),
            Err(Error::DegenerateHeight { .. })
        ));
        let f = b.footprint(&id).unwrap();
        assert_eq!((f.z_low, f.z_high), (0.0, 1.0));
        assert_eq!(solid_issues(&d, &id), 0);
        assert_eq!(d.objects[&id].attr_str("objectType"), Some("Irregular Patch"));
    }

    #[test]
    fn plan_units() {
        let reg = builtin_registry();
        let mut d = doc();
        let mut b = Builder::new(&mut d, &reg, Some(1));
        let mining = b.build_plan_unit(&square(0.0, 0.0, 10.0), "mining", 500.0, 0.0, Map::new()).unwrap();
        let settle = b.build_plan_unit(&square(20.0, 0.0, 10.0), "settlement", 50.0, 50.0, Map::new()).unwrap();
        let flat = b.build_plan_unit(&square(40.0, 0.0, 10.0), "settlement", 0.0, 0.0, Map::new()).unwrap();
        assert!(b.build_plan_unit(&square(0.0, 0.0, 1.0), "", 0.0, 0.0, Map::new()).is_err());
        assert!(matches!(
            b.build_plan_unit(&square(0.0, 0.0, 1.0), "tourism", 0.0, 0.0, Map::new()),
            Err(Error::InvalidEnum { .. })
        ));
        let f = b.footprint(&settle).unwrap();
        assert_eq!(f.z_high - f.z_low, 100.0);
        assert_eq!(d.objects[&mining].attributes["undergroundDepth"], json!(500));
        assert_eq!(d.objects[&mining].attr_str("planUseType"), Some("mining"));
        assert_eq!(d.objects[&flat].geometry[0].kind(), crate::model::GeometryKind::MultiSurface);
    }

    #[test]
    fn evidence_vocabulary() {
        let reg = builtin_registry();
        let mut d = doc();
        let mut b = Builder::new(&mut d, &reg, Some(1));
        let spec = AnalysisSpec::extrusion(25.0, 25.0);
        let id = b.build_scientific_evidence(&square(0.0, 0.0, 100.0), &spec, "waterIce", Map::new()).unwrap();
        let e = b.build_scientific_evidence(&square(0.0, 0.0, 1.0), &spec, "magnetic", Map::new());
        assert!(matches!(e, Err(Error::InvalidEnum { .. })));
        assert_eq!(d.objects[&id].attr_str("evidenceType"), Some("waterIce"));
        assert_eq!(d.objects[&id].attr_str("legalObjectID"), Some(id.as_str()));
    }

    #[test]
    fn protected_area_from_point() {
        let reg = builtin_registry();
        let mut d = new_document(&moon_albers_30185().url(), Transform::default()).unwrap();
        let mut b = Builder::new(&mut d, &reg, Some(1));
        let (x, y) = moon_albers_30185().forward(20.19106, 30.77228).unwrap();
        let id = b.build_protected_area(&Site::Point([x, y]), 5.0, 1.0, 1.0, "A17 LM", Map::new()).unwrap();
        let f = b.footprint(&id).unwrap().clone();
        assert!(f.polygon.contains([x, y]));
        assert!((f.polygon.area() - std::f64::consts::PI * 25.0).abs() < 1.0);
        assert!(matches!(
            b.build_protected_area(&Site::Point([x, y]), 0.0, 1.0, 1.0, "x", Map::new()),
            Err(Error::DegenerateGeometry(_))
        ));
        let sq = square(0.0, 0.0, 10.0);
        let id2 = b.build_protected_area(&Site::Polygon(sq.clone()), 0.0, 1.0, 1.0, "p", Map::new()).unwrap();
        assert_eq!(b.footprint(&id2).unwrap().polygon, sq);
        assert_eq!(d.objects[&id].attr_str("areaName"), Some("A17 LM"));
        assert_eq!(solid_issues(&d, &id), 0);
    }

    #[test]
    fn restriction_attributes_and_containment() {
        let reg = builtin_registry();
        let mut d = doc();
        let mut b = Builder::new(&mut d, &reg, Some(7));
        let unit = b.build_plan_unit(&square(0.0, 0.0, 4500.0), "settlement", 50.0, 50.0, Map::new()).unwrap();
        let r = b.build_restriction(&unit, &AnalysisSpec::buffer3d(50.0), "settlement", Map::new()).unwrap();
        let f = b.footprint(&r).unwrap().clone();
        let t = b.footprint(&unit).unwrap().clone();
        assert_eq!((f.z_low, f.z_high), (t.z_low - 50.0, t.z_high + 50.0));
        let ring = t.polygon.exterior();
        let chord = (std::f64::consts::PI / (4.0 * DEFAULT_SEGMENTS as f64)).cos();
        for (a, c) in ring.iter().zip(ring.iter().cycle().skip(1)) {
            let mid = [(a[0] + c[0]) / 2.0, (a[1] + c[1]) / 2.0];
            assert!(f.polygon.contains(mid));
            assert!(f.polygon.boundary_distance(mid) >= 50.0 - 1e-6);
            // corners are met by arc chords of the inscribed disc
            assert!(f.polygon.boundary_distance(*a) >= 50.0 * chord - 1e-6);
        }
        let o = &d.objects[&r];
        assert_eq!(o.attributes["restrictionValue"], json!(50));
        assert_eq!(o.attr_str("restrictionUnit"), Some("metre"));
        assert_eq!(o.attr_str("restrictionAnalysisType"), Some("3DBuffer"));
        assert_eq!(o.attr_str("relatedObjectID"), Some(unit.as_str()));
        assert_eq!(solid_issues(&d, &r), 0);
    }

    #[test]
    fn restriction_target_errors() {
        let reg = builtin_registry();
        let mut d = doc();
        let mut b = Builder::new(&mut d, &reg, Some(1));
        let spec = AnalysisSpec::buffer3d(10.0);
        assert!(matches!(
            b.build_restriction("missing", &spec, "mining", Map::new()),
            Err(Error::TargetNotFound(_))
        ));
        let (bid, _) = b.build_building(SpaceSolidInput { building_id: "b".into(), ..Default::default() }).unwrap();
        assert!(matches!(
            b.build_restriction(&bid, &spec, "mining", Map::new()),
            Err(Error::TargetTypeNotAllowed { .. })
        ));
        let unit = b.build_plan_unit(&square(0.0, 0.0, 10.0), "mining", 1.0, 0.0, Map::new()).unwrap();
        assert!(matches!(
            b.build_restriction(&unit, &spec, "tourism", Map::new()),
            Err(Error::InvalidEnum { .. })
        ));
    }

    #[test]
    fn mining_legal_space() {
        let reg = builtin_registry();
        let mut d = doc();
        let mut b = Builder::new(&mut d, &reg, Some(1));
        let unit = b.build_plan_unit(&square(0.0, 0.0, 100.0), "mining", 500.0, 0.0, Map::new()).unwrap();
        let l = b.build_legal_space(&unit, &AnalysisSpec::extrusion(0.0, 500.0), Map::new()).unwrap();
        let f = b.footprint(&l).unwrap();
        assert_eq!((f.z_low, f.z_high), (-500.0, 0.0));
        assert_eq!(d.objects[&l].attr_str("relatedObjectID"), Some(unit.as_str()));
        assert_eq!(d.objects[&l].attr_str("legalObjectID"), Some(l.as_str()));
    }

    #[test]
    fn legal_space_rejects_crater() {
        let reg = builtin_registry();
        let mut d = doc();
        let mut b = Builder::new(&mut d, &reg, Some(1));
        let grid = DemGrid::from_fn(10, 10, 1.0, [0.0, 0.0], |_, _| 0.0).unwrap();
        let a = attrs(json!({"craterID": 5, "craterName": "x", "diameter": 4.0}));
        let c = b.build_crater(&square(2.0, 2.0, 4.0), &grid, a).unwrap();
        assert!(matches!(
            b.build_legal_space(&c, &AnalysisSpec::buffer3d(1.0), Map::new()),
            Err(Error::TargetTypeNotAllowed { .. })
        ));
    }

    fn unit(id: &str, x: f64) -> UnitInput {
        UnitInput {
            unit_id: id.into(),
            unit_attrs: Map::new(),
            solid: UnitSolid::Prism { footprint: square(x, 0.0, 5.0), z_low: 0.0, z_high: 3.0 },
        }
    }

    #[test]
    fn building_with_units() {
        let reg = builtin_registry();
        let mut d = doc();
        let mut b = Builder::new(&mut d, &reg, Some(1));
        let input = SpaceSolidInput {
            building_id: "building1".into(),
            units: vec![unit("0pNy6pOyf7JPmXRLgxs3sW", 0.0), unit("u2", 5.0)],
            ..Default::default()
        };
        let (bid, units) = b.build_building(input).unwrap();
        let l = b.build_legal_space(&units[0], &AnalysisSpec::buffer3d(0.001), Map::new()).unwrap();
        let f = b.footprint(&l).unwrap();
        assert!((f.z_low + 0.001).abs() < 1e-12 && (f.z_high - 3.001).abs() < 1e-12);
        assert_eq!(bid, "building1");
        assert_eq!(d.objects["0pNy6pOyf7JPmXRLgxs3sW"].parents, vec!["building1"]);
        assert_eq!(d.objects["building1"].children, units);
        for id in [&bid, &units[0], &units[1], &l] {
            assert_eq!(solid_issues(&d, id), 0, "{id}");
        }
    }

    #[test]
    fn building_edge_cases() {
        let reg = builtin_registry();
        let mut d = doc();
        let mut b = Builder::new(&mut d, &reg, Some(1));
        let (bid, units) = b
            .build_building(SpaceSolidInput { building_id: "empty".into(), ..Default::default() })
            .unwrap();
        assert!(units.is_empty());
        let dup = SpaceSolidInput {
            building_id: "b2".into(),
            units: vec![unit("u", 0.0), unit("u", 5.0)],
            ..Default::default()
        };
        assert!(matches!(b.build_building(dup), Err(Error::DuplicateUnitId(_))));
        assert!(d.objects[&bid].children.is_empty());
        assert!(!d.objects.contains_key("b2"));
    }

    #[test]
    fn seeded_ids_repeat() {
        let reg = builtin_registry();
        let ids = |seed| {
            let mut d = doc();
            let mut b = Builder::new(&mut d, &reg, Some(seed));
            (b.next_id(), b.next_id())
        };
        assert_eq!(ids(3), ids(3));
        assert_ne!(ids(3), ids(4));
        let (a, _) = ids(3);
        assert_eq!(uuid::Uuid::parse_str(&a).unwrap().get_version_num(), 4);
    }

    #[test]
    fn settlement_grid() {
        let spec = moon_albers_30185();
        let g = grid_from_center(&spec, -88.76, -232.0, 4500.0).unwrap();
        assert!((g.area() - 20_250_000.0).abs() < 1e-3);
        let (x, y) = spec.forward(-88.76, -232.0).unwrap();
        let bb = g.bbox();
        assert!(((bb.min[0] + bb.max[0]) / 2.0 - x).abs() < 1e-6);
        assert!(((bb.min[1] + bb.max[1]) / 2.0 - y).abs() < 1e-6);
        assert!(grid_from_center(&spec, 0.0, 0.0, 0.0).is_err());
        let unit = grid_from_center(&mars_eqc_103885(), 0.0, 0.0, 1.0).unwrap();
        assert_eq!(unit.bbox(), Aabb { min: [-0.5, -0.5], max: [0.5, 0.5] });
    }
}
