//! In-memory CityJSON documents with a quantized, deduplicated vertex pool.

mod io;
mod upgrade;

use std::collections::{BTreeMap, HashMap};

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::registry::ExtensionRegistry;

pub use io::{read_document, read_document_unchecked, write_document};
pub use upgrade::upgrade_document;

pub const CURRENT_VERSION: &str = "2.0";
pub const DEFAULT_LOD: &str = "1";

/// City object types of the CityJSON 2.0 core.
pub const CORE_TYPES: &[&str] = &[
    "Bridge",
    "BridgePart",
    "BridgeInstallation",
    "BridgeConstructiveElement",
    "BridgeRoom",
    "BridgeFurniture",
    "Building",
    "BuildingPart",
    "BuildingInstallation",
    "BuildingConstructiveElement",
    "BuildingFurniture",
    "BuildingStorey",
    "BuildingRoom",
    "BuildingUnit",
    "CityFurniture",
    "CityObjectGroup",
    "GenericCityObject",
    "LandUse",
    "OtherConstruction",
    "PlantCover",
    "SolitaryVegetationObject",
    "TINRelief",
    "TransportSquare",
    "Railway",
    "Road",
    "Tunnel",
    "TunnelPart",
    "TunnelInstallation",
    "TunnelConstructiveElement",
    "TunnelHollowSpace",
    "TunnelFurniture",
    "WaterBody",
    "Waterway",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transform {
    pub scale: [f64; 3],
    pub translate: [f64; 3],
}

impl Default for Transform {
    fn default() -> Self {
        Transform {
            scale: [0.001; 3],
            translate: [0.0; 3],
        }
    }
}

impl Transform {
    pub fn quantize(&self, p: Point3) -> [i64; 3] {
        std::array::from_fn(|i| ((p[i] - self.translate[i]) / self.scale[i]).round() as i64)
    }

    pub fn world(&self, v: [i64; 3]) -> Point3 {
        std::array::from_fn(|i| v[i] as f64 * self.scale[i] + self.translate[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeometryKind {
    MultiSurface,
    Solid,
}

impl GeometryKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GeometryKind::MultiSurface => "MultiSurface",
            GeometryKind::Solid => "Solid",
        }
    }
}

/// Surface = rings, first ring exterior. Rings are open (no repeated vertex).
pub type Surface<T> = Vec<Vec<T>>;

#[derive(Debug, Clone, PartialEq)]
pub enum Boundaries<T> {
    MultiSurface(Vec<Surface<T>>),
    Solid(Vec<Vec<Surface<T>>>),
}

impl<T> Boundaries<T> {
    pub fn kind(&self) -> GeometryKind {
        match self {
            Boundaries::MultiSurface(_) => GeometryKind::MultiSurface,
            Boundaries::Solid(_) => GeometryKind::Solid,
        }
    }

    pub fn rings(&self) -> Box<dyn Iterator<Item = &Vec<T>> + '_> {
        match self {
            Boundaries::MultiSurface(s) => Box::new(s.iter().flatten()),
            Boundaries::Solid(sh) => Box::new(sh.iter().flatten().flatten()),
        }
    }

    pub fn rings_mut(&mut self) -> Box<dyn Iterator<Item = &mut Vec<T>> + '_> {
        match self {
            Boundaries::MultiSurface(s) => Box::new(s.iter_mut().flatten()),
            Boundaries::Solid(sh) => Box::new(sh.iter_mut().flatten().flatten()),
        }
    }
}

/// Geometry stored in a document: vertex indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub lod: String,
    pub boundaries: Boundaries<usize>,
}

impl Geometry {
    pub fn kind(&self) -> GeometryKind {
        self.boundaries.kind()
    }
}

/// Geometry in world coordinates, before it enters the vertex pool.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldGeometry {
    pub lod: String,
    pub boundaries: Boundaries<Point3>,
}

impl WorldGeometry {
    pub fn multi_surface(surfaces: Vec<Surface<Point3>>) -> Self {
        WorldGeometry {
            lod: DEFAULT_LOD.into(),
            boundaries: Boundaries::MultiSurface(surfaces),
        }
    }

    pub fn solid(shells: Vec<Vec<Surface<Point3>>>) -> Self {
        WorldGeometry {
            lod: DEFAULT_LOD.into(),
            boundaries: Boundaries::Solid(shells),
        }
    }
}

impl From<&crate::geometry::SolidMesh> for WorldGeometry {
    fn from(s: &crate::geometry::SolidMesh) -> Self {
        WorldGeometry::solid(s.shells.clone())
    }
}

impl From<&crate::geometry::TriSurface> for WorldGeometry {
    fn from(t: &crate::geometry::TriSurface) -> Self {
        WorldGeometry::multi_surface(t.triangles.iter().map(|tri| vec![tri.to_vec()]).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CityObject {
    pub id: String,
    pub object_type: String,
    pub attributes: Map<String, Value>,
    pub geometry: Vec<Geometry>,
    pub parents: Vec<String>,
    pub children: Vec<String>,
}

impl CityObject {
    pub fn new(id: impl Into<String>, object_type: impl Into<String>) -> Self {
        CityObject {
            id: id.into(),
            object_type: object_type.into(),
            ..Default::default()
        }
    }

    pub fn with_attributes(mut self, attributes: Map<String, Value>) -> Self {
        self.attributes = attributes;
        self
    }

    pub fn with_parent(mut self, parent: impl Into<String>) -> Self {
        self.parents.push(parent.into());
        self
    }

    pub fn attr_str(&self, name: &str) -> Option<&str> {
        self.attributes.get(name).and_then(Value::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ExtensionRef {
    pub url: String,
    pub version: String,
}

/// Lookup from quantized vertex to pool index. Derived data, so it never
/// takes part in equality.
#[derive(Debug, Clone, Default)]
struct VertexIndex(HashMap<[i64; 3], usize>);

impl PartialEq for VertexIndex {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CityDocument {
    pub version: String,
    pub transform: Transform,
    pub vertices: Vec<[i64; 3]>,
    pub objects: BTreeMap<String, CityObject>,
    pub reference_system: String,
    pub extensions: BTreeMap<String, ExtensionRef>,
    /// Metadata members other than `referenceSystem`.
    pub metadata: Map<String, Value>,
    index: VertexIndex,
}

pub fn new_document(crs_url: &str, transform: Transform) -> Result<CityDocument> {
    if crs_url.trim().is_empty() {
        return Err(Error::Precondition("reference system URL must be non-empty".into()));
    }
    if transform.scale.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
        return Err(Error::Precondition(format!("transform scale must be positive, got {:?}", transform.scale)));
    }
    Ok(CityDocument {
        version: CURRENT_VERSION.into(),
        transform,
        vertices: Vec::new(),
        objects: BTreeMap::new(),
        reference_system: crs_url.into(),
        extensions: BTreeMap::new(),
        metadata: Map::new(),
        index: VertexIndex::default(),
    })
}

impl CityDocument {
    pub fn declare_extension(&mut self, name: &str, url: &str, version: &str) {
        self.extensions.insert(
            name.into(),
            ExtensionRef {
                url: url.into(),
                version: version.into(),
            },
        );
    }

    pub fn get(&self, id: &str) -> Option<&CityObject> {
        self.objects.get(id)
    }

    pub fn world_vertex(&self, i: usize) -> Point3 {
        self.transform.world(self.vertices[i])
    }

    /// Pool index of a world vertex, appending it if new.
    pub fn intern(&mut self, p: Point3) -> usize {
        let q = self.transform.quantize(p);
        self.intern_quantized(q)
    }

    fn intern_quantized(&mut self, q: [i64; 3]) -> usize {
        if let Some(&i) = self.index.0.get(&q) {
            return i;
        }
        let i = self.vertices.len();
        self.vertices.push(q);
        self.index.0.insert(q, i);
        i
    }

    fn rebuild_index(&mut self) {
        self.index.0.clear();
        for (i, v) in self.vertices.iter().enumerate() {
            self.index.0.entry(*v).or_insert(i);
        }
    }

    /// Object counts by type.
    pub fn type_counts(&self) -> BTreeMap<&str, usize> {
        let mut m = BTreeMap::new();
        for o in self.objects.values() {
            *m.entry(o.object_type.as_str()).or_insert(0) += 1;
        }
        m
    }

    /// Move `translate` to the minimum corner of the vertex pool. Vertex
    /// indices shift by whole quanta, so world coordinates are unchanged up to
    /// floating-point rounding of the new translate.
    pub fn normalize_translate(&mut self) {
        if self.vertices.is_empty() {
            return;
        }
        let min: [i64; 3] = std::array::from_fn(|i| self.vertices.iter().map(|v| v[i]).min().unwrap_or(0));
        if min == [0; 3] {
            return;
        }
        for v in &mut self.vertices {
            for (c, m) in v.iter_mut().zip(min) {
                *c -= m;
            }
        }
        for (t, (m, s)) in self.transform.translate.iter_mut().zip(min.iter().zip(self.transform.scale)) {
            *t += *m as f64 * s;
        }
        self.rebuild_index();
    }

    /// Add an object whose geometry is given in world coordinates.
    ///
    /// Coordinates are quantized into the shared pool. Consecutive vertices
    /// that collapse onto one quantum are merged, and rings left with fewer
    /// than 3 distinct vertices are dropped (a surface goes with its exterior).
    /// Listed parents and children must already exist; their reverse links
    /// are added.
    pub fn add_object(
        &mut self,
        registry: Option<&ExtensionRegistry>,
        mut record: CityObject,
        world: Vec<WorldGeometry>,
    ) -> Result<String> {
        if record.id.is_empty() {
            return Err(Error::Precondition("object id must be non-empty".into()));
        }
        if self.objects.contains_key(&record.id) {
            return Err(Error::Precondition(format!("duplicate object id `{}`", record.id)));
        }
        let known = CORE_TYPES.contains(&record.object_type.as_str())
            || registry.is_some_and(|r| r.lookup(&record.object_type).is_some());
        if !known {
            return Err(Error::UnknownType(record.object_type));
        }
        for g in &world {
            if g.boundaries.rings().flatten().flatten().any(|c| !c.is_finite()) {
                return Err(Error::NonFiniteCoordinate(record.id));
            }
        }
        for link in record.parents.iter().chain(&record.children) {
            if !self.objects.contains_key(link) {
                return Err(Error::TargetNotFound(link.clone()));
            }
        }

        for g in world {
            let boundaries = match g.boundaries {
                Boundaries::MultiSurface(surfaces) => Boundaries::MultiSurface(self.intern_surfaces(surfaces)),
                Boundaries::Solid(shells) => {
                    Boundaries::Solid(shells.into_iter().map(|s| self.intern_surfaces(s)).collect())
                }
            };
            record.geometry.push(Geometry { lod: g.lod, boundaries });
        }

        let id = record.id.clone();
        for p in &record.parents {
            let parent = self.objects.get_mut(p).expect("checked above");
            if !parent.children.contains(&id) {
                parent.children.push(id.clone());
            }
        }
        for c in &record.children {
            let child = self.objects.get_mut(c).expect("checked above");
            if !child.parents.contains(&id) {
                child.parents.push(id.clone());
            }
        }
        self.objects.insert(id.clone(), record);
        Ok(id)
    }

    fn intern_surfaces(&mut self, surfaces: Vec<Surface<Point3>>) -> Vec<Surface<usize>> {
        let mut out = Vec::with_capacity(surfaces.len());
        for surface in surfaces {
            let mut rings = Vec::with_capacity(surface.len());
            for (k, ring) in surface.into_iter().enumerate() {
                let mut q: Vec<[i64; 3]> = ring.iter().map(|p| self.transform.quantize(*p)).collect();
                q.dedup();
                while q.len() > 1 && q.first() == q.last() {
                    q.pop();
                }
                let mut distinct = q.clone();
                distinct.sort_unstable();
                distinct.dedup();
                if distinct.len() < 3 {
                    if k == 0 {
                        break;
                    }
                    continue;
                }
                rings.push(q.into_iter().map(|v| self.intern_quantized(v)).collect());
            }
            if !rings.is_empty() {
                out.push(rings);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crs::crs_url;
    use crate::registry::{builtin_registry, BUILDING, BUILDING_UNIT, CRATER};

    fn doc() -> CityDocument {
        new_document(&crs_url("EPSG", "103885").unwrap(), Transform::default()).unwrap()
    }

    fn tri(z: f64) -> WorldGeometry {
        WorldGeometry::multi_surface(vec![vec![vec![[0.0, 0.0, z], [1.0, 0.0, z], [0.0, 1.0, z]]]])
    }

    #[test]
    fn new_document_basics() {
        let d = doc();
        assert!(d.reference_system.ends_with("/103885"));
        assert!(d.objects.is_empty());
        assert_eq!(d.version, "2.0");
        assert!(matches!(new_document("", Transform::default()), Err(Error::Precondition(_))));
    }

    #[test]
    fn shared_vertices_are_pooled() {
        let mut d = doc();
        let reg = builtin_registry();
        d.add_object(Some(&reg), CityObject::new("a", "GenericCityObject"), vec![tri(0.0)]).unwrap();
        assert_eq!(d.vertices.len(), 3);
        d.add_object(Some(&reg), CityObject::new("b", "GenericCityObject"), vec![tri(0.0)]).unwrap();
        assert_eq!(d.vertices.len(), 3);
        assert_eq!(d.intern([0.0, 0.0, 0.0004]), 0);
        assert_eq!(d.vertices.len(), 3);
    }

    #[test]
    fn parent_links_are_symmetric() {
        let reg = builtin_registry();
        let mut d = doc();
        d.add_object(Some(&reg), CityObject::new("building1", BUILDING), vec![]).unwrap();
        d.add_object(
            Some(&reg),
            CityObject::new("0pNy6pOyf7JPmXRLgxs3sW", BUILDING_UNIT).with_parent("building1"),
            vec![],
        )
        .unwrap();
        assert_eq!(d.objects["building1"].children, vec!["0pNy6pOyf7JPmXRLgxs3sW"]);
        let missing = CityObject::new("x", BUILDING_UNIT).with_parent("nope");
        assert!(matches!(d.add_object(Some(&reg), missing, vec![]), Err(Error::TargetNotFound(_))));
    }

    #[test]
    fn unknown_type_and_bad_coordinates() {
        let reg = builtin_registry();
        let mut d = doc();
        let e = d.add_object(Some(&reg), CityObject::new("n", "+Nope"), vec![]);
        assert!(matches!(e, Err(Error::UnknownType(_))));
        let e = d.add_object(None, CityObject::new("c", CRATER), vec![]);
        assert!(matches!(e, Err(Error::UnknownType(_))));
        let e = d.add_object(Some(&reg), CityObject::new("c", CRATER), vec![tri(f64::NAN)]);
        assert!(matches!(e, Err(Error::NonFiniteCoordinate(_))));
        assert!(d.vertices.is_empty());
    }

    #[test]
    fn sub_quantum_rings_are_dropped() {
        let mut d = doc();
        let sliver = WorldGeometry::multi_surface(vec![
            vec![vec![[0.0, 0.0, 0.0], [0.0001, 0.0, 0.0], [0.0, 0.0001, 0.0]]],
            vec![vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.0]]],
        ]);
        d.add_object(None, CityObject::new("s", "GenericCityObject"), vec![sliver]).unwrap();
        match &d.objects["s"].geometry[0].boundaries {
            Boundaries::MultiSurface(s) => assert_eq!(s, &vec![vec![vec![0, 1, 2]]]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn normalize_keeps_world_coordinates() {
        let mut d = doc();
        d.add_object(None, CityObject::new("a", "GenericCityObject"), vec![tri(-500.0)]).unwrap();
        let before: Vec<Point3> = (0..d.vertices.len()).map(|i| d.world_vertex(i)).collect();
        d.normalize_translate();
        assert!(d.vertices.iter().flatten().all(|c| *c >= 0));
        for (i, b) in before.iter().enumerate() {
            let w = d.world_vertex(i);
            assert!((0..3).all(|k| (w[k] - b[k]).abs() < 1e-9));
        }
        assert_eq!(d.intern([1.0, 0.0, -500.0]), 1);
    }
}
