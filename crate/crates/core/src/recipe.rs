//! Recipe files: a JSON description of one dataset build.
//!
//! ```json
//! {
//!   "crs": "ESRI:103885",
//!   "output": "out/mars.city.json",
//!   "seed": 2024,
//!   "metadata": {"title": "Mars"},
//!   "steps": [
//!     {"role": "crater", "name": "jezero", "source": "data/jezero.geojson",
//!      "dem": "data/jezero.asc", "aggregate": 1},
//!     {"role": "scientific_evidence", "name": "home_plate", "source": "data/home_plate.geojson",
//!      "evidence": "astrobiological",
//!      "analysis": {"analysis": "BufferExtrusion", "value": 1, "up": 2.5, "down": 2.5}},
//!     {"role": "restriction", "target": "home_plate", "restriction_type": "scientific",
//!      "analysis": {"analysis": "3DBuffer", "value": 250, "up": 25, "down": 25}}
//!   ]
//! }
//! ```
//!
//! Roles: `crater`, `surface_object`, `plan_unit`, `scientific_evidence`,
//! `protected_area`, `restriction`, `legal_space`, `building`. Paths are
//! relative to the recipe file. Every step with a `name` registers the ids it
//! creates under that name; a building step also registers `<name>.units`.
//! `target` takes a step name or an object id.
//!
//! Feature properties become attributes; the step's `attributes` fill in keys
//! the feature does not set. `geographic: true` reads source coordinates as
//! `[lon, lat]` degrees and projects them. `z0` is a number or the path of a
//! grid whose mean over each footprint becomes the reference elevation.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::{Map, Value};

use crate::builders::{grid_from_center, AnalysisSpec, Builder, Site};
use crate::crs::{builtin_crs, ProjectionSpec};
use crate::dem::{aggregate, clip, read_asc, DemGrid};
use crate::error::{Error, Result};
use crate::geometry::{Aabb, Polygon2};
use crate::inputs::{read_features, read_space_solids, InputFeature, InputGeometry};
use crate::model::{new_document, CityDocument, Transform};
use crate::registry::ExtensionRegistry;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecipeFile {
    pub crs: String,
    pub output: String,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub metadata: Map<String, Value>,
    pub steps: Vec<Step>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisJson {
    pub analysis: String,
    #[serde(default)]
    pub value: f64,
    #[serde(default = "metre")]
    pub unit: String,
    #[serde(default)]
    pub up: f64,
    #[serde(default)]
    pub down: f64,
}

fn metre() -> String {
    "metre".into()
}

fn one() -> usize {
    1
}

impl From<&AnalysisJson> for AnalysisSpec {
    fn from(a: &AnalysisJson) -> Self {
        AnalysisSpec {
            analysis: a.analysis.clone(),
            value: a.value,
            unit: a.unit.clone(),
            extrusion_up: a.up,
            extrusion_down: a.down,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Z0 {
    Value(f64),
    Grid(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridCell {
    pub lat: f64,
    pub lon: f64,
    pub side: f64,
    #[serde(default)]
    pub attributes: Map<String, Value>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "role", rename_all = "snake_case", deny_unknown_fields)]
pub enum Step {
    Crater {
        name: Option<String>,
        source: String,
        #[serde(default)]
        geographic: bool,
        dem: String,
        #[serde(default = "one")]
        aggregate: usize,
        #[serde(default)]
        attributes: Map<String, Value>,
    },
    SurfaceObject {
        name: Option<String>,
        source: String,
        #[serde(default)]
        geographic: bool,
        up: f64,
        down: f64,
        #[serde(default)]
        z0: Option<Z0>,
        #[serde(default)]
        attributes: Map<String, Value>,
    },
    PlanUnit {
        name: Option<String>,
        #[serde(default)]
        source: Option<String>,
        #[serde(default)]
        geographic: bool,
        #[serde(default)]
        grids: Vec<GridCell>,
        use_type: String,
        #[serde(default)]
        underground: f64,
        #[serde(default)]
        aboveground: f64,
        #[serde(default)]
        z0: Option<Z0>,
        #[serde(default)]
        attributes: Map<String, Value>,
    },
    ScientificEvidence {
        name: Option<String>,
        source: String,
        #[serde(default)]
        geographic: bool,
        evidence: String,
        analysis: AnalysisJson,
        #[serde(default)]
        z0: Option<Z0>,
        #[serde(default)]
        attributes: Map<String, Value>,
    },
    ProtectedArea {
        name: Option<String>,
        source: String,
        #[serde(default)]
        geographic: bool,
        buffer: f64,
        up: f64,
        down: f64,
        #[serde(default)]
        area_name: Option<String>,
        #[serde(default)]
        z0: Option<Z0>,
        #[serde(default)]
        attributes: Map<String, Value>,
    },
    Restriction {
        name: Option<String>,
        target: String,
        restriction_type: String,
        analysis: AnalysisJson,
        #[serde(default)]
        attributes: Map<String, Value>,
    },
    LegalSpace {
        name: Option<String>,
        target: String,
        analysis: AnalysisJson,
        #[serde(default)]
        attributes: Map<String, Value>,
    },
    Building {
        name: Option<String>,
        source: String,
    },
}

pub fn parse_recipe(text: &str) -> Result<RecipeFile> {
    serde_json::from_str(text).map_err(|e| Error::parse(format!("line {} column {}", e.line(), e.column()), e))
}

/// Read a recipe; returns it with the directory its paths are relative to.
pub fn load_recipe(path: &Path) -> Result<(RecipeFile, PathBuf)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path.display(), e))?;
    let recipe = parse_recipe(&text)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((recipe, base))
}

fn merged(props: &Map<String, Value>, defaults: &Map<String, Value>) -> Map<String, Value> {
    let mut m = props.clone();
    for (k, v) in defaults {
        m.entry(k.clone()).or_insert_with(|| v.clone());
    }
    m
}

struct Runner {
    base: PathBuf,
    projection: ProjectionSpec,
    grids: HashMap<PathBuf, DemGrid>,
    names: HashMap<String, Vec<String>>,
}

impl Runner {
    fn path(&self, p: &str) -> PathBuf {
        self.base.join(p)
    }

    fn read(&self, p: &str) -> Result<String> {
        let path = self.path(p);
        fs::read_to_string(&path).map_err(|e| Error::io(path.display(), e))
    }

    fn features(&self, source: &str, geographic: bool) -> Result<Vec<InputFeature>> {
        let proj = geographic.then_some(&self.projection);
        read_features(&self.read(source)?, proj).map_err(|e| Error::Recipe(format!("{source}: {e}")))
    }

    fn grid(&mut self, p: &str) -> Result<&DemGrid> {
        let path = self.path(p);
        if !self.grids.contains_key(&path) {
            let g = read_asc(&self.read(p)?).map_err(|e| Error::Recipe(format!("{p}: {e}")))?;
            self.grids.insert(path.clone(), g);
        }
        Ok(&self.grids[&path])
    }

    fn reference(&mut self, z0: &Option<Z0>, footprint: &Polygon2) -> Result<f64> {
        match z0 {
            None => Ok(0.0),
            Some(Z0::Value(v)) => Ok(*v),
            Some(Z0::Grid(p)) => Ok(self.grid(p)?.mean_over(footprint).unwrap_or(0.0)),
        }
    }

    fn targets(&self, target: &str, doc: &CityDocument) -> Result<Vec<String>> {
        if let Some(ids) = self.names.get(target) {
            return Ok(ids.clone());
        }
        if doc.get(target).is_some() {
            return Ok(vec![target.to_string()]);
        }
        Err(Error::Recipe(format!("target `{target}` names neither a step nor an object")))
    }
}

fn site_polygon(f: &InputFeature) -> Polygon2 {
    match &f.geometry {
        InputGeometry::Polygon(p) => p.clone(),
        InputGeometry::Point(c) => Polygon2::rectangle([c[0] - 0.5, c[1] - 0.5], [c[0] + 0.5, c[1] + 0.5])
            .expect("unit square is valid"),
    }
}

/// Execute `recipe` and return the finished document. Ids are reproducible
/// when a seed is given here or in the recipe.
pub fn run_recipe(
    recipe: &RecipeFile,
    base: &Path,
    registry: &ExtensionRegistry,
    seed: Option<u64>,
) -> Result<CityDocument> {
    let projection = builtin_crs(&recipe.crs)?;
    let mut doc = new_document(&projection.url(), Transform::default())?;
    doc.metadata = recipe.metadata.clone();
    let mut runner = Runner {
        base: base.to_path_buf(),
        projection,
        grids: HashMap::new(),
        names: HashMap::new(),
    };
    let mut b = Builder::new(&mut doc, registry, seed.or(recipe.seed));

    for (i, step) in recipe.steps.iter().enumerate() {
        let ctx = |e: Error| match e {
            Error::Recipe(m) => Error::Recipe(format!("step {i}: {m}")),
            other => Error::Recipe(format!("step {i}: {other}")),
        };
        let (name, ids) = run_step(&mut runner, &mut b, step).map_err(ctx)?;
        if let Some(name) = name {
            runner.names.entry(name).or_default().extend(ids);
        }
    }
    drop(b);
    doc.normalize_translate();
    Ok(doc)
}

type Produced = (Option<String>, Vec<String>);

fn run_step(r: &mut Runner, b: &mut Builder, step: &Step) -> Result<Produced> {
    let mut ids = Vec::new();
    let name = match step {
        Step::Crater { name, source, geographic, dem, aggregate: factor, attributes } => {
            for f in r.features(source, *geographic)? {
                let fp = f.polygon()?.clone();
                let g = r.grid(dem)?;
                // clip first so that only the crater's neighbourhood is aggregated
                let margin = g.cellsize * *factor as f64;
                let bb = fp.bbox();
                let bb = Aabb {
                    min: [bb.min[0] - margin, bb.min[1] - margin],
                    max: [bb.max[0] + margin, bb.max[1] + margin],
                };
                let local = aggregate(&clip(g, &bb)?, *factor)?;
                ids.push(b.build_crater(&fp, &local, merged(&f.properties, attributes))?);
            }
            name
        }
        Step::SurfaceObject { name, source, geographic, up, down, z0, attributes } => {
            for f in r.features(source, *geographic)? {
                let fp = f.polygon()?.clone();
                b.set_reference_z(r.reference(z0, &fp)?);
                ids.push(b.build_surface_object(&fp, *up, *down, merged(&f.properties, attributes))?);
            }
            name
        }
        Step::PlanUnit { name, source, geographic, grids, use_type, underground, aboveground, z0, attributes } => {
            let mut items: Vec<(Polygon2, Map<String, Value>)> = Vec::new();
            if let Some(source) = source {
                for f in r.features(source, *geographic)? {
                    items.push((f.polygon()?.clone(), merged(&f.properties, attributes)));
                }
            }
            for g in grids {
                let fp = grid_from_center(&r.projection, g.lat, g.lon, g.side)?;
                items.push((fp, merged(&g.attributes, attributes)));
            }
            if items.is_empty() {
                return Err(Error::Recipe("plan_unit needs a source or grids".into()));
            }
            for (fp, attrs) in items {
                b.set_reference_z(r.reference(z0, &fp)?);
                ids.push(b.build_plan_unit(&fp, use_type, *underground, *aboveground, attrs)?);
            }
            name
        }
        Step::ScientificEvidence { name, source, geographic, evidence, analysis, z0, attributes } => {
            for f in r.features(source, *geographic)? {
                let fp = f.polygon()?.clone();
                b.set_reference_z(r.reference(z0, &fp)?);
                let attrs = merged(&f.properties, attributes);
                ids.push(b.build_scientific_evidence(&fp, &analysis.into(), evidence, attrs)?);
            }
            name
        }
        Step::ProtectedArea { name, source, geographic, buffer, up, down, area_name, z0, attributes } => {
            for f in r.features(source, *geographic)? {
                b.set_reference_z(r.reference(z0, &site_polygon(&f))?);
                let mut attrs = merged(&f.properties, attributes);
                let label = match attrs.remove("areaName") {
                    Some(Value::String(s)) => s,
                    _ => area_name
                        .clone()
                        .ok_or_else(|| Error::Recipe("protected area without areaName".into()))?,
                };
                let site = match f.geometry {
                    InputGeometry::Point(c) => Site::Point(c),
                    InputGeometry::Polygon(p) => Site::Polygon(p),
                };
                ids.push(b.build_protected_area(&site, *buffer, *up, *down, &label, attrs)?);
            }
            name
        }
        Step::Restriction { name, target, restriction_type, analysis, attributes } => {
            for t in r.targets(target, b.document())? {
                ids.push(b.build_restriction(&t, &analysis.into(), restriction_type, attributes.clone())?);
            }
            name
        }
        Step::LegalSpace { name, target, analysis, attributes } => {
            for t in r.targets(target, b.document())? {
                ids.push(b.build_legal_space(&t, &analysis.into(), attributes.clone())?);
            }
            name
        }
        Step::Building { name, source } => {
            let input = read_space_solids(&r.read(source)?)?;
            let (bid, units) = b.build_building(input)?;
            if let Some(n) = name {
                r.names.entry(format!("{n}.units")).or_default().extend(units);
            }
            ids.push(bid);
            name
        }
    };
    Ok((name.clone(), ids))
}
