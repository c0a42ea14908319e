#![allow(dead_code)]

use std::path::{Path, PathBuf};

use astrocity::builders::{AnalysisSpec, Builder, SpaceSolidInput, UnitInput, UnitSolid};
use astrocity::crs::{crs_url, moon_albers_30185};
use astrocity::dem::DemGrid;
use astrocity::geometry::Polygon2;
use astrocity::model::{new_document, CityDocument, Transform};
use astrocity::recipe::{load_recipe, run_recipe};
use astrocity::registry::{builtin_registry, ExtensionRegistry};
use serde_json::{json, Map, Value};

pub const DEMOS: [&str; 3] = ["mars", "moon_nearside", "moon_south_pole"];

pub fn workspace() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn recipe_path(name: &str) -> PathBuf {
    workspace().join("recipes").join(format!("{name}.recipe"))
}

pub fn build_demo(name: &str, registry: &ExtensionRegistry) -> CityDocument {
    let (recipe, base) = load_recipe(&recipe_path(name)).expect("recipe loads");
    run_recipe(&recipe, &base, registry, None).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn attrs(v: Value) -> Map<String, Value> {
    v.as_object().expect("object literal").clone()
}

/// Ids of the objects in [`small_document`].
pub struct SmallIds {
    pub crater: String,
    pub plan: String,
    pub plan_legal: String,
    pub evidence: String,
    pub restriction: String,
    pub building: String,
    pub unit: String,
    pub unit_legal: String,
}

/// One object of every builder kind, far enough apart that no vertex is
/// shared between unrelated objects.
pub fn small_document() -> (CityDocument, SmallIds) {
    let reg = builtin_registry();
    let url = crs_url("IAU_2015", "30185").unwrap();
    assert_eq!(url, moon_albers_30185().url());
    let mut doc = new_document(&url, Transform::default()).unwrap();
    let ids = {
        let mut b = Builder::new(&mut doc, &reg, Some(42));
        let grid = DemGrid::from_fn(20, 20, 50.0, [-500.0, -500.0], |x, y| -(x * x + y * y) / 1000.0).unwrap();
        let crater = b
            .build_crater(
                &Polygon2::circle([0.0, 0.0], 400.0, 32).unwrap(),
                &grid,
                attrs(json!({"craterID": 7, "craterName": "Test", "diameter": 800.0})),
            )
            .unwrap();
        let plan_fp = Polygon2::rectangle([1000.0, 0.0], [1100.0, 100.0]).unwrap();
        let plan = b.build_plan_unit(&plan_fp, "mining", 500.0, 0.0, Map::new()).unwrap();
        let plan_legal = b.build_legal_space(&plan, &AnalysisSpec::extrusion(0.0, 500.0), Map::new()).unwrap();
        let ev_fp = Polygon2::rectangle([2000.0, 0.0], [2100.0, 80.0]).unwrap();
        let evidence = b
            .build_scientific_evidence(&ev_fp, &AnalysisSpec::extrusion(25.0, 25.0), "waterIce", Map::new())
            .unwrap();
        let restriction = b
            .build_restriction(&evidence, &AnalysisSpec::buffer3d(250.0), "scientific", Map::new())
            .unwrap();
        let (building, units) = b
            .build_building(SpaceSolidInput {
                building_id: "building1".into(),
                units: vec![UnitInput {
                    unit_id: "0pNy6pOyf7JPmXRLgxs3sW".into(),
                    unit_attrs: Map::new(),
                    solid: UnitSolid::Prism {
                        footprint: Polygon2::rectangle([3000.0, 0.0], [3012.0, 8.0]).unwrap(),
                        z_low: 0.0,
                        z_high: 3.5,
                    },
                }],
                ..Default::default()
            })
            .unwrap();
        let unit = units[0].clone();
        let unit_legal = b.build_legal_space(&unit, &AnalysisSpec::buffer3d(0.001), Map::new()).unwrap();
        SmallIds { crater, plan, plan_legal, evidence, restriction, building, unit, unit_legal }
    };
    (doc, ids)
}
