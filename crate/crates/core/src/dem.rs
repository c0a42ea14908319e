//! Regular elevation grids: ESRI ASCII grid I/O, block aggregation, clipping,
//! sampling, and TIN construction inside a footprint.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::{Aabb, Point3, Polygon2, TriSurface};

/// Row-major elevations, northernmost row first (the `.asc` order).
#[derive(Debug, Clone, PartialEq)]
pub struct DemGrid {
    pub ncols: usize,
    pub nrows: usize,
    pub cellsize: f64,
    /// Lower-left corner of the lower-left cell.
    pub origin: [f64; 2],
    pub nodata: f64,
    pub values: Vec<f64>,
}

impl DemGrid {
    pub fn new(
        ncols: usize,
        nrows: usize,
        cellsize: f64,
        origin: [f64; 2],
        nodata: f64,
        values: Vec<f64>,
    ) -> Result<Self> {
        if !(cellsize > 0.0) {
            return Err(Error::Precondition(format!("cellsize must be > 0, got {cellsize}")));
        }
        if ncols == 0 || nrows == 0 {
            return Err(Error::DimensionMismatch("grid has no cells".into()));
        }
        if values.len() != ncols * nrows {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {ncols}×{nrows} grid",
                values.len()
            )));
        }
        Ok(DemGrid {
            ncols,
            nrows,
            cellsize,
            origin,
            nodata,
            values,
        })
    }

    /// Build from a function of the cell-center coordinates.
    pub fn from_fn(
        ncols: usize,
        nrows: usize,
        cellsize: f64,
        origin: [f64; 2],
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(ncols * nrows);
        for row in 0..nrows {
            for col in 0..ncols {
                let [x, y] = cell_center_of(origin, cellsize, nrows, row, col);
                values.push(f(x, y));
            }
        }
        Self::new(ncols, nrows, cellsize, origin, -9999.0, values)
    }

    pub fn extent(&self) -> Aabb {
        Aabb {
            min: self.origin,
            max: [
                self.origin[0] + self.ncols as f64 * self.cellsize,
                self.origin[1] + self.nrows as f64 * self.cellsize,
            ],
        }
    }

    pub fn raw(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.ncols + col]
    }

    /// Elevation or `None` for nodata.
    pub fn value(&self, row: usize, col: usize) -> Option<f64> {
        let v = self.raw(row, col);
        (v != self.nodata && v.is_finite()).then_some(v)
    }

    pub fn is_nodata(&self, row: usize, col: usize) -> bool {
        self.value(row, col).is_none()
    }

    pub fn cell_center(&self, row: usize, col: usize) -> [f64; 2] {
        cell_center_of(self.origin, self.cellsize, self.nrows, row, col)
    }

    /// (row, col) of the cell containing (x, y); the east and north edges
    /// belong to the last column and first row.
    pub fn cell_at(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let e = self.extent();
        if !e.contains([x, y]) {
            return None;
        }
        let col = (((x - self.origin[0]) / self.cellsize).floor() as usize).min(self.ncols - 1);
        let from_south = (((y - self.origin[1]) / self.cellsize).floor() as usize).min(self.nrows - 1);
        Some((self.nrows - 1 - from_south, col))
    }

    /// Nearest-cell elevation; `Ok(None)` for nodata cells.
    pub fn sample(&self, x: f64, y: f64) -> Result<Option<f64>> {
        let (row, col) = self.cell_at(x, y).ok_or(Error::OutsideExtent { x, y })?;
        Ok(self.value(row, col))
    }

    /// Mean elevation of cells whose centers fall inside `footprint`.
    pub fn mean_over(&self, footprint: &Polygon2) -> Option<f64> {
        let (mut sum, mut n) = (0.0, 0usize);
        for row in 0..self.nrows {
            for col in 0..self.ncols {
                if let Some(v) = self.value(row, col) {
                    if footprint.contains(self.cell_center(row, col)) {
                        sum += v;
                        n += 1;
                    }
                }
            }
        }
        (n > 0).then(|| sum / n as f64)
    }
}

fn cell_center_of(origin: [f64; 2], cellsize: f64, nrows: usize, row: usize, col: usize) -> [f64; 2] {
    [
        origin[0] + (col as f64 + 0.5) * cellsize,
        origin[1] + ((nrows - row) as f64 - 0.5) * cellsize,
    ]
}

/// Parse an ESRI ASCII grid. Header keys are case-insensitive; `xllcenter` /
/// `yllcenter` are accepted in place of the corner keys and `NODATA_value`
/// defaults to -9999 when absent.
pub fn read_asc(text: &str) -> Result<DemGrid> {
    let mut ncols = None;
    let mut nrows = None;
    let mut xll = None;
    let mut yll = None;
    let mut centered = false;
    let mut cellsize = None;
    let mut nodata = -9999.0;
    let mut values = Vec::new();
    let mut data_rows = 0usize;

    let lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let mut in_header = true;
    for (lineno, line) in lines {
        let lineno = lineno + 1;
        let mut tokens = line.split_whitespace();
        let first = tokens.next().unwrap_or_default();
        if in_header && first.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) {
            let value = tokens
                .next()
                .ok_or_else(|| Error::parse(format!("line {lineno}"), format!("header `{first}` has no value")))?;
            let num = |v: &str| -> Result<f64> {
                v.parse::<f64>()
                    .map_err(|_| Error::parse(format!("line {lineno}"), format!("bad number `{v}`")))
            };
            let count = |v: &str| -> Result<usize> {
                v.parse::<usize>()
                    .map_err(|_| Error::parse(format!("line {lineno}"), format!("bad count `{v}`")))
            };
            match first.to_ascii_lowercase().as_str() {
                "ncols" => ncols = Some(count(value)?),
                "nrows" => nrows = Some(count(value)?),
                "xllcorner" => xll = Some(num(value)?),
                "yllcorner" => yll = Some(num(value)?),
                "xllcenter" => {
                    xll = Some(num(value)?);
                    centered = true;
                }
                "yllcenter" => {
                    yll = Some(num(value)?);
                    centered = true;
                }
                "cellsize" => cellsize = Some(num(value)?),
                "nodata_value" => nodata = num(value)?,
                other => {
                    return Err(Error::parse(format!("line {lineno}"), format!("unknown header key `{other}`")))
                }
            }
            continue;
        }
        in_header = false;
        let ncols = ncols.ok_or_else(|| Error::parse(format!("line {lineno}"), "data before ncols"))?;
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| Error::parse(format!("line {lineno}"), format!("bad value `{t}`")))
            })
            .collect::<Result<_>>()?;
        if row.len() != ncols {
            return Err(Error::DimensionMismatch(format!(
                "line {lineno}: {} values, expected {ncols}",
                row.len()
            )));
        }
        values.extend(row);
        data_rows += 1;
    }

    let missing = |k: &str| Error::parse("header", format!("missing `{k}`"));
    let ncols = ncols.ok_or_else(|| missing("ncols"))?;
    let nrows = nrows.ok_or_else(|| missing("nrows"))?;
    let cellsize = cellsize.ok_or_else(|| missing("cellsize"))?;
    let mut origin = [xll.ok_or_else(|| missing("xllcorner"))?, yll.ok_or_else(|| missing("yllcorner"))?];
    if centered {
        origin = [origin[0] - cellsize / 2.0, origin[1] - cellsize / 2.0];
    }
    if data_rows != nrows {
        return Err(Error::DimensionMismatch(format!("{data_rows} rows, expected {nrows}")));
    }
    DemGrid::new(ncols, nrows, cellsize, origin, nodata, values)
}

/// Serialize as an ESRI ASCII grid with `decimals` fractional digits.
pub fn write_asc(g: &DemGrid, decimals: usize) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "ncols {}", g.ncols);
    let _ = writeln!(out, "nrows {}", g.nrows);
    let _ = writeln!(out, "xllcorner {}", g.origin[0]);
    let _ = writeln!(out, "yllcorner {}", g.origin[1]);
    let _ = writeln!(out, "cellsize {}", g.cellsize);
    let _ = writeln!(out, "NODATA_value {}", g.nodata);
    for row in g.values.chunks(g.ncols) {
        let line: Vec<String> = row
            .iter()
            .map(|v| {
                if *v == g.nodata {
                    format!("{}", g.nodata)
                } else {
                    format!("{v:.decimals$}")
                }
            })
            .collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}

/// Block means over `factor`×`factor` cells, ignoring nodata. Trailing partial
/// blocks on the east and south edges are dropped.
pub fn aggregate(g: &DemGrid, factor: usize) -> Result<DemGrid> {
    if factor == 0 {
        return Err(Error::Precondition("aggregation factor must be ≥ 1".into()));
    }
    if factor == 1 {
        return Ok(g.clone());
    }
    let (ncols, nrows) = (g.ncols / factor, g.nrows / factor);
    if ncols == 0 || nrows == 0 {
        return Err(Error::DimensionMismatch(format!(
            "factor {factor} exceeds the {}×{} grid",
            g.ncols, g.nrows
        )));
    }
    let mut values = Vec::with_capacity(ncols * nrows);
    for br in 0..nrows {
        for bc in 0..ncols {
            let (mut sum, mut n) = (0.0, 0usize);
            for r in br * factor..(br + 1) * factor {
                for c in bc * factor..(bc + 1) * factor {
                    if let Some(v) = g.value(r, c) {
                        sum += v;
                        n += 1;
                    }
                }
            }
            values.push(if n == 0 { g.nodata } else { sum / n as f64 });
        }
    }
    let dropped_south = (g.nrows - nrows * factor) as f64 * g.cellsize;
    DemGrid::new(
        ncols,
        nrows,
        g.cellsize * factor as f64,
        [g.origin[0], g.origin[1] + dropped_south],
        g.nodata,
        values,
    )
}

/// The smallest cell-aligned subgrid covering `bbox`.
pub fn clip(g: &DemGrid, bbox: &Aabb) -> Result<DemGrid> {
    let e = g.extent();
    if !e.intersects(bbox) {
        return Err(Error::OutsideExtent {
            x: bbox.min[0],
            y: bbox.min[1],
        });
    }
    let cs = g.cellsize;
    let idx = |v: f64, o: f64, n: usize, round_up: bool| -> usize {
        let t = (v - o) / cs;
        let i = if round_up { t.ceil() } else { t.floor() };
        (i.max(0.0) as usize).min(n)
    };
    let c0 = idx(bbox.min[0], g.origin[0], g.ncols, false).min(g.ncols - 1);
    let c1 = idx(bbox.max[0], g.origin[0], g.ncols, true).max(c0 + 1);
    // south-based row counts
    let s0 = idx(bbox.min[1], g.origin[1], g.nrows, false).min(g.nrows - 1);
    let s1 = idx(bbox.max[1], g.origin[1], g.nrows, true).max(s0 + 1);
    let (r0, r1) = (g.nrows - s1, g.nrows - s0);
    let mut values = Vec::with_capacity((c1 - c0) * (r1 - r0));
    for r in r0..r1 {
        values.extend_from_slice(&g.values[r * g.ncols + c0..r * g.ncols + c1]);
    }
    DemGrid::new(
        c1 - c0,
        r1 - r0,
        cs,
        [g.origin[0] + c0 as f64 * cs, g.origin[1] + s0 as f64 * cs],
        g.nodata,
        values,
    )
}

/// Triangulate cell centers and keep the triangles whose centroid lies inside
/// `footprint` and whose vertices all carry data. Each quad of neighbouring
/// centers is split along its lower-left to upper-right diagonal; vertex
/// elevations are the stored grid values.
pub fn tin_from_grid(g: &DemGrid, footprint: &Polygon2) -> Result<TriSurface> {
    let fb = footprint.bbox();
    if !g.extent().intersects(&fb) || g.ncols < 2 || g.nrows < 2 {
        return Err(Error::EmptyResult);
    }
    let cs = g.cellsize;
    // column / row ranges of quads whose span may reach the footprint bbox
    let col_lo = (((fb.min[0] - g.origin[0]) / cs - 1.5).floor().max(0.0) as usize).min(g.ncols - 1);
    let col_hi = (((fb.max[0] - g.origin[0]) / cs + 0.5).ceil().max(0.0) as usize).min(g.ncols - 1);
    let s_lo = (((fb.min[1] - g.origin[1]) / cs - 1.5).floor().max(0.0) as usize).min(g.nrows - 1);
    let s_hi = (((fb.max[1] - g.origin[1]) / cs + 0.5).ceil().max(0.0) as usize).min(g.nrows - 1);

    let vertex = |row: usize, col: usize| -> Option<Point3> {
        let z = g.value(row, col)?;
        let [x, y] = g.cell_center(row, col);
        Some([x, y, z])
    };
    let mut tris = Vec::new();
    for s in s_lo..s_hi {
        // quad between south-based rows s and s+1
        let (lower, upper) = (g.nrows - 1 - s, g.nrows - 2 - s);
        for col in col_lo..col_hi {
            let corners = [
                vertex(lower, col),
                vertex(lower, col + 1),
                vertex(upper, col + 1),
                vertex(upper, col),
            ];
            for [a, b, c] in [[0, 1, 2], [0, 2, 3]] {
                let (Some(pa), Some(pb), Some(pc)) = (corners[a], corners[b], corners[c]) else {
                    continue;
                };
                let centroid = [(pa[0] + pb[0] + pc[0]) / 3.0, (pa[1] + pb[1] + pc[1]) / 3.0];
                if footprint.contains(centroid) {
                    tris.push([pa, pb, pc]);
                }
            }
        }
    }
    if tris.is_empty() {
        return Err(Error::EmptyResult);
    }
    Ok(TriSurface { triangles: tris })
}
