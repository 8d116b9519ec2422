//! Set lists, paths and field snapshots on disk.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sibm_core::geometry::{Corner, Rect, UnionSet};
use sibm_core::processes::{FieldSample, PathSample};

/// `{"dim": d, "sets": [[x1, ..., xd], ...]}`, each entry a rectangle corner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetList {
    pub dim: usize,
    pub sets: Vec<Vec<f64>>,
}

/// `{"corners": [[...], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnionDoc {
    pub corners: Vec<Vec<f64>>,
}

impl SetList {
    pub fn from_rects(rects: &[Rect]) -> Self {
        SetList {
            dim: rects.first().map_or(2, Rect::dim),
            sets: rects.iter().map(|r| r.corner().coords().to_vec()).collect(),
        }
    }

    pub fn rects(&self) -> Result<Vec<Rect>> {
        if self.sets.is_empty() {
            bail!("set list is empty");
        }
        self.sets
            .iter()
            .enumerate()
            .map(|(i, c)| {
                if c.len() != self.dim {
                    bail!("set {i} has {} coordinates, expected {}", c.len(), self.dim);
                }
                Ok(Rect::from_coords(c.clone())?)
            })
            .collect()
    }
}

impl UnionDoc {
    pub fn from_union(u: &UnionSet) -> Self {
        UnionDoc { corners: u.corners().iter().map(|c| c.coords().to_vec()).collect() }
    }

    pub fn to_union(&self, dim: usize) -> Result<UnionSet> {
        let corners = self.corners.iter().map(|c| Corner::new(c.clone())).collect::<Result<Vec<_>, _>>()?;
        Ok(UnionSet::canonicalize(dim, corners)?)
    }
}

/// Reads a set list, also accepting a union document (its corners become
/// the sets).
pub fn read_sets(path: &Path) -> Result<Vec<Rect>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let list = if value.get("corners").is_some() {
        let doc: UnionDoc = serde_json::from_value(value)?;
        let dim = doc.corners.first().map_or(2, Vec::len);
        SetList { dim, sets: doc.corners }
    } else {
        serde_json::from_value(value).with_context(|| format!("{} is not a set list", path.display()))?
    };
    list.rects()
}

/// One row per flow point: `alpha,theta,Y`, with a leading replicate column
/// when there are several paths.
pub fn paths_csv(paths: &[PathSample]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let many = paths.len() > 1;
    if many {
        w.write_record(["replicate", "alpha", "theta", "Y"])?;
    } else {
        w.write_record(["alpha", "theta", "Y"])?;
    }
    for (r, p) in paths.iter().enumerate() {
        for ((a, t), y) in p.alphas().iter().zip(p.theta()).zip(p.cumulative()) {
            let row = [a.to_string(), t.to_string(), y.to_string()];
            if many {
                w.write_record(std::iter::once(r.to_string()).chain(row))?;
            } else {
                w.write_record(row)?;
            }
        }
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

#[derive(Serialize)]
struct PathPoint {
    alpha: f64,
    theta: f64,
    y: f64,
}

/// A JSON array of points, or an array of such arrays for several paths.
pub fn paths_json(paths: &[PathSample]) -> Result<String> {
    let points = |p: &PathSample| -> Vec<PathPoint> {
        p.alphas()
            .iter()
            .zip(p.theta())
            .zip(p.cumulative())
            .map(|((&alpha, &theta), &y)| PathPoint { alpha, theta, y })
            .collect()
    };
    let text = if let [p] = paths {
        serde_json::to_string(&points(p))?
    } else {
        serde_json::to_string(&paths.iter().map(points).collect::<Vec<_>>())?
    };
    Ok(text + "\n")
}

/// Sheet values `X([0, (x_i, y_j)])` on the grid lines `i, j = 1..=n`; row
/// `j` holds the `y_j` line.
pub fn sheet_values(field: &FieldSample) -> Vec<Vec<f64>> {
    let n = field.n();
    (1..=n).map(|py| (1..=n).map(|px| field.prefix(px, py).to_f64()).collect()).collect()
}

pub fn field_csv(field: &FieldSample) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in sheet_values(field) {
        w.write_record(row.iter().map(f64::to_string))?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

#[derive(Serialize)]
struct FieldDoc {
    n: usize,
    tmax: f64,
    values: Vec<Vec<f64>>,
}

pub fn field_json(field: &FieldSample) -> Result<String> {
    let doc = FieldDoc { n: field.n(), tmax: field.grid().tmax(), values: sheet_values(field) };
    Ok(serde_json::to_string(&doc)? + "\n")
}

/// Writes `header` then `rows` as CSV.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}
