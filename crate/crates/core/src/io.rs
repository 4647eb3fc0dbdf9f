//! Field serialization: a CSV of samples plus a JSON sidecar describing grid and parameters.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{DecomposedField, C64};
use crate::grid::{build_grid_with_shape, SHAPE_LAMBDA};
use crate::special::{Dim, InteractionParams};

pub const FIELD_HEADER: [&str; 5] = ["r", "f_re", "f_im", "u_re", "u_im"];

/// Seventeen significant digits; parses back to the identical f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldMeta {
    pub dim: Dim,
    pub alpha: f64,
    pub p: f64,
    pub lambda: f64,
    pub c_re: f64,
    pub c_im: f64,
    pub r_min: f64,
    #[serde(rename = "R")]
    pub r_max: f64,
    pub n: usize,
    pub grading: f64,
    #[serde(default = "default_shape")]
    pub shape_lambda: f64,
}

fn default_shape() -> f64 {
    SHAPE_LAMBDA
}

impl FieldMeta {
    pub fn new(params: &InteractionParams, field: &DecomposedField) -> Self {
        let g = field.grid();
        let c = field.singular_coeff();
        FieldMeta {
            dim: params.dim(),
            alpha: params.alpha(),
            p: params.p(),
            lambda: field.lambda(),
            c_re: c.re,
            c_im: c.im,
            r_min: g.r_min(),
            r_max: g.r_max(),
            n: g.len(),
            grading: g.grading(),
            shape_lambda: g.shape_lambda(),
        }
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

pub fn field_to_csv(field: &DecomposedField) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(FIELD_HEADER).map_err(csv_err)?;
    let u = field.values();
    for ((&r, f), u) in field.grid().nodes().iter().zip(field.regular()).zip(&u) {
        w.write_record([fmt_f64(r), fmt_f64(f.re), fmt_f64(f.im), fmt_f64(u.re), fmt_f64(u.im)]).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

/// Rebuilds a field from its CSV and sidecar; the grid is regenerated from the sidecar and
/// the radii in the CSV must match it exactly.
pub fn field_from_csv(csv_text: &str, meta: &FieldMeta) -> Result<(InteractionParams, DecomposedField)> {
    let params = InteractionParams::new(meta.dim, meta.alpha, meta.p)?;
    let grid = Arc::new(build_grid_with_shape(meta.dim, meta.r_min, meta.r_max, meta.n, meta.grading, meta.shape_lambda)?);
    let mut rdr = csv::Reader::from_reader(csv_text.as_bytes());
    let header = rdr.headers().map_err(csv_err)?.clone();
    if header.iter().collect::<Vec<_>>() != FIELD_HEADER {
        return Err(Error::Parse(format!("unexpected header {:?}", header)));
    }
    let mut regular = Vec::with_capacity(meta.n);
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let num = |j: usize| -> Result<f64> {
            rec.get(j)
                .ok_or_else(|| Error::Parse(format!("row {i}: missing column {j}")))?
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("row {i}: {e}")))
        };
        let r = num(0)?;
        if grid.nodes().get(i) != Some(&r) {
            return Err(Error::GridMismatch(format!("row {i}: radius {r} does not match the sidecar grid")));
        }
        regular.push(C64::new(num(1)?, num(2)?));
    }
    let field = DecomposedField::new(grid, regular, C64::new(meta.c_re, meta.c_im), meta.lambda)?;
    Ok((params, field))
}

/// Sidecar path for a field CSV: `profile.csv` → `profile.json`.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

pub fn save_field(csv_path: &Path, params: &InteractionParams, field: &DecomposedField) -> Result<()> {
    std::fs::write(csv_path, field_to_csv(field)?)?;
    let meta = serde_json::to_string_pretty(&FieldMeta::new(params, field)).map_err(|e| Error::Parse(e.to_string()))?;
    std::fs::write(sidecar_path(csv_path), meta + "\n")?;
    Ok(())
}

pub fn load_field(csv_path: &Path) -> Result<(InteractionParams, DecomposedField)> {
    let meta_text = std::fs::read_to_string(sidecar_path(csv_path))?;
    let meta: FieldMeta = serde_json::from_str(&meta_text).map_err(|e| Error::Parse(e.to_string()))?;
    field_from_csv(&std::fs::read_to_string(csv_path)?, &meta)
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map(|s| s + "\n").map_err(|e| Error::Parse(e.to_string()))
}
