//! Reading user data: the `y,x,w` sample file and tabulated weight files.

use std::path::Path;

use serde::Serialize;

use npiv_quad::basis::WeightFn;
use npiv_quad::estimators::Sample;

/// Affine map `t = (v - min) / (max - min)` applied to one column.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MinMax {
    pub min: f64,
    pub max: f64,
}

impl MinMax {
    fn of(values: &[f64]) -> Self {
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self { min, max }
    }

    fn apply(&self, v: f64) -> f64 {
        ((v - self.min) / (self.max - self.min)).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Rescaling {
    pub x: MinMax,
    pub w: MinMax,
}

pub struct LoadedData {
    pub sample: Sample,
    pub rescaling: Rescaling,
}

fn column_index(headers: &csv::StringRecord, name: &str) -> Result<usize, String> {
    headers
        .iter()
        .position(|h| h.trim().eq_ignore_ascii_case(name))
        .ok_or_else(|| format!("header is missing column `{name}` (expected y,x,w)"))
}

/// Reads a CSV with header `y,x,w` and rescales `x` and `w` to `[0, 1]`.
pub fn load_sample(path: &Path) -> Result<LoadedData, String> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| format!("{}: {e}", path.display()))?;
    let headers = reader
        .headers()
        .map_err(|e| format!("{}: cannot read header: {e}", path.display()))?
        .clone();
    let cols = [
        column_index(&headers, "y")?,
        column_index(&headers, "x")?,
        column_index(&headers, "w")?,
    ];
    let names = ["y", "x", "w"];
    let (mut y, mut x, mut w) = (Vec::new(), Vec::new(), Vec::new());
    for (row, record) in reader.records().enumerate() {
        // Row 1 is the first data row; the file line also counts the header.
        let row = row + 1;
        let record = record.map_err(|e| format!("row {row}: {e}"))?;
        let mut vals = [0.0; 3];
        for (slot, (&col, name)) in vals.iter_mut().zip(cols.iter().zip(names)) {
            let field = record
                .get(col)
                .ok_or_else(|| format!("row {row} (line {}): missing column `{name}`", row + 1))?;
            let v: f64 = field.parse().map_err(|_| {
                format!("row {row} (line {}): `{field}` in column `{name}` is not a number", row + 1)
            })?;
            if !v.is_finite() {
                return Err(format!(
                    "row {row} (line {}): non-finite value `{field}` in column `{name}`",
                    row + 1
                ));
            }
            *slot = v;
        }
        y.push(vals[0]);
        x.push(vals[1]);
        w.push(vals[2]);
    }
    if y.is_empty() {
        return Err(format!("{}: no data rows", path.display()));
    }
    let rescaling = Rescaling {
        x: MinMax::of(&x),
        w: MinMax::of(&w),
    };
    for (name, mm) in [("x", rescaling.x), ("w", rescaling.w)] {
        if !(mm.max > mm.min) {
            return Err(format!("column `{name}` is constant; cannot rescale to [0, 1]"));
        }
    }
    let x = x.iter().map(|&v| rescaling.x.apply(v)).collect();
    let w = w.iter().map(|&v| rescaling.w.apply(v)).collect();
    let sample = Sample::new(y, x, w).map_err(|e| e.to_string())?;
    Ok(LoadedData { sample, rescaling })
}

/// Parses `uniform` or `file:<path>`; the file is a CSV with header `x,mu`.
pub fn load_weight(spec: &str) -> Result<WeightFn, String> {
    if spec.eq_ignore_ascii_case("uniform") {
        return Ok(WeightFn::Uniform);
    }
    let path = spec
        .strip_prefix("file:")
        .ok_or_else(|| format!("--weight must be `uniform` or `file:<path>`, got `{spec}`"))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| format!("{path}: {e}"))?;
    let headers = reader.headers().map_err(|e| format!("{path}: {e}"))?.clone();
    let xi = column_index(&headers, "x")?;
    let mi = column_index(&headers, "mu")?;
    let (mut grid, mut values) = (Vec::new(), Vec::new());
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| format!("{path}: row {}: {e}", row + 1))?;
        let parse = |i: usize| -> Result<f64, String> {
            record
                .get(i)
                .and_then(|s| s.parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("{path}: row {}: bad number", row + 1))
        };
        grid.push(parse(xi)?);
        values.push(parse(mi)?);
    }
    WeightFn::tabulated(grid, values).map_err(|e| format!("{path}: {e}"))
}
