//! Grid geometry, per-variable fields and multi-variable tensors.
//!
//! A [`GridField`] is one variable's 2-D lat×lon array of `f64` with an
//! explicit validity mask; masked cells never contribute to any aggregate
//! and are normalized to `0.0` in storage so that equal fields compare
//! bit-equal. A [`GridTensor`] bundles the fields of one model output file
//! (one cycle timestamp, one forecast offset).

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Errors raised by grid-level constructors and element-wise operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("geometry mismatch: {left} vs {right}")]
    GeometryMismatch { left: GridGeometry, right: GridGeometry },
    #[error("invalid geometry: {reason}")]
    InvalidGeometry { reason: String },
    #[error("values/mask length {len} does not match geometry size {expected}")]
    LengthMismatch { len: usize, expected: usize },
    #[error("NaN value at unmasked cell {index}")]
    NanAtValidCell { index: usize },
    #[error("duplicate variable {variable}")]
    DuplicateVariable { variable: String },
    #[error("forecast offset {tau} is not a multiple of 6 hours")]
    BadTau { tau: u16 },
}

/// Regular lat×lon grid: `lat(i) = lat0 + step*i`, `lon(j) = lon0 + step*j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridGeometry {
    pub nlat: usize,
    pub nlon: usize,
    pub lat0: f64,
    pub lon0: f64,
    pub step: f64,
}

impl GridGeometry {
    pub fn new(
        nlat: usize,
        nlon: usize,
        lat0: f64,
        lon0: f64,
        step: f64,
    ) -> Result<Self, GridError> {
        if nlat < 1 || nlon < 1 {
            return Err(GridError::InvalidGeometry {
                reason: format!("grid must be at least 1x1, got {nlat}x{nlon}"),
            });
        }
        if !(step > 0.0) || !step.is_finite() || !lat0.is_finite() || !lon0.is_finite() {
            return Err(GridError::InvalidGeometry {
                reason: format!("origin/step must be finite with step > 0, got ({lat0}, {lon0}) step {step}"),
            });
        }
        Ok(Self { nlat, nlon, lat0, lon0, step })
    }

    /// Grid with the given shape at the standard origin (-90, 0) and 0.5
    /// degree spacing. This is the family the SGF1 file format encodes.
    pub fn with_shape(nlat: usize, nlon: usize) -> Result<Self, GridError> {
        Self::new(nlat, nlon, -90.0, 0.0, 0.5)
    }

    /// The full-world 361x720 half-degree grid: lat in [-90, +90],
    /// lon in [0, 359.5].
    pub fn global() -> Self {
        Self { nlat: 361, nlon: 720, lat0: -90.0, lon0: 0.0, step: 0.5 }
    }

    pub fn len(&self) -> usize {
        self.nlat * self.nlon
    }

    pub fn is_empty(&self) -> bool {
        false // nlat, nlon >= 1 by construction
    }

    pub fn lat(&self, i: usize) -> f64 {
        self.lat0 + self.step * i as f64
    }

    pub fn lon(&self, j: usize) -> f64 {
        self.lon0 + self.step * j as f64
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.nlon + j
    }

    /// Whether this geometry is exactly representable in an SGF1 file,
    /// which only stores the shape and assumes the standard origin/step.
    pub fn is_standard(&self) -> bool {
        self.lat0 == -90.0 && self.lon0 == 0.0 && self.step == 0.5
    }
}

impl fmt::Display for GridGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}x{}@{}({},{})",
            self.nlat, self.nlon, self.step, self.lat0, self.lon0
        )
    }
}

/// Element-wise binary operations on fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Axis of a grid; reducing over [`Axis::Lon`] pools each latitude row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Lat,
    Lon,
}

/// One variable's values on a grid, with a validity mask.
///
/// Invariants: `values.len() == mask.len() == geometry.len()`; no NaN is
/// stored at a valid cell; masked cells hold exactly `0.0`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    geometry: GridGeometry,
    variable: String,
    values: Vec<f64>,
    mask: Vec<bool>,
}

impl GridField {
    pub fn new(
        geometry: GridGeometry,
        variable: impl Into<String>,
        values: Vec<f64>,
        mask: Vec<bool>,
    ) -> Result<Self, GridError> {
        let expected = geometry.len();
        if values.len() != expected {
            return Err(GridError::LengthMismatch { len: values.len(), expected });
        }
        if mask.len() != expected {
            return Err(GridError::LengthMismatch { len: mask.len(), expected });
        }
        let mut values = values;
        for (i, v) in values.iter_mut().enumerate() {
            if mask[i] {
                if v.is_nan() {
                    return Err(GridError::NanAtValidCell { index: i });
                }
            } else {
                *v = 0.0;
            }
        }
        Ok(Self { geometry, variable: variable.into(), values, mask })
    }

    /// Builds a field from raw values, treating NaN as missing.
    pub fn from_values(
        geometry: GridGeometry,
        variable: impl Into<String>,
        values: Vec<f64>,
    ) -> Result<Self, GridError> {
        let mask: Vec<bool> = values.iter().map(|v| !v.is_nan()).collect();
        Self::new(geometry, variable, values, mask)
    }

    /// All-valid constant field.
    pub fn constant(
        geometry: GridGeometry,
        variable: impl Into<String>,
        value: f64,
    ) -> Result<Self, GridError> {
        let n = geometry.len();
        Self::new(geometry, variable, vec![value; n], vec![true; n])
    }

    pub fn geometry(&self) -> GridGeometry {
        self.geometry
    }

    pub fn variable(&self) -> &str {
        &self.variable
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn is_valid(&self, index: usize) -> bool {
        self.mask[index]
    }

    /// Value at a flat index, `None` when masked.
    pub fn value(&self, index: usize) -> Option<f64> {
        self.mask[index].then(|| self.values[index])
    }

    pub fn value_at(&self, i: usize, j: usize) -> Option<f64> {
        self.value(self.geometry.index(i, j))
    }

    pub fn valid_count(&self) -> usize {
        self.mask.iter().filter(|m| **m).count()
    }

    /// Same data under a different variable code.
    pub fn with_variable(mut self, variable: impl Into<String>) -> Self {
        self.variable = variable.into();
        self
    }

    /// Bit-level equality including mask and geometry; stricter than
    /// `PartialEq` (distinguishes 0.0 from -0.0).
    pub fn bits_eq(&self, other: &Self) -> bool {
        self.geometry == other.geometry
            && self.variable == other.variable
            && self.mask == other.mask
            && self.values.len() == other.values.len()
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }

    /// Applies `f` to every valid cell, masking non-finite results.
    pub fn map_valid(&self, f: impl Fn(f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(self.values.len());
        let mut mask = Vec::with_capacity(self.mask.len());
        for i in 0..self.values.len() {
            if self.mask[i] {
                let v = f(self.values[i]);
                if v.is_nan() {
                    values.push(0.0);
                    mask.push(false);
                } else {
                    values.push(v);
                    mask.push(true);
                }
            } else {
                values.push(0.0);
                mask.push(false);
            }
        }
        Self {
            geometry: self.geometry,
            variable: self.variable.clone(),
            values,
            mask,
        }
    }
}

/// Per-cell binary operation. An output cell is valid iff both input cells
/// are valid and, for [`BinaryOp::Div`], the divisor is non-zero. Results
/// that come out NaN are masked rather than stored.
pub fn elementwise(op: BinaryOp, a: &GridField, b: &GridField) -> Result<GridField, GridError> {
    if a.geometry != b.geometry {
        return Err(GridError::GeometryMismatch { left: a.geometry, right: b.geometry });
    }
    let n = a.values.len();
    let mut values = vec![0.0f64; n];
    let mut mask = vec![false; n];
    for i in 0..n {
        if !(a.mask[i] && b.mask[i]) {
            continue;
        }
        if op == BinaryOp::Div && b.values[i] == 0.0 {
            continue; // divide-by-zero: cell masked, not an error
        }
        let v = match op {
            BinaryOp::Add => a.values[i] + b.values[i],
            BinaryOp::Sub => a.values[i] - b.values[i],
            BinaryOp::Mul => a.values[i] * b.values[i],
            BinaryOp::Div => a.values[i] / b.values[i],
        };
        if v.is_nan() {
            continue;
        }
        values[i] = v;
        mask[i] = true;
    }
    Ok(GridField {
        geometry: a.geometry,
        variable: a.variable.clone(),
        values,
        mask,
    })
}

/// The order-dependent `(a + b) / 2` combine used by the paper-pairwise
/// mean mode. Output cells are valid iff both inputs are valid.
pub fn pairwise_mean(a: &GridField, b: &GridField) -> Result<GridField, GridError> {
    let sum = elementwise(BinaryOp::Add, a, b)?;
    Ok(sum.map_valid(|v| v / 2.0))
}

/// A named collection of fields sharing one model cycle timestamp and
/// forecast offset (hours). Field insertion order is preserved so that the
/// SGF1 codec round-trips byte-exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct GridTensor {
    timestamp: i64,
    tau: u16,
    fields: Vec<GridField>,
}

impl GridTensor {
    pub fn new(timestamp: i64, tau: u16, fields: Vec<GridField>) -> Result<Self, GridError> {
        if tau % 6 != 0 {
            return Err(GridError::BadTau { tau });
        }
        if let Some(first) = fields.first() {
            let geom = first.geometry;
            for f in &fields[1..] {
                if f.geometry != geom {
                    return Err(GridError::GeometryMismatch { left: geom, right: f.geometry });
                }
            }
        }
        for (i, f) in fields.iter().enumerate() {
            if fields[..i].iter().any(|g| g.variable == f.variable) {
                return Err(GridError::DuplicateVariable { variable: f.variable.clone() });
            }
        }
        Ok(Self { timestamp, tau, fields })
    }

    /// Model cycle time, unix seconds.
    pub fn timestamp(&self) -> i64 {
        self.timestamp
    }

    /// Forecast offset in hours.
    pub fn tau(&self) -> u16 {
        self.tau
    }

    pub fn fields(&self) -> &[GridField] {
        &self.fields
    }

    pub fn field(&self, variable: &str) -> Option<&GridField> {
        self.fields.iter().find(|f| f.variable == variable)
    }

    pub fn has_variable(&self, variable: &str) -> bool {
        self.field(variable).is_some()
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.fields.iter().map(|f| f.variable.as_str())
    }

    pub fn geometry(&self) -> Option<GridGeometry> {
        self.fields.first().map(|f| f.geometry)
    }
}

/// Shared, immutable tensor handle as used by dataset elements.
pub type TensorRef = Arc<GridTensor>;
