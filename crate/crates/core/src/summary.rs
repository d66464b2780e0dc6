//! Exact, mergeable per-cell statistics.
//!
//! [`CellSummaries`] carries `{count, sum, min, max, m2}` per grid cell,
//! where `m2` is the sum of squared deviations from the mean. Single
//! observations enter via a Welford update; two summaries combine via the
//! Chan pairwise rule, which is associative and commutative up to float
//! rounding. All four statistics (mean, min, max, population stddev)
//! finalize from the same state, so one pass over the data serves them all.

use crate::grid::{Axis, GridError, GridField, GridGeometry};

/// The statistic to finalize from pooled cell state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StatKind {
    Mean,
    Min,
    Max,
    /// Population standard deviation, `sqrt(m2 / count)`.
    Stddev,
}

impl StatKind {
    pub const ALL: [StatKind; 4] = [StatKind::Mean, StatKind::Min, StatKind::Max, StatKind::Stddev];

    pub fn name(&self) -> &'static str {
        match self {
            StatKind::Mean => "mean",
            StatKind::Min => "min",
            StatKind::Max => "max",
            StatKind::Stddev => "stddev",
        }
    }

    pub fn parse(s: &str) -> Option<StatKind> {
        match s {
            "mean" => Some(StatKind::Mean),
            "min" => Some(StatKind::Min),
            "max" => Some(StatKind::Max),
            "stddev" => Some(StatKind::Stddev),
            _ => None,
        }
    }
}

impl std::fmt::Display for StatKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Aggregation state of one cell. With `count == 0` the sums are zero and
/// min/max hold the fold identities (+inf/-inf); they are never exposed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellStat {
    pub count: u64,
    pub sum: f64,
    pub min: f64,
    pub max: f64,
    pub m2: f64,
}

impl CellStat {
    pub const EMPTY: CellStat = CellStat {
        count: 0,
        sum: 0.0,
        min: f64::INFINITY,
        max: f64::NEG_INFINITY,
        m2: 0.0,
    };

    /// Welford single-point update.
    fn observe(&mut self, v: f64) {
        if self.count == 0 {
            self.count = 1;
            self.sum = v;
            self.min = v;
            self.max = v;
            self.m2 = 0.0;
            return;
        }
        let old_mean = self.sum / self.count as f64;
        self.count += 1;
        self.sum += v;
        let new_mean = self.sum / self.count as f64;
        self.m2 += (v - old_mean) * (v - new_mean);
        if v < self.min {
            self.min = v;
        }
        if v > self.max {
            self.max = v;
        }
    }

    /// Chan pairwise combine: exact for count/sum/min/max,
    /// `m2 = m2a + m2b + d^2 * ca*cb/(ca+cb)` with `d = mean_b - mean_a`.
    fn merged(a: &CellStat, b: &CellStat) -> CellStat {
        if a.count == 0 {
            return *b;
        }
        if b.count == 0 {
            return *a;
        }
        let ca = a.count as f64;
        let cb = b.count as f64;
        let delta = b.sum / cb - a.sum / ca;
        CellStat {
            count: a.count + b.count,
            sum: a.sum + b.sum,
            min: a.min.min(b.min),
            max: a.max.max(b.max),
            m2: a.m2 + b.m2 + delta * delta * (ca * cb / (ca + cb)),
        }
    }

    fn finalize(&self, stat: StatKind) -> Option<f64> {
        if self.count == 0 {
            return None;
        }
        Some(match stat {
            // The pooled mean is mathematically within [min, max]; clamping
            // keeps that true under float rounding of large sums.
            StatKind::Mean => (self.sum / self.count as f64).clamp(self.min, self.max),
            StatKind::Min => self.min,
            StatKind::Max => self.max,
            StatKind::Stddev => (self.m2 / self.count as f64).sqrt(),
        })
    }
}

/// Per-cell mergeable aggregation state over a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummaries {
    geometry: GridGeometry,
    cells: Vec<CellStat>,
}

impl CellSummaries {
    pub fn empty(geometry: GridGeometry) -> Self {
        Self { geometry, cells: vec![CellStat::EMPTY; geometry.len()] }
    }

    /// Summaries of a single field: every valid cell becomes one observation.
    pub fn from_field(field: &GridField) -> Self {
        let mut s = Self::empty(field.geometry());
        s.accumulate_mut(field).expect("geometry matches by construction");
        s
    }

    pub fn geometry(&self) -> GridGeometry {
        self.geometry
    }

    pub fn cell(&self, index: usize) -> &CellStat {
        &self.cells[index]
    }

    pub fn cells(&self) -> &[CellStat] {
        &self.cells
    }

    pub fn total_count(&self) -> u64 {
        self.cells.iter().map(|c| c.count).sum()
    }

    /// Folds one field's valid cells into a new summary; masked cells are
    /// untouched. The receiver is not modified.
    pub fn accumulate(&self, field: &GridField) -> Result<CellSummaries, GridError> {
        let mut out = self.clone();
        out.accumulate_mut(field)?;
        Ok(out)
    }

    pub(crate) fn accumulate_mut(&mut self, field: &GridField) -> Result<(), GridError> {
        if field.geometry() != self.geometry {
            return Err(GridError::GeometryMismatch {
                left: self.geometry,
                right: field.geometry(),
            });
        }
        let mask = field.mask();
        let values = field.values();
        for i in 0..self.cells.len() {
            if mask[i] {
                self.cells[i].observe(values[i]);
            }
        }
        Ok(())
    }

    /// Combines two summaries cell-wise; the empty summary is the identity.
    pub fn merge(&self, other: &CellSummaries) -> Result<CellSummaries, GridError> {
        if other.geometry != self.geometry {
            return Err(GridError::GeometryMismatch {
                left: self.geometry,
                right: other.geometry,
            });
        }
        let cells = self
            .cells
            .iter()
            .zip(&other.cells)
            .map(|(a, b)| CellStat::merged(a, b))
            .collect();
        Ok(CellSummaries { geometry: self.geometry, cells })
    }

    /// Finalizes one statistic; cells that saw no data come out masked.
    /// The result carries an empty variable code; rename with
    /// [`GridField::with_variable`].
    pub fn finalize(&self, stat: StatKind) -> GridField {
        let n = self.cells.len();
        let mut values = vec![0.0f64; n];
        let mut mask = vec![false; n];
        for (i, c) in self.cells.iter().enumerate() {
            if let Some(v) = c.finalize(stat) {
                values[i] = v;
                mask[i] = true;
            }
        }
        GridField::new(self.geometry, "", values, mask)
            .expect("finalize produces no NaN at valid cells")
    }

    /// Pools raw observations along one axis: reducing over [`Axis::Lon`]
    /// merges each latitude row into a single cell (an `nlat x 1` summary),
    /// reducing over [`Axis::Lat`] yields `1 x nlon`. This is pooling, not
    /// a mean of means; the two differ under uneven masks.
    pub fn pool_axis(&self, axis: Axis) -> CellSummaries {
        let g = self.geometry;
        match axis {
            Axis::Lon => {
                let out_geom = GridGeometry { nlat: g.nlat, nlon: 1, ..g };
                let mut cells = vec![CellStat::EMPTY; g.nlat];
                for i in 0..g.nlat {
                    for j in 0..g.nlon {
                        cells[i] = CellStat::merged(&cells[i], &self.cells[g.index(i, j)]);
                    }
                }
                CellSummaries { geometry: out_geom, cells }
            }
            Axis::Lat => {
                let out_geom = GridGeometry { nlat: 1, nlon: g.nlon, ..g };
                let mut cells = vec![CellStat::EMPTY; g.nlon];
                for i in 0..g.nlat {
                    for j in 0..g.nlon {
                        cells[j] = CellStat::merged(&cells[j], &self.cells[g.index(i, j)]);
                    }
                }
                CellSummaries { geometry: out_geom, cells }
            }
        }
    }

    /// Pools everything into a single 1x1 summary.
    pub fn pool_all(&self) -> CellSummaries {
        self.pool_axis(Axis::Lon).pool_axis(Axis::Lat)
    }
}

/// Axis reduction of a single field: pools each row/column's valid values
/// and finalizes the statistic.
pub fn reduce_axis(field: &GridField, axis: Axis, stat: StatKind) -> GridField {
    CellSummaries::from_field(field)
        .pool_axis(axis)
        .finalize(stat)
        .with_variable(field.variable().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridGeometry;

    fn geom(nlat: usize, nlon: usize) -> GridGeometry {
        GridGeometry::with_shape(nlat, nlon).unwrap()
    }

    fn field(g: GridGeometry, vals: &[f64]) -> GridField {
        GridField::new(g, "t", vals.to_vec(), vec![true; vals.len()]).unwrap()
    }

    /// Oracle: statistics recomputed from the flat list of observations.
    fn oracle(values: &[f64], stat: StatKind) -> f64 {
        let n = values.len() as f64;
        match stat {
            StatKind::Mean => values.iter().sum::<f64>() / n,
            StatKind::Min => values.iter().cloned().fold(f64::INFINITY, f64::min),
            StatKind::Max => values.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            StatKind::Stddev => {
                let mean = values.iter().sum::<f64>() / n;
                (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt()
            }
        }
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-12)
    }

    #[test]
    fn single_observation() {
        let g = geom(2, 2);
        let s = CellSummaries::empty(g)
            .accumulate(&GridField::constant(g, "t", 5.0).unwrap())
            .unwrap();
        for c in s.cells() {
            assert_eq!(c.count, 1);
            assert_eq!(c.sum, 5.0);
            assert_eq!(c.min, 5.0);
            assert_eq!(c.max, 5.0);
            assert_eq!(c.m2, 0.0);
        }
    }

    #[test]
    fn two_observations_match_flat_oracle() {
        let g = geom(1, 1);
        let s = CellSummaries::empty(g)
            .accumulate(&field(g, &[1.0]))
            .unwrap()
            .accumulate(&field(g, &[3.0]))
            .unwrap();
        let c = s.cell(0);
        assert_eq!(c.count, 2);
        assert_eq!(c.sum, 4.0);
        assert_eq!(c.min, 1.0);
        assert_eq!(c.max, 3.0);
        // oracle: m2 = sum((v - mean)^2) over [1, 3]
        assert_eq!(c.m2, 2.0);
    }

    #[test]
    fn fully_masked_field_is_a_noop() {
        let g = geom(2, 2);
        let masked = GridField::new(g, "t", vec![0.0; 4], vec![false; 4]).unwrap();
        let before = CellSummaries::empty(g).accumulate(&field(g, &[1.0; 4])).unwrap();
        let after = before.accumulate(&masked).unwrap();
        assert_eq!(before, after);
    }

    #[test]
    fn merge_with_empty_is_identity() {
        let g = geom(2, 2);
        let s = CellSummaries::from_field(&field(g, &[1.0, 2.0, 3.0, 4.0]));
        let merged = s.merge(&CellSummaries::empty(g)).unwrap();
        assert_eq!(s, merged);
    }

    #[test]
    fn merge_equals_sequential_union() {
        let g = geom(2, 3);
        let files_a = [
            [1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
            [2.5, 3.5, 1.5, 0.5, 9.0, 7.0],
        ];
        let files_b = [[4.0, 4.0, 4.0, 8.0, 8.0, 8.0], [0.0, 1.0, 2.0, 3.0, 4.0, 5.0]];
        let mut sa = CellSummaries::empty(g);
        for f in &files_a {
            sa.accumulate_mut(&field(g, f)).unwrap();
        }
        let mut sb = CellSummaries::empty(g);
        for f in &files_b {
            sb.accumulate_mut(&field(g, f)).unwrap();
        }
        let mut seq = CellSummaries::empty(g);
        for f in files_a.iter().chain(files_b.iter()) {
            seq.accumulate_mut(&field(g, f)).unwrap();
        }
        let merged = sa.merge(&sb).unwrap();
        for (m, s) in merged.cells().iter().zip(seq.cells()) {
            assert_eq!(m.count, s.count);
            assert!(close(m.sum, s.sum, 1e-12));
            assert_eq!(m.min, s.min);
            assert_eq!(m.max, s.max);
            assert!(close(m.m2, s.m2, 1e-12));
        }
    }

    #[test]
    fn merge_then_mean_averages_cellwise() {
        let g = geom(2, 2);
        let a = CellSummaries::from_field(&field(g, &[1.0, 2.0, 3.0, 4.0]));
        let b = CellSummaries::from_field(&field(g, &[5.0, 6.0, 7.0, 8.0]));
        let mean = a.merge(&b).unwrap().finalize(StatKind::Mean);
        assert_eq!(mean.values(), &[3.0, 4.0, 5.0, 6.0]);
    }

    #[test]
    fn stddev_of_identical_grids_is_zero() {
        let g = geom(2, 2);
        let f = field(g, &[1.0, 2.0, 3.0, 4.0]);
        let mut s = CellSummaries::empty(g);
        for _ in 0..5 {
            s.accumulate_mut(&f).unwrap();
        }
        let sd = s.finalize(StatKind::Stddev);
        assert_eq!(sd.values(), &[0.0; 4]);
    }

    #[test]
    fn values_one_to_eight_pooled() {
        let g = geom(1, 1);
        let mut s = CellSummaries::empty(g);
        for v in 1..=8 {
            s.accumulate_mut(&field(g, &[v as f64])).unwrap();
        }
        assert_eq!(s.finalize(StatKind::Mean).values()[0], 4.5);
        let sd = s.finalize(StatKind::Stddev).values()[0];
        assert!(close(sd, 5.25f64.sqrt(), 1e-12));
    }

    #[test]
    fn empty_summary_finalizes_fully_masked() {
        let g = geom(3, 2);
        for stat in StatKind::ALL {
            let out = CellSummaries::empty(g).finalize(stat);
            assert_eq!(out.valid_count(), 0);
        }
    }

    #[test]
    fn reduce_lon_pools_rows() {
        // two files pooled: rows {1,2,5,6} and {3,4,7,8}
        let g = geom(2, 2);
        let mut s = CellSummaries::empty(g);
        s.accumulate_mut(&field(g, &[1.0, 2.0, 3.0, 4.0])).unwrap();
        s.accumulate_mut(&field(g, &[5.0, 6.0, 7.0, 8.0])).unwrap();
        let out = s.pool_axis(Axis::Lon).finalize(StatKind::Mean);
        assert_eq!(out.values(), &[3.5, 5.5]);
    }

    #[test]
    fn reduce_constant_grid_is_constant() {
        let g = geom(3, 4);
        let f = GridField::constant(g, "t", 2.5).unwrap();
        for axis in [Axis::Lat, Axis::Lon] {
            for stat in [StatKind::Mean, StatKind::Min, StatKind::Max] {
                let out = reduce_axis(&f, axis, stat);
                assert!(out.values().iter().all(|v| *v == 2.5));
                assert!(out.mask().iter().all(|m| *m));
            }
        }
    }

    #[test]
    fn both_axes_equal_global_pool() {
        let g = geom(2, 2);
        let mut s = CellSummaries::empty(g);
        s.accumulate_mut(&field(g, &[1.0, 2.0, 3.0, 4.0])).unwrap();
        s.accumulate_mut(&field(g, &[5.0, 6.0, 7.0, 8.0])).unwrap();
        let seq = s.pool_axis(Axis::Lon).pool_axis(Axis::Lat);
        assert_eq!(seq.cell(0).count, 8);
        assert_eq!(seq.finalize(StatKind::Mean).values()[0], 4.5);
        // MIN/MAX must agree exactly with the direct pool
        let direct = s.pool_all();
        assert_eq!(seq.cell(0).min, direct.cell(0).min);
        assert_eq!(seq.cell(0).max, direct.cell(0).max);
    }

    #[test]
    fn min_mean_max_ordering_and_nonnegative_stddev() {
        let g = geom(2, 2);
        let mut s = CellSummaries::empty(g);
        for vals in [
            [3.25, -1.5, 7.0, 2.0],
            [1e10, 2.0, -7.5, 2.0],
            [0.125, 0.25, 0.5, 2.0],
        ] {
            s.accumulate_mut(&field(g, &vals)).unwrap();
        }
        let min = s.finalize(StatKind::Min);
        let mean = s.finalize(StatKind::Mean);
        let max = s.finalize(StatKind::Max);
        let sd = s.finalize(StatKind::Stddev);
        for i in 0..4 {
            assert!(min.values()[i] <= mean.values()[i]);
            assert!(mean.values()[i] <= max.values()[i]);
            assert!(sd.values()[i] >= 0.0);
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_cell() -> impl Strategy<Value = CellStat> {
            (1u64..50, proptest::collection::vec(-1e3f64..1e3, 1..50)).prop_map(|(_, vals)| {
                let mut c = CellStat::EMPTY;
                for v in vals {
                    c.observe(v);
                }
                c
            })
        }

        fn rel_close(a: f64, b: f64, tol: f64) -> bool {
            (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-9)
        }

        fn stats_close(a: &CellStat, b: &CellStat, tol: f64) -> bool {
            a.count == b.count
                && a.min == b.min
                && a.max == b.max
                && rel_close(a.sum, b.sum, tol)
                && rel_close(a.m2, b.m2, tol)
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(1000))]

            #[test]
            fn merge_commutative_and_associative(a in arb_cell(), b in arb_cell(), c in arb_cell()) {
                let ab = CellStat::merged(&a, &b);
                let ba = CellStat::merged(&b, &a);
                prop_assert!(stats_close(&ab, &ba, 1e-12));
                let ab_c = CellStat::merged(&ab, &c);
                let a_bc = CellStat::merged(&a, &CellStat::merged(&b, &c));
                prop_assert!(stats_close(&ab_c, &a_bc, 1e-12));
            }

            #[test]
            fn accumulate_any_order_matches_flat_oracle(
                mut vals in proptest::collection::vec(-1e4f64..1e4, 2..40),
                seed in 0u64..1000,
            ) {
                let g = GridGeometry::with_shape(1, 1).unwrap();
                let flat = vals.clone();
                // deterministic shuffle by seed
                let n = vals.len();
                let mut state = seed.wrapping_mul(2862933555777941757).wrapping_add(3037000493);
                for i in (1..n).rev() {
                    state = state.wrapping_mul(2862933555777941757).wrapping_add(3037000493);
                    let j = (state % (i as u64 + 1)) as usize;
                    vals.swap(i, j);
                }
                let mut s = CellSummaries::empty(g);
                for v in &vals {
                    s.accumulate_mut(&field(g, &[*v])).unwrap();
                }
                for stat in StatKind::ALL {
                    let got = s.finalize(stat).values()[0];
                    let want = oracle(&flat, stat);
                    prop_assert!(rel_close(got, want, 1e-9), "{stat}: {got} vs {want}");
                }
            }
        }
    }
}
