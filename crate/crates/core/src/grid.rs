//! Partitions `0 = t_0 < t_1 < ... < t_n = T` of the time horizon.
//!
//! Cells are 1-based and right-closed: cell `k` is `(t_{k-1}, t_k]`.
//! The point `t = 0` belongs to no cell and is reported as [`Location::Origin`].

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid<T> {
    boundaries: Vec<T>,
}

/// Result of [`TimeGrid::locate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    /// `t = 0`, the atom of the resolution of identity.
    Origin,
    /// 1-based cell index `k` with `t` in `(t_{k-1}, t_k]`.
    Cell(usize),
}

impl<T: Real> TimeGrid<T> {
    pub fn uniform(horizon: T, cells: usize) -> Result<Self> {
        if !(horizon > T::zero()) || !horizon.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "horizon must be positive and finite, got {horizon}"
            )));
        }
        if cells == 0 {
            return Err(Error::InvalidArgument("grid needs at least one cell".into()));
        }
        let n = T::from_usize_lossy(cells);
        let mut boundaries: Vec<T> = (0..=cells)
            .map(|k| horizon * T::from_usize_lossy(k) / n)
            .collect();
        boundaries[cells] = horizon;
        Ok(Self { boundaries })
    }

    pub fn from_boundaries(boundaries: Vec<T>) -> Result<Self> {
        if boundaries.len() < 2 {
            return Err(Error::InvalidArgument(
                "a grid needs at least two boundaries".into(),
            ));
        }
        if boundaries[0] != T::zero() {
            return Err(Error::InvalidArgument(format!(
                "first boundary must be 0, got {}",
                boundaries[0]
            )));
        }
        if boundaries.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidArgument("boundaries must be finite".into()));
        }
        if let Some(w) = boundaries.windows(2).find(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument(format!(
                "boundaries must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(Self { boundaries })
    }

    /// Splits every cell into `factor` equal subcells.
    pub fn refine(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(Error::InvalidArgument("refinement factor must be >= 1".into()));
        }
        let f = T::from_usize_lossy(factor);
        let mut out = Vec::with_capacity(self.cells() * factor + 1);
        out.push(T::zero());
        for w in self.boundaries.windows(2) {
            let len = w[1] - w[0];
            for i in 1..factor {
                out.push(w[0] + len * T::from_usize_lossy(i) / f);
            }
            out.push(w[1]);
        }
        Ok(Self { boundaries: out })
    }

    pub fn locate(&self, t: T) -> Result<Location> {
        if !(t >= T::zero() && t <= self.horizon()) {
            return Err(Error::OutOfRange(format!(
                "t = {t} is outside [0, {}]",
                self.horizon()
            )));
        }
        if t == T::zero() {
            return Ok(Location::Origin);
        }
        // first boundary index k >= 1 with t_k >= t
        let k = self.boundaries.partition_point(|b| *b < t);
        Ok(Location::Cell(k))
    }

    /// Boundary index `j` with `t_j == t`, if any.
    pub fn boundary_index(&self, t: T) -> Option<usize> {
        self.boundaries.iter().position(|b| *b == t)
    }

    pub fn horizon(&self) -> T {
        *self.boundaries.last().expect("non-empty")
    }

    pub fn cells(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn boundaries(&self) -> &[T] {
        &self.boundaries
    }

    pub fn boundary(&self, j: usize) -> T {
        self.boundaries[j]
    }

    /// Length of the 1-based cell `k`.
    pub fn cell_length(&self, k: usize) -> T {
        self.boundaries[k] - self.boundaries[k - 1]
    }

    pub fn cell_lengths(&self) -> Vec<T> {
        self.boundaries.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn max_cell_length(&self) -> T {
        self.cell_lengths()
            .into_iter()
            .fold(T::zero(), |a, b| a.max(b))
    }

    pub(crate) fn check_cell(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.cells() {
            return Err(Error::OutOfRange(format!(
                "cell index {k} outside 1..={}",
                self.cells()
            )));
        }
        Ok(())
    }

    pub(crate) fn check_boundary(&self, j: usize) -> Result<()> {
        if j > self.cells() {
            return Err(Error::OutOfRange(format!(
                "boundary index {j} outside 0..={}",
                self.cells()
            )));
        }
        Ok(())
    }

    pub fn describe(&self) -> String {
        let lens = self.cell_lengths();
        let first = lens[0];
        let uniform = lens
            .iter()
            .all(|l| (*l - first).abs() <= T::lit(1e-12) * self.horizon());
        if uniform {
            format!("uniform(T={}, n={})", self.horizon(), self.cells())
        } else {
            format!("partition(T={}, n={})", self.horizon(), self.cells())
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

impl<T: Real> Serialize for TimeGrid<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<f64> = self.boundaries.iter().map(|b| b.as_f64()).collect();
        v.serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for TimeGrid<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        TimeGrid::from_boundaries(v.into_iter().map(T::lit).collect()).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn uniform_grids() {
        let g = TimeGrid::uniform(1.0, 2).unwrap();
        assert_eq!(g.boundaries(), &[0.0, 0.5, 1.0]);
        let g = TimeGrid::uniform(1.0, 1).unwrap();
        assert_eq!(g.boundaries(), &[0.0, 1.0]);
        let g = TimeGrid::uniform(2.0, 4).unwrap();
        assert!(g.cell_lengths().iter().all(|l| *l == 0.5));
    }

    #[test]
    fn uniform_rejects_bad_input() {
        assert!(matches!(TimeGrid::uniform(0.0, 2), Err(Error::InvalidArgument(_))));
        assert!(matches!(TimeGrid::uniform(-1.0, 2), Err(Error::InvalidArgument(_))));
        assert!(matches!(TimeGrid::uniform(1.0, 0), Err(Error::InvalidArgument(_))));
        assert!(TimeGrid::from_boundaries(vec![0.0, 0.5, 0.5]).is_err());
        assert!(TimeGrid::from_boundaries(vec![0.1, 0.5]).is_err());
    }

    #[test]
    fn refinement() {
        let g = TimeGrid::uniform(1.0, 2).unwrap();
        assert_eq!(g.refine(2).unwrap(), TimeGrid::uniform(1.0, 4).unwrap());
        assert_eq!(g.refine(1).unwrap(), g);
        let g = TimeGrid::<f64>::from_boundaries(vec![0.0, 0.3, 1.0]).unwrap();
        let r = g.refine(2).unwrap();
        let want = [0.0, 0.15, 0.3, 0.65, 1.0];
        for (a, b) in r.boundaries().iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(matches!(g.refine(0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn locate_right_closed() {
        let g = TimeGrid::uniform(1.0, 2).unwrap();
        assert_eq!(g.locate(0.5).unwrap(), Location::Cell(1));
        assert_eq!(g.locate(0.50001).unwrap(), Location::Cell(2));
        assert_eq!(g.locate(0.0).unwrap(), Location::Origin);
        assert_eq!(g.locate(1.0).unwrap(), Location::Cell(2));
        assert!(matches!(g.locate(1.5), Err(Error::OutOfRange(_))));
        assert!(matches!(g.locate(-0.1), Err(Error::OutOfRange(_))));
        assert!(g.locate(f64::NAN).is_err());
    }

    #[test]
    fn json_is_boundary_array() {
        let g = TimeGrid::from_boundaries(vec![0.0, 0.25, 1.0]).unwrap();
        let s = g.to_json().unwrap();
        assert_eq!(s, "[0.0,0.25,1.0]");
        assert_eq!(TimeGrid::<f64>::from_json(&s).unwrap(), g);
        assert!(TimeGrid::<f64>::from_json("[0.0, 0.0]").is_err());
    }

    #[test]
    fn single_precision_grid() {
        let g = TimeGrid::<f32>::uniform(1.0, 4).unwrap();
        assert_eq!(g.locate(0.25).unwrap(), Location::Cell(1));
    }

    fn arb_grid() -> impl Strategy<Value = TimeGrid<f64>> {
        prop::collection::vec(0.01f64..1.0, 1..8).prop_map(|lens| {
            let mut b = vec![0.0];
            for l in lens {
                let last = *b.last().unwrap();
                b.push(last + l);
            }
            TimeGrid::from_boundaries(b).unwrap()
        })
    }

    proptest! {
        #[test]
        fn locate_boundaries(g in arb_grid()) {
            for k in 1..=g.cells() {
                prop_assert_eq!(g.locate(g.boundary(k)).unwrap(), Location::Cell(k));
            }
            let total: f64 = g.cell_lengths().iter().sum();
            prop_assert!((total - g.horizon()).abs() < 1e-12);
        }

        #[test]
        fn refine_composes(g in arb_grid(), a in 1usize..4, b in 1usize..4) {
            let direct = g.refine(a * b).unwrap();
            let twice = g.refine(a).unwrap().refine(b).unwrap();
            prop_assert_eq!(direct.cells(), twice.cells());
            for (x, y) in direct.boundaries().iter().zip(twice.boundaries()) {
                // equal up to rounding of the subdivision arithmetic
                prop_assert!((x - y).abs() <= 1e-14 * g.horizon());
            }
            // original boundaries survive refinement exactly
            for j in 0..=g.cells() {
                prop_assert_eq!(direct.boundary(j * a * b), g.boundary(j));
            }
        }
    }
}
