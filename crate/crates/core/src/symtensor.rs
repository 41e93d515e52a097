//! Symmetric piecewise-constant functions on `[0,T]^d`.
//!
//! A degree-`d` function constant on the blocks of the grid and invariant under
//! permutation of its arguments is determined by one value per multiset of `d`
//! cells. The block belonging to multiset `α = (m_1, ..., m_n)` consists of
//! `d!/Π m_i!` ordered cell-tuples, each of Lebesgue volume `Π ℓ_i^{m_i}`, so
//!
//! ```text
//! ‖f‖²_{L²([0,T]^d)} = Σ_α w(α) |v_α|²,   w(α) = d!/Π m_i! · Π ℓ_i^{m_i}.
//! ```

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::multiset::{all_multisets, Multiset};
use crate::scalar::{binomial, cplx, factorial, Real, C};

#[derive(Debug, Clone)]
pub struct SymCoeffs<T> {
    grid: Arc<TimeGrid<T>>,
    degree: usize,
    entries: BTreeMap<Multiset, C<T>>,
}

pub(crate) fn same_grid<T: Real>(a: &Arc<TimeGrid<T>>, b: &Arc<TimeGrid<T>>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

fn grid_mismatch() -> Error {
    Error::Shape("operands live on different grids".into())
}

impl<T: Real> SymCoeffs<T> {
    pub fn zero(grid: Arc<TimeGrid<T>>, degree: usize) -> Self {
        Self {
            grid,
            degree,
            entries: BTreeMap::new(),
        }
    }

    /// Degree-0 element with the given value.
    pub fn scalar(grid: Arc<TimeGrid<T>>, value: C<T>) -> Self {
        let mut s = Self::zero(grid, 0);
        s.insert(Multiset::empty(), value);
        s
    }

    /// Degree-1 indicator `e_k` of the 1-based cell `k`.
    pub fn indicator(grid: Arc<TimeGrid<T>>, cell: usize) -> Result<Self> {
        grid.check_cell(cell)?;
        let mut s = Self::zero(grid, 1);
        s.insert(Multiset::singleton(cell as u32), cplx(T::one()));
        Ok(s)
    }

    /// The function identically equal to `value` on `[0,T]^degree`.
    pub fn constant(grid: Arc<TimeGrid<T>>, degree: usize, value: C<T>) -> Self {
        let n = grid.cells();
        let mut s = Self::zero(grid, degree);
        for ms in all_multisets(n, degree) {
            s.insert(ms, value);
        }
        s
    }

    pub fn from_entries(
        grid: Arc<TimeGrid<T>>,
        degree: usize,
        entries: impl IntoIterator<Item = (Multiset, C<T>)>,
    ) -> Result<Self> {
        let n = grid.cells() as u32;
        let mut s = Self::zero(grid, degree);
        for (ms, v) in entries {
            if ms.degree() != degree {
                return Err(Error::Shape(format!(
                    "multiset {ms:?} has size {} but degree is {degree}",
                    ms.degree()
                )));
            }
            if ms.cells().iter().any(|c| *c == 0 || *c > n) {
                return Err(Error::OutOfRange(format!(
                    "multiset {ms:?} references a cell outside 1..={n}"
                )));
            }
            s.add_at(ms, v);
        }
        Ok(s)
    }

    pub fn grid(&self) -> &Arc<TimeGrid<T>> {
        &self.grid
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Stored (nonzero) entries in multiset order.
    pub fn entries(&self) -> impl Iterator<Item = (&Multiset, &C<T>)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, ms: &Multiset) -> C<T> {
        self.entries.get(ms).copied().unwrap_or_else(C::default)
    }

    fn drop_threshold() -> T {
        T::lit(T::ZERO_DROP)
    }

    fn insert(&mut self, ms: Multiset, v: C<T>) {
        if v.norm() < Self::drop_threshold() {
            self.entries.remove(&ms);
        } else {
            self.entries.insert(ms, v);
        }
    }

    fn add_at(&mut self, ms: Multiset, v: C<T>) {
        let cur = self.get(&ms);
        self.insert(ms, cur + v);
    }

    /// Number of ordered cell tuples in the block of `ms` times the block volume.
    pub fn weight(&self, ms: &Multiset) -> T {
        let mut w = factorial::<T>(ms.degree());
        for (cell, m) in ms.occupations() {
            w = w / factorial::<T>(m) * self.grid.cell_length(cell as usize).powi(m as i32);
        }
        w
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if !same_grid(&self.grid, &other.grid) {
            return Err(grid_mismatch());
        }
        if self.degree != other.degree {
            return Err(Error::Shape(format!(
                "degree {} vs degree {}",
                self.degree, other.degree
            )));
        }
        Ok(())
    }

    /// `L²([0,T]^d)` inner product, conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> Result<C<T>> {
        self.check_compatible(other)?;
        let mut acc = C::default();
        for (ms, a) in &self.entries {
            if let Some(b) = other.entries.get(ms) {
                acc += a.conj() * b * self.weight(ms);
            }
        }
        Ok(acc)
    }

    pub fn norm_sqr(&self) -> T {
        self.entries
            .iter()
            .map(|(ms, v)| v.norm_sqr() * self.weight(ms))
            .sum()
    }

    /// Symmetric tensor product `f ⊗̂ g` of degree `p + q`.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        if !same_grid(&self.grid, &other.grid) {
            return Err(grid_mismatch());
        }
        let p = self.degree;
        let d = p + other.degree;
        let norm = binomial::<T>(d, p);
        let mut out = Self::zero(self.grid.clone(), d);
        for (alpha, a) in &self.entries {
            for (beta, b) in &other.entries {
                let gamma = alpha.union(beta);
                let mut coeff = T::one();
                for (cell, m) in alpha.occupations() {
                    coeff = coeff * binomial::<T>(gamma.multiplicity(cell), m);
                }
                out.add_at(gamma, a * b * (coeff / norm));
            }
        }
        Ok(out)
    }

    /// Symmetrizes a cell-indexed family of degree-`d-1` functions into one
    /// degree-`d` function: `v̂_γ = (1/d) Σ_c γ_c u^{(c)}_{γ - e_c}`.
    ///
    /// `per_cell[c - 1]` is the value attached to cell `c`.
    pub fn symmetrize_insert(grid: Arc<TimeGrid<T>>, per_cell: &[SymCoeffs<T>]) -> Result<Self> {
        if per_cell.len() != grid.cells() {
            return Err(Error::Shape(format!(
                "expected one value per cell ({}), got {}",
                grid.cells(),
                per_cell.len()
            )));
        }
        let lower = per_cell.first().map(|u| u.degree).unwrap_or(0);
        if let Some(bad) = per_cell.iter().find(|u| u.degree != lower) {
            return Err(Error::Shape(format!(
                "inconsistent degrees across cells: {} and {}",
                lower, bad.degree
            )));
        }
        if per_cell.iter().any(|u| !same_grid(&u.grid, &grid)) {
            return Err(grid_mismatch());
        }
        let d = lower + 1;
        let inv_d = T::one() / T::from_usize_lossy(d);
        let mut out = Self::zero(grid, d);
        for (idx, u) in per_cell.iter().enumerate() {
            let cell = (idx + 1) as u32;
            for (alpha, v) in &u.entries {
                let gamma = alpha.with(cell);
                let mult = T::from_usize_lossy(gamma.multiplicity(cell));
                out.add_at(gamma, v * (mult * inv_d));
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (ms, v) in &other.entries {
            out.add_at(ms.clone(), *v);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(cplx(-T::one())))
    }

    pub fn scale(&self, c: C<T>) -> Self {
        let mut out = Self::zero(self.grid.clone(), self.degree);
        for (ms, v) in &self.entries {
            out.insert(ms.clone(), v * c);
        }
        out
    }

    /// Keeps only the entries accepted by `keep`.
    pub fn filter(&self, mut keep: impl FnMut(&Multiset) -> bool) -> Self {
        Self {
            grid: self.grid.clone(),
            degree: self.degree,
            entries: self
                .entries
                .iter()
                .filter(|(ms, _)| keep(ms))
                .map(|(ms, v)| (ms.clone(), *v))
                .collect(),
        }
    }

    /// Largest coefficient difference `max_α |v_α - w_α|`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        self.check_compatible(other)?;
        let mut worst = T::zero();
        for (ms, v) in &self.entries {
            worst = worst.max((v - other.get(ms)).norm());
        }
        for (ms, w) in &other.entries {
            if !self.entries.contains_key(ms) {
                worst = worst.max(w.norm());
            }
        }
        Ok(worst)
    }

    /// True when every stored multiset has all multiplicities ≤ 1.
    pub fn is_off_diagonal(&self) -> bool {
        self.entries.keys().all(Multiset::is_strict)
    }

    /// Re-expresses the same function on `fine`, a grid obtained from this
    /// one by `refine(factor)`.
    pub fn prolong(&self, fine: Arc<TimeGrid<T>>, factor: usize) -> Result<Self> {
        if fine.cells() != self.grid.cells() * factor {
            return Err(Error::Shape(format!(
                "grid with {} cells is not a {factor}-fold refinement of {} cells",
                fine.cells(),
                self.grid.cells()
            )));
        }
        let mut out = Self::zero(fine, self.degree);
        for (ms, v) in &self.entries {
            // each coarse cell c with multiplicity m spreads over multisets of
            // size m drawn from its `factor` children
            let mut partial = vec![Multiset::empty()];
            for (cell, m) in ms.occupations() {
                let base = (cell - 1) * factor as u32;
                let children: Vec<Multiset> = all_multisets(factor, m)
                    .into_iter()
                    .map(|c| Multiset::new(c.cells().iter().map(|x| base + x)))
                    .collect();
                partial = partial
                    .iter()
                    .flat_map(|p| children.iter().map(move |c| p.union(c)))
                    .collect();
            }
            for fine_ms in partial {
                out.add_at(fine_ms, *v);
            }
        }
        Ok(out)
    }

    pub fn to_json_value(&self) -> SymCoeffsJson {
        SymCoeffsJson {
            degree: self.degree,
            entries: self
                .entries
                .iter()
                .map(|(ms, v)| (ms.cells().to_vec(), v.re.as_f64(), v.im.as_f64()))
                .collect(),
        }
    }

    pub fn from_json_value(grid: Arc<TimeGrid<T>>, j: &SymCoeffsJson) -> Result<Self> {
        Self::from_entries(
            grid,
            j.degree,
            j.entries
                .iter()
                .map(|(cells, re, im)| (Multiset::new(cells.iter().copied()), C::new(T::lit(*re), T::lit(*im)))),
        )
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_json_value())?)
    }

    pub fn from_json(grid: Arc<TimeGrid<T>>, s: &str) -> Result<Self> {
        Self::from_json_value(grid, &serde_json::from_str(s)?)
    }
}

/// Wire form `{degree, entries: [[cells...], re, im]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymCoeffsJson {
    pub degree: usize,
    pub entries: Vec<(Vec<u32>, f64, f64)>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiset::all_multisets;
    use proptest::prelude::*;

    type Cf = C<f64>;

    fn grid2() -> Arc<TimeGrid<f64>> {
        Arc::new(TimeGrid::uniform(1.0, 2).unwrap())
    }

    fn ms(c: &[u32]) -> Multiset {
        Multiset::new(c.iter().copied())
    }

    fn re(x: f64) -> Cf {
        Cf::new(x, 0.0)
    }

    // ---- brute-force ordered-tensor oracle ----
    //
    // A degree-d function is expanded to its full n^d table of block values,
    // tensor products are formed on ordered tuples and symmetrized by averaging
    // over all (p+q)! argument permutations.

    fn to_tuple(mut idx: usize, n: usize, d: usize) -> Vec<u32> {
        let mut t = vec![0u32; d];
        for slot in (0..d).rev() {
            t[slot] = (idx % n) as u32 + 1;
            idx /= n;
        }
        t
    }

    fn dense(f: &SymCoeffs<f64>) -> Vec<Cf> {
        let n = f.grid().cells();
        let d = f.degree();
        (0..n.pow(d as u32))
            .map(|i| f.get(&Multiset::new(to_tuple(i, n, d))))
            .collect()
    }

    fn permutations(d: usize) -> Vec<Vec<usize>> {
        if d == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(d - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, d - 1);
                out.push(q);
            }
        }
        out
    }

    fn oracle_tensor(f: &SymCoeffs<f64>, g: &SymCoeffs<f64>) -> Vec<Cf> {
        let n = f.grid().cells();
        let (p, q) = (f.degree(), g.degree());
        let d = p + q;
        let (fa, ga) = (dense(f), dense(g));
        let ordered: Vec<Cf> = (0..n.pow(d as u32))
            .map(|i| {
                let t = to_tuple(i, n, d);
                let fi = t[..p].iter().fold(0, |a, c| a * n + (*c as usize - 1));
                let gi = t[p..].iter().fold(0, |a, c| a * n + (*c as usize - 1));
                fa[fi] * ga[gi]
            })
            .collect();
        let perms = permutations(d);
        (0..n.pow(d as u32))
            .map(|i| {
                let t = to_tuple(i, n, d);
                let mut acc = Cf::default();
                for perm in &perms {
                    let j = perm.iter().fold(0, |a, &s| a * n + (t[s] as usize - 1));
                    acc += ordered[j];
                }
                acc / perms.len() as f64
            })
            .collect()
    }

    fn oracle_norm_sqr(f: &SymCoeffs<f64>) -> f64 {
        let n = f.grid().cells();
        let d = f.degree();
        dense(f)
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let vol: f64 = to_tuple(i, n, d)
                    .iter()
                    .map(|c| f.grid().cell_length(*c as usize))
                    .product();
                v.norm_sqr() * vol
            })
            .sum()
    }

    #[test]
    fn inner_examples() {
        let g = grid2();
        let ones1 = SymCoeffs::constant(g.clone(), 1, re(1.0));
        assert!((ones1.inner(&ones1).unwrap() - re(1.0)).norm() < 1e-15);
        let ones2 = SymCoeffs::constant(g.clone(), 2, re(1.0));
        assert_eq!(ones2.weight(&ms(&[1, 1])), 0.25);
        assert_eq!(ones2.weight(&ms(&[1, 2])), 0.5);
        assert_eq!(ones2.weight(&ms(&[2, 2])), 0.25);
        // frozen from the ordered-pair enumeration oracle
        assert!((oracle_norm_sqr(&ones2) - 1.0).abs() < 1e-15);
        assert!((ones2.inner(&ones2).unwrap() - re(1.0)).norm() < 1e-15);
        let f = SymCoeffs::scalar(g.clone(), re(2.0));
        let h = SymCoeffs::scalar(g, Cf::new(0.0, 3.0));
        assert_eq!(f.inner(&h).unwrap(), Cf::new(0.0, 6.0));
    }

    #[test]
    fn inner_shape_errors() {
        let g = grid2();
        let a = SymCoeffs::constant(g.clone(), 1, re(1.0));
        let b = SymCoeffs::constant(g, 2, re(1.0));
        assert!(matches!(a.inner(&b), Err(Error::Shape(_))));
        let other = Arc::new(TimeGrid::uniform(1.0, 3).unwrap());
        let c = SymCoeffs::constant(other, 1, re(1.0));
        assert!(matches!(a.inner(&c), Err(Error::Shape(_))));
        assert!(matches!(a.tensor(&c), Err(Error::Shape(_))));
    }

    #[test]
    fn tensor_examples() {
        let g = grid2();
        let e1 = SymCoeffs::indicator(g.clone(), 1).unwrap();
        let e2 = SymCoeffs::indicator(g.clone(), 2).unwrap();
        let sq = e1.tensor(&e1).unwrap();
        assert_eq!(sq.degree(), 2);
        assert_eq!(sq.get(&ms(&[1, 1])), re(1.0));
        assert_eq!(sq.len(), 1);
        let mixed = e1.tensor(&e2).unwrap();
        assert_eq!(mixed.get(&ms(&[1, 2])), re(0.5));
        assert_eq!(mixed.len(), 1);
        // oracle agreement for both
        for (f, h) in [(&e1, &e1), (&e1, &e2)] {
            let t = f.tensor(h).unwrap();
            let want = oracle_tensor(f, h);
            for (a, b) in dense(&t).iter().zip(&want) {
                assert!((a - b).norm() < 1e-15);
            }
        }
        let one = SymCoeffs::scalar(g.clone(), re(1.0));
        let f = SymCoeffs::constant(g, 2, Cf::new(0.3, -1.0));
        assert!(f.tensor(&one).unwrap().max_abs_diff(&f).unwrap() < 1e-15);
    }

    #[test]
    fn symmetrize_insert_examples() {
        let g = grid2();
        let per_cell = vec![
            SymCoeffs::scalar(g.clone(), re(3.0)),
            SymCoeffs::scalar(g.clone(), re(-1.0)),
        ];
        let s = SymCoeffs::symmetrize_insert(g.clone(), &per_cell).unwrap();
        assert_eq!(s.get(&ms(&[1])), re(3.0));
        assert_eq!(s.get(&ms(&[2])), re(-1.0));

        let per_cell = vec![
            SymCoeffs::zero(g.clone(), 1),
            SymCoeffs::indicator(g.clone(), 1).unwrap(),
        ];
        let s = SymCoeffs::symmetrize_insert(g.clone(), &per_cell).unwrap();
        assert_eq!(s.get(&ms(&[1, 2])), re(0.5));
        assert_eq!(s.get(&ms(&[1, 1])), re(0.0));
        assert_eq!(s.get(&ms(&[2, 2])), re(0.0));

        let zeros = vec![SymCoeffs::zero(g.clone(), 2), SymCoeffs::zero(g.clone(), 2)];
        assert!(SymCoeffs::symmetrize_insert(g.clone(), &zeros).unwrap().is_zero());

        let bad = vec![SymCoeffs::zero(g.clone(), 2), SymCoeffs::zero(g.clone(), 1)];
        assert!(matches!(
            SymCoeffs::symmetrize_insert(g, &bad),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn json_wire_format() {
        let g = grid2();
        let f = SymCoeffs::from_entries(g.clone(), 2, [(ms(&[1, 2]), Cf::new(0.5, -1.0))]).unwrap();
        let s = f.to_json().unwrap();
        assert_eq!(s, r#"{"degree":2,"entries":[[[1,2],0.5,-1.0]]}"#);
        let back = SymCoeffs::from_json(g.clone(), &s).unwrap();
        assert_eq!(back.max_abs_diff(&f).unwrap(), 0.0);
        assert!(SymCoeffs::<f64>::from_json(g, r#"{"degree":1,"entries":[[[1,2],1.0,0.0]]}"#).is_err());
    }

    #[test]
    fn prolong_preserves_function() {
        let g = grid2();
        let fine = Arc::new(g.refine(2).unwrap());
        let f = SymCoeffs::from_entries(
            g.clone(),
            2,
            [(ms(&[1, 2]), re(0.5)), (ms(&[2, 2]), Cf::new(0.0, 1.0))],
        )
        .unwrap();
        let p = f.prolong(fine.clone(), 2).unwrap();
        assert!((p.norm_sqr() - f.norm_sqr()).abs() < 1e-15);
        assert_eq!(p.get(&ms(&[2, 3])), re(0.5));
        assert_eq!(p.get(&ms(&[3, 4])), Cf::new(0.0, 1.0));
        assert_eq!(p.get(&ms(&[1, 2])), re(0.0));
    }

    fn arb_sym(cells: usize, degree: usize) -> impl Strategy<Value = SymCoeffs<f64>> {
        let all = all_multisets(cells, degree);
        let k = all.len();
        prop::collection::vec(((-2.0f64..2.0), (-2.0f64..2.0), prop::bool::ANY), k).prop_map(
            move |vals| {
                let grid = Arc::new(
                    TimeGrid::from_boundaries(
                        (0..=cells).map(|i| (i as f64).powf(1.3) / 3.0).collect(),
                    )
                    .unwrap(),
                );
                SymCoeffs::from_entries(
                    grid,
                    degree,
                    all.iter()
                        .zip(vals)
                        .filter(|(_, (_, _, keep))| *keep)
                        .map(|(m, (a, b, _))| (m.clone(), Cf::new(a, b))),
                )
                .unwrap()
            },
        )
    }

    fn arb_pair() -> impl Strategy<Value = (SymCoeffs<f64>, SymCoeffs<f64>)> {
        (1usize..=4, 0usize..=3, 0usize..=3)
            .prop_filter("total degree <= 3", |(_, p, q)| p + q <= 3)
            .prop_flat_map(|(n, p, q)| (arb_sym(n, p), arb_sym(n, q)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(96))]

        #[test]
        fn tensor_matches_ordered_oracle((f, g) in arb_pair()) {
            let t = f.tensor(&g).unwrap();
            let want = oracle_tensor(&f, &g);
            let got = dense(&t);
            let scale = want.iter().map(|v| v.norm()).fold(1.0f64, f64::max);
            for (a, b) in got.iter().zip(&want) {
                prop_assert!((a - b).norm() <= 1e-12 * scale);
            }
            // weights reproduce the ordered L² norm
            let ns = oracle_norm_sqr(&t);
            prop_assert!((t.norm_sqr() - ns).abs() <= 1e-12 * ns.max(1.0));
        }

        #[test]
        fn tensor_commutes_and_cross_norm((f, g) in arb_pair()) {
            let fg = f.tensor(&g).unwrap();
            let gf = g.tensor(&f).unwrap();
            prop_assert!(fg.max_abs_diff(&gf).unwrap() < 1e-12);
            prop_assert!(fg.norm_sqr().sqrt() <= f.norm_sqr().sqrt() * g.norm_sqr().sqrt() * (1.0 + 1e-12) + 1e-15);
        }

        #[test]
        fn inner_is_hermitian_positive((f, g) in arb_pair()) {
            let ff = f.inner(&f).unwrap();
            prop_assert!(ff.re >= 0.0 && ff.im.abs() < 1e-14);
            prop_assert_eq!(ff.re == 0.0, f.is_zero());
            let g2 = g.clone();
            if f.degree() == g2.degree() {
                let a = f.inner(&g2).unwrap();
                let b = g2.inner(&f).unwrap();
                prop_assert!((a - b.conj()).norm() < 1e-12);
            }
        }

        #[test]
        fn adapted_symmetrization_support(n in 1usize..5, d in 1usize..4, strict in any::<bool>(), seed in any::<u64>()) {
            use crate::multiset::strict_multisets;
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let grid = Arc::new(TimeGrid::uniform(1.0, n).unwrap());
            let per_cell: Vec<_> = (1..=n)
                .map(|c| {
                    let support = if strict {
                        strict_multisets(c - 1, d - 1)
                    } else {
                        all_multisets(c - 1, d - 1)
                    };
                    let entries: Vec<_> = support
                        .into_iter()
                        .map(|m| (m, Cf::new(rng.random_range(-1.0..1.0), 0.0)))
                        .collect();
                    SymCoeffs::from_entries(grid.clone(), d - 1, entries).unwrap()
                })
                .collect();
            let s = SymCoeffs::symmetrize_insert(grid, &per_cell).unwrap();
            // the inserted (largest) cell is never repeated
            for (m, _) in s.entries() {
                let top = m.max_cell().unwrap();
                prop_assert_eq!(m.multiplicity(top), 1);
            }
            if strict {
                prop_assert!(s.is_off_diagonal());
            }
        }
    }
}
