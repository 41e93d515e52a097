//! The scaled Bernoulli walk `N_t = Σ_{k: t_k ≤ t} ξ_k √ℓ_k` on `Ω = {±1}^n`.
//!
//! Sample point `ω` is an `n`-bit integer; bit `k-1` set means `ξ_k = -1`.
//! `A_k = σ(ξ_1, ..., ξ_k)` is generated by the low `k` bits.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fock::FockVector;
use crate::fock_ito::{ito_wick, FockStepProcess};
use crate::grid::TimeGrid;
use crate::hstoch::{
    check_measurable, h_integral, restricted_norm, AbstractMartingale, MeasurabilityReport,
    ProjectorMeasure, SimpleOperatorProcess, Tolerances,
};
use crate::linalg::CMatrix;
use crate::scalar::{cplx, factorial, Real, C};
use crate::symtensor::same_grid;

/// Largest supported number of cells (`2^20` sample points).
pub const MAX_CELLS: usize = 20;

#[derive(Debug, Clone)]
pub struct BernoulliSpace<T> {
    grid: Arc<TimeGrid<T>>,
    scales: Vec<T>,
}

/// A complex function on `Ω`, one value per sample point.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomVariable<T> {
    values: Vec<C<T>>,
}

impl<T: Real> BernoulliSpace<T> {
    pub fn new(grid: Arc<TimeGrid<T>>) -> Result<Self> {
        if grid.cells() > MAX_CELLS {
            return Err(Error::InvalidArgument(format!(
                "Bernoulli model supports at most {MAX_CELLS} cells, got {}",
                grid.cells()
            )));
        }
        let scales = grid.cell_lengths().into_iter().map(|l| l.sqrt()).collect();
        Ok(Self { grid, scales })
    }

    pub fn grid(&self) -> &Arc<TimeGrid<T>> {
        &self.grid
    }

    pub fn cells(&self) -> usize {
        self.grid.cells()
    }

    /// `|Ω| = 2^n`.
    pub fn size(&self) -> usize {
        1 << self.cells()
    }

    pub fn probability(&self) -> T {
        T::one() / T::from_usize_lossy(self.size())
    }

    /// `ξ_k(ω)`.
    pub fn sign(&self, k: usize, omega: usize) -> T {
        if omega >> (k - 1) & 1 == 1 {
            -T::one()
        } else {
            T::one()
        }
    }

    /// The coordinate `ξ_k`.
    pub fn xi(&self, k: usize) -> Result<RandomVariable<T>> {
        self.grid.check_cell(k)?;
        Ok(RandomVariable::from_fn(self, |w| cplx(self.sign(k, w))))
    }

    /// Walsh function `Π_{k ∈ cells} ξ_k`.
    pub fn walsh(&self, cells: &[usize]) -> Result<RandomVariable<T>> {
        let mut x = RandomVariable::constant(self, cplx(T::one()));
        for &k in cells {
            x = x.mul(&self.xi(k)?)?;
        }
        Ok(x)
    }

    /// `ΔN_k = ξ_k √ℓ_k`.
    pub fn increment(&self, k: usize) -> Result<RandomVariable<T>> {
        Ok(self.xi(k)?.scale(cplx(self.scales[k - 1])))
    }

    /// `N_{t_j}`.
    pub fn martingale_at(&self, j: usize) -> Result<RandomVariable<T>> {
        self.grid.check_boundary(j)?;
        let mut x = RandomVariable::constant(self, C::default());
        for k in 1..=j {
            x = x.add(&self.increment(k)?)?;
        }
        Ok(x)
    }

    /// `E[X | A_k]`: averages over `ξ_{k+1}, ..., ξ_n`.
    pub fn cond_expect(&self, x: &RandomVariable<T>, k: usize) -> Result<RandomVariable<T>> {
        self.check_rv(x)?;
        self.grid.check_boundary(k)?;
        let mask = (1usize << k) - 1;
        let mut sums = vec![C::default(); 1 << k];
        for (w, v) in x.values.iter().enumerate() {
            sums[w & mask] += v;
        }
        let inv = T::one() / T::from_usize_lossy(self.size() >> k);
        Ok(RandomVariable {
            values: (0..self.size()).map(|w| sums[w & mask] * inv).collect(),
        })
    }

    pub fn expect(&self, x: &RandomVariable<T>) -> Result<C<T>> {
        self.check_rv(x)?;
        Ok(x.values.iter().copied().sum::<C<T>>() * self.probability())
    }

    /// `E[conj(X) Y]`.
    pub fn inner(&self, x: &RandomVariable<T>, y: &RandomVariable<T>) -> Result<C<T>> {
        self.check_rv(x)?;
        self.check_rv(y)?;
        Ok(x.values.iter().zip(&y.values).map(|(a, b)| a.conj() * b).sum::<C<T>>() * self.probability())
    }

    pub fn norm(&self, x: &RandomVariable<T>) -> Result<T> {
        Ok(self.inner(x, x)?.re.max(T::zero()).sqrt())
    }

    /// Whether `X` is `A_k`-measurable, up to `tol` in the sup norm.
    pub fn is_measurable(&self, x: &RandomVariable<T>, k: usize, tol: T) -> Result<bool> {
        Ok(self.cond_expect(x, k)?.max_abs_diff(x)? <= tol)
    }

    /// First cell whose integrand is not `A_{k-1}`-measurable.
    pub fn predictability_violation(&self, f: &[RandomVariable<T>], tol: T) -> Result<Option<usize>> {
        self.check_integrand(f)?;
        for (i, x) in f.iter().enumerate() {
            if !self.is_measurable(x, i, tol)? {
                return Ok(Some(i + 1));
            }
        }
        Ok(None)
    }

    /// `Σ_k F_k ξ_k √ℓ_k` for a predictable integrand.
    pub fn discrete_ito(&self, f: &[RandomVariable<T>]) -> Result<RandomVariable<T>> {
        if let Some(cell) = self.predictability_violation(f, T::lit(T::DEGENERATE))? {
            return Err(Error::NotAdapted {
                cell,
                detail: format!("integrand on cell {cell} is not A_{}-measurable", cell - 1),
            });
        }
        self.ito_sum(f)
    }

    fn ito_sum(&self, f: &[RandomVariable<T>]) -> Result<RandomVariable<T>> {
        let mut acc = RandomVariable::constant(self, C::default());
        for (i, x) in f.iter().enumerate() {
            acc = acc.add(&x.mul(&self.increment(i + 1)?)?)?;
        }
        Ok(acc)
    }

    /// Multiplication by `F` as a diagonal matrix on `L²(Ω)`.
    pub fn mult_operator(&self, f: &RandomVariable<T>) -> Result<CMatrix<T>> {
        self.check_rv(f)?;
        Ok(CMatrix::from_diag(&f.values))
    }

    /// `E[· | A_k]` as a matrix in the sample-point basis.
    pub fn cond_expect_matrix(&self, k: usize) -> Result<CMatrix<T>> {
        self.grid.check_boundary(k)?;
        let mask = (1usize << k) - 1;
        let p = cplx(T::one() / T::from_usize_lossy(self.size() >> k));
        Ok(CMatrix::from_fn(self.size(), self.size(), |a, b| {
            if a & mask == b & mask {
                p
            } else {
                C::default()
            }
        }))
    }

    /// `L²(Ω)` as `C^{2^n}` (coordinates scaled by `2^{-n/2}` so the Euclidean
    /// inner product is `E[conj(X) Y]`), with `P_0 = E[·|A_0]`,
    /// `P_k = E[·|A_k] - E[·|A_{k-1}]` and `M = N_T`.
    pub fn hilbert_realization(&self) -> Result<AbstractMartingale<T>> {
        let n = self.cells();
        let e: Vec<CMatrix<T>> = (0..=n).map(|k| self.cond_expect_matrix(k)).collect::<Result<_>>()?;
        let cells = (1..=n).map(|k| e[k].sub(&e[k - 1])).collect::<Result<_>>()?;
        let measure = ProjectorMeasure::new(self.grid.clone(), e[0].clone(), cells)?;
        AbstractMartingale::new(measure, self.to_vector(&self.martingale_at(n)?)?)
    }

    pub fn to_vector(&self, x: &RandomVariable<T>) -> Result<Vec<C<T>>> {
        self.check_rv(x)?;
        let s = self.probability().sqrt();
        Ok(x.values.iter().map(|v| v * s).collect())
    }

    pub fn from_vector(&self, v: &[C<T>]) -> Result<RandomVariable<T>> {
        if v.len() != self.size() {
            return Err(Error::Shape(format!("{} coordinates for |Ω| = {}", v.len(), self.size())));
        }
        let s = self.probability().sqrt();
        Ok(RandomVariable {
            values: v.iter().map(|x| x / s).collect(),
        })
    }

    /// Classical and operator-side verdicts for `A_F` at boundary `k`.
    pub fn lemma1_check(&self, f: &RandomVariable<T>, k: usize) -> Result<Lemma1Verdict<T>> {
        let mart = self.hilbert_realization()?;
        self.lemma1_check_in(&mart, f, k)
    }

    /// [`Self::lemma1_check`] against a prebuilt realization.
    pub fn lemma1_check_in(
        &self,
        mart: &AbstractMartingale<T>,
        f: &RandomVariable<T>,
        k: usize,
    ) -> Result<Lemma1Verdict<T>> {
        let classical = self.is_measurable(f, k, T::lit(T::DEGENERATE))?;
        let a = self.mult_operator(f)?;
        let report = check_measurable(&a, mart, k, &Tolerances::default())?;
        let f_norm = self.norm(f)?;
        let mut norm_defect = T::zero();
        for l in k..self.cells() {
            let basis = mart.hm_subspace(l)?;
            let r = restricted_norm(&a, &basis)?;
            norm_defect = norm_defect.max((r - f_norm).abs());
        }
        Ok(Lemma1Verdict {
            classical,
            operator: report.measurable,
            l2_norm: f_norm,
            norm_defect,
            report,
        })
    }

    /// `(∫ A_F dN, ∫ F dN)`, the first by the operator integral over the
    /// Hilbert realization.
    pub fn theorem3_check(&self, f: &[RandomVariable<T>]) -> Result<(RandomVariable<T>, RandomVariable<T>)> {
        self.theorem3_check_in(&self.hilbert_realization()?, f)
    }

    /// [`Self::theorem3_check`] against a prebuilt realization.
    pub fn theorem3_check_in(
        &self,
        mart: &AbstractMartingale<T>,
        f: &[RandomVariable<T>],
    ) -> Result<(RandomVariable<T>, RandomVariable<T>)> {
        let ito = self.discrete_ito(f)?;
        let ops = f.iter().map(|x| self.mult_operator(x)).collect::<Result<_>>()?;
        let proc = SimpleOperatorProcess::new(self.grid.clone(), ops)?;
        let h = self.from_vector(&h_integral(&proc, mart, true)?)?;
        Ok((h, ito))
    }

    /// `I(f) = Σ_d d! Σ_{c_1<...<c_d} v_c Π ξ_{c_i} √ℓ_{c_i}`.
    pub fn chaos_map(&self, f: &FockVector<T>) -> Result<RandomVariable<T>> {
        if !same_grid(f.grid(), &self.grid) {
            return Err(Error::Shape("Fock vector lives on a different grid".into()));
        }
        let mut values = vec![C::default(); self.size()];
        for (d, comp) in f.components().iter().enumerate() {
            let fact = factorial::<T>(d);
            for (ms, v) in comp.entries() {
                if !ms.is_strict() {
                    return Err(Error::NotRepresentable(ms.cells().to_vec()));
                }
                let mut coeff = v * fact;
                let mut bits = 0usize;
                for &c in ms.cells() {
                    coeff = coeff * self.scales[c as usize - 1];
                    bits |= 1 << (c - 1);
                }
                for (w, out) in values.iter_mut().enumerate() {
                    // Walsh sign: parity of the selected coordinates equal to -1
                    if (w & bits).count_ones() % 2 == 0 {
                        *out += coeff;
                    } else {
                        *out -= coeff;
                    }
                }
            }
        }
        Ok(RandomVariable { values })
    }

    /// `I(∫ f dZ)` against `∫ I f(t) dN_t`, with the transported integrand's
    /// predictability reported rather than enforced.
    pub fn theorem5_check(&self, f: &FockStepProcess<T>) -> Result<Theorem5Check<T>> {
        let left = self.chaos_map(&ito_wick(f)?)?;
        let transported = f.values().iter().map(|v| self.chaos_map(v)).collect::<Result<Vec<_>>>()?;
        let predictable = self
            .predictability_violation(&transported, T::lit(T::DEGENERATE))?
            .is_none();
        let right = self.ito_sum(&transported)?;
        Ok(Theorem5Check {
            left,
            right,
            predictable,
        })
    }

    fn check_rv(&self, x: &RandomVariable<T>) -> Result<()> {
        if x.values.len() != self.size() {
            return Err(Error::Shape(format!(
                "random variable has {} values but |Ω| = {}",
                x.values.len(),
                self.size()
            )));
        }
        Ok(())
    }

    fn check_integrand(&self, f: &[RandomVariable<T>]) -> Result<()> {
        if f.len() != self.cells() {
            return Err(Error::Shape(format!("{} integrand values for {} cells", f.len(), self.cells())));
        }
        f.iter().try_for_each(|x| self.check_rv(x))
    }
}

#[derive(Debug, Clone)]
pub struct Lemma1Verdict<T> {
    /// `F` is `A_k`-measurable.
    pub classical: bool,
    /// `A_F` is `L_N(t_k)`-measurable.
    pub operator: bool,
    pub l2_norm: T,
    /// `max_{l ≥ k} |‖A_F‖_{L_N(t_l)} - ‖F‖|`.
    pub norm_defect: T,
    pub report: MeasurabilityReport<T>,
}

impl<T> Lemma1Verdict<T> {
    pub fn agree(&self) -> bool {
        self.classical == self.operator
    }
}

#[derive(Debug, Clone)]
pub struct Theorem5Check<T> {
    pub left: RandomVariable<T>,
    pub right: RandomVariable<T>,
    pub predictable: bool,
}

impl<T: Real> RandomVariable<T> {
    pub fn from_values(values: Vec<C<T>>) -> Self {
        Self { values }
    }

    pub fn from_fn(space: &BernoulliSpace<T>, f: impl FnMut(usize) -> C<T>) -> Self {
        Self {
            values: (0..space.size()).map(f).collect(),
        }
    }

    pub fn constant(space: &BernoulliSpace<T>, c: C<T>) -> Self {
        Self {
            values: vec![c; space.size()],
        }
    }

    pub fn values(&self) -> &[C<T>] {
        &self.values
    }

    fn zip_with(&self, other: &Self, op: impl Fn(C<T>, C<T>) -> C<T>) -> Result<Self> {
        if self.values.len() != other.values.len() {
            return Err(Error::Shape("random variables on different sample spaces".into()));
        }
        Ok(Self {
            values: self.values.iter().zip(&other.values).map(|(a, b)| op(*a, *b)).collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, c: C<T>) -> Self {
        Self {
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            values: self.values.iter().map(|v| v.conj()).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        Ok(self
            .sub(other)?
            .values
            .iter()
            .fold(T::zero(), |m, v| m.max(v.norm())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::z_increment;
    use crate::multiset::Multiset;
    use crate::symtensor::SymCoeffs;

    fn space(n: usize) -> BernoulliSpace<f64> {
        BernoulliSpace::new(Arc::new(TimeGrid::uniform(1.0, n).unwrap())).unwrap()
    }

    fn close(a: &RandomVariable<f64>, b: &RandomVariable<f64>) -> bool {
        a.max_abs_diff(b).unwrap() < 1e-14
    }

    #[test]
    fn cond_expect_examples() {
        let s = space(2);
        let x1 = s.xi(1).unwrap();
        let x2 = s.xi(2).unwrap();
        let zero = RandomVariable::constant(&s, cplx(0.0));
        assert!(close(&s.cond_expect(&x2, 1).unwrap(), &zero));
        let p = x1.mul(&x2).unwrap();
        assert!(close(&s.cond_expect(&p, 2).unwrap(), &p));
        assert!(close(&s.cond_expect(&x1.add(&x2).unwrap(), 1).unwrap(), &x1));
        assert!(s.cond_expect(&x1, 3).is_err());
        let c = RandomVariable::from_values(vec![cplx(1.0), cplx(2.0), cplx(3.0), cplx(6.0)]);
        let e0 = s.cond_expect(&c, 0).unwrap();
        assert!(e0.values().iter().all(|v| (v.re - 3.0).abs() < 1e-15));
    }

    #[test]
    fn normal_martingale_identities() {
        let g = Arc::new(TimeGrid::<f64>::from_boundaries(vec![0.0, 0.2, 0.7, 1.0]).unwrap());
        let s = BernoulliSpace::new(g.clone()).unwrap();
        for k in 1..=3 {
            let dn = s.increment(k).unwrap();
            let m1 = s.cond_expect(&dn, k - 1).unwrap();
            assert!(m1.values().iter().all(|v| v.norm() < 1e-15));
            let m2 = s.cond_expect(&dn.mul(&dn).unwrap(), k - 1).unwrap();
            assert!(m2.values().iter().all(|v| (v.re - g.cell_length(k)).abs() < 1e-15));
        }
        assert!(BernoulliSpace::new(Arc::new(TimeGrid::<f64>::uniform(1.0, 21).unwrap())).is_err());
    }

    #[test]
    fn discrete_ito_examples() {
        let s = space(2);
        let one = RandomVariable::constant(&s, cplx(1.0));
        let nt = s.martingale_at(2).unwrap();
        assert!(close(&s.discrete_ito(&[one.clone(), one.clone()]).unwrap(), &nt));

        let zero = RandomVariable::constant(&s, cplx(0.0));
        let x1 = s.xi(1).unwrap();
        let w12 = s.walsh(&[1, 2]).unwrap();
        // ξ_1 · ξ_2 √ℓ_2
        let i = s.discrete_ito(&[zero.clone(), x1.clone()]).unwrap();
        assert!(close(&i, &w12.scale(cplx(0.5f64.sqrt()))));
        // ΔN_1 · ΔN_2
        let i = s.discrete_ito(&[zero.clone(), s.increment(1).unwrap()]).unwrap();
        assert!(close(&i, &w12.scale(cplx(0.5))));

        let x2 = s.xi(2).unwrap();
        assert!(matches!(
            s.discrete_ito(&[zero.clone(), x2]),
            Err(Error::NotAdapted { cell: 2, .. })
        ));
        assert!(matches!(s.discrete_ito(&[x1]), Err(Error::Shape(_))));
    }

    #[test]
    fn mult_operator_examples() {
        let s = space(2);
        let one = RandomVariable::constant(&s, cplx(1.0));
        assert_eq!(s.mult_operator(&one).unwrap(), CMatrix::identity(4));
        let m = s.mult_operator(&s.xi(1).unwrap()).unwrap();
        assert_eq!(m[(1, 1)], cplx(-1.0));
        assert_eq!(m[(2, 2)], cplx(1.0));
        let f = RandomVariable::from_values(vec![C::new(1.0, 2.0); 4]);
        assert_eq!(s.mult_operator(&f).unwrap().adjoint(), s.mult_operator(&f.conj()).unwrap());
    }

    #[test]
    fn realization_preserves_inner_products() {
        let s = space(3);
        let m = s.hilbert_realization().unwrap();
        let nt = s.martingale_at(3).unwrap();
        let v = m.vector();
        let n2: f64 = v.iter().map(|x| x.norm_sqr()).sum();
        assert!((n2 - s.norm(&nt).unwrap().powi(2)).abs() < 1e-14);
        for k in 1..=3 {
            assert!((m.mu(k) - 1.0 / 3.0).abs() < 1e-14);
        }
        assert!(m.mu_atom().unwrap() < 1e-28);
    }

    #[test]
    fn lemma1_examples() {
        let s = space(2);
        let v = s.lemma1_check(&s.xi(1).unwrap(), 1).unwrap();
        assert!(v.classical && v.operator);
        assert!(v.norm_defect < 1e-12 && (v.l2_norm - 1.0).abs() < 1e-15);

        let v = s.lemma1_check(&s.xi(2).unwrap(), 1).unwrap();
        assert!(!v.classical && !v.operator);
        assert!(!v.report.commutes);

        let c = RandomVariable::constant(&s, C::new(0.0, -3.0));
        for k in 0..=2 {
            let v = s.lemma1_check(&c, k).unwrap();
            assert!(v.classical && v.operator && v.norm_defect < 1e-12);
            assert!((v.l2_norm - 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn theorem3_examples() {
        let s = space(2);
        let one = RandomVariable::constant(&s, cplx(1.0));
        let (h, i) = s.theorem3_check(&[one.clone(), one]).unwrap();
        assert!(close(&h, &i));
        let zero = RandomVariable::constant(&s, cplx(0.0));
        let (h, i) = s.theorem3_check(&[zero.clone(), s.xi(1).unwrap()]).unwrap();
        assert!(close(&h, &i));
        assert!(close(&h, &s.walsh(&[1, 2]).unwrap().scale(cplx(0.5f64.sqrt()))));
        let (h, i) = s.theorem3_check(&[zero, s.increment(1).unwrap()]).unwrap();
        assert!(close(&h, &i));
        assert!(close(&h, &s.walsh(&[1, 2]).unwrap().scale(cplx(0.5))));
    }

    #[test]
    fn chaos_map_examples() {
        let s = space(2);
        let g = s.grid().clone();
        let vac = FockVector::vacuum(g.clone(), 2);
        assert!(close(&s.chaos_map(&vac).unwrap(), &RandomVariable::constant(&s, cplx(1.0))));

        let e1 = SymCoeffs::from_entries(g.clone(), 1, [(Multiset::singleton(1), cplx(2f64.sqrt()))]).unwrap();
        let f = FockVector::homogeneous(e1, 2).unwrap();
        assert!(close(&s.chaos_map(&f).unwrap(), &s.xi(1).unwrap()));

        let c = SymCoeffs::from_entries(g.clone(), 2, [(Multiset::new([1, 2]), cplx(0.5))]).unwrap();
        let f = FockVector::homogeneous(c, 2).unwrap();
        let x = s.chaos_map(&f).unwrap();
        assert!(close(&x, &s.walsh(&[1, 2]).unwrap().scale(cplx(0.5))));
        assert!((s.norm(&x).unwrap().powi(2) - f.norm_sqr()).abs() < 1e-15);

        let d = SymCoeffs::from_entries(g.clone(), 2, [(Multiset::new([1, 1]), cplx(1.0))]).unwrap();
        assert!(matches!(
            s.chaos_map(&FockVector::homogeneous(d, 2).unwrap()),
            Err(Error::NotRepresentable(c)) if c == vec![1, 1]
        ));
    }

    #[test]
    fn theorem5_examples() {
        let s = space(2);
        let g = s.grid().clone();
        let vac = FockStepProcess::constant(g.clone(), FockVector::vacuum(g.clone(), 2)).unwrap();
        let r = s.theorem5_check(&vac).unwrap();
        assert!(r.predictable && close(&r.left, &r.right));
        assert!(close(&r.left, &s.martingale_at(2).unwrap()));

        let f = FockStepProcess::new(
            g.clone(),
            vec![FockVector::zero(g.clone(), 2), z_increment(g.clone(), 1, 2).unwrap()],
        )
        .unwrap();
        let r = s.theorem5_check(&f).unwrap();
        assert!(r.predictable && close(&r.left, &r.right));
        assert!(close(&r.left, &s.walsh(&[1, 2]).unwrap().scale(cplx(0.5))));
    }

    mod props {
        use super::*;
        use crate::random::{random_adapted_process, random_fock_vector, random_grid, random_predictable, random_variable, trial_rng};
        use proptest::prelude::*;
        use rand::Rng;

        fn setup(seed: u64, salt: u64, max: usize) -> (BernoulliSpace<f64>, rand_chacha::ChaCha8Rng) {
            let mut rng = trial_rng(seed, salt);
            let n = rng.random_range(1..=max);
            let g = Arc::new(random_grid(&mut rng, 1.0, n).unwrap());
            (BernoulliSpace::new(g).unwrap(), rng)
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn cond_expect_is_an_increasing_projection(seed in any::<u64>()) {
                let (s, mut rng) = setup(seed, 0, 6);
                let x = random_variable(&mut rng, &s);
                let y = random_variable(&mut rng, &s);
                for k in 0..=s.cells() {
                    let ex = s.cond_expect(&x, k).unwrap();
                    prop_assert!(s.cond_expect(&ex, k).unwrap().max_abs_diff(&ex).unwrap() < 1e-12);
                    let a = s.inner(&ex, &y).unwrap();
                    let b = s.inner(&x, &s.cond_expect(&y, k).unwrap()).unwrap();
                    prop_assert!((a - b).norm() < 1e-12);
                    prop_assert!(s.norm(&ex).unwrap() <= s.norm(&x).unwrap() + 1e-12);
                    for j in 0..k {
                        let lower = s.cond_expect(&ex, j).unwrap();
                        prop_assert!(lower.max_abs_diff(&s.cond_expect(&x, j).unwrap()).unwrap() < 1e-12);
                    }
                }
                prop_assert!(s.cond_expect(&x, s.cells()).unwrap() == x);
            }

            #[test]
            fn ito_isometry_and_theorem3(seed in any::<u64>()) {
                let (s, mut rng) = setup(seed, 1, 5);
                let f = random_predictable(&mut rng, &s).unwrap();
                let i = s.discrete_ito(&f).unwrap();
                let lhs = s.norm(&i).unwrap().powi(2);
                let rhs: f64 = f.iter().enumerate().map(|(k, x)| s.norm(x).unwrap().powi(2) * s.grid().cell_length(k + 1)).sum();
                prop_assert!((lhs - rhs).abs() < 1e-12 * rhs.max(1.0));
                let (h, i) = s.theorem3_check(&f).unwrap();
                prop_assert!(h.max_abs_diff(&i).unwrap() < 1e-12);
            }

            #[test]
            fn chaos_map_isometry_and_intertwining(seed in any::<u64>()) {
                let (s, mut rng) = setup(seed, 2, 6);
                let n = s.cells();
                let g = s.grid().clone();
                let f = random_fock_vector(&mut rng, &g, n, n, n, true).unwrap();
                let h = random_fock_vector(&mut rng, &g, n, n, n, true).unwrap();
                let (x, y) = (s.chaos_map(&f).unwrap(), s.chaos_map(&h).unwrap());
                prop_assert!((s.inner(&x, &y).unwrap() - f.inner(&h).unwrap()).norm() < 1e-12);
                for k in 0..=n {
                    let left = s.chaos_map(&f.resolution_project(k).unwrap()).unwrap();
                    prop_assert!(left.max_abs_diff(&s.cond_expect(&x, k).unwrap()).unwrap() < 1e-12);
                }
            }

            #[test]
            fn theorem5_agrees(seed in any::<u64>()) {
                let (s, mut rng) = setup(seed, 3, 5);
                let deg = rng.random_range(0..=2usize.min(s.cells() - 1));
                let f = random_adapted_process(&mut rng, s.grid(), deg, deg + 1, true).unwrap();
                let r = s.theorem5_check(&f).unwrap();
                prop_assert!(r.predictable);
                prop_assert!(r.left.max_abs_diff(&r.right).unwrap() < 1e-12);
            }
        }
    }
}
