//! The H-stochastic integral `∫ A(t) dM_t` of simple operator-valued
//! functions against an abstract martingale `M_t = E_t M` in a
//! finite-dimensional Hilbert space `C^dim`.
//!
//! The resolution of identity is a step function: `E_t = P_0 + Σ_{i≤k} P_i`
//! for `t ∈ [t_k, t_{k+1})`. Consequently `H_M(t) = span{P_i M : i > k}` on
//! the same interval, and every "for all `s ≥ t`" condition reduces to the
//! finitely many grid boundaries.
//!
//! Adaptedness convention: the operator `A_k` attached to the cell
//! `(t_{k-1}, t_k]` must be `L_M(t_{k-1})`-measurable.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::linalg::{restricted_spectral_norm, unitarity_defect, vnorm, vsub, CMatrix};
use crate::scalar::{Real, C};
use crate::symtensor::same_grid;

/// Thresholds used by the measurability checker.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances<T> {
    /// `‖A E g - E A g‖ ≤ commute · ‖g‖`.
    pub commute: T,
    /// Restricted norms may differ by at most `norm_rel` times the largest one.
    pub norm_rel: T,
}

impl<T: Real> Default for Tolerances<T> {
    fn default() -> Self {
        Self {
            commute: T::lit(T::PROJECTOR_TOL),
            norm_rel: T::lit(T::NORM_REL_TOL),
        }
    }
}

/// A step resolution of identity: an atom `P_0 = E({0})` and one projection
/// `P_k = E((t_{k-1}, t_k])` per cell.
#[derive(Debug, Clone)]
pub struct ProjectorMeasure<T> {
    grid: Arc<TimeGrid<T>>,
    atom: CMatrix<T>,
    cells: Vec<CMatrix<T>>,
}

impl<T: Real> ProjectorMeasure<T> {
    /// Validates Hermiticity, idempotency, mutual orthogonality and
    /// completeness at the scalar type's projector tolerance.
    pub fn new(grid: Arc<TimeGrid<T>>, atom: CMatrix<T>, cells: Vec<CMatrix<T>>) -> Result<Self> {
        Self::with_tolerance(grid, atom, cells, T::lit(T::PROJECTOR_TOL))
    }

    pub fn with_tolerance(
        grid: Arc<TimeGrid<T>>,
        atom: CMatrix<T>,
        cells: Vec<CMatrix<T>>,
        tol: T,
    ) -> Result<Self> {
        if cells.len() != grid.cells() {
            return Err(Error::Shape(format!(
                "{} cell projections for a grid with {} cells",
                cells.len(),
                grid.cells()
            )));
        }
        let dim = atom.rows();
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        let all: Vec<&CMatrix<T>> = std::iter::once(&atom).chain(cells.iter()).collect();
        for (i, p) in all.iter().enumerate() {
            if p.rows() != dim || p.cols() != dim {
                return Err(Error::Shape(format!("projection {i} is not {dim}x{dim}")));
            }
            let herm = p.sub(&p.adjoint())?.max_abs();
            let idem = p.matmul(p)?.sub(p)?.max_abs();
            if herm > tol || idem > tol {
                return Err(Error::InvalidArgument(format!(
                    "projection {i} is not an orthogonal projection (|P-P*| = {herm:e}, |P²-P| = {idem:e})"
                )));
            }
        }
        for i in 0..all.len() {
            for j in (i + 1)..all.len() {
                let prod = all[i].matmul(all[j])?.max_abs();
                if prod > tol {
                    return Err(Error::InvalidArgument(format!(
                        "projections {i} and {j} are not orthogonal (|P_i P_j| = {prod:e})"
                    )));
                }
            }
        }
        let mut sum = CMatrix::zeros(dim, dim);
        for p in &all {
            sum = sum.add(p)?;
        }
        let defect = sum.sub(&CMatrix::identity(dim))?.max_abs();
        if defect > tol {
            return Err(Error::InvalidArgument(format!(
                "projections do not sum to the identity (defect {defect:e})"
            )));
        }
        Ok(Self { grid, atom, cells })
    }

    pub fn grid(&self) -> &Arc<TimeGrid<T>> {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.atom.rows()
    }

    pub fn atom(&self) -> &CMatrix<T> {
        &self.atom
    }

    /// `P_k` for the 1-based cell `k`.
    pub fn cell(&self, k: usize) -> &CMatrix<T> {
        &self.cells[k - 1]
    }

    pub fn cell_projections(&self) -> &[CMatrix<T>] {
        &self.cells
    }

    /// `E_{t_j} = P_0 + Σ_{i≤j} P_i`.
    pub fn resolution_at(&self, j: usize) -> Result<CMatrix<T>> {
        self.grid.check_boundary(j)?;
        let mut e = self.atom.clone();
        for p in &self.cells[..j] {
            e = e.add(p)?;
        }
        Ok(e)
    }

    /// The transported measure `U P U*`.
    pub fn conjugate(&self, u: &CMatrix<T>) -> Result<Self> {
        let atom = self.atom.conjugate_by(u)?;
        let cells = self
            .cells
            .iter()
            .map(|p| p.conjugate_by(u))
            .collect::<Result<Vec<_>>>()?;
        // rounding from the conjugation is well inside the validation tolerance
        Self::new(self.grid.clone(), atom, cells)
    }
}

/// `M_t = E_t M` for a fixed nonzero vector `M`.
#[derive(Debug, Clone)]
pub struct AbstractMartingale<T> {
    measure: ProjectorMeasure<T>,
    vector: Vec<C<T>>,
    increments: Vec<Vec<C<T>>>,
}

impl<T: Real> AbstractMartingale<T> {
    pub fn new(measure: ProjectorMeasure<T>, vector: Vec<C<T>>) -> Result<Self> {
        if vector.len() != measure.dim() {
            return Err(Error::Shape(format!(
                "vector of length {} for dimension {}",
                vector.len(),
                measure.dim()
            )));
        }
        if vnorm(&vector) == T::zero() {
            return Err(Error::InvalidArgument("the martingale vector M must be nonzero".into()));
        }
        let increments = measure
            .cells
            .iter()
            .map(|p| p.apply(&vector))
            .collect::<Result<_>>()?;
        Ok(Self {
            measure,
            vector,
            increments,
        })
    }

    pub fn measure(&self) -> &ProjectorMeasure<T> {
        &self.measure
    }

    pub fn grid(&self) -> &Arc<TimeGrid<T>> {
        &self.measure.grid
    }

    pub fn dim(&self) -> usize {
        self.measure.dim()
    }

    pub fn vector(&self) -> &[C<T>] {
        &self.vector
    }

    /// `M(Δ_k) = P_k M`.
    pub fn increment(&self, k: usize) -> &[C<T>] {
        &self.increments[k - 1]
    }

    /// `μ(Δ_k) = ‖P_k M‖²`.
    pub fn mu(&self, k: usize) -> T {
        let n = vnorm(self.increment(k));
        n * n
    }

    /// `‖P_0 M‖²`, the mass of the atom at zero.
    pub fn mu_atom(&self) -> Result<T> {
        let n = vnorm(&self.measure.atom.apply(&self.vector)?);
        Ok(n * n)
    }

    /// `M_{t_j} = E_{t_j} M`.
    pub fn value_at(&self, j: usize) -> Result<Vec<C<T>>> {
        self.measure.resolution_at(j)?.apply(&self.vector)
    }

    /// Orthonormal basis of `H_M(t)` for `t ∈ [t_j, t_{j+1})`, i.e. of
    /// `span{P_i M : i > j}`. Increments shorter than the degeneracy threshold
    /// are left out.
    pub fn hm_subspace(&self, j: usize) -> Result<Vec<Vec<C<T>>>> {
        let n = self.grid().cells();
        if j >= n {
            return Err(Error::OutOfRange(format!(
                "H_M is indexed by boundaries 0..={}, got {j}",
                n - 1
            )));
        }
        let cutoff = T::lit(T::DEGENERATE);
        Ok(self.increments[j..]
            .iter()
            .filter_map(|v| {
                let len = vnorm(v);
                (len >= cutoff).then(|| v.iter().map(|x| x / len).collect())
            })
            .collect())
    }

    /// The martingale transported by a unitary: `(U P U*, U M)`.
    pub fn transport(&self, u: &CMatrix<T>) -> Result<Self> {
        Self::new(self.measure.conjugate(u)?, u.apply(&self.vector)?)
    }
}

/// A step operator-valued function: `A(t) = A_k` on `(t_{k-1}, t_k]`.
#[derive(Debug, Clone)]
pub struct SimpleOperatorProcess<T> {
    grid: Arc<TimeGrid<T>>,
    operators: Vec<CMatrix<T>>,
}

impl<T: Real> SimpleOperatorProcess<T> {
    pub fn new(grid: Arc<TimeGrid<T>>, operators: Vec<CMatrix<T>>) -> Result<Self> {
        if operators.len() != grid.cells() {
            return Err(Error::Shape(format!(
                "{} operators for {} cells",
                operators.len(),
                grid.cells()
            )));
        }
        if let Some(first) = operators.first() {
            let d = first.rows();
            if operators.iter().any(|a| a.rows() != d || a.cols() != d) {
                return Err(Error::Shape("operators must all be square of the same size".into()));
            }
        }
        Ok(Self { grid, operators })
    }

    /// The same operator on every cell.
    pub fn constant(grid: Arc<TimeGrid<T>>, op: CMatrix<T>) -> Result<Self> {
        let n = grid.cells();
        Self::new(grid, vec![op; n])
    }

    pub fn grid(&self) -> &Arc<TimeGrid<T>> {
        &self.grid
    }

    /// `A_k` for the 1-based cell `k`.
    pub fn operator(&self, k: usize) -> &CMatrix<T> {
        &self.operators[k - 1]
    }

    pub fn operators(&self) -> &[CMatrix<T>] {
        &self.operators
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: C<T>, other: &Self, b: C<T>) -> Result<Self> {
        if !same_grid(&self.grid, &other.grid) {
            return Err(Error::Shape("processes live on different grids".into()));
        }
        let ops = self
            .operators
            .iter()
            .zip(&other.operators)
            .map(|(x, y)| x.scale(a).add(&y.scale(b)))
            .collect::<Result<_>>()?;
        Self::new(self.grid.clone(), ops)
    }

    /// `{U A_k U*}`.
    pub fn conjugate(&self, u: &CMatrix<T>) -> Result<Self> {
        let ops = self
            .operators
            .iter()
            .map(|a| a.conjugate_by(u))
            .collect::<Result<_>>()?;
        Self::new(self.grid.clone(), ops)
    }

    fn check_against(&self, mart: &AbstractMartingale<T>) -> Result<()> {
        if !same_grid(&self.grid, mart.grid()) {
            return Err(Error::Shape("process and martingale live on different grids".into()));
        }
        if self.operators[0].rows() != mart.dim() {
            return Err(Error::Shape(format!(
                "operators act on dimension {} but the martingale lives in dimension {}",
                self.operators[0].rows(),
                mart.dim()
            )));
        }
        Ok(())
    }
}

/// `sup{‖A g‖ / ‖g‖ : g ∈ span(basis)}`; the basis must be orthonormal.
pub fn restricted_norm<T: Real>(a: &CMatrix<T>, basis: &[Vec<C<T>>]) -> Result<T> {
    if basis.iter().any(|b| b.len() != a.cols()) {
        return Err(Error::Shape("basis vectors do not match the operator dimension".into()));
    }
    restricted_spectral_norm(a, basis)
}

/// Verdict of [`check_measurable`].
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurabilityReport<T> {
    pub measurable: bool,
    /// Condition (i): restricted norms are constant on `H_M(t_l)`, `l ≥ j`.
    pub norm_constant: bool,
    /// Condition (ii): `A` commutes with every `E_{t_l}` on `H_M(t_j)`.
    pub commutes: bool,
    /// `‖A‖_{L_M(t_l)}` for `l = j..n-1` (empty subspaces report 0).
    pub norms: Vec<T>,
    /// Largest `|‖A‖_l - ‖A‖_j|` over nonempty subspaces, relative to the largest norm.
    pub worst_norm_spread: T,
    /// Largest `‖A E g - E A g‖ / ‖g‖` over basis vectors and boundaries.
    pub worst_commutator: T,
}

/// Decides `L_M(t_j)`-measurability of `a`. `j = n` is measurable by convention.
pub fn check_measurable<T: Real>(
    a: &CMatrix<T>,
    mart: &AbstractMartingale<T>,
    j: usize,
    tol: &Tolerances<T>,
) -> Result<MeasurabilityReport<T>> {
    let n = mart.grid().cells();
    mart.grid().check_boundary(j)?;
    if a.rows() != mart.dim() || a.cols() != mart.dim() {
        return Err(Error::Shape(format!(
            "operator is {}x{} but the space has dimension {}",
            a.rows(),
            a.cols(),
            mart.dim()
        )));
    }
    if j == n {
        return Ok(MeasurabilityReport {
            measurable: true,
            norm_constant: true,
            commutes: true,
            norms: Vec::new(),
            worst_norm_spread: T::zero(),
            worst_commutator: T::zero(),
        });
    }

    let mut norms = Vec::with_capacity(n - j);
    let mut nonempty = Vec::new();
    for l in j..n {
        let basis = mart.hm_subspace(l)?;
        let nrm = restricted_norm(a, &basis)?;
        if !basis.is_empty() {
            nonempty.push(nrm);
        }
        norms.push(nrm);
    }
    let largest = nonempty.iter().fold(T::zero(), |m, x| m.max(*x));
    let reference = nonempty.first().copied().unwrap_or_else(T::zero);
    let spread = nonempty
        .iter()
        .fold(T::zero(), |m, x| m.max((*x - reference).abs()));
    let worst_norm_spread = if largest > T::zero() { spread / largest } else { T::zero() };
    let norm_constant = spread <= tol.norm_rel * largest;

    let basis = mart.hm_subspace(j)?;
    let mut worst_commutator = T::zero();
    for l in j..=n {
        let e = mart.measure().resolution_at(l)?;
        for g in &basis {
            let left = a.apply(&e.apply(g)?)?;
            let right = e.apply(&a.apply(g)?)?;
            // basis vectors are unit length
            worst_commutator = worst_commutator.max(vnorm(&vsub(&left, &right)));
        }
    }
    let commutes = worst_commutator <= tol.commute;

    Ok(MeasurabilityReport {
        measurable: norm_constant && commutes,
        norm_constant,
        commutes,
        norms,
        worst_norm_spread,
        worst_commutator,
    })
}

/// `Σ_k A_k (M_{t_k} - M_{t_{k-1}}) = Σ_k A_k P_k M`.
///
/// With `enforce`, each `A_k` must be `L_M(t_{k-1})`-measurable.
pub fn h_integral<T: Real>(
    proc: &SimpleOperatorProcess<T>,
    mart: &AbstractMartingale<T>,
    enforce: bool,
) -> Result<Vec<C<T>>> {
    proc.check_against(mart)?;
    let tol = Tolerances::default();
    let mut acc = vec![C::default(); mart.dim()];
    for k in 1..=proc.grid.cells() {
        let a = proc.operator(k);
        if enforce {
            let rep = check_measurable(a, mart, k - 1, &tol)?;
            if !rep.measurable {
                return Err(Error::MeasurabilityViolation {
                    cell: k,
                    boundary: k - 1,
                    detail: format!(
                        "norm spread {:e}, commutator {:e}",
                        rep.worst_norm_spread.as_f64(),
                        rep.worst_commutator.as_f64()
                    ),
                });
            }
        }
        for (s, x) in acc.iter_mut().zip(a.apply(mart.increment(k))?) {
            *s += x;
        }
    }
    Ok(acc)
}

/// `(Σ_k ‖A_k‖²_{L_M(t_{k-1})} μ(Δ_k))^{1/2}`.
pub fn s2_quasinorm<T: Real>(proc: &SimpleOperatorProcess<T>, mart: &AbstractMartingale<T>) -> Result<T> {
    proc.check_against(mart)?;
    let mut acc = T::zero();
    for k in 1..=proc.grid.cells() {
        let nrm = restricted_norm(proc.operator(k), &mart.hm_subspace(k - 1)?)?;
        acc += nrm * nrm * mart.mu(k);
    }
    Ok(acc.sqrt())
}

/// Both sides of `‖∫A dM‖² ≤ ‖A‖²_{S_2}`.
pub fn verify_isometry_bound<T: Real>(
    proc: &SimpleOperatorProcess<T>,
    mart: &AbstractMartingale<T>,
) -> Result<(T, T)> {
    let integral = h_integral(proc, mart, true)?;
    let lhs = vnorm(&integral);
    let rhs = s2_quasinorm(proc, mart)?;
    Ok((lhs * lhs, rhs * rhs))
}

/// Returns `(U ∫A dM, ∫ U A U* dG)` with `G_t = U M_t`.
pub fn unitary_transport<T: Real>(
    u: &CMatrix<T>,
    proc: &SimpleOperatorProcess<T>,
    mart: &AbstractMartingale<T>,
) -> Result<(Vec<C<T>>, Vec<C<T>>)> {
    if u.rows() != mart.dim() || !u.is_square() {
        return Err(Error::Shape("unitary does not match the space dimension".into()));
    }
    let defect = unitarity_defect(u)?;
    if defect >= T::lit(T::PROJECTOR_TOL) {
        return Err(Error::InvalidArgument(format!(
            "matrix is not unitary (|U*U - I| = {:e})",
            defect.as_f64()
        )));
    }
    let left = u.apply(&h_integral(proc, mart, true)?)?;
    let right = h_integral(&proc.conjugate(u)?, &mart.transport(u)?, true)?;
    Ok((left, right))
}

/// Wire form of a dense complex matrix: rows of `[re, im]` pairs.
pub type MatrixJson = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_json<T: Real>(m: &CMatrix<T>) -> MatrixJson {
    (0..m.rows())
        .map(|i| m.row(i).iter().map(|z| [z.re.as_f64(), z.im.as_f64()]).collect())
        .collect()
}

pub fn matrix_from_json<T: Real>(j: &MatrixJson) -> Result<CMatrix<T>> {
    CMatrix::from_rows(
        j.iter()
            .map(|row| row.iter().map(|[re, im]| C::new(T::lit(*re), T::lit(*im))).collect())
            .collect(),
    )
}

/// File format consumed by `verify hstoch --measure`: grid boundaries, the
/// atom and cell projections, and the martingale vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureFile {
    pub grid: Vec<f64>,
    pub atom: MatrixJson,
    pub cells: Vec<MatrixJson>,
    pub vector: Vec<[f64; 2]>,
}

/// File format consumed by `verify hstoch --process`: one matrix per cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessFile {
    pub operators: Vec<MatrixJson>,
}

impl MeasureFile {
    pub fn from_martingale<T: Real>(m: &AbstractMartingale<T>) -> Self {
        Self {
            grid: m.grid().boundaries().iter().map(|b| b.as_f64()).collect(),
            atom: matrix_to_json(m.measure().atom()),
            cells: m.measure().cell_projections().iter().map(matrix_to_json).collect(),
            vector: m.vector().iter().map(|z| [z.re.as_f64(), z.im.as_f64()]).collect(),
        }
    }

    pub fn to_martingale<T: Real>(&self) -> Result<AbstractMartingale<T>> {
        let grid = Arc::new(TimeGrid::from_boundaries(self.grid.iter().map(|b| T::lit(*b)).collect())?);
        let cells = self.cells.iter().map(matrix_from_json).collect::<Result<_>>()?;
        let measure = ProjectorMeasure::new(grid, matrix_from_json(&self.atom)?, cells)?;
        let vector = self.vector.iter().map(|[re, im]| C::new(T::lit(*re), T::lit(*im))).collect();
        AbstractMartingale::new(measure, vector)
    }
}

impl ProcessFile {
    pub fn from_process<T: Real>(p: &SimpleOperatorProcess<T>) -> Self {
        Self {
            operators: p.operators().iter().map(matrix_to_json).collect(),
        }
    }

    pub fn to_process<T: Real>(&self, grid: Arc<TimeGrid<T>>) -> Result<SimpleOperatorProcess<T>> {
        let ops = self.operators.iter().map(matrix_from_json).collect::<Result<_>>()?;
        SimpleOperatorProcess::new(grid, ops)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::vmax_abs_diff;

    type Cf = C<f64>;

    fn re(x: f64) -> Cf {
        Cf::new(x, 0.0)
    }

    fn diag(d: &[f64]) -> CMatrix<f64> {
        CMatrix::from_diag(&d.iter().map(|x| re(*x)).collect::<Vec<_>>())
    }

    /// dim 3, two cells: P_1 = diag(1,0,0), P_2 = diag(0,1,1), M = (1,1,0).
    fn dim3() -> AbstractMartingale<f64> {
        let grid = Arc::new(TimeGrid::uniform(1.0, 2).unwrap());
        let m = ProjectorMeasure::new(
            grid,
            diag(&[0.0, 0.0, 0.0]),
            vec![diag(&[1.0, 0.0, 0.0]), diag(&[0.0, 1.0, 1.0])],
        )
        .unwrap();
        AbstractMartingale::new(m, vec![re(1.0), re(1.0), re(0.0)]).unwrap()
    }

    fn e(k: usize) -> Vec<Cf> {
        (0..3).map(|i| re((i == k) as u8 as f64)).collect()
    }

    fn scale_e2(c: f64) -> CMatrix<f64> {
        let mut a = CMatrix::zeros(3, 3);
        a[(1, 1)] = re(c);
        a
    }

    fn e2_to_e1() -> CMatrix<f64> {
        let mut a = CMatrix::zeros(3, 3);
        a[(0, 1)] = re(1.0);
        a
    }

    #[test]
    fn measure_validation() {
        let grid = Arc::new(TimeGrid::uniform(1.0, 2).unwrap());
        // not complete
        assert!(ProjectorMeasure::new(
            grid.clone(),
            diag(&[0.0, 0.0]),
            vec![diag(&[1.0, 0.0]), diag(&[0.0, 0.0])]
        )
        .is_err());
        // overlapping
        assert!(ProjectorMeasure::new(
            grid.clone(),
            diag(&[0.0, 0.0]),
            vec![diag(&[1.0, 0.0]), diag(&[1.0, 1.0])]
        )
        .is_err());
        // not idempotent
        assert!(ProjectorMeasure::new(
            grid.clone(),
            diag(&[0.0, 0.0]),
            vec![diag(&[2.0, 0.0]), diag(&[0.0, 1.0])]
        )
        .is_err());
        // wrong cell count
        assert!(matches!(
            ProjectorMeasure::new(grid, diag(&[1.0, 1.0]), vec![]),
            Err(Error::Shape(_))
        ));
        let m = dim3();
        assert!(AbstractMartingale::new(m.measure().clone(), vec![re(0.0); 3]).is_err());
    }

    #[test]
    fn martingale_masses_add_up() {
        let m = dim3();
        let total: f64 = (1..=2).map(|k| m.mu(k)).sum::<f64>() + m.mu_atom().unwrap();
        assert!((total - 2.0).abs() < 1e-15);
        assert_eq!(m.value_at(0).unwrap(), vec![re(0.0); 3]);
        assert_eq!(m.value_at(2).unwrap(), m.vector().to_vec());
    }

    #[test]
    fn hm_subspace_examples() {
        let m = dim3();
        let b0 = m.hm_subspace(0).unwrap();
        assert_eq!(b0, vec![e(0), e(1)]);
        let b1 = m.hm_subspace(1).unwrap();
        assert_eq!(b1, vec![e(1)]);
        assert!(m.hm_subspace(2).is_err());

        // M in the range of the atom only
        let grid = Arc::new(TimeGrid::uniform(1.0, 2).unwrap());
        let meas = ProjectorMeasure::new(
            grid,
            diag(&[1.0, 0.0, 0.0]),
            vec![diag(&[0.0, 1.0, 0.0]), diag(&[0.0, 0.0, 1.0])],
        )
        .unwrap();
        let atom_only = AbstractMartingale::new(meas, vec![re(2.0), re(0.0), re(0.0)]).unwrap();
        assert!(atom_only.hm_subspace(0).unwrap().is_empty());
        assert!(atom_only.hm_subspace(1).unwrap().is_empty());
    }

    #[test]
    fn restricted_norm_examples() {
        let id = CMatrix::<f64>::identity(3);
        assert!((restricted_norm(&id, &[e(0), e(2)]).unwrap() - 1.0).abs() < 1e-14);
        assert!((restricted_norm(&id.scale(re(2.0)), &[e(1)]).unwrap() - 2.0).abs() < 1e-14);
        assert!((restricted_norm(&e2_to_e1(), &[e(1)]).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(restricted_norm(&id, &[]).unwrap(), 0.0);
        assert!(restricted_norm(&id, &[vec![re(1.0)]]).is_err());
    }

    #[test]
    fn measurability_examples() {
        let m = dim3();
        let tol = Tolerances::default();
        for j in 0..=2 {
            assert!(check_measurable(&CMatrix::identity(3), &m, j, &tol).unwrap().measurable);
        }
        let ok = check_measurable(&scale_e2(2.0), &m, 1, &tol).unwrap();
        assert!(ok.measurable, "{ok:?}");
        let bad = check_measurable(&e2_to_e1(), &m, 1, &tol).unwrap();
        assert!(!bad.measurable);
        assert!(bad.norm_constant && !bad.commutes);
        assert!((bad.worst_commutator - 1.0).abs() < 1e-14);
        // every operator is measurable at T
        assert!(check_measurable(&e2_to_e1(), &m, 2, &tol).unwrap().measurable);
    }

    #[test]
    fn measurability_is_monotone_on_example() {
        let m = dim3();
        let tol = Tolerances::default();
        for a in [scale_e2(2.0), e2_to_e1(), CMatrix::identity(3), diag(&[3.0, 1.0, 0.0])] {
            let verdicts: Vec<bool> = (0..=2)
                .map(|j| check_measurable(&a, &m, j, &tol).unwrap().measurable)
                .collect();
            for j in 0..2 {
                assert!(!verdicts[j] || verdicts[j + 1]);
            }
        }
        // diag(3,1,0) on span{e1,e2}: norms 3 at j=0, 1 at j=1, not constant
        let r = check_measurable(&diag(&[3.0, 1.0, 0.0]), &m, 0, &tol).unwrap();
        assert!(!r.norm_constant);
    }

    #[test]
    fn integral_examples() {
        let m = dim3();
        let g = m.grid().clone();
        let id = SimpleOperatorProcess::constant(g.clone(), CMatrix::identity(3)).unwrap();
        let v = h_integral(&id, &m, true).unwrap();
        let expect = vsub(m.vector(), &m.measure().atom().apply(m.vector()).unwrap());
        assert!(vmax_abs_diff(&v, &expect) < 1e-15);

        let p = SimpleOperatorProcess::new(g.clone(), vec![CMatrix::identity(3), scale_e2(2.0)]).unwrap();
        let v = h_integral(&p, &m, true).unwrap();
        assert_eq!(v, vec![re(1.0), re(2.0), re(0.0)]);

        let zero = SimpleOperatorProcess::constant(g.clone(), CMatrix::zeros(3, 3)).unwrap();
        assert_eq!(h_integral(&zero, &m, true).unwrap(), vec![re(0.0); 3]);

        let bad = SimpleOperatorProcess::new(g.clone(), vec![CMatrix::identity(3), e2_to_e1()]).unwrap();
        assert!(matches!(
            h_integral(&bad, &m, true),
            Err(Error::MeasurabilityViolation { cell: 2, boundary: 1, .. })
        ));
        assert_eq!(h_integral(&bad, &m, false).unwrap(), vec![re(2.0), re(0.0), re(0.0)]);

        let wrong = SimpleOperatorProcess::constant(g, CMatrix::identity(2)).unwrap();
        assert!(matches!(h_integral(&wrong, &m, false), Err(Error::Shape(_))));
    }

    #[test]
    fn quasinorm_and_bound_examples() {
        let m = dim3();
        let g = m.grid().clone();
        let id = SimpleOperatorProcess::constant(g.clone(), CMatrix::identity(3)).unwrap();
        let s = s2_quasinorm(&id, &m).unwrap();
        assert!((s * s - 2.0).abs() < 1e-14);
        let (l, r) = verify_isometry_bound(&id, &m).unwrap();
        assert!((l - 2.0).abs() < 1e-14 && (r - 2.0).abs() < 1e-14);

        let zero = SimpleOperatorProcess::constant(g.clone(), CMatrix::zeros(3, 3)).unwrap();
        assert_eq!(s2_quasinorm(&zero, &m).unwrap(), 0.0);
        assert_eq!(verify_isometry_bound(&zero, &m).unwrap(), (0.0, 0.0));

        let p = SimpleOperatorProcess::new(g, vec![CMatrix::identity(3), scale_e2(2.0)]).unwrap();
        assert!((s2_quasinorm(&p, &m).unwrap() - 5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn transport_examples() {
        let m = dim3();
        let g = m.grid().clone();
        let p = SimpleOperatorProcess::new(g, vec![CMatrix::identity(3), scale_e2(2.0)]).unwrap();
        let (l, r) = unitary_transport(&CMatrix::identity(3), &p, &m).unwrap();
        assert_eq!(l, r);
        // cyclic permutation of coordinates
        let mut perm = CMatrix::zeros(3, 3);
        perm[(1, 0)] = re(1.0);
        perm[(2, 1)] = re(1.0);
        perm[(0, 2)] = re(1.0);
        let (l, r) = unitary_transport(&perm, &p, &m).unwrap();
        assert!(vmax_abs_diff(&l, &r) < 1e-15);
        assert_eq!(l, vec![re(0.0), re(1.0), re(2.0)]);
        assert!(matches!(
            unitary_transport(&CMatrix::identity(3).scale(re(2.0)), &p, &m),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn file_round_trip() {
        let m = dim3();
        let mf = MeasureFile::from_martingale(&m);
        let back: AbstractMartingale<f64> = serde_json::from_str::<MeasureFile>(&serde_json::to_string(&mf).unwrap())
            .unwrap()
            .to_martingale()
            .unwrap();
        assert_eq!(back.vector(), m.vector());
        let p = SimpleOperatorProcess::new(m.grid().clone(), vec![CMatrix::identity(3), scale_e2(2.0)]).unwrap();
        let pf = ProcessFile::from_process(&p);
        let q = pf.to_process(back.grid().clone()).unwrap();
        assert_eq!(h_integral(&q, &back, true).unwrap(), h_integral(&p, &m, true).unwrap());
    }

    mod props {
        use super::*;
        use crate::random::{complex_gaussian, random_grid, random_martingale, random_measurable_process, trial_rng};
        use proptest::prelude::*;
        use rand::Rng;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn linearity(seed in any::<u64>()) {
                let mut rng = trial_rng(seed, 0);
                let n = rng.random_range(1..=5);
                let dim = rng.random_range(n..=7);
                let grid = Arc::new(random_grid(&mut rng, 1.0, n).unwrap());
                let (m, frame) = random_martingale::<f64>(&mut rng, grid, dim).unwrap();
                let a = random_measurable_process(&mut rng, &m, &frame, false).unwrap();
                let b = random_measurable_process(&mut rng, &m, &frame, false).unwrap();
                let (x, y) = (complex_gaussian(&mut rng), complex_gaussian(&mut rng));
                let lhs = h_integral(&a.combine(x, &b, y).unwrap(), &m, false).unwrap();
                let ia = h_integral(&a, &m, true).unwrap();
                let ib = h_integral(&b, &m, true).unwrap();
                let rhs: Vec<Cf> = ia.iter().zip(&ib).map(|(p, q)| p * x + q * y).collect();
                prop_assert!(vmax_abs_diff(&lhs, &rhs) < 1e-10);
            }

            #[test]
            fn bound_and_scalar_equality(seed in any::<u64>()) {
                let mut rng = trial_rng(seed, 1);
                let n = rng.random_range(1..=6);
                let dim = rng.random_range(n..=8);
                let grid = Arc::new(random_grid(&mut rng, 1.0, n).unwrap());
                let (m, frame) = random_martingale::<f64>(&mut rng, grid, dim).unwrap();
                let p = random_measurable_process(&mut rng, &m, &frame, false).unwrap();
                let (l, r) = verify_isometry_bound(&p, &m).unwrap();
                prop_assert!(l <= r + 1e-10);
                let p = random_measurable_process(&mut rng, &m, &frame, true).unwrap();
                let (l, r) = verify_isometry_bound(&p, &m).unwrap();
                prop_assert!((l - r).abs() <= 1e-10 * r.max(1.0));
            }

            #[test]
            fn measurability_is_monotone(seed in any::<u64>()) {
                let mut rng = trial_rng(seed, 2);
                let n = rng.random_range(1..=5);
                let dim = rng.random_range(n..=7);
                let grid = Arc::new(random_grid(&mut rng, 1.0, n).unwrap());
                let (m, frame) = random_martingale::<f64>(&mut rng, grid, dim).unwrap();
                let tol = Tolerances::default();
                let p = random_measurable_process(&mut rng, &m, &frame, false).unwrap();
                // a generic matrix and a measurable one, checked at every boundary
                let candidates = [crate::random::gaussian_matrix(&mut rng, dim, dim), p.operator(1).clone()];
                for a in &candidates {
                    let v: Vec<bool> = (0..=n).map(|j| check_measurable(a, &m, j, &tol).unwrap().measurable).collect();
                    for j in 0..n {
                        prop_assert!(!v[j] || v[j + 1], "{:?}", v);
                    }
                    prop_assert!(v[n]);
                }
            }

            #[test]
            fn transport_commutes(seed in any::<u64>()) {
                let mut rng = trial_rng(seed, 3);
                let n = rng.random_range(1..=5);
                let dim = rng.random_range(n..=7);
                let grid = Arc::new(random_grid(&mut rng, 1.0, n).unwrap());
                let (m, frame) = random_martingale::<f64>(&mut rng, grid, dim).unwrap();
                let p = random_measurable_process(&mut rng, &m, &frame, false).unwrap();
                let u = crate::random::haar_unitary(&mut rng, dim).unwrap();
                let (l, r) = unitary_transport(&u, &p, &m).unwrap();
                prop_assert!(vnorm(&vsub(&l, &r)) < 1e-10);
            }
        }
    }
}
