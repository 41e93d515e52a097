//! Itô integral `∫ f(t) dZ_t` of step Fock-valued processes, computed both as
//! a sum of Wick increments and by symmetrization; the Hitsuda–Skorohod
//! extension; and the dense realization of Wick multiplication operators as
//! an operator process over `(F, X, Z)`.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fock::{z_increment, FockVector, FockVectorJson, TruncationPolicy};
use crate::grid::TimeGrid;
use crate::hstoch::{
    check_measurable, h_integral, AbstractMartingale, MeasurabilityReport, ProjectorMeasure,
    SimpleOperatorProcess, Tolerances,
};
use crate::linalg::CMatrix;
use crate::multiset::{all_multisets, Multiset};
use crate::scalar::{cplx, factorial, Real, C};
use crate::symtensor::{same_grid, SymCoeffs};

/// `f(t) = f^{(k)}` on `(t_{k-1}, t_k]`.
#[derive(Debug, Clone)]
pub struct FockStepProcess<T> {
    grid: Arc<TimeGrid<T>>,
    values: Vec<FockVector<T>>,
}

/// First place where a process leaves its adapted support.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdaptedViolation {
    pub cell: usize,
    pub degree: usize,
    pub multiset: Multiset,
}

impl<T: Real> FockStepProcess<T> {
    pub fn new(grid: Arc<TimeGrid<T>>, values: Vec<FockVector<T>>) -> Result<Self> {
        if values.len() != grid.cells() {
            return Err(Error::Shape(format!(
                "{} values for {} cells",
                values.len(),
                grid.cells()
            )));
        }
        let n = values[0].truncation();
        for v in &values {
            if !same_grid(v.grid(), &grid) {
                return Err(Error::Shape("value lives on a different grid".into()));
            }
            if v.truncation() != n {
                return Err(Error::Shape(format!(
                    "values have truncations {n} and {}",
                    v.truncation()
                )));
            }
        }
        Ok(Self { grid, values })
    }

    /// The same vector on every cell.
    pub fn constant(grid: Arc<TimeGrid<T>>, value: FockVector<T>) -> Result<Self> {
        let n = grid.cells();
        Self::new(grid, vec![value; n])
    }

    /// Wire form: a JSON list of Fock vectors, one per cell.
    pub fn to_json(&self) -> Result<String> {
        let v: Vec<FockVectorJson> = self.values.iter().map(FockVector::to_json_value).collect();
        Ok(serde_json::to_string(&v)?)
    }

    pub fn from_json(grid: Arc<TimeGrid<T>>, s: &str) -> Result<Self> {
        let v: Vec<FockVectorJson> = serde_json::from_str(s)?;
        let values = v
            .iter()
            .map(|j| FockVector::from_json_value(grid.clone(), j))
            .collect::<Result<_>>()?;
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<TimeGrid<T>> {
        &self.grid
    }

    pub fn truncation(&self) -> usize {
        self.values[0].truncation()
    }

    /// `f^{(k)}` for the 1-based cell `k`.
    pub fn value(&self, k: usize) -> &FockVector<T> {
        &self.values[k - 1]
    }

    pub fn values(&self) -> &[FockVector<T>] {
        &self.values
    }

    /// Highest nonzero degree over all cells.
    pub fn max_degree(&self) -> Option<usize> {
        self.values.iter().filter_map(FockVector::max_degree).max()
    }

    /// Same process with every value re-truncated.
    pub fn with_truncation(&self, truncation: usize) -> Result<Self> {
        let values = self
            .values
            .iter()
            .map(|v| v.with_truncation(truncation))
            .collect::<Result<_>>()?;
        Self::new(self.grid.clone(), values)
    }

    /// `None` if every degree `d ≥ 1` component of `f^{(k)}` lives on cells `< k`.
    pub fn check_adapted(&self) -> Option<AdaptedViolation> {
        for (idx, v) in self.values.iter().enumerate() {
            let cell = idx + 1;
            for (d, comp) in v.components().iter().enumerate().skip(1) {
                if let Some((ms, _)) = comp
                    .entries()
                    .find(|(ms, _)| ms.max_cell().is_some_and(|m| m as usize >= cell))
                {
                    return Some(AdaptedViolation {
                        cell,
                        degree: d,
                        multiset: ms.clone(),
                    });
                }
            }
        }
        None
    }

    pub fn is_adapted(&self) -> bool {
        self.check_adapted().is_none()
    }

    fn require_adapted(&self) -> Result<()> {
        match self.check_adapted() {
            None => Ok(()),
            Some(v) => Err(Error::NotAdapted {
                cell: v.cell,
                detail: format!(
                    "degree-{} component is nonzero at {:?}, which reaches cell {}",
                    v.degree, v.multiset, v.cell
                ),
            }),
        }
    }
}

/// `Σ_k f^{(k)} ◊ ζ_k`, truncated at the process truncation.
pub fn ito_wick<T: Real>(f: &FockStepProcess<T>) -> Result<FockVector<T>> {
    f.require_adapted()?;
    let n = f.truncation();
    let mut acc = FockVector::zero(f.grid.clone(), n);
    for k in 1..=f.grid.cells() {
        let zeta = z_increment(f.grid.clone(), k, 1)?;
        let term = f.value(k).wick_truncated(&zeta, n, TruncationPolicy::Strict)?;
        acc = acc.add(&term)?;
    }
    Ok(acc)
}

fn symmetrize_all<T: Real>(f: &FockStepProcess<T>) -> Result<FockVector<T>> {
    let n = f.truncation();
    let mut comps = vec![SymCoeffs::zero(f.grid.clone(), 0)];
    for d in 1..=n + 1 {
        let per_cell: Vec<SymCoeffs<T>> = f.values.iter().map(|v| v.component(d - 1)).collect();
        comps.push(SymCoeffs::symmetrize_insert(f.grid.clone(), &per_cell)?);
    }
    FockVector::from_components(f.grid.clone(), comps)
}

/// Degree-wise symmetrization `(0, f̂_1, f̂_2, ...)`, truncated one above the
/// process so that no component is lost.
pub fn ito_symmetrize<T: Real>(f: &FockStepProcess<T>) -> Result<FockVector<T>> {
    f.require_adapted()?;
    symmetrize_all(f)
}

/// The same symmetrization without an adaptedness requirement.
pub fn hs_integral<T: Real>(f: &FockStepProcess<T>) -> Result<FockVector<T>> {
    symmetrize_all(f)
}

pub fn hs_norm<T: Real>(f: &FockStepProcess<T>) -> Result<T> {
    Ok(hs_integral(f)?.norm_sqr().sqrt())
}

/// `(‖I(f)‖², Σ_k ‖f^{(k)}‖² ℓ_k)`.
pub fn ito_isometry<T: Real>(f: &FockStepProcess<T>) -> Result<(T, T)> {
    let lhs = ito_wick(f)?.norm_sqr();
    let rhs = (1..=f.grid.cells())
        .map(|k| f.value(k).norm_sqr() * f.grid.cell_length(k))
        .sum();
    Ok((lhs, rhs))
}

/// Wick multiplication operators `A_f(t_k)` as dense matrices on the
/// truncated Fock space, together with the measure `X` and the vector `Z_T`
/// expressed in the orthonormal coordinates `u_α = sqrt(d! w(α)) v_α`.
#[derive(Debug, Clone)]
pub struct FockBridge<T> {
    grid: Arc<TimeGrid<T>>,
    truncation: usize,
    basis: Vec<Multiset>,
    index: HashMap<Multiset, usize>,
    scales: Vec<T>,
    pub martingale: AbstractMartingale<T>,
    pub process: SimpleOperatorProcess<T>,
}

impl<T: Real> FockBridge<T> {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Multiset] {
        &self.basis
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn to_coords(&self, f: &FockVector<T>) -> Result<Vec<C<T>>> {
        if !same_grid(f.grid(), &self.grid) {
            return Err(Error::Shape("vector lives on a different grid".into()));
        }
        if let Some(d) = f.max_degree() {
            if d > self.truncation {
                return Err(Error::TruncationOverflow {
                    degree: d,
                    truncation: self.truncation,
                });
            }
        }
        let mut out = vec![C::default(); self.dim()];
        for comp in f.components() {
            for (ms, v) in comp.entries() {
                let i = self.index[ms];
                out[i] = v * self.scales[i];
            }
        }
        Ok(out)
    }

    pub fn from_coords(&self, u: &[C<T>]) -> Result<FockVector<T>> {
        if u.len() != self.dim() {
            return Err(Error::Shape(format!(
                "{} coordinates for a basis of size {}",
                u.len(),
                self.dim()
            )));
        }
        let comps = (0..=self.truncation)
            .map(|d| {
                SymCoeffs::from_entries(
                    self.grid.clone(),
                    d,
                    self.basis
                        .iter()
                        .zip(u)
                        .zip(&self.scales)
                        .filter(|((ms, _), _)| ms.degree() == d)
                        .map(|((ms, x), s)| (ms.clone(), x / *s)),
                )
            })
            .collect::<Result<_>>()?;
        FockVector::from_components(self.grid.clone(), comps)
    }
}

/// Builds the operator process `A_f(t_k) g = f^{(k)} ◊ g` on the Fock space
/// truncated at `n_trunc`, with products above `n_trunc` dropped.
pub fn wick_mult_process<T: Real>(f: &FockStepProcess<T>, n_trunc: usize) -> Result<FockBridge<T>> {
    f.require_adapted()?;
    if let Some(d) = f.max_degree() {
        if d + 1 > n_trunc {
            return Err(Error::TruncationOverflow {
                degree: d + 1,
                truncation: n_trunc,
            });
        }
    }
    let grid = f.grid.clone();
    let cells = grid.cells();
    let basis: Vec<Multiset> = (0..=n_trunc).flat_map(|d| all_multisets(cells, d)).collect();
    let index: HashMap<Multiset, usize> = basis.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
    let weights: Vec<SymCoeffs<T>> = (0..=n_trunc).map(|d| SymCoeffs::zero(grid.clone(), d)).collect();
    let scales: Vec<T> = basis
        .iter()
        .map(|ms| (factorial::<T>(ms.degree()) * weights[ms.degree()].weight(ms)).sqrt())
        .collect();
    let dim = basis.len();

    // X increments are diagonal in this basis
    let diag_where = |pred: &dyn Fn(&Multiset) -> bool| {
        CMatrix::from_diag(
            &basis
                .iter()
                .map(|ms| cplx(if pred(ms) { T::one() } else { T::zero() }))
                .collect::<Vec<_>>(),
        )
    };
    let atom = diag_where(&|ms| ms.degree() == 0);
    let cell_proj = (1..=cells as u32)
        .map(|k| diag_where(&|ms| ms.max_cell() == Some(k)))
        .collect();
    let measure = ProjectorMeasure::new(grid.clone(), atom, cell_proj)?;
    let mut z = vec![C::default(); dim];
    for k in 1..=cells {
        let i = index[&Multiset::singleton(k as u32)];
        z[i] = cplx(scales[i]);
    }
    let martingale = AbstractMartingale::new(measure, z)?;

    let unit = |ms: &Multiset| -> Result<FockVector<T>> {
        let e = SymCoeffs::from_entries(grid.clone(), ms.degree(), [(ms.clone(), cplx(T::one()))])?;
        FockVector::homogeneous(e, n_trunc)
    };
    let units = basis.iter().map(unit).collect::<Result<Vec<_>>>()?;
    let mut ops = Vec::with_capacity(cells);
    for k in 1..=cells {
        let fk = f.value(k);
        let mut a = CMatrix::zeros(dim, dim);
        for (col, e_alpha) in units.iter().enumerate() {
            let prod = fk.wick_truncated(e_alpha, n_trunc, TruncationPolicy::Drop)?;
            for comp in prod.components() {
                for (ms, v) in comp.entries() {
                    let row = index[ms];
                    a[(row, col)] = v * (scales[row] / scales[col]);
                }
            }
        }
        ops.push(a);
    }
    let process = SimpleOperatorProcess::new(grid.clone(), ops)?;
    Ok(FockBridge {
        grid,
        truncation: n_trunc,
        basis,
        index,
        scales,
        martingale,
        process,
    })
}

/// Outcome of comparing `∫ A_f dZ` with `I(f)`.
#[derive(Debug, Clone)]
pub struct BridgeCheck<T> {
    /// `∫ A_f(t) dZ_t` computed by the operator integral, mapped back to the Fock space.
    pub h_side: FockVector<T>,
    /// `I(f)` from Wick increments.
    pub ito_side: FockVector<T>,
    pub max_abs_diff: T,
    /// One report per cell, at boundary `k-1`.
    pub measurability: Vec<MeasurabilityReport<T>>,
}

impl<T: Real> BridgeCheck<T> {
    pub fn all_measurable(&self) -> bool {
        self.measurability.iter().all(|r| r.measurable)
    }
}

pub fn theorem41_check<T: Real>(f: &FockStepProcess<T>, n_trunc: usize) -> Result<BridgeCheck<T>> {
    let bridge = wick_mult_process(f, n_trunc)?;
    let tol = Tolerances::default();
    let measurability = (1..=f.grid.cells())
        .map(|k| check_measurable(bridge.process.operator(k), &bridge.martingale, k - 1, &tol))
        .collect::<Result<Vec<_>>>()?;
    let coords = h_integral(&bridge.process, &bridge.martingale, false)?;
    let h_side = bridge.from_coords(&coords)?;
    let ito_side = ito_wick(&f.with_truncation(n_trunc)?)?;
    let max_abs_diff = h_side.max_abs_diff(&ito_side)?;
    Ok(BridgeCheck {
        h_side,
        ito_side,
        max_abs_diff,
        measurability,
    })
}
