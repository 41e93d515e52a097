//! Truncated symmetric Fock space over `L²([0,T])` on a grid.
//!
//! A [`FockVector`] is `(f_0, ..., f_N)` with `f_d` a degree-`d`
//! [`SymCoeffs`]; the norm is `‖f‖² = Σ_d d! ‖f_d‖²`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::scalar::{cplx, factorial, Real, C};
use crate::symtensor::{same_grid, SymCoeffs, SymCoeffsJson};

/// What `wick` does with components above the output truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TruncationPolicy {
    /// Fail with [`Error::TruncationOverflow`].
    #[default]
    Strict,
    /// Discard them silently.
    Drop,
}

#[derive(Debug, Clone)]
pub struct FockVector<T> {
    grid: Arc<TimeGrid<T>>,
    components: Vec<SymCoeffs<T>>,
}

impl<T: Real> FockVector<T> {
    pub fn zero(grid: Arc<TimeGrid<T>>, truncation: usize) -> Self {
        let components = (0..=truncation)
            .map(|d| SymCoeffs::zero(grid.clone(), d))
            .collect();
        Self { grid, components }
    }

    /// `(1, 0, 0, ...)`.
    pub fn vacuum(grid: Arc<TimeGrid<T>>, truncation: usize) -> Self {
        let mut v = Self::zero(grid.clone(), truncation);
        v.components[0] = SymCoeffs::scalar(grid, cplx(T::one()));
        v
    }

    /// Builds a vector from its components; `components[d]` must have degree `d`.
    pub fn from_components(grid: Arc<TimeGrid<T>>, components: Vec<SymCoeffs<T>>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Shape("a Fock vector needs at least the degree-0 component".into()));
        }
        for (d, c) in components.iter().enumerate() {
            if c.degree() != d {
                return Err(Error::Shape(format!(
                    "component {d} has degree {}",
                    c.degree()
                )));
            }
            if !same_grid(c.grid(), &grid) {
                return Err(Error::Shape("component lives on a different grid".into()));
            }
        }
        Ok(Self { grid, components })
    }

    /// Places a single homogeneous component into an otherwise zero vector.
    pub fn homogeneous(component: SymCoeffs<T>, truncation: usize) -> Result<Self> {
        let d = component.degree();
        if d > truncation {
            return Err(Error::TruncationOverflow { degree: d, truncation });
        }
        let mut v = Self::zero(component.grid().clone(), truncation);
        v.components[d] = component;
        Ok(v)
    }

    pub fn grid(&self) -> &Arc<TimeGrid<T>> {
        &self.grid
    }

    pub fn truncation(&self) -> usize {
        self.components.len() - 1
    }

    pub fn components(&self) -> &[SymCoeffs<T>] {
        &self.components
    }

    /// Component of degree `d`, or zero beyond the truncation.
    pub fn component(&self, d: usize) -> SymCoeffs<T> {
        self.components
            .get(d)
            .cloned()
            .unwrap_or_else(|| SymCoeffs::zero(self.grid.clone(), d))
    }

    /// Highest degree carrying a nonzero component.
    pub fn max_degree(&self) -> Option<usize> {
        self.components.iter().rposition(|c| !c.is_zero())
    }

    pub fn is_zero(&self) -> bool {
        self.max_degree().is_none()
    }

    /// Same vector with a different truncation. Fails if nonzero components
    /// would be cut off.
    pub fn with_truncation(&self, truncation: usize) -> Result<Self> {
        if let Some(d) = self.max_degree() {
            if d > truncation {
                return Err(Error::TruncationOverflow { degree: d, truncation });
            }
        }
        let components = (0..=truncation).map(|d| self.component(d)).collect();
        Ok(Self {
            grid: self.grid.clone(),
            components,
        })
    }

    fn check_grid(&self, other: &Self) -> Result<()> {
        if !same_grid(&self.grid, &other.grid) {
            return Err(Error::Shape("Fock vectors live on different grids".into()));
        }
        Ok(())
    }

    /// `Σ_d d! (f_d, g_d)`; degrees missing on either side count as zero.
    pub fn inner(&self, other: &Self) -> Result<C<T>> {
        self.check_grid(other)?;
        let mut acc = C::default();
        for (d, (a, b)) in self.components.iter().zip(&other.components).enumerate() {
            acc += a.inner(b)? * factorial::<T>(d);
        }
        Ok(acc)
    }

    pub fn norm_sqr(&self) -> T {
        self.components
            .iter()
            .enumerate()
            .map(|(d, c)| c.norm_sqr() * factorial::<T>(d))
            .sum()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_grid(other)?;
        let n = self.truncation().max(other.truncation());
        let components = (0..=n)
            .map(|d| self.component(d).add(&other.component(d)))
            .collect::<Result<_>>()?;
        Ok(Self {
            grid: self.grid.clone(),
            components,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(cplx(-T::one())))
    }

    pub fn scale(&self, c: C<T>) -> Self {
        Self {
            grid: self.grid.clone(),
            components: self.components.iter().map(|x| x.scale(c)).collect(),
        }
    }

    /// Largest coefficient difference over all degrees.
    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        self.check_grid(other)?;
        let n = self.truncation().max(other.truncation());
        let mut worst = T::zero();
        for d in 0..=n {
            worst = worst.max(self.component(d).max_abs_diff(&other.component(d))?);
        }
        Ok(worst)
    }

    /// Wick product with output truncation `max(N_f, N_g)`.
    pub fn wick(&self, other: &Self, policy: TruncationPolicy) -> Result<Self> {
        self.wick_truncated(other, self.truncation().max(other.truncation()), policy)
    }

    /// Wick product `(Σ_{m≤n} f_m ⊗̂ g_{n-m})_n` kept up to degree `truncation`.
    pub fn wick_truncated(
        &self,
        other: &Self,
        truncation: usize,
        policy: TruncationPolicy,
    ) -> Result<Self> {
        self.check_grid(other)?;
        let top = self.truncation() + other.truncation();
        let mut out = Self::zero(self.grid.clone(), truncation);
        for n in 0..=top {
            if n > truncation && policy == TruncationPolicy::Drop {
                break;
            }
            let mut acc = SymCoeffs::zero(self.grid.clone(), n);
            for m in 0..=n {
                let (Some(a), Some(b)) = (self.components.get(m), other.components.get(n - m)) else {
                    continue;
                };
                if a.is_zero() || b.is_zero() {
                    continue;
                }
                acc = acc.add(&a.tensor(b)?)?;
            }
            if n > truncation {
                if !acc.is_zero() {
                    return Err(Error::TruncationOverflow { degree: n, truncation });
                }
            } else {
                out.components[n] = acc;
            }
        }
        Ok(out)
    }

    /// `X_{t_j} f`: keeps, in every degree, the multisets whose cells are all `≤ j`.
    pub fn resolution_project(&self, j: usize) -> Result<Self> {
        self.grid.check_boundary(j)?;
        let j = j as u32;
        Ok(Self {
            grid: self.grid.clone(),
            components: self
                .components
                .iter()
                .map(|c| c.filter(|ms| ms.max_cell().is_none_or(|m| m <= j)))
                .collect(),
        })
    }

    /// `X_t f` for `t` a grid boundary; other times are not representable on the grid.
    pub fn resolution_project_at(&self, t: T) -> Result<Self> {
        let j = self
            .grid
            .boundary_index(t)
            .ok_or_else(|| Error::UnsupportedPoint(t.to_string()))?;
        self.resolution_project(j)
    }

    /// The same vector on `fine = grid.refine(factor)`.
    pub fn prolong(&self, fine: Arc<TimeGrid<T>>, factor: usize) -> Result<Self> {
        let comps = self
            .components
            .iter()
            .map(|c| c.prolong(fine.clone(), factor))
            .collect::<Result<_>>()?;
        Self::from_components(fine, comps)
    }

    pub fn to_json_value(&self) -> FockVectorJson {
        FockVectorJson {
            truncation: self.truncation(),
            components: self.components.iter().map(SymCoeffs::to_json_value).collect(),
        }
    }

    pub fn from_json_value(grid: Arc<TimeGrid<T>>, j: &FockVectorJson) -> Result<Self> {
        if j.components.len() != j.truncation + 1 {
            return Err(Error::Shape(format!(
                "truncation {} but {} components",
                j.truncation,
                j.components.len()
            )));
        }
        let comps = j
            .components
            .iter()
            .map(|c| SymCoeffs::from_json_value(grid.clone(), c))
            .collect::<Result<_>>()?;
        Self::from_components(grid, comps)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_json_value())?)
    }

    pub fn from_json(grid: Arc<TimeGrid<T>>, s: &str) -> Result<Self> {
        Self::from_json_value(grid, &serde_json::from_str(s)?)
    }
}

/// Wire form `{truncation, components: [SymCoeffs...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FockVectorJson {
    pub truncation: usize,
    pub components: Vec<SymCoeffsJson>,
}

/// `ζ_k = Z_{t_k} - Z_{t_{k-1}} = (0, e_k, 0, ...)`.
pub fn z_increment<T: Real>(grid: Arc<TimeGrid<T>>, cell: usize, truncation: usize) -> Result<FockVector<T>> {
    let e = SymCoeffs::indicator(grid, cell)?;
    FockVector::homogeneous(e, truncation.max(1))
}

/// `Z_{t_j} = X_{t_j} Z = (0, κ_{[0,t_j]}, 0, ...)`.
pub fn z_martingale<T: Real>(grid: Arc<TimeGrid<T>>, j: usize, truncation: usize) -> Result<FockVector<T>> {
    grid.check_boundary(j)?;
    let one = SymCoeffs::constant(grid.clone(), 1, cplx(T::one()));
    FockVector::homogeneous(one, truncation.max(1))?.resolution_project(j)
}
