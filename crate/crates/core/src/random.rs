//! Seed derivation and random generators for the randomized suites.
//!
//! Every trial (or Monte Carlo path) draws from its own generator seeded by
//! `derive_seed(master, index)`, so results do not depend on scheduling.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::fock::FockVector;
use crate::fock_ito::FockStepProcess;
use crate::grid::TimeGrid;
use crate::hstoch::{AbstractMartingale, ProjectorMeasure, SimpleOperatorProcess};
use crate::linalg::{orthonormalize_columns, vnorm, CMatrix};
use crate::multiset::{all_multisets, strict_multisets};
use crate::prob::{BernoulliSpace, RandomVariable};
use crate::scalar::{cplx, Real, C};
use crate::symtensor::SymCoeffs;

/// SplitMix64 finalizer applied to `master + (index + 1) * golden`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn trial_rng(master: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, index))
}

pub fn gaussian<T: Real>(rng: &mut impl Rng) -> T {
    T::lit(rng.sample::<f64, _>(StandardNormal))
}

/// Standard complex Gaussian, `E|z|² = 1`.
pub fn complex_gaussian<T: Real>(rng: &mut impl Rng) -> C<T> {
    let h = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    C::new(gaussian::<T>(rng) * h, gaussian::<T>(rng) * h)
}

pub fn gaussian_matrix<T: Real>(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix<T> {
    CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Haar-distributed unitary from the QR factorization of a Gaussian matrix.
pub fn haar_unitary<T: Real>(rng: &mut impl Rng, dim: usize) -> Result<CMatrix<T>> {
    orthonormalize_columns(&gaussian_matrix(rng, dim, dim))
}

/// Partition of `[0, horizon]` into `cells` cells of random lengths in `[0.2, 1]` (relative).
pub fn random_grid<T: Real>(rng: &mut impl Rng, horizon: T, cells: usize) -> Result<TimeGrid<T>> {
    let lens: Vec<f64> = (0..cells).map(|_| rng.random_range(0.2..1.0)).collect();
    let total: f64 = lens.iter().sum();
    let mut b = vec![T::zero()];
    let mut acc = 0.0;
    for l in &lens[..cells - 1] {
        acc += l / total;
        b.push(horizon * T::lit(acc));
    }
    b.push(horizon);
    TimeGrid::from_boundaries(b)
}

/// Structure of a random step measure: in the frame of `unitary`, `P_i` is
/// the coordinate projection onto `blocks[i]` (`blocks[0]` is the atom).
#[derive(Debug, Clone)]
pub struct MeasureFrame<T> {
    pub unitary: CMatrix<T>,
    pub blocks: Vec<Vec<usize>>,
}

impl<T: Real> MeasureFrame<T> {
    /// `U diag(B_0, ..., B_n) U*` from one block matrix per measure piece.
    fn block_operator(&self, blocks: &[CMatrix<T>]) -> Result<CMatrix<T>> {
        let dim = self.unitary.rows();
        let mut d = CMatrix::zeros(dim, dim);
        for (idx, b) in self.blocks.iter().zip(blocks) {
            for (r, &i) in idx.iter().enumerate() {
                for (c, &j) in idx.iter().enumerate() {
                    d[(i, j)] = b[(r, c)];
                }
            }
        }
        d.conjugate_by(&self.unitary)
    }
}

/// A random step measure of dimension `dim ≥ cells` with every cell
/// projection nonzero, and a Gaussian martingale vector.
pub fn random_martingale<T: Real>(
    rng: &mut impl Rng,
    grid: Arc<TimeGrid<T>>,
    dim: usize,
) -> Result<(AbstractMartingale<T>, MeasureFrame<T>)> {
    let n = grid.cells();
    assert!(dim >= n, "dimension {dim} cannot host {n} nonzero cell projections");
    let mut blocks = vec![Vec::new(); n + 1];
    for k in 1..=n {
        blocks[k].push(k - 1);
    }
    for i in n..dim {
        blocks[rng.random_range(0..=n)].push(i);
    }
    let unitary = haar_unitary(rng, dim)?;
    let frame = MeasureFrame { unitary, blocks };
    let projections: Vec<CMatrix<T>> = (0..=n)
        .map(|i| {
            let sizes: Vec<CMatrix<T>> = frame
                .blocks
                .iter()
                .enumerate()
                .map(|(j, b)| {
                    if i == j {
                        CMatrix::identity(b.len())
                    } else {
                        CMatrix::zeros(b.len(), b.len())
                    }
                })
                .collect();
            frame.block_operator(&sizes)
        })
        .collect::<Result<_>>()?;
    let mut it = projections.into_iter();
    let atom = it.next().expect("atom");
    let measure = ProjectorMeasure::new(grid, atom, it.collect())?;
    let vector = (0..dim).map(|_| complex_gaussian(rng)).collect();
    Ok((AbstractMartingale::new(measure, vector)?, frame))
}

/// A random simple process with every `A_k` `L_M(t_{k-1})`-measurable.
///
/// On `H_M(t_{k-1})` the operator is block diagonal in the frame of the
/// measure, with block gains `‖B_i P_i M‖ / ‖P_i M‖` for `i ≥ k` capped by the
/// gain of the last cell; off `H_M(t_{k-1})` it is an arbitrary matrix. With
/// `scalar_action`, `A_k` acts on `H_M(t_{k-1})` as a random complex scalar.
pub fn random_measurable_process<T: Real>(
    rng: &mut impl Rng,
    mart: &AbstractMartingale<T>,
    frame: &MeasureFrame<T>,
    scalar_action: bool,
) -> Result<SimpleOperatorProcess<T>> {
    if scalar_action {
        return random_scalar_action_process(rng, mart);
    }
    let n = mart.grid().cells();
    let dim = mart.dim();
    let local = frame.unitary.adjoint().apply(mart.vector())?;
    let mut ops = Vec::with_capacity(n);
    for k in 1..=n {
        let basis = mart.hm_subspace(k - 1)?;
        let pi_h = CMatrix::projector_onto(dim, &basis);
        let off = CMatrix::identity(dim).sub(&pi_h)?;
        let r = gaussian_matrix(rng, dim, dim);
        let on_h = {
            let mut blocks: Vec<CMatrix<T>> = frame
                .blocks
                .iter()
                .map(|b| gaussian_matrix(rng, b.len(), b.len()))
                .collect();
            let gain = |i: usize, b: &CMatrix<T>| -> Result<T> {
                let m: Vec<C<T>> = frame.blocks[i].iter().map(|&j| local[j]).collect();
                Ok(vnorm(&b.apply(&m)?) / vnorm(&m))
            };
            let top = gain(n, &blocks[n])?;
            for i in k..n {
                let g = gain(i, &blocks[i])?;
                if g > top {
                    let shrink = top / g * T::lit(rng.random_range(0.1..1.0));
                    blocks[i] = blocks[i].scale(cplx(shrink));
                }
            }
            frame.block_operator(&blocks)?.matmul(&pi_h)?
        };
        ops.push(on_h.add(&r.matmul(&off)?)?);
    }
    SimpleOperatorProcess::new(mart.grid().clone(), ops)
}

/// `A_k = c_k Π_{H_M(t_{k-1})} + R_k (1 - Π_{H_M(t_{k-1})})` with random
/// complex `c_k` and matrices `R_k`; measurable for any step measure.
pub fn random_scalar_action_process<T: Real>(
    rng: &mut impl Rng,
    mart: &AbstractMartingale<T>,
) -> Result<SimpleOperatorProcess<T>> {
    let dim = mart.dim();
    let ops = (1..=mart.grid().cells())
        .map(|k| {
            let pi_h = CMatrix::projector_onto(dim, &mart.hm_subspace(k - 1)?);
            let off = CMatrix::identity(dim).sub(&pi_h)?;
            let r = gaussian_matrix(rng, dim, dim);
            pi_h.scale(complex_gaussian(rng)).add(&r.matmul(&off)?)
        })
        .collect::<Result<_>>()?;
    SimpleOperatorProcess::new(mart.grid().clone(), ops)
}

fn random_component<T: Real>(
    rng: &mut impl Rng,
    grid: &Arc<TimeGrid<T>>,
    below: usize,
    degree: usize,
    off_diagonal: bool,
    density: f64,
) -> Result<SymCoeffs<T>> {
    let support = if off_diagonal {
        strict_multisets(below, degree)
    } else {
        all_multisets(below, degree)
    };
    let mut entries = Vec::new();
    for ms in support {
        if rng.random_bool(density) {
            entries.push((ms, complex_gaussian(rng)));
        }
    }
    SymCoeffs::from_entries(grid.clone(), degree, entries)
}

/// A random Fock vector with components of degree `≤ max_degree` supported on
/// cells `≤ below`, stored at truncation `truncation`.
pub fn random_fock_vector<T: Real>(
    rng: &mut impl Rng,
    grid: &Arc<TimeGrid<T>>,
    below: usize,
    max_degree: usize,
    truncation: usize,
    off_diagonal: bool,
) -> Result<FockVector<T>> {
    let mut comps = Vec::with_capacity(truncation + 1);
    for d in 0..=truncation {
        comps.push(if d <= max_degree {
            random_component(rng, grid, below, d, off_diagonal, 0.7)?
        } else {
            SymCoeffs::zero(grid.clone(), d)
        });
    }
    FockVector::from_components(grid.clone(), comps)
}

/// A random adapted step process: `f^{(k)}` is supported on cells `< k`.
pub fn random_adapted_process<T: Real>(
    rng: &mut impl Rng,
    grid: &Arc<TimeGrid<T>>,
    max_degree: usize,
    truncation: usize,
    off_diagonal: bool,
) -> Result<FockStepProcess<T>> {
    let values = (1..=grid.cells())
        .map(|k| random_fock_vector(rng, grid, k - 1, max_degree, truncation, off_diagonal))
        .collect::<Result<_>>()?;
    FockStepProcess::new(grid.clone(), values)
}

/// A random step process with no support restriction.
pub fn random_step_process<T: Real>(
    rng: &mut impl Rng,
    grid: &Arc<TimeGrid<T>>,
    max_degree: usize,
    truncation: usize,
) -> Result<FockStepProcess<T>> {
    let values = (1..=grid.cells())
        .map(|_| random_fock_vector(rng, grid, grid.cells(), max_degree, truncation, false))
        .collect::<Result<_>>()?;
    FockStepProcess::new(grid.clone(), values)
}

pub fn random_variable<T: Real>(rng: &mut impl Rng, space: &BernoulliSpace<T>) -> RandomVariable<T> {
    RandomVariable::from_fn(space, |_| complex_gaussian(rng))
}

/// `F_k = E[X_k | A_{k-1}]` for Gaussian `X_k`.
pub fn random_predictable<T: Real>(
    rng: &mut impl Rng,
    space: &BernoulliSpace<T>,
) -> Result<Vec<RandomVariable<T>>> {
    (1..=space.cells())
        .map(|k| space.cond_expect(&random_variable(rng, space), k - 1))
        .collect()
}
