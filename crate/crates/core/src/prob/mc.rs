//! Monte Carlo increments of Brownian motion and compensated Poisson
//! processes, discrete iterated integrals, and the Hermite oracle.

use std::io::Write;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::random::trial_rng;
use crate::scalar::{factorial, Real, C};
use crate::symtensor::{same_grid, SymCoeffs};

/// Increments `ΔX_k` for each path, row-major (`paths × cells`).
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble<T> {
    grid: Arc<TimeGrid<T>>,
    paths: usize,
    increments: Vec<T>,
}

impl<T: Real> PathEnsemble<T> {
    pub fn grid(&self) -> &Arc<TimeGrid<T>> {
        &self.grid
    }

    pub fn paths(&self) -> usize {
        self.paths
    }

    /// Increments of path `p`.
    pub fn path(&self, p: usize) -> &[T] {
        let n = self.grid.cells();
        &self.increments[p * n..(p + 1) * n]
    }

    /// CSV with columns `path,cell,increment`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let ser = |e: csv::Error| Error::Serialization(e.to_string());
        w.write_record(["path", "cell", "increment"]).map_err(ser)?;
        for p in 0..self.paths {
            for (c, x) in self.path(p).iter().enumerate() {
                w.write_record([p.to_string(), (c + 1).to_string(), format!("{:.16e}", x.as_f64())])
                    .map_err(ser)?;
            }
        }
        w.flush().map_err(|e| Error::Serialization(e.to_string()))
    }
}

fn sample<T: Real>(
    grid: Arc<TimeGrid<T>>,
    paths: usize,
    seed: u64,
    draw: impl Fn(&mut rand_chacha::ChaCha8Rng, T) -> T + Sync,
) -> Result<PathEnsemble<T>> {
    if paths == 0 {
        return Err(Error::InvalidArgument("at least one path is required".into()));
    }
    let n = grid.cells();
    let lens = grid.cell_lengths();
    let mut increments = vec![T::zero(); paths * n];
    increments.par_chunks_mut(n).enumerate().for_each(|(p, row)| {
        let mut rng = trial_rng(seed, p as u64);
        for (x, l) in row.iter_mut().zip(&lens) {
            *x = draw(&mut rng, *l);
        }
    });
    Ok(PathEnsemble {
        grid,
        paths,
        increments,
    })
}

/// Brownian increments `ΔB_k ~ N(0, ℓ_k)`.
pub fn brownian_mc<T: Real>(grid: Arc<TimeGrid<T>>, paths: usize, seed: u64) -> Result<PathEnsemble<T>> {
    sample(grid, paths, seed, |rng, l| {
        T::lit(rng.sample::<f64, _>(StandardNormal)) * l.sqrt()
    })
}

/// Compensated Poisson increments `(Poisson(λℓ_k) - λℓ_k) / √λ`.
pub fn poisson_mc<T: Real>(
    grid: Arc<TimeGrid<T>>,
    paths: usize,
    seed: u64,
    lambda: f64,
) -> Result<PathEnsemble<T>> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!("intensity must be positive, got {lambda}")));
    }
    let sl = lambda.sqrt();
    sample(grid, paths, seed, move |rng, l| {
        let mean = lambda * l.as_f64();
        let k: f64 = Poisson::new(mean).expect("positive mean").sample(rng);
        T::lit((k - mean) / sl)
    })
}

/// `d! Σ_{c_1<...<c_d} v_c ΔX_{c_1} ... ΔX_{c_d}` per path. Entries on repeated
/// cells have no discrete counterpart and are ignored.
pub fn mc_iterated<T: Real>(f: &SymCoeffs<T>, ens: &PathEnsemble<T>) -> Result<Vec<C<T>>> {
    if !same_grid(f.grid(), &ens.grid) {
        return Err(Error::Shape("coefficients and paths live on different grids".into()));
    }
    let fact = factorial::<T>(f.degree());
    let terms: Vec<(Vec<usize>, C<T>)> = f
        .entries()
        .filter(|(ms, _)| ms.is_strict())
        .map(|(ms, v)| (ms.cells().iter().map(|c| *c as usize - 1).collect(), v * fact))
        .collect();
    Ok((0..ens.paths)
        .into_par_iter()
        .map(|p| {
            let x = ens.path(p);
            terms
                .iter()
                .map(|(cells, v)| v * cells.iter().fold(T::one(), |a, &c| a * x[c]))
                .sum()
        })
        .collect())
}

/// `‖g‖^d He_d(W(g)/‖g‖)` with `W(g) = Σ_c g_c ΔX_c` and `He_d` the monic
/// Hermite polynomial.
pub fn hermite_oracle<T: Real>(g: &SymCoeffs<T>, d: usize, ens: &PathEnsemble<T>) -> Result<Vec<T>> {
    if g.degree() != 1 {
        return Err(Error::InvalidArgument(format!("oracle needs a degree-1 function, got degree {}", g.degree())));
    }
    if !same_grid(g.grid(), &ens.grid) {
        return Err(Error::Shape("function and paths live on different grids".into()));
    }
    if g.entries().any(|(_, v)| v.im != T::zero()) {
        return Err(Error::InvalidArgument("oracle needs a real-valued function".into()));
    }
    let norm = g.norm_sqr().sqrt();
    if norm == T::zero() {
        return Err(Error::InvalidArgument("oracle needs a nonzero function".into()));
    }
    let coeffs: Vec<(usize, T)> = g.entries().map(|(ms, v)| (ms.cells()[0] as usize - 1, v.re)).collect();
    Ok((0..ens.paths)
        .into_par_iter()
        .map(|p| {
            let x = ens.path(p);
            let w = coeffs.iter().fold(T::zero(), |a, (c, v)| a + *v * x[*c]);
            norm.powi(d as i32) * hermite(d, w / norm)
        })
        .collect())
}

/// Probabilists' Hermite polynomial `He_d(x)`.
pub fn hermite<T: Real>(d: usize, x: T) -> T {
    let (mut prev, mut cur) = (T::one(), x);
    if d == 0 {
        return prev;
    }
    for n in 1..d {
        let next = x * cur - T::from_usize_lossy(n) * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `g ⊗̂ ... ⊗̂ g` (`d` factors).
pub fn tensor_power<T: Real>(g: &SymCoeffs<T>, d: usize) -> Result<SymCoeffs<T>> {
    let mut acc = SymCoeffs::scalar(g.grid().clone(), C::new(T::one(), T::zero()));
    for _ in 0..d {
        acc = acc.tensor(g)?;
    }
    Ok(acc)
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub samples: usize,
}

impl MeanEstimate {
    pub fn from_samples<T: Real>(xs: &[T]) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::InvalidArgument("no samples".into()));
        }
        let n = xs.len() as f64;
        let mean = xs.iter().map(|x| x.as_f64()).sum::<f64>() / n;
        let var = if xs.len() > 1 {
            xs.iter().map(|x| (x.as_f64() - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Ok(Self {
            mean,
            std_err: (var / n).sqrt(),
            samples: xs.len(),
        })
    }

    /// `|mean - target| ≤ sigmas · std_err + slack`.
    pub fn within(&self, target: f64, sigmas: f64, slack: f64) -> bool {
        (self.mean - target).abs() <= sigmas * self.std_err + slack
    }
}
