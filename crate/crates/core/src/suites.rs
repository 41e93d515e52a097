//! Verification suites behind the command-line tool. Each suite returns a
//! [`SuiteReport`]; randomized trials run in parallel, each from its own
//! derived seed, and are folded in trial order.

use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::FockVector;
use crate::fock_ito::{
    hs_integral, hs_norm, ito_isometry, ito_symmetrize, ito_wick, theorem41_check, FockStepProcess,
};
use crate::grid::TimeGrid;
use crate::hstoch::{
    check_measurable, h_integral, s2_quasinorm, unitary_transport, verify_isometry_bound,
    AbstractMartingale, ProjectorMeasure, SimpleOperatorProcess, Tolerances,
};
use crate::linalg::{vmax_abs_diff, vnorm, vsub, CMatrix};
use crate::multiset::Multiset;
use crate::prob::{
    brownian_mc, hermite_oracle, mc_iterated, poisson_mc, tensor_power, BernoulliSpace, MeanEstimate,
    PathEnsemble, RandomVariable,
};
use crate::random::{
    complex_gaussian, derive_seed, gaussian, gaussian_matrix, haar_unitary, random_adapted_process,
    random_fock_vector, random_grid, random_martingale, random_measurable_process,
    random_predictable, random_scalar_action_process, random_step_process, random_variable,
    trial_rng,
};
use crate::report::{Check, SuiteReport};
use crate::scalar::{cplx, factorial, C};
use crate::symtensor::SymCoeffs;

type Cf = C<f64>;

/// Named tolerances, overridable from the command line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteTolerances {
    /// Identities that hold exactly up to rounding.
    pub exact: f64,
    /// The isometry bound, unitary transport, and other operator identities.
    pub bound: f64,
    /// Commutation defect in the measurability check.
    pub commute: f64,
    /// Relative spread of restricted norms in the measurability check.
    pub norm_rel: f64,
}

impl Default for SuiteTolerances {
    fn default() -> Self {
        Self {
            exact: 1e-12,
            bound: 1e-10,
            commute: 1e-10,
            norm_rel: 1e-9,
        }
    }
}

impl SuiteTolerances {
    pub const NAMES: [&'static str; 4] = ["exact", "bound", "commute", "norm-rel"];

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !(value >= 0.0) || !value.is_finite() {
            return Err(Error::InvalidArgument(format!("tolerance {name} must be a finite non-negative number")));
        }
        match name {
            "exact" => self.exact = value,
            "bound" => self.bound = value,
            "commute" => self.commute = value,
            "norm-rel" | "norm_rel" => self.norm_rel = value,
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "unknown tolerance {name:?}; expected one of {:?}",
                    Self::NAMES
                )))
            }
        }
        Ok(())
    }

    fn measurability(&self) -> Tolerances<f64> {
        Tolerances {
            commute: self.commute,
            norm_rel: self.norm_rel,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub cells: usize,
    /// Largest integrand degree in the Fock-space suites.
    pub degree: usize,
    pub trials: usize,
    pub seed: u64,
    pub tol: SuiteTolerances,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            cells: 4,
            degree: 2,
            trials: 100,
            seed: 0,
            tol: SuiteTolerances::default(),
        }
    }
}

impl SuiteConfig {
    fn validate(&self) -> Result<()> {
        if self.cells == 0 {
            return Err(Error::InvalidArgument("cells must be at least 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        Ok(())
    }

    fn sub_seed(&self, salt: u64) -> u64 {
        derive_seed(self.seed, salt)
    }
}

/// Runs `f` for every trial index in parallel and returns results in order.
fn trials<R: Send>(n: usize, f: impl Fn(usize) -> Result<R> + Sync + Send) -> Result<Vec<R>> {
    (0..n).into_par_iter().map(f).collect()
}

fn max_of(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, f64::max)
}

fn random_desc(cells: usize) -> String {
    format!("random partitions of [0, 1] (n={cells})")
}

// ---------------------------------------------------------------- hstoch

/// User-supplied inputs for the operator suite.
pub struct HstochInputs<'a> {
    pub martingale: &'a AbstractMartingale<f64>,
    pub process: Option<&'a SimpleOperatorProcess<f64>>,
}

fn dim3_example() -> Result<AbstractMartingale<f64>> {
    let grid = Arc::new(TimeGrid::uniform(1.0, 2)?);
    let d = |v: [f64; 3]| CMatrix::from_diag(&v.map(cplx));
    let m = ProjectorMeasure::new(grid, d([0.0; 3]), vec![d([1.0, 0.0, 0.0]), d([0.0, 1.0, 1.0])])?;
    AbstractMartingale::new(m, vec![cplx(1.0), cplx(1.0), cplx(0.0)])
}

fn hstoch_examples(r: &mut SuiteReport, tol: &SuiteTolerances) -> Result<()> {
    let m = dim3_example()?;
    let e = |k: usize| -> Vec<Cf> { (0..3).map(|i| cplx((i == k) as u8 as f64)).collect() };
    let hm_ok = m.hm_subspace(0)? == vec![e(0), e(1)] && m.hm_subspace(1)? == vec![e(1)];
    r.push(Check::verdict("example.hm_subspace", hm_ok));
    let mut scale = CMatrix::zeros(3, 3);
    scale[(1, 1)] = cplx(2.0);
    let mut shift = CMatrix::zeros(3, 3);
    shift[(0, 1)] = cplx(1.0);
    let mt = tol.measurability();
    r.push(Check::verdict(
        "example.measurable_at_t1",
        check_measurable(&scale, &m, 1, &mt)?.measurable,
    ));
    let bad = check_measurable(&shift, &m, 1, &mt)?;
    r.push(Check::verdict(
        "example.not_measurable_at_t1",
        !bad.measurable && !bad.commutes,
    ));
    let p = SimpleOperatorProcess::new(m.grid().clone(), vec![CMatrix::identity(3), scale])?;
    let i = h_integral(&p, &m, true)?;
    let want = [cplx(1.0), cplx(2.0), cplx(0.0)];
    r.push(Check::equality("example.integral", vmax_abs_diff(&i, &want), 0.0, tol.exact));
    r.push(Check::equality("example.s2_quasinorm", s2_quasinorm(&p, &m)?, 5f64.sqrt(), tol.exact));
    let id = SimpleOperatorProcess::constant(m.grid().clone(), CMatrix::identity(3))?;
    let (l, rr) = verify_isometry_bound(&id, &m)?;
    r.push(Check::equality("example.identity_equality", l, rr, tol.exact));
    Ok(())
}

struct HstochTrial {
    excess: f64,
    scalar_dev: f64,
    generator_failures: usize,
    linearity: f64,
    transport: f64,
    monotone_violations: usize,
}

pub fn hstoch_suite(cfg: &SuiteConfig, inputs: Option<HstochInputs<'_>>) -> Result<SuiteReport> {
    cfg.validate()?;
    let n = cfg.cells;
    let mut r = SuiteReport::new("hstoch", cfg.seed, random_desc(n));
    hstoch_examples(&mut r, &cfg.tol)?;
    let mt = cfg.tol.measurability();
    let max_dim = n.max(8);
    let seed = cfg.sub_seed(1);
    let res = trials(cfg.trials, |t| {
        let mut rng = trial_rng(seed, t as u64);
        let dim = rng.random_range(n..=max_dim);
        let grid = Arc::new(random_grid(&mut rng, 1.0, n)?);
        let (m, frame) = random_martingale(&mut rng, grid, dim)?;
        let a = random_measurable_process(&mut rng, &m, &frame, false)?;
        let b = random_measurable_process(&mut rng, &m, &frame, false)?;
        let s = random_measurable_process(&mut rng, &m, &frame, true)?;
        let mut generator_failures = 0;
        for p in [&a, &b, &s] {
            for k in 1..=n {
                if !check_measurable(p.operator(k), &m, k - 1, &mt)?.measurable {
                    generator_failures += 1;
                }
            }
        }
        let (la, ra) = verify_isometry_bound(&a, &m)?;
        let (ls, rs) = verify_isometry_bound(&s, &m)?;
        let (x, y) = (complex_gaussian(&mut rng), complex_gaussian(&mut rng));
        let comb = h_integral(&a.combine(x, &b, y)?, &m, false)?;
        let ia = h_integral(&a, &m, false)?;
        let ib = h_integral(&b, &m, false)?;
        let lin: Vec<Cf> = ia.iter().zip(&ib).map(|(p, q)| p * x + q * y).collect();
        let u = haar_unitary(&mut rng, dim)?;
        let (tl, tr) = unitary_transport(&u, &a, &m)?;
        let g = gaussian_matrix(&mut rng, dim, dim);
        let mut monotone_violations = 0;
        for op in [&g, a.operator(1)] {
            let v: Vec<bool> = (0..=n)
                .map(|j| check_measurable(op, &m, j, &mt).map(|x| x.measurable))
                .collect::<Result<_>>()?;
            monotone_violations += (0..n).filter(|&j| v[j] && !v[j + 1]).count();
        }
        Ok(HstochTrial {
            excess: la - ra,
            scalar_dev: (ls - rs).abs() / rs.max(1.0),
            generator_failures,
            linearity: vmax_abs_diff(&comb, &lin),
            transport: vnorm(&vsub(&tl, &tr)),
            monotone_violations,
        })
    })?;
    let m = cfg.trials;
    r.push(
        Check::bound("bound.max_excess", res.iter().map(|t| t.excess).fold(f64::NEG_INFINITY, f64::max), 0.0, cfg.tol.bound)
            .with_trials(m),
    );
    r.push(Check::equality("bound.scalar_action_equality", max_of(res.iter().map(|t| t.scalar_dev)), 0.0, cfg.tol.bound).with_trials(m));
    r.push(Check::equality("generator.measurable_failures", res.iter().map(|t| t.generator_failures as f64).sum(), 0.0, 0.0).with_trials(m));
    r.push(Check::equality("linearity", max_of(res.iter().map(|t| t.linearity)), 0.0, cfg.tol.bound).with_trials(m));
    r.push(Check::equality("unitary_transport", max_of(res.iter().map(|t| t.transport)), 0.0, cfg.tol.bound).with_trials(m));
    r.push(Check::equality("measurability.monotone_violations", res.iter().map(|t| t.monotone_violations as f64).sum(), 0.0, 0.0).with_trials(m));

    if let Some(inp) = inputs {
        user_inputs(&mut r, cfg, inp)?;
    }
    Ok(r)
}

fn user_inputs(r: &mut SuiteReport, cfg: &SuiteConfig, inp: HstochInputs<'_>) -> Result<()> {
    let m = inp.martingale;
    let mt = cfg.tol.measurability();
    let total: f64 = (1..=m.grid().cells()).map(|k| m.mu(k)).sum::<f64>() + m.mu_atom()?;
    let v = vnorm(m.vector());
    r.push(Check::equality("input.mass_balance", total, v * v, cfg.tol.bound * (1.0 + v * v)));
    let mut rng = trial_rng(cfg.sub_seed(2), 0);
    let mut processes = vec![("input.scalar_action", random_scalar_action_process(&mut rng, m)?)];
    if let Some(p) = inp.process {
        processes.push(("input.process", p.clone()));
    }
    for (name, p) in processes {
        let mut all = true;
        for k in 1..=m.grid().cells() {
            let rep = check_measurable(p.operator(k), m, k - 1, &mt)?;
            r.push(Check::verdict(format!("{name}.cell{k}.measurable"), rep.measurable));
            all &= rep.measurable;
        }
        let lhs = vnorm(&h_integral(&p, m, false)?).powi(2);
        let rhs = s2_quasinorm(&p, m)?.powi(2);
        r.push(Check::bound(format!("{name}.bound"), lhs, rhs, cfg.tol.bound));
        if all {
            let u = haar_unitary(&mut rng, m.dim())?;
            let (tl, tr) = unitary_transport(&u, &p, m)?;
            r.push(Check::equality(format!("{name}.unitary_transport"), vnorm(&vsub(&tl, &tr)), 0.0, cfg.tol.bound));
        } else {
            r.note(format!("{name}: not measurable on every cell; transport skipped"));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- fock-ito

/// Largest grid and truncation for the dense Wick-operator bridge.
pub const BRIDGE_MAX_CELLS: usize = 6;
pub const BRIDGE_MAX_TRUNCATION: usize = 4;

fn fock_examples(r: &mut SuiteReport, tol: &SuiteTolerances) -> Result<()> {
    let g = Arc::new(TimeGrid::uniform(1.0, 2)?);
    let zeta1 = crate::fock::z_increment(g.clone(), 1, 2)?;
    let f = FockStepProcess::new(g.clone(), vec![FockVector::zero(g.clone(), 2), zeta1.clone()])?;
    let i = ito_wick(&f)?;
    r.push(Check::equality("example.wick_coefficient", i.component(2).get(&Multiset::new([1, 2])).re, 0.5, tol.exact));
    r.push(Check::equality("example.wick_norm", i.norm_sqr(), 0.25, tol.exact));
    let vac = FockStepProcess::constant(g.clone(), FockVector::vacuum(g.clone(), 2))?;
    let z = crate::fock::z_martingale(g.clone(), 2, 2)?;
    r.push(Check::equality("example.vacuum_gives_Z_T", ito_wick(&vac)?.max_abs_diff(&z)?, 0.0, tol.exact));
    let na = FockStepProcess::new(g.clone(), vec![zeta1, FockVector::zero(g.clone(), 2)])?;
    r.push(Check::equality("example.hs_norm_sq", hs_norm(&na)?.powi(2), 0.5, tol.exact));
    r.push(Check::verdict("example.rejects_non_adapted", matches!(ito_wick(&na), Err(Error::NotAdapted { .. }))));
    let b = theorem41_check(&f, 2)?;
    r.push(Check::equality("example.wick_bridge", b.max_abs_diff, 0.0, tol.exact));
    Ok(())
}

struct FockTrial {
    route: f64,
    isometry: f64,
    hs_vs_ito: f64,
    diagonal_outputs: usize,
    non_adapted_accepted: usize,
}

pub fn fock_ito_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    cfg.validate()?;
    let n = cfg.cells;
    let deg = cfg.degree;
    let mut r = SuiteReport::new("fock-ito", cfg.seed, random_desc(n));
    fock_examples(&mut r, &cfg.tol)?;
    let seed = cfg.sub_seed(3);
    let res = trials(cfg.trials, |t| {
        let mut rng = trial_rng(seed, t as u64);
        let grid = Arc::new(random_grid(&mut rng, 1.0, n)?);
        let d = rng.random_range(0..=deg);
        let f = random_adapted_process(&mut rng, &grid, d, deg + 1, false)?;
        let w = ito_wick(&f)?;
        let s = ito_symmetrize(&f)?;
        let (l, rr) = ito_isometry(&f)?;
        let h = hs_integral(&f)?;
        let od = random_adapted_process(&mut rng, &grid, d, deg + 1, true)?;
        let diagonal_outputs = ito_wick(&od)?.components().iter().filter(|c| !c.is_off_diagonal()).count();
        let na = random_step_process(&mut rng, &grid, deg, deg + 1)?;
        let non_adapted_accepted = usize::from(!na.is_adapted() && ito_wick(&na).is_ok());
        Ok(FockTrial {
            route: w.max_abs_diff(&s)?,
            isometry: (l - rr).abs() / rr.max(1.0),
            hs_vs_ito: h.max_abs_diff(&s)?,
            diagonal_outputs,
            non_adapted_accepted,
        })
    })?;
    let m = cfg.trials;
    r.push(Check::equality("route_equivalence", max_of(res.iter().map(|t| t.route)), 0.0, cfg.tol.exact).with_trials(m));
    r.push(Check::equality("isometry.relative", max_of(res.iter().map(|t| t.isometry)), 0.0, cfg.tol.exact).with_trials(m));
    r.push(Check::equality("hs_extends_ito", max_of(res.iter().map(|t| t.hs_vs_ito)), 0.0, cfg.tol.exact).with_trials(m));
    r.push(Check::equality("adapted_outputs_off_diagonal", res.iter().map(|t| t.diagonal_outputs as f64).sum(), 0.0, 0.0).with_trials(m));
    r.push(Check::equality("non_adapted_rejected", res.iter().map(|t| t.non_adapted_accepted as f64).sum(), 0.0, 0.0).with_trials(m));

    // dense Wick-operator bridge on a capped grid
    let nb = n.min(BRIDGE_MAX_CELLS);
    let nt = (deg + 1).min(BRIDGE_MAX_TRUNCATION);
    let mb = cfg.trials.min(100);
    if nb < n || nt < deg + 1 {
        r.note(format!("wick bridge capped at {nb} cells and truncation {nt}"));
    }
    r.note("wick bridge: agreement on the grid is numerical evidence for the operator representation, not a proof");
    let seed = cfg.sub_seed(4);
    let bridge = trials(mb, |t| {
        let mut rng = trial_rng(seed, t as u64);
        let grid = Arc::new(random_grid(&mut rng, 1.0, nb)?);
        let d = rng.random_range(0..nt);
        let f = random_adapted_process(&mut rng, &grid, d, nt, false)?;
        let c = theorem41_check(&f, nt)?;
        Ok((c.max_abs_diff, c.measurability.iter().filter(|x| !x.measurable).count()))
    })?;
    r.push(Check::equality("wick_bridge.agreement", max_of(bridge.iter().map(|b| b.0)), 0.0, cfg.tol.exact).with_trials(mb));
    r.push(Check::equality("wick_bridge.measurable_failures", bridge.iter().map(|b| b.1 as f64).sum(), 0.0, 0.0).with_trials(mb));
    Ok(r)
}

// ---------------------------------------------------------------- bernoulli

/// Largest Bernoulli model the suite realizes as dense `2^n × 2^n` matrices.
pub const BERNOULLI_MAX_CELLS: usize = 6;
/// Walsh-basis sweep size for the measurability equivalence.
pub const WALSH_SWEEP_MAX_CELLS: usize = 3;

/// Outcome of the exhaustive Walsh-basis sweep for `n` cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalshSweep {
    pub cases: usize,
    pub disagreements: usize,
    pub max_norm_defect: f64,
}

/// Every Walsh function `Π_{i∈S} ξ_i` against every boundary `k`.
pub fn walsh_sweep(n: usize, tol: &SuiteTolerances) -> Result<WalshSweep> {
    let space = BernoulliSpace::new(Arc::new(TimeGrid::uniform(1.0, n)?))?;
    let mart = space.hilbert_realization()?;
    let mut out = WalshSweep {
        cases: 0,
        disagreements: 0,
        max_norm_defect: 0.0,
    };
    let mt = tol.measurability();
    for mask in 0..(1usize << n) {
        let cells: Vec<usize> = (1..=n).filter(|i| mask >> (i - 1) & 1 == 1).collect();
        let f = space.walsh(&cells)?;
        for k in 0..=n {
            let v = space.lemma1_check_in(&mart, &f, k)?;
            let op = check_measurable(&space.mult_operator(&f)?, &mart, k, &mt)?.measurable;
            out.cases += 1;
            if v.classical != op {
                out.disagreements += 1;
            }
            if v.classical {
                out.max_norm_defect = out.max_norm_defect.max(v.norm_defect);
            }
        }
    }
    Ok(out)
}

struct BernoulliTrial {
    projection: f64,
    operator_ito: f64,
    isometry: f64,
    chaos_isometry: f64,
    intertwining: f64,
    intertwining_ito: f64,
    not_predictable: usize,
    equivalence_disagreements: usize,
}

pub fn bernoulli_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    cfg.validate()?;
    let n = cfg.cells.min(BERNOULLI_MAX_CELLS);
    let mut r = SuiteReport::new("bernoulli", cfg.seed, random_desc(n));
    if n < cfg.cells {
        r.note(format!("Bernoulli model capped at {n} cells (2^{n} sample points)"));
    }
    let tol = cfg.tol;

    // exact normal-martingale identities on a uniform grid
    let space = BernoulliSpace::new(Arc::new(TimeGrid::uniform(1.0, n)?))?;
    let mut mean_dev: f64 = 0.0;
    let mut var_dev: f64 = 0.0;
    for k in 1..=n {
        let dn = space.increment(k)?;
        let m1 = space.cond_expect(&dn, k - 1)?;
        let m2 = space.cond_expect(&dn.mul(&dn)?, k - 1)?;
        let l = space.grid().cell_length(k);
        mean_dev = mean_dev.max(max_of(m1.values().iter().map(|v| v.norm())));
        var_dev = var_dev.max(max_of(m2.values().iter().map(|v| (v - l).norm())));
    }
    r.push(Check::equality("normal_martingale.conditional_mean", mean_dev, 0.0, tol.exact));
    r.push(Check::equality("normal_martingale.conditional_variance", var_dev, 0.0, tol.exact));

    // worked example: ∫ ΔN_1 dN over cell 2 = ξ_1 ξ_2 / 2 on uniform(1,2)
    let s2 = BernoulliSpace::new(Arc::new(TimeGrid::uniform(1.0, 2)?))?;
    let zero = RandomVariable::constant(&s2, cplx(0.0));
    let (h, i) = s2.theorem3_check(&[zero, s2.increment(1)?])?;
    let want = s2.walsh(&[1, 2])?.scale(cplx(0.5));
    r.push(Check::equality("example.operator_integral", h.max_abs_diff(&want)?, 0.0, tol.exact));
    r.push(Check::equality("example.discrete_ito", i.max_abs_diff(&want)?, 0.0, tol.exact));

    // exhaustive Walsh sweep
    let mut disagreements = 0;
    let mut cases = 0;
    let mut defect: f64 = 0.0;
    for m in 1..=n.min(WALSH_SWEEP_MAX_CELLS) {
        let s = walsh_sweep(m, &tol)?;
        disagreements += s.disagreements;
        cases += s.cases;
        defect = defect.max(s.max_norm_defect);
    }
    r.push(Check::equality("measurability_equivalence.exhaustive.disagreements", disagreements as f64, 0.0, 0.0).with_trials(cases));
    r.push(Check::equality("measurability_equivalence.exhaustive.norm_identity", defect, 0.0, tol.bound).with_trials(cases));

    let seed = cfg.sub_seed(5);
    let mt = tol.measurability();
    let res = trials(cfg.trials, |t| {
        let mut rng = trial_rng(seed, t as u64);
        let grid = Arc::new(random_grid(&mut rng, 1.0, n)?);
        let space = BernoulliSpace::new(grid.clone())?;
        let mart = space.hilbert_realization()?;

        let x = random_variable(&mut rng, &space);
        let y = random_variable(&mut rng, &space);
        let mut projection: f64 = 0.0;
        for k in 0..=n {
            let ex = space.cond_expect(&x, k)?;
            projection = projection.max(space.cond_expect(&ex, k)?.max_abs_diff(&ex)?);
            let a = space.inner(&ex, &y)?;
            let b = space.inner(&x, &space.cond_expect(&y, k)?)?;
            projection = projection.max((a - b).norm());
        }

        let f = random_predictable(&mut rng, &space)?;
        let (h, i) = space.theorem3_check_in(&mart, &f)?;
        let lhs = space.norm(&i)?.powi(2);
        let rhs: f64 = f.iter().enumerate().map(|(k, x)| space.norm(x).map(|v| v * v * grid.cell_length(k + 1))).sum::<Result<f64>>()?;

        // random F at a random boundary, half of them made A_k-measurable
        let k = rng.random_range(0..=n);
        let mut rf = random_variable(&mut rng, &space);
        if rng.random_bool(0.5) {
            rf = space.cond_expect(&rf, k)?;
        }
        let v = space.lemma1_check_in(&mart, &rf, k)?;
        let op = check_measurable(&space.mult_operator(&rf)?, &mart, k, &mt)?.measurable;

        let fv = random_fock_vector(&mut rng, &grid, n, n, n, true)?;
        let gv = random_fock_vector(&mut rng, &grid, n, n, n, true)?;
        let (cf, cg) = (space.chaos_map(&fv)?, space.chaos_map(&gv)?);
        let chaos_isometry = (space.inner(&cf, &cg)? - fv.inner(&gv)?).norm();
        let mut intertwining: f64 = 0.0;
        for k in 0..=n {
            let left = space.chaos_map(&fv.resolution_project(k)?)?;
            intertwining = intertwining.max(left.max_abs_diff(&space.cond_expect(&cf, k)?)?);
        }

        let d = rng.random_range(0..=cfg.degree.min(2).min(n - 1));
        let fp = random_adapted_process(&mut rng, &grid, d, d + 1, true)?;
        let t5 = space.theorem5_check(&fp)?;
        Ok(BernoulliTrial {
            projection,
            operator_ito: h.max_abs_diff(&i)?,
            isometry: (lhs - rhs).abs() / rhs.max(1.0),
            chaos_isometry,
            intertwining,
            intertwining_ito: t5.left.max_abs_diff(&t5.right)?,
            not_predictable: usize::from(!t5.predictable),
            equivalence_disagreements: usize::from(v.classical != op || v.classical != v.operator),
        })
    })?;
    let m = cfg.trials;
    r.push(Check::equality("cond_expect.projection", max_of(res.iter().map(|t| t.projection)), 0.0, tol.exact).with_trials(m));
    r.push(Check::equality("measurability_equivalence.random.disagreements", res.iter().map(|t| t.equivalence_disagreements as f64).sum(), 0.0, 0.0).with_trials(m));
    r.push(Check::equality("operator_vs_classical_ito.pointwise", max_of(res.iter().map(|t| t.operator_ito)), 0.0, tol.exact).with_trials(m));
    r.push(Check::equality("discrete_ito.isometry", max_of(res.iter().map(|t| t.isometry)), 0.0, tol.exact).with_trials(m));
    r.push(Check::equality("chaos_map.isometry", max_of(res.iter().map(|t| t.chaos_isometry)), 0.0, tol.exact).with_trials(m));
    r.push(Check::equality("chaos_map.intertwining", max_of(res.iter().map(|t| t.intertwining)), 0.0, tol.exact).with_trials(m));
    r.push(Check::equality("chaos_intertwines_ito.pointwise", max_of(res.iter().map(|t| t.intertwining_ito)), 0.0, tol.exact).with_trials(m));
    r.push(Check::equality("chaos_intertwines_ito.predictable_failures", res.iter().map(|t| t.not_predictable as f64).sum(), 0.0, 0.0).with_trials(m));
    Ok(r)
}

/// `hstoch`, `fock-ito` and `bernoulli` in one report.
pub fn all_suites(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut r = SuiteReport::new("all", cfg.seed, random_desc(cfg.cells));
    r.absorb(hstoch_suite(cfg, None)?);
    r.absorb(fock_ito_suite(cfg)?);
    r.absorb(bernoulli_suite(cfg)?);
    Ok(r)
}

// ---------------------------------------------------------------- mc

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum McModel {
    Brownian,
    Poisson,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    pub paths: usize,
    pub cells: usize,
    pub seed: u64,
    pub model: McModel,
    pub lambda: f64,
    /// Number of standard errors allowed.
    pub sigmas: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            paths: 100_000,
            cells: 64,
            seed: 0,
            model: McModel::Brownian,
            lambda: 1.0,
            sigmas: 4.0,
        }
    }
}

/// Degree-3 checks run on at most this many cells.
pub const MC_DEGREE3_MAX_CELLS: usize = 16;
/// Absolute slack added to statistical checks whose difference vanishes identically.
const MC_FLOOR: f64 = 1e-12;

fn ensemble(cfg: &McConfig, cells: usize, salt: u64) -> Result<PathEnsemble<f64>> {
    let grid = Arc::new(TimeGrid::uniform(1.0, cells)?);
    let seed = derive_seed(cfg.seed, salt);
    match cfg.model {
        McModel::Brownian => brownian_mc(grid, cfg.paths, seed),
        McModel::Poisson => poisson_mc(grid, cfg.paths, seed, cfg.lambda),
    }
}

fn random_real_g(grid: &Arc<TimeGrid<f64>>, seed: u64) -> Result<SymCoeffs<f64>> {
    let mut rng = trial_rng(seed, 0);
    SymCoeffs::from_entries(
        grid.clone(),
        1,
        (1..=grid.cells() as u32).map(|c| (Multiset::singleton(c), cplx(gaussian::<f64>(&mut rng)))),
    )
}

fn random_off_diagonal(grid: &Arc<TimeGrid<f64>>, degree: usize, seed: u64) -> Result<SymCoeffs<f64>> {
    let mut rng = trial_rng(seed, 0);
    let v = random_fock_vector(&mut rng, grid, grid.cells(), degree, degree, true)?;
    Ok(v.component(degree))
}

/// `d! Σ_{α not strict} w(α) |v_α|²`: the part of the Fock norm that the
/// discrete iterated sum cannot see.
fn diagonal_mass(f: &SymCoeffs<f64>) -> f64 {
    let diag = f.filter(|ms| !ms.is_strict());
    factorial::<f64>(f.degree()) * diag.norm_sqr()
}

fn second_moment_check(name: &str, f: &SymCoeffs<f64>, ens: &PathEnsemble<f64>, sigmas: f64) -> Result<Check> {
    let sq: Vec<f64> = mc_iterated(f, ens)?.iter().map(|z| z.norm_sqr()).collect();
    let est = MeanEstimate::from_samples(&sq)?;
    let target = factorial::<f64>(f.degree()) * f.norm_sqr();
    let allowance = diagonal_mass(f);
    Ok(Check::equality(name, est.mean, target, sigmas * est.std_err + allowance + MC_FLOOR)
        .with_std_err(est.std_err)
        .with_trials(ens.paths()))
}

fn mean_zero_check(name: &str, f: &SymCoeffs<f64>, ens: &PathEnsemble<f64>, sigmas: f64) -> Result<Check> {
    let xs: Vec<f64> = mc_iterated(f, ens)?.iter().map(|z| z.re).collect();
    let est = MeanEstimate::from_samples(&xs)?;
    Ok(Check::equality(name, est.mean, 0.0, sigmas * est.std_err + MC_FLOOR)
        .with_std_err(est.std_err)
        .with_trials(ens.paths()))
}

fn hermite_check(name: &str, g: &SymCoeffs<f64>, d: usize, ens: &PathEnsemble<f64>, sigmas: f64) -> Result<Check> {
    let mc = mc_iterated(&tensor_power(g, d)?, ens)?;
    let or = hermite_oracle(g, d, ens)?;
    let diff: Vec<f64> = mc.iter().zip(&or).map(|(a, b)| a.re - b).collect();
    let est = MeanEstimate::from_samples(&diff)?;
    Ok(Check::equality(name, est.mean, 0.0, sigmas * est.std_err + MC_FLOOR)
        .with_std_err(est.std_err)
        .with_trials(ens.paths()))
}

/// Monte Carlo checks. Returns the report and the main path ensemble.
pub fn mc_suite(cfg: &McConfig) -> Result<(SuiteReport, PathEnsemble<f64>)> {
    if cfg.paths == 0 || cfg.cells == 0 {
        return Err(Error::InvalidArgument("paths and cells must be at least 1".into()));
    }
    let model = match cfg.model {
        McModel::Brownian => "brownian",
        McModel::Poisson => "poisson",
    };
    let ens = ensemble(cfg, cfg.cells, 0)?;
    let grid = ens.grid().clone();
    let mut r = SuiteReport::new(format!("mc-{model}"), cfg.seed, grid.describe());
    let small_cells = cfg.cells.min(MC_DEGREE3_MAX_CELLS);
    let small = ensemble(cfg, small_cells, 1)?;
    if small_cells < cfg.cells {
        r.note(format!("degree-3 checks use a separate {small_cells}-cell ensemble"));
    }
    if cfg.model == McModel::Poisson {
        r.note(format!("compensated Poisson, intensity {}", cfg.lambda));
    }
    let s = cfg.sigmas;
    let one = SymCoeffs::constant(grid.clone(), 1, cplx(1.0));
    let g = random_real_g(&grid, derive_seed(cfg.seed, 10))?;
    let f2 = random_off_diagonal(&grid, 2, derive_seed(cfg.seed, 11))?;
    let one_small = SymCoeffs::constant(small.grid().clone(), 1, cplx(1.0));
    let g_small = random_real_g(small.grid(), derive_seed(cfg.seed, 12))?;
    let f3 = random_off_diagonal(small.grid(), 3, derive_seed(cfg.seed, 13))?;

    if cfg.model == McModel::Brownian {
        r.push(hermite_check("hermite.d1.indicator", &one, 1, &ens, s)?);
        r.push(hermite_check("hermite.d1.random", &g, 1, &ens, s)?);
        r.push(hermite_check("hermite.d2.indicator", &one, 2, &ens, s)?);
        r.push(hermite_check("hermite.d2.random", &g, 2, &ens, s)?);
        r.push(hermite_check("hermite.d3.indicator", &one_small, 3, &small, s)?);
        r.push(hermite_check("hermite.d3.random", &g_small, 3, &small, s)?);
    }
    r.push(second_moment_check("isometry.d1.random", &g, &ens, s)?);
    r.push(second_moment_check("isometry.d2.indicator_power", &tensor_power(&one, 2)?, &ens, s)?);
    r.push(second_moment_check("isometry.d2.off_diagonal", &f2, &ens, s)?);
    r.push(second_moment_check("isometry.d3.off_diagonal", &f3, &small, s)?);
    r.push(mean_zero_check("mean.d2.off_diagonal", &f2, &ens, s)?);
    r.push(mean_zero_check("mean.d3.off_diagonal", &f3, &small, s)?);
    Ok((r, ens))
}

// ---------------------------------------------------------------- refine

#[derive(Debug, Clone, PartialEq)]
pub struct RefineConfig {
    pub cells: usize,
    pub levels: usize,
    pub seed: u64,
}

impl Default for RefineConfig {
    fn default() -> Self {
        Self {
            cells: 2,
            levels: 6,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefineRow {
    pub cells: usize,
    /// `‖I_h‖²` for the integrand `f(t) = Z_{t_{k-1}}` on cell `k`.
    pub norm_sq: f64,
    /// `T²/2 - ‖I_h‖²`.
    pub defect: f64,
    /// `‖I_h - I_{h/2}‖²`, absent on the finest level.
    pub diff_sq: Option<f64>,
    pub diff_norm: Option<f64>,
}

/// `I_h = ∫ Z_{t_{k-1}} dZ` on the uniform grid with `cells` cells of `[0, 1]`.
fn refine_integral(cells: usize) -> Result<(Arc<TimeGrid<f64>>, FockVector<f64>)> {
    let grid = Arc::new(TimeGrid::uniform(1.0, cells)?);
    let values = (1..=cells)
        .map(|k| crate::fock::z_martingale(grid.clone(), k - 1, 2))
        .collect::<Result<_>>()?;
    let f = FockStepProcess::new(grid.clone(), values)?;
    Ok((grid, ito_wick(&f)?))
}

/// The convergence table for successive halvings of the step size.
pub fn refine_table(cfg: &RefineConfig) -> Result<Vec<RefineRow>> {
    if cfg.cells == 0 || cfg.levels < 2 {
        return Err(Error::InvalidArgument("refine needs cells ≥ 1 and levels ≥ 2".into()));
    }
    let ints = (0..cfg.levels)
        .map(|i| refine_integral(cfg.cells << i))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(cfg.levels);
    for (i, (grid, v)) in ints.iter().enumerate() {
        let norm_sq = v.norm_sqr();
        let diff_sq = match ints.get(i + 1) {
            Some((fine, w)) => Some(v.prolong(fine.clone(), 2)?.sub(w)?.norm_sqr()),
            None => None,
        };
        rows.push(RefineRow {
            cells: grid.cells(),
            norm_sq,
            defect: 0.5 - norm_sq,
            diff_sq,
            diff_norm: diff_sq.map(f64::sqrt),
        });
    }
    Ok(rows)
}

pub fn refine_suite(cfg: &RefineConfig) -> Result<SuiteReport> {
    let rows = refine_table(cfg)?;
    let finest = rows.last().expect("levels ≥ 2").cells;
    let mut r = SuiteReport::new("refine", cfg.seed, format!("uniform(T=1, n={}..{finest})", cfg.cells));
    r.note("integrand f(t) = Z_{t_{k-1}} on cell k; limit ‖∫Z dZ‖² = T²/2 = 0.5");
    for row in &rows {
        // closed form: left Riemann sum Σ t_{k-1} ℓ_k = (1 - 1/n)/2
        let n = row.cells as f64;
        r.push(Check::equality(format!("n{}.riemann_sum", row.cells), row.norm_sq, 0.5 * (1.0 - 1.0 / n), 1e-12));
        r.push(Check::verdict(format!("n{}.defect_positive", row.cells), row.defect > 0.0));
    }
    for w in rows.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        r.push(Check::bound(format!("n{}.defect_decreases", b.cells), b.defect, a.defect, 0.0));
        r.push(Check::bound(format!("n{}.defect_rate", b.cells), ((a.defect / b.defect).log2() - 1.0).abs(), 1.0, 0.0));
    }
    let diffs: Vec<(usize, f64)> = rows.iter().filter_map(|r| r.diff_sq.map(|d| (r.cells, d))).collect();
    for w in diffs.windows(2) {
        let ((_, a), (cells, b)) = (w[0], w[1]);
        r.push(Check::bound(format!("n{cells}.increment_decreases"), b, a, 0.0));
        r.push(Check::bound(format!("n{cells}.increment_rate"), ((a / b).log2() - 1.0).abs(), 1.0, 0.0));
    }
    r.data = Some(serde_json::to_value(&rows)?);
    Ok(r)
}
