//! The minimum-error state discrimination problem: state preparations,
//! measurements, the success probability functional, and solvers.
//!
//! Polyhedral models (classical, polytope) are solved exactly by a linear
//! program over effect-cone coefficients; an independent brute-force vertex
//! enumerator certifies the LP in tests. Quantum instances are solved by a
//! fixed-point iteration with an a-posteriori weak-duality certificate.

use crate::kernel::{ExtendedProcess, System};
use crate::linalg::{self, HermitianMatrix, RealMatrix};
use crate::models::{self, ModelDescriptor};
use crate::simplex;
use crate::symmetry::{self, SymmetrySetup};
use thiserror::Error;

/// Eigenvalue cutoff for pseudo-inverse square roots of singular Gram maps.
const PINV_CUTOFF: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum DiscriminationError {
    #[error("system mismatch: {0}")]
    SystemMismatch(String),
    #[error("state {index} is not in the state cone")]
    StateOutsideCone { index: usize },
    #[error("effect {index} is not in the effect cone")]
    EffectOutsideCone { index: usize },
    #[error("preparation not normalized: Σξ = {0}")]
    NotNormalized(f64),
    #[error("effects do not sum to the discarding effect (residual {0:.3e})")]
    NotAMeasurement(f64),
    #[error("model not supported by this solver: {0}")]
    UnsupportedModel(String),
    #[error("enumeration budget exceeded: {0} basic sets")]
    TooLarge(usize),
    #[error("fixed-point iteration did not reach tolerance (gap {gap:.3e})")]
    NoConvergence { report: Box<SolveReport>, gap: f64 },
    #[error("preparation is not covariant under the supplied symmetry setup")]
    NotCovariant,
    #[error(transparent)]
    Model(#[from] models::ModelError),
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
}

/// M subnormalized states ρ_m = ξ_m·ρ_m^N packed as a process C→A.
#[derive(Debug, Clone)]
pub struct StatePreparation {
    system: System,
    states: Vec<Vec<f64>>,
}

impl StatePreparation {
    pub fn new(system: System, states: Vec<Vec<f64>>) -> Result<Self, DiscriminationError> {
        let u = models::system_unit_effect(&system);
        let mut total = 0.0;
        for (i, s) in states.iter().enumerate() {
            if !models::contains_state(&system, s)? {
                return Err(DiscriminationError::StateOutsideCone { index: i });
            }
            total += dot(&u, s);
        }
        if (total - 1.0).abs() > 1e-10 {
            return Err(DiscriminationError::NotNormalized(total));
        }
        Ok(Self { system, states })
    }

    pub fn system(&self) -> &System {
        &self.system
    }

    pub fn outcomes(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    /// Prior probabilities ξ_m = ⟨⟡|ρ_m⟩.
    pub fn priors(&self) -> Vec<f64> {
        let u = models::system_unit_effect(&self.system);
        self.states.iter().map(|s| dot(&u, s)).collect()
    }

    /// The preparation as a process C→A whose columns are the ρ_m.
    pub fn as_process(&self) -> ExtendedProcess {
        let d = self.system.dim();
        let m = self.states.len();
        let mut mat = RealMatrix::zeros(d, m);
        for (j, s) in self.states.iter().enumerate() {
            for i in 0..d {
                mat.set(i, j, s[i]);
            }
        }
        ExtendedProcess::new(System::classical(format!("C{}", m), m), self.system.clone(), mat)
            .expect("shape by construction")
    }
}

/// M effects summing to the discarding effect, packed as a process A→C.
#[derive(Debug, Clone)]
pub struct Measurement {
    system: System,
    effects: Vec<Vec<f64>>,
}

impl Measurement {
    pub fn new(system: System, effects: Vec<Vec<f64>>) -> Result<Self, DiscriminationError> {
        for (i, e) in effects.iter().enumerate() {
            let check = models::contains_effect(&system, e)?;
            if !check.in_cone {
                return Err(DiscriminationError::EffectOutsideCone { index: i });
            }
        }
        let u = models::system_unit_effect(&system);
        let mut sum = vec![0.0; u.len()];
        for e in &effects {
            for (s, x) in sum.iter_mut().zip(e) {
                *s += x;
            }
        }
        let resid = sum
            .iter()
            .zip(&u)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if resid > 1e-10 {
            return Err(DiscriminationError::NotAMeasurement(resid));
        }
        Ok(Self { system, effects })
    }

    /// Skips cone validation; used for intermediate iterates.
    pub fn new_unchecked(system: System, effects: Vec<Vec<f64>>) -> Self {
        Self { system, effects }
    }

    /// The uniform split {u/M, ..., u/M}.
    pub fn uniform(system: &System, outcomes: usize) -> Self {
        let u = models::system_unit_effect(system);
        let e: Vec<f64> = u.iter().map(|x| x / outcomes as f64).collect();
        Self { system: system.clone(), effects: vec![e; outcomes] }
    }

    /// Guess outcome `m`: e_m = u, all other effects zero.
    pub fn guess(system: &System, outcomes: usize, m: usize) -> Self {
        let u = models::system_unit_effect(system);
        let mut effects = vec![vec![0.0; u.len()]; outcomes];
        effects[m] = u;
        Self { system: system.clone(), effects }
    }

    pub fn system(&self) -> &System {
        &self.system
    }

    pub fn outcomes(&self) -> usize {
        self.effects.len()
    }

    pub fn effects(&self) -> &[Vec<f64>] {
        &self.effects
    }

    /// The measurement as a deterministic process A→C whose rows are e_m.
    pub fn as_process(&self) -> ExtendedProcess {
        let rows: Vec<Vec<f64>> = self.effects.clone();
        ExtendedProcess::new(
            self.system.clone(),
            System::classical(format!("C{}", rows.len()), rows.len()),
            RealMatrix::from_rows(&rows),
        )
        .expect("shape by construction")
    }

    pub fn is_valid(&self) -> bool {
        Measurement::new(self.system.clone(), self.effects.clone()).is_ok()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// P_S(e) = Σ_m ⟨e_m|ρ_m⟩.
pub fn success_probability(
    e: &Measurement,
    rho: &StatePreparation,
) -> Result<f64, DiscriminationError> {
    if e.system != rho.system || e.outcomes() != rho.outcomes() {
        return Err(DiscriminationError::SystemMismatch(
            "measurement and preparation must share system and outcome count".into(),
        ));
    }
    Ok(e.effects
        .iter()
        .zip(&rho.states)
        .map(|(em, rm)| dot(em, rm))
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Lp,
    FixedPoint,
    BruteForce,
    Covariant,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Method::Lp => "lp",
            Method::FixedPoint => "fixedpoint",
            Method::BruteForce => "bruteforce",
            Method::Covariant => "covariant",
        };
        write!(f, "{}", s)
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub measurement: Measurement,
    pub value: f64,
    pub method: Method,
    pub iterations: usize,
    pub dual_bound: Option<f64>,
    pub gap: Option<f64>,
    pub covariant: bool,
}

/// Effect-cone ray generators of a polyhedral system (kron over factors).
/// Returns None when any factor is quantum.
fn effect_rays(system: &System) -> Option<Vec<Vec<f64>>> {
    let mut rays: Vec<Vec<f64>> = vec![vec![1.0]];
    for f in system.factors() {
        let frays: Vec<Vec<f64>> = match f {
            ModelDescriptor::Classical { outcomes } => (0..*outcomes)
                .map(|i| {
                    let mut v = vec![0.0; *outcomes];
                    v[i] = 1.0;
                    v
                })
                .collect(),
            ModelDescriptor::Polytope(p) => p.effect_generators.clone(),
            ModelDescriptor::Quantum { .. } => return None,
        };
        let mut next = Vec::with_capacity(rays.len() * frays.len());
        for r in &rays {
            for g in &frays {
                let mut v = Vec::with_capacity(r.len() * g.len());
                for a in r {
                    for b in g {
                        v.push(a * b);
                    }
                }
                next.push(v);
            }
        }
        rays = next;
    }
    Some(rays)
}

/// Builds the standard-form LP over coefficients λ_{m,j} ≥ 0 with
/// e_m = Σ_j λ_{m,j}·w_j and Σ_m e_m = u.
fn lp_data(rho: &StatePreparation, rays: &[Vec<f64>]) -> (RealMatrix, Vec<f64>, Vec<f64>) {
    let d = rho.system.dim();
    let m = rho.outcomes();
    let j = rays.len();
    let mut a = RealMatrix::zeros(d, m * j);
    let mut c = vec![0.0; m * j];
    for mi in 0..m {
        for (ji, w) in rays.iter().enumerate() {
            let col = mi * j + ji;
            for row in 0..d {
                a.set(row, col, w[row]);
            }
            c[col] = dot(w, &rho.states[mi]);
        }
    }
    let b = models::system_unit_effect(&rho.system);
    (a, b, c)
}

fn effects_from_coeffs(rays: &[Vec<f64>], m: usize, x: &[f64]) -> Vec<Vec<f64>> {
    let d = rays[0].len();
    let j = rays.len();
    (0..m)
        .map(|mi| {
            let mut e = vec![0.0; d];
            for (ji, w) in rays.iter().enumerate() {
                let lam = x[mi * j + ji];
                if lam != 0.0 {
                    for k in 0..d {
                        e[k] += lam * w[k];
                    }
                }
            }
            e
        })
        .collect()
}

/// Exact LP solution of the discrimination problem for polyhedral models.
pub fn solve_lp(rho: &StatePreparation) -> Result<SolveReport, DiscriminationError> {
    let rays = effect_rays(&rho.system).ok_or_else(|| {
        DiscriminationError::UnsupportedModel("solve_lp requires a polyhedral model".into())
    })?;
    let (a, b, c) = lp_data(rho, &rays);
    let sol = simplex::solve_standard(&a, &b, &c)
        .expect("measurement polytope is nonempty and bounded");
    let effects = effects_from_coeffs(&rays, rho.outcomes(), &sol.x);
    let measurement = Measurement::new_unchecked(rho.system.clone(), effects);
    let value = success_probability(&measurement, rho)?;
    Ok(SolveReport {
        measurement,
        value,
        method: Method::Lp,
        iterations: 0,
        dual_bound: None,
        gap: None,
        covariant: false,
    })
}

/// Independent oracle: enumerates the vertices of the measurement polytope by
/// basic feasible solutions and returns the exact optimum.
pub fn brute_force_oracle(rho: &StatePreparation) -> Result<SolveReport, DiscriminationError> {
    let rays = effect_rays(&rho.system).ok_or_else(|| {
        DiscriminationError::UnsupportedModel("brute force requires a polyhedral model".into())
    })?;
    let (a, b, c) = lp_data(rho, &rays);
    let n = a.cols();
    let d = a.rows();
    let combos = combinations(n, d);
    if combos.len() > 2_000_000 {
        return Err(DiscriminationError::TooLarge(combos.len()));
    }
    let results = crate::parallel::map_collect(combos, |cols| {
        let mut sub = RealMatrix::zeros(d, d);
        for (j, &col) in cols.iter().enumerate() {
            for i in 0..d {
                sub.set(i, j, a.get(i, col));
            }
        }
        let x = linalg::solve_linear(&sub, &b)?;
        if x.iter().any(|&v| v < -1e-9) {
            return None;
        }
        let mut full = vec![0.0; n];
        for (j, &col) in cols.iter().enumerate() {
            full[col] = x[j].max(0.0);
        }
        let obj = dot(&c, &full);
        Some((obj, full))
    });
    let best = results
        .into_iter()
        .flatten()
        .max_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
        .expect("identity-split measurement is always feasible");
    let effects = effects_from_coeffs(&rays, rho.outcomes(), &best.1);
    let measurement = Measurement::new_unchecked(rho.system.clone(), effects);
    let value = success_probability(&measurement, rho)?;
    Ok(SolveReport {
        measurement,
        value,
        method: Method::BruteForce,
        iterations: 0,
        dual_bound: None,
        gap: None,
        covariant: false,
    })
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        // advance
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        cur[i] += 1;
        for j in (i + 1)..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Devectorized view of a quantum preparation.
pub(crate) struct QuantumInstance {
    pub basis: Vec<HermitianMatrix>,
    pub states: Vec<HermitianMatrix>,
    pub levels: usize,
}

pub(crate) fn quantum_instance(
    rho: &StatePreparation,
) -> Result<QuantumInstance, DiscriminationError> {
    let basis = models::system_hermitian_basis(&rho.system).ok_or_else(|| {
        DiscriminationError::UnsupportedModel("solver requires an all-quantum system".into())
    })?;
    let levels = models::quantum_levels(&rho.system).unwrap();
    let states = rho
        .states
        .iter()
        .map(|v| models::devectorize(&basis, v))
        .collect();
    Ok(QuantumInstance { basis, states, levels })
}

/// Weak-duality certificate: Y = herm(Σ_m e_m·ρ_m); feasible iff Y ⪰ ρ_m − 1e-8
/// for all m, in which case Tr Y upper-bounds every achievable P_S.
pub fn dual_certificate(
    e: &Measurement,
    rho: &StatePreparation,
) -> Result<(f64, bool), DiscriminationError> {
    let qi = quantum_instance(rho)?;
    let effects: Vec<HermitianMatrix> = e
        .effects
        .iter()
        .map(|v| models::devectorize(&qi.basis, v))
        .collect();
    let n = qi.levels;
    let mut y_raw = vec![num_complex::Complex64::new(0.0, 0.0); n * n];
    for (em, rm) in effects.iter().zip(&qi.states) {
        let prod = em.matmul_raw(rm);
        for (acc, x) in y_raw.iter_mut().zip(&prod) {
            *acc += x;
        }
    }
    let y = HermitianMatrix::hermitian_part(n, &y_raw);
    let mut feasible = true;
    for rm in &qi.states {
        if y.sub(rm).min_eigenvalue() < -1e-8 {
            feasible = false;
            break;
        }
    }
    if feasible {
        Ok((y.trace(), true))
    } else {
        Ok((f64::INFINITY, false))
    }
}

/// Fixed-point iteration for quantum minimum-error discrimination:
/// e_m ← Λ^{-1/2}·ρ_m·e_m·ρ_m·Λ^{-1/2} with Λ = Σ_k ρ_k·e_k·ρ_k, plus a
/// weak-duality stopping certificate.
pub fn solve_quantum(
    rho: &StatePreparation,
    tol: f64,
    max_iter: usize,
) -> Result<SolveReport, DiscriminationError> {
    assert!(tol > 0.0);
    let qi = quantum_instance(rho)?;
    let n = qi.levels;
    let m_out = rho.outcomes();

    if m_out == 1 {
        let measurement = Measurement::guess(&rho.system, 1, 0);
        let value = success_probability(&measurement, rho)?;
        return Ok(SolveReport {
            measurement,
            value,
            method: Method::FixedPoint,
            iterations: 0,
            dual_bound: Some(value),
            gap: Some(0.0),
            covariant: false,
        });
    }

    // Deterministic initialization: uniform identity split nudged toward each
    // state (the uniform point can be a repelling fixed point).
    let sigma = qi
        .states
        .iter()
        .fold(HermitianMatrix::zeros(n), |acc, s| acc.add(s));
    let mut effects: Vec<HermitianMatrix> = qi
        .states
        .iter()
        .map(|s| {
            HermitianMatrix::identity(n)
                .scale(1.0 / m_out as f64)
                .add(&s.sub(&sigma.scale(1.0 / m_out as f64)).scale(1e-3))
        })
        .collect();

    let pack = |effects: &[HermitianMatrix]| -> Measurement {
        Measurement::new_unchecked(
            rho.system.clone(),
            effects
                .iter()
                .map(|e| models::vectorize(&qi.basis, e))
                .collect(),
        )
    };

    let mut best: Option<(f64, SolveReport)> = None;
    for it in 0..max_iter {
        let lambda = qi
            .states
            .iter()
            .zip(&effects)
            .fold(HermitianMatrix::zeros(n), |acc, (s, e)| {
                acc.add(&s.sandwich(e))
            });
        let x = linalg::pinv_sqrt(&lambda, PINV_CUTOFF)?;
        let support = linalg::matrix_function(&lambda, |l| if l > PINV_CUTOFF { 1.0 } else { 0.0 })?;
        let complement = HermitianMatrix::identity(n).sub(&support);
        effects = qi
            .states
            .iter()
            .zip(&effects)
            .map(|(s, e)| {
                x.sandwich(&s.sandwich(e))
                    .add(&complement.scale(1.0 / m_out as f64))
            })
            .collect();

        let measurement = pack(&effects);
        let value = success_probability(&measurement, rho)?;
        let (bound, feasible) = dual_certificate(&measurement, rho)?;
        let gap = if feasible { bound - value } else { f64::INFINITY };
        let report = SolveReport {
            measurement,
            value,
            method: Method::FixedPoint,
            iterations: it + 1,
            dual_bound: feasible.then_some(bound),
            gap: feasible.then_some(gap),
            covariant: false,
        };
        if best.as_ref().map_or(true, |(g, _)| gap < *g) {
            best = Some((gap, report.clone()));
        }
        if feasible && gap < tol {
            return Ok(report);
        }
    }
    let (gap, report) = best.expect("at least one iteration ran");
    Err(DiscriminationError::NoConvergence { report: Box::new(report), gap })
}

/// Optimizes over a single seed effect transported by the group actions; the
/// optimum equals the unrestricted optimum by the covariant-optimum corollary.
///
/// Falls back to the full solver followed by symmetrization when the outcome
/// action is not transitive (the report is then flagged accordingly).
pub fn solve_covariant(
    rho: &StatePreparation,
    setup: &SymmetrySetup,
) -> Result<SolveReport, DiscriminationError> {
    if !symmetry::is_covariant_preparation(rho, setup)
        .map_err(|e| DiscriminationError::SystemMismatch(e.to_string()))?
    {
        return Err(DiscriminationError::NotCovariant);
    }
    let m_out = rho.outcomes();
    let transport = setup.transport_elements();
    let Some(transport) = transport else {
        // Non-transitive outcome action: solve in full, then symmetrize.
        let base = if effect_rays(&rho.system).is_some() {
            solve_lp(rho)?
        } else {
            solve_quantum(rho, 1e-9, 20_000)?
        };
        let sym = symmetry::symmetrize(&base.measurement, setup)
            .map_err(|e| DiscriminationError::SystemMismatch(e.to_string()))?;
        let value = success_probability(&sym, rho)?;
        return Ok(SolveReport {
            measurement: sym,
            value,
            method: Method::Covariant,
            iterations: base.iterations,
            dual_bound: base.dual_bound,
            gap: base.gap,
            covariant: true,
        });
    };

    if let Some(rays) = effect_rays(&rho.system) {
        // Reduced LP over the seed-effect coefficients.
        let d = rho.system.dim();
        let j = rays.len();
        // transported ray images: w_j · P_{g_k}
        let mut a = RealMatrix::zeros(d, j);
        let mut c = vec![0.0; j];
        for (ji, w) in rays.iter().enumerate() {
            for (k, &g) in transport.iter().enumerate() {
                let p = setup.state_matrix(g);
                let wk = RealMatrix::row(w).matmul(p);
                for row in 0..d {
                    a.set(row, ji, a.get(row, ji) + wk.get(0, row));
                }
                c[ji] += dot(wk.row_slice(0), &rho.states[k]);
            }
        }
        let b = models::system_unit_effect(&rho.system);
        let sol = simplex::solve_standard(&a, &b, &c)
            .expect("covariant measurement polytope is nonempty");
        let mut seed = vec![0.0; d];
        for (ji, w) in rays.iter().enumerate() {
            for k in 0..d {
                seed[k] += sol.x[ji] * w[k];
            }
        }
        let effects: Vec<Vec<f64>> = transport
            .iter()
            .map(|&g| {
                let p = setup.state_matrix(g);
                RealMatrix::row(&seed).matmul(p).row_slice(0).to_vec()
            })
            .collect();
        let raw = Measurement::new_unchecked(rho.system.clone(), effects);
        let measurement = symmetry::symmetrize(&raw, setup)
            .map_err(|e| DiscriminationError::SystemMismatch(e.to_string()))?;
        let value = success_probability(&measurement, rho)?;
        return Ok(SolveReport {
            measurement,
            value,
            method: Method::Covariant,
            iterations: 0,
            dual_bound: None,
            gap: None,
            covariant: true,
        });
    }

    // Quantum: fixed-point on the seed effect only; the remaining effects are
    // transported each iteration.
    let qi = quantum_instance(rho)?;
    let n = qi.levels;
    let tol = 1e-9;
    let max_iter = 20_000;
    let sigma = qi
        .states
        .iter()
        .fold(HermitianMatrix::zeros(n), |acc, s| acc.add(s));
    let mut seed = HermitianMatrix::identity(n)
        .scale(1.0 / m_out as f64)
        .add(&qi.states[0].sub(&sigma.scale(1.0 / m_out as f64)).scale(1e-3));

    let transported = |seed: &HermitianMatrix| -> Vec<HermitianMatrix> {
        let seed_vec = models::vectorize(&qi.basis, seed);
        transport
            .iter()
            .map(|&g| {
                let p = setup.state_matrix(g);
                let row = RealMatrix::row(&seed_vec).matmul(p);
                models::devectorize(&qi.basis, row.row_slice(0))
            })
            .collect()
    };

    let mut best: Option<(f64, SolveReport)> = None;
    for it in 0..max_iter {
        let effects = transported(&seed);
        let lambda = qi
            .states
            .iter()
            .zip(&effects)
            .fold(HermitianMatrix::zeros(n), |acc, (s, e)| {
                acc.add(&s.sandwich(e))
            });
        let x = linalg::pinv_sqrt(&lambda, PINV_CUTOFF)?;
        let support = linalg::matrix_function(&lambda, |l| if l > PINV_CUTOFF { 1.0 } else { 0.0 })?;
        let complement = HermitianMatrix::identity(n).sub(&support);
        seed = x
            .sandwich(&qi.states[0].sandwich(&effects[0]))
            .add(&complement.scale(1.0 / m_out as f64));

        let new_effects = transported(&seed);
        let measurement = Measurement::new_unchecked(
            rho.system.clone(),
            new_effects
                .iter()
                .map(|e| models::vectorize(&qi.basis, e))
                .collect(),
        );
        let value = success_probability(&measurement, rho)?;
        let (bound, feasible) = dual_certificate(&measurement, rho)?;
        let gap = if feasible { bound - value } else { f64::INFINITY };
        let report = SolveReport {
            measurement,
            value,
            method: Method::Covariant,
            iterations: it + 1,
            dual_bound: feasible.then_some(bound),
            gap: feasible.then_some(gap),
            covariant: true,
        };
        if best.as_ref().map_or(true, |(g, _)| gap < *g) {
            best = Some((gap, report.clone()));
        }
        if feasible && gap < tol {
            let mut report = report;
            report.measurement = symmetry::symmetrize(&report.measurement, setup)
                .map_err(|e| DiscriminationError::SystemMismatch(e.to_string()))?;
            report.value = success_probability(&report.measurement, rho)?;
            return Ok(report);
        }
    }
    let (gap, report) = best.expect("at least one iteration ran");
    Err(DiscriminationError::NoConvergence { report: Box::new(report), gap })
}


/// Samples a uniformly-random-ish valid measurement: on quantum systems via a
/// normalized random Gram family, on polyhedral systems by splitting a conic
/// decomposition of the discarding effect across outcomes at random.
pub fn random_measurement<R: rand::Rng>(
    system: &System,
    outcomes: usize,
    rng: &mut R,
) -> Result<Measurement, DiscriminationError> {
    assert!(outcomes > 0);
    if let Some(rays) = effect_rays(system) {
        let d = system.dim();
        let j = rays.len();
        let mut a = RealMatrix::zeros(d, j);
        for (ji, w) in rays.iter().enumerate() {
            for row in 0..d {
                a.set(row, ji, w[row]);
            }
        }
        let b = models::system_unit_effect(system);
        // Random negative costs keep the LP bounded while varying the vertex.
        let c: Vec<f64> = (0..j).map(|_| -rng.gen::<f64>()).collect();
        let sol = simplex::solve_standard(&a, &b, &c)
            .expect("discarding effect decomposes over the effect rays");
        let mut effects = vec![vec![0.0; d]; outcomes];
        for (ji, w) in rays.iter().enumerate() {
            if sol.x[ji] <= 0.0 {
                continue;
            }
            let split = random_simplex_point(outcomes, rng);
            for (m, p) in split.iter().enumerate() {
                for k in 0..d {
                    effects[m][k] += sol.x[ji] * p * w[k];
                }
            }
        }
        return Ok(Measurement::new_unchecked(system.clone(), effects));
    }
    let basis = models::system_hermitian_basis(system).ok_or_else(|| {
        DiscriminationError::UnsupportedModel(
            "random measurements need an all-quantum or polyhedral system".into(),
        )
    })?;
    let n = models::quantum_levels(system).unwrap();
    let grams: Vec<HermitianMatrix> = (0..outcomes)
        .map(|_| {
            let g: Vec<num_complex::Complex64> = (0..n * n)
                .map(|_| {
                    num_complex::Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
                })
                .collect();
            // A = G·G† is positive semidefinite.
            let mut a = vec![num_complex::Complex64::new(0.0, 0.0); n * n];
            for i in 0..n {
                for k in 0..n {
                    let mut acc = num_complex::Complex64::new(0.0, 0.0);
                    for l in 0..n {
                        acc += g[i * n + l] * g[k * n + l].conj();
                    }
                    a[i * n + k] = acc;
                }
            }
            HermitianMatrix::hermitian_part(n, &a)
        })
        .collect();
    let s = grams
        .iter()
        .fold(HermitianMatrix::zeros(n), |acc, a| acc.add(a));
    let x = linalg::pinv_sqrt(&s, PINV_CUTOFF)?;
    let support = linalg::matrix_function(&s, |l| if l > PINV_CUTOFF { 1.0 } else { 0.0 })?;
    let complement = HermitianMatrix::identity(n).sub(&support);
    let effects: Vec<Vec<f64>> = grams
        .iter()
        .map(|a| {
            let e = x.sandwich(a).add(&complement.scale(1.0 / outcomes as f64));
            models::vectorize(&basis, &e)
        })
        .collect();
    Ok(Measurement::new_unchecked(system.clone(), effects))
}

fn random_simplex_point<R: rand::Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n)
        .map(|_| -(1.0 - rng.gen::<f64>()).ln())
        .collect();
    let total: f64 = v.iter().sum();
    for x in &mut v {
        *x /= total;
    }
    v
}
