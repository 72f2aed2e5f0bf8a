//! Finite symmetry groups acting jointly on outcomes and on the state space,
//! the group-average symmetrizer, and a numerical check of the fact that
//! symmetrizing a measurement preserves the success probability on covariant
//! preparations.

use crate::discrimination::{self, Measurement, StatePreparation};
use crate::kernel::System;
use crate::linalg::RealMatrix;
use crate::models;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Tolerance on homomorphism / covariance residuals.
pub const COV_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum SymmetryError {
    #[error("invalid group table: {0}")]
    Group(String),
    #[error("size mismatch: {0}")]
    Mismatch(String),
    #[error("{context} homomorphism fails at pair (g={g}, h={h}), residual {residual:.3e}")]
    Homomorphism {
        g: usize,
        h: usize,
        context: &'static str,
        residual: f64,
    },
    #[error("state-space map for g={g} is not a symmetry: {reason}")]
    NotAction { g: usize, reason: String },
}

/// A finite group given by its multiplication table, `table[g][h] = g∘h`.
#[derive(Debug, Clone)]
pub struct FiniteGroup {
    table: Vec<Vec<usize>>,
    identity: usize,
    inverses: Vec<usize>,
}

impl FiniteGroup {
    pub fn new(table: Vec<Vec<usize>>) -> Result<Self, SymmetryError> {
        let n = table.len();
        if n == 0 {
            return Err(SymmetryError::Group("empty table".into()));
        }
        for row in &table {
            if row.len() != n || row.iter().any(|&x| x >= n) {
                return Err(SymmetryError::Group("table is not square over 0..n".into()));
            }
        }
        // Latin square
        for g in 0..n {
            let mut seen_row = vec![false; n];
            let mut seen_col = vec![false; n];
            for h in 0..n {
                if seen_row[table[g][h]] || seen_col[table[h][g]] {
                    return Err(SymmetryError::Group(format!(
                        "row/column {} repeats an element",
                        g
                    )));
                }
                seen_row[table[g][h]] = true;
                seen_col[table[h][g]] = true;
            }
        }
        // associativity
        for g in 0..n {
            for h in 0..n {
                for k in 0..n {
                    if table[table[g][h]][k] != table[g][table[h][k]] {
                        return Err(SymmetryError::Group(format!(
                            "associativity fails at ({}, {}, {})",
                            g, h, k
                        )));
                    }
                }
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|g| table[e][g] == g && table[g][e] == g))
            .ok_or_else(|| SymmetryError::Group("no identity element".into()))?;
        let mut inverses = vec![0; n];
        for g in 0..n {
            inverses[g] = (0..n)
                .find(|&h| table[g][h] == identity && table[h][g] == identity)
                .ok_or_else(|| SymmetryError::Group(format!("element {} has no inverse", g)))?;
        }
        Ok(Self { table, identity, inverses })
    }

    pub fn trivial() -> Self {
        Self::new(vec![vec![0]]).unwrap()
    }

    pub fn cyclic(n: usize) -> Self {
        let table = (0..n)
            .map(|i| (0..n).map(|j| (i + j) % n).collect())
            .collect();
        Self::new(table).unwrap()
    }

    /// Dihedral group of order 2n; element r + n·s is rotation r composed with
    /// s reflections.
    pub fn dihedral(n: usize) -> Self {
        let idx = |r: usize, s: usize| r + n * s;
        let mut table = vec![vec![0; 2 * n]; 2 * n];
        for r1 in 0..n {
            for s1 in 0..2 {
                for r2 in 0..n {
                    for s2 in 0..2 {
                        let r = if s1 == 0 { (r1 + r2) % n } else { (r1 + n - r2 % n) % n };
                        table[idx(r1, s1)][idx(r2, s2)] = idx(r, s1 ^ s2);
                    }
                }
            }
        }
        Self::new(table).unwrap()
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn mul(&self, g: usize, h: usize) -> usize {
        self.table[g][h]
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn inverse(&self, g: usize) -> usize {
        self.inverses[g]
    }
}

/// A joint symmetry: permutations π_g of the M outcomes and linear maps P_g on
/// the state space, with covariance conventions P_g ρ_m = ρ_{π_g(m)} for
/// preparations and e_m P_g = e_{π_g⁻¹(m)} for measurements.
#[derive(Debug, Clone)]
pub struct SymmetrySetup {
    pub system: System,
    pub group: FiniteGroup,
    outcome_perms: Vec<Vec<usize>>,
    state_matrices: Vec<RealMatrix>,
}

impl SymmetrySetup {
    pub fn new(
        system: System,
        group: FiniteGroup,
        outcome_perms: Vec<Vec<usize>>,
        state_matrices: Vec<RealMatrix>,
    ) -> Result<Self, SymmetryError> {
        let setup = Self { system, group, outcome_perms, state_matrices };
        validate_setup(&setup)?;
        Ok(setup)
    }

    pub fn outcomes(&self) -> usize {
        self.outcome_perms[0].len()
    }

    pub fn outcome_perm(&self, g: usize) -> &[usize] {
        &self.outcome_perms[g]
    }

    pub fn state_matrix(&self, g: usize) -> &RealMatrix {
        &self.state_matrices[g]
    }

    /// The outcome permutation matrix T_g with (T_g)_{π_g(j), j} = 1.
    pub fn outcome_matrix(&self, g: usize) -> RealMatrix {
        let m = self.outcomes();
        let mut t = RealMatrix::zeros(m, m);
        for j in 0..m {
            t.set(self.outcome_perms[g][j], j, 1.0);
        }
        t
    }

    /// For a transitive outcome action, one group element per outcome k with
    /// π_{g_k}(k) = 0 (smallest index). None when the action is not transitive.
    pub fn transport_elements(&self) -> Option<Vec<usize>> {
        let m = self.outcomes();
        (0..m)
            .map(|k| (0..self.group.order()).find(|&g| self.outcome_perms[g][k] == 0))
            .collect()
    }
}

/// Deterministic state samples spanning the cone, used to spot-check that the
/// P_g preserve states on quantum factors (exact generators are used on
/// polyhedral systems).
fn state_samples(system: &System) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut samples: Vec<Vec<f64>> = vec![vec![1.0]];
    for f in system.factors() {
        let fsam: Vec<Vec<f64>> = match f {
            models::ModelDescriptor::Classical { outcomes } => (0..*outcomes)
                .map(|i| {
                    let mut v = vec![0.0; *outcomes];
                    v[i] = 1.0;
                    v
                })
                .collect(),
            models::ModelDescriptor::Polytope(p) => p.state_generators.clone(),
            models::ModelDescriptor::Quantum { levels } => {
                let basis = models::hermitian_basis(*levels);
                (0..8)
                    .map(|_| {
                        models::vectorize(&basis, &models::random_pure_state(*levels, &mut rng))
                    })
                    .collect()
            }
        };
        let mut next = Vec::with_capacity(samples.len() * fsam.len());
        for a in &samples {
            for b in &fsam {
                let mut v = Vec::with_capacity(a.len() * b.len());
                for x in a {
                    for y in b {
                        v.push(x * y);
                    }
                }
                next.push(v);
            }
        }
        samples = next;
    }
    samples
}

/// Checks group-action structure: both maps are homomorphisms, identities map
/// to identities, each P_g preserves the discarding effect and the state cone.
pub fn validate_setup(setup: &SymmetrySetup) -> Result<(), SymmetryError> {
    let n = setup.group.order();
    let d = setup.system.dim();
    if setup.outcome_perms.len() != n || setup.state_matrices.len() != n {
        return Err(SymmetryError::Mismatch(
            "need one permutation and one matrix per group element".into(),
        ));
    }
    let m = setup.outcome_perms[0].len();
    for (g, p) in setup.outcome_perms.iter().enumerate() {
        let mut seen = vec![false; m];
        if p.len() != m || p.iter().any(|&x| x >= m) {
            return Err(SymmetryError::Mismatch(format!("permutation {} has wrong size", g)));
        }
        for &x in p {
            if seen[x] {
                return Err(SymmetryError::NotAction {
                    g,
                    reason: "outcome map is not a permutation".into(),
                });
            }
            seen[x] = true;
        }
    }
    for (g, mat) in setup.state_matrices.iter().enumerate() {
        if mat.rows() != d || mat.cols() != d {
            return Err(SymmetryError::Mismatch(format!(
                "state matrix {} is {}x{}, system dimension is {}",
                g,
                mat.rows(),
                mat.cols(),
                d
            )));
        }
    }

    let e = setup.group.identity();
    let id_res = setup.state_matrices[e].max_abs_diff(&RealMatrix::identity(d));
    if id_res > COV_TOL {
        return Err(SymmetryError::NotAction {
            g: e,
            reason: format!("identity element maps to a non-identity matrix ({:.3e})", id_res),
        });
    }
    if setup.outcome_perms[e].iter().enumerate().any(|(j, &x)| x != j) {
        return Err(SymmetryError::NotAction {
            g: e,
            reason: "identity element permutes outcomes".into(),
        });
    }

    for g in 0..n {
        for h in 0..n {
            let gh = setup.group.mul(g, h);
            // π_{gh} = π_g ∘ π_h
            for j in 0..m {
                if setup.outcome_perms[gh][j]
                    != setup.outcome_perms[g][setup.outcome_perms[h][j]]
                {
                    return Err(SymmetryError::Homomorphism {
                        g,
                        h,
                        context: "outcome action",
                        residual: 1.0,
                    });
                }
            }
            let prod = setup.state_matrices[g].matmul(&setup.state_matrices[h]);
            let residual = prod.max_abs_diff(&setup.state_matrices[gh]);
            if residual > COV_TOL {
                return Err(SymmetryError::Homomorphism {
                    g,
                    h,
                    context: "state-space action",
                    residual,
                });
            }
        }
    }

    // Each P_g must be a symmetry of the model: it preserves the discarding
    // effect and maps states to states (exactly on polyhedral generators,
    // sampled on quantum factors). The effect cone is then preserved by the
    // inverse-transpose structure of the group.
    let u = models::system_unit_effect(&setup.system);
    let samples = state_samples(&setup.system);
    for (g, mat) in setup.state_matrices.iter().enumerate() {
        let ut = RealMatrix::row(&u).matmul(mat);
        let det_res = ut
            .row_slice(0)
            .iter()
            .zip(&u)
            .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
        if det_res > COV_TOL {
            return Err(SymmetryError::NotAction {
                g,
                reason: format!("does not preserve the discarding effect ({:.3e})", det_res),
            });
        }
        for s in &samples {
            let img = mat.matmul(&RealMatrix::column(s));
            let img: Vec<f64> = (0..d).map(|i| img.get(i, 0)).collect();
            let ok = models::contains_state(&setup.system, &img)
                .map_err(|err| SymmetryError::Mismatch(err.to_string()))?;
            if !ok {
                return Err(SymmetryError::NotAction {
                    g,
                    reason: "maps a state outside the state cone".into(),
                });
            }
        }
    }
    Ok(())
}

/// max_{g,m} ‖P_g ρ_m − ρ_{π_g(m)}‖_∞.
pub fn preparation_covariance_residual(
    rho: &StatePreparation,
    setup: &SymmetrySetup,
) -> Result<f64, SymmetryError> {
    check_shapes(rho.system(), rho.outcomes(), setup)?;
    let d = setup.system.dim();
    let mut worst = 0.0f64;
    for g in 0..setup.group.order() {
        let p = setup.state_matrix(g);
        for (m, s) in rho.states().iter().enumerate() {
            let img = p.matmul(&RealMatrix::column(s));
            let target = &rho.states()[setup.outcome_perm(g)[m]];
            for i in 0..d {
                worst = worst.max((img.get(i, 0) - target[i]).abs());
            }
        }
    }
    Ok(worst)
}

/// max_{g,m} ‖e_m P_g − e_{π_g⁻¹(m)}‖_∞.
pub fn measurement_covariance_residual(
    e: &Measurement,
    setup: &SymmetrySetup,
) -> Result<f64, SymmetryError> {
    check_shapes(e.system(), e.outcomes(), setup)?;
    let mut worst = 0.0f64;
    for g in 0..setup.group.order() {
        let p = setup.state_matrix(g);
        let perm = setup.outcome_perm(g);
        let mut inv = vec![0; perm.len()];
        for (j, &x) in perm.iter().enumerate() {
            inv[x] = j;
        }
        for (m, em) in e.effects().iter().enumerate() {
            let img = RealMatrix::row(em).matmul(p);
            let target = &e.effects()[inv[m]];
            for (a, b) in img.row_slice(0).iter().zip(target) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    Ok(worst)
}

pub fn is_covariant_preparation(
    rho: &StatePreparation,
    setup: &SymmetrySetup,
) -> Result<bool, SymmetryError> {
    Ok(preparation_covariance_residual(rho, setup)? <= COV_TOL)
}

pub fn is_covariant_measurement(
    e: &Measurement,
    setup: &SymmetrySetup,
) -> Result<bool, SymmetryError> {
    Ok(measurement_covariance_residual(e, setup)? <= COV_TOL)
}

fn check_shapes(sys: &System, outcomes: usize, setup: &SymmetrySetup) -> Result<(), SymmetryError> {
    if *sys != setup.system {
        return Err(SymmetryError::Mismatch("system differs from setup system".into()));
    }
    if outcomes != setup.outcomes() {
        return Err(SymmetryError::Mismatch(format!(
            "outcome count {} differs from setup outcome count {}",
            outcomes,
            setup.outcomes()
        )));
    }
    Ok(())
}

/// Group-average symmetrizer e◇_m = |G|⁻¹ Σ_h e_{π_h(m)} P_h, accumulated with
/// compensated summation so large groups do not lose the last digits.
pub fn symmetrize(e: &Measurement, setup: &SymmetrySetup) -> Result<Measurement, SymmetryError> {
    check_shapes(e.system(), e.outcomes(), setup)?;
    let d = setup.system.dim();
    let n = setup.group.order();
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(e.outcomes());
    for m in 0..e.outcomes() {
        let mut sum = vec![0.0f64; d];
        let mut comp = vec![0.0f64; d];
        for h in 0..n {
            let src = &e.effects()[setup.outcome_perm(h)[m]];
            let img = RealMatrix::row(src).matmul(setup.state_matrix(h));
            for (i, &x) in img.row_slice(0).iter().enumerate() {
                let y = x - comp[i];
                let t = sum[i] + y;
                comp[i] = (t - sum[i]) - y;
                sum[i] = t;
            }
        }
        for s in &mut sum {
            *s /= n as f64;
        }
        out.push(sum);
    }
    Ok(Measurement::new_unchecked(setup.system.clone(), out))
}

#[derive(Debug, Clone)]
pub struct TheoremReport {
    pub trials: usize,
    /// max over trials of |P_S(e◇) − P_S(e)|.
    pub max_value_deviation: f64,
    /// max over trials of the covariance residual of e◇.
    pub max_covariance_residual: f64,
    /// whether every symmetrized measurement passed full validation.
    pub all_valid: bool,
}

/// Samples random measurements and checks that symmetrizing each one keeps the
/// success probability on a covariant preparation, yields a covariant
/// measurement, and stays a valid measurement.
pub fn verify_symmetry_theorem(
    rho: &StatePreparation,
    setup: &SymmetrySetup,
    trials: usize,
    seed: u64,
) -> Result<TheoremReport, SymmetryError> {
    if !is_covariant_preparation(rho, setup)? {
        return Err(SymmetryError::Mismatch("preparation is not covariant".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_dev = 0.0f64;
    let mut max_cov = 0.0f64;
    let mut all_valid = true;
    for _ in 0..trials {
        let e = discrimination::random_measurement(rho.system(), rho.outcomes(), &mut rng)
            .map_err(|err| SymmetryError::Mismatch(err.to_string()))?;
        let es = symmetrize(&e, setup)?;
        let ps = discrimination::success_probability(&e, rho)
            .map_err(|err| SymmetryError::Mismatch(err.to_string()))?;
        let pss = discrimination::success_probability(&es, rho)
            .map_err(|err| SymmetryError::Mismatch(err.to_string()))?;
        max_dev = max_dev.max((ps - pss).abs());
        max_cov = max_cov.max(measurement_covariance_residual(&es, setup)?);
        all_valid &= es.is_valid();
    }
    Ok(TheoremReport {
        trials,
        max_value_deviation: max_dev,
        max_covariance_residual: max_cov,
        all_valid,
    })
}
