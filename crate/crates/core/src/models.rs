//! Concrete theory plugins: state/effect cones, discarding effects, and
//! pure-state generators for classical, quantum, and polytopic systems.
//!
//! Quantum states and effects live in a real vector space: Hermitian matrices
//! are stored as real coordinate vectors over a fixed orthonormal Hermitian
//! basis (diagonal units, then symmetric and antisymmetric off-diagonal pairs
//! scaled by 1/√2). Composite quantum systems use the Kronecker product of the
//! factor bases, so parallel composition of processes is a plain Kronecker
//! product of real matrices.

use crate::kernel::System;
use crate::linalg::{eigh, HermitianMatrix};
use crate::simplex;
use crate::RealMatrix;
use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

/// Absolute tolerance for all cone tests.
pub const CONE_TOL: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unsupported composite: {0}")]
    UnsupportedComposite(String),
}

/// A polytopic (GPT) single-system model given by generators.
#[derive(Debug, Clone, PartialEq)]
pub struct PolytopeModel {
    pub dim: usize,
    /// Rays generating the state cone; normalized generators satisfy ⟨u,s⟩=1.
    pub state_generators: Vec<Vec<f64>>,
    /// The discarding effect u.
    pub unit: Vec<f64>,
    /// Rays generating the effect cone (the dual cone of the state cone).
    pub effect_generators: Vec<Vec<f64>>,
}

/// A theory plugin for one atomic system.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelDescriptor {
    Classical { outcomes: usize },
    Quantum { levels: usize },
    Polytope(PolytopeModel),
}

impl ModelDescriptor {
    /// Dimension of the real vector space Vec of this system.
    pub fn dim(&self) -> usize {
        match self {
            ModelDescriptor::Classical { outcomes } => *outcomes,
            ModelDescriptor::Quantum { levels } => levels * levels,
            ModelDescriptor::Polytope(p) => p.dim,
        }
    }

    pub fn unit_effect(&self) -> Vec<f64> {
        match self {
            ModelDescriptor::Classical { outcomes } => vec![1.0; *outcomes],
            ModelDescriptor::Quantum { levels } => {
                vectorize(&hermitian_basis(*levels), &HermitianMatrix::identity(*levels))
            }
            ModelDescriptor::Polytope(p) => p.unit.clone(),
        }
    }

    /// The square-state gbit: four pure states at the vertices (1,±1,±1),
    /// unit (1,0,0), effect cone the full dual cone of the state cone.
    pub fn gbit_square() -> Self {
        ModelDescriptor::Polytope(PolytopeModel {
            dim: 3,
            state_generators: vec![
                vec![1.0, 1.0, 1.0],
                vec![1.0, -1.0, 1.0],
                vec![1.0, -1.0, -1.0],
                vec![1.0, 1.0, -1.0],
            ],
            unit: vec![1.0, 0.0, 0.0],
            effect_generators: vec![
                vec![1.0, 1.0, 0.0],
                vec![1.0, -1.0, 0.0],
                vec![1.0, 0.0, 1.0],
                vec![1.0, 0.0, -1.0],
            ],
        })
    }
}

/// Canonical orthonormal Hermitian basis of order-n matrices.
pub fn hermitian_basis(n: usize) -> Vec<HermitianMatrix> {
    let mut basis = Vec::with_capacity(n * n);
    for i in 0..n {
        let mut b = HermitianMatrix::zeros(n);
        b.set(i, i, Complex64::new(1.0, 0.0));
        basis.push(b);
    }
    let inv_sqrt2 = 1.0 / 2f64.sqrt();
    for i in 0..n {
        for j in (i + 1)..n {
            let mut sym = HermitianMatrix::zeros(n);
            sym.set(i, j, Complex64::new(inv_sqrt2, 0.0));
            sym.set(j, i, Complex64::new(inv_sqrt2, 0.0));
            basis.push(sym);
            let mut asym = HermitianMatrix::zeros(n);
            asym.set(i, j, Complex64::new(0.0, -inv_sqrt2));
            asym.set(j, i, Complex64::new(0.0, inv_sqrt2));
            basis.push(asym);
        }
    }
    basis
}

pub fn vectorize(basis: &[HermitianMatrix], h: &HermitianMatrix) -> Vec<f64> {
    basis.iter().map(|b| b.hs_inner(h)).collect()
}

pub fn devectorize(basis: &[HermitianMatrix], v: &[f64]) -> HermitianMatrix {
    assert_eq!(basis.len(), v.len());
    let dim = basis[0].dim();
    let mut out = HermitianMatrix::zeros(dim);
    for (b, &c) in basis.iter().zip(v) {
        if c != 0.0 {
            out = out.add(&b.scale(c));
        }
    }
    out
}

/// Hermitian basis of a system whose factors are all quantum, in Kronecker
/// order consistent with Kronecker products of coordinate vectors.
pub fn system_hermitian_basis(sys: &System) -> Option<Vec<HermitianMatrix>> {
    let mut basis = vec![HermitianMatrix::identity(1)];
    for f in sys.factors() {
        let fb = match f {
            ModelDescriptor::Quantum { levels } => hermitian_basis(*levels),
            _ => return None,
        };
        let mut next = Vec::with_capacity(basis.len() * fb.len());
        for b in &basis {
            for g in &fb {
                next.push(b.kron(g));
            }
        }
        basis = next;
    }
    Some(basis)
}

/// Total matrix order of an all-quantum system.
pub fn quantum_levels(sys: &System) -> Option<usize> {
    let mut n = 1;
    for f in sys.factors() {
        match f {
            ModelDescriptor::Quantum { levels } => n *= levels,
            _ => return None,
        }
    }
    Some(n)
}

/// Discarding effect of a (possibly composite) system.
pub fn system_unit_effect(sys: &System) -> Vec<f64> {
    let mut u = vec![1.0];
    for f in sys.factors() {
        let fu = f.unit_effect();
        let mut next = Vec::with_capacity(u.len() * fu.len());
        for a in &u {
            for b in &fu {
                next.push(a * b);
            }
        }
        u = next;
    }
    u
}

fn factor_dims(factors: &[ModelDescriptor]) -> Vec<usize> {
    factors.iter().map(|f| f.dim()).collect()
}

/// Extracts the subvector with the factor at `pos` fixed to index `val`.
fn fix_index(dims: &[usize], v: &[f64], pos: usize, val: usize) -> Vec<f64> {
    let before: usize = dims[..pos].iter().product();
    let at = dims[pos];
    let after: usize = dims[pos + 1..].iter().product();
    let mut out = Vec::with_capacity(before * after);
    for b in 0..before {
        for a in 0..after {
            out.push(v[(b * at + val) * after + a]);
        }
    }
    out
}

fn in_polytope_cone(gens: &[Vec<f64>], v: &[f64]) -> bool {
    let d = v.len();
    let mut cols = RealMatrix::zeros(d, gens.len());
    for (j, g) in gens.iter().enumerate() {
        for i in 0..d {
            cols.set(i, j, g[i]);
        }
    }
    // Allow the cone-tolerance slack by shifting tiny components.
    simplex::is_feasible(&cols, v)
        || simplex::is_feasible(&cols, &snap(v))
}

fn snap(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|&x| if x.abs() <= CONE_TOL { 0.0 } else { x })
        .collect()
}

fn quantum_psd(factors: &[ModelDescriptor], v: &[f64]) -> bool {
    let mut basis = vec![HermitianMatrix::identity(1)];
    for f in factors {
        let ModelDescriptor::Quantum { levels } = f else {
            unreachable!()
        };
        let fb = hermitian_basis(*levels);
        let mut next = Vec::with_capacity(basis.len() * fb.len());
        for b in &basis {
            for g in &fb {
                next.push(b.kron(g));
            }
        }
        basis = next;
    }
    let h = devectorize(&basis, v);
    let (vals, _) = eigh(&h).expect("devectorized matrix is Hermitian");
    vals[0] >= -CONE_TOL
}

fn in_cone(factors: &[ModelDescriptor], v: &[f64], effect: bool) -> Result<bool, ModelError> {
    let dims = factor_dims(factors);
    let expected: usize = dims.iter().product();
    if v.len() != expected {
        return Err(ModelError::DimensionMismatch { expected, got: v.len() });
    }
    // Project out classical factors one by one.
    if let Some(pos) = factors
        .iter()
        .position(|f| matches!(f, ModelDescriptor::Classical { .. }))
    {
        let m = dims[pos];
        let rest: Vec<ModelDescriptor> = factors
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != pos)
            .map(|(_, f)| f.clone())
            .collect();
        for val in 0..m {
            let sub = fix_index(&dims, v, pos, val);
            if !in_cone(&rest, &sub, effect)? {
                return Ok(false);
            }
        }
        return Ok(true);
    }
    match factors {
        [] => Ok(v[0] >= -CONE_TOL),
        fs if fs.iter().all(|f| matches!(f, ModelDescriptor::Quantum { .. })) => {
            Ok(quantum_psd(fs, v))
        }
        [ModelDescriptor::Polytope(p)] => {
            let gens = if effect { &p.effect_generators } else { &p.state_generators };
            Ok(in_polytope_cone(gens, v))
        }
        _ => Err(ModelError::UnsupportedComposite(
            "polytope factors cannot be combined with non-classical factors".into(),
        )),
    }
}

/// Membership of v in the state cone of the system.
pub fn contains_state(sys: &System, v: &[f64]) -> Result<bool, ModelError> {
    in_cone(sys.factors(), v, false)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EffectCheck {
    /// In the effect cone.
    pub in_cone: bool,
    /// Also feasible: u − w is in the effect cone.
    pub feasible: bool,
}

/// Membership of w in the effect cone, plus feasibility (u − w in the cone).
pub fn contains_effect(sys: &System, w: &[f64]) -> Result<EffectCheck, ModelError> {
    let in_cone_flag = in_cone(sys.factors(), w, true)?;
    let u = system_unit_effect(sys);
    if u.len() != w.len() {
        return Err(ModelError::DimensionMismatch { expected: u.len(), got: w.len() });
    }
    let rem: Vec<f64> = u.iter().zip(w).map(|(a, b)| a - b).collect();
    let feasible = in_cone_flag && in_cone(sys.factors(), &rem, true)?;
    Ok(EffectCheck { in_cone: in_cone_flag, feasible })
}

/// Exhaustive normalized pure-state generators for classical and polytope
/// models. Quantum systems have a continuum; see [`random_pure_state`].
pub fn pure_states(model: &ModelDescriptor) -> Option<Vec<Vec<f64>>> {
    match model {
        ModelDescriptor::Classical { outcomes } => {
            let m = *outcomes;
            Some(
                (0..m)
                    .map(|i| {
                        let mut v = vec![0.0; m];
                        v[i] = 1.0;
                        v
                    })
                    .collect(),
            )
        }
        ModelDescriptor::Polytope(p) => Some(p.state_generators.clone()),
        ModelDescriptor::Quantum { .. } => None,
    }
}

/// Haar-style random rank-1 projector of order n.
pub fn random_pure_state<R: Rng>(n: usize, rng: &mut R) -> HermitianMatrix {
    loop {
        let mut v: Vec<Complex64> = (0..n)
            .map(|_| {
                Complex64::new(
                    rng.sample::<f64, _>(rand::distributions::Standard) * 2.0 - 1.0,
                    rng.sample::<f64, _>(rand::distributions::Standard) * 2.0 - 1.0,
                )
            })
            .collect();
        let norm: f64 = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-6 {
            continue;
        }
        for x in v.iter_mut() {
            *x /= norm;
        }
        return HermitianMatrix::outer(&v);
    }
}

/// Matrix of a linear map on Hermitian matrices in the vectorized picture.
pub fn quantum_process_matrix<F>(sys_in: &System, sys_out: &System, map: F) -> RealMatrix
where
    F: Fn(&HermitianMatrix) -> HermitianMatrix,
{
    let bin = system_hermitian_basis(sys_in).expect("quantum input system");
    let bout = system_hermitian_basis(sys_out).expect("quantum output system");
    let mut m = RealMatrix::zeros(bout.len(), bin.len());
    for (j, b) in bin.iter().enumerate() {
        let img = map(b);
        let col = vectorize(&bout, &img);
        for (i, &c) in col.iter().enumerate() {
            m.set(i, j, c);
        }
    }
    m
}
