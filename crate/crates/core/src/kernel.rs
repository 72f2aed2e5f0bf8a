//! Finite-dimensional realization of the process calculus: systems, extended
//! processes, sequential and parallel composition, swap, the discarding
//! effect, and the classical-system structure (cup, cap, chi).
//!
//! Extended processes are unconstrained real-linear maps between the vector
//! spaces of their systems; feasibility (cone membership) is a predicate
//! supplied by [`crate::models`], never enforced on construction.

use crate::linalg::RealMatrix;
use crate::models::{self, ModelDescriptor};
use thiserror::Error;

/// Matrix-equality tolerance deciding process equality.
pub const PROC_EQ_TOL: f64 = 1e-12;
/// Tolerance for determinism and measurement normalization checks.
pub const DET_TOL: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum KernelError {
    #[error("system mismatch: {0}")]
    SystemMismatch(String),
    #[error("matrix shape {rows}x{cols} does not match systems {out_dim}x{in_dim}")]
    ShapeMismatch { rows: usize, cols: usize, out_dim: usize, in_dim: usize },
    #[error("unsupported composite system: {0}")]
    UnsupportedSystem(String),
}

/// A system: an ordered list of atomic factors. The trivial system I has no
/// factors and dimension 1.
#[derive(Debug, Clone)]
pub struct System {
    label: String,
    factors: Vec<ModelDescriptor>,
}

impl PartialEq for System {
    // Labels are cosmetic; composition compatibility is structural.
    fn eq(&self, other: &Self) -> bool {
        self.factors == other.factors
    }
}

impl System {
    pub fn trivial() -> Self {
        Self { label: "I".into(), factors: Vec::new() }
    }

    pub fn classical(label: impl Into<String>, outcomes: usize) -> Self {
        Self {
            label: label.into(),
            factors: vec![ModelDescriptor::Classical { outcomes }],
        }
    }

    pub fn quantum(label: impl Into<String>, levels: usize) -> Self {
        Self {
            label: label.into(),
            factors: vec![ModelDescriptor::Quantum { levels }],
        }
    }

    pub fn polytope(label: impl Into<String>, model: crate::models::PolytopeModel) -> Self {
        Self {
            label: label.into(),
            factors: vec![ModelDescriptor::Polytope(model)],
        }
    }

    pub fn atomic(label: impl Into<String>, model: ModelDescriptor) -> Self {
        Self { label: label.into(), factors: vec![model] }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn factors(&self) -> &[ModelDescriptor] {
        &self.factors
    }

    pub fn is_trivial(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim()).product()
    }

    /// Parallel composition of systems. Polytope factors may only be combined
    /// with classical factors (no canonical tensor cone otherwise).
    pub fn tensor(&self, other: &System) -> Result<System, KernelError> {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        let polytopes = factors
            .iter()
            .filter(|f| matches!(f, ModelDescriptor::Polytope(_)))
            .count();
        let nonclassical = factors
            .iter()
            .filter(|f| !matches!(f, ModelDescriptor::Classical { .. }))
            .count();
        if polytopes >= 1 && nonclassical >= 2 {
            return Err(KernelError::UnsupportedSystem(
                "polytope systems compose only with classical systems".into(),
            ));
        }
        let label = if self.is_trivial() {
            other.label.clone()
        } else if other.is_trivial() {
            self.label.clone()
        } else {
            format!("{}⊗{}", self.label, other.label)
        };
        Ok(System { label, factors })
    }
}

/// An element of Vec_{A→B}: a real matrix of shape (output.dim × input.dim)
/// with system tags. States have trivial input, effects trivial output,
/// scalars both.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedProcess {
    input: System,
    output: System,
    matrix: RealMatrix,
}

impl ExtendedProcess {
    pub fn new(input: System, output: System, matrix: RealMatrix) -> Result<Self, KernelError> {
        if matrix.rows() != output.dim() || matrix.cols() != input.dim() {
            return Err(KernelError::ShapeMismatch {
                rows: matrix.rows(),
                cols: matrix.cols(),
                out_dim: output.dim(),
                in_dim: input.dim(),
            });
        }
        Ok(Self { input, output, matrix })
    }

    pub fn identity(sys: &System) -> Self {
        Self {
            input: sys.clone(),
            output: sys.clone(),
            matrix: RealMatrix::identity(sys.dim()),
        }
    }

    pub fn state(sys: &System, v: &[f64]) -> Result<Self, KernelError> {
        Self::new(System::trivial(), sys.clone(), RealMatrix::column(v))
    }

    pub fn effect(sys: &System, w: &[f64]) -> Result<Self, KernelError> {
        Self::new(sys.clone(), System::trivial(), RealMatrix::row(w))
    }

    pub fn scalar(a: f64) -> Self {
        Self {
            input: System::trivial(),
            output: System::trivial(),
            matrix: RealMatrix::from_vec(1, 1, vec![a]),
        }
    }

    /// The discarding effect of a system.
    pub fn discard(sys: &System) -> Self {
        Self {
            input: sys.clone(),
            output: System::trivial(),
            matrix: RealMatrix::row(&models::system_unit_effect(sys)),
        }
    }

    pub fn input(&self) -> &System {
        &self.input
    }

    pub fn output(&self) -> &System {
        &self.output
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.matrix
    }

    pub fn scalar_value(&self) -> Option<f64> {
        if self.input.is_trivial() && self.output.is_trivial() {
            Some(self.matrix.get(0, 0))
        } else {
            None
        }
    }

    /// Sequential composition g∘f (self first, then g).
    pub fn then(&self, g: &ExtendedProcess) -> Result<ExtendedProcess, KernelError> {
        if self.output != g.input {
            return Err(KernelError::SystemMismatch(format!(
                "output {} (dim {}) does not match input {} (dim {})",
                self.output.label,
                self.output.dim(),
                g.input.label,
                g.input.dim()
            )));
        }
        Ok(ExtendedProcess {
            input: self.input.clone(),
            output: g.output.clone(),
            matrix: g.matrix.matmul(&self.matrix),
        })
    }

    /// Parallel composition f⊗g. Trivial factors are absorbed (I⊗A = A).
    pub fn par(&self, g: &ExtendedProcess) -> Result<ExtendedProcess, KernelError> {
        Ok(ExtendedProcess {
            input: self.input.tensor(&g.input)?,
            output: self.output.tensor(&g.output)?,
            matrix: self.matrix.kron(&g.matrix),
        })
    }

    pub fn add(&self, g: &ExtendedProcess) -> Result<ExtendedProcess, KernelError> {
        if self.input != g.input || self.output != g.output {
            return Err(KernelError::SystemMismatch("addition requires equal systems".into()));
        }
        Ok(ExtendedProcess {
            input: self.input.clone(),
            output: self.output.clone(),
            matrix: self.matrix.add(&g.matrix),
        })
    }

    pub fn scale(&self, a: f64) -> ExtendedProcess {
        ExtendedProcess {
            input: self.input.clone(),
            output: self.output.clone(),
            matrix: self.matrix.scale(a),
        }
    }

    /// Process equality as matrix equality within [`PROC_EQ_TOL`].
    pub fn approx_eq(&self, g: &ExtendedProcess) -> bool {
        self.input == g.input
            && self.output == g.output
            && self.matrix.max_abs_diff(&g.matrix) <= PROC_EQ_TOL
    }
}

/// Sequential composition, f first.
pub fn compose_seq(f: &ExtendedProcess, g: &ExtendedProcess) -> Result<ExtendedProcess, KernelError> {
    f.then(g)
}

/// Parallel composition.
pub fn compose_par(f: &ExtendedProcess, g: &ExtendedProcess) -> Result<ExtendedProcess, KernelError> {
    f.par(g)
}

/// The swap process ×_{A,B}: the permutation sending vectorized x⊗y to y⊗x.
pub fn swap(a: &System, b: &System) -> Result<ExtendedProcess, KernelError> {
    let input = a.tensor(b)?;
    let output = b.tensor(a)?;
    let (da, db) = (a.dim(), b.dim());
    let mut m = RealMatrix::zeros(da * db, da * db);
    for i in 0..da {
        for j in 0..db {
            m.set(j * da + i, i * db + j, 1.0);
        }
    }
    ExtendedProcess::new(input, output, m)
}

/// True iff discard∘f = discard within [`DET_TOL`].
pub fn is_deterministic(f: &ExtendedProcess) -> bool {
    let u_out = models::system_unit_effect(f.output());
    let u_in = models::system_unit_effect(f.input());
    let row = RealMatrix::row(&u_out).matmul(f.matrix());
    row.max_abs_diff(&RealMatrix::row(&u_in)) <= DET_TOL
}

/// Canonical structure of a classical system: basis states/effects, cup, cap,
/// and the chi state Σ_m |m⟩.
#[derive(Debug, Clone)]
pub struct ClassicalStructure {
    pub outcomes: usize,
    pub system: System,
    pub basis_states: Vec<ExtendedProcess>,
    pub basis_effects: Vec<ExtendedProcess>,
    pub cup: ExtendedProcess,
    pub cap: ExtendedProcess,
    pub chi: ExtendedProcess,
}

impl ClassicalStructure {
    pub fn new(label: impl Into<String>, outcomes: usize) -> Self {
        let system = System::classical(label, outcomes);
        let m = outcomes;
        let pair = system.tensor(&system).expect("classical tensor");
        let basis_states = (0..m)
            .map(|i| {
                let mut v = vec![0.0; m];
                v[i] = 1.0;
                ExtendedProcess::state(&system, &v).unwrap()
            })
            .collect();
        let basis_effects = (0..m)
            .map(|i| {
                let mut v = vec![0.0; m];
                v[i] = 1.0;
                ExtendedProcess::effect(&system, &v).unwrap()
            })
            .collect();
        let mut cup_v = vec![0.0; m * m];
        for i in 0..m {
            cup_v[i * m + i] = 1.0;
        }
        let cup = ExtendedProcess::state(&pair, &cup_v).unwrap();
        let cap = ExtendedProcess::effect(&pair, &cup_v).unwrap();
        let chi = ExtendedProcess::state(&system, &vec![1.0; m]).unwrap();
        Self { outcomes, system, basis_states, basis_effects, cup, cap, chi }
    }
}

/// Checks the yanking identity (cap⊗id)∘(id⊗cup) = id = (id⊗cap)∘(cup⊗id).
pub fn yank_check(cs: &ClassicalStructure) -> bool {
    let id = ExtendedProcess::identity(&cs.system);
    let lhs1 = id
        .par(&cs.cup)
        .and_then(|x| x.then(&cs.cap.par(&id).unwrap()))
        .unwrap();
    let lhs2 = cs
        .cup
        .par(&id)
        .and_then(|x| x.then(&id.par(&cs.cap).unwrap()))
        .unwrap();
    lhs1.approx_eq(&id) && lhs2.approx_eq(&id)
}

/// Packs effects {⟨e_m|} on A into the deterministic process e = Σ |m⟩⟨e_m|
/// from A to the classical outcome system.
pub fn measurement_to_process(effects: &[ExtendedProcess]) -> Result<ExtendedProcess, KernelError> {
    let m = effects.len();
    assert!(m >= 1, "a measurement has at least one outcome");
    let sys_a = effects[0].input().clone();
    let mut rows = Vec::with_capacity(m);
    for e in effects {
        if *e.input() != sys_a || !e.output().is_trivial() {
            return Err(KernelError::SystemMismatch(
                "all effects must share the same input system".into(),
            ));
        }
        rows.push(e.matrix().row_slice(0).to_vec());
    }
    let out = System::classical(format!("C{}", m), m);
    ExtendedProcess::new(sys_a, out, RealMatrix::from_rows(&rows))
}

/// Unpacks a process A→C into its outcome effects ⟨m|∘e.
pub fn process_to_effects(e: &ExtendedProcess) -> Result<Vec<ExtendedProcess>, KernelError> {
    match e.output().factors() {
        [ModelDescriptor::Classical { outcomes }] => {
            let m = *outcomes;
            Ok((0..m)
                .map(|i| {
                    ExtendedProcess::effect(e.input(), e.matrix().row_slice(i)).unwrap()
                })
                .collect())
        }
        _ => Err(KernelError::SystemMismatch(
            "process output must be a single classical system".into(),
        )),
    }
}

/// True iff every effect is in the model effect cone and they sum to the
/// discarding effect within [`DET_TOL`].
pub fn is_measurement(effects: &[ExtendedProcess]) -> bool {
    if effects.is_empty() {
        return false;
    }
    let sys = effects[0].input().clone();
    let mut sum = vec![0.0; sys.dim()];
    for e in effects {
        if *e.input() != sys || !e.output().is_trivial() {
            return false;
        }
        let w = e.matrix().row_slice(0);
        match models::contains_effect(&sys, w) {
            Ok(check) if check.in_cone => {}
            _ => return false,
        }
        for (s, x) in sum.iter_mut().zip(w) {
            *s += x;
        }
    }
    let u = models::system_unit_effect(&sys);
    sum.iter().zip(&u).all(|(a, b)| (a - b).abs() <= DET_TOL)
}
