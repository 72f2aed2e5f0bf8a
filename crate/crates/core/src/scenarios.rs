//! Canonical discrimination instances shared by the test suite and the CLI.

use crate::discrimination::{Measurement, StatePreparation};
use crate::kernel::System;
use crate::linalg::{HermitianMatrix, RealMatrix};
use crate::models::{self, ModelDescriptor};
use crate::symmetry::{FiniteGroup, SymmetrySetup};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Optimal success probability for the two-state |0⟩ vs |+⟩ instance with
/// equal priors: (1 + 1/√2)/2.
pub const HELSTROM_OPTIMUM: f64 = 0.8535533905932737;

/// Optimal success probability for the trine instance: 2/3.
pub const TRINE_OPTIMUM: f64 = 2.0 / 3.0;

/// Optimal success probability for the four-vertex square-gbit instance: 1/2.
pub const GBIT_SQUARE_OPTIMUM: f64 = 0.5;

fn qubit() -> System {
    System::quantum("A", 2)
}

/// Bloch-circle pure state ½(I + sinφ·X + cosφ·Z).
fn bloch_state(phi: f64) -> HermitianMatrix {
    let (s, c) = phi.sin_cos();
    HermitianMatrix::from_entries_unchecked(
        2,
        vec![
            Complex64::new((1.0 + c) / 2.0, 0.0),
            Complex64::new(s / 2.0, 0.0),
            Complex64::new(s / 2.0, 0.0),
            Complex64::new((1.0 - c) / 2.0, 0.0),
        ],
    )
}

/// Z_n symmetry of n Bloch-circle states at angles 2πk/n: outcomes rotate
/// cyclically, states rotate about the Y axis.
fn bloch_cycle_symmetry(sys: &System, n: usize) -> SymmetrySetup {
    let basis_angle = std::f64::consts::TAU / n as f64;
    let rotate = |theta: f64| {
        let (s, c) = (theta / 2.0).sin_cos();
        // U = cos(θ/2)·I − i·sin(θ/2)·Y, real in this basis.
        let u = [
            Complex64::new(c, 0.0),
            Complex64::new(-s, 0.0),
            Complex64::new(s, 0.0),
            Complex64::new(c, 0.0),
        ];
        move |h: &HermitianMatrix| {
            let mut out = vec![Complex64::new(0.0, 0.0); 4];
            for i in 0..2 {
                for j in 0..2 {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k in 0..2 {
                        for l in 0..2 {
                            acc += u[i * 2 + k] * h.get(k, l) * u[j * 2 + l].conj();
                        }
                    }
                    out[i * 2 + j] = acc;
                }
            }
            HermitianMatrix::hermitian_part(2, &out)
        }
    };
    let mats: Vec<RealMatrix> = (0..n)
        .map(|g| models::quantum_process_matrix(sys, sys, rotate(basis_angle * g as f64)))
        .collect();
    let perms: Vec<Vec<usize>> = (0..n)
        .map(|g| (0..n).map(|m| (m + g) % n).collect())
        .collect();
    SymmetrySetup::new(sys.clone(), FiniteGroup::cyclic(n), perms, mats)
        .expect("rotation action is a valid symmetry")
}

/// Two equiprobable pure qubit states |0⟩ and |+⟩.
pub fn helstrom() -> StatePreparation {
    let sys = qubit();
    let basis = models::hermitian_basis(2);
    let zero = bloch_state(0.0).scale(0.5);
    let plus = bloch_state(std::f64::consts::FRAC_PI_2).scale(0.5);
    StatePreparation::new(
        sys,
        vec![
            models::vectorize(&basis, &zero),
            models::vectorize(&basis, &plus),
        ],
    )
    .expect("valid preparation")
}

/// n equiprobable pure qubit states spread uniformly on a Bloch great circle,
/// with their cyclic symmetry. `symmetric_pure(3)` is the trine instance.
pub fn symmetric_pure(n: usize) -> (StatePreparation, SymmetrySetup) {
    assert!(n >= 2);
    let sys = qubit();
    let basis = models::hermitian_basis(2);
    let states: Vec<Vec<f64>> = (0..n)
        .map(|k| {
            let phi = std::f64::consts::TAU * k as f64 / n as f64;
            models::vectorize(&basis, &bloch_state(phi).scale(1.0 / n as f64))
        })
        .collect();
    let rho = StatePreparation::new(sys.clone(), states).expect("valid preparation");
    let setup = bloch_cycle_symmetry(&sys, n);
    (rho, setup)
}

pub fn trine() -> (StatePreparation, SymmetrySetup) {
    symmetric_pure(3)
}

/// The four vertex states of the square gbit with equal priors and the Z_4
/// rotation symmetry of the square.
pub fn gbit_square() -> (StatePreparation, SymmetrySetup) {
    let sys = System::polytope("A", match ModelDescriptor::gbit_square() {
        ModelDescriptor::Polytope(p) => p,
        _ => unreachable!(),
    });
    let vertices: [[f64; 3]; 4] = [
        [1.0, 1.0, 1.0],
        [1.0, -1.0, 1.0],
        [1.0, -1.0, -1.0],
        [1.0, 1.0, -1.0],
    ];
    let states: Vec<Vec<f64>> = vertices
        .iter()
        .map(|v| v.iter().map(|x| x / 4.0).collect())
        .collect();
    let rho = StatePreparation::new(sys.clone(), states).expect("valid preparation");
    // quarter-turn (x, y) ↦ (−y, x)
    let r = RealMatrix::from_rows(&[
        vec![1.0, 0.0, 0.0],
        vec![0.0, 0.0, -1.0],
        vec![0.0, 1.0, 0.0],
    ]);
    let mut mats = vec![RealMatrix::identity(3)];
    for _ in 1..4 {
        mats.push(mats.last().unwrap().matmul(&r));
    }
    let perms: Vec<Vec<usize>> = (0..4)
        .map(|g| (0..4).map(|m| (m + g) % 4).collect())
        .collect();
    let setup = SymmetrySetup::new(sys, FiniteGroup::cyclic(4), perms, mats)
        .expect("square rotation is a valid symmetry");
    (rho, setup)
}

/// Four equiprobable classical distributions that are cyclic shifts of
/// (0.7, 0.1, 0.1, 0.1), with the Z_4 shift symmetry. Optimum 0.7.
pub fn classical_cyclic() -> (StatePreparation, SymmetrySetup) {
    let sys = System::classical("A", 4);
    let base = [0.7, 0.1, 0.1, 0.1];
    let states: Vec<Vec<f64>> = (0..4)
        .map(|m| (0..4).map(|i| base[(i + 4 - m) % 4] / 4.0).collect())
        .collect();
    let rho = StatePreparation::new(sys.clone(), states).expect("valid preparation");
    let mut mats = Vec::with_capacity(4);
    for g in 0..4 {
        let mut p = RealMatrix::zeros(4, 4);
        for i in 0..4 {
            p.set((i + g) % 4, i, 1.0);
        }
        mats.push(p);
    }
    let perms: Vec<Vec<usize>> = (0..4)
        .map(|g| (0..4).map(|m| (m + g) % 4).collect())
        .collect();
    let setup = SymmetrySetup::new(sys, FiniteGroup::cyclic(4), perms, mats)
        .expect("cyclic shift is a valid symmetry");
    (rho, setup)
}

pub const CLASSICAL_CYCLIC_OPTIMUM: f64 = 0.7;

/// A reproducible random classical preparation: M subnormalized distributions
/// over d coordinates.
pub fn classical_random(m: usize, d: usize, seed: u64) -> StatePreparation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sys = System::classical("A", d);
    let mut states: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..d).map(|_| rng.gen::<f64>()).collect())
        .collect();
    let total: f64 = states.iter().flatten().sum();
    for s in &mut states {
        for x in s.iter_mut() {
            *x /= total;
        }
    }
    StatePreparation::new(sys, states).expect("valid preparation")
}

/// A reproducible random square-gbit preparation: M subnormalized mixtures of
/// the square's vertices.
pub fn gbit_random(m: usize, seed: u64) -> StatePreparation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let model = match ModelDescriptor::gbit_square() {
        ModelDescriptor::Polytope(p) => p,
        _ => unreachable!(),
    };
    let gens = model.state_generators.clone();
    let sys = System::polytope("A", model);
    let mut weights: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..gens.len()).map(|_| rng.gen::<f64>()).collect())
        .collect();
    let total: f64 = weights.iter().flatten().sum();
    for w in &mut weights {
        for x in w.iter_mut() {
            *x /= total;
        }
    }
    let states: Vec<Vec<f64>> = weights
        .iter()
        .map(|w| {
            let mut s = vec![0.0; 3];
            for (wi, g) in w.iter().zip(&gens) {
                for k in 0..3 {
                    s[k] += wi * g[k];
                }
            }
            s
        })
        .collect();
    StatePreparation::new(sys, states).expect("valid preparation")
}

/// The four Bell states with equal priors together with the Bell measurement
/// (their projectors) on a 2⊗2 system.
pub fn bell() -> (StatePreparation, Measurement) {
    let sys = System::quantum("A", 2)
        .tensor(&System::quantum("B", 2))
        .expect("quantum factors compose");
    let basis = models::system_hermitian_basis(&sys).expect("all-quantum system");
    let inv = 1.0 / 2f64.sqrt();
    let kets: [[Complex64; 4]; 4] = [
        // (|00⟩ ± |11⟩)/√2, (|01⟩ ± |10⟩)/√2
        [
            Complex64::new(inv, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(inv, 0.0),
        ],
        [
            Complex64::new(inv, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(-inv, 0.0),
        ],
        [
            Complex64::new(0.0, 0.0),
            Complex64::new(inv, 0.0),
            Complex64::new(inv, 0.0),
            Complex64::new(0.0, 0.0),
        ],
        [
            Complex64::new(0.0, 0.0),
            Complex64::new(inv, 0.0),
            Complex64::new(-inv, 0.0),
            Complex64::new(0.0, 0.0),
        ],
    ];
    let projectors: Vec<HermitianMatrix> =
        kets.iter().map(|k| HermitianMatrix::outer(k)).collect();
    let states: Vec<Vec<f64>> = projectors
        .iter()
        .map(|p| models::vectorize(&basis, &p.scale(0.25)))
        .collect();
    let effects: Vec<Vec<f64>> = projectors
        .iter()
        .map(|p| models::vectorize(&basis, p))
        .collect();
    let rho = StatePreparation::new(sys.clone(), states).expect("valid preparation");
    let e = Measurement::new(sys, effects).expect("valid measurement");
    (rho, e)
}
