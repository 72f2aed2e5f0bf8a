//! JSON instance files, version 1.
//!
//! Complex numbers are always 2-arrays `[re, im]`; matrices are row-major
//! nested arrays. Quantum states are density matrices (priors held
//! separately); classical and polytope states are coordinate vectors.
//! `parse(emit(x)) == x` holds exactly: serde_json round-trips every f64.

use crate::CliError;
use num_complex::Complex64;
use optdiscrim_core::discrimination::{Measurement, StatePreparation};
use optdiscrim_core::kernel::System;
use optdiscrim_core::linalg::{HermitianMatrix, RealMatrix};
use optdiscrim_core::models::{self, ModelDescriptor};
use optdiscrim_core::scenarios;
use optdiscrim_core::symmetry::{FiniteGroup, SymmetrySetup};
use serde::{Deserialize, Serialize};
use std::path::Path;

const HERM_TOL: f64 = 1e-10;

/// `[re, im]` pair.
pub type Cx = [f64; 2];
pub type ComplexMatrix = Vec<Vec<Cx>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    pub version: u32,
    pub model: Model,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preparation: Option<PreparationSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measurement: Option<MeasurementSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symmetry: Option<SymmetrySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Model {
    /// Tensor product of quantum factors with the given levels.
    Quantum { levels: Vec<usize> },
    Classical { outcomes: usize },
    GbitSquare,
}

/// A single state or effect: a complex matrix for quantum models, a plain
/// coordinate vector otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Matrix(ComplexMatrix),
    Vector(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreparationSection {
    pub priors: Vec<f64>,
    pub states: Vec<Entry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementSection {
    pub effects: Vec<Entry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetrySection {
    pub group: GroupSpec,
    pub outcome_permutations: Vec<Vec<usize>>,
    pub actions: Vec<ActionSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupSpec {
    Named {
        name: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
    },
    Table {
        table: Vec<Vec<usize>>,
    },
}

/// Group action on states: either the coordinate matrix of the linear map, or
/// a quantum unitary acting by conjugation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ActionSpec {
    Unitary { unitary: ComplexMatrix },
    Matrix { matrix: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// The instance converted to core types, fully validated.
pub struct Built {
    pub system: System,
    pub preparation: Option<StatePreparation>,
    pub measurement: Option<Measurement>,
    pub symmetry: Option<SymmetrySetup>,
    pub class: Option<String>,
    pub tolerance: f64,
    pub max_iter: usize,
    pub seed: u64,
}

fn val(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

pub fn parse_instance(path: &Path) -> Result<(Instance, Built), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("{}: {}", path.display(), e)))?;
    let inst = parse_instance_str(&text)?;
    let built = build(&inst)?;
    Ok((inst, built))
}

/// serde_json errors already carry line/column positions.
pub fn parse_instance_str(text: &str) -> Result<Instance, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
}

pub fn emit_instance(inst: &Instance) -> String {
    let mut s = serde_json::to_string_pretty(inst).expect("instance serializes");
    s.push('\n');
    s
}

/// FNV-1a over the compact serialization; echoed into reports.
pub fn instance_hash(inst: &Instance) -> String {
    let bytes = serde_json::to_string(inst).expect("instance serializes");
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{:016x}", h)
}

pub fn build(inst: &Instance) -> Result<Built, CliError> {
    if inst.version != 1 {
        return Err(val(format!("unsupported file version {}", inst.version)));
    }
    let system = build_system(&inst.model)?;

    let preparation = match &inst.preparation {
        None => None,
        Some(p) => {
            if p.priors.len() != p.states.len() {
                return Err(val(format!(
                    "{} priors for {} states",
                    p.priors.len(),
                    p.states.len()
                )));
            }
            if p.priors.iter().any(|x| *x < 0.0) {
                return Err(val("priors must be nonnegative"));
            }
            let states: Vec<Vec<f64>> = p
                .states
                .iter()
                .zip(&p.priors)
                .enumerate()
                .map(|(i, (s, xi))| {
                    entry_to_coords(&system, s, *xi)
                        .map_err(|e| val(format!("state {}: {}", i, e)))
                })
                .collect::<Result<_, _>>()?;
            Some(
                StatePreparation::new(system.clone(), states)
                    .map_err(|e| val(e.to_string()))?,
            )
        }
    };

    let measurement = match &inst.measurement {
        None => None,
        Some(m) => {
            let effects: Vec<Vec<f64>> = m
                .effects
                .iter()
                .enumerate()
                .map(|(i, e)| {
                    entry_to_coords(&system, e, 1.0)
                        .map_err(|e| val(format!("effect {}: {}", i, e)))
                })
                .collect::<Result<_, _>>()?;
            Some(Measurement::new(system.clone(), effects).map_err(|e| val(e.to_string()))?)
        }
    };

    let symmetry = match &inst.symmetry {
        None => None,
        Some(s) => Some(build_symmetry(&system, s)?),
    };

    let (tolerance, max_iter, seed) = match &inst.solver {
        None => (1e-9, 20_000, 0),
        Some(s) => (
            s.tolerance.unwrap_or(1e-9),
            s.max_iter.unwrap_or(20_000),
            s.seed.unwrap_or(0),
        ),
    };
    if tolerance <= 0.0 {
        return Err(val("tolerance must be positive"));
    }

    Ok(Built {
        system,
        preparation,
        measurement,
        symmetry,
        class: inst.class.clone(),
        tolerance,
        max_iter,
        seed,
    })
}

fn build_system(model: &Model) -> Result<System, CliError> {
    match model {
        Model::Quantum { levels } => {
            if levels.is_empty() {
                return Err(val("quantum model needs at least one factor"));
            }
            let mut sys: Option<System> = None;
            for (i, n) in levels.iter().enumerate() {
                if *n < 2 {
                    return Err(val(format!("quantum factor with {} levels", n)));
                }
                let f = System::quantum(format!("S{}", i), *n);
                sys = Some(match sys {
                    None => f,
                    Some(s) => s.tensor(&f).map_err(|e| val(e.to_string()))?,
                });
            }
            Ok(sys.unwrap())
        }
        Model::Classical { outcomes } => {
            if *outcomes == 0 {
                return Err(val("classical model needs at least one outcome"));
            }
            Ok(System::classical("S0", *outcomes))
        }
        Model::GbitSquare => Ok(System::atomic("S0", ModelDescriptor::gbit_square())),
    }
}

/// Coordinates of a state/effect entry; states carry their prior as `scale`.
fn entry_to_coords(system: &System, entry: &Entry, scale: f64) -> Result<Vec<f64>, String> {
    match entry {
        Entry::Vector(v) => {
            if models::quantum_levels(system).is_some() {
                return Err("quantum entries must be complex matrices".into());
            }
            if v.len() != system.dim() {
                return Err(format!("expected {} coordinates, got {}", system.dim(), v.len()));
            }
            Ok(v.iter().map(|x| x * scale).collect())
        }
        Entry::Matrix(rows) => {
            let n = models::quantum_levels(system)
                .ok_or("matrix entries are only valid for quantum models")?;
            let h = complex_to_hermitian(rows, n)?;
            let basis = models::system_hermitian_basis(system).expect("all-quantum system");
            Ok(models::vectorize(&basis, &h.scale(scale)))
        }
    }
}

fn complex_to_raw(rows: &ComplexMatrix, n: usize) -> Result<Vec<Complex64>, String> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(format!("expected a {0}×{0} matrix", n));
    }
    Ok(rows
        .iter()
        .flatten()
        .map(|[re, im]| Complex64::new(*re, *im))
        .collect())
}

fn complex_to_hermitian(rows: &ComplexMatrix, n: usize) -> Result<HermitianMatrix, String> {
    let raw = complex_to_raw(rows, n)?;
    let h = HermitianMatrix::hermitian_part(n, &raw);
    for i in 0..n {
        for j in 0..n {
            if (h.get(i, j) - raw[i * n + j]).norm() > HERM_TOL {
                return Err("matrix is not Hermitian".into());
            }
        }
    }
    Ok(h)
}

fn build_symmetry(system: &System, s: &SymmetrySection) -> Result<SymmetrySetup, CliError> {
    let group = match &s.group {
        GroupSpec::Table { table } => {
            FiniteGroup::new(table.clone()).map_err(|e| val(e.to_string()))?
        }
        GroupSpec::Named { name, n } => match name.as_str() {
            "trivial" => FiniteGroup::trivial(),
            "cyclic" => FiniteGroup::cyclic(n.ok_or_else(|| val("cyclic group needs n"))?),
            "dihedral" => FiniteGroup::dihedral(n.ok_or_else(|| val("dihedral group needs n"))?),
            other => return Err(val(format!("unknown group name {:?}", other))),
        },
    };
    let mats: Vec<RealMatrix> = s
        .actions
        .iter()
        .enumerate()
        .map(|(g, a)| build_action(system, a).map_err(|e| val(format!("action {}: {}", g, e))))
        .collect::<Result<_, _>>()?;
    SymmetrySetup::new(
        system.clone(),
        group,
        s.outcome_permutations.clone(),
        mats,
    )
    .map_err(|e| val(e.to_string()))
}

fn build_action(system: &System, a: &ActionSpec) -> Result<RealMatrix, String> {
    match a {
        ActionSpec::Matrix { matrix } => {
            let d = system.dim();
            if matrix.len() != d || matrix.iter().any(|r| r.len() != d) {
                return Err(format!("expected a {0}×{0} coordinate matrix", d));
            }
            Ok(RealMatrix::from_rows(matrix))
        }
        ActionSpec::Unitary { unitary } => {
            let n = models::quantum_levels(system)
                .ok_or("unitary actions are only valid for quantum models")?;
            let u = complex_to_raw(unitary, n)?;
            Ok(models::quantum_process_matrix(system, system, |h| {
                conjugate(&u, h, n)
            }))
        }
    }
}

/// U·H·U† with U given as a raw row-major complex matrix.
fn conjugate(u: &[Complex64], h: &HermitianMatrix, n: usize) -> HermitianMatrix {
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n {
                for l in 0..n {
                    acc += u[i * n + k] * h.get(k, l) * u[j * n + l].conj();
                }
            }
            out[i * n + j] = acc;
        }
    }
    HermitianMatrix::hermitian_part(n, &out)
}

// ---------------------------------------------------------------------------
// core types -> file sections

fn cx(c: Complex64) -> Cx {
    [c.re, c.im]
}

fn coords_to_entry(system: &System, coords: &[f64]) -> Entry {
    match models::quantum_levels(system) {
        Some(n) => {
            let basis = models::system_hermitian_basis(system).expect("all-quantum system");
            let h = models::devectorize(&basis, coords);
            Entry::Matrix(
                (0..n)
                    .map(|i| (0..n).map(|j| cx(h.get(i, j))).collect())
                    .collect(),
            )
        }
        None => Entry::Vector(coords.to_vec()),
    }
}

/// Rebuilds a core measurement from a serialized section (used for report
/// self-validation and by `symmetrize`/`classes`/`pt-witness`).
pub fn build_measurement(
    system: &System,
    section: &MeasurementSection,
) -> Result<Measurement, CliError> {
    let effects: Vec<Vec<f64>> = section
        .effects
        .iter()
        .enumerate()
        .map(|(i, e)| {
            entry_to_coords(system, e, 1.0).map_err(|e| val(format!("effect {}: {}", i, e)))
        })
        .collect::<Result<_, _>>()?;
    Measurement::new(system.clone(), effects).map_err(|e| val(e.to_string()))
}

pub fn model_of_system(system: &System) -> Model {
    let factors = system.factors();
    if models::quantum_levels(system).is_some() {
        let levels = factors
            .iter()
            .map(|f| match f {
                ModelDescriptor::Quantum { levels } => *levels,
                _ => unreachable!(),
            })
            .collect();
        return Model::Quantum { levels };
    }
    match &factors[0] {
        ModelDescriptor::Classical { outcomes } if factors.len() == 1 => {
            Model::Classical { outcomes: *outcomes }
        }
        ModelDescriptor::Polytope(_) if factors.len() == 1 => Model::GbitSquare,
        _ => panic!("system has no file representation"),
    }
}

pub fn preparation_section(prep: &StatePreparation) -> PreparationSection {
    let priors = prep.priors();
    let states = prep
        .states()
        .iter()
        .zip(&priors)
        .map(|(s, xi)| {
            let scale = if *xi > 0.0 { 1.0 / xi } else { 1.0 };
            let normalized: Vec<f64> = s.iter().map(|x| x * scale).collect();
            coords_to_entry(prep.system(), &normalized)
        })
        .collect();
    PreparationSection { priors, states }
}

pub fn measurement_section(e: &Measurement) -> MeasurementSection {
    MeasurementSection {
        effects: e
            .effects()
            .iter()
            .map(|w| coords_to_entry(e.system(), w))
            .collect(),
    }
}

pub fn symmetry_section(setup: &SymmetrySetup, group: GroupSpec) -> SymmetrySection {
    let order = setup.group.order();
    let d = setup.system.dim();
    let actions = (0..order)
        .map(|g| {
            let m = setup.state_matrix(g);
            ActionSpec::Matrix {
                matrix: (0..d).map(|i| (0..d).map(|j| m.get(i, j)).collect()).collect(),
            }
        })
        .collect();
    SymmetrySection {
        group,
        outcome_permutations: (0..order).map(|g| setup.outcome_perm(g).to_vec()).collect(),
        actions,
    }
}

// ---------------------------------------------------------------------------
// scenario generation

/// Deterministic canonical instances. Parameterized names use parentheses:
/// `symmetric-pure(5)`, `classical-random(3,4,7)`.
pub fn generate_scenario(name: &str) -> Result<Instance, CliError> {
    let (base, args) = split_scenario_name(name)?;
    let unknown = || val(format!("unknown scenario {:?}", name));
    let inst = match (base, args.as_slice()) {
        ("helstrom", []) => from_parts(scenarios::helstrom(), None, None),
        ("trine", []) => {
            let (rho, setup) = scenarios::trine();
            from_parts(rho, Some((setup, cyclic(3))), None)
        }
        ("symmetric-pure", [n]) => {
            if *n < 2 {
                return Err(val("symmetric-pure needs n >= 2"));
            }
            let (rho, setup) = scenarios::symmetric_pure(*n as usize);
            from_parts(rho, Some((setup, cyclic(*n as usize))), None)
        }
        ("gbit-square", []) => {
            let (rho, setup) = scenarios::gbit_square();
            from_parts(rho, Some((setup, cyclic(4))), None)
        }
        ("classical-random", [m, d, seed]) => {
            if *m < 1 || *d < 1 {
                return Err(val("classical-random needs M >= 1 and d >= 1"));
            }
            let rho = scenarios::classical_random(*m as usize, *d as usize, *seed);
            let mut inst = from_parts(rho, None, None);
            inst.solver = Some(SolverSection {
                tolerance: None,
                max_iter: None,
                seed: Some(*seed),
            });
            inst
        }
        ("bell-measurement", []) => {
            let (rho, e) = scenarios::bell();
            from_parts(rho, None, Some(e))
        }
        _ => return Err(unknown()),
    };
    Ok(inst)
}

fn cyclic(n: usize) -> GroupSpec {
    GroupSpec::Named { name: "cyclic".into(), n: Some(n) }
}

fn from_parts(
    rho: StatePreparation,
    symmetry: Option<(SymmetrySetup, GroupSpec)>,
    measurement: Option<Measurement>,
) -> Instance {
    Instance {
        version: 1,
        model: model_of_system(rho.system()),
        preparation: Some(preparation_section(&rho)),
        measurement: measurement.as_ref().map(measurement_section),
        symmetry: symmetry.map(|(setup, g)| symmetry_section(&setup, g)),
        class: None,
        solver: None,
    }
}

fn split_scenario_name(name: &str) -> Result<(&str, Vec<u64>), CliError> {
    match name.find('(') {
        None => Ok((name, vec![])),
        Some(i) => {
            let inner = name[i..]
                .strip_prefix('(')
                .and_then(|s| s.strip_suffix(')'))
                .ok_or_else(|| val(format!("malformed scenario name {:?}", name)))?;
            let args = inner
                .split(',')
                .map(|a| a.trim().parse::<u64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| val(format!("scenario arguments in {:?}: {}", name, e)))?;
            Ok((&name[..i], args))
        }
    }
}
