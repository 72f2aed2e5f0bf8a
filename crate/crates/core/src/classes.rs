//! Restricted measurement classes on bipartite systems: sequential, LOCC,
//! separable, and PT measurements, with constructive inclusion transforms and
//! a partial-transpose violation witness on 2⊗2 and 2⊗3 quantum systems.

use crate::discrimination::Measurement;
use crate::kernel::{self, ExtendedProcess, System};
use crate::linalg::{self, HermitianMatrix, RealMatrix};
use crate::models::{self, ModelDescriptor};
use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

/// Classical message systems are capped at this dimension.
pub const MAX_MESSAGE_DIM: usize = 16;

/// Effects below this partial-transpose eigenvalue count as NPT.
const NPT_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum ClassesError {
    #[error("system mismatch: {0}")]
    SystemMismatch(String),
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("unsupported wiring: {0}")]
    UnsupportedWiring(String),
    #[error("class mismatch: {0}")]
    ClassMismatch(String),
    #[error("classical message dimension {0} exceeds the cap of {MAX_MESSAGE_DIM}")]
    MessageTooLarge(usize),
    #[error("every effect is PPT; no partial-transpose witness exists at these dimensions")]
    NotFound,
    #[error(transparent)]
    Kernel(#[from] kernel::KernelError),
    #[error(transparent)]
    Discrimination(#[from] crate::discrimination::DiscriminationError),
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
}

fn kron_vec(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut v = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            v.push(x * y);
        }
    }
    v
}

fn permuted_effects(effects: &[Vec<f64>], perm: &[usize]) -> Result<Vec<Vec<f64>>, ClassesError> {
    let m = effects.len();
    let mut seen = vec![false; m];
    if perm.len() != m || perm.iter().any(|&x| x >= m) {
        return Err(ClassesError::PreconditionFailed(
            "permutation length does not match outcome count".into(),
        ));
    }
    for &x in perm {
        if seen[x] {
            return Err(ClassesError::PreconditionFailed("not a permutation".into()));
        }
        seen[x] = true;
    }
    let mut out = vec![Vec::new(); m];
    for (m_old, e) in effects.iter().enumerate() {
        out[perm[m_old]] = e.clone();
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Sequential measurements
// ---------------------------------------------------------------------------

/// First party measures, transmits the outcome over a classical wire D, and
/// the second party applies the branch measurement selected by it.
#[derive(Debug, Clone)]
pub struct SequentialMeasurement {
    first: Measurement,
    branches: Vec<Measurement>,
    composite: Measurement,
}

/// Assembles e_m = Σ_i a_i ⊗ bⁱ_m via the controlled process D⊗B → C and
/// validates the composite on A⊗B.
pub fn make_sequential(
    first: &Measurement,
    branches: &[Measurement],
) -> Result<SequentialMeasurement, ClassesError> {
    let j = first.outcomes();
    if branches.len() != j {
        return Err(ClassesError::SystemMismatch(format!(
            "{} branches for a {}-outcome first measurement",
            branches.len(),
            j
        )));
    }
    if j > MAX_MESSAGE_DIM {
        return Err(ClassesError::MessageTooLarge(j));
    }
    let sys_b = branches[0].system().clone();
    let m_out = branches[0].outcomes();
    for b in branches {
        if *b.system() != sys_b || b.outcomes() != m_out {
            return Err(ClassesError::SystemMismatch(
                "branch measurements must share system and outcome count".into(),
            ));
        }
    }
    let sys_a = first.system().clone();
    let d = System::classical("D", j);

    // controlled process b: D⊗B → C, row m, column (i, y) = bⁱ_m[y]
    let dim_b = sys_b.dim();
    let mut ctrl = RealMatrix::zeros(m_out, j * dim_b);
    for (i, branch) in branches.iter().enumerate() {
        for (m, e) in branch.effects().iter().enumerate() {
            for (y, &v) in e.iter().enumerate() {
                ctrl.set(m, i * dim_b + y, v);
            }
        }
    }
    let ctrl = ExtendedProcess::new(
        d.tensor(&sys_b)?,
        System::classical("C", m_out),
        ctrl,
    )?;
    let composite_proc = first
        .as_process()
        .par(&ExtendedProcess::identity(&sys_b))?
        .then(&ctrl)?;
    let sys_ab = sys_a.tensor(&sys_b)?;
    let effects: Vec<Vec<f64>> = (0..m_out)
        .map(|m| composite_proc.matrix().row_slice(m).to_vec())
        .collect();
    let composite = Measurement::new(sys_ab, effects)?;
    Ok(SequentialMeasurement {
        first: first.clone(),
        branches: branches.to_vec(),
        composite,
    })
}

impl SequentialMeasurement {
    pub fn first(&self) -> &Measurement {
        &self.first
    }

    pub fn branches(&self) -> &[Measurement] {
        &self.branches
    }

    pub fn measurement(&self) -> &Measurement {
        &self.composite
    }

    /// Relabels outcomes by permuting every branch's outputs.
    pub fn permute_outcomes(&self, perm: &[usize]) -> Result<Self, ClassesError> {
        let branches: Vec<Measurement> = self
            .branches
            .iter()
            .map(|b| {
                Ok(Measurement::new_unchecked(
                    b.system().clone(),
                    permuted_effects(b.effects(), perm)?,
                ))
            })
            .collect::<Result<_, ClassesError>>()?;
        make_sequential(&self.first, &branches)
    }

    /// Class-preserving mixture: the first party flips a (p, 1−p) coin by
    /// enlarging D to the disjoint union of both message alphabets.
    pub fn convex_mix(&self, other: &Self, p: f64) -> Result<Self, ClassesError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(ClassesError::PreconditionFailed("p outside [0,1]".into()));
        }
        if self.first.system() != other.first.system()
            || self.branches[0].system() != other.branches[0].system()
            || self.composite.outcomes() != other.composite.outcomes()
        {
            return Err(ClassesError::ClassMismatch(
                "mixture requires matching systems and outcome counts".into(),
            ));
        }
        let mut first_effects: Vec<Vec<f64>> = self
            .first
            .effects()
            .iter()
            .map(|e| e.iter().map(|x| p * x).collect())
            .collect();
        first_effects.extend(
            other
                .first
                .effects()
                .iter()
                .map(|e| e.iter().map(|x| (1.0 - p) * x).collect::<Vec<f64>>()),
        );
        let first = Measurement::new_unchecked(self.first.system().clone(), first_effects);
        let mut branches = self.branches.clone();
        branches.extend(other.branches.iter().cloned());
        make_sequential(&first, &branches)
    }
}

// ---------------------------------------------------------------------------
// LOCC measurements
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Party {
    A,
    B,
}

/// One LOCC round: the acting party consumes its current local system together
/// with the incoming classical message and emits a kept local system plus an
/// outgoing classical message. Round processes for party A have shape
/// A⊗D → A′⊗D′; rounds for party B have shape D⊗B → D′⊗B′, which keeps the
/// global ordering A-part ⊗ D ⊗ B-part swap-free.
#[derive(Debug, Clone)]
pub struct LoccRound {
    pub party: Party,
    pub proc: ExtendedProcess,
    pub kept: System,
    pub msg: System,
}

#[derive(Debug, Clone)]
pub struct LoccMeasurement {
    sys_a: System,
    sys_b: System,
    rounds: Vec<LoccRound>,
    composite: Measurement,
}

impl LoccMeasurement {
    pub fn new(
        sys_a: System,
        sys_b: System,
        rounds: Vec<LoccRound>,
        outcomes: usize,
    ) -> Result<Self, ClassesError> {
        if rounds.is_empty() {
            return Err(ClassesError::PreconditionFailed("no rounds".into()));
        }
        let mut a_cur = sys_a.clone();
        let mut b_cur = sys_b.clone();
        let mut d_cur = System::trivial();
        let mut acc = ExtendedProcess::identity(&sys_a.tensor(&sys_b)?);
        for (k, round) in rounds.iter().enumerate() {
            if round
                .msg
                .factors()
                .iter()
                .any(|f| !matches!(f, ModelDescriptor::Classical { .. }))
            {
                return Err(ClassesError::UnsupportedWiring(format!(
                    "round {} message is not classical",
                    k
                )));
            }
            if round.msg.dim() > MAX_MESSAGE_DIM {
                return Err(ClassesError::MessageTooLarge(round.msg.dim()));
            }
            if !kernel::is_deterministic(&round.proc) {
                return Err(ClassesError::PreconditionFailed(format!(
                    "round {} process is not deterministic",
                    k
                )));
            }
            let (expected_in, expected_out, step) = match round.party {
                Party::A => (
                    a_cur.tensor(&d_cur)?,
                    round.kept.tensor(&round.msg)?,
                    round.proc.par(&ExtendedProcess::identity(&b_cur))?,
                ),
                Party::B => (
                    d_cur.tensor(&b_cur)?,
                    round.msg.tensor(&round.kept)?,
                    ExtendedProcess::identity(&a_cur).par(&round.proc)?,
                ),
            };
            if *round.proc.input() != expected_in || *round.proc.output() != expected_out {
                return Err(ClassesError::SystemMismatch(format!(
                    "round {} process shape does not match the protocol state",
                    k
                )));
            }
            match round.party {
                Party::A => a_cur = round.kept.clone(),
                Party::B => b_cur = round.kept.clone(),
            }
            d_cur = round.msg.clone();
            acc = acc.then(&step)?;
        }
        if !a_cur.is_trivial() || !b_cur.is_trivial() {
            return Err(ClassesError::UnsupportedWiring(
                "protocol must consume both local systems".into(),
            ));
        }
        if d_cur.dim() != outcomes {
            return Err(ClassesError::SystemMismatch(format!(
                "final message dimension {} differs from outcome count {}",
                d_cur.dim(),
                outcomes
            )));
        }
        let effects: Vec<Vec<f64>> = (0..outcomes)
            .map(|m| acc.matrix().row_slice(m).to_vec())
            .collect();
        let composite = Measurement::new(sys_a.tensor(&sys_b)?, effects)?;
        Ok(Self { sys_a, sys_b, rounds, composite })
    }

    pub fn rounds(&self) -> &[LoccRound] {
        &self.rounds
    }

    pub fn measurement(&self) -> &Measurement {
        &self.composite
    }

    pub fn sys_a(&self) -> &System {
        &self.sys_a
    }

    pub fn sys_b(&self) -> &System {
        &self.sys_b
    }

    /// Relabels outcomes by post-composing the final message with a
    /// permutation.
    pub fn permute_outcomes(&self, perm: &[usize]) -> Result<Self, ClassesError> {
        let mut rounds = self.rounds.clone();
        let last = rounds.last_mut().unwrap();
        let m = last.msg.dim();
        let mut t = RealMatrix::zeros(m, m);
        for (j, &pj) in perm.iter().enumerate() {
            t.set(pj, j, 1.0);
        }
        let relabel = ExtendedProcess::new(last.msg.clone(), last.msg.clone(), t)?;
        let post = match last.party {
            Party::A => ExtendedProcess::identity(&last.kept).par(&relabel)?,
            Party::B => relabel.par(&ExtendedProcess::identity(&last.kept))?,
        };
        last.proc = last.proc.then(&post)?;
        LoccMeasurement::new(
            self.sys_a.clone(),
            self.sys_b.clone(),
            rounds,
            self.composite.outcomes(),
        )
    }

    /// Class-preserving mixture of two protocols with identical round
    /// structure: the first round flips a classical coin that rides along the
    /// message wire and selects which protocol the later rounds execute.
    pub fn convex_mix(&self, other: &Self, p: f64) -> Result<Self, ClassesError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(ClassesError::PreconditionFailed("p outside [0,1]".into()));
        }
        let n = self.rounds.len();
        if self.sys_a != other.sys_a
            || self.sys_b != other.sys_b
            || n != other.rounds.len()
            || self.composite.outcomes() != other.composite.outcomes()
        {
            return Err(ClassesError::ClassMismatch(
                "mixture requires matching systems, round counts, and outcomes".into(),
            ));
        }
        for (r, s) in self.rounds.iter().zip(&other.rounds) {
            if r.party != s.party || r.kept != s.kept || r.msg != s.msg {
                return Err(ClassesError::ClassMismatch(
                    "mixture requires identical round structure".into(),
                ));
            }
        }
        if n == 1 {
            let mut rounds = self.rounds.clone();
            rounds[0].proc = rounds[0]
                .proc
                .scale(p)
                .add(&other.rounds[0].proc.scale(1.0 - p))?;
            return LoccMeasurement::new(
                self.sys_a.clone(),
                self.sys_b.clone(),
                rounds,
                self.composite.outcomes(),
            );
        }
        let contexts = round_contexts(&self.sys_a, &self.sys_b, &self.rounds);
        let mut rounds: Vec<LoccRound> = Vec::with_capacity(n);
        for (k, ((r, s), (local_in, d_in_sys))) in self
            .rounds
            .iter()
            .zip(&other.rounds)
            .zip(&contexts)
            .enumerate()
        {
            let d_out = r.msg.dim();
            let kept_dim = r.kept.dim();
            let local_dim = local_in.dim();
            let d_in = d_in_sys.dim();
            let last = k == n - 1;
            if !last && 2 * d_out > MAX_MESSAGE_DIM {
                return Err(ClassesError::MessageTooLarge(2 * d_out));
            }
            let (out_msg_dim, in_msg_dim) = (
                if last { d_out } else { 2 * d_out },
                if k == 0 { d_in } else { 2 * d_in },
            );
            let (rows, cols) = (kept_dim * out_msg_dim, local_dim * in_msg_dim);
            let mut mat = RealMatrix::zeros(rows, cols);
            for coin in 0..2usize {
                let (src, w) = if coin == 0 {
                    (r.proc.matrix(), p)
                } else {
                    (s.proc.matrix(), 1.0 - p)
                };
                for kk in 0..kept_dim {
                    for dd in 0..d_out {
                        for aa in 0..local_dim {
                            for d in 0..d_in {
                                let (row0, col0) = match r.party {
                                    Party::A => (kk * d_out + dd, aa * d_in + d),
                                    Party::B => (dd * kept_dim + kk, d * local_dim + aa),
                                };
                                let v = src.get(row0, col0);
                                if v == 0.0 {
                                    continue;
                                }
                                let msg_out = if last { dd } else { coin * d_out + dd };
                                let msg_in = if k == 0 { d } else { coin * d_in + d };
                                let (row, col) = match r.party {
                                    Party::A => (kk * out_msg_dim + msg_out, aa * in_msg_dim + msg_in),
                                    Party::B => (msg_out * kept_dim + kk, msg_in * local_dim + aa),
                                };
                                let weight = if k == 0 { w * v } else { v };
                                mat.set(row, col, mat.get(row, col) + weight);
                            }
                        }
                    }
                }
            }
            let msg = if last {
                r.msg.clone()
            } else {
                System::classical("D", 2 * d_out)
            };
            let d_in_mixed = if k == 0 {
                d_in_sys.clone()
            } else {
                System::classical("D", 2 * d_in)
            };
            let (input, output) = match r.party {
                Party::A => (local_in.tensor(&d_in_mixed)?, r.kept.tensor(&msg)?),
                Party::B => (d_in_mixed.tensor(local_in)?, msg.tensor(&r.kept)?),
            };
            rounds.push(LoccRound {
                party: r.party,
                proc: ExtendedProcess::new(input, output, mat)?,
                kept: r.kept.clone(),
                msg,
            });
        }
        LoccMeasurement::new(
            self.sys_a.clone(),
            self.sys_b.clone(),
            rounds,
            self.composite.outcomes(),
        )
    }
}

/// Per round, the acting party's current local system and the incoming
/// message system, obtained by replaying the protocol.
fn round_contexts(sys_a: &System, sys_b: &System, rounds: &[LoccRound]) -> Vec<(System, System)> {
    let mut a_cur = sys_a.clone();
    let mut b_cur = sys_b.clone();
    let mut d_cur = System::trivial();
    let mut out = Vec::with_capacity(rounds.len());
    for r in rounds {
        match r.party {
            Party::A => {
                out.push((a_cur.clone(), d_cur.clone()));
                a_cur = r.kept.clone();
            }
            Party::B => {
                out.push((b_cur.clone(), d_cur.clone()));
                b_cur = r.kept.clone();
            }
        }
        d_cur = r.msg.clone();
    }
    out
}

/// A sequential measurement is a two-round LOCC protocol.
pub fn seq_to_locc(sm: &SequentialMeasurement) -> Result<LoccMeasurement, ClassesError> {
    let sys_a = sm.first.system().clone();
    let sys_b = sm.branches[0].system().clone();
    let j = sm.first.outcomes();
    let m_out = sm.branches[0].outcomes();
    let d = System::classical("D", j);
    let c = System::classical("C", m_out);
    let round_a = LoccRound {
        party: Party::A,
        proc: ExtendedProcess::new(sys_a.clone(), d.clone(), {
            let rows: Vec<Vec<f64>> = sm.first.effects().to_vec();
            RealMatrix::from_rows(&rows)
        })?,
        kept: System::trivial(),
        msg: d.clone(),
    };
    let dim_b = sys_b.dim();
    let mut ctrl = RealMatrix::zeros(m_out, j * dim_b);
    for (i, branch) in sm.branches.iter().enumerate() {
        for (m, e) in branch.effects().iter().enumerate() {
            for (y, &v) in e.iter().enumerate() {
                ctrl.set(m, i * dim_b + y, v);
            }
        }
    }
    let round_b = LoccRound {
        party: Party::B,
        proc: ExtendedProcess::new(d.tensor(&sys_b)?, c, ctrl)?,
        kept: System::trivial(),
        msg: System::classical("C", m_out),
    };
    LoccMeasurement::new(sys_a, sys_b, vec![round_a, round_b], m_out)
}

// ---------------------------------------------------------------------------
// Separable measurements
// ---------------------------------------------------------------------------

/// A measurement carrying, for each outcome, an explicit conic decomposition
/// e_m = Σ_k w_k · (α_k ⊗ β_k) into products of local effects.
#[derive(Debug, Clone)]
pub struct SeparableMeasurement {
    sys_a: System,
    sys_b: System,
    terms: Vec<Vec<(f64, Vec<f64>, Vec<f64>)>>,
    composite: Measurement,
}

impl SeparableMeasurement {
    pub fn new(
        sys_a: System,
        sys_b: System,
        terms: Vec<Vec<(f64, Vec<f64>, Vec<f64>)>>,
    ) -> Result<Self, ClassesError> {
        let dim_ab = sys_a.dim() * sys_b.dim();
        let mut effects = Vec::with_capacity(terms.len());
        for (m, list) in terms.iter().enumerate() {
            let mut e = vec![0.0; dim_ab];
            for (w, alpha, beta) in list {
                if *w < 0.0 {
                    return Err(ClassesError::PreconditionFailed(format!(
                        "negative weight in outcome {}",
                        m
                    )));
                }
                let ca = models::contains_effect(&sys_a, alpha)
                    .map_err(|err| ClassesError::PreconditionFailed(err.to_string()))?;
                let cb = models::contains_effect(&sys_b, beta)
                    .map_err(|err| ClassesError::PreconditionFailed(err.to_string()))?;
                if !ca.in_cone || !cb.in_cone {
                    return Err(ClassesError::PreconditionFailed(format!(
                        "outcome {} has a factor outside its local effect cone",
                        m
                    )));
                }
                for (slot, v) in e.iter_mut().zip(kron_vec(alpha, beta)) {
                    *slot += w * v;
                }
            }
            effects.push(e);
        }
        let composite = Measurement::new(sys_a.tensor(&sys_b)?, effects)?;
        Ok(Self { sys_a, sys_b, terms, composite })
    }

    pub fn measurement(&self) -> &Measurement {
        &self.composite
    }

    pub fn terms(&self) -> &[Vec<(f64, Vec<f64>, Vec<f64>)>] {
        &self.terms
    }

    pub fn sys_a(&self) -> &System {
        &self.sys_a
    }

    pub fn sys_b(&self) -> &System {
        &self.sys_b
    }

    /// Largest deviation between stored composite effects and the effects
    /// reconstructed from the decomposition terms.
    pub fn reconstruction_residual(&self) -> f64 {
        let dim_ab = self.sys_a.dim() * self.sys_b.dim();
        let mut worst = 0.0f64;
        for (m, list) in self.terms.iter().enumerate() {
            let mut e = vec![0.0; dim_ab];
            for (w, alpha, beta) in list {
                for (slot, v) in e.iter_mut().zip(kron_vec(alpha, beta)) {
                    *slot += w * v;
                }
            }
            for (x, y) in e.iter().zip(&self.composite.effects()[m]) {
                worst = worst.max((x - y).abs());
            }
        }
        worst
    }

    pub fn permute_outcomes(&self, perm: &[usize]) -> Result<Self, ClassesError> {
        let m = self.terms.len();
        let _ = permuted_effects(self.composite.effects(), perm)?; // validates perm
        let mut terms = vec![Vec::new(); m];
        for (m_old, list) in self.terms.iter().enumerate() {
            terms[perm[m_old]] = list.clone();
        }
        Self::new(self.sys_a.clone(), self.sys_b.clone(), terms)
    }

    /// Mixture by concatenating weighted decompositions.
    pub fn convex_mix(&self, other: &Self, p: f64) -> Result<Self, ClassesError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(ClassesError::PreconditionFailed("p outside [0,1]".into()));
        }
        if self.sys_a != other.sys_a
            || self.sys_b != other.sys_b
            || self.terms.len() != other.terms.len()
        {
            return Err(ClassesError::ClassMismatch(
                "mixture requires matching systems and outcome counts".into(),
            ));
        }
        let terms: Vec<Vec<(f64, Vec<f64>, Vec<f64>)>> = self
            .terms
            .iter()
            .zip(&other.terms)
            .map(|(x, y)| {
                let mut list: Vec<(f64, Vec<f64>, Vec<f64>)> = x
                    .iter()
                    .map(|(w, a, b)| (p * w, a.clone(), b.clone()))
                    .collect();
                list.extend(
                    y.iter()
                        .map(|(w, a, b)| ((1.0 - p) * w, a.clone(), b.clone())),
                );
                list
            })
            .collect();
        Self::new(self.sys_a.clone(), self.sys_b.clone(), terms)
    }
}

/// Expands e_m = Σ_i a_i ⊗ bⁱ_m into one product term per (i, m).
pub fn seq_to_separable(sm: &SequentialMeasurement) -> Result<SeparableMeasurement, ClassesError> {
    let sys_a = sm.first.system().clone();
    let sys_b = sm.branches[0].system().clone();
    let m_out = sm.branches[0].outcomes();
    let terms: Vec<Vec<(f64, Vec<f64>, Vec<f64>)>> = (0..m_out)
        .map(|m| {
            sm.first
                .effects()
                .iter()
                .zip(&sm.branches)
                .map(|(a, branch)| (1.0, a.clone(), branch.effects()[m].clone()))
                .collect()
        })
        .collect();
    SeparableMeasurement::new(sys_a, sys_b, terms)
}

/// Expands the classical message wires of an LOCC protocol into index sums:
/// each message path contributes the product of its per-party blocks, a
/// product effect on A⊗B.
pub fn locc_to_separable(lm: &LoccMeasurement) -> Result<SeparableMeasurement, ClassesError> {
    let dim_a = lm.sys_a.dim();
    let dim_b = lm.sys_b.dim();
    // (message value, A-chain, B-chain); chains map the initial local system
    // to the current local system along this path.
    let mut paths: Vec<(usize, RealMatrix, RealMatrix)> = vec![(
        0,
        RealMatrix::identity(dim_a),
        RealMatrix::identity(dim_b),
    )];
    let mut a_cur = lm.sys_a.clone();
    let mut b_cur = lm.sys_b.clone();
    let mut d_dim = 1usize;
    for round in &lm.rounds {
        let msg_dim = round.msg.dim();
        let kept_dim = round.kept.dim();
        let mut next = Vec::with_capacity(paths.len() * msg_dim);
        match round.party {
            Party::A => {
                let local_dim = a_cur.dim();
                for (d, achain, bchain) in &paths {
                    for d_out in 0..msg_dim {
                        let mut block = RealMatrix::zeros(kept_dim, local_dim);
                        for kk in 0..kept_dim {
                            for aa in 0..local_dim {
                                block.set(
                                    kk,
                                    aa,
                                    round.proc.matrix().get(kk * msg_dim + d_out, aa * d_dim + d),
                                );
                            }
                        }
                        next.push((d_out, block.matmul(achain), bchain.clone()));
                    }
                }
                a_cur = round.kept.clone();
            }
            Party::B => {
                let local_dim = b_cur.dim();
                for (d, achain, bchain) in &paths {
                    for d_out in 0..msg_dim {
                        let mut block = RealMatrix::zeros(kept_dim, local_dim);
                        for kk in 0..kept_dim {
                            for bb in 0..local_dim {
                                block.set(
                                    kk,
                                    bb,
                                    round.proc.matrix().get(d_out * kept_dim + kk, d * local_dim + bb),
                                );
                            }
                        }
                        next.push((d_out, achain.clone(), block.matmul(bchain)));
                    }
                }
                b_cur = round.kept.clone();
            }
        }
        d_dim = msg_dim;
        paths = next;
    }
    let m_out = lm.composite.outcomes();
    let mut terms: Vec<Vec<(f64, Vec<f64>, Vec<f64>)>> = vec![Vec::new(); m_out];
    for (m, achain, bchain) in paths {
        // final chains are 1×dim rows: effects on the initial local systems
        let alpha = achain.row_slice(0).to_vec();
        let beta = bchain.row_slice(0).to_vec();
        if alpha.iter().all(|x| x.abs() < 1e-15) || beta.iter().all(|x| x.abs() < 1e-15) {
            continue;
        }
        terms[m].push((1.0, alpha, beta));
    }
    SeparableMeasurement::new(lm.sys_a.clone(), lm.sys_b.clone(), terms)
}

// ---------------------------------------------------------------------------
// PT measurements
// ---------------------------------------------------------------------------

fn split_b_system(sys_ab: &System, sys_a: &System) -> Result<System, ClassesError> {
    let fa = sys_a.factors();
    let fab = sys_ab.factors();
    if fab.len() < fa.len() || &fab[..fa.len()] != fa {
        return Err(ClassesError::SystemMismatch(
            "measurement system does not start with the process output system".into(),
        ));
    }
    let mut sys = System::trivial();
    for (i, f) in fab[fa.len()..].iter().enumerate() {
        sys = sys.tensor(&System::atomic(format!("B{}", i), f.clone()))?;
    }
    Ok(sys)
}

/// Validates that f̄ is deterministic and positive for effects (exactly on
/// polyhedral effect rays, on sampled effects for quantum systems).
pub fn validate_fbar(fbar: &ExtendedProcess) -> Result<(), ClassesError> {
    if !kernel::is_deterministic(fbar) {
        return Err(ClassesError::PreconditionFailed(
            "f̄ is not deterministic".into(),
        ));
    }
    let out = fbar.output().clone();
    let sample_effects: Vec<Vec<f64>> = if let Some(basis) = models::system_hermitian_basis(&out) {
        use rand::SeedableRng;
        let n = models::quantum_levels(&out).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        (0..50)
            .map(|_| models::vectorize(&basis, &models::random_pure_state(n, &mut rng)))
            .collect()
    } else {
        effect_ray_generators(&out)?
    };
    for w in &sample_effects {
        let img = RealMatrix::row(w).matmul(fbar.matrix());
        let check = models::contains_effect(fbar.input(), img.row_slice(0))
            .map_err(|err| ClassesError::PreconditionFailed(err.to_string()))?;
        if !check.in_cone {
            return Err(ClassesError::PreconditionFailed(
                "f̄ is not positive for effects on the sampled generator set".into(),
            ));
        }
    }
    Ok(())
}

fn effect_ray_generators(sys: &System) -> Result<Vec<Vec<f64>>, ClassesError> {
    let mut rays: Vec<Vec<f64>> = vec![vec![1.0]];
    for f in sys.factors() {
        let frays: Vec<Vec<f64>> = match f {
            ModelDescriptor::Classical { outcomes } => (0..*outcomes)
                .map(|i| {
                    let mut v = vec![0.0; *outcomes];
                    v[i] = 1.0;
                    v
                })
                .collect(),
            ModelDescriptor::Polytope(p) => p.effect_generators.clone(),
            ModelDescriptor::Quantum { .. } => {
                return Err(ClassesError::PreconditionFailed(
                    "no finite effect generators for quantum factors".into(),
                ))
            }
        };
        rays = rays
            .iter()
            .flat_map(|r| frays.iter().map(move |g| kron_vec(r, g)))
            .collect();
    }
    Ok(rays)
}

/// True iff e∘(f̄ ⊗ id_B) is still a measurement: every transformed effect
/// stays in the effect cone (the normalization is preserved automatically by
/// determinism of f̄).
pub fn check_pt(e: &Measurement, fbar: &ExtendedProcess) -> Result<bool, ClassesError> {
    validate_fbar(fbar)?;
    let sys_b = split_b_system(e.system(), fbar.output())?;
    let lifted = fbar.matrix().kron(&RealMatrix::identity(sys_b.dim()));
    let new_sys = fbar.input().tensor(&sys_b)?;
    let effects: Vec<Vec<f64>> = e
        .effects()
        .iter()
        .map(|em| RealMatrix::row(em).matmul(&lifted).row_slice(0).to_vec())
        .collect();
    Ok(Measurement::new(new_sys, effects).is_ok())
}

/// A deterministic positive-for-effects process that witnesses a
/// partial-transpose violation for one outcome of a measurement.
#[derive(Debug, Clone)]
pub struct PTWitnessReport {
    /// outcome whose effect is NPT
    pub outcome: usize,
    /// the pairing state v̄ on A⊗B (coordinates)
    pub vbar: Vec<f64>,
    /// ⟨e_m|v̄⟩ after the full-rank perturbation; strictly negative
    pub pairing: f64,
    /// v_B^{-1/2}, the normalizer applied on the B marginal
    pub normalizer: HermitianMatrix,
    /// the witnessing process f̄: A′→A
    pub fbar: ExtendedProcess,
    /// ‖⟨⟡|∘f̄ − ⟨⟡|‖_∞
    pub determinism_residual: f64,
    /// min over sampled product effects of ⟨b⊗b′|v̄⟩; ≥ −1e-10
    pub min_product_pairing: f64,
    /// most negative eigenvalue among the transformed effects of e∘(f̄⊗id)
    pub violation: f64,
}

/// Searches the outcomes of a 2⊗2 or 2⊗3 quantum measurement for an NPT
/// effect and builds the explicit PT-violating process from its
/// partial-transpose eigenvector.
pub fn pt_witness(e: &Measurement) -> Result<PTWitnessReport, ClassesError> {
    let dims: Vec<usize> = e
        .system()
        .factors()
        .iter()
        .map(|f| match f {
            ModelDescriptor::Quantum { levels } => Ok(*levels),
            _ => Err(ClassesError::PreconditionFailed(
                "pt_witness requires a bipartite quantum system".into(),
            )),
        })
        .collect::<Result<_, _>>()?;
    if dims.len() != 2 || dims[0] != 2 || (dims[1] != 2 && dims[1] != 3) {
        return Err(ClassesError::PreconditionFailed(
            "pt_witness is exact only on 2⊗2 and 2⊗3 systems".into(),
        ));
    }
    let (na, nb) = (dims[0], dims[1]);
    let basis_ab = models::system_hermitian_basis(e.system()).unwrap();

    for (m, em) in e.effects().iter().enumerate() {
        let effect = models::devectorize(&basis_ab, em);
        let pt = effect.partial_transpose(na, nb)?;
        let (vals, vecs) = linalg::eigh(&pt)?;
        if vals[0] >= -NPT_TOL {
            continue;
        }
        let phi: Vec<Complex64> = vecs[0].clone();
        let vbar0 = HermitianMatrix::outer(&phi).partial_transpose(na, nb)?;
        let pairing0 = effect.hs_inner(&vbar0); // equals vals[0]

        // full-rank fix: v̄ ← v̄ + c·(I_A/N_A)⊗I_B keeps the pairing negative
        let unit_a = HermitianMatrix::identity(na).scale(1.0 / na as f64);
        let bump = unit_a.kron(&HermitianMatrix::identity(nb));
        let denom = effect.hs_inner(&bump);
        let c = if denom > 0.0 {
            (1e-2f64).min(pairing0.abs() / (2.0 * denom))
        } else {
            1e-2
        };
        let vbar = vbar0.add(&bump.scale(c));
        let pairing = effect.hs_inner(&vbar);

        // The map kernel is v̄^{Γ_B} = |φ⟩⟨φ| + c·bump: positive semidefinite,
        // which makes f̄ positive for effects, while pairing the transformed
        // effects against the maximally entangled state reproduces ⟨e_m|v̄⟩.
        let kernel_k = vbar.partial_transpose(na, nb)?;
        let vb = kernel_k.partial_trace_a(na, nb)?;
        let normalizer = linalg::pinv_sqrt(&vb, 1e-14)?;

        // f̄(σ) = Tr_B[v̄^{Γ_B} (I_A ⊗ v_B^{-1/2} σ v_B^{-1/2})]
        let vbar_fn = kernel_k;
        let norm_fn = normalizer.clone();
        let map = move |sigma: &HermitianMatrix| -> HermitianMatrix {
            let gs = norm_fn.sandwich(sigma);
            let mut out = vec![Complex64::new(0.0, 0.0); na * na];
            for a in 0..na {
                for ap in 0..na {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for b in 0..nb {
                        for bp in 0..nb {
                            acc += vbar_fn.get(a * nb + b, ap * nb + bp) * gs.get(bp, b);
                        }
                    }
                    out[a * na + ap] = acc;
                }
            }
            HermitianMatrix::hermitian_part(na, &out)
        };
        let sys_aprime = System::quantum("A'", nb);
        let sys_a = System::quantum("A", na);
        let fmat = models::quantum_process_matrix(&sys_aprime, &sys_a, map);
        let fbar = ExtendedProcess::new(sys_aprime.clone(), sys_a, fmat)?;

        let u_out = models::system_unit_effect(fbar.output());
        let u_in = models::system_unit_effect(fbar.input());
        let det_row = RealMatrix::row(&u_out).matmul(fbar.matrix());
        let determinism_residual = det_row.max_abs_diff(&RealMatrix::row(&u_in));

        // block-positivity spot check of v̄ on sampled product effects
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        let mut min_product_pairing = f64::INFINITY;
        for _ in 0..200 {
            let pa = models::random_pure_state(na, &mut rng);
            let pb = models::random_pure_state(nb, &mut rng);
            min_product_pairing = min_product_pairing.min(pa.kron(&pb).hs_inner(&vbar));
        }

        // violation: most negative eigenvalue among transformed effects
        let sys_b = System::quantum("B", nb);
        let lifted = fbar.matrix().kron(&RealMatrix::identity(nb * nb));
        let new_sys = sys_aprime.tensor(&sys_b)?;
        let basis_new = models::system_hermitian_basis(&new_sys).unwrap();
        let violation = e
            .effects()
            .iter()
            .map(|ek| {
                let row = RealMatrix::row(ek).matmul(&lifted);
                models::devectorize(&basis_new, row.row_slice(0)).min_eigenvalue()
            })
            .fold(f64::INFINITY, f64::min);

        return Ok(PTWitnessReport {
            outcome: m,
            vbar: models::vectorize(&basis_ab, &vbar),
            pairing,
            normalizer,
            fbar,
            determinism_residual,
            min_product_pairing,
            violation,
        });
    }
    Err(ClassesError::NotFound)
}

/// A random reversible-positive deterministic process on a quantum system:
/// a convex mixture of unitary conjugations, each optionally composed with
/// the transpose.
pub fn random_positive_process<R: Rng>(sys: &System, rng: &mut R) -> ExtendedProcess {
    let n = models::quantum_levels(sys).expect("quantum system");
    let k = rng.gen_range(1..=3usize);
    let mut weights: Vec<f64> = (0..k).map(|_| rng.gen::<f64>() + 0.1).collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    let unitaries: Vec<Vec<Complex64>> = (0..k).map(|_| random_unitary(n, rng)).collect();
    let transposed: Vec<bool> = (0..k).map(|_| rng.gen_bool(0.5)).collect();
    let map = move |sigma: &HermitianMatrix| -> HermitianMatrix {
        let mut out = HermitianMatrix::zeros(n);
        for ((w, u), t) in weights.iter().zip(&unitaries).zip(&transposed) {
            let src = if *t {
                let mut s = HermitianMatrix::zeros(n);
                for i in 0..n {
                    for jj in 0..n {
                        s.set(i, jj, sigma.get(jj, i));
                    }
                }
                s
            } else {
                sigma.clone()
            };
            // U σ U†
            let mut usu = vec![Complex64::new(0.0, 0.0); n * n];
            for i in 0..n {
                for jj in 0..n {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for a in 0..n {
                        for b in 0..n {
                            acc += u[i * n + a] * src.get(a, b) * u[jj * n + b].conj();
                        }
                    }
                    usu[i * n + jj] = acc;
                }
            }
            out = out.add(&HermitianMatrix::hermitian_part(n, &usu).scale(*w));
        }
        out
    };
    let fmat = models::quantum_process_matrix(sys, sys, map);
    ExtendedProcess::new(sys.clone(), sys.clone(), fmat).expect("square transfer matrix")
}

fn random_unitary<R: Rng>(n: usize, rng: &mut R) -> Vec<Complex64> {
    // Gram-Schmidt on random complex columns
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for _ in 0..n {
        loop {
            let mut v: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect();
            for c in &cols {
                let overlap: Complex64 = c.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, ci) in v.iter_mut().zip(c) {
                    *vi -= overlap * ci;
                }
            }
            let norm: f64 = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-6 {
                for x in &mut v {
                    *x /= norm;
                }
                cols.push(v);
                break;
            }
        }
    }
    let mut u = vec![Complex64::new(0.0, 0.0); n * n];
    for (j, c) in cols.iter().enumerate() {
        for i in 0..n {
            u[i * n + j] = c[i];
        }
    }
    u
}

// ---------------------------------------------------------------------------
// Class-generic wrappers
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub enum ClassMeasurement {
    Sequential(SequentialMeasurement),
    Locc(LoccMeasurement),
    Separable(SeparableMeasurement),
}

impl ClassMeasurement {
    pub fn measurement(&self) -> &Measurement {
        match self {
            ClassMeasurement::Sequential(x) => x.measurement(),
            ClassMeasurement::Locc(x) => x.measurement(),
            ClassMeasurement::Separable(x) => x.measurement(),
        }
    }
}

pub fn permute_outcomes_in_class(
    x: &ClassMeasurement,
    perm: &[usize],
) -> Result<ClassMeasurement, ClassesError> {
    Ok(match x {
        ClassMeasurement::Sequential(s) => ClassMeasurement::Sequential(s.permute_outcomes(perm)?),
        ClassMeasurement::Locc(l) => ClassMeasurement::Locc(l.permute_outcomes(perm)?),
        ClassMeasurement::Separable(s) => ClassMeasurement::Separable(s.permute_outcomes(perm)?),
    })
}

pub fn convex_mix_in_class(
    x: &ClassMeasurement,
    y: &ClassMeasurement,
    p: f64,
) -> Result<ClassMeasurement, ClassesError> {
    Ok(match (x, y) {
        (ClassMeasurement::Sequential(a), ClassMeasurement::Sequential(b)) => {
            ClassMeasurement::Sequential(a.convex_mix(b, p)?)
        }
        (ClassMeasurement::Locc(a), ClassMeasurement::Locc(b)) => {
            ClassMeasurement::Locc(a.convex_mix(b, p)?)
        }
        (ClassMeasurement::Separable(a), ClassMeasurement::Separable(b)) => {
            ClassMeasurement::Separable(a.convex_mix(b, p)?)
        }
        _ => {
            return Err(ClassesError::ClassMismatch(
                "operands belong to different classes".into(),
            ))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrimination;
    use crate::scenarios;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn qubit(label: &str) -> System {
        System::quantum(label, 2)
    }

    fn z_measurement(sys: &System) -> Measurement {
        let basis = models::hermitian_basis(2);
        Measurement::new(
            sys.clone(),
            vec![
                models::vectorize(&basis, &HermitianMatrix::diag(&[1.0, 0.0])),
                models::vectorize(&basis, &HermitianMatrix::diag(&[0.0, 1.0])),
            ],
        )
        .unwrap()
    }

    fn max_effect_diff(x: &Measurement, y: &Measurement) -> f64 {
        x.effects()
            .iter()
            .zip(y.effects())
            .flat_map(|(a, b)| a.iter().zip(b).map(|(p, q)| (p - q).abs()))
            .fold(0.0, f64::max)
    }

    #[test]
    fn sequential_z_then_z_is_the_product_measurement() {
        let a = qubit("A");
        let b = qubit("B");
        let za = z_measurement(&a);
        let zb = z_measurement(&b);
        let sm = make_sequential(&za, &[zb.clone(), zb.clone()]).unwrap();
        // outcome m of the composite is the branch outcome; effects are
        // Σ_i |i⟩⟨i| ⊗ zb_m = I ⊗ zb_m
        let basis = models::system_hermitian_basis(sm.measurement().system()).unwrap();
        let e0 = models::devectorize(&basis, &sm.measurement().effects()[0]);
        let expected = HermitianMatrix::identity(2).kron(&HermitianMatrix::diag(&[1.0, 0.0]));
        assert!(e0.max_abs_diff(&expected) < 1e-12);
    }

    fn zz_four_outcome() -> SequentialMeasurement {
        // branch i relabels so that the composite outcome is 2i + k
        let a = qubit("A");
        let b = qubit("B");
        let za = z_measurement(&a);
        let basis = models::hermitian_basis(2);
        let zero = models::vectorize(&basis, &HermitianMatrix::diag(&[1.0, 0.0]));
        let one = models::vectorize(&basis, &HermitianMatrix::diag(&[0.0, 1.0]));
        let nul = vec![0.0; 4];
        let b0 = Measurement::new_unchecked(
            b.clone(),
            vec![zero.clone(), one.clone(), nul.clone(), nul.clone()],
        );
        let b1 = Measurement::new_unchecked(b, vec![nul.clone(), nul, zero, one]);
        make_sequential(&za, &[b0, b1]).unwrap()
    }

    #[test]
    fn sequential_zz_four_outcomes_and_trivial_message() {
        let sm = zz_four_outcome();
        assert_eq!(sm.measurement().outcomes(), 4);
        let basis = models::system_hermitian_basis(sm.measurement().system()).unwrap();
        let e2 = models::devectorize(&basis, &sm.measurement().effects()[2]);
        let expected =
            HermitianMatrix::diag(&[0.0, 1.0]).kron(&HermitianMatrix::diag(&[1.0, 0.0]));
        assert!(e2.max_abs_diff(&expected) < 1e-12);

        // D of dimension 1: trivial first measurement gives a product measurement
        let a = qubit("A");
        let ua = Measurement::guess(&a, 1, 0);
        let zb = z_measurement(&qubit("B"));
        let sm1 = make_sequential(&ua, &[zb.clone()]).unwrap();
        let basis1 = models::system_hermitian_basis(sm1.measurement().system()).unwrap();
        let e0 = models::devectorize(&basis1, &sm1.measurement().effects()[0]);
        let expected =
            HermitianMatrix::identity(2).kron(&HermitianMatrix::diag(&[1.0, 0.0]));
        assert!(e0.max_abs_diff(&expected) < 1e-12);
    }

    fn random_sequential(rng: &mut ChaCha8Rng) -> SequentialMeasurement {
        let a = qubit("A");
        let b = qubit("B");
        let first = discrimination::random_measurement(&a, 2, rng).unwrap();
        let branches: Vec<Measurement> = (0..2)
            .map(|_| discrimination::random_measurement(&b, 2, rng).unwrap())
            .collect();
        make_sequential(&first, &branches).unwrap()
    }

    #[test]
    fn seq_to_separable_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let sm = random_sequential(&mut rng);
            let sep = seq_to_separable(&sm).unwrap();
            assert!(max_effect_diff(sep.measurement(), sm.measurement()) < 1e-12);
            assert!(sep.reconstruction_residual() < 1e-12);
        }
    }

    #[test]
    fn seq_to_locc_roundtrip_and_locc_to_separable() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..5 {
            let sm = random_sequential(&mut rng);
            let lm = seq_to_locc(&sm).unwrap();
            assert!(max_effect_diff(lm.measurement(), sm.measurement()) < 1e-12);
            let sep = locc_to_separable(&lm).unwrap();
            assert!(max_effect_diff(sep.measurement(), sm.measurement()) < 1e-12);
            let sep2 = seq_to_separable(&sm).unwrap();
            assert!(max_effect_diff(sep.measurement(), sep2.measurement()) < 1e-12);
        }
    }

    /// Three-round protocol: A measures coarsely, B measures, then A finishes
    /// on a kept qubit. Exercises non-destructive rounds and message passing.
    fn three_round_protocol(rng: &mut ChaCha8Rng) -> LoccMeasurement {
        let a = qubit("A");
        let b = qubit("B");
        let d2 = System::classical("D", 2);
        // Round 1 (A): keep the qubit, announce a coin that depends on nothing
        // (a classical preparation): ρ ↦ ρ ⊗ (q|0⟩ + (1−q)|1⟩).
        let q = 0.25 + 0.5 * rand::Rng::gen::<f64>(rng);
        let id4 = RealMatrix::identity(4);
        let mut coin_mat = RealMatrix::zeros(8, 4);
        for i in 0..4 {
            for j in 0..4 {
                coin_mat.set(i * 2, j, q * id4.get(i, j));
                coin_mat.set(i * 2 + 1, j, (1.0 - q) * id4.get(i, j));
            }
        }
        let round1 = LoccRound {
            party: Party::A,
            proc: ExtendedProcess::new(a.clone(), a.tensor(&d2).unwrap(), coin_mat).unwrap(),
            kept: a.clone(),
            msg: d2.clone(),
        };
        // Round 2 (B): measure with a basis depending on the coin.
        let mb0 = discrimination::random_measurement(&b, 2, rng).unwrap();
        let mb1 = discrimination::random_measurement(&b, 2, rng).unwrap();
        let mut ctrl = RealMatrix::zeros(2, 2 * 4);
        for (c, mb) in [&mb0, &mb1].iter().enumerate() {
            for (m, e) in mb.effects().iter().enumerate() {
                for (y, &v) in e.iter().enumerate() {
                    ctrl.set(m, c * 4 + y, v);
                }
            }
        }
        let round2 = LoccRound {
            party: Party::B,
            proc: ExtendedProcess::new(
                d2.tensor(&b).unwrap(),
                System::classical("D", 2),
                ctrl,
            )
            .unwrap(),
            kept: System::trivial(),
            msg: System::classical("D", 2),
        };
        // Round 3 (A): measure the kept qubit conditioned on B's outcome,
        // and merge into 4 outcomes m = 2·(B msg) + (A outcome).
        let ma0 = discrimination::random_measurement(&a, 2, rng).unwrap();
        let ma1 = discrimination::random_measurement(&a, 2, rng).unwrap();
        let mut fin = RealMatrix::zeros(4, 4 * 2);
        for (c, ma) in [&ma0, &ma1].iter().enumerate() {
            for (k, e) in ma.effects().iter().enumerate() {
                for (y, &v) in e.iter().enumerate() {
                    fin.set(2 * c + k, y * 2 + c, v);
                }
            }
        }
        let round3 = LoccRound {
            party: Party::A,
            proc: ExtendedProcess::new(
                a.tensor(&System::classical("D", 2)).unwrap(),
                System::classical("C", 4),
                fin,
            )
            .unwrap(),
            kept: System::trivial(),
            msg: System::classical("C", 4),
        };
        LoccMeasurement::new(a, b, vec![round1, round2, round3], 4).unwrap()
    }

    #[test]
    fn multi_round_locc_expands_to_separable() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let lm = three_round_protocol(&mut rng);
            let sep = locc_to_separable(&lm).unwrap();
            assert!(max_effect_diff(sep.measurement(), lm.measurement()) < 1e-12);
        }
    }

    #[test]
    fn check_pt_identity_and_random_positive_maps() {
        let (_, bell_meas) = scenarios::bell();
        let id = ExtendedProcess::identity(&qubit("A"));
        assert!(check_pt(&bell_meas, &id).unwrap());

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let sm = random_sequential(&mut rng);
        let sep = seq_to_separable(&sm).unwrap();
        for _ in 0..10 {
            let fbar = random_positive_process(&qubit("A"), &mut rng);
            assert!(check_pt(sep.measurement(), &fbar).unwrap());
        }
    }

    #[test]
    fn pt_witness_on_bell_measurement() {
        let (_, bell_meas) = scenarios::bell();
        let report = pt_witness(&bell_meas).unwrap();
        assert!(report.pairing < -0.2, "pairing {}", report.pairing);
        assert!(report.determinism_residual < 1e-10);
        assert!(report.min_product_pairing > -1e-10);
        assert!(report.violation <= -0.1, "violation {}", report.violation);
        assert!(!check_pt(&bell_meas, &report.fbar).unwrap());
    }

    #[test]
    fn pt_witness_not_found_for_product_measurement() {
        let sm = zz_four_outcome();
        assert!(matches!(
            pt_witness(sm.measurement()),
            Err(ClassesError::NotFound)
        ));
    }

    #[test]
    fn pt_witness_on_noisy_bell() {
        let (_, bell_meas) = scenarios::bell();
        let sys = bell_meas.system().clone();
        let basis = models::system_hermitian_basis(&sys).unwrap();
        let noise = models::vectorize(
            &basis,
            &HermitianMatrix::identity(4).scale(0.25),
        );
        let p = 0.1;
        let effects: Vec<Vec<f64>> = bell_meas
            .effects()
            .iter()
            .map(|e| {
                e.iter()
                    .zip(&noise)
                    .map(|(x, n)| (1.0 - p) * x + p * n)
                    .collect()
            })
            .collect();
        let noisy = Measurement::new(sys, effects).unwrap();
        let report = pt_witness(&noisy).unwrap();
        assert!(report.violation < 0.0);
        assert!(!check_pt(&noisy, &report.fbar).unwrap());
    }

    #[test]
    fn permutations_preserve_class_and_relabel_effects() {
        let sm = zz_four_outcome();
        let idp = sm.permute_outcomes(&[0, 1, 2, 3]).unwrap();
        assert!(max_effect_diff(idp.measurement(), sm.measurement()) < 1e-12);

        let perm = [1usize, 0, 3, 2];
        let sp = sm.permute_outcomes(&perm).unwrap();
        for m in 0..4 {
            for (x, y) in sm.measurement().effects()[m]
                .iter()
                .zip(&sp.measurement().effects()[perm[m]])
            {
                assert!((x - y).abs() < 1e-12);
            }
        }

        let lm = seq_to_locc(&sm).unwrap();
        let lp = lm.permute_outcomes(&perm).unwrap();
        assert!(max_effect_diff(lp.measurement(), sp.measurement()) < 1e-12);

        let sep = seq_to_separable(&sm).unwrap();
        let sepp = sep.permute_outcomes(&perm).unwrap();
        assert!(max_effect_diff(sepp.measurement(), sp.measurement()) < 1e-12);
    }

    #[test]
    fn convex_mixtures_stay_in_class_and_match_effectwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let x = random_sequential(&mut rng);
        let y = random_sequential(&mut rng);
        let p = 0.3;
        let mixed = x.convex_mix(&y, p).unwrap();
        assert_eq!(mixed.first().outcomes(), 4); // D doubles
        for m in 0..2 {
            for (i, v) in mixed.measurement().effects()[m].iter().enumerate() {
                let expected = p * x.measurement().effects()[m][i]
                    + (1.0 - p) * y.measurement().effects()[m][i];
                assert!((v - expected).abs() < 1e-12);
            }
        }
        let all_x = x.convex_mix(&y, 1.0).unwrap();
        assert!(max_effect_diff(all_x.measurement(), x.measurement()) < 1e-12);

        let lx = seq_to_locc(&x).unwrap();
        let ly = seq_to_locc(&y).unwrap();
        let lmix = lx.convex_mix(&ly, p).unwrap();
        assert!(max_effect_diff(lmix.measurement(), mixed.measurement()) < 1e-12);

        let sx = seq_to_separable(&x).unwrap();
        let sy = seq_to_separable(&y).unwrap();
        let smix = sx.convex_mix(&sy, p).unwrap();
        assert!(max_effect_diff(smix.measurement(), mixed.measurement()) < 1e-12);
        assert_eq!(smix.terms()[0].len(), sx.terms()[0].len() + sy.terms()[0].len());
    }
}
