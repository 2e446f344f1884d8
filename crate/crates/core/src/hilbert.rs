//! States and operators for the four-level emitter (hole spin ground states
//! plus trion excited states) optionally tensored with a register of time-bin
//! photon modes.
//!
//! The emitter basis order is (|h>, |hbar>, |T>, |Tbar>). A register of `n`
//! time bins is a tensor factor of dimension 2^n in which bit `k` of the basis
//! index is the occupancy of bin tau = k+1 (each bin holds zero or one photon;
//! multi-photon occupancy of a bin is handled statistically in the dynamics
//! layer, never in the register). Full basis index = emitter * 2^n + bits.
//! Partial traces may drop the emitter factor, leaving a register-only state.

use crate::linalg;
use crate::{Error, Result};
use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

pub const EMITTER_DIM: usize = 4;

const NORM_TOL: f64 = 1e-9;
const HERM_TOL: f64 = 1e-12;
const PSD_TOL: f64 = -1e-9;

/// The four emitter levels: Zeeman-split hole spin ground states and trion
/// excited states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    /// Ground hole spin |h>.
    H,
    /// Ground hole spin |hbar>.
    HBar,
    /// Trion |T>.
    T,
    /// Trion |Tbar>.
    TBar,
}

impl Level {
    pub const ALL: [Level; 4] = [Level::H, Level::HBar, Level::T, Level::TBar];

    pub fn index(self) -> usize {
        match self {
            Level::H => 0,
            Level::HBar => 1,
            Level::T => 2,
            Level::TBar => 3,
        }
    }

    pub fn from_index(i: usize) -> Option<Level> {
        Level::ALL.get(i).copied()
    }

    pub fn is_ground(self) -> bool {
        matches!(self, Level::H | Level::HBar)
    }

    pub fn is_trion(self) -> bool {
        !self.is_ground()
    }

    pub fn label(self) -> &'static str {
        match self {
            Level::H => "h",
            Level::HBar => "hbar",
            Level::T => "T",
            Level::TBar => "Tbar",
        }
    }
}

/// Vertical transitions are spin-preserving and cavity-coupled; diagonal
/// transitions cross the spin branches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransitionClass {
    Vertical,
    Diagonal,
}

/// One of the four optical decay channels of the double-lambda system.
///
/// `detuning` is the emission frequency offset (rad/ns) from the driven
/// vertical |T> -> |hbar> transition, which fixes the frequency reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub from: Level,
    pub to: Level,
    pub class: TransitionClass,
    pub detuning: f64,
}

impl Transition {
    /// Build a transition between a trion level and a ground level; the class
    /// is fixed by the level pair.
    pub fn new(from: Level, to: Level, detuning: f64) -> Result<Transition> {
        if !from.is_trion() || !to.is_ground() {
            return Err(Error::InvalidState(format!(
                "transition must decay trion -> ground, got {} -> {}",
                from.label(),
                to.label()
            )));
        }
        let class = match (from, to) {
            (Level::T, Level::HBar) | (Level::TBar, Level::H) => TransitionClass::Vertical,
            _ => TransitionClass::Diagonal,
        };
        Ok(Transition { from, to, class, detuning })
    }

    /// The cavity-enhanced vertical |T> -> |hbar> transition used for drive
    /// and readout; the frequency reference, so its detuning is zero.
    pub fn enhanced() -> Transition {
        Transition {
            from: Level::T,
            to: Level::HBar,
            class: TransitionClass::Vertical,
            detuning: 0.0,
        }
    }

    /// All four decay channels with detunings fixed by the ground (hole) and
    /// trion Zeeman splittings (rad/ns).
    pub fn table(hole_splitting: f64, trion_splitting: f64) -> [Transition; 4] {
        let wh = hole_splitting;
        let wt = trion_splitting;
        [
            Transition::enhanced(),
            Transition {
                from: Level::T,
                to: Level::H,
                class: TransitionClass::Diagonal,
                detuning: -wh,
            },
            Transition {
                from: Level::TBar,
                to: Level::H,
                class: TransitionClass::Vertical,
                detuning: wt - wh,
            },
            Transition {
                from: Level::TBar,
                to: Level::HBar,
                class: TransitionClass::Diagonal,
                detuning: wt,
            },
        ]
    }

    pub fn label(&self) -> String {
        format!("{}->{}", self.from.label(), self.to.label())
    }
}

#[derive(Debug, Clone)]
enum StateData {
    Pure(Array1<C64>),
    Density(Array2<C64>),
}

/// Tensor-factor layout of a state: the emitter factor may be absent after a
/// partial trace over it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub emitter: bool,
    pub bins: usize,
}

impl Dims {
    pub fn total(&self) -> usize {
        (if self.emitter { EMITTER_DIM } else { 1 }) << self.bins
    }
}

/// A pure state vector or density matrix over emitter x photon register.
#[derive(Debug, Clone)]
pub struct QuantumState {
    data: StateData,
    dims: Dims,
}

/// Tensor factor selector for [`partial_trace`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    Emitter,
    Photons,
}

impl QuantumState {
    /// Pure basis state: emitter in `level`, photon register in vacuum.
    pub fn basis(level: Level, bins: usize) -> QuantumState {
        let dims = Dims { emitter: true, bins };
        let mut v = Array1::zeros(dims.total());
        v[level.index() << bins] = C64::new(1.0, 0.0);
        QuantumState { data: StateData::Pure(v), dims }
    }

    /// Pure emitter (x register) state from raw amplitudes; unit norm within
    /// 1e-9 required.
    pub fn from_pure(amplitudes: Array1<C64>, bins: usize) -> Result<QuantumState> {
        Self::pure_with_dims(amplitudes, Dims { emitter: true, bins })
    }

    /// Pure register-only state (no emitter factor).
    pub fn from_photon_pure(amplitudes: Array1<C64>, bins: usize) -> Result<QuantumState> {
        Self::pure_with_dims(amplitudes, Dims { emitter: false, bins })
    }

    fn pure_with_dims(amplitudes: Array1<C64>, dims: Dims) -> Result<QuantumState> {
        if amplitudes.len() != dims.total() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} amplitudes, got {}",
                dims.total(),
                amplitudes.len()
            )));
        }
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("pure state norm {norm} not 1")));
        }
        Ok(QuantumState { data: StateData::Pure(amplitudes), dims })
    }

    /// Density matrix over emitter (x register); Hermitian within 1e-12, unit
    /// trace within 1e-9, eigenvalues >= -1e-9 required.
    pub fn from_density(rho: Array2<C64>, bins: usize) -> Result<QuantumState> {
        Self::density_with_dims(rho, Dims { emitter: true, bins })
    }

    /// Register-only density matrix.
    pub fn from_photon_density(rho: Array2<C64>, bins: usize) -> Result<QuantumState> {
        Self::density_with_dims(rho, Dims { emitter: false, bins })
    }

    fn density_with_dims(rho: Array2<C64>, dims: Dims) -> Result<QuantumState> {
        let dim = dims.total();
        if rho.nrows() != dim || rho.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "expected {dim}x{dim} density matrix, got {}x{}",
                rho.nrows(),
                rho.ncols()
            )));
        }
        for i in 0..dim {
            for j in i..dim {
                if (rho[(i, j)] - rho[(j, i)].conj()).norm() > HERM_TOL {
                    return Err(Error::InvalidState(format!(
                        "density matrix not Hermitian at ({i},{j})"
                    )));
                }
            }
        }
        let trace: C64 = (0..dim).map(|i| rho[(i, i)]).sum();
        if (trace.re - 1.0).abs() > NORM_TOL || trace.im.abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("density matrix trace {trace} not 1")));
        }
        let (vals, _) = linalg::hermitian_eigen(&rho);
        if vals.iter().any(|&v| v < PSD_TOL) {
            return Err(Error::InvalidState(format!(
                "density matrix has negative eigenvalue {}",
                vals[0]
            )));
        }
        Ok(QuantumState { data: StateData::Density(rho), dims })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn photon_bins(&self) -> usize {
        self.dims.bins
    }

    pub fn photon_dim(&self) -> usize {
        1 << self.dims.bins
    }

    pub fn has_emitter(&self) -> bool {
        self.dims.emitter
    }

    pub fn dim(&self) -> usize {
        self.dims.total()
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.data, StateData::Pure(_))
    }

    /// Pure amplitudes, if this is a pure state.
    pub fn amplitudes(&self) -> Option<&Array1<C64>> {
        match &self.data {
            StateData::Pure(v) => Some(v),
            StateData::Density(_) => None,
        }
    }

    /// Density-matrix form (pure states are promoted).
    pub fn density(&self) -> Array2<C64> {
        match &self.data {
            StateData::Pure(v) => {
                let n = v.len();
                let mut rho = Array2::zeros((n, n));
                for i in 0..n {
                    for j in 0..n {
                        rho[(i, j)] = v[i] * v[j].conj();
                    }
                }
                rho
            }
            StateData::Density(m) => m.clone(),
        }
    }

    /// Vector norm for pure states, trace for density matrices.
    pub fn norm(&self) -> f64 {
        match &self.data {
            StateData::Pure(v) => v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
            StateData::Density(m) => (0..m.nrows()).map(|i| m[(i, i)].re).sum(),
        }
    }

    /// Population of each emitter level (photon register traced out).
    pub fn emitter_populations(&self) -> [f64; 4] {
        assert!(self.dims.emitter, "state has no emitter factor");
        let pd = self.photon_dim();
        let mut pops = [0.0; 4];
        match &self.data {
            StateData::Pure(v) => {
                for e in 0..EMITTER_DIM {
                    for b in 0..pd {
                        pops[e] += v[e * pd + b].norm_sqr();
                    }
                }
            }
            StateData::Density(m) => {
                for e in 0..EMITTER_DIM {
                    for b in 0..pd {
                        let i = e * pd + b;
                        pops[e] += m[(i, i)].re;
                    }
                }
            }
        }
        pops
    }

    /// Pure-state amplitude of |level>|bits>.
    pub fn amplitude(&self, level: Level, bits: usize) -> Option<C64> {
        if !self.dims.emitter {
            return None;
        }
        match &self.data {
            StateData::Pure(v) => Some(v[level.index() * self.photon_dim() + bits]),
            StateData::Density(_) => None,
        }
    }

    /// Canonical global phase: the first amplitude of magnitude > 1e-12 is
    /// made real non-negative. Density matrices are unchanged.
    pub fn canonicalized(&self) -> QuantumState {
        match &self.data {
            StateData::Pure(v) => {
                let mut out = v.clone();
                if let Some(z) = v.iter().find(|z| z.norm() > 1e-12) {
                    let phase = z / z.norm();
                    out.mapv_inplace(|a| a * phase.conj());
                }
                QuantumState { data: StateData::Pure(out), dims: self.dims }
            }
            StateData::Density(_) => self.clone(),
        }
    }

    /// |<a|b>|^2 for pure states, Uhlmann fidelity (Tr sqrt(sqrt(r) s sqrt(r)))^2
    /// for mixed cases.
    pub fn fidelity(&self, other: &QuantumState) -> Result<f64> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch(format!(
                "fidelity between dims {:?} and {:?}",
                self.dims, other.dims
            )));
        }
        let f = match (&self.data, &other.data) {
            (StateData::Pure(a), StateData::Pure(b)) => {
                let ov: C64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
                ov.norm_sqr()
            }
            (StateData::Pure(a), StateData::Density(m))
            | (StateData::Density(m), StateData::Pure(a)) => {
                // <psi| rho |psi>
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..a.len() {
                    for j in 0..a.len() {
                        acc += a[i].conj() * m[(i, j)] * a[j];
                    }
                }
                acc.re
            }
            (StateData::Density(r), StateData::Density(s)) => {
                let sr = linalg::sqrtm_psd(r);
                let inner = sr.dot(s).dot(&sr);
                let root = linalg::sqrtm_psd(&inner);
                let tr: f64 = (0..root.nrows()).map(|i| root[(i, i)].re).sum();
                tr * tr
            }
        };
        Ok(f.clamp(0.0, 1.0))
    }

    /// Reduced density matrix over the kept factor; trace preserved. Pure
    /// inputs are promoted to density matrices.
    pub fn partial_trace(&self, keep: Factor) -> QuantumState {
        assert!(self.dims.emitter, "partial trace requires both factors");
        let pd = self.photon_dim();
        let rho = self.density();
        match keep {
            Factor::Emitter => {
                let mut out = Array2::zeros((EMITTER_DIM, EMITTER_DIM));
                for e1 in 0..EMITTER_DIM {
                    for e2 in 0..EMITTER_DIM {
                        let mut acc = C64::new(0.0, 0.0);
                        for b in 0..pd {
                            acc += rho[(e1 * pd + b, e2 * pd + b)];
                        }
                        out[(e1, e2)] = acc;
                    }
                }
                QuantumState {
                    data: StateData::Density(out),
                    dims: Dims { emitter: true, bins: 0 },
                }
            }
            Factor::Photons => {
                let mut out = Array2::zeros((pd, pd));
                for b1 in 0..pd {
                    for b2 in 0..pd {
                        let mut acc = C64::new(0.0, 0.0);
                        for e in 0..EMITTER_DIM {
                            acc += rho[(e * pd + b1, e * pd + b2)];
                        }
                        out[(b1, b2)] = acc;
                    }
                }
                QuantumState {
                    data: StateData::Density(out),
                    dims: Dims { emitter: false, bins: self.dims.bins },
                }
            }
        }
    }

    pub fn expectation(&self, op: &Operator) -> Result<C64> {
        if op.dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "operator dim {} vs state dim {}",
                op.dim(),
                self.dim()
            )));
        }
        Ok(match &self.data {
            StateData::Pure(v) => {
                let mv = op.matrix.dot(v);
                v.iter().zip(mv.iter()).map(|(a, b)| a.conj() * b).sum()
            }
            StateData::Density(m) => {
                let prod = op.matrix.dot(m);
                (0..prod.nrows()).map(|i| prod[(i, i)]).sum()
            }
        })
    }
}

/// Pure basis state of the bare emitter (no photon register).
pub fn basis_state(level: Level) -> QuantumState {
    QuantumState::basis(level, 0)
}

/// Normalized linear combination of pure states sharing dimensions.
///
/// Errors if any term is mixed, dimensions differ, or the combination is the
/// zero vector.
pub fn superpose(terms: &[(C64, &QuantumState)]) -> Result<QuantumState> {
    let (_, first) = terms
        .first()
        .ok_or_else(|| Error::InvalidState("superpose of no terms".into()))?;
    let dims = first.dims();
    let mut acc: Array1<C64> = Array1::zeros(dims.total());
    for (coeff, state) in terms {
        if state.dims() != dims {
            return Err(Error::DimensionMismatch("superpose over mixed dimensions".into()));
        }
        let v = state
            .amplitudes()
            .ok_or_else(|| Error::InvalidState("superpose requires pure states".into()))?;
        for i in 0..dims.total() {
            acc[i] += coeff * v[i];
        }
    }
    let norm = acc.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm < 1e-12 {
        return Err(Error::InvalidState("superposition is the zero vector".into()));
    }
    acc.mapv_inplace(|z| z / norm);
    QuantumState::pure_with_dims(acc, dims)
}

/// Dense operator over emitter x photon register.
#[derive(Debug, Clone)]
pub struct Operator {
    matrix: Array2<C64>,
    bins: usize,
}

impl Operator {
    pub fn from_matrix(matrix: Array2<C64>, bins: usize) -> Result<Operator> {
        let dim = EMITTER_DIM << bins;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "expected {dim}x{dim} operator, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Operator { matrix, bins })
    }

    pub fn identity(bins: usize) -> Operator {
        Operator { matrix: Array2::eye(EMITTER_DIM << bins), bins }
    }

    /// Lift a 4x4 emitter operator to emitter x register (identity on the
    /// register).
    pub fn from_emitter(m4: &[[C64; 4]; 4], bins: usize) -> Operator {
        let pd = 1usize << bins;
        let dim = EMITTER_DIM * pd;
        let mut out = Array2::zeros((dim, dim));
        for e1 in 0..EMITTER_DIM {
            for e2 in 0..EMITTER_DIM {
                let z = m4[e1][e2];
                if z.norm_sqr() == 0.0 {
                    continue;
                }
                for b in 0..pd {
                    out[(e1 * pd + b, e2 * pd + b)] = z;
                }
            }
        }
        Operator { matrix: out, bins }
    }

    /// Lift a register-local operator (2^n x 2^n) to emitter x register
    /// (identity on the emitter).
    pub fn from_photon(mphot: &Array2<C64>, bins: usize) -> Result<Operator> {
        let pd = 1usize << bins;
        if mphot.nrows() != pd || mphot.ncols() != pd {
            return Err(Error::DimensionMismatch(format!(
                "expected {pd}x{pd} register operator, got {}x{}",
                mphot.nrows(),
                mphot.ncols()
            )));
        }
        let dim = EMITTER_DIM * pd;
        let mut out = Array2::zeros((dim, dim));
        for e in 0..EMITTER_DIM {
            for b1 in 0..pd {
                for b2 in 0..pd {
                    out[(e * pd + b1, e * pd + b2)] = mphot[(b1, b2)];
                }
            }
        }
        Ok(Operator { matrix: out, bins })
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn photon_bins(&self) -> usize {
        self.bins
    }

    pub fn dagger(&self) -> Operator {
        let n = self.matrix.nrows();
        let mut out = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = self.matrix[(j, i)].conj();
            }
        }
        Operator { matrix: out, bins: self.bins }
    }

    pub fn mul(&self, other: &Operator) -> Result<Operator> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch("operator product".into()));
        }
        Ok(Operator { matrix: self.matrix.dot(&other.matrix), bins: self.bins })
    }

    pub fn apply(&self, state: &QuantumState) -> Result<QuantumState> {
        if self.dim() != state.dim() {
            return Err(Error::DimensionMismatch("operator application".into()));
        }
        match state.amplitudes() {
            Some(v) => {
                let out = self.matrix.dot(v);
                Ok(QuantumState { data: StateData::Pure(out), dims: state.dims() })
            }
            None => {
                let rho = state.density();
                let out = self.matrix.dot(&rho).dot(&self.dagger().matrix);
                Ok(QuantumState { data: StateData::Density(out), dims: state.dims() })
            }
        }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let n = self.matrix.nrows();
        for i in 0..n {
            for j in i..n {
                if (self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }
}

/// Jump operator |to><from| on the emitter factor, identity on the register.
pub fn lowering_operator(t: Transition) -> Operator {
    lowering_operator_with_bins(t, 0)
}

pub fn lowering_operator_with_bins(t: Transition, bins: usize) -> Operator {
    let mut m4 = [[C64::new(0.0, 0.0); 4]; 4];
    m4[t.to.index()][t.from.index()] = C64::new(1.0, 0.0);
    Operator::from_emitter(&m4, bins)
}

/// Fidelity, as a free function mirroring the other state operations.
pub fn fidelity(a: &QuantumState, b: &QuantumState) -> Result<f64> {
    a.fidelity(b)
}

/// Partial trace keeping one tensor factor.
pub fn partial_trace(state: &QuantumState, keep: Factor) -> QuantumState {
    state.partial_trace(keep)
}
