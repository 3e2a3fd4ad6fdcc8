use nalgebra::{DMatrix, SMatrix, Vector3};

use crate::constants::{BE9_A_HZ, BE9_G_I, BE9_G_J, H, MU_B};
use crate::error::{invalid, Result};

pub type Mat8 = SMatrix<f64, 8, 8>;

/// Ground-state hyperfine manifold of a J = 1/2, I = 3/2 ion in a static field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperfineModel {
    pub a_hz: f64,
    pub g_j: f64,
    pub g_i: f64,
    /// |B0| in tesla.
    pub b0: f64,
    /// Unit vector along B0 in trap coordinates.
    pub b0_dir: Vector3<f64>,
}

impl HyperfineModel {
    /// ⁹Be⁺ at field magnitude `b0` along `dir` (normalized here).
    pub fn be9(b0: f64, dir: Vector3<f64>) -> Self {
        Self { a_hz: BE9_A_HZ, g_j: BE9_G_J, g_i: BE9_G_I, b0, b0_dir: dir.normalize() }
    }

    /// ⁹Be⁺ with B0 along z.
    pub fn be9_z(b0: f64) -> Self {
        Self::be9(b0, Vector3::z())
    }

    /// ⁹Be⁺ at 22.3 mT, B0 in the y–z plane at 30° from z.
    pub fn be9_reference() -> Self {
        let a = 30f64.to_radians();
        Self::be9(22.3e-3, Vector3::new(0.0, a.sin(), a.cos()))
    }

    pub fn with_b0(&self, b0: f64) -> Self {
        Self { b0, ..*self }
    }
}

/// Hyperfine level label (F, m_F), continued adiabatically from zero field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Level {
    pub f: i32,
    pub m_f: i32,
}

impl Level {
    pub const fn new(f: i32, m_f: i32) -> Self {
        Self { f, m_f }
    }
}

impl std::fmt::Display for Level {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "|{},{}⟩", self.f, self.m_f)
    }
}

/// A transition between two labeled levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TransitionSpec {
    pub lower: Level,
    pub upper: Level,
}

impl TransitionSpec {
    pub fn new(lower: Level, upper: Level) -> Result<Self> {
        for l in [lower, upper] {
            let ok = (l.f == 1 || l.f == 2) && l.m_f.abs() <= l.f;
            if !ok {
                return Err(invalid("transition", format!("{l} is not in the ground manifold")));
            }
        }
        if (upper.m_f - lower.m_f).abs() > 1 {
            return Err(invalid("transition", format!("|Δm_F| > 1 between {lower} and {upper}")));
        }
        Ok(Self { lower, upper })
    }

    /// |F=2, m_F=1⟩ ↔ |F=1, m_F=1⟩, first-order field independent near 22.3 mT.
    pub fn qubit() -> Self {
        Self { lower: Level::new(2, 1), upper: Level::new(1, 1) }
    }

    /// |2,0⟩ ↔ |1,0⟩.
    pub fn clock_20_10() -> Self {
        Self { lower: Level::new(2, 0), upper: Level::new(1, 0) }
    }
}

impl std::fmt::Display for TransitionSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}↔{}", self.lower, self.upper)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarization {
    Pi,
    SigmaPlus,
    SigmaMinus,
}

// Uncoupled basis |m_I, m_J⟩ with index 2·i + j, m_I = 3/2 - i, m_J = 1/2 - j.
fn m_i(idx: usize) -> f64 {
    1.5 - (idx / 2) as f64
}
fn m_j(idx: usize) -> f64 {
    0.5 - (idx % 2) as f64
}

fn ladder(j: f64, m: f64) -> f64 {
    (j * (j + 1.0) - m * (m + 1.0)).max(0.0).sqrt()
}

/// Spin operators of the uncoupled basis.
pub struct SpinOps {
    pub iz: Mat8,
    pub ip: Mat8,
    pub jz: Mat8,
    pub jp: Mat8,
}

impl SpinOps {
    pub fn new() -> Self {
        let mut s = Self { iz: Mat8::zeros(), ip: Mat8::zeros(), jz: Mat8::zeros(), jp: Mat8::zeros() };
        for c in 0..8 {
            s.iz[(c, c)] = m_i(c);
            s.jz[(c, c)] = m_j(c);
            // I+ raises m_I: index i -> i-1
            if c / 2 > 0 {
                s.ip[(c - 2, c)] = ladder(1.5, m_i(c));
            }
            if c % 2 == 1 {
                s.jp[(c - 1, c)] = ladder(0.5, m_j(c));
            }
        }
        s
    }

    pub fn im(&self) -> Mat8 {
        self.ip.transpose()
    }

    pub fn jm(&self) -> Mat8 {
        self.jp.transpose()
    }

    pub fn i_dot_j(&self) -> Mat8 {
        self.iz * self.jz + (self.ip * self.jm() + self.im() * self.jp) * 0.5
    }
}

impl Default for SpinOps {
    fn default() -> Self {
        Self::new()
    }
}

/// Hamiltonian in Hz, quantization axis along B0.
pub fn hamiltonian(model: &HyperfineModel) -> Mat8 {
    let s = SpinOps::new();
    let zee = MU_B * model.b0 / H;
    s.i_dot_j() * model.a_hz + (s.jz * model.g_j + s.iz * model.g_i) * zee
}

/// Eigenenergies (Hz) and eigenvectors (columns, uncoupled basis) with labels.
#[derive(Debug, Clone)]
pub struct Levels {
    pub labels: Vec<Level>,
    pub energies_hz: Vec<f64>,
    pub states: Mat8,
}

impl Levels {
    pub fn index(&self, l: Level) -> Option<usize> {
        self.labels.iter().position(|&x| x == l)
    }

    pub fn energy(&self, l: Level) -> f64 {
        self.energies_hz[self.index(l).expect("level exists")]
    }

    /// Upper minus lower energy (Hz).
    pub fn frequency(&self, t: &TransitionSpec) -> f64 {
        self.energy(t.upper) - self.energy(t.lower)
    }
}

/// Diagonalizes the manifold. H commutes with F_z, so each m_F block (size ≤ 2)
/// is diagonalized on its own; the non-crossing rule inside a block makes the
/// adiabatic label follow the energy ordering at B = 0 exactly.
pub fn breit_rabi_levels(model: &HyperfineModel) -> Levels {
    let h = hamiltonian(model);
    // At zero field E(F=2) = 3A/4 and E(F=1) = -5A/4.
    let f2_lower = model.a_hz < 0.0;
    let mut labels = Vec::with_capacity(8);
    let mut energies = Vec::with_capacity(8);
    let mut states = Mat8::zeros();
    let mut col = 0;
    for m_f in (-2..=2).rev() {
        let idx: Vec<usize> = (0..8).filter(|&c| (m_i(c) + m_j(c)).round() as i32 == m_f).collect();
        let n = idx.len();
        let block = DMatrix::from_fn(n, n, |r, c| h[(idx[r], idx[c])]);
        let eig = block.symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        for (rank, &k) in order.iter().enumerate() {
            let f = if n == 1 || (rank == 0) == f2_lower { 2 } else { 1 };
            // fix the sign so the largest component is positive
            let v = eig.eigenvectors.column(k);
            let big = v.iter().cloned().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
            let sign = if big < 0.0 { -1.0 } else { 1.0 };
            for (r, &bi) in idx.iter().enumerate() {
                states[(bi, col)] = sign * v[r];
            }
            labels.push(Level::new(f, m_f));
            energies.push(eig.eigenvalues[k]);
            col += 1;
        }
    }
    Levels { labels, energies_hz: energies, states }
}

/// Magnetic moment operator component in J/T: π → g_J J_z + g_I I_z,
/// σ± → (g_J J± + g_I I±)/2, times µ_B. The σ normalization makes a
/// linearly polarized transverse field B_x couple through σ+ + σ−.
pub fn moment_operator(model: &HyperfineModel, pol: Polarization) -> Mat8 {
    let s = SpinOps::new();
    let m = match pol {
        Polarization::Pi => s.jz * model.g_j + s.iz * model.g_i,
        Polarization::SigmaPlus => (s.jp * model.g_j + s.ip * model.g_i) * 0.5,
        Polarization::SigmaMinus => (s.jm() * model.g_j + s.im() * model.g_i) * 0.5,
    };
    m * MU_B
}

/// |⟨upper| µ_c |lower⟩| in J/T.
pub fn dipole_matrix_element(model: &HyperfineModel, t: &TransitionSpec, pol: Polarization) -> f64 {
    let lv = breit_rabi_levels(model);
    let op = moment_operator(model, pol);
    let u = lv.states.column(lv.index(t.upper).unwrap());
    let l = lv.states.column(lv.index(t.lower).unwrap());
    (u.transpose() * op * l)[(0, 0)].abs()
}
