//! Three-level Λ model: parameters, transition-operator algebra, and the
//! linear generator of the optical Bloch equations.
//!
//! One upper level |a⟩ is coupled by a single monochromatic laser to two
//! closely spaced lower levels |b⟩ and |c⟩, which decay at rates γ₁ (a→b)
//! and γ₂ (a→c). Because both decay channels see the same vacuum modes,
//! spontaneous emission builds a lower-level coherence through a
//! cross-damping term p√(γ₁γ₂); p = 1 for parallel transition dipoles
//! (maximal interference), p = 0 for none.
//!
//! In the frame rotating at the laser frequency, and after eliminating
//! ρ_bb = 1 − ρ_aa − ρ_cc, the tracked density-matrix elements
//!
//! ```text
//! ρ⃗ = (ρ_aa, ρ_cc, ρ_ab, ρ_ba, ρ_ac, ρ_ca, ρ_bc, ρ_cb)
//! ```
//!
//! obey the affine linear system dρ⃗/dt = B ρ⃗ + I⃗. All rates are in units
//! of the a→b decay rate.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dimension of the tracked state vector.
pub const DIM: usize = 8;

/// Expectation values of the eight tracked transition operators.
pub type SigmaVector = [Complex64; DIM];

/// The 8×8 time-evolution matrix, row-major.
pub type EvolutionMatrix = [[Complex64; DIM]; DIM];

/// Position of each density-matrix element in the tracked vector.
pub mod idx {
    pub const RHO_AA: usize = 0;
    pub const RHO_CC: usize = 1;
    pub const RHO_AB: usize = 2;
    pub const RHO_BA: usize = 3;
    pub const RHO_AC: usize = 4;
    pub const RHO_CA: usize = 5;
    pub const RHO_BC: usize = 6;
    pub const RHO_CB: usize = 7;
}

/// Index pairing under Hermitian conjugation: component `i` of a physical
/// state is the complex conjugate of component `CONJ_PAIR[i]`.
pub const CONJ_PAIR: [usize; DIM] = [0, 1, 3, 2, 5, 4, 7, 6];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Physical inputs of the driven Λ system. Rates and frequencies are in
/// units of `gamma1`; `gamma1` itself stays a free field so that the
/// b↔c relabeling symmetry can be exercised.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Decay rate a→b.
    pub gamma1: f64,
    /// Decay rate a→c.
    pub gamma2: f64,
    /// Rabi frequency on a↔b.
    pub omega1: f64,
    /// Rabi frequency on a↔c.
    pub omega2: f64,
    /// Common laser detuning Δ.
    pub detuning: f64,
    /// Half the lower-level separation δ (the levels are split by 2δ).
    pub splitting: f64,
    /// Interference parameter p ∈ [0, 1].
    pub p: f64,
}

impl SystemParams {
    pub fn new(
        gamma1: f64,
        gamma2: f64,
        omega1: f64,
        omega2: f64,
        detuning: f64,
        splitting: f64,
        p: f64,
    ) -> Result<Self> {
        let params = Self {
            gamma1,
            gamma2,
            omega1,
            omega2,
            detuning,
            splitting,
            p,
        };
        params.validate()?;
        Ok(params)
    }

    /// Equal decay rates and equal Rabi frequencies on both arms.
    pub fn symmetric(
        gamma: f64,
        omega: f64,
        detuning: f64,
        splitting: f64,
        p: f64,
    ) -> Result<Self> {
        Self::new(gamma, gamma, omega, omega, detuning, splitting, p)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |field: &'static str, value: f64| -> Result<()> {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::InvalidParameter {
                    field,
                    reason: format!("must be finite and > 0, got {value}"),
                });
            }
            Ok(())
        };
        let nonnegative = |field: &'static str, value: f64| -> Result<()> {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidParameter {
                    field,
                    reason: format!("must be finite and >= 0, got {value}"),
                });
            }
            Ok(())
        };
        let finite = |field: &'static str, value: f64| -> Result<()> {
            if !value.is_finite() {
                return Err(Error::InvalidParameter {
                    field,
                    reason: format!("must be finite, got {value}"),
                });
            }
            Ok(())
        };
        positive("gamma1", self.gamma1)?;
        positive("gamma2", self.gamma2)?;
        nonnegative("omega1", self.omega1)?;
        nonnegative("omega2", self.omega2)?;
        finite("detuning", self.detuning)?;
        finite("splitting", self.splitting)?;
        if !self.p.is_finite() || !(0.0..=1.0).contains(&self.p) {
            return Err(Error::InvalidParameter {
                field: "p",
                reason: format!("must lie in [0, 1], got {}", self.p),
            });
        }
        Ok(())
    }

    /// Parameters of the level-swapped (b↔c) system. Swapping the two
    /// lower levels exchanges the decay rates and Rabi frequencies and
    /// flips the sign of the splitting.
    pub fn relabeled(&self) -> Self {
        Self {
            gamma1: self.gamma2,
            gamma2: self.gamma1,
            omega1: self.omega2,
            omega2: self.omega1,
            detuning: self.detuning,
            splitting: -self.splitting,
            p: self.p,
        }
    }

    /// Cross-damping rate p√(γ₁γ₂).
    pub fn cross_damping(&self) -> f64 {
        self.p * (self.gamma1 * self.gamma2).sqrt()
    }

    /// Fastest rate in the generator; bounds the stable integration step.
    pub fn rate_scale(&self) -> f64 {
        (self.gamma1 + self.gamma2)
            .max(self.omega1)
            .max(self.omega2)
            .max(self.detuning.abs() + self.splitting.abs())
    }
}

/// One of the seven fields of [`SystemParams`], addressable by its config
/// key. Used by parameter sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamField {
    Gamma1,
    Gamma2,
    Omega1,
    Omega2,
    Detuning,
    Splitting,
    P,
}

impl ParamField {
    pub const ALL: [ParamField; 7] = [
        ParamField::Gamma1,
        ParamField::Gamma2,
        ParamField::Omega1,
        ParamField::Omega2,
        ParamField::Detuning,
        ParamField::Splitting,
        ParamField::P,
    ];

    pub fn key(&self) -> &'static str {
        match self {
            ParamField::Gamma1 => "gamma1",
            ParamField::Gamma2 => "gamma2",
            ParamField::Omega1 => "omega1",
            ParamField::Omega2 => "omega2",
            ParamField::Detuning => "detuning",
            ParamField::Splitting => "splitting",
            ParamField::P => "p",
        }
    }

    pub fn from_key(key: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|f| f.key() == key)
            .ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "unknown parameter `{key}`; expected one of gamma1, gamma2, omega1, omega2, detuning, splitting, p"
                ))
            })
    }

    /// Returns a copy of `params` with this field set to `value`,
    /// revalidating the result.
    pub fn apply(&self, params: &SystemParams, value: f64) -> Result<SystemParams> {
        let mut out = *params;
        match self {
            ParamField::Gamma1 => out.gamma1 = value,
            ParamField::Gamma2 => out.gamma2 = value,
            ParamField::Omega1 => out.omega1 = value,
            ParamField::Omega2 => out.omega2 = value,
            ParamField::Detuning => out.detuning = value,
            ParamField::Splitting => out.splitting = value,
            ParamField::P => out.p = value,
        }
        out.validate()?;
        Ok(out)
    }

    pub fn get(&self, params: &SystemParams) -> f64 {
        match self {
            ParamField::Gamma1 => params.gamma1,
            ParamField::Gamma2 => params.gamma2,
            ParamField::Omega1 => params.omega1,
            ParamField::Omega2 => params.omega2,
            ParamField::Detuning => params.detuning,
            ParamField::Splitting => params.splitting,
            ParamField::P => params.p,
        }
    }
}

/// Atomic level label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    A,
    B,
    C,
}

/// Transition operator |ket⟩⟨bra|.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisOperator {
    pub ket: Level,
    pub bra: Level,
}

impl BasisOperator {
    pub const fn new(ket: Level, bra: Level) -> Self {
        Self { ket, bra }
    }
}

/// The eight tracked transition operators, in state-vector order.
/// |b⟩⟨b| is not tracked; it is always rewritten via completeness as
/// 1 − |a⟩⟨a| − |c⟩⟨c|.
pub const SIGMA_BASIS: [BasisOperator; DIM] = [
    BasisOperator::new(Level::A, Level::A),
    BasisOperator::new(Level::C, Level::C),
    BasisOperator::new(Level::A, Level::B),
    BasisOperator::new(Level::B, Level::A),
    BasisOperator::new(Level::A, Level::C),
    BasisOperator::new(Level::C, Level::A),
    BasisOperator::new(Level::B, Level::C),
    BasisOperator::new(Level::C, Level::B),
];

fn sigma_index(ket: Level, bra: Level) -> Option<usize> {
    SIGMA_BASIS
        .iter()
        .position(|op| op.ket == ket && op.bra == bra)
}

/// A linear combination `constant·1 + Σᵢ coeffs[i]·σᵢ` over the tracked
/// basis plus the identity. Closed under products of basis operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaExpansion {
    pub constant: f64,
    pub coeffs: [f64; DIM],
}

impl SigmaExpansion {
    pub const ZERO: Self = Self {
        constant: 0.0,
        coeffs: [0.0; DIM],
    };

    /// Expectation value in a state given by tracked expectations.
    pub fn expectation(&self, state: &SigmaVector) -> Complex64 {
        let mut acc = Complex64::new(self.constant, 0.0);
        for (c, x) in self.coeffs.iter().zip(state.iter()) {
            acc += *c * *x;
        }
        acc
    }
}

/// Product of two transition operators:
/// |m⟩⟨n| · |k⟩⟨l| = δ_{nk} |m⟩⟨l|, with |b⟩⟨b| rewritten through the
/// completeness relation.
pub fn operator_product(x: BasisOperator, y: BasisOperator) -> SigmaExpansion {
    if x.bra != y.ket {
        return SigmaExpansion::ZERO;
    }
    let mut out = SigmaExpansion::ZERO;
    match sigma_index(x.ket, y.bra) {
        Some(i) => out.coeffs[i] = 1.0,
        None => {
            // |b⟩⟨b| = 1 − |a⟩⟨a| − |c⟩⟨c|
            out.constant = 1.0;
            out.coeffs[idx::RHO_AA] = -1.0;
            out.coeffs[idx::RHO_CC] = -1.0;
        }
    }
    out
}

/// The assembled generator of dρ⃗/dt = B ρ⃗ + I⃗.
///
/// `i_vector` holds the constants produced by eliminating ρ_bb; for this
/// model only the ρ_ab and ρ_ba rows pick one up (±iΩ₁).
#[derive(Debug, Clone)]
pub struct Liouvillian {
    pub b_matrix: EvolutionMatrix,
    pub i_vector: SigmaVector,
    pub params: SystemParams,
}

impl Liouvillian {
    /// Right-hand side B x + I⃗.
    pub fn rhs(&self, x: &SigmaVector) -> SigmaVector {
        let mut out = self.i_vector;
        for (row, acc) in self.b_matrix.iter().zip(out.iter_mut()) {
            for (b, xv) in row.iter().zip(x.iter()) {
                *acc += *b * *xv;
            }
        }
        out
    }

    /// Largest integration step the fixed-step integrator accepts.
    pub fn max_step(&self) -> f64 {
        0.01 / self.params.rate_scale().max(f64::MIN_POSITIVE)
    }

    /// Default integration step: 10⁻³ in units of 1/γ₁, shrunk if the
    /// stability bound is tighter.
    pub fn default_step(&self) -> f64 {
        (1e-3 / self.params.gamma1).min(self.max_step())
    }
}

/// Assembles the time-evolution matrix and drive vector from the
/// equations of motion of the driven Λ system.
///
/// The five independent equations (populations ρ_aa, ρ_cc and coherences
/// ρ_ab, ρ_ac, ρ_bc) are written out together with their Hermitian
/// conjugates; ρ_bb is eliminated through the unit trace, which is what
/// feeds the constant vector.
pub fn build_liouvillian(params: &SystemParams) -> Result<Liouvillian> {
    params.validate()?;

    let gamma_sum = params.gamma1 + params.gamma2;
    let half_width = 0.5 * gamma_sum;
    let cross = params.cross_damping();
    let delta = params.detuning;
    let split = params.splitting;

    let i_om1 = Complex64::new(0.0, params.omega1);
    let i_om2 = Complex64::new(0.0, params.omega2);

    let mut b = [[ZERO; DIM]; DIM];
    let mut i_vec = [ZERO; DIM];

    // ρ_aa: −(γ₁+γ₂)ρ_aa − iΩ₁(ρ_ab − ρ_ba) − iΩ₂(ρ_ac − ρ_ca)
    b[idx::RHO_AA][idx::RHO_AA] = Complex64::new(-gamma_sum, 0.0);
    b[idx::RHO_AA][idx::RHO_AB] = -i_om1;
    b[idx::RHO_AA][idx::RHO_BA] = i_om1;
    b[idx::RHO_AA][idx::RHO_AC] = -i_om2;
    b[idx::RHO_AA][idx::RHO_CA] = i_om2;

    // ρ_cc: γ₂ρ_aa + iΩ₂(ρ_ac − ρ_ca), the b↔c image of the ρ_bb equation
    b[idx::RHO_CC][idx::RHO_AA] = Complex64::new(params.gamma2, 0.0);
    b[idx::RHO_CC][idx::RHO_AC] = i_om2;
    b[idx::RHO_CC][idx::RHO_CA] = -i_om2;

    // ρ_ab: (i(δ+Δ) − (γ₁+γ₂)/2)ρ_ab − iΩ₁(ρ_aa − ρ_bb) + iΩ₂ρ_cb
    //       with ρ_bb = 1 − ρ_aa − ρ_cc
    b[idx::RHO_AB][idx::RHO_AB] = Complex64::new(-half_width, split + delta);
    b[idx::RHO_AB][idx::RHO_AA] = -2.0 * i_om1;
    b[idx::RHO_AB][idx::RHO_CC] = -i_om1;
    b[idx::RHO_AB][idx::RHO_CB] = i_om2;
    i_vec[idx::RHO_AB] = i_om1;

    // ρ_ba: conjugate of the ρ_ab equation
    b[idx::RHO_BA][idx::RHO_BA] = Complex64::new(-half_width, -(split + delta));
    b[idx::RHO_BA][idx::RHO_AA] = 2.0 * i_om1;
    b[idx::RHO_BA][idx::RHO_CC] = i_om1;
    b[idx::RHO_BA][idx::RHO_BC] = -i_om2;
    i_vec[idx::RHO_BA] = -i_om1;

    // ρ_ac: (i(Δ−δ) − (γ₁+γ₂)/2)ρ_ac − iΩ₂(ρ_aa − ρ_cc) + iΩ₁ρ_bc
    b[idx::RHO_AC][idx::RHO_AC] = Complex64::new(-half_width, delta - split);
    b[idx::RHO_AC][idx::RHO_AA] = -i_om2;
    b[idx::RHO_AC][idx::RHO_CC] = i_om2;
    b[idx::RHO_AC][idx::RHO_BC] = i_om1;

    // ρ_ca: conjugate of the ρ_ac equation
    b[idx::RHO_CA][idx::RHO_CA] = Complex64::new(-half_width, split - delta);
    b[idx::RHO_CA][idx::RHO_AA] = i_om2;
    b[idx::RHO_CA][idx::RHO_CC] = -i_om2;
    b[idx::RHO_CA][idx::RHO_CB] = -i_om1;

    // ρ_bc: p√(γ₁γ₂)ρ_aa − 2iδρ_bc + iΩ₁ρ_ac − iΩ₂ρ_ba
    // The cross-damping source is where the vacuum interference enters.
    b[idx::RHO_BC][idx::RHO_AA] = Complex64::new(cross, 0.0);
    b[idx::RHO_BC][idx::RHO_BC] = Complex64::new(0.0, -2.0 * split);
    b[idx::RHO_BC][idx::RHO_AC] = i_om1;
    b[idx::RHO_BC][idx::RHO_BA] = -i_om2;

    // ρ_cb: conjugate of the ρ_bc equation
    b[idx::RHO_CB][idx::RHO_AA] = Complex64::new(cross, 0.0);
    b[idx::RHO_CB][idx::RHO_CB] = Complex64::new(0.0, 2.0 * split);
    b[idx::RHO_CB][idx::RHO_CA] = -i_om1;
    b[idx::RHO_CB][idx::RHO_AB] = i_om2;

    Ok(Liouvillian {
        b_matrix: b,
        i_vector: i_vec,
        params: *params,
    })
}

/// Rate of change of the eliminated ρ_bb, reconstructed from its own
/// equation of motion: γ₁ρ_aa + iΩ₁(ρ_ab − ρ_ba). Together with the
/// ρ_aa and ρ_cc rows this sums to exactly zero (trace conservation),
/// which independently cross-checks the derived ρ_cc equation.
pub fn rho_bb_rate(params: &SystemParams, state: &SigmaVector) -> Complex64 {
    let i_om1 = Complex64::new(0.0, params.omega1);
    params.gamma1 * state[idx::RHO_AA] + i_om1 * (state[idx::RHO_AB] - state[idx::RHO_BA])
}

/// Affine change of basis realizing the b↔c level swap: a state x of the
/// original system corresponds to the state y = P x + e of the relabeled
/// system ([`SystemParams::relabeled`]). Returns (P, e).
///
/// The population bookkeeping makes this affine rather than a pure
/// permutation: the swapped system tracks ρ_cc' = ρ_bb = 1 − ρ_aa − ρ_cc.
pub fn level_swap_basis() -> ([[f64; DIM]; DIM], [f64; DIM]) {
    let mut p = [[0.0; DIM]; DIM];
    p[idx::RHO_AA][idx::RHO_AA] = 1.0;
    p[idx::RHO_CC][idx::RHO_AA] = -1.0;
    p[idx::RHO_CC][idx::RHO_CC] = -1.0;
    p[idx::RHO_AB][idx::RHO_AC] = 1.0;
    p[idx::RHO_BA][idx::RHO_CA] = 1.0;
    p[idx::RHO_AC][idx::RHO_AB] = 1.0;
    p[idx::RHO_CA][idx::RHO_BA] = 1.0;
    p[idx::RHO_BC][idx::RHO_CB] = 1.0;
    p[idx::RHO_CB][idx::RHO_BC] = 1.0;
    let mut e = [0.0; DIM];
    e[idx::RHO_CC] = 1.0;
    (p, e)
}

/// Maps a state vector through the b↔c swap: y = P x + e.
pub fn level_swap_state(state: &SigmaVector) -> SigmaVector {
    let (p, e) = level_swap_basis();
    let mut out = [ZERO; DIM];
    for r in 0..DIM {
        let mut acc = Complex64::new(e[r], 0.0);
        for c in 0..DIM {
            if p[r][c] != 0.0 {
                acc += p[r][c] * state[c];
            }
        }
        out[r] = acc;
    }
    out
}

#[cfg(test)]
mod tests {
    #![allow(clippy::needless_range_loop)] // permutation algebra reads best indexed

    use super::*;
    use crate::linalg;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn pure_decay_row_is_total_decay_rate() {
        // No driving, no interference: the upper population just decays
        // at γ₁ + γ₂ and feeds nothing back.
        let params = SystemParams::new(1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0).unwrap();
        let liou = build_liouvillian(&params).unwrap();
        assert_eq!(liou.b_matrix[idx::RHO_AA][idx::RHO_AA], c(-2.0, 0.0));
        for col in 1..DIM {
            assert_eq!(liou.b_matrix[idx::RHO_AA][col], c(0.0, 0.0));
        }
        assert_eq!(liou.i_vector[idx::RHO_AA], c(0.0, 0.0));
    }

    #[test]
    fn lower_coherence_row_carries_cross_damping_and_splitting() {
        let params = SystemParams::new(1.0, 4.0, 0.3, 0.7, 0.2, 0.05, 0.9).unwrap();
        let liou = build_liouvillian(&params).unwrap();
        // source from the upper population via the interference term
        assert_eq!(
            liou.b_matrix[idx::RHO_BC][idx::RHO_AA],
            c(0.9 * (4.0f64).sqrt(), 0.0)
        );
        // free precession of the lower-level coherence at the splitting
        assert_eq!(liou.b_matrix[idx::RHO_BC][idx::RHO_BC], c(0.0, -0.1));
        assert_eq!(liou.b_matrix[idx::RHO_BC][idx::RHO_AC], c(0.0, 0.3));
        assert_eq!(liou.b_matrix[idx::RHO_BC][idx::RHO_BA], c(0.0, -0.7));
    }

    #[test]
    fn drive_vector_only_feeds_the_ab_coherences() {
        let params = SystemParams::new(1.0, 1.0, 3.0, 3.0, 0.0, 0.1, 1.0).unwrap();
        let liou = build_liouvillian(&params).unwrap();
        assert_eq!(liou.i_vector[idx::RHO_AB], c(0.0, 3.0));
        assert_eq!(liou.i_vector[idx::RHO_BA], c(0.0, -3.0));
        for i in [0, 1, 4, 5, 6, 7] {
            assert_eq!(liou.i_vector[i], c(0.0, 0.0));
        }
    }

    #[test]
    fn operator_products_match_the_algebra() {
        let s = SIGMA_BASIS;
        // |a⟩⟨b| · |b⟩⟨a| = |a⟩⟨a|
        let p34 = operator_product(s[idx::RHO_AB], s[idx::RHO_BA]);
        let mut expect = SigmaExpansion::ZERO;
        expect.coeffs[idx::RHO_AA] = 1.0;
        assert_eq!(p34, expect);

        // |b⟩⟨a| · |a⟩⟨b| = |b⟩⟨b| = 1 − |a⟩⟨a| − |c⟩⟨c|
        let p43 = operator_product(s[idx::RHO_BA], s[idx::RHO_AB]);
        let mut expect = SigmaExpansion::ZERO;
        expect.constant = 1.0;
        expect.coeffs[idx::RHO_AA] = -1.0;
        expect.coeffs[idx::RHO_CC] = -1.0;
        assert_eq!(p43, expect);

        // |a⟩⟨b| · |c⟩⟨a| = 0 (orthogonal inner labels)
        let p36 = operator_product(s[idx::RHO_AB], s[idx::RHO_CA]);
        assert_eq!(p36, SigmaExpansion::ZERO);
    }

    #[test]
    fn product_rule_is_exact_over_the_whole_table() {
        // δ_{nk} rule for all 64 pairs, checked structurally.
        for (i, x) in SIGMA_BASIS.iter().enumerate() {
            for (j, y) in SIGMA_BASIS.iter().enumerate() {
                let prod = operator_product(*x, *y);
                if x.bra != y.ket {
                    assert_eq!(prod, SigmaExpansion::ZERO, "pair ({i},{j})");
                } else if x.ket == Level::B && y.bra == Level::B {
                    assert_eq!(prod.constant, 1.0, "pair ({i},{j})");
                } else {
                    let k = sigma_index(x.ket, y.bra).unwrap();
                    assert_eq!(prod.coeffs[k], 1.0, "pair ({i},{j})");
                    assert_eq!(prod.constant, 0.0, "pair ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn invalid_params_name_the_offending_field() {
        let err = SystemParams::new(-1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.5).unwrap_err();
        match err {
            Error::InvalidParameter { field, .. } => assert_eq!(field, "gamma1"),
            other => panic!("unexpected error {other:?}"),
        }
        let err = SystemParams::new(1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 1.5).unwrap_err();
        match err {
            Error::InvalidParameter { field, .. } => assert_eq!(field, "p"),
            other => panic!("unexpected error {other:?}"),
        }
        // negative splitting and detuning are allowed
        assert!(SystemParams::new(1.0, 1.0, 1.0, 1.0, -2.0, -0.3, 0.5).is_ok());
    }

    #[test]
    fn narrow_peak_generator_has_small_strictly_negative_abscissa() {
        // Strong symmetric drive with small splitting: the generator keeps
        // a long-lived mode far slower than the natural linewidth. Its
        // decay rate is what shows up as the narrow central feature.
        let params = SystemParams::symmetric(1.0, 3.0, 0.0, 0.1, 1.0).unwrap();
        let liou = build_liouvillian(&params).unwrap();
        let abscissa = linalg::spectral_abscissa(&liou.b_matrix);
        assert!(
            abscissa < -1e-4,
            "abscissa {abscissa} not strictly negative"
        );
        assert!(abscissa > -1e-2, "abscissa {abscissa} not ≪ γ₁");
    }

    fn arb_params() -> impl Strategy<Value = SystemParams> {
        (
            0.2f64..3.0,
            0.2f64..3.0,
            0.0f64..4.0,
            0.0f64..4.0,
            -3.0f64..3.0,
            -1.0f64..1.0,
            0.0f64..1.0,
        )
            .prop_map(|(g1, g2, o1, o2, d, s, p)| {
                SystemParams::new(g1, g2, o1, o2, d, s, p).unwrap()
            })
    }

    proptest! {
        #[test]
        fn conjugation_pairing_of_generator(params in arb_params()) {
            let liou = build_liouvillian(&params).unwrap();
            for r in 0..DIM {
                for col in 0..DIM {
                    let a = liou.b_matrix[r][col];
                    let b = liou.b_matrix[CONJ_PAIR[r]][CONJ_PAIR[col]];
                    prop_assert!((a - b.conj()).norm() < 1e-14);
                }
                let ia = liou.i_vector[r];
                let ib = liou.i_vector[CONJ_PAIR[r]];
                prop_assert!((ia - ib.conj()).norm() < 1e-14);
            }
        }

        #[test]
        fn level_swap_conjugates_the_generator(params in arb_params()) {
            // d/dt must commute with the affine swap y = Px + e:
            // B'P == PB and B'e + I' == PI, entrywise to machine precision.
            let liou = build_liouvillian(&params).unwrap();
            let swapped = build_liouvillian(&params.relabeled()).unwrap();
            let (p, e) = level_swap_basis();
            let scale = params.rate_scale();

            for r in 0..DIM {
                for col in 0..DIM {
                    let mut lhs = Complex64::new(0.0, 0.0); // (B'P)[r][col]
                    let mut rhs = Complex64::new(0.0, 0.0); // (PB)[r][col]
                    for k in 0..DIM {
                        lhs += swapped.b_matrix[r][k] * p[k][col];
                        rhs += p[r][k] * liou.b_matrix[k][col];
                    }
                    prop_assert!((lhs - rhs).norm() <= 1e-14 * scale.max(1.0));
                }
                let mut lhs = swapped.i_vector[r];
                let mut rhs = Complex64::new(0.0, 0.0);
                for k in 0..DIM {
                    lhs += swapped.b_matrix[r][k] * e[k];
                    rhs += p[r][k] * liou.i_vector[k];
                }
                prop_assert!((lhs - rhs).norm() <= 1e-14 * scale.max(1.0));
            }
        }

        #[test]
        fn population_rates_sum_to_zero(params in arb_params(),
                                        re in proptest::collection::vec(-0.5f64..0.5, DIM),
                                        im in proptest::collection::vec(-0.5f64..0.5, DIM)) {
            // Trace conservation holds for arbitrary state vectors, not
            // just physical ones: the three population rates cancel
            // identically.
            let liou = build_liouvillian(&params).unwrap();
            let mut x = [Complex64::new(0.0, 0.0); DIM];
            for i in 0..DIM {
                x[i] = Complex64::new(re[i], im[i]);
            }
            let rate = liou.rhs(&x);
            let total = rate[idx::RHO_AA] + rate[idx::RHO_CC] + rho_bb_rate(&params, &x);
            prop_assert!(total.norm() <= 1e-13 * params.rate_scale().max(1.0));
        }
    }
}
