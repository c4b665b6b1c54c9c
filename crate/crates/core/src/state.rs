//! Qubit states, the complement (spin-flip) map and state-pair assembly.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{gram_matrix, hermitian_eig, CVector};

/// Threshold on `|det[[α₁,α₂],[β₁,β₂]]|` below which a pair counts as dependent.
pub const INDEPENDENCE_TOL: f64 = 1e-9;

const NORM_TOL: f64 = 1e-12;

/// Pure qubit state `α|0⟩ + β|1⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitState {
    alpha: Complex64,
    beta: Complex64,
}

impl QubitState {
    /// Rejects amplitudes whose norm is off from 1 by more than `1e-12`.
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let n = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm: n });
        }
        Ok(QubitState { alpha, beta })
    }

    /// Divides out the norm. Fails only for the zero vector or non-finite input.
    pub fn normalized(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let n = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if !n.is_finite() || n == 0.0 {
            return Err(Error::NotNormalized { norm: n });
        }
        Ok(QubitState {
            alpha: alpha / n,
            beta: beta / n,
        })
    }

    pub fn zero() -> Self {
        QubitState {
            alpha: Complex64::new(1.0, 0.0),
            beta: Complex64::new(0.0, 0.0),
        }
    }

    pub fn one() -> Self {
        QubitState {
            alpha: Complex64::new(0.0, 0.0),
            beta: Complex64::new(1.0, 0.0),
        }
    }

    /// `(cos(θ/2), e^{iφ} sin(θ/2))`.
    pub fn from_bloch(theta: f64, phi: f64) -> Self {
        let (s, c) = (theta / 2.0).sin_cos();
        QubitState {
            alpha: Complex64::new(c, 0.0),
            beta: Complex64::from_polar(s, phi),
        }
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn beta(&self) -> Complex64 {
        self.beta
    }

    pub fn amplitudes(&self) -> [Complex64; 2] {
        [self.alpha, self.beta]
    }

    pub fn to_vector(&self) -> CVector {
        vec![self.alpha, self.beta]
    }

    /// Antipodal state `β*|0⟩ − α*|1⟩`.
    pub fn complement(&self) -> Self {
        QubitState {
            alpha: self.beta.conj(),
            beta: -self.alpha.conj(),
        }
    }

    /// `⟨self|other⟩`.
    pub fn overlap(&self, other: &QubitState) -> Complex64 {
        self.alpha.conj() * other.alpha + self.beta.conj() * other.beta
    }

    pub fn fidelity(&self, other: &QubitState) -> f64 {
        self.overlap(other).norm_sqr()
    }

    /// Multiplies both amplitudes by a unit-modulus factor.
    pub fn with_phase(&self, phase: Complex64) -> Self {
        QubitState {
            alpha: self.alpha * phase,
            beta: self.beta * phase,
        }
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.alpha.im.abs() <= tol && self.beta.im.abs() <= tol
    }
}

impl Serialize for QubitState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [[self.alpha.re, self.alpha.im], [self.beta.re, self.beta.im]].serialize(s)
    }
}

/// The four states `{Ψ₁, Ψ₂, Ψ̄₁, Ψ̄₂}`; complements are always derived here.
#[derive(Clone, Copy, Debug)]
pub struct StateSet {
    pub psi1: QubitState,
    pub psi2: QubitState,
    pub psibar1: QubitState,
    pub psibar2: QubitState,
    /// `⟨Ψ₁|Ψ₂⟩`
    pub pair_overlap: Complex64,
    pub det_modulus: f64,
    pub independent: bool,
}

impl StateSet {
    pub fn psi(&self) -> [QubitState; 2] {
        [self.psi1, self.psi2]
    }

    pub fn psibar(&self) -> [QubitState; 2] {
        [self.psibar1, self.psibar2]
    }

    /// All four states, ordered `Ψ₁, Ψ₂, Ψ̄₁, Ψ̄₂`.
    pub fn all(&self) -> [QubitState; 4] {
        [self.psi1, self.psi2, self.psibar1, self.psibar2]
    }
}

pub fn make_state_set(psi1: QubitState, psi2: QubitState) -> Result<StateSet> {
    let det = psi1.alpha * psi2.beta - psi2.alpha * psi1.beta;
    let det_modulus = det.norm();
    let independent = det_modulus > INDEPENDENCE_TOL;
    if !independent {
        return Err(Error::LinearlyDependentPair { det_modulus });
    }
    Ok(StateSet {
        psi1,
        psi2,
        psibar1: psi1.complement(),
        psibar2: psi2.complement(),
        pair_overlap: psi1.overlap(&psi2),
        det_modulus,
        independent,
    })
}

/// Numerical rank of a vector family: Gram eigenvalues at or above `tol`.
pub fn independence_rank(vectors: &[CVector], tol: f64) -> Result<usize> {
    let Some(first) = vectors.first() else {
        return Ok(0);
    };
    for v in vectors {
        if v.len() != first.len() {
            return Err(Error::DimensionMismatch {
                expected: first.len(),
                found: v.len(),
            });
        }
    }
    let eig = hermitian_eig(&gram_matrix(vectors).hermitian_part())?;
    Ok(eig.eigenvalues.iter().filter(|&&l| l >= tol).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn complement_examples() {
        let z = QubitState::zero().complement();
        assert_eq!(z.amplitudes(), [c(0.0, 0.0), c(-1.0, 0.0)]);
        let o = QubitState::one().complement();
        assert_eq!(o.amplitudes(), [c(1.0, 0.0), c(-0.0, -0.0)]);

        let s = QubitState::new(c(FRAC_1_SQRT_2, 0.0), c(0.0, FRAC_1_SQRT_2)).unwrap();
        let sb = s.complement();
        assert!(close(sb.alpha(), c(0.0, -FRAC_1_SQRT_2), 1e-15));
        assert!(close(sb.beta(), c(-FRAC_1_SQRT_2, 0.0), 1e-15));
        assert!(s.overlap(&sb).norm() < 1e-15);
    }

    #[test]
    fn bloch_examples() {
        let s = QubitState::from_bloch(0.0, 0.0);
        assert_eq!(s.amplitudes(), [c(1.0, 0.0), c(0.0, 0.0)]);
        let s = QubitState::from_bloch(PI, 0.0);
        assert!(close(s.alpha(), c(0.0, 0.0), 1e-15) && close(s.beta(), c(1.0, 0.0), 1e-15));
        let s = QubitState::from_bloch(PI / 2.0, 0.0);
        assert!(close(s.alpha(), c(FRAC_1_SQRT_2, 0.0), 1e-15));
        assert!(close(s.beta(), c(FRAC_1_SQRT_2, 0.0), 1e-15));
    }

    #[test]
    fn state_set_examples() {
        let plus = QubitState::from_bloch(PI / 2.0, 0.0);
        let set = make_state_set(QubitState::zero(), plus).unwrap();
        assert!(close(set.pair_overlap, c(FRAC_1_SQRT_2, 0.0), 1e-15));
        assert!(set.independent);

        let set = make_state_set(QubitState::zero(), QubitState::one()).unwrap();
        assert_eq!(set.pair_overlap, c(0.0, 0.0));

        let phased = QubitState::zero().with_phase(Complex64::from_polar(1.0, PI / 5.0));
        assert!(matches!(
            make_state_set(QubitState::zero(), phased),
            Err(Error::LinearlyDependentPair { .. })
        ));
    }

    #[test]
    fn rank_examples() {
        let z = QubitState::zero().to_vector();
        let o = QubitState::one().to_vector();
        assert_eq!(independence_rank(&[z.clone(), o], 1e-9).unwrap(), 2);
        assert_eq!(independence_rank(&[z.clone(), z.clone()], 1e-9).unwrap(), 1);

        let set = make_state_set(QubitState::from_bloch(0.3, 1.1), QubitState::from_bloch(2.0, -0.4)).unwrap();
        let all: Vec<CVector> = set.all().iter().map(|s| s.to_vector()).collect();
        assert_eq!(independence_rank(&all, 1e-9).unwrap(), 2);

        assert!(matches!(
            independence_rank(&[z, vec![c(1.0, 0.0)]], 1e-9),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn rejects_unnormalized() {
        assert!(matches!(
            QubitState::new(c(1.0, 0.0), c(1.0, 0.0)),
            Err(Error::NotNormalized { .. })
        ));
    }

    fn state_strategy() -> impl Strategy<Value = QubitState> {
        (0.0..PI, -PI..PI, -PI..PI)
            .prop_map(|(t, p, g)| QubitState::from_bloch(t, p).with_phase(Complex64::from_polar(1.0, g)))
    }

    proptest! {
        #![proptest_config(ProptestConfig { cases: 1000, ..ProptestConfig::default() })]

        #[test]
        fn complement_is_orthogonal(s in state_strategy()) {
            prop_assert!(s.overlap(&s.complement()).norm() < 1e-12);
            let n = s.complement().overlap(&s.complement()).re;
            prop_assert!((n - 1.0).abs() < 1e-12);
        }

        #[test]
        fn double_complement_is_negation(s in state_strategy()) {
            let cc = s.complement().complement();
            prop_assert!(close(cc.alpha(), -s.alpha(), 1e-12));
            prop_assert!(close(cc.beta(), -s.beta(), 1e-12));
        }

        #[test]
        fn complement_is_conjugate_linear(s in state_strategy(), g in -PI..PI) {
            let ph = Complex64::from_polar(1.0, g);
            let lhs = s.with_phase(ph).complement();
            let rhs = s.complement().with_phase(ph.conj());
            prop_assert!(close(lhs.alpha(), rhs.alpha(), 1e-12));
            prop_assert!(close(lhs.beta(), rhs.beta(), 1e-12));
        }

        #[test]
        fn real_sets_have_antisymmetric_cross_overlaps(t1 in 0.0..(2.0 * PI), t2 in 0.0..(2.0 * PI)) {
            let p1 = QubitState::from_bloch(t1, 0.0);
            let p2 = QubitState::from_bloch(t2, 0.0);
            let lhs = p1.complement().overlap(&p2);
            let rhs = p1.overlap(&p2.complement());
            prop_assert!(close(lhs, -rhs, 1e-12));
        }
    }
}
