//! Residual-matrix feasibility and the closed-form average-efficiency bounds.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gram::{Branch, GramSet};
use crate::linalg::{psd_classify, CMatrix, PsdClass};
use crate::state::StateSet;

/// Denominators at or below this make the bound report its cap.
const BOUND_DENOMINATOR_TOL: f64 = 1e-12;

/// Diagonal efficiencies `Γ = diag(γ₁, γ₂)` and `Λ = diag(δ₁, δ₂)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EfficiencyPair {
    pub gamma: [f64; 2],
    pub delta: [f64; 2],
}

impl EfficiencyPair {
    pub fn new(gamma: [f64; 2], delta: [f64; 2]) -> Result<Self> {
        for &v in gamma.iter().chain(&delta) {
            check_eff(v)?;
        }
        Ok(EfficiencyPair { gamma, delta })
    }

    pub fn uniform(e: f64) -> Result<Self> {
        EfficiencyPair::new([e, e], [e, e])
    }

    pub fn branch(&self, branch: Branch) -> [f64; 2] {
        match branch {
            Branch::Plus => self.gamma,
            Branch::Minus => self.delta,
        }
    }
}

fn check_eff(v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::EffOutOfRange { value: v });
    }
    Ok(())
}

/// `x_in − D x_out D` with `D = diag(√e₁, √e₂)`.
pub fn residual(x_in: &CMatrix, x_out: &CMatrix, eff: [f64; 2]) -> Result<CMatrix> {
    for &e in &eff {
        check_eff(e)?;
    }
    let d = [eff[0].sqrt(), eff[1].sqrt()];
    let mut r = x_in.clone();
    for i in 0..2 {
        for j in 0..2 {
            r[(i, j)] -= x_out[(i, j)] * (d[i] * d[j]);
        }
    }
    Ok(r)
}

#[derive(Clone, Debug, Serialize)]
pub struct FeasibilityReport {
    pub residual_plus: CMatrix,
    pub residual_minus: CMatrix,
    pub class_plus: PsdClass,
    pub class_minus: PsdClass,
    pub feasible: bool,
}

pub fn check_feasible(grams: &GramSet, eff: &EfficiencyPair, tol: f64) -> Result<FeasibilityReport> {
    let residual_plus = residual(&grams.x_in_plus, &grams.x_out_plus, eff.gamma)?;
    let residual_minus = residual(&grams.x_in_minus, &grams.x_out_minus, eff.delta)?;
    let class_plus = psd_classify(&residual_plus, tol)?;
    let class_minus = psd_classify(&residual_minus, tol)?;
    Ok(FeasibilityReport {
        feasible: class_plus.is_psd() && class_minus.is_psd(),
        residual_plus,
        residual_minus,
        class_plus,
        class_minus,
    })
}

/// Upper bound on a branch's average efficiency.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Bound {
    pub value: f64,
    /// True when the raw ratio was ≥ 1 or undefined and the cap applied.
    pub capped: bool,
}

/// `min(1, (1 − |x_in₁₂|) / (1 − |x_out₁₂|))`.
pub fn branch_bound(grams: &GramSet, branch: Branch) -> Bound {
    let (x_in, x_out) = grams.branch(branch);
    let num = 1.0 - x_in[(0, 1)].norm();
    let den = 1.0 - x_out[(0, 1)].norm();
    if den <= BOUND_DENOMINATOR_TOL {
        return Bound { value: 1.0, capped: true };
    }
    let raw = num / den;
    if raw >= 1.0 {
        Bound { value: 1.0, capped: true }
    } else {
        Bound { value: raw.max(0.0), capped: false }
    }
}

pub fn bound_plus(grams: &GramSet) -> f64 {
    branch_bound(grams, Branch::Plus).value
}

pub fn bound_minus(grams: &GramSet) -> f64 {
    branch_bound(grams, Branch::Minus).value
}

/// True when `⟨Ψ₁|Ψ₂⟩`, `⟨Ψ̄₁|Ψ̄₂⟩` and both Hadamard half-sums agree within `tol`.
pub fn is_polar_great_circle(set: &StateSet, tol: f64) -> bool {
    let (p1, p2, q1, q2) = (set.psi1, set.psi2, set.psibar1, set.psibar2);
    let direct = p1.overlap(&p2);
    let cross = p1.overlap(&q2) + q1.overlap(&p2);
    let bar = q1.overlap(&q2);
    let half_plus = (direct + cross + bar) * 0.5;
    let half_minus = (direct - cross + bar) * 0.5;
    let chain: [Complex64; 3] = [half_plus, bar, half_minus];
    chain.iter().all(|v| (v - direct).norm() <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gram::{build_grams, GateSpec};
    use crate::state::{make_state_set, QubitState};
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn polar_set() -> StateSet {
        make_state_set(QubitState::from_bloch(0.0, 0.0), QubitState::from_bloch(PI / 3.0, 0.0)).unwrap()
    }

    fn complex_set() -> StateSet {
        make_state_set(QubitState::zero(), QubitState::from_bloch(PI / 2.0, PI / 2.0)).unwrap()
    }

    #[test]
    fn residual_examples() {
        let g = build_grams(&complex_set(), &GateSpec::hadamard(), None).unwrap();
        let r = residual(&g.x_in_plus, &g.x_out_plus, [0.0, 0.0]).unwrap();
        assert_eq!(r, g.x_in_plus);

        let pg = build_grams(&polar_set(), &GateSpec::hadamard(), None).unwrap();
        let r = residual(&pg.x_in_plus, &pg.x_out_plus, [1.0, 1.0]).unwrap();
        assert!(r.frobenius_norm() < 1e-15);

        let r = residual(&g.x_in_plus, &g.x_out_plus, [1.0, 1.0]).unwrap();
        let expected = CMatrix::from_rows(&[
            vec![c(0.0, 0.0), c(0.0, FRAC_1_SQRT_2)],
            vec![c(0.0, -FRAC_1_SQRT_2), c(0.0, 0.0)],
        ]);
        assert!(r.max_abs_diff(&expected) < 1e-15);
        let class = psd_classify(&r, 1e-9).unwrap();
        assert!((class.min_eigenvalue + FRAC_1_SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn residual_rejects_out_of_range() {
        let x = CMatrix::identity(2);
        assert!(matches!(residual(&x, &x, [1.2, 0.0]), Err(Error::EffOutOfRange { .. })));
        assert!(matches!(residual(&x, &x, [0.0, -0.1]), Err(Error::EffOutOfRange { .. })));
    }

    #[test]
    fn residual_of_equal_matrices_vanishes() {
        let x = CMatrix::from_rows(&[vec![c(1.0, 0.0), c(0.3, -0.2)], vec![c(0.3, 0.2), c(1.0, 0.0)]]);
        assert!(residual(&x, &x, [1.0, 1.0]).unwrap().frobenius_norm() < 1e-15);
    }

    #[test]
    fn feasibility_examples() {
        let pg = build_grams(&polar_set(), &GateSpec::hadamard(), None).unwrap();
        let rep = check_feasible(&pg, &EfficiencyPair::uniform(1.0).unwrap(), 1e-9).unwrap();
        assert!(rep.feasible);

        let g = build_grams(&complex_set(), &GateSpec::hadamard(), None).unwrap();
        let rep = check_feasible(&g, &EfficiencyPair::new([1.0, 1.0], [0.0, 0.0]).unwrap(), 1e-9).unwrap();
        assert!(!rep.feasible);
        assert!((rep.class_plus.min_eigenvalue + FRAC_1_SQRT_2).abs() < 1e-14);

        let rep = check_feasible(&g, &EfficiencyPair::uniform(0.0).unwrap(), 1e-9).unwrap();
        assert!(rep.feasible);
    }

    #[test]
    fn bound_examples() {
        let pg = build_grams(&polar_set(), &GateSpec::hadamard(), None).unwrap();
        assert_eq!(bound_plus(&pg), 1.0);
        assert_eq!(bound_minus(&pg), 1.0);

        let g = build_grams(&complex_set(), &GateSpec::hadamard(), None).unwrap();
        let b = branch_bound(&g, Branch::Plus);
        assert_eq!(b, Bound { value: 1.0, capped: true });

        let orth = make_state_set(QubitState::zero(), QubitState::one()).unwrap();
        let og = build_grams(&orth, &GateSpec::hadamard(), None).unwrap();
        assert_eq!(bound_plus(&og), 1.0);
    }

    #[test]
    fn bound_below_one_for_generic_set() {
        // |0⟩ and a slightly complex state; targets more distinguishable than inputs
        let set = make_state_set(QubitState::from_bloch(0.4, 0.0), QubitState::from_bloch(0.9, 2.5)).unwrap();
        let g = build_grams(&set, &GateSpec::hadamard(), None).unwrap();
        let x = g.x_in_plus[(0, 1)].norm();
        let y = g.x_out_plus[(0, 1)].norm();
        let b = branch_bound(&g, Branch::Plus);
        if y < x {
            assert!(!b.capped);
            assert!((b.value - (1.0 - x) / (1.0 - y)).abs() < 1e-15);
            assert!(b.value < 1.0);
        } else {
            assert!(b.capped);
            assert_eq!(b.value, 1.0);
        }
    }

    #[test]
    fn polar_examples() {
        assert!(is_polar_great_circle(&polar_set(), 1e-12));
        assert!(!is_polar_great_circle(&complex_set(), 1e-12));
        let orth = make_state_set(QubitState::zero(), QubitState::one()).unwrap();
        assert!(is_polar_great_circle(&orth, 1e-12));
        for k in 1..20 {
            let t = k as f64 * 0.3;
            let set = make_state_set(QubitState::from_bloch(0.1, 0.0), QubitState::from_bloch(t, 0.0));
            if let Ok(set) = set {
                assert!(is_polar_great_circle(&set, 1e-12));
            }
        }
    }
}
