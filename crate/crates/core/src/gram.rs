//! Gram matrices of the branch inputs and targets.
//!
//! One bilinear form covers every family: the Hadamard case is the gate
//! `a = b = 1/√2`, and non-identical success probes enter as an entrywise
//! weight on the target Gram matrices.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{psd_classify, CMatrix, PSD_TOL};
use crate::state::{QubitState, StateSet};

const GATE_NORM_TOL: f64 = 1e-12;
const UNIT_DIAGONAL_TOL: f64 = 1e-10;

/// Coefficients of `Ψ → aΨ + bΨ̄`, `Ψ̄ → b*Ψ − a*Ψ̄`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GateSpec {
    a: Complex64,
    b: Complex64,
}

impl GateSpec {
    pub fn new(a: Complex64, b: Complex64) -> Result<Self> {
        let n = a.norm_sqr() + b.norm_sqr();
        if !n.is_finite() || (n - 1.0).abs() > GATE_NORM_TOL {
            return Err(Error::InvalidGate(format!("|a|^2 + |b|^2 = {n}, expected 1")));
        }
        Ok(GateSpec { a, b })
    }

    pub fn hadamard() -> Self {
        GateSpec {
            a: Complex64::new(FRAC_1_SQRT_2, 0.0),
            b: Complex64::new(FRAC_1_SQRT_2, 0.0),
        }
    }

    pub fn identity() -> Self {
        GateSpec {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
        }
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }

    pub fn b(&self) -> Complex64 {
        self.b
    }

    /// `a|Ψ⟩ + b|Ψ̄⟩`; unit norm because `Ψ ⊥ Ψ̄`.
    pub fn plus_target(&self, psi: &QubitState) -> QubitState {
        combine(self.a, *psi, self.b, psi.complement())
    }

    /// `b*|Ψ⟩ − a*|Ψ̄⟩`, the image of `Ψ̄` under the gate.
    pub fn minus_target(&self, psi: &QubitState) -> QubitState {
        combine(self.b.conj(), *psi, -self.a.conj(), psi.complement())
    }

    pub fn target(&self, branch: Branch, psi: &QubitState) -> QubitState {
        match branch {
            Branch::Plus => self.plus_target(psi),
            Branch::Minus => self.minus_target(psi),
        }
    }
}

fn combine(x: Complex64, s: QubitState, y: Complex64, t: QubitState) -> QubitState {
    QubitState::normalized(x * s.alpha() + y * t.alpha(), x * s.beta() + y * t.beta())
        .expect("orthogonal combination with unit coefficients is nonzero")
}

impl Serialize for GateSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            a: [f64; 2],
            b: [f64; 2],
        }
        Repr {
            a: [self.a.re, self.a.im],
            b: [self.b.re, self.b.im],
        }
        .serialize(s)
    }
}

/// Which row family of the machine: inputs `Ψᵢ` (plus) or `Ψ̄ᵢ` (minus).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn inputs(self, set: &StateSet) -> [QubitState; 2] {
        match self {
            Branch::Plus => set.psi(),
            Branch::Minus => set.psibar(),
        }
    }

    /// Gate image of each branch input, as `[target₁, target₂]`.
    pub fn targets(self, set: &StateSet, gate: &GateSpec) -> [QubitState; 2] {
        set.psi().map(|p| gate.target(self, &p))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GramSet {
    pub x_in_plus: CMatrix,
    pub x_out_plus: CMatrix,
    pub x_in_minus: CMatrix,
    pub x_out_minus: CMatrix,
    pub probe_overlap: CMatrix,
}

impl GramSet {
    pub fn branch(&self, branch: Branch) -> (&CMatrix, &CMatrix) {
        match branch {
            Branch::Plus => (&self.x_in_plus, &self.x_out_plus),
            Branch::Minus => (&self.x_in_minus, &self.x_out_minus),
        }
    }
}

fn pair_gram(states: &[QubitState; 2], weight: &CMatrix) -> CMatrix {
    let mut g = CMatrix::zeros(2, 2);
    for i in 0..2 {
        for j in 0..2 {
            g[(i, j)] = states[i].overlap(&states[j]) * weight[(i, j)];
        }
    }
    g
}

pub fn all_ones_probe_overlap() -> CMatrix {
    CMatrix::from_real_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]])
}

fn validate_probe_overlap(p: &CMatrix) -> Result<()> {
    if p.rows() != 2 || p.cols() != 2 {
        return Err(Error::InvalidProbeOverlap(format!("expected 2x2, got {}x{}", p.rows(), p.cols())));
    }
    for i in 0..2 {
        if (p[(i, i)] - Complex64::new(1.0, 0.0)).norm() > UNIT_DIAGONAL_TOL {
            return Err(Error::InvalidProbeOverlap(format!("diagonal entry {i} is not 1")));
        }
    }
    let class = psd_classify(p, PSD_TOL).map_err(|e| Error::InvalidProbeOverlap(e.to_string()))?;
    if !class.is_psd() {
        return Err(Error::InvalidProbeOverlap(format!(
            "not positive semidefinite (min eigenvalue {:e})",
            class.min_eigenvalue
        )));
    }
    Ok(())
}

/// Builds input and target Gram matrices of both branches.
///
/// `probe_overlap` holds `⟨P⁽ⁱ⁾|P⁽ʲ⁾⟩` for the success probes; `None` means
/// identical probes (all-ones).
pub fn build_grams(set: &StateSet, gate: &GateSpec, probe_overlap: Option<&CMatrix>) -> Result<GramSet> {
    let probe = match probe_overlap {
        Some(p) => {
            validate_probe_overlap(p)?;
            p.clone()
        }
        None => all_ones_probe_overlap(),
    };
    let ones = all_ones_probe_overlap();
    Ok(GramSet {
        x_in_plus: pair_gram(&Branch::Plus.inputs(set), &ones),
        x_out_plus: pair_gram(&Branch::Plus.targets(set, gate), &probe),
        x_in_minus: pair_gram(&Branch::Minus.inputs(set), &ones),
        x_out_minus: pair_gram(&Branch::Minus.targets(set, gate), &probe),
        probe_overlap: probe,
    })
}
