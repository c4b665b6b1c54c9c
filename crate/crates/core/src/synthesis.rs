//! Explicit unitary-plus-measurement machines for one branch.
//!
//! The joint space is system ⊗ probe with the Kronecker index
//! `3·s + p`: system basis `s ∈ {0, 1}`, probe basis `p ∈ {P₀, P₁, P₂}`.
//! `P₀` flags success.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::feasibility::{residual, EfficiencyPair};
use crate::gram::{build_grams, Branch, GateSpec};
use crate::linalg::{
    gram_matrix, hermitian_eig, inner, norm, principal_sqrt_psd_tol, psd_classify, unitary_completion, CMatrix,
    CVector,
};
use crate::state::{QubitState, StateSet};

pub const SYSTEM_DIM: usize = 2;
pub const PROBE_DIM: usize = 3;
pub const JOINT_DIM: usize = SYSTEM_DIM * PROBE_DIM;

/// Probe `P₀` (success) and `P₁`, `P₂` (failure), orthonormal by construction.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct ProbeSpace;

impl ProbeSpace {
    pub const LABELS: [&'static str; PROBE_DIM] = ["P0", "P1", "P2"];

    pub fn dimension(&self) -> usize {
        PROBE_DIM
    }

    /// Projector onto system ⊗ `P₀`.
    pub fn success_projector(&self) -> CMatrix {
        let mut p = CMatrix::zeros(JOINT_DIM, JOINT_DIM);
        for s in 0..SYSTEM_DIM {
            p[(joint_index(s, 0), joint_index(s, 0))] = Complex64::new(1.0, 0.0);
        }
        p
    }
}

pub fn joint_index(system: usize, probe: usize) -> usize {
    system * PROBE_DIM + probe
}

/// `|sys⟩ ⊗ |P_probe⟩` scaled by `weight`.
pub fn embed(sys: &QubitState, probe: usize, weight: Complex64) -> CVector {
    let mut v = vec![Complex64::new(0.0, 0.0); JOINT_DIM];
    v[joint_index(0, probe)] = sys.alpha() * weight;
    v[joint_index(1, probe)] = sys.beta() * weight;
    v
}

/// System amplitudes paired with probe outcome `probe`.
pub fn probe_component(v: &[Complex64], probe: usize) -> [Complex64; 2] {
    [v[joint_index(0, probe)], v[joint_index(1, probe)]]
}

/// Probability of each probe outcome for a joint state.
pub fn probe_distribution(v: &[Complex64]) -> [f64; PROBE_DIM] {
    let mut p = [0.0; PROBE_DIM];
    for (k, slot) in p.iter_mut().enumerate() {
        *slot = probe_component(v, k).iter().map(|x| x.norm_sqr()).sum();
    }
    p
}

/// `|⟨target|s⟩|² / ‖s‖²`, or `None` when `s` vanishes.
pub fn postselected_fidelity(target: &QubitState, success: [Complex64; 2], min_prob: f64) -> Option<f64> {
    let prob = success[0].norm_sqr() + success[1].norm_sqr();
    if prob < min_prob {
        return None;
    }
    let ov = target.alpha().conj() * success[0] + target.beta().conj() * success[1];
    Some((ov.norm_sqr() / prob).min(1.0))
}

/// Distance between two vectors minimized over a global unit phase.
pub fn phase_adjusted_distance(x: &[Complex64], y: &[Complex64]) -> f64 {
    let nx = norm(x);
    let ny = norm(y);
    (nx * nx + ny * ny - 2.0 * inner(y, x).norm()).max(0.0).sqrt()
}

fn distance(x: &[Complex64], y: &[Complex64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
}

/// One branch's rows before completion to a unitary.
#[derive(Clone, Debug, Serialize)]
pub struct BranchSynthesis {
    pub branch: Branch,
    pub gate: GateSpec,
    pub eff: [f64; 2],
    pub inputs: [QubitState; 2],
    pub targets: [QubitState; 2],
    pub residual: CMatrix,
    pub residual_eigs: [f64; 2],
    /// Hermitian PSD square root of the residual.
    pub coeff_matrix: CMatrix,
    /// System state paired with each failure probe `P₁`, `P₂`.
    pub failure_states: [QubitState; 2],
    #[serde(skip)]
    pub rows: Vec<(CVector, CVector)>,
}

/// Assembles the defining rows of one branch at efficiencies `eff`.
///
/// Row `i` maps `|inᵢ⟩|P₀⟩` to `√eᵢ |targetᵢ⟩|P₀⟩ + Σⱼ A*ᵢⱼ |Φ⟩|Pⱼ⟩`
/// where `A` is the principal square root of the residual. Conjugated
/// coefficients make the failure Gram block equal `AA†` exactly; for real
/// `A` they reduce to `aᵢⱼ`.
pub fn build_branch(
    set: &StateSet,
    gate: &GateSpec,
    eff: [f64; 2],
    branch: Branch,
    tol: f64,
) -> Result<BranchSynthesis> {
    if !set.independent {
        return Err(Error::LinearlyDependentPair {
            det_modulus: set.det_modulus,
        });
    }
    let grams = build_grams(set, gate, None)?;
    let (x_in, x_out) = grams.branch(branch);
    let res = residual(x_in, x_out, eff)?;
    let class = psd_classify(&res, tol)?;
    if !class.is_psd() {
        return Err(Error::InfeasibleEfficiency {
            min_eigenvalue: class.min_eigenvalue,
        });
    }
    let eig = hermitian_eig(&res)?;
    let coeff = principal_sqrt_psd_tol(&res, tol)?;

    let failure_state = match branch {
        Branch::Plus => QubitState::zero(),
        Branch::Minus => QubitState::zero().complement(),
    };
    let inputs = branch.inputs(set);
    let targets = branch.targets(set, gate);
    let rows = (0..2)
        .map(|i| {
            let input = embed(&inputs[i], 0, Complex64::new(1.0, 0.0));
            let mut output = embed(&targets[i], 0, Complex64::new(eff[i].sqrt(), 0.0));
            for j in 0..2 {
                let fail = embed(&failure_state, j + 1, coeff[(i, j)].conj());
                for (o, f) in output.iter_mut().zip(fail) {
                    *o += f;
                }
            }
            (input, output)
        })
        .collect();

    Ok(BranchSynthesis {
        branch,
        gate: *gate,
        eff,
        inputs,
        targets,
        residual: res,
        residual_eigs: [eig.eigenvalues[0], eig.eigenvalues[1]],
        coeff_matrix: coeff,
        failure_states: [failure_state; 2],
        rows,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SynthesisDiagnostics {
    /// `‖U†U − I‖_F`
    pub unitarity_defect: f64,
    /// Largest entrywise gap between input and output row Grams.
    pub gram_residual: f64,
    /// Largest `‖U·inᵢ − outᵢ‖`.
    pub row_residual: f64,
    /// `‖AA† − residual‖_F`
    pub coeff_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SynthesisResult {
    pub branch: Branch,
    pub gate: GateSpec,
    pub eff: [f64; 2],
    pub targets: [QubitState; 2],
    pub probe: ProbeSpace,
    pub failure_states: [QubitState; 2],
    pub unitary: CMatrix,
    pub diagnostics: SynthesisDiagnostics,
    #[serde(skip)]
    pub rows: Vec<(CVector, CVector)>,
}

impl SynthesisResult {
    /// `U (|s⟩ ⊗ |P₀⟩)`.
    pub fn evolve(&self, input: &QubitState) -> CVector {
        self.unitary.mul_vec(&embed(input, 0, Complex64::new(1.0, 0.0)))
    }

    /// The 2×2 block of `U` acting within system ⊗ `P₀`.
    pub fn success_block(&self) -> CMatrix {
        self.unitary.submatrix(&[joint_index(0, 0), joint_index(1, 0)])
    }
}

/// Completes the branch rows to a full unitary on system ⊗ probe.
pub fn synthesize(branch_syn: &BranchSynthesis) -> Result<SynthesisResult> {
    let inputs: Vec<CVector> = branch_syn.rows.iter().map(|(x, _)| x.clone()).collect();
    let outputs: Vec<CVector> = branch_syn.rows.iter().map(|(_, y)| y.clone()).collect();
    let gram_residual = gram_matrix(&inputs).max_abs_diff(&gram_matrix(&outputs));
    let unitary = unitary_completion(&branch_syn.rows, JOINT_DIM)?;

    let row_residual = branch_syn
        .rows
        .iter()
        .map(|(x, y)| distance(&unitary.mul_vec(x), y))
        .fold(0.0, f64::max);
    let aa = &branch_syn.coeff_matrix * &branch_syn.coeff_matrix.adjoint();
    let diagnostics = SynthesisDiagnostics {
        unitarity_defect: unitary.unitarity_defect(),
        gram_residual,
        row_residual,
        coeff_residual: (&aa - &branch_syn.residual).frobenius_norm(),
    };

    Ok(SynthesisResult {
        branch: branch_syn.branch,
        gate: branch_syn.gate,
        eff: branch_syn.eff,
        targets: branch_syn.targets,
        probe: ProbeSpace,
        failure_states: branch_syn.failure_states,
        unitary,
        diagnostics,
        rows: branch_syn.rows.clone(),
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct AuditRow {
    /// `Ψ̄ᵢ = c₁Ψ₁ + c₂Ψ₂`, as `[[re, im], [re, im]]`.
    pub expansion: [[f64; 2]; 2],
    pub strict_residual: f64,
    pub phase_adjusted_residual: f64,
    pub success_probability: f64,
    /// `None` when the success component vanishes.
    pub post_selected_fidelity: Option<f64>,
    /// `‖U(Ψ̄ᵢ⊗P₀) − Σ cₖ outₖ‖`; linearity makes this roundoff-sized.
    pub linearity_gap: f64,
}

/// How far the plus-branch machine is from also realizing the minus branch.
#[derive(Clone, Debug, Serialize)]
pub struct AuditReport {
    pub plus_unitarity_defect: f64,
    pub rows: [AuditRow; 2],
}

/// Solves `Ψ̄ᵢ = c₁Ψ₁ + c₂Ψ₂` by Cramer's rule.
fn expand_in_pair(set: &StateSet, v: &QubitState) -> [Complex64; 2] {
    let (p1, p2) = (set.psi1, set.psi2);
    let det = p1.alpha() * p2.beta() - p2.alpha() * p1.beta();
    let c1 = (v.alpha() * p2.beta() - p2.alpha() * v.beta()) / det;
    let c2 = (p1.alpha() * v.beta() - v.alpha() * p1.beta()) / det;
    [c1, c2]
}

/// Builds the plus-branch machine at `Γ` and measures what linearity forces
/// it to do on the complements, against the minus-branch rows at `Λ`.
pub fn joint_audit(set: &StateSet, gate: &GateSpec, eff_pair: &EfficiencyPair, tol: f64) -> Result<AuditReport> {
    let plus = build_branch(set, gate, eff_pair.gamma, Branch::Plus, tol)?;
    let machine = synthesize(&plus)?;
    let minus = build_branch(set, gate, eff_pair.delta, Branch::Minus, tol)?;

    let rows = [0, 1].map(|i| {
        let psibar = set.psibar()[i];
        let coeffs = expand_in_pair(set, &psibar);
        let mut image = vec![Complex64::new(0.0, 0.0); JOINT_DIM];
        for (c, (_, out)) in coeffs.iter().zip(&plus.rows) {
            for (acc, o) in image.iter_mut().zip(out) {
                *acc += c * o;
            }
        }
        let expected = &minus.rows[i].1;
        let success = probe_component(&image, 0);
        AuditRow {
            expansion: coeffs.map(|c| [c.re, c.im]),
            strict_residual: distance(&image, expected),
            phase_adjusted_residual: phase_adjusted_distance(&image, expected),
            success_probability: success.iter().map(|x| x.norm_sqr()).sum(),
            post_selected_fidelity: postselected_fidelity(&minus.targets[i], success, 1e-14),
            linearity_gap: distance(&machine.evolve(&psibar), &image),
        }
    });

    Ok(AuditReport {
        plus_unitarity_defect: machine.diagnostics.unitarity_defect,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::PSD_TOL;
    use crate::optimize::maximize_branch;
    use crate::state::make_state_set;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn polar_set() -> StateSet {
        make_state_set(QubitState::from_bloch(0.0, 0.0), QubitState::from_bloch(PI / 3.0, 0.0)).unwrap()
    }

    /// Real rotation taking `(cos t, sin t)` to `(cos(t − π/4), sin(t − π/4))`.
    fn quarter_turn_back() -> CMatrix {
        let (s, c) = FRAC_PI_4.sin_cos();
        CMatrix::from_real_rows(&[vec![c, s], vec![-s, c]])
    }

    fn random_set(rng: &mut ChaCha8Rng) -> StateSet {
        loop {
            let s1 = QubitState::from_bloch(rng.gen_range(0.0..PI), rng.gen_range(-PI..PI));
            let s2 = QubitState::from_bloch(rng.gen_range(0.0..PI), rng.gen_range(-PI..PI));
            if let Ok(set) = make_state_set(s1, s2) {
                if set.det_modulus > 1e-3 {
                    return set;
                }
            }
        }
    }

    #[test]
    fn polar_unit_efficiency_has_no_failure_terms() {
        let b = build_branch(&polar_set(), &GateSpec::hadamard(), [1.0, 1.0], Branch::Plus, PSD_TOL).unwrap();
        assert!(b.coeff_matrix.frobenius_norm() < 1e-7);
        for (_, out) in &b.rows {
            let p = probe_distribution(out);
            assert!((p[0] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_efficiency_uses_input_gram_root() {
        let set = make_state_set(QubitState::from_bloch(0.8, 0.5), QubitState::from_bloch(2.2, -1.0)).unwrap();
        let b = build_branch(&set, &GateSpec::hadamard(), [0.0, 0.0], Branch::Plus, PSD_TOL).unwrap();
        let grams = build_grams(&set, &GateSpec::hadamard(), None).unwrap();
        let root = principal_sqrt_psd_tol(&grams.x_in_plus, PSD_TOL).unwrap();
        assert!(b.coeff_matrix.max_abs_diff(&root) < 1e-14);
        for (_, out) in &b.rows {
            assert_eq!(probe_distribution(out)[0], 0.0);
        }
    }

    #[test]
    fn minus_branch_at_optimum_preserves_gram() {
        let set = make_state_set(QubitState::zero(), QubitState::from_bloch(PI / 2.0, 0.0)).unwrap();
        let grams = build_grams(&set, &GateSpec::hadamard(), None).unwrap();
        let opt = maximize_branch(&grams.x_in_minus, &grams.x_out_minus);
        let b = build_branch(&set, &GateSpec::hadamard(), opt.best_eff, Branch::Minus, PSD_TOL).unwrap();
        for (_, out) in &b.rows {
            assert!((norm(out) - 1.0).abs() < 1e-10);
        }
        let ins: Vec<CVector> = b.rows.iter().map(|r| r.0.clone()).collect();
        let outs: Vec<CVector> = b.rows.iter().map(|r| r.1.clone()).collect();
        assert!(gram_matrix(&ins).max_abs_diff(&gram_matrix(&outs)) < 1e-8);
        assert!(synthesize(&b).is_ok());
    }

    #[test]
    fn infeasible_efficiency_is_rejected() {
        let set = make_state_set(QubitState::zero(), QubitState::from_bloch(PI / 2.0, PI / 2.0)).unwrap();
        let err = build_branch(&set, &GateSpec::hadamard(), [1.0, 1.0], Branch::Plus, PSD_TOL).unwrap_err();
        assert!(matches!(err, Error::InfeasibleEfficiency { .. }));
    }

    #[test]
    fn polar_machine_block_is_quarter_turn() {
        let b = build_branch(&polar_set(), &GateSpec::hadamard(), [1.0, 1.0], Branch::Plus, PSD_TOL).unwrap();
        let m = synthesize(&b).unwrap();
        assert!(m.success_block().max_abs_diff(&quarter_turn_back()) < 1e-9);
        assert!(m.diagnostics.unitarity_defect <= 1e-10);
    }

    #[test]
    fn identity_gate_gives_identity_block() {
        let set = make_state_set(QubitState::from_bloch(0.4, 1.3), QubitState::from_bloch(2.0, -0.7)).unwrap();
        let b = build_branch(&set, &GateSpec::identity(), [1.0, 1.0], Branch::Plus, PSD_TOL).unwrap();
        let m = synthesize(&b).unwrap();
        assert!(m.success_block().max_abs_diff(&CMatrix::identity(2)) < 1e-10);
    }

    #[test]
    fn seeded_machines_satisfy_contracts() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..40 {
            let set = random_set(&mut rng);
            let gate = GateSpec::new(
                Complex64::from_polar(0.6, rng.gen_range(-PI..PI)),
                Complex64::from_polar(0.8, rng.gen_range(-PI..PI)),
            )
            .unwrap();
            let grams = build_grams(&set, &gate, None).unwrap();
            for branch in [Branch::Plus, Branch::Minus] {
                let (x_in, x_out) = grams.branch(branch);
                let opt = maximize_branch(x_in, x_out);
                // a common scale keeps the residual a convex mix of X_in and a PSD point
                let t = rng.gen_range(0.5..1.0);
                let eff = opt.best_eff.map(|e| e * t);
                let b = build_branch(&set, &gate, eff, branch, PSD_TOL).unwrap_or_else(|e| panic!("{e:?} {eff:?} {opt:?}"));
                let m = synthesize(&b).unwrap();
                assert!(m.diagnostics.unitarity_defect <= 1e-10);
                assert!(m.diagnostics.row_residual <= 1e-9);
                assert!(m.diagnostics.coeff_residual <= 1e-9);

                // Gram preservation
                let x = &b.rows[0].0;
                let y = &b.rows[1].0;
                let lhs = inner(&m.unitary.mul_vec(x), &m.unitary.mul_vec(y));
                assert!((lhs - inner(x, y)).norm() <= 1e-10);

                for (i, input) in b.inputs.iter().enumerate() {
                    let out = m.evolve(input);
                    let success = probe_component(&out, 0);
                    let p = success[0].norm_sqr() + success[1].norm_sqr();
                    assert!((p - eff[i]).abs() <= 1e-9);
                    if eff[i] > 1e-6 {
                        let f = postselected_fidelity(&b.targets[i], success, 1e-14).unwrap();
                        assert!(f >= 1.0 - 1e-10);
                    }
                    // the P₀ block carries only the success term
                    let expected = b.targets[i].amplitudes().map(|a| a * eff[i].sqrt());
                    let gap = ((success[0] - expected[0]).norm_sqr() + (success[1] - expected[1]).norm_sqr()).sqrt();
                    assert!(gap <= 1e-10);
                }
            }
        }
    }

    #[test]
    fn audit_polar_set() {
        let eff = EfficiencyPair::uniform(1.0).unwrap();
        let rep = joint_audit(&polar_set(), &GateSpec::hadamard(), &eff, PSD_TOL).unwrap();
        for row in &rep.rows {
            assert!(row.phase_adjusted_residual <= 1e-9);
            assert!((row.strict_residual - 2.0).abs() <= 1e-9);
            assert!(row.linearity_gap <= 1e-9);
        }
    }

    #[test]
    fn audit_identity_gate() {
        let set = make_state_set(QubitState::from_bloch(0.4, 1.3), QubitState::from_bloch(2.0, -0.7)).unwrap();
        let eff = EfficiencyPair::uniform(1.0).unwrap();
        let rep = joint_audit(&set, &GateSpec::identity(), &eff, PSD_TOL).unwrap();
        // the machine leaves Ψ̄ᵢ untouched while the complement branch asks for −Ψ̄ᵢ
        for row in &rep.rows {
            assert!((row.strict_residual - 2.0).abs() <= 1e-9);
            assert!(row.phase_adjusted_residual <= 1e-9);
            assert!(row.linearity_gap <= 1e-9);
        }
    }

    #[test]
    fn audit_matches_rotation_oracle() {
        // independent route: apply the quarter-turn to Ψ̄ᵢ directly
        let set = polar_set();
        let eff = EfficiencyPair::uniform(1.0).unwrap();
        let rep = joint_audit(&set, &GateSpec::hadamard(), &eff, PSD_TOL).unwrap();
        let rot = quarter_turn_back();
        for (i, row) in rep.rows.iter().enumerate() {
            let psibar = set.psibar()[i];
            let image = rot.mul_vec(&psibar.to_vector());
            let target = GateSpec::hadamard().minus_target(&set.psi()[i]).to_vector();
            let strict = distance(&image, &target);
            assert!((row.strict_residual - strict).abs() <= 1e-9);
            let neg: Vec<Complex64> = target.iter().map(|x| -x).collect();
            assert!(distance(&image, &neg) <= 1e-9);
            let f = row.post_selected_fidelity.unwrap();
            assert!((f - 1.0).abs() <= 1e-9);
        }
    }
}
