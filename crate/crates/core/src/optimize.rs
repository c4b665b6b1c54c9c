//! Maximizing a branch's average efficiency under the PSD residual constraint.
//!
//! Along any ray `e = s·d` from the origin the residual is affine in `s`, so
//! the feasible scales form an interval `[0, s*]` and bisection finds its
//! end. The optimizer sweeps rays through the boundary of the unit box,
//! refines the best one with golden-section search over the ray direction,
//! and finishes with coordinate-wise bisection.

use serde::Serialize;

use crate::feasibility::residual;
use crate::linalg::{psd_classify, CMatrix, PSD_TOL};

const RAY_COUNT: usize = 64;
const RAY_RESOLUTION: f64 = 1e-12;
const COORD_RESOLUTION: f64 = 1e-10;
const GOLDEN_STEPS: usize = 60;
const TIE_TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OptimizationResult {
    pub best_eff: [f64; 2],
    pub best_average: f64,
    /// Smallest residual eigenvalue at `best_eff`.
    pub boundary_certificate: f64,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct OptimizerOptions {
    /// Restrict the search to `e₁ = e₂`.
    pub equal_eff: bool,
    /// Absolute slack on the smallest residual eigenvalue.
    pub feasibility_tol: f64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        OptimizerOptions {
            equal_eff: false,
            feasibility_tol: 1e-12,
        }
    }
}

/// Closed-form smallest eigenvalue of a 2×2 Hermitian matrix.
pub fn min_eigenvalue_2x2(m: &CMatrix) -> f64 {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = m[(0, 1)].norm();
    let half_gap = 0.5 * (a - d);
    0.5 * (a + d) - (half_gap * half_gap + b * b).sqrt()
}

struct Problem<'a> {
    x_in: &'a CMatrix,
    x_out: &'a CMatrix,
    tol: f64,
    evals: usize,
}

impl Problem<'_> {
    fn min_eig(&self, e: [f64; 2]) -> f64 {
        let r = residual(self.x_in, self.x_out, [e[0].clamp(0.0, 1.0), e[1].clamp(0.0, 1.0)])
            .expect("clamped efficiencies are in range");
        min_eigenvalue_2x2(&r)
    }

    fn feasible(&mut self, e: [f64; 2]) -> bool {
        self.evals += 1;
        self.min_eig(e) >= -self.tol
    }

    /// Largest feasible point on the segment from the origin to `dir`.
    fn ray_max(&mut self, dir: [f64; 2]) -> [f64; 2] {
        if self.feasible(dir) {
            return dir;
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        while hi - lo > RAY_RESOLUTION {
            let mid = 0.5 * (lo + hi);
            if self.feasible([mid * dir[0], mid * dir[1]]) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        [lo * dir[0], lo * dir[1]]
    }

    /// Pushes coordinate `k` upward with the other held fixed.
    ///
    /// For fixed `e_other` the feasible `√e_k` form an interval (the
    /// determinant is concave in it), so bisection from a feasible start is
    /// sound.
    fn push_coordinate(&mut self, mut e: [f64; 2], k: usize) -> [f64; 2] {
        let mut top = e;
        top[k] = 1.0;
        if self.feasible(top) {
            return top;
        }
        let (mut lo, mut hi) = (e[k], 1.0);
        while hi - lo > COORD_RESOLUTION {
            let mid = 0.5 * (lo + hi);
            let mut probe = e;
            probe[k] = mid;
            if self.feasible(probe) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        e[k] = lo;
        e
    }
}

/// Point on the upper-right boundary of the unit box, `u ∈ [0, 2]`.
fn box_boundary(u: f64) -> [f64; 2] {
    if u <= 1.0 {
        [1.0, u]
    } else {
        [2.0 - u, 1.0]
    }
}

fn average(e: [f64; 2]) -> f64 {
    0.5 * (e[0] + e[1])
}

/// Larger average wins; near-ties go to larger `e₁`, then larger `e₂`.
fn better(candidate: [f64; 2], incumbent: [f64; 2]) -> bool {
    let (ca, ia) = (average(candidate), average(incumbent));
    if (ca - ia).abs() > TIE_TOL {
        return ca > ia;
    }
    if (candidate[0] - incumbent[0]).abs() > TIE_TOL {
        return candidate[0] > incumbent[0];
    }
    candidate[1] > incumbent[1] + TIE_TOL
}

pub fn maximize_branch(x_in: &CMatrix, x_out: &CMatrix) -> OptimizationResult {
    maximize_branch_with(x_in, x_out, OptimizerOptions::default())
}

pub fn maximize_branch_with(x_in: &CMatrix, x_out: &CMatrix, opts: OptimizerOptions) -> OptimizationResult {
    let mut prob = Problem {
        x_in,
        x_out,
        tol: opts.feasibility_tol,
        evals: 0,
    };

    let best = if opts.equal_eff {
        prob.ray_max([1.0, 1.0])
    } else {
        let sweep: Vec<f64> = (0..=RAY_COUNT).map(|k| 2.0 * k as f64 / RAY_COUNT as f64).collect();
        let mut best = [0.0, 0.0];
        let mut best_k = 0;
        for (k, &u) in sweep.iter().enumerate() {
            let cand = prob.ray_max(box_boundary(u));
            if better(cand, best) {
                best = cand;
                best_k = k;
            }
        }

        // golden-section over the direction between the neighbouring rays
        let (mut lo, mut hi) = (
            sweep[best_k.saturating_sub(1)],
            sweep[(best_k + 1).min(RAY_COUNT)],
        );
        let ratio = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = hi - ratio * (hi - lo);
        let mut x2 = lo + ratio * (hi - lo);
        let mut p1 = prob.ray_max(box_boundary(x1));
        let mut p2 = prob.ray_max(box_boundary(x2));
        for _ in 0..GOLDEN_STEPS {
            if average(p1) >= average(p2) {
                hi = x2;
                x2 = x1;
                p2 = p1;
                x1 = hi - ratio * (hi - lo);
                p1 = prob.ray_max(box_boundary(x1));
            } else {
                lo = x1;
                x1 = x2;
                p1 = p2;
                x2 = lo + ratio * (hi - lo);
                p2 = prob.ray_max(box_boundary(x2));
            }
        }
        for cand in [p1, p2] {
            if better(cand, best) {
                best = cand;
            }
        }

        for k in [0, 1] {
            let cand = prob.push_coordinate(best, k);
            if better(cand, best) {
                best = cand;
            }
        }
        best
    };

    OptimizationResult {
        best_eff: best,
        best_average: average(best),
        boundary_certificate: prob.min_eig(best),
        iterations: prob.evals,
    }
}

/// Exhaustive scan of the `[0,1]²` grid with spacing `step`.
///
/// Feasibility goes through the Jacobi eigensolver rather than the closed
/// form used by the optimizer. Returns `(e₁, e₂, average)`; ties go to the
/// larger `e₁`, then the larger `e₂`.
pub fn grid_oracle(x_in: &CMatrix, x_out: &CMatrix, step: f64) -> (f64, f64, f64) {
    assert!(step > 0.0 && step <= 0.1, "grid step must lie in (0, 0.1]");
    let n = (1.0 / step - 1e-9).ceil() as usize;
    let axis: Vec<f64> = (0..=n).map(|i| (i as f64 * step).min(1.0)).collect();
    let mut best = (0.0, 0.0, 0.0);
    for &e1 in &axis {
        for &e2 in &axis {
            let avg = 0.5 * (e1 + e2);
            let improves = avg > best.2 || (avg == best.2 && (e1, e2) > (best.0, best.1));
            if !improves {
                continue;
            }
            let r = residual(x_in, x_out, [e1, e2]).expect("grid points lie in [0, 1]");
            if psd_classify(&r, PSD_TOL).is_ok_and(|c| c.is_psd()) {
                best = (e1, e2, avg);
            }
        }
    }
    best
}
