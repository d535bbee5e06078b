//! Convex QCQP solved by a primal-dual interior-point method.
//!
//! Problem form, over `x ∈ R^n` with all `A_i` symmetric PSD:
//!
//! ```text
//! minimize   xᵀA₀x + b₀ᵀx + c₀
//! subject to xᵀAᵢx + bᵢᵀx + cᵢ ≤ 0,   i = 1..m
//! ```
//!
//! The method is an infeasible-start Mehrotra-style predictor-corrector on
//! the slack form of the KKT system. The Newton matrix `H + JᵀDJ` (with
//! `H = 2A₀ + Σ λᵢ 2Aᵢ` block-diagonal and `J` the constraint Jacobian) is
//! inverted via the matrix inversion lemma: per-block Cholesky of `H` plus a
//! dense `m×m` factorization, so the cost per iteration is linear in the
//! number of diagonal blocks.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::quad::{Partition, QuadForm};
use crate::{ConicError, SolveStatus};

/// Convex QCQP with certified PSD quadratic forms.
#[derive(Debug, Clone)]
pub struct QcqpProblem {
    pub partition: Partition,
    pub objective: QuadForm,
    pub constraints: Vec<QuadForm>,
    /// Set when the objective is known to be strongly convex (uniformly
    /// positive-definite quadratic). Enables the block-factored Newton
    /// path; without it the Newton matrix is assembled densely, which
    /// stays stable when the objective carries little or no curvature.
    pub strongly_convex: bool,
}

impl QcqpProblem {
    /// Build and certify convexity of the objective and every constraint
    /// (min eigenvalue `≥ -1e-9` relative, checked per block).
    pub fn new(
        partition: Partition,
        objective: QuadForm,
        constraints: Vec<QuadForm>,
    ) -> Result<Self, ConicError> {
        objective.certify_convex(1e-9)?;
        for c in &constraints {
            c.certify_convex(1e-9)?;
        }
        Ok(Self::new_certified(partition, objective, constraints))
    }

    /// Build without the eigenvalue check. For forms that are PSD by
    /// construction (sums of outer products, nonnegative diagonals, or
    /// restrictions of certified forms).
    pub fn new_certified(
        partition: Partition,
        objective: QuadForm,
        constraints: Vec<QuadForm>,
    ) -> Self {
        Self {
            partition,
            objective,
            constraints,
            strongly_convex: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.partition.dim()
    }

    /// Serialize for cross-checking against an external solver: matrices in
    /// row-major order, then linear terms, constants and tolerances.
    pub fn dump_json(&self, tolerance: f64) -> String {
        fn form_json(p: &Partition, f: &QuadForm) -> serde_json::Value {
            let n = p.dim();
            let mut dense = vec![0.0; n * n];
            for b in 0..p.n_blocks() {
                let r = p.range(b);
                for (li, gi) in r.clone().enumerate() {
                    for (lj, gj) in r.clone().enumerate() {
                        dense[gi * n + gj] = f.blocks[b][(li, lj)];
                    }
                }
            }
            serde_json::json!({
                "quadratic_row_major": dense,
                "linear": f.lin.as_slice(),
                "constant": f.cst,
            })
        }
        let v = serde_json::json!({
            "n": self.dim(),
            "objective": form_json(&self.partition, &self.objective),
            "constraints": self.constraints.iter()
                .map(|c| form_json(&self.partition, c)).collect::<Vec<_>>(),
            "sense": "<= 0",
            "tolerance": tolerance,
        });
        v.to_string()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QcqpOptions {
    /// Relative KKT tolerance.
    pub tol: f64,
    /// Interior-point iteration cap.
    pub max_iter: usize,
    /// Static factorization regularization added to the diagonal of `H`.
    pub reg: f64,
    /// Declare infeasibility when the phase-I minimal slack exceeds this.
    pub infeas_slack: f64,
}

impl Default for QcqpOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 200,
            reg: 1e-11,
            infeas_slack: 1e-7,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, serde::Serialize)]
pub struct KktResiduals {
    pub primal: f64,
    pub dual: f64,
    pub complementarity: f64,
}

#[derive(Debug, Clone)]
pub struct QcqpSolution {
    pub status: SolveStatus,
    pub x: DVector<f64>,
    pub objective: f64,
    pub kkt: KktResiduals,
    pub iterations: usize,
    /// Phase-I minimal slack, attached when status is `Infeasible`.
    pub infeasibility: Option<f64>,
    /// Lagrange multipliers of the inequality constraints at the last iterate.
    pub multipliers: DVector<f64>,
}

struct Iterate {
    x: DVector<f64>,
    s: DVector<f64>,
    lam: DVector<f64>,
}

struct Evals {
    f: DVector<f64>,
    jac: DMatrix<f64>,
    grad_obj: DVector<f64>,
}

fn evaluate(p: &QcqpProblem, x: &DVector<f64>) -> Evals {
    let m = p.constraints.len();
    let n = p.dim();
    let mut f = DVector::zeros(m);
    let mut jac = DMatrix::zeros(m, n);
    for (i, c) in p.constraints.iter().enumerate() {
        f[i] = c.value(&p.partition, x);
        let g = c.gradient(&p.partition, x);
        jac.row_mut(i).copy_from(&g.transpose());
    }
    Evals {
        f,
        jac,
        grad_obj: p.objective.gradient(&p.partition, x),
    }
}

/// Assembled Hessian of the Lagrangian, `H = 2A₀ + Σ λᵢ 2Aᵢ + shift·I`,
/// block-diagonal over the partition.
struct HOp {
    blocks: Vec<DMatrix<f64>>,
    shifts: Vec<f64>,
}

impl HOp {
    fn assemble(p: &QcqpProblem, lam: &DVector<f64>, reg: f64) -> Self {
        let part = &p.partition;
        let mut blocks = Vec::with_capacity(part.n_blocks());
        let mut shifts = Vec::with_capacity(part.n_blocks());
        for b in 0..part.n_blocks() {
            let nb = part.size(b);
            let mut h = &p.objective.blocks[b] * 2.0;
            for (i, c) in p.constraints.iter().enumerate() {
                if lam[i] != 0.0 {
                    let w = 2.0 * lam[i];
                    h.zip_apply(&c.blocks[b], |hv, cv| *hv += w * cv);
                }
            }
            let shift = reg * h.amax().max(1.0);
            for d in 0..nb {
                h[(d, d)] += shift;
            }
            blocks.push(h);
            shifts.push(shift);
        }
        Self { blocks, shifts }
    }

    /// `H v` for exactly the assembled (shifted) matrix.
    fn mul(&self, p: &Partition, v: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(v.len());
        for (b, h) in self.blocks.iter().enumerate() {
            let r = p.range(b);
            let vb = v.rows(r.start, p.size(b));
            out.rows_mut(r.start, p.size(b)).copy_from(&(h * &vb));
        }
        out
    }
}

/// Factorization of the reduced Newton matrix `M = H + JᵀDJ`.
///
/// With strong convexity `H` is inverted per block and `M⁻¹` applied via
/// the matrix inversion lemma (cost linear in the number of blocks). With a
/// flat objective that route amplifies rounding through `H⁻¹`, so `M` is
/// assembled and factored densely instead.
enum NewtonFactor {
    Woodbury {
        chols: Vec<Cholesky<f64, Dyn>>,
        /// `H⁻¹Jᵀ`.
        w: DMatrix<f64>,
        /// `D⁻¹ + J H⁻¹ Jᵀ`.
        kchol: Cholesky<f64, Dyn>,
    },
    Dense {
        chol: Cholesky<f64, Dyn>,
    },
}

impl NewtonFactor {
    fn build(
        p: &QcqpProblem,
        h: &HOp,
        jac: &DMatrix<f64>,
        d: &DVector<f64>,
    ) -> Option<Self> {
        let part = &p.partition;
        let n = part.dim();
        let m = jac.nrows();
        if p.strongly_convex {
            let mut chols = Vec::with_capacity(h.blocks.len());
            for hb in &h.blocks {
                chols.push(hb.clone().cholesky()?);
            }
            let mut w = DMatrix::zeros(n, m);
            for i in 0..m {
                let mut col = jac.row(i).transpose();
                for (b, ch) in chols.iter().enumerate() {
                    let r = part.range(b);
                    let mut sub = col.rows(r.start, part.size(b)).clone_owned();
                    ch.solve_mut(&mut sub);
                    col.rows_mut(r.start, part.size(b)).copy_from(&sub);
                }
                w.column_mut(i).copy_from(&col);
            }
            let mut kmat = jac * &w;
            for i in 0..m {
                kmat[(i, i)] += (1.0 / d[i]).max(1e-300);
            }
            let kchol = robust_cholesky(kmat)?;
            Some(NewtonFactor::Woodbury { chols, w, kchol })
        } else {
            let mut mmat = DMatrix::zeros(n, n);
            for (b, hb) in h.blocks.iter().enumerate() {
                let r = part.range(b);
                for (li, gi) in r.clone().enumerate() {
                    for (lj, gj) in r.clone().enumerate() {
                        mmat[(gi, gj)] = hb[(li, lj)];
                    }
                }
            }
            for i in 0..m {
                let di = d[i];
                if di == 0.0 {
                    continue;
                }
                let g = jac.row(i);
                for a in 0..n {
                    let ga = di * g[a];
                    if ga == 0.0 {
                        continue;
                    }
                    for bcol in 0..n {
                        mmat[(a, bcol)] += ga * g[bcol];
                    }
                }
            }
            let chol = robust_cholesky(mmat)?;
            Some(NewtonFactor::Dense { chol })
        }
    }

    fn solve(&self, p: &Partition, rhs: &DVector<f64>, jac: &DMatrix<f64>) -> DVector<f64> {
        match self {
            NewtonFactor::Woodbury { chols, w, kchol } => {
                let mut t1 = rhs.clone();
                for (b, ch) in chols.iter().enumerate() {
                    let r = p.range(b);
                    let mut sub = t1.rows(r.start, p.size(b)).clone_owned();
                    ch.solve_mut(&mut sub);
                    t1.rows_mut(r.start, p.size(b)).copy_from(&sub);
                }
                let jt1 = jac * &t1;
                let t2 = kchol.solve(&jt1);
                &t1 - w * &t2
            }
            NewtonFactor::Dense { chol } => chol.solve(rhs),
        }
    }
}

/// Solve the QCQP. `x0`, when given, seeds the primal iterate.
pub fn solve_qcqp(p: &QcqpProblem, opts: &QcqpOptions, x0: Option<&DVector<f64>>) -> QcqpSolution {
    solve_inner(p, opts, x0, true)
}

fn solve_inner(
    p: &QcqpProblem,
    opts: &QcqpOptions,
    x0: Option<&DVector<f64>>,
    classify_infeasible: bool,
) -> QcqpSolution {
    let n = p.dim();
    let m = p.constraints.len();
    let part = &p.partition;

    if m == 0 {
        // Unconstrained: solve 2A₀x = -b₀ directly.
        let lam = DVector::zeros(0);
        let hop = HOp::assemble(p, &lam, opts.reg.max(1e-12));
        let mut x = -p.objective.lin.clone() * 0.5;
        for (b, hb) in hop.blocks.iter().enumerate() {
            let r = part.range(b);
            let mut sub = x.rows(r.start, part.size(b)).clone_owned();
            let ch = hb
                .clone()
                .cholesky()
                .or_else(|| {
                    HOp::assemble(p, &lam, 1e-8).blocks[b].clone().cholesky()
                })
                .expect("objective block not factorizable");
            ch.solve_mut(&mut sub);
            x.rows_mut(r.start, part.size(b)).copy_from(&sub);
        }
        let grad = p.objective.gradient(part, &x);
        return QcqpSolution {
            status: SolveStatus::Optimal,
            objective: p.objective.value(part, &x),
            kkt: KktResiduals {
                primal: 0.0,
                dual: grad.amax(),
                complementarity: 0.0,
            },
            x,
            iterations: 0,
            infeasibility: None,
            multipliers: lam,
        };
    }

    let mut it = {
        let x = x0.cloned().unwrap_or_else(|| DVector::zeros(n));
        let ev = evaluate(p, &x);
        let s = DVector::from_iterator(m, (0..m).map(|i| (-ev.f[i]).max(0.1)));
        // Balance the initial complementarity products at 1.
        let lam = DVector::from_iterator(m, (0..m).map(|i| (1.0 / s[i]).clamp(1e-8, 1e8)));
        Iterate { x, s, lam }
    };

    let mut best: Option<(f64, QcqpSolution)> = None;
    let mut iterations = 0;
    const STALL_WINDOW: usize = 20;
    let mut stall_merit = f64::INFINITY;
    let mut stall_check_at = STALL_WINDOW;

    for k in 0..opts.max_iter {
        iterations = k;
        let ev = evaluate(p, &it.x);
        let r_dual = &ev.grad_obj + ev.jac.transpose() * &it.lam;
        let r_prim = &ev.f + &it.s;
        let mu = it.s.dot(&it.lam) / m as f64;
        let obj = p.objective.value(part, &it.x);

        let rd_rel = r_dual.amax() / (1.0 + ev.grad_obj.amax());
        let rp_rel = r_prim.amax() / (1.0 + ev.f.amax() + it.s.amax());
        let comp_rel = mu / (1.0 + obj.abs());
        // Feasibility and complementarity dominate the iterate ranking: on
        // problems without a strictly feasible point the dual residual
        // floors while x still converges, and the returned iterate should
        // be the one with the best primal story.
        let merit = rp_rel.max(comp_rel) * 1e6 + rd_rel;

        let kkt = KktResiduals {
            primal: rp_rel,
            dual: rd_rel,
            complementarity: comp_rel,
        };
        if std::env::var_os("CONIC_TRACE").is_some() {
            eprintln!(
                "qcqp it {k:3}  rp {rp_rel:9.2e}  rd {rd_rel:9.2e}  mu {comp_rel:9.2e}  obj {obj:12.5e}  lam_max {:9.2e}",
                it.lam.amax()
            );
        }
        if best.as_ref().map_or(true, |(bm, _)| merit < *bm) {
            best = Some((
                merit,
                QcqpSolution {
                    status: SolveStatus::MaxIter,
                    x: it.x.clone(),
                    objective: obj,
                    kkt,
                    iterations: k,
                    infeasibility: None,
                    multipliers: it.lam.clone(),
                },
            ));
        }

        if rd_rel <= opts.tol && rp_rel <= opts.tol && comp_rel <= opts.tol {
            let mut sol = best.unwrap().1;
            sol.status = SolveStatus::Optimal;
            sol.iterations = k;
            return sol;
        }

        // Divergence heuristic: multipliers exploding while primal
        // infeasibility persists indicates an infeasible problem.
        if it.lam.amax() > 1e13 && rp_rel > opts.tol {
            break;
        }
        // Stall detection: no meaningful merit progress for a long stretch.
        if k >= stall_check_at && merit > 0.9 * stall_merit {
            break;
        }
        if k % STALL_WINDOW == 0 {
            stall_merit = merit;
            stall_check_at = k + STALL_WINDOW;
        }

        // Assemble and factor the Newton matrix, escalating the
        // regularization if the factorization fails.
        let d = DVector::from_iterator(m, (0..m).map(|i| (it.lam[i] / it.s[i]).min(1e16)));
        let mut reg = if p.strongly_convex { opts.reg } else { opts.reg.max(1e-10) };
        let mut built = None;
        while built.is_none() && reg <= 1e-2 {
            let h = HOp::assemble(p, &it.lam, reg);
            if let Some(f) = NewtonFactor::build(p, &h, &ev.jac, &d) {
                built = Some((h, f));
            } else {
                reg *= 100.0;
            }
        }
        let Some((hop, factor)) = built else { break };

        // Solve one reduced KKT system
        //   H dx + Jᵀ dλ = -r1,  J dx + ds = -r2,  Λ ds + S dλ = -r3.
        let kkt_solve = |r1: &DVector<f64>,
                         r2: &DVector<f64>,
                         r3: &DVector<f64>|
         -> (DVector<f64>, DVector<f64>, DVector<f64>) {
            let inner =
                DVector::from_iterator(m, (0..m).map(|i| (r3[i] - it.lam[i] * r2[i]) / it.s[i]));
            let rhs = -r1 + ev.jac.transpose() * &inner;
            let dx = factor.solve(part, &rhs, &ev.jac);
            let ds = -r2 - &ev.jac * &dx;
            let dlam =
                DVector::from_iterator(m, (0..m).map(|i| (-r3[i] - it.lam[i] * ds[i]) / it.s[i]));
            (dx, ds, dlam)
        };

        // One round of iterative refinement recovers the accuracy lost to
        // the stiffness of H + JᵀDJ near the boundary.
        let newton = |r1: &DVector<f64>, r2: &DVector<f64>, r3: &DVector<f64>| {
            let (mut dx, mut ds, mut dlam) = kkt_solve(r1, r2, r3);
            let d1 = -r1 - hop.mul(part, &dx) - ev.jac.transpose() * &dlam;
            let d2 = -r2 - &ev.jac * &dx - &ds;
            let d3 = DVector::from_iterator(
                m,
                (0..m).map(|i| -r3[i] - it.lam[i] * ds[i] - it.s[i] * dlam[i]),
            );
            let (cx, cs, clam) = kkt_solve(&(-&d1), &(-&d2), &(-&d3));
            dx += cx;
            ds += cs;
            dlam += clam;
            (dx, ds, dlam)
        };

        // Predictor (affine scaling) direction.
        let r_c_aff = DVector::from_iterator(m, (0..m).map(|i| it.s[i] * it.lam[i]));
        let (_dx_a, ds_a, dlam_a) = newton(&r_dual, &r_prim, &r_c_aff);
        let ap_a = max_step(&it.s, &ds_a);
        let ad_a = max_step(&it.lam, &dlam_a);
        let mu_aff = (0..m)
            .map(|i| (it.s[i] + ap_a * ds_a[i]) * (it.lam[i] + ad_a * dlam_a[i]))
            .sum::<f64>()
            / m as f64;
        let mut sigma = (mu_aff / mu).powi(3).clamp(0.0, 1.0);
        // Keep the barrier from collapsing while the residuals are still
        // large, or the Newton model loses the leverage to repair them.
        if rd_rel.max(rp_rel) > 10.0 * comp_rel {
            sigma = sigma.max(0.5);
        }

        // Corrector.
        let r_c = DVector::from_iterator(
            m,
            (0..m).map(|i| it.s[i] * it.lam[i] + ds_a[i] * dlam_a[i] - sigma * mu),
        );
        let (dx, ds, dlam) = newton(&r_dual, &r_prim, &r_c);
        // A common step keeps the dual residual on its Newton decrease;
        // with quadratic constraints the Jacobian moves with x, so distinct
        // primal and dual steps would break that cancellation.
        let alpha = 0.99 * max_step(&it.s, &ds).min(max_step(&it.lam, &dlam));

        it.x += &dx * alpha;
        it.s += &ds * alpha;
        it.lam += &dlam * alpha;
        let mut broken = false;
        for i in 0..m {
            if !it.s[i].is_finite() || !it.lam[i].is_finite() {
                broken = true;
                break;
            }
            it.s[i] = it.s[i].max(1e-300);
            it.lam[i] = it.lam[i].max(1e-300);
        }
        if broken || it.x.iter().any(|v| !v.is_finite()) {
            break;
        }
    }

    // Not converged: classify via phase-I unless disabled.
    let mut sol = best.expect("at least one iterate").clone().1;
    sol.iterations = iterations;
    if classify_infeasible {
        let ph = solve_qcqp_phase1(p, opts, Some(&sol.x));
        if ph.min_slack > opts.infeas_slack {
            sol.status = SolveStatus::Infeasible;
            sol.infeasibility = Some(ph.min_slack);
            return sol;
        }
    }
    sol.status = SolveStatus::MaxIter;
    sol
}

fn max_step(v: &DVector<f64>, dv: &DVector<f64>) -> f64 {
    let mut a: f64 = 1.0;
    for i in 0..v.len() {
        if dv[i] < 0.0 {
            a = a.min(-v[i] / dv[i]);
        }
    }
    a
}

fn robust_cholesky(mut m: DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    let scale = m.amax().max(1.0);
    let mut jitter = 0.0;
    for _ in 0..6 {
        if jitter > 0.0 {
            for d in 0..m.nrows() {
                m[(d, d)] += jitter * scale;
            }
        }
        if let Some(c) = m.clone().cholesky() {
            return Some(c);
        }
        jitter = if jitter == 0.0 { 1e-14 } else { jitter * 100.0 };
    }
    None
}

#[derive(Debug, Clone)]
pub struct Phase1Outcome {
    /// Minimal uniform slack `t*`: the original problem is feasible within
    /// tolerance iff `t* ≤ 0` (up to solver accuracy).
    pub min_slack: f64,
    /// The point achieving the minimal slack (original coordinates).
    pub x: DVector<f64>,
    pub status: SolveStatus,
}

/// Phase-I: minimize the uniform slack `t` subject to `fᵢ(x) ≤ t`.
///
/// A large trust ball `‖x‖² ≤ R²` and a floor on `t` keep the program
/// attained for arbitrary convex data. The start `(x₀, t₀)` with `t₀` above
/// the worst violation is strictly feasible, so this solve is well-centered
/// even when the original problem has no interior.
pub fn solve_qcqp_phase1(
    p: &QcqpProblem,
    opts: &QcqpOptions,
    x0: Option<&DVector<f64>>,
) -> Phase1Outcome {
    let n = p.dim();
    let m = p.constraints.len();
    let x_init = x0.cloned().unwrap_or_else(|| DVector::zeros(n));

    // Extended partition: original blocks plus a scalar block for t.
    let mut sizes: Vec<usize> = (0..p.partition.n_blocks())
        .map(|b| p.partition.size(b))
        .collect();
    sizes.push(1);
    let part = Partition::new(sizes);

    let mut objective = QuadForm::zero(&part);
    objective.lin[n] = 1.0;

    let worst = p
        .constraints
        .iter()
        .map(|c| c.value(&p.partition, &x_init))
        .fold(0.0f64, f64::max);
    let t_floor = 10.0 * (worst.abs() + 1.0);
    let radius2 = 1e6 * (1.0 + x_init.norm_squared());

    let mut constraints = Vec::with_capacity(m + 2);
    for c in p.constraints.iter() {
        let mut ext = QuadForm::zero(&part);
        for b in 0..p.partition.n_blocks() {
            ext.blocks[b] = c.blocks[b].clone();
        }
        for i in 0..n {
            ext.lin[i] = c.lin[i];
        }
        ext.lin[n] = -1.0;
        ext.cst = c.cst;
        constraints.push(ext);
    }
    // -t - t_floor ≤ 0
    let mut floor_c = QuadForm::zero(&part);
    floor_c.lin[n] = -1.0;
    floor_c.cst = -t_floor;
    constraints.push(floor_c);
    // ‖x‖² - R² ≤ 0
    let mut ball = QuadForm::zero(&part);
    ball.add_diag(&part, 0..n, 1.0);
    ball.cst = -radius2;
    constraints.push(ball);

    let ext = QcqpProblem::new_certified(part, objective, constraints);
    let mut z0 = DVector::zeros(n + 1);
    z0.rows_mut(0, n).copy_from(&x_init);
    z0[n] = worst * 1.05 + 0.1;

    let sol = solve_inner(&ext, opts, Some(&z0), false);
    Phase1Outcome {
        min_slack: sol.x[n],
        x: sol.x.rows(0, n).clone_owned(),
        status: sol.status,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(n: usize) -> Partition {
        Partition::single(n)
    }

    #[test]
    fn unconstrained_min_norm_is_zero() {
        let part = single(4);
        let mut obj = QuadForm::zero(&part);
        obj.add_diag(&part, 0..4, 1.0);
        let p = QcqpProblem::new(part, obj, vec![]).unwrap();
        let sol = solve_qcqp(&p, &QcqpOptions::default(), None);
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!(sol.objective.abs() < 1e-10);
    }

    #[test]
    fn forced_point_constraint() {
        // min ‖x‖² s.t. ‖x-a‖² ≤ 0 → x = a even though Slater fails.
        let part = single(3);
        let mut obj = QuadForm::zero(&part);
        obj.add_diag(&part, 0..3, 1.0);
        let a = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let mut con = QuadForm::zero(&part);
        con.add_diag(&part, 0..3, 1.0);
        con.lin = -2.0 * a.clone();
        con.cst = a.norm_squared();
        let p = QcqpProblem::new(part, obj, vec![con]).unwrap();
        let sol = solve_qcqp(&p, &QcqpOptions::default(), None);
        assert!((&sol.x - &a).amax() < 1e-5, "got {:?}", sol.x);
    }

    #[test]
    fn shifted_ball_kkt_by_hand() {
        // min ‖x‖² s.t. (x₁-2)² ≤ 1 → x = (1, 0, ...), objective 1.
        let part = single(3);
        let mut obj = QuadForm::zero(&part);
        obj.add_diag(&part, 0..3, 1.0);
        let mut con = QuadForm::zero(&part);
        con.blocks[0][(0, 0)] = 1.0;
        con.lin[0] = -4.0;
        con.cst = 3.0;
        let p = QcqpProblem::new(part, obj, vec![con]).unwrap();
        let sol = solve_qcqp(&p, &QcqpOptions::default(), None);
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.x[0] - 1.0).abs() < 1e-6);
        assert!(sol.x[1].abs() < 1e-6);
        assert!((sol.objective - 1.0).abs() < 1e-6);
    }

    #[test]
    fn infeasible_pair_is_classified() {
        // x² ≤ -1 is infeasible outright.
        let part = single(1);
        let mut obj = QuadForm::zero(&part);
        obj.add_diag(&part, 0..1, 1.0);
        let mut con = QuadForm::zero(&part);
        con.blocks[0][(0, 0)] = 1.0;
        con.cst = 1.0;
        let p = QcqpProblem::new(part, obj, vec![con]).unwrap();
        let sol = solve_qcqp(&p, &QcqpOptions::default(), None);
        assert_eq!(sol.status, SolveStatus::Infeasible);
        assert!(sol.infeasibility.unwrap() > 0.5);
    }

    #[test]
    fn phase1_reports_negative_slack_for_feasible() {
        let part = single(2);
        let obj = QuadForm::zero(&part);
        let mut con = QuadForm::zero(&part);
        con.add_diag(&part, 0..2, 1.0);
        con.cst = -1.0; // ‖x‖² ≤ 1
        let p = QcqpProblem::new_certified(part, obj, vec![con]);
        let ph = solve_qcqp_phase1(&p, &QcqpOptions::default(), None);
        assert!(ph.min_slack < -0.9, "slack {}", ph.min_slack);
    }
}
