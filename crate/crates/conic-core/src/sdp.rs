//! Small dense semidefinite programs.
//!
//! Variables are a product of dense symmetric PSD blocks and a nonnegative
//! orthant of scalar variables. Constraints are linear (trace) forms with
//! `≤ / ≥ / =` senses; inequalities receive internal slack variables. The
//! solver is a primal-dual predictor-corrector path-following method with
//! the HKM direction and a dense Schur complement, adequate for the block
//! sizes this crate targets (tens of rows per block).

use nalgebra::{DMatrix, DVector};

use crate::SolveStatus;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpSense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct SdpConstraint {
    /// Symmetric coefficient matrix per PSD block (`None` for zero).
    pub mats: Vec<Option<DMatrix<f64>>>,
    /// Sparse coefficients on the nonnegative scalar variables.
    pub lin: Vec<(usize, f64)>,
    pub sense: SdpSense,
    pub rhs: f64,
}

#[derive(Debug, Clone)]
pub struct SdpProblem {
    pub block_sizes: Vec<usize>,
    /// Number of user nonnegative scalar variables.
    pub n_lin: usize,
    /// Objective: `Σ ⟨obj_mats[b], X_b⟩ + obj_linᵀx_lin`, minimized.
    pub obj_mats: Vec<Option<DMatrix<f64>>>,
    pub obj_lin: Vec<f64>,
    pub constraints: Vec<SdpConstraint>,
}

#[derive(Debug, Clone, Copy)]
pub struct SdpOptions {
    /// Relative duality-gap tolerance.
    pub tol_gap: f64,
    /// Relative primal/dual feasibility tolerance.
    pub tol_feas: f64,
    pub max_iter: usize,
    /// Phase-I slack threshold for declaring infeasibility.
    pub infeas_slack: f64,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self {
            tol_gap: 1e-6,
            tol_feas: 1e-7,
            max_iter: 120,
            infeas_slack: 1e-7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub status: SolveStatus,
    /// PSD block values.
    pub blocks: Vec<DMatrix<f64>>,
    /// User nonnegative scalar variables.
    pub lin: DVector<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub rel_gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    /// `(primal objective, dual objective, primal residual)` per iteration,
    /// kept for weak-duality audits.
    pub objective_trace: Vec<(f64, f64, f64)>,
}

/// Element of the symmetric-cone product: PSD block matrices plus an
/// elementwise-nonnegative vector.
#[derive(Debug, Clone)]
struct ConeVec {
    mats: Vec<DMatrix<f64>>,
    diag: DVector<f64>,
}

impl ConeVec {
    fn zeros(sizes: &[usize], d: usize) -> Self {
        Self {
            mats: sizes.iter().map(|&s| DMatrix::zeros(s, s)).collect(),
            diag: DVector::zeros(d),
        }
    }

    fn identity(sizes: &[usize], d: usize, a: f64) -> Self {
        Self {
            mats: sizes.iter().map(|&s| DMatrix::identity(s, s) * a).collect(),
            diag: DVector::from_element(d, a),
        }
    }

    fn inner(&self, o: &Self) -> f64 {
        let mut acc = self.diag.dot(&o.diag);
        for (a, b) in self.mats.iter().zip(&o.mats) {
            acc += a.iter().zip(b.iter()).map(|(x, y)| x * y).sum::<f64>();
        }
        acc
    }

    fn axpy(&mut self, a: f64, o: &Self) {
        self.diag.axpy(a, &o.diag, 1.0);
        for (m, om) in self.mats.iter_mut().zip(&o.mats) {
            m.zip_apply(om, |mv, ov| *mv += a * ov);
        }
    }

    fn norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    fn symmetrize(&mut self) {
        for m in self.mats.iter_mut() {
            let t = m.transpose();
            *m += t;
            *m *= 0.5;
        }
    }
}

struct ConstraintData {
    mats: Vec<Option<DMatrix<f64>>>,
    diag: Vec<(usize, f64)>,
    rhs: f64,
}

impl ConstraintData {
    fn apply(&self, x: &ConeVec) -> f64 {
        let mut acc = self.diag.iter().map(|&(i, a)| a * x.diag[i]).sum::<f64>();
        for (b, m) in self.mats.iter().enumerate() {
            if let Some(m) = m {
                acc += m.iter().zip(x.mats[b].iter()).map(|(a, v)| a * v).sum::<f64>();
            }
        }
        acc
    }

    fn add_to(&self, out: &mut ConeVec, scale: f64) {
        for &(i, a) in &self.diag {
            out.diag[i] += scale * a;
        }
        for (b, m) in self.mats.iter().enumerate() {
            if let Some(m) = m {
                out.mats[b].zip_apply(m, |ov, mv| *ov += scale * mv);
            }
        }
    }

    fn norm(&self) -> f64 {
        let mut acc = self.diag.iter().map(|&(_, a)| a * a).sum::<f64>();
        for m in self.mats.iter().flatten() {
            acc += m.iter().map(|v| v * v).sum::<f64>();
        }
        acc.sqrt()
    }
}

struct Standardized {
    sizes: Vec<usize>,
    n_diag: usize,
    n_user_lin: usize,
    cmat: ConeVec,
    cons: Vec<ConstraintData>,
}

/// Convert user constraints to equality standard form with slack scalars.
fn standardize(p: &SdpProblem) -> Standardized {
    let n_ineq = p
        .constraints
        .iter()
        .filter(|c| c.sense != SdpSense::Eq)
        .count();
    let n_diag = p.n_lin + n_ineq;
    let mut cmat = ConeVec::zeros(&p.block_sizes, n_diag);
    for (b, m) in p.obj_mats.iter().enumerate() {
        if let Some(m) = m {
            let sym = (m + m.transpose()) * 0.5;
            cmat.mats[b] = sym;
        }
    }
    for (i, &v) in p.obj_lin.iter().enumerate() {
        cmat.diag[i] = v;
    }
    let mut cons = Vec::with_capacity(p.constraints.len());
    let mut slack = p.n_lin;
    for c in &p.constraints {
        let mut diag = c.lin.clone();
        match c.sense {
            SdpSense::Le => {
                diag.push((slack, 1.0));
                slack += 1;
            }
            SdpSense::Ge => {
                diag.push((slack, -1.0));
                slack += 1;
            }
            SdpSense::Eq => {}
        }
        cons.push(ConstraintData {
            mats: c
                .mats
                .iter()
                .map(|m| m.as_ref().map(|m| (m + m.transpose()) * 0.5))
                .collect(),
            diag,
            rhs: c.rhs,
        });
    }
    Standardized {
        sizes: p.block_sizes.clone(),
        n_diag,
        n_user_lin: p.n_lin,
        cmat,
        cons,
    }
}

struct SFactor {
    chols: Vec<nalgebra::Cholesky<f64, nalgebra::Dyn>>,
    diag: DVector<f64>,
}

impl SFactor {
    fn new(s: &ConeVec) -> Option<Self> {
        let mut chols = Vec::with_capacity(s.mats.len());
        for m in &s.mats {
            chols.push(m.clone().cholesky()?);
        }
        if s.diag.iter().any(|&v| v <= 0.0) {
            return None;
        }
        Some(Self {
            chols,
            diag: s.diag.clone(),
        })
    }

    /// `B·S⁻¹` per block (diag: elementwise divide).
    fn right_solve(&self, b: &ConeVec) -> ConeVec {
        let mats = b
            .mats
            .iter()
            .zip(&self.chols)
            .map(|(m, ch)| {
                // m S⁻¹ = (S⁻¹ mᵀ)ᵀ, S symmetric.
                let mut t = m.transpose();
                ch.solve_mut(&mut t);
                t.transpose()
            })
            .collect();
        let diag = DVector::from_iterator(
            b.diag.len(),
            b.diag.iter().zip(self.diag.iter()).map(|(v, s)| v / s),
        );
        ConeVec { mats, diag }
    }
}

/// Largest `α ≤ 1` with `X + α·dX` staying in the cone (0.98 backoff applied
/// by the caller).
fn max_step(x: &ConeVec, dx: &ConeVec) -> f64 {
    let mut alpha: f64 = f64::INFINITY;
    for (m, dm) in x.mats.iter().zip(&dx.mats) {
        if m.nrows() == 0 {
            continue;
        }
        let ch = match m.clone().cholesky() {
            Some(c) => c,
            None => return 0.0,
        };
        // B = L⁻¹ dX L⁻ᵀ, symmetric; min eigenvalue bounds the step.
        let l = ch.l();
        let y = l.solve_lower_triangular(dm).unwrap();
        let yt = y.transpose();
        let b = l.solve_lower_triangular(&yt).unwrap();
        let bsym = (&b + b.transpose()) * 0.5;
        let lam_min = bsym
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if lam_min < 0.0 {
            alpha = alpha.min(-1.0 / lam_min);
        }
    }
    for (v, dv) in x.diag.iter().zip(dx.diag.iter()) {
        if *dv < 0.0 {
            alpha = alpha.min(-v / dv);
        }
    }
    alpha.min(1.0)
}

pub fn solve_sdp(p: &SdpProblem, opts: &SdpOptions) -> SdpSolution {
    solve_standardized(p, opts, true)
}

fn solve_standardized(p: &SdpProblem, opts: &SdpOptions, classify: bool) -> SdpSolution {
    let st = standardize(p);
    let m = st.cons.len();
    let nu: f64 = (st.sizes.iter().sum::<usize>() + st.n_diag) as f64;

    let b_norm = st.cons.iter().map(|c| c.rhs.abs()).fold(0.0f64, f64::max);
    let a_scale = st.cons.iter().map(|c| c.norm()).fold(1.0f64, f64::max);
    let rho_x = (1.0 + b_norm) * nu.sqrt().max(10.0) / a_scale.min(10.0).max(1.0);
    let rho_s = (1.0 + st.cmat.norm()).max(a_scale).max(10.0);

    let mut x = ConeVec::identity(&st.sizes, st.n_diag, rho_x);
    let mut s = ConeVec::identity(&st.sizes, st.n_diag, rho_s);
    let mut y: DVector<f64> = DVector::zeros(m);

    let mut trace = Vec::new();
    let mut best: Option<(f64, usize, ConeVec, DVector<f64>, f64, f64, f64, f64, f64)> = None;
    let mut iterations = 0;

    for k in 0..opts.max_iter {
        iterations = k;
        // Residuals.
        let mut rp = DVector::zeros(m);
        for (i, c) in st.cons.iter().enumerate() {
            rp[i] = c.rhs - c.apply(&x);
        }
        let mut rd = st.cmat.clone();
        rd.axpy(-1.0, &s);
        for (i, c) in st.cons.iter().enumerate() {
            c.add_to(&mut rd, -y[i]);
        }
        let pobj = st.cmat.inner(&x);
        let dobj = st.cons.iter().zip(y.iter()).map(|(c, yi)| c.rhs * yi).sum::<f64>();
        let mu = x.inner(&s) / nu;

        let rp_rel = rp.norm() / (1.0 + b_norm);
        let rd_rel = rd.norm() / (1.0 + st.cmat.norm());
        let gap_rel = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        trace.push((pobj, dobj, rp_rel));

        let merit = rp_rel + rd_rel + gap_rel;
        if best.as_ref().map_or(true, |b| merit < b.0) {
            best = Some((merit, k, x.clone(), DVector::zeros(st.n_user_lin), pobj, dobj, gap_rel, rp_rel, rd_rel));
            if let Some(b) = best.as_mut() {
                b.3 = x.diag.rows(0, st.n_user_lin).clone_owned();
            }
        }

        if rp_rel <= opts.tol_feas && rd_rel <= opts.tol_feas && gap_rel <= opts.tol_gap {
            let user = x.diag.rows(0, st.n_user_lin).clone_owned();
            return SdpSolution {
                status: SolveStatus::Optimal,
                blocks: x.mats,
                lin: user,
                primal_objective: pobj,
                dual_objective: dobj,
                rel_gap: gap_rel,
                primal_residual: rp_rel,
                dual_residual: rd_rel,
                iterations: k,
                objective_trace: trace,
            };
        }
        if !mu.is_finite() || y.amax() > 1e14 {
            break;
        }

        let sfac = match SFactor::new(&s) {
            Some(f) => f,
            None => break,
        };

        // T_j = X·A_j·S⁻¹ per constraint, then Schur M_ij = ⟨A_i, T_j⟩.
        let t_mats: Vec<ConeVec> = st
            .cons
            .iter()
            .map(|c| {
                let mut xa = ConeVec::zeros(&st.sizes, st.n_diag);
                for (b, mopt) in c.mats.iter().enumerate() {
                    if let Some(mm) = mopt {
                        xa.mats[b] = &x.mats[b] * mm;
                    }
                }
                for &(i, a) in &c.diag {
                    xa.diag[i] = x.diag[i] * a;
                }
                sfac.right_solve(&xa)
            })
            .collect();
        let mut schur = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                let mut acc = 0.0;
                for (b, mopt) in st.cons[i].mats.iter().enumerate() {
                    if let Some(mm) = mopt {
                        let t = &t_mats[j].mats[b];
                        // Tr(A·T) with A symmetric.
                        for r in 0..mm.nrows() {
                            for cc in 0..mm.ncols() {
                                acc += mm[(r, cc)] * t[(cc, r)];
                            }
                        }
                    }
                }
                for &(idx, a) in &st.cons[i].diag {
                    acc += a * t_mats[j].diag[idx];
                }
                schur[(i, j)] = acc;
            }
        }
        let schur = (&schur + schur.transpose()) * 0.5;
        let schur_chol = match robust_chol(schur) {
            Some(c) => c,
            None => break,
        };

        let solve_dir = |rc: &ConeVec| -> (ConeVec, ConeVec, DVector<f64>) {
            // rhs_i = rp_i - A_i((Rc - X·Rd)·S⁻¹)
            let mut inner = rc.clone();
            let mut xrd = ConeVec::zeros(&st.sizes, st.n_diag);
            for (b, rm) in rd.mats.iter().enumerate() {
                xrd.mats[b] = &x.mats[b] * rm;
            }
            for i in 0..st.n_diag {
                xrd.diag[i] = x.diag[i] * rd.diag[i];
            }
            inner.axpy(-1.0, &xrd);
            let w = sfac.right_solve(&inner);
            let mut rhs = rp.clone();
            for (i, c) in st.cons.iter().enumerate() {
                rhs[i] -= c.apply(&w);
            }
            let dy = schur_chol.solve(&rhs);
            let mut ds = rd.clone();
            for (i, c) in st.cons.iter().enumerate() {
                c.add_to(&mut ds, -dy[i]);
            }
            // dX = (Rc - X·dS)·S⁻¹, symmetrized.
            let mut xds = ConeVec::zeros(&st.sizes, st.n_diag);
            for (b, dm) in ds.mats.iter().enumerate() {
                xds.mats[b] = &x.mats[b] * dm;
            }
            for i in 0..st.n_diag {
                xds.diag[i] = x.diag[i] * ds.diag[i];
            }
            let mut num = rc.clone();
            num.axpy(-1.0, &xds);
            let mut dx = sfac.right_solve(&num);
            dx.symmetrize();
            (dx, ds, dy)
        };

        // Predictor: Rc = -X·S.
        let mut rc_aff = ConeVec::zeros(&st.sizes, st.n_diag);
        for (b, (xm, sm)) in x.mats.iter().zip(&s.mats).enumerate() {
            rc_aff.mats[b] = -(xm * sm);
        }
        for i in 0..st.n_diag {
            rc_aff.diag[i] = -x.diag[i] * s.diag[i];
        }
        let (dx_a, ds_a, _) = solve_dir(&rc_aff);
        let ap_a = max_step(&x, &dx_a);
        let ad_a = max_step(&s, &ds_a);
        let mut x_try = x.clone();
        x_try.axpy(ap_a, &dx_a);
        let mut s_try = s.clone();
        s_try.axpy(ad_a, &ds_a);
        let mu_aff = x_try.inner(&s_try) / nu;
        let sigma = (mu_aff / mu).powi(3).clamp(1e-8, 1.0);

        // Corrector: Rc = σμI - X·S - dXa·dSa.
        let mut rc = rc_aff;
        for (b, (dxm, dsm)) in dx_a.mats.iter().zip(&ds_a.mats).enumerate() {
            rc.mats[b] -= dxm * dsm;
            let sz = rc.mats[b].nrows();
            for d in 0..sz {
                rc.mats[b][(d, d)] += sigma * mu;
            }
        }
        for i in 0..st.n_diag {
            rc.diag[i] += sigma * mu - dx_a.diag[i] * ds_a.diag[i];
        }
        let (dx, ds, dy) = solve_dir(&rc);
        let ap = (0.98 * max_step(&x, &dx)).min(1.0);
        let ad = (0.98 * max_step(&s, &ds)).min(1.0);

        x.axpy(ap, &dx);
        s.axpy(ad, &ds);
        y.axpy(ad, &dy, 1.0);
    }

    let (_, it_best, xb, user, pobj, dobj, gap, rpr, rdr) = best.expect("one iterate");
    let mut sol = SdpSolution {
        status: SolveStatus::MaxIter,
        blocks: xb.mats,
        lin: user,
        primal_objective: pobj,
        dual_objective: dobj,
        rel_gap: gap,
        primal_residual: rpr,
        dual_residual: rdr,
        iterations: iterations.max(it_best),
        objective_trace: trace,
    };
    if classify {
        let slack = phase1_min_slack(p, opts);
        if slack > opts.infeas_slack {
            sol.status = SolveStatus::Infeasible;
        }
    }
    sol
}

fn robust_chol(mut m: DMatrix<f64>) -> Option<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
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
        jitter = if jitter == 0.0 { 1e-13 } else { jitter * 100.0 };
    }
    None
}

/// Phase-I: relax every constraint by a shared nonnegative slack `t` and
/// minimize `t`. A positive minimum certifies infeasibility.
fn phase1_min_slack(p: &SdpProblem, opts: &SdpOptions) -> f64 {
    let t_idx = p.n_lin;
    let b_scale = p
        .constraints
        .iter()
        .map(|c| 1.0 + c.rhs.abs())
        .fold(1.0f64, f64::max);
    let mut cons: Vec<SdpConstraint> = Vec::new();
    for c in &p.constraints {
        match c.sense {
            SdpSense::Le => {
                let mut lin = c.lin.clone();
                lin.push((t_idx, -(1.0 + c.rhs.abs())));
                cons.push(SdpConstraint {
                    mats: c.mats.clone(),
                    lin,
                    sense: SdpSense::Le,
                    rhs: c.rhs,
                });
            }
            SdpSense::Ge => {
                let mut lin = c.lin.clone();
                lin.push((t_idx, 1.0 + c.rhs.abs()));
                cons.push(SdpConstraint {
                    mats: c.mats.clone(),
                    lin,
                    sense: SdpSense::Ge,
                    rhs: c.rhs,
                });
            }
            SdpSense::Eq => {
                for (sense, sign) in [(SdpSense::Le, -1.0), (SdpSense::Ge, 1.0)] {
                    let mut lin = c.lin.clone();
                    lin.push((t_idx, sign * (1.0 + c.rhs.abs())));
                    cons.push(SdpConstraint {
                        mats: c.mats.clone(),
                        lin,
                        sense,
                        rhs: c.rhs,
                    });
                }
            }
        }
    }
    // Trust region keeps phase-I attained: Σ Tr(X_b) + Σ x_lin ≤ R.
    let radius = 1e7 * b_scale;
    let mut ball_lin: Vec<(usize, f64)> = (0..=p.n_lin).map(|i| (i, 1.0)).collect();
    ball_lin[t_idx] = (t_idx, 1.0);
    cons.push(SdpConstraint {
        mats: p
            .block_sizes
            .iter()
            .map(|&s| Some(DMatrix::identity(s, s)))
            .collect(),
        lin: ball_lin,
        sense: SdpSense::Le,
        rhs: radius,
    });

    let mut obj_lin = vec![0.0; p.n_lin + 1];
    obj_lin[t_idx] = 1.0;
    let ph = SdpProblem {
        block_sizes: p.block_sizes.clone(),
        n_lin: p.n_lin + 1,
        obj_mats: p.block_sizes.iter().map(|_| None).collect(),
        obj_lin,
        constraints: cons,
    };
    let sol = solve_standardized(&ph, opts, false);
    sol.lin[t_idx]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_lower_bound() {
        // min Tr(W) s.t. Tr(W) ≥ 1, W ⪰ 0 (N=2) → optimum 1.
        let p = SdpProblem {
            block_sizes: vec![2],
            n_lin: 0,
            obj_mats: vec![Some(DMatrix::identity(2, 2))],
            obj_lin: vec![],
            constraints: vec![SdpConstraint {
                mats: vec![Some(DMatrix::identity(2, 2))],
                lin: vec![],
                sense: SdpSense::Ge,
                rhs: 1.0,
            }],
        };
        let sol = solve_sdp(&p, &SdpOptions::default());
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.primal_objective - 1.0).abs() < 1e-6, "{}", sol.primal_objective);
    }

    #[test]
    fn contradictory_traces_infeasible() {
        let p = SdpProblem {
            block_sizes: vec![2],
            n_lin: 0,
            obj_mats: vec![Some(DMatrix::identity(2, 2))],
            obj_lin: vec![],
            constraints: vec![
                SdpConstraint {
                    mats: vec![Some(DMatrix::identity(2, 2))],
                    lin: vec![],
                    sense: SdpSense::Le,
                    rhs: 0.0,
                },
                SdpConstraint {
                    mats: vec![Some(DMatrix::identity(2, 2))],
                    lin: vec![],
                    sense: SdpSense::Ge,
                    rhs: 1.0,
                },
            ],
        };
        let sol = solve_sdp(&p, &SdpOptions::default());
        assert_eq!(sol.status, SolveStatus::Infeasible);
    }
}
