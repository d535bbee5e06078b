//! Solver correctness against independently constructed optima.
//!
//! QCQPs are generated by planting a KKT point: pick the solution, the
//! active set and the multipliers first, then synthesize objective data so
//! stationarity holds. SDPs are generated by planting a complementary
//! primal-dual pair. Both give exact reference optima without trusting the
//! solver under test.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use conic_core::*;

fn random_psd(rng: &mut ChaCha8Rng, n: usize, ridge: f64) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() * 2.0 - 1.0);
    &g * g.transpose() / n as f64 + DMatrix::identity(n, n) * ridge
}

struct Planted {
    problem: QcqpProblem,
    x_star: DVector<f64>,
}

/// Ball constraints `‖x - zᵢ‖²_{Aᵢ} ≤ rᵢ` with a planted optimum and
/// multipliers; the objective linear term is synthesized from stationarity.
fn plant_qcqp(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Planted {
    let sizes = if n >= 4 && rng.random::<f64>() < 0.5 {
        let a = rng.random_range(1..n);
        vec![a, n - a]
    } else {
        vec![n]
    };
    let part = Partition::new(sizes.clone());
    let x_star = DVector::from_fn(n, |_, _| rng.random::<f64>() * 2.0 - 1.0);

    let mut a0 = QuadForm::zero(&part);
    for (b, &sz) in sizes.iter().enumerate() {
        a0.blocks[b] = random_psd(rng, sz, 0.2);
    }

    let n_active = rng.random_range(1..=m.min(n));
    let mut grad_sum = DVector::zeros(n);
    let mut constraints = Vec::with_capacity(m);
    for i in 0..m {
        let mut f = QuadForm::zero(&part);
        let z = DVector::from_fn(n, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let mut lin = DVector::zeros(n);
        let mut cst = 0.0;
        for (b, &sz) in sizes.iter().enumerate() {
            let a = random_psd(rng, sz, 0.1);
            let zb = z.rows(part.range(b).start, sz).clone_owned();
            let lb = -2.0 * &a * &zb;
            cst += (&a * &zb).dot(&zb);
            for (li, gi) in part.range(b).enumerate() {
                lin[gi] = lb[li];
            }
            f.blocks[b] = a;
        }
        f.lin = lin;
        // Value at x* before choosing the offset.
        f.cst = cst;
        let v_star = f.value(&part, &x_star);
        if i < n_active {
            f.cst -= v_star; // active: f(x*) = 0
            let lam = 0.2 + rng.random::<f64>();
            grad_sum += f.gradient(&part, &x_star) * lam;
        } else {
            f.cst -= v_star + 0.5 + rng.random::<f64>(); // strictly inactive
        }
        constraints.push(f);
    }
    // Stationarity: 2A₀x* + b₀ + Σ λᵢ ∇fᵢ(x*) = 0.
    let mut b0 = DVector::zeros(n);
    for (b, &sz) in sizes.iter().enumerate() {
        let xb = x_star.rows(part.range(b).start, sz).clone_owned();
        let gb = &a0.blocks[b] * &xb * 2.0;
        for (li, gi) in part.range(b).enumerate() {
            b0[gi] = -gb[li];
        }
    }
    b0 -= &grad_sum;
    a0.lin = b0;

    Planted {
        problem: QcqpProblem::new(part, a0, constraints).unwrap(),
        x_star,
    }
}

#[test]
fn planted_kkt_qcqps_recovered() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let opts = QcqpOptions::default();
    for trial in 0..60 {
        let n = rng.random_range(2..=40);
        let m = rng.random_range(1..=8);
        let planted = plant_qcqp(&mut rng, n, m);
        let sol = solve_qcqp(&planted.problem, &opts, None);
        assert_eq!(
            sol.status,
            SolveStatus::Optimal,
            "trial {trial} (n={n}, m={m}) did not converge: {:?}",
            sol.kkt
        );
        let err = (&sol.x - &planted.x_star).norm() / (1.0 + planted.x_star.norm());
        assert!(
            err <= 1e-6,
            "trial {trial} (n={n}, m={m}) error {err:.2e}"
        );
    }
}

#[test]
fn lifting_isometry_on_random_hermitian_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let n = rng.random_range(1..=8);
        let g = DMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let a = &g * g.adjoint();
        let b = DVector::from_fn(n, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let form = HermitianForm {
            a,
            b,
            c: rng.random::<f64>(),
        };
        let x = DVector::from_fn(n, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let lifted = lift_hermitian_form(&form).unwrap();
        let part = Partition::single(2 * n);
        let u = lift_vector(&x);
        let scale = 1.0 + form.value(&x).abs();
        assert!(
            (form.value(&x) - lifted.value(&part, &u)).abs() <= 1e-12 * scale,
            "complex {} vs lifted {}",
            form.value(&x),
            lifted.value(&part, &u)
        );
        assert_eq!(unlift_vector(&u), x);
    }
}

/// Plant `X*S* = 0` with `A(X*) = b`, `C = S* + Aᵀy*`; strong duality holds
/// by construction and the optimum is `⟨C, X*⟩`.
#[test]
fn planted_sdps_reach_reference_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for trial in 0..15 {
        let n = rng.random_range(2..=8);
        let m = rng.random_range(1..=4);
        let r = rng.random_range(1..n.max(2)).min(n - 1).max(1);
        let g = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
        let q = g.qr().q();
        let mut x_star = DMatrix::zeros(n, n);
        for i in 0..r {
            let qi = q.column(i).clone_owned();
            x_star += &qi * qi.transpose() * (0.3 + rng.random::<f64>());
        }
        let mut s_star = DMatrix::zeros(n, n);
        for i in r..n {
            let qi = q.column(i).clone_owned();
            s_star += &qi * qi.transpose() * (0.3 + rng.random::<f64>());
        }
        let a_mats: Vec<DMatrix<f64>> = (0..m)
            .map(|_| {
                let t = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
                (&t + t.transpose()) * 0.5
            })
            .collect();
        let y_star: Vec<f64> = (0..m).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let mut c = s_star.clone();
        for (ai, yi) in a_mats.iter().zip(&y_star) {
            c += ai * *yi;
        }
        let constraints = a_mats
            .iter()
            .map(|ai| SdpConstraint {
                mats: vec![Some(ai.clone())],
                lin: vec![],
                sense: SdpSense::Eq,
                rhs: (ai * &x_star).trace(),
            })
            .collect();
        let p = SdpProblem {
            block_sizes: vec![n],
            n_lin: 0,
            obj_mats: vec![Some(c.clone())],
            obj_lin: vec![],
            constraints,
        };
        let sol = solve_sdp(&p, &SdpOptions::default());
        let reference = (&c * &x_star).trace();
        assert_eq!(sol.status, SolveStatus::Optimal, "trial {trial}");
        let scale = 1.0 + reference.abs();
        assert!(
            (sol.primal_objective - reference).abs() <= 1e-5 * scale,
            "trial {trial}: {} vs planted {}",
            sol.primal_objective,
            reference
        );
        assert!(sol.rel_gap <= 1e-6);
        // Weak duality along the path once primal-feasible.
        for &(pobj, dobj, rp) in &sol.objective_trace {
            if rp <= 1e-7 {
                assert!(pobj >= dobj - 1e-6 * (1.0 + pobj.abs() + dobj.abs()));
            }
        }
    }
}

#[test]
fn min_eigenvalue_sdp_family() {
    // min ⟨C, X⟩ s.t. Tr(X) = 1, X ⪰ 0 has optimum λ_min(C); the reference
    // comes from an independent eigendecomposition.
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..10 {
        let n = rng.random_range(2..=7);
        let t = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let c = (&t + t.transpose()) * 0.5;
        let lam_min = c
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        let p = SdpProblem {
            block_sizes: vec![n],
            n_lin: 0,
            obj_mats: vec![Some(c)],
            obj_lin: vec![],
            constraints: vec![SdpConstraint {
                mats: vec![Some(DMatrix::identity(n, n))],
                lin: vec![],
                sense: SdpSense::Eq,
                rhs: 1.0,
            }],
        };
        let tight = SdpOptions {
            tol_gap: 1e-9,
            tol_feas: 1e-9,
            ..SdpOptions::default()
        };
        let sol = solve_sdp(&p, &tight);
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!(
            (sol.primal_objective - lam_min).abs() <= 1e-6 * (1.0 + lam_min.abs()),
            "{} vs {}",
            sol.primal_objective,
            lam_min
        );
    }
}

#[test]
fn single_user_sdr_matches_matched_filter() {
    // One group, one user: min Tr(W) s.t. Tr(W·hhᴴ) ≥ γσ², W ⪰ 0 has
    // optimum γσ²/‖h‖², attained by the matched filter.
    let h = DVector::from_vec(vec![
        Complex64::new(0.9, -0.3),
        Complex64::new(-0.2, 0.7),
    ]);
    let gamma = 2.0;
    let sigma2 = 0.5;
    let hh = &h * h.adjoint();
    let lifted_h = lift_hermitian(&hh).unwrap();
    let n2 = lifted_h.nrows();
    // ⟨lift(A), lift(W)⟩ = 2·Tr(AW), so halve the objective matrix and
    // double the constraint right-hand side.
    let p = SdpProblem {
        block_sizes: vec![n2],
        n_lin: 0,
        obj_mats: vec![Some(DMatrix::identity(n2, n2) * 0.5)],
        obj_lin: vec![],
        constraints: vec![SdpConstraint {
            mats: vec![Some(lifted_h)],
            lin: vec![],
            sense: SdpSense::Ge,
            rhs: 2.0 * gamma * sigma2,
        }],
    };
    let sol = solve_sdp(&p, &SdpOptions::default());
    assert_eq!(sol.status, SolveStatus::Optimal);
    let reference = gamma * sigma2 / h.norm_squared();
    assert!(
        (sol.primal_objective - reference).abs() <= 1e-6 * (1.0 + reference),
        "{} vs {}",
        sol.primal_objective,
        reference
    );
    // Recover W and check it is (numerically) rank one.
    let w = unlift_hermitian(&sol.blocks[0]);
    let eig = w.symmetric_eigen();
    let mut ev: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
    ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
    assert!(ev[1].abs() / ev[0] <= 1e-5, "eigenvalues {ev:?}");
}

#[test]
fn cccp_monotone_and_feasible_on_random_dc_problems() {
    // min ‖x - a‖² s.t. ρ² - ‖x - z‖² ≤ 0 (stay OUTSIDE a ball): the
    // constraint is concave, handled entirely by the linearization.
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..20 {
        let n = rng.random_range(2..=6);
        let part = Partition::single(n);
        let a = DVector::from_fn(n, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let z = DVector::from_fn(n, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let rho2 = 0.5 + rng.random::<f64>();

        let mut obj = QuadForm::zero(&part);
        obj.add_diag(&part, 0..n, 1.0);
        obj.lin = -2.0 * a.clone();
        obj.cst = a.norm_squared();
        let mut f1 = QuadForm::zero(&part);
        f1.cst = rho2;
        let base = QcqpProblem::new_certified(part, obj, vec![f1]);
        let zc = z.clone();
        let dc = DcProgram {
            base,
            concave_obj: None,
            concave_con: vec![Some(ConcaveTerm(Box::new(move |x: &DVector<f64>| {
                let d = x - &zc;
                (d.norm_squared(), 2.0 * d)
            })))],
        };
        // Start well outside the excluded ball.
        let x0 = &z + DVector::from_element(n, 2.0 * (rho2.sqrt() + 1.0));
        let out = cccp_solve(&dc, &x0, &CccpStop::default(), &QcqpOptions::default()).unwrap();
        for wpair in out.objective_trace.windows(2) {
            assert!(
                wpair[1] <= wpair[0] + 1e-8 * (1.0 + wpair[0].abs()),
                "objective increased: {wpair:?}"
            );
        }
        for v in out.violation_trace.iter() {
            assert!(*v <= 1e-6, "DC violation {v}");
        }
    }
}
