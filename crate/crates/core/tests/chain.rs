//! Exact trajectory equalities between the solver family members.

use wfrestore::bench::stripes;
use wfrestore::degrade::{degrade, BlurType};
use wfrestore::solvers::{solve_fixed_support, solve_mdal_l0, solve_nonlocal_mdal, solve_truncated_isd, SolverParams};
use wfrestore::{BlurOperator, Framelet, Image, SupportMask};

const ITERS: usize = 50;

fn fixture() -> (Image, BlurOperator, Image) {
    let truth = stripes(64);
    let (op, f) = degrade(&truth, &BlurType::III.kernel(), 2.0, 1).unwrap();
    (truth, op, f)
}

/// Fixed iteration count: the tolerance is never met.
fn params(nu: f64, stages: usize) -> SolverParams {
    SolverParams {
        max_inner: ITERS,
        tol: 1e-300,
        ..SolverParams::truncated_isd(0.5, nu, 2.0, stages)
    }
}

#[test]
fn one_stage_truncated_equals_nonlocal_mdal() {
    let (_, op, f) = fixture();
    let p = params(0.01, 1);
    let a = solve_truncated_isd(&f, &op, &p, None).unwrap();
    let b = solve_nonlocal_mdal(&f, &op, &p).unwrap();
    assert_eq!(a.total_iterations(), ITERS);
    assert!(a.same_trajectory(&b));
}

#[test]
fn zero_nu_nonlocal_mdal_equals_mdal() {
    let (_, op, f) = fixture();
    let p = params(0.0, 1);
    let a = solve_nonlocal_mdal(&f, &op, &p).unwrap();
    let b = solve_mdal_l0(&f, &op, &p).unwrap();
    assert_eq!(a.total_iterations(), ITERS);
    assert!(a.same_trajectory(&b));
}

#[test]
fn empty_support_selective_equals_generalized() {
    let (_, op, f) = fixture();
    let p = params(0.01, 1);
    let shape = Framelet::new(p.levels, p.boundary).unwrap().analysis(&f).unwrap();
    let a = solve_fixed_support(&f, &op, &p, &SupportMask::empty(&shape)).unwrap();
    let b = solve_nonlocal_mdal(&f, &op, &p).unwrap();
    assert_eq!(a.total_iterations(), ITERS);
    assert!(a.same_trajectory(&b));
}

#[test]
fn nonempty_support_changes_the_trajectory() {
    let (_, op, f) = fixture();
    let p = params(0.01, 1);
    let shape = Framelet::new(p.levels, p.boundary).unwrap().analysis(&f).unwrap();
    let a = solve_fixed_support(&f, &op, &p, &SupportMask::full(&shape)).unwrap();
    let b = solve_nonlocal_mdal(&f, &op, &p).unwrap();
    assert!(!a.same_trajectory(&b));
}

#[test]
fn reruns_are_bit_identical() {
    let (truth, op, f) = fixture();
    let p = params(0.01, 3);
    let mut a = solve_truncated_isd(&f, &op, &p, Some(&truth)).unwrap();
    let mut b = solve_truncated_isd(&f, &op, &p, Some(&truth)).unwrap();
    a.evaluate(&truth).unwrap();
    b.evaluate(&truth).unwrap();
    assert!(a.same_trajectory(&b));
    assert_eq!(a.final_psnr().map(f64::to_bits), b.final_psnr().map(f64::to_bits));
}
