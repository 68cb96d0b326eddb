//! Hand-written distribution functions against statrs.

use statrs::distribution::{ContinuousCDF, FisherSnedecor, Normal, StudentsT};
use tcatt_core::stats::special::{erf, f_cdf, ln_gamma, normal_cdf, regularized_beta, t_cdf};

const TOL: f64 = 1e-8;

#[test]
fn ln_gamma_and_erf() {
    for x in [0.1, 0.5, 1.0, 1.5, 2.0, 3.7, 10.0, 42.5, 170.0] {
        let want = statrs::function::gamma::ln_gamma(x);
        assert!((ln_gamma(x) - want).abs() <= TOL * want.abs().max(1.0), "ln_gamma({x})");
    }
    for x in [-3.0, -1.2, -0.3, 0.0, 0.01, 0.7, 1.9, 4.0] {
        assert!((erf(x) - statrs::function::erf::erf(x)).abs() <= TOL, "erf({x})");
    }
}

#[test]
fn normal_cdf_matches() {
    let n = Normal::new(0.0, 1.0).unwrap();
    for i in -80..=80 {
        let x = i as f64 / 10.0;
        assert!((normal_cdf(x) - n.cdf(x)).abs() <= TOL, "normal_cdf({x})");
    }
}

#[test]
fn t_cdf_matches() {
    for df in [1.0, 2.0, 3.0, 4.0, 7.0, 12.0, 30.0, 120.0, 1000.0] {
        let d = StudentsT::new(0.0, 1.0, df).unwrap();
        for i in -40..=40 {
            let x = i as f64 / 4.0;
            let (got, want) = (t_cdf(x, df).unwrap(), d.cdf(x));
            assert!((got - want).abs() <= TOL, "t_cdf({x}, {df}) = {got}, statrs {want}");
        }
    }
}

#[test]
fn f_cdf_matches() {
    for (d1, d2) in [(1.0, 1.0), (1.0, 4.0), (2.0, 10.0), (4.0, 472.0), (2.0, 472.0), (5.0, 5.0), (12.0, 3.0)] {
        let d = FisherSnedecor::new(d1, d2).unwrap();
        for x in [0.0, 0.05, 0.3, 0.9, 1.0, 1.7, 3.0, 6.5, 13.5, 40.0, 200.0] {
            let (got, want) = (f_cdf(x, d1, d2).unwrap(), d.cdf(x));
            assert!((got - want).abs() <= TOL, "f_cdf({x}, {d1}, {d2}) = {got}, statrs {want}");
        }
    }
}

#[test]
fn incomplete_beta_matches() {
    for (a, b) in [(0.5, 0.5), (1.0, 3.0), (2.5, 7.0), (30.0, 0.5), (100.0, 100.0)] {
        for x in [0.0, 0.01, 0.2, 0.5, 0.77, 0.99, 1.0] {
            let want = statrs::function::beta::beta_reg(a, b, x);
            assert!((regularized_beta(x, a, b) - want).abs() <= TOL, "I_{x}({a}, {b})");
        }
    }
}
