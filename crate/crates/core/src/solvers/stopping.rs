use crate::imaging::Image;

/// Default tolerance of [`stopping_criterion`].
pub const DEFAULT_TOL: f64 = 5e-4;

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        f64::INFINITY
    }
}

/// `min(||u^k - u^{k-1}|| / ||u^k||, ||A u^k - f|| / ||f||) < tol`.
///
/// A zero denominator makes its ratio `+inf`.
pub fn stopping_criterion(u_curr: &Image, u_prev: &Image, residual: f64, f_norm: f64, tol: f64) -> bool {
    let change = ratio(u_curr.distance(u_prev), u_curr.norm());
    stop_on_ratios(change, ratio(residual, f_norm), tol)
}

pub(crate) fn stop_on_ratios(change: f64, fit: f64, tol: f64) -> bool {
    change.min(fit) < tol
}

pub(crate) fn relative(num: f64, den: f64) -> f64 {
    ratio(num, den)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_iterates_stop() {
        let u = Image::constant(4, 4, 3.0);
        assert!(stopping_criterion(&u, &u, 10.0, 1.0, DEFAULT_TOL));
    }

    #[test]
    fn exact_fit_stops() {
        let u = Image::constant(4, 4, 3.0);
        let v = Image::constant(4, 4, 1.0);
        assert!(stopping_criterion(&u, &v, 0.0, 5.0, DEFAULT_TOL));
    }

    #[test]
    fn both_ratios_above_tolerance() {
        // ||u - v|| / ||u|| = 1e-3 and residual / ||f|| = 1e-3
        let u = Image::constant(4, 4, 1000.0);
        let v = Image::constant(4, 4, 999.0);
        assert!(!stopping_criterion(&u, &v, 2e-3, 2.0, 5e-4));
    }

    #[test]
    fn zero_denominators_do_not_stop() {
        let z = Image::zeros(4, 4);
        assert!(!stopping_criterion(&z, &z, 1.0, 0.0, DEFAULT_TOL));
    }
}
