//! Root finding for strictly increasing scalar maps.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootOptions {
    /// Absolute-plus-relative residual tolerance: `|F(x) - target| <= tol (1 + |target|)`.
    pub tol: f64,
    /// Bracket expansion gives up beyond this magnitude.
    pub max_abs: f64,
    pub max_iter: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions {
            tol: 1e-12,
            max_abs: 1e12,
            max_iter: 400,
        }
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum RootError {
    #[error("no bracket for target {target} within |x| <= {limit}")]
    BracketExceeded { target: f64, limit: f64 },
    #[error("non-finite value while solving for target {target}")]
    NonFinite { target: f64 },
    #[error("no convergence for target {target} after {iterations} iterations")]
    NoConvergence { target: f64, iterations: usize },
}

/// Solves `F(x) = target` for a strictly increasing `F`, where `eval(x)`
/// returns `(F(x), F'(x))`.
///
/// The root is first bracketed by expanding outward from `guess`, then located
/// by Newton steps safeguarded with bisection. When `guess` already satisfies
/// the tolerance it is returned unchanged.
pub fn solve_increasing<F>(eval: F, target: f64, guess: f64, opts: &RootOptions) -> Result<f64, RootError>
where
    F: Fn(f64) -> (f64, f64),
{
    if !target.is_finite() || !guess.is_finite() {
        return Err(RootError::NonFinite { target });
    }
    let tol = opts.tol * (1.0 + target.abs());
    let (f0, d0) = eval(guess);
    if !f0.is_finite() {
        return Err(RootError::NonFinite { target });
    }
    let r0 = f0 - target;
    if r0.abs() <= tol {
        return Ok(guess);
    }

    // one plain Newton step settles affine maps and near-converged guesses
    if d0 > 0.0 && d0.is_finite() {
        let x1 = guess - r0 / d0;
        if x1.is_finite() && x1.abs() <= opts.max_abs {
            let (f1, _) = eval(x1);
            if (f1 - target).abs() <= tol {
                return Ok(x1);
            }
        }
    }

    // bracket: lo has residual < 0, hi has residual > 0
    let dir = if r0 < 0.0 { 1.0 } else { -1.0 };
    let newton = if d0 > 0.0 && d0.is_finite() { r0.abs() / d0 } else { 0.0 };
    let mut step = (1.5 * newton).max(1e-8 * (1.0 + guess.abs()));
    let (mut prev, mut r_prev) = (guess, r0);
    let (mut lo, mut hi, r_lo, r_hi) = loop {
        let x = guess + dir * step;
        if !(x.abs() <= opts.max_abs) {
            return Err(RootError::BracketExceeded {
                target,
                limit: opts.max_abs,
            });
        }
        let (fx, _) = eval(x);
        // an infinite value of an increasing map still brackets the root
        if fx.is_nan() {
            return Err(RootError::NonFinite { target });
        }
        let r = fx - target;
        if r.abs() <= tol {
            return Ok(x);
        }
        if (r > 0.0) != (r0 > 0.0) {
            break if dir > 0.0 {
                (prev, x, r_prev, r)
            } else {
                (x, prev, r, r_prev)
            };
        }
        prev = x;
        r_prev = r;
        step *= 2.0;
    };

    let mut x = if d0 > 0.0 && d0.is_finite() { guess - r0 / d0 } else { 0.5 * (lo + hi) };
    if !(x > lo && x < hi) {
        x = 0.5 * (lo + hi);
    }
    let mut best = if r_lo.abs() < r_hi.abs() { (lo, r_lo.abs()) } else { (hi, r_hi.abs()) };
    // size of the step before last; Newton must at least halve it
    let mut last_step = hi - lo;
    let mut step = last_step;
    for _ in 0..opts.max_iter {
        let (fx, dx) = eval(x);
        if fx.is_nan() {
            return Err(RootError::NonFinite { target });
        }
        let r = fx - target;
        if r.abs() < best.1 {
            best = (x, r.abs());
        }
        if r.abs() <= tol {
            return Ok(x);
        }
        if r < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let width = hi - lo;
        if width <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) || width == 0.0 {
            // bracket collapsed to adjacent floats: best attainable
            return Ok(best.0);
        }
        let candidate = x - r / dx;
        let next = if dx > 0.0 && candidate > lo && candidate < hi && (candidate - x).abs() <= 0.5 * last_step.abs() {
            candidate
        } else {
            0.5 * (lo + hi)
        };
        last_step = step;
        step = next - x;
        x = next;
        if x == lo || x == hi {
            return Ok(best.0);
        }
    }
    Err(RootError::NoConvergence {
        target,
        iterations: opts.max_iter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Plain bisection used as an independent oracle.
    fn bisect(f: impl Fn(f64) -> f64, target: f64, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn cubic_plus_linear() {
        let f = |u: f64| (u * u * u + u, 3.0 * u * u + 1.0);
        let x = solve_increasing(f, 10.0, 0.0, &RootOptions::default()).unwrap();
        let oracle = bisect(|u| u * u * u + u, 10.0, -10.0, 10.0);
        assert_abs_diff_eq!(x, oracle, epsilon = 1e-13);
        assert_abs_diff_eq!(x, 2.0, epsilon = 1e-13);
        assert!((f(x).0 - 10.0).abs() <= 1e-11);
    }

    #[test]
    fn returns_guess_when_already_solved() {
        let f = |u: f64| (3.0 * u, 3.0);
        assert_eq!(solve_increasing(f, 1.5, 0.5, &RootOptions::default()).unwrap(), 0.5);
    }

    #[test]
    fn far_roots_in_both_directions() {
        let f = |u: f64| (u.exp() - 1.0 + u, u.exp() + 1.0);
        for target in [-1e4, -3.0, 0.0, 2.0, 50.0, 1e6] {
            let x = solve_increasing(f, target, 0.3, &RootOptions::default()).unwrap();
            assert!((f(x).0 - target).abs() <= 1e-12 * (1.0 + target.abs()) * 4.0, "{target}");
        }
    }

    #[test]
    fn bracket_failure_is_reported() {
        // bounded map cannot reach the target
        let f = |u: f64| (u.atan(), 1.0 / (1.0 + u * u));
        let r = solve_increasing(f, 2.0, 0.0, &RootOptions::default());
        assert!(matches!(r, Err(RootError::BracketExceeded { .. })), "{r:?}");
    }
}
