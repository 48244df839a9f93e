//! Bracketing root search for monotone scalar functions.

/// Outcome of a bisection run: the final bracket and iteration count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub iterations: usize,
}

impl Bracket {
    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Bisect `f` on `[lo, hi]` where `f(lo) < 0 <= f(hi)` is assumed.
///
/// Keeps the sign invariant, so `hi` converges to the smallest sign change
/// inside the bracket. Stops once the bracket is narrower than `width_tol`
/// or after `max_iter` halvings.
pub fn bisect<F>(f: F, mut lo: f64, mut hi: f64, width_tol: f64, max_iter: usize) -> Bracket
where
    F: Fn(f64) -> f64,
{
    let mut iterations = 0;
    while hi - lo > width_tol && iterations < max_iter {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    Bracket { lo, hi, iterations }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt2() {
        let b = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14, 200);
        assert!((b.hi - std::f64::consts::SQRT_2).abs() < 1e-13);
    }

    #[test]
    fn stops_at_float_resolution() {
        let b = bisect(|x| x - 1.0, 0.0, 2.0, 0.0, 10_000);
        assert!(b.iterations < 100);
        assert_eq!(b.hi, 1.0);
    }
}
