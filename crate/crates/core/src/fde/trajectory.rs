use crate::error::{Error, Result};

/// Piecewise cubic Hermite solution on a strictly increasing grid.
///
/// Each knot stores the value and the derivative, so the interpolant is C¹.
/// Queries outside `[start, end]` return the nearest end value: the
/// trajectory is always seen through its constant extension.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    t: Vec<f64>,
    u: Vec<f64>,
    du: Vec<f64>,
}

impl Trajectory {
    pub fn from_samples(t: Vec<f64>, u: Vec<f64>, du: Vec<f64>) -> Result<Self> {
        if t.is_empty() || t.len() != u.len() || t.len() != du.len() {
            return Err(Error::InvalidParameter(
                "trajectory columns must be non-empty and equally long".into(),
            ));
        }
        if t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(
                "trajectory knots must be strictly increasing".into(),
            ));
        }
        Ok(Self { t, u, du })
    }

    /// Sample `f` and its derivative `df` on `grid`.
    pub fn from_fn<F, D>(grid: &[f64], f: F, df: D) -> Result<Self>
    where
        F: Fn(f64) -> f64,
        D: Fn(f64) -> f64,
    {
        Self::from_samples(
            grid.to_vec(),
            grid.iter().map(|&x| f(x)).collect(),
            grid.iter().map(|&x| df(x)).collect(),
        )
    }

    /// The constant `value` on `[a, b]` (a single knot when `a == b`).
    pub fn constant(value: f64, a: f64, b: f64) -> Result<Self> {
        if a == b {
            return Ok(Self::point(a, value, 0.0));
        }
        Self::from_samples(vec![a, b], vec![value, value], vec![0.0, 0.0])
    }

    pub fn point(t: f64, value: f64, slope: f64) -> Self {
        Self {
            t: vec![t],
            u: vec![value],
            du: vec![slope],
        }
    }

    pub(crate) fn reserve(&mut self, extra: usize) {
        self.t.reserve(extra);
        self.u.reserve(extra);
        self.du.reserve(extra);
    }

    pub(crate) fn push(&mut self, t: f64, value: f64, slope: f64) {
        debug_assert!(self.t.last().is_none_or(|&l| t > l));
        self.t.push(t);
        self.u.push(value);
        self.du.push(slope);
    }

    pub(crate) fn set_last_slope(&mut self, slope: f64) {
        if let Some(d) = self.du.last_mut() {
            *d = slope;
        }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.t[0]
    }

    pub fn end(&self) -> f64 {
        self.t[self.t.len() - 1]
    }

    pub fn first_value(&self) -> f64 {
        self.u[0]
    }

    pub fn last_value(&self) -> f64 {
        self.u[self.u.len() - 1]
    }

    pub fn knots(&self) -> &[f64] {
        &self.t
    }

    pub fn values(&self) -> &[f64] {
        &self.u
    }

    pub fn derivatives(&self) -> &[f64] {
        &self.du
    }

    /// Dense-output value with constant extension beyond the domain.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.t.len();
        if t <= self.t[0] {
            return self.u[0];
        }
        if t >= self.t[n - 1] {
            return self.u[n - 1];
        }
        let i = self.segment(t);
        self.hermite(i, t)
    }

    /// Derivative of the interpolant. At a knot the right segment's slope is
    /// returned; outside the domain the extension is flat.
    pub fn derivative(&self, t: f64) -> f64 {
        let n = self.t.len();
        if t < self.t[0] || t > self.t[n - 1] {
            return 0.0;
        }
        if t == self.t[n - 1] {
            return self.du[n - 1];
        }
        let i = self.segment(t);
        let (t0, t1) = (self.t[i], self.t[i + 1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let s2 = s * s;
        (6.0 * s2 - 6.0 * s) / h * self.u[i]
            + (3.0 * s2 - 4.0 * s + 1.0) * self.du[i]
            + (6.0 * s - 6.0 * s2) / h * self.u[i + 1]
            + (3.0 * s2 - 2.0 * s) * self.du[i + 1]
    }

    fn hermite(&self, i: usize, t: f64) -> f64 {
        let (t0, t1) = (self.t[i], self.t[i + 1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * self.u[i]
            + (s3 - 2.0 * s2 + s) * h * self.du[i]
            + (3.0 * s2 - 2.0 * s3) * self.u[i + 1]
            + (s3 - s2) * h * self.du[i + 1]
    }

    /// Index `i` with `t[i] <= t < t[i+1]`, for `t` strictly inside the domain.
    fn segment(&self, t: f64) -> usize {
        let n = self.t.len();
        let (a, b) = (self.t[0], self.t[n - 1]);
        // Integrator grids are close to uniform; start from the proportional
        // guess and walk, falling back to binary search.
        let guess = (((t - a) / (b - a)) * (n - 1) as f64) as usize;
        let mut i = guess.min(n - 2);
        for _ in 0..8 {
            if self.t[i] > t {
                i -= 1;
            } else if self.t[i + 1] <= t {
                i += 1;
            } else {
                return i;
            }
        }
        self.t.partition_point(|&x| x <= t) - 1
    }

    /// Sub-trajectory on `[lo, hi] ∩ [start, end]`; the window ends become
    /// knots when they fall between grid points.
    pub fn restrict(&self, lo: f64, hi: f64) -> Result<Self> {
        let lo = lo.max(self.start());
        let hi = hi.min(self.end());
        if lo > hi {
            return Err(Error::InvalidParameter(format!(
                "window [{lo}, {hi}] does not meet the trajectory domain"
            )));
        }
        let mut out = Self {
            t: Vec::new(),
            u: Vec::new(),
            du: Vec::new(),
        };
        let first = self.t.partition_point(|&x| x < lo);
        if self.t.get(first) != Some(&lo) {
            out.push(lo, self.eval(lo), self.derivative(lo));
        }
        for k in first..self.t.len() {
            if self.t[k] > hi {
                break;
            }
            out.push(self.t[k], self.u[k], self.du[k]);
        }
        if out.end() < hi {
            out.push(hi, self.eval(hi), self.derivative(hi));
        }
        Ok(out)
    }

    /// Append `tail`, which must start where `self` ends with the same value.
    pub fn concat(&self, tail: &Trajectory) -> Result<Self> {
        if tail.start() != self.end() {
            return Err(Error::InvalidParameter(format!(
                "cannot join trajectories: {} != {}",
                tail.start(),
                self.end()
            )));
        }
        let mut out = self.clone();
        if let Some(d) = out.du.last_mut() {
            *d = tail.du[0];
        }
        for k in 1..tail.len() {
            out.push(tail.t[k], tail.u[k], tail.du[k]);
        }
        Ok(out)
    }

    /// Every knot plus every segment midpoint, in increasing order.
    pub fn sample_points(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.t.len();
        (0..(2 * n - 1)).map(move |k| {
            if k % 2 == 0 {
                self.t[k / 2]
            } else {
                let i = k / 2;
                0.5 * (self.t[i] + self.t[i + 1])
            }
        })
    }

    /// Keep every `stride`-th knot, always including the last one and any
    /// knot where the spacing changes, so irregular segments such as a
    /// departure point survive.
    pub fn thin(&self, stride: usize) -> Self {
        if stride <= 1 {
            return self.clone();
        }
        let n = self.t.len();
        let irregular = |k: usize| {
            if k == 0 || k + 1 >= n {
                return false;
            }
            let (l, r) = (self.t[k] - self.t[k - 1], self.t[k + 1] - self.t[k]);
            (l - r).abs() > 1e-6 * l.max(r)
        };
        let mut out = Self {
            t: Vec::with_capacity(n / stride + 2),
            u: Vec::with_capacity(n / stride + 2),
            du: Vec::with_capacity(n / stride + 2),
        };
        for k in 0..n {
            if k.is_multiple_of(stride) || k + 1 == n || irregular(k) {
                out.push(self.t[k], self.u[k], self.du[k]);
            }
        }
        out
    }
}

/// Value of the constant extension of `traj` at `t`.
pub fn theta_eval(traj: &Trajectory, t: f64) -> f64 {
    traj.eval(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_extension_left() {
        let traj = Trajectory::constant(5.0, 0.0, 1.0).unwrap();
        assert_eq!(theta_eval(&traj, -3.0), 5.0);
    }

    #[test]
    fn identity_extends_right() {
        let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let traj = Trajectory::from_fn(&grid, |t| t, |_| 1.0).unwrap();
        assert_eq!(theta_eval(&traj, 2.0), 1.0);
    }

    #[test]
    fn sine_dense_output() {
        let n = 400;
        let grid: Vec<f64> = (0..=n).map(|i| PI * i as f64 / n as f64).collect();
        let traj = Trajectory::from_fn(&grid, f64::sin, f64::cos).unwrap();
        assert!((traj.eval(PI / 2.0) - 1.0).abs() < 1e-6);
        // off-knot comparison against direct evaluation
        for k in 0..997 {
            let t = PI * (k as f64 + 0.37) / 997.0;
            assert!((traj.eval(t) - t.sin()).abs() < 1e-9, "t = {t}");
            assert!((traj.derivative(t) - t.cos()).abs() < 1e-6, "t = {t}");
        }
    }

    #[test]
    fn knots_are_reproduced_exactly() {
        let grid = [0.0, 0.3, 0.7, 1.0];
        let traj = Trajectory::from_fn(&grid, |t| t * t, |t| 2.0 * t).unwrap();
        for (k, &t) in grid.iter().enumerate() {
            assert_eq!(traj.eval(t), traj.values()[k]);
            assert_eq!(traj.derivative(t), traj.derivatives()[k]);
        }
    }

    #[test]
    fn restrict_adds_window_ends() {
        let grid: Vec<f64> = (0..=10).map(|i| i as f64).collect();
        let traj = Trajectory::from_fn(&grid, |t| t, |_| 1.0).unwrap();
        let sub = traj.restrict(2.5, 7.0).unwrap();
        assert_eq!(sub.start(), 2.5);
        assert_eq!(sub.end(), 7.0);
        assert!((sub.eval(2.5) - 2.5).abs() < 1e-15);
        assert_eq!(sub.len(), 6);
    }

    #[test]
    fn concat_requires_touching_ends() {
        let a = Trajectory::constant(1.0, 0.0, 1.0).unwrap();
        let b = Trajectory::constant(1.0, 1.0, 2.0).unwrap();
        let c = Trajectory::constant(1.0, 1.5, 2.0).unwrap();
        assert_eq!(a.concat(&b).unwrap().end(), 2.0);
        assert!(a.concat(&c).is_err());
    }

    #[test]
    fn thin_keeps_last_knot() {
        let grid: Vec<f64> = (0..=10).map(|i| i as f64).collect();
        let traj = Trajectory::from_fn(&grid, |t| t, |_| 1.0).unwrap();
        let th = traj.thin(3);
        assert_eq!(th.knots(), &[0.0, 3.0, 6.0, 9.0, 10.0]);
    }

    #[test]
    fn thin_keeps_spacing_changes() {
        let mut grid = vec![-50.0];
        grid.extend((0..=10).map(|i| i as f64 * 0.5));
        let traj = Trajectory::from_fn(&grid, |t| t, |_| 1.0).unwrap();
        let th = traj.thin(4);
        assert_eq!(th.knots(), &[-50.0, 0.0, 1.5, 3.5, 5.0]);
    }

    #[test]
    fn rejects_unsorted() {
        assert!(Trajectory::from_samples(vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 0.0]).is_err());
    }

    proptest! {
        #[test]
        fn extension_is_idempotent(
            vals in proptest::collection::vec(-10.0f64..10.0, 2..20),
            beyond in 0.0f64..1e6,
        ) {
            let grid: Vec<f64> = (0..vals.len()).map(|i| i as f64 * 0.25).collect();
            let slopes = vec![0.0; vals.len()];
            let traj = Trajectory::from_samples(grid, vals.clone(), slopes).unwrap();
            prop_assert_eq!(traj.eval(traj.start() - beyond), vals[0]);
            prop_assert_eq!(traj.eval(traj.end() + beyond), *vals.last().unwrap());
            prop_assert_eq!(traj.eval(traj.start() - beyond - 1.0), traj.eval(traj.start() - beyond));
        }

        #[test]
        fn lookup_matches_binary_search(
            gaps in proptest::collection::vec(1e-3f64..2.0, 2..60),
            probe in 0.0f64..1.0,
        ) {
            let mut grid = vec![0.0];
            for g in &gaps { let last = *grid.last().unwrap(); grid.push(last + g); }
            let traj = Trajectory::from_fn(&grid, |t| t.sin(), |t| t.cos()).unwrap();
            let t = probe * traj.end();
            if t > 0.0 && t < traj.end() {
                let i = traj.segment(t);
                prop_assert!(grid[i] <= t && t < grid[i + 1]);
            }
        }
    }
}
