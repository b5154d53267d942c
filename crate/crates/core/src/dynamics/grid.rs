use serde::Serialize;

use super::DynamicsError;
use crate::scalar::Real;

/// Uniform time grid `t_k = t0 + k·h`, `k = 0..=steps`, `h = (t1 − t0)/steps`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TimeGrid<T: Real> {
    t0: T,
    t1: T,
    steps: usize,
}

impl<T: Real> TimeGrid<T> {
    pub fn new(t0: T, t1: T, steps: usize) -> Result<Self, DynamicsError> {
        if !(t0.is_finite() && t1.is_finite()) || t1 <= t0 {
            return Err(DynamicsError::InvalidGrid(format!("need t1 > t0, got [{t0}, {t1}]")));
        }
        if steps < 2 {
            return Err(DynamicsError::InvalidGrid(format!("need at least 2 steps, got {steps}")));
        }
        Ok(Self { t0, t1, steps })
    }

    /// Grid on `[0, t_max]`.
    pub fn span(t_max: T, steps: usize) -> Result<Self, DynamicsError> {
        Self::new(T::zero(), t_max, steps)
    }

    pub fn t0(&self) -> T {
        self.t0
    }

    pub fn t1(&self) -> T {
        self.t1
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Number of sample points, `steps + 1`.
    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> T {
        (self.t1 - self.t0) / T::usize(self.steps)
    }

    /// Total duration `t1 − t0`.
    pub fn duration(&self) -> T {
        self.t1 - self.t0
    }

    pub fn time(&self, k: usize) -> T {
        if k == self.steps {
            self.t1
        } else {
            self.t0 + self.spacing() * T::usize(k)
        }
    }

    pub fn times(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.len()).map(move |k| self.time(k))
    }

    /// Finite-difference derivative of samples on this grid: central
    /// differences inside, second-order one-sided stencils at the endpoints.
    pub fn derivative(&self, values: &[T]) -> Vec<T> {
        assert_eq!(values.len(), self.len(), "sample count must match grid");
        let h = self.spacing();
        let n = values.len();
        let two = T::lit(2.0);
        let mut out = Vec::with_capacity(n);
        out.push((-T::lit(3.0) * values[0] + T::lit(4.0) * values[1] - values[2]) / (two * h));
        for k in 1..n - 1 {
            out.push((values[k + 1] - values[k - 1]) / (two * h));
        }
        out.push((T::lit(3.0) * values[n - 1] - T::lit(4.0) * values[n - 2] + values[n - 3]) / (two * h));
        out
    }

    /// Composite trapezoid rule of the samples over the grid.
    pub fn trapezoid(&self, values: &[T]) -> T {
        assert_eq!(values.len(), self.len(), "sample count must match grid");
        let h = self.spacing();
        let half = T::lit(0.5);
        let inner = values[1..values.len() - 1].iter().fold(T::zero(), |s, &v| s + v);
        h * (inner + half * (values[0] + values[values.len() - 1]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_grids() {
        assert!(TimeGrid::new(1.0, 1.0, 10).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 1).is_err());
        assert!(TimeGrid::new(0.0, f64::NAN, 10).is_err());
    }

    #[test]
    fn endpoints_exact() {
        let g = TimeGrid::new(0.0, std::f64::consts::FRAC_PI_2, 7).unwrap();
        assert_eq!(g.time(0), 0.0);
        assert_eq!(g.time(7), std::f64::consts::FRAC_PI_2);
        assert_eq!(g.len(), 8);
    }

    #[test]
    fn derivative_of_quadratic_is_exact() {
        let g = TimeGrid::new(0.0, 2.0, 20).unwrap();
        let v: Vec<f64> = g.times().map(|t| t * t - 3.0 * t).collect();
        for (t, d) in g.times().zip(g.derivative(&v)) {
            assert!((d - (2.0 * t - 3.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn trapezoid_linear_exact() {
        let g = TimeGrid::new(1.0, 3.0, 5).unwrap();
        let v: Vec<f64> = g.times().map(|t| 2.0 * t + 1.0).collect();
        assert!((g.trapezoid(&v) - 10.0).abs() < 1e-13);
    }
}
