//! Right-closed integer step functions on (0, ∞).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a step function continues past the last point where it is known.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Tail {
    /// The last value holds on (y_n, ∞).
    Constant,
    /// Additively periodic: f(x + period) = f(x) for x beyond `valid_to - period`.
    Periodic { period: f64 },
}

/// Integer step function: `values[0]` on (0, y₁], `values[i]` on (yᵢ, yᵢ₊₁],
/// `values[n]` on (yₙ, ∞).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    values: Vec<i64>,
    /// Largest x at which the values are backed by data (∞ for closed forms).
    valid_to: f64,
    tail: Tail,
}

impl StepFunction {
    pub fn new(breakpoints: Vec<f64>, values: Vec<i64>) -> Result<Self> {
        if values.len() != breakpoints.len() + 1 {
            return Err(Error::InvalidInput(format!(
                "step function needs {} values for {} breakpoints, got {}",
                breakpoints.len() + 1,
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints.iter().any(|y| !(*y > 0.0) || !y.is_finite()) {
            return Err(Error::InvalidInput("breakpoints must be positive and finite".into()));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("breakpoints must be strictly increasing".into()));
        }
        Ok(Self {
            breakpoints,
            values,
            valid_to: f64::INFINITY,
            tail: Tail::Constant,
        })
    }

    pub fn constant(value: i64) -> Self {
        Self {
            breakpoints: Vec::new(),
            values: vec![value],
            valid_to: f64::INFINITY,
            tail: Tail::Constant,
        }
    }

    pub fn with_valid_to(mut self, valid_to: f64) -> Self {
        self.valid_to = valid_to;
        self
    }

    /// Declares the function additively periodic past `valid_to - period`.
    pub fn with_periodic_tail(mut self, period: f64) -> Result<Self> {
        if !(period > 0.0) || !self.valid_to.is_finite() || self.valid_to <= period {
            return Err(Error::InvalidInput(
                "periodic tail needs a finite valid_to longer than one period".into(),
            ));
        }
        self.tail = Tail::Periodic { period };
        Ok(self)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn valid_to(&self) -> f64 {
        self.valid_to
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    pub fn first_value(&self) -> i64 {
        self.values[0]
    }

    pub fn last_value(&self) -> i64 {
        *self.values.last().unwrap()
    }

    fn eval_table(&self, x: f64) -> i64 {
        let i = self.breakpoints.partition_point(|y| *y < x);
        self.values[i]
    }

    pub fn eval(&self, x: f64) -> i64 {
        match self.tail {
            Tail::Periodic { period } if x > self.valid_to => {
                let k = ((x - self.valid_to) / period).ceil();
                let mut shifted = x - k * period;
                // float guard: keep the shifted point inside the known window
                if shifted > self.valid_to {
                    shifted -= period;
                }
                self.eval_table(shifted)
            }
            _ => self.eval_table(x),
        }
    }

    /// Constant pieces `(a, b, value)` with `a = 0` first and `b = ∞` last.
    pub fn pieces(&self) -> Vec<(f64, f64, i64)> {
        let n = self.breakpoints.len();
        (0..=n)
            .map(|i| {
                let a = if i == 0 { 0.0 } else { self.breakpoints[i - 1] };
                let b = if i == n { f64::INFINITY } else { self.breakpoints[i] };
                (a, b, self.values[i])
            })
            .collect()
    }

    /// Drops breakpoints between equal values.
    pub fn compress(&self) -> Self {
        let mut breakpoints = Vec::new();
        let mut values = vec![self.values[0]];
        for (i, y) in self.breakpoints.iter().enumerate() {
            if self.values[i + 1] != *values.last().unwrap() {
                breakpoints.push(*y);
                values.push(self.values[i + 1]);
            }
        }
        Self {
            breakpoints,
            values,
            valid_to: self.valid_to,
            tail: self.tail,
        }
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[0] <= w[1])
    }
}
