//! Numeric parameter ladder shared by the solvers.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParameterLadder {
    pub eps: f64,
    pub eps1: f64,
    pub eps_prime: f64,
    pub gamma: f64,
    pub gamma1: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Scale constant: hosts below `c * h` vertices are outside the regime.
    pub c: usize,
}

impl Default for ParameterLadder {
    fn default() -> Self {
        ParameterLadder { eps: 0.2, eps1: 0.15, eps_prime: 0.1, gamma: 0.2, gamma1: 0.25, alpha: 0.1, beta: 0.05, c: 4 }
    }
}

impl ParameterLadder {
    /// Orderings the solvers rely on: `0 < alpha, beta < gamma`,
    /// `0 < eps_prime < eps1 < eps < 1`, `gamma, gamma1` in `(0, 1)`.
    pub fn validate(&self) -> Result<()> {
        let all = [self.eps, self.eps1, self.eps_prime, self.gamma, self.gamma1, self.alpha, self.beta];
        if all.iter().any(|x| !x.is_finite() || *x <= 0.0 || *x >= 1.0) {
            return Err(Error::input("every ladder parameter must lie in (0, 1)"));
        }
        if !(self.alpha < self.gamma && self.beta < self.gamma) {
            return Err(Error::input(format!(
                "need alpha, beta < gamma (alpha={}, beta={}, gamma={})",
                self.alpha, self.beta, self.gamma
            )));
        }
        if !(self.eps_prime < self.eps1 && self.eps1 < self.eps) {
            return Err(Error::input(format!(
                "need eps_prime < eps1 < eps (got {}, {}, {})",
                self.eps_prime, self.eps1, self.eps
            )));
        }
        if self.eps_prime >= 0.5 {
            return Err(Error::input("eps_prime must be below 1/2"));
        }
        Ok(())
    }

    /// Violations of the full strict chain `gamma, gamma1 < eps_prime < eps1 < eps < 1`.
    /// The defaults break the first link on purpose; this only reports.
    pub fn strict_chain_violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.gamma >= self.eps_prime {
            v.push(format!("gamma {} >= eps_prime {}", self.gamma, self.eps_prime));
        }
        if self.gamma1 >= self.eps_prime {
            v.push(format!("gamma1 {} >= eps_prime {}", self.gamma1, self.eps_prime));
        }
        if self.eps_prime >= self.eps1 {
            v.push(format!("eps_prime {} >= eps1 {}", self.eps_prime, self.eps1));
        }
        if self.eps1 >= self.eps {
            v.push(format!("eps1 {} >= eps {}", self.eps1, self.eps));
        }
        v
    }

    /// Degree threshold marking exceptional vertices, as a fraction.
    pub fn exceptional_fraction(&self) -> f64 {
        self.eps.cbrt()
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let l: ParameterLadder = serde_json::from_str(s).map_err(|e| Error::input(format!("ladder JSON: {e}")))?;
        l.validate()?;
        Ok(l)
    }
}
