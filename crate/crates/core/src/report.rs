//! Residual reports: the verification currency shared by every module.

use crate::grid::{GridSpec, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub sup: f64,
    pub rms: f64,
}

impl Norms {
    pub fn of(f: &ScalarField) -> Norms {
        Norms {
            sup: f.sup_norm(),
            rms: f.rms(),
        }
    }
}

/// Named per-equation residual norms over the valid nodes of a grid.
#[derive(Debug, Clone)]
pub struct ResidualReport {
    pub components: Vec<(String, Norms)>,
    pub grid: GridSpec,
    pub tolerance: Option<f64>,
}

impl ResidualReport {
    pub fn new(grid: GridSpec) -> Self {
        ResidualReport {
            components: Vec::new(),
            grid,
            tolerance: None,
        }
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = Some(tol);
        self
    }

    pub fn push(&mut self, name: &str, f: &ScalarField) {
        self.components.push((name.to_string(), Norms::of(f)));
    }

    pub fn push_norms(&mut self, name: &str, norms: Norms) {
        self.components.push((name.to_string(), norms));
    }

    pub fn sup(&self, name: &str) -> Option<f64> {
        self.components
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.sup)
    }

    /// Largest sup-norm across components.
    pub fn max_sup(&self) -> f64 {
        self.components
            .iter()
            .map(|(_, n)| n.sup)
            .fold(0.0f64, f64::max)
    }

    /// True when every component sup-norm is within the stored tolerance.
    pub fn passes(&self) -> bool {
        match self.tolerance {
            Some(t) => self.max_sup() <= t,
            None => false,
        }
    }
}
