use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub binary: bool,
    /// Branching class: among fractional binaries the lowest class is split
    /// first. Not part of the LP text format.
    #[serde(default)]
    pub branch_priority: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }
}

/// Sparse row `Σ coeffs · x  (relation)  rhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates the row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        match self.relation {
            Relation::Le => (lhs - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - lhs).max(0.0),
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// Minimization problem over bounded variables, some of them binary.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MilpInstance {
    pub name: String,
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    pub objective: Vec<(usize, f64)>,
    /// Constant added to the objective value.
    #[serde(default)]
    pub objective_offset: f64,
}

impl MilpInstance {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..Self::default()
        }
    }

    pub fn n_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn add_continuous(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> usize {
        self.variables.push(Variable {
            name: name.into(),
            lower,
            upper,
            binary: false,
            branch_priority: 0,
        });
        self.variables.len() - 1
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> usize {
        self.variables.push(Variable {
            name: name.into(),
            lower: 0.0,
            upper: 1.0,
            binary: true,
            branch_priority: 0,
        });
        self.variables.len() - 1
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        coeffs: Vec<(usize, f64)>,
        relation: Relation,
        rhs: f64,
    ) -> usize {
        self.constraints.push(Constraint {
            name: name.into(),
            coeffs,
            relation,
            rhs,
        });
        self.constraints.len() - 1
    }

    pub fn set_objective(&mut self, coeffs: Vec<(usize, f64)>) {
        self.objective = coeffs;
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective_offset + self.objective.iter().map(|&(j, c)| c * x[j]).sum::<f64>()
    }

    /// Largest violation of any row or bound.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self
            .constraints
            .iter()
            .map(|c| c.violation(x))
            .fold(0.0, f64::max);
        let bounds = self
            .variables
            .iter()
            .zip(x)
            .map(|(v, &xi)| (v.lower - xi).max(xi - v.upper).max(0.0))
            .fold(0.0, f64::max);
        rows.max(bounds)
    }

    /// Largest distance of a binary from {0, 1}.
    pub fn max_integrality_gap(&self, x: &[f64]) -> f64 {
        self.variables
            .iter()
            .zip(x)
            .filter(|(v, _)| v.binary)
            .map(|(_, &xi)| (xi - xi.round()).abs())
            .fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_vars();
        for (j, v) in self.variables.iter().enumerate() {
            if !(v.lower.is_finite() && v.upper.is_finite()) {
                return Err(Error::Domain(format!(
                    "variable {} ({j}) has an infinite bound",
                    v.name
                )));
            }
            if v.lower > v.upper {
                return Err(Error::Domain(format!(
                    "variable {} has empty bounds",
                    v.name
                )));
            }
            if v.binary && !(v.lower >= 0.0 && v.upper <= 1.0) {
                return Err(Error::Domain(format!(
                    "binary {} bounds outside [0, 1]",
                    v.name
                )));
            }
        }
        let check = |coeffs: &[(usize, f64)], what: &str| -> Result<()> {
            for &(j, a) in coeffs {
                if j >= n || !a.is_finite() {
                    return Err(Error::Domain(format!("{what}: bad term ({j}, {a})")));
                }
            }
            Ok(())
        };
        check(&self.objective, "objective")?;
        for c in &self.constraints {
            check(&c.coeffs, &c.name)?;
            if !c.rhs.is_finite() {
                return Err(Error::Domain(format!("{}: rhs not finite", c.name)));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MilpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Node limit hit or a node LP failed; `assignment` holds the incumbent
    /// if one was found.
    GapLimit,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MilpSolution {
    pub status: MilpStatus,
    pub objective: f64,
    pub assignment: Vec<f64>,
    /// Best proven lower bound.
    pub bound: f64,
    pub bnb_nodes: usize,
    pub lp_iterations: usize,
}

impl MilpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == MilpStatus::Optimal
    }

    pub fn has_incumbent(&self) -> bool {
        !self.assignment.is_empty()
    }
}
