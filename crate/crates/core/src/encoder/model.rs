//! Linear models with exact rational coefficients.

use std::collections::HashMap;

use num_rational::Ratio;
use serde::Serialize;

pub type Coef = Ratio<i64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VarKind {
    Binary,
    Continuous,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: Coef,
    pub upper: Coef,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }

    fn holds(self, lhs: Coef, rhs: Coef) -> bool {
        match self {
            Sense::Le => lhs <= rhs,
            Sense::Ge => lhs >= rhs,
            Sense::Eq => lhs == rhs,
        }
    }
}

/// `Σ coef · var  sense  rhs`. Terms are merged by variable and sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(usize, Coef)>,
    pub sense: Sense,
    pub rhs: Coef,
}

/// Variables, constraints and an optional objective to minimise.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinearModel {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    pub objective: Option<Vec<(usize, Coef)>>,
    by_name: HashMap<String, usize>,
}

/// One value per model variable, in declaration order.
pub type Assignment = Vec<Coef>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ModelStats {
    pub n_binary: usize,
    pub n_continuous: usize,
    pub n_constraints: usize,
}

pub fn model_stats(model: &LinearModel) -> ModelStats {
    let n_binary = model.variables.iter().filter(|v| v.kind == VarKind::Binary).count();
    ModelStats {
        n_binary,
        n_continuous: model.variables.len() - n_binary,
        n_constraints: model.constraints.len(),
    }
}

impl LinearModel {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares a variable; binaries get bounds `[0, 1]`.
    ///
    /// # Panics
    /// On a duplicate name.
    pub fn add_var(&mut self, name: String, kind: VarKind, lower: Coef, upper: Coef) -> usize {
        let (lower, upper) = match kind {
            VarKind::Binary => (Coef::from(0), Coef::from(1)),
            VarKind::Continuous => (lower, upper),
        };
        let id = self.variables.len();
        let previous = self.by_name.insert(name.clone(), id);
        assert!(previous.is_none(), "duplicate variable {name}");
        self.variables.push(Variable { name, kind, lower, upper });
        id
    }

    pub fn var(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }

    pub fn add_constraint(&mut self, name: String, terms: Vec<(usize, Coef)>, sense: Sense, rhs: Coef) {
        self.constraints.push(Constraint {
            name,
            terms: merge(terms),
            sense,
            rhs,
        });
    }

    pub fn set_objective(&mut self, terms: Vec<(usize, Coef)>) {
        self.objective = Some(merge(terms));
    }

    /// Names of violated constraints and out-of-bounds or non-integral
    /// variables; empty when `values` is feasible.
    pub fn violations(&self, values: &[Coef]) -> Vec<String> {
        assert_eq!(values.len(), self.variables.len(), "one value per variable");
        let mut out = Vec::new();
        for (v, &x) in self.variables.iter().zip(values) {
            if x < v.lower || x > v.upper || (v.kind == VarKind::Binary && !x.is_integer()) {
                out.push(format!("bounds of {} ({x})", v.name));
            }
        }
        for c in &self.constraints {
            let lhs: Coef = c.terms.iter().map(|&(i, a)| a * values[i]).sum();
            if !c.sense.holds(lhs, c.rhs) {
                out.push(c.name.clone());
            }
        }
        out
    }
}

fn merge(mut terms: Vec<(usize, Coef)>) -> Vec<(usize, Coef)> {
    terms.sort_by_key(|t| t.0);
    let mut out: Vec<(usize, Coef)> = Vec::with_capacity(terms.len());
    for (i, a) in terms {
        match out.last_mut() {
            Some(last) if last.0 == i => last.1 += a,
            _ => out.push((i, a)),
        }
    }
    out.retain(|t| t.1 != Coef::from(0));
    out
}
