//! Dense factor tables over categorical variables.
//!
//! A [`Factor`] maps every joint assignment of its scope to a nonnegative real.
//! Values are stored row-major over the declared scope order, so the last
//! variable varies fastest. Joints, marginals and CPTs are all factors; the
//! algebra here (product, summing out, evidence reduction, normalization) is
//! everything exact inference needs.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when checking that a table is a distribution or a CPT.
pub const DISTRIBUTION_TOL: f64 = 1e-9;

/// Tolerance used for exact algebraic identities.
pub const IDENTITY_TOL: f64 = 1e-12;

/// A named categorical random variable with a fixed, ordered state list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Variable {
    name: String,
    states: Vec<String>,
}

impl Variable {
    pub fn new<S: Into<String>>(
        name: impl Into<String>,
        states: impl IntoIterator<Item = S>,
    ) -> Result<Self> {
        let name = name.into();
        let states: Vec<String> = states.into_iter().map(Into::into).collect();
        if name.is_empty() {
            return Err(Error::InvalidVariable {
                name,
                reason: "name is empty".into(),
            });
        }
        if states.len() < 2 {
            return Err(Error::InvalidVariable {
                name,
                reason: format!("needs at least 2 states, got {}", states.len()),
            });
        }
        for (i, s) in states.iter().enumerate() {
            if states[..i].contains(s) {
                return Err(Error::InvalidVariable {
                    name,
                    reason: format!("duplicate state `{s}`"),
                });
            }
        }
        Ok(Self { name, states })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn cardinality(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, state: &str) -> Result<usize> {
        self.states
            .iter()
            .position(|s| s == state)
            .ok_or_else(|| Error::UnknownState {
                variable: self.name.clone(),
                state: state.to_string(),
                legal: self.states.join(", "),
            })
    }
}

/// A partial assignment of variables (by name) to states (by label).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Evidence(BTreeMap<String, String>);

impl Evidence {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, variable: impl Into<String>, state: impl Into<String>) -> Self {
        self.insert(variable, state);
        self
    }

    pub fn insert(&mut self, variable: impl Into<String>, state: impl Into<String>) {
        self.0.insert(variable.into(), state.into());
    }

    pub fn get(&self, variable: &str) -> Option<&str> {
        self.0.get(variable).map(String::as_str)
    }

    pub fn contains(&self, variable: &str) -> bool {
        self.0.contains_key(variable)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Evidence restricted to the variables in `scope`.
    pub fn restrict_to(&self, scope: &[Variable]) -> Evidence {
        Evidence(
            self.0
                .iter()
                .filter(|(k, _)| scope.iter().any(|v| v.name() == k.as_str()))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        )
    }
}

impl fmt::Display for Evidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.iter().map(|(k, v)| format!("{k}={v}")).collect();
        write!(f, "{}", parts.join(", "))
    }
}

impl<K: Into<String>, V: Into<String>> FromIterator<(K, V)> for Evidence {
    fn from_iter<I: IntoIterator<Item = (K, V)>>(iter: I) -> Self {
        Evidence(
            iter.into_iter()
                .map(|(k, v)| (k.into(), v.into()))
                .collect(),
        )
    }
}

/// Visits every assignment of `cards` in row-major order, last digit fastest.
pub(crate) struct Odometer {
    cards: Vec<usize>,
    digits: Vec<usize>,
    done: bool,
}

impl Odometer {
    pub(crate) fn new(cards: Vec<usize>) -> Self {
        let done = cards.contains(&0);
        let digits = vec![0; cards.len()];
        Self {
            cards,
            digits,
            done,
        }
    }

    pub(crate) fn digits(&self) -> &[usize] {
        &self.digits
    }

    pub(crate) fn is_done(&self) -> bool {
        self.done
    }

    pub(crate) fn advance(&mut self) {
        for i in (0..self.cards.len()).rev() {
            self.digits[i] += 1;
            if self.digits[i] < self.cards[i] {
                return;
            }
            self.digits[i] = 0;
        }
        self.done = true;
    }
}

fn dot(digits: &[usize], strides: &[usize]) -> usize {
    digits.iter().zip(strides).map(|(d, s)| d * s).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Factor {
    scope: Vec<Variable>,
    values: Vec<f64>,
}

impl Factor {
    /// Builds a factor from a scope and a row-major value table.
    pub fn new(scope: Vec<Variable>, values: Vec<f64>) -> Result<Self> {
        for (i, v) in scope.iter().enumerate() {
            if scope[..i].iter().any(|u| u.name() == v.name()) {
                return Err(Error::Construction(format!(
                    "variable `{}` appears twice in scope",
                    v.name()
                )));
            }
        }
        let expected: usize = scope.iter().map(Variable::cardinality).product();
        if values.len() != expected {
            return Err(Error::Construction(format!(
                "expected {expected} values for scope [{}], got {}",
                scope_names(&scope).join(", "),
                values.len()
            )));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::Construction(format!(
                "value {v} at index {i} is not a finite nonnegative number"
            )));
        }
        Ok(Self { scope, values })
    }

    /// The scalar factor with value 1, the identity of [`Factor::product`].
    pub fn unit() -> Self {
        Self {
            scope: Vec::new(),
            values: vec![1.0],
        }
    }

    pub fn scalar(value: f64) -> Result<Self> {
        Self::new(Vec::new(), vec![value])
    }

    pub fn uniform(scope: Vec<Variable>) -> Result<Self> {
        let n: usize = scope.iter().map(Variable::cardinality).product();
        Self::new(scope, vec![1.0 / n as f64; n])
    }

    pub fn scope(&self) -> &[Variable] {
        &self.scope
    }

    pub fn scope_names(&self) -> Vec<&str> {
        scope_names(&self.scope)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_scalar(&self) -> bool {
        self.scope.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.position(name).is_some()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.scope.iter().position(|v| v.name() == name)
    }

    pub fn variable(&self, name: &str) -> Option<&Variable> {
        self.scope.iter().find(|v| v.name() == name)
    }

    fn cards(&self) -> Vec<usize> {
        self.scope.iter().map(Variable::cardinality).collect()
    }

    /// Row-major strides of this factor's own scope.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.scope.len()];
        for i in (0..self.scope.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.scope[i + 1].cardinality();
        }
        strides
    }

    /// Strides of this factor aligned to `driver` (0 where a variable is absent).
    fn strides_along(&self, driver: &[Variable]) -> Vec<usize> {
        let own = self.strides();
        driver
            .iter()
            .map(|v| self.position(v.name()).map_or(0, |p| own[p]))
            .collect()
    }

    /// Value at a full assignment given as state indices in scope order.
    pub fn value_at(&self, indices: &[usize]) -> Result<f64> {
        if indices.len() != self.scope.len() {
            return Err(Error::InvalidQuery(format!(
                "assignment has {} entries, scope has {}",
                indices.len(),
                self.scope.len()
            )));
        }
        for (v, &i) in self.scope.iter().zip(indices) {
            if i >= v.cardinality() {
                return Err(Error::InvalidQuery(format!(
                    "state index {i} out of range for `{}`",
                    v.name()
                )));
            }
        }
        Ok(self.values[dot(indices, &self.strides())])
    }

    /// Value at a full assignment given by state labels.
    pub fn value(&self, assignment: &Evidence) -> Result<f64> {
        let mut indices = Vec::with_capacity(self.scope.len());
        for v in &self.scope {
            let state = assignment.get(v.name()).ok_or_else(|| {
                Error::InvalidQuery(format!("assignment is missing `{}`", v.name()))
            })?;
            indices.push(v.state_index(state)?);
        }
        if let Some((k, _)) = assignment.iter().find(|(k, _)| !self.contains(k)) {
            return Err(Error::UnknownVariable(k.to_string()));
        }
        self.value_at(&indices)
    }

    /// Pointwise product over the union of both scopes.
    ///
    /// The result scope is `self`'s scope followed by the variables only `other` has.
    pub fn product(&self, other: &Factor) -> Result<Factor> {
        let mut scope = self.scope.clone();
        for v in &other.scope {
            match self.variable(v.name()) {
                Some(u) if u != v => {
                    return Err(Error::ScopeConflict {
                        name: v.name().to_string(),
                    })
                }
                Some(_) => {}
                None => scope.push(v.clone()),
            }
        }
        let left = self.strides_along(&scope);
        let right = other.strides_along(&scope);
        let cards = scope.iter().map(Variable::cardinality).collect();
        let mut values = Vec::new();
        let mut odo = Odometer::new(cards);
        while !odo.is_done() {
            let d = odo.digits();
            values.push(self.values[dot(d, &left)] * other.values[dot(d, &right)]);
            odo.advance();
        }
        Ok(Factor { scope, values })
    }

    /// Sums `name` out of the table.
    pub fn marginalize(&self, name: &str) -> Result<Factor> {
        let pos = self
            .position(name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))?;
        let mut scope = self.scope.clone();
        scope.remove(pos);
        let out = Factor {
            scope,
            values: Vec::new(),
        };
        let out_strides = out.strides_along(&self.scope);
        let n: usize = out.cards().iter().product();
        let mut values = vec![0.0; n];
        let mut odo = Odometer::new(self.cards());
        let mut i = 0;
        while !odo.is_done() {
            values[dot(odo.digits(), &out_strides)] += self.values[i];
            i += 1;
            odo.advance();
        }
        Ok(Factor {
            scope: out.scope,
            values,
        })
    }

    /// Sums out every variable not named in `keep`; the result keeps `keep`'s order.
    pub fn marginal(&self, keep: &[&str]) -> Result<Factor> {
        for k in keep {
            if !self.contains(k) {
                return Err(Error::UnknownVariable(k.to_string()));
            }
        }
        let mut f = self.clone();
        for v in &self.scope {
            if !keep.contains(&v.name()) {
                f = f.marginalize(v.name())?;
            }
        }
        f.reorder(keep)
    }

    /// Slices the table at the evidence, removing the evidence variables.
    pub fn reduce(&self, evidence: &Evidence) -> Result<Factor> {
        let mut fixed = vec![None; self.scope.len()];
        for (name, state) in evidence.iter() {
            let pos = self
                .position(name)
                .ok_or_else(|| Error::UnknownVariable(name.to_string()))?;
            fixed[pos] = Some(self.scope[pos].state_index(state)?);
        }
        if evidence.is_empty() {
            return Ok(self.clone());
        }
        let strides = self.strides();
        let scope: Vec<Variable> = self
            .scope
            .iter()
            .zip(&fixed)
            .filter(|(_, f)| f.is_none())
            .map(|(v, _)| v.clone())
            .collect();
        let base: usize = fixed
            .iter()
            .zip(&strides)
            .map(|(f, s)| f.unwrap_or(0) * s)
            .sum();
        let free_strides: Vec<usize> = fixed
            .iter()
            .zip(&strides)
            .filter(|(f, _)| f.is_none())
            .map(|(_, s)| *s)
            .collect();
        let cards = scope.iter().map(Variable::cardinality).collect();
        let mut values = Vec::new();
        let mut odo = Odometer::new(cards);
        while !odo.is_done() {
            values.push(self.values[base + dot(odo.digits(), &free_strides)]);
            odo.advance();
        }
        Ok(Factor { scope, values })
    }

    pub fn normalize(&self) -> Result<Factor> {
        let total = self.total();
        if !(total > 0.0) {
            return Err(Error::Degenerate(format!(
                "factor over [{}] has zero total mass",
                self.scope_names().join(", ")
            )));
        }
        Ok(Factor {
            scope: self.scope.clone(),
            values: self.values.iter().map(|v| v / total).collect(),
        })
    }

    /// Permutes the scope into `order`, which must name exactly the scope variables.
    pub fn reorder(&self, order: &[&str]) -> Result<Factor> {
        if order.len() != self.scope.len() {
            return Err(Error::InvalidQuery(format!(
                "reorder needs {} names, got {}",
                self.scope.len(),
                order.len()
            )));
        }
        let mut scope = Vec::with_capacity(order.len());
        for name in order {
            let v = self
                .variable(name)
                .ok_or_else(|| Error::UnknownVariable(name.to_string()))?;
            if scope.iter().any(|u: &Variable| u.name() == *name) {
                return Err(Error::InvalidQuery(format!("`{name}` listed twice")));
            }
            scope.push(v.clone());
        }
        let src = self.strides_along(&scope);
        let cards = scope.iter().map(Variable::cardinality).collect();
        let mut values = Vec::with_capacity(self.values.len());
        let mut odo = Odometer::new(cards);
        while !odo.is_done() {
            values.push(self.values[dot(odo.digits(), &src)]);
            odo.advance();
        }
        Ok(Factor { scope, values })
    }

    pub fn is_distribution(&self, tol: f64) -> bool {
        (self.total() - 1.0).abs() <= tol
    }

    /// True if the table sums to 1 over `child` for every assignment of the rest.
    pub fn is_cpt_for(&self, child: &str, tol: f64) -> bool {
        match self.marginalize(child) {
            Ok(rows) => rows.values.iter().all(|s| (s - 1.0).abs() <= tol),
            Err(_) => false,
        }
    }

    /// Largest entrywise difference to `other` after aligning scope order.
    pub fn max_abs_diff(&self, other: &Factor) -> Result<f64> {
        let names = self.scope_names();
        let aligned = other.reorder(&names)?;
        if aligned.scope != self.scope {
            return Err(Error::ScopeConflict {
                name: names.join(", "),
            });
        }
        Ok(self
            .values
            .iter()
            .zip(&aligned.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

pub(crate) fn scope_names(scope: &[Variable]) -> Vec<&str> {
    scope.iter().map(Variable::name).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(name: &str, states: &[&str]) -> Variable {
        Variable::new(name, states.iter().copied()).unwrap()
    }

    #[test]
    fn rejects_bad_variables() {
        assert!(Variable::new("x", ["a"]).is_err());
        assert!(Variable::new("x", ["a", "a"]).is_err());
        assert!(Variable::new("", ["a", "b"]).is_err());
    }

    #[test]
    fn make_factor_examples() {
        let r = var("R", &["r0", "r1"]);
        let f = Factor::new(vec![r], vec![0.981, 0.019]).unwrap();
        assert!(f.is_distribution(DISTRIBUTION_TOL));

        let x = var("X", &["a", "b"]);
        let u = Factor::new(vec![x.clone()], vec![1.0, 1.0]).unwrap();
        assert_eq!(u.total(), 2.0);

        let y = var("Y", &["c", "d"]);
        let g = Factor::new(vec![x, y], vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let e = Evidence::new().with("X", "b").with("Y", "c");
        assert_eq!(g.value(&e).unwrap(), 0.3);
        assert_eq!(g.value_at(&[1, 0]).unwrap(), 0.3);
    }

    #[test]
    fn make_factor_errors() {
        let x = var("X", &["a", "b"]);
        assert!(Factor::new(vec![x.clone()], vec![1.0]).is_err());
        assert!(Factor::new(vec![x.clone()], vec![1.0, -0.1]).is_err());
        assert!(Factor::new(vec![x.clone()], vec![1.0, f64::NAN]).is_err());
        assert!(Factor::new(vec![x.clone()], vec![f64::INFINITY, 0.0]).is_err());
        assert!(Factor::new(vec![x.clone(), x], vec![0.0; 4]).is_err());
    }

    #[test]
    fn product_detects_scope_conflict() {
        let f = Factor::uniform(vec![var("X", &["a", "b"])]).unwrap();
        let g = Factor::uniform(vec![var("X", &["a", "c"])]).unwrap();
        assert!(matches!(f.product(&g), Err(Error::ScopeConflict { .. })));
    }

    #[test]
    fn product_matches_hand_table() {
        let x = var("X", &["a", "b"]);
        let y = var("Y", &["c", "d"]);
        let z = var("Z", &["e", "f"]);
        let f = Factor::new(vec![x, y.clone()], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let g = Factor::new(vec![y, z], vec![5.0, 6.0, 7.0, 8.0]).unwrap();
        let h = f.product(&g).unwrap();
        assert_eq!(h.scope_names(), vec!["X", "Y", "Z"]);
        // (x,y,z) -> f(x,y) * g(y,z)
        assert_eq!(h.values(), &[5.0, 6.0, 14.0, 16.0, 15.0, 18.0, 28.0, 32.0]);
    }

    #[test]
    fn uniform_product_scales() {
        let x = var("X", &["a", "b", "c"]);
        let u = Factor::uniform(vec![x.clone()]).unwrap();
        let g = Factor::new(vec![x], vec![0.2, 0.3, 0.5]).unwrap();
        let p = u.product(&g).unwrap();
        for (a, b) in p.values().iter().zip(g.values()) {
            assert!((a - b / 3.0).abs() < IDENTITY_TOL);
        }
    }

    #[test]
    fn marginalize_examples() {
        let t = var("T", &["t0", "t1"]);
        let r = var("R", &["r0", "r1"]);
        let pt = [7.0 / 24.0, 17.0 / 24.0];
        let pr = [0.981, 0.019];
        let vals = vec![pt[0] * pr[0], pt[0] * pr[1], pt[1] * pr[0], pt[1] * pr[1]];
        let joint = Factor::new(vec![t, r.clone()], vals).unwrap();
        let m = joint.marginalize("T").unwrap();
        assert_eq!(m.scope_names(), vec!["R"]);
        assert!((m.values()[0] - 0.981).abs() < IDENTITY_TOL);
        assert!((m.values()[1] - 0.019).abs() < IDENTITY_TOL);

        let d = Factor::new(vec![r], vec![0.981, 0.019]).unwrap();
        let s = d.marginalize("R").unwrap();
        assert!(s.is_scalar());
        assert!((s.values()[0] - 1.0).abs() < IDENTITY_TOL);

        assert!(matches!(d.marginalize("Q"), Err(Error::UnknownVariable(_))));
    }

    #[test]
    fn reduce_examples() {
        let x = var("X", &["a", "b"]);
        let y = var("Y", &["c", "d"]);
        let p = Factor::new(vec![x, y], vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(p.reduce(&Evidence::new()).unwrap(), p);

        // p(X | Y=d) = p(X, d) / p(d) = [0.2, 0.4] / 0.6
        let cond = p
            .reduce(&Evidence::new().with("Y", "d"))
            .unwrap()
            .normalize()
            .unwrap();
        assert_eq!(cond.scope_names(), vec!["X"]);
        assert!((cond.values()[0] - 0.2 / 0.6).abs() < IDENTITY_TOL);
        assert!((cond.values()[1] - 0.4 / 0.6).abs() < IDENTITY_TOL);

        let point = p
            .reduce(&Evidence::new().with("X", "b").with("Y", "d"))
            .unwrap();
        assert!(point.is_scalar());
        assert_eq!(point.values(), &[0.4]);

        assert!(matches!(
            p.reduce(&Evidence::new().with("Z", "c")),
            Err(Error::UnknownVariable(_))
        ));
        assert!(matches!(
            p.reduce(&Evidence::new().with("Y", "q")),
            Err(Error::UnknownState { .. })
        ));
    }

    #[test]
    fn normalize_examples() {
        let x = var("X", &["a", "b"]);
        let f = Factor::new(vec![x.clone()], vec![2.0, 2.0]).unwrap();
        assert_eq!(f.normalize().unwrap().values(), &[0.5, 0.5]);

        let t = var("T", &["morning", "not_morning"]);
        let breaks = Factor::new(vec![t], vec![56.0, 44.0]).unwrap();
        let p = breaks.normalize().unwrap();
        assert!((p.values()[0] - 0.56).abs() < IDENTITY_TOL);
        assert!((p.values()[1] - 0.44).abs() < IDENTITY_TOL);

        let z = Factor::new(vec![x], vec![0.0, 0.0]).unwrap();
        assert!(matches!(z.normalize(), Err(Error::Degenerate(_))));
    }

    #[test]
    fn reorder_round_trip() {
        let x = var("X", &["a", "b"]);
        let y = var("Y", &["c", "d", "e"]);
        let f = Factor::new(vec![x, y], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let g = f.reorder(&["Y", "X"]).unwrap();
        assert_eq!(g.values(), &[1.0, 4.0, 2.0, 5.0, 3.0, 6.0]);
        assert_eq!(g.reorder(&["X", "Y"]).unwrap(), f);
        assert!(f.reorder(&["X"]).is_err());
    }

    #[test]
    fn cpt_check() {
        let x = var("X", &["a", "b"]);
        let y = var("Y", &["c", "d"]);
        let cpt = Factor::new(vec![x.clone(), y.clone()], vec![0.3, 0.7, 0.9, 0.1]).unwrap();
        assert!(cpt.is_cpt_for("Y", DISTRIBUTION_TOL));
        assert!(!cpt.is_cpt_for("X", DISTRIBUTION_TOL));
        assert!(!cpt.is_cpt_for("Z", DISTRIBUTION_TOL));
    }
}
