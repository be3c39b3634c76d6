//! Directed acyclic graphs and Bayesian networks built on them.

use std::collections::{BTreeMap, VecDeque};

use crate::error::{Error, Result};
use crate::factor::{Evidence, Factor, Variable, DISTRIBUTION_TOL};
use crate::inference::eliminate;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    vertices: Vec<String>,
    edges: Vec<(String, String)>,
    order: Vec<usize>,
}

impl Dag {
    /// Validates the vertex and edge lists. Edges are `(parent, child)` pairs.
    pub fn new<V, E>(vertices: V, edges: E) -> Result<Self>
    where
        V: IntoIterator,
        V::Item: Into<String>,
        E: IntoIterator<Item = (String, String)>,
    {
        let vertices: Vec<String> = vertices.into_iter().map(Into::into).collect();
        let edges: Vec<(String, String)> = edges.into_iter().collect();
        for (i, v) in vertices.iter().enumerate() {
            if vertices[..i].contains(v) {
                return Err(Error::Structure(format!("vertex `{v}` listed twice")));
            }
        }
        let index = |name: &str| {
            vertices
                .iter()
                .position(|v| v == name)
                .ok_or_else(|| Error::Structure(format!("edge endpoint `{name}` is not a vertex")))
        };
        let mut adjacency = vec![Vec::new(); vertices.len()];
        let mut indegree = vec![0usize; vertices.len()];
        for (i, (p, c)) in edges.iter().enumerate() {
            let (pi, ci) = (index(p)?, index(c)?);
            if pi == ci {
                return Err(Error::Cycle(format!("self-loop on `{p}`")));
            }
            if edges[..i].iter().any(|(p2, c2)| p2 == p && c2 == c) {
                return Err(Error::Structure(format!("edge {p} -> {c} listed twice")));
            }
            adjacency[pi].push(ci);
            indegree[ci] += 1;
        }

        // Kahn's algorithm; ready vertices are taken in declaration order.
        let mut ready: VecDeque<usize> =
            (0..vertices.len()).filter(|&v| indegree[v] == 0).collect();
        let mut order = Vec::with_capacity(vertices.len());
        while let Some(v) = ready.pop_front() {
            order.push(v);
            for &c in &adjacency[v] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    ready.push_back(c);
                }
            }
        }
        if order.len() != vertices.len() {
            let stuck: Vec<&str> = (0..vertices.len())
                .filter(|&v| indegree[v] > 0)
                .map(|v| vertices[v].as_str())
                .collect();
            return Err(Error::Cycle(stuck.join(", ")));
        }
        Ok(Self {
            vertices,
            edges,
            order,
        })
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[(String, String)] {
        &self.edges
    }

    pub fn contains(&self, vertex: &str) -> bool {
        self.vertices.iter().any(|v| v == vertex)
    }

    pub fn parents(&self, vertex: &str) -> Vec<&str> {
        self.edges
            .iter()
            .filter(|(_, c)| c == vertex)
            .map(|(p, _)| p.as_str())
            .collect()
    }

    pub fn children(&self, vertex: &str) -> Vec<&str> {
        self.edges
            .iter()
            .filter(|(p, _)| p == vertex)
            .map(|(_, c)| c.as_str())
            .collect()
    }

    pub fn topological_order(&self) -> Vec<&str> {
        self.order
            .iter()
            .map(|&i| self.vertices[i].as_str())
            .collect()
    }
}

/// A DAG with one validated CPT per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct BayesNet {
    dag: Dag,
    variables: Vec<Variable>,
    cpts: Vec<Factor>,
}

impl BayesNet {
    /// Each CPT is keyed by its child vertex and must have scope
    /// `{child} ∪ parents(child)` (any order), normalized over the child.
    pub fn new(dag: Dag, mut cpts: BTreeMap<String, Factor>) -> Result<Self> {
        let mut ordered = Vec::with_capacity(dag.vertices().len());
        for vertex in dag.vertices() {
            let cpt = cpts
                .remove(vertex)
                .ok_or_else(|| Error::Structure(format!("vertex `{vertex}` has no CPT")))?;
            let mut family: Vec<&str> = dag.parents(vertex);
            family.push(vertex);
            family.sort_unstable();
            let mut scope = cpt.scope_names();
            scope.sort_unstable();
            if scope != family {
                return Err(Error::Structure(format!(
                    "CPT for `{vertex}` has scope [{}], expected [{}]",
                    cpt.scope_names().join(", "),
                    family.join(", ")
                )));
            }
            if !cpt.is_cpt_for(vertex, DISTRIBUTION_TOL) {
                return Err(Error::InvalidCpt {
                    variable: vertex.clone(),
                    reason: "a parent row does not sum to 1".into(),
                });
            }
            ordered.push(cpt);
        }
        if let Some(extra) = cpts.keys().next() {
            return Err(Error::Structure(format!(
                "CPT given for unknown vertex `{extra}`"
            )));
        }

        let mut variables: Vec<Variable> = Vec::with_capacity(ordered.len());
        for (vertex, cpt) in dag.vertices().iter().zip(&ordered) {
            variables.push(cpt.variable(vertex).cloned().expect("scope checked above"));
        }
        for cpt in &ordered {
            for v in cpt.scope() {
                let own = variables
                    .iter()
                    .find(|u| u.name() == v.name())
                    .expect("scope checked above");
                if own != v {
                    return Err(Error::ScopeConflict {
                        name: v.name().to_string(),
                    });
                }
            }
        }
        Ok(Self {
            dag,
            variables,
            cpts: ordered,
        })
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    /// Variables in DAG vertex order.
    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, name: &str) -> Option<&Variable> {
        self.variables.iter().find(|v| v.name() == name)
    }

    /// CPTs aligned with [`BayesNet::variables`].
    pub fn cpts(&self) -> &[Factor] {
        &self.cpts
    }

    pub fn cpt(&self, vertex: &str) -> Option<&Factor> {
        let i = self.dag.vertices().iter().position(|v| v == vertex)?;
        Some(&self.cpts[i])
    }

    /// Product of every CPT, with scope in vertex order.
    pub fn joint(&self) -> Result<Factor> {
        let mut joint = Factor::unit();
        for name in self.dag.topological_order() {
            joint = joint.product(self.cpt(name).expect("vertex has a CPT"))?;
        }
        let order: Vec<&str> = self.variables.iter().map(Variable::name).collect();
        joint.reorder(&order)
    }

    pub fn query(&self, query: &[&str], evidence: &Evidence) -> Result<Factor> {
        eliminate(&self.cpts, query, evidence)
    }
}
