//! Shared inputs for the criterion benches.

use std::collections::BTreeMap;

use railbreak_core::{BayesNet, Dag, Factor, Variable};

/// A layered network of `n` variables with `card` states, each node taking the
/// previous two as parents. CPT entries are deterministic and positive.
pub fn layered_network(n: usize, card: usize) -> BayesNet {
    let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let vars: Vec<Variable> = names
        .iter()
        .map(|name| Variable::new(name.clone(), (0..card).map(|s| format!("s{s}"))).unwrap())
        .collect();
    let mut edges = Vec::new();
    let mut cpts = BTreeMap::new();
    for i in 0..n {
        let parents: Vec<usize> = (i.saturating_sub(2)..i).collect();
        for &p in &parents {
            edges.push((names[p].clone(), names[i].clone()));
        }
        let mut scope: Vec<Variable> = parents.iter().map(|&p| vars[p].clone()).collect();
        scope.push(vars[i].clone());
        let rows = card.pow(parents.len() as u32);
        let mut values = Vec::with_capacity(rows * card);
        for r in 0..rows {
            let raw: Vec<f64> = (0..card)
                .map(|s| 1.0 + ((r * 7 + s * 3 + i) % 5) as f64)
                .collect();
            let total: f64 = raw.iter().sum();
            values.extend(raw.iter().map(|v| v / total));
        }
        cpts.insert(names[i].clone(), Factor::new(scope, values).unwrap());
    }
    BayesNet::new(Dag::new(names, edges).unwrap(), cpts).unwrap()
}
