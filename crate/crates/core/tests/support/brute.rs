//! Brute-force reference for discrete Bayesian networks.
//!
//! Networks are held as plain arrays. The joint is enumerated assignment by
//! assignment from the chain rule, with no use of the factor algebra under
//! test, so agreement is meaningful.

#![allow(dead_code)]

use std::collections::BTreeMap;

use railbreak_core::{BayesNet, Dag, Evidence, Factor, Variable};
use rand::Rng;

#[derive(Debug, Clone)]
pub struct RandomNet {
    pub cards: Vec<usize>,
    /// Parents of each node, all with smaller index.
    pub parents: Vec<Vec<usize>>,
    /// Row-major over `parents[i]` then the node itself (last fastest).
    pub cpts: Vec<Vec<f64>>,
}

pub fn name(i: usize) -> String {
    format!("x{i}")
}

pub fn state(k: usize) -> String {
    format!("s{k}")
}

impl RandomNet {
    /// A random DAG with `2..=max_vars` nodes of cardinality `2..=max_card`.
    /// About one CPT entry in ten is zero so impossible evidence does occur.
    pub fn generate<R: Rng>(rng: &mut R, max_vars: usize, max_card: usize) -> Self {
        let n = rng.random_range(2..=max_vars);
        let cards: Vec<usize> = (0..n).map(|_| rng.random_range(2..=max_card)).collect();
        let mut parents = Vec::with_capacity(n);
        let mut cpts = Vec::with_capacity(n);
        for i in 0..n {
            let mut ps: Vec<usize> = (0..i).filter(|_| rng.random_bool(0.5)).collect();
            while ps.len() > 3 {
                ps.remove(rng.random_range(0..ps.len()));
            }
            let rows: usize = ps.iter().map(|&p| cards[p]).product();
            let mut table = Vec::with_capacity(rows * cards[i]);
            for _ in 0..rows {
                let mut row: Vec<f64> = (0..cards[i])
                    .map(|_| {
                        if rng.random_bool(0.1) {
                            0.0
                        } else {
                            rng.random_range(0.01..1.0)
                        }
                    })
                    .collect();
                if row.iter().all(|&v| v == 0.0) {
                    row[rng.random_range(0..cards[i])] = 1.0;
                }
                let s: f64 = row.iter().sum();
                table.extend(row.iter().map(|v| v / s));
            }
            parents.push(ps);
            cpts.push(table);
        }
        Self {
            cards,
            parents,
            cpts,
        }
    }

    pub fn len(&self) -> usize {
        self.cards.len()
    }

    /// Every full assignment, first node slowest.
    pub fn assignments(&self) -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        for &c in &self.cards {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..c).map(move |k| {
                        let mut a = prefix.clone();
                        a.push(k);
                        a
                    })
                })
                .collect();
        }
        out
    }

    /// p(assignment) by the chain rule.
    pub fn probability(&self, a: &[usize]) -> f64 {
        (0..self.len())
            .map(|i| {
                let mut idx = 0;
                for &p in &self.parents[i] {
                    idx = idx * self.cards[p] + a[p];
                }
                self.cpts[i][idx * self.cards[i] + a[i]]
            })
            .product()
    }

    /// Every assignment with its probability.
    pub fn enumerate(&self) -> Vec<(Vec<usize>, f64)> {
        self.assignments()
            .into_iter()
            .map(|a| {
                let p = self.probability(&a);
                (a, p)
            })
            .collect()
    }

    /// p(x_q | evidence) by enumeration, or `None` when the evidence has zero mass.
    pub fn query(&self, q: usize, evidence: &[(usize, usize)]) -> Option<Vec<f64>> {
        query_table(&self.enumerate(), self.cards[q], q, evidence)
    }

    pub fn variable(&self, i: usize) -> Variable {
        Variable::new(name(i), (0..self.cards[i]).map(state)).expect("valid variable")
    }

    pub fn factors(&self) -> Vec<Factor> {
        (0..self.len())
            .map(|i| {
                let scope: Vec<Variable> = self.parents[i]
                    .iter()
                    .chain(std::iter::once(&i))
                    .map(|&v| self.variable(v))
                    .collect();
                Factor::new(scope, self.cpts[i].clone()).expect("valid CPT")
            })
            .collect()
    }

    pub fn network(&self) -> BayesNet {
        let dag = Dag::new(
            (0..self.len()).map(name),
            (0..self.len()).flat_map(|i| self.parents[i].iter().map(move |&p| (name(p), name(i)))),
        )
        .expect("parents precede children");
        let cpts: BTreeMap<String, Factor> =
            (0..self.len()).map(name).zip(self.factors()).collect();
        BayesNet::new(dag, cpts).expect("valid network")
    }

    pub fn evidence(&self, evidence: &[(usize, usize)]) -> Evidence {
        evidence.iter().map(|&(v, k)| (name(v), state(k))).collect()
    }
}

/// p(x_q | evidence) from a precomputed [`RandomNet::enumerate`] table.
pub fn query_table(
    table: &[(Vec<usize>, f64)],
    card: usize,
    q: usize,
    evidence: &[(usize, usize)],
) -> Option<Vec<f64>> {
    let mut out = vec![0.0; card];
    for (a, p) in table {
        if evidence.iter().all(|&(v, k)| a[v] == k) {
            out[a[q]] += p;
        }
    }
    let z: f64 = out.iter().sum();
    if z > 0.0 {
        Some(out.into_iter().map(|v| v / z).collect())
    } else {
        None
    }
}

/// Runs every single-variable query against every evidence subset of size
/// at most two (states drawn at random) and returns the worst absolute
/// error. Panics on any disagreement about impossible evidence.
pub fn check_against_elimination<R: Rng>(net: &RandomNet, rng: &mut R) -> (f64, usize) {
    use railbreak_core::{eliminate, Error};

    let table = net.enumerate();
    let factors = net.factors();
    let n = net.len();
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for q in 0..n {
        let others: Vec<usize> = (0..n).filter(|&v| v != q).collect();
        let mut subsets: Vec<Vec<usize>> = vec![vec![]];
        for (i, &a) in others.iter().enumerate() {
            subsets.push(vec![a]);
            for &b in &others[i + 1..] {
                subsets.push(vec![a, b]);
            }
        }
        for vars in subsets {
            let ev: Vec<(usize, usize)> = vars
                .iter()
                .map(|&v| (v, rng.random_range(0..net.cards[v])))
                .collect();
            let expected = query_table(&table, net.cards[q], q, &ev);
            let got = eliminate(&factors, &[name(q).as_str()], &net.evidence(&ev));
            match (expected, got) {
                (Some(e), Ok(f)) => {
                    for (x, y) in e.iter().zip(f.values()) {
                        worst = worst.max((x - y).abs());
                    }
                }
                (None, Err(Error::ImpossibleEvidence { .. })) => {}
                (e, g) => panic!("query x{q} given {ev:?}: oracle {e:?}, engine {g:?}"),
            }
            checked += 1;
        }
    }
    (worst, checked)
}
