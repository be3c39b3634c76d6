//! Exact queries over collections of factors.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::factor::{Evidence, Factor, Variable};

/// Posterior over `query` given `evidence`, by variable elimination.
///
/// Every factor is reduced by the evidence it mentions, non-query variables are
/// summed out in min-degree order (ties broken by name) and the remaining
/// product is normalized. The result's scope follows the order of `query`.
pub fn eliminate(factors: &[Factor], query: &[&str], evidence: &Evidence) -> Result<Factor> {
    if query.is_empty() {
        return Err(Error::InvalidQuery("query is empty".into()));
    }
    let known = |name: &str| factors.iter().any(|f| f.contains(name));
    for (i, q) in query.iter().enumerate() {
        if !known(q) {
            return Err(Error::UnknownVariable(q.to_string()));
        }
        if evidence.contains(q) {
            return Err(Error::InvalidQuery(format!(
                "`{q}` is both queried and observed"
            )));
        }
        if query[..i].contains(q) {
            return Err(Error::InvalidQuery(format!("`{q}` queried twice")));
        }
    }
    for (name, _) in evidence.iter() {
        if !known(name) {
            return Err(Error::UnknownVariable(name.to_string()));
        }
    }

    let mut pool: Vec<Factor> = factors
        .iter()
        .map(|f| f.reduce(&evidence.restrict_to(f.scope())))
        .collect::<Result<_>>()?;

    let mut hidden: BTreeSet<String> = pool
        .iter()
        .flat_map(|f| f.scope_names())
        .filter(|n| !query.contains(n))
        .map(str::to_string)
        .collect();

    while let Some(next) = pick_min_degree(&pool, &hidden) {
        hidden.remove(&next);
        let (touching, rest): (Vec<Factor>, Vec<Factor>) =
            pool.into_iter().partition(|f| f.contains(&next));
        pool = rest;
        let mut combined = Factor::unit();
        for f in &touching {
            combined = combined.product(f)?;
        }
        pool.push(combined.marginalize(&next)?);
    }

    let mut result = Factor::unit();
    for f in &pool {
        result = result.product(f)?;
    }
    let result = result.reorder(query)?;
    if !(result.total() > 0.0) {
        return Err(Error::ImpossibleEvidence {
            evidence: evidence.to_string(),
        });
    }
    result.normalize()
}

/// Number of distinct neighbours of `name` in the factor interaction graph.
fn degree(pool: &[Factor], name: &str) -> usize {
    let mut neighbours = BTreeSet::new();
    for f in pool.iter().filter(|f| f.contains(name)) {
        for v in f.scope_names() {
            if v != name {
                neighbours.insert(v);
            }
        }
    }
    neighbours.len()
}

fn pick_min_degree(pool: &[Factor], hidden: &BTreeSet<String>) -> Option<String> {
    // BTreeSet iterates lexicographically, so min_by_key keeps the first name on ties.
    hidden.iter().min_by_key(|n| degree(pool, n)).cloned()
}

/// Bayes' rule: p(H|E) = p(E|H) p(H) / p(E).
///
/// `likelihood` holds p(E|h) for each h with E fixed, `prior` holds p(h), and
/// `marginal` is the scalar factor p(E).
pub fn bayes_posterior(likelihood: &Factor, prior: &Factor, marginal: &Factor) -> Result<Factor> {
    if !marginal.is_scalar() {
        return Err(Error::InvalidQuery(format!(
            "marginal likelihood must be a scalar factor, got scope [{}]",
            marginal.scope_names().join(", ")
        )));
    }
    let mut l_names = likelihood.scope_names();
    let mut p_names = prior.scope_names();
    l_names.sort_unstable();
    p_names.sort_unstable();
    if l_names != p_names {
        return Err(Error::InvalidQuery(
            "likelihood and prior must range over the same hypothesis variables".into(),
        ));
    }
    let evidence_mass = marginal.values()[0];
    if !(evidence_mass > 0.0) {
        return Err(Error::Degenerate("p(E) is zero".into()));
    }
    let joint = likelihood.product(prior)?;
    Factor::new(
        joint.scope().to_vec(),
        joint.values().iter().map(|v| v / evidence_mass).collect(),
    )
}

/// Checks x ⊥ y, or x ⊥ y | z when `given` is set, entrywise within `tol`.
///
/// Conditionals are only compared where the conditioning mass is positive.
pub fn check_independence(
    joint: &Factor,
    x: &Variable,
    y: &Variable,
    given: Option<&Variable>,
    tol: f64,
) -> Result<bool> {
    for v in [Some(x), Some(y), given].into_iter().flatten() {
        match joint.variable(v.name()) {
            Some(u) if u == v => {}
            Some(_) => {
                return Err(Error::ScopeConflict {
                    name: v.name().to_string(),
                })
            }
            None => return Err(Error::UnknownVariable(v.name().to_string())),
        }
    }
    if x.name() == y.name() || given.is_some_and(|z| z.name() == x.name() || z.name() == y.name()) {
        return Err(Error::InvalidQuery(
            "independence check needs distinct variables".into(),
        ));
    }
    let joint = joint.normalize()?;
    let (nx, ny) = (x.cardinality(), y.cardinality());

    match given {
        None => {
            let pxy = joint.marginal(&[x.name(), y.name()])?;
            let px = joint.marginal(&[x.name()])?;
            let py = joint.marginal(&[y.name()])?;
            for i in 0..nx {
                for j in 0..ny {
                    let lhs = pxy.values()[i * ny + j];
                    let rhs = px.values()[i] * py.values()[j];
                    if (lhs - rhs).abs() > tol {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        }
        Some(z) => {
            let nz = z.cardinality();
            let pzxy = joint.marginal(&[z.name(), x.name(), y.name()])?;
            for k in 0..nz {
                let slab = &pzxy.values()[k * nx * ny..(k + 1) * nx * ny];
                let pz: f64 = slab.iter().sum();
                if !(pz > 0.0) {
                    continue;
                }
                let px: Vec<f64> = (0..nx)
                    .map(|i| slab[i * ny..(i + 1) * ny].iter().sum::<f64>() / pz)
                    .collect();
                let py: Vec<f64> = (0..ny)
                    .map(|j| (0..nx).map(|i| slab[i * ny + j]).sum::<f64>() / pz)
                    .collect();
                for i in 0..nx {
                    for j in 0..ny {
                        if (slab[i * ny + j] / pz - px[i] * py[j]).abs() > tol {
                            return Ok(false);
                        }
                    }
                }
            }
            Ok(true)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor::{DISTRIBUTION_TOL, IDENTITY_TOL};

    fn var(name: &str, n: usize) -> Variable {
        Variable::new(name, (0..n).map(|i| format!("{}{i}", name.to_lowercase()))).unwrap()
    }

    #[test]
    fn single_factor_query_is_normalization() {
        let x = var("X", 3);
        let f = Factor::new(vec![x], vec![1.0, 2.0, 5.0]).unwrap();
        let p = eliminate(std::slice::from_ref(&f), &["X"], &Evidence::new()).unwrap();
        assert!(p.max_abs_diff(&f.normalize().unwrap()).unwrap() < IDENTITY_TOL);
    }

    #[test]
    fn impossible_evidence_is_an_error() {
        let x = var("X", 2);
        let y = var("Y", 2);
        let f = Factor::new(vec![x, y], vec![0.5, 0.0, 0.5, 0.0]).unwrap();
        let err = eliminate(&[f], &["X"], &Evidence::new().with("Y", "y1")).unwrap_err();
        match err {
            Error::ImpossibleEvidence { evidence } => assert_eq!(evidence, "Y=y1"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn query_validation() {
        let x = var("X", 2);
        let f = Factor::uniform(vec![x]).unwrap();
        let fs = [f];
        assert!(eliminate(&fs, &[], &Evidence::new()).is_err());
        assert!(eliminate(&fs, &["Q"], &Evidence::new()).is_err());
        assert!(eliminate(&fs, &["X"], &Evidence::new().with("X", "x0")).is_err());
        assert!(eliminate(&fs, &["X"], &Evidence::new().with("Q", "q0")).is_err());
        assert!(eliminate(&fs, &["X", "X"], &Evidence::new()).is_err());
    }

    #[test]
    fn chain_query_matches_hand_computation() {
        // A -> B: p(A) = [0.3, 0.7], p(B|A) rows [0.9, 0.1], [0.2, 0.8]
        let a = var("A", 2);
        let b = var("B", 2);
        let pa = Factor::new(vec![a.clone()], vec![0.3, 0.7]).unwrap();
        let pba = Factor::new(vec![a, b], vec![0.9, 0.1, 0.2, 0.8]).unwrap();
        let pb = eliminate(&[pa.clone(), pba.clone()], &["B"], &Evidence::new()).unwrap();
        assert!((pb.values()[0] - (0.27 + 0.14)).abs() < IDENTITY_TOL);
        let post = eliminate(&[pa, pba], &["A"], &Evidence::new().with("B", "b1")).unwrap();
        let expect = 0.3 * 0.1 / (0.3 * 0.1 + 0.7 * 0.8);
        assert!((post.values()[0] - expect).abs() < IDENTITY_TOL);
    }

    #[test]
    fn bayes_posterior_examples() {
        let h = var("H", 2);
        let like = Factor::new(vec![h.clone()], vec![0.2, 0.6]).unwrap();
        let flat = Factor::uniform(vec![h.clone()]).unwrap();
        let pe = Factor::scalar(0.4).unwrap();
        let post = bayes_posterior(&like, &flat, &pe).unwrap();
        assert!((post.values()[0] - 0.25).abs() < IDENTITY_TOL);
        assert!((post.values()[1] - 0.75).abs() < IDENTITY_TOL);

        let certain = Factor::new(vec![h.clone()], vec![1.0, 0.0]).unwrap();
        let prior = Factor::new(vec![h.clone()], vec![0.3, 0.7]).unwrap();
        let post = bayes_posterior(&certain, &prior, &Factor::scalar(0.3).unwrap()).unwrap();
        assert_eq!(post.values(), &[1.0, 0.0]);

        assert!(matches!(
            bayes_posterior(&like, &prior, &Factor::scalar(0.0).unwrap()),
            Err(Error::Degenerate(_))
        ));
        assert!(bayes_posterior(&like, &prior, &prior).is_err());
    }

    #[test]
    fn bayes_morning_break_share() {
        // p(R=r1 | T=morning) from p(T=morning | R=r1) = 0.56, p(r1) = 0.019, p(morning) = 7/24
        let r = Variable::new("R", ["r0", "r1"]).unwrap();
        let like = Factor::new(
            vec![r.clone()],
            vec![(7.0 / 24.0 - 0.56 * 0.019) / 0.981, 0.56],
        )
        .unwrap();
        let prior = Factor::new(vec![r], vec![0.981, 0.019]).unwrap();
        let post = bayes_posterior(&like, &prior, &Factor::scalar(7.0 / 24.0).unwrap()).unwrap();
        let expect = 0.56 * 0.019 / (7.0 / 24.0);
        assert!((post.values()[1] - expect).abs() < IDENTITY_TOL);
        assert!((post.values()[1] - 0.0365).abs() < 5e-5);
        assert!(post.is_distribution(DISTRIBUTION_TOL));
    }

    #[test]
    fn independence_examples() {
        let x = var("X", 2);
        let y = var("Y", 2);
        let diag = Factor::new(vec![x.clone(), y.clone()], vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!(!check_independence(&diag, &x, &y, None, 1e-9).unwrap());

        let px = Factor::new(vec![x.clone()], vec![0.3, 0.7]).unwrap();
        let py = Factor::new(vec![y.clone()], vec![0.4, 0.6]).unwrap();
        let outer = px.product(&py).unwrap();
        assert!(check_independence(&outer, &x, &y, None, 1e-9).unwrap());

        let q = var("Q", 2);
        assert!(matches!(
            check_independence(&outer, &x, &q, None, 1e-9),
            Err(Error::UnknownVariable(_))
        ));
    }

    #[test]
    fn conditional_independence_of_common_cause() {
        // Z -> X, Z -> Y: X and Y are dependent but independent given Z.
        let z = var("Z", 2);
        let x = var("X", 2);
        let y = var("Y", 2);
        let pz = Factor::new(vec![z.clone()], vec![0.4, 0.6]).unwrap();
        let pxz = Factor::new(vec![z.clone(), x.clone()], vec![0.9, 0.1, 0.2, 0.8]).unwrap();
        let pyz = Factor::new(vec![z.clone(), y.clone()], vec![0.7, 0.3, 0.1, 0.9]).unwrap();
        let joint = pz.product(&pxz).unwrap().product(&pyz).unwrap();
        assert!(!check_independence(&joint, &x, &y, None, 1e-9).unwrap());
        assert!(check_independence(&joint, &x, &y, Some(&z), 1e-9).unwrap());
    }
}
