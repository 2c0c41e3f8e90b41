//! Subjective beliefs over a finite family of causal models.
//!
//! A family member is a fully parameterized model (graph and tables), so two
//! members may share a graph and still disagree on their tables. Beliefs are
//! immutable values; [`update_belief`] returns a fresh state.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::intervention::{interventional_distribution, Distribution, Intervention};
use crate::model::{CausalModel, PROB_TOLERANCE};

#[derive(Clone, Debug, PartialEq)]
pub struct FamilyMember {
    pub name: String,
    pub model: CausalModel,
}

/// Non-empty ordered list of models sharing one variable signature.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelFamily {
    members: Vec<FamilyMember>,
}

impl ModelFamily {
    pub fn new<I, S>(members: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, CausalModel)>,
        S: Into<String>,
    {
        let members: Vec<FamilyMember> = members
            .into_iter()
            .map(|(name, model)| FamilyMember {
                name: name.into(),
                model,
            })
            .collect();
        let first = members.first().ok_or(Error::EmptyFamily)?;
        for (i, m) in members.iter().enumerate() {
            if members[..i].iter().any(|prev| prev.name == m.name) {
                return Err(Error::DuplicateName(m.name.clone()));
            }
            if !m.model.same_signature(&first.model) {
                return Err(Error::HeterogeneousFamily(format!(
                    "`{}` does not share the variables and domains of `{}`",
                    m.name, first.name
                )));
            }
        }
        Ok(ModelFamily { members })
    }

    pub fn singleton(name: impl Into<String>, model: CausalModel) -> Self {
        ModelFamily {
            members: vec![FamilyMember {
                name: name.into(),
                model,
            }],
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[FamilyMember] {
        &self.members
    }

    pub fn model(&self, i: usize) -> &CausalModel {
        &self.members[i].model
    }

    pub fn name(&self, i: usize) -> &str {
        &self.members[i].name
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.members.iter().position(|m| m.name == name)
    }

    /// First member structurally equal to `model`.
    pub fn position_of(&self, model: &CausalModel) -> Option<usize> {
        self.members.iter().position(|m| &m.model == model)
    }

    /// Any member; all of them share variables and domains.
    pub fn signature(&self) -> &CausalModel {
        &self.members[0].model
    }
}

/// Weights over a family, summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct BeliefState {
    family: Arc<ModelFamily>,
    weights: Vec<f64>,
}

impl BeliefState {
    pub fn new(family: Arc<ModelFamily>, weights: Vec<f64>) -> Result<Self> {
        check_weights(&family, &weights)?;
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > PROB_TOLERANCE {
            return Err(Error::InvalidWeights(format!(
                "weights sum to {sum}, not 1"
            )));
        }
        Ok(BeliefState { family, weights })
    }

    pub fn singleton(name: impl Into<String>, model: CausalModel) -> Self {
        BeliefState {
            family: Arc::new(ModelFamily::singleton(name, model)),
            weights: vec![1.0],
        }
    }

    pub fn uniform(family: Arc<ModelFamily>) -> Self {
        let n = family.len();
        BeliefState {
            family,
            weights: vec![1.0 / n as f64; n],
        }
    }

    pub fn family(&self) -> &Arc<ModelFamily> {
        &self.family
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    /// `(member, weight)` pairs in family order.
    pub fn iter(&self) -> impl Iterator<Item = (&FamilyMember, f64)> {
        self.family
            .members()
            .iter()
            .zip(self.weights.iter().copied())
    }
}

fn check_weights(family: &ModelFamily, weights: &[f64]) -> Result<()> {
    if weights.len() != family.len() {
        return Err(Error::LengthMismatch {
            expected: family.len(),
            found: weights.len(),
        });
    }
    if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
        return Err(Error::InvalidWeights(format!(
            "weight {w} is not a finite nonnegative number"
        )));
    }
    Ok(())
}

/// Divides nonnegative weights by their sum.
pub fn normalize_belief(family: Arc<ModelFamily>, raw: &[f64]) -> Result<BeliefState> {
    check_weights(&family, raw)?;
    let sum: f64 = raw.iter().sum();
    if sum <= 0.0 {
        return Err(Error::AllZeroWeights);
    }
    Ok(BeliefState {
        family,
        weights: raw.iter().map(|w| w / sum).collect(),
    })
}

/// `Σ_g w_g · P_g(target | do(iv))`.
pub fn mixture_interventional(
    belief: &BeliefState,
    iv: &Intervention,
    target: &str,
) -> Result<Distribution> {
    let mut mixed: Option<(Distribution, Vec<f64>)> = None;
    for (member, w) in belief.iter() {
        let d = interventional_distribution(&member.model, iv, target)?;
        let acc = &mut mixed
            .get_or_insert_with(|| (d.clone(), vec![0.0; d.probs().len()]))
            .1;
        for (a, p) in acc.iter_mut().zip(d.probs()) {
            *a += w * p;
        }
    }
    let (template, probs) = mixed.expect("family is never empty");
    Ok(Distribution::new(
        template.variable(),
        template.labels(),
        probs,
    ))
}

/// One interventional observation: the agent did `intervention` and saw
/// `variable = value`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Observation {
    pub intervention: Intervention,
    pub variable: String,
    pub value: String,
}

impl Observation {
    pub fn new(
        intervention: Intervention,
        variable: impl Into<String>,
        value: impl Into<String>,
    ) -> Self {
        Observation {
            intervention,
            variable: variable.into(),
            value: value.into(),
        }
    }
}

/// `P_g(variable = value | do(iv))` for every member, in family order.
pub fn likelihoods(
    family: &ModelFamily,
    iv: &Intervention,
    variable: &str,
    value: &str,
) -> Result<Vec<f64>> {
    family
        .members()
        .iter()
        .map(|m| {
            let d = interventional_distribution(&m.model, iv, variable)?;
            d.prob(value).ok_or_else(|| Error::UnknownValue {
                variable: variable.to_string(),
                value: value.to_string(),
            })
        })
        .collect()
}

/// Bayes rule with interventional likelihoods.
pub fn update_belief(
    belief: &BeliefState,
    iv: &Intervention,
    variable: &str,
    value: &str,
) -> Result<BeliefState> {
    let lik = likelihoods(belief.family(), iv, variable, value)?;
    reweight(belief, &lik)
}

/// One update with the product of the observations' likelihoods.
pub fn update_belief_batch(
    belief: &BeliefState,
    observations: &[Observation],
) -> Result<BeliefState> {
    let mut product = vec![1.0; belief.family().len()];
    for obs in observations {
        let lik = likelihoods(
            belief.family(),
            &obs.intervention,
            &obs.variable,
            &obs.value,
        )?;
        for (acc, l) in product.iter_mut().zip(lik) {
            *acc *= l;
        }
    }
    reweight(belief, &product)
}

fn reweight(belief: &BeliefState, likelihood: &[f64]) -> Result<BeliefState> {
    let unnormalized: Vec<f64> = belief
        .weights
        .iter()
        .zip(likelihood)
        .map(|(w, l)| w * l)
        .collect();
    let total: f64 = unnormalized.iter().sum();
    if total <= 0.0 {
        return Err(Error::ZeroTotalLikelihood);
    }
    Ok(BeliefState {
        family: belief.family.clone(),
        weights: unnormalized.into_iter().map(|w| w / total).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_model, RawModel};

    fn load(text: &str) -> CausalModel {
        validate_model(&serde_json::from_str::<RawModel>(text).unwrap()).unwrap()
    }

    fn chain_rev() -> Arc<ModelFamily> {
        Arc::new(
            ModelFamily::new([
                ("chain", load(include_str!("../tests/data/chain.json"))),
                ("rev", load(include_str!("../tests/data/rev.json"))),
            ])
            .unwrap(),
        )
    }

    fn do_a1() -> Intervention {
        Intervention::single("A", "1")
    }

    #[test]
    fn normalize_examples() {
        let fam = chain_rev();
        assert_eq!(
            normalize_belief(fam.clone(), &[2.0, 2.0])
                .unwrap()
                .weights(),
            &[0.5, 0.5]
        );
        assert!(matches!(
            normalize_belief(fam.clone(), &[0.0, 0.0]),
            Err(Error::AllZeroWeights)
        ));
        assert!(matches!(
            normalize_belief(fam.clone(), &[1.0]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            normalize_belief(fam, &[1.0, -1.0]),
            Err(Error::InvalidWeights(_))
        ));

        let three = Arc::new(
            ModelFamily::new([
                ("a", load(include_str!("../tests/data/chain.json"))),
                ("b", load(include_str!("../tests/data/rev.json"))),
                ("c", load(include_str!("../tests/data/chain.json"))),
            ])
            .unwrap(),
        );
        assert_eq!(
            normalize_belief(three, &[1.0, 0.0, 0.0]).unwrap().weights(),
            &[1.0, 0.0, 0.0]
        );
    }

    #[test]
    fn family_checks() {
        let chain = load(include_str!("../tests/data/chain.json"));
        let confound = load(include_str!("../tests/data/confound.json"));
        assert!(matches!(
            ModelFamily::new([("a", chain.clone()), ("b", confound)]),
            Err(Error::HeterogeneousFamily(_))
        ));
        assert!(matches!(
            ModelFamily::new([("a", chain.clone()), ("a", chain)]),
            Err(Error::DuplicateName(_))
        ));
        assert!(matches!(
            ModelFamily::new(Vec::<(String, CausalModel)>::new()),
            Err(Error::EmptyFamily)
        ));
    }

    #[test]
    fn belief_requires_unit_sum() {
        assert!(matches!(
            BeliefState::new(chain_rev(), vec![0.5, 0.6]),
            Err(Error::InvalidWeights(_))
        ));
    }

    #[test]
    fn mixture_values() {
        let fam = chain_rev();
        let half = BeliefState::new(fam.clone(), vec![0.5, 0.5]).unwrap();
        let d = mixture_interventional(&half, &do_a1(), "C").unwrap();
        assert!((d.prob("1").unwrap() - 0.65).abs() < 1e-12);

        let chain_only = BeliefState::new(fam.clone(), vec![1.0, 0.0]).unwrap();
        let d = mixture_interventional(&chain_only, &do_a1(), "C").unwrap();
        assert_eq!(d.prob("1").unwrap(), 0.8);

        let single = BeliefState::singleton("chain", fam.model(0).clone());
        let direct = interventional_distribution(fam.model(0), &do_a1(), "C").unwrap();
        assert_eq!(
            mixture_interventional(&single, &do_a1(), "C").unwrap(),
            direct
        );
    }

    #[test]
    fn update_examples() {
        let fam = chain_rev();
        let prior = BeliefState::new(fam.clone(), vec![0.5, 0.5]).unwrap();
        let post = update_belief(&prior, &do_a1(), "C", "1").unwrap();
        assert!((post.weight(0) - 0.8 / 1.3).abs() < 1e-12);
        assert!((post.weight(1) - 0.5 / 1.3).abs() < 1e-12);

        // Under do(C=1) neither model's C depends on anything: both likelihoods are 1.
        let flat = update_belief(&prior, &Intervention::single("C", "1"), "C", "1").unwrap();
        assert_eq!(flat.weights(), prior.weights());

        let degenerate = BeliefState::new(fam, vec![1.0, 0.0]).unwrap();
        let post = update_belief(&degenerate, &do_a1(), "C", "0").unwrap();
        assert_eq!(post.weights(), &[1.0, 0.0]);
    }

    #[test]
    fn impossible_observation_is_an_error() {
        let prior = BeliefState::new(chain_rev(), vec![0.5, 0.5]).unwrap();
        assert!(matches!(
            update_belief(&prior, &Intervention::single("C", "1"), "C", "0"),
            Err(Error::ZeroTotalLikelihood)
        ));
        assert!(matches!(
            update_belief(&prior, &do_a1(), "C", "7"),
            Err(Error::UnknownValue { .. })
        ));
    }

    #[test]
    fn batch_matches_sequential() {
        let prior = BeliefState::new(chain_rev(), vec![0.3, 0.7]).unwrap();
        let obs = [
            Observation::new(do_a1(), "C", "1"),
            Observation::new(Intervention::single("A", "0"), "C", "1"),
            Observation::new(do_a1(), "C", "0"),
        ];
        let mut seq = prior.clone();
        for o in &obs {
            seq = update_belief(&seq, &o.intervention, &o.variable, &o.value).unwrap();
        }
        let batch = update_belief_batch(&prior, &obs).unwrap();
        for (a, b) in seq.weights().iter().zip(batch.weights()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
