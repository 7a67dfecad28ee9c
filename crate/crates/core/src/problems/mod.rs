//! Seeded problem generators and the JSON problem document.
//!
//! Every generator is addressed by name inside a [`GeneratorSpec`]:
//!
//! | name        | parameters                                                  |
//! |-------------|-------------------------------------------------------------|
//! | `toy`       | [`ToySpec`]: chain of quadratics with a closed-form optimum  |
//! | `lasso`     | [`LassoSpec`]: Gaussian design, planted sparse signal        |
//! | `separable` | [`SeparableSpec`]: diagonal quadratics with chosen `L`, `β`  |

mod lasso;
mod separable;
mod toy;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{CompositeProblem, KnownOptimum};
use crate::prox::ProxSpec;

pub use lasso::{generate_lasso, make_lasso, make_lasso_with_reference, LassoInstance, LassoSpec, ReferenceSolution};
pub use separable::{make_separable, SeparableQuadratics, SeparableSpec};
pub use toy::{make_toy, ToyChain, ToySpec};

/// Names a generator together with its parameters and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub name: String,
    #[serde(default)]
    pub params: serde_json::Value,
    #[serde(default)]
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn toy(spec: &ToySpec) -> Self {
        Self { name: "toy".into(), params: to_value(spec), seed: 0 }
    }

    pub fn lasso(spec: &LassoSpec) -> Self {
        Self { name: "lasso".into(), params: to_value(spec), seed: spec.seed }
    }

    pub fn separable(spec: &SeparableSpec) -> Self {
        Self { name: "separable".into(), params: to_value(spec), seed: spec.seed }
    }

    /// Instantiates the named generator. For `lasso` the reference solution is
    /// computed as well, so distances can be measured.
    pub fn build(&self) -> Result<CompositeProblem> {
        let params = if self.params.is_null() { serde_json::json!({}) } else { self.params.clone() };
        match self.name.as_str() {
            "toy" => make_toy(&serde_json::from_value(params)?),
            "lasso" => {
                let mut spec: LassoSpec = serde_json::from_value(params)?;
                spec.seed = self.seed;
                make_lasso_with_reference(&spec)
            }
            "separable" => {
                let mut spec: SeparableSpec = serde_json::from_value(params)?;
                spec.seed = self.seed;
                make_separable(&spec)
            }
            other => Err(Error::invalid(format!("unknown generator '{other}'"))),
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("generator specs serialize")
}

/// Serialized problem metadata. Only `generator` is required when reading;
/// the remaining fields are checked against the generated problem when
/// present, except `beta`, which supplies the growth constant for generators
/// that do not know it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_components: Option<usize>,
    pub generator: GeneratorSpec,
    #[serde(rename = "L_n", default, skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub known_optimum: Option<KnownOptimum>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regularizer: Option<ProxSpec>,
}

impl ProblemDocument {
    /// Full metadata of a generated problem.
    pub fn describe(problem: &CompositeProblem) -> Result<Self> {
        let generator = problem
            .generator()
            .cloned()
            .ok_or_else(|| Error::invalid("problem was not produced by a named generator"))?;
        Ok(Self {
            dimension: Some(problem.dimension()),
            num_components: Some(problem.num_components()),
            generator,
            lipschitz: Some(problem.component_lipschitz().to_vec()),
            beta: problem.growth(),
            known_optimum: problem.known_optimum().cloned(),
            regularizer: Some(*problem.regularizer()),
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn build(&self) -> Result<CompositeProblem> {
        let mut problem = self.generator.build()?;
        let mismatch = |what: &str| Error::invalid(format!("{what} in document does not match the generator"));
        if self.dimension.is_some_and(|d| d != problem.dimension()) {
            return Err(mismatch("dimension"));
        }
        if self.num_components.is_some_and(|n| n != problem.num_components()) {
            return Err(mismatch("num_components"));
        }
        if let Some(ls) = &self.lipschitz {
            let same = ls.len() == problem.num_components()
                && ls
                    .iter()
                    .zip(problem.component_lipschitz())
                    .all(|(a, b)| (a - b).abs() <= 1e-12 * b.abs().max(1.0));
            if !same {
                return Err(mismatch("L_n"));
            }
        }
        if self.regularizer.is_some_and(|r| r != *problem.regularizer()) {
            return Err(mismatch("regularizer"));
        }
        if let Some(beta) = self.beta {
            problem = problem.with_growth(beta)?;
        }
        if let Some(opt) = &self.known_optimum {
            problem = problem.with_known_optimum(opt.clone())?;
        }
        Ok(problem)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document_builds() {
        let doc = ProblemDocument::from_json(r#"{"generator":{"name":"toy","params":{"n":10}}}"#).unwrap();
        let p = doc.build().unwrap();
        assert_eq!(p.dimension(), 10);
        assert_eq!(p.total_lipschitz(), 11.0);
        assert_eq!(p.growth(), Some(2.0));
    }

    #[test]
    fn describe_round_trips() {
        let p = make_toy(&ToySpec::paper()).unwrap();
        let doc = ProblemDocument::describe(&p).unwrap();
        let text = doc.to_json().unwrap();
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        for key in ["dimension", "num_components", "generator", "L_n", "beta", "known_optimum", "regularizer"] {
            assert!(value.get(key).is_some(), "missing {key}");
        }
        let back = ProblemDocument::from_json(&text).unwrap();
        assert_eq!(back, doc);
        let rebuilt = back.build().unwrap();
        assert_eq!(rebuilt.component_lipschitz(), p.component_lipschitz());
        assert_eq!(rebuilt.known_optimum(), p.known_optimum());
    }

    #[test]
    fn mismatched_metadata_is_rejected() {
        let text = r#"{"dimension":5,"generator":{"name":"toy","params":{"n":10}}}"#;
        assert!(ProblemDocument::from_json(text).unwrap().build().is_err());
        let text = r#"{"generator":{"name":"toy","params":{"n":3}},"L_n":[1,1,1]}"#;
        assert!(ProblemDocument::from_json(text).unwrap().build().is_err());
        let text = r#"{"generator":{"name":"nope"}}"#;
        assert!(ProblemDocument::from_json(text).unwrap().build().is_err());
    }

    #[test]
    fn beta_from_document_is_applied() {
        let text = r#"{"generator":{"name":"lasso","params":{"rows":6,"cols":10,"sparsity":0.2,"lambda":0.2},"seed":3},"beta":1.0}"#;
        let p = ProblemDocument::from_json(text).unwrap().build().unwrap();
        assert_eq!(p.growth(), Some(1.0));
        assert!(p.known_optimum().is_some());
    }
}
