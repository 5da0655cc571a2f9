//! Scenario files (JSON) and their conversion into validated scenarios.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use relci_core::graded::{GradedMatrix, ModulePresentation, Poly, PolyRing, Ring};
use relci_core::resolve::{ResolutionWindow, Scenario, ScenarioSpec, Witness};
use relci_core::{Field, DEFAULT_PRIME};
use serde::{Deserialize, Serialize};

use crate::parse::{parse_homogeneous, PolyParseError};

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {err}")]
    Io { path: String, err: std::io::Error },
    #[error("{path}: {err}")]
    Json { path: String, err: serde_json::Error },
    #[error(transparent)]
    Poly(#[from] PolyParseError),
    #[error("{field}: {message}")]
    Field { field: String, message: String },
    #[error("scenario validation: {0}")]
    Domain(relci_core::Error),
}

impl From<relci_core::Error> for ScenarioError {
    fn from(e: relci_core::Error) -> Self {
        ScenarioError::Domain(e)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Variable {
    Name(String),
    Weighted { name: String, degree: u32 },
}

impl Variable {
    fn parts(&self) -> (&str, u32) {
        match self {
            Variable::Name(n) => (n, 1),
            Variable::Weighted { name, degree } => (name, *degree),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedModule {
    /// `Q / (variables)`
    ResidueField,
    /// `Q` itself (becomes `Q/I` once the ideal relations are added)
    Ring,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModuleSpec {
    Named(NamedModule),
    Presented {
        generators: Vec<i32>,
        /// each relation is a vector with one entry per generator
        #[serde(default)]
        relations: Vec<Vec<String>>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    pub max_hdeg: i32,
    pub max_ideg: i32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub name: Option<String>,
    /// prime `p`, or 0 for the rationals
    #[serde(default)]
    pub characteristic: Option<u32>,
    pub variables: Vec<Variable>,
    /// generators of `I`; defaults to the entries of `f` and `f'`
    #[serde(default)]
    pub ideal: Vec<String>,
    pub f: Vec<String>,
    /// omitted means `f' = 0`
    #[serde(default)]
    pub f_prime: Vec<String>,
    /// `"i,j"` (1-based) to `[x_ij, g_ij]`
    #[serde(default)]
    pub witnesses: BTreeMap<String, [String; 2]>,
    pub m: ModuleSpec,
    pub n: ModuleSpec,
    pub window: WindowSpec,
    #[serde(default)]
    pub truncation: Option<i32>,
}

impl ScenarioFile {
    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let display = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|err| ScenarioError::Io { path: display.clone(), err })?;
        Self::from_json(&text, &display)
    }

    pub fn from_json(text: &str, origin: &str) -> Result<Self, ScenarioError> {
        serde_json::from_str(text).map_err(|err| ScenarioError::Json { path: origin.to_string(), err })
    }

    pub fn characteristic(&self) -> u32 {
        self.characteristic.unwrap_or(DEFAULT_PRIME)
    }

    /// Build the scenario over `field` with the given window.
    pub fn to_spec<F: Field>(&self, field: F, window: WindowSpec) -> Result<ScenarioSpec<F>, ScenarioError> {
        let names: Vec<String> = self.variables.iter().map(|v| v.parts().0.to_string()).collect();
        let weights: Vec<u32> = self.variables.iter().map(|v| v.parts().1).collect();
        if let Some(&w) = weights.iter().find(|&&w| w == 0) {
            return Err(ScenarioError::Field { field: "variables".into(), message: format!("degree {} must be positive", w) });
        }
        let base = PolyRing::with_weights(field, names, weights.clone())?;
        let parse_list = |name: &str, items: &[String]| -> Result<Vec<Poly<F::Elem>>, ScenarioError> {
            items
                .iter()
                .enumerate()
                .map(|(k, s)| parse_homogeneous(&base, &format!("{}[{}]", name, k + 1), s).map_err(Into::into))
                .collect()
        };
        let ideal = parse_list("ideal", &self.ideal)?;
        let f = parse_list("f", &self.f)?;
        let f_prime = if self.f_prime.is_empty() { vec![Poly::zero(); f.len()] } else { parse_list("f_prime", &self.f_prime)? };
        let mut witnesses = Vec::new();
        for (key, [x, g]) in &self.witnesses {
            let bad = || ScenarioError::Field {
                field: format!("witnesses[{:?}]", key),
                message: "keys are \"i,j\" with 1-based indices".into(),
            };
            let (i, j) = key.split_once(',').ok_or_else(bad)?;
            let i: usize = i.trim().parse().map_err(|_| bad())?;
            let j: usize = j.trim().parse().map_err(|_| bad())?;
            if i == 0 || j == 0 {
                return Err(bad());
            }
            let field_name = format!("witnesses[\"{}\"]", key);
            witnesses.push(Witness {
                i: i - 1,
                j: j - 1,
                x: parse_homogeneous(&base, &format!("{}[0]", field_name), x)?,
                g: parse_homogeneous(&base, &format!("{}[1]", field_name), g)?,
            });
        }
        let m = self.module(&base, "m", &self.m)?;
        let n = self.module(&base, "n", &self.n)?;
        let q = Arc::new(Ring::polynomial(base, window.max_ideg + 2));
        let window = ResolutionWindow::new(window.max_hdeg, window.max_ideg)?;
        Ok(ScenarioSpec { q, ideal, f, f_prime, witnesses, m, n, window })
    }

    fn module<F: Field>(&self, base: &PolyRing<F>, name: &str, spec: &ModuleSpec) -> Result<ModulePresentation<F::Elem>, ScenarioError> {
        match spec {
            ModuleSpec::Named(NamedModule::Ring) => Ok(ModulePresentation::free(vec![0])),
            ModuleSpec::Named(NamedModule::ResidueField) => {
                let source = base.weights().iter().map(|&w| w as i32).collect();
                let cols = (0..base.nvars()).map(|i| vec![(0, base.var(i))]).collect();
                Ok(ModulePresentation::new(GradedMatrix::from_columns(base.weights(), source, vec![0], cols)?))
            }
            ModuleSpec::Presented { generators, relations } => {
                let mut source = Vec::new();
                let mut cols = Vec::new();
                for (k, rel) in relations.iter().enumerate() {
                    let field_name = format!("{}.relations[{}]", name, k + 1);
                    if rel.len() != generators.len() {
                        return Err(ScenarioError::Field {
                            field: field_name,
                            message: format!("has {} entries for {} generators", rel.len(), generators.len()),
                        });
                    }
                    let mut col = Vec::new();
                    let mut degree = None;
                    for (r, text) in rel.iter().enumerate() {
                        let p = parse_homogeneous(base, &format!("{}[{}]", field_name, r + 1), text)?;
                        if p.is_zero() {
                            continue;
                        }
                        let d = p.homogeneous_degree(base.weights()).unwrap() as i32 + generators[r];
                        if degree.is_some_and(|e| e != d) {
                            return Err(ScenarioError::Field { field: field_name, message: "entries have inconsistent degrees".into() });
                        }
                        degree = Some(d);
                        col.push((r, p));
                    }
                    if let Some(d) = degree {
                        source.push(d);
                        cols.push(col);
                    }
                }
                Ok(ModulePresentation::new(GradedMatrix::from_columns(base.weights(), source, generators.clone(), cols)?))
            }
        }
    }

    /// Parse, then run every scenario check.
    pub fn build<F: Field>(&self, field: F, window: WindowSpec) -> Result<Scenario<F>, ScenarioError> {
        Ok(Scenario::new(self.to_spec(field, window)?)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use relci_core::PrimeField;

    const HYPERSURFACE: &str = r#"{
        "variables": ["x", "y"],
        "ideal": ["x", "y"],
        "f": ["x^2"],
        "f_prime": ["x^2 + x*y"],
        "witnesses": {"1,1": ["x", "-y"]},
        "m": "residue_field",
        "n": "residue_field",
        "window": {"max_hdeg": 4, "max_ideg": 5}
    }"#;

    #[test]
    fn parses_and_validates() {
        let file = ScenarioFile::from_json(HYPERSURFACE, "inline").unwrap();
        let s = file.build(PrimeField::new(32003).unwrap(), file.window).unwrap();
        assert_eq!(s.n_seq(), 1);
        assert_eq!(s.degrees(), &[2]);
        assert_eq!(s.n_over_r().dim(0), 1);
        assert_eq!(s.n_over_r().dim(1), 0);
    }

    #[test]
    fn json_errors_carry_position() {
        let err = ScenarioFile::from_json("{\n  \"variables\": [\"x\"],\n  \"f\": 3\n}", "bad.json").unwrap_err();
        let msg = err.to_string();
        assert!(msg.starts_with("bad.json: "), "{}", msg);
        assert!(msg.contains("line 3"), "{}", msg);
    }

    #[test]
    fn poly_errors_name_the_field() {
        let text = HYPERSURFACE.replace("\"x^2 + x*y\"", "\"x^2 + x*w\"");
        let file = ScenarioFile::from_json(&text, "inline").unwrap();
        let err = file.build(PrimeField::new(32003).unwrap(), file.window).unwrap_err();
        assert!(err.to_string().starts_with("f_prime[1]: unknown variable"), "{}", err);
    }

    #[test]
    fn presented_module() {
        let text = HYPERSURFACE.replace("\"n\": \"residue_field\"", "\"n\": {\"generators\": [0], \"relations\": [[\"x\"], [\"0\"]]}");
        let file = ScenarioFile::from_json(&text, "inline").unwrap();
        let s = file.build(PrimeField::new(32003).unwrap(), file.window).unwrap();
        // I = (x, y) is added: N = k
        assert_eq!(s.n_over_r().dim(0), 1);
        assert_eq!(s.n_over_r().dim(1), 0);
    }
}
