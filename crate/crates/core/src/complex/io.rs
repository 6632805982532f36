use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::SimplicialComplex;
use crate::error::{Error, Result};

/// On-disk JSON shape of a complex.
///
/// `weights` is keyed by the ascending vertex list joined with commas, e.g.
/// `"0,2"`; simplices without a key have weight 1.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ComplexFile {
    pub simplices: Vec<Vec<usize>>,
    #[serde(default)]
    pub weights: BTreeMap<String, f64>,
}

fn weight_key(simplex: &[usize]) -> String {
    simplex.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

fn parse_key(key: &str) -> Result<Vec<usize>> {
    key.split(',')
        .map(|part| part.trim().parse::<usize>().map_err(|_| Error::Parse(format!("bad weight key '{key}'"))))
        .collect()
}

impl From<&SimplicialComplex> for ComplexFile {
    fn from(x: &SimplicialComplex) -> Self {
        let mut file = ComplexFile::default();
        for d in 0..=x.max_dim() {
            for (s, &w) in x.simplices(d).iter().zip(x.weights(d)) {
                file.simplices.push(s.clone());
                if w != 1.0 {
                    file.weights.insert(weight_key(s), w);
                }
            }
        }
        file
    }
}

impl TryFrom<ComplexFile> for SimplicialComplex {
    type Error = Error;

    fn try_from(file: ComplexFile) -> Result<Self> {
        let weights = file.weights.iter().map(|(k, &w)| Ok((parse_key(k)?, w))).collect::<Result<HashMap<_, _>>>()?;
        SimplicialComplex::build(&file.simplices, Some(&weights))
    }
}

impl SimplicialComplex {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ComplexFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ComplexFile = serde_json::from_str(text)?;
        file.try_into()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}
