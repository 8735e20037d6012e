use std::fmt;
use std::str::FromStr;

use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use crate::dataset::ScoredDataset;
use crate::error::NucsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Nucs,
    NucsO,
    Random,
    El2nHard,
    Moderate,
    Ccs,
    Bws,
    CcsCp,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Nucs,
        Method::NucsO,
        Method::Random,
        Method::El2nHard,
        Method::Moderate,
        Method::Ccs,
        Method::Bws,
        Method::CcsCp,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Nucs => "nucs",
            Method::NucsO => "nucs-o",
            Method::Random => "random",
            Method::El2nHard => "el2n-hard",
            Method::Moderate => "moderate",
            Method::Ccs => "ccs",
            Method::Bws => "bws",
            Method::CcsCp => "ccs-cp",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = NucsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| NucsError::param("method", format!("unknown method `{s}`")))
    }
}

/// Parameters a selection was produced with. Unused fields stay `None`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SelectionParams {
    pub alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// A chosen subset of a [`ScoredDataset`] plus how it was produced.
#[derive(Debug, Clone, PartialEq)]
pub struct CoresetSelection {
    /// Sample indices into the source dataset, in selection order.
    pub indices: Vec<usize>,
    pub selected_ids: Vec<String>,
    pub method: Method,
    pub params: SelectionParams,
    /// Selected count per class index.
    pub per_class_counts: Vec<usize>,
}

impl CoresetSelection {
    pub fn from_indices(
        ds: &ScoredDataset,
        indices: Vec<usize>,
        method: Method,
        params: SelectionParams,
    ) -> Self {
        let mut per_class_counts = vec![0; ds.num_classes()];
        for &i in &indices {
            per_class_counts[ds.labels()[i]] += 1;
        }
        let selected_ids = indices.iter().map(|&i| ds.ids()[i].clone()).collect();
        Self {
            indices,
            selected_ids,
            method,
            params,
            per_class_counts,
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    #[cfg(test)]
    pub(crate) fn for_test(ids: Vec<String>) -> Self {
        Self {
            indices: (0..ids.len()).collect(),
            selected_ids: ids,
            method: Method::Random,
            params: SelectionParams::default(),
            per_class_counts: vec![],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassRow {
    pub class: usize,
    pub label: String,
    pub count: usize,
    pub difficulty: f64,
    pub budget: usize,
}

/// Proxy accuracy per window endpoint, ascending in k. Serialized as a JSON
/// object keyed by the decimal endpoint.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProxyScores(pub Vec<(f64, f64)>);

impl Serialize for ProxyScores {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (k, acc) in &self.0 {
            map.serialize_entry(&format!("{k}"), acc)?;
        }
        map.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasMetrics {
    /// Worst-class recall.
    pub wca: f64,
    /// Max minus min per-class recall.
    pub diff: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub class_table: Vec<ClassRow>,
    pub chosen_k: Option<f64>,
    pub proxy_scores: ProxyScores,
    pub metrics: Option<BiasMetrics>,
    pub params: serde_json::Value,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names_roundtrip() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        assert!("d2".parse::<Method>().is_err());
    }

    #[test]
    fn proxy_scores_serialize_in_order() {
        let p = ProxyScores(vec![(0.0, 0.5), (0.5, 0.75), (1.0, 0.25)]);
        assert_eq!(
            serde_json::to_string(&p).unwrap(),
            r#"{"0":0.5,"0.5":0.75,"1":0.25}"#
        );
    }
}
