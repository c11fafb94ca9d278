//! JSON dump of a trained model.

use serde::{Deserialize, Serialize};

use super::model::{Layout, PhonoLm};
use super::{LmError, Vocabulary};
use crate::Scalar;

const FORMAT: &str = "phonolm-v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamGroup {
    pub name: String,
    /// Row-major values.
    pub data: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDump {
    pub format: String,
    /// Vocabulary in id order, boundary markers first.
    pub symbols: Vec<String>,
    pub embedding_dim: usize,
    pub hidden_dim: usize,
    pub layers: usize,
    pub groups: Vec<ParamGroup>,
}

impl ModelDump {
    pub fn from_model<T: Scalar>(model: &PhonoLm<T>) -> Self {
        Self {
            format: FORMAT.to_string(),
            symbols: model.vocab.symbols().to_vec(),
            embedding_dim: model.layout.embed,
            hidden_dim: model.layout.hidden,
            layers: model.layout.lstm.len(),
            groups: model
                .layout
                .groups()
                .into_iter()
                .map(|(name, r)| ParamGroup {
                    name,
                    data: model.params[r].iter().map(|p| p.f64()).collect(),
                })
                .collect(),
        }
    }

    pub fn into_model<T: Scalar>(self) -> Result<PhonoLm<T>, LmError> {
        if self.format != FORMAT {
            return Err(LmError::Dump(format!("unknown format `{}`", self.format)));
        }
        if self.symbols.len() < 3 || self.embedding_dim == 0 || self.hidden_dim == 0 || self.layers == 0 {
            return Err(LmError::Dump("empty vocabulary or zero dimension".into()));
        }
        let vocab = Vocabulary::from_symbols(self.symbols);
        let layout = Layout::new(vocab.len(), self.embedding_dim, self.hidden_dim, self.layers);
        let expected = layout.groups();
        if expected.len() != self.groups.len() {
            return Err(LmError::Dump(format!(
                "expected {} parameter groups, found {}",
                expected.len(),
                self.groups.len()
            )));
        }
        let mut params = vec![T::zero(); layout.total];
        for ((name, range), group) in expected.into_iter().zip(self.groups) {
            if name != group.name || range.len() != group.data.len() {
                return Err(LmError::Dump(format!(
                    "group `{}` has {} values, expected `{name}` with {}",
                    group.name,
                    group.data.len(),
                    range.len()
                )));
            }
            for (p, v) in params[range].iter_mut().zip(group.data) {
                if !v.is_finite() {
                    return Err(LmError::Dump(format!("non-finite value in `{name}`")));
                }
                *p = T::of(v);
            }
        }
        Ok(PhonoLm {
            vocab,
            layout,
            params,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("dump serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, LmError> {
        serde_json::from_str(text).map_err(|e| LmError::Dump(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phonolm::ModelConfig;

    #[test]
    fn round_trip_is_exact() {
        let vocab = Vocabulary::new(["a", "b", "tʰ"]).unwrap();
        let config = ModelConfig::<f64> {
            embedding_dim: 3,
            hidden_dim: 4,
            layers: 2,
            seed: 5,
            ..Default::default()
        };
        let model = PhonoLm::init(vocab, &config).unwrap();
        let json = ModelDump::from_model(&model).to_json();
        let back: PhonoLm<f64> = ModelDump::from_json(&json).unwrap().into_model().unwrap();
        assert_eq!(back, model);
    }

    #[test]
    fn corrupt_dumps_are_rejected() {
        let vocab = Vocabulary::new(["a"]).unwrap();
        let model = PhonoLm::<f64>::init(vocab, &ModelConfig::default()).unwrap();
        let mut dump = ModelDump::from_model(&model);
        dump.groups[0].data.pop();
        assert!(matches!(dump.into_model::<f64>(), Err(LmError::Dump(_))));
        assert!(ModelDump::from_json("{").is_err());
    }
}
