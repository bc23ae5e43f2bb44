//! JSON document holding a chain and its partition:
//!
//! ```json
//! {"states": ["a","b","c"],
//!  "transitions": [[0,0.5,0.5],[0.5,0,0.5],[0,0,1]],
//!  "partition": {"A":["a"],"B":["b"],"C":["c"]}}
//! ```
//!
//! Numbers are written in shortest round-trip form, so a write/read cycle is
//! lossless.

use serde::{Deserialize, Serialize};

use crate::chain::{build_partition, Chain, Class, Partition};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionDocument {
    #[serde(rename = "A")]
    pub a: Vec<String>,
    #[serde(rename = "B", default)]
    pub b: Vec<String>,
    #[serde(rename = "C")]
    pub c: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainDocument {
    pub states: Vec<String>,
    pub transitions: Vec<Vec<f64>>,
    pub partition: PartitionDocument,
}

impl ChainDocument {
    pub fn from_parts(chain: &Chain, partition: &Partition) -> Self {
        let labels = |class| {
            partition
                .set(class)
                .iter()
                .map(|s| chain.label(s).to_string())
                .collect()
        };
        Self {
            states: chain.labels().to_vec(),
            transitions: chain.to_dense(),
            partition: PartitionDocument {
                a: labels(Class::A),
                b: labels(Class::B),
                c: labels(Class::C),
            },
        }
    }

    /// Validates the document with the same rules as
    /// [`build_chain`](crate::chain::build_chain) and
    /// [`build_partition`](crate::chain::build_partition).
    pub fn into_parts(self) -> Result<(Chain, Partition)> {
        let chain = Chain::from_dense(self.states, &self.transitions)?;
        let PartitionDocument { a, b, c } = self.partition;
        let assignment = a
            .into_iter()
            .map(|s| (s, Class::A))
            .chain(b.into_iter().map(|s| (s, Class::B)))
            .chain(c.into_iter().map(|s| (s, Class::C)));
        let partition = build_partition(&chain, assignment)?;
        Ok((chain, partition))
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("document serializes")
    }
}

/// Parses and validates a document in one step.
pub fn load(text: &str) -> Result<(Chain, Partition)> {
    ChainDocument::parse(text)?.into_parts()
}

/// Serializes a chain and partition.
pub fn save(chain: &Chain, partition: &Partition) -> String {
    ChainDocument::from_parts(chain, partition).to_json()
}
