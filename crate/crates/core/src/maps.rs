//! Map files: `{"type":"iet",...}` or `{"type":"pc",...}`.

use serde::{Deserialize, Serialize};

use crate::iet::IetSpec;
use crate::pc::PcSpec;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum MapFile {
    Iet(IetSpec),
    Pc(PcSpec),
}

impl MapFile {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("map files serialize")
    }
}
