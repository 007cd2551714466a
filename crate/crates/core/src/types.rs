use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Target languages supported by the labeling stages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Language {
    Es,
    Cs,
    Is,
}

impl Language {
    pub fn code(self) -> &'static str {
        match self {
            Language::Es => "es",
            Language::Cs => "cs",
            Language::Is => "is",
        }
    }

    pub const ALL: [Language; 3] = [Language::Es, Language::Cs, Language::Is];
}

impl FromStr for Language {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "es" | "spanish" => Ok(Language::Es),
            "cs" | "cz" | "czech" => Ok(Language::Cs),
            "is" | "icelandic" => Ok(Language::Is),
            other => Err(format!("unknown language `{other}` (expected es, cs or is)")),
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// A binary natural gender, used for true genders, stereotypes and
/// known-speaker conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BinaryGender {
    M,
    F,
}

impl BinaryGender {
    pub fn opposite(self) -> BinaryGender {
        match self {
            BinaryGender::M => BinaryGender::F,
            BinaryGender::F => BinaryGender::M,
        }
    }

    pub fn letter(self) -> &'static str {
        match self {
            BinaryGender::M => "M",
            BinaryGender::F => "F",
        }
    }
}

impl fmt::Display for BinaryGender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.letter())
    }
}

/// The final gender label assigned to one extracted translation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GenderLabel {
    M,
    F,
    N,
    #[serde(rename = "UNCLASSIFIED")]
    Unclassified,
}

impl GenderLabel {
    pub fn as_binary(self) -> Option<BinaryGender> {
        match self {
            GenderLabel::M => Some(BinaryGender::M),
            GenderLabel::F => Some(BinaryGender::F),
            _ => None,
        }
    }
}
