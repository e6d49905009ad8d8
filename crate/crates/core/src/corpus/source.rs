use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Where a sentence was drawn from. Fifteen canonical resources plus `Other`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Source {
    Cochrane,
    Elife,
    Msd,
    Wiki,
    Pnas,
    NihrPhr,
    NihrHta,
    NihrEme,
    NihrPgfar,
    NihrHsdr,
    PlosBiology,
    PlosGenetics,
    PlosPathogens,
    PlosCompbio,
    PlosNtd,
    Other,
}

impl Source {
    pub const ALL: [Source; 16] = [
        Source::Cochrane,
        Source::Elife,
        Source::Msd,
        Source::Wiki,
        Source::Pnas,
        Source::NihrPhr,
        Source::NihrHta,
        Source::NihrEme,
        Source::NihrPgfar,
        Source::NihrHsdr,
        Source::PlosBiology,
        Source::PlosGenetics,
        Source::PlosPathogens,
        Source::PlosCompbio,
        Source::PlosNtd,
        Source::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Source::Cochrane => "cochrane",
            Source::Elife => "elife",
            Source::Msd => "msd",
            Source::Wiki => "wiki",
            Source::Pnas => "pnas",
            Source::NihrPhr => "nihr-phr",
            Source::NihrHta => "nihr-hta",
            Source::NihrEme => "nihr-eme",
            Source::NihrPgfar => "nihr-pgfar",
            Source::NihrHsdr => "nihr-hsdr",
            Source::PlosBiology => "plos-biology",
            Source::PlosGenetics => "plos-genetics",
            Source::PlosPathogens => "plos-pathogens",
            Source::PlosCompbio => "plos-compbio",
            Source::PlosNtd => "plos-ntd",
            Source::Other => "other",
        }
    }

    /// Reporting group: the five NIHR journals and the five PLOS journals are
    /// pooled into one series each.
    pub fn report_group(self) -> &'static str {
        match self {
            Source::Cochrane => "Cochrane",
            Source::Elife => "eLife",
            Source::Msd => "MSD",
            Source::Wiki => "Wiki",
            Source::Pnas => "PNAS",
            Source::NihrPhr
            | Source::NihrHta
            | Source::NihrEme
            | Source::NihrPgfar
            | Source::NihrHsdr => "NIHR Series",
            Source::PlosBiology
            | Source::PlosGenetics
            | Source::PlosPathogens
            | Source::PlosCompbio
            | Source::PlosNtd => "PLOS Series",
            Source::Other => "Other",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Source {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Source::ALL
            .iter()
            .copied()
            .find(|src| src.as_str() == s)
            .ok_or_else(|| Error::UnknownSource(s.to_string()))
    }
}

impl TryFrom<String> for Source {
    type Error = Error;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl From<Source> for String {
    fn from(value: Source) -> Self {
        value.as_str().to_string()
    }
}
