use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// The closed set of recognised gestures. Declaration order is the
/// tie-break order for every classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GestureLabel {
    Punch,
    Punchx2,
    Kick,
    Strike,
    Drag,
    Dodge,
    Push,
    Pull,
}

impl GestureLabel {
    pub const ALL: [GestureLabel; 8] = [
        GestureLabel::Punch,
        GestureLabel::Punchx2,
        GestureLabel::Kick,
        GestureLabel::Strike,
        GestureLabel::Drag,
        GestureLabel::Dodge,
        GestureLabel::Push,
        GestureLabel::Pull,
    ];

    pub const COUNT: usize = 8;

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GestureLabel::Punch => "punch",
            GestureLabel::Punchx2 => "punchx2",
            GestureLabel::Kick => "kick",
            GestureLabel::Strike => "strike",
            GestureLabel::Drag => "drag",
            GestureLabel::Dodge => "dodge",
            GestureLabel::Push => "push",
            GestureLabel::Pull => "pull",
        }
    }
}

impl fmt::Display for GestureLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GestureLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .copied()
            .find(|l| l.as_str() == s.trim())
            .ok_or_else(|| Error::invalid(format!("unknown gesture label '{s}'")))
    }
}
