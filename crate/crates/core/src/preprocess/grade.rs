use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// IMD low-pressure-system grade by maximum sustained surface wind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Grade {
    LowPressure,
    Depression,
    DeepDepression,
    CyclonicStorm,
    SevereCyclonicStorm,
    VerySevereCyclonicStorm,
    ExtremelySevereCyclonicStorm,
    SuperCyclonicStorm,
}

/// Lower MSWS bound in knots of each grade above LP.
const LOWER_BOUNDS: [f64; 7] = [17.0, 28.0, 34.0, 48.0, 64.0, 90.0, 120.0];

const ALL: [Grade; 8] = [
    Grade::LowPressure,
    Grade::Depression,
    Grade::DeepDepression,
    Grade::CyclonicStorm,
    Grade::SevereCyclonicStorm,
    Grade::VerySevereCyclonicStorm,
    Grade::ExtremelySevereCyclonicStorm,
    Grade::SuperCyclonicStorm,
];

impl Grade {
    pub fn number(self) -> u8 {
        self as u8
    }

    pub fn label(self) -> &'static str {
        match self {
            Grade::LowPressure => "LP",
            Grade::Depression => "D",
            Grade::DeepDepression => "DD",
            Grade::CyclonicStorm => "CS",
            Grade::SevereCyclonicStorm => "SCS",
            Grade::VerySevereCyclonicStorm => "VSCS",
            Grade::ExtremelySevereCyclonicStorm => "ESCS",
            Grade::SuperCyclonicStorm => "SS",
        }
    }

    pub fn from_number(n: u8) -> Option<Grade> {
        ALL.get(n as usize).copied()
    }

    pub fn from_label(label: &str) -> Option<Grade> {
        ALL.into_iter().find(|g| g.label() == label)
    }
}

impl fmt::Display for Grade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.label(), self.number())
    }
}

/// Grades a wind speed using half-open bands `[lower, next_lower)`.
pub fn grade_of(msws: f64) -> Result<Grade> {
    if !msws.is_finite() || msws < 0.0 {
        return Err(Error::invalid(alloc::format!("msws {msws} must be a non-negative number")));
    }
    let idx = LOWER_BOUNDS.iter().take_while(|&&b| msws >= b).count();
    Ok(ALL[idx])
}
