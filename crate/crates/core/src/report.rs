use std::fmt;

use crate::point::ExtendedPoint;

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub condition: String,
    pub witness: ExtendedPoint,
    pub description: String,
}

/// Outcome of a numerical validation; `ok()` holds exactly when no
/// violation was recorded.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn push(&mut self, condition: &str, witness: ExtendedPoint, description: impl Into<String>) {
        self.violations.push(Violation {
            condition: condition.to_string(),
            witness,
            description: description.into(),
        });
    }

    pub fn has(&self, condition: &str) -> bool {
        self.violations.iter().any(|v| v.condition == condition)
    }

    pub fn first(&self, condition: &str) -> Option<&Violation> {
        self.violations.iter().find(|v| v.condition == condition)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{} at {}: {}", v.condition, v.witness, v.description)?;
        }
        Ok(())
    }
}
