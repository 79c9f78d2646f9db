use std::fmt;

use serde::{Deserialize, Serialize};

/// Families of defects found in generated analysis scripts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ErrorCategory {
    ElementDefinition,
    NodeDefinition,
    SupportConditions,
    MaterialProperties,
    LoadApplication,
    GeometryTopology,
    Other,
}

impl ErrorCategory {
    pub const ALL: [ErrorCategory; 7] = [
        ErrorCategory::ElementDefinition,
        ErrorCategory::NodeDefinition,
        ErrorCategory::SupportConditions,
        ErrorCategory::MaterialProperties,
        ErrorCategory::LoadApplication,
        ErrorCategory::GeometryTopology,
        ErrorCategory::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCategory::ElementDefinition => "element definition",
            ErrorCategory::NodeDefinition => "node definition",
            ErrorCategory::SupportConditions => "support conditions",
            ErrorCategory::MaterialProperties => "material properties",
            ErrorCategory::LoadApplication => "load application",
            ErrorCategory::GeometryTopology => "geometry topology",
            ErrorCategory::Other => "other",
        }
    }
}

impl fmt::Display for ErrorCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}
