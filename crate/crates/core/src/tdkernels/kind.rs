use std::fmt;

use serde::{Deserialize, Serialize};

/// Which boundary trace of a potential with a jump.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Trace {
    /// from the exterior domain, the side the normal points into
    Plus,
    /// from the interior domain
    Minus,
    /// mean of the two traces (the principal-value integral)
    Average,
}

/// Retarded layer potentials.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PotentialKind {
    S,
    SDot,
    D(Trace),
    DT(Trace),
    DDot,
    N,
    M,
}

impl PotentialKind {
    /// Coefficient of the identity that the trace adds at lag 0.
    pub fn jump(&self) -> f64 {
        match self {
            PotentialKind::D(Trace::Plus) => 0.5,
            PotentialKind::D(Trace::Minus) => -0.5,
            PotentialKind::DT(Trace::Plus) => -0.5,
            PotentialKind::DT(Trace::Minus) => 0.5,
            _ => 0.0,
        }
    }

    /// The same potential with the jump removed.
    pub fn averaged(&self) -> PotentialKind {
        match self {
            PotentialKind::D(_) => PotentialKind::D(Trace::Average),
            PotentialKind::DT(_) => PotentialKind::DT(Trace::Average),
            k => *k,
        }
    }

    /// Stable short tag used in cache keys and file names.
    pub fn tag(&self) -> &'static str {
        match self {
            PotentialKind::S => "S",
            PotentialKind::SDot => "SDOT",
            PotentialKind::D(Trace::Plus) => "D+",
            PotentialKind::D(Trace::Minus) => "D-",
            PotentialKind::D(Trace::Average) => "D",
            PotentialKind::DT(Trace::Plus) => "DT+",
            PotentialKind::DT(Trace::Minus) => "DT-",
            PotentialKind::DT(Trace::Average) => "DT",
            PotentialKind::DDot => "DDOT",
            PotentialKind::N => "N",
            PotentialKind::M => "M",
        }
    }
}

impl fmt::Display for PotentialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}
