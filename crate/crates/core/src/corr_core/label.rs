use serde::{Deserialize, Serialize};

/// Identifier of the distinguished identity field.
pub const IDENTITY: &str = "1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

/// A field label `A` with its scaling dimension `[A]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Label {
    pub id: String,
    pub dim: f64,
    pub parity: Parity,
}

impl Label {
    pub fn new(id: impl Into<String>, dim: f64, parity: Parity) -> Self {
        Label {
            id: id.into(),
            dim,
            parity,
        }
    }

    /// The identity label, of dimension exactly zero.
    pub fn identity() -> Self {
        Label::new(IDENTITY, 0.0, Parity::Even)
    }

    pub fn is_identity(&self) -> bool {
        self.id == IDENTITY
    }
}
