use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::element::ElementState;
use crate::error::{Error, Result};

/// Per-element 1-bit states for an M-element surface.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SurfaceConfiguration {
    states: Vec<ElementState>,
}

impl SurfaceConfiguration {
    pub fn new(states: Vec<ElementState>) -> Self {
        Self { states }
    }

    pub fn uniform(len: usize, state: ElementState) -> Self {
        Self {
            states: vec![state; len],
        }
    }

    /// Configuration whose bit `m` is bit `m` of `bits` (1 = ON).
    pub fn from_index(len: usize, bits: u64) -> Self {
        Self {
            states: (0..len)
                .map(|m| {
                    if bits >> m & 1 == 1 {
                        ElementState::On
                    } else {
                        ElementState::Off
                    }
                })
                .collect(),
        }
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        Self {
            states: (0..len)
                .map(|_| {
                    if rng.random_bool(0.5) {
                        ElementState::On
                    } else {
                        ElementState::Off
                    }
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[ElementState] {
        &self.states
    }

    pub fn get(&self, m: usize) -> Option<ElementState> {
        self.states.get(m).copied()
    }

    pub(crate) fn expect_len(&self, m: usize) -> Result<()> {
        if self.states.len() != m {
            return Err(Error::Config(format!(
                "configuration has {} elements, surface has {m}",
                self.states.len()
            )));
        }
        Ok(())
    }
}

/// Renders as a bit string, element 0 first.
impl fmt::Display for SurfaceConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.states {
            write!(f, "{}", s.bit())?;
        }
        Ok(())
    }
}

impl FromStr for SurfaceConfiguration {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .filter(|c| !c.is_whitespace() && *c != '_')
            .map(|c| match c {
                '1' => Ok(ElementState::On),
                '0' => Ok(ElementState::Off),
                other => Err(Error::Config(format!(
                    "configuration bits must be 0 or 1, found '{other}'"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }
}
