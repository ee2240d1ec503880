//! A counter that stays in machine words on the hot path and spills into a
//! big integer only when read or when the small part would overflow.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::Count;

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Tally {
    big: Count,
    small: u64,
}

impl Tally {
    pub fn new() -> Tally {
        Tally::default()
    }

    #[inline]
    pub fn incr(&mut self) {
        self.add_u64(1);
    }

    #[inline]
    pub fn add_u64(&mut self, n: u64) {
        match self.small.checked_add(n) {
            Some(s) => self.small = s,
            None => {
                self.big += self.small;
                self.small = n;
            }
        }
    }

    pub fn add(&mut self, n: &Count) {
        self.big += n;
    }

    pub fn value(&self) -> Count {
        &self.big + self.small
    }

    /// Folds the small part into the big one and returns the exact value.
    pub fn settle(&mut self) -> &Count {
        if self.small != 0 {
            self.big += self.small;
            self.small = 0;
        }
        &self.big
    }
}

impl From<Count> for Tally {
    fn from(big: Count) -> Tally {
        Tally { big, small: 0 }
    }
}

impl PartialEq for Tally {
    fn eq(&self, other: &Tally) -> bool {
        self.value() == other.value()
    }
}

impl Eq for Tally {}

impl fmt::Display for Tally {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}
