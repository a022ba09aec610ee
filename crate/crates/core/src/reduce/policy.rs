//! Move-selection policies.
//!
//! Every stage keeps its pending candidates in a [`Worklist`]; the policy
//! decides which candidate is taken next. Outcomes are meant to be
//! independent of that choice, which is what the confluence tests exercise.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// How the engine picks the next move among several candidates.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Policy {
    /// Always take the candidate with the smallest id.
    #[default]
    SmallestIdFirst,
    /// Take candidates in an order drawn from a seeded generator.
    Seeded(u64),
}

impl std::str::FromStr for Policy {
    type Err = String;

    /// Accepts `smallest` or `seed=N`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "smallest" {
            return Ok(Policy::SmallestIdFirst);
        }
        match s.strip_prefix("seed=") {
            Some(n) => n
                .parse()
                .map(Policy::Seeded)
                .map_err(|_| format!("bad seed `{n}`")),
            None => Err(format!(
                "unknown policy `{s}` (expected `smallest` or `seed=N`)"
            )),
        }
    }
}

pub(crate) struct Chooser {
    rng: Option<ChaCha8Rng>,
}

impl Chooser {
    pub(crate) fn new(policy: &Policy) -> Self {
        Chooser {
            rng: match policy {
                Policy::SmallestIdFirst => None,
                Policy::Seeded(seed) => Some(ChaCha8Rng::seed_from_u64(*seed)),
            },
        }
    }

    pub(crate) fn worklist<T: Ord + Clone>(
        &self,
        items: impl IntoIterator<Item = T>,
    ) -> Worklist<T> {
        if self.rng.is_some() {
            let mut v: Vec<T> = items.into_iter().collect();
            v.sort();
            v.dedup();
            Worklist::Random(v)
        } else {
            Worklist::Ordered(items.into_iter().collect())
        }
    }

    pub(crate) fn pop<T: Ord + Clone>(&mut self, list: &mut Worklist<T>) -> Option<T> {
        match list {
            Worklist::Ordered(set) => set.pop_first(),
            Worklist::Random(v) => {
                if v.is_empty() {
                    return None;
                }
                let rng = self
                    .rng
                    .as_mut()
                    .expect("random worklists need a generator");
                let i = rng.gen_range(0..v.len());
                Some(v.swap_remove(i))
            }
        }
    }
}

pub(crate) enum Worklist<T> {
    Ordered(BTreeSet<T>),
    Random(Vec<T>),
}
