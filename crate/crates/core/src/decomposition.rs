//! The `ρ`/`r` sequences, basic decompositions of the three procedures, and
//! the pattern-count recurrences.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::labels::TransformedLabel;
use crate::patterns::cost::cloudberry_cost;
use crate::patterns::PatternDescriptor;
use crate::Count;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecompositionError {
    #[error("{0} is not a power of two")]
    NotPowerOfTwo(u64),
    #[error("PushPattern({i}, {d}) needs i < d")]
    PushOrder { i: u64, d: u64 },
}

fn check_pow2(i: u64) -> Result<(), DecompositionError> {
    if i.is_power_of_two() {
        Ok(())
    } else {
        Err(DecompositionError::NotPowerOfTwo(i))
    }
}

fn rho_unchecked(i: u64) -> Count {
    if i == 1 {
        return Count::from(1u32);
    }
    let h = Count::from(i / 2);
    let i_big = Count::from(i);
    r_unchecked(i / 2) + (&h * 3u32) * (&h * (&i_big * (&h + 1u32) + 1u32) + 1u32)
}

fn r_unchecked(i: u64) -> Count {
    rho_unchecked(i) + Count::from(i) * 3u32
}

pub fn rho(i: u64) -> Result<Count, DecompositionError> {
    check_pow2(i)?;
    Ok(rho_unchecked(i))
}

pub fn r(i: u64) -> Result<Count, DecompositionError> {
    check_pow2(i)?;
    Ok(r_unchecked(i))
}

fn small(c: Count) -> u64 {
    c.to_u64().expect("radius beyond u64")
}

/// `ρ(i)` as a machine integer, for powers of two small enough to simulate.
pub(crate) fn rho_u64(i: u64) -> u64 {
    small(rho_unchecked(i))
}

pub(crate) fn r_u64(i: u64) -> u64 {
    small(r_unchecked(i))
}

/// Steps per bit inside `Assumption(d)`: `j = 0 ..= 2d(d+1)`.
pub fn steps_per_bit(d: u64) -> u64 {
    2 * d * (d + 1) + 1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Call {
    Assumption(u64),
    Harvest(u64),
    PushPattern(u64, u64),
}

impl fmt::Display for Call {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Call::Assumption(d) => write!(f, "Assumption({d})"),
            Call::Harvest(d) => write!(f, "Harvest({d})"),
            Call::PushPattern(i, d) => write!(f, "PushPattern({i},{d})"),
        }
    }
}

impl FromStr for Call {
    type Err = String;

    /// Parses `Assumption(d)`, `Harvest(d)` or `PushPattern(i,d)`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("malformed call `{s}`; expected e.g. Assumption(2), Harvest(4) or PushPattern(1,4)");
        let s = s.trim();
        let open = s.find('(').ok_or_else(bad)?;
        let inner = s[open + 1..].strip_suffix(')').ok_or_else(bad)?;
        let args = inner
            .split(',')
            .map(|a| a.trim().parse::<u64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>, _>>()?;
        match (&s[..open], args.as_slice()) {
            ("Assumption", [d]) => Ok(Call::Assumption(*d)),
            ("Harvest", [d]) => Ok(Call::Harvest(*d)),
            ("PushPattern", [i, d]) => Ok(Call::PushPattern(*i, *d)),
            _ => Err(bad()),
        }
    }
}

impl Call {
    fn validate(self) -> Result<(), DecompositionError> {
        match self {
            Call::Assumption(d) | Call::Harvest(d) => check_pow2(d),
            Call::PushPattern(i, d) => {
                check_pow2(i)?;
                check_pow2(d)?;
                if i >= d {
                    return Err(DecompositionError::PushOrder { i, d });
                }
                Ok(())
            }
        }
    }

    /// Number of label bits the decomposition can depend on.
    fn bits_read(self) -> usize {
        match self {
            Call::Assumption(d) => d as usize,
            Call::Harvest(d) => (d / 2) as usize,
            Call::PushPattern(i, _) => i as usize,
        }
    }
}

/// Image of one element of `bd(Assumption(i))` under `PushPattern(i, d)`.
pub fn push_image(p: &PatternDescriptor, d: u64) -> PatternDescriptor {
    match *p {
        PatternDescriptor::RepeatSeed(x, _) | PatternDescriptor::Seed(x) => PatternDescriptor::Berry(x, d),
        PatternDescriptor::Berry(x, y) | PatternDescriptor::Cloudberry(x, y, _, _) => {
            PatternDescriptor::RepeatSeed(d + x + 2 * y, cloudberry_cost(x, y, y))
        }
    }
}

/// Branch pattern of step `j` at the given radius.
pub fn branch_descriptor(bit: bool, radius: u64, d: u64, j: u64) -> PatternDescriptor {
    if bit {
        PatternDescriptor::Cloudberry(radius, d, d, j)
    } else {
        PatternDescriptor::Berry(radius, d)
    }
}

/// Synchronization pattern following the branch of step `j` at `radius`.
pub fn sync_descriptor(radius: u64, d: u64) -> PatternDescriptor {
    PatternDescriptor::RepeatSeed(radius + 3 * d, cloudberry_cost(radius, d, d))
}

type Memo = Mutex<HashMap<(Call, Vec<bool>), Arc<Vec<PatternDescriptor>>>>;

fn memo() -> &'static Memo {
    static MEMO: OnceLock<Memo> = OnceLock::new();
    MEMO.get_or_init(Default::default)
}

/// The ordered basic-pattern calls issued by `call` for an agent with this
/// transformed label. Memoized per call and relevant label prefix.
pub fn bd(call: Call, label: &TransformedLabel) -> Result<Arc<Vec<PatternDescriptor>>, DecompositionError> {
    call.validate()?;
    let key = (call, label.padded_prefix(call.bits_read()));
    if let Some(hit) = memo().lock().expect("memo poisoned").get(&key) {
        return Ok(hit.clone());
    }
    let out = Arc::new(build(call, label)?);
    memo().lock().expect("memo poisoned").insert(key, out.clone());
    Ok(out)
}

fn build(call: Call, label: &TransformedLabel) -> Result<Vec<PatternDescriptor>, DecompositionError> {
    let mut out = Vec::new();
    match call {
        Call::Assumption(d) => {
            out.extend(bd(Call::Harvest(d), label)?.iter().cloned());
            let mut radius = r_u64(d);
            for i in 1..=d {
                for j in 0..steps_per_bit(d) {
                    out.push(branch_descriptor(label.bit_at(i), radius, d, j));
                    out.push(sync_descriptor(radius, d));
                    radius += 3 * d;
                }
            }
        }
        Call::Harvest(d) => {
            let mut i = 1;
            while i < d {
                out.extend(bd(Call::PushPattern(i, d), label)?.iter().cloned());
                i *= 2;
            }
            let rho = rho_u64(d);
            out.push(PatternDescriptor::Cloudberry(rho, d, d, 0));
            out.push(PatternDescriptor::RepeatSeed(r_u64(d), cloudberry_cost(rho, d, d)));
        }
        Call::PushPattern(i, d) => {
            out.extend(bd(Call::Assumption(i), label)?.iter().map(|p| push_image(p, d)));
        }
    }
    Ok(out)
}

/// `L₁(i)`: number of basic patterns in `bd(Assumption(i))`.
pub fn l1_count(i: u64) -> Result<Count, DecompositionError> {
    check_pow2(i)?;
    let i_big = Count::from(i);
    Ok(l2_count(i)? + &i_big * 2u32 * (&i_big * 2u32 * (&i_big + 1u32) + 1u32))
}

/// `L₂(i)`: number of basic patterns in `bd(Harvest(i))`.
pub fn l2_count(i: u64) -> Result<Count, DecompositionError> {
    check_pow2(i)?;
    let mut total = Count::from(2u32);
    let mut j = 1;
    while j < i {
        total += l1_count(j)?;
        j *= 2;
    }
    Ok(total)
}

/// Largest first parameter over `bd(Assumption(d))`.
pub fn max_first_param(d: u64) -> Result<u64, DecompositionError> {
    check_pow2(d)?;
    // The decomposition's first parameters do not depend on the label.
    let label = crate::labels::transform(0);
    Ok(bd(Call::Assumption(d), &label)?
        .iter()
        .map(PatternDescriptor::first_param)
        .max()
        .expect("non-empty decomposition"))
}

/// Smallest power of two at least `max(distance, first_diff)`: the phase in
/// which rendezvous is guaranteed.
pub fn good_assumption(distance: u64, first_diff: u64) -> u64 {
    distance.max(first_diff).max(1).next_power_of_two()
}

/// Total cost of every phase up to and including `Assumption(d1)`.
pub fn cumulative_cost(d1: u64, label: &TransformedLabel) -> Result<Count, DecompositionError> {
    check_pow2(d1)?;
    let mut total = Count::default();
    let mut d = 1;
    while d <= d1 {
        for p in bd(Call::Assumption(d), label)?.iter() {
            total += p.cost();
        }
        d *= 2;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labels::transform;

    fn c(n: u64) -> Count {
        Count::from(n)
    }

    #[test]
    fn calls_parse() {
        for c in [Call::Assumption(2), Call::Harvest(4), Call::PushPattern(1, 4)] {
            assert_eq!(c.to_string().parse::<Call>().unwrap(), c);
        }
        assert!("Assumption(1,2)".parse::<Call>().is_err());
        assert!("Push(1)".parse::<Call>().is_err());
    }

    #[test]
    fn sequence_values() {
        assert_eq!(rho(1).unwrap(), c(1));
        assert_eq!(r(1).unwrap(), c(4));
        assert_eq!(rho(2).unwrap(), c(22));
        assert_eq!(r(2).unwrap(), c(28));
        // r(1) + 15 = ρ(2) − 3
        assert_eq!(r(1).unwrap() + 15u32, rho(2).unwrap() - 3u32);
        assert_eq!(rho(3), Err(DecompositionError::NotPowerOfTwo(3)));
        assert!(r(0).is_err());
    }

    /// Direct transcription of the recurrences with plain integers.
    fn rho_oracle(i: u128) -> u128 {
        if i == 1 {
            1
        } else {
            let h = i / 2;
            rho_oracle(h) + 3 * h + 3 * h * (h * (i * (h + 1) + 1) + 1)
        }
    }

    #[test]
    fn sequences_match_integer_oracle() {
        for k in 0..12 {
            let i = 1u64 << k;
            assert_eq!(rho(i).unwrap(), Count::from(rho_oracle(i as u128)));
            assert_eq!(r(i).unwrap(), Count::from(rho_oracle(i as u128) + 3 * i as u128));
        }
    }

    #[test]
    fn assumption_one_starts_with_harvest() {
        let b = bd(Call::Assumption(1), &transform(0)).unwrap();
        assert_eq!(b[0], PatternDescriptor::Cloudberry(1, 1, 1, 0));
        assert_eq!(b[1], PatternDescriptor::RepeatSeed(4, c(4516)));
        assert_eq!(b.len(), 12);
        assert_eq!(b.last().unwrap(), &PatternDescriptor::RepeatSeed(19, cloudberry_cost(16, 1, 1)));
        for label in 0..8 {
            assert_eq!(bd(Call::Assumption(1), &transform(label)).unwrap().len(), 12);
        }
    }

    #[test]
    fn push_pattern_is_label_independent() {
        let a = bd(Call::PushPattern(1, 2), &transform(0)).unwrap();
        let b = bd(Call::PushPattern(1, 2), &transform(5)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[0], PatternDescriptor::RepeatSeed(5, c(4516)));
        for label in 0..64 {
            assert_eq!(bd(Call::PushPattern(2, 4), &transform(label)).unwrap(), bd(Call::PushPattern(2, 4), &transform(0)).unwrap());
        }
    }

    #[test]
    fn counts_follow_recurrences() {
        assert_eq!(l2_count(1).unwrap(), c(2));
        assert_eq!(l1_count(1).unwrap(), c(12));
        assert_eq!(l2_count(2).unwrap(), c(14));
        assert_eq!(l1_count(2).unwrap(), c(66));
        for d in [1u64, 2, 4, 8] {
            for label in [0u64, 1, 2, 5, 1000] {
                let t = transform(label);
                assert_eq!(c(bd(Call::Assumption(d), &t).unwrap().len() as u64), l1_count(d).unwrap());
                assert_eq!(c(bd(Call::Harvest(d), &t).unwrap().len() as u64), l2_count(d).unwrap());
            }
        }
    }

    #[test]
    fn max_first_param_values() {
        assert_eq!(max_first_param(1).unwrap(), 19);
        for d in [1u64, 2, 4] {
            assert_eq!(c(max_first_param(d).unwrap()), rho(2 * d).unwrap() - 3 * d);
        }
        assert_eq!(max_first_param(2).unwrap(), 184);
        assert_eq!(max_first_param(4).unwrap(), 2170);
    }

    #[test]
    fn parameters_align_across_labels() {
        for d in [1u64, 2, 4] {
            let base = bd(Call::Assumption(d), &transform(0)).unwrap();
            for label in [1u64, 2, 3, 5, 77] {
                let other = bd(Call::Assumption(d), &transform(label)).unwrap();
                assert_eq!(base.len(), other.len());
                for (p, q) in base.iter().zip(other.iter()) {
                    assert_eq!(p.first_param(), q.first_param());
                    if p.kind() == q.kind() {
                        assert_eq!(p, q);
                    } else {
                        assert!(matches!(
                            (p, q),
                            (PatternDescriptor::Berry(..), PatternDescriptor::Cloudberry(..))
                                | (PatternDescriptor::Cloudberry(..), PatternDescriptor::Berry(..))
                        ));
                    }
                }
            }
            for p in base.iter().skip(bd(Call::Harvest(d), &transform(0)).unwrap().len()) {
                match *p {
                    PatternDescriptor::Berry(_, y) => assert_eq!(y, d),
                    PatternDescriptor::Cloudberry(_, y, z, _) => assert_eq!((y, z), (d, d)),
                    _ => {}
                }
            }
        }
    }

    #[test]
    fn push_reach_stays_below_bound() {
        for d1 in [1u64, 2, 4] {
            let mut d2 = d1 * 2;
            while d2 <= 8 {
                let m = bd(Call::PushPattern(d1, d2), &transform(3))
                    .unwrap()
                    .iter()
                    .map(PatternDescriptor::first_param)
                    .max()
                    .unwrap();
                assert!(m <= max_first_param(d1).unwrap() + 3 * d2, "d1 = {d1}, d2 = {d2}");
                d2 *= 2;
            }
        }
    }

    #[test]
    fn invalid_calls_rejected() {
        assert!(bd(Call::Assumption(3), &transform(0)).is_err());
        assert_eq!(
            bd(Call::PushPattern(2, 2), &transform(0)).unwrap_err(),
            DecompositionError::PushOrder { i: 2, d: 2 }
        );
    }

    #[test]
    fn good_assumption_values() {
        assert_eq!(good_assumption(1, 1), 1);
        assert_eq!(good_assumption(3, 1), 4);
        assert_eq!(good_assumption(2, 5), 8);
        assert_eq!(good_assumption(2, 4), 4);
    }
}
