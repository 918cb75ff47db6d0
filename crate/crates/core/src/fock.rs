//! Occupation-number states and the fixed-photon-number basis.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest total photon number handled anywhere in the crate.
pub const MAX_PHOTONS: usize = 64;

/// Photon counts per mode, e.g. `[1, 0, 2]`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OccupationState(Vec<usize>);

impl OccupationState {
    pub fn new(occupations: Vec<usize>) -> Result<Self> {
        let total = occupations
            .iter()
            .try_fold(0usize, |acc, &x| acc.checked_add(x))
            .ok_or(Error::TooManyPhotons(usize::MAX))?;
        if total > MAX_PHOTONS {
            return Err(Error::TooManyPhotons(total));
        }
        Ok(Self(occupations))
    }

    /// Vacuum on `modes` modes.
    pub fn zeros(modes: usize) -> Self {
        Self(vec![0; modes])
    }

    /// One photon on `mode`, vacuum elsewhere.
    pub fn single(modes: usize, mode: usize) -> Self {
        let mut v = vec![0; modes];
        v[mode] = 1;
        Self(v)
    }

    pub fn modes(&self) -> usize {
        self.0.len()
    }

    pub fn photons(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    /// Juxtaposition `a + b`: the modes of `self` followed by those of `other`.
    pub fn concat(&self, other: &OccupationState) -> OccupationState {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        OccupationState(v)
    }
}

impl std::ops::Index<usize> for OccupationState {
    type Output = usize;
    fn index(&self, i: usize) -> &usize {
        &self.0[i]
    }
}

impl fmt::Display for OccupationState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "]")
    }
}

impl FromStr for OccupationState {
    type Err = Error;

    /// Parses the JSON integer-array form, e.g. `"[1,0,2]"`.
    fn from_str(s: &str) -> Result<Self> {
        let v: Vec<usize> = serde_json::from_str(s)?;
        OccupationState::new(v)
    }
}

/// `binomial(m + n - 1, n)`: number of ways to place `n` photons in `m` modes.
pub fn basis_size(modes: usize, photons: usize) -> usize {
    if modes == 0 {
        return usize::from(photons == 0);
    }
    let mut acc: u128 = 1;
    // C(n+m-1, m-1) computed incrementally; each step stays integral.
    for k in 1..modes as u128 {
        acc = acc * (photons as u128 + k) / k;
    }
    usize::try_from(acc).unwrap_or(usize::MAX)
}

/// The basis of `Φ(m, n)` in canonical order.
///
/// Ordering is reverse-lexicographic with the first mode most significant,
/// so `(n, 0, ..., 0)` has index 0 and `(0, ..., 0, n)` is last.
#[derive(Clone, Debug)]
pub struct FockBasis {
    modes: usize,
    photons: usize,
    states: Vec<OccupationState>,
    index: HashMap<OccupationState, usize>,
}

impl FockBasis {
    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn photons(&self) -> usize {
        self.photons
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[OccupationState] {
        &self.states
    }

    pub fn state_at(&self, k: usize) -> &OccupationState {
        &self.states[k]
    }

    pub fn index_of(&self, s: &OccupationState) -> Result<usize> {
        if s.modes() != self.modes {
            return Err(Error::DimensionMismatch {
                what: "occupation state modes",
                expected: self.modes,
                found: s.modes(),
            });
        }
        if s.photons() != self.photons {
            return Err(Error::PhotonMismatch {
                input: self.photons,
                output: s.photons(),
            });
        }
        Ok(self.index[s])
    }

    pub fn iter(&self) -> impl Iterator<Item = &OccupationState> {
        self.states.iter()
    }
}

pub fn enumerate_basis(modes: usize, photons: usize) -> Result<FockBasis> {
    if modes == 0 {
        return Err(Error::TooFewModes { min: 1, found: 0 });
    }
    sector_basis(modes, photons)
}

/// Like [`enumerate_basis`] but also accepts zero modes, whose only state is
/// the empty one (when `photons == 0`).
pub(crate) fn sector_basis(modes: usize, photons: usize) -> Result<FockBasis> {
    if photons > MAX_PHOTONS {
        return Err(Error::TooManyPhotons(photons));
    }
    let mut states = Vec::with_capacity(basis_size(modes, photons));
    let mut current = vec![0; modes];
    fill(&mut current, 0, photons, &mut states);
    let index = states
        .iter()
        .enumerate()
        .map(|(i, s)| (s.clone(), i))
        .collect();
    Ok(FockBasis {
        modes,
        photons,
        states,
        index,
    })
}

fn fill(current: &mut [usize], pos: usize, left: usize, out: &mut Vec<OccupationState>) {
    let m = current.len();
    if pos == m {
        if left == 0 {
            out.push(OccupationState(current.to_vec()));
        }
        return;
    }
    if pos + 1 == m {
        current[pos] = left;
        out.push(OccupationState(current.to_vec()));
        current[pos] = 0;
        return;
    }
    for k in (0..=left).rev() {
        current[pos] = k;
        fill(current, pos + 1, left - k, out);
    }
    current[pos] = 0;
}
