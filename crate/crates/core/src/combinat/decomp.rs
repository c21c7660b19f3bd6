use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// An ordered tuple of disjoint subsets covering a ground set; parts may be
/// empty.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Decomposition {
    pub parts: Vec<Vec<usize>>,
}

impl Decomposition {
    /// Index of the part containing `x`.
    pub fn part_of(&self, x: usize) -> Option<usize> {
        self.parts.iter().position(|p| p.contains(&x))
    }

    pub fn ground(&self) -> Vec<usize> {
        let mut g: Vec<usize> = self.parts.iter().flatten().copied().collect();
        g.sort_unstable();
        g
    }
}

/// All `parts^{|ground|}` decompositions of `ground` into `parts` ordered parts.
///
/// The order is lexicographic in the assignment vector `(part(g_1), part(g_2), ...)`
/// of the ground elements in the given order.
pub fn enumerate_decompositions(ground: &[usize], parts: usize) -> Result<Vec<Decomposition>> {
    if parts == 0 {
        return Err(Error::Size("a decomposition needs at least one part".into()));
    }
    let n = ground.len();
    let total = (parts as u128).pow(n as u32);
    if total > 1 << 24 {
        return Err(Error::Size(format!("{total} decompositions is too many to enumerate")));
    }
    let mut assign = vec![0usize; n];
    let mut out = Vec::with_capacity(total as usize);
    loop {
        let mut d = vec![Vec::new(); parts];
        for (g, &a) in ground.iter().zip(&assign) {
            d[a].push(*g);
        }
        out.push(Decomposition { parts: d });
        let mut pos = n;
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            assign[pos] += 1;
            if assign[pos] < parts {
                break;
            }
            assign[pos] = 0;
        }
    }
}

/// Decompositions `(I_1, I_2, I_3)` of `{0, ..., m-1}` other than `(∅, ∅, [m])`.
pub fn nontrivial_triples(m: usize) -> Result<Vec<Decomposition>> {
    let ground: Vec<usize> = (0..m).collect();
    Ok(enumerate_decompositions(&ground, 3)?
        .into_iter()
        .filter(|d| !(d.parts[0].is_empty() && d.parts[1].is_empty()))
        .collect())
}
