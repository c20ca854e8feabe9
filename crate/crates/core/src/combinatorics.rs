//! Noncrossing perfect matchings of `2N` boundary points.
//!
//! Points are labelled `1..=2N` in the public API. A diagram is stored as its
//! partner sequence, so the derived ordering is the canonical (lexicographic)
//! enumeration order.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The `N`th Catalan number `(2N)!/(N!(N+1)!)`, with overflow reported.
pub fn catalan(n: u32) -> Result<u64> {
    let mut c: u64 = 1;
    for k in 0..n as u64 {
        // C_{k+1} = C_k * 2(2k+1) / (k+2), exact at every step.
        let num = (c as u128)
            .checked_mul(2 * (2 * k as u128 + 1))
            .ok_or(Error::Overflow("catalan"))?;
        let next = num / (k as u128 + 2);
        c = u64::try_from(next).map_err(|_| Error::Overflow("catalan"))?;
    }
    Ok(c)
}

/// A noncrossing fixed-point-free involution on `{1, ..., 2N}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct ArcDiagram {
    // zero-based partner of each zero-based point
    partners: Vec<usize>,
}

impl ArcDiagram {
    /// Build from a one-based partner sequence, validating every invariant.
    pub fn from_partners(partners: &[usize]) -> Result<Self> {
        let m = partners.len();
        if m == 0 || !m.is_multiple_of(2) {
            return Err(Error::InvalidDiagram(format!(
                "partner sequence must have positive even length, got {m}"
            )));
        }
        let mut zero = Vec::with_capacity(m);
        for (k, &p) in partners.iter().enumerate() {
            if p == 0 || p > m {
                return Err(Error::InvalidDiagram(format!("partner {p} of point {} out of range", k + 1)));
            }
            zero.push(p - 1);
        }
        for (k, &p) in zero.iter().enumerate() {
            if p == k {
                return Err(Error::InvalidDiagram(format!("point {} is a fixed point", k + 1)));
            }
            if zero[p] != k {
                return Err(Error::InvalidDiagram(format!("pairing is not an involution at {}", k + 1)));
            }
        }
        let d = ArcDiagram { partners: zero };
        if let Some((a, b)) = d.first_crossing() {
            return Err(Error::InvalidDiagram(format!("arcs at {a} and {b} cross")));
        }
        Ok(d)
    }

    /// Build from a list of one-based arcs.
    pub fn from_arcs(arcs: &[(usize, usize)]) -> Result<Self> {
        let m = 2 * arcs.len();
        let mut p = vec![0usize; m];
        for &(a, b) in arcs {
            if a == 0 || b == 0 || a > m || b > m {
                return Err(Error::InvalidDiagram(format!("arc ({a}, {b}) out of range")));
            }
            if p[a - 1] != 0 || p[b - 1] != 0 {
                return Err(Error::InvalidDiagram(format!("point reused in arc ({a}, {b})")));
            }
            p[a - 1] = b;
            p[b - 1] = a;
        }
        Self::from_partners(&p)
    }

    fn from_zero_unchecked(partners: Vec<usize>) -> Self {
        debug_assert!(partners.iter().enumerate().all(|(k, &p)| partners[p] == k && p != k));
        ArcDiagram { partners }
    }

    fn first_crossing(&self) -> Option<(usize, usize)> {
        // Stack scan: a matching is noncrossing iff closing partners come off a stack in order.
        let mut stack = Vec::new();
        for (k, &p) in self.partners.iter().enumerate() {
            if p > k {
                stack.push(k);
            } else {
                match stack.pop() {
                    Some(top) if top == p => {}
                    Some(top) => return Some((top + 1, p + 1)),
                    None => return Some((p + 1, k + 1)),
                }
            }
        }
        None
    }

    pub fn n_pairs(&self) -> usize {
        self.partners.len() / 2
    }

    pub fn n_points(&self) -> usize {
        self.partners.len()
    }

    /// One-based partner of one-based point `i`.
    pub fn partner(&self, i: usize) -> Result<usize> {
        self.check_index(i)?;
        Ok(self.partners[i - 1] + 1)
    }

    /// One-based partner sequence.
    pub fn partners(&self) -> Vec<usize> {
        self.partners.iter().map(|p| p + 1).collect()
    }

    /// Arcs `(a, b)` with `a < b`, sorted by left endpoint.
    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.partners
            .iter()
            .enumerate()
            .filter(|(k, &p)| p > *k)
            .map(|(k, &p)| (k + 1, p + 1))
    }

    /// Whether points `i` and `i + 1` are partners.
    pub fn has_adjacent_arc(&self, i: usize) -> bool {
        i >= 1 && i < self.n_points() && self.partners[i - 1] == i
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.n_points() {
            return Err(Error::IndexOutOfRange { index: i, points: self.n_points() });
        }
        Ok(())
    }

    /// Remove the adjacent arc `(i, i+1)` and relabel the survivors.
    pub fn collapse_arc(&self, i: usize) -> Result<ArcDiagram> {
        self.check_index(i)?;
        if !self.has_adjacent_arc(i) {
            return Err(Error::NotAnArc(i, i + 1));
        }
        if self.n_pairs() == 1 {
            return Err(Error::InvalidDiagram("cannot collapse the only arc".into()));
        }
        let gone = |k: usize| k == i - 1 || k == i;
        let relabel = |k: usize| if k > i { k - 2 } else { k };
        let partners = (0..self.n_points())
            .filter(|&k| !gone(k))
            .map(|k| relabel(self.partners[k]))
            .collect();
        Ok(Self::from_zero_unchecked(partners))
    }

    /// Insert a new adjacent arc at positions `(i, i+1)`; `i` ranges over `1..=2N+1`.
    pub fn insert_arc(&self, i: usize) -> Result<ArcDiagram> {
        let m = self.n_points();
        if i == 0 || i > m + 1 {
            return Err(Error::IndexOutOfRange { index: i, points: m + 2 });
        }
        let shift = |k: usize| if k >= i - 1 { k + 2 } else { k };
        let mut partners = vec![0usize; m + 2];
        for k in 0..m {
            partners[shift(k)] = shift(self.partners[k]);
        }
        partners[i - 1] = i;
        partners[i] = i - 1;
        Ok(Self::from_zero_unchecked(partners))
    }

    /// Cut the arcs ending at `i` and `i+1` and rejoin them as `i <-> i+1`
    /// plus an arc between the two freed partners.
    pub fn chi_map(&self, i: usize) -> Result<ArcDiagram> {
        self.check_index(i)?;
        if i == self.n_points() {
            return Err(Error::IndexOutOfRange { index: i + 1, points: self.n_points() });
        }
        if self.has_adjacent_arc(i) {
            return Err(Error::AlreadyAnArc(i, i + 1));
        }
        let (a, b) = (i - 1, i);
        let (pa, pb) = (self.partners[a], self.partners[b]);
        let mut partners = self.partners.clone();
        partners[a] = b;
        partners[b] = a;
        partners[pa] = pb;
        partners[pb] = pa;
        let d = Self::from_zero_unchecked(partners);
        debug_assert!(d.first_crossing().is_none());
        Ok(d)
    }

    /// Canonical position of this diagram among all diagrams of its size.
    pub fn canonical_index(&self) -> usize {
        let all = enumerate_diagrams(self.n_pairs());
        all.binary_search(self).expect("every valid diagram is enumerated")
    }
}

impl TryFrom<Vec<usize>> for ArcDiagram {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::from_partners(&v)
    }
}

impl From<ArcDiagram> for Vec<usize> {
    fn from(d: ArcDiagram) -> Self {
        d.partners()
    }
}

impl fmt::Display for ArcDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for p in &self.partners {
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "{}", p + 1)?;
            first = false;
        }
        Ok(())
    }
}

impl FromStr for ArcDiagram {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: std::result::Result<Vec<usize>, _> = s
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(str::parse::<usize>)
            .collect();
        let parts = parts.map_err(|e| Error::InvalidDiagram(format!("{s:?}: {e}")))?;
        Self::from_partners(&parts)
    }
}

/// All diagrams with `n` arcs in canonical order.
pub fn enumerate_diagrams(n: usize) -> Vec<ArcDiagram> {
    fn build(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![Vec::new()];
        }
        let mut out = Vec::new();
        // point 0 pairs with 2k+1; k arcs inside, n-1-k outside
        for k in 0..n {
            for inner in build(k) {
                for outer in build(n - 1 - k) {
                    let mut p = vec![0usize; 2 * n];
                    p[0] = 2 * k + 1;
                    p[2 * k + 1] = 0;
                    for (j, &q) in inner.iter().enumerate() {
                        p[j + 1] = q + 1;
                    }
                    for (j, &q) in outer.iter().enumerate() {
                        p[j + 2 * k + 2] = q + 2 * k + 2;
                    }
                    out.push(p);
                }
            }
        }
        out
    }
    if n == 0 {
        return Vec::new();
    }
    let mut v: Vec<ArcDiagram> = build(n).into_iter().map(ArcDiagram::from_zero_unchecked).collect();
    v.sort();
    v
}

/// A pairing of an interior and an exterior diagram together with its loop count.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopProduct {
    pub interior: ArcDiagram,
    pub exterior: ArcDiagram,
    pub loops: usize,
}

impl LoopProduct {
    pub fn new(interior: ArcDiagram, exterior: ArcDiagram) -> Result<Self> {
        let loops = loop_count(&interior, &exterior)?;
        Ok(LoopProduct { interior, exterior, loops })
    }
}

/// Number of closed loops formed by gluing `interior` and `exterior` along the boundary points.
pub fn loop_count(interior: &ArcDiagram, exterior: &ArcDiagram) -> Result<usize> {
    let m = interior.n_points();
    if m != exterior.n_points() {
        return Err(Error::SizeMismatch { left: interior.n_pairs(), right: exterior.n_pairs() });
    }
    let mut seen = vec![false; m];
    let mut loops = 0;
    for start in 0..m {
        if seen[start] {
            continue;
        }
        loops += 1;
        let mut v = start;
        loop {
            seen[v] = true;
            let w = interior.partners[v];
            seen[w] = true;
            v = exterior.partners[w];
            if v == start {
                break;
            }
        }
    }
    Ok(loops)
}
