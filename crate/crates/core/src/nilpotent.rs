//! Degree-2 Magnus calculus and membership in `[G, G']`.
//!
//! A word maps to the pair `(v, E)`: its exponent-sum vector and the matrix of
//! degree-2 coefficients of the truncated Magnus expansion (`g -> 1 + X_g`,
//! `g^-1 -> 1 - X_g + X_g^2`, products cut beyond degree 2). The pair sees the
//! free class-2 nilpotent quotient, which is exactly enough to decide whether
//! a word lies in `gamma_3` of the free group, or in `[G, G']` for the
//! one-relator groups `<a,b | [a,b]^ell>` and the surface groups: those
//! quotients differ from the free one only by the lattice spanned by the
//! relator's antisymmetric image.

use std::collections::BTreeMap;

use num::bigint::BigInt;
use num::{Signed, Zero};
use thiserror::Error;

use crate::word::{surface_alphabet, Generator, Word};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NilpotentError {
    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),
    #[error("word uses generator `{0}` outside the lattice alphabet")]
    ForeignGenerator(String),
}

/// Image of a word in the free class-2 nilpotent group of the given rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nil2Element {
    rank: usize,
    /// Exponent sums, indexed by the fixed generator order.
    v: Vec<BigInt>,
    /// Degree-2 Magnus coefficients, row-major `e[i][j]` for `X_i X_j`.
    e: Vec<Vec<BigInt>>,
}

impl Nil2Element {
    pub fn identity(rank: usize) -> Self {
        Nil2Element {
            rank,
            v: vec![BigInt::zero(); rank],
            e: vec![vec![BigInt::zero(); rank]; rank],
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn exponent_vector(&self) -> &[BigInt] {
        &self.v
    }

    pub fn degree2(&self) -> &[Vec<BigInt>] {
        &self.e
    }

    pub fn is_identity(&self) -> bool {
        self.v.iter().all(Zero::is_zero) && self.e.iter().flatten().all(Zero::is_zero)
    }

    /// Right-multiplies by a single letter `g_i^sign`.
    fn push_letter(&mut self, i: usize, sign: i8) {
        let s = BigInt::from(sign as i64);
        // E += v (x) (sign e_i); an inverse letter also contributes X_i^2.
        for row in 0..self.rank {
            let add = &self.v[row] * &s;
            self.e[row][i] += add;
        }
        if sign < 0 {
            self.e[i][i] += 1;
        }
        self.v[i] += s;
    }

    /// Group multiplication: `v = v1 + v2`, `E = E1 + E2 + v1 (x) v2`.
    pub fn mul(&self, other: &Nil2Element) -> Result<Nil2Element, NilpotentError> {
        if self.rank != other.rank {
            return Err(NilpotentError::RankMismatch(self.rank, other.rank));
        }
        let mut out = Nil2Element::identity(self.rank);
        for i in 0..self.rank {
            out.v[i] = &self.v[i] + &other.v[i];
            for j in 0..self.rank {
                out.e[i][j] = &self.e[i][j] + &other.e[i][j] + &self.v[i] * &other.v[j];
            }
        }
        Ok(out)
    }

    /// Group inverse: `(-v, -E + v (x) v)`.
    pub fn inverse(&self) -> Nil2Element {
        let mut out = Nil2Element::identity(self.rank);
        for i in 0..self.rank {
            out.v[i] = -&self.v[i];
            for j in 0..self.rank {
                out.e[i][j] = -&self.e[i][j] + &self.v[i] * &self.v[j];
            }
        }
        out
    }

    /// `E - E^T`; for elements with `v = 0` this equals `2E` in content but we
    /// keep the raw difference so no divisibility is assumed.
    pub fn antisymmetrization(&self) -> Vec<Vec<BigInt>> {
        let mut a = vec![vec![BigInt::zero(); self.rank]; self.rank];
        for i in 0..self.rank {
            for j in 0..self.rank {
                a[i][j] = &self.e[i][j] - &self.e[j][i];
            }
        }
        a
    }
}

/// Truncated Magnus expansion of a word over the first `rank` generators of
/// the given ordered alphabet.
pub fn magnus2(w: &Word, alphabet: &[Generator]) -> Result<Nil2Element, NilpotentError> {
    let index: BTreeMap<&Generator, usize> =
        alphabet.iter().enumerate().map(|(i, g)| (g, i)).collect();
    let mut acc = Nil2Element::identity(alphabet.len());
    for (g, sign) in w.letters() {
        let i = *index
            .get(g)
            .ok_or_else(|| NilpotentError::ForeignGenerator(g.to_string()))?;
        acc.push_letter(i, sign);
    }
    Ok(acc)
}

/// The ambient group whose `[G, G']` membership is being decided, together
/// with the sublattice of antisymmetric matrices its relator generates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RelatorLattice {
    /// Free group on the given alphabet; the lattice is `{0}`.
    Free { alphabet: Vec<Generator> },
    /// `<a, b | [a,b]^ell>`; the lattice is `Z * ell * (e_a /\ e_b)`.
    OneRelator { ell: u32 },
    /// Genus-`ell` surface group; the lattice is `Z * sum_i (e_{a_i} /\ e_{b_i})`.
    Surface { ell: u32 },
}

impl RelatorLattice {
    pub fn free(alphabet: Vec<Generator>) -> Self {
        RelatorLattice::Free { alphabet }
    }

    pub fn alphabet(&self) -> Vec<Generator> {
        match self {
            RelatorLattice::Free { alphabet } => alphabet.clone(),
            RelatorLattice::OneRelator { .. } => crate::word::rank2_alphabet(),
            RelatorLattice::Surface { ell } => surface_alphabet(*ell),
        }
    }

    /// Does the antisymmetric matrix `m` lie in the relator lattice?
    fn contains(&self, m: &[Vec<BigInt>]) -> bool {
        match self {
            RelatorLattice::Free { .. } => m.iter().flatten().all(Zero::is_zero),
            RelatorLattice::OneRelator { ell } => {
                // alphabet (a, b): membership means m = t * ell * (e_ab - e_ba)
                let ell = BigInt::from(*ell);
                (&m[0][1] % &ell).is_zero()
                    && m[0][0].is_zero()
                    && m[1][1].is_zero()
                    && m[1][0] == -&m[0][1]
            }
            RelatorLattice::Surface { ell } => {
                // alphabet (a1, b1, a2, b2, ...): m must equal t * sum_i (e_{a_i b_i} - e_{b_i a_i})
                let rank = 2 * *ell as usize;
                let t = m[0][1].clone();
                for i in 0..rank {
                    for j in 0..rank {
                        let expect = if i + 1 == j && i % 2 == 0 {
                            t.clone()
                        } else if j + 1 == i && j % 2 == 0 {
                            -t.clone()
                        } else {
                            BigInt::zero()
                        };
                        if m[i][j] != expect {
                            return false;
                        }
                    }
                }
                true
            }
        }
    }
}

/// Decides membership of `w` in `[G, G']` for the group owning the lattice
/// (exact `gamma_3` membership in the free case).
pub fn gamma3_membership(w: &Word, lattice: &RelatorLattice) -> Result<bool, NilpotentError> {
    let alphabet = lattice.alphabet();
    let n2 = magnus2(w, &alphabet)?;
    if !n2.exponent_vector().iter().all(Zero::is_zero) {
        return Ok(false);
    }
    debug_assert!(
        {
            let e = n2.degree2();
            (0..e.len()).all(|i| (0..e.len()).all(|j| e[i][j] == -e[j][i].clone()))
        },
        "degree-2 part must be antisymmetric once exponent sums vanish"
    );
    Ok(lattice.contains(n2.degree2()))
}
