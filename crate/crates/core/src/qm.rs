//! Invariant-quasimorphism evaluation on products of mixed commutators, the
//! growth reports, and the non-equivalence certificates.
//!
//! The value of the invariant quasimorphism on an expression
//! `[g_1, w_1] ... [g_k, w_k]` (each `w_i` in the commutator subgroup) is
//! minus the translation number of the product of the lifted commutators.
//! Commutators do not see the integer ambiguity of lifts, so evaluating the
//! word in the designated generator lifts computes the canonical-lift value
//! exactly. Intervals are certified: exact when a detranslated fixed point
//! exists, radius `1/N` after `N` iterations otherwise.

use num::bigint::BigInt;
use num::{One, Signed, Zero};
use serde::Serialize;

use thiserror::Error;

use crate::circle::{tau_word, word_compose, PlError, TauInterval};
use crate::ehn::{EhnError, Representation};
use crate::nilpotent::{gamma3_membership, NilpotentError, RelatorLattice};
use crate::ratio::{format_rat, is_integer, rat_int, Rat};
use crate::word::{
    build_paper_words, commutator, conjugate, gen_a, gen_b, Generator, GroupHom, PaperWords, Word,
    WordError,
};

#[derive(Debug, Error)]
pub enum QmError {
    #[error("expression must contain at least one commutator pair")]
    EmptyExpression,
    #[error("pair {index}: second entry has nonzero exponent sums, not in the commutator subgroup")]
    NotInSubgroup { index: usize },
    #[error("expression product fails membership in the mixed commutator subgroup")]
    MembershipFailure,
    #[error("abstract pairs and evaluation expression disagree as circle maps")]
    ExpressionMismatch,
    #[error("evaluation paths disagree at n = {n}: [{a}] vs [{b}]")]
    PathDisagreement { n: u64, a: String, b: String },
    #[error("certified bound violated at n = {n}: {msg}")]
    BoundViolation { n: u64, msg: String },
    #[error(transparent)]
    Pl(#[from] PlError),
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Nilpotent(#[from] NilpotentError),
    #[error(transparent)]
    Ehn(#[from] EhnError),
}

/// An ordered product of mixed commutators `[g_i, w_i]`.
#[derive(Debug, Clone)]
pub struct CommExpr {
    pairs: Vec<(Word, Word)>,
}

impl CommExpr {
    pub fn new(pairs: Vec<(Word, Word)>) -> Result<Self, QmError> {
        if pairs.is_empty() {
            return Err(QmError::EmptyExpression);
        }
        Ok(CommExpr { pairs })
    }

    pub fn pairs(&self) -> &[(Word, Word)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// The reduced word `[g_1, w_1] ... [g_k, w_k]`.
    pub fn product_word(&self) -> Word {
        let mut acc = Word::identity();
        for (g, w) in &self.pairs {
            acc = acc.mul(&commutator(g, w));
        }
        acc
    }

    pub fn concat(&self, other: &CommExpr) -> CommExpr {
        let mut pairs = self.pairs.clone();
        pairs.extend(other.pairs.iter().cloned());
        CommExpr { pairs }
    }

    /// Conjugates every entry by `h` (the whole product by `h`).
    pub fn conjugate_all(&self, h: &Word) -> CommExpr {
        CommExpr {
            pairs: self
                .pairs
                .iter()
                .map(|(g, w)| (conjugate(h, g), conjugate(h, w)))
                .collect(),
        }
    }

    /// Applies a generator substitution to every entry.
    pub fn map_words(&self, hom: &GroupHom) -> Result<CommExpr, QmError> {
        let pairs = self
            .pairs
            .iter()
            .map(|(g, w)| Ok((hom.apply(g)?, hom.apply(w)?)))
            .collect::<Result<Vec<_>, WordError>>()?;
        Ok(CommExpr { pairs })
    }
}

/// Which slot of each commutator receives the power.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerSide {
    Left,
    Right,
}

/// Per-pair power expansion: each `[g, w]` becomes `n` conjugated pairs whose
/// product reduces to `[g^n, w]` (left) or `[g, w^n]` (right). The word-level
/// identity is checked by free reduction before returning.
pub fn expand_power(base: &CommExpr, side: PowerSide, n: u64) -> CommExpr {
    assert!(n >= 1);
    let mut pairs = Vec::with_capacity(base.len() * n as usize);
    let mut expect = Word::identity();
    for (g, w) in base.pairs() {
        match side {
            PowerSide::Left => {
                // [g^n, w] = c(g^{n-1}, [g,w]) ... c(g, [g,w]) [g,w], and g
                // commutes with its own powers
                for j in (0..n).rev() {
                    let conj = g.pow(j as i64);
                    pairs.push((g.clone(), conjugate(&conj, w)));
                }
                expect = expect.mul(&commutator(&g.pow(n as i64), w));
            }
            PowerSide::Right => {
                // [g, w^n] = [g,w] c(w, [g,w]) ... c(w^{n-1}, [g,w])
                for j in 0..n {
                    let conj = w.pow(j as i64);
                    pairs.push((conjugate(&conj, g), conjugate(&conj, w)));
                }
                expect = expect.mul(&commutator(g, &w.pow(n as i64)));
            }
        }
    }
    let out = CommExpr { pairs };
    debug_assert_eq!(out.product_word(), expect);
    out
}

/// Expansion of `[outer^n, -]` applied to a whole base expression: the
/// product of the `n` conjugates `c(outer^j, base product)`, `j = n-1 .. 0`,
/// as a single list of mixed-commutator pairs.
pub fn conjugated_expansion(base: &CommExpr, outer: &Word, n: u64) -> CommExpr {
    assert!(n >= 1);
    let mut pairs = Vec::with_capacity(base.len() * n as usize);
    for j in (0..n).rev() {
        let h = outer.pow(j as i64);
        for (g, w) in base.pairs() {
            pairs.push((conjugate(&h, g), conjugate(&h, w)));
        }
    }
    CommExpr { pairs }
}

/// The explicit expression of `[y, z]` in the one-relator group as a product
/// of `ell - 1` mixed commutators, together with the word family.
pub fn one_relator_base_expr(ell: u32) -> Result<(CommExpr, PaperWords), QmError> {
    let pw = build_paper_words(ell, 1)?;
    let pairs = pw
        .gs
        .iter()
        .cloned()
        .zip(pw.ws.iter().cloned())
        .collect::<Vec<_>>();
    Ok((CommExpr::new(pairs)?, pw))
}

/// A certified quasimorphism value.
#[derive(Debug, Clone)]
pub struct MuValue {
    /// Enclosure of the value (minus the translation number of the lifted
    /// commutator product).
    pub value: TauInterval,
    pub iterations: u64,
    /// Populated when the value is exact and integral: the split-out
    /// translation offset of the lifted product.
    pub integer_part: Option<BigInt>,
}

impl MuValue {
    fn from_tau(tau: TauInterval, iterations: u64) -> Self {
        let value = tau.negate();
        let integer_part = if value.is_exact() && is_integer(&value.center) {
            Some(value.center.to_integer())
        } else {
            None
        };
        MuValue {
            value,
            iterations,
            integer_part,
        }
    }

    /// Certified lower bound for `|mu|`.
    pub fn abs_lower(&self) -> Rat {
        self.value.abs_lower()
    }
}

/// Evaluates the invariant quasimorphism on a mixed-commutator expression
/// under the given exact representation.
pub fn mu_eval(
    rep: &Representation,
    expr: &CommExpr,
    iterations: u64,
    budget: usize,
) -> Result<MuValue, QmError> {
    if expr.is_empty() {
        return Err(QmError::EmptyExpression);
    }
    for (i, (_, w)) in expr.pairs().iter().enumerate() {
        if !w.has_zero_exponent_sums() {
            return Err(QmError::NotInSubgroup { index: i });
        }
    }
    let word = expr.product_word();
    let tau = tau_word(&rep.bindings(), &word, iterations, budget)?;
    Ok(MuValue::from_tau(tau, iterations))
}

/// Closed-form route for `mu([y^n, z])` over the one-relator group: minus the
/// translation number of `c(b a^2, [b^-n, a^-ell])`, minus `n (ell - 1)`.
pub fn mu_closed_form(
    rep: &Representation,
    n: u64,
    iterations: u64,
    budget: usize,
) -> Result<TauInterval, QmError> {
    let ell = rep.meta.ell;
    let a = Word::generator(gen_a());
    let b = Word::generator(gen_b());
    let core = commutator(&b.pow(-(n as i64)), &a.pow(-(ell as i64)));
    let word = conjugate(&b.mul(&a.pow(2)), &core);
    let tau = tau_word(&rep.bindings(), &word, iterations, budget)?;
    Ok(tau
        .negate()
        .shift(&-rat_int((n * (ell as u64 - 1)) as i64)))
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// One row of the one-relator growth table.
#[derive(Debug, Clone)]
pub struct SequenceRow {
    pub n: u64,
    /// Path A: generic evaluation of the expanded expression.
    pub mu: MuValue,
    /// Path B: the closed form.
    pub mu_closed: TauInterval,
    /// `n (ell - 1) - 1`.
    pub paper_bound: Rat,
    /// `(|center| - radius) / 2`, the mixed-scl lower bound at defect 1.
    pub bavard_lower: Rat,
    /// `[y^n, z]` is a single commutator in the ambient group.
    pub cl_upper: u32,
    pub ratio: Rat,
}

/// Evaluates `mu([y^n, z])` two independent ways for each `n` and certifies
/// the growth bound. Path disagreement or a bound violation is a hard error.
pub fn sequence_report(
    rep: &Representation,
    n_range: impl IntoIterator<Item = u64>,
    iterations: u64,
    budget: usize,
) -> Result<Vec<SequenceRow>, QmError> {
    let ell = rep.meta.ell;
    let (base, pw) = one_relator_base_expr(ell)?;
    let mut rows = Vec::new();
    for n in n_range {
        let expr = conjugated_expansion(&base, &pw.y, n);
        let mu = mu_eval(rep, &expr, iterations, budget)?;
        let closed = mu_closed_form(rep, n, iterations, budget)?;
        if !mu.value.intersects(&closed) {
            return Err(QmError::PathDisagreement {
                n,
                a: format!("{} ± {}", format_rat(&mu.value.center), format_rat(&mu.value.radius)),
                b: format!("{} ± {}", format_rat(&closed.center), format_rat(&closed.radius)),
            });
        }
        let paper_bound = rat_int((n * (ell as u64 - 1)) as i64) - rat_int(1);
        // |center| + radius >= n(ell-1) - 1
        let optimistic = mu.value.center.abs() + mu.value.radius.clone();
        if optimistic < paper_bound {
            return Err(QmError::BoundViolation {
                n,
                msg: format!(
                    "|mu| + radius = {} below the growth bound {}",
                    format_rat(&optimistic),
                    format_rat(&paper_bound)
                ),
            });
        }
        // |center + n(ell-1)| <= 1 + 2 radius
        let off = (&mu.value.center + &rat_int((n * (ell as u64 - 1)) as i64)).abs();
        let window = rat_int(1) + rat_int(2) * mu.value.radius.clone();
        if off > window {
            return Err(QmError::BoundViolation {
                n,
                msg: format!(
                    "mu sits {} away from -n(ell-1), outside the defect window {}",
                    format_rat(&off),
                    format_rat(&window)
                ),
            });
        }
        let bavard_lower = (mu.value.center.abs() - mu.value.radius.clone()) / rat_int(2);
        let ratio = bavard_lower.clone();
        rows.push(SequenceRow {
            n,
            mu,
            mu_closed: closed,
            paper_bound,
            bavard_lower,
            cl_upper: 1,
            ratio,
        });
    }
    Ok(rows)
}

/// One row of the surface (genus-`ell`) pullback table.
#[derive(Debug, Clone)]
pub struct SurfaceRow {
    pub n: u64,
    /// Membership of `x_n` in the mixed commutator subgroup.
    pub member: bool,
    /// `ell * mu([y^n, z])`, the pulled-back value at `x_n`.
    pub value: TauInterval,
    /// Direct evaluation under the pullback representation.
    pub direct: MuValue,
    /// `ell (n (ell - 1) - 1)`.
    pub paper_bound: Rat,
    pub bavard_lower: Rat,
    pub cl_upper: u32,
    pub ratio: Rat,
}

/// The genus-`ell` growth table: pulls the one-relator values back along
/// `a_i -> a, b_i -> b` and cross-checks a direct evaluation of the
/// re-indexed expansion (the same image in the one-relator group, hence the
/// same pulled-back value).
pub fn surface_pullback_report(
    rep: &Representation,
    n_range: impl IntoIterator<Item = u64>,
    iterations: u64,
    budget: usize,
) -> Result<Vec<SurfaceRow>, QmError> {
    let ell = rep.meta.ell;
    let (base, _) = one_relator_base_expr(ell)?;
    let surface_rep = rep.surface_pullback();
    let lattice = RelatorLattice::Surface { ell };
    let mut rows = Vec::new();
    for n in n_range {
        let pw = build_paper_words(ell, n)?;
        let member = gamma3_membership(&pw.x_n, &lattice)?;
        if !member {
            return Err(QmError::MembershipFailure);
        }
        // pullback route: ell * mu([y^n, z])
        let expr = conjugated_expansion(&base, &pw.y, n);
        let mu_one = mu_eval(rep, &expr, iterations, budget)?;
        let value = mu_one.value.scale(&rat_int(ell as i64));
        // direct route: the same expansion re-indexed through every handle
        let mut direct_expr: Option<CommExpr> = None;
        for i in 1..=ell {
            let hom = reindex_hom(i);
            let e = expr.map_words(&hom)?;
            direct_expr = Some(match direct_expr {
                None => e,
                Some(prev) => prev.concat(&e),
            });
        }
        let direct = mu_eval(&surface_rep, &direct_expr.unwrap(), iterations, budget)?;
        if !direct.value.intersects(&value) {
            return Err(QmError::PathDisagreement {
                n,
                a: format!("{} ± {}", format_rat(&value.center), format_rat(&value.radius)),
                b: format!(
                    "{} ± {}",
                    format_rat(&direct.value.center),
                    format_rat(&direct.value.radius)
                ),
            });
        }
        let paper_bound = rat_int(ell as i64) * (rat_int((n * (ell as u64 - 1)) as i64) - rat_int(1));
        // |value| >= ell (n(ell-1) - 1) - 2 ell radius
        let slack = rat_int(2 * ell as i64) * value.radius.clone();
        if value.center.abs() + slack.clone() < paper_bound.clone() - slack.clone() {
            return Err(QmError::BoundViolation {
                n,
                msg: format!(
                    "|value| = {} below the surface growth bound {}",
                    format_rat(&value.center.abs()),
                    format_rat(&paper_bound)
                ),
            });
        }
        let bavard_lower = (value.center.abs() - value.radius.clone()) / rat_int(2);
        let ratio = bavard_lower.clone() / rat_int(ell as i64);
        rows.push(SurfaceRow {
            n,
            member,
            value,
            direct,
            paper_bound,
            bavard_lower,
            cl_upper: ell,
            ratio,
        });
    }
    Ok(rows)
}

/// `a -> a_i, b -> b_i`.
fn reindex_hom(i: u32) -> GroupHom {
    let mut images = std::collections::BTreeMap::new();
    images.insert(gen_a(), Word::generator(Generator::indexed("a", i)));
    images.insert(gen_b(), Word::generator(Generator::indexed("b", i)));
    GroupHom::new(images)
}

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

/// The single-element overflow input: abstract pairs `(y_i, z_i)` (their
/// count is the `k` of the threshold `(2k-1) D`) together with a valid
/// mixed-commutator expression of the same element used for evaluation.
#[derive(Debug, Clone)]
pub struct OverflowCase {
    pub pairs: Vec<(Word, Word)>,
    pub eval: CommExpr,
    pub lattice: RelatorLattice,
}

impl OverflowCase {
    /// The one-relator case: the single pair `(y, z)` evaluated through the
    /// explicit `ell - 1` mixed commutators.
    pub fn one_relator(ell: u32) -> Result<Self, QmError> {
        let (eval, pw) = one_relator_base_expr(ell)?;
        Ok(OverflowCase {
            pairs: vec![(pw.y.clone(), pw.z.clone())],
            eval,
            lattice: RelatorLattice::OneRelator { ell },
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthRow {
    pub n: u64,
    pub mu_center: String,
    pub mu_radius: String,
    pub bavard_lower: String,
    pub cl_upper: u32,
}

/// Machine-checkable non-equivalence certificate.
#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub group: String,
    pub ell: u32,
    pub k: usize,
    pub route: String,
    pub pairs: Vec<[String; 2]>,
    pub eval_pairs: Vec<[String; 2]>,
    pub mu_center: String,
    pub mu_radius: String,
    pub defect_bound: String,
    pub threshold: String,
    pub cl_upper: String,
    pub scl_mixed_lower: String,
    pub verdict: String,
    pub derivation: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witnessed_at_n: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub growth_rows: Option<Vec<GrowthRow>>,
}

/// Overflow certification: when `|mu|` of the base element certifiably
/// exceeds `(2k - 1) D`, the powered sequence's values grow without bound and
/// the two stable lengths cannot be equivalent.
pub fn overflow_certify(
    rep: &Representation,
    case: &OverflowCase,
    iterations: u64,
    budget: usize,
) -> Result<Certificate, QmError> {
    let k = case.pairs.len();
    // condition (i): each [y_i, z_i] lies in the commutator subgroup
    for (i, (y, z)) in case.pairs.iter().enumerate() {
        if !commutator(y, z).has_zero_exponent_sums() {
            return Err(QmError::NotInSubgroup { index: i });
        }
    }
    // condition (ii): the product lies in the mixed commutator subgroup
    let mut product = Word::identity();
    for (y, z) in &case.pairs {
        product = product.mul(&commutator(y, z));
    }
    if !gamma3_membership(&product, &case.lattice)? {
        return Err(QmError::MembershipFailure);
    }
    // the evaluation expression must name the same circle map (the two words
    // differ by relator conjugates, which act trivially on the circle)
    let bindings = rep.bindings();
    let lhs = word_compose(&bindings, &product, budget)?;
    let rhs = word_compose(&bindings, &case.eval.product_word(), budget)?;
    if !lhs.circle_equal(&rhs) {
        return Err(QmError::ExpressionMismatch);
    }

    let mu = mu_eval(rep, &case.eval, iterations, budget)?;
    let threshold = rat_int(2 * k as i64 - 1);
    let certified_abs = mu.abs_lower();
    let certified = certified_abs > threshold;
    let scl_lower = (&certified_abs - &mu.value.radius.max(Rat::zero())) / rat_int(2);
    Ok(Certificate {
        group: "one-relator".into(),
        ell: rep.meta.ell,
        k,
        route: "overflow".into(),
        pairs: case
            .pairs
            .iter()
            .map(|(y, z)| [y.to_string(), z.to_string()])
            .collect(),
        eval_pairs: case
            .eval
            .pairs()
            .iter()
            .map(|(g, w)| [g.to_string(), w.to_string()])
            .collect(),
        mu_center: format_rat(&mu.value.center),
        mu_radius: format_rat(&mu.value.radius),
        defect_bound: "1/1".into(),
        threshold: format_rat(&threshold),
        cl_upper: format!("{k}/1"),
        scl_mixed_lower: format_rat(&scl_lower),
        verdict: if certified { "certified" } else { "inconclusive" }.into(),
        derivation: format!(
            "|mu(prod [y_i^n, z_i]) - n mu(prod [y_i, z_i])| <= (n(2k-1)-1) D with k = {k}, D <= 1; \
             certified |mu| = {} {} threshold {} so the sequence |mu| grows at least linearly",
            format_rat(&certified_abs),
            if certified { ">" } else { "<=" },
            format_rat(&threshold),
        ),
        witnessed_at_n: None,
        growth_rows: None,
    })
}

/// Growth certification: certified mixed-scl lower bounds along the surface
/// sequence must exceed `threshold` while the commutator-length upper bound
/// stays constant.
pub fn growth_certify(
    rep: &Representation,
    n_max: u64,
    iterations: u64,
    budget: usize,
    threshold: &Rat,
) -> Result<Certificate, QmError> {
    let ell = rep.meta.ell;
    let rows = surface_pullback_report(rep, 1..=n_max, iterations, budget)?;
    let mut witnessed = None;
    let mut monotone = true;
    for (i, row) in rows.iter().enumerate() {
        if i > 0 && row.bavard_lower <= rows[i - 1].bavard_lower {
            monotone = false;
        }
        if witnessed.is_none() && &row.bavard_lower > threshold {
            witnessed = Some(row.n);
        }
    }
    let certified = witnessed.is_some() && monotone;
    let last = rows.last().expect("nonempty range");
    Ok(Certificate {
        group: "surface".into(),
        ell,
        k: ell as usize,
        route: "growth".into(),
        pairs: Vec::new(),
        eval_pairs: Vec::new(),
        mu_center: format_rat(&last.value.center),
        mu_radius: format_rat(&last.value.radius),
        defect_bound: "1/1".into(),
        threshold: format_rat(threshold),
        cl_upper: format!("{ell}/1"),
        scl_mixed_lower: format_rat(&last.bavard_lower),
        verdict: if certified { "certified" } else { "inconclusive" }.into(),
        derivation: format!(
            "certified lower bounds |mu(x_n)|/2 grow strictly in n and exceed {} while cl <= {ell}",
            format_rat(threshold),
        ),
        witnessed_at_n: witnessed,
        growth_rows: Some(
            rows.iter()
                .map(|r| GrowthRow {
                    n: r.n,
                    mu_center: format_rat(&r.value.center),
                    mu_radius: format_rat(&r.value.radius),
                    bavard_lower: format_rat(&r.bavard_lower),
                    cl_upper: r.cl_upper,
                })
                .collect(),
        ),
    })
}
