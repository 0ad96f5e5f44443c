//! Constructive commutator realizations of circle translations.
//!
//! The displacement test `min(f - id) < 2n - 1 and max(f - id) > 1 - 2n`
//! bounds the commutator length of a lift; the constructive side realizes a
//! fractional translation `T_c`, `|c| < 1`, as a single exact commutator
//! `[f, g]`. The route: build a north–south map `g` whose displacement dips
//! below `-c`, so that `T_c ∘ g` is again north–south with the same
//! multipliers, then produce an exact PL conjugator `f` with
//! `f ∘ g ∘ f^-1 = T_c ∘ g`, which forces `[f, g] = T_c` on the nose.
//!
//! With multipliers `lambda = K`, `mu = 1/K` and a two-slope profile, the
//! restriction of the map to either complementary interval of its fixed
//! points is a two-piece PL map, and such interval maps are rigid: the
//! breakpoint position is forced by the endpoint data, so the conjugator is
//! affine on each side. The general conjugator below also handles matched
//! multi-corner pairs by germ transport, and reports an honest stabilization
//! failure when the corner structures cannot be aligned.

use std::collections::BTreeMap;

use num::bigint::BigInt;
use num::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::circle::{LiftedMapR, MapBindings, PLMap, PlError, DEFAULT_BREAKPOINT_BUDGET};
use crate::ratio::{format_rat, parse_rat, rat_floor, rat_int, Rat};
use crate::word::{commutator, gen_a, gen_b, Generator, Word, WordError};

#[derive(Debug, Error)]
pub enum EhnError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("map is not north-south: {0}")]
    NotNorthSouth(String),
    #[error("multiplier mismatch: ({0}, {1}) vs ({2}, {3})")]
    MultiplierMismatch(String, String, String, String),
    #[error("conjugator transport failed to stabilize: {0}")]
    TransportStabilization(String),
    #[error("constructed conjugator failed exact verification")]
    ConjugacyVerification,
    #[error("|c| >= 1 cannot be a single commutator: displacement is constant {0}")]
    CommutatorObstruction(String),
    #[error(transparent)]
    Pl(#[from] PlError),
    #[error(transparent)]
    Word(#[from] WordError),
}

/// A PL circle-map lift with exactly one repelling and one attracting fixed
/// point per period, linear near both.
#[derive(Debug, Clone)]
pub struct NorthSouthMap {
    map: PLMap,
    repelling: Rat,
    attracting: Rat,
    lambda: Rat,
    mu: Rat,
}

impl NorthSouthMap {
    /// Classifies a map as north–south, verifying the fixed-point structure
    /// by exact scan.
    pub fn analyze(map: PLMap) -> Result<Self, EhnError> {
        let fixed = map
            .fixed_points()
            .map_err(|e| EhnError::NotNorthSouth(e.to_string()))?;
        if fixed.len() != 2 {
            return Err(EhnError::NotNorthSouth(format!(
                "expected exactly 2 fixed points per period, found {}",
                fixed.len()
            )));
        }
        let s0 = map.slope_at(&fixed[0]);
        let s1 = map.slope_at(&fixed[1]);
        let one = Rat::one();
        let (rep, att, lambda, mu) = if s0 > one && s1 < one {
            (fixed[0].clone(), fixed[1].clone(), s0, s1)
        } else if s1 > one && s0 < one {
            (fixed[1].clone(), fixed[0].clone(), s1, s0)
        } else {
            return Err(EhnError::NotNorthSouth(format!(
                "fixed-point slopes {} and {} are not hyperbolic of opposite type",
                format_rat(&s0),
                format_rat(&s1)
            )));
        };
        // the germ condition: fixed points must be interior to their segments
        for p in [&rep, &att] {
            if map.breakpoints().iter().any(|(x, _)| x == p) {
                return Err(EhnError::NotNorthSouth(
                    "fixed point sits on a breakpoint".into(),
                ));
            }
        }
        Ok(NorthSouthMap {
            map,
            repelling: rep,
            attracting: att,
            lambda,
            mu,
        })
    }

    pub fn map(&self) -> &PLMap {
        &self.map
    }

    pub fn repelling(&self) -> &Rat {
        &self.repelling
    }

    pub fn attracting(&self) -> &Rat {
        &self.attracting
    }

    pub fn multipliers(&self) -> (&Rat, &Rat) {
        (&self.lambda, &self.mu)
    }
}

/// A north–south map `g` together with its translated partner `T_c ∘ g`,
/// north–south with the same multipliers.
#[derive(Debug, Clone)]
pub struct NorthSouthPair {
    pub g: NorthSouthMap,
    pub h: NorthSouthMap,
    pub c: Rat,
}

/// Builds a north–south map `g` with multipliers `(lambda, mu)` whose
/// displacement crosses both `0` and `-c` with the prescribed germ slopes, so
/// `T_c ∘ g` is north–south with the same multipliers.
pub fn north_south_pair(c: &Rat, lambda: &Rat, mu: &Rat) -> Result<NorthSouthPair, EhnError> {
    let one = Rat::one();
    if !(c > &Rat::zero() && c < &one) {
        return Err(EhnError::InvalidParameter(format!(
            "c = {} must lie in (0, 1)",
            format_rat(c)
        )));
    }
    if lambda <= &one {
        return Err(EhnError::InvalidParameter(format!(
            "lambda = {} must exceed 1",
            format_rat(lambda)
        )));
    }
    if !(mu > &Rat::zero() && mu < &one) {
        return Err(EhnError::InvalidParameter(format!(
            "mu = {} must lie in (0, 1)",
            format_rat(mu)
        )));
    }
    let two_slope_range = (lambda - &one) * (&one - mu) / (lambda - mu);
    let g_map = if &two_slope_range > c {
        two_slope_profile(c, lambda, mu)
    } else {
        six_segment_profile(c, lambda, mu)
    }?;
    let h_map = g_map.post_translate(c);
    let g = NorthSouthMap::analyze(g_map)?;
    let h = NorthSouthMap::analyze(h_map)?;
    // the construction promises matching multipliers
    if g.lambda != h.lambda || g.mu != h.mu || &g.lambda != lambda || &g.mu != mu {
        return Err(EhnError::NotNorthSouth(
            "constructed pair does not carry the requested multipliers".into(),
        ));
    }
    Ok(NorthSouthPair { g, h, c: c.clone() })
}

/// Two-slope profile: slope `lambda` on an arc of length `(1-mu)/(lambda-mu)`
/// and `mu` on the rest. Feasible when the displacement range
/// `(lambda-1)(1-mu)/(lambda-mu)` exceeds `c`. The repeller sits at 0.
fn two_slope_profile(c: &Rat, lambda: &Rat, mu: &Rat) -> Result<PLMap, EhnError> {
    let one = Rat::one();
    let t = (&one - mu) / (lambda - mu);
    let lam1 = lambda - &one;
    // position of the minimum corner inside the rising arc, with margins on
    // both sides so the crossings are transversal
    let a0 = (&(c / &lam1) + &t) / rat_int(2);
    let beta = &t - &a0;
    let bp1 = (beta.clone(), lambda * &beta);
    let x2 = &one - &a0;
    let bp2 = (x2.clone(), &x2 - &(&lam1 * &a0));
    Ok(PLMap::new(vec![bp1, bp2])?)
}

/// Six-segment profile used when the germ slopes are too tame for the
/// two-slope map to reach below `-c`: short germ segments of slopes
/// `lambda, mu` around the four crossings, joined by steep connectors.
fn six_segment_profile(c: &Rat, lambda: &Rat, mu: &Rat) -> Result<PLMap, EhnError> {
    let one = Rat::one();
    let two = rat_int(2);
    let four = rat_int(4);
    let lam1 = lambda - &one;
    let mu1 = &one - mu;
    // germ half-height eps: small enough that all segments fit in one period
    let k_budget = &four / &lam1 + &four / &mu1 - &two;
    let eps_budget = (&one - c) / (&two * &k_budget);
    let eps_margin = c / &four;
    let eps = if eps_budget < eps_margin {
        eps_budget
    } else {
        eps_margin
    };
    let slack = (&one - c) - &eps * &k_budget; // > 0 by the choice of eps
    let len_c = &two * &eps / &lam1;
    let len_d = &two * &eps / &mu1;
    let len_b = &slack / &two;
    let len_e = (c - &(&two * &eps)) + &slack / &two;

    // displacement profile, anchored so the zero up-crossing is at x = 0:
    //   C rises through 0 with slope lambda-1, D falls through 0 (attractor),
    //   E falls steeply, F falls through -c, A rises through -c, B rises
    //   steeply back into C.
    let x_cd = &len_c / &two;
    let x_de = &x_cd + &len_d;
    let x_ef = &x_de + &len_e;
    let x_fa = &x_ef + &len_d;
    let x_ab = &x_fa + &len_c;
    let x_bc = &x_ab + &len_b;
    debug_assert_eq!(&x_bc + &(&len_c / &two), one);

    let d_top = eps.clone();
    let d_low = -eps.clone();
    let d_f_hi = -(c - &eps);
    let d_f_lo = -(c + &eps);
    let pts = vec![
        (x_cd.clone(), &x_cd + &d_top),
        (x_de.clone(), &x_de + &d_low),
        (x_ef.clone(), &x_ef + &d_f_hi),
        (x_fa.clone(), &x_fa + &d_f_lo),
        (x_ab.clone(), &x_ab + &d_f_hi),
        (x_bc.clone(), &x_bc + &d_low),
    ];
    Ok(PLMap::new(pts)?)
}

// ---------------------------------------------------------------------------
// Conjugators
// ---------------------------------------------------------------------------

/// Monotone PL data on a closed interval, as breakpoints including both ends.
#[derive(Debug, Clone)]
struct Piece {
    pts: Vec<(Rat, Rat)>,
}

impl Piece {
    fn eval(&self, x: &Rat) -> Rat {
        let i = match self.pts.binary_search_by(|(px, _)| px.cmp(x)) {
            Ok(i) => return self.pts[i].1.clone(),
            Err(i) => i - 1,
        };
        let (x0, y0) = &self.pts[i];
        let (x1, y1) = &self.pts[i + 1];
        y0 + &((y1 - y0) / (x1 - x0) * (x - x0))
    }

    fn eval_inverse(&self, y: &Rat) -> Rat {
        let i = match self.pts.binary_search_by(|(_, py)| py.cmp(y)) {
            Ok(i) => return self.pts[i].0.clone(),
            Err(i) => i - 1,
        };
        let (x0, y0) = &self.pts[i];
        let (x1, y1) = &self.pts[i + 1];
        x0 + &((x1 - x0) / (y1 - y0) * (y - y0))
    }

    fn x_lo(&self) -> &Rat {
        &self.pts[0].0
    }

    fn x_hi(&self) -> &Rat {
        &self.pts.last().unwrap().0
    }

    fn y_lo(&self) -> &Rat {
        &self.pts[0].1
    }

    fn y_hi(&self) -> &Rat {
        &self.pts.last().unwrap().1
    }

    /// True when all points lie on the single line through the endpoints.
    fn is_affine(&self) -> bool {
        if self.pts.len() <= 2 {
            return true;
        }
        let (x0, y0) = &self.pts[0];
        let (x1, y1) = self.pts.last().unwrap();
        let s = (y1 - y0) / (x1 - x0);
        self.pts
            .iter()
            .all(|(x, y)| y - y0 == (x - x0) * s.clone())
    }
}

/// One interval of the conjugacy problem: `u` on `[p, q]` with `u(p) = p`
/// repelling (slope `lambda > 1` near `p`) and `u(q) = q` attracting.
struct IntervalMap {
    map: PLMap,
    p: Rat,
    q: Rat,
    /// Corners of the map strictly inside `(p, q)`.
    corners: Vec<Rat>,
}

impl IntervalMap {
    fn new(map: PLMap, p: Rat, q: Rat) -> Self {
        let mut corners = Vec::new();
        for (bx, _) in map.breakpoints() {
            // the window (p, q) has length < 1, so one integer shift at most
            let k = rat_floor(&(&p - bx));
            for cand in [bx + &Rat::from_integer(k.clone()), bx + &Rat::from_integer(k + 1)] {
                if cand > p && cand < q {
                    corners.push(cand);
                }
            }
        }
        corners.sort();
        corners.dedup();
        IntervalMap { map, p, q, corners }
    }

    /// Multiplicative coordinate linearizing the repelling germ: pull `x`
    /// back into the germ `[p, first corner]` and rescale.
    fn germ_coordinate(&self, x: &Rat, lambda: &Rat) -> Rat {
        let germ_hi = self.corners.first().unwrap_or(&self.q);
        let mut t = x.clone();
        let mut scale = Rat::one();
        while &t > germ_hi {
            t = self.map.eval_inverse(&t);
            scale *= lambda;
        }
        scale * (t - &self.p)
    }
}

/// Exact conjugator data for one interval: returns breakpoints of `f` on
/// `[u.p, u.q]` (endpoints included) with `f ∘ u = v ∘ f` there, or `None`
/// when no PL conjugator with linear germs exists.
fn conj_interval(u: &IntervalMap, v: &IntervalMap) -> Option<Vec<(Rat, Rat)>> {
    if let Some(pts) = affine_candidate(u, v) {
        return Some(pts);
    }
    if u.corners.is_empty() || v.corners.is_empty() {
        return None;
    }
    // the conjugator maps corner orbits to corner orbits near the repeller;
    // aligning the first u-corner with each v-corner enumerates all scalings
    // modulo the germ's own self-similarity
    let lambda_u = u.map.slope_at(&u.p);
    let zeta_u = u.germ_coordinate(&u.corners[0], &lambda_u);
    for target in &v.corners {
        let zeta_v = v.germ_coordinate(target, &lambda_u);
        let m = &zeta_v / &zeta_u;
        if let Some(pts) = transport_with_scaling(u, v, &m) {
            return Some(pts);
        }
    }
    None
}

/// The affine map between the intervals, accepted iff it intertwines exactly.
fn affine_candidate(u: &IntervalMap, v: &IntervalMap) -> Option<Vec<(Rat, Rat)>> {
    let s = (&v.q - &v.p) / (&u.q - &u.p);
    let f = |x: &Rat| -> Rat { &v.p + &(&s * &(x - &u.p)) };
    // two PL functions agree on the interval iff they agree on the union of
    // their corner locations and the endpoints
    let mut xs: Vec<Rat> = vec![u.p.clone(), u.q.clone()];
    xs.extend(u.corners.iter().cloned());
    for c in &v.corners {
        xs.push(&u.p + &((c - &v.p) / &s));
    }
    xs.sort();
    xs.dedup();
    for x in &xs {
        if v.map.eval(&f(x)) != f(&u.map.eval(x)) {
            return None;
        }
    }
    Some(vec![
        (u.p.clone(), v.p.clone()),
        (u.q.clone(), v.q.clone()),
    ])
}

/// Builds `f` from the linear germ `f(x) = v.p + m (x - u.p)` by equivariant
/// transport of a fundamental domain, accepting only an exact landing onto
/// the centered linear germ at the attracting end.
fn transport_with_scaling(u: &IntervalMap, v: &IntervalMap, m: &Rat) -> Option<Vec<(Rat, Rat)>> {
    if !m.is_positive() {
        return None;
    }
    let u_germ_hi = u.corners.first().unwrap();
    let v_germ_hi = v.corners.first().unwrap();
    // seed domain end: inside both germs, then one pullback so the seed's
    // image under u stays in the germ
    let mut d0 = u_germ_hi.clone();
    let image_cap = &u.p + &((v_germ_hi - &v.p) / m);
    if image_cap < d0 {
        d0 = image_cap;
    }
    d0 = u.map.eval_inverse(&d0);
    if d0 <= u.p {
        return None;
    }

    let u_last = u.corners.last().unwrap();
    let v_last = v.corners.last().unwrap();

    // fundamental domain [d0, u(d0)]; on it f is the linear germ, and the
    // right endpoint value is forced by equivariance
    let f_d0 = &v.p + &(m * &(&d0 - &u.p));
    let piece_end = u.map.eval(&d0);
    let f_end = v.map.eval(&f_d0);
    let mut piece = Piece {
        pts: vec![(d0.clone(), f_d0), (piece_end, f_end)],
    };

    let mut collected: Vec<(Rat, Rat)> = vec![(u.p.clone(), v.p.clone())];
    let max_steps = 64 + 8 * (u.corners.len() + v.corners.len());
    for _ in 0..max_steps {
        collected.extend(piece.pts.iter().take(piece.pts.len() - 1).cloned());
        // success: the piece sits inside both attracting germs and is the
        // centered linear map there
        if piece.x_lo() > u_last && piece.y_lo() > v_last {
            if piece.is_affine() {
                let a_lo = (piece.y_lo() - &v.q) / (piece.x_lo() - &u.q);
                let a_hi = (piece.y_hi() - &v.q) / (piece.x_hi() - &u.q);
                if a_lo == a_hi {
                    collected.push((u.q.clone(), v.q.clone()));
                    collected.sort_by(|a, b| a.0.cmp(&b.0));
                    collected.dedup();
                    return Some(collected);
                }
            }
            return None; // in the germ but off the centered line: obstructed
        }
        piece = transport_piece(u, v, &piece)?;
    }
    None
}

/// One equivariant step: the graph of `v ∘ f ∘ u^-1` over `[u(x_lo), u(x_hi)]`.
fn transport_piece(u: &IntervalMap, v: &IntervalMap, piece: &Piece) -> Option<Piece> {
    let new_lo = u.map.eval(piece.x_lo());
    let new_hi = u.map.eval(piece.x_hi());
    let mut xs: Vec<Rat> = piece.pts.iter().map(|(x, _)| u.map.eval(x)).collect();
    for c in &u.corners {
        if *c > new_lo && *c < new_hi {
            xs.push(c.clone());
        }
    }
    let (y_lo, y_hi) = (v.map.eval(piece.y_lo()), v.map.eval(piece.y_hi()));
    for c in &v.corners {
        if *c > y_lo && *c < y_hi {
            // x with v(f(u^-1 x)) = corner level
            let inner = piece.eval_inverse(&v.map.eval_inverse(c));
            xs.push(u.map.eval(&inner));
        }
    }
    xs.sort();
    xs.dedup();
    if xs.len() > 4096 {
        return None; // runaway corner growth: not stabilizing
    }
    let pts = xs
        .into_iter()
        .map(|x| {
            let y = v.map.eval(&piece.eval(&u.map.eval_inverse(&x)));
            (x, y)
        })
        .collect();
    Some(Piece { pts })
}

/// Exact PL conjugator between matched north–south maps: `f ∘ w1 = w2 ∘ f`.
pub fn pl_conjugator(w1: &NorthSouthMap, w2: &NorthSouthMap) -> Result<PLMap, EhnError> {
    if w1.lambda != w2.lambda || w1.mu != w2.mu {
        return Err(EhnError::MultiplierMismatch(
            format_rat(&w1.lambda),
            format_rat(&w1.mu),
            format_rat(&w2.lambda),
            format_rat(&w2.mu),
        ));
    }
    let one = Rat::one();
    // representatives: repeller, then attractor, then repeller + 1
    let p1 = w1.repelling.clone();
    let mut q1 = w1.attracting.clone();
    if q1 <= p1 {
        q1 += &one;
    }
    let p2 = w2.repelling.clone();
    let mut q2 = w2.attracting.clone();
    if q2 <= p2 {
        q2 += &one;
    }

    let side_i = conj_interval(
        &IntervalMap::new(w1.map.clone(), p1.clone(), q1.clone()),
        &IntervalMap::new(w2.map.clone(), p2.clone(), q2.clone()),
    )
    .ok_or_else(|| {
        EhnError::TransportStabilization(
            "repeller-to-attractor interval admits no linear-germ conjugator".into(),
        )
    })?;
    // on the complementary interval, the inverses swap the fixed-point roles
    let side_j = conj_interval(
        &IntervalMap::new(w1.map.invert(), q1.clone(), &p1 + &one),
        &IntervalMap::new(w2.map.invert(), q2.clone(), &p2 + &one),
    )
    .ok_or_else(|| {
        EhnError::TransportStabilization(
            "attractor-to-repeller interval admits no linear-germ conjugator".into(),
        )
    })?;

    let mut pts = side_i;
    pts.extend(side_j);
    pts.sort_by(|a, b| a.0.cmp(&b.0));
    pts.dedup();
    // drop the duplicated period endpoint and reduce into [0, 1)
    let reduced: Vec<(Rat, Rat)> = pts
        .into_iter()
        .filter(|(x, _)| x < &(&p1 + &one))
        .map(|(x, y)| {
            let k = rat_floor(&x);
            let kq = Rat::from_integer(k);
            (&x - &kq, &y - &kq)
        })
        .collect();
    let mut reduced = reduced;
    reduced.sort_by(|a, b| a.0.cmp(&b.0));
    let f = PLMap::new(reduced)?;
    let lhs = f.compose(w1.map())?;
    let rhs = w2.map().compose(&f)?;
    if !lhs.pl_equal(&rhs) {
        return Err(EhnError::ConjugacyVerification);
    }
    Ok(f)
}

// ---------------------------------------------------------------------------
// Translations as commutators, and the representation they generate
// ---------------------------------------------------------------------------

/// Smallest integer `K >= 2` whose two-slope profile with multipliers
/// `(K, 1/K)` reaches below `-c`: `(K-1)/(K+1) > c`.
fn commutator_multiplier(c: &Rat) -> BigInt {
    let k = rat_floor(&((Rat::one() + c) / (Rat::one() - c))) + 1;
    if k < BigInt::from(2) {
        BigInt::from(2)
    } else {
        k
    }
}

/// Produces `(f, g)` with `[f, g] = f g f^-1 g^-1 = T_c` exactly,
/// for rational `0 < |c| < 1`.
pub fn translation_as_commutator(c: &Rat) -> Result<(PLMap, PLMap), EhnError> {
    if c.is_zero() {
        return Err(EhnError::InvalidParameter(
            "c = 0 is the identity, not a useful commutator target".into(),
        ));
    }
    if c.abs() >= Rat::one() {
        return Err(EhnError::CommutatorObstruction(format_rat(c)));
    }
    if c.is_negative() {
        // [g, f] = [f, g]^-1
        let (f, g) = translation_as_commutator(&-c.clone())?;
        return Ok((g, f));
    }
    let k = commutator_multiplier(c);
    let lambda = Rat::from_integer(k.clone());
    let mu = Rat::from_integer(k).recip();
    let pair = north_south_pair(c, &lambda, &mu)?;
    let f = pl_conjugator(&pair.g, &pair.h)?;
    let g = pair.g.map().clone();
    // postcondition: the commutator is exactly T_c
    let comm = f
        .compose(&g)?
        .compose(&f.invert())?
        .compose(&g.invert())?;
    if !comm.pl_equal(&PLMap::translation(c)) {
        return Err(EhnError::ConjugacyVerification);
    }
    Ok((f, g))
}

/// Metadata recorded with a representation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepMeta {
    pub ell: u32,
    pub lambda: Rat,
    pub mu: Rat,
    pub c: Rat,
}

/// An exact PL circle representation given on generators, with canonical
/// lifts (value at 0 in `[0, 1)`, extension coordinate 0).
#[derive(Debug, Clone)]
pub struct Representation {
    gens: BTreeMap<Generator, LiftedMapR>,
    pub meta: RepMeta,
}

impl Representation {
    pub fn from_generators(gens: BTreeMap<Generator, LiftedMapR>, meta: RepMeta) -> Self {
        Representation { gens, meta }
    }

    pub fn generators(&self) -> &BTreeMap<Generator, LiftedMapR> {
        &self.gens
    }

    pub fn bindings(&self) -> MapBindings {
        self.gens
            .iter()
            .map(|(g, l)| (g.clone(), l.map().clone()))
            .collect()
    }

    /// The same pair of maps bound to every handle `a_i, b_i` of the
    /// genus-`ell` alphabet (the pullback along `a_i -> a, b_i -> b`).
    pub fn surface_pullback(&self) -> Representation {
        let a = self.gens.get(&gen_a()).expect("generator a").clone();
        let b = self.gens.get(&gen_b()).expect("generator b").clone();
        let mut gens = BTreeMap::new();
        for i in 1..=self.meta.ell {
            gens.insert(Generator::indexed("a", i), a.clone());
            gens.insert(Generator::indexed("b", i), b.clone());
        }
        Representation {
            gens,
            meta: self.meta.clone(),
        }
    }
}

/// Builds the representation of `<a, b | [a,b]^ell>`: `a` and `b` act by the
/// exact commutator pair for `T_{(ell-1)/ell}`. The relator's circle image is
/// verified to be the identity, its lift the integer translation `T_{ell-1}`.
pub fn build_rep_onerelator(ell: u32) -> Result<Representation, EhnError> {
    if ell < 2 {
        return Err(EhnError::InvalidParameter(format!(
            "torsion exponent must be at least 2, got {ell}"
        )));
    }
    let c = Rat::new(BigInt::from(ell - 1), BigInt::from(ell));
    let (f, g) = translation_as_commutator(&c)?;
    let lifted_f = LiftedMapR::from_map(f.clone());
    let lifted_g = LiftedMapR::from_map(g.clone());
    let mut gens = BTreeMap::new();
    gens.insert(gen_a(), lifted_f);
    gens.insert(gen_b(), lifted_g);
    let k = commutator_multiplier(&c);
    let rep = Representation {
        gens,
        meta: RepMeta {
            ell,
            lambda: Rat::from_integer(k.clone()),
            mu: Rat::from_integer(k).recip(),
            c: c.clone(),
        },
    };
    // well-definedness: the lifted relator is exactly T_{ell-1}
    let relator = commutator(&Word::generator(gen_a()), &Word::generator(gen_b()))
        .pow(ell as i64);
    let lifted = crate::circle::word_compose(
        &rep.bindings(),
        &relator,
        DEFAULT_BREAKPOINT_BUDGET,
    )?;
    let expect = PLMap::translation(&rat_int(ell as i64 - 1));
    if !lifted.pl_equal(&expect) || !lifted.circle_equal(&PLMap::identity()) {
        return Err(EhnError::ConjugacyVerification);
    }
    Ok(rep)
}

// ---------------------------------------------------------------------------
// Commutator-length bounds from displacement
// ---------------------------------------------------------------------------

/// Certified commutator-length upper bound from the displacement extrema.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClBound {
    /// Least `n >= 1` with `m_lower < 2n - 1` and `m_upper > 1 - 2n`.
    pub n: BigInt,
    pub m_lower: Rat,
    pub m_upper: Rat,
    /// Whether the single-commutator window `(-1, 1)` test passes.
    pub single_commutator: bool,
}

/// Least `n` certified by the displacement criterion: an upper bound for the
/// commutator length of the lift.
pub fn cl_bound_ehn(f: &PLMap) -> ClBound {
    let (lo, hi) = f.displacement_extrema();
    let one = Rat::one();
    let two = rat_int(2);
    // smallest integer strictly above (lo + 1)/2 resp. (1 - hi)/2
    let n_lo = rat_floor(&((&lo + &one) / &two)) + 1;
    let n_hi = rat_floor(&((&one - &hi) / &two)) + 1;
    let mut n = n_lo.max(n_hi);
    if n < BigInt::one() {
        n = BigInt::one();
    }
    let single = lo < one && hi > -one;
    ClBound {
        n,
        m_lower: lo,
        m_upper: hi,
        single_commutator: single,
    }
}

/// Variant for extension elements; the extension coordinate must vanish.
pub fn cl_bound_ehn_lifted(e: &LiftedMapR) -> Result<ClBound, EhnError> {
    if !e.r().is_zero() {
        return Err(EhnError::InvalidParameter(
            "commutator-length bound requires extension coordinate r = 0".into(),
        ));
    }
    Ok(cl_bound_ehn(e.map()))
}

// ---------------------------------------------------------------------------
// Representation JSON
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct RepJson {
    kind: String,
    ell: u32,
    lambda: String,
    mu: String,
    c: String,
    generators: BTreeMap<String, LiftedMapR>,
}

impl Serialize for Representation {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RepJson {
            kind: "exact-pl".into(),
            ell: self.meta.ell,
            lambda: format_rat(&self.meta.lambda),
            mu: format_rat(&self.meta.mu),
            c: format_rat(&self.meta.c),
            generators: self
                .gens
                .iter()
                .map(|(g, l)| (g.to_string(), l.clone()))
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Representation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = RepJson::deserialize(d)?;
        if raw.kind != "exact-pl" {
            return Err(D::Error::custom(format!(
                "unsupported representation kind `{}`",
                raw.kind
            )));
        }
        let mut gens = BTreeMap::new();
        for (name, lifted) in raw.generators {
            gens.insert(Generator::parse_token(&name), lifted);
        }
        Ok(Representation {
            gens,
            meta: RepMeta {
                ell: raw.ell,
                lambda: parse_rat(&raw.lambda).map_err(D::Error::custom)?,
                mu: parse_rat(&raw.mu).map_err(D::Error::custom)?,
                c: parse_rat(&raw.c).map_err(D::Error::custom)?,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::{tau_estimate, word_compose};
    use crate::ratio::rat;
    use crate::word::parse_word;

    #[test]
    fn two_slope_pair_structure() {
        // (c, lambda, mu) = (1/4, 2, 1/2): feasible for the two-slope profile
        let pair = north_south_pair(&rat(1, 4), &rat(2, 1), &rat(1, 2)).unwrap();
        assert_eq!(pair.g.multipliers(), (&rat(2, 1), &rat(1, 2)));
        assert_eq!(pair.g.repelling(), &rat(0, 1));
        assert_eq!(pair.h.multipliers(), (&rat(2, 1), &rat(1, 2)));
        // both have translation number zero via the fixed-point shortcut
        assert_eq!(tau_estimate(pair.g.map(), 4).center, rat(0, 1));
        assert!(tau_estimate(pair.g.map(), 4).is_exact());
        assert!(tau_estimate(pair.h.map(), 4).is_exact());
    }

    #[test]
    fn six_segment_pair_structure() {
        // (2/3, 2, 1/2) is out of reach for the two-slope profile
        let pair = north_south_pair(&rat(2, 3), &rat(2, 1), &rat(1, 2)).unwrap();
        let (lo, hi) = pair.g.map().displacement_extrema();
        assert!(lo < rat(-2, 3) && lo < rat(0, 1));
        assert!(hi > rat(0, 1));
        assert_eq!(pair.g.multipliers(), (&rat(2, 1), &rat(1, 2)));
        assert_eq!(pair.h.multipliers(), (&rat(2, 1), &rat(1, 2)));
        // exactly two fixed points each, read off by the exact scan
        assert_eq!(pair.g.map().fixed_points().unwrap().len(), 2);
        assert_eq!(pair.h.map().fixed_points().unwrap().len(), 2);
    }

    #[test]
    fn parameter_validation() {
        assert!(north_south_pair(&rat(0, 1), &rat(2, 1), &rat(1, 2)).is_err());
        assert!(north_south_pair(&rat(1, 2), &rat(1, 1), &rat(1, 2)).is_err());
        assert!(north_south_pair(&rat(1, 2), &rat(2, 1), &rat(3, 2)).is_err());
    }

    #[test]
    fn conjugator_on_identical_pair() {
        let pair = north_south_pair(&rat(1, 4), &rat(4, 1), &rat(1, 4)).unwrap();
        let f = pl_conjugator(&pair.g, &pair.g).unwrap();
        // any conjugator of a map with itself must commute with it; the
        // affine candidate is the identity here
        assert!(f
            .compose(pair.g.map())
            .unwrap()
            .pl_equal(&pair.g.map().compose(&f).unwrap()));
    }

    #[test]
    fn conjugator_multiplier_mismatch() {
        let p1 = north_south_pair(&rat(1, 4), &rat(4, 1), &rat(1, 4)).unwrap();
        let p2 = north_south_pair(&rat(1, 4), &rat(3, 1), &rat(1, 3)).unwrap();
        assert!(matches!(
            pl_conjugator(&p1.g, &p2.g),
            Err(EhnError::MultiplierMismatch(..))
        ));
    }

    #[test]
    fn translation_as_commutator_small() {
        for (num, den) in [(1i64, 2i64), (2, 3), (1, 3), (3, 4), (9, 10)] {
            let c = rat(num, den);
            let (f, g) = translation_as_commutator(&c).unwrap();
            let comm = f
                .compose(&g)
                .unwrap()
                .compose(&f.invert())
                .unwrap()
                .compose(&g.invert())
                .unwrap();
            assert!(
                comm.pl_equal(&PLMap::translation(&c)),
                "commutator mismatch at c = {num}/{den}"
            );
        }
    }

    #[test]
    fn translation_as_commutator_negative() {
        let c = rat(-2, 3);
        let (f, g) = translation_as_commutator(&c).unwrap();
        let comm = f
            .compose(&g)
            .unwrap()
            .compose(&f.invert())
            .unwrap()
            .compose(&g.invert())
            .unwrap();
        assert!(comm.pl_equal(&PLMap::translation(&c)));
    }

    #[test]
    fn translation_obstruction() {
        assert!(matches!(
            translation_as_commutator(&rat(3, 2)),
            Err(EhnError::CommutatorObstruction(_))
        ));
        assert!(translation_as_commutator(&rat(0, 1)).is_err());
    }

    #[test]
    fn representation_well_defined() {
        for ell in [2u32, 3, 5] {
            let rep = build_rep_onerelator(ell).unwrap();
            let relator = commutator(&Word::generator(gen_a()), &Word::generator(gen_b()))
                .pow(ell as i64);
            let lifted = word_compose(&rep.bindings(), &relator, 100_000).unwrap();
            assert!(lifted.pl_equal(&PLMap::translation(&rat(ell as i64 - 1, 1))));
            // the designated lifts satisfy [alpha, beta] = T_{(ell-1)/ell}
            let comm = commutator(&Word::generator(gen_a()), &Word::generator(gen_b()));
            let m = word_compose(&rep.bindings(), &comm, 100_000).unwrap();
            assert!(m.pl_equal(&PLMap::translation(&rat(ell as i64 - 1, ell as i64))));
        }
    }

    #[test]
    fn representation_json_round_trip() {
        let rep = build_rep_onerelator(3).unwrap();
        let text = serde_json::to_string_pretty(&rep).unwrap();
        let back: Representation = serde_json::from_str(&text).unwrap();
        assert_eq!(back.meta, rep.meta);
        for (g, l) in rep.generators() {
            assert_eq!(back.generators().get(g).unwrap(), l);
        }
    }

    #[test]
    fn surface_pullback_binds_all_handles() {
        let rep = build_rep_onerelator(2).unwrap();
        let s = rep.surface_pullback();
        assert_eq!(s.generators().len(), 4);
        let alpha = rep.generators().get(&gen_a()).unwrap();
        for i in 1..=2 {
            assert_eq!(s.generators().get(&Generator::indexed("a", i)).unwrap(), alpha);
        }
    }

    #[test]
    fn cl_bounds() {
        // T_{(ell-1)/ell} is a single commutator for every ell
        for ell in 2..=10i64 {
            let b = cl_bound_ehn(&PLMap::translation(&rat(ell - 1, ell)));
            assert_eq!(b.n, BigInt::one());
            assert!(b.single_commutator);
        }
        let b = cl_bound_ehn(&PLMap::translation(&rat(5, 2)));
        assert_eq!(b.n, BigInt::from(2));
        assert!(!b.single_commutator);
        let b = cl_bound_ehn(&PLMap::identity());
        assert_eq!(b.n, BigInt::one());
        // monotone under integer shifts: bound grows by at most one per T_2
        let pair = north_south_pair(&rat(1, 2), &rat(4, 1), &rat(1, 4)).unwrap();
        let base = cl_bound_ehn(pair.g.map());
        let shifted = cl_bound_ehn(&pair.g.map().add_integer(&BigInt::from(2)));
        assert!(shifted.n <= &base.n + BigInt::one());
        // lifted variant rejects a nonzero extension coordinate
        let e = LiftedMapR::new(PLMap::identity(), rat(1, 2));
        assert!(cl_bound_ehn_lifted(&e).is_err());
    }

    #[test]
    fn conjugated_pair_needs_transport() {
        // conjugating h by an extra PL map breaks the affine alignment while
        // keeping multipliers; the transport search must still find the
        // conjugator (the composed one) exactly
        let pair = north_south_pair(&rat(1, 2), &rat(4, 1), &rat(1, 4)).unwrap();
        let s = PLMap::new(vec![(rat(0, 1), rat(0, 1)), (rat(1, 2), rat(3, 4))]).unwrap();
        let twisted = s
            .compose(pair.h.map())
            .unwrap()
            .compose(&s.invert())
            .unwrap();
        let w2 = NorthSouthMap::analyze(twisted.clone()).unwrap();
        let f = pl_conjugator(&pair.g, &w2).unwrap();
        assert!(f
            .compose(pair.g.map())
            .unwrap()
            .pl_equal(&twisted.compose(&f).unwrap()));
    }

    #[test]
    fn obstructed_pair_reports_stabilization_failure() {
        // the six-segment pair has mismatched corner structure across its
        // fixed-point intervals; the conjugator must refuse honestly
        let pair = north_south_pair(&rat(2, 3), &rat(2, 1), &rat(1, 2)).unwrap();
        match pl_conjugator(&pair.g, &pair.h) {
            Err(EhnError::TransportStabilization(_)) => {}
            Ok(f) => {
                // if a conjugator is found it must verify exactly
                assert!(f
                    .compose(pair.g.map())
                    .unwrap()
                    .pl_equal(&pair.h.map().compose(&f).unwrap()));
            }
            Err(e) => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn rep_word_images() {
        let rep = build_rep_onerelator(3);
        let rep = rep.unwrap();
        let w = parse_word("[a,b]", &crate::word::rank2_alphabet()).unwrap();
        let m = word_compose(&rep.bindings(), &w, 100_000).unwrap();
        assert_eq!(m.translation_offset(), Some(rat(2, 3)));
    }
}
