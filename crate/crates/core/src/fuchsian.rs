//! Floating-point shadow of the hyperbolic surface-group action on the
//! circle.
//!
//! This module is deliberately quarantined from the exact core: everything
//! here runs on doubles, no certificate ever cites its numbers. It builds a
//! Fuchsian representation of the genus-`ell` surface group from the regular
//! `4 ell`-gon axis pattern (one boost length, solved numerically so the
//! relator closes up), acts on the boundary circle through the projective
//! line, and estimates translation numbers by angle-unwrapped iteration.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::word::{Generator, Word};

#[derive(Debug, Error, PartialEq)]
pub enum FuchsError {
    #[error("generator `{0}` is not bound to a matrix")]
    Unbound(String),
    #[error("no parameter bracket closes the relator")]
    BracketNotFound,
    #[error("relator residual {0:e} exceeds tolerance")]
    ResidualTooLarge(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Element of `PSL(2, R)` acting on the boundary circle, stored as a real
/// 2x2 matrix of determinant 1 (up to sign, both matrices act identically).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobiusMap {
    pub m: [[f64; 2]; 2],
}

impl MobiusMap {
    pub fn identity() -> Self {
        MobiusMap {
            m: [[1.0, 0.0], [0.0, 1.0]],
        }
    }

    /// Normalizes the determinant to 1; rejects near-singular input.
    pub fn new(m: [[f64; 2]; 2]) -> Result<Self, FuchsError> {
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if det <= 0.0 || !det.is_finite() {
            return Err(FuchsError::InvalidParameter(format!(
                "matrix determinant {det} must be positive"
            )));
        }
        let s = det.sqrt();
        Ok(MobiusMap {
            m: [
                [m[0][0] / s, m[0][1] / s],
                [m[1][0] / s, m[1][1] / s],
            ],
        })
    }

    /// Circle rotation by `angle` radians: the boundary action shifts the
    /// circle coordinate by `angle / 2 pi`.
    pub fn rotation(angle: f64) -> Self {
        let h = -angle / 2.0;
        MobiusMap {
            m: [[h.cos(), -h.sin()], [h.sin(), h.cos()]],
        }
    }

    /// Hyperbolic translation along the imaginary axis with trace
    /// `2 cosh(t/2)`.
    pub fn boost(t: f64) -> Self {
        MobiusMap {
            m: [[(t / 2.0).exp(), 0.0], [0.0, (-t / 2.0).exp()]],
        }
    }

    pub fn mul(&self, other: &MobiusMap) -> MobiusMap {
        let a = &self.m;
        let b = &other.m;
        MobiusMap {
            m: [
                [
                    a[0][0] * b[0][0] + a[0][1] * b[1][0],
                    a[0][0] * b[0][1] + a[0][1] * b[1][1],
                ],
                [
                    a[1][0] * b[0][0] + a[1][1] * b[1][0],
                    a[1][0] * b[0][1] + a[1][1] * b[1][1],
                ],
            ],
        }
    }

    pub fn inverse(&self) -> MobiusMap {
        let a = &self.m;
        MobiusMap {
            m: [[a[1][1], -a[0][1]], [-a[1][0], a[0][0]]],
        }
    }

    pub fn trace(&self) -> f64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn det(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn is_hyperbolic(&self) -> bool {
        self.trace().abs() > 2.0
    }

    /// Distance to the nearest of `I` and `-I` in max norm.
    pub fn residual_to_identity(&self) -> f64 {
        let dist = |s: f64| -> f64 {
            let mut d: f64 = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    let target = if i == j { s } else { 0.0 };
                    d = d.max((self.m[i][j] - target).abs());
                }
            }
            d
        };
        dist(1.0).min(dist(-1.0))
    }

    /// Action on the circle `R/Z` through the projective line,
    /// `x -> atan(mobius(tan(pi (x - 1/2)))) / pi + 1/2`; input and output in
    /// `[0, 1)`.
    pub fn act_circle(&self, x: f64) -> f64 {
        let x = x - x.floor();
        let phi = std::f64::consts::PI * (x - 0.5);
        let (s, c) = phi.sin_cos();
        // projective action on the direction vector (c, s)
        let num = self.m[0][0] * s + self.m[0][1] * c;
        let den = self.m[1][0] * s + self.m[1][1] * c;
        let out = num.atan2(den) / std::f64::consts::PI + 0.5;
        let out = out - out.floor();
        if out >= 1.0 {
            0.0
        } else {
            out
        }
    }
}

/// Lift of the circle action normalized so that the value at 0 lies in
/// `[0, 1)`; evaluation unwraps across the jump of the mod-1 action.
fn lift_eval(map: &MobiusMap, x: f64) -> f64 {
    let k = x.floor();
    let t = x - k;
    let f0 = map.act_circle(0.0);
    let raw = map.act_circle(t);
    let lifted = if raw < f0 { raw + 1.0 } else { raw };
    lifted + k
}

/// A numeric representation bound on generators.
#[derive(Debug, Clone)]
pub struct FuchsRep {
    pub gens: BTreeMap<Generator, MobiusMap>,
    pub ell: u32,
    /// The boost length the relator solve converged to.
    pub boost_length: f64,
    /// Residual of the relator image against the identity.
    pub relator_residual: f64,
}

const RELATOR_TOLERANCE: f64 = 1e-9;

fn generators_for(ell: u32, t: f64) -> (Vec<MobiusMap>, Vec<MobiusMap>) {
    let step = std::f64::consts::PI / ell as f64;
    let boost = MobiusMap::boost(t);
    let mut a = Vec::new();
    let mut b = Vec::new();
    for i in 0..ell {
        let ta = step * i as f64;
        let tb = ta + step / 2.0;
        let ra = MobiusMap::rotation(ta);
        let rb = MobiusMap::rotation(tb);
        a.push(ra.mul(&boost).mul(&ra.inverse()));
        b.push(rb.mul(&boost).mul(&rb.inverse()));
    }
    (a, b)
}

fn relator_product(ell: u32, t: f64) -> MobiusMap {
    let (a, b) = generators_for(ell, t);
    let mut f = MobiusMap::identity();
    for i in 0..ell as usize {
        let comm = a[i]
            .mul(&b[i])
            .mul(&a[i].inverse())
            .mul(&b[i].inverse());
        f = f.mul(&comm);
    }
    f
}

/// Signed elliptic half-angle of an SL(2) matrix; zero at `±I` and at
/// parabolic or hyperbolic elements.
fn signed_angle(m: &MobiusMap) -> f64 {
    let tr = m.trace().abs().min(2.0);
    let mag = (tr / 2.0).clamp(-1.0, 1.0).acos();
    let sign = (m.m[1][0] - m.m[0][1]) * m.trace().signum();
    if sign < 0.0 {
        -mag
    } else {
        mag
    }
}

/// Builds the Fuchsian representation of the genus-`ell` surface group:
/// `2 ell` boosts whose axes fan out at angle `pi / (2 ell)` steps, with the
/// common boost length solved by bisection until the relator closes up.
pub fn fuchsian_rep(ell: u32) -> Result<FuchsRep, FuchsError> {
    if ell < 2 {
        return Err(FuchsError::InvalidParameter(format!(
            "genus must be at least 2, got {ell}"
        )));
    }
    // scan for a sign change of the relator's elliptic angle away from the
    // trivial zero at t = 0
    let f = |t: f64| signed_angle(&relator_product(ell, t));
    let mut bracket = None;
    let mut prev_t = 0.2;
    let mut prev = f(prev_t);
    let mut t = prev_t;
    while t < 12.0 {
        t += 0.05;
        let cur = f(t);
        if prev != 0.0 && cur != 0.0 && (prev < 0.0) != (cur < 0.0) {
            bracket = Some((prev_t, t));
            break;
        }
        prev_t = t;
        prev = cur;
    }
    let (mut lo, mut hi) = bracket.ok_or(FuchsError::BracketNotFound)?;
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    let t_star = 0.5 * (lo + hi);
    let residual = relator_product(ell, t_star).residual_to_identity();
    if residual > RELATOR_TOLERANCE {
        return Err(FuchsError::ResidualTooLarge(residual));
    }
    let (a, b) = generators_for(ell, t_star);
    let mut gens = BTreeMap::new();
    for i in 0..ell {
        gens.insert(Generator::indexed("a", i + 1), a[i as usize]);
        gens.insert(Generator::indexed("b", i + 1), b[i as usize]);
    }
    Ok(FuchsRep {
        gens,
        ell,
        boost_length: t_star,
        relator_residual: residual,
    })
}

/// A numeric translation-number estimate with its reported uncertainty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauNumeric {
    pub estimate: f64,
    pub uncertainty: f64,
}

/// Angle-unwrapped iteration of the lifted word action started at 0:
/// estimate `f^N(0)/N`, uncertainty `1/N` plus a float-drift allowance.
pub fn tau_numeric(
    gens: &BTreeMap<Generator, MobiusMap>,
    w: &Word,
    iters: u64,
) -> Result<TauNumeric, FuchsError> {
    assert!(iters >= 1);
    // pre-resolve letters to matrices (inverse letters get inverse matrices)
    let mut letters: Vec<MobiusMap> = Vec::new();
    for (g, e) in w.blocks().iter().rev() {
        let m = gens
            .get(g)
            .ok_or_else(|| FuchsError::Unbound(g.to_string()))?;
        let step = if *e > 0 { *m } else { m.inverse() };
        for _ in 0..e.unsigned_abs() {
            letters.push(step);
        }
    }
    let mut x = 0.0_f64;
    for _ in 0..iters {
        for m in &letters {
            x = lift_eval(m, x);
        }
    }
    let drift = 1e-12 * (iters as f64) * (letters.len().max(1) as f64);
    Ok(TauNumeric {
        estimate: x / iters as f64,
        uncertainty: 1.0 / iters as f64 + drift,
    })
}

/// One row of the numeric growth table.
#[derive(Debug, Clone, Copy)]
pub struct NumericRow {
    pub n: u64,
    pub mu: f64,
    pub uncertainty: f64,
}

/// Least-squares affine fit diagnostics.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct AffineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn affine_fit(rows: &[(f64, f64)]) -> AffineFit {
    let n = rows.len() as f64;
    let sx: f64 = rows.iter().map(|(x, _)| x).sum();
    let sy: f64 = rows.iter().map(|(_, y)| y).sum();
    let sxx: f64 = rows.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = rows.iter().map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let mean = sy / n;
    let ss_tot: f64 = rows.iter().map(|(_, y)| (y - mean) * (y - mean)).sum();
    let ss_res: f64 = rows
        .iter()
        .map(|(x, y)| {
            let p = slope * x + intercept;
            (y - p) * (y - p)
        })
        .sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    AffineFit {
        slope,
        intercept,
        r2,
    }
}

/// Numeric growth report: minus the translation number of the re-indexed
/// mixed-commutator expansions under the Fuchsian action, with an affine fit
/// in `n`.
pub fn mu_numeric_report(
    rep: &FuchsRep,
    n_range: impl IntoIterator<Item = u64>,
    iters: u64,
) -> Result<(Vec<NumericRow>, AffineFit), FuchsError> {
    let words = crate::qm::surface_expansion_words(rep.ell)
        .map_err(|e| FuchsError::InvalidParameter(e.to_string()))?;
    let mut rows = Vec::new();
    for n in n_range {
        let w = words(n);
        let tau = tau_numeric(&rep.gens, &w, iters)?;
        rows.push(NumericRow {
            n,
            mu: -tau.estimate,
            uncertainty: tau.uncertainty,
        });
    }
    let fit = affine_fit(
        &rows
            .iter()
            .map(|r| (r.n as f64, r.mu))
            .collect::<Vec<_>>(),
    );
    Ok((rows, fit))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::{commutator, parse_word, surface_alphabet};

    #[test]
    fn rotation_action_is_rigid() {
        let theta = 0.7368;
        let r = MobiusMap::rotation(theta);
        let tau = tau_numeric(
            &[(Generator::indexed("a", 1), r)].into_iter().collect(),
            &Word::generator(Generator::indexed("a", 1)),
            512,
        )
        .unwrap();
        let expect = theta / (2.0 * std::f64::consts::PI);
        assert!((tau.estimate - expect).abs() < 1e-6, "{}", tau.estimate);
    }

    #[test]
    fn boost_fixes_boundary_points() {
        let b = MobiusMap::boost(1.3);
        assert!(b.is_hyperbolic());
        let tau = tau_numeric(
            &[(Generator::indexed("a", 1), b)].into_iter().collect(),
            &Word::generator(Generator::indexed("a", 1)),
            256,
        )
        .unwrap();
        assert!(tau.estimate.abs() < 1e-6);
    }

    #[test]
    fn fuchsian_rep_closes_relator() {
        for ell in [2u32, 3] {
            let rep = fuchsian_rep(ell).unwrap();
            assert!(rep.relator_residual < 1e-9, "residual {}", rep.relator_residual);
            for m in rep.gens.values() {
                assert!(m.is_hyperbolic());
                assert!((m.det() - 1.0).abs() < 1e-12);
            }
            // lifted relator acts as an integer translation
            let alphabet = surface_alphabet(ell);
            let mut text = String::new();
            for i in 1..=ell {
                text.push_str(&format!("[a{i},b{i}]"));
            }
            let w = parse_word(&text, &alphabet).unwrap();
            let mut x = 0.37_f64;
            let start = x;
            for (g, e) in w.blocks().iter().rev() {
                let m = rep.gens.get(g).unwrap();
                let step = if *e > 0 { *m } else { m.inverse() };
                for _ in 0..e.unsigned_abs() {
                    x = lift_eval(&step, x);
                }
            }
            let disp = x - start;
            assert!(
                (disp - disp.round()).abs() < 1e-6,
                "relator displacement {disp}"
            );
        }
    }

    #[test]
    fn single_commutator_value_bounded() {
        let rep = fuchsian_rep(2).unwrap();
        let w = commutator(
            &Word::generator(Generator::indexed("a", 1)),
            &Word::generator(Generator::indexed("b", 1)),
        );
        let tau = tau_numeric(&rep.gens, &w, 1024).unwrap();
        assert!(tau.estimate.abs() <= 1.0 + 1e-3);
    }

    #[test]
    fn conjugation_stability() {
        let rep = fuchsian_rep(2).unwrap();
        let alphabet = surface_alphabet(2);
        let w = parse_word("[a1,b1]", &alphabet).unwrap();
        let conj = parse_word("c(b2 a1, [a1,b1])", &alphabet).unwrap();
        let t1 = tau_numeric(&rep.gens, &w, 1024).unwrap();
        let t2 = tau_numeric(&rep.gens, &conj, 1024).unwrap();
        assert!((t1.estimate - t2.estimate).abs() <= 2.0 * (t1.uncertainty + t2.uncertainty));
    }

    #[test]
    fn affine_fit_recovers_line() {
        let pts: Vec<(f64, f64)> = (1..=10).map(|i| (i as f64, 3.0 * i as f64 - 0.5)).collect();
        let fit = affine_fit(&pts);
        assert!((fit.slope - 3.0).abs() < 1e-12);
        assert!((fit.intercept + 0.5).abs() < 1e-12);
        assert!(fit.r2 > 0.999999);
    }
}
