//! Closed approximation and sup-norm bounded primitives on cubes.
//!
//! Both constructions share one recursion over the ambient dimension. Write
//! `w = w1 ∧ dx^n + w2` and pick a base value `τ` of the last coordinate.
//! With `P = (-1)^{k+1} ∫_τ^{x^n} w1`:
//!
//! * the standard primitive of a closed `w` is `P + θ'`, where `θ'` is the
//!   standard primitive of the face form `w2(τ)`;
//! * the closed approximation of any `w` is `dP + w̃`, where `w̃` is the closed
//!   approximation of `w2(τ)` on the face.
//!
//! The defect of the closed approximation is
//! `w - w' = (-1)^k ∫_τ^{x^n} (dw)_1 + (w2(τ) - w̃)`, which is what the
//! constant ledger `C(n, k) = 2 max(1, C(n-1, k))` bounds.

use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::cube::Cube;
use crate::error::{Error, Result};
use crate::form::PolyForm;
use crate::rational::{self, Rational, RationalJson};
use crate::supnorm::{self, NormBound, NormBoundJson};

/// Unit-cube constant of the closed approximation inequality
/// `|w - w'| <= C(n, k) |dw|`.
pub fn constant(n: usize, k: usize) -> Rational {
    assert!(n >= 1, "ambient dimension must be at least 1");
    if k >= n {
        Rational::zero()
    } else if n == 1 {
        Rational::one()
    } else {
        rational::int(2) * rational::max(&Rational::one(), &constant(n - 1, k))
    }
}

/// The same ledger on a cube whose longest edge is `L`: fiber integrals
/// over an edge of length `L` cost a factor `L` instead of 1.
pub fn cube_constant(cube: &Cube, k: usize) -> Rational {
    fn rec(n: usize, k: usize, len: &Rational) -> Rational {
        if k >= n {
            Rational::zero()
        } else if n == 1 {
            len.clone()
        } else {
            rational::int(2) * rational::max(len, &rec(n - 1, k, len))
        }
    }
    rec(cube.dim(), k, &cube.max_length())
}

/// Midpoint of the `coord`-th edge (0-based).
pub fn choose_tau(cube: &Cube, coord: usize) -> Result<Rational> {
    if coord >= cube.dim() {
        return Err(Error::CoordinateOutOfRange {
            coord: coord + 1,
            dim: cube.dim(),
        });
    }
    Ok(cube.midpoint(coord))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TauRule {
    Midpoint,
    /// Try `candidates + 1` equally spaced values per level and keep the one
    /// minimizing the bound of `|d'w2(τ)|`; the final answer is never worse
    /// than the midpoint answer.
    Scan { candidates: usize },
}

#[derive(Debug, Clone)]
pub struct PoincareOptions {
    pub tau: TauRule,
    /// Sample grid for the lower bounds.
    pub grid_per_axis: usize,
    /// Bisection levels used for upper bounds (raised up to
    /// `max_subdivision` if a certificate does not verify).
    pub subdivision: u32,
    pub max_subdivision: u32,
    pub record_trace: bool,
}

impl Default for PoincareOptions {
    fn default() -> Self {
        PoincareOptions {
            tau: TauRule::Midpoint,
            grid_per_axis: 3,
            subdivision: 0,
            max_subdivision: 2,
            record_trace: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Inequality {
    /// `|w - w'| <= C |dw|`
    #[serde(rename = "closed_approx")]
    ClosedApprox,
    /// `|θ| <= C |w|`
    #[serde(rename = "bounded_primitive")]
    BoundedPrimitive,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormCertificate {
    pub inequality: Inequality,
    pub dim: usize,
    pub degree: usize,
    /// `|dw|` for the closed approximation, `|w|` for the primitive.
    pub norm_input: NormBound,
    pub norm_output: NormBound,
    pub constant_used: Rational,
    /// `|w - w'|`, closed approximation only.
    pub defect_norm: Option<NormBound>,
    pub subdivision: u32,
    pub verified: bool,
}

impl NormCertificate {
    /// The bounded quantity: the defect or the primitive's norm.
    pub fn lhs(&self) -> &NormBound {
        match self.inequality {
            Inequality::ClosedApprox => self.defect_norm.as_ref().unwrap_or(&self.norm_output),
            Inequality::BoundedPrimitive => &self.norm_output,
        }
    }

    pub fn rhs(&self) -> Rational {
        &self.constant_used * &self.norm_input.upper
    }

    fn check(&self) -> bool {
        self.lhs().upper <= self.rhs()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    pub verified: bool,
    /// True when even `lhs.upper <= C * rhs.lower` holds, i.e. the bound is a
    /// proof of the inequality rather than a comparison of upper bounds.
    pub rigorous: bool,
    pub message: String,
}

/// Recomputes a certificate's inequality from its stored bounds.
pub fn verify_certificate(cert: &NormCertificate) -> VerificationReport {
    let (lhs_name, rhs_name) = match cert.inequality {
        Inequality::ClosedApprox => ("|w - w'|", "|dw|"),
        Inequality::BoundedPrimitive => ("|theta|", "|w|"),
    };
    let lhs = cert.lhs();
    let rhs = cert.rhs();
    let mut problems = Vec::new();
    for (name, b) in [(lhs_name, lhs), (rhs_name, &cert.norm_input)] {
        if b.lower > b.upper {
            problems.push(format!(
                "{name}: lower bound {} exceeds upper bound {}",
                rational::format(&b.lower),
                rational::format(&b.upper)
            ));
        }
    }
    let holds = lhs.upper <= rhs;
    let rigorous = holds && lhs.upper <= &cert.constant_used * &cert.norm_input.lower;
    let relation = if holds { "<=" } else { "> (VIOLATED)" };
    let mut message = format!(
        "{lhs_name} <= {} {relation} {} = C * {rhs_name} (C = {}, {rhs_name} <= {})",
        rational::format(&lhs.upper),
        rational::format(&rhs),
        rational::format(&cert.constant_used),
        rational::format(&cert.norm_input.upper),
    );
    if !holds {
        message.push_str(&format!(
            " [{} certificate, n = {}, k = {}; upper bounds at subdivision {}: a failure may be a bound-tightness artifact if {} < {}]",
            match cert.inequality {
                Inequality::ClosedApprox => "closed_approx",
                Inequality::BoundedPrimitive => "bounded_primitive",
            },
            cert.dim,
            cert.degree,
            cert.subdivision,
            rational::format(&lhs.lower),
            rational::format(&rhs),
        ));
    }
    for p in &problems {
        message.push_str("; ");
        message.push_str(p);
    }
    VerificationReport {
        verified: holds && problems.is_empty(),
        rigorous: rigorous && problems.is_empty(),
        message,
    }
}

impl fmt::Display for NormCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", verify_certificate(self).message)
    }
}

/// One level of the dimension recursion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelRecord {
    pub dim: usize,
    pub degree: usize,
    /// `None` for the `k >= n` base case, which needs no base point.
    pub tau: Option<Rational>,
    /// Length of the last edge at this level.
    pub edge: Rational,
    /// `|(dw)_1|_I`
    pub dw1: Option<NormBound>,
    /// `|(dw)_2|_I = |d'w2|_I`
    pub dw2: Option<NormBound>,
    /// `|d'w2(τ)|_{I'}`
    pub dw2_tau: Option<NormBound>,
    /// `|∫_τ^{x^n} (dw)_1|_I`
    pub fiber: Option<NormBound>,
    /// `|w2(τ) - w̃|_{I'}`
    pub sub_defect: Option<NormBound>,
    /// `|w - w'|_I`
    pub defect: Option<NormBound>,
    pub constant: Rational,
}

/// Levels in recursion order: the outermost cube first.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RecursionTrace {
    pub levels: Vec<LevelRecord>,
}

impl RecursionTrace {
    /// Replays the estimate chain level by level from the recorded bounds:
    /// `|w2(τ)-w̃| <= C(n-1,k)|d'w2(τ)|`, `|d'w2(τ)| <= |d'w2|`,
    /// `|∫(dw)_1| <= L |(dw)_1|`, `|w-w'| <= |∫(dw)_1| + |w2(τ)-w̃|`, and
    /// finally `<= C(n,k) max(|(dw)_1|, |(dw)_2|)`. Returns the first broken
    /// link, if any.
    pub fn replay(&self) -> std::result::Result<(), String> {
        for (depth, level) in self.levels.iter().enumerate() {
            let (Some(dw1), Some(dw2), Some(fiber), Some(defect)) =
                (&level.dw1, &level.dw2, &level.fiber, &level.defect)
            else {
                continue;
            };
            let fail = |what: &str| Err(format!("level {depth} (n = {}, k = {}): {what}", level.dim, level.degree));
            if fiber.upper > &level.edge * &dw1.upper {
                return fail("fiber integral exceeds edge * |(dw)_1|");
            }
            let sub = level.sub_defect.as_ref().map(|b| b.upper.clone()).unwrap_or_default();
            if let (Some(dw2_tau), Some(next)) = (&level.dw2_tau, self.levels.get(depth + 1)) {
                if dw2_tau.upper > dw2.upper {
                    return fail("|d'w2(tau)| exceeds |d'w2|");
                }
                if sub > &next.constant * &dw2_tau.upper {
                    return fail("face defect exceeds C(n-1,k) |d'w2(tau)|");
                }
            }
            if defect.upper > &fiber.upper + &sub {
                return fail("defect exceeds fiber term plus face defect");
            }
            let dw = rational::max(&dw1.upper, &dw2.upper);
            if defect.upper > &level.constant * &dw {
                return fail("defect exceeds C(n,k) |dw|");
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Primitive,
    ClosedApprox,
}

struct Recursion<'a> {
    mode: Mode,
    opts: &'a PoincareOptions,
    trace: Vec<LevelRecord>,
}

impl Recursion<'_> {
    fn norm(&self, w: &PolyForm, cube: &Cube) -> Result<NormBound> {
        supnorm::sup_norm_with(w, cube, self.opts.grid_per_axis, self.opts.subdivision)
    }

    fn pick_tau(&self, w2: &PolyForm, cube: &Cube) -> Result<Rational> {
        let last = cube.dim() - 1;
        let mid = choose_tau(cube, last)?;
        let TauRule::Scan { candidates } = self.opts.tau else {
            return Ok(mid);
        };
        if candidates == 0 || cube.dim() == 1 || self.mode == Mode::Primitive {
            return Ok(mid);
        }
        let face = cube.drop_axis(last).expect("dim > 1");
        let score = |tau: &Rational| -> Result<Rational> {
            Ok(supnorm::bernstein_bound_form(&w2.restrict(last, tau)?.d(), &face, self.opts.subdivision))
        };
        let mut best = (score(&mid)?, mid);
        let step = cube.length(last) / rational::int(candidates as i64);
        for j in 0..=candidates {
            let tau = &cube.lo()[last] + &step * rational::int(j as i64);
            let s = score(&tau)?;
            if s < best.0 {
                best = (s, tau);
            }
        }
        Ok(best.1)
    }

    fn run(&mut self, w: &PolyForm, cube: &Cube) -> Result<PolyForm> {
        let n = w.dim();
        let k = w.degree();
        let record = self.opts.record_trace && self.mode == Mode::ClosedApprox;

        match self.mode {
            Mode::ClosedApprox if k >= n => {
                if record {
                    self.trace.push(LevelRecord {
                        dim: n,
                        degree: k,
                        tau: None,
                        edge: cube.length(n - 1),
                        dw1: None,
                        dw2: None,
                        dw2_tau: None,
                        fiber: None,
                        sub_defect: None,
                        defect: Some(NormBound::zero(cube.center())),
                        constant: cube_constant(cube, k),
                    });
                }
                return Ok(w.clone());
            }
            Mode::Primitive if k > n => return Ok(PolyForm::zero(n, k - 1)),
            _ => {}
        }

        let last = n - 1;
        let (w1, w2) = w.split_last();
        let tau = self.pick_tau(&w2, cube)?;

        // P = (-1)^{k+1} ∫_τ^{x^n} w1
        let p = match &w1 {
            Some(w1) => Some(w1.fiber_integrate(last, &tau)?.scale(&rational::sign_pow(k + 1))),
            None => None,
        };

        if n == 1 {
            let out = match self.mode {
                // k = 1: θ = ∫_τ^x f
                Mode::Primitive => p.expect("k >= 1 in primitive mode"),
                // k = 0: the constant f(τ)
                Mode::ClosedApprox => {
                    let value = w.coefficient(&crate::form::MultiIndex::empty()).eval(std::slice::from_ref(&tau));
                    let out = PolyForm::constant(1, value);
                    if record {
                        let df = w.d();
                        let defect = self.norm(&w.sub(&out)?, cube)?;
                        self.trace.push(LevelRecord {
                            dim: 1,
                            degree: 0,
                            tau: Some(tau),
                            edge: cube.length(0),
                            dw1: Some(self.norm(&df, cube)?),
                            dw2: Some(NormBound::zero(cube.center())),
                            dw2_tau: None,
                            fiber: Some(defect.clone()),
                            sub_defect: None,
                            defect: Some(defect),
                            constant: cube_constant(cube, 0),
                        });
                    }
                    out
                }
            };
            return Ok(out);
        }

        let face = cube.drop_axis(last).expect("dim > 1");
        let w2_tau = w2.restrict(last, &tau)?;
        let level_index = self.trace.len();
        if record {
            self.trace.push(LevelRecord {
                dim: n,
                degree: k,
                tau: Some(tau.clone()),
                edge: cube.length(last),
                dw1: None,
                dw2: None,
                dw2_tau: None,
                fiber: None,
                sub_defect: None,
                defect: None,
                constant: cube_constant(cube, k),
            });
        }
        let sub = self.run(&w2_tau, &face)?;
        let lifted = sub.include_from_face();

        let out = match self.mode {
            Mode::Primitive => match p {
                Some(p) => p.add(&lifted)?,
                None => lifted,
            },
            Mode::ClosedApprox => match p {
                Some(p) => p.d().add(&lifted)?,
                None => lifted,
            },
        };

        if record {
            let dw = w.d();
            let (dw1, dw2) = dw.split_last();
            let dw1 = dw1.expect("dw has degree >= 1");
            let fiber = dw1.fiber_integrate(last, &tau)?;
            let level = LevelRecord {
                dw1: Some(self.norm(&dw1, cube)?),
                dw2: Some(self.norm(&dw2, cube)?),
                dw2_tau: Some(self.norm(&dw2.restrict(last, &tau)?, &face)?),
                fiber: Some(self.norm(&fiber, cube)?),
                sub_defect: Some(self.norm(&w2_tau.sub(&sub)?, &face)?),
                defect: Some(self.norm(&w.sub(&out)?, cube)?),
                ..self.trace[level_index].clone()
            };
            self.trace[level_index] = level;
        }
        Ok(out)
    }
}

fn check_cube(w: &PolyForm, cube: &Cube) -> Result<()> {
    if w.dim() != cube.dim() {
        return Err(Error::DimensionMismatch {
            expected: cube.dim(),
            found: w.dim(),
        });
    }
    Ok(())
}

fn require_closed(w: &PolyForm) -> Result<()> {
    let dw = w.d();
    if let Some(term) = dw.first_term_label() {
        return Err(Error::NotClosed { term });
    }
    Ok(())
}

/// Classical primitive of a closed form: `dθ = w`, no norm control.
pub fn standard_primitive(w: &PolyForm, cube: &Cube) -> Result<PolyForm> {
    check_cube(w, cube)?;
    if w.degree() == 0 {
        return Err(Error::ZeroDegreePrimitive);
    }
    require_closed(w)?;
    let opts = PoincareOptions {
        record_trace: false,
        ..PoincareOptions::default()
    };
    Recursion {
        mode: Mode::Primitive,
        opts: &opts,
        trace: Vec::new(),
    }
    .run(w, cube)
}

#[derive(Debug, Clone)]
pub struct ClosedApprox {
    pub wprime: PolyForm,
    pub certificate: NormCertificate,
    pub trace: RecursionTrace,
}

/// Closed `w'` with `|w - w'| <= C(n, k) |dw|`, midpoint base points.
pub fn closed_approx(w: &PolyForm, cube: &Cube) -> Result<ClosedApprox> {
    closed_approx_with(w, cube, &PoincareOptions::default())
}

pub fn closed_approx_with(w: &PolyForm, cube: &Cube, opts: &PoincareOptions) -> Result<ClosedApprox> {
    check_cube(w, cube)?;
    let run = |opts: &PoincareOptions| -> Result<ClosedApprox> {
        let mut rec = Recursion {
            mode: Mode::ClosedApprox,
            opts,
            trace: Vec::new(),
        };
        let wprime = rec.run(w, cube)?;
        let defect = w.sub(&wprime)?;
        let certificate = certify(
            Inequality::ClosedApprox,
            &w.d(),
            &wprime,
            Some(&defect),
            cube,
            cube_constant(cube, w.degree()),
            w.degree(),
            opts,
        )?;
        Ok(ClosedApprox {
            wprime,
            certificate,
            trace: RecursionTrace { levels: rec.trace },
        })
    };
    let chosen = run(opts)?;
    if opts.tau == TauRule::Midpoint {
        return Ok(chosen);
    }
    let midpoint = run(&PoincareOptions {
        tau: TauRule::Midpoint,
        ..opts.clone()
    })?;
    let defect = |c: &ClosedApprox| c.certificate.lhs().upper.clone();
    Ok(if defect(&chosen) < defect(&midpoint) {
        chosen
    } else {
        midpoint
    })
}

#[derive(Debug, Clone)]
pub struct BoundedPrimitive {
    pub theta: PolyForm,
    /// The classical primitive before the closed correction.
    pub theta1: PolyForm,
    pub certificate: NormCertificate,
    pub trace: RecursionTrace,
}

/// `θ = θ1 - closed_approx(θ1)` with `dθ = w` and `|θ| <= C(n, k-1) |w|`.
pub fn bounded_primitive(w: &PolyForm, cube: &Cube) -> Result<BoundedPrimitive> {
    bounded_primitive_with(w, cube, &PoincareOptions::default())
}

pub fn bounded_primitive_with(w: &PolyForm, cube: &Cube, opts: &PoincareOptions) -> Result<BoundedPrimitive> {
    let theta1 = standard_primitive(w, cube)?;
    let correction = closed_approx_with(&theta1, cube, opts)?;
    let theta = theta1.sub(&correction.wprime)?;
    let certificate = certify(
        Inequality::BoundedPrimitive,
        w,
        &theta,
        None,
        cube,
        cube_constant(cube, w.degree() - 1),
        w.degree(),
        opts,
    )?;
    Ok(BoundedPrimitive {
        theta,
        theta1,
        certificate,
        trace: correction.trace,
    })
}

#[allow(clippy::too_many_arguments)]
fn certify(
    inequality: Inequality,
    input: &PolyForm,
    output: &PolyForm,
    defect: Option<&PolyForm>,
    cube: &Cube,
    constant_used: Rational,
    degree: usize,
    opts: &PoincareOptions,
) -> Result<NormCertificate> {
    let mut level = opts.subdivision;
    loop {
        let norm = |w: &PolyForm| supnorm::sup_norm_with(w, cube, opts.grid_per_axis, level);
        let cert = NormCertificate {
            inequality,
            dim: cube.dim(),
            degree,
            norm_input: norm(input)?,
            norm_output: norm(output)?,
            constant_used: constant_used.clone(),
            defect_norm: defect.map(norm).transpose()?,
            subdivision: level,
            verified: false,
        };
        let verified = cert.check();
        if verified || level >= opts.max_subdivision {
            return Ok(NormCertificate { verified, ..cert });
        }
        level += 1;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormCertificateJson {
    pub inequality: Inequality,
    pub ambient_dim: usize,
    pub degree: usize,
    pub norm_input: NormBoundJson,
    pub norm_output: NormBoundJson,
    pub constant_used: RationalJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub defect_norm: Option<NormBoundJson>,
    pub subdivision: u32,
    pub verified: bool,
}

impl From<&NormCertificate> for NormCertificateJson {
    fn from(c: &NormCertificate) -> Self {
        NormCertificateJson {
            inequality: c.inequality,
            ambient_dim: c.dim,
            degree: c.degree,
            norm_input: (&c.norm_input).into(),
            norm_output: (&c.norm_output).into(),
            constant_used: (&c.constant_used).into(),
            defect_norm: c.defect_norm.as_ref().map(Into::into),
            subdivision: c.subdivision,
            verified: c.verified,
        }
    }
}

impl TryFrom<&NormCertificateJson> for NormCertificate {
    type Error = Error;

    fn try_from(j: &NormCertificateJson) -> Result<Self> {
        Ok(NormCertificate {
            inequality: j.inequality,
            dim: j.ambient_dim,
            degree: j.degree,
            norm_input: (&j.norm_input).try_into()?,
            norm_output: (&j.norm_output).try_into()?,
            constant_used: (&j.constant_used).try_into()?,
            defect_norm: j.defect_norm.as_ref().map(TryInto::try_into).transpose()?,
            subdivision: j.subdivision,
            verified: j.verified,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelRecordJson {
    pub ambient_dim: usize,
    pub degree: usize,
    pub tau: Option<String>,
    pub edge: String,
    pub constant: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dw1: Option<NormBoundJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dw2: Option<NormBoundJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dw2_tau: Option<NormBoundJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fiber: Option<NormBoundJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sub_defect: Option<NormBoundJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub defect: Option<NormBoundJson>,
}

impl RecursionTrace {
    pub fn to_json(&self) -> Vec<LevelRecordJson> {
        let j = |b: &Option<NormBound>| b.as_ref().map(NormBoundJson::from);
        self.levels
            .iter()
            .map(|l| LevelRecordJson {
                ambient_dim: l.dim,
                degree: l.degree,
                tau: l.tau.as_ref().map(rational::format),
                edge: rational::format(&l.edge),
                constant: rational::format(&l.constant),
                dw1: j(&l.dw1),
                dw2: j(&l.dw2),
                dw2_tau: j(&l.dw2_tau),
                fiber: j(&l.fiber),
                sub_defect: j(&l.sub_defect),
                defect: j(&l.defect),
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::form::basis;
    use crate::poly::Polynomial;
    use crate::rational::{int, rat};

    fn x2() -> Polynomial {
        Polynomial::var(2, 0)
    }
    fn y2() -> Polynomial {
        Polynomial::var(2, 1)
    }

    #[test]
    fn constant_ledger() {
        assert_eq!(constant(1, 0), int(1));
        assert_eq!(constant(3, 3), int(0));
        assert_eq!(constant(2, 0), int(2));
        assert_eq!(constant(3, 0), int(4));
        assert_eq!(constant(2, 1), int(2));
        assert_eq!(constant(4, 7), int(0));
        assert_eq!(cube_constant(&Cube::unit(3), 1), constant(3, 1));
        let wide = Cube::new(vec![int(0), int(0)], vec![int(3), int(1)]).unwrap();
        assert_eq!(cube_constant(&wide, 0), int(6));
    }

    #[test]
    fn tau_is_midpoint() {
        assert_eq!(choose_tau(&Cube::unit(3), 2).unwrap(), rat(1, 2));
        let c = Cube::new(vec![int(0), int(1)], vec![int(2), int(3)]).unwrap();
        assert_eq!(choose_tau(&c, 1).unwrap(), int(2));
        assert!(choose_tau(&c, 2).is_err());
    }

    #[test]
    fn closed_forms_are_fixed_points() {
        let w = PolyForm::function(&x2() * &y2()).d();
        let out = closed_approx(&w, &Cube::unit(2)).unwrap();
        assert_eq!(out.wprime, w);
        assert!(out.certificate.lhs().upper.is_zero());
        assert!(out.certificate.verified);
    }

    #[test]
    fn one_dimensional_base_case() {
        let f = PolyForm::function(Polynomial::var(1, 0));
        let out = closed_approx(&f, &Cube::unit(1)).unwrap();
        assert_eq!(out.wprime, PolyForm::constant(1, rat(1, 2)));
        let c = &out.certificate;
        assert_eq!(c.lhs().upper, rat(1, 2));
        assert_eq!(c.norm_input.upper, int(1));
        assert!(c.verified);
    }

    #[test]
    fn x_dy_unrolled() {
        let w = basis(2, &[1], int(1)).mul_function(&x2());
        let out = closed_approx(&w, &Cube::unit(2)).unwrap();
        let half = Polynomial::constant(2, rat(1, 2));
        let expect = w.add(&basis(2, &[0], int(1)).mul_function(&(&y2() - &half))).unwrap();
        assert_eq!(out.wprime, expect);
        assert!(out.wprime.d().is_zero());
        assert_eq!(out.certificate.lhs().upper, rat(1, 2));
        assert_eq!(out.certificate.rhs(), int(2));
        assert!(out.certificate.verified);
        out.trace.replay().unwrap();
    }

    #[test]
    fn area_form_primitive() {
        let w = basis(2, &[0, 1], int(1));
        let half = Polynomial::constant(2, rat(1, 2));
        let expect = basis(2, &[0], int(1)).mul_function(&(&half - &y2()));
        assert_eq!(standard_primitive(&w, &Cube::unit(2)).unwrap(), expect);
        let out = bounded_primitive(&w, &Cube::unit(2)).unwrap();
        assert_eq!(out.theta, expect);
        assert_eq!(out.theta.d(), w);
        assert_eq!(out.certificate.norm_output.upper, rat(1, 2));
        assert_eq!(out.certificate.constant_used, int(2));
        assert!(verify_certificate(&out.certificate).verified);
    }

    #[test]
    fn exact_one_form_primitive() {
        let w = PolyForm::function(&x2() * &y2()).d();
        let theta1 = standard_primitive(&w, &Cube::unit(2)).unwrap();
        assert_eq!(theta1.d(), w);
        let out = bounded_primitive(&w, &Cube::unit(2)).unwrap();
        assert_eq!(out.theta.d(), w);
        assert_eq!(out.certificate.constant_used, int(2));
        assert!(out.certificate.verified);
    }

    #[test]
    fn zero_primitive() {
        let out = bounded_primitive(&PolyForm::zero(3, 2), &Cube::unit(3)).unwrap();
        assert!(out.theta.is_zero());
        assert!(out.certificate.verified);
    }

    #[test]
    fn rejects_non_closed_and_degree_zero() {
        let w = basis(2, &[1], int(1)).mul_function(&x2());
        assert!(matches!(
            bounded_primitive(&w, &Cube::unit(2)),
            Err(Error::NotClosed { .. })
        ));
        assert!(matches!(
            standard_primitive(&PolyForm::constant(2, int(1)), &Cube::unit(2)),
            Err(Error::ZeroDegreePrimitive)
        ));
        assert!(closed_approx(&w, &Cube::unit(3)).is_err());
    }

    #[test]
    fn tampered_certificates_fail() {
        let w = basis(2, &[0, 1], int(1));
        let mut cert = bounded_primitive(&w, &Cube::unit(2)).unwrap().certificate;
        assert!(verify_certificate(&cert).verified);
        cert.norm_output.upper = int(3);
        let report = verify_certificate(&cert);
        assert!(!report.verified);
        assert!(report.message.contains("VIOLATED"));

        let x = basis(2, &[1], int(1)).mul_function(&x2());
        let mut cert = closed_approx(&x, &Cube::unit(2)).unwrap().certificate;
        cert.constant_used = int(0);
        assert!(!verify_certificate(&cert).verified);
    }

    #[test]
    fn tau_scan_never_worse() {
        let p = &(&x2() * &x2()) * &y2();
        let w = basis(2, &[1], int(1)).mul_function(&(&p + &(&y2() * &y2())));
        let cube = Cube::unit(2);
        let mid = closed_approx(&w, &cube).unwrap();
        let scan = closed_approx_with(
            &w,
            &cube,
            &PoincareOptions {
                tau: TauRule::Scan { candidates: 8 },
                ..PoincareOptions::default()
            },
        )
        .unwrap();
        assert!(scan.wprime.d().is_zero());
        assert!(scan.certificate.lhs().upper <= mid.certificate.lhs().upper);
    }

    #[test]
    fn certificate_json_round_trip() {
        let w = basis(2, &[1], int(1)).mul_function(&x2());
        let cert = closed_approx(&w, &Cube::unit(2)).unwrap().certificate;
        let j = NormCertificateJson::from(&cert);
        let text = serde_json::to_string(&j).unwrap();
        assert!(text.contains("\"closed_approx\""));
        let back: NormCertificateJson = serde_json::from_str(&text).unwrap();
        assert_eq!(NormCertificate::try_from(&back).unwrap(), cert);
    }
}
