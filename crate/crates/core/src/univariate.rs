//! Composition of a univariate atom with a superposition model.
//!
//! Given a model `A` of `h`, the composition produces a model `C` of `g ∘ h`:
//!
//! 1. pick centres `a_i ∈ [L(A_i), U(A_i)]` and set `ω = Σ a_i`;
//! 2. bound `|Σ g(ω+δ_i) − (n−1) g(ω) − g(ω+Σδ_i)| ≤ r_g(A)` over all admissible
//!    offsets `L(A_i) ≤ a_i + δ_i ≤ U(A_i)`;
//! 3. set `C_i^j = g(ω − a_i + A_i^j) − ((n−1)/n) g(ω)` in interval arithmetic;
//! 4. add `r_g(A)·[−1, 1]` to one row.
//!
//! The centres are ordinary doubles. `ω` is carried as an interval enclosing the
//! exact real sum of the centres, and every remainder formula is evaluated with
//! upward rounding, so the returned bound dominates the exact one.

use std::f64::consts::FRAC_PI_2;

use crate::bivariate::{affine_interval, mul_models};
use crate::error::{Error, Result};
use crate::interval::{round, Interval};
use crate::model::SuperpositionModel;

/// The atoms with dedicated central points and remainder bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AtomKind {
    Neg,
    Sqr,
    Inv,
    Exp,
    Log,
    Sin,
    Cos,
    Tan,
}

impl AtomKind {
    pub const ALL: [AtomKind; 8] = [
        AtomKind::Neg,
        AtomKind::Sqr,
        AtomKind::Inv,
        AtomKind::Exp,
        AtomKind::Log,
        AtomKind::Sin,
        AtomKind::Cos,
        AtomKind::Tan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AtomKind::Neg => "neg",
            AtomKind::Sqr => "sqr",
            AtomKind::Inv => "inv",
            AtomKind::Exp => "exp",
            AtomKind::Log => "log",
            AtomKind::Sin => "sin",
            AtomKind::Cos => "cos",
            AtomKind::Tan => "tan",
        }
    }

    pub fn apply_point(self, x: f64) -> f64 {
        match self {
            AtomKind::Neg => -x,
            AtomKind::Sqr => x * x,
            AtomKind::Inv => 1.0 / x,
            AtomKind::Exp => x.exp(),
            AtomKind::Log => x.ln(),
            AtomKind::Sin => x.sin(),
            AtomKind::Cos => x.cos(),
            AtomKind::Tan => x.tan(),
        }
    }

    pub fn apply(self, x: &Interval) -> Result<Interval> {
        match self {
            AtomKind::Neg => Ok(x.neg()),
            AtomKind::Sqr => x.sqr(),
            AtomKind::Inv => x
                .inv()
                .map_err(|_| Error::domain("inv", format!("{x} contains zero"))),
            AtomKind::Exp => x.exp(),
            AtomKind::Log => x.log(),
            AtomKind::Sin => Ok(x.sin()),
            AtomKind::Cos => Ok(x.cos()),
            AtomKind::Tan => x.tan(),
        }
    }

    /// Whether the remainder rule needs a strictly positive range.
    fn needs_positive_range(self) -> bool {
        matches!(self, AtomKind::Inv | AtomKind::Log)
    }
}

/// Auxiliary quantities of the sine/cosine bound.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigAux {
    /// `r_i`, a quarter of each row's span.
    pub quarter_widths: Vec<f64>,
    /// `Ω = |sin ω| + |cos ω|`, rounded up.
    pub magnitude: f64,
}

/// Auxiliary interval quantities of the tangent bound.
#[derive(Debug, Clone, PartialEq)]
pub struct TanAux {
    /// `S_i = [−s_i, s_i]`.
    pub offsets: Vec<Interval>,
    /// `σ = Σ s_i`.
    pub sigma: f64,
    /// `Σ = [−σ, σ]`.
    pub total: Interval,
    /// `T_i = [−σ + s_i, σ − s_i]`.
    pub complements: Vec<Interval>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompositionWorkspace {
    pub atom: AtomKind,
    pub centers: Vec<f64>,
    /// Nearest double to `Σ a_i`.
    pub omega: f64,
    /// Interval enclosing the exact `Σ a_i`.
    pub omega_enclosure: Interval,
    /// Per-row `s_i` of the atom's bound (empty until the remainder is computed).
    pub spreads: Vec<f64>,
    pub remainder: f64,
    pub trig: Option<TrigAux>,
    pub tan: Option<TanAux>,
}

/// Step 1: central points and `ω`.
pub fn central_points(g: AtomKind, m: &SuperpositionModel) -> Result<CompositionWorkspace> {
    let n = m.dim();
    let range = m.range();
    let centers = (0..n)
        .map(|i| {
            let (lo, hi) = (range.row_lower[i], range.row_upper[i]);
            if lo == hi {
                return Ok(lo);
            }
            let a = match g {
                AtomKind::Exp => {
                    // log((e^U + e^L) / 2), written to avoid overflow.
                    hi + ((lo - hi).exp().ln_1p() - std::f64::consts::LN_2)
                }
                AtomKind::Inv => {
                    let denom = range.lambda + range.mu;
                    if denom == 0.0 {
                        return Err(Error::domain("inv", "λ(A) + μ(A) = 0, range touches zero"));
                    }
                    lo + (hi - lo) * (range.lambda / denom)
                }
                _ => Interval::from_bounds(lo, hi).mid(),
            };
            Ok(if a.is_finite() {
                a.clamp(lo, hi)
            } else {
                Interval::from_bounds(lo, hi).mid()
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    let omega = centers.iter().sum();
    let mut omega_enclosure = Interval::ZERO;
    for &a in &centers {
        omega_enclosure = omega_enclosure.add(&Interval::point(a))?;
    }
    Ok(CompositionWorkspace {
        atom: g,
        centers,
        omega,
        omega_enclosure,
        spreads: Vec::new(),
        remainder: 0.0,
        trig: None,
        tan: None,
    })
}

/// `Σ_{|S|≥2} Π_{k∈S} s_k = Π(1+s_k) − Σ s_k − 1` for `s_k ≥ 0`, rounded up.
/// Exactly zero when at most one `s_k` is nonzero.
pub(crate) fn symmetric_tail(s: &[f64]) -> Result<f64> {
    let mut tail = 0.0;
    let mut lower = 0.0;
    for &sk in s {
        tail = round::add_up(tail, round::mul_up(sk, lower)?)?;
        lower = round::add_up(lower, round::mul_up(sk, round::add_up(1.0, lower)?)?)?;
    }
    Ok(tail)
}

/// Upper bound on `|δ_i|` for `L ≤ a + δ ≤ U`.
fn deviation(lo: f64, a: f64, hi: f64) -> Result<f64> {
    Ok(round::sub_up(hi, a)?.max(round::sub_up(a, lo)?))
}

/// `Σ_i s_i · Σ_{k≠i} t_k`, rounded up, for nonnegative inputs.
pub(crate) fn cross_sum(s: &[f64], t: &[f64]) -> Result<f64> {
    let mut t_total = 0.0;
    for &tk in t {
        t_total = round::add_up(t_total, tk)?;
    }
    let mut acc = 0.0;
    for (&si, &ti) in s.iter().zip(t) {
        let others = round::sub_up(t_total, ti)?.max(0.0);
        acc = round::add_up(acc, round::mul_up(si, others)?)?;
    }
    Ok(acc)
}

/// Step 2: fills `w.spreads`, the auxiliaries and `w.remainder`.
pub fn remainder_bound(
    g: AtomKind,
    m: &SuperpositionModel,
    w: &mut CompositionWorkspace,
) -> Result<f64> {
    let n = m.dim();
    let range = m.range();
    let lows = &range.row_lower;
    let highs = &range.row_upper;
    let omega = w.omega_enclosure;

    if g.needs_positive_range() && range.lambda <= 0.0 {
        return Err(Error::domain(
            g.name(),
            format!(
                "model range [{}, {}] is not strictly positive",
                range.lambda, range.mu
            ),
        ));
    }

    let devs = (0..n)
        .map(|i| deviation(lows[i], w.centers[i], highs[i]))
        .collect::<Result<Vec<f64>>>()?;

    let r = match g {
        AtomKind::Neg => {
            w.spreads = vec![0.0; n];
            0.0
        }
        AtomKind::Sqr => {
            w.spreads = devs.clone();
            cross_sum(&devs, &devs)?
        }
        AtomKind::Exp => {
            let mut s = Vec::with_capacity(n);
            for i in 0..n {
                let a = Interval::point(w.centers[i]);
                let up = Interval::point(highs[i]).sub(&a)?.exp()?.hi();
                let down = Interval::point(lows[i]).sub(&a)?.exp()?.lo();
                s.push(
                    round::sub_up(up, 1.0)?
                        .max(round::sub_up(1.0, down)?)
                        .max(0.0),
                );
            }
            let tail = symmetric_tail(&s)?;
            w.spreads = s;
            if tail == 0.0 {
                0.0
            } else {
                round::mul_up(omega.exp()?.hi(), tail)?
            }
        }
        AtomKind::Log => {
            let omega_lo = omega.lo();
            if omega_lo <= 0.0 {
                return Err(Error::domain("log", "centre sum is not positive"));
            }
            let scaled = devs
                .iter()
                .map(|&s| round::div_up(s, omega_lo))
                .collect::<Result<Vec<f64>>>()?;
            let tail = symmetric_tail(&scaled)?;
            w.spreads = devs.clone();
            if tail == 0.0 {
                0.0
            } else {
                let q = round::div_up(round::mul_up(omega_lo, tail)?, range.lambda)?;
                if q >= 1.0 {
                    return Err(Error::RemainderUnbounded {
                        op: "log",
                        detail: format!("log argument 1 − {q} is not positive"),
                    });
                }
                let arg = round::sub_down(1.0, q)?;
                let r = -Interval::point(arg).log()?.lo();
                r.max(0.0)
            }
        }
        AtomKind::Inv => {
            let mut s = Vec::with_capacity(n);
            for i in 0..n {
                let a = w.centers[i];
                let rest = omega.sub(&Interval::point(a))?;
                let den_lo = rest.add(&Interval::point(lows[i]))?.lo();
                let den_hi = rest.add(&Interval::point(highs[i]))?.lo();
                if den_lo <= 0.0 || den_hi <= 0.0 {
                    return Err(Error::domain("inv", "shifted row touches zero"));
                }
                let below = round::div_up(round::sub_up(a, lows[i])?, den_lo)?;
                let above = round::div_up(round::sub_up(highs[i], a)?, den_hi)?;
                s.push(below.max(above).max(0.0));
            }
            let numer = cross_sum(&s, &devs)?;
            w.spreads = s;
            if numer == 0.0 {
                0.0
            } else {
                let denom = round::mul_down(omega.lo(), range.lambda)?;
                round::div_up(numer, denom)?
            }
        }
        AtomKind::Sin | AtomKind::Cos => {
            let quarter = devs
                .iter()
                .map(|&d| round::mul_up(d, 0.5))
                .collect::<Result<Vec<f64>>>()?;
            let s = quarter
                .iter()
                .map(|&q| Ok(2.0 * Interval::symmetric(q)?.sin().mag()))
                .collect::<Result<Vec<f64>>>()?;
            let magnitude = round::add_up(omega.sin().mag(), omega.cos().mag())?;
            let tail = symmetric_tail(&s)?;
            w.spreads = s;
            w.trig = Some(TrigAux {
                quarter_widths: quarter,
                magnitude,
            });
            if tail == 0.0 {
                0.0
            } else {
                round::mul_up(magnitude, tail)?
            }
        }
        AtomKind::Tan if devs.iter().filter(|&&d| d > 0.0).count() <= 1 => {
            w.spreads = devs.clone();
            0.0
        }
        AtomKind::Tan => tan_remainder(omega, &devs, w)?,
    };
    w.remainder = r;
    Ok(r)
}

/// Tangent bound from the generalised difference identity
/// `tan(Σδ) − Σ tan δ_i = Σ_{i<n} tan(δ_{i+1}) tan(Σ_{k≤i} δ_k) tan(Σ_{k≤i+1} δ_k)`.
/// The second sum uses `tan(ω+Σδ) − tan(ω+δ_i) = tan(Σ_{k≠i}δ_k)(1 + tan(ω+δ_i) tan(ω+Σδ))`.
fn tan_remainder(omega: Interval, devs: &[f64], w: &mut CompositionWorkspace) -> Result<f64> {
    let n = devs.len();
    let offsets = devs
        .iter()
        .map(|&s| Interval::symmetric(s))
        .collect::<Result<Vec<_>>>()?;
    let mut sigma = 0.0;
    for &s in devs {
        sigma = round::add_up(sigma, s)?;
    }
    let total = Interval::symmetric(sigma)?;
    let complements = devs
        .iter()
        .map(|&s| Interval::symmetric(round::sub_up(sigma, s)?.max(0.0)))
        .collect::<Result<Vec<_>>>()?;

    let tan_omega = omega.tan()?;
    let tan_shifted_total = omega.add(&total)?.tan()?;

    let mut chain = Interval::ZERO;
    let mut partial = offsets[0];
    for i in 0..n.saturating_sub(1) {
        let next = partial.add(&offsets[i + 1])?;
        let term = offsets[i + 1]
            .tan()?
            .mul(&partial.tan()?)?
            .mul(&next.tan()?)?;
        chain = chain.add(&term)?;
        partial = next;
    }
    let first = chain.mul(&Interval::ONE.add(&tan_omega.mul(&tan_shifted_total)?)?)?;

    let mut second = Interval::ZERO;
    for i in 0..n {
        let cross = offsets[i].tan()?.mul(&complements[i].tan()?)?;
        if cross == Interval::ZERO {
            continue;
        }
        let bracket =
            Interval::ONE.add(&omega.add(&offsets[i])?.tan()?.mul(&tan_shifted_total)?)?;
        second = second.add(&tan_omega.mul(&cross)?.mul(&bracket)?)?;
    }

    let r = first.add(&second)?.mag();
    w.spreads = devs.to_vec();
    w.tan = Some(TanAux {
        offsets,
        sigma,
        total,
        complements,
    });
    Ok(r)
}

/// Steps 1 and 2 together.
pub fn workspace(g: AtomKind, m: &SuperpositionModel) -> Result<CompositionWorkspace> {
    let mut w = central_points(g, m)?;
    remainder_bound(g, m, &mut w)?;
    Ok(w)
}

/// Model of `g ∘ h` from a model of `h`.
pub fn compose(g: AtomKind, m: &SuperpositionModel) -> Result<SuperpositionModel> {
    if g == AtomKind::Neg {
        // Step 3 for a linear atom reduces to negating every entry.
        let coeffs = m.coeffs().iter().map(Interval::neg).collect();
        return SuperpositionModel::from_coeffs_normalized(m.domain().clone(), coeffs);
    }
    let w = workspace(g, m)?;
    let (n, nb) = (m.dim(), m.branches());
    let omega = w.omega_enclosure;
    let fraction = Interval::point((n - 1) as f64).div(&Interval::point(n as f64))?;
    let shared = g.apply(&omega)?.mul(&fraction)?;

    let mut coeffs = Vec::with_capacity(n * nb);
    for i in 0..n {
        let shift = omega.sub(&Interval::point(w.centers[i]))?;
        for entry in m.row(i) {
            let value = g.apply(&shift.add(entry)?)?;
            coeffs.push(value.sub(&shared)?);
        }
    }
    let mut out = SuperpositionModel::from_coeffs_normalized(m.domain().clone(), coeffs)?;
    if w.remainder > 0.0 {
        let k = out.remainder_row();
        out.add_to_row(k, Interval::symmetric(w.remainder)?)?;
    }
    Ok(out)
}

/// Functions built from the atoms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DerivedUnary {
    /// `exp(0.5 · log x)`.
    Sqrt,
    /// `tan(π/2 − x)`.
    Cot,
    /// `x^k`, `k ≥ 1`, by square-and-multiply.
    PowInt(u32),
    /// `1/x` on either sign, mirroring negative ranges.
    RecipAnySign,
}

/// Enclosure of π/2.
pub(crate) fn half_pi() -> Interval {
    Interval::from_bounds(FRAC_PI_2, FRAC_PI_2.next_up())
}

pub fn derived_unary(kind: DerivedUnary, m: &SuperpositionModel) -> Result<SuperpositionModel> {
    match kind {
        DerivedUnary::Sqrt => {
            let r = m.range();
            if r.lambda <= 0.0 {
                return Err(Error::domain(
                    "sqrt",
                    format!(
                        "model range [{}, {}] is not strictly positive",
                        r.lambda, r.mu
                    ),
                ));
            }
            let log = compose(AtomKind::Log, m)?;
            let half = affine_interval(&log, Interval::point(0.5), Interval::ZERO)?;
            compose(AtomKind::Exp, &half)
        }
        DerivedUnary::Cot => {
            let reflected = affine_interval(m, Interval::point(-1.0), half_pi())?;
            compose(AtomKind::Tan, &reflected)
        }
        DerivedUnary::PowInt(0) => Err(Error::domain("pow", "exponent must be at least 1")),
        DerivedUnary::PowInt(k) => {
            let mut result: Option<SuperpositionModel> = None;
            let mut base = m.clone();
            let mut e = k;
            loop {
                if e & 1 == 1 {
                    result = Some(match result {
                        None => base.clone(),
                        Some(acc) => mul_models(&acc, &base)?,
                    });
                }
                e >>= 1;
                if e == 0 {
                    break;
                }
                base = compose(AtomKind::Sqr, &base)?;
            }
            Ok(result.expect("k >= 1 sets at least one bit"))
        }
        DerivedUnary::RecipAnySign => {
            let r = m.range();
            if r.lambda > 0.0 {
                compose(AtomKind::Inv, m)
            } else if r.mu < 0.0 {
                let mirrored = affine_interval(m, Interval::point(-1.0), Interval::ZERO)?;
                let inv = compose(AtomKind::Inv, &mirrored)?;
                affine_interval(&inv, Interval::point(-1.0), Interval::ZERO)
            } else {
                Err(Error::domain(
                    "inv",
                    format!("model range [{}, {}] contains zero", r.lambda, r.mu),
                ))
            }
        }
    }
}
