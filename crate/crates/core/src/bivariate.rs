//! Sums, products, differences and quotients of superposition models.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::interval::{round, Interval};
use crate::model::SuperpositionModel;
use crate::univariate::{compose, cross_sum, derived_unary, AtomKind, DerivedUnary};

/// Steps 1 and 2 of the product rule.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductWorkspace {
    pub centers_a: Vec<f64>,
    pub centers_b: Vec<f64>,
    pub alpha: Interval,
    pub beta: Interval,
    pub gamma: Interval,
    /// `(αβ − γ) / n`.
    pub omega: Interval,
    pub radii_a: Vec<f64>,
    pub radii_b: Vec<f64>,
    /// `R(A, B) = Σ_i ρ_i(A) Σ_{k≠i} ρ_k(B)`, rounded up.
    pub remainder: f64,
}

impl ProductWorkspace {
    pub fn new(ma: &SuperpositionModel, mb: &SuperpositionModel) -> Result<Self> {
        check_domains(ma, mb)?;
        let n = ma.dim();
        let (ra, rb) = (ma.range(), mb.range());
        let mut centers_a = Vec::with_capacity(n);
        let mut centers_b = Vec::with_capacity(n);
        let mut radii_a = Vec::with_capacity(n);
        let mut radii_b = Vec::with_capacity(n);
        let mut alpha = Interval::ZERO;
        let mut beta = Interval::ZERO;
        let mut gamma = Interval::ZERO;
        for i in 0..n {
            let (a, rho_a) = center_radius(ra.row_lower[i], ra.row_upper[i])?;
            let (b, rho_b) = center_radius(rb.row_lower[i], rb.row_upper[i])?;
            let (ai, bi) = (Interval::point(a), Interval::point(b));
            alpha = alpha.add(&ai)?;
            beta = beta.add(&bi)?;
            gamma = gamma.add(&ai.mul(&bi)?)?;
            centers_a.push(a);
            centers_b.push(b);
            radii_a.push(rho_a);
            radii_b.push(rho_b);
        }
        let omega = alpha
            .mul(&beta)?
            .sub(&gamma)?
            .div(&Interval::point(n as f64))?;
        let remainder = cross_sum(&radii_a, &radii_b)?;
        let ws = ProductWorkspace {
            centers_a,
            centers_b,
            alpha,
            beta,
            gamma,
            omega,
            radii_a,
            radii_b,
            remainder,
        };
        debug_assert!(ws.satisfies_width_bound(ma, mb), "{ws:?}");
        Ok(ws)
    }

    /// `R(A,B) ≤ ¼ (μ(A) − λ(A)) (μ(B) − λ(B))`. Each radius may exceed the half-width
    /// of its row by one ulp of the rounded centre, so the widths are padded accordingly.
    pub fn satisfies_width_bound(&self, ma: &SuperpositionModel, mb: &SuperpositionModel) -> bool {
        let pad = |c: &[f64]| {
            c.iter()
                .map(|x| 2.0 * (x.abs().next_up() - x.abs()))
                .sum::<f64>()
        };
        let wa = ma.range().width() + pad(&self.centers_a);
        let wb = mb.range().width() + pad(&self.centers_b);
        let bound = 0.25 * wa * wb;
        self.remainder <= bound * (1.0 + 8.0 * f64::EPSILON) + f64::MIN_POSITIVE
    }
}

/// Midpoint of `[lo, hi]` and an upper bound on the largest deviation from it.
fn center_radius(lo: f64, hi: f64) -> Result<(f64, f64)> {
    if lo == hi {
        return Ok((lo, 0.0));
    }
    let c = Interval::from_bounds(lo, hi).mid();
    Ok((c, round::sub_up(hi, c)?.max(round::sub_up(c, lo)?)))
}

fn check_domains(ma: &SuperpositionModel, mb: &SuperpositionModel) -> Result<()> {
    if Arc::ptr_eq(ma.domain(), mb.domain()) || ma.domain() == mb.domain() {
        Ok(())
    } else {
        Err(Error::DomainMismatch)
    }
}

pub fn add_models(ma: &SuperpositionModel, mb: &SuperpositionModel) -> Result<SuperpositionModel> {
    check_domains(ma, mb)?;
    let coeffs = ma
        .coeffs()
        .iter()
        .zip(mb.coeffs())
        .map(|(a, b)| a.add(b))
        .collect::<Result<Vec<_>>>()?;
    SuperpositionModel::from_coeffs_normalized(ma.domain().clone(), coeffs)
}

pub fn mul_models(ma: &SuperpositionModel, mb: &SuperpositionModel) -> Result<SuperpositionModel> {
    let ws = ProductWorkspace::new(ma, mb)?;
    let (n, nb) = (ma.dim(), ma.branches());
    let mut coeffs = Vec::with_capacity(n * nb);
    for i in 0..n {
        let shift_a = ws.alpha.sub(&Interval::point(ws.centers_a[i]))?;
        let shift_b = ws.beta.sub(&Interval::point(ws.centers_b[i]))?;
        let cross = shift_a.mul(&shift_b)?.add(&ws.omega)?;
        for (a, b) in ma.row(i).iter().zip(mb.row(i)) {
            let prod = a.add(&shift_a)?.mul(&b.add(&shift_b)?)?;
            coeffs.push(prod.sub(&cross)?);
        }
    }
    let mut out = SuperpositionModel::from_coeffs_normalized(ma.domain().clone(), coeffs)?;
    if ws.remainder > 0.0 {
        let k = out.remainder_row();
        out.add_to_row(k, Interval::symmetric(ws.remainder)?)?;
    }
    Ok(out)
}

pub fn sub_models(ma: &SuperpositionModel, mb: &SuperpositionModel) -> Result<SuperpositionModel> {
    check_domains(ma, mb)?;
    add_models(ma, &compose(AtomKind::Neg, mb)?)
}

pub fn div_models(ma: &SuperpositionModel, mb: &SuperpositionModel) -> Result<SuperpositionModel> {
    check_domains(ma, mb)?;
    mul_models(ma, &derived_unary(DerivedUnary::RecipAnySign, mb)?)
}

/// `c·m + d`: entries scaled by `c`, `d` added to the first row.
pub fn scalar_affine(m: &SuperpositionModel, c: f64, d: f64) -> Result<SuperpositionModel> {
    if !c.is_finite() || !d.is_finite() {
        return Err(Error::InvalidInterval { lo: c, hi: d });
    }
    affine_interval(m, Interval::point(c), Interval::point(d))
}

/// `c·m + d` with interval coefficients, used when constants are themselves enclosures.
pub(crate) fn affine_interval(
    m: &SuperpositionModel,
    c: Interval,
    d: Interval,
) -> Result<SuperpositionModel> {
    let nb = m.branches();
    let mut coeffs = m
        .coeffs()
        .iter()
        .map(|a| {
            if c == Interval::ONE {
                Ok(*a)
            } else {
                a.mul(&c)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    if d != Interval::ZERO {
        for a in &mut coeffs[..nb] {
            *a = a.add(&d)?;
        }
    }
    SuperpositionModel::from_coeffs_normalized(m.domain().clone(), coeffs)
}
