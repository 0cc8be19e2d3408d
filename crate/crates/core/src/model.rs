//! Branched domains and interval superposition models.
//!
//! A model over a box `X ∈ 𝕀ⁿ` cut into `N` equidistant branches per axis is an
//! `n × N` matrix of intervals `A[i][j]`. At a point `x` it selects one entry per
//! row, the one whose branch contains `x_i`, and returns their Minkowski sum.
//!
//! Rows whose entries all coincide carry no information about their axis. After
//! every arithmetic operation such rows are folded into an anchor row and reset
//! to `[0, 0]`, which keeps the matrix as sparse as the representation allows
//! without changing the enclosure.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::interval::{round, Interval};

/// A box `X = X_1 × … × X_n` with `N` equidistant branches per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    boxes: Vec<Interval>,
    branches: usize,
    widths: Vec<f64>,
    // N + 1 breakpoints per axis; first and last are the box endpoints.
    edges: Vec<Vec<f64>>,
}

impl Domain {
    pub fn new(boxes: Vec<Interval>, branches: usize) -> Result<Self> {
        if boxes.is_empty() {
            return Err(Error::InvalidDomain(
                "domain needs at least one axis".into(),
            ));
        }
        if branches == 0 {
            return Err(Error::InvalidDomain("branch count must be positive".into()));
        }
        if let Some((i, b)) = boxes.iter().enumerate().find(|(_, b)| b.is_degenerate()) {
            return Err(Error::InvalidDomain(format!("axis {i} is degenerate: {b}")));
        }
        let widths: Vec<f64> = boxes
            .iter()
            .map(|b| (b.hi() - b.lo()) / branches as f64)
            .collect();
        let edges = boxes
            .iter()
            .zip(&widths)
            .map(|(b, &h)| {
                let mut e: Vec<f64> = (0..=branches)
                    .map(|j| (b.lo() + j as f64 * h).min(b.hi()))
                    .collect();
                e[branches] = b.hi();
                e
            })
            .collect();
        Ok(Domain {
            boxes,
            branches,
            widths,
            edges,
        })
    }

    /// Convenience wrapper returning a shareable handle.
    pub fn shared(boxes: Vec<Interval>, branches: usize) -> Result<Arc<Self>> {
        Domain::new(boxes, branches).map(Arc::new)
    }

    pub fn dim(&self) -> usize {
        self.boxes.len()
    }

    pub fn branches(&self) -> usize {
        self.branches
    }

    pub fn boxes(&self) -> &[Interval] {
        &self.boxes
    }

    pub fn axis(&self, i: usize) -> Result<Interval> {
        self.check_axis(i)?;
        Ok(self.boxes[i])
    }

    /// Branch width `h_i`.
    pub fn width(&self, i: usize) -> Result<f64> {
        self.check_axis(i)?;
        Ok(self.widths[i])
    }

    fn check_axis(&self, i: usize) -> Result<()> {
        if i < self.dim() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                what: "axis",
                index: i,
                limit: self.dim(),
            })
        }
    }

    /// The `j`-th branch of axis `i` (both 0-based).
    pub fn branch_interval(&self, i: usize, j: usize) -> Result<Interval> {
        self.check_axis(i)?;
        if j >= self.branches {
            return Err(Error::IndexOutOfRange {
                what: "branch",
                index: j,
                limit: self.branches,
            });
        }
        let e = &self.edges[i];
        Ok(Interval::from_bounds(e[j], e[j + 1]))
    }

    /// The branch containing `xi` on axis `i`. Branches are closed below and
    /// open above, except that the upper box endpoint belongs to the last branch.
    pub fn branch_index(&self, i: usize, xi: f64) -> Result<usize> {
        let b = self.axis(i)?;
        if !b.contains(xi) {
            return Err(Error::OutOfDomain { axis: i, value: xi });
        }
        let last = self.branches - 1;
        if xi == b.hi() {
            return Ok(last);
        }
        let e = &self.edges[i];
        let guess = ((xi - b.lo()) / self.widths[i]).floor();
        let mut j = if guess.is_finite() && guess > 0.0 {
            (guess as usize).min(last)
        } else {
            0
        };
        while j > 0 && xi < e[j] {
            j -= 1;
        }
        while j < last && xi >= e[j + 1] {
            j += 1;
        }
        Ok(j)
    }
}

/// Exact range bounds of a model: `λ = Σ L(A_i)`, `μ = Σ U(A_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeBounds {
    pub lambda: f64,
    pub mu: f64,
    pub row_lower: Vec<f64>,
    pub row_upper: Vec<f64>,
}

impl RangeBounds {
    pub fn as_interval(&self) -> Interval {
        Interval::from_bounds(self.lambda, self.mu)
    }

    pub fn width(&self) -> f64 {
        self.as_interval().diam()
    }
}

/// The `n × N` coefficient matrix of an interval superposition model.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperpositionModel {
    domain: Arc<Domain>,
    // Row-major, n * N entries.
    coeffs: Vec<Interval>,
    // Rows with L(A_i) < U(A_i), ascending.
    support: Vec<usize>,
}

impl SuperpositionModel {
    /// Builds a model from explicit rows, verbatim.
    pub fn from_rows(domain: &Arc<Domain>, rows: Vec<Vec<Interval>>) -> Result<Self> {
        let (n, nb) = (domain.dim(), domain.branches());
        if rows.len() != n || rows.iter().any(|r| r.len() != nb) {
            return Err(Error::ShapeMismatch(format!(
                "expected a {n}x{nb} coefficient matrix"
            )));
        }
        Ok(Self::from_coeffs(
            domain.clone(),
            rows.into_iter().flatten().collect(),
        ))
    }

    pub(crate) fn from_coeffs(domain: Arc<Domain>, coeffs: Vec<Interval>) -> Self {
        let mut m = SuperpositionModel {
            domain,
            coeffs,
            support: Vec::new(),
        };
        m.refresh_support();
        m
    }

    /// Like `from_coeffs`, then folds constant rows into the anchor row.
    pub(crate) fn from_coeffs_normalized(
        domain: Arc<Domain>,
        coeffs: Vec<Interval>,
    ) -> Result<Self> {
        let mut m = SuperpositionModel {
            domain,
            coeffs,
            support: Vec::new(),
        };
        m.fold_constant_rows()?;
        m.refresh_support();
        Ok(m)
    }

    /// Model of the coordinate function `x_i`: row `i` holds the branches of axis `i`.
    pub fn variable(domain: &Arc<Domain>, i: usize) -> Result<Self> {
        domain.axis(i)?;
        let nb = domain.branches();
        let mut coeffs = vec![Interval::ZERO; domain.dim() * nb];
        for j in 0..nb {
            coeffs[i * nb + j] = domain.branch_interval(i, j)?;
        }
        Ok(Self::from_coeffs(domain.clone(), coeffs))
    }

    /// Constant model: row 0 holds `[c, c]`, everything else is zero.
    pub fn constant(domain: &Arc<Domain>, c: f64) -> Result<Self> {
        let c = Interval::new(c, c)?;
        Ok(Self::constant_interval(domain, c))
    }

    pub(crate) fn constant_interval(domain: &Arc<Domain>, c: Interval) -> Self {
        let nb = domain.branches();
        let mut coeffs = vec![Interval::ZERO; domain.dim() * nb];
        coeffs[..nb].fill(c);
        Self::from_coeffs(domain.clone(), coeffs)
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn branches(&self) -> usize {
        self.domain.branches()
    }

    pub fn coeff(&self, i: usize, j: usize) -> Interval {
        self.coeffs[i * self.branches() + j]
    }

    pub fn row(&self, i: usize) -> &[Interval] {
        let nb = self.branches();
        &self.coeffs[i * nb..(i + 1) * nb]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Interval]> {
        self.coeffs.chunks(self.branches())
    }

    pub(crate) fn coeffs(&self) -> &[Interval] {
        &self.coeffs
    }

    /// Rows with positive width, ascending.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    /// Number of endpoint reals held by the model (`2nN`).
    pub fn stored_reals(&self) -> usize {
        2 * self.coeffs.len()
    }

    pub fn row_lower(&self, i: usize) -> f64 {
        self.row(i)
            .iter()
            .map(Interval::lo)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn row_upper(&self, i: usize) -> f64 {
        self.row(i)
            .iter()
            .map(Interval::hi)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Row span `[L(A_i), U(A_i)]`.
    pub fn row_hull(&self, i: usize) -> Interval {
        Interval::from_bounds(self.row_lower(i), self.row_upper(i))
    }

    pub fn range(&self) -> RangeBounds {
        let n = self.dim();
        let row_lower: Vec<f64> = (0..n).map(|i| self.row_lower(i)).collect();
        let row_upper: Vec<f64> = (0..n).map(|i| self.row_upper(i)).collect();
        let mut lambda = 0.0;
        let mut mu = 0.0;
        for i in 0..n {
            lambda = round::add_down(lambda, row_lower[i]).unwrap_or(f64::MIN);
            mu = round::add_up(mu, row_upper[i]).unwrap_or(f64::MAX);
        }
        RangeBounds {
            lambda,
            mu,
            row_lower,
            row_upper,
        }
    }

    /// `F(x) = Σ_i A_i^{j_i}` with `j_i` the branch holding `x_i`.
    pub fn evaluate(&self, x: &[f64]) -> Result<Interval> {
        if x.len() != self.dim() {
            return Err(Error::ShapeMismatch(format!(
                "point has {} coordinates, domain has {}",
                x.len(),
                self.dim()
            )));
        }
        let mut acc = Interval::ZERO;
        for (i, &xi) in x.iter().enumerate() {
            let j = self.domain.branch_index(i, xi)?;
            acc = acc.add(&self.coeff(i, j))?;
        }
        Ok(acc)
    }

    /// At most one row has positive width.
    pub fn is_separable(&self) -> bool {
        self.support.len() <= 1
    }

    /// `max_x diam F(x)`; rows choose their branches independently.
    pub fn max_pointwise_diam(&self) -> f64 {
        let mut total = 0.0;
        for row in self.rows() {
            let widest = row.iter().map(Interval::diam).fold(0.0, f64::max);
            total = round::add_up(total, widest).unwrap_or(f64::MAX);
        }
        total
    }

    /// Row receiving remainder terms: the support row with the largest average
    /// entry diameter, lowest index on ties, row 0 when the support is empty.
    pub fn remainder_row(&self) -> usize {
        let mut best = 0;
        let mut best_avg = f64::NEG_INFINITY;
        for &i in &self.support {
            let avg = self.row(i).iter().map(Interval::diam).sum::<f64>() / self.branches() as f64;
            if avg > best_avg {
                best_avg = avg;
                best = i;
            }
        }
        best
    }

    /// Adds `r · [-1, 1]` to every entry of row `k`.
    pub(crate) fn add_to_row(&mut self, k: usize, term: Interval) -> Result<()> {
        if term == Interval::ZERO {
            return Ok(());
        }
        let nb = self.branches();
        for c in &mut self.coeffs[k * nb..(k + 1) * nb] {
            *c = c.add(&term)?;
        }
        self.refresh_support();
        Ok(())
    }

    fn refresh_support(&mut self) {
        self.support = (0..self.dim())
            .filter(|&i| self.row_lower(i) < self.row_upper(i))
            .collect();
    }

    // With a single branch every row is constant and folding would erase the
    // row structure entirely, so it only applies for N > 1.
    fn fold_constant_rows(&mut self) -> Result<()> {
        let (n, nb) = (self.dim(), self.branches());
        if nb == 1 {
            return Ok(());
        }
        let is_constant = |coeffs: &[Interval], i: usize| {
            let row = &coeffs[i * nb..(i + 1) * nb];
            row.iter().all(|c| *c == row[0])
        };
        let anchor = (0..n).find(|&i| !is_constant(&self.coeffs, i)).unwrap_or(0);
        let mut offset = Interval::ZERO;
        for i in (0..n).filter(|&i| i != anchor) {
            if is_constant(&self.coeffs, i) && self.coeffs[i * nb] != Interval::ZERO {
                offset = offset.add(&self.coeffs[i * nb])?;
                self.coeffs[i * nb..(i + 1) * nb].fill(Interval::ZERO);
            }
        }
        if offset != Interval::ZERO {
            for c in &mut self.coeffs[anchor * nb..(anchor + 1) * nb] {
                *c = c.add(&offset)?;
            }
        }
        Ok(())
    }
}
