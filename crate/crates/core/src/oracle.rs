//! Sampling-based ground truth for measuring enclosures.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::interval::Interval;
use crate::model::SuperpositionModel;
use crate::univariate::{workspace, AtomKind};

/// Default cap on the number of points evaluated by a single oracle call.
pub const DEFAULT_BUDGET: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleMode {
    /// `G` points per axis, box corners included.
    Grid { per_axis: usize },
    /// Uniform draws from a seeded generator.
    Random { count: usize, seed: u64 },
}

/// Images `f(x)` of sampled points together with their componentwise hull.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageSample {
    dim: usize,
    values: Vec<f64>,
    hull: Vec<Interval>,
}

impl ImageSample {
    pub fn from_points(dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 || values.is_empty() || !values.len().is_multiple_of(dim) {
            return Err(Error::ShapeMismatch(
                "image sample needs at least one point".into(),
            ));
        }
        let mut hull: Vec<Interval> = values[..dim].iter().map(|&v| Interval::point(v)).collect();
        for p in values.chunks(dim) {
            for (h, &v) in hull.iter_mut().zip(p) {
                *h = h.hull(&Interval::point(v));
            }
        }
        Ok(ImageSample { dim, values, hull })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn point(&self, k: usize) -> &[f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.dim)
    }

    /// Componentwise hull of the samples.
    pub fn hull(&self) -> &[Interval] {
        &self.hull
    }
}

/// `k`-th of `g` equally spaced points on `axis`, hitting both endpoints exactly.
fn lattice_coord(axis: &Interval, k: usize, g: usize) -> f64 {
    if g <= 1 || k == 0 {
        return axis.lo();
    }
    if k == g - 1 {
        return axis.hi();
    }
    let t = k as f64 / (g - 1) as f64;
    (axis.lo() + t * (axis.hi() - axis.lo())).clamp(axis.lo(), axis.hi())
}

fn grid_size(per_axis: usize, dim: usize, budget: u128) -> Result<usize> {
    let needed = (per_axis as u128)
        .checked_pow(dim as u32)
        .unwrap_or(u128::MAX);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    Ok(needed as usize)
}

/// Visits every point of the `per_axis^dim` lattice over `bx` in odometer order.
fn for_each_lattice_point(
    bx: &[Interval],
    per_axis: usize,
    mut f: impl FnMut(&[f64]) -> Result<()>,
) -> Result<()> {
    let dim = bx.len();
    let mut idx = vec![0usize; dim];
    let mut x: Vec<f64> = bx.iter().map(|a| lattice_coord(a, 0, per_axis)).collect();
    loop {
        f(&x)?;
        let mut axis = 0;
        loop {
            if axis == dim {
                return Ok(());
            }
            idx[axis] += 1;
            if idx[axis] < per_axis {
                x[axis] = lattice_coord(&bx[axis], idx[axis], per_axis);
                break;
            }
            idx[axis] = 0;
            x[axis] = lattice_coord(&bx[axis], 0, per_axis);
            axis += 1;
        }
    }
}

/// Evaluates `e` on a grid or on random points of `bx`.
pub fn sample_image(
    e: &Expr,
    bx: &[Interval],
    mode: SampleMode,
    budget: u128,
) -> Result<ImageSample> {
    if bx.len() != e.arity() {
        return Err(Error::ShapeMismatch(format!(
            "box has {} axes, expression has {} variables",
            bx.len(),
            e.arity()
        )));
    }
    let dim = e.output_count();
    let mut values = Vec::new();
    match mode {
        SampleMode::Grid { per_axis } => {
            if per_axis < 2 {
                return Err(Error::InvalidDomain(
                    "a sampling grid needs at least 2 points per axis".into(),
                ));
            }
            let total = grid_size(per_axis, bx.len(), budget)?;
            values.reserve(total * dim);
            for_each_lattice_point(bx, per_axis, |x| {
                values.extend(e.eval_point(x)?);
                Ok(())
            })?;
        }
        SampleMode::Random { count, seed } => {
            if count == 0 {
                return Err(Error::InvalidDomain(
                    "random sampling needs at least one point".into(),
                ));
            }
            if count as u128 > budget {
                return Err(Error::BudgetExceeded {
                    needed: count as u128,
                    budget,
                });
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut x = vec![0.0; bx.len()];
            values.reserve(count * dim);
            for _ in 0..count {
                for (xi, a) in x.iter_mut().zip(bx) {
                    *xi = uniform(&mut rng, a);
                }
                values.extend(e.eval_point(&x)?);
            }
        }
    }
    ImageSample::from_points(dim, values)
}

pub(crate) fn uniform(rng: &mut impl Rng, a: &Interval) -> f64 {
    let u: f64 = rng.random();
    (a.lo() + u * (a.hi() - a.lo())).clamp(a.lo(), a.hi())
}

/// Lattice points per axis used when maximising over a multi-dimensional enclosure.
pub const HAUSDORFF_LATTICE: usize = 21;

/// One-sided distance `sup_{y ∈ enclosure} min_p ‖y − p‖∞` from the enclosure box
/// to the sampled image.
pub fn hausdorff_enclosure(img: &ImageSample, enclosure: &[Interval]) -> Result<f64> {
    hausdorff_with_lattice(img, enclosure, HAUSDORFF_LATTICE)
}

pub fn hausdorff_with_lattice(
    img: &ImageSample,
    enclosure: &[Interval],
    per_axis: usize,
) -> Result<f64> {
    if enclosure.len() != img.dim() {
        return Err(Error::ShapeMismatch(format!(
            "enclosure has {} components, image has {}",
            enclosure.len(),
            img.dim()
        )));
    }
    for (k, (enc, hull)) in enclosure.iter().zip(img.hull()).enumerate() {
        if !hull.is_subset_of(enc) {
            return Err(Error::SoundnessViolation(format!(
                "component {k}: enclosure {enc} does not contain sampled hull {hull}"
            )));
        }
    }
    if img.dim() == 1 {
        let (enc, hull) = (enclosure[0], img.hull()[0]);
        return Ok((hull.lo() - enc.lo()).max(enc.hi() - hull.hi()).max(0.0));
    }
    let index = KdTree::new(img);
    let mut worst: f64 = 0.0;
    for_each_lattice_point(enclosure, per_axis.max(2), |y| {
        worst = worst.max(index.nearest(y));
        Ok(())
    })?;
    Ok(worst)
}

const LEAF_SIZE: usize = 16;

struct KdNode {
    lo: Vec<f64>,
    hi: Vec<f64>,
    start: usize,
    end: usize,
    children: Option<(usize, usize)>,
}

/// kd-tree over the sample for ∞-norm nearest-point queries.
struct KdTree<'a> {
    img: &'a ImageSample,
    order: Vec<usize>,
    nodes: Vec<KdNode>,
}

impl<'a> KdTree<'a> {
    fn new(img: &'a ImageSample) -> Self {
        let mut tree = KdTree {
            img,
            order: (0..img.len()).collect(),
            nodes: Vec::new(),
        };
        tree.build(0, img.len());
        tree
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let dim = self.img.dim();
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for &p in &self.order[start..end] {
            for (k, &v) in self.img.point(p).iter().enumerate() {
                lo[k] = lo[k].min(v);
                hi[k] = hi[k].max(v);
            }
        }
        let id = self.nodes.len();
        let axis = (0..dim)
            .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])))
            .unwrap_or(0);
        let split = end - start > LEAF_SIZE && hi[axis] > lo[axis];
        self.nodes.push(KdNode {
            lo,
            hi,
            start,
            end,
            children: None,
        });
        if split {
            let mid = start + (end - start) / 2;
            let img = self.img;
            self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
                img.point(a)[axis].total_cmp(&img.point(b)[axis])
            });
            let left = self.build(start, mid);
            let right = self.build(mid, end);
            self.nodes[id].children = Some((left, right));
        }
        id
    }

    fn box_distance(&self, node: usize, y: &[f64]) -> f64 {
        let n = &self.nodes[node];
        y.iter()
            .enumerate()
            .map(|(k, &v)| (n.lo[k] - v).max(v - n.hi[k]).max(0.0))
            .fold(0.0, f64::max)
    }

    fn nearest(&self, y: &[f64]) -> f64 {
        let mut best = f64::INFINITY;
        self.search(0, y, &mut best);
        best
    }

    fn search(&self, node: usize, y: &[f64], best: &mut f64) {
        let n = &self.nodes[node];
        match n.children {
            None => {
                for &p in &self.order[n.start..n.end] {
                    let d = self
                        .img
                        .point(p)
                        .iter()
                        .zip(y)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max);
                    *best = best.min(d);
                }
            }
            Some((l, r)) => {
                let (dl, dr) = (self.box_distance(l, y), self.box_distance(r, y));
                let order = if dl <= dr {
                    [(l, dl), (r, dr)]
                } else {
                    [(r, dr), (l, dl)]
                };
                for (child, d) in order {
                    if d < *best {
                        self.search(child, y, best);
                    }
                }
            }
        }
    }
}

/// Exact `(min, max)` of `Σ_i A_i^{j_i}` endpoint sums over all branch tuples.
pub fn brute_force_range(m: &SuperpositionModel, budget: u128) -> Result<(f64, f64)> {
    let (n, nb) = (m.dim(), m.branches());
    let needed = (nb as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let mut idx = vec![0usize; n];
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    loop {
        let mut s = Interval::ZERO;
        for (i, &j) in idx.iter().enumerate() {
            s = s.add(&m.coeff(i, j))?;
        }
        lo = lo.min(s.lo());
        hi = hi.max(s.hi());
        let mut axis = 0;
        loop {
            if axis == n {
                return Ok((lo, hi));
            }
            idx[axis] += 1;
            if idx[axis] < nb {
                break;
            }
            idx[axis] = 0;
            axis += 1;
        }
    }
}

/// Largest observed `|Σ g(ω+δ_i) − (n−1) g(ω) − g(ω+Σδ_i)| − r_g(A)` over random
/// admissible offsets and every corner offset. The left side is evaluated in
/// interval arithmetic and its smallest possible magnitude is used, so a
/// positive result certifies that the bound fails.
pub fn remainder_violation_search(
    g: AtomKind,
    m: &SuperpositionModel,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    let w = workspace(g, m)?;
    let n = m.dim();
    let hulls: Vec<Interval> = (0..n).map(|i| m.row_hull(i)).collect();
    let omega = w.omega_enclosure;
    let lower = Interval::point((n - 1) as f64).mul(&g.apply(&omega)?)?;
    let lhs = |y: &[f64]| -> Result<f64> {
        let mut sum = Interval::ZERO;
        let mut total = omega;
        for (&yi, &c) in y.iter().zip(&w.centers) {
            let delta = Interval::point(yi).sub(&Interval::point(c))?;
            sum = sum.add(&g.apply(&omega.add(&delta)?)?)?;
            total = total.add(&delta)?;
        }
        Ok(sum.sub(&lower)?.sub(&g.apply(&total)?)?.mig())
    };

    let mut worst = f64::NEG_INFINITY;
    let mut y = vec![0.0; n];
    if n < usize::BITS as usize && n <= 20 {
        for mask in 0u64..(1u64 << n) {
            for i in 0..n {
                y[i] = if mask >> i & 1 == 1 {
                    hulls[i].hi()
                } else {
                    hulls[i].lo()
                };
            }
            worst = worst.max(lhs(&y)? - w.remainder);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        for i in 0..n {
            y[i] = uniform(&mut rng, &hulls[i]);
        }
        worst = worst.max(lhs(&y)? - w.remainder);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Domain;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    #[test]
    fn grid_samples_include_corners() {
        let e = Expr::parse("x1", 1).unwrap();
        let s = sample_image(
            &e,
            &[iv(0.0, 1.0)],
            SampleMode::Grid { per_axis: 3 },
            DEFAULT_BUDGET,
        )
        .unwrap();
        assert_eq!(
            s.points().map(|p| p[0]).collect::<Vec<_>>(),
            vec![0.0, 0.5, 1.0]
        );
        assert_eq!(s.hull(), &[iv(0.0, 1.0)]);
        let sq = Expr::parse("sqr(x1)", 1).unwrap();
        let s = sample_image(
            &sq,
            &[iv(-1.0, 1.0)],
            SampleMode::Grid { per_axis: 101 },
            DEFAULT_BUDGET,
        )
        .unwrap();
        assert_eq!(s.hull(), &[iv(0.0, 1.0)]);
    }

    #[test]
    fn budgets_and_bad_modes() {
        let e = Expr::parse("x1 + x2 + x3", 3).unwrap();
        let bx = [iv(0.0, 1.0); 3];
        assert!(matches!(
            sample_image(&e, &bx, SampleMode::Grid { per_axis: 101 }, DEFAULT_BUDGET),
            Err(Error::BudgetExceeded {
                needed: 1_030_301,
                ..
            })
        ));
        assert!(sample_image(&e, &bx, SampleMode::Grid { per_axis: 1 }, DEFAULT_BUDGET).is_err());
        assert!(sample_image(
            &e,
            &bx,
            SampleMode::Random { count: 0, seed: 1 },
            DEFAULT_BUDGET
        )
        .is_err());
        assert!(sample_image(
            &e,
            &bx[..2],
            SampleMode::Grid { per_axis: 2 },
            DEFAULT_BUDGET
        )
        .is_err());
    }

    #[test]
    fn random_samples_are_reproducible() {
        let e = Expr::parse("sin(x1) * x2; x1", 2).unwrap();
        let bx = [iv(0.0, 3.0), iv(-1.0, 1.0)];
        let a = sample_image(
            &e,
            &bx,
            SampleMode::Random {
                count: 500,
                seed: 9,
            },
            DEFAULT_BUDGET,
        )
        .unwrap();
        let b = sample_image(
            &e,
            &bx,
            SampleMode::Random {
                count: 500,
                seed: 9,
            },
            DEFAULT_BUDGET,
        )
        .unwrap();
        let c = sample_image(
            &e,
            &bx,
            SampleMode::Random {
                count: 500,
                seed: 10,
            },
            DEFAULT_BUDGET,
        )
        .unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), 500);
    }

    #[test]
    fn scalar_hausdorff() {
        let img = ImageSample::from_points(1, vec![0.0, 1.0, 2.0]).unwrap();
        assert_eq!(hausdorff_enclosure(&img, &[iv(-1.0, 2.0)]).unwrap(), 1.0);
        assert_eq!(hausdorff_enclosure(&img, &[iv(0.0, 2.0)]).unwrap(), 0.0);
        assert!(matches!(
            hausdorff_enclosure(&img, &[iv(0.5, 2.0)]),
            Err(Error::SoundnessViolation(_))
        ));
    }

    #[test]
    fn vector_hausdorff_matches_brute_force() {
        let e = Expr::parse("sin(x1) + x2; x1 * x2; cos(x3)", 3).unwrap();
        let bx = [iv(0.0, 2.0), iv(-1.0, 1.0), iv(0.0, 3.0)];
        let img = sample_image(
            &e,
            &bx,
            SampleMode::Random {
                count: 3000,
                seed: 3,
            },
            DEFAULT_BUDGET,
        )
        .unwrap();
        let enc: Vec<Interval> = img
            .hull()
            .iter()
            .enumerate()
            .map(|(k, h)| iv(h.lo() - 0.3 * k as f64, h.hi() + 0.1))
            .collect();
        let fast = hausdorff_with_lattice(&img, &enc, 7).unwrap();
        let mut slow: f64 = 0.0;
        for_each_lattice_point(&enc, 7, |y| {
            let d = img
                .points()
                .map(|p| {
                    p.iter()
                        .zip(y)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max)
                })
                .fold(f64::INFINITY, f64::min);
            slow = slow.max(d);
            Ok(())
        })
        .unwrap();
        assert_eq!(fast, slow);
        let tight = hausdorff_with_lattice(&img, img.hull(), 7).unwrap();
        assert!(tight < fast);
    }

    #[test]
    fn degenerate_components() {
        let img = ImageSample::from_points(2, vec![1.0, 5.0, 2.0, 5.0, 3.0, 5.0]).unwrap();
        let d = hausdorff_with_lattice(&img, &[iv(1.0, 3.0), iv(4.0, 5.0)], 3).unwrap();
        assert_eq!(d, 1.0);
    }

    #[test]
    fn brute_force_ranges() {
        let d = Domain::shared(vec![iv(0.0, 1.0), iv(0.0, 1.0)], 2).unwrap();
        let m = SuperpositionModel::from_rows(
            &d,
            vec![
                vec![iv(1.0, 2.0), iv(3.0, 4.0)],
                vec![iv(0.0, 1.0), iv(-1.0, 0.0)],
            ],
        )
        .unwrap();
        assert_eq!(brute_force_range(&m, DEFAULT_BUDGET).unwrap(), (0.0, 5.0));
        let x = SuperpositionModel::variable(&d, 1).unwrap();
        assert_eq!(brute_force_range(&x, DEFAULT_BUDGET).unwrap(), (0.0, 1.0));
        assert!(brute_force_range(&x, 3).is_err());
    }

    #[test]
    fn remainder_search_examples() {
        let d = Domain::shared(vec![iv(0.0, 1.0), iv(0.0, 1.0)], 1).unwrap();
        let m = SuperpositionModel::from_rows(&d, vec![vec![iv(0.0, 1.0)], vec![iv(0.0, 1.0)]])
            .unwrap();
        assert_eq!(
            remainder_violation_search(AtomKind::Sqr, &m, 1000, 1).unwrap(),
            0.0
        );
        assert!(remainder_violation_search(AtomKind::Neg, &m, 1000, 1).unwrap() <= 0.0);
        let x = SuperpositionModel::variable(&d, 0).unwrap();
        for g in AtomKind::ALL {
            if matches!(g, AtomKind::Log | AtomKind::Inv) {
                continue;
            }
            assert!(
                remainder_violation_search(g, &x, 1000, 2).unwrap() <= 0.0,
                "{g:?}"
            );
        }
    }
}
