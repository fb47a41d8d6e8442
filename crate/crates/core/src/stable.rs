//! Symmetric alpha-stable variates, their absolute moments, and discretized
//! stable random measures on uniform grids.

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::rng::{cell_stream, next_pair, open_unit};

/// Stability index and scale of a symmetric alpha-stable law with
/// characteristic function `exp(-|scale * xi|^alpha)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableParams {
    pub alpha: f64,
    pub scale: f64,
}

impl StableParams {
    pub fn new(alpha: f64, scale: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !(scale >= 0.0) || !scale.is_finite() {
            return Err(Error::domain("scale", format!("must be finite and >= 0, got {scale}")));
        }
        Ok(Self { alpha, scale })
    }

    pub fn standard(alpha: f64) -> Result<Self> {
        Self::new(alpha, 1.0)
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 1.0 && alpha < 2.0 {
        Ok(())
    } else {
        Err(Error::domain("alpha", format!("must lie in (1, 2), got {alpha}")))
    }
}

/// Chambers-Mallows-Stuck map for the symmetric case.
///
/// `angle` must lie in (-pi/2, pi/2) and `expo` must be positive. The map is
/// odd in `angle`, so flipping the sign of the angle negates the variate.
#[inline]
pub fn cms_transform(alpha: f64, angle: f64, expo: f64) -> f64 {
    let inv = 1.0 / alpha;
    let head = (alpha * angle).sin() / angle.cos().powf(inv);
    let tail = (((1.0 - alpha) * angle).cos() / expo).powf((1.0 - alpha) * inv);
    head * tail
}

#[inline]
fn standard_from_uniforms(alpha: f64, u1: f64, u2: f64) -> f64 {
    let angle = PI * (u1 - 0.5);
    let expo = -u2.ln();
    cms_transform(alpha, angle, expo)
}

/// One SαS draw with the given scale.
pub fn sample_sas<R: RngCore + ?Sized>(params: &StableParams, rng: &mut R) -> Result<f64> {
    check_alpha(params.alpha)?;
    if !(params.scale >= 0.0) {
        return Err(Error::domain("scale", format!("must be >= 0, got {}", params.scale)));
    }
    let u1 = open_unit(rng.next_u64());
    let u2 = open_unit(rng.next_u64());
    if params.scale == 0.0 {
        return Ok(0.0);
    }
    Ok(params.scale * standard_from_uniforms(params.alpha, u1, u2))
}

/// `E|S|^p` for a standard (scale 1) SαS variable:
/// `2^p Γ((1+p)/2) Γ(1-p/α) / (√π Γ(1-p/2))`.
pub fn moment_constant(p: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(p > 0.0) {
        return Err(Error::domain("p", format!("must be > 0, got {p}")));
    }
    if p >= alpha {
        return Err(Error::InfiniteMoment { p, alpha });
    }
    let num = 2f64.powf(p) * gamma((1.0 + p) / 2.0) * gamma(1.0 - p / alpha);
    let den = PI.sqrt() * gamma(1.0 - p / 2.0);
    Ok(num / den)
}

/// `E|S|^p` by quadrature of the inversion formula
/// `(2/π) Γ(p+1) sin(pπ/2) ∫_0^∞ (1 - e^{-t^α}) t^{-p-1} dt`.
///
/// An independent cross-check of [`moment_constant`]; the integral is taken
/// in `x = ln t`, with both exponential tails added in closed form.
pub fn moment_by_inversion(p: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(p > 0.0) {
        return Err(Error::domain("p", format!("must be > 0, got {p}")));
    }
    if p >= alpha {
        return Err(Error::InfiniteMoment { p, alpha });
    }
    // x > hi: 1 - exp(-e^{αx}) == 1 in double precision
    let hi = 4.0 / alpha;
    // x < lo: 1 - exp(-e^{αx}) = e^{αx} (1 + O(e^{αx}))
    let lo = -40.0 / alpha;
    let f = |x: f64| (-(-(alpha * x).exp()).exp_m1()) * (-p * x).exp();
    let pieces = 200;
    let breaks: Vec<f64> = (0..=pieces).map(|i| lo + (hi - lo) * i as f64 / pieces as f64).collect();
    let mid = crate::quadrature::integrate(f, &breaks, 1e-15, 1e-14, 50_000)?.value;
    let right = (-p * hi).exp() / p;
    let left = ((alpha - p) * lo).exp() / (alpha - p);
    let integral = left + mid + right;
    Ok(2.0 / PI * gamma(p + 1.0) * (p * PI / 2.0).sin() * integral)
}

/// A seeded realization of the stable random measure on consecutive cells
/// `[origin + j*mesh, origin + (j+1)*mesh)`, `j = 0..count`.
///
/// Each increment has scale `mesh^(1/alpha)`. Draws are keyed by the absolute
/// cell index `round(origin / mesh) + j`, so two grids with the same seed and
/// mesh agree on every cell they share.
#[derive(Debug, Clone, PartialEq)]
pub struct StableNoiseGrid {
    pub alpha: f64,
    pub mesh: f64,
    pub origin: f64,
    pub first_cell: i64,
    pub increments: Vec<f64>,
    pub seed: u64,
}

const FILL_CHUNK: usize = 4096;

/// Draw a noise grid. The result is identical for any rayon pool size.
pub fn noise_grid(alpha: f64, mesh: f64, origin: f64, count: usize, seed: u64) -> Result<StableNoiseGrid> {
    check_alpha(alpha)?;
    if !(mesh > 0.0) || !mesh.is_finite() {
        return Err(Error::domain("mesh", format!("must be positive and finite, got {mesh}")));
    }
    if count == 0 {
        return Err(Error::domain("count", "must be >= 1"));
    }
    let first = origin / mesh;
    if !first.is_finite() || first.abs() > (1u64 << 52) as f64 || count as u64 > (1u64 << 40) {
        return Err(Error::Size(format!(
            "span origin {origin} / mesh {mesh} with {count} cells exceeds the addressable range"
        )));
    }
    let first_cell = first.round() as i64;
    let scale = mesh.powf(1.0 / alpha);
    let mut increments = vec![0.0; count];
    increments
        .par_chunks_mut(FILL_CHUNK)
        .enumerate()
        .for_each(|(chunk, out)| {
            let mut rng = cell_stream(seed, first_cell + (chunk * FILL_CHUNK) as i64);
            for z in out.iter_mut() {
                let (u1, u2) = next_pair(&mut rng);
                *z = scale * standard_from_uniforms(alpha, u1, u2);
            }
        });
    Ok(StableNoiseGrid {
        alpha,
        mesh,
        origin,
        first_cell,
        increments,
        seed,
    })
}

impl StableNoiseGrid {
    /// A grid with caller-supplied increments (zero noise, injected sums, ...).
    pub fn from_increments(alpha: f64, mesh: f64, origin: f64, increments: Vec<f64>) -> Result<Self> {
        check_alpha(alpha)?;
        if !(mesh > 0.0) {
            return Err(Error::domain("mesh", format!("must be positive, got {mesh}")));
        }
        if increments.is_empty() {
            return Err(Error::domain("count", "must be >= 1"));
        }
        Ok(Self {
            alpha,
            mesh,
            origin,
            first_cell: (origin / mesh).round() as i64,
            increments,
            seed: 0,
        })
    }

    pub fn count(&self) -> usize {
        self.increments.len()
    }

    /// Left endpoint of cell `j`.
    #[inline]
    pub fn left(&self, j: usize) -> f64 {
        (self.first_cell + j as i64) as f64 * self.mesh
    }

    /// Right end of the span covered by the grid.
    pub fn end(&self) -> f64 {
        (self.first_cell + self.count() as i64) as f64 * self.mesh
    }

    pub fn start(&self) -> f64 {
        self.first_cell as f64 * self.mesh
    }

    /// Scale of every increment, `mesh^(1/alpha)`.
    pub fn cell_scale(&self) -> f64 {
        self.mesh.powf(1.0 / self.alpha)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.increments.iter_mut().for_each(|z| *z *= factor);
        out
    }

    /// Cellwise sum of two grids on the same cells.
    pub fn plus(&self, other: &Self) -> Result<Self> {
        if self.first_cell != other.first_cell || self.count() != other.count() || self.mesh != other.mesh {
            return Err(Error::Precondition("grids must share mesh and cells".into()));
        }
        let mut out = self.clone();
        out.increments
            .iter_mut()
            .zip(&other.increments)
            .for_each(|(a, b)| *a += b);
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn zero_scale_gives_zero() {
        let p = StableParams::new(1.3, 0.0).unwrap();
        let mut rng = seeded(5);
        assert_eq!(sample_sas(&p, &mut rng).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(StableParams::new(2.0, 1.0).is_err());
        assert!(StableParams::new(1.0, 1.0).is_err());
        assert!(StableParams::new(1.5, -1.0).is_err());
        assert!(matches!(moment_constant(1.5, 1.5), Err(Error::InfiniteMoment { .. })));
        assert!(matches!(moment_constant(0.0, 1.5), Err(Error::Domain { .. })));
        assert!(matches!(moment_constant(-0.1, 1.5), Err(Error::Domain { .. })));
    }

    #[test]
    fn same_seed_same_draw() {
        let p = StableParams::standard(1.5).unwrap();
        let a = sample_sas(&p, &mut seeded(99)).unwrap();
        let b = sample_sas(&p, &mut seeded(99)).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn angle_flip_negates() {
        for &a in &[1.1, 1.5, 1.9] {
            for &v in &[0.1, 0.7, 1.4] {
                assert_eq!(cms_transform(a, -v, 0.8), -cms_transform(a, v, 0.8));
            }
        }
    }

    #[test]
    fn scale_factors_out() {
        let unit = StableParams::standard(1.4).unwrap();
        let big = StableParams::new(1.4, 3.5).unwrap();
        for s in 0..50 {
            let x = sample_sas(&unit, &mut seeded(s)).unwrap();
            let y = sample_sas(&big, &mut seeded(s)).unwrap();
            assert!((y - 3.5 * x).abs() <= 1e-12 * y.abs().max(1.0));
        }
    }

    #[test]
    fn closed_form_matches_inversion_quadrature() {
        for &alpha in &[1.2, 1.5, 1.8] {
            for &p in &[0.1, 0.25, 0.5, 1.0] {
                let a = moment_constant(p, alpha).unwrap();
                let b = moment_by_inversion(p, alpha).unwrap();
                assert!((a - b).abs() < 1e-9 * a, "p={p} alpha={alpha}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn moment_constant_near_zero_order_tends_to_one() {
        let c = moment_constant(1e-9, 1.5).unwrap();
        assert!((c - 1.0).abs() < 1e-8);
    }

    #[test]
    fn moment_constant_increases_with_order() {
        let grid: Vec<f64> = (1..14).map(|i| i as f64 * 0.1).collect();
        let vals: Vec<f64> = grid.iter().map(|&p| moment_constant(p, 1.5).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[1] > w[0]), "{vals:?}");
    }

    #[test]
    fn unit_cell_has_unit_scale() {
        let g = noise_grid(1.7, 1.0, 0.0, 1, 3).unwrap();
        assert_eq!(g.cell_scale(), 1.0);
        assert_eq!(g.count(), 1);
    }

    #[test]
    fn seed_sensitivity_and_shared_cells() {
        let a = noise_grid(1.5, 0.01, -1.0, 300, 10).unwrap();
        let b = noise_grid(1.5, 0.01, -1.0, 300, 11).unwrap();
        assert_ne!(a.increments, b.increments);
        // Same seed and mesh, shifted origin: overlapping cells coincide.
        let c = noise_grid(1.5, 0.01, -0.5, 100, 10).unwrap();
        assert_eq!(&a.increments[50..150], &c.increments[..]);
    }

    #[test]
    fn fill_is_independent_of_pool_size() {
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| noise_grid(1.3, 1e-3, -2.0, 20_000, 42).unwrap());
        let b = four.install(|| noise_grid(1.3, 1e-3, -2.0, 20_000, 42).unwrap());
        assert!(a.increments.iter().zip(&b.increments).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn grid_errors() {
        assert!(noise_grid(1.5, 0.0, 0.0, 1, 0).is_err());
        assert!(noise_grid(1.5, 1.0, 0.0, 0, 0).is_err());
        assert!(matches!(noise_grid(1.5, 1e-300, 1e10, 1, 0), Err(Error::Size(_))));
    }

    #[test]
    fn extreme_uniforms_give_finite_draws() {
        for &(a, b) in &[(0u64, 0u64), (u64::MAX, u64::MAX), (0, u64::MAX), (u64::MAX, 0)] {
            let x = standard_from_uniforms(1.2, open_unit(a), open_unit(b));
            assert!(x.is_finite());
            assert!(PI * (open_unit(a) - 0.5) < FRAC_PI_2);
        }
    }
}
