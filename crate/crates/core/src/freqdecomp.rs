//! Smooth partition of unity on frequency space and the frequency-uniform
//! projections `box_{k}` and `box_{j,k}` with symbol `sigma(2^{-j} xi - k)`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::scalar::Scalar;

/// Smallest dyadic scale used by default; bands narrower than the frequency
/// grid spacing are unresolvable, so callers working at deep scales must use
/// long grids.
pub const DEFAULT_J_MIN: i32 = -8;

/// Dyadic band address: scale `j <= 0`, integer translate `k`. The symbol is
/// `sigma(2^{-j} xi - k)`, supported on `2^j [k - 3/4, k + 3/4]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BandIndex {
    pub j: i32,
    pub k: i64,
}

impl BandIndex {
    pub fn new(j: i32, k: i64) -> Result<Self> {
        if j > 0 {
            return Err(Error::Config(format!("band scale must satisfy j <= 0, got {j}")));
        }
        Ok(Self { j, k })
    }

    /// Band center frequency `2^j k`.
    pub fn center(&self) -> f64 {
        2f64.powi(self.j) * self.k as f64
    }
}

/// `C^infty` ramp `B(t) = h(t) / (h(t) + h(1-t))` with `h(t) = e^{-1/t}` for
/// `t > 0`: zero for `t <= 0`, one for `t >= 1`.
fn ramp(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let h = (-1.0 / t).exp();
        let h1 = (-1.0 / (1.0 - t)).exp();
        h / (h + h1)
    }
}

/// Base bump: 1 on `[-1/2, 1/2]`, supported in `[-3/4, 3/4]`.
fn bump(x: f64) -> f64 {
    ramp(4.0 * (x + 0.75)) * ramp(4.0 * (0.75 - x))
}

/// The unnormalized base bump, exposed for smooth spectral windows.
pub fn bump_raw(x: f64) -> f64 {
    bump(x)
}

/// Normalized cutoff `sigma` whose integer translates form a partition of
/// unity. The construction is fixed (not just its support conditions) so that
/// every reported constant is reproducible.
#[derive(Debug, Clone, Copy)]
pub struct CutoffProfile<T: Scalar> {
    smoothness: u32,
    _marker: std::marker::PhantomData<T>,
}

impl<T: Scalar> CutoffProfile<T> {
    pub fn smoothness(&self) -> u32 {
        self.smoothness
    }

    /// `sigma(x) = psi(x) / sum_k psi(x - k)`; the denominator is 1-periodic
    /// and at least 1, so the translates sum to one exactly.
    pub fn eval(&self, x: f64) -> f64 {
        let num = bump(x);
        if num == 0.0 {
            return 0.0;
        }
        let kc = x.round() as i64;
        let mut den = 0.0;
        for k in (kc - 1)..=(kc + 1) {
            den += bump(x - k as f64);
        }
        num / den
    }

    /// Band symbol `sigma(2^{-j} xi - k)` at frequency `xi`.
    pub fn band_symbol(&self, b: BandIndex, xi: f64) -> f64 {
        self.eval(xi * 2f64.powi(-b.j) - b.k as f64)
    }
}

/// Builds the normalized cutoff. The explicit `e^{-1/t}` construction is
/// `C^infty`, so any requested smoothness order `>= 2` is satisfied; the
/// value is recorded on the profile.
pub fn build_cutoff<T: Scalar>(smoothness: u32) -> Result<CutoffProfile<T>> {
    if smoothness < 2 {
        return Err(Error::Config(format!(
            "cutoff smoothness must be >= 2, got {smoothness}"
        )));
    }
    Ok(CutoffProfile { smoothness, _marker: std::marker::PhantomData })
}

/// `box_{j,k} f = F^{-1} sigma(2^{-j} xi - k) F f`. Enforces the resolvable
/// range at operator-application time.
pub fn box_project<T: Scalar>(
    f: &GridFunction<T>,
    b: BandIndex,
    c: &CutoffProfile<T>,
) -> Result<GridFunction<T>> {
    let xi_max = f.spec().xi_max().to_f64c();
    if b.center().abs() + 1.0 >= xi_max {
        return Err(Error::BandOutOfRange { j: b.j, k: b.k, xi_max });
    }
    Ok(box_project_unchecked(f, b, c))
}

/// Same multiplier without the range check; used internally by norm sweeps
/// that iterate every band meeting the grid.
pub fn box_project_unchecked<T: Scalar>(
    f: &GridFunction<T>,
    b: BandIndex,
    c: &CutoffProfile<T>,
) -> GridFunction<T> {
    f.apply_multiplier(|xi| Complex::new(T::from_f64c(c.band_symbol(b, xi.to_f64c())), T::zero()))
}

/// Weighted coefficients of `box_{j,k} f` without the inverse transform;
/// enough for any `L^2`-type quantity via Parseval.
pub fn box_coeffs<T: Scalar>(
    f: &GridFunction<T>,
    b: BandIndex,
    c: &CutoffProfile<T>,
) -> Vec<Complex<T>> {
    (0..f.spec().points())
        .map(|i| {
            let w = c.band_symbol(b, f.spec().xi(i).to_f64c());
            f.coeffs()[i] * T::from_f64c(w)
        })
        .collect()
}

/// True when the band's support `2^j [k - 3/4, k + 3/4]` meets the grid's
/// resolvable frequency range.
pub fn band_meets_grid<T: Scalar>(f_spec: &crate::grid::GridSpec<T>, b: BandIndex) -> bool {
    let w = 2f64.powi(b.j);
    let lo = w * (b.k as f64 - 0.75);
    let hi = w * (b.k as f64 + 0.75);
    let xi_max = f_spec.xi_max().to_f64c();
    hi > -xi_max && lo < xi_max
}

/// All translates at scale `j` meeting the grid.
pub fn bands_for_grid<T: Scalar>(
    f_spec: &crate::grid::GridSpec<T>,
    j: i32,
) -> impl Iterator<Item = BandIndex> {
    let xi_max = f_spec.xi_max().to_f64c();
    let k_max = (xi_max * 2f64.powi(-j) + 0.75).ceil() as i64;
    (-k_max..=k_max).map(move |k| BandIndex { j, k })
}

/// `||f||_q / (R^{1/p - 1/q} ||f||_p)` for band-limited `f` with spectrum in
/// the ball of radius `R`; boundedness across a family is the content of the
/// Bernstein inequality.
pub fn bernstein_ratio<T: Scalar>(f: &GridFunction<T>, p: f64, q: f64, radius: f64) -> Result<T> {
    if !(1.0..=f64::INFINITY).contains(&p) || !(1.0..=f64::INFINITY).contains(&q) {
        return Err(Error::InvalidExponent(format!("p={p}, q={q}")));
    }
    if p > q {
        return Err(Error::InvalidExponent(format!("Bernstein needs p <= q, got p={p} > q={q}")));
    }
    let mut outside = T::zero();
    let mut total = T::zero();
    for i in 0..f.spec().points() {
        let mass = f.coeffs()[i].norm_sqr();
        total += mass;
        if f.spec().xi(i).abs().to_f64c() > radius {
            outside += mass;
        }
    }
    if total > T::zero() && outside > T::from_f64c(1e-10) * total {
        return Err(Error::SpectrumNotContained {
            radius,
            fraction: (outside / total).to_f64c(),
        });
    }
    let np = crate::modnorms::lp_norm(f, p)?;
    let nq = crate::modnorms::lp_norm(f, q)?;
    let inv = |e: f64| if e.is_infinite() { 0.0 } else { 1.0 / e };
    let scale = T::from_f64c(radius.powf(inv(p) - inv(q)));
    Ok(nq / (scale * np))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GridFunction, GridSpec};
    use num_complex::Complex;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cutoff() -> CutoffProfile<f64> {
        build_cutoff(2).unwrap()
    }

    #[test]
    fn sigma_values_at_landmarks() {
        let c = cutoff();
        assert_eq!(c.eval(0.0), 1.0);
        assert_eq!(c.eval(0.75), 0.0);
        assert_eq!(c.eval(-0.75), 0.0);
        // symmetry
        for x in [0.1, 0.33, 0.61, 0.74] {
            assert!((c.eval(x) - c.eval(-x)).abs() <= 1e-15);
        }
    }

    #[test]
    fn partition_of_unity_at_offgrid_point() {
        let c = cutoff();
        let s: f64 = (-2..=2).map(|k| c.eval(0.6 - k as f64)).sum();
        assert!((s - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn partition_of_unity_on_grid_all_scales() {
        let c = cutoff();
        let spec = GridSpec::new(64.0, 512).unwrap();
        for j in DEFAULT_J_MIN..=0 {
            for i in 0..spec.points() {
                let xi = spec.xi(i);
                let kc = (xi * 2f64.powi(-j)).round() as i64;
                let s: f64 = ((kc - 2)..=(kc + 2))
                    .map(|k| c.band_symbol(BandIndex { j, k }, xi))
                    .sum();
                assert!((s - 1.0).abs() <= 1e-12, "j={j}, xi={xi}");
            }
        }
    }

    fn random_band_limited(spec: GridSpec<f64>, seed: u64, radius: f64) -> GridFunction<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs = (0..spec.points())
            .map(|i| {
                if spec.xi(i).abs() <= radius {
                    Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                } else {
                    Complex::new(0.0, 0.0)
                }
            })
            .collect();
        GridFunction::from_coeffs(spec, coeffs).unwrap()
    }

    #[test]
    fn reconstruction_and_orthogonality() {
        let c = cutoff();
        let spec = GridSpec::new(64.0, 512).unwrap();
        let f = random_band_limited(spec, 7, 10.0);
        for j in [-3, 0] {
            let mut sum = GridFunction::zero(spec);
            for b in bands_for_grid(&spec, j) {
                sum = sum.add(&box_project_unchecked(&f, b, &c)).unwrap();
            }
            let err = sum.sub(&f).unwrap().l2_norm() / f.l2_norm();
            assert!(err <= 1e-12, "j={j}, err={err}");
        }

        // box_{0,k} box_{0,k'} = 0 for |k - k'| >= 2
        let p0 = box_project(&f, BandIndex { j: 0, k: 3 }, &c).unwrap();
        let p = box_project(&p0, BandIndex { j: 0, k: 5 }, &c).unwrap();
        assert!(p.l2_norm() <= 1e-12 * f.l2_norm());
    }

    #[test]
    fn exact_mode_alignment_is_identity() {
        let c = cutoff();
        let spec = GridSpec::new(64.0, 512).unwrap();
        // a single mode whose frequency lies in the flat core of sigma(. - 2),
        // i.e. within [1.5, 2.5]: the projection is the identity exactly
        let m0 = (2.0 * spec.length() / (2.0 * std::f64::consts::PI)).round() as i64;
        let k0 = 2.0 * std::f64::consts::PI * m0 as f64 / spec.length();
        assert!((k0 - 2.0).abs() < 0.1);
        let f = GridFunction::from_fn(spec, |x| Complex::from_polar(1.0, k0 * x)).unwrap();
        let p = box_project(&f, BandIndex { j: 0, k: 2 }, &c).unwrap();
        let err = p.sub(&f).unwrap().l2_norm() / f.l2_norm();
        assert!(err <= 1e-12);
    }

    #[test]
    fn band_out_of_range_is_rejected() {
        let c = cutoff();
        let spec = GridSpec::new(64.0, 128).unwrap(); // xi_max = 2 pi
        let f = GridFunction::zero(spec);
        assert!(matches!(
            box_project(&f, BandIndex { j: 0, k: 7 }, &c),
            Err(Error::BandOutOfRange { .. })
        ));
    }

    #[test]
    fn bernstein_ratio_p_equals_q() {
        let spec = GridSpec::new(64.0, 512).unwrap();
        let f = random_band_limited(spec, 3, 4.0);
        let r = bernstein_ratio(&f, 2.0, 2.0, 4.0).unwrap();
        assert!((r - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn bernstein_ratio_constant_in_radius_sweep() {
        // f with flat spectrum on [-R, R]: the p=2 -> q=infty ratio is
        // R-independent by exact dilation scaling.
        let spec = GridSpec::<f64>::new(1024.0, 8192).unwrap();
        let mut ratios = Vec::new();
        for e in -4..=4 {
            let radius = 2f64.powi(e);
            let coeffs: Vec<Complex<f64>> = (0..spec.points())
                .map(|i| {
                    let t = spec.xi(i).abs() / radius;
                    Complex::new(ramp(4.0 * (1.0 - t)).min(1.0), 0.0)
                })
                .collect();
            let f = GridFunction::from_coeffs(spec, coeffs).unwrap();
            ratios.push(bernstein_ratio(&f, 2.0, f64::INFINITY, radius).unwrap());
        }
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().cloned().fold(0.0f64, f64::max);
        assert!(hi / lo <= 1.02, "spread {}", hi / lo);
    }

    #[test]
    fn bernstein_ratio_rejects_uncontained_spectrum() {
        let spec = GridSpec::new(64.0, 512).unwrap();
        let f = random_band_limited(spec, 5, 10.0);
        assert!(matches!(
            bernstein_ratio(&f, 1.0, 2.0, 1.0),
            Err(Error::SpectrumNotContained { .. })
        ));
        assert!(matches!(
            bernstein_ratio(&f, 4.0, 2.0, 16.0),
            Err(Error::InvalidExponent(_))
        ));
    }

    #[test]
    fn gaussian_truncated_baseline_ratio_is_finite() {
        let spec = GridSpec::<f64>::new(64.0, 1024).unwrap();
        let g = GridFunction::from_fn(spec, |x| Complex::new((-x * x / 2.0).exp(), 0.0)).unwrap();
        let truncated = g.apply_multiplier(|xi| {
            Complex::new(if xi.abs() <= 4.0 { 1.0 } else { 0.0 }, 0.0)
        });
        let r = bernstein_ratio(&truncated, 1.0, 2.0, 4.0).unwrap();
        assert!(r.is_finite() && r > 0.0);
    }
}
