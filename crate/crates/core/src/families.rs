//! Deterministic, seeded families of test functions and space-time fields
//! used by the verification sweeps: every random draw flows from one
//! caller-provided ChaCha8 generator so sweeps are reproducible.

use num_complex::Complex;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::freqdecomp::{bump_raw, BandIndex};
use crate::grid::{uniform_times, GridFunction, GridSpec, SpaceTimeField};
use crate::scalar::Scalar;

/// `e^{-x^2 / (2 w^2)}`.
pub fn gaussian<T: Scalar>(spec: GridSpec<T>, width: f64) -> Result<GridFunction<T>> {
    let w2 = T::from_f64c(2.0 * width * width);
    GridFunction::from_fn(spec, |x| Complex::new((-x * x / w2).exp(), T::zero()))
}

/// `e^{i k0 x} e^{-x^2 / (2 w^2)}`.
pub fn modulated_gaussian<T: Scalar>(
    spec: GridSpec<T>,
    k0: f64,
    width: f64,
) -> Result<GridFunction<T>> {
    let w2 = T::from_f64c(2.0 * width * width);
    let k = T::from_f64c(k0);
    GridFunction::from_fn(spec, |x| Complex::from_polar((-x * x / w2).exp(), k * x))
}

/// Uniform random spectrum on `|xi| <= radius`, zero outside.
pub fn random_band_limited<T: Scalar>(
    spec: GridSpec<T>,
    rng: &mut ChaCha8Rng,
    radius: f64,
) -> Result<GridFunction<T>> {
    let coeffs = (0..spec.points())
        .map(|i| {
            if spec.xi(i).abs().to_f64c() <= radius {
                Complex::new(
                    T::from_f64c(rng.gen_range(-1.0..1.0)),
                    T::from_f64c(rng.gen_range(-1.0..1.0)),
                )
            } else {
                Complex::new(T::zero(), T::zero())
            }
        })
        .collect();
    GridFunction::from_coeffs(spec, coeffs)
}

/// Smooth spectral profile supported exactly on `[-3/4, 3/4]` (a band's
/// support in its own units): `g_hat(y) = e^{-8 y^2} psi(y)`.
pub fn band_profile(y: f64) -> f64 {
    (-8.0 * y * y).exp() * bump_raw(y)
}

/// The self-similar band datum `u_hat(xi) = g_hat(2^{-j} xi - k)`: the same
/// profile placed in band `(j, k)` at every scale, so that scaling laws act
/// on it exactly.
pub fn self_similar_band<T: Scalar>(spec: GridSpec<T>, b: BandIndex) -> Result<GridFunction<T>> {
    let w = 2f64.powi(b.j);
    let coeffs = (0..spec.points())
        .map(|i| {
            let y = spec.xi(i).to_f64c() / w - b.k as f64;
            Complex::new(T::from_f64c(band_profile(y)), T::zero())
        })
        .collect();
    GridFunction::from_coeffs(spec, coeffs)
}

/// Random spectrum confined to band `(j, k)`'s support, shaped by the smooth
/// profile so the band edges stay smooth.
pub fn random_in_band<T: Scalar>(
    spec: GridSpec<T>,
    rng: &mut ChaCha8Rng,
    b: BandIndex,
) -> Result<GridFunction<T>> {
    let w = 2f64.powi(b.j);
    let coeffs = (0..spec.points())
        .map(|i| {
            let y = spec.xi(i).to_f64c() / w - b.k as f64;
            let env = band_profile(y);
            if env > 0.0 {
                Complex::new(
                    T::from_f64c(env * rng.gen_range(-1.0..1.0)),
                    T::from_f64c(env * rng.gen_range(-1.0..1.0)),
                )
            } else {
                Complex::new(T::zero(), T::zero())
            }
        })
        .collect();
    GridFunction::from_coeffs(spec, coeffs)
}

/// Standard static family: one Gaussian, two modulated Gaussians and seeded
/// random band-limited draws, labelled for reports.
pub fn standard_family<T: Scalar>(
    spec: GridSpec<T>,
    rng: &mut ChaCha8Rng,
    n_random: usize,
    radius: f64,
) -> Result<Vec<(String, GridFunction<T>)>> {
    let mut fam = vec![
        ("gaussian".to_string(), gaussian(spec, 1.0)?),
        ("mod-gauss-2".to_string(), modulated_gaussian(spec, 2.0, 1.0)?),
        ("mod-gauss-5".to_string(), modulated_gaussian(spec, 5.0, 0.5)?),
    ];
    for i in 0..n_random {
        fam.push((format!("rand-{i}"), random_band_limited(spec, rng, radius)?));
    }
    Ok(fam)
}

/// Separable space-time field `a(t) b(x)` on a uniform time grid.
pub fn separable_field<T: Scalar>(
    b: &GridFunction<T>,
    a: impl Fn(T) -> Complex<T>,
    horizon: T,
    steps: usize,
) -> Result<SpaceTimeField<T>> {
    let times = uniform_times(horizon, steps)?;
    let frames = times.iter().map(|&t| b.scale(a(t))).collect();
    SpaceTimeField::new(times, frames)
}

/// Smooth-in-time random field: each retained mode carries a random complex
/// amplitude and a random temporal frequency in `[-nu_max, nu_max]`.
pub fn quasi_periodic_field<T: Scalar>(
    spec: GridSpec<T>,
    rng: &mut ChaCha8Rng,
    radius: f64,
    nu_max: f64,
    horizon: T,
    steps: usize,
) -> Result<SpaceTimeField<T>> {
    let times = uniform_times(horizon, steps)?;
    let modes: Vec<Option<(Complex<f64>, f64)>> = (0..spec.points())
        .map(|i| {
            if spec.xi(i).abs().to_f64c() <= radius {
                Some((
                    Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                    rng.gen_range(-nu_max..nu_max),
                ))
            } else {
                None
            }
        })
        .collect();
    let frames = times
        .iter()
        .map(|&t| {
            let coeffs = modes
                .iter()
                .map(|m| match m {
                    Some((c, nu)) => {
                        let rot = Complex::from_polar(1.0, nu * t.to_f64c());
                        let v = c * rot;
                        Complex::new(T::from_f64c(v.re), T::from_f64c(v.im))
                    }
                    None => Complex::new(T::zero(), T::zero()),
                })
                .collect();
            GridFunction::from_coeffs(spec, coeffs)
        })
        .collect::<Result<Vec<_>>>()?;
    SpaceTimeField::new(times, frames)
}
