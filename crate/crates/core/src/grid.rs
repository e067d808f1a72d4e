//! Discrete spectral representation of functions on a periodic interval
//! approximating the real line.
//!
//! Conventions: the interval is `[-L/2, L/2)` sampled at `N` points,
//! `x_n = -L/2 + n L/N`. Frequencies are `xi_m = 2 pi m / L` for
//! `m in {-N/2, ..., N/2 - 1}`, stored in FFT order (index `i` holds
//! `m = i` for `i < N/2` and `m = i - N` otherwise). The forward transform
//! approximates `\int f(x) e^{-i x xi} dx` by the trapezoidal rule (weight
//! `L/N`); the inverse carries the `1/(2 pi)` so that the round trip is the
//! identity.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Periodic grid: period `length`, `points` samples (a power of two).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T: Scalar> {
    length: T,
    points: usize,
}

impl<T: Scalar> GridSpec<T> {
    pub fn new(length: T, points: usize) -> Result<Self> {
        if !(length > T::zero()) || !length.is_finite() {
            return Err(Error::InvalidGrid(format!("length must be positive, got {length}")));
        }
        if points == 0 || !points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points must be a power of two, got {points}"
            )));
        }
        Ok(Self { length, points })
    }

    pub fn length(&self) -> T {
        self.length
    }

    pub fn points(&self) -> usize {
        self.points
    }

    /// Spatial step `L/N`.
    pub fn dx(&self) -> T {
        self.length / T::from_usize(self.points).unwrap()
    }

    /// Frequency step `2 pi / L`.
    pub fn dxi(&self) -> T {
        T::TAU() / self.length
    }

    /// Sample location `x_n = -L/2 + n L/N`.
    pub fn x(&self, n: usize) -> T {
        -self.length / T::from_f64c(2.0) + T::from_usize(n).unwrap() * self.dx()
    }

    /// Signed mode number for storage index `i`.
    pub fn mode(&self, i: usize) -> i64 {
        let n = self.points as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Frequency `xi_m = 2 pi m / L` for storage index `i`.
    pub fn xi(&self, i: usize) -> T {
        T::from_i64(self.mode(i)).unwrap() * self.dxi()
    }

    /// Largest resolvable frequency `pi N / L`.
    pub fn xi_max(&self) -> T {
        T::PI() * T::from_usize(self.points).unwrap() / self.length
    }
}

/// Uniformly sampled complex function together with its cached discrete
/// Fourier coefficients. Immutable after construction.
#[derive(Debug, Clone)]
pub struct GridFunction<T: Scalar> {
    spec: GridSpec<T>,
    samples: Vec<Complex<T>>,
    coeffs: Vec<Complex<T>>,
}

impl<T: Scalar> GridFunction<T> {
    pub fn from_samples(spec: GridSpec<T>, samples: Vec<Complex<T>>) -> Result<Self> {
        if samples.len() != spec.points() {
            return Err(Error::InvalidGrid(format!(
                "expected {} samples, got {}",
                spec.points(),
                samples.len()
            )));
        }
        if samples.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        let coeffs = forward_transform_raw(&spec, &samples);
        Ok(Self { spec, samples, coeffs })
    }

    pub fn from_coeffs(spec: GridSpec<T>, coeffs: Vec<Complex<T>>) -> Result<Self> {
        if coeffs.len() != spec.points() {
            return Err(Error::InvalidGrid(format!(
                "expected {} coefficients, got {}",
                spec.points(),
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        let samples = inverse_transform_raw(&spec, &coeffs);
        Ok(Self { spec, samples, coeffs })
    }

    pub fn zero(spec: GridSpec<T>) -> Self {
        let n = spec.points();
        Self {
            spec,
            samples: vec![Complex::new(T::zero(), T::zero()); n],
            coeffs: vec![Complex::new(T::zero(), T::zero()); n],
        }
    }

    /// Sample `f(x_n) = g(x_n)` for a closure `g`.
    pub fn from_fn(spec: GridSpec<T>, g: impl Fn(T) -> Complex<T>) -> Result<Self> {
        let samples = (0..spec.points()).map(|n| g(spec.x(n))).collect();
        Self::from_samples(spec, samples)
    }

    pub fn spec(&self) -> &GridSpec<T> {
        &self.spec
    }

    pub fn samples(&self) -> &[Complex<T>] {
        &self.samples
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    /// Apply a Fourier multiplier `xi -> m(xi)`.
    pub fn apply_multiplier(&self, m: impl Fn(T) -> Complex<T>) -> Self {
        let coeffs: Vec<_> = (0..self.spec.points())
            .map(|i| self.coeffs[i] * m(self.spec.xi(i)))
            .collect();
        let samples = inverse_transform_raw(&self.spec, &coeffs);
        Self { spec: self.spec, samples, coeffs }
    }

    /// `D^s f = F^{-1} |xi|^s F f`. The `xi = 0` multiplier is `0` for
    /// `s > 0` and `1` for `s = 0`; `s < 0` requires a mean-zero input.
    pub fn fractional_derivative(&self, s: T) -> Result<Self> {
        if s < T::zero() {
            let total = self.coeffs.iter().map(|c| c.norm_sqr()).sum::<T>().sqrt();
            let mean = self.coeffs[0].norm();
            if mean > T::from_f64c(1e-12) * total {
                return Err(Error::SingularMultiplier { s: s.to_f64c() });
            }
        }
        Ok(self.apply_multiplier(|xi| {
            let w = if xi == T::zero() {
                if s == T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            } else {
                xi.abs().powf(s)
            };
            Complex::new(w, T::zero())
        }))
    }

    /// Spectral interpolation of `x -> f(lambda x)`, resampled on the same
    /// spec. Fails when the dilation would push significant mass outside the
    /// representable window (spatial for `lambda < 1`, spectral for
    /// `lambda > 1`).
    pub fn dilate(&self, lambda: T) -> Result<Self> {
        let lam = lambda.to_f64c();
        if !(2f64.powi(-10)..=2f64.powi(10)).contains(&lam) {
            return Err(Error::Truncation {
                lambda: lam,
                detail: "lambda outside [2^-10, 2^10]".into(),
            });
        }
        let tol = T::from_f64c(1e-8);
        if lambda < T::one() {
            // f(lambda x) on [-L/2, L/2) only sees f on [-lambda L/2, lambda L/2).
            let half = lambda * self.spec.length() / T::from_f64c(2.0);
            let dx = self.spec.dx();
            let mut outside = T::zero();
            let mut total = T::zero();
            for n in 0..self.spec.points() {
                let mass = self.samples[n].norm_sqr() * dx;
                total += mass;
                if self.spec.x(n).abs() > half {
                    outside += mass;
                }
            }
            if total > T::zero() && outside > tol * total {
                return Err(Error::Truncation {
                    lambda: lam,
                    detail: format!(
                        "spatial mass fraction {:e} outside [-{half}, {half}]",
                        (outside / total).to_f64c()
                    ),
                });
            }
        } else if lambda > T::one() {
            // f(lambda x) has spectrum dilated by lambda; it must stay resolvable.
            let cut = self.spec.xi_max() / lambda;
            let mut outside = T::zero();
            let mut total = T::zero();
            for i in 0..self.spec.points() {
                let mass = self.coeffs[i].norm_sqr();
                total += mass;
                if self.spec.xi(i).abs() > cut {
                    outside += mass;
                }
            }
            if total > T::zero() && outside > tol * total {
                return Err(Error::Truncation {
                    lambda: lam,
                    detail: format!(
                        "spectral mass fraction {:e} beyond xi_max/lambda",
                        (outside / total).to_f64c()
                    ),
                });
            }
        } else {
            return Ok(self.clone());
        }

        // f(lambda x_n) = (1/L) sum_m c_m e^{i lambda x_n xi_m}, evaluated with
        // an incremental phase rotation per sample.
        let n_pts = self.spec.points();
        let half = n_pts as i64 / 2;
        let inv_l = T::one() / self.spec.length();
        let dxi = self.spec.dxi();
        let box_edge = self.spec.length() / T::from_f64c(2.0);
        let mut samples = Vec::with_capacity(n_pts);
        for n in 0..n_pts {
            let y = lambda * self.spec.x(n);
            // compact-support semantics: arguments beyond the box read zero
            // rather than the periodic wrap-around copy
            if y.abs() > box_edge {
                samples.push(Complex::new(T::zero(), T::zero()));
                continue;
            }
            // start at m = -N/2, step by e^{i y dxi}
            let step = Complex::from_polar(T::one(), y * dxi);
            let mut phase = Complex::from_polar(T::one(), y * T::from_i64(-half).unwrap() * dxi);
            let mut acc = Complex::new(T::zero(), T::zero());
            for m in -half..half {
                let i = if m >= 0 { m as usize } else { (m + n_pts as i64) as usize };
                acc += self.coeffs[i] * phase;
                phase *= step;
            }
            samples.push(acc * inv_l);
        }
        Self::from_samples(self.spec, samples)
    }

    /// Squared L^2 norm via Parseval on the coefficients.
    pub fn l2_norm_sqr(&self) -> T {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<T>() / self.spec.length()
    }

    pub fn l2_norm(&self) -> T {
        self.l2_norm_sqr().sqrt()
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        Self {
            spec: self.spec,
            samples: self.samples.iter().map(|z| z * c).collect(),
            coeffs: self.coeffs.iter().map(|z| z * c).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex<T>, Complex<T>) -> Complex<T>) -> Result<Self> {
        if self.spec != other.spec {
            return Err(Error::InvalidGrid("mismatched grid specs".into()));
        }
        Ok(Self {
            spec: self.spec,
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(a, b)| f(*a, *b))
                .collect(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        })
    }

    /// Pointwise product (computed in sample space).
    pub fn mul_pointwise(&self, other: &Self) -> Result<Self> {
        if self.spec != other.spec {
            return Err(Error::InvalidGrid("mismatched grid specs".into()));
        }
        let samples: Vec<_> = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a * b)
            .collect();
        Self::from_samples(self.spec, samples)
    }

    /// Zero all modes with `|m| >= N/3` (the 2/3 dealiasing rule).
    pub fn dealias(&self) -> Self {
        let n = self.spec.points();
        let cut = (n / 3) as i64;
        let coeffs: Vec<_> = (0..n)
            .map(|i| {
                if self.spec.mode(i).abs() >= cut {
                    Complex::new(T::zero(), T::zero())
                } else {
                    self.coeffs[i]
                }
            })
            .collect();
        let samples = inverse_transform_raw(&self.spec, &coeffs);
        Self { spec: self.spec, samples, coeffs }
    }
}

/// Trapezoid-weighted DFT matching `\int f(x) e^{-i x xi_m} dx`.
pub fn forward_transform<T: Scalar>(f: &GridFunction<T>) -> Result<Vec<Complex<T>>> {
    if f.samples.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    Ok(f.coeffs.clone())
}

pub(crate) fn forward_transform_raw<T: Scalar>(
    spec: &GridSpec<T>,
    samples: &[Complex<T>],
) -> Vec<Complex<T>> {
    let n = spec.points();
    let mut buf: Vec<Complex<T>> = samples.to_vec();
    T::with_planner(|p| {
        p.plan_fft_forward(n).process(&mut buf);
    });
    // c_m = (L/N) (-1)^m DFT_m  (the sign carries the -L/2 grid offset)
    let w = spec.dx();
    for (i, c) in buf.iter_mut().enumerate() {
        let sign = if spec.mode(i) % 2 == 0 { T::one() } else { -T::one() };
        *c = *c * (w * sign);
    }
    buf
}

pub(crate) fn inverse_transform_raw<T: Scalar>(
    spec: &GridSpec<T>,
    coeffs: &[Complex<T>],
) -> Vec<Complex<T>> {
    let n = spec.points();
    let mut buf: Vec<Complex<T>> = coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let sign = if spec.mode(i) % 2 == 0 { T::one() } else { -T::one() };
            c * sign
        })
        .collect();
    T::with_planner(|p| {
        p.plan_fft_inverse(n).process(&mut buf);
    });
    let w = T::one() / spec.length();
    for c in buf.iter_mut() {
        *c = *c * w;
    }
    buf
}

/// Time-indexed family of grid functions on `[0, T]` with a uniform step.
#[derive(Debug, Clone)]
pub struct SpaceTimeField<T: Scalar> {
    spec: GridSpec<T>,
    times: Vec<T>,
    frames: Vec<GridFunction<T>>,
}

impl<T: Scalar> SpaceTimeField<T> {
    pub fn new(times: Vec<T>, frames: Vec<GridFunction<T>>) -> Result<Self> {
        if times.len() != frames.len() || times.len() < 2 {
            return Err(Error::InvalidGrid(
                "need matching times/frames with at least two entries".into(),
            ));
        }
        let spec = *frames[0].spec();
        if frames.iter().any(|f| *f.spec() != spec) {
            return Err(Error::InvalidGrid("frames must share a grid spec".into()));
        }
        if times[0] != T::zero() {
            return Err(Error::NonUniformTimes);
        }
        let dt = times[1] - times[0];
        let tol = T::from_f64c(1e-9) * dt.abs().max(T::one());
        for w in times.windows(2) {
            if ((w[1] - w[0]) - dt).abs() > tol || w[1] <= w[0] {
                return Err(Error::NonUniformTimes);
            }
        }
        Ok(Self { spec, times, frames })
    }

    /// Constant-in-time field `u(t, x) = f(x)`.
    pub fn constant(f: &GridFunction<T>, horizon: T, steps: usize) -> Result<Self> {
        let times = uniform_times(horizon, steps)?;
        let frames = vec![f.clone(); steps + 1];
        Self::new(times, frames)
    }

    pub fn spec(&self) -> &GridSpec<T> {
        &self.spec
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn frames(&self) -> &[GridFunction<T>] {
        &self.frames
    }

    pub fn dt(&self) -> T {
        self.times[1] - self.times[0]
    }

    pub fn horizon(&self) -> T {
        *self.times.last().unwrap()
    }

    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn map_frames(&self, f: impl Fn(&GridFunction<T>) -> GridFunction<T>) -> Self {
        Self {
            spec: self.spec,
            times: self.times.clone(),
            frames: self.frames.iter().map(f).collect(),
        }
    }

    pub fn try_map_frames(
        &self,
        f: impl Fn(&GridFunction<T>) -> Result<GridFunction<T>>,
    ) -> Result<Self> {
        let frames = self.frames.iter().map(f).collect::<Result<Vec<_>>>()?;
        Ok(Self { spec: self.spec, times: self.times.clone(), frames })
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        self.map_frames(|fr| fr.scale(c))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.sub(b))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.add(b))
    }

    pub fn mul_pointwise(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.mul_pointwise(b))
    }

    fn zip_with(
        &self,
        other: &Self,
        f: impl Fn(&GridFunction<T>, &GridFunction<T>) -> Result<GridFunction<T>>,
    ) -> Result<Self> {
        if self.times.len() != other.times.len() || self.spec != other.spec {
            return Err(Error::InvalidGrid("mismatched space-time grids".into()));
        }
        let frames = self
            .frames
            .iter()
            .zip(&other.frames)
            .map(|(a, b)| f(a, b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { spec: self.spec, times: self.times.clone(), frames })
    }

    /// `u^(power)` frame-wise by repeated pointwise multiplication, with a
    /// single final 2/3-rule dealias.
    pub fn power_dealiased(&self, power: u32) -> Result<Self> {
        assert!(power >= 1);
        self.try_map_frames(|fr| {
            let mut acc = fr.clone();
            for _ in 1..power {
                acc = acc.mul_pointwise(fr)?;
            }
            Ok(acc.dealias())
        })
    }

    /// Largest frame-wise L^2 norm, i.e. `L^infty_t L^2_x`.
    pub fn linf_t_l2_x(&self) -> T {
        self.frames
            .iter()
            .map(|f| f.l2_norm())
            .fold(T::zero(), |a, b| a.max(b))
    }
}

pub fn uniform_times<T: Scalar>(horizon: T, steps: usize) -> Result<Vec<T>> {
    if !(horizon > T::zero()) || steps == 0 {
        return Err(Error::InvalidGrid("need horizon > 0 and steps >= 1".into()));
    }
    let dt = horizon / T::from_usize(steps).unwrap();
    Ok((0..=steps).map(|n| T::from_usize(n).unwrap() * dt).collect())
}
