//! Static function-space norms: L^p, homogeneous Sobolev, Fourier-Lebesgue,
//! modulation norms at every dyadic granularity, certified upper bounds for
//! the scaling-limit norm, the STFT cross-check, embedding verification and
//! the infinite-L^2 counterexample builder.

use std::collections::BTreeMap;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::freqdecomp::{box_project_unchecked, BandIndex, CutoffProfile, DEFAULT_J_MIN};
use crate::grid::{forward_transform_raw, inverse_transform_raw, GridFunction, GridSpec};
use crate::report::{EstimateReport, ReportRow};
use crate::scalar::Scalar;

pub fn check_exponent(e: f64) -> Result<()> {
    if e >= 1.0 || e == f64::INFINITY {
        Ok(())
    } else {
        Err(Error::InvalidExponent(format!("exponent must be in [1, inf], got {e}")))
    }
}

/// Dual exponent `e'` with `1/e + 1/e' = 1`.
pub fn conjugate(e: f64) -> f64 {
    if e == 1.0 {
        f64::INFINITY
    } else if e.is_infinite() {
        1.0
    } else {
        e / (e - 1.0)
    }
}

/// Reciprocal with the `1/inf = 0` convention.
pub fn recip(e: f64) -> f64 {
    if e.is_infinite() {
        0.0
    } else {
        1.0 / e
    }
}

/// Quadrature L^p norm; `p = inf` is the max over samples.
pub fn lp_norm<T: Scalar>(f: &GridFunction<T>, p: f64) -> Result<T> {
    check_exponent(p)?;
    if p.is_infinite() {
        return Ok(f
            .samples()
            .iter()
            .map(|z| z.norm())
            .fold(T::zero(), |a, b| a.max(b)));
    }
    let dx = f.spec().dx();
    let pe = T::from_f64c(p);
    let sum = f
        .samples()
        .iter()
        .map(|z| z.norm().powf(pe))
        .sum::<T>()
        * dx;
    Ok(sum.powf(pe.recip()))
}

/// Homogeneous Sobolev norm `||D^s f||_2` via Parseval.
pub fn hs_norm<T: Scalar>(f: &GridFunction<T>, s: f64) -> T {
    let se = T::from_f64c(2.0 * s);
    let sum = (0..f.spec().points())
        .map(|i| {
            let xi = f.spec().xi(i).abs();
            if xi == T::zero() {
                if s == 0.0 {
                    f.coeffs()[i].norm_sqr()
                } else {
                    T::zero()
                }
            } else {
                xi.powf(se) * f.coeffs()[i].norm_sqr()
            }
        })
        .sum::<T>()
        / f.spec().length();
    sum.sqrt()
}

/// Fourier-Lebesgue norm `||\hat f||_{L^r(d xi)}` by quadrature.
pub fn fl_norm<T: Scalar>(f: &GridFunction<T>, r: f64) -> Result<T> {
    check_exponent(r)?;
    if r.is_infinite() {
        return Ok(f
            .coeffs()
            .iter()
            .map(|z| z.norm())
            .fold(T::zero(), |a, b| a.max(b)));
    }
    let re = T::from_f64c(r);
    let dxi = f.spec().dxi();
    let sum = f.coeffs().iter().map(|z| z.norm().powf(re)).sum::<T>() * dxi;
    Ok(sum.powf(re.recip()))
}

fn lq_aggregate<T: Scalar>(values: impl Iterator<Item = T>, q: f64) -> T {
    if q.is_infinite() {
        values.fold(T::zero(), |a, b| a.max(b))
    } else {
        let qe = T::from_f64c(q);
        values
            .map(|v| v.powf(qe))
            .sum::<T>()
            .powf(qe.recip())
    }
}

/// `|| ||box_{j,k} f||_{L^p} ||_{l^q_k}`; `j = 0` is the modulation norm
/// `M_{p,q}` in its uniform-decomposition form.
pub fn modulation_norm<T: Scalar>(
    f: &GridFunction<T>,
    p: f64,
    q: f64,
    j: i32,
    c: &CutoffProfile<T>,
) -> Result<T> {
    check_exponent(p)?;
    check_exponent(q)?;
    if j > 0 {
        return Err(Error::Config(format!("modulation scale must satisfy j <= 0, got {j}")));
    }
    // Band-wise weighted spectral mass in one pass; only bands with mass need
    // an inverse transform (and p = 2 needs none at all, by Parseval).
    let spec = f.spec();
    let scale = 2f64.powi(-j);
    let mut band_mass: BTreeMap<i64, T> = BTreeMap::new();
    for i in 0..spec.points() {
        let m = f.coeffs()[i].norm_sqr();
        if m == T::zero() {
            continue;
        }
        let y = spec.xi(i).to_f64c() * scale;
        let kc = y.round() as i64;
        for k in (kc - 1)..=(kc + 1) {
            let w = c.eval(y - k as f64);
            if w > 0.0 {
                *band_mass.entry(k).or_insert_with(T::zero) += m * T::from_f64c(w * w);
            }
        }
    }
    if p == 2.0 {
        let inv_l = T::one() / spec.length();
        return Ok(lq_aggregate(band_mass.values().map(|m| (*m * inv_l).sqrt()), q));
    }
    let norms = band_mass
        .keys()
        .map(|&k| {
            let g = box_project_unchecked(f, BandIndex { j, k }, c);
            lp_norm(&g, p)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(lq_aggregate(norms.into_iter(), q))
}

/// Schwartz-class STFT window, L^2-normalized. Default: Gaussian `e^{-x^2/2}`.
#[derive(Debug, Clone)]
pub struct WindowFunction<T: Scalar> {
    g: GridFunction<T>,
}

impl<T: Scalar> WindowFunction<T> {
    pub fn new(g: GridFunction<T>) -> Result<Self> {
        let n = g.l2_norm();
        if !(n > T::zero()) {
            return Err(Error::Config("window must be nonzero".into()));
        }
        Ok(Self { g: g.scale(Complex::new(n.recip(), T::zero())) })
    }

    pub fn gaussian(spec: GridSpec<T>) -> Result<Self> {
        let half = T::from_f64c(0.5);
        let g = GridFunction::from_fn(spec, |x| {
            Complex::new((-x * x * half).exp(), T::zero())
        })?;
        Self::new(g)
    }

    pub fn grid_function(&self) -> &GridFunction<T> {
        &self.g
    }
}

/// Discrete STFT modulation norm with frequency samples at integer spacing
/// (matching the uniform-decomposition band width); used as an
/// equivalence-of-norms cross-check against [`modulation_norm`].
pub fn stft_modulation_norm<T: Scalar>(
    f: &GridFunction<T>,
    w: &WindowFunction<T>,
    p: f64,
    q: f64,
) -> Result<T> {
    check_exponent(p)?;
    check_exponent(q)?;
    let spec = *f.spec();
    if spec != *w.g.spec() {
        return Err(Error::InvalidGrid("window and signal must share a spec".into()));
    }
    let xi_lim = spec.xi_max().to_f64c().floor() as i64;
    // conj-reflected window spectrum: F[conj(g(-.))](xi) = conj(F[g](xi))
    let bhat: Vec<Complex<T>> = w.g.coeffs().iter().map(|z| z.conj()).collect();
    let dx = spec.dx();
    let pe = T::from_f64c(p);
    let mut slice_norms = Vec::new();
    for xk in -xi_lim..=xi_lim {
        let xi_shift = T::from_i64(xk).unwrap();
        let a: Vec<Complex<T>> = (0..spec.points())
            .map(|n| {
                let t = spec.x(n);
                f.samples()[n] * Complex::from_polar(T::one(), -t * xi_shift)
            })
            .collect();
        let ahat = forward_transform_raw(&spec, &a);
        let prod: Vec<Complex<T>> = ahat.iter().zip(&bhat).map(|(x, y)| x * y).collect();
        let v = inverse_transform_raw(&spec, &prod);
        let norm = if p.is_infinite() {
            v.iter().map(|z| z.norm()).fold(T::zero(), |a, b| a.max(b))
        } else {
            (v.iter().map(|z| z.norm().powf(pe)).sum::<T>() * dx).powf(pe.recip())
        };
        slice_norms.push(norm);
    }
    Ok(lq_aggregate(slice_norms.into_iter(), q))
}

/// A finite decomposition `f = sum_j f_j` with distinct scales `j <= 0`.
#[derive(Debug, Clone)]
pub struct Decomposition<T: Scalar> {
    pub pieces: Vec<(i32, GridFunction<T>)>,
}

impl<T: Scalar> Decomposition<T> {
    /// Relative L^2 reconstruction error against `target`.
    pub fn reconstruction_error(&self, target: &GridFunction<T>) -> Result<T> {
        let mut sum = GridFunction::zero(*target.spec());
        for (_, piece) in &self.pieces {
            sum = sum.add(piece)?;
        }
        let denom = target.l2_norm();
        if denom == T::zero() {
            return Ok(sum.l2_norm());
        }
        Ok(sum.sub(target)?.l2_norm() / denom)
    }

    pub fn validate(&self, target: &GridFunction<T>, j_min: i32) -> Result<()> {
        let mut seen = std::collections::BTreeSet::new();
        for (j, _) in &self.pieces {
            if *j > 0 || *j < j_min {
                return Err(Error::Config(format!("piece scale {j} outside [{j_min}, 0]")));
            }
            if !seen.insert(*j) {
                return Err(Error::Config(format!("duplicate piece scale {j}")));
            }
        }
        let err = self.reconstruction_error(target)?.to_f64c();
        if err > 1e-10 {
            return Err(Error::WitnessReconstruction { rel_err: err });
        }
        Ok(())
    }

    /// Merge two decompositions piece-wise; decomposes the sum of the targets.
    pub fn merge(&self, other: &Self) -> Result<Self> {
        let mut by_scale: BTreeMap<i32, GridFunction<T>> = BTreeMap::new();
        for (j, piece) in self.pieces.iter().chain(&other.pieces) {
            match by_scale.remove(j) {
                Some(acc) => {
                    by_scale.insert(*j, acc.add(piece)?);
                }
                None => {
                    by_scale.insert(*j, piece.clone());
                }
            }
        }
        Ok(Self { pieces: by_scale.into_iter().collect() })
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        Self {
            pieces: self.pieces.iter().map(|(j, f)| (*j, f.scale(c))).collect(),
        }
    }
}

/// `sum_j 2^{j mu} ||f_j||_{M^{[j]}_{p,q}}` for a fixed witness.
pub fn decomposition_cost<T: Scalar>(
    d: &Decomposition<T>,
    mu: f64,
    p: f64,
    q: f64,
    c: &CutoffProfile<T>,
) -> Result<T> {
    let mut total = T::zero();
    for (j, piece) in &d.pieces {
        let weight = T::from_f64c(2f64.powi(*j).powf(mu));
        total += weight * modulation_norm(piece, p, q, *j, c)?;
    }
    Ok(total)
}

/// Documented finite family of decomposition strategies over which the
/// scaling-limit norm is minimized. The result is always an upper bound on
/// the true infimum.
#[derive(Debug, Clone)]
pub enum DecompositionStrategy<T: Scalar> {
    /// All mass at `j = 0` (reproduces the plain modulation norm).
    Trivial,
    /// The whole function as one piece at a fixed scale.
    SingleScale(i32),
    /// Littlewood-Paley-style split: the annulus `|xi| in [2^j, 2^{j+1})`
    /// goes to scale `j`; everything else stays at `j = 0`.
    DyadicAnnuli,
    /// Start from the annuli and reassign each piece to its cheapest scale.
    GreedyReassign,
    /// A caller-supplied witness (e.g. the natural decomposition of a
    /// constructed datum).
    Explicit(Decomposition<T>),
}

impl<T: Scalar> DecompositionStrategy<T> {
    pub fn name(&self) -> String {
        match self {
            Self::Trivial => "trivial".into(),
            Self::SingleScale(j) => format!("single-scale({j})"),
            Self::DyadicAnnuli => "dyadic-annuli".into(),
            Self::GreedyReassign => "greedy-reassign".into(),
            Self::Explicit(_) => "explicit".into(),
        }
    }
}

/// Default family: trivial, every single-scale placement, the annuli split
/// and its greedy refinement.
pub fn default_strategies<T: Scalar>(j_min: i32) -> Vec<DecompositionStrategy<T>> {
    let mut s = vec![DecompositionStrategy::Trivial, DecompositionStrategy::DyadicAnnuli];
    for j in j_min..0 {
        s.push(DecompositionStrategy::SingleScale(j));
    }
    s.push(DecompositionStrategy::GreedyReassign);
    s
}

fn mask_by<T: Scalar>(
    f: &GridFunction<T>,
    keep: impl Fn(f64) -> bool,
) -> Result<GridFunction<T>> {
    let coeffs = (0..f.spec().points())
        .map(|i| {
            if keep(f.spec().xi(i).to_f64c()) {
                f.coeffs()[i]
            } else {
                Complex::new(T::zero(), T::zero())
            }
        })
        .collect();
    GridFunction::from_coeffs(*f.spec(), coeffs)
}

fn annuli_pieces<T: Scalar>(f: &GridFunction<T>, j_min: i32) -> Result<Vec<(i32, GridFunction<T>)>> {
    let mut pieces = Vec::new();
    for j in j_min..0 {
        let lo = 2f64.powi(j);
        let hi = 2f64.powi(j + 1);
        let piece = mask_by(f, |xi| {
            let a = xi.abs();
            a >= lo && a < hi
        })?;
        if piece.l2_norm() > T::zero() {
            pieces.push((j, piece));
        }
    }
    let lo_min = 2f64.powi(j_min);
    let rest = mask_by(f, |xi| {
        let a = xi.abs();
        a < lo_min || a >= 1.0
    })?;
    pieces.push((0, rest));
    Ok(pieces)
}

#[derive(Debug, Clone)]
pub struct ScalingLimitBound<T: Scalar> {
    pub value: T,
    pub witness: Decomposition<T>,
    pub strategy: String,
}

pub struct ScalingLimitParams {
    pub mu: f64,
    pub p: f64,
    pub q: f64,
    pub j_min: i32,
}

impl ScalingLimitParams {
    pub fn new(mu: f64, p: f64, q: f64) -> Self {
        Self { mu, p, q, j_min: DEFAULT_J_MIN }
    }
}

/// Certified upper bound for the scaling-limit modulation norm
/// `inf sum_j 2^{j mu} ||f_j||_{M^{[j]}_{p,q}}`: the minimum of the cost over
/// the strategy family, with the achieving witness.
pub fn scaling_limit_norm_ub<T: Scalar>(
    f: &GridFunction<T>,
    params: &ScalingLimitParams,
    strategies: &[DecompositionStrategy<T>],
    c: &CutoffProfile<T>,
) -> Result<ScalingLimitBound<T>> {
    check_exponent(params.p)?;
    check_exponent(params.q)?;
    if strategies.is_empty() {
        return Err(Error::Config("strategy family must be nonempty".into()));
    }
    let j_min = params.j_min;
    let mut best: Option<ScalingLimitBound<T>> = None;
    for strat in strategies {
        let witness = match strat {
            DecompositionStrategy::Trivial => Decomposition { pieces: vec![(0, f.clone())] },
            DecompositionStrategy::SingleScale(j) => {
                if *j > 0 || *j < j_min {
                    return Err(Error::Config(format!("single-scale {j} outside [{j_min}, 0]")));
                }
                Decomposition { pieces: vec![(*j, f.clone())] }
            }
            DecompositionStrategy::DyadicAnnuli => {
                Decomposition { pieces: annuli_pieces(f, j_min)? }
            }
            DecompositionStrategy::GreedyReassign => {
                let raw = annuli_pieces(f, j_min)?;
                let mut by_scale: BTreeMap<i32, GridFunction<T>> = BTreeMap::new();
                for (_, piece) in raw {
                    let mut best_j = 0;
                    let mut best_cost = T::infinity();
                    for j2 in j_min..=0 {
                        let w = T::from_f64c(2f64.powi(j2).powf(params.mu));
                        let cost = w * modulation_norm(&piece, params.p, params.q, j2, c)?;
                        if cost < best_cost {
                            best_cost = cost;
                            best_j = j2;
                        }
                    }
                    match by_scale.remove(&best_j) {
                        Some(acc) => {
                            by_scale.insert(best_j, acc.add(&piece)?);
                        }
                        None => {
                            by_scale.insert(best_j, piece);
                        }
                    }
                }
                Decomposition { pieces: by_scale.into_iter().collect() }
            }
            DecompositionStrategy::Explicit(d) => d.clone(),
        };
        witness.validate(f, j_min)?;
        let value = decomposition_cost(&witness, params.mu, params.p, params.q, c)?;
        let better = best.as_ref().map_or(true, |b| value < b.value);
        if better {
            best = Some(ScalingLimitBound { value, witness, strategy: strat.name() });
        }
    }
    Ok(best.unwrap())
}

/// The smooth profile used by the counterexample: a Gaussian spectrum cut by
/// a smooth window so that `supp \hat phi` lies inside `[-1/8, 1/8]`.
pub fn counterexample_profile_hat(xi: f64) -> f64 {
    let window = crate::freqdecomp::bump_raw(6.0 * xi);
    (-xi * xi / 128.0).exp() * window
}

fn profile_l2_norm() -> f64 {
    // continuum Parseval: ||phi||_2^2 = (1/2pi) int |phi_hat|^2 d xi
    let n = 1 << 14;
    let h = 0.25 / n as f64;
    let mut sum = 0.0;
    for i in 0..n {
        let xi = -0.125 + (i as f64 + 0.5) * h;
        sum += counterexample_profile_hat(xi).powi(2) * h;
    }
    (sum / (2.0 * std::f64::consts::PI)).sqrt()
}

/// The band at scale `j` that captures the counterexample's `j`-th piece:
/// its frequency center is the integer `j`, i.e. translate `k = j 2^{-j}`.
pub fn counterexample_band(j: i32) -> BandIndex {
    BandIndex { j, k: (j as i64) << (-j) }
}

/// The truncated infinite-L^2 datum
/// `u = sum_{j_min <= j <= -1} (2^{j(1/2 - mu)} / j^2) e^{i j x} phi(2^j x)`
/// with `||phi||_2 = 1`, built directly in frequency space. The pieces have
/// pairwise disjoint spectra (piece `j` lives in `j + 2^j [-1/8, 1/8]`), so
/// each is captured exactly by [`counterexample_band`]. Also returns the
/// natural witness (each piece at its own scale).
pub fn build_counterexample<T: Scalar>(
    mu: f64,
    j_min: i32,
    spec: GridSpec<T>,
) -> Result<(GridFunction<T>, Decomposition<T>)> {
    if mu <= 0.0 {
        return Err(Error::Config(format!("counterexample needs mu > 0, got {mu}")));
    }
    if j_min >= 0 {
        return Err(Error::Config(format!("counterexample needs j_min <= -1, got {j_min}")));
    }
    // the deepest piece's spectral width 2^{j_min}/4 must span several grid
    // frequencies
    let dxi = spec.dxi().to_f64c();
    if dxi > 2f64.powi(j_min) / 16.0 {
        return Err(Error::Resolution {
            j_min,
            detail: format!(
                "frequency spacing {dxi:.3e} exceeds 2^{j_min}/16; increase L"
            ),
        });
    }
    // deepest piece sits at frequency j_min; keep a unit of slack for the
    // checked band projection
    if spec.xi_max().to_f64c() <= -j_min as f64 + 1.0 {
        return Err(Error::Resolution {
            j_min,
            detail: format!("xi_max must exceed {} to hold every piece", -j_min as f64 + 1.0),
        });
    }
    let norm = profile_l2_norm();
    let mut pieces = Vec::new();
    let mut total = vec![Complex::new(T::zero(), T::zero()); spec.points()];
    for j in j_min..0 {
        let w = 2f64.powi(j);
        let amp = w.powf(0.5 - mu) / (j as f64 * j as f64);
        let center = j as f64;
        let coeffs: Vec<Complex<T>> = (0..spec.points())
            .map(|i| {
                let xi = spec.xi(i).to_f64c();
                let v = amp / w * counterexample_profile_hat((xi - center) / w) / norm;
                Complex::new(T::from_f64c(v), T::zero())
            })
            .collect();
        for (acc, c) in total.iter_mut().zip(&coeffs) {
            *acc += *c;
        }
        let piece = GridFunction::from_coeffs(spec, coeffs)?;
        pieces.push((j, piece));
    }
    let u = GridFunction::from_coeffs(spec, total)?;
    Ok((u, Decomposition { pieces }))
}

pub struct EmbeddingParams {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub mu: f64,
}

impl EmbeddingParams {
    /// Window condition `p v q <= r <= q'` of the L^r embedding.
    pub fn window_admissible(&self) -> bool {
        let lo = self.p.max(self.q);
        self.r >= lo && self.r <= conjugate(self.q)
    }

    /// Scaling condition `mu - 1/p <= -1/r` (d = 1).
    pub fn scaling_admissible(&self) -> bool {
        self.mu - recip(self.p) <= -recip(self.r) + 1e-12
    }

    /// Growth exponent of the ratio under dilation predicted by the
    /// necessity argument: `-(mu - 1/p + 1/r)`.
    pub fn predicted_slope(&self) -> f64 {
        -(self.mu - recip(self.p) + recip(self.r))
    }
}

/// Checks (or falsifies, by slope) the embedding of the scaling-limit space
/// into L^r over a family of test functions and a dilation sweep.
pub fn embedding_check<T: Scalar>(
    family: &[(String, GridFunction<T>)],
    params: &EmbeddingParams,
    lambda_exponents: &[i32],
    j_min: i32,
    c: &CutoffProfile<T>,
) -> Result<EstimateReport> {
    check_exponent(params.p)?;
    check_exponent(params.q)?;
    check_exponent(params.r)?;
    if !params.window_admissible() {
        return Err(Error::InvalidExponent(format!(
            "inadmissible window: need p v q <= r <= q' (p={}, q={}, r={})",
            params.p, params.q, params.r
        )));
    }
    let mut report = EstimateReport::new(format!(
        "embedding(p={},q={},r={},mu={})",
        params.p, params.q, params.r, params.mu
    ));
    let sl = ScalingLimitParams { mu: params.mu, p: params.p, q: params.q, j_min };
    let strategies = default_strategies(j_min);
    for (id, f) in family {
        for &e in lambda_exponents {
            let lambda = 2f64.powi(e);
            let fl = match f.dilate(T::from_f64c(lambda)) {
                Ok(fl) => fl,
                Err(Error::Truncation { .. }) => {
                    report.note(format!("skipped {id} at lambda=2^{e}: truncation"));
                    continue;
                }
                Err(err) => return Err(err),
            };
            let lhs = lp_norm(&fl, params.r)?.to_f64c();
            let rhs = scaling_limit_norm_ub(&fl, &sl, &strategies, c)?.value.to_f64c();
            report.push(ReportRow {
                estimate_id: String::new(),
                input_id: id.clone(),
                j: None,
                k: None,
                lambda: Some(lambda),
                lhs,
                rhs,
                ratio: lhs / rhs,
            });
        }
    }
    if params.scaling_admissible() {
        report.note("admissible: sup ratio is the embedding constant estimate");
    } else {
        // The necessity argument dilates toward lambda -> 0; fit there.
        let predicted = params.predicted_slope();
        report.fit_slope(predicted, |row| {
            let l = row.lambda?;
            (l <= 1.0).then(|| l.log2())
        })?;
        report.note("inadmissible scaling: ratio slope vs log2(lambda) reported");
    }
    Ok(report)
}
