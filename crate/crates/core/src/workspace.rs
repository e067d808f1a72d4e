//! The space-time work norm `X^mu(A)` (decomposition-infimum over dyadic
//! scales, band sums in l^1) computed as a certified upper bound, plus
//! verification of the band-coarsening, Bernstein-embedding, product and
//! power-nonlinearity estimates that drive the contraction argument.

use std::collections::BTreeMap;

use num_complex::Complex;
use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::estimates::{mixed_norm, MixedNormSpec};
use crate::freqdecomp::{BandIndex, CutoffProfile};
use crate::grid::{GridFunction, SpaceTimeField};
use crate::report::{EstimateReport, ReportRow};
use crate::scalar::Scalar;

/// A finite decomposition `u = sum_j u_j` of a space-time field with
/// distinct scales `j <= 0`.
#[derive(Debug, Clone)]
pub struct SpaceTimeDecomposition<T: Scalar> {
    pub pieces: Vec<(i32, SpaceTimeField<T>)>,
}

fn field_l2<T: Scalar>(u: &SpaceTimeField<T>) -> T {
    u.frames()
        .iter()
        .map(|f| f.l2_norm_sqr())
        .sum::<T>()
        .sqrt()
}

impl<T: Scalar> SpaceTimeDecomposition<T> {
    pub fn validate(&self, target: &SpaceTimeField<T>, j_min: i32) -> Result<()> {
        let mut seen = std::collections::BTreeSet::new();
        for (j, _) in &self.pieces {
            if *j > 0 || *j < j_min {
                return Err(Error::Config(format!("piece scale {j} outside [{j_min}, 0]")));
            }
            if !seen.insert(*j) {
                return Err(Error::Config(format!("duplicate piece scale {j}")));
            }
        }
        let mut sum = self.pieces[0].1.clone();
        for (_, piece) in &self.pieces[1..] {
            sum = sum.add(piece)?;
        }
        let denom = field_l2(target);
        let err = field_l2(&sum.sub(target)?);
        let rel = if denom > T::zero() { err / denom } else { err };
        if rel.to_f64c() > 1e-10 {
            return Err(Error::WitnessReconstruction { rel_err: rel.to_f64c() });
        }
        Ok(())
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        Self {
            pieces: self.pieces.iter().map(|(j, u)| (*j, u.scale(c))).collect(),
        }
    }
}

/// Frequency-mask strategies for decomposing a field; all are linear and
/// time-independent, so they lift frame-wise from the static case.
#[derive(Debug, Clone)]
pub enum XStrategy<T: Scalar> {
    Trivial,
    SingleScale(i32),
    DyadicAnnuli,
    Explicit(SpaceTimeDecomposition<T>),
}

pub fn default_x_strategies<T: Scalar>(j_min: i32) -> Vec<XStrategy<T>> {
    let mut s = vec![XStrategy::Trivial, XStrategy::DyadicAnnuli];
    for j in j_min..0 {
        s.push(XStrategy::SingleScale(j));
    }
    s
}

fn mask_field<T: Scalar>(
    u: &SpaceTimeField<T>,
    keep: impl Fn(f64) -> bool + Copy,
) -> Result<SpaceTimeField<T>> {
    u.try_map_frames(|fr| {
        let coeffs = (0..fr.spec().points())
            .map(|i| {
                if keep(fr.spec().xi(i).to_f64c()) {
                    fr.coeffs()[i]
                } else {
                    Complex::new(T::zero(), T::zero())
                }
            })
            .collect();
        GridFunction::from_coeffs(*fr.spec(), coeffs)
    })
}

fn annuli_field_pieces<T: Scalar>(
    u: &SpaceTimeField<T>,
    j_min: i32,
) -> Result<Vec<(i32, SpaceTimeField<T>)>> {
    let mut pieces = Vec::new();
    for j in j_min..0 {
        let lo = 2f64.powi(j);
        let hi = 2f64.powi(j + 1);
        let piece = mask_field(u, move |xi| {
            let a = xi.abs();
            a >= lo && a < hi
        })?;
        if field_l2(&piece) > T::zero() {
            pieces.push((j, piece));
        }
    }
    let lo_min = 2f64.powi(j_min);
    let rest = mask_field(u, move |xi| {
        let a = xi.abs();
        a < lo_min || a >= 1.0
    })?;
    pieces.push((0, rest));
    Ok(pieces)
}

/// `sum_k || box_{j,k} u ||_A` with empty bands skipped.
pub fn band_sum_norm<T: Scalar>(
    u: &SpaceTimeField<T>,
    j: i32,
    spec: MixedNormSpec,
    c: &CutoffProfile<T>,
) -> Result<T> {
    let gspec = *u.frames()[0].spec();
    // total band-weighted spectral mass over all frames, to skip empty bands
    let scale = 2f64.powi(-j);
    let mut band_mass: BTreeMap<i64, T> = BTreeMap::new();
    for fr in u.frames() {
        for i in 0..gspec.points() {
            let m = fr.coeffs()[i].norm_sqr();
            if m == T::zero() {
                continue;
            }
            let y = gspec.xi(i).to_f64c() * scale;
            let kc = y.round() as i64;
            for k in (kc - 1)..=(kc + 1) {
                let w = c.eval(y - k as f64);
                if w > 0.0 {
                    *band_mass.entry(k).or_insert_with(T::zero) += m * T::from_f64c(w * w);
                }
            }
        }
    }
    let total: T = band_mass.values().copied().sum();
    let cut = T::from_f64c(1e-24) * total;
    let mut sum = T::zero();
    for (&k, &mass) in &band_mass {
        if mass <= cut {
            continue;
        }
        let b = BandIndex { j, k };
        let projected = u.map_frames(|fr| crate::freqdecomp::box_project_unchecked(fr, b, c));
        sum += mixed_norm(&projected, spec)?;
    }
    Ok(sum)
}

#[derive(Debug, Clone)]
pub struct XNormBound<T: Scalar> {
    pub value: T,
    pub witness: SpaceTimeDecomposition<T>,
    pub strategy: String,
}

/// Cost of a fixed witness: `sum_j 2^{j mu} sum_k || box_{j,k} u_j ||_A`.
pub fn x_decomposition_cost<T: Scalar>(
    d: &SpaceTimeDecomposition<T>,
    mu: f64,
    spec: MixedNormSpec,
    c: &CutoffProfile<T>,
) -> Result<T> {
    let mut total = T::zero();
    for (j, piece) in &d.pieces {
        let w = T::from_f64c(2f64.powi(*j).powf(mu));
        total += w * band_sum_norm(piece, *j, spec, c)?;
    }
    Ok(total)
}

/// Certified upper bound of the `X^mu(A)` norm over the strategy family.
pub fn x_norm_ub<T: Scalar>(
    u: &SpaceTimeField<T>,
    mu: f64,
    spec: MixedNormSpec,
    strategies: &[XStrategy<T>],
    j_min: i32,
    c: &CutoffProfile<T>,
) -> Result<XNormBound<T>> {
    if strategies.is_empty() {
        return Err(Error::Config("strategy family must be nonempty".into()));
    }
    let mut best: Option<XNormBound<T>> = None;
    for strat in strategies {
        let (name, witness) = match strat {
            XStrategy::Trivial => (
                "trivial".to_string(),
                SpaceTimeDecomposition { pieces: vec![(0, u.clone())] },
            ),
            XStrategy::SingleScale(j) => {
                if *j > 0 || *j < j_min {
                    return Err(Error::Config(format!("single-scale {j} outside [{j_min}, 0]")));
                }
                (
                    format!("single-scale({j})"),
                    SpaceTimeDecomposition { pieces: vec![(*j, u.clone())] },
                )
            }
            XStrategy::DyadicAnnuli => (
                "dyadic-annuli".to_string(),
                SpaceTimeDecomposition { pieces: annuli_field_pieces(u, j_min)? },
            ),
            XStrategy::Explicit(d) => ("explicit".to_string(), d.clone()),
        };
        witness.validate(u, j_min)?;
        let value = x_decomposition_cost(&witness, mu, spec, c)?;
        if best.as_ref().map_or(true, |b| value < b.value) {
            best = Some(XNormBound { value, witness, strategy: name });
        }
    }
    Ok(best.unwrap())
}

/// Band coarsening: `sum_k ||box_{j,k} u||_A <= C sum_k ||box_{l,k} u||_A` for
/// `l <= j`, plus the combinatorial finite-overlap bound on the supports.
pub fn verify_band_coarsening<T: Scalar>(
    family: &[(String, SpaceTimeField<T>)],
    pairs: &[(i32, i32)],
    spec: MixedNormSpec,
    c: &CutoffProfile<T>,
) -> Result<EstimateReport> {
    let mut report = EstimateReport::new(format!("band-coarsening(p={},g={})", spec.p_x, spec.gamma_t));
    for &(l, j) in pairs {
        if !(l <= j && j <= 0) {
            return Err(Error::Config(format!("need l <= j <= 0, got ({l}, {j})")));
        }
        for (id, u) in family {
            let lhs = band_sum_norm(u, j, spec, c)?.to_f64c();
            let rhs = band_sum_norm(u, l, spec, c)?.to_f64c();
            report.push(ReportRow {
                estimate_id: String::new(),
                input_id: format!("{id}:l={l}"),
                j: Some(j),
                k: None,
                lambda: None,
                lhs,
                rhs,
                ratio: lhs / rhs,
            });
        }
    }
    if !report.all_ratios_finite() {
        return Err(Error::Config("non-finite coarsening ratio".into()));
    }
    Ok(report)
}

/// Counts, for each fine band at scale `l`, the coarse bands at scale
/// `j >= l` whose supports intersect it; the maximum is the coarsening
/// overlap constant.
pub fn coarsening_overlap_count(l: i32, j: i32, k_range: i64) -> usize {
    let wl = 2f64.powi(l);
    let wj = 2f64.powi(j);
    let mut worst = 0usize;
    for kf in -k_range..=k_range {
        let lo = wl * (kf as f64 - 0.75);
        let hi = wl * (kf as f64 + 0.75);
        let mut count = 0usize;
        let kj_lo = (lo / wj - 0.75).floor() as i64;
        let kj_hi = (hi / wj + 0.75).ceil() as i64;
        for kc in kj_lo..=kj_hi {
            let clo = wj * (kc as f64 - 0.75);
            let chi = wj * (kc as f64 + 0.75);
            if chi > lo && clo < hi {
                count += 1;
            }
        }
        worst = worst.max(count);
    }
    worst
}

/// Bernstein-type embedding: `X^{mu + 1/p1}(L^{p1} L^g)` embeds in `X^{mu + 1/p}(L^p L^g)`
/// for `p1 <= g <= p`; both sides evaluated on the same witnesses.
pub fn verify_bernstein_embedding<T: Scalar>(
    family: &[(String, SpaceTimeField<T>)],
    p1: f64,
    gamma: f64,
    p: f64,
    mu: f64,
    j_min: i32,
    c: &CutoffProfile<T>,
) -> Result<EstimateReport> {
    if !(1.0 <= p1 && p1 <= gamma && gamma <= p) {
        return Err(Error::InvalidExponent(format!(
            "need 1 <= p1 <= gamma <= p, got ({p1}, {gamma}, {p})"
        )));
    }
    let mut report =
        EstimateReport::new(format!("bernstein-embedding(p1={p1},g={gamma},p={p},mu={mu})"));
    let fine = MixedNormSpec::new(p1, gamma)?;
    let coarse = MixedNormSpec::new(p, gamma)?;
    let strategies = default_x_strategies(j_min);
    for (id, u) in family {
        // choose the witness on the RHS side and reuse it on the LHS
        let rhs_bound = x_norm_ub(u, mu + recip_or_zero(p1), fine, &strategies, j_min, c)?;
        let lhs = x_decomposition_cost(&rhs_bound.witness, mu + recip_or_zero(p), coarse, c)?
            .to_f64c();
        let rhs = rhs_bound.value.to_f64c();
        report.push(ReportRow {
            estimate_id: String::new(),
            input_id: id.clone(),
            j: None,
            k: None,
            lambda: None,
            lhs,
            rhs,
            ratio: lhs / rhs,
        });
    }
    if !report.all_ratios_finite() {
        return Err(Error::Config("non-finite embedding ratio".into()));
    }
    Ok(report)
}

fn recip_or_zero(e: f64) -> f64 {
    crate::modnorms::recip(e)
}

/// Bilinear product estimate with matched witnesses:
/// `||uv||_{X^mu(L^p L^g)} <= C (||u||_{X^mu} ||v||_{X^0} + ||u||_{X^0} ||v||_{X^mu})`
/// under the Holder splits `1/p = 1/p1 + 1/p2`, `1/g = 1/g1 + 1/g2`.
#[allow(clippy::too_many_arguments)]
pub fn verify_product_estimate<T: Scalar>(
    pairs: &[(String, SpaceTimeField<T>, SpaceTimeField<T>)],
    target: MixedNormSpec,
    split_u: MixedNormSpec,
    split_v: MixedNormSpec,
    mu: f64,
    j_min: i32,
    c: &CutoffProfile<T>,
) -> Result<EstimateReport> {
    let holder_x = (recip_or_zero(split_u.p_x) + recip_or_zero(split_v.p_x)
        - recip_or_zero(target.p_x))
    .abs();
    let holder_t = (recip_or_zero(split_u.gamma_t) + recip_or_zero(split_v.gamma_t)
        - recip_or_zero(target.gamma_t))
    .abs();
    if holder_x > 1e-12 || holder_t > 1e-12 {
        return Err(Error::InvalidExponent("Holder split does not sum".into()));
    }
    let mut report = EstimateReport::new(format!(
        "product(p={},g={},mu={mu})",
        target.p_x, target.gamma_t
    ));
    let strategies = default_x_strategies(j_min);
    for (id, u, v) in pairs {
        let uv = u.mul_pointwise(v)?;
        let lhs = x_norm_ub(&uv, mu, target, &strategies, j_min, c)?.value.to_f64c();
        let u_mu = x_norm_ub(u, mu, split_u, &strategies, j_min, c)?.value.to_f64c();
        let u_0 = x_norm_ub(u, 0.0, split_u, &strategies, j_min, c)?.value.to_f64c();
        let v_mu = x_norm_ub(v, mu, split_v, &strategies, j_min, c)?.value.to_f64c();
        let v_0 = x_norm_ub(v, 0.0, split_v, &strategies, j_min, c)?.value.to_f64c();
        let rhs = u_mu * v_0 + u_0 * v_mu;
        report.push(ReportRow {
            estimate_id: String::new(),
            input_id: id.clone(),
            j: None,
            k: None,
            lambda: None,
            lhs,
            rhs,
            ratio: lhs / rhs,
        });
    }
    if !report.all_ratios_finite() {
        return Err(Error::Config("non-finite product ratio".into()));
    }
    Ok(report)
}

/// The Holder split `(a, b)` of the power nonlinearity: `(n, 2)` for
/// `m = 2n`, `(n, 5)` for `m = 2n + 1`; verifies the two exponent identities
/// `(3p+1)/(3p+2) = 3a/(3p+2) + b/(2(3p+2))` and
/// `(2p+1)/(3p+2) = (m+1)/(3p+2)` exactly with `p = m/2`.
pub fn holder_split(m: i64) -> Result<(i64, i64)> {
    if m < 2 {
        return Err(Error::Config(format!("power split needs m >= 2, got {m}")));
    }
    let n = m / 2;
    let (a, b) = if m % 2 == 0 { (n, 2) } else { (n, 5) };
    let p = Ratio::new(m, 2);
    let three = Ratio::from_integer(3);
    let two = Ratio::from_integer(2);
    let one = Ratio::from_integer(1);
    let denom = three * p + two;
    let id1_lhs = (three * p + one) / denom;
    let id1_rhs = three * Ratio::from_integer(a) / denom + Ratio::from_integer(b) / (two * denom);
    let id2_lhs = (two * p + one) / denom;
    let id2_rhs = Ratio::from_integer(m + 1) / denom;
    if id1_lhs != id1_rhs || id2_lhs != id2_rhs {
        return Err(Error::SplitIdentity { m, p: p.to_string() });
    }
    Ok((a, b))
}

/// Power nonlinearity bound: `||u^{m+1}||_{X^0(dual pair)} <= C ||u||^{m+1}_{X^0(Strichartz pair)}`
/// with an amplitude sweep confirming exact degree-(m+1) homogeneity.
pub fn verify_power_nonlinearity<T: Scalar>(
    family: &[(String, SpaceTimeField<T>)],
    m: u32,
    p: f64,
    j_min: i32,
    c: &CutoffProfile<T>,
) -> Result<EstimateReport> {
    if p < 4.0 {
        return Err(Error::InvalidExponent(format!("power estimate needs p >= 4, got {p}")));
    }
    let (px, rt) = crate::estimates::strichartz_exponents(p);
    let (qx, st) = crate::estimates::duhamel_dual_exponents(p);
    let lhs_spec = MixedNormSpec::new(qx, st)?;
    let rhs_spec = MixedNormSpec::new(px, rt)?;
    let strategies = default_x_strategies(j_min);
    let mut report = EstimateReport::new(format!("power(m={m},p={p})"));
    for (id, u) in family {
        let power = u.power_dealiased(m + 1)?;
        let lhs = x_norm_ub(&power, 0.0, lhs_spec, &strategies, j_min, c)?.value.to_f64c();
        let rhs = x_norm_ub(u, 0.0, rhs_spec, &strategies, j_min, c)?.value.to_f64c();
        report.push(ReportRow {
            estimate_id: String::new(),
            input_id: id.clone(),
            j: None,
            k: None,
            lambda: None,
            lhs,
            rhs: rhs.powi(m as i32 + 1),
            ratio: lhs / rhs.powi(m as i32 + 1),
        });
        // amplitude homogeneity: lhs(c u) = c^{m+1} lhs(u)
        for amp in [0.5, 2.0] {
            let scaled = u.scale(Complex::new(T::from_f64c(amp), T::zero()));
            let lhs_s = x_norm_ub(
                &scaled.power_dealiased(m + 1)?,
                0.0,
                lhs_spec,
                &strategies,
                j_min,
                c,
            )?
            .value
            .to_f64c();
            let slope = (lhs_s / lhs).ln() / amp.ln();
            report.push(ReportRow {
                estimate_id: String::new(),
                input_id: format!("{id}:homogeneity"),
                j: None,
                k: None,
                lambda: Some(amp),
                lhs: lhs_s,
                rhs: lhs * amp.powi(m as i32 + 1),
                ratio: lhs_s / (lhs * amp.powi(m as i32 + 1)),
            });
            if (slope - (m as f64 + 1.0)).abs() > 0.01 {
                return Err(Error::Config(format!(
                    "homogeneity slope {slope} deviates from {}",
                    m + 1
                )));
            }
        }
    }
    if !report.all_ratios_finite() {
        return Err(Error::Config("non-finite power ratio".into()));
    }
    Ok(report)
}
