//! Darboux transforms as parallel sections of the family of flat connections,
//! their projections and closure, and the transport of polynomial conserved
//! quantities through the Gamma gauge.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::curve::{PolarisedCurve, SectionPoly};
use crate::error::{Error, Result};
use crate::minkowski::{
    eigen4, null_directions_in_plane, real_kernel, Mat4, SkewMap, Vec31, TOL_EIG, TOL_NULL,
};
use crate::monodromy::{integrate_frames, Branch, MonodromyResult};
use crate::space_forms::{project, NullSplitting};

/// Projective closure tolerance for Darboux transforms.
pub const TOL_CLOSURE: f64 = 1e-6;
/// Immersedness floor: (X_hat', X_hat') relative to |X_hat|^2.
pub const TOL_IMMERSED: f64 = 1e-10;
/// Relative remainder tolerance of the Backlund polynomial division.
pub const TOL_BACKLUND: f64 = 1e-6;

/// A Darboux transform sampled on the integration grid s_k = k T / steps,
/// k = 0..=steps (both endpoints kept to expose the closure defect).
#[derive(Debug, Clone)]
pub struct TransformCurve {
    pub mu: f64,
    pub s_grid: Vec<f64>,
    /// Lightlike sections X_hat(s_k) = A(s_k) X0.
    pub sections: Vec<Vec31>,
    /// Plane projections; None marks points at infinity of the chart.
    pub projected: Vec<Option<[f64; 2]>>,
    /// min over signs of || X_hat(T)/|X_hat(T)| -+ X_hat(0)/|X_hat(0)| ||.
    pub closure_residual: f64,
    pub closed: bool,
}

/// eta, sections and their derivatives of a transform, for conserved-quantity
/// verification against the transformed curve; grid of n = steps points over
/// [0, T). Derivatives are analytic: X_hat' = -mu eta X_hat.
#[derive(Debug, Clone)]
pub struct TransformConnection {
    pub etas: Vec<SkewMap>,
    pub lifts: Vec<Vec31>,
    pub lift_derivs: Vec<Vec31>,
    /// false where (X_hat', X_hat') is numerically zero; such samples carry a
    /// zero eta and must be excluded from residual statistics.
    pub immersed: Vec<bool>,
}

/// Gauge comparison outcome for one value of t.
#[derive(Debug, Clone, Copy)]
pub enum GaugeEntry {
    Checked { t: f64, max_discrepancy: f64 },
    /// t = mu makes the gauge factor 1 - t/mu vanish.
    Skipped { t: f64 },
}

#[derive(Debug, Clone)]
pub struct GaugeReport {
    pub entries: Vec<GaugeEntry>,
    pub excluded_samples: usize,
}

/// Propagates a lightlike seed by the frame: X_hat(s_k) = A(s_k) X0.
pub fn parallel_section(
    curve: &PolarisedCurve,
    mu: f64,
    x0: &Vec31,
    steps: usize,
) -> Result<TransformCurve> {
    parallel_section_impl(curve, mu, x0, steps, false)
}

/// As `parallel_section` with Richardson-extrapolated (4th-order) sections;
/// use when downstream residuals sit below the 2nd-order integrator bias.
pub fn parallel_section_extrapolated(
    curve: &PolarisedCurve,
    mu: f64,
    x0: &Vec31,
    steps: usize,
) -> Result<TransformCurve> {
    parallel_section_impl(curve, mu, x0, steps, true)
}

fn parallel_section_impl(
    curve: &PolarisedCurve,
    mu: f64,
    x0: &Vec31,
    steps: usize,
    extrapolate: bool,
) -> Result<TransformCurve> {
    let norm2 = x0.norm_eucl().powi(2);
    let pairing = x0.inner(x0);
    if pairing.abs() > TOL_NULL * norm2.max(1e-300) {
        return Err(Error::NotLightlike { norm: pairing });
    }
    let frames = integrate_frames(curve, mu, steps)?;
    let sections: Vec<Vec31> = if extrapolate {
        let fine = integrate_frames(curve, mu, 2 * steps)?;
        (0..=steps)
            .map(|k| (fine[2 * k].apply(x0).scale(4.0) - frames[k].apply(x0)).scale(1.0 / 3.0))
            .collect()
    } else {
        frames.iter().map(|a| a.apply(x0)).collect()
    };
    let s_grid: Vec<f64> = (0..=steps)
        .map(|k| curve.period * k as f64 / steps as f64)
        .collect();
    let projected: Vec<Option<[f64; 2]>> = sections
        .iter()
        .map(|v| project(v, &curve.space_form).ok())
        .collect();

    let u = sections[0].scale(1.0 / sections[0].norm_eucl());
    let w = sections[steps].scale(1.0 / sections[steps].norm_eucl());
    let closure_residual = (w - u).norm_eucl().min((w + u).norm_eucl());
    Ok(TransformCurve {
        mu,
        s_grid,
        sections,
        projected,
        closed: closure_residual < TOL_CLOSURE,
        closure_residual,
    })
}

fn real_eigenvector(m: &Mat4, lambda: f64) -> Result<Vec31> {
    let mut shifted = *m;
    for i in 0..4 {
        shifted.0[i][i] -= lambda;
    }
    let kernel = real_kernel(&shifted, 1e-6);
    kernel.into_iter().next().ok_or(Error::IllConditioned {
        residual: f64::INFINITY,
    })
}

/// The two closed Darboux transforms determined by the lightlike lines that
/// the monodromy preserves.
pub fn closed_transforms(
    curve: &PolarisedCurve,
    mono: &MonodromyResult,
    steps: usize,
) -> Result<(TransformCurve, TransformCurve)> {
    closed_transforms_impl(curve, mono, steps, false)
}

/// As `closed_transforms` with Richardson-extrapolated sections.
pub fn closed_transforms_extrapolated(
    curve: &PolarisedCurve,
    mono: &MonodromyResult,
    steps: usize,
) -> Result<(TransformCurve, TransformCurve)> {
    closed_transforms_impl(curve, mono, steps, true)
}

fn closed_transforms_impl(
    curve: &PolarisedCurve,
    mono: &MonodromyResult,
    steps: usize,
    extrapolate: bool,
) -> Result<(TransformCurve, TransformCurve)> {
    let (w1, w2) = match mono.branch {
        Branch::ParabolicCandidate => return Err(Error::Parabolic),
        Branch::RealPair => {
            // reciprocal real eigenvalues carry lightlike eigenvectors
            let pairs = eigen4(&mono.matrix, TOL_EIG)?;
            let mut reals: Vec<f64> = pairs
                .iter()
                .filter(|(l, _)| l.im.abs() < 1e-7 && (l.re - 1.0).abs() > 1e-5)
                .map(|(l, _)| l.re)
                .collect();
            reals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            reals.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
            if reals.len() < 2 {
                return Err(Error::Degenerate);
            }
            (
                real_eigenvector(mono.matrix.matrix(), reals[0])?,
                real_eigenvector(mono.matrix.matrix(), reals[reals.len() - 1])?,
            )
        }
        Branch::UnitCircle => {
            let (u, v) = mono.fixed_plane.ok_or(Error::Degenerate)?;
            null_directions_in_plane(&u, &v, 1e-9)?
        }
        Branch::Identity => {
            // every line is preserved; a canonical Lorentzian plane will do
            null_directions_in_plane(&Vec31::basis(0), &Vec31::basis(1), 1e-9)?
        }
    };
    Ok((
        parallel_section_impl(curve, mono.mu, &w1, steps, extrapolate)?,
        parallel_section_impl(curve, mono.mu, &w2, steps, extrapolate)?,
    ))
}

/// `count` pseudo-random lightlike vectors (deterministic in `seed`).
pub fn random_lightlike_seeds(count: usize, seed: u64) -> Vec<Vec31> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut u = [0.0f64; 3];
            loop {
                for c in u.iter_mut() {
                    *c = rng.gen_range(-1.0..1.0);
                }
                let n = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
                if n > 1e-3 {
                    for c in u.iter_mut() {
                        *c /= n;
                    }
                    break;
                }
            }
            Vec31::new(1.0, u[0], u[1], u[2])
        })
        .collect()
}

/// The constant c = inner(p^mu(s), X_hat(s)): returns (mean, max deviation)
/// over the grid. A vanishing c marks the transform as Backlund-type.
pub fn backlund_indicator(
    transform: &TransformCurve,
    p: &SectionPoly,
    mu: f64,
) -> Result<(f64, f64)> {
    let n = transform.sections.len() - 1;
    if p.samples() != n {
        return Err(Error::BadParameter(
            "conserved quantity and transform must share the sample grid".into(),
        ));
    }
    let cs: Vec<f64> = (0..n)
        .map(|k| p.eval(k, mu).inner(&transform.sections[k]))
        .collect();
    let mean = cs.iter().sum::<f64>() / n as f64;
    let dev = cs
        .iter()
        .map(|c| (c - mean).abs())
        .fold(0.0_f64, f64::max);
    Ok((mean, dev))
}

/// The pointwise splittings R^{3,1} = L + W + L_hat with L carrying the curve
/// lift and L_hat the transform section, on the n = steps grid over [0, T).
pub fn splittings_along(
    curve: &PolarisedCurve,
    transform: &TransformCurve,
) -> Result<Vec<NullSplitting>> {
    let n = transform.sections.len() - 1;
    (0..n)
        .map(|k| {
            let sec = curve.evaluate(curve.period * k as f64 / n as f64)?;
            NullSplitting::new(sec.lift, transform.sections[k], 1e-9)
        })
        .collect()
}

/// eta of the transformed curve computed directly from its sections via the
/// section-independent formula q (X_hat ^ X_hat') / (X_hat', X_hat'), with the
/// derivative taken analytically from the defining ODE.
pub fn transform_connection(
    curve: &PolarisedCurve,
    transform: &TransformCurve,
) -> Result<TransformConnection> {
    let n = transform.sections.len() - 1;
    let mu = transform.mu;
    let mut etas = Vec::with_capacity(n);
    let mut lifts = Vec::with_capacity(n);
    let mut lift_derivs = Vec::with_capacity(n);
    let mut immersed = Vec::with_capacity(n);
    for k in 0..n {
        let s = curve.period * k as f64 / n as f64;
        let xh = transform.sections[k];
        let xhp = curve.eta(s)?.apply(&xh).scale(-mu);
        let speed2 = xhp.inner(&xhp);
        let qv = curve.q_value(s)?;
        if speed2.abs() <= TOL_IMMERSED * xh.norm_eucl().powi(2).max(1e-300) {
            etas.push(SkewMap::wedge(&xh, &xhp).scale(0.0));
            immersed.push(false);
        } else {
            etas.push(SkewMap::wedge(&xh, &xhp).scale(qv / speed2));
            immersed.push(true);
        }
        lifts.push(xh);
        lift_derivs.push(xhp);
    }
    Ok(TransformConnection {
        etas,
        lifts,
        lift_derivs,
        immersed,
    })
}

/// Transports p^t through the gauge: p_hat^t = [p^t]_L + rho [p^t]_W
/// + rho^2 [p^t]_Lhat with rho = 1 - t/mu; the result has degree at most
/// d + 1 because the leading Lhat-component vanishes.
pub fn transform_pcq(
    p: &SectionPoly,
    mu: f64,
    splittings: &[NullSplitting],
) -> Result<SectionPoly> {
    if mu == 0.0 {
        return Err(Error::BadParameter("gauge transport requires mu != 0".into()));
    }
    let n = p.samples();
    if splittings.len() != n {
        return Err(Error::BadParameter(
            "splitting grid must match the coefficient grid".into(),
        ));
    }
    let d = p.degree();
    let mut out = vec![vec![Vec31::zero(); n]; d + 3];
    for k in 0..n {
        let sp = &splittings[k];
        for deg in 0..=d {
            let (l, w, lh) = sp.split(&p.coeffs[deg][k]);
            // [p_n]_L contributes at degree n
            out[deg][k] = out[deg][k] + l;
            // rho [p_n]_W = [p_n]_W - t/mu [p_n]_W
            out[deg][k] = out[deg][k] + w;
            out[deg + 1][k] = out[deg + 1][k] - w.scale(1.0 / mu);
            // rho^2 [p_n]_Lhat
            out[deg][k] = out[deg][k] + lh;
            out[deg + 1][k] = out[deg + 1][k] - lh.scale(2.0 / mu);
            out[deg + 2][k] = out[deg + 2][k] + lh.scale(1.0 / (mu * mu));
        }
    }
    let mut result = SectionPoly {
        period: p.period,
        coeffs: out,
    };
    result.truncate_trailing(1e-9);
    Ok(result)
}

/// Degree-preserving transport for Backlund-type transforms: divides the
/// L-component by (t - mu) (remainder must vanish, i.e. [p^mu]_L = 0) and
/// assembles p_tilde^t = -mu Q^t + [p^t]_W + (1 - t/mu) [p^t]_Lhat.
pub fn backlund_pcq(
    p: &SectionPoly,
    mu: f64,
    splittings: &[NullSplitting],
) -> Result<SectionPoly> {
    if mu == 0.0 {
        return Err(Error::BadParameter("gauge transport requires mu != 0".into()));
    }
    let n = p.samples();
    if splittings.len() != n {
        return Err(Error::BadParameter(
            "splitting grid must match the coefficient grid".into(),
        ));
    }
    let d = p.degree();
    let scale = p
        .coeffs
        .iter()
        .flat_map(|c| c.iter())
        .map(|v| v.norm_eucl())
        .fold(0.0_f64, f64::max)
        .max(1e-300);

    let mut out = vec![vec![Vec31::zero(); n]; d + 2];
    let mut worst_remainder: f64 = 0.0;
    for k in 0..n {
        let sp = &splittings[k];
        let parts: Vec<(Vec31, Vec31, Vec31)> =
            (0..=d).map(|deg| sp.split(&p.coeffs[deg][k])).collect();
        // synthetic division of the L-part by (t - mu):
        // q_{d-1} = a_d; q_{j-1} = a_j + mu q_j; remainder = a_0 + mu q_0
        let mut q = vec![Vec31::zero(); d.max(1)];
        let mut carry = Vec31::zero();
        for deg in (1..=d).rev() {
            carry = parts[deg].0 + carry.scale(mu);
            q[deg - 1] = carry;
        }
        let remainder = parts[0].0 + carry.scale(mu);
        worst_remainder = worst_remainder.max(remainder.norm_eucl());
        for deg in 0..=d {
            if deg < d {
                out[deg][k] = out[deg][k] - q[deg].scale(mu);
            }
            out[deg][k] = out[deg][k] + parts[deg].1;
            out[deg][k] = out[deg][k] + parts[deg].2;
            out[deg + 1][k] = out[deg + 1][k] - parts[deg].2.scale(1.0 / mu);
        }
    }
    if worst_remainder > TOL_BACKLUND * scale {
        return Err(Error::NotBacklund {
            remainder: worst_remainder,
        });
    }
    let mut result = SectionPoly {
        period: p.period,
        coeffs: out,
    };
    result.truncate_trailing(1e-9);
    Ok(result)
}

/// 4th-order central differences of a periodic sequence of vectors.
fn fd4(values: &[Vec31], h: f64) -> Vec<Vec31> {
    let n = values.len() as i64;
    let at = |i: i64| values[i.rem_euclid(n) as usize];
    (0..n)
        .map(|i| {
            ((at(i + 1) - at(i - 1)).scale(8.0) - (at(i + 2) - at(i - 2)))
                .scale(1.0 / (12.0 * h))
        })
        .collect()
}

/// Verifies the gauge relation between the connections of the curve and its
/// transform: (d/ds + t eta_hat) v must equal
/// Gamma(rho) [ (d/ds + t eta) (Gamma(rho)^{-1} v) ] with rho = 1 - t/mu.
/// One random smooth periodic test section per call (deterministic in seed).
pub fn check_gauge(
    curve: &PolarisedCurve,
    transform: &TransformCurve,
    mu: f64,
    t_values: &[f64],
    seed: u64,
) -> Result<GaugeReport> {
    let n = transform.sections.len() - 1;
    let h = curve.period / n as f64;
    let conn = transform_connection(curve, transform)?;
    let splittings = splittings_along(curve, transform)?;
    let etas: Vec<SkewMap> = (0..n)
        .map(|k| curve.eta(curve.period * k as f64 / n as f64))
        .collect::<Result<_>>()?;

    // a random periodic test section with a few Fourier modes
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w0 = 2.0 * std::f64::consts::PI / curve.period;
    let modes: Vec<[f64; 8]> = (0..4)
        .map(|_| {
            let mut m = [0.0f64; 8];
            for c in m.iter_mut() {
                *c = rng.gen_range(-1.0..1.0);
            }
            m
        })
        .collect();
    let v_at = |s: f64| -> Vec31 {
        let mut v = [0.0; 4];
        for (i, m) in modes.iter().enumerate() {
            v[i] = m[0]
                + m[1] * (w0 * s).cos()
                + m[2] * (w0 * s).sin()
                + m[3] * (2.0 * w0 * s).cos()
                + m[4] * (2.0 * w0 * s).sin()
                + m[5] * (3.0 * w0 * s).cos()
                + m[6] * (3.0 * w0 * s).sin()
                + m[7] * (4.0 * w0 * s).cos();
        }
        Vec31(v)
    };
    let v: Vec<Vec31> = (0..n)
        .map(|k| v_at(curve.period * k as f64 / n as f64))
        .collect();
    let vp = fd4(&v, h);

    let excluded = conn.immersed.iter().filter(|f| !**f).count();
    let mut entries = Vec::new();
    for &t in t_values {
        let rho = 1.0 - t / mu;
        if rho.abs() < 1e-9 {
            entries.push(GaugeEntry::Skipped { t });
            continue;
        }
        let w: Vec<Vec31> = (0..n)
            .map(|k| splittings[k].gamma(1.0 / rho, &v[k]))
            .collect::<Result<_>>()?;
        let wp = fd4(&w, h);
        let mut worst: f64 = 0.0;
        for k in 0..n {
            if !conn.immersed[k] {
                continue;
            }
            let lhs = vp[k] + conn.etas[k].apply(&v[k]).scale(t);
            let inner = wp[k] + etas[k].apply(&w[k]).scale(t);
            let rhs = splittings[k].gamma(rho, &inner)?;
            worst = worst.max((lhs - rhs).norm_eucl());
        }
        entries.push(GaugeEntry::Checked {
            t,
            max_discrepancy: worst,
        });
    }
    Ok(GaugeReport {
        entries,
        excluded_samples: excluded,
    })
}
