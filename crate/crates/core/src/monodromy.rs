//! Frame ODE integration dA/ds = -mu eta A, monodromy eigen-structure,
//! spectral-parameter sweeps and resonance location.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::curve::PolarisedCurve;
use crate::error::{Error, Result};
use crate::minkowski::{char_poly, Mat4, OrthoMatrix, SkewMap, Vec31};

/// Default step-doubling tolerance for the checked integrator.
pub const TOL_ODE: f64 = 1e-6;
/// Relative identity tolerance: a monodromy is a resonance when
/// ||M - I||_F < TOL_RES_REL * ||M||_F.
pub const TOL_RES_REL: f64 = 1e-6;
/// Resonances closer to mu = 0 than this are the trivial M^0 = I.
pub const MU_TRIVIAL: f64 = 1e-6;

/// Eigen-structure classification of a monodromy matrix in SO(3,1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Eigenvalues {1, 1, e^{i theta}, e^{-i theta}}.
    UnitCircle,
    /// Eigenvalues {1, 1, a, 1/a} with real a != 1.
    RealPair,
    /// Trace near 4 but M far from I: likely non-diagonalisable.
    ParabolicCandidate,
    /// M = I within tolerance: a resonance.
    Identity,
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Branch::UnitCircle => "UNIT_CIRCLE",
            Branch::RealPair => "REAL_PAIR",
            Branch::ParabolicCandidate => "PARABOLIC_CANDIDATE",
            Branch::Identity => "IDENTITY",
        })
    }
}

/// Monodromy matrix at one value of the spectral parameter, with its
/// eigen-structure.
#[derive(Debug, Clone)]
pub struct MonodromyResult {
    pub mu: f64,
    pub matrix: OrthoMatrix,
    pub eigenvalues: [Complex64; 4],
    pub branch: Branch,
    /// Principal phase acos((trace - 2)/2) in [0, pi]; the argument of the
    /// unit-circle pair on that branch.
    pub theta: f64,
    /// The non-unit eigenvalue representative: e^{i theta} (im >= 0) on the
    /// unit-circle branch, the larger real eigenvalue on the real-pair branch.
    pub lambda: Complex64,
    /// Two spanning vectors of the 1-eigenspace, when it is 2-dimensional.
    pub fixed_plane: Option<(Vec31, Vec31)>,
    /// Minkowski orthogonality defect of the matrix.
    pub defect: f64,
    /// ||M - I||_F, the resonance residual.
    pub identity_residual: f64,
}

/// A monodromy sweep over a uniform grid of the spectral parameter, with a
/// continuously unwrapped phase anchored at theta(0) = 0.
#[derive(Debug, Clone)]
pub struct SpectralSweep {
    pub results: Vec<MonodromyResult>,
    pub theta_unwrapped: Vec<f64>,
}

/// A located resonance point, possibly on an l-fold cover.
#[derive(Debug, Clone, Copy)]
pub struct ResonancePoint {
    pub mu: f64,
    pub cover: u32,
    pub winding: i64,
    /// ||M^l - I||_F at the integration resolution used for the search.
    pub residual: f64,
    /// The same residual recomputed with doubled steps, separating
    /// root-finder convergence from integrator bias.
    pub residual_recheck: f64,
}

/// One exact step factor exp(N) = I + N + N^2/2 for the nilpotent N = c eta.
fn step_exponential(eta: &SkewMap, c: f64) -> Mat4 {
    let n = eta.matrix().scale(c);
    let n2 = n.matmul(&n);
    Mat4::identity().add_mat(&n).add_mat(&n2.scale(0.5))
}

/// Integrates dA/ds = -mu eta(s) A from s0 to s1 with the midpoint
/// exact-exponential scheme. Each factor is exactly Minkowski-orthogonal, so
/// the defect of the product grows only by round-off accumulation.
pub fn integrate_frame(
    curve: &PolarisedCurve,
    mu: f64,
    s0: f64,
    s1: f64,
    steps: usize,
) -> Result<OrthoMatrix> {
    if steps < 16 {
        return Err(Error::BadParameter("integrator needs at least 16 steps".into()));
    }
    let h = (s1 - s0) / steps as f64;
    let mut a = Mat4::identity();
    for k in 0..steps {
        let eta = curve.eta(s0 + (k as f64 + 0.5) * h)?;
        a = step_exponential(&eta, -mu * h).matmul(&a);
    }
    Ok(OrthoMatrix::new(a))
}

/// As `integrate_frame`, but estimates the discretisation error by step
/// doubling (Richardson, 2nd-order scheme) and fails if it exceeds tol_ode.
/// Returns the finer of the two integrations.
pub fn integrate_frame_checked(
    curve: &PolarisedCurve,
    mu: f64,
    s0: f64,
    s1: f64,
    steps: usize,
    tol_ode: f64,
) -> Result<OrthoMatrix> {
    let coarse = integrate_frame(curve, mu, s0, s1, steps)?;
    let fine = integrate_frame(curve, mu, s0, s1, 2 * steps)?;
    let diff = fine.matrix().sub_mat(coarse.matrix()).frobenius();
    let estimate = diff / 3.0;
    if estimate > tol_ode {
        return Err(Error::StepTooCoarse { estimate, tol: tol_ode });
    }
    Ok(fine)
}

/// Richardson extrapolation of the midpoint scheme: combines runs at `steps`
/// and 2 * `steps` into a 4th-order-accurate frame. The combination is no
/// longer exactly orthogonal; its defect is of the same size as its error.
pub fn integrate_frame_extrapolated(
    curve: &PolarisedCurve,
    mu: f64,
    s0: f64,
    s1: f64,
    steps: usize,
) -> Result<OrthoMatrix> {
    let coarse = integrate_frame(curve, mu, s0, s1, steps)?;
    let fine = integrate_frame(curve, mu, s0, s1, 2 * steps)?;
    let combined = fine
        .matrix()
        .scale(4.0 / 3.0)
        .sub_mat(&coarse.matrix().scale(1.0 / 3.0));
    Ok(OrthoMatrix::new(combined))
}

/// Classical 4th-order Runge-Kutta integration of the same ODE; not
/// group-preserving, used as a cross-check against scheme bugs.
pub fn integrate_frame_rk4(
    curve: &PolarisedCurve,
    mu: f64,
    s0: f64,
    s1: f64,
    steps: usize,
) -> Result<OrthoMatrix> {
    if steps < 16 {
        return Err(Error::BadParameter("integrator needs at least 16 steps".into()));
    }
    let h = (s1 - s0) / steps as f64;
    let rhs = |s: f64, a: &Mat4| -> Result<Mat4> {
        Ok(curve.eta(s)?.matrix().scale(-mu).matmul(a))
    };
    let mut a = Mat4::identity();
    for k in 0..steps {
        let s = s0 + k as f64 * h;
        let k1 = rhs(s, &a)?;
        let k2 = rhs(s + h / 2.0, &a.add_mat(&k1.scale(h / 2.0)))?;
        let k3 = rhs(s + h / 2.0, &a.add_mat(&k2.scale(h / 2.0)))?;
        let k4 = rhs(s + h, &a.add_mat(&k3.scale(h)))?;
        a = a.add_mat(
            &k1.add_mat(&k2.scale(2.0))
                .add_mat(&k3.scale(2.0))
                .add_mat(&k4)
                .scale(h / 6.0),
        );
    }
    Ok(OrthoMatrix::new(a))
}

/// The frame at every grid point: A(s_k), k = 0..=steps, A(0) = I,
/// A(T) = the monodromy matrix.
pub fn integrate_frames(curve: &PolarisedCurve, mu: f64, steps: usize) -> Result<Vec<Mat4>> {
    if steps < 16 {
        return Err(Error::BadParameter("integrator needs at least 16 steps".into()));
    }
    let h = curve.period / steps as f64;
    let mut a = Mat4::identity();
    let mut out = Vec::with_capacity(steps + 1);
    out.push(a);
    for k in 0..steps {
        let eta = curve.eta((k as f64 + 0.5) * h)?;
        a = step_exponential(&eta, -mu * h).matmul(&a);
        out.push(a);
    }
    Ok(out)
}

/// Integrates one period and classifies the eigen-structure of A(T).
pub fn monodromy(curve: &PolarisedCurve, mu: f64, steps: usize) -> Result<MonodromyResult> {
    let m = integrate_frame(curve, mu, 0.0, curve.period, steps)?;
    Ok(classify(mu, m))
}

/// As `monodromy`, with the Richardson-extrapolated (4th-order) frame; use
/// when the residual of interest sits below the 2nd-order integrator bias.
pub fn monodromy_extrapolated(
    curve: &PolarisedCurve,
    mu: f64,
    steps: usize,
) -> Result<MonodromyResult> {
    let m = integrate_frame_extrapolated(curve, mu, 0.0, curve.period, steps)?;
    Ok(classify(mu, m))
}

fn classify(mu: f64, m: OrthoMatrix) -> MonodromyResult {
    let defect = m.defect();
    let scale = m.matrix().frobenius();
    let identity_residual = m.matrix().sub_mat(&Mat4::identity()).frobenius();
    let one = Complex64::new(1.0, 0.0);

    if identity_residual < TOL_RES_REL * scale {
        return MonodromyResult {
            mu,
            matrix: m,
            eigenvalues: [one; 4],
            branch: Branch::Identity,
            theta: 0.0,
            lambda: one,
            fixed_plane: None,
            defect,
            identity_residual,
        };
    }

    // M is in SO(3,1), so its characteristic quartic is palindromic and the
    // substitution y = lambda + 1/lambda reduces it to
    // y^2 - trace y + (c2 - 2) = 0: one root y carries the fixed pair {1, 1}
    // (y = 2), the other the rotation/boost pair {lambda, 1/lambda}. This is
    // far better conditioned near the double root 1 than a generic quartic
    // solve.
    let c = char_poly(m.matrix());
    let tr_eff = -(c[1] + c[3]) / 2.0;
    let disc = (tr_eff * tr_eff / 4.0 - (c[2] - 2.0)).max(0.0);
    let sq = disc.sqrt();
    let (y_a, y_b) = (tr_eff / 2.0 + sq, tr_eff / 2.0 - sq);
    let (y_fixed, y_rot) = if (y_a - 2.0).abs() <= (y_b - 2.0).abs() {
        (y_a, y_b)
    } else {
        (y_b, y_a)
    };
    let half = y_rot / 2.0;
    let theta = half.clamp(-1.0, 1.0).acos();

    // lambda + 1/lambda = y_rot: unit-circle pair for |y| < 2, real
    // reciprocal pair for |y| > 2
    let lambda_rot = if half.abs() <= 1.0 {
        Complex64::new(half, (1.0 - half * half).sqrt())
    } else {
        let r = half.abs() + (half * half - 1.0).sqrt();
        Complex64::new(r.copysign(half), 0.0)
    };
    let eigenvalues = [one, one, lambda_rot, lambda_rot.inv()];

    // the 1-eigenspace as the column space of the spectral projector
    // annihilating the rotation pair (sum y_rot, product 1); immune to the
    // integrator bias splitting the double eigenvalue 1
    let fixed = {
        let proj = m
            .matrix()
            .matmul(m.matrix())
            .sub_mat(&m.matrix().scale(y_rot))
            .add_mat(&Mat4::identity());
        dominant_plane(&proj)
    };

    // |half - 1| below this cannot be told apart from a nilpotent block on
    // top of the fixed pair (trace near 4 but M far from the identity)
    const TOL_HALF: f64 = 1e-7;
    let (branch, lambda) = if (y_fixed - 2.0).abs() > 1e-4 {
        // no unit eigenpair at all: the expected {1, 1} pair is missing
        (Branch::ParabolicCandidate, lambda_rot)
    } else if half < 1.0 - TOL_HALF {
        if fixed.is_some() {
            (Branch::UnitCircle, lambda_rot)
        } else {
            (Branch::ParabolicCandidate, lambda_rot)
        }
    } else if half > 1.0 + TOL_HALF {
        (Branch::RealPair, lambda_rot)
    } else {
        (Branch::ParabolicCandidate, one)
    };

    MonodromyResult {
        mu,
        matrix: m,
        eigenvalues,
        branch,
        theta,
        lambda,
        fixed_plane: fixed,
        defect,
        identity_residual,
    }
}

/// The two dominant orthonormalised columns of a (numerically) rank-2
/// matrix, by pivoted Gram-Schmidt; None if the second pivot is negligible.
fn dominant_plane(p: &Mat4) -> Option<(Vec31, Vec31)> {
    let mut cols: Vec<Vec31> = (0..4)
        .map(|j| Vec31([p.0[0][j], p.0[1][j], p.0[2][j], p.0[3][j]]))
        .collect();
    cols.sort_by(|a, b| b.norm_eucl().partial_cmp(&a.norm_eucl()).unwrap());
    let n1 = cols[0].norm_eucl();
    if n1 < 1e-12 {
        return None;
    }
    let u1 = cols[0].scale(1.0 / n1);
    let mut best: Option<Vec31> = None;
    let mut best_n = 0.0;
    for c in &cols[1..] {
        let dot = c.0.iter().zip(u1.0.iter()).map(|(a, b)| a * b).sum::<f64>();
        let r = *c - u1.scale(dot);
        let rn = r.norm_eucl();
        if rn > best_n {
            best_n = rn;
            best = Some(r.scale(1.0 / rn));
        }
    }
    if best_n < 1e-7 * n1 {
        return None;
    }
    best.map(|u2| (u1, u2))
}

/// The continuous lift of the unsigned phase: among 2 pi k +- raw, the
/// candidate nearest to `target`.
fn nearest_candidate(raw: f64, target: f64) -> f64 {
    let tau = 2.0 * std::f64::consts::PI;
    let k1 = ((target - raw) / tau).round();
    let c1 = tau * k1 + raw;
    let k2 = ((target + raw) / tau).round();
    let c2 = tau * k2 - raw;
    if (c1 - target).abs() <= (c2 - target).abs() {
        c1
    } else {
        c2
    }
}

/// Continues the phase from (mu_from, theta_from) to mu_to whose raw phase is
/// raw_to, bisecting the spectral interval until the lift is unambiguous.
fn unwrap_step(
    curve: &PolarisedCurve,
    steps: usize,
    mu_from: f64,
    theta_from: f64,
    mu_to: f64,
    raw_to: f64,
    depth: usize,
) -> Result<f64> {
    let cand = nearest_candidate(raw_to, theta_from);
    if (cand - theta_from).abs() < 0.8 {
        return Ok(cand);
    }
    if depth >= 24 {
        return Err(Error::UnwrapFailure {
            mu_lo: mu_from.min(mu_to),
            mu_hi: mu_from.max(mu_to),
        });
    }
    let mid = 0.5 * (mu_from + mu_to);
    let raw_mid = monodromy(curve, mid, steps)?.theta;
    let theta_mid = unwrap_step(curve, steps, mu_from, theta_from, mid, raw_mid, depth + 1)?;
    unwrap_step(curve, steps, mid, theta_mid, mu_to, raw_to, depth + 1)
}

/// Monodromy over a uniform spectral grid of n points on [mu_min, mu_max]
/// (endpoints included), evaluated in parallel, with a sequential phase
/// unwrapping pass anchored at theta(0) = 0.
pub fn sweep(
    curve: &PolarisedCurve,
    mu_min: f64,
    mu_max: f64,
    n: usize,
    steps: usize,
) -> Result<SpectralSweep> {
    if !(mu_min < mu_max) || n < 2 {
        return Err(Error::BadParameter(
            "sweep needs mu_min < mu_max and at least 2 grid points".into(),
        ));
    }
    let mus: Vec<f64> = (0..n)
        .map(|i| mu_min + (mu_max - mu_min) * i as f64 / (n - 1) as f64)
        .collect();
    let results: Vec<MonodromyResult> = mus
        .par_iter()
        .map(|&mu| monodromy(curve, mu, steps))
        .collect::<Result<_>>()?;

    // unwrap outward from mu = 0 where M = I and theta = 0 exactly
    let mut theta = vec![0.0; n];
    // ascending pass over grid points with mu >= 0
    let mut prev_mu = 0.0;
    let mut prev_theta = 0.0;
    for i in 0..n {
        if mus[i] < 0.0 {
            continue;
        }
        theta[i] = unwrap_step(curve, steps, prev_mu, prev_theta, mus[i], results[i].theta, 0)?;
        prev_mu = mus[i];
        prev_theta = theta[i];
    }
    // descending pass over grid points with mu < 0
    prev_mu = 0.0;
    prev_theta = 0.0;
    for i in (0..n).rev() {
        if mus[i] >= 0.0 {
            continue;
        }
        theta[i] = unwrap_step(curve, steps, prev_mu, prev_theta, mus[i], results[i].theta, 0)?;
        prev_mu = mus[i];
        prev_theta = theta[i];
    }

    Ok(SpectralSweep {
        results,
        theta_unwrapped: theta,
    })
}

/// ||M(mu)^l - I||_F at the given resolution.
// Extrapolated frames keep the residual floor of tangential touch-downs well
// below the integrator bias, which would otherwise both lift the minimum and
// shift its location between resolutions.
fn cover_residual(curve: &PolarisedCurve, mu: f64, l: u32, steps: usize) -> Result<f64> {
    let m = integrate_frame_extrapolated(curve, mu, 0.0, curve.period, steps)?;
    Ok(m.matrix().pow(l).sub_mat(&Mat4::identity()).frobenius())
}

/// Locates the minimiser of f on [a, b] by a 33-point scan followed by
/// golden-section contraction. f is V-shaped near a resonance, so this
/// converges for tangential touch-downs where sign-based root-finding fails.
fn refine_minimum<F: FnMut(f64) -> Result<f64>>(
    mut a: f64,
    mut b: f64,
    mut f: F,
) -> Result<(f64, f64)> {
    let m = 33;
    let mut best_i = 0;
    let mut best_v = f64::INFINITY;
    let xs: Vec<f64> = (0..m)
        .map(|i| a + (b - a) * i as f64 / (m - 1) as f64)
        .collect();
    for (i, &x) in xs.iter().enumerate() {
        let v = f(x)?;
        if v < best_v {
            best_v = v;
            best_i = i;
        }
    }
    // keep contracting even when the scan minimum sits at a bracket endpoint:
    // the true minimiser may hide inside the boundary cell
    a = xs[best_i.saturating_sub(1)];
    b = xs[(best_i + 1).min(m - 1)];
    let gr = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = b - gr * (b - a);
    let mut d = a + gr * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..90 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = f(d)?;
        }
        if b - a < 1e-13 * a.abs().max(1.0) {
            break;
        }
    }
    let x = 0.5 * (a + b);
    let v = f(x)?;
    Ok((x, v))
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Candidate spectral intervals where the unwrapped phase meets the target
/// 2 pi p / l: transversal sign crossings plus tangential approaches at local
/// extrema of the phase.
fn candidate_brackets(mus: &[f64], theta: &[f64], target: f64) -> Vec<(f64, f64)> {
    let n = mus.len();
    let mut out = Vec::new();
    for j in 1..n {
        if (theta[j - 1] - target) * (theta[j] - target) < 0.0 {
            out.push((mus[j - 1], mus[j]));
        }
    }
    for j in 1..(n - 1) {
        let extremum = (theta[j] - theta[j - 1]) * (theta[j + 1] - theta[j]) <= 0.0;
        let crosses = (theta[j - 1] - target) * (theta[j + 1] - target) < 0.0;
        if extremum && !crosses && (theta[j] - target).abs() < 0.35 {
            out.push((mus[j - 1], mus[j + 1]));
        }
    }
    out
}

fn search_cover(
    sw: &SpectralSweep,
    curve: &PolarisedCurve,
    l: u32,
    steps: usize,
    tol_res: f64,
) -> Result<Vec<ResonancePoint>> {
    let mus: Vec<f64> = sw.results.iter().map(|r| r.mu).collect();
    let theta = &sw.theta_unwrapped;
    let tau = 2.0 * std::f64::consts::PI;
    let tmin = theta.iter().cloned().fold(f64::INFINITY, f64::min) - 0.5;
    let tmax = theta.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 0.5;

    let p_lo = (tmin * l as f64 / tau).floor() as i64;
    let p_hi = (tmax * l as f64 / tau).ceil() as i64;

    let mut found: Vec<ResonancePoint> = Vec::new();
    for p in p_lo..=p_hi {
        if l >= 2 && gcd(p.unsigned_abs(), l as u64) != 1 {
            continue; // non-reduced fraction: belongs to a smaller cover
        }
        let target = tau * p as f64 / l as f64;
        for (a, b) in candidate_brackets(&mus, theta, target) {
            let (mu_star, residual) =
                refine_minimum(a, b, |mu| cover_residual(curve, mu, l, steps))?;
            if residual > tol_res || mu_star.abs() < MU_TRIVIAL {
                continue;
            }
            // duplicate suppression across neighbouring brackets
            if found
                .iter()
                .any(|r| (r.mu - mu_star).abs() < 1e-8 * mu_star.abs().max(1.0))
            {
                continue;
            }
            // winding from the interpolated unwrapped phase
            let theta_at = interp(&mus, theta, mu_star);
            let winding = (theta_at * l as f64 / tau).round() as i64;
            if l >= 2 && gcd(winding.unsigned_abs(), l as u64) != 1 {
                continue; // landed on a lower-cover resonance
            }
            let residual_recheck = cover_residual(curve, mu_star, l, 2 * steps)?;
            found.push(ResonancePoint {
                mu: mu_star,
                cover: l,
                winding,
                residual,
                residual_recheck,
            });
        }
    }
    found.sort_by(|x, y| x.mu.partial_cmp(&y.mu).unwrap());
    Ok(found)
}

fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x <= xs[0] {
        return ys[0];
    }
    for j in 1..n {
        if x <= xs[j] {
            let t = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
            return ys[j - 1] * (1.0 - t) + ys[j] * t;
        }
    }
    ys[n - 1]
}

/// Resonance points (M = I) located from a sweep. Each candidate interval is
/// refined by minimising ||M - I||_F; the residual is rechecked at doubled
/// steps.
pub fn find_resonance(
    sw: &SpectralSweep,
    curve: &PolarisedCurve,
    steps: usize,
    tol_res: f64,
) -> Result<Vec<ResonancePoint>> {
    search_cover(sw, curve, 1, steps, tol_res)
}

/// Resonance points on l-fold covers, 2 <= l <= l_max, for reduced fractions
/// p/l only; sorted by mu then l.
pub fn find_cover_resonance(
    sw: &SpectralSweep,
    curve: &PolarisedCurve,
    l_max: u32,
    steps: usize,
    tol_res: f64,
) -> Result<Vec<ResonancePoint>> {
    if l_max < 2 {
        return Err(Error::BadParameter("cover search needs l_max >= 2".into()));
    }
    let mut out = Vec::new();
    for l in 2..=l_max {
        out.extend(search_cover(sw, curve, l, steps, tol_res)?);
    }
    out.sort_by(|x, y| {
        x.mu.partial_cmp(&y.mu)
            .unwrap()
            .then(x.cover.cmp(&y.cover))
    });
    Ok(out)
}
