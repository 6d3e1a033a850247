//! Closed polarised plane curves: parametrised families, lightcone lifts,
//! the connection form eta, and polynomial conserved quantities.

use crate::error::{Error, Result};
use crate::minkowski::{SkewMap, Vec31};
use crate::space_forms::{
    euclidean_lift, euclidean_lift_deriv, SpaceFormKind, SpaceFormVector,
};

/// Default closure tolerance scale factor.
pub const TOL_CLOSE: f64 = 1e-9;
/// Default tolerance for conserved-quantity residual reports.
pub const TOL_PCQ: f64 = 1e-7;
/// Regularity floor for (X', X').
pub const TOL_REGULAR: f64 = 1e-12;

/// Built-in parametrised curve families.
///
/// `Figure1` is the rose x(s) = cos 3s (cos s, sin s) with natural period pi;
/// `Figure2` is x(s) = (2 cos s sin(s+1), sin 3s cos 2s cos s) with period 2 pi.
#[derive(Debug, Clone)]
pub enum CurveFamily {
    Circle { radius: f64 },
    Rose { a: f64, b: f64 },
    Figure1,
    Figure2,
    /// Truncated Fourier series per component: x_i(s) = sum_k cos_i[k] cos(k w s)
    /// + sum_k sin_i[k] sin((k+1) w s) with w = 2 pi / period.
    Fourier {
        cos1: Vec<f64>,
        sin1: Vec<f64>,
        cos2: Vec<f64>,
        sin2: Vec<f64>,
    },
    /// Uniform periodic samples over [0, T); evaluated by 6-point Lagrange
    /// interpolation.
    Samples { points: Vec<[f64; 2]> },
}

impl CurveFamily {
    /// Natural period of the family, used as a default by config loaders.
    pub fn default_period(&self) -> f64 {
        match self {
            CurveFamily::Figure1 => std::f64::consts::PI,
            _ => 2.0 * std::f64::consts::PI,
        }
    }

    pub fn position(&self, s: f64, period: f64) -> [f64; 2] {
        match self {
            CurveFamily::Circle { radius } => [radius * s.cos(), radius * s.sin()],
            CurveFamily::Rose { a, b } => {
                let c = (a * s).cos();
                [c * (b * s).cos(), c * (b * s).sin()]
            }
            CurveFamily::Figure1 => {
                let c = (3.0 * s).cos();
                [c * s.cos(), c * s.sin()]
            }
            CurveFamily::Figure2 => [
                2.0 * s.cos() * (s + 1.0).sin(),
                (3.0 * s).sin() * (2.0 * s).cos() * s.cos(),
            ],
            CurveFamily::Fourier { cos1, sin1, cos2, sin2 } => {
                let w = 2.0 * std::f64::consts::PI / period;
                [
                    fourier_eval(cos1, sin1, w * s),
                    fourier_eval(cos2, sin2, w * s),
                ]
            }
            CurveFamily::Samples { points } => lagrange_periodic(points, s, period).0,
        }
    }

    pub fn velocity(&self, s: f64, period: f64) -> [f64; 2] {
        match self {
            CurveFamily::Circle { radius } => [-radius * s.sin(), radius * s.cos()],
            CurveFamily::Rose { a, b } => {
                let (sa, ca) = (a * s).sin_cos();
                let (sb, cb) = (b * s).sin_cos();
                [-a * sa * cb - b * ca * sb, -a * sa * sb + b * ca * cb]
            }
            CurveFamily::Figure1 => {
                let (s3, c3) = (3.0 * s).sin_cos();
                let (sn, cs) = s.sin_cos();
                [-3.0 * s3 * cs - c3 * sn, -3.0 * s3 * sn + c3 * cs]
            }
            CurveFamily::Figure2 => {
                let (s1, c1) = s.sin_cos();
                let (sp, cp) = (s + 1.0).sin_cos();
                let (s3, c3) = (3.0 * s).sin_cos();
                let (s2, c2) = (2.0 * s).sin_cos();
                [
                    -2.0 * s1 * sp + 2.0 * c1 * cp,
                    3.0 * c3 * c2 * c1 - 2.0 * s3 * s2 * c1 - s3 * c2 * s1,
                ]
            }
            CurveFamily::Fourier { cos1, sin1, cos2, sin2 } => {
                let w = 2.0 * std::f64::consts::PI / period;
                [
                    w * fourier_deriv(cos1, sin1, w * s),
                    w * fourier_deriv(cos2, sin2, w * s),
                ]
            }
            CurveFamily::Samples { points } => lagrange_periodic(points, s, period).1,
        }
    }
}

fn fourier_eval(cos_c: &[f64], sin_c: &[f64], u: f64) -> f64 {
    let mut v = 0.0;
    for (k, a) in cos_c.iter().enumerate() {
        v += a * (k as f64 * u).cos();
    }
    for (k, b) in sin_c.iter().enumerate() {
        v += b * ((k + 1) as f64 * u).sin();
    }
    v
}

fn fourier_deriv(cos_c: &[f64], sin_c: &[f64], u: f64) -> f64 {
    let mut v = 0.0;
    for (k, a) in cos_c.iter().enumerate() {
        v -= a * k as f64 * (k as f64 * u).sin();
    }
    for (k, b) in sin_c.iter().enumerate() {
        v += b * (k + 1) as f64 * ((k + 1) as f64 * u).cos();
    }
    v
}

/// 6-point periodic Lagrange interpolation of sampled points, returning the
/// value and the derivative of the interpolant.
fn lagrange_periodic(points: &[[f64; 2]], s: f64, period: f64) -> ([f64; 2], [f64; 2]) {
    let n = points.len();
    let h = period / n as f64;
    let u = s / h;
    let k0 = u.floor() as i64;
    // nodes k0-2 .. k0+3, local coordinates
    let mut xs = [0.0; 6];
    let mut ys1 = [0.0; 6];
    let mut ys2 = [0.0; 6];
    for (j, node) in (-2i64..4).enumerate() {
        let k = k0 + node;
        let idx = k.rem_euclid(n as i64) as usize;
        xs[j] = (k0 + node) as f64 * h;
        ys1[j] = points[idx][0];
        ys2[j] = points[idx][1];
    }
    let (v1, d1) = lagrange_value_deriv(&xs, &ys1, s);
    let (v2, d2) = lagrange_value_deriv(&xs, &ys2, s);
    ([v1, v2], [d1, d2])
}

fn lagrange_value_deriv(xs: &[f64; 6], ys: &[f64; 6], s: f64) -> (f64, f64) {
    let mut val = 0.0;
    let mut der = 0.0;
    for i in 0..6 {
        let mut li = 1.0;
        for j in 0..6 {
            if j != i {
                li *= (s - xs[j]) / (xs[i] - xs[j]);
            }
        }
        val += ys[i] * li;
        // derivative of the basis polynomial
        let mut dli = 0.0;
        for k in 0..6 {
            if k == i {
                continue;
            }
            let mut term = 1.0 / (xs[i] - xs[k]);
            for j in 0..6 {
                if j != i && j != k {
                    term *= (s - xs[j]) / (xs[i] - xs[j]);
                }
            }
            dli += term;
        }
        der += ys[i] * dli;
    }
    (val, der)
}

/// The polarisation q = (1/m) ds^2 of a closed curve.
#[derive(Debug, Clone)]
pub enum Polarisation {
    /// q = (dX, dX): space form arc-length.
    ArcLength,
    /// q = -(dX, dX).
    NegArcLength,
    /// Explicit 1/m with m sampled on a uniform periodic grid over [0, T).
    Explicit(Vec<f64>),
}

impl Polarisation {
    fn m_at(&self, s: f64, period: f64) -> Option<f64> {
        match self {
            Polarisation::Explicit(m) => {
                let n = m.len();
                let h = period / n as f64;
                let u = (s / h).rem_euclid(n as f64);
                let k = u.floor() as usize % n;
                let frac = u - u.floor();
                Some(m[k] * (1.0 - frac) + m[(k + 1) % n] * frac)
            }
            _ => None,
        }
    }
}

/// The lift of a curve point: X with (X, q) = -1 and its s-derivative.
#[derive(Debug, Clone, Copy)]
pub struct LiftedSection {
    pub s: f64,
    pub x: [f64; 2],
    pub xp: [f64; 2],
    pub lift: Vec31,
    pub lift_deriv: Vec31,
}

/// A closed plane curve with a declared period, a space form vector, and a
/// polarisation. Immutable after construction; all evaluation is pure.
#[derive(Debug, Clone)]
pub struct PolarisedCurve {
    pub family: CurveFamily,
    pub period: f64,
    pub space_form: SpaceFormVector,
    pub polarisation: Polarisation,
}

impl PolarisedCurve {
    /// Validates closure, pointwise regularity and (for explicit
    /// polarisations) non-degeneracy of m on a 512-point grid.
    pub fn new(
        family: CurveFamily,
        period: f64,
        space_form: SpaceFormVector,
        polarisation: Polarisation,
    ) -> Result<Self> {
        if period <= 0.0 {
            return Err(Error::BadParameter("period must be positive".into()));
        }
        if let Polarisation::Explicit(m) = &polarisation {
            if m.is_empty() {
                return Err(Error::BadPolarisation("empty m grid".into()));
            }
            if m.iter().any(|v| !v.is_finite() || v.abs() < 1e-300 || v.abs() > 1e12) {
                return Err(Error::BadPolarisation(
                    "1/m must be bounded away from zero on the grid".into(),
                ));
            }
        }
        let curve = PolarisedCurve {
            family,
            period,
            space_form,
            polarisation,
        };

        let n = 512;
        let mut max_norm: f64 = 0.0;
        for k in 0..n {
            let s = period * k as f64 / n as f64;
            let sec = curve.evaluate(s)?;
            max_norm = max_norm.max(sec.x[0].hypot(sec.x[1]));
        }
        let x0 = curve.family.position(0.0, period);
        let xt = curve.family.position(period, period);
        let v0 = curve.family.velocity(0.0, period);
        let vt = curve.family.velocity(period, period);
        let pos_gap = (xt[0] - x0[0]).hypot(xt[1] - x0[1]);
        let vel_gap = (vt[0] - v0[0]).hypot(vt[1] - v0[1]);
        let tol = TOL_CLOSE * (1.0 + max_norm);
        if pos_gap > tol || vel_gap > tol * 10.0 {
            return Err(Error::NotClosed { pos_gap, vel_gap });
        }
        Ok(curve)
    }

    /// The space-form lift at s and its analytic derivative.
    pub fn evaluate(&self, s: f64) -> Result<LiftedSection> {
        let s_red = s.rem_euclid(self.period);
        let x = self.family.position(s_red, self.period);
        let xp = self.family.velocity(s_red, self.period);
        let xc = euclidean_lift(x);
        let xcp = euclidean_lift_deriv(x, xp);
        let r2 = x[0] * x[0] + x[1] * x[1];
        let rp = x[0] * xp[0] + x[1] * xp[1];

        let (lift, lift_deriv) = match self.space_form.kind {
            SpaceFormKind::Euclidean => (xc, xcp),
            SpaceFormKind::Curved => {
                let kappa = self.space_form.kappa;
                let denom = 1.0 + kappa * r2;
                if denom.abs() < 1e-10 * (1.0 + r2) {
                    return Err(Error::ChartSingularity);
                }
                let alpha = 2.0 / denom;
                let alpha_p = -alpha * alpha * kappa * rp;
                (xc.scale(alpha), xc.scale(alpha_p) + xcp.scale(alpha))
            }
            SpaceFormKind::HalfPlane => {
                if x[1].abs() < 1e-10 * (1.0 + x[0].abs()) {
                    return Err(Error::Boundary);
                }
                let alpha = 1.0 / x[1];
                let alpha_p = -xp[1] / (x[1] * x[1]);
                (xc.scale(alpha), xc.scale(alpha_p) + xcp.scale(alpha))
            }
        };

        let metric = lift_deriv.inner(&lift_deriv);
        if metric <= TOL_REGULAR {
            return Err(Error::NotRegular { s: s_red, metric });
        }
        Ok(LiftedSection {
            s: s_red,
            x,
            xp,
            lift,
            lift_deriv,
        })
    }

    /// The scalar q / ds^2 of the polarisation at s.
    pub fn q_value(&self, s: f64) -> Result<f64> {
        let sec = self.evaluate(s)?;
        Ok(match &self.polarisation {
            Polarisation::ArcLength => sec.lift_deriv.inner(&sec.lift_deriv),
            Polarisation::NegArcLength => -sec.lift_deriv.inner(&sec.lift_deriv),
            Polarisation::Explicit(_) => {
                1.0 / self.polarisation.m_at(s, self.period).unwrap()
            }
        })
    }

    /// The ds-coefficient of the connection form: rho(s) X ^ X' with rho = 1
    /// for arc-length, -1 for negative arc-length, and 1 / (m (X', X')) for
    /// explicit polarisations.
    pub fn eta(&self, s: f64) -> Result<SkewMap> {
        let sec = self.evaluate(s)?;
        let rho = match &self.polarisation {
            Polarisation::ArcLength => 1.0,
            Polarisation::NegArcLength => -1.0,
            Polarisation::Explicit(_) => {
                let m = self.polarisation.m_at(s, self.period).unwrap();
                1.0 / (m * sec.lift_deriv.inner(&sec.lift_deriv))
            }
        };
        Ok(SkewMap::wedge(&sec.lift, &sec.lift_deriv).scale(rho))
    }

    /// Lifted sections on a uniform grid of n points over [0, T).
    pub fn lifted_grid(&self, n: usize) -> Result<Vec<LiftedSection>> {
        (0..n)
            .map(|k| self.evaluate(self.period * k as f64 / n as f64))
            .collect()
    }

    /// The linear conserved quantity q + tX (arc-length) or q - tX (negative
    /// arc-length), sampled on a uniform grid of n points.
    pub fn linear_cq(&self, n: usize) -> Result<SectionPoly> {
        let sign = match self.polarisation {
            Polarisation::ArcLength => 1.0,
            Polarisation::NegArcLength => -1.0,
            Polarisation::Explicit(_) => return Err(Error::WrongPolarisation),
        };
        let sections = self.lifted_grid(n)?;
        let p0 = vec![self.space_form.q; n];
        let p1 = sections.iter().map(|sec| sec.lift.scale(sign)).collect();
        Ok(SectionPoly {
            period: self.period,
            coeffs: vec![p0, p1],
        })
    }

    /// Checks the three conserved-quantity conditions for p against this
    /// curve's connection form.
    pub fn verify_pcq(&self, p: &SectionPoly) -> Result<PcqReport> {
        let n = p.samples();
        let secs = self.lifted_grid(n)?;
        let etas: Vec<SkewMap> = (0..n)
            .map(|k| self.eta(self.period * k as f64 / n as f64))
            .collect::<Result<_>>()?;
        let lifts: Vec<Vec31> = secs.iter().map(|s| s.lift).collect();
        let derivs: Vec<Vec31> = secs.iter().map(|s| s.lift_deriv).collect();
        Ok(verify_pcq_sections(p, &etas, &lifts, &derivs, TOL_PCQ, true))
    }
}

/// A polynomial in t with vector-section coefficients sampled on a uniform
/// periodic grid: coeffs[n][k] = p_n(s_k), s_k = k T / samples.
#[derive(Debug, Clone)]
pub struct SectionPoly {
    pub period: f64,
    pub coeffs: Vec<Vec<Vec31>>,
}

impl SectionPoly {
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn samples(&self) -> usize {
        self.coeffs.first().map(|c| c.len()).unwrap_or(0)
    }

    pub fn s_at(&self, k: usize) -> f64 {
        self.period * k as f64 / self.samples() as f64
    }

    /// Horner evaluation of p^t at grid index k.
    pub fn eval(&self, k: usize, t: f64) -> Vec31 {
        let mut acc = Vec31::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.scale(t) + c[k];
        }
        acc
    }

    /// Drops trailing coefficients whose sections are negligibly small
    /// relative to the largest coefficient.
    pub fn truncate_trailing(&mut self, rel_tol: f64) {
        let scale = self
            .coeffs
            .iter()
            .flat_map(|c| c.iter())
            .map(|v| v.norm_eucl())
            .fold(0.0_f64, f64::max)
            .max(1e-300);
        while self.coeffs.len() > 1 {
            let last_max = self
                .coeffs
                .last()
                .unwrap()
                .iter()
                .map(|v| v.norm_eucl())
                .fold(0.0_f64, f64::max);
            if last_max <= rel_tol * scale {
                self.coeffs.pop();
            } else {
                break;
            }
        }
    }
}

/// Residual report of the three conserved-quantity conditions.
#[derive(Debug, Clone)]
pub struct PcqReport {
    /// max_s ||d p_0 / ds||
    pub p0_residual: f64,
    /// max_s ||d p_n / ds + eta p_{n-1}|| for n = 1..d
    pub parallel_residuals: Vec<f64>,
    /// max_s |(p_d, X)|
    pub leading_x: f64,
    /// max_s |(p_d, X')|
    pub leading_xp: f64,
    pub tol: f64,
    pub pass: bool,
}

impl PcqReport {
    pub fn max_residual(&self) -> f64 {
        let mut m = self.p0_residual.max(self.leading_x).max(self.leading_xp);
        for r in &self.parallel_residuals {
            m = m.max(*r);
        }
        m
    }
}

/// 6th-order central finite differences of vector sections on a uniform grid.
/// When `periodic` is false, the first and last three entries are copies of
/// their neighbours and must be excluded by the caller.
pub fn fd_derivative(values: &[Vec31], h: f64, periodic: bool) -> Vec<Vec31> {
    let n = values.len();
    let at = |i: i64| -> Vec31 {
        if periodic {
            values[i.rem_euclid(n as i64) as usize]
        } else {
            values[i.clamp(0, n as i64 - 1) as usize]
        }
    };
    (0..n as i64)
        .map(|i| {
            ((at(i + 1) - at(i - 1)).scale(45.0) - (at(i + 2) - at(i - 2)).scale(9.0)
                + (at(i + 3) - at(i - 3)))
            .scale(1.0 / (60.0 * h))
        })
        .collect()
}

/// Conserved-quantity condition check against explicitly supplied sections of
/// the connection form and the curve lift. Independent of how those sections
/// were produced, so it serves both base curves and Darboux transforms.
pub fn verify_pcq_sections(
    p: &SectionPoly,
    etas: &[SkewMap],
    lifts: &[Vec31],
    lift_derivs: &[Vec31],
    tol: f64,
    periodic: bool,
) -> PcqReport {
    let n = p.samples();
    let h = p.period / n as f64;
    let interior = if periodic { 0..n } else { 4..(n - 4) };

    let d0 = fd_derivative(&p.coeffs[0], h, periodic);
    let p0_residual = interior
        .clone()
        .map(|k| d0[k].norm_eucl())
        .fold(0.0_f64, f64::max);

    let mut parallel_residuals = Vec::new();
    for deg in 1..p.coeffs.len() {
        let dp = fd_derivative(&p.coeffs[deg], h, periodic);
        let r = interior
            .clone()
            .map(|k| (dp[k] + etas[k].apply(&p.coeffs[deg - 1][k])).norm_eucl())
            .fold(0.0_f64, f64::max);
        parallel_residuals.push(r);
    }

    let lead = p.coeffs.last().unwrap();
    let leading_x = interior
        .clone()
        .map(|k| lead[k].inner(&lifts[k]).abs())
        .fold(0.0_f64, f64::max);
    let leading_xp = interior
        .clone()
        .map(|k| lead[k].inner(&lift_derivs[k]).abs())
        .fold(0.0_f64, f64::max);

    let mut pass = p0_residual <= tol && leading_x <= tol && leading_xp <= tol;
    for r in &parallel_residuals {
        pass &= *r <= tol;
    }
    PcqReport {
        p0_residual,
        parallel_residuals,
        leading_x,
        leading_xp,
        tol,
        pass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minkowski::Mat4;

    fn circle() -> PolarisedCurve {
        PolarisedCurve::new(
            CurveFamily::Circle { radius: 1.0 },
            2.0 * std::f64::consts::PI,
            SpaceFormVector::euclidean(),
            Polarisation::ArcLength,
        )
        .unwrap()
    }

    fn figure1() -> PolarisedCurve {
        PolarisedCurve::new(
            CurveFamily::Figure1,
            std::f64::consts::PI,
            SpaceFormVector::curved(1.0),
            Polarisation::ArcLength,
        )
        .unwrap()
    }

    #[test]
    fn circle_lift_at_zero() {
        let sec = circle().evaluate(0.0).unwrap();
        assert!((sec.lift - Vec31::new(1.0, 1.0, 0.0, 0.0)).norm_eucl() < 1e-14);
        assert!((sec.lift_deriv.inner(&sec.lift_deriv) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn lift_normalisation_and_null_condition() {
        for curve in [circle(), figure1()] {
            for k in 0..64 {
                let s = curve.period * k as f64 / 64.0;
                let sec = curve.evaluate(s).unwrap();
                assert!((sec.lift.inner(&curve.space_form.q) + 1.0).abs() < 1e-12);
                assert!(sec.lift.inner(&sec.lift).abs() < 1e-12);
                assert!(sec.lift.inner(&sec.lift_deriv).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn figure1_starts_at_unit_point() {
        let sec = figure1().evaluate(0.0).unwrap();
        assert!((sec.x[0] - 1.0).abs() < 1e-15 && sec.x[1].abs() < 1e-15);
    }

    #[test]
    fn metric_checks() {
        // (X', X') = |x'|^2 Euclidean; 4 |x'|^2 / (1 + kappa |x|^2)^2 curved;
        // |x'|^2 / x2^2 half-plane
        let fig2 = PolarisedCurve::new(
            CurveFamily::Figure2,
            2.0 * std::f64::consts::PI,
            SpaceFormVector::euclidean(),
            Polarisation::ArcLength,
        )
        .unwrap();
        for k in 0..32 {
            let s = fig2.period * (k as f64 + 0.3) / 32.0;
            let sec = fig2.evaluate(s).unwrap();
            let speed2 = sec.xp[0] * sec.xp[0] + sec.xp[1] * sec.xp[1];
            assert!((sec.lift_deriv.inner(&sec.lift_deriv) - speed2).abs() < 1e-11);
        }
        let f1 = figure1();
        for k in 0..32 {
            let s = f1.period * (k as f64 + 0.3) / 32.0;
            let sec = f1.evaluate(s).unwrap();
            let r2 = sec.x[0] * sec.x[0] + sec.x[1] * sec.x[1];
            let speed2 = sec.xp[0] * sec.xp[0] + sec.xp[1] * sec.xp[1];
            let expect = 4.0 * speed2 / (1.0 + r2).powi(2);
            assert!((sec.lift_deriv.inner(&sec.lift_deriv) - expect).abs() < 1e-11);
        }
        // half-plane: a circle kept above the boundary
        let hp = PolarisedCurve::new(
            CurveFamily::Fourier {
                cos1: vec![0.0, 0.5],
                sin1: vec![],
                cos2: vec![2.0],
                sin2: vec![0.5],
            },
            2.0 * std::f64::consts::PI,
            SpaceFormVector::halfplane(),
            Polarisation::ArcLength,
        )
        .unwrap();
        for k in 0..32 {
            let s = hp.period * (k as f64 + 0.3) / 32.0;
            let sec = hp.evaluate(s).unwrap();
            let speed2 = sec.xp[0] * sec.xp[0] + sec.xp[1] * sec.xp[1];
            let expect = speed2 / (sec.x[1] * sec.x[1]);
            assert!((sec.lift_deriv.inner(&sec.lift_deriv) - expect).abs() < 1e-11);
        }
    }

    #[test]
    fn eta_is_nilpotent_of_order_three() {
        let curve = figure1();
        for k in 0..16 {
            let s = curve.period * (k as f64 + 0.7) / 16.0;
            let eta = curve.eta(s).unwrap();
            let n2 = eta.matrix().matmul(eta.matrix());
            let n3 = n2.matmul(eta.matrix());
            assert!(n3.frobenius() < 1e-10 * eta.matrix().frobenius().max(1.0));
            // rank 2: square is rank 1, nonzero
            assert!(n2.frobenius() > 1e-10);
        }
    }

    #[test]
    fn eta_section_independence() {
        // recompute eta from a rescaled section alpha(s) X(s) via the general
        // q (Y ^ Y') / (Y', Y') formula and compare
        let curve = figure1();
        for k in 0..16 {
            let s = curve.period * (k as f64 + 0.2) / 16.0;
            let sec = curve.evaluate(s).unwrap();
            let alpha = 2.0 + (1.3 * s).sin();
            let alpha_p = 1.3 * (1.3 * s).cos();
            let y = sec.lift.scale(alpha);
            let yp = sec.lift.scale(alpha_p) + sec.lift_deriv.scale(alpha);
            let qv = curve.q_value(s).unwrap();
            let eta2 = SkewMap::wedge(&y, &yp).scale(qv / yp.inner(&yp));
            let eta1 = curve.eta(s).unwrap();
            let diff = eta1.matrix().sub_mat(eta2.matrix()).frobenius();
            assert!(diff < 1e-10 * eta1.matrix().frobenius().max(1.0));
        }
    }

    #[test]
    fn neg_arc_length_flips_eta() {
        let pos = figure1();
        let neg = PolarisedCurve::new(
            CurveFamily::Figure1,
            std::f64::consts::PI,
            SpaceFormVector::curved(1.0),
            Polarisation::NegArcLength,
        )
        .unwrap();
        let s = 0.37;
        let a = pos.eta(s).unwrap();
        let b = neg.eta(s).unwrap();
        let sum = a.matrix().add_mat(b.matrix()).frobenius();
        assert!(sum < 1e-14 * a.matrix().frobenius());
    }

    #[test]
    fn arc_length_eta_cross_check() {
        // general formula q (X ^ X') / (X', X') against the simplified X ^ X'
        let curve = figure1();
        for k in 0..16 {
            let s = curve.period * (k as f64 + 0.4) / 16.0;
            let sec = curve.evaluate(s).unwrap();
            let qv = curve.q_value(s).unwrap();
            let general = SkewMap::wedge(&sec.lift, &sec.lift_deriv)
                .scale(qv / sec.lift_deriv.inner(&sec.lift_deriv));
            let simplified = curve.eta(s).unwrap();
            let diff = general.matrix().sub_mat(simplified.matrix()).frobenius();
            assert!(diff < 1e-12 * simplified.matrix().frobenius().max(1.0));
        }
    }

    #[test]
    fn linear_cq_properties() {
        let curve = figure1();
        let p = curve.linear_cq(2048).unwrap();
        assert_eq!(p.degree(), 1);
        // p0 is exactly the space form vector
        for k in (0..2048).step_by(117) {
            assert_eq!(p.coeffs[0][k], curve.space_form.q);
        }
        // (p^mu, p^mu) = -kappa - 2 mu at every sample
        let mu = 0.73;
        for k in (0..2048).step_by(63) {
            let v = p.eval(k, mu);
            assert!((v.inner(&v) + curve.space_form.kappa + 2.0 * mu).abs() < 1e-12);
        }
        let report = curve.verify_pcq(&p).unwrap();
        assert!(report.pass, "report: {report:?}");
        assert!(report.max_residual() < 1e-8);
    }

    #[test]
    fn corrupted_cq_fails() {
        let curve = figure1();
        let mut p = curve.linear_cq(1024).unwrap();
        for v in p.coeffs[1].iter_mut() {
            *v = v.scale(2.0);
        }
        let report = curve.verify_pcq(&p).unwrap();
        assert!(!report.pass);
        // residual of condition (2) is about ||X'||
        assert!(report.parallel_residuals[0] > 0.1);
    }

    #[test]
    fn explicit_polarisation_rejects_linear_cq() {
        let curve = PolarisedCurve::new(
            CurveFamily::Circle { radius: 1.0 },
            2.0 * std::f64::consts::PI,
            SpaceFormVector::euclidean(),
            Polarisation::Explicit(vec![2.0; 64]),
        )
        .unwrap();
        assert!(matches!(curve.linear_cq(64), Err(Error::WrongPolarisation)));
        // and q + tX fails condition (2) under the wrong polarisation
        let arc = circle();
        let p = arc.linear_cq(1024).unwrap();
        let report = curve.verify_pcq(&p).unwrap();
        assert!(!report.pass);
    }

    #[test]
    fn neg_arc_length_cq_passes() {
        let curve = PolarisedCurve::new(
            CurveFamily::Figure1,
            std::f64::consts::PI,
            SpaceFormVector::curved(1.0),
            Polarisation::NegArcLength,
        )
        .unwrap();
        let p = curve.linear_cq(2048).unwrap();
        let report = curve.verify_pcq(&p).unwrap();
        assert!(report.pass, "report: {report:?}");
    }

    #[test]
    fn sampled_curve_tracks_analytic() {
        let analytic = circle();
        let n = 256;
        let points: Vec<[f64; 2]> = (0..n)
            .map(|k| {
                analytic
                    .family
                    .position(analytic.period * k as f64 / n as f64, analytic.period)
            })
            .collect();
        let sampled = PolarisedCurve::new(
            CurveFamily::Samples { points },
            analytic.period,
            SpaceFormVector::euclidean(),
            Polarisation::ArcLength,
        )
        .unwrap();
        for k in 0..40 {
            let s = analytic.period * (k as f64 + 0.41) / 40.0;
            let a = analytic.evaluate(s).unwrap();
            let b = sampled.evaluate(s).unwrap();
            assert!((a.lift - b.lift).norm_eucl() < 1e-10);
            assert!((a.lift_deriv - b.lift_deriv).norm_eucl() < 1e-8);
        }
    }

    #[test]
    fn open_curve_is_rejected() {
        let open = PolarisedCurve::new(
            CurveFamily::Circle { radius: 1.0 },
            3.0, // not the circle period: the arc does not close
            SpaceFormVector::euclidean(),
            Polarisation::ArcLength,
        );
        assert!(matches!(open, Err(Error::NotClosed { .. })));
    }

    #[test]
    fn fd_derivative_order() {
        let n = 256;
        let period = 2.0 * std::f64::consts::PI;
        let h = period / n as f64;
        let vals: Vec<Vec31> = (0..n)
            .map(|k| {
                let s = h * k as f64;
                Vec31::new((2.0 * s).sin(), s.cos(), (3.0 * s).cos(), 0.0)
            })
            .collect();
        let d = fd_derivative(&vals, h, true);
        for k in 0..n {
            let s = h * k as f64;
            let exact = Vec31::new(
                2.0 * (2.0 * s).cos(),
                -s.sin(),
                -3.0 * (3.0 * s).sin(),
                0.0,
            );
            assert!((d[k] - exact).norm_eucl() < 1e-7);
        }
    }

    // silence unused import warning in non-test builds
    #[allow(dead_code)]
    fn _use(m: Mat4) -> f64 {
        m.trace()
    }
}
