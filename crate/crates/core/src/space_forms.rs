//! Lifts of plane curves into the lightcone and the inverse space form
//! projections, for the Euclidean, constant-curvature and half-plane models,
//! together with the null splitting and its Gamma gauge operator.

use crate::error::{Error, Result};
use crate::minkowski::{Mat4, OrthoMatrix, Vec31};

/// Chart-singularity tolerance, relative to the Euclidean norm of the lift.
pub const TOL_CHART: f64 = 1e-10;

/// The Euclidean space form vector (1, 0, 0, -1)^t.
pub fn q_check() -> Vec31 {
    Vec31::new(1.0, 0.0, 0.0, -1.0)
}

/// The auxiliary lightlike vector o = (1, 0, 0, 1)^t / 2 with (o, q_check) = -1.
pub fn o_vec() -> Vec31 {
    Vec31::new(0.5, 0.0, 0.0, 0.5)
}

/// The half-plane space form vector (0, 0, -1, 0)^t.
pub fn q_tilde() -> Vec31 {
    Vec31::new(0.0, 0.0, -1.0, 0.0)
}

/// Which lift a space form vector normalises.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpaceFormKind {
    Euclidean,
    Curved,
    HalfPlane,
}

/// A fixed vector q whose affine slice of the lightcone is a space form of
/// curvature kappa = -(q, q).
#[derive(Debug, Clone, Copy)]
pub struct SpaceFormVector {
    pub q: Vec31,
    pub kappa: f64,
    pub kind: SpaceFormKind,
}

impl SpaceFormVector {
    pub fn euclidean() -> Self {
        SpaceFormVector {
            q: q_check(),
            kappa: 0.0,
            kind: SpaceFormKind::Euclidean,
        }
    }

    /// q_kappa = (q_check + 2 kappa o) / 2; kappa = 0 falls back to the
    /// Euclidean vector so that the (X, q) = -1 normalisation stays the one
    /// used by the worked examples.
    pub fn curved(kappa: f64) -> Self {
        if kappa == 0.0 {
            return Self::euclidean();
        }
        let q = (q_check() + o_vec().scale(2.0 * kappa)).scale(0.5);
        SpaceFormVector {
            q,
            kappa,
            kind: SpaceFormKind::Curved,
        }
    }

    pub fn halfplane() -> Self {
        SpaceFormVector {
            q: q_tilde(),
            kappa: -1.0,
            kind: SpaceFormKind::HalfPlane,
        }
    }
}

/// The Euclidean lift x -> x + o + |x|^2 q_check / 2.
pub fn euclidean_lift(x: [f64; 2]) -> Vec31 {
    let r2 = x[0] * x[0] + x[1] * x[1];
    Vec31::new(0.5 * (1.0 + r2), x[0], x[1], 0.5 * (1.0 - r2))
}

/// Derivative of the Euclidean lift along a curve with velocity xp.
pub fn euclidean_lift_deriv(x: [f64; 2], xp: [f64; 2]) -> Vec31 {
    let rp = x[0] * xp[0] + x[1] * xp[1];
    Vec31::new(rp, xp[0], xp[1], -rp)
}

/// The curvature-kappa lift alpha_kappa * euclidean_lift(x) with
/// alpha_kappa = 2 / (1 + kappa |x|^2).
pub fn kappa_lift(x: [f64; 2], kappa: f64) -> Result<Vec31> {
    let r2 = x[0] * x[0] + x[1] * x[1];
    let denom = 1.0 + kappa * r2;
    if denom.abs() < TOL_CHART * (1.0 + r2) {
        return Err(Error::ChartSingularity);
    }
    Ok(euclidean_lift(x).scale(2.0 / denom))
}

/// The half-plane lift euclidean_lift(x) / x2, defined for x2 != 0.
pub fn halfplane_lift(x: [f64; 2]) -> Result<Vec31> {
    if x[1].abs() < TOL_CHART * (1.0 + x[0].abs()) {
        return Err(Error::Boundary);
    }
    Ok(euclidean_lift(x).scale(1.0 / x[1]))
}

/// Inverts the lift: rescales X so that (X, q) = -1 and reads off the plane
/// coordinates. The affine chart map (X1, X2) / (X0 + X3) is scale-invariant,
/// so a single formula serves all three space forms.
pub fn project(x_vec: &Vec31, q: &SpaceFormVector) -> Result<[f64; 2]> {
    let n = x_vec.norm_eucl();
    let pairing = x_vec.inner(&q.q);
    if pairing.abs() < TOL_CHART * n.max(1.0) {
        return Err(Error::AtInfinity);
    }
    let denom = x_vec.0[0] + x_vec.0[3];
    if denom.abs() < TOL_CHART * n.max(1.0) {
        return Err(Error::AtInfinity);
    }
    Ok([x_vec.0[1] / denom, x_vec.0[2] / denom])
}

/// The splitting R^{3,1} = L + W + L_hat determined by two non-orthogonal
/// lightlike sections. Sections are stored as given: the gauge action is
/// scale-invariant in each null line separately.
#[derive(Debug, Clone, Copy)]
pub struct NullSplitting {
    pub x: Vec31,
    pub x_hat: Vec31,
    pub pairing: f64,
}

impl NullSplitting {
    pub fn new(x: Vec31, x_hat: Vec31, tol: f64) -> Result<Self> {
        let pairing = x.inner(&x_hat);
        if pairing.abs() < tol * (x.norm_eucl() * x_hat.norm_eucl()).max(1e-300) {
            return Err(Error::DegenerateSplitting { pairing });
        }
        Ok(NullSplitting { x, x_hat, pairing })
    }

    /// Components v = vL + vW + vLhat with vW perpendicular to both null lines.
    pub fn split(&self, v: &Vec31) -> (Vec31, Vec31, Vec31) {
        let v_l = self.x.scale(v.inner(&self.x_hat) / self.pairing);
        let v_lhat = self.x_hat.scale(v.inner(&self.x) / self.pairing);
        let v_w = *v - v_l - v_lhat;
        (v_l, v_w, v_lhat)
    }

    /// Gamma_L^{Lhat}(r): vL / r + vW + r vLhat.
    pub fn gamma(&self, r: f64, v: &Vec31) -> Result<Vec31> {
        if r == 0.0 {
            return Err(Error::InvalidR);
        }
        let (v_l, v_w, v_lhat) = self.split(v);
        Ok(v_l.scale(1.0 / r) + v_w + v_lhat.scale(r))
    }

    /// Gamma as an explicit orthogonal matrix, assembled columnwise.
    pub fn gamma_matrix(&self, r: f64) -> Result<OrthoMatrix> {
        if r == 0.0 {
            return Err(Error::InvalidR);
        }
        let mut m = [[0.0; 4]; 4];
        for j in 0..4 {
            let col = self.gamma(r, &Vec31::basis(j))?;
            for (i, row) in m.iter_mut().enumerate() {
                row[j] = col.0[i];
            }
        }
        Ok(OrthoMatrix::new(Mat4(m)))
    }
}
