//! Scalar frequency-domain windows: Meyer-type scaling function, corona
//! functions, shear bump, and cone functions.
//!
//! All windows are built from one fixed polynomial ramp so the partition
//! identities hold to machine precision.

use std::f64::consts::FRAC_PI_2;

/// Polynomial step nu: 0 on (-inf,0], 1 on [1,inf), with
/// nu(t) + nu(1-t) = 1 and three vanishing derivatives at both ends.
pub fn ramp(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        t * t * t * t * (35.0 - 84.0 * t + (70.0 - 20.0 * t) * t * t)
    }
}

/// 1-D Meyer-type scaling symbol: even, 1 on |u| <= 1/16, 0 outside |u| < 1/8.
pub fn meyer_scaling_ft(u: f64) -> f64 {
    let a = u.abs();
    if a <= 1.0 / 16.0 {
        1.0
    } else if a < 1.0 / 8.0 {
        (FRAC_PI_2 * ramp(16.0 * a - 1.0)).cos()
    } else {
        0.0
    }
}

/// 2-D tensor scaling symbol Phi^(xi) = phi^(xi_1) phi^(xi_2).
pub fn scaling2_ft(xi: [f64; 2]) -> f64 {
    meyer_scaling_ft(xi[0]) * meyer_scaling_ft(xi[1])
}

/// Shear bump v: v(0) = 1, supported in [-1, 1], with
/// v(u-1)^2 + v(u)^2 + v(u+1)^2 = 1 on [-1, 1].
pub fn bump(u: f64) -> f64 {
    let a = u.abs();
    if a >= 1.0 {
        0.0
    } else {
        (FRAC_PI_2 * ramp(a)).cos()
    }
}

/// Base corona window W(xi) = sqrt(Phi^2(xi/4) - Phi^2(xi)).
/// Supported in [-1/2, 1/2]^2 minus the open square (-1/16, 1/16)^2.
pub fn corona_base(xi: [f64; 2]) -> f64 {
    let lo = scaling2_ft([xi[0] / 4.0, xi[1] / 4.0]);
    let hi = scaling2_ft(xi);
    let r = lo * lo - hi * hi;
    // Monotonicity makes the radicand nonnegative; clamp fp cancellation.
    debug_assert!(r > -1e-14, "corona radicand {r} at {xi:?}");
    if r <= 0.0 {
        0.0
    } else {
        r.sqrt()
    }
}

/// Scale-j corona W_j(xi) = W(2^{-2j} xi), supported in the square
/// annulus K_j = [-2^{2j-1}, 2^{2j-1}]^2 \ (-2^{2j-4}, 2^{2j-4})^2.
pub fn corona(xi: [f64; 2], j: usize) -> f64 {
    let s = (-2.0 * j as f64).exp2();
    corona_base([xi[0] * s, xi[1] * s])
}

/// Cone windows: V_h(xi) = v(xi_2/xi_1), V_v(xi) = v(xi_1/xi_2);
/// 0 when the denominator coordinate vanishes.
pub fn cone_ft(xi: [f64; 2], horizontal: bool) -> f64 {
    let (den, num) = if horizontal {
        (xi[0], xi[1])
    } else {
        (xi[1], xi[0])
    };
    if den == 0.0 {
        0.0
    } else {
        bump(num / den)
    }
}
