//! Shared numerical routines: adaptive quadrature of complex integrands,
//! an embedded Runge-Kutta integrator driven to steady state, bracketed
//! root refinement, and golden-section extremum refinement.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// `n` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            (0..n).map(|i| lo + i as f64 * step).collect()
        }
    }
}

/// Adaptive Simpson quadrature of a complex integrand over [a, b].
///
/// Converges to the requested relative tolerance (with an absolute floor
/// derived from a coarse magnitude estimate, so integrals that cancel to
/// zero still terminate). Errors out if the recursion depth limit is hit
/// before the tolerance is met.
pub fn integrate_complex<F>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::invalid("integration bounds", "must be finite"));
    }
    if a == b {
        return Ok(Complex64::ZERO);
    }

    // Magnitude scale for the absolute floor of the tolerance.
    let samples = 9;
    let mut magnitude: f64 = 0.0;
    for i in 0..=samples {
        let x = a + (b - a) * i as f64 / samples as f64;
        magnitude = magnitude.max(f(x).norm());
    }
    let scale = (magnitude * (b - a).abs()).max(1e-300);

    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    let tol = rel_tol * whole.norm().max(scale * rel_tol.max(1e-3));

    const MAX_DEPTH: u32 = 60;
    adaptive(&f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

fn simpson(a: f64, b: f64, fa: Complex64, fm: Complex64, fb: Complex64) -> Complex64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: Complex64,
    fm: Complex64,
    fb: Complex64,
    whole: Complex64,
    tol: f64,
    depth: u32,
) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if delta.norm() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::Numerics(
            "quadrature did not reach the requested tolerance".into(),
        ));
    }
    let half_tol = 0.5 * tol;
    Ok(adaptive(f, a, m, fa, flm, fm, left, half_tol, depth - 1)?
        + adaptive(f, m, b, fm, frm, fb, right, half_tol, depth - 1)?)
}

/// Result of driving an autonomous complex ODE to its fixed point.
#[derive(Debug, Clone, Copy)]
pub struct SteadySolve {
    /// State at termination.
    pub value: Complex64,
    /// Integration time elapsed before the settle test passed.
    pub elapsed: f64,
    /// Largest accepted relative local error estimate.
    pub max_step_error: f64,
}

/// Integrate dy/dt = deriv(y) from y0 with an embedded Dormand-Prince 5(4)
/// pair until |deriv(y)| <= settle_tol * |y| + ABS_FLOOR, or `horizon`
/// elapses (which returns a NoSteadyState error carrying the best
/// estimate).
pub fn settle_complex<F>(
    deriv: F,
    y0: Complex64,
    settle_tol: f64,
    horizon: f64,
) -> Result<SteadySolve>
where
    F: Fn(Complex64) -> Complex64,
{
    const ABS_FLOOR: f64 = 1e-14;
    if !settle_tol.is_finite() || settle_tol <= 0.0 {
        return Err(Error::invalid("tolerance", "must be positive"));
    }
    if !horizon.is_finite() || horizon <= 0.0 {
        return Err(Error::invalid("horizon", "must be positive"));
    }
    // Per-step relative tolerance, well below the settle target so the
    // accumulated integration error cannot mask the settle test.
    let rtol = (settle_tol * 1e-2).clamp(1e-13, 1e-6);

    let settled = |y: Complex64, dy: Complex64| dy.norm() <= settle_tol * y.norm() + ABS_FLOOR;

    let mut y = y0;
    let mut t = 0.0;
    let mut dy = deriv(y);
    if settled(y, dy) {
        return Ok(SteadySolve {
            value: y,
            elapsed: 0.0,
            max_step_error: 0.0,
        });
    }

    // Time scale estimate from the local linearisation.
    let rate = (deriv(y + Complex64::ONE) - dy).norm().max(1e-12);
    let mut h = 0.1 / rate;
    let mut max_step_error: f64 = 0.0;

    // Dormand-Prince 5(4) coefficients.
    const A21: f64 = 1.0 / 5.0;
    const A31: f64 = 3.0 / 40.0;
    const A32: f64 = 9.0 / 40.0;
    const A41: f64 = 44.0 / 45.0;
    const A42: f64 = -56.0 / 15.0;
    const A43: f64 = 32.0 / 9.0;
    const A51: f64 = 19372.0 / 6561.0;
    const A52: f64 = -25360.0 / 2187.0;
    const A53: f64 = 64448.0 / 6561.0;
    const A54: f64 = -212.0 / 729.0;
    const A61: f64 = 9017.0 / 3168.0;
    const A62: f64 = -355.0 / 33.0;
    const A63: f64 = 46732.0 / 5247.0;
    const A64: f64 = 49.0 / 176.0;
    const A65: f64 = -5103.0 / 18656.0;
    const B1: f64 = 35.0 / 384.0;
    const B3: f64 = 500.0 / 1113.0;
    const B4: f64 = 125.0 / 192.0;
    const B5: f64 = -2187.0 / 6784.0;
    const B6: f64 = 11.0 / 84.0;
    const E1: f64 = 71.0 / 57600.0;
    const E3: f64 = -71.0 / 16695.0;
    const E4: f64 = 71.0 / 1920.0;
    const E5: f64 = -17253.0 / 339200.0;
    const E6: f64 = 22.0 / 525.0;
    const E7: f64 = -1.0 / 40.0;

    loop {
        if t >= horizon {
            return Err(Error::NoSteadyState { horizon, best: y });
        }
        h = h.min(horizon - t).max(1e-300);

        let k1 = dy;
        let k2 = deriv(y + h * (A21 * k1));
        let k3 = deriv(y + h * (A31 * k1 + A32 * k2));
        let k4 = deriv(y + h * (A41 * k1 + A42 * k2 + A43 * k3));
        let k5 = deriv(y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4));
        let k6 = deriv(y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5));
        let y_new = y + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
        let k7 = deriv(y_new);
        let err_vec = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
        let err = err_vec.norm();
        // Purely relative control keeps the accepted-step sequence, and
        // hence the whole trajectory, exactly covariant under scaling of
        // the drive.
        let sc = rtol * y.norm().max(y_new.norm()).max(1e-290);

        if err <= sc {
            t += h;
            y = y_new;
            dy = k7;
            max_step_error = max_step_error.max(err / (y.norm() + ABS_FLOOR));
            if settled(y, dy) {
                return Ok(SteadySolve {
                    value: y,
                    elapsed: t,
                    max_step_error,
                });
            }
        }

        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * (sc / err).powf(0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
        if !h.is_finite() || h <= 1e-12 * t.max(1.0) {
            return Err(Error::Numerics(
                "step size collapsed during time integration".into(),
            ));
        }
    }
}

/// Bisection on a bracketed sign change. `fa` must have the opposite sign
/// of `f(b)`. Returns the midpoint once the bracket shrinks below `xtol`.
pub fn bisect<F>(f: F, mut a: f64, mut b: f64, mut fa: f64, xtol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    debug_assert!(xtol > 0.0);
    if fa == 0.0 {
        return a;
    }
    while (b - a).abs() > xtol {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Golden-section search for the maximum of `f` on [a, b].
/// Returns (x_max, f_max) once the interval shrinks below `xtol`.
pub fn golden_max<F>(f: F, mut a: f64, mut b: f64, xtol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    debug_assert!(xtol > 0.0);

    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while (b - a).abs() > xtol {
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    if f1 > f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}
