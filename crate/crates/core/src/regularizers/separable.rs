//! Scalar pieces of the coordinate-separable penalties.

pub fn soft_threshold(z: f64, tau: f64) -> f64 {
    if z > tau {
        z - tau
    } else if z < -tau {
        z + tau
    } else {
        0.0
    }
}

pub fn scad_value(t: f64, lambda: f64, theta: f64) -> f64 {
    let a = t.abs();
    if a <= lambda {
        lambda * a
    } else if a <= theta * lambda {
        (-a * a + 2.0 * theta * lambda * a - lambda * lambda) / (2.0 * (theta - 1.0))
    } else {
        (theta + 1.0) * lambda * lambda / 2.0
    }
}

/// Derivative of the SCAD penalty at `t ≠ 0`.
pub fn scad_derivative(t: f64, lambda: f64, theta: f64) -> f64 {
    let a = t.abs();
    let d = if a <= lambda {
        lambda
    } else if a <= theta * lambda {
        (theta * lambda - a) / (theta - 1.0)
    } else {
        0.0
    };
    d.copysign(t)
}

pub fn mcp_value(t: f64, lambda: f64, theta: f64) -> f64 {
    let a = t.abs();
    if a <= theta * lambda {
        lambda * a - a * a / (2.0 * theta)
    } else {
        theta * lambda * lambda / 2.0
    }
}

/// Derivative of the MCP penalty at `t ≠ 0`.
pub fn mcp_derivative(t: f64, lambda: f64, theta: f64) -> f64 {
    let a = t.abs();
    let d = if a <= theta * lambda { lambda - a / theta } else { 0.0 };
    d.copysign(t)
}

/// Picks the candidate with the lowest objective; on ties the earlier
/// (smaller-magnitude) candidate is kept.
fn best_of(candidates: &[f64], obj: impl Fn(f64) -> f64) -> f64 {
    let mut best = candidates[0];
    let mut best_val = obj(best);
    for &c in &candidates[1..] {
        let v = obj(c);
        if v < best_val {
            best = c;
            best_val = v;
        }
    }
    best
}

/// Global minimizer of `step·scad(u) + ½(u − z)²`.
pub fn scad_prox(z: f64, lambda: f64, theta: f64, step: f64) -> f64 {
    let a = z.abs();
    let obj = |u: f64| step * scad_value(u, lambda, theta) + 0.5 * (u - a) * (u - a);
    let inner = (a - step * lambda).clamp(0.0, lambda);
    let outer = a.max(theta * lambda);
    let denom = theta - 1.0 - step;
    let u = if denom > 0.0 {
        let mid = ((a * (theta - 1.0) - step * theta * lambda) / denom).clamp(lambda, theta * lambda);
        best_of(&[inner, mid, outer], obj)
    } else {
        // Middle branch is concave or linear: its minimum sits at an endpoint.
        best_of(&[inner, lambda, theta * lambda, outer], obj)
    };
    u.copysign(z)
}

/// Global minimizer of `step·mcp(u) + ½(u − z)²`.
pub fn mcp_prox(z: f64, lambda: f64, theta: f64, step: f64) -> f64 {
    let a = z.abs();
    let obj = |u: f64| step * mcp_value(u, lambda, theta) + 0.5 * (u - a) * (u - a);
    let outer = a.max(theta * lambda);
    let u = if theta > step {
        let inner = ((a - step * lambda) / (1.0 - step / theta)).clamp(0.0, theta * lambda);
        best_of(&[inner, outer], obj)
    } else {
        best_of(&[0.0, theta * lambda, outer], obj)
    };
    u.copysign(z)
}

/// Distance from `-g` to the (limiting) subdifferential of `weight·|·|`-like
/// penalties at `x`, given the derivative away from zero and the half-width
/// of the subdifferential at zero.
pub fn coordinate_distance(x: f64, g: f64, derivative: impl Fn(f64) -> f64, half_width: f64) -> f64 {
    if x == 0.0 {
        (g.abs() - half_width).max(0.0)
    } else {
        (g + derivative(x)).abs()
    }
}
