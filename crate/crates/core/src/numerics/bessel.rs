//! Bessel functions of the first kind, integer order.
//!
//! Values come from Miller's downward recurrence normalized with the
//! Neumann sum `J_0(x) + 2 Σ_k J_2k(x) = 1`. Negative orders and arguments
//! use the reflection identities.

use crate::error::{Error, Result};

pub const MAX_ORDER: i32 = 200;
pub const MAX_ARG: f64 = 50.0;

const RESCALE_AT: f64 = 1e250;
const RESCALE_BY: f64 = 1e-250;

fn check_domain(n: i32, x: f64) -> Result<()> {
    if n.unsigned_abs() > MAX_ORDER as u32 {
        return Err(Error::Domain(format!("Bessel order {n} outside |n| <= {MAX_ORDER}")));
    }
    if !x.is_finite() || x.abs() > MAX_ARG {
        return Err(Error::Domain(format!("Bessel argument {x} outside |x| <= {MAX_ARG}")));
    }
    Ok(())
}

/// Even starting index for the downward sweep, far enough above both the
/// requested order and the turning point `k ≈ x`.
fn start_index(n_max: usize, x: f64) -> usize {
    let top = (n_max as f64).max(x);
    let m = (top + 30.0 + 2.0 * (40.0 * top).sqrt()).ceil() as usize;
    m + (m % 2)
}

/// `J_k(x)` for `k = 0..=n_max` and `x >= 0`.
fn orders_nonneg(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; n_max + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let m = start_index(n_max, x);
    let two_over_x = 2.0 / x;
    let mut next = 0.0; // j_{k+1}
    let mut cur = 1e-300; // j_k
    let mut norm = 0.0;
    for k in (1..=m).rev() {
        if k <= n_max {
            out[k] = cur;
        }
        if k % 2 == 0 {
            norm += 2.0 * cur;
        }
        let prev = k as f64 * two_over_x * cur - next;
        next = cur;
        cur = prev;
        if cur.abs() > RESCALE_AT {
            cur *= RESCALE_BY;
            next *= RESCALE_BY;
            norm *= RESCALE_BY;
            for v in out.iter_mut().skip(k) {
                *v *= RESCALE_BY;
            }
        }
    }
    out[0] = cur;
    norm += cur;
    for v in &mut out {
        *v /= norm;
    }
    out
}

#[inline]
fn sign_for(n: i32) -> f64 {
    if n.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `J_n(x)` for integer `n`, `|n| <= 200`, `|x| <= 50`.
pub fn bessel_j(n: i32, x: f64) -> Result<f64> {
    check_domain(n, x)?;
    let order = n.unsigned_abs() as usize;
    let value = orders_nonneg(order, x.abs())[order];
    // J_{-n}(x) = (-1)^n J_n(x) and J_n(-x) = (-1)^n J_n(x)
    let mut s = 1.0;
    if n < 0 {
        s *= sign_for(n);
    }
    if x < 0.0 {
        s *= sign_for(n);
    }
    Ok(s * value)
}

/// `J_n(x)` for every `n` in `-n_max..=n_max`, indexed by `n + n_max`.
pub fn bessel_j_symmetric(n_max: usize, x: f64) -> Result<Vec<f64>> {
    if n_max > MAX_ORDER as usize {
        return Err(Error::Domain(format!("Bessel order {n_max} outside |n| <= {MAX_ORDER}")));
    }
    check_domain(0, x)?;
    let pos = orders_nonneg(n_max, x.abs());
    let mut out = Vec::with_capacity(2 * n_max + 1);
    for n in -(n_max as i32)..=(n_max as i32) {
        let mut v = pos[n.unsigned_abs() as usize];
        if n < 0 {
            v *= sign_for(n);
        }
        if x < 0.0 {
            v *= sign_for(n);
        }
        out.push(v);
    }
    Ok(out)
}
