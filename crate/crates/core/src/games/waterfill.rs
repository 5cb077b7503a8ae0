use crate::error::{domain, Result};
use crate::largesys::EigenLoading;

const BISECTION_ITERS: usize = 200;

/// Maximises `Σ_i log2(1 + η d_i γ P_i)` subject to `Σ_i P_i = budget`,
/// `P_i ≥ 0`: `P_i = [μ − 1/(η d_i γ)]⁺` with the water level `μ` set by
/// the budget.
///
/// The level is bracketed by the extreme inverse gains and bisected, then
/// recomputed in closed form over the resulting active set so the budget
/// is met to rounding.
pub fn waterfill(d: &[f64], gamma: f64, eta: f64, budget: f64) -> Result<EigenLoading> {
    if !(gamma > 0.0 && gamma.is_finite()) || !(eta > 0.0 && eta.is_finite()) {
        return Err(domain(format!(
            "water-filling needs gamma > 0 and eta > 0, got gamma = {gamma}, eta = {eta}"
        )));
    }
    if !(budget >= 0.0 && budget.is_finite()) {
        return Err(domain(format!(
            "water-filling budget must be nonnegative, got {budget}"
        )));
    }
    if d.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(domain("water-filling gains must be finite and nonnegative"));
    }
    if budget == 0.0 {
        return EigenLoading::new(vec![0.0; d.len()]);
    }
    if d.iter().all(|&x| x == 0.0) {
        return Err(domain(
            "water-filling with positive budget but no usable eigenmode",
        ));
    }

    // Inverse gains; unusable modes never receive power.
    let inv: Vec<f64> = d
        .iter()
        .map(|&x| {
            if x > 0.0 {
                1.0 / (eta * x * gamma)
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let filled = |mu: f64| inv.iter().map(|&v| (mu - v).max(0.0)).sum::<f64>();

    let floor = inv.iter().copied().fold(f64::INFINITY, f64::min);
    let ceiling = inv
        .iter()
        .copied()
        .filter(|v| v.is_finite())
        .fold(0.0, f64::max);
    let (mut lo, mut hi) = (floor, ceiling + budget);
    for _ in 0..BISECTION_ITERS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if filled(mid) < budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mu = 0.5 * (lo + hi);

    let active: Vec<usize> = (0..d.len()).filter(|&i| inv[i] < mu).collect();
    let level = if active.is_empty() {
        mu
    } else {
        (budget + active.iter().map(|&i| inv[i]).sum::<f64>()) / active.len() as f64
    };
    let powers = (0..d.len())
        .map(|i| {
            if active.contains(&i) {
                (level - inv[i]).max(0.0)
            } else {
                0.0
            }
        })
        .collect();
    EigenLoading::new(powers)
}
