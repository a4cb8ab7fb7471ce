use nalgebra::SVector;

use super::ReconstructionConfig;
use crate::error::{Error, Result};
use crate::reference_elements::line_basis;

/// Search direction of the Newton iteration `r ← r - φ/(∇φ·N) N`.
#[derive(Clone, Copy, Debug)]
pub enum SearchDirection<const R: usize> {
    Fixed(SVector<f64, R>),
    /// `N = ∇φ^h` at the current iterate.
    LiveGradient,
}

/// Newton iteration along a direction. `field` returns `φ^h` and its gradient.
/// Fails on divergence (three consecutive residual increases), on a direction
/// tangent to the level set or after `max_iterations`.
pub fn newton_search<const R: usize>(
    field: impl Fn(&SVector<f64, R>) -> (f64, SVector<f64, R>),
    start: SVector<f64, R>,
    direction: SearchDirection<R>,
    cfg: &ReconstructionConfig,
) -> Result<SVector<f64, R>> {
    let mut r = start;
    let (mut phi, mut grad) = field(&r);
    let mut last = phi.abs();
    let mut increases = 0;
    for _ in 0..=cfg.max_iterations {
        if !phi.is_finite() {
            return Err(Error::RootSearchFailed(format!("non-finite level-set value at {:?}", r.as_slice())));
        }
        if phi.abs() <= cfg.newton_tol {
            return Ok(r);
        }
        let n = match direction {
            SearchDirection::Fixed(n) => n,
            SearchDirection::LiveGradient => grad,
        };
        let gn = grad.dot(&n);
        let scale = grad.norm() * n.norm();
        if scale == 0.0 || !scale.is_finite() || gn.abs() <= cfg.degenerate_tol * scale {
            return Err(Error::DegenerateGradient(format!(
                "search direction tangent to the level set at {:?}",
                r.as_slice()
            )));
        }
        r -= n * (phi / gn);
        (phi, grad) = field(&r);
        if phi.abs() > last {
            increases += 1;
            if increases >= 3 {
                return Err(Error::RootSearchFailed("Newton iteration diverges".into()));
            }
        } else {
            increases = 0;
        }
        last = phi.abs();
    }
    Err(Error::RootSearchFailed(format!(
        "no convergence in {} iterations, residual {:e}",
        cfg.max_iterations, last
    )))
}

/// Root of the 1D polynomial with equispaced nodal values `vals[k]` at
/// `t = k / p` on `[0, 1]`, bracketed by a sign change of the end values.
/// Newton from the linear-interpolation start, falling back to bisection
/// whenever a step leaves the bracket.
pub fn find_edge_root(vals: &[f64], cfg: &ReconstructionConfig) -> Result<f64> {
    let p = vals.len() - 1;
    let eval = |t: f64| {
        let (v, d) = line_basis(p, 2.0 * t - 1.0);
        let mut g = 0.0;
        let mut dg = 0.0;
        for k in 0..=p {
            g += v[k] * vals[k];
            dg += 2.0 * d[k] * vals[k];
        }
        (g, dg)
    };
    let (f0, f1) = (vals[0], vals[p]);
    if f0 == 0.0 {
        return Ok(0.0);
    }
    if f1 == 0.0 {
        return Ok(1.0);
    }
    if f0.signum() == f1.signum() {
        return Err(Error::RootSearchFailed("edge values do not bracket a root".into()));
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    let lo_negative = f0 < 0.0;
    let mut t = f0 / (f0 - f1);
    for _ in 0..200 {
        let (g, dg) = eval(t);
        if g == 0.0 {
            return Ok(t);
        }
        if (g < 0.0) == lo_negative {
            lo = t;
        } else {
            hi = t;
        }
        let step = t - g / dg;
        // a small residual next to a perturbed end value need not be the
        // bracketed crossing; accept it only if Newton agrees
        if g.abs() <= cfg.newton_tol && dg != 0.0 && (lo..=hi).contains(&step) {
            return Ok(t);
        }
        if hi - lo <= f64::EPSILON {
            break;
        }
        t = if dg != 0.0 && step > lo && step < hi {
            step
        } else {
            0.5 * (lo + hi)
        };
    }
    let (g, _) = eval(t);
    if g.abs() <= cfg.newton_tol {
        Ok(t)
    } else {
        Err(Error::RootSearchFailed(format!("edge root residual {g:e} above tolerance")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector2;

    #[test]
    fn linear_data_converges_in_one_step() {
        let cfg = ReconstructionConfig::default();
        let calls = std::cell::Cell::new(0);
        let f = |r: &Vector2<f64>| {
            calls.set(calls.get() + 1);
            (2.0 * r[0] + r[1] - 0.5, Vector2::new(2.0, 1.0))
        };
        let r = newton_search(f, Vector2::new(0.1, 0.1), SearchDirection::Fixed(Vector2::new(1.0, 1.0)), &cfg).unwrap();
        assert!((2.0 * r[0] + r[1] - 0.5).abs() < 1e-15);
        assert_eq!(calls.get(), 2);
    }

    #[test]
    fn tangent_direction_is_degenerate() {
        let cfg = ReconstructionConfig::default();
        let f = |r: &Vector2<f64>| (r[0] - 0.3, Vector2::new(1.0, 0.0));
        let err = newton_search(f, Vector2::new(0.0, 0.0), SearchDirection::Fixed(Vector2::new(0.0, 1.0)), &cfg).unwrap_err();
        assert!(err.triggers_refinement());
    }

    #[test]
    fn live_gradient_finds_circle() {
        let cfg = ReconstructionConfig::default();
        let f = |r: &Vector2<f64>| (r.norm_squared() - 0.25, 2.0 * r);
        let r = newton_search(f, Vector2::new(0.1, 0.3), SearchDirection::LiveGradient, &cfg).unwrap();
        assert!((r.norm() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn edge_root_of_cubic() {
        // nodal values of (t - 0.4)(t + 1)(t - 2) at t = k / 3
        let cfg = ReconstructionConfig::default();
        let g = |t: f64| (t - 0.4) * (t + 1.0) * (t - 2.0);
        let vals: Vec<f64> = (0..=3).map(|k| g(k as f64 / 3.0)).collect();
        let t = find_edge_root(&vals, &cfg).unwrap();
        assert!((t - 0.4).abs() < 1e-12);
    }

    #[test]
    fn edge_root_skips_plateau_at_perturbed_end() {
        // exact zero at t = 0 lifted to 1e-13, true crossing at t = 1/3
        let cfg = ReconstructionConfig::default();
        let g = |t: f64| t * (1.0 - 3.0 * t);
        let mut vals: Vec<f64> = (0..=2).map(|k| g(k as f64 / 2.0)).collect();
        vals[0] = 1e-13;
        let t = find_edge_root(&vals, &cfg).unwrap();
        assert!((t - 1.0 / 3.0).abs() < 1e-10, "{t}");
    }

    #[test]
    fn edge_root_steep_end() {
        // Newton from the linear start overshoots; the bracket keeps it inside
        let cfg = ReconstructionConfig::default();
        let g = |t: f64| t.powi(4) - 1e-3;
        let vals: Vec<f64> = (0..=4).map(|k| g(k as f64 / 4.0)).collect();
        let t = find_edge_root(&vals, &cfg).unwrap();
        assert!((t - 1e-3f64.powf(0.25)).abs() < 1e-10);
    }
}
