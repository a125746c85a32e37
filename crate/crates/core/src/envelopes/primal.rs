//! Derivative-free minimization of small convex, possibly nonsmooth
//! functions: a coarse grid followed by exact line searches along a fixed
//! direction set.
//!
//! The objectives here are a smooth quadratic plus `√(quadratic in |z_i|)`.
//! The origin is the worst kink: descent can exist inside a narrow cone, so
//! there a dense sphere of directions is ranked by slope and the best ones
//! are refined on the sphere before the line searches.

use crate::scalar::Real;

const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Grid and descent settings.
#[derive(Clone, Copy, Debug)]
pub struct PrimalOptions {
    pub per_axis: usize,
    pub max_sweeps: usize,
}

impl Default for PrimalOptions {
    fn default() -> Self {
        Self { per_axis: 64, max_sweeps: 400 }
    }
}

/// Minimum of a convex `phi` on `[0, ∞)` along a ray, starting from a trial
/// step `h0`. Returns `(s, phi(s))`; `s = 0` if no descent.
fn line_min<T: Real>(phi: &impl Fn(T) -> T, f0: T, h0: T) -> (T, T) {
    let mut hi = h0;
    let mut prev = f0;
    // Expand until the function turns up; convexity brackets the minimum in [0, hi].
    for _ in 0..200 {
        let v = phi(hi);
        if !(v < prev) {
            break;
        }
        prev = v;
        hi = hi * T::lit(2.0);
    }
    let g = T::lit(GOLDEN);
    let (mut a, mut b) = (T::zero(), hi);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = phi(c);
    let mut fd = phi(d);
    for _ in 0..90 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = phi(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = phi(d);
        }
        if b - a <= T::eps() * hi {
            break;
        }
    }
    let (s, v) = if fc < fd { (c, fc) } else { (d, fd) };
    if v < f0 {
        (s, v)
    } else {
        (T::zero(), f0)
    }
}

fn unit<T: Real>(v: &[T]) -> Vec<T> {
    let n = v.iter().map(|x| *x * *x).sum::<T>().sqrt();
    v.iter().map(|x| *x / n).collect()
}

/// Unit directions on the circle / sphere used to escape the origin.
fn sphere_directions<T: Real>(d: usize) -> Vec<Vec<T>> {
    match d {
        1 => vec![vec![T::one()], vec![-T::one()]],
        2 => (0..128)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * k as f64 / 128.0;
                vec![T::lit(a.cos()), T::lit(a.sin())]
            })
            .collect(),
        _ => crate::densities::fibonacci_sphere::<T>(512).into_iter().map(|y| y.to_vec()).collect(),
    }
}

/// Sphere directions at the origin, sorted by one-sided slope, with the
/// steepest few polished by a shrinking pattern search on the sphere.
fn origin_descent_dirs<T: Real>(obj: &impl Fn(&[T]) -> T, z: &[T], f0: T, r: T, base: &[Vec<T>]) -> Vec<Vec<T>> {
    let d = z.len();
    let delta = T::lit(1e-7) * r.max(T::min_positive_value());
    let slope = |dir: &[T]| {
        let p: Vec<T> = z.iter().zip(dir).map(|(a, b)| *a + delta * *b).collect();
        (obj(&p) - f0) / delta
    };
    let mut ranked: Vec<(T, Vec<T>)> = base.iter().map(|v| (slope(v), v.clone())).collect();
    ranked.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut out = Vec::new();
    for (mut best, mut dir) in ranked.into_iter().take(4) {
        let mut step = T::lit(0.1);
        while step > T::lit(1e-9) {
            let mut moved = false;
            for k in 0..d {
                for sign in [T::one(), -T::one()] {
                    let mut cand = dir.clone();
                    cand[k] = cand[k] + sign * step;
                    let cand = unit(&cand);
                    let v = slope(&cand);
                    if v < best {
                        best = v;
                        dir = cand;
                        moved = true;
                    }
                }
            }
            if !moved {
                step = step * T::lit(0.5);
            }
        }
        out.push(dir);
    }
    out
}

/// `{−1, 0, 1}^d \ {0}`, normalized.
fn lattice_directions<T: Real>(d: usize) -> Vec<Vec<T>> {
    let mut out = Vec::new();
    let total = 3usize.pow(d as u32);
    for code in 0..total {
        let mut c = code;
        let mut v = Vec::with_capacity(d);
        for _ in 0..d {
            v.push(T::from_count(c % 3) - T::one());
            c /= 3;
        }
        if v.iter().any(|x| *x != T::zero()) {
            out.push(unit(&v));
        }
    }
    out
}

/// Minimizes `obj` over `z ∈ R^d` (`d ≤ 3`), searching the box `[−r, r]^d`
/// first. `extra_starts` are evaluated alongside the grid.
pub fn minimize_convex<T: Real>(
    obj: impl Fn(&[T]) -> T,
    d: usize,
    r: T,
    extra_starts: &[Vec<T>],
    opts: PrimalOptions,
) -> (Vec<T>, T) {
    let mut best_z = vec![T::zero(); d];
    let mut best = obj(&best_z);
    for s in extra_starts {
        let v = obj(s);
        if v < best {
            best = v;
            best_z = s.clone();
        }
    }
    if r > T::zero() {
        let m = opts.per_axis.max(2);
        let step = T::lit(2.0) * r / T::from_count(m - 1);
        let mut z = vec![T::zero(); d];
        let total = m.pow(d as u32);
        for code in 0..total {
            let mut c = code;
            for zi in z.iter_mut() {
                *zi = -r + step * T::from_count(c % m);
                c /= m;
            }
            let v = obj(&z);
            if v < best {
                best = v;
                best_z.copy_from_slice(&z);
            }
        }
    }

    let dirs = lattice_directions::<T>(d);
    let origin_dirs = sphere_directions::<T>(d);
    let scale = if r > T::zero() { r / T::lit(64.0) } else { T::one() };
    let mut z = best_z;
    let mut f = best;
    for _ in 0..opts.max_sweeps {
        let start = z.clone();
        let f_start = f;
        let norm = z.iter().map(|x| x.abs()).fold(T::zero(), |a, b| a.max(b));
        let at_origin = norm <= T::lit(1e-12) * r.max(T::min_positive_value());
        let mut set: Vec<Vec<T>> = dirs.clone();
        if at_origin {
            set.extend(origin_descent_dirs(&obj, &z, f, r, &origin_dirs));
            set.extend(origin_dirs.iter().cloned());
        }
        for dir in &set {
            let phi = |s: T| {
                let p: Vec<T> = z.iter().zip(dir).map(|(a, b)| *a + s * *b).collect();
                obj(&p)
            };
            let (s, v) = line_min(&phi, f, scale);
            if s > T::zero() {
                for (a, b) in z.iter_mut().zip(dir) {
                    *a = *a + s * *b;
                }
                f = v;
            }
        }
        // Pattern move along the net displacement of the sweep.
        let delta: Vec<T> = z.iter().zip(&start).map(|(a, b)| *a - *b).collect();
        let dn = delta.iter().map(|x| *x * *x).sum::<T>().sqrt();
        if dn > T::zero() {
            let dir = unit(&delta);
            let phi = |s: T| {
                let p: Vec<T> = z.iter().zip(&dir).map(|(a, b)| *a + s * *b).collect();
                obj(&p)
            };
            let (s, v) = line_min(&phi, f, dn);
            if s > T::zero() {
                for (a, b) in z.iter_mut().zip(&dir) {
                    *a = *a + s * *b;
                }
                f = v;
            }
        }
        if f_start - f <= T::eps() * (T::one() + f.abs()) {
            break;
        }
    }
    (z, f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_huber() {
        // inf_s' ½(3 − s')² + |s'| = 2.5, attained at s' = 2.
        let (z, v) = minimize_convex(|z: &[f64]| 0.5 * (3.0 - z[0]).powi(2) + z[0].abs(), 1, 12.0, &[], PrimalOptions::default());
        assert!((v - 2.5).abs() < 1e-12);
        assert!((z[0] - 2.0).abs() < 1e-6);
    }

    #[test]
    fn nonsmooth_2d_at_origin() {
        // Minimum exactly at the kink.
        let f = |z: &[f64]| 0.1 * ((z[0] - 0.2).powi(2) + (z[1] + 0.1).powi(2)) + (z[0].abs() + z[1].abs());
        let (_, v) = minimize_convex(f, 2, 1.0, &[], PrimalOptions::default());
        assert!((v - f(&[0.0, 0.0])).abs() < 1e-12);
    }

    #[test]
    fn smooth_3d_quadratic() {
        let f = |z: &[f64]| (z[0] - 1.0).powi(2) + 2.0 * (z[1] + z[0]).powi(2) + (z[2] - z[1] - 0.5).powi(2);
        let (z, v) = minimize_convex(f, 3, 4.0, &[], PrimalOptions::default());
        assert!(v < 1e-12, "{v} at {z:?}");
    }
}
