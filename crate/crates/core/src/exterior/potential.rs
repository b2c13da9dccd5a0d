//! Single-layer space-time potential
//! `v(x, t) = int_0^inf tau^(-3/2) int_S k((x - y)/sqrt(tau)) f(y, t - tau) dsigma(y) dtau`.

use super::kernel::ProjectedHeatKernel;
use super::surface::{gauss_legendre, SurfaceForce};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialOptions {
    /// Log-spaced `tau` panels per decade.
    pub panels_per_decade: usize,
    /// Gauss-Legendre points per panel.
    pub order: usize,
    /// End of the first (linear) panel `[0, tau_first]`.
    pub tau_first: f64,
    /// Truncate once the tail bound drops below `tol` times the accumulated value.
    pub tol: f64,
    pub max_decades: usize,
}

impl Default for PotentialOptions {
    fn default() -> Self {
        Self { panels_per_decade: 4, order: 8, tau_first: 1e-2, tol: 1e-3, max_decades: 16 }
    }
}

impl PotentialOptions {
    /// Twice as many panels per decade.
    pub fn refined(&self) -> Self {
        Self { panels_per_decade: 2 * self.panels_per_decade, ..*self }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialOutput {
    pub values: Vec<[f64; 3]>,
    /// Largest `tau` at which the time integral was cut.
    pub tau_cut: f64,
}

fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Evaluates the potential at points `x` (all outside the sphere) and time `t`.
pub fn potential(
    kernel: &ProjectedHeatKernel,
    force: &SurfaceForce,
    x: &[[f64; 3]],
    t: f64,
    opts: &PotentialOptions,
) -> Result<PotentialOutput> {
    let r_obs = force.radius();
    for p in x {
        let r = norm(*p);
        if !(r > r_obs) {
            return Err(Error::InsideObstacle { radius: r, obstacle: r_obs });
        }
    }
    if opts.panels_per_decade == 0 || opts.order == 0 || !(opts.tau_first > 0.0) || !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument("potential quadrature options must be positive".into()));
    }
    let (gx, gw) = gauss_legendre(opts.order);
    let area: f64 = force.weights().iter().sum();
    // |k| <= |k|_F <= |k(0)|_F away from the tail
    let tail_const = 2.0 * kernel.frobenius(0.0) * force.sup() * area;
    let nodes = force.nodes();
    let weights = force.weights();
    let stationary = force.values_at(t)?;

    let mut values = vec![[0.0; 3]; x.len()];
    let mut tau_cut: f64 = 0.0;
    for (p, out) in x.iter().zip(values.iter_mut()) {
        let mut acc = [0.0; 3];
        let panel = |a: f64, b: f64, acc: &mut [f64; 3]| -> Result<()> {
            for (xi, wi) in gx.iter().zip(&gw) {
                let tau = 0.5 * (a + b) + 0.5 * (b - a) * xi;
                let wt = 0.5 * (b - a) * wi * tau.powf(-1.5);
                let sq = tau.sqrt();
                let owned;
                let f: &[[f64; 3]] = if force.is_stationary() {
                    &stationary
                } else {
                    owned = force.values_at(t - tau)?;
                    &owned
                };
                for ((y, w), fv) in nodes.iter().zip(weights).zip(f) {
                    let z = [(p[0] - y[0]) / sq, (p[1] - y[1]) / sq, (p[2] - y[2]) / sq];
                    let k = kernel.eval(z);
                    for i in 0..3 {
                        acc[i] += wt * w * (k[i][0] * fv[0] + k[i][1] * fv[1] + k[i][2] * fv[2]);
                    }
                }
            }
            Ok(())
        };
        panel(0.0, opts.tau_first, &mut acc)?;
        let ratio = 10f64.powf(1.0 / opts.panels_per_decade as f64);
        let mut a = opts.tau_first;
        'decades: for _ in 0..opts.max_decades {
            for _ in 0..opts.panels_per_decade {
                let b = a * ratio;
                panel(a, b, &mut acc)?;
                a = b;
            }
            if tail_const / a.sqrt() <= opts.tol * norm(acc) || tail_const == 0.0 {
                break 'decades;
            }
        }
        tau_cut = tau_cut.max(a);
        *out = acc;
    }
    Ok(PotentialOutput { values, tau_cut })
}

/// Fixed evaluation directions: the three axes and three diagonals.
pub fn shell_directions() -> Vec<[f64; 3]> {
    let s2 = 0.5f64.sqrt();
    let s3 = (1.0f64 / 3.0).sqrt();
    vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [s3, s3, s3], [s2, -s2, 0.0], [0.0, s2, -s2]]
}

/// Velocity on shells: `values[r]` concatenates the three components at each direction.
pub fn velocity_on_shells(
    kernel: &ProjectedHeatKernel,
    force: &SurfaceForce,
    radii: &[f64],
    t: f64,
    opts: &PotentialOptions,
) -> Result<(Vec<Vec<f64>>, f64)> {
    let dirs = shell_directions();
    let pts: Vec<[f64; 3]> =
        radii.iter().flat_map(|&r| dirs.iter().map(move |d| [r * d[0], r * d[1], r * d[2]])).collect();
    let out = potential(kernel, force, &pts, t, opts)?;
    let vals = out.values.chunks(dirs.len()).map(|c| c.iter().flatten().copied().collect()).collect();
    Ok((vals, out.tau_cut))
}

/// Vorticity `(w12, w13, w23)` on shells by centered differences with step `1e-3 r`;
/// `values[r]` concatenates the three components at each direction.
pub fn vorticity_on_shells(
    kernel: &ProjectedHeatKernel,
    force: &SurfaceForce,
    radii: &[f64],
    t: f64,
    opts: &PotentialOptions,
) -> Result<Vec<Vec<f64>>> {
    let dirs = shell_directions();
    let mut pts = Vec::new();
    for &r in radii {
        let d = 1e-3 * r;
        for u in &dirs {
            let x = [r * u[0], r * u[1], r * u[2]];
            for k in 0..3 {
                for s in [1.0, -1.0] {
                    let mut y = x;
                    y[k] += s * d;
                    pts.push(y);
                }
            }
        }
    }
    let v = potential(kernel, force, &pts, t, opts)?.values;
    let mut out = Vec::with_capacity(radii.len());
    for (ri, &r) in radii.iter().enumerate() {
        let d = 1e-3 * r;
        let mut row = Vec::with_capacity(3 * dirs.len());
        for di in 0..dirs.len() {
            let base = (ri * dirs.len() + di) * 6;
            // grad[k][j] = d_k v_j
            let grad = |k: usize, j: usize| (v[base + 2 * k][j] - v[base + 2 * k + 1][j]) / (2.0 * d);
            for (i, j) in [(0, 1), (0, 2), (1, 2)] {
                row.push(grad(i, j) - grad(j, i));
            }
        }
        out.push(row);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn kernel() -> ProjectedHeatKernel {
        ProjectedHeatKernel::standard().unwrap()
    }

    #[test]
    fn zero_traction_gives_zero() {
        let k = kernel();
        let f = SurfaceForce::constant(1.0, 6, [0.0; 3]).unwrap();
        let out = potential(&k, &f, &[[5.0, 0.0, 0.0]], 0.0, &PotentialOptions::default()).unwrap();
        assert_eq!(out.values[0], [0.0; 3]);
    }

    #[test]
    fn inside_obstacle_is_rejected() {
        let k = kernel();
        let f = SurfaceForce::constant(1.0, 6, [1.0, 0.0, 0.0]).unwrap();
        let err = potential(&k, &f, &[[0.5, 0.0, 0.0]], 0.0, &PotentialOptions::default()).unwrap_err();
        assert!(matches!(err, Error::InsideObstacle { .. }));
    }

    #[test]
    fn constant_traction_approaches_stokeslet() {
        // a uniform traction on the unit sphere has total force 4 pi e1; far away
        // the steady potential is the Stokeslet (F / 8 pi r)(I + x x^T / r^2)
        let k = kernel();
        let f = SurfaceForce::constant(1.0, 8, [1.0, 0.0, 0.0]).unwrap();
        for x in [[10.0, 0.0, 0.0], [0.0, 10.0, 0.0]] {
            let v = potential(&k, &f, &[x], 0.0, &PotentialOptions::default()).unwrap().values[0];
            let r = 10.0;
            let along = x[0] / r;
            let exact = 4.0 * PI / (8.0 * PI * r) * (1.0 + along * along);
            assert!((v[0] - exact).abs() < 0.03 * exact, "{} vs {exact}", v[0]);
        }
    }

    #[test]
    fn linear_and_time_equivariant() {
        let k = kernel();
        let f = SurfaceForce::from_fn(1.0, 6, (0..=40).map(|j| -4.0 + 0.1 * j as f64).collect(), |y, t| {
            [(t + y[0]).sin(), y[1] * t.cos(), 0.3]
        })
        .unwrap();
        let opts = PotentialOptions { max_decades: 6, ..Default::default() };
        let x = [[4.0, 1.0, 0.0], [0.0, -5.0, 2.0]];
        let a = potential(&k, &f, &x, -0.3, &opts).unwrap().values;
        let b = potential(&k, &f.scale(-2.5), &x, -0.3, &opts).unwrap().values;
        let c = potential(&k, &f.shifted(1.7), &x, 1.4, &opts).unwrap().values;
        for i in 0..2 {
            for j in 0..3 {
                assert!((b[i][j] + 2.5 * a[i][j]).abs() < 1e-12 * (1.0 + a[i][j].abs()));
                assert!((c[i][j] - a[i][j]).abs() < 1e-10 * (1.0 + a[i][j].abs()));
            }
        }
        assert!(potential(&k, &f, &x, 0.5, &opts).is_err());
    }
}
