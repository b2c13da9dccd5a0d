//! Pointwise residuals of the Stokes system on sampled space-time data.

use super::shear::ShearSolution;
use crate::error::{Error, Result};
use crate::spectral::{derivative, divergence, laplacian, Grid, ScalarField, VectorField};

/// Velocity slices at increasing times.
#[derive(Debug, Clone)]
pub struct SpaceTimeField {
    pub times: Vec<f64>,
    pub slices: Vec<VectorField>,
}

impl SpaceTimeField {
    pub fn new(times: Vec<f64>, slices: Vec<VectorField>) -> Result<Self> {
        if times.len() != slices.len() {
            return Err(Error::DimensionMismatch(format!("{} times for {} slices", times.len(), slices.len())));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("slice times must increase".into()));
        }
        if let Some(first) = slices.first() {
            if slices.iter().any(|s| s.grid() != first.grid()) {
                return Err(Error::DimensionMismatch("slices on different grids".into()));
            }
        }
        Ok(Self { times, slices })
    }

    pub fn from_shear(sol: &ShearSolution) -> Result<Self> {
        Self::new(sol.times.clone(), (0..sol.times.len()).map(|l| sol.velocity(l)).collect())
    }

    pub fn grid(&self) -> Option<&Grid> {
        self.slices.first().map(|s| s.grid())
    }
}

/// Pressure per time slice: sampled, or linear `p = sum_i c_i x_i` given by
/// its constant gradient `c` (which is not periodic and so cannot be sampled
/// on the lateral torus).
#[derive(Debug, Clone)]
pub enum Pressure {
    Field(Vec<ScalarField>),
    Linear(Vec<Vec<f64>>),
}

impl Pressure {
    pub fn zero(times: usize, dim: usize) -> Self {
        Pressure::Linear(vec![vec![0.0; dim]; times])
    }

    pub fn from_shear(sol: &ShearSolution) -> Result<Self> {
        let n = sol.grid.dim();
        sol.times
            .iter()
            .map(|&t| {
                let mut c = sol.pressure_coefficients(t)?;
                c.resize(n, 0.0);
                Ok(c)
            })
            .collect::<Result<Vec<_>>>()
            .map(Pressure::Linear)
    }

    fn gradient(&self, l: usize, grid: &Grid) -> Result<Vec<ScalarField>> {
        match self {
            Pressure::Field(p) => {
                let pl = p
                    .get(l)
                    .ok_or_else(|| Error::DimensionMismatch("pressure has fewer slices than velocity".into()))?;
                (0..grid.dim()).map(|a| derivative(pl, a)).collect()
            }
            Pressure::Linear(c) => {
                let cl = c
                    .get(l)
                    .ok_or_else(|| Error::DimensionMismatch("pressure has fewer slices than velocity".into()))?;
                Ok(cl.iter().map(|&v| ScalarField::constant(*grid, v)).collect())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StokesResidual {
    /// `max |d_t u - Lap u + grad p|` over interior time slices (and interior
    /// vertical planes on wall-bounded grids).
    pub momentum_max: f64,
    pub div_max: f64,
    /// `max |u(., 0, t)|` over all slices; zero on the periodic box.
    pub trace_max: f64,
}

pub fn stokes_residual(u: &SpaceTimeField, p: &Pressure) -> Result<StokesResidual> {
    let count = u.slices.len();
    if count < 3 {
        return Err(Error::InvalidArgument(format!("{count} time slices, need at least 3")));
    }
    let grid = *u.slices[0].grid();
    let n = grid.dim();
    let m = grid.column_len();
    let interior = |flat: usize| grid.is_periodic() || (flat % m != 0 && flat % m != m - 1);

    let mut momentum_max: f64 = 0.0;
    for l in 1..count - 1 {
        let span = u.times[l + 1] - u.times[l - 1];
        let grad_p = p.gradient(l, &grid)?;
        for i in 0..n {
            let dt = (u.slices[l + 1].component(i) - u.slices[l - 1].component(i)).scale(1.0 / span);
            let lap = laplacian(u.slices[l].component(i))?;
            let r = &(&dt - &lap) + &grad_p[i];
            for (flat, v) in r.values().iter().enumerate() {
                if interior(flat) {
                    momentum_max = momentum_max.max(v.abs());
                }
            }
        }
    }

    let mut div_max: f64 = 0.0;
    let mut trace_max: f64 = 0.0;
    for s in &u.slices {
        div_max = div_max.max(divergence(s)?.max_abs());
        if !grid.is_periodic() {
            for c in s.components() {
                for lat in 0..grid.lateral_count() {
                    trace_max = trace_max.max(c.values()[lat * m].abs());
                }
            }
        }
    }
    Ok(StokesResidual { momentum_max, div_max, trace_max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::{assemble_shear, TimeSignal};
    use std::f64::consts::PI;

    #[test]
    fn constant_field_has_no_residual() {
        let g = Grid::periodic_box(3, 8, 2.0 * PI).unwrap();
        let v = VectorField::from_fn(g, |_| vec![1.0, -2.0, 0.5]);
        let st = SpaceTimeField::new(vec![0.0, 0.1, 0.2], vec![v.clone(), v.clone(), v]).unwrap();
        let r = stokes_residual(&st, &Pressure::zero(3, 3)).unwrap();
        assert!(r.momentum_max < 1e-12 && r.div_max < 1e-12 && r.trace_max == 0.0);
    }

    #[test]
    fn needs_three_slices() {
        let g = Grid::periodic_box(2, 8, 1.0).unwrap();
        let st = SpaceTimeField::new(vec![0.0, 0.1], vec![VectorField::zeros(g); 2]).unwrap();
        assert!(stokes_residual(&st, &Pressure::zero(2, 2)).is_err());
    }

    #[test]
    fn channel_heat_mode() {
        let res = |m: usize, dt: f64| {
            let g = Grid::channel(3, 4, 2.0 * PI, m, PI).unwrap();
            let times = vec![0.0, dt, 2.0 * dt];
            let slices = times
                .iter()
                .map(|&t| VectorField::from_fn(g, move |x| vec![x[2].sin() * (-t).exp(), 0.0, 0.0]))
                .collect();
            let st = SpaceTimeField::new(times, slices).unwrap();
            stokes_residual(&st, &Pressure::zero(3, 3)).unwrap()
        };
        let a = res(33, 0.02);
        let b = res(65, 0.01);
        assert!(a.momentum_max < 1e-3);
        assert!(a.momentum_max / b.momentum_max > 3.5);
        assert!(a.div_max < 1e-12);
    }

    #[test]
    fn shear_solution_converges() {
        let run = |m: usize, dt: f64| {
            let grid = Grid::half_strip(2, 4, 2.0 * PI, m, 4.0).unwrap();
            let f = TimeSignal::bump(-2.0, -1.0, 1.0, -3.0, 0.0, dt).unwrap();
            let times: Vec<f64> = (0..5).map(|j| -1.2 + j as f64 * dt).collect();
            let sol = assemble_shear(&[f], &grid, &times).unwrap();
            let st = SpaceTimeField::from_shear(&sol).unwrap();
            stokes_residual(&st, &Pressure::from_shear(&sol).unwrap()).unwrap()
        };
        let a = run(33, 0.02);
        let b = run(65, 0.01);
        assert_eq!(a.trace_max, 0.0);
        assert!(a.div_max < 1e-12);
        let order = (a.momentum_max / b.momentum_max).log2();
        assert!(order > 1.8, "order {order}");
    }
}
