//! Explicit finite-difference solver for the generalized viscous Burgers
//! equation `u_t + mu1 (u^2 / 2)_x = (mu2 u_x)_x` on `[0, 1]`.
//!
//! Forward Euler in time, second-order upwind for the convective flux and
//! second-order central differences for diffusion. `u_1 = u_2 = 0` on the
//! left and `u_N = sin(5t) + 0.25 sin(10t)` on the right.

use std::path::Path;

use nalgebra::DVector;

use super::SystemModel;
use crate::error::{check_dim, Error, Result};

/// 1-based grid index of the scalar measurement.
pub const BURGERS_MEASUREMENT_INDEX: usize = 87;

/// Grid values at time step `k` plus the fixed discretization settings.
#[derive(Debug, Clone, PartialEq)]
pub struct BurgersGrid {
    pub u: Vec<f64>,
    pub dt: f64,
    pub c_max: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub k: usize,
}

impl BurgersGrid {
    /// Zero initial condition on `n` points.
    pub fn new(n: usize, dt: f64, c_max: f64, mu1: f64, mu2: f64) -> Result<Self> {
        if n < 4 {
            return Err(Error::Config(format!(
                "Burgers grid needs at least 4 points, got {n}"
            )));
        }
        if !(dt > 0.0) || !(c_max > 0.0) {
            return Err(Error::Config("dt and c_max must be positive".into()));
        }
        if !(mu1 > 0.0) || !(mu2 > 0.0) {
            return Err(Error::Config(format!(
                "convective constant and viscosity must be positive, got ({mu1}, {mu2})"
            )));
        }
        Ok(Self {
            u: vec![0.0; n],
            dt,
            c_max,
            mu1,
            mu2,
            k: 0,
        })
    }

    pub fn n(&self) -> usize {
        self.u.len()
    }

    pub fn dx(&self) -> f64 {
        1.0 / (self.n() as f64 - 1.0)
    }

    pub fn time(&self) -> f64 {
        self.k as f64 * self.dt
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.u)
    }
}

/// Strict upper bound `c_max dx / u_max` on admissible time steps.
pub fn cfl_bound(dx: f64, u_max: f64, c_max: f64) -> f64 {
    if u_max == 0.0 {
        f64::INFINITY
    } else {
        c_max * dx / u_max.abs()
    }
}

/// Boundary values `(u_1, u_2, u_N)` at step `k`.
pub fn burgers_boundary(k: usize, dt: f64) -> (f64, f64, f64) {
    let t = dt * k as f64;
    (0.0, 0.0, (5.0 * t).sin() + 0.25 * (10.0 * t).sin())
}

/// Measurement `y_k = u_87`.
pub fn burgers_measure(grid: &BurgersGrid) -> Result<f64> {
    measure(&grid.u)
}

/// Advances the grid one time step, enforcing the CFL condition first.
pub fn burgers_step(grid: &BurgersGrid) -> Result<BurgersGrid> {
    let mut next = grid.clone();
    let (_, _, right) = burgers_boundary(grid.k + 1, grid.dt);
    advance(
        &grid.u,
        &mut next.u,
        grid.mu1,
        grid.mu2,
        grid.dt,
        grid.c_max,
        right,
        grid.k,
    )?;
    next.k += 1;
    Ok(next)
}

fn max_abs(u: &[f64]) -> f64 {
    u.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

fn measure(u: &[f64]) -> Result<f64> {
    if u.len() < BURGERS_MEASUREMENT_INDEX {
        return Err(Error::Config(format!(
            "measurement index {BURGERS_MEASUREMENT_INDEX} needs at least that many grid points, got {}",
            u.len()
        )));
    }
    Ok(u[BURGERS_MEASUREMENT_INDEX - 1])
}

#[allow(clippy::too_many_arguments)]
fn advance(
    u: &[f64],
    out: &mut [f64],
    mu1: f64,
    mu2: f64,
    dt: f64,
    c_max: f64,
    right: f64,
    step: usize,
) -> Result<()> {
    if !u.iter().all(|v| v.is_finite()) {
        return Err(Error::Divergence {
            step,
            reason: "non-finite Burgers grid value".into(),
        });
    }
    let n = u.len();
    let dx = 1.0 / (n as f64 - 1.0);
    let u_max = max_abs(u);
    let bound = cfl_bound(dx, u_max, c_max);
    if !(dt < bound) {
        return Err(Error::Stability { dt, bound, u_max });
    }
    let conv = mu1 * dt / (2.0 * dx);
    let diff = mu2 * dt / (dx * dx);
    // Interior points j = 3..N-1 (1-based) are 2..=n-2 here.
    for j in 2..n - 1 {
        let flux = 1.5 * u[j] * u[j] - 2.0 * u[j - 1] * u[j - 1] + 0.5 * u[j - 2] * u[j - 2];
        out[j] = u[j] - conv * flux + diff * (u[j + 1] - 2.0 * u[j] + u[j - 1]);
    }
    out[0] = 0.0;
    out[1] = 0.0;
    out[n - 1] = right;
    Ok(())
}

/// Burgers solver as a [`SystemModel`].
///
/// State is the grid, parameters are `[mu1, mu2]`, and the scalar input is
/// the right boundary value to impose after the step (see [`BurgersModel::inputs`]).
#[derive(Debug, Clone, PartialEq)]
pub struct BurgersModel {
    pub n: usize,
    pub dt: f64,
    pub c_max: f64,
}

impl BurgersModel {
    pub fn new(n: usize, dt: f64, c_max: f64) -> Result<Self> {
        if n < BURGERS_MEASUREMENT_INDEX {
            return Err(Error::Config(format!(
                "grid of {n} points cannot be measured at index {BURGERS_MEASUREMENT_INDEX}"
            )));
        }
        if !(dt > 0.0) || !(c_max > 0.0) {
            return Err(Error::Config("dt and c_max must be positive".into()));
        }
        Ok(Self { n, dt, c_max })
    }

    pub fn dx(&self) -> f64 {
        1.0 / (self.n as f64 - 1.0)
    }

    /// Zero initial grid with the `k = 0` boundary values.
    pub fn initial_state(&self) -> DVector<f64> {
        let mut x = DVector::zeros(self.n);
        x[self.n - 1] = burgers_boundary(0, self.dt).2;
        x
    }

    /// Input for step `k`: the right boundary value at `k + 1`.
    pub fn input(&self, k: usize) -> DVector<f64> {
        DVector::from_element(1, burgers_boundary(k + 1, self.dt).2)
    }

    pub fn inputs(&self, horizon: usize) -> Vec<DVector<f64>> {
        (0..horizon).map(|k| self.input(k)).collect()
    }
}

impl SystemModel for BurgersModel {
    fn state_dim(&self) -> usize {
        self.n
    }
    fn input_dim(&self) -> usize {
        1
    }
    fn output_dim(&self) -> usize {
        1
    }
    fn param_dim(&self) -> usize {
        2
    }

    fn step(&self, x: &DVector<f64>, u: &DVector<f64>, mu: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim("Burgers state", self.n, x.len())?;
        check_dim("Burgers input", 1, u.len())?;
        check_dim("Burgers parameter", 2, mu.len())?;
        let mut out = x.clone();
        advance(
            x.as_slice(),
            out.as_mut_slice(),
            mu[0],
            mu[1],
            self.dt,
            self.c_max,
            u[0],
            0,
        )?;
        Ok(out)
    }

    fn output(
        &self,
        x: &DVector<f64>,
        _u: &DVector<f64>,
        _mu: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        check_dim("Burgers state", self.n, x.len())?;
        Ok(DVector::from_element(1, measure(x.as_slice())?))
    }
}

/// Writes grid snapshots as CSV rows `k, t, u_1..u_N`.
pub fn write_snapshots_csv(path: &Path, grids: &[BurgersGrid]) -> Result<()> {
    let io_err = |e: csv::Error| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_path(path).map_err(io_err)?;
    let n = grids.first().map_or(0, |g| g.n());
    let mut header = vec!["k".to_string(), "t".to_string()];
    header.extend((1..=n).map(|j| format!("u_{j}")));
    w.write_record(&header).map_err(io_err)?;
    for g in grids {
        let mut row = vec![g.k.to_string(), format!("{:.16e}", g.time())];
        row.extend(g.u.iter().map(|v| format!("{v:.16e}")));
        w.write_record(&row).map_err(io_err)?;
    }
    w.flush().map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}
