use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::rcpe::{unit_row_filter, RcpeConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Plant {
    LowOrder,
    Burgers,
}

impl std::str::FromStr for Plant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "low_order" | "low-order" => Ok(Plant::LowOrder),
            "burgers" => Ok(Plant::Burgers),
            other => Err(Error::Config(format!("unknown plant '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    Single,
    Permutations,
    FilterSigns,
}

/// Everything needed to reproduce one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub plant: Plant,
    pub mu_true: DVector<f64>,
    /// Truth initial state. For Burgers this is the grid.
    pub x0: DVector<f64>,
    /// Estimation-model initial state.
    pub xhat0: DVector<f64>,
    pub horizon: usize,
    pub rcpe: RcpeConfig,
    pub sweep: SweepMode,
    /// Divergence threshold on `|z_k|`.
    pub z_max: f64,
    /// Convergence threshold on the final `|mu_hat - mu|`.
    pub eps_conv: f64,
    pub burgers: BurgersSettings,
    pub out: Option<PathBuf>,
    /// Reserved; every experiment is currently deterministic.
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BurgersSettings {
    pub grid_points: usize,
    pub dt: f64,
    pub c_max: f64,
}

impl Default for BurgersSettings {
    fn default() -> Self {
        Self {
            grid_points: 100,
            dt: 1e-4,
            c_max: 0.25,
        }
    }
}

pub const DEFAULT_Z_MAX: f64 = 1e6;
pub const LOW_ORDER_HORIZON: usize = 200_000;
pub const LOW_ORDER_EPS_CONV: f64 = 1e-2;
pub const BURGERS_HORIZON: usize = 200_000;
pub const BURGERS_EPS_CONV: f64 = 5e-2;

impl ExperimentConfig {
    /// Rational plant: `mu = [0.5, 0.8, 1.0]`, `N_i = e_i`, `p = (2,1,3)`.
    pub fn low_order() -> Self {
        let rcpe = RcpeConfig::new(unit_row_filter(&[1, 2, 3], 3), 0.9999, 1e6, &[2, 1, 3])
            .expect("built-in configuration is valid");
        Self {
            plant: Plant::LowOrder,
            mu_true: DVector::from_vec(vec![0.5, 0.8, 1.0]),
            x0: DVector::from_vec(vec![10.0, 10.0]),
            xhat0: DVector::zeros(2),
            horizon: LOW_ORDER_HORIZON,
            rcpe,
            sweep: SweepMode::Single,
            z_max: DEFAULT_Z_MAX,
            eps_conv: LOW_ORDER_EPS_CONV,
            burgers: BurgersSettings::default(),
            out: None,
            seed: 0,
        }
    }

    /// Burgers plant: `mu = [1.4, 0.3]`, `mu_bar = [1, 0.01]`, `p = (2,1)`.
    pub fn burgers() -> Self {
        let rcpe = RcpeConfig::new(unit_row_filter(&[1, 2], 2), 0.9999, 1e6, &[2, 1])
            .and_then(|c| c.with_mu_bar(DVector::from_vec(vec![1.0, 0.01])))
            .expect("built-in configuration is valid");
        let settings = BurgersSettings::default();
        Self {
            plant: Plant::Burgers,
            mu_true: DVector::from_vec(vec![1.4, 0.3]),
            x0: DVector::zeros(settings.grid_points),
            xhat0: DVector::zeros(settings.grid_points),
            horizon: BURGERS_HORIZON,
            rcpe,
            sweep: SweepMode::Single,
            z_max: DEFAULT_Z_MAX,
            eps_conv: BURGERS_EPS_CONV,
            burgers: settings,
            out: None,
            seed: 0,
        }
    }

    pub fn for_plant(plant: Plant) -> Self {
        match plant {
            Plant::LowOrder => Self::low_order(),
            Plant::Burgers => Self::burgers(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.rcpe.validate()?;
        let l_mu = self.rcpe.l_mu();
        let (l_x, l_y, l_p) = match self.plant {
            Plant::LowOrder => (2, 1, 3),
            Plant::Burgers => (self.burgers.grid_points, 1, 2),
        };
        if self.mu_true.len() != l_p || l_mu != l_p {
            return Err(Error::Config(format!(
                "plant has {l_p} parameters; mu_true has {} and the filter {l_mu}",
                self.mu_true.len()
            )));
        }
        if self.rcpe.l_y() != l_y {
            return Err(Error::Config(format!(
                "plant has {l_y} outputs, filter has {}",
                self.rcpe.l_y()
            )));
        }
        if self.x0.len() != l_x || self.xhat0.len() != l_x {
            return Err(Error::Config(format!(
                "initial states must have length {l_x} (got {} and {})",
                self.x0.len(),
                self.xhat0.len()
            )));
        }
        if self.horizon <= self.rcpe.n_f() {
            return Err(Error::Config(format!(
                "horizon {} must exceed the number of filter taps {}",
                self.horizon,
                self.rcpe.n_f()
            )));
        }
        if !(self.z_max > 0.0) {
            return Err(Error::Config("z_max must be positive".into()));
        }
        if !(self.eps_conv > 0.0) {
            return Err(Error::Config("eps_conv must be positive".into()));
        }
        Ok(())
    }

    /// Loads a flat key-value TOML file on top of the plant defaults.
    pub fn from_toml_file(path: &Path, overrides: &[(String, String)]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_toml_str(&text, overrides)
    }

    /// Parses a flat key-value TOML document, then applies `key=value` overrides.
    pub fn from_toml_str(text: &str, overrides: &[(String, String)]) -> Result<Self> {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(format!("config parse error: {e}")))?;
        for (key, value) in overrides {
            table.insert(key.clone(), parse_override_value(value)?);
        }
        let file: ConfigFile = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(format!("config error: {e}")))?;
        file.into_config()
    }
}

fn parse_override_value(value: &str) -> Result<toml::Value> {
    let doc = format!("v = {value}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => Ok(t.remove("v").expect("key just inserted")),
        // Bare words such as `burgers` are taken as strings.
        Err(_) => Ok(toml::Value::String(value.to_string())),
    }
}

/// On-disk form: every field optional, falling back to the plant defaults.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    plant: Option<Plant>,
    mu_true: Option<Vec<f64>>,
    x0: Option<Vec<f64>>,
    xhat0: Option<Vec<f64>>,
    horizon: Option<usize>,
    lambda: Option<f64>,
    beta: Option<f64>,
    /// Full `R_theta`, row-major; overrides `beta`.
    r_theta: Option<Vec<Vec<f64>>>,
    /// Filter coefficients, each `N_i` flattened row-major.
    filter: Option<Vec<Vec<f64>>>,
    l_y: Option<usize>,
    permutation: Option<Vec<usize>>,
    mu_bar: Option<Vec<f64>>,
    scaling: Option<Vec<f64>>,
    saturation: Option<Vec<f64>>,
    sweep: Option<SweepMode>,
    z_max: Option<f64>,
    eps_conv: Option<f64>,
    grid_points: Option<usize>,
    dt: Option<f64>,
    c_max: Option<f64>,
    out: Option<PathBuf>,
    seed: Option<u64>,
}

impl ConfigFile {
    fn into_config(self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::for_plant(self.plant.unwrap_or(Plant::LowOrder));
        let mut rcpe = cfg.rcpe.clone();

        if let Some(v) = self.mu_true {
            cfg.mu_true = DVector::from_vec(v);
        }
        if let Some(n) = self.grid_points {
            cfg.burgers.grid_points = n;
            if cfg.plant == Plant::Burgers {
                cfg.x0 = DVector::zeros(n);
                cfg.xhat0 = DVector::zeros(n);
            }
        }
        if let Some(dt) = self.dt {
            cfg.burgers.dt = dt;
        }
        if let Some(c) = self.c_max {
            cfg.burgers.c_max = c;
        }
        if let Some(v) = self.x0 {
            cfg.x0 = DVector::from_vec(v);
        }
        if let Some(v) = self.xhat0 {
            cfg.xhat0 = DVector::from_vec(v);
        }
        if let Some(h) = self.horizon {
            cfg.horizon = h;
        }
        if let Some(filter) = self.filter {
            let l_y = self.l_y.unwrap_or(1);
            let mut taps = Vec::with_capacity(filter.len());
            for row in filter {
                if l_y == 0 || row.len() % l_y != 0 {
                    return Err(Error::Config(format!(
                        "filter coefficient of {} entries is not divisible into {l_y} rows",
                        row.len()
                    )));
                }
                taps.push(DMatrix::from_row_slice(l_y, row.len() / l_y, &row));
            }
            let l_mu = taps.first().map_or(0, |t| t.ncols());
            let l_theta = l_y * l_mu;
            rcpe.filter_coeffs = taps;
            if rcpe.mu_bar.len() != l_mu {
                rcpe.mu_bar = DVector::zeros(l_mu);
                rcpe.scaling = DVector::from_element(l_mu, 1.0);
            }
            if rcpe.r_theta.nrows() != l_theta {
                let beta = rcpe.r_theta[(0, 0)];
                rcpe.r_theta = DMatrix::identity(l_theta, l_theta) * beta;
            }
        }
        if let Some(l) = self.lambda {
            rcpe.lambda = l;
        }
        if let Some(beta) = self.beta {
            if !(beta > 0.0) {
                return Err(Error::Config(format!("beta must be positive, got {beta}")));
            }
            let l_theta = rcpe.l_theta();
            rcpe.r_theta = DMatrix::identity(l_theta, l_theta) * beta;
        }
        if let Some(rows) = self.r_theta {
            let n = rows.len();
            if rows.iter().any(|r| r.len() != n) {
                return Err(Error::Config("r_theta must be square".into()));
            }
            rcpe.r_theta = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        }
        if let Some(p) = self.permutation {
            rcpe.permutation = crate::rcpe::PermutationMatrix::new(&p)?;
        }
        if let Some(v) = self.mu_bar {
            rcpe.mu_bar = DVector::from_vec(v);
        }
        if let Some(v) = self.scaling {
            rcpe.scaling = DVector::from_vec(v);
        }
        if let Some(v) = self.saturation {
            rcpe.saturation = Some(DVector::from_vec(v));
        }
        rcpe.validate()?;
        cfg.rcpe = rcpe;

        if let Some(s) = self.sweep {
            cfg.sweep = s;
        }
        if let Some(z) = self.z_max {
            cfg.z_max = z;
        }
        if let Some(e) = self.eps_conv {
            cfg.eps_conv = e;
        }
        cfg.out = self.out;
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        ExperimentConfig::low_order().validate().unwrap();
        ExperimentConfig::burgers().validate().unwrap();
    }

    #[test]
    fn parses_flat_file_with_overrides() {
        let text = r#"
            plant = "burgers"
            horizon = 5000
            permutation = [1, 2]
            lambda = 0.999
        "#;
        let cfg =
            ExperimentConfig::from_toml_str(text, &[("beta".into(), "100.0".into())]).unwrap();
        assert_eq!(cfg.plant, Plant::Burgers);
        assert_eq!(cfg.horizon, 5000);
        assert_eq!(cfg.rcpe.permutation.indices(), &[1, 2]);
        assert_eq!(cfg.rcpe.lambda, 0.999);
        assert_eq!(cfg.rcpe.r_theta, DMatrix::identity(2, 2) * 100.0);
        assert_eq!(cfg.rcpe.mu_bar, DVector::from_vec(vec![1.0, 0.01]));
    }

    #[test]
    fn filter_and_sweep_fields() {
        let text = r#"
            filter = [[0, 1, 0], [0, 0, 1], [1, 0, 0]]
            permutation = [3, 2, 1]
            sweep = "filter_signs"
            saturation = [5, 5, 5]
        "#;
        let cfg =
            ExperimentConfig::from_toml_str(text, &[("plant".into(), "low_order".into())]).unwrap();
        assert_eq!(cfg.rcpe.filter_coeffs, unit_row_filter(&[2, 3, 1], 3));
        assert_eq!(cfg.sweep, SweepMode::FilterSigns);
        assert!(cfg.rcpe.saturation.is_some());
    }

    #[test]
    fn rejects_bad_config() {
        assert!(ExperimentConfig::from_toml_str("bogus = 1", &[]).is_err());
        assert!(ExperimentConfig::from_toml_str("lambda = 1.5", &[]).is_err());
        assert!(ExperimentConfig::from_toml_str("horizon = 2", &[]).is_err());
        assert!(ExperimentConfig::from_toml_str("z_max = -1.0", &[]).is_err());
        assert!(ExperimentConfig::from_toml_str("permutation = [1, 1, 2]", &[]).is_err());
        assert!(ExperimentConfig::from_toml_str("mu_true = [1.0]", &[]).is_err());
        assert!(ExperimentConfig::from_toml_str("plant = \"gitm\"", &[]).is_err());
    }
}
