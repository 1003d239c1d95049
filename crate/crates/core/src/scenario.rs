//! Experiment scenarios, sensor placements and the key-value config format.
//!
//! A config file is a list of `key = value` lines. `#` and `;` start
//! comments, and `[section]` headers prefix the keys that follow, so
//! `[source]` then `x0 = 10` is the same as `source.x0 = 10`. Every key has
//! a default except the sensor layout, which must be given either as
//! `sensors.x_coords` + `sensors.y_coords` (comma-separated, grid product)
//! or as `sensors.file` (CSV rows `x,y,z`, optional header).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use crate::crb::{
    analog_information_matrix, data_information_matrix, localization_sigma, posterior_crb,
    prior_information, GaussianPrior,
};
use crate::error::{Error, Result};
use crate::mcmc::McmcConfig;
use crate::model::{MeasurementModel, PlumeEnvironment, SensorLocation, ThetaVector};
use crate::observation::{BinaryNetwork, NoiseModel, Threshold};

/// Lower-left and upper-right corners of the sensor field (m).
pub const FIELD_MIN: (f64, f64) = (30.0, -40.0);
pub const FIELD_MAX: (f64, f64) = (240.0, 50.0);

/// Rectangular grid of sensors, `x` outer and `y` inner.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacementSpec {
    pub x_coords: Vec<f64>,
    pub y_coords: Vec<f64>,
    pub z: f64,
}

impl PlacementSpec {
    pub fn new(x_coords: Vec<f64>, y_coords: Vec<f64>) -> Self {
        Self {
            x_coords,
            y_coords,
            z: 0.0,
        }
    }

    /// `nx x ny` evenly spaced grid spanning the field, edges included.
    pub fn uniform(nx: usize, ny: usize) -> Self {
        Self::new(
            linspace(FIELD_MIN.0, FIELD_MAX.0, nx),
            linspace(FIELD_MIN.1, FIELD_MAX.1, ny),
        )
    }

    /// The three nested layouts used for the Monte Carlo comparison.
    pub fn table1(placement: usize) -> Result<Self> {
        let x4 = vec![40.0, 100.0, 160.0, 220.0];
        let x7 = vec![40.0, 70.0, 100.0, 130.0, 160.0, 190.0, 220.0];
        let y4 = vec![-20.0, 0.0, 20.0, 40.0];
        let y7 = vec![-20.0, -10.0, 0.0, 10.0, 20.0, 30.0, 40.0];
        match placement {
            1 => Ok(Self::new(x4, y4)),
            2 => Ok(Self::new(x7, y4)),
            3 => Ok(Self::new(x7, y7)),
            other => Err(Error::invalid(
                "placement",
                format!("expected 1, 2 or 3, got {other}"),
            )),
        }
    }

    /// 27-sensor layout (9 x 3) over the field.
    pub fn sparse_field() -> Self {
        Self::uniform(9, 3)
    }

    /// 10,000-sensor layout (200 x 50) over the field.
    pub fn dense_field() -> Self {
        Self::uniform(200, 50)
    }

    pub fn len(&self) -> usize {
        self.x_coords.len() * self.y_coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Cartesian product of the spec's coordinates.
pub fn grid_placement(spec: &PlacementSpec) -> Result<Vec<SensorLocation>> {
    if spec.x_coords.is_empty() || spec.y_coords.is_empty() {
        return Err(Error::invalid(
            "sensors",
            "placement needs at least one x and one y coordinate",
        ));
    }
    spec.x_coords
        .iter()
        .flat_map(|&x| {
            spec.y_coords
                .iter()
                .map(move |&y| SensorLocation::new(x, y, spec.z))
        })
        .collect()
}

pub(crate) fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Log-spaced values with the endpoints reproduced exactly.
pub(crate) fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = linspace(a.ln(), b.ln(), n)
        .into_iter()
        .map(f64::exp)
        .collect();
    if n > 1 {
        v[0] = a;
        v[n - 1] = b;
    }
    v
}

/// Everything needed to compute a bound or run a simulation study.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub theta_true: ThetaVector,
    pub environment: PlumeEnvironment,
    pub noise: NoiseModel,
    pub tau: Threshold,
    pub sensors: Vec<SensorLocation>,
    pub prior: GaussianPrior,
}

impl Scenario {
    pub fn new(
        theta_true: ThetaVector,
        environment: PlumeEnvironment,
        noise: NoiseModel,
        tau: Threshold,
        sensors: Vec<SensorLocation>,
        prior: GaussianPrior,
    ) -> Result<Self> {
        if sensors.is_empty() {
            return Err(Error::invalid("sensors", "need at least one sensor"));
        }
        if theta_true.dim() != 2 || prior.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                actual: theta_true.dim().max(prior.dim()),
            });
        }
        environment.validate()?;
        Ok(Self {
            theta_true,
            environment,
            noise,
            tau,
            sensors,
            prior,
        })
    }

    /// Source at (10, 15) m, z0 = 5 m, Q0 = 5 g/s, U = 3.5 m/s,
    /// sigma_v = 0.5, sigma_w = 0.2 m/s, noise 1e-4 g/m^3, prior std 500 m,
    /// threshold 0.0018 g/m^3.
    pub fn reference(sensors: Vec<SensorLocation>) -> Result<Self> {
        let theta = ThetaVector::xy(10.0, 15.0)?;
        Self::new(
            theta.clone(),
            PlumeEnvironment::new(5.0, 5.0, 3.5, 0.5, 0.2)?,
            NoiseModel::new(1e-4)?,
            Threshold::new(0.0018)?,
            sensors,
            GaussianPrior::from_std(theta, &[500.0, 500.0])?,
        )
    }

    pub fn with_tau(&self, tau: f64) -> Result<Self> {
        Ok(Self {
            tau: Threshold::new(tau)?,
            ..self.clone()
        })
    }

    pub fn with_sensors(&self, sensors: Vec<SensorLocation>) -> Result<Self> {
        if sensors.is_empty() {
            return Err(Error::invalid("sensors", "need at least one sensor"));
        }
        Ok(Self {
            sensors,
            ..self.clone()
        })
    }

    pub fn model(&self) -> MeasurementModel {
        MeasurementModel::GaussianPlume(self.environment)
    }

    pub fn network(&self) -> BinaryNetwork<MeasurementModel> {
        BinaryNetwork {
            model: self.model(),
            sensors: self.sensors.clone(),
            noise: self.noise,
            tau: self.tau,
        }
    }

    /// Posterior CRB of the binary network at the true source.
    pub fn posterior_crb(&self) -> Result<DMatrix<f64>> {
        let jd = data_information_matrix(&self.network(), &self.theta_true)?;
        posterior_crb(&jd, &prior_information(&self.prior))
    }

    /// Same as [`posterior_crb`](Self::posterior_crb) with unquantized sensors.
    pub fn analog_crb(&self) -> Result<DMatrix<f64>> {
        let jd =
            analog_information_matrix(&self.model(), &self.sensors, &self.noise, &self.theta_true)?;
        posterior_crb(&jd, &prior_information(&self.prior))
    }

    pub fn sigma_crb(&self) -> Result<f64> {
        localization_sigma(&self.posterior_crb()?)
    }

    pub fn sigma_analog(&self) -> Result<f64> {
        localization_sigma(&self.analog_crb()?)
    }

    pub fn sigma_prior(&self) -> f64 {
        self.prior.variances().iter().sum::<f64>().sqrt()
    }
}

/// Parsed key-value config, before it is turned into a [`Scenario`].
#[derive(Debug, Clone, Default)]
pub struct ScenarioConfig {
    entries: BTreeMap<String, String>,
    base_dir: Option<PathBuf>,
}

const KNOWN_KEYS: &[&str] = &[
    "source.x0",
    "source.y0",
    "source.z0",
    "source.Q0",
    "env.U",
    "env.sigma_v",
    "env.sigma_w",
    "noise.sigma",
    "threshold.tau",
    "prior.std_x",
    "prior.std_y",
    "sensors.x_coords",
    "sensors.y_coords",
    "sensors.z",
    "sensors.file",
    "mcmc.n_s",
    "mcmc.n_m",
    "mcmc.n_total",
    "mcmc.init_budget",
];

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| {
                    Error::config(
                        format!("line {}", lineno + 1),
                        "unterminated section header",
                    )
                })?;
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::config(format!("line {}", lineno + 1), "expected `key = value`")
            })?;
            let key = key.trim();
            let key = if section.is_empty() {
                key.to_string()
            } else {
                format!("{section}.{key}")
            };
            cfg.set(&key, value.trim())?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
        let mut cfg = Self::parse(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(Error::config(key, "unknown key"));
        }
        let value = value.trim().trim_matches('"');
        self.entries.insert(key.to_string(), value.to_string());
        Ok(())
    }

    /// Apply a `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::config(assignment, "override must look like KEY=VALUE"))?;
        self.set(key.trim(), value)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    fn number(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => parse_number(key, v),
        }
    }

    fn count(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| {
                Error::config(key, format!("expected a non-negative integer, got `{v}`"))
            }),
        }
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        let Some(v) = self.get(key) else {
            return Ok(None);
        };
        let items = v
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| parse_number(key, s))
            .collect::<Result<Vec<_>>>()?;
        if items.is_empty() {
            return Err(Error::config(
                key,
                "list is empty; at least one sensor is required",
            ));
        }
        Ok(Some(items))
    }

    fn sensors(&self) -> Result<Vec<SensorLocation>> {
        if let Some(file) = self.get("sensors.file") {
            let path = match &self.base_dir {
                Some(dir) if Path::new(file).is_relative() => dir.join(file),
                _ => PathBuf::from(file),
            };
            return read_sensor_file(&path)
                .map_err(|e| Error::config("sensors.file", e.to_string()));
        }
        let xs = self.list("sensors.x_coords")?;
        let ys = self.list("sensors.y_coords")?;
        match (xs, ys) {
            (Some(x_coords), Some(y_coords)) => {
                let z = self.number("sensors.z", 0.0)?;
                grid_placement(&PlacementSpec {
                    x_coords,
                    y_coords,
                    z,
                })
            }
            (None, _) => Err(Error::config(
                "sensors.x_coords",
                "missing (or give sensors.file)",
            )),
            (_, None) => Err(Error::config(
                "sensors.y_coords",
                "missing (or give sensors.file)",
            )),
        }
    }

    pub fn scenario(&self) -> Result<Scenario> {
        let reference = Scenario::reference(vec![SensorLocation::ground(0.0, 0.0)])?;
        let x0 = self.number("source.x0", reference.theta_true[0])?;
        let y0 = self.number("source.y0", reference.theta_true[1])?;
        let env = PlumeEnvironment {
            z0: self.number("source.z0", reference.environment.z0)?,
            q0: self.number("source.Q0", reference.environment.q0)?,
            wind_speed: self.number("env.U", reference.environment.wind_speed)?,
            sigma_v: self.number("env.sigma_v", reference.environment.sigma_v)?,
            sigma_w: self.number("env.sigma_w", reference.environment.sigma_w)?,
        };
        env.validate().map_err(to_config)?;
        let noise = NoiseModel::new(self.number("noise.sigma", reference.noise.sigma())?)
            .map_err(to_config)?;
        let tau = Threshold::new(self.number("threshold.tau", reference.tau.value())?)
            .map_err(to_config)?;
        let std_x = self.number("prior.std_x", 500.0)?;
        let std_y = self.number("prior.std_y", 500.0)?;
        let theta = ThetaVector::xy(x0, y0).map_err(|e| Error::config("source", e.to_string()))?;
        let prior = GaussianPrior::from_std(theta.clone(), &[std_x, std_y])
            .map_err(|e| Error::config("prior.std_x/prior.std_y", e.to_string()))?;
        Scenario::new(theta, env, noise, tau, self.sensors()?, prior)
    }

    /// MCMC settings; keys absent from the config keep their defaults.
    pub fn mcmc(&self) -> Result<McmcConfig> {
        let d = McmcConfig::default();
        let n_keep = self.count("mcmc.n_m", d.n_keep)?;
        let cfg = McmcConfig {
            n_init: self.count("mcmc.n_s", d.n_init)?,
            n_keep,
            n_total: self.count("mcmc.n_total", 2 * n_keep)?,
            init_budget: self.count("mcmc.init_budget", d.init_budget)?,
            ..d
        };
        cfg.validate().map_err(to_config)?;
        Ok(cfg)
    }
}

fn to_config(e: Error) -> Error {
    match e {
        Error::InvalidParameter { name, reason } => Error::config(name, reason),
        other => other,
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find(['#', ';']) {
        Some(i) => &line[..i],
        None => line,
    }
}

fn parse_number(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v
        .trim()
        .parse()
        .map_err(|_| Error::config(key, format!("expected a number, got `{v}`")))?;
    if !x.is_finite() {
        return Err(Error::config(key, "must be finite"));
    }
    Ok(x)
}

/// Read `x,y,z` rows; a non-numeric first row is treated as a header.
pub fn read_sensor_file(path: &Path) -> Result<Vec<SensorLocation>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_path(path)?;
    let mut sensors = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let fields: Vec<&str> = record.iter().collect();
        let parsed: std::result::Result<Vec<f64>, _> =
            fields.iter().map(|f| f.parse::<f64>()).collect();
        let values = match parsed {
            Ok(v) => v,
            Err(_) if i == 0 => continue,
            Err(_) => {
                return Err(Error::config(
                    "sensors.file",
                    format!("row {}: non-numeric field", i + 1),
                ))
            }
        };
        let sensor = match values.as_slice() {
            [x, y] => SensorLocation::new(*x, *y, 0.0)?,
            [x, y, z] => SensorLocation::new(*x, *y, *z)?,
            _ => {
                return Err(Error::config(
                    "sensors.file",
                    format!("row {}: expected x,y[,z]", i + 1),
                ))
            }
        };
        sensors.push(sensor);
    }
    if sensors.is_empty() {
        return Err(Error::config("sensors.file", "no sensors listed"));
    }
    Ok(sensors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn placement_sizes() {
        assert_eq!(
            grid_placement(&PlacementSpec::table1(1).unwrap())
                .unwrap()
                .len(),
            16
        );
        assert_eq!(
            grid_placement(&PlacementSpec::table1(2).unwrap())
                .unwrap()
                .len(),
            28
        );
        assert_eq!(
            grid_placement(&PlacementSpec::table1(3).unwrap())
                .unwrap()
                .len(),
            49
        );
        assert_eq!(PlacementSpec::sparse_field().len(), 27);
        assert_eq!(PlacementSpec::dense_field().len(), 10_000);
        assert!(PlacementSpec::table1(4).is_err());
    }

    #[test]
    fn single_sensor_grid_and_ordering() {
        let one = grid_placement(&PlacementSpec::new(vec![3.0], vec![4.0])).unwrap();
        assert_eq!(one, vec![SensorLocation::ground(3.0, 4.0)]);
        let g = grid_placement(&PlacementSpec::new(vec![1.0, 2.0], vec![5.0, 6.0])).unwrap();
        let xy: Vec<_> = g.iter().map(|s| (s.x, s.y)).collect();
        assert_eq!(xy, vec![(1.0, 5.0), (1.0, 6.0), (2.0, 5.0), (2.0, 6.0)]);
        assert!(grid_placement(&PlacementSpec::new(vec![], vec![1.0])).is_err());
    }

    #[test]
    fn placements_are_nested() {
        let sets: Vec<Vec<SensorLocation>> = (1..=3)
            .map(|p| grid_placement(&PlacementSpec::table1(p).unwrap()).unwrap())
            .collect();
        for w in sets.windows(2) {
            assert!(w[0].iter().all(|s| w[1].contains(s)));
        }
    }

    #[test]
    fn uniform_grid_spans_field() {
        let p = PlacementSpec::uniform(9, 3);
        assert_eq!(p.x_coords.first(), Some(&30.0));
        assert_eq!(p.x_coords.last(), Some(&240.0));
        assert_eq!(p.y_coords, vec![-40.0, 5.0, 50.0]);
    }

    #[test]
    fn parse_flat_and_sectioned() {
        let flat = "source.x0 = 10\nsource.y0 = 15 # truth\nsensors.x_coords = 40, 100\nsensors.y_coords = 0,20\n";
        let sectioned =
            "[source]\nx0 = 10\ny0 = 15\n\n[sensors]\nx_coords = 40,100\ny_coords = 0, 20\n";
        let a = ScenarioConfig::parse(flat).unwrap().scenario().unwrap();
        let b = ScenarioConfig::parse(sectioned)
            .unwrap()
            .scenario()
            .unwrap();
        assert_eq!(a, b);
        assert_eq!(a.sensors.len(), 4);
        assert_eq!(a.tau.value(), 0.0018);
    }

    #[test]
    fn config_errors_name_the_key() {
        let err = ScenarioConfig::parse("env.wind = 3").unwrap_err();
        assert!(err.to_string().contains("env.wind"));
        let mut cfg = ScenarioConfig::parse("sensors.x_coords = 40\nsensors.y_coords = 0").unwrap();
        cfg.apply_override("noise.sigma=abc").unwrap();
        assert!(cfg
            .scenario()
            .unwrap_err()
            .to_string()
            .contains("noise.sigma"));
        cfg.apply_override("noise.sigma=-1").unwrap();
        assert!(cfg
            .scenario()
            .unwrap_err()
            .to_string()
            .contains("noise.sigma"));
        cfg.apply_override("noise.sigma=1e-4").unwrap();
        cfg.apply_override("sensors.x_coords=").unwrap();
        assert!(cfg
            .scenario()
            .unwrap_err()
            .to_string()
            .contains("sensors.x_coords"));
        let missing = ScenarioConfig::parse("source.x0 = 1").unwrap();
        assert!(missing
            .scenario()
            .unwrap_err()
            .to_string()
            .contains("sensors.x_coords"));
        assert!(ScenarioConfig::parse("just words").is_err());
        assert!(cfg.apply_override("no_equals").is_err());
    }

    #[test]
    fn sensor_file_relative_to_config() {
        let dir = tempfile::tempdir().unwrap();
        let mut f = std::fs::File::create(dir.path().join("s.csv")).unwrap();
        writeln!(f, "x,y,z\n40,0,0\n100,20,0\n160,-20,0").unwrap();
        let cfg_path = dir.path().join("scenario.cfg");
        std::fs::write(&cfg_path, "sensors.file = s.csv\n").unwrap();
        let s = ScenarioConfig::from_file(&cfg_path)
            .unwrap()
            .scenario()
            .unwrap();
        assert_eq!(s.sensors.len(), 3);
        assert_eq!(s.sensors[1], SensorLocation::ground(100.0, 20.0));
    }

    #[test]
    fn mcmc_keys() {
        let cfg = ScenarioConfig::parse("mcmc.n_m = 100\nmcmc.n_s = 3").unwrap();
        let m = cfg.mcmc().unwrap();
        assert_eq!((m.n_init, m.n_keep, m.n_total), (3, 100, 200));
        let bad = ScenarioConfig::parse("mcmc.n_s = 0").unwrap();
        assert!(bad.mcmc().unwrap_err().to_string().contains("mcmc.n_s"));
    }

    #[test]
    fn reference_prior_sigma() {
        let s = Scenario::reference(vec![SensorLocation::ground(40.0, 0.0)]).unwrap();
        assert!((s.sigma_prior() - 707.106_781_186_547_5).abs() < 1e-9);
    }
}
