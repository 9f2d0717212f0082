//! Experiment configuration. Every key is optional; omitted keys take the
//! defaults below.

use fracavg_core::{build_basis, Domain, Mode, RandomDiffusivity, SensorSet, SpectralField, TimeGrid};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub alpha: f64,
    pub t_final: f64,
    pub steps: usize,
    pub modes: usize,
    pub seed: u64,
    pub domain: DomainSpec,
    pub sensor: SensorSpec,
    pub law: LawSpec,
    pub y0: FieldSpec,
    pub control: ControlSpec,
    pub ml_eval: MlEvalSpec,
    pub fcf_scan: FcfScanSpec,
    pub class_check: ClassCheckSpec,
    pub forward: ForwardSpec,
    pub biharmonic: BiharmonicSpec,
    pub spectral: SpectralSpec,
    pub exactness: ExactnessSpec,
    pub zero_scan: ZeroScanSpec,
    pub hum: HumSpec,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            alpha: 0.5,
            t_final: 1.0,
            steps: 1024,
            modes: 8,
            seed: 42,
            domain: DomainSpec::default(),
            sensor: SensorSpec::default(),
            law: LawSpec::default(),
            y0: FieldSpec::default(),
            control: ControlSpec::default(),
            ml_eval: MlEvalSpec::default(),
            fcf_scan: FcfScanSpec::default(),
            class_check: ClassCheckSpec::default(),
            forward: ForwardSpec::default(),
            biharmonic: BiharmonicSpec::default(),
            spectral: SpectralSpec::default(),
            exactness: ExactnessSpec::default(),
            zero_scan: ZeroScanSpec::default(),
            hum: HumSpec::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct DomainSpec {
    /// "interval" or "rectangle".
    pub kind: String,
    pub lengths: Vec<f64>,
}

impl Default for DomainSpec {
    fn default() -> Self {
        DomainSpec {
            kind: "interval".into(),
            lengths: vec![1.0],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SensorSpec {
    /// Interval sensors as [a, b] pairs.
    pub intervals: Vec<[f64; 2]>,
    /// Rectangle sensors as [[x0, x1], [y0, y1]].
    pub rectangles: Vec<[[f64; 2]; 2]>,
    /// Observe the whole domain.
    pub full: bool,
}

impl Default for SensorSpec {
    fn default() -> Self {
        SensorSpec {
            intervals: vec![[0.2, 0.5]],
            rectangles: Vec::new(),
            full: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct LawSpec {
    /// "rademacher", "point_mass", "uniform", "normal" or "atoms".
    pub kind: String,
    pub value: f64,
    pub a: f64,
    pub b: f64,
    pub mean: f64,
    pub sd: f64,
    /// [location, weight] pairs.
    pub atoms: Vec<[f64; 2]>,
}

impl Default for LawSpec {
    fn default() -> Self {
        LawSpec {
            kind: "rademacher".into(),
            value: 1.0,
            a: -1.0,
            b: 1.0,
            mean: 0.0,
            sd: 1.0,
            atoms: Vec::new(),
        }
    }
}

/// Mode coefficients; missing entries are zero. Empty means e₀.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields, default)]
pub struct FieldSpec {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

/// Control constant in time; one value per mode, missing entries are zero.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ControlSpec {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct MlEvalSpec {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    /// Also evaluate β = α for every α.
    pub beta_alpha: bool,
    /// Explicit s values; when empty, `points` log-spaced |s| in
    /// [s_min, s_max] split evenly between both signs.
    pub s: Vec<f64>,
    pub s_min: f64,
    pub s_max: f64,
    pub points: usize,
}

impl Default for MlEvalSpec {
    fn default() -> Self {
        MlEvalSpec {
            alphas: (1..=9).map(|k| k as f64 / 10.0).collect(),
            betas: vec![1.0],
            beta_alpha: true,
            s: Vec::new(),
            s_min: 1e-2,
            s_max: 1e4,
            points: 200,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct FcfScanSpec {
    /// Defaults to `alpha` when absent.
    pub beta: Option<f64>,
    pub s_min: f64,
    pub s_max: f64,
    pub points: usize,
}

impl Default for FcfScanSpec {
    fn default() -> Self {
        FcfScanSpec {
            beta: None,
            s_min: -50.0,
            s_max: 50.0,
            points: 201,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ClassCheckSpec {
    pub delta: f64,
    pub theta: f64,
    /// Defaults to 1/α.
    pub r: Option<f64>,
    /// Defaults to the first eigenvalue of the domain.
    pub lambda_star: Option<f64>,
    /// Defaults to 100·λ*.
    pub lambda_max: Option<f64>,
    pub n_lambda: usize,
    pub n_time: usize,
}

impl Default for ClassCheckSpec {
    fn default() -> Self {
        ClassCheckSpec {
            delta: 0.1,
            theta: 1.0,
            r: None,
            lambda_star: None,
            lambda_max: None,
            n_lambda: 12,
            n_time: 16,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ForwardSpec {
    pub xi: f64,
}

impl Default for ForwardSpec {
    fn default() -> Self {
        ForwardSpec { xi: 1.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct BiharmonicSpec {
    pub alphas: Vec<f64>,
    pub points: usize,
}

impl Default for BiharmonicSpec {
    fn default() -> Self {
        BiharmonicSpec {
            alphas: vec![0.25, 0.4],
            points: 10,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SpectralSpec {
    /// Mode counts at which C(λ) is evaluated; empty means 1..=modes.
    pub cuts: Vec<usize>,
    pub restarts: usize,
    pub quad_points: usize,
}

impl Default for SpectralSpec {
    fn default() -> Self {
        SpectralSpec {
            cuts: Vec::new(),
            restarts: 50,
            quad_points: 8,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ExactnessSpec {
    pub force: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ZeroScanSpec {
    pub xi_min: f64,
    pub xi_max: f64,
    pub resolution: usize,
    pub tol_rel: f64,
}

impl Default for ZeroScanSpec {
    fn default() -> Self {
        ZeroScanSpec {
            xi_min: -10.0,
            xi_max: 10.0,
            resolution: 1000,
            tol_rel: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct HumSpec {
    pub regularization: f64,
    pub condition_cap: f64,
    pub force: bool,
    pub linf_density: usize,
}

impl Default for HumSpec {
    fn default() -> Self {
        let d = fracavg_core::ControlOptions::default();
        HumSpec {
            regularization: d.regularization,
            condition_cap: d.condition_cap,
            force: d.force,
            linf_density: d.linf_density,
        }
    }
}

fn invalid(field: &str, reason: impl Into<String>) -> CliError {
    CliError::Validation(format!("`{field}`: {}", reason.into()))
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Validation(format!("config: {}", e.message())))
    }

    pub fn domain(&self) -> Result<Domain, CliError> {
        let l = &self.domain.lengths;
        let d = match (self.domain.kind.as_str(), l.len()) {
            ("interval", 1) => Domain::interval(l[0])?,
            ("rectangle", 2) => Domain::rectangle(l[0], l[1])?,
            ("interval", _) | ("rectangle", _) => {
                return Err(invalid(
                    "domain.lengths",
                    format!("{} lengths for a {}", l.len(), self.domain.kind),
                ))
            }
            (k, _) => return Err(invalid("domain.kind", format!("unknown domain `{k}`"))),
        };
        Ok(d)
    }

    pub fn basis(&self, domain: &Domain) -> Result<Vec<Mode>, CliError> {
        if self.modes == 0 {
            return Err(invalid("modes", "must be positive"));
        }
        Ok(build_basis(domain, self.modes)?)
    }

    pub fn sensor(&self, domain: &Domain) -> Result<SensorSet, CliError> {
        let s = &self.sensor;
        if s.full {
            return Ok(SensorSet::full(domain));
        }
        let set = if domain.dimension() == 1 {
            if !s.rectangles.is_empty() {
                return Err(invalid("sensor.rectangles", "not allowed on an interval"));
            }
            let spans: Vec<(f64, f64)> = s.intervals.iter().map(|p| (p[0], p[1])).collect();
            SensorSet::intervals(domain, &spans)?
        } else {
            if !s.intervals.is_empty() && s.rectangles.is_empty() {
                return Err(invalid("sensor.intervals", "a rectangle needs sensor.rectangles"));
            }
            let rects: Vec<((f64, f64), (f64, f64))> = s
                .rectangles
                .iter()
                .map(|r| ((r[0][0], r[0][1]), (r[1][0], r[1][1])))
                .collect();
            SensorSet::rectangles(domain, &rects)?
        };
        Ok(set)
    }

    pub fn law(&self) -> Result<RandomDiffusivity, CliError> {
        let l = &self.law;
        let law = match l.kind.as_str() {
            "rademacher" => RandomDiffusivity::rademacher(),
            "point_mass" => RandomDiffusivity::point_mass(l.value)?,
            "uniform" => RandomDiffusivity::uniform(l.a, l.b)?,
            "normal" => RandomDiffusivity::normal(l.mean, l.sd)?,
            "atoms" => RandomDiffusivity::atoms("atoms", l.atoms.iter().map(|p| (p[0], p[1])).collect())?,
            k => return Err(invalid("law.kind", format!("unknown law `{k}`"))),
        };
        Ok(law)
    }

    pub fn y0(&self) -> Result<SpectralField, CliError> {
        if self.y0.re.is_empty() && self.y0.im.is_empty() {
            return Ok(SpectralField::unit(self.modes, 0));
        }
        Ok(SpectralField::new(coefficients(
            "y0",
            &self.y0.re,
            &self.y0.im,
            self.modes,
        )?))
    }

    pub fn control_values(&self) -> Result<Vec<Complex64>, CliError> {
        coefficients("control", &self.control.re, &self.control.im, self.modes)
    }

    pub fn grid(&self) -> Result<TimeGrid, CliError> {
        Ok(TimeGrid::new(self.t_final, self.steps)?)
    }
}

fn coefficients(name: &str, re: &[f64], im: &[f64], modes: usize) -> Result<Vec<Complex64>, CliError> {
    if re.len() > modes || im.len() > modes {
        return Err(CliError::Validation(format!(
            "`{name}`: {} coefficients for {modes} modes",
            re.len().max(im.len())
        )));
    }
    Ok((0..modes)
        .map(|k| Complex64::new(re.get(k).copied().unwrap_or(0.0), im.get(k).copied().unwrap_or(0.0)))
        .collect())
}
