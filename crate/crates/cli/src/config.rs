//! Run configuration: a JSON file merged with command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, ValueEnum};
use hardybench::emit::Format;
use hardybench::functionals::{EvalOptions, Inequality, SupGrid};
use hardybench::group::{Geometry, GroupLaw, GroupSpec, QuasiNormSpec};
use hardybench::profiles::ProfileSpec;
use hardybench::quadrature::QuadratureSpec;
use hardybench::sharpness::ObjectiveKind;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    #[default]
    Verify,
    Sweep,
    Sharpness,
    Constants,
    Selftest,
}

/// Everything a run needs. Every field is optional in the file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub inequality: Option<Inequality>,
    /// `euclidean`, `heisenberg` or `graded` (abelian with `weights`).
    pub group: Option<String>,
    pub n: Option<usize>,
    pub weights: Option<Vec<f64>>,
    /// `euclidean`, `koranyi` or `anisotropic`.
    pub norm: Option<String>,
    pub p0: Option<u32>,
    /// Profiles to evaluate; `verify` takes exactly one.
    pub profiles: Vec<ProfileSpec>,
    /// Evaluate the shipped corpus instead of `profiles`.
    pub corpus: bool,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    #[serde(rename = "L")]
    pub l: Vec<f64>,
    pub k: Vec<u32>,
    #[serde(rename = "R")]
    pub radius: Vec<f64>,
    #[serde(rename = "T")]
    pub t: Vec<f64>,
    /// Homogeneous dimensions for the constants table.
    #[serde(rename = "Q")]
    pub q_dim: Vec<f64>,
    pub r_grid: Option<SupGrid>,
    pub t_grid: Option<SupGrid>,
    pub quad_tol: Option<f64>,
    pub objective: Option<ObjectiveKind>,
    pub budget: Option<usize>,
    pub restarts: Option<usize>,
    pub seed: u64,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Format,
    /// Random samples per scalar inequality in `selftest`.
    pub samples: Option<usize>,
}

/// Flags shared by every subcommand; each one overrides the file.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// JSON run configuration; flags override its fields
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// lp-hardy, ckn, critical-hardy, radial-improved or rellich
    #[arg(long)]
    pub inequality: Option<String>,
    /// euclidean, heisenberg or graded
    #[arg(long)]
    pub group: Option<String>,
    /// Topological dimension
    #[arg(long)]
    pub n: Option<usize>,
    /// Dilation weights, comma separated
    #[arg(long, value_delimiter = ',')]
    pub weights: Option<Vec<f64>>,
    /// euclidean, koranyi or anisotropic
    #[arg(long)]
    pub norm: Option<String>,
    /// Exponent of the anisotropic norm
    #[arg(long)]
    pub p0: Option<u32>,
    /// Profile such as `bump:m=4,R=1`; repeat for several
    #[arg(long)]
    pub profile: Vec<String>,
    /// Use the shipped corpus
    #[arg(long)]
    pub corpus: bool,
    /// Integrability exponent p; comma lists sweep
    #[arg(long, value_delimiter = ',')]
    pub p: Option<Vec<f64>>,
    /// Exponent q of the radial improved inequality
    #[arg(long, value_delimiter = ',')]
    pub q: Option<Vec<f64>>,
    /// Weight exponent L of the radial improved inequality
    #[arg(long = "L", value_delimiter = ',')]
    pub l: Option<Vec<f64>>,
    /// Order k of the Rellich inequality
    #[arg(long, value_delimiter = ',')]
    pub k: Option<Vec<u32>>,
    /// Ball radius (critical Hardy) or reference radius (CKN, radial improved)
    #[arg(long = "R", value_delimiter = ',')]
    pub radius: Option<Vec<f64>>,
    /// Evaluate the critical distance at this T instead of searching a grid
    #[arg(long = "T", value_delimiter = ',')]
    pub t: Option<Vec<f64>>,
    /// Homogeneous dimensions for `constants`
    #[arg(long = "Q", value_delimiter = ',')]
    pub q_dim: Option<Vec<f64>>,
    /// Distance grid over R as `lo:hi:points`
    #[arg(long)]
    pub r_grid: Option<String>,
    /// Distance grid over T as `lo:hi:points`
    #[arg(long)]
    pub t_grid: Option<String>,
    /// Relative quadrature tolerance
    #[arg(long)]
    pub quad_tol: Option<f64>,
    /// sharp-ratio or stability-constant
    #[arg(long)]
    pub objective: Option<String>,
    /// Objective evaluations for `sharpness`
    #[arg(long)]
    pub budget: Option<usize>,
    /// Optimizer restarts for `sharpness`
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Seed for the optimizer and the random samples
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads
    #[arg(long, env = "HARDYBENCH_JOBS")]
    pub jobs: Option<usize>,
    /// Output directory; without it the JSON goes to stdout
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Random samples per scalar inequality in `selftest`
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Json,
    Csv,
    Both,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
            FormatArg::Both => Format::Both,
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Loads the file named by `--config`, if any, and applies the flags.
    pub fn resolve(command: Command, flags: &Flags) -> Result<Self> {
        let mut c = match &flags.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        c.command = command;
        if let Some(s) = &flags.inequality {
            c.inequality = Some(s.parse()?);
        }
        set(&mut c.group, &flags.group);
        set(&mut c.n, &flags.n);
        set(&mut c.weights, &flags.weights);
        set(&mut c.norm, &flags.norm);
        set(&mut c.p0, &flags.p0);
        if !flags.profile.is_empty() {
            c.profiles = flags
                .profile
                .iter()
                .map(|s| s.parse::<ProfileSpec>())
                .collect::<Result<_, _>>()?;
        }
        c.corpus |= flags.corpus;
        set_list(&mut c.p, &flags.p);
        set_list(&mut c.q, &flags.q);
        set_list(&mut c.l, &flags.l);
        set_list(&mut c.k, &flags.k);
        set_list(&mut c.radius, &flags.radius);
        set_list(&mut c.t, &flags.t);
        set_list(&mut c.q_dim, &flags.q_dim);
        if let Some(s) = &flags.r_grid {
            c.r_grid = Some(parse_grid(s)?);
        }
        if let Some(s) = &flags.t_grid {
            c.t_grid = Some(parse_grid(s)?);
        }
        set(&mut c.quad_tol, &flags.quad_tol);
        if let Some(s) = &flags.objective {
            c.objective = Some(match s.as_str() {
                "sharp-ratio" => ObjectiveKind::SharpRatio,
                "stability-constant" => ObjectiveKind::StabilityConstant,
                _ => bail!("unknown objective `{s}`"),
            });
        }
        set(&mut c.budget, &flags.budget);
        set(&mut c.restarts, &flags.restarts);
        if let Some(s) = flags.seed {
            c.seed = s;
        }
        set(&mut c.jobs, &flags.jobs);
        set(&mut c.out, &flags.out);
        if let Some(f) = flags.format {
            c.format = f.into();
        }
        set(&mut c.samples, &flags.samples);
        c.validate()?;
        Ok(c)
    }

    /// Checks everything that can be checked before any computation.
    pub fn validate(&self) -> Result<()> {
        let needs_inequality = matches!(self.command, Command::Verify | Command::Sweep | Command::Sharpness);
        if needs_inequality && self.inequality.is_none() && !(self.command == Command::Sweep && self.corpus) {
            bail!("--inequality is required for {:?}", self.command);
        }
        if matches!(self.command, Command::Verify | Command::Sweep | Command::Sharpness) && !self.corpus {
            self.geometry()?;
        }
        if self.command == Command::Verify && self.profiles.len() != 1 {
            bail!("verify takes exactly one --profile, got {}", self.profiles.len());
        }
        if self.command == Command::Sweep && !self.corpus && self.profiles.is_empty() {
            bail!("sweep needs at least one --profile or --corpus");
        }
        if self.command == Command::Verify {
            for (name, len) in [
                ("p", self.p.len()),
                ("q", self.q.len()),
                ("L", self.l.len()),
                ("k", self.k.len()),
                ("R", self.radius.len()),
                ("T", self.t.len()),
            ] {
                if len > 1 {
                    bail!("verify takes a single value of --{name}");
                }
            }
        }
        if self.command == Command::Constants && self.q_dim.is_empty() && self.geometry().is_err() {
            bail!("constants needs --Q or a geometry");
        }
        if !self.t.is_empty() {
            if self.inequality != Some(Inequality::CriticalHardy) {
                bail!("--T applies to critical-hardy only");
            }
            if self.t.len() > 1 || self.t_grid.is_some() {
                bail!("give either one --T or a --t-grid");
            }
            if !(self.t[0] > 0.0 && self.t[0].is_finite()) {
                bail!("--T must be positive, got {}", self.t[0]);
            }
        }
        if let Some(tol) = self.quad_tol {
            self.eval_options()?;
            if tol.is_nan() || tol <= 0.0 {
                bail!("--quad-tol must be positive, got {tol}");
            }
        }
        for g in [&self.r_grid, &self.t_grid].into_iter().flatten() {
            g.validate()?;
        }
        if self.budget == Some(0) {
            bail!("--budget must be at least 1");
        }
        Ok(())
    }

    pub fn geometry(&self) -> Result<Geometry> {
        let group = self.group.as_deref().unwrap_or("euclidean");
        let group = match group {
            "euclidean" => {
                let n = self.n.ok_or_else(|| anyhow!("--n is required for the euclidean group"))?;
                GroupSpec::euclidean(n)?
            }
            "heisenberg" => GroupSpec::heisenberg(),
            "graded" => {
                let w = self
                    .weights
                    .clone()
                    .ok_or_else(|| anyhow!("--weights is required for a graded group"))?;
                GroupSpec::new(self.n.unwrap_or(w.len()), w, GroupLaw::Abelian)?
            }
            other => bail!("unknown group `{other}` (euclidean, heisenberg or graded)"),
        };
        let default_norm = if group.law == GroupLaw::Heisenberg { "koranyi" } else { "euclidean" };
        let norm = match self.norm.as_deref().unwrap_or(default_norm) {
            "euclidean" => QuasiNormSpec::Euclidean,
            "koranyi" => QuasiNormSpec::Koranyi,
            "anisotropic" => QuasiNormSpec::Anisotropic {
                p0: self.p0.ok_or_else(|| anyhow!("--p0 is required for the anisotropic norm"))?,
            },
            other => bail!("unknown norm `{other}` (euclidean, koranyi or anisotropic)"),
        };
        Ok(Geometry::new(group, norm)?)
    }

    /// Quadrature and grid settings; the `T` grid applies to the critical
    /// inequality, the `R` grid to the others.
    pub fn eval_options(&self) -> Result<EvalOptions> {
        let mut quad = QuadratureSpec::default();
        if self.command == Command::Constants && self.q_dim.is_empty() && self.geometry().is_err() {
            bail!("constants needs --Q or a geometry");
        }
        if !self.t.is_empty() {
            if self.inequality != Some(Inequality::CriticalHardy) {
                bail!("--T applies to critical-hardy only");
            }
            if self.t.len() > 1 || self.t_grid.is_some() {
                bail!("give either one --T or a --t-grid");
            }
            if !(self.t[0] > 0.0 && self.t[0].is_finite()) {
                bail!("--T must be positive, got {}", self.t[0]);
            }
        }
        if let Some(tol) = self.quad_tol {
            quad = quad.with_rel_tol(tol);
        }
        quad.validate()?;
        let grid = match (self.inequality, self.t.as_slice()) {
            // a single T pins the distance instead of searching for its supremum
            (Some(Inequality::CriticalHardy), &[t]) => Some(SupGrid {
                points: 1,
                span: (1.0, 1.0),
                refine_steps: 0,
                center: Some(t),
            }),
            (Some(Inequality::CriticalHardy), _) => self.t_grid,
            _ => self.r_grid,
        };
        Ok(EvalOptions {
            quad,
            grid: grid.unwrap_or_default(),
        })
    }
}

fn set<T: Clone>(slot: &mut Option<T>, flag: &Option<T>) {
    if let Some(v) = flag {
        *slot = Some(v.clone());
    }
}

fn set_list<T: Clone>(slot: &mut Vec<T>, flag: &Option<Vec<T>>) {
    if let Some(v) = flag {
        *slot = v.clone();
    }
}

/// `lo:hi:points` as multiples of the natural scale, or `lo:hi:points:centre`.
fn parse_grid(s: &str) -> Result<SupGrid> {
    let parts: Vec<&str> = s.split(':').collect();
    if !(3..=4).contains(&parts.len()) {
        bail!("grid `{s}`: expected lo:hi:points[:centre]");
    }
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| anyhow!("grid `{s}`: `{t}` is not a number"));
    let grid = SupGrid {
        span: (num(parts[0])?, num(parts[1])?),
        points: parts[2]
            .trim()
            .parse()
            .map_err(|_| anyhow!("grid `{s}`: `{}` is not a count", parts[2]))?,
        center: parts.get(3).map(|c| num(c)).transpose()?,
        ..SupGrid::default()
    };
    grid.validate()?;
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flags() -> Flags {
        Flags {
            inequality: Some("lp-hardy".into()),
            group: Some("heisenberg".into()),
            profile: vec!["bump:m=4,R=1".into()],
            p: Some(vec![2.0]),
            ..Default::default()
        }
    }

    #[test]
    fn config_round_trips_through_json() {
        let mut c = RunConfig::resolve(Command::Verify, &flags()).unwrap();
        c.r_grid = Some(parse_grid("0.1:10:9:2").unwrap());
        c.q_dim = vec![4.0, 5.0];
        c.out = Some("reports".into());
        c.format = Format::Both;
        c.objective = Some(ObjectiveKind::StabilityConstant);
        let text = serde_json::to_string(&c).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
    }

    #[test]
    fn flags_override_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(&path, r#"{"inequality": "rellich", "p": [3.0], "seed": 9, "group": "euclidean", "n": 7}"#).unwrap();
        let mut f = flags();
        f.config = Some(path);
        let c = RunConfig::resolve(Command::Verify, &f).unwrap();
        assert_eq!(c.inequality, Some(Inequality::LpHardy));
        assert_eq!(c.p, vec![2.0]);
        assert_eq!(c.seed, 9);
        assert_eq!(c.group.as_deref(), Some("heisenberg"));
        assert_eq!(c.geometry().unwrap().q(), 4.0);
    }

    #[test]
    fn bad_configs_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        std::fs::write(&path, "{\"inequality\": ").unwrap();
        let mut f = flags();
        f.config = Some(path.clone());
        assert!(RunConfig::resolve(Command::Verify, &f).is_err());
        std::fs::write(&path, r#"{"colour": 1}"#).unwrap();
        assert!(RunConfig::resolve(Command::Verify, &f).is_err());

        let mut f = flags();
        f.profile.push("gaussian:sigma=1".into());
        assert!(RunConfig::resolve(Command::Verify, &f).is_err());
        let mut f = flags();
        f.norm = Some("anisotropic".into());
        assert!(RunConfig::resolve(Command::Verify, &f).is_err());
        let mut f = flags();
        f.r_grid = Some("1:0.1:5".into());
        assert!(RunConfig::resolve(Command::Verify, &f).is_err());
    }

    #[test]
    fn single_t_pins_the_critical_distance() {
        let mut f = flags();
        f.inequality = Some("critical-hardy".into());
        f.t = Some(vec![0.7]);
        let c = RunConfig::resolve(Command::Verify, &f).unwrap();
        assert_eq!(c.eval_options().unwrap().grid.values(1.0), vec![0.7]);

        f.t_grid = Some("0.1:10:5".into());
        assert!(RunConfig::resolve(Command::Verify, &f).is_err());
        let mut f = flags();
        f.t = Some(vec![0.7]);
        assert!(RunConfig::resolve(Command::Verify, &f).is_err());
    }

    #[test]
    fn grids_parse() {
        let g = parse_grid("0.5:2:5").unwrap();
        assert_eq!((g.span, g.points, g.center), ((0.5, 2.0), 5, None));
        assert!(parse_grid("1:2").is_err());
        assert!(parse_grid("1:2:x").is_err());
    }
}
