//! JSON-configured experiments writing CSV/JSON artifacts and a manifest.

use crate::density::{invariant_density_ulam, saltus_density_map};
use crate::error::Error;
use crate::io::{write_json, write_table};
use crate::maps::{FamilyKind, FamilySpec, MapFamily};
use crate::marchaud::{geometric_grid, KernelSpec, MarchaudKernel, MarchaudSide};
use crate::observable::{Observable, ObservableSpec};
use crate::response::{conjugacy_derivative, marchaud_of_response, modulus_fit, response_curve, DensityMethod, ModulusModel};
use crate::susceptibility::{
    classical_susceptibility, response_susceptibility_tent, EngineConfig, Propagation, SeriesNodes, SpatialConfig,
    SusceptibilitySeries, Variant,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Density,
    Response,
    Susceptibility,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grids {
    /// Response grid ±ε₁ q^j, j < t_levels, plus ±ε₁·t_outer.
    pub t_q: f64,
    pub t_levels: usize,
    pub t_outer: Vec<f64>,
    /// Orders; empty means the kernel order only.
    pub eta: Vec<f64>,
    /// Evaluation points as [re, im].
    pub z: Vec<[f64; 2]>,
    pub k_max: usize,
}

impl Default for Grids {
    fn default() -> Self {
        Grids {
            t_q: 0.8,
            t_levels: 60,
            t_outer: vec![2.0, 3.0],
            eta: vec![0.25, 0.5, 0.75],
            z: vec![[0.0, 0.0], [0.5, 0.0], [1.0, 0.0]],
            k_max: 30,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodChoice {
    Saltus,
    Ulam,
    Birkhoff,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Methods {
    pub density: MethodChoice,
    pub ulam_n: usize,
    pub saltus_k: usize,
    pub birkhoff_n: usize,
    pub variant: Variant,
    pub panels: usize,
    pub q: f64,
    pub spatial_cells: usize,
}

impl Default for Methods {
    fn default() -> Self {
        Methods {
            density: MethodChoice::Saltus,
            ulam_n: 800,
            saltus_k: 60,
            birkhoff_n: 1_000_000,
            variant: Variant::Full,
            panels: 60,
            q: 0.8,
            spatial_cells: 64_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub neumann_tol: f64,
    pub max_terms: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            neumann_tol: 1e-13,
            max_terms: 5000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: FamilySpec,
    pub observable: ObservableSpec,
    pub kernel: KernelSpec,
    pub grids: Grids,
    pub methods: Methods,
    pub tolerances: Tolerances,
    pub out_dir: Option<String>,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            family: FamilySpec {
                kind: FamilyKind::TentFixedSlope,
                lambda0: 1.8,
                t0: 0.05,
                eps1: 0.01,
            },
            observable: ObservableSpec::Preset { name: "x".into() },
            kernel: KernelSpec {
                variant: "truncated".into(),
                eta_re: 0.5,
                eta_im: 0.0,
                eps1: None,
                beta: None,
            },
            grids: Grids::default(),
            methods: Methods::default(),
            tolerances: Tolerances::default(),
            out_dir: None,
            seed: 0,
        }
    }
}

/// Failure of an experiment, split by exit code.
#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(Error),
}

impl ExperimentError {
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Config(_) => 2,
            ExperimentError::Numerical(_) => 3,
        }
    }
}

fn bad(msg: impl Into<String>) -> ExperimentError {
    ExperimentError::Config(msg.into())
}

fn in_range(name: &str, v: f64, lo: f64, hi: f64) -> Result<(), ExperimentError> {
    if v.is_finite() && v >= lo && v <= hi {
        Ok(())
    } else {
        Err(bad(format!("{name} = {v} outside [{lo}, {hi}]")))
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let f = &self.family;
        if f.kind == FamilyKind::General {
            return Err(bad("general families are not configurable from JSON"));
        }
        in_range("family.lambda0", f.lambda0, 1.0 + 1e-9, 2.0)?;
        in_range("family.eps1", f.eps1, 1e-8, 0.5)?;
        in_range("family.t0", f.t0, -0.5, 0.5)?;
        self.family.build().map_err(|e| bad(e.to_string()))?;
        self.observable.build().map_err(|e| bad(e.to_string()))?;
        let eta_hi = if self.kernel.variant == "power_log" { 1.0 } else { 1.0 - 1e-9 };
        in_range("kernel.eta_re", self.kernel.eta_re, 1e-9, eta_hi)?;
        self.kernel.build(f.eps1).map_err(|e| bad(e.to_string()))?;
        let g = &self.grids;
        in_range("grids.t_q", g.t_q, 0.05, 0.99)?;
        in_range("grids.t_levels", g.t_levels as f64, 4.0, 400.0)?;
        let inner = g.t_q.powi(g.t_levels as i32 - 1);
        if inner > 1e-3 {
            return Err(bad(format!("t grid too coarse: innermost node {inner:e} eps1 (need <= 1e-3 eps1)")));
        }
        for &o in &g.t_outer {
            in_range("grids.t_outer", o, 1.0, 3.0)?;
        }
        for &e in &g.eta {
            in_range("grids.eta", e, 1e-9, eta_hi)?;
        }
        for z in &g.z {
            in_range("|grids.z|", z[0].hypot(z[1]), 0.0, 1.0)?;
        }
        in_range("grids.k_max", g.k_max as f64, 0.0, 1000.0)?;
        let m = &self.methods;
        in_range("methods.ulam_n", m.ulam_n as f64, 10.0, 20_000.0)?;
        in_range("methods.saltus_k", m.saltus_k as f64, 1.0, 1000.0)?;
        in_range("methods.birkhoff_n", m.birkhoff_n as f64, 1000.0, 1e9)?;
        in_range("methods.panels", m.panels as f64, 4.0, 2000.0)?;
        in_range("methods.q", m.q, 0.05, 0.99)?;
        in_range("methods.spatial_cells", m.spatial_cells as f64, 100.0, 1e6)?;
        in_range("tolerances.neumann_tol", self.tolerances.neumann_tol, 1e-16, 1e-3)?;
        in_range("tolerances.max_terms", self.tolerances.max_terms as f64, 1.0, 1e6)?;
        Ok(())
    }

    pub fn engine(&self) -> EngineConfig {
        EngineConfig {
            panels: self.methods.panels,
            q: self.methods.q,
            k_max: self.grids.k_max,
            density_k: self.methods.saltus_k,
            neumann_tol: self.tolerances.neumann_tol,
            max_terms: self.tolerances.max_terms,
            ulam_n: if self.methods.density == MethodChoice::Ulam {
                Some(self.methods.ulam_n)
            } else {
                None
            },
        }
    }

    pub fn t_grid(&self) -> Vec<f64> {
        let e = self.family.eps1;
        let outer: Vec<f64> = self.grids.t_outer.iter().map(|o| o * e).collect();
        geometric_grid(e, self.grids.t_q, self.grids.t_levels, &outer)
    }

    fn density_method(&self) -> DensityMethod {
        match self.methods.density {
            MethodChoice::Saltus => DensityMethod::Saltus { k: self.methods.saltus_k },
            MethodChoice::Ulam => DensityMethod::Ulam { n: self.methods.ulam_n },
            MethodChoice::Birkhoff => DensityMethod::birkhoff(self.methods.birkhoff_n, self.seed),
        }
    }

    /// Kernels for every order of the η grid.
    fn kernels(&self) -> crate::Result<Vec<(f64, MarchaudKernel)>> {
        let etas = if self.grids.eta.is_empty() {
            vec![self.kernel.eta_re]
        } else {
            self.grids.eta.clone()
        };
        etas.into_iter()
            .map(|eta| {
                let spec = KernelSpec {
                    eta_re: eta,
                    ..self.kernel.clone()
                };
                Ok((eta, spec.build(self.family.eps1)?))
            })
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub experiment: ExperimentKind,
    pub config: ExperimentConfig,
    pub seed: u64,
    pub threads: usize,
    pub files: Vec<String>,
    /// (stage, seconds)
    pub timings: Vec<(String, f64)>,
}

struct Writer {
    dir: PathBuf,
    files: Vec<String>,
}

impl Writer {
    fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.dir.join(name)
    }

    fn table(&mut self, name: &str, header: &[&str], rows: &[Vec<f64>]) -> crate::Result<()> {
        let p = self.path(name);
        write_table(&p, header, rows)
    }

    fn json<T: Serialize>(&mut self, name: &str, v: &T) -> crate::Result<()> {
        let p = self.path(name);
        write_json(&p, v)
    }
}

#[derive(Serialize)]
struct DensityReport {
    method: MethodChoice,
    integral: f64,
    s1: f64,
    #[serde(rename = "K")]
    k: usize,
    tail_bound: f64,
    cells: Option<usize>,
}

fn run_density(cfg: &ExperimentConfig, fam: &MapFamily, w: &mut Writer) -> crate::Result<()> {
    let (d, cells) = match cfg.methods.density {
        MethodChoice::Saltus => (saltus_density_map(fam.base(), cfg.methods.saltus_k)?, None),
        MethodChoice::Ulam => (invariant_density_ulam(fam, 0.0, cfg.methods.ulam_n)?, Some(cfg.methods.ulam_n)),
        MethodChoice::Birkhoff => unreachable!("rejected before the run"),
    };
    let rho = d.density();
    let p = w.path("density.csv");
    rho.write_csv(fs::File::create(p)?)?;
    w.json(
        "density.json",
        &DensityReport {
            method: cfg.methods.density,
            integral: rho.integral(),
            s1: d.s1,
            k: d.k,
            tail_bound: d.tail_bound,
            cells,
        },
    )
}

#[derive(Serialize)]
struct ResponseReport {
    r0: f64,
    conjugacy_derivative: Option<f64>,
    modulus_power: Option<f64>,
    modulus_power_log: Option<f64>,
}

fn run_response(cfg: &ExperimentConfig, fam: &MapFamily, phi: &Observable, w: &mut Writer) -> crate::Result<()> {
    let curve = response_curve(fam, phi, &cfg.t_grid(), cfg.density_method())?;
    let p = w.path("response.csv");
    curve.write_csv(fs::File::create(p)?)?;
    let mut rows = Vec::new();
    for (eta, k) in cfg.kernels()? {
        let v = marchaud_of_response(&curve, &k)?;
        rows.push(vec![eta, v.value.re, v.value.im, v.error]);
    }
    w.table("marchaud.csv", &["eta", "re", "im", "err"], &rows)?;
    w.json(
        "response.json",
        &ResponseReport {
            r0: curve.value_at_zero(),
            conjugacy_derivative: conjugacy_derivative(fam, phi).ok(),
            modulus_power: modulus_fit(&curve, ModulusModel::Power).ok().map(|f| f.exponent),
            modulus_power_log: modulus_fit(&curve, ModulusModel::PowerLog).ok().map(|f| f.exponent),
        },
    )
}

fn run_susceptibility(
    cfg: &ExperimentConfig,
    fam: &MapFamily,
    phi: &Observable,
    w: &mut Writer,
    timings: &mut Vec<(String, f64)>,
) -> crate::Result<()> {
    let zs: Vec<Complex64> = cfg.grids.z.iter().map(|z| Complex64::new(z[0], z[1])).collect();
    let variant = cfg.methods.variant;
    let engine = cfg.engine();
    let mut values = Vec::new();
    if variant == Variant::Classical {
        for z in &zs {
            let v = classical_susceptibility(fam, phi, *z, engine.density_k)?;
            values.push(vec![f64::NAN, z.re, z.im, v.value.re, v.value.im, v.tail_bound]);
        }
        return w.table("values.csv", &["eta", "z_re", "z_im", "re", "im", "err"], &values);
    }
    let kernels = cfg.kernels()?;
    let mut series: Vec<SusceptibilitySeries> = Vec::new();
    if variant == Variant::Response {
        let spatial = SpatialConfig {
            cells: cfg.methods.spatial_cells,
            ..Default::default()
        };
        for (eta, k) in &kernels {
            let (s, v) = response_susceptibility_tent(fam, phi, k, &zs, &engine, &spatial)?;
            for (z, val) in zs.iter().zip(v) {
                values.push(vec![*eta, z.re, z.im, val.re, val.im, f64::NAN]);
            }
            series.push(s);
        }
    } else {
        let start = Instant::now();
        let nodes = SeriesNodes::build(fam, phi, Propagation::of(variant)?, &engine, &zs)?;
        timings.push(("nodes".into(), start.elapsed().as_secs_f64()));
        for (eta, k) in &kernels {
            series.push(nodes.series(k, MarchaudSide::TwoSided)?);
            for (z, (val, err)) in zs.iter().zip(nodes.resummed(k, MarchaudSide::TwoSided)?) {
                values.push(vec![*eta, z.re, z.im, val.re, val.im, err]);
            }
        }
    }
    let mut header = vec!["k".to_string()];
    for (eta, _) in &kernels {
        header.extend(["re", "im", "err"].iter().map(|c| format!("{c}[eta={eta}]")));
    }
    let rows: Vec<Vec<f64>> = (0..=engine.k_max)
        .map(|k| {
            let mut r = vec![k as f64];
            for s in &series {
                r.extend([s.coeffs[k].re, s.coeffs[k].im, s.errors[k]]);
            }
            r
        })
        .collect();
    let hdr: Vec<&str> = header.iter().map(String::as_str).collect();
    w.table("coeffs.csv", &hdr, &rows)?;
    w.table("values.csv", &["eta", "z_re", "z_im", "re", "im", "err"], &values)?;
    w.json("series.json", &series)
}

/// Run one experiment into `out`, returning its manifest.
pub fn run_experiment(kind: ExperimentKind, cfg: &ExperimentConfig, out: &Path) -> Result<Manifest, ExperimentError> {
    cfg.validate()?;
    if kind == ExperimentKind::Density && cfg.methods.density == MethodChoice::Birkhoff {
        return Err(bad("density experiments need the saltus or ulam method"));
    }
    fs::create_dir_all(out).map_err(|e| bad(format!("{}: {e}", out.display())))?;
    let fam = cfg.family.build().map_err(|e| bad(e.to_string()))?;
    let phi = cfg.observable.build().map_err(|e| bad(e.to_string()))?;
    let mut w = Writer {
        dir: out.to_path_buf(),
        files: Vec::new(),
    };
    let mut timings = Vec::new();
    let start = Instant::now();
    let run = match kind {
        ExperimentKind::Density => run_density(cfg, &fam, &mut w),
        ExperimentKind::Response => run_response(cfg, &fam, &phi, &mut w),
        ExperimentKind::Susceptibility => run_susceptibility(cfg, &fam, &phi, &mut w, &mut timings),
    };
    timings.push(("total".into(), start.elapsed().as_secs_f64()));
    if let Err(e) = run {
        #[derive(Serialize)]
        struct Diagnostic<'a> {
            error: String,
            experiment: ExperimentKind,
            config: &'a ExperimentConfig,
        }
        let _ = write_json(
            &out.join("diagnostic.json"),
            &Diagnostic {
                error: e.to_string(),
                experiment: kind,
                config: cfg,
            },
        );
        return Err(ExperimentError::Numerical(e));
    }
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        experiment: kind,
        config: cfg.clone(),
        seed: cfg.seed,
        threads: rayon::current_num_threads(),
        files: w.files.clone(),
        timings,
    };
    write_json(&out.join("manifest.json"), &manifest).map_err(ExperimentError::Numerical)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid_and_roundtrips() {
        let c = ExperimentConfig::default();
        c.validate().unwrap();
        assert_eq!(ExperimentConfig::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn out_of_range_knob_is_a_config_error() {
        let mut c = ExperimentConfig::default();
        c.methods.q = 1.5;
        assert_eq!(c.validate().unwrap_err().exit_code(), 2);
        assert!(ExperimentConfig::from_json("{\"bogus\": 1}").is_err());
    }
}
