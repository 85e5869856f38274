//! On-disk layouts.
//!
//! A system directory holds `A.dmx`, `B.dmx`, `C.dmx`, `D.dmx` and
//! `system.meta` (`n`, `m`, `p`, `seed`, `spectral_target`).
//! A dataset directory holds `U.dmx`, `Y.dmx`, `G.dmx` and `simulation.meta`
//! (`sigma_u`, `sigma_w`, `sigma_v`, `T`, `N`, `seed`).

use std::path::Path;

use dihs_core::lti::{LtiSystem, MarkovParams, SimulationConfig};
use dihs_core::DenseMatrix;

use crate::meta::KeyValues;
use crate::{dmx, Error, Result};

pub const SYSTEM_META: &str = "system.meta";
pub const SIMULATION_META: &str = "simulation.meta";

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub fn save_system(dir: &Path, sys: &LtiSystem, seed: u64, spectral_target: f64) -> Result<()> {
    ensure_dir(dir)?;
    dmx::write(dir.join("A.dmx"), sys.a())?;
    dmx::write(dir.join("B.dmx"), sys.b())?;
    dmx::write(dir.join("C.dmx"), sys.c())?;
    dmx::write(dir.join("D.dmx"), sys.d())?;
    KeyValues::new()
        .set("n", sys.n())
        .set("m", sys.m())
        .set("p", sys.p())
        .set("seed", seed)
        .set("spectral_target", spectral_target)
        .write(dir.join(SYSTEM_META))
}

/// Loads and re-validates a system (shapes and Schur stability).
pub fn load_system(dir: &Path) -> Result<LtiSystem> {
    let read = |name: &str| dmx::read(dir.join(name));
    Ok(LtiSystem::new(read("A.dmx")?, read("B.dmx")?, read("C.dmx")?, read("D.dmx")?)?)
}

pub fn simulation_meta(cfg: &SimulationConfig) -> KeyValues {
    let mut kv = KeyValues::new();
    kv.set("sigma_u", cfg.sigma_u)
        .set("sigma_w", cfg.sigma_w)
        .set("sigma_v", cfg.sigma_v)
        .set("T", cfg.horizon)
        .set("N", cfg.samples)
        .set("seed", cfg.seed);
    kv
}

pub fn parse_simulation_meta(kv: &KeyValues) -> Result<SimulationConfig> {
    Ok(SimulationConfig {
        sigma_u: kv.get("sigma_u")?,
        sigma_w: kv.get("sigma_w")?,
        sigma_v: kv.get("sigma_v")?,
        horizon: kv.get("T")?,
        samples: kv.get("N")?,
        seed: kv.get("seed")?,
    })
}

pub fn save_dataset(
    dir: &Path,
    u: &DenseMatrix,
    y: &DenseMatrix,
    g: &MarkovParams,
    cfg: &SimulationConfig,
) -> Result<()> {
    ensure_dir(dir)?;
    dmx::write(dir.join("U.dmx"), u)?;
    dmx::write(dir.join("Y.dmx"), y)?;
    dmx::write(dir.join("G.dmx"), g.matrix())?;
    simulation_meta(cfg).write(dir.join(SIMULATION_META))
}

/// A dataset read back from disk. `G` and metadata are optional so that
/// externally produced `U`/`Y` pairs can be solved too.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub u: DenseMatrix,
    pub y: DenseMatrix,
    pub truth: Option<MarkovParams>,
    pub config: Option<SimulationConfig>,
}

pub fn load_dataset(dir: &Path) -> Result<Dataset> {
    let u = dmx::read(dir.join("U.dmx"))?;
    let y = dmx::read(dir.join("Y.dmx"))?;
    let meta_path = dir.join(SIMULATION_META);
    let config = if meta_path.exists() {
        Some(parse_simulation_meta(&KeyValues::read(&meta_path)?)?)
    } else {
        None
    };
    let g_path = dir.join("G.dmx");
    let truth = if g_path.exists() {
        let g = dmx::read(&g_path)?;
        let horizon = match config {
            Some(c) => c.horizon,
            None => return Err(Error::Format("G.dmx present without simulation.meta".into())),
        };
        Some(MarkovParams::new(g, horizon)?)
    } else {
        None
    };
    Ok(Dataset { u, y, truth, config })
}
