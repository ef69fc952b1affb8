//! Layered run configuration: preset defaults, then the config file, then
//! command-line overrides, merged key by key on dotted names.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use fama_core::channel::{ChannelModel, FiniteScatteringParams};
use fama_core::harness::{CsiMode, ExperimentConfig, SweepVariable};
use fama_core::selection::{Method, SinrMode};
use fama_core::PortGrid;
use toml::Value;

use crate::error::CliError;

pub type Layer = BTreeMap<String, Value>;

pub const PRESETS: [&str; 4] = ["6ghz-sparse", "6ghz-compact", "26ghz-sparse", "26ghz-compact"];

const KNOWN_KEYS: &[&str] = &[
    "preset",
    "grid.n1",
    "grid.n2",
    "grid.w1",
    "grid.w2",
    "channel.model",
    "channel.rice_k",
    "channel.n_paths",
    "channel.sigma2",
    "system.users",
    "system.n_rf",
    "system.mod_order",
    "system.snr_db",
    "selection.methods",
    "selection.mode",
    "selection.eps_cap",
    "sweep.variable",
    "sweep.values",
    "csi.mode",
    "run.seed",
    "run.trials_min",
    "run.trials_max",
    "run.error_events_target",
    "run.symbols_per_block",
    "run.chunk",
    "run.workers",
    "output.dir",
];

fn flatten(table: &toml::Table, prefix: &str, out: &mut Layer) {
    for (k, v) in table {
        let key = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            Value::Table(t) => flatten(t, &key, out),
            other => {
                out.insert(key, other.clone());
            }
        }
    }
}

/// Parses config text into dotted keys, rejecting unknown ones.
pub fn parse_layer(text: &str) -> Result<Layer, CliError> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| CliError::Config(format!("malformed config: {e}")))?;
    let mut layer = Layer::new();
    flatten(&table, "", &mut layer);
    for key in layer.keys() {
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(CliError::Config(format!("unknown config key '{key}'")));
        }
    }
    Ok(layer)
}

pub fn load_file(path: &Path) -> Result<Layer, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::MissingConfig(format!("cannot read config file '{}': {e}", path.display()))
    })?;
    parse_layer(&text)
}

fn int(v: i64) -> Value {
    Value::Integer(v)
}

fn float(v: f64) -> Value {
    Value::Float(v)
}

fn string(v: &str) -> Value {
    Value::String(v.to_string())
}

fn base_layer() -> Layer {
    let mut l = Layer::new();
    l.insert("channel.sigma2".into(), float(1.0));
    l.insert("system.users".into(), int(10));
    l.insert("system.n_rf".into(), int(2));
    l.insert("system.mod_order".into(), int(4));
    l.insert("system.snr_db".into(), float(35.0));
    l.insert(
        "selection.methods".into(),
        Value::Array(["ss", "eps", "ips", "dps"].map(string).to_vec()),
    );
    l.insert("selection.mode".into(), string("auto"));
    l.insert("selection.eps_cap".into(), int(1_000_000));
    l.insert("sweep.variable".into(), string("snr"));
    l.insert("csi.mode".into(), string("estimated:1000"));
    l.insert("run.seed".into(), int(1));
    l.insert("run.trials_min".into(), int(100));
    l.insert("run.trials_max".into(), int(100_000));
    l.insert("run.error_events_target".into(), int(200));
    l.insert("run.symbols_per_block".into(), int(1));
    l.insert("run.chunk".into(), int(64));
    l
}

/// Defaults of a named preset and whether it is a compact configuration.
pub fn preset_layer(name: &str) -> Result<(Layer, bool), CliError> {
    let (n1, n2, w1, w2, k, np, compact) = match name {
        "6ghz-sparse" => (5, 3, 3.0, 1.6, 0.0, 50, false),
        "6ghz-compact" => (150, 3, 3.0, 1.6, 0.0, 50, true),
        "26ghz-sparse" => (25, 13, 13.0, 7.0, 7.0, 2, false),
        "26ghz-compact" => (64, 13, 13.0, 7.0, 7.0, 2, true),
        other => {
            return Err(CliError::Config(format!(
                "unknown preset '{other}'; valid presets: {}",
                PRESETS.join(", ")
            )))
        }
    };
    let mut l = Layer::new();
    l.insert("grid.n1".into(), int(n1));
    l.insert("grid.n2".into(), int(n2));
    l.insert("grid.w1".into(), float(w1));
    l.insert("grid.w2".into(), float(w2));
    l.insert("channel.model".into(), string("finite_scattering"));
    l.insert("channel.rice_k".into(), float(k));
    l.insert("channel.n_paths".into(), int(np));
    if compact {
        // Exhaustive search is only tractable at two RF chains there and
        // the decremental search starts from every port.
        l.insert(
            "selection.methods".into(),
            Value::Array(["ss", "eps", "ips"].map(string).to_vec()),
        );
    }
    Ok((l, compact))
}

/// The merged settings and the experiment they describe.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub settings: Layer,
    pub config: ExperimentConfig,
    pub preset: Option<String>,
    pub out_dir: Option<PathBuf>,
}

struct Getter<'a>(&'a Layer);

impl Getter<'_> {
    fn raw(&self, key: &str) -> Result<&Value, CliError> {
        self.0
            .get(key)
            .ok_or_else(|| CliError::Config(format!("missing config key '{key}'")))
    }

    fn bad(key: &str, want: &str, got: &Value) -> CliError {
        CliError::Config(format!("config key '{key}': expected {want}, got {got}"))
    }

    fn count(&self, key: &str) -> Result<usize, CliError> {
        let v = self.raw(key)?;
        match v {
            Value::Integer(i) if *i >= 0 => Ok(*i as usize),
            _ => Err(Self::bad(key, "a non-negative integer", v)),
        }
    }

    fn u64(&self, key: &str) -> Result<u64, CliError> {
        self.count(key).map(|v| v as u64)
    }

    fn real(&self, key: &str) -> Result<f64, CliError> {
        let v = self.raw(key)?;
        match v {
            Value::Float(f) => Ok(*f),
            Value::Integer(i) => Ok(*i as f64),
            _ => Err(Self::bad(key, "a number", v)),
        }
    }

    fn text(&self, key: &str) -> Result<&str, CliError> {
        let v = self.raw(key)?;
        v.as_str().ok_or_else(|| Self::bad(key, "a string", v))
    }

    fn reals(&self, key: &str) -> Result<Vec<f64>, CliError> {
        let v = self.raw(key)?;
        let arr = v.as_array().ok_or_else(|| Self::bad(key, "an array of numbers", v))?;
        arr.iter()
            .map(|x| match x {
                Value::Float(f) => Ok(*f),
                Value::Integer(i) => Ok(*i as f64),
                _ => Err(Self::bad(key, "an array of numbers", v)),
            })
            .collect()
    }

    fn names(&self, key: &str) -> Result<Vec<String>, CliError> {
        let v = self.raw(key)?;
        match v {
            Value::String(s) => Ok(s.split(',').map(|p| p.trim().to_string()).collect()),
            Value::Array(a) => a
                .iter()
                .map(|x| x.as_str().map(str::to_string).ok_or_else(|| Self::bad(key, "an array of strings", v)))
                .collect(),
            _ => Err(Self::bad(key, "a list of names", v)),
        }
    }
}

fn keyed<T>(key: &str, r: fama_core::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| CliError::Config(format!("config key '{key}': {e}")))
}

/// Merges `preset < file < cli` and builds the experiment.
///
/// The preset is taken from `cli_preset`, else from the file's `preset`
/// key. Compact presets need `allow_compact`.
pub fn resolve(
    file: Option<Layer>,
    cli: Layer,
    cli_preset: Option<&str>,
    allow_compact: bool,
) -> Result<Resolved, CliError> {
    let file = file.unwrap_or_default();
    let preset = match cli_preset {
        Some(p) => Some(p.to_string()),
        None => match file.get("preset") {
            Some(v) => Some(
                v.as_str()
                    .ok_or_else(|| Getter::bad("preset", "a string", v))?
                    .to_string(),
            ),
            None => None,
        },
    };

    let mut settings = base_layer();
    if let Some(name) = &preset {
        let (layer, compact) = preset_layer(name)?;
        if compact && !allow_compact {
            return Err(CliError::Config(format!(
                "preset '{name}' is a compact configuration with long runtimes; pass --allow-compact to run it"
            )));
        }
        settings.extend(layer);
        settings.insert("preset".into(), Value::String(name.clone()));
    }
    settings.extend(file);
    settings.extend(cli);
    if let Some(name) = &preset {
        settings.insert("preset".into(), Value::String(name.clone()));
    }

    let g = Getter(&settings);
    let grid = keyed(
        "grid",
        PortGrid::new(g.count("grid.n1")?, g.count("grid.n2")?, g.real("grid.w1")?, g.real("grid.w2")?),
    )?;
    let sigma2 = g.real("channel.sigma2")?;
    let channel_model = match g.text("channel.model")? {
        "finite_scattering" => ChannelModel::FiniteScattering(keyed(
            "channel",
            FiniteScatteringParams::new(g.real("channel.rice_k")?, g.count("channel.n_paths")?, sigma2),
        )?),
        "correlated_rayleigh" => ChannelModel::CorrelatedRayleigh { sigma2 },
        "iid" => ChannelModel::Iid { sigma2 },
        other => {
            return Err(CliError::Config(format!(
                "config key 'channel.model': unknown model '{other}'; expected finite_scattering, correlated_rayleigh or iid"
            )))
        }
    };

    let mut config = ExperimentConfig::new(grid, channel_model);
    config.users = g.count("system.users")?;
    config.n_rf = g.count("system.n_rf")?;
    config.mod_order = g.count("system.mod_order")?;
    config.snr_db = g.real("system.snr_db")?;
    config.methods = g
        .names("selection.methods")?
        .iter()
        .map(|n| keyed("selection.methods", n.parse::<Method>()))
        .collect::<Result<_, _>>()?;
    config.sinr_mode = match g.text("selection.mode")? {
        "auto" => None,
        other => Some(keyed("selection.mode", other.parse::<SinrMode>())?),
    };
    config.eps_cap = g.u64("selection.eps_cap")?;
    config.sweep_variable = keyed("sweep.variable", g.text("sweep.variable")?.parse::<SweepVariable>())?;
    config.sweep_values = if settings.contains_key("sweep.values") {
        g.reals("sweep.values")?
    } else {
        vec![match config.sweep_variable {
            SweepVariable::Snr => config.snr_db,
            SweepVariable::Users => config.users as f64,
            SweepVariable::NRf => config.n_rf as f64,
        }]
    };
    config.csi = keyed("csi.mode", g.text("csi.mode")?.parse::<CsiMode>())?;
    config.master_seed = g.u64("run.seed")?;
    config.trials_min = g.u64("run.trials_min")?;
    config.trials_max = g.u64("run.trials_max")?;
    config.error_events_target = g.u64("run.error_events_target")?;
    config.symbols_per_block = g.count("run.symbols_per_block")?;
    config.chunk = g.count("run.chunk")?;
    config.workers = if settings.contains_key("run.workers") {
        Some(g.count("run.workers")?)
    } else {
        None
    };
    config.validate().map_err(|e| CliError::Config(e.to_string()))?;

    let out_dir = if settings.contains_key("output.dir") {
        Some(PathBuf::from(g.text("output.dir")?))
    } else {
        None
    };
    Ok(Resolved {
        settings,
        config,
        preset,
        out_dir,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli(pairs: &[(&str, Value)]) -> Layer {
        pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
    }

    #[test]
    fn sparse_presets_resolve_to_table_values() {
        let r = resolve(None, Layer::new(), Some("6ghz-sparse"), false).unwrap();
        assert_eq!((r.config.grid.n1(), r.config.grid.n2()), (5, 3));
        assert_eq!((r.config.grid.w1(), r.config.grid.w2()), (3.0, 1.6));
        let r = resolve(None, Layer::new(), Some("26ghz-sparse"), false).unwrap();
        assert_eq!((r.config.grid.n1(), r.config.grid.n2()), (25, 13));
        match r.config.channel_model {
            ChannelModel::FiniteScattering(p) => assert_eq!((p.rice_k, p.n_paths), (7.0, 2)),
            other => panic!("unexpected model {other:?}"),
        }
    }

    #[test]
    fn compact_presets_need_acknowledgement() {
        let err = resolve(None, Layer::new(), Some("6ghz-compact"), false).unwrap_err();
        assert!(err.to_string().contains("--allow-compact"));
        let r = resolve(None, Layer::new(), Some("6ghz-compact"), true).unwrap();
        assert_eq!(r.config.grid.len(), 450);
        assert!(!r.config.methods.contains(&Method::Dps));
        assert!(resolve(None, Layer::new(), Some("5ghz"), false).is_err());
    }

    #[test]
    fn precedence_is_key_by_key() {
        let file = parse_layer(
            "preset = \"6ghz-sparse\"\n[system]\nusers = 6\nn_rf = 3\n[run]\nseed = 9\n",
        )
        .unwrap();
        let over = cli(&[("system.n_rf", Value::Integer(4))]);
        let r = resolve(Some(file), over, None, false).unwrap();
        assert_eq!(r.config.users, 6);
        assert_eq!(r.config.n_rf, 4);
        assert_eq!(r.config.master_seed, 9);
        assert_eq!(r.config.grid.len(), 15);
        assert_eq!(r.config.sweep_values, vec![35.0]);
    }

    #[test]
    fn diagnostics_name_the_key() {
        let err = parse_layer("[system]\nuserz = 3\n").unwrap_err();
        assert!(err.to_string().contains("system.userz"));
        let file = parse_layer("[system]\nusers = \"many\"\n").unwrap();
        let err = resolve(Some(file), Layer::new(), Some("6ghz-sparse"), false).unwrap_err();
        assert!(err.to_string().contains("system.users"));
        let err = resolve(None, Layer::new(), None, false).unwrap_err();
        assert!(err.to_string().contains("grid.n1"));
        let file = parse_layer("[selection]\nmethods = [\"ss\", \"greedy\"]\n").unwrap();
        let err = resolve(Some(file), Layer::new(), Some("6ghz-sparse"), false).unwrap_err();
        assert!(err.to_string().contains("ss, eps, ips, dps, external"), "{err}");
        assert!(matches!(parse_layer("[grid\n"), Err(CliError::Config(_))));
    }

    #[test]
    fn sweeps_and_modes() {
        let file = parse_layer(
            "[sweep]\nvariable = \"users\"\nvalues = [6, 8, 10]\n[csi]\nmode = \"perfect\"\n[selection]\nmode = \"successive\"\nmethods = \"ss,ips\"\n",
        )
        .unwrap();
        let r = resolve(Some(file), Layer::new(), Some("6ghz-sparse"), false).unwrap();
        assert_eq!(r.config.sweep_variable, SweepVariable::Users);
        assert_eq!(r.config.sweep_values, vec![6.0, 8.0, 10.0]);
        assert_eq!(r.config.csi, CsiMode::Perfect);
        assert_eq!(r.config.sinr_mode, Some(SinrMode::Successive));
        assert_eq!(r.config.methods, vec![Method::Ss, Method::Ips]);
    }
}
