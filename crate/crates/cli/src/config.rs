//! Flat `key = value` experiment configuration.
//!
//! Grammar, one entry per line:
//!
//! ```text
//! line    := blank | comment | entry
//! comment := '#' any*
//! entry   := key ws* '=' ws* value ws* comment?
//! key     := segment ('.' segment)*      segment := [a-z0-9_]+
//! value   := any character except '#', trimmed; lists are comma separated
//! ```
//!
//! Keys are unique. Every key must appear in [`KNOWN_KEYS`] or match one of
//! the [`FAMILIES`].

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::CliError;

/// Fixed keys with a one-line description, printed by `--help`.
pub const KNOWN_KEYS: &[(&str, &str)] = &[
    ("potential.name", "builtin potential (cubic, double_well, triple_well, quadratic, coupled_double_well)"),
    ("potential.search_box", "search box for minima: 'lo, hi' for every axis or 'lo_1, hi_1, .., lo_n, hi_n' (default -3, 3)"),
    ("potential.seed_grid", "Newton seeds per axis of the search box (default 41)"),
    ("grid.d", "space dimension"),
    ("grid.r_max", "outer radius"),
    ("grid.n_nodes", "number of radial nodes"),
    ("grid.dr", "radial spacing, instead of grid.n_nodes"),
    ("integrator.scheme", "imex_cn (default) or explicit_rk4"),
    ("integrator.dt", "time step"),
    ("integrator.t_end", "final time"),
    ("integrator.outer_bc", "neumann_zero (default) or dirichlet_to_minimum"),
    ("integrator.observe_every", "observer cadence in steps (default 1)"),
    ("initial.kind", "plateau, bump, homogeneous or front_seed"),
    ("diagnostics.m", "reference minimum of the diagnostics (default: nearest to initial.params.outer)"),
    ("observers", "comma list of tracker, energy, firewall, residual, frame, dissipation"),
    ("snapshots.every", "snapshot interval in time units (default t_end / 100)"),
    ("analysis.fit_terrace", "run: fit a terrace to the snapshots after the run (default false)"),
    ("analysis.audits", "run: also write the audit reports (default false)"),
    ("front.m_minus", "state behind the front (nearest minimum is used)"),
    ("front.m_plus", "invaded state"),
    ("front.bracket", "speed bracket 'lo, hi' (default symmetric, from a bound on -V'')"),
    ("front.normalize", "true (default) or false"),
    ("terrace.t_a", "start of the fit window (default t_end / 2)"),
    ("terrace.t_b", "end of the fit window (default t_end)"),
];

/// Open families: `potential.params.<p>`, `initial.params.<p>` and
/// `observer.<kind>.<p>`.
pub const FAMILIES: &[&str] = &[
    "potential.params.<p>",
    "initial.params.<p>",
    "observer.<kind>.<p>",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    entries: Vec<(String, String)>,
    map: BTreeMap<String, String>,
}

fn valid_key(key: &str) -> bool {
    !key.is_empty()
        && key.split('.').all(|s| {
            !s.is_empty()
                && s.chars()
                    .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
        })
}

fn known(key: &str) -> bool {
    if KNOWN_KEYS.iter().any(|(k, _)| *k == key) {
        return true;
    }
    let parts: Vec<&str> = key.split('.').collect();
    matches!(
        parts.as_slice(),
        ["potential", "params", _] | ["initial", "params", _] | ["observer", _, _]
    )
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = Vec::new();
        let mut map = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected 'key = value'", no + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !valid_key(key) {
                return Err(CliError::Config(format!(
                    "line {}: malformed key '{key}'",
                    no + 1
                )));
            }
            if !known(key) {
                return Err(CliError::Config(format!(
                    "line {}: unknown key '{key}'",
                    no + 1
                )));
            }
            if value.is_empty() {
                return Err(CliError::Config(format!("key '{key}' has an empty value")));
            }
            if map.insert(key.to_string(), value.to_string()).is_some() {
                return Err(CliError::Config(format!("duplicate key '{key}'")));
            }
            entries.push((key.to_string(), value.to_string()));
        }
        Ok(Self { entries, map })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// `key = value` per entry, in file order.
    pub fn echo(&self) -> Vec<String> {
        self.entries
            .iter()
            .map(|(k, v)| format!("{k} = {v}"))
            .collect()
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    pub fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    pub fn require(&self, key: &str) -> Result<&str, CliError> {
        self.raw(key)
            .ok_or_else(|| CliError::Config(format!("missing required key '{key}'")))
    }

    pub fn get<V: FromStr>(&self, key: &str) -> Result<Option<V>, CliError> {
        self.raw(key)
            .map(|s| {
                s.parse::<V>()
                    .map_err(|_| CliError::Config(format!("key '{key}': cannot parse '{s}'")))
            })
            .transpose()
    }

    pub fn get_or<V: FromStr>(&self, key: &str, default: V) -> Result<V, CliError> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn req<V: FromStr>(&self, key: &str) -> Result<V, CliError> {
        self.require(key)?;
        Ok(self.get(key)?.expect("checked"))
    }

    pub fn list(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        self.raw(key)
            .map(|s| {
                s.split(',')
                    .map(|x| {
                        x.trim().parse::<f64>().map_err(|_| {
                            CliError::Config(format!("key '{key}': cannot parse '{}'", x.trim()))
                        })
                    })
                    .collect()
            })
            .transpose()
    }

    pub fn req_list(&self, key: &str) -> Result<Vec<f64>, CliError> {
        self.require(key)?;
        Ok(self.list(key)?.expect("checked"))
    }

    pub fn words(&self, key: &str) -> Vec<String> {
        self.raw(key)
            .map(|s| {
                s.split(',')
                    .map(|w| w.trim().to_string())
                    .filter(|w| !w.is_empty())
                    .collect()
            })
            .unwrap_or_default()
    }

    /// Parameters of a `prefix.<name>` family, for instance potential parameters.
    pub fn family(&self, prefix: &str) -> Result<BTreeMap<String, f64>, CliError> {
        let mut out = BTreeMap::new();
        for (k, v) in &self.map {
            let Some(name) = k.strip_prefix(prefix) else {
                continue;
            };
            if name.contains('.') {
                continue;
            }
            let x = v
                .parse::<f64>()
                .map_err(|_| CliError::Config(format!("key '{k}': cannot parse '{v}'")))?;
            out.insert(name.to_string(), x);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_entries_and_echoes_in_order() {
        let cfg =
            Config::parse("# header\npotential.name = cubic\n\npotential.params.a=0.25  # tail\n")
                .unwrap();
        assert_eq!(
            cfg.echo(),
            vec!["potential.name = cubic", "potential.params.a = 0.25"]
        );
        assert_eq!(cfg.req::<f64>("potential.params.a").unwrap(), 0.25);
        assert_eq!(cfg.family("potential.params.").unwrap().len(), 1);
    }

    #[test]
    fn rejects_bad_lines() {
        for text in [
            "potential.name",
            "Potential.name = cubic",
            "potential.a = 0.25",
            "grid.dx = 0.1",
            "grid.d = 3\ngrid.d = 2",
            "grid.d =",
        ] {
            assert!(
                matches!(Config::parse(text), Err(CliError::Config(_))),
                "{text}"
            );
        }
    }

    #[test]
    fn typed_getters_name_the_key() {
        let cfg = Config::parse("grid.d = three\nfront.bracket = 0, x").unwrap();
        let e = cfg.req::<usize>("grid.d").unwrap_err().to_string();
        assert!(e.contains("grid.d"), "{e}");
        assert!(cfg
            .list("front.bracket")
            .unwrap_err()
            .to_string()
            .contains("front.bracket"));
        let e = cfg.require("potential.name").unwrap_err().to_string();
        assert!(e.contains("potential.name"), "{e}");
    }

    #[test]
    fn observer_family_is_open() {
        let cfg = Config::parse("observers = residual\nobserver.residual.c = 0.25").unwrap();
        assert_eq!(cfg.words("observers"), vec!["residual"]);
        assert_eq!(cfg.family("observer.residual.").unwrap()["c"], 0.25);
    }
}
