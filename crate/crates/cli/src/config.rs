//! Flat `key = value` configuration with typed accessors.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{source_name}:{line}: {reason}")]
    Parse {
        source_name: String,
        line: usize,
        reason: String,
    },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("key `{key}`: cannot parse `{value}`: {reason}")]
    Value {
        key: String,
        value: String,
        reason: String,
    },
    #[error("{0}")]
    Invalid(String),
}

/// Every recognised key with its default value and a one-line description.
pub const DEFAULTS: &[(&str, &str, &str)] = &[
    ("eps_s1r", "0.3", "erasure probability source 1 -> relay"),
    ("eps_s2r", "0.3", "erasure probability source 2 -> relay"),
    ("eps_s1d", "0.5", "erasure probability source 1 -> destination"),
    ("eps_s2d", "0.5", "erasure probability source 2 -> destination"),
    ("eps_rd", "0.2", "erasure probability relay -> destination"),
    ("p", "0", "correlation: probability that a source bit pair is forced equal"),
    ("tie_break", "conditional", "Rs1 on a flat optimum: conditional | symmetric"),
    ("punctured", "true", "puncture systematic bits (forced when p > 0)"),
    ("code", "a", "ensemble: a | b | custom"),
    ("l1", "6", "custom: first-layer variable degree, user 1"),
    ("r1", "10", "custom: first-layer check degree, user 1"),
    ("l2", "6", "custom: first-layer variable degree, user 2"),
    ("r2", "10", "custom: first-layer check degree, user 2"),
    ("ls1", "2", "custom: syndrome-layer variable degree, user 1 (0 = none)"),
    ("rs1", "10", "custom: syndrome-layer check degree, user 1"),
    ("ls2", "2", "custom: syndrome-layer variable degree, user 2 (0 = none)"),
    ("rs2", "10", "custom: syndrome-layer check degree, user 2"),
    ("m1", "300", "custom: variable nodes per position, user 1"),
    ("m2", "300", "custom: variable nodes per position, user 2"),
    ("chain_length", "600", "coupled chain length L"),
    ("window", "10", "coupling window w"),
    ("r_max", "20", "design: largest check degree tried"),
    ("m_base", "100", "design: smallest lifting size"),
    ("de_mode", "rays", "de: rays | point (at eps_s1d, eps_s2d) | lemma1"),
    ("rays", "1:0;0:1;1:1", "de: ray directions from the origin, `x:y` separated by `;`"),
    ("windows", "", "de: comma separated windows to sweep (empty = window)"),
    ("bisect_tol", "1e-4", "de: bisection tolerance along a ray"),
    ("max_iters", "50000", "de: iteration cap per run"),
    ("relay", "false", "de/region/exit-surface: analyse the relay decoder"),
    ("lemma_iters", "200", "de lemma1: iterations compared"),
    ("step", "0.02", "region/exit-surface: grid step"),
    ("seed", "1", "master seed"),
    ("trials", "100", "simulate: trials per point"),
    ("sweep_from", "0.4", "simulate: first ray parameter"),
    ("sweep_to", "0.6", "simulate: last ray parameter"),
    ("sweep_points", "5", "simulate: number of points"),
    ("sweep_dir", "1:1", "simulate: (eps_s1d, eps_s2d) direction"),
];

#[derive(Debug, Clone)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            values: DEFAULTS
                .iter()
                .map(|(k, v, _)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }
}

fn known(key: &str) -> bool {
    DEFAULTS.iter().any(|(k, _, _)| *k == key)
}

impl Config {
    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str, source_name: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |reason: String| ConfigError::Parse {
                source_name: source_name.to_string(),
                line: i + 1,
                reason,
            };
            let Some((k, v)) = line.split_once('=') else {
                return Err(err(format!("expected `key = value`, got `{line}`")));
            };
            let k = k.trim();
            if !known(k) {
                return Err(err(format!("unknown key `{k}`")));
            }
            self.values.insert(k.to_string(), v.trim().to_string());
        }
        Ok(())
    }

    pub fn set(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let Some((k, v)) = assignment.split_once('=') else {
            return Err(ConfigError::Invalid(format!(
                "--set expects key=value, got `{assignment}`"
            )));
        };
        let k = k.trim();
        if !known(k) {
            return Err(ConfigError::UnknownKey(k.to_string()));
        }
        self.values.insert(k.to_string(), v.trim().to_string());
        Ok(())
    }

    pub fn raw(&self, key: &str) -> &str {
        self.values
            .get(key)
            .unwrap_or_else(|| panic!("key `{key}` has no default"))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        let v = self.raw(key);
        v.parse().map_err(|e: T::Err| ConfigError::Value {
            key: key.to_string(),
            value: v.to_string(),
            reason: e.to_string(),
        })
    }

    pub fn get_list<T: FromStr>(&self, key: &str, sep: char) -> Result<Vec<T>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        let v = self.raw(key);
        v.split(sep)
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse().map_err(|e: T::Err| ConfigError::Value {
                    key: key.to_string(),
                    value: v.to_string(),
                    reason: e.to_string(),
                })
            })
            .collect()
    }

    /// Parses `x:y` pairs separated by `;`.
    pub fn get_directions(&self, key: &str) -> Result<Vec<(f64, f64)>, ConfigError> {
        let v = self.raw(key);
        let bad = |reason: &str| ConfigError::Value {
            key: key.to_string(),
            value: v.to_string(),
            reason: reason.to_string(),
        };
        v.split(';')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                let (x, y) = s.split_once(':').ok_or_else(|| bad("expected `x:y`"))?;
                let x: f64 = x.trim().parse().map_err(|_| bad("not a number"))?;
                let y: f64 = y.trim().parse().map_err(|_| bad("not a number"))?;
                Ok((x, y))
            })
            .collect()
    }

    /// All keys with their current values, as a loadable config file.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, _, help) in DEFAULTS {
            let _ = writeln!(out, "# {help}");
            let _ = writeln!(out, "{k} = {}", self.raw(k));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_override() {
        let mut c = Config::default();
        c.apply_text("# comment\np = 0.2\n\ncode = b # trailing\n", "f").unwrap();
        assert_eq!(c.get::<f64>("p").unwrap(), 0.2);
        assert_eq!(c.raw("code"), "b");
        c.set("p=0.3").unwrap();
        assert_eq!(c.get::<f64>("p").unwrap(), 0.3);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let mut c = Config::default();
        let e = c.apply_text("p = 0\nbogus = 1\n", "cfg.txt").unwrap_err();
        assert_eq!(e.to_string(), "cfg.txt:2: unknown key `bogus`");
        let e = c.apply_text("p 0\n", "cfg.txt").unwrap_err();
        assert!(e.to_string().starts_with("cfg.txt:1:"));
    }

    #[test]
    fn rendered_defaults_reload() {
        let c = Config::default();
        let mut d = Config::default();
        d.apply_text(&c.render(), "defaults").unwrap();
        assert_eq!(c.render(), d.render());
    }

    #[test]
    fn directions() {
        let c = Config::default();
        assert_eq!(
            c.get_directions("rays").unwrap(),
            vec![(1.0, 0.0), (0.0, 1.0), (1.0, 1.0)]
        );
    }
}
