//! Run configuration: defaults, a flat `key = value` file, flag overrides.

use std::path::{Path, PathBuf};

use serde::Serialize;
use u21_core::localfield::max_window;
use u21_core::FieldConfig;

pub const SUITES: &[&str] = &[
    "unitarity",
    "lemma-2.1",
    "lemma-2.2",
    "lemma-3.3",
    "prop-3.4",
    "cor-3.5",
    "s-criterion",
    "lemma-3.7",
    "lemma-3.8",
    "dimensions",
    "basis",
    "whittaker",
    "eq-d",
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunConfig {
    pub p: u64,
    pub epsilon: Option<u64>,
    pub window: u32,
    pub suites: Vec<String>,
    pub n_min: u32,
    pub n_max: u32,
    /// `None` is the automatic level policy.
    pub m: Option<u32>,
    pub chi: String,
    pub x: [(i64, i64); 2],
    #[serde(skip)]
    pub out: Option<PathBuf>,
    pub budget: u64,
    pub closure_budget: u64,
    pub self_test: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            p: 3,
            epsilon: None,
            window: 12,
            suites: SUITES.iter().map(|s| s.to_string()).collect(),
            n_min: 0,
            n_max: 3,
            m: None,
            chi: "unramified".into(),
            x: [(2, 3), (3, 5)],
            out: None,
            budget: 200_000_000,
            closure_budget: 3_000_000,
            self_test: false,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, String> {
    v.trim().parse().map_err(|_| format!("{key}: cannot parse `{v}`"))
}

fn parse_rational(v: &str) -> Result<(i64, i64), String> {
    let (a, b) = v.split_once('/').unwrap_or((v, "1"));
    let a: i64 = parse_num("x", a)?;
    let b: i64 = parse_num("x", b)?;
    if a == 0 || b == 0 {
        return Err(format!("x: `{v}` must be a non-zero rational"));
    }
    Ok((a, b))
}

/// `a..b` (inclusive) or a single level.
pub fn parse_range(v: &str) -> Result<(u32, u32), String> {
    let v = v.trim();
    let (a, b) = match v.split_once("..") {
        Some((a, b)) => (a, b.trim_start_matches('=')),
        None => (v, v),
    };
    let (a, b): (u32, u32) = (parse_num("n", a)?, parse_num("n", b)?);
    if a > b {
        return Err(format!("n: empty range `{v}`"));
    }
    Ok((a, b))
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let v = value.trim();
        match key.trim() {
            "p" => self.p = parse_num("p", v)?,
            "epsilon" => self.epsilon = if v == "auto" { None } else { Some(parse_num("epsilon", v)?) },
            "window" => self.window = parse_num("window", v)?,
            "suites" | "suite" => {
                self.suites = if v == "all" {
                    SUITES.iter().map(|s| s.to_string()).collect()
                } else {
                    v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
                }
            }
            "n" => (self.n_min, self.n_max) = parse_range(v)?,
            "m" => self.m = if v == "auto" { None } else { Some(parse_num("m", v)?) },
            "chi" => self.chi = v.to_string(),
            "x" => {
                let parts: Vec<&str> = v.split(',').collect();
                if parts.len() != 2 {
                    return Err("x: expected two specializations `a/b,c/d`".into());
                }
                self.x = [parse_rational(parts[0])?, parse_rational(parts[1])?];
            }
            "out" => self.out = Some(PathBuf::from(v)),
            "budget" => self.budget = parse_num("budget", v)?,
            "closure_budget" => self.closure_budget = parse_num("closure_budget", v)?,
            "self_test" => self.self_test = parse_num("self_test", v)?,
            other => return Err(format!("unknown config key `{other}`")),
        }
        Ok(())
    }

    pub fn load_file(&mut self, path: &Path) -> Result<(), String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("{}:{}: expected `key = value`", path.display(), i + 1))?;
            self.set(k, v).map_err(|e| format!("{}:{}: {e}", path.display(), i + 1))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), String> {
        FieldConfig::new(self.p, self.epsilon, self.window).map_err(|e| e.to_string())?;
        if self.window + 2 > max_window(self.p) {
            return Err(format!("window {} leaves no room for the window+2 check at p = {}", self.window, self.p));
        }
        if self.window < 6 {
            return Err("window must be at least 6".into());
        }
        for s in &self.suites {
            if !SUITES.contains(&s.as_str()) {
                return Err(format!("unknown suite `{s}`"));
            }
        }
        if self.suites.is_empty() {
            return Err("no suites requested".into());
        }
        if self.n_max > 8 {
            return Err(format!("n up to {} is beyond the point budget", self.n_max));
        }
        Ok(())
    }

    pub fn field(&self, extra_window: u32) -> FieldConfig {
        FieldConfig::new(self.p, self.epsilon, self.window + extra_window).expect("validated")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_and_overrides() {
        let dir = std::env::temp_dir().join(format!("u21-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let f = dir.join("run.cfg");
        std::fs::write(&f, "# comment\np = 5\nn = 0..2\nsuites = lemma-3.3, eq-d\nx = 1/2, 4/7\n").unwrap();
        let mut c = RunConfig::default();
        c.load_file(&f).unwrap();
        assert_eq!((c.p, c.n_min, c.n_max), (5, 0, 2));
        assert_eq!(c.suites, vec!["lemma-3.3", "eq-d"]);
        assert_eq!(c.x, [(1, 2), (4, 7)]);
        c.set("p", "3").unwrap();
        assert_eq!(c.p, 3);
        c.validate().unwrap();
        assert!(c.set("bogus", "1").is_err());
        c.set("p", "9").unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("0..3").unwrap(), (0, 3));
        assert_eq!(parse_range("0..=3").unwrap(), (0, 3));
        assert_eq!(parse_range("2").unwrap(), (2, 2));
        assert!(parse_range("3..1").is_err());
    }
}
