//! Flat `key = value` configuration with dotted sections.
//!
//! A file is read on top of the built-in defaults, so it only needs the keys it
//! changes. Unknown keys and malformed values are errors carrying the line number.

use num_complex::Complex64;
use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::forward::{Bump, Potential};
use crate::geometry::DiskGrid;

/// Built-in configuration, selected by `--config default`.
pub const DEFAULT_CONFIG: &str = "\
# grid shared by forward, cgo, reconstruct and stability
grid.radius = 1.0
grid.n_radial = 64
grid.n_angular = 256

# potential for forward / cgo / reconstruct
potential.v = zero

cgo.z0 = 0.1, 0.05
cgo.lambda = 20, 0
cgo.tol = 1e-10
cgo.k_max = 64

# geometric lambda schedule base * 2^k, k < count
schedule.base = 20
schedule.count = 7
schedule.arg = 0

reconstruct.z0 = 0, 0

# v2 = v1 + t * bump2 over a geometric t grid
sweep.v1 = bump(0, 0, 0.5, 1, 3)
sweep.bump2 = bump(0.2, 0.1, 0.3, 1, 3)
sweep.t_min = 1e-3
sweep.t_max = 1e-1
sweep.t_count = 8
sweep.gamma = auto
sweep.alpha = 0.1
sweep.norm = both
sweep.z0 = 0, 0

lemma1.radius = 0.5
lemma1.z0 = 0, 0; 0.05, 0; 0, 0.08
lemma1.lambdas = 10, 20, 40, 80, 160, 320, 640, 1280
lemma1.probes = 8
lemma1.p = 4
lemma1.slope_min = -0.6
lemma1.slope_max = -0.4

lemma2.n_radial = 1024
lemma2.n_angular = 1024
lemma2.v = bump(0, 0, 0.4, 1, 3)
lemma2.z0 = 0, 0
lemma2.max_error = 0.05

lemma3.n_radial = 1024
lemma3.n_angular = 1024
lemma3.z0 = 0, 0
lemma3.w1 = bump(0.05, 0, 0.35, 1, 3)
lemma3.w2 = bump(0, 0.04, 0.36, 1, 3) + 0.5 * bump(-0.05, -0.05, 0.3, 1, 3)
lemma3.w3 = bump(0.03, -0.03, 0.35, 1, 3) - 0.5 * bump(0.1, 0.1, 0.25, 1, 3)

lemma4.n_radial = 128
lemma4.n_angular = 512
lemma4.v = bump(0, 0, 0.5, 20, 3)
lemma4.z0 = 0.05, 0
lemma4.lambdas = 10, 20, 40
lemma4.tol = 1e-12
lemma4.k_max = 4
lemma4.ratio_tolerance = 0.2

alessandrini.v1 = bump(0, 0, 0.5, 1, 3)
alessandrini.v2 = bump(0, 0, 0.5, 1, 3) + bump(0, 0, 0.3, 1, 3)
alessandrini.z0 = 0, 0
alessandrini.lambda = 20
alessandrini.sweep = 5, 10, 20
alessandrini.refine = 2
alessandrini.max_gap = 0.1
alessandrini.decomposition_tolerance = 1e-10
";

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
}

/// Parsed configuration; every lookup reports the line the value came from.
#[derive(Debug, Clone)]
pub struct Config {
    entries: BTreeMap<String, Entry>,
    source: String,
}

fn config_err(line: usize, message: impl Into<String>) -> Error {
    Error::Config { line, message: message.into() }
}

fn parse_lines(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| config_err(line, format!("expected `key = value`, got `{body}`")))?;
        let (key, value) = (key.trim(), value.trim());
        let well_formed = key.split('.').count() == 2
            && key.split('.').all(|part| {
                !part.is_empty() && part.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
            });
        if !well_formed {
            return Err(config_err(line, format!("key `{key}` must be `section.name`")));
        }
        if value.is_empty() {
            return Err(config_err(line, format!("empty value for `{key}`")));
        }
        out.push((line, key.to_string(), value.to_string()));
    }
    Ok(out)
}

impl Config {
    pub fn default_config() -> Self {
        Self::parse_with_defaults("").expect("built-in config parses")
    }

    /// Parses `text` over the defaults; keys absent from the defaults are rejected.
    pub fn parse_with_defaults(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (_, key, value) in parse_lines(DEFAULT_CONFIG)? {
            entries.insert(key, Entry { value, line: 0 });
        }
        let mut seen = BTreeMap::new();
        for (line, key, value) in parse_lines(text)? {
            if !entries.contains_key(&key) {
                return Err(config_err(line, format!("unknown key `{key}`")));
            }
            if let Some(first) = seen.insert(key.clone(), line) {
                return Err(config_err(line, format!("`{key}` already set on line {first}")));
            }
            entries.insert(key, Entry { value, line });
        }
        let cfg = Self { entries, source: text.to_string() };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `default` selects the built-in configuration; anything else is a file path.
    pub fn load(name: &str) -> Result<Self> {
        if name == "default" {
            Ok(Self::default_config())
        } else {
            Self::parse_with_defaults(&std::fs::read_to_string(Path::new(name))?)
        }
    }

    /// Overrides one key programmatically (line 0 in error messages).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match self.entries.get_mut(key) {
            Some(e) => {
                e.value = value.trim().to_string();
                e.line = 0;
            }
            None => return Err(config_err(0, format!("unknown key `{key}`"))),
        }
        self.validate()
    }

    /// The text the configuration was read from, without the defaults.
    pub fn source(&self) -> &str {
        &self.source
    }

    /// Effective key/value pairs, sorted by key.
    pub fn effective(&self) -> BTreeMap<String, String> {
        self.entries.iter().map(|(k, e)| (k.clone(), e.value.clone())).collect()
    }

    fn validate(&self) -> Result<()> {
        // cheap checks so that a bad value fails at load time, not mid-run
        self.grid()?;
        for key in ["potential.v", "sweep.v1", "sweep.bump2", "lemma2.v", "lemma3.w1", "lemma3.w2"] {
            self.potential(key)?;
        }
        for key in ["lemma3.w3", "lemma4.v", "alessandrini.v1", "alessandrini.v2"] {
            self.potential(key)?;
        }
        let norm = self.string("sweep.norm")?;
        if !matches!(norm.as_str(), "inf" | "one" | "both") {
            return Err(self.err("sweep.norm", "expected inf, one or both"));
        }
        self.gamma()?;
        Ok(())
    }

    fn entry(&self, key: &str) -> Result<&Entry> {
        self.entries.get(key).ok_or_else(|| config_err(0, format!("missing key `{key}`")))
    }

    fn err(&self, key: &str, message: impl std::fmt::Display) -> Error {
        let line = self.entries.get(key).map_or(0, |e| e.line);
        config_err(line, format!("`{key}`: {message}"))
    }

    pub fn string(&self, key: &str) -> Result<String> {
        Ok(self.entry(key)?.value.clone())
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        let raw = &self.entry(key)?.value;
        let x: f64 = raw.parse().map_err(|_| self.err(key, format!("`{raw}` is not a number")))?;
        if !x.is_finite() {
            return Err(self.err(key, "must be finite"));
        }
        Ok(x)
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        let raw = &self.entry(key)?.value;
        raw.parse().map_err(|_| self.err(key, format!("`{raw}` is not a non-negative integer")))
    }

    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>> {
        self.entry(key)?
            .value
            .split(',')
            .map(|s| {
                let s = s.trim();
                s.parse::<f64>().map_err(|_| self.err(key, format!("`{s}` is not a number")))
            })
            .collect()
    }

    /// `re, im` or a bare real.
    pub fn complex(&self, key: &str) -> Result<Complex64> {
        parse_complex(&self.entry(key)?.value).map_err(|m| self.err(key, m))
    }

    /// `re, im; re, im; …`.
    pub fn complex_list(&self, key: &str) -> Result<Vec<Complex64>> {
        self.entry(key)?
            .value
            .split(';')
            .map(|s| parse_complex(s).map_err(|m| self.err(key, m)))
            .collect()
    }

    pub fn potential(&self, key: &str) -> Result<PotentialSpec> {
        PotentialSpec::parse(&self.entry(key)?.value).map_err(|m| self.err(key, m))
    }

    pub fn grid(&self) -> Result<Arc<DiskGrid>> {
        let g = DiskGrid::new(
            self.f64("grid.radius")?,
            self.usize("grid.n_radial")?,
            self.usize("grid.n_angular")?,
        )
        .map_err(|e| self.err("grid.n_radial", e))?;
        Ok(Arc::new(g))
    }

    /// `schedule.base · 2^k · e^{i arg}`, `k < schedule.count`.
    pub fn schedule(&self) -> Result<Vec<Complex64>> {
        let base = self.f64("schedule.base")?;
        if base < 1.0 {
            return Err(self.err("schedule.base", "must be >= 1"));
        }
        let arg = self.f64("schedule.arg")?;
        Ok((0..self.usize("schedule.count")?)
            .map(|k| Complex64::from_polar(base * 2f64.powi(k as i32), arg))
            .collect())
    }

    /// `sweep.gamma`, with `auto` meaning `0.2/(2L² + 1)`, `L = 2R`.
    pub fn gamma(&self) -> Result<f64> {
        let limit = gamma_limit(self.f64("grid.radius")?);
        let raw = self.string("sweep.gamma")?;
        if raw == "auto" {
            return Ok(0.2 * limit);
        }
        let g = self.f64("sweep.gamma")?;
        if !(g > 0.0 && g < limit) {
            return Err(self.err("sweep.gamma", format!("must lie in (0, {limit:.6}) for this disk")));
        }
        Ok(g)
    }
}

/// `(2L² + 1)⁻¹` with `L = max |z − z₀|` over `z ∈ ∂D`, `z₀ ∈ D`, i.e. `L = 2R`.
pub fn gamma_limit(radius: f64) -> f64 {
    let l = 2.0 * radius;
    1.0 / (2.0 * l * l + 1.0)
}

fn parse_complex(s: &str) -> std::result::Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().map_err(|_| format!("`{t}` is not a number"));
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(format!("`{}` is not `re, im`", s.trim())),
    }
}

/// Potential description: `zero`, `const(c)`, or a signed sum of
/// `[k *] bump(cx, cy, rho, amplitude, power)` terms.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    Zero,
    Constant(f64),
    Bumps(Vec<(f64, Bump)>),
}

impl PotentialSpec {
    pub fn parse(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        if s == "zero" {
            return Ok(Self::Zero);
        }
        if let Some(inner) = s.strip_prefix("const(").and_then(|r| r.strip_suffix(')')) {
            let c = inner.trim().parse::<f64>().map_err(|_| format!("bad constant `{inner}`"))?;
            return Ok(Self::Constant(c));
        }
        let mut terms = Vec::new();
        for (sign, term) in split_terms(s)? {
            let (coef, call) = match term.split_once('*') {
                Some((k, call)) => {
                    let k = k.trim().parse::<f64>().map_err(|_| format!("bad coefficient `{k}`"))?;
                    (k, call.trim())
                }
                None => (1.0, term),
            };
            let args = call
                .strip_prefix("bump(")
                .and_then(|r| r.strip_suffix(')'))
                .ok_or_else(|| format!("expected zero, const(c) or bump(...), got `{call}`"))?;
            let nums = args
                .split(',')
                .map(|a| a.trim().parse::<f64>().map_err(|_| format!("bad bump argument `{}`", a.trim())))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            let [cx, cy, rho, amplitude, power] = nums[..] else {
                return Err(format!("bump takes 5 arguments, got {}", nums.len()));
            };
            if !(power >= 1.0 && power.fract() == 0.0) {
                return Err(format!("bump power must be a positive integer, got {power}"));
            }
            if !(rho > 0.0) {
                return Err(format!("bump radius must be positive, got {rho}"));
            }
            let bump = Bump { center: (cx, cy), rho, amplitude, power: power as u32 };
            terms.push((sign * coef, bump));
        }
        Ok(Self::Bumps(terms))
    }

    pub fn build(&self, grid: &Arc<DiskGrid>) -> Result<Potential> {
        match self {
            Self::Zero => Ok(Potential::zero(grid)),
            Self::Constant(c) => Ok(Potential::constant(grid, *c)),
            Self::Bumps(terms) => Potential::from_bumps(grid, terms),
        }
    }

    /// Supremum of `|v|` when it is known in closed form (a single bump or a constant).
    pub fn exact_sup(&self) -> Option<f64> {
        match self {
            Self::Zero => Some(0.0),
            Self::Constant(c) => Some(c.abs()),
            Self::Bumps(t) if t.len() == 1 => Some((t[0].0 * t[0].1.amplitude).abs()),
            Self::Bumps(_) => None,
        }
    }
}

/// Splits `a + b - c` at top-level signs, keeping signs inside parentheses and exponents.
fn split_terms(s: &str) -> std::result::Result<Vec<(f64, &str)>, String> {
    let bytes = s.as_bytes();
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut sign = 1.0;
    let mut start = 0;
    for (i, &b) in bytes.iter().enumerate() {
        match b {
            b'(' => depth += 1,
            b')' => depth -= 1,
            b'+' | b'-' if depth == 0 => {
                let prev = s[..i].trim_end();
                let in_exponent = prev.ends_with(['e', 'E']) && prev.len() > 1;
                if in_exponent || prev.ends_with('*') {
                    continue;
                }
                let term = s[start..i].trim();
                if !term.is_empty() {
                    out.push((sign, term));
                } else if !out.is_empty() {
                    return Err(format!("dangling sign in `{s}`"));
                }
                sign = if b == b'-' { -1.0 } else { 1.0 };
                start = i + 1;
            }
            _ => {}
        }
        if depth < 0 {
            return Err(format!("unbalanced parentheses in `{s}`"));
        }
    }
    if depth != 0 {
        return Err(format!("unbalanced parentheses in `{s}`"));
    }
    let last = s[start..].trim();
    if last.is_empty() {
        return Err(format!("missing term in `{s}`"));
    }
    out.push((sign, last));
    Ok(out)
}
