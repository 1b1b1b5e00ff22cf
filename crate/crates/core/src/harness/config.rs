//! Flat `key = value` experiment descriptions.
//!
//! ```text
//! # Experiment 1
//! name = exp1
//! arm_biases = 0.5, 0.6
//! horizon = 10000
//! replications = 1000
//! algorithms = exp3, exp3p1(delta=0.001), ucb1
//! delta = 0.05
//! base_seed = 2011
//! checkpoint_dense_until = 1000
//! checkpoint_ratio = 1.05
//! variance_measure = bound
//! output_dir = out/exp1
//! ```
//!
//! Algorithms: `exp3(epsilon=…, gamma=…, label=…)`, `egreedy(epsilon=…)`,
//! `exp3p1(delta=…)` and `ucb1`. Epsilon schedules are `experiment`,
//! `theorem3` or `power:SCALE:K_EXP:T_EXP`; gamma schedules add
//! `theorem3-min`, `inverse-epsilon` and `inf`.
//!
//! `variance_measure` selects the per-arm variance behind the normalized
//! variance columns: `bound` (default) or `exact`.

use std::path::{Path, PathBuf};

use crate::bandit::BernoulliBanditEnv;
use crate::error::{BanditError, Result};
use crate::strategies::{EpsilonSchedule, Exp3SpectrumParams, GammaSchedule, StrategySpec};

use super::aggregate::VarianceMeasure;
use super::schedule::CheckpointSchedule;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub arm_biases: Vec<f64>,
    pub horizon: u64,
    pub replications: u64,
    pub algorithms: Vec<StrategySpec>,
    /// Confidence level of the bound columns.
    pub delta: f64,
    pub base_seed: u64,
    pub checkpoints: CheckpointSchedule,
    pub variance_measure: VarianceMeasure,
    pub output_dir: PathBuf,
}

const KEYS: [&str; 11] = [
    "name",
    "arm_biases",
    "horizon",
    "replications",
    "algorithms",
    "delta",
    "base_seed",
    "checkpoint_dense_until",
    "checkpoint_ratio",
    "variance_measure",
    "output_dir",
];

impl ExperimentConfig {
    /// Two-arm Bernoulli game, 10^4 rounds, 1000 repetitions.
    pub fn exp1() -> Self {
        ExperimentConfig {
            name: "exp1".into(),
            arm_biases: vec![0.5, 0.6],
            horizon: 10_000,
            replications: 1000,
            algorithms: vec![StrategySpec::exp3(), StrategySpec::exp3p1(0.001), StrategySpec::ucb1()],
            delta: 0.05,
            base_seed: 2011,
            checkpoints: CheckpointSchedule::default(),
            variance_measure: VarianceMeasure::Bound,
            output_dir: PathBuf::from("out/exp1"),
        }
    }

    /// Same game, 10^7 rounds, 100 repetitions.
    pub fn exp2() -> Self {
        ExperimentConfig {
            name: "exp2".into(),
            horizon: 10_000_000,
            replications: 100,
            output_dir: PathBuf::from("out/exp2"),
            ..Self::exp1()
        }
    }

    /// 10^6 rounds and 20 repetitions.
    pub fn exp2_desk() -> Self {
        ExperimentConfig {
            name: "exp2-desk".into(),
            horizon: 1_000_000,
            replications: 20,
            output_dir: PathBuf::from("out/exp2-desk"),
            ..Self::exp2()
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "exp1" => Ok(Self::exp1()),
            "exp2" => Ok(Self::exp2()),
            "exp2-desk" => Ok(Self::exp2_desk()),
            other => Err(BanditError::param(format!(
                "unknown preset '{other}' (expected exp1, exp2 or exp2-desk)"
            ))),
        }
    }

    pub fn env(&self) -> Result<BernoulliBanditEnv> {
        BernoulliBanditEnv::new(self.arm_biases.clone())
    }

    pub fn validate(&self) -> Result<()> {
        let env = self.env()?;
        if self.horizon < 1 {
            return Err(BanditError::param("horizon must be at least 1"));
        }
        if self.replications < 1 {
            return Err(BanditError::param("replications must be at least 1"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(BanditError::param(format!("delta {} outside (0, 1)", self.delta)));
        }
        self.checkpoints.validate()?;
        let mut labels = std::collections::BTreeSet::new();
        for alg in &self.algorithms {
            alg.validate(env.biases().len())?;
            if !labels.insert(alg.label()) {
                return Err(BanditError::param(format!("duplicate algorithm label '{}'", alg.label())));
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| BanditError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig {
            name: String::new(),
            arm_biases: Vec::new(),
            horizon: 0,
            replications: 0,
            algorithms: Vec::new(),
            delta: 0.05,
            base_seed: 0,
            checkpoints: CheckpointSchedule::default(),
            variance_measure: VarianceMeasure::default(),
            output_dir: PathBuf::from("out"),
        };
        let mut seen = [false; KEYS.len()];
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| BanditError::Config { line: line_no, message };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected 'key = value', got '{line}'")))?;
            let (key, value) = (key.trim(), value.trim());
            let slot = KEYS
                .iter()
                .position(|k| *k == key)
                .ok_or_else(|| err(format!("unknown key '{key}'")))?;
            if std::mem::replace(&mut seen[slot], true) {
                return Err(err(format!("duplicate key '{key}'")));
            }
            match key {
                "name" => cfg.name = value.to_string(),
                "arm_biases" => {
                    cfg.arm_biases = split_top_level(value)
                        .iter()
                        .map(|s| parse_num(s).map_err(err))
                        .collect::<Result<_>>()?
                }
                "horizon" => cfg.horizon = parse_num(value).map_err(err)?,
                "replications" => cfg.replications = parse_num(value).map_err(err)?,
                "algorithms" => {
                    cfg.algorithms = split_top_level(value)
                        .iter()
                        .filter(|s| !s.is_empty())
                        .map(|s| parse_algorithm(s).map_err(err))
                        .collect::<Result<_>>()?
                }
                "delta" => cfg.delta = parse_num(value).map_err(err)?,
                "base_seed" => cfg.base_seed = parse_num(value).map_err(err)?,
                "checkpoint_dense_until" => cfg.checkpoints.dense_until = parse_num(value).map_err(err)?,
                "checkpoint_ratio" => cfg.checkpoints.ratio = parse_num(value).map_err(err)?,
                "variance_measure" => {
                    cfg.variance_measure = value.parse().map_err(|e: BanditError| err(e.to_string()))?
                }
                "output_dir" => cfg.output_dir = PathBuf::from(value),
                _ => unreachable!(),
            }
        }
        for required in ["arm_biases", "horizon", "replications", "algorithms"] {
            let slot = KEYS.iter().position(|k| *k == required).unwrap();
            if !seen[slot] {
                return Err(BanditError::Config {
                    line: 0,
                    message: format!("missing required key '{required}'"),
                });
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Text that [`ExperimentConfig::parse`] reads back to an equal value.
    pub fn to_text(&self) -> String {
        let biases: Vec<String> = self.arm_biases.iter().map(|b| format!("{b:?}")).collect();
        let algs: Vec<String> = self.algorithms.iter().map(algorithm_to_text).collect();
        format!(
            "name = {}\narm_biases = {}\nhorizon = {}\nreplications = {}\nalgorithms = {}\n\
             delta = {:?}\nbase_seed = {}\ncheckpoint_dense_until = {}\ncheckpoint_ratio = {:?}\n\
             variance_measure = {}\noutput_dir = {}\n",
            self.name,
            biases.join(", "),
            self.horizon,
            self.replications,
            algs.join(", "),
            self.delta,
            self.base_seed,
            self.checkpoints.dense_until,
            self.checkpoints.ratio,
            self.variance_measure.as_str(),
            self.output_dir.display(),
        )
    }
}

fn parse_num<T: std::str::FromStr>(s: &str) -> std::result::Result<T, String>
where
    T::Err: std::fmt::Display,
{
    // Accept 1e7-style integers for round counts.
    s.trim().parse::<T>().or_else(|e| {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.fract() == 0.0 && *v >= 0.0)
            .and_then(|v| format!("{v:.0}").parse::<T>().ok())
            .ok_or_else(|| format!("cannot parse '{s}': {e}"))
    })
}

/// Splits on commas that are not inside parentheses.
fn split_top_level(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for c in s.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(cur.trim().to_string());
                cur.clear();
                continue;
            }
            _ => {}
        }
        cur.push(c);
    }
    if !cur.trim().is_empty() || !out.is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}

fn parse_algorithm(s: &str) -> std::result::Result<StrategySpec, String> {
    let (name, args) = match s.split_once('(') {
        Some((name, rest)) => {
            let inner = rest
                .strip_suffix(')')
                .ok_or_else(|| format!("unbalanced parentheses in '{s}'"))?;
            (name.trim(), inner)
        }
        None => (s.trim(), ""),
    };
    let mut params = Vec::new();
    for kv in split_top_level(args).into_iter().filter(|kv| !kv.is_empty()) {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| format!("expected key=value in '{kv}'"))?;
        params.push((k.trim().to_string(), v.trim().to_string()));
    }
    let mut take = |key: &str| -> Option<String> {
        params
            .iter()
            .position(|(k, _)| k == key)
            .map(|i| params.remove(i).1)
    };
    let label = take("label");
    let spec = match name {
        "exp3" | "egreedy" => {
            let default = Exp3SpectrumParams::experiment();
            let epsilon = match take("epsilon") {
                Some(v) => parse_epsilon(&v)?,
                None => default.epsilon,
            };
            let gamma = match (name, take("gamma")) {
                ("egreedy", None) => GammaSchedule::Infinity,
                ("egreedy", Some(_)) => return Err("egreedy takes no gamma".into()),
                (_, Some(v)) => parse_gamma(&v)?,
                (_, None) => default.gamma,
            };
            let default_label = if name == "egreedy" { "EGREEDY" } else { "EXP3" };
            StrategySpec::Exp3 {
                label: label.unwrap_or_else(|| default_label.into()),
                params: Exp3SpectrumParams { epsilon, gamma },
            }
        }
        "exp3p1" => {
            let delta = take("delta")
                .map(|v| parse_num::<f64>(&v))
                .transpose()?
                .unwrap_or(0.001);
            StrategySpec::Exp3P1 {
                label: label.unwrap_or_else(|| "EXP3.P.1".into()),
                delta,
            }
        }
        "ucb1" => StrategySpec::Ucb1 {
            label: label.unwrap_or_else(|| "UCB1".into()),
        },
        other => return Err(format!("unknown algorithm '{other}'")),
    };
    if let Some((k, _)) = params.first() {
        return Err(format!("unknown parameter '{k}' for {name}"));
    }
    Ok(spec)
}

fn parse_power(v: &str) -> std::result::Result<Option<(f64, f64, f64)>, String> {
    let Some(rest) = v.strip_prefix("power:") else {
        return Ok(None);
    };
    let parts: Vec<&str> = rest.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected power:SCALE:K_EXP:T_EXP, got '{v}'"));
    }
    Ok(Some((parse_num(parts[0])?, parse_num(parts[1])?, parse_num(parts[2])?)))
}

fn parse_epsilon(v: &str) -> std::result::Result<EpsilonSchedule, String> {
    if let Some((scale, k_exp, t_exp)) = parse_power(v)? {
        return Ok(EpsilonSchedule::Power { scale, k_exp, t_exp });
    }
    match v {
        "experiment" => Ok(EpsilonSchedule::Experiment),
        "theorem3" => Ok(EpsilonSchedule::Theorem3),
        _ => Err(format!("unknown epsilon schedule '{v}'")),
    }
}

fn parse_gamma(v: &str) -> std::result::Result<GammaSchedule, String> {
    if let Some((scale, k_exp, t_exp)) = parse_power(v)? {
        return Ok(GammaSchedule::Power { scale, k_exp, t_exp });
    }
    match v {
        "experiment" => Ok(GammaSchedule::Experiment),
        "theorem3-min" => Ok(GammaSchedule::Theorem3Minimum),
        "inverse-epsilon" => Ok(GammaSchedule::InverseEpsilon),
        "inf" => Ok(GammaSchedule::Infinity),
        _ => Err(format!("unknown gamma schedule '{v}'")),
    }
}

fn epsilon_to_text(e: &EpsilonSchedule) -> String {
    match e {
        EpsilonSchedule::Experiment => "experiment".into(),
        EpsilonSchedule::Theorem3 => "theorem3".into(),
        EpsilonSchedule::Power { scale, k_exp, t_exp } => format!("power:{scale:?}:{k_exp:?}:{t_exp:?}"),
    }
}

fn gamma_to_text(g: &GammaSchedule) -> String {
    match g {
        GammaSchedule::Experiment => "experiment".into(),
        GammaSchedule::Theorem3Minimum => "theorem3-min".into(),
        GammaSchedule::InverseEpsilon => "inverse-epsilon".into(),
        GammaSchedule::Infinity => "inf".into(),
        GammaSchedule::Power { scale, k_exp, t_exp } => format!("power:{scale:?}:{k_exp:?}:{t_exp:?}"),
    }
}

fn algorithm_to_text(spec: &StrategySpec) -> String {
    match spec {
        StrategySpec::Exp3 { label, params } => format!(
            "exp3(epsilon={}, gamma={}, label={label})",
            epsilon_to_text(&params.epsilon),
            gamma_to_text(&params.gamma)
        ),
        StrategySpec::Exp3P1 { label, delta } => format!("exp3p1(delta={delta:?}, label={label})"),
        StrategySpec::Ucb1 { label } => format!("ucb1(label={label})"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_roundtrip() {
        for name in ["exp1", "exp2", "exp2-desk"] {
            let cfg = ExperimentConfig::preset(name).unwrap();
            cfg.validate().unwrap();
            assert_eq!(ExperimentConfig::parse(&cfg.to_text()).unwrap(), cfg);
        }
        assert!(ExperimentConfig::preset("exp3").is_err());
    }

    #[test]
    fn parses_documented_example() {
        let cfg = ExperimentConfig::parse(
            "# comment\nname = exp1\narm_biases = 0.5, 0.6\nhorizon = 1e4\nreplications = 1000\n\
             algorithms = exp3, exp3p1(delta=0.001), ucb1\n",
        )
        .unwrap();
        assert_eq!(cfg.horizon, 10_000);
        assert_eq!(cfg.variance_measure, VarianceMeasure::Bound);
        let exact = ExperimentConfig::parse(&cfg.to_text().replace("= bound", "= exact")).unwrap();
        assert_eq!(exact.variance_measure, VarianceMeasure::Exact);
        assert!(ExperimentConfig::parse(&cfg.to_text().replace("= bound", "= loose")).is_err());
        assert_eq!(cfg.algorithms, ExperimentConfig::exp1().algorithms);
    }

    #[test]
    fn spectrum_parameters() {
        let cfg = ExperimentConfig::parse(
            "arm_biases = 0.5, 0.6\nhorizon = 100\nreplications = 2\n\
             algorithms = exp3(epsilon=theorem3, gamma=theorem3-min, label=T3), egreedy(label=G), \
             exp3(epsilon=power:0.5:-0.5:-0.5, gamma=inverse-epsilon, label=P)\n",
        )
        .unwrap();
        assert_eq!(
            cfg.algorithms[0],
            StrategySpec::Exp3 { label: "T3".into(), params: Exp3SpectrumParams::theorem3() }
        );
        let StrategySpec::Exp3 { params, .. } = &cfg.algorithms[1] else { panic!() };
        assert_eq!(params.gamma, GammaSchedule::Infinity);
        assert_eq!(ExperimentConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad = |text: &str| ExperimentConfig::parse(text).unwrap_err();
        let base = "arm_biases = 0.5, 0.6\nhorizon = 100\nreplications = 2\n";
        assert!(matches!(bad(&format!("{base}algorithms = foo\n")), BanditError::Config { line: 4, .. }));
        assert!(matches!(bad(&format!("{base}colour = red\n")), BanditError::Config { line: 4, .. }));
        assert!(matches!(bad(&format!("{base}horizon = 5\n")), BanditError::Config { line: 4, .. }));
        assert!(matches!(bad(base), BanditError::Config { line: 0, .. }));
        assert!(bad("arm_biases = 0.5, 1.6\nhorizon = 1\nreplications = 1\nalgorithms = ucb1\n")
            .to_string()
            .contains("1.6"));
        assert!(ExperimentConfig::parse("arm_biases = 0.5, 0.6\nhorizon = 0\nreplications = 2\nalgorithms = ucb1\n").is_err());
        assert!(ExperimentConfig::parse(&format!("{base}algorithms = ucb1, ucb1\n")).is_err());
    }
}
