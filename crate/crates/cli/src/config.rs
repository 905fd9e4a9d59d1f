//! Run configuration files.
//!
//! ```text
//! [design]
//! preset = numerical        # numerical | chip
//! q0 = 80
//! ron_coff_ps = 0.4
//!
//! [sweep]
//! freq_start = 800e6
//! freq_stop = 1030e6
//! points = 461
//! order = 16
//! ix_threshold_db = 20
//! convergence_order = 24    # optional gate against a higher order
//! convergence_db = 0.05
//!
//! [sensitivity]
//! axis = q0 20 100 9        # name start stop steps
//! axis = duty_error_pct -1 1 21
//!
//! [spectrum]
//! freq = 910e6
//!
//! [oracle]
//! frequencies = 895e6 915e6 935e6
//! q_max = 64
//! order = 8
//! bound = 1e-3
//! ```

use cfsm::circulator::CirculatorConfig;

use crate::CliError;

/// One swept design parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: String,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        cfsm::circulator::linspace(self.start, self.stop, self.steps)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub design: CirculatorConfig,
    pub freq_start: f64,
    pub freq_stop: f64,
    pub points: usize,
    pub order: usize,
    pub ix_threshold_db: f64,
    pub convergence_order: Option<usize>,
    pub convergence_db: f64,
    pub axes: Vec<Axis>,
    pub spectrum_freq: f64,
    pub oracle_freqs: Vec<f64>,
    pub oracle_q_max: u64,
    pub oracle_order: usize,
    pub oracle_bound: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            design: CirculatorConfig::numerical_design(),
            freq_start: 800e6,
            freq_stop: 1030e6,
            points: 461,
            order: cfsm::floquet::DEFAULT_ORDER,
            ix_threshold_db: cfsm::circulator::IX_THRESHOLD_DB,
            convergence_order: None,
            convergence_db: 0.05,
            axes: Vec::new(),
            spectrum_freq: 910e6,
            oracle_freqs: Vec::new(),
            oracle_q_max: 64,
            oracle_order: 8,
            oracle_bound: cfsm::oracle::DEFAULT_BOUND,
        }
    }
}

fn input(line: usize, message: impl Into<String>) -> CliError {
    CliError::Input(format!("line {line}: {}", message.into()))
}

fn num<T: std::str::FromStr>(line: usize, key: &str, text: &str) -> Result<T, CliError> {
    text.trim()
        .parse()
        .map_err(|_| input(line, format!("{key}: cannot parse {text:?}")))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        let mut section = String::new();
        let mut design_lines = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                section = name.trim().to_string();
                if !["design", "sweep", "sensitivity", "spectrum", "oracle"]
                    .contains(&section.as_str())
                {
                    return Err(input(line, format!("unknown section [{section}]")));
                }
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| input(line, format!("expected key = value, got {content:?}")))?;
            match (section.as_str(), key) {
                ("design", _) => design_lines.push((line, key.to_string(), value.to_string())),
                ("sweep", "freq_start") => cfg.freq_start = num(line, key, value)?,
                ("sweep", "freq_stop") => cfg.freq_stop = num(line, key, value)?,
                ("sweep", "points") => cfg.points = num(line, key, value)?,
                ("sweep", "order") => cfg.order = num(line, key, value)?,
                ("sweep", "ix_threshold_db") => cfg.ix_threshold_db = num(line, key, value)?,
                ("sweep", "convergence_order") => {
                    cfg.convergence_order = Some(num(line, key, value)?)
                }
                ("sweep", "convergence_db") => cfg.convergence_db = num(line, key, value)?,
                ("sensitivity", "axis") => {
                    let words: Vec<&str> = value.split_whitespace().collect();
                    let [name, start, stop, steps] = words[..] else {
                        return Err(input(line, "axis needs: name start stop steps"));
                    };
                    if !CirculatorConfig::KEYS.contains(&name) {
                        return Err(input(line, format!("unknown design parameter {name:?}")));
                    }
                    let axis = Axis {
                        name: name.to_string(),
                        start: num(line, "start", start)?,
                        stop: num(line, "stop", stop)?,
                        steps: num(line, "steps", steps)?,
                    };
                    if axis.steps == 0 || (axis.steps > 1 && !(axis.stop > axis.start)) {
                        return Err(input(line, "axis range must be non-empty and increasing"));
                    }
                    cfg.axes.push(axis);
                }
                ("spectrum", "freq") => cfg.spectrum_freq = num(line, key, value)?,
                ("oracle", "frequencies") => {
                    cfg.oracle_freqs = value
                        .split_whitespace()
                        .map(|w| num(line, key, w))
                        .collect::<Result<_, _>>()?
                }
                ("oracle", "q_max") => cfg.oracle_q_max = num(line, key, value)?,
                ("oracle", "order") => cfg.oracle_order = num(line, key, value)?,
                ("oracle", "bound") => cfg.oracle_bound = num(line, key, value)?,
                ("", _) => return Err(input(line, "setting outside any section")),
                (s, k) => return Err(input(line, format!("unknown key {k:?} in [{s}]"))),
            }
        }
        // the preset goes first so that the other keys refine it
        if let Some(pos) = design_lines.iter().position(|(_, k, _)| k == "preset") {
            let (line, _, value) = design_lines.remove(pos);
            cfg.design = match value.as_str() {
                "numerical" => CirculatorConfig::numerical_design(),
                "chip" => CirculatorConfig::chip_design(),
                other => return Err(input(line, format!("unknown preset {other:?}"))),
            };
        }
        for (line, key, value) in design_lines {
            cfg.design
                .set(&key, &value)
                .map_err(|e| input(line, e.to_string()))?;
        }
        cfg.design
            .validate()
            .map_err(|e| CliError::Input(e.to_string()))?;
        Ok(cfg)
    }

    pub fn check_range(&self) -> Result<(), CliError> {
        if !(self.freq_stop > self.freq_start) || !(self.freq_start > 0.0) {
            return Err(CliError::Input(format!(
                "frequency range must be positive and increasing, got {} .. {}",
                self.freq_start, self.freq_stop
            )));
        }
        if self.points < 2 {
            return Err(CliError::Input("need at least 2 points".into()));
        }
        if self.order < 1 {
            return Err(CliError::Input("order must be at least 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_file_parses() {
        let text =
            "[design]\nq0 = 40\npreset = chip\n[sweep]\npoints = 11\nconvergence_order = 24\n\
                    [sensitivity]\naxis = q0 20 100 9\n[oracle]\nfrequencies = 9e8 9.1e8\n";
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.design.q0, 40.0);
        assert_eq!(cfg.design.cg, 0.0);
        assert_eq!(cfg.points, 11);
        assert_eq!(cfg.convergence_order, Some(24));
        assert_eq!(cfg.axes[0].values().len(), 9);
        assert_eq!(cfg.oracle_freqs, vec![9e8, 9.1e8]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = RunConfig::parse("[sweep]\n\npoints = many\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        let err = RunConfig::parse("[design]\nq0 = -1\n").unwrap_err();
        assert!(err.to_string().contains("q0"), "{err}");
        let err = RunConfig::parse("[sensitivity]\naxis = colour 1 2 3\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        assert!(RunConfig::parse("[plots]\n").is_err());
    }
}
