//! Browser bindings for the circulator demo page.
//!
//! Results cross the boundary as flat `Float64Array`s; each method documents
//! its record layout.

use cfsm::circulator::{
    build_circulator, extract_metrics, linspace, make_bfsk_clocks, port_spectrum,
    sweep_frequencies, CirculatorConfig, SweepSettings,
};
use wasm_bindgen::prelude::*;

/// Largest truncation order the page may ask for.
pub const MAX_ORDER: usize = 16;
/// Largest sweep the page may ask for.
pub const MAX_POINTS: usize = 1001;

/// Circulator design edited from the page.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct Demo {
    cfg: CirculatorConfig,
}

impl Default for Demo {
    fn default() -> Self {
        Self {
            cfg: CirculatorConfig::numerical_design(),
        }
    }
}

fn limits(points: usize, order: usize) -> Result<(), String> {
    if !(2..=MAX_POINTS).contains(&points) {
        return Err(format!("points must be in 2..={MAX_POINTS}"));
    }
    if !(1..=MAX_ORDER).contains(&order) {
        return Err(format!("order must be in 1..={MAX_ORDER}"));
    }
    Ok(())
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new() -> Demo {
        Demo::default()
    }

    /// Changes one design parameter, e.g. `("q0", "40")` or
    /// `("duty_error_pct", "0.7")`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let mut next = self.cfg.clone();
        next.set(key, value).map_err(|e| e.to_string())?;
        next.validate().map_err(|e| e.to_string())?;
        self.cfg = next;
        Ok(())
    }

    /// Names accepted by [`Demo::set`].
    pub fn keys() -> Vec<String> {
        CirculatorConfig::KEYS
            .iter()
            .map(|k| k.to_string())
            .collect()
    }

    /// Records `[f_hz, ix_db, il_db, rl_db]` per frequency.
    pub fn sweep(
        &self,
        f_start: f64,
        f_stop: f64,
        points: usize,
        order: usize,
    ) -> Result<Vec<f64>, String> {
        limits(points, order)?;
        let net = build_circulator(&self.cfg).map_err(|e| e.to_string())?;
        let s = sweep_frequencies(
            &net,
            &linspace(f_start, f_stop, points),
            SweepSettings::new(order),
        )
        .map_err(|e| e.to_string())?;
        Ok(s.frequencies
            .iter()
            .zip(&s.s)
            .flat_map(|(f, m)| {
                let (ix, il, rl) = cfsm::circulator::point_metrics(m);
                [*f, ix, il, rl]
            })
            .collect())
    }

    /// `[f_center_hz, ix_db, il_db, rl_db, bw_fraction]` of a sweep; the
    /// bandwidth is zero when isolation never reaches `threshold_db`.
    pub fn metrics(
        &self,
        f_start: f64,
        f_stop: f64,
        points: usize,
        order: usize,
        threshold_db: f64,
    ) -> Result<Vec<f64>, String> {
        limits(points, order)?;
        let net = build_circulator(&self.cfg).map_err(|e| e.to_string())?;
        let s = sweep_frequencies(
            &net,
            &linspace(f_start, f_stop, points),
            SweepSettings::new(order),
        )
        .map_err(|e| e.to_string())?;
        let m = match extract_metrics(&s, threshold_db) {
            Ok(m) => m,
            Err(cfsm::Error::DipNotFound { max_ix_db, .. }) => {
                let mut m = extract_metrics(&s, max_ix_db).map_err(|e| e.to_string())?;
                m.bw = 0.0;
                m
            }
            Err(e) => return Err(e.to_string()),
        };
        Ok(vec![m.f_center, m.ix_db, m.il_db, m.rl_db, m.bw])
    }

    /// Records `[port, harmonic, f_hz, level_dbc]` for a unit drive at TX.
    pub fn spectrum(&self, f_tx: f64, order: usize) -> Result<Vec<f64>, String> {
        limits(2, order)?;
        let net = build_circulator(&self.cfg).map_err(|e| e.to_string())?;
        let spec = port_spectrum(&net, f_tx, order).map_err(|e| e.to_string())?;
        Ok(spec
            .lines
            .iter()
            .flat_map(|l| [l.port as f64, l.harmonic as f64, l.frequency, l.dbc()])
            .collect())
    }

    /// Six clock waveforms over one modulation period, `samples` values
    /// (0 or 1) each, clock after clock.
    pub fn clocks(&self, samples: usize) -> Result<Vec<f64>, String> {
        let clocks = make_bfsk_clocks(
            self.cfg.fm,
            self.cfg.duty,
            self.cfg.duty_error,
            self.cfg.phase_imbalance,
        )
        .map_err(|e| e.to_string())?;
        let period = 1.0 / self.cfg.fm;
        Ok(clocks
            .iter()
            .flat_map(|c| {
                (0..samples).map(move |k| {
                    if c.is_on(k as f64 * period / samples as f64) {
                        1.0
                    } else {
                        0.0
                    }
                })
            })
            .collect())
    }
}
