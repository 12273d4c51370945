use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Conversion constants from native table units to energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitTable {
    pub oil_ej_per_mtoe: f64,
    pub gas_ej_per_gm3: f64,
    pub hard_coal_gj_per_t: f64,
    pub soft_coal_gj_per_t: f64,
    pub uranium_tj_per_t: f64,
    pub thorium_tj_per_t: f64,
    pub oil_gj_per_boe: f64,
}

impl Default for UnitTable {
    fn default() -> Self {
        UnitTable {
            oil_ej_per_mtoe: 0.041868,
            gas_ej_per_gm3: 0.0373,
            hard_coal_gj_per_t: 29.9,
            soft_coal_gj_per_t: 14.9,
            uranium_tj_per_t: 159.0,
            thorium_tj_per_t: 2100.0,
            oil_gj_per_boe: 6.12,
        }
    }
}

impl UnitTable {
    /// Energy content in EJ of `amount` of `commodity` in its table unit
    /// (Mtoe, Gm3, Mt or t).
    pub fn to_energy(&self, amount: f64, commodity: &str) -> Result<f64> {
        Ok(amount * self.ej_per_unit(commodity)?)
    }

    pub fn ej_per_unit(&self, commodity: &str) -> Result<f64> {
        Ok(match commodity {
            "oil" => self.oil_ej_per_mtoe,
            "gas" => self.gas_ej_per_gm3,
            // GJ/t * Mt = 1e6 GJ = 1e-3 EJ
            "hard_coal" => self.hard_coal_gj_per_t * 1e-3,
            "soft_coal" => self.soft_coal_gj_per_t * 1e-3,
            // TJ/t * t = 1e-6 EJ
            "uranium" => self.uranium_tj_per_t * 1e-6,
            "thorium" => self.thorium_tj_per_t * 1e-6,
            other => return Err(Error::Unit(format!("no energy conversion for '{other}'"))),
        })
    }

    /// Multiplier taking a native cost (USD/boe, USD/GJ, USD/t, USD/kg) to
    /// USD per GJ.
    pub fn cost_to_per_gj(&self, commodity: &str) -> Result<f64> {
        Ok(match commodity {
            "oil" => 1.0 / self.oil_gj_per_boe,
            "gas" => 1.0,
            "hard_coal" => 1.0 / self.hard_coal_gj_per_t,
            "soft_coal" => 1.0 / self.soft_coal_gj_per_t,
            // TJ/t equals GJ/kg
            "uranium" => 1.0 / self.uranium_tj_per_t,
            "thorium" => 1.0 / self.thorium_tj_per_t,
            other => return Err(Error::Unit(format!("no cost conversion for '{other}'"))),
        })
    }

    fn validate(&self) -> Result<()> {
        let all = [
            ("units.oil", self.oil_ej_per_mtoe),
            ("units.gas", self.gas_ej_per_gm3),
            ("units.hard_coal", self.hard_coal_gj_per_t),
            ("units.soft_coal", self.soft_coal_gj_per_t),
            ("units.uranium", self.uranium_tj_per_t),
            ("units.thorium", self.thorium_tj_per_t),
            ("units.oil_gj_per_boe", self.oil_gj_per_boe),
        ];
        for (k, v) in all {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Unit(format!("{k} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Unit constants and recipe switches for a database build.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildConfig {
    pub units: UnitTable,
    /// Extra share of oil-shale resources added to the upper bound.
    pub oil_shale_upper_extra: f64,
    /// Share of conventional, shale and tight gas resources in the mode.
    pub gas_mode_resource_fraction: f64,
    /// Share of coal-bed methane reserves in the mode.
    pub gas_mode_cbm_fraction: f64,
    /// Share of proven and probable coal resources in the mode.
    pub coal_mode_resource_fraction: f64,
    /// Weight uranium fit residuals relative to the observed quantity.
    pub uranium_relative_residuals: bool,
    pub uranium_saturation_multiplier: f64,
    pub biomass_mode_scenario: String,
    pub grid_points: usize,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            units: UnitTable::default(),
            oil_shale_upper_extra: 0.5,
            gas_mode_resource_fraction: 0.5,
            gas_mode_cbm_fraction: 0.5,
            coal_mode_resource_fraction: 0.5,
            uranium_relative_residuals: true,
            uranium_saturation_multiplier: crate::fitter::SATURATION_MULTIPLIER,
            biomass_mode_scenario: "B1".into(),
            grid_points: crate::curveset::DEFAULT_GRID_POINTS,
        }
    }
}

impl BuildConfig {
    /// Parses `key = value` lines over the defaults. `#` starts a comment.
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut cfg = BuildConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let row = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(source, row, format!("expected key = value, found '{line}'")))?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::parse(source, row, e.to_string()))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
            _ => Error::Io(e),
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let num = || -> Result<f64> {
            value
                .parse::<f64>()
                .map_err(|_| Error::Validation(format!("'{value}' is not a number for {key}")))
        };
        let u = &mut self.units;
        match key {
            "units.oil" => u.oil_ej_per_mtoe = num()?,
            "units.gas" => u.gas_ej_per_gm3 = num()?,
            "units.hard_coal" => u.hard_coal_gj_per_t = num()?,
            "units.soft_coal" => u.soft_coal_gj_per_t = num()?,
            "units.uranium" => u.uranium_tj_per_t = num()?,
            "units.thorium" => u.thorium_tj_per_t = num()?,
            "units.oil_gj_per_boe" => u.oil_gj_per_boe = num()?,
            "oil.shale_upper_extra" => self.oil_shale_upper_extra = num()?,
            "gas.mode_resource_fraction" => self.gas_mode_resource_fraction = num()?,
            "gas.mode_cbm_fraction" => self.gas_mode_cbm_fraction = num()?,
            "coal.mode_resource_fraction" => self.coal_mode_resource_fraction = num()?,
            "uranium.relative_residuals" => {
                self.uranium_relative_residuals = value
                    .parse()
                    .map_err(|_| Error::Validation(format!("'{value}' is not true/false for {key}")))?
            }
            "uranium.saturation_multiplier" => self.uranium_saturation_multiplier = num()?,
            "biomass.mode_scenario" => self.biomass_mode_scenario = value.to_string(),
            "grid.points" => {
                self.grid_points = value
                    .parse()
                    .map_err(|_| Error::Validation(format!("'{value}' is not a count for {key}")))?
            }
            other => return Err(Error::Validation(format!("unknown configuration key '{other}'"))),
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        self.units.validate()?;
        for (k, v) in [
            ("oil.shale_upper_extra", self.oil_shale_upper_extra),
            ("gas.mode_resource_fraction", self.gas_mode_resource_fraction),
            ("gas.mode_cbm_fraction", self.gas_mode_cbm_fraction),
            ("coal.mode_resource_fraction", self.coal_mode_resource_fraction),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Validation(format!("{k} must be non-negative, got {v}")));
            }
        }
        if !(self.uranium_saturation_multiplier > 1.0) {
            return Err(Error::Validation("uranium.saturation_multiplier must exceed 1".into()));
        }
        if self.grid_points < 2 {
            return Err(Error::Validation("grid.points must be at least 2".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn energy_conversions() {
        let u = UnitTable::default();
        assert!((u.to_energy(829_000.0, "thorium").unwrap() - 1740.9).abs() < 1e-9);
        assert!((u.to_energy(4_004_500.0, "uranium").unwrap() - 636.7155).abs() < 1e-9);
        assert!((u.to_energy(1_599_990.0, "oil").unwrap() - 66_988.38).abs() < 0.01);
        assert!((u.to_energy(1000.0, "hard_coal").unwrap() - 29.9).abs() < 1e-12);
        assert!(matches!(u.to_energy(1.0, "peat"), Err(Error::Unit(_))));
    }

    #[test]
    fn cost_conversions() {
        let u = UnitTable::default();
        assert!((40.0 * u.cost_to_per_gj("oil").unwrap() - 6.5359).abs() < 1e-4);
        assert!((159.0 * u.cost_to_per_gj("uranium").unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(u.cost_to_per_gj("gas").unwrap(), 1.0);
    }

    #[test]
    fn config_parsing() {
        let text =
            "# overrides\nunits.gas = 0.038\n\nuranium.relative_residuals=false # inline\nbiomass.mode_scenario = A2\n";
        let c = BuildConfig::parse(text, "cfg").unwrap();
        assert_eq!(c.units.gas_ej_per_gm3, 0.038);
        assert!(!c.uranium_relative_residuals);
        assert_eq!(c.biomass_mode_scenario, "A2");
        assert_eq!(c.units.oil_ej_per_mtoe, 0.041868);

        assert!(matches!(
            BuildConfig::parse("units.coal = 3", "cfg"),
            Err(Error::Parse { row: 1, .. })
        ));
        assert!(matches!(
            BuildConfig::parse("\nunits.gas", "cfg"),
            Err(Error::Parse { row: 2, .. })
        ));
        assert!(BuildConfig::parse("units.gas = -1", "cfg").is_err());
    }
}
