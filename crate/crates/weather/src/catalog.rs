//! The catalog of the 31 weather measurements.
//!
//! Indices are stable and define the column order of every series in the
//! pipeline. The first 28 measurements come from the satellite source;
//! the last three (ET0, VAP, VAD) are derived locally.

use crate::error::{Error, Result};

pub const MEASUREMENT_COUNT: usize = 31;
pub const DOWNLOADED_COUNT: usize = 28;

pub const ET0: usize = 28;
pub const VAP: usize = 29;
pub const VAD: usize = 30;

/// Index into the measurement catalog.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MeasurementId(usize);

impl MeasurementId {
    pub fn new(index: usize) -> Result<Self> {
        if index >= MEASUREMENT_COUNT {
            return Err(Error::InvalidArg(format!(
                "measurement index {index} out of range 0..{MEASUREMENT_COUNT}"
            )));
        }
        Ok(Self(index))
    }

    pub fn index(self) -> usize {
        self.0
    }

    pub fn info(self) -> &'static Measurement {
        &CATALOG[self.0]
    }

    pub fn is_derived(self) -> bool {
        self.0 >= DOWNLOADED_COUNT
    }

    pub fn all() -> impl Iterator<Item = MeasurementId> {
        (0..MEASUREMENT_COUNT).map(MeasurementId)
    }
}

#[derive(Debug)]
pub struct Measurement {
    pub name: &'static str,
    pub symbol: &'static str,
    pub unit: &'static str,
}

pub const CATALOG: [Measurement; MEASUREMENT_COUNT] = [
    Measurement { name: "Temperature at 2 Meters", symbol: "T2M", unit: "C" },
    Measurement { name: "Temperature at 2 Meters Maximum", symbol: "T2M_MAX", unit: "C" },
    Measurement { name: "Temperature at 2 Meters Minimum", symbol: "T2M_MIN", unit: "C" },
    Measurement { name: "Wind Direction at 2 Meters", symbol: "WD2M", unit: "degrees" },
    Measurement { name: "Wind Speed at 2 Meters", symbol: "WS2M", unit: "m/s" },
    Measurement { name: "Surface Pressure", symbol: "PS", unit: "kPa" },
    Measurement { name: "Specific Humidity at 2 Meters", symbol: "QV2M", unit: "g/kg" },
    Measurement { name: "Precipitation Corrected", symbol: "PRECTOTCORR", unit: "mm/day" },
    Measurement { name: "All Sky Surface Shortwave Downward Irradiance", symbol: "ALLSKY_SFC_SW_DWN", unit: "MJ/m^2/day" },
    Measurement { name: "Evapotranspiration Energy Flux", symbol: "EVPTRNS", unit: "MJ/m^2/day" },
    Measurement { name: "Profile Soil Moisture", symbol: "GWETPROF", unit: "0-1" },
    Measurement { name: "Snow Depth", symbol: "SNODP", unit: "cm" },
    Measurement { name: "Dew/Frost Point at 2 Meters", symbol: "T2MDEW", unit: "C" },
    Measurement { name: "Cloud Amount", symbol: "CLOUD_AMT", unit: "0-1" },
    Measurement { name: "Evaporation Land", symbol: "EVLAND", unit: "kg/m^2/s x 1e6" },
    Measurement { name: "Wet Bulb Temperature at 2 Meters", symbol: "T2MWET", unit: "C" },
    Measurement { name: "Land Snowcover Fraction", symbol: "FRSNO", unit: "0-1" },
    Measurement { name: "All Sky Surface Longwave Downward Irradiance", symbol: "ALLSKY_SFC_LW_DWN", unit: "MJ/m^2/day" },
    Measurement { name: "All Sky Surface PAR Total", symbol: "ALLSKY_SFC_PAR_TOT", unit: "MJ/m^2/day" },
    Measurement { name: "All Sky Surface Albedo", symbol: "ALLSKY_SRF_ALB", unit: "0-1" },
    Measurement { name: "Precipitable Water", symbol: "PW", unit: "cm" },
    Measurement { name: "Surface Roughness", symbol: "Z0M", unit: "m" },
    Measurement { name: "Surface Air Density", symbol: "RHOA", unit: "kg/m^3" },
    Measurement { name: "Relative Humidity at 2 Meters", symbol: "RH2M", unit: "0-1" },
    Measurement { name: "Cooling Degree Days Above 18.3 C", symbol: "CDD18_3", unit: "days" },
    Measurement { name: "Heating Degree Days Below 18.3 C", symbol: "HDD18_3", unit: "days" },
    Measurement { name: "Total Column Ozone", symbol: "TO3", unit: "Dobson" },
    Measurement { name: "Aerosol Optical Depth 55", symbol: "AOD_55", unit: "0-1" },
    Measurement { name: "Reference Evapotranspiration", symbol: "ET0", unit: "mm/day" },
    Measurement { name: "Vapor Pressure", symbol: "VAP", unit: "kPa" },
    Measurement { name: "Vapor Pressure Deficit", symbol: "VAD", unit: "kPa" },
];

/// Symbols of the 28 measurements requested from the data source.
pub fn downloaded_symbols() -> Vec<&'static str> {
    CATALOG[..DOWNLOADED_COUNT].iter().map(|m| m.symbol).collect()
}

pub fn symbol_index(symbol: &str) -> Option<usize> {
    CATALOG.iter().position(|m| m.symbol == symbol)
}
