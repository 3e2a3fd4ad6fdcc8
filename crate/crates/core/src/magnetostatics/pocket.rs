use num_complex::Complex64;
use rayon::prelude::*;

use super::biot_savart::{skin_depth_au_um, DriveSpec};
use super::minimum::{find_field_minimum, MinimumReport};
use crate::error::{invalid, Result};
use crate::geometry::{
    build_meander, discretize_conductor, CurrentProfile, DiscretizeOptions, FilamentSet, MeanderParams,
};

/// Discretization, drive and search seed for meander field evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MagneticModel {
    pub discretize: DiscretizeOptions,
    pub drive: DriveSpec,
    /// Seed (x, z) in µm for the minimum search.
    pub seed: (f64, f64),
}

impl Default for MagneticModel {
    fn default() -> Self {
        let frequency = 1.0826e9;
        Self {
            discretize: DiscretizeOptions {
                transverse_n: 8,
                depth_n: 12,
                profile: CurrentProfile::Skin { depth: skin_depth_au_um(frequency) },
            },
            drive: DriveSpec::new(1.0, frequency),
            seed: (0.0, 35.0),
        }
    }
}

impl MagneticModel {
    /// Filament set of the meander at the model's drive current.
    pub fn filaments(&self, p: &MeanderParams) -> Result<FilamentSet> {
        let path = build_meander(p)?;
        let unit = discretize_conductor(&path, &self.discretize, Complex64::new(1.0, 0.0))?;
        Ok(self.drive.apply(&unit))
    }

    pub fn minimum(&self, p: &MeanderParams) -> Result<MinimumReport> {
        find_field_minimum(&self.filaments(p)?, self.seed, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PocketRow {
    pub l_th: f64,
    pub minimum: MinimumReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PocketStudy {
    pub rows: Vec<PocketRow>,
    /// Residual field non-increasing along the (sorted) l_th values.
    pub monotone: bool,
}

/// Residual field and gradient at the minimum for each pocket length.
pub fn pocket_study(meander: &MeanderParams, l_th: &[f64], model: &MagneticModel) -> Result<PocketStudy> {
    if l_th.is_empty() {
        return Err(invalid("l_th", "no pocket lengths given"));
    }
    let mut values = l_th.to_vec();
    values.sort_by(f64::total_cmp);
    for &l in &values {
        meander.with("l_th", l)?.validate()?;
    }
    let rows = values
        .par_iter()
        .map(|&l| Ok(PocketRow { l_th: l, minimum: model.minimum(&meander.with("l_th", l)?)? }))
        .collect::<Result<Vec<_>>>()?;
    let monotone = rows.windows(2).all(|w| w[1].minimum.residual <= w[0].minimum.residual);
    Ok(PocketStudy { rows, monotone })
}
