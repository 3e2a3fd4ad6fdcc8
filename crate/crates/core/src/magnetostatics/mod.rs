//! Quasi-static magnetic near field of filament sets.

mod biot_savart;
mod fieldmap;
mod minimum;
mod pocket;

pub use biot_savart::{
    field_at, field_jacobian, field_law_ratios, skin_depth_au_um, skin_depth_um, CVec3, DriveSpec, FieldSource,
    FnSource, Sum, SINGULAR_RADIUS_UM,
};
pub use fieldmap::{field_map, sample_source, FieldMap, GridSpec};
pub use minimum::{find_field_minimum, in_phase_gradient, MinimumReport};
pub use pocket::{pocket_study, MagneticModel, PocketRow, PocketStudy};
