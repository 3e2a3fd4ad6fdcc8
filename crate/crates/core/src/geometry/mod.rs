//! Multilayer trap geometry, the parametric meander and its filament model.

mod filament;
mod layout;
mod meander;
mod polygon;
mod reference;

pub use filament::{discretize_conductor, CurrentProfile, DiscretizeOptions, Filament, FilamentKind, FilamentSet};
pub use layout::{load_layout, Electrode, Layer, Layout, Role};
pub use meander::{build_meander, ConductorPath, MeanderParams, PathSegment, SegmentRole, Sheet};
pub use polygon::{Polygon, Rect};
pub use reference::{five_wire, ReferenceTrap};
