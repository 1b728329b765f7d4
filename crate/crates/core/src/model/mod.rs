//! Kernels, matrix families, octants and the log-coordinate substitution.

mod admissibility;
pub mod config;
pub mod expr;
mod family;
mod kernel;
mod logcoord;
mod octant;
pub mod presets;

pub use admissibility::{admissibility_check, AdmissibilityReport, TAIL_RATIO_LIMIT};
pub use config::{load_model, ModelConfig};
pub use expr::{parse_kernel_expression, Expr};
pub use family::{omega_membership, InverseMap, MatrixFamily};
pub use kernel::{KernelSource, KernelSpec, LogKernel, Support};
pub use logcoord::{auto_log_grid, ensure_covers, from_log_classes, from_log_coordinates, log_extent, to_log_coordinates};
#[allow(unused_imports)]
pub(crate) use logcoord::{log_breaks, log_kernel_for_class};
pub use octant::{mask_signs, octant_count, octant_signature, pair_class, sign_mask, OctantIndex};
