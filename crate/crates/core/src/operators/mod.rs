//! Dense operators, layouts and spectral utilities.

mod dense;
mod json;
mod layout;
pub mod linalg;
pub mod random;
mod rotation;
mod spectral;
mod subspace;

pub use dense::{apply_local, tensor_embed, DenseOperator, HERMITIAN_TOL};
pub(crate) use dense::{check_targets, embed_matrix};
pub use json::{matrix_from_rows, matrix_rows, OperatorJson};
pub use layout::{Register, RegisterRole, SystemLayout, DEFAULT_DIM_CAP};
pub use rotation::{direct_rotation, DirectRotation};
pub use spectral::{eigh, eigvalsh, expm_i, op_norm, EigenSystem, CLUSTER_RTOL, PHASE_TOL};
pub(crate) use spectral::mat_norm;
pub use subspace::{principal_cosines, subspace_distance, Subspace, ORTHONORMAL_TOL};

pub use faer::c64;
