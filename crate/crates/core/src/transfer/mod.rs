//! Local solution bases, transfer matrices, projective dynamics, Prüfer
//! traces, resultants, and the oscillation and sublevel checks.

mod angle;
mod basis;
mod discrete;
mod export;
mod ode;
mod oscillation;
mod pruefer;
mod qform;
mod resultant;
mod sublevel;

pub use angle::{
    angle_coordinate_change, direction_map, ProjectiveAngle, Provenance, TransferMatrix, UNDERFLOW_NORM,
};
pub use basis::{
    cell_transfers, continuum_basis, continuum_cell_basis, discrete_cell_basis, plan_basis,
    q_orthonormal_basis, CellBasis, CellTransfers, ContinuumCellBasis, DiscreteCellBasis, DEGENERATE_NORM,
};
pub use discrete::{chain_transfer, n_step_transfer, one_step_transfer};
pub use export::{write_pruefer_jsonl, write_resultants_jsonl};
pub use ode::{direction_transport, DirectionTransport, BASE_STEP, REFINE_TOL};
pub use oscillation::{
    check_onezero, check_onezero_lattice, check_threezero, check_threezero_lattice, continuum_solution,
    lattice_solution, oscillation_sign_changes, ContinuumInstance, LatticeInstance, LemmaCheck,
    PeriodicProfile,
};
pub use pruefer::{
    cell_bases, pruefer_cells, pruefer_extract, pruefer_trace, reduced_tangent, PrueferTrace,
};
pub use qform::{q_inner, QForm, Quadrature};
pub use resultant::{
    leading_coefficient, matrix_a_closed_form, matrix_a_determinant, norm_matching_quadratic,
    resultant_from_grams, resultant_pair, root_proximity, Gram, ResultantCoeffs, RootProximity,
    VANISHING_TOL,
};
pub use sublevel::{log_grid, sublevel_measure, sublevel_profile, SublevelEstimate, SublevelProfile};
