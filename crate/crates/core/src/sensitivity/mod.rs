//! Eigenvalue derivatives with respect to the disorder: Hellmann–Feynman
//! gradients, 2×2 Jacobians of eigenvalue pairs, colinearity of gradients and
//! finite-difference Hessian norms.

mod gradient;
mod hessian;
mod jacobian;

pub use gradient::{
    colinearity_gap, covering_constant, fd_gradient, fd_relative_error, hf_gradient, lambda_threshold, site_masses,
    write_gradients_csv, GradientVector, GRADIENT_FD_STEP, SIMPLE_GAP_TOL,
};
pub use hessian::{
    fd_hessian, hessian_norm_estimate, linf_to_l1_norm, HessianEstimate, HESSIAN_FD_STEP, MAX_ACTIVE_SITES,
};
pub use jacobian::{
    gradjac_bound_check, jacobian_pair, max_jacobian_pair, max_jacobian_pair_brute, GradJacCheck, JacobianPair,
};
