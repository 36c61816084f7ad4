//! The midpoint measure `μ_t`, its leading forms, the Laplace-integral
//! representations of `∇E_{2t}` and `∇²E_{2t}`, diagonal Laplace expansions
//! and Newton-diagram asymptotics.

pub mod expansion;
pub mod measure;
pub mod newton;
pub mod representation;

pub use expansion::{diagonal_expansion, lower_order_hessian_term, DiagonalForm, LowerOrderTerm};
pub use measure::{
    bridge_midpoint_density, bridge_ratio_sup, default_epsilon, epsilon_margin, leading_forms, leading_forms_on, leading_gradient,
    leading_hessian, limit_measure, mu_t, mu_t_near_minimal, mu_t_with, sublevel_volume, LeadingForms, LimitMeasure,
    Margin, MuMeasure, MuOptions,
};
pub use newton::{
    laplace_leading_term, newton_remoteness, nondegeneracy_check, phase_integral, LaplaceLeadingTerm, NewtonDiagram, Nondegeneracy,
    Remoteness,
};
pub use representation::{
    representation_check_grad, representation_check_hess, KernelMode, RepresentationCheck, RepresentationOptions,
};
