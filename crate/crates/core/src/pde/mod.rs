//! `γ`, `δ` from `g`, `h`; the system `E^{γ,δ}_{k,ℓ}`; candidate
//! solutions and their regularity.

mod check;
mod gamma;
mod system;

pub use check::{
    check_candidate, dependence_screens, det2, regularity, sigma_tau, CandidateSolution, DependenceScreens, EdipStatus,
    Partials, Regularity, RegularityReport,
};
pub use gamma::{
    branch_coefficient_table, branch_gammas, gamma_domain, invert_g, solve_for, supply_gamma, Branch,
    BranchCoefficients, GammaDelta, InvertibleShape, NormalFormST0, Provenance,
};
pub use system::{at_p, generate_pde, PdeSystem, PLACEHOLDERS};
