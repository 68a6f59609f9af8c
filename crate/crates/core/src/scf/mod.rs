//! Self-consistent fields: the periodic host, the dielectric operator and the
//! defect problem.

pub mod defect;
pub mod dielectric;
pub mod energy;
pub mod krylov;
pub mod options;
pub mod periodic;

pub use defect::{
    projector_consistency, solve_defect_direct, solve_defect_scf, solve_defect_scf_from,
    DefectSolution, InitialGuess,
};
pub use dielectric::{
    apply_dielectric_l, assemble_dielectric_l, full_response_density, hminus1_inner,
    one_plus_l_offdiagonal_profile, second_order_density, solve_one_plus_l,
    solve_one_plus_l_report, OffDiagonalProfile,
};
pub use energy::{
    defect_energy, defect_energy_of_spectrum, random_direction, relative_energy,
    relative_energy_check, rotate_occupied, PairRotation, RelativeEnergyReport,
};
pub use options::SolverOptions;
pub use periodic::{solve_periodic, solve_periodic_from, CrystalSpec, PeriodicGroundState};
