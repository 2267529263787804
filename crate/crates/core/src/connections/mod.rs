//! Universal one-forms, Grassmannian connections and lifted Dirac operators.

mod dirac;
mod forms;

pub use dirac::{
    circle_cover_lift, difference_dirac, dirac_lift, lattice_distance, module_coordinates, spectral_dirac, spectrum_distance,
    DiracLift, DIFFERENTIABILITY_BOUND,
};
pub use forms::{
    d, grassmann_connection, leibniz_residual, random_element, random_module, represent_form, FramedModule, OneForm,
};
