//! Parameters, trial function and the auxiliary potential w(r).

pub mod params;
pub mod potential;
pub mod table1;
pub mod trial;

pub use params::{
    a_lower_limit, a_upper_limit, separation_identity_holds, validate_params, DerivedConstants,
    ModelParams,
};
pub use potential::{check_w_properties, eval_w, jump_closed_form, PotentialTerms, PropertyReport, Regrouped};
pub use table1::{regenerate_table1, Table1Comparison, Table1Row};
pub use trial::{eval_lambda, eval_s0, eval_s0_prime, potential, PhiValue, Side, TrialFunction};
