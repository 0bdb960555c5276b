//! Exact rational verification by brute-force enumeration. Nothing in here
//! touches floating point.

mod law;
mod lemma;
mod poly;

pub use law::{tv_between, tv_distance, EnumerationCaps, TableLaw};
pub use lemma::{
    certify_degree_bound, certify_probability_table, conditional_factor, exact_joint_probability,
    interpolate_in_inverse_r, predicted_conditional_factor, Certificate, ConstraintSet, DrOracle, HeldOutCheck,
};
pub use poly::{rat, Rational, RationalPolynomial, RationalString};
