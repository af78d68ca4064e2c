//! Iterated differential forms on jets.
//!
//! A form is a sum of jet-expression coefficients times ordered products of
//! generators `d_K x^mu` (full differentials of base coordinates) and
//! `d^v_K u^j_σ` (vertical, or Cartan, generators), `K` a nonempty set of
//! slots. A generator with slot set `K` has multi-degree `1_K`; swapping
//! adjacent generators `g`, `h` costs `(-1)^{<deg g, deg h>}`, so generators
//! of odd `|K|` square to zero and generators sharing no slot commute.
//!
//! Slot differentials split as `d_i = d^h_i + d^v_i` with
//! `d^h_i = Σ_mu d_i x^mu · D_mu + δ_i`, where `δ_i` sends `d_K x^mu` to
//! `d_{K∪i} x^mu`, and `d^v_i` differentiates coefficients along the
//! vertical generators and sends `d^v_K u_σ` to `d^v_{K∪i} u_σ`.

mod form;
mod generator;
mod pullback;

pub use form::{prolong_form, total_derivative_form, IDForm, IdfSpace};
pub use generator::{Generator, SlotSet};
pub use pullback::{
    liouville_lift, pullback, w_derivation, w_derivation_pulled_back, LiftComponent,
};
