//! Fault injection for mutation testing of the verification suite.
//!
//! Production entry points always use [`Mutation::None`]; the `*_with`
//! variants in [`crate::analytic`] and [`crate::statistics`] accept a
//! mutation so that a verifier can prove its checks are not vacuous.

/// A single deliberate sign flip. Indices are 1-based, as in `eta_1..eta_3`
/// and `Gamma_1..Gamma_6`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mutation {
    #[default]
    None,
    /// Negate `eta_j` wherever the closed forms use it.
    NegateEta(usize),
    /// Negate the coefficient polynomial `Gamma_j(t)`.
    NegateGamma(usize),
}

impl Mutation {
    pub(crate) fn eta_sign(self, j: usize) -> f64 {
        if self == Mutation::NegateEta(j) {
            -1.0
        } else {
            1.0
        }
    }

    pub(crate) fn gamma_sign(self, j: usize) -> f64 {
        if self == Mutation::NegateGamma(j) {
            -1.0
        } else {
            1.0
        }
    }

    /// Every single-flip mutation.
    pub fn all() -> impl Iterator<Item = Mutation> {
        (1..=3).map(Mutation::NegateEta).chain((1..=6).map(Mutation::NegateGamma))
    }
}
