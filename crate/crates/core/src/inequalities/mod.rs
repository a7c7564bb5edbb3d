//! Empirical verifiers for the polynomial inequalities: Turán–Nazarov,
//! Montgomery–Vaughan, the infimum and half-split bounds, and the two
//! product lemmas, with their constants fitted from data.

mod corpus;
mod products;
mod turan;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use corpus::{
    montgomery_vaughan_corpus, montgomery_vaughan_trial, random_trig_poly, turan_nazarov_corpus,
    turan_nazarov_trial, CorpusOptions,
};
pub use products::{
    log_minus_integral, multi_index_sum, multi_index_sum_enumerated, verify_prod_lemma,
    verify_product_lemma, LogMinusIntegral, ProdLemmaTrial, ProductLemmaTrial, ENUMERATION_CAP,
};
pub use turan::{
    half_split, inf_lower_bound, verify_montgomery_vaughan, verify_turan_nazarov, HalfSplit,
    InfLowerBound, MontgomeryVaughanTrial, TuranNazarovTrial,
};

/// Summary of a batch of trials for one inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub trials: usize,
    /// `A`, `C` or `eta`, depending on the verifier.
    pub fitted_constant: f64,
    /// Largest trial requirement relative to the fitted constant.
    pub worst_ratio: f64,
    pub all_hold: bool,
    pub metadata: BTreeMap<String, f64>,
}

/// Number of `(alpha_1, ..., alpha_n)` in `N_0^n` with `sum alpha_i <= k`,
/// i.e. `binomial(k + n, n)`.
pub fn partition_count(n: u32, k: u32) -> Result<u64> {
    let top = u128::from(k) + u128::from(n);
    let r = u128::from(n.min(k));
    let mut acc: u128 = 1;
    for i in 0..r {
        // acc * (top - i) is divisible by (i + 1) after the multiplication
        acc = acc
            .checked_mul(top - i)
            .ok_or_else(|| Error::IntegerOverflow(format!("binomial({top}, {r})")))?
            / (i + 1);
    }
    u64::try_from(acc).map_err(|_| Error::IntegerOverflow(format!("binomial({top}, {r})")))
}
