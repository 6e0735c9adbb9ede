//! Recursive smoothing of mixed-order models: each skip-k prediction gives up
//! a fraction `sigma_k(w)` of its weight, and the pooled leftover goes to the
//! next lower level of the cascade.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::corpus::{TokenSentence, WordId};
use crate::error::{Error, Result};
use crate::mixedorder::{MixedOrderModel, MAX_ORDER};
use crate::model::{check_word, LanguageModel};

use super::interp::SIGMA_INIT;
use super::params::{FitOptions, MixedSmoothingParams};

/// Splits the mixture weights implied by `lambdas` (one value per position
/// `k = 1..m`, nearest first) into discounted weights
/// `(1 - sigma_k) lambda_k prod_{j<k} (1 - lambda_j)` and the pooled
/// leftover mass `sum_k sigma_k lambda_k prod_{j<k} (1 - lambda_j)`.
///
/// The last lambda is treated as 1 whatever its stored value.
pub fn split_mass(lambdas: &[f64], sigmas: &[f64]) -> (Vec<f64>, f64) {
    assert_eq!(lambdas.len(), sigmas.len(), "one sigma per component");
    let m = lambdas.len();
    let mut remaining = 1.0;
    let mut leftover = 0.0;
    let mut discounted = Vec::with_capacity(m);
    for k in 0..m {
        let lam = if k + 1 == m { 1.0 } else { lambdas[k] };
        let weight = remaining * lam;
        remaining *= 1.0 - lam;
        discounted.push((1.0 - sigmas[k]) * weight);
        leftover += sigmas[k] * weight;
    }
    (discounted, leftover)
}

/// A mixed-order model of order `m` smoothed by a lower-order model that
/// conditions on at most `m - 1` words.
///
/// Components whose skip row was never observed in training pass their whole
/// weight down, so every context normalizes as long as the lower level does.
#[derive(Clone)]
pub struct SmoothedMixed {
    model: Arc<MixedOrderModel>,
    lower: Arc<dyn LanguageModel>,
    params: MixedSmoothingParams,
}

impl std::fmt::Debug for SmoothedMixed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SmoothedMixed")
            .field("order", &self.model.order())
            .field("params", &self.params)
            .finish_non_exhaustive()
    }
}

impl SmoothedMixed {
    pub fn new(
        model: Arc<MixedOrderModel>,
        lower: Arc<dyn LanguageModel>,
        params: MixedSmoothingParams,
    ) -> Result<Self> {
        let m = model.order();
        if lower.context_len() >= m {
            return Err(Error::param(format!(
                "lower level of an order-{m} cascade must condition on fewer than {m} words"
            )));
        }
        if lower.vocab_size() != model.vocab_size() {
            return Err(Error::param("cascade levels have different vocabularies"));
        }
        if params.components() != m {
            return Err(Error::param(format!(
                "order-{m} level needs {m} sigma components, got {}",
                params.components()
            )));
        }
        Ok(SmoothedMixed {
            model,
            lower,
            params,
        })
    }

    pub fn model(&self) -> &MixedOrderModel {
        &self.model
    }

    pub fn lower(&self) -> &Arc<dyn LanguageModel> {
        &self.lower
    }

    pub fn params(&self) -> &MixedSmoothingParams {
        &self.params
    }

    /// `sigma_k(w)`, forced to 1 when `M_k` has no row for `w`.
    pub fn effective_sigma(&self, k: usize, w: WordId) -> f64 {
        if self.model.has_row(k, w) {
            self.params.sigma(k, w)
        } else {
            1.0
        }
    }

    /// Checked probability of `word` after exactly `m` context ids.
    pub fn smoothed_prob(&self, context: &[WordId], word: WordId) -> Result<f64> {
        let m = self.model.order();
        if context.len() != m {
            return Err(Error::param(format!(
                "context has {} words, the cascade needs {m}",
                context.len()
            )));
        }
        for &w in context.iter().chain(std::iter::once(&word)) {
            check_word(self.model.vocab_size(), w)?;
        }
        Ok(self.prob(context, word))
    }

    /// Discounted per-component weights and leftover mass for a context.
    fn split(&self, context: &[WordId], discounted: &mut [f64]) -> f64 {
        let m = self.model.order();
        let n = context.len();
        self.model.component_weights(context, discounted);
        let mut leftover = 0.0;
        for k in 1..=m {
            let sigma = self.effective_sigma(k, context[n - k]);
            leftover += sigma * discounted[k - 1];
            discounted[k - 1] *= 1.0 - sigma;
        }
        leftover
    }
}

impl LanguageModel for SmoothedMixed {
    fn vocab_size(&self) -> usize {
        self.model.vocab_size()
    }

    fn context_len(&self) -> usize {
        self.model.order()
    }

    fn prob(&self, history: &[WordId], word: WordId) -> f64 {
        let m = self.model.order();
        let n = history.len();
        let mut weights = [0.0; MAX_ORDER];
        let leftover = self.split(history, &mut weights[..m]);
        let mut p = 0.0;
        for k in 1..=m {
            if weights[k - 1] > 0.0 {
                p += weights[k - 1] * self.model.transition(k, history[n - k], word);
            }
        }
        if leftover > 0.0 {
            p += leftover * self.lower.prob(history, word);
        }
        p
    }

    fn backed_off(&self, history: &[WordId], word: WordId) -> bool {
        let n = history.len();
        (1..=self.model.order()).all(|k| self.model.transition(k, history[n - k], word) == 0.0)
    }
}

/// One validation event, reduced to what the sigma fit needs.
struct Event {
    /// `(k, w_{t-k}, weight, M_k(w_{t-k}, w_t))` for components with a row.
    components: Vec<(usize, WordId, f64, f64)>,
    /// Mass that passes down regardless of sigma (rows absent in training).
    fixed_leftover: f64,
    lower: f64,
}

fn collect_events(
    model: &MixedOrderModel,
    lower: &dyn LanguageModel,
    validation: &[TokenSentence],
) -> Result<Vec<Event>> {
    let m = model.order();
    let mut events = Vec::new();
    let mut weights = [0.0; MAX_ORDER];
    for s in validation {
        for &w in s.tokens() {
            check_word(model.vocab_size(), w)?;
        }
        let seq = s.padded(m);
        for t in m..seq.len() {
            let history = &seq[..t];
            model.component_weights(history, &mut weights[..m]);
            let mut components = Vec::with_capacity(m);
            let mut fixed_leftover = 0.0;
            for k in 1..=m {
                let w = seq[t - k];
                if model.has_row(k, w) {
                    components.push((k, w, weights[k - 1], model.transition(k, w, seq[t])));
                } else {
                    fixed_leftover += weights[k - 1];
                }
            }
            if components.is_empty() {
                continue;
            }
            events.push(Event {
                components,
                fixed_leftover,
                lower: lower.prob(history, seq[t]),
            });
        }
    }
    Ok(events)
}

/// Parameter keys: `(k, w)` per row, or `(k, 0)` for every row of `k` when
/// tied.
fn key(tied: bool, k: usize, w: WordId) -> (usize, WordId) {
    if tied {
        (k, 0)
    } else {
        (k, w)
    }
}

/// Joint EM over every `sigma_k(w)` touched by `events`. Each event is a
/// mixture of `m` discounted components and `m` leftover components; the
/// fixed mixture weights are not re-estimated.
fn fit_sigmas(
    events: &[Event],
    init: impl Fn(usize) -> f64,
    opts: &FitOptions,
) -> BTreeMap<(usize, WordId), f64> {
    let mut sigma: BTreeMap<(usize, WordId), f64> = BTreeMap::new();
    for e in events {
        for &(k, w, _, _) in &e.components {
            sigma.entry(key(opts.tied, k, w)).or_insert_with(|| init(k));
        }
    }
    // (leftover responsibility, total responsibility) per parameter
    let mut acc: BTreeMap<(usize, WordId), (f64, f64)> = sigma.keys().map(|&k| (k, (0.0, 0.0))).collect();
    for _ in 0..opts.max_iters {
        acc.values_mut().for_each(|a| *a = (0.0, 0.0));
        for e in events {
            let mut total = e.fixed_leftover * e.lower;
            for &(k, w, weight, mk) in &e.components {
                let s = sigma[&key(opts.tied, k, w)];
                total += weight * ((1.0 - s) * mk + s * e.lower);
            }
            if total <= 0.0 {
                continue;
            }
            for &(k, w, weight, mk) in &e.components {
                let id = key(opts.tied, k, w);
                let s = sigma[&id];
                let left = weight * s * e.lower / total;
                let kept = weight * (1.0 - s) * mk / total;
                let a = acc.get_mut(&id).expect("key registered");
                a.0 += left;
                a.1 += left + kept;
            }
        }
        let mut delta: f64 = 0.0;
        for (id, s) in sigma.iter_mut() {
            let (left, all) = acc[id];
            if all > 0.0 {
                let next = (left / all).clamp(0.0, 1.0);
                delta = delta.max((next - *s).abs());
                *s = next;
            }
        }
        if delta < opts.tol {
            break;
        }
    }
    sigma
}

/// Fits `sigma_k(w)` for an order-`m` level on `validation`, given the final
/// lower level. A tied fit per `k` supplies the fallback for rows without
/// validation events and the starting point of the per-row fit.
pub fn fit_mixed_smoothing(
    model: &MixedOrderModel,
    lower: &dyn LanguageModel,
    validation: &[TokenSentence],
    opts: &FitOptions,
) -> Result<MixedSmoothingParams> {
    let m = model.order();
    if lower.context_len() >= m {
        return Err(Error::param("lower level must condition on fewer words"));
    }
    let events = collect_events(model, lower, validation)?;
    let tied_opts = FitOptions { tied: true, ..*opts };
    let tied = fit_sigmas(&events, |_| SIGMA_INIT, &tied_opts);
    let mut params = MixedSmoothingParams::constant(m, SIGMA_INIT)?;
    for (&(k, _), &s) in &tied {
        params.set_fallback(k, s)?;
    }
    if !opts.tied {
        let fallback = params.clone();
        for ((k, w), s) in fit_sigmas(&events, |k| fallback.fallback(k), opts) {
            params.set(k, w, s)?;
        }
    }
    Ok(params)
}
