//! Two-stage AxNN training.
//!
//! Stage 1 grows an ensemble of GAMnet learners; when validation performance
//! converges, stage 2 grows xNN learners on top with the stage-1 parameters
//! frozen. Each iteration searches a small candidate pool (the previous
//! architecture plus a widened variant), fits each candidate against the
//! mode's offset, selects by the penalized objective, and then re-optimizes
//! the mixture weights of the current stage.
//!
//! Boosting fits each candidate against the full current prediction;
//! stacking fits stage-1 candidates against the raw response and stage-2
//! candidates against the frozen stage-1 prediction only. One-stage mode is
//! boosting with the GAMnet stage removed.

use crate::config::{sigmoid, Loss, Mode, RunConfig};
use crate::data::{fit_scaler, Dataset};
use crate::ensemble::Ensemble;
use crate::error::{Error, Result};
use crate::learner::{BaseLearner, LearnerSpec};
use crate::matrix::Matrix;
use crate::mixture::optimize_mixture_weights;
use crate::optimizer::OptimizerState;
use crate::rng::Rng;
use serde::{Deserialize, Serialize};

/// Complexity measure `r(h)`: square root of the trainable parameter count.
/// Monotone in width, depth, and ridge count.
pub fn complexity(spec: &LearnerSpec, num_features: usize) -> f64 {
    (spec.num_params(num_features) as f64).sqrt()
}

/// The regularized ensemble objective: mean loss plus
/// `sum_j (lambda * r(h_j) + beta_penalty) * |w_j|`.
pub fn objective(
    ensemble: &Ensemble,
    x_raw: &Matrix,
    y: &[f64],
    loss: Loss,
    lambda: f64,
    beta_penalty: f64,
) -> Result<f64> {
    if x_raw.rows() == 0 {
        return Err(Error::EmptyInput("objective needs at least one sample".into()));
    }
    if x_raw.rows() != y.len() {
        return Err(Error::Shape(format!(
            "{} rows of features but {} targets",
            x_raw.rows(),
            y.len()
        )));
    }
    let preds = ensemble.predict_link(x_raw)?;
    let risk = loss.mean_risk(&preds, y);
    let pen: f64 = ensemble
        .learners
        .iter()
        .map(|l| {
            (lambda * complexity(&l.spec, l.num_features()) + beta_penalty)
                * l.mixture_weight.abs()
        })
        .sum();
    Ok(risk + pen)
}

/// Candidate pool for one iteration: the previous architecture plus the same
/// architecture with every hidden width increased by one. The first iteration
/// of a stage offers only the configured seed spec.
pub fn generate_candidates(
    previous: Option<&LearnerSpec>,
    seed_spec: &LearnerSpec,
) -> Vec<LearnerSpec> {
    match previous {
        None => vec![seed_spec.clone()],
        Some(prev) => {
            let mut widened = prev.clone();
            for w in &mut widened.subnet.hidden {
                *w += 1;
            }
            vec![prev.clone(), widened]
        }
    }
}

/// True when the best validation loss has not improved by a relative margin
/// of `rel_tol` for `patience` consecutive entries.
pub fn stage_should_advance(history: &[f64], patience: usize, rel_tol: f64) -> bool {
    let mut best = f64::INFINITY;
    let mut stale = 0usize;
    for &v in history {
        if best.is_finite() && best - v <= rel_tol * best.abs() {
            stale += 1;
            if stale >= patience {
                return true;
            }
        } else {
            stale = 0;
        }
        best = best.min(v);
    }
    false
}

/// Train one candidate by mini-batch Adam against a fixed per-sample offset:
/// minimizes `(1/N) sum Phi(offset_i + h(x_i), y_i)`. Previously trained
/// learners are untouched — they only enter through `offset`.
pub fn fit_base_learner(
    offset: &[f64],
    candidate: &LearnerSpec,
    x_scaled: &Matrix,
    y: &[f64],
    config: &RunConfig,
    rng: &mut Rng,
) -> Result<BaseLearner> {
    let n = x_scaled.rows();
    if offset.len() != n || y.len() != n {
        return Err(Error::Shape(format!(
            "fit_base_learner: {} rows but offset has {} and y {}",
            n,
            offset.len(),
            y.len()
        )));
    }
    if n == 0 {
        return Err(Error::EmptyInput("cannot fit a learner on zero samples".into()));
    }
    let context = format!(
        "{} K={} widths={:?}",
        candidate.kind, candidate.num_ridges, candidate.subnet.hidden
    );
    let mut learner = BaseLearner::new(candidate.clone(), x_scaled.cols(), rng)?;
    let mut theta = learner.params_flat();
    let mut opt = OptimizerState::new(theta.len(), config.adam);
    let mut indices: Vec<usize> = (0..n).collect();
    let mut grad_buf: Vec<f64> = Vec::with_capacity(theta.len());

    for epoch in 0..config.epochs_per_iteration {
        rng.shuffle(&mut indices);
        for batch in indices.chunks(config.batch_size) {
            let xb = x_scaled.take_rows(batch);
            let pass = learner.forward_cached(&xb)?;
            let inv_b = 1.0 / batch.len() as f64;
            let mut upstream = Vec::with_capacity(batch.len());
            let mut loss_sum = 0.0;
            for (bi, &i) in batch.iter().enumerate() {
                let pred = offset[i] + pass.outputs[bi];
                loss_sum += config.loss.value(pred, y[i]);
                upstream.push(config.loss.derivative(pred, y[i]) * inv_b);
            }
            if !loss_sum.is_finite() {
                return Err(Error::Divergence(format!(
                    "non-finite training loss at epoch {} ({context})",
                    epoch + 1
                )));
            }
            let (grads, _) = learner.backward_cached(&xb, &pass, &upstream)?;
            grad_buf.clear();
            grads.flat_into(&mut grad_buf);
            opt.adam_step(&mut theta, &grad_buf, &context)?;
            learner.set_params_flat(&theta)?;
        }
    }
    Ok(learner)
}

/// Record of one candidate tried in one iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateOutcome {
    pub spec: LearnerSpec,
    /// Penalized selection objective; `None` when the fit failed.
    pub objective: Option<f64>,
    pub error: Option<String>,
}

/// Everything logged for one boosting/stacking iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// Global 1-based iteration index.
    pub iteration: usize,
    /// 1 for the GAMnet stage, 2 for the xNN stage.
    pub stage: u8,
    pub candidates: Vec<CandidateOutcome>,
    /// Index of the selected candidate in `candidates`.
    pub selected: usize,
    pub selected_spec: LearnerSpec,
    pub selected_objective: f64,
    /// Mixture weights of every learner so far, after re-optimization.
    pub weights: Vec<f64>,
    pub train_loss: f64,
    pub valid_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CandidateReport {
    pub iterations: Vec<IterationRecord>,
}

/// Shared state for one stage of the training loop.
struct Trainer<'a> {
    config: &'a RunConfig,
    root: Rng,
    xs_train: Matrix,
    xs_valid: Matrix,
    y_train: &'a [f64],
    y_valid: &'a [f64],
    /// Per-learner outputs on train/valid (link scale, unweighted).
    outputs_train: Vec<Vec<f64>>,
    outputs_valid: Vec<Vec<f64>>,
}

impl Trainer<'_> {
    fn penalty_for(&self, spec: &LearnerSpec) -> f64 {
        self.config.lambda * complexity(spec, self.xs_train.cols()) + self.config.beta_penalty
    }

    fn existing_penalty(&self, learners: &[BaseLearner]) -> f64 {
        learners
            .iter()
            .map(|l| self.penalty_for(&l.spec) * l.mixture_weight.abs())
            .sum()
    }

    /// Fit every candidate on its own child stream; order of results is the
    /// candidate order regardless of worker count.
    fn fit_candidates(
        &self,
        candidates: &[LearnerSpec],
        offset: &[f64],
        stage: u8,
        iteration: usize,
    ) -> Vec<Result<BaseLearner>> {
        let label = format!("fit-s{stage}-i{iteration}");
        let fit_one = |ci: usize| {
            let mut rng = self.root.child_indexed(&label, ci as u64);
            fit_base_learner(
                offset,
                &candidates[ci],
                &self.xs_train,
                self.y_train,
                self.config,
                &mut rng,
            )
        };
        let workers = self.config.workers.min(candidates.len()).max(1);
        if workers == 1 {
            (0..candidates.len()).map(fit_one).collect()
        } else {
            let mut results: Vec<Option<Result<BaseLearner>>> =
                (0..candidates.len()).map(|_| None).collect();
            std::thread::scope(|s| {
                let mut handles = Vec::new();
                for w in 0..workers {
                    let fit_one = &fit_one;
                    handles.push(s.spawn(move || {
                        let mut out = Vec::new();
                        let mut ci = w;
                        while ci < candidates.len() {
                            out.push((ci, fit_one(ci)));
                            ci += workers;
                        }
                        out
                    }));
                }
                for h in handles {
                    for (ci, r) in h.join().expect("candidate worker panicked") {
                        results[ci] = Some(r);
                    }
                }
            });
            results.into_iter().map(|r| r.expect("candidate missing")).collect()
        }
    }

    /// One full iteration: candidate search, selection, weight
    /// re-optimization over `active_range`, prediction refresh.
    #[allow(clippy::too_many_arguments)]
    fn run_iteration(
        &mut self,
        ens: &mut Ensemble,
        stage: u8,
        stage_iteration: usize,
        candidates: Vec<LearnerSpec>,
        fit_offset: &[f64],
        weight_offset_train: &[f64],
        weight_offset_valid: &[f64],
        pred_train: &mut Vec<f64>,
        pred_valid: &mut Vec<f64>,
    ) -> Result<IterationRecord> {
        let loss = self.config.loss;
        let fitted = self.fit_candidates(&candidates, fit_offset, stage, stage_iteration);
        let existing_pen = self.existing_penalty(&ens.learners);

        let mut outcomes = Vec::with_capacity(candidates.len());
        let mut best: Option<(usize, f64, BaseLearner, Vec<f64>)> = None;
        for (ci, (spec, result)) in candidates.iter().zip(fitted).enumerate() {
            match result {
                Err(e) => {
                    log::warn!(
                        "iteration {}: candidate {ci} ({spec:?}) failed: {e}",
                        ens.learners.len() + 1
                    );
                    outcomes.push(CandidateOutcome {
                        spec: spec.clone(),
                        objective: None,
                        error: Some(e.to_string()),
                    });
                }
                Ok(learner) => {
                    let out = learner.forward(&self.xs_train)?;
                    let preds: Vec<f64> = fit_offset
                        .iter()
                        .zip(&out)
                        .map(|(o, h)| o + h)
                        .collect();
                    // Candidate enters the objective at unit weight, as fitted.
                    let obj = loss.mean_risk(&preds, self.y_train)
                        + existing_pen
                        + self.penalty_for(spec);
                    outcomes.push(CandidateOutcome {
                        spec: spec.clone(),
                        objective: Some(obj),
                        error: None,
                    });
                    let better = match &best {
                        None => true,
                        Some((_, best_obj, best_learner, _)) => {
                            obj < *best_obj
                                || (obj == *best_obj
                                    && learner.num_params() < best_learner.num_params())
                        }
                    };
                    if better {
                        best = Some((ci, obj, learner, out));
                    }
                }
            }
        }
        let (selected, selected_objective, mut learner, out_train) = best.ok_or_else(|| {
            let first = outcomes
                .iter()
                .find_map(|o| o.error.clone())
                .unwrap_or_else(|| "no candidates".into());
            Error::Divergence(format!(
                "every candidate failed at iteration {}: {first}",
                ens.learners.len() + 1
            ))
        })?;

        // The new learner enters the weight re-optimization at zero, so the
        // warm start equals the previous iteration's optimum and the
        // penalized objective cannot get worse across iterations.
        let out_valid = learner.forward(&self.xs_valid)?;
        learner.mixture_weight = 0.0;
        ens.learners.push(learner);
        self.outputs_train.push(out_train);
        self.outputs_valid.push(out_valid);

        // Re-optimize the active stage's mixture weights with all learners
        // frozen. Stage 2 never touches stage-1 weights.
        let active_start = if stage == 1 { 0 } else { ens.stage_boundary };
        let active: Vec<usize> = (active_start..ens.learners.len()).collect();
        let n = self.y_train.len();
        let mut columns = Matrix::zeros(n, active.len());
        for (c, &j) in active.iter().enumerate() {
            for i in 0..n {
                columns.set(i, c, self.outputs_train[j][i]);
            }
        }
        let penalties: Vec<f64> = active
            .iter()
            .map(|&j| self.penalty_for(&ens.learners[j].spec))
            .collect();
        let init: Vec<f64> = active
            .iter()
            .map(|&j| ens.learners[j].mixture_weight)
            .collect();
        let fit = optimize_mixture_weights(
            &columns,
            self.y_train,
            weight_offset_train,
            loss,
            &penalties,
            &init,
        )?;
        for (&j, &w) in active.iter().zip(&fit.weights) {
            ens.learners[j].mixture_weight = w;
        }

        // Refresh running predictions from the weight offsets.
        for (i, p) in pred_train.iter_mut().enumerate() {
            let mut acc = weight_offset_train[i];
            for &j in &active {
                acc += ens.learners[j].mixture_weight * self.outputs_train[j][i];
            }
            *p = acc;
        }
        for (i, p) in pred_valid.iter_mut().enumerate() {
            let mut acc = weight_offset_valid[i];
            for &j in &active {
                acc += ens.learners[j].mixture_weight * self.outputs_valid[j][i];
            }
            *p = acc;
        }

        let train_loss = loss.mean_risk(pred_train, self.y_train);
        let valid_loss = loss.mean_risk(pred_valid, self.y_valid);
        let record = IterationRecord {
            iteration: ens.learners.len(),
            stage,
            candidates: outcomes,
            selected,
            selected_spec: ens.learners.last().unwrap().spec.clone(),
            selected_objective,
            weights: ens.learners.iter().map(|l| l.mixture_weight).collect(),
            train_loss,
            valid_loss,
        };
        log::info!(
            "iter {:>3} stage {} {:<6} widths {:?} train {:.6} valid {:.6} |w| {:.4}",
            record.iteration,
            record.stage,
            record.selected_spec.kind.to_string(),
            record.selected_spec.subnet.hidden,
            train_loss,
            valid_loss,
            record.weights.iter().map(|w| w.abs()).sum::<f64>()
        );
        Ok(record)
    }
}

/// Train a two-stage AxNN (or a one-stage xNN ensemble) on the given split.
pub fn train_axnn(
    config: &RunConfig,
    train: &Dataset,
    valid: &Dataset,
) -> Result<(Ensemble, CandidateReport)> {
    config.validate()?;
    train.validate()?;
    valid.validate()?;
    if train.feature_names != valid.feature_names {
        return Err(Error::Schema(format!(
            "train/valid column mismatch: [{}] vs [{}]",
            train.feature_names.join(", "),
            valid.feature_names.join(", ")
        )));
    }
    if train.num_samples() == 0 || valid.num_samples() == 0 {
        return Err(Error::EmptyInput("train and valid must be non-empty".into()));
    }
    if config.loss == Loss::Logistic {
        let ok = |ys: &[f64]| ys.iter().all(|&v| v == 0.0 || v == 1.0);
        if !ok(&train.y) || !ok(&valid.y) {
            return Err(Error::Schema(
                "logistic loss requires targets in {0, 1}".into(),
            ));
        }
    }

    let scaler = fit_scaler(&train.x)?;
    let xs_train = scaler.apply(&train.x)?;
    let xs_valid = scaler.apply(&valid.x)?;
    let n = train.num_samples();
    let m = valid.num_samples();
    let p = train.num_features();

    // Stacking learners are fitted against the raw response, so the ensemble
    // carries no separate offset; boosting starts from the base rate.
    let global_offset = match (config.mode, config.loss) {
        (Mode::Stacking, _) => 0.0,
        (_, Loss::Squared) => train.y.iter().sum::<f64>() / n as f64,
        (_, Loss::Logistic) => {
            let rate = (train.y.iter().sum::<f64>() / n as f64).clamp(1e-6, 1.0 - 1e-6);
            (rate / (1.0 - rate)).ln()
        }
    };

    let mut ens = Ensemble {
        learners: Vec::new(),
        stage_boundary: 0,
        link: config.loss.link(),
        scaler,
        global_offset,
    };
    let mut trainer = Trainer {
        config,
        root: Rng::new(config.seed),
        xs_train,
        xs_valid,
        y_train: &train.y,
        y_valid: &valid.y,
        outputs_train: Vec::new(),
        outputs_valid: Vec::new(),
    };
    let mut report = CandidateReport::default();
    let mut pred_train = vec![global_offset; n];
    let mut pred_valid = vec![global_offset; m];
    let base_offset_train = vec![global_offset; n];
    let base_offset_valid = vec![global_offset; m];
    let zeros_train = vec![0.0; n];

    // ---- Stage 1: GAMnet learners ----
    if config.mode != Mode::OneStage {
        let seed_spec = LearnerSpec::gamnet(p, config.stage1_hidden.clone());
        let mut previous: Option<LearnerSpec> = None;
        let mut history = Vec::new();
        for it in 1..=config.j1_max {
            if ens.learners.len() >= config.j2_max {
                break;
            }
            let candidates = generate_candidates(previous.as_ref(), &seed_spec);
            let fit_offset: &[f64] = match config.mode {
                Mode::Boosting => &pred_train,
                Mode::Stacking => &zeros_train,
                Mode::OneStage => unreachable!(),
            };
            let fit_offset = fit_offset.to_vec();
            let record = trainer.run_iteration(
                &mut ens,
                1,
                it,
                candidates,
                &fit_offset,
                &base_offset_train,
                &base_offset_valid,
                &mut pred_train,
                &mut pred_valid,
            )?;
            previous = Some(record.selected_spec.clone());
            history.push(record.valid_loss);
            report.iterations.push(record);
            if stage_should_advance(&history, config.patience, config.rel_tol) {
                break;
            }
        }
        ens.stage_boundary = ens.learners.len();
    }

    // ---- Stage 2: xNN learners on the frozen stage-1 prediction ----
    let l_train = pred_train.clone();
    let l_valid = pred_valid.clone();
    let seed_spec = LearnerSpec::xnn(config.stage2_ridges, config.stage2_hidden.clone());
    let mut previous: Option<LearnerSpec> = None;
    let mut history = Vec::new();
    let mut it = 0usize;
    while ens.learners.len() < config.j2_max {
        it += 1;
        let candidates = generate_candidates(previous.as_ref(), &seed_spec);
        let fit_offset = match config.mode {
            // Boosting fits the full current prediction; stacking fits the
            // frozen stage-1 prediction regardless of later learners.
            Mode::Boosting | Mode::OneStage => pred_train.clone(),
            Mode::Stacking => l_train.clone(),
        };
        let record = trainer.run_iteration(
            &mut ens,
            2,
            it,
            candidates,
            &fit_offset,
            &l_train,
            &l_valid,
            &mut pred_train,
            &mut pred_valid,
        )?;
        previous = Some(record.selected_spec.clone());
        history.push(record.valid_loss);
        report.iterations.push(record);
        if stage_should_advance(&history, config.patience, config.rel_tol) {
            break;
        }
    }

    ens.validate()?;
    Ok((ens, report))
}

/// Response-scale predictions for a logistic ensemble, or link-scale for
/// squared loss. Convenience for evaluation flows.
pub fn predict_for_metrics(ens: &Ensemble, x: &Matrix) -> Result<Vec<f64>> {
    match ens.link {
        crate::ensemble::Link::Identity => ens.predict_link(x),
        crate::ensemble::Link::Logit => {
            Ok(ens.predict_link(x)?.into_iter().map(sigmoid).collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{gen_simple, Scaler};
    use crate::ensemble::Link;
    use crate::learner::{DenseLayer, LearnerKind, RidgeNet, SubnetSpec};
    use crate::metrics::regression_metrics;

    fn identity_scaler(p: usize) -> Scaler {
        Scaler {
            means: vec![0.0; p],
            stds: vec![1.0; p],
        }
    }

    fn empty_ensemble(p: usize, offset: f64) -> Ensemble {
        Ensemble {
            learners: Vec::new(),
            stage_boundary: 0,
            link: Link::Identity,
            scaler: identity_scaler(p),
            global_offset: offset,
        }
    }

    /// A one-covariate learner computing `cw * max(0, a x + b) + cbias`,
    /// built from explicit numbers so tests can compute by hand.
    fn handmade_learner(kind: LearnerKind, a: f64, b: f64, cw: f64, cbias: f64, w: f64) -> BaseLearner {
        let spec = LearnerSpec {
            kind,
            num_ridges: 1,
            subnet: SubnetSpec::new(vec![1]),
        };
        let projections = match kind {
            LearnerKind::Xnn => Some(Matrix::from_vec(1, 1, vec![1.0]).unwrap()),
            LearnerKind::Gamnet => None,
        };
        let ridges = vec![RidgeNet {
            layers: vec![
                DenseLayer {
                    weights: Matrix::from_vec(1, 1, vec![a]).unwrap(),
                    bias: vec![b],
                },
                DenseLayer {
                    weights: Matrix::from_vec(1, 1, vec![1.0]).unwrap(),
                    bias: Vec::new(),
                },
            ],
        }];
        BaseLearner::from_parts(spec, 1, projections, ridges, vec![cw], cbias, w).unwrap()
    }

    #[test]
    fn objective_of_empty_ensemble_is_mean_squared_offset_error() {
        let ens = empty_ensemble(2, 1.5);
        let x = Matrix::zeros(4, 2);
        let y = [1.0, 2.0, 3.0, 4.0];
        let got = objective(&ens, &x, &y, Loss::Squared, 0.3, 0.2).unwrap();
        let want = y.iter().map(|v| (1.5 - v) * (1.5 - v)).sum::<f64>() / 4.0;
        assert!((got - want).abs() < 1e-15);
    }

    #[test]
    fn zero_penalties_reduce_objective_to_empirical_risk() {
        let mut ens = empty_ensemble(1, 0.5);
        ens.stage_boundary = 1;
        ens.learners
            .push(handmade_learner(LearnerKind::Gamnet, 1.0, 0.0, 2.0, 0.0, 0.75));
        let x = Matrix::from_vec(3, 1, vec![-1.0, 0.5, 2.0]).unwrap();
        let y = [0.0, 1.0, 2.0];
        let preds = ens.predict_link(&x).unwrap();
        let risk = Loss::Squared.mean_risk(&preds, &y);
        let got = objective(&ens, &x, &y, Loss::Squared, 0.0, 0.0).unwrap();
        assert!((got - risk).abs() < 1e-15);
    }

    #[test]
    fn objective_matches_hand_computation_for_two_learners() {
        // learner 1 (gamnet): 2.0 * max(0, x) + 0.5, weight 0.75
        // learner 2 (xnn):   -1.0 * max(0, 0.5x + 1.0) + 0.25, weight -0.5
        let mut ens = empty_ensemble(1, 0.1);
        ens.stage_boundary = 1;
        ens.learners
            .push(handmade_learner(LearnerKind::Gamnet, 1.0, 0.0, 2.0, 0.5, 0.75));
        ens.learners
            .push(handmade_learner(LearnerKind::Xnn, 0.5, 1.0, -1.0, 0.25, -0.5));
        let xs = [-1.0, 0.5, 2.0];
        let y = [0.0, 1.0, 2.0];
        let x = Matrix::from_vec(3, 1, xs.to_vec()).unwrap();

        let h1 = |x: f64| 2.0 * (x as f64).max(0.0) + 0.5;
        let h2 = |x: f64| -1.0 * (0.5 * x + 1.0).max(0.0) + 0.25;
        let mut risk = 0.0;
        for (&xv, &yv) in xs.iter().zip(&y) {
            let pred = 0.1 + 0.75 * h1(xv) + (-0.5) * h2(xv);
            risk += (pred - yv) * (pred - yv);
        }
        risk /= 3.0;
        let (lambda, beta) = (0.1, 0.01);
        // r(h) = sqrt(param count); both learners have 4 or 5 parameters
        let p1 = ens.learners[0].num_params() as f64;
        let p2 = ens.learners[1].num_params() as f64;
        let pen = (lambda * p1.sqrt() + beta) * 0.75 + (lambda * p2.sqrt() + beta) * 0.5;
        let got = objective(&ens, &x, &y, Loss::Squared, lambda, beta).unwrap();
        assert!((got - (risk + pen)).abs() < 1e-12, "{got} vs {}", risk + pen);
    }

    #[test]
    fn objective_rejects_empty_data() {
        let ens = empty_ensemble(2, 0.0);
        let x = Matrix::zeros(0, 2);
        assert!(objective(&ens, &x, &[], Loss::Squared, 0.0, 0.0).is_err());
    }

    #[test]
    fn candidate_rule_widens_each_hidden_layer() {
        let seed = LearnerSpec::gamnet(4, vec![5]);
        let first = generate_candidates(None, &seed);
        assert_eq!(first, vec![seed.clone()]);

        let prev = LearnerSpec::gamnet(4, vec![5]);
        let pool = generate_candidates(Some(&prev), &seed);
        assert_eq!(pool.len(), 2);
        assert_eq!(pool[0].subnet.hidden, vec![5]);
        assert_eq!(pool[1].subnet.hidden, vec![6]);

        let prev = LearnerSpec::xnn(2, vec![3, 3]);
        let pool = generate_candidates(Some(&prev), &seed);
        assert_eq!(pool[0].subnet.hidden, vec![3, 3]);
        assert_eq!(pool[1].subnet.hidden, vec![4, 4]);
    }

    #[test]
    fn stage_advance_rule_traces() {
        // strictly decreasing with large drops: keep going
        assert!(!stage_should_advance(&[1.0, 0.5, 0.25, 0.12], 2, 1e-3));
        // flat history long enough: stop
        assert!(stage_should_advance(&[0.4, 0.4, 0.4], 2, 1e-3));
        // the worked trace
        assert!(stage_should_advance(&[1.0, 0.5, 0.4999, 0.4999], 2, 1e-3));
        // short history never triggers
        assert!(!stage_should_advance(&[1.0], 2, 1e-3));
        assert!(!stage_should_advance(&[], 2, 1e-3));
    }

    #[test]
    fn fitting_zero_residual_shrinks_output_to_zero() {
        // offset = y exactly, so the learner fits a zero target
        let n = 2000;
        let ds = gen_simple(n, 31, 0.1);
        let scaler = crate::data::fit_scaler(&ds.x).unwrap();
        let xs = scaler.apply(&ds.x).unwrap();
        let mut cfg = RunConfig::defaults(Mode::Boosting);
        cfg.epochs_per_iteration = 400;
        cfg.adam.learning_rate = 3e-3;
        let spec = LearnerSpec::gamnet(4, vec![5]);
        let mut rng = Rng::new(1);
        let learner = fit_base_learner(&ds.y, &spec, &xs, &ds.y, &cfg, &mut rng).unwrap();
        let out = learner.forward(&xs).unwrap();
        let mse = out.iter().map(|v| v * v).sum::<f64>() / n as f64;
        assert!(mse <= 1e-3, "residual fit MSE {mse}");
    }

    #[test]
    fn single_gamnet_learns_a_linear_target() {
        // y = 2 x1, no noise, N = 10^4
        let n = 10_000;
        let mut rng = Rng::new(5);
        let x = Matrix::from_fn(n, 1, |_, _| rng.uniform_in(-1.0, 1.0));
        let y: Vec<f64> = (0..n).map(|i| 2.0 * x.get(i, 0)).collect();
        let scaler = crate::data::fit_scaler(&x).unwrap();
        let xs = scaler.apply(&x).unwrap();
        let mut cfg = RunConfig::defaults(Mode::Boosting);
        cfg.epochs_per_iteration = 120;
        cfg.adam.learning_rate = 3e-3;
        let spec = LearnerSpec::gamnet(1, vec![5]);
        let mut fit_rng = Rng::new(2);
        let learner =
            fit_base_learner(&vec![0.0; n], &spec, &xs, &y, &cfg, &mut fit_rng).unwrap();
        let out = learner.forward(&xs).unwrap();
        let (mse, _) = regression_metrics(&y, &out).unwrap();
        assert!(mse < 1e-3, "train MSE {mse}");
    }

    #[test]
    fn fit_ignores_everything_but_the_offset_vector() {
        // the stacking stage-1 property: the fit depends on (offset, data,
        // config, rng) only, so the surrounding ensemble cannot matter
        let ds = gen_simple(500, 9, 0.1);
        let scaler = crate::data::fit_scaler(&ds.x).unwrap();
        let xs = scaler.apply(&ds.x).unwrap();
        let cfg = RunConfig::defaults(Mode::Stacking);
        let mut cfg = cfg;
        cfg.epochs_per_iteration = 3;
        let spec = LearnerSpec::gamnet(4, vec![4]);
        let offset = vec![0.0; 500];
        let a = fit_base_learner(&offset, &spec, &xs, &ds.y, &cfg, &mut Rng::new(77)).unwrap();
        let b = fit_base_learner(&offset, &spec, &xs, &ds.y, &cfg, &mut Rng::new(77)).unwrap();
        assert_eq!(a, b);
    }

    fn fast_config(mode: Mode) -> RunConfig {
        let mut cfg = RunConfig::defaults(mode);
        cfg.epochs_per_iteration = 8;
        cfg.j1_max = 4;
        cfg.j2_max = 8;
        cfg.seed = 3;
        cfg
    }

    #[test]
    fn additive_target_is_captured_by_stage_one() {
        // y = x1 + x2^2 (no noise): stage 1 alone explains it, so stage-2
        // weights stay tiny
        let n = 10_000;
        let mut rng = Rng::new(41);
        let x = Matrix::from_fn(n, 2, |_, _| rng.uniform_in(-1.0, 1.0));
        let y: Vec<f64> = (0..n)
            .map(|i| x.get(i, 0) + x.get(i, 1) * x.get(i, 1))
            .collect();
        let mk = |idx: &[usize]| Dataset {
            x: x.take_rows(idx),
            y: idx.iter().map(|&i| y[i]).collect(),
            feature_names: vec!["x1".into(), "x2".into()],
            target_name: "y".into(),
            task: crate::data::Task::Regression,
            true_components: None,
        };
        let train_idx: Vec<usize> = (0..8000).collect();
        let valid_idx: Vec<usize> = (8000..n).collect();
        let mut cfg = fast_config(Mode::Boosting);
        cfg.epochs_per_iteration = 150;
        cfg.adam.learning_rate = 3e-3;
        // noiseless target: a stronger L1 penalty prunes stage-2 learners
        // that have nothing real to fit
        cfg.beta_penalty = 1e-3;
        let (ens, report) = train_axnn(&cfg, &mk(&train_idx), &mk(&valid_idx)).unwrap();

        let valid = mk(&valid_idx);
        let preds = ens.predict_link(&valid.x).unwrap();
        let (_, r2) = regression_metrics(&valid.y, &preds).unwrap();
        assert!(r2 > 0.99, "valid R2 {r2}");

        let stage2_weight: f64 = ens.learners[ens.stage_boundary..]
            .iter()
            .map(|l| l.mixture_weight.abs())
            .sum();
        assert!(stage2_weight < 0.05, "stage-2 |w| sum {stage2_weight}");
        assert!(report.iterations.iter().any(|r| r.stage == 2));
    }

    #[test]
    fn same_seed_gives_identical_reports() {
        let ds = gen_simple(3000, 17, 0.1);
        let (tr, va, _) = crate::data::split(
            &ds,
            &crate::data::SplitSpec::new(0.6, 0.2, 0.2, 4),
        )
        .unwrap();
        let cfg = fast_config(Mode::Boosting);
        let (ens_a, rep_a) = train_axnn(&cfg, &tr, &va).unwrap();
        let (ens_b, rep_b) = train_axnn(&cfg, &tr, &va).unwrap();
        assert_eq!(rep_a, rep_b);
        assert_eq!(ens_a.to_json().unwrap(), ens_b.to_json().unwrap());
    }

    #[test]
    fn worker_count_does_not_change_the_model() {
        let ds = gen_simple(2000, 23, 0.1);
        let (tr, va, _) = crate::data::split(
            &ds,
            &crate::data::SplitSpec::new(0.6, 0.2, 0.2, 4),
        )
        .unwrap();
        let mut cfg = fast_config(Mode::Stacking);
        cfg.epochs_per_iteration = 4;
        cfg.workers = 1;
        let (ens_a, rep_a) = train_axnn(&cfg, &tr, &va).unwrap();
        cfg.workers = 4;
        let (ens_b, rep_b) = train_axnn(&cfg, &tr, &va).unwrap();
        assert_eq!(rep_a, rep_b);
        assert_eq!(ens_a.to_json().unwrap(), ens_b.to_json().unwrap());
    }

    #[test]
    fn one_stage_mode_trains_only_xnn_learners() {
        let ds = gen_simple(2000, 29, 0.1);
        let (tr, va, _) = crate::data::split(
            &ds,
            &crate::data::SplitSpec::new(0.6, 0.2, 0.2, 4),
        )
        .unwrap();
        let cfg = fast_config(Mode::OneStage);
        let (ens, report) = train_axnn(&cfg, &tr, &va).unwrap();
        assert_eq!(ens.stage_boundary, 0);
        assert!(!ens.learners.is_empty());
        assert!(report.iterations.iter().all(|r| r.stage == 2));
        assert!(ens
            .learners
            .iter()
            .all(|l| l.spec.kind == LearnerKind::Xnn));
    }

    #[test]
    fn stage_partition_and_selection_optimality_hold() {
        let ds = gen_simple(2500, 37, 0.1);
        let (tr, va, _) = crate::data::split(
            &ds,
            &crate::data::SplitSpec::new(0.6, 0.2, 0.2, 4),
        )
        .unwrap();
        let (ens, report) = train_axnn(&fast_config(Mode::Boosting), &tr, &va).unwrap();
        ens.validate().unwrap();
        for record in &report.iterations {
            let selected = record.candidates[record.selected]
                .objective
                .expect("selected candidate succeeded");
            assert!((selected - record.selected_objective).abs() < 1e-12);
            for c in &record.candidates {
                if let Some(obj) = c.objective {
                    assert!(selected <= obj + 1e-12);
                }
            }
        }
    }

    #[test]
    fn logistic_training_rejects_non_binary_targets() {
        let ds = gen_simple(200, 43, 0.1);
        let (tr, va, _) = crate::data::split(
            &ds,
            &crate::data::SplitSpec::new(0.6, 0.2, 0.2, 4),
        )
        .unwrap();
        let mut cfg = fast_config(Mode::Boosting);
        cfg.loss = Loss::Logistic;
        let err = train_axnn(&cfg, &tr, &va).unwrap_err();
        assert!(err.to_string().contains("{0, 1}"));
    }

    #[test]
    fn logistic_training_learns_a_separable_rule() {
        let n = 4000;
        let mut rng = Rng::new(51);
        let x = Matrix::from_fn(n, 2, |_, _| rng.uniform_in(-1.0, 1.0));
        let y: Vec<f64> = (0..n)
            .map(|i| {
                let z = 3.0 * x.get(i, 0) - 2.0 * x.get(i, 1);
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        let mk = |range: std::ops::Range<usize>| {
            let idx: Vec<usize> = range.collect();
            Dataset {
                x: x.take_rows(&idx),
                y: idx.iter().map(|&i| y[i]).collect(),
                feature_names: vec!["x1".into(), "x2".into()],
                target_name: "y".into(),
                task: crate::data::Task::Binary,
                true_components: None,
            }
        };
        let mut cfg = fast_config(Mode::Boosting);
        cfg.loss = Loss::Logistic;
        cfg.epochs_per_iteration = 20;
        let (ens, _) = train_axnn(&cfg, &mk(0..3000), &mk(3000..n)).unwrap();
        let valid = mk(3000..n);
        let probs = ens.predict_response(&valid.x).unwrap();
        let (auc, _) = crate::metrics::binary_metrics(&valid.y, &probs).unwrap();
        assert!(auc > 0.97, "AUC {auc}");
    }
}
