// SPDX-License-Identifier: Apache-2.0
#include "offaxis/prnn_train.hpp"

#include "offaxis/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace offaxis::prnn {

namespace {

std::size_t record_count(const dataset::SnapshotDataset& data, const std::vector<std::size_t>& samples) {
  std::size_t n = 0;
  for (std::size_t s : samples) n += data.samples[s].path.size();
  return 6 * n;
}

std::vector<std::size_t> all_samples(const dataset::SnapshotDataset& data) {
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

constitutive::MaterialPointResult point_update(const PrnnLayout& layout, std::size_t j, const Tensor2& uj,
                                               double dt, const MaterialState& state) {
  if (!(uj.determinant() > 0.0))
    throw PointEvaluationError("fictitious stretch of point " + std::to_string(j) + " has det <= 0", j);
  if (layout.points[j] == PointModel::Fiber) return constitutive::fiber_update(uj, layout.fiber);
  return constitutive::matrix_update(uj, dt, state, layout.matrix);
}

Eigen::VectorXd packed(const MaterialState& s) {
  const auto v = s.pack_history();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Adds the gradient of one sample to `grad`; returns the sum of squared
// normalized residuals.
double sample_gradient(const PrnnParams& params, const PrnnLayout& layout, const dataset::Sample& sample,
                       const Voigt6& scale, double weight, double relative_step, std::vector<double>& grad) {
  const std::size_t steps = sample.path.size();
  const std::size_t n = layout.size();

  // Forward pass, keeping every incoming state.
  std::vector<std::vector<MaterialState>> incoming(steps, std::vector<MaterialState>(n));
  std::vector<std::vector<Voigt6>> point_stress(steps, std::vector<Voigt6>(n));
  std::vector<Voigt6> output_grad(steps);
  PrnnState state = PrnnState::fresh(layout);
  double sse = 0.0;
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t j = 0; j < n; ++j) incoming[t][j] = state.points[j];
    auto r = forward(params, layout, sample.path.steps[t].stretch, sample.path.steps[t].dt, state);
    const Voigt6 residual = (to_voigt(r.stress) - sample.stress[t]).cwiseQuotient(scale);
    sse += residual.squaredNorm();
    output_grad[t] = 2.0 * weight * residual.cwiseQuotient(scale);
    point_stress[t] = r.point_stress;
    state = std::move(r.state);
  }

  // Reverse pass, point by point: the points only meet in the decoder.
  for (std::size_t j = 0; j < n; ++j) {
    const Voigt6 w = params.encoder(j);
    const Voigt6 d = params.decoder(j);
    const bool has_history = layout.points[j] == PointModel::Matrix;
    Eigen::VectorXd lambda;
    Voigt6 grad_w = Voigt6::Zero(), grad_d = Voigt6::Zero();

    for (std::size_t t = steps; t-- > 0;) {
      grad_d += output_grad[t].cwiseProduct(point_stress[t][j]);
      const Voigt6 g_sigma = output_grad[t].cwiseProduct(d);
      const Tensor2& u_macro = sample.path.steps[t].stretch;
      const Tensor2 uj = encode(w, u_macro);
      const double dt = sample.path.steps[t].dt;
      const MaterialState& before = incoming[t][j];
      if (has_history && lambda.size() == 0) lambda = Eigen::VectorXd::Zero(before.history_size());

      // d loss / d u_j (tensor Voigt components, symmetric perturbations).
      const Voigt6 du_macro = to_voigt(u_macro - Tensor2::Identity());
      const double hu = relative_step * (1.0 + max_abs(uj));
      for (int k = 0; k < 6; ++k) {
        Voigt6 e = Voigt6::Zero();
        e(k) = hu;
        const auto plus = point_update(layout, j, uj + from_voigt(e), dt, before);
        const auto minus = point_update(layout, j, uj - from_voigt(e), dt, before);
        double g = g_sigma.dot(to_voigt(plus.stress - minus.stress));
        if (has_history) g += lambda.dot(packed(plus.state) - packed(minus.state));
        grad_w(k) += g / (2.0 * hu) * du_macro(k);
      }

      // d loss / d incoming history.
      if (has_history && t > 0) {
        const std::vector<double> x0 = before.pack_history();
        Eigen::VectorXd next(static_cast<Eigen::Index>(x0.size()));
        MaterialState probe = before;
        for (std::size_t i = 0; i < x0.size(); ++i) {
          const double hx = relative_step * (1.0 + std::abs(x0[i]));
          std::vector<double> x = x0;
          x[i] = x0[i] + hx;
          probe.unpack_history(x);
          const auto plus = point_update(layout, j, uj, dt, probe);
          x[i] = x0[i] - hx;
          probe.unpack_history(x);
          const auto minus = point_update(layout, j, uj, dt, probe);
          next(static_cast<Eigen::Index>(i)) =
              (g_sigma.dot(to_voigt(plus.stress - minus.stress)) +
               lambda.dot(packed(plus.state) - packed(minus.state))) /
              (2.0 * hx);
        }
        lambda = std::move(next);
      }
    }
    for (int k = 0; k < 6; ++k) {
      grad[kParamsPerPoint * j + k] += grad_w(k);
      grad[kParamsPerPoint * j + 6 + k] += grad_d(k);
    }
  }
  return sse;
}

double subset_loss(const PrnnParams& params, const PrnnLayout& layout, const dataset::SnapshotDataset& data,
                   const Voigt6& scale, const std::vector<std::size_t>& samples) {
  const std::size_t records = record_count(data, samples);
  if (records == 0) return 0.0;
  double sse = 0.0;
  for (std::size_t s : samples) {
    const auto& sample = data.samples[s];
    PrnnState state = PrnnState::fresh(layout);
    for (std::size_t t = 0; t < sample.path.size(); ++t) {
      auto r = forward(params, layout, sample.path.steps[t].stretch, sample.path.steps[t].dt, state);
      sse += (to_voigt(r.stress) - sample.stress[t]).cwiseQuotient(scale).squaredNorm();
      state = std::move(r.state);
    }
  }
  return sse / static_cast<double>(records);
}

}  // namespace

Voigt6 stress_scale(const dataset::SnapshotDataset& data) {
  Voigt6 sum = Voigt6::Zero(), sum_sq = Voigt6::Zero();
  double count = 0.0;
  for (const auto& s : data.samples) {
    for (const auto& v : s.stress) {
      sum += v;
      sum_sq += v.cwiseProduct(v);
      count += 1.0;
    }
  }
  Voigt6 scale = Voigt6::Ones();
  if (count == 0.0) return scale;
  for (int k = 0; k < 6; ++k) {
    const double mean = sum(k) / count;
    const double var = std::max(0.0, sum_sq(k) / count - mean * mean);
    if (var > 0.0) scale(k) = std::sqrt(var);
  }
  return scale;
}

double loss(const PrnnParams& params, const PrnnLayout& layout, const dataset::SnapshotDataset& data,
            const Voigt6& scale) {
  return subset_loss(params, layout, data, scale, all_samples(data));
}

LossGradient loss_gradient(const PrnnParams& params, const PrnnLayout& layout,
                           const dataset::SnapshotDataset& data, const Voigt6& scale,
                           const std::vector<std::size_t>& samples_in, double relative_step) {
  const auto samples = samples_in.empty() ? all_samples(data) : samples_in;
  const std::size_t records = record_count(data, samples);
  LossGradient out;
  out.gradient.assign(params.values.size(), 0.0);
  if (records == 0) return out;
  const double weight = 1.0 / static_cast<double>(records);
  double sse = 0.0;
  for (std::size_t s : samples)
    sse += sample_gradient(params, layout, data.samples[s], scale, weight, relative_step, out.gradient);
  out.loss = sse * weight;
  return out;
}

TrainReport train(const dataset::SnapshotDataset& data, const PrnnLayout& layout, const TrainSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  return train_from(data, layout, spec, PrnnParams::random(layout.size(), rng));
}

TrainReport train_from(const dataset::SnapshotDataset& data, const PrnnLayout& layout, const TrainSpec& spec,
                       PrnnParams params) {
  if (data.size() == 0) throw DomainError("training needs a non-empty dataset");
  if (params.values.size() != kParamsPerPoint * layout.size())
    throw ContractViolation("initial parameters do not match the layout");

  const Voigt6 scale = stress_scale(data);
  std::size_t validation_count = 0;
  if (spec.validation_fraction > 0.0 && data.size() >= 2)
    validation_count = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::lround(spec.validation_fraction * data.size())), 1, data.size() - 1);
  std::vector<std::size_t> train_idx, valid_idx;
  for (std::size_t s = 0; s < data.size(); ++s)
    (s + validation_count < data.size() ? train_idx : valid_idx).push_back(s);
  const bool has_validation = !valid_idx.empty();

  std::mt19937_64 rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
  TrainReport report;
  report.initial_params = params;

  auto selection_loss = [&](const PrnnParams& p, double train_loss) {
    return has_validation ? subset_loss(p, layout, data, scale, valid_idx) : train_loss;
  };
  auto check_finite = [&](double v, std::size_t epoch, const std::string& what) {
    if (!std::isfinite(v))
      throw SolverError("non-finite " + what + " loss at epoch " + std::to_string(epoch), v,
                        static_cast<int>(epoch));
  };

  const double initial_train = subset_loss(params, layout, data, scale, train_idx);
  check_finite(initial_train, 0, "training");
  const double initial_selection = selection_loss(params, initial_train);
  check_finite(initial_selection, 0, "validation");
  report.train_loss.push_back(initial_train);
  if (has_validation) report.validation_loss.push_back(initial_selection);
  report.best_loss = initial_selection;
  report.params = params;
  report.stop_reason = "epoch limit";

  const std::size_t p_count = params.values.size();
  std::vector<double> m(p_count, 0.0), v(p_count, 0.0);
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  std::size_t adam_step = 0;
  double step_scale = 1.0;
  std::size_t stagnant = 0;
  const std::size_t batch = spec.batch_size == 0 ? train_idx.size() : spec.batch_size;

  if (spec.target_loss && initial_selection <= *spec.target_loss) {
    report.stop_reason = "target loss";
    return report;
  }

  for (std::size_t epoch = 1; epoch <= spec.epochs; ++epoch) {
    std::shuffle(train_idx.begin(), train_idx.end(), rng);
    double epoch_sse = 0.0;
    std::size_t epoch_records = 0;
    for (std::size_t start = 0; start < train_idx.size(); start += batch) {
      const std::vector<std::size_t> subset(train_idx.begin() + start,
                                            train_idx.begin() + std::min(train_idx.size(), start + batch));
      LossGradient lg;
      try {
        lg = loss_gradient(params, layout, data, scale, subset, spec.relative_step);
      } catch (const PointEvaluationError&) {
        // Previous update produced an inadmissible fictitious stretch.
        params = report.params;
        step_scale *= 0.5;
        ++report.rejected_steps;
        continue;
      }
      check_finite(lg.loss, epoch, "training");
      const std::size_t records = record_count(data, subset);
      epoch_sse += lg.loss * records;
      epoch_records += records;

      ++adam_step;
      const double lr = spec.learning_rate * step_scale;
      const double c1 = 1.0 - std::pow(beta1, adam_step), c2 = 1.0 - std::pow(beta2, adam_step);
      for (std::size_t i = 0; i < p_count; ++i) {
        m[i] = beta1 * m[i] + (1 - beta1) * lg.gradient[i];
        v[i] = beta2 * v[i] + (1 - beta2) * lg.gradient[i] * lg.gradient[i];
        params.values[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
      }
    }

    double selection;
    try {
      selection = selection_loss(params, epoch_records ? epoch_sse / epoch_records : report.best_loss);
    } catch (const PointEvaluationError&) {
      params = report.params;
      step_scale *= 0.5;
      ++report.rejected_steps;
      selection = std::numeric_limits<double>::infinity();
    }
    const double train_loss = epoch_records ? epoch_sse / epoch_records : report.train_loss.back();
    if (std::isnan(selection)) check_finite(selection, epoch, "validation");
    report.train_loss.push_back(train_loss);
    if (has_validation) report.validation_loss.push_back(selection);

    if (selection < report.best_loss) {
      report.best_loss = selection;
      report.best_epoch = epoch;
      report.params = params;
      stagnant = 0;
    } else if (++stagnant >= spec.patience) {
      report.stop_reason = "no improvement";
      break;
    }
    if (spec.target_loss && report.best_loss <= *spec.target_loss) {
      report.stop_reason = "target loss";
      break;
    }
  }
  return report;
}

RestartEnvelope train_restarts(const dataset::SnapshotDataset& data, const PrnnLayout& layout,
                               const TrainSpec& spec, std::size_t restarts) {
  if (restarts == 0) throw DomainError("at least one restart is required");
  RestartEnvelope env;
  env.min_loss = std::numeric_limits<double>::infinity();
  env.max_loss = -std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < restarts; ++r) {
    TrainSpec s = spec;
    s.seed = spec.seed + r;
    env.runs.push_back(train(data, layout, s));
    env.min_loss = std::min(env.min_loss, env.runs.back().best_loss);
    env.max_loss = std::max(env.max_loss, env.runs.back().best_loss);
  }
  return env;
}

std::vector<Tensor2> evaluate_path(const PrnnParams& params, const PrnnLayout& layout,
                                   const pathgen::LoadPath& path) {
  std::vector<Tensor2> out;
  out.reserve(path.size());
  PrnnState state = PrnnState::fresh(layout);
  for (const auto& step : path.steps) {
    auto r = forward(params, layout, step.stretch, step.dt, state);
    out.push_back(r.stress);
    state = std::move(r.state);
  }
  return out;
}

ErrorMetrics evaluate_errors(const PrnnParams& params, const PrnnLayout& layout,
                             const dataset::SnapshotDataset& data) {
  ErrorMetrics m;
  double abs_sum = 0.0;
  std::size_t count = 0;
  for (const auto& sample : data.samples) {
    try {
      const auto pred = evaluate_path(params, layout, sample.path);
      for (std::size_t t = 0; t < pred.size(); ++t) {
        abs_sum += (to_voigt(pred[t]) - sample.stress[t]).cwiseAbs().sum();
        count += 6;
      }
    } catch (const DomainError&) {
      ++m.failed;
    } catch (const SolverError&) {
      ++m.failed;
    }
  }
  if (count > 0) m.mae = abs_sum / static_cast<double>(count);
  const double mean_scale = stress_scale(data).mean();
  m.relative = 100.0 * m.mae / mean_scale;
  return m;
}

}  // namespace offaxis::prnn
