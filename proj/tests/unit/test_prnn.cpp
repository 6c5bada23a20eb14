// SPDX-License-Identifier: Apache-2.0
#include "offaxis/errors.hpp"
#include "offaxis/evaluator.hpp"
#include "offaxis/hashing.hpp"
#include "offaxis/micromodel.hpp"
#include "offaxis/model_io.hpp"
#include "offaxis/prnn.hpp"
#include "offaxis/prnn_train.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace offaxis;
using namespace offaxis::prnn;

namespace {

pathgen::LoadPath path_of(std::uint64_t seed, std::size_t steps, double cap = 0.03, double dt = 0.5) {
  pathgen::PathSpec spec;
  spec.steps = steps;
  spec.amplitude_cap = cap;
  spec.seed = seed;
  spec.time_step = pathgen::TimeStepRule::fixed(dt);
  return pathgen::sample_path(spec, 0);
}

PrnnLayout test_layout(std::size_t n) {
  return PrnnLayout::make(n, testkit::test_fiber(), testkit::test_matrix());
}

PrnnParams random_params(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return PrnnParams::random(n, rng);
}

dataset::SnapshotDataset oracle_data(std::size_t curves, std::size_t steps, std::uint64_t seed, double vf = 0.25) {
  pathgen::PathSpec spec;
  spec.count = curves;
  spec.steps = steps;
  spec.amplitude_cap = 0.03;
  spec.seed = seed;
  spec.time_step = pathgen::TimeStepRule::log_uniform(0.1, 10.0);
  const auto mix = micromodel::VoigtMixture::composite(testkit::test_fiber(), testkit::test_matrix(), vf);
  return dataset::generate_dataset(mix, pathgen::sample_paths(spec), seed, "oracle");
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("offaxis_" + name);
}

}  // namespace

TEST(Split, PublishedCounts) {
  EXPECT_EQ(split_points(8), (std::pair<std::size_t, std::size_t>{2, 6}));
  EXPECT_EQ(split_points(6), (std::pair<std::size_t, std::size_t>{2, 4}));
  EXPECT_EQ(split_points(4), (std::pair<std::size_t, std::size_t>{1, 3}));
}

TEST(Split, RuleAcrossSizes) {
  EXPECT_EQ(split_points(2).first, 1u);
  EXPECT_EQ(split_points(5).first, 1u);
  EXPECT_EQ(split_points(10).first, 3u);
  EXPECT_EQ(split_points(12).first, 3u);
  for (std::size_t n = 2; n < 64; ++n) {
    const auto [f, m] = split_points(n);
    EXPECT_EQ(f + m, n);
    EXPECT_GE(f, 1u);
  }
  EXPECT_THROW(split_points(1), DomainError);
  EXPECT_THROW(split_points(0), DomainError);
}

TEST(Layout, FiberPointsFirstAndParameterCount) {
  const auto layout = test_layout(8);
  for (std::size_t j = 0; j < 8; ++j)
    EXPECT_EQ(layout.points[j], j < 2 ? PointModel::Fiber : PointModel::Matrix);
  EXPECT_EQ(random_params(8, 1).values.size(), 96u);
}

TEST(Forward, ZeroPointIsExact) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const std::size_t n = 2 + seed % 7;
    const auto layout = test_layout(n);
    const auto r = forward(random_params(n, seed), layout, Tensor2::Identity(), 0.1 + seed,
                           PrnnState::fresh(layout));
    EXPECT_EQ(r.stress, Tensor2::Zero()) << "seed " << seed;
  }
}

TEST(Forward, SingleMatrixPointWithUnitDecoderComponent) {
  PrnnLayout layout;
  layout.points = {PointModel::Matrix};
  layout.fiber = testkit::test_fiber();
  layout.matrix = testkit::test_matrix();
  PrnnParams p;
  p.values.assign(12, 0.0);
  p.set_encoder(0, Voigt6::Ones());
  Voigt6 d = Voigt6::Zero();
  d(1) = 1.0;
  p.set_decoder(0, d);
  const auto path = path_of(3, 5);
  auto state = PrnnState::fresh(layout);
  auto point = MaterialState::fresh(layout.matrix);
  for (const auto& step : path.steps) {
    const auto r = forward(p, layout, step.stretch, step.dt, state);
    const auto ref = constitutive::matrix_update(step.stretch, step.dt, point, layout.matrix);
    EXPECT_EQ(r.stress(1, 1), ref.stress(1, 1));
    Tensor2 others = r.stress;
    others(1, 1) = 0.0;
    EXPECT_EQ(others, Tensor2::Zero());
    state = r.state;
    point = ref.state;
  }
}

TEST(Forward, DecoderSparsity) {
  // Changing point j's decoder entry k' only moves output component k'.
  const auto layout = test_layout(4);
  std::mt19937_64 rng(11);
  const Tensor2 u = Tensor2::Identity() + 0.02 * testkit::random_symmetric(rng, 1.0);
  const auto base = random_params(4, 5);
  const auto ref = forward(base, layout, u, 1.0, PrnnState::fresh(layout));
  for (std::size_t j = 0; j < 4; ++j) {
    for (int kp = 0; kp < 6; ++kp) {
      auto p = base;
      Voigt6 d = p.decoder(j);
      d(kp) += 0.7;
      p.set_decoder(j, d);
      const Voigt6 got = to_voigt(forward(p, layout, u, 1.0, PrnnState::fresh(layout)).stress);
      for (int k = 0; k < 6; ++k)
        if (k != kp) {
          EXPECT_EQ(got(k), to_voigt(ref.stress)(k));
        }
    }
  }
}

TEST(Forward, TwoPointNetworkReproducesVoigtMixture) {
  const auto layout = test_layout(2);
  const auto params = PrnnParams::mixture_equivalent(layout, 0.25);
  EXPECT_EQ(params.decoder(0), Voigt6::Constant(0.25));
  EXPECT_EQ(params.decoder(1), Voigt6::Constant(0.75));
  const auto mix = micromodel::VoigtMixture::composite(layout.fiber, layout.matrix, 0.25);
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto path = path_of(seed, 20, 0.06, 0.01 * std::pow(10.0, static_cast<double>(seed)));
    const auto net = evaluate_path(params, layout, path);
    const auto oracle = micromodel::voigt_evaluate(mix, path);
    for (std::size_t t = 0; t < path.size(); ++t)
      EXPECT_LE(max_abs(net[t] - oracle[t]), 1e-10 * std::max(1.0, max_abs(oracle[t])));
  }
}

TEST(Forward, StateThreadingIsBitwise) {
  const auto layout = test_layout(6);
  const auto params = random_params(6, 21);
  const auto path = path_of(8, 12);
  const auto whole = evaluate_path(params, layout, path);
  auto state = PrnnState::fresh(layout);
  for (std::size_t t = 0; t < path.size(); ++t) {
    auto r = forward(params, layout, path.steps[t].stretch, path.steps[t].dt, state);
    EXPECT_EQ(r.stress, whole[t]);
    state = std::move(r.state);
  }
  auto replay = PrnnState::fresh(layout);
  for (const auto& step : path.steps) replay = forward(params, layout, step.stretch, step.dt, replay).state;
  EXPECT_EQ(replay, state);
}

TEST(Forward, InadmissibleFictitiousStretchNamesThePoint) {
  const auto layout = test_layout(4);
  auto params = PrnnParams::mixture_equivalent(layout, 0.3);
  Voigt6 w = Voigt6::Ones();
  w(0) = -200.0;
  params.set_encoder(2, w);
  Tensor2 u = Tensor2::Identity();
  u(0, 0) = 1.01;
  try {
    forward(params, layout, u, 1.0, PrnnState::fresh(layout));
    FAIL() << "expected PointEvaluationError";
  } catch (const PointEvaluationError& e) {
    EXPECT_EQ(e.point(), 2u);
  }
}

TEST(Forward, StaleStateIsRejected) {
  const auto layout = test_layout(4);
  EXPECT_THROW(forward(random_params(4, 1), layout, Tensor2::Identity(), 1.0, PrnnState{}), ContractViolation);
  EXPECT_THROW(forward(random_params(3, 1), layout, Tensor2::Identity(), 1.0, PrnnState::fresh(layout)),
               ContractViolation);
}

TEST(FullPoint, IdentityGivesZeroStressAndRotatedStiffness) {
  const auto layout = test_layout(4);
  const auto params = PrnnParams::mixture_equivalent(layout, 0.4);
  for (double theta : {0.0, 15.0, 45.0, 90.0}) {
    const kinematics::OffAxisAngle angle(theta);
    const auto r = full_point_eval(params, layout, Tensor2::Identity(), 1.0, angle, PrnnState::fresh(layout));
    EXPECT_EQ(r.stress, Tensor2::Zero());
    const Matrix6 c = evaluator::initial_global_stiffness(evaluator::PrnnLaw(params, layout), angle, 1.0);
    const Matrix6 sym = 0.5 * (c + c.transpose());
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<Matrix6>(sym).eigenvalues().minCoeff(), 0.0) << theta;
  }
}

TEST(FullPoint, Objectivity) {
  std::mt19937_64 rng(31);
  const auto layout = test_layout(6);
  const auto params = random_params(6, 4);
  const kinematics::OffAxisAngle angle(30.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor2 f0 = testkit::random_deformation(rng, 0.05, 0.8, 1.25);
    const Tensor2 q = testkit::random_rotation(rng);
    const auto state = PrnnState::fresh(layout);
    const auto a = full_point_eval(params, layout, f0, 0.5, angle, state);
    const auto b = full_point_eval(params, layout, q * f0, 0.5, angle, state);
    const Tensor2 expect = q * a.stress * q.transpose();
    EXPECT_LE(max_abs(b.stress - expect), 1e-8 * std::max(1.0, max_abs(expect)));
  }
}

TEST(FullPoint, TangentMatchesGlobalFiniteDifferences) {
  std::mt19937_64 rng(41);
  const auto layout = test_layout(4);
  const auto params = random_params(4, 9);
  const kinematics::OffAxisAngle angle(15.0);
  auto state = PrnnState::fresh(layout);
  Tensor2 f = Tensor2::Identity();
  for (int step = 0; step < 3; ++step) {
    f = (testkit::random_deformation(rng, 0.01, 0.9, 1.1) * f).eval();
    const auto r = full_point_eval(params, layout, f, 0.5, angle, state);
    const double h = 1e-6;
    Matrix9 fd;
    for (int c = 0; c < 9; ++c) {
      const Tensor2 e = unit_tensor(c);
      const auto plus = full_point_eval(params, layout, f + h * e, 0.5, angle, state).stress;
      const auto minus = full_point_eval(params, layout, f - h * e, 0.5, angle, state).stress;
      fd.col(c) = flatten(plus - minus) / (2.0 * h);
    }
    EXPECT_LE((r.tangent - fd).norm(), 1e-3 * fd.norm()) << "step " << step;
    state = r.state;
  }
}

TEST(Training, StressScaleIsPerComponentStd) {
  dataset::SnapshotDataset d;
  dataset::Sample s;
  s.path.steps.resize(2);
  Voigt6 a = Voigt6::Zero(), b = Voigt6::Zero();
  a(0) = 1.0;
  b(0) = 3.0;
  s.stress = {a, b};
  d.samples.push_back(s);
  const Voigt6 scale = stress_scale(d);
  EXPECT_DOUBLE_EQ(scale(0), 1.0);
  for (int k = 1; k < 6; ++k) EXPECT_EQ(scale(k), 1.0);
}

TEST(Training, GradientMatchesFiniteDifferencesOfLoss) {
  const auto data = oracle_data(2, 3, 77);
  const auto layout = test_layout(4);
  const auto params = random_params(4, 13);
  const Voigt6 scale = stress_scale(data);
  const auto lg = loss_gradient(params, layout, data, scale);
  EXPECT_NEAR(lg.loss, loss(params, layout, data, scale), 1e-14 * lg.loss);
  std::size_t checked = 0;
  for (std::size_t i = 0; i < params.values.size(); ++i) {
    const double h = 1e-6 * (1.0 + std::abs(params.values[i]));
    auto p = params;
    p.values[i] += h;
    const double up = loss(p, layout, data, scale);
    p.values[i] -= 2.0 * h;
    const double down = loss(p, layout, data, scale);
    const double fd = (up - down) / (2.0 * h);
    if (std::abs(fd) <= 1e-8) continue;
    ++checked;
    EXPECT_LE(std::abs(lg.gradient[i] - fd), 1e-3 * std::abs(fd)) << "parameter " << i;
  }
  EXPECT_GT(checked, 24u);
}

TEST(Training, ZeroEpochsReturnsInitialization) {
  const auto data = oracle_data(5, 4, 5);
  const auto layout = test_layout(2);
  TrainSpec spec;
  spec.epochs = 0;
  spec.seed = 3;
  const auto report = train(data, layout, spec);
  std::mt19937_64 rng(3);
  EXPECT_EQ(report.params, PrnnParams::random(2, rng));
  EXPECT_EQ(report.params, report.initial_params);
  EXPECT_EQ(report.train_loss.size(), 1u);
  EXPECT_EQ(report.validation_loss.size(), 1u);
  EXPECT_EQ(report.best_epoch, 0u);
}

TEST(Training, LossDecreasesAndBestIsKept) {
  const auto data = oracle_data(6, 8, 6);
  const auto layout = test_layout(2);
  TrainSpec spec;
  spec.epochs = 30;
  spec.seed = 1;
  const auto report = train(data, layout, spec);
  EXPECT_LT(report.best_loss, report.validation_loss.front());
  EXPECT_EQ(report.best_loss, report.validation_loss.at(report.best_epoch));
  const auto [tr, va] = dataset::split(data, 0.2);
  EXPECT_DOUBLE_EQ(report.best_loss, loss(report.params, layout, va, stress_scale(data)));
}

TEST(Training, DeterministicUnderSeed) {
  const auto data = oracle_data(5, 5, 8);
  const auto layout = test_layout(2);
  TrainSpec spec;
  spec.epochs = 5;
  spec.seed = 9;
  spec.batch_size = 2;
  const auto a = train(data, layout, spec);
  const auto b = train(data, layout, spec);
  EXPECT_EQ(a.params.sha256(), b.params.sha256());
  EXPECT_EQ(a.train_loss, b.train_loss);
}

TEST(Training, RestartEnvelopeBracketsRuns) {
  const auto data = oracle_data(5, 4, 10);
  const auto layout = test_layout(2);
  TrainSpec spec;
  spec.epochs = 3;
  const auto env = train_restarts(data, layout, spec, 3);
  ASSERT_EQ(env.runs.size(), 3u);
  for (const auto& r : env.runs) {
    EXPECT_GE(r.best_loss, env.min_loss);
    EXPECT_LE(r.best_loss, env.max_loss);
  }
  EXPECT_THROW(train_restarts(data, layout, spec, 0), DomainError);
}

TEST(Training, EmptyDatasetIsRejected) {
  EXPECT_THROW(train(dataset::SnapshotDataset{}, test_layout(2), TrainSpec{}), DomainError);
}

TEST(Transfer, SamePropertiesIsANoOp) {
  const auto layout = test_layout(4);
  const auto params = random_params(4, 17);
  const std::string before = params.sha256();
  const auto moved = transfer_properties(params, layout, layout.fiber, layout.matrix,
                                         layout.matrix.mode_count());
  EXPECT_EQ(params.sha256(), before);
  const auto path = path_of(2, 10);
  EXPECT_EQ(evaluate_path(params, moved, path), evaluate_path(params, layout, path));
}

TEST(Transfer, ModeCountResizesState) {
  const auto layout = test_layout(4);
  const auto moved = transfer_properties(random_params(4, 1), layout, layout.fiber, layout.matrix, 1);
  EXPECT_EQ(moved.matrix.mode_count(), 1u);
  const auto state = PrnnState::fresh(moved);
  EXPECT_EQ(state.points.back().history_size(), 9u + 6u);
}

TEST(Transfer, WrongFamilyIsRejected) {
  const auto layout = test_layout(4);
  const auto params = random_params(4, 1);
  EXPECT_THROW(transfer_properties(params, layout, layout.matrix, layout.matrix, 1), DomainError);
  EXPECT_THROW(transfer_properties(params, layout, layout.fiber, layout.fiber, 1), DomainError);
}

TEST(Transfer, FiberShearSwapLeavesMatrixOnlyComponents) {
  const auto layout = test_layout(4);
  auto params = random_params(4, 19);
  Voigt6 d = params.decoder(0);
  d(3) = 0.0;
  params.set_decoder(0, d);
  const auto moved = transfer_properties(params, layout, layout.fiber.with_shear_modulus_12(100.0),
                                         layout.matrix, layout.matrix.mode_count());
  const auto path = path_of(4, 8);
  const auto a = evaluate_path(params, layout, path);
  const auto b = evaluate_path(params, moved, path);
  bool changed = false;
  for (std::size_t t = 0; t < path.size(); ++t) {
    EXPECT_EQ(a[t](0, 1), b[t](0, 1));
    changed = changed || a[t](0, 0) != b[t](0, 0);
  }
  EXPECT_TRUE(changed);
}

TEST(ModelFile, RoundTripIsExact) {
  ModelFile m{test_layout(6), random_params(6, 23), {{"seed", 23}}};
  const auto file = temp_file("model.json");
  write_model(file, m);
  const auto back = read_model(file);
  EXPECT_EQ(back.params, m.params);
  EXPECT_EQ(back.layout.points, m.layout.points);
  EXPECT_EQ(back.layout.fiber, m.layout.fiber);
  EXPECT_EQ(properties_hash(back.layout.fiber, back.layout.matrix),
            properties_hash(m.layout.fiber, m.layout.matrix));
  EXPECT_EQ(back.metadata.at("seed"), 23);
  std::filesystem::remove(file);
}

TEST(ModelFile, VersionMismatchIsRefused) {
  auto j = model_to_json({test_layout(2), random_params(2, 1), {}});
  j["format_version"] = kModelFormatVersion + 1;
  EXPECT_THROW(model_from_json(j), ConfigError);
  j.erase("format_version");
  EXPECT_THROW(model_from_json(j), ConfigError);
}

TEST(ModelFile, TamperedParametersAreDetected) {
  auto j = model_to_json({test_layout(2), random_params(2, 1), {}});
  j["parameters"][0] = j["parameters"][0].get<double>() + 1.0;
  EXPECT_THROW(model_from_json(j), IoError);
}

TEST(ModelFile, MissingOrForeignFile) {
  EXPECT_THROW(read_model(temp_file("does_not_exist.json")), IoError);
  const auto file = temp_file("foreign.json");
  std::ofstream(file) << "OXDSET01 not json";
  EXPECT_THROW(read_model(file), IoError);
  std::filesystem::remove(file);
}
