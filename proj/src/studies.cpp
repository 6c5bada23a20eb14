// SPDX-License-Identifier: Apache-2.0
#include "offaxis/studies.hpp"

#include "offaxis/errors.hpp"
#include "offaxis/hashing.hpp"
#include "offaxis/model_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

namespace offaxis::studies {

namespace fs = std::filesystem;
using io::format_number;

StudyKind parse_kind(const std::string& name) {
  if (name == "mode-sweep") return StudyKind::ModeSweep;
  if (name == "transfer-grid") return StudyKind::TransferGrid;
  if (name == "endtab-compare") return StudyKind::EndtabCompare;
  if (name == "bc-compare") return StudyKind::BcCompare;
  if (name == "model-selection") return StudyKind::ModelSelection;
  throw ConfigError("key 'study.kind' must be mode-sweep, transfer-grid, endtab-compare, bc-compare or "
                    "model-selection (got '" + name + "')");
}

std::string kind_name(StudyKind kind) {
  switch (kind) {
    case StudyKind::ModeSweep: return "mode-sweep";
    case StudyKind::TransferGrid: return "transfer-grid";
    case StudyKind::EndtabCompare: return "endtab-compare";
    case StudyKind::BcCompare: return "bc-compare";
    case StudyKind::ModelSelection: return "model-selection";
  }
  return "";
}

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& body) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t count = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
  if (count == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < count; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::vector<ModeError> mode_sweep(const prnn::PrnnParams& params, const prnn::PrnnLayout& layout,
                                  const constitutive::FiberProperties& fiber,
                                  const constitutive::MatrixProperties& matrix,
                                  const dataset::SnapshotDataset& data) {
  std::vector<ModeError> out;
  for (std::size_t n = 1; n <= matrix.mode_count(); ++n) {
    const auto moved = prnn::transfer_properties(params, layout, fiber, matrix, n);
    out.push_back({n, prnn::evaluate_errors(params, moved, data)});
  }
  return out;
}

dataset::SnapshotDataset network_dataset(const prnn::PrnnParams& params, const prnn::PrnnLayout& layout,
                                         const std::vector<pathgen::LoadPath>& paths, std::uint64_t seed) {
  dataset::SnapshotDataset data;
  data.metadata.seed = seed;
  data.metadata.requested = paths.size();
  data.metadata.properties_hash = properties_hash(layout.fiber, layout.matrix);
  for (const auto& path : paths) {
    dataset::Sample s;
    s.path = path;
    for (const auto& sig : prnn::evaluate_path(params, layout, path)) s.stress.push_back(to_voigt(sig));
    data.samples.push_back(std::move(s));
  }
  return data;
}

CouponSummary summarize(const macro::MacroResult& result) {
  CouponSummary s;
  s.completed = result.completed;
  for (const auto& f : result.frames) s.peak_shear = std::max(s.peak_shear, std::abs(f.sig_xy));
  if (!result.frames.empty()) {
    const auto& last = result.frames.back();
    s.final_strain = last.eps_yy;
    s.final_stress = last.sig_yy;
  }
  const auto stats = macro::field_statistics(result);
  if (!stats.empty()) s.final_cov = stats.back().eps_cov;
  return s;
}

namespace {

std::uint64_t require_seed(const StudyContext& ctx, const std::string& what) {
  if (!ctx.provenance.seed) throw ConfigError(what + " needs --seed");
  return *ctx.provenance.seed;
}

std::string rel(const fs::path& dir, const StudyContext& ctx) {
  return fs::relative(dir, ctx.out).generic_string();
}

void write_json(const fs::path& file, nlohmann::json j, const StudyContext& ctx) {
  j["config_sha256"] = ctx.provenance.config_hash;
  j["seed"] = ctx.provenance.seed ? nlohmann::json(*ctx.provenance.seed) : nlohmann::json(nullptr);
  io::write_text(file, j.dump(2) + "\n");
}

nlohmann::json error_json(const prnn::ErrorMetrics& e) {
  return {{"mae_mpa", e.mae}, {"relative_pct", e.relative}, {"failed", e.failed}};
}

prnn::ModelFile load_model(const config::Config& c) { return prnn::read_model(c.resolve(c.string("model.file"))); }

dataset::SnapshotDataset mixture_dataset(const constitutive::FiberProperties& fiber,
                                         const constitutive::MatrixProperties& matrix, double vf,
                                         const std::vector<pathgen::LoadPath>& paths, std::uint64_t seed) {
  return dataset::generate_dataset(micromodel::VoigtMixture::composite(fiber, matrix, vf), paths, seed,
                                   properties_hash(fiber, matrix));
}

// ---------------------------------------------------------------------------

Table study_mode_sweep(const config::Config& c, const StudyContext& ctx) {
  const auto model = load_model(c);
  const auto cal = config::calibration(c);
  const std::string reference = c.string_or("study.reference", "voigt");
  if (reference != "voigt" && reference != "prnn")
    throw ConfigError("key 'study.reference' must be voigt or prnn (got '" + reference + "')");

  dataset::SnapshotDataset data;
  if (c.has("study.dataset")) {
    data = dataset::read_dataset(c.resolve(c.string("study.dataset")));
  } else {
    const auto seed = require_seed(ctx, "mode-sweep without study.dataset");
    const auto paths = pathgen::sample_paths(config::paths(c, seed));
    if (reference == "voigt") {
      data = mixture_dataset(cal.fiber, cal.matrix, cal.fiber_fraction, paths, seed);
    } else {
      const auto full = prnn::transfer_properties(model.params, model.layout, cal.fiber, cal.matrix,
                                                  cal.matrix.mode_count());
      data = network_dataset(model.params, full, paths, seed);
    }
  }
  dataset::write_dataset(ctx.out / "runs" / "test_data.oxd", data);

  const std::size_t full = cal.matrix.mode_count();
  std::vector<ModeError> errors(full);
  parallel_for(full, ctx.workers, [&](std::size_t i) {
    const auto moved = prnn::transfer_properties(model.params, model.layout, cal.fiber, cal.matrix, i + 1);
    errors[i] = {i + 1, prnn::evaluate_errors(model.params, moved, data)};
    write_json(ctx.out / "runs" / ("modes_" + std::to_string(i + 1)) / "errors.json",
               {{"modes", i + 1}, {"error", error_json(errors[i].error)}, {"test_data", "../test_data.oxd"},
                {"params_sha256", model.params.sha256()}},
               ctx);
  });

  Table t{{"modes", "mae_mpa", "relative_pct", "failed_curves", "run_dir"}, {}};
  for (const auto& e : errors)
    t.rows.push_back({std::to_string(e.modes), format_number(e.error.mae), format_number(e.error.relative),
                      std::to_string(e.error.failed), "runs/modes_" + std::to_string(e.modes)});
  return t;
}

Table study_transfer_grid(const config::Config& c, const StudyContext& ctx) {
  const auto model = load_model(c);
  const auto cal = config::calibration(c);
  const auto moduli = c.numbers("study.shear_moduli");
  const std::size_t modes = c.count_or("study.modes", cal.matrix.mode_count());
  if (modes == 0 || modes > cal.matrix.mode_count())
    throw ConfigError("key 'study.modes' must lie in [1, " + std::to_string(cal.matrix.mode_count()) + "]");
  const auto seed = require_seed(ctx, "transfer-grid");
  const auto paths = pathgen::sample_paths(config::paths(c, seed));

  std::vector<prnn::ErrorMetrics> errors(moduli.size());
  std::vector<std::string> dirs(moduli.size());
  parallel_for(moduli.size(), ctx.workers, [&](std::size_t i) {
    constitutive::FiberProperties fiber;
    try {
      fiber = cal.fiber.with_shear_modulus_12(moduli[i]);
      fiber.validate();
    } catch (const DomainError& e) {
      throw ConfigError("study.shear_moduli[" + std::to_string(i) + "]: " + e.what());
    }
    const auto data = mixture_dataset(fiber, cal.matrix, cal.fiber_fraction, paths, seed);
    const auto moved = prnn::transfer_properties(model.params, model.layout, fiber, cal.matrix, modes);
    errors[i] = prnn::evaluate_errors(model.params, moved, data);
    const fs::path dir = ctx.out / "runs" / ("g12_" + std::to_string(i));
    dataset::write_dataset(dir / "test_data.oxd", data);
    write_json(dir / "errors.json",
               {{"shear_modulus_12", moduli[i]}, {"modes", modes}, {"error", error_json(errors[i])},
                {"params_sha256", model.params.sha256()}},
               ctx);
    dirs[i] = rel(dir, ctx);
  });

  Table t{{"shear_modulus_12_mpa", "modes", "mae_mpa", "relative_pct", "failed_curves", "run_dir"}, {}};
  for (std::size_t i = 0; i < moduli.size(); ++i)
    t.rows.push_back({format_number(moduli[i]), std::to_string(modes), format_number(errors[i].mae),
                      format_number(errors[i].relative), std::to_string(errors[i].failed), dirs[i]});
  return t;
}

struct CouponRun {
  std::string name;
  macro::MacroProblem problem;
};

std::vector<CouponSummary> run_coupons(const std::vector<CouponRun>& runs, const evaluator::LocalLaw& law,
                                       const StudyContext& ctx) {
  std::vector<CouponSummary> out(runs.size());
  parallel_for(runs.size(), ctx.workers, [&](std::size_t i) {
    const auto result = macro::run(runs[i].problem, law);
    out[i] = summarize(result);
    const fs::path dir = ctx.out / "runs" / runs[i].name;
    io::write_curve_csv(dir / "curve.csv", io::curve_rows(result), ctx.provenance);
    const auto& coupon = runs[i].problem.coupon;
    write_json(dir / "summary.json",
               {{"angle_deg", coupon.angle.degrees()},
                {"tab", coupon.tab == macro::EndTab::Oblique ? "oblique" : "straight"},
                {"tab_angle_deg", coupon.oblique_deg},
                {"lateral_free", runs[i].problem.lateral_free},
                {"completed", result.completed},
                {"message", result.message},
                {"peak_abs_sig_xy", out[i].peak_shear},
                {"final_eps_yy", out[i].final_strain},
                {"final_sig_yy", out[i].final_stress},
                {"final_eps_cov", out[i].final_cov}},
               ctx);
  });
  return out;
}

Table study_endtab_compare(const config::Config& c, const StudyContext& ctx) {
  const auto law = config::make_law(c);
  const auto base = config::macro_problem(c, *law);
  double beta = 90.0;
  if (c.has("coupon.oblique_angle") && !c.is_string("coupon.oblique_angle"))
    beta = c.number("coupon.oblique_angle");
  else
    beta = macro::oblique_angle_for(*law, base.coupon.angle);

  std::vector<CouponRun> runs;
  for (const bool oblique : {false, true})
    for (const bool free : {false, true}) {
      CouponRun r{std::string(oblique ? "oblique" : "straight") + (free ? "_free" : "_fixed"), base};
      r.problem.coupon.tab = oblique ? macro::EndTab::Oblique : macro::EndTab::Straight;
      r.problem.coupon.oblique_deg = oblique ? beta : 90.0;
      r.problem.coupon.validate();
      r.problem.lateral_free = free;
      runs.push_back(std::move(r));
    }
  const auto s = run_coupons(runs, *law, ctx);

  Table t{{"tab", "lateral", "tab_angle_deg", "peak_abs_sig_xy_mpa", "final_eps_yy", "final_sig_yy_mpa",
           "completed", "run_dir"},
          {}};
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& p = runs[i].problem;
    t.rows.push_back({p.coupon.tab == macro::EndTab::Oblique ? "oblique" : "straight",
                      p.lateral_free ? "free" : "fixed", format_number(p.coupon.oblique_deg),
                      format_number(s[i].peak_shear), format_number(s[i].final_strain),
                      format_number(s[i].final_stress), s[i].completed ? "yes" : "no", "runs/" + runs[i].name});
  }
  return t;
}

Table study_bc_compare(const config::Config& c, const StudyContext& ctx) {
  const auto law = config::make_law(c);
  const auto base = config::macro_problem(c, *law);
  const auto angles = c.has("study.angles") ? c.numbers("study.angles")
                                            : std::vector<double>{base.coupon.angle.degrees()};
  std::vector<CouponRun> runs;
  for (double a : angles)
    for (const bool free : {false, true}) {
      CouponRun r{"theta_" + format_number(a) + (free ? "_free" : "_fixed"), base};
      r.problem.coupon.angle = kinematics::OffAxisAngle(a);
      r.problem.coupon.tab = macro::EndTab::Straight;
      r.problem.coupon.oblique_deg = 90.0;
      r.problem.lateral_free = free;
      runs.push_back(std::move(r));
    }
  const auto s = run_coupons(runs, *law, ctx);

  Table t{{"angle_deg", "lateral", "final_eps_yy", "final_sig_yy_mpa", "final_eps_cov", "peak_abs_sig_xy_mpa",
           "completed", "run_dir"},
          {}};
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& p = runs[i].problem;
    t.rows.push_back({format_number(p.coupon.angle.degrees()), p.lateral_free ? "free" : "fixed",
                      format_number(s[i].final_strain), format_number(s[i].final_stress),
                      format_number(s[i].final_cov), format_number(s[i].peak_shear),
                      s[i].completed ? "yes" : "no", "runs/" + runs[i].name});
  }
  return t;
}

Table study_model_selection(const config::Config& c, const StudyContext& ctx) {
  const auto cal = config::calibration(c);
  const auto points = c.counts("study.points");
  const auto curves = c.counts("study.curves");
  const std::size_t restarts = c.count_or("study.restarts", 10);
  const std::size_t test_curves = c.count_or("study.test_curves", 20);
  const std::size_t train_modes = c.count_or("study.train_modes", cal.matrix.mode_count());
  if (points.empty() || curves.empty() || restarts == 0 || test_curves == 0)
    throw ConfigError("model-selection needs non-empty study.points, study.curves and positive restarts/test_curves");
  if (train_modes == 0 || train_modes > cal.matrix.mode_count())
    throw ConfigError("key 'study.train_modes' must lie in [1, " + std::to_string(cal.matrix.mode_count()) + "]");
  const auto seed = require_seed(ctx, "model-selection");
  const auto spec = config::training(c, seed);
  const auto matrix = constitutive::mode_subset(cal.matrix, train_modes);

  const std::size_t most = *std::max_element(curves.begin(), curves.end());
  const auto all = mixture_dataset(cal.fiber, matrix, cal.fiber_fraction,
                                   pathgen::sample_paths(config::paths(c, seed, most + test_curves)), seed);
  if (all.size() < most + 1) throw SolverError("model-selection: too many generator failures");
  // The test set is the tail and never overlaps any training prefix.
  dataset::SnapshotDataset test = all;
  test.samples.assign(all.samples.begin() + static_cast<std::ptrdiff_t>(most), all.samples.end());
  dataset::write_dataset(ctx.out / "runs" / "test_data.oxd", test);

  struct Cell {
    std::size_t n, m;
    prnn::ErrorMetrics lo, hi;
    double loss_lo = 0, loss_hi = 0;
    std::string dir;
  };
  std::vector<Cell> cells;
  for (auto n : points)
    for (auto m : curves) cells.push_back({n, m, {}, {}, 0, 0, ""});

  parallel_for(cells.size(), ctx.workers, [&](std::size_t i) {
    auto& cell = cells[i];
    dataset::SnapshotDataset train = all;
    train.samples.assign(all.samples.begin(), all.samples.begin() + static_cast<std::ptrdiff_t>(cell.m));
    const auto layout = prnn::PrnnLayout::make(cell.n, cal.fiber, matrix);
    const auto envelope = prnn::train_restarts(train, layout, spec, restarts);
    const fs::path dir = ctx.out / "runs" / ("N" + std::to_string(cell.n) + "_c" + std::to_string(cell.m));
    cell.dir = rel(dir, ctx);
    cell.loss_lo = envelope.min_loss;
    cell.loss_hi = envelope.max_loss;
    nlohmann::json list = nlohmann::json::array();
    for (std::size_t r = 0; r < envelope.runs.size(); ++r) {
      const auto& run = envelope.runs[r];
      const auto e = prnn::evaluate_errors(run.params, layout, test);
      if (r == 0 || e.mae < cell.lo.mae) cell.lo = e;
      if (r == 0 || e.mae > cell.hi.mae) cell.hi = e;
      prnn::ModelFile file{layout, run.params, {}};
      file.metadata = {{"seed", spec.seed + r},
                       {"config_sha256", ctx.provenance.config_hash},
                       {"best_epoch", run.best_epoch},
                       {"best_loss", run.best_loss},
                       {"stop_reason", run.stop_reason}};
      const std::string name = "restart_" + std::to_string(r) + ".json";
      prnn::write_model(dir / name, file);
      list.push_back({{"model", name}, {"best_loss", run.best_loss}, {"test", error_json(e)}});
    }
    write_json(dir / "summary.json",
               {{"points", cell.n}, {"curves", cell.m}, {"restarts", list}, {"test_data", "../test_data.oxd"}}, ctx);
  });

  Table t{{"points", "curves", "mae_min_mpa", "mae_max_mpa", "relative_min_pct", "relative_max_pct",
           "loss_min", "loss_max", "run_dir"},
          {}};
  for (const auto& cell : cells)
    t.rows.push_back({std::to_string(cell.n), std::to_string(cell.m), format_number(cell.lo.mae),
                      format_number(cell.hi.mae), format_number(cell.lo.relative), format_number(cell.hi.relative),
                      format_number(cell.loss_lo), format_number(cell.loss_hi), cell.dir});
  return t;
}

}  // namespace

Table run_study(const config::Config& c, const StudyContext& ctx) {
  const auto kind = parse_kind(c.string("study.kind"));
  Table t;
  switch (kind) {
    case StudyKind::ModeSweep: t = study_mode_sweep(c, ctx); break;
    case StudyKind::TransferGrid: t = study_transfer_grid(c, ctx); break;
    case StudyKind::EndtabCompare: t = study_endtab_compare(c, ctx); break;
    case StudyKind::BcCompare: t = study_bc_compare(c, ctx); break;
    case StudyKind::ModelSelection: t = study_model_selection(c, ctx); break;
  }
  io::write_table_csv(ctx.out / "table.csv", t.header, t.rows, ctx.provenance);
  return t;
}

}  // namespace offaxis::studies
