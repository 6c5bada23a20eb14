// SPDX-License-Identifier: Apache-2.0
//
// offaxis: dataset generation, training, transfer, coupon and single-point
// runs, studies and field export. Exit codes: 0 ok, 2 config, 3 solver, 4 io.
#include "offaxis/config.hpp"
#include "offaxis/dataset.hpp"
#include "offaxis/errors.hpp"
#include "offaxis/export.hpp"
#include "offaxis/hashing.hpp"
#include "offaxis/model_io.hpp"
#include "offaxis/studies.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace offaxis;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kInternal = 1, kConfig = 2, kSolver = 3, kIo = 4 };

struct Common {
  fs::path config;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  fs::path out;
};

void add_common(CLI::App* cmd, Common& c, bool seed_required) {
  cmd->add_option("-c,--config", c.config, "TOML run configuration")->required();
  cmd->add_option("--set", c.overrides, "override a config key, key=value (repeatable)");
  auto* s = cmd->add_option("--seed", c.seed, "random seed");
  if (seed_required) s->required();
  cmd->add_option("-o,--out", c.out, "output file or directory")->required();
}

config::Config load(const Common& c) { return config::Config::load(c.config, c.overrides); }

io::Provenance provenance(const config::Config& cfg, const Common& c) { return {cfg.hash(), c.seed}; }

// Wall-clock data goes only here so that every other output is reproducible.
void log_line(const fs::path& file, const std::string& command) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  std::error_code ec;
  if (file.has_parent_path()) fs::create_directories(file.parent_path(), ec);
  std::ofstream(file, std::ios::app) << stamp << ' ' << command << '\n';
}

json provenance_json(const io::Provenance& p) {
  return {{"config_sha256", p.config_hash}, {"seed", p.seed ? json(*p.seed) : json(nullptr)}};
}

fs::path sidecar(const fs::path& file, const std::string& suffix) {
  return file.parent_path() / (file.filename().string() + suffix);
}

std::size_t mode_count(const config::Config& cfg, const std::string& key, const config::Calibration& cal) {
  const std::size_t n = cfg.count_or(key, cal.matrix.mode_count());
  if (n == 0 || n > cal.matrix.mode_count())
    throw ConfigError("key '" + key + "' must lie in [1, " + std::to_string(cal.matrix.mode_count()) + "]");
  return n;
}

// ---------------------------------------------------------------------------

int cmd_gen_data(const Common& c) {
  const auto cfg = load(c);
  const auto cal = config::calibration(cfg);
  const auto matrix = constitutive::mode_subset(cal.matrix, mode_count(cfg, "generator.modes", cal));
  const auto spec = config::paths(cfg, *c.seed);
  const std::string level = cfg.string_or("generator.level", "voigt");
  dataset::Generator generator;
  if (level == "voigt") {
    generator = micromodel::VoigtMixture::composite(cal.fiber, matrix, cal.fiber_fraction);
  } else if (level == "rve") {
    dataset::RveGenerator g;
    try {
      g.mesh = micromodel::RveMesh::build(static_cast<int>(cfg.count_or("generator.rve_cells", 4)), cal.fiber_fraction);
    } catch (const DomainError& e) {
      throw ConfigError(std::string("key 'generator.rve_cells': ") + e.what());
    }
    g.materials = {cal.fiber, matrix};
    generator = std::move(g);
  } else {
    throw ConfigError("key 'generator.level' must be voigt or rve (got '" + level + "')");
  }
  const auto data = dataset::generate_dataset(generator, pathgen::sample_paths(spec), *c.seed,
                                              properties_hash(cal.fiber, matrix));
  dataset::write_dataset(c.out, data);
  const json meta = {{"provenance", provenance_json(provenance(cfg, c))},
                     {"generator", level},
                     {"modes", matrix.mode_count()},
                     {"properties_sha256", data.metadata.properties_hash},
                     {"requested", data.metadata.requested},
                     {"skipped", data.metadata.skipped},
                     {"samples", data.size()}};
  io::write_text(sidecar(c.out, ".meta.json"), meta.dump(2) + "\n");
  log_line(sidecar(c.out, ".log"), "gen-data " + c.config.string());
  std::cout << "wrote " << data.size() << " curves (" << data.metadata.skipped << " skipped) to " << c.out.string()
            << '\n';
  return kOk;
}

int cmd_train(const Common& c, const std::optional<fs::path>& data_flag) {
  const auto cfg = load(c);
  const auto cal = config::calibration(cfg);
  const auto matrix = constitutive::mode_subset(cal.matrix, mode_count(cfg, "training.modes", cal));
  const fs::path file = data_flag ? *data_flag : cfg.resolve(cfg.string("training.dataset"));
  const auto data = dataset::read_dataset(file);
  if (data.metadata.properties_hash != properties_hash(cal.fiber, matrix))
    throw ConfigError("dataset " + file.string() + " was generated with different material properties");
  const auto layout = prnn::PrnnLayout::make(cfg.count("training.points"), cal.fiber, matrix);
  const auto spec = config::training(cfg, *c.seed);
  const std::string init = cfg.string_or("training.init", "random");
  const std::size_t restarts = cfg.count_or("training.restarts", 1);

  prnn::TrainReport report;
  if (init == "mixture") {
    report = prnn::train_from(data, layout, spec, prnn::PrnnParams::mixture_equivalent(layout, cal.fiber_fraction));
  } else if (init == "random") {
    if (restarts == 0) throw ConfigError("key 'training.restarts' must be positive");
    auto env = prnn::train_restarts(data, layout, spec, restarts);
    std::size_t best = 0;
    for (std::size_t r = 1; r < env.runs.size(); ++r)
      if (env.runs[r].best_loss < env.runs[best].best_loss) best = r;
    report = std::move(env.runs[best]);
  } else {
    throw ConfigError("key 'training.init' must be random or mixture (got '" + init + "')");
  }

  const auto prov = provenance(cfg, c);
  prnn::ModelFile model{layout, report.params, {}};
  model.metadata = {{"provenance", provenance_json(prov)},
                    {"dataset_properties_sha256", data.metadata.properties_hash},
                    {"curves", data.size()},
                    {"init", init},
                    {"epochs_run", report.train_loss.empty() ? 0 : report.train_loss.size() - 1},
                    {"best_epoch", report.best_epoch},
                    {"best_loss", report.best_loss},
                    {"rejected_steps", report.rejected_steps},
                    {"stop_reason", report.stop_reason}};
  prnn::write_model(c.out, model);

  std::vector<std::vector<std::string>> rows;
  for (std::size_t e = 0; e < report.train_loss.size(); ++e)
    rows.push_back({std::to_string(e), io::format_number(report.train_loss[e]),
                    e < report.validation_loss.size() ? io::format_number(report.validation_loss[e]) : ""});
  io::write_table_csv(sidecar(c.out, ".loss.csv"), {"epoch", "train_loss", "validation_loss"}, rows, prov);
  log_line(sidecar(c.out, ".log"), "train " + c.config.string());
  std::cout << "best loss " << report.best_loss << " at epoch " << report.best_epoch << " (" << report.stop_reason
            << ")\n";
  return kOk;
}

int cmd_transfer(const Common& c, const fs::path& model_file) {
  const auto cfg = load(c);
  const auto cal = config::calibration(cfg);
  auto model = prnn::read_model(model_file);
  const std::size_t n = mode_count(cfg, "transfer.modes", cal);
  const auto before = model.params.sha256();
  model.layout = prnn::transfer_properties(model.params, model.layout, cal.fiber, cal.matrix, n);
  if (model.params.sha256() != before) throw ContractViolation("transfer touched the parameters");
  model.metadata["transfer"] = {{"provenance", provenance_json(provenance(cfg, c))},
                                {"modes", n},
                                {"properties_sha256", properties_hash(cal.fiber, model.layout.matrix)},
                                {"params_sha256", before}};
  prnn::write_model(c.out, model);
  log_line(sidecar(c.out, ".log"), "transfer " + model_file.string());
  std::cout << "transferred to " << n << " modes, params " << before << '\n';
  return kOk;
}

json fields_json(const macro::MacroMesh& mesh, const macro::MacroResult& r, const io::Provenance& p,
                 std::size_t stride) {
  json nodes = json::array(), elements = json::array(), frames = json::array();
  for (const auto& x : mesh.nodes) nodes.push_back({x.x(), x.y(), x.z()});
  for (const auto& e : mesh.elements) elements.push_back(e);
  auto flat = [](const Tensor2& t) {
    std::vector<double> v(9);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) v[3 * i + j] = t(i, j);
    return v;
  };
  for (std::size_t k = 0; k < r.frames.size(); ++k) {
    if (k % stride != 0 && k + 1 != r.frames.size()) continue;
    const auto& f = r.frames[k];
    json el = json::array();
    for (const auto& e : f.elements)
      el.push_back({{"f", flat(e.f)}, {"p", flat(e.p)}, {"sigma", flat(e.sigma)}, {"phi_deg", e.phi_deg}});
    frames.push_back({{"index", k}, {"time", f.time}, {"dt", f.dt}, {"eps_yy", f.eps_yy}, {"sig_yy", f.sig_yy},
                      {"sig_xy", f.sig_xy}, {"applied", f.applied}, {"elements", el}});
  }
  return {{"provenance", provenance_json(p)}, {"nodes", nodes}, {"elements", elements}, {"frames", frames}};
}

void write_run_common(const fs::path& dir, const config::Config& cfg, const std::vector<io::CurveRow>& rows,
                      const io::Provenance& p, const json& summary) {
  io::write_text(dir / "config.toml", cfg.canonical() + "\n");
  io::write_curve_csv(dir / "curve.csv", rows, p);
  io::write_text(dir / "summary.json", summary.dump(2) + "\n");
}

int cmd_run_macro(const Common& c) {
  const auto cfg = load(c);
  const auto law = config::make_law(cfg);
  const auto problem = config::macro_problem(cfg, *law);
  const auto mesh = macro::build_mesh(problem.coupon);
  const auto result = macro::run(mesh, problem, *law);
  const auto prov = provenance(cfg, c);
  const auto s = studies::summarize(result);
  double imbalance = 0.0;
  std::size_t iterations = 0;
  for (const auto& f : result.frames) {
    imbalance = std::max(imbalance, f.reaction_imbalance);
    iterations += f.iterations;
  }
  const json summary = {{"provenance", provenance_json(prov)},
                        {"law", law->name()},
                        {"elements", mesh.element_count()},
                        {"tab_angle_deg", problem.coupon.oblique_deg},
                        {"lateral_free", problem.lateral_free},
                        {"completed", result.completed},
                        {"message", result.message},
                        {"frames", result.frames.size()},
                        {"cuts", result.cuts},
                        {"newton_assemblies", iterations},
                        {"max_reaction_imbalance", imbalance},
                        {"peak_abs_sig_xy", s.peak_shear},
                        {"final_eps_yy", s.final_strain},
                        {"final_sig_yy", s.final_stress},
                        {"final_eps_cov", s.final_cov}};
  write_run_common(c.out, cfg, io::curve_rows(result), prov, summary);
  if (cfg.boolean_or("output.fields", false)) {
    if (!problem.solver.keep_fields) throw ConfigError("output.fields needs solver.keep_fields = true");
    const std::size_t stride = std::max<std::size_t>(1, cfg.count_or("output.field_stride", 1));
    io::write_text(c.out / "fields.json", fields_json(mesh, result, prov, stride).dump() + "\n");
  }
  log_line(c.out / "run.log", "run-macro " + c.config.string());
  std::cout << "run-macro: " << result.frames.size() << " frames, final eps_yy " << s.final_strain << ", sig_yy "
            << s.final_stress << " MPa\n";
  if (!result.completed) {
    std::cerr << "run stopped early: " << result.message << '\n';
    return kSolver;
  }
  return kOk;
}

int cmd_run_single(const Common& c) {
  const auto cfg = load(c);
  const auto law = config::make_law(cfg);
  const auto problem = config::single_problem(cfg);
  const auto curve = singlescale::solve(problem, *law);
  const auto prov = provenance(cfg, c);
  json phi = json::array();
  for (const auto& p : curve.points) phi.push_back(p.phi_deg);
  const json summary = {{"provenance", provenance_json(prov)},
                        {"law", law->name()},
                        {"fiber_rotation", problem.fiber_rotation},
                        {"completed", curve.completed},
                        {"message", curve.message},
                        {"points", curve.points.size()},
                        {"cuts", curve.cuts},
                        {"phi_deg", phi}};
  write_run_common(c.out, cfg, io::curve_rows(curve), prov, summary);
  log_line(c.out / "run.log", "run-single " + c.config.string());
  std::cout << "run-single: " << curve.points.size() << " points\n";
  if (!curve.completed) {
    std::cerr << "run stopped early: " << curve.message << '\n';
    return kSolver;
  }
  return kOk;
}

int cmd_study(const Common& c, std::size_t workers) {
  const auto cfg = load(c);
  studies::StudyContext ctx{c.out, provenance(cfg, c), workers ? workers : cfg.count_or("study.workers", 1)};
  io::write_text(c.out / "config.toml", cfg.canonical() + "\n");
  const auto table = studies::run_study(cfg, ctx);
  log_line(c.out / "run.log", "study " + c.config.string());
  std::cout << "study " << cfg.string("study.kind") << ": " << table.rows.size() << " rows in "
            << (c.out / "table.csv").string() << '\n';
  return kOk;
}

Tensor2 tensor_from(const json& j) {
  Tensor2 t;
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) t(i, k) = j.at(3 * i + k).get<double>();
  return t;
}

int cmd_export(const fs::path& run, const fs::path& out) {
  json j;
  try {
    j = json::parse(io::read_text(run / "fields.json"));
  } catch (const json::exception& e) {
    throw IoError("malformed " + (run / "fields.json").string() + ": " + e.what());
  }
  try {
    io::Provenance p;
    p.config_hash = j.at("provenance").at("config_sha256").get<std::string>();
    if (!j.at("provenance").at("seed").is_null()) p.seed = j.at("provenance").at("seed").get<std::uint64_t>();
    macro::MacroMesh mesh;
    for (const auto& n : j.at("nodes")) mesh.nodes.emplace_back(n.at(0).get<double>(), n.at(1).get<double>(), n.at(2).get<double>());
    for (const auto& e : j.at("elements")) mesh.elements.push_back(e.get<std::array<int, 6>>());
    macro::MacroResult result;
    std::vector<std::size_t> index;
    for (const auto& f : j.at("frames")) {
      macro::FieldFrame frame;
      frame.time = f.at("time");
      frame.dt = f.at("dt");
      frame.eps_yy = f.at("eps_yy");
      frame.sig_yy = f.at("sig_yy");
      frame.sig_xy = f.at("sig_xy");
      frame.applied = f.at("applied");
      for (const auto& e : f.at("elements"))
        frame.elements.push_back({tensor_from(e.at("f")), tensor_from(e.at("sigma")), tensor_from(e.at("p")),
                                  e.at("phi_deg").get<double>()});
      index.push_back(f.at("index"));
      result.frames.push_back(std::move(frame));
    }
    for (std::size_t k = 0; k < result.frames.size(); ++k) {
      char name[32];
      std::snprintf(name, sizeof name, "frame_%04zu.vtk", index[k]);
      io::write_vtk(out / name, mesh, result.frames[k], p);
    }
    io::write_statistics_csv(out / "statistics.csv", macro::field_statistics(result), p);
    std::cout << "exported " << result.frames.size() << " frames to " << out.string() << '\n';
  } catch (const json::exception& e) {
    throw IoError("malformed " + (run / "fields.json").string() + ": " + e.what());
  }
  log_line(out / "export.log", "export " + run.string());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Off-axis composite coupons with a physically recurrent surrogate"};
  app.require_subcommand(1);

  Common gen, train, transfer, macro_run, single, study;
  auto* g = app.add_subcommand("gen-data", "generate a stress/stretch dataset");
  add_common(g, gen, true);
  auto* t = app.add_subcommand("train", "train a network on a dataset");
  add_common(t, train, true);
  std::optional<fs::path> data_flag;
  t->add_option("--data", data_flag, "dataset file (overrides training.dataset)");
  auto* x = app.add_subcommand("transfer", "swap material properties and mode count of a trained network");
  add_common(x, transfer, false);
  fs::path model_file;
  x->add_option("-m,--model", model_file, "trained model file")->required();
  auto* m = app.add_subcommand("run-macro", "coupon simulation");
  add_common(m, macro_run, false);
  auto* s = app.add_subcommand("run-single", "single-point simulation");
  add_common(s, single, false);
  auto* st = app.add_subcommand("study", "run a study and write its table");
  add_common(st, study, false);
  std::size_t workers = 0;
  st->add_option("-j,--workers", workers, "parallel runs (overrides study.workers)");
  auto* e = app.add_subcommand("export", "VTK frames and field statistics of a coupon run");
  fs::path run_dir, export_dir;
  e->add_option("--run", run_dir, "run-macro output directory")->required();
  e->add_option("-o,--out", export_dir, "export directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*g) return cmd_gen_data(gen);
    if (*t) return cmd_train(train, data_flag);
    if (*x) return cmd_transfer(transfer, model_file);
    if (*m) return cmd_run_macro(macro_run);
    if (*s) return cmd_run_single(single);
    if (*st) return cmd_study(study, workers);
    if (*e) return cmd_export(run_dir, export_dir);
  } catch (const ConfigError& err) {
    std::cerr << "config error: " << err.what() << '\n';
    return kConfig;
  } catch (const IoError& err) {
    std::cerr << "io error: " << err.what() << '\n';
    return kIo;
  } catch (const SolverError& err) {
    std::cerr << "solver error: " << err.what() << '\n';
    return kSolver;
  } catch (const DomainError& err) {
    std::cerr << "domain error: " << err.what() << '\n';
    return kSolver;
  } catch (const fs::filesystem_error& err) {
    std::cerr << "io error: " << err.what() << '\n';
    return kIo;
  } catch (const std::exception& err) {
    std::cerr << "internal error: " << err.what() << '\n';
    return kInternal;
  }
  return kInternal;
}
