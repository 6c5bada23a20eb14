// SPDX-License-Identifier: Apache-2.0
#include "offaxis/config.hpp"

#include "offaxis/errors.hpp"
#include "offaxis/hashing.hpp"
#include "offaxis/model_io.hpp"

#include <toml.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace offaxis::config {

struct Config::Impl {
  toml::table root;
  std::filesystem::path base_dir;
};

namespace {

std::string key_name(std::string_view key) { return "'" + std::string(key) + "'"; }

toml::node_view<const toml::node> lookup(const toml::table& t, std::string_view key) {
  return t.at_path(key);
}

void apply_override(toml::table& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key=value: " + assignment);
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  toml::table parsed;
  try {
    parsed = toml::parse("v = " + raw);
  } catch (const toml::parse_error&) {
    parsed = toml::table{{"v", raw}};
  }
  toml::table* t = &root;
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    if (dot == std::string::npos) break;
    const std::string part = key.substr(start, dot - start);
    auto* child = t->get(part);
    if (!child) {
      t->insert(part, toml::table{});
      child = t->get(part);
    }
    if (!child->is_table()) throw ConfigError("override " + key_name(key) + " crosses a non-table key");
    t = child->as_table();
    start = dot + 1;
  }
  t->insert_or_assign(key.substr(start), *parsed.get("v"));
}

}  // namespace

Config Config::parse(std::string_view text, const std::vector<std::string>& overrides,
                     const std::filesystem::path& base_dir) {
  auto impl = std::make_shared<Impl>();
  try {
    impl->root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "TOML syntax error at line " << e.source().begin.line << ": " << e.description();
    throw ConfigError(msg.str());
  }
  for (const auto& o : overrides) apply_override(impl->root, o);
  impl->base_dir = base_dir;
  return Config(std::move(impl));
}

Config Config::load(const std::filesystem::path& file, const std::vector<std::string>& overrides) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot read config " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), overrides, file.has_parent_path() ? file.parent_path() : std::filesystem::path("."));
}

std::string Config::canonical() const {
  std::ostringstream ss;
  ss << toml::toml_formatter(impl_->root);
  return ss.str();
}

std::string Config::hash() const { return sha256_hex(canonical()); }

bool Config::has(std::string_view key) const { return static_cast<bool>(lookup(impl_->root, key)); }

double Config::number(std::string_view key) const {
  const auto n = lookup(impl_->root, key);
  if (!n) throw ConfigError("missing key " + key_name(key));
  if (const auto* f = n.as_floating_point()) return f->get();
  if (const auto* i = n.as_integer()) return static_cast<double>(i->get());
  throw ConfigError("key " + key_name(key) + " must be a number");
}

double Config::number_or(std::string_view key, double fallback) const { return has(key) ? number(key) : fallback; }

std::int64_t Config::integer(std::string_view key) const {
  const auto n = lookup(impl_->root, key);
  if (!n) throw ConfigError("missing key " + key_name(key));
  if (const auto* i = n.as_integer()) return i->get();
  throw ConfigError("key " + key_name(key) + " must be an integer");
}

std::int64_t Config::integer_or(std::string_view key, std::int64_t fallback) const {
  return has(key) ? integer(key) : fallback;
}

std::size_t Config::count(std::string_view key) const {
  const auto v = integer(key);
  if (v < 0) throw ConfigError("key " + key_name(key) + " must be non-negative");
  return static_cast<std::size_t>(v);
}

std::size_t Config::count_or(std::string_view key, std::size_t fallback) const {
  return has(key) ? count(key) : fallback;
}

bool Config::is_string(std::string_view key) const {
  return static_cast<bool>(lookup(impl_->root, key).as_string());
}

bool Config::boolean_or(std::string_view key, bool fallback) const {
  const auto n = lookup(impl_->root, key);
  if (!n) return fallback;
  if (const auto* b = n.as_boolean()) return b->get();
  throw ConfigError("key " + key_name(key) + " must be true or false");
}

std::string Config::string(std::string_view key) const {
  const auto n = lookup(impl_->root, key);
  if (!n) throw ConfigError("missing key " + key_name(key));
  if (const auto* s = n.as_string()) return s->get();
  throw ConfigError("key " + key_name(key) + " must be a string");
}

std::string Config::string_or(std::string_view key, const std::string& fallback) const {
  return has(key) ? string(key) : fallback;
}

std::vector<double> Config::numbers(std::string_view key) const {
  const auto n = lookup(impl_->root, key);
  if (!n) throw ConfigError("missing key " + key_name(key));
  const auto* arr = n.as_array();
  if (!arr) throw ConfigError("key " + key_name(key) + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : *arr) {
    if (const auto* f = e.as_floating_point())
      out.push_back(f->get());
    else if (const auto* i = e.as_integer())
      out.push_back(static_cast<double>(i->get()));
    else
      throw ConfigError("key " + key_name(key) + " must be an array of numbers");
  }
  return out;
}

std::vector<std::size_t> Config::counts(std::string_view key) const {
  std::vector<std::size_t> out;
  for (double v : numbers(key)) {
    if (!(v >= 0.0) || v != std::floor(v)) throw ConfigError("key " + key_name(key) + " must hold non-negative integers");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

std::vector<Config> Config::tables(std::string_view key) const {
  const auto n = lookup(impl_->root, key);
  if (!n) throw ConfigError("missing key " + key_name(key));
  const auto* arr = n.as_array();
  if (!arr || !arr->is_array_of_tables()) throw ConfigError("key " + key_name(key) + " must be an array of tables");
  std::vector<Config> out;
  for (const auto& e : *arr) {
    auto impl = std::make_shared<Impl>();
    impl->root = *e.as_table();
    impl->base_dir = impl_->base_dir;
    out.push_back(Config(std::move(impl)));
  }
  return out;
}

Config Config::section(std::string_view key) const {
  const auto n = lookup(impl_->root, key);
  if (!n) throw ConfigError("missing key " + key_name(key));
  if (!n.is_table()) throw ConfigError("key " + key_name(key) + " must be a table");
  auto impl = std::make_shared<Impl>();
  impl->root = *n.as_table();
  impl->base_dir = impl_->base_dir;
  return Config(std::move(impl));
}

std::filesystem::path Config::resolve(const std::string& path) const {
  const std::filesystem::path p(path);
  return p.is_absolute() ? p : impl_->base_dir / p;
}

// ---------------------------------------------------------------------------

Calibration calibration(const Config& c) {
  Calibration out;
  out.fiber_fraction = c.number_or("material.fiber_fraction", 0.6);
  auto& f = out.fiber;
  f.mu = c.number("material.fiber.mu");
  f.lambda = c.number("material.fiber.lambda");
  if (c.has("material.fiber.shear_modulus_12"))
    f.alpha = f.mu - c.number("material.fiber.shear_modulus_12");
  else
    f.alpha = c.number("material.fiber.alpha");
  f.beta = c.number_or("material.fiber.beta", 0.0);
  f.gamma = c.number("material.fiber.gamma");

  std::vector<double> tau0;
  std::vector<std::vector<constitutive::MaxwellMode>> per_process;
  const auto processes = c.tables("material.matrix.processes");
  for (std::size_t p = 0; p < processes.size(); ++p) {
    tau0.push_back(processes[p].number("activation_stress"));
    std::vector<constitutive::MaxwellMode> modes;
    for (const auto& m : processes[p].tables("modes")) {
      const double g = m.number("shear_modulus");
      double eta;
      if (m.has("viscosity"))
        eta = m.number("viscosity");
      else
        eta = g * m.number("relaxation_time");
      modes.push_back({g, eta, p});
    }
    per_process.push_back(std::move(modes));
  }
  const double bulk = c.number("material.matrix.bulk_modulus");
  const double hardening = c.number("material.matrix.hardening_modulus");
  try {
    out.matrix = constitutive::MatrixProperties::from_processes(bulk, hardening, tau0, per_process);
    out.matrix.validate();
    f.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("[material]: ") + e.what());
  }
  if (!(out.fiber_fraction > 0.0 && out.fiber_fraction < 1.0))
    throw ConfigError("key 'material.fiber_fraction' must lie in (0, 1)");
  return out;
}

std::unique_ptr<evaluator::LocalLaw> make_law(const Config& c) {
  const std::string kind = c.string_or("model.kind", "voigt");
  if (kind == "prnn") {
    auto model = prnn::read_model(c.resolve(c.string("model.file")));
    return std::make_unique<evaluator::PrnnLaw>(std::move(model.params), std::move(model.layout));
  }
  const auto cal = calibration(c);
  if (kind == "voigt")
    return std::make_unique<evaluator::MixtureLaw>(
        micromodel::VoigtMixture::composite(cal.fiber, cal.matrix, cal.fiber_fraction));
  if (kind == "rve") {
    dataset::RveGenerator g;
    try {
      g.mesh = micromodel::RveMesh::build(static_cast<int>(c.count_or("model.rve_cells", 4)), cal.fiber_fraction);
    } catch (const DomainError& e) {
      throw ConfigError(std::string("key 'model.rve_cells': ") + e.what());
    }
    g.materials = {cal.fiber, cal.matrix};
    return std::make_unique<evaluator::RveLaw>(std::move(g));
  }
  throw ConfigError("key 'model.kind' must be voigt, prnn or rve (got '" + kind + "')");
}

namespace {

kinematics::OffAxisAngle angle_of(const Config& c) {
  try {
    return kinematics::OffAxisAngle(c.number("coupon.angle"));
  } catch (const DomainError& e) {
    throw ConfigError(std::string("key 'coupon.angle': ") + e.what());
  }
}

}  // namespace

macro::CouponSpec coupon(const Config& c, const evaluator::LocalLaw& law) {
  macro::CouponSpec s;
  s.length = c.number_or("coupon.length", s.length);
  s.width = c.number_or("coupon.width", s.width);
  s.thickness = c.number_or("coupon.thickness", s.thickness);
  s.angle = angle_of(c);
  s.nx = c.count_or("coupon.nx", s.nx);
  s.ny = c.count_or("coupon.ny", s.ny);
  s.nz = c.count_or("coupon.nz", s.nz);
  const std::string tab = c.string_or("coupon.tab", "straight");
  if (tab == "straight") {
    s.tab = macro::EndTab::Straight;
  } else if (tab == "oblique") {
    s.tab = macro::EndTab::Oblique;
    const bool automatic = !c.has("coupon.oblique_angle") ||
                           (c.is_string("coupon.oblique_angle") && c.string("coupon.oblique_angle") == "auto");
    s.oblique_deg = automatic ? macro::oblique_angle_for(law, s.angle) : c.number("coupon.oblique_angle");
  } else {
    throw ConfigError("key 'coupon.tab' must be straight or oblique (got '" + tab + "')");
  }
  s.validate();
  return s;
}

protocol::Loading loading(const Config& c) {
  const std::string kind = c.string("loading.kind");
  if (kind == "csr") {
    protocol::CsrLoading l;
    l.strain_rate = c.number("loading.strain_rate");
    l.target_strain = c.number_or("loading.target_strain", 0.0);
    l.duration = c.number_or("loading.duration", 0.0);
    if (!(l.strain_rate >= 0.0)) throw ConfigError("key 'loading.strain_rate' must be non-negative");
    if (l.strain_rate > 0.0 && !(l.target_strain > 0.0))
      throw ConfigError("key 'loading.target_strain' must be positive");
    if (l.strain_rate == 0.0 && !(l.duration > 0.0))
      throw ConfigError("key 'loading.duration' must be positive for a zero strain rate");
    return l;
  }
  if (kind == "creep") {
    protocol::CreepLoading l;
    l.protocol.target = c.number("loading.target_stress");
    l.protocol.rate = c.number("loading.stress_rate");
    l.protocol.hold = c.number("loading.hold");
    if (!(l.protocol.rate > 0.0)) throw ConfigError("key 'loading.stress_rate' must be positive");
    return l;
  }
  throw ConfigError("key 'loading.kind' must be csr or creep (got '" + kind + "')");
}

stepping::AdaptiveStepping stepping(const Config& c, const protocol::Loading& l) {
  stepping::AdaptiveStepping s;
  if (const auto* csr = std::get_if<protocol::CsrLoading>(&l)) {
    const double end = csr->strain_rate > 0.0 ? csr->target_strain / csr->strain_rate : csr->duration;
    s.dt0 = end / 100.0;
    s.dt_max = s.dt0;
    s.dt_min = s.dt0 * 1e-6;
  } else {
    const auto& p = std::get<protocol::CreepLoading>(l).protocol;
    const double ramp = p.ramp_duration();
    s.dt0 = ramp > 0.0 ? ramp / 20.0 : std::max(p.hold / 1000.0, 1e-3);
    s.dt_max = 1e4;
    s.dt_min = s.dt0 * 1e-6;
  }
  s.dt0 = c.number_or("stepping.dt0", s.dt0);
  s.dt_min = c.number_or("stepping.dt_min", std::min(s.dt_min, s.dt0));
  s.dt_max = c.number_or("stepping.dt_max", std::max(s.dt_max, s.dt0));
  s.cut = c.number_or("stepping.cut", s.cut);
  s.growth = c.number_or("stepping.growth", s.growth);
  s.growth_after = c.count_or("stepping.growth_after", s.growth_after);
  s.max_newton = c.count_or("stepping.max_newton", s.max_newton);
  s.max_cuts = c.count_or("stepping.max_cuts", s.max_cuts);
  s.validate();
  return s;
}

macro::SolverSettings solver(const Config& c) {
  macro::SolverSettings s;
  s.residual_rtol = c.number_or("solver.residual_rtol", s.residual_rtol);
  s.residual_atol = c.number_or("solver.residual_atol", s.residual_atol);
  s.hourglass = c.number_or("solver.hourglass", s.hourglass);
  s.fiber_rotation = c.boolean_or("solver.fiber_rotation", s.fiber_rotation);
  s.threads = c.count_or("solver.threads", s.threads);
  s.keep_fields = c.boolean_or("solver.keep_fields", s.keep_fields);
  if (!(s.residual_rtol > 0.0) || !(s.residual_atol >= 0.0) || !(s.hourglass >= 0.0))
    throw ConfigError("solver tolerances and hourglass factor must be non-negative");
  return s;
}

macro::MacroProblem macro_problem(const Config& c, const evaluator::LocalLaw& law) {
  macro::MacroProblem p;
  p.coupon = coupon(c, law);
  p.loading = loading(c);
  p.lateral_free = c.boolean_or("bc.lateral_free", false);
  p.stepping = stepping(c, p.loading);
  p.solver = solver(c);
  return p;
}

singlescale::SinglePointProblem single_problem(const Config& c) {
  singlescale::SinglePointProblem p;
  p.angle = angle_of(c);
  p.loading = loading(c);
  p.fiber_rotation = c.boolean_or("solver.fiber_rotation", true);
  p.stepping = stepping(c, p.loading);
  p.newton.tolerance = c.number_or("solver.newton_tolerance", p.newton.tolerance);
  return p;
}

pathgen::PathSpec paths(const Config& c, std::uint64_t seed, std::optional<std::size_t> count) {
  pathgen::PathSpec s;
  s.count = count ? *count : c.count("paths.count");
  s.steps = c.count_or("paths.steps", s.steps);
  s.length_scale_fraction = c.number_or("paths.length_scale_fraction", s.length_scale_fraction);
  s.amplitude_cap = c.number_or("paths.amplitude_cap", s.amplitude_cap);
  if (c.has("paths.dt_min") || c.has("paths.dt_max"))
    s.time_step = pathgen::TimeStepRule::log_uniform(c.number("paths.dt_min"), c.number("paths.dt_max"));
  else
    s.time_step = pathgen::TimeStepRule::fixed(c.number_or("paths.dt", 1.0));
  s.max_retries = c.count_or("paths.max_retries", s.max_retries);
  s.seed = seed;
  try {
    s.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("[paths]: ") + e.what());
  }
  return s;
}

prnn::TrainSpec training(const Config& c, std::uint64_t seed) {
  prnn::TrainSpec s;
  s.epochs = c.count_or("training.epochs", s.epochs);
  s.learning_rate = c.number_or("training.learning_rate", s.learning_rate);
  s.patience = c.count_or("training.patience", s.patience);
  s.validation_fraction = c.number_or("training.validation_fraction", s.validation_fraction);
  s.batch_size = c.count_or("training.batch_size", s.batch_size);
  if (c.has("training.target_loss")) s.target_loss = c.number("training.target_loss");
  s.seed = seed;
  if (!(s.learning_rate > 0.0)) throw ConfigError("key 'training.learning_rate' must be positive");
  if (!(s.validation_fraction >= 0.0 && s.validation_fraction < 1.0))
    throw ConfigError("key 'training.validation_fraction' must lie in [0, 1)");
  return s;
}

}  // namespace offaxis::config
