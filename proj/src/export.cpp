// SPDX-License-Identifier: Apache-2.0
#include "offaxis/export.hpp"

#include "offaxis/errors.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace offaxis::io {

std::string Provenance::line() const {
  return "config_sha256=" + (config_hash.empty() ? std::string("none") : config_hash) +
         " seed=" + (seed ? std::to_string(*seed) : std::string("none"));
}

std::string format_number(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

void write_text(const std::filesystem::path& file, const std::string& text) {
  std::error_code ec;
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path(), ec);
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + file.string());
  out << text;
  if (!out) throw IoError("write failed for " + file.string());
}

std::string read_text(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot read " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<CurveRow> curve_rows(const macro::MacroResult& result) {
  std::vector<CurveRow> rows;
  rows.reserve(result.frames.size());
  for (const auto& f : result.frames) rows.push_back({f.time, f.eps_yy, f.sig_yy, f.sig_xy});
  return rows;
}

std::vector<CurveRow> curve_rows(const singlescale::Curve& curve) {
  std::vector<CurveRow> rows;
  rows.reserve(curve.points.size());
  for (const auto& q : curve.points) rows.push_back({q.time, q.eps_yy, q.sig_yy, q.sig_xy});
  return rows;
}

void write_curve_csv(const std::filesystem::path& file, const std::vector<CurveRow>& rows, const Provenance& p) {
  std::string s = "# " + p.line() + "\n" + kCurveHeader + "\n";
  for (const auto& r : rows)
    s += format_number(r.time) + ", " + format_number(r.eps_yy) + ", " + format_number(r.sig_yy) + ", " +
         format_number(r.sig_xy) + "\n";
  write_text(file, s);
}

std::vector<CurveRow> read_curve_csv(const std::filesystem::path& file) {
  std::istringstream in(read_text(file));
  std::string line;
  bool header = false;
  std::vector<CurveRow> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != kCurveHeader) throw IoError(file.string() + ": not a curve file");
      header = true;
      continue;
    }
    CurveRow r;
    char c1 = 0, c2 = 0, c3 = 0;
    std::istringstream ls(line);
    if (!(ls >> r.time >> c1 >> r.eps_yy >> c2 >> r.sig_yy >> c3 >> r.sig_xy) || c1 != ',' || c2 != ',' || c3 != ',')
      throw IoError(file.string() + ": malformed row '" + line + "'");
    rows.push_back(r);
  }
  if (!header) throw IoError(file.string() + ": missing curve header");
  return rows;
}

void write_vtk(const std::filesystem::path& file, const macro::MacroMesh& mesh, const macro::FieldFrame& frame,
               const Provenance& p) {
  if (frame.elements.size() != mesh.element_count())
    throw ContractViolation("frame fields do not match the mesh");
  std::ostringstream s;
  s << "# vtk DataFile Version 3.0\n";
  s << "offaxis t=" << format_number(frame.time) << " " << p.line() << "\n";
  s << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  s << "POINTS " << mesh.node_count() << " double\n";
  for (const auto& x : mesh.nodes)
    s << format_number(x.x()) << " " << format_number(x.y()) << " " << format_number(x.z()) << "\n";
  const std::size_t ne = mesh.element_count();
  s << "CELLS " << ne << " " << ne * 7 << "\n";
  for (const auto& el : mesh.elements)
    // VTK wants the base triangle's normal pointing away from the opposite face.
    s << "6 " << el[0] << " " << el[2] << " " << el[1] << " " << el[3] << " " << el[5] << " " << el[4] << "\n";
  s << "CELL_TYPES " << ne << "\n";
  for (std::size_t e = 0; e < ne; ++e) s << "13\n";
  s << "CELL_DATA " << ne << "\n";
  auto scalar = [&](const char* name, auto&& value) {
    s << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (const auto& ef : frame.elements) s << format_number(value(ef)) << "\n";
  };
  scalar("eps_yy_eng", [](const macro::ElementField& e) { return e.f(1, 1) - 1.0; });
  scalar("sig_yy_eng", [](const macro::ElementField& e) { return e.p(1, 1); });
  scalar("sig_xy_eng", [](const macro::ElementField& e) { return e.p(0, 1); });
  scalar("phi_deg", [](const macro::ElementField& e) { return e.phi_deg; });
  write_text(file, s.str());
}

void write_table_csv(const std::filesystem::path& file, const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& rows, const Provenance& p) {
  auto join = [](const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? ", " : "") + cells[i];
    return out + "\n";
  };
  std::string s = "# " + p.line() + "\n" + join(header);
  for (const auto& r : rows) {
    if (r.size() != header.size()) throw ContractViolation("table row width differs from the header");
    s += join(r);
  }
  write_text(file, s);
}

void write_statistics_csv(const std::filesystem::path& file, const std::vector<macro::FieldStatistics>& stats,
                          const Provenance& p) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& s : stats)
    rows.push_back({format_number(s.time), format_number(s.eps_yy), format_number(s.eps_mean),
                    format_number(s.eps_min), format_number(s.eps_max), format_number(s.eps_cov),
                    format_number(s.phi_mean), format_number(s.phi_min), format_number(s.phi_max)});
  write_table_csv(file,
                  {"time_s", "eps_yy_eng", "eps_mean", "eps_min", "eps_max", "eps_cov", "phi_mean_deg",
                   "phi_min_deg", "phi_max_deg"},
                  rows, p);
}

}  // namespace offaxis::io
