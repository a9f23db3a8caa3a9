#include "logopt/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace logopt {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& origin, const std::string& what,
                       std::size_t byte = std::string::npos,
                       const std::string* text = nullptr) {
  std::ostringstream os;
  os << origin;
  if (text && byte != std::string::npos) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text->size(); ++i) {
      if ((*text)[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    os << ":" << line << ":" << col;
  }
  os << ": " << what;
  throw ModelParseError(os.str());
}

Eigen::VectorXd parse_vector(const json& j, int dim, const std::string& origin,
                             const std::string& name) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim)
    fail(origin, name + " must be an array of " + std::to_string(dim) + " numbers");
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) {
    if (!j[i].is_number()) fail(origin, name + " entries must be numbers");
    v[i] = j[i].get<double>();
  }
  return v;
}

Eigen::MatrixXd parse_matrix(const json& j, int dim, const std::string& origin,
                             const std::string& name) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim)
    fail(origin, name + " must be a " + std::to_string(dim) + "x" +
                     std::to_string(dim) + " array of arrays");
  Eigen::MatrixXd mat(dim, dim);
  for (int r = 0; r < dim; ++r) mat.row(r) = parse_vector(j[r], dim, origin, name).transpose();
  return mat;
}

JumpMeasure parse_atoms(const json& j, int dim, const std::string& origin) {
  if (!j.is_array()) fail(origin, "atoms must be an array");
  std::vector<JumpAtom> atoms;
  for (const auto& entry : j) {
    if (!entry.is_object() || !entry.contains("x") || !entry.contains("w"))
      fail(origin, "each atom needs fields x and w");
    JumpAtom a;
    a.x = parse_vector(entry["x"], dim, origin, "atom x");
    if (!entry["w"].is_number()) fail(origin, "atom w must be a number");
    a.intensity = entry["w"].get<double>();
    atoms.push_back(std::move(a));
  }
  return JumpMeasure(std::move(atoms));
}

Segment parse_segment(const json& j, int dim, double t_start, const std::string& origin) {
  Segment seg;
  seg.t_start = t_start;
  seg.drift = j.contains("b") ? parse_vector(j["b"], dim, origin, "b")
                              : Eigen::VectorXd::Zero(dim).eval();
  seg.covariance = j.contains("c") ? parse_matrix(j["c"], dim, origin, "c")
                                   : Eigen::MatrixXd::Zero(dim, dim).eval();
  if (j.contains("atoms")) seg.jumps = parse_atoms(j["atoms"], dim, origin);
  return seg;
}

}  // namespace

MarketModel parse_model(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(origin, e.what(), e.byte > 0 ? e.byte - 1 : 0, &text);
  }
  if (!j.is_object()) fail(origin, "top level must be an object");
  if (!j.contains("dim") || !j["dim"].is_number_integer())
    fail(origin, "field dim (integer) is required");
  const int dim = j["dim"].get<int>();
  if (dim < 1 || dim > 16) fail(origin, "dim must be between 1 and 16");
  if (!j.contains("horizon") || !j["horizon"].is_number())
    fail(origin, "field horizon (number) is required");
  const double horizon = j["horizon"].get<double>();

  std::vector<Segment> segments;
  if (j.contains("segments")) {
    if (j.contains("b") || j.contains("c") || j.contains("atoms"))
      fail(origin, "give either segments or top-level b/c/atoms, not both");
    if (!j["segments"].is_array() || j["segments"].empty())
      fail(origin, "segments must be a non-empty array");
    for (const auto& sj : j["segments"]) {
      if (!sj.is_object() || !sj.contains("t") || !sj["t"].is_number())
        fail(origin, "each segment needs a numeric start time t");
      segments.push_back(parse_segment(sj, dim, sj["t"].get<double>(), origin));
    }
  } else {
    segments.push_back(parse_segment(j, dim, 0.0, origin));
  }

  try {
    return MarketModel(dim, horizon, std::move(segments));
  } catch (const std::exception& e) {
    fail(origin, e.what());
  }
}

MarketModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelParseError(path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str(), path);
}

std::string model_to_json(const MarketModel& m) {
  json j;
  j["dim"] = m.dim();
  j["horizon"] = m.horizon();
  const auto seg_json = [&](const Segment& seg) {
    json sj;
    sj["t"] = seg.t_start;
    sj["b"] = std::vector<double>(seg.drift.data(), seg.drift.data() + seg.drift.size());
    json c = json::array();
    for (int r = 0; r < seg.covariance.rows(); ++r) {
      json row = json::array();
      for (int q = 0; q < seg.covariance.cols(); ++q) row.push_back(seg.covariance(r, q));
      c.push_back(row);
    }
    sj["c"] = c;
    json atoms = json::array();
    for (const auto& a : seg.jumps.atoms()) {
      json aj;
      aj["x"] = std::vector<double>(a.x.data(), a.x.data() + a.x.size());
      aj["w"] = a.intensity;
      atoms.push_back(aj);
    }
    sj["atoms"] = atoms;
    return sj;
  };

  if (m.n_segments() == 1) {
    json sj = seg_json(m.segments()[0]);
    sj.erase("t");
    for (auto& [key, value] : sj.items()) j[key] = value;
  } else {
    json segs = json::array();
    for (const auto& seg : m.segments()) segs.push_back(seg_json(seg));
    j["segments"] = segs;
  }
  return j.dump(2) + "\n";
}

}  // namespace logopt
