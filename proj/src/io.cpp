#include "fbethe/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fbethe {

using nlohmann::json;

namespace {

std::string location_of(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t k = 0; k < std::min(byte, text.size()); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

const json& require(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key))
    throw ModelParseError(std::string("model file: missing field \"") + key + "\"");
  return obj.at(key);
}

double number_at(const json& v, const std::string& path) {
  if (!v.is_number()) throw ModelParseError("model file: " + path + " must be a number");
  return v.get<double>();
}

int index_at(const json& v, const std::string& path, int n) {
  if (!v.is_number_integer()) throw ModelParseError("model file: " + path + " must be an integer");
  const auto k = v.get<long long>();
  if (k < 0 || k >= n) throw ModelParseError("model file: " + path + " is out of range");
  return static_cast<int>(k);
}

}  // namespace

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

GaussianModel parse_model_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ModelParseError("model file: syntax error at " + location_of(text, e.byte) + ": " + e.what());
  }

  const json& jn = require(doc, "n");
  if (!jn.is_number_integer() || jn.get<long long>() < 1) throw ModelParseError("model file: /n must be a positive integer");
  const int n = jn.get<int>();

  const json& jh = require(doc, "h");
  if (!jh.is_array() || static_cast<int>(jh.size()) != n)
    throw ModelParseError("model file: /h must be an array of n numbers");
  Vector h(n);
  for (int k = 0; k < n; ++k) h(k) = number_at(jh[static_cast<std::size_t>(k)], "/h/" + std::to_string(k));

  const json& jJ = require(doc, "J");
  Matrix J = Matrix::Zero(n, n);
  if (jJ.is_array()) {
    if (static_cast<int>(jJ.size()) != n) throw ModelParseError("model file: /J must have n rows");
    for (int i = 0; i < n; ++i) {
      const json& row = jJ[static_cast<std::size_t>(i)];
      const std::string path = "/J/" + std::to_string(i);
      if (!row.is_array() || static_cast<int>(row.size()) != n)
        throw ModelParseError("model file: " + path + " must have n entries");
      for (int j = 0; j < n; ++j) J(i, j) = number_at(row[static_cast<std::size_t>(j)], path + "/" + std::to_string(j));
    }
  } else if (jJ.is_object()) {
    const json& ji = require(jJ, "i");
    const json& jj = require(jJ, "j");
    const json& jv = require(jJ, "v");
    if (!ji.is_array() || !jj.is_array() || !jv.is_array() || ji.size() != jj.size() || ji.size() != jv.size())
      throw ModelParseError("model file: /J/i, /J/j and /J/v must be arrays of equal length");
    std::vector<std::pair<int, int>> seen;
    for (std::size_t k = 0; k < ji.size(); ++k) {
      const std::string idx = std::to_string(k);
      const int i = index_at(ji[k], "/J/i/" + idx, n);
      const int j = index_at(jj[k], "/J/j/" + idx, n);
      if (i > j) throw ModelParseError("model file: /J entry " + idx + " lies below the diagonal (upper triangle only)");
      if (std::find(seen.begin(), seen.end(), std::pair{i, j}) != seen.end())
        throw ModelParseError("model file: /J entry " + idx + " duplicates (" + std::to_string(i) + "," + std::to_string(j) + ")");
      seen.emplace_back(i, j);
      const double v = number_at(jv[k], "/J/v/" + idx);
      J(i, j) = v;
      J(j, i) = v;
    }
  } else {
    throw ModelParseError("model file: /J must be a dense matrix or a sparse {i, j, v} object");
  }
  return GaussianModel(std::move(h), std::move(J));
}

GaussianModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ModelParseError("cannot open model file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model_json(ss.str());
}

std::string model_to_json(const GaussianModel& model, bool sparse) {
  // Built by hand so that numbers use the round-trip format and key order is fixed.
  std::ostringstream os;
  const int n = model.n();
  os << "{\n  \"n\": " << n << ",\n  \"h\": [";
  for (int k = 0; k < n; ++k) os << (k ? ", " : "") << format_double(model.h()(k));
  os << "],\n  \"J\": ";
  if (sparse) {
    std::ostringstream is, js, vs;
    bool first = true;
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        if (model.J()(i, j) == 0.0) continue;
        const char* sep = first ? "" : ", ";
        is << sep << i;
        js << sep << j;
        vs << sep << format_double(model.J()(i, j));
        first = false;
      }
    }
    os << "{\n    \"i\": [" << is.str() << "],\n    \"j\": [" << js.str() << "],\n    \"v\": [" << vs.str()
       << "]\n  }";
  } else {
    os << "[\n";
    for (int i = 0; i < n; ++i) {
      os << "    [";
      for (int j = 0; j < n; ++j) os << (j ? ", " : "") << format_double(model.J()(i, j));
      os << "]" << (i + 1 < n ? "," : "") << "\n";
    }
    os << "  ]";
  }
  os << "\n}\n";
  return os.str();
}

void save_model(const GaussianModel& model, const std::filesystem::path& path, bool sparse) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file " + path.string());
  out << model_to_json(model, sparse);
}

namespace {

json vector_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

}  // namespace

json to_json(const ValidationReport& report) {
  return json{{"ok", report.ok()},
              {"shape_ok", report.shape_ok},
              {"symmetry_defect", report.symmetry_defect},
              {"diagonal_positive", report.diagonal_positive},
              {"positive_definite", report.positive_definite},
              {"edges_consistent", report.edges_consistent},
              {"message", report.message}};
}

json to_json(const DiagnosticsReport& report) {
  json out{{"lambda_max", report.spectrum.lambda_max},
           {"u_max", vector_json(report.spectrum.u_max)},
           {"verdict", std::string(to_string(report.verdict.verdict))},
           {"boundary_margin", report.verdict.boundary_margin},
           {"pairwise_normalizable", report.verdict.pairwise_normalizable},
           {"iterations", report.spectrum.iterations},
           {"residual", report.spectrum.residual},
           {"components", report.spectrum.components}};
  if (report.k_regular) out["k_regular"] = json{{"K", report.k_regular->K}, {"r", report.k_regular->r}};
  if (report.critical_r) out["critical_r"] = *report.critical_r;
  if (report.critical_alpha) out["critical_alpha"] = *report.critical_alpha;
  return out;
}

json to_json(const Moments& moments) {
  return json{{"m", vector_json(moments.m)}, {"sigma", vector_json(moments.sigma)}, {"sigma_pair", moments.sigma_pair}};
}

json to_json(const MinimizeResult& result) {
  json out{{"status", std::string(to_string(result.status))},
           {"value", result.value.value},
           {"iterations", result.iterations},
           {"grad_norm", result.grad_norm},
           {"moments", to_json(result.moments)}};
  if (!result.trace.empty()) {
    json trace = json::array();
    for (const auto& t : result.trace) trace.push_back({{"iteration", t.iteration}, {"value", t.value}, {"grad_norm", t.grad_norm}});
    out["trace"] = std::move(trace);
  }
  return out;
}

json to_json(const MPResult& result) {
  json out{{"status", std::string(to_string(result.status))},
           {"residual", result.residual},
           {"iterations", result.iterations},
           {"damping", result.damping}};
  if (result.beliefs.sigma.size() > 0) out["beliefs"] = to_json(result.beliefs);
  return out;
}

}  // namespace fbethe
