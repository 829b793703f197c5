#include "reebldp/system_config.hpp"

#include <fstream>

#include "reebldp/errors.hpp"

namespace reebldp {

namespace {

Poly2 poly_from_json(const nlohmann::json& terms) {
  if (!terms.is_array()) throw Error(ErrorCode::ConfigError, "polynomial must be an array of [i, j, c]");
  std::vector<Monomial> out;
  for (const auto& t : terms) {
    if (!t.is_array() || t.size() != 3 || !t[0].is_number_integer() || !t[1].is_number_integer() ||
        !t[2].is_number()) {
      throw Error(ErrorCode::ConfigError, "polynomial term must be [i, j, c]");
    }
    out.push_back({t[0].get<int>(), t[1].get<int>(), t[2].get<double>()});
  }
  return Poly2(std::move(out));
}

nlohmann::json poly_to_json(const Poly2& p) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& t : p.terms()) a.push_back({t.i, t.j, t.coeff});
  return a;
}

Sigma sigma_from_json(const nlohmann::json& s) {
  if (!s.is_object() || s.size() != 1) throw Error(ErrorCode::ConfigError, "sigma needs exactly one of identity/constant/poly");
  if (s.contains("identity")) {
    if (!s["identity"].is_number_integer()) throw Error(ErrorCode::ConfigError, "sigma.identity must be an integer");
    return Sigma::identity(s["identity"].get<int>());
  }
  if (s.contains("constant")) {
    const auto& rows = s["constant"];
    if (!rows.is_array()) throw Error(ErrorCode::ConfigError, "sigma.constant must be a 2 x l array");
    std::vector<std::vector<double>> m;
    for (const auto& r : rows) {
      if (!r.is_array()) throw Error(ErrorCode::ConfigError, "sigma.constant must be a 2 x l array");
      std::vector<double> row;
      for (const auto& v : r) {
        if (!v.is_number()) throw Error(ErrorCode::ConfigError, "sigma.constant entries must be numbers");
        row.push_back(v.get<double>());
      }
      m.push_back(std::move(row));
    }
    return Sigma::constant(m);
  }
  if (s.contains("poly")) {
    const auto& rows = s["poly"];
    if (!rows.is_array()) throw Error(ErrorCode::ConfigError, "sigma.poly must be a 2 x l array of polynomials");
    std::vector<std::vector<Poly2>> m;
    for (const auto& r : rows) {
      if (!r.is_array()) throw Error(ErrorCode::ConfigError, "sigma.poly must be a 2 x l array of polynomials");
      std::vector<Poly2> row;
      for (const auto& p : r) row.push_back(poly_from_json(p));
      m.push_back(std::move(row));
    }
    return Sigma::polynomial(std::move(m));
  }
  throw Error(ErrorCode::ConfigError, "sigma needs exactly one of identity/constant/poly");
}

}  // namespace

HamiltonianSystem system_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("hamiltonian")) {
    throw Error(ErrorCode::ConfigError, "config needs a \"hamiltonian\" object");
  }
  const auto& hj = doc["hamiltonian"];
  const Sigma sigma = doc.contains("sigma") ? sigma_from_json(doc["sigma"]) : Sigma::identity();
  std::string name = "poly";
  Poly2 h;
  Box box;
  bool have_box = false;
  if (hj.is_object() && hj.contains("builtin")) {
    if (!hj["builtin"].is_string()) throw Error(ErrorCode::ConfigError, "hamiltonian.builtin must be a string");
    name = hj["builtin"].get<std::string>();
    const HamiltonianSystem b = HamiltonianSystem::builtin(name);
    h = b.hamiltonian();
    box = b.box();
    have_box = true;
  } else if (hj.is_object() && hj.contains("poly")) {
    h = poly_from_json(hj["poly"]);
  } else {
    throw Error(ErrorCode::ConfigError, "hamiltonian needs \"builtin\" or \"poly\"");
  }
  if (doc.contains("box")) {
    const auto& b = doc["box"];
    if (!b.is_array() || b.size() != 4) throw Error(ErrorCode::ConfigError, "box must be [xmin, xmax, ymin, ymax]");
    for (const auto& v : b)
      if (!v.is_number()) throw Error(ErrorCode::ConfigError, "box entries must be numbers");
    box = {b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()};
    have_box = true;
  }
  if (!have_box) throw Error(ErrorCode::ConfigError, "polynomial systems need a \"box\"");
  return HamiltonianSystem(name, std::move(h), sigma, box);
}

HamiltonianSystem load_system(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open config " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("malformed config: ") + e.what());
  }
  return system_from_json(doc);
}

nlohmann::json system_to_json(const HamiltonianSystem& sys) {
  nlohmann::json doc;
  doc["name"] = sys.name();
  doc["hamiltonian"] = {{"poly", poly_to_json(sys.hamiltonian())}};
  const SigmaValue s0 = sys.sigma({0.0, 0.0});
  nlohmann::json sig;
  if (sys.sigma_field().is_constant()) {
    nlohmann::json r0 = nlohmann::json::array(), r1 = nlohmann::json::array();
    for (int k = 0; k < s0.cols; ++k) {
      r0.push_back(s0.row0(k));
      r1.push_back(s0.row1(k));
    }
    sig["constant"] = {r0, r1};
  } else {
    sig["poly_cols"] = s0.cols;
  }
  doc["sigma"] = sig;
  const Box& b = sys.box();
  doc["box"] = {b.xmin, b.xmax, b.ymin, b.ymax};
  return doc;
}

}  // namespace reebldp
