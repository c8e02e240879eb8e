#pragma once

// QUBO JSON format: {"n": int, "offset": float, "terms": [[i, j, value], ...]}, i <= j.

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hadof/qubo.hpp"

namespace hadof {

inline nlohmann::json qubo_to_json(const QuboProblem& problem) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [ij, v] : problem.coefficients()) terms.push_back({ij.first, ij.second, v});
  return {{"n", problem.n()}, {"offset", problem.offset()}, {"terms", std::move(terms)}};
}

inline QuboProblem qubo_from_json(const nlohmann::json& doc) {
  try {
    const auto n = doc.at("n").get<std::size_t>();
    QuboProblem problem(n, doc.value("offset", 0.0));
    for (const auto& t : doc.at("terms")) {
      if (!t.is_array() || t.size() != 3) throw ParseError("QUBO term must be [i, j, value]");
      const auto i = t[0].get<std::size_t>();
      const auto j = t[1].get<std::size_t>();
      if (i > j) throw ParseError("QUBO term has i > j: [" + std::to_string(i) + ", " + std::to_string(j) + "]");
      problem.add(i, j, t[2].get<double>());
    }
    return problem;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("QUBO JSON: ") + e.what());
  } catch (const DimensionError& e) {
    throw ParseError(std::string("QUBO JSON: ") + e.what());
  } catch (const ConfigError& e) {
    throw ParseError(std::string("QUBO JSON: ") + e.what());
  }
}

inline QuboProblem load_qubo(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return qubo_from_json(doc);
}

inline void save_qubo(const QuboProblem& problem, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path.string());
  out << qubo_to_json(problem).dump(1) << '\n';
}

}  // namespace hadof
