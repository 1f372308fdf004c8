#pragma once

#include <json.hpp>

#include <complex>
#include <fstream>
#include <sstream>
#include <string>

namespace support {

inline nlohmann::json golden(const std::string& name) {
  std::ifstream in(std::string(GOLDEN_DIR) + "/" + name);
  if (!in) throw std::runtime_error("missing golden file " + name);
  return nlohmann::json::parse(in);
}

inline std::string golden_text(const std::string& name) {
  std::ifstream in(std::string(GOLDEN_DIR) + "/" + name);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

inline std::complex<double> cplx_of(const nlohmann::json& j) { return {j[0].get<double>(), j[1].get<double>()}; }

inline double rel(std::complex<double> a, std::complex<double> b) { return std::abs(a - b) / std::abs(b); }

}  // namespace support
