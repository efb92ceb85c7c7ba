#ifndef VLAB_REPORT_IO_HPP
#define VLAB_REPORT_IO_HPP

// JSON and CSV serialization of identity reports.

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "vlab/identities.hpp"

namespace vlab {

inline nlohmann::json complex_to_json(cplx z) { return {{"re", z.real()}, {"im", z.imag()}}; }

inline cplx complex_from_json(const nlohmann::json& j) {
  if (j.is_number()) return {j.get<real>(), 0.0};
  return {j.at("re").get<real>(), j.at("im").get<real>()};
}

inline nlohmann::json to_json(const IdentityReport& r) {
  nlohmann::json j;
  j["identity"] = to_string(r.identity);
  j["x"] = r.x;
  j["s"] = complex_to_json(r.s);
  j["rho"] = r.rho;
  j["a"] = r.a;
  j["lhs"] = complex_to_json(r.lhs);
  j["rhs"] = complex_to_json(r.rhs);
  j["residual"] = r.residual;
  j["tol"] = r.tol;
  j["tol_abs"] = r.tol_abs;
  j["terms_lhs"] = r.terms_lhs;
  j["terms_rhs"] = r.terms_rhs;
  j["truncation_estimate"] = r.truncation_estimate;
  j["passed"] = r.passed;
  j["genuine_failure"] = r.genuine_failure;
  return j;
}

inline IdentityReport report_from_json(const nlohmann::json& j) {
  IdentityReport r;
  r.identity = identity_tag_from_string(j.at("identity").get<std::string>());
  r.x = j.at("x").get<real>();
  r.s = complex_from_json(j.at("s"));
  r.rho = j.at("rho").get<real>();
  r.a = j.at("a").get<real>();
  r.lhs = complex_from_json(j.at("lhs"));
  r.rhs = complex_from_json(j.at("rhs"));
  r.residual = j.at("residual").get<real>();
  r.tol = j.at("tol").get<real>();
  r.tol_abs = j.at("tol_abs").get<real>();
  r.terms_lhs = j.at("terms_lhs").get<long>();
  r.terms_rhs = j.at("terms_rhs").get<long>();
  r.truncation_estimate = j.at("truncation_estimate").get<real>();
  r.passed = j.at("passed").get<bool>();
  r.genuine_failure = j.at("genuine_failure").get<bool>();
  return r;
}

inline const char* csv_header() {
  return "identity,x_or_s,rho,lhs_re,lhs_im,rhs_re,rhs_im,residual,terms_lhs,terms_rhs,trunc_est,passed";
}

namespace detail {

inline std::string fmt17(real v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

// x_or_s holds x, or s as "re+imi" for the functional equation.
inline std::string csv_row(const IdentityReport& r) {
  using detail::fmt17;
  std::string point = r.identity == IdentityTag::functional_eq
                          ? fmt17(r.s.real()) + (r.s.imag() < 0 ? "" : "+") + fmt17(r.s.imag()) + "i"
                          : fmt17(r.x);
  return to_string(r.identity) + "," + point + "," + fmt17(r.rho) + "," + fmt17(r.lhs.real()) + "," +
         fmt17(r.lhs.imag()) + "," + fmt17(r.rhs.real()) + "," + fmt17(r.rhs.imag()) + "," + fmt17(r.residual) + "," +
         std::to_string(r.terms_lhs) + "," + std::to_string(r.terms_rhs) + "," + fmt17(r.truncation_estimate) + "," +
         (r.passed ? "true" : "false");
}

inline void write_csv(std::ostream& os, const std::vector<IdentityReport>& reports) {
  os << csv_header() << '\n';
  for (const auto& r : reports) os << csv_row(r) << '\n';
}

inline void write_json(std::ostream& os, const std::vector<IdentityReport>& reports) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : reports) arr.push_back(to_json(r));
  os << arr.dump(2) << '\n';
}

}  // namespace vlab

#endif
