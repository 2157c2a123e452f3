#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "tlab/compact.hpp"
#include "tlab/factor.hpp"
#include "tlab/horn.hpp"
#include "tlab/matrix.hpp"
#include "tlab/step_function.hpp"
#include "tlab/thompson.hpp"
#include "tlab/tolerances.hpp"

namespace tlab {

using ordered_json = nlohmann::ordered_json;

namespace detail {

inline std::string format_double(double v) {
  if (v == 0.0) v = 0.0;  // normalize -0
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw Error("malformed number '" + s + "'");
  return v;
}

// Splits "re+imj" / "re-imj" at the sign that starts the imaginary part;
// bare reals are accepted.
inline std::complex<double> parse_complex(const std::string& token) {
  if (token.empty()) throw Error("empty matrix entry");
  if (token.back() != 'j') return {parse_double(token), 0.0};
  const std::string body = token.substr(0, token.size() - 1);
  for (std::size_t p = body.size(); p-- > 1;) {
    if ((body[p] == '+' || body[p] == '-') && body[p - 1] != 'e' &&
        body[p - 1] != 'E') {
      const double re = parse_double(body.substr(0, p));
      const double im = parse_double(body[p] == '+' ? body.substr(p + 1)
                                                    : body.substr(p));
      return {re, im};
    }
  }
  throw Error("malformed matrix entry '" + token + "'");
}

}  // namespace detail

/// HMAT v1 text form: header `HMAT 1 <n>`, then n rows of n entries
/// `re+imj`.
inline std::string write_hmat(const CMat& m) {
  if (m.rows() != m.cols()) throw InvalidArgument("write_hmat: square only");
  std::string out = "HMAT 1 " + std::to_string(m.rows()) + "\n";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const std::complex<double> z = m(r, c);
      if (c > 0) out += ' ';
      out += detail::format_double(z.real());
      const double im = z.imag() == 0.0 ? 0.0 : z.imag();
      out += im < 0.0 ? "-" : "+";
      out += detail::format_double(im < 0.0 ? -im : im);
      out += 'j';
    }
    out += '\n';
  }
  return out;
}

inline CMat parse_hmat(const std::string& text) {
  std::istringstream in(text);
  std::string magic;
  int version = 0;
  Eigen::Index n = 0;
  if (!(in >> magic >> version >> n) || magic != "HMAT")
    throw Error("HMAT: bad header");
  if (version != 1) throw Error("HMAT: unsupported version");
  if (n < 1) throw Error("HMAT: dimension must be >= 1");
  CMat m(n, n);
  std::string token;
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) {
      if (!(in >> token)) throw Error("HMAT: truncated matrix body");
      m(r, c) = detail::parse_complex(token);
    }
  if (in >> token) throw Error("HMAT: trailing data");
  return m;
}

/// Hermitian read: rejects drift beyond tolerance unless symmetrize is
/// set, in which case (M + M*)/2 is taken.
inline HermitianMatrix parse_hmat_hermitian(const std::string& text,
                                            bool symmetrize = false,
                                            const Tolerances& tol = default_tol()) {
  const HermitianMatrix h(parse_hmat(text));
  if (!symmetrize && h.hermitization_correction() > tol.hermiticity)
    throw Error("HMAT: input is not Hermitian (skew norm " +
                detail::format_double(h.hermitization_correction()) +
                "); use --symmetrize to accept");
  return h;
}

inline UnitaryMatrix parse_hmat_unitary(const std::string& text,
                                        const Tolerances& tol = default_tol()) {
  return UnitaryMatrix(parse_hmat(text), tol);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path,
                            const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << content;
}

inline ordered_json parse_json(const std::string& text,
                               const std::string& what) {
  ordered_json j = ordered_json::parse(text, nullptr, false);
  if (j.is_discarded()) throw Error(what + ": malformed JSON");
  return j;
}

/// STEP v1: {"breakpoints": [...], "values": [...]}.
inline ordered_json step_to_json(const StepFunction& f) {
  return ordered_json{{"breakpoints", f.breakpoints()}, {"values", f.values()}};
}

inline StepFunction step_from_json(const ordered_json& j) {
  if (!j.is_object() || !j.contains("breakpoints") || !j.contains("values"))
    throw Error("STEP: expected {breakpoints, values}");
  return StepFunction(j["breakpoints"].get<std::vector<double>>(),
                      j["values"].get<std::vector<double>>());
}

/// Spectra travel as plain JSON arrays, non-increasing.
inline Spectrum spectrum_from_json(const ordered_json& j) {
  if (!j.is_array()) throw Error("spectrum: expected a JSON array");
  return Spectrum(j.get<std::vector<double>>());
}

inline ordered_json triple_to_json(const HornTriple& t) {
  return ordered_json{
      {"I", t.I}, {"J", t.J}, {"K", t.K}, {"n", t.n}, {"r", t.r}};
}

inline HornTriple triple_from_json(const ordered_json& j) {
  HornTriple t;
  t.I = j.at("I").get<std::vector<int>>();
  t.J = j.at("J").get<std::vector<int>>();
  t.K = j.at("K").get<std::vector<int>>();
  t.n = j.at("n").get<int>();
  t.r = j.at("r").get<int>();
  return t;
}

inline ordered_json triples_to_json(const std::vector<HornTriple>& ts) {
  ordered_json arr = ordered_json::array();
  for (const auto& t : ts) arr.push_back(triple_to_json(t));
  return arr;
}

inline std::vector<HornTriple> triples_from_json(const ordered_json& j) {
  if (!j.is_array()) throw Error("triples: expected a JSON array");
  std::vector<HornTriple> out;
  out.reserve(j.size());
  for (const auto& e : j) out.push_back(triple_from_json(e));
  return out;
}

inline ordered_json certificate_to_json(const HornCertificate& c) {
  ordered_json viols = ordered_json::array();
  for (const auto& v : c.violations)
    viols.push_back(
        ordered_json{{"triple", triple_to_json(v.triple)}, {"slack", v.slack}});
  return ordered_json{{"feasible", c.feasible},
                      {"trace_gap", c.trace_gap},
                      {"checked_count", c.checked_count},
                      {"violations", viols}};
}

inline ordered_json certificate_to_json(const IntegralHornCertificate& c) {
  ordered_json viols = ordered_json::array();
  for (const auto& v : c.violations)
    viols.push_back(
        ordered_json{{"triple", triple_to_json(v.triple)}, {"slack", v.slack}});
  return ordered_json{{"feasible", c.feasible},
                      {"trace_gap", c.trace_gap},
                      {"checked_count", c.checked_count},
                      {"violations", viols}};
}

/// Solve report with the matrices embedded as HMAT strings; config is the
/// caller-assembled run configuration blob.
inline ordered_json solve_report_to_json(const SolveReport& r,
                                         const ordered_json& config) {
  ordered_json j;
  j["config"] = config;
  j["n"] = r.Z.dim();
  j["residual_frobenius"] = r.residual;
  j["residual_operator"] = r.residual_operator;
  j["iterations"] = r.iterations;
  j["restarts_used"] = r.restarts_used;
  j["success"] = r.success;
  j["dilated"] = r.dilated;
  j["branch_shift"] =
      r.branch_shift ? ordered_json(*r.branch_shift) : ordered_json(nullptr);
  j["horn_feasible"] = r.horn_certificate
                           ? ordered_json(r.horn_certificate->feasible)
                           : ordered_json(nullptr);
  j["U"] = write_hmat(r.U.mat());
  j["V"] = write_hmat(r.V.mat());
  j["Z"] = write_hmat(r.Z.mat());
  return j;
}

inline ordered_json levels_to_json(const std::vector<TruncationLevel>& levels,
                                   const ordered_json& config) {
  ordered_json arr = ordered_json::array();
  for (const auto& l : levels)
    arr.push_back(ordered_json{{"k", l.k},
                               {"d_k", l.d_k},
                               {"err_trunc", l.err_trunc},
                               {"err_thompson", l.err_thompson},
                               {"residual", l.residual},
                               {"iterations", l.iterations},
                               {"solver_success", l.solver_success}});
  return ordered_json{{"config", config}, {"levels", arr}};
}

/// CSV mirror of the truncation ladder for external plotting.
inline std::string levels_to_csv(const std::vector<TruncationLevel>& levels) {
  std::string out = "k,d_k,err_trunc,err_thompson,residual\n";
  for (const auto& l : levels) {
    out += std::to_string(l.k) + ',' + std::to_string(l.d_k) + ',' +
           detail::format_double(l.err_trunc) + ',' +
           detail::format_double(l.err_thompson) + ',' +
           detail::format_double(l.residual) + '\n';
  }
  return out;
}

inline ordered_json factor_report_to_json(const FactorReport& r,
                                          const ordered_json& config) {
  ordered_json levels = ordered_json::array();
  for (const auto& l : r.levels) {
    ordered_json lj{{"m", l.m},
                    {"solver_success", l.solver_success},
                    {"residual", l.residual},
                    {"iterations", l.iterations},
                    {"lambda_d", step_to_json(l.lambda_d)},
                    {"lambda_c", step_to_json(l.lambda_c)},
                    {"moment_gaps", l.moment_gaps},
                    {"distributions_match", l.distributions_match}};
    lj["lambda_c_bar"] = l.lambda_c_bar ? step_to_json(*l.lambda_c_bar)
                                        : ordered_json(nullptr);
    levels.push_back(std::move(lj));
  }
  return ordered_json{{"config", config},
                      {"levels", levels},
                      {"f", step_to_json(r.f)},
                      {"cauchy_gaps", r.cauchy_gaps},
                      {"integral_horn", certificate_to_json(r.integral_horn)}};
}

}  // namespace tlab
