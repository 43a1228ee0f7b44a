#pragma once

#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qoscache/bitsim.hpp"
#include "qoscache/bounds.hpp"
#include "qoscache/centralized_layered.hpp"
#include "qoscache/centralized_small.hpp"
#include "qoscache/decentralized.hpp"
#include "qoscache/model.hpp"

namespace qoscache {

enum class SweepVariable { None, UniformM, HeteroM, Alpha, Beta };

inline std::string_view to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::None: return "none";
    case SweepVariable::UniformM: return "uniform_M";
    case SweepVariable::HeteroM: return "hetero_M";
    case SweepVariable::Alpha: return "alpha";
    case SweepVariable::Beta: return "beta";
  }
  return "";
}

struct BitsimOptions {
  std::size_t n = 0;  // 0 disables the bit-level columns
  int seeds = 1;
};

struct SweepConfig {
  Scenario base;
  SweepVariable variable = SweepVariable::None;
  std::vector<double> values;
  std::vector<double> coefficients;  // hetero_M: M_k = c_k * value
  double a = 0.0, b = 0.0;           // alpha: r_k = a + (k - (K+1)/2) v;  beta: M_k = a + (k - b) v
  std::vector<SchemeId> schemes;
  BitsimOptions bitsim;
  std::string output;
};

struct ResultRow {
  SweepVariable variable = SweepVariable::None;
  double value = 0.0;
  Scenario scenario;
  SchemeId scheme = SchemeId::Bound;
  std::optional<RateReport> report;  // empty: scheme does not apply ("n/a")
  std::optional<double> empirical;
  int seeds = 0;
};

// ------------------------------------------------------------ config

namespace detail {

inline Error config_error(const std::string& what) { return Error(ErrorCode::ConfigError, what); }

template <class T>
T json_get(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw config_error(where + ": missing '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw config_error(where + ": bad type for '" + key + "'");
  }
}

inline SweepVariable parse_variable(const std::string& s) {
  for (auto v : {SweepVariable::None, SweepVariable::UniformM, SweepVariable::HeteroM, SweepVariable::Alpha,
                 SweepVariable::Beta})
    if (to_string(v) == s) return v;
  throw config_error("unknown sweep variable '" + s + "'");
}

}  // namespace detail

inline std::vector<SchemeId> parse_scheme_list(const std::string& csv) {
  std::vector<SchemeId> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(parse_scheme(item));
  if (out.empty()) throw Error(ErrorCode::ConfigError, "scheme list is empty");
  return out;
}

inline Scenario scenario_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw detail::config_error("scenario must be an object");
  const int N = detail::json_get<int>(j, "N", "scenario");
  const int K = detail::json_get<int>(j, "K", "scenario");
  auto r = detail::json_get<std::vector<double>>(j, "r", "scenario");
  std::vector<double> M;
  if (j.contains("M")) M = detail::json_get<std::vector<double>>(j, "M", "scenario");
  else M.assign(static_cast<std::size_t>(std::max(K, 0)), 0.0);
  const bool refinable = j.value("refinable", true);
  try {
    return make_scenario(N, K, std::move(r), std::move(M), refinable);
  } catch (const Error& e) {
    throw detail::config_error(std::string("invalid scenario: ") + e.what());
  }
}

inline SweepConfig sweep_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw detail::config_error("config must be a JSON object");
  SweepConfig c;
  c.base = scenario_from_json(detail::json_get<nlohmann::json>(j, "scenario", "config"));
  if (j.contains("sweep")) {
    const auto& sw = j.at("sweep");
    c.variable = detail::parse_variable(detail::json_get<std::string>(sw, "variable", "sweep"));
    const auto& v = sw.contains("values") ? sw.at("values") : nlohmann::json();
    if (v.is_array()) {
      c.values = detail::json_get<std::vector<double>>(sw, "values", "sweep");
    } else if (v.is_object()) {
      const double start = detail::json_get<double>(v, "start", "sweep.values");
      const double stop = detail::json_get<double>(v, "stop", "sweep.values");
      const int count = detail::json_get<int>(v, "count", "sweep.values");
      if (count < 1) throw detail::config_error("sweep.values.count must be >= 1");
      for (int q = 0; q < count; ++q) c.values.push_back(count == 1 ? start : start + (stop - start) * q / (count - 1));
    } else {
      throw detail::config_error("sweep.values must be an array or {start, stop, count}");
    }
    if (sw.contains("coefficients")) c.coefficients = detail::json_get<std::vector<double>>(sw, "coefficients", "sweep");
    c.a = sw.value("a", 0.0);
    c.b = sw.value("b", 0.0);
  }
  if (c.variable == SweepVariable::None) c.values = {0.0};
  if (c.values.empty()) throw detail::config_error("sweep grid is empty");
  if (c.variable == SweepVariable::HeteroM && c.coefficients.size() != static_cast<std::size_t>(c.base.K()))
    throw detail::config_error("hetero_M needs K coefficients");
  if (j.contains("schemes")) {
    for (const auto& s : detail::json_get<std::vector<std::string>>(j, "schemes", "config")) c.schemes.push_back(parse_scheme(s));
    if (c.schemes.empty()) throw detail::config_error("scheme list is empty");
  }
  if (j.contains("bitsim")) {
    const auto& bs = j.at("bitsim");
    c.bitsim.n = bs.value("n", std::size_t{0});
    c.bitsim.seeds = bs.value("seeds", 1);
    if (c.bitsim.seeds < 1) throw detail::config_error("bitsim.seeds must be >= 1");
  }
  c.output = j.value("output", std::string());
  return c;
}

inline SweepConfig load_sweep_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw detail::config_error("cannot read " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw detail::config_error(path + ": " + e.what());
  }
  return sweep_config_from_json(j);
}

inline Scenario scenario_at(const SweepConfig& c, double v) {
  std::vector<double> r = c.base.layer_rates, M = c.base.cache_sizes;
  const int K = c.base.K();
  switch (c.variable) {
    case SweepVariable::None: break;
    case SweepVariable::UniformM:
      for (auto& m : M) m = v;
      break;
    case SweepVariable::HeteroM:
      for (int k = 0; k < K; ++k) M[static_cast<std::size_t>(k)] = c.coefficients[static_cast<std::size_t>(k)] * v;
      break;
    case SweepVariable::Alpha:
      for (int k = 1; k <= K; ++k) r[static_cast<std::size_t>(k - 1)] = c.a + (k - (K + 1) / 2.0) * v;
      break;
    case SweepVariable::Beta:
      for (int k = 1; k <= K; ++k) M[static_cast<std::size_t>(k - 1)] = c.a + (k - c.b) * v;
      break;
  }
  try {
    return make_scenario(c.base.N(), K, std::move(r), std::move(M), c.base.successively_refinable);
  } catch (const Error& e) {
    throw detail::config_error("grid point " + std::to_string(v) + " gives an invalid scenario: " + e.what());
  }
}

// ------------------------------------------------------------ evaluation

inline RateReport evaluate_scheme(const Scenario& s, SchemeId id) {
  RateReport rep;
  rep.scheme = id;
  rep.bound = best_lower_bound(s);
  rep.bound_informational = !s.successively_refinable;
  try {
    switch (id) {
      case SchemeId::Bound: rep.rate = rep.bound; break;
      case SchemeId::Centralized2x2: rep.rate = rate_2x2(s), rep.detail = std::string(to_string(classify_2x2(s.M(1), s.M(2), s.r(1), s.r(2)))); break;
      case SchemeId::Centralized2User: rep.rate = rate_2user_nfile(s); break;
      case SchemeId::CentralizedPca: rep.rate = pca_rate(s); break;
      case SchemeId::CentralizedOca: rep.rate = oca_rate(s); break;
      case SchemeId::CentralizedBest: {
        const auto b = best_centralized(s);
        rep.rate = b.rate, rep.detail = b.detail;
        break;
      }
      case SchemeId::DecentralizedLcd1: rep.rate = lcd1_rate(s); break;
      case SchemeId::DecentralizedLcd2: rep.rate = lcd2_rate(s); break;
      case SchemeId::DecentralizedAlg3: {
        const double a = lcd1_rate(s), d2 = delivery2_rate(s);
        rep.rate = std::min(a, d2), rep.detail = a <= d2 ? "lcd1" : "delivery2";
        break;
      }
      case SchemeId::BaselineUncoded: rep.rate = uncoded_rate(s); break;
    }
  } catch (const Error& e) {
    throw Error(ErrorCode::SchemeShapeError, std::string(scheme_label(id)) + ": " + e.what());
  }
  rep.gap = rep.rate - rep.bound;
  return rep;
}

// Worst-case bit-level rate for schemes that have a simulator; empty otherwise.
inline std::optional<double> empirical_rate(const Scenario& s, SchemeId id, const BitsimOptions& opt) {
  if (opt.n == 0 || !demands_enumerable(s.N(), s.K(), 1e4) || s.K() > 8) return std::nullopt;
  try {
    switch (id) {
      case SchemeId::Centralized2x2:
        return worst_case_empirical_rate(materialize_2x2(s, opt.n), DeliveryScheme::Centralized2x2);
      case SchemeId::Centralized2User:
        return worst_case_empirical_rate(materialize_2user_nfile(s, opt.n), DeliveryScheme::Centralized2User);
      case SchemeId::DecentralizedLcd1:
        return mean_decentralized_rate(s, opt.n, opt.seeds, DeliveryScheme::Lcd1);
      case SchemeId::DecentralizedLcd2:
        return mean_decentralized_rate(s, opt.n, opt.seeds, DeliveryScheme::Lcd2);
      case SchemeId::DecentralizedAlg3:
        return mean_decentralized_rate(s, opt.n, opt.seeds,
                                       lcd1_rate(s) <= delivery2_rate(s) ? DeliveryScheme::Lcd1 : DeliveryScheme::Delivery2);
      default: return std::nullopt;
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::DecodeFailure) throw;
    return std::nullopt;
  }
}

inline std::vector<ResultRow> evaluate_point(const Scenario& s, SweepVariable var, double value,
                                             const std::vector<SchemeId>& schemes, const BitsimOptions& bitsim) {
  std::vector<ResultRow> rows;
  for (SchemeId id : schemes) {
    ResultRow row{var, value, s, id, std::nullopt, std::nullopt, 0};
    try {
      row.report = evaluate_scheme(s, id);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SchemeShapeError) throw;
    }
    if (row.report) {
      row.empirical = empirical_rate(s, id, bitsim);
      if (row.empirical && (id == SchemeId::DecentralizedLcd1 || id == SchemeId::DecentralizedLcd2 ||
                            id == SchemeId::DecentralizedAlg3))
        row.seeds = bitsim.seeds;
      else if (row.empirical)
        row.seeds = 1;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::vector<ResultRow> run_sweep(const SweepConfig& c) {
  if (c.schemes.empty()) throw Error(ErrorCode::ConfigError, "scheme list is empty");
  if (c.values.empty()) throw Error(ErrorCode::ConfigError, "sweep grid is empty");
  std::vector<Scenario> points;
  for (double v : c.values) points.push_back(scenario_at(c, v));
  std::vector<ResultRow> out;
  for (std::size_t q = 0; q < points.size(); ++q) {
    auto rows = evaluate_point(points[q], c.variable, c.values[q], c.schemes, c.bitsim);
    out.insert(out.end(), std::make_move_iterator(rows.begin()), std::make_move_iterator(rows.end()));
  }
  return out;
}

inline std::vector<ResultRow> run_single(const Scenario& s, const std::vector<SchemeId>& schemes,
                                         const BitsimOptions& bitsim = {}) {
  if (schemes.empty()) throw Error(ErrorCode::ConfigError, "scheme list is empty");
  return evaluate_point(s, SweepVariable::None, 0.0, schemes, bitsim);
}

// Rows whose rate is below a binding bound by more than 1e-9.
inline std::vector<std::size_t> bound_violations(const std::vector<ResultRow>& rows) {
  std::vector<std::size_t> bad;
  for (std::size_t q = 0; q < rows.size(); ++q) {
    const auto& r = rows[q].report;
    if (r && !r->bound_informational && r->rate < r->bound - 1e-9) bad.push_back(q);
  }
  return bad;
}

// ------------------------------------------------------------ output

inline std::string format_number(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

inline std::string write_csv(const std::vector<ResultRow>& rows) {
  std::size_t K = 0;
  for (const auto& r : rows) K = std::max(K, static_cast<std::size_t>(r.scenario.K()));
  std::ostringstream os;
  os << "sweep_var,sweep_value,N,K";
  for (std::size_t k = 1; k <= K; ++k) os << ",r_" << k;
  for (std::size_t k = 1; k <= K; ++k) os << ",M_" << k;
  os << ",scheme,rate,bound,gap,empirical_rate,seeds,bound_informational\n";
  for (const auto& r : rows) {
    const auto& s = r.scenario;
    os << to_string(r.variable) << ',' << (r.variable == SweepVariable::None ? "" : format_number(r.value)) << ','
       << s.N() << ',' << s.K();
    for (std::size_t k = 1; k <= K; ++k) os << ',' << (k <= static_cast<std::size_t>(s.K()) ? format_number(s.r(static_cast<int>(k))) : "");
    for (std::size_t k = 1; k <= K; ++k) os << ',' << (k <= static_cast<std::size_t>(s.K()) ? format_number(s.M(static_cast<int>(k))) : "");
    os << ',' << csv_quote(std::string(scheme_label(r.scheme)));
    if (r.report)
      os << ',' << format_number(r.report->rate) << ',' << format_number(r.report->bound) << ','
         << format_number(r.report->gap);
    else
      os << ",n/a,n/a,n/a";
    os << ',' << (r.empirical ? format_number(*r.empirical) : "") << ',' << (r.empirical ? std::to_string(r.seeds) : "")
       << ',' << (r.report && r.report->bound_informational ? "1" : "0") << '\n';
  }
  return os.str();
}

inline nlohmann::json rows_to_json(const std::vector<ResultRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json o;
    o["sweep_var"] = to_string(r.variable);
    o["sweep_value"] = r.variable == SweepVariable::None ? nlohmann::json() : nlohmann::json(r.value);
    o["N"] = r.scenario.N();
    o["K"] = r.scenario.K();
    for (int k = 1; k <= r.scenario.K(); ++k) o["r_" + std::to_string(k)] = r.scenario.r(k);
    for (int k = 1; k <= r.scenario.K(); ++k) o["M_" + std::to_string(k)] = r.scenario.M(k);
    o["scheme"] = scheme_label(r.scheme);
    if (r.report) {
      o["rate"] = r.report->rate;
      o["bound"] = r.report->bound;
      o["gap"] = r.report->gap;
    } else {
      o["rate"] = o["bound"] = o["gap"] = "n/a";
    }
    o["empirical_rate"] = r.empirical ? nlohmann::json(*r.empirical) : nlohmann::json();
    o["seeds"] = r.empirical ? nlohmann::json(r.seeds) : nlohmann::json();
    o["bound_informational"] = r.report && r.report->bound_informational;
    arr.push_back(std::move(o));
  }
  return arr;
}

inline std::string render_rows(const std::vector<ResultRow>& rows, const std::string& path) {
  const bool json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
  return json ? rows_to_json(rows).dump(2) + "\n" : write_csv(rows);
}

}  // namespace qoscache
