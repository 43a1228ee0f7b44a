#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qoscache {

enum class ErrorCode {
  NonMonotoneRates,
  NegativeCapacity,
  ZeroDimension,
  InvalidDistortion,
  NotTwoUsers,
  NeedAtLeastTwoFiles,
  WrongShape,
  OutOfRegion,
  NotRefinable,
  NotABreakpoint,
  CflNotApplicable,
  GbcNotApplicable,
  AllRatesZero,
  InvalidSubset,
  InvalidPlacement,
  UnsupportedScheme,
  DecodeFailure,
  ConfigError,
  SchemeShapeError,
  InvariantViolation,
};

inline std::string_view to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::NonMonotoneRates: return "NonMonotoneRates";
    case ErrorCode::NegativeCapacity: return "NegativeCapacity";
    case ErrorCode::ZeroDimension: return "ZeroDimension";
    case ErrorCode::InvalidDistortion: return "InvalidDistortion";
    case ErrorCode::NotTwoUsers: return "NotTwoUsers";
    case ErrorCode::NeedAtLeastTwoFiles: return "NeedAtLeastTwoFiles";
    case ErrorCode::WrongShape: return "WrongShape";
    case ErrorCode::OutOfRegion: return "OutOfRegion";
    case ErrorCode::NotRefinable: return "NotRefinable";
    case ErrorCode::NotABreakpoint: return "NotABreakpoint";
    case ErrorCode::CflNotApplicable: return "CflNotApplicable";
    case ErrorCode::GbcNotApplicable: return "GbcNotApplicable";
    case ErrorCode::AllRatesZero: return "AllRatesZero";
    case ErrorCode::InvalidSubset: return "InvalidSubset";
    case ErrorCode::InvalidPlacement: return "InvalidPlacement";
    case ErrorCode::UnsupportedScheme: return "UnsupportedScheme";
    case ErrorCode::DecodeFailure: return "DecodeFailure";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::SchemeShapeError: return "SchemeShapeError";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Rates and capacities are in bits per source sample.
struct Scenario {
  int num_files = 0;
  int num_users = 0;
  std::vector<double> layer_rates;
  std::vector<double> cache_sizes;
  bool successively_refinable = true;

  int N() const { return num_files; }
  int K() const { return num_users; }
  // 1-based with r(0) = 0.
  double r(int k) const { return k <= 0 ? 0.0 : layer_rates[static_cast<std::size_t>(k - 1)]; }
  double M(int k) const { return cache_sizes[static_cast<std::size_t>(k - 1)]; }
};

inline Scenario make_scenario(int N, int K, std::vector<double> layer_rates,
                              std::vector<double> cache_sizes, bool successively_refinable = true) {
  if (N < 1 || K < 1) throw Error(ErrorCode::ZeroDimension, "N and K must be positive");
  if (layer_rates.size() != static_cast<std::size_t>(K) ||
      cache_sizes.size() != static_cast<std::size_t>(K))
    throw Error(ErrorCode::ZeroDimension, "layer_rates and cache_sizes must have length K");
  double prev = 0.0;
  for (double r : layer_rates) {
    if (!std::isfinite(r) || r < prev)
      throw Error(ErrorCode::NonMonotoneRates, "layer rates must satisfy 0 <= r_1 <= ... <= r_K");
    prev = r;
  }
  for (double m : cache_sizes)
    if (!std::isfinite(m) || m < 0.0) throw Error(ErrorCode::NegativeCapacity, "cache sizes must be >= 0");
  return Scenario{N, K, std::move(layer_rates), std::move(cache_sizes), successively_refinable};
}

inline Scenario with_caches(const Scenario& s, std::vector<double> caches) {
  return make_scenario(s.num_files, s.num_users, s.layer_rates, std::move(caches), s.successively_refinable);
}

inline std::vector<double> layer_increments(const Scenario& s) {
  std::vector<double> out(static_cast<std::size_t>(s.K()));
  for (int k = 1; k <= s.K(); ++k) out[static_cast<std::size_t>(k - 1)] = s.r(k) - s.r(k - 1);
  return out;
}

inline double gaussian_rate_distortion(double variance, double D) {
  if (!(D > 0.0) || !(D <= variance))
    throw Error(ErrorCode::InvalidDistortion, "require 0 < D <= variance");
  return 0.5 * std::log2(variance / D);
}

enum class SchemeId {
  Bound,
  Centralized2x2,
  Centralized2User,
  CentralizedPca,
  CentralizedOca,
  CentralizedBest,
  DecentralizedLcd1,
  DecentralizedLcd2,
  DecentralizedAlg3,
  BaselineUncoded,
};

inline constexpr SchemeId kAllSchemes[] = {
    SchemeId::Bound,           SchemeId::Centralized2x2,    SchemeId::Centralized2User,
    SchemeId::CentralizedPca,  SchemeId::CentralizedOca,    SchemeId::CentralizedBest,
    SchemeId::DecentralizedLcd1, SchemeId::DecentralizedLcd2, SchemeId::DecentralizedAlg3,
    SchemeId::BaselineUncoded,
};

inline std::string_view scheme_label(SchemeId id) {
  switch (id) {
    case SchemeId::Bound: return "bound";
    case SchemeId::Centralized2x2: return "centralized-2x2";
    case SchemeId::Centralized2User: return "centralized-2user";
    case SchemeId::CentralizedPca: return "centralized-pca";
    case SchemeId::CentralizedOca: return "centralized-oca";
    case SchemeId::CentralizedBest: return "centralized-best";
    case SchemeId::DecentralizedLcd1: return "decentralized-lcd1";
    case SchemeId::DecentralizedLcd2: return "decentralized-lcd2";
    case SchemeId::DecentralizedAlg3: return "decentralized-alg3";
    case SchemeId::BaselineUncoded: return "baseline:prefix-uncoded";
  }
  return "";
}

inline SchemeId parse_scheme(std::string_view label) {
  for (SchemeId id : kAllSchemes)
    if (scheme_label(id) == label) return id;
  throw Error(ErrorCode::ConfigError, "unknown scheme '" + std::string(label) + "'");
}

struct RateReport {
  SchemeId scheme = SchemeId::Bound;
  double rate = 0.0;
  double bound = 0.0;
  double gap = 0.0;
  // Set when the scenario is not successively refinable: the bound is stated in r*_k.
  bool bound_informational = false;
  // Which branch produced the rate (e.g. "pca", "oca", "memory-sharing").
  std::string detail;
};

}  // namespace qoscache
