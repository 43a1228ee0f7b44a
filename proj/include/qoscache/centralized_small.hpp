#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "qoscache/bounds.hpp"
#include "qoscache/model.hpp"

namespace qoscache {

enum class CaseId2x2 { CaseI, CaseII, CaseIII, CaseIV, CaseV };

inline std::string_view to_string(CaseId2x2 c) {
  switch (c) {
    case CaseId2x2::CaseI: return "i";
    case CaseId2x2::CaseII: return "ii";
    case CaseId2x2::CaseIII: return "iii";
    case CaseId2x2::CaseIV: return "iv";
    case CaseId2x2::CaseV: return "v";
  }
  return "";
}

// One named portion of every file. Users are 1-based in `owners`.
struct SegmentRecord {
  std::string name;
  double size = 0.0;
  int layer = 1;                // scalable-code layer the portion belongs to
  std::vector<int> owners;      // users that store it
  bool coded_pair = false;      // stored as the XOR of the two files' same-named portions
};

struct PlacementSpec {
  int num_files = 0;
  int num_users = 0;
  std::vector<double> layer_rates;
  std::vector<double> cache_sizes;
  std::vector<SegmentRecord> segments;

  const SegmentRecord& segment(const std::string& name) const {
    for (const auto& s : segments)
      if (s.name == name) return s;
    throw Error(ErrorCode::InvalidPlacement, "no segment named " + name);
  }
  double size(const std::string& name) const { return segment(name).size; }

  double stored(int user) const {
    double total = 0.0;
    for (const auto& s : segments) {
      if (std::find(s.owners.begin(), s.owners.end(), user) == s.owners.end()) continue;
      total += s.coded_pair ? s.size : s.size * num_files;
    }
    return total;
  }
  double layer_total(int layer) const {
    double total = 0.0;
    for (const auto& s : segments)
      if (s.layer == layer) total += s.size;
    return total;
  }
};

inline void check_placement(const PlacementSpec& p, double tol = 1e-12) {
  for (int k = 1; k <= p.num_users; ++k)
    if (p.stored(k) > p.cache_sizes[static_cast<std::size_t>(k - 1)] + tol)
      throw Error(ErrorCode::InvalidPlacement, "user " + std::to_string(k) + " exceeds its cache");
  double prev = 0.0;
  int layer = 1;
  for (double r : p.layer_rates) {
    if (std::abs(p.layer_total(layer) - (r - prev)) > tol)
      throw Error(ErrorCode::InvalidPlacement, "layer " + std::to_string(layer) + " is not partitioned");
    prev = r;
    ++layer;
  }
  for (const auto& s : p.segments)
    if (s.size < 0) throw Error(ErrorCode::InvalidPlacement, "negative segment " + s.name);
}

// ---------------------------------------------------------------- N = K = 2

inline CaseId2x2 classify_2x2(double M1, double M2, double r1, double r2) {
  if (M1 + M2 <= r1) return CaseId2x2::CaseI;
  if (M1 <= r1 && M2 <= 2 * r2 - r1) return CaseId2x2::CaseII;
  if (M1 > r1 && M2 <= 2 * r2 && M2 - M1 <= 2 * r2 - 2 * r1) return CaseId2x2::CaseIII;
  if (M1 <= 2 * r1 && M2 > 2 * r2 - r1 && M2 - M1 > 2 * r2 - 2 * r1) return CaseId2x2::CaseIV;
  if (M1 > 2 * r1 && M2 > 2 * r2) return CaseId2x2::CaseV;
  // The five conditions cover the quadrant exactly; rounding can still leave a sliver.
  const double f[] = {r1 + r2 - (M1 + M2), r1 / 2 + r2 - (M1 + M2) / 2, r2 - M2 / 2, r1 - M1 / 2, 0.0};
  return static_cast<CaseId2x2>(std::max_element(std::begin(f), std::end(f)) - std::begin(f));
}

inline void require_2x2(const Scenario& s) {
  if (s.N() != 2 || s.K() != 2) throw Error(ErrorCode::WrongShape, "scheme needs N = K = 2");
}

struct CaseIIIParams {
  double l1, l2, l3;
};

inline CaseIIIParams case_iii_params(double M1, double M2, double r1, double r2) {
  const double l1 = std::max(0.0, std::min(M1 - r1, M2 / 2 - (r2 - r1)));
  const double l2 = std::max(0.0, M2 / 2 - (r2 - r1) - l1);
  const double l3 = std::min(r2 - r1, M2 / 2);
  return {l1, l2, l3};
}

inline PlacementSpec placement_2x2(const Scenario& s) {
  require_2x2(s);
  const double r1 = s.r(1), r2 = s.r(2), M1 = s.M(1), M2 = s.M(2);
  double a[9] = {};
  switch (classify_2x2(M1, M2, r1, r2)) {
    case CaseId2x2::CaseI:
      a[1] = M1, a[2] = M2, a[6] = r1 - M1 - M2, a[8] = r2 - r1;
      break;
    case CaseId2x2::CaseII: {
      // Once user 2 could hold all of layer 2, the surplus moves into an A3/A4 pair.
      const double half = (M1 + M2 - r1) / 2;
      const double l = std::max(0.0, half - (r2 - r1));
      a[1] = M1 - 2 * l, a[2] = r1 - M1, a[3] = l, a[4] = l, a[7] = std::min(half, r2 - r1), a[8] = r2 - r1 - a[7];
      break;
    }
    case CaseId2x2::CaseIII: {
      const auto [l1, l2, l3] = case_iii_params(M1, M2, r1, r2);
      a[1] = r1 - l1 - 2 * l2, a[3] = l2, a[4] = l2, a[5] = l1, a[7] = l3, a[8] = r2 - r1 - l3;
      break;
    }
    case CaseId2x2::CaseIV:
      // For r1 < M1 <= 2 r1 the tabulated |A2| = r1 - M1 is negative; the excess becomes A5.
      a[2] = std::max(0.0, r1 - M1), a[3] = a[4] = std::min(M1 / 2, r1 - M1 / 2), a[5] = std::max(0.0, M1 - r1);
      a[7] = r2 - r1;
      break;
    case CaseId2x2::CaseV:
      a[5] = r1, a[7] = r2 - r1;
      break;
  }
  PlacementSpec p{2, 2, s.layer_rates, s.cache_sizes, {}};
  const std::vector<int> owners[9] = {{}, {1}, {2}, {1}, {2}, {1, 2}, {}, {2}, {}};
  for (int i = 1; i <= 8; ++i)
    p.segments.push_back({std::to_string(i), std::max(0.0, a[i]), i <= 6 ? 1 : 2, owners[i], i <= 2});
  check_placement(p, 1e-9);
  return p;
}

inline double rate_2x2(const Scenario& s) {
  require_2x2(s);
  const double r1 = s.r(1), r2 = s.r(2), M1 = s.M(1), M2 = s.M(2);
  switch (classify_2x2(M1, M2, r1, r2)) {
    case CaseId2x2::CaseI: return r1 + r2 - (M1 + M2);
    case CaseId2x2::CaseII: return r1 / 2 + r2 - (M1 + M2) / 2;
    case CaseId2x2::CaseIII: return r2 - M2 / 2;
    case CaseId2x2::CaseIV: return r1 - M1 / 2;
    case CaseId2x2::CaseV: return 0.0;
  }
  return 0.0;
}

// ------------------------------------------------------ K = 2, N >= 2 files

enum class Region2User { M1, M2, M3, M4, M5, None };

inline void require_2user(const Scenario& s) {
  if (s.K() != 2 || s.N() < 2) throw Error(ErrorCode::WrongShape, "scheme needs K = 2 and N >= 2");
}

inline Region2User region_2user_nfile(const Scenario& s) {
  const double N = s.N(), r1 = s.r(1), r2 = s.r(2), M1 = s.M(1), M2 = s.M(2);
  if (M1 <= N * r1 / 2 && M1 + M2 <= N * r2 && M1 <= M2) return Region2User::M1;
  if (M1 + M2 <= N * r1 && M1 > M2) return Region2User::M2;
  if (M1 <= N * r1 && M1 + M2 > N * r2 && M2 - M1 > N * (r2 - r1)) return Region2User::M3;
  if (M1 > N * r1 / 2 && M2 <= N * r2 && M1 + M2 > N * r1 && M2 - M1 <= N * (r2 - r1)) return Region2User::M4;
  if (M1 > N * r1 && M2 > N * r2) return Region2User::M5;
  return Region2User::None;
}

inline PlacementSpec placement_2user_nfile(const Scenario& s) {
  require_2user(s);
  const double N = s.N(), r1 = s.r(1), r2 = s.r(2), m1 = s.M(1) / N, m2 = s.M(2) / N;
  double w[7] = {};
  if (m1 + m2 <= r1) {
    w[1] = m1, w[2] = 0, w[3] = m2, w[4] = r1 - m1 - m2, w[5] = 0, w[6] = r2 - r1;
  } else if (m1 <= r1) {
    w[1] = std::max(std::min(r2 - m2, m1), 0.0);
    w[2] = std::max(m1 + m2 - r2, 0.0);
    w[3] = r1 - m1;
    w[4] = 0;
    w[5] = std::min(m1 + m2 - r1, r2 - r1);
    w[6] = std::max(r2 - (m1 + m2), 0.0);
  } else {
    w[1] = r1 - std::min(m2, r1);
    w[2] = std::min(m2, r1);
    w[3] = 0, w[4] = 0;
    w[5] = std::max(0.0, std::min(r2, m2) - r1);
    w[6] = std::min(r2 - r1, std::max(0.0, r2 - m2));
  }
  PlacementSpec p{s.N(), 2, s.layer_rates, s.cache_sizes, {}};
  const std::vector<int> owners[7] = {{}, {1}, {1, 2}, {2}, {}, {2}, {}};
  for (int i = 1; i <= 6; ++i)
    p.segments.push_back({std::to_string(i), std::max(0.0, w[i]), i <= 4 ? 1 : 2, owners[i], false});
  check_placement(p, 1e-9);
  return p;
}

// Rate of the placement's own delivery (W_{d1,3} xor W_{d2,1}, W_{d1,4}, W_{d2,4}, W_{d2,6}).
inline double delivery_rate_2user_nfile(const PlacementSpec& p) {
  return std::max(p.size("1"), p.size("3")) + 2 * p.size("4") + p.size("6");
}

inline double rate_2user_nfile(const Scenario& s) {
  require_2user(s);
  const double N = s.N(), r1 = s.r(1), r2 = s.r(2), M1 = s.M(1), M2 = s.M(2);
  switch (region_2user_nfile(s)) {
    case Region2User::M1: return r1 + r2 - 2 * M1 / N - M2 / N;
    case Region2User::M2: return r1 + r2 - M1 / N - 2 * M2 / N;
    case Region2User::M3: return r1 - M1 / N;
    case Region2User::M4: return r2 - M2 / N;
    case Region2User::M5: return 0.0;
    case Region2User::None: break;
  }
  return std::max({r1 + r2 - 2 * M1 / N - M2 / N, r1 + r2 - M1 / N - 2 * M2 / N, r1 - M1 / N, r2 - M2 / N, 0.0});
}

// Closed-form gap to the bound inside regions M1 and M2, one form per N mod 3.
inline double gap_2user_nfile(const Scenario& s) {
  require_2user(s);
  if (!s.successively_refinable) throw Error(ErrorCode::NotRefinable, "gap needs r_k = r*_k");
  const auto reg = region_2user_nfile(s);
  if (reg != Region2User::M1 && reg != Region2User::M2)
    throw Error(ErrorCode::OutOfRegion, "gap is defined only in regions M1 and M2");
  if (s.N() < 3) throw Error(ErrorCode::WrongShape, "gap closed forms need N >= 3");
  const double N = s.N(), M1 = s.M(1), M2 = s.M(2);
  const double d = std::abs(M1 - M2);
  switch (s.N() % 3) {
    case 0: return d / (2 * N);
    case 1: return d / (2 * (N - 1)) + std::max(2 * M1 + M2, 2 * M2 + M1) / (N * (N - 1));
    default: return d / (2 * (N - 2)) + 2 * std::max(2 * M1 + M2, M1 + 2 * M2) / (N * (N - 2));
  }
}

}  // namespace qoscache
