#pragma once

#include <algorithm>
#include <functional>
#include <vector>

#include "qoscache/model.hpp"

namespace qoscache {

// Cut-set bound. For each s the best user subset is the top s of r_k - M_k/floor(N/s).
inline double cutset_bound(const Scenario& s) {
  const int smax = std::min(s.N(), s.K());
  double best = 0.0;
  std::vector<double> v(static_cast<std::size_t>(s.K()));
  for (int sz = 1; sz <= smax; ++sz) {
    const double q = static_cast<double>(s.N() / sz);
    for (int k = 1; k <= s.K(); ++k) v[static_cast<std::size_t>(k - 1)] = s.r(k) - s.M(k) / q;
    std::partial_sort(v.begin(), v.begin() + sz, v.end(), std::greater<>());
    double sum = 0.0;
    for (int j = 0; j < sz; ++j) sum += v[static_cast<std::size_t>(j)];
    best = std::max(best, sum);
  }
  return best;
}

inline double two_user_bound(const Scenario& s) {
  if (s.K() != 2) throw Error(ErrorCode::NotTwoUsers, "two_user_bound needs K = 2");
  if (s.N() < 2) throw Error(ErrorCode::NeedAtLeastTwoFiles, "two_user_bound needs N >= 2");
  const double h = static_cast<double>(s.N() / 2);
  return std::max(0.0, s.r(1) / 2 + s.r(2) - (s.M(1) + s.M(2)) / (2 * h));
}

inline double lower_bound_2x2(const Scenario& s) {
  if (s.N() != 2 || s.K() != 2) throw Error(ErrorCode::WrongShape, "lower_bound_2x2 needs N = K = 2");
  const double r1 = s.r(1), r2 = s.r(2), m1 = s.M(1), m2 = s.M(2);
  return std::max({r1 - m1 / 2, r2 - m2 / 2, r1 + r2 - (m1 + m2), r1 / 2 + r2 - (m1 + m2) / 2, 0.0});
}

inline double lower_bound_2user_nfile(const Scenario& s) {
  if (s.K() != 2) throw Error(ErrorCode::NotTwoUsers, "lower_bound_2user_nfile needs K = 2");
  if (s.N() < 2) throw Error(ErrorCode::NeedAtLeastTwoFiles, "lower_bound_2user_nfile needs N >= 2");
  const double N = s.N(), r1 = s.r(1), r2 = s.r(2), m1 = s.M(1), m2 = s.M(2);
  const double half = static_cast<double>(s.N() / 2);
  double b = std::max({r1 - m1 / N, r2 - m2 / N, r1 / 2 + r2 - (m1 + m2) / (2 * half), 0.0});
  if (s.N() >= 3) {
    const double third = static_cast<double>(s.N() / 3);
    b = std::max(b, r1 + r2 - (m1 + m2) / (2 * third));
  }
  return b;
}

inline double best_lower_bound(const Scenario& s) {
  double b = cutset_bound(s);
  if (s.K() == 2 && s.N() >= 2) {
    b = std::max(b, two_user_bound(s));
    b = std::max(b, lower_bound_2user_nfile(s));
    if (s.N() == 2) b = std::max(b, lower_bound_2x2(s));
  }
  return b;
}

}  // namespace qoscache
