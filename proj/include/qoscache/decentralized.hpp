#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "qoscache/model.hpp"

namespace qoscache {

struct PlacementProbabilities {
  std::vector<double> t;                  // t[k-1] for user k
  std::vector<std::vector<double>> view;  // view[i-1]: t over users i..K, ascending
  std::vector<std::vector<int>> order;    // order[i-1]: the users behind view[i-1]
};

inline double caching_probability(const Scenario& s, int k) {
  if (!(s.r(k) > 0)) return 1.0;
  return std::min(1.0, s.M(k) / (s.N() * s.r(k)));
}

inline PlacementProbabilities placement_probabilities(const Scenario& s) {
  const int K = s.K();
  PlacementProbabilities p;
  for (int k = 1; k <= K; ++k) p.t.push_back(caching_probability(s, k));
  for (int i = 1; i <= K; ++i) {
    std::vector<int> users(static_cast<std::size_t>(K - i + 1));
    std::iota(users.begin(), users.end(), i);
    std::stable_sort(users.begin(), users.end(),
                     [&](int a, int b) { return p.t[static_cast<std::size_t>(a - 1)] < p.t[static_cast<std::size_t>(b - 1)]; });
    std::vector<double> v;
    for (int u : users) v.push_back(p.t[static_cast<std::size_t>(u - 1)]);
    p.view.push_back(std::move(v));
    p.order.push_back(std::move(users));
  }
  return p;
}

// Expected size of the part of `user`'s file cached exactly by `owners` (users are 1-based).
inline double segment_size(const Scenario& s, int user, const std::vector<int>& owners) {
  const int K = s.K();
  if (user < 1 || user > K) throw Error(ErrorCode::InvalidSubset, "user out of range");
  std::vector<char> in(static_cast<std::size_t>(K + 1), 0);
  for (int u : owners) {
    if (u < 1 || u > K || u == user || in[static_cast<std::size_t>(u)])
      throw Error(ErrorCode::InvalidSubset, "owners must be distinct users other than the receiver");
    in[static_cast<std::size_t>(u)] = 1;
  }
  in[static_cast<std::size_t>(user)] = 1;
  int m = user;
  for (int u : owners) m = std::min(m, u);
  const auto t = [&](int u) { return caching_probability(s, u); };
  double owned = 1.0 - t(user);
  for (int u : owners) owned *= t(u);
  double total = 0.0;
  for (int i = 1; i <= m; ++i) {
    double p = owned;
    for (int u = i; u <= K; ++u)
      if (!in[static_cast<std::size_t>(u)]) p *= 1.0 - t(u);
    total += (s.r(i) - s.r(i - 1)) * p;
  }
  return total;
}

// sum_{l=1}^{L} prod_{k<=l} (1 - t_k) over an ascending view.
inline double layer_send_probability(const std::vector<double>& tv) {
  double sum = 0.0, prod = 1.0;
  for (double t : tv) {
    prod *= 1.0 - t;
    sum += prod;
  }
  return sum;
}

inline double lcd1_rate(const Scenario& s) {
  const auto p = placement_probabilities(s);
  double total = 0.0;
  for (int i = 1; i <= s.K(); ++i) {
    const double d = s.r(i) - s.r(i - 1);
    if (d > 0) total += d * layer_send_probability(p.view[static_cast<std::size_t>(i - 1)]);
  }
  return total;
}

inline double delivery2_rate(const Scenario& s) {
  const int K = s.K(), p = std::min(s.N(), K);
  std::vector<double> m;
  for (int k = 1; k <= K; ++k) m.push_back(std::min(s.M(k), s.N() * s.r(k)) / s.N());
  std::sort(m.begin(), m.end());
  double total = 0.0;
  for (int i = 1; i <= p; ++i) total += s.r(K - i + 1) - m[static_cast<std::size_t>(i - 1)];
  return total;
}

inline double decentralized_rate_alg3(const Scenario& s) { return std::min(lcd1_rate(s), delivery2_rate(s)); }

struct Lcd2Corrections {
  double dr1 = 0.0, dr2 = 0.0;
};

inline Lcd2Corrections lcd2_corrections(const std::vector<double>& tv, int N) {
  const int L = static_cast<int>(tv.size());
  Lcd2Corrections c;
  if (L <= N) return c;
  double prod = 1.0;
  for (double t : tv) prod *= 1.0 - t;
  c.dr1 = (L - N) * prod;
  for (int k = 1; k <= L - N; ++k) {
    // (k-1) * t_{k+N} / (1 - t_{k+N}) * prod, with the (1 - t_{k+N}) factor cancelled.
    double term = (k - 1) * tv[static_cast<std::size_t>(k + N - 1)];
    for (int l = 1; l <= L; ++l)
      if (l != k + N) term *= 1.0 - tv[static_cast<std::size_t>(l - 1)];
    c.dr2 += term;
  }
  return c;
}

inline double lcd2_rate(const Scenario& s) {
  const auto p = placement_probabilities(s);
  double total = 0.0;
  for (int i = 1; i <= s.K(); ++i) {
    const double d = s.r(i) - s.r(i - 1);
    if (!(d > 0)) continue;
    const auto& tv = p.view[static_cast<std::size_t>(i - 1)];
    const auto c = lcd2_corrections(tv, s.N());
    total += d * (layer_send_probability(tv) - c.dr1 - c.dr2);
  }
  return total;
}

inline double rate_2x2_decentralized(const Scenario& s) {
  if (s.N() != 2 || s.K() != 2) throw Error(ErrorCode::WrongShape, "two-user closed form needs N = K = 2");
  const double r1 = s.r(1), r2 = s.r(2);
  const double t1 = caching_probability(s, 1), t2 = caching_probability(s, 2);
  return 2 * r1 * (1 - t1) * (1 - t2) + (r2 - r1) * (1 - t2) + std::max(r1 * t1 * (1 - t2), r1 * t2 * (1 - t1));
}

// ------------------------------------------------------- uncoded baseline

// Broadcast cost of one file to the users in `group` (bitmask over 0-based users).
inline double uncoded_group_cost(const Scenario& s, std::uint32_t group) {
  double rmax = 0.0, mmin = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= s.K(); ++k)
    if (group >> (k - 1) & 1u) {
      rmax = std::max(rmax, s.r(k));
      mmin = std::min(mmin, s.M(k) / s.N());
    }
  return group ? std::max(0.0, rmax - mmin) : 0.0;
}

inline double uncoded_demand_cost(const Scenario& s, const std::vector<int>& demand) {
  std::vector<std::uint32_t> groups(static_cast<std::size_t>(s.N()), 0u);
  for (int k = 1; k <= s.K(); ++k) groups[static_cast<std::size_t>(demand[static_cast<std::size_t>(k - 1)])] |= 1u << (k - 1);
  long double total = 0.0L;  // wide accumulator keeps the sum of the rounded terms exact in practice
  for (auto g : groups) total += uncoded_group_cost(s, g);
  return static_cast<double>(total);
}

inline bool demands_enumerable(int N, int K, double limit = 1e6) { return std::pow(double(N), double(K)) <= limit; }

inline double uncoded_rate_exhaustive(const Scenario& s) {
  const int N = s.N(), K = s.K();
  std::vector<int> d(static_cast<std::size_t>(K), 0);
  double best = 0.0;
  while (true) {
    best = std::max(best, uncoded_demand_cost(s, d));
    int j = 0;
    while (j < K && ++d[static_cast<std::size_t>(j)] == N) d[static_cast<std::size_t>(j++)] = 0;
    if (j == K) break;
  }
  return best;
}

// Max over partitions of the users into at most min(N, K) groups; equals the exhaustive demand search.
inline double uncoded_rate_partition_dp(const Scenario& s) {
  const int K = s.K(), B = std::min(s.N(), K);
  const std::uint32_t full = (1u << K) - 1u;
  std::vector<double> cost(full + 1u);
  for (std::uint32_t g = 0; g <= full; ++g) cost[g] = uncoded_group_cost(s, g);
  const long double ninf = -std::numeric_limits<long double>::infinity();
  std::vector<long double> prev(full + 1u, ninf), cur(full + 1u);
  prev[0] = 0.0L;
  for (int b = 1; b <= B; ++b) {
    cur[0] = 0.0L;
    for (std::uint32_t mask = 1; mask <= full; ++mask) {
      const std::uint32_t low = mask & (~mask + 1u);
      const std::uint32_t rest = mask ^ low;
      long double best = prev[mask];
      for (std::uint32_t sub = rest;; sub = (sub - 1u) & rest) {
        const std::uint32_t grp = sub | low;
        const long double v = prev[mask ^ grp];
        if (v != ninf) best = std::max(best, cost[grp] + v);
        if (sub == 0u) break;
      }
      cur[mask] = best;
    }
    std::swap(prev, cur);
  }
  return static_cast<double>(prev[full]);
}

// Demand in which the largest-r users and the smallest-cache users fall in distinct groups.
inline double uncoded_rate_structural(const Scenario& s) {
  const int K = s.K(), p = std::min(s.N(), K);
  std::vector<int> by_cache(static_cast<std::size_t>(K));
  std::iota(by_cache.begin(), by_cache.end(), 1);
  std::stable_sort(by_cache.begin(), by_cache.end(), [&](int a, int b) { return s.M(a) < s.M(b); });
  std::vector<int> d(static_cast<std::size_t>(K), -1);
  for (int i = 0; i < p; ++i) d[static_cast<std::size_t>(K - 1 - i)] = i;
  int g = 0;
  for (int u : by_cache)
    if (g < p && d[static_cast<std::size_t>(u - 1)] < 0) d[static_cast<std::size_t>(u - 1)] = g++;
  for (auto& x : d)
    if (x < 0) x = 0;
  return uncoded_demand_cost(s, d);
}

inline double uncoded_rate(const Scenario& s) {
  if (demands_enumerable(s.N(), s.K())) return uncoded_rate_exhaustive(s);
  if (s.K() <= 16) return uncoded_rate_partition_dp(s);
  return uncoded_rate_structural(s);
}

}  // namespace qoscache
