#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include "qoscache/bounds.hpp"
#include "qoscache/model.hpp"

namespace qoscache {

// a[k][j]: cache user k+1 devotes to layer j+1 (0-based storage).
struct LayerAllocation {
  std::vector<std::vector<double>> a;

  double at(int user, int layer) const {
    return a[static_cast<std::size_t>(user - 1)][static_cast<std::size_t>(layer - 1)];
  }
  double user_total(int user) const {
    const auto& row = a[static_cast<std::size_t>(user - 1)];
    return std::accumulate(row.begin(), row.end(), 0.0);
  }
};

struct SublayerProfile {
  int layer = 1;
  int index = 1;
  int audience = 1;          // L_k = K - k + 1
  int cached_audience = 1;   // L_k^i = L_k + 1 - i
  double cache = 0.0;        // M_k^i
  double size = 0.0;         // r_k^i
};

class PiecewiseLinearRate {
 public:
  PiecewiseLinearRate() = default;
  explicit PiecewiseLinearRate(std::vector<std::pair<double, double>> pts, double tail_slope = 0.0)
      : pts_(std::move(pts)), tail_slope_(tail_slope) {}

  const std::vector<std::pair<double, double>>& points() const { return pts_; }

  double slope(std::size_t seg) const {
    if (seg + 1 >= pts_.size()) return tail_slope_;
    return (pts_[seg + 1].second - pts_[seg].second) / (pts_[seg + 1].first - pts_[seg].first);
  }
  double last_slope() const { return pts_.size() < 2 ? tail_slope_ : slope(pts_.size() - 2); }

  double operator()(double r) const {
    if (pts_.empty()) return 0.0;
    if (r <= pts_.front().first) return pts_.front().second;
    for (std::size_t j = 0; j + 1 < pts_.size(); ++j) {
      const auto& [x0, y0] = pts_[j];
      const auto& [x1, y1] = pts_[j + 1];
      if (r <= x1) return y0 + (y1 - y0) * (r - x0) / (x1 - x0);
    }
    return pts_.back().second + last_slope() * (r - pts_.back().first);
  }

  bool is_convex(double tol = 1e-12) const {
    for (std::size_t j = 0; j + 2 < pts_.size(); ++j)
      if (slope(j + 1) < slope(j) - tol) return false;
    return true;
  }

 private:
  std::vector<std::pair<double, double>> pts_;
  double tail_slope_ = 0.0;
};

// Lower convex hull of a point set (monotone chain); duplicate abscissae keep the lowest value.
inline PiecewiseLinearRate lower_convex_envelope(std::vector<std::pair<double, double>> pts) {
  std::sort(pts.begin(), pts.end());
  std::vector<std::pair<double, double>> hull;
  for (const auto& p : pts) {
    if (!hull.empty() && std::abs(hull.back().first - p.first) <= 1e-15 * std::max(1.0, std::abs(p.first)))
      continue;
    while (hull.size() >= 2) {
      const auto& a = hull[hull.size() - 2];
      const auto& b = hull.back();
      const double cross = (b.first - a.first) * (p.second - a.second) - (b.second - a.second) * (p.first - a.first);
      if (cross <= 0) hull.pop_back();
      else break;
    }
    hull.push_back(p);
  }
  return PiecewiseLinearRate(std::move(hull));
}

// Sort a layer's per-user allocations ascending and difference them.
inline std::vector<double> sublayer_decompose(std::vector<double> layer_caches) {
  std::stable_sort(layer_caches.begin(), layer_caches.end());
  std::vector<double> out(layer_caches.size());
  double prev = 0.0;
  for (std::size_t j = 0; j < layer_caches.size(); ++j) {
    out[j] = layer_caches[j] - prev;
    prev = layer_caches[j];
  }
  return out;
}

inline double man_value(int Li, int i, double M, double r, int N) {
  if (r <= 0) return 0.0;
  const double u = M / (r * N);
  return (i - 1) * r + r * Li * (1 - u) / (1 + u * Li);
}

inline double rate_man(int Lk, int i, double M, double r, int N) {
  const int Li = Lk + 1 - i;
  if (r == 0.0) return 0.0;
  bool on_grid = false;
  if (M > 0)
    for (int t = 1; t <= Li && !on_grid; ++t)
      on_grid = std::abs(r - M * Li / (t * static_cast<double>(N))) <= 1e-12 * std::max(1.0, r);
  if (!on_grid) throw Error(ErrorCode::NotABreakpoint, "r is not a coded-delivery breakpoint");
  return man_value(Li, i, M, r, N);
}

// Tail beyond the last breakpoint: corner value plus broadcasting the uncached remainder.
inline double man_tail(int Lk, int i, double M, double r, int N) {
  const int Li = Lk + 1 - i;
  const double corner = M * Li / N;
  return (i - 1) * r + M * Li * (Li - 1) / (2.0 * N) + Li * (r - corner);
}

inline bool cfl_applicable(int Lk, int i, int N) { return Lk >= N && i - 1 <= N; }

inline double rate_cfl(int Lk, int i, double M, double r, int N) {
  const int Li = Lk + 1 - i;
  if (!cfl_applicable(Lk, i, N) || r < M * Li - 1e-12)
    throw Error(ErrorCode::CflNotApplicable, "coded placement needs L_k >= N, i-1 <= N, r >= M*L_k^i");
  return N * r - (N - i + 1) * M;
}

inline bool gbc_applicable(int Lk, int i, int N) {
  const int Li = Lk + 1 - i;
  return i - 1 < N && Li > N && N >= 3;
}

inline double rate_gbc(int Lk, int i, double M, int N) {
  if (!gbc_applicable(Lk, i, N)) throw Error(ErrorCode::GbcNotApplicable, "GBC needs i-1 < N and L_k^i > N >= 3");
  const int Li = Lk + 1 - i;
  const double r = M * Li / N;
  return (i - 1) * r + N * r - N * (N + 1.0) * r / (2.0 * Li);
}

inline PiecewiseLinearRate sublayer_rate_function(int Lk, int i, double M, int N, double r_max) {
  const int Li = Lk + 1 - i;
  const double corner = M * Li / N;
  const bool cfl = cfl_applicable(Lk, i, N);
  const double far = std::max({r_max, cfl ? M * Li : 0.0, corner, 1e-9}) * 2.0;
  std::vector<std::pair<double, double>> pts{{0.0, 0.0}};
  if (M > 0)
    for (int t = Li; t >= 1; --t) {
      const double r = M * Li / (t * static_cast<double>(N));
      pts.emplace_back(r, man_value(Li, i, M, r, N));
    }
  if (cfl) {
    const double a = M * Li;
    pts.emplace_back(a, N * a - (N - i + 1) * M);
    pts.emplace_back(far, N * far - (N - i + 1) * M);
  } else {
    pts.emplace_back(far, man_tail(Lk, i, M, far, N));
  }
  if (M > 0 && gbc_applicable(Lk, i, N)) pts.emplace_back(corner, rate_gbc(Lk, i, M, N));
  return lower_convex_envelope(std::move(pts));
}

struct LayerSplit {
  std::vector<double> split;
  double total_rate = 0.0;
};

// Exhaustive grid search over the simplex; used when an envelope is not convex.
inline LayerSplit optimize_layer_split_grid(const std::vector<PiecewiseLinearRate>& f, double layer_size, int steps) {
  const std::size_t L = f.size();
  LayerSplit best{std::vector<double>(L, 0.0), std::numeric_limits<double>::infinity()};
  std::vector<int> c(L, 0);
  const double h = layer_size / steps;
  auto rec = [&](auto&& self, std::size_t j, int left) -> void {
    if (j + 1 == L) {
      c[j] = left;
      double tot = 0.0;
      for (std::size_t q = 0; q < L; ++q) tot += f[q](c[q] * h);
      if (tot < best.total_rate - 1e-15) {
        best.total_rate = tot;
        for (std::size_t q = 0; q < L; ++q) best.split[q] = c[q] * h;
      }
      return;
    }
    for (int x = 0; x <= left; ++x) {
      c[j] = x;
      self(self, j + 1, left - x);
    }
  };
  if (L > 0) rec(rec, 0, steps);
  return best;
}

inline LayerSplit optimize_layer_split(int Lk, const std::vector<double>& sublayer_caches, int N, double layer_size) {
  const std::size_t L = sublayer_caches.size();
  LayerSplit out{std::vector<double>(L, 0.0), 0.0};
  if (layer_size <= 0 || L == 0) return out;
  std::vector<PiecewiseLinearRate> f;
  f.reserve(L);
  for (std::size_t j = 0; j < L; ++j)
    f.push_back(sublayer_rate_function(Lk, static_cast<int>(j) + 1, sublayer_caches[j], N, layer_size));
  for (const auto& g : f)
    if (!g.is_convex(1e-9)) return optimize_layer_split_grid(f, layer_size, 200);

  struct Piece {
    double slope, length;
    std::size_t fn, seg;
  };
  std::vector<Piece> pieces;
  for (std::size_t j = 0; j < L; ++j) {
    const auto& pts = f[j].points();
    for (std::size_t q = 0; q + 1 < pts.size(); ++q)
      pieces.push_back({f[j].slope(q), pts[q + 1].first - pts[q].first, j, q});
    pieces.push_back({f[j].last_slope(), std::numeric_limits<double>::infinity(), j, pts.size()});
  }
  std::stable_sort(pieces.begin(), pieces.end(), [](const Piece& a, const Piece& b) {
    if (a.slope != b.slope) return a.slope < b.slope;
    if (a.fn != b.fn) return a.fn > b.fn;  // ties go to the later sub-layer
    return a.seg < b.seg;
  });
  double left = layer_size;
  for (const auto& p : pieces) {
    if (left <= 0) break;
    const double take = std::min(left, p.length);
    out.split[p.fn] += take;
    left -= take;
  }
  for (std::size_t j = 0; j < L; ++j) out.total_rate += f[j](out.split[j]);
  return out;
}

inline LayerAllocation pca_allocation(const Scenario& s) {
  const int K = s.K();
  if (!(s.r(K) > 0)) throw Error(ErrorCode::AllRatesZero, "PCA needs r_K > 0");
  LayerAllocation out{std::vector<std::vector<double>>(K, std::vector<double>(K, 0.0))};
  for (int k = 1; k <= K; ++k) {
    if (!(s.r(k) > 0)) continue;
    for (int i = 1; i <= k; ++i)
      out.a[k - 1][i - 1] = (s.r(i) - s.r(i - 1)) / s.r(k) * s.M(k);
  }
  return out;
}

inline LayerAllocation oca_allocation(const Scenario& s) {
  const int K = s.K();
  LayerAllocation out{std::vector<std::vector<double>>(K, std::vector<double>(K, 0.0))};
  for (int k = 1; k <= K; ++k) {
    double left = s.M(k);
    for (int j = 1; j <= k && left > 0; ++j) {
      const double take = std::min(left, s.N() * (s.r(j) - s.r(j - 1)));
      out.a[k - 1][j - 1] = take;
      left -= take;
    }
  }
  return out;
}

inline std::vector<SublayerProfile> sublayer_profiles(const Scenario& s, const LayerAllocation& alloc, int layer) {
  const int K = s.K();
  std::vector<double> col;
  for (int u = layer; u <= K; ++u) col.push_back(alloc.at(u, layer));
  const auto caches = sublayer_decompose(col);
  const int Lk = K - layer + 1;
  const auto split = optimize_layer_split(Lk, caches, s.N(), s.r(layer) - s.r(layer - 1));
  std::vector<SublayerProfile> out;
  for (int i = 1; i <= Lk; ++i)
    out.push_back({layer, i, Lk, Lk + 1 - i, caches[static_cast<std::size_t>(i - 1)],
                   split.split[static_cast<std::size_t>(i - 1)]});
  return out;
}

inline double total_rate_centralized(const Scenario& s, const LayerAllocation& alloc) {
  const int K = s.K();
  double total = 0.0;
  for (int k = 1; k <= K; ++k) {
    const double size = s.r(k) - s.r(k - 1);
    if (!(size > 0)) continue;
    std::vector<double> col;
    for (int u = k; u <= K; ++u) col.push_back(alloc.at(u, k));
    total += optimize_layer_split(K - k + 1, sublayer_decompose(col), s.N(), size).total_rate;
  }
  return total;
}

inline double pca_rate(const Scenario& s) {
  return s.r(s.K()) > 0 ? total_rate_centralized(s, pca_allocation(s)) : 0.0;
}
inline double oca_rate(const Scenario& s) { return total_rate_centralized(s, oca_allocation(s)); }

// Memory sharing between PCA and OCA along the ray M(c) = c * M, evaluated at c = 1.
inline double memory_sharing_rate(const Scenario& s, int grid_points = 101) {
  double cmax = 1.0;
  bool any = false;
  for (int k = 1; k <= s.K(); ++k)
    if (s.M(k) > 0) {
      any = true;
      cmax = std::max(cmax, s.N() * s.r(k) / s.M(k));
    }
  if (!any) return std::min(pca_rate(s), oca_rate(s));
  std::vector<double> grid;
  for (int j = 0; j < grid_points; ++j) grid.push_back(cmax * j / std::max(1, grid_points - 1));
  grid.push_back(1.0);
  std::vector<std::pair<double, double>> pts;
  for (double c : grid) {
    std::vector<double> caches(s.cache_sizes);
    for (double& m : caches) m *= c;
    const Scenario sc = with_caches(s, std::move(caches));
    pts.emplace_back(c, std::min(pca_rate(sc), oca_rate(sc)));
  }
  return lower_convex_envelope(std::move(pts))(1.0);
}

inline RateReport best_centralized(const Scenario& s, int grid_points = 101) {
  const double pca = pca_rate(s), oca = oca_rate(s);
  const double shared = memory_sharing_rate(s, grid_points);
  RateReport rep;
  rep.scheme = SchemeId::CentralizedBest;
  rep.rate = pca;
  rep.detail = "pca";
  if (oca < rep.rate) rep.rate = oca, rep.detail = "oca";
  if (shared < rep.rate - 1e-12) rep.rate = shared, rep.detail = "memory-sharing";
  rep.bound = best_lower_bound(s);
  rep.gap = rep.rate - rep.bound;
  rep.bound_informational = !s.successively_refinable;
  return rep;
}

}  // namespace qoscache
