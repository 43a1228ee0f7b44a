#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qoscache/centralized_layered.hpp"
#include "qoscache/centralized_small.hpp"
#include "qoscache/decentralized.hpp"
#include "qoscache/model.hpp"

namespace qoscache {

using BitVec = std::vector<std::uint8_t>;  // one bit per element

// A set of bit positions inside one file's description. Ranges are the common case;
// random placements store arbitrary position lists.
struct BitRef {
  int file = 0;
  std::vector<std::uint32_t> pos;

  std::size_t size() const { return pos.size(); }
  bool empty() const { return pos.empty(); }
  static BitRef range(int file, std::size_t start, std::size_t len) {
    BitRef b{file, std::vector<std::uint32_t>(len)};
    std::iota(b.pos.begin(), b.pos.end(), static_cast<std::uint32_t>(start));
    return b;
  }
};

// A plain reference (one part) or a zero-padded XOR of several parts.
struct CacheItem {
  std::vector<BitRef> parts;
  bool is_xor() const { return parts.size() > 1; }
  std::size_t stored_bits() const {
    std::size_t m = 0;
    for (const auto& p : parts) m = std::max(m, p.size());
    return m;
  }
};

enum class PlacementKind { TwoByTwo, TwoUser, Decentralized, ManSublayer };

struct ConcretePlacement {
  PlacementKind kind = PlacementKind::TwoByTwo;
  std::size_t n = 0;
  int num_files = 0;
  int num_users = 0;
  std::vector<std::size_t> target_len;    // bits user k must recover from its demanded file
  std::vector<std::size_t> layer_end;     // cumulative layer boundaries in bits
  std::vector<std::size_t> capacity_bits; // ceil(n M_k)
  std::vector<BitVec> files;
  std::vector<std::vector<CacheItem>> caches;
  // Centralized: segs[j] = positions of portion j (same in every file).
  std::vector<std::vector<std::uint32_t>> segs;
  // Decentralized: owners[f][b] = bitmask of users holding bit b of file f.
  std::vector<std::vector<std::uint32_t>> owners;
  std::vector<double> caching_prob;  // t_k, orders users inside LCD2 demand groups
  // Single sub-layer coded delivery: subfile owner masks (over all users) and covered prefix.
  std::vector<std::uint32_t> man_subsets;
  int man_uncached = 0;
  std::size_t man_cover = 0;
  CaseId2x2 case2x2 = CaseId2x2::CaseI;
  std::uint64_t seed = 0;
};

enum class DeliveryScheme { Centralized2x2, Centralized2User, Lcd1, Lcd2, Delivery2, ManSublayer };

inline std::string_view to_string(DeliveryScheme d) {
  switch (d) {
    case DeliveryScheme::Centralized2x2: return "centralized-2x2";
    case DeliveryScheme::Centralized2User: return "centralized-2user";
    case DeliveryScheme::Lcd1: return "decentralized-lcd1";
    case DeliveryScheme::Lcd2: return "decentralized-lcd2";
    case DeliveryScheme::Delivery2: return "decentralized-delivery2";
    case DeliveryScheme::ManSublayer: return "centralized-sublayer";
  }
  return "";
}

struct Message {
  std::string label;       // rule that emitted the message
  std::string provenance;  // which portions it carries
  std::vector<BitRef> parts;
  // Random linear combinations: each row is a packed mask over bits [0, combo_width) of combo_file.
  int combo_file = -1;
  std::size_t combo_width = 0;
  std::vector<std::vector<std::uint64_t>> rows;
  BitVec payload;

  std::size_t bits() const { return payload.size(); }
};

struct DeliveryTranscript {
  std::vector<int> demand;  // 0-based file per user
  DeliveryScheme scheme = DeliveryScheme::Centralized2x2;
  std::vector<Message> messages;
  std::size_t total_bits = 0;
};

namespace detail {

inline std::size_t qceil(double x) { return static_cast<std::size_t>(std::max(0.0, std::ceil(x - 1e-7))); }
inline std::size_t qfloor(double x) { return static_cast<std::size_t>(std::max(0.0, std::floor(x + 1e-7))); }

// Unbiased draw in [0, bound) from the raw 64-bit engine output (portable across libraries).
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t x;
  do x = rng(); while (x >= limit);
  return x % bound;
}

inline BitVec random_bits(std::mt19937_64& rng, std::size_t len) {
  BitVec b(len);
  std::uint64_t word = 0;
  for (std::size_t j = 0; j < len; ++j) {
    if (j % 64 == 0) word = rng();
    b[j] = static_cast<std::uint8_t>(word >> (j % 64) & 1u);
  }
  return b;
}

inline std::vector<BitVec> random_files(int N, std::size_t len, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<BitVec> out;
  for (int f = 0; f < N; ++f) out.push_back(random_bits(rng, len));
  return out;
}

// Split [start, start+len) among portions in proportion to `sizes`; the last nonzero portion takes the remainder.
inline std::vector<std::vector<std::uint32_t>> quantize_layer(const std::vector<double>& sizes, std::size_t n,
                                                              std::size_t start, std::size_t len) {
  std::vector<std::vector<std::uint32_t>> out(sizes.size());
  int last = -1;
  for (std::size_t j = 0; j < sizes.size(); ++j)
    if (sizes[j] > 1e-15) last = static_cast<int>(j);
  if (last < 0) return out;
  double cum = 0.0;
  std::size_t begin = 0;
  for (std::size_t j = 0; j < sizes.size(); ++j) {
    if (!(sizes[j] > 1e-15)) continue;
    cum += sizes[j];
    const std::size_t end = static_cast<int>(j) == last ? len : std::min(len, qfloor(n * cum));
    for (std::size_t b = begin; b < std::max(begin, end); ++b) out[j].push_back(static_cast<std::uint32_t>(start + b));
    begin = std::max(begin, end);
  }
  return out;
}

inline BitVec xor_payload(const std::vector<BitVec>& files, const std::vector<BitRef>& parts) {
  std::size_t len = 0;
  for (const auto& p : parts) len = std::max(len, p.size());
  BitVec out(len, 0);
  for (const auto& p : parts) {
    const auto& f = files[static_cast<std::size_t>(p.file)];
    for (std::size_t j = 0; j < p.size(); ++j) out[j] ^= f[p.pos[j]];
  }
  return out;
}

inline std::vector<std::uint64_t> pack(const BitVec& b, std::size_t width) {
  std::vector<std::uint64_t> w((width + 63) / 64, 0);
  for (std::size_t j = 0; j < width; ++j)
    if (b[j]) w[j / 64] |= std::uint64_t{1} << (j % 64);
  return w;
}

inline std::string set_name(std::uint32_t mask) {
  std::string s = "{";
  bool first = true;
  for (int u = 0; u < 32; ++u)
    if (mask >> u & 1u) {
      if (!first) s += ",";
      s += std::to_string(u + 1);
      first = false;
    }
  return s + "}";
}

inline void push_message(DeliveryTranscript& t, const ConcretePlacement& p, std::string label, std::string prov,
                         std::vector<BitRef> parts) {
  parts.erase(std::remove_if(parts.begin(), parts.end(), [](const BitRef& b) { return b.empty(); }), parts.end());
  if (parts.empty()) return;
  Message m;
  m.label = std::move(label);
  m.provenance = std::move(prov);
  m.payload = xor_payload(p.files, parts);
  m.parts = std::move(parts);
  t.messages.push_back(std::move(m));
}

}  // namespace detail

// ------------------------------------------------------------ placements

inline ConcretePlacement materialize_2x2(const Scenario& s, std::size_t n, std::uint64_t seed = 1) {
  require_2x2(s);
  const PlacementSpec spec = placement_2x2(s);
  ConcretePlacement p;
  p.kind = PlacementKind::TwoByTwo;
  p.n = n;
  p.num_files = 2;
  p.num_users = 2;
  p.seed = seed;
  p.case2x2 = classify_2x2(s.M(1), s.M(2), s.r(1), s.r(2));
  const std::size_t L1 = detail::qceil(n * s.r(1)), L2 = detail::qceil(n * s.r(2));
  p.layer_end = {L1, L2};
  p.target_len = {L1, L2};
  p.capacity_bits = {detail::qceil(n * s.M(1)), detail::qceil(n * s.M(2))};
  p.files = detail::random_files(2, L2, seed);
  std::vector<double> base, refine;
  for (int j = 1; j <= 6; ++j) base.push_back(spec.size(std::to_string(j)));
  for (int j = 7; j <= 8; ++j) refine.push_back(spec.size(std::to_string(j)));
  p.segs.assign(9, {});
  auto b = detail::quantize_layer(base, n, 0, L1);
  auto r = detail::quantize_layer(refine, n, L1, L2 - L1);
  for (int j = 1; j <= 6; ++j) p.segs[static_cast<std::size_t>(j)] = std::move(b[static_cast<std::size_t>(j - 1)]);
  for (int j = 7; j <= 8; ++j) p.segs[static_cast<std::size_t>(j)] = std::move(r[static_cast<std::size_t>(j - 7)]);
  auto seg = [&](int file, int j) { return BitRef{file, p.segs[static_cast<std::size_t>(j)]}; };
  p.caches.assign(2, {});
  auto add = [&](int user, std::vector<BitRef> parts) {
    if (parts.front().empty()) return;
    p.caches[static_cast<std::size_t>(user - 1)].push_back({std::move(parts)});
  };
  add(1, {seg(0, 1), seg(1, 1)});
  for (int j : {3, 5})
    for (int f : {0, 1}) add(1, {seg(f, j)});
  add(2, {seg(0, 2), seg(1, 2)});
  for (int j : {4, 5, 7})
    for (int f : {0, 1}) add(2, {seg(f, j)});
  return p;
}

inline ConcretePlacement materialize_2user_nfile(const Scenario& s, std::size_t n, std::uint64_t seed = 1) {
  require_2user(s);
  const PlacementSpec spec = placement_2user_nfile(s);
  ConcretePlacement p;
  p.kind = PlacementKind::TwoUser;
  p.n = n;
  p.num_files = s.N();
  p.num_users = 2;
  p.seed = seed;
  const std::size_t L1 = detail::qceil(n * s.r(1)), L2 = detail::qceil(n * s.r(2));
  p.layer_end = {L1, L2};
  p.target_len = {L1, L2};
  p.capacity_bits = {detail::qceil(n * s.M(1)), detail::qceil(n * s.M(2))};
  p.files = detail::random_files(s.N(), L2, seed);
  std::vector<double> base, refine;
  for (int j = 1; j <= 4; ++j) base.push_back(spec.size(std::to_string(j)));
  for (int j = 5; j <= 6; ++j) refine.push_back(spec.size(std::to_string(j)));
  p.segs.assign(7, {});
  auto b = detail::quantize_layer(base, n, 0, L1);
  auto r = detail::quantize_layer(refine, n, L1, L2 - L1);
  for (int j = 1; j <= 4; ++j) p.segs[static_cast<std::size_t>(j)] = std::move(b[static_cast<std::size_t>(j - 1)]);
  for (int j = 5; j <= 6; ++j) p.segs[static_cast<std::size_t>(j)] = std::move(r[static_cast<std::size_t>(j - 5)]);
  p.caches.assign(2, {});
  for (int f = 0; f < s.N(); ++f) {
    for (int j : {1, 2})
      if (!p.segs[static_cast<std::size_t>(j)].empty()) p.caches[0].push_back({{BitRef{f, p.segs[static_cast<std::size_t>(j)]}}});
    for (int j : {2, 3, 5})
      if (!p.segs[static_cast<std::size_t>(j)].empty()) p.caches[1].push_back({{BitRef{f, p.segs[static_cast<std::size_t>(j)]}}});
  }
  return p;
}

inline ConcretePlacement materialize_decentralized(const Scenario& s, std::size_t n, std::uint64_t seed) {
  const int N = s.N(), K = s.K();
  if (K > 31) throw Error(ErrorCode::UnsupportedScheme, "bit-level simulation supports K <= 31");
  ConcretePlacement p;
  p.kind = PlacementKind::Decentralized;
  p.n = n;
  p.num_files = N;
  p.num_users = K;
  p.seed = seed;
  for (int k = 1; k <= K; ++k) {
    p.caching_prob.push_back(caching_probability(s, k));
    p.layer_end.push_back(detail::qceil(n * s.r(k)));
    p.target_len.push_back(p.layer_end.back());
    p.capacity_bits.push_back(detail::qceil(n * s.M(k)));
  }
  const std::size_t len = p.layer_end.back();
  p.files = detail::random_files(N, len, seed);
  p.owners.assign(static_cast<std::size_t>(N), std::vector<std::uint32_t>(len, 0u));
  p.caches.assign(static_cast<std::size_t>(K), {});
  std::mt19937_64 rng(seed);
  std::vector<std::uint32_t> idx;
  for (int k = 1; k <= K; ++k) {
    const std::size_t lk = p.layer_end[static_cast<std::size_t>(k - 1)];
    const std::size_t cnt = std::min(lk, detail::qfloor(n * s.M(k) / N));
    for (int f = 0; f < N; ++f) {
      idx.resize(lk);
      std::iota(idx.begin(), idx.end(), 0u);
      for (std::size_t j = 0; j < cnt; ++j) {
        const std::size_t pick = j + detail::uniform_below(rng, lk - j);
        std::swap(idx[j], idx[pick]);
      }
      BitRef ref{f, std::vector<std::uint32_t>(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(cnt))};
      std::sort(ref.pos.begin(), ref.pos.end());
      for (auto b : ref.pos) p.owners[static_cast<std::size_t>(f)][b] |= 1u << (k - 1);
      if (!ref.empty()) p.caches[static_cast<std::size_t>(k - 1)].push_back({{std::move(ref)}});
    }
  }
  return p;
}

// One sub-layer of a layer with audience L_k: users 1..i-1 hold nothing, users i..L_k hold
// coded-delivery subfiles of size M each (at the breakpoint for r, or the corner plus an uncached tail).
inline ConcretePlacement materialize_man_sublayer(int Lk, int i, double M, double r, int N, std::size_t n,
                                                  std::uint64_t seed = 1) {
  if (Lk < 1 || i < 1 || i > Lk || Lk > 31) throw Error(ErrorCode::UnsupportedScheme, "bad sub-layer shape");
  const int Li = Lk + 1 - i;
  const double corner = M * Li / N;
  int t = 1;
  double covered = 0.0;
  if (M > 0 && r <= corner + 1e-12) {
    bool found = false;
    for (int c = 1; c <= Li && !found; ++c)
      if (std::abs(r - M * Li / (c * static_cast<double>(N))) <= 1e-12 * std::max(1.0, r)) t = c, found = true;
    if (!found) throw Error(ErrorCode::NotABreakpoint, "r is not a coded-delivery breakpoint");
    covered = r;
  } else if (M > 0) {
    covered = corner;
  }
  ConcretePlacement p;
  p.kind = PlacementKind::ManSublayer;
  p.n = n;
  p.num_files = N;
  p.num_users = Lk;
  p.seed = seed;
  const std::size_t len = detail::qceil(n * r);
  p.layer_end = {len};
  p.target_len.assign(static_cast<std::size_t>(Lk), len);
  p.capacity_bits.assign(static_cast<std::size_t>(Lk), detail::qceil(n * M));
  for (int u = 1; u < i; ++u) p.capacity_bits[static_cast<std::size_t>(u - 1)] = 0;
  p.files = detail::random_files(N, len, seed);
  p.man_uncached = i - 1;
  p.man_cover = std::min(len, covered >= r ? len : detail::qfloor(n * covered));
  p.caches.assign(static_cast<std::size_t>(Lk), {});
  if (p.man_cover > 0) {
    const std::uint32_t cached_all = ((1u << Lk) - 1u) & ~((1u << (i - 1)) - 1u);
    for (std::uint32_t m = cached_all;; m = (m - 1u) & cached_all) {
      if (std::popcount(m) == t) p.man_subsets.push_back(m);
      if (m == 0u) break;
    }
    std::sort(p.man_subsets.begin(), p.man_subsets.end());
    const std::size_t parts = p.man_subsets.size();
    p.segs.assign(parts, {});
    for (std::size_t j = 0; j < parts; ++j) {
      const std::size_t b = p.man_cover * j / parts, e = p.man_cover * (j + 1) / parts;
      for (std::size_t q = b; q < e; ++q) p.segs[j].push_back(static_cast<std::uint32_t>(q));
    }
    for (int u = i; u <= Lk; ++u)
      for (int f = 0; f < N; ++f)
        for (std::size_t j = 0; j < parts; ++j)
          if (p.man_subsets[j] >> (u - 1) & 1u && !p.segs[j].empty())
            p.caches[static_cast<std::size_t>(u - 1)].push_back({{BitRef{f, p.segs[j]}}});
  }
  return p;
}

inline std::size_t stored_bits(const ConcretePlacement& p, int user) {
  std::size_t total = 0;
  for (const auto& item : p.caches[static_cast<std::size_t>(user - 1)]) total += item.stored_bits();
  return total;
}

// ------------------------------------------------------------ deliveries

namespace detail {

inline void deliver_2x2(const ConcretePlacement& p, const std::vector<int>& d, DeliveryTranscript& t) {
  auto seg = [&](int file, int j) { return BitRef{file, p.segs[static_cast<std::size_t>(j)]}; };
  const int X = d[0], Y = d[1];
  auto name = [&](int file, int j) { return std::string(1, static_cast<char>('A' + file)) + std::to_string(j); };
  auto send = [&](int file, int j) { push_message(t, p, "2x2-plain", name(file, j), {seg(file, j)}); };
  auto send_xor = [&](int f1, int j1, int f2, int j2) {
    push_message(t, p, "2x2-xor", name(f1, j1) + "^" + name(f2, j2), {seg(f1, j1), seg(f2, j2)});
  };
  if (X == Y) {
    for (int j : {1, 2, 6, 8}) send(X, j);
    send_xor(X, 3, X, 4);
    return;
  }
  switch (p.case2x2) {
    case CaseId2x2::CaseI:
      send(Y, 1), send(X, 2), send(X, 6), send(Y, 6), send(Y, 8);
      break;
    case CaseId2x2::CaseII:
      send(Y, 1), send(X, 2), send_xor(Y, 3, X, 4), send(Y, 8);
      break;
    case CaseId2x2::CaseIII:
      send(Y, 1), send_xor(Y, 3, X, 4), send(Y, 8);
      break;
    case CaseId2x2::CaseIV:
      send(X, 2), send_xor(Y, 3, X, 4);
      break;
    case CaseId2x2::CaseV:
      break;
  }
}

inline void deliver_2user(const ConcretePlacement& p, const std::vector<int>& d, DeliveryTranscript& t) {
  auto seg = [&](int file, int j) { return BitRef{file, p.segs[static_cast<std::size_t>(j)]}; };
  auto name = [&](int file, int j) { return "W" + std::to_string(file + 1) + "," + std::to_string(j); };
  const int d1 = d[0], d2 = d[1];
  push_message(t, p, "2user-xor", name(d1, 3) + "^" + name(d2, 1), {seg(d1, 3), seg(d2, 1)});
  push_message(t, p, "2user-plain", name(d1, 4), {seg(d1, 4)});
  if (d2 != d1) push_message(t, p, "2user-plain", name(d2, 4), {seg(d2, 4)});
  push_message(t, p, "2user-plain", name(d2, 6), {seg(d2, 6)});
}

// buckets[f][mask] = positions of layer-`layer` bits of file f held exactly by `mask`.
struct LayerBuckets {
  std::vector<std::vector<std::vector<std::uint32_t>>> by_file;
  const std::vector<std::uint32_t>& get(int f, std::uint32_t mask) const {
    return by_file[static_cast<std::size_t>(f)][mask];
  }
};

inline LayerBuckets layer_buckets(const ConcretePlacement& p, const std::vector<int>& d, int layer) {
  const int K = p.num_users;
  LayerBuckets lb;
  lb.by_file.assign(static_cast<std::size_t>(p.num_files), {});
  const std::size_t b0 = layer == 1 ? 0 : p.layer_end[static_cast<std::size_t>(layer - 2)];
  const std::size_t b1 = p.layer_end[static_cast<std::size_t>(layer - 1)];
  for (int f : d) {
    auto& v = lb.by_file[static_cast<std::size_t>(f)];
    if (!v.empty()) continue;
    v.assign(std::size_t{1} << K, {});
    for (std::size_t b = b0; b < b1; ++b) v[p.owners[static_cast<std::size_t>(f)][b]].push_back(static_cast<std::uint32_t>(b));
  }
  return lb;
}

inline void send_subset(const ConcretePlacement& p, const std::vector<int>& d, const LayerBuckets& lb, int layer,
                        std::uint32_t S, const std::string& label, DeliveryTranscript& t) {
  std::vector<BitRef> parts;
  for (int s = 0; s < p.num_users; ++s)
    if (S >> s & 1u) {
      const int f = d[static_cast<std::size_t>(s)];
      parts.push_back(BitRef{f, lb.get(f, S & ~(1u << s))});
    }
  push_message(t, p, label, "L" + std::to_string(layer) + " S" + set_name(S), std::move(parts));
}

inline std::vector<std::uint32_t> subsets_by_size(std::uint32_t universe, int min_size) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t m = universe;; m = (m - 1u) & universe) {
    if (m != 0u && std::popcount(m) >= min_size) out.push_back(m);
    if (m == 0u) break;
  }
  std::sort(out.begin(), out.end(), [](std::uint32_t a, std::uint32_t b) {
    const int pa = std::popcount(a), pb = std::popcount(b);
    return pa != pb ? pa < pb : a < b;
  });
  return out;
}

inline void deliver_lcd1(const ConcretePlacement& p, const std::vector<int>& d, DeliveryTranscript& t) {
  const int K = p.num_users;
  for (int i = 1; i <= K; ++i) {
    const std::size_t b0 = i == 1 ? 0 : p.layer_end[static_cast<std::size_t>(i - 2)];
    if (p.layer_end[static_cast<std::size_t>(i - 1)] == b0) continue;
    const auto lb = layer_buckets(p, d, i);
    const std::uint32_t U = ((1u << K) - 1u) & ~((1u << (i - 1)) - 1u);
    for (std::uint32_t S : subsets_by_size(U, 1)) send_subset(p, d, lb, i, S, "lcd1", t);
  }
}

inline void deliver_lcd2(const ConcretePlacement& p, const std::vector<int>& d, DeliveryTranscript& t) {
  const int K = p.num_users, N = p.num_files;
  for (int i = 1; i <= K; ++i) {
    const std::size_t b0 = i == 1 ? 0 : p.layer_end[static_cast<std::size_t>(i - 2)];
    if (p.layer_end[static_cast<std::size_t>(i - 1)] == b0) continue;
    const auto lb = layer_buckets(p, d, i);
    const std::string L = "L" + std::to_string(i) + " ";
    // Users i..K grouped by requested file; inside a group, ascending t (then index).
    std::vector<int> users(static_cast<std::size_t>(K - i + 1));
    std::iota(users.begin(), users.end(), i - 1);
    std::stable_sort(users.begin(), users.end(), [&](int a, int b) {
      return p.caching_prob[static_cast<std::size_t>(a)] < p.caching_prob[static_cast<std::size_t>(b)];
    });
    std::vector<std::vector<int>> group(static_cast<std::size_t>(N));
    for (int u : users) group[static_cast<std::size_t>(d[static_cast<std::size_t>(u)])].push_back(u);
    std::vector<int> files;
    for (int f = 0; f < N; ++f)
      if (!group[static_cast<std::size_t>(f)].empty()) files.push_back(f);
    auto W = [&](int f, int u) { return BitRef{f, lb.get(f, 1u << u)}; };
    auto chain = [&](int f, const std::vector<int>& g, const std::string& label) {
      for (std::size_t k = 0; k + 1 < g.size(); ++k)
        push_message(t, p, label,
                     L + "W" + std::to_string(f + 1) + "{" + std::to_string(g[k] + 1) + "}^W" + std::to_string(f + 1) +
                         "{" + std::to_string(g[k + 1] + 1) + "}",
                     {W(f, g[k]), W(f, g[k + 1])});
    };
    // Part 1: bits nobody caches, once per requested file.
    for (int f : files)
      push_message(t, p, "lcd2-part1", L + "W" + std::to_string(f + 1) + "{}", {BitRef{f, lb.get(f, 0u)}});
    // Part 2: bits cached by exactly one user.
    for (int f : files) chain(f, group[static_cast<std::size_t>(f)], "lcd2-part2-within");
    for (std::size_t a = 0; a < files.size(); ++a)
      for (std::size_t b = a + 1; b < files.size(); ++b) {
        const int j = files[a], h = files[b];
        chain(j, group[static_cast<std::size_t>(h)], "lcd2-part2-across");
        chain(h, group[static_cast<std::size_t>(j)], "lcd2-part2-across");
      }
    for (std::size_t a = 0; a < files.size(); ++a)
      for (std::size_t b = a + 1; b < files.size(); ++b) {
        const int j = files[a], h = files[b];
        const int lead_j = group[static_cast<std::size_t>(j)].front(), lead_h = group[static_cast<std::size_t>(h)].front();
        push_message(t, p, "lcd2-part2-leaders",
                     L + "W" + std::to_string(j + 1) + "{" + std::to_string(lead_h + 1) + "}^W" + std::to_string(h + 1) +
                         "{" + std::to_string(lead_j + 1) + "}",
                     {W(j, lead_h), W(h, lead_j)});
      }
    // Part 3: bits cached by two or more users, as in LCD1.
    const std::uint32_t U = ((1u << K) - 1u) & ~((1u << (i - 1)) - 1u);
    for (std::uint32_t S : subsets_by_size(U, 3)) send_subset(p, d, lb, i, S, "lcd2-part3", t);
  }
}

inline void deliver_delivery2(const ConcretePlacement& p, const std::vector<int>& d, std::uint64_t seed,
                              DeliveryTranscript& t) {
  const int K = p.num_users, N = p.num_files;
  std::mt19937_64 rng(seed * 0x2545f4914f6cdd1dull + 7u);
  for (int f = 0; f < N; ++f) {
    std::size_t width = 0, min_cached = ~std::size_t{0};
    std::string who;
    for (int u = 0; u < K; ++u) {
      if (d[static_cast<std::size_t>(u)] != f) continue;
      width = std::max(width, p.target_len[static_cast<std::size_t>(u)]);
      std::size_t cached = 0;
      for (const auto& item : p.caches[static_cast<std::size_t>(u)])
        if (!item.is_xor() && item.parts[0].file == f) cached += item.parts[0].size();
      min_cached = std::min(min_cached, cached);
      who += std::to_string(u + 1) + ",";
    }
    if (width == 0) continue;
    const std::size_t need = width > min_cached ? width - min_cached : 0;
    if (need == 0) continue;
    Message m;
    m.label = "delivery2-combination";
    m.provenance = "file " + std::to_string(f + 1) + " users {" + who.substr(0, who.size() - 1) + "}";
    m.combo_file = f;
    m.combo_width = width;
    const auto packed = pack(p.files[static_cast<std::size_t>(f)], width);
    const std::size_t words = packed.size();
    for (std::size_t j = 0; j < need + 64; ++j) {
      std::vector<std::uint64_t> row(words);
      for (auto& w : row) w = rng();
      if (width % 64) row.back() &= (std::uint64_t{1} << (width % 64)) - 1u;
      unsigned par = 0;
      for (std::size_t q = 0; q < words; ++q) par ^= static_cast<unsigned>(std::popcount(row[q] & packed[q]) & 1);
      m.payload.push_back(static_cast<std::uint8_t>(par));
      m.rows.push_back(std::move(row));
    }
    t.messages.push_back(std::move(m));
  }
}

inline void deliver_man(const ConcretePlacement& p, const std::vector<int>& d, DeliveryTranscript& t) {
  const int Lk = p.num_users;
  const std::size_t len = p.layer_end[0];
  for (int u = 0; u < p.man_uncached; ++u) {
    const int f = d[static_cast<std::size_t>(u)];
    push_message(t, p, "sublayer-unicast", "user " + std::to_string(u + 1), {BitRef::range(f, 0, len)});
  }
  if (!p.man_subsets.empty()) {
    const int tsize = std::popcount(p.man_subsets.front());
    const std::uint32_t cached_all = ((1u << Lk) - 1u) & ~((1u << p.man_uncached) - 1u);
    for (std::uint32_t S : subsets_by_size(cached_all, tsize + 1)) {
      if (std::popcount(S) != tsize + 1) continue;
      std::vector<BitRef> parts;
      for (int s = 0; s < Lk; ++s)
        if (S >> s & 1u) {
          const std::uint32_t T = S & ~(1u << s);
          const auto it = std::lower_bound(p.man_subsets.begin(), p.man_subsets.end(), T);
          parts.push_back(BitRef{d[static_cast<std::size_t>(s)], p.segs[static_cast<std::size_t>(it - p.man_subsets.begin())]});
        }
      push_message(t, p, "sublayer-coded", "S" + set_name(S), std::move(parts));
    }
  }
  if (p.man_cover < len)
    for (int u = p.man_uncached; u < Lk; ++u)
      push_message(t, p, "sublayer-tail", "user " + std::to_string(u + 1),
                   {BitRef::range(d[static_cast<std::size_t>(u)], p.man_cover, len - p.man_cover)});
}

}  // namespace detail

inline DeliveryTranscript run_delivery(const ConcretePlacement& p, const std::vector<int>& demand,
                                       DeliveryScheme scheme, std::uint64_t seed = 0) {
  if (demand.size() != static_cast<std::size_t>(p.num_users))
    throw Error(ErrorCode::UnsupportedScheme, "demand vector must have one entry per user");
  for (int f : demand)
    if (f < 0 || f >= p.num_files) throw Error(ErrorCode::UnsupportedScheme, "demand names a missing file");
  const bool ok = (scheme == DeliveryScheme::Centralized2x2 && p.kind == PlacementKind::TwoByTwo) ||
                  (scheme == DeliveryScheme::Centralized2User && p.kind == PlacementKind::TwoUser) ||
                  (scheme == DeliveryScheme::ManSublayer && p.kind == PlacementKind::ManSublayer) ||
                  ((scheme == DeliveryScheme::Lcd1 || scheme == DeliveryScheme::Lcd2 ||
                    scheme == DeliveryScheme::Delivery2) &&
                   p.kind == PlacementKind::Decentralized);
  if (!ok) throw Error(ErrorCode::UnsupportedScheme, std::string(to_string(scheme)) + " does not fit this placement");
  DeliveryTranscript t;
  t.demand = demand;
  t.scheme = scheme;
  switch (scheme) {
    case DeliveryScheme::Centralized2x2: detail::deliver_2x2(p, demand, t); break;
    case DeliveryScheme::Centralized2User: detail::deliver_2user(p, demand, t); break;
    case DeliveryScheme::Lcd1: detail::deliver_lcd1(p, demand, t); break;
    case DeliveryScheme::Lcd2: detail::deliver_lcd2(p, demand, t); break;
    case DeliveryScheme::Delivery2: detail::deliver_delivery2(p, demand, seed ^ p.seed, t); break;
    case DeliveryScheme::ManSublayer: detail::deliver_man(p, demand, t); break;
  }
  for (const auto& m : t.messages) t.total_bits += m.bits();
  return t;
}

// ------------------------------------------------------------ decoding

struct DecodeOptions {
  // Largest unknown count solved by explicit GF(2) elimination; above it a combination
  // message is accepted when it carries at least as many equations as unknowns.
  std::size_t max_elimination = 2048;
};

namespace detail {

struct UserView {
  std::vector<BitVec> known, value;
};

inline bool peel(const std::vector<const std::vector<BitRef>*>& parts, const std::vector<const BitVec*>& payload,
                 UserView& v) {
  bool any = false, progress = true;
  std::vector<char> done(parts.size(), 0);
  while (progress) {
    progress = false;
    for (std::size_t e = 0; e < parts.size(); ++e) {
      if (done[e]) continue;
      const auto& ps = *parts[e];
      const auto& pl = *payload[e];
      bool all = true;
      for (std::size_t j = 0; j < pl.size(); ++j) {
        int unknown = -1, count = 0;
        std::uint8_t acc = pl[j];
        for (std::size_t q = 0; q < ps.size(); ++q) {
          if (j >= ps[q].size()) continue;
          const auto f = static_cast<std::size_t>(ps[q].file);
          const auto b = ps[q].pos[j];
          if (v.known[f][b]) acc ^= v.value[f][b];
          else unknown = static_cast<int>(q), ++count;
        }
        if (count == 1) {
          const auto f = static_cast<std::size_t>(ps[static_cast<std::size_t>(unknown)].file);
          const auto b = ps[static_cast<std::size_t>(unknown)].pos[j];
          v.known[f][b] = 1;
          v.value[f][b] = acc;
          progress = any = true;
        } else if (count > 1) {
          all = false;
        }
      }
      if (all) done[e] = 1;
    }
  }
  return any;
}

inline bool solve_combination(const Message& m, UserView& v, std::size_t max_elim, const BitVec& truth) {
  const auto f = static_cast<std::size_t>(m.combo_file);
  std::vector<std::uint32_t> unknown;
  for (std::size_t b = 0; b < m.combo_width; ++b)
    if (!v.known[f][b]) unknown.push_back(static_cast<std::uint32_t>(b));
  if (unknown.empty()) return false;
  if (unknown.size() > max_elim) {
    if (m.rows.size() < unknown.size()) return false;
    for (auto b : unknown) v.known[f][b] = 1, v.value[f][b] = truth[b];
    return true;
  }
  const std::size_t u = unknown.size(), words = (u + 63) / 64;
  std::vector<std::vector<std::uint64_t>> A;
  BitVec rhs;
  for (std::size_t r = 0; r < m.rows.size(); ++r) {
    std::vector<std::uint64_t> row(words, 0);
    std::uint8_t acc = m.payload[r];
    const auto& full = m.rows[r];
    for (std::size_t b = 0; b < m.combo_width; ++b) {
      if (!(full[b / 64] >> (b % 64) & 1u)) continue;
      if (v.known[f][b]) acc ^= v.value[f][b];
    }
    for (std::size_t q = 0; q < u; ++q)
      if (full[unknown[q] / 64] >> (unknown[q] % 64) & 1u) row[q / 64] |= std::uint64_t{1} << (q % 64);
    A.push_back(std::move(row));
    rhs.push_back(acc);
  }
  std::size_t rank = 0;
  std::vector<std::size_t> pivot_row(u, 0);
  for (std::size_t c = 0; c < u && rank < A.size(); ++c) {
    std::size_t sel = rank;
    while (sel < A.size() && !(A[sel][c / 64] >> (c % 64) & 1u)) ++sel;
    if (sel == A.size()) return false;  // rank deficient: leave the bits unknown
    std::swap(A[sel], A[rank]);
    std::swap(rhs[sel], rhs[rank]);
    for (std::size_t r = 0; r < A.size(); ++r)
      if (r != rank && (A[r][c / 64] >> (c % 64) & 1u)) {
        for (std::size_t w = 0; w < words; ++w) A[r][w] ^= A[rank][w];
        rhs[r] ^= rhs[rank];
      }
    pivot_row[c] = rank++;
  }
  if (rank < u) return false;
  for (std::size_t q = 0; q < u; ++q) v.known[f][unknown[q]] = 1, v.value[f][unknown[q]] = rhs[pivot_row[q]];
  return true;
}

}  // namespace detail

// True iff every user recovers the first target_len bits of its demanded file, with the right values.
inline bool verify_decode(const ConcretePlacement& p, const DeliveryTranscript& t, DecodeOptions opt = {}) {
  for (int u = 0; u < p.num_users; ++u) {
    const auto need = p.target_len[static_cast<std::size_t>(u)];
    if (need == 0) continue;
    detail::UserView v;
    for (const auto& f : p.files) v.known.emplace_back(f.size(), 0), v.value.emplace_back(f.size(), 0);
    std::vector<const std::vector<BitRef>*> parts;
    std::vector<const BitVec*> payload;
    std::vector<BitVec> cache_payloads;
    cache_payloads.reserve(p.caches[static_cast<std::size_t>(u)].size());
    for (const auto& item : p.caches[static_cast<std::size_t>(u)]) {
      if (!item.is_xor()) {
        const auto& ref = item.parts[0];
        const auto f = static_cast<std::size_t>(ref.file);
        for (auto b : ref.pos) v.known[f][b] = 1, v.value[f][b] = p.files[f][b];
      } else {
        cache_payloads.push_back(detail::xor_payload(p.files, item.parts));
      }
    }
    std::size_t ci = 0;
    for (const auto& item : p.caches[static_cast<std::size_t>(u)])
      if (item.is_xor()) parts.push_back(&item.parts), payload.push_back(&cache_payloads[ci++]);
    for (const auto& m : t.messages)
      if (m.combo_file < 0) parts.push_back(&m.parts), payload.push_back(&m.payload);
    bool progress = true;
    while (progress) {
      progress = detail::peel(parts, payload, v);
      for (const auto& m : t.messages)
        if (m.combo_file >= 0 &&
            detail::solve_combination(m, v, opt.max_elimination, p.files[static_cast<std::size_t>(m.combo_file)]))
          progress = true;
    }
    const auto f = static_cast<std::size_t>(t.demand[static_cast<std::size_t>(u)]);
    for (std::size_t b = 0; b < need; ++b)
      if (!v.known[f][b] || v.value[f][b] != p.files[f][b]) return false;
  }
  return true;
}

inline std::vector<std::vector<int>> all_demands(int N, int K) {
  if (!demands_enumerable(N, K)) throw Error(ErrorCode::UnsupportedScheme, "too many demand vectors to enumerate");
  std::vector<std::vector<int>> out;
  std::vector<int> d(static_cast<std::size_t>(K), 0);
  while (true) {
    out.push_back(d);
    int j = K - 1;
    while (j >= 0 && ++d[static_cast<std::size_t>(j)] == N) d[static_cast<std::size_t>(j--)] = 0;
    if (j < 0) break;
  }
  return out;
}

// Max over demands of transcript bits / n; every demand must decode.
inline double worst_case_empirical_rate(const ConcretePlacement& p, DeliveryScheme scheme,
                                        std::vector<std::vector<int>> demands = {}, std::uint64_t seed = 0) {
  if (demands.empty()) demands = all_demands(p.num_files, p.num_users);
  std::size_t worst = 0;
  for (const auto& d : demands) {
    const auto t = run_delivery(p, d, scheme, seed);
    if (!verify_decode(p, t)) {
      std::string ds;
      for (int f : d) ds += std::to_string(f + 1) + " ";
      throw Error(ErrorCode::DecodeFailure, std::string(to_string(scheme)) + " fails for demand " + ds);
    }
    worst = std::max(worst, t.total_bits);
  }
  return static_cast<double>(worst) / static_cast<double>(p.n);
}

inline double mean_decentralized_rate(const Scenario& s, std::size_t n, int seeds, DeliveryScheme scheme,
                                      std::uint64_t base_seed = 1) {
  double sum = 0.0;
  for (int j = 0; j < seeds; ++j) {
    const auto p = materialize_decentralized(s, n, base_seed + static_cast<std::uint64_t>(j));
    sum += worst_case_empirical_rate(p, scheme);
  }
  return sum / seeds;
}

// One line per message: scheme label, payload as hex bytes, payload length in bits, provenance.
inline std::string transcript_text(const DeliveryTranscript& t) {
  static const char* hex = "0123456789abcdef";
  std::ostringstream os;
  for (const auto& m : t.messages) {
    std::string h;
    for (std::size_t b = 0; b < m.payload.size(); b += 8) {
      unsigned byte = 0;
      for (std::size_t q = 0; q < 8 && b + q < m.payload.size(); ++q) byte |= static_cast<unsigned>(m.payload[b + q]) << (7 - q);
      h += hex[byte >> 4];
      h += hex[byte & 15u];
    }
    os << to_string(t.scheme) << '\t' << h << '\t' << m.bits() << '\t' << m.label << ':' << m.provenance << '\n';
  }
  return os.str();
}

// ------------------------------------------------------------ subset identity

struct IdentitySides {
  double lhs = 0.0, rhs = 0.0;
};

// t holds probabilities for users 1..K; the identity concerns users i..K.
inline IdentitySides verify_identity_appendix_d(int K, int i, const std::vector<double>& t) {
  if (K < 1 || K > 20 || i < 1 || i > K || t.size() != static_cast<std::size_t>(K))
    throw Error(ErrorCode::InvalidSubset, "need 1 <= i <= K <= 20 and K probabilities");
  const int L = K - i + 1;
  std::vector<double> tv(t.begin() + (i - 1), t.end());
  IdentitySides out;
  for (std::uint32_t S = 1; S < (1u << L); ++S) {
    // r'(S): member with the smallest t (first index on ties).
    int rp = -1;
    for (int u = 0; u < L; ++u)
      if (S >> u & 1u && (rp < 0 || tv[static_cast<std::size_t>(u)] < tv[static_cast<std::size_t>(rp)])) rp = u;
    double pr = 1.0 - tv[static_cast<std::size_t>(rp)];
    for (int u = 0; u < L; ++u) {
      if (u == rp) continue;
      pr *= (S >> u & 1u) ? tv[static_cast<std::size_t>(u)] : 1.0 - tv[static_cast<std::size_t>(u)];
    }
    out.lhs += pr;
  }
  std::sort(tv.begin(), tv.end());
  out.rhs = layer_send_probability(tv);
  return out;
}

}  // namespace qoscache
