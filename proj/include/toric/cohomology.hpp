// Exact sheaf cohomology via per-character Cech complexes over the cover by
// maximal cones.  The complex attached to a character depends only on the
// set of rays whose inequality holds, so dimensions are memoized per ray
// subset; scans over large coefficient grids then cost one integer dot
// product per (character, ray) plus a table lookup.
#pragma once

#include "toric/divisor.hpp"

#include <mutex>
#include <unordered_map>

namespace toric {

struct CohomologyTable {
  std::vector<long long> h;                            // by cohomological degree
  std::map<Vec, std::vector<long long>> by_character;  // nonzero rows only

  long long dim(size_t i) const { return i < h.size() ? h[i] : 0; }

  long long euler() const {
    long long e = 0;
    for (size_t i = 0; i < h.size(); ++i) e += (i % 2 == 0) ? h[i] : -h[i];
    return e;
  }
};

// ---------------------------------------------------------------------------
// Structural data of the cover: one level per Cech degree, components are
// the (p+1)-subsets of maximal cones, each carrying the ray mask of the
// intersection cone and its face incidences with signs.

class CechEngine {
 public:
  struct Level {
    std::vector<uint32_t> subsets;    // bitmask over maximal cones, lex order
    std::vector<uint32_t> ray_masks;  // rays of the intersection cone
    // per component at this level: faces (component index at previous level,
    // sign) describing the differential coming INTO this level
    std::vector<std::vector<std::pair<int, int>>> faces;
  };

  explicit CechEngine(FanPtr fan) : fan_(std::move(fan)) {
    size_t m = fan_->max_cones().size();
    if (m > 20) throw Error(ErrorCode::ValidationError, "too many maximal cones for the cover");
    levels_.resize(m);
    std::map<uint32_t, int> index_at_level[21];
    for (uint32_t s = 1; s < (1u << m); ++s) {
      int p = __builtin_popcount(s) - 1;
      auto& lv = levels_[p];
      index_at_level[p][s] = static_cast<int>(lv.subsets.size());
      lv.subsets.push_back(s);
      uint32_t rm = ~0u;
      for (size_t c = 0; c < m; ++c)
        if (s & (1u << c)) rm &= fan_->cone_mask(c);
      lv.ray_masks.push_back(rm);
    }
    for (size_t p = 1; p < levels_.size(); ++p) {
      auto& lv = levels_[p];
      lv.faces.resize(lv.subsets.size());
      for (size_t j = 0; j < lv.subsets.size(); ++j) {
        uint32_t s = lv.subsets[j];
        int pos = 0;
        for (size_t c = 0; c < m; ++c) {
          if (!(s & (1u << c))) continue;
          uint32_t t = s & ~(1u << c);
          int sign = (pos % 2 == 0) ? 1 : -1;
          lv.faces[j].push_back({index_at_level[p - 1].at(t), sign});
          ++pos;
        }
      }
    }
    size_t flat = fan_->num_rays() <= 16 ? (1u << fan_->num_rays()) : 0;
    line_cache_.resize(flat);
  }

  const Fan& fan() const { return *fan_; }
  const std::vector<Level>& levels() const { return levels_; }

  // Cohomology dims of the line-bundle complex whose component at an
  // intersection cone tau is k iff tau's rays all lie in `mask`.
  std::vector<long long> line_dims(uint32_t mask) {
    std::lock_guard<std::mutex> lock(mu_);
    if (!line_cache_.empty()) {
      auto& slot = line_cache_[mask];
      if (!slot) slot = std::make_unique<std::vector<long long>>(compute_line_dims(mask));
      return *slot;
    }
    auto it = line_cache_big_.find(mask);
    if (it == line_cache_big_.end())
      it = line_cache_big_.emplace(mask, compute_line_dims(mask)).first;
    return it->second;
  }

  // Cohomology dims of the mapping cone of the componentwise inclusion
  // Cech(mask_sub) -> Cech(mask_amb); requires sub-presence to imply
  // ambient presence (checked).
  std::vector<long long> cone_dims(uint32_t mask_sub, uint32_t mask_amb) {
    uint64_t key = (static_cast<uint64_t>(mask_sub) << 32) | mask_amb;
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cone_cache_.find(key);
    if (it == cone_cache_.end())
      it = cone_cache_.emplace(key, compute_cone_dims(mask_sub, mask_amb)).first;
    return it->second;
  }

 private:
  std::vector<long long> compute_line_dims(uint32_t mask) const {
    size_t np = levels_.size();
    std::vector<std::vector<char>> present(np);
    std::vector<long long> counts(np, 0);
    for (size_t p = 0; p < np; ++p) {
      present[p].resize(levels_[p].subsets.size());
      for (size_t j = 0; j < present[p].size(); ++j) {
        present[p][j] = (levels_[p].ray_masks[j] & ~mask) == 0;
        counts[p] += present[p][j];
      }
    }
    std::vector<long long> ranks(np, 0);  // rank of d: level p-1 -> level p
    for (size_t p = 1; p < np; ++p) {
      if (counts[p] == 0 || counts[p - 1] == 0) continue;
      Mat d(counts[p], counts[p - 1]);
      std::vector<int> row_of(present[p].size(), -1), col_of(present[p - 1].size(), -1);
      int r = 0, c = 0;
      for (size_t j = 0; j < present[p].size(); ++j)
        if (present[p][j]) row_of[j] = r++;
      for (size_t j = 0; j < present[p - 1].size(); ++j)
        if (present[p - 1][j]) col_of[j] = c++;
      for (size_t j = 0; j < present[p].size(); ++j) {
        if (!present[p][j]) continue;
        for (auto& [i, sign] : levels_[p].faces[j])
          if (present[p - 1][i]) d.at(row_of[j], col_of[i]) = Rat(sign);
      }
      ranks[p] = static_cast<long long>(d.rank());
    }
    std::vector<long long> h(np, 0);
    for (size_t p = 0; p < np; ++p) {
      long long out_rank = (p + 1 < np) ? ranks[p + 1] : 0;
      h[p] = counts[p] - out_rank - ranks[p];
    }
    return h;
  }

  std::vector<long long> compute_cone_dims(uint32_t mask_sub, uint32_t mask_amb) const {
    size_t np = levels_.size();
    // presence per level for the sub (A) and ambient (B) complexes
    auto pres = [&](uint32_t mask, size_t p, size_t j) {
      return (levels_[p].ray_masks[j] & ~mask) == 0;
    };
    // cone degree k ranges over -1 .. np-1; store with offset 1
    size_t nk = np + 1;
    std::vector<long long> counts(nk, 0);
    // component layout per degree: all A-components (level k+1), then all
    // B-components (level k)
    auto a_level = [&](size_t k) -> long long { return static_cast<long long>(k); };
    (void)a_level;
    std::vector<std::vector<int>> a_idx(nk), b_idx(nk);
    for (size_t k = 0; k < nk; ++k) {
      size_t la = k;  // A^{k} with cone degree k-1  => at offset k: A-level = k
      long long n = 0;
      if (la < np) {
        a_idx[k].resize(levels_[la].subsets.size(), -1);
        for (size_t j = 0; j < levels_[la].subsets.size(); ++j)
          if (pres(mask_sub, la, j)) {
            if (!pres(mask_amb, la, j))
              throw Error(ErrorCode::ValidationError,
                          "mapping cone needs sub-presence to imply ambient presence");
            a_idx[k][j] = static_cast<int>(n++);
          }
      }
      if (k >= 1) {
        size_t lb = k - 1;
        b_idx[k].resize(levels_[lb].subsets.size(), -1);
        for (size_t j = 0; j < levels_[lb].subsets.size(); ++j)
          if (pres(mask_amb, lb, j)) b_idx[k][j] = static_cast<int>(n++);
      }
      counts[k] = n;
    }
    std::vector<long long> ranks(nk, 0);  // rank of d: degree (k-1) -> k
    for (size_t k = 1; k < nk; ++k) {
      if (counts[k] == 0 || counts[k - 1] == 0) continue;
      Mat d(counts[k], counts[k - 1]);
      size_t la_t = k, lb_t = k - 1;
      // A -> A: -d_A
      if (la_t < np)
        for (size_t j = 0; j < a_idx[k].size(); ++j) {
          if (a_idx[k][j] < 0) continue;
          for (auto& [i, sign] : levels_[la_t].faces[j])
            if (a_idx[k - 1][i] >= 0) d.at(a_idx[k][j], a_idx[k - 1][i]) = Rat(-sign);
        }
      // B -> B: +d_B   (B-level lb_t gets faces from lb_t - 1)
      if (k >= 2 && lb_t >= 1)
        for (size_t j = 0; j < b_idx[k].size(); ++j) {
          if (b_idx[k][j] < 0) continue;
          for (auto& [i, sign] : levels_[lb_t].faces[j])
            if (b_idx[k - 1][i] >= 0) d.at(b_idx[k][j], b_idx[k - 1][i]) = Rat(sign);
        }
      // A -> B: -f, subset-preserving (A-level of source degree k-1 is k-1;
      // B-level of target degree k is k-1: same level, same subset)
      {
        size_t l = k - 1;
        if (l < np)
          for (size_t j = 0; j < levels_[l].subsets.size(); ++j)
            if (a_idx[k - 1].size() > j && a_idx[k - 1][j] >= 0 && b_idx[k][j] >= 0)
              d.at(b_idx[k][j], a_idx[k - 1][j]) = Rat(-1);
      }
      ranks[k] = static_cast<long long>(d.rank());
    }
    // cone degree k lives at offset k+1; report degrees 0..np-1
    std::vector<long long> h(np, 0);
    for (size_t k = 0; k < np; ++k) {
      size_t off = k + 1;
      long long out_rank = (off + 1 < nk) ? ranks[off + 1] : 0;
      h[k] = counts[off] - out_rank - ranks[off];
    }
    return h;
  }

  FanPtr fan_;
  std::vector<Level> levels_;
  std::vector<std::unique_ptr<std::vector<long long>>> line_cache_;
  std::map<uint32_t, std::vector<long long>> line_cache_big_;
  std::map<uint64_t, std::vector<long long>> cone_cache_;
  std::mutex mu_;
};

// Engines are shared per fan (keyed by canonical form) so pattern caches
// survive across calls; safe for concurrent use.
inline CechEngine& cech_engine(const FanPtr& fan) {
  static std::mutex mu;
  static std::map<std::string, std::unique_ptr<CechEngine>> registry;
  std::lock_guard<std::mutex> lock(mu);
  auto it = registry.find(fan->canonical_string());
  if (it == registry.end())
    it = registry.emplace(fan->canonical_string(), std::make_unique<CechEngine>(fan)).first;
  return *it->second;
}

// ---------------------------------------------------------------------------
// Line bundle cohomology.

namespace detail {

inline uint32_t ray_pattern(const Fan& fan, const Vec& m, const Vec& coeffs) {
  uint32_t mask = 0;
  for (size_t r = 0; r < fan.num_rays(); ++r)
    if (dot(m, fan.ray(r)) >= -coeffs[r]) mask |= (1u << r);
  return mask;
}

inline CohomologyTable sum_over_box(const Fan& fan, CechEngine& eng, const CharBox& box,
                                    const std::function<std::vector<long long>(const Vec&)>& dims,
                                    bool keep_characters) {
  CohomologyTable t;
  t.h.assign(eng.levels().size(), 0);
  box.for_each([&](const Vec& m) {
    std::vector<long long> d = dims(m);
    bool nonzero = false;
    for (size_t i = 0; i < d.size(); ++i) {
      t.h[i] += d[i];
      if (d[i]) nonzero = true;
    }
    if (nonzero && keep_characters) t.by_character[m] = d;
  });
  (void)fan;
  return t;
}

}  // namespace detail

inline CohomologyTable line_bundle_cohomology_with_padding(const TorusDivisor& d, Int padding,
                                                           bool keep_characters = true) {
  require_smooth_complete(*d.fan);
  CechEngine& eng = cech_engine(d.fan);
  CharBox box = support_box(d);
  box.dilate(1 + padding);
  return detail::sum_over_box(*d.fan, eng, box,
                              [&](const Vec& m) {
                                return eng.line_dims(detail::ray_pattern(*d.fan, m, d.coeffs));
                              },
                              keep_characters);
}

inline CohomologyTable line_bundle_cohomology(const TorusDivisor& d, bool keep_characters = true) {
  return line_bundle_cohomology_with_padding(d, 0, keep_characters);
}

inline CohomologyTable line_bundle_cohomology(const DivisorClass& c, bool keep_characters = true) {
  return line_bundle_cohomology(c.representative, keep_characters);
}

// Independent validation oracle: same computation over a box inflated by
// `padding` in every coordinate.
inline CohomologyTable cech_oracle(const TorusDivisor& d, Int padding,
                                   bool keep_characters = true) {
  if (padding < 0) throw Error(ErrorCode::ValidationError, "padding must be >= 0");
  return line_bundle_cohomology_with_padding(d, padding, keep_characters);
}

// ---------------------------------------------------------------------------
// Thickenings D_m: cohomology of the mapping cone of
// Cech(O(-(m+1)D)) -> Cech(O_X), multiplication by the canonical section.

inline CohomologyTable thickening_cohomology(const TorusDivisor& d, Int order,
                                             bool keep_characters = true) {
  require_smooth_complete(*d.fan);
  if (!is_effective(d) || is_zero(d.coeffs))
    throw Error(ErrorCode::DNotEffective, "thickenings need an effective nonzero divisor");
  if (order < 0) throw Error(ErrorCode::ValidationError, "thickening order must be >= 0");
  const Fan& fan = *d.fan;
  CechEngine& eng = cech_engine(d.fan);
  TorusDivisor ideal(d.fan, scale(-(order + 1), d.coeffs));
  TorusDivisor structure(d.fan, Vec(fan.num_rays(), 0));
  CharBox box = support_box(ideal);
  box.merge(support_box(structure));
  box.dilate(1);
  return detail::sum_over_box(
      fan, eng, box,
      [&](const Vec& m) {
        uint32_t sub = detail::ray_pattern(fan, m, ideal.coeffs);
        uint32_t amb = detail::ray_pattern(fan, m, structure.coeffs);
        return eng.cone_dims(sub, amb);
      },
      keep_characters);
}

// ---------------------------------------------------------------------------
// The restriction map H^0(X, L) -> H^0(D, L|_D) through the ideal sequence
// 0 -> L(-D) -> L -> L|_D -> 0 on Cech complexes.

struct SectionRestriction {
  long long h0_source = 0;  // h^0(X, L)
  long long h0_target = 0;  // h^0(D, L|_D)
  long long rank = 0;
  bool surjective = false;
};

inline SectionRestriction restriction_map_on_sections(const DivisorClass& L,
                                                      const TorusDivisor& d) {
  require_smooth_complete(*L.fan);
  if (!(*L.fan == *d.fan)) throw Error(ErrorCode::FanMismatch, "class and divisor fans differ");
  if (!is_effective(d))
    throw Error(ErrorCode::DNotEffective, "restriction needs an effective divisor");
  const Fan& fan = *L.fan;
  CechEngine& eng = cech_engine(L.fan);
  const auto& levels = eng.levels();
  const Vec& l = L.representative.coeffs;
  Vec lmd = sub(l, d.coeffs);

  SectionRestriction out;
  CharBox box = support_box(L.representative);
  box.merge(support_box(TorusDivisor(L.fan, lmd)));
  box.dilate(1);
  box.for_each([&](const Vec& m) {
    uint32_t mask_l = detail::ray_pattern(fan, m, l);
    uint32_t mask_sub = detail::ray_pattern(fan, m, lmd);
    uint32_t all = (1u << fan.num_rays()) - 1;
    bool sec_l = mask_l == all;  // global section of L at this character
    if (sec_l) out.h0_source += 1;

    // quotient complex components at levels 0 and 1
    auto qpres = [&](size_t p, size_t j) {
      return (levels[p].ray_masks[j] & ~mask_l) == 0 &&
             (levels[p].ray_masks[j] & ~mask_sub) != 0;
    };
    size_t n0 = levels[0].subsets.size();
    std::vector<char> q0(n0);
    long long c0 = 0;
    for (size_t j = 0; j < n0; ++j) {
      q0[j] = qpres(0, j);
      c0 += q0[j];
    }
    if (c0 == 0) return;
    long long rank_d0 = 0;
    if (levels.size() > 1) {
      size_t n1 = levels[1].subsets.size();
      std::vector<int> row_of(n1, -1), col_of(n0, -1);
      int r = 0, c = 0;
      for (size_t j = 0; j < n1; ++j)
        if (qpres(1, j)) row_of[j] = r++;
      for (size_t j = 0; j < n0; ++j)
        if (q0[j]) col_of[j] = c++;
      if (r > 0) {
        Mat d0(r, c);
        for (size_t j = 0; j < n1; ++j) {
          if (row_of[j] < 0) continue;
          for (auto& [i, sign] : levels[1].faces[j])
            if (col_of[i] >= 0) d0.at(row_of[j], col_of[i]) = Rat(sign);
        }
        rank_d0 = static_cast<long long>(d0.rank());
      }
    }
    long long h0_qm = c0 - rank_d0;
    out.h0_target += h0_qm;
    // the image of a global section of L is the all-ones vector over the
    // present quotient components; nonzero iff some component survives
    if (sec_l && c0 > 0) out.rank += 1;
  });
  out.surjective = out.rank == out.h0_target;
  return out;
}

// ---------------------------------------------------------------------------
// Twisted vanishing scans for line-bundle twists; the bundle overload lives
// with the bundle machinery.

struct VanishingScan {
  int degree = 0;
  std::vector<std::pair<Int, long long>> dims;  // (a, dim H^i(E otimes L^{-a}))
  bool all_zero = true;
  std::optional<Int> first_nonzero;
};

inline VanishingScan twisted_vanishing_scan(const DivisorClass& E, const DivisorClass& L, int i,
                                            Int a_from, Int a_to) {
  VanishingScan s;
  s.degree = i;
  for (Int a = a_from; a <= a_to; ++a) {
    DivisorClass tw = class_add(E, class_scale(-a, L));
    CohomologyTable t = line_bundle_cohomology(tw, false);
    long long v = t.dim(static_cast<size_t>(i));
    s.dims.push_back({a, v});
    if (v != 0) {
      s.all_zero = false;
      if (!s.first_nonzero) s.first_nonzero = a;
    }
  }
  return s;
}

}  // namespace toric
