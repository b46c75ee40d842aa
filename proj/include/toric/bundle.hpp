// Torus-equivariant vector bundles as per-ray decreasing filtrations of a
// fixed rational fiber (Klyachko data).  A filtration is stored as strictly
// increasing thresholds with strictly decreasing subspaces; F(x) is the
// subspace at the first threshold >= x, the full fiber below all thresholds
// and zero above.  Rank-one data round-trips through divisor coefficients:
// O(D) has F(x) = full iff x <= a_rho.
#pragma once

#include "toric/cohomology.hpp"

namespace toric {

struct RayFiltration {
  size_t fiber_dim = 0;
  std::vector<Int> thresholds;   // strictly increasing
  std::vector<Subspace> spaces;  // spaces[0] = full fiber, strictly decreasing

  static RayFiltration make(size_t fiber_dim, std::vector<std::pair<Int, Subspace>> steps) {
    std::sort(steps.begin(), steps.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    RayFiltration f;
    f.fiber_dim = fiber_dim;
    for (auto& [t, s] : steps) {
      if (!f.spaces.empty()) {
        if (!subspace_leq(s, f.spaces.back()))
          throw Error(ErrorCode::NotDecreasing, "filtration subspaces must decrease");
        if (s.dim() == f.spaces.back().dim()) {
          // equal space, keep the larger threshold
          f.thresholds.back() = t;
          continue;
        }
      }
      if (s.dim() == 0) break;  // zero beyond the last threshold is implicit
      f.thresholds.push_back(t);
      f.spaces.push_back(s);
    }
    if (f.spaces.empty() || f.spaces[0].dim() != fiber_dim)
      throw Error(ErrorCode::NotDecreasing, "filtration must be the full fiber for small indices");
    return f;
  }

  int eval_index(Int j) const {
    // first i with j <= thresholds[i]; spaces.size() encodes the zero space
    size_t lo = 0, hi = thresholds.size();
    while (lo < hi) {
      size_t mid = (lo + hi) / 2;
      if (j <= thresholds[mid]) hi = mid;
      else lo = mid + 1;
    }
    return static_cast<int>(lo);
  }

  Subspace eval(Int j) const {
    int i = eval_index(j);
    if (static_cast<size_t>(i) >= spaces.size()) return zero_space(fiber_dim);
    return spaces[i];
  }

  bool operator==(const RayFiltration& o) const {
    return thresholds == o.thresholds && spaces == o.spaces;
  }
};

// One summand piece of an adapted decomposition: the tuple of filtration
// jumps together with the chosen complement subspace.
struct AdaptedPiece {
  Vec jumps;       // one threshold per participating filtration
  Subspace space;  // piece; the pieces direct-sum to the fiber
};

namespace detail {

// Common refinement of several decreasing filtrations: for each tuple of
// jump indices, U(j) = intersection of levels, gr(j) = U(j) / sum of the
// one-step-deeper intersections; lifts of the graded pieces assemble a
// decomposition adapted to every filtration iff one exists.  Returns
// nullopt when the data is incompatible.
inline std::optional<std::vector<AdaptedPiece>> adapted_decomposition(
    const std::vector<const RayFiltration*>& filts, size_t fiber_dim) {
  if (filts.empty()) {
    std::vector<AdaptedPiece> one;
    one.push_back({Vec{}, full_space(fiber_dim)});
    return one;
  }
  std::vector<AdaptedPiece> pieces;
  size_t total = 0;
  Vec tuple(filts.size(), 0);
  // recursive enumeration with pruning on zero intersections
  std::function<void(size_t, Subspace)> rec = [&](size_t level, Subspace inter) {
    if (inter.dim() == 0) return;
    if (level == filts.size()) {
      // gr piece: complement of the sum of one-step-deeper intersections
      Subspace deeper = zero_space(fiber_dim);
      for (size_t i = 0; i < filts.size(); ++i)
        deeper = subspace_sum(deeper,
                              subspace_intersection(inter, filts[i]->eval(tuple[i] + 1)));
      size_t gd = inter.dim() - deeper.dim();
      if (gd == 0) return;
      // greedy lift: extend a basis of `deeper` inside `inter` by columns of
      // inter's canonical basis
      Mat acc = deeper.basis;
      Mat lift(fiber_dim, 0);
      for (size_t c = 0; c < inter.basis.cols(); ++c) {
        Mat col = inter.basis.columns({c});
        Mat test = acc.hstack(lift).hstack(col);
        if (test.rank() > acc.cols() + lift.cols()) lift = lift.hstack(col);
      }
      if (lift.cols() != gd) return;  // defensive; cannot happen
      pieces.push_back({tuple, make_subspace(lift)});
      total += gd;
      return;
    }
    const RayFiltration& f = *filts[level];
    for (size_t t = 0; t < f.thresholds.size(); ++t) {
      tuple[level] = f.thresholds[t];
      rec(level + 1, subspace_intersection(inter, f.spaces[t]));
    }
  };
  rec(0, full_space(fiber_dim));
  if (total != fiber_dim) return std::nullopt;
  // verify: every filtration level is the direct sum of the matching pieces
  for (size_t i = 0; i < filts.size(); ++i) {
    const RayFiltration& f = *filts[i];
    for (size_t t = 0; t < f.thresholds.size(); ++t) {
      Mat span(fiber_dim, 0);
      for (const auto& p : pieces)
        if (p.jumps[i] >= f.thresholds[t]) span = span.hstack(p.space.basis);
      if (!(make_subspace(span) == f.spaces[t])) return std::nullopt;
    }
  }
  return pieces;
}

}  // namespace detail

class KlyachkoBundle {
 public:
  KlyachkoBundle() = default;

  static KlyachkoBundle build(FanPtr fan, size_t rank, std::vector<RayFiltration> filts) {
    if (filts.size() != fan->num_rays())
      throw Error(ErrorCode::ValidationError, "one filtration per ray required");
    for (const auto& f : filts)
      if (f.fiber_dim != rank)
        throw Error(ErrorCode::ValidationError, "filtration fiber dimension mismatch");
    KlyachkoBundle b;
    b.fan_ = std::move(fan);
    b.rank_ = rank;
    b.filts_ = std::move(filts);
    // Klyachko compatibility: every maximal cone admits a simultaneous
    // adapted decomposition
    for (size_t c = 0; c < b.fan_->max_cones().size(); ++c) {
      const auto& cone = b.fan_->max_cones()[c];
      std::vector<const RayFiltration*> fs;
      for (int r : cone.ray_indices) fs.push_back(&b.filts_[r]);
      auto dec = detail::adapted_decomposition(fs, rank);
      if (!dec)
        throw Error(ErrorCode::IncompatibleOnCone,
                    "no adapted decomposition on maximal cone " + std::to_string(c));
      b.cone_decomps_.push_back(*dec);
    }
    return b;
  }

  const FanPtr& fan() const { return fan_; }
  size_t rank() const { return rank_; }
  const std::vector<RayFiltration>& filtrations() const { return filts_; }
  const RayFiltration& filtration(size_t ray) const { return filts_[ray]; }
  const std::vector<AdaptedPiece>& cone_decomposition(size_t cone) const {
    return cone_decomps_[cone];
  }

  bool operator==(const KlyachkoBundle& o) const {
    return *fan_ == *o.fan_ && rank_ == o.rank_ && filts_ == o.filts_;
  }

 private:
  FanPtr fan_;
  size_t rank_ = 0;
  std::vector<RayFiltration> filts_;
  std::vector<std::vector<AdaptedPiece>> cone_decomps_;
};

struct SummandList {
  // multiset of line bundle classes with multiplicities, canonically ordered
  // by class coordinates
  std::vector<std::pair<DivisorClass, int>> summands;

  size_t total_rank() const {
    size_t r = 0;
    for (auto& [c, m] : summands) r += m;
    return r;
  }
};

// ---------------------------------------------------------------------------
// Constructors and algebra.

inline KlyachkoBundle line_bundle(const TorusDivisor& d) {
  std::vector<RayFiltration> filts;
  for (size_t r = 0; r < d.fan->num_rays(); ++r)
    filts.push_back(RayFiltration::make(1, {{d.coeffs[r], full_space(1)}}));
  return KlyachkoBundle::build(d.fan, 1, std::move(filts));
}

inline KlyachkoBundle direct_sum(const KlyachkoBundle& a, const KlyachkoBundle& b) {
  if (!(*a.fan() == *b.fan())) throw Error(ErrorCode::FanMismatch, "bundles on different fans");
  size_t ra = a.rank(), rb = b.rank(), r = ra + rb;
  auto embed = [&](const Subspace& s, bool second) {
    Mat m(r, s.dim());
    for (size_t j = 0; j < s.dim(); ++j)
      for (size_t i = 0; i < s.ambient(); ++i)
        m.at(second ? ra + i : i, j) = s.basis.at(i, j);
    return m;
  };
  std::vector<RayFiltration> filts;
  for (size_t ray = 0; ray < a.fan()->num_rays(); ++ray) {
    const auto& fa = a.filtration(ray);
    const auto& fb = b.filtration(ray);
    std::set<Int> ts(fa.thresholds.begin(), fa.thresholds.end());
    ts.insert(fb.thresholds.begin(), fb.thresholds.end());
    std::vector<std::pair<Int, Subspace>> steps;
    for (Int t : ts) {
      Mat span = embed(fa.eval(t), false).hstack(embed(fb.eval(t), true));
      steps.push_back({t, make_subspace(span)});
    }
    filts.push_back(RayFiltration::make(r, std::move(steps)));
  }
  return KlyachkoBundle::build(a.fan(), r, std::move(filts));
}

inline KlyachkoBundle dual(const KlyachkoBundle& a) {
  size_t r = a.rank();
  std::vector<RayFiltration> filts;
  for (size_t ray = 0; ray < a.fan()->num_rays(); ++ray) {
    const auto& f = a.filtration(ray);
    size_t T = f.thresholds.size();
    std::vector<std::pair<Int, Subspace>> steps;
    steps.push_back({-f.thresholds[T - 1], full_space(r)});
    for (size_t i = T; i-- > 1;)
      steps.push_back({-f.thresholds[i - 1], annihilator(f.spaces[i])});
    filts.push_back(RayFiltration::make(r, std::move(steps)));
  }
  return KlyachkoBundle::build(a.fan(), r, std::move(filts));
}

inline KlyachkoBundle tensor(const KlyachkoBundle& a, const KlyachkoBundle& b) {
  if (!(*a.fan() == *b.fan())) throw Error(ErrorCode::FanMismatch, "bundles on different fans");
  size_t r = a.rank() * b.rank();
  std::vector<RayFiltration> filts;
  for (size_t ray = 0; ray < a.fan()->num_rays(); ++ray) {
    const auto& fa = a.filtration(ray);
    const auto& fb = b.filtration(ray);
    std::set<Int> cand;
    for (Int ta : fa.thresholds)
      for (Int tb : fb.thresholds) cand.insert(ta + tb);
    std::vector<std::pair<Int, Subspace>> steps;
    for (Int j : cand) {
      Mat span(r, 0);
      for (size_t i = 0; i < fa.thresholds.size(); ++i) {
        Subspace bi = fb.eval(j - fa.thresholds[i]);
        if (bi.dim() == 0) continue;
        span = span.hstack(Mat::kron(fa.spaces[i].basis, bi.basis));
      }
      steps.push_back({j, make_subspace(span)});
    }
    filts.push_back(RayFiltration::make(r, std::move(steps)));
  }
  return KlyachkoBundle::build(a.fan(), r, std::move(filts));
}

inline KlyachkoBundle end_bundle(const KlyachkoBundle& a) { return tensor(dual(a), a); }

enum class TvbKind { Dual, Tensor, DirectSum, End };

inline KlyachkoBundle tvb_algebra(TvbKind kind, const KlyachkoBundle& a,
                                  const KlyachkoBundle* b = nullptr) {
  switch (kind) {
    case TvbKind::Dual: return dual(a);
    case TvbKind::Tensor:
      if (!b) throw Error(ErrorCode::ValidationError, "tensor needs two bundles");
      return tensor(a, *b);
    case TvbKind::DirectSum:
      if (!b) throw Error(ErrorCode::ValidationError, "direct_sum needs two bundles");
      return direct_sum(a, *b);
    case TvbKind::End: return end_bundle(a);
  }
  throw Error(ErrorCode::ValidationError, "unknown algebra operation");
}

// Tensor with a line bundle = shift every threshold; cheap and exact.
inline KlyachkoBundle twist(const KlyachkoBundle& a, const TorusDivisor& d) {
  if (!(*a.fan() == *d.fan)) throw Error(ErrorCode::FanMismatch, "twist divisor on another fan");
  std::vector<RayFiltration> filts;
  for (size_t ray = 0; ray < a.fan()->num_rays(); ++ray) {
    RayFiltration f = a.filtration(ray);
    for (auto& t : f.thresholds) t += d.coeffs[ray];
    filts.push_back(std::move(f));
  }
  return KlyachkoBundle::build(a.fan(), a.rank(), std::move(filts));
}

// Change of fiber basis: v -> g^{-1} v on coordinates, i.e. the subspaces
// are mapped through g^{-1}; the result is isomorphic to the input.
inline KlyachkoBundle change_fiber_basis(const KlyachkoBundle& a, const Mat& g) {
  if (g.rows() != a.rank() || g.cols() != a.rank() || g.det() == 0)
    throw Error(ErrorCode::ValidationError, "fiber basis change must be invertible");
  std::vector<RayFiltration> filts;
  for (size_t ray = 0; ray < a.fan()->num_rays(); ++ray) {
    const auto& f = a.filtration(ray);
    std::vector<std::pair<Int, Subspace>> steps;
    for (size_t i = 0; i < f.thresholds.size(); ++i)
      steps.push_back({f.thresholds[i], make_subspace(g * f.spaces[i].basis)});
    filts.push_back(RayFiltration::make(a.rank(), std::move(steps)));
  }
  return KlyachkoBundle::build(a.fan(), a.rank(), std::move(filts));
}

// ---------------------------------------------------------------------------
// Cohomology of bundles.  Per character the component over the intersection
// cone tau is the intersection of E^rho(-<m, u_rho>) over the rays of tau
// (order of vanishing pairing; rank-one data then matches the line bundle
// engine exactly).

namespace detail {

inline Subspace bundle_component(const KlyachkoBundle& v, uint32_t ray_mask, const Vec& m) {
  Subspace s = full_space(v.rank());
  for (size_t r = 0; r < v.fan()->num_rays(); ++r) {
    if (!(ray_mask & (1u << r))) continue;
    s = subspace_intersection(s, v.filtration(r).eval(-dot(m, v.fan()->ray(r))));
    if (s.dim() == 0) break;
  }
  return s;
}

// Differential matrices of the per-character complex, with components the
// given subspaces; returns the cohomology dims.
inline std::vector<long long> subspace_complex_dims(const CechEngine& eng,
                                                    const std::vector<std::vector<Subspace>>& comp) {
  const auto& levels = eng.levels();
  size_t np = levels.size();
  std::vector<long long> counts(np, 0);
  std::vector<std::vector<long long>> offset(np);
  for (size_t p = 0; p < np; ++p) {
    offset[p].resize(comp[p].size());
    for (size_t j = 0; j < comp[p].size(); ++j) {
      offset[p][j] = counts[p];
      counts[p] += comp[p][j].dim();
    }
  }
  std::vector<long long> ranks(np, 0);
  for (size_t p = 1; p < np; ++p) {
    if (counts[p] == 0 || counts[p - 1] == 0) continue;
    Mat d(counts[p], counts[p - 1]);
    for (size_t j = 0; j < comp[p].size(); ++j) {
      const Subspace& tgt = comp[p][j];
      if (tgt.dim() == 0) continue;
      for (auto& [i, sign] : levels[p].faces[j]) {
        const Subspace& src = comp[p - 1][i];
        if (src.dim() == 0) continue;
        // coordinates of the inclusion src <= tgt at tgt's pivot rows
        for (size_t c = 0; c < src.dim(); ++c)
          for (size_t rr = 0; rr < tgt.dim(); ++rr)
            d.at(offset[p][j] + rr, offset[p - 1][i] + c) +=
                Rat(sign) * src.basis.at(tgt.pivot_rows[rr], c);
      }
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

inline CharBox bundle_support_box(const KlyachkoBundle& v) {
  const Fan& fan = *v.fan();
  size_t n = static_cast<size_t>(fan.rank());
  CharBox box{Vec(n, 0), Vec(n, 0)};
  if (n == 0) return box;
  bool first = true;
  for (const auto& cone : fan.max_cones()) {
    size_t k = cone.ray_indices.size();
    if (k != n)
      throw Error(ErrorCode::NonFullDimensionalCone, "support box needs full-dimensional cones");
    // every combination of jump thresholds of the cone's rays
    std::vector<std::vector<Int>> lists;
    for (int r : cone.ray_indices) {
      const auto& t = v.filtration(r).thresholds;
      lists.push_back(std::vector<Int>(t.begin(), t.end()));
    }
    std::vector<size_t> pick(k, 0);
    while (true) {
      Mat a(n, n);
      std::vector<Rat> rhs(n);
      for (size_t row = 0; row < n; ++row) {
        for (size_t col = 0; col < n; ++col)
          a.at(row, col) = Rat(fan.ray(cone.ray_indices[row])[col]);
        // component uses E(-<m,u>), so the wall is <m,u> = -threshold
        rhs[row] = Rat(-lists[row][pick[row]]);
      }
      auto sol = a.solve(rhs);
      if (sol) {
        if (first) {
          for (size_t i = 0; i < n; ++i) {
            box.lo[i] = rat_floor((*sol)[i]);
            box.hi[i] = rat_ceil((*sol)[i]);
          }
          first = false;
        } else {
          for (size_t i = 0; i < n; ++i) {
            box.lo[i] = std::min(box.lo[i], rat_floor((*sol)[i]));
            box.hi[i] = std::max(box.hi[i], rat_ceil((*sol)[i]));
          }
        }
      }
      size_t i = k;
      bool done = true;
      while (i-- > 0) {
        if (pick[i] + 1 < lists[i].size()) {
          ++pick[i];
          for (size_t j = i + 1; j < k; ++j) pick[j] = 0;
          done = false;
          break;
        }
      }
      if (done) break;
    }
  }
  return box;
}

}  // namespace detail

inline CohomologyTable bundle_cohomology_with_padding(const KlyachkoBundle& v, Int padding,
                                                      bool keep_characters = true) {
  require_smooth_complete(*v.fan());
  CechEngine& eng = cech_engine(v.fan());
  const auto& levels = eng.levels();
  CharBox box = detail::bundle_support_box(v);
  box.dilate(1 + padding);

  // pattern cache local to this invocation: the complex depends only on the
  // per-ray filtration evaluation indices
  std::map<Vec, std::vector<long long>> cache;
  CohomologyTable t;
  t.h.assign(levels.size(), 0);
  box.for_each([&](const Vec& m) {
    Vec key(v.fan()->num_rays());
    for (size_t r = 0; r < v.fan()->num_rays(); ++r)
      key[r] = v.filtration(r).eval_index(-dot(m, v.fan()->ray(r)));
    auto it = cache.find(key);
    if (it == cache.end()) {
      std::vector<std::vector<Subspace>> comp(levels.size());
      for (size_t p = 0; p < levels.size(); ++p)
        for (size_t j = 0; j < levels[p].subsets.size(); ++j)
          comp[p].push_back(detail::bundle_component(v, levels[p].ray_masks[j], m));
      it = cache.emplace(key, detail::subspace_complex_dims(eng, comp)).first;
    }
    const auto& d = it->second;
    bool nonzero = false;
    for (size_t i = 0; i < d.size(); ++i) {
      t.h[i] += d[i];
      if (d[i]) nonzero = true;
    }
    if (nonzero && keep_characters) t.by_character[m] = d;
  });
  return t;
}

inline CohomologyTable bundle_cohomology(const KlyachkoBundle& v, bool keep_characters = true) {
  return bundle_cohomology_with_padding(v, 0, keep_characters);
}

// Graded global sections: the characters m with nonzero intersection over
// all maximal cones, each with its subspace of the fiber.
struct GradedSections {
  std::vector<std::pair<Vec, Subspace>> graded;  // lex order on characters

  long long total_dim() const {
    long long d = 0;
    for (auto& [m, s] : graded) d += s.dim();
    return d;
  }
};

inline GradedSections bundle_global_sections(const KlyachkoBundle& v) {
  require_smooth_complete(*v.fan());
  CharBox box = detail::bundle_support_box(v);
  box.dilate(1);
  GradedSections out;
  uint32_t all = (1u << v.fan()->num_rays()) - 1;
  box.for_each([&](const Vec& m) {
    Subspace s = detail::bundle_component(v, all, m);
    if (s.dim() > 0) out.graded.push_back({m, s});
  });
  return out;
}

// Vanishing scan overload for bundle twists.
inline VanishingScan twisted_vanishing_scan(const KlyachkoBundle& E, const DivisorClass& L, int i,
                                            Int a_from, Int a_to) {
  VanishingScan s;
  s.degree = i;
  for (Int a = a_from; a <= a_to; ++a) {
    KlyachkoBundle tw = twist(E, (-a) * L.representative);
    CohomologyTable t = bundle_cohomology(tw, false);
    long long val = t.dim(static_cast<size_t>(i));
    s.dims.push_back({a, val});
    if (val != 0) {
      s.all_zero = false;
      if (!s.first_nonzero) s.first_nonzero = a;
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Cohomology over thickened divisors: the mapping cone of the inclusion
// Cech(V(-kD)) -> Cech(V).  Components of the sub complex are genuinely
// subspaces of the ambient ones (twisting by an effective divisor deepens
// every filtration), so the cone assembles from inclusion coordinates.

namespace detail {

inline std::vector<long long> bundle_cone_dims(const CechEngine& eng,
                                               const std::vector<std::vector<Subspace>>& sub,
                                               const std::vector<std::vector<Subspace>>& amb) {
  const auto& levels = eng.levels();
  size_t np = levels.size();
  size_t nk = np + 1;  // cone degrees -1..np-1 at offset +1
  std::vector<long long> counts(nk, 0);
  std::vector<std::vector<long long>> a_off(nk), b_off(nk);
  for (size_t k = 0; k < nk; ++k) {
    long long n = 0;
    if (k < np) {
      a_off[k].resize(sub[k].size());
      for (size_t j = 0; j < sub[k].size(); ++j) {
        a_off[k][j] = n;
        n += sub[k][j].dim();
      }
    }
    if (k >= 1) {
      b_off[k].resize(amb[k - 1].size());
      for (size_t j = 0; j < amb[k - 1].size(); ++j) {
        b_off[k][j] = n;
        n += amb[k - 1][j].dim();
      }
    }
    counts[k] = n;
  }
  auto add_block = [&](Mat& d, long long row0, long long col0, const Subspace& src,
                       const Subspace& tgt, int sign) {
    for (size_t c = 0; c < src.dim(); ++c)
      for (size_t rr = 0; rr < tgt.dim(); ++rr)
        d.at(row0 + rr, col0 + c) += Rat(sign) * src.basis.at(tgt.pivot_rows[rr], c);
  };
  std::vector<long long> ranks(nk, 0);
  for (size_t k = 1; k < nk; ++k) {
    if (counts[k] == 0 || counts[k - 1] == 0) continue;
    Mat d(counts[k], counts[k - 1]);
    if (k < np)
      for (size_t j = 0; j < sub[k].size(); ++j) {
        if (sub[k][j].dim() == 0) continue;
        for (auto& [i, sign] : levels[k].faces[j])
          if (sub[k - 1][i].dim() > 0)
            add_block(d, a_off[k][j], a_off[k - 1][i], sub[k - 1][i], sub[k][j], -sign);
      }
    if (k >= 2)
      for (size_t j = 0; j < amb[k - 1].size(); ++j) {
        if (amb[k - 1][j].dim() == 0) continue;
        for (auto& [i, sign] : levels[k - 1].faces[j])
          if (amb[k - 2][i].dim() > 0)
            add_block(d, b_off[k][j], b_off[k - 1][i], amb[k - 2][i], amb[k - 1][j], sign);
      }
    {
      // A -> B at matching subsets: source A-level k-1, target B-level k-1
      size_t l = k - 1;
      if (l < np)
        for (size_t j = 0; j < levels[l].subsets.size(); ++j)
          if (sub[l][j].dim() > 0 && amb[l][j].dim() > 0)
            add_block(d, b_off[k][j], a_off[k - 1][j], sub[l][j], amb[l][j], -1);
    }
    ranks[k] = static_cast<long long>(d.rank());
  }
  std::vector<long long> h(np, 0);
  for (size_t k = 0; k < np; ++k) {
    size_t off = k + 1;
    long long out_rank = (off + 1 < nk) ? ranks[off + 1] : 0;
    h[k] = counts[off] - out_rank - ranks[off];
  }
  return h;
}

}  // namespace detail

// H^i of V restricted to the order-th thickening of the effective divisor D
// (order 0 is D itself).
inline CohomologyTable bundle_thickening_cohomology(const KlyachkoBundle& v,
                                                    const TorusDivisor& d, Int order = 0,
                                                    bool keep_characters = true) {
  require_smooth_complete(*v.fan());
  if (!(*v.fan() == *d.fan)) throw Error(ErrorCode::FanMismatch, "divisor on another fan");
  if (!is_effective(d) || is_zero(d.coeffs))
    throw Error(ErrorCode::DNotEffective, "thickenings need an effective nonzero divisor");
  CechEngine& eng = cech_engine(v.fan());
  const auto& levels = eng.levels();
  KlyachkoBundle subb = twist(v, (-(order + 1)) * d);
  CharBox box = detail::bundle_support_box(v);
  box.merge(detail::bundle_support_box(subb));
  box.dilate(1);
  std::map<Vec, std::vector<long long>> cache;
  CohomologyTable t;
  t.h.assign(levels.size(), 0);
  box.for_each([&](const Vec& m) {
    Vec key(2 * v.fan()->num_rays());
    for (size_t r = 0; r < v.fan()->num_rays(); ++r) {
      Int pairing = -dot(m, v.fan()->ray(r));
      key[2 * r] = v.filtration(r).eval_index(pairing);
      key[2 * r + 1] = subb.filtration(r).eval_index(pairing);
    }
    auto it = cache.find(key);
    if (it == cache.end()) {
      std::vector<std::vector<Subspace>> sub(levels.size()), amb(levels.size());
      for (size_t p = 0; p < levels.size(); ++p)
        for (size_t j = 0; j < levels[p].subsets.size(); ++j) {
          sub[p].push_back(detail::bundle_component(subb, levels[p].ray_masks[j], m));
          amb[p].push_back(detail::bundle_component(v, levels[p].ray_masks[j], m));
        }
      it = cache.emplace(key, detail::bundle_cone_dims(eng, sub, amb)).first;
    }
    const auto& dd = it->second;
    bool nonzero = false;
    for (size_t i = 0; i < dd.size(); ++i) {
      t.h[i] += dd[i];
      if (dd[i]) nonzero = true;
    }
    if (nonzero && keep_characters) t.by_character[m] = dd;
  });
  return t;
}

// H^i(D, V|_D) for an effective divisor D.
inline CohomologyTable bundle_on_divisor_cohomology(const KlyachkoBundle& v,
                                                    const TorusDivisor& d,
                                                    bool keep_characters = true) {
  return bundle_thickening_cohomology(v, d, 0, keep_characters);
}

// The restriction map H^0(X, V) -> H^0(D_order, V|): per character the
// sections of V map into the kernel of the quotient complex differential.
inline SectionRestriction bundle_thickening_section_map(const KlyachkoBundle& v,
                                                        const TorusDivisor& d, Int order) {
  require_smooth_complete(*v.fan());
  if (!is_effective(d) || is_zero(d.coeffs))
    throw Error(ErrorCode::DNotEffective, "thickenings need an effective nonzero divisor");
  const Fan& fan = *v.fan();
  CechEngine& eng = cech_engine(v.fan());
  const auto& levels = eng.levels();
  KlyachkoBundle subb = twist(v, (-(order + 1)) * d);
  CharBox box = detail::bundle_support_box(v);
  box.merge(detail::bundle_support_box(subb));
  box.dilate(1);

  SectionRestriction out;
  size_t n0 = levels[0].subsets.size();
  size_t n1 = levels.size() > 1 ? levels[1].subsets.size() : 0;
  uint32_t all = (1u << fan.num_rays()) - 1;
  box.for_each([&](const Vec& m) {
    Subspace source = detail::bundle_component(v, all, m);
    std::vector<Subspace> b0(n0), a0(n0), b1(n1), a1(n1);
    for (size_t j = 0; j < n0; ++j) {
      b0[j] = detail::bundle_component(v, levels[0].ray_masks[j], m);
      a0[j] = detail::bundle_component(subb, levels[0].ray_masks[j], m);
    }
    for (size_t j = 0; j < n1; ++j) {
      b1[j] = detail::bundle_component(v, levels[1].ray_masks[j], m);
      a1[j] = detail::bundle_component(subb, levels[1].ray_masks[j], m);
    }
    // quotient coordinates per component: complement of A inside B, greedily
    // extended from B's canonical basis
    struct Quot {
      Mat solve_basis;  // [A | C]
      size_t a_dim = 0, q_dim = 0;
    };
    auto make_quot = [&](const Subspace& a, const Subspace& b) {
      Quot q;
      q.a_dim = a.dim();
      Mat acc = a.basis;
      Mat c(b.ambient(), 0);
      for (size_t col = 0; col < b.basis.cols(); ++col) {
        Mat one = b.basis.columns({col});
        if (acc.hstack(one).rank() > acc.cols()) {
          acc = acc.hstack(one);
          c = c.hstack(one);
        }
      }
      q.q_dim = c.cols();
      q.solve_basis = a.basis.hstack(c);
      return q;
    };
    auto quot_coords = [&](const Quot& q, const std::vector<Rat>& vec) {
      std::vector<Rat> coords(q.q_dim, Rat(0));
      if (q.q_dim == 0) return coords;
      auto sol = q.solve_basis.solve(vec);
      if (!sol)
        throw Error(ErrorCode::ValidationError, "vector outside its ambient component");
      for (size_t i = 0; i < q.q_dim; ++i) coords[i] = (*sol)[q.a_dim + i];
      return coords;
    };
    std::vector<Quot> q0, q1;
    long long dim0 = 0, dim1 = 0;
    std::vector<long long> off0(n0, 0), off1(n1, 0);
    for (size_t j = 0; j < n0; ++j) {
      q0.push_back(make_quot(a0[j], b0[j]));
      off0[j] = dim0;
      dim0 += q0[j].q_dim;
    }
    for (size_t j = 0; j < n1; ++j) {
      q1.push_back(make_quot(a1[j], b1[j]));
      off1[j] = dim1;
      dim1 += q1[j].q_dim;
    }
    if (dim0 == 0) {
      out.h0_source += source.dim();
      return;
    }
    // quotient differential level 0 -> 1
    long long ker0;
    Mat d01(std::max(dim1, 1ll), dim0);
    if (dim1 > 0) {
      for (size_t j = 0; j < n1; ++j) {
        if (q1[j].q_dim == 0) continue;
        for (auto& [i, sign] : levels[1].faces[j]) {
          if (q0[i].q_dim == 0) continue;
          // image of each quotient basis vector of component i
          for (size_t c = 0; c < q0[i].q_dim; ++c) {
            std::vector<Rat> vec(b0[i].ambient());
            for (size_t rr = 0; rr < vec.size(); ++rr)
              vec[rr] = q0[i].solve_basis.at(rr, q0[i].a_dim + c);
            std::vector<Rat> img = quot_coords(q1[j], vec);
            for (size_t rr = 0; rr < img.size(); ++rr)
              d01.at(off1[j] + rr, off0[i] + c) += Rat(sign) * img[rr];
          }
        }
      }
      ker0 = dim0 - static_cast<long long>(d01.rank());
    } else {
      ker0 = dim0;
    }
    out.h0_source += source.dim();
    out.h0_target += ker0;
    if (source.dim() > 0) {
      Mat img(dim0, source.dim());
      for (size_t c = 0; c < source.dim(); ++c) {
        std::vector<Rat> vec(source.ambient());
        for (size_t rr = 0; rr < vec.size(); ++rr) vec[rr] = source.basis.at(rr, c);
        for (size_t j = 0; j < n0; ++j) {
          if (q0[j].q_dim == 0) continue;
          std::vector<Rat> coords = quot_coords(q0[j], vec);
          for (size_t rr = 0; rr < coords.size(); ++rr) img.at(off0[j] + rr, c) = coords[rr];
        }
      }
      out.rank += static_cast<long long>(img.rank());
    }
  });
  out.surjective = out.rank == out.h0_target;
  return out;
}

// ---------------------------------------------------------------------------
// Restriction to invariant divisors.  The fiber of the restriction is the
// associated graded of E^ray presented in an adapted basis; the filtration
// along the image of an adjacent ray rho' collects, grade by grade, the
// graded images of E^ray(a) intersected with E^rho'(j + a * c), where
// c = <w, u_rho'> for the canonical functional w dual to the ray.

struct BundleRestriction {
  FanPtr source_fan;
  int ray = -1;
  KlyachkoBundle bundle;  // on the star fan
  StarFan star;
  Vec w;                      // dual functional of the restricted ray
  Mat gr_basis;               // fiber change of basis, columns grouped by grade
  Mat gr_basis_inv;
  std::vector<Int> col_grade;  // grade of each gr-basis column
};

inline BundleRestriction restrict_bundle_full(const KlyachkoBundle& v, int ray) {
  require_smooth_complete(*v.fan());
  const Fan& fan = *v.fan();
  size_t r = v.rank();
  BundleRestriction out;
  out.source_fan = v.fan();
  out.star = star_fan(v.fan(), {ray});
  out.w = dual_functional(fan, ray);
  out.ray = ray;

  // adapted basis of the single filtration E^ray: per grade a (= threshold),
  // a complement of E(a+1) inside E(a)
  const RayFiltration& f = v.filtration(ray);
  Mat basis(r, 0);
  std::vector<Int> grades;
  for (size_t i = 0; i < f.thresholds.size(); ++i) {
    const Subspace& cur = f.spaces[i];
    Subspace next = (i + 1 < f.spaces.size()) ? f.spaces[i + 1] : zero_space(r);
    Mat acc = next.basis;
    for (size_t c = 0; c < cur.basis.cols(); ++c) {
      Mat col = cur.basis.columns({c});
      if (acc.hstack(col).rank() > acc.cols()) {
        acc = acc.hstack(col);
        basis = basis.hstack(col);
        grades.push_back(f.thresholds[i]);
      }
    }
  }
  if (basis.cols() != r)
    throw Error(ErrorCode::RestrictionInconsistent, "graded basis construction failed");
  out.gr_basis = basis;
  out.col_grade = grades;
  // invert
  Mat aug = basis.hstack(Mat::identity(r));
  Mat red = aug.rref();
  Mat inv(r, r);
  for (size_t i = 0; i < r; ++i)
    for (size_t j = 0; j < r; ++j) inv.at(i, j) = red.at(i, j + r);
  out.gr_basis_inv = inv;

  auto proj_grade = [&](const std::vector<Rat>& vvec, Int grade) {
    std::vector<Rat> x = inv.apply(vvec);
    for (size_t i = 0; i < r; ++i)
      if (grades[i] != grade) x[i] = 0;
    return x;
  };

  if (out.star.fan->rank() == 0) {
    // restriction to a fixed point: the bundle is the graded fiber
    out.bundle = KlyachkoBundle::build(out.star.fan, r, {});
    return out;
  }

  // filtration per star ray
  std::vector<RayFiltration> filts(out.star.fan->num_rays());
  std::vector<bool> have(out.star.fan->num_rays(), false);
  for (int rp : fan.adjacent_rays(ray)) {
    auto it = out.star.ray_map.find(rp);
    if (it == out.star.ray_map.end())
      throw Error(ErrorCode::RestrictionInconsistent, "adjacent ray missing from the star fan");
    Int c = dot(out.w, fan.ray(rp));
    const RayFiltration& g = v.filtration(rp);
    std::set<Int> cand;
    for (Int b : g.thresholds)
      for (Int a : f.thresholds) cand.insert(b - a * c);
    std::vector<std::pair<Int, Subspace>> steps;
    for (Int j : cand) {
      Mat span(r, 0);
      for (size_t i = 0; i < f.thresholds.size(); ++i) {
        Int a = f.thresholds[i];
        Subspace inter = subspace_intersection(f.spaces[i], g.eval(j + a * c));
        for (size_t col = 0; col < inter.basis.cols(); ++col) {
          std::vector<Rat> vv(r);
          for (size_t row = 0; row < r; ++row) vv[row] = inter.basis.at(row, col);
          std::vector<Rat> p = proj_grade(vv, a);
          Mat pc(r, 1);
          for (size_t row = 0; row < r; ++row) pc.at(row, 0) = p[row];
          span = span.hstack(pc);
        }
      }
      steps.push_back({j, make_subspace(span)});
    }
    RayFiltration rf = RayFiltration::make(r, std::move(steps));
    if (have[it->second] && !(filts[it->second] == rf))
      throw Error(ErrorCode::RestrictionInconsistent, "inconsistent star filtration");
    filts[it->second] = rf;
    have[it->second] = true;
  }
  for (bool h : have)
    if (!h) throw Error(ErrorCode::RestrictionInconsistent, "star ray without filtration");
  try {
    out.bundle = KlyachkoBundle::build(out.star.fan, r, std::move(filts));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::IncompatibleOnCone)
      throw Error(ErrorCode::RestrictionInconsistent, e.what());
    throw;
  }
  return out;
}

inline KlyachkoBundle restrict_bundle(const KlyachkoBundle& v, int ray) {
  return restrict_bundle_full(v, ray).bundle;
}

// A graded section (m, v) of the source bundle restricts to the graded
// section downstairs at the shifted character, with the fiber vector
// projected onto the grade matching its vanishing order along the divisor.
// Returns nullopt when the section restricts to zero.
inline std::optional<std::pair<Vec, std::vector<Rat>>> restrict_section(
    const BundleRestriction& rest, const Vec& m, const std::vector<Rat>& vec) {
  size_t r = rest.gr_basis.rows();
  Int a = -dot(m, rest.source_fan->ray(rest.ray));
  std::vector<Rat> x = rest.gr_basis_inv.apply(vec);
  std::vector<Rat> proj(r, Rat(0));
  bool nonzero = false;
  for (size_t i = 0; i < r; ++i)
    if (rest.col_grade[i] == a && x[i] != 0) {
      proj[i] = x[i];
      nonzero = true;
    }
  if (!nonzero) return std::nullopt;
  // shifted character lies in ray^perp; express it in the quotient lattice
  Vec shifted = add(m, scale(a, rest.w));
  size_t n = static_cast<size_t>(rest.source_fan->rank());
  size_t q = rest.star.projection.size();
  if (q == 0) {
    if (!is_zero(shifted))
      throw Error(ErrorCode::RestrictionInconsistent, "nonzero character over a point");
    return std::make_pair(Vec{}, proj);
  }
  Mat pt(n, q);
  for (size_t i = 0; i < q; ++i)
    for (size_t j = 0; j < n; ++j) pt.at(j, i) = Rat(rest.star.projection[i][j]);
  std::vector<Rat> rhs(n);
  for (size_t j = 0; j < n; ++j) rhs[j] = Rat(shifted[j]);
  auto sol = pt.solve(rhs);
  if (!sol)
    throw Error(ErrorCode::RestrictionInconsistent, "character does not descend to the quotient");
  Vec mbar(q);
  for (size_t i = 0; i < q; ++i) {
    if (!is_integer((*sol)[i]))
      throw Error(ErrorCode::RestrictionInconsistent, "non-integral quotient character");
    mbar[i] = to_int64(numerator((*sol)[i]));
  }
  return std::make_pair(mbar, proj);
}

}  // namespace toric
