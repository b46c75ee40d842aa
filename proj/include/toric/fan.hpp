// Lattices, rays, cones, fans and fan morphisms.  Fans are immutable after
// construction and canonically ordered (rays lexicographic, cones
// lexicographic on their sorted index sets), so every downstream report is
// deterministic and structural equality is string equality.
#pragma once

#include "toric/errors.hpp"
#include "toric/linalg.hpp"
#include "toric/rational.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace toric {

struct Lattice {
  int rank = 0;  // rank 0 only for the point fan produced by star_fan
};

struct Ray {
  Vec generator;
};

struct Cone {
  std::vector<int> ray_indices;  // sorted

  bool operator==(const Cone& o) const { return ray_indices == o.ray_indices; }
  bool operator<(const Cone& o) const { return ray_indices < o.ray_indices; }
};

class Fan;
using FanPtr = std::shared_ptr<const Fan>;

class Fan {
 public:
  // Validated construction; see build_fan below for the checked entry point.
  static FanPtr build(const std::vector<Vec>& ray_gens, const std::vector<std::vector<int>>& cones);

  static FanPtr point() {
    auto f = std::shared_ptr<Fan>(new Fan());
    f->lattice_.rank = 0;
    f->max_cones_.push_back(Cone{{}});
    f->finalize();
    return f;
  }

  int rank() const { return lattice_.rank; }
  const Lattice& lattice() const { return lattice_; }
  size_t num_rays() const { return rays_.size(); }
  const std::vector<Ray>& rays() const { return rays_; }
  const Vec& ray(size_t i) const { return rays_[i].generator; }
  const std::vector<Cone>& max_cones() const { return max_cones_; }

  uint32_t cone_mask(size_t c) const { return cone_masks_[c]; }

  bool is_smooth() const;
  bool is_complete() const;

  // All faces of all maximal cones as sorted ray-index sets, ordered by
  // (size, lex).  Includes the origin cone (empty set).
  std::vector<std::vector<int>> all_faces() const;

  bool has_cone(const std::vector<int>& ray_set) const;

  // Rays spanning a two-dimensional cone with ray r.
  std::vector<int> adjacent_rays(int r) const;

  const std::string& canonical_string() const { return canonical_; }
  uint64_t fingerprint() const { return fingerprint_; }

  bool operator==(const Fan& o) const { return canonical_ == o.canonical_; }

 private:
  Fan() = default;
  void finalize();

  Lattice lattice_;
  std::vector<Ray> rays_;
  std::vector<Cone> max_cones_;
  std::vector<uint32_t> cone_masks_;
  std::string canonical_;
  uint64_t fingerprint_ = 0;
};

inline void Fan::finalize() {
  cone_masks_.clear();
  for (const auto& c : max_cones_) {
    uint32_t m = 0;
    for (int i : c.ray_indices) m |= (1u << i);
    cone_masks_.push_back(m);
  }
  canonical_ = "rank " + std::to_string(lattice_.rank) + "\n";
  for (const auto& r : rays_) canonical_ += "ray " + vec_to_string(r.generator) + "\n";
  for (const auto& c : max_cones_) {
    canonical_ += "cone";
    for (int i : c.ray_indices) canonical_ += " " + std::to_string(i);
    canonical_ += "\n";
  }
  uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (unsigned char ch : canonical_) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  fingerprint_ = h;
}

inline FanPtr Fan::build(const std::vector<Vec>& ray_gens,
                         const std::vector<std::vector<int>>& cones) {
  if (ray_gens.empty())
    throw Error(ErrorCode::ValidationError, "a fan needs at least one ray");
  size_t n = ray_gens[0].size();
  if (n < 1) throw Error(ErrorCode::ValidationError, "ray vectors must have length >= 1");
  if (ray_gens.size() > 31)
    throw Error(ErrorCode::ValidationError, "at most 31 rays supported");
  for (const auto& g : ray_gens) {
    if (g.size() != n)
      throw Error(ErrorCode::ValidationError, "ray vectors of unequal length");
    if (is_zero(g)) throw Error(ErrorCode::NonPrimitiveRay, "zero ray " + vec_to_string(g));
    if (gcd_of(g) != 1)
      throw Error(ErrorCode::NonPrimitiveRay, "ray " + vec_to_string(g) + " is not primitive");
  }

  // canonical ray order, with the index remap for cones
  std::vector<size_t> order(ray_gens.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return ray_gens[a] < ray_gens[b]; });
  std::vector<int> remap(ray_gens.size());
  std::vector<Vec> sorted_rays(order.size());
  for (size_t pos = 0; pos < order.size(); ++pos) {
    sorted_rays[pos] = ray_gens[order[pos]];
    remap[order[pos]] = static_cast<int>(pos);
  }
  for (size_t i = 1; i < sorted_rays.size(); ++i)
    if (sorted_rays[i] == sorted_rays[i - 1])
      throw Error(ErrorCode::DuplicateRay, "duplicate ray " + vec_to_string(sorted_rays[i]));

  std::set<Cone> cone_set;
  for (const auto& c : cones) {
    Cone cc;
    for (int i : c) {
      if (i < 0 || static_cast<size_t>(i) >= ray_gens.size())
        throw Error(ErrorCode::ValidationError, "cone ray index out of range");
      cc.ray_indices.push_back(remap[i]);
    }
    std::sort(cc.ray_indices.begin(), cc.ray_indices.end());
    cc.ray_indices.erase(std::unique(cc.ray_indices.begin(), cc.ray_indices.end()),
                         cc.ray_indices.end());
    if (cc.ray_indices.empty())
      throw Error(ErrorCode::ValidationError, "empty maximal cone");
    cone_set.insert(cc);
  }
  if (cone_set.empty()) throw Error(ErrorCode::ValidationError, "a fan needs at least one cone");

  auto f = std::shared_ptr<Fan>(new Fan());
  f->lattice_.rank = static_cast<int>(n);
  for (auto& g : sorted_rays) f->rays_.push_back(Ray{g});
  for (auto& c : cone_set) f->max_cones_.push_back(c);

  // every ray used
  std::vector<bool> used(f->rays_.size(), false);
  for (const auto& c : f->max_cones_)
    for (int i : c.ray_indices) used[i] = true;
  for (size_t i = 0; i < used.size(); ++i)
    if (!used[i])
      throw Error(ErrorCode::ValidationError,
                  "ray " + vec_to_string(f->rays_[i].generator) + " lies in no maximal cone");

  // simplicial: generators of each cone linearly independent
  for (const auto& c : f->max_cones_) {
    if (c.ray_indices.size() > n)
      throw Error(ErrorCode::NotSimplicial, "cone with more rays than the lattice rank");
    Mat m(n, c.ray_indices.size());
    for (size_t j = 0; j < c.ray_indices.size(); ++j)
      for (size_t i = 0; i < n; ++i)
        m.at(i, j) = Rat(f->rays_[c.ray_indices[j]].generator[i]);
    if (m.rank() != c.ray_indices.size())
      throw Error(ErrorCode::NotSimplicial, "cone generators are linearly dependent");
  }

  // face condition on every pair of maximal cones, via a separating
  // functional w: w = 0 on common rays, <= -1 on the rest of sigma,
  // >= 1 on the rest of tau.
  for (size_t a = 0; a < f->max_cones_.size(); ++a)
    for (size_t b = a + 1; b < f->max_cones_.size(); ++b) {
      const auto& sa = f->max_cones_[a].ray_indices;
      const auto& sb = f->max_cones_[b].ray_indices;
      std::vector<int> common;
      std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(),
                            std::back_inserter(common));
      std::vector<LinIneq> sys;
      auto row = [&](const Vec& u, Rat rhs_shift, int sign) {
        LinIneq q;
        q.c.resize(n);
        for (size_t i = 0; i < n; ++i) q.c[i] = Rat(sign * u[i]);
        q.b = rhs_shift;
        sys.push_back(q);
      };
      for (int i : common) {
        row(f->rays_[i].generator, Rat(0), 1);
        row(f->rays_[i].generator, Rat(0), -1);
      }
      for (int i : sa)
        if (!std::binary_search(common.begin(), common.end(), i))
          row(f->rays_[i].generator, Rat(-1), -1);  // <w,u> <= -1
      for (int i : sb)
        if (!std::binary_search(common.begin(), common.end(), i))
          row(f->rays_[i].generator, Rat(-1), 1);  // <w,u> >= 1
      if (!fm_feasible(sys, n))
        throw Error(ErrorCode::FaceConditionViolated,
                    "maximal cones " + std::to_string(a) + " and " + std::to_string(b) +
                        " do not intersect in a common face");
    }

  f->finalize();
  return f;
}

inline bool Fan::is_smooth() const {
  size_t n = static_cast<size_t>(lattice_.rank);
  for (const auto& c : max_cones_) {
    if (c.ray_indices.empty()) continue;
    IntMat m(n, Vec(c.ray_indices.size(), 0));
    for (size_t j = 0; j < c.ray_indices.size(); ++j)
      for (size_t i = 0; i < n; ++i) m[i][j] = rays_[c.ray_indices[j]].generator[i];
    SmithLeft s = smith_left(m);
    if (s.diag.size() != c.ray_indices.size()) return false;
    for (Int d : s.diag)
      if (d != 1) return false;
  }
  return true;
}

inline bool Fan::is_complete() const {
  if (lattice_.rank == 0) return true;
  size_t n = static_cast<size_t>(lattice_.rank);
  for (const auto& c : max_cones_)
    if (c.ray_indices.size() != n) return false;
  // every facet shared by exactly two maximal cones
  std::map<std::vector<int>, std::vector<size_t>> facets;
  for (size_t ci = 0; ci < max_cones_.size(); ++ci) {
    const auto& r = max_cones_[ci].ray_indices;
    for (size_t drop = 0; drop < r.size(); ++drop) {
      std::vector<int> facet;
      for (size_t j = 0; j < r.size(); ++j)
        if (j != drop) facet.push_back(r[j]);
      facets[facet].push_back(ci);
    }
  }
  for (const auto& [facet, owners] : facets)
    if (owners.size() != 2) return false;
  // connected through facets
  std::vector<size_t> parent(max_cones_.size());
  for (size_t i = 0; i < parent.size(); ++i) parent[i] = i;
  std::function<size_t(size_t)> find = [&](size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& [facet, owners] : facets) parent[find(owners[0])] = find(owners[1]);
  for (size_t i = 1; i < parent.size(); ++i)
    if (find(i) != find(0)) return false;
  return true;
}

inline std::vector<std::vector<int>> Fan::all_faces() const {
  std::set<std::vector<int>> faces;
  for (const auto& c : max_cones_) {
    const auto& r = c.ray_indices;
    size_t k = r.size();
    for (uint32_t s = 0; s < (1u << k); ++s) {
      std::vector<int> face;
      for (size_t j = 0; j < k; ++j)
        if (s & (1u << j)) face.push_back(r[j]);
      faces.insert(face);
    }
  }
  std::vector<std::vector<int>> out(faces.begin(), faces.end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });
  return out;
}

inline bool Fan::has_cone(const std::vector<int>& ray_set) const {
  std::vector<int> s = ray_set;
  std::sort(s.begin(), s.end());
  for (const auto& c : max_cones_)
    if (std::includes(c.ray_indices.begin(), c.ray_indices.end(), s.begin(), s.end()))
      return true;
  return false;
}

inline std::vector<int> Fan::adjacent_rays(int r) const {
  std::set<int> adj;
  for (const auto& c : max_cones_) {
    if (!std::binary_search(c.ray_indices.begin(), c.ray_indices.end(), r)) continue;
    for (int i : c.ray_indices)
      if (i != r) adj.insert(i);
  }
  // keep only rays spanning an actual 2-cone with r; in a simplicial fan
  // membership in a common cone is exactly that
  return std::vector<int>(adj.begin(), adj.end());
}

// Checked public constructor, mirroring the workbench surface.
inline FanPtr build_fan(const std::vector<Vec>& rays, const std::vector<std::vector<int>>& cones) {
  return Fan::build(rays, cones);
}

inline bool is_smooth(const Fan& f) { return f.is_smooth(); }
inline bool is_complete(const Fan& f) { return f.is_complete(); }

inline void require_smooth_complete(const Fan& f) {
  if (!f.is_smooth() || !f.is_complete())
    throw Error(ErrorCode::RequiresSmoothComplete, "operation needs a smooth complete fan");
}

// ---------------------------------------------------------------------------
// Star fans (orbit closures).

struct StarFan {
  FanPtr fan;                // fan of V(sigma) in the quotient lattice
  IntMat projection;         // (rank - k) x rank quotient map
  std::map<int, int> ray_map;  // source ray index -> star ray index
};

inline StarFan star_fan(const FanPtr& fan, const std::vector<int>& cone_rays) {
  if (!fan->is_smooth())
    throw Error(ErrorCode::RequiresSmooth, "star fans are computed on smooth fans");
  std::vector<int> cr = cone_rays;
  std::sort(cr.begin(), cr.end());
  if (!fan->has_cone(cr))
    throw Error(ErrorCode::ConeNotInFan, "the given ray set is not a cone of the fan");
  size_t n = static_cast<size_t>(fan->rank());
  size_t k = cr.size();

  IntMat b(n, Vec(k, 0));
  for (size_t j = 0; j < k; ++j)
    for (size_t i = 0; i < n; ++i) b[i][j] = fan->ray(cr[j])[i];
  SmithLeft s = smith_left(b);
  for (Int d : s.diag)
    if (d != 1)
      throw Error(ErrorCode::RequiresSmooth, "cone rays do not extend to a lattice basis");

  StarFan out;
  out.projection.assign(s.left.begin() + k, s.left.end());

  if (k == n) {
    out.fan = Fan::point();
    return out;
  }

  auto project = [&](const Vec& v) {
    Vec r(n - k, 0);
    for (size_t i = 0; i < n - k; ++i)
      for (size_t j = 0; j < n; ++j) r[i] += out.projection[i][j] * v[j];
    return r;
  };

  std::vector<Vec> star_rays;
  std::map<Vec, int> star_index;
  std::vector<std::vector<int>> star_cones;
  std::map<int, Vec> src_to_gen;
  for (const auto& c : fan->max_cones()) {
    if (!std::includes(c.ray_indices.begin(), c.ray_indices.end(), cr.begin(), cr.end()))
      continue;
    std::vector<int> sc;
    for (int i : c.ray_indices) {
      if (std::binary_search(cr.begin(), cr.end(), i)) continue;
      Vec g = project(fan->ray(i));
      Int gg = gcd_of(g);
      if (gg == 0)
        throw Error(ErrorCode::ValidationError, "ray collapses in the quotient lattice");
      if (gg != 1)
        throw Error(ErrorCode::ValidationError, "non-primitive image ray in star fan");
      auto it = star_index.find(g);
      int idx;
      if (it == star_index.end()) {
        idx = static_cast<int>(star_rays.size());
        star_index[g] = idx;
        star_rays.push_back(g);
      } else {
        idx = it->second;
      }
      src_to_gen[i] = g;
      sc.push_back(idx);
    }
    star_cones.push_back(sc);
  }
  out.fan = Fan::build(star_rays, star_cones);
  for (auto& [src, gen] : src_to_gen) {
    for (size_t i = 0; i < out.fan->num_rays(); ++i)
      if (out.fan->ray(i) == gen) out.ray_map[src] = static_cast<int>(i);
  }
  return out;
}

// Functional w with <w, u_ray> = 1, chosen deterministically.  Shared by the
// divisor-class and bundle restriction code so that both produce identical
// coefficient representatives.
inline Vec dual_functional(const Fan& fan, int ray) {
  IntMat u = unimodular_to_e1(fan.ray(ray));
  return u[0];
}

// ---------------------------------------------------------------------------
// Fan morphisms.

struct FanMorphism {
  FanPtr source;
  FanPtr target;
  IntMat matrix;  // target-rank x source-rank, acts on column vectors
  int relative_dimension = 0;
  bool lattice_surjective = false;
};

inline FanMorphism build_fan_morphism(const FanPtr& source, const FanPtr& target,
                                      const IntMat& matrix) {
  size_t ns = static_cast<size_t>(source->rank());
  size_t nt = static_cast<size_t>(target->rank());
  if (matrix.size() != nt || (nt > 0 && matrix[0].size() != ns))
    throw Error(ErrorCode::ValidationError, "morphism matrix has wrong shape");

  auto apply = [&](const Vec& v) {
    Vec r(nt, 0);
    for (size_t i = 0; i < nt; ++i)
      for (size_t j = 0; j < ns; ++j) r[i] += matrix[i][j] * v[j];
    return r;
  };

  // each source cone must land inside some target cone
  for (const auto& c : source->max_cones()) {
    std::vector<Vec> images;
    for (int i : c.ray_indices) images.push_back(apply(source->ray(i)));
    bool contained = false;
    for (const auto& tc : target->max_cones()) {
      Mat gens(nt, tc.ray_indices.size());
      for (size_t j = 0; j < tc.ray_indices.size(); ++j)
        for (size_t i = 0; i < nt; ++i) gens.at(i, j) = Rat(target->ray(tc.ray_indices[j])[i]);
      bool all_in = true;
      for (const auto& img : images) {
        std::vector<Rat> rhs(nt);
        for (size_t i = 0; i < nt; ++i) rhs[i] = Rat(img[i]);
        auto sol = gens.solve(rhs);
        if (!sol) { all_in = false; break; }
        for (const auto& l : *sol)
          if (l < 0) { all_in = false; break; }
        if (!all_in) break;
      }
      if (all_in) { contained = true; break; }
    }
    if (nt == 0) contained = true;  // point target
    if (!contained)
      throw Error(ErrorCode::ConeImageNotContained,
                  "a source cone does not map into any target cone");
  }

  FanMorphism m;
  m.source = source;
  m.target = target;
  m.matrix = matrix;
  m.relative_dimension = source->rank() - target->rank();
  if (nt == 0) {
    m.lattice_surjective = true;
  } else {
    SmithLeft s = smith_left(matrix);
    m.lattice_surjective = s.diag.size() == nt;
    for (Int d : s.diag)
      if (d != 1) m.lattice_surjective = false;
  }
  return m;
}

}  // namespace toric
