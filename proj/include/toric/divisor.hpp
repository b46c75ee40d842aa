// Torus-invariant divisors, divisor classes modulo characters, Cartier data,
// global sections, positivity flags, base loci and Iitaka dimension.
#pragma once

#include "toric/fan.hpp"

#include <optional>

namespace toric {

struct TorusDivisor {
  FanPtr fan;
  Vec coeffs;  // one integer per ray, canonical ray order

  TorusDivisor() = default;
  TorusDivisor(FanPtr f, Vec c) : fan(std::move(f)), coeffs(std::move(c)) {
    if (coeffs.size() != fan->num_rays())
      throw Error(ErrorCode::ValidationError, "divisor coefficient count != number of rays");
  }
};

inline bool is_effective(const TorusDivisor& d) {
  for (Int c : d.coeffs)
    if (c < 0) return false;
  return true;
}

inline TorusDivisor operator+(const TorusDivisor& a, const TorusDivisor& b) {
  if (!(*a.fan == *b.fan)) throw Error(ErrorCode::FanMismatch, "divisors on different fans");
  return TorusDivisor(a.fan, add(a.coeffs, b.coeffs));
}

inline TorusDivisor operator-(const TorusDivisor& a, const TorusDivisor& b) {
  if (!(*a.fan == *b.fan)) throw Error(ErrorCode::FanMismatch, "divisors on different fans");
  return TorusDivisor(a.fan, sub(a.coeffs, b.coeffs));
}

inline TorusDivisor operator*(Int k, const TorusDivisor& d) {
  return TorusDivisor(d.fan, scale(k, d.coeffs));
}

struct DivisorClass {
  FanPtr fan;
  TorusDivisor representative;

  DivisorClass() = default;
  explicit DivisorClass(TorusDivisor d) : fan(d.fan), representative(std::move(d)) {}
};

struct CartierData {
  std::vector<Vec> m;  // character m_sigma per maximal cone, same order as fan
};

struct BaseLocusReport {
  std::vector<std::vector<int>> generating_cones;  // minimal faces covering the locus
  int codimension = 0;                             // rank+1 encodes "empty"
  bool empty = false;
  bool whole_variety = false;
  bool stabilized = true;  // only meaningful for the stable base locus
};

// ---------------------------------------------------------------------------
// Class group: coker( M -> Z^{rays} ), coordinates via the Smith left
// transform.  Free for smooth complete fans, which the operations require.

struct ClassGroup {
  int rank = 0;
  IntMat relation_matrix;  // #rays x lattice-rank, row rho = u_rho
  IntMat left;             // Smith left transform of the relation matrix
  size_t lattice_rank = 0;

  Vec class_coords(const Vec& coeffs) const {
    size_t n = coeffs.size();
    Vec w(n, 0);
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < n; ++j) w[i] += left[i][j] * coeffs[j];
    return Vec(w.begin() + lattice_rank, w.end());
  }
};

inline ClassGroup divisor_class_group(const Fan& fan) {
  require_smooth_complete(fan);
  ClassGroup g;
  size_t nr = fan.num_rays(), n = static_cast<size_t>(fan.rank());
  g.lattice_rank = n;
  g.relation_matrix.assign(nr, Vec(n, 0));
  for (size_t r = 0; r < nr; ++r) g.relation_matrix[r] = fan.ray(r);
  SmithLeft s = smith_left(g.relation_matrix);
  if (s.diag.size() != n)
    throw Error(ErrorCode::ValidationError, "degenerate character relation matrix");
  for (Int d : s.diag)
    if (d != 1)
      throw Error(ErrorCode::ValidationError, "class group has torsion; fan is not smooth");
  g.left = s.left;
  g.rank = static_cast<int>(nr - n);
  return g;
}

inline Vec class_coords(const DivisorClass& c) {
  if (c.fan->num_rays() == 0) return {};
  return divisor_class_group(*c.fan).class_coords(c.representative.coeffs);
}

inline bool class_eq(const DivisorClass& a, const DivisorClass& b) {
  if (!(*a.fan == *b.fan)) throw Error(ErrorCode::FanMismatch, "classes on different fans");
  return class_coords(a) == class_coords(b);
}

inline bool class_is_trivial(const DivisorClass& c) {
  Vec k = class_coords(c);
  return is_zero(k);
}

inline DivisorClass class_add(const DivisorClass& a, const DivisorClass& b) {
  return DivisorClass(a.representative + b.representative);
}

inline DivisorClass class_negate(const DivisorClass& a) {
  return DivisorClass(TorusDivisor(a.fan, negate(a.representative.coeffs)));
}

inline DivisorClass class_scale(Int k, const DivisorClass& a) {
  return DivisorClass(k * a.representative);
}

// ---------------------------------------------------------------------------
// Cartier data and sections.

// Rational chamber vertices; defined on any complete simplicial fan.  On
// smooth fans these are the integral m_sigma of the Cartier data.
inline std::vector<std::vector<Rat>> chamber_vertices(const TorusDivisor& d) {
  const Fan& fan = *d.fan;
  size_t n = static_cast<size_t>(fan.rank());
  std::vector<std::vector<Rat>> out;
  for (const auto& c : fan.max_cones()) {
    if (c.ray_indices.size() != n)
      throw Error(ErrorCode::NonFullDimensionalCone,
                  "chamber vertices need full-dimensional maximal cones");
    Mat a(n, n);
    std::vector<Rat> rhs(n);
    for (size_t r = 0; r < n; ++r) {
      for (size_t j = 0; j < n; ++j) a.at(r, j) = Rat(fan.ray(c.ray_indices[r])[j]);
      rhs[r] = Rat(-d.coeffs[c.ray_indices[r]]);
    }
    auto sol = a.solve(rhs);
    if (!sol) throw Error(ErrorCode::ValidationError, "singular cone matrix");
    out.push_back(*sol);
  }
  return out;
}

inline CartierData cartier_data(const TorusDivisor& d) {
  const Fan& fan = *d.fan;
  if (!fan.is_smooth())
    throw Error(ErrorCode::RequiresSmooth, "Cartier data is computed on smooth fans");
  CartierData cd;
  for (auto& v : chamber_vertices(d)) {
    Vec m(v.size());
    for (size_t i = 0; i < v.size(); ++i) {
      if (!is_integer(v[i]))
        throw Error(ErrorCode::ValidationError, "non-integral Cartier character on smooth fan");
      m[i] = to_int64(numerator(v[i]));
    }
    cd.m.push_back(m);
  }
  return cd;
}

struct CharBox {
  Vec lo, hi;

  bool empty() const {
    for (size_t i = 0; i < lo.size(); ++i)
      if (lo[i] > hi[i]) return true;
    return false;
  }

  long long volume() const {
    long long v = 1;
    for (size_t i = 0; i < lo.size(); ++i) v *= (hi[i] - lo[i] + 1);
    return v;
  }

  void dilate(Int pad) {
    for (size_t i = 0; i < lo.size(); ++i) {
      lo[i] -= pad;
      hi[i] += pad;
    }
  }

  void merge(const CharBox& o) {
    for (size_t i = 0; i < lo.size(); ++i) {
      lo[i] = std::min(lo[i], o.lo[i]);
      hi[i] = std::max(hi[i], o.hi[i]);
    }
  }

  // Iterates characters in lexicographic order.
  template <class F>
  void for_each(F&& f) const {
    if (lo.empty()) {
      f(Vec{});
      return;
    }
    if (empty()) return;
    Vec m = lo;
    while (true) {
      f(m);
      size_t i = m.size();
      while (i-- > 0) {
        if (m[i] < hi[i]) {
          ++m[i];
          for (size_t j = i + 1; j < m.size(); ++j) m[j] = lo[j];
          break;
        }
        if (i == 0) return;
      }
    }
  }
};

// Bounding box of the chamber vertices (contains the sections polytope and,
// dilated, every character with nonzero cohomology).
inline CharBox support_box(const TorusDivisor& d) {
  size_t n = static_cast<size_t>(d.fan->rank());
  CharBox box{Vec(n, 0), Vec(n, 0)};
  if (n == 0) return box;
  bool first = true;
  for (auto& v : chamber_vertices(d)) {
    for (size_t i = 0; i < n; ++i) {
      Int f = rat_floor(v[i]), c = rat_ceil(v[i]);
      if (first) {
        box.lo[i] = f;
        box.hi[i] = c;
      } else {
        box.lo[i] = std::min(box.lo[i], f);
        box.hi[i] = std::max(box.hi[i], c);
      }
    }
    first = false;
  }
  return box;
}

inline void require_complete(const Fan& fan) {
  if (!fan.is_complete())
    throw Error(ErrorCode::RequiresComplete, "operation needs a complete fan");
}

inline std::vector<Vec> global_sections(const TorusDivisor& d) {
  require_complete(*d.fan);
  const Fan& fan = *d.fan;
  std::vector<Vec> sections;
  CharBox box = support_box(d);
  box.for_each([&](const Vec& m) {
    for (size_t r = 0; r < fan.num_rays(); ++r)
      if (dot(m, fan.ray(r)) < -d.coeffs[r]) return;
    sections.push_back(m);
  });
  return sections;  // lexicographic by construction
}

struct PositivityFlags {
  bool nef = false;
  bool ample = false;
  bool semi_ample = false;
};

inline PositivityFlags positivity_flags(const TorusDivisor& d) {
  require_smooth_complete(*d.fan);
  const Fan& fan = *d.fan;
  CartierData cd = cartier_data(d);
  PositivityFlags f;
  f.nef = true;
  f.ample = true;
  for (size_t c = 0; c < fan.max_cones().size(); ++c) {
    const auto& cone = fan.max_cones()[c];
    for (size_t r = 0; r < fan.num_rays(); ++r) {
      Int v = dot(cd.m[c], fan.ray(r));
      if (v < -d.coeffs[r]) {
        f.nef = false;
        f.ample = false;
      } else if (v == -d.coeffs[r]) {
        if (!std::binary_search(cone.ray_indices.begin(), cone.ray_indices.end(),
                                static_cast<int>(r)))
          f.ample = false;
      }
    }
  }
  // nef Cartier divisors on smooth complete toric varieties are globally
  // generated, so semi-ampleness coincides with nefness here
  f.semi_ample = f.nef;
  return f;
}

// ---------------------------------------------------------------------------
// Base loci.

namespace detail {

// Faces tau with V(tau) contained in Bs(D), as sorted ray-index sets.
inline std::set<std::vector<int>> base_locus_faces(const TorusDivisor& d) {
  const Fan& fan = *d.fan;
  std::vector<Vec> sections = global_sections(d);
  std::set<std::vector<int>> in_bs;
  for (const auto& face : fan.all_faces()) {
    bool covered = false;
    for (const auto& m : sections) {
      bool on_face = true;
      for (int r : face)
        if (dot(m, fan.ray(r)) != -d.coeffs[r]) { on_face = false; break; }
      if (on_face) { covered = true; break; }
    }
    if (!covered) in_bs.insert(face);
  }
  return in_bs;
}

inline BaseLocusReport report_from_faces(const Fan& fan, const std::set<std::vector<int>>& faces) {
  BaseLocusReport rep;
  if (faces.empty()) {
    rep.empty = true;
    rep.codimension = fan.rank() + 1;
    return rep;
  }
  if (faces.count(std::vector<int>{})) rep.whole_variety = true;
  // minimal faces under inclusion
  for (const auto& f : faces) {
    bool minimal = true;
    for (const auto& g : faces) {
      if (g.size() >= f.size() || g == f) continue;
      if (std::includes(f.begin(), f.end(), g.begin(), g.end())) { minimal = false; break; }
    }
    if (minimal) rep.generating_cones.push_back(f);
  }
  std::sort(rep.generating_cones.begin(), rep.generating_cones.end(),
            [](const auto& a, const auto& b) {
              if (a.size() != b.size()) return a.size() < b.size();
              return a < b;
            });
  rep.codimension = static_cast<int>(rep.generating_cones.front().size());
  return rep;
}

}  // namespace detail

inline BaseLocusReport base_locus(const TorusDivisor& d) {
  require_complete(*d.fan);
  return detail::report_from_faces(*d.fan, detail::base_locus_faces(d));
}

inline BaseLocusReport stable_base_locus(const TorusDivisor& d, Int k_max = 12) {
  require_complete(*d.fan);
  if (k_max < 1) throw Error(ErrorCode::ValidationError, "k_max must be >= 1");
  std::set<std::vector<int>> inter;
  bool first = true;
  std::map<Int, std::set<std::vector<int>>> single;
  for (Int k = 1; k <= k_max; ++k) {
    auto faces = detail::base_locus_faces(k * d);
    single[k] = faces;
    if (first) {
      inter = faces;
      first = false;
    } else {
      std::set<std::vector<int>> next;
      for (const auto& f : inter)
        if (faces.count(f)) next.insert(f);
      inter = next;
    }
  }
  BaseLocusReport rep = detail::report_from_faces(*d.fan, inter);
  // stabilization detection along the lcm chain 1, 2, 6, 12, ...
  std::vector<Int> chain;
  Int l = 1;
  for (Int j = 1; l <= k_max; ++j) {
    chain.push_back(l);
    l = std::lcm(l, j + 1);
  }
  rep.stabilized = chain.size() >= 2 &&
                   single[chain[chain.size() - 1]] == single[chain[chain.size() - 2]];
  return rep;
}

// nullopt encodes "no sections in any multiple" (Iitaka dimension -infinity).
inline std::optional<int> iitaka_dimension(const TorusDivisor& d, Int k_max = 12) {
  require_complete(*d.fan);
  std::optional<int> best;
  for (Int k = 1; k <= k_max; ++k) {
    std::vector<Vec> secs = global_sections(k * d);
    if (secs.empty()) continue;
    Mat diffs(d.fan->rank(), secs.size() - 1);
    for (size_t j = 1; j < secs.size(); ++j)
      for (size_t i = 0; i < secs[0].size(); ++i)
        diffs.at(i, j - 1) = Rat(secs[j][i] - secs[0][i]);
    int dim = static_cast<int>(diffs.rank());
    if (!best || dim > *best) best = dim;
  }
  return best;
}

inline TorusDivisor boundary_divisor(const FanPtr& fan) {
  return TorusDivisor(fan, Vec(fan->num_rays(), 1));
}

// ---------------------------------------------------------------------------
// Restriction of classes to invariant divisors.

// Restricts a class to D_ray, presented on star_fan(ray).  The character
// data m_sigma is shifted into the quotient character lattice with the
// canonical functional w (dual_functional), then read back as coefficients.
inline DivisorClass restrict_divisor_class(const DivisorClass& cls, int ray,
                                           const StarFan* precomputed = nullptr) {
  const Fan& fan = *cls.fan;
  require_smooth_complete(fan);
  StarFan st = precomputed ? *precomputed : star_fan(cls.fan, {ray});
  if (st.fan->rank() == 0) {
    return DivisorClass(TorusDivisor(st.fan, Vec{}));
  }
  const TorusDivisor& d = cls.representative;
  CartierData cd = cartier_data(d);
  Vec w = dual_functional(fan, ray);
  Vec coeffs(st.fan->num_rays(), 0);
  std::vector<bool> have(st.fan->num_rays(), false);
  for (size_t c = 0; c < fan.max_cones().size(); ++c) {
    const auto& cone = fan.max_cones()[c].ray_indices;
    if (!std::binary_search(cone.begin(), cone.end(), ray)) continue;
    Vec mbar = add(cd.m[c], scale(d.coeffs[ray], w));  // lands in ray^perp
    for (int rp : cone) {
      if (rp == ray) continue;
      auto it = st.ray_map.find(rp);
      if (it == st.ray_map.end())
        throw Error(ErrorCode::ValidationError, "star ray map is missing an adjacent ray");
      Int a = -dot(mbar, fan.ray(rp));
      if (have[it->second] && coeffs[it->second] != a)
        throw Error(ErrorCode::ValidationError, "inconsistent restricted Cartier data");
      coeffs[it->second] = a;
      have[it->second] = true;
    }
  }
  return DivisorClass(TorusDivisor(st.fan, coeffs));
}

// Pullback along a fan morphism: the support function of the class composed
// with the lattice map, read off at the source rays.
inline DivisorClass pullback_class(const FanMorphism& f, const DivisorClass& cls) {
  if (!(*cls.fan == *f.target))
    throw Error(ErrorCode::FanMismatch, "class does not live on the morphism target");
  require_smooth_complete(*f.target);
  const Fan& src = *f.source;
  const Fan& tgt = *f.target;
  CartierData cd = cartier_data(cls.representative);
  size_t nt = static_cast<size_t>(tgt.rank());
  Vec coeffs(src.num_rays(), 0);
  for (size_t r = 0; r < src.num_rays(); ++r) {
    Vec img(nt, 0);
    for (size_t i = 0; i < nt; ++i)
      for (size_t j = 0; j < src.ray(r).size(); ++j) img[i] += f.matrix[i][j] * src.ray(r)[j];
    bool found = false;
    for (size_t c = 0; c < tgt.max_cones().size() && !found; ++c) {
      const auto& cone = tgt.max_cones()[c];
      Mat gens(nt, cone.ray_indices.size());
      for (size_t j = 0; j < cone.ray_indices.size(); ++j)
        for (size_t i = 0; i < nt; ++i) gens.at(i, j) = Rat(tgt.ray(cone.ray_indices[j])[i]);
      std::vector<Rat> rhs(nt);
      for (size_t i = 0; i < nt; ++i) rhs[i] = Rat(img[i]);
      auto sol = gens.solve(rhs);
      if (!sol) continue;
      bool nonneg = true;
      for (const auto& l : *sol)
        if (l < 0) { nonneg = false; break; }
      if (!nonneg) continue;
      coeffs[r] = -dot(cd.m[c], img);
      found = true;
    }
    if (!found)
      throw Error(ErrorCode::ConeImageNotContained, "source ray image escapes the target fan");
  }
  return DivisorClass(TorusDivisor(f.source, coeffs));
}

}  // namespace toric
