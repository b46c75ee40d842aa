// q-ampleness certificates, empirical vanishing verifiers, Picard
// restriction checks and bounded s-split scans.  Certificates only ever
// cite hypotheses that were either computed here or explicitly asserted by
// the user with recorded provenance; scans can refute or corroborate but
// never certify on their own.
#pragma once

#include "toric/cohomology.hpp"

namespace toric {

struct HypothesisRecord {
  std::string name;
  std::string provenance;  // "derived-full-boundary" | "computed" | "user-asserted"
  std::string justification;
  Int value = 0;
  bool stabilized = true;
};

struct QAmpleCertificate {
  TorusDivisor divisor;
  Int dim_x = 0;
  Int c = 0;
  Int certified_q = 0;
  HypothesisRecord cd_bound;
  HypothesisRecord sbloc_codim;
  std::vector<std::string> derivation;
};

// cd(X \ D) is derived only when D is supported on the whole boundary (its
// complement is then the torus); anything else must be asserted explicitly.
inline QAmpleCertificate q_ample_certificate(
    const TorusDivisor& d,
    std::optional<std::pair<Int, std::string>> cd_assertion = std::nullopt, Int k_max = 12) {
  require_smooth_complete(*d.fan);
  if (!is_effective(d))
    throw Error(ErrorCode::DNotEffective, "q-ampleness certificates need an effective divisor");
  QAmpleCertificate cert;
  cert.divisor = d;
  cert.dim_x = d.fan->rank();

  bool full_boundary = true;
  for (Int c : d.coeffs)
    if (c < 1) full_boundary = false;
  if (full_boundary) {
    cert.cd_bound = {"cd_bound", "derived-full-boundary",
                     "the divisor is supported on every ray, so its complement is the torus",
                     0, true};
  } else if (cd_assertion) {
    cert.cd_bound = {"cd_bound", "user-asserted", cd_assertion->second, cd_assertion->first,
                     true};
  } else {
    throw Error(ErrorCode::CdUnavailable,
                "the divisor does not cover all rays and no cohomological-dimension bound "
                "was asserted");
  }

  BaseLocusReport sb = stable_base_locus(d, k_max);
  if (!sb.stabilized)
    throw Error(ErrorCode::SblocNotStabilized,
                "stable base locus did not stabilize within k_max = " + std::to_string(k_max));
  cert.sbloc_codim = {"sbloc_codim", "computed", "stable base locus over k = 1.." +
                          std::to_string(k_max),
                      sb.codimension, true};

  Int c_from_cd = cert.dim_x - cert.cd_bound.value;
  cert.c = std::min(c_from_cd, static_cast<Int>(cert.sbloc_codim.value));
  if (cert.c < 1)
    throw Error(ErrorCode::ValidationError,
                "no positive c: the stable base locus covers the variety or the "
                "cohomological-dimension bound is too weak");
  cert.certified_q = cert.dim_x - cert.c;
  cert.derivation.push_back("c = min(dim - cd, codim sbloc) = min(" +
                            std::to_string(c_from_cd) + ", " +
                            std::to_string(cert.sbloc_codim.value) + ") = " +
                            std::to_string(cert.c));
  for (Int k = 1; k <= cert.c; ++k)
    cert.derivation.push_back(
        "induction step " + std::to_string(k) + "/" + std::to_string(cert.c) +
        ": descending through a general section chain kills H^{>dim-" + std::to_string(k) +
        "} of twists in the colimit");
  cert.derivation.push_back("conclusion: the class is " + std::to_string(cert.certified_q) +
                            "-ample");
  return cert;
}

// ---------------------------------------------------------------------------
// Scan reports.

struct VanishingViolation {
  Vec test_class;  // coefficients of the test class (empty when unused)
  int degree = 0;
  Int twist = 0;
  long long dim = 0;
};

struct VanishingReport {
  std::string check_id;
  std::string range_description;
  std::vector<VanishingViolation> violations;
  long long checks_run = 0;

  bool consistent() const { return violations.empty(); }
};

// All classes with a representative in [-bound, bound]^rays, one canonical
// representative each (first in lexicographic order), ordered by class
// coordinates.
inline std::vector<DivisorClass> classes_in_box(const FanPtr& fan, Int bound) {
  ClassGroup g = divisor_class_group(*fan);
  std::map<Vec, Vec> reps;  // class coords -> first representative
  CharBox box{Vec(fan->num_rays(), -bound), Vec(fan->num_rays(), bound)};
  box.for_each([&](const Vec& coeffs) {
    Vec key = g.class_coords(coeffs);
    if (!reps.count(key)) reps[key] = coeffs;
  });
  std::vector<DivisorClass> out;
  for (auto& [key, coeffs] : reps) out.push_back(DivisorClass(TorusDivisor(fan, coeffs)));
  return out;
}

// Falsification scan for q-ampleness: for every test class F and every
// degree i > q, the twists h^i(F + m L) must eventually vanish; a nonzero
// value surviving at m_max is evidence against q-ampleness (never a proof).
inline VanishingReport q_ample_falsifier(const DivisorClass& L, Int q, Int m_max,
                                         const std::vector<DivisorClass>& test_classes) {
  require_smooth_complete(*L.fan);
  const Fan& fan = *L.fan;
  Int dim = fan.rank();
  VanishingReport rep;
  rep.check_id = "q-ample-falsifier";
  rep.range_description = "i in (" + std::to_string(q) + ", " + std::to_string(dim) +
                          "], m in [1, " + std::to_string(m_max) + "], " +
                          std::to_string(test_classes.size()) + " test classes";
  ClassGroup g = divisor_class_group(fan);
  std::map<Vec, std::vector<long long>> table_cache;
  auto dims_of = [&](const Vec& coeffs) -> const std::vector<long long>& {
    Vec key = g.class_coords(coeffs);
    auto it = table_cache.find(key);
    if (it == table_cache.end()) {
      CohomologyTable t = line_bundle_cohomology(TorusDivisor(L.fan, coeffs), false);
      it = table_cache.emplace(key, t.h).first;
    }
    return it->second;
  };
  for (const auto& f : test_classes) {
    // last twist with a nonzero value per degree
    std::vector<Int> last_nonzero(static_cast<size_t>(dim) + 1, 0);
    std::vector<long long> dim_at_last(static_cast<size_t>(dim) + 1, 0);
    for (Int m = 1; m <= m_max; ++m) {
      Vec coeffs = add(f.representative.coeffs, scale(m, L.representative.coeffs));
      const auto& h = dims_of(coeffs);
      ++rep.checks_run;
      for (Int i = q + 1; i <= dim; ++i) {
        long long v = (static_cast<size_t>(i) < h.size()) ? h[i] : 0;
        if (v != 0) {
          last_nonzero[i] = m;
          dim_at_last[i] = v;
        }
      }
    }
    for (Int i = q + 1; i <= dim; ++i)
      if (last_nonzero[i] == m_max)
        rep.violations.push_back(
            {f.representative.coeffs, static_cast<int>(i), m_max, dim_at_last[i]});
  }
  return rep;
}

// h^i(L^{-a}) = 0 for i <= dim - q - 1 and a = 1..a_max; needs L nef.
inline VanishingReport verify_semiample_vanishing(const DivisorClass& L, Int q, Int a_max = 8) {
  require_smooth_complete(*L.fan);
  PositivityFlags fl = positivity_flags(L.representative);
  if (!fl.nef)
    throw Error(ErrorCode::RequiresNef, "semi-ample vanishing needs a nef class");
  Int dim = L.fan->rank();
  VanishingReport rep;
  rep.check_id = "semiample-vanishing";
  rep.range_description = "i <= " + std::to_string(dim - q - 1) + ", a in [1, " +
                          std::to_string(a_max) + "]";
  for (Int a = 1; a <= a_max; ++a) {
    TorusDivisor tw(L.fan, scale(-a, L.representative.coeffs));
    CohomologyTable t = line_bundle_cohomology(tw, false);
    ++rep.checks_run;
    for (Int i = 0; i <= dim - q - 1; ++i)
      if (t.dim(static_cast<size_t>(i)) != 0)
        rep.violations.push_back({L.representative.coeffs, static_cast<int>(i), -a,
                                  t.dim(static_cast<size_t>(i))});
  }
  return rep;
}

// h^i(L^{-1}) = 0 for i < dim Z - q on a toric (hence Frobenius-split) Z.
inline VanishingReport verify_fsplit_vanishing(const DivisorClass& L, Int q) {
  require_smooth_complete(*L.fan);
  Int dim = L.fan->rank();
  VanishingReport rep;
  rep.check_id = "fsplit-vanishing";
  rep.range_description = "i < " + std::to_string(dim - q) + ", a = 1";
  TorusDivisor tw(L.fan, negate(L.representative.coeffs));
  CohomologyTable t = line_bundle_cohomology(tw, false);
  ++rep.checks_run;
  for (Int i = 0; i < dim - q; ++i)
    if (t.dim(static_cast<size_t>(i)) != 0)
      rep.violations.push_back(
          {L.representative.coeffs, static_cast<int>(i), -1, t.dim(static_cast<size_t>(i))});
  return rep;
}

// dim X <= q + kappa(L) for semi-ample L with certified q.
struct MatsResult {
  bool holds = false;
  Int dim_x = 0;
  Int q = 0;
  std::optional<int> kappa;
};

inline MatsResult mats_inequality_check(const DivisorClass& L, Int q_certified, Int k_max = 12) {
  require_smooth_complete(*L.fan);
  PositivityFlags fl = positivity_flags(L.representative);
  if (!fl.semi_ample)
    throw Error(ErrorCode::RequiresNef, "the dimension inequality needs a semi-ample class");
  MatsResult r;
  r.dim_x = L.fan->rank();
  r.q = q_certified;
  r.kappa = iitaka_dimension(L.representative, k_max);
  r.holds = r.kappa && r.dim_x <= r.q + *r.kappa;
  return r;
}

// ---------------------------------------------------------------------------
// Picard restriction to an invariant divisor.

struct PicRestriction {
  int ray = 0;
  int domain_rank = 0;
  int target_rank = 0;
  IntMat matrix;  // target_rank x domain_rank, on class coordinates
  bool injective = false;
  bool isomorphism = false;
};

inline PicRestriction pic_restriction_check(const FanPtr& fan, int ray) {
  require_smooth_complete(*fan);
  PicRestriction out;
  out.ray = ray;
  ClassGroup g = divisor_class_group(*fan);
  out.domain_rank = g.rank;
  StarFan st = star_fan(fan, {ray});
  if (st.fan->rank() == 0 || st.fan->num_rays() == 0) {
    out.target_rank = 0;
    out.injective = g.rank == 0;
    out.isomorphism = g.rank == 0;
    return out;
  }
  ClassGroup gs = divisor_class_group(*st.fan);
  out.target_rank = gs.rank;

  // basis divisors of Cl(X): columns n.. of left^{-1}
  size_t nr = fan->num_rays(), n = static_cast<size_t>(fan->rank());
  Mat u(nr, nr);
  for (size_t i = 0; i < nr; ++i)
    for (size_t j = 0; j < nr; ++j) u.at(i, j) = Rat(g.left[i][j]);
  Mat aug = u.hstack(Mat::identity(nr)).rref();
  Mat uinv(nr, nr);
  for (size_t i = 0; i < nr; ++i)
    for (size_t j = 0; j < nr; ++j) uinv.at(i, j) = aug.at(i, j + nr);

  out.matrix.assign(gs.rank, Vec(g.rank, 0));
  for (int b = 0; b < g.rank; ++b) {
    Vec basis_divisor(nr);
    for (size_t i = 0; i < nr; ++i) {
      const Rat& x = uinv.at(i, n + b);
      if (!is_integer(x))
        throw Error(ErrorCode::ValidationError, "non-integral class basis divisor");
      basis_divisor[i] = to_int64(numerator(x));
    }
    DivisorClass restricted =
        restrict_divisor_class(DivisorClass(TorusDivisor(fan, basis_divisor)), ray, &st);
    Vec coords = gs.class_coords(restricted.representative.coeffs);
    for (int i = 0; i < gs.rank; ++i) out.matrix[i][b] = coords[i];
  }

  Mat m(gs.rank, g.rank);
  for (int i = 0; i < gs.rank; ++i)
    for (int j = 0; j < g.rank; ++j) m.at(i, j) = Rat(out.matrix[i][j]);
  out.injective = m.rank() == static_cast<size_t>(g.rank);
  if (g.rank == gs.rank && g.rank > 0) {
    Rat det = m.det();
    out.isomorphism = det == 1 || det == -1;
  } else {
    out.isomorphism = g.rank == gs.rank;  // both zero
  }
  return out;
}

// ---------------------------------------------------------------------------
// Bounded s-split scan: H^j(S, l) = 0 for j = 1..s over every class with a
// representative in the box.  "verified_in_box" is explicitly not a proof.

struct SSplitScan {
  Int s = 0;
  Int box_bound = 0;
  bool verified_in_box = false;
  std::optional<Vec> counterexample;  // representative coefficients
  int counterexample_degree = 0;
  long long counterexample_dim = 0;
  long long classes_scanned = 0;
};

inline SSplitScan s_split_scan(const FanPtr& fan, Int s, Int box_bound) {
  require_smooth_complete(*fan);
  SSplitScan scan;
  scan.s = s;
  scan.box_bound = box_bound;
  if (s == 0) {
    scan.verified_in_box = true;
    return scan;
  }
  for (const auto& cls : classes_in_box(fan, box_bound)) {
    ++scan.classes_scanned;
    CohomologyTable t = line_bundle_cohomology(cls, false);
    for (Int j = 1; j <= s; ++j) {
      if (t.dim(static_cast<size_t>(j)) != 0) {
        scan.counterexample = cls.representative.coeffs;
        scan.counterexample_degree = static_cast<int>(j);
        scan.counterexample_dim = t.dim(static_cast<size_t>(j));
        scan.verified_in_box = false;
        return scan;
      }
    }
  }
  scan.verified_in_box = true;
  return scan;
}

}  // namespace toric
