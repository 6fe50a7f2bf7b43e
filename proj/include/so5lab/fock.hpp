#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "so5lab/operator.hpp"
#include "so5lab/report.hpp"

namespace so5lab {

using Bits = std::uint64_t;

/// Modes are ordered site-major, flavor-minor: (site 0, flavors 1..4), (site 1, ...), ...
/// Flavors are 1-based, sites 0-based.
constexpr int mode_index(int flavor, int site) { return NUM_FLAVORS * site + (flavor - 1); }

constexpr bool occupied(Bits s, int mode) { return ((s >> mode) & 1U) != 0; }

/// (-1)^(number of occupied modes below `mode`).
constexpr int string_sign(Bits s, int mode) {
  const Bits below = mode == 0 ? Bits{0} : (s & ((Bits{1} << mode) - 1));
  return (std::popcount(below) & 1) != 0 ? -1 : 1;
}

struct BitAction {
  int sign;
  Bits state;
};

constexpr std::optional<BitAction> annihilate(Bits s, int mode) {
  if (!occupied(s, mode)) return std::nullopt;
  return BitAction{string_sign(s, mode), s ^ (Bits{1} << mode)};
}

constexpr std::optional<BitAction> create(Bits s, int mode) {
  if (occupied(s, mode)) return std::nullopt;
  return BitAction{string_sign(s, mode), s | (Bits{1} << mode)};
}

inline Occupation occupation_of(Bits s, int L) {
  Occupation o;
  for (int x = 0; x < L; ++x)
    for (int f = 1; f <= NUM_FLAVORS; ++f)
      if (occupied(s, mode_index(f, x))) ++o.n[static_cast<std::size_t>(f - 1)];
  return o;
}

inline int site_count(Bits s, int site) {
  return std::popcount((s >> (NUM_FLAVORS * site)) & Bits{0xF});
}

/// Number of flavor-`flavor` particles on sites strictly left of `site`.
inline int count_left(Bits s, int flavor, int site) {
  int c = 0;
  for (int y = 0; y < site; ++y) c += occupied(s, mode_index(flavor, y)) ? 1 : 0;
  return c;
}

inline long long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// Dimension cap for full Fock spaces, read from SO5LAB_MAX_DIM (default 4096, i.e. L = 3).
inline std::size_t default_dimension_cap() {
  if (const char* env = std::getenv("SO5LAB_MAX_DIM")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  return 4096;
}

/// The full occupation basis of four flavors on L sites; basis index == bitstring.
class FockSpace {
 public:
  [[nodiscard]] int L() const { return L_; }
  [[nodiscard]] int num_modes() const { return NUM_FLAVORS * L_; }
  [[nodiscard]] std::size_t size() const { return std::size_t{1} << num_modes(); }
  [[nodiscard]] Eigen::Index dimension() const { return static_cast<Eigen::Index>(size()); }
  [[nodiscard]] Bits state(std::size_t i) const { return static_cast<Bits>(i); }
  [[nodiscard]] std::optional<std::size_t> index_of(Bits s) const {
    return s < size() ? std::optional<std::size_t>(static_cast<std::size_t>(s)) : std::nullopt;
  }
  [[nodiscard]] std::optional<Occupation> tag() const { return std::nullopt; }

  [[nodiscard]] const std::map<Occupation, std::vector<std::size_t>>& sectors() const { return sectors_; }
  /// Basis indices of the sector; empty when the occupation does not fit on L sites.
  [[nodiscard]] const std::vector<std::size_t>& sector(const Occupation& o) const {
    static const std::vector<std::size_t> empty;
    auto it = sectors_.find(o);
    return it == sectors_.end() ? empty : it->second;
  }

 private:
  friend FockSpace build_space(int L, std::size_t max_dimension);
  int L_ = 0;
  std::map<Occupation, std::vector<std::size_t>> sectors_;
};

inline FockSpace build_space(int L, std::size_t max_dimension = default_dimension_cap()) {
  if (L < 1) throw InvalidConfig("lattice length must be at least 1, got " + std::to_string(L));
  if (NUM_FLAVORS * L >= 63 || (std::size_t{1} << (NUM_FLAVORS * L)) > max_dimension) {
    throw ResourceError("full Fock space for L=" + std::to_string(L) + " exceeds the dimension cap of " +
                        std::to_string(max_dimension) +
                        "; use a sector-resolved basis (SectorBasis) or raise SO5LAB_MAX_DIM");
  }
  FockSpace fs;
  fs.L_ = L;
  for (std::size_t s = 0; s < fs.size(); ++s) fs.sectors_[occupation_of(static_cast<Bits>(s), L)].push_back(s);
  return fs;
}

/// Basis of one fixed-occupation sector, enumerated directly (no full-space pass),
/// so it reaches lattice sizes where 16^L is out of reach. Sorted by bitstring.
class SectorBasis {
 public:
  SectorBasis(int L, Occupation occ) : L_(L), occ_(occ) {
    if (L < 1 || NUM_FLAVORS * L > 64) throw InvalidConfig("sector basis needs 1 <= L <= 16");
    for (int f = 0; f < NUM_FLAVORS; ++f) {
      if (occ.n[static_cast<std::size_t>(f)] < 0 || occ.n[static_cast<std::size_t>(f)] > L)
        throw InvalidConfig("occupation " + occ.to_string() + " does not fit on L=" + std::to_string(L) + " sites");
    }
    std::vector<Bits> partial{0};
    for (int f = 1; f <= NUM_FLAVORS; ++f) {
      std::vector<Bits> next;
      for (Bits placement : placements(f, occ.n[static_cast<std::size_t>(f - 1)]))
        for (Bits p : partial) next.push_back(p | placement);
      partial = std::move(next);
    }
    std::sort(partial.begin(), partial.end());
    states_ = std::move(partial);
  }

  [[nodiscard]] int L() const { return L_; }
  [[nodiscard]] const Occupation& occupation() const { return occ_; }
  [[nodiscard]] std::size_t size() const { return states_.size(); }
  [[nodiscard]] Eigen::Index dimension() const { return static_cast<Eigen::Index>(size()); }
  [[nodiscard]] Bits state(std::size_t i) const { return states_[i]; }
  [[nodiscard]] const std::vector<Bits>& states() const { return states_; }
  [[nodiscard]] std::optional<std::size_t> index_of(Bits s) const {
    auto it = std::lower_bound(states_.begin(), states_.end(), s);
    if (it == states_.end() || *it != s) return std::nullopt;
    return static_cast<std::size_t>(it - states_.begin());
  }
  [[nodiscard]] std::optional<Occupation> tag() const { return occ_; }

 private:
  std::vector<Bits> placements(int flavor, int count) const {
    std::vector<Bits> out;
    std::vector<int> pick(static_cast<std::size_t>(count));
    auto rec = [&](auto&& self, int start, int depth, Bits acc) -> void {
      if (depth == count) {
        out.push_back(acc);
        return;
      }
      for (int x = start; x < L_; ++x) self(self, x + 1, depth + 1, acc | (Bits{1} << mode_index(flavor, x)));
    };
    rec(rec, 0, 0, Bits{0});
    return out;
  }

  int L_;
  Occupation occ_;
  std::vector<Bits> states_;
};

/// Anything that enumerates bitstring states: the full space or one sector.
template <class B>
concept FockBasis = requires(const B& b, std::size_t i, Bits s) {
  { b.L() } -> std::convertible_to<int>;
  { b.size() } -> std::convertible_to<std::size_t>;
  { b.state(i) } -> std::convertible_to<Bits>;
  { b.index_of(s) } -> std::same_as<std::optional<std::size_t>>;
  { b.tag() } -> std::same_as<std::optional<Occupation>>;
};

enum class ModeKind { create, annihilate, number };

/// Sign-string policy for mode operators. `none` drops the Jordan-Wigner string and
/// exists only to build negative controls.
enum class SignString { jordan_wigner, none };

inline void check_mode(int L, int flavor, int site) {
  if (flavor < 1 || flavor > NUM_FLAVORS) throw std::out_of_range("flavor must be in 1..4, got " + std::to_string(flavor));
  if (site < 0 || site >= L) throw std::out_of_range("site must be in 0..L-1, got " + std::to_string(site));
}

inline OperatorMatrix mode_operator(const FockSpace& space, int flavor, int site, ModeKind kind,
                                    SignString policy = SignString::jordan_wigner) {
  check_mode(space.L(), flavor, site);
  const int m = mode_index(flavor, site);
  const Eigen::Index dim = space.dimension();
  std::vector<Eigen::Triplet<cplx>> trips;
  trips.reserve(space.size() / 2);
  for (std::size_t i = 0; i < space.size(); ++i) {
    const Bits s = space.state(i);
    if (kind == ModeKind::number) {
      if (occupied(s, m)) trips.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i), 1.0);
      continue;
    }
    auto act = kind == ModeKind::create ? create(s, m) : annihilate(s, m);
    if (!act) continue;
    const double sign = policy == SignString::jordan_wigner ? act->sign : 1.0;
    trips.emplace_back(static_cast<Eigen::Index>(act->state), static_cast<Eigen::Index>(i), sign);
  }
  SparseMat mat(dim, dim);
  mat.setFromTriplets(trips.begin(), trips.end());
  return OperatorMatrix(std::move(mat));
}

/// Max-norm residual of the lattice anticommutation relations over all mode pairs:
/// {ψ_p, ψ_q} = 0, {ψ_p†, ψ_q†} = 0, {ψ_p, ψ_q†} = δ_pq.
inline ViolationReport check_car(const FockSpace& space, SignString policy = SignString::jordan_wigner) {
  const int modes = space.num_modes();
  std::vector<OperatorMatrix> a;
  std::vector<OperatorMatrix> ad;
  for (int m = 0; m < modes; ++m) {
    const int flavor = m % NUM_FLAVORS + 1;
    const int site = m / NUM_FLAVORS;
    a.push_back(mode_operator(space, flavor, site, ModeKind::annihilate, policy));
    ad.push_back(a.back().adjoint());
  }
  const OperatorMatrix id = OperatorMatrix::identity(space.dimension());
  double aa = 0.0;
  double dd = 0.0;
  double ad_mixed = 0.0;
  for (int p = 0; p < modes; ++p) {
    for (int q = 0; q < modes; ++q) {
      aa = std::max(aa, anticommutator(a[p], a[q]).max_norm());
      dd = std::max(dd, anticommutator(ad[p], ad[q]).max_norm());
      OperatorMatrix mixed = anticommutator(a[p], ad[q]);
      if (p == q) mixed -= id;
      ad_mixed = std::max(ad_mixed, mixed.max_norm());
    }
  }
  ViolationReport r{"anticommutation"};
  r.record("{psi,psi}", aa);
  r.record("{psi+,psi+}", dd);
  r.record("{psi,psi+}-delta", ad_mixed);
  return r;
}

/// Diagonal operator built from a per-basis-state function.
template <FockBasis B, class F>
OperatorMatrix diagonal_operator(const B& basis, F&& value_of_state) {
  Eigen::VectorXcd d(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t i = 0; i < basis.size(); ++i) d[static_cast<Eigen::Index>(i)] = value_of_state(basis.state(i));
  return OperatorMatrix::diagonal(d, basis.tag());
}

}  // namespace so5lab
