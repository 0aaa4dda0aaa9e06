// Totally real number field arithmetic on a monogenic model Z[theta]:
// minimal polynomial, certified irreducibility, real embeddings as isolating
// rational intervals (Sturm), Dedekind prime splitting away from the
// polynomial discriminant, and coefficient-level reduction maps into residue
// fields. Everything is exact; no floating point.
#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "orbicover/errors.hpp"
#include "orbicover/finfield.hpp"
#include "orbicover/fp_poly.hpp"
#include "orbicover/intfactor.hpp"

namespace orbicover {

using Rat = mpq_class;
using QPoly = std::vector<Rat>;  // little-endian, normalized
using ZPoly = std::vector<Int>;

struct RatInterval {
    Rat lo, hi;
};

struct NumberField {
    ZPoly min_poly;  // monic, irreducible over Q
    int degree = 0;
    Int poly_disc;
    std::vector<RatInterval> real_roots;  // disjoint, sorted ascending
};

struct FieldElem {
    std::vector<Rat> coeffs;  // length = field degree
};

struct PrimeIdealFactor {
    std::uint64_t p = 0;
    PolyFp factor_poly;      // monic irreducible over F_p dividing min_poly mod p
    int residue_degree = 0;  // deg(factor_poly)
    int ramification = 1;    // always 1 within scope
};

// ---------------------------------------------------------------------------
// exact polynomial helpers over Q and Z
// ---------------------------------------------------------------------------

inline void qp_normalize(QPoly& f) {
    while (!f.empty() && f.back() == 0) f.pop_back();
}

inline int qp_deg(const QPoly& f) { return static_cast<int>(f.size()) - 1; }

inline QPoly qp_from_z(const ZPoly& f) {
    QPoly r(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) r[i] = Rat(f[i]);
    qp_normalize(r);
    return r;
}

inline Rat qp_eval(const QPoly& f, const Rat& x) {
    Rat r = 0;
    for (std::size_t i = f.size(); i-- > 0;) r = r * x + f[i];
    return r;
}

inline QPoly qp_deriv(const QPoly& f) {
    if (f.size() <= 1) return {};
    QPoly r(f.size() - 1);
    for (std::size_t i = 1; i < f.size(); ++i) r[i - 1] = f[i] * static_cast<long>(i);
    return r;
}

inline QPoly qp_rem(QPoly a, const QPoly& b) {
    int db = qp_deg(b);
    while (qp_deg(a) >= db) {
        Rat c = a.back() / b.back();
        int k = qp_deg(a) - db;
        for (int i = 0; i <= db; ++i) a[k + i] -= c * b[i];
        qp_normalize(a);
    }
    return a;
}

/// Fraction-free (Bareiss) determinant of an integer matrix; exact.
inline Int bareiss_det(std::vector<std::vector<Int>> m) {
    const std::size_t n = m.size();
    if (n == 0) return 1;
    int sign = 1;
    Int prev = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (m[k][k] == 0) {
            std::size_t piv = k + 1;
            while (piv < n && m[piv][k] == 0) ++piv;
            if (piv == n) return 0;
            std::swap(m[k], m[piv]);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            for (std::size_t j = k + 1; j < n; ++j) {
                Int t = m[i][j] * m[k][k] - m[i][k] * m[k][j];
                mpz_divexact(m[i][j].get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
            }
            m[i][k] = 0;
        }
        prev = m[k][k];
    }
    return sign > 0 ? m[n - 1][n - 1] : Int(-m[n - 1][n - 1]);
}

inline Int resultant(const ZPoly& f, const ZPoly& g) {
    int m = static_cast<int>(f.size()) - 1;
    int n = static_cast<int>(g.size()) - 1;
    if (m < 0 || n < 0) return 0;
    std::size_t N = static_cast<std::size_t>(m + n);
    if (N == 0) return 1;
    std::vector<std::vector<Int>> s(N, std::vector<Int>(N, Int(0)));
    for (int i = 0; i < n; ++i)
        for (int k = 0; k <= m; ++k) s[i][i + k] = f[m - k];
    for (int i = 0; i < m; ++i)
        for (int k = 0; k <= n; ++k) s[n + i][i + k] = g[n - k];
    return bareiss_det(std::move(s));
}

/// Discriminant of a monic integer polynomial.
inline Int poly_discriminant(const ZPoly& f) {
    int d = static_cast<int>(f.size()) - 1;
    if (d <= 1) return 1;
    Int res = resultant(f, [&] {
        ZPoly fd(f.size() - 1);
        for (std::size_t i = 1; i < f.size(); ++i) fd[i - 1] = f[i] * static_cast<long>(i);
        return fd;
    }());
    return (static_cast<long>(d) * (d - 1) / 2) % 2 == 0 ? res : Int(-res);
}

// ---------------------------------------------------------------------------
// Sturm sequences and real root isolation
// ---------------------------------------------------------------------------

inline std::vector<QPoly> sturm_chain(const QPoly& f) {
    std::vector<QPoly> chain{f, qp_deriv(f)};
    while (qp_deg(chain.back()) > 0) {
        QPoly r = qp_rem(chain[chain.size() - 2], chain.back());
        if (r.empty()) break;
        for (auto& c : r) c = -c;
        chain.push_back(std::move(r));
    }
    return chain;
}

inline int sign_variations_at(const std::vector<QPoly>& chain, const Rat& x) {
    int var = 0, last = 0;
    for (const auto& g : chain) {
        int s = sgn(qp_eval(g, x));
        if (s == 0) continue;
        if (last != 0 && s != last) ++var;
        last = s;
    }
    return var;
}

/// Number of distinct real roots in the half-open interval (a, b].
inline int sturm_count(const std::vector<QPoly>& chain, const Rat& a, const Rat& b) {
    return sign_variations_at(chain, a) - sign_variations_at(chain, b);
}

/// Halve an isolating interval, preserving the sign-change property. Only
/// linear polynomials can have a rational root landing on the midpoint; that
/// case shrinks symmetrically around the exact root.
inline RatInterval refine_interval(const QPoly& f, const RatInterval& iv) {
    Rat mid = (iv.lo + iv.hi) / 2;
    Rat fm = qp_eval(f, mid);
    if (fm == 0) {
        Rat w = (iv.hi - iv.lo) / 4;
        return {mid - w, mid + w};
    }
    if (sgn(qp_eval(f, iv.lo)) * sgn(fm) < 0) return {iv.lo, mid};
    return {mid, iv.hi};
}

inline std::vector<RatInterval> isolate_real_roots(const ZPoly& f_in) {
    QPoly f = qp_from_z(f_in);
    int d = qp_deg(f);
    if (d == 1) {
        Rat root = -f[0] / f[1];
        return {RatInterval{root - 1, root + 1}};
    }
    Int maxabs = 0;
    for (const auto& c : f_in) {
        Int a = abs(c);
        if (a > maxabs) maxabs = a;
    }
    Rat bound = Rat(maxabs + 1);
    auto chain = sturm_chain(f);
    std::vector<RatInterval> out;
    std::vector<std::pair<RatInterval, int>> stack;
    int total = sturm_count(chain, -bound, bound);
    if (total > 0) stack.push_back({{-bound, bound}, total});
    while (!stack.empty()) {
        auto [iv, cnt] = stack.back();
        stack.pop_back();
        if (cnt == 1) {
            out.push_back(iv);
            continue;
        }
        Rat mid = (iv.lo + iv.hi) / 2;
        int left = sturm_count(chain, iv.lo, mid);
        if (left > 0) stack.push_back({{iv.lo, mid}, left});
        if (cnt - left > 0) stack.push_back({{mid, iv.hi}, cnt - left});
    }
    std::sort(out.begin(), out.end(),
              [](const RatInterval& a, const RatInterval& b) { return a.lo < b.lo; });
    return out;
}

// ---------------------------------------------------------------------------
// irreducibility certification
// ---------------------------------------------------------------------------

namespace detail {

inline PolyFp zpoly_mod_p(const ZPoly& f, std::uint64_t p) {
    PolyFp r(f.size());
    for (std::size_t i = 0; i < f.size(); ++i)
        r[i] = mpz_fdiv_ui(f[i].get_mpz_t(), p);
    pf_normalize(r);
    return r;
}

// Exact division test over Z for a monic divisor; true iff h | f.
inline bool zpoly_monic_divides(const ZPoly& h, const ZPoly& f) {
    ZPoly r = f;
    int dh = static_cast<int>(h.size()) - 1;
    while (static_cast<int>(r.size()) - 1 >= dh) {
        Int c = r.back();
        int k = static_cast<int>(r.size()) - 1 - dh;
        for (int i = 0; i <= dh; ++i) r[k + i] -= c * h[i];
        while (!r.empty() && r.back() == 0) r.pop_back();
        if (static_cast<int>(r.size()) - 1 >= dh + k) return false;  // no progress
    }
    return r.empty();
}

inline std::vector<Int> divisors_of(const Int& n_in) {
    Int n = abs(n_in);
    std::vector<Int> divs{1};
    for (const auto& [prime, e] : factorize(n)) {
        std::size_t sz = divs.size();
        Int pk = 1;
        for (unsigned i = 1; i <= e; ++i) {
            pk *= prime;
            for (std::size_t j = 0; j < sz; ++j) divs.push_back(divs[j] * pk);
        }
    }
    std::sort(divs.begin(), divs.end());
    return divs;
}

// Exhaustive search for a monic integer factor of degree <= deg(f)/2 with
// Landau-Mignotte coefficient bounds. Returns true iff a factor exists.
// Only reached when 25 reduction tests were all inconclusive.
inline bool has_small_monic_factor(const ZPoly& f) {
    int d = static_cast<int>(f.size()) - 1;
    if (f[0] == 0) return true;  // root at 0
    for (const Int& t : divisors_of(f[0])) {
        ZPoly root_pos{-t, 1}, root_neg{t, 1};
        if (zpoly_monic_divides(root_pos, f) || zpoly_monic_divides(root_neg, f))
            return true;
    }
    Int norm2_sq = 0;
    for (const auto& c : f) norm2_sq += c * c;
    Int norm2 = sqrt(norm2_sq) + 1;
    for (int k = 2; k <= d / 2; ++k) {
        Int bound = (Int(1) << k) * norm2;
        Int count = 1;
        for (int i = 0; i < k; ++i) count *= 2 * bound + 1;
        if (count > 20000000)
            throw FactorBudgetExceeded("irreducibility fallback search too large");
        std::vector<Int> h(k, -bound);
        for (;;) {
            ZPoly cand(h.begin(), h.end());
            cand.push_back(1);
            if (zpoly_monic_divides(cand, f)) return true;
            int pos = 0;
            while (pos < k && h[pos] == bound) {
                h[pos] = -bound;
                ++pos;
            }
            if (pos == k) break;
            h[pos] += 1;
        }
    }
    return false;
}

// Irreducibility over Q for a monic squarefree integer polynomial: certify
// by irreducibility mod p at the first of 25 odd primes away from the
// discriminant, falling back to the exhaustive factor search.
inline void certify_irreducible(const ZPoly& f, const Int& disc) {
    int d = static_cast<int>(f.size()) - 1;
    if (d == 1) return;
    int tried = 0;
    for (std::uint32_t p : small_primes()) {
        if (tried == 25) break;
        if (p == 2 || mpz_divisible_ui_p(disc.get_mpz_t(), p)) continue;
        ++tried;
        auto factors = factor_poly_mod_p(p, zpoly_mod_p(f, p), 0);
        if (factors.size() == 1 && factors[0].second == 1) return;
    }
    if (has_small_monic_factor(f))
        throw ReduciblePolynomial("polynomial factors over the rationals");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// public operations
// ---------------------------------------------------------------------------

inline NumberField make_field(const ZPoly& coeffs) {
    if (coeffs.size() < 2) throw error("minimal polynomial must have degree >= 1");
    if (coeffs.back() != 1) throw NotMonic("minimal polynomial must be monic");
    NumberField k;
    k.min_poly = coeffs;
    k.degree = static_cast<int>(coeffs.size()) - 1;
    k.poly_disc = poly_discriminant(coeffs);
    if (k.poly_disc == 0)
        throw ReduciblePolynomial("polynomial is not squarefree");
    detail::certify_irreducible(coeffs, k.poly_disc);
    k.real_roots = isolate_real_roots(coeffs);
    return k;
}

inline bool is_totally_real(const NumberField& k) {
    return static_cast<int>(k.real_roots.size()) == k.degree;
}

// ----- arithmetic in k = Q[x]/(min_poly) -----

inline FieldElem elem_zero(const NumberField& k) {
    return FieldElem{std::vector<Rat>(k.degree, Rat(0))};
}

inline FieldElem elem_from_rat(const NumberField& k, const Rat& v) {
    FieldElem e = elem_zero(k);
    e.coeffs[0] = v;
    return e;
}

/// theta itself (degree-1 fields reduce it to the rational root).
inline FieldElem elem_theta(const NumberField& k) {
    if (k.degree == 1) return elem_from_rat(k, Rat(-k.min_poly[0]));
    FieldElem e = elem_zero(k);
    e.coeffs[1] = 1;
    return e;
}

inline bool elem_is_zero(const FieldElem& a) {
    for (const auto& c : a.coeffs)
        if (c != 0) return false;
    return true;
}

inline FieldElem field_add(const NumberField& k, const FieldElem& a, const FieldElem& b) {
    FieldElem r = elem_zero(k);
    for (int i = 0; i < k.degree; ++i) r.coeffs[i] = a.coeffs[i] + b.coeffs[i];
    return r;
}

inline FieldElem field_neg(const NumberField& k, const FieldElem& a) {
    FieldElem r = elem_zero(k);
    for (int i = 0; i < k.degree; ++i) r.coeffs[i] = -a.coeffs[i];
    return r;
}

inline FieldElem field_mul(const NumberField& k, const FieldElem& a, const FieldElem& b) {
    int d = k.degree;
    std::vector<Rat> prod(2 * d - 1, Rat(0));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) prod[i + j] += a.coeffs[i] * b.coeffs[j];
    for (int i = 2 * d - 2; i >= d; --i) {
        Rat c = prod[i];
        if (c == 0) continue;
        for (int j = 0; j < d; ++j) prod[i - d + j] -= c * Rat(k.min_poly[j]);
        prod[i] = 0;
    }
    FieldElem r = elem_zero(k);
    for (int i = 0; i < d; ++i) r.coeffs[i] = prod[i];
    return r;
}

/// Sign of a nonzero element at the given real embedding, certified by
/// interval arithmetic with on-demand bisection of the isolating interval.
inline int certified_sign_at(const NumberField& k, const FieldElem& a, int place) {
    if (place < 0 || place >= static_cast<int>(k.real_roots.size()))
        throw error("real place index out of range");
    if (elem_is_zero(a)) return 0;
    QPoly f = qp_from_z(k.min_poly);
    QPoly e(a.coeffs);
    qp_normalize(e);
    RatInterval iv = k.real_roots[place];
    for (int iter = 0; iter < 20000; ++iter) {
        // Horner with an interval argument
        Rat lo = e.back(), hi = e.back();
        for (std::size_t i = e.size() - 1; i-- > 0;) {
            Rat c1 = lo * iv.lo, c2 = lo * iv.hi, c3 = hi * iv.lo, c4 = hi * iv.hi;
            lo = std::min(std::min(c1, c2), std::min(c3, c4)) + e[i];
            hi = std::max(std::max(c1, c2), std::max(c3, c4)) + e[i];
        }
        if (lo > 0) return 1;
        if (hi < 0) return -1;
        iv = refine_interval(f, iv);
    }
    throw error("sign certification did not converge");
}

// ----- prime splitting and reduction -----

inline std::vector<PrimeIdealFactor> factor_prime(const NumberField& k, std::uint64_t p) {
    if (p == 2) throw DyadicPrime("p = 2 is excluded (nondyadic primes only)");
    if (p >= kMaxPrimeModulus || !is_prime(Int(static_cast<unsigned long>(p))))
        throw error("factor_prime requires an odd prime < 2^31");
    if (mpz_divisible_ui_p(k.poly_disc.get_mpz_t(), p))
        throw BadPrime("prime divides the polynomial discriminant");
    auto factors = factor_poly_mod_p(p, detail::zpoly_mod_p(k.min_poly, p), 0);
    std::vector<PrimeIdealFactor> out;
    int degsum = 0;
    for (const auto& [g, mult] : factors) {
        if (mult != 1)
            throw error("unexpected repeated factor away from the discriminant");
        out.push_back(PrimeIdealFactor{p, g, pf_deg(g), 1});
        degsum += pf_deg(g);
    }
    if (degsum != k.degree) throw error("residue degrees do not sum to the field degree");
    return out;
}

inline FqContext residue_context(const PrimeIdealFactor& pf) {
    return make_fq_context(pf.p, pf.factor_poly);
}

/// Image of an element under the reduction map theta -> class of x in
/// F_p[x]/(factor_poly). All coefficient denominators must be prime to p.
inline FqElem reduce_element(const NumberField& k, const FieldElem& a,
                             const PrimeIdealFactor& pf, const FqContext& ctx) {
    if (ctx.p != pf.p || ctx.modulus != pf.factor_poly)
        throw error("context does not match the prime ideal factor");
    PolyFp num_poly(k.degree, 0);
    for (int i = 0; i < k.degree; ++i) {
        const Rat& c = a.coeffs[i];
        std::uint64_t den = mpz_fdiv_ui(c.get_den().get_mpz_t(), pf.p);
        if (den == 0)
            throw DenominatorNotCoprime("coefficient denominator divisible by p");
        std::uint64_t num = mpz_fdiv_ui(c.get_num().get_mpz_t(), pf.p);
        num_poly[i] = fp::mul(num, fp::inv(den, pf.p), pf.p);
    }
    pf_normalize(num_poly);
    return fq_from_poly(ctx, num_poly);
}

/// Smallest admissible odd prime <= bound with two prime ideal factors of
/// equal residue degree; the two factors of smallest equal degree are
/// returned in canonical order.
inline std::tuple<std::uint64_t, PrimeIdealFactor, PrimeIdealFactor> find_split_pair(
    const NumberField& k, std::uint64_t bound) {
    if (k.degree < 2) throw FieldIsRationals("split pairs require degree >= 2");
    if (bound < 3) throw error("find_split_pair requires bound >= 3");
    for (std::uint32_t p : small_primes()) {
        if (p > bound) break;
        if (p == 2 || mpz_divisible_ui_p(k.poly_disc.get_mpz_t(), p)) continue;
        auto factors = factor_prime(k, p);
        std::map<int, std::vector<const PrimeIdealFactor*>> by_deg;
        for (const auto& f : factors) by_deg[f.residue_degree].push_back(&f);
        for (const auto& [deg, list] : by_deg) {
            if (list.size() >= 2)
                return {p, *list[0], *list[1]};
        }
    }
    throw NoSplitPrimeInBound("no split prime within the bound");
}

}  // namespace orbicover
