// Dense univariate polynomial arithmetic over a prime field F_p, p odd.
// Coefficients are residues in [0, p) stored little-endian (coeffs[i] is the
// x^i coefficient); the zero polynomial is the empty vector. Requires
// p < 2^31 so products of residues fit in 64 bits.
#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "orbicover/errors.hpp"
#include "orbicover/intfactor.hpp"

namespace orbicover {

using PolyFp = std::vector<std::uint64_t>;

inline constexpr std::uint64_t kMaxPrimeModulus = (1ull << 31);

namespace fp {

inline std::uint64_t add(std::uint64_t a, std::uint64_t b, std::uint64_t p) {
    std::uint64_t s = a + b;
    return s >= p ? s - p : s;
}
inline std::uint64_t sub(std::uint64_t a, std::uint64_t b, std::uint64_t p) {
    return a >= b ? a - b : a + p - b;
}
inline std::uint64_t mul(std::uint64_t a, std::uint64_t b, std::uint64_t p) {
    return a * b % p;
}
inline std::uint64_t pow(std::uint64_t a, std::uint64_t e, std::uint64_t p) {
    std::uint64_t r = 1 % p;
    a %= p;
    while (e) {
        if (e & 1) r = mul(r, a, p);
        a = mul(a, a, p);
        e >>= 1;
    }
    return r;
}
inline std::uint64_t inv(std::uint64_t a, std::uint64_t p) {
    if (a % p == 0) throw DivisionByZero("inverse of zero residue");
    return pow(a % p, p - 2, p);
}
inline std::uint64_t from_signed(long long v, std::uint64_t p) {
    long long m = v % static_cast<long long>(p);
    if (m < 0) m += static_cast<long long>(p);
    return static_cast<std::uint64_t>(m);
}

}  // namespace fp

inline void pf_normalize(PolyFp& f) {
    while (!f.empty() && f.back() == 0) f.pop_back();
}

inline int pf_deg(const PolyFp& f) { return static_cast<int>(f.size()) - 1; }

inline bool pf_is_zero(const PolyFp& f) { return f.empty(); }

inline bool pf_is_one(const PolyFp& f) { return f.size() == 1 && f[0] == 1; }

inline PolyFp pf_one() { return {1}; }

inline PolyFp pf_x() { return {0, 1}; }

inline PolyFp pf_add(const PolyFp& a, const PolyFp& b, std::uint64_t p) {
    PolyFp r(std::max(a.size(), b.size()), 0);
    for (std::size_t i = 0; i < r.size(); ++i) {
        std::uint64_t av = i < a.size() ? a[i] : 0;
        std::uint64_t bv = i < b.size() ? b[i] : 0;
        r[i] = fp::add(av, bv, p);
    }
    pf_normalize(r);
    return r;
}

inline PolyFp pf_sub(const PolyFp& a, const PolyFp& b, std::uint64_t p) {
    PolyFp r(std::max(a.size(), b.size()), 0);
    for (std::size_t i = 0; i < r.size(); ++i) {
        std::uint64_t av = i < a.size() ? a[i] : 0;
        std::uint64_t bv = i < b.size() ? b[i] : 0;
        r[i] = fp::sub(av, bv, p);
    }
    pf_normalize(r);
    return r;
}

inline PolyFp pf_scale(const PolyFp& a, std::uint64_t c, std::uint64_t p) {
    c %= p;
    if (c == 0) return {};
    PolyFp r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = fp::mul(a[i], c, p);
    pf_normalize(r);
    return r;
}

inline PolyFp pf_mul(const PolyFp& a, const PolyFp& b, std::uint64_t p) {
    if (a.empty() || b.empty()) return {};
    PolyFp r(a.size() + b.size() - 1, 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0) continue;
        for (std::size_t j = 0; j < b.size(); ++j)
            r[i + j] = (r[i + j] + a[i] * b[j]) % p;
    }
    pf_normalize(r);
    return r;
}

/// Quotient and remainder of a by b (b nonzero).
inline std::pair<PolyFp, PolyFp> pf_divmod(const PolyFp& a, const PolyFp& b,
                                           std::uint64_t p) {
    if (b.empty()) throw DivisionByZero("polynomial division by zero");
    PolyFp r = a, q;
    int db = pf_deg(b);
    std::uint64_t lbi = fp::inv(b.back(), p);
    while (pf_deg(r) >= db) {
        int k = pf_deg(r) - db;
        std::uint64_t c = fp::mul(r.back(), lbi, p);
        if (static_cast<int>(q.size()) < k + 1) q.resize(k + 1, 0);
        q[k] = c;
        for (int i = 0; i <= db; ++i)
            r[k + i] = fp::sub(r[k + i], fp::mul(c, b[i], p), p);
        pf_normalize(r);
    }
    pf_normalize(q);
    return {q, r};
}

inline PolyFp pf_rem(const PolyFp& a, const PolyFp& b, std::uint64_t p) {
    return pf_divmod(a, b, p).second;
}

inline PolyFp pf_make_monic(const PolyFp& a, std::uint64_t p) {
    if (a.empty()) return a;
    return pf_scale(a, fp::inv(a.back(), p), p);
}

inline PolyFp pf_gcd(PolyFp a, PolyFp b, std::uint64_t p) {
    while (!b.empty()) {
        PolyFp r = pf_rem(a, b, p);
        a = std::move(b);
        b = std::move(r);
    }
    return pf_make_monic(a, p);
}

inline PolyFp pf_deriv(const PolyFp& a, std::uint64_t p) {
    if (a.size() <= 1) return {};
    PolyFp r(a.size() - 1);
    for (std::size_t i = 1; i < a.size(); ++i)
        r[i - 1] = fp::mul(a[i], i % p, p);
    pf_normalize(r);
    return r;
}

inline PolyFp pf_mulmod(const PolyFp& a, const PolyFp& b, const PolyFp& m,
                        std::uint64_t p) {
    return pf_rem(pf_mul(a, b, p), m, p);
}

inline PolyFp pf_powmod(PolyFp base, const Int& e, const PolyFp& m,
                        std::uint64_t p) {
    PolyFp r = pf_rem(pf_one(), m, p);
    base = pf_rem(base, m, p);
    std::size_t bits = mpz_sizeinbase(e.get_mpz_t(), 2);
    if (e == 0) return r;
    for (std::size_t i = bits; i-- > 0;) {
        r = pf_mulmod(r, r, m, p);
        if (mpz_tstbit(e.get_mpz_t(), i)) r = pf_mulmod(r, base, m, p);
    }
    return r;
}

inline std::uint64_t pf_eval(const PolyFp& f, std::uint64_t x, std::uint64_t p) {
    std::uint64_t r = 0;
    for (std::size_t i = f.size(); i-- > 0;) r = (r * x + f[i]) % p;
    return r;
}

/// Canonical order on polynomials: by degree, then by coefficient vector
/// from the constant term up.
inline bool pf_less(const PolyFp& a, const PolyFp& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

namespace detail {

// Squarefree decomposition in characteristic p (Yun's algorithm adapted to
// the p-th power branch; in F_p[x] a polynomial with zero derivative is a
// literal p-th power with the same coefficients at indices divisible by p).
inline void pf_squarefree_rec(const PolyFp& f, unsigned outer_mult,
                              std::uint64_t p,
                              std::vector<std::pair<PolyFp, unsigned>>& out) {
    if (pf_deg(f) <= 0) return;
    PolyFp fd = pf_deriv(f, p);
    if (pf_is_zero(fd)) {
        PolyFp root;
        for (std::size_t i = 0; i < f.size(); i += p) root.push_back(f[i]);
        pf_squarefree_rec(root, outer_mult * static_cast<unsigned>(p), p, out);
        return;
    }
    PolyFp c = pf_gcd(f, fd, p);
    PolyFp w = pf_divmod(f, c, p).first;
    unsigned i = 1;
    while (!pf_is_one(w)) {
        PolyFp y = pf_gcd(w, c, p);
        PolyFp z = pf_divmod(w, y, p).first;
        if (!pf_is_one(z)) out.emplace_back(pf_make_monic(z, p), i * outer_mult);
        w = std::move(y);
        c = pf_divmod(c, w, p).first;
        ++i;
    }
    if (pf_deg(c) > 0) pf_squarefree_rec(c, outer_mult, p, out);
}

// Distinct-degree factorization of a monic squarefree polynomial; returns
// (product of irreducible factors of degree d, d) pairs.
inline std::vector<std::pair<PolyFp, int>> pf_ddf(PolyFp f, std::uint64_t p) {
    std::vector<std::pair<PolyFp, int>> out;
    PolyFp h = pf_rem(pf_x(), f, p);
    int d = 0;
    while (pf_deg(f) > 0 && 2 * (d + 1) <= pf_deg(f)) {
        ++d;
        h = pf_powmod(h, Int(static_cast<unsigned long>(p)), f, p);
        PolyFp g = pf_gcd(pf_sub(h, pf_x(), p), f, p);
        if (pf_deg(g) > 0) {
            out.emplace_back(g, d);
            f = pf_divmod(f, g, p).first;
            h = pf_rem(h, f, p);
        }
    }
    if (pf_deg(f) > 0) out.emplace_back(f, pf_deg(f));
    return out;
}

// Cantor-Zassenhaus equal-degree splitting, p odd.
inline void pf_edf(const PolyFp& f, int d, std::uint64_t p,
                   std::mt19937_64& rng, std::vector<PolyFp>& out) {
    int n = pf_deg(f);
    if (n == d) {
        out.push_back(pf_make_monic(f, p));
        return;
    }
    Int q = pow_int(Int(static_cast<unsigned long>(p)), d);
    Int e = (q - 1) / 2;
    for (;;) {
        PolyFp a(n);
        for (int i = 0; i < n; ++i) a[i] = rng() % p;
        pf_normalize(a);
        if (pf_deg(a) < 1) continue;
        PolyFp g = pf_gcd(a, f, p);
        if (pf_deg(g) > 0 && pf_deg(g) < n) {
            pf_edf(g, d, p, rng, out);
            pf_edf(pf_divmod(f, g, p).first, d, p, rng, out);
            return;
        }
        PolyFp b = pf_powmod(a, e, f, p);
        PolyFp g2 = pf_gcd(pf_sub(b, pf_one(), p), f, p);
        if (pf_deg(g2) > 0 && pf_deg(g2) < n) {
            pf_edf(g2, d, p, rng, out);
            pf_edf(pf_divmod(f, g2, p).first, d, p, rng, out);
            return;
        }
    }
}

}  // namespace detail

/// Full factorization of a nonzero polynomial over F_p (p odd prime) into
/// monic irreducible factors with multiplicities, sorted canonically.
/// Randomized splitting draws from the given seed only.
inline std::vector<std::pair<PolyFp, unsigned>> factor_poly_mod_p(
    std::uint64_t p, const PolyFp& f_in, std::uint64_t seed = 0) {
    if (p < 3 || p >= kMaxPrimeModulus || !is_prime(Int(static_cast<unsigned long>(p))))
        throw error("factor_poly_mod_p requires an odd prime p < 2^31");
    PolyFp f = f_in;
    pf_normalize(f);
    if (pf_is_zero(f)) throw error("factor_poly_mod_p: zero polynomial");
    std::vector<std::pair<PolyFp, unsigned>> squarefree;
    detail::pf_squarefree_rec(pf_make_monic(f, p), 1, p, squarefree);
    std::mt19937_64 rng(seed ^ 0x5eedf00dULL);
    std::vector<std::pair<PolyFp, unsigned>> factors;
    for (const auto& [g, mult] : squarefree) {
        for (const auto& [h, d] : detail::pf_ddf(g, p)) {
            std::vector<PolyFp> irr;
            detail::pf_edf(h, d, p, rng, irr);
            for (auto& w : irr) factors.emplace_back(std::move(w), mult);
        }
    }
    std::sort(factors.begin(), factors.end(),
              [](const auto& a, const auto& b) { return pf_less(a.first, b.first); });
    return factors;
}

}  // namespace orbicover
