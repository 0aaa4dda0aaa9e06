// Arithmetic in F_{p^r} = F_p[x]/(g) for an odd prime p and a monic
// irreducible modulus g of degree r. Elements are fixed-length coefficient
// vectors; contexts are immutable after construction. Exponents are
// arbitrary-precision since q = p^r routinely exceeds a machine word.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "orbicover/errors.hpp"
#include "orbicover/fp_poly.hpp"
#include "orbicover/intfactor.hpp"

namespace orbicover {

struct FqContext {
    std::uint64_t p = 0;
    int r = 0;
    PolyFp modulus;  // monic irreducible of degree r
    Int q;           // p^r

    bool operator==(const FqContext& o) const {
        return p == o.p && modulus == o.modulus;
    }
};

struct FqElem {
    std::vector<std::uint64_t> c;  // length r, entries in [0, p)

    bool operator==(const FqElem& o) const { return c == o.c; }
    bool operator!=(const FqElem& o) const { return c != o.c; }
    bool operator<(const FqElem& o) const { return c < o.c; }
};

inline FqContext make_fq_context(std::uint64_t p, PolyFp modulus) {
    if (p == 2) throw DyadicPrime("F_q contexts require odd p");
    if (p < 3 || p >= kMaxPrimeModulus || !is_prime(Int(static_cast<unsigned long>(p))))
        throw error("context prime must be an odd prime < 2^31");
    pf_normalize(modulus);
    if (pf_deg(modulus) < 1) throw error("modulus must have degree >= 1");
    modulus = pf_make_monic(modulus, p);
    auto factors = factor_poly_mod_p(p, modulus, 0);
    if (factors.size() != 1 || factors[0].second != 1)
        throw error("modulus is not irreducible over F_p");
    FqContext ctx;
    ctx.p = p;
    ctx.r = pf_deg(modulus);
    ctx.modulus = std::move(modulus);
    ctx.q = pow_int(Int(static_cast<unsigned long>(p)), ctx.r);
    return ctx;
}

/// The prime field F_p itself, presented as F_p[x]/(x).
inline FqContext make_prime_context(std::uint64_t p) {
    return make_fq_context(p, pf_x());
}

inline FqElem fq_zero(const FqContext& ctx) {
    return FqElem{std::vector<std::uint64_t>(ctx.r, 0)};
}

inline FqElem fq_one(const FqContext& ctx) {
    FqElem e = fq_zero(ctx);
    e.c[0] = 1;
    return e;
}

inline bool fq_is_zero(const FqElem& a) {
    for (auto v : a.c)
        if (v) return false;
    return true;
}

inline FqElem fq_from_poly(const FqContext& ctx, PolyFp f) {
    f = pf_rem(f, ctx.modulus, ctx.p);
    f.resize(ctx.r, 0);
    return FqElem{std::move(f)};
}

inline FqElem fq_from_int(const FqContext& ctx, long long v) {
    FqElem e = fq_zero(ctx);
    e.c[0] = fp::from_signed(v, ctx.p);
    return e;
}

/// Enumeration order of F_q: index -> base-p digit vector (little-endian).
inline FqElem fq_from_index(const FqContext& ctx, std::uint64_t idx) {
    FqElem e = fq_zero(ctx);
    for (int i = 0; i < ctx.r && idx; ++i) {
        e.c[i] = idx % ctx.p;
        idx /= ctx.p;
    }
    return e;
}

inline std::uint64_t fq_index(const FqContext& ctx, const FqElem& a) {
    std::uint64_t idx = 0;
    for (int i = ctx.r; i-- > 0;) idx = idx * ctx.p + a.c[i];
    return idx;
}

inline PolyFp fq_to_poly(const FqElem& a) {
    PolyFp f = a.c;
    pf_normalize(f);
    return f;
}

inline FqElem fq_add(const FqContext& ctx, const FqElem& a, const FqElem& b) {
    FqElem e = fq_zero(ctx);
    for (int i = 0; i < ctx.r; ++i) e.c[i] = fp::add(a.c[i], b.c[i], ctx.p);
    return e;
}

inline FqElem fq_sub(const FqContext& ctx, const FqElem& a, const FqElem& b) {
    FqElem e = fq_zero(ctx);
    for (int i = 0; i < ctx.r; ++i) e.c[i] = fp::sub(a.c[i], b.c[i], ctx.p);
    return e;
}

inline FqElem fq_neg(const FqContext& ctx, const FqElem& a) {
    return fq_sub(ctx, fq_zero(ctx), a);
}

inline FqElem fq_mul(const FqContext& ctx, const FqElem& a, const FqElem& b) {
    return fq_from_poly(ctx, pf_mul(fq_to_poly(a), fq_to_poly(b), ctx.p));
}

inline FqElem fq_inv(const FqContext& ctx, const FqElem& a) {
    if (fq_is_zero(a)) throw DivisionByZero("F_q inverse of zero");
    // extended Euclid in F_p[x] against the (irreducible) modulus
    PolyFp r0 = ctx.modulus, r1 = fq_to_poly(a);
    PolyFp t0, t1 = pf_one();
    while (!pf_is_zero(r1)) {
        auto [quot, rem] = pf_divmod(r0, r1, ctx.p);
        PolyFp t2 = pf_sub(t0, pf_mul(quot, t1, ctx.p), ctx.p);
        r0 = std::move(r1);
        r1 = std::move(rem);
        t0 = std::move(t1);
        t1 = std::move(t2);
    }
    // r0 is a nonzero constant gcd
    PolyFp res = pf_scale(t0, fp::inv(r0[0], ctx.p), ctx.p);
    return fq_from_poly(ctx, std::move(res));
}

inline FqElem fq_div(const FqContext& ctx, const FqElem& a, const FqElem& b) {
    return fq_mul(ctx, a, fq_inv(ctx, b));
}

inline FqElem fq_pow(const FqContext& ctx, const FqElem& a, const Int& e) {
    if (e < 0) return fq_pow(ctx, fq_inv(ctx, a), -e);
    FqElem r = fq_one(ctx);
    if (e == 0) return r;
    FqElem base = a;
    std::size_t bits = mpz_sizeinbase(e.get_mpz_t(), 2);
    for (std::size_t i = bits; i-- > 0;) {
        r = fq_mul(ctx, r, r);
        if (mpz_tstbit(e.get_mpz_t(), i)) r = fq_mul(ctx, r, base);
    }
    return r;
}

/// Euler criterion: a^((q-1)/2) = 1. Rejects zero input.
inline bool is_square(const FqContext& ctx, const FqElem& a) {
    if (fq_is_zero(a)) throw ZeroInput("is_square on zero");
    return fq_pow(ctx, a, (ctx.q - 1) / 2) == fq_one(ctx);
}

/// Smallest element in enumeration order whose multiplicative order is q-1,
/// certified by checking a^((q-1)/s) != 1 for every prime s | q-1.
inline FqElem multiplicative_generator(const FqContext& ctx) {
    auto fac = factorize(ctx.q - 1);
    FqElem one = fq_one(ctx);
    for (std::uint64_t idx = 1;; ++idx) {
        FqElem cand = fq_from_index(ctx, idx);
        bool ok = true;
        for (const auto& [s, e] : fac) {
            if (fq_pow(ctx, cand, (ctx.q - 1) / s) == one) {
                ok = false;
                break;
            }
        }
        if (ok) return cand;
    }
}

/// Exact multiplicative order by divisor descent on the factorization of q-1.
inline Int element_order(const FqContext& ctx, const FqElem& a) {
    if (fq_is_zero(a)) throw ZeroInput("element_order on zero");
    auto fac = factorize(ctx.q - 1);
    Int order = ctx.q - 1;
    FqElem one = fq_one(ctx);
    for (const auto& [s, e] : fac) {
        for (unsigned i = 0; i < e; ++i) {
            Int cand = order / s;
            if (fq_pow(ctx, a, cand) == one)
                order = cand;
            else
                break;
        }
    }
    return order;
}

/// Square root by Tonelli-Shanks, generalized to F_q. Returns nothing for
/// nonsquares; the returned root is the one whose enumeration index is
/// smaller, so the result is deterministic.
inline std::optional<FqElem> fq_sqrt(const FqContext& ctx, const FqElem& a) {
    if (fq_is_zero(a)) return fq_zero(ctx);
    if (!is_square(ctx, a)) return std::nullopt;
    Int m = ctx.q - 1;
    unsigned long e = 0;
    while (mpz_even_p(m.get_mpz_t())) {
        m /= 2;
        ++e;
    }
    FqElem one = fq_one(ctx);
    FqElem x = fq_pow(ctx, a, (m + 1) / 2);
    FqElem b = fq_pow(ctx, a, m);
    // deterministic nonsquare for the Tonelli-Shanks ladder
    FqElem z = fq_one(ctx);
    for (std::uint64_t idx = 1;; ++idx) {
        z = fq_from_index(ctx, idx);
        if (!fq_is_zero(z) && !is_square(ctx, z)) break;
    }
    FqElem g = fq_pow(ctx, z, m);
    unsigned long rexp = e;
    while (b != one) {
        unsigned long s = 0;
        FqElem t = b;
        while (t != one) {
            t = fq_mul(ctx, t, t);
            ++s;
        }
        FqElem gs = g;
        for (unsigned long i = 0; i + s + 1 < rexp; ++i) gs = fq_mul(ctx, gs, gs);
        x = fq_mul(ctx, x, gs);
        g = fq_mul(ctx, gs, gs);
        b = fq_mul(ctx, b, g);
        rexp = s;
    }
    FqElem nx = fq_neg(ctx, x);
    return fq_index(ctx, x) <= fq_index(ctx, nx) ? x : nx;
}

inline std::string fq_to_string(const FqContext& ctx, const FqElem& a) {
    std::string s = "[";
    for (int i = 0; i < ctx.r; ++i) {
        if (i) s += ",";
        s += std::to_string(a.c[i]);
    }
    s += "]";
    return s;
}

}  // namespace orbicover
