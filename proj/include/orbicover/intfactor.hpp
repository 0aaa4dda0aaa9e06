// Integer factorization: trial division up to a fixed bound, then Brent's
// cycle-finding variant of Pollard rho with a step budget. All arithmetic is
// exact (GMP); rho parameters are derived deterministically from the caller's
// seed so identical inputs give identical factorizations.
#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include <gmpxx.h>

#include "orbicover/errors.hpp"

namespace orbicover {

using Int = mpz_class;

inline constexpr std::uint64_t kTrialDivisionBound = 1000000;
inline constexpr std::uint64_t kRhoStepBudget = 10000000;

inline bool is_prime(const Int& n) {
    if (n < 2) return false;
    return mpz_probab_prime_p(n.get_mpz_t(), 40) != 0;
}

/// Primes up to kTrialDivisionBound, sieved once.
inline const std::vector<std::uint32_t>& small_primes() {
    static const std::vector<std::uint32_t> primes = [] {
        std::vector<bool> composite(kTrialDivisionBound + 1, false);
        std::vector<std::uint32_t> out;
        for (std::uint64_t i = 2; i <= kTrialDivisionBound; ++i) {
            if (composite[i]) continue;
            out.push_back(static_cast<std::uint32_t>(i));
            for (std::uint64_t j = i * i; j <= kTrialDivisionBound; j += i)
                composite[j] = true;
        }
        return out;
    }();
    return primes;
}

namespace detail {

inline Int rho_brent(const Int& n, std::uint64_t seed) {
    // n odd composite, no factor <= kTrialDivisionBound.
    for (std::uint64_t c = 1 + seed % 1000;; ++c) {
        Int x = 2, y = 2, d = 1, q = 1, ys = 0, x0 = 0;
        std::uint64_t steps = 0;
        std::uint64_t r = 1;
        const std::uint64_t m = 128;
        while (d == 1) {
            x0 = y;
            for (std::uint64_t i = 0; i < r; ++i) {
                y = (y * y + c) % n;
            }
            std::uint64_t k = 0;
            while (k < r && d == 1) {
                ys = y;
                for (std::uint64_t i = 0; i < std::min(m, r - k); ++i) {
                    y = (y * y + c) % n;
                    q = q * abs(x0 - y) % n;
                }
                mpz_gcd(d.get_mpz_t(), q.get_mpz_t(), n.get_mpz_t());
                k += m;
                steps += std::min(m, r - k + m);
                if (steps > kRhoStepBudget)
                    throw FactorBudgetExceeded("pollard rho step budget exceeded");
            }
            r *= 2;
            x = x0;
        }
        if (d == n) {
            // backtrack to recover the factor missed by batching
            do {
                ys = (ys * ys + c) % n;
                mpz_gcd(d.get_mpz_t(), Int(abs(x - ys)).get_mpz_t(), n.get_mpz_t());
            } while (d == 1);
        }
        if (d != n) return d;
        // degenerate cycle, retry with the next polynomial
    }
}

inline void factor_rec(Int n, std::map<Int, unsigned>& out, std::uint64_t seed) {
    if (n == 1) return;
    if (is_prime(n)) {
        ++out[n];
        return;
    }
    Int d = rho_brent(n, seed);
    factor_rec(d, out, seed);
    factor_rec(n / d, out, seed);
}

}  // namespace detail

/// Full prime factorization of n >= 1 as {prime -> exponent}. Throws
/// FactorBudgetExceeded if rho stalls within its step budget.
inline std::map<Int, unsigned> factorize(Int n, std::uint64_t seed = 0) {
    if (n < 1) throw error("factorize requires n >= 1");
    std::map<Int, unsigned> out;
    for (std::uint32_t q : small_primes()) {
        if (Int(q) * q > n) break;
        while (mpz_divisible_ui_p(n.get_mpz_t(), q)) {
            ++out[Int(q)];
            n /= q;
        }
    }
    if (n > 1) {
        if (is_prime(n)) {
            ++out[n];
        } else {
            detail::factor_rec(n, out, seed);
        }
    }
    return out;
}

inline Int pow_int(const Int& base, unsigned long e) {
    Int r;
    mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), e);
    return r;
}

inline Int powm(const Int& base, const Int& e, const Int& mod) {
    Int r;
    mpz_powm(r.get_mpz_t(), base.get_mpz_t(), e.get_mpz_t(), mod.get_mpz_t());
    return r;
}

}  // namespace orbicover
