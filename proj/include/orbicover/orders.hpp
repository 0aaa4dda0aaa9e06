// Orders of finite special orthogonal groups kept in factored form
// p^e * prod (p^a +/- 1), the hard-coded divisor tables bounding reductions
// of totally geodesic subgroups, the coarse divisor bound used for odd
// ambient dimension, Zsigmondy primitive-prime search, and the selection of
// the cover prime ell with its avoidance report.
//
// Divisibility by a prime ell != p is always decided through the
// multiplicative order of p mod ell (equivalently p^a = +/-1 mod ell), never
// by expanding the factored values.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "orbicover/errors.hpp"
#include "orbicover/intfactor.hpp"
#include "orbicover/quadform.hpp"

namespace orbicover {

struct PowFactor {
    unsigned a = 0;  // exponent, > 0
    int sign = -1;   // the term p^a + sign, sign in {+1, -1}

    bool operator==(const PowFactor& o) const { return a == o.a && sign == o.sign; }
};

struct FactoredOrder {
    std::uint64_t p = 0;
    bool p_unbounded = false;    // "p^X, X >= 0" rows of the divisor tables
    unsigned long p_exponent = 0;  // meaningful when !p_unbounded
    std::vector<PowFactor> factors;
    std::string label;
};

inline Int evaluate(const FactoredOrder& fo) {
    if (fo.p_unbounded) throw error("cannot evaluate an unbounded p-part");
    Int v = pow_int(Int(static_cast<unsigned long>(fo.p)), fo.p_exponent);
    for (const auto& f : fo.factors)
        v *= pow_int(Int(static_cast<unsigned long>(fo.p)), f.a) + f.sign;
    return v;
}

/// Product of the (p^a +/- 1) terms only.
inline Int prime_to_p_part(const FactoredOrder& fo) {
    Int v = 1;
    for (const auto& f : fo.factors)
        v *= pow_int(Int(static_cast<unsigned long>(fo.p)), f.a) + f.sign;
    return v;
}

/// |SO(dim; p^r)| in factored form; the square class of the discriminant
/// selects the split (p^{rn}-1) or nonsplit (p^{rn}+1) branch for even dim.
inline FactoredOrder so_order(int dim, std::uint64_t p, int r,
                              std::optional<SquareClass> cls = std::nullopt) {
    if (dim < 2) throw DimensionTooSmall("so_order needs dim >= 2");
    FactoredOrder fo;
    fo.p = p;
    unsigned ru = static_cast<unsigned>(r);
    if (dim % 2 == 1) {
        unsigned n = static_cast<unsigned>(dim / 2);
        fo.p_exponent = static_cast<unsigned long>(ru) * n * n;
        for (unsigned j = 1; j <= n; ++j) fo.factors.push_back({2 * ru * j, -1});
        fo.label = "B_" + std::to_string(n);
    } else {
        if (!cls) throw MissingSquareClass("even dimension requires a square class");
        unsigned n = static_cast<unsigned>(dim / 2);
        fo.p_exponent = static_cast<unsigned long>(ru) * n * (n - 1);
        fo.factors.push_back({ru * n, *cls == SquareClass::square ? -1 : +1});
        for (unsigned j = 1; j + 1 <= n; ++j) fo.factors.push_back({2 * ru * j, -1});
        fo.label = "D_" + std::to_string(n) +
                   (*cls == SquareClass::square ? "_split" : "_nonsplit");
    }
    return fo;
}

namespace detail {

// Append prod_{j=1}^{hi} (p^{2rj} - 1); hi < 0 marks the row malformed.
inline bool append_even_run(std::vector<PowFactor>& fs, int hi, unsigned r) {
    if (hi < 0) return false;
    for (int j = 1; j <= hi; ++j) fs.push_back({2 * r * static_cast<unsigned>(j), -1});
    return true;
}

inline void push_row(std::vector<FactoredOrder>& out, std::uint64_t p,
                     std::vector<PowFactor> fs, std::string label) {
    FactoredOrder fo;
    fo.p = p;
    fo.p_unbounded = true;
    fo.factors = std::move(fs);
    fo.label = std::move(label);
    out.push_back(std::move(fo));
}

// Rows (T1)-(T8): divisor bounds for reductions associated with an odd
// dimensional subform 2n-1. Rows whose index ranges degenerate for small n
// are dropped.
inline void t_table(std::vector<FactoredOrder>& out, unsigned n, std::uint64_t p,
                    unsigned r) {
    {
        std::vector<PowFactor> fs;
        if (append_even_run(fs, static_cast<int>(n) - 1, r)) push_row(out, p, fs, "T1");
    }
    {
        std::vector<PowFactor> fs{{2 * r, -1}, {2 * r, -1}};
        if (append_even_run(fs, static_cast<int>(n) - 3, r)) push_row(out, p, fs, "T2");
    }
    for (unsigned k = 3; k + 3 <= n; ++k) {
        for (int sign : {+1, -1}) {
            std::vector<PowFactor> fs;
            if (r * (k - 1) == 0) continue;
            fs.push_back({r * (k - 1), sign});
            if (!append_even_run(fs, static_cast<int>(k) - 2, r)) continue;
            if (!append_even_run(fs, static_cast<int>(n - k), r)) continue;
            push_row(out, p, fs,
                     std::string("T3 k=") + std::to_string(k) + (sign > 0 ? " +" : " -"));
        }
    }
    for (int sign : {+1, -1}) {
        if (n < 3) break;  // (p^{r(n-2)} +/- 1) needs a positive exponent
        std::vector<PowFactor> fs{{2 * r, -1}, {r * (n - 2), sign}};
        if (append_even_run(fs, static_cast<int>(n) - 3, r))
            push_row(out, p, fs, std::string("T4") + (sign > 0 ? " +" : " -"));
    }
    for (int sign : {+1, -1}) {
        if (n < 2) break;
        std::vector<PowFactor> fs{{r * (n - 1), sign}};
        if (append_even_run(fs, static_cast<int>(n) - 2, r))
            push_row(out, p, fs, std::string("T5") + (sign > 0 ? " +" : " -"));
    }
    {
        std::vector<PowFactor> fs;
        if (append_even_run(fs, static_cast<int>(n) - 2, r)) push_row(out, p, fs, "T6");
    }
    {
        std::vector<PowFactor> fs{{2 * r, -1}};
        if (append_even_run(fs, static_cast<int>(n) - 3, r)) push_row(out, p, fs, "T7");
    }
    for (unsigned k = 3; k + 3 <= n; ++k) {
        std::vector<PowFactor> fs;
        if (!append_even_run(fs, static_cast<int>(k) - 1, r)) continue;
        if (!append_even_run(fs, static_cast<int>(n - k) - 1, r)) continue;
        push_row(out, p, fs, std::string("T8 k=") + std::to_string(k));
    }
}

// Rows (S1)-(S6): bounds for an even dimensional subform 2n. The odd table
// is appended afterwards by the caller.
inline void s_table(std::vector<FactoredOrder>& out, unsigned n, std::uint64_t p,
                    unsigned r) {
    for (int sign : {+1, -1}) {
        std::vector<PowFactor> fs{{r * n, sign}};
        if (append_even_run(fs, static_cast<int>(n) - 1, r))
            push_row(out, p, fs, std::string("S1") + (sign > 0 ? " +" : " -"));
    }
    for (int sign : {+1, -1}) {
        if (n < 3) break;
        std::vector<PowFactor> fs{{2 * r, -1}, {2 * r, -1}, {r * (n - 2), sign}};
        if (append_even_run(fs, static_cast<int>(n) - 3, r))
            push_row(out, p, fs, std::string("S2") + (sign > 0 ? " +" : " -"));
    }
    for (unsigned k = 3; k + 3 <= n; ++k) {
        for (int s1 : {+1, -1}) {
            for (int s2 : {+1, -1}) {
                std::vector<PowFactor> fs{{r * k, s1}, {r * (n - k), s2}};
                if (!append_even_run(fs, static_cast<int>(k) - 1, r)) continue;
                if (!append_even_run(fs, static_cast<int>(n - k) - 1, r)) continue;
                push_row(out, p, fs,
                         std::string("S3 k=") + std::to_string(k) + " " +
                             (s1 > 0 ? "+" : "-") + (s2 > 0 ? "+" : "-"));
            }
        }
    }
    {
        std::vector<PowFactor> fs;
        if (append_even_run(fs, static_cast<int>(n) - 1, r)) push_row(out, p, fs, "S4");
    }
    {
        std::vector<PowFactor> fs{{2 * r, -1}};
        if (append_even_run(fs, static_cast<int>(n) - 2, r)) push_row(out, p, fs, "S5");
    }
    for (unsigned k = 3; k + 2 <= n; ++k) {
        std::vector<PowFactor> fs;
        if (!append_even_run(fs, static_cast<int>(k) - 1, r)) continue;
        if (!append_even_run(fs, static_cast<int>(n - k), r)) continue;
        push_row(out, p, fs, std::string("S6 k=") + std::to_string(k));
    }
}

}  // namespace detail

/// All divisor bounds applicable to a subform of the given dimension: the
/// odd table for subform_dim = 2n-1, the even table (with the odd table
/// appended) for subform_dim = 2n. Every row has an unbounded p-part.
inline std::vector<FactoredOrder> subgroup_bound_tables(int subform_dim,
                                                        std::uint64_t p, int r) {
    if (subform_dim < 4)
        throw DimensionTooSmall("divisor tables require subform dimension >= 4");
    std::vector<FactoredOrder> out;
    unsigned ru = static_cast<unsigned>(r);
    if (subform_dim % 2 == 1) {
        unsigned n = static_cast<unsigned>((subform_dim + 1) / 2);
        detail::t_table(out, n, p, ru);
    } else {
        unsigned n = static_cast<unsigned>(subform_dim / 2);
        detail::s_table(out, n, p, ru);
        detail::t_table(out, n, p, ru);
    }
    return out;
}

/// Coarse divisor bound for any totally geodesic reduction when the ambient
/// dimension 2n+1 is odd: p^X * prod_{j<=2r(n-1)}(p^j - 1) *
/// prod_{j'<=r(n-1)}(p^{j'} + 1).
inline FactoredOrder coarse_lemma_bound(int dim_q, std::uint64_t p, int r) {
    if (dim_q % 2 == 0)
        throw EvenDimension("coarse bound is stated for odd ambient dimension");
    if (dim_q < 3) throw DimensionTooSmall("coarse bound needs dim >= 3");
    unsigned n = static_cast<unsigned>(dim_q / 2);
    unsigned ru = static_cast<unsigned>(r);
    FactoredOrder fo;
    fo.p = p;
    fo.p_unbounded = true;
    fo.label = "coarse";
    for (unsigned j = 1; j <= 2 * ru * (n - 1); ++j) fo.factors.push_back({j, -1});
    for (unsigned j = 1; j <= ru * (n - 1); ++j) fo.factors.push_back({j, +1});
    return fo;
}

/// Does the odd prime ell divide some (p^a + s) term? Decided via the order
/// of p modulo ell: ell | p^a - 1 iff ord | a, and ell | p^a + 1 iff
/// p^a = -1 mod ell. ell = 2 always divides p^a +/- 1 for odd p.
inline bool prime_divides_factored(const Int& ell, const FactoredOrder& fo) {
    if (ell == Int(static_cast<unsigned long>(fo.p))) throw EllEqualsP();
    if (!is_prime(ell)) throw error("ell must be prime");
    if (ell == 2) return !fo.factors.empty();  // p odd, so every term is even
    Int pz(static_cast<unsigned long>(fo.p));
    for (const auto& f : fo.factors) {
        Int v = powm(pz, Int(f.a), ell);
        if (f.sign < 0 ? v == 1 : v == ell - 1) return true;
    }
    return false;
}

/// Smallest prime divisor ell of p^d + 1 that is primitive: ord_ell(p) = 2d,
/// i.e. ell divides no earlier p^j + 1 (j < d) nor p^j - 1 (j < 2d).
inline Int zsigmondy_prime(std::uint64_t p, int d, std::uint64_t seed = 0) {
    if (d < 2) throw error("zsigmondy_prime requires d >= 2");
    if (p < 3) throw error("zsigmondy_prime requires an odd prime p");
    Int n = pow_int(Int(static_cast<unsigned long>(p)), static_cast<unsigned>(d)) + 1;
    auto fac = factorize(n, seed);
    Int pz(static_cast<unsigned long>(p));
    auto fac2d = factorize(Int(2 * d));
    for (const auto& [ell, e] : fac) {
        if (ell == 2) continue;
        if (powm(pz, Int(2 * d), ell) != 1) continue;
        bool primitive = true;
        for (const auto& [s, se] : fac2d) {
            if (powm(pz, Int(2 * d) / s, ell) == 1) {
                primitive = false;
                break;
            }
        }
        if (primitive) return ell;
    }
    throw ZsigmondyFailure("no primitive prime divisor of p^d + 1 found");
}

// ---------------------------------------------------------------------------
// cover prime selection
// ---------------------------------------------------------------------------

enum class CoverBranch { odd_dim, even_nonsquare_disc, even_square_disc };

inline std::string branch_name(CoverBranch b) {
    switch (b) {
        case CoverBranch::odd_dim: return "OddDim";
        case CoverBranch::even_nonsquare_disc: return "EvenNonsquareDisc";
        case CoverBranch::even_square_disc: return "EvenSquareDisc";
    }
    return "?";
}

enum class CertMode { paper, strict };

inline std::string mode_name(CertMode m) {
    return m == CertMode::paper ? "paper" : "strict";
}

struct AvoidanceCheck {
    std::string label;
    std::string kind;  // "divisor_bound" or "eigenvalue"
    std::vector<PowFactor> factors;
    bool divides = false;  // outcome: does ell divide the bound's cofree part
    bool required = false; // required checks gate certificate validity
    bool passed = false;
};

struct CoverPrime {
    Int ell;
    CoverBranch branch = CoverBranch::odd_dim;
    unsigned d = 0;  // Zsigmondy exponent (nr), or r on the even-square branch
    std::vector<AvoidanceCheck> report;
};

namespace detail {

inline AvoidanceCheck divisor_check(const Int& ell, const FactoredOrder& fo,
                                    bool required) {
    AvoidanceCheck c;
    c.label = fo.label;
    c.kind = "divisor_bound";
    c.factors = fo.factors;
    c.divides = prime_divides_factored(ell, fo);
    c.required = required;
    c.passed = !c.divides;
    return c;
}

// Diagnostic checks shared by the two Zsigmondy branches: the subform
// divisor tables and the naive complementary-split products.
inline void append_diagnostics(std::vector<AvoidanceCheck>& report, const Int& ell,
                               const FqForm& q, int m) {
    std::uint64_t p = q.ctx.p;
    int r = q.ctx.r;
    for (int d0 = 4; d0 <= m; ++d0) {
        for (auto& fo : subgroup_bound_tables(d0, p, r)) {
            fo.label = "d0=" + std::to_string(d0) + " " + fo.label;
            report.push_back(divisor_check(ell, fo, false));
        }
    }
    // naive products so(d0) x so(m+1-d0) over all splits and square classes
    for (int d0 = 2; d0 <= m; ++d0) {
        int dc = m + 1 - d0;
        std::vector<std::vector<FactoredOrder>> parts;
        for (int dd : {d0, dc}) {
            std::vector<FactoredOrder> alt;
            if (dd < 2) {
                FactoredOrder triv;
                triv.p = p;
                triv.label = "so(1)";
                alt.push_back(triv);
            } else if (dd % 2 == 1) {
                alt.push_back(so_order(dd, p, r));
            } else {
                alt.push_back(so_order(dd, p, r, SquareClass::square));
                alt.push_back(so_order(dd, p, r, SquareClass::nonsquare));
            }
            parts.push_back(std::move(alt));
        }
        for (const auto& a : parts[0]) {
            for (const auto& b : parts[1]) {
                FactoredOrder prod;
                prod.p = p;
                prod.p_unbounded = true;
                prod.factors = a.factors;
                prod.factors.insert(prod.factors.end(), b.factors.begin(),
                                    b.factors.end());
                prod.label = "split " + std::to_string(d0) + "|" + std::to_string(dc) +
                             " " + a.label + " x " + b.label;
                report.push_back(divisor_check(ell, prod, false));
            }
        }
    }
}

inline void append_strict_checks(std::vector<AvoidanceCheck>& report, const Int& ell,
                                 const FqForm& q, int m) {
    for (int d0 = 3; d0 <= m; ++d0) {
        if (d0 % 2 == 1) {
            FactoredOrder fo = so_order(d0, q.ctx.p, q.ctx.r);
            fo.label = "strict so(" + std::to_string(d0) + ") " + fo.label;
            report.push_back(divisor_check(ell, fo, false));
        } else {
            for (auto cls : {SquareClass::square, SquareClass::nonsquare}) {
                FactoredOrder fo = so_order(d0, q.ctx.p, q.ctx.r, cls);
                fo.label = "strict so(" + std::to_string(d0) + ") " + fo.label;
                report.push_back(divisor_check(ell, fo, false));
            }
        }
    }
}

// The even-square branch criterion: with a = (q-1)/ell, no g^{a t}
// (0 < t < ell) may have eigenvalue +1 or -1; for the torus generator the
// eigenvalues are powers of a generator lambda, so this is the arithmetic
// condition a*t != 0 and != (q-1)/2 mod q-1.
inline AvoidanceCheck eigenvalue_check(const Int& ell, const Int& q) {
    AvoidanceCheck c;
    c.label = "eigenvalue_pm1";
    c.kind = "eigenvalue";
    c.required = true;
    Int qm1 = q - 1;
    Int a = qm1 / ell;
    bool ok = a * ell == qm1 && mpz_odd_p(ell.get_mpz_t());
    if (ok && ell < 100000) {
        Int half = qm1 / 2;
        for (Int t = 1; t < ell; ++t) {
            Int at = a * t % qm1;
            if (at == 0 || at == half) {
                ok = false;
                break;
            }
        }
    }
    c.passed = ok;
    c.divides = !ok;
    return c;
}

}  // namespace detail

/// Select the cover prime ell for a good reduction, with the verified
/// avoidance report. Branches:
///   - odd dim 2n+1: ell is a primitive prime divisor of p^{nr} + 1 and the
///     coarse divisor bound is the required check;
///   - even dim, nonsquare disc: same selection (p^{nr}+1 divides |G|);
///   - even dim, square disc: ell is the smallest odd prime divisor of
///     p^r - 1 and the eigenvalue criterion is the required check.
/// Strict mode appends the full-group divisibility diagnostics, which may
/// legitimately fail (they do not gate validity).
inline CoverPrime select_cover_prime(const FqForm& q, int m, CertMode mode) {
    if (q.dim != m + 1) throw error("form dimension does not match m+1");
    if (q.dim % 2 == 0 && !q.square_class)
        throw BadReduction("degenerate reduction has no square class");
    std::uint64_t p = q.ctx.p;
    int r = q.ctx.r;
    CoverPrime cp;
    if (q.dim % 2 == 1 || q.square_class == SquareClass::nonsquare) {
        unsigned n = static_cast<unsigned>(q.dim / 2);
        cp.branch = q.dim % 2 == 1 ? CoverBranch::odd_dim
                                   : CoverBranch::even_nonsquare_disc;
        cp.d = n * static_cast<unsigned>(r);
        cp.ell = zsigmondy_prime(p, static_cast<int>(cp.d));
        int coarse_dim = q.dim % 2 == 1 ? q.dim : q.dim + 1;
        FactoredOrder coarse = coarse_lemma_bound(coarse_dim, p, r);
        cp.report.push_back(detail::divisor_check(cp.ell, coarse, true));
        if (!cp.report.back().passed)
            throw error("primitive prime unexpectedly divides the coarse bound");
        detail::append_diagnostics(cp.report, cp.ell, q, m);
    } else {
        cp.branch = CoverBranch::even_square_disc;
        cp.d = static_cast<unsigned>(r);
        Int prm1 = pow_int(Int(static_cast<unsigned long>(p)), cp.d) - 1;
        Int ell = 0;
        for (const auto& [s, e] : factorize(prm1)) {
            if (s > 2) {
                ell = s;
                break;
            }
        }
        if (ell == 0)
            throw NoOddPrimeDivisor("p^r - 1 is a power of two; prime skipped");
        cp.ell = ell;
        cp.report.push_back(detail::eigenvalue_check(cp.ell, q.ctx.q));
        if (!cp.report.back().passed)
            throw error("eigenvalue criterion failed for the torus generator");
    }
    if (mode == CertMode::strict)
        detail::append_strict_checks(cp.report, cp.ell, q, m);
    return cp;
}

}  // namespace orbicover
