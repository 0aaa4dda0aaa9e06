// Explicit matrices over F_{p^r}: isometry testing against a diagonal form,
// reflection generators, seeded random group elements, two independent
// order oracles (exhaustive enumeration and a Witt-transitivity point
// count), hyperbolic basis decomposition, and construction of the cyclic
// witness subgroup generators.
#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "orbicover/errors.hpp"
#include "orbicover/finfield.hpp"
#include "orbicover/intfactor.hpp"
#include "orbicover/orders.hpp"
#include "orbicover/quadform.hpp"

namespace orbicover {

struct FqMatrix {
    int dim = 0;
    std::vector<FqElem> e;  // row-major, dim*dim entries

    FqElem& at(int i, int j) { return e[static_cast<std::size_t>(i) * dim + j]; }
    const FqElem& at(int i, int j) const {
        return e[static_cast<std::size_t>(i) * dim + j];
    }
    bool operator==(const FqMatrix& o) const { return dim == o.dim && e == o.e; }
};

using FqVector = std::vector<FqElem>;

inline FqMatrix mat_zero(const FqContext& ctx, int dim) {
    return FqMatrix{dim, std::vector<FqElem>(static_cast<std::size_t>(dim) * dim,
                                             fq_zero(ctx))};
}

inline FqMatrix mat_identity(const FqContext& ctx, int dim) {
    FqMatrix m = mat_zero(ctx, dim);
    for (int i = 0; i < dim; ++i) m.at(i, i) = fq_one(ctx);
    return m;
}

inline FqMatrix mat_mul(const FqContext& ctx, const FqMatrix& a, const FqMatrix& b) {
    if (a.dim != b.dim) throw DimMismatch();
    FqMatrix r = mat_zero(ctx, a.dim);
    for (int i = 0; i < a.dim; ++i)
        for (int k = 0; k < a.dim; ++k) {
            if (fq_is_zero(a.at(i, k))) continue;
            for (int j = 0; j < a.dim; ++j)
                r.at(i, j) =
                    fq_add(ctx, r.at(i, j), fq_mul(ctx, a.at(i, k), b.at(k, j)));
        }
    return r;
}

inline FqMatrix mat_transpose(const FqContext& ctx, const FqMatrix& a) {
    FqMatrix r = mat_zero(ctx, a.dim);
    for (int i = 0; i < a.dim; ++i)
        for (int j = 0; j < a.dim; ++j) r.at(j, i) = a.at(i, j);
    return r;
}

inline FqMatrix mat_pow(const FqContext& ctx, const FqMatrix& a, const Int& e) {
    if (e < 0) throw error("mat_pow needs e >= 0");
    FqMatrix r = mat_identity(ctx, a.dim);
    if (e == 0) return r;
    std::size_t bits = mpz_sizeinbase(e.get_mpz_t(), 2);
    for (std::size_t i = bits; i-- > 0;) {
        r = mat_mul(ctx, r, r);
        if (mpz_tstbit(e.get_mpz_t(), i)) r = mat_mul(ctx, r, a);
    }
    return r;
}

inline FqElem mat_det(const FqContext& ctx, FqMatrix m) {
    FqElem det = fq_one(ctx);
    for (int col = 0; col < m.dim; ++col) {
        int piv = -1;
        for (int row = col; row < m.dim; ++row)
            if (!fq_is_zero(m.at(row, col))) {
                piv = row;
                break;
            }
        if (piv < 0) return fq_zero(ctx);
        if (piv != col) {
            for (int j = 0; j < m.dim; ++j) std::swap(m.at(piv, j), m.at(col, j));
            det = fq_neg(ctx, det);
        }
        det = fq_mul(ctx, det, m.at(col, col));
        FqElem inv = fq_inv(ctx, m.at(col, col));
        for (int row = col + 1; row < m.dim; ++row) {
            if (fq_is_zero(m.at(row, col))) continue;
            FqElem f = fq_mul(ctx, m.at(row, col), inv);
            for (int j = col; j < m.dim; ++j)
                m.at(row, j) =
                    fq_sub(ctx, m.at(row, j), fq_mul(ctx, f, m.at(col, j)));
        }
    }
    return det;
}

inline FqMatrix mat_inverse(const FqContext& ctx, FqMatrix m) {
    FqMatrix inv = mat_identity(ctx, m.dim);
    for (int col = 0; col < m.dim; ++col) {
        int piv = -1;
        for (int row = col; row < m.dim; ++row)
            if (!fq_is_zero(m.at(row, col))) {
                piv = row;
                break;
            }
        if (piv < 0) throw DivisionByZero("matrix is singular");
        if (piv != col)
            for (int j = 0; j < m.dim; ++j) {
                std::swap(m.at(piv, j), m.at(col, j));
                std::swap(inv.at(piv, j), inv.at(col, j));
            }
        FqElem f = fq_inv(ctx, m.at(col, col));
        for (int j = 0; j < m.dim; ++j) {
            m.at(col, j) = fq_mul(ctx, m.at(col, j), f);
            inv.at(col, j) = fq_mul(ctx, inv.at(col, j), f);
        }
        for (int row = 0; row < m.dim; ++row) {
            if (row == col || fq_is_zero(m.at(row, col))) continue;
            FqElem g = m.at(row, col);
            for (int j = 0; j < m.dim; ++j) {
                m.at(row, j) = fq_sub(ctx, m.at(row, j), fq_mul(ctx, g, m.at(col, j)));
                inv.at(row, j) =
                    fq_sub(ctx, inv.at(row, j), fq_mul(ctx, g, inv.at(col, j)));
            }
        }
    }
    return inv;
}

// ----- the form as a symmetric bilinear pairing -----

inline FqMatrix gram_matrix(const FqForm& q) {
    FqMatrix g = mat_zero(q.ctx, q.dim);
    for (int i = 0; i < q.dim; ++i) g.at(i, i) = q.diagonal[i];
    return g;
}

inline FqElem bilinear(const FqForm& q, const FqVector& u, const FqVector& v) {
    FqElem s = fq_zero(q.ctx);
    for (int i = 0; i < q.dim; ++i)
        s = fq_add(q.ctx, s, fq_mul(q.ctx, q.diagonal[i], fq_mul(q.ctx, u[i], v[i])));
    return s;
}

inline FqElem quad_value(const FqForm& q, const FqVector& v) {
    return bilinear(q, v, v);
}

/// M^T G M = G and det M = 1.
inline bool is_special_isometry(const FqForm& q, const FqMatrix& m) {
    if (m.dim != q.dim) throw DimMismatch();
    const FqContext& ctx = q.ctx;
    FqMatrix g = gram_matrix(q);
    FqMatrix t = mat_mul(ctx, mat_transpose(ctx, m), mat_mul(ctx, g, m));
    if (!(t == g)) return false;
    return mat_det(ctx, m) == fq_one(ctx);
}

/// Reflection in an anisotropic vector: x -> x - (2 B(x,v) / q(v)) v.
inline FqMatrix reflection(const FqForm& q, const FqVector& v) {
    const FqContext& ctx = q.ctx;
    if (static_cast<int>(v.size()) != q.dim) throw DimMismatch();
    FqElem qv = quad_value(q, v);
    if (fq_is_zero(qv)) throw IsotropicVector("reflection needs q(v) != 0");
    FqElem coef = fq_div(ctx, fq_from_int(ctx, 2), qv);
    FqMatrix r = mat_identity(ctx, q.dim);
    for (int i = 0; i < q.dim; ++i)
        for (int j = 0; j < q.dim; ++j) {
            // column j of the reflection: e_j - (2 a_j v_j / q(v)) v
            FqElem t = fq_mul(ctx, coef, fq_mul(ctx, q.diagonal[j], v[j]));
            r.at(i, j) = fq_sub(ctx, r.at(i, j), fq_mul(ctx, t, v[i]));
        }
    return r;
}

/// Product of 2*dim reflections in seeded-random anisotropic vectors;
/// always lands in SO(q). Identical seeds give identical matrices.
inline FqMatrix random_so_element(const FqForm& q, std::uint64_t seed) {
    const FqContext& ctx = q.ctx;
    std::mt19937_64 rng(seed ^ 0x0c0ffee0ULL);
    FqMatrix m = mat_identity(ctx, q.dim);
    for (int k = 0; k < 2 * q.dim; ++k) {
        FqVector v(q.dim, fq_zero(ctx));
        for (int tries = 0;; ++tries) {
            if (tries > 1000) throw SearchBudgetExceeded("anisotropic vector search");
            for (int i = 0; i < q.dim; ++i)
                for (int c = 0; c < ctx.r; ++c) v[i].c[c] = rng() % ctx.p;
            if (!fq_is_zero(quad_value(q, v))) break;
        }
        m = mat_mul(ctx, m, reflection(q, v));
    }
    return m;
}

// ---------------------------------------------------------------------------
// order oracles. Both are independent of the closed-form order formulas:
// one enumerates matrices, the other counts sphere solutions and uses the
// transitivity of the orthogonal group on vectors of a given length.
// ---------------------------------------------------------------------------

namespace detail {

// Field elements as dense indices 0..q-1 with exp/log multiplication tables.
struct PackedFq {
    std::uint64_t p = 0;
    int r = 0;
    std::uint32_t q = 0;
    std::vector<std::uint32_t> log_tab, exp_tab;      // discrete log w.r.t. a generator
    std::vector<std::uint32_t> digits;                 // q*r base-p digit table

    std::uint32_t mul(std::uint32_t a, std::uint32_t b) const {
        if (a == 0 || b == 0) return 0;
        std::uint32_t s = log_tab[a] + log_tab[b];
        if (s >= q - 1) s -= q - 1;
        return exp_tab[s];
    }
    std::uint32_t add(std::uint32_t a, std::uint32_t b) const {
        std::uint32_t out = 0, mulp = 1;
        for (int i = 0; i < r; ++i) {
            std::uint32_t d = digits[a * r + i] + digits[b * r + i];
            if (d >= p) d -= static_cast<std::uint32_t>(p);
            out += d * mulp;
            mulp *= static_cast<std::uint32_t>(p);
        }
        return out;
    }
    std::uint32_t neg(std::uint32_t a) const {
        std::uint32_t out = 0, mulp = 1;
        for (int i = 0; i < r; ++i) {
            std::uint32_t d = digits[a * r + i];
            if (d) d = static_cast<std::uint32_t>(p) - d;
            out += d * mulp;
            mulp *= static_cast<std::uint32_t>(p);
        }
        return out;
    }
    std::uint32_t inv(std::uint32_t a) const {
        if (a == 0) throw DivisionByZero("packed inverse of zero");
        std::uint32_t l = log_tab[a];
        return exp_tab[l == 0 ? 0 : q - 1 - l];
    }
};

inline PackedFq pack_context(const FqContext& ctx) {
    PackedFq pf;
    pf.p = ctx.p;
    pf.r = ctx.r;
    pf.q = static_cast<std::uint32_t>(ctx.q.get_ui());
    pf.digits.resize(static_cast<std::size_t>(pf.q) * pf.r);
    for (std::uint32_t a = 0; a < pf.q; ++a) {
        std::uint32_t v = a;
        for (int i = 0; i < pf.r; ++i) {
            pf.digits[static_cast<std::size_t>(a) * pf.r + i] =
                v % static_cast<std::uint32_t>(pf.p);
            v /= static_cast<std::uint32_t>(pf.p);
        }
    }
    FqElem g = multiplicative_generator(ctx);
    pf.log_tab.assign(pf.q, 0);
    pf.exp_tab.assign(pf.q - 1, 0);
    FqElem cur = fq_one(ctx);
    for (std::uint32_t k = 0; k < pf.q - 1; ++k) {
        std::uint32_t idx = static_cast<std::uint32_t>(fq_index(ctx, cur));
        pf.exp_tab[k] = idx;
        pf.log_tab[idx] = k;
        cur = fq_mul(ctx, cur, g);
    }
    return pf;
}

inline std::uint32_t packed_det(const PackedFq& f, std::vector<std::uint32_t> m,
                                int n) {
    std::uint32_t det = 1;
    for (int col = 0; col < n; ++col) {
        int piv = -1;
        for (int row = col; row < n; ++row)
            if (m[row * n + col]) {
                piv = row;
                break;
            }
        if (piv < 0) return 0;
        if (piv != col) {
            for (int j = 0; j < n; ++j) std::swap(m[piv * n + j], m[col * n + j]);
            det = f.neg(det);
        }
        det = f.mul(det, m[col * n + col]);
        std::uint32_t inv = f.inv(m[col * n + col]);
        for (int row = col + 1; row < n; ++row) {
            std::uint32_t c = m[row * n + col];
            if (!c) continue;
            c = f.mul(c, inv);
            for (int j = col; j < n; ++j)
                m[row * n + j] =
                    f.add(m[row * n + j], f.neg(f.mul(c, m[col * n + j])));
        }
    }
    return det;
}

}  // namespace detail

/// Exact |SO(q)| by exhaustive enumeration of matrices, organized column by
/// column so that Gram constraints prune the search; the result is exactly
/// the number of matrices passing is_special_isometry. Guarded by
/// q^(dim^2) <= 10^8.
inline Int brute_force_so_count(const FqForm& q) {
    Int space = 1;
    for (int i = 0; i < q.dim * q.dim; ++i) space *= q.ctx.q;
    if (space > 100000000) throw TooLarge("brute force guard q^(dim^2) <= 1e8");
    detail::PackedFq f = detail::pack_context(q.ctx);
    int n = q.dim;
    std::vector<std::uint32_t> diag(n);
    for (int i = 0; i < n; ++i)
        diag[i] = static_cast<std::uint32_t>(fq_index(q.ctx, q.diagonal[i]));
    // all vectors of F_q^n
    std::size_t total = 1;
    for (int i = 0; i < n; ++i) total *= f.q;
    std::vector<std::uint32_t> vecs(total * n);
    {
        std::vector<std::uint32_t> v(n, 0);
        for (std::size_t idx = 0;; ++idx) {
            for (int i = 0; i < n; ++i) vecs[idx * n + i] = v[i];
            int pos = 0;
            while (pos < n && v[pos] == f.q - 1) v[pos++] = 0;
            if (pos == n) break;
            ++v[pos];
        }
    }
    auto dot = [&](const std::uint32_t* a, const std::uint32_t* b) {
        std::uint32_t s = 0;
        for (int i = 0; i < n; ++i) s = f.add(s, f.mul(diag[i], f.mul(a[i], b[i])));
        return s;
    };
    std::uint64_t count = 0;
    std::vector<const std::uint32_t*> cols(n);
    auto rec = [&](auto&& self, int k) -> void {
        if (k == n) {
            std::vector<std::uint32_t> m(n * n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) m[i * n + j] = cols[j][i];
            if (detail::packed_det(f, std::move(m), n) == 1) ++count;
            return;
        }
        for (std::size_t idx = 0; idx < total; ++idx) {
            const std::uint32_t* v = &vecs[idx * n];
            if (dot(v, v) != diag[k]) continue;
            bool ok = true;
            for (int j = 0; j < k; ++j)
                if (dot(cols[j], v) != 0) {
                    ok = false;
                    break;
                }
            if (!ok) continue;
            cols[k] = v;
            self(self, k + 1);
        }
    };
    rec(rec, 0);
    return Int(static_cast<unsigned long>(count));
}

/// Independent second oracle: |O(q)| = S(a_1) * |O(q restricted to the
/// orthogonal complement of e_1)| with sphere counts S by full vector
/// enumeration; returns |O|/2. Guarded by q^dim <= 10^7 at every level.
inline Int point_count_so_order(const FqForm& q) {
    detail::PackedFq f = detail::pack_context(q.ctx);
    std::vector<std::uint32_t> diag(q.dim);
    for (int i = 0; i < q.dim; ++i)
        diag[i] = static_cast<std::uint32_t>(fq_index(q.ctx, q.diagonal[i]));
    Int order_O = 1;
    for (int level = 0; level + 1 < q.dim; ++level) {
        int k = q.dim - level;  // dimension at this level
        Int space = 1;
        for (int i = 0; i < k; ++i) space *= q.ctx.q;
        if (space > 10000000) throw TooLarge("point count guard q^dim <= 1e7");
        const std::uint32_t target = diag[level];
        std::uint64_t sphere = 0;
        std::vector<std::uint32_t> v(k, 0);
        for (;;) {
            std::uint32_t s = 0;
            for (int i = 0; i < k; ++i)
                s = f.add(s, f.mul(diag[level + i], f.mul(v[i], v[i])));
            if (s == target) ++sphere;
            int pos = 0;
            while (pos < k && v[pos] == f.q - 1) v[pos++] = 0;
            if (pos == k) break;
            ++v[pos];
        }
        order_O *= Int(static_cast<unsigned long>(sphere));
    }
    order_O *= 2;  // |O| of the 1-dimensional tail
    return order_O / 2;
}

// ---------------------------------------------------------------------------
// hyperbolic decomposition and cyclic witnesses
// ---------------------------------------------------------------------------

namespace detail {

inline FqVector mat_apply(const FqContext& ctx, const std::vector<FqVector>& basis,
                          const FqVector& coords) {
    int dim = static_cast<int>(basis[0].size());
    FqVector out(dim, fq_zero(ctx));
    for (std::size_t j = 0; j < basis.size(); ++j)
        for (int i = 0; i < dim; ++i)
            out[i] = fq_add(ctx, out[i], fq_mul(ctx, coords[j], basis[j][i]));
    return out;
}

inline FqElem gram_entry(const FqContext& ctx, const FqMatrix& g, const FqVector& u,
                         const FqVector& v) {
    FqElem s = fq_zero(ctx);
    for (int i = 0; i < g.dim; ++i) {
        if (fq_is_zero(u[i])) continue;
        FqElem row = fq_zero(ctx);
        for (int j = 0; j < g.dim; ++j)
            row = fq_add(ctx, row, fq_mul(ctx, g.at(i, j), v[j]));
        s = fq_add(ctx, s, fq_mul(ctx, u[i], row));
    }
    return s;
}

// Nullspace basis of a (rows x n) system over F_q.
inline std::vector<FqVector> nullspace(const FqContext& ctx,
                                       std::vector<FqVector> rows, int n) {
    int nrows = static_cast<int>(rows.size());
    std::vector<int> pivot_col;
    int rank = 0;
    for (int col = 0; col < n && rank < nrows; ++col) {
        int piv = -1;
        for (int row = rank; row < nrows; ++row)
            if (!fq_is_zero(rows[row][col])) {
                piv = row;
                break;
            }
        if (piv < 0) continue;
        std::swap(rows[piv], rows[rank]);
        FqElem inv = fq_inv(ctx, rows[rank][col]);
        for (int j = 0; j < n; ++j) rows[rank][j] = fq_mul(ctx, rows[rank][j], inv);
        for (int row = 0; row < nrows; ++row) {
            if (row == rank || fq_is_zero(rows[row][col])) continue;
            FqElem c = rows[row][col];
            for (int j = 0; j < n; ++j)
                rows[row][j] =
                    fq_sub(ctx, rows[row][j], fq_mul(ctx, c, rows[rank][j]));
        }
        pivot_col.push_back(col);
        ++rank;
    }
    std::vector<bool> is_pivot(n, false);
    for (int c : pivot_col) is_pivot[c] = true;
    std::vector<FqVector> out;
    for (int col = 0; col < n; ++col) {
        if (is_pivot[col]) continue;
        FqVector v(n, fq_zero(ctx));
        v[col] = fq_one(ctx);
        for (int r2 = 0; r2 < rank; ++r2)
            v[pivot_col[r2]] = fq_neg(ctx, rows[r2][col]);
        out.push_back(std::move(v));
    }
    return out;
}

// Orthogonal diagonalization of a symmetric Gram matrix: returns basis
// vectors (in the given coordinates) whose pairwise pairings vanish.
inline std::vector<FqVector> diagonalize_gram(const FqContext& ctx, FqMatrix g) {
    int n = g.dim;
    std::vector<FqVector> basis;  // original coordinates
    std::vector<FqVector> space;  // current complement basis, original coords
    for (int i = 0; i < n; ++i) {
        FqVector e(n, fq_zero(ctx));
        e[i] = fq_one(ctx);
        space.push_back(std::move(e));
    }
    while (!space.empty()) {
        int k = static_cast<int>(space.size());
        // find a vector of nonzero length in the current complement
        FqVector v;
        bool found = false;
        for (int i = 0; i < k && !found; ++i)
            if (!fq_is_zero(gram_entry(ctx, g, space[i], space[i]))) {
                v = space[i];
                found = true;
            }
        for (int i = 0; i < k && !found; ++i)
            for (int j = i + 1; j < k && !found; ++j)
                if (!fq_is_zero(gram_entry(ctx, g, space[i], space[j]))) {
                    v = space[i];
                    for (int t = 0; t < n; ++t)
                        v[t] = fq_add(ctx, v[t], space[j][t]);
                    found = true;
                }
        if (!found) throw error("degenerate form in diagonalization");
        basis.push_back(v);
        // restrict to the orthogonal complement of v inside the space
        std::vector<FqVector> rows;
        FqVector row(k, fq_zero(ctx));
        for (int i = 0; i < k; ++i) row[i] = gram_entry(ctx, g, v, space[i]);
        rows.push_back(row);
        auto coords = nullspace(ctx, rows, k);
        std::vector<FqVector> next;
        for (const auto& c : coords) next.push_back(mat_apply(ctx, space, c));
        space = std::move(next);
    }
    return basis;
}

// An isotropic vector of a nondegenerate symmetric Gram matrix of dimension
// >= 2, expressed in the given coordinates. Deterministic for a fixed seed.
inline FqVector isotropic_vector(const FqContext& ctx, const FqMatrix& g,
                                 std::mt19937_64& rng) {
    int n = g.dim;
    if (n == 2) {
        FqElem alpha = g.at(0, 0), beta = g.at(0, 1), gamma = g.at(1, 1);
        if (fq_is_zero(alpha)) {
            FqVector v(2, fq_zero(ctx));
            v[0] = fq_one(ctx);
            return v;
        }
        // alpha x^2 + 2 beta x + gamma = 0 at v = (x, 1)
        FqElem delta = fq_sub(ctx, fq_mul(ctx, beta, beta), fq_mul(ctx, alpha, gamma));
        std::optional<FqElem> s =
            fq_is_zero(delta) ? std::optional<FqElem>(fq_zero(ctx)) : fq_sqrt(ctx, delta);
        if (!s) throw NoIsotropicVector("binary form is anisotropic");
        FqVector v(2, fq_zero(ctx));
        v[0] = fq_div(ctx, fq_sub(ctx, *s, beta), alpha);
        v[1] = fq_one(ctx);
        return v;
    }
    // diagonalize, then solve d1 x1^2 + d2 x2^2 = -(tail) with random tails
    auto basis = diagonalize_gram(ctx, g);
    std::vector<FqElem> d(n);
    for (int i = 0; i < n; ++i) d[i] = gram_entry(ctx, g, basis[i], basis[i]);
    for (int tries = 0; tries < 4000; ++tries) {
        FqVector coords(n, fq_zero(ctx));
        FqElem tail = fq_zero(ctx);
        bool tail_zero = true;
        for (int i = 2; i < n; ++i) {
            for (int c = 0; c < ctx.r; ++c) coords[i].c[c] = rng() % ctx.p;
            if (!fq_is_zero(coords[i])) tail_zero = false;
            tail = fq_add(ctx, tail,
                          fq_mul(ctx, d[i], fq_mul(ctx, coords[i], coords[i])));
        }
        for (int c = 0; c < ctx.r; ++c) coords[1].c[c] = rng() % ctx.p;
        // d0 x0^2 = -(tail + d1 x1^2)
        FqElem rhs = fq_neg(
            ctx, fq_add(ctx, tail,
                        fq_mul(ctx, d[1], fq_mul(ctx, coords[1], coords[1]))));
        FqElem target = fq_div(ctx, rhs, d[0]);
        if (fq_is_zero(target)) {
            if (tail_zero && fq_is_zero(coords[1])) continue;
            coords[0] = fq_zero(ctx);
        } else {
            auto s = fq_sqrt(ctx, target);
            if (!s) continue;
            coords[0] = *s;
        }
        return mat_apply(ctx, basis, coords);
    }
    throw SearchBudgetExceeded("isotropic vector search");
}

}  // namespace detail

/// Basis change B with B^T G B block diagonal of hyperbolic planes
/// [[0,1],[1,0]]. The Gram matrix must be even dimensional of split type
/// (square discriminant in the sign-adjusted sense).
inline FqMatrix witt_hyperbolic_basis_gram(const FqContext& ctx, const FqMatrix& g,
                                           std::uint64_t seed = 0) {
    int n = g.dim;
    if (n % 2 != 0) throw EvenDimension("hyperbolic decomposition needs even dim");
    std::mt19937_64 rng(seed ^ 0x9e3779b9ULL);
    std::vector<FqVector> columns;
    // current complement: basis vectors in original coordinates
    std::vector<FqVector> space;
    for (int i = 0; i < n; ++i) {
        FqVector e(n, fq_zero(ctx));
        e[i] = fq_one(ctx);
        space.push_back(std::move(e));
    }
    while (!space.empty()) {
        int k = static_cast<int>(space.size());
        // Gram of the current complement
        FqMatrix gc = mat_zero(ctx, k);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j)
                gc.at(i, j) = detail::gram_entry(ctx, g, space[i], space[j]);
        FqVector u_loc = detail::isotropic_vector(ctx, gc, rng);
        // partner: any basis vector pairing nontrivially with u
        FqVector z(k, fq_zero(ctx));
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j)
                z[i] = fq_add(ctx, z[i], fq_mul(ctx, gc.at(i, j), u_loc[j]));
        int pick = -1;
        for (int i = 0; i < k; ++i)
            if (!fq_is_zero(z[i])) {
                pick = i;
                break;
            }
        if (pick < 0) throw error("isotropic vector in the radical");
        FqVector w_loc(k, fq_zero(ctx));
        w_loc[pick] = fq_inv(ctx, z[pick]);  // B(u, w) = 1
        // make w isotropic: w -= (q(w)/2) u
        FqElem qw = fq_zero(ctx);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j)
                qw = fq_add(ctx, qw,
                            fq_mul(ctx, w_loc[i], fq_mul(ctx, gc.at(i, j), w_loc[j])));
        FqElem half_qw = fq_div(ctx, qw, fq_from_int(ctx, 2));
        for (int i = 0; i < k; ++i)
            w_loc[i] = fq_sub(ctx, w_loc[i], fq_mul(ctx, half_qw, u_loc[i]));
        FqVector u = detail::mat_apply(ctx, space, u_loc);
        FqVector w = detail::mat_apply(ctx, space, w_loc);
        columns.push_back(u);
        columns.push_back(w);
        // complement of the plane <u, w> inside the current space
        std::vector<FqVector> rows(2, FqVector(k, fq_zero(ctx)));
        for (int i = 0; i < k; ++i) {
            rows[0][i] = detail::gram_entry(ctx, g, u, space[i]);
            rows[1][i] = detail::gram_entry(ctx, g, w, space[i]);
        }
        auto coords = detail::nullspace(ctx, rows, k);
        if (static_cast<int>(coords.size()) != k - 2)
            throw error("hyperbolic plane complement has wrong dimension");
        std::vector<FqVector> next;
        for (const auto& c : coords) next.push_back(detail::mat_apply(ctx, space, c));
        space = std::move(next);
    }
    FqMatrix b = mat_zero(ctx, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) b.at(i, j) = columns[j][i];
    // sanity: B^T G B must be the block hyperbolic Gram
    FqMatrix check = mat_mul(ctx, mat_transpose(ctx, b), mat_mul(ctx, g, b));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            bool plane = (i / 2 == j / 2) && i != j;
            const FqElem want = plane ? fq_one(ctx) : fq_zero(ctx);
            if (!(check.at(i, j) == want))
                throw error("hyperbolic decomposition verification failed");
        }
    return b;
}

inline FqMatrix witt_hyperbolic_basis(const FqForm& q, std::uint64_t seed = 0) {
    if (q.dim % 2 != 0) throw EvenDimension("hyperbolic decomposition needs even dim");
    if (q.square_class != SquareClass::square)
        throw NotSquareDisc("form is not of split type");
    return witt_hyperbolic_basis_gram(q.ctx, gram_matrix(q), seed);
}

/// g = B diag(lambda, lambda^{-1}, ...) B^{-1}: a special isometry whose
/// multiplicative order equals the order of lambda, with n eigenvalues
/// lambda and n eigenvalues lambda^{-1}.
inline FqMatrix build_cyclic_generator(const FqForm& q, const FqElem& lambda,
                                       std::uint64_t seed = 0) {
    const FqContext& ctx = q.ctx;
    if (fq_is_zero(lambda)) throw ZeroInput("lambda must be a unit");
    FqMatrix b = witt_hyperbolic_basis(q, seed);
    FqMatrix d = mat_zero(ctx, q.dim);
    FqElem li = fq_inv(ctx, lambda);
    for (int i = 0; i < q.dim; i += 2) {
        d.at(i, i) = lambda;
        d.at(i + 1, i + 1) = li;
    }
    FqMatrix g = mat_mul(ctx, b, mat_mul(ctx, d, mat_inverse(ctx, b)));
    if (!is_special_isometry(q, g))
        throw error("cyclic generator failed the isometry check");
    return g;
}

/// True iff no g^{a t} for 0 < t < ell has eigenvalue +1 or -1, decided by
/// evaluating the characteristic polynomial at +/-1.
inline bool eigenvalue_pm1_avoidance(const FqContext& ctx, const FqMatrix& g,
                                     const Int& a, const Int& ell) {
    if (ell < 2 || ell > 1000000) throw error("eigenvalue check needs 2 <= ell <= 1e6");
    FqMatrix ga = mat_pow(ctx, g, a);
    FqMatrix cur = ga;
    FqMatrix id = mat_identity(ctx, g.dim);
    unsigned long l = ell.get_ui();
    for (unsigned long t = 1; t < l; ++t) {
        FqMatrix m_plus = mat_zero(ctx, g.dim), m_minus = mat_zero(ctx, g.dim);
        for (int i = 0; i < g.dim; ++i)
            for (int j = 0; j < g.dim; ++j) {
                m_plus.at(i, j) = fq_sub(ctx, id.at(i, j), cur.at(i, j));
                m_minus.at(i, j) =
                    fq_sub(ctx, fq_neg(ctx, id.at(i, j)), cur.at(i, j));
            }
        if (fq_is_zero(mat_det(ctx, m_plus))) return false;
        if (fq_is_zero(mat_det(ctx, m_minus))) return false;
        cur = mat_mul(ctx, cur, ga);
    }
    return true;
}

/// Cauchy witness: an element of exact order ell found by powering random
/// elements to the ell-free part of the group order. Deterministic per seed.
inline FqMatrix find_order_l_element(const FqForm& q, const Int& ell,
                                     const FactoredOrder& group_order,
                                     std::uint64_t seed) {
    const FqContext& ctx = q.ctx;
    Int n = evaluate(group_order);
    if (n % ell != 0) throw error("ell does not divide the group order");
    Int cofactor = n;
    while (cofactor % ell == 0) cofactor /= ell;
    FqMatrix id = mat_identity(ctx, q.dim);
    std::mt19937_64 master(seed ^ 0xcafef00dULL);
    for (int attempt = 0; attempt < 10000; ++attempt) {
        FqMatrix h = random_so_element(q, master());
        FqMatrix x = mat_pow(ctx, h, cofactor);
        if (x == id) continue;
        // x has order ell^j for some j >= 1; descend to exact order ell
        for (;;) {
            FqMatrix xl = mat_pow(ctx, x, ell);
            if (xl == id) return x;
            x = std::move(xl);
        }
    }
    throw SearchBudgetExceeded("no element of order ell found");
}

/// Exact multiplicative order of a matrix given a multiple of it (typically
/// the group order), by divisor descent; never iterates naively.
inline Int matrix_order(const FqContext& ctx, const FqMatrix& m, const Int& multiple) {
    FqMatrix id = mat_identity(ctx, m.dim);
    if (!(mat_pow(ctx, m, multiple) == id))
        throw error("given multiple is not an exponent annihilating the matrix");
    Int order = multiple;
    for (const auto& [s, e] : factorize(multiple)) {
        for (unsigned i = 0; i < e; ++i) {
            Int cand = order / s;
            if (mat_pow(ctx, m, cand) == id)
                order = cand;
            else
                break;
        }
    }
    return order;
}

}  // namespace orbicover
