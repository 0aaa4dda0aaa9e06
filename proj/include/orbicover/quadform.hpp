// Diagonal quadratic forms over a totally real field and their reductions
// modulo prime ideals. Admissibility means positive definite at every real
// place except one of signature (m,1). The reduction carries the data that
// classifies the finite orthogonal group: dimension, discriminant
// (sign-adjusted determinant) and its square class.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "orbicover/errors.hpp"
#include "orbicover/finfield.hpp"
#include "orbicover/numfield.hpp"

namespace orbicover {

struct QuadraticForm {
    std::vector<FieldElem> diagonal;  // length m+1, all entries nonzero in k
};

struct AdmissiblePair {
    NumberField field;
    QuadraticForm form;
    int m = 0;                    // dim q = m + 1
    int distinguished_place = 0;  // index of the real place of signature (m,1)
};

enum class SquareClass { square, nonsquare };

struct FqForm {
    FqContext ctx;
    std::vector<FqElem> diagonal;
    int dim = 0;
    FqElem det;   // product of the diagonal entries
    FqElem disc;  // (-1)^(d(d-1)/2) * det; this is what classifies the group
    std::optional<SquareClass> square_class;  // defined for even dim
};

inline QuadraticForm make_quadratic_form(const NumberField& k,
                                         std::vector<FieldElem> diagonal) {
    for (const auto& e : diagonal) {
        if (static_cast<int>(e.coeffs.size()) != k.degree)
            throw error("diagonal entry has wrong coefficient length");
        if (elem_is_zero(e))
            throw ZeroEntryAtPlace("diagonal entries must be nonzero in k");
    }
    if (diagonal.empty()) throw error("empty diagonal");
    return QuadraticForm{std::move(diagonal)};
}

/// Certified signature (positives, negatives) of the form at one real place.
inline std::pair<int, int> signature_at(const NumberField& k, const QuadraticForm& q,
                                        int place) {
    int pos = 0, neg = 0;
    for (const auto& e : q.diagonal) {
        int s = certified_sign_at(k, e, place);
        if (s == 0) throw ZeroEntryAtPlace("diagonal entry vanishes at this place");
        (s > 0 ? pos : neg) += 1;
    }
    return {pos, neg};
}

/// Checks the full signature profile: exactly one real place of signature
/// (m,1), positive definite elsewhere, m >= 3.
inline AdmissiblePair is_admissible(const NumberField& k, const QuadraticForm& q) {
    if (!is_totally_real(k)) throw NotTotallyReal("field is not totally real");
    int dim = static_cast<int>(q.diagonal.size());
    int m = dim - 1;
    if (m < 3) throw DimensionTooSmall("admissible pairs require m >= 3");
    int distinguished = -1;
    for (int place = 0; place < static_cast<int>(k.real_roots.size()); ++place) {
        auto [pos, neg] = signature_at(k, q, place);
        if (pos == dim && neg == 0) continue;
        if (pos == m && neg == 1) {
            if (distinguished >= 0)
                throw WrongSignatureProfile(
                    "signature (m,1) at more than one real place");
            distinguished = place;
            continue;
        }
        throw WrongSignatureProfile("place " + std::to_string(place) +
                                    " has signature (" + std::to_string(pos) + "," +
                                    std::to_string(neg) + ")");
    }
    if (distinguished < 0)
        throw WrongSignatureProfile("no real place of signature (m,1)");
    return AdmissiblePair{k, q, m, distinguished};
}

inline FqForm make_fq_form(const FqContext& ctx, std::vector<FqElem> diagonal) {
    FqForm f;
    f.dim = static_cast<int>(diagonal.size());
    f.det = fq_one(ctx);
    for (const auto& e : diagonal) f.det = fq_mul(ctx, f.det, e);
    long twists = (static_cast<long>(f.dim) * (f.dim - 1) / 2) % 2;
    f.disc = twists ? fq_neg(ctx, f.det) : f.det;
    if (f.dim % 2 == 0 && !fq_is_zero(f.disc))
        f.square_class = is_square(ctx, f.disc) ? SquareClass::square
                                                : SquareClass::nonsquare;
    f.ctx = ctx;
    f.diagonal = std::move(diagonal);
    return f;
}

/// Reduction of the pair's form at a prime ideal factor. Degenerate
/// reductions (a diagonal entry mapping to zero) are rejected: the prime is
/// excluded from the good set.
inline FqForm reduce_form(const AdmissiblePair& pair, const PrimeIdealFactor& pf) {
    FqContext ctx = residue_context(pf);
    std::vector<FqElem> diag;
    diag.reserve(pair.form.diagonal.size());
    for (const auto& e : pair.form.diagonal) {
        FqElem r = reduce_element(pair.field, e, pf, ctx);
        if (fq_is_zero(r)) throw BadReduction("diagonal entry reduces to zero");
        diag.push_back(std::move(r));
    }
    return make_fq_form(ctx, std::move(diag));
}

/// A convenient diagonal form of prescribed dimension and square class over
/// F_q, used by the order oracles: all ones, with the last entry adjusted so
/// the discriminant lands in the requested class.
inline FqForm make_canonical_fq_form(const FqContext& ctx, int dim,
                                     std::optional<SquareClass> cls) {
    if (dim < 1) throw DimensionTooSmall("canonical form needs dim >= 1");
    if (dim % 2 == 0 && !cls) throw MissingSquareClass("even dimension needs a class");
    std::vector<FqElem> diag(dim, fq_one(ctx));
    if (dim % 2 == 0) {
        int n = dim / 2;
        FqElem last = fq_one(ctx);
        if (n % 2 == 1) last = fq_neg(ctx, last);  // make (-1)^(d(d-1)/2)*det = 1
        if (*cls == SquareClass::nonsquare) {
            FqElem u = fq_one(ctx);
            for (std::uint64_t idx = 1;; ++idx) {
                u = fq_from_index(ctx, idx);
                if (!fq_is_zero(u) && !is_square(ctx, u)) break;
            }
            last = fq_mul(ctx, last, u);
        }
        diag[dim - 1] = last;
    }
    FqForm f = make_fq_form(ctx, std::move(diag));
    if (dim % 2 == 0 && f.square_class != cls)
        throw error("canonical form construction failed to hit the square class");
    return f;
}

}  // namespace orbicover
