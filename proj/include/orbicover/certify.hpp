// The certificate pipeline: enumerate good primes of an admissible pair,
// select cover primes, assemble equivalence / isospectral-pair / tower
// certificates as versioned JSON ("orbicover/1"), and re-verify certificates
// from scratch without consulting any cached state.
#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <openssl/evp.h>

#include <json.hpp>

#include "orbicover/errors.hpp"
#include "orbicover/matgroup.hpp"
#include "orbicover/numfield.hpp"
#include "orbicover/orders.hpp"
#include "orbicover/quadform.hpp"

namespace orbicover {

using json = nlohmann::json;

inline constexpr const char* kSchemaVersion = "orbicover/1";

// ---------------------------------------------------------------------------
// good primes
// ---------------------------------------------------------------------------

struct GoodPrime {
    PrimeIdealFactor pf;
    FqForm fqform;
    FactoredOrder group_order;
    std::string type_label;
};

struct PrimeExclusion {
    std::uint64_t p = 0;
    std::optional<PolyFp> factor_poly;  // set for per-ideal exclusions
    std::string reason;  // dyadic | divides_poly_disc | denominator | bad_reduction
};

struct GoodPrimeScan {
    std::vector<GoodPrime> good;
    std::vector<PrimeExclusion> excluded;
};

/// All good reductions of the pair at odd rational primes <= bound, plus
/// the excluded primes with machine-checkable reasons. Deterministically
/// ordered by (p, factor_poly).
inline GoodPrimeScan good_primes(const AdmissiblePair& pair, std::uint64_t bound) {
    if (bound < 3) throw error("good_primes requires bound >= 3");
    GoodPrimeScan scan;
    if (bound >= 2) scan.excluded.push_back({2, std::nullopt, "dyadic"});
    for (std::uint32_t p : small_primes()) {
        if (p > bound) break;
        if (p == 2) continue;
        if (mpz_divisible_ui_p(pair.field.poly_disc.get_mpz_t(), p)) {
            scan.excluded.push_back({p, std::nullopt, "divides_poly_disc"});
            continue;
        }
        bool bad_den = false;
        for (const auto& e : pair.form.diagonal)
            for (const auto& c : e.coeffs)
                if (mpz_divisible_ui_p(c.get_den().get_mpz_t(), p)) bad_den = true;
        if (bad_den) {
            scan.excluded.push_back({p, std::nullopt, "denominator"});
            continue;
        }
        for (const auto& pf : factor_prime(pair.field, p)) {
            try {
                FqForm red = reduce_form(pair, pf);
                FactoredOrder go = so_order(red.dim, p, pf.residue_degree,
                                            red.square_class);
                scan.good.push_back(GoodPrime{pf, std::move(red), go, go.label});
            } catch (const BadReduction&) {
                scan.excluded.push_back({p, pf.factor_poly, "bad_reduction"});
            }
        }
    }
    return scan;
}

// ---------------------------------------------------------------------------
// certificate data
// ---------------------------------------------------------------------------

struct CertOptions {
    CertMode mode = CertMode::paper;
    bool with_witness = false;
    std::uint64_t seed = 0;
};

struct Witness {
    FqMatrix matrix;
    Int order;
    bool eigenvalue_ok = true;  // matrix-level check on the even-square branch
};

struct EquivalenceCertificate {
    AdmissiblePair pair;
    GoodPrime prime;
    CoverPrime cover;
    std::optional<Witness> witness;
    CertMode mode = CertMode::paper;
    std::uint64_t seed = 0;
};

struct PairLeg {
    GoodPrime prime;
    CoverPrime cover;
    std::optional<Witness> witness;
};

struct IsospectralPairCertificate {
    AdmissiblePair pair;
    std::uint64_t p = 0;
    PairLeg legs[2];
    Int shared_ell;
    CertMode mode = CertMode::paper;
    std::uint64_t seed = 0;
};

enum class TowerStrategy { same_ell_many_primes, many_distinct_ells };

struct TowerStage {
    std::vector<std::size_t> prime_indices;  // into primes
    Int ell;
    Int volume_ratio;
};

struct TowerCertificate {
    AdmissiblePair pair;
    std::vector<std::pair<GoodPrime, CoverPrime>> primes;  // only those the stages use
    std::vector<TowerStage> stages;
    TowerStrategy strategy = TowerStrategy::same_ell_many_primes;
    CertMode mode = CertMode::paper;
    std::uint64_t seed = 0;
};

// ---------------------------------------------------------------------------
// building
// ---------------------------------------------------------------------------

namespace detail {

inline Witness make_witness(const GoodPrime& gp, const CoverPrime& cp,
                            std::uint64_t seed) {
    const FqContext& ctx = gp.fqform.ctx;
    if (cp.branch == CoverBranch::even_square_disc) {
        FqElem lambda = multiplicative_generator(ctx);
        FqMatrix gfull = build_cyclic_generator(gp.fqform, lambda, seed);
        Int a = (ctx.q - 1) / cp.ell;
        bool eig = eigenvalue_pm1_avoidance(ctx, gfull, a, cp.ell);
        if (!eig) throw error("torus witness failed the eigenvalue criterion");
        return Witness{mat_pow(ctx, gfull, a), cp.ell, true};
    }
    FqMatrix w = find_order_l_element(gp.fqform, cp.ell, gp.group_order, seed);
    return Witness{std::move(w), cp.ell, true};
}

}  // namespace detail

/// Single-prime certificate: the covers attached to the pullbacks of {1}
/// and of the cyclic subgroup of order ell are geometrically equivalent
/// with volume ratio ell.
inline EquivalenceCertificate build_certificate(const AdmissiblePair& pair,
                                                const GoodPrime& gp,
                                                const CertOptions& opts) {
    EquivalenceCertificate cert;
    cert.pair = pair;
    cert.prime = gp;
    cert.cover = select_cover_prime(gp.fqform, pair.m, opts.mode);
    cert.mode = opts.mode;
    cert.seed = opts.seed;
    if (opts.with_witness)
        cert.witness = detail::make_witness(gp, cert.cover, opts.seed);
    return cert;
}

namespace detail {

// Shared cover prime for two legs over the same rational prime. When both
// branches agree the deterministic per-leg selection already coincides;
// otherwise search the odd primes dividing both group orders for one that
// is valid on each side.
inline std::optional<Int> shared_ell_for(const GoodPrime& a, const GoodPrime& b,
                                         int m, CertMode mode, CoverPrime& cov_a,
                                         CoverPrime& cov_b) {
    cov_a = select_cover_prime(a.fqform, m, mode);
    cov_b = select_cover_prime(b.fqform, m, mode);
    if (cov_a.ell == cov_b.ell) return cov_a.ell;
    auto valid_for = [&](const Int& ell, const GoodPrime& gp, CoverPrime& out) {
        const FqForm& q = gp.fqform;
        CoverBranch branch =
            q.dim % 2 == 1
                ? CoverBranch::odd_dim
                : (*q.square_class == SquareClass::nonsquare
                       ? CoverBranch::even_nonsquare_disc
                       : CoverBranch::even_square_disc);
        if (branch == CoverBranch::even_square_disc) {
            Int prm1 = pow_int(Int(static_cast<unsigned long>(q.ctx.p)),
                               static_cast<unsigned>(q.ctx.r)) - 1;
            if (prm1 % ell != 0) return false;
            CoverPrime cp;
            cp.branch = branch;
            cp.d = static_cast<unsigned>(q.ctx.r);
            cp.ell = ell;
            cp.report.push_back(detail::eigenvalue_check(ell, q.ctx.q));
            if (!cp.report.back().passed) return false;
            if (mode == CertMode::strict)
                detail::append_strict_checks(cp.report, ell, q, m);
            out = std::move(cp);
            return true;
        }
        if (!prime_divides_factored(ell, gp.group_order)) return false;
        CoverPrime cp;
        cp.branch = branch;
        cp.d = static_cast<unsigned>(q.dim / 2) * static_cast<unsigned>(q.ctx.r);
        cp.ell = ell;
        int coarse_dim = q.dim % 2 == 1 ? q.dim : q.dim + 1;
        FactoredOrder coarse = coarse_lemma_bound(coarse_dim, q.ctx.p, q.ctx.r);
        cp.report.push_back(detail::divisor_check(ell, coarse, true));
        if (!cp.report.back().passed) return false;
        detail::append_diagnostics(cp.report, ell, q, m);
        if (mode == CertMode::strict)
            detail::append_strict_checks(cp.report, ell, q, m);
        out = std::move(cp);
        return true;
    };
    // candidates: odd primes dividing both prime-to-p order parts
    auto fa = factorize(prime_to_p_part(a.group_order));
    auto fb = factorize(prime_to_p_part(b.group_order));
    for (const auto& [ell, e] : fa) {
        if (ell == 2 || fb.find(ell) == fb.end()) continue;
        CoverPrime ca, cb;
        if (valid_for(ell, a, ca) && valid_for(ell, b, cb)) {
            cov_a = std::move(ca);
            cov_b = std::move(cb);
            return ell;
        }
    }
    return std::nullopt;
}

}  // namespace detail

/// Isospectral-pair certificate: two primes over the same rational prime
/// with isomorphic residue fields and one odd prime ell valid for both,
/// giving the three covers M_{ell,1}, M_{1,ell}, M_{ell,ell}.
inline IsospectralPairCertificate build_pair_certificate(const AdmissiblePair& pair,
                                                         std::uint64_t bound,
                                                         const CertOptions& opts) {
    if (pair.field.degree < 2)
        throw FieldIsRationals("pair certificates need field degree >= 2");
    GoodPrimeScan scan = good_primes(pair, bound);
    bool saw_split = false;
    for (std::size_t i = 0; i < scan.good.size(); ++i) {
        for (std::size_t j = i + 1; j < scan.good.size(); ++j) {
            const GoodPrime& a = scan.good[i];
            const GoodPrime& b = scan.good[j];
            if (a.pf.p != b.pf.p || a.pf.residue_degree != b.pf.residue_degree)
                continue;
            saw_split = true;
            CoverPrime ca, cb;
            auto shared = detail::shared_ell_for(a, b, pair.m, opts.mode, ca, cb);
            if (!shared) continue;
            IsospectralPairCertificate cert;
            cert.pair = pair;
            cert.p = a.pf.p;
            cert.legs[0] = PairLeg{a, ca, std::nullopt};
            cert.legs[1] = PairLeg{b, cb, std::nullopt};
            cert.shared_ell = *shared;
            cert.mode = opts.mode;
            cert.seed = opts.seed;
            if (opts.with_witness) {
                cert.legs[0].witness = detail::make_witness(a, ca, opts.seed);
                cert.legs[1].witness = detail::make_witness(b, cb, opts.seed + 1);
            }
            return cert;
        }
    }
    if (saw_split) throw NoCommonEll("no odd prime works for both legs");
    throw NoSplitPrimeInBound("no split prime with good reduction within bound");
}

/// Tower certificate: strictly increasing volume ratios, either ell^j from
/// j primes sharing one ell, or distinct ells from distinct primes.
inline TowerCertificate build_tower_certificate(const AdmissiblePair& pair,
                                                int j_max, std::uint64_t bound,
                                                const CertOptions& opts) {
    if (j_max < 1) throw error("tower requires j_max >= 1");
    GoodPrimeScan scan = good_primes(pair, bound);
    TowerCertificate cert;
    cert.pair = pair;
    cert.mode = opts.mode;
    cert.seed = opts.seed;
    std::vector<std::pair<GoodPrime, CoverPrime>> usable;
    std::map<Int, std::vector<std::size_t>> by_ell;  // indices into usable
    for (const auto& gp : scan.good) {
        try {
            CoverPrime cp = select_cover_prime(gp.fqform, pair.m, opts.mode);
            by_ell[cp.ell].push_back(usable.size());
            usable.emplace_back(gp, std::move(cp));
        } catch (const NoOddPrimeDivisor&) {
            // p^r - 1 a power of two on the even-square branch: prime skipped
        }
    }
    const std::vector<std::size_t>* same_ell = nullptr;
    Int same_ell_value;
    for (const auto& [ell, idxs] : by_ell) {
        if (static_cast<int>(idxs.size()) >= j_max) {
            same_ell = &idxs;
            same_ell_value = ell;
            break;  // std::map iterates ascending: smallest such ell
        }
    }
    if (same_ell) {
        cert.strategy = TowerStrategy::same_ell_many_primes;
        for (int j = 0; j < j_max; ++j)
            cert.primes.push_back(usable[(*same_ell)[j]]);
        Int ratio = 1;
        for (int j = 1; j <= j_max; ++j) {
            ratio *= same_ell_value;
            TowerStage st;
            for (int t = 0; t < j; ++t) st.prime_indices.push_back(t);
            st.ell = same_ell_value;
            st.volume_ratio = ratio;
            cert.stages.push_back(std::move(st));
        }
        return cert;
    }
    if (static_cast<int>(by_ell.size()) < j_max)
        throw InsufficientPrimes("fewer usable primes than tower stages");
    cert.strategy = TowerStrategy::many_distinct_ells;
    int j = 0;
    for (const auto& [ell, idxs] : by_ell) {
        if (j == j_max) break;
        cert.primes.push_back(usable[idxs.front()]);
        TowerStage st;
        st.prime_indices = {static_cast<std::size_t>(j)};
        st.ell = ell;
        st.volume_ratio = ell;
        cert.stages.push_back(std::move(st));
        ++j;
    }
    return cert;
}

// ---------------------------------------------------------------------------
// JSON serialization
// ---------------------------------------------------------------------------

inline std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw error("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 0xf]);
    }
    return out;
}

inline std::string rat_to_string(const Rat& r) {
    return r.get_str();
}

namespace detail {

inline json polyfp_to_json(const PolyFp& f) {
    json a = json::array();
    for (auto c : f) a.push_back(c);
    return a;
}

inline json fqelem_to_json(const FqElem& e) {
    json a = json::array();
    for (auto c : e.c) a.push_back(c);
    return a;
}

inline json matrix_to_json(const FqMatrix& m) {
    json rows = json::array();
    for (int i = 0; i < m.dim; ++i) {
        json row = json::array();
        for (int j = 0; j < m.dim; ++j) row.push_back(fqelem_to_json(m.at(i, j)));
        rows.push_back(row);
    }
    return rows;
}

inline json factored_to_json(const FactoredOrder& fo) {
    json j;
    if (fo.p_unbounded)
        j["p_exponent"] = "unbounded";
    else
        j["p_exponent"] = fo.p_exponent;
    json fs = json::array();
    for (const auto& f : fo.factors) fs.push_back(json::array({f.a, f.sign}));
    j["factors"] = fs;
    j["label"] = fo.label;
    return j;
}

inline json report_to_json(const std::vector<AvoidanceCheck>& report) {
    json out = json::array();
    for (const auto& c : report) {
        json e;
        e["bound_label"] = c.label;
        e["kind"] = c.kind;
        json fs = json::array();
        for (const auto& f : c.factors) fs.push_back(json::array({f.a, f.sign}));
        e["factors"] = fs;
        e["divides"] = c.divides;
        e["required"] = c.required;
        e["passed"] = c.passed;
        out.push_back(e);
    }
    return out;
}

inline json reduction_to_json(const GoodPrime& gp) {
    json red;
    json diag = json::array();
    for (const auto& e : gp.fqform.diagonal) diag.push_back(fqelem_to_json(e));
    red["diagonal"] = diag;
    red["disc"] = fqelem_to_json(gp.fqform.disc);
    if (gp.fqform.square_class)
        red["square_class"] = *gp.fqform.square_class == SquareClass::square
                                  ? "square"
                                  : "nonsquare";
    red["type_label"] = gp.type_label;
    return red;
}

inline json prime_to_json(const PrimeIdealFactor& pf) {
    json j;
    j["p"] = pf.p;
    j["factor_poly"] = polyfp_to_json(pf.factor_poly);
    j["r"] = pf.residue_degree;
    return j;
}

inline json cover_prime_to_json(const CoverPrime& cp) {
    json j;
    j["ell"] = cp.ell.get_str();
    j["branch"] = branch_name(cp.branch);
    j["d"] = cp.d;
    return j;
}

inline json witness_to_json(const Witness& w) {
    json j;
    j["matrix"] = matrix_to_json(w.matrix);
    j["order"] = w.order.get_str();
    j["eigenvalue_ok"] = w.eigenvalue_ok;
    return j;
}

inline json leg_to_json(const GoodPrime& gp, const CoverPrime& cp,
                        const std::optional<Witness>& w) {
    json j;
    j["prime"] = prime_to_json(gp.pf);
    j["reduction"] = reduction_to_json(gp);
    j["group_order"] = factored_to_json(gp.group_order);
    j["cover_prime"] = cover_prime_to_json(cp);
    j["avoidance_report"] = report_to_json(cp.report);
    if (w) j["witness"] = witness_to_json(*w);
    return j;
}

inline json assertions_common(const AdmissiblePair& pair) {
    json a = json::array();
    a.push_back({{"anchor", "subgroup-condition"},
                 {"text",
                  "ell divides the order of the finite group but no admissible "
                  "order of the image of a totally geodesic subgroup, so the "
                  "pullbacks of the trivial subgroup and of the cyclic subgroup "
                  "meet every such image identically; the avoidance report "
                  "lists the verified non-divisibility facts"}});
    a.push_back({{"anchor", "odd-degree-orientability"},
                 {"text",
                  "the paired covers differ by a cyclic cover of odd prime "
                  "degree, so orientable totally geodesic subspaces stay in "
                  "bijection with orientable ones"}});
    a.push_back({{"anchor", "cyclic-inclusion"},
                 {"text",
                  "the cyclic subgroup has odd prime order and therefore lies "
                  "inside the image of the lattice, whose index in the full "
                  "finite orthogonal group is 1 or 2"}});
    a.push_back({{"anchor", "strong-approximation-caveat"},
                 {"text",
                  "surjectivity of the reduction map up to index two holds for "
                  "all but finitely many primes of the field; this certificate "
                  "assumes the recorded prime is one of them"}});
    a.push_back({{"anchor", "index-two-ambiguity"},
                 {"text",
                  "cover degrees over the base orbifold are determined only up "
                  "to one factor of two; the volume ratio between the paired "
                  "covers is unconditional"}});
    if (pair.m == 3)
        a.push_back({{"anchor", "m3-scope-note"},
                     {"text",
                      "ambient dimension 3 reproduces previously known "
                      "constructions; certificate emitted for completeness"}});
    return a;
}

}  // namespace detail

inline json input_to_json(const AdmissiblePair& pair) {
    json in;
    json mp = json::array();
    for (const auto& c : pair.field.min_poly) {
        if (c.fits_slong_p())
            mp.push_back(c.get_si());
        else
            mp.push_back(c.get_str());
    }
    in["min_poly"] = mp;
    json fd = json::array();
    for (const auto& e : pair.form.diagonal) {
        json entry = json::array();
        for (const auto& c : e.coeffs) entry.push_back(rat_to_string(c));
        fd.push_back(entry);
    }
    in["form_diagonal"] = fd;
    in["m"] = pair.m;
    return in;
}

inline std::string input_digest(const AdmissiblePair& pair) {
    return sha256_hex(input_to_json(pair).dump());
}

inline json to_json(const EquivalenceCertificate& c) {
    json j;
    j["version"] = kSchemaVersion;
    j["kind"] = "equivalence";
    j["input"] = input_to_json(c.pair);
    j["input_digest"] = input_digest(c.pair);
    j["hash_alg"] = "sha256";
    j["prime"] = detail::prime_to_json(c.prime.pf);
    j["reduction"] = detail::reduction_to_json(c.prime);
    j["group_order"] = detail::factored_to_json(c.prime.group_order);
    j["cover_prime"] = detail::cover_prime_to_json(c.cover);
    j["avoidance_report"] = detail::report_to_json(c.cover.report);
    std::string ell = c.cover.ell.get_str();
    j["cover_data"] = {{"base_cover_index", json::array({"|G|", "|G|/2"})},
                       {"cyclic_cover_index",
                        json::array({"|G|/ell", "|G|/(2*ell)"})},
                       {"index_ratio", ell}};
    j["volume_ratio"] = ell;
    j["assertions"] = detail::assertions_common(c.pair);
    if (c.witness) j["witness"] = detail::witness_to_json(*c.witness);
    j["mode"] = mode_name(c.mode);
    j["seed"] = c.seed;
    return j;
}

inline json to_json(const IsospectralPairCertificate& c) {
    json j;
    j["version"] = kSchemaVersion;
    j["kind"] = "isospectral_pair";
    j["input"] = input_to_json(c.pair);
    j["input_digest"] = input_digest(c.pair);
    j["hash_alg"] = "sha256";
    j["p"] = c.p;
    j["primes"] = json::array({detail::leg_to_json(c.legs[0].prime, c.legs[0].cover,
                                                   c.legs[0].witness),
                               detail::leg_to_json(c.legs[1].prime, c.legs[1].cover,
                                                   c.legs[1].witness)});
    std::string ell = c.shared_ell.get_str();
    Int ell2 = c.shared_ell * c.shared_ell;
    j["shared_ell"] = ell;
    j["covers"] = json::array(
        {json{{"name", "M_ell_1"},
              {"subgroup", "C_p1 x 1"},
              {"subgroup_order", ell},
              {"degree_over_M_ell_ell", ell}},
         json{{"name", "M_1_ell"},
              {"subgroup", "1 x C_p2"},
              {"subgroup_order", ell},
              {"degree_over_M_ell_ell", ell}},
         json{{"name", "M_ell_ell"},
              {"subgroup", "C_p1 x C_p2"},
              {"subgroup_order", ell2.get_str()},
              {"degree_over_M_ell_ell", "1"}}});
    json a = detail::assertions_common(c.pair);
    a.push_back({{"anchor", "multiplicity-scaling"},
                 {"text",
                  "each cover of the pair is a cyclic cover of the common "
                  "quotient of degree ell, so every totally geodesic subspace "
                  "of the quotient has exactly ell distinct lifts and "
                  "multiplicities scale by ell; the two geometric spectra "
                  "therefore agree"}});
    a.push_back({{"anchor", "mostow-nonisometry"},
                 {"text",
                  "one fundamental group contains infinitely many elements "
                  "reducing onto a generator of the first cyclic factor while "
                  "the other reduces trivially there; Mostow rigidity then "
                  "forbids an isometry between the covers"}});
    a.push_back({{"anchor", "isomorphic-residue-fields"},
                 {"text",
                  "the two prime ideals share the rational prime and the "
                  "residue degree, so the residue fields and the finite "
                  "orthogonal groups are isomorphic"}});
    j["assertions"] = a;
    j["volume_ratio"] = "1";
    j["mode"] = mode_name(c.mode);
    j["seed"] = c.seed;
    return j;
}

inline json to_json(const TowerCertificate& c) {
    json j;
    j["version"] = kSchemaVersion;
    j["kind"] = "tower";
    j["input"] = input_to_json(c.pair);
    j["input_digest"] = input_digest(c.pair);
    j["hash_alg"] = "sha256";
    j["strategy"] = c.strategy == TowerStrategy::same_ell_many_primes
                        ? "same_ell_many_primes"
                        : "many_distinct_ells";
    json pd = json::array();
    for (const auto& [gp, cp] : c.primes)
        pd.push_back(detail::leg_to_json(gp, cp, std::nullopt));
    j["primes_detail"] = pd;
    json stages = json::array();
    for (std::size_t i = 0; i < c.stages.size(); ++i) {
        const auto& st = c.stages[i];
        json s;
        s["stage"] = i + 1;
        s["prime_indices"] = st.prime_indices;
        s["ell"] = st.ell.get_str();
        s["volume_ratio"] = st.volume_ratio.get_str();
        stages.push_back(s);
    }
    j["stages"] = stages;
    json a = detail::assertions_common(c.pair);
    a.push_back({{"anchor", "volume-growth"},
                 {"text",
                  "stage j pairs geometrically equivalent covers whose volume "
                  "ratio is the listed value; the ratios increase strictly "
                  "with the stage"}});
    j["assertions"] = a;
    j["mode"] = mode_name(c.mode);
    j["seed"] = c.seed;
    return j;
}

// ---------------------------------------------------------------------------
// input parsing (shared between the CLI and the verifier)
// ---------------------------------------------------------------------------

namespace detail {

inline Rat json_to_rat(const json& v) {
    if (v.is_number_integer()) return Rat(static_cast<long>(v.get<long long>()));
    if (v.is_string()) {
        Rat r;
        if (mpq_set_str(r.get_mpq_t(), v.get<std::string>().c_str(), 10) != 0)
            throw MalformedCertificate("bad rational: " + v.get<std::string>());
        r.canonicalize();
        return r;
    }
    throw MalformedCertificate("rational must be an integer or a string");
}

inline Int json_to_int(const json& v) {
    if (v.is_number_integer()) return Int(static_cast<long>(v.get<long long>()));
    if (v.is_string()) {
        Int r;
        if (mpz_set_str(r.get_mpz_t(), v.get<std::string>().c_str(), 10) != 0)
            throw MalformedCertificate("bad integer: " + v.get<std::string>());
        return r;
    }
    throw MalformedCertificate("integer must be a number or a string");
}

inline PolyFp json_to_polyfp(const json& v) {
    if (!v.is_array()) throw MalformedCertificate("polynomial must be an array");
    PolyFp f;
    for (const auto& c : v) f.push_back(c.get<std::uint64_t>());
    pf_normalize(f);
    return f;
}

inline FqElem json_to_fqelem(const FqContext& ctx, const json& v) {
    if (!v.is_array() || static_cast<int>(v.size()) != ctx.r)
        throw MalformedCertificate("field element has wrong length");
    FqElem e = fq_zero(ctx);
    for (int i = 0; i < ctx.r; ++i) e.c[i] = v[i].get<std::uint64_t>() % ctx.p;
    return e;
}

}  // namespace detail

/// Parse {min_poly, form_diagonal} into an admissible pair. Entries of
/// form_diagonal are coefficient vectors over the power basis; bare scalars
/// are accepted as constants.
inline AdmissiblePair parse_input_pair(const json& in) {
    if (!in.is_object() || !in.contains("min_poly") || !in.contains("form_diagonal"))
        throw MalformedCertificate("input needs min_poly and form_diagonal");
    ZPoly mp;
    for (const auto& c : in.at("min_poly")) mp.push_back(detail::json_to_int(c));
    NumberField field = make_field(mp);
    std::vector<FieldElem> diag;
    for (const auto& entry : in.at("form_diagonal")) {
        FieldElem e = elem_zero(field);
        if (entry.is_array()) {
            if (static_cast<int>(entry.size()) > field.degree)
                throw MalformedCertificate("diagonal entry longer than field degree");
            for (std::size_t i = 0; i < entry.size(); ++i)
                e.coeffs[i] = detail::json_to_rat(entry[i]);
        } else {
            e.coeffs[0] = detail::json_to_rat(entry);
        }
        diag.push_back(std::move(e));
    }
    QuadraticForm form = make_quadratic_form(field, std::move(diag));
    AdmissiblePair pair = is_admissible(field, form);
    if (in.contains("m") && in.at("m").get<int>() != pair.m)
        throw MalformedCertificate("recorded m does not match the form dimension");
    return pair;
}

// ---------------------------------------------------------------------------
// verification
// ---------------------------------------------------------------------------

struct VerCheck {
    std::string claim;
    bool pass = false;
};

struct VerificationReport {
    std::vector<VerCheck> checks;

    bool all_passed() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

namespace detail {

inline CertMode parse_mode(const json& j) {
    std::string m = j.get<std::string>();
    if (m == "paper") return CertMode::paper;
    if (m == "strict") return CertMode::strict;
    throw MalformedCertificate("unknown mode " + m);
}

// Rebuild the expected avoidance report for the recorded ell and compare
// against the recorded one entry by entry; every recorded `divides` is also
// recomputed independently from the recorded factor lists.
inline void verify_report(VerificationReport& rep, const FqForm& q, int m,
                          CertMode mode, const Int& ell, CoverBranch branch,
                          const json& recorded) {
    std::vector<AvoidanceCheck> expect;
    if (branch == CoverBranch::even_square_disc) {
        expect.push_back(detail::eigenvalue_check(ell, q.ctx.q));
    } else {
        int coarse_dim = q.dim % 2 == 1 ? q.dim : q.dim + 1;
        expect.push_back(
            detail::divisor_check(ell, coarse_lemma_bound(coarse_dim, q.ctx.p, q.ctx.r),
                                  true));
        detail::append_diagnostics(expect, ell, q, m);
    }
    if (mode == CertMode::strict) detail::append_strict_checks(expect, ell, q, m);
    bool layout_ok = recorded.is_array() && recorded.size() == expect.size();
    bool entries_ok = layout_ok;
    bool required_ok = true;
    if (layout_ok) {
        for (std::size_t i = 0; i < expect.size(); ++i) {
            const json& r = recorded[i];
            const AvoidanceCheck& e = expect[i];
            if (r.at("bound_label").get<std::string>() != e.label ||
                r.at("kind").get<std::string>() != e.kind ||
                r.at("divides").get<bool>() != e.divides ||
                r.at("required").get<bool>() != e.required ||
                r.at("passed").get<bool>() != e.passed) {
                entries_ok = false;
            }
            json fs = json::array();
            for (const auto& f : e.factors) fs.push_back(json::array({f.a, f.sign}));
            if (r.at("factors") != fs) entries_ok = false;
            if (e.required && e.divides) required_ok = false;
        }
    }
    rep.checks.push_back({"avoidance report reproduces from scratch", entries_ok});
    rep.checks.push_back({"required avoidance checks pass", layout_ok && required_ok});
}

inline void verify_witness(VerificationReport& rep, const FqForm& q,
                           const Int& ell, CoverBranch branch, const json& w) {
    const FqContext& ctx = q.ctx;
    bool ok = true;
    FqMatrix m{q.dim, {}};
    try {
        const json& rows = w.at("matrix");
        if (!rows.is_array() || static_cast<int>(rows.size()) != q.dim)
            throw MalformedCertificate("witness matrix has wrong dimension");
        for (const auto& row : rows) {
            if (!row.is_array() || static_cast<int>(row.size()) != q.dim)
                throw MalformedCertificate("witness matrix has wrong dimension");
            for (const auto& cell : row) m.e.push_back(json_to_fqelem(ctx, cell));
        }
    } catch (const json::exception&) {
        throw MalformedCertificate("witness matrix unreadable");
    }
    ok = is_special_isometry(q, m);
    rep.checks.push_back({"witness is a special isometry of the reduction", ok});
    FqMatrix id = mat_identity(ctx, q.dim);
    bool order_ok = !(m == id) && mat_pow(ctx, m, ell) == id &&
                    json_to_int(w.at("order")) == ell;
    rep.checks.push_back({"witness has exact order ell", order_ok});
    if (branch == CoverBranch::even_square_disc) {
        bool eig = eigenvalue_pm1_avoidance(ctx, m, 1, ell);
        rep.checks.push_back({"no witness power has eigenvalue +1 or -1", eig});
    }
}

// Verify one prime/reduction/cover record against a freshly recomputed
// pipeline; returns the recomputed form and branch for later checks.
inline std::optional<std::pair<FqForm, CoverBranch>> verify_leg(
    VerificationReport& rep, const AdmissiblePair& pair, CertMode mode,
    const json& prime, const json& reduction, const json& group_order,
    const json& cover_prime, const json& report, const json* witness,
    const std::string& tag) {
    std::uint64_t p = prime.at("p").get<std::uint64_t>();
    PolyFp fpoly = json_to_polyfp(prime.at("factor_poly"));
    int r = prime.at("r").get<int>();

    bool prime_ok = false;
    PrimeIdealFactor pf;
    try {
        for (const auto& cand : factor_prime(pair.field, p)) {
            if (cand.factor_poly == fpoly && cand.residue_degree == r) {
                pf = cand;
                prime_ok = true;
            }
        }
    } catch (const error&) {
        prime_ok = false;
    }
    rep.checks.push_back(
        {tag + "factor_poly is a prime ideal factor with the recorded degree",
         prime_ok});
    if (!prime_ok) return std::nullopt;

    FqForm red = reduce_form(pair, pf);
    bool red_ok = true;
    {
        const json& diag = reduction.at("diagonal");
        if (static_cast<int>(diag.size()) != red.dim) red_ok = false;
        for (int i = 0; red_ok && i < red.dim; ++i)
            if (json_to_fqelem(red.ctx, diag[i]) != red.diagonal[i]) red_ok = false;
        if (json_to_fqelem(red.ctx, reduction.at("disc")) != red.disc) red_ok = false;
        if (red.square_class) {
            std::string want = *red.square_class == SquareClass::square
                                   ? "square"
                                   : "nonsquare";
            if (reduction.at("square_class").get<std::string>() != want)
                red_ok = false;
        }
    }
    rep.checks.push_back({tag + "reduction diagonal and discriminant match", red_ok});

    FactoredOrder so = so_order(red.dim, p, r, red.square_class);
    bool order_ok = group_order == factored_to_json(so) &&
                    reduction.at("type_label").get<std::string>() == so.label;
    rep.checks.push_back({tag + "group order matches the closed form", order_ok});

    Int ell = json_to_int(cover_prime.at("ell"));
    std::string branch_str = cover_prime.at("branch").get<std::string>();
    unsigned d = cover_prime.at("d").get<unsigned>();
    CoverBranch branch;
    bool branch_ok = true;
    if (red.dim % 2 == 1)
        branch = CoverBranch::odd_dim;
    else if (red.square_class == SquareClass::nonsquare)
        branch = CoverBranch::even_nonsquare_disc;
    else
        branch = CoverBranch::even_square_disc;
    if (branch_name(branch) != branch_str) branch_ok = false;
    unsigned want_d = branch == CoverBranch::even_square_disc
                          ? static_cast<unsigned>(r)
                          : static_cast<unsigned>(red.dim / 2) * static_cast<unsigned>(r);
    if (d != want_d) branch_ok = false;
    rep.checks.push_back({tag + "branch and exponent match the reduction", branch_ok});

    bool ell_ok = is_prime(ell) && mpz_odd_p(ell.get_mpz_t()) != 0;
    if (ell_ok) {
        if (branch == CoverBranch::even_square_disc) {
            Int prm1 = pow_int(Int(static_cast<unsigned long>(p)), d) - 1;
            ell_ok = prm1 % ell == 0;
        } else {
            Int pd1 = pow_int(Int(static_cast<unsigned long>(p)), d) + 1;
            ell_ok = pd1 % ell == 0 && powm(Int(static_cast<unsigned long>(p)),
                                            Int(2 * d), ell) == 1;
            for (const auto& [s, se] : factorize(Int(2 * d)))
                if (powm(Int(static_cast<unsigned long>(p)), Int(2 * d) / s, ell) == 1)
                    ell_ok = false;
        }
    }
    rep.checks.push_back(
        {tag + "ell is an odd prime with the branch divisibility property", ell_ok});

    verify_report(rep, red, pair.m, mode, ell, branch, report);
    if (witness) verify_witness(rep, red, ell, branch, *witness);
    return std::make_pair(std::move(red), branch);
}

inline void verify_common_header(VerificationReport& rep, const json& cert,
                                 AdmissiblePair& pair) {
    if (!cert.is_object() || !cert.contains("version") || !cert.contains("kind") ||
        !cert.contains("input") || !cert.contains("input_digest"))
        throw MalformedCertificate("missing top-level certificate fields");
    if (cert.at("version").get<std::string>() != kSchemaVersion)
        throw MalformedCertificate("unsupported schema version");
    pair = parse_input_pair(cert.at("input"));
    rep.checks.push_back({"input parses to an admissible pair", true});
    bool digest_ok =
        cert.at("hash_alg").get<std::string>() == "sha256" &&
        cert.at("input_digest").get<std::string>() == input_digest(pair);
    rep.checks.push_back({"input digest matches", digest_ok});
}

}  // namespace detail

/// Recompute every claim a certificate makes, from the raw input onward.
/// Returns a per-claim report; structural problems throw
/// MalformedCertificate instead of producing a report.
inline VerificationReport verify_certificate(const json& cert) {
    VerificationReport rep;
    AdmissiblePair pair;
    try {
        detail::verify_common_header(rep, cert, pair);
        CertMode mode = detail::parse_mode(cert.at("mode"));
        std::string kind = cert.at("kind").get<std::string>();
        if (kind == "equivalence") {
            Int ell = detail::json_to_int(cert.at("cover_prime").at("ell"));
            const json* wit =
                cert.contains("witness") ? &cert.at("witness") : nullptr;
            auto leg = detail::verify_leg(
                rep, pair, mode, cert.at("prime"), cert.at("reduction"),
                cert.at("group_order"), cert.at("cover_prime"),
                cert.at("avoidance_report"), wit, "");
            // the single-prime selection is deterministic: ell must be the
            // branch's canonical choice
            bool canonical = false;
            if (leg) {
                try {
                    CoverPrime cp = select_cover_prime(leg->first, pair.m, mode);
                    canonical = cp.ell == ell;
                } catch (const error&) {
                    canonical = false;
                }
            }
            rep.checks.push_back({"ell equals the deterministic selection", canonical});
            bool ratio_ok =
                cert.at("volume_ratio").get<std::string>() == ell.get_str() &&
                cert.at("cover_data").at("index_ratio").get<std::string>() ==
                    ell.get_str();
            rep.checks.push_back({"volume ratio equals ell", ratio_ok});
        } else if (kind == "isospectral_pair") {
            const json& legs = cert.at("primes");
            if (!legs.is_array() || legs.size() != 2)
                throw MalformedCertificate("pair certificate needs two primes");
            Int shared = detail::json_to_int(cert.at("shared_ell"));
            std::uint64_t p0 = legs[0].at("prime").at("p").get<std::uint64_t>();
            std::uint64_t p1 = legs[1].at("prime").at("p").get<std::uint64_t>();
            int r0 = legs[0].at("prime").at("r").get<int>();
            int r1 = legs[1].at("prime").at("r").get<int>();
            bool same_field = p0 == p1 && r0 == r1 &&
                              cert.at("p").get<std::uint64_t>() == p0 &&
                              legs[0].at("prime").at("factor_poly") !=
                                  legs[1].at("prime").at("factor_poly");
            rep.checks.push_back(
                {"two distinct primes with isomorphic residue fields", same_field});
            for (int i = 0; i < 2; ++i) {
                const json& leg = legs[i];
                bool ell_match =
                    detail::json_to_int(leg.at("cover_prime").at("ell")) == shared;
                rep.checks.push_back(
                    {"leg " + std::to_string(i + 1) + ": uses the shared ell",
                     ell_match});
                const json* wit =
                    leg.contains("witness") ? &leg.at("witness") : nullptr;
                detail::verify_leg(rep, pair, mode, leg.at("prime"),
                                   leg.at("reduction"), leg.at("group_order"),
                                   leg.at("cover_prime"),
                                   leg.at("avoidance_report"), wit,
                                   "leg " + std::to_string(i + 1) + ": ");
            }
            const json& covers = cert.at("covers");
            bool covers_ok = covers.is_array() && covers.size() == 3;
            if (covers_ok) {
                Int ell2 = shared * shared;
                covers_ok =
                    covers[0].at("name") == "M_ell_1" &&
                    covers[1].at("name") == "M_1_ell" &&
                    covers[2].at("name") == "M_ell_ell" &&
                    covers[0].at("subgroup_order").get<std::string>() ==
                        shared.get_str() &&
                    covers[1].at("subgroup_order").get<std::string>() ==
                        shared.get_str() &&
                    covers[2].at("subgroup_order").get<std::string>() ==
                        ell2.get_str() &&
                    covers[0].at("degree_over_M_ell_ell").get<std::string>() ==
                        shared.get_str() &&
                    covers[1].at("degree_over_M_ell_ell").get<std::string>() ==
                        shared.get_str() &&
                    covers[2].at("degree_over_M_ell_ell").get<std::string>() == "1";
            }
            rep.checks.push_back({"three covers with cyclic degree-ell relations",
                                  covers_ok});
            bool mult_ok = false, mostow_ok = false;
            for (const auto& a : cert.at("assertions")) {
                if (a.at("anchor") == "multiplicity-scaling") mult_ok = true;
                if (a.at("anchor") == "mostow-nonisometry") mostow_ok = true;
            }
            rep.checks.push_back({"multiplicity assertion present", mult_ok});
            rep.checks.push_back({"nonisometry assertion present", mostow_ok});
        } else if (kind == "tower") {
            const json& pd = cert.at("primes_detail");
            const json& stages = cert.at("stages");
            if (!pd.is_array() || !stages.is_array() || stages.empty())
                throw MalformedCertificate("tower certificate needs stages");
            std::vector<Int> ells;
            for (const auto& leg : pd) {
                const json* wit =
                    leg.contains("witness") ? &leg.at("witness") : nullptr;
                detail::verify_leg(rep, pair, mode, leg.at("prime"),
                                   leg.at("reduction"), leg.at("group_order"),
                                   leg.at("cover_prime"),
                                   leg.at("avoidance_report"), wit,
                                   "prime " + leg.at("prime").at("p").dump() + ": ");
                ells.push_back(
                    detail::json_to_int(leg.at("cover_prime").at("ell")));
            }
            std::string strategy = cert.at("strategy").get<std::string>();
            bool stages_ok = true;
            Int prev_ratio = 0;
            for (std::size_t s = 0; s < stages.size(); ++s) {
                const json& st = stages[s];
                if (st.at("stage").get<std::size_t>() != s + 1) stages_ok = false;
                Int ell = detail::json_to_int(st.at("ell"));
                Int ratio = detail::json_to_int(st.at("volume_ratio"));
                std::vector<std::size_t> idxs =
                    st.at("prime_indices").get<std::vector<std::size_t>>();
                for (auto idx : idxs) {
                    if (idx >= ells.size() || ells[idx] != ell) stages_ok = false;
                }
                if (strategy == "same_ell_many_primes") {
                    if (idxs.size() != s + 1) stages_ok = false;
                    Int want = 1;
                    for (std::size_t t = 0; t <= s; ++t) want *= ell;
                    if (ratio != want) stages_ok = false;
                } else if (strategy == "many_distinct_ells") {
                    if (idxs.size() != 1 || ratio != ell) stages_ok = false;
                } else {
                    stages_ok = false;
                }
                if (!(ratio > prev_ratio)) stages_ok = false;
                prev_ratio = ratio;
            }
            rep.checks.push_back(
                {"stage ratios are consistent and strictly increasing", stages_ok});
        } else {
            throw MalformedCertificate("unknown certificate kind " + kind);
        }
        bool seed_ok = cert.contains("seed") && cert.at("seed").is_number();
        rep.checks.push_back({"seed is recorded", seed_ok});
    } catch (const json::exception& e) {
        throw MalformedCertificate(std::string("certificate unreadable: ") + e.what());
    }
    return rep;
}

}  // namespace orbicover
