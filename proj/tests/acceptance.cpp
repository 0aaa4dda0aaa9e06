// Acceptance suite: each numbered criterion prints exactly one PASS/FAIL
// line; the process exits nonzero if any criterion fails. Criteria that
// exercise the command-line surface run it in-process through cli::run.
#include <chrono>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "orbicover/orbicover.hpp"

using namespace orbicover;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& name, bool pass,
            double seconds) {
    std::ostringstream ss;
    ss << (pass ? "PASS" : "FAIL") << "  " << criterion << "  " << name << "  ("
       << seconds << "s)";
    std::cout << ss.str() << std::endl;
    if (!pass) ++g_failures;
}

template <typename F>
void criterion(int number, const std::string& name, F&& body) {
    auto t0 = std::chrono::steady_clock::now();
    bool pass = false;
    std::string note;
    try {
        pass = body();
    } catch (const std::exception& e) {
        note = e.what();
        pass = false;
    }
    double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report(number, name + (note.empty() ? "" : "  [" + note + "]"), pass, secs);
}

const char* kRunningInput = R"({
  "min_poly": [-2, 0, 1],
  "form_diagonal": [[1], [1], [1], [1], [0, -1]],
  "options": {"bound": 100, "seed": 0}
})";

struct CliResult {
    int code;
    std::string out;
};

CliResult run_cli(std::vector<std::string> args) {
    std::istringstream in(kRunningInput);
    std::ostringstream out, err;
    int code = cli::run(std::move(args), in, out, err);
    return {code, out.str()};
}

AdmissiblePair running_pair() {
    json j = json::parse(kRunningInput);
    return parse_input_pair(j);
}

// ---- criterion 1: order formulas vs exhaustive enumeration --------------

bool criterion1() {
    struct Case {
        int dim;
        std::uint64_t p;
        std::optional<SquareClass> cls;
        std::optional<long> frozen;  // independently hand-checked values
    };
    std::vector<Case> cases{
        {2, 3, SquareClass::square, std::nullopt},
        {2, 3, SquareClass::nonsquare, std::nullopt},
        {2, 5, SquareClass::square, std::nullopt},
        {2, 5, SquareClass::nonsquare, std::nullopt},
        {3, 3, std::nullopt, 24},
        {3, 5, std::nullopt, 120},
        {4, 3, SquareClass::square, 576},
        {4, 3, SquareClass::nonsquare, 720},
    };
    for (const auto& c : cases) {
        FqContext ctx = make_prime_context(c.p);
        FqForm form = make_canonical_fq_form(ctx, c.dim, c.cls);
        Int brute = brute_force_so_count(form);
        Int formula = evaluate(so_order(c.dim, c.p, 1, c.cls));
        if (brute != formula) return false;
        if (c.frozen && brute != *c.frozen) return false;
    }
    return true;
}

// ---- criterion 2: the independent point-count oracle ---------------------

bool criterion2() {
    FqContext c3 = make_prime_context(3);
    FqForm q = make_fq_form(c3, std::vector<FqElem>(5, fq_one(c3)));
    Int pc = point_count_so_order(q);
    return pc == 51840 && pc == evaluate(so_order(5, 3, 1));
}

// ---- criterion 3: Zsigmondy sweep ----------------------------------------

bool criterion3() {
    for (std::uint64_t p : {3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47}) {
        for (int d = 2; d <= 12; ++d) {
            Int ell = zsigmondy_prime(p, d);
            Int pz(static_cast<unsigned long>(p));
            if ((pow_int(pz, d) + 1) % ell != 0) return false;
            // independent order computation by iterated multiplication
            Int v = 1;
            int ord = 0;
            for (int i = 1; i <= 2 * d; ++i) {
                v = v * pz % ell;
                if (v == 1) {
                    ord = i;
                    break;
                }
            }
            if (ord != 2 * d) return false;
        }
    }
    return true;
}

// ---- criterion 4: worked single-prime certificates at p = 7 ---------------

bool criterion4() {
    CliResult res = run_cli({"certify", "-i", "-", "--prime", "7", "--with-witness",
                             "--seed", "0"});
    if (res.code != 0) return false;
    json arr = json::parse(res.out);
    if (!arr.is_array() || arr.size() != 2) return false;
    AdmissiblePair pair = running_pair();
    for (const auto& cert : arr) {
        if (cert.at("cover_prime").at("branch") != "OddDim") return false;
        if (cert.at("cover_prime").at("ell") != "5") return false;
        if (cert.at("volume_ratio") != "5") return false;
        // the coarse report must contain exactly the checks
        // 5 | 7-1, 5 | 7^2-1, 5 | 7+1, all negative
        const json& report = cert.at("avoidance_report");
        bool coarse_ok = false;
        for (const auto& e : report) {
            if (e.at("bound_label") != "coarse") continue;
            coarse_ok = e.at("required") == true && e.at("divides") == false &&
                        e.at("passed") == true &&
                        e.at("factors") == json::array({json::array({1, -1}),
                                                        json::array({2, -1}),
                                                        json::array({1, 1})});
        }
        if (!coarse_ok) return false;
        // witness: an explicit matrix of order 5 in SO(5;7)
        PolyFp fpoly;
        for (const auto& c : cert.at("prime").at("factor_poly"))
            fpoly.push_back(c.get<std::uint64_t>());
        PrimeIdealFactor pf{7, fpoly, 1, 1};
        FqForm red = reduce_form(pair, pf);
        const json& wit = cert.at("witness");
        FqMatrix w{red.dim, {}};
        for (const auto& row : wit.at("matrix"))
            for (const auto& cell : row) {
                FqElem e = fq_zero(red.ctx);
                for (int i = 0; i < red.ctx.r; ++i)
                    e.c[i] = cell[i].get<std::uint64_t>();
                w.e.push_back(e);
            }
        if (!is_special_isometry(red, w)) return false;
        FqMatrix id = mat_identity(red.ctx, red.dim);
        if (w == id || !(mat_pow(red.ctx, w, 5) == id)) return false;
    }
    return true;
}

// ---- criterion 5: worked pair certificate ---------------------------------

bool criterion5() {
    CliResult res = run_cli({"certify", "-i", "-", "--pair", "--seed", "0"});
    if (res.code != 0) return false;
    json cert = json::parse(res.out);
    if (cert.at("p") != 7) return false;
    if (cert.at("shared_ell") != "5") return false;
    // the two prime ideals are theta - 3 (x + 4) and theta - 4 (x + 3)
    std::set<json> factors;
    for (const auto& leg : cert.at("primes"))
        factors.insert(leg.at("prime").at("factor_poly"));
    std::set<json> want{json::array({3, 1}), json::array({4, 1})};
    if (factors != want) return false;
    const json& covers = cert.at("covers");
    if (covers.size() != 3) return false;
    if (covers[0].at("name") != "M_ell_1" || covers[1].at("name") != "M_1_ell" ||
        covers[2].at("name") != "M_ell_ell")
        return false;
    bool multiplicity = false;
    for (const auto& a : cert.at("assertions")) {
        if (a.at("anchor") == "multiplicity-scaling" &&
            a.at("text").get<std::string>().find("exactly ell distinct lifts") !=
                std::string::npos)
            multiplicity = true;
    }
    return multiplicity;
}

// ---- criterion 6: tower certificate ---------------------------------------

bool criterion6() {
    CliResult res = run_cli({"certify", "-i", "-", "--tower", "3", "--bound", "500",
                             "--seed", "0"});
    if (res.code != 0) return false;
    json cert = json::parse(res.out);
    const json& stages = cert.at("stages");
    if (stages.size() != 3) return false;
    Int prev = 0;
    for (const auto& st : stages) {
        Int ratio(st.at("volume_ratio").get<std::string>());
        if (!(ratio > prev)) return false;
        prev = ratio;
    }
    if (cert.at("strategy") == "same_ell_many_primes") {
        Int ell(stages[0].at("ell").get<std::string>());
        Int want = 1;
        for (int j = 0; j < 3; ++j) {
            want *= ell;
            if (Int(stages[j].at("volume_ratio").get<std::string>()) != want)
                return false;
        }
    }
    return true;
}

// ---- criterion 7: divisor tables vs closed-form orders --------------------

bool criterion7() {
    for (std::uint64_t p : {3, 5, 7}) {
        for (int r = 1; r <= 2; ++r) {
            for (unsigned n = 2; n <= 8; ++n) {
                // odd table rows exist for subform dim 2n-1 >= 5
                if (2 * n - 1 >= 5) {
                    auto table = subgroup_bound_tables(2 * n - 1, p, r);
                    Int t1, t5p, t5m;
                    bool has_t1 = false, has_t5 = false;
                    for (const auto& fo : table) {
                        if (fo.label == "T1") {
                            t1 = prime_to_p_part(fo);
                            has_t1 = true;
                        }
                        if (fo.label == "T5 +") t5p = prime_to_p_part(fo);
                        if (fo.label == "T5 -") {
                            t5m = prime_to_p_part(fo);
                            has_t5 = true;
                        }
                    }
                    if (!has_t1 || !has_t5) return false;
                    if (t1 != prime_to_p_part(so_order(2 * n - 1, p, r)))
                        return false;
                    if (t5m != prime_to_p_part(so_order(
                                   2 * (n - 1), p, r, SquareClass::square)))
                        return false;
                    if (t5p != prime_to_p_part(so_order(
                                   2 * (n - 1), p, r, SquareClass::nonsquare)))
                        return false;
                }
                // even table rows for subform dim 2n >= 4
                auto table = subgroup_bound_tables(2 * n, p, r);
                Int s1p, s1m, s4;
                bool has_s1 = false, has_s4 = false;
                for (const auto& fo : table) {
                    if (fo.label == "S1 +") s1p = prime_to_p_part(fo);
                    if (fo.label == "S1 -") {
                        s1m = prime_to_p_part(fo);
                        has_s1 = true;
                    }
                    if (fo.label == "S4") {
                        s4 = prime_to_p_part(fo);
                        has_s4 = true;
                    }
                }
                if (!has_s1 || !has_s4) return false;
                if (s1m != prime_to_p_part(so_order(2 * n, p, r, SquareClass::square)))
                    return false;
                if (s1p !=
                    prime_to_p_part(so_order(2 * n, p, r, SquareClass::nonsquare)))
                    return false;
                if (s4 != prime_to_p_part(so_order(2 * n - 1, p, r))) return false;
            }
        }
    }
    return true;
}

// ---- criterion 8: round trips, tamper detection, determinism --------------

bool criterion8() {
    std::vector<std::vector<std::string>> cmds{
        {"certify", "-i", "-", "--prime", "7", "--with-witness", "--seed", "0"},
        {"certify", "-i", "-", "--pair", "--seed", "0"},
        {"certify", "-i", "-", "--tower", "3", "--bound", "500", "--seed", "0"}};
    std::vector<std::string> outputs;
    for (const auto& cmd : cmds) {
        CliResult res = run_cli(cmd);
        if (res.code != 0) return false;
        outputs.push_back(res.out);
        json parsed = json::parse(res.out);
        std::vector<json> certs;
        if (parsed.is_array())
            for (const auto& c : parsed) certs.push_back(c);
        else
            certs.push_back(parsed);
        for (const auto& c : certs)
            if (!verify_certificate(c).all_passed()) return false;
    }
    // byte-identical reruns under the same seed
    for (std::size_t i = 0; i < cmds.size(); ++i) {
        CliResult res = run_cli(cmds[i]);
        if (res.out != outputs[i]) return false;
    }
    // tampering ell to 3 must fail because 3 | 48 = 7^2 - 1
    json arr = json::parse(outputs[0]);
    arr[0]["cover_prime"]["ell"] = "3";
    if (verify_certificate(arr[0]).all_passed()) return false;
    return true;
}

// ---- criterion 9: property suites ------------------------------------------

bool criterion9() {
    // finite field axioms, >= 1000 cases
    {
        FqContext c = make_fq_context(7, {3, 1, 1});  // F_49
        std::mt19937_64 rng(2);
        for (int t = 0; t < 1000; ++t) {
            FqElem a = fq_from_index(c, rng() % 49);
            FqElem b = fq_from_index(c, rng() % 49);
            FqElem d = fq_from_index(c, rng() % 49);
            if (!(fq_mul(c, a, fq_add(c, b, d)) ==
                  fq_add(c, fq_mul(c, a, b), fq_mul(c, a, d))))
                return false;
            if (!(fq_mul(c, a, b) == fq_mul(c, b, a))) return false;
            if (!fq_is_zero(a) && !(fq_mul(c, a, fq_inv(c, a)) == fq_one(c)))
                return false;
        }
    }
    // exactly (q-1)/2 nonzero squares for q <= 121
    {
        std::vector<FqContext> ctxs;
        for (std::uint64_t p : {3, 5, 7, 11, 13, 17, 19, 23}) {
            FqContext ctx = make_prime_context(p);
            ctxs.push_back(ctx);
        }
        ctxs.push_back(make_fq_context(3, {1, 0, 1}));
        ctxs.push_back(make_fq_context(5, {3, 0, 1}));
        ctxs.push_back(make_fq_context(7, {3, 1, 1}));
        ctxs.push_back(make_fq_context(11, {7, 1, 1}));
        ctxs.push_back(make_fq_context(3, {1, 2, 0, 1}));
        ctxs.push_back(make_fq_context(3, {2, 1, 0, 0, 1}));
        for (const auto& c : ctxs) {
            std::uint64_t q = c.q.get_ui();
            if (q > 121) continue;
            std::uint64_t n = 0;
            for (std::uint64_t i = 1; i < q; ++i)
                if (is_square(c, fq_from_index(c, i))) ++n;
            if (n != (q - 1) / 2) return false;
        }
    }
    // reduction homomorphism, >= 1000 cases
    {
        NumberField k = make_field({-2, 0, 1});
        std::mt19937_64 rng(3);
        auto pf7 = factor_prime(k, 7);
        FqContext ctx = residue_context(pf7[0]);
        for (int t = 0; t < 1000; ++t) {
            FieldElem a = elem_zero(k), b = elem_zero(k);
            for (int i = 0; i < 2; ++i) {
                a.coeffs[i] = Rat(static_cast<long>(rng() % 37) - 18,
                                  1 + static_cast<long>(rng() % 5));
                b.coeffs[i] = Rat(static_cast<long>(rng() % 37) - 18,
                                  1 + static_cast<long>(rng() % 5));
            }
            bool skip = false;
            for (const auto& e : {a, b})
                for (const auto& c : e.coeffs)
                    if (mpz_divisible_ui_p(c.get_den().get_mpz_t(), 7)) skip = true;
            if (skip) continue;
            FqElem ra = reduce_element(k, a, pf7[0], ctx);
            FqElem rb = reduce_element(k, b, pf7[0], ctx);
            if (!(reduce_element(k, field_mul(k, a, b), pf7[0], ctx) ==
                  fq_mul(ctx, ra, rb)))
                return false;
            if (!(reduce_element(k, field_add(k, a, b), pf7[0], ctx) ==
                  fq_add(ctx, ra, rb)))
                return false;
        }
    }
    // reflections preserve the form, >= 1000 cases
    {
        FqContext c = make_prime_context(11);
        FqForm q = make_fq_form(c, std::vector<FqElem>(3, fq_one(c)));
        FqMatrix gram = gram_matrix(q);
        std::mt19937_64 rng(4);
        int done = 0;
        while (done < 1000) {
            FqVector v(3, fq_zero(c));
            for (int i = 0; i < 3; ++i) v[i].c[0] = rng() % 11;
            if (fq_is_zero(quad_value(q, v))) continue;
            FqMatrix r = reflection(q, v);
            FqMatrix t = mat_mul(c, mat_transpose(c, r), mat_mul(c, gram, r));
            if (!(t == gram)) return false;
            ++done;
        }
    }
    // Dedekind degree sums, >= 1000 (field, prime) cases
    {
        std::vector<NumberField> fields;
        fields.push_back(make_field({-2, 0, 1}));
        fields.push_back(make_field({-1, -1, 1}));
        fields.push_back(make_field({-1, -3, 0, 1}));
        fields.push_back(make_field({1, 0, 0, 0, 1}));
        int cases = 0;
        for (const auto& k : fields) {
            for (std::uint32_t p : small_primes()) {
                if (p > 2500) break;
                if (p == 2 || mpz_divisible_ui_p(k.poly_disc.get_mpz_t(), p))
                    continue;
                auto factors = factor_prime(k, p);
                int sum = 0;
                for (const auto& f : factors) sum += f.residue_degree;
                if (sum != k.degree) return false;
                ++cases;
            }
        }
        if (cases < 1000) return false;
    }
    // factored-order evaluation vs direct big-integer expansion
    {
        std::mt19937_64 rng(5);
        for (int t = 0; t < 1000; ++t) {
            FactoredOrder fo;
            fo.p = std::vector<std::uint64_t>{3, 5, 7, 11}[rng() % 4];
            fo.p_exponent = rng() % 8;
            Int want = pow_int(Int(static_cast<unsigned long>(fo.p)), fo.p_exponent);
            int nf = static_cast<int>(rng() % 5);
            for (int i = 0; i < nf; ++i) {
                unsigned a = 1 + static_cast<unsigned>(rng() % 16);
                int s = rng() % 2 ? 1 : -1;
                fo.factors.push_back({a, s});
                want *= pow_int(Int(static_cast<unsigned long>(fo.p)), a) + s;
            }
            if (evaluate(fo) != want) return false;
        }
    }
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    (void)argc;
    (void)argv;
    criterion(1, "order-formula oracle equivalence (exact)", criterion1);
    criterion(2, "independent point-count oracle: SO(5;3) = 51840", criterion2);
    criterion(3, "Zsigmondy sweep p <= 50, 2 <= d <= 12", criterion3);
    criterion(4, "worked single-prime certificates at p = 7", criterion4);
    criterion(5, "worked isospectral pair at p = 7", criterion5);
    criterion(6, "tower with strictly increasing ratios", criterion6);
    criterion(7, "divisor table rows match closed-form orders", criterion7);
    criterion(8, "round-trip verification, tamper detection, determinism",
              criterion8);
    criterion(9, "property suites (fields, squares, reductions, reflections, "
                 "splitting, factored orders)",
              criterion9);
    if (g_failures) {
        std::cout << g_failures << " criterion(s) FAILED" << std::endl;
        return 1;
    }
    std::cout << "all acceptance criteria passed" << std::endl;
    return 0;
}
