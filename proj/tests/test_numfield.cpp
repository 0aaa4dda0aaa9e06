#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "orbicover/numfield.hpp"

using namespace orbicover;

namespace {

NumberField sqrt2_field() { return make_field({-2, 0, 1}); }

Rat interval_width(const RatInterval& iv) { return iv.hi - iv.lo; }

RatInterval refine_to(const ZPoly& f, RatInterval iv, const Rat& width) {
    QPoly q = qp_from_z(f);
    while (interval_width(iv) > width) iv = refine_interval(q, iv);
    return iv;
}

}  // namespace

TEST_CASE("make_field isolates the roots of x^2 - 2") {
    NumberField k = sqrt2_field();
    CHECK(k.degree == 2);
    CHECK(k.poly_disc == 8);
    REQUIRE(k.real_roots.size() == 2);
    // refined midpoints square to 2 within 1/100
    for (const auto& iv0 : k.real_roots) {
        RatInterval iv = refine_to(k.min_poly, iv0, Rat(1, 1000000));
        Rat mid = (iv.lo + iv.hi) / 2;
        Rat err = mid * mid - 2;
        CHECK(abs(err) < Rat(1, 100));
    }
    CHECK(k.real_roots[0].hi <= k.real_roots[1].lo);
}

TEST_CASE("linear polynomials are fields of degree one") {
    NumberField k = make_field({0, 1});
    CHECK(k.degree == 1);
    REQUIRE(k.real_roots.size() == 1);
    CHECK(k.real_roots[0].lo < 0);
    CHECK(k.real_roots[0].hi > 0);
}

TEST_CASE("golden ratio minimal polynomial") {
    NumberField k = make_field({-1, -1, 1});
    CHECK(k.degree == 2);
    CHECK(k.poly_disc == 5);
    REQUIRE(k.real_roots.size() == 2);
    RatInterval hi = refine_to(k.min_poly, k.real_roots[1], Rat(1, 10000));
    Rat mid = (hi.lo + hi.hi) / 2;
    CHECK(abs(mid - Rat(1618, 1000)) < Rat(1, 100));
}

TEST_CASE("construction rejects bad inputs") {
    CHECK_THROWS_AS(make_field({1, 2}), NotMonic);
    CHECK_THROWS_AS(make_field({-1, 0, 1}), ReduciblePolynomial);   // (x-1)(x+1)
    CHECK_THROWS_AS(make_field({1, 2, 1}), ReduciblePolynomial);    // (x+1)^2
    CHECK_THROWS_AS(make_field({4, 0, 0, 0, 1}), ReduciblePolynomial);  // x^4+4
}

TEST_CASE("x^4 + 1 is certified irreducible through the fallback search") {
    NumberField k = make_field({1, 0, 0, 0, 1});
    CHECK(k.degree == 4);
    CHECK(k.real_roots.empty());
    CHECK_FALSE(is_totally_real(k));
}

TEST_CASE("totally real checks") {
    CHECK(is_totally_real(sqrt2_field()));
    CHECK_FALSE(is_totally_real(make_field({1, 0, 1})));
    CHECK(is_totally_real(make_field({-1, -3, 0, 1})));  // x^3 - 3x - 1
}

TEST_CASE("prime splitting in Q(sqrt 2)") {
    NumberField k = sqrt2_field();
    auto f7 = factor_prime(k, 7);
    REQUIRE(f7.size() == 2);
    CHECK(f7[0].factor_poly == PolyFp{3, 1});  // x - 4
    CHECK(f7[1].factor_poly == PolyFp{4, 1});  // x - 3
    CHECK(f7[0].residue_degree == 1);
    CHECK(f7[0].ramification == 1);

    auto f5 = factor_prime(k, 5);
    REQUIRE(f5.size() == 1);
    CHECK(f5[0].residue_degree == 2);

    CHECK_THROWS_AS(factor_prime(k, 2), DyadicPrime);
    CHECK_THROWS_AS(factor_prime(make_field({-5, 0, 1}), 5), BadPrime);
}

TEST_CASE("Dedekind degree sums and product reconstruction") {
    std::vector<NumberField> fields;
    fields.push_back(sqrt2_field());
    fields.push_back(make_field({-1, -1, 1}));
    fields.push_back(make_field({-1, -3, 0, 1}));
    fields.push_back(make_field({1, 0, 0, 0, 1}));
    int cases = 0;
    for (const auto& k : fields) {
        for (std::uint32_t p : small_primes()) {
            if (p > 800) break;
            if (p == 2 || mpz_divisible_ui_p(k.poly_disc.get_mpz_t(), p)) continue;
            auto factors = factor_prime(k, p);
            int degsum = 0;
            PolyFp prod{1};
            for (const auto& f : factors) {
                degsum += f.residue_degree;
                prod = pf_mul(prod, f.factor_poly, p);
            }
            CHECK(degsum == k.degree);
            CHECK(prod == detail::zpoly_mod_p(k.min_poly, p));
            ++cases;
        }
    }
    CHECK(cases >= 500);
}

TEST_CASE("reduction map worked examples") {
    NumberField k = sqrt2_field();
    auto f7 = factor_prime(k, 7);
    // theta - 3 corresponds to factor x + 4 (= x - 3 mod 7)
    const PrimeIdealFactor& p_theta3 = f7[1];
    FqContext ctx = residue_context(p_theta3);
    FieldElem minus_theta = field_neg(k, elem_theta(k));
    CHECK(reduce_element(k, minus_theta, p_theta3, ctx) == fq_from_int(ctx, 4));
    CHECK(reduce_element(k, elem_from_rat(k, 1), p_theta3, ctx) == fq_one(ctx));

    auto f5 = factor_prime(k, 5);
    FqContext ctx25 = residue_context(f5[0]);
    FqElem theta_img = reduce_element(k, elem_theta(k), f5[0], ctx25);
    CHECK(theta_img.c == std::vector<std::uint64_t>{0, 1});

    FieldElem bad = elem_from_rat(k, Rat(1, 7));
    CHECK_THROWS_AS(reduce_element(k, bad, p_theta3, ctx), DenominatorNotCoprime);
}

TEST_CASE("reduction is a ring homomorphism on random elements") {
    NumberField k = sqrt2_field();
    std::mt19937_64 rng(99);
    auto rand_elem = [&] {
        FieldElem e = elem_zero(k);
        for (int i = 0; i < k.degree; ++i) {
            long num = static_cast<long>(rng() % 41) - 20;
            long den = 1 + static_cast<long>(rng() % 9);
            e.coeffs[i] = Rat(num, den);
        }
        return e;
    };
    for (std::uint64_t p : {7ull, 5ull, 3ull}) {
        auto factors = factor_prime(k, p);
        for (const auto& pf : factors) {
            FqContext ctx = residue_context(pf);
            for (int t = 0; t < 1000; ++t) {
                FieldElem a = rand_elem(), b = rand_elem();
                bool ok = true;
                for (const auto& e : {a, b})
                    for (const auto& c : e.coeffs)
                        if (mpz_divisible_ui_p(c.get_den().get_mpz_t(), p)) ok = false;
                if (!ok) continue;
                FqElem ra = reduce_element(k, a, pf, ctx);
                FqElem rb = reduce_element(k, b, pf, ctx);
                CHECK(reduce_element(k, field_add(k, a, b), pf, ctx) ==
                      fq_add(ctx, ra, rb));
                CHECK(reduce_element(k, field_mul(k, a, b), pf, ctx) ==
                      fq_mul(ctx, ra, rb));
            }
        }
    }
}

TEST_CASE("split pair search") {
    NumberField k = sqrt2_field();
    auto [p, f1, f2] = find_split_pair(k, 100);
    CHECK(p == 7);
    CHECK(f1.residue_degree == f2.residue_degree);
    CHECK(f1.factor_poly == PolyFp{3, 1});
    CHECK(f2.factor_poly == PolyFp{4, 1});

    CHECK_THROWS_AS(find_split_pair(make_field({0, 1}), 100), FieldIsRationals);
    CHECK_THROWS_AS(find_split_pair(k, 5), NoSplitPrimeInBound);

    auto [p5, g1, g2] = find_split_pair(make_field({-1, -1, 1}), 100);
    CHECK(p5 == 11);
    CHECK(g1.factor_poly == PolyFp{3, 1});   // x - 8
    CHECK(g2.factor_poly == PolyFp{7, 1});   // x - 4
}

TEST_CASE("certified signs are stable under interval refinement") {
    NumberField k = sqrt2_field();
    FieldElem minus_theta = field_neg(k, elem_theta(k));
    int s0 = certified_sign_at(k, minus_theta, 0);
    int s1 = certified_sign_at(k, minus_theta, 1);
    CHECK(s0 == 1);   // -theta > 0 at the negative root
    CHECK(s1 == -1);  // -theta < 0 at the positive root
    // refine the stored intervals and recompute: signs must not move
    NumberField refined = k;
    QPoly f = qp_from_z(k.min_poly);
    for (int round = 0; round < 12; ++round)
        for (auto& iv : refined.real_roots) iv = refine_interval(f, iv);
    CHECK(certified_sign_at(refined, minus_theta, 0) == s0);
    CHECK(certified_sign_at(refined, minus_theta, 1) == s1);
    CHECK(certified_sign_at(k, elem_zero(k), 0) == 0);
}
