// Command-line surface: validate / primes / certify / verify / orders.
// Input is a JSON object {min_poly, form_diagonal, options?}; output is
// human-readable text or schema JSON. Exit codes: 0 success, 1 verification
// failure, 2 input error, 3 mathematical precondition failure.
#pragma once

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "orbicover/certify.hpp"

namespace orbicover {

namespace cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailed = 1;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitMathError = 3;

namespace detail {

inline std::string read_source(const std::string& path, std::istream& in) {
    if (path == "-") {
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }
    std::ifstream f(path);
    if (!f) throw MalformedCertificate("cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline json parse_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw MalformedCertificate("invalid JSON");
    return j;
}

struct LoadedInput {
    AdmissiblePair pair;
    std::uint64_t bound = 100;
    CertMode mode = CertMode::paper;
    std::uint64_t seed = 0;
    bool with_witness = false;
    std::string format = "text";
};

inline LoadedInput load_input(const std::string& path, std::istream& in) {
    json j = parse_json(read_source(path, in));
    LoadedInput li{parse_input_pair(j)};
    if (j.contains("options")) {
        const json& o = j.at("options");
        if (o.contains("bound")) li.bound = o.at("bound").get<std::uint64_t>();
        if (o.contains("mode")) li.mode = orbicover::detail::parse_mode(o.at("mode"));
        if (o.contains("seed")) li.seed = o.at("seed").get<std::uint64_t>();
        if (o.contains("with_witness"))
            li.with_witness = o.at("with_witness").get<bool>();
        if (o.contains("format")) li.format = o.at("format").get<std::string>();
    }
    return li;
}

inline std::string poly_to_text(const PolyFp& f) {
    if (f.empty()) return "0";
    std::string s;
    for (std::size_t i = f.size(); i-- > 0;) {
        if (f[i] == 0) continue;
        if (!s.empty()) s += " + ";
        if (i == 0 || f[i] != 1) s += std::to_string(f[i]);
        if (i >= 1) s += "x";
        if (i >= 2) s += "^" + std::to_string(i);
    }
    return s.empty() ? "0" : s;
}

inline std::string factored_to_text(const FactoredOrder& fo) {
    std::ostringstream ss;
    if (fo.p_unbounded)
        ss << fo.p << "^X";
    else
        ss << fo.p << "^" << fo.p_exponent;
    for (const auto& f : fo.factors)
        ss << " * (" << fo.p << "^" << f.a << (f.sign > 0 ? " + 1)" : " - 1)");
    return ss.str();
}

inline std::string interval_to_text(const NumberField& k, RatInterval iv) {
    // a short decimal rendering of the root, for humans only
    QPoly f = qp_from_z(k.min_poly);
    while (iv.hi - iv.lo > Rat(1, 100000)) iv = refine_interval(f, iv);
    Rat mid = (iv.lo + iv.hi) / 2;
    double d = mid.get_d();
    std::ostringstream ss;
    ss.precision(4);
    ss << std::fixed << d;
    return ss.str();
}

inline void write_output(const std::string& text, const std::string& out_path,
                         std::ostream& out) {
    if (out_path.empty()) {
        out << text;
        if (!text.empty() && text.back() != '\n') out << "\n";
        return;
    }
    std::ofstream f(out_path);
    if (!f) throw MalformedCertificate("cannot write " + out_path);
    f << text << "\n";
}

}  // namespace detail

/// Run the CLI on an argument vector (argv[0] excluded). The streams stand
/// in for stdin/stdout/stderr so the surface is testable in-process.
inline int run(std::vector<std::string> args, std::istream& in, std::ostream& out,
               std::ostream& err) {
    CLI::App app{"certificates for geometrically equivalent congruence covers"};
    app.require_subcommand(1);

    std::string input_path = "-", out_path, cert_path;
    std::uint64_t bound = 0, seed = 0;
    bool seed_given = false, witness = false;
    std::string mode_str, format_str;
    std::optional<std::uint64_t> prime_opt;
    bool pair_flag = false;
    int tower_stages = 0;

    auto add_io = [&](CLI::App* cmd) {
        cmd->add_option("-i,--input", input_path, "input JSON file, or - for stdin");
        cmd->add_option("-o,--out", out_path, "write output to a file");
        cmd->add_option("--format", format_str, "text or json");
    };

    CLI::App* validate = app.add_subcommand("validate", "check admissibility");
    add_io(validate);

    CLI::App* primes = app.add_subcommand("primes", "list good primes");
    add_io(primes);
    primes->add_option("--bound", bound, "prime bound");

    CLI::App* certify = app.add_subcommand("certify", "emit certificates");
    add_io(certify);
    certify->add_option("--bound", bound, "prime bound");
    certify->add_option("--prime", prime_opt, "equivalence certificates at p");
    certify->add_flag("--pair", pair_flag, "isospectral pair certificate");
    certify->add_option("--tower", tower_stages, "tower certificate with J stages");
    certify->add_option("--mode", mode_str, "paper or strict");
    certify->add_option("--seed", seed, "seed for randomized searches")
        ->each([&](const std::string&) { seed_given = true; });
    certify->add_flag("--with-witness", witness, "attach explicit matrix witnesses");

    CLI::App* verify = app.add_subcommand("verify", "re-check a certificate file");
    verify->add_option("certificate", cert_path, "certificate JSON file")->required();
    verify->add_option("--format", format_str, "text or json");

    CLI::App* orders_cmd = app.add_subcommand("orders", "finite group orders");
    int dim = 0, rr = 1;
    std::uint64_t pp = 0;
    std::string square_class_str, oracle_str;
    orders_cmd->add_option("--dim", dim, "form dimension")->required();
    orders_cmd->add_option("--p", pp, "odd prime")->required();
    orders_cmd->add_option("--r", rr, "residue degree");
    orders_cmd->add_option("--square-class", square_class_str, "square or nonsquare");
    orders_cmd->add_option("--oracle", oracle_str, "brute or count");
    orders_cmd->add_option("-o,--out", out_path, "write output to a file");

    try {
        std::vector<const char*> argv{"orbicover"};
        for (const auto& a : args) argv.push_back(a.c_str());
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return kExitInputError;
    }

    try {
        if (app.got_subcommand(validate)) {
            json j = detail::parse_json(detail::read_source(input_path, in));
            ZPoly mp;
            for (const auto& c : j.at("min_poly"))
                mp.push_back(orbicover::detail::json_to_int(c));
            NumberField field = make_field(mp);
            AdmissiblePair pair;
            try {
                pair = parse_input_pair(j);
            } catch (const NotTotallyReal& e) {
                err << "inadmissible: " << e.what() << "\n";
                return kExitMathError;
            } catch (const WrongSignatureProfile& e) {
                err << "inadmissible: " << e.what() << "\n";
                for (std::size_t pl = 0; pl < field.real_roots.size(); ++pl)
                    err << "  place " << pl << " near "
                        << detail::interval_to_text(field, field.real_roots[pl]) << "\n";
                return kExitMathError;
            } catch (const DimensionTooSmall& e) {
                err << "inadmissible: " << e.what() << "\n";
                return kExitMathError;
            }
            std::ostringstream ss;
            if (format_str == "json") {
                json o;
                o["admissible"] = true;
                o["m"] = pair.m;
                o["distinguished_place"] = pair.distinguished_place;
                json sigs = json::array();
                for (std::size_t pl = 0; pl < pair.field.real_roots.size(); ++pl) {
                    auto [pos, neg] = signature_at(pair.field, pair.form,
                                                   static_cast<int>(pl));
                    sigs.push_back({{"place", pl}, {"pos", pos}, {"neg", neg}});
                }
                o["signatures"] = sigs;
                ss << o.dump(2);
            } else {
                ss << "admissible, m=" << pair.m << ", distinguished place theta~"
                   << detail::interval_to_text(
                          pair.field, pair.field.real_roots[pair.distinguished_place])
                   << "\n";
                for (std::size_t pl = 0; pl < pair.field.real_roots.size(); ++pl) {
                    auto [pos, neg] = signature_at(pair.field, pair.form,
                                                   static_cast<int>(pl));
                    ss << "  place " << pl << " theta~"
                       << detail::interval_to_text(pair.field, pair.field.real_roots[pl])
                       << "  signature (" << pos << "," << neg << ")"
                       << (static_cast<int>(pl) == pair.distinguished_place
                               ? "  <- hyperbolic"
                               : "")
                       << "\n";
                }
            }
            detail::write_output(ss.str(), out_path, out);
            return kExitOk;
        }

        if (app.got_subcommand(primes)) {
            detail::LoadedInput li = detail::load_input(input_path, in);
            if (bound) li.bound = bound;
            if (!format_str.empty()) li.format = format_str;
            GoodPrimeScan scan = good_primes(li.pair, li.bound);
            std::ostringstream ss;
            if (li.format == "json") {
                json o;
                json g = json::array();
                for (const auto& gp : scan.good) {
                    json e;
                    e["p"] = gp.pf.p;
                    e["factor_poly"] =
                        orbicover::detail::polyfp_to_json(gp.pf.factor_poly);
                    e["r"] = gp.pf.residue_degree;
                    e["type_label"] = gp.type_label;
                    e["group_order"] =
                        orbicover::detail::factored_to_json(gp.group_order);
                    g.push_back(e);
                }
                o["good"] = g;
                json x = json::array();
                for (const auto& ex : scan.excluded) {
                    json e;
                    e["p"] = ex.p;
                    if (ex.factor_poly)
                        e["factor_poly"] =
                            orbicover::detail::polyfp_to_json(*ex.factor_poly);
                    e["reason"] = ex.reason;
                    x.push_back(e);
                }
                o["excluded"] = x;
                ss << o.dump(2);
            } else {
                ss << "good primes (bound " << li.bound << "):\n";
                for (const auto& gp : scan.good)
                    ss << "  p=" << gp.pf.p << "  ("
                       << detail::poly_to_text(gp.pf.factor_poly) << ")  r="
                       << gp.pf.residue_degree << "  " << gp.type_label << "  |G| = "
                       << detail::factored_to_text(gp.group_order) << "\n";
                ss << "excluded:\n";
                for (const auto& ex : scan.excluded) {
                    ss << "  p=" << ex.p;
                    if (ex.factor_poly)
                        ss << " (" << detail::poly_to_text(*ex.factor_poly) << ")";
                    ss << "  " << ex.reason << "\n";
                }
            }
            detail::write_output(ss.str(), out_path, out);
            return kExitOk;
        }

        if (app.got_subcommand(certify)) {
            detail::LoadedInput li = detail::load_input(input_path, in);
            if (bound) li.bound = bound;
            if (!mode_str.empty())
                li.mode = mode_str == "strict" ? CertMode::strict : CertMode::paper;
            if (seed_given) li.seed = seed;
            if (witness) li.with_witness = true;
            CertOptions opts{li.mode, li.with_witness, li.seed};
            int selected = (prime_opt ? 1 : 0) + (pair_flag ? 1 : 0) +
                           (tower_stages > 0 ? 1 : 0);
            if (selected != 1) {
                err << "choose exactly one of --prime, --pair, --tower\n";
                return kExitInputError;
            }
            json output;
            if (prime_opt) {
                if (!is_prime(Int(static_cast<unsigned long>(*prime_opt)))) {
                    err << "--prime expects a prime number\n";
                    return kExitInputError;
                }
                GoodPrimeScan scan = good_primes(
                    li.pair, std::max<std::uint64_t>(li.bound, *prime_opt));
                json arr = json::array();
                for (const auto& gp : scan.good) {
                    if (gp.pf.p != *prime_opt) continue;
                    arr.push_back(to_json(build_certificate(li.pair, gp, opts)));
                }
                if (arr.empty()) {
                    err << "p=" << *prime_opt
                        << " has no good reduction for this input\n";
                    return kExitMathError;
                }
                output = arr;
            } else if (pair_flag) {
                output = to_json(build_pair_certificate(li.pair, li.bound, opts));
            } else {
                output = to_json(
                    build_tower_certificate(li.pair, tower_stages, li.bound, opts));
            }
            detail::write_output(output.dump(2), out_path, out);
            return kExitOk;
        }

        if (app.got_subcommand(verify)) {
            json j = detail::parse_json(detail::read_source(cert_path, in));
            std::vector<json> certs;
            if (j.is_array())
                for (const auto& c : j) certs.push_back(c);
            else
                certs.push_back(j);
            bool all_ok = true;
            std::ostringstream ss;
            json jrep = json::array();
            for (std::size_t i = 0; i < certs.size(); ++i) {
                VerificationReport rep = verify_certificate(certs[i]);
                all_ok = all_ok && rep.all_passed();
                if (format_str == "json") {
                    json checks = json::array();
                    for (const auto& c : rep.checks)
                        checks.push_back({{"claim", c.claim}, {"pass", c.pass}});
                    jrep.push_back({{"certificate", i},
                                    {"all_passed", rep.all_passed()},
                                    {"checks", checks}});
                } else {
                    ss << "certificate " << i + 1 << "/" << certs.size() << ":\n";
                    for (const auto& c : rep.checks)
                        ss << "  " << (c.pass ? "pass" : "FAIL") << "  " << c.claim
                           << "\n";
                }
            }
            if (format_str == "json")
                out << jrep.dump(2) << "\n";
            else
                out << ss.str() << (all_ok ? "OK" : "FAILED") << "\n";
            return all_ok ? kExitOk : kExitVerifyFailed;
        }

        if (app.got_subcommand(orders_cmd)) {
            std::optional<SquareClass> cls;
            if (!square_class_str.empty()) {
                if (square_class_str == "square")
                    cls = SquareClass::square;
                else if (square_class_str == "nonsquare")
                    cls = SquareClass::nonsquare;
                else {
                    err << "--square-class must be square or nonsquare\n";
                    return kExitInputError;
                }
            }
            if (dim % 2 == 0 && !cls) {
                err << "even dimension requires --square-class\n";
                return kExitInputError;
            }
            FactoredOrder fo = so_order(dim, pp, rr, cls);
            std::ostringstream ss;
            ss << fo.label << "  " << detail::factored_to_text(fo) << " = "
               << evaluate(fo).get_str() << "\n";
            if (!oracle_str.empty()) {
                FqContext ctx = rr == 1 ? make_prime_context(pp)
                                        : make_fq_context(pp, [&] {
                                              // smallest irreducible of degree r
                                              PolyFp m(rr + 1, 0);
                                              m[rr] = 1;
                                              for (std::uint64_t c0 = 1;; ++c0) {
                                                  std::uint64_t v = c0;
                                                  for (int i = 0; i < rr; ++i) {
                                                      m[i] = v % pp;
                                                      v /= pp;
                                                  }
                                                  auto fs = factor_poly_mod_p(pp, m);
                                                  if (fs.size() == 1 &&
                                                      fs[0].second == 1)
                                                      return m;
                                              }
                                          }());
                FqForm form = make_canonical_fq_form(ctx, dim, cls);
                Int got = oracle_str == "brute" ? brute_force_so_count(form)
                                                : point_count_so_order(form);
                bool agree = got == evaluate(fo);
                ss << "oracle " << oracle_str << " = " << got.get_str() << "  "
                   << (agree ? "(agrees)" : "(MISMATCH)") << "\n";
                detail::write_output(ss.str(), out_path, out);
                return agree ? kExitOk : kExitVerifyFailed;
            }
            detail::write_output(ss.str(), out_path, out);
            return kExitOk;
        }
    } catch (const MalformedCertificate& e) {
        err << "input error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const json::exception& e) {
        err << "input error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const NotTotallyReal& e) {
        err << "precondition: " << e.what() << "\n";
        return kExitMathError;
    } catch (const WrongSignatureProfile& e) {
        err << "precondition: " << e.what() << "\n";
        return kExitMathError;
    } catch (const error& e) {
        err << "precondition: " << e.what() << "\n";
        return kExitMathError;
    }
    return kExitInputError;
}

}  // namespace cli

}  // namespace orbicover
