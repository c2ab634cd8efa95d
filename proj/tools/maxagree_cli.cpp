#include <cstdint>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "maxagree/io.hpp"

namespace {

using namespace maxagree;

Mode mode_from_flag(const std::string& text) {
    if (text == "direct")
        return Mode::Direct;
    if (text == "recursive" || text == "paper")
        return Mode::Recursive;
    throw ValidationError("unknown mode '" + text + "' (use direct or recursive)");
}

Instance load_instance(const std::string& path) {
    return parse_instance(load_json_file(path));
}

Json build_summary(const BuildResult& result) {
    const LayeredCoupling& c = result.coupling;
    Json j;
    j["format"] = "build_summary";
    j["mode"] = format_mode(c.mode);
    Json dist = Json::object();
    for (const auto& [s, mass] : sigma_distribution(c))
        dist[format_sigma(s)] = format_rational(mass);
    j["sigma_distribution"] = std::move(dist);
    std::vector<Rat> ceiling = agreement_ceiling(c.law1, c.law2);
    Json tv = Json::object();
    Json ceil = Json::object();
    for (std::size_t t = 0; t < ceiling.size(); ++t) {
        tv[std::to_string(t)] = format_rational(Rat(1) - ceiling[t]);
        ceil[std::to_string(t)] = format_rational(ceiling[t]);
    }
    j["tv"] = std::move(tv);
    j["agreement_ceiling"] = std::move(ceil);
    std::vector<Rat> achieved = agreement_profile(c);
    Json ach = Json::object();
    for (std::size_t t = 0; t < achieved.size(); ++t)
        ach[std::to_string(t)] = format_rational(achieved[t]);
    j["agreement_achieved"] = std::move(ach);
    MaximalityReport m = verify_maximality(c);
    j["maximal"] = m.passed;
    j["maximality"] = maximality_json(m)["per_t"];
    if (c.mode == Mode::Recursive)
        j["note"] = "recursive mode trims to the current meet at each step; "
                    "its agreement profile can fall below the ceiling for t >= 1";
    return j;
}

struct VerifyOutcome {
    Json body;
    bool passed = true;
};

Json oracle_check(const std::string& name, int t, const Rat& reference,
                  const std::function<Rat()>& run, bool& all_ok) {
    Json entry;
    entry["name"] = name;
    entry["t"] = t;
    try {
        Rat value = run();
        bool agrees = value == reference;
        entry["agrees"] = agrees;
        if (!agrees) {
            entry["oracle"] = format_rational(value);
            entry["library"] = format_rational(reference);
            all_ok = false;
        }
    } catch (const CapExceeded& e) {
        entry["skipped"] = e.what();
    }
    return entry;
}

VerifyOutcome run_verify(const LayeredCoupling& c, bool with_oracle) {
    VerifyOutcome out;
    CouplingReport cr = verify_coupling(c);
    MaximalityReport mr = verify_maximality(c);
    ConditionalReport condr = conditional_marginal_check_all(c);
    out.body["coupling"] = coupling_report_json(cr);
    out.body["maximality"] = maximality_json(mr);
    out.body["conditional_marginals"] = conditional_report_json(condr, c.law1.alphabet);
    out.passed = cr.passed && mr.passed && condr.passed;
    if (with_oracle) {
        bool oracle_ok = true;
        Json checks = Json::array();
        std::vector<Rat> ceiling = agreement_ceiling(c.law1, c.law2);
        for (int t = 0; t <= c.law1.horizon; ++t) {
            Rat tv_ref = Rat(1) - ceiling[static_cast<std::size_t>(t)];
            checks.push_back(oracle_check(
                "tv_event_enumeration", t, tv_ref,
                [&] { return tv_by_event_enumeration(c.law1, c.law2, t); }, oracle_ok));
            checks.push_back(oracle_check(
                "kappa_subset_enumeration", t, kappa(c.law1, c.law2, t),
                [&] { return kappa_by_subset_enumeration(c.law1, c.law2, t); }, oracle_ok));
        }
        Json o;
        o["passed"] = oracle_ok;
        o["checks"] = std::move(checks);
        out.body["oracle"] = std::move(o);
        out.passed = out.passed && oracle_ok;
    }
    return out;
}

Json kappa_body(const Instance& instance, const LayeredCoupling& c) {
    Json j;
    HazardProfile profile = kappa_profile(c);
    Json per_t = hazard_profile_json(profile, c.law1.alphabet);
    for (Json& entry : per_t) {
        int t = entry.at("t").get<int>();
        entry.update(countable_bounds_json(countable_bounds(instance.law1,
                                                            instance.law2, t)));
    }
    j["per_t"] = std::move(per_t);
    CountableBoundsAlternatives alt =
        countable_bounds_alternatives(instance.law1, instance.law2);
    Json off = Json::array();
    for (const auto& entry : alt.off_by_one)
        off.push_back(entry ? countable_bounds_json(*entry) : Json(nullptr));
    Json alternatives;
    alternatives["off_by_one"] = std::move(off);
    alternatives["uniform"] = countable_bounds_json(alt.uniform);
    j["alternatives"] = std::move(alternatives);
    return j;
}

int run_build(const std::string& instance_path, const std::string& mode_text,
              const std::string& output_path) {
    Instance instance = load_instance(instance_path);
    BuildResult result = build(instance.law1, instance.law2, mode_from_flag(mode_text));
    Json out;
    out["summary"] = build_summary(result);
    Json coupling = serialize_coupling(result.coupling);
    if (output_path.empty()) {
        out["coupling"] = std::move(coupling);
    } else {
        write_json_file(output_path, coupling);
        out["coupling_path"] = output_path;
    }
    std::cout << dump_json(out);
    return 0;
}

int run_verify(const std::string& coupling_path, const std::string& instance_path,
               bool with_oracle) {
    Instance instance = load_instance(instance_path);
    LayeredCoupling c = parse_coupling(load_json_file(coupling_path), &instance);
    VerifyOutcome outcome = run_verify(c, with_oracle);
    Json j;
    j["format"] = "verify_report";
    j.update(outcome.body);
    j["passed"] = outcome.passed;
    std::cout << dump_json(j);
    return outcome.passed ? 0 : 1;
}

int run_kappa(const std::string& instance_path, const std::string& mode_text) {
    Instance instance = load_instance(instance_path);
    BuildResult result = build(instance.law1, instance.law2, mode_from_flag(mode_text));
    Json j;
    j["format"] = "kappa_report";
    j["mode"] = format_mode(result.coupling.mode);
    j.update(kappa_body(instance, result.coupling));
    std::cout << dump_json(j);
    return 0;
}

int run_extend(const std::string& instance_path, const std::string& mode_text,
               const std::string& output_path) {
    Instance instance = load_instance(instance_path);
    BuildResult result = build(instance.law1, instance.law2, mode_from_flag(mode_text));
    ExtendedCoupling ec = extend_with_tau(result.coupling);
    TauReport report = verify_tau(ec);
    Json j;
    j["format"] = "extend_report";
    j["mode"] = format_mode(result.coupling.mode);
    j["tau"] = tau_report_json(report, instance.law1.alphabet);
    j["hazards"] = hazard_profile_json(ec.hazards, instance.law1.alphabet);
    Json extended = serialize_extended(ec);
    if (output_path.empty()) {
        j["extended"] = std::move(extended);
    } else {
        write_json_file(output_path, extended);
        j["extended_path"] = output_path;
    }
    std::cout << dump_json(j);
    return report.passed() ? 0 : 1;
}

struct SampleAtom {
    SigmaValue sigma = SigmaValue::beyond();
    TauValue tau = TauValue::beyond();
};

int run_sample(const std::string& path, long long n, std::uint64_t seed,
               const std::string& format) {
    Json j = load_json_file(path);
    if (!j.is_object() || !j.contains("format") || !j.at("format").is_string())
        throw ValidationError("input is not a coupling or extended coupling export");
    std::string kind = j.at("format").get<std::string>();
    std::vector<SampleAtom> atoms;
    std::vector<Rat> cumulative;
    std::map<SigmaValue, Rat> sigma_exact;
    std::map<TauValue, Rat> tau_exact;
    Rat total(0);
    bool extended = kind == "extended_coupling";
    if (kind == "coupling") {
        LayeredCoupling c = parse_coupling(j, nullptr);
        sigma_exact = sigma_distribution(c);
        for (const auto& [s, layer] : c.layers)
            for (const auto& [pair, mass] : layer) {
                (void)pair;
                total += mass;
                atoms.push_back(SampleAtom{s, TauValue::beyond()});
                cumulative.push_back(total);
            }
    } else if (extended) {
        ExtendedCoupling ec = parse_extended(j, nullptr);
        sigma_exact = sigma_distribution(ec.base);
        for (const auto& [key, mass] : ec.atoms) {
            const auto& [p1, p2, tau] = key;
            total += mass;
            atoms.push_back(SampleAtom{first_disagreement(p1, p2), tau});
            cumulative.push_back(total);
            tau_exact[tau] += mass;
        }
    } else {
        throw ValidationError("input is not a coupling or extended coupling export");
    }
    if (total != 1)
        throw ValidationError("atom masses total " + format_rational(total) +
                              ", expected 1/1");
    std::mt19937_64 gen(seed);
    std::map<SigmaValue, long long> sigma_count;
    std::map<TauValue, long long> tau_count;
    for (long long i = 0; i < n; ++i) {
        Rat u = dyadic64(gen());
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        if (it == cumulative.end())
            throw InternalError("sampler fell off the cumulative table");
        const SampleAtom& atom = atoms[static_cast<std::size_t>(it - cumulative.begin())];
        ++sigma_count[atom.sigma];
        if (extended)
            ++tau_count[atom.tau];
    }
    auto frequency_table = [&](const std::map<SigmaValue, Rat>& exact,
                               std::map<SigmaValue, long long>& counts) {
        Json table = Json::object();
        for (const auto& [value, mass] : exact) {
            Json cell;
            long long count = counts[value];
            cell["count"] = count;
            cell["exact"] = format_rational(mass);
            cell["empirical"] = format_rational(rat(count, n));
            table[format_sigma(value)] = std::move(cell);
        }
        return table;
    };
    if (format == "csv") {
        std::ostringstream out;
        out << "kind,value,count,n,exact\n";
        auto rows = [&](const std::string& label, const std::map<SigmaValue, Rat>& exact,
                        std::map<SigmaValue, long long>& counts) {
            for (const auto& [value, mass] : exact)
                out << label << ',' << format_sigma(value) << ',' << counts[value] << ','
                    << n << ',' << format_rational(mass) << '\n';
        };
        rows("sigma", sigma_exact, sigma_count);
        if (extended)
            rows("tau", tau_exact, tau_count);
        std::cout << out.str();
        return 0;
    }
    Json report;
    report["format"] = "sample_report";
    report["kind"] = kind;
    report["n"] = n;
    report["seed"] = seed;
    report["sigma"] = frequency_table(sigma_exact, sigma_count);
    if (extended)
        report["tau"] = frequency_table(tau_exact, tau_count);
    std::cout << dump_json(report);
    return 0;
}

int run_report(const std::string& instance_path, const std::string& mode_text,
               bool with_oracle) {
    Instance instance = load_instance(instance_path);
    BuildResult result = build(instance.law1, instance.law2, mode_from_flag(mode_text));
    VerifyOutcome verify_outcome = run_verify(result.coupling, with_oracle);
    ExtendedCoupling ec = extend_with_tau(result.coupling);
    TauReport tau_report = verify_tau(ec);
    Json j;
    j["format"] = "instance_report";
    j["instance"] = serialize_instance(instance);
    j["build"] = build_summary(result);
    j["verify"] = verify_outcome.body;
    Json kappa_section;
    kappa_section["mode"] = format_mode(result.coupling.mode);
    kappa_section.update(kappa_body(instance, result.coupling));
    j["kappa"] = std::move(kappa_section);
    j["tau"] = tau_report_json(tau_report, instance.law1.alphabet);
    bool passed = verify_outcome.passed && tau_report.passed();
    j["passed"] = passed;
    std::cout << dump_json(j);
    return passed ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact agreement couplings of two path laws over a finite horizon"};
    app.require_subcommand(1);

    std::string instance_path;
    std::string coupling_path;
    std::string file_path;
    std::string mode_text = "direct";
    std::string output_path;
    std::string sample_format = "json";
    long long n = 0;
    std::uint64_t seed = 0;
    bool with_oracle = false;

    CLI::App* cmd_build = app.add_subcommand(
        "build", "construct a layered coupling from an instance file");
    cmd_build->add_option("instance", instance_path, "instance JSON file")->required();
    cmd_build->add_option("--mode", mode_text, "construction mode: direct or recursive")
        ->capture_default_str();
    cmd_build->add_option("--output", output_path,
                          "write the coupling export here instead of embedding it");

    CLI::App* cmd_verify = app.add_subcommand(
        "verify", "check a coupling export against its instance");
    cmd_verify->add_option("coupling", coupling_path, "coupling JSON file")->required();
    cmd_verify->add_option("instance", instance_path, "instance JSON file")->required();
    cmd_verify->add_flag("--oracle", with_oracle,
                         "cross-check against brute-force enumeration");

    CLI::App* cmd_kappa = app.add_subcommand(
        "kappa", "per-time hazard rates and one-step bounds for an instance");
    cmd_kappa->add_option("instance", instance_path, "instance JSON file")->required();
    cmd_kappa->add_option("--mode", mode_text, "coupling mode for conditional hazards")
        ->capture_default_str();

    CLI::App* cmd_extend = app.add_subcommand(
        "extend", "build a coupling and attach the decoupling time tau");
    cmd_extend->add_option("instance", instance_path, "instance JSON file")->required();
    cmd_extend->add_option("--mode", mode_text, "construction mode: direct or recursive")
        ->capture_default_str();
    cmd_extend->add_option("--output", output_path,
                           "write the extended export here instead of embedding it");

    CLI::App* cmd_sample = app.add_subcommand(
        "sample", "draw from an exact coupling or extended coupling export");
    cmd_sample->add_option("file", file_path, "coupling or extended coupling JSON file")
        ->required();
    cmd_sample->add_option("--n", n, "number of draws")
        ->required()
        ->check(CLI::Range(1LL, std::numeric_limits<long long>::max()));
    cmd_sample->add_option("--seed", seed, "PRNG seed")->capture_default_str();
    cmd_sample->add_option("--format", sample_format, "output format")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();

    CLI::App* cmd_report = app.add_subcommand(
        "report", "full analysis of one instance: build, verify, hazards, tau");
    cmd_report->add_option("instance", instance_path, "instance JSON file")->required();
    cmd_report->add_option("--mode", mode_text, "construction mode: direct or recursive")
        ->capture_default_str();
    cmd_report->add_flag("--oracle", with_oracle,
                         "cross-check against brute-force enumeration");

    int exit_code = 0;
    cmd_build->callback(
        [&] { exit_code = run_build(instance_path, mode_text, output_path); });
    cmd_verify->callback(
        [&] { exit_code = run_verify(coupling_path, instance_path, with_oracle); });
    cmd_kappa->callback([&] { exit_code = run_kappa(instance_path, mode_text); });
    cmd_extend->callback(
        [&] { exit_code = run_extend(instance_path, mode_text, output_path); });
    cmd_sample->callback(
        [&] { exit_code = run_sample(file_path, n, seed, sample_format); });
    cmd_report->callback(
        [&] { exit_code = run_report(instance_path, mode_text, with_oracle); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        app.exit(e);
        return 0;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const maxagree::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return exit_code;
}
