#include "maxagree/io.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace maxagree {

namespace {

void require_keys(const Json& j, const std::set<std::string>& allowed,
                  const std::set<std::string>& required, const std::string& context) {
    if (!j.is_object())
        throw ValidationError(context + " must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (allowed.find(key) == allowed.end())
            throw ValidationError("unknown field '" + key + "' in " + context);
    }
    for (const std::string& key : required)
        if (!j.contains(key))
            throw ValidationError("missing field '" + key + "' in " + context);
}

std::string get_string(const Json& j, const std::string& key, const std::string& context) {
    if (!j.at(key).is_string())
        throw ValidationError("field '" + key + "' in " + context + " must be a string");
    return j.at(key).get<std::string>();
}

int get_int(const Json& j, const std::string& key, const std::string& context) {
    if (!j.at(key).is_number_integer())
        throw ValidationError("field '" + key + "' in " + context + " must be an integer");
    return j.at(key).get<int>();
}

Rat get_rational(const Json& j, const std::string& context) {
    if (!j.is_string())
        throw ValidationError("rational in " + context + " must be a \"p/q\" string");
    return parse_rational(j.get<std::string>());
}

Alphabet parse_alphabet(const Json& j, const std::string& context) {
    if (!j.is_array() || j.empty())
        throw ValidationError(context + " must be a non-empty array of symbols");
    std::vector<std::string> symbols;
    for (const Json& entry : j) {
        if (!entry.is_string())
            throw ValidationError(context + " entries must be strings");
        symbols.push_back(entry.get<std::string>());
    }
    return Alphabet(std::move(symbols));
}

std::vector<Rat> parse_distribution(const Json& j, const Alphabet& alphabet,
                                    const std::string& context) {
    if (!j.is_object())
        throw ValidationError(context + " must be an object keyed by symbol");
    std::vector<Rat> dist(static_cast<std::size_t>(alphabet.size()), Rat(0));
    for (const auto& [symbol, value] : j.items())
        dist[static_cast<std::size_t>(alphabet.index(symbol))] =
            get_rational(value, context + " entry '" + symbol + "'");
    return dist;
}

ProcessLaw parse_law(const Json& j, const Alphabet& alphabet, int horizon,
                     const std::string& context) {
    if (!j.is_object() || !j.contains("type"))
        throw ValidationError(context + " must be an object with a 'type' field");
    std::string type = get_string(j, "type", context);
    if (type == "table") {
        require_keys(j, {"type", "entries"}, {"type", "entries"}, context);
        const Json& entries = j.at("entries");
        if (!entries.is_object())
            throw ValidationError(context + " entries must be an object keyed by path");
        std::vector<std::pair<Path, Rat>> rows;
        for (const auto& [path_text, value] : entries.items())
            rows.emplace_back(parse_path(alphabet, path_text),
                              get_rational(value, context + " path '" + path_text + "'"));
        return law_from_table(alphabet, horizon, rows);
    }
    if (type == "iid") {
        require_keys(j, {"type", "step"}, {"type", "step"}, context);
        return law_iid(alphabet, horizon,
                       parse_distribution(j.at("step"), alphabet, context + " step"));
    }
    if (type == "markov" || type == "coarse_markov") {
        bool coarse = type == "coarse_markov";
        if (coarse)
            require_keys(j, {"type", "states", "init", "kernel", "phi"},
                         {"type", "states", "init", "kernel", "phi"}, context);
        else
            require_keys(j, {"type", "init", "kernel"}, {"type", "init", "kernel"}, context);
        Alphabet states = coarse ? parse_alphabet(j.at("states"), context + " states")
                                 : alphabet;
        MarkovSpec spec{states,
                        parse_distribution(j.at("init"), states, context + " init"),
                        {},
                        horizon};
        const Json& kernel = j.at("kernel");
        if (!kernel.is_object())
            throw ValidationError(context + " kernel must be an object keyed by state");
        spec.kernel.assign(static_cast<std::size_t>(states.size()),
                           std::vector<Rat>(static_cast<std::size_t>(states.size()), Rat(0)));
        std::set<std::string> seen;
        for (const auto& [row_label, row] : kernel.items()) {
            int from = states.index(row_label);
            if (!seen.insert(row_label).second)
                throw ValidationError(context + " kernel repeats row '" + row_label + "'");
            spec.kernel[static_cast<std::size_t>(from)] =
                parse_distribution(row, states, context + " kernel row '" + row_label + "'");
        }
        if (seen.size() != static_cast<std::size_t>(states.size()))
            throw ValidationError(context + " kernel must define every row");
        ProcessLaw chain = law_markov(spec);
        if (!coarse)
            return chain;
        const Json& phi = j.at("phi");
        if (!phi.is_object())
            throw ValidationError(context + " phi must be an object keyed by state");
        CoarseGrainMap map{states, alphabet,
                           std::vector<int>(static_cast<std::size_t>(states.size()), -1)};
        for (const auto& [state, symbol] : phi.items()) {
            if (!symbol.is_string())
                throw ValidationError(context + " phi values must be symbols");
            map.image[static_cast<std::size_t>(states.index(state))] =
                alphabet.index(symbol.get<std::string>());
        }
        for (std::size_t i = 0; i < map.image.size(); ++i)
            if (map.image[i] < 0)
                throw ValidationError(context + " phi must map every state (missing '" +
                                      states.label(static_cast<int>(i)) + "')");
        return pushforward(chain, map);
    }
    throw ValidationError(context + " has unknown law type '" + type + "'");
}

Mode parse_mode(const std::string& text) {
    if (text == "direct")
        return Mode::Direct;
    if (text == "recursive" || text == "paper")
        return Mode::Recursive;
    throw ValidationError("unknown mode '" + text + "'");
}

SigmaValue parse_sigma(const Json& j, const std::string& context) {
    if (j.is_string()) {
        if (j.get<std::string>() == "beyond")
            return SigmaValue::beyond();
        throw ValidationError(context + " must be a time or \"beyond\"");
    }
    if (!j.is_number_integer() || j.get<int>() < 0)
        throw ValidationError(context + " must be a time or \"beyond\"");
    return SigmaValue::at(j.get<int>());
}

Json sigma_json(const SigmaValue& v) {
    if (v.is_beyond())
        return Json("beyond");
    return Json(v.time());
}

Json alphabet_json(const Alphabet& alphabet) {
    Json j = Json::array();
    for (const std::string& s : alphabet.symbols())
        j.push_back(s);
    return j;
}

struct CouplingHeader {
    Alphabet alphabet;
    int horizon;
    Mode mode;
};

CouplingHeader parse_coupling_header(const Json& j, const Instance* instance,
                                     const std::string& context) {
    Alphabet alphabet = parse_alphabet(j.at("alphabet"), context + " alphabet");
    int horizon = get_int(j, "horizon", context);
    if (horizon < 0)
        throw ValidationError("horizon must be >= 0 in " + context);
    Mode mode = parse_mode(get_string(j, "mode", context));
    if (instance != nullptr) {
        if (instance->law1.alphabet != alphabet)
            throw ValidationError(context + " alphabet does not match the instance");
        if (instance->law1.horizon != horizon)
            throw ValidationError(context + " horizon does not match the instance");
    }
    return CouplingHeader{std::move(alphabet), horizon, mode};
}

ProcessLaw law_from_marginal(const Alphabet& alphabet, int horizon,
                             const PathMeasure& marginal, const std::string& context) {
    std::vector<std::pair<Path, Rat>> rows(marginal.atoms().begin(), marginal.atoms().end());
    try {
        return law_from_table(alphabet, horizon, rows);
    } catch (const ValidationError& e) {
        throw ValidationError(context + ": marginal is not a probability law (" +
                              e.what() + ")");
    }
}

} // namespace

Json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot open '" + path + "'");
    Json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ValidationError("invalid JSON in '" + path + "': " + e.what());
    }
    return j;
}

void write_json_file(const std::string& path, const Json& j) {
    std::ofstream out(path);
    if (!out)
        throw ValidationError("cannot write '" + path + "'");
    out << dump_json(j);
}

std::string dump_json(const Json& j) {
    return j.dump(2) + "\n";
}

Instance parse_instance(const Json& j) {
    require_keys(j, {"alphabet", "horizon", "law1", "law2"},
                 {"alphabet", "horizon", "law1", "law2"}, "instance");
    Alphabet alphabet = parse_alphabet(j.at("alphabet"), "instance alphabet");
    int horizon = get_int(j, "horizon", "instance");
    if (horizon < 0)
        throw ValidationError("instance horizon must be >= 0");
    ProcessLaw law1 = parse_law(j.at("law1"), alphabet, horizon, "law1");
    ProcessLaw law2 = parse_law(j.at("law2"), alphabet, horizon, "law2");
    return Instance{std::move(law1), std::move(law2)};
}

Json serialize_instance(const Instance& instance) {
    Json j;
    j["alphabet"] = alphabet_json(instance.law1.alphabet);
    j["horizon"] = instance.law1.horizon;
    for (int side = 1; side <= 2; ++side) {
        const ProcessLaw& law = side == 1 ? instance.law1 : instance.law2;
        Json entries = Json::object();
        for (const auto& [path, mass] : law.paths.atoms())
            entries[format_path(law.alphabet, path)] = format_rational(mass);
        Json table;
        table["type"] = "table";
        table["entries"] = std::move(entries);
        j[side == 1 ? "law1" : "law2"] = std::move(table);
    }
    return j;
}

Json serialize_coupling(const LayeredCoupling& c) {
    Json j;
    j["format"] = "coupling";
    j["alphabet"] = alphabet_json(c.law1.alphabet);
    j["horizon"] = c.law1.horizon;
    j["mode"] = format_mode(c.mode);
    Json atoms = Json::array();
    for (const auto& [s, layer] : c.layers) {
        for (const auto& [pair, mass] : layer) {
            Json atom;
            atom["sigma"] = sigma_json(s);
            atom["path1"] = format_path(c.law1.alphabet, pair.first);
            atom["path2"] = format_path(c.law1.alphabet, pair.second);
            atom["mass"] = format_rational(mass);
            atoms.push_back(std::move(atom));
        }
    }
    j["atoms"] = std::move(atoms);
    return j;
}

LayeredCoupling parse_coupling(const Json& j, const Instance* instance) {
    require_keys(j, {"format", "alphabet", "horizon", "mode", "atoms"},
                 {"format", "alphabet", "horizon", "mode", "atoms"}, "coupling file");
    if (get_string(j, "format", "coupling file") != "coupling")
        throw ValidationError("file is not a coupling export");
    CouplingHeader header = parse_coupling_header(j, instance, "coupling file");
    const Json& atoms = j.at("atoms");
    if (!atoms.is_array())
        throw ValidationError("coupling atoms must be an array");
    std::map<SigmaValue, std::map<PathPair, Rat>> layers;
    PathMeasure side1(header.alphabet, header.horizon + 1);
    PathMeasure side2(header.alphabet, header.horizon + 1);
    for (const Json& atom : atoms) {
        require_keys(atom, {"sigma", "path1", "path2", "mass"},
                     {"sigma", "path1", "path2", "mass"}, "coupling atom");
        SigmaValue s = parse_sigma(atom.at("sigma"), "atom sigma");
        Path p1 = parse_path(header.alphabet, get_string(atom, "path1", "coupling atom"));
        Path p2 = parse_path(header.alphabet, get_string(atom, "path2", "coupling atom"));
        Rat mass = get_rational(atom.at("mass"), "atom mass");
        layers[s][{p1, p2}] += mass;
        if (instance == nullptr) {
            side1.add(p1, mass);
            side2.add(p2, mass);
        }
    }
    ProcessLaw law1 = instance != nullptr
                          ? instance->law1
                          : law_from_marginal(header.alphabet, header.horizon, side1,
                                              "coupling side 1");
    ProcessLaw law2 = instance != nullptr
                          ? instance->law2
                          : law_from_marginal(header.alphabet, header.horizon, side2,
                                              "coupling side 2");
    return LayeredCoupling{std::move(law1), std::move(law2), header.mode,
                           std::move(layers)};
}

Json serialize_extended(const ExtendedCoupling& ec) {
    Json j;
    j["format"] = "extended_coupling";
    j["alphabet"] = alphabet_json(ec.base.law1.alphabet);
    j["horizon"] = ec.base.law1.horizon;
    j["mode"] = format_mode(ec.base.mode);
    Json atoms = Json::array();
    // Atoms ordered by (sigma, path1, path2, tau).
    std::map<std::tuple<SigmaValue, Path, Path, TauValue>, Rat> ordered;
    for (const auto& [key, mass] : ec.atoms) {
        const auto& [p1, p2, tau] = key;
        ordered.emplace(std::make_tuple(first_disagreement(p1, p2), p1, p2, tau), mass);
    }
    for (const auto& [key, mass] : ordered) {
        const auto& [s, p1, p2, tau] = key;
        Json atom;
        atom["sigma"] = sigma_json(s);
        atom["path1"] = format_path(ec.base.law1.alphabet, p1);
        atom["path2"] = format_path(ec.base.law1.alphabet, p2);
        atom["tau"] = sigma_json(tau);
        atom["mass"] = format_rational(mass);
        atoms.push_back(std::move(atom));
    }
    j["atoms"] = std::move(atoms);
    Json hazards = Json::array();
    for (const HazardEntry& h : ec.hazards.per_t) {
        Json entry;
        entry["t"] = h.t;
        entry["kappa"] = format_rational(h.formula);
        entry["max_conditional"] = format_rational(h.max_conditional);
        entry["kappa_hat"] = format_rational(h.effective);
        entry["within_formula"] = h.within_formula;
        hazards.push_back(std::move(entry));
    }
    j["hazards"] = std::move(hazards);
    return j;
}

ExtendedCoupling parse_extended(const Json& j, const Instance* instance) {
    require_keys(j, {"format", "alphabet", "horizon", "mode", "atoms", "hazards"},
                 {"format", "alphabet", "horizon", "mode", "atoms", "hazards"},
                 "extended coupling file");
    if (get_string(j, "format", "extended coupling file") != "extended_coupling")
        throw ValidationError("file is not an extended coupling export");
    CouplingHeader header = parse_coupling_header(j, instance, "extended coupling file");
    const Json& atoms = j.at("atoms");
    if (!atoms.is_array())
        throw ValidationError("extended coupling atoms must be an array");
    ExtendedCoupling ec{LayeredCoupling{ProcessLaw{header.alphabet, header.horizon,
                                                   PathMeasure(header.alphabet,
                                                               header.horizon + 1)},
                                        ProcessLaw{header.alphabet, header.horizon,
                                                   PathMeasure(header.alphabet,
                                                               header.horizon + 1)},
                                        header.mode,
                                        {}},
                        {},
                        {}};
    PathMeasure side1(header.alphabet, header.horizon + 1);
    PathMeasure side2(header.alphabet, header.horizon + 1);
    for (const Json& atom : atoms) {
        require_keys(atom, {"sigma", "path1", "path2", "tau", "mass"},
                     {"sigma", "path1", "path2", "tau", "mass"}, "extended atom");
        SigmaValue s = parse_sigma(atom.at("sigma"), "atom sigma");
        Path p1 = parse_path(header.alphabet, get_string(atom, "path1", "extended atom"));
        Path p2 = parse_path(header.alphabet, get_string(atom, "path2", "extended atom"));
        TauValue tau = parse_sigma(atom.at("tau"), "atom tau");
        Rat mass = get_rational(atom.at("mass"), "atom mass");
        ec.atoms[{p1, p2, tau}] += mass;
        ec.base.layers[s][{p1, p2}] += mass;
        side1.add(p1, mass);
        side2.add(p2, mass);
    }
    if (instance != nullptr) {
        ec.base.law1 = instance->law1;
        ec.base.law2 = instance->law2;
    } else {
        ec.base.law1 = law_from_marginal(header.alphabet, header.horizon, side1,
                                         "extended side 1");
        ec.base.law2 = law_from_marginal(header.alphabet, header.horizon, side2,
                                         "extended side 2");
    }
    const Json& hazards = j.at("hazards");
    if (!hazards.is_array())
        throw ValidationError("hazards must be an array");
    for (const Json& entry : hazards) {
        require_keys(entry, {"t", "kappa", "max_conditional", "kappa_hat", "within_formula"},
                     {"t", "kappa", "max_conditional", "kappa_hat"}, "hazard entry");
        HazardEntry h;
        h.t = get_int(entry, "t", "hazard entry");
        h.formula = get_rational(entry.at("kappa"), "hazard kappa");
        h.max_conditional = get_rational(entry.at("max_conditional"), "hazard entry");
        h.effective = get_rational(entry.at("kappa_hat"), "hazard entry");
        h.within_formula = h.max_conditional <= h.formula;
        ec.hazards.per_t.push_back(std::move(h));
    }
    if (static_cast<int>(ec.hazards.per_t.size()) != header.horizon + 1)
        throw ValidationError("hazard entries must cover t = 0..horizon");
    return ec;
}

Json maximality_json(const MaximalityReport& report) {
    Json j;
    j["passed"] = report.passed;
    Json per_t = Json::array();
    for (const MaximalityEntry& e : report.per_t) {
        Json entry;
        entry["t"] = e.t;
        entry["achieved"] = format_rational(e.achieved);
        entry["ceiling"] = format_rational(e.ceiling);
        entry["shortfall"] = format_rational(e.shortfall);
        entry["equal"] = e.equal;
        per_t.push_back(std::move(entry));
    }
    j["per_t"] = std::move(per_t);
    return j;
}

Json coupling_report_json(const CouplingReport& report) {
    Json j;
    j["passed"] = report.passed;
    j["violations"] = report.violations;
    return j;
}

Json conditional_report_json(const ConditionalReport& report, const Alphabet& alphabet) {
    Json j;
    j["passed"] = report.passed;
    Json violations = Json::array();
    for (const ConditionalViolation& v : report.violations) {
        Json entry;
        entry["side"] = v.side;
        entry["t"] = v.t;
        entry["prefix"] = format_path(alphabet, v.prefix);
        entry["detail"] = v.detail;
        violations.push_back(std::move(entry));
    }
    j["violations"] = std::move(violations);
    return j;
}

Json tau_report_json(const TauReport& report, const Alphabet& alphabet) {
    Json j;
    Json dist = Json::object();
    for (const auto& [tau, mass] : report.tau_distribution)
        dist[format_sigma(tau)] = format_rational(mass);
    j["tau_distribution"] = std::move(dist);
    Json survival = Json::object();
    for (std::size_t t = 0; t < report.survival.size(); ++t)
        survival[std::to_string(t)] = format_rational(report.survival[t]);
    j["survival"] = std::move(survival);
    j["independent"] = report.independent;
    if (report.independence_counterexample) {
        const auto& [path, tau, joint, product] = *report.independence_counterexample;
        Json cell;
        cell["path"] = format_path(alphabet, path);
        cell["tau"] = sigma_json(tau);
        cell["joint"] = format_rational(joint);
        cell["product"] = format_rational(product);
        j["independence_counterexample"] = std::move(cell);
    } else {
        j["independence_counterexample"] = nullptr;
    }
    j["tau_le_sigma"] = report.tau_le_sigma;
    j["hazard_identity"] = report.hazard_identity;
    j["survival_product"] = report.survival_product;
    j["beyond_consistent"] = report.beyond_consistent;
    j["kappa_hat_equals_formula"] = report.effective_equals_formula;
    j["passed"] = report.passed();
    return j;
}

Json hazard_profile_json(const HazardProfile& profile, const Alphabet& alphabet) {
    Json per_t = Json::array();
    for (const HazardEntry& h : profile.per_t) {
        Json entry;
        entry["t"] = h.t;
        entry["kappa"] = format_rational(h.formula);
        Json conditional = Json::object();
        for (const auto& [z, value] : h.conditional)
            conditional[format_path(alphabet, z)] = format_rational(value);
        entry["conditional"] = std::move(conditional);
        entry["max_conditional"] = format_rational(h.max_conditional);
        entry["kappa_hat"] = format_rational(h.effective);
        entry["within_formula"] = h.within_formula;
        per_t.push_back(std::move(entry));
    }
    return per_t;
}

Json countable_bounds_json(const CountableBounds& bounds) {
    Json j;
    j["delta1"] = format_rational(bounds.delta1);
    j["delta2"] = format_rational(bounds.delta2);
    j["bound_a"] = format_rational(bounds.bound_a);
    j["bound_b"] = format_rational(bounds.bound_b);
    j["kappa"] = format_rational(bounds.kappa_value);
    j["kappa_le_bound_a"] = bounds.kappa_le_a;
    j["kappa_le_bound_b"] = bounds.kappa_le_b;
    return j;
}

} // namespace maxagree
