#include "maxagree/laws.hpp"

namespace maxagree {

namespace {

void require_probability(const PathMeasure& paths, const std::string& what) {
    Rat total = paths.total();
    if (total != 1)
        throw ValidationError(what + " masses sum to " + format_rational(total) +
                              ", expected 1/1");
}

void require_distribution(const std::vector<Rat>& dist, const std::string& what) {
    Rat total = 0;
    for (const Rat& p : dist) {
        if (p < 0)
            throw ValidationError(what + " has a negative entry");
        total += p;
    }
    if (total != 1)
        throw ValidationError(what + " sums to " + format_rational(total) + ", expected 1/1");
}

} // namespace

ProcessLaw law_from_table(const Alphabet& alphabet, int horizon,
                          const std::vector<std::pair<Path, Rat>>& entries) {
    if (horizon < 0)
        throw ValidationError("horizon must be >= 0");
    PathMeasure paths(alphabet, horizon + 1);
    for (const auto& [path, mass] : entries) {
        if (mass < 0)
            throw ValidationError("negative mass on path '" + format_path(alphabet, path) + "'");
        paths.add(path, mass);
    }
    require_probability(paths, "law table");
    return ProcessLaw{alphabet, horizon, std::move(paths)};
}

ProcessLaw law_iid(const Alphabet& alphabet, int horizon, const std::vector<Rat>& step) {
    if (horizon < 0)
        throw ValidationError("horizon must be >= 0");
    if (static_cast<int>(step.size()) != alphabet.size())
        throw ValidationError("step distribution size does not match alphabet");
    require_distribution(step, "step distribution");
    PathMeasure paths(alphabet, horizon + 1);
    Path path(static_cast<std::size_t>(horizon + 1), 0);
    std::vector<int> stack(static_cast<std::size_t>(horizon + 1), 0);
    while (true) {
        Rat mass = 1;
        for (int s = 0; s <= horizon; ++s) {
            path[static_cast<std::size_t>(s)] = stack[static_cast<std::size_t>(s)];
            mass *= step[static_cast<std::size_t>(stack[static_cast<std::size_t>(s)])];
        }
        paths.add(path, mass);
        int pos = horizon;
        while (pos >= 0 && stack[static_cast<std::size_t>(pos)] == alphabet.size() - 1) {
            stack[static_cast<std::size_t>(pos)] = 0;
            --pos;
        }
        if (pos < 0)
            break;
        ++stack[static_cast<std::size_t>(pos)];
    }
    require_probability(paths, "product law");
    return ProcessLaw{alphabet, horizon, std::move(paths)};
}

ProcessLaw law_markov(const MarkovSpec& spec) {
    if (spec.horizon < 0)
        throw ValidationError("horizon must be >= 0");
    int n = spec.states.size();
    if (static_cast<int>(spec.initial.size()) != n)
        throw ValidationError("initial distribution size does not match state space");
    require_distribution(spec.initial, "initial distribution");
    if (static_cast<int>(spec.kernel.size()) != n)
        throw ValidationError("kernel row count does not match state space");
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(spec.kernel[static_cast<std::size_t>(i)].size()) != n)
            throw ValidationError("kernel row size does not match state space");
        require_distribution(spec.kernel[static_cast<std::size_t>(i)],
                             "kernel row '" + spec.states.label(i) + "'");
    }

    PathMeasure paths(spec.states, spec.horizon + 1);
    // Forward expansion level by level keeps only reachable prefixes.
    std::map<Path, Rat> frontier;
    for (int i = 0; i < n; ++i)
        if (spec.initial[static_cast<std::size_t>(i)] > 0)
            frontier.emplace(Path{i}, spec.initial[static_cast<std::size_t>(i)]);
    for (int step = 1; step <= spec.horizon; ++step) {
        std::map<Path, Rat> next;
        for (const auto& [prefix, mass] : frontier) {
            int from = prefix.back();
            for (int to = 0; to < n; ++to) {
                const Rat& p = spec.kernel[static_cast<std::size_t>(from)][static_cast<std::size_t>(to)];
                if (p == 0)
                    continue;
                Path child = prefix;
                child.push_back(to);
                next[child] += mass * p;
            }
        }
        frontier = std::move(next);
    }
    for (const auto& [path, mass] : frontier)
        paths.add(path, mass);
    require_probability(paths, "chain law");
    return ProcessLaw{spec.states, spec.horizon, std::move(paths)};
}

ProcessLaw pushforward(const ProcessLaw& law, const CoarseGrainMap& phi) {
    if (law.alphabet != phi.source)
        throw AlphabetMismatch("law alphabet does not match the map's source space");
    if (static_cast<int>(phi.image.size()) != phi.source.size())
        throw ValidationError("coarse-graining map must cover every source state");
    for (int img : phi.image)
        if (img < 0 || img >= phi.target.size())
            throw ValidationError("coarse-graining image index out of range");
    PathMeasure paths(phi.target, law.horizon + 1);
    for (const auto& [path, mass] : law.paths.atoms()) {
        Path image(path.size());
        for (std::size_t i = 0; i < path.size(); ++i)
            image[i] = phi.image[static_cast<std::size_t>(path[i])];
        paths.add(image, mass);
    }
    require_probability(paths, "image law");
    return ProcessLaw{phi.target, law.horizon, std::move(paths)};
}

void require_compatible(const ProcessLaw& law1, const ProcessLaw& law2) {
    if (law1.alphabet != law2.alphabet)
        throw AlphabetMismatch("laws live on different alphabets");
    if (law1.horizon != law2.horizon)
        throw ValidationError("laws have different horizons");
}

} // namespace maxagree
