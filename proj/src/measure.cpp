#include "maxagree/measure.hpp"

#include <algorithm>
#include <sstream>

#include "maxagree/laws.hpp"

namespace maxagree {

Rat parse_rational(const std::string& text) {
    if (text.empty())
        throw ValidationError("empty rational literal");
    auto valid_int = [](const std::string& s) {
        if (s.empty()) return false;
        std::size_t i = (s[0] == '-') ? 1 : 0;
        if (i == s.size()) return false;
        for (; i < s.size(); ++i)
            if (s[i] < '0' || s[i] > '9') return false;
        return true;
    };
    std::string num = text;
    std::string den = "1";
    auto slash = text.find('/');
    if (slash != std::string::npos) {
        num = text.substr(0, slash);
        den = text.substr(slash + 1);
    }
    if (!valid_int(num) || !valid_int(den))
        throw ValidationError("bad rational literal: '" + text + "'");
    Rat r;
    if (mpq_set_str(r.get_mpq_t(), (num + "/" + den).c_str(), 10) != 0)
        throw ValidationError("bad rational literal: '" + text + "'");
    if (r.get_den() == 0)
        throw ValidationError("zero denominator in rational literal: '" + text + "'");
    r.canonicalize();
    return r;
}

std::string format_rational(const Rat& r) {
    return r.get_num().get_str() + "/" + r.get_den().get_str();
}

double to_double(const Rat& r) {
    return r.get_d();
}

Rat dyadic64(std::uint64_t k) {
    mpz_class num;
    mpz_import(num.get_mpz_t(), 1, 1, sizeof(k), 0, 0, &k);
    mpz_class den = 1;
    den <<= 64;
    Rat r(num, den);
    r.canonicalize();
    return r;
}

Alphabet::Alphabet(std::vector<std::string> symbols) : symbols_(std::move(symbols)) {
    if (symbols_.empty())
        throw ValidationError("alphabet must contain at least one symbol");
    for (int i = 0; i < static_cast<int>(symbols_.size()); ++i) {
        const std::string& s = symbols_[i];
        if (s.empty())
            throw ValidationError("alphabet symbols must be non-empty");
        if (s.find(',') != std::string::npos)
            throw ValidationError("alphabet symbol '" + s + "' contains ','");
        if (!index_.emplace(s, i).second)
            throw ValidationError("duplicate alphabet symbol '" + s + "'");
    }
}

const std::string& Alphabet::label(int i) const {
    if (i < 0 || i >= size())
        throw InternalError("alphabet index out of range");
    return symbols_[static_cast<std::size_t>(i)];
}

int Alphabet::index(const std::string& symbol) const {
    auto it = index_.find(symbol);
    if (it == index_.end())
        throw ValidationError("unknown symbol '" + symbol + "'");
    return it->second;
}

Path parse_path(const Alphabet& alphabet, const std::string& text) {
    Path path;
    if (text.empty())
        return path;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = text.find(',', start);
        std::string piece = (comma == std::string::npos)
                                ? text.substr(start)
                                : text.substr(start, comma - start);
        path.push_back(alphabet.index(piece));
        if (comma == std::string::npos)
            break;
        start = comma + 1;
    }
    return path;
}

std::string format_path(const Alphabet& alphabet, const Path& path) {
    std::string out;
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (i > 0)
            out += ',';
        out += alphabet.label(path[i]);
    }
    return out;
}

PathMeasure::PathMeasure(Alphabet alphabet, int level)
    : alphabet_(std::move(alphabet)), level_(level) {
    if (level_ < 0)
        throw LevelError("measure level must be >= 0");
}

Rat PathMeasure::mass(const Path& prefix) const {
    auto it = atoms_.find(prefix);
    return it == atoms_.end() ? Rat(0) : it->second;
}

Rat PathMeasure::total() const {
    Rat sum = 0;
    for (const auto& [path, mass] : atoms_)
        sum += mass;
    return sum;
}

void PathMeasure::add(const Path& prefix, const Rat& mass) {
    if (static_cast<int>(prefix.size()) != level_)
        throw LevelError("atom length " + std::to_string(prefix.size()) +
                         " does not match measure level " + std::to_string(level_));
    for (int idx : prefix)
        if (idx < 0 || idx >= alphabet_.size())
            throw ValidationError("path index out of alphabet range");
    if (mass == 0)
        return;
    auto [it, inserted] = atoms_.emplace(prefix, mass);
    if (!inserted) {
        it->second += mass;
        if (it->second == 0) {
            atoms_.erase(it);
            return;
        }
    }
    if (it->second < 0)
        throw ValidationError("negative mass on atom '" +
                              format_path(alphabet_, prefix) + "'");
}

bool PathMeasure::operator==(const PathMeasure& other) const {
    return alphabet_ == other.alphabet_ && level_ == other.level_ && atoms_ == other.atoms_;
}

Rat total_mass(const PathMeasure& m) {
    return m.total();
}

PathMeasure restrict(const PathMeasure& m, int t) {
    int target = t + 1;
    if (t < -1)
        throw LevelError("restriction time must be >= -1");
    if (target > m.level())
        throw LevelError("cannot restrict level " + std::to_string(m.level()) +
                         " measure to level " + std::to_string(target));
    PathMeasure out(m.alphabet(), target);
    for (const auto& [path, mass] : m.atoms()) {
        Path prefix(path.begin(), path.begin() + target);
        out.add(prefix, mass);
    }
    return out;
}

namespace {

void require_same_frame(const PathMeasure& m1, const PathMeasure& m2) {
    if (m1.alphabet() != m2.alphabet())
        throw AlphabetMismatch("measures live on different alphabets");
    if (m1.level() != m2.level())
        throw LevelError("measures live on different levels: " +
                         std::to_string(m1.level()) + " vs " + std::to_string(m2.level()));
}

} // namespace

PathMeasure meet(const PathMeasure& m1, const PathMeasure& m2) {
    require_same_frame(m1, m2);
    PathMeasure out(m1.alphabet(), m1.level());
    for (const auto& [path, mass] : m1.atoms()) {
        Rat other = m2.mass(path);
        out.add(path, mass < other ? mass : other);
    }
    return out;
}

PathMeasure subtract(const PathMeasure& m1, const PathMeasure& m2) {
    require_same_frame(m1, m2);
    for (const auto& [path, mass] : m2.atoms())
        if (mass > m1.mass(path))
            throw DominationError("subtrahend exceeds measure on atom '" +
                                  format_path(m1.alphabet(), path) + "'");
    PathMeasure out(m1.alphabet(), m1.level());
    for (const auto& [path, mass] : m1.atoms())
        out.add(path, mass - m2.mass(path));
    return out;
}

PathMeasure scale(const PathMeasure& m, const Rat& factor) {
    if (factor < 0)
        throw ValidationError("scale factor must be >= 0");
    PathMeasure out(m.alphabet(), m.level());
    for (const auto& [path, mass] : m.atoms())
        out.add(path, mass * factor);
    return out;
}

std::vector<Rat> one_step_conditional(const ProcessLaw& law, const Path& z) {
    int level = static_cast<int>(z.size());
    if (level > law.horizon)
        throw LevelError("prefix already has full length; no next step to condition");
    PathMeasure at = restrict(law.paths, level - 1);
    Rat denom = at.mass(z);
    if (denom == 0)
        throw ConditioningError("conditioning on zero-mass prefix '" +
                                format_path(law.alphabet, z) + "'");
    PathMeasure next = restrict(law.paths, level);
    std::vector<Rat> dist(static_cast<std::size_t>(law.alphabet.size()), Rat(0));
    Path child = z;
    child.push_back(0);
    for (int e = 0; e < law.alphabet.size(); ++e) {
        child.back() = e;
        dist[static_cast<std::size_t>(e)] = next.mass(child) / denom;
    }
    return dist;
}

PathMeasure extend_proportional(const PathMeasure& m, const ProcessLaw& law, int to_level) {
    if (m.alphabet() != law.alphabet)
        throw AlphabetMismatch("measure and law live on different alphabets");
    if (to_level < m.level() || to_level > law.horizon + 1)
        throw LevelError("extension target level out of range");
    PathMeasure law_at_base = restrict(law.paths, m.level() - 1);
    PathMeasure law_at_target = restrict(law.paths, to_level - 1);
    for (const auto& [prefix, mass] : m.atoms()) {
        (void)mass;
        if (law_at_base.mass(prefix) == 0)
            throw ConditioningError("cannot extend atom '" +
                                    format_path(m.alphabet(), prefix) +
                                    "' through a zero-mass law prefix");
    }
    PathMeasure out(m.alphabet(), to_level);
    for (const auto& [path, law_mass] : law_at_target.atoms()) {
        Path prefix(path.begin(), path.begin() + m.level());
        Rat base = m.mass(prefix);
        if (base == 0)
            continue;
        out.add(path, base * law_mass / law_at_base.mass(prefix));
    }
    return out;
}

Rat tv_distance(const ProcessLaw& law1, const ProcessLaw& law2, int t) {
    require_compatible(law1, law2);
    if (t < 0 || t > law1.horizon)
        throw LevelError("time index out of horizon range");
    return Rat(1) - total_mass(meet(restrict(law1.paths, t), restrict(law2.paths, t)));
}

} // namespace maxagree
