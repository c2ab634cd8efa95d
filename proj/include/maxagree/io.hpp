#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "maxagree/oracle.hpp"
#include "maxagree/tau.hpp"

namespace maxagree {

/// Key order is preserved so that exports are byte-stable.
using Json = nlohmann::ordered_json;

Json load_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);
/// Canonical rendering used for every artifact this library writes.
std::string dump_json(const Json& j);

/// Strict instance parsing: unknown fields are rejected, rationals are
/// "p/q" strings, laws may be given as explicit tables, product laws,
/// chains on the alphabet, or coarse-grained chains on their own states.
Instance parse_instance(const Json& j);

/// Canonical explicit-table rendering of an instance; parsing it back
/// yields the same two laws.
Json serialize_instance(const Instance& instance);

Json serialize_coupling(const LayeredCoupling& c);

/// Loads a coupling export. When an instance is supplied its laws become
/// the coupling's laws (they must match the embedded alphabet/horizon);
/// otherwise the laws are recovered from the coupling's own marginals,
/// which suffices for sampling.
LayeredCoupling parse_coupling(const Json& j, const Instance* instance);

Json serialize_extended(const ExtendedCoupling& ec);
ExtendedCoupling parse_extended(const Json& j, const Instance* instance);

Json maximality_json(const MaximalityReport& report);
Json coupling_report_json(const CouplingReport& report);
Json conditional_report_json(const ConditionalReport& report, const Alphabet& alphabet);
Json tau_report_json(const TauReport& report, const Alphabet& alphabet);
Json hazard_profile_json(const HazardProfile& profile, const Alphabet& alphabet);
Json countable_bounds_json(const CountableBounds& bounds);

} // namespace maxagree
