#pragma once

#include <json.hpp>
#include <string>

#include "scedft/gb.hpp"
#include "scedft/measures.hpp"
#include "scedft/mmot.hpp"

namespace scedft {

// Key order is fixed (ordered_json) so that serialized results are
// byte-stable across reruns with the same inputs.
using Json = nlohmann::ordered_json;

Json to_json(const DiscreteMeasure& rho);
Json to_json(const RadialDensity& rho);  // uniform grids only
Json to_json(const NucleiConfig& nuclei);
Json to_json(const TransportPlan& plan);
Json to_json(const GbTable& table);

DiscreteMeasure discrete_from_json(const Json& j);
RadialDensity radial_from_json(const Json& j);
NucleiConfig nuclei_from_json(const Json& j);
GbTable gb_table_from_json(const Json& j);

// {"type": "discrete"|"radial", ...} dispatcher for measure payloads.
bool is_discrete_measure(const Json& j);

std::string gb_table_csv(const GbTable& table);

// Atomic file write: tmp file in the same directory, then rename.
void write_file_atomic(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

}  // namespace scedft
