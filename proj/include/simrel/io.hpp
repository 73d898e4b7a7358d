#pragma once

#include <filesystem>
#include <json.hpp>
#include <string>

#include "simrel/concretize.hpp"
#include "simrel/grid.hpp"

namespace simrel {

using Json = nlohmann::ordered_json;

/// Parses the system format. Simple systems may omit "internal", "outputs"
/// and "H"; declared flags are verified. Throws InputError.
GeneralSystem system_from_json(const Json& j);
/// A system file that must describe a simple system.
FiniteSystem finite_from_json(const Json& j);

Json system_to_json(const GeneralSystem& sys);
/// Compact form without internal/outputs/H.
Json finite_to_json(const FiniteSystem& sys);

/// {"pairs": [["x1", "x2"], ...]} against the given label sets.
BinaryRelation relation_from_json(const Json& j, const LabelSet& x1, const LabelSet& x2);
Json relation_to_json(const BinaryRelation& r, const LabelSet& x1, const LabelSet& x2);

Json interface_to_json(const InterfaceSpec& iface, const FiniteSystem& s1, const LabelSet& x2_labels);
Json controller_to_json(const StaticController& sc);
/// Reads the "domain" and "inputs" fields back against the labels of s2.
/// The specification becomes safety of the domain.
StaticController controller_from_json(const Json& j, const FiniteSystem& s2);
Json report_to_json(const CheckReport& rep);
/// The abstract system plus a "metadata" block.
Json abstraction_to_json(const GridAbstraction& a);

/// Rows x2,u2 and one |F2| column per abstraction. All abstractions must
/// share the grid and inputs.
std::string cardinality_csv(const std::vector<const GridAbstraction*>& abstractions);

/// Reads and parses a JSON file. Throws InputError.
Json read_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const Json& j);

}  // namespace simrel
