#pragma once

#include <string>
#include <vector>

namespace cellhom {

// Names of the built-in run configurations, sorted.
std::vector<std::string> fixture_names();

// JSON text of a built-in configuration; throws unknown-catalog-id for names
// not in the library. The same configurations are checked into fixtures/ so
// they can be inspected and diffed.
const std::string& fixture_json(const std::string& name);

}  // namespace cellhom
