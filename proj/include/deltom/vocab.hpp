#pragma once

#include <string>
#include <vector>

namespace deltom::vocab {

// Versioned name/object/container/room pools. Stories are reproducible
// across releases as long as the version tag is unchanged; any edit to the
// pools must bump the tag.
extern const char* const kVersion;

const std::vector<std::string>& agent_names();
const std::vector<std::string>& object_names();
const std::vector<std::string>& container_names();
const std::vector<std::string>& room_names();

}  // namespace deltom::vocab
