#pragma once

#include <string_view>
#include <vector>

namespace levelscope {

// Data files compiled into the library: "ring_matrices.json" and the
// reconstructed tables "tables/<id>.csv". Throws ConfigError for unknown names.
std::string_view embedded_asset(std::string_view name);
std::vector<std::string_view> embedded_asset_names();

}  // namespace levelscope
