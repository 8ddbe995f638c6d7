#pragma once

#include <string>
#include <vector>

#include "piqa/types.hpp"

namespace piqa {

// Benchmark manifest: JSON array of items. Field names are fixed; unknown
// fields are rejected. Order is preserved and write -> read is the identity.
std::vector<BenchmarkItem> read_manifest(const std::string& path);
std::vector<BenchmarkItem> parse_manifest(const std::string& text,
                                          const std::string& origin);
void write_manifest(const std::vector<BenchmarkItem>& items,
                    const std::string& path);
std::string manifest_to_string(const std::vector<BenchmarkItem>& items);

}  // namespace piqa
