#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "piqa/types.hpp"

namespace piqa::scorer {

enum class ScorerMode { oracle, replay, remote };

ScorerMode scorer_mode_from_string(const std::string& s);

// Where score groups come from: a deterministic MOS-plus-jitter oracle, a
// recorded file, or a remote HTTP scorer.
struct ScorerBinding {
  ScorerMode mode = ScorerMode::oracle;
  std::string replay_path;       // replay mode
  std::string endpoint;          // remote mode, e.g. http://host:port/score
  int timeout_ms = 2000;
  int retries = 2;
  double oracle_jitter = 0.15;   // stddev of the oracle's score noise
  uint64_t seed = 0;
  std::string auth_bearer;       // optional Authorization header
  int max_in_flight = 4;

  void validate() const;
};

struct ScoreGroupResult {
  std::string id;
  std::vector<double> scores;  // exactly k entries
};

// Scores every manifest item with k samples. Oracle mode returns the item
// MOS plus seeded Gaussian jitter clamped to [1,5]; replay mode reads groups
// from a JSON file {id: [k scores]}; remote mode POSTs
// {"v":1,"id","image_path","k"} and expects {"id","scores":[k]}, retrying
// with exponential backoff before failing the item.
std::vector<ScoreGroupResult> score_items(
    const ScorerBinding& binding, const std::vector<BenchmarkItem>& manifest,
    int k);

std::string score_groups_to_json(const std::vector<ScoreGroupResult>& groups);
std::vector<ScoreGroupResult> score_groups_from_json(const std::string& text,
                                                     const std::string& origin);

}  // namespace piqa::scorer
