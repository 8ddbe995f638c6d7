#include "piqa/scorer.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "piqa/io_util.hpp"
#include "piqa/parallel.hpp"
#include "piqa/rng.hpp"

namespace piqa::scorer {

namespace {

using json = nlohmann::json;

std::vector<double> oracle_group(const BenchmarkItem& item, int k,
                                 const ScorerBinding& binding) {
  Rng rng(Rng::derive(binding.seed, item.id));
  std::vector<double> scores(k);
  for (int i = 0; i < k; ++i)
    scores[i] = std::clamp(item.mos + rng.normal(0.0, binding.oracle_jitter),
                           1.0, 5.0);
  return scores;
}

std::vector<double> remote_group(const BenchmarkItem& item, int k,
                                 const ScorerBinding& binding) {
  // Split endpoint into host part and path.
  const std::string& ep = binding.endpoint;
  const size_t scheme = ep.find("://");
  if (scheme == std::string::npos)
    throw ArgumentError("remote endpoint must include a scheme: " + ep);
  const size_t path_pos = ep.find('/', scheme + 3);
  const std::string host =
      path_pos == std::string::npos ? ep : ep.substr(0, path_pos);
  const std::string path =
      path_pos == std::string::npos ? "/score" : ep.substr(path_pos);

  json body{{"v", 1}, {"id", item.id}, {"image_path", item.image_path},
            {"k", k}};
  const std::string payload = body.dump();

  std::string last_error;
  for (int attempt = 0; attempt <= binding.retries; ++attempt) {
    if (attempt > 0)
      std::this_thread::sleep_for(
          std::chrono::milliseconds(50 * (1 << (attempt - 1))));
    httplib::Client client(host);
    client.set_connection_timeout(0, binding.timeout_ms * 1000);
    client.set_read_timeout(0, binding.timeout_ms * 1000);
    client.set_write_timeout(0, binding.timeout_ms * 1000);
    if (!binding.auth_bearer.empty())
      client.set_default_headers(
          {{"Authorization", "Bearer " + binding.auth_bearer}});
    httplib::Result res = client.Post(path, payload, "application/json");
    if (!res) {
      last_error = "transport error (" + httplib::to_string(res.error()) + ")";
      continue;
    }
    if (res->status != 200) {
      last_error = "http status " + std::to_string(res->status);
      continue;
    }
    json doc;
    try {
      doc = json::parse(res->body);
    } catch (const json::parse_error& e) {
      throw SchemaError("remote scorer: bad JSON for item " + item.id + ": " +
                        e.what());
    }
    if (!doc.is_object() || !doc.contains("scores") ||
        !doc["scores"].is_array())
      throw SchemaError("remote scorer: missing scores array for item " +
                        item.id);
    if (doc.contains("id") && doc["id"].get<std::string>() != item.id)
      throw SchemaError("remote scorer: id mismatch for item " + item.id);
    std::vector<double> scores;
    for (const json& v : doc["scores"]) {
      if (!v.is_number())
        throw SchemaError("remote scorer: non-numeric score for item " +
                          item.id);
      scores.push_back(v.get<double>());
    }
    if (static_cast<int>(scores.size()) != k)
      throw SchemaError("remote scorer: expected " + std::to_string(k) +
                        " scores for item " + item.id + ", got " +
                        std::to_string(scores.size()));
    return scores;
  }
  throw NetworkError("remote scorer failed for item " + item.id + " after " +
                     std::to_string(binding.retries + 1) + " attempts: " +
                     last_error);
}

}  // namespace

ScorerMode scorer_mode_from_string(const std::string& s) {
  if (s == "oracle") return ScorerMode::oracle;
  if (s == "replay") return ScorerMode::replay;
  if (s == "remote") return ScorerMode::remote;
  throw ArgumentError("unknown scorer mode: " + s);
}

void ScorerBinding::validate() const {
  if (mode == ScorerMode::replay && replay_path.empty())
    throw ArgumentError("replay scorer requires replay_path");
  if (mode == ScorerMode::remote && endpoint.empty())
    throw ArgumentError("remote scorer requires endpoint");
  if (timeout_ms <= 0 || retries < 0 || max_in_flight < 1)
    throw ArgumentError("scorer binding: bad timeout/retries/parallelism");
  if (oracle_jitter < 0.0)
    throw ArgumentError("scorer binding: negative oracle jitter");
}

std::vector<ScoreGroupResult> score_items(
    const ScorerBinding& binding, const std::vector<BenchmarkItem>& manifest,
    int k) {
  binding.validate();
  if (k < 1) throw ArgumentError("score_items: k must be >= 1");

  std::vector<ScoreGroupResult> out(manifest.size());

  if (binding.mode == ScorerMode::replay) {
    const std::vector<ScoreGroupResult> groups = score_groups_from_json(
        read_text_file(binding.replay_path), binding.replay_path);
    std::map<std::string, const ScoreGroupResult*> by_id;
    for (const ScoreGroupResult& g : groups) by_id[g.id] = &g;
    for (size_t i = 0; i < manifest.size(); ++i) {
      const auto it = by_id.find(manifest[i].id);
      if (it == by_id.end())
        throw MissingEntryError("replay file " + binding.replay_path +
                                " has no entry for item " + manifest[i].id);
      if (static_cast<int>(it->second->scores.size()) != k)
        throw SchemaError("replay entry for item " + manifest[i].id +
                          " has " + std::to_string(it->second->scores.size()) +
                          " scores, expected " + std::to_string(k));
      out[i] = *it->second;
    }
    return out;
  }

  parallel_for(manifest.size(), binding.max_in_flight, [&](size_t i) {
    out[i].id = manifest[i].id;
    out[i].scores = binding.mode == ScorerMode::oracle
                        ? oracle_group(manifest[i], k, binding)
                        : remote_group(manifest[i], k, binding);
  });
  return out;
}

std::string score_groups_to_json(const std::vector<ScoreGroupResult>& groups) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (const ScoreGroupResult& g : groups) doc[g.id] = g.scores;
  return doc.dump(2) + "\n";
}

std::vector<ScoreGroupResult> score_groups_from_json(
    const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(origin + ": " + e.what());
  }
  if (!doc.is_object())
    throw ParseError(origin + ": score groups root must be a JSON object");
  std::vector<ScoreGroupResult> groups;
  for (const auto& [id, scores] : doc.items()) {
    if (!scores.is_array())
      throw SchemaError(origin + ": entry " + id + " is not an array");
    ScoreGroupResult g;
    g.id = id;
    for (const json& v : scores) {
      if (!v.is_number())
        throw SchemaError(origin + ": non-numeric score for " + id);
      g.scores.push_back(v.get<double>());
    }
    groups.push_back(std::move(g));
  }
  return groups;
}

}  // namespace piqa::scorer
