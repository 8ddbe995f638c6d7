#include "piqa/manifest.hpp"

#include <nlohmann/json.hpp>

#include "piqa/io_util.hpp"

namespace piqa {

namespace {

using json = nlohmann::ordered_json;

const char* kItemFields[] = {"id",  "image_path", "width",      "height",
                             "mos", "seed",       "source_tag", "defects"};
const char* kDefectFields[] = {"x", "y", "w", "h", "kind", "severity",
                               "importance"};

template <size_t N>
void reject_unknown_fields(const json& obj, const char* (&allowed)[N],
                           const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* f : allowed) known |= (key == f);
    if (!known)
      throw ValidationError(where + ": unknown field \"" + key + "\"");
  }
}

const json& require(const json& obj, const char* field,
                    const std::string& where) {
  const auto it = obj.find(field);
  if (it == obj.end())
    throw ValidationError(where + ": missing field \"" + field + "\"");
  return *it;
}

BenchmarkItem item_from_json(const json& obj, size_t index) {
  const std::string where = "manifest item " + std::to_string(index);
  if (!obj.is_object()) throw ValidationError(where + ": not an object");
  reject_unknown_fields(obj, kItemFields, where);

  BenchmarkItem item;
  try {
    item.id = require(obj, "id", where).get<std::string>();
    item.image_path = require(obj, "image_path", where).get<std::string>();
    item.width = require(obj, "width", where).get<int>();
    item.height = require(obj, "height", where).get<int>();
    item.mos = require(obj, "mos", where).get<double>();
    item.seed = require(obj, "seed", where).get<int64_t>();
    item.source_tag = require(obj, "source_tag", where).get<std::string>();
    const json& defects = require(obj, "defects", where);
    if (!defects.is_array())
      throw ValidationError(where + ": defects is not an array");
    for (size_t i = 0; i < defects.size(); ++i) {
      const json& d = defects[i];
      const std::string dwhere = where + " defect " + std::to_string(i);
      if (!d.is_object()) throw ValidationError(dwhere + ": not an object");
      reject_unknown_fields(d, kDefectFields, dwhere);
      DefectRecord rec;
      rec.region.x = require(d, "x", dwhere).get<int>();
      rec.region.y = require(d, "y", dwhere).get<int>();
      rec.region.w = require(d, "w", dwhere).get<int>();
      rec.region.h = require(d, "h", dwhere).get<int>();
      rec.kind =
          defect_kind_from_string(require(d, "kind", dwhere).get<std::string>());
      rec.severity = require(d, "severity", dwhere).get<double>();
      rec.importance = require(d, "importance", dwhere).get<double>();
      item.defects.push_back(rec);
    }
  } catch (const json::exception& e) {
    throw ValidationError(where + ": " + e.what());
  }
  validate_item(item);
  return item;
}

json item_to_json(const BenchmarkItem& item) {
  json defects = json::array();
  for (const DefectRecord& d : item.defects) {
    defects.push_back(json{{"x", d.region.x},
                           {"y", d.region.y},
                           {"w", d.region.w},
                           {"h", d.region.h},
                           {"kind", to_string(d.kind)},
                           {"severity", d.severity},
                           {"importance", d.importance}});
  }
  return json{{"id", item.id},
              {"image_path", item.image_path},
              {"width", item.width},
              {"height", item.height},
              {"mos", item.mos},
              {"seed", item.seed},
              {"source_tag", item.source_tag},
              {"defects", std::move(defects)}};
}

}  // namespace

std::vector<BenchmarkItem> parse_manifest(const std::string& text,
                                          const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(origin + ": " + e.what());
  }
  if (!doc.is_array())
    throw ParseError(origin + ": manifest root must be a JSON array");
  std::vector<BenchmarkItem> items;
  items.reserve(doc.size());
  for (size_t i = 0; i < doc.size(); ++i)
    items.push_back(item_from_json(doc[i], i));
  return items;
}

std::vector<BenchmarkItem> read_manifest(const std::string& path) {
  return parse_manifest(read_text_file(path), path);
}

std::string manifest_to_string(const std::vector<BenchmarkItem>& items) {
  json doc = json::array();
  for (const BenchmarkItem& item : items) doc.push_back(item_to_json(item));
  return doc.dump(2) + "\n";
}

void write_manifest(const std::vector<BenchmarkItem>& items,
                    const std::string& path) {
  for (const BenchmarkItem& item : items) validate_item(item);
  atomic_write_file(path, manifest_to_string(items));
}

}  // namespace piqa
