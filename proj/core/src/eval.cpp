#include "piqa/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

namespace piqa::eval {

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  const size_t n = v.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n, 0.0);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  const size_t n = a.size();
  double ma = 0.0, mb = 0.0;
  for (size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa <= 0.0 || sbb <= 0.0)
    throw ArgumentError("correlation undefined for constant input");
  return sab / std::sqrt(saa * sbb);
}

void check_inputs(std::span<const double> preds, std::span<const double> gts) {
  if (preds.size() != gts.size())
    throw ArgumentError("preds/gts length mismatch");
  if (preds.size() < 2) throw ArgumentError("need at least 2 samples");
}

bool is_constant(std::span<const double> v) {
  for (const double x : v)
    if (x != v[0]) return false;
  return true;
}

}  // namespace

double srcc(std::span<const double> preds, std::span<const double> gts) {
  check_inputs(preds, gts);
  const std::vector<double> rp = average_ranks(preds);
  const std::vector<double> rg = average_ranks(gts);
  return pearson(rp, rg);
}

double plcc(std::span<const double> preds, std::span<const double> gts) {
  check_inputs(preds, gts);
  return pearson(preds, gts);
}

EvalReport evaluate(const std::vector<Prediction>& predictions,
                    const std::vector<BenchmarkItem>& manifest) {
  std::map<std::string, const BenchmarkItem*> by_id;
  for (const BenchmarkItem& item : manifest) by_id[item.id] = &item;

  std::vector<std::string> missing;
  struct GroupData {
    std::vector<double> preds, gts;
  };
  std::map<std::string, GroupData> groups;
  for (const Prediction& p : predictions) {
    const auto it = by_id.find(p.id);
    if (it == by_id.end()) {
      missing.push_back(p.id);
      continue;
    }
    GroupData& g = groups[it->second->source_tag];
    g.preds.push_back(p.score);
    g.gts.push_back(it->second->mos);
  }
  if (!missing.empty()) {
    std::string msg = "prediction ids missing from manifest:";
    for (const std::string& id : missing) msg += " " + id;
    throw MissingEntryError(msg);
  }
  if (groups.empty()) throw ArgumentError("evaluate: no predictions");

  EvalReport report;
  int live = 0;
  for (auto& [tag, g] : groups) {
    GroupRow row;
    row.source_tag = tag;
    row.n = static_cast<int>(g.preds.size());
    double mae = 0.0;
    for (size_t i = 0; i < g.preds.size(); ++i)
      mae += std::fabs(g.preds[i] - g.gts[i]);
    row.mae = mae / static_cast<double>(g.preds.size());
    row.degenerate = row.n < 2 || is_constant(g.preds) || is_constant(g.gts);
    if (!row.degenerate) {
      row.srcc = srcc(g.preds, g.gts);
      row.plcc = plcc(g.preds, g.gts);
      report.average.srcc += row.srcc;
      report.average.plcc += row.plcc;
      report.average.mae += row.mae;
      ++live;
    }
    report.average.n += row.n;
    report.rows.push_back(std::move(row));
  }
  report.average.source_tag = "average";
  if (live > 0) {
    report.average.srcc /= live;
    report.average.plcc /= live;
    report.average.mae /= live;
  } else {
    report.average.degenerate = true;
  }
  return report;
}

std::string EvalReport::to_text() const {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-16s %6s %9s %9s %9s  %s\n", "source_tag",
                "n", "srcc", "plcc", "mae", "flags");
  out << line;
  auto emit = [&](const GroupRow& row) {
    if (row.degenerate) {
      std::snprintf(line, sizeof(line), "%-16s %6d %9s %9s %9.4f  %s\n",
                    row.source_tag.c_str(), row.n, "-", "-", row.mae,
                    "degenerate");
    } else {
      std::snprintf(line, sizeof(line), "%-16s %6d %9.4f %9.4f %9.4f\n",
                    row.source_tag.c_str(), row.n, row.srcc, row.plcc,
                    row.mae);
    }
    out << line;
  };
  for (const GroupRow& row : rows) emit(row);
  emit(average);
  return out.str();
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json doc;
  auto row_json = [](const GroupRow& row) {
    nlohmann::ordered_json j{{"source_tag", row.source_tag},
                             {"n", row.n},
                             {"mae", row.mae},
                             {"degenerate", row.degenerate}};
    if (!row.degenerate) {
      j["srcc"] = row.srcc;
      j["plcc"] = row.plcc;
    }
    return j;
  };
  doc["groups"] = nlohmann::ordered_json::array();
  for (const GroupRow& row : rows) doc["groups"].push_back(row_json(row));
  doc["average"] = row_json(average);
  return doc.dump(2) + "\n";
}

std::string EvalReport::rows_to_csv() const {
  std::ostringstream out;
  out << "source_tag,n,srcc,plcc,mae,degenerate\n";
  auto emit = [&](const GroupRow& row) {
    out << row.source_tag << "," << row.n << ",";
    if (row.degenerate)
      out << ",";
    else
      out << row.srcc << "," << row.plcc;
    out << "," << row.mae << "," << (row.degenerate ? 1 : 0) << "\n";
  };
  for (const GroupRow& row : rows) emit(row);
  emit(average);
  return out.str();
}

}  // namespace piqa::eval
