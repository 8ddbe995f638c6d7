#pragma once

#include <span>
#include <string>
#include <vector>

#include "piqa/types.hpp"

namespace piqa::eval {

// Spearman rank correlation with average ranks for ties. Throws
// ArgumentError on length mismatch, n < 2, or constant inputs.
double srcc(std::span<const double> preds, std::span<const double> gts);

// Pearson linear correlation, same preconditions as srcc.
double plcc(std::span<const double> preds, std::span<const double> gts);

struct Prediction {
  std::string id;
  double score = 0.0;
};

struct GroupRow {
  std::string source_tag;
  int n = 0;
  double srcc = 0.0;
  double plcc = 0.0;
  double mae = 0.0;
  bool degenerate = false;  // constant preds or gts, or n < 2
};

struct EvalReport {
  std::vector<GroupRow> rows;  // one per source_tag, sorted by tag
  GroupRow average;            // unweighted mean over non-degenerate rows

  std::string to_text() const;
  std::string to_json() const;
  std::string rows_to_csv() const;
};

// Groups by source_tag; every prediction id must exist in the manifest.
EvalReport evaluate(const std::vector<Prediction>& predictions,
                    const std::vector<BenchmarkItem>& manifest);

}  // namespace piqa::eval
