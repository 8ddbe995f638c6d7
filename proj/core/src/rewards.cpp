#include "piqa/rewards.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <string>

namespace piqa::rewards {

void RewardWeights::validate() const {
  if (!(alpha >= 0.0) || !(beta_loc >= 0.0) || !(gamma_fmt >= 0.0) ||
      !std::isfinite(alpha) || !std::isfinite(beta_loc) ||
      !std::isfinite(gamma_fmt))
    throw ArgumentError("reward weights must be finite and >= 0");
}

double acc_reward(double s_pred, double s_mos, double tau) {
  if (!(tau > 0.0)) throw ArgumentError("acc_reward: tau must be positive");
  return std::exp(-std::fabs(s_pred - s_mos) / tau);
}

double iou(const Region& a, const Region& b) {
  const long long inter = intersection_area(a, b);
  const long long uni = a.area() + b.area() - inter;
  return uni <= 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double loc_reward(bool has_defect, const std::optional<Region>& b_pred,
                  const std::vector<DefectRecord>& defects) {
  if (!has_defect || !b_pred.has_value() || defects.empty()) return 0.0;
  std::vector<Region> boxes;
  boxes.reserve(defects.size());
  for (const DefectRecord& d : defects) boxes.push_back(d.region);
  return iou(*b_pred, union_box(boxes));
}

namespace {

// Minimal scanner for the trace grammar. Returns false on any deviation.
struct Scanner {
  std::string_view s;
  size_t pos = 0;

  void skip_ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos])))
      ++pos;
  }
  bool literal(std::string_view lit) {
    if (s.substr(pos, lit.size()) != lit) return false;
    pos += lit.size();
    return true;
  }
  bool attr_int(std::string_view name, int& out) {
    skip_ws();
    if (!literal(name) ) return false;
    if (pos >= s.size() || s[pos] != '=') return false;
    ++pos;
    size_t start = pos;
    if (pos < s.size() && (s[pos] == '-' || s[pos] == '+')) ++pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos])))
      ++pos;
    if (pos == start) return false;
    out = std::atoi(std::string(s.substr(start, pos - start)).c_str());
    return true;
  }
};

}  // namespace

std::optional<ParsedTrace> parse_trace(std::string_view trace_text) {
  Scanner sc{trace_text};
  sc.skip_ws();
  if (!sc.literal("<think>")) return std::nullopt;
  const size_t close = trace_text.find("</think>", sc.pos);
  if (close == std::string_view::npos) return std::nullopt;
  const std::string_view think_body = trace_text.substr(sc.pos, close - sc.pos);
  if (think_body.find("<think>") != std::string_view::npos)
    return std::nullopt;  // nested open means more than one block
  sc.pos = close + 8;

  ParsedTrace parsed;
  while (true) {
    sc.skip_ws();
    if (sc.s.substr(sc.pos, 5) != "<crop") break;
    sc.pos += 5;
    Region r;
    if (!sc.attr_int("x", r.x) || !sc.attr_int("y", r.y) ||
        !sc.attr_int("w", r.w) || !sc.attr_int("h", r.h))
      return std::nullopt;
    sc.skip_ws();
    if (!sc.literal("/>")) return std::nullopt;
    sc.skip_ws();
    if (!sc.literal("<observe/>")) return std::nullopt;
    parsed.crops.push_back(r);
  }

  sc.skip_ws();
  if (!sc.literal("<score>")) return std::nullopt;
  const size_t score_close = trace_text.find("</score>", sc.pos);
  if (score_close == std::string_view::npos) return std::nullopt;
  const std::string body(trace_text.substr(sc.pos, score_close - sc.pos));
  char* end = nullptr;
  const double v = std::strtod(body.c_str(), &end);
  if (end == body.c_str()) return std::nullopt;
  while (end && *end != '\0') {
    if (!std::isspace(static_cast<unsigned char>(*end))) return std::nullopt;
    ++end;
  }
  if (!(v >= 1.0 && v <= 5.0)) return std::nullopt;
  sc.pos = score_close + 8;
  sc.skip_ws();
  if (sc.pos != trace_text.size()) return std::nullopt;  // score is terminal

  parsed.score = v;
  return parsed;
}

double format_reward(std::string_view trace_text) {
  return parse_trace(trace_text).has_value() ? 1.0 : 0.0;
}

RewardBreakdown total_reward(double r_acc, double r_loc, double r_fmt,
                             const RewardWeights& weights) {
  weights.validate();
  RewardBreakdown bd;
  bd.r_acc = r_acc;
  bd.r_loc = r_loc;
  bd.r_fmt = r_fmt;
  bd.r_total = weights.alpha * r_acc + weights.beta_loc * r_loc +
               weights.gamma_fmt * r_fmt;
  return bd;
}

}  // namespace piqa::rewards
