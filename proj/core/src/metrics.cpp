// Copyright 2026 The sedkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sedkit/metrics.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

namespace sedkit {

std::vector<int> predict_labels(const TaskLogits& logits) {
  const int per = logits.mode == HeadMode::kTwoLogit ? 2 : 1;
  if (logits.values.size() !=
      static_cast<std::size_t>(logits.num_tasks) * per) {
    throw ContractError("predict_labels: " +
                        std::to_string(logits.values.size()) +
                        " logits for " + std::to_string(logits.num_tasks) +
                        " tasks");
  }
  std::vector<int> out(logits.num_tasks);
  for (int k = 0; k < logits.num_tasks; ++k) {
    if (logits.mode == HeadMode::kTwoLogit) {
      out[k] = logits.values[2 * k + 1] > logits.values[2 * k] ? 1 : 0;
    } else {
      out[k] = logits.values[k] > 0.0 ? 1 : 0;  // sigma(x) > 0.5 iff x > 0
    }
  }
  return out;
}

void accumulate_confusion(ConfusionCounts& confusion,
                          const std::vector<std::uint8_t>& reference,
                          const std::vector<int>& predicted) {
  if (confusion.counts.size() != confusion.tasks.size()) {
    confusion.counts.assign(confusion.tasks.size(), TaskCounts{});
  }
  if (reference.size() != confusion.tasks.size() ||
      predicted.size() != confusion.tasks.size()) {
    throw ContractError("confusion: label width mismatch");
  }
  for (std::size_t k = 0; k < confusion.tasks.size(); ++k) {
    const bool ref = reference[k] != 0;
    const bool hyp = predicted[k] != 0;
    TaskCounts& c = confusion.counts[k];
    if (ref && hyp) {
      ++c.tp;
    } else if (!ref && hyp) {
      ++c.fp;
    } else if (ref && !hyp) {
      ++c.fn;
    } else {
      ++c.tn;
    }
  }
  ++confusion.num_clips;
}

namespace {
double safe_div(double num, double den) { return den == 0.0 ? 0.0 : num / den; }
}  // namespace

std::vector<TaskScore> f1_scores(const ConfusionCounts& confusion) {
  std::vector<TaskScore> out;
  out.reserve(confusion.counts.size());
  for (const TaskCounts& c : confusion.counts) {
    TaskScore s;
    s.precision = safe_div(double(c.tp), double(c.tp + c.fp));
    s.recall = safe_div(double(c.tp), double(c.tp + c.fn));
    s.f1 = safe_div(2.0 * s.precision * s.recall, s.precision + s.recall);
    out.push_back(s);
  }
  return out;
}

double f1_final(const std::vector<double>& per_task_f1) {
  if (per_task_f1.empty()) {
    throw ContractError("f1_final: no task scores");
  }
  double sum = 0.0;
  for (double f : per_task_f1) sum += f;
  return sum / static_cast<double>(per_task_f1.size());
}

EvalReport evaluate_predictions(
    const std::vector<ClipRecord>& records, const TaskSubset& subset,
    const std::function<std::vector<int>(const ClipRecord&)>& predict) {
  if (records.empty()) throw DataError("evaluate: no records");
  if (subset.empty()) throw ConfigError("evaluate: empty task subset");

  EvalReport report;
  report.tasks = subset;
  report.confusion.tasks = subset;
  report.confusion.counts.assign(subset.size(), TaskCounts{});
  for (const auto& rec : records) {
    const std::vector<std::uint8_t> ref = restrict_labels(rec.labels, subset);
    const std::vector<int> hyp = predict(rec);
    if (hyp.size() != subset.size()) {
      throw ContractError("evaluate: prediction width " +
                          std::to_string(hyp.size()) + " for " +
                          std::to_string(subset.size()) + " tasks");
    }
    accumulate_confusion(report.confusion, ref, hyp);
  }
  report.num_clips = report.confusion.num_clips;
  report.scores = f1_scores(report.confusion);
  std::vector<double> per_task;
  long tp = 0, fp = 0, fn = 0;
  for (std::size_t k = 0; k < report.scores.size(); ++k) {
    per_task.push_back(report.scores[k].f1);
    tp += report.confusion.counts[k].tp;
    fp += report.confusion.counts[k].fp;
    fn += report.confusion.counts[k].fn;
  }
  report.f1_final = f1_final(per_task);
  const double micro_p = safe_div(double(tp), double(tp + fp));
  const double micro_r = safe_div(double(tp), double(tp + fn));
  report.micro_f1 = safe_div(2.0 * micro_p * micro_r, micro_p + micro_r);
  return report;
}

namespace {
std::string pct(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << v * 100.0;
  return os.str();
}
}  // namespace

std::string render_report_table(const EvalReport& report) {
  std::ostringstream os;
  os << std::left << std::setw(8) << "task" << std::right << std::setw(10)
     << "prec%" << std::setw(10) << "recall%" << std::setw(10) << "f1%"
     << std::setw(8) << "tp" << std::setw(8) << "fp" << std::setw(8) << "fn"
     << '\n';
  for (std::size_t k = 0; k < report.tasks.size(); ++k) {
    const TaskScore& s = report.scores[k];
    const TaskCounts& c = report.confusion.counts[k];
    os << std::left << std::setw(8) << tag_name(report.tasks[k]) << std::right
       << std::setw(10) << pct(s.precision) << std::setw(10) << pct(s.recall)
       << std::setw(10) << pct(s.f1) << std::setw(8) << c.tp << std::setw(8)
       << c.fp << std::setw(8) << c.fn << '\n';
  }
  os << std::left << std::setw(8) << "final" << std::right << std::setw(10)
     << "" << std::setw(10) << "" << std::setw(10) << pct(report.f1_final)
     << '\n';
  os << "clips: " << report.num_clips << "  micro-f1%: "
     << pct(report.micro_f1) << '\n';
  return os.str();
}

std::string report_to_jsonl(const EvalReport& report) {
  std::ostringstream os;
  for (std::size_t k = 0; k < report.tasks.size(); ++k) {
    nlohmann::ordered_json j;
    j["task"] = tag_name(report.tasks[k]);
    j["precision"] = report.scores[k].precision;
    j["recall"] = report.scores[k].recall;
    j["f1"] = report.scores[k].f1;
    j["tp"] = report.confusion.counts[k].tp;
    j["fp"] = report.confusion.counts[k].fp;
    j["fn"] = report.confusion.counts[k].fn;
    j["tn"] = report.confusion.counts[k].tn;
    os << j.dump() << '\n';
  }
  nlohmann::ordered_json summary;
  summary["task"] = "final";
  summary["f1_final"] = report.f1_final;
  summary["micro_f1"] = report.micro_f1;
  summary["clips"] = report.num_clips;
  os << summary.dump() << '\n';
  return os.str();
}

}  // namespace sedkit
