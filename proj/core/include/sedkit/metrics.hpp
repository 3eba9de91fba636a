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

#ifndef SEDKIT_METRICS_HPP_
#define SEDKIT_METRICS_HPP_

#include <functional>
#include <string>
#include <vector>

#include "sedkit/checkpoint.hpp"
#include "sedkit/fbank.hpp"
#include "sedkit/label.hpp"
#include "sedkit/manifest.hpp"
#include "sedkit/model.hpp"
#include "sedkit/wav.hpp"

namespace sedkit {

// Logits for one clip in task-subset order: per task one value (sigmoid
// head) or a (negative, positive) pair.
struct TaskLogits {
  std::vector<double> values;  // K or 2K, task-major
  int num_tasks = 0;
  HeadMode mode = HeadMode::kTwoLogit;
};

// Hard decisions per task: two-logit predicts positive iff logit[1] >
// logit[0] (ties negative); one-logit iff sigmoid(logit) > 0.5.
std::vector<int> predict_labels(const TaskLogits& logits);

struct TaskCounts {
  long tp = 0, fp = 0, fn = 0, tn = 0;
};

struct ConfusionCounts {
  TaskSubset tasks;
  std::vector<TaskCounts> counts;  // parallel to tasks
  long num_clips = 0;
};

void accumulate_confusion(ConfusionCounts& confusion,
                          const std::vector<std::uint8_t>& reference,
                          const std::vector<int>& predicted);

struct TaskScore {
  double precision = 0.0, recall = 0.0, f1 = 0.0;  // in [0,1]; 0/0 -> 0
};

std::vector<TaskScore> f1_scores(const ConfusionCounts& confusion);

// Arithmetic mean of per-task F1 over the active tasks.
double f1_final(const std::vector<double>& per_task_f1);

struct EvalReport {
  TaskSubset tasks;
  std::vector<TaskScore> scores;
  double f1_final = 0.0;
  double micro_f1 = 0.0;  // pooled counts across tasks
  long num_clips = 0;
  ConfusionCounts confusion;
};

// Scores a prediction source against reference records.  predict is called
// once per record, in order.
EvalReport evaluate_predictions(
    const std::vector<ClipRecord>& records, const TaskSubset& subset,
    const std::function<std::vector<int>(const ClipRecord&)>& predict);

// Rendering: fixed-width table (percentages, two decimals) and a JSONL
// line per task plus a summary line.
std::string render_report_table(const EvalReport& report);
std::string report_to_jsonl(const EvalReport& report);

template <typename Real>
TaskLogits logits_from_tensor(const TensorT<Real>& t, HeadMode mode) {
  TaskLogits out;
  out.mode = mode;
  out.num_tasks = t.extent(0);
  out.values.assign(t.values().begin(), t.values().end());
  return out;
}

// Runs the model over every record's audio (features computed with the
// model's frontend config, no augmentation) and scores the decisions.
// Deterministic: identical inputs give identical reports.  Non-finite
// logits raise NumericAbort naming the clip.
template <typename Real>
EvalReport evaluate(const ModelT<Real>& model,
                    const std::vector<ClipRecord>& records) {
  const ModelConfig& cfg = model.config();
  return evaluate_predictions(
      records, cfg.tasks, [&](const ClipRecord& rec) {
        Waveform wav = load_wav(rec.audio);
        FeatureMatrix feats = compute_fbank(wav, cfg.frontend);
        OpContextT<Real> ctx;  // no tape, not training
        TensorT<Real> logits = model.forward(feats, ctx);
        if (!all_finite(logits)) {
          throw NumericAbort("non-finite logits evaluating clip " + rec.id);
        }
        return predict_labels(logits_from_tensor(logits, cfg.head_mode));
      });
}

}  // namespace sedkit

#endif  // SEDKIT_METRICS_HPP_
