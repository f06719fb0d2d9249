#include "ecm/sampling.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>

#include "ecm/rng.hpp"

namespace ecm {

SamplingPlan sample_training_frames(int window_start, int window_len, int n_context,
                                    uint64_t seed) {
  if (n_context < 0) throw std::invalid_argument("sample_training_frames: n_context < 0");
  const int draw = n_context + 1;
  if (window_len < draw) {
    throw std::invalid_argument("sample_training_frames: window too small for draw count");
  }

  std::vector<int> pool(window_len);
  std::iota(pool.begin(), pool.end(), window_start);

  std::mt19937_64 eng(splitmix64(seed));
  // Partial Fisher-Yates: the first `draw` slots become the sample.
  for (int i = 0; i < draw; ++i) {
    const int j = i + static_cast<int>(bounded(eng, static_cast<uint64_t>(window_len - i)));
    std::swap(pool[i], pool[j]);
  }
  const int gen_slot = static_cast<int>(bounded(eng, static_cast<uint64_t>(draw)));

  SamplingPlan plan;
  plan.window_start = window_start;
  plan.window_len = window_len;
  plan.generation_frame = pool[gen_slot];
  for (int i = 0; i < draw; ++i) {
    if (i != gen_slot) plan.context_frames.push_back(pool[i]);
  }
  std::sort(plan.context_frames.begin(), plan.context_frames.end());
  return plan;
}

InferenceSchedule build_inference_schedule(int total_frames, ScheduleMode mode, int stride,
                                           int n_hist) {
  if (total_frames < 1) throw std::invalid_argument("schedule: total_frames must be >= 1");
  if (stride < 1) throw std::invalid_argument("schedule: stride must be >= 1");
  if (n_hist < 0) throw std::invalid_argument("schedule: n_hist must be >= 0");
  if (mode == ScheduleMode::custom) {
    throw std::invalid_argument("schedule: custom schedules are built from explicit steps");
  }

  InferenceSchedule sched;
  sched.mode = mode;
  sched.stride = stride;
  sched.n_hist = n_hist;

  std::vector<int> frames;
  if (mode == ScheduleMode::stride) {
    for (int t = 0; t < total_frames; t += stride) frames.push_back(t);
  } else if (mode == ScheduleMode::chronological) {
    for (int t = 0; t < total_frames; ++t) frames.push_back(t);
  } else {  // reverse
    for (int t = total_frames - 1; t >= 0; --t) frames.push_back(t);
  }

  const int dir = mode == ScheduleMode::reverse ? 1 : -1;
  for (size_t s = 0; s < frames.size(); ++s) {
    ScheduleStep step;
    step.generation_frame = frames[s];
    for (int j = 1; j <= n_hist; ++j) {
      const int c = frames[s] + dir * j * stride;
      if (c < 0 || c >= total_frames) break;
      step.context_frames.push_back(c);
    }
    sched.steps.push_back(std::move(step));
  }
  return sched;
}

InferenceSchedule build_reference_schedule(int total_frames,
                                           std::span<const int> reference_frames, int n_hist) {
  if (total_frames < 1) throw std::invalid_argument("schedule: total_frames must be >= 1");
  if (n_hist < 0) throw std::invalid_argument("schedule: n_hist must be >= 0");
  const std::set<int> refs(reference_frames.begin(), reference_frames.end());
  for (int r : refs) {
    if (r < 0 || r >= total_frames) {
      throw std::invalid_argument("schedule: reference frame outside the sequence");
    }
  }

  InferenceSchedule sched;
  sched.mode = ScheduleMode::custom;
  sched.n_hist = n_hist;
  sched.reference_frames.assign(refs.begin(), refs.end());

  std::vector<int> generated;
  for (int t = 0; t < total_frames; ++t) {
    if (refs.count(t) != 0) continue;
    ScheduleStep step;
    step.generation_frame = t;
    const int take = std::min<int>(n_hist, static_cast<int>(generated.size()));
    for (int j = 1; j <= take; ++j) {
      step.context_frames.push_back(generated[generated.size() - j]);
    }
    step.context_frames.insert(step.context_frames.end(), refs.begin(), refs.end());
    generated.push_back(t);
    sched.steps.push_back(std::move(step));
  }
  return sched;
}

InferenceSchedule custom_schedule(std::vector<ScheduleStep> steps) {
  InferenceSchedule sched;
  sched.mode = ScheduleMode::custom;
  sched.steps = std::move(steps);
  if (!schedule_is_valid(sched)) {
    throw std::invalid_argument("schedule: steps reference frames not yet generated");
  }
  return sched;
}

bool schedule_is_valid(const InferenceSchedule& schedule) {
  std::set<int> available(schedule.reference_frames.begin(), schedule.reference_frames.end());
  for (const ScheduleStep& step : schedule.steps) {
    for (int c : step.context_frames) {
      if (available.count(c) == 0) return false;
    }
    if (!available.insert(step.generation_frame).second) return false;  // duplicate step
  }
  return true;
}

}  // namespace ecm
