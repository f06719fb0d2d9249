#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace ecm {

/// One training draw: the generation frame plus its context frames, all
/// inside [window_start, window_start + window_len).
struct SamplingPlan {
  std::vector<int> context_frames;  // sorted ascending, generation frame excluded
  int generation_frame = 0;
  int window_start = 0;
  int window_len = 0;
};

// Draws n_context + 1 distinct frames uniformly without replacement from the
// window, then designates one of them uniformly as the generation frame.
// Bit-reproducible per seed.
SamplingPlan sample_training_frames(int window_start, int window_len, int n_context,
                                    uint64_t seed);

enum class ScheduleMode { chronological, stride, reverse, custom };

struct ScheduleStep {
  int generation_frame = 0;
  std::vector<int> context_frames;  // nearest first
};

struct InferenceSchedule {
  ScheduleMode mode = ScheduleMode::chronological;
  int stride = 1;
  int n_hist = 0;
  std::vector<int> reference_frames;  // provided as inputs, never generated
  std::vector<ScheduleStep> steps;
};

// chronological: every frame 0..total-1 in order, step t reading contexts
// {t-s, t-2s, ..., t-n_hist*s} clipped to frames already generated (the first
// steps run with fewer, down to zero, contexts). stride: the same over the
// subsampled frames {0, s, 2s, ...}. reverse: the chronological schedule
// under index reflection.
InferenceSchedule build_inference_schedule(int total_frames, ScheduleMode mode, int stride,
                                           int n_hist);

// Chronological generation over the non-reference frames where every step
// additionally reads the fixed reference frames (logged real imagery); e.g.
// n_hist = 1 with two reference indices reproduces the 1-historical /
// 2-reference comparison setup.
InferenceSchedule build_reference_schedule(int total_frames,
                                           std::span<const int> reference_frames, int n_hist);

// Wraps caller-provided steps after checking topological validity.
InferenceSchedule custom_schedule(std::vector<ScheduleStep> steps);

// True when every step's contexts were generated by an earlier step or are
// provided reference frames.
bool schedule_is_valid(const InferenceSchedule& schedule);

}  // namespace ecm
