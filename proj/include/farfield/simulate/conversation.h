#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace farfield::simulate {

// Turn-taking statistics of a meeting. Pauses and turn lengths are
// lognormal (given by median and log-standard deviation), overlaps
// exponential.
struct OverlapStats {
  double p_overlap = 0.25;
  double pause_median = 0.3;
  double pause_sigma = 0.5;
  double overlap_mean = 0.7;
  double turn_median = 2.5;
  double turn_sigma = 0.6;
  double min_turn = 0.3;

  void Validate() const;
};

struct ScheduledTurn {
  int speaker = 0;
  double start = 0.0;
  double duration = 0.0;
  double end() const { return start + duration; }
};

// Alternating-turn schedule over [0, duration). Each next speaker differs
// from the previous one. With probability p_overlap the next turn starts
// before the current one ends; the overlap never exceeds the part of that
// turn spoken alone, so at most two speakers are ever active. The last
// turn is cut at `duration`.
std::vector<ScheduledTurn> SampleConversation(const OverlapStats& stats,
                                              int speakers, double duration,
                                              std::uint64_t seed);

// Time during which at least two scheduled turns are active.
double OverlappedTime(const std::vector<ScheduledTurn>& turns);

// Largest number of simultaneously active turns.
int MaxConcurrency(const std::vector<ScheduledTurn>& turns);

}  // namespace farfield::simulate
