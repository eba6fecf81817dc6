#include "farfield/simulate/conversation.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>

#include "farfield/core/errors.h"

namespace farfield::simulate {

void OverlapStats::Validate() const {
  if (p_overlap < 0.0 || p_overlap > 1.0) throw ConfigError("p_overlap must lie in [0, 1]");
  if (!(pause_median > 0.0) || pause_sigma < 0.0) throw ConfigError("invalid pause distribution");
  if (!(overlap_mean > 0.0)) throw ConfigError("overlap mean must be positive");
  if (!(turn_median > 0.0) || turn_sigma < 0.0) throw ConfigError("invalid turn distribution");
  if (min_turn < 0.0) throw ConfigError("min_turn must be non-negative");
}

std::vector<ScheduledTurn> SampleConversation(const OverlapStats& stats,
                                              int speakers, double duration,
                                              std::uint64_t seed) {
  stats.Validate();
  if (speakers < 1) throw ConfigError("a conversation needs at least one speaker");
  std::mt19937_64 rng(seed);
  std::lognormal_distribution<double> pause(std::log(stats.pause_median), stats.pause_sigma);
  std::lognormal_distribution<double> turn_length(std::log(stats.turn_median), stats.turn_sigma);
  std::exponential_distribution<double> overlap(1.0 / stats.overlap_mean);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<ScheduledTurn> turns;
  int previous = -1;
  double frontier = 0.0;    // end of the latest turn
  double solo_from = 0.0;   // from here on only the latest turn is active
  while (true) {
    int speaker = 0;
    if (speakers > 1) {
      speaker = std::uniform_int_distribution<int>(0, speakers - 2)(rng);
      if (previous >= 0 && speaker >= previous) ++speaker;
    }
    const double length = std::max(stats.min_turn, turn_length(rng));
    const bool overlapped = unit(rng) < stats.p_overlap;
    const double amount = overlap(rng);
    const double gap = pause(rng);

    double start = 0.0;
    if (turns.empty()) {
      start = gap;
    } else if (overlapped && speakers > 1) {
      start = frontier - std::min({amount, frontier - solo_from, length});
    } else {
      start = frontier + gap;
    }
    if (start >= duration) break;
    ScheduledTurn t{speaker, start, std::min(length, duration - start)};
    solo_from = std::max(frontier, start);
    frontier = std::max(frontier, t.end());
    turns.push_back(t);
    previous = speaker;
    if (t.end() >= duration) break;
  }
  return turns;
}

namespace {

std::vector<std::pair<double, int>> Events(const std::vector<ScheduledTurn>& turns) {
  std::vector<std::pair<double, int>> events;
  for (const auto& t : turns) {
    events.emplace_back(t.start, +1);
    events.emplace_back(t.end(), -1);
  }
  // Ends before starts at equal times.
  std::sort(events.begin(), events.end());
  return events;
}

}  // namespace

double OverlappedTime(const std::vector<ScheduledTurn>& turns) {
  double total = 0.0, last = 0.0;
  int active = 0;
  for (const auto& [time, delta] : Events(turns)) {
    if (active >= 2) total += time - last;
    active += delta;
    last = time;
  }
  return total;
}

int MaxConcurrency(const std::vector<ScheduledTurn>& turns) {
  int active = 0, peak = 0;
  for (const auto& [time, delta] : Events(turns)) {
    active += delta;
    peak = std::max(peak, active);
  }
  return peak;
}

}  // namespace farfield::simulate
