#include "farfield/fusion/doverlap.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "farfield/core/assignment.h"
#include "farfield/core/errors.h"

namespace farfield::fusion {
namespace {

std::vector<Turn> TurnsOf(const Segmentation& seg, const std::string& speaker) {
  std::vector<Turn> out;
  for (const auto& t : seg.turns) {
    if (t.speaker == speaker) out.push_back(t);
  }
  return out;
}

double SpeechTime(const Segmentation& seg) {
  double acc = 0.0;
  for (const auto& t : seg.Normalized().turns) acc += t.duration();
  return acc;
}

std::vector<double> ResolveWeights(const FusionInput& input) {
  if (input.hypotheses.empty()) throw DataError("fusion: no hypotheses");
  if (input.weights.empty()) {
    return std::vector<double>(input.hypotheses.size(), 1.0);
  }
  if (input.weights.size() != input.hypotheses.size()) {
    throw ConfigError("fusion: weight count does not match hypotheses");
  }
  for (double w : input.weights) {
    if (!(w > 0.0)) throw ConfigError("fusion: weights must be positive");
  }
  return input.weights;
}

}  // namespace

double OverlapDuration(const std::vector<Turn>& a, const std::vector<Turn>& b) {
  Segmentation sa{"", a}, sb{"", b};
  for (auto& t : sa.turns) t.speaker = "x";
  for (auto& t : sb.turns) t.speaker = "x";
  const auto ma = sa.Normalized().turns;
  const auto mb = sb.Normalized().turns;
  double acc = 0.0;
  std::size_t i = 0, j = 0;
  while (i < ma.size() && j < mb.size()) {
    const double lo = std::max(ma[i].start, mb[j].start);
    const double hi = std::min(ma[i].end, mb[j].end);
    if (hi > lo) acc += hi - lo;
    if (ma[i].end < mb[j].end) {
      ++i;
    } else {
      ++j;
    }
  }
  return acc;
}

LabelMapping MapLabels(const FusionInput& input) {
  const std::vector<double> weights = ResolveWeights(input);
  const auto& hyps = input.hypotheses;
  std::vector<double> speech(hyps.size());
  for (std::size_t h = 0; h < hyps.size(); ++h) speech[h] = SpeechTime(hyps[h]);
  std::vector<std::size_t> order(hyps.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (weights[a] != weights[b]) return weights[a] > weights[b];
    return speech[a] > speech[b];
  });

  LabelMapping result;
  result.anchor = order.front();
  result.mapped.resize(hyps.size());
  result.renames.resize(hyps.size());
  // Activity that defines each label: the turns of the speaker that created it.
  std::vector<std::vector<Turn>> label_turns;
  std::set<std::string> taken;

  for (std::size_t h : order) {
    const Segmentation& hyp = hyps[h];
    const std::vector<std::string> speakers = hyp.Speakers();
    std::map<std::string, std::string> rename;
    if (!result.labels.empty() && !speakers.empty()) {
      Eigen::MatrixXd gain(speakers.size(), result.labels.size());
      for (std::size_t s = 0; s < speakers.size(); ++s) {
        const auto mine = TurnsOf(hyp, speakers[s]);
        for (std::size_t l = 0; l < result.labels.size(); ++l) {
          gain(s, l) = OverlapDuration(mine, label_turns[l]);
        }
      }
      const std::vector<int> match = MaxWeightAssignment(gain);
      for (std::size_t s = 0; s < speakers.size(); ++s) {
        if (match[s] >= 0 && gain(s, match[s]) > 0.0) {
          rename[speakers[s]] = result.labels[match[s]];
        }
      }
    }
    for (const auto& spk : speakers) {
      if (rename.count(spk)) continue;
      std::string name = spk;
      for (int suffix = 1; taken.count(name); ++suffix) {
        name = spk + "_" + std::to_string(h) + (suffix > 1 ? "_" + std::to_string(suffix) : "");
      }
      taken.insert(name);
      rename[spk] = name;
      result.labels.push_back(name);
      label_turns.push_back(TurnsOf(hyp, spk));
    }
    Segmentation mapped{hyp.session_id, {}};
    for (const auto& t : hyp.turns) mapped.turns.push_back({rename[t.speaker], t.start, t.end});
    result.mapped[h] = mapped.Normalized();
    result.renames[h] = std::move(rename);
  }
  return result;
}

Segmentation VoteMapped(const std::vector<Segmentation>& mapped,
                        const std::vector<double>& weights,
                        const std::vector<std::string>& labels,
                        const std::string& session_id) {
  std::vector<double> bounds;
  for (const auto& seg : mapped) {
    for (const auto& t : seg.turns) {
      bounds.push_back(t.start);
      bounds.push_back(t.end);
    }
  }
  std::sort(bounds.begin(), bounds.end());
  bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());

  std::map<std::string, std::size_t> index;
  for (std::size_t l = 0; l < labels.size(); ++l) index[labels[l]] = l;
  const double total_weight = std::accumulate(weights.begin(), weights.end(), 0.0);

  // Per hypothesis, turns sorted by start for a forward sweep over regions.
  std::vector<std::vector<Turn>> sorted(mapped.size());
  for (std::size_t h = 0; h < mapped.size(); ++h) {
    sorted[h] = mapped[h].turns;
    std::sort(sorted[h].begin(), sorted[h].end(),
              [](const Turn& a, const Turn& b) { return a.start < b.start; });
  }

  Segmentation out{session_id, {}};
  std::vector<std::ptrdiff_t> open(labels.size(), -1);  // index of open turn
  std::vector<double> accrued(labels.size());
  for (std::size_t r = 0; r + 1 < bounds.size(); ++r) {
    const double lo = bounds[r], hi = bounds[r + 1];
    std::fill(accrued.begin(), accrued.end(), 0.0);
    double weighted_count = 0.0;
    for (std::size_t h = 0; h < mapped.size(); ++h) {
      int count = 0;
      for (const auto& t : sorted[h]) {
        if (t.start > lo) break;
        if (t.end > lo && t.start < hi) {
          accrued[index.at(t.speaker)] += weights[h];
          ++count;
        }
      }
      weighted_count += weights[h] * count;
    }
    const auto k = static_cast<std::size_t>(
        std::floor(weighted_count / total_weight + 0.5 + 1e-9));
    std::vector<std::size_t> cand;
    for (std::size_t l = 0; l < labels.size(); ++l) {
      if (accrued[l] > 0.0) cand.push_back(l);
    }
    std::stable_sort(cand.begin(), cand.end(), [&](std::size_t a, std::size_t b) {
      return accrued[a] > accrued[b];
    });
    cand.resize(std::min(k, cand.size()));
    std::vector<char> active(labels.size(), 0);
    for (std::size_t l : cand) active[l] = 1;
    for (std::size_t l = 0; l < labels.size(); ++l) {
      if (!active[l]) {
        open[l] = -1;
        continue;
      }
      if (open[l] >= 0 && out.turns[open[l]].end == lo) {
        out.turns[open[l]].end = hi;
      } else {
        open[l] = static_cast<std::ptrdiff_t>(out.turns.size());
        out.turns.push_back({labels[l], lo, hi});
      }
    }
  }
  out.Sort();
  return out;
}

Segmentation DoverlapFuse(const FusionInput& input) {
  const std::vector<double> weights = ResolveWeights(input);
  const LabelMapping mapping = MapLabels(input);
  return VoteMapped(mapping.mapped, weights, mapping.labels,
                    input.hypotheses[mapping.anchor].session_id);
}

}  // namespace farfield::fusion
