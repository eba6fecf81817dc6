#pragma once

#include <map>
#include <string>
#include <vector>

#include "farfield/core/segmentation.h"

namespace farfield::fusion {

struct FusionInput {
  std::vector<Segmentation> hypotheses;
  std::vector<double> weights;  // empty means uniform
};

// Hypotheses relabeled into one label space. Labels are listed in creation
// order, which is also the voting tie-break order.
struct LabelMapping {
  std::vector<Segmentation> mapped;  // same order as the input
  std::vector<std::map<std::string, std::string>> renames;  // original -> label
  std::vector<std::string> labels;
  std::size_t anchor = 0;
};

// Hypotheses are visited by descending weight (then descending speech time,
// then input order); the first one anchors the label space. Each later
// hypothesis is matched to the existing labels by a maximum-overlap
// assignment; speakers left unmatched or matched with zero overlap get new
// labels.
LabelMapping MapLabels(const FusionInput& input);

// Overlap-aware weighted voting. Per region between consecutive boundaries,
// the speaker count is the weighted mean of hypothesis counts rounded half
// up, and that many labels with the highest accrued weight are kept.
Segmentation DoverlapFuse(const FusionInput& input);

// Voting step on already-mapped hypotheses.
Segmentation VoteMapped(const std::vector<Segmentation>& mapped,
                        const std::vector<double>& weights,
                        const std::vector<std::string>& labels,
                        const std::string& session_id);

// Total time both turn lists are active (each list merged per speaker first).
double OverlapDuration(const std::vector<Turn>& a, const std::vector<Turn>& b);

}  // namespace farfield::fusion
