#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "farfield/core/segmentation.h"

namespace farfield::metrics {

struct DerBreakdown {
  double missed = 0.0;       // seconds
  double false_alarm = 0.0;  // seconds
  double confusion = 0.0;    // seconds
  double total_ref = 0.0;    // seconds of reference speech (per speaker)
  double der = 0.0;
  std::map<std::string, std::string> mapping;  // reference -> hypothesis
};

// Overlap-aware diarization error rate with an optimal one-to-one speaker
// mapping. Regions within `collar` seconds of any reference boundary are not
// scored. Throws DataError when the scored reference is empty.
DerBreakdown ComputeDer(const Segmentation& ref, const Segmentation& hyp,
                        double collar = 0.0);

// Fraction of (reference, hypothesis) count pairs that agree exactly.
double SpeakerCountAccuracy(const std::vector<std::pair<int, int>>& pairs);

}  // namespace farfield::metrics
