#include "farfield/metrics/der.h"

#include <algorithm>
#include <cmath>

#include "farfield/core/assignment.h"
#include "farfield/core/errors.h"

namespace farfield::metrics {
namespace {

struct Region {
  double start;
  double end;
  std::vector<int> ref;  // active reference speaker indices
  std::vector<int> hyp;
};

std::vector<int> ActiveAt(const Segmentation& seg,
                          const std::vector<std::string>& speakers, double t) {
  std::vector<int> out;
  for (const auto& turn : seg.turns) {
    if (turn.start <= t && t < turn.end) {
      const auto idx = static_cast<int>(
          std::lower_bound(speakers.begin(), speakers.end(), turn.speaker) -
          speakers.begin());
      out.push_back(idx);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

DerBreakdown ComputeDer(const Segmentation& ref, const Segmentation& hyp,
                        double collar) {
  if (collar < 0.0) throw ConfigError("collar must be >= 0");
  const std::vector<std::string> ref_spk = ref.Speakers();
  const std::vector<std::string> hyp_spk = hyp.Speakers();

  std::vector<double> bounds;
  std::vector<std::pair<double, double>> excluded;
  for (const auto& t : ref.turns) {
    for (double b : {t.start, t.end}) {
      bounds.push_back(b);
      if (collar > 0.0) {
        excluded.emplace_back(b - collar, b + collar);
        bounds.push_back(b - collar);
        bounds.push_back(b + collar);
      }
    }
  }
  for (const auto& t : hyp.turns) {
    bounds.push_back(t.start);
    bounds.push_back(t.end);
  }
  std::sort(bounds.begin(), bounds.end());
  bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());

  std::vector<Region> regions;
  Eigen::MatrixXd co = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ref_spk.size()),
                                             static_cast<Eigen::Index>(hyp_spk.size()));
  for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
    const double lo = bounds[i], hi = bounds[i + 1];
    const double mid = 0.5 * (lo + hi);
    const bool skip = std::any_of(excluded.begin(), excluded.end(), [&](auto& e) {
      return e.first < mid && mid < e.second;
    });
    if (skip) continue;
    Region r{lo, hi, ActiveAt(ref, ref_spk, mid), ActiveAt(hyp, hyp_spk, mid)};
    if (r.ref.empty() && r.hyp.empty()) continue;
    for (int a : r.ref) {
      for (int b : r.hyp) co(a, b) += hi - lo;
    }
    regions.push_back(std::move(r));
  }

  const std::vector<int> match = MaxWeightAssignment(co);
  DerBreakdown out;
  for (std::size_t a = 0; a < ref_spk.size(); ++a) {
    if (match[a] >= 0) out.mapping[ref_spk[a]] = hyp_spk[match[a]];
  }
  for (const auto& r : regions) {
    const double dur = r.end - r.start;
    const auto nr = static_cast<double>(r.ref.size());
    const auto nh = static_cast<double>(r.hyp.size());
    double correct = 0.0;
    for (int a : r.ref) {
      if (match[a] >= 0 && std::binary_search(r.hyp.begin(), r.hyp.end(), match[a])) {
        correct += 1.0;
      }
    }
    out.total_ref += nr * dur;
    out.missed += std::max(0.0, nr - nh) * dur;
    out.false_alarm += std::max(0.0, nh - nr) * dur;
    out.confusion += (std::min(nr, nh) - correct) * dur;
  }
  if (out.total_ref <= 0.0) {
    throw DataError("DER is undefined: reference has no scored speech");
  }
  out.der = (out.missed + out.false_alarm + out.confusion) / out.total_ref;
  return out;
}

double SpeakerCountAccuracy(const std::vector<std::pair<int, int>>& pairs) {
  if (pairs.empty()) throw DataError("speaker_count_accuracy: no sessions");
  const auto hits = std::count_if(pairs.begin(), pairs.end(),
                                  [](const auto& p) { return p.first == p.second; });
  return static_cast<double>(hits) / static_cast<double>(pairs.size());
}

}  // namespace farfield::metrics
