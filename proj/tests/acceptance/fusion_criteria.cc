// DOVER-Lap, permutation search and segment-boundary criteria.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include <fmt/format.h>

#include "acceptance.h"
#include "farfield/fusion/doverlap.h"
#include "farfield/fusion/segment_ops.h"
#include "farfield/fusion/soft_fusion.h"

namespace {

using namespace farfield;

// ---- exhaustive DOVER-Lap reference -------------------------------------

double Covered(const std::vector<std::pair<double, double>>& a,
               const std::vector<std::pair<double, double>>& b) {
  // Sample-free exact overlap of two interval unions via elementary cells.
  std::vector<double> cuts;
  for (const auto& [s, e] : a) cuts.insert(cuts.end(), {s, e});
  for (const auto& [s, e] : b) cuts.insert(cuts.end(), {s, e});
  std::sort(cuts.begin(), cuts.end());
  auto in = [](const std::vector<std::pair<double, double>>& v, double x) {
    return std::any_of(v.begin(), v.end(), [x](const auto& p) { return p.first < x && x < p.second; });
  };
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
    if (cuts[i + 1] > cuts[i] && in(a, mid) && in(b, mid)) acc += cuts[i + 1] - cuts[i];
  }
  return acc;
}

using Intervals = std::vector<std::pair<double, double>>;

Intervals IntervalsOf(const Segmentation& seg, const std::string& spk) {
  Intervals out;
  for (const auto& t : seg.turns) {
    if (t.speaker == spk) out.emplace_back(t.start, t.end);
  }
  return out;
}

double Speech(const Segmentation& seg) {
  double acc = 0.0;
  for (const auto& spk : seg.Speakers()) {
    const Intervals v = IntervalsOf(seg, spk);
    acc += Covered(v, v);
  }
  return acc;
}

// All injective partial maps from `n` speakers to `m` labels maximizing the
// summed gain; zero-gain pairs count as unmatched.
std::vector<std::vector<int>> OptimalMaps(const std::vector<std::vector<double>>& gain, int m) {
  const int n = static_cast<int>(gain.size());
  std::vector<std::vector<int>> best;
  double best_value = -1.0;
  std::vector<int> cur(n, -1);
  std::vector<char> used(m, 0);
  std::function<void(int, double)> rec = [&](int i, double value) {
    if (i == n) {
      std::vector<int> clean = cur;
      for (int s = 0; s < n; ++s) {
        if (clean[s] >= 0 && gain[s][clean[s]] <= 0.0) clean[s] = -1;
      }
      if (value > best_value + 1e-9) {
        best_value = value;
        best.clear();
      }
      if (std::abs(value - best_value) <= 1e-9 &&
          std::find(best.begin(), best.end(), clean) == best.end()) {
        best.push_back(clean);
      }
      return;
    }
    cur[i] = -1;
    rec(i + 1, value);
    for (int l = 0; l < m; ++l) {
      if (used[l]) continue;
      used[l] = 1;
      cur[i] = l;
      rec(i + 1, value + gain[i][l]);
      used[l] = 0;
    }
    cur[i] = -1;
  };
  rec(0, 0.0);
  return best;
}

// Label identity is irrelevant for equality: labels are compared through the
// set of intervals they own.
std::multiset<std::vector<std::pair<double, double>>> Canonical(const Segmentation& seg) {
  std::multiset<std::vector<std::pair<double, double>>> out;
  const Segmentation n = seg.Normalized();
  for (const auto& spk : n.Speakers()) {
    auto v = IntervalsOf(n, spk);
    std::sort(v.begin(), v.end());
    for (auto& [s, e] : v) {
      s = std::round(s * 1e9) / 1e9;
      e = std::round(e * 1e9) / 1e9;
    }
    out.insert(v);
  }
  return out;
}

Segmentation Vote(const std::vector<Segmentation>& mapped, const std::vector<double>& w,
                  const std::vector<std::string>& labels) {
  std::vector<double> cuts;
  for (const auto& seg : mapped) {
    for (const auto& t : seg.turns) cuts.insert(cuts.end(), {t.start, t.end});
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  Segmentation out;
  for (std::size_t r = 0; r + 1 < cuts.size(); ++r) {
    const double mid = 0.5 * (cuts[r] + cuts[r + 1]);
    std::vector<double> acc(labels.size(), 0.0);
    double wc = 0.0;
    for (std::size_t h = 0; h < mapped.size(); ++h) {
      for (std::size_t l = 0; l < labels.size(); ++l) {
        const auto v = IntervalsOf(mapped[h], labels[l]);
        if (std::any_of(v.begin(), v.end(), [&](const auto& p) { return p.first < mid && mid < p.second; })) {
          acc[l] += w[h];
          wc += w[h];
        }
      }
    }
    // Round half up.
    const int k = static_cast<int>(std::floor(wc / total + 0.5 + 1e-9));
    std::vector<int> idx(labels.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return acc[a] > acc[b]; });
    for (int i = 0; i < k; ++i) {
      if (acc[idx[i]] > 0.0) out.turns.push_back({labels[idx[i]], cuts[r], cuts[r + 1]});
    }
  }
  return out.Normalized();
}

// Every fused output reachable under some optimal mapping sequence.
std::vector<Segmentation> ExhaustiveFuse(const std::vector<Segmentation>& hyps,
                                         const std::vector<double>& w) {
  std::vector<double> speech;
  for (const auto& h : hyps) speech.push_back(Speech(h));
  std::vector<int> order(hyps.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (w[a] != w[b]) return w[a] > w[b];
    return speech[a] > speech[b];
  });

  struct State {
    std::vector<std::string> labels;
    std::vector<Intervals> label_turns;
    std::vector<Segmentation> mapped;
  };
  std::vector<State> states{State{{}, {}, std::vector<Segmentation>(hyps.size())}};
  for (int h : order) {
    std::vector<State> next;
    const auto speakers = hyps[h].Speakers();
    for (const State& st : states) {
      std::vector<std::vector<double>> gain(speakers.size(),
                                            std::vector<double>(st.labels.size()));
      for (std::size_t s = 0; s < speakers.size(); ++s) {
        for (std::size_t l = 0; l < st.labels.size(); ++l) {
          gain[s][l] = Covered(IntervalsOf(hyps[h], speakers[s]), st.label_turns[l]);
        }
      }
      for (const auto& map : OptimalMaps(gain, static_cast<int>(st.labels.size()))) {
        State ns = st;
        std::map<std::string, std::string> rename;
        for (std::size_t s = 0; s < speakers.size(); ++s) {
          if (map[s] >= 0) {
            rename[speakers[s]] = st.labels[map[s]];
          } else {
            const std::string fresh = fmt::format("L{}", ns.labels.size());
            rename[speakers[s]] = fresh;
            ns.labels.push_back(fresh);
            ns.label_turns.push_back(IntervalsOf(hyps[h], speakers[s]));
          }
        }
        Segmentation m;
        for (const auto& t : hyps[h].turns) m.turns.push_back({rename[t.speaker], t.start, t.end});
        ns.mapped[h] = m.Normalized();
        next.push_back(std::move(ns));
      }
    }
    states = std::move(next);
  }
  std::vector<Segmentation> outs;
  for (const auto& st : states) outs.push_back(Vote(st.mapped, w, st.labels));
  return outs;
}

Segmentation RandomHypothesis(std::mt19937_64& rng, const std::vector<double>& cuts) {
  static const std::vector<std::string> pool{"a", "b", "c", "d", "e"};
  std::uniform_int_distribution<int> nspk(1, 4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::string> names = pool;
  std::shuffle(names.begin(), names.end(), rng);
  names.resize(nspk(rng));
  Segmentation seg{"s", {}};
  for (const auto& name : names) {
    for (std::size_t r = 0; r + 1 < cuts.size(); ++r) {
      if (unit(rng) < 0.4) seg.turns.push_back({name, cuts[r], cuts[r + 1]});
    }
  }
  return seg.Normalized();
}

CRITERION("doverlap_oracle_equivalence") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int matched = 0, identity = 0, unanimity = 0, instances = 1000;
  for (int it = 0; it < instances; ++it) {
    const int regions = std::uniform_int_distribution<int>(1, 6)(rng);
    std::vector<double> cuts{0.0};
    for (int r = 0; r < regions; ++r) cuts.push_back(cuts.back() + 0.2 + unit(rng));
    const int nh = std::uniform_int_distribution<int>(1, 3)(rng);
    std::vector<Segmentation> hyps;
    std::vector<double> w;
    const bool equal = unit(rng) < 0.5;
    for (int h = 0; h < nh; ++h) {
      Segmentation s;
      do {
        s = RandomHypothesis(rng, cuts);
      } while (s.turns.empty());
      hyps.push_back(s);
      w.push_back(equal ? 1.0 : std::vector<double>{0.5, 1.0, 2.0}[rng() % 3]);
    }
    const Segmentation fused = fusion::DoverlapFuse({hyps, w});
    const auto canon = Canonical(fused);
    bool ok = false;
    for (const auto& ref : ExhaustiveFuse(hyps, w)) {
      if (Canonical(ref) == canon) ok = true;
    }
    matched += ok;

    const Segmentation single = fusion::DoverlapFuse({{hyps[0]}, {w[0]}});
    identity += single.Normalized().turns == hyps[0].Normalized().turns;
    const Segmentation same =
        fusion::DoverlapFuse({{hyps[0], hyps[0], hyps[0]}, {w[0], 2.0 * w[0], 0.5 * w[0]}});
    unanimity += same.Normalized().turns == hyps[0].Normalized().turns;
  }
  const bool pass = matched == instances && identity == instances && unanimity == instances;
  return {pass, fmt::format("oracle match {}/{}, identity {}/{}, unanimity {}/{}", matched,
                            instances, identity, instances, unanimity, instances)};
}

// ---- best permutation ----------------------------------------------------

CRITERION("best_permutation_brute_force") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int agree = 0;
  const int trials = 1000;
  for (int it = 0; it < trials; ++it) {
    const int na = std::uniform_int_distribution<int>(1, 6)(rng);
    const int nb = std::uniform_int_distribution<int>(1, 6)(rng);
    const int frames = std::uniform_int_distribution<int>(5, 60)(rng);
    fusion::SoftActivity a, b;
    a.probs.resize(na, frames);
    b.probs.resize(nb, frames);
    for (Eigen::Index i = 0; i < a.probs.size(); ++i) a.probs(i) = unit(rng);
    for (Eigen::Index i = 0; i < b.probs.size(); ++i) b.probs(i) = unit(rng);
    const auto perm = fusion::BestPermutation(a, b);

    const int n = std::max(na, nb);
    auto corr = [&](int i, int j) {
      if (i >= na || j >= nb) return 0.0;
      return fusion::PearsonCorrelation(a.probs.row(i), b.probs.row(j));
    };
    std::vector<int> p(n);
    std::iota(p.begin(), p.end(), 0);
    double best = -1e18;
    std::vector<int> best_perm;
    do {
      double v = 0.0;
      for (int i = 0; i < n; ++i) v += corr(i, p[i]);
      if (v > best + 1e-12) {
        best = v;
        best_perm = p;
      }
    } while (std::next_permutation(p.begin(), p.end()));
    double got = 0.0;
    bool valid = static_cast<int>(perm.size()) == n;
    std::vector<int> seen = perm;
    std::sort(seen.begin(), seen.end());
    for (int i = 0; valid && i < n; ++i) valid = seen[i] == i;
    for (int i = 0; valid && i < n; ++i) got += corr(i, perm[i]);
    // Padded rows have zero correlation with everything, so only the real
    // pairs of the permutation are compared.
    bool same = valid && std::abs(got - best) <= 1e-9;
    for (int i = 0; same && i < na; ++i) {
      if (best_perm[i] < nb && perm[i] != best_perm[i]) same = false;
    }
    agree += same;
  }
  return {agree == trials, fmt::format("{}/{} random pairs agree with brute force", agree, trials)};
}

// ---- bounds erosion / extension -------------------------------------------

CRITERION("erosion_extension_inverse") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double m = 0.5;
  int inverse_ok = 0, drop_ok = 0, trials = 500;
  for (int it = 0; it < trials; ++it) {
    Segmentation seg{"s", {}};
    double t = 1.0 + unit(rng);
    for (int k = 0; k < 8; ++k) {
      const double len = 0.2 + 3.0 * unit(rng);
      seg.turns.push_back({k % 2 ? "A" : "B", t, t + len});
      t += len + 0.1 + 2.0 * unit(rng);
    }
    const double end = t + 5.0;
    const Segmentation eroded = fusion::ErodeBounds(seg, m);
    const Segmentation back = fusion::ExtendSegments(eroded, m, end);
    // Survivors are exactly the turns longer than 2m; they come back intact.
    std::vector<Turn> expect;
    for (const auto& x : seg.turns) {
      if (x.end - x.start > 2 * m) expect.push_back(x);
    }
    bool same = back.turns.size() == expect.size();
    for (std::size_t i = 0; same && i < expect.size(); ++i) {
      same = back.turns[i].speaker == expect[i].speaker &&
             std::abs(back.turns[i].start - expect[i].start) < 1e-12 &&
             std::abs(back.turns[i].end - expect[i].end) < 1e-12;
    }
    inverse_ok += same;
    bool dropped = true;
    for (const auto& x : eroded.turns) dropped = dropped && x.end - x.start > 0.0;
    dropped = dropped && eroded.turns.size() == expect.size();
    drop_ok += dropped;
  }
  const Segmentation paper = fusion::ErodeBounds({"s", {{"A", 1.0, 3.0}, {"A", 5.0, 5.8}}}, m);
  const bool example = paper.turns.size() == 1 && std::abs(paper.turns[0].start - 1.5) < 1e-12 &&
                       std::abs(paper.turns[0].end - 2.5) < 1e-12;
  return {inverse_ok == trials && drop_ok == trials && example,
          fmt::format("erode/extend inverse {}/{}, short-turn drop {}/{}, [1,3]->[1.5,2.5] {}",
                      inverse_ok, trials, drop_ok, trials, example ? "ok" : "wrong")};
}

}  // namespace
