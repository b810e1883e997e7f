// pseudolabel/kmeans.cc
//
// Copyright 2026  spkpt authors

// See ../../COPYING for clarification regarding multiple authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "pseudolabel/kmeans.h"

#include <algorithm>
#include <limits>
#include <numeric>

#include "base/error.h"
#include "base/io.h"
#include "base/rng.h"

namespace spkpt {

namespace {

double SquaredDistance(const Mat& a, Eigen::Index i, const Mat& b, Eigen::Index j) {
  double s = 0.0;
  for (Eigen::Index d = 0; d < a.cols(); ++d) {
    const double diff = a(i, d) - b(j, d);
    s += diff * diff;
  }
  return s;
}

// Nearest center index and distance for every row.
double AssignAll(const Mat& centers, const Mat& x, std::vector<int>* assign,
                 std::vector<double>* dist) {
  const Eigen::Index n = x.rows();
  assign->resize(static_cast<size_t>(n));
  dist->resize(static_cast<size_t>(n));
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    int best = 0;
    double best_d = SquaredDistance(x, i, centers, 0);
    for (Eigen::Index c = 1; c < centers.rows(); ++c) {
      const double d = SquaredDistance(x, i, centers, c);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    (*assign)[i] = best;
    (*dist)[i] = best_d;
    total += best_d;
  }
  return total;
}

Mat KmeansPlusPlus(const Mat& x, int k, Rng* rng) {
  const Eigen::Index n = x.rows();
  Mat centers(k, x.cols());
  centers.row(0) = x.row(rng->UniformInt(0, n - 1));
  std::vector<double> d2(static_cast<size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) d2[i] = SquaredDistance(x, i, centers, 0);
  for (int c = 1; c < k; ++c) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    Eigen::Index pick = n - 1;
    if (total > 0.0) {
      const double r = rng->Uniform() * total;
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2[i];
        if (r < acc && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
      // Rounding can leave r == total; fall back to the last positive weight.
      if (d2[pick] == 0.0)
        for (Eigen::Index i = n - 1; i >= 0; --i)
          if (d2[i] > 0.0) {
            pick = i;
            break;
          }
    } else {
      pick = rng->UniformInt(0, n - 1);
    }
    centers.row(c) = x.row(pick);
    for (Eigen::Index i = 0; i < n; ++i)
      d2[i] = std::min(d2[i], SquaredDistance(x, i, centers, c));
  }
  return centers;
}

// Single-point transfers from a Lloyd fixpoint: a point moves from cluster a
// to b when n_b/(n_b+1)|x-m_b|^2 < n_a/(n_a-1)|x-m_a|^2. Each sweep visits
// rows in order and updates the two means in place.
void TransferRefine(const Mat& x, int k, int max_sweeps, KmeansModel* model) {
  std::vector<int> assign;
  std::vector<double> dist;
  AssignAll(model->centers, x, &assign, &dist);
  Mat means = Mat::Zero(k, x.cols());
  std::vector<int> counts(static_cast<size_t>(k), 0);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    means.row(assign[i]) += x.row(i);
    ++counts[assign[i]];
  }
  for (int c = 0; c < k; ++c)
    if (counts[c] > 0) means.row(c) /= counts[c];
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool moved = false;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const int a = assign[i];
      if (counts[a] < 2) continue;
      const double leave = counts[a] / (counts[a] - 1.0) * SquaredDistance(x, i, means, a);
      int target = a;
      double best = leave;
      for (int b = 0; b < k; ++b) {
        if (b == a) continue;
        const double join = counts[b] / (counts[b] + 1.0) * SquaredDistance(x, i, means, b);
        if (join < best) {
          best = join;
          target = b;
        }
      }
      if (target == a || best >= leave * (1.0 - 1e-12)) continue;
      means.row(a) = (means.row(a) * counts[a] - x.row(i)) / (counts[a] - 1.0);
      means.row(target) = (means.row(target) * counts[target] + x.row(i)) / (counts[target] + 1.0);
      --counts[a];
      ++counts[target];
      assign[i] = target;
      moved = true;
    }
    if (!moved) break;
    // Exact means from the final assignment.
    means.setZero();
    for (Eigen::Index i = 0; i < x.rows(); ++i) means.row(assign[i]) += x.row(i);
    for (int c = 0; c < k; ++c) means.row(c) /= counts[c];
    const double inertia = AssignAll(means, x, &assign, &dist);
    if (inertia >= model->inertia) break;
    model->centers = means;
    model->inertia = inertia;
    model->inertia_history.push_back(inertia);
    model->iterations_run += 1;
    means.setZero();
    std::fill(counts.begin(), counts.end(), 0);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      means.row(assign[i]) += x.row(i);
      ++counts[assign[i]];
    }
    if (std::find(counts.begin(), counts.end(), 0) != counts.end()) break;
    for (int c = 0; c < k; ++c) means.row(c) /= counts[c];
  }
}

KmeansModel FitOnce(const Mat& x, int k, int max_iters, bool refine, uint64_t seed) {
  Rng rng(seed);
  KmeansModel model;
  model.seed = seed;
  model.centers = KmeansPlusPlus(x, k, &rng);
  std::vector<int> assign, prev;
  std::vector<double> dist;
  for (int it = 0; it < max_iters; ++it) {
    const double inertia = AssignAll(model.centers, x, &assign, &dist);
    if (!model.inertia_history.empty() &&
        inertia > model.inertia_history.back() * (1.0 + 1e-12))
      Fail("k-means inertia increased at iteration {} ({} > {})", it, inertia,
           model.inertia_history.back());
    model.inertia_history.push_back(inertia);
    model.inertia = inertia;
    model.iterations_run = it + 1;
    if (assign == prev || it + 1 == max_iters) break;
    prev = assign;

    Mat sums = Mat::Zero(k, x.cols());
    std::vector<int> counts(static_cast<size_t>(k), 0);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      sums.row(assign[i]) += x.row(i);
      ++counts[assign[i]];
    }
    std::vector<bool> taken(static_cast<size_t>(x.rows()), false);
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        model.centers.row(c) = sums.row(c) / counts[c];
        continue;
      }
      // Empty cluster: move it onto the point farthest from its center.
      Eigen::Index far = -1;
      for (Eigen::Index i = 0; i < x.rows(); ++i)
        if (!taken[i] && (far < 0 || dist[i] > dist[far])) far = i;
      taken[far] = true;
      model.centers.row(c) = x.row(far);
    }
  }
  if (refine) TransferRefine(x, k, max_iters, &model);
  return model;
}

}  // namespace

KmeansModel KmeansFit(const Mat& frames, int k, uint64_t seed, const KmeansOptions& opts) {
  if (k < 1) Fail("k-means: k must be >= 1, got {}", k);
  if (frames.cols() < 1) Fail("k-means: feature dimension must be >= 1");
  if (frames.rows() < k) Fail("k-means: {} points cannot form {} clusters", frames.rows(), k);
  if (!frames.allFinite()) Fail("k-means: input contains non-finite values");
  if (opts.max_iters < 1 || opts.restarts < 1) Fail("k-means: max_iters and restarts must be >= 1");

  const Mat* x = &frames;
  Mat subset;
  if (static_cast<size_t>(frames.rows()) > opts.max_frames) {
    if (opts.max_frames < static_cast<size_t>(k))
      Fail("k-means: frame cap {} is below k={}", opts.max_frames, k);
    Rng rng(DeriveSeed(seed, 0x5ab5));
    std::vector<Eigen::Index> idx(static_cast<size_t>(frames.rows()));
    std::iota(idx.begin(), idx.end(), 0);
    for (size_t i = 0; i < opts.max_frames; ++i)
      std::swap(idx[i], idx[static_cast<size_t>(rng.UniformInt(
                            static_cast<int64_t>(i), static_cast<int64_t>(idx.size() - 1)))]);
    idx.resize(opts.max_frames);
    std::sort(idx.begin(), idx.end());
    subset.resize(static_cast<Eigen::Index>(idx.size()), frames.cols());
    for (size_t i = 0; i < idx.size(); ++i) subset.row(static_cast<Eigen::Index>(i)) = frames.row(idx[i]);
    x = &subset;
  }

  KmeansModel best;
  for (int r = 0; r < opts.restarts; ++r) {
    KmeansModel m = FitOnce(*x, k, opts.max_iters, opts.transfer_refine, DeriveSeed(seed, static_cast<uint64_t>(r)));
    if (r == 0 || m.inertia < best.inertia) best = std::move(m);
  }
  best.seed = seed;
  return best;
}

std::vector<int> AssignRows(const KmeansModel& model, const Mat& rows) {
  if (rows.cols() != model.centers.cols())
    Fail("assign: feature dim {} does not match center dim {}", rows.cols(),
         model.centers.cols());
  std::vector<int> assign;
  std::vector<double> dist;
  AssignAll(model.centers, rows, &assign, &dist);
  return assign;
}

PseudoLabelSequence Assign(const KmeansModel& model, const FeatureSequence& feats,
                           const std::string& source) {
  PseudoLabelSequence seq;
  seq.utterance_id = feats.id;
  seq.k = model.k();
  seq.source = source;
  seq.provenance = feats.from_mixed_audio ? "mixed" : "clean";
  seq.labels = AssignRows(model, feats.frames);
  return seq;
}

double Inertia(const Mat& centers, const Mat& rows) {
  std::vector<int> assign;
  std::vector<double> dist;
  return AssignAll(centers, rows, &assign, &dist);
}

void WriteKmeansModel(const std::filesystem::path& path, const KmeansModel& model) {
  const Json header = {{"k", model.k()},
                       {"D", model.dim()},
                       {"seed", model.seed},
                       {"inertia", model.inertia},
                       {"iterations_run", model.iterations_run}};
  std::string bytes = header.dump() + "\n";
  std::vector<float> values(static_cast<size_t>(model.centers.size()));
  for (Eigen::Index i = 0; i < model.centers.size(); ++i)
    values[i] = static_cast<float>(model.centers.data()[i]);
  AppendF32LE(&bytes, values);
  WriteTextFile(path, bytes);
}

KmeansModel ReadKmeansModel(const std::filesystem::path& path) {
  const std::string bytes = ReadTextFile(path);
  const size_t nl = bytes.find('\n');
  if (nl == std::string::npos) Fail("k-means model '{}' has no header line", path.string());
  Json header;
  try {
    header = Json::parse(bytes.substr(0, nl));
  } catch (const Json::parse_error& e) {
    Fail("k-means model '{}': bad header: {}", path.string(), e.what());
  }
  KmeansModel m;
  const int k = header.at("k").get<int>();
  const int D = header.at("D").get<int>();
  m.seed = header.at("seed").get<uint64_t>();
  m.inertia = header.at("inertia").get<double>();
  m.iterations_run = header.value("iterations_run", 0);
  const auto values = DecodeF32LE(std::string_view(bytes).substr(nl + 1));
  if (values.size() != static_cast<size_t>(k) * static_cast<size_t>(D))
    Fail("k-means model '{}': expected {}x{} centers, found {} values", path.string(), k, D,
         values.size());
  m.centers.resize(k, D);
  for (size_t i = 0; i < values.size(); ++i) m.centers.data()[i] = values[i];
  return m;
}

}  // namespace spkpt
