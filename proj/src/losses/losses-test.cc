// losses/losses-test.cc
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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "base/error.h"
#include "doctest.h"

#include <cmath>
#include <set>

#include "base/rng.h"
#include "losses/losses.h"

namespace spkpt {
namespace {

Mat RandomMat(Eigen::Index r, Eigen::Index c, Rng* rng) {
  Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng->Gaussian();
  return m;
}

long double CosineLd(const RowVec& a, const RowVec& b) {
  long double dot = 0, na = 0, nb = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    dot += (long double)a(i) * b(i);
    na += (long double)a(i) * a(i);
    nb += (long double)b(i) * b(i);
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

long double SoftplusLd(long double x) { return std::log1p(std::exp(x)); }

PseudoLabelSequence Labels(std::vector<int> z, int k) {
  PseudoLabelSequence s;
  s.utterance_id = "u";
  s.labels = std::move(z);
  s.k = k;
  return s;
}

TEST_CASE("content loss on uniform logits is ln k") {
  for (int k : {2, 5, 16, 100}) {
    const Mat logits = Mat::Constant(7, k, 0.37);
    std::vector<int> z(7);
    for (int t = 0; t < 7; ++t) z[t] = t % k;
    const auto r = ContentLoss(logits, Labels(z, k), MaskSet::FromIndices({0, 3, 6}));
    CHECK(std::fabs(r.value - std::log(double(k))) < 1e-10);
    CHECK(r.count == 3);
  }
}

TEST_CASE("content loss matches a per-frame softmax-and-log oracle") {
  Rng rng(3);
  const int T = 7, k = 5;
  const Mat logits = RandomMat(T, k, &rng);
  std::vector<int> z;
  for (int t = 0; t < T; ++t) z.push_back(static_cast<int>(rng.UniformInt(0, k - 1)));
  const MaskSet mask = MaskSet::FromIndices({1, 2, 4, 6});
  long double oracle = 0;
  for (int t : mask.indices) {
    long double s = 0;
    for (int c = 0; c < k; ++c) s += std::exp((long double)logits(t, c));
    oracle += -((long double)logits(t, z[t]) - std::log(s));
  }
  oracle /= mask.size();
  const auto r = ContentLoss(logits, Labels(z, k), mask);
  CHECK(std::fabs(r.value - double(oracle)) < 1e-12);
  // Unmasked rows carry no gradient; masked rows sum to zero.
  CHECK(r.grad.row(0).cwiseAbs().sum() == 0.0);
  CHECK(std::fabs(r.grad.row(1).sum()) < 1e-15);
}

TEST_CASE("content loss with a huge margin goes to zero") {
  Mat logits = Mat::Zero(3, 4);
  for (int t = 0; t < 3; ++t) logits(t, 2) = 800.0;
  const auto r = ContentLoss(logits, Labels({2, 2, 2}, 4), MaskSet::FromIndices({0, 1, 2}));
  CHECK(r.value < 1e-300);
  CHECK(std::isfinite(r.value));
}

TEST_CASE("content loss errors") {
  const Mat logits = Mat::Zero(3, 4);
  CHECK_THROWS_AS(ContentLoss(logits, Labels({0, 1, 2}, 4), MaskSet{}), Error);
  CHECK_THROWS_AS(ContentLoss(logits, Labels({0, 1, 4}, 4), MaskSet::FromIndices({2})), Error);
}

TEST_CASE("content loss gradient matches finite differences") {
  Rng rng(4);
  const Mat logits = RandomMat(5, 4, &rng);
  const auto labels = Labels({0, 3, 1, 2, 2}, 4);
  const MaskSet mask = MaskSet::FromIndices({0, 2, 3});
  const auto r = ContentLoss(logits, labels, mask);
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    Mat up = logits, down = logits;
    up.data()[i] += 1e-5;
    down.data()[i] -= 1e-5;
    const double fd =
        (ContentLoss(up, labels, mask).value - ContentLoss(down, labels, mask).value) / 2e-5;
    CHECK(std::fabs(fd - r.grad.data()[i]) < 1e-8);
  }
}

TEST_CASE("diversity loss closed forms") {
  for (int V : {2, 7, 32}) {
    const Mat uniform = Mat::Constant(3, V, 1.0 / V);
    CHECK(std::fabs(DiversityLoss(uniform).value + std::log(double(V)) / V) < 1e-10);
    Mat onehot = Mat::Zero(3, V);
    for (int g = 0; g < 3; ++g) onehot(g, (g * 5) % V) = 1.0;
    CHECK(std::fabs(DiversityLoss(onehot).value) < 1e-10);
  }
  CHECK(std::fabs(DiversityLoss(Mat::Constant(2, 32, 1.0 / 32)).value + 0.108304) < 1e-6);
}

TEST_CASE("diversity loss matches a naive sum and finite differences") {
  Rng rng(5);
  Mat p(2, 6);
  for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = 0.1 + rng.Uniform();
  for (int g = 0; g < 2; ++g) p.row(g) /= p.row(g).sum();
  long double oracle = 0;
  for (int g = 0; g < 2; ++g)
    for (int v = 0; v < 6; ++v) oracle += (long double)p(g, v) * std::log((long double)p(g, v));
  oracle /= 12;
  const auto r = DiversityLoss(p);
  CHECK(std::fabs(r.value - double(oracle)) < 1e-12);
  // Directional check along a sum-preserving perturbation.
  Mat dir = Mat::Zero(2, 6);
  dir(0, 1) = 1.0;
  dir(0, 4) = -1.0;
  const double h = 1e-6;
  auto value = [&](const Mat& q) {
    double s = 0;
    for (Eigen::Index i = 0; i < q.size(); ++i) s += q.data()[i] * std::log(q.data()[i]);
    return s / 12;
  };
  const double fd = (value(p + h * dir) - value(p - h * dir)) / (2 * h);
  CHECK(std::fabs(fd - r.grad.cwiseProduct(dir).sum()) < 1e-8);
}

TEST_CASE("diversity loss rejects unnormalized rows") {
  CHECK_THROWS_AS(DiversityLoss(Mat::Constant(1, 4, 0.3)), Error);
}

TEST_CASE("contrastive closed forms") {
  // One positive at sim = 0, kappa = 1, K = 0.
  Mat a(1, 2), q(1, 2);
  a << 1.0, 0.0;
  q << 0.0, 1.0;
  std::vector<Mat> la{a}, qa{q};
  const auto r = ContrastiveLoss(la, qa, 1.0, 0, 1);
  CHECK(std::fabs(r.value - std::log(2.0)) < 1e-10);
  CHECK(r.terms.size() == 1);

  // One positive at sim = 1 and one negative at sim = 1.
  Mat l0(1, 2), l1(1, 2);
  l0 << 1.0, 0.0;
  l1 << 2.0, 0.0;
  std::vector<Mat> lat{l0, l1}, quant{l0, l1};
  const auto r2 = ContrastiveLoss(lat, quant, 1.0, 1, 9);
  // Both anchors contribute one positive and one negative, all at sim = 1.
  CHECK(std::fabs(r2.value - 0.5 * (0.313262 + 1.313262)) < 1e-6);
  CHECK(std::fabs(r2.value - 0.5 * (std::log1p(std::exp(-1.0)) + std::log1p(std::exp(1.0)))) <
        1e-12);
}

TEST_CASE("contrastive with a single utterance and negatives is an error") {
  Rng rng(1);
  std::vector<Mat> l{RandomMat(3, 4, &rng)}, q{RandomMat(3, 4, &rng)};
  CHECK_THROWS_AS(ContrastiveLoss(l, q, 0.1, 2, 1), Error);
  CHECK_NOTHROW(ContrastiveLoss(l, q, 0.1, 0, 1));
}

// Exhaustive enumeration: every masked step of every utterance is an anchor
// with its positive(s); the negatives are the seeded draws reported by the
// loss, checked for origin and distinctness, then re-scored here.
void CheckAgainstEnumeration(PositiveSet positives, int K, uint64_t seed) {
  Rng rng(seed);
  const int B = 3, T = 6, d = 4;
  std::vector<Mat> taps, quantized;
  std::vector<MaskSet> masks;
  for (int b = 0; b < B; ++b) {
    taps.push_back(RandomMat(T, d, &rng));
    std::vector<int> idx;
    for (int t = 0; t < T; ++t)
      if (rng.Bernoulli(0.5) || t == b) idx.push_back(t);
    masks.push_back(MaskSet::FromIndices(idx));
    quantized.push_back(RandomMat(static_cast<Eigen::Index>(masks.back().size()), d, &rng));
  }
  LossWeights w;
  w.kappa = 0.3;
  w.num_negatives = K;
  w.positives = positives;
  const auto r = ContrastiveLossFromTaps(taps, quantized, masks, w, seed + 1);

  std::vector<std::vector<std::vector<std::pair<int, int>>>> negs(B);
  for (int b = 0; b < B; ++b) negs[b].resize(masks[b].size());
  for (const auto& term : r.terms)
    if (!term.positive) negs[term.anchor_utt][term.anchor_row].push_back({term.target_utt, term.target_row});

  long double sum = 0;
  size_t count = 0;
  for (int b = 0; b < B; ++b) {
    size_t pool = 0;
    for (int o = 0; o < B; ++o)
      if (o != b) pool += masks[o].size();
    for (size_t i = 0; i < masks[b].size(); ++i) {
      const RowVec l = taps[b].row(masks[b].indices[i]);
      if (positives == PositiveSet::kSameStep) {
        sum += SoftplusLd(-CosineLd(l, quantized[b].row(static_cast<Eigen::Index>(i))) / w.kappa);
        ++count;
      } else {
        for (Eigen::Index j = 0; j < quantized[b].rows(); ++j) {
          sum += SoftplusLd(-CosineLd(l, quantized[b].row(j)) / w.kappa);
          ++count;
        }
      }
      const auto& n = negs[b][i];
      REQUIRE(n.size() == static_cast<size_t>(K));
      std::set<std::pair<int, int>> distinct(n.begin(), n.end());
      if (pool >= static_cast<size_t>(K)) CHECK(distinct.size() == n.size());
      for (const auto& [nb, ni] : n) {
        CHECK(nb != b);
        REQUIRE(ni < quantized[nb].rows());
        sum += SoftplusLd(CosineLd(l, quantized[nb].row(ni)) / w.kappa);
        ++count;
      }
    }
  }
  CHECK(r.terms.size() == count);
  CHECK(std::fabs(r.value - double(sum / count)) < 1e-12);
}

TEST_CASE("contrastive loss equals exhaustive pair enumeration (B=3, T=6)") {
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    CheckAgainstEnumeration(PositiveSet::kSameStep, 4, seed);
    CheckAgainstEnumeration(PositiveSet::kUtterance, 3, seed);
    CheckAgainstEnumeration(PositiveSet::kSameStep, 40, seed);  // with replacement
  }
}

TEST_CASE("negatives are uniform over the other utterances' masked steps") {
  Rng rng(8);
  std::vector<Mat> l, q;
  for (int b = 0; b < 3; ++b) {
    l.push_back(RandomMat(4, 3, &rng));
    q.push_back(RandomMat(4, 3, &rng));
  }
  // Anchor utterance 0 draws from 8 candidates; count hits over many seeds.
  std::vector<int> hits(8, 0);
  const int trials = 4000;
  for (int s = 0; s < trials; ++s) {
    const auto r = ContrastiveLoss(l, q, 1.0, 1, static_cast<uint64_t>(s));
    for (const auto& t : r.terms)
      if (!t.positive && t.anchor_utt == 0 && t.anchor_row == 0)
        ++hits[static_cast<size_t>((t.target_utt - 1) * 4 + t.target_row)];
  }
  // Chi-square with 7 degrees of freedom; 24.32 is the 0.001 critical value.
  double chi2 = 0;
  for (int h : hits) chi2 += (h - trials / 8.0) * (h - trials / 8.0) / (trials / 8.0);
  CHECK(chi2 < 24.32);
}

TEST_CASE("contrastive loss is invariant to positive rescaling of a latent") {
  Rng rng(11);
  std::vector<Mat> l, q;
  for (int b = 0; b < 3; ++b) {
    l.push_back(RandomMat(5, 4, &rng));
    q.push_back(RandomMat(5, 4, &rng));
  }
  const double base = ContrastiveLoss(l, q, 0.1, 6, 42).value;
  for (double c : {1e-3, 0.5, 7.0, 1e4}) {
    std::vector<Mat> scaled = l;
    scaled[1].row(2) *= c;
    CHECK(std::fabs(ContrastiveLoss(scaled, q, 0.1, 6, 42).value - base) < 1e-10);
  }
}

TEST_CASE("contrastive gradients match finite differences") {
  Rng rng(12);
  std::vector<Mat> l, q;
  for (int b = 0; b < 3; ++b) {
    l.push_back(RandomMat(3, 4, &rng));
    q.push_back(RandomMat(3, 4, &rng));
  }
  for (PositiveSet ps : {PositiveSet::kSameStep, PositiveSet::kUtterance}) {
    const auto r = ContrastiveLoss(l, q, 0.5, 4, 7, ps);
    const double h = 1e-6;
    for (int b = 0; b < 3; ++b)
      for (Eigen::Index i = 0; i < l[b].size(); ++i) {
        auto up = l, down = l;
        up[b].data()[i] += h;
        down[b].data()[i] -= h;
        const double fd = (ContrastiveLoss(up, q, 0.5, 4, 7, ps).value -
                           ContrastiveLoss(down, q, 0.5, 4, 7, ps).value) / (2 * h);
        CHECK(std::fabs(fd - r.grad_latents[b].data()[i]) < 1e-7);
        auto qu = q, qd = q;
        qu[b].data()[i] += h;
        qd[b].data()[i] -= h;
        const double fq = (ContrastiveLoss(l, qu, 0.5, 4, 7, ps).value -
                           ContrastiveLoss(l, qd, 0.5, 4, 7, ps).value) / (2 * h);
        CHECK(std::fabs(fq - r.grad_quantized[b].data()[i]) < 1e-7);
      }
  }
}

TEST_CASE("combine arithmetic") {
  LossWeights w;
  w.alpha = 0.1;
  w.beta = 1.0;
  const auto b = Combine(1.0, -0.1, 2.0, w);
  CHECK(std::fabs(b.speaker - 0.99) < 1e-15);
  CHECK(std::fabs(b.total - 2.99) < 1e-15);
  w.alpha = 0.0;
  w.beta = 0.0;
  CHECK(Combine(0.7, -0.1, 2.0, w).total == 0.7);
  CHECK_THROWS_AS(Combine(NAN, 0, 0, w), Error);
}

TEST_CASE("loss weights json round trip and unknown keys") {
  LossWeights w;
  w.alpha = 0.25;
  w.positives = PositiveSet::kUtterance;
  const Json j = w;
  const auto back = j.get<LossWeights>();
  CHECK(back.alpha == 0.25);
  CHECK(back.positives == PositiveSet::kUtterance);
  CHECK_THROWS_AS(Json({{"gamma", 1}}).get<LossWeights>(), Error);
}

}  // namespace
}  // namespace spkpt
