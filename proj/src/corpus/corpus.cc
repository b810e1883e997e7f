// corpus/corpus.cc
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

#include "corpus/corpus.h"

#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "base/error.h"
#include "base/io.h"
#include "base/rng.h"

namespace spkpt {

std::vector<UtteranceDescriptor> LoadManifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) Fail("manifest '{}' does not exist or is unreadable", path.string());
  std::vector<UtteranceDescriptor> out;
  std::unordered_set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json obj;
    try {
      obj = Json::parse(line);
    } catch (const Json::parse_error& e) {
      Fail("{}:{}: malformed JSON: {}", path.string(), line_no, e.what());
    }
    if (!obj.is_object() || !obj.contains("id") || !obj["id"].is_string() ||
        !obj.contains("audio_path") || !obj["audio_path"].is_string())
      Fail("{}:{}: expected an object with string fields 'id' and 'audio_path'",
           path.string(), line_no);
    UtteranceDescriptor d;
    d.id = obj["id"].get<std::string>();
    d.audio_path = obj["audio_path"].get<std::string>();
    if (obj.contains("speaker")) {
      if (!obj["speaker"].is_string())
        Fail("{}:{}: 'speaker' must be a string", path.string(), line_no);
      d.speaker = obj["speaker"].get<std::string>();
    }
    if (!seen.insert(d.id).second)
      Fail("{}:{}: duplicate utterance id '{}'", path.string(), line_no, d.id);
    out.push_back(std::move(d));
  }
  return out;
}

void WriteManifest(const std::filesystem::path& path,
                   std::span<const UtteranceDescriptor> descriptors) {
  std::string text;
  for (const auto& d : descriptors) {
    Json obj = {{"id", d.id}, {"audio_path", d.audio_path}};
    if (d.speaker) obj["speaker"] = *d.speaker;
    text += obj.dump() + "\n";
  }
  WriteTextFile(path, text);
}

Utterance LoadUtterance(const UtteranceDescriptor& desc,
                        const std::filesystem::path& manifest_dir) {
  std::filesystem::path audio(desc.audio_path);
  if (audio.is_relative()) audio = manifest_dir / audio;
  return Utterance{desc.id, ReadWav(audio), desc.speaker};
}

std::vector<Utterance> LoadCorpus(const std::filesystem::path& manifest_path) {
  const auto dir = manifest_path.parent_path();
  std::vector<Utterance> out;
  for (const auto& d : LoadManifest(manifest_path)) out.push_back(LoadUtterance(d, dir));
  return out;
}

Waveform FitToLength(const Waveform& wave, size_t length) {
  if (length == 0) Fail("target length must be at least 1 sample");
  Waveform out;
  out.sample_rate = wave.sample_rate;
  out.samples.assign(length, 0.0f);
  const size_t n = wave.samples.size();
  if (n >= length) {
    const size_t start = (n - length) / 2;
    std::copy_n(wave.samples.begin() + static_cast<std::ptrdiff_t>(start), length,
                out.samples.begin());
  } else {
    std::copy(wave.samples.begin(), wave.samples.end(), out.samples.begin());
  }
  return out;
}

Batch MakeBatch(std::span<const Utterance> utterances, size_t batch_size,
                size_t length, uint64_t seed) {
  if (batch_size == 0) Fail("batch size must be at least 1");
  if (batch_size > utterances.size())
    Fail("batch size {} exceeds the {} available utterances", batch_size,
         utterances.size());
  if (length == 0) Fail("batch length must be at least 1 sample");
  std::vector<size_t> order(utterances.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  // Partial Fisher-Yates: the first batch_size slots are the selection.
  for (size_t i = 0; i < batch_size; ++i) {
    const auto j = static_cast<size_t>(
        rng.UniformInt(static_cast<int64_t>(i), static_cast<int64_t>(order.size() - 1)));
    std::swap(order[i], order[j]);
  }
  Batch batch;
  batch.length = length;
  for (size_t i = 0; i < batch_size; ++i) {
    const Utterance& u = utterances[order[i]];
    batch.utterances.push_back(Utterance{u.id, FitToLength(u.waveform, length), u.speaker});
  }
  return batch;
}

Batch MakeSpeakerDistinctBatch(std::span<const Utterance> utterances, size_t batch_size,
                               size_t length, uint64_t seed) {
  if (batch_size == 0) Fail("batch size must be at least 1");
  if (length == 0) Fail("batch length must be at least 1 sample");
  std::map<std::string, std::vector<size_t>> by_speaker;
  for (size_t i = 0; i < utterances.size(); ++i) {
    if (!utterances[i].speaker)
      Fail("speaker-distinct batches need speaker tags; '{}' has none", utterances[i].id);
    by_speaker[*utterances[i].speaker].push_back(i);
  }
  if (batch_size > by_speaker.size())
    Fail("batch size {} exceeds the {} available speakers", batch_size, by_speaker.size());
  std::vector<const std::vector<size_t>*> groups;
  for (const auto& [name, members] : by_speaker) groups.push_back(&members);
  Rng rng(seed);
  for (size_t i = 0; i < batch_size; ++i) {
    const auto j = static_cast<size_t>(
        rng.UniformInt(static_cast<int64_t>(i), static_cast<int64_t>(groups.size() - 1)));
    std::swap(groups[i], groups[j]);
  }
  Batch batch;
  batch.length = length;
  for (size_t i = 0; i < batch_size; ++i) {
    const auto& members = *groups[i];
    const size_t pick = members[static_cast<size_t>(
        rng.UniformInt(0, static_cast<int64_t>(members.size()) - 1))];
    const Utterance& u = utterances[pick];
    batch.utterances.push_back(Utterance{u.id, FitToLength(u.waveform, length), u.speaker});
  }
  return batch;
}

double SynthSpeakerF0(int speaker_index, int num_speakers, uint64_t seed,
                      const SynthOptions& opts) {
  Rng rng(DeriveSeed(seed, 1, static_cast<uint64_t>(speaker_index)));
  // Evenly spaced slots with jitter confined to the inner 60% of each slot, so
  // two speakers never share a fundamental.
  const double slot = (opts.max_f0 - opts.min_f0) / num_speakers;
  return opts.min_f0 + slot * (speaker_index + 0.2 + 0.6 * rng.Uniform());
}

namespace {

struct Formant {
  double center;
  double bandwidth;
  double gain;
};

struct Phone {
  std::vector<Formant> formants;
};

double PhoneEnvelope(const Phone& p, double f) {
  double e = 0.05;
  for (const auto& fm : p.formants) {
    const double z = (f - fm.center) / fm.bandwidth;
    e += fm.gain * std::exp(-0.5 * z * z);
  }
  return e;
}

struct Speaker {
  double f0;
  std::vector<double> color;  // cosine-series log-envelope weights
};

double SpeakerEnvelope(const Speaker& s, double f, double nyquist) {
  double log_e = 0.0;
  for (size_t j = 0; j < s.color.size(); ++j)
    log_e += s.color[j] * std::cos(std::numbers::pi * double(j + 1) * f / nyquist);
  return std::exp(log_e);
}

}  // namespace

std::vector<Utterance> SynthCorpus(int num_speakers, int utts_per_speaker,
                                   double duration_sec, int sample_rate,
                                   uint64_t seed, const SynthOptions& opts) {
  if (num_speakers < 1 || utts_per_speaker < 1)
    Fail("synth_corpus needs at least one speaker and one utterance per speaker");
  if (!(duration_sec > 0.0) || sample_rate <= 0)
    Fail("synth_corpus needs positive duration and sample rate");
  if (opts.num_phones < 1) Fail("synth_corpus needs at least one phone");
  const auto num_samples = static_cast<size_t>(std::llround(duration_sec * sample_rate));
  if (num_samples == 0) Fail("duration {} s yields no samples", duration_sec);
  const double nyquist = 0.5 * sample_rate;

  std::vector<Phone> phones(static_cast<size_t>(opts.num_phones));
  {
    Rng rng(DeriveSeed(seed, 2));
    for (auto& p : phones) {
      // Three formants in roughly the F1/F2/F3 ranges of vowels.
      const double lo[3] = {250.0, 800.0, 2000.0};
      const double hi[3] = {900.0, 2400.0, 3600.0};
      for (int i = 0; i < 3; ++i) {
        const double c = lo[i] + (hi[i] - lo[i]) * rng.Uniform();
        p.formants.push_back({c, 60.0 + 140.0 * rng.Uniform(), 0.3 + rng.Uniform()});
      }
    }
  }

  std::vector<Speaker> speakers(static_cast<size_t>(num_speakers));
  for (int s = 0; s < num_speakers; ++s) {
    Rng rng(DeriveSeed(seed, 3, static_cast<uint64_t>(s)));
    speakers[s].f0 = SynthSpeakerF0(s, num_speakers, seed, opts);
    for (int j = 0; j < 4; ++j) speakers[s].color.push_back(opts.speaker_color * rng.Gaussian());
  }

  const auto fade = static_cast<size_t>(0.01 * sample_rate);
  std::vector<Utterance> corpus;
  for (int s = 0; s < num_speakers; ++s) {
    const Speaker& spk = speakers[s];
    for (int u = 0; u < utts_per_speaker; ++u) {
      Rng rng(DeriveSeed(seed, 4, static_cast<uint64_t>(s), static_cast<uint64_t>(u)));
      const double f0 = spk.f0 * (1.0 + opts.f0_jitter * (2.0 * rng.Uniform() - 1.0));
      Speaker channel{f0, {}};
      for (int j = 0; j < 4; ++j) channel.color.push_back(opts.channel_color * rng.Gaussian());
      const int num_harm = std::max(1, static_cast<int>(0.9 * nyquist / f0));
      std::vector<double> phase(static_cast<size_t>(num_harm));
      for (auto& ph : phase) ph = 2.0 * std::numbers::pi * rng.Uniform();

      // Per-sample harmonic amplitudes are piecewise constant per segment with
      // a short linear crossfade at each boundary.
      std::vector<size_t> seg_start{0};
      std::vector<int> seg_phone;
      while (seg_start.back() < num_samples) {
        const double len = opts.min_segment_sec +
                           (opts.max_segment_sec - opts.min_segment_sec) * rng.Uniform();
        seg_phone.push_back(static_cast<int>(rng.UniformInt(0, opts.num_phones - 1)));
        seg_start.push_back(seg_start.back() +
                            std::max<size_t>(1, static_cast<size_t>(len * sample_rate)));
      }
      std::vector<std::vector<double>> seg_amp(seg_phone.size());
      for (size_t g = 0; g < seg_phone.size(); ++g) {
        seg_amp[g].resize(static_cast<size_t>(num_harm));
        for (int h = 0; h < num_harm; ++h) {
          const double f = f0 * (h + 1);
          seg_amp[g][h] = PhoneEnvelope(phones[seg_phone[g]], f) *
                          SpeakerEnvelope(spk, f, nyquist) * SpeakerEnvelope(channel, f, nyquist) /
                          std::sqrt(double(h + 1));
        }
      }

      std::vector<double> x(num_samples, 0.0);
      const double w0 = 2.0 * std::numbers::pi * f0 / sample_rate;
      for (size_t g = 0; g < seg_phone.size(); ++g) {
        const size_t a = seg_start[g];
        const size_t b = std::min(seg_start[g + 1], num_samples);
        for (size_t n = a; n < b; ++n) {
          double mix = 1.0;  // weight of segment g vs. g-1
          if (g > 0 && n - a < fade) mix = double(n - a) / double(fade);
          double acc = 0.0;
          for (int h = 0; h < num_harm; ++h) {
            double amp = seg_amp[g][h];
            if (mix < 1.0) amp = mix * amp + (1.0 - mix) * seg_amp[g - 1][h];
            acc += amp * std::sin(w0 * (h + 1) * double(n) + phase[h]);
          }
          x[n] = acc;
        }
      }
      double energy = 0.0;
      for (double v : x) energy += v * v;
      const double rms = std::sqrt(energy / double(num_samples));
      const double level_db = opts.level_jitter_db * (2.0 * rng.Uniform() - 1.0);
      const double scale = (rms > 0.0 ? 0.1 / rms : 0.0) * std::pow(10.0, level_db / 20.0);

      Utterance utt;
      utt.id = fmt::format("spk{:02d}-utt{:03d}", s, u);
      utt.speaker = fmt::format("spk{:02d}", s);
      utt.waveform.sample_rate = sample_rate;
      utt.waveform.samples.resize(num_samples);
      for (size_t n = 0; n < num_samples; ++n)
        utt.waveform.samples[n] =
            static_cast<float>(scale * x[n] + opts.noise_std * rng.Gaussian());
      corpus.push_back(std::move(utt));
    }
  }
  return corpus;
}

}  // namespace spkpt
