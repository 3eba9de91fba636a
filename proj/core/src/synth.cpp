// Copyright 2026 The sedkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sedkit/synth.hpp"

#include <cmath>
#include <filesystem>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>

#include "sedkit/wav.hpp"

namespace sedkit {

namespace fs = std::filesystem;

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// One rendered piece: a tone (or filler) followed by a gap.
struct Piece {
  double freq = 0.0;
  double dur = 0.0;
  double amp = 0.0;
  double gap_after = 0.0;
  bool filler = false;
  std::string token;
};

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {  // inclusive
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

void render_piece(std::vector<float>& out, const Piece& piece, int rate) {
  const int n = static_cast<int>(std::lround(piece.dur * rate));
  const int ramp = std::min(n / 4, rate / 100);  // <= 10 ms attack/release
  const double w = 2.0 * std::numbers::pi * piece.freq / rate;
  const bool harmonic = !piece.filler && 2.0 * piece.freq < 7600.0;
  const double w2 = 2.0 * w;
  for (int i = 0; i < n; ++i) {
    double env = 1.0;
    if (i < ramp) env = 0.5 - 0.5 * std::cos(std::numbers::pi * i / ramp);
    if (n - 1 - i < ramp) {
      env = std::min(env,
                     0.5 - 0.5 * std::cos(std::numbers::pi * (n - 1 - i) /
                                          ramp));
    }
    double s = std::sin(w * i);
    if (harmonic) s += 0.25 * std::sin(w2 * i);
    out.push_back(static_cast<float>(piece.amp * env * s));
  }
  const int gap = static_cast<int>(std::lround(piece.gap_after * rate));
  out.insert(out.end(), gap, 0.0f);
}

void validate(const SynthSpec& spec) {
  if (spec.num_clips < 1) throw ConfigError("synth: num_clips must be >= 1");
  if (spec.clip_seconds < 1.0) {
    throw ConfigError("synth: clip_seconds must be >= 1");
  }
  for (double p : spec.event_prob) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ConfigError("synth: event probabilities must be in [0,1]");
    }
  }
  if (spec.sample_rate != 16000) {
    throw ConfigError("synth: sample_rate must be 16000");
  }
  if (spec.num_speakers < 0) {
    throw ConfigError("synth: num_speakers must be >= 0");
  }
}

}  // namespace

SynthResult synth_generate(const SynthSpec& spec, const std::string& out_dir) {
  validate(spec);
  const int num_speakers =
      spec.num_speakers > 0 ? spec.num_speakers
                            : std::max(3, spec.num_clips / 10);

  fs::create_directories(fs::path(out_dir) / "wav");

  // Per-speaker base pitch, spread across the band.
  std::vector<double> speaker_freq(num_speakers);
  for (int s = 0; s < num_speakers; ++s) {
    std::mt19937_64 rng(splitmix64(spec.seed ^ (0xa5a5ull + s)));
    speaker_freq[s] = uniform(rng, 160.0, 440.0);
  }

  SynthResult result;
  for (int idx = 0; idx < spec.num_clips; ++idx) {
    std::mt19937_64 rng(splitmix64(spec.seed) ^ splitmix64(idx + 1));
    const int spk = idx % num_speakers;
    const double base = speaker_freq[spk];

    // Plain syllables.
    const int n = std::max(4, static_cast<int>(std::lround(
                                  spec.clip_seconds / 0.25)));
    std::vector<Piece> syls(n);
    double prev_freq = 0.0;
    for (int i = 0; i < n; ++i) {
      double freq = 0.0;
      do {
        freq = base * (1.0 + uniform(rng, -0.12, 0.12));
      } while (prev_freq > 0.0 && std::abs(freq - prev_freq) < 0.03 * base);
      prev_freq = freq;
      syls[i] = {freq, uniform(rng, 0.11, 0.18),
                 0.30 * uniform(rng, 0.9, 1.1), uniform(rng, 0.05, 0.10),
                 false, "da"};
    }

    LabelVector labels{};
    auto roll = [&](StutterTag tag) {
      const double p = spec.event_prob[static_cast<int>(tag)];
      const bool hit = uniform(rng, 0.0, 1.0) < p;
      labels[static_cast<int>(tag)] = hit ? 1 : 0;
      return hit;
    };
    const bool want_p = roll(StutterTag::kProlongation);
    const bool want_b = roll(StutterTag::kBlock);
    const bool want_r = roll(StutterTag::kSoundRep);
    const bool want_wr = roll(StutterTag::kWordRep);
    const bool want_i = roll(StutterTag::kInterjection);

    if (want_p) {
      Piece& target = syls[uniform_int(rng, 0, n - 1)];
      target.dur *= uniform(rng, 4.0, 6.0);
      target.token = "daaa/p";
    }
    const int r_at = want_r ? uniform_int(rng, 0, n - 1) : -1;
    int wr_at = -1, wr_len = 0;
    if (want_wr) {
      wr_len = uniform_int(rng, 2, std::min(3, n - 1));
      wr_at = uniform_int(rng, 0, n - wr_len);
    }

    // Assemble the output sequence.
    std::vector<Piece> seq;
    for (int i = 0; i < n; ++i) {
      if (i == r_at) {
        const int m = uniform_int(rng, 2, 4);
        for (int f = 0; f < m; ++f) {
          Piece frag = syls[i];
          frag.dur = uniform(rng, 0.05, 0.08);
          frag.gap_after = 0.03;
          frag.token = f == 0 ? "d-/r" : "d-";
          seq.push_back(frag);
        }
      }
      seq.push_back(syls[i]);
      if (wr_at >= 0 && i == wr_at + wr_len - 1) {
        // Verbatim copy of the group, bracketed in the transcript.
        for (int j = 0; j < wr_len; ++j) {
          Piece copy = syls[wr_at + j];
          if (j == 0) copy.token = "[" + copy.token;
          if (j == wr_len - 1) copy.token += "]";
          seq.push_back(copy);
        }
      }
    }
    if (want_b) {
      // A long hard pause at an internal boundary.
      const int at = uniform_int(rng, 0, static_cast<int>(seq.size()) - 2);
      seq[at].gap_after = uniform(rng, 0.45, 0.65);
      seq[at].token += " /b";
    }
    if (want_i) {
      Piece filler;
      filler.freq = uniform(rng, 950.0, 1150.0);
      filler.dur = uniform(rng, 0.25, 0.35);
      filler.amp = 0.08;
      filler.gap_after = uniform(rng, 0.05, 0.10);
      filler.filler = true;
      filler.token = "uh/i";
      const int at = uniform_int(rng, 0, static_cast<int>(seq.size()));
      seq.insert(seq.begin() + at, filler);
    }

    // Render.
    Waveform wav;
    wav.sample_rate = spec.sample_rate;
    wav.samples.insert(wav.samples.end(), spec.sample_rate / 20, 0.0f);
    for (const Piece& piece : seq) {
      render_piece(wav.samples, piece, spec.sample_rate);
    }
    wav.samples.insert(wav.samples.end(), spec.sample_rate / 20, 0.0f);

    std::ostringstream name;
    name << "clip_" << std::setw(5) << std::setfill('0') << idx;
    const std::string rel = "wav/" + name.str() + ".wav";
    save_wav((fs::path(out_dir) / rel).string(), wav);

    std::string transcript;
    for (std::size_t i = 0; i < seq.size(); ++i) {
      if (i) transcript += ' ';
      transcript += seq[i].token;
    }

    ClipRecord rec;
    rec.id = name.str();
    rec.audio = rel;  // relative in the manifest
    std::ostringstream spk_name;
    spk_name << "spk" << std::setw(3) << std::setfill('0') << spk;
    rec.speaker = spk_name.str();
    rec.labels = labels;
    rec.transcript = transcript;
    result.records.push_back(std::move(rec));
  }

  result.manifest_path = (fs::path(out_dir) / "manifest.jsonl").string();
  save_manifest(result.records, result.manifest_path);
  // Hand back resolved audio paths for direct use.
  for (auto& rec : result.records) {
    rec.audio = (fs::path(out_dir) / rec.audio).string();
  }
  return result;
}

}  // namespace sedkit
