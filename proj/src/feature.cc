// patstd/src/feature.cc

// Copyright 2026  The patstd Authors

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

#include "patstd/feature.h"

#include <cmath>
#include <complex>

#include "patstd/common.h"

namespace patstd {

namespace {

constexpr char kFeatMagic[8] = {'P', 'S', 'T', 'D', 'F', 'E', 'A', 'T'};
constexpr uint32_t kFeatVersion = 1;

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

int NextPow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

// In-place iterative radix-2 FFT.
void Fft(std::vector<std::complex<double>> &a) {
  const int n = static_cast<int>(a.size());
  for (int i = 1, j = 0; i < n; i++) {
    int bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (int len = 2; len <= n; len <<= 1) {
    double ang = -2.0 * M_PI / len;
    std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (int i = 0; i < n; i += len) {
      std::complex<double> w(1.0);
      for (int k = 0; k < len / 2; k++) {
        std::complex<double> u = a[i + k];
        std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

// Triangular mel filterbank over FFT bins. Row f holds the weights of
// filter f across the nfft/2+1 magnitude bins.
struct MelBank {
  int num_filters;
  int num_bins;
  std::vector<double> weights;  // num_filters * num_bins
  std::vector<double> centers_hz;
};

MelBank BuildMelBank(int sample_rate, int nfft, int num_filters) {
  MelBank bank;
  bank.num_filters = num_filters;
  bank.num_bins = nfft / 2 + 1;
  bank.weights.assign((size_t)num_filters * bank.num_bins, 0.0);
  bank.centers_hz.resize(num_filters);

  double mel_low = HzToMel(0.0);
  double mel_high = HzToMel(sample_rate / 2.0);
  std::vector<double> edges(num_filters + 2);
  for (int i = 0; i < num_filters + 2; i++) {
    double mel = mel_low + (mel_high - mel_low) * i / (num_filters + 1);
    edges[i] = MelToHz(mel);
  }
  for (int f = 0; f < num_filters; f++) bank.centers_hz[f] = edges[f + 1];

  double bin_hz = static_cast<double>(sample_rate) / nfft;
  for (int f = 0; f < num_filters; f++) {
    double lo = edges[f], mid = edges[f + 1], hi = edges[f + 2];
    for (int b = 0; b < bank.num_bins; b++) {
      double hz = b * bin_hz;
      double w = 0.0;
      if (hz >= lo && hz <= mid && mid > lo) {
        w = (hz - lo) / (mid - lo);
      } else if (hz > mid && hz <= hi && hi > mid) {
        w = (hi - hz) / (hi - mid);
      }
      bank.weights[(size_t)f * bank.num_bins + b] = w;
    }
  }
  return bank;
}

struct FrameLayout {
  int window;  // samples
  int shift;   // samples
  int num_frames;
};

FrameLayout LayoutFrames(size_t num_samples, int sample_rate,
                         const FeatureConfig &cfg) {
  FrameLayout fl;
  fl.window = static_cast<int>(std::lround(cfg.window_sec * sample_rate));
  fl.shift = static_cast<int>(std::lround(cfg.shift_sec * sample_rate));
  if (fl.window <= 0 || fl.shift <= 0)
    throw DataError("feature config yields empty window or shift");
  if (num_samples < static_cast<size_t>(fl.window))
    throw DataError(StringPrintf(
        "waveform shorter than one window (%zu samples < %d)", num_samples,
        fl.window));
  fl.num_frames =
      static_cast<int>((num_samples - fl.window) / fl.shift) + 1;
  return fl;
}

// Log mel energies for all frames; shared by MFCC and the inspection hook.
std::vector<double> ComputeMelLog(const std::vector<float> &waveform,
                                  const FeatureConfig &cfg,
                                  const FrameLayout &fl, const MelBank &bank,
                                  int nfft) {
  // Pre-emphasis over the whole utterance; y[0] uses the HTK convention.
  std::vector<double> emphasized(waveform.size());
  if (!waveform.empty()) {
    emphasized[0] = waveform[0] * (1.0 - cfg.preemphasis);
    for (size_t i = 1; i < waveform.size(); i++)
      emphasized[i] = waveform[i] - cfg.preemphasis * waveform[i - 1];
  }

  std::vector<double> hamming(fl.window);
  for (int i = 0; i < fl.window; i++)
    hamming[i] = 0.54 - 0.46 * std::cos(2.0 * M_PI * i / (fl.window - 1));

  std::vector<double> out((size_t)fl.num_frames * bank.num_filters);
  std::vector<std::complex<double>> buf(nfft);
  std::vector<double> power(bank.num_bins);
  for (int t = 0; t < fl.num_frames; t++) {
    size_t off = (size_t)t * fl.shift;
    for (int i = 0; i < fl.window; i++)
      buf[i] = emphasized[off + i] * hamming[i];
    for (int i = fl.window; i < nfft; i++) buf[i] = 0.0;
    Fft(buf);
    for (int b = 0; b < bank.num_bins; b++) power[b] = std::norm(buf[b]);
    for (int f = 0; f < bank.num_filters; f++) {
      double e = 0.0;
      const double *w = &bank.weights[(size_t)f * bank.num_bins];
      for (int b = 0; b < bank.num_bins; b++) e += w[b] * power[b];
      out[(size_t)t * bank.num_filters + f] = std::log(std::max(e, 1e-10));
    }
  }
  return out;
}

}  // namespace

std::string FeatureConfig::CanonicalString() const {
  return StringPrintf(
      "window=%.6f shift=%.6f preemph=%.6f mel=%d ceps=%d delta=%d cmn=%d",
      window_sec, shift_sec, preemphasis, mel_filters, num_ceps, delta_window,
      cmn ? 1 : 0);
}

std::vector<double> MelFilterCenters(int sample_rate,
                                     const FeatureConfig &config) {
  int window = static_cast<int>(std::lround(config.window_sec * sample_rate));
  int nfft = NextPow2(window);
  return BuildMelBank(sample_rate, nfft, config.mel_filters).centers_hz;
}

std::vector<double> MelLogEnergies(const std::vector<float> &waveform,
                                   int sample_rate,
                                   const FeatureConfig &config,
                                   int *num_frames_out) {
  FrameLayout fl = LayoutFrames(waveform.size(), sample_rate, config);
  int nfft = NextPow2(fl.window);
  MelBank bank = BuildMelBank(sample_rate, nfft, config.mel_filters);
  if (num_frames_out) *num_frames_out = fl.num_frames;
  return ComputeMelLog(waveform, config, fl, bank, nfft);
}

FeatureSequence ExtractFeatures(const std::vector<float> &waveform,
                                int sample_rate, const FeatureConfig &config,
                                const std::string &utterance_id) {
  FrameLayout fl = LayoutFrames(waveform.size(), sample_rate, config);
  int nfft = NextPow2(fl.window);
  MelBank bank = BuildMelBank(sample_rate, nfft, config.mel_filters);
  std::vector<double> mel =
      ComputeMelLog(waveform, config, fl, bank, nfft);

  const int nc = config.num_ceps;
  const int nf = config.mel_filters;
  const int T = fl.num_frames;

  // Orthonormal DCT-II of the log mel energies.
  std::vector<double> dct((size_t)nc * nf);
  for (int k = 0; k < nc; k++) {
    double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / nf);
    for (int j = 0; j < nf; j++)
      dct[(size_t)k * nf + j] =
          scale * std::cos(M_PI * k * (j + 0.5) / nf);
  }
  std::vector<double> statics((size_t)T * nc);
  for (int t = 0; t < T; t++) {
    const double *m = &mel[(size_t)t * nf];
    for (int k = 0; k < nc; k++) {
      double s = 0.0;
      const double *row = &dct[(size_t)k * nf];
      for (int j = 0; j < nf; j++) s += row[j] * m[j];
      statics[(size_t)t * nc + k] = s;
    }
  }

  if (config.cmn) {
    for (int k = 0; k < nc; k++) {
      double mean = 0.0;
      for (int t = 0; t < T; t++) mean += statics[(size_t)t * nc + k];
      mean /= T;
      for (int t = 0; t < T; t++) statics[(size_t)t * nc + k] -= mean;
    }
  }

  std::vector<double> d1 = DeltaRegression(statics, T, nc,
                                           config.delta_window);
  std::vector<double> d2 = DeltaRegression(d1, T, nc, config.delta_window);

  FeatureSequence fs;
  fs.utterance_id = utterance_id;
  fs.dim = 3 * nc;
  fs.frame_shift = static_cast<double>(fl.shift) / sample_rate;
  fs.frame_length = static_cast<double>(fl.window) / sample_rate;
  fs.data.resize((size_t)T * fs.dim);
  for (int t = 0; t < T; t++) {
    float *row = fs.Frame(t);
    for (int c = 0; c < nc; c++) {
      row[c] = static_cast<float>(statics[(size_t)t * nc + c]);
      row[nc + c] = static_cast<float>(d1[(size_t)t * nc + c]);
      row[2 * nc + c] = static_cast<float>(d2[(size_t)t * nc + c]);
    }
  }
  return fs;
}

std::vector<double> DeltaRegression(const std::vector<double> &src,
                                    int num_frames, int dim,
                                    int half_window) {
  if (half_window < 1) throw UsageError("delta half-window must be >= 1");
  if (src.size() != (size_t)num_frames * dim)
    throw UsageError("delta input size does not match frames x dim");
  double denom = 0.0;
  for (int k = 1; k <= half_window; k++) denom += 2.0 * k * k;
  auto clamp_t = [num_frames](int t) {
    return t < 0 ? 0 : (t >= num_frames ? num_frames - 1 : t);
  };
  std::vector<double> out((size_t)num_frames * dim);
  for (int t = 0; t < num_frames; t++) {
    for (int c = 0; c < dim; c++) {
      double num = 0.0;
      for (int k = 1; k <= half_window; k++) {
        num += k * (src[(size_t)clamp_t(t + k) * dim + c] -
                    src[(size_t)clamp_t(t - k) * dim + c]);
      }
      out[(size_t)t * dim + c] = num / denom;
    }
  }
  return out;
}

void WriteFeatureFile(const std::string &path, const FeatureSequence &fs,
                      const Provenance &prov) {
  BinaryWriter w(path);
  w.WriteMagic(kFeatMagic);
  w.WriteU32(kFeatVersion);
  WriteProvenance(w, prov);
  w.WriteString(fs.utterance_id);
  w.WriteU32(static_cast<uint32_t>(fs.dim));
  w.WriteU32(static_cast<uint32_t>(fs.NumFrames()));
  w.WriteF32(static_cast<float>(fs.frame_shift));
  w.WriteF32(static_cast<float>(fs.frame_length));
  for (float x : fs.data) w.WriteF32(x);
  w.Close();
}

FeatureSequence ReadFeatureFile(const std::string &path, Provenance *prov) {
  BinaryReader r(path);
  r.ExpectMagic(kFeatMagic);
  uint32_t version = r.ReadU32();
  if (version != kFeatVersion)
    throw DataError(StringPrintf("unsupported feature file version %u in %s",
                                 version, path.c_str()));
  Provenance p = ReadProvenance(r);
  if (prov) *prov = p;
  FeatureSequence fs;
  fs.utterance_id = r.ReadString();
  fs.dim = static_cast<int>(r.ReadU32());
  uint32_t frames = r.ReadU32();
  fs.frame_shift = r.ReadF32();
  fs.frame_length = r.ReadF32();
  if (fs.dim <= 0 || frames == 0)
    throw DataError("empty feature file: " + path);
  fs.data.resize((size_t)frames * fs.dim);
  for (auto &x : fs.data) x = r.ReadF32();
  return fs;
}

}  // namespace patstd
