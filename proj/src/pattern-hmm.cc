// patstd/src/pattern-hmm.cc

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

#include "patstd/pattern-hmm.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "patstd/common.h"

namespace patstd {

namespace {
constexpr char kSetMagic[8] = {'P', 'S', 'T', 'D', 'P', 'S', 'E', 'T'};
constexpr uint32_t kSetVersion = 1;
}  // namespace

std::string GranularityConfig::Tag() const {
  return StringPrintf("m%d_n%d_l%d", m, n, l);
}

GranularityConfig GranularityConfig::FromTag(const std::string &tag) {
  GranularityConfig c;
  if (std::sscanf(tag.c_str(), "m%d_n%d_l%d", &c.m, &c.n, &c.l) != 3 ||
      c.m < 1 || c.n < 2 || c.l < 1)
    throw DataError("malformed granularity tag: " + tag);
  return c;
}

void PatternSet::Check() const {
  if (static_cast<int>(hmms.size()) != config.n)
    throw InternalError(StringPrintf("pattern set %s holds %zu models",
                                     config.Tag().c_str(), hmms.size()));
  for (const auto &h : hmms) {
    if (h.NumStates() != config.m)
      throw InternalError("pattern with wrong state count");
    for (const auto &s : h.states) {
      if (s.NumComponents() != config.l || s.dim != dim)
        throw InternalError("state with wrong mixture size");
      double wsum = 0.0;
      for (double w : s.weights) wsum += w;
      if (std::fabs(wsum - 1.0) > 1e-9)
        throw InternalError("mixture weights do not sum to 1");
    }
    for (double p : h.self_loop)
      if (!(p > 0.0 && p < 1.0))
        throw InternalError("self-loop probability outside (0,1)");
  }
}

std::vector<int> Transcription::FrameLabels() const {
  std::vector<int> labels(NumFrames());
  for (const auto &tok : tokens)
    for (int t = tok.start; t <= tok.end; t++) labels[t] = tok.pattern;
  return labels;
}

void CheckTranscription(const Transcription &t, int num_frames, int m) {
  if (t.tokens.empty()) throw InternalError("empty transcription");
  if (t.tokens.front().start != 0 || t.tokens.back().end != num_frames - 1)
    throw InternalError("transcription does not cover the utterance");
  for (size_t k = 0; k < t.tokens.size(); k++) {
    if (t.tokens[k].Length() < m)
      throw InternalError(StringPrintf("token span %d < m=%d",
                                       t.tokens[k].Length(), m));
    if (k > 0 && t.tokens[k].start != t.tokens[k - 1].end + 1)
      throw InternalError("tokens do not tile the utterance");
  }
}

void WritePatternSet(const std::string &path, const PatternSet &set,
                     const Provenance &prov) {
  BinaryWriter w(path);
  w.WriteMagic(kSetMagic);
  w.WriteU32(kSetVersion);
  WriteProvenance(w, prov);
  w.WriteU32(static_cast<uint32_t>(set.config.m));
  w.WriteU32(static_cast<uint32_t>(set.config.n));
  w.WriteU32(static_cast<uint32_t>(set.config.l));
  w.WriteU32(static_cast<uint32_t>(set.dim));
  w.WriteString(set.derived_from);
  w.WriteF64Array(set.variance_floor);
  w.WriteU32(static_cast<uint32_t>(set.training_log.size()));
  for (const auto &it : set.training_log) {
    w.WriteU32(static_cast<uint32_t>(it.iteration));
    w.WriteF64(it.log_likelihood);
    w.WriteF64(it.label_change);
  }
  for (const auto &h : set.hmms) {
    for (double p : h.self_loop) w.WriteF64(p);
    for (const auto &s : h.states) {
      w.WriteF64Array(s.weights);
      w.WriteF64Array(s.means);
      w.WriteF64Array(s.vars);
    }
  }
  w.Close();
}

PatternSet ReadPatternSet(const std::string &path, Provenance *prov) {
  BinaryReader r(path);
  r.ExpectMagic(kSetMagic);
  uint32_t version = r.ReadU32();
  if (version != kSetVersion)
    throw DataError(StringPrintf("unsupported pattern set version %u in %s",
                                 version, path.c_str()));
  Provenance p = ReadProvenance(r);
  if (prov) *prov = p;
  PatternSet set;
  set.config.m = static_cast<int>(r.ReadU32());
  set.config.n = static_cast<int>(r.ReadU32());
  set.config.l = static_cast<int>(r.ReadU32());
  set.dim = static_cast<int>(r.ReadU32());
  set.derived_from = r.ReadString();
  set.variance_floor = r.ReadF64Array();
  uint32_t log_size = r.ReadU32();
  set.training_log.resize(log_size);
  for (auto &it : set.training_log) {
    it.iteration = static_cast<int>(r.ReadU32());
    it.log_likelihood = r.ReadF64();
    it.label_change = r.ReadF64();
  }
  set.hmms.resize(set.config.n);
  for (int i = 0; i < set.config.n; i++) {
    PatternHmm &h = set.hmms[i];
    h.pattern_index = i;
    h.self_loop.resize(set.config.m);
    for (double &p2 : h.self_loop) p2 = r.ReadF64();
    h.states.resize(set.config.m);
    for (auto &s : h.states) {
      s.dim = set.dim;
      s.weights = r.ReadF64Array();
      s.means = r.ReadF64Array();
      s.vars = r.ReadF64Array();
      s.Prepare();
    }
  }
  set.Check();
  return set;
}

void WritePatternSetSummary(const std::string &path, const PatternSet &set) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write summary: " + path);
  out << "pattern set " << set.config.Tag() << "\n";
  out << "dim " << set.dim << "\n";
  if (!set.derived_from.empty())
    out << "derived_from " << set.derived_from << "\n";
  out << "iterations " << set.training_log.size() << "\n";
  for (const auto &it : set.training_log)
    out << "  iter " << it.iteration << " loglike "
        << FormatDouble(it.log_likelihood) << " label_change "
        << FormatDouble(it.label_change) << "\n";
  out.close();
  if (!out) throw DataError("write failed: " + path);
}

void WriteTranscriptions(const std::string &path,
                         const std::vector<Transcription> &transcriptions) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write transcriptions: " + path);
  out << "# id\tloglike\ttokens (pattern:start:end)\n";
  for (const auto &t : transcriptions) {
    out << t.utterance_id << "\t" << FormatDouble(t.log_likelihood) << "\t";
    for (size_t k = 0; k < t.tokens.size(); k++) {
      if (k) out << " ";
      out << t.tokens[k].pattern << ":" << t.tokens[k].start << ":"
          << t.tokens[k].end;
    }
    out << "\n";
  }
  out.close();
  if (!out) throw DataError("write failed: " + path);
}

std::vector<Transcription> ReadTranscriptions(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw DataError("unreadable transcriptions: " + path);
  std::vector<Transcription> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    Transcription t;
    std::string tokens_field;
    if (!std::getline(ss, t.utterance_id, '\t'))
      throw DataError("malformed transcription line in " + path);
    std::string ll_field;
    std::getline(ss, ll_field, '\t');
    t.log_likelihood = std::stod(ll_field);
    std::getline(ss, tokens_field);
    std::istringstream ts(tokens_field);
    std::string item;
    while (ts >> item) {
      Token tok;
      if (std::sscanf(item.c_str(), "%d:%d:%d", &tok.pattern, &tok.start,
                      &tok.end) != 3)
        throw DataError("malformed token '" + item + "' in " + path);
      t.tokens.push_back(tok);
    }
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace patstd
