// patstd/src/indexing.cc

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

#include "patstd/indexing.h"

#include <cmath>

#include "patstd/common.h"

namespace patstd {

namespace {
constexpr char kIndexMagic[8] = {'P', 'S', 'T', 'D', 'I', 'N', 'D', 'X'};
constexpr uint32_t kIndexVersion = 1;

void WriteTokenList(BinaryWriter &w, const Transcription &t) {
  w.WriteF64(t.log_likelihood);
  w.WriteU32(static_cast<uint32_t>(t.tokens.size()));
  for (const Token &tok : t.tokens) {
    w.WriteU32(static_cast<uint32_t>(tok.pattern));
    w.WriteU32(static_cast<uint32_t>(tok.start));
    w.WriteU32(static_cast<uint32_t>(tok.end));
  }
}

Transcription ReadTokenList(BinaryReader &r, const std::string &id) {
  Transcription t;
  t.utterance_id = id;
  t.log_likelihood = r.ReadF64();
  uint32_t count = r.ReadU32();
  t.tokens.resize(count);
  for (Token &tok : t.tokens) {
    tok.pattern = static_cast<int>(r.ReadU32());
    tok.start = static_cast<int>(r.ReadU32());
    tok.end = static_cast<int>(r.ReadU32());
  }
  return t;
}
}  // namespace

PosteriorgramSequence BuildPosteriorgram(const NBestList &nbest,
                                         const Transcription &boundaries,
                                         int n) {
  if (nbest.entries.empty())
    throw DataError("empty n-best list for " + nbest.utterance_id);
  const int num_entries = static_cast<int>(nbest.entries.size());
  const int T = boundaries.NumFrames();

  // Frame labels for every entry, computed once.
  std::vector<std::vector<int>> labels(num_entries);
  for (int e = 0; e < num_entries; e++) {
    labels[e] = nbest.entries[e].FrameLabels();
    if (static_cast<int>(labels[e].size()) != T)
      throw InternalError("n-best entries disagree on frame count");
  }

  PosteriorgramSequence pg;
  pg.utterance_id = nbest.utterance_id;
  std::vector<double> counts(n);
  for (const Token &tok : boundaries.tokens) {
    std::fill(counts.begin(), counts.end(), 0.0);
    for (int e = 0; e < num_entries; e++)
      for (int t = tok.start; t <= tok.end; t++) counts[labels[e][t]] += 1.0;
    const double norm = static_cast<double>(tok.Length()) * num_entries;
    std::vector<std::pair<int, double>> sparse;
    for (int r = 0; r < n; r++)
      if (counts[r] > 0.0) sparse.push_back({r, counts[r] / norm});
    pg.positions.push_back(std::move(sparse));
  }
  return pg;
}

ArchiveIndex BuildIndex(const PatternSet &set,
                        const std::vector<FeatureSequence> &corpus, int N,
                        int num_workers) {
  if (N < 1) throw UsageError("nbest N must be >= 1");
  ArchiveIndex index;
  index.psi = set.config;
  index.nbest_n = N;

  struct Slot {
    bool ok = false;
    NBestList nbest;
    PosteriorgramSequence pg;
    std::string error;
  };
  std::vector<Slot> slots(corpus.size());
  ParallelFor(num_workers, static_cast<int>(corpus.size()), [&](int i) {
    try {
      slots[i].nbest = NBestDecode(set, corpus[i], N);
      slots[i].pg = BuildPosteriorgram(slots[i].nbest,
                                       slots[i].nbest.entries.front(),
                                       set.config.n);
      slots[i].pg.psi = set.config;
      slots[i].ok = true;
    } catch (const std::exception &e) {
      slots[i].error = e.what();
    }
  });

  for (size_t i = 0; i < corpus.size(); i++) {
    const std::string &id = corpus[i].utterance_id;
    if (!slots[i].ok) {
      LogWarn("indexing failed for %s: %s", id.c_str(),
              slots[i].error.c_str());
      index.failures[id] = slots[i].error;
      continue;
    }
    index.transcriptions[id] = slots[i].nbest.entries.front();
    index.nbest[id] = std::move(slots[i].nbest);
    index.posteriorgrams[id] = std::move(slots[i].pg);
  }
  return index;
}

void WriteArchiveIndex(const std::string &path, const ArchiveIndex &index,
                       const Provenance &prov) {
  BinaryWriter w(path);
  w.WriteMagic(kIndexMagic);
  w.WriteU32(kIndexVersion);
  WriteProvenance(w, prov);
  w.WriteU32(static_cast<uint32_t>(index.psi.m));
  w.WriteU32(static_cast<uint32_t>(index.psi.n));
  w.WriteU32(static_cast<uint32_t>(index.psi.l));
  w.WriteU32(static_cast<uint32_t>(index.nbest_n));
  w.WriteU32(static_cast<uint32_t>(index.transcriptions.size()));
  for (const auto &[id, trans] : index.transcriptions) {
    w.WriteString(id);
    WriteTokenList(w, trans);
    const NBestList &nb = index.nbest.at(id);
    w.WriteU32(static_cast<uint32_t>(nb.entries.size()));
    for (const auto &entry : nb.entries) WriteTokenList(w, entry);
    const PosteriorgramSequence &pg = index.posteriorgrams.at(id);
    w.WriteU32(static_cast<uint32_t>(pg.positions.size()));
    for (const auto &pos : pg.positions) {
      w.WriteU32(static_cast<uint32_t>(pos.size()));
      for (const auto &[pattern, mass] : pos) {
        w.WriteU32(static_cast<uint32_t>(pattern));
        w.WriteF64(mass);
      }
    }
  }
  w.WriteU32(static_cast<uint32_t>(index.failures.size()));
  for (const auto &[id, err] : index.failures) {
    w.WriteString(id);
    w.WriteString(err);
  }
  w.Close();
}

ArchiveIndex ReadArchiveIndex(const std::string &path, Provenance *prov) {
  BinaryReader r(path);
  r.ExpectMagic(kIndexMagic);
  uint32_t version = r.ReadU32();
  if (version != kIndexVersion)
    throw DataError(StringPrintf("unsupported index version %u in %s", version,
                                 path.c_str()));
  Provenance p = ReadProvenance(r);
  if (prov) *prov = p;
  ArchiveIndex index;
  index.psi.m = static_cast<int>(r.ReadU32());
  index.psi.n = static_cast<int>(r.ReadU32());
  index.psi.l = static_cast<int>(r.ReadU32());
  index.nbest_n = static_cast<int>(r.ReadU32());
  uint32_t count = r.ReadU32();
  for (uint32_t i = 0; i < count; i++) {
    std::string id = r.ReadString();
    index.transcriptions[id] = ReadTokenList(r, id);
    NBestList nb;
    nb.utterance_id = id;
    uint32_t entries = r.ReadU32();
    for (uint32_t e = 0; e < entries; e++)
      nb.entries.push_back(ReadTokenList(r, id));
    index.nbest[id] = std::move(nb);
    PosteriorgramSequence pg;
    pg.utterance_id = id;
    pg.psi = index.psi;
    uint32_t positions = r.ReadU32();
    pg.positions.resize(positions);
    for (auto &pos : pg.positions) {
      uint32_t nnz = r.ReadU32();
      pos.resize(nnz);
      for (auto &[pattern, mass] : pos) {
        pattern = static_cast<int>(r.ReadU32());
        mass = r.ReadF64();
      }
    }
    index.posteriorgrams[id] = std::move(pg);
  }
  uint32_t failures = r.ReadU32();
  for (uint32_t i = 0; i < failures; i++) {
    std::string id = r.ReadString();
    index.failures[id] = r.ReadString();
  }
  return index;
}

void WriteIndexTranscripts(const std::string &path,
                           const ArchiveIndex &index) {
  std::vector<Transcription> list;
  for (const auto &[id, trans] : index.transcriptions) list.push_back(trans);
  WriteTranscriptions(path, list);
}

}  // namespace patstd
