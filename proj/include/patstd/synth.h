// patstd/include/patstd/synth.h

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

#ifndef PATSTD_SYNTH_H_
#define PATSTD_SYNTH_H_

#include <map>
#include <string>
#include <vector>

#include "patstd/corpus.h"
#include "patstd/feature.h"
#include "patstd/pattern-hmm.h"

namespace patstd {

// Describes a synthetic spoken-term-detection corpus: a hidden inventory of
// left-to-right generator HMMs ("true units"), a lexicon of terms as unit
// sequences, per-"speaker" affine feature perturbations, and counts of
// documents and queries.  Feature files are emitted directly; no audio.
struct SyntheticSpec {
  int dim = 13;
  int num_units = 8;
  int states_per_unit = 3;
  double mean_range = 3.0;    // unit state means drawn from U(-range, range)
  double emission_sd = 0.5;   // per-dimension emission standard deviation
  double mean_dwell = 4.0;    // mean frames per state; self-loop = 1 - 1/dwell

  // Lexicon: either explicit unit sequences, or `num_terms` random terms of
  // `term_length` units each when `lexicon` is empty.
  std::vector<std::vector<int>> lexicon;
  int num_terms = 8;
  int term_length = 3;

  int num_speakers = 2;
  double speaker_scale = 0.05;  // affine x' = a*x + b, a = 1 + scale*N(0,1)

  int num_documents = 200;
  int num_queries = 20;
  int max_terms_per_doc = 2;
  int guaranteed_per_term = 3;  // leading documents seeded round-robin
  int min_filler_units = 2;
  int max_filler_units = 5;

  void Validate() const;
  std::string CanonicalString() const;
};

// Parses a spec from JSON text (strict: unknown fields are rejected).
SyntheticSpec ParseSyntheticSpec(const std::string &json_text);
SyntheticSpec ReadSyntheticSpec(const std::string &path);

struct SynthResult {
  CorpusManifest manifest;  // paths relative: features/<id>.feat
  std::map<std::string, FeatureSequence> features;
  PatternSet true_model;    // the generator HMMs, pattern index = unit index
  std::vector<Transcription> true_transcripts;  // planted unit spans
  std::vector<std::vector<int>> lexicon;
};

// Deterministic for a fixed (spec, seed): every random draw comes from
// fixed per-object derived streams, so outputs never depend on scheduling.
// Judgments are computed by scanning each document's planted unit sequence
// for the query term, so they mark exactly the containing documents.
SynthResult SynthesizeCorpus(const SyntheticSpec &spec, uint64_t seed);

// Writes features/, manifest.tsv, true_model.pset, true_transcripts.tsv and
// lexicon.tsv under `dir` (created if missing).
void WriteSynthCorpus(const std::string &dir, const SynthResult &result,
                      const Provenance &prov);

}  // namespace patstd

#endif  // PATSTD_SYNTH_H_
