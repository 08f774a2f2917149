// patstd/src/synth.cc

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

#include "patstd/synth.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "patstd/common.h"
#include "patstd/gmm.h"
#include "patstd/rng.h"

namespace patstd {

namespace {

// Fixed stream ids so every object draws from its own generator and the
// output cannot depend on generation order or scheduling.
constexpr uint64_t kUnitStream = 0;
constexpr uint64_t kLexiconStream = 1;
constexpr uint64_t kSpeakerStreamBase = 2;
constexpr uint64_t kDocumentStreamBase = 1000;
constexpr uint64_t kQueryStreamBase = 500000;

}  // namespace

void SyntheticSpec::Validate() const {
  if (num_documents < 1) throw DataError("zero documents");
  if (lexicon.empty() && num_terms < 1) throw DataError("empty lexicon");
  for (const auto &term : lexicon) {
    if (term.empty()) throw DataError("empty lexicon term");
    for (int unit : term)
      if (unit < 0 || unit >= num_units)
        throw DataError(
            StringPrintf("lexicon unit %d outside inventory of %d", unit,
                         num_units));
  }
  if (dim < 1) throw DataError("feature dimension must be >= 1");
  if (num_units < 1) throw DataError("unit inventory must be >= 1");
  if (states_per_unit < 1) throw DataError("states per unit must be >= 1");
  if (mean_range <= 0.0) throw DataError("mean range must be > 0");
  if (emission_sd <= 0.0) throw DataError("emission sd must be > 0");
  if (mean_dwell <= 1.0) throw DataError("mean dwell must be > 1 frame");
  if (lexicon.empty() && term_length < 1)
    throw DataError("term length must be >= 1");
  if (num_speakers < 1) throw DataError("speaker count must be >= 1");
  if (speaker_scale < 0.0) throw DataError("speaker scale must be >= 0");
  if (num_queries < 1) throw DataError("query count must be >= 1");
  if (max_terms_per_doc < 0) throw DataError("max terms per doc must be >= 0");
  if (guaranteed_per_term < 0)
    throw DataError("guaranteed per term must be >= 0");
  if (min_filler_units < 0 || max_filler_units < min_filler_units)
    throw DataError("filler unit range is invalid");
  if (num_documents > 400000)
    throw DataError("document count exceeds the supported 400000");
}

std::string SyntheticSpec::CanonicalString() const {
  std::ostringstream ss;
  ss << "dim=" << dim << ";units=" << num_units << ";states="
     << states_per_unit << ";range=" << FormatDouble(mean_range) << ";sd="
     << FormatDouble(emission_sd) << ";dwell=" << FormatDouble(mean_dwell)
     << ";terms=" << num_terms << ";termlen=" << term_length << ";speakers="
     << num_speakers << ";scale=" << FormatDouble(speaker_scale) << ";docs="
     << num_documents << ";queries=" << num_queries << ";maxterms="
     << max_terms_per_doc << ";guaranteed=" << guaranteed_per_term
     << ";filler=" << min_filler_units << ".." << max_filler_units
     << ";lexicon=";
  for (const auto &term : lexicon) {
    for (size_t i = 0; i < term.size(); i++)
      ss << (i ? "." : "") << term[i];
    ss << ",";
  }
  return ss.str();
}

SyntheticSpec ParseSyntheticSpec(const std::string &json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception &e) {
    throw DataError(StringPrintf("malformed synthetic spec: %s", e.what()));
  }
  if (!j.is_object()) throw DataError("synthetic spec must be a JSON object");

  SyntheticSpec spec;
  try {
    for (const auto &[key, value] : j.items()) {
      if (key == "dim") spec.dim = value.get<int>();
      else if (key == "num_units") spec.num_units = value.get<int>();
      else if (key == "states_per_unit")
        spec.states_per_unit = value.get<int>();
      else if (key == "mean_range") spec.mean_range = value.get<double>();
      else if (key == "emission_sd") spec.emission_sd = value.get<double>();
      else if (key == "mean_dwell") spec.mean_dwell = value.get<double>();
      else if (key == "lexicon")
        spec.lexicon = value.get<std::vector<std::vector<int>>>();
      else if (key == "num_terms") spec.num_terms = value.get<int>();
      else if (key == "term_length") spec.term_length = value.get<int>();
      else if (key == "num_speakers") spec.num_speakers = value.get<int>();
      else if (key == "speaker_scale")
        spec.speaker_scale = value.get<double>();
      else if (key == "num_documents") spec.num_documents = value.get<int>();
      else if (key == "num_queries") spec.num_queries = value.get<int>();
      else if (key == "max_terms_per_doc")
        spec.max_terms_per_doc = value.get<int>();
      else if (key == "guaranteed_per_term")
        spec.guaranteed_per_term = value.get<int>();
      else if (key == "min_filler_units")
        spec.min_filler_units = value.get<int>();
      else if (key == "max_filler_units")
        spec.max_filler_units = value.get<int>();
      else
        throw DataError("unknown synthetic spec field: " + key);
    }
  } catch (const nlohmann::json::exception &e) {
    throw DataError(StringPrintf("malformed synthetic spec: %s", e.what()));
  }
  spec.Validate();
  return spec;
}

SyntheticSpec ReadSyntheticSpec(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("unreadable synthetic spec: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ParseSyntheticSpec(ss.str());
}

namespace {

struct Generator {
  const SyntheticSpec &spec;
  uint64_t seed;
  // unit -> state -> per-dimension means; shared per-dimension variance.
  std::vector<std::vector<std::vector<double>>> unit_means;
  double self_loop = 0.0;
  // speaker -> per-dimension affine (a, b).
  std::vector<std::vector<double>> speaker_a, speaker_b;
  std::vector<std::vector<int>> lexicon;

  explicit Generator(const SyntheticSpec &s, uint64_t sd) : spec(s), seed(sd) {
    self_loop = 1.0 - 1.0 / spec.mean_dwell;

    Rng unit_rng(Rng::DeriveSeed(seed, kUnitStream));
    unit_means.resize(spec.num_units);
    for (int u = 0; u < spec.num_units; u++) {
      unit_means[u].resize(spec.states_per_unit);
      for (int s2 = 0; s2 < spec.states_per_unit; s2++) {
        unit_means[u][s2].resize(spec.dim);
        for (int d = 0; d < spec.dim; d++)
          unit_means[u][s2][d] =
              (2.0 * unit_rng.Uniform() - 1.0) * spec.mean_range;
      }
    }

    lexicon = spec.lexicon;
    if (lexicon.empty()) {
      Rng lex_rng(Rng::DeriveSeed(seed, kLexiconStream));
      std::set<std::vector<int>> seen;
      for (int t = 0; t < spec.num_terms; t++) {
        std::vector<int> term;
        for (int attempt = 0; attempt < 100; attempt++) {
          term.clear();
          for (int i = 0; i < spec.term_length; i++) {
            int unit = static_cast<int>(lex_rng.UniformInt(spec.num_units));
            // Avoid immediate repetition so terms stay distinctive.
            while (spec.num_units > 1 && !term.empty() && unit == term.back())
              unit = static_cast<int>(lex_rng.UniformInt(spec.num_units));
            term.push_back(unit);
          }
          if (seen.insert(term).second) break;
        }
        lexicon.push_back(term);
      }
    }

    speaker_a.resize(spec.num_speakers);
    speaker_b.resize(spec.num_speakers);
    for (int sp = 0; sp < spec.num_speakers; sp++) {
      Rng sp_rng(Rng::DeriveSeed(seed, kSpeakerStreamBase + sp));
      speaker_a[sp].resize(spec.dim);
      speaker_b[sp].resize(spec.dim);
      for (int d = 0; d < spec.dim; d++) {
        speaker_a[sp][d] = 1.0 + spec.speaker_scale * sp_rng.Gaussian();
        speaker_b[sp][d] = spec.speaker_scale * sp_rng.Gaussian();
      }
    }
  }

  std::vector<int> FillerRun(Rng &rng) const {
    int span = spec.max_filler_units - spec.min_filler_units + 1;
    int len = spec.min_filler_units + static_cast<int>(rng.UniformInt(span));
    std::vector<int> run;
    for (int i = 0; i < len; i++)
      run.push_back(static_cast<int>(rng.UniformInt(spec.num_units)));
    return run;
  }

  // Samples the frames for a unit sequence under one speaker, recording one
  // token span per unit instance.
  FeatureSequence Emit(const std::string &id, const std::vector<int> &units,
                       int speaker, Rng &rng, Transcription *truth) const {
    FeatureSequence fs;
    fs.utterance_id = id;
    fs.dim = spec.dim;
    fs.frame_shift = 0.010f;
    fs.frame_length = 0.025f;
    truth->utterance_id = id;
    truth->tokens.clear();
    truth->log_likelihood = 0.0;

    const int max_dwell = std::max(2, static_cast<int>(10.0 * spec.mean_dwell));
    int frame = 0;
    for (int unit : units) {
      Token token;
      token.pattern = unit;
      token.start = frame;
      for (int s = 0; s < spec.states_per_unit; s++) {
        int duration = 1;
        while (duration < max_dwell && rng.Uniform() < self_loop) duration++;
        for (int t = 0; t < duration; t++) {
          for (int d = 0; d < spec.dim; d++) {
            double x = unit_means[unit][s][d] + spec.emission_sd *
                                                    rng.Gaussian();
            x = speaker_a[speaker][d] * x + speaker_b[speaker][d];
            fs.data.push_back(static_cast<float>(x));
          }
          frame++;
        }
      }
      token.end = frame - 1;
      truth->tokens.push_back(token);
    }
    return fs;
  }

  PatternSet TrueModel() const {
    PatternSet set;
    set.config = {spec.states_per_unit, spec.num_units, 1};
    set.dim = spec.dim;
    set.variance_floor.assign(spec.dim, 1e-8);
    std::vector<double> var(spec.dim, spec.emission_sd * spec.emission_sd);
    for (int u = 0; u < spec.num_units; u++) {
      PatternHmm hmm;
      hmm.pattern_index = u;
      for (int s = 0; s < spec.states_per_unit; s++) {
        hmm.states.push_back(MakeSingleGaussian(spec.dim, unit_means[u][s],
                                                var));
        hmm.self_loop.push_back(self_loop);
      }
      set.hmms.push_back(std::move(hmm));
    }
    set.Check();
    return set;
  }
};

// True when `term` occurs as a contiguous run inside `units`.
bool ContainsTerm(const std::vector<int> &units,
                  const std::vector<int> &term) {
  if (term.empty() || units.size() < term.size()) return false;
  for (size_t start = 0; start + term.size() <= units.size(); start++) {
    bool match = true;
    for (size_t i = 0; i < term.size(); i++) {
      if (units[start + i] != term[i]) {
        match = false;
        break;
      }
    }
    if (match) return true;
  }
  return false;
}

}  // namespace

SynthResult SynthesizeCorpus(const SyntheticSpec &spec, uint64_t seed) {
  spec.Validate();
  Generator gen(spec, seed);
  const int num_terms = static_cast<int>(gen.lexicon.size());

  SynthResult result;
  result.lexicon = gen.lexicon;
  result.true_model = gen.TrueModel();

  std::vector<std::vector<int>> doc_units(spec.num_documents);
  for (int i = 0; i < spec.num_documents; i++) {
    std::string id = StringPrintf("doc_%05d", i);
    Rng rng(Rng::DeriveSeed(seed, kDocumentStreamBase + i));
    int speaker = static_cast<int>(rng.UniformInt(spec.num_speakers));

    std::vector<int> terms;
    if (i < num_terms * spec.guaranteed_per_term) {
      terms.push_back(i % num_terms);
    } else {
      int count = static_cast<int>(rng.UniformInt(spec.max_terms_per_doc + 1));
      for (int k = 0; k < count; k++) {
        int term = static_cast<int>(rng.UniformInt(num_terms));
        if (std::find(terms.begin(), terms.end(), term) == terms.end())
          terms.push_back(term);
      }
    }

    std::vector<int> units = gen.FillerRun(rng);
    for (int term : terms) {
      units.insert(units.end(), gen.lexicon[term].begin(),
                   gen.lexicon[term].end());
      std::vector<int> filler = gen.FillerRun(rng);
      units.insert(units.end(), filler.begin(), filler.end());
    }
    if (units.empty()) units.push_back(static_cast<int>(rng.UniformInt(
        spec.num_units)));
    doc_units[i] = units;

    Transcription truth;
    result.features[id] = gen.Emit(id, units, speaker, rng, &truth);
    result.true_transcripts.push_back(std::move(truth));
    result.manifest.documents.push_back(
        {id, "features/" + id + ".feat", false});
  }

  for (int j = 0; j < spec.num_queries; j++) {
    std::string id = StringPrintf("query_%05d", j);
    Rng rng(Rng::DeriveSeed(seed, kQueryStreamBase + j));
    int speaker = static_cast<int>(rng.UniformInt(spec.num_speakers));
    int term = j % num_terms;

    Transcription truth;
    result.features[id] = gen.Emit(id, gen.lexicon[term], speaker, rng,
                                   &truth);
    result.true_transcripts.push_back(std::move(truth));
    result.manifest.queries.push_back({id, "features/" + id + ".feat", true});

    std::set<std::string> relevant;
    for (int i = 0; i < spec.num_documents; i++)
      if (ContainsTerm(doc_units[i], gen.lexicon[term]))
        relevant.insert(result.manifest.documents[i].id);
    if (relevant.empty())
      throw DataError(StringPrintf(
          "query %s has no relevant documents; raise guaranteed_per_term",
          id.c_str()));
    result.manifest.judgments[id] = std::move(relevant);
  }
  return result;
}

void WriteSynthCorpus(const std::string &dir, const SynthResult &result,
                      const Provenance &prov) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(dir) / "features");

  for (const auto &[id, features] : result.features)
    WriteFeatureFile((fs::path(dir) / "features" / (id + ".feat")).string(),
                     features, prov);

  CorpusManifest manifest = result.manifest;
  manifest.root = dir;
  WriteManifest((fs::path(dir) / "manifest.tsv").string(), manifest);

  WritePatternSet((fs::path(dir) / "true_model.pset").string(),
                  result.true_model, prov);
  WritePatternSetSummary((fs::path(dir) / "true_model.txt").string(),
                         result.true_model);
  WriteTranscriptions((fs::path(dir) / "true_transcripts.tsv").string(),
                      result.true_transcripts);

  std::string lex_path = (fs::path(dir) / "lexicon.tsv").string();
  std::ofstream out(lex_path, std::ios::binary);
  if (!out) throw DataError("cannot write lexicon: " + lex_path);
  out << "# term\tunits\n";
  for (size_t t = 0; t < result.lexicon.size(); t++) {
    out << t << "\t";
    for (size_t i = 0; i < result.lexicon[t].size(); i++)
      out << (i ? " " : "") << result.lexicon[t][i];
    out << "\n";
  }
  out.close();
  if (!out) throw DataError("write failed: " + lex_path);
}

}  // namespace patstd
