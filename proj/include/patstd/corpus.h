// patstd/include/patstd/corpus.h

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

#ifndef PATSTD_CORPUS_H_
#define PATSTD_CORPUS_H_

#include <map>
#include <set>
#include <string>
#include <vector>

namespace patstd {

// One corpus entry. `path` is stored relative to the manifest file so a
// corpus directory can be relocated without rewriting anything.
struct Utterance {
  std::string id;
  std::string path;
  bool is_query = false;
};

// Line-delimited corpus manifest: documents, queries, and per-query
// relevance judgments. The same format carries audio manifests (paths to
// .wav) and feature manifests (paths to .feat).
struct CorpusManifest {
  std::string root;  // directory containing the manifest file
  std::vector<Utterance> documents;
  std::vector<Utterance> queries;
  // query id -> ids of the relevant documents
  std::map<std::string, std::set<std::string>> judgments;

  // Joins root and the utterance's relative path.
  std::string ResolvePath(const Utterance &utt) const;
  const Utterance *Find(const std::string &id) const;
};

// Reads a manifest and checks its invariants: unique ids, query ids
// disjoint from document ids, every judged id present among documents.
CorpusManifest ReadManifest(const std::string &path);

// Writes a manifest; utterance paths are emitted as stored (relative).
void WriteManifest(const std::string &path, const CorpusManifest &manifest);

}  // namespace patstd

#endif  // PATSTD_CORPUS_H_
