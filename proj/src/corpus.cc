// patstd/src/corpus.cc

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

#include "patstd/corpus.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "patstd/common.h"

namespace patstd {

namespace {

std::vector<std::string> SplitTabs(const std::string &line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == '\t') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

std::vector<std::string> SplitCommas(const std::string &s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace

std::string CorpusManifest::ResolvePath(const Utterance &utt) const {
  std::filesystem::path p(utt.path);
  if (p.is_absolute() || root.empty()) return utt.path;
  return (std::filesystem::path(root) / p).string();
}

const Utterance *CorpusManifest::Find(const std::string &id) const {
  for (const auto &u : documents)
    if (u.id == id) return &u;
  for (const auto &u : queries)
    if (u.id == id) return &u;
  return nullptr;
}

CorpusManifest ReadManifest(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw DataError("unreadable manifest: " + path);
  CorpusManifest m;
  m.root = std::filesystem::path(path).parent_path().string();

  std::set<std::string> seen_ids;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    lineno++;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> f = SplitTabs(line);
    if (f.size() < 3)
      throw DataError(StringPrintf("%s:%d: expected at least 3 tab fields",
                                   path.c_str(), lineno));
    Utterance u;
    u.id = f[0];
    u.path = f[2];
    if (f[1] == "document") {
      u.is_query = false;
    } else if (f[1] == "query") {
      u.is_query = true;
    } else {
      throw DataError(StringPrintf("%s:%d: unknown role '%s'", path.c_str(),
                                   lineno, f[1].c_str()));
    }
    if (!seen_ids.insert(u.id).second)
      throw DataError(StringPrintf("%s:%d: duplicate utterance id '%s'",
                                   path.c_str(), lineno, u.id.c_str()));
    if (u.is_query) {
      if (f.size() >= 4 && f[3] != "-") {
        for (const std::string &doc : SplitCommas(f[3]))
          m.judgments[u.id].insert(doc);
      }
      m.queries.push_back(u);
    } else {
      m.documents.push_back(u);
    }
  }

  std::set<std::string> doc_ids;
  for (const auto &u : m.documents) doc_ids.insert(u.id);
  for (const auto &[query, docs] : m.judgments) {
    for (const std::string &doc : docs) {
      if (!doc_ids.count(doc))
        throw DataError(StringPrintf(
            "manifest %s: judgment of query '%s' names unknown document '%s'",
            path.c_str(), query.c_str(), doc.c_str()));
    }
  }
  return m;
}

void WriteManifest(const std::string &path, const CorpusManifest &manifest) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write manifest: " + path);
  out << "# id\trole\tpath\tjudgments\n";
  for (const auto &u : manifest.documents)
    out << u.id << "\tdocument\t" << u.path << "\t-\n";
  for (const auto &u : manifest.queries) {
    out << u.id << "\tquery\t" << u.path << "\t";
    auto it = manifest.judgments.find(u.id);
    if (it == manifest.judgments.end() || it->second.empty()) {
      out << "-";
    } else {
      bool first = true;
      for (const std::string &doc : it->second) {
        if (!first) out << ",";
        out << doc;
        first = false;
      }
    }
    out << "\n";
  }
  out.close();
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace patstd
