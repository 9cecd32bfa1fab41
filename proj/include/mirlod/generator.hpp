#pragma once
// Synthetic release-sequence generator. Produces grammar-conforming flat
// files that exercise every change type, a consistent relational side
// (transcripts, genes, keggs, tissues and their join tables), the default
// mapping document and a few sameAs links. Deterministic per seed.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mirlod/history.hpp"
#include "mirlod/mapping.hpp"
#include "mirlod/versionstore.hpp"

namespace mirlod::gen {

struct GenConfig {
    int releases = 10;
    int hairpins = 50;  // created in the first release
    int matures = 100;  // created in the first release
    std::uint64_t seed = 1;
};

struct Corpus {
    std::vector<history::ReleaseFileSet> releases;
    store::TableSet tables;  // final (current) state
    std::vector<mapping::SameAsLink> sameas;
    std::string mapping_document;
};

Corpus generate(const GenConfig& config);

// Layout written under `out`:
//   releases/versions.txt, releases/<label>/miRNA.{dat,diff,dead} + miFam.dat,
//   tables/*.tsv, mapping.ttl, sameas.tsv
void write_corpus(const Corpus& corpus, const std::filesystem::path& out);

const std::string& default_mapping_document();

}  // namespace mirlod::gen
