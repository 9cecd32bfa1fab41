#pragma once
// Build-directory lifecycle: replay the release files, validate the
// tables, compile the mapping, and write/load the self-contained build
// directory the export and serve commands run from.
//
// Build directory layout:
//   manifest.json            version registry, content hash, row counts
//   versions.txt             release labels, oldest first
//   mapping.ttl              the mapping document (copied verbatim)
//   sameas.tsv               external links (canonical order; may be empty)
//   hairpins_history.tsv     interval records (mirrors the history tables)
//   matures_history.tsv
//   deads.tsv, families_history.tsv, events.tsv
//   tables/*.tsv             current tables in canonical key order

#include <filesystem>
#include <string>
#include <vector>

#include "mirlod/history.hpp"
#include "mirlod/mapping.hpp"
#include "mirlod/versionstore.hpp"

namespace mirlod::pipeline {

inline constexpr const char* kDefaultBase = "http://localhost:2020";

struct Build {
    store::VersionRegistry registry;
    store::TableSet tables;
    history::History history;
    mapping::MappingSpec spec;
    std::string mapping_document;
    std::string content_hash;
};

// Reads releases-dir/versions.txt and the per-release flat files.
std::vector<history::ReleaseFileSet> load_releases(const std::filesystem::path& releases_dir);

// Full build: replay, validate, compile, persist. sameas.tsv is picked up
// from next to the mapping file when present. Throws on the first
// parse/replay error or integrity violation.
Build run_build(const std::filesystem::path& releases_dir,
                const std::filesystem::path& tables_dir,
                const std::filesystem::path& mapping_file,
                const std::filesystem::path& out_dir);

Build load_build(const std::filesystem::path& build_dir);

}  // namespace mirlod::pipeline
