#include "mirlod/pipeline.hpp"

#include <algorithm>

#include <json.hpp>

#include "mirlod/flatfile.hpp"
#include "mirlod/util.hpp"

namespace mirlod::pipeline {

namespace fs = std::filesystem;

std::vector<history::ReleaseFileSet> load_releases(const fs::path& releases_dir) {
    fs::path manifest = releases_dir / "versions.txt";
    if (!fs::exists(manifest))
        throw Error("missing release manifest " + manifest.string() +
                    " (one release label per line, oldest first)");

    std::string content = util::read_file(manifest);
    std::vector<history::ReleaseFileSet> releases;
    for (auto line : util::split_lines(content)) {
        if (line.empty()) continue;
        history::ReleaseFileSet files;
        files.label = std::string(line);
        fs::path dir = releases_dir / files.label;
        auto parse_one = [&](const char* name, auto parser, auto& out) {
            fs::path p = dir / name;
            if (!fs::exists(p))
                throw Error("release " + files.label + ": missing " + p.string());
            try {
                out = parser(util::read_file(p));
            } catch (const Error& e) {
                throw Error(p.string() + ": " + e.what());
            }
        };
        parse_one("miRNA.dat",
                  [](const std::string& s) { return flatfile::parse_dat(std::string_view(s)); },
                  files.dat);
        parse_one("miRNA.diff",
                  [](const std::string& s) { return flatfile::parse_diff(std::string_view(s)); },
                  files.diff);
        parse_one("miRNA.dead",
                  [](const std::string& s) { return flatfile::parse_dead(std::string_view(s)); },
                  files.dead);
        parse_one("miFam.dat",
                  [](const std::string& s) { return flatfile::parse_fam(std::string_view(s)); },
                  files.fam);
        releases.push_back(std::move(files));
    }
    if (releases.empty()) throw Error(manifest.string() + " lists no releases");
    return releases;
}

namespace {

std::string hash_directory_content(const std::vector<fs::path>& files) {
    std::uint64_t state = 14695981039346656037ull;
    for (const auto& p : files) {
        state = util::fnv1a(p.filename().string(), state);
        state = util::fnv1a(util::read_file(p), state);
    }
    return util::hex64(state);
}

std::vector<fs::path> build_files(const fs::path& dir) {
    std::vector<fs::path> files = {
        dir / "versions.txt",         dir / "mapping.ttl",
        dir / "sameas.tsv",           dir / "hairpins_history.tsv",
        dir / "matures_history.tsv",  dir / "deads.tsv",
        dir / "families_history.tsv", dir / "events.tsv",
    };
    std::vector<fs::path> tables;
    for (const auto& entry : fs::directory_iterator(dir / "tables"))
        tables.push_back(entry.path());
    std::sort(tables.begin(), tables.end());
    files.insert(files.end(), tables.begin(), tables.end());
    return files;
}

}  // namespace

Build run_build(const fs::path& releases_dir, const fs::path& tables_dir,
                const fs::path& mapping_file, const fs::path& out_dir) {
    Build build;

    auto releases = load_releases(releases_dir);
    build.history = history::build_history(releases, build.registry);

    build.tables = store::load_tables(tables_dir);
    auto violations = store::validate(build.tables);
    if (!violations.empty()) {
        std::string message = "table integrity violations:";
        std::size_t shown = 0;
        for (const auto& v : violations) {
            if (shown++ == 5) { message += " ..."; break; }
            message += "\n  " + v.table + "." + v.column + ": " + v.message;
        }
        throw Error(message);
    }

    build.mapping_document = util::read_file(mapping_file);
    build.spec = mapping::parse_mapping(build.mapping_document);
    build.spec.sameas = mapping::load_sameas(mapping_file.parent_path() / "sameas.tsv");

    // persist
    fs::create_directories(out_dir);
    std::string versions;
    for (const auto& label : build.registry.labels()) versions += label + "\n";
    util::write_file(out_dir / "versions.txt", versions);
    util::write_file(out_dir / "mapping.ttl", build.mapping_document);

    std::vector<mapping::SameAsLink> sameas = build.spec.sameas;
    std::sort(sameas.begin(), sameas.end(), [](const auto& a, const auto& b) {
        return std::tie(a.classmap, a.key, a.external_iri) <
               std::tie(b.classmap, b.key, b.external_iri);
    });
    std::string sameas_rows;
    for (const auto& link : sameas)
        sameas_rows += link.classmap + "\t" + link.key + "\t" + link.external_iri + "\n";
    util::write_file(out_dir / "sameas.tsv", sameas_rows);

    history::save_history(build.history, out_dir);
    store::save_tables(build.tables, out_dir / "tables");

    build.content_hash = hash_directory_content(build_files(out_dir));

    nlohmann::json manifest;
    manifest["format"] = "mirlod-build/1";
    manifest["versions"] = build.registry.labels();
    manifest["content_hash"] = build.content_hash;
    manifest["counts"] = {
        {"hairpins", build.tables.hairpins.size()},
        {"matures", build.tables.matures.size()},
        {"transcripts", build.tables.transcripts.size()},
        {"proteingenes", build.tables.proteingenes.size()},
        {"events", build.history.events.size()},
    };
    util::write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
    return build;
}

Build load_build(const fs::path& build_dir) {
    fs::path manifest_path = build_dir / "manifest.json";
    if (!fs::exists(manifest_path))
        throw Error("not a build directory (missing " + manifest_path.string() + ")");
    nlohmann::json manifest = nlohmann::json::parse(util::read_file(manifest_path));

    Build build;
    for (const auto& label : manifest.at("versions"))
        build.registry.register_version(label.get<std::string>());
    build.content_hash = manifest.at("content_hash").get<std::string>();

    build.tables = store::load_tables(build_dir / "tables");
    build.history = history::load_history(build_dir, build.registry.current());
    build.mapping_document = util::read_file(build_dir / "mapping.ttl");
    build.spec = mapping::parse_mapping(build.mapping_document);
    build.spec.sameas = mapping::load_sameas(build_dir / "sameas.tsv");
    return build;
}

}  // namespace mirlod::pipeline
