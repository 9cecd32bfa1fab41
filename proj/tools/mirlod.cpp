// Operator entry point: build the store from release files, validate
// tables, export N-Triples dumps, run the LOD server, and generate
// synthetic release corpora.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "mirlod/generator.hpp"
#include "mirlod/pipeline.hpp"
#include "mirlod/server.hpp"
#include "mirlod/util.hpp"

namespace {

mirlod::server::LodServer* g_server = nullptr;
volatile std::sig_atomic_t g_stop_requested = 0;

void handle_signal(int) {
    g_stop_requested = 1;
    if (g_server) g_server->stop();
}

int cmd_build(const std::string& releases, const std::string& tables, const std::string& mapping,
              const std::string& out) {
    try {
        auto build = mirlod::pipeline::run_build(releases, tables, mapping, out);
        std::fprintf(stderr, "built %s: %zu releases, %zu hairpins, %zu matures, hash %s\n",
                     out.c_str(), build.registry.size(), build.tables.hairpins.size(),
                     build.tables.matures.size(), build.content_hash.c_str());
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "build failed: %s\n", e.what());
        return 1;
    }
}

int cmd_export(const std::string& build_dir, const std::string& scope_name,
               const std::string& format, const std::string& out_file, const std::string& base) {
    auto scope = mirlod::mapping::parse_scope(scope_name);
    if (!scope) {
        std::fprintf(stderr, "unknown scope '%s' (use current|versioned|all)\n",
                     scope_name.c_str());
        return 1;
    }
    if (format != "ntriples" && format != "turtle") {
        std::fprintf(stderr, "unknown format '%s' (use ntriples|turtle)\n", format.c_str());
        return 1;
    }
    try {
        auto build = mirlod::pipeline::load_build(build_dir);
        mirlod::mapping::VirtualGraph graph(build.spec, build.tables, build.history,
                                            build.registry, base);
        auto triples = graph.enumerate_all(*scope);
        std::string body =
            format == "ntriples"
                ? mirlod::rdf::serialize_ntriples(triples)
                : mirlod::rdf::serialize_turtle(
                      triples, {{"rdf", "http://www.w3.org/1999/02/22-rdf-syntax-ns#"},
                                {"owl", "http://www.w3.org/2002/07/owl#"},
                                {"diana", build.spec.vocab_ns()}});
        if (out_file.empty()) {
            std::fwrite(body.data(), 1, body.size(), stdout);
        } else {
            mirlod::util::write_file(out_file, body);
        }
        std::fprintf(stderr, "%zu triples\n", triples.size());
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "export failed: %s\n", e.what());
        return 1;
    }
}

int cmd_serve(const std::string& build_dir, const std::string& base, const std::string& listen) {
    std::string host = "127.0.0.1";
    int port = 2020;
    auto colon = listen.rfind(':');
    if (colon == std::string::npos) {
        std::fprintf(stderr, "--listen needs host:port\n");
        return 1;
    }
    host = listen.substr(0, colon);
    auto parsed = mirlod::util::parse_int(listen.substr(colon + 1));
    if (host.empty() || !parsed || *parsed < 1 || *parsed > 65535) {
        std::fprintf(stderr, "bad --listen value '%s'\n", listen.c_str());
        return 1;
    }
    port = static_cast<int>(*parsed);

    try {
        auto build = mirlod::pipeline::load_build(build_dir);
        mirlod::server::LodServer server(build, base);
        server.logger = [](const mirlod::server::HttpRequest& req,
                           const mirlod::server::HttpResponse& res) {
            std::printf("%s %s -> %d\n", req.method.c_str(), req.path.c_str(), res.status);
            std::fflush(stdout);
        };
        g_server = &server;
        std::signal(SIGINT, handle_signal);
        std::signal(SIGTERM, handle_signal);
        std::fprintf(stderr, "serving %s on http://%s:%d (base %s)\n", build_dir.c_str(),
                     host.c_str(), port, base.c_str());
        bool ok = server.listen(host, port);
        g_server = nullptr;
        if (!ok && !g_stop_requested) {
            std::fprintf(stderr, "failed to bind %s:%d\n", host.c_str(), port);
            return 1;
        }
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "serve failed: %s\n", e.what());
        return 1;
    }
}

int cmd_gen(const std::string& out, int releases, int hairpins, int matures,
            std::uint64_t seed) {
    try {
        mirlod::gen::GenConfig config{releases, hairpins, matures, seed};
        auto corpus = mirlod::gen::generate(config);
        mirlod::gen::write_corpus(corpus, out);
        std::fprintf(stderr, "generated %d releases under %s (seed %llu)\n", releases,
                     out.c_str(), static_cast<unsigned long long>(seed));
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "gen failed: %s\n", e.what());
        return 1;
    }
}

int cmd_validate(const std::string& tables_dir) {
    try {
        auto tables = mirlod::store::load_tables(tables_dir);
        auto violations = mirlod::store::validate(tables);
        for (const auto& v : violations)
            std::printf("%s.%s\t%s\t%s\n", v.table.c_str(), v.column.c_str(), v.value.c_str(),
                        v.message.c_str());
        std::fprintf(stderr, "%zu violations\n", violations.size());
        return violations.empty() ? 0 : 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "validate failed: %s\n", e.what());
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mirlod: versioned linked open data engine for miRNA databases"};
    app.require_subcommand(1);

    auto* build = app.add_subcommand("build", "replay release files and write a build directory");
    std::string releases_dir, tables_dir, mapping_file, out_dir;
    build->add_option("releases-dir", releases_dir, "directory with versions.txt and per-release subdirectories")->required();
    build->add_option("tables-dir", tables_dir, "directory with the current table TSVs")->required();
    build->add_option("mapping-file", mapping_file, "mapping document")->required();
    build->add_option("out-dir", out_dir, "build directory to write")->required();

    auto* exp = app.add_subcommand("export", "dump the virtual graph");
    std::string build_dir, scope = "all", format = "ntriples", out_file, base = mirlod::pipeline::kDefaultBase;
    exp->add_option("build-dir", build_dir, "build directory")->required();
    exp->add_option("--scope", scope, "current|versioned|all (default all)");
    exp->add_option("--format", format, "ntriples|turtle (default ntriples)");
    exp->add_option("--out", out_file, "output file (default stdout)");
    exp->add_option("--base", base, "base IRI for minted resources");

    auto* serve = app.add_subcommand("serve", "run the LOD server");
    std::string serve_build, serve_base = mirlod::pipeline::kDefaultBase, listen = "127.0.0.1:2020";
    serve->add_option("build-dir", serve_build, "build directory")->required();
    serve->add_option("--base", serve_base, "base IRI for minted resources");
    serve->add_option("--listen", listen, "host:port to bind (default 127.0.0.1:2020)");

    auto* gen = app.add_subcommand("gen", "generate a synthetic release corpus");
    std::string gen_out;
    int gen_releases = 10, gen_hairpins = 50, gen_matures = 100;
    std::uint64_t gen_seed = 1;
    gen->add_option("out-dir", gen_out, "corpus directory to write")->required();
    gen->add_option("--releases", gen_releases, "number of releases (default 10)");
    gen->add_option("--hairpins", gen_hairpins, "hairpins created in the first release (default 50)");
    gen->add_option("--matures", gen_matures, "matures created in the first release (default 100)");
    gen->add_option("--seed", gen_seed, "random seed (default 1)");

    auto* validate = app.add_subcommand("validate", "check table referential integrity");
    std::string validate_dir;
    validate->add_option("tables-dir", validate_dir, "directory with the table TSVs")->required();

    CLI11_PARSE(app, argc, argv);

    if (build->parsed()) return cmd_build(releases_dir, tables_dir, mapping_file, out_dir);
    if (exp->parsed()) return cmd_export(build_dir, scope, format, out_file, base);
    if (serve->parsed()) return cmd_serve(serve_build, serve_base, listen);
    if (gen->parsed()) return cmd_gen(gen_out, gen_releases, gen_hairpins, gen_matures, gen_seed);
    if (validate->parsed()) return cmd_validate(validate_dir);
    return 1;
}
