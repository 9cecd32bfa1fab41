// Compares the serial and OpenMP-parallel graph enumeration on a
// generated corpus and checks that both produce the same stream.

#include <chrono>
#include <cstdio>

#include <CLI11.hpp>

#include "mirlod/generator.hpp"
#include "mirlod/mapping.hpp"
#include "mirlod/pipeline.hpp"

using Clock = std::chrono::steady_clock;

static double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

int main(int argc, char** argv) {
    CLI::App app{"enumeration benchmark: serial reference vs parallel"};
    int releases = 10, hairpins = 400, matures = 1000, repeat = 3;
    std::uint64_t seed = 7;
    app.add_option("--releases", releases);
    app.add_option("--hairpins", hairpins);
    app.add_option("--matures", matures);
    app.add_option("--seed", seed);
    app.add_option("--repeat", repeat);
    CLI11_PARSE(app, argc, argv);

    std::printf("generating corpus: %d releases, %d hairpins, %d matures, seed %llu\n", releases,
                hairpins, matures, static_cast<unsigned long long>(seed));
    auto corpus = mirlod::gen::generate({releases, hairpins, matures, seed});

    mirlod::store::VersionRegistry registry;
    auto history = mirlod::history::build_history(corpus.releases, registry);
    auto spec = mirlod::mapping::parse_mapping(corpus.mapping_document);
    spec.sameas = corpus.sameas;
    mirlod::mapping::VirtualGraph graph(spec, corpus.tables, history, registry,
                                        mirlod::pipeline::kDefaultBase);

    struct Row {
        const char* scope_name;
        mirlod::mapping::Scope scope;
    };
    const Row rows[] = {{"current", mirlod::mapping::Scope::Current},
                        {"versioned", mirlod::mapping::Scope::Versioned},
                        {"all", mirlod::mapping::Scope::All}};

    std::printf("%-10s %12s %12s %12s %8s\n", "scope", "triples", "serial[s]", "parallel[s]",
                "speedup");
    for (const auto& row : rows) {
        double best_serial = 1e9, best_parallel = 1e9;
        std::size_t count = 0;
        bool equal = true;
        for (int i = 0; i < repeat; ++i) {
            auto t0 = Clock::now();
            auto serial = graph.enumerate_all_serial(row.scope);
            best_serial = std::min(best_serial, seconds_since(t0));

            auto t1 = Clock::now();
            auto parallel = graph.enumerate_all(row.scope);
            best_parallel = std::min(best_parallel, seconds_since(t1));

            count = serial.size();
            equal = equal && serial == parallel;
        }
        std::printf("%-10s %12zu %12.3f %12.3f %7.2fx%s\n", row.scope_name, count, best_serial,
                    best_parallel, best_serial / best_parallel, equal ? "" : "  MISMATCH");
        if (!equal) return 1;
    }
    return 0;
}
