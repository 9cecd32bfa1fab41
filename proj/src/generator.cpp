#include "mirlod/generator.hpp"

#include <algorithm>
#include <cstdio>
#include <random>

#include "mirlod/flatfile.hpp"
#include "mirlod/util.hpp"

namespace mirlod::gen {

using history::ReleaseFileSet;
using history::Snapshot;

namespace {

// Thin deterministic layer over mt19937_64: std::uniform_int_distribution
// is not pinned across standard libraries, these helpers are.
struct Rng {
    std::mt19937_64 engine;

    explicit Rng(std::uint64_t seed) : engine(seed) {}

    std::uint64_t next() { return engine(); }
    std::size_t below(std::size_t n) { return n == 0 ? 0 : next() % n; }
    bool chance(double p) { return static_cast<double>(next() >> 11) * 0x1.0p-53 < p; }

    template <typename T>
    const T& pick(const std::vector<T>& v) {
        return v[below(v.size())];
    }
};

const std::vector<std::string>& species_pool() {
    static const std::vector<std::string> pool = {"cel", "hsa", "mmu", "dme", "bta", "dre", "gga"};
    return pool;
}

const std::vector<std::string>& chromosome_pool() {
    static const std::vector<std::string> pool = {"1", "2", "3", "4",  "5",  "7",
                                                  "9", "11", "14", "17", "X", "Y"};
    return pool;
}

std::string make_sequence(Rng& rng, std::size_t min_len, std::size_t max_len) {
    static const char alphabet[] = {'A', 'C', 'G', 'U'};
    std::size_t len = min_len + rng.below(max_len - min_len + 1);
    std::string out(len, 'A');
    for (auto& c : out) c = alphabet[rng.below(4)];
    return out;
}

std::string hairpin_id(int n) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "MI%07d", n);
    return buf;
}

std::string mature_id(int n) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "MIMAT%07d", n);
    return buf;
}

struct HairpinMeta {
    std::string species;
    std::string chromosome;
    char strand;
    long start;
    long end;
};

struct Builder {
    GenConfig config;
    Rng rng;
    Snapshot state;
    std::map<std::string, HairpinMeta> hairpin_meta;
    std::map<std::string, std::string> mature_species;
    std::map<std::string, int> renames;  // per entity rename counter
    std::set<std::string> protected_ids;  // forward targets stay alive
    std::vector<flatfile::DeadEntry> dead_acc;  // miRNA.dead is cumulative
    int next_hairpin = 1;
    int next_mature = 1;
    int next_family = 1;

    explicit Builder(const GenConfig& c) : config(c), rng(c.seed) {}

    std::string new_hairpin() {
        int n = next_hairpin++;
        std::string id = hairpin_id(n);
        const std::string& species = rng.pick(species_pool());
        long start = 1000 + static_cast<long>(rng.below(5000000));
        HairpinMeta meta{species, rng.pick(chromosome_pool()),
                         rng.chance(0.5) ? '+' : '-', start,
                         start + 60 + static_cast<long>(rng.below(60))};
        state.hairpins[id] = {species + "-mir-" + std::to_string(n),
                              make_sequence(rng, 60, 90)};
        hairpin_meta[id] = std::move(meta);
        return id;
    }

    std::string new_mature(const std::string& parent) {
        int n = next_mature++;
        std::string id = mature_id(n);
        const std::string& species = hairpin_meta.at(parent).species;
        std::string arm = rng.chance(0.5) ? "-5p" : "-3p";
        state.matures[id] = {species + "-miR-" + std::to_string(n) + arm,
                             make_sequence(rng, 20, 24)};
        state.parents[id].insert(parent);
        mature_species[id] = species;
        return id;
    }

    std::string renamed(const std::string& id, const std::string& name) {
        int k = ++renames[id];
        // strip a previous rename suffix so names stay short
        std::string base = name;
        if (k > 1) {
            std::size_t cut = base.rfind('-');
            if (cut != std::string::npos) base = base.substr(0, cut);
        }
        return base + "-" + std::to_string(k);
    }

    std::vector<std::string> live_hairpins() const {
        std::vector<std::string> out;
        for (const auto& [id, s] : state.hairpins) out.push_back(id);
        return out;
    }

    std::vector<std::string> live_matures() const {
        std::vector<std::string> out;
        for (const auto& [id, s] : state.matures) out.push_back(id);
        return out;
    }

    void delete_hairpin(const std::string& id, bool forward,
                        const std::set<std::string>& spared) {
        // cascade: matures lose the link; single-parent matures die with it
        std::vector<std::string> linked;
        for (const auto& [mimat, parents] : state.parents)
            if (parents.count(id)) linked.push_back(mimat);
        for (const auto& mimat : linked) {
            auto& parents = state.parents[mimat];
            if (parents.size() >= 2) {
                parents.erase(id);
            } else {
                state.parents.erase(mimat);
                state.matures.erase(mimat);
            }
        }
        flatfile::DeadEntry entry;
        entry.mima_id = id;
        entry.name = state.hairpins.at(id).name;
        if (forward) {
            std::vector<std::string> targets;
            for (const auto& [hid, s] : state.hairpins)
                if (hid != id && !spared.count(hid)) targets.push_back(hid);
            if (!targets.empty()) {
                const std::string& target = targets[rng.below(targets.size())];
                state.forwards[id] = target;
                protected_ids.insert(target);
                entry.forward_to = target;
                entry.comment = "merged into replacement entry";
            } else {
                forward = false;
            }
        }
        if (!forward) entry.comment = "withdrawn entry";
        dead_acc.push_back(std::move(entry));
        state.hairpins.erase(id);
        for (auto it = state.families.begin(); it != state.families.end();) {
            it->second.members.erase(id);
            if (it->second.members.empty()) it = state.families.erase(it);
            else ++it;
        }
    }

    void seed_families() {
        std::vector<std::string> pool = live_hairpins();
        std::size_t i = 0;
        while (i + 2 <= pool.size()) {
            std::size_t size = 2 + rng.below(4);
            if (!rng.chance(0.4)) { i += size; continue; }
            int n = next_family++;
            char buf[16];
            std::snprintf(buf, sizeof buf, "MIPF%07d", n);
            store::FamilyRecord fam{buf, "mir-fam-" + std::to_string(n), {}};
            for (std::size_t k = 0; k < size && i < pool.size(); ++k, ++i)
                fam.members.insert(pool[i]);
            if (fam.members.size() >= 2) state.families[fam.family_id] = std::move(fam);
        }
    }

    void mutate_release() {
        // new entities
        std::vector<std::string> hairpins = live_hairpins();
        for (std::size_t i = 0; i < hairpins.size(); ++i)
            if (rng.chance(0.02)) {
                std::string id = new_hairpin();
                if (rng.chance(0.7)) new_mature(id);
            }
        hairpins = live_hairpins();
        std::vector<std::string> matures = live_matures();
        for (std::size_t i = 0; i < matures.size(); ++i)
            if (rng.chance(0.02) && !hairpins.empty())
                new_mature(hairpins[rng.below(hairpins.size())]);

        // state changes
        for (const auto& id : live_hairpins()) {
            auto& entity = state.hairpins.at(id);
            if (rng.chance(0.015)) entity.name = renamed(id, entity.name);
            if (rng.chance(0.015)) entity.sequence = make_sequence(rng, 60, 90);
            if (rng.chance(0.01)) {
                entity.name = renamed(id, entity.name);
                entity.sequence = make_sequence(rng, 60, 90);
            }
        }
        for (const auto& id : live_matures()) {
            auto& entity = state.matures.at(id);
            if (rng.chance(0.015)) entity.name = renamed(id, entity.name);
            if (rng.chance(0.015)) entity.sequence = make_sequence(rng, 20, 24);
            if (rng.chance(0.01)) {
                entity.name = renamed(id, entity.name);
                entity.sequence = make_sequence(rng, 20, 24);
            }
        }

        // parent link edits
        for (const auto& id : live_matures()) {
            if (rng.chance(0.01)) {
                std::vector<std::string> pool = live_hairpins();
                const std::string& candidate = pool[rng.below(pool.size())];
                if (!state.parents[id].count(candidate)) state.parents[id].insert(candidate);
            }
            if (rng.chance(0.01)) {
                auto& parents = state.parents.at(id);
                if (parents.size() >= 2) {
                    std::size_t k = rng.below(parents.size());
                    auto it = parents.begin();
                    std::advance(it, k);
                    parents.erase(it);
                }
            }
        }

        // deletions; forward targets and this release's targets are spared
        std::vector<std::string> doomed;
        std::set<std::string> doomed_set;
        for (const auto& id : live_hairpins()) {
            if (protected_ids.count(id)) continue;
            if (rng.chance(0.014)) {
                doomed.push_back(id);
                doomed_set.insert(id);
            }
        }
        for (const auto& id : doomed)
            delete_hairpin(id, rng.chance(0.5), doomed_set);
        for (const auto& id : live_matures())
            if (rng.chance(0.007)) {
                state.matures.erase(id);
                state.parents.erase(id);
            }

        // family churn: a new family now and then
        if (rng.chance(0.2)) {
            std::set<std::string> affiliated;
            for (const auto& [fid, fam] : state.families)
                affiliated.insert(fam.members.begin(), fam.members.end());
            std::vector<std::string> pool;
            for (const auto& id : live_hairpins())
                if (!affiliated.count(id)) pool.push_back(id);
            if (pool.size() >= 2) {
                int n = next_family++;
                char buf[16];
                std::snprintf(buf, sizeof buf, "MIPF%07d", n);
                store::FamilyRecord fam{buf, "mir-fam-" + std::to_string(n), {}};
                std::size_t size = 2 + rng.below(3);
                for (std::size_t k = 0; k < size && k < pool.size(); ++k)
                    fam.members.insert(pool[rng.below(pool.size())]);
                if (fam.members.size() >= 2) state.families[fam.family_id] = std::move(fam);
            }
        }
    }

    ReleaseFileSet package(const std::string& label, const Snapshot& prev) {
        ReleaseFileSet files;
        files.label = label;
        files.dat = history::dat_from_snapshot(state);
        files.diff = history::derive_diff(prev, state);
        files.dead = dead_acc;
        files.fam = history::fam_from_snapshot(state);
        return files;
    }
};

// Relational side: transcripts, genes, keggs, tissues and the join tables,
// all consistent with the final snapshot.
void build_tables(Builder& b, Corpus& corpus) {
    auto& t = corpus.tables;
    Rng& rng = b.rng;

    for (const auto& [id, entity] : b.state.hairpins) {
        const HairpinMeta& meta = b.hairpin_meta.at(id);
        t.hairpins.push_back({id, entity.name, entity.sequence, meta.species, meta.chromosome,
                              meta.strand, meta.start, meta.end});
    }
    for (const auto& [id, entity] : b.state.matures)
        t.matures.push_back({id, entity.name, entity.sequence, b.mature_species.at(id)});
    for (const auto& [mimat, parents] : b.state.parents)
        for (const auto& p : parents) t.mature_hairpin.push_back({mimat, p});

    const long transcripts = std::max<long>(8, static_cast<long>(t.matures.size()) / 2);
    for (long i = 1; i <= transcripts; ++i) {
        char enst[24];
        std::snprintf(enst, sizeof enst, "ENST%011ld", i);
        long start = 10000 + static_cast<long>(rng.below(2000000));
        t.transcripts.push_back({i, enst, rng.pick(species_pool()),
                                 rng.chance(0.5) ? '+' : '-',
                                 rng.pick(chromosome_pool()) + ":" + std::to_string(start) + "-" +
                                     std::to_string(start + 2000 + static_cast<long>(rng.below(30000)))});
    }

    const long genes = std::max<long>(6, transcripts * 3 / 4);
    for (long i = 1; i <= genes; ++i) {
        char ensg[24];
        std::snprintf(ensg, sizeof ensg, "ENSG%011ld", i);
        const auto& transcript = t.transcripts[static_cast<std::size_t>(rng.below(t.transcripts.size()))];
        t.proteingenes.push_back({ensg, transcript.enstid, "GENE" + std::to_string(i),
                                  "protein coding gene " + std::to_string(i)});
    }

    static const std::vector<std::string> pathway_names = {
        "Glycolysis",      "Citrate cycle",   "Purine metabolism", "Spliceosome",
        "RNA degradation", "Cell cycle",      "Apoptosis",         "Wnt signaling",
        "mTOR signaling",  "Axon guidance",   "Focal adhesion",    "Melanogenesis"};
    for (std::size_t i = 0; i < pathway_names.size(); ++i) {
        char kegg[16];
        std::snprintf(kegg, sizeof kegg, "map%05zu", (i + 1) * 10);
        t.keggs.push_back({kegg, pathway_names[i]});
        corpus.sameas.push_back({"Keggs", kegg, "https://www.genome.jp/pathway/" + std::string(kegg)});
    }

    static const std::vector<std::string> tissue_names = {
        "liver", "heart", "brain", "kidney", "lung", "muscle", "retina", "thymus"};
    for (const auto& name : tissue_names) {
        std::string species = rng.pick(species_pool());
        if (!t.tissue(name, species)) {
            t.tissues.push_back({name, species});
            corpus.sameas.push_back(
                {"Tissues", util::percent_encode(name) + "/" + util::percent_encode(species),
                 "http://purl.example.org/tissue/" + name});
        }
    }

    std::set<std::pair<std::string, long>> seen_microt5;
    for (const auto& m : t.matures) {
        std::size_t bindings = rng.below(4);
        for (std::size_t k = 0; k < bindings; ++k) {
            long tid = 1 + static_cast<long>(rng.below(static_cast<std::size_t>(transcripts)));
            if (seen_microt5.emplace(m.mimat, tid).second) t.microt5.push_back({m.mimat, tid});
        }
    }
    std::set<std::pair<std::string, std::string>> seen_gene_kegg;
    for (const auto& g : t.proteingenes) {
        std::size_t links = rng.below(3);
        for (std::size_t k = 0; k < links; ++k) {
            const auto& kegg = t.keggs[rng.below(t.keggs.size())];
            if (seen_gene_kegg.emplace(g.ensgid, kegg.kegg_id).second)
                t.gene_kegg.push_back({g.ensgid, kegg.kegg_id});
        }
    }
    std::set<std::tuple<std::string, std::string, std::string>> seen_tissue;
    for (const auto& m : t.matures) {
        std::size_t links = rng.below(3);
        for (std::size_t k = 0; k < links; ++k) {
            const auto& tissue = t.tissues[rng.below(t.tissues.size())];
            if (seen_tissue.emplace(m.mimat, tissue.name, tissue.species).second)
                t.mature_tissue.push_back({m.mimat, tissue.name, tissue.species});
        }
    }

    // a few hairpin sameAs links
    std::size_t count = 0;
    for (const auto& h : t.hairpins) {
        if (count >= 5) break;
        corpus.sameas.push_back({"Hairpins", h.mima_id, "https://external.example.org/hairpin/" + h.mima_id});
        ++count;
    }

    t.reindex();
}

}  // namespace

Corpus generate(const GenConfig& config) {
    if (config.releases < 1) throw Error("releases must be >= 1");
    if (config.hairpins < 1) throw Error("hairpins must be >= 1");
    if (config.matures < 0) throw Error("matures must be >= 0");

    Builder b(config);
    Corpus corpus;

    // first release: the bootstrap population
    for (int i = 0; i < config.hairpins; ++i) b.new_hairpin();
    std::vector<std::string> hairpins = b.live_hairpins();
    for (int i = 0; i < config.matures; ++i) {
        const std::string& parent = hairpins[b.rng.below(hairpins.size())];
        std::string id = b.new_mature(parent);
        if (b.rng.chance(0.15))
            b.state.parents[id].insert(hairpins[b.rng.below(hairpins.size())]);
    }
    b.seed_families();
    b.state.at = 1;
    corpus.releases.push_back(b.package("1.0", Snapshot{}));

    for (int r = 2; r <= config.releases; ++r) {
        Snapshot prev = b.state;
        b.mutate_release();
        b.state.at = r;
        corpus.releases.push_back(b.package(std::to_string(r) + ".0", prev));
    }

    build_tables(b, corpus);
    corpus.mapping_document = default_mapping_document();
    return corpus;
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& out) {
    namespace fs = std::filesystem;
    fs::create_directories(out / "releases");

    std::string manifest;
    for (const auto& files : corpus.releases) manifest += files.label + "\n";
    util::write_file(out / "releases" / "versions.txt", manifest);

    for (const auto& files : corpus.releases) {
        fs::path dir = out / "releases" / files.label;
        fs::create_directories(dir);
        util::write_file(dir / "miRNA.dat", flatfile::serialize_dat(files.dat));
        util::write_file(dir / "miRNA.diff", flatfile::serialize_diff(files.diff));
        util::write_file(dir / "miRNA.dead", flatfile::serialize_dead(files.dead));
        util::write_file(dir / "miFam.dat", flatfile::serialize_fam(files.fam));
    }

    store::save_tables(corpus.tables, out / "tables");
    util::write_file(out / "mapping.ttl", corpus.mapping_document);

    std::vector<mapping::SameAsLink> sameas = corpus.sameas;
    std::sort(sameas.begin(), sameas.end(), [](const auto& a, const auto& b) {
        return std::tie(a.classmap, a.key, a.external_iri) <
               std::tie(b.classmap, b.key, b.external_iri);
    });
    std::string rows;
    for (const auto& link : sameas)
        rows += link.classmap + "\t" + link.key + "\t" + link.external_iri + "\n";
    util::write_file(out / "sameas.tsv", rows);
}

const std::string& default_mapping_document() {
    static const std::string doc = R"ttl(@prefix map: <#> .
@prefix d2rq: <http://www.wiwiss.fu-berlin.de/suhl/bizer/D2RQ/0.1#> .
@prefix rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#> .
@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .
@prefix owl: <http://www.w3.org/2002/07/owl#> .
@prefix diana: <http://mirlod.example.org/schema#> .

map:database a d2rq:Database .

map:Hairpins a d2rq:ClassMap;
    d2rq:dataStorage map:database;
    d2rq:uriPattern "hairpins/@@diana_hairpins.mima_id@@";
    d2rq:class diana:Hairpin;
    d2rq:classDefinitionLabel "Hairpin" .

map:diana_hairpins_name a d2rq:PropertyBridge;
    d2rq:belongsToClassMap map:Hairpins;
    d2rq:property diana:name;
    d2rq:propertyDefinitionLabel "Hairpins name";
    d2rq:column "diana_hairpins.name" .

map:diana_hairpins_sequence a d2rq:PropertyBridge;
    d2rq:belongsToClassMap map:Hairpins;
    d2rq:property diana:sequence;
    d2rq:column "diana_hairpins.sequence" .

map:diana_hairpins_species a d2rq:PropertyBridge;
    d2rq:belongsToClassMap map:Hairpins;
    d2rq:property diana:species;
    d2rq:column "diana_hairpins.species" .

map:diana_hairpins_chromosome a d2rq:PropertyBridge;
    d2rq:belongsToClassMap map:Hairpins;
    d2rq:property diana:chromosome;
    d2rq:column "diana_hairpins.chromosome" .

map:diana_hairpins_strand a d2rq:PropertyBridge;
    d2rq:belongsToClassMap map:Hairpins;
    d2rq:property diana:strand;
    d2rq:column "diana_hairpins.strand" .

map:diana_hairpins_start a d2rq:PropertyBridge;
    d2rq:belongsToClassMap map:Hairpins;
    d2rq:property diana:start;
    d2rq:column "diana_hairpins.start" .

map:diana_hairpins_end a d2rq:PropertyBridge;
    d2rq:belongsToClassMap map:Hairpins;
    d2rq:property diana:end;
    d2rq:column "diana_hairpins.end" .

map:diana_hairpins_location a d2rq:PropertyBridge;
    d2rq:belongsToClassMap map:Hairpins;
    d2rq:property diana:location;
    d2rq:pattern "@@diana_hairpins.chromosome@@:@@diana_hairpins.start@@-@@diana_hairpins.end@@(@@diana_hairpins.strand@@)" .

map:diana_hairpins_matures a d2rq:PropertyBridge;
    d2rq:belongsToClassMap map:Hairpins;
    d2rq:property diana:producesMature;
    d2rq:refersToClassMap map:Matures;
    d2rq:join "diana_hairpins.mima_id=diana_mature_hairpin_conn.mima_id";
    d2rq:join "diana_mature_hairpin_conn.mimat=diana_matures.mimat" .

map:Matures a d2rq:ClassMap;
    d2rq:dataStorage map:database;
    d2rq:uriPattern "matures/@@diana_matures.mimat@@";
    d2rq:class diana:Mature;
    d2rq:classDefinitionLabel "Mature" .

map:diana_matures_name a d2rq:PropertyBridge;
    d2rq:belongsToClassMap map:Matures;
    d2rq:property diana:name;
    d2rq:column "diana_matures.name" .

map:diana_matures_sequence a d2rq:PropertyBridge;
    d2rq:belongsToClassMap map:Matures;
    d2rq:property diana:sequence;
    d2rq:column "diana_matures.sequence" .

map:diana_matures_species a d2rq:PropertyBridge;
    d2rq:belongsToClassMap map:Matures;
    d2rq:property diana:species;
    d2rq:column "diana_matures.species" .

map:diana_matures_hairpin a d2rq:PropertyBridge;
    d2rq:belongsToClassMap map:Matures;
    d2rq:property diana:parentHairpin;
    d2rq:refersToClassMap map:Hairpins;
    d2rq:join "diana_matures.mimat=diana_mature_hairpin_conn.mimat";
    d2rq:join "diana_mature_hairpin_conn.mima_id=diana_hairpins.mima_id" .

map:diana_matures_transcript a d2rq:PropertyBridge;
    d2rq:belongsToClassMap map:Matures;
    d2rq:property diana:targetsTranscript;
    d2rq:refersToClassMap map:Transcripts;
    d2rq:join "diana_matures.mimat=diana_microt5_interactions.mimat";
    d2rq:join "diana_microt5_interactions.tid=diana_transcripts.tid" .

map:diana_matures_gene a d2rq:PropertyBridge;
    d2rq:belongsToClassMap map:Matures;
    d2rq:property diana:targetsProteinGene;
    d2rq:refersToClassMap map:ProteinGenes;
    d2rq:join "diana_matures.mimat=diana_microt5_interactions.mimat";
    d2rq:join "diana_microt5_interactions.tid=diana_transcripts.tid";
    d2rq:join "diana_transcripts.enstid=diana_proteingenes.enstid" .

map:diana_matures_kegg a d2rq:PropertyBridge;
    d2rq:belongsToClassMap map:Matures;
    d2rq:property diana:relatedKegg;
    d2rq:refersToClassMap map:Keggs;
    d2rq:join "diana_matures.mimat=diana_microt5_interactions.mimat";
    d2rq:join "diana_microt5_interactions.tid=diana_transcripts.tid";
    d2rq:join "diana_transcripts.enstid=diana_proteingenes.enstid";
    d2rq:join "diana_proteingenes.ensgid=diana_proteingene_kegg_conn.ensgid";
    d2rq:join "diana_proteingene_kegg_conn.kegg_id=diana_keggs.kegg_id" .

map:diana_matures_tissue a d2rq:PropertyBridge;
    d2rq:belongsToClassMap map:Matures;
    d2rq:property diana:tissue;
    d2rq:refersToClassMap map:Tissues;
    d2rq:join "diana_matures.mimat=diana_mature_tissue_conn.mimat";
    d2rq:join "diana_mature_tissue_conn.name=diana_tissues.name";
    d2rq:join "diana_mature_tissue_conn.species=diana_tissues.species" .

map:Transcripts a d2rq:ClassMap;
    d2rq:dataStorage map:database;
    d2rq:uriPattern "transcripts/@@diana_transcripts.tid@@";
    d2rq:class diana:Transcript;
    d2rq:classDefinitionLabel "Transcript" .

map:diana_transcripts_enstid a d2rq:PropertyBridge;
    d2rq:belongsToClassMap map:Transcripts;
    d2rq:property diana:enstid;
    d2rq:column "diana_transcripts.enstid" .

map:diana_transcripts_species a d2rq:PropertyBridge;
    d2rq:belongsToClassMap map:Transcripts;
    d2rq:property diana:species;
    d2rq:column "diana_transcripts.species" .

map:diana_transcripts_strand a d2rq:PropertyBridge;
    d2rq:belongsToClassMap map:Transcripts;
    d2rq:property diana:strand;
    d2rq:column "diana_transcripts.strand" .

map:diana_transcripts_location a d2rq:PropertyBridge;
    d2rq:belongsToClassMap map:Transcripts;
    d2rq:property diana:location;
    d2rq:column "diana_transcripts.location" .

map:ProteinGenes a d2rq:ClassMap;
    d2rq:dataStorage map:database;
    d2rq:uriPattern "proteingenes/@@diana_proteingenes.ensgid@@";
    d2rq:class diana:ProteinGene;
    d2rq:classDefinitionLabel "Protein gene" .

map:diana_proteingenes_name a d2rq:PropertyBridge;
    d2rq:belongsToClassMap map:ProteinGenes;
    d2rq:property diana:name;
    d2rq:column "diana_proteingenes.name" .

map:diana_proteingenes_description a d2rq:PropertyBridge;
    d2rq:belongsToClassMap map:ProteinGenes;
    d2rq:property diana:description;
    d2rq:column "diana_proteingenes.description" .

map:diana_proteingenes_kegg a d2rq:PropertyBridge;
    d2rq:belongsToClassMap map:ProteinGenes;
    d2rq:property diana:relatedKegg;
    d2rq:refersToClassMap map:Keggs;
    d2rq:join "diana_proteingenes.ensgid=diana_proteingene_kegg_conn.ensgid";
    d2rq:join "diana_proteingene_kegg_conn.kegg_id=diana_keggs.kegg_id" .

map:Keggs a d2rq:ClassMap;
    d2rq:dataStorage map:database;
    d2rq:uriPattern "keggs/@@diana_keggs.kegg_id@@";
    d2rq:class diana:Kegg;
    d2rq:classDefinitionLabel "Kegg pathway" .

map:diana_keggs_name a d2rq:PropertyBridge;
    d2rq:belongsToClassMap map:Keggs;
    d2rq:property diana:name;
    d2rq:column "diana_keggs.name" .

map:Tissues a d2rq:ClassMap;
    d2rq:dataStorage map:database;
    d2rq:uriPattern "tissues/@@diana_tissues.name@@/@@diana_tissues.species@@";
    d2rq:class diana:Tissue;
    d2rq:classDefinitionLabel "Tissue" .

map:diana_tissues_name a d2rq:PropertyBridge;
    d2rq:belongsToClassMap map:Tissues;
    d2rq:property diana:name;
    d2rq:column "diana_tissues.name" .

map:diana_tissues_species a d2rq:PropertyBridge;
    d2rq:belongsToClassMap map:Tissues;
    d2rq:property diana:species;
    d2rq:column "diana_tissues.species" .
)ttl";
    return doc;
}

}  // namespace mirlod::gen
