#include "mirlod/versionstore.hpp"

#include <algorithm>

#include "mirlod/util.hpp"

namespace mirlod::store {

namespace fs = std::filesystem;
using util::is_token;

Ordinal VersionRegistry::register_version(const std::string& label) {
    if (!util::is_version_label(label))
        throw InvalidLabel("bad version label: '" + label + "'");
    if (ordinals_.count(label))
        throw DuplicateLabel("version label already registered: " + label);
    labels_.push_back(label);
    Ordinal ord = static_cast<Ordinal>(labels_.size());
    ordinals_.emplace(label, ord);
    return ord;
}

std::strong_ordering VersionRegistry::compare(const std::string& a, const std::string& b) const {
    return ordinal_of(a) <=> ordinal_of(b);
}

bool VersionRegistry::has(const std::string& label) const {
    return ordinals_.count(label) != 0;
}

Ordinal VersionRegistry::ordinal_of(const std::string& label) const {
    auto it = ordinals_.find(label);
    if (it == ordinals_.end()) throw UnknownLabel("unknown version label: " + label);
    return it->second;
}

const std::string& VersionRegistry::label_of(Ordinal ordinal) const {
    if (ordinal < 1 || static_cast<std::size_t>(ordinal) > labels_.size())
        throw UnknownLabel("no version with ordinal " + std::to_string(ordinal));
    return labels_[static_cast<std::size_t>(ordinal) - 1];
}

// ---------------------------------------------------------------------------

const HairpinRow* TableSet::hairpin(std::string_view mima_id) const {
    auto it = hairpin_by_id_.find(std::string(mima_id));
    return it == hairpin_by_id_.end() ? nullptr : &hairpins[it->second];
}

const MatureRow* TableSet::mature(std::string_view mimat) const {
    auto it = mature_by_id_.find(std::string(mimat));
    return it == mature_by_id_.end() ? nullptr : &matures[it->second];
}

const TranscriptRow* TableSet::transcript(long tid) const {
    auto it = transcript_by_tid_.find(tid);
    return it == transcript_by_tid_.end() ? nullptr : &transcripts[it->second];
}

const ProteinGeneRow* TableSet::proteingene(std::string_view ensgid) const {
    auto it = gene_by_id_.find(std::string(ensgid));
    return it == gene_by_id_.end() ? nullptr : &proteingenes[it->second];
}

const KeggRow* TableSet::kegg(std::string_view kegg_id) const {
    auto it = kegg_by_id_.find(std::string(kegg_id));
    return it == kegg_by_id_.end() ? nullptr : &keggs[it->second];
}

const TissueRow* TableSet::tissue(std::string_view name, std::string_view species) const {
    auto it = tissue_by_key_.find({std::string(name), std::string(species)});
    return it == tissue_by_key_.end() ? nullptr : &tissues[it->second];
}

template <typename Map, typename Key>
static void insert_unique(Map& map, Key key, std::size_t index, const char* table,
                          const std::string& shown) {
    if (!map.emplace(std::move(key), index).second)
        throw DuplicateKey(std::string(table) + ": duplicate key " + shown);
}

void TableSet::reindex() {
    hairpin_by_id_.clear();
    mature_by_id_.clear();
    transcript_by_tid_.clear();
    gene_by_id_.clear();
    kegg_by_id_.clear();
    tissue_by_key_.clear();

    for (std::size_t i = 0; i < hairpins.size(); ++i)
        insert_unique(hairpin_by_id_, hairpins[i].mima_id, i, "hairpins", hairpins[i].mima_id);
    for (std::size_t i = 0; i < matures.size(); ++i)
        insert_unique(mature_by_id_, matures[i].mimat, i, "matures", matures[i].mimat);
    for (std::size_t i = 0; i < transcripts.size(); ++i)
        insert_unique(transcript_by_tid_, transcripts[i].tid, i, "transcripts",
                      std::to_string(transcripts[i].tid));
    for (std::size_t i = 0; i < proteingenes.size(); ++i)
        insert_unique(gene_by_id_, proteingenes[i].ensgid, i, "proteingenes",
                      proteingenes[i].ensgid);
    for (std::size_t i = 0; i < keggs.size(); ++i)
        insert_unique(kegg_by_id_, keggs[i].kegg_id, i, "keggs", keggs[i].kegg_id);
    for (std::size_t i = 0; i < tissues.size(); ++i)
        insert_unique(tissue_by_key_, std::make_pair(tissues[i].name, tissues[i].species), i,
                      "tissues", tissues[i].name + "/" + tissues[i].species);

    auto check_pairs = [](auto& rows, auto key_of, const char* table) {
        std::set<std::string> seen;
        for (const auto& row : rows)
            if (!seen.insert(key_of(row)).second)
                throw DuplicateKey(std::string(table) + ": duplicate pair " + key_of(row));
    };
    check_pairs(mature_hairpin,
                [](const MatureHairpinConn& r) { return r.mimat + "\t" + r.mima_id; },
                "mature_hairpin");
    check_pairs(microt5,
                [](const MicroT5Interaction& r) { return r.mimat + "\t" + std::to_string(r.tid); },
                "microt5");
    check_pairs(gene_kegg,
                [](const ProteinGeneKeggConn& r) { return r.ensgid + "\t" + r.kegg_id; },
                "gene_kegg");
    check_pairs(mature_tissue,
                [](const MatureTissueConn& r) {
                    return r.mimat + "\t" + r.tissue_name + "\t" + r.species;
                },
                "mature_tissue");
}

// ---------------------------------------------------------------------------
// TSV load/save

namespace {

struct TsvReader {
    std::string file;
    std::vector<std::string_view> lines;

    // Calls fn(line_number, cells) for each row.
    template <typename Fn>
    void rows(std::size_t columns, Fn fn) const {
        for (std::size_t i = 0; i < lines.size(); ++i) {
            auto cells = util::split(lines[i], '\t');
            if (cells.size() != columns)
                throw MalformedRow(file, i + 1,
                                   "expected " + std::to_string(columns) + " columns, got " +
                                       std::to_string(cells.size()));
            fn(i + 1, cells);
        }
    }
};

std::string content_of(const fs::path& dir, const char* name, std::string& storage) {
    fs::path p = dir / name;
    if (!fs::exists(p)) throw MissingFile("missing table file: " + p.string());
    storage = util::read_file(p);
    return storage;
}

char parse_strand(const std::string& file, std::size_t line, std::string_view cell) {
    if (cell == "+") return '+';
    if (cell == "-") return '-';
    throw MalformedRow(file, line, "strand must be + or -");
}

long parse_long(const std::string& file, std::size_t line, std::string_view cell,
                const char* what) {
    auto v = util::parse_int(cell);
    if (!v) throw MalformedRow(file, line, std::string(what) + " is not an integer");
    return static_cast<long>(*v);
}

void require(bool ok, const std::string& file, std::size_t line, const std::string& what) {
    if (!ok) throw MalformedRow(file, line, what);
}

}  // namespace

TableSet load_tables(const fs::path& dir) {
    TableSet t;
    std::string storage;

    {
        TsvReader r{"hairpins.tsv", util::split_lines(content_of(dir, "hairpins.tsv", storage))};
        r.rows(8, [&](std::size_t ln, const auto& c) {
            require(util::is_hairpin_id(c[0]), r.file, ln, "bad mima_id");
            require(util::is_token(c[1]), r.file, ln, "bad name");
            require(util::is_sequence(c[2]), r.file, ln, "bad sequence");
            long start = parse_long(r.file, ln, c[6], "start");
            long end = parse_long(r.file, ln, c[7], "end");
            require(start >= 0, r.file, ln, "start must be >= 0");
            require(end >= start, r.file, ln, "end must be >= start");
            t.hairpins.push_back({std::string(c[0]), std::string(c[1]), std::string(c[2]),
                                  std::string(c[3]), std::string(c[4]),
                                  parse_strand(r.file, ln, c[5]), start, end});
        });
    }
    {
        TsvReader r{"matures.tsv", util::split_lines(content_of(dir, "matures.tsv", storage))};
        r.rows(4, [&](std::size_t ln, const auto& c) {
            require(util::is_mature_id(c[0]), r.file, ln, "bad mimat");
            require(util::is_token(c[1]), r.file, ln, "bad name");
            require(util::is_sequence(c[2]), r.file, ln, "bad sequence");
            t.matures.push_back(
                {std::string(c[0]), std::string(c[1]), std::string(c[2]), std::string(c[3])});
        });
    }
    {
        TsvReader r{"transcripts.tsv",
                    util::split_lines(content_of(dir, "transcripts.tsv", storage))};
        r.rows(5, [&](std::size_t ln, const auto& c) {
            t.transcripts.push_back({parse_long(r.file, ln, c[0], "tid"), std::string(c[1]),
                                     std::string(c[2]), parse_strand(r.file, ln, c[3]),
                                     std::string(c[4])});
        });
    }
    {
        TsvReader r{"proteingenes.tsv",
                    util::split_lines(content_of(dir, "proteingenes.tsv", storage))};
        r.rows(4, [&](std::size_t, const auto& c) {
            t.proteingenes.push_back(
                {std::string(c[0]), std::string(c[1]), std::string(c[2]), std::string(c[3])});
        });
    }
    {
        TsvReader r{"keggs.tsv", util::split_lines(content_of(dir, "keggs.tsv", storage))};
        r.rows(2, [&](std::size_t, const auto& c) {
            t.keggs.push_back({std::string(c[0]), std::string(c[1])});
        });
    }
    {
        TsvReader r{"tissues.tsv", util::split_lines(content_of(dir, "tissues.tsv", storage))};
        r.rows(2, [&](std::size_t, const auto& c) {
            t.tissues.push_back({std::string(c[0]), std::string(c[1])});
        });
    }
    {
        TsvReader r{"mature_hairpin.tsv",
                    util::split_lines(content_of(dir, "mature_hairpin.tsv", storage))};
        r.rows(2, [&](std::size_t ln, const auto& c) {
            require(util::is_mature_id(c[0]), r.file, ln, "bad mimat");
            require(util::is_hairpin_id(c[1]), r.file, ln, "bad mima_id");
            t.mature_hairpin.push_back({std::string(c[0]), std::string(c[1])});
        });
    }
    {
        TsvReader r{"microt5.tsv", util::split_lines(content_of(dir, "microt5.tsv", storage))};
        r.rows(2, [&](std::size_t ln, const auto& c) {
            require(util::is_mature_id(c[0]), r.file, ln, "bad mimat");
            t.microt5.push_back({std::string(c[0]), parse_long(r.file, ln, c[1], "tid")});
        });
    }
    {
        TsvReader r{"gene_kegg.tsv", util::split_lines(content_of(dir, "gene_kegg.tsv", storage))};
        r.rows(2, [&](std::size_t, const auto& c) {
            t.gene_kegg.push_back({std::string(c[0]), std::string(c[1])});
        });
    }
    {
        TsvReader r{"mature_tissue.tsv",
                    util::split_lines(content_of(dir, "mature_tissue.tsv", storage))};
        r.rows(3, [&](std::size_t ln, const auto& c) {
            require(util::is_mature_id(c[0]), r.file, ln, "bad mimat");
            t.mature_tissue.push_back({std::string(c[0]), std::string(c[1]), std::string(c[2])});
        });
    }

    t.reindex();
    return t;
}

void save_tables(const TableSet& tables, const fs::path& dir) {
    fs::create_directories(dir);
    TableSet sorted = tables;
    std::sort(sorted.hairpins.begin(), sorted.hairpins.end(),
              [](const auto& a, const auto& b) { return a.mima_id < b.mima_id; });
    std::sort(sorted.matures.begin(), sorted.matures.end(),
              [](const auto& a, const auto& b) { return a.mimat < b.mimat; });
    std::sort(sorted.transcripts.begin(), sorted.transcripts.end(),
              [](const auto& a, const auto& b) { return a.tid < b.tid; });
    std::sort(sorted.proteingenes.begin(), sorted.proteingenes.end(),
              [](const auto& a, const auto& b) { return a.ensgid < b.ensgid; });
    std::sort(sorted.keggs.begin(), sorted.keggs.end(),
              [](const auto& a, const auto& b) { return a.kegg_id < b.kegg_id; });
    std::sort(sorted.tissues.begin(), sorted.tissues.end(), [](const auto& a, const auto& b) {
        return std::tie(a.name, a.species) < std::tie(b.name, b.species);
    });
    std::sort(sorted.mature_hairpin.begin(), sorted.mature_hairpin.end(),
              [](const auto& a, const auto& b) {
                  return std::tie(a.mimat, a.mima_id) < std::tie(b.mimat, b.mima_id);
              });
    std::sort(sorted.microt5.begin(), sorted.microt5.end(), [](const auto& a, const auto& b) {
        return std::tie(a.mimat, a.tid) < std::tie(b.mimat, b.tid);
    });
    std::sort(sorted.gene_kegg.begin(), sorted.gene_kegg.end(), [](const auto& a, const auto& b) {
        return std::tie(a.ensgid, a.kegg_id) < std::tie(b.ensgid, b.kegg_id);
    });
    std::sort(sorted.mature_tissue.begin(), sorted.mature_tissue.end(),
              [](const auto& a, const auto& b) {
                  return std::tie(a.mimat, a.tissue_name, a.species) <
                         std::tie(b.mimat, b.tissue_name, b.species);
              });

    std::string out;
    auto flush = [&](const char* name) {
        util::write_file(dir / name, out);
        out.clear();
    };

    for (const auto& r : sorted.hairpins)
        out += r.mima_id + "\t" + r.name + "\t" + r.sequence + "\t" + r.species + "\t" +
               r.chromosome + "\t" + std::string(1, r.strand) + "\t" + std::to_string(r.start) +
               "\t" + std::to_string(r.end) + "\n";
    flush("hairpins.tsv");
    for (const auto& r : sorted.matures)
        out += r.mimat + "\t" + r.name + "\t" + r.sequence + "\t" + r.species + "\n";
    flush("matures.tsv");
    for (const auto& r : sorted.transcripts)
        out += std::to_string(r.tid) + "\t" + r.enstid + "\t" + r.species + "\t" +
               std::string(1, r.strand) + "\t" + r.location + "\n";
    flush("transcripts.tsv");
    for (const auto& r : sorted.proteingenes)
        out += r.ensgid + "\t" + r.enstid + "\t" + r.name + "\t" + r.description + "\n";
    flush("proteingenes.tsv");
    for (const auto& r : sorted.keggs) out += r.kegg_id + "\t" + r.name + "\n";
    flush("keggs.tsv");
    for (const auto& r : sorted.tissues) out += r.name + "\t" + r.species + "\n";
    flush("tissues.tsv");
    for (const auto& r : sorted.mature_hairpin) out += r.mimat + "\t" + r.mima_id + "\n";
    flush("mature_hairpin.tsv");
    for (const auto& r : sorted.microt5) out += r.mimat + "\t" + std::to_string(r.tid) + "\n";
    flush("microt5.tsv");
    for (const auto& r : sorted.gene_kegg) out += r.ensgid + "\t" + r.kegg_id + "\n";
    flush("gene_kegg.tsv");
    for (const auto& r : sorted.mature_tissue)
        out += r.mimat + "\t" + r.tissue_name + "\t" + r.species + "\n";
    flush("mature_tissue.tsv");
}

std::vector<IntegrityViolation> validate(const TableSet& t) {
    std::vector<IntegrityViolation> out;
    auto report = [&](const char* table, const char* column, const std::string& value,
                      std::string message) {
        out.push_back({table, column, value, std::move(message)});
    };

    std::set<std::string> enstids;
    for (const auto& r : t.transcripts) enstids.insert(r.enstid);

    for (const auto& r : t.proteingenes)
        if (!enstids.count(r.enstid))
            report("proteingenes", "enstid", r.enstid,
                   "proteingenes.enstid '" + r.enstid +
                       "' has no matching transcripts.enstid (join "
                       "transcripts.enstid=proteingenes.enstid)");

    for (const auto& r : t.mature_hairpin) {
        if (!t.mature(r.mimat))
            report("mature_hairpin", "mimat", r.mimat, "unknown mature " + r.mimat);
        if (!t.hairpin(r.mima_id))
            report("mature_hairpin", "mima_id", r.mima_id, "unknown hairpin " + r.mima_id);
    }
    for (const auto& r : t.microt5) {
        if (!t.mature(r.mimat)) report("microt5", "mimat", r.mimat, "unknown mature " + r.mimat);
        if (!t.transcript(r.tid))
            report("microt5", "tid", std::to_string(r.tid),
                   "unknown transcript " + std::to_string(r.tid));
    }
    for (const auto& r : t.gene_kegg) {
        if (!t.proteingene(r.ensgid))
            report("gene_kegg", "ensgid", r.ensgid, "unknown protein gene " + r.ensgid);
        if (!t.kegg(r.kegg_id)) report("gene_kegg", "kegg_id", r.kegg_id, "unknown kegg pathway " + r.kegg_id);
    }
    for (const auto& r : t.mature_tissue) {
        if (!t.mature(r.mimat))
            report("mature_tissue", "mimat", r.mimat, "unknown mature " + r.mimat);
        if (!t.tissue(r.tissue_name, r.species))
            report("mature_tissue", "name", r.tissue_name,
                   "unknown tissue " + r.tissue_name + "/" + r.species);
    }
    return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(HairpinChange c) {
    switch (c) {
        case HairpinChange::New: return "NEW";
        case HairpinChange::Name: return "NAME";
        case HairpinChange::Seq: return "SEQ";
        case HairpinChange::Ns: return "NS";
        case HairpinChange::Fw: return "FW";
        case HairpinChange::Del: return "DEL";
    }
    return "?";
}

std::string_view to_string(MatureChange c) {
    switch (c) {
        case MatureChange::New: return "NEW";
        case MatureChange::Name: return "NAME";
        case MatureChange::Seq: return "SEQ";
        case MatureChange::Ns: return "NS";
        case MatureChange::Aph: return "APH";
        case MatureChange::Rph: return "RPH";
        case MatureChange::Del: return "DEL";
    }
    return "?";
}

std::optional<HairpinChange> parse_hairpin_change(std::string_view s) {
    if (s == "NEW") return HairpinChange::New;
    if (s == "NAME") return HairpinChange::Name;
    if (s == "SEQ") return HairpinChange::Seq;
    if (s == "NS") return HairpinChange::Ns;
    if (s == "FW") return HairpinChange::Fw;
    if (s == "DEL") return HairpinChange::Del;
    return std::nullopt;
}

std::optional<MatureChange> parse_mature_change(std::string_view s) {
    if (s == "NEW") return MatureChange::New;
    if (s == "NAME") return MatureChange::Name;
    if (s == "SEQ") return MatureChange::Seq;
    if (s == "NS") return MatureChange::Ns;
    if (s == "APH") return MatureChange::Aph;
    if (s == "RPH") return MatureChange::Rph;
    if (s == "DEL") return MatureChange::Del;
    return std::nullopt;
}

}  // namespace mirlod::store
