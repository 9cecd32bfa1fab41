#include "mirlod/mapping.hpp"

#include <algorithm>
#include <cassert>
#include <unordered_map>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mirlod/util.hpp"

namespace mirlod::mapping {

using history::ChangeEvent;
using history::ChangeType;
using history::EntityKind;
using rdf::Term;
using rdf::Triple;

namespace {

constexpr std::string_view kRdfType = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
constexpr std::string_view kOwlSameAs = "http://www.w3.org/2002/07/owl#sameAs";

// ---------------------------------------------------------------------------
// Virtual schema

struct SchemaTable {
    const char* name;
    std::vector<const char*> columns;
    std::vector<const char*> keys;
};

constexpr int kHairpins = 0;
constexpr int kMatures = 1;

const std::vector<SchemaTable>& schema() {
    static const std::vector<SchemaTable> tables = {
        {"diana_hairpins",
         {"mima_id", "name", "sequence", "species", "chromosome", "strand", "start", "end"},
         {"mima_id"}},
        {"diana_matures", {"mimat", "name", "sequence", "species"}, {"mimat"}},
        {"diana_transcripts", {"tid", "enstid", "species", "strand", "location"}, {"tid"}},
        {"diana_proteingenes", {"ensgid", "enstid", "name", "description"}, {"ensgid"}},
        {"diana_keggs", {"kegg_id", "name"}, {"kegg_id"}},
        {"diana_tissues", {"name", "species"}, {"name", "species"}},
        {"diana_mature_hairpin_conn", {"mimat", "mima_id"}, {}},
        {"diana_microt5_interactions", {"mimat", "tid"}, {}},
        {"diana_proteingene_kegg_conn", {"ensgid", "kegg_id"}, {}},
        {"diana_mature_tissue_conn", {"mimat", "name", "species"}, {}},
    };
    return tables;
}

int table_index(std::string_view name) {
    const auto& tables = schema();
    for (std::size_t i = 0; i < tables.size(); ++i)
        if (name == tables[i].name) return static_cast<int>(i);
    return -1;
}

bool table_has_column(int table, std::string_view column) {
    for (const char* c : schema()[static_cast<std::size_t>(table)].columns)
        if (column == c) return true;
    return false;
}

std::size_t row_count(const store::TableSet& t, int table) {
    switch (table) {
        case kHairpins: return t.hairpins.size();
        case kMatures: return t.matures.size();
        case 2: return t.transcripts.size();
        case 3: return t.proteingenes.size();
        case 4: return t.keggs.size();
        case 5: return t.tissues.size();
        case 6: return t.mature_hairpin.size();
        case 7: return t.microt5.size();
        case 8: return t.gene_kegg.size();
        case 9: return t.mature_tissue.size();
        default: return 0;
    }
}

std::string column_value(const store::TableSet& t, int table, std::size_t row,
                         std::string_view column) {
    switch (table) {
        case kHairpins: {
            const auto& r = t.hairpins[row];
            if (column == "mima_id") return r.mima_id;
            if (column == "name") return r.name;
            if (column == "sequence") return r.sequence;
            if (column == "species") return r.species;
            if (column == "chromosome") return r.chromosome;
            if (column == "strand") return std::string(1, r.strand);
            if (column == "start") return std::to_string(r.start);
            if (column == "end") return std::to_string(r.end);
            break;
        }
        case kMatures: {
            const auto& r = t.matures[row];
            if (column == "mimat") return r.mimat;
            if (column == "name") return r.name;
            if (column == "sequence") return r.sequence;
            if (column == "species") return r.species;
            break;
        }
        case 2: {
            const auto& r = t.transcripts[row];
            if (column == "tid") return std::to_string(r.tid);
            if (column == "enstid") return r.enstid;
            if (column == "species") return r.species;
            if (column == "strand") return std::string(1, r.strand);
            if (column == "location") return r.location;
            break;
        }
        case 3: {
            const auto& r = t.proteingenes[row];
            if (column == "ensgid") return r.ensgid;
            if (column == "enstid") return r.enstid;
            if (column == "name") return r.name;
            if (column == "description") return r.description;
            break;
        }
        case 4: {
            const auto& r = t.keggs[row];
            if (column == "kegg_id") return r.kegg_id;
            if (column == "name") return r.name;
            break;
        }
        case 5: {
            const auto& r = t.tissues[row];
            if (column == "name") return r.name;
            if (column == "species") return r.species;
            break;
        }
        case 6: {
            const auto& r = t.mature_hairpin[row];
            if (column == "mimat") return r.mimat;
            if (column == "mima_id") return r.mima_id;
            break;
        }
        case 7: {
            const auto& r = t.microt5[row];
            if (column == "mimat") return r.mimat;
            if (column == "tid") return std::to_string(r.tid);
            break;
        }
        case 8: {
            const auto& r = t.gene_kegg[row];
            if (column == "ensgid") return r.ensgid;
            if (column == "kegg_id") return r.kegg_id;
            break;
        }
        case 9: {
            const auto& r = t.mature_tissue[row];
            if (column == "mimat") return r.mimat;
            if (column == "name") return r.tissue_name;
            if (column == "species") return r.species;
            break;
        }
        default: break;
    }
    assert(false && "column validated at parse time");
    return {};
}

std::string short_name(std::string_view iri) {
    std::size_t pos = iri.find_last_of("#/");
    return std::string(pos == std::string_view::npos ? iri : iri.substr(pos + 1));
}

}  // namespace

// ---------------------------------------------------------------------------
// UriPattern

UriPattern UriPattern::parse(std::string_view text) {
    UriPattern p;
    p.text = std::string(text);
    std::size_t pos = 0;
    while (true) {
        std::size_t open = text.find("@@", pos);
        if (open == std::string_view::npos) {
            p.literals.emplace_back(text.substr(pos));
            break;
        }
        std::size_t close = text.find("@@", open + 2);
        if (close == std::string_view::npos)
            throw BadPattern("unterminated placeholder in pattern '" + std::string(text) + "'");
        p.literals.emplace_back(text.substr(pos, open - pos));
        std::string_view ref = text.substr(open + 2, close - open - 2);
        std::size_t dot = ref.find('.');
        if (dot == std::string_view::npos || dot == 0 || dot + 1 == ref.size())
            throw BadPattern("placeholder must be table.column: '" + std::string(ref) + "'");
        p.columns.push_back({std::string(ref.substr(0, dot)), std::string(ref.substr(dot + 1))});
        pos = close + 2;
    }
    for (const auto& c : p.columns) {
        int t = table_index(c.table);
        if (t < 0) throw BadPattern("unknown table in pattern: " + c.str());
        if (!table_has_column(t, c.column)) throw BadPattern("unknown column in pattern: " + c.str());
    }
    return p;
}

std::string expand_pattern(const UriPattern& pattern, const RowView& row,
                           const std::string& base) {
    std::string out = base + "/resource/";
    for (std::size_t i = 0; i < pattern.columns.size(); ++i) {
        out += pattern.literals[i];
        auto value = row(pattern.columns[i]);
        if (!value) throw MissingColumn("no value for " + pattern.columns[i].str());
        out += util::percent_encode(*value);
    }
    out += pattern.literals.back();
    return out;
}

namespace {

// Literal-producing pattern expansion (no base, no encoding); nullopt
// when a referenced column has no value in this context.
std::optional<std::string> expand_literal_pattern(const UriPattern& pattern, const RowView& row) {
    std::string out;
    for (std::size_t i = 0; i < pattern.columns.size(); ++i) {
        out += pattern.literals[i];
        auto value = row(pattern.columns[i]);
        if (!value) return std::nullopt;
        out += *value;
    }
    out += pattern.literals.back();
    return out;
}

// Matches `rest` against the pattern; returns the decoded placeholder
// values. Literal separators are located left to right.
std::optional<std::vector<std::string>> match_pattern(const UriPattern& p, std::string_view rest) {
    std::vector<std::string> values;
    if (rest.substr(0, p.literals.front().size()) != p.literals.front()) return std::nullopt;
    std::size_t pos = p.literals.front().size();
    for (std::size_t i = 0; i < p.columns.size(); ++i) {
        const std::string& next = p.literals[i + 1];
        std::size_t end;
        if (i + 1 == p.columns.size() && next.empty()) {
            end = rest.size();
        } else if (next.empty()) {
            return std::nullopt;  // ambiguous: adjacent placeholders unsupported
        } else {
            end = rest.find(next, pos);
            if (end == std::string_view::npos) return std::nullopt;
        }
        auto decoded = util::percent_decode(rest.substr(pos, end - pos));
        if (!decoded || decoded->empty()) return std::nullopt;
        values.push_back(std::move(*decoded));
        pos = end + next.size();
    }
    if (p.columns.empty()) {
        if (rest != p.literals.front()) return std::nullopt;
        return values;
    }
    if (pos != rest.size()) return std::nullopt;
    return values;
}

}  // namespace

// ---------------------------------------------------------------------------
// parse_mapping

const ClassMap* MappingSpec::classmap(std::string_view name) const {
    for (const auto& cm : classmaps)
        if (cm.name == name) return &cm;
    return nullptr;
}

const std::string& MappingSpec::vocab_ns() const {
    auto it = prefixes.find("diana");
    if (it == prefixes.end()) throw Error("mapping document does not declare the diana: prefix");
    return it->second;
}

namespace {

struct Block {
    std::string name;       // short subject name
    std::string type;       // short name of the rdf:type object
    std::vector<std::pair<std::string, Term>> directives;  // short predicate, object
};

Condition parse_condition(const std::string& text) {
    std::size_t eq = text.find('=');
    if (eq == std::string::npos) throw BadColumn("condition must be table.column = 'value': " + text);
    auto trim = [](std::string_view s) {
        while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
        while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
        return s;
    };
    std::string_view lhs = trim(std::string_view(text).substr(0, eq));
    std::string_view rhs = trim(std::string_view(text).substr(eq + 1));
    if (rhs.size() < 2 || rhs.front() != '\'' || rhs.back() != '\'')
        throw BadColumn("condition value must be quoted with ': " + text);
    std::size_t dot = lhs.find('.');
    if (dot == std::string_view::npos)
        throw BadColumn("condition column must be table.column: " + text);
    Condition c;
    c.column = {std::string(lhs.substr(0, dot)), std::string(lhs.substr(dot + 1))};
    c.value = std::string(rhs.substr(1, rhs.size() - 2));
    int t = table_index(c.column.table);
    if (t < 0 || !table_has_column(t, c.column.column))
        throw BadColumn("unknown condition column " + c.column.str());
    return c;
}

JoinCondition parse_join(const std::string& text) {
    std::size_t eq = text.find('=');
    if (eq == std::string::npos) throw BadJoin("join must be a.b=c.d: " + text);
    auto side = [&](std::string_view s) -> ColumnRef {
        while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
        while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
        std::size_t dot = s.find('.');
        if (dot == std::string_view::npos) throw BadJoin("join side must be table.column: " + text);
        ColumnRef ref{std::string(s.substr(0, dot)), std::string(s.substr(dot + 1))};
        int t = table_index(ref.table);
        if (t < 0 || !table_has_column(t, ref.column))
            throw BadJoin("unknown join column " + ref.str());
        return ref;
    };
    return {side(std::string_view(text).substr(0, eq)), side(std::string_view(text).substr(eq + 1))};
}

// Orients and validates a join chain from `from_table`; returns the
// target table index.
int walk_chain(const std::string& bridge, int from_table, std::vector<JoinCondition>& joins) {
    int frontier = from_table;
    for (auto& join : joins) {
        int lt = table_index(join.left.table);
        int rt = table_index(join.right.table);
        if (rt == frontier && lt != frontier) {
            std::swap(join.left, join.right);
            std::swap(lt, rt);
        }
        if (lt != frontier)
            throw BadJoin("bridge " + bridge + ": join " + join.left.str() + "=" +
                          join.right.str() + " does not continue the chain");
        frontier = rt;
    }
    return frontier;
}

PropertyBridge::LinkRole detect_link_role(const ClassMap& cm, const PropertyBridge& b,
                                          const MappingSpec& spec) {
    if (b.source != PropertyBridge::Source::RefersTo || b.joins.size() != 2) return PropertyBridge::LinkRole::None;
    const ClassMap* target = spec.classmap(b.refers_to);
    if (!target) return PropertyBridge::LinkRole::None;
    const bool through_conn = b.joins[0].right.table == "diana_mature_hairpin_conn" &&
                              b.joins[1].left.table == "diana_mature_hairpin_conn";
    if (!through_conn) return PropertyBridge::LinkRole::None;
    if (cm.table == "diana_matures" && target->table == "diana_hairpins")
        return PropertyBridge::LinkRole::ParentOfMature;
    if (cm.table == "diana_hairpins" && target->table == "diana_matures")
        return PropertyBridge::LinkRole::MaturesOfHairpin;
    return PropertyBridge::LinkRole::None;
}

}  // namespace

MappingSpec parse_mapping(std::string_view document) {
    MappingSpec spec;
    std::vector<Triple> triples = rdf::parse_turtle(document, &spec.prefixes);

    // Group triples into blocks, preserving document order.
    std::vector<Block> blocks;
    std::unordered_map<std::string, std::size_t> block_index;
    for (const auto& t : triples) {
        if (!t.subject.is_iri()) throw UnknownDirective("block subjects must be IRIs");
        std::string name = short_name(t.subject.value);
        auto [it, inserted] = block_index.try_emplace(name, blocks.size());
        if (inserted) blocks.push_back({name, {}, {}});
        Block& block = blocks[it->second];
        if (t.predicate.value == kRdfType) {
            block.type = short_name(t.object.value);
            continue;
        }
        block.directives.emplace_back(short_name(t.predicate.value), t.object);
    }

    static const std::set<std::string> classmap_directives = {
        "dataStorage", "uriPattern", "class", "classDefinitionLabel"};
    static const std::set<std::string> bridge_directives = {
        "belongsToClassMap", "property",  "propertyDefinitionLabel",
        "column",            "pattern",   "refersToClassMap",
        "join",              "condition"};

    struct PendingBridge {
        std::string classmap;
        PropertyBridge bridge;
    };
    std::vector<PendingBridge> pending;

    for (const auto& block : blocks) {
        if (block.type == "Database") {
            if (!block.directives.empty())
                throw UnknownDirective("database block " + block.name +
                                       " carries unsupported directives");
            continue;
        }
        if (block.type == "ClassMap") {
            ClassMap cm;
            cm.name = block.name;
            bool have_pattern = false;
            for (const auto& [directive, object] : block.directives) {
                if (!classmap_directives.count(directive))
                    throw UnknownDirective("unsupported directive d2rq:" + directive +
                                           " on ClassMap " + block.name);
                if (directive == "uriPattern") {
                    cm.uri_pattern = UriPattern::parse(object.value);
                    have_pattern = true;
                } else if (directive == "class") {
                    cm.rdf_class = object.value;
                } else if (directive == "classDefinitionLabel") {
                    cm.definition_label = object.value;
                }
            }
            if (!have_pattern || cm.uri_pattern.columns.empty())
                throw BadPattern("ClassMap " + cm.name + " needs a uriPattern with placeholders");
            cm.table = cm.uri_pattern.columns.front().table;
            for (const auto& c : cm.uri_pattern.columns)
                if (c.table != cm.table)
                    throw BadPattern("ClassMap " + cm.name +
                                     ": pattern placeholders must reference one table");
            // the placeholders must cover the table's key columns
            const auto& keys = schema()[static_cast<std::size_t>(table_index(cm.table))].keys;
            for (const char* key : keys) {
                bool covered = false;
                for (const auto& c : cm.uri_pattern.columns)
                    if (c.column == key) covered = true;
                if (!covered)
                    throw BadPattern("ClassMap " + cm.name + ": pattern misses key column " +
                                     std::string(key) + " of " + cm.table);
            }
            spec.classmaps.push_back(std::move(cm));
            continue;
        }
        if (block.type == "PropertyBridge") {
            PendingBridge pb;
            pb.bridge.name = block.name;
            int sources = 0;
            for (const auto& [directive, object] : block.directives) {
                if (!bridge_directives.count(directive))
                    throw UnknownDirective("unsupported directive d2rq:" + directive +
                                           " on PropertyBridge " + block.name);
                if (directive == "belongsToClassMap") {
                    pb.classmap = short_name(object.value);
                } else if (directive == "property") {
                    pb.bridge.property = object.value;
                } else if (directive == "propertyDefinitionLabel") {
                    pb.bridge.definition_label = object.value;
                } else if (directive == "column") {
                    pb.bridge.source = PropertyBridge::Source::Column;
                    ++sources;
                    std::size_t dot = object.value.find('.');
                    if (dot == std::string::npos)
                        throw BadColumn("column must be table.column: " + object.value);
                    pb.bridge.column = {object.value.substr(0, dot), object.value.substr(dot + 1)};
                    int t = table_index(pb.bridge.column.table);
                    if (t < 0 || !table_has_column(t, pb.bridge.column.column))
                        throw BadColumn("unknown column " + pb.bridge.column.str());
                } else if (directive == "pattern") {
                    pb.bridge.source = PropertyBridge::Source::Pattern;
                    ++sources;
                    pb.bridge.pattern = UriPattern::parse(object.value);
                } else if (directive == "refersToClassMap") {
                    pb.bridge.source = PropertyBridge::Source::RefersTo;
                    ++sources;
                    pb.bridge.refers_to = short_name(object.value);
                } else if (directive == "join") {
                    pb.bridge.joins.push_back(parse_join(object.value));
                } else if (directive == "condition") {
                    pb.bridge.condition = parse_condition(object.value);
                }
            }
            if (pb.classmap.empty())
                throw DanglingBelongsTo("PropertyBridge " + block.name +
                                        " has no belongsToClassMap");
            if (sources != 1)
                throw BadBridge("PropertyBridge " + block.name +
                                " needs exactly one of column/pattern/refersToClassMap");
            if (pb.bridge.property.empty())
                throw BadBridge("PropertyBridge " + block.name + " has no property");
            pending.push_back(std::move(pb));
            continue;
        }
        throw UnknownDirective("block " + block.name + " has no supported d2rq type");
    }

    for (auto& pb : pending) {
        ClassMap* owner = nullptr;
        for (auto& cm : spec.classmaps)
            if (cm.name == pb.classmap) owner = &cm;
        if (!owner)
            throw DanglingBelongsTo("PropertyBridge " + pb.bridge.name +
                                    " references undeclared ClassMap " + pb.classmap);
        auto& b = pb.bridge;
        switch (b.source) {
            case PropertyBridge::Source::Column:
                if (b.column.table != owner->table)
                    throw BadColumn("bridge " + b.name + ": column " + b.column.str() +
                                    " is not from table " + owner->table);
                break;
            case PropertyBridge::Source::Pattern:
                for (const auto& c : b.pattern.columns)
                    if (c.table != owner->table)
                        throw BadPattern("bridge " + b.name + ": pattern column " + c.str() +
                                         " is not from table " + owner->table);
                break;
            case PropertyBridge::Source::RefersTo: {
                const ClassMap* target = spec.classmap(b.refers_to);
                if (!target)
                    throw DanglingBelongsTo("bridge " + b.name +
                                            " refers to undeclared ClassMap " + b.refers_to);
                if (b.joins.empty()) throw BadJoin("bridge " + b.name + " needs join conditions");
                int end = walk_chain(b.name, table_index(owner->table), b.joins);
                if (end != table_index(target->table))
                    throw BadJoin("bridge " + b.name + ": join chain ends at " +
                                  schema()[static_cast<std::size_t>(end)].name + ", not at " +
                                  target->table);
                break;
            }
        }
        owner->bridges.push_back(std::move(pb.bridge));
    }

    for (auto& cm : spec.classmaps)
        for (auto& b : cm.bridges) b.link_role = detect_link_role(cm, b, spec);

    return spec;
}

std::vector<SameAsLink> load_sameas(const std::filesystem::path& file) {
    std::vector<SameAsLink> out;
    if (!std::filesystem::exists(file)) return out;
    std::string content = util::read_file(file);
    auto lines = util::split_lines(content);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        auto cells = util::split(lines[i], '\t');
        if (cells.size() != 3)
            throw store::MalformedRow(file.filename().string(), i + 1, "expected 3 columns");
        out.push_back({std::string(cells[0]), std::string(cells[1]), std::string(cells[2])});
    }
    return out;
}

std::optional<Scope> parse_scope(std::string_view s) {
    if (s == "current") return Scope::Current;
    if (s == "versioned") return Scope::Versioned;
    if (s == "all") return Scope::All;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// VirtualGraph

struct VirtualGraph::Impl {
    // [table][column] -> value -> row indices
    std::vector<std::map<std::string, std::unordered_map<std::string, std::vector<std::uint32_t>>,
                         std::less<>>>
        indexes;

    struct Hop {
        int from_table;
        int to_table;
        std::vector<std::pair<std::string, std::string>> columns;  // (from, to)
    };
    // per (classmap index, bridge index)
    std::map<std::pair<std::size_t, std::size_t>, std::vector<Hop>> join_plans;

    // sameas links by (classmap, key)
    std::map<std::pair<std::string, std::string>, std::vector<std::string>> sameas;

    const std::vector<std::uint32_t>* lookup(int table, const std::string& column,
                                             const std::string& value) const {
        const auto& by_column = indexes[static_cast<std::size_t>(table)];
        auto cit = by_column.find(column);
        if (cit == by_column.end()) return nullptr;
        auto vit = cit->second.find(value);
        return vit == cit->second.end() ? nullptr : &vit->second;
    }
};

VirtualGraph::VirtualGraph(const MappingSpec& spec, const store::TableSet& tables,
                           const history::History& hist, const store::VersionRegistry& registry,
                           std::string base)
    : spec_(spec),
      tables_(tables),
      history_(hist),
      registry_(registry),
      base_(std::move(base)),
      vocab_(spec.vocab_ns()),
      impl_(std::make_shared<Impl>()) {
    while (!base_.empty() && base_.back() == '/') base_.pop_back();

    // index every column of every table
    impl_->indexes.resize(schema().size());
    for (std::size_t t = 0; t < schema().size(); ++t) {
        std::size_t rows = row_count(tables_, static_cast<int>(t));
        for (const char* column : schema()[t].columns) {
            auto& index = impl_->indexes[t][column];
            for (std::uint32_t r = 0; r < rows; ++r)
                index[column_value(tables_, static_cast<int>(t), r, column)].push_back(r);
        }
    }

    // join plans: group consecutive oriented joins into per-table hops
    for (std::size_t c = 0; c < spec_.classmaps.size(); ++c) {
        const ClassMap& cm = spec_.classmaps[c];
        for (std::size_t b = 0; b < cm.bridges.size(); ++b) {
            const PropertyBridge& bridge = cm.bridges[b];
            if (bridge.source != PropertyBridge::Source::RefersTo) continue;
            std::vector<Impl::Hop> hops;
            int frontier = table_index(cm.table);
            for (const auto& join : bridge.joins) {
                int lt = table_index(join.left.table);
                int rt = table_index(join.right.table);
                // parse_mapping already oriented the chain left-to-right
                assert(lt == frontier);
                if (!hops.empty() && hops.back().from_table == lt && hops.back().to_table == rt) {
                    hops.back().columns.emplace_back(join.left.column, join.right.column);
                } else {
                    hops.push_back({lt, rt, {{join.left.column, join.right.column}}});
                }
                frontier = rt;
            }
            impl_->join_plans[{c, b}] = std::move(hops);
        }
    }

    for (const auto& link : spec_.sameas)
        impl_->sameas[{link.classmap, link.key}].push_back(link.external_iri);
}

namespace {

std::string encoded_key(const store::TableSet& tables, int table, std::size_t row) {
    std::string out;
    const auto& keys = schema()[static_cast<std::size_t>(table)].keys;
    for (std::size_t i = 0; i < keys.size(); ++i) {
        if (i) out += '/';
        out += util::percent_encode(column_value(tables, table, row, keys[i]));
    }
    return out;
}

}  // namespace

std::string VirtualGraph::current_uri(const ClassMap& cm, std::size_t row_index) const {
    int t = table_index(cm.table);
    RowView row = [&](const ColumnRef& ref) -> std::optional<std::string> {
        if (ref.table != cm.table) return std::nullopt;
        return column_value(tables_, t, row_index, ref.column);
    };
    return expand_pattern(cm.uri_pattern, row, base_);
}

std::string VirtualGraph::versioned_uri(std::string_view classmap_path, std::string_view key,
                                        std::string_view label) const {
    return base_ + "/resource/" + std::string(classmap_path) + "/" + std::string(key) + "/" +
           std::string(label);
}

std::string VirtualGraph::change_predicate(ChangeType c) const {
    switch (c) {
        case ChangeType::New: return vocab_ + "changeNew";
        case ChangeType::Name: return vocab_ + "changeName";
        case ChangeType::Seq: return vocab_ + "changeSequence";
        case ChangeType::Ns: return vocab_ + "changeNameSequence";
        case ChangeType::Del: return vocab_ + "changeDelete";
        case ChangeType::Fw: return vocab_ + "changeForward";
        case ChangeType::Aph: return vocab_ + "changeAddParent";
        case ChangeType::Rph: return vocab_ + "changeRemoveParent";
    }
    return vocab_ + "change";
}

std::string VirtualGraph::change_uri(const ChangeEvent& ev) const {
    std::string uri = base_ + "/resource/changes/" + ev.entity_id + "/" +
                      registry_.label_of(ev.at) + "/" + std::string(history::to_string(ev.change));
    if (ev.parent) uri += "/" + *ev.parent;
    return uri;
}

// The first classmap projecting the given virtual table, if any.
namespace {
const ClassMap* classmap_for_table(const MappingSpec& spec, std::string_view table) {
    for (const auto& cm : spec.classmaps)
        if (cm.table == table) return &cm;
    return nullptr;
}
}  // namespace

void VirtualGraph::emit_current(std::size_t cm_index, std::uint32_t row_index,
                                std::vector<Triple>& out) const {
    const ClassMap& cm = spec_.classmaps[cm_index];
    int t = table_index(cm.table);
    RowView row = [&](const ColumnRef& ref) -> std::optional<std::string> {
        if (ref.table != cm.table) return std::nullopt;
        return column_value(tables_, t, row_index, ref.column);
    };
    Term subject = Term::iri(expand_pattern(cm.uri_pattern, row, base_));

    out.push_back({subject, Term::iri(std::string(kRdfType)), Term::iri(cm.rdf_class)});

    for (std::size_t b = 0; b < cm.bridges.size(); ++b) {
        const PropertyBridge& bridge = cm.bridges[b];
        if (bridge.condition) {
            auto v = row(bridge.condition->column);
            if (!v || *v != bridge.condition->value) continue;
        }
        Term predicate = Term::iri(bridge.property);
        switch (bridge.source) {
            case PropertyBridge::Source::Column: {
                auto v = row(bridge.column);
                if (v) out.push_back({subject, predicate, Term::literal(*v)});
                break;
            }
            case PropertyBridge::Source::Pattern: {
                auto v = expand_literal_pattern(bridge.pattern, row);
                if (v) out.push_back({subject, predicate, Term::literal(*v)});
                break;
            }
            case PropertyBridge::Source::RefersTo: {
                const ClassMap* target = spec_.classmap(bridge.refers_to);
                const auto& hops = impl_->join_plans.at({cm_index, b});
                std::vector<std::uint32_t> frontier{row_index};
                int frontier_table = t;
                for (const auto& hop : hops) {
                    std::vector<std::uint32_t> next;
                    for (std::uint32_t r : frontier) {
                        std::string value =
                            column_value(tables_, frontier_table, r, hop.columns[0].first);
                        const auto* candidates =
                            impl_->lookup(hop.to_table, hop.columns[0].second, value);
                        if (!candidates) continue;
                        for (std::uint32_t candidate : *candidates) {
                            bool ok = true;
                            for (std::size_t k = 1; k < hop.columns.size() && ok; ++k)
                                ok = column_value(tables_, frontier_table, r,
                                                  hop.columns[k].first) ==
                                     column_value(tables_, hop.to_table, candidate,
                                                  hop.columns[k].second);
                            if (ok) next.push_back(candidate);
                        }
                    }
                    frontier = std::move(next);
                    frontier_table = hop.to_table;
                }
                for (std::uint32_t target_row : frontier)
                    out.push_back(
                        {subject, predicate, Term::iri(current_uri(*target, target_row))});
                break;
            }
        }
    }

    auto sit = impl_->sameas.find({cm.name, encoded_key(tables_, t, row_index)});
    if (sit != impl_->sameas.end())
        for (const auto& iri : sit->second)
            out.push_back({subject, Term::iri(std::string(kOwlSameAs)), Term::iri(iri)});

    out.push_back({subject, Term::iri(vocab_ + "label"), Term::literal("now")});
    if (registry_.current() > 0)
        out.push_back({subject, Term::iri(vocab_ + "version"),
                       Term::literal(registry_.label_of(registry_.current()))});
}

void VirtualGraph::emit_versioned(std::size_t cm_index, const std::string& entity_id,
                                  store::Ordinal v, std::vector<Triple>& out) const {
    const ClassMap& cm = spec_.classmaps[cm_index];
    const int t = table_index(cm.table);
    const bool is_hairpin = t == kHairpins;
    const EntityKind kind = is_hairpin ? EntityKind::Hairpin : EntityKind::Mature;
    const std::string& label = registry_.label_of(v);
    const char* key_column = schema()[static_cast<std::size_t>(t)].keys.front();

    // versioned state; null for a tombstone version
    const std::string* hist_name = nullptr;
    const std::string* hist_seq = nullptr;
    if (is_hairpin) {
        if (const auto* rec = history_.hairpin_state_at(entity_id, v)) {
            hist_name = &rec->name;
            hist_seq = &rec->sequence;
        }
    } else {
        if (const auto* rec = history_.mature_state_at(entity_id, v)) {
            hist_name = &rec->name;
            hist_seq = &rec->sequence;
        }
    }
    const bool tombstone = !hist_name && history_.tombstone_at(entity_id, kind, v);
    if (!hist_name && !tombstone)
        throw NotAliveAtVersion(entity_id + " does not exist at version " + label);

    // current-table row, when the entity still exists there
    std::optional<std::uint32_t> current_row;
    if (const auto* rows = impl_->lookup(t, key_column, entity_id))
        if (!rows->empty()) current_row = rows->front();

    RowView row = [&](const ColumnRef& ref) -> std::optional<std::string> {
        if (ref.table != cm.table) return std::nullopt;
        if (ref.column == key_column) return entity_id;
        if (hist_name && ref.column == "name") return *hist_name;
        if (hist_seq && ref.column == "sequence") return *hist_seq;
        if (current_row) return column_value(tables_, t, *current_row, ref.column);
        return std::nullopt;
    };

    Term subject = Term::iri(expand_pattern(cm.uri_pattern, row, base_) + "/" + label);
    out.push_back({subject, Term::iri(std::string(kRdfType)), Term::iri(cm.rdf_class)});

    if (!tombstone) {
        for (const auto& bridge : cm.bridges) {
            if (bridge.condition) {
                auto cond = row(bridge.condition->column);
                if (!cond || *cond != bridge.condition->value) continue;
            }
            Term predicate = Term::iri(bridge.property);
            switch (bridge.source) {
                case PropertyBridge::Source::Column: {
                    auto value = row(bridge.column);
                    if (value) out.push_back({subject, predicate, Term::literal(*value)});
                    break;
                }
                case PropertyBridge::Source::Pattern: {
                    auto value = expand_literal_pattern(bridge.pattern, row);
                    if (value) out.push_back({subject, predicate, Term::literal(*value)});
                    break;
                }
                case PropertyBridge::Source::RefersTo: {
                    // Only the parent link is versioned; other join chains
                    // have no history and are omitted here.
                    if (bridge.link_role == PropertyBridge::LinkRole::None) break;
                    const ClassMap* target = spec_.classmap(bridge.refers_to);
                    std::vector<std::string> others =
                        bridge.link_role == PropertyBridge::LinkRole::ParentOfMature
                            ? history_.parents_at(entity_id, v)
                            : history_.children_at(entity_id, v);
                    for (const auto& other : others) {
                        const char* other_key =
                            schema()[static_cast<std::size_t>(table_index(target->table))]
                                .keys.front();
                        RowView other_row = [&](const ColumnRef& ref) -> std::optional<std::string> {
                            if (ref.table == target->table && ref.column == other_key) return other;
                            return std::nullopt;
                        };
                        out.push_back({subject, predicate,
                                       Term::iri(expand_pattern(target->uri_pattern, other_row,
                                                                base_) +
                                                 "/" + label)});
                    }
                    break;
                }
            }
        }
    }

    out.push_back({subject, Term::iri(vocab_ + "version"), Term::literal(label)});

    auto range = history_.existence_range(entity_id, kind);
    std::string current_form = expand_pattern(cm.uri_pattern, row, base_);
    if (range && v - 1 >= range->first)
        out.push_back({subject, Term::iri(vocab_ + "prevVersion"),
                       Term::iri(current_form + "/" + registry_.label_of(v - 1))});
    if (range && v + 1 <= range->second)
        out.push_back({subject, Term::iri(vocab_ + "nextVersion"),
                       Term::iri(current_form + "/" + registry_.label_of(v + 1))});

    for (const ChangeEvent* ev : history_.events_for(entity_id))
        if (ev->at == v)
            out.push_back({subject, Term::iri(change_predicate(ev->change)),
                           Term::iri(change_uri(*ev))});
}

std::vector<Triple> VirtualGraph::change_resource_triples(const ChangeEvent& ev) const {
    std::vector<Triple> out;
    Term subject = Term::iri(change_uri(ev));
    const std::string& label = registry_.label_of(ev.at);
    auto lit = [](std::string v) { return Term::literal(std::move(v)); };

    out.push_back({subject, Term::iri(std::string(kRdfType)), Term::iri(vocab_ + "Change")});
    out.push_back({subject, Term::iri(vocab_ + "changeType"),
                   lit(std::string(history::to_string(ev.change)))});
    out.push_back({subject, Term::iri(vocab_ + "atVersion"), lit(label)});

    const char* table = ev.kind == EntityKind::Hairpin ? "diana_hairpins" : "diana_matures";
    if (const ClassMap* cm = classmap_for_table(spec_, table)) {
        const char* key = schema()[static_cast<std::size_t>(table_index(cm->table))].keys.front();
        RowView row = [&](const ColumnRef& ref) -> std::optional<std::string> {
            if (ref.table == cm->table && ref.column == key) return ev.entity_id;
            return std::nullopt;
        };
        out.push_back({subject, Term::iri(vocab_ + "affects"),
                       Term::iri(expand_pattern(cm->uri_pattern, row, base_) + "/" + label)});
    }

    if (ev.old_name) out.push_back({subject, Term::iri(vocab_ + "oldValue"), lit(*ev.old_name)});
    if (ev.old_sequence)
        out.push_back({subject, Term::iri(vocab_ + "oldValue"), lit(*ev.old_sequence)});
    if (ev.new_name) out.push_back({subject, Term::iri(vocab_ + "newValue"), lit(*ev.new_name)});
    if (ev.new_sequence)
        out.push_back({subject, Term::iri(vocab_ + "newValue"), lit(*ev.new_sequence)});

    if (ev.forward_to) {
        if (const ClassMap* cm = classmap_for_table(spec_, "diana_hairpins")) {
            RowView row = [&](const ColumnRef& ref) -> std::optional<std::string> {
                if (ref.table == cm->table && ref.column == "mima_id") return *ev.forward_to;
                return std::nullopt;
            };
            out.push_back({subject, Term::iri(vocab_ + "forwardTo"),
                           Term::iri(expand_pattern(cm->uri_pattern, row, base_))});
        }
    }
    if (ev.parent) {
        if (const ClassMap* cm = classmap_for_table(spec_, "diana_hairpins")) {
            RowView row = [&](const ColumnRef& ref) -> std::optional<std::string> {
                if (ref.table == cm->table && ref.column == "mima_id") return *ev.parent;
                return std::nullopt;
            };
            out.push_back({subject, Term::iri(vocab_ + "parentHairpin"),
                           Term::iri(expand_pattern(cm->uri_pattern, row, base_) + "/" + label)});
        }
    }
    if (!ev.cause.empty()) out.push_back({subject, Term::iri(vocab_ + "cause"), lit(ev.cause)});
    return out;
}

// ---------------------------------------------------------------------------
// URI resolution

std::vector<Triple> VirtualGraph::triples_for_resource(const std::string& uri) const {
    const std::string prefix = base_ + "/resource/";
    if (uri.compare(0, prefix.size(), prefix) != 0)
        throw UnknownResource("not under " + prefix + ": " + uri);
    std::string_view rest = std::string_view(uri).substr(prefix.size());

    for (std::size_t c = 0; c < spec_.classmaps.size(); ++c) {
        const ClassMap& cm = spec_.classmaps[c];
        auto values = match_pattern(cm.uri_pattern, rest);
        if (!values) continue;
        int t = table_index(cm.table);
        // find the row by the key columns, then check all placeholders
        std::vector<std::uint32_t> candidates;
        bool first = true;
        for (std::size_t i = 0; i < cm.uri_pattern.columns.size(); ++i) {
            const auto* rows = impl_->lookup(t, cm.uri_pattern.columns[i].column, (*values)[i]);
            if (!rows) { candidates.clear(); break; }
            if (first) {
                candidates = *rows;
                first = false;
            } else {
                std::vector<std::uint32_t> keep;
                for (std::uint32_t r : candidates)
                    if (std::find(rows->begin(), rows->end(), r) != rows->end()) keep.push_back(r);
                candidates = std::move(keep);
            }
        }
        if (candidates.empty()) throw UnknownResource("no row behind " + uri);
        std::vector<Triple> out;
        emit_current(c, candidates.front(), out);
        return out;
    }
    throw UnknownResource("no ClassMap pattern matches " + uri);
}

std::vector<Triple> VirtualGraph::versioned_triples(const std::string& uri,
                                                    const std::string& label) const {
    const std::string prefix = base_ + "/resource/";
    if (uri.compare(0, prefix.size(), prefix) != 0)
        throw UnknownResource("not under " + prefix + ": " + uri);
    std::string_view rest = std::string_view(uri).substr(prefix.size());
    std::string suffix = "/" + label;
    if (rest.size() > suffix.size() &&
        rest.substr(rest.size() - suffix.size()) == suffix)
        rest.remove_suffix(suffix.size());

    if (!registry_.has(label)) throw UnknownResource("unknown version " + label);
    store::Ordinal v = registry_.ordinal_of(label);

    for (std::size_t c = 0; c < spec_.classmaps.size(); ++c) {
        const ClassMap& cm = spec_.classmaps[c];
        auto values = match_pattern(cm.uri_pattern, rest);
        if (!values) continue;
        int t = table_index(cm.table);
        if (t != kHairpins && t != kMatures)
            throw UnknownResource(cm.name + " resources are not versioned");
        const std::string& entity_id = (*values)[0];
        EntityKind kind = t == kHairpins ? EntityKind::Hairpin : EntityKind::Mature;
        if (!history_.known(entity_id, kind))
            throw UnknownResource("no history for " + entity_id);
        std::vector<Triple> out;
        emit_versioned(c, entity_id, v, out);
        return out;
    }
    throw UnknownResource("no ClassMap pattern matches " + uri);
}

std::vector<Triple> VirtualGraph::change_triples_for_uri(const std::string& uri) const {
    const std::string prefix = base_ + "/resource/changes/";
    if (uri.compare(0, prefix.size(), prefix) != 0)
        throw UnknownResource("not a change resource: " + uri);
    auto segments = util::split(std::string_view(uri).substr(prefix.size()), '/');
    if (segments.size() != 3 && segments.size() != 4)
        throw UnknownResource("malformed change resource: " + uri);
    std::string entity(segments[0]);
    std::string label(segments[1]);
    std::string type(segments[2]);
    std::optional<std::string> parent;
    if (segments.size() == 4) parent = std::string(segments[3]);

    if (!registry_.has(label)) throw UnknownResource("unknown version " + label);
    store::Ordinal at = registry_.ordinal_of(label);
    auto change = history::parse_change_type(type);
    if (!change) throw UnknownResource("unknown change type " + type);

    for (const ChangeEvent* ev : history_.events_for(entity)) {
        if (ev->at != at || ev->change != *change) continue;
        if (parent != ev->parent) continue;
        return change_resource_triples(*ev);
    }
    throw UnknownResource("no such change: " + uri);
}

// ---------------------------------------------------------------------------
// enumeration

struct VirtualGraph::Item {
    enum class Kind { Current, Versioned, Change };
    Kind kind;
    std::size_t cm_index = 0;
    std::uint32_t row = 0;
    const std::string* entity = nullptr;
    store::Ordinal v = 0;
    const ChangeEvent* event = nullptr;
};

std::vector<VirtualGraph::Item> VirtualGraph::plan(Scope scope) const {
    std::vector<Item> items;
    if (scope == Scope::Current || scope == Scope::All) {
        for (std::size_t c = 0; c < spec_.classmaps.size(); ++c) {
            int t = table_index(spec_.classmaps[c].table);
            std::size_t rows = row_count(tables_, t);
            for (std::uint32_t r = 0; r < rows; ++r)
                items.push_back({Item::Kind::Current, c, r, nullptr, 0, nullptr});
        }
    }
    if (scope == Scope::Versioned || scope == Scope::All) {
        for (std::size_t c = 0; c < spec_.classmaps.size(); ++c) {
            const ClassMap& cm = spec_.classmaps[c];
            int t = table_index(cm.table);
            if (t == kHairpins) {
                for (const auto& [id, records] : history_.hairpin_records) {
                    auto range = history_.existence_range(id, EntityKind::Hairpin);
                    for (store::Ordinal v = range->first; v <= range->second; ++v)
                        items.push_back({Item::Kind::Versioned, c, 0, &id, v, nullptr});
                }
            } else if (t == kMatures) {
                for (const auto& [id, records] : history_.mature_state_records) {
                    auto range = history_.existence_range(id, EntityKind::Mature);
                    for (store::Ordinal v = range->first; v <= range->second; ++v)
                        items.push_back({Item::Kind::Versioned, c, 0, &id, v, nullptr});
                }
            }
        }
        for (const auto& ev : history_.events)
            items.push_back({Item::Kind::Change, 0, 0, nullptr, 0, &ev});
    }
    return items;
}

void VirtualGraph::run_item(const Item& item, std::vector<Triple>& out) const {
    switch (item.kind) {
        case Item::Kind::Current: emit_current(item.cm_index, item.row, out); break;
        case Item::Kind::Versioned: emit_versioned(item.cm_index, *item.entity, item.v, out); break;
        case Item::Kind::Change: {
            auto triples = change_resource_triples(*item.event);
            out.insert(out.end(), triples.begin(), triples.end());
            break;
        }
    }
}

std::vector<Triple> VirtualGraph::enumerate_all_serial(Scope scope) const {
    std::vector<Triple> out;
    for (const Item& item : plan(scope)) run_item(item, out);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<Triple> VirtualGraph::enumerate_all(Scope scope) const {
#ifdef _OPENMP
    std::vector<Item> items = plan(scope);
    std::vector<std::vector<Triple>> buffers;
    #pragma omp parallel
    {
        #pragma omp single
        buffers.resize(static_cast<std::size_t>(omp_get_num_threads()));
        std::vector<Triple>& buffer = buffers[static_cast<std::size_t>(omp_get_thread_num())];
        #pragma omp for schedule(dynamic, 64)
        for (std::size_t i = 0; i < items.size(); ++i) run_item(items[i], buffer);
    }
    std::size_t total = 0;
    for (const auto& b : buffers) total += b.size();
    std::vector<Triple> out;
    out.reserve(total);
    for (auto& b : buffers)
        out.insert(out.end(), std::make_move_iterator(b.begin()), std::make_move_iterator(b.end()));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
#else
    return enumerate_all_serial(scope);
#endif
}

rdf::TripleStore build_graph(const VirtualGraph& graph, Scope scope) {
    return rdf::TripleStore(graph.enumerate_all(scope));
}

}  // namespace mirlod::mapping
