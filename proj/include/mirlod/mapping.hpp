#pragma once
// Declarative table-to-RDF mapping and the on-demand virtual graph.
//
// The mapping document is a Turtle-style directive file of ClassMap and
// PropertyBridge blocks (see the README for the full grammar). A ClassMap
// projects one virtual table to an RDF class, minting resource IRIs from
// a URI pattern with @@table.column@@ placeholders; its PropertyBridges
// produce property values from columns, literal patterns, or join chains
// to other ClassMaps.
//
// The virtual schema exposed to mapping documents:
//   diana_hairpins(mima_id*, name, sequence, species, chromosome, strand,
//                  start, end)
//   diana_matures(mimat*, name, sequence, species)
//   diana_transcripts(tid*, enstid, species, strand, location)
//   diana_proteingenes(ensgid*, enstid, name, description)
//   diana_keggs(kegg_id*, name)
//   diana_tissues(name*, species*)
//   diana_mature_hairpin_conn(mimat, mima_id)
//   diana_microt5_interactions(mimat, tid)
//   diana_proteingene_kegg_conn(ensgid, kegg_id)
//   diana_mature_tissue_conn(mimat, name, species)
// (* = key columns; key columns must all appear in a ClassMap's pattern.)
//
// Versioned resources (<current uri>/<label>) draw name and sequence from
// the history records valid at that label, inherit the other columns from
// the current tables when the entity still exists there, and carry
// version navigation plus change-link triples.

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mirlod/history.hpp"
#include "mirlod/rdf.hpp"
#include "mirlod/versionstore.hpp"

namespace mirlod::mapping {

struct UnknownDirective : Error { using Error::Error; };
struct DanglingBelongsTo : Error { using Error::Error; };
struct BadPattern : Error { using Error::Error; };
struct BadBridge : Error { using Error::Error; };
struct BadJoin : Error { using Error::Error; };
struct BadColumn : Error { using Error::Error; };
struct MissingColumn : Error { using Error::Error; };
struct UnknownResource : Error { using Error::Error; };
struct NotAliveAtVersion : Error { using Error::Error; };

struct ColumnRef {
    std::string table;
    std::string column;
    bool operator==(const ColumnRef&) const = default;
    std::string str() const { return table + "." + column; }
};

// Template with @@table.column@@ placeholders. literals has one more
// element than columns; the expansion is
// literals[0] value[0] literals[1] ... value[n-1] literals[n].
struct UriPattern {
    std::string text;
    std::vector<std::string> literals;
    std::vector<ColumnRef> columns;

    static UriPattern parse(std::string_view text);  // throws BadPattern
};

struct JoinCondition {
    ColumnRef left;
    ColumnRef right;
};

// Minimal row predicate: table.column = 'value'.
struct Condition {
    ColumnRef column;
    std::string value;
};

struct PropertyBridge {
    enum class Source { Column, Pattern, RefersTo };

    // How a RefersTo bridge relates to the mature/hairpin parent link,
    // which is the one relation the history module versions.
    enum class LinkRole { None, ParentOfMature, MaturesOfHairpin };

    std::string name;
    std::string property;  // absolute predicate IRI
    std::string definition_label;
    Source source = Source::Column;
    ColumnRef column;       // Source::Column
    UriPattern pattern;     // Source::Pattern (literal-producing)
    std::string refers_to;  // Source::RefersTo: target ClassMap name
    std::vector<JoinCondition> joins;
    std::optional<Condition> condition;
    LinkRole link_role = LinkRole::None;
};

struct ClassMap {
    std::string name;
    UriPattern uri_pattern;
    std::string rdf_class;  // absolute IRI
    std::string definition_label;
    std::string table;  // the table all pattern placeholders reference
    std::vector<PropertyBridge> bridges;
};

struct SameAsLink {
    std::string classmap;
    std::string key;  // key column values, percent-encoded, '/'-joined
    std::string external_iri;
};

struct MappingSpec {
    std::map<std::string, std::string> prefixes;
    std::vector<ClassMap> classmaps;
    std::vector<SameAsLink> sameas;

    const ClassMap* classmap(std::string_view name) const;
    // Namespace bound to the diana: prefix; throws when undeclared.
    const std::string& vocab_ns() const;
};

// Parses and validates a mapping document. Every bridge is attached to
// its ClassMap; directives outside the supported set are rejected.
MappingSpec parse_mapping(std::string_view document);

// sameas.tsv rows: classmap, key, external IRI.
std::vector<SameAsLink> load_sameas(const std::filesystem::path& file);

// Resolves table.column against a concrete row; nullopt means the column
// has no value in this context.
using RowView = std::function<std::optional<std::string>(const ColumnRef&)>;

// Placeholder substitution with percent-encoded values, then base-IRI
// expansion to <base>/resource/<expanded>.
std::string expand_pattern(const UriPattern& pattern, const RowView& row,
                           const std::string& base);

enum class Scope { Current, Versioned, All };
std::optional<Scope> parse_scope(std::string_view s);

class VirtualGraph {
public:
    VirtualGraph(const MappingSpec& spec, const store::TableSet& tables,
                 const history::History& hist, const store::VersionRegistry& registry,
                 std::string base);

    const std::string& base() const { return base_; }
    const MappingSpec& spec() const { return spec_; }
    const store::VersionRegistry& registry() const { return registry_; }
    const history::History& hist() const { return history_; }

    // Description of a current resource: rdf:type, one triple per
    // applicable bridge (duplicates from join fan-in preserved),
    // owl:sameAs links, diana:label "now" and diana:version.
    std::vector<rdf::Triple> triples_for_resource(const std::string& uri) const;

    // Description valid at a version. `uri` may be the current or the
    // versioned form; `label` names the version.
    std::vector<rdf::Triple> versioned_triples(const std::string& uri,
                                               const std::string& label) const;

    std::vector<rdf::Triple> change_resource_triples(const history::ChangeEvent& ev) const;

    // Description of a change resource given its IRI.
    std::vector<rdf::Triple> change_triples_for_uri(const std::string& uri) const;

    // Deterministic, duplicate-free stream in canonical (s, p, o) order.
    // enumerate_all runs the data-parallel path when OpenMP is enabled;
    // enumerate_all_serial is the reference implementation kept for
    // testing and benchmarking.
    std::vector<rdf::Triple> enumerate_all(Scope scope) const;
    std::vector<rdf::Triple> enumerate_all_serial(Scope scope) const;

    // IRI helpers.
    std::string current_uri(const ClassMap& cm, std::size_t row_index) const;
    std::string versioned_uri(std::string_view classmap_path, std::string_view key,
                              std::string_view label) const;
    std::string change_uri(const history::ChangeEvent& ev) const;

    // The versioned description predicate for a change type
    // (diana:changeNew ... diana:changeRemoveParent).
    std::string change_predicate(history::ChangeType c) const;

private:
    struct Item;

    void emit_current(std::size_t cm_index, std::uint32_t row_index,
                      std::vector<rdf::Triple>& out) const;
    void emit_versioned(std::size_t cm_index, const std::string& entity_id, store::Ordinal v,
                        std::vector<rdf::Triple>& out) const;
    std::vector<Item> plan(Scope scope) const;
    void run_item(const Item& item, std::vector<rdf::Triple>& out) const;

    const MappingSpec& spec_;
    const store::TableSet& tables_;
    const history::History& history_;
    const store::VersionRegistry& registry_;
    std::string base_;
    std::string vocab_;  // diana namespace

    struct Impl;
    std::shared_ptr<Impl> impl_;  // indexes and per-bridge join plans
};

// Materializes the graph the query endpoint evaluates against.
rdf::TripleStore build_graph(const VirtualGraph& graph, Scope scope = Scope::All);

}  // namespace mirlod::mapping
