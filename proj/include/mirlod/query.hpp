#pragma once
// SPARQL subset: SELECT queries over basic graph patterns with one
// optional UNION block and LIMIT. Evaluation runs against any graph
// exposing match(s?, p?, o?), here the immutable rdf::TripleStore.
//
//   PREFIX pfx: <iri> ...
//   SELECT ?v ... WHERE { pattern. ... [{ {group} UNION {group} ... }]
//                         pattern. ... } [LIMIT n]
//
// rdf:, owl: and the configurable diana: prefix are built in. FILTER,
// OPTIONAL and the rest of SPARQL 1.1 are rejected as unsupported.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mirlod/rdf.hpp"

namespace mirlod::query {

struct ParseError : Error {
    ParseError(std::size_t position, const std::string& what)
        : Error("query position " + std::to_string(position) + ": " + what), position(position) {}
    std::size_t position;
};
struct UnknownPrefix : Error { using Error::Error; };
struct UnsupportedFeature : Error { using Error::Error; };
struct UnknownFormat : Error { using Error::Error; };

struct PatternTerm {
    enum class Kind { Variable, Iri, Literal };
    Kind kind = Kind::Variable;
    std::string value;  // variable name without '?', IRI, or literal value

    static PatternTerm variable(std::string name) { return {Kind::Variable, std::move(name)}; }
    static PatternTerm iri(std::string v) { return {Kind::Iri, std::move(v)}; }
    static PatternTerm literal(std::string v) { return {Kind::Literal, std::move(v)}; }
    bool is_variable() const { return kind == Kind::Variable; }
    bool operator==(const PatternTerm&) const = default;
};

struct TriplePattern {
    PatternTerm subject;
    PatternTerm predicate;
    PatternTerm object;
    bool operator==(const TriplePattern&) const = default;
};

struct Query {
    std::vector<std::string> select_vars;                    // without '?'
    std::vector<TriplePattern> shared;                       // patterns outside the UNION
    std::vector<std::vector<TriplePattern>> alternatives;    // UNION branches (possibly empty)
    std::optional<long> limit;
};

// One result row; variables left unbound by a UNION branch are absent.
using Row = std::map<std::string, rdf::Term>;

struct BindingSet {
    std::vector<std::string> vars;  // select order
    std::vector<Row> rows;
};

using PrefixMap = std::map<std::string, std::string>;

// Built-in prefixes for a given diana: namespace.
PrefixMap default_prefixes(const std::string& vocab_ns);

Query parse_query(std::string_view text, const PrefixMap& builtin_prefixes);

// Bag-semantics evaluation: each UNION branch joins with the shared
// patterns; rows are canonically ordered (per select variable: unbound
// first, then by term) before LIMIT applies.
BindingSet evaluate(const Query& q, const rdf::TripleStore& graph);

enum class ResultFormat { Json, Tsv };
std::optional<ResultFormat> parse_result_format(std::string_view s);

std::string serialize_results(const BindingSet& b, ResultFormat format);
BindingSet parse_results_json(std::string_view text);

}  // namespace mirlod::query
