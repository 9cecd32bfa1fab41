#pragma once
// RDF terms, triples, Turtle / N-Triples serialization, and an immutable
// in-memory triple store with SPO/POS/OSP indexes backing the match()
// interface the query engine evaluates against.

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mirlod/errors.hpp"

namespace mirlod::rdf {

struct RdfParseError : Error {
    RdfParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line(line) {}
    std::size_t line;
};

struct Term {
    enum class Kind { Iri, Literal, Blank };

    Kind kind = Kind::Iri;
    std::string value;
    std::string datatype;  // empty for plain literals and non-literals

    static Term iri(std::string v) { return {Kind::Iri, std::move(v), {}}; }
    static Term literal(std::string v, std::string dt = {}) {
        return {Kind::Literal, std::move(v), std::move(dt)};
    }
    static Term blank(std::string label) { return {Kind::Blank, std::move(label), {}}; }

    bool is_iri() const { return kind == Kind::Iri; }
    bool is_literal() const { return kind == Kind::Literal; }

    // N-Triples form of the term: <iri>, "literal", "literal"^^<dt>, _:b.
    std::string n3() const;

    auto operator<=>(const Term&) const = default;
};

struct Triple {
    Term subject;
    Term predicate;
    Term object;

    auto operator<=>(const Triple&) const = default;
};

std::string escape_literal(std::string_view value);

// Canonical N-Triples: one line per triple, sorted by (s, p, o).
std::string serialize_ntriples(std::span<const Triple> triples);
std::vector<Triple> parse_ntriples(std::string_view text);

// Deterministic Turtle: prefix block, then subjects in canonical order
// with `;`-grouped predicates. `prefixes` maps prefix -> namespace IRI.
std::string serialize_turtle(std::span<const Triple> triples,
                             const std::vector<std::pair<std::string, std::string>>& prefixes);
std::vector<Triple> parse_turtle(std::string_view text);
std::vector<Triple> parse_turtle(std::string_view text,
                                 std::map<std::string, std::string>* prefixes_out);

// Sorted, deduplicated, immutable triple set.
class TripleStore {
public:
    TripleStore() = default;
    explicit TripleStore(std::vector<Triple> triples);

    std::size_t size() const { return triples_.size(); }
    const std::vector<Triple>& triples() const { return triples_; }
    bool contains(const Triple& t) const;

    // All triples matching the given pattern; unset positions are
    // wildcards. The most selective available index is used.
    std::vector<Triple> match(const std::optional<Term>& s, const std::optional<Term>& p,
                              const std::optional<Term>& o) const;

private:
    std::vector<Triple> triples_;        // sorted (s, p, o)
    std::vector<std::uint32_t> pos_;     // indices sorted by (p, o, s)
    std::vector<std::uint32_t> osp_;     // indices sorted by (o, s, p)
};

}  // namespace mirlod::rdf
