#include "mirlod/query.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include <json.hpp>

#include "mirlod/util.hpp"

namespace mirlod::query {

using rdf::Term;
using rdf::Triple;

namespace {

constexpr std::string_view kRdfNs = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
constexpr std::string_view kOwlNs = "http://www.w3.org/2002/07/owl#";

const std::set<std::string> kUnsupported = {
    "FILTER",   "OPTIONAL", "ORDER",    "BY",     "GROUP",  "HAVING", "DISTINCT",
    "REDUCED",  "CONSTRUCT", "ASK",     "DESCRIBE", "OFFSET", "BIND",  "VALUES",
    "GRAPH",    "SERVICE",  "MINUS",    "EXISTS", "NOT",    "INSERT", "DELETE",
    "FROM",     "NAMED"};

struct Lexer {
    std::string_view text;
    std::size_t pos = 0;

    std::size_t mark() const { return pos; }

    void skip_ws() {
        while (pos < text.size()) {
            char c = text[pos];
            if (std::isspace(static_cast<unsigned char>(c))) { ++pos; continue; }
            if (c == '#') {
                while (pos < text.size() && text[pos] != '\n') ++pos;
                continue;
            }
            break;
        }
    }

    bool eof() {
        skip_ws();
        return pos >= text.size();
    }

    char peek_char() {
        skip_ws();
        return pos < text.size() ? text[pos] : '\0';
    }

    bool accept_char(char c) {
        skip_ws();
        if (pos < text.size() && text[pos] == c) { ++pos; return true; }
        return false;
    }

    // bare word: letters, digits, '_' (used for keywords)
    std::string word() {
        skip_ws();
        std::size_t start = pos;
        while (pos < text.size()) {
            char c = text[pos];
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') ++pos;
            else break;
        }
        return std::string(text.substr(start, pos - start));
    }

    std::string upper_word() {
        std::string w = word();
        for (char& c : w) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        return w;
    }
};

std::string local_name(Lexer& lex) {
    std::size_t start = lex.pos;
    while (lex.pos < lex.text.size()) {
        char c = lex.text[lex.pos];
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-') ++lex.pos;
        else break;
    }
    return std::string(lex.text.substr(start, lex.pos - start));
}

}  // namespace

PrefixMap default_prefixes(const std::string& vocab_ns) {
    return {{"rdf", std::string(kRdfNs)}, {"owl", std::string(kOwlNs)}, {"diana", vocab_ns}};
}

namespace {

struct Parser {
    Lexer lex;
    PrefixMap prefixes;

    explicit Parser(std::string_view text, const PrefixMap& builtins)
        : lex{text}, prefixes(builtins) {}

    [[noreturn]] void fail(const std::string& what) { throw ParseError(lex.mark(), what); }

    void check_supported(const std::string& upper) {
        if (kUnsupported.count(upper))
            throw UnsupportedFeature(upper + " is not part of the supported subset");
    }

    std::string expect_iri_ref() {
        lex.skip_ws();
        if (lex.peek_char() != '<') fail("expected <IRI>");
        ++lex.pos;
        std::size_t end = lex.text.find('>', lex.pos);
        if (end == std::string_view::npos) fail("unterminated IRI");
        std::string iri(lex.text.substr(lex.pos, end - lex.pos));
        lex.pos = end + 1;
        return iri;
    }

    std::string parse_literal_value() {
        // caller saw '"'
        ++lex.pos;
        std::string value;
        while (true) {
            if (lex.pos >= lex.text.size()) fail("unterminated literal");
            char c = lex.text[lex.pos++];
            if (c == '"') break;
            if (c == '\\') {
                if (lex.pos >= lex.text.size()) fail("dangling escape");
                char e = lex.text[lex.pos++];
                switch (e) {
                    case '"': value.push_back('"'); break;
                    case '\\': value.push_back('\\'); break;
                    case 'n': value.push_back('\n'); break;
                    case 't': value.push_back('\t'); break;
                    case 'r': value.push_back('\r'); break;
                    default: fail("unknown escape in literal");
                }
                continue;
            }
            value.push_back(c);
        }
        return value;
    }

    PatternTerm parse_term(bool allow_literal) {
        lex.skip_ws();
        char c = lex.peek_char();
        if (c == '?') {
            ++lex.pos;
            std::string name = local_name(lex);
            if (name.empty()) fail("empty variable name");
            return PatternTerm::variable(name);
        }
        if (c == '<') return PatternTerm::iri(expect_iri_ref());
        if (c == '"') {
            if (!allow_literal) fail("literal not allowed here");
            return PatternTerm::literal(parse_literal_value());
        }
        // prefixed name or 'a'
        std::size_t at = lex.mark();
        std::string first = lex.word();
        if (first.empty()) fail("expected a term");
        std::string upper = first;
        for (char& ch : upper) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
        check_supported(upper);
        if (lex.pos < lex.text.size() && lex.text[lex.pos] == ':') {
            ++lex.pos;
            std::string local = local_name(lex);
            auto it = prefixes.find(first);
            if (it == prefixes.end()) throw UnknownPrefix("unknown prefix '" + first + ":'");
            return PatternTerm::iri(it->second + local);
        }
        if (first == "a") return PatternTerm::iri(std::string(kRdfNs) + "type");
        lex.pos = at;
        fail("unexpected token '" + first + "'");
    }

    TriplePattern parse_pattern() {
        TriplePattern p;
        p.subject = parse_term(false);
        p.predicate = parse_term(false);
        p.object = parse_term(true);
        if (!lex.accept_char('.')) fail("expected '.' after triple pattern");
        return p;
    }

    std::vector<TriplePattern> parse_group() {
        if (!lex.accept_char('{')) fail("expected '{'");
        std::vector<TriplePattern> patterns;
        while (!lex.accept_char('}')) {
            if (lex.eof()) fail("unterminated group");
            patterns.push_back(parse_pattern());
        }
        return patterns;
    }

    Query parse() {
        Query q;
        while (true) {
            lex.skip_ws();
            std::size_t at = lex.mark();
            std::string kw = lex.upper_word();
            if (kw == "PREFIX") {
                lex.skip_ws();
                std::string name = lex.word();
                if (!lex.accept_char(':')) fail("expected ':' in PREFIX");
                prefixes[name] = expect_iri_ref();
                continue;
            }
            if (kw == "SELECT") break;
            check_supported(kw);
            lex.pos = at;
            fail("expected SELECT");
        }

        while (lex.peek_char() == '?') {
            ++lex.pos;
            std::string name = local_name(lex);
            if (name.empty()) fail("empty variable name");
            q.select_vars.push_back(name);
        }
        if (q.select_vars.empty()) {
            if (lex.peek_char() == '*') throw UnsupportedFeature("SELECT * is not supported");
            fail("SELECT needs at least one variable");
        }

        {
            std::string kw = lex.upper_word();
            check_supported(kw);
            if (kw != "WHERE") fail("expected WHERE");
        }
        if (!lex.accept_char('{')) fail("expected '{' after WHERE");

        bool saw_union_block = false;
        while (!lex.accept_char('}')) {
            if (lex.eof()) fail("unterminated WHERE block");
            if (lex.peek_char() == '{') {
                // union block: { group UNION group ... }
                ++lex.pos;
                if (saw_union_block)
                    throw UnsupportedFeature("only one UNION block is supported");
                saw_union_block = true;
                q.alternatives.push_back(parse_group());
                while (true) {
                    lex.skip_ws();
                    std::size_t at = lex.mark();
                    std::string kw = lex.upper_word();
                    if (kw == "UNION") {
                        q.alternatives.push_back(parse_group());
                        continue;
                    }
                    lex.pos = at;
                    break;
                }
                if (q.alternatives.size() < 2)
                    throw UnsupportedFeature("braced groups are only supported as UNION blocks");
                if (!lex.accept_char('}')) fail("expected '}' closing the UNION block");
                continue;
            }
            // wordy unsupported keyword or a triple pattern
            lex.skip_ws();
            std::size_t at = lex.mark();
            std::string kw = lex.upper_word();
            check_supported(kw);
            lex.pos = at;
            q.shared.push_back(parse_pattern());
        }

        lex.skip_ws();
        if (!lex.eof()) {
            std::string kw = lex.upper_word();
            check_supported(kw);
            if (kw != "LIMIT") fail("unexpected trailing content");
            lex.skip_ws();
            std::size_t start = lex.pos;
            while (lex.pos < lex.text.size() &&
                   std::isdigit(static_cast<unsigned char>(lex.text[lex.pos])))
                ++lex.pos;
            auto n = util::parse_int(lex.text.substr(start, lex.pos - start));
            if (!n || *n <= 0) fail("LIMIT needs a positive integer");
            q.limit = static_cast<long>(*n);
            if (!lex.eof()) fail("unexpected trailing content");
        }

        std::set<std::string> mentioned;
        auto note = [&](const TriplePattern& p) {
            for (const PatternTerm* t : {&p.subject, &p.predicate, &p.object})
                if (t->is_variable()) mentioned.insert(t->value);
        };
        for (const auto& p : q.shared) note(p);
        for (const auto& group : q.alternatives)
            for (const auto& p : group) note(p);
        for (const auto& v : q.select_vars)
            if (!mentioned.count(v))
                throw ParseError(0, "selected variable ?" + v + " is not mentioned in WHERE");
        if (q.shared.empty() && q.alternatives.empty()) fail("empty WHERE block");
        return q;
    }
};

}  // namespace

Query parse_query(std::string_view text, const PrefixMap& builtin_prefixes) {
    Parser parser(text, builtin_prefixes);
    return parser.parse();
}

// ---------------------------------------------------------------------------
// evaluation

namespace {

std::optional<Term> resolve(const PatternTerm& t, const Row& row) {
    switch (t.kind) {
        case PatternTerm::Kind::Iri: return Term::iri(t.value);
        case PatternTerm::Kind::Literal: return Term::literal(t.value);
        case PatternTerm::Kind::Variable: {
            auto it = row.find(t.value);
            if (it == row.end()) return std::nullopt;
            return it->second;
        }
    }
    return std::nullopt;
}

// Extends `row` with the bindings a matched triple implies; fails when a
// variable occurs twice with different values.
bool bind(Row& row, const PatternTerm& t, const Term& value) {
    if (!t.is_variable()) return true;
    auto [it, inserted] = row.emplace(t.value, value);
    return inserted || it->second == value;
}

std::vector<Row> eval_group(std::vector<TriplePattern> patterns, const rdf::TripleStore& graph) {
    std::vector<Row> rows{Row{}};
    std::set<std::string> bound;
    std::vector<bool> done(patterns.size(), false);

    for (std::size_t step = 0; step < patterns.size(); ++step) {
        // most-bound-first join order
        std::size_t best = patterns.size();
        int best_score = -1;
        for (std::size_t i = 0; i < patterns.size(); ++i) {
            if (done[i]) continue;
            int score = 0;
            for (const PatternTerm* t :
                 {&patterns[i].subject, &patterns[i].predicate, &patterns[i].object})
                if (!t->is_variable() || bound.count(t->value)) ++score;
            if (score > best_score) { best_score = score; best = i; }
        }
        done[best] = true;
        const TriplePattern& p = patterns[best];

        std::vector<Row> next;
        for (const Row& row : rows) {
            auto s = resolve(p.subject, row);
            auto pr = resolve(p.predicate, row);
            auto o = resolve(p.object, row);
            for (const Triple& t : graph.match(s, pr, o)) {
                Row extended = row;
                if (!bind(extended, p.subject, t.subject)) continue;
                if (!bind(extended, p.predicate, t.predicate)) continue;
                if (!bind(extended, p.object, t.object)) continue;
                next.push_back(std::move(extended));
            }
        }
        rows = std::move(next);
        for (const PatternTerm* t : {&p.subject, &p.predicate, &p.object})
            if (t->is_variable()) bound.insert(t->value);
        if (rows.empty()) return rows;
    }
    return rows;
}

}  // namespace

BindingSet evaluate(const Query& q, const rdf::TripleStore& graph) {
    std::vector<Row> rows;
    if (q.alternatives.empty()) {
        rows = eval_group(q.shared, graph);
    } else {
        for (const auto& branch : q.alternatives) {
            std::vector<TriplePattern> patterns = q.shared;
            patterns.insert(patterns.end(), branch.begin(), branch.end());
            auto branch_rows = eval_group(std::move(patterns), graph);
            rows.insert(rows.end(), std::make_move_iterator(branch_rows.begin()),
                        std::make_move_iterator(branch_rows.end()));
        }
    }

    // project to the selected variables
    std::vector<Row> projected;
    projected.reserve(rows.size());
    for (const Row& row : rows) {
        Row p;
        for (const auto& v : q.select_vars) {
            auto it = row.find(v);
            if (it != row.end()) p.emplace(v, it->second);
        }
        projected.push_back(std::move(p));
    }

    // canonical row order: per select variable, unbound sorts first
    std::stable_sort(projected.begin(), projected.end(), [&](const Row& a, const Row& b) {
        for (const auto& v : q.select_vars) {
            auto ia = a.find(v);
            auto ib = b.find(v);
            bool ha = ia != a.end();
            bool hb = ib != b.end();
            if (ha != hb) return !ha;
            if (ha && hb) {
                if (ia->second != ib->second) return ia->second < ib->second;
            }
        }
        return false;
    });

    if (q.limit && projected.size() > static_cast<std::size_t>(*q.limit))
        projected.resize(static_cast<std::size_t>(*q.limit));

    return {q.select_vars, std::move(projected)};
}

// ---------------------------------------------------------------------------
// result serialization

std::optional<ResultFormat> parse_result_format(std::string_view s) {
    if (s == "json") return ResultFormat::Json;
    if (s == "tsv") return ResultFormat::Tsv;
    return std::nullopt;
}

namespace {

nlohmann::json term_to_json(const Term& t) {
    nlohmann::json out;
    switch (t.kind) {
        case Term::Kind::Iri: out["type"] = "uri"; break;
        case Term::Kind::Literal: out["type"] = "literal"; break;
        case Term::Kind::Blank: out["type"] = "bnode"; break;
    }
    out["value"] = t.value;
    if (t.kind == Term::Kind::Literal && !t.datatype.empty()) out["datatype"] = t.datatype;
    return out;
}

std::string term_to_tsv(const Term& t) {
    switch (t.kind) {
        case Term::Kind::Iri: return "<" + t.value + ">";
        case Term::Kind::Blank: return "_:" + t.value;
        case Term::Kind::Literal: {
            std::string out = "\"" + rdf::escape_literal(t.value) + "\"";
            if (!t.datatype.empty()) out += "^^<" + t.datatype + ">";
            return out;
        }
    }
    return {};
}

}  // namespace

std::string serialize_results(const BindingSet& b, ResultFormat format) {
    if (format == ResultFormat::Json) {
        nlohmann::json out;
        out["head"]["vars"] = b.vars;
        nlohmann::json bindings = nlohmann::json::array();
        for (const Row& row : b.rows) {
            nlohmann::json entry = nlohmann::json::object();
            for (const auto& [var, term] : row) entry[var] = term_to_json(term);
            bindings.push_back(std::move(entry));
        }
        out["results"]["bindings"] = std::move(bindings);
        return out.dump();
    }

    std::string out;
    for (std::size_t i = 0; i < b.vars.size(); ++i) {
        if (i) out += '\t';
        out += "?" + b.vars[i];
    }
    out += '\n';
    for (const Row& row : b.rows) {
        for (std::size_t i = 0; i < b.vars.size(); ++i) {
            if (i) out += '\t';
            auto it = row.find(b.vars[i]);
            if (it != row.end()) out += term_to_tsv(it->second);
        }
        out += '\n';
    }
    return out;
}

BindingSet parse_results_json(std::string_view text) {
    nlohmann::json parsed = nlohmann::json::parse(text);
    BindingSet out;
    for (const auto& v : parsed.at("head").at("vars")) out.vars.push_back(v.get<std::string>());
    for (const auto& entry : parsed.at("results").at("bindings")) {
        Row row;
        for (auto it = entry.begin(); it != entry.end(); ++it) {
            const auto& term = it.value();
            std::string type = term.at("type").get<std::string>();
            std::string value = term.at("value").get<std::string>();
            if (type == "uri") row.emplace(it.key(), Term::iri(value));
            else if (type == "bnode") row.emplace(it.key(), Term::blank(value));
            else
                row.emplace(it.key(),
                            Term::literal(value, term.value("datatype", std::string())));
        }
        out.rows.push_back(std::move(row));
    }
    return out;
}

}  // namespace mirlod::query
