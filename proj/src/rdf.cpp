#include "mirlod/rdf.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

#include "mirlod/util.hpp"

namespace mirlod::rdf {

std::string escape_literal(std::string_view value) {
    std::string out;
    out.reserve(value.size());
    for (unsigned char c : value) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (c < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04X", c);
                    out += buf;
                } else {
                    out.push_back(static_cast<char>(c));
                }
        }
    }
    return out;
}

std::string Term::n3() const {
    switch (kind) {
        case Kind::Iri: return "<" + value + ">";
        case Kind::Blank: return "_:" + value;
        case Kind::Literal: {
            std::string out = "\"" + escape_literal(value) + "\"";
            if (!datatype.empty()) out += "^^<" + datatype + ">";
            return out;
        }
    }
    return {};
}

// ---------------------------------------------------------------------------
// N-Triples

std::string serialize_ntriples(std::span<const Triple> triples) {
    std::vector<const Triple*> sorted;
    sorted.reserve(triples.size());
    for (const auto& t : triples) sorted.push_back(&t);
    std::sort(sorted.begin(), sorted.end(), [](const Triple* a, const Triple* b) { return *a < *b; });
    sorted.erase(std::unique(sorted.begin(), sorted.end(),
                             [](const Triple* a, const Triple* b) { return *a == *b; }),
                 sorted.end());
    std::string out;
    for (const Triple* t : sorted)
        out += t->subject.n3() + " " + t->predicate.n3() + " " + t->object.n3() + " .\n";
    return out;
}

// ---------------------------------------------------------------------------
// Shared tokenizer for the Turtle subset and N-Triples

namespace {

struct Token {
    enum class Kind {
        Iri,        // <...>
        Prefixed,   // pfx:local (also bare 'a')
        Literal,    // "..." with optional ^^<dt>
        Blank,      // _:label
        Dot,
        Semicolon,
        Comma,
        AtPrefix,   // @prefix
        End,
    };
    Kind kind = Kind::End;
    std::string value;      // IRI text / literal value /名 label
    std::string datatype;   // literal datatype IRI
    std::string prefix;     // for Prefixed: the part before ':'
};

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) {}

    std::size_t line() const { return line_; }

    Token next() {
        skip_ws();
        if (pos_ >= text_.size()) return {Token::Kind::End, {}, {}, {}};
        char c = text_[pos_];
        if (c == '.') { ++pos_; return {Token::Kind::Dot, {}, {}, {}}; }
        if (c == ';') { ++pos_; return {Token::Kind::Semicolon, {}, {}, {}}; }
        if (c == ',') { ++pos_; return {Token::Kind::Comma, {}, {}, {}}; }
        if (c == '<') return lex_iri();
        if (c == '"') return lex_literal();
        if (c == '@') {
            if (text_.substr(pos_, 7) == "@prefix") {
                pos_ += 7;
                return {Token::Kind::AtPrefix, {}, {}, {}};
            }
            throw RdfParseError(line_, "unexpected '@'");
        }
        if (c == '_' && pos_ + 1 < text_.size() && text_[pos_ + 1] == ':') {
            pos_ += 2;
            std::string label = take_name();
            return {Token::Kind::Blank, label, {}, {}};
        }
        return lex_prefixed();
    }

private:
    void skip_ws() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '\n') { ++line_; ++pos_; continue; }
            if (c == ' ' || c == '\t' || c == '\r') { ++pos_; continue; }
            if (c == '#') {
                while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
                continue;
            }
            break;
        }
    }

    Token lex_iri() {
        std::size_t end = text_.find('>', pos_ + 1);
        if (end == std::string_view::npos) throw RdfParseError(line_, "unterminated IRI");
        std::string value(text_.substr(pos_ + 1, end - pos_ - 1));
        pos_ = end + 1;
        return {Token::Kind::Iri, std::move(value), {}, {}};
    }

    Token lex_literal() {
        ++pos_;
        std::string value;
        while (true) {
            if (pos_ >= text_.size()) throw RdfParseError(line_, "unterminated literal");
            char c = text_[pos_++];
            if (c == '"') break;
            if (c == '\n') throw RdfParseError(line_, "newline in literal");
            if (c != '\\') { value.push_back(c); continue; }
            if (pos_ >= text_.size()) throw RdfParseError(line_, "dangling escape");
            char e = text_[pos_++];
            switch (e) {
                case '"': value.push_back('"'); break;
                case '\\': value.push_back('\\'); break;
                case 'n': value.push_back('\n'); break;
                case 'r': value.push_back('\r'); break;
                case 't': value.push_back('\t'); break;
                case 'u': {
                    if (pos_ + 4 > text_.size()) throw RdfParseError(line_, "bad \\u escape");
                    unsigned code = 0;
                    for (int i = 0; i < 4; ++i) {
                        char h = text_[pos_++];
                        code <<= 4;
                        if (h >= '0' && h <= '9') code |= static_cast<unsigned>(h - '0');
                        else if (h >= 'A' && h <= 'F') code |= static_cast<unsigned>(h - 'A' + 10);
                        else if (h >= 'a' && h <= 'f') code |= static_cast<unsigned>(h - 'a' + 10);
                        else throw RdfParseError(line_, "bad \\u escape");
                    }
                    if (code > 0x7f) throw RdfParseError(line_, "non-ascii \\u escape unsupported");
                    value.push_back(static_cast<char>(code));
                    break;
                }
                default: throw RdfParseError(line_, "unknown escape");
            }
        }
        Token t{Token::Kind::Literal, std::move(value), {}, {}};
        if (text_.substr(pos_, 2) == "^^") {
            pos_ += 2;
            if (pos_ >= text_.size() || text_[pos_] != '<')
                throw RdfParseError(line_, "datatype must be an IRI");
            Token dt = lex_iri();
            t.datatype = dt.value;
        }
        return t;
    }

    std::string take_name() {
        std::size_t start = pos_;
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')
                ++pos_;
            else
                break;
        }
        // a trailing '.' is the statement terminator, not part of the name
        while (pos_ > start && text_[pos_ - 1] == '.') --pos_;
        return std::string(text_.substr(start, pos_ - start));
    }

    Token lex_prefixed() {
        std::size_t start = pos_;
        std::string first = take_name();
        if (first.empty()) throw RdfParseError(line_, "unexpected character");
        if (pos_ < text_.size() && text_[pos_] == ':') {
            ++pos_;
            std::string local = take_name();
            return {Token::Kind::Prefixed, std::move(local), {}, std::move(first)};
        }
        if (first == "a") return {Token::Kind::Prefixed, "type", {},
                                  "\1rdf"};  // marker handled by the parser
        pos_ = start;
        throw RdfParseError(line_, "unexpected token");
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
};

constexpr std::string_view kRdfNs = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";

}  // namespace

std::vector<Triple> parse_ntriples(std::string_view text) {
    // N-Triples is the Turtle subset without prefixes; reuse the parser.
    return parse_turtle(text);
}

std::vector<Triple> parse_turtle(std::string_view text) {
    return parse_turtle(text, nullptr);
}

std::vector<Triple> parse_turtle(std::string_view text,
                                 std::map<std::string, std::string>* prefixes_out) {
    Lexer lex(text);
    std::map<std::string, std::string> prefixes;
    std::vector<Triple> out;

    auto resolve = [&](const Token& t) -> Term {
        switch (t.kind) {
            case Token::Kind::Iri: return Term::iri(t.value);
            case Token::Kind::Blank: return Term::blank(t.value);
            case Token::Kind::Literal: return Term::literal(t.value, t.datatype);
            case Token::Kind::Prefixed: {
                if (t.prefix == "\1rdf") return Term::iri(std::string(kRdfNs) + "type");
                auto it = prefixes.find(t.prefix);
                if (it == prefixes.end())
                    throw RdfParseError(lex.line(), "unknown prefix '" + t.prefix + ":'");
                return Term::iri(it->second + t.value);
            }
            default: throw RdfParseError(lex.line(), "expected a term");
        }
    };

    Token tok = lex.next();
    while (tok.kind != Token::Kind::End) {
        if (tok.kind == Token::Kind::AtPrefix) {
            Token name = lex.next();
            if (name.kind != Token::Kind::Prefixed || !name.value.empty())
                throw RdfParseError(lex.line(), "expected 'prefix:' after @prefix");
            Token iri = lex.next();
            if (iri.kind != Token::Kind::Iri)
                throw RdfParseError(lex.line(), "expected IRI in @prefix");
            if (lex.next().kind != Token::Kind::Dot)
                throw RdfParseError(lex.line(), "expected '.' after @prefix");
            prefixes[name.prefix] = iri.value;
            tok = lex.next();
            continue;
        }

        Term subject = resolve(tok);
        bool statement_done = false;
        Token ptok = lex.next();
        while (!statement_done) {
            // A trailing ';' before the closing '.' is tolerated.
            if (ptok.kind == Token::Kind::Dot) break;
            Term predicate = resolve(ptok);
            if (!predicate.is_iri()) throw RdfParseError(lex.line(), "predicate must be an IRI");
            bool predicate_done = false;
            while (!predicate_done) {
                Token otok = lex.next();
                out.push_back({subject, predicate, resolve(otok)});
                Token sep = lex.next();
                switch (sep.kind) {
                    case Token::Kind::Comma: break;
                    case Token::Kind::Semicolon:
                        predicate_done = true;
                        ptok = lex.next();
                        break;
                    case Token::Kind::Dot:
                        predicate_done = true;
                        statement_done = true;
                        break;
                    default: throw RdfParseError(lex.line(), "expected ',', ';' or '.'");
                }
            }
        }
        tok = lex.next();
    }
    if (prefixes_out) *prefixes_out = std::move(prefixes);
    return out;
}

// ---------------------------------------------------------------------------
// Turtle serialization

namespace {

// Valid local name for prefixed form in our output subset.
bool simple_local(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
    return std::isalpha(static_cast<unsigned char>(s.front())) || s.front() == '_';
}

}  // namespace

std::string serialize_turtle(std::span<const Triple> triples,
                             const std::vector<std::pair<std::string, std::string>>& prefixes) {
    auto shorten = [&](const Term& t) -> std::string {
        if (!t.is_iri()) return t.n3();
        if (t.value == std::string(kRdfNs) + "type") return "a";
        for (const auto& [prefix, ns] : prefixes) {
            if (t.value.size() > ns.size() && t.value.compare(0, ns.size(), ns) == 0) {
                std::string_view local(t.value.data() + ns.size(), t.value.size() - ns.size());
                if (simple_local(local)) return prefix + ":" + std::string(local);
            }
        }
        return t.n3();
    };

    std::vector<const Triple*> sorted;
    sorted.reserve(triples.size());
    for (const auto& t : triples) sorted.push_back(&t);
    std::sort(sorted.begin(), sorted.end(), [](const Triple* a, const Triple* b) { return *a < *b; });
    sorted.erase(std::unique(sorted.begin(), sorted.end(),
                             [](const Triple* a, const Triple* b) { return *a == *b; }),
                 sorted.end());

    std::string out;
    for (const auto& [prefix, ns] : prefixes) out += "@prefix " + prefix + ": <" + ns + "> .\n";
    if (!prefixes.empty() && !sorted.empty()) out += "\n";

    std::size_t i = 0;
    while (i < sorted.size()) {
        const Term& subject = sorted[i]->subject;
        out += subject.n3() + "\n";
        while (i < sorted.size() && sorted[i]->subject == subject) {
            const Term& predicate = sorted[i]->predicate;
            out += "    " + shorten(predicate) + " ";
            bool first = true;
            while (i < sorted.size() && sorted[i]->subject == subject &&
                   sorted[i]->predicate == predicate) {
                if (!first) out += ", ";
                first = false;
                const Term& obj = sorted[i]->object;
                out += obj.is_iri() ? shorten(obj) : obj.n3();
                ++i;
            }
            bool more = i < sorted.size() && sorted[i]->subject == subject;
            out += more ? " ;\n" : " .\n";
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// TripleStore

TripleStore::TripleStore(std::vector<Triple> triples) : triples_(std::move(triples)) {
    std::sort(triples_.begin(), triples_.end());
    triples_.erase(std::unique(triples_.begin(), triples_.end()), triples_.end());
    pos_.resize(triples_.size());
    osp_.resize(triples_.size());
    for (std::uint32_t i = 0; i < triples_.size(); ++i) pos_[i] = osp_[i] = i;
    std::sort(pos_.begin(), pos_.end(), [&](std::uint32_t a, std::uint32_t b) {
        const Triple& x = triples_[a];
        const Triple& y = triples_[b];
        return std::tie(x.predicate, x.object, x.subject) <
               std::tie(y.predicate, y.object, y.subject);
    });
    std::sort(osp_.begin(), osp_.end(), [&](std::uint32_t a, std::uint32_t b) {
        const Triple& x = triples_[a];
        const Triple& y = triples_[b];
        return std::tie(x.object, x.subject, x.predicate) <
               std::tie(y.object, y.subject, y.predicate);
    });
}

bool TripleStore::contains(const Triple& t) const {
    return std::binary_search(triples_.begin(), triples_.end(), t);
}

std::vector<Triple> TripleStore::match(const std::optional<Term>& s, const std::optional<Term>& p,
                                       const std::optional<Term>& o) const {
    std::vector<Triple> out;
    auto emit_if = [&](const Triple& t) {
        if (s && t.subject != *s) return;
        if (p && t.predicate != *p) return;
        if (o && t.object != *o) return;
        out.push_back(t);
    };

    if (s) {
        // SPO order: binary search the subject range.
        auto lo = std::lower_bound(triples_.begin(), triples_.end(), *s,
                                   [](const Triple& t, const Term& key) { return t.subject < key; });
        for (auto it = lo; it != triples_.end() && it->subject == *s; ++it) emit_if(*it);
        return out;
    }
    if (p) {
        auto key = [&](std::uint32_t idx) { return triples_[idx]; };
        auto lo = std::lower_bound(pos_.begin(), pos_.end(), *p,
                                   [&](std::uint32_t idx, const Term& term) {
                                       return key(idx).predicate < term;
                                   });
        for (auto it = lo; it != pos_.end() && key(*it).predicate == *p; ++it) {
            if (o && key(*it).object != *o) continue;
            emit_if(key(*it));
        }
        return out;
    }
    if (o) {
        auto key = [&](std::uint32_t idx) { return triples_[idx]; };
        auto lo = std::lower_bound(osp_.begin(), osp_.end(), *o,
                                   [&](std::uint32_t idx, const Term& term) {
                                       return key(idx).object < term;
                                   });
        for (auto it = lo; it != osp_.end() && key(*it).object == *o; ++it) emit_if(key(*it));
        return out;
    }
    return triples_;
}

}  // namespace mirlod::rdf
