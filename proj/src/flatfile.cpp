#include "mirlod/flatfile.hpp"

#include <istream>
#include <sstream>

#include "mirlod/util.hpp"

namespace mirlod::flatfile {

using util::is_hairpin_id;
using util::is_mature_id;
using util::is_token;

namespace {

// Cursor over the input lines with 1-based positions for error messages.
struct Lines {
    std::vector<std::string_view> lines;
    std::size_t pos = 0;

    bool eof() const { return pos >= lines.size(); }
    std::size_t number() const { return pos + 1; }
    std::string_view peek() const { return lines[pos]; }
    std::string_view take() { return lines[pos++]; }
};

// Returns the payload of a line starting with "<tag> ", or nullopt.
std::optional<std::string_view> tagged(std::string_view line, std::string_view tag) {
    if (line.size() < tag.size() + 1) return std::nullopt;
    if (line.substr(0, tag.size()) != tag || line[tag.size()] != ' ') return std::nullopt;
    return line.substr(tag.size() + 1);
}

std::string_view expect(Lines& in, std::string_view tag) {
    if (in.eof()) throw TruncatedRecord("unexpected end of file, expected " + std::string(tag));
    auto payload = tagged(in.peek(), tag);
    if (!payload)
        throw SyntaxError(in.number(), "expected '" + std::string(tag) + " ', got '" +
                                           std::string(in.peek()) + "'");
    in.take();
    return *payload;
}

std::string token_of(Lines& in, std::string_view payload, const char* what,
                     bool (*check)(std::string_view)) {
    if (!check(payload))
        throw SyntaxError(in.number() - 1, std::string("bad ") + what + ": '" +
                                               std::string(payload) + "'");
    return std::string(payload);
}

std::string read_all(std::istream& in) {
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// miRNA.dat

std::vector<DatEntry> parse_dat(std::string_view text) {
    Lines in{util::split_lines(text)};
    std::vector<DatEntry> out;
    while (!in.eof()) {
        DatEntry e;
        e.name = token_of(in, expect(in, "ID"), "name", is_token);
        e.mima_id = token_of(in, expect(in, "AC"), "mima_id", is_hairpin_id);
        e.description = std::string(expect(in, "DE"));
        while (!in.eof()) {
            auto mt = tagged(in.peek(), "MT");
            if (!mt) break;
            in.take();
            auto cells = util::split(*mt, ' ');
            if (cells.size() != 3)
                throw SyntaxError(in.number() - 1, "MT needs <mimat> <name> <sequence>");
            DatMature m;
            m.mimat = token_of(in, cells[0], "mimat", is_mature_id);
            m.name = token_of(in, cells[1], "mature name", is_token);
            m.sequence = token_of(in, cells[2], "mature sequence", is_token);
            e.matures.push_back(std::move(m));
        }
        e.publications.emplace_back(expect(in, "RX"));
        while (!in.eof()) {
            auto rx = tagged(in.peek(), "RX");
            if (!rx) break;
            in.take();
            e.publications.emplace_back(*rx);
        }
        e.sequence = token_of(in, expect(in, "SQ"), "sequence", is_token);
        if (in.eof()) throw TruncatedRecord("unexpected end of file, expected //");
        if (in.peek() != "//")
            throw SyntaxError(in.number(), "expected '//', got '" + std::string(in.peek()) + "'");
        in.take();
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<DatEntry> parse_dat(std::istream& in) {
    std::string text = read_all(in);
    return parse_dat(std::string_view(text));
}

std::string serialize_dat(std::span<const DatEntry> entries) {
    std::string out;
    for (const auto& e : entries) {
        out += "ID " + e.name + "\n";
        out += "AC " + e.mima_id + "\n";
        out += "DE " + e.description + "\n";
        for (const auto& m : e.matures)
            out += "MT " + m.mimat + " " + m.name + " " + m.sequence + "\n";
        for (const auto& p : e.publications) out += "RX " + p + "\n";
        out += "SQ " + e.sequence + "\n";
        out += "//\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// miRNA.diff

bool DiffLine::is_mature() const { return is_mature_id(entity_id); }

namespace {

DiffChange parse_change_token(std::size_t line, std::string_view tok, bool mature) {
    auto parent_op = [&](std::string_view prefix, DiffOp op) -> std::optional<DiffChange> {
        if (tok.substr(0, prefix.size()) != prefix) return std::nullopt;
        if (!mature)
            throw MatureTokenOnHairpin("line " + std::to_string(line) + ": " +
                                       std::string(prefix.substr(0, prefix.size() - 1)) +
                                       " is a mature-only change");
        std::string_view id = tok.substr(prefix.size());
        if (!is_hairpin_id(id))
            throw UnknownChangeToken("line " + std::to_string(line) + ": bad parent id in '" +
                                     std::string(tok) + "'");
        return DiffChange{op, std::string(id)};
    };

    if (tok == "NEW") return {DiffOp::New, std::nullopt};
    if (tok == "NAME") return {DiffOp::Name, std::nullopt};
    if (tok == "SEQUENCE") return {DiffOp::Sequence, std::nullopt};
    if (tok == "DELETE") return {DiffOp::Delete, std::nullopt};
    if (tok == "FORWARD") {
        if (mature)
            throw HairpinTokenOnMature("line " + std::to_string(line) +
                                       ": FORWARD is a hairpin-only change");
        return {DiffOp::Forward, std::nullopt};
    }
    if (auto c = parent_op("ADDPARENT:", DiffOp::AddParent)) return *c;
    if (auto c = parent_op("REMOVEPARENT:", DiffOp::RemoveParent)) return *c;
    throw UnknownChangeToken("line " + std::to_string(line) + ": unknown change token '" +
                             std::string(tok) + "'");
}

}  // namespace

std::vector<DiffLine> parse_diff(std::string_view text) {
    std::vector<DiffLine> out;
    auto lines = util::split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::size_t number = i + 1;
        auto cells = util::split(lines[i], ' ');
        if (cells.size() < 3)
            throw SyntaxError(number, "expected '<id> <name> <token>...'");
        DiffLine line;
        line.entity_id = std::string(cells[0]);
        if (!is_hairpin_id(line.entity_id) && !is_mature_id(line.entity_id))
            throw SyntaxError(number, "bad entity id '" + line.entity_id + "'");
        if (!is_token(cells[1])) throw SyntaxError(number, "bad name");
        line.name = std::string(cells[1]);
        bool mature = line.is_mature();
        for (std::size_t t = 2; t < cells.size(); ++t)
            line.changes.push_back(parse_change_token(number, cells[t], mature));
        out.push_back(std::move(line));
    }
    return out;
}

std::vector<DiffLine> parse_diff(std::istream& in) {
    std::string text = read_all(in);
    return parse_diff(std::string_view(text));
}

std::string serialize_diff(std::span<const DiffLine> lines) {
    std::string out;
    for (const auto& line : lines) {
        out += line.entity_id + " " + line.name;
        for (const auto& c : line.changes) {
            switch (c.op) {
                case DiffOp::New: out += " NEW"; break;
                case DiffOp::Name: out += " NAME"; break;
                case DiffOp::Sequence: out += " SEQUENCE"; break;
                case DiffOp::Delete: out += " DELETE"; break;
                case DiffOp::Forward: out += " FORWARD"; break;
                case DiffOp::AddParent: out += " ADDPARENT:" + *c.parent; break;
                case DiffOp::RemoveParent: out += " REMOVEPARENT:" + *c.parent; break;
            }
        }
        out += "\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// miRNA.dead

std::vector<DeadEntry> parse_dead(std::string_view text) {
    Lines in{util::split_lines(text)};
    std::vector<DeadEntry> out;
    while (!in.eof()) {
        DeadEntry e;
        e.name = token_of(in, expect(in, "ID"), "name", is_token);
        e.mima_id = token_of(in, expect(in, "AC"), "mima_id", is_hairpin_id);
        if (!in.eof()) {
            if (auto fw = tagged(in.peek(), "FW")) {
                in.take();
                e.forward_to = token_of(in, *fw, "forward id", is_hairpin_id);
            }
        }
        std::string comment;
        while (!in.eof()) {
            auto cc = tagged(in.peek(), "CC");
            if (!cc) break;
            in.take();
            if (!comment.empty()) comment += '\n';
            comment += std::string(*cc);
        }
        e.comment = std::move(comment);
        if (in.eof()) throw TruncatedRecord("unexpected end of file, expected //");
        if (in.peek() != "//")
            throw SyntaxError(in.number(), "expected '//', got '" + std::string(in.peek()) + "'");
        in.take();
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<DeadEntry> parse_dead(std::istream& in) {
    std::string text = read_all(in);
    return parse_dead(std::string_view(text));
}

std::string serialize_dead(std::span<const DeadEntry> entries) {
    std::string out;
    for (const auto& e : entries) {
        out += "ID " + e.name + "\n";
        out += "AC " + e.mima_id + "\n";
        if (e.forward_to) out += "FW " + *e.forward_to + "\n";
        if (!e.comment.empty())
            for (auto part : util::split(e.comment, '\n')) out += "CC " + std::string(part) + "\n";
        out += "//\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// miFam.dat

std::vector<FamilyEntry> parse_fam(std::string_view text) {
    Lines in{util::split_lines(text)};
    std::vector<FamilyEntry> out;
    while (!in.eof()) {
        FamilyEntry e;
        e.family_id = token_of(in, expect(in, "AC"), "family id", is_token);
        e.family_name = token_of(in, expect(in, "ID"), "family name", is_token);
        std::size_t block_line = in.number();
        while (!in.eof()) {
            auto mi = tagged(in.peek(), "MI");
            if (!mi) break;
            in.take();
            auto cells = util::split(*mi, ' ');
            if (cells.size() != 2)
                throw SyntaxError(in.number() - 1, "MI needs <mima_id> <name>");
            FamilyMemberRef m;
            m.mima_id = token_of(in, cells[0], "mima_id", is_hairpin_id);
            m.name = token_of(in, cells[1], "member name", is_token);
            e.members.push_back(std::move(m));
        }
        if (e.members.empty())
            throw EmptyFamily("line " + std::to_string(block_line) + ": family " + e.family_id +
                              " has no MI lines");
        if (in.eof()) throw TruncatedRecord("unexpected end of file, expected //");
        if (in.peek() != "//")
            throw SyntaxError(in.number(), "expected '//', got '" + std::string(in.peek()) + "'");
        in.take();
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<FamilyEntry> parse_fam(std::istream& in) {
    std::string text = read_all(in);
    return parse_fam(std::string_view(text));
}

std::string serialize_fam(std::span<const FamilyEntry> families) {
    std::string out;
    for (const auto& f : families) {
        out += "AC " + f.family_id + "\n";
        out += "ID " + f.family_name + "\n";
        for (const auto& m : f.members) out += "MI " + m.mima_id + " " + m.name + "\n";
        out += "//\n";
    }
    return out;
}

}  // namespace mirlod::flatfile
