#pragma once
// Parsers and serializers for the four per-release change-tracking files.
// All four formats are line oriented, UTF-8, '\n' endings, with a single
// space after each 2-letter tag:
//
//   miRNA.dat    blocks:  ID <name> / AC <mima_id> / DE <free text> /
//                         MT <mimat> <name> <sequence> (zero or more) /
//                         RX <publication> (one or more) / SQ <sequence> / //
//   miRNA.diff   lines:   <id> <name> <token>( <token>)*  with tokens in
//                         {NEW, NAME, SEQUENCE, DELETE, FORWARD,
//                          ADDPARENT:<mima_id>, REMOVEPARENT:<mima_id>}
//   miRNA.dead   blocks:  ID <name> / AC <mima_id> / FW <mima_id> (optional) /
//                         CC <text> (zero or more) / //
//   miFam.dat    blocks:  AC <family_id> / ID <family_name> /
//                         MI <mima_id> <name> (one or more) / //
//
// parse followed by serialize is the identity on every conforming file.

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mirlod/errors.hpp"

namespace mirlod::flatfile {

struct SyntaxError : Error {
    SyntaxError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line(line) {}
    std::size_t line;
};
struct TruncatedRecord : Error { using Error::Error; };
struct UnknownChangeToken : Error { using Error::Error; };
struct MatureTokenOnHairpin : Error { using Error::Error; };
struct HairpinTokenOnMature : Error { using Error::Error; };
struct EmptyFamily : Error { using Error::Error; };

// ---------------------------------------------------------------------------
// miRNA.dat

struct DatMature {
    std::string mimat;
    std::string name;
    std::string sequence;
    bool operator==(const DatMature&) const = default;
};

struct DatEntry {
    std::string mima_id;
    std::string name;
    std::string description;
    std::vector<DatMature> matures;
    std::string sequence;
    std::vector<std::string> publications;
    bool operator==(const DatEntry&) const = default;
};

std::vector<DatEntry> parse_dat(std::istream& in);
std::vector<DatEntry> parse_dat(std::string_view text);
std::string serialize_dat(std::span<const DatEntry> entries);

// ---------------------------------------------------------------------------
// miRNA.diff

enum class DiffOp { New, Name, Sequence, Delete, Forward, AddParent, RemoveParent };

struct DiffChange {
    DiffOp op = DiffOp::New;
    std::optional<std::string> parent;  // set for AddParent/RemoveParent
    bool operator==(const DiffChange&) const = default;
};

struct DiffLine {
    std::string entity_id;
    std::string name;
    std::vector<DiffChange> changes;

    // Entity kind follows the id prefix: MIMAT ids are matures, other MI
    // ids are hairpins.
    bool is_mature() const;
    bool operator==(const DiffLine&) const = default;
};

std::vector<DiffLine> parse_diff(std::istream& in);
std::vector<DiffLine> parse_diff(std::string_view text);
std::string serialize_diff(std::span<const DiffLine> lines);

// ---------------------------------------------------------------------------
// miRNA.dead

struct DeadEntry {
    std::string mima_id;
    std::string name;
    std::optional<std::string> forward_to;
    std::string comment;  // CC lines joined with '\n'; empty means no CC line
    bool operator==(const DeadEntry&) const = default;
};

std::vector<DeadEntry> parse_dead(std::istream& in);
std::vector<DeadEntry> parse_dead(std::string_view text);
std::string serialize_dead(std::span<const DeadEntry> entries);

// ---------------------------------------------------------------------------
// miFam.dat

struct FamilyMemberRef {
    std::string mima_id;
    std::string name;
    bool operator==(const FamilyMemberRef&) const = default;
};

struct FamilyEntry {
    std::string family_id;
    std::string family_name;
    std::vector<FamilyMemberRef> members;
    bool operator==(const FamilyEntry&) const = default;
};

std::vector<FamilyEntry> parse_fam(std::istream& in);
std::vector<FamilyEntry> parse_fam(std::string_view text);
std::string serialize_fam(std::span<const FamilyEntry> families);

}  // namespace mirlod::flatfile
