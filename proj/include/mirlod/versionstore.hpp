#pragma once
// Relational-style storage for the miRNA domain: the release registry,
// the core and join tables, and the interval record types maintained by
// the history engine. Everything here is immutable after the build phase
// and safe to share across concurrent readers.

#include <compare>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mirlod/errors.hpp"

namespace mirlod::store {

// 1-based position of a release in the registry. Registration order, not
// numeric label order, defines the total order over releases.
using Ordinal = int;

struct DuplicateLabel : Error { using Error::Error; };
struct UnknownLabel : Error { using Error::Error; };
struct InvalidLabel : Error { using Error::Error; };
struct MissingFile : Error { using Error::Error; };
struct DuplicateKey : Error { using Error::Error; };

struct MalformedRow : Error {
    MalformedRow(const std::string& file, std::size_t line, const std::string& what)
        : Error(file + ":" + std::to_string(line) + ": " + what), line(line) {}
    std::size_t line;
};

class VersionRegistry {
public:
    // Returns the new label's ordinal (max ordinal + 1).
    Ordinal register_version(const std::string& label);

    std::strong_ordering compare(const std::string& a, const std::string& b) const;

    bool has(const std::string& label) const;
    Ordinal ordinal_of(const std::string& label) const;
    const std::string& label_of(Ordinal ordinal) const;

    // Ordinal of the newest release; 0 when the registry is empty.
    Ordinal current() const { return static_cast<Ordinal>(labels_.size()); }
    std::size_t size() const { return labels_.size(); }
    const std::vector<std::string>& labels() const { return labels_; }

private:
    std::vector<std::string> labels_;
    std::unordered_map<std::string, Ordinal> ordinals_;
};

// ---------------------------------------------------------------------------
// Core tables

struct HairpinRow {
    std::string mima_id;
    std::string name;
    std::string sequence;
    std::string species;
    std::string chromosome;
    char strand = '+';
    long start = 0;
    long end = 0;
};

struct MatureRow {
    std::string mimat;
    std::string name;
    std::string sequence;
    std::string species;
};

struct TranscriptRow {
    long tid = 0;
    std::string enstid;
    std::string species;
    char strand = '+';
    std::string location;
};

struct ProteinGeneRow {
    std::string ensgid;
    std::string enstid;
    std::string name;
    std::string description;
};

struct KeggRow {
    std::string kegg_id;
    std::string name;
};

struct TissueRow {
    std::string name;
    std::string species;
};

// Join tables

struct MatureHairpinConn {
    std::string mimat;
    std::string mima_id;
};

struct MicroT5Interaction {
    std::string mimat;
    long tid = 0;
};

struct ProteinGeneKeggConn {
    std::string ensgid;
    std::string kegg_id;
};

struct MatureTissueConn {
    std::string mimat;
    std::string tissue_name;
    std::string species;
};

struct TableSet {
    std::vector<HairpinRow> hairpins;
    std::vector<MatureRow> matures;
    std::vector<TranscriptRow> transcripts;
    std::vector<ProteinGeneRow> proteingenes;
    std::vector<KeggRow> keggs;
    std::vector<TissueRow> tissues;
    std::vector<MatureHairpinConn> mature_hairpin;
    std::vector<MicroT5Interaction> microt5;
    std::vector<ProteinGeneKeggConn> gene_kegg;
    std::vector<MatureTissueConn> mature_tissue;

    const HairpinRow* hairpin(std::string_view mima_id) const;
    const MatureRow* mature(std::string_view mimat) const;
    const TranscriptRow* transcript(long tid) const;
    const ProteinGeneRow* proteingene(std::string_view ensgid) const;
    const KeggRow* kegg(std::string_view kegg_id) const;
    const TissueRow* tissue(std::string_view name, std::string_view species) const;

    // Rebuilds key indexes; throws DuplicateKey on key collisions.
    void reindex();

private:
    std::unordered_map<std::string, std::size_t> hairpin_by_id_;
    std::unordered_map<std::string, std::size_t> mature_by_id_;
    std::unordered_map<long, std::size_t> transcript_by_tid_;
    std::unordered_map<std::string, std::size_t> gene_by_id_;
    std::unordered_map<std::string, std::size_t> kegg_by_id_;
    std::map<std::pair<std::string, std::string>, std::size_t> tissue_by_key_;
};

// Loads the table TSVs from a directory. Row-local invariants (key shape,
// sequence alphabet, start <= end) are enforced here; referential
// integrity is not — see validate().
TableSet load_tables(const std::filesystem::path& dir);

// Writes all ten TSVs in canonical key-sorted order.
void save_tables(const TableSet& tables, const std::filesystem::path& dir);

struct IntegrityViolation {
    std::string table;    // table holding the offending row
    std::string column;   // dangling column
    std::string value;    // offending key value
    std::string message;
};

// Reports every dangling foreign key. Empty result means every join the
// mapping layer can take resolves without lookup misses.
std::vector<IntegrityViolation> validate(const TableSet& tables);

// ---------------------------------------------------------------------------
// History record types (built by the history module, stored here because
// they are plain table rows)

enum class HairpinChange { New, Name, Seq, Ns, Fw, Del };
enum class MatureChange { New, Name, Seq, Ns, Aph, Rph, Del };

std::string_view to_string(HairpinChange c);
std::string_view to_string(MatureChange c);
std::optional<HairpinChange> parse_hairpin_change(std::string_view s);
std::optional<MatureChange> parse_mature_change(std::string_view s);

// One interval row: the entity's state between first_appearance and
// last_appearance, stamped with the change that opened the interval.
struct HairpinHistoryRecord {
    std::string mima_id;
    HairpinChange change = HairpinChange::New;
    std::string name;
    std::string sequence;
    Ordinal first_appearance = 0;
    Ordinal last_appearance = 0;

    bool operator==(const HairpinHistoryRecord&) const = default;
};

// Mature records come in two streams: state records (NEW/NAME/SEQ/NS/DEL,
// parent_hairpin empty) and link records (APH/RPH, parent_hairpin set).
struct MatureHistoryRecord {
    std::string mimat;
    MatureChange change = MatureChange::New;
    std::string name;
    std::string sequence;
    std::optional<std::string> parent_hairpin;
    Ordinal first_appearance = 0;
    Ordinal last_appearance = 0;

    bool operator==(const MatureHistoryRecord&) const = default;
};

struct DeadHairpinRecord {
    std::string mima_id;
    std::string name;
    std::optional<std::string> forward_to;
    std::string comment;
    Ordinal deleted_in = 0;

    bool operator==(const DeadHairpinRecord&) const = default;
};

struct FamilyRecord {
    std::string family_id;
    std::string family_name;
    std::set<std::string> members;

    bool operator==(const FamilyRecord&) const = default;
};

}  // namespace mirlod::store
