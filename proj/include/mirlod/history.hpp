#pragma once
// Replays per-release file sets into snapshots and the two history
// tables, and answers validity and navigation queries over versions.
//
// The interval model: every record states the entity's (name, sequence)
// during [first_appearance, last_appearance], stamped with the change
// that opened the interval. Open records end at the current maximum
// ordinal and are re-extended as releases arrive. A DEL or FW record is
// a tombstone with first == last == the deletion ordinal; nothing
// follows it. Mature parent links form a second stream per
// (mimat, parent) pair in which APH and RPH records alternate, starting
// with APH; the link exists exactly during APH record intervals.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mirlod/flatfile.hpp"
#include "mirlod/versionstore.hpp"

namespace mirlod::history {

using store::Ordinal;

struct NewOnExisting : Error { using Error::Error; };
struct ChangeOnMissing : Error { using Error::Error; };
struct RphWithoutParentLink : Error { using Error::Error; };
struct AphOnExistingLink : Error { using Error::Error; };
struct ForwardTargetMissing : Error { using Error::Error; };
struct DanglingParent : Error { using Error::Error; };
struct SnapshotDatMismatch : Error { using Error::Error; };
struct UnknownEntity : Error { using Error::Error; };

// The four flat files of one release. The diff covers only the period
// since the previous release.
struct ReleaseFileSet {
    std::string label;
    std::vector<flatfile::DatEntry> dat;
    std::vector<flatfile::DiffLine> diff;
    std::vector<flatfile::DeadEntry> dead;
    std::vector<flatfile::FamilyEntry> fam;
};

// Complete live state at one release.
struct Snapshot {
    struct EntityState {
        std::string name;
        std::string sequence;
        bool operator==(const EntityState&) const = default;
    };

    Ordinal at = 0;
    std::map<std::string, EntityState> hairpins;
    std::map<std::string, EntityState> matures;
    std::map<std::string, std::set<std::string>> parents;  // mimat -> live hairpins
    std::map<std::string, store::FamilyRecord> families;
    std::map<std::string, std::string> forwards;  // deleted hairpin -> replacement

    bool operator==(const Snapshot&) const = default;
};

enum class EntityKind { Hairpin, Mature };

enum class ChangeType { New, Name, Seq, Ns, Del, Fw, Aph, Rph };

std::string_view to_string(ChangeType c);
std::optional<ChangeType> parse_change_type(std::string_view s);

struct ChangeEvent {
    std::string entity_id;
    EntityKind kind = EntityKind::Hairpin;
    ChangeType change = ChangeType::New;
    Ordinal at = 0;
    std::optional<std::string> old_name, new_name;
    std::optional<std::string> old_sequence, new_sequence;
    std::optional<std::string> parent;      // APH/RPH
    std::optional<std::string> forward_to;  // FW
    std::string cause;                      // CC text of the dead entry

    bool operator==(const ChangeEvent&) const = default;
};

// Applies one release on top of prev (the release ordinal is prev.at + 1).
// New values come from the release's dat file, old values from prev; the
// resulting live hairpin set must equal the dat id set exactly.
std::pair<Snapshot, std::vector<ChangeEvent>> apply_release(const Snapshot& prev,
                                                            const ReleaseFileSet& files);

class History {
public:
    Ordinal current = 0;
    std::map<std::string, std::vector<store::HairpinHistoryRecord>> hairpin_records;
    std::map<std::string, std::vector<store::MatureHistoryRecord>> mature_state_records;
    std::map<std::string, std::vector<store::MatureHistoryRecord>> mature_link_records;
    std::vector<ChangeEvent> events;  // replay order
    std::vector<std::map<std::string, store::FamilyRecord>> families_by_ordinal;
    std::vector<store::DeadHairpinRecord> dead;

    bool known(std::string_view id, EntityKind kind) const;

    // Live state (name, sequence) at v; empty when the entity does not
    // exist or is already deleted at v.
    const store::HairpinHistoryRecord* hairpin_state_at(std::string_view id, Ordinal v) const;
    const store::MatureHistoryRecord* mature_state_at(std::string_view id, Ordinal v) const;

    // True when v is exactly the entity's deletion ordinal.
    bool tombstone_at(std::string_view id, EntityKind kind, Ordinal v) const;

    // [first ordinal with a description, last ordinal with one]; the
    // deletion ordinal is included because the deletion description
    // lives there.
    std::optional<std::pair<Ordinal, Ordinal>> existence_range(std::string_view id,
                                                               EntityKind kind) const;

    struct Death {
        ChangeType change;  // Del or Fw
        Ordinal at;
        std::optional<std::string> forward_to;
    };
    std::optional<Death> death(std::string_view id, EntityKind kind) const;

    std::vector<std::string> parents_at(std::string_view mimat, Ordinal v) const;
    std::vector<std::string> children_at(std::string_view mima_id, Ordinal v) const;

    const std::map<std::string, store::FamilyRecord>& families_at(Ordinal v) const;

    std::vector<const ChangeEvent*> events_for(std::string_view entity_id) const;

    // Rebuilds the lookup indexes; call after mutating the public fields.
    void finalize();

private:
    std::map<std::string, std::vector<std::size_t>> events_by_entity_;
    // parent hairpin -> (mimat, index into mature_link_records[mimat])
    std::map<std::string, std::vector<std::pair<std::string, std::size_t>>> links_by_parent_;
    std::map<std::string, std::size_t> dead_by_id_;
};

// Replays the releases oldest-first, registering each label, and builds
// the history tables. The first release is the bootstrap: when its diff
// is empty, NEW lines are synthesized from its dat file.
History build_history(const std::vector<ReleaseFileSet>& releases,
                      store::VersionRegistry& registry);

// Assembles the snapshot at a registered version purely from history
// records valid at its ordinal.
Snapshot snapshot_at(const History& history, const store::VersionRegistry& registry,
                     const std::string& label);

template <typename Record>
bool record_valid_at(const Record& record, Ordinal v) {
    return record.first_appearance <= v && v <= record.last_appearance;
}

// Minimal diff lines taking snapshot a to snapshot b: hairpin lines
// first, then mature lines, each group sorted by id.
std::vector<flatfile::DiffLine> derive_diff(const Snapshot& a, const Snapshot& b);

// Change events of one entity at exactly ordinal v.
std::vector<ChangeEvent> changes_at(const History& history, const std::string& entity_id,
                                    Ordinal v);

// Structural invariant check over the built tables; returns one message
// per violation (empty means healthy).
std::vector<std::string> check_invariants(const History& history);

// Canonical dat/dead/fam derivations used to package a snapshot as a
// release file set.
std::vector<flatfile::DatEntry> dat_from_snapshot(const Snapshot& s);
std::vector<flatfile::DeadEntry> dead_between(const Snapshot& a, const Snapshot& b);
std::vector<flatfile::FamilyEntry> fam_from_snapshot(const Snapshot& s);

// History table persistence (TSV, canonical order).
void save_history(const History& history, const std::filesystem::path& dir);
History load_history(const std::filesystem::path& dir, Ordinal current);

}  // namespace mirlod::history
