#include "mirlod/history.hpp"

#include <algorithm>
#include <cassert>

#include "mirlod/util.hpp"

namespace mirlod::history {

using flatfile::DatEntry;
using flatfile::DeadEntry;
using flatfile::DiffChange;
using flatfile::DiffLine;
using flatfile::DiffOp;
using flatfile::FamilyEntry;

std::string_view to_string(ChangeType c) {
    switch (c) {
        case ChangeType::New: return "NEW";
        case ChangeType::Name: return "NAME";
        case ChangeType::Seq: return "SEQ";
        case ChangeType::Ns: return "NS";
        case ChangeType::Del: return "DEL";
        case ChangeType::Fw: return "FW";
        case ChangeType::Aph: return "APH";
        case ChangeType::Rph: return "RPH";
    }
    return "?";
}

std::optional<ChangeType> parse_change_type(std::string_view s) {
    if (s == "NEW") return ChangeType::New;
    if (s == "NAME") return ChangeType::Name;
    if (s == "SEQ") return ChangeType::Seq;
    if (s == "NS") return ChangeType::Ns;
    if (s == "DEL") return ChangeType::Del;
    if (s == "FW") return ChangeType::Fw;
    if (s == "APH") return ChangeType::Aph;
    if (s == "RPH") return ChangeType::Rph;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// apply_release

namespace {

struct DatView {
    std::map<std::string, Snapshot::EntityState> hairpins;
    std::map<std::string, Snapshot::EntityState> matures;  // first occurrence wins
};

DatView index_dat(const std::vector<DatEntry>& dat) {
    DatView view;
    for (const auto& e : dat) {
        view.hairpins[e.mima_id] = {e.name, e.sequence};
        for (const auto& m : e.matures) view.matures.emplace(m.mimat, Snapshot::EntityState{m.name, m.sequence});
    }
    return view;
}

std::vector<DiffLine> bootstrap_diff(const std::vector<DatEntry>& dat) {
    std::vector<DiffLine> lines;
    std::set<std::string> seen_matures;
    for (const auto& e : dat) lines.push_back({e.mima_id, e.name, {{DiffOp::New, std::nullopt}}});
    for (const auto& e : dat) {
        for (const auto& m : e.matures) {
            if (seen_matures.insert(m.mimat).second) {
                lines.push_back(
                    {m.mimat, m.name, {{DiffOp::New, std::nullopt}, {DiffOp::AddParent, e.mima_id}}});
            } else {
                // additional parent of an already-listed mature
                for (auto& line : lines)
                    if (line.entity_id == m.mimat)
                        line.changes.push_back({DiffOp::AddParent, e.mima_id});
            }
        }
    }
    return lines;
}

}  // namespace

std::pair<Snapshot, std::vector<ChangeEvent>> apply_release(const Snapshot& prev,
                                                            const ReleaseFileSet& files) {
    const Ordinal at = prev.at + 1;
    DatView dat = index_dat(files.dat);

    std::map<std::string, const DeadEntry*> dead_by_id;
    for (const auto& d : files.dead) dead_by_id[d.mima_id] = &d;

    Snapshot next = prev;
    next.at = at;
    std::vector<ChangeEvent> events;

    const std::vector<DiffLine>* diff = &files.diff;
    std::vector<DiffLine> synthesized;
    if (prev.at == 0 && files.diff.empty() && !files.dat.empty()) {
        synthesized = bootstrap_diff(files.dat);
        diff = &synthesized;
    }

    auto dat_state = [&](const std::string& id, bool mature) -> const Snapshot::EntityState& {
        const auto& table = mature ? dat.matures : dat.hairpins;
        auto it = table.find(id);
        if (it == table.end())
            throw SnapshotDatMismatch("release " + files.label + ": " + id +
                                      " changed by diff but absent from dat");
        return it->second;
    };

    for (const auto& line : *diff) {
        const bool mature = line.is_mature();
        const std::string& id = line.entity_id;
        auto& table = mature ? next.matures : next.hairpins;

        bool has_new = false, has_name = false, has_seq = false, has_del = false, has_fw = false;
        std::vector<DiffChange> link_ops;
        for (const auto& c : line.changes) {
            switch (c.op) {
                case DiffOp::New: has_new = true; break;
                case DiffOp::Name: has_name = true; break;
                case DiffOp::Sequence: has_seq = true; break;
                case DiffOp::Delete: has_del = true; break;
                case DiffOp::Forward: has_fw = true; break;
                case DiffOp::AddParent:
                case DiffOp::RemoveParent: link_ops.push_back(c); break;
            }
        }

        if (has_new) {
            if (table.count(id))
                throw NewOnExisting("release " + files.label + ": NEW on existing entity " + id);
            const auto& state = dat_state(id, mature);
            table[id] = state;
            ChangeEvent ev{id, mature ? EntityKind::Mature : EntityKind::Hairpin,
                           ChangeType::New, at};
            ev.new_name = state.name;
            ev.new_sequence = state.sequence;
            events.push_back(std::move(ev));
        }

        if (has_name || has_seq) {
            auto it = table.find(id);
            if (it == table.end())
                throw ChangeOnMissing("release " + files.label + ": change on missing entity " + id);
            const auto& state = dat_state(id, mature);
            ChangeEvent ev{id, mature ? EntityKind::Mature : EntityKind::Hairpin,
                           has_name && has_seq ? ChangeType::Ns
                           : has_name          ? ChangeType::Name
                                               : ChangeType::Seq,
                           at};
            if (has_name) {
                ev.old_name = it->second.name;
                ev.new_name = state.name;
                it->second.name = state.name;
            }
            if (has_seq) {
                ev.old_sequence = it->second.sequence;
                ev.new_sequence = state.sequence;
                it->second.sequence = state.sequence;
            }
            events.push_back(std::move(ev));
        }

        for (const auto& op : link_ops) {
            if (!next.matures.count(id))
                throw ChangeOnMissing("release " + files.label + ": parent change on missing mature " +
                                      id);
            auto& set = next.parents[id];
            if (op.op == DiffOp::AddParent) {
                if (!set.insert(*op.parent).second)
                    throw AphOnExistingLink("release " + files.label + ": mature " + id +
                                            " already has parent " + *op.parent);
                ChangeEvent ev{id, EntityKind::Mature, ChangeType::Aph, at};
                ev.parent = *op.parent;
                events.push_back(std::move(ev));
            } else {
                if (set.erase(*op.parent) == 0)
                    throw RphWithoutParentLink("release " + files.label + ": mature " + id +
                                               " has no parent " + *op.parent);
                if (set.empty()) next.parents.erase(id);
                ChangeEvent ev{id, EntityKind::Mature, ChangeType::Rph, at};
                ev.parent = *op.parent;
                events.push_back(std::move(ev));
            }
        }

        if (has_del || has_fw) {
            auto it = table.find(id);
            if (it == table.end())
                throw ChangeOnMissing("release " + files.label + ": delete of missing entity " + id);
            ChangeEvent ev{id, mature ? EntityKind::Mature : EntityKind::Hairpin,
                           has_fw ? ChangeType::Fw : ChangeType::Del, at};
            ev.old_name = it->second.name;
            ev.old_sequence = it->second.sequence;
            auto dead_it = dead_by_id.find(id);
            if (!mature && dead_it != dead_by_id.end()) ev.cause = dead_it->second->comment;
            if (has_fw) {
                if (dead_it == dead_by_id.end() || !dead_it->second->forward_to)
                    throw ForwardTargetMissing("release " + files.label + ": FORWARD on " + id +
                                               " without a dead entry carrying FW");
                ev.forward_to = *dead_it->second->forward_to;
                next.forwards[id] = *ev.forward_to;
            }
            table.erase(it);
            if (mature) next.parents.erase(id);
            events.push_back(std::move(ev));
        }
    }

    next.families.clear();
    for (const auto& f : files.fam) {
        store::FamilyRecord rec{f.family_id, f.family_name, {}};
        for (const auto& m : f.members) rec.members.insert(m.mima_id);
        next.families[f.family_id] = std::move(rec);
    }

    for (const auto& [mimat, set] : next.parents)
        for (const auto& p : set)
            if (!next.hairpins.count(p))
                throw DanglingParent("release " + files.label + ": mature " + mimat +
                                     " has dead parent " + p);
    for (const auto& [from, to] : next.forwards)
        if (!next.hairpins.count(to))
            throw ForwardTargetMissing("release " + files.label + ": forward target " + to +
                                       " of " + from + " is not live");

    // the replayed live set must be exactly the dat id set
    for (const auto& [id, state] : dat.hairpins)
        if (!next.hairpins.count(id))
            throw SnapshotDatMismatch("release " + files.label + ": dat lists " + id +
                                      " but replay says it is not live");
    for (const auto& [id, state] : next.hairpins)
        if (!dat.hairpins.count(id))
            throw SnapshotDatMismatch("release " + files.label + ": replay keeps " + id +
                                      " but dat omits it");

    return {std::move(next), std::move(events)};
}

// ---------------------------------------------------------------------------
// build_history

namespace {

store::HairpinChange hairpin_change_of(ChangeType c) {
    switch (c) {
        case ChangeType::New: return store::HairpinChange::New;
        case ChangeType::Name: return store::HairpinChange::Name;
        case ChangeType::Seq: return store::HairpinChange::Seq;
        case ChangeType::Ns: return store::HairpinChange::Ns;
        case ChangeType::Del: return store::HairpinChange::Del;
        case ChangeType::Fw: return store::HairpinChange::Fw;
        default: assert(false); return store::HairpinChange::New;
    }
}

store::MatureChange mature_change_of(ChangeType c) {
    switch (c) {
        case ChangeType::New: return store::MatureChange::New;
        case ChangeType::Name: return store::MatureChange::Name;
        case ChangeType::Seq: return store::MatureChange::Seq;
        case ChangeType::Ns: return store::MatureChange::Ns;
        case ChangeType::Del: return store::MatureChange::Del;
        case ChangeType::Aph: return store::MatureChange::Aph;
        case ChangeType::Rph: return store::MatureChange::Rph;
        default: assert(false); return store::MatureChange::New;
    }
}

}  // namespace

void History::finalize() {
    events_by_entity_.clear();
    for (std::size_t i = 0; i < events.size(); ++i)
        events_by_entity_[events[i].entity_id].push_back(i);
    links_by_parent_.clear();
    for (const auto& [mimat, records] : mature_link_records)
        for (std::size_t i = 0; i < records.size(); ++i)
            links_by_parent_[*records[i].parent_hairpin].emplace_back(mimat, i);
    dead_by_id_.clear();
    for (std::size_t i = 0; i < dead.size(); ++i) dead_by_id_[dead[i].mima_id] = i;
}

History build_history(const std::vector<ReleaseFileSet>& releases,
                      store::VersionRegistry& registry) {
    History h;
    Snapshot snap;
    for (const auto& files : releases) {
        registry.register_version(files.label);
        auto [next, events] = apply_release(snap, files);
        snap = std::move(next);
        h.families_by_ordinal.push_back(snap.families);
        for (auto& ev : events) h.events.push_back(std::move(ev));
    }
    h.current = static_cast<Ordinal>(releases.size());

    // Hairpin state records.
    for (const auto& ev : h.events) {
        if (ev.kind != EntityKind::Hairpin) continue;
        auto& records = h.hairpin_records[ev.entity_id];
        if (!records.empty() && records.back().last_appearance >= ev.at)
            records.back().last_appearance = ev.at - 1;
        store::HairpinHistoryRecord rec;
        rec.mima_id = ev.entity_id;
        rec.change = hairpin_change_of(ev.change);
        if (ev.change == ChangeType::Del || ev.change == ChangeType::Fw) {
            rec.name = *ev.old_name;
            rec.sequence = *ev.old_sequence;
            rec.first_appearance = rec.last_appearance = ev.at;
        } else {
            rec.name = ev.new_name ? *ev.new_name : records.back().name;
            rec.sequence = ev.new_sequence ? *ev.new_sequence : records.back().sequence;
            rec.first_appearance = ev.at;
            rec.last_appearance = h.current;
        }
        records.push_back(std::move(rec));
    }

    // Mature state and link records. Link records are stamped with the
    // mature's state at the link event; a mature's death closes its open
    // link records at the previous ordinal.
    for (const auto& ev : h.events) {
        if (ev.kind != EntityKind::Mature) continue;
        auto& states = h.mature_state_records[ev.entity_id];
        auto current_state = [&]() -> const store::MatureHistoryRecord& {
            assert(!states.empty());
            return states.back();
        };
        switch (ev.change) {
            case ChangeType::New:
            case ChangeType::Name:
            case ChangeType::Seq:
            case ChangeType::Ns: {
                if (!states.empty() && states.back().last_appearance >= ev.at)
                    states.back().last_appearance = ev.at - 1;
                store::MatureHistoryRecord rec;
                rec.mimat = ev.entity_id;
                rec.change = mature_change_of(ev.change);
                rec.name = ev.new_name ? *ev.new_name : states.back().name;
                rec.sequence = ev.new_sequence ? *ev.new_sequence : states.back().sequence;
                rec.first_appearance = ev.at;
                rec.last_appearance = h.current;
                states.push_back(std::move(rec));
                break;
            }
            case ChangeType::Del: {
                if (!states.empty() && states.back().last_appearance >= ev.at)
                    states.back().last_appearance = ev.at - 1;
                store::MatureHistoryRecord rec;
                rec.mimat = ev.entity_id;
                rec.change = store::MatureChange::Del;
                rec.name = *ev.old_name;
                rec.sequence = *ev.old_sequence;
                rec.first_appearance = rec.last_appearance = ev.at;
                states.push_back(std::move(rec));
                auto links = h.mature_link_records.find(ev.entity_id);
                if (links != h.mature_link_records.end()) {
                    auto& vec = links->second;
                    for (auto& link : vec)
                        if (link.last_appearance >= ev.at) link.last_appearance = ev.at - 1;
                    vec.erase(std::remove_if(vec.begin(), vec.end(),
                                             [](const auto& r) {
                                                 return r.last_appearance < r.first_appearance;
                                             }),
                              vec.end());
                }
                break;
            }
            case ChangeType::Aph:
            case ChangeType::Rph: {
                auto& links = h.mature_link_records[ev.entity_id];
                for (auto& link : links)
                    if (*link.parent_hairpin == *ev.parent && link.last_appearance >= ev.at)
                        link.last_appearance = ev.at - 1;
                store::MatureHistoryRecord rec;
                rec.mimat = ev.entity_id;
                rec.change = mature_change_of(ev.change);
                rec.name = current_state().name;
                rec.sequence = current_state().sequence;
                rec.parent_hairpin = *ev.parent;
                rec.first_appearance = ev.at;
                rec.last_appearance = h.current;
                links.push_back(std::move(rec));
                break;
            }
            default: assert(false);
        }
    }

    // Dead hairpin records from the deletion events.
    for (const auto& ev : h.events) {
        if (ev.kind != EntityKind::Hairpin) continue;
        if (ev.change != ChangeType::Del && ev.change != ChangeType::Fw) continue;
        h.dead.push_back({ev.entity_id, *ev.old_name, ev.forward_to, ev.cause, ev.at});
    }

    h.finalize();
    return h;
}

// ---------------------------------------------------------------------------
// queries

bool History::known(std::string_view id, EntityKind kind) const {
    if (kind == EntityKind::Hairpin) return hairpin_records.count(std::string(id)) != 0;
    return mature_state_records.count(std::string(id)) != 0;
}

const store::HairpinHistoryRecord* History::hairpin_state_at(std::string_view id,
                                                             Ordinal v) const {
    auto it = hairpin_records.find(std::string(id));
    if (it == hairpin_records.end()) return nullptr;
    for (const auto& rec : it->second) {
        if (rec.change == store::HairpinChange::Del || rec.change == store::HairpinChange::Fw)
            continue;
        if (record_valid_at(rec, v)) return &rec;
    }
    return nullptr;
}

const store::MatureHistoryRecord* History::mature_state_at(std::string_view id, Ordinal v) const {
    auto it = mature_state_records.find(std::string(id));
    if (it == mature_state_records.end()) return nullptr;
    for (const auto& rec : it->second) {
        if (rec.change == store::MatureChange::Del) continue;
        if (record_valid_at(rec, v)) return &rec;
    }
    return nullptr;
}

bool History::tombstone_at(std::string_view id, EntityKind kind, Ordinal v) const {
    auto d = death(id, kind);
    return d && d->at == v;
}

std::optional<std::pair<Ordinal, Ordinal>> History::existence_range(std::string_view id,
                                                                    EntityKind kind) const {
    if (kind == EntityKind::Hairpin) {
        auto it = hairpin_records.find(std::string(id));
        if (it == hairpin_records.end() || it->second.empty()) return std::nullopt;
        return std::make_pair(it->second.front().first_appearance,
                              it->second.back().last_appearance);
    }
    auto it = mature_state_records.find(std::string(id));
    if (it == mature_state_records.end() || it->second.empty()) return std::nullopt;
    return std::make_pair(it->second.front().first_appearance,
                          it->second.back().last_appearance);
}

std::optional<History::Death> History::death(std::string_view id, EntityKind kind) const {
    if (kind == EntityKind::Hairpin) {
        auto it = hairpin_records.find(std::string(id));
        if (it == hairpin_records.end() || it->second.empty()) return std::nullopt;
        const auto& last = it->second.back();
        if (last.change == store::HairpinChange::Del)
            return Death{ChangeType::Del, last.first_appearance, std::nullopt};
        if (last.change == store::HairpinChange::Fw) {
            std::optional<std::string> fw;
            if (auto dit = dead_by_id_.find(std::string(id)); dit != dead_by_id_.end())
                fw = dead[dit->second].forward_to;
            return Death{ChangeType::Fw, last.first_appearance, fw};
        }
        return std::nullopt;
    }
    auto it = mature_state_records.find(std::string(id));
    if (it == mature_state_records.end() || it->second.empty()) return std::nullopt;
    const auto& last = it->second.back();
    if (last.change == store::MatureChange::Del)
        return Death{ChangeType::Del, last.first_appearance, std::nullopt};
    return std::nullopt;
}

std::vector<std::string> History::parents_at(std::string_view mimat, Ordinal v) const {
    std::vector<std::string> out;
    auto it = mature_link_records.find(std::string(mimat));
    if (it == mature_link_records.end()) return out;
    for (const auto& rec : it->second)
        if (rec.change == store::MatureChange::Aph && record_valid_at(rec, v))
            out.push_back(*rec.parent_hairpin);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::string> History::children_at(std::string_view mima_id, Ordinal v) const {
    std::vector<std::string> out;
    auto it = links_by_parent_.find(std::string(mima_id));
    if (it == links_by_parent_.end()) return out;
    for (const auto& [mimat, index] : it->second) {
        const auto& rec = mature_link_records.at(mimat)[index];
        if (rec.change == store::MatureChange::Aph && record_valid_at(rec, v))
            out.push_back(mimat);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

const std::map<std::string, store::FamilyRecord>& History::families_at(Ordinal v) const {
    static const std::map<std::string, store::FamilyRecord> empty;
    if (v < 1 || static_cast<std::size_t>(v) > families_by_ordinal.size()) return empty;
    return families_by_ordinal[static_cast<std::size_t>(v) - 1];
}

std::vector<const ChangeEvent*> History::events_for(std::string_view entity_id) const {
    std::vector<const ChangeEvent*> out;
    auto it = events_by_entity_.find(std::string(entity_id));
    if (it == events_by_entity_.end()) return out;
    for (auto index : it->second) out.push_back(&events[index]);
    return out;
}

Snapshot snapshot_at(const History& history, const store::VersionRegistry& registry,
                     const std::string& label) {
    const Ordinal v = registry.ordinal_of(label);
    Snapshot snap;
    snap.at = v;
    for (const auto& [id, records] : history.hairpin_records)
        for (const auto& rec : records) {
            if (rec.change == store::HairpinChange::Del || rec.change == store::HairpinChange::Fw)
                continue;
            if (record_valid_at(rec, v)) snap.hairpins[id] = {rec.name, rec.sequence};
        }
    for (const auto& [id, records] : history.mature_state_records)
        for (const auto& rec : records) {
            if (rec.change == store::MatureChange::Del) continue;
            if (record_valid_at(rec, v)) snap.matures[id] = {rec.name, rec.sequence};
        }
    for (const auto& [id, records] : history.mature_link_records)
        for (const auto& rec : records)
            if (rec.change == store::MatureChange::Aph && record_valid_at(rec, v))
                snap.parents[id].insert(*rec.parent_hairpin);
    snap.families = history.families_at(v);
    for (const auto& d : history.dead)
        if (d.deleted_in <= v && d.forward_to) snap.forwards[d.mima_id] = *d.forward_to;
    return snap;
}

// ---------------------------------------------------------------------------
// derive_diff

std::vector<DiffLine> derive_diff(const Snapshot& a, const Snapshot& b) {
    std::vector<DiffLine> hairpin_lines;
    std::vector<DiffLine> mature_lines;

    for (const auto& [id, state] : b.hairpins) {
        auto it = a.hairpins.find(id);
        if (it == a.hairpins.end()) {
            hairpin_lines.push_back({id, state.name, {{DiffOp::New, std::nullopt}}});
            continue;
        }
        std::vector<DiffChange> changes;
        if (it->second.sequence != state.sequence) changes.push_back({DiffOp::Sequence, std::nullopt});
        if (it->second.name != state.name) changes.push_back({DiffOp::Name, std::nullopt});
        if (!changes.empty()) hairpin_lines.push_back({id, state.name, std::move(changes)});
    }
    for (const auto& [id, state] : a.hairpins) {
        if (b.hairpins.count(id)) continue;
        bool forwarded = b.forwards.count(id) && !a.forwards.count(id);
        hairpin_lines.push_back(
            {id, state.name, {{forwarded ? DiffOp::Forward : DiffOp::Delete, std::nullopt}}});
    }

    static const std::set<std::string> no_parents;
    auto parents_of = [](const Snapshot& s, const std::string& id) -> const std::set<std::string>& {
        auto it = s.parents.find(id);
        return it == s.parents.end() ? no_parents : it->second;
    };

    for (const auto& [id, state] : b.matures) {
        auto it = a.matures.find(id);
        std::vector<DiffChange> changes;
        if (it == a.matures.end()) {
            changes.push_back({DiffOp::New, std::nullopt});
            for (const auto& p : parents_of(b, id)) changes.push_back({DiffOp::AddParent, p});
            mature_lines.push_back({id, state.name, std::move(changes)});
            continue;
        }
        if (it->second.sequence != state.sequence) changes.push_back({DiffOp::Sequence, std::nullopt});
        if (it->second.name != state.name) changes.push_back({DiffOp::Name, std::nullopt});
        const auto& old_parents = parents_of(a, id);
        const auto& new_parents = parents_of(b, id);
        for (const auto& p : new_parents)
            if (!old_parents.count(p)) changes.push_back({DiffOp::AddParent, p});
        for (const auto& p : old_parents)
            if (!new_parents.count(p)) changes.push_back({DiffOp::RemoveParent, p});
        if (!changes.empty()) mature_lines.push_back({id, state.name, std::move(changes)});
    }
    for (const auto& [id, state] : a.matures) {
        if (b.matures.count(id)) continue;
        mature_lines.push_back({id, state.name, {{DiffOp::Delete, std::nullopt}}});
    }

    auto by_id = [](const DiffLine& x, const DiffLine& y) { return x.entity_id < y.entity_id; };
    std::sort(hairpin_lines.begin(), hairpin_lines.end(), by_id);
    std::sort(mature_lines.begin(), mature_lines.end(), by_id);

    std::vector<DiffLine> out = std::move(hairpin_lines);
    out.insert(out.end(), std::make_move_iterator(mature_lines.begin()),
               std::make_move_iterator(mature_lines.end()));
    return out;
}

std::vector<ChangeEvent> changes_at(const History& history, const std::string& entity_id,
                                    Ordinal v) {
    EntityKind kind =
        util::is_mature_id(entity_id) ? EntityKind::Mature : EntityKind::Hairpin;
    if (!history.known(entity_id, kind)) throw UnknownEntity("unknown entity " + entity_id);
    std::vector<ChangeEvent> out;
    for (const ChangeEvent* ev : history.events_for(entity_id))
        if (ev->at == v) out.push_back(*ev);
    return out;
}

// ---------------------------------------------------------------------------
// invariants

std::vector<std::string> check_invariants(const History& h) {
    std::vector<std::string> out;
    auto complain = [&](std::string message) { out.push_back(std::move(message)); };

    auto check_state_stream = [&](const std::string& id, const auto& records, auto is_new,
                                  auto is_death) {
        if (records.empty()) {
            complain(id + ": empty record stream");
            return;
        }
        if (!is_new(records.front())) complain(id + ": first record is not NEW");
        for (std::size_t i = 0; i < records.size(); ++i) {
            const auto& rec = records[i];
            if (rec.first_appearance > rec.last_appearance)
                complain(id + ": record with first > last");
            if (i > 0) {
                if (is_death(records[i - 1])) complain(id + ": record follows a deletion record");
                if (rec.first_appearance != records[i - 1].last_appearance + 1)
                    complain(id + ": records are not contiguous");
            }
        }
        if (!is_death(records.back()) && records.back().last_appearance != h.current)
            complain(id + ": open record does not reach the current ordinal");
    };

    for (const auto& [id, records] : h.hairpin_records)
        check_state_stream(id, records,
                           [](const auto& r) { return r.change == store::HairpinChange::New; },
                           [](const auto& r) {
                               return r.change == store::HairpinChange::Del ||
                                      r.change == store::HairpinChange::Fw;
                           });
    for (const auto& [id, records] : h.mature_state_records)
        check_state_stream(id, records,
                           [](const auto& r) { return r.change == store::MatureChange::New; },
                           [](const auto& r) { return r.change == store::MatureChange::Del; });

    // Per (mimat, parent) pair, APH and RPH alternate starting with APH.
    for (const auto& [id, records] : h.mature_link_records) {
        std::map<std::string, std::vector<const store::MatureHistoryRecord*>> by_parent;
        for (const auto& rec : records) by_parent[*rec.parent_hairpin].push_back(&rec);
        for (auto& [parent, stream] : by_parent) {
            std::sort(stream.begin(), stream.end(), [](const auto* x, const auto* y) {
                return x->first_appearance < y->first_appearance;
            });
            for (std::size_t i = 0; i < stream.size(); ++i) {
                bool want_aph = (i % 2 == 0);
                bool is_aph = stream[i]->change == store::MatureChange::Aph;
                if (want_aph != is_aph)
                    complain(id + "/" + parent + ": link stream does not alternate APH/RPH");
                if (i > 0 &&
                    stream[i]->first_appearance != stream[i - 1]->last_appearance + 1)
                    complain(id + "/" + parent + ": link stream is not contiguous");
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// snapshot -> flat files

std::vector<DatEntry> dat_from_snapshot(const Snapshot& s) {
    // invert the parents relation
    std::map<std::string, std::vector<std::string>> children;
    for (const auto& [mimat, parents] : s.parents)
        for (const auto& p : parents) children[p].push_back(mimat);

    std::vector<DatEntry> out;
    for (const auto& [id, state] : s.hairpins) {
        DatEntry e;
        e.mima_id = id;
        e.name = state.name;
        e.description = state.name + " stem-loop";
        auto it = children.find(id);
        if (it != children.end()) {
            std::sort(it->second.begin(), it->second.end());
            for (const auto& mimat : it->second) {
                const auto& m = s.matures.at(mimat);
                e.matures.push_back({mimat, m.name, m.sequence});
            }
        }
        e.publications.push_back("PMID:" + id.substr(2));
        e.sequence = state.sequence;
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<DeadEntry> dead_between(const Snapshot& a, const Snapshot& b) {
    std::vector<DeadEntry> out;
    for (const auto& [id, state] : a.hairpins) {
        if (b.hairpins.count(id)) continue;
        DeadEntry e;
        e.mima_id = id;
        e.name = state.name;
        auto fw = b.forwards.find(id);
        if (fw != b.forwards.end()) e.forward_to = fw->second;
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<FamilyEntry> fam_from_snapshot(const Snapshot& s) {
    std::vector<FamilyEntry> out;
    for (const auto& [id, rec] : s.families) {
        FamilyEntry e;
        e.family_id = id;
        e.family_name = rec.family_name;
        for (const auto& m : rec.members) {
            auto it = s.hairpins.find(m);
            e.members.push_back({m, it != s.hairpins.end() ? it->second.name : m});
        }
        out.push_back(std::move(e));
    }
    return out;
}

// ---------------------------------------------------------------------------
// persistence

namespace {

constexpr const char* kHairpinsHistoryFile = "hairpins_history.tsv";
constexpr const char* kMaturesHistoryFile = "matures_history.tsv";
constexpr const char* kDeadsFile = "deads.tsv";
constexpr const char* kFamiliesHistoryFile = "families_history.tsv";
constexpr const char* kEventsFile = "events.tsv";

std::string opt_cell(const std::optional<std::string>& v) { return v ? *v : std::string(); }
std::optional<std::string> cell_opt(std::string_view v) {
    if (v.empty()) return std::nullopt;
    return std::string(v);
}

}  // namespace

void save_history(const History& h, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);

    std::string out;
    for (const auto& [id, records] : h.hairpin_records)
        for (const auto& r : records)
            out += r.mima_id + "\t" + std::string(store::to_string(r.change)) + "\t" + r.name +
                   "\t" + r.sequence + "\t" + std::to_string(r.first_appearance) + "\t" +
                   std::to_string(r.last_appearance) + "\n";
    util::write_file(dir / kHairpinsHistoryFile, out);
    out.clear();

    // State and link records share the file; ties on first_appearance put
    // state records before link records, link ties order by parent.
    std::set<std::string> mimats;
    for (const auto& [id, records] : h.mature_state_records) mimats.insert(id);
    for (const auto& [id, records] : h.mature_link_records) mimats.insert(id);
    for (const auto& id : mimats) {
        std::vector<const store::MatureHistoryRecord*> rows;
        if (auto it = h.mature_state_records.find(id); it != h.mature_state_records.end())
            for (const auto& r : it->second) rows.push_back(&r);
        if (auto it = h.mature_link_records.find(id); it != h.mature_link_records.end())
            for (const auto& r : it->second) rows.push_back(&r);
        std::sort(rows.begin(), rows.end(), [](const auto* x, const auto* y) {
            auto key = [](const auto* r) {
                return std::make_tuple(r->first_appearance, r->parent_hairpin.has_value(),
                                       r->parent_hairpin.value_or(std::string()));
            };
            return key(x) < key(y);
        });
        for (const auto* r : rows)
            out += r->mimat + "\t" + std::string(store::to_string(r->change)) + "\t" + r->name +
                   "\t" + r->sequence + "\t" + (r->parent_hairpin ? *r->parent_hairpin : "-") +
                   "\t" + std::to_string(r->first_appearance) + "\t" +
                   std::to_string(r->last_appearance) + "\n";
    }
    util::write_file(dir / kMaturesHistoryFile, out);
    out.clear();

    std::vector<store::DeadHairpinRecord> dead = h.dead;
    std::sort(dead.begin(), dead.end(), [](const auto& a, const auto& b) {
        return std::tie(a.deleted_in, a.mima_id) < std::tie(b.deleted_in, b.mima_id);
    });
    for (const auto& d : dead)
        out += d.mima_id + "\t" + d.name + "\t" + (d.forward_to ? *d.forward_to : "-") + "\t" +
               std::to_string(d.deleted_in) + "\t" + d.comment + "\n";
    util::write_file(dir / kDeadsFile, out);
    out.clear();

    // Family membership intervals: one row per maximal span over which a
    // member stays in the family under an unchanged family name.
    struct FamKey {
        std::string family_id, family_name, member;
        auto operator<=>(const FamKey&) const = default;
    };
    std::map<FamKey, std::vector<std::pair<Ordinal, Ordinal>>> spans;
    for (Ordinal v = 1; v <= h.current; ++v)
        for (const auto& [fid, rec] : h.families_at(v))
            for (const auto& member : rec.members) {
                auto& list = spans[{fid, rec.family_name, member}];
                if (!list.empty() && list.back().second == v - 1)
                    list.back().second = v;
                else
                    list.emplace_back(v, v);
            }
    for (const auto& [key, list] : spans)
        for (const auto& [first, last] : list)
            out += key.family_id + "\t" + key.family_name + "\t" + key.member + "\t" +
                   std::to_string(first) + "\t" + std::to_string(last) + "\n";
    util::write_file(dir / kFamiliesHistoryFile, out);
    out.clear();

    for (const auto& ev : h.events)
        out += std::string(ev.kind == EntityKind::Hairpin ? "hairpin" : "mature") + "\t" +
               ev.entity_id + "\t" + std::string(to_string(ev.change)) + "\t" +
               std::to_string(ev.at) + "\t" + opt_cell(ev.old_name) + "\t" +
               opt_cell(ev.new_name) + "\t" + opt_cell(ev.old_sequence) + "\t" +
               opt_cell(ev.new_sequence) + "\t" + opt_cell(ev.parent) + "\t" +
               opt_cell(ev.forward_to) + "\t" + ev.cause + "\n";
    util::write_file(dir / kEventsFile, out);
}

History load_history(const std::filesystem::path& dir, Ordinal current) {
    History h;
    h.current = current;

    auto rows_of = [&](const char* name, std::size_t columns) {
        std::string content = util::read_file(dir / name);
        std::vector<std::vector<std::string>> rows;
        auto lines = util::split_lines(content);
        for (std::size_t i = 0; i < lines.size(); ++i) {
            auto cells = util::split(lines[i], '\t');
            if (cells.size() != columns)
                throw store::MalformedRow(name, i + 1, "bad column count");
            std::vector<std::string> row;
            row.reserve(cells.size());
            for (auto c : cells) row.emplace_back(c);
            rows.push_back(std::move(row));
        }
        return rows;
    };
    auto ordinal_cell = [](const std::string& cell, const char* file, std::size_t line) {
        auto v = util::parse_int(cell);
        if (!v) throw store::MalformedRow(file, line, "bad ordinal");
        return static_cast<Ordinal>(*v);
    };

    {
        auto rows = rows_of(kHairpinsHistoryFile, 6);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& r = rows[i];
            auto change = store::parse_hairpin_change(r[1]);
            if (!change) throw store::MalformedRow(kHairpinsHistoryFile, i + 1, "bad change");
            h.hairpin_records[r[0]].push_back({r[0], *change, r[2], r[3],
                                               ordinal_cell(r[4], kHairpinsHistoryFile, i + 1),
                                               ordinal_cell(r[5], kHairpinsHistoryFile, i + 1)});
        }
    }
    {
        auto rows = rows_of(kMaturesHistoryFile, 7);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& r = rows[i];
            auto change = store::parse_mature_change(r[1]);
            if (!change) throw store::MalformedRow(kMaturesHistoryFile, i + 1, "bad change");
            store::MatureHistoryRecord rec{r[0], *change, r[2], r[3],
                                           r[4] == "-" ? std::nullopt : std::optional(r[4]),
                                           ordinal_cell(r[5], kMaturesHistoryFile, i + 1),
                                           ordinal_cell(r[6], kMaturesHistoryFile, i + 1)};
            if (*change == store::MatureChange::Aph || *change == store::MatureChange::Rph)
                h.mature_link_records[r[0]].push_back(std::move(rec));
            else
                h.mature_state_records[r[0]].push_back(std::move(rec));
        }
    }
    {
        auto rows = rows_of(kDeadsFile, 5);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& r = rows[i];
            h.dead.push_back({r[0], r[1], r[2] == "-" ? std::nullopt : std::optional(r[2]),
                              r[4], ordinal_cell(r[3], kDeadsFile, i + 1)});
        }
    }
    {
        h.families_by_ordinal.assign(static_cast<std::size_t>(current), {});
        auto rows = rows_of(kFamiliesHistoryFile, 5);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& r = rows[i];
            Ordinal first = ordinal_cell(r[3], kFamiliesHistoryFile, i + 1);
            Ordinal last = ordinal_cell(r[4], kFamiliesHistoryFile, i + 1);
            for (Ordinal v = first; v <= last && v <= current; ++v) {
                auto& fam = h.families_by_ordinal[static_cast<std::size_t>(v) - 1][r[0]];
                fam.family_id = r[0];
                fam.family_name = r[1];
                fam.members.insert(r[2]);
            }
        }
    }
    {
        auto rows = rows_of(kEventsFile, 11);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& r = rows[i];
            auto change = parse_change_type(r[2]);
            if (!change) throw store::MalformedRow(kEventsFile, i + 1, "bad change");
            ChangeEvent ev;
            ev.kind = r[0] == "hairpin" ? EntityKind::Hairpin : EntityKind::Mature;
            ev.entity_id = r[1];
            ev.change = *change;
            ev.at = ordinal_cell(r[3], kEventsFile, i + 1);
            ev.old_name = cell_opt(r[4]);
            ev.new_name = cell_opt(r[5]);
            ev.old_sequence = cell_opt(r[6]);
            ev.new_sequence = cell_opt(r[7]);
            ev.parent = cell_opt(r[8]);
            ev.forward_to = cell_opt(r[9]);
            ev.cause = r[10];
            h.events.push_back(std::move(ev));
        }
    }

    h.finalize();
    return h;
}

}  // namespace mirlod::history
