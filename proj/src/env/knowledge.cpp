#include "egoplan/env/knowledge.hpp"

#include <algorithm>
#include <stdexcept>

namespace egoplan::env {

void Knowledge::add_subtype(SubtypeInfo info) {
    const std::string key = info.name;
    subtypes_.insert_or_assign(key, std::move(info));
}

void Knowledge::add_affordance(const std::string& relation, const std::string& actor, const std::string& target) {
    if (std::find(affordance_relations().begin(), affordance_relations().end(), relation) ==
        affordance_relations().end()) {
        throw std::invalid_argument("unknown affordance relation '" + relation + "'");
    }
    if (!find(actor) || !find(target)) {
        throw std::invalid_argument("affordance " + relation + " references unknown subtype");
    }
    affordances_.insert(Affordance{relation, actor, target});
}

const SubtypeInfo* Knowledge::find(std::string_view subtype) const {
    auto it = subtypes_.find(subtype);
    return it == subtypes_.end() ? nullptr : &it->second;
}

const SubtypeInfo& Knowledge::at(std::string_view subtype) const {
    const auto* s = find(subtype);
    if (!s) throw std::invalid_argument("unknown subtype '" + std::string(subtype) + "'");
    return *s;
}

bool Knowledge::holds(std::string_view relation, std::string_view actor, std::string_view target) const {
    return affordances_.contains(Affordance{std::string(relation), std::string(actor), std::string(target)});
}

std::vector<const SubtypeInfo*> Knowledge::subtypes() const {
    std::vector<const SubtypeInfo*> out;
    for (const auto& [_, s] : subtypes_) out.push_back(&s);
    return out;
}

std::vector<const SubtypeInfo*> Knowledge::subtypes(EntityKind kind) const {
    std::vector<const SubtypeInfo*> out;
    for (const auto& [_, s] : subtypes_) {
        if (s.kind == kind) out.push_back(&s);
    }
    return out;
}

std::vector<std::string> Knowledge::actors(std::string_view relation, std::string_view target) const {
    std::vector<std::string> out;
    for (const auto& a : affordances_) {
        if (a.relation == relation && a.target == target) out.push_back(a.actor);
    }
    return out;
}

std::vector<std::string> Knowledge::targets(std::string_view relation, std::string_view actor) const {
    std::vector<std::string> out;
    for (const auto& a : affordances_) {
        if (a.relation == relation && a.actor == actor) out.push_back(a.target);
    }
    return out;
}

std::vector<pddl::ObjectConst> Knowledge::itemtype_objects() const {
    std::vector<pddl::ObjectConst> out;
    for (const auto& [name, _] : subtypes_) out.push_back({name, "itemtype"});
    return out;
}

std::vector<pddl::GroundAtom> Knowledge::static_atoms() const {
    std::vector<pddl::GroundAtom> out;
    for (const auto& a : affordances_) out.push_back(pddl::atom(a.relation, {a.actor, a.target}));
    for (const auto& [name, s] : subtypes_) {
        if (s.openable) out.push_back(pddl::atom("openable", {name}));
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string normalize_subtype(std::string_view name) {
    std::string s(name);
    if (s.size() >= 4 && s.compare(s.size() - 4, 4, "Type") == 0) return s;
    return s + "Type";
}

const Knowledge& default_knowledge() {
    static const Knowledge kb = [] {
        Knowledge k;
        const std::vector<std::string> foods{"AppleType", "BreadType", "EggType", "LettuceType", "PotatoType",
                                             "TomatoType"};
        const std::vector<std::string> utensils{"ButterKnifeType", "ForkType", "KnifeType", "SpoonType"};
        const std::vector<std::string> small{"BookType", "CellPhoneType", "CreditCardType", "KeyChainType",
                                             "PenType", "PencilType", "WatchType"};
        for (const auto* group : {&foods, &utensils, &small}) {
            for (const auto& n : *group) k.add_subtype({n, EntityKind::Object});
        }
        for (const char* lamp : {"DeskLampType", "FloorLampType"}) {
            k.add_subtype({lamp, EntityKind::Object, false, false, true});
        }
        const std::vector<std::string> surfaces{"CounterTopType", "DeskType", "DiningTableType", "ShelfType",
                                                "SideTableType"};
        for (const auto& n : surfaces) k.add_subtype({n, EntityKind::Receptacle});
        k.add_subtype({"SinkBasinType", EntityKind::Receptacle});
        for (const char* n : {"CabinetType", "DrawerType", "FridgeType", "MicrowaveType"}) {
            k.add_subtype({n, EntityKind::Receptacle, true});
        }
        for (const char* n : {"BowlType", "MugType"}) k.add_subtype({n, EntityKind::Receptacle, false, true});

        auto contain = [&](const std::string& r, const std::vector<std::string>& items) {
            for (const auto& i : items) k.add_affordance("canContain", r, i);
        };
        for (const auto& s : surfaces) {
            contain(s, foods);
            contain(s, utensils);
            contain(s, small);
            contain(s, {"BowlType", "MugType"});
        }
        contain("SinkBasinType", foods);
        contain("SinkBasinType", utensils);
        contain("SinkBasinType", {"BowlType", "MugType"});
        contain("FridgeType", foods);
        contain("FridgeType", {"BowlType", "MugType"});
        contain("MicrowaveType", {"AppleType", "BreadType", "EggType", "PotatoType", "TomatoType"});
        contain("MicrowaveType", {"BowlType", "MugType"});
        contain("DrawerType", utensils);
        contain("DrawerType", small);
        contain("CabinetType", utensils);
        contain("CabinetType", {"BookType", "KeyChainType", "CreditCardType"});
        contain("CabinetType", {"BowlType", "MugType"});
        contain("MugType", {"PenType", "PencilType", "SpoonType", "ForkType", "ButterKnifeType"});
        contain("BowlType", {"AppleType", "EggType", "TomatoType", "PotatoType", "KeyChainType", "WatchType",
                             "CreditCardType"});

        for (const char* f : {"AppleType", "BreadType", "EggType", "PotatoType", "TomatoType"}) {
            k.add_affordance("canHeat", "MicrowaveType", f);
        }
        for (const auto& f : foods) k.add_affordance("canCool", "FridgeType", f);
        for (const auto& f : foods) k.add_affordance("canClean", "SinkBasinType", f);
        for (const auto& u : utensils) k.add_affordance("canClean", "SinkBasinType", u);
        for (const char* knife : {"ButterKnifeType", "KnifeType"}) {
            for (const char* f : {"AppleType", "BreadType", "LettuceType", "PotatoType", "TomatoType"}) {
                k.add_affordance("canSlice", knife, f);
            }
        }
        return k;
    }();
    return kb;
}

}  // namespace egoplan::env
