#pragma once

#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "matchkit/core.hpp"

// JSON file schemas.
//
// Economy file:
//   {
//     "students": ["1", "2", ...],
//     "schools":  [{"id": "a", "capacity": 2}, ...],
//     "prefs":    {"1": ["a", "b"], ...},            // listed = acceptable, order = preference
//     "priorities": {"a": [["4"], ["1"], ["2", "3"]], ...},  // outer order = priority classes
//     "types":    {"1": "majority", ...},            // optional
//     "quotas":   {"a": {"majority": 1}, ...},       // optional
//     "reserves": {"a": {"minority": 1}, ...},       // optional
//     "vnm":      {"1": {"a": 4.0, ...}, ...}        // optional
//   }
// "priorities" may be omitted entirely, in which case every school is
// indifferent between all students (a single priority class).
//
// Matching file: {"1": "a", "2": null, ...}  (null = unassigned)

namespace matchkit::io {

using nlohmann::json;

struct LoadResult {
  Economy economy;
  ValidationReport report;
  bool ok() const { return report.ok(); }
};

inline LoadResult economy_from_json(const json& j) {
  LoadResult out;
  Economy& e = out.economy;
  auto& bad = out.report.violations;

  if (!j.contains("students") || !j.contains("schools") || !j.contains("prefs")) {
    bad.push_back("economy file must contain students, schools, prefs");
    return out;
  }
  for (const auto& s : j.at("students")) e.students.push_back(s.get<std::string>());
  for (const auto& s : j.at("schools")) {
    e.schools.push_back(s.at("id").get<std::string>());
    e.capacity.push_back(s.at("capacity").get<int>());
  }
  std::unordered_map<std::string, int> sidx, jidx;
  for (int i = 0; i < e.n_students(); ++i) sidx[e.students[i]] = i;
  for (int s = 0; s < e.n_schools(); ++s) jidx[e.schools[s]] = s;

  e.prefs.resize(e.n_students());
  for (auto& [id, rol] : j.at("prefs").items()) {
    auto it = sidx.find(id);
    if (it == sidx.end()) {
      bad.push_back("prefs: unknown student " + id);
      continue;
    }
    for (const auto& sc : rol) {
      const std::string name = sc.get<std::string>();
      auto jt = jidx.find(name);
      if (jt == jidx.end()) {
        bad.push_back("student " + id + ": ROL references unknown school " + name);
        continue;
      }
      e.prefs[it->second].push_back(jt->second);
    }
  }

  e.priorities.resize(e.n_schools());
  if (j.contains("priorities")) {
    std::vector<bool> have(e.n_schools(), false);
    for (auto& [name, part] : j.at("priorities").items()) {
      auto jt = jidx.find(name);
      if (jt == jidx.end()) {
        bad.push_back("priorities: unknown school " + name);
        continue;
      }
      have[jt->second] = true;
      for (const auto& cls : part) {
        std::vector<int> c;
        for (const auto& id : cls) {
          auto it = sidx.find(id.get<std::string>());
          if (it == sidx.end()) {
            bad.push_back("school " + name + ": priority list references unknown student " +
                          id.get<std::string>());
            continue;
          }
          c.push_back(it->second);
        }
        e.priorities[jt->second].push_back(std::move(c));
      }
    }
    for (int s = 0; s < e.n_schools(); ++s)
      if (!have[s]) bad.push_back("priorities: school " + e.schools[s] + " missing");
  } else {
    // No priorities given: every school is indifferent between all students.
    std::vector<int> all(e.n_students());
    std::iota(all.begin(), all.end(), 0);
    for (auto& p : e.priorities) p = {all};
  }

  if (j.contains("types")) {
    e.type_of.assign(e.n_students(), -1);
    std::unordered_map<std::string, int> tidx;
    for (auto& [id, t] : j.at("types").items()) {
      auto it = sidx.find(id);
      if (it == sidx.end()) {
        bad.push_back("types: unknown student " + id);
        continue;
      }
      const std::string tname = t.get<std::string>();
      auto [tt, inserted] = tidx.try_emplace(tname, static_cast<int>(e.type_names.size()));
      if (inserted) e.type_names.push_back(tname);
      e.type_of[it->second] = tt->second;
    }
    for (int i = 0; i < e.n_students(); ++i)
      if (e.type_of[i] < 0) bad.push_back("types: student " + e.students[i] + " has no type");

    auto read_type_table = [&](const char* key, std::vector<std::vector<int>>& table, int fill) {
      if (!j.contains(key)) return;
      table.assign(e.n_schools(), std::vector<int>(e.type_names.size(), fill));
      for (auto& [name, per_type] : j.at(key).items()) {
        auto jt = jidx.find(name);
        if (jt == jidx.end()) {
          bad.push_back(std::string(key) + ": unknown school " + name);
          continue;
        }
        for (auto& [tname, v] : per_type.items()) {
          auto tt = tidx.find(tname);
          if (tt == tidx.end()) {
            bad.push_back(std::string(key) + ": unknown type " + tname);
            continue;
          }
          table[jt->second][tt->second] = v.get<int>();
        }
      }
    };
    read_type_table("quotas", e.quotas, -1);
    read_type_table("reserves", e.reserves, 0);
  } else if (j.contains("quotas") || j.contains("reserves")) {
    bad.push_back("quotas/reserves present but students are untyped");
  }

  if (j.contains("vnm")) {
    e.has_vnm = true;
    e.vnm.assign(e.n_students(), std::vector<double>(e.n_schools(),
                 -std::numeric_limits<double>::infinity()));
    for (auto& [id, per_school] : j.at("vnm").items()) {
      auto it = sidx.find(id);
      if (it == sidx.end()) {
        bad.push_back("vnm: unknown student " + id);
        continue;
      }
      for (auto& [name, u] : per_school.items()) {
        auto jt = jidx.find(name);
        if (jt == jidx.end()) {
          bad.push_back("vnm: unknown school " + name);
          continue;
        }
        e.vnm[it->second][jt->second] = u.get<double>();
      }
    }
  }

  if (bad.empty()) {
    auto rep = validate_economy(e);
    out.report.violations = rep.violations;
  }
  return out;
}

inline json economy_to_json(const Economy& e) {
  json j;
  j["students"] = e.students;
  j["schools"] = json::array();
  for (int s = 0; s < e.n_schools(); ++s)
    j["schools"].push_back({{"id", e.schools[s]}, {"capacity", e.capacity[s]}});
  json prefs = json::object();
  for (int i = 0; i < e.n_students(); ++i) {
    json rol = json::array();
    for (int s : e.prefs[i]) rol.push_back(e.schools[s]);
    prefs[e.students[i]] = rol;
  }
  j["prefs"] = prefs;
  json prios = json::object();
  for (int s = 0; s < e.n_schools(); ++s) {
    json part = json::array();
    for (const auto& cls : e.priorities[s]) {
      json c = json::array();
      for (int i : cls) c.push_back(e.students[i]);
      part.push_back(c);
    }
    prios[e.schools[s]] = part;
  }
  j["priorities"] = prios;
  if (e.typed()) {
    json types = json::object();
    for (int i = 0; i < e.n_students(); ++i) types[e.students[i]] = e.type_names[e.type_of[i]];
    j["types"] = types;
    auto write_table = [&](const char* key, const std::vector<std::vector<int>>& table, int skip) {
      if (table.empty()) return;
      json t = json::object();
      for (int s = 0; s < e.n_schools(); ++s) {
        json per = json::object();
        for (std::size_t k = 0; k < e.type_names.size(); ++k)
          if (table[s][k] != skip) per[e.type_names[k]] = table[s][k];
        if (!per.empty()) t[e.schools[s]] = per;
      }
      if (!t.empty()) j[key] = t;
    };
    write_table("quotas", e.quotas, -1);
    write_table("reserves", e.reserves, 0);
  }
  if (e.has_vnm) {
    json vnm = json::object();
    for (int i = 0; i < e.n_students(); ++i) {
      json per = json::object();
      for (int s : e.prefs[i]) per[e.schools[s]] = e.vnm[i][s];
      vnm[e.students[i]] = per;
    }
    j["vnm"] = vnm;
  }
  return j;
}

inline json matching_to_json(const Matching& mu, const Economy& e) {
  json j = json::object();
  for (int i = 0; i < e.n_students(); ++i) {
    if (mu.assign[i] == kUnassigned)
      j[e.students[i]] = nullptr;
    else
      j[e.students[i]] = e.schools[mu.assign[i]];
  }
  return j;
}

inline Matching matching_from_json(const json& j, const Economy& e) {
  Matching mu{std::vector<int>(e.n_students(), kUnassigned)};
  for (auto& [id, sc] : j.items()) {
    const int i = e.student_index(id);
    if (!sc.is_null()) mu.assign[i] = e.school_index(sc.get<std::string>());
  }
  return mu;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read file: " + path);
  json j;
  in >> j;
  return j;
}

inline LoadResult load_economy(const std::string& path) {
  return economy_from_json(read_json_file(path));
}

}  // namespace matchkit::io
