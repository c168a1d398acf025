#pragma once

// Target registry, per-shot XML records and the queryable shot index.

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "mavsir/error.hpp"
#include "mavsir/evalmetrics.hpp"
#include "mavsir/features/descriptor.hpp"
#include "mavsir/features/extract.hpp"
#include "mavsir/image.hpp"

namespace mavsir {

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

enum class TargetCategory { Concept, Event };

struct Target {
  std::string_view code;  // short handle used in files, e.g. "C2"
  std::string_view name;  // canonical name; the id is its hash
  TargetCategory category;

  std::uint32_t id() const;
};

/// 32-bit FNV-1a.
inline constexpr std::uint32_t fnv1a(std::string_view s) {
  std::uint32_t h = 2166136261u;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 16777619u;
  }
  return h;
}

inline std::uint32_t Target::id() const { return fnv1a(name); }

inline constexpr std::array<Target, 11> kTargets{{
    {"C1", "ApproachingVehicle", TargetCategory::Concept},
    {"C2", "MovingVehicles", TargetCategory::Concept},
    {"C3", "ApproachingPedestrian", TargetCategory::Concept},
    {"C4", "MovingPedestrians", TargetCategory::Concept},
    {"C5", "CombinedConcept", TargetCategory::Concept},
    {"E1", "Embrace", TargetCategory::Event},
    {"E2", "PeopleSplitUp", TargetCategory::Event},
    {"E3", "ElevatorNoEntry", TargetCategory::Event},
    {"E4", "ObjectPut", TargetCategory::Event},
    {"E5", "PersonRuns", TargetCategory::Event},
    {"E6", "OpposingFlow", TargetCategory::Event},
}};

/// Lookup by code or canonical name.
inline const Target& find_target(std::string_view key) {
  for (const auto& t : kTargets)
    if (t.code == key || t.name == key) return t;
  throw DataError("unknown target '" + std::string(key) + "'");
}

/// The combined concept fires when any of C1..C4 does.
inline double combined_concept_score(const std::map<std::string, double>& scores) {
  double best = -1.0;
  for (const char* c : {"C1", "C2", "C3", "C4"})
    if (auto it = scores.find(c); it != scores.end()) best = std::max(best, it->second);
  return best;
}

// ---------------------------------------------------------------------------
// Shot records
// ---------------------------------------------------------------------------

struct ObjectRecord {
  BBox bbox;
  int area = 0;
  double mean_speed = 0.0;
  bool operator==(const ObjectRecord&) const = default;
};

struct KeyFrameRecord {
  int index = 0;
  std::vector<ObjectRecord> objects;
  std::vector<FeatureVector> descriptors;
  bool operator==(const KeyFrameRecord&) const = default;
};

struct ShotRecord {
  std::string shot_id;
  std::string source;
  int frame_begin = 0, frame_end = 0;  // [begin, end)
  std::vector<KeyFrameRecord> keyframes;
  std::string signature;  // reference to the stored ShotSignature
  std::map<std::string, double> scores;  // target code -> [-1, 1]

  void validate() const {
    detail::require(!shot_id.empty(), "shot record: empty id");
    detail::require(frame_begin < frame_end, "shot record: empty frame span");
    for (const auto& [t, v] : scores) {
      find_target(t);
      detail::require(v >= -1.0 && v <= 1.0, "shot record: score outside [-1,1]");
    }
  }
  bool operator==(const ShotRecord&) const = default;
};

namespace detail {

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace detail

/// Deterministic serialization: fixed element and attribute order, doubles
/// with 17 significant digits, two-space indentation, LF line ends.
inline std::string export_xml(const ShotRecord& r) {
  r.validate();
  using detail::xml_escape;
  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<!DOCTYPE shot SYSTEM \"shot.dtd\">\n"
    << "<shot id=\"" << xml_escape(r.shot_id) << "\" source=\"" << xml_escape(r.source) << "\" begin=\""
    << r.frame_begin << "\" end=\"" << r.frame_end << "\" signature=\"" << xml_escape(r.signature) << "\">\n";
  for (const auto& k : r.keyframes) {
    o << "  <keyframe idx=\"" << k.index << "\">\n";
    for (const auto& ob : k.objects)
      o << "    <object bbox=\"" << ob.bbox.x << ' ' << ob.bbox.y << ' ' << ob.bbox.w << ' ' << ob.bbox.h
        << "\" area=\"" << ob.area << "\" meanspeed=\"" << format_double(ob.mean_speed) << "\"/>\n";
    for (const auto& d : k.descriptors) {
      o << "    <descriptor id=\"" << name(d.id) << "\" region=\"" << name(d.region) << "\" dims=\""
        << d.values.size() << "\">";
      for (std::size_t i = 0; i < d.values.size(); ++i) o << (i ? " " : "") << format_double(d.values[i]);
      o << "</descriptor>\n";
    }
    o << "  </keyframe>\n";
  }
  o << "  <scores>\n";
  for (const auto& [t, v] : r.scores)
    o << "    <score target=\"" << xml_escape(t) << "\" value=\"" << format_double(v) << "\"/>\n";
  o << "  </scores>\n</shot>\n";
  return o.str();
}

namespace detail {

template <typename T>
T xml_attr(const boost::property_tree::ptree& node, const char* key) {
  const auto v = node.get_optional<T>(std::string("<xmlattr>.") + key);
  if (!v) throw DataError(std::string("shot xml: missing or malformed attribute '") + key + "'");
  return *v;
}

inline double xml_double(const std::string& s) {
  try {
    return parse_double(s);
  } catch (const DataError&) {
    throw DataError("shot xml: bad number '" + s + "'");
  }
}

}  // namespace detail

inline ShotRecord import_xml(const std::string& xml) {
  namespace pt = boost::property_tree;
  pt::ptree doc;
  std::istringstream in(xml);
  try {
    pt::read_xml(in, doc);
  } catch (const pt::xml_parser_error& e) {
    throw DataError(std::string("shot xml: ") + e.what());
  }
  const auto shot = doc.get_child_optional("shot");
  if (!shot) throw DataError("shot xml: no <shot> root");
  ShotRecord r;
  r.shot_id = detail::xml_attr<std::string>(*shot, "id");
  r.source = detail::xml_attr<std::string>(*shot, "source");
  r.frame_begin = detail::xml_attr<int>(*shot, "begin");
  r.frame_end = detail::xml_attr<int>(*shot, "end");
  r.signature = detail::xml_attr<std::string>(*shot, "signature");
  for (const auto& [tag, node] : *shot) {
    if (tag == "keyframe") {
      KeyFrameRecord k;
      k.index = detail::xml_attr<int>(node, "idx");
      for (const auto& [ctag, child] : node) {
        if (ctag == "object") {
          ObjectRecord ob;
          std::istringstream bb(detail::xml_attr<std::string>(child, "bbox"));
          if (!(bb >> ob.bbox.x >> ob.bbox.y >> ob.bbox.w >> ob.bbox.h)) throw DataError("shot xml: bad bbox");
          ob.area = detail::xml_attr<int>(child, "area");
          ob.mean_speed = detail::xml_double(detail::xml_attr<std::string>(child, "meanspeed"));
          k.objects.push_back(ob);
        } else if (ctag == "descriptor") {
          FeatureVector v;
          v.id = parse_descriptor(detail::xml_attr<std::string>(child, "id"));
          v.region = parse_region(detail::xml_attr<std::string>(child, "region"));
          const int dims = detail::xml_attr<int>(child, "dims");
          std::istringstream vs(child.data());
          std::string tok;
          while (vs >> tok) v.values.push_back(detail::xml_double(tok));
          if (static_cast<int>(v.values.size()) != dims || dims != dimension(v.id))
            throw DataError("shot xml: descriptor " + std::string(name(v.id)) + " has wrong dimensionality");
          k.descriptors.push_back(std::move(v));
        }
      }
      r.keyframes.push_back(std::move(k));
    } else if (tag == "scores") {
      for (const auto& [stag, s] : node)
        if (stag == "score")
          r.scores[detail::xml_attr<std::string>(s, "target")] =
              detail::xml_double(detail::xml_attr<std::string>(s, "value"));
    }
  }
  r.validate();
  return r;
}

// ---------------------------------------------------------------------------
// Index: a directory of <shot>.xml files plus a manifest
//   mavsir-index 1
//   <shot id> <TAB> <file name>
// ---------------------------------------------------------------------------

inline constexpr std::string_view kIndexHeader = "mavsir-index 1";

// Single writer while ingesting; const queries may run concurrently.
class ShotIndex {
 public:
  void add(ShotRecord r) {
    r.validate();
    if (!shots_.emplace(r.shot_id, r).second) throw DataError("index: duplicate shot '" + r.shot_id + "'");
  }

  std::size_t size() const { return shots_.size(); }
  const ShotRecord& at(const std::string& id) const {
    auto it = shots_.find(id);
    if (it == shots_.end()) throw DataError("index: unknown shot '" + id + "'");
    return it->second;
  }
  std::vector<const ShotRecord*> records() const {
    std::vector<const ShotRecord*> out;
    for (const auto& [k, v] : shots_) out.push_back(&v);
    return out;
  }

  /// Shots by stored score for the target, descending; ties by shot id.
  /// Shots without a score for the target are not ranked. Relevance flags
  /// are left false for the caller to fill in.
  RankedList query(std::string_view target, std::size_t top_n) const {
    const Target& t = find_target(target);
    if (shots_.empty()) throw DataError("query: empty index");
    RankedList out{std::string(t.code), {}};
    for (const auto& [id, r] : shots_)
      if (auto it = r.scores.find(std::string(t.code)); it != r.scores.end())
        out.items.push_back({id, it->second, false});
    std::sort(out.items.begin(), out.items.end(), [](const RankedItem& a, const RankedItem& b) {
      return a.score != b.score ? a.score > b.score : a.shot_id < b.shot_id;
    });
    if (out.items.size() > top_n) out.items.resize(top_n);
    return out;
  }

  static std::string file_name(const std::string& shot_id) {
    std::string f;
    for (char c : shot_id) f += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
    return f + ".xml";
  }

  void save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    std::ofstream manifest(dir / "manifest.txt");
    if (!manifest) throw DataError("index: cannot write manifest in '" + dir.string() + "'");
    manifest << kIndexHeader << '\n';
    for (const auto& [id, r] : shots_) {
      const std::string f = file_name(id);
      std::ofstream out(dir / f, std::ios::binary);
      if (!out) throw DataError("index: cannot write '" + (dir / f).string() + "'");
      out << export_xml(r);
      manifest << id << '\t' << f << '\n';
    }
  }

  static ShotIndex load(const std::filesystem::path& dir) {
    std::ifstream manifest(dir / "manifest.txt");
    if (!manifest) throw DataError("index: no manifest in '" + dir.string() + "'");
    std::string line;
    if (!std::getline(manifest, line) || line != kIndexHeader)
      throw DataError("index: unsupported manifest header '" + line + "'");
    ShotIndex idx;
    while (std::getline(manifest, line)) {
      if (line.empty()) continue;
      const auto tab = line.find('\t');
      if (tab == std::string::npos) throw DataError("index: malformed manifest line '" + line + "'");
      std::ifstream in(dir / line.substr(tab + 1), std::ios::binary);
      if (!in) throw DataError("index: missing shot file '" + line.substr(tab + 1) + "'");
      std::ostringstream ss;
      ss << in.rdbuf();
      ShotRecord r = import_xml(ss.str());
      if (r.shot_id != line.substr(0, tab)) throw DataError("index: manifest and shot file disagree");
      idx.add(std::move(r));
    }
    return idx;
  }

 private:
  std::map<std::string, ShotRecord> shots_;
};

}  // namespace mavsir
