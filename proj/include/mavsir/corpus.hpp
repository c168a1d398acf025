#pragma once

// Synthetic surveillance corpus: one Y4M clip holding every shot back to
// back, plus text tables for shot boundaries, target labels and event
// references. Vehicles are large and fast, pedestrians small and slow.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mavsir/error.hpp"
#include "mavsir/evalmetrics.hpp"
#include "mavsir/imageio.hpp"
#include "mavsir/store.hpp"
#include "mavsir/synth.hpp"

namespace mavsir {

enum class Split { Train, Test };

struct ShotSpec {
  std::string id;
  Scene scene;
  Split split = Split::Train;
  std::map<std::string, int> labels;  // target code -> +1 / -1
};

struct CorpusSpec {
  int width = 64;
  int height = 64;
  int frames_per_shot = 12;
  int fps = 25;
  std::vector<ShotSpec> shots;
};

inline constexpr double kRunningSpeed = 1.8;  // px/frame; faster pedestrians run
inline constexpr int kCameras = 4;             // fixed views shared by all shots

/// Labels implied by the generation parameters.
inline std::map<std::string, int> derive_labels(const Scene& s) {
  bool veh = false, ped = false, veh_app = false, ped_app = false, runs = false, opposing = false;
  for (const auto& m : s.movers) {
    const bool v = m.kind == MoverKind::Vehicle;
    (v ? veh : ped) = true;
    if (m.growth > 0.0) (v ? veh_app : ped_app) = true;
    if (!v && std::hypot(m.vx, m.vy) >= kRunningSpeed) runs = true;
  }
  for (std::size_t i = 0; i < s.movers.size(); ++i)
    for (std::size_t j = i + 1; j < s.movers.size(); ++j)
      if (s.movers[i].vx * s.movers[j].vx + s.movers[i].vy * s.movers[j].vy < 0.0) opposing = true;
  std::map<std::string, int> out;
  for (const auto& t : kTargets) out[std::string(t.code)] = -1;
  auto set = [&](const char* code, bool on) { out[code] = on ? 1 : -1; };
  set("C1", veh_app);
  set("C2", veh);
  set("C3", ped_app);
  set("C4", ped);
  set("C5", veh_app || veh || ped_app || ped);
  set("E5", runs);
  set("E6", opposing);
  return out;
}

namespace detail {

/// Random start position keeping the whole track inside the frame.
inline void place_in_frame(Mover& m, Rng& rng, int width, int height, int frames) {
  const double grow = m.growth * (frames - 1);
  auto axis = [&](double v, double size, int extent) {
    const double span = v * (frames - 1);
    const double lo = 1.0 + std::max(0.0, -span) + 0.5 * grow;
    const double hi = extent - size - 1.0 - std::max(0.0, span) - 0.5 * grow;
    return hi > lo ? rng.uniform(lo, hi) : 0.5 * (lo + hi);
  };
  m.x = axis(m.vx, m.w, width);
  m.y = axis(m.vy, m.h, height);
}

inline Mover random_mover(Rng& rng, MoverKind kind, int width, int height, int frames, bool approaching,
                          double speed) {
  Mover m;
  m.kind = kind;
  if (kind == MoverKind::Vehicle) {
    m.w = rng.uniform(16.0, 22.0);
    m.h = rng.uniform(9.0, 12.0);
  } else {
    m.w = rng.uniform(5.0, 7.0);
    m.h = rng.uniform(10.0, 14.0);
  }
  const double dir = rng.uniform(0.0, 2.0 * std::numbers::pi);
  m.vx = speed * std::cos(dir);
  m.vy = speed * std::sin(dir);
  m.growth = approaching ? (kind == MoverKind::Vehicle ? 0.5 : 0.3) : 0.0;
  place_in_frame(m, rng, width, height, frames);
  for (double& c : m.color) c = rng.uniform(0.05, 0.95);
  // Painted bodies are smooth with coarse panels; clothing is finely patterned.
  if (kind == MoverKind::Vehicle) {
    m.texture_period = rng.uniform(6.0, 9.0);
    m.texture_amp = 0.04;
  } else {
    m.texture_period = rng.uniform(2.5, 4.0);
    m.texture_amp = 0.2;
  }
  return m;
}

}  // namespace detail

/// Shot mix over a few fixed camera views: vehicles, walking pedestrians, running pedestrians, two
/// pedestrians crossing in opposite directions, and empty scenes. Approaching
/// movers grow over the shot. Shots alternate train/test after shuffling.
inline CorpusSpec make_corpus(std::uint64_t seed, int n_shots = 60) {
  detail::require<ConfigError>(n_shots >= 10, "synthetic corpus needs >= 10 shots");
  CorpusSpec c;
  Rng rng(seed);
  enum Kind { Vehicle, Walker, Runner, Opposing, Empty };
  std::vector<Kind> kinds;
  const int nv = n_shots / 3, nr = n_shots / 15, no = n_shots * 2 / 15, ne = n_shots / 5;
  const int nw = n_shots - nv - nr - no - ne;
  kinds.insert(kinds.end(), nv, Vehicle);
  kinds.insert(kinds.end(), nw, Walker);
  kinds.insert(kinds.end(), nr, Runner);
  kinds.insert(kinds.end(), no, Opposing);
  kinds.insert(kinds.end(), ne, Empty);
  for (std::size_t i = kinds.size(); i > 1; --i) std::swap(kinds[i - 1], kinds[rng.uniform_int(0, static_cast<int>(i) - 1)]);
  std::vector<std::uint64_t> cameras(kCameras);
  for (auto& cam : cameras) cam = rng.next();

  for (int s = 0; s < n_shots; ++s) {
    ShotSpec sh;
    char id[16];
    std::snprintf(id, sizeof id, "shot%03d", s);
    sh.id = id;
    sh.split = s % 2 == 0 ? Split::Train : Split::Test;
    sh.scene.width = c.width;
    sh.scene.height = c.height;
    sh.scene.background_seed = cameras[rng.uniform_int(0, kCameras - 1)];
    const bool app = rng.uniform() < 1.0 / 3.0;
    switch (kinds[s]) {
      case Vehicle:
        sh.scene.movers.push_back(detail::random_mover(rng, MoverKind::Vehicle, c.width, c.height,
                                                       c.frames_per_shot, app, rng.uniform(2.0, 3.0)));
        break;
      case Walker:
        sh.scene.movers.push_back(detail::random_mover(rng, MoverKind::Pedestrian, c.width, c.height,
                                                       c.frames_per_shot, app, rng.uniform(0.8, 1.2)));
        break;
      case Runner:
        sh.scene.movers.push_back(detail::random_mover(rng, MoverKind::Pedestrian, c.width, c.height,
                                                       c.frames_per_shot, false, rng.uniform(kRunningSpeed, 2.2)));
        break;
      case Opposing: {
        Mover a = detail::random_mover(rng, MoverKind::Pedestrian, c.width, c.height, c.frames_per_shot, false,
                                       rng.uniform(0.8, 1.2));
        Mover b = detail::random_mover(rng, MoverKind::Pedestrian, c.width, c.height, c.frames_per_shot, false,
                                       rng.uniform(0.8, 1.2));
        const double sa = std::hypot(a.vx, a.vy), sb = std::hypot(b.vx, b.vy);
        b.vx = -a.vx / sa * sb;
        b.vy = -a.vy / sa * sb;
        detail::place_in_frame(b, rng, c.width, c.height, c.frames_per_shot);
        sh.scene.movers = {a, b};
        break;
      }
      case Empty:
        break;
    }
    sh.labels = derive_labels(sh.scene);
    c.shots.push_back(std::move(sh));
  }
  return c;
}

// ---------------------------------------------------------------------------
// On-disk layout
//   clip.y4m     every shot, back to back
//   shots.txt    "mavsir-shots 1", "fps <n>", then: id begin end split
//   labels.txt   id target +1|-1
//   events.txt   reference intervals: event start_s end_s
// ---------------------------------------------------------------------------

struct ShotEntry {
  std::string id;
  int begin = 0, end = 0;  // [begin, end) frames
  Split split = Split::Train;
};

struct ShotTable {
  int fps = 25;
  std::vector<ShotEntry> shots;

  double duration_hours() const {
    const int frames = shots.empty() ? 0 : shots.back().end;
    return frames / static_cast<double>(fps) / 3600.0;
  }
  Interval span_seconds(const ShotEntry& s) const {
    return {s.begin / static_cast<double>(fps), s.end / static_cast<double>(fps)};
  }
};

inline void write_corpus(const std::filesystem::path& dir, const CorpusSpec& c) {
  std::filesystem::create_directories(dir);
  io::Y4mWriter clip((dir / "clip.y4m").string(), c.width, c.height, c.fps, 1);
  std::ofstream shots(dir / "shots.txt"), labels(dir / "labels.txt"), events(dir / "events.txt");
  if (!shots || !labels || !events) throw DataError("synth: cannot write tables in '" + dir.string() + "'");
  shots << "mavsir-shots 1\nfps " << c.fps << '\n';
  int frame = 0;
  for (const auto& s : c.shots) {
    for (int t = 0; t < c.frames_per_shot; ++t) clip.write(render(s.scene, t));
    shots << s.id << ' ' << frame << ' ' << frame + c.frames_per_shot << ' '
          << (s.split == Split::Train ? "train" : "test") << '\n';
    for (const auto& [code, v] : s.labels) {
      labels << s.id << ' ' << code << ' ' << (v > 0 ? "+1" : "-1") << '\n';
      if (v > 0 && find_target(code).category == TargetCategory::Event)
        events << find_target(code).name << ' ' << format_double(frame / static_cast<double>(c.fps)) << ' '
               << format_double((frame + c.frames_per_shot) / static_cast<double>(c.fps)) << '\n';
    }
    frame += c.frames_per_shot;
  }
}

inline ShotTable read_shot_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line != "mavsir-shots 1") throw DataError("shots table: bad header");
  ShotTable t;
  std::string key;
  if (!(in >> key >> t.fps) || key != "fps" || t.fps < 1) throw DataError("shots table: missing fps line");
  ShotEntry e;
  std::string split;
  while (in >> e.id >> e.begin >> e.end >> split) {
    if (e.begin >= e.end || (!t.shots.empty() && e.begin < t.shots.back().end))
      throw DataError("shots table: bad span for '" + e.id + "'");
    if (split != "train" && split != "test") throw DataError("shots table: bad split '" + split + "'");
    e.split = split == "train" ? Split::Train : Split::Test;
    t.shots.push_back(e);
  }
  if (!in.eof()) throw DataError("shots table: malformed line");
  return t;
}

/// shot id -> target code -> +1 / -1
using LabelTable = std::map<std::string, std::map<std::string, int>>;

inline LabelTable read_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  LabelTable t;
  std::string id, code, v;
  while (in >> id >> code >> v) {
    find_target(code);
    if (v != "+1" && v != "-1") throw DataError("labels: bad value '" + v + "'");
    t[id][code] = v == "+1" ? 1 : -1;
  }
  if (!in.eof()) throw DataError("labels: malformed line");
  return t;
}

}  // namespace mavsir
