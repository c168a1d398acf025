#pragma once

// End-to-end glue shared by the command-line tool and the acceptance suite:
// key-frame analysis, codebooks, signatures, Learn++ targets, scoring and
// evaluation over a shot table.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mavsir/codebook.hpp"
#include "mavsir/config.hpp"
#include "mavsir/corpus.hpp"
#include "mavsir/evalmetrics.hpp"
#include "mavsir/features.hpp"
#include "mavsir/imageio.hpp"
#include "mavsir/learnpp.hpp"
#include "mavsir/optflow.hpp"
#include "mavsir/segment.hpp"
#include "mavsir/store.hpp"

namespace mavsir {

/// Runs fn(i) for i in [0, n) on `workers` threads. Results must be written
/// by index; the lowest-index exception is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int extra = std::max(0, std::min<int>(workers, static_cast<int>(n)) - 1);
  std::vector<std::jthread> pool;
  for (int t = 0; t < extra; ++t) pool.emplace_back(work);
  work();
  pool.clear();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline std::vector<ColorFrame> read_clip(const std::string& path) {
  io::Y4mReader r(path);
  std::vector<ColorFrame> out;
  for (ColorFrame f; r.next(f);) out.push_back(std::move(f));
  return out;
}

// ---------------------------------------------------------------------------
// Key-frames
// ---------------------------------------------------------------------------

struct KeyFrameAnalysis {
  FlowField flow;
  SpeedMap speed;
  SegmentationResult seg;
  std::vector<FeatureVector> vectors;
  std::vector<ObjectRecord> objects;
};

inline std::vector<ObjectRecord> object_records(const SegmentationResult& seg, const FlowField& flow) {
  std::vector<ObjectRecord> out;
  for (const auto& c : seg.objects) {
    double s = 0.0;
    for (std::size_t p : c.pixels) s += std::hypot(flow.u[p], flow.v[p]);
    out.push_back({c.bbox, static_cast<int>(c.area()), s / static_cast<double>(c.area())});
  }
  return out;
}

/// Flow from `key` to `next`, segmentation of its speed map and every
/// applicable descriptor of `key`.
inline KeyFrameAnalysis analyze_keyframe(const ColorFrame& key, const ColorFrame& next, const PipelineConfig& cfg) {
  KeyFrameAnalysis a;
  a.flow = horn_schunck_pyramidal(to_grayscale(key), to_grayscale(next), cfg.flow);
  a.speed = speed_map(a.flow, cfg.speed_threshold, cfg.speed_sigma);
  a.seg = segment_moving(a.speed, cfg.segment);
  a.vectors = extract_all(key, a.seg, a.flow);
  a.objects = object_records(a.seg, a.flow);
  return a;
}

/// Evenly spaced key-frames, each with a successor inside the shot.
inline std::vector<int> keyframe_indices(const ShotEntry& s, int count) {
  const int len = s.end - s.begin;
  detail::require(len >= 2, "shot '" + s.id + "' needs >= 2 frames");
  std::vector<int> out;
  for (int i = 0; i < count; ++i) {
    const int f = s.begin + std::min(len - 2, static_cast<int>((i + 0.5) * len / count));
    if (out.empty() || out.back() != f) out.push_back(f);
  }
  return out;
}

struct IngestResult {
  std::vector<FeatureRecord> features;                       // frame = absolute index
  std::map<std::string, std::vector<KeyFrameRecord>> keyframes;  // per shot, with descriptors
};

inline IngestResult ingest(const std::vector<ColorFrame>& clip, const ShotTable& table, const PipelineConfig& cfg) {
  cfg.validate();
  struct Job {
    std::string shot;
    int frame;
  };
  std::vector<Job> jobs;
  for (const auto& s : table.shots) {
    if (s.end > static_cast<int>(clip.size())) throw DataError("shot '" + s.id + "' runs past the clip");
    for (int f : keyframe_indices(s, cfg.keyframes_per_shot)) jobs.push_back({s.id, f});
  }
  std::vector<KeyFrameRecord> done(jobs.size());
  parallel_for(jobs.size(), cfg.workers, [&](std::size_t i) {
    const auto a = analyze_keyframe(clip[jobs[i].frame], clip[jobs[i].frame + 1], cfg);
    done[i] = {jobs[i].frame, a.objects, a.vectors};
  });
  IngestResult r;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    for (const auto& v : done[i].descriptors) r.features.push_back({done[i].index, v});
    r.keyframes[jobs[i].shot].push_back(std::move(done[i]));
  }
  return r;
}

/// Which shot owns an absolute frame index.
inline const ShotEntry& shot_of_frame(const ShotTable& t, int frame) {
  auto it = std::upper_bound(t.shots.begin(), t.shots.end(), frame,
                             [](int f, const ShotEntry& s) { return f < s.end; });
  if (it == t.shots.end() || frame < it->begin) throw DataError("frame " + std::to_string(frame) + " is in no shot");
  return *it;
}

// ---------------------------------------------------------------------------
// Codebooks and signatures
// ---------------------------------------------------------------------------

/// All (descriptor, region) channels in their fixed signature order.
inline std::vector<Channel> all_channels() {
  std::vector<Channel> out;
  for (auto r : kAllRegions)
    for (auto id : applicable_descriptors(r)) out.push_back({id, r});
  return out;
}

/// One codebook per channel from training-split key-frames. k is clipped to
/// the number of available vectors; channels with fewer than 2 are skipped.
inline std::vector<Codebook> train_codebooks(const std::vector<FeatureRecord>& features, const ShotTable& table,
                                             const PipelineConfig& cfg) {
  std::map<Channel, std::vector<FeatureVector>> by;
  for (const auto& f : features)
    if (shot_of_frame(table, f.frame).split == Split::Train) by[{f.vec.id, f.vec.region}].push_back(f.vec);
  std::vector<Channel> chans = all_channels();
  std::vector<Codebook> out(chans.size());
  std::vector<bool> ok(chans.size(), false);
  parallel_for(chans.size(), cfg.workers, [&](std::size_t i) {
    const auto& vs = by[chans[i]];
    if (vs.size() < 2) return;
    KMeansParams p = cfg.codebook;
    p.k = std::min<int>(p.k, static_cast<int>(vs.size()));
    out[i] = train_codebook(vs, p);
    ok[i] = true;
  });
  std::vector<Codebook> kept;
  for (std::size_t i = 0; i < chans.size(); ++i)
    if (ok[i]) kept.push_back(std::move(out[i]));
  return kept;
}

inline std::map<std::string, LabelSequence> label_sequences(const std::vector<FeatureRecord>& features,
                                                            const ShotTable& table,
                                                            const std::vector<Codebook>& cbs) {
  std::map<Channel, const Codebook*> cb_of;
  for (const auto& c : cbs) cb_of[c.channel()] = &c;
  std::map<std::string, LabelSequence> out;
  for (const auto& s : table.shots) out[s.id].shot_id = s.id;
  for (const auto& f : features) {
    auto it = cb_of.find({f.vec.id, f.vec.region});
    if (it == cb_of.end()) continue;
    out[shot_of_frame(table, f.frame).id].labels[it->first].push_back(
        nearest_centroid(it->second->centroids, f.vec.values));
  }
  return out;
}

using SignatureTable = std::map<std::string, ShotSignature>;

inline SignatureTable shot_signatures(const std::vector<FeatureRecord>& features, const ShotTable& table,
                                      const std::vector<Codebook>& cbs) {
  SignatureTable out;
  for (const auto& [id, seq] : label_sequences(features, table, cbs)) out[id] = shot_signature(seq, cbs);
  return out;
}

inline void write_signatures(std::ostream& out, const SignatureTable& t) {
  for (const auto& [id, s] : t) {
    out << id;
    for (double v : s.values) out << '\t' << format_double(v);
    out << '\n';
  }
}

inline SignatureTable read_signatures(std::istream& in) {
  SignatureTable t;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string id, tok;
    std::getline(ss, id, '\t');
    ShotSignature s;
    try {
      while (std::getline(ss, tok, '\t')) s.values.push_back(parse_double(tok));
    } catch (const DataError&) {
      throw DataError("signatures: bad number in row '" + id + "'");
    }
    if (!t.empty() && t.begin()->second.values.size() != s.values.size())
      throw DataError("signatures: rows differ in length");
    t[id] = std::move(s);
  }
  return t;
}

// ---------------------------------------------------------------------------
// Targets
// ---------------------------------------------------------------------------

/// Targets trained directly; C5 is derived from C1..C4.
inline bool is_trained_target(std::string_view code) { return code != "C5"; }

/// Training shots in table order, cut into `batches` contiguous batches;
/// a batch missing a class is merged into its predecessor (or successor).
inline std::vector<Batch> make_batches(const std::vector<std::pair<std::vector<double>, int>>& data, int batches) {
  std::vector<Batch> out(std::max(1, std::min<int>(batches, static_cast<int>(data.size()))));
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto& b = out[i * out.size() / data.size()];
    b.x.push_back(data[i].first);
    b.y.push_back(data[i].second);
  }
  auto both = [](const Batch& b) {
    return std::count(b.y.begin(), b.y.end(), 1) > 0 && std::count(b.y.begin(), b.y.end(), -1) > 0;
  };
  for (std::size_t i = 0; i < out.size() && out.size() > 1;) {
    if (both(out[i])) {
      ++i;
      continue;
    }
    // Appended to the predecessor, or prepended to the successor, so every
    // batch stays a contiguous run of shots.
    auto& into = out[i > 0 ? i - 1 : i + 1];
    const bool back = i > 0;
    into.x.insert(back ? into.x.end() : into.x.begin(), out[i].x.begin(), out[i].x.end());
    into.y.insert(back ? into.y.end() : into.y.begin(), out[i].y.begin(), out[i].y.end());
    out.erase(out.begin() + static_cast<std::ptrdiff_t>(i));
    i = 0;
  }
  return out;
}

/// One Learn++ ensemble per trainable target with both classes in training.
/// A batch that exhausts its retries contributes the hypotheses it accepted
/// before giving up; `warnings` (if given) collects those events.
inline std::map<std::string, EnsembleModel> train_targets(const SignatureTable& sigs, const LabelTable& labels,
                                                          const ShotTable& table, const PipelineConfig& cfg,
                                                          std::vector<std::string>* warnings = nullptr) {
  std::vector<std::string> codes;
  for (const auto& t : kTargets)
    if (is_trained_target(t.code)) codes.emplace_back(t.code);
  std::vector<std::string> note_buf(codes.size());
  std::string* notes = warnings ? note_buf.data() : nullptr;
  std::vector<EnsembleModel> models(codes.size());
  std::vector<bool> ok(codes.size(), false);
  parallel_for(codes.size(), cfg.workers, [&](std::size_t k) {
    std::vector<std::pair<std::vector<double>, int>> data;
    for (const auto& s : table.shots) {
      if (s.split != Split::Train) continue;
      auto ls = labels.find(s.id);
      auto sg = sigs.find(s.id);
      if (ls == labels.end() || sg == sigs.end()) continue;
      auto l = ls->second.find(codes[k]);
      if (l == ls->second.end()) continue;
      data.emplace_back(sg->second.values, l->second);
    }
    const auto pos = std::count_if(data.begin(), data.end(), [](auto& d) { return d.second > 0; });
    if (pos == 0 || pos == static_cast<long>(data.size())) return;
    EnsembleModel e;
    e.target = codes[k];
    TrainParams p = cfg.train;
    p.seed = cfg.train.seed + k;
    for (const auto& b : make_batches(data, cfg.learnpp_batches)) {
      try {
        e = learnpp_train_batch(std::move(e), b, p);
      } catch (const RetriesExhausted& x) {
        // Keep what the batch did accept; a batch with nothing usable adds nothing.
        e = x.partial;
        ++e.batches;
        if (notes) notes[k] = x.what();
      }
    }
    if (e.hypotheses.empty()) return;
    models[k] = std::move(e);
    ok[k] = true;
  });
  std::map<std::string, EnsembleModel> out;
  for (std::size_t k = 0; k < codes.size(); ++k) {
    if (ok[k]) out[codes[k]] = std::move(models[k]);
    if (warnings && !note_buf[k].empty()) warnings->push_back(codes[k] + ": " + note_buf[k]);
  }
  return out;
}

/// Ensemble scores in [-1, 1] per target, C5 as the maximum of C1..C4.
inline std::map<std::string, double> score_shot(const std::map<std::string, EnsembleModel>& models,
                                                const ShotSignature& sig) {
  std::map<std::string, double> out;
  for (const auto& [code, m] : models) out[code] = learnpp_predict(m, sig.values).value;
  if (out.count("C1") || out.count("C2") || out.count("C3") || out.count("C4"))
    out["C5"] = combined_concept_score(out);
  return out;
}

// ---------------------------------------------------------------------------
// Model directory: manifest "mavsir-models 1" then "<target> TAB <file>"
// ---------------------------------------------------------------------------

inline void save_models(const std::filesystem::path& dir, const std::map<std::string, EnsembleModel>& models) {
  std::filesystem::create_directories(dir);
  std::ofstream manifest(dir / "manifest.txt");
  if (!manifest) throw DataError("cannot write model manifest in '" + dir.string() + "'");
  manifest << "mavsir-models 1\n";
  for (const auto& [code, m] : models) {
    write_ensemble_file((dir / (code + ".mavsvm")).string(), m);
    manifest << code << '\t' << code << ".mavsvm\n";
  }
}

inline std::map<std::string, EnsembleModel> load_models(const std::filesystem::path& dir) {
  std::ifstream manifest(dir / "manifest.txt");
  std::string line;
  if (!manifest || !std::getline(manifest, line) || line != "mavsir-models 1")
    throw DataError("no model manifest in '" + dir.string() + "'");
  std::map<std::string, EnsembleModel> out;
  while (std::getline(manifest, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw DataError("model manifest: malformed line '" + line + "'");
    const std::string code = line.substr(0, tab);
    find_target(code);
    out[code] = read_ensemble_file((dir / line.substr(tab + 1)).string());
  }
  return out;
}

// Codebook directory: manifest "mavsir-codebooks 1" then one file per line,
// in signature order.
inline void save_codebooks(const std::filesystem::path& dir, const std::vector<Codebook>& cbs) {
  std::filesystem::create_directories(dir);
  std::ofstream manifest(dir / "manifest.txt");
  if (!manifest) throw DataError("cannot write codebook manifest in '" + dir.string() + "'");
  manifest << "mavsir-codebooks 1\n";
  for (const auto& c : cbs) {
    const std::string f = channel_name(c.channel()) + ".mavcb";
    write_codebook_file((dir / f).string(), c);
    manifest << f << '\n';
  }
}

inline std::vector<Codebook> load_codebooks(const std::filesystem::path& dir) {
  std::ifstream manifest(dir / "manifest.txt");
  std::string line;
  if (!manifest || !std::getline(manifest, line) || line != "mavsir-codebooks 1")
    throw DataError("no codebook manifest in '" + dir.string() + "'");
  std::vector<Codebook> out;
  while (std::getline(manifest, line))
    if (!line.empty()) out.push_back(read_codebook_file((dir / line).string()));
  return out;
}

// ---------------------------------------------------------------------------
// Index and evaluation
// ---------------------------------------------------------------------------

inline ShotIndex build_index(const ShotTable& table, const std::string& source,
                             const std::map<std::string, std::vector<KeyFrameRecord>>& keyframes,
                             const SignatureTable& sigs, const std::map<std::string, EnsembleModel>& models) {
  ShotIndex idx;
  for (const auto& s : table.shots) {
    ShotRecord r;
    r.shot_id = s.id;
    r.source = source;
    r.frame_begin = s.begin;
    r.frame_end = s.end;
    if (auto it = keyframes.find(s.id); it != keyframes.end()) r.keyframes = it->second;
    r.signature = "signatures.tsv#" + s.id;
    if (auto it = sigs.find(s.id); it != sigs.end()) r.scores = score_shot(models, it->second);
    idx.add(std::move(r));
  }
  return idx;
}

struct ConceptResult {
  std::string code;
  double ap = 0.0;
  int relevant = 0, ranked = 0;
};

struct EventResult {
  std::string code;
  bool has_references = false;
  NdcrPoint actual, minimum;
};

struct Evaluation {
  std::vector<ConceptResult> concepts;
  std::vector<EventResult> events;
};

/// Scores test-split shots only. Concepts: AP of the score ranking. Events:
/// each test shot is a detection spanning the shot with its score as
/// confidence; references are the positive test shots' spans. Actual NDCR
/// uses the decision threshold 0.
inline Evaluation evaluate(const ShotIndex& idx, const ShotTable& table, const LabelTable& labels,
                           const NdcrCosts& costs) {
  std::map<std::string, const ShotEntry*> test;
  for (const auto& s : table.shots)
    if (s.split == Split::Test) test[s.id] = &s;
  double test_hours = 0.0;
  for (const auto& [id, s] : test) test_hours += (s->end - s->begin) / static_cast<double>(table.fps) / 3600.0;

  Evaluation ev;
  for (const auto& t : kTargets) {
    const std::string code(t.code);
    RankedList all = idx.query(code, idx.size());
    RankedList r{code, {}};
    for (auto& it : all.items) {
      if (!test.count(it.shot_id)) continue;
      auto l = labels.find(it.shot_id);
      it.relevant = l != labels.end() && l->second.count(code) && l->second.at(code) > 0;
      r.items.push_back(it);
    }
    if (t.category == TargetCategory::Concept) {
      ConceptResult c{code, 0.0, 0, static_cast<int>(r.items.size())};
      for (const auto& it : r.items) c.relevant += it.relevant;
      if (c.relevant > 0) c.ap = average_precision(r);
      ev.concepts.push_back(c);
    } else {
      EventResult e{code, false, {}, {}};
      DetectionSet d{std::string(t.name), {}, {}, test_hours > 0 ? test_hours : 1.0};
      for (const auto& it : r.items) {
        const Interval span = table.span_seconds(*test.at(it.shot_id));
        d.detections.push_back({span, it.score});
        if (it.relevant) d.references.push_back(span);
      }
      if (!d.references.empty()) {
        e.has_references = true;
        e.actual = ndcr_point(d, 0.0, costs);
        e.minimum = minimum_ndcr(d, costs);
      }
      ev.events.push_back(e);
    }
  }
  return ev;
}

// Aligned text in the layout of the paper's results table: concepts with AP,
// then events with actual and minimum NDCR; "n/a" where nothing was scored.
inline std::string format_report(const Evaluation& ev) {
  auto num = [](bool ok, double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.4f", v);
    return ok ? std::string(b) : std::string("n/a");
  };
  auto pad = [](std::string s, std::size_t n) { return s.size() < n ? s + std::string(n - s.size(), ' ') : s + ' '; };
  std::ostringstream o;
  o << pad("Concept", 28) << pad("AP", 10) << "Relevant/Ranked\n";
  for (const auto& c : ev.concepts)
    o << pad(c.code + " " + std::string(find_target(c.code).name), 28) << pad(num(c.relevant > 0, c.ap), 10)
      << c.relevant << '/' << c.ranked << '\n';
  o << '\n' << pad("Event", 28) << pad("ActualNDCR", 12) << "MinNDCR\n";
  for (const auto& e : ev.events)
    o << pad(e.code + " " + std::string(find_target(e.code).name), 28) << pad(num(e.has_references, e.actual.ndcr), 12)
      << num(e.has_references, e.minimum.ndcr) << '\n';
  return o.str();
}

inline std::string format_report_csv(const Evaluation& ev) {
  std::ostringstream o;
  o << "target,name,kind,ap,actual_ndcr,min_ndcr,min_threshold\n";
  for (const auto& c : ev.concepts)
    o << c.code << ',' << find_target(c.code).name << ",concept," << (c.relevant > 0 ? format_double(c.ap) : "")
      << ",,,\n";
  for (const auto& e : ev.events) {
    o << e.code << ',' << find_target(e.code).name << ",event,,";
    if (e.has_references)
      o << format_double(e.actual.ndcr) << ',' << format_double(e.minimum.ndcr) << ','
        << format_double(e.minimum.threshold);
    else
      o << ",,";
    o << '\n';
  }
  return o.str();
}

}  // namespace mavsir
