// Batch driver: one subcommand per pipeline stage.
//
//   mavsir synth --out corpus/
//   mavsir ingest --clip corpus/clip.y4m --shots corpus/shots.txt --out work/
//   mavsir codebook-train --features work/features.tsv --shots corpus/shots.txt --out work/codebooks
//   mavsir train --features ... --shots ... --labels corpus/labels.txt --codebooks ... --out work/models
//   mavsir classify --index work/index --features ... --shots ... --codebooks ... --models ...
//   mavsir eval --index work/index --shots ... --labels ...

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mavsir/pipeline.hpp"

namespace fs = std::filesystem;
using namespace mavsir;

namespace {

struct Common {
  std::string config;
  std::vector<std::string> sets;

  PipelineConfig load() const {
    PipelineConfig c = config.empty() ? PipelineConfig{} : load_config(config);
    for (const auto& kv : sets) apply_override(c, kv);
    c.validate();
    return c;
  }
};

// A frame pair either from a clip (frame i and i+1) or from two image files.
struct PairSource {
  std::string clip;
  int frame = 0;
  std::string image1, image2;

  void add_options(CLI::App* sub) {
    sub->add_option("--clip", clip, "Y4M clip");
    sub->add_option("--frame", frame, "frame index in the clip (pairs with frame+1)")->check(CLI::NonNegativeNumber);
    sub->add_option("--image1", image1, "first frame (.ppm or .pgm)");
    sub->add_option("--image2", image2, "second frame (.ppm or .pgm)");
  }

  std::pair<ColorFrame, ColorFrame> load() const {
    if (!clip.empty()) {
      io::Y4mReader r(clip);
      ColorFrame f;
      for (int i = 0; i < frame; ++i)
        if (!r.next(f)) throw DataError("clip has fewer than " + std::to_string(frame + 2) + " frames");
      ColorFrame a, b;
      if (!r.next(a) || !r.next(b)) throw DataError("clip has fewer than " + std::to_string(frame + 2) + " frames");
      return {std::move(a), std::move(b)};
    }
    if (image1.empty() || image2.empty()) throw ConfigError("give --clip, or both --image1 and --image2");
    return {read_image(image1), read_image(image2)};
  }

  static ColorFrame read_image(const std::string& path) {
    if (fs::path(path).extension() == ".pgm") {
      const Frame g = io::read_pgm_file(path);
      ColorFrame c;
      c.planes = {g, g, g};
      return c;
    }
    return io::read_ppm_file(path);
  }
};

std::vector<FeatureRecord> load_features(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return read_feature_dump(in);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out || !(out << text)) throw DataError("cannot write '" + path.string() + "'");
}

int run(int argc, char** argv) {
  CLI::App app{"Motion-based surveillance video indexing and retrieval"};
  app.require_subcommand(1);
  app.fallthrough();  // --config / --set may follow the subcommand
  app.footer("Config keys (file: \"mavsir-config 1\" then key = value lines; --set key=value overrides):\n" +
             describe_config_keys());
  Common common;
  app.add_option("--config", common.config, "config file")->check(CLI::ExistingFile);
  app.add_option("--set", common.sets, "override one config key (key=value), repeatable");

  // synth
  auto* synth = app.add_subcommand("synth", "write the synthetic surveillance corpus");
  std::string synth_out;
  int synth_shots = 60;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--shots", synth_shots, "number of shots")->check(CLI::Range(10, 100000));
  synth->callback([&] {
    const auto cfg = common.load();
    write_corpus(synth_out, make_corpus(cfg.synth_seed, synth_shots));
  });

  // flow
  auto* flow = app.add_subcommand("flow", "Horn-Schunck flow between two frames");
  PairSource flow_src;
  std::string flow_out;
  flow_src.add_options(flow);
  flow->add_option("--out", flow_out, "flow dump (MAVFLOW1)")->required();
  flow->callback([&] {
    const auto cfg = common.load();
    const auto [a, b] = flow_src.load();
    write_flow_file(flow_out, horn_schunck_pyramidal(to_grayscale(a), to_grayscale(b), cfg.flow));
  });

  // segment
  auto* seg = app.add_subcommand("segment", "moving-object mask from the speed map of two frames");
  PairSource seg_src;
  std::string seg_out;
  seg_src.add_options(seg);
  seg->add_option("--out", seg_out, "mask (.pgm)")->required();
  seg->callback([&] {
    const auto cfg = common.load();
    const auto [a, b] = seg_src.load();
    const auto fl = horn_schunck_pyramidal(to_grayscale(a), to_grayscale(b), cfg.flow);
    const auto r = segment_moving(speed_map(fl, cfg.speed_threshold, cfg.speed_sigma), cfg.segment);
    std::ofstream out(seg_out, std::ios::binary);
    if (!out) throw DataError("cannot write '" + seg_out + "'");
    io::write_pgm(out, r.mask);
    std::printf("%zu object(s), %d iteration(s)\n", r.objects.size(), r.iterations);
    for (const auto& o : object_records(r, fl))
      std::printf("  bbox %d %d %d %d  area %d  mean speed %.3f\n", o.bbox.x, o.bbox.y, o.bbox.w, o.bbox.h, o.area,
                  o.mean_speed);
  });

  // extract
  auto* ext = app.add_subcommand("extract", "every applicable descriptor of one key-frame");
  PairSource ext_src;
  std::string ext_out;
  ext_src.add_options(ext);
  ext->add_option("--out", ext_out, "feature dump (.tsv)")->required();
  ext->callback([&] {
    const auto cfg = common.load();
    const auto [a, b] = ext_src.load();
    std::vector<FeatureRecord> recs;
    for (auto& v : analyze_keyframe(a, b, cfg).vectors) recs.push_back({ext_src.frame, std::move(v)});
    std::ofstream out(ext_out);
    if (!out) throw DataError("cannot write '" + ext_out + "'");
    write_feature_dump(out, recs);
  });

  // ingest
  auto* ing = app.add_subcommand("ingest", "key-frame analysis of every shot");
  std::string ing_clip, ing_shots, ing_out;
  ing->add_option("--clip", ing_clip, "Y4M clip")->required()->check(CLI::ExistingFile);
  ing->add_option("--shots", ing_shots, "shot table")->required()->check(CLI::ExistingFile);
  ing->add_option("--out", ing_out, "work directory (features.tsv, index/)")->required();
  ing->callback([&] {
    const auto cfg = common.load();
    const auto table = read_shot_table(ing_shots);
    const auto r = ingest(read_clip(ing_clip), table, cfg);
    fs::create_directories(ing_out);
    std::ofstream feats(fs::path(ing_out) / "features.tsv");
    write_feature_dump(feats, r.features);
    build_index(table, fs::path(ing_clip).filename().string(), r.keyframes, {}, {}).save(fs::path(ing_out) / "index");
    std::printf("%zu shot(s), %zu feature vector(s)\n", table.shots.size(), r.features.size());
  });

  // codebook-train
  auto* cbt = app.add_subcommand("codebook-train", "k-means codebook per descriptor channel");
  std::string cbt_features, cbt_shots, cbt_out;
  cbt->add_option("--features", cbt_features, "feature dump")->required()->check(CLI::ExistingFile);
  cbt->add_option("--shots", cbt_shots, "shot table")->required()->check(CLI::ExistingFile);
  cbt->add_option("--out", cbt_out, "codebook directory")->required();
  cbt->callback([&] {
    const auto cfg = common.load();
    const auto cbs = train_codebooks(load_features(cbt_features), read_shot_table(cbt_shots), cfg);
    save_codebooks(cbt_out, cbs);
    std::printf("%zu codebook(s)\n", cbs.size());
  });

  // train
  auto* tr = app.add_subcommand("train", "Learn++ ensemble per target");
  std::string tr_features, tr_shots, tr_labels, tr_codebooks, tr_out;
  tr->add_option("--features", tr_features, "feature dump")->required()->check(CLI::ExistingFile);
  tr->add_option("--shots", tr_shots, "shot table")->required()->check(CLI::ExistingFile);
  tr->add_option("--labels", tr_labels, "label table")->required()->check(CLI::ExistingFile);
  tr->add_option("--codebooks", tr_codebooks, "codebook directory")->required()->check(CLI::ExistingDirectory);
  tr->add_option("--out", tr_out, "model directory")->required();
  tr->callback([&] {
    const auto cfg = common.load();
    const auto table = read_shot_table(tr_shots);
    const auto sigs = shot_signatures(load_features(tr_features), table, load_codebooks(tr_codebooks));
    std::vector<std::string> warnings;
    const auto models = train_targets(sigs, read_labels(tr_labels), table, cfg, &warnings);
    for (const auto& w : warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    save_models(tr_out, models);
    for (const auto& [code, m] : models) std::printf("%s: %zu hypotheses\n", code.c_str(), m.hypotheses.size());
  });

  // classify
  auto* cls = app.add_subcommand("classify", "score every indexed shot");
  std::string cls_index, cls_features, cls_shots, cls_codebooks, cls_models;
  cls->add_option("--index", cls_index, "index directory")->required()->check(CLI::ExistingDirectory);
  cls->add_option("--features", cls_features, "feature dump")->required()->check(CLI::ExistingFile);
  cls->add_option("--shots", cls_shots, "shot table")->required()->check(CLI::ExistingFile);
  cls->add_option("--codebooks", cls_codebooks, "codebook directory")->required()->check(CLI::ExistingDirectory);
  cls->add_option("--models", cls_models, "model directory")->required()->check(CLI::ExistingDirectory);
  cls->callback([&] {
    common.load();
    const auto table = read_shot_table(cls_shots);
    const auto sigs = shot_signatures(load_features(cls_features), table, load_codebooks(cls_codebooks));
    const auto models = load_models(cls_models);
    const ShotIndex old = ShotIndex::load(cls_index);
    ShotIndex idx;
    for (const ShotRecord* r : old.records()) {
      ShotRecord n = *r;
      if (auto it = sigs.find(n.shot_id); it != sigs.end()) n.scores = score_shot(models, it->second);
      idx.add(std::move(n));
    }
    idx.save(cls_index);
    std::ofstream out(fs::path(cls_index) / "signatures.tsv");
    write_signatures(out, sigs);
  });

  // query
  auto* qry = app.add_subcommand("query", "shots ranked by a target's score");
  std::string q_index, q_target;
  std::size_t q_top = 10;
  qry->add_option("--index", q_index, "index directory")->required()->check(CLI::ExistingDirectory);
  qry->add_option("--target", q_target, "target code or name (C1..C5, E1..E6)")->required();
  qry->add_option("--top", q_top, "number of shots")->check(CLI::PositiveNumber);
  qry->callback([&] {
    common.load();
    const auto r = ShotIndex::load(q_index).query(q_target, q_top);
    for (std::size_t i = 0; i < r.items.size(); ++i)
      std::printf("%3zu  %-16s %+.6f\n", i + 1, r.items[i].shot_id.c_str(), r.items[i].score);
  });

  // eval
  auto* ev = app.add_subcommand("eval", "AP per concept, actual/minimum NDCR per event");
  std::string e_index, e_shots, e_labels, e_dets, e_refs, e_csv;
  double e_hours = 0.0;
  ev->add_option("--index", e_index, "index directory (with --shots, --labels)");
  ev->add_option("--shots", e_shots, "shot table");
  ev->add_option("--labels", e_labels, "label table");
  ev->add_option("--detections", e_dets, "event detections: event start end confidence");
  ev->add_option("--references", e_refs, "event references: event start end");
  ev->add_option("--duration-hours", e_hours, "evaluated duration for detection files")->check(CLI::PositiveNumber);
  ev->add_option("--csv", e_csv, "also write the report as CSV");
  ev->callback([&] {
    const auto cfg = common.load();
    if (!e_dets.empty() || !e_refs.empty()) {
      if (e_dets.empty() || e_refs.empty() || e_hours <= 0.0)
        throw ConfigError("detection mode needs --detections, --references and --duration-hours");
      std::ifstream d(e_dets), r(e_refs);
      if (!d || !r) throw DataError("cannot open detection or reference file");
      const auto sets = build_detection_sets(read_event_lines(d, true), read_event_lines(r, false), e_hours);
      std::ostringstream csv;
      csv << "event,actual_ndcr,min_ndcr,min_threshold\n";
      std::printf("%-24s %-12s %s\n", "Event", "ActualNDCR", "MinNDCR");
      for (const auto& s : sets) {
        const auto a = ndcr_point(s, 0.0, cfg.costs), m = minimum_ndcr(s, cfg.costs);
        std::printf("%-24s %-12.4f %.4f\n", s.event.c_str(), a.ndcr, m.ndcr);
        csv << s.event << ',' << format_double(a.ndcr) << ',' << format_double(m.ndcr) << ','
            << format_double(m.threshold) << '\n';
      }
      if (!e_csv.empty()) write_text(e_csv, csv.str());
      return;
    }
    if (e_index.empty() || e_shots.empty() || e_labels.empty())
      throw ConfigError("give --index, --shots and --labels (or the detection-file options)");
    const auto result =
        evaluate(ShotIndex::load(e_index), read_shot_table(e_shots), read_labels(e_labels), cfg.costs);
    std::fputs(format_report(result).c_str(), stdout);
    if (!e_csv.empty()) write_text(e_csv, format_report_csv(result));
  });

  // export-xml
  auto* xml = app.add_subcommand("export-xml", "XML record of one indexed shot");
  std::string x_index, x_shot, x_out;
  xml->add_option("--index", x_index, "index directory")->required()->check(CLI::ExistingDirectory);
  xml->add_option("--shot", x_shot, "shot id")->required();
  xml->add_option("--out", x_out, "output file (default stdout)");
  xml->callback([&] {
    common.load();
    const std::string doc = export_xml(ShotIndex::load(x_index).at(x_shot));
    if (x_out.empty())
      std::fputs(doc.c_str(), stdout);
    else
      write_text(x_out, doc);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::string cmd = "mavsir";
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config" || a == "--set") ++i;
    else if (!a.starts_with("-")) {
      cmd = "mavsir " + a;
      break;
    }
  }
  try {
    return run(argc, argv);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "%s: config error: %s\n", cmd.c_str(), e.what());
    return 2;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "%s: numerical failure: %s\n", cmd.c_str(), e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s: %s\n", cmd.c_str(), e.what());
    return 3;
  }
}
