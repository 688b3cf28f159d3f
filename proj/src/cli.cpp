#include "lvc/cli.h"

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <json.hpp>

#include "lvc/checkpoint.h"
#include "lvc/dataset.h"
#include "lvc/evaluation.h"
#include "lvc/pipeline.h"
#include "lvc/profiler.h"
#include "lvc/report.h"
#include "lvc/threading.h"
#include "lvc/training.h"

namespace fs = std::filesystem;

namespace lvc {

namespace {

struct VariantToken {
  BufferStrategy strategy = BufferStrategy::Explicit;
  int implicit_channels = 0;

  std::string str() const {
    if (strategy == BufferStrategy::Explicit) return "explicit";
    return strategy_name(strategy) + ":" + std::to_string(implicit_channels);
  }
};

// "explicit", "implicit:IB" or "hybrid:IB". Explicit takes no buffer width;
// pairing one with it is rejected here, at parse time.
VariantToken parse_variant(const std::string& tok) {
  const auto colon = tok.find(':');
  const std::string name = tok.substr(0, colon);
  VariantToken v;
  try {
    v.strategy = strategy_from_name(name);
  } catch (const DataError& e) {
    throw UsageError(e.what());
  }
  if (v.strategy == BufferStrategy::Explicit) {
    if (colon != std::string::npos)
      throw UsageError("explicit buffering takes no channel count: " + tok);
    return v;
  }
  if (colon == std::string::npos)
    throw UsageError("variant '" + tok + "' needs a channel count, e.g. " +
                     name + ":64");
  try {
    v.implicit_channels = std::stoi(tok.substr(colon + 1));
  } catch (const std::exception&) {
    throw UsageError("bad channel count in variant '" + tok + "'");
  }
  if (v.implicit_channels <= 0 || v.implicit_channels > 512)
    throw UsageError("channel count out of range in variant '" + tok + "'");
  return v;
}

std::string lambda_tag(double lambda) {
  char buf[32];
  if (lambda == std::floor(lambda))
    std::snprintf(buf, sizeof(buf), "%d", int(lambda));
  else
    std::snprintf(buf, sizeof(buf), "%g", lambda);
  return buf;
}

struct SizeArg {
  int w = 0, h = 0;
};

SizeArg parse_size(const std::string& s) {
  SizeArg out;
  const auto x = s.find('x');
  try {
    out.w = std::stoi(s.substr(0, x));
    out.h = std::stoi(s.substr(x + 1));
  } catch (const std::exception&) {
    throw UsageError("bad size '" + s + "', expected WxH");
  }
  if (x == std::string::npos || out.w <= 0 || out.h <= 0)
    throw UsageError("bad size '" + s + "', expected WxH");
  return out;
}

std::vector<Tensor> load_sequence_frames(const std::string& path,
                                         int max_frames) {
  auto src = open_sequence(path);
  LVC_CHECK(src->count() > 0, "empty sequence ", path);
  return load_frames(*src, max_frames);
}

EvalRow evaluate_one(const VideoModel& model,
                     const std::vector<Tensor>& frames,
                     const std::string& sequence_name, int intra_period) {
  SequenceEncodeResult enc = encode_sequence(model, frames, intra_period);
  SequenceDecodeResult dec = decode_sequence(model, enc.container);
  LVC_CHECK_INTEGRITY(dec.frames.size() == enc.recon.size(),
                      "decoded frame count mismatch");
  for (size_t i = 0; i < dec.frames.size(); ++i)
    LVC_CHECK_INTEGRITY(bit_equal(dec.frames[i], enc.recon[i]),
                        "decoder output differs from encoder reconstruction "
                        "at frame ", i);
  EvalRow row;
  row.sequence = sequence_name;
  row.framework = framework_name(model.config().framework);
  row.strategy = strategy_name(model.config().strategy);
  row.implicit_channels =
      model.config().strategy == BufferStrategy::Explicit
          ? 0
          : model.config().implicit_channels;
  row.lambda = model.config().lambda;
  row.bpp = enc.bpp;
  row.psnr = enc.psnr_mean;
  row.bits_motion = enc.bits_motion;
  row.bits_inter = enc.bits_inter;
  row.bits_intra = enc.bits_intra;
  row.temporal_complexity = temporal_complexity(frames);
  return row;
}

void write_stats_json(const std::string& path,
                      const SequenceEncodeResult& enc) {
  nlohmann::json j;
  j["bpp"] = enc.bpp;
  j["psnr"] = enc.psnr_mean;
  j["bits_motion"] = enc.bits_motion;
  j["bits_inter"] = enc.bits_inter;
  j["bits_intra"] = enc.bits_intra;
  nlohmann::json frames = nlohmann::json::array();
  for (const auto& f : enc.frames) {
    nlohmann::json fj;
    fj["type"] = std::string(1, f.type);
    fj["bits"] = f.bits;
    fj["psnr"] = f.psnr;
    frames.push_back(std::move(fj));
  }
  j["frames"] = std::move(frames);
  write_text_file(path, j.dump(2) + "\n");
}

// ---- subcommand state ----

struct TrainArgs {
  std::string framework = "CRC";
  std::string strategy = "hybrid";
  int ib = 64;
  double lambda = 1024.0;
  int width = 64;
  std::string out;
  std::string log_path;
  TrainConfig cfg;
};

struct CodecArgs {
  std::string ckpt, input, output, stats;
  int frames = 0;
  int intra_period = 32;
};

struct EvalArgs {
  std::string ckpt, input, out, name;
  int frames = 96;
  int intra_period = 32;
};

struct BdArgs {
  std::string anchor, test, out;
};

struct ProfileArgs {
  std::string framework = "CRC";
  std::string variant = "hybrid:64";
  int width = 64;
  std::string res = "1920x1088";
  std::string out;
  std::string table;
  std::vector<std::string> table_variants = {"explicit", "implicit:67",
                                             "implicit:6", "hybrid:64",
                                             "hybrid:3"};
};

struct MatrixArgs {
  std::string out;
  std::vector<std::string> frameworks = {"RC", "CC", "CRC", "MCR"};
  std::vector<std::string> variants = {"explicit", "implicit:67",
                                       "implicit:6", "hybrid:64", "hybrid:3"};
  std::vector<double> lambdas = {256.0, 512.0, 1024.0, 2048.0};
  std::vector<std::string> inputs;
  int width = 16;
  int frames = 96;
  int intra_period = 32;
  bool do_train = false;
  int steps = 400;
  int patch = 64;
  int batch = 1;
  uint64_t seed = 7;
  std::string anchor = "RC/explicit";
  int jobs = 0;
};

struct PlotArgs {
  std::string results, out;
};

struct GenArgs {
  std::string out;
  int count = 5;
  int frames = 96;
  std::string size = "64x64";
  uint64_t seed = 11;
};

Framework framework_from_cli(const std::string& name) {
  try {
    return framework_from_name(name);
  } catch (const DataError& e) {
    throw UsageError(e.what());
  }
}

ModelConfig make_config(const std::string& framework,
                        const VariantToken& variant, double lambda,
                        int width) {
  ModelConfig cfg;
  cfg.framework = framework_from_cli(framework);
  cfg.strategy = variant.strategy;
  cfg.implicit_channels = variant.implicit_channels;
  cfg.lambda = lambda;
  cfg.base_width = width;
  return cfg;
}

void write_train_log(const std::string& path,
                     const std::vector<StepLog>& logs) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& l : logs)
    rows.push_back({std::to_string(l.step), std::to_string(l.stage),
                    fmt_num(l.loss), fmt_num(l.dist), fmt_num(l.rate_bpp),
                    fmt_num(l.lr)});
  write_csv(path, {"step", "stage", "loss", "mse", "bpp", "lr"}, rows);
}

int cmd_train(const TrainArgs& a) {
  const VariantToken variant = parse_variant(a.strategy == "explicit"
                                                 ? a.strategy
                                                 : a.strategy + ":" +
                                                       std::to_string(a.ib));
  ModelConfig cfg = make_config(a.framework, variant, a.lambda, a.width);
  TrainConfig tc = a.cfg;
  tc.lambda = a.lambda;
  VideoModel model(cfg, tc.seed);
  std::cerr << "training " << cfg.variant_name() << " lambda "
            << lambda_tag(a.lambda) << " for " << tc.steps << " steps\n";
  TrainResult result = train_model(model, tc);
  save_checkpoint(a.out, model);
  if (!a.log_path.empty()) write_train_log(a.log_path, result.logs);
  const auto& last = result.logs.back();
  std::cout << "final loss " << fmt_num(last.loss) << " mse "
            << fmt_num(last.dist) << " bpp " << fmt_num(last.rate_bpp)
            << "\n";
  return 0;
}

int cmd_encode(const CodecArgs& a) {
  auto model = load_checkpoint(a.ckpt);
  const std::vector<Tensor> frames = load_sequence_frames(a.input, a.frames);
  SequenceEncodeResult enc =
      encode_sequence(*model, frames, a.intra_period);
  write_file(a.output, enc.container);
  if (!a.stats.empty()) write_stats_json(a.stats, enc);
  std::cout << "encoded " << frames.size() << " frames to " << a.output
            << ": " << fmt_num(enc.bpp) << " bpp, " << fmt_num(enc.psnr_mean)
            << " dB\n";
  return 0;
}

int cmd_decode(const CodecArgs& a) {
  auto model = load_checkpoint(a.ckpt);
  const std::vector<uint8_t> container = read_file(a.input);
  SequenceDecodeResult dec = decode_sequence(*model, container);
  fs::create_directories(a.output);
  for (size_t i = 0; i < dec.frames.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%05zu.ppm", i);
    write_ppm((fs::path(a.output) / name).string(), dec.frames[i]);
  }
  std::cout << "decoded " << dec.frames.size() << " frames to " << a.output
            << "\n";
  return 0;
}

int cmd_eval(const EvalArgs& a) {
  auto model = load_checkpoint(a.ckpt);
  const std::vector<Tensor> frames = load_sequence_frames(a.input, a.frames);
  const std::string name =
      a.name.empty() ? fs::path(a.input).stem().string() : a.name;
  const EvalRow row = evaluate_one(*model, frames, name, a.intra_period);
  write_eval_rows(a.out, {row});
  std::cout << row.variant() << " lambda " << lambda_tag(row.lambda) << " on "
            << name << ": " << fmt_num(row.bpp) << " bpp, "
            << fmt_num(row.psnr) << " dB\n";
  return 0;
}

// Rows for one variant across sequences and lambdas become per-sequence
// curves; BD is computed per sequence, then aggregated.
struct BdOutcome {
  std::vector<std::pair<std::string, double>> per_sequence;
  double mean = 0.0;
};

BdOutcome bd_between(const std::vector<EvalRow>& anchor_rows,
                     const std::vector<EvalRow>& test_rows) {
  const auto curves_by_sequence = [](const std::vector<EvalRow>& rows) {
    std::map<std::string, RDCurve> out;
    for (const auto& r : rows)
      out[r.sequence].points.push_back({r.bpp, r.psnr});
    return out;
  };
  const auto anchor = curves_by_sequence(anchor_rows);
  const auto test = curves_by_sequence(test_rows);
  BdOutcome out;
  std::vector<double> values;
  for (const auto& [seq, curve] : test) {
    const auto it = anchor.find(seq);
    LVC_CHECK(it != anchor.end(), "anchor has no rows for sequence ", seq);
    const double bd = bd_rate_percent(it->second, curve);
    out.per_sequence.emplace_back(seq, bd);
    values.push_back(bd);
  }
  LVC_CHECK(!values.empty(), "no common sequences between anchor and test");
  out.mean = aggregate_bd(values);
  return out;
}

int cmd_bdrate(const BdArgs& a) {
  const BdOutcome r =
      bd_between(read_eval_rows(a.anchor), read_eval_rows(a.test));
  nlohmann::json j;
  j["mean_bd_rate_percent"] = r.mean;
  nlohmann::json per = nlohmann::json::array();
  for (const auto& [seq, bd] : r.per_sequence) {
    nlohmann::json e;
    e["sequence"] = seq;
    e["bd_rate_percent"] = bd;
    per.push_back(std::move(e));
  }
  j["per_sequence"] = std::move(per);
  if (!a.out.empty()) write_text_file(a.out, j.dump(2) + "\n");
  std::cout << "BD-rate " << fmt_num(r.mean) << "%\n";
  return 0;
}

nlohmann::json profile_to_json(const ModelConfig& cfg,
                               const ComplexityReport& rep) {
  nlohmann::json j;
  j["framework"] = framework_name(cfg.framework);
  j["strategy"] = strategy_name(cfg.strategy);
  j["implicit_channels"] =
      cfg.strategy == BufferStrategy::Explicit ? 0 : cfg.implicit_channels;
  j["width"] = rep.width;
  j["height"] = rep.height;
  j["enc_kmacs_per_pixel"] = rep.enc_kmacs_per_pixel;
  j["dec_kmacs_per_pixel"] = rep.dec_kmacs_per_pixel;
  j["param_count"] = rep.param_count;
  j["buffer_channels"] =
      buffer_channel_count(cfg.strategy, cfg.implicit_channels);
  return j;
}

int cmd_profile(const ProfileArgs& a) {
  const SizeArg res = parse_size(a.res);
  if (!a.table.empty()) {
    std::vector<std::vector<std::string>> rows;
    for (const std::string& fw : {std::string("RC"), std::string("CC"),
                                  std::string("CRC"), std::string("MCR")})
      for (const std::string& vt : a.table_variants) {
        const VariantToken v = parse_variant(vt);
        const ModelConfig cfg = make_config(fw, v, 1024.0, a.width);
        VideoModel model(cfg, 0);
        const ComplexityReport rep = profile_model(model, res.w, res.h);
        rows.push_back(
            {fw, v.str(),
             std::to_string(buffer_channel_count(cfg.strategy,
                                                 cfg.implicit_channels)),
             fmt_num(rep.enc_kmacs_per_pixel),
             fmt_num(rep.dec_kmacs_per_pixel),
             std::to_string(rep.param_count)});
      }
    write_csv(a.table,
              {"framework", "buffer", "buffer_channels", "enc_kmacs_px",
               "dec_kmacs_px", "params"},
              rows);
    std::cout << "wrote " << rows.size() << " profile rows to " << a.table
              << "\n";
    return 0;
  }
  const VariantToken v = parse_variant(a.variant);
  const ModelConfig cfg = make_config(a.framework, v, 1024.0, a.width);
  VideoModel model(cfg, 0);
  const ComplexityReport rep = profile_model(model, res.w, res.h);
  const nlohmann::json j = profile_to_json(cfg, rep);
  if (!a.out.empty()) write_text_file(a.out, j.dump(2) + "\n");
  std::cout << j.dump(2) << "\n";
  return 0;
}

struct MatrixCell {
  std::string framework;
  VariantToken variant;
  double lambda = 0.0;

  std::string tag() const {
    std::string v = variant.strategy == BufferStrategy::Explicit
                        ? "explicit"
                        : strategy_name(variant.strategy) +
                              std::to_string(variant.implicit_channels);
    return framework + "_" + v + "_" + lambda_tag(lambda);
  }
};

int cmd_matrix(const MatrixArgs& a) {
  LVC_CHECK(!a.out.empty(), "matrix needs --out");
  if (a.inputs.empty())
    throw UsageError("matrix needs at least one --input sequence");
  std::vector<VariantToken> variants;
  for (const auto& v : a.variants) variants.push_back(parse_variant(v));
  std::vector<MatrixCell> cells;
  for (const auto& fw : a.frameworks) {
    framework_from_cli(fw);
    for (const auto& v : variants)
      for (double l : a.lambdas) cells.push_back({fw, v, l});
  }
  // Resolve sequences: files or directories of sequences.
  std::vector<std::string> seq_paths;
  for (const auto& in : a.inputs) {
    if (fs::is_directory(in)) {
      std::vector<std::string> found;
      for (const auto& e : fs::directory_iterator(in))
        if (e.path().extension() == ".yuv")
          found.push_back(e.path().string());
      std::sort(found.begin(), found.end());
      if (found.empty())
        seq_paths.push_back(in);  // directory of ppm frames
      else
        seq_paths.insert(seq_paths.end(), found.begin(), found.end());
    } else {
      seq_paths.push_back(in);
    }
  }

  fs::create_directories(fs::path(a.out) / "ckpt");
  fs::create_directories(fs::path(a.out) / "results");

  // Train or verify checkpoints.
  std::vector<std::string> missing;
  for (const auto& cell : cells) {
    const std::string ckpt =
        (fs::path(a.out) / "ckpt" / (cell.tag() + ".lvcw")).string();
    if (fs::exists(ckpt)) continue;
    if (!a.do_train) {
      missing.push_back(ckpt);
      continue;
    }
    ModelConfig cfg =
        make_config(cell.framework, cell.variant, cell.lambda, a.width);
    TrainConfig tc;
    tc.lambda = cell.lambda;
    tc.steps = a.steps;
    tc.patch = a.patch;
    tc.batch = a.batch;
    const std::string t = cell.tag();
    tc.seed = a.seed ^ fnv1a64(t.data(), t.size());
    VideoModel model(cfg, tc.seed);
    std::cerr << "training cell " << cell.tag() << "\n";
    train_model(model, tc);
    save_checkpoint(ckpt, model);
  }
  if (!missing.empty()) {
    std::string msg = "missing checkpoints (run with --train):";
    for (const auto& m : missing) msg += "\n  " + m;
    throw UsageError(msg);
  }

  // Evaluate cells; each cell owns its models and buffers, so cells can run
  // concurrently. Completed cells are skipped, which makes reruns cheap.
  const int workers =
      a.jobs > 0 ? a.jobs : worker_count(int(cells.size()));
  run_jobs(
      int(cells.size()),
      [&](int idx) {
        const MatrixCell& cell = cells[size_t(idx)];
        const std::string rpath =
            (fs::path(a.out) / "results" / (cell.tag() + ".json")).string();
        if (fs::exists(rpath)) return;
        const std::string ckpt =
            (fs::path(a.out) / "ckpt" / (cell.tag() + ".lvcw")).string();
        auto model = load_checkpoint(ckpt);
        std::vector<EvalRow> rows;
        for (const auto& sp : seq_paths) {
          const std::vector<Tensor> frames =
              load_sequence_frames(sp, a.frames);
          rows.push_back(evaluate_one(*model, frames,
                                      fs::path(sp).stem().string(),
                                      a.intra_period));
        }
        write_eval_rows(rpath, rows);
      },
      workers);

  // Gather rows, deterministically ordered.
  std::vector<EvalRow> all;
  for (const auto& cell : cells) {
    const std::string rpath =
        (fs::path(a.out) / "results" / (cell.tag() + ".json")).string();
    for (auto& r : read_eval_rows(rpath)) all.push_back(std::move(r));
  }
  std::sort(all.begin(), all.end(), [](const EvalRow& a_, const EvalRow& b_) {
    return std::tie(a_.framework, a_.strategy, a_.implicit_channels,
                    a_.lambda, a_.sequence) <
           std::tie(b_.framework, b_.strategy, b_.implicit_channels,
                    b_.lambda, b_.sequence);
  });
  std::vector<std::vector<std::string>> csv_rows;
  for (const auto& r : all)
    csv_rows.push_back({r.sequence, r.framework, r.strategy,
                        std::to_string(r.implicit_channels),
                        lambda_tag(r.lambda), fmt_num(r.bpp), fmt_num(r.psnr),
                        fmt_num(r.bits_motion), fmt_num(r.bits_inter),
                        fmt_num(r.bits_intra),
                        fmt_num(r.temporal_complexity)});
  write_csv((fs::path(a.out) / "rd_curves.csv").string(),
            {"sequence", "framework", "strategy", "implicit_channels",
             "lambda", "bpp", "psnr", "bits_motion", "bits_inter",
             "bits_intra", "temporal_complexity"},
            csv_rows);

  // BD table against the anchor cell group.
  const auto slash = a.anchor.find('/');
  if (slash == std::string::npos)
    throw UsageError("anchor must be framework/variant, e.g. RC/explicit");
  const std::string anchor_fw = a.anchor.substr(0, slash);
  const VariantToken anchor_v = parse_variant(a.anchor.substr(slash + 1));
  const auto group_rows = [&](const std::string& fw, const VariantToken& v) {
    std::vector<EvalRow> rows;
    for (const auto& r : all)
      if (r.framework == fw && r.strategy == strategy_name(v.strategy) &&
          r.implicit_channels == (v.strategy == BufferStrategy::Explicit
                                      ? 0
                                      : v.implicit_channels))
        rows.push_back(r);
    return rows;
  };
  const std::vector<EvalRow> anchor_rows = group_rows(anchor_fw, anchor_v);
  LVC_CHECK(!anchor_rows.empty(), "anchor group ", a.anchor,
            " has no results");

  std::vector<std::vector<std::string>> bd_rows, bd_seq_rows;
  nlohmann::json bd_json = nlohmann::json::array();
  for (const auto& fw : a.frameworks)
    for (const auto& v : variants) {
      if (fw == anchor_fw && v.str() == anchor_v.str()) continue;
      const std::vector<EvalRow> rows = group_rows(fw, v);
      if (rows.empty()) continue;
      BdOutcome bd;
      try {
        bd = bd_between(anchor_rows, rows);
      } catch (const DataError& e) {
        // Undertrained cells can yield non-monotone curves; losing one
        // comparison should not void the whole run.
        std::cerr << "warning: no BD for " << fw << "/" << v.str() << ": "
                  << e.what() << "\n";
        continue;
      }
      bd_rows.push_back({fw, v.str(), fmt_num(bd.mean)});
      nlohmann::json e;
      e["framework"] = fw;
      e["buffer"] = v.str();
      e["mean_bd_rate_percent"] = bd.mean;
      for (const auto& [seq, val] : bd.per_sequence) {
        bd_seq_rows.push_back({fw, v.str(), seq, fmt_num(val)});
        e["per_sequence"][seq] = val;
      }
      bd_json.push_back(std::move(e));
    }
  write_csv((fs::path(a.out) / "bd_summary.csv").string(),
            {"framework", "buffer", "mean_bd_rate_percent"}, bd_rows);
  write_csv((fs::path(a.out) / "per_sequence_bd.csv").string(),
            {"framework", "buffer", "sequence", "bd_rate_percent"},
            bd_seq_rows);
  write_text_file((fs::path(a.out) / "bd_summary.json").string(),
                  bd_json.dump(2) + "\n");
  std::cout << "matrix complete: " << cells.size() << " cells, "
            << seq_paths.size() << " sequences, results in " << a.out << "\n";
  return 0;
}

int cmd_plot(const PlotArgs& a) {
  std::vector<EvalRow> all;
  const fs::path results_dir = fs::path(a.results) / "results";
  LVC_CHECK(fs::is_directory(results_dir), "no results directory under ",
            a.results);
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(results_dir))
    if (e.path().extension() == ".json") files.push_back(e.path().string());
  std::sort(files.begin(), files.end());
  LVC_CHECK(!files.empty(), "no result files in ", results_dir.string());
  for (const auto& f : files)
    for (auto& r : read_eval_rows(f)) all.push_back(std::move(r));
  fs::create_directories(a.out);

  // Rate-distortion chart: sequence-mean bpp/psnr per variant and lambda.
  std::map<std::string, std::map<double, std::pair<double, double>>> variants;
  std::map<std::string, std::map<double, int>> counts;
  for (const auto& r : all) {
    auto& acc = variants[r.variant()][r.lambda];
    acc.first += r.bpp;
    acc.second += r.psnr;
    counts[r.variant()][r.lambda]++;
  }
  std::vector<PlotSeries> rd_series;
  for (const auto& [variant, by_lambda] : variants) {
    PlotSeries s;
    s.label = variant;
    for (const auto& [lambda, acc] : by_lambda) {
      const int n = counts[variant][lambda];
      s.points.emplace_back(acc.first / n, acc.second / n);
    }
    std::sort(s.points.begin(), s.points.end());
    rd_series.push_back(std::move(s));
  }
  write_svg_plot((fs::path(a.out) / "rd_curves.svg").string(),
                 "Rate-distortion by buffer variant", "bits per pixel",
                 "PSNR (dB)", rd_series);

  // Per-framework scatter: BD of hybrid against the implicit variant with the
  // same total buffer channels, one point per sequence, x = temporal
  // complexity of the source.
  std::set<std::string> frameworks;
  for (const auto& r : all) frameworks.insert(r.framework);
  for (const auto& fw : frameworks) {
    std::vector<PlotSeries> scatter;
    std::map<int, std::vector<EvalRow>> implicit_by_total,
        hybrid_by_total;
    for (const auto& r : all) {
      if (r.framework != fw) continue;
      if (r.strategy == "implicit")
        implicit_by_total[r.implicit_channels].push_back(r);
      else if (r.strategy == "hybrid")
        hybrid_by_total[3 + r.implicit_channels].push_back(r);
    }
    for (const auto& [total, hybrid_rows] : hybrid_by_total) {
      const auto it = implicit_by_total.find(total);
      if (it == implicit_by_total.end()) continue;
      const BdOutcome bd = bd_between(it->second, hybrid_rows);
      std::map<std::string, double> h_by_seq;
      for (const auto& r : hybrid_rows)
        h_by_seq[r.sequence] = r.temporal_complexity;
      PlotSeries s;
      s.line = false;
      s.label = "hybrid3+" + std::to_string(total - 3) + " vs implicit" +
                std::to_string(total);
      for (const auto& [seq, val] : bd.per_sequence)
        s.points.emplace_back(h_by_seq.at(seq), val);
      scatter.push_back(std::move(s));
    }
    if (scatter.empty()) continue;
    write_svg_plot(
        (fs::path(a.out) / ("scatter_" + fw + ".svg")).string(),
        fw + ": hybrid gain vs content motion", "temporal complexity",
        "BD-rate vs implicit (%)", scatter);
  }
  std::cout << "plots written to " << a.out << "\n";
  return 0;
}

int cmd_gendata(const GenArgs& a) {
  const SizeArg size = parse_size(a.size);
  fs::create_directories(a.out);
  for (int i = 0; i < a.count; ++i) {
    SyntheticSpec spec;
    spec.seed = a.seed + uint64_t(i) * 0x9e3779b97f4a7c15ull;
    spec.frames = a.frames;
    spec.width = size.w;
    spec.height = size.h;
    // Spread motion magnitudes so the set spans temporal complexity.
    spec.max_shift = 0.2 + 0.8 * double(i);
    spec.rot_speed = 0.002 * double(i % 3);
    char name[32];
    std::snprintf(name, sizeof(name), "seq_%02d.yuv", i);
    write_yuv_sequence((fs::path(a.out) / name).string(),
                       make_synthetic_clip(spec));
  }
  std::cout << "wrote " << a.count << " sequences to " << a.out << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"learned video codec workbench"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from an INI file");
  app.allow_config_extras(CLI::config_extras_mode::ignore_all);

  TrainArgs train;
  auto* t = app.add_subcommand("train", "train a model variant");
  t->add_option("--framework", train.framework, "RC, CC, CRC or MCR");
  t->add_option("--buffering", train.strategy,
                "explicit, implicit or hybrid");
  t->add_option("--ib", train.ib, "implicit buffer channels");
  t->add_option("--lambda", train.lambda, "rate-distortion weight");
  t->add_option("--model-width", train.width, "backbone channel width");
  t->add_option("--steps", train.cfg.steps, "optimizer steps");
  t->add_option("--batch", train.cfg.batch, "clips per step");
  t->add_option("--patch", train.cfg.patch, "training patch size");
  t->add_option("--lr", train.cfg.lr, "base learning rate");
  t->add_option("--rollout", train.cfg.rollout, "stage-3 inter frames");
  t->add_option("--seed", train.cfg.seed, "train seed");
  t->add_option("--out", train.out, "checkpoint output path")->required();
  t->add_option("--log", train.log_path, "per-step CSV log path");

  CodecArgs enc;
  auto* e = app.add_subcommand("encode", "encode a sequence");
  e->add_option("--ckpt", enc.ckpt, "weight file")->required();
  e->add_option("--input", enc.input, "yuv file or ppm directory")
      ->required();
  e->add_option("--out", enc.output, "bitstream output path")->required();
  e->add_option("--frames", enc.frames, "frame count (0 = all)");
  e->add_option("--intra-period", enc.intra_period, "intra frame period");
  e->add_option("--stats", enc.stats, "per-frame stats JSON path");

  CodecArgs dec;
  auto* d = app.add_subcommand("decode", "decode a bitstream");
  d->add_option("--ckpt", dec.ckpt, "weight file")->required();
  d->add_option("--bitstream", dec.input, "bitstream path")->required();
  d->add_option("--out", dec.output, "output frame directory")->required();

  EvalArgs ev;
  auto* ve = app.add_subcommand("eval",
                                "encode, decode, verify and measure");
  ve->add_option("--ckpt", ev.ckpt, "weight file")->required();
  ve->add_option("--input", ev.input, "sequence path")->required();
  ve->add_option("--out", ev.out, "results JSON path")->required();
  ve->add_option("--frames", ev.frames, "frame count");
  ve->add_option("--intra-period", ev.intra_period, "intra frame period");
  ve->add_option("--name", ev.name, "sequence name override");

  BdArgs bd;
  auto* b = app.add_subcommand("bdrate",
                               "BD-rate between two result files");
  b->add_option("--anchor", bd.anchor, "anchor results JSON")->required();
  b->add_option("--test", bd.test, "test results JSON")->required();
  b->add_option("--out", bd.out, "output JSON path");

  ProfileArgs prof;
  auto* p = app.add_subcommand("profile", "analytic complexity report");
  p->add_option("--framework", prof.framework, "RC, CC, CRC or MCR");
  p->add_option("--buffer", prof.variant,
                "explicit, implicit:IB or hybrid:IB");
  p->add_option("--model-width", prof.width, "backbone channel width");
  p->add_option("--res", prof.res, "resolution WxH");
  p->add_option("--out", prof.out, "report JSON path");
  p->add_option("--table", prof.table, "write the full variant table CSV");
  p->add_option("--table-variants", prof.table_variants,
                "buffer variants for the table");

  MatrixArgs mx;
  auto* m = app.add_subcommand("matrix", "run the experiment matrix");
  m->add_option("--out", mx.out, "output directory")->required();
  m->add_option("--frameworks", mx.frameworks, "framework subset");
  m->add_option("--variants", mx.variants, "buffer variants");
  m->add_option("--lambdas", mx.lambdas, "rate points");
  m->add_option("--input", mx.inputs, "sequences (files or directories)");
  m->add_option("--model-width", mx.width, "backbone channel width");
  m->add_option("--frames", mx.frames, "frames per sequence");
  m->add_option("--intra-period", mx.intra_period, "intra frame period");
  m->add_flag("--train", mx.do_train, "train missing checkpoints");
  m->add_option("--steps", mx.steps, "training steps per cell");
  m->add_option("--patch", mx.patch, "training patch size");
  m->add_option("--batch", mx.batch, "training batch size");
  m->add_option("--seed", mx.seed, "base seed");
  m->add_option("--anchor", mx.anchor, "anchor cell framework/variant");
  m->add_option("--jobs", mx.jobs, "parallel evaluation jobs");

  PlotArgs pl;
  auto* g = app.add_subcommand("plot", "charts from matrix results");
  g->add_option("--results", pl.results, "matrix output directory")
      ->required();
  g->add_option("--out", pl.out, "chart output directory")->required();

  GenArgs gen;
  auto* gd = app.add_subcommand("gen-data", "generate synthetic sequences");
  gd->add_option("--out", gen.out, "output directory")->required();
  gd->add_option("--count", gen.count, "number of sequences");
  gd->add_option("--frames", gen.frames, "frames per sequence");
  gd->add_option("--size", gen.size, "frame size WxH");
  gd->add_option("--seed", gen.seed, "base seed");

  try {
    app.parse(argc, argv);
    if (t->parsed()) return cmd_train(train);
    if (e->parsed()) return cmd_encode(enc);
    if (d->parsed()) return cmd_decode(dec);
    if (ve->parsed()) return cmd_eval(ev);
    if (b->parsed()) return cmd_bdrate(bd);
    if (p->parsed()) return cmd_profile(prof);
    if (m->parsed()) return cmd_matrix(mx);
    if (g->parsed()) return cmd_plot(pl);
    if (gd->parsed()) return cmd_gendata(gen);
    throw UsageError("no subcommand");
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex);
    return code == 0 ? 0 : 1;
  } catch (const UsageError& ex) {
    std::cerr << "usage error: " << ex.what() << "\n";
    return 1;
  } catch (const IntegrityError& ex) {
    std::cerr << "integrity error: " << ex.what() << "\n";
    return 3;
  } catch (const Error& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("lvc");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(int(argv.size()), argv.data());
}

}  // namespace lvc
